use super::echelon::rank_kernel;
use super::poly::Poly;
use super::scalar::{Field, Rational};
use super::sparse::{SparseMatrix, SparseVec};
use crate::error::Error;

/// Minimal polynomial of the vector `v` under `m`: the monic relation among
/// its Krylov iterates of least degree.
pub fn local_min_poly<T: Field>(m: &SparseMatrix<T>, v: &SparseVec<T>) -> Poly<T> {
    let n = m.rows();
    // Reduced Krylov rows, each with its pivot and its expression in powers of m.
    let mut basis: Vec<(usize, Vec<T>, Vec<T>)> = Vec::new();
    let mut power = v.to_dense(n);
    for j in 0..=n {
        let mut w = power.clone();
        let mut combo = vec![T::zero(); j + 1];
        combo[j] = T::one();
        for (p, row, rc) in &basis {
            let c = w[*p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in w.iter_mut().zip(row) {
                *x = x.clone() - c.clone() * y.clone();
            }
            for (x, y) in combo.iter_mut().zip(rc) {
                *x = x.clone() - c.clone() * y.clone();
            }
        }
        match w.iter().position(|x| !x.is_zero()) {
            None => return Poly::new(combo),
            Some(p) => {
                let inv = T::one() / w[p].clone();
                let row: Vec<T> = w.iter().map(|x| x.clone() * inv.clone()).collect();
                let rc: Vec<T> = combo.iter().map(|x| x.clone() * inv.clone()).collect();
                basis.push((p, row, rc));
            }
        }
        power = m.mul_vec(&SparseVec::from_dense(&power)).to_dense(n);
    }
    unreachable!("Krylov sequence longer than the dimension")
}

/// Minimal polynomial as the least common multiple of the per-basis-vector
/// Krylov relations. Basis vectors already killed by the running product are skipped.
pub fn min_poly<T: Field>(m: &SparseMatrix<T>) -> Poly<T> {
    assert!(m.is_square(), "minimal polynomial needs a square matrix");
    let n = m.rows();
    let mut acc = Poly::one();
    let mut acc_at_m = SparseMatrix::identity(n);
    for i in 0..n {
        let e = SparseVec::unit(i);
        if acc_at_m.mul_vec(&e).is_zero() {
            continue;
        }
        let local = local_min_poly(m, &e);
        acc = acc.lcm(&local);
        acc_at_m = acc.eval_matrix(m);
    }
    acc
}

/// Generalized eigenspace decomposition over the rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSplit<T> {
    pub eigenvalues: Vec<T>,
    pub blocks: Vec<Vec<SparseVec<T>>>,
    pub multiplicities: Vec<usize>,
    pub min_poly: Poly<T>,
}

impl<T: Field> EigenSplit<T> {
    pub fn block_of(&self, lambda: &T) -> Option<&[SparseVec<T>]> {
        self.eigenvalues.iter().position(|x| x == lambda).map(|i| self.blocks[i].as_slice())
    }
}

pub fn gen_eigen_split(m: &SparseMatrix<Rational>) -> Result<EigenSplit<Rational>, Error> {
    let phi = min_poly(m);
    let (roots, rest) = phi.rational_roots();
    if rest.degree().unwrap_or(0) > 0 {
        return Err(Error::NonRationalSpectrum(rest.render()));
    }
    let mut split = EigenSplit { eigenvalues: vec![], blocks: vec![], multiplicities: vec![], min_poly: phi };
    for (lambda, k) in roots {
        let (_, kernel) = rank_kernel(&m.shift(&lambda).pow(k));
        split.eigenvalues.push(lambda);
        split.blocks.push(kernel);
        split.multiplicities.push(k);
    }
    Ok(split)
}
