//! Finite-dimensional algebras graded by a Hamiltonian, and the eigenvalue
//! bookkeeping (`Γ` sets, the gap) shared by the quotient engine and the
//! module category.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linear::{as_integer, gen_eigen_split, solve_combination};
use crate::{QMatrix, QVec, Rational};

/// Minimal elements of `omega` under `λ ≽ μ` iff `λ - μ` is a nonnegative integer.
pub fn gamma0(omega: &[Rational]) -> Vec<Rational> {
    let mut out: Vec<Rational> = omega
        .iter()
        .filter(|l| !omega.iter().any(|m| m != *l && nonneg_int(&(*l - m)).is_some()))
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Largest nonnegative integral difference among elements of `omega`.
pub fn gap(omega: &[Rational]) -> i64 {
    let mut g = 0;
    for l in omega {
        for m in omega {
            if let Some(k) = nonneg_int(&(l - m)) {
                g = g.max(k);
            }
        }
    }
    g
}

pub fn nonneg_int(x: &Rational) -> Option<i64> {
    as_integer(x).filter(|k| *k >= 0)
}

/// `Γ_m = { γ + k : γ ∈ Γ_0, 0 <= k <= m }`, sorted.
pub fn gamma_m(gamma0: &[Rational], m: i64) -> Vec<Rational> {
    let mut out = Vec::new();
    for g in gamma0 {
        for k in 0..=m {
            out.push(g + Rational::from_integer(k.into()));
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn in_gamma(gamma0: &[Rational], m: i64, lambda: &Rational) -> bool {
    gamma0.iter().any(|g| nonneg_int(&(lambda - g)).map_or(false, |k| k <= m))
}

/// Membership in `Γ_∞`.
pub fn in_gamma_infinity(gamma0: &[Rational], lambda: &Rational) -> bool {
    gamma0.iter().any(|g| nonneg_int(&(lambda - g)).is_some())
}

/// Finite-dimensional associative algebra with a basis of simultaneous
/// generalized eigenvectors: basis element `i` lies in the block
/// `A[labels[i].0, labels[i].1]` and has degree `λ - μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteAlgebra {
    pub labels: Vec<(Rational, Rational)>,
    /// `mult[i][j] = e_i · e_j`
    pub mult: Vec<Vec<QVec>>,
    pub unit: QVec,
    pub hamiltonian: QVec,
    /// Eigenvalue window the algebra was cut from.
    pub gamma: Vec<Rational>,
}

impl FiniteAlgebra {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn degree(&self, i: usize) -> Rational {
        &self.labels[i].0 - &self.labels[i].1
    }

    pub fn mul(&self, x: &QVec, y: &QVec) -> QVec {
        let mut out = QVec::new();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                out.add_scaled(&self.mult[i][j], &(a * b));
            }
        }
        out
    }

    /// Matrix of left multiplication by `x` on the algebra itself.
    pub fn left_matrix(&self, x: &QVec) -> QMatrix {
        let cols: Vec<QVec> = (0..self.dim()).map(|j| self.mul(x, &QVec::unit(j))).collect();
        QMatrix::from_columns(self.dim(), &cols)
    }

    pub fn right_matrix(&self, x: &QVec) -> QMatrix {
        let cols: Vec<QVec> = (0..self.dim()).map(|j| self.mul(&QVec::unit(j), x)).collect();
        QMatrix::from_columns(self.dim(), &cols)
    }

    /// Indices of basis elements in blocks `(λ, μ)` with both labels accepted by `keep`.
    pub fn block_indices(&self, keep: impl Fn(&Rational, &Rational) -> bool) -> Vec<usize> {
        (0..self.dim()).filter(|&i| keep(&self.labels[i].0, &self.labels[i].1)).collect()
    }

    /// Subalgebra spanned by the blocks with both labels in `levels`,
    /// with unit and Hamiltonian projected onto the diagonal blocks there.
    pub fn restrict(&self, levels: &[Rational]) -> Result<FiniteAlgebra> {
        let keep = self.block_indices(|l, m| levels.contains(l) && levels.contains(m));
        let pos: std::collections::HashMap<usize, usize> = keep.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let map = |v: &QVec| -> Result<QVec> {
            if v.support().any(|i| !pos.contains_key(&i)) {
                return Err(Error::InvariantViolation(vec!["restricted blocks are not closed under multiplication".into()]));
            }
            Ok(v.map_indices(|i| pos[&i]))
        };
        let mut mult = Vec::new();
        for &i in &keep {
            let mut row = Vec::new();
            for &j in &keep {
                row.push(map(&self.mult[i][j])?);
            }
            mult.push(row);
        }
        let proj = |v: &QVec| {
            let mut w = v.clone();
            w.retain(|i| pos.contains_key(&i));
            w.map_indices(|i| pos[&i])
        };
        Ok(FiniteAlgebra {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            mult,
            unit: proj(&self.unit),
            hamiltonian: proj(&self.hamiltonian),
            gamma: levels.to_vec(),
        })
    }

    /// Structural self-check: associativity, two-sided unit, block
    /// orthogonality and the Hamiltonian commutator.
    pub fn check(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.dim();
        for i in 0..n {
            let e = QVec::unit(i);
            if self.mul(&self.unit, &e) != e || self.mul(&e, &self.unit) != e {
                bad.push(format!("unit fails on basis {i}"));
            }
            // [h, a] stays in the block of a
            let comm = self.mul(&self.hamiltonian, &e).sub(&self.mul(&e, &self.hamiltonian));
            if comm.iter().any(|(k, _)| self.labels[k] != self.labels[i]) {
                bad.push(format!("hamiltonian commutator leaves block of basis {i}"));
            }
            for j in 0..n {
                let p = &self.mult[i][j];
                if self.labels[i].1 != self.labels[j].0 && !p.is_zero() {
                    bad.push(format!("blocks of {i} and {j} are not orthogonal"));
                }
                for (k, _) in p.iter() {
                    if self.labels[k] != (self.labels[i].0.clone(), self.labels[j].1.clone()) {
                        bad.push(format!("product of {i} and {j} leaves its block"));
                    }
                }
                for k in 0..n {
                    let l = self.mul(&self.mult[i][j], &QVec::unit(k));
                    let r = self.mul(&e, &self.mult[j][k]);
                    if l != r {
                        bad.push(format!("associativity fails on ({i}, {j}, {k})"));
                    }
                }
            }
        }
        bad
    }

    /// Generalized eigenvalues of left multiplication by the Hamiltonian on
    /// the algebra; these must be the left labels.
    pub fn check_left_spectrum(&self) -> Result<bool> {
        let h = self.left_matrix(&self.hamiltonian);
        let split = gen_eigen_split(&h)?;
        for (lambda, block) in split.eigenvalues.iter().zip(&split.blocks) {
            for v in block {
                if v.support().any(|i| &self.labels[i].0 != lambda) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn one() -> FiniteAlgebra {
        FiniteAlgebra {
            labels: vec![(Rational::zero(), Rational::zero())],
            mult: vec![vec![QVec::unit(0)]],
            unit: QVec::unit(0),
            hamiltonian: QVec::new(),
            gamma: vec![Rational::zero()],
        }
    }

    /// Coordinates of `target` in the span of `columns`, if it lies there.
    pub fn coordinates(columns: &[QVec], target: &QVec) -> Option<QVec> {
        solve_combination(columns, target).map(|x| QVec::from_dense(&x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{q, qi};

    #[test]
    fn gap_and_gamma_by_enumeration() {
        let om = vec![qi(0), q(1, 2)];
        assert_eq!(gap(&om), 0);
        assert_eq!(gamma0(&om), om);
        let om = vec![qi(0), qi(2)];
        assert_eq!(gap(&om), 2);
        assert_eq!(gamma0(&om), vec![qi(0)]);
        let om = vec![qi(0), q(-1, 5)];
        assert_eq!(gap(&om), 0);
        assert_eq!(gamma0(&om), vec![q(-1, 5), qi(0)]);
        assert_eq!(gamma_m(&[qi(0)], 2), vec![qi(0), qi(1), qi(2)]);
        assert!(in_gamma(&[q(1, 2)], 1, &q(3, 2)));
        assert!(!in_gamma(&[q(1, 2)], 0, &q(3, 2)));
    }

    #[test]
    fn one_dimensional_algebra_checks() {
        assert!(FiniteAlgebra::one().check().is_empty());
    }
}
