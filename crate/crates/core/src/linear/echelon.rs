use std::collections::BTreeMap;

use super::scalar::Field;
use super::sparse::{SparseMatrix, SparseVec};

/// Incremental reduced row echelon form.
///
/// Rows are kept fully reduced: each stored row has a unit entry at its pivot
/// and zeros at every other pivot. The pivot of a new row is the support index
/// with the largest `(priority, index)`.
#[derive(Clone, Debug)]
pub struct Echelon<T> {
    rows: BTreeMap<usize, SparseVec<T>>,
    priority: Option<Vec<i64>>,
}

impl<T: Field> Default for Echelon<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Field> Echelon<T> {
    /// Pivots on the largest index of each row.
    pub fn new() -> Self {
        Echelon { rows: BTreeMap::new(), priority: None }
    }

    pub fn with_priority(priority: Vec<i64>) -> Self {
        Echelon { rows: BTreeMap::new(), priority: Some(priority) }
    }

    fn key(&self, i: usize) -> (i64, usize) {
        match &self.priority {
            Some(p) => (p.get(i).copied().unwrap_or(0), i),
            None => (0, i),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_pivot(&self, i: usize) -> bool {
        self.rows.contains_key(&i)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseVec<T>)> + '_ {
        self.rows.iter().map(|(p, r)| (*p, r))
    }

    /// Normal form of `v` modulo the row span; supported on non-pivots.
    pub fn reduce(&self, v: &SparseVec<T>) -> SparseVec<T> {
        let hits: Vec<(usize, T)> = v
            .iter()
            .filter(|(i, _)| self.rows.contains_key(i))
            .map(|(i, c)| (i, c.clone()))
            .collect();
        let mut out = v.clone();
        for (p, c) in hits {
            out.add_scaled(&self.rows[&p], &-c);
        }
        out
    }

    pub fn contains(&self, v: &SparseVec<T>) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span. Returns the new pivot, or `None` if `v` was dependent.
    pub fn insert(&mut self, v: &SparseVec<T>) -> Option<usize> {
        let r = self.reduce(v);
        let pivot = r.support().max_by_key(|&i| self.key(i))?;
        let inv = T::one() / r.coeff(pivot);
        let r = r.scaled(&inv);
        for row in self.rows.values_mut() {
            if let Some(c) = row.get(pivot).cloned() {
                row.add_scaled(&r, &-c);
            }
        }
        self.rows.insert(pivot, r);
        Some(pivot)
    }

    /// Basis of the orthogonal complement of the row span inside `cols` coordinates,
    /// i.e. the kernel of the matrix with these rows.
    pub fn kernel_basis(&self, cols: usize) -> Vec<SparseVec<T>> {
        (0..cols)
            .filter(|f| !self.rows.contains_key(f))
            .map(|f| {
                let mut v = SparseVec::unit(f);
                for (p, row) in &self.rows {
                    if let Some(c) = row.get(f) {
                        v.add_term(*p, -c.clone());
                    }
                }
                v
            })
            .collect()
    }
}

/// Rank and a kernel basis of `m`, pivoting on sparse columns first.
pub fn rank_kernel<T: Field>(m: &SparseMatrix<T>) -> (usize, Vec<SparseVec<T>>) {
    let mut support = vec![0i64; m.cols()];
    for r in m.row_vecs() {
        for j in r.support() {
            support[j] += 1;
        }
    }
    let mut e = Echelon::with_priority(support.into_iter().map(|s| -s).collect());
    for r in m.row_vecs() {
        e.insert(r);
    }
    (e.rank(), e.kernel_basis(m.cols()))
}

pub fn rank<T: Field>(vectors: &[SparseVec<T>]) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Solves `sum_j x_j * columns[j] = target` if possible.
pub fn solve_combination<T: Field>(columns: &[SparseVec<T>], target: &SparseVec<T>) -> Option<Vec<T>> {
    // Augment each column with a tag coordinate past every data coordinate.
    let offset = columns
        .iter()
        .chain(std::iter::once(target))
        .filter_map(|c| c.max_index())
        .max()
        .map_or(0, |m| m + 1);
    let n = columns.len();
    let mut priority = vec![1i64; offset];
    priority.extend(std::iter::repeat(0).take(n));
    let mut e = Echelon::with_priority(priority);
    for (j, c) in columns.iter().enumerate() {
        let mut aug = c.clone();
        aug.add_term(offset + j, T::one());
        e.insert(&aug);
    }
    let r = e.reduce(target);
    if r.support().any(|i| i < offset) {
        return None;
    }
    // target - sum(tags) reduces to r, so target = sum over tag coefficients of -r.
    let mut x = vec![T::zero(); n];
    for (i, c) in r.iter() {
        x[i - offset] = -c.clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::scalar::{qi, Rational};

    fn m(rows: &[&[i64]]) -> SparseMatrix<Rational> {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.iter().map(|x| qi(*x)).collect()).collect::<Vec<_>>())
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let (r, k) = rank_kernel(&SparseMatrix::<Rational>::zeros(3, 3));
        assert_eq!((r, k.len()), (0, 3));
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let (r, k) = rank_kernel(&SparseMatrix::<Rational>::identity(4));
        assert_eq!((r, k.len()), (4, 0));
    }

    #[test]
    fn rank_one_two_by_two() {
        let a = m(&[&[1, 2], &[2, 4]]);
        let (r, k) = rank_kernel(&a);
        assert_eq!(r, 1);
        assert_eq!(k.len(), 1);
        // hand elimination: x + 2y = 0, kernel spanned by (-2, 1)
        let v = &k[0];
        assert_eq!(v.coeff(0) * qi(1), v.coeff(1) * qi(-2));
        assert!(a.mul_vec(v).is_zero());
    }

    #[test]
    fn solve_finds_combination() {
        let cols = vec![SparseVec::from_dense(&[qi(1), qi(1), qi(0)]), SparseVec::from_dense(&[qi(0), qi(1), qi(1)])];
        let t = SparseVec::from_dense(&[qi(2), qi(5), qi(3)]);
        assert_eq!(solve_combination(&cols, &t).unwrap(), vec![qi(2), qi(3)]);
        let bad = SparseVec::from_dense(&[qi(1), qi(0), qi(1)]);
        assert!(solve_combination(&cols, &bad).is_none());
    }
}
