use std::collections::BTreeMap;

use super::scalar::Field;

/// Sparse vector keyed by coordinate. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVec<T> {
    entries: BTreeMap<usize, T>,
}

impl<T> Default for SparseVec<T> {
    fn default() -> Self {
        SparseVec { entries: BTreeMap::new() }
    }
}

impl<T: Field> SparseVec<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(i: usize) -> Self {
        let mut v = Self::new();
        v.entries.insert(i, T::one());
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, T)>>(pairs: I) -> Self {
        let mut v = Self::new();
        for (i, c) in pairs {
            v.add_term(i, c);
        }
        v
    }

    pub fn from_dense(values: &[T]) -> Self {
        Self::from_pairs(values.iter().cloned().enumerate())
    }

    pub fn to_dense(&self, len: usize) -> Vec<T> {
        let mut out = vec![T::zero(); len];
        for (i, c) in &self.entries {
            out[*i] = c.clone();
        }
        out
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.entries.get(&i)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.entries.get(&i).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, i: usize, c: T) {
        if c.is_zero() {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, c);
        }
    }

    pub fn add_term(&mut self, i: usize, c: T) {
        if c.is_zero() {
            return;
        }
        match self.entries.remove(&i) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.entries.insert(i, s);
                }
            }
            None => {
                self.entries.insert(i, c);
            }
        }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, other: &Self, c: &T) {
        if c.is_zero() {
            return;
        }
        for (i, x) in &other.entries {
            self.add_term(*i, c.clone() * x.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &T::one());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &-T::one());
        out
    }

    pub fn scaled(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::new();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, x)| (*i, x.clone() * c.clone())).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(&-T::one())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> + '_ {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn dot(&self, other: &Self) -> T {
        let (small, large) = if self.nnz() <= other.nnz() { (self, other) } else { (other, self) };
        let mut acc = T::zero();
        for (i, x) in &small.entries {
            if let Some(y) = large.entries.get(i) {
                acc = acc + x.clone() * y.clone();
            }
        }
        acc
    }

    /// Reindexes coordinates through `f`, merging collisions.
    pub fn map_indices(&self, f: impl Fn(usize) -> usize) -> Self {
        Self::from_pairs(self.entries.iter().map(|(i, c)| (f(*i), c.clone())))
    }

    pub fn retain(&mut self, keep: impl Fn(usize) -> bool) {
        self.entries.retain(|i, _| keep(*i));
    }
}

/// Row-major sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec<T>>,
}

impl<T: Field> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, data: vec![SparseVec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i] = SparseVec::unit(i);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVec<T>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.max_index().map_or(true, |c| c < cols)));
        SparseMatrix { rows: rows.len(), cols, data: rows }
    }

    /// Builds a matrix whose j-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[SparseVec<T>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, c) in col.iter() {
                m.data[i].set(j, c.clone());
            }
        }
        m
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| SparseVec::from_dense(r)).collect())
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        self.data.iter().map(|r| r.to_dense(self.cols)).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &SparseVec<T> {
        &self.data[i]
    }

    pub fn row_vecs(&self) -> &[SparseVec<T>] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i].coeff(j)
    }

    pub fn set(&mut self, i: usize, j: usize, c: T) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i].set(j, c);
    }

    pub fn column(&self, j: usize) -> SparseVec<T> {
        SparseVec::from_pairs(self.data.iter().enumerate().filter_map(|(i, r)| r.get(j).map(|c| (i, c.clone()))))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.nnz()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul_vec(&self, v: &SparseVec<T>) -> SparseVec<T> {
        SparseVec::from_pairs(self.data.iter().enumerate().map(|(i, r)| (i, r.dot(v))))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let data = self
            .data
            .iter()
            .map(|r| {
                let mut out = SparseVec::new();
                for (k, c) in r.iter() {
                    out.add_scaled(&other.data[k], c);
                }
                out
            })
            .collect();
        SparseMatrix { rows: self.rows, cols: other.cols, data }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, r) in self.data.iter().enumerate() {
            for (j, c) in r.iter() {
                t.data[j].set(i, c.clone());
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect();
        SparseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scaled(&self, c: &T) -> Self {
        SparseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|r| r.scaled(c)).collect() }
    }

    /// self - lambda * I
    pub fn shift(&self, lambda: &T) -> Self {
        assert!(self.is_square());
        let mut m = self.clone();
        for i in 0..self.rows {
            m.data[i].add_term(i, -lambda.clone());
        }
        m
    }

    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Restricts to the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let pos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(j, c)| (*c, j)).collect();
        let data = rows
            .iter()
            .map(|&i| SparseVec::from_pairs(self.data[i].iter().filter_map(|(c, x)| pos.get(&c).map(|j| (*j, x.clone())))))
            .collect();
        SparseMatrix { rows: rows.len(), cols: cols.len(), data }
    }
}
