use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::scalar::{fmt_q, Field, Rational};
use super::sparse::SparseMatrix;

/// Univariate polynomial, coefficients from degree 0 upward, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Field> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![T::one()] }
    }

    pub fn x() -> Self {
        Poly { coeffs: vec![T::zero(), T::one()] }
    }

    /// x - r
    pub fn linear(r: &T) -> Self {
        Poly { coeffs: vec![-r.clone(), T::one()] }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_one()
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = T::one() / self.lead();
        self.scaled(&inv)
    }

    pub fn scaled(&self, c: &T) -> Self {
        Poly::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(T::zero);
                    let b = other.coeffs.get(i).cloned().unwrap_or_else(T::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(&-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.coeffs.len() - 1;
        let lead_inv = T::one() / d.lead();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); r.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = r[k + dd].clone() * lead_inv.clone();
            if !c.is_zero() {
                for (j, b) in d.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].clone() - c.clone() * b.clone();
                }
            }
            quot[k] = c;
        }
        r.truncate(dd);
        (Poly::new(quot), Poly::new(r))
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.div_rem(self).1.is_zero()
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn lcm(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g = self.gcd(other);
        self.mul(&other.div_rem(&g).0).monic()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, m: &SparseMatrix<T>) -> SparseMatrix<T> {
        let n = m.rows();
        let mut acc = SparseMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m).add(&SparseMatrix::identity(n).scaled(c));
        }
        acc
    }
}

impl Poly<Rational> {
    /// Splits off every rational root. Returns roots with multiplicities in
    /// increasing order and the cofactor that has no rational root.
    pub fn rational_roots(&self) -> (Vec<(Rational, usize)>, Poly<Rational>) {
        let mut rest = self.monic();
        let mut roots = Vec::new();
        if rest.is_zero() {
            return (roots, rest);
        }
        let mut zero_mult = 0;
        while rest.degree().unwrap_or(0) > 0 && rest.coeffs[0].is_zero() {
            rest = Poly::new(rest.coeffs[1..].to_vec());
            zero_mult += 1;
        }
        if zero_mult > 0 {
            roots.push((Rational::zero(), zero_mult));
        }
        if rest.degree().unwrap_or(0) > 0 {
            let ints = integer_coeffs(&rest);
            let a0 = ints[0].abs();
            let an = ints.last().unwrap().abs();
            let nums = divisors(&a0);
            let dens = divisors(&an);
            let mut cands: Vec<Rational> = Vec::new();
            for p in &nums {
                for d in &dens {
                    let r = Rational::new(p.clone(), d.clone());
                    cands.push(r.clone());
                    cands.push(-r);
                }
            }
            cands.sort();
            cands.dedup();
            for r in cands {
                let lin = Poly::linear(&r);
                let mut mult = 0;
                loop {
                    if rest.degree().unwrap_or(0) == 0 {
                        break;
                    }
                    let (qt, rem) = rest.div_rem(&lin);
                    if !rem.is_zero() {
                        break;
                    }
                    rest = qt;
                    mult += 1;
                }
                if mult > 0 {
                    roots.push((r, mult));
                }
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        (roots, rest)
    }

    /// Renders with `p/q` coefficients, highest degree first, e.g. `1/1 x^2 + 1/5 x`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0/1".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => " x".to_string(),
                _ => format!(" x^{i}"),
            };
            parts.push(format!("{}{}", fmt_q(c), mono));
        }
        parts.join(" + ")
    }
}

fn integer_coeffs(p: &Poly<Rational>) -> Vec<BigInt> {
    let l = p.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    p.coeffs.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect()
}

/// Positive divisors by trial division.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut m = n.abs();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut e = 0;
        while (&m % &p).is_zero() {
            m /= &p;
            e += 1;
        }
        if e > 0 {
            factors.push((p.clone(), e));
        }
        p += 1;
    }
    if m > BigInt::one() {
        factors.push((m, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::new();
        for d in &divs {
            let mut pe = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pe);
                pe *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    divs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::scalar::{q, qi};

    fn p(c: &[Rational]) -> Poly<Rational> {
        Poly::new(c.to_vec())
    }

    #[test]
    fn division_and_gcd() {
        // (x-1)(x-2) and (x-1)(x+3)
        let a = Poly::linear(&qi(1)).mul(&Poly::linear(&qi(2)));
        let b = Poly::linear(&qi(1)).mul(&Poly::linear(&qi(-3)));
        assert_eq!(a.gcd(&b), Poly::linear(&qi(1)));
        assert_eq!(a.lcm(&b).degree(), Some(3));
        let (qt, r) = a.div_rem(&Poly::linear(&qi(2)));
        assert!(r.is_zero());
        assert_eq!(qt, Poly::linear(&qi(1)));
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // x^2 (x + 1/5)^2 (x^2 + 1)
        let f = Poly::x()
            .pow(2)
            .mul(&Poly::linear(&q(-1, 5)).pow(2))
            .mul(&p(&[qi(1), qi(0), qi(1)]));
        let (roots, rest) = f.rational_roots();
        assert_eq!(roots, vec![(q(-1, 5), 2), (qi(0), 2)]);
        assert_eq!(rest, p(&[qi(1), qi(0), qi(1)]));
    }

    #[test]
    fn render_uses_fraction_strings() {
        let f = Poly::x().mul(&Poly::linear(&q(-1, 5)));
        assert_eq!(f.render(), "1/1 x^2 + 1/5 x");
    }
}
