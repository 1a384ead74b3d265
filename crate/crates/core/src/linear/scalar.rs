use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, Zero};

use crate::error::Error;

/// Field of coefficients. Every exact field type from `num` qualifies.
pub trait Field: Clone + PartialEq + Debug + Num + Neg<Output = Self> + FromBigInt {}

impl<T> Field for T where T: Clone + PartialEq + Debug + Num + Neg<Output = T> + FromBigInt {}

pub trait FromBigInt {
    fn from_bigint(n: &BigInt) -> Self;
}

impl FromBigInt for BigRational {
    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }
}

impl FromBigInt for Ratio<i64> {
    fn from_bigint(n: &BigInt) -> Self {
        Ratio::from_integer(i64::try_from(n).expect("integer exceeds i64"))
    }
}

impl FromBigInt for Ratio<i128> {
    fn from_bigint(n: &BigInt) -> Self {
        Ratio::from_integer(i128::try_from(n).expect("integer exceeds i128"))
    }
}

pub type Rational = BigRational;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders as `p/q` even for integers.
pub fn fmt_q(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses the canonical `p/q` form: q > 0 and gcd(p, q) = 1.
pub fn parse_q(s: &str) -> Result<Rational, Error> {
    let bad = || Error::Parse(format!("rational `{s}` is not of the form p/q in lowest terms"));
    let (p, d) = s.trim().split_once('/').ok_or_else(bad)?;
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if !d.is_positive() || !p.gcd(&d).is_one() {
        return Err(bad());
    }
    Ok(Rational::new_raw(p, d))
}

/// Integer value of a rational, if it has one.
pub fn as_integer(x: &Rational) -> Option<i64> {
    if x.is_integer() {
        i64::try_from(x.to_integer()).ok()
    } else {
        None
    }
}

/// Generalized binomial coefficient C(top, i) for any integer top.
pub fn binom<T: Field>(top: i64, i: i64) -> T {
    if i < 0 {
        return T::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..i {
        num *= BigInt::from(top - j);
        den *= BigInt::from(j + 1);
    }
    from_bigint::<T>(&(num / den))
}

/// Embeds an integer into any field by delegating to [`FromBigInt`].
pub fn from_bigint<T: Field>(n: &BigInt) -> T {
    T::from_bigint(n)
}

pub fn from_i64<T: Field>(n: i64) -> T {
    from_bigint(&BigInt::from(n))
}

pub fn is_zero<T: Zero>(x: &T) -> bool {
    x.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn binomials_with_negative_tops() {
        assert_eq!(binom::<Rational>(5, 2), qi(10));
        assert_eq!(binom::<Rational>(-1, 3), qi(-1));
        assert_eq!(binom::<Rational>(-2, 2), qi(3));
        assert_eq!(binom::<Rational>(3, 4), qi(0));
        assert_eq!(binom::<Rational>(3, -1), qi(0));
        assert_eq!(binom::<Rational64>(-3, 2), Rational64::from_integer(6));
    }

    #[test]
    fn parse_requires_canonical_form() {
        assert_eq!(parse_q("-11/5").unwrap(), q(-11, 5));
        assert_eq!(parse_q("0/1").unwrap(), qi(0));
        assert!(parse_q("2/4").is_err());
        assert!(parse_q("1/-2").is_err());
        assert!(parse_q("3").is_err());
        assert_eq!(fmt_q(&qi(3)), "3/1");
    }

    #[test]
    fn bigint_embedding_round_trips() {
        let n: BigInt = "-123456789012345678901".parse().unwrap();
        assert_eq!(from_bigint::<Rational>(&n), Rational::from_integer(n));
        assert_eq!(from_i64::<Rational64>(-77), Rational64::from_integer(-77));
    }
}
