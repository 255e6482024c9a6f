//! Scalar backends for matrix and coefficient arithmetic.
//!
//! Two backends are supported and never mixed inside one container: exact
//! Gaussian rationals (pairs of arbitrary-precision rationals) and double
//! complex numbers with a caller-supplied tolerance.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::PdsxError;

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRational {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GaussRational {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        GaussRational {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    /// |z|^2 as an exact rational.
    pub fn abs_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Parses the textual form `p/q+r/s i`. Integer shorthands (`2`,
    /// `-1/2`, `3 i`) and a missing imaginary part are accepted.
    pub fn parse(s: &str) -> Result<Self, PdsxError> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || PdsxError::Parse(format!("invalid exact scalar `{s}`"));

        let (re_part, im_part) = match compact.strip_suffix('i') {
            None => (compact.as_str(), None),
            Some(rest) => {
                // split at the last +/- that is not a leading sign or part of `/`
                let bytes = rest.as_bytes();
                let mut split = None;
                for k in (1..bytes.len()).rev() {
                    if (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'/' {
                        split = Some(k);
                        break;
                    }
                }
                match split {
                    Some(k) => (&rest[..k], Some(&rest[k..])),
                    None => ("0", Some(rest)),
                }
            }
        };

        let parse_rat = |txt: &str| -> Result<BigRational, PdsxError> {
            let txt = txt.strip_prefix('+').unwrap_or(txt);
            if txt.is_empty() || txt == "-" {
                return Ok(if txt == "-" {
                    -BigRational::one()
                } else {
                    BigRational::one()
                });
            }
            match txt.split_once('/') {
                Some((n, d)) => {
                    let n: BigInt = n.parse().map_err(|_| bad())?;
                    let d: BigInt = d.parse().map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(bad());
                    }
                    Ok(BigRational::new(n, d))
                }
                None => {
                    let n: BigInt = txt.parse().map_err(|_| bad())?;
                    Ok(BigRational::from_integer(n))
                }
            }
        };

        let re = parse_rat(re_part)?;
        let im = match im_part {
            Some(t) => parse_rat(t)?,
            None => BigRational::zero(),
        };
        Ok(GaussRational { re, im })
    }

    /// Canonical `p/q+r/s i` rendering used by the JSON interfaces.
    pub fn render(&self) -> String {
        let rat = |r: &BigRational| format!("{}/{}", r.numer(), r.denom());
        let im = rat(&self.im);
        if self.im.is_negative() {
            format!("{}{} i", rat(&self.re), im)
        } else {
            format!("{}+{} i", rat(&self.re), im)
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Arithmetic shared by the exact and floating scalar backends.
pub trait ComplexScalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// |z|^2 as a double, used for report norms and argmax searches.
    fn abs_sq_f64(&self) -> f64;
    /// The floating shadow of the scalar.
    fn to_complex64(&self) -> Complex64;
    /// True when the backend carries exact arithmetic.
    fn exact() -> bool;
}

impl ComplexScalar for GaussRational {
    fn zero() -> Self {
        GaussRational::from_int(0)
    }
    fn one() -> Self {
        GaussRational::from_int(1)
    }
    fn from_i64(n: i64) -> Self {
        GaussRational::from_int(n)
    }
    fn add(&self, other: &Self) -> Self {
        GaussRational {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }
    fn sub(&self, other: &Self) -> Self {
        GaussRational {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }
    fn mul(&self, other: &Self) -> Self {
        GaussRational {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }
    fn neg(&self) -> Self {
        GaussRational {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn conj(&self) -> Self {
        GaussRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn abs_sq_f64(&self) -> f64 {
        self.abs_sq().to_f64().unwrap_or(f64::NAN)
    }
    fn to_complex64(&self) -> Complex64 {
        GaussRational::to_complex64(self)
    }
    fn exact() -> bool {
        true
    }
}

impl ComplexScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn abs_sq_f64(&self) -> f64 {
        self.norm_sqr()
    }
    fn to_complex64(&self) -> Complex64 {
        *self
    }
    fn exact() -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips() {
        for s in ["1/2+3/4 i", "-1/2+0/1 i", "2/1-5/3 i", "0/1+1/1 i"] {
            let z = GaussRational::parse(s).unwrap();
            assert_eq!(GaussRational::parse(&z.render()).unwrap(), z);
        }
    }

    #[test]
    fn parse_shorthands() {
        assert_eq!(GaussRational::parse("2").unwrap(), GaussRational::from_int(2));
        assert_eq!(
            GaussRational::parse("-1/2").unwrap(),
            GaussRational::from_ratio(-1, 2)
        );
        assert_eq!(GaussRational::parse("i").unwrap(), GaussRational::i());
        let z = GaussRational::parse("1-i").unwrap();
        assert_eq!(z, GaussRational::from_int(1).add(&GaussRational::i().neg()));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(GaussRational::parse("1/0").is_err());
        assert!(GaussRational::parse("x+y i").is_err());
    }

    #[test]
    fn gauss_arithmetic() {
        let i = GaussRational::i();
        assert_eq!(i.mul(&i), GaussRational::from_int(-1));
        let z = GaussRational::from_ratio(1, 2);
        assert!(z.mul(&z.conj()).sub(&GaussRational::from_ratio(1, 4)).is_zero());
    }
}
