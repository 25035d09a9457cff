//! Exact rational norm specifications and numerical tolerances.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FrameError, Result};

/// Exact rational with arbitrary-precision numerator and denominator,
/// always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rat_int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"`, `"p"`, or a terminating decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || FrameError::Parse(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(FrameError::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{whole}{frac}");
        let numer: BigInt = digits.parse().map_err(|_| bad())?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(numer, denom));
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Prescribed squared column norms `r` together with the target dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormSpec {
    d: usize,
    r: Vec<Rational>,
}

impl NormSpec {
    pub fn new(d: usize, r: Vec<Rational>) -> Result<Self> {
        if d == 0 {
            return Err(FrameError::InvalidSpec("dimension d must be positive".into()));
        }
        if r.is_empty() {
            return Err(FrameError::InvalidSpec("norm vector r is empty".into()));
        }
        if let Some((i, ri)) = r.iter().enumerate().find(|(_, ri)| !ri.is_positive()) {
            return Err(FrameError::InvalidSpec(format!(
                "r[{}] = {} is not positive",
                i + 1,
                format_rational(ri)
            )));
        }
        Ok(Self { d, r })
    }

    /// Parses a list of `"p/q"` strings.
    pub fn parse(d: usize, r: &[&str]) -> Result<Self> {
        let r = r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Self::new(d, r)
    }

    /// The equal-norm vector (d/n, …, d/n).
    pub fn equal_norm(d: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(FrameError::InvalidSpec("n must be positive".into()));
        }
        Self::new(d, vec![rat(d as i64, n as i64); n])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[Rational] {
        &self.r
    }

    pub fn r_f64(&self) -> Vec<f64> {
        self.r.iter().map(rational_to_f64).collect()
    }

    pub fn sum(&self) -> Rational {
        self.r.iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    /// Indices realizing r_(1) ≥ … ≥ r_(n); ties keep the original order.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| self.r[b].cmp(&self.r[a]));
        idx
    }

    /// r sorted non-increasingly.
    pub fn sorted_desc(&self) -> Vec<Rational> {
        self.sorted_order().into_iter().map(|i| self.r[i].clone()).collect()
    }

    /// Same spec with the entries of r permuted: entry i becomes r[perm[i]].
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(FrameError::DimensionMismatch("permutation length".into()));
        }
        Self::new(self.d, perm.iter().map(|&i| self.r[i].clone()).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct NormSpecFile {
    d: usize,
    r: Vec<String>,
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NormSpecFile { d: self.d, r: self.r.iter().map(format_rational).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = NormSpecFile::deserialize(d)?;
        let r = file
            .r
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        NormSpec::new(file.d, r).map_err(serde::de::Error::custom)
    }
}

/// Numerical thresholds shared by the flow and the structural tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub grad_tol: f64,
    pub residual_tol: f64,
    pub rank_tol: f64,
    pub spark_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { grad_tol: 1e-10, residual_tol: 1e-8, rank_tol: 1e-10, spark_tol: 1e-10 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.grad_tol, self.residual_tol, self.rank_tol, self.spark_tol];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(FrameError::OutOfRange(format!("tolerances must be positive: {self:?}")))
        }
    }
}
