//! Existence of Parseval frames with prescribed norms (majorization by the
//! all-ones vector) and the integer weight vector obtained by clearing
//! denominators.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::spec::{format_rational, rat_int, serde_rational, NormSpec, Rational};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    #[serde(with = "serde_rational")]
    pub sum_r: Rational,
    /// Smallest k (1-based) with r_(1) + … + r_(k) > k.
    pub first_violated_k: Option<usize>,
    /// The violated partial sum, when `first_violated_k` is present.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub violated_partial_sum: Option<Rational>,
    /// 0-based indices realizing the non-increasing order of r.
    pub sorted_order: Vec<usize>,
}

fn serialize_opt_rational<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&format_rational(r)),
        None => s.serialize_none(),
    }
}

impl AdmissibilityVerdict {
    /// Human-readable reason for rejection, if any.
    pub fn explain(&self, d: usize) -> String {
        if self.admissible {
            return "admissible".into();
        }
        let mut reasons = Vec::new();
        if self.sum_r != rat_int(d as i64) {
            reasons.push(format!("sum of r is {} but d = {d}", format_rational(&self.sum_r)));
        }
        if let (Some(k), Some(p)) = (self.first_violated_k, &self.violated_partial_sum) {
            reasons.push(format!(
                "partial sum of the {k} largest entries is {} > {k}",
                format_rational(p)
            ));
        }
        reasons.join("; ")
    }
}

/// Decides whether PF_d(r) is non-empty: Σ r_i = d and the top-k partial
/// sums are at most k for 1 ≤ k ≤ d−1. All comparisons are exact.
pub fn check_admissible(spec: &NormSpec) -> AdmissibilityVerdict {
    let sorted_order = spec.sorted_order();
    let sum_r = spec.sum();
    let d = spec.d();

    let mut partial = Rational::zero();
    let mut first_violated_k = None;
    let mut violated_partial_sum = None;
    for (k, &i) in sorted_order.iter().enumerate().take(d.saturating_sub(1)) {
        partial += &spec.r()[i];
        let k = k + 1;
        if partial > rat_int(k as i64) {
            first_violated_k = Some(k);
            violated_partial_sum = Some(partial.clone());
            break;
        }
    }

    let admissible = sum_r == rat_int(d as i64) && first_violated_k.is_none();
    AdmissibilityVerdict { admissible, sum_r, first_violated_k, violated_partial_sum, sorted_order }
}

/// Returns `Err(InadmissibleSpec)` with the verdict's explanation.
pub fn require_admissible(spec: &NormSpec) -> Result<AdmissibilityVerdict> {
    let verdict = check_admissible(spec);
    if verdict.admissible {
        Ok(verdict)
    } else {
        Err(FrameError::InadmissibleSpec(verdict.explain(spec.d())))
    }
}

/// Positive integers proportional to r, with their product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SVector {
    #[serde(serialize_with = "serialize_bigints")]
    pub s: Vec<BigInt>,
    #[serde(rename = "S", serialize_with = "serialize_bigint")]
    pub product: BigInt,
    /// gcd{a_i} / lcm{b_i} for r_i = a_i / b_i, so that r_i = s_i · scale.
    #[serde(with = "serde_rational")]
    pub scale: Rational,
}

fn serialize_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn serialize_bigints<S: serde::Serializer>(
    v: &[BigInt],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// s_i = r_i · lcm{b_1, …, b_n} / gcd{a_1, …, a_n} where r_i = a_i / b_i in
/// lowest terms.
pub fn build_s_vector(spec: &NormSpec) -> Result<SVector> {
    if let Some(bad) = spec.r().iter().find(|r| !r.is_positive()) {
        return Err(FrameError::InvalidSpec(format!(
            "entry {} is not positive",
            format_rational(bad)
        )));
    }
    let lcm_b = spec.r().iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let gcd_a = spec.r().iter().fold(BigInt::zero(), |acc, r| acc.gcd(r.numer()));
    let factor = Rational::new(lcm_b, gcd_a);

    let mut s = Vec::with_capacity(spec.n());
    for r in spec.r() {
        let v = r * &factor;
        debug_assert!(v.is_integer());
        s.push(v.to_integer());
    }
    let product = s.iter().fold(BigInt::one(), |acc, x| acc * x);
    Ok(SVector { s, product, scale: factor.recip() })
}
