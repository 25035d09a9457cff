//! Exact arithmetic behind the connectivity certificates: the counts
//! k_ℓ(r), the best uniform ansatz constant, stratum dimensions of the
//! unstable locus, codimension bounds and the q-connectedness conditions.
//!
//! Certificates are sufficient conditions only. A negative certificate
//! never asserts that a frame space is disconnected.

use num_traits::Zero;
use serde::Serialize;

use crate::admissibility::require_admissible;
use crate::error::{FrameError, Result};
use crate::frame::Field;
use crate::spec::{format_rational, rat, rat_int, serde_rational, NormSpec, Rational};

/// min{k : r_(1) + … + r_(k) > ℓ}, with exact partial sums.
pub fn k_ell(spec: &NormSpec, ell: usize) -> Result<usize> {
    require_admissible(spec)?;
    if ell >= spec.d() {
        return Err(FrameError::OutOfRange(format!("ell = {ell} must be at most d - 1 = {}", spec.d() - 1)));
    }
    Ok(k_ell_unchecked(&spec.sorted_desc(), ell))
}

fn k_ell_unchecked(sorted: &[Rational], ell: usize) -> usize {
    let bound = rat_int(ell as i64);
    let mut partial = Rational::zero();
    for (k, r) in sorted.iter().enumerate() {
        partial += r;
        if partial > bound {
            return k + 1;
        }
    }
    // unreachable for admissible r since Σ r = d > ℓ
    sorted.len() + 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllRow {
    pub ell: usize,
    pub k_ell: usize,
    /// k_ℓ · d / (n ℓ)
    #[serde(with = "serde_rational")]
    pub ratio: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnsatzConstant {
    /// Largest c with k_ℓ(r) ≥ c·nℓ/d for every ℓ in 1..d−1.
    #[serde(with = "serde_rational")]
    pub c_best: Rational,
    /// d² / (n(d−1)), valid for every admissible r.
    #[serde(with = "serde_rational")]
    pub c_floor: Rational,
    pub per_ell: Vec<EllRow>,
}

fn require_d_at_least_two(spec: &NormSpec) -> Result<()> {
    if spec.d() < 2 {
        return Err(FrameError::OutOfRange(format!("requires d >= 2, got d = {}", spec.d())));
    }
    Ok(())
}

pub fn best_ansatz_constant(spec: &NormSpec) -> Result<AnsatzConstant> {
    require_admissible(spec)?;
    require_d_at_least_two(spec)?;
    let (d, n) = (spec.d() as i64, spec.n() as i64);
    let sorted = spec.sorted_desc();
    let per_ell: Vec<EllRow> = (1..spec.d())
        .map(|ell| {
            let k = k_ell_unchecked(&sorted, ell);
            EllRow { ell, k_ell: k, ratio: rat(k as i64 * d, n * ell as i64) }
        })
        .collect();
    let c_best = per_ell.iter().map(|row| row.ratio.clone()).min().expect("d >= 2 gives at least one row");
    Ok(AnsatzConstant { c_best, c_floor: rat(d * d, n * (d - 1)), per_ell })
}

/// Complex dimension ℓ(d−ℓ) + kℓ + (n−k)d of the stratum of frames with k
/// prescribed columns in a common ℓ-dimensional subspace.
pub fn stratum_dimension(d: usize, n: usize, ell: usize, k: usize) -> Result<usize> {
    if d == 0 || ell >= d || k == 0 || k > n {
        return Err(FrameError::OutOfRange(format!(
            "need 0 <= ell <= d - 1 and 1 <= k <= n, got d = {d}, n = {n}, ell = {ell}, k = {k}"
        )));
    }
    Ok(ell * (d - ell) + k * ell + (n - k) * d)
}

/// min{d, (cn − d)(d − 1)/d} for a given ansatz constant c.
pub fn codimension_core(d: usize, n: usize, c: &Rational) -> Rational {
    let (dd, nn) = (rat_int(d as i64), rat_int(n as i64));
    let other = (c * &nn - &dd) * rat(d as i64 - 1, d as i64);
    if other < dd {
        other
    } else {
        dd
    }
}

/// Lower bound on the real codimension of every unstable stratum, using
/// c = c_best: twice the core bound for complex frames, the core bound for
/// real frames.
pub fn codimension_bound(spec: &NormSpec, field: Field) -> Result<Rational> {
    let c = best_ansatz_constant(spec)?.c_best;
    Ok(codimension_bound_with_c(spec.d(), spec.n(), &c, field))
}

pub fn codimension_bound_with_c(d: usize, n: usize, c: &Rational, field: Field) -> Rational {
    let core = codimension_core(d, n, c);
    match field {
        Field::Real => core,
        Field::Complex => core * rat_int(2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectivityCertificate {
    pub field: Field,
    pub q: usize,
    #[serde(with = "serde_rational")]
    pub c_used: Rational,
    #[serde(with = "serde_rational")]
    pub condition_c: Rational,
    #[serde(with = "serde_rational")]
    pub condition_d: Rational,
    pub certified: bool,
    pub reason: String,
}

/// Required (c, d) lower bounds for q-connectedness over `field`.
pub fn connectivity_conditions(d: usize, n: usize, field: Field, q: usize) -> (Rational, Rational) {
    let (d, n, q) = (d as i64, n as i64, q as i64);
    match field {
        Field::Real => (rat(d * (q + d + 1), n * (d - 1)), rat_int(q + 2)),
        Field::Complex => (rat(d * (q + d), 2 * n * (d - 1)), rat(q + 2, 2)),
    }
}

/// Certifies q-connectedness of the Parseval frame space with norms r over
/// `field` when the sufficient conditions hold with c = c_best.
pub fn certify_connectivity(spec: &NormSpec, field: Field, q: usize) -> Result<ConnectivityCertificate> {
    require_admissible(spec)?;
    let (d, n) = (spec.d(), spec.n());
    if d == 1 {
        return Ok(ConnectivityCertificate {
            field,
            q,
            c_used: Rational::zero(),
            condition_c: Rational::zero(),
            condition_d: Rational::zero(),
            certified: true,
            reason: "trivial ambient dimension (d = 1)".into(),
        });
    }
    let ansatz = best_ansatz_constant(spec)?;
    let (condition_c, condition_d) = connectivity_conditions(d, n, field, q);
    let dd = rat_int(d as i64);

    let mut candidates = vec![ansatz.c_best.clone()];
    if field == Field::Complex && q == 0 {
        // (d/2n)·d/(d−1) always satisfies the ansatz for admissible r
        candidates.push(rat((d * d) as i64, (2 * n * (d - 1)) as i64));
    }
    let passes = |c: &Rational| *c >= condition_c && dd >= condition_d;
    let c_used = candidates.iter().find(|c| passes(c)).unwrap_or(&candidates[0]).clone();
    let certified = passes(&c_used);

    let reason = if certified {
        format!("sufficient condition met: c = {} >= {} and d = {d} >= {}; the {field} frame space is {q}-connected",
            format_rational(&c_used), format_rational(&condition_c), format_rational(&condition_d))
    } else {
        format!("condition not met (needs c >= {} with c = {}, and d >= {} with d = {d}); the conditions are sufficient only, so nothing is claimed about connectivity",
            format_rational(&condition_c), format_rational(&c_used), format_rational(&condition_d))
    };
    Ok(ConnectivityCertificate { field, q, c_used, condition_c, condition_d, certified, reason })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodCertificate {
    pub certified: bool,
    #[serde(with = "serde_rational")]
    pub c_used: Rational,
    #[serde(with = "serde_rational")]
    pub condition_c: Rational,
    pub reason: String,
}

/// Certifies that every admissible rational vector in some neighborhood of r
/// gives a path-connected real frame space, when c_best ≥ (d/n)·2d/(d−1).
/// The neighborhood radius exists but is not computed.
pub fn certify_neighborhood_connectivity(spec: &NormSpec) -> Result<NeighborhoodCertificate> {
    let c = best_ansatz_constant(spec)?.c_best;
    neighborhood_with_c(spec, c)
}

/// Same as [`certify_neighborhood_connectivity`] with a caller-chosen ansatz
/// constant, which must satisfy d/n < c ≤ c_best.
pub fn certify_neighborhood_connectivity_with_c(spec: &NormSpec, c: &Rational) -> Result<NeighborhoodCertificate> {
    let best = best_ansatz_constant(spec)?.c_best;
    let lower = rat(spec.d() as i64, spec.n() as i64);
    if *c > best || *c <= lower {
        return Err(FrameError::OutOfRange(format!(
            "c = {} is not a valid ansatz constant (need {} < c <= {})",
            format_rational(c),
            format_rational(&lower),
            format_rational(&best)
        )));
    }
    neighborhood_with_c(spec, c.clone())
}

fn neighborhood_with_c(spec: &NormSpec, c_used: Rational) -> Result<NeighborhoodCertificate> {
    require_d_at_least_two(spec)?;
    let (d, n) = (spec.d() as i64, spec.n() as i64);
    let condition_c = rat(2 * d * d, n * (d - 1));
    let certified = c_used >= condition_c;
    let reason = if certified {
        "condition met: there is an eps > 0 such that every admissible rational s with |s_i - r_i| < eps gives a path-connected real frame space (eps exists, not computed)".to_string()
    } else {
        format!(
            "condition not met (needs c >= {}, have {}); sufficient condition only, nothing is claimed",
            format_rational(&condition_c),
            format_rational(&c_used)
        )
    };
    Ok(NeighborhoodCertificate { certified, c_used, condition_c, reason })
}

/// Smallest n ≥ d for which the equal-norm vector (d/n, …, d/n) is
/// certified q-connected over `field`.
pub fn min_n_for_q_connected(d: usize, field: Field, q: usize) -> Result<usize> {
    let ok = match field {
        Field::Real => d >= q + 2,
        Field::Complex => 2 * d >= q + 2,
    };
    if d == 0 || !ok {
        let need = match field {
            Field::Real => format!("d >= q + 2 = {}", q + 2),
            Field::Complex => format!("d >= (q + 2)/2 = {}", format_rational(&rat(q as i64 + 2, 2))),
        };
        return Err(FrameError::OutOfRange(format!("{field} frames with q = {q} need {need}, got d = {d}")));
    }
    // c_best ≥ 1 for equal norms, so the scan terminates
    let mut n = d;
    loop {
        if certify_connectivity(&NormSpec::equal_norm(d, n)?, field, q)?.certified {
            return Ok(n);
        }
        n += 1;
    }
}
