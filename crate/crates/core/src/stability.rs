//! Structural tests on frames: full spark, property S_r (semistability)
//! through an exhaustive subset-rank oracle, and the classification of
//! critical points of the total frame energy.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;
use serde::Serialize;

use crate::energy::{gradient, is_in_pf};
use crate::error::{FrameError, Result};
use crate::frame::{column_norms_sq, FrameMatrix, Scalar};
use crate::spec::{rat_int, serde_rational, NormSpec, Rational, Tolerances};

/// Upper limit on the number of d×d minors examined by [`is_full_spark`].
pub const MAX_MINORS: u128 = 1_000_000;
/// Upper limit on n for the subset oracle.
pub const MAX_ORACLE_COLUMNS: usize = 24;
/// Default relative gap separating eigenvalue clusters.
pub const DEFAULT_CLUSTER_GAP: f64 = 1e-6;

/// Number of k-subsets of an n-set, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Lexicographic k-combinations of 0..n.
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, current: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - k + i {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

fn singular_values(m: &DMatrix<Scalar>) -> Vec<f64> {
    if m.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return vec![0.0; m.nrows().min(m.ncols())];
    }
    m.singular_values().iter().copied().collect()
}

/// Numerical rank with the relative cutoff `rank_tol · σ_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    /// Some singular value lies within a factor of 10 of the cutoff.
    pub fragile: bool,
}

pub fn numerical_rank(m: &DMatrix<Scalar>, rank_tol: f64) -> RankDecision {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return RankDecision { rank: 0, fragile: false };
    }
    let mut rank = 0;
    let mut fragile = false;
    for s in sv {
        let rel = s / smax;
        if rel > rank_tol {
            rank += 1;
        }
        if rel >= rank_tol / 10.0 && rel <= rank_tol * 10.0 {
            fragile = true;
        }
    }
    RankDecision { rank, fragile }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparkVerdict {
    pub full_spark: bool,
    /// 0-based column indices of the worst-conditioned minor.
    pub worst_minor: Vec<usize>,
    /// σ_min / σ_max of the worst minor.
    pub worst_sigma_min: f64,
}

/// Checks every d×d column minor; full spark when each has relative
/// smallest singular value above `spark_tol`.
pub fn is_full_spark(frame: &FrameMatrix, tol: &Tolerances) -> Result<SparkVerdict> {
    let (d, n) = (frame.d(), frame.n());
    if n < d {
        return Err(FrameError::InvalidDimensions(format!("spark needs n >= d, got d = {d}, n = {n}")));
    }
    let count = binomial(n, d);
    if count > MAX_MINORS {
        return Err(FrameError::CombinatorialBudgetExceeded { count, limit: MAX_MINORS });
    }
    let mut worst = (f64::INFINITY, Vec::new());
    for cols in Combinations::new(n, d) {
        let sv = singular_values(&frame.select_columns(&cols));
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let rel = if smax > 0.0 { smin / smax } else { 0.0 };
        if rel < worst.0 {
            worst = (rel, cols);
        }
    }
    Ok(SparkVerdict { full_spark: worst.0 > tol.spark_tol, worst_minor: worst.1, worst_sigma_min: worst.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityWitness {
    /// 0-based column indices lying in a common subspace of dimension `rank`.
    pub indices: Vec<usize>,
    pub rank: usize,
    #[serde(with = "serde_rational")]
    pub weight_sum: Rational,
    /// The rank decision was within a factor of 10 of `rank_tol`.
    pub fragile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub semistable: bool,
    pub witness: Option<StabilityWitness>,
}

/// Decides property S_r: F is unstable iff some set I of columns has
/// Σ_{i∈I} r_i > dim span{f_i : i ∈ I}.
///
/// Subsets are visited by increasing size, lexicographically within a size,
/// and the first robust witness is returned. A witness whose rank decision
/// is fragile is only returned when no robust one exists.
pub fn check_property_s(frame: &FrameMatrix, spec: &NormSpec, tol: &Tolerances) -> Result<StabilityVerdict> {
    let n = frame.n();
    if n != spec.n() {
        return Err(FrameError::DimensionMismatch(format!(
            "frame has {n} columns but the norm spec has {} entries",
            spec.n()
        )));
    }
    if n > MAX_ORACLE_COLUMNS {
        return Err(FrameError::CombinatorialBudgetExceeded {
            count: 1u128 << n.min(127),
            limit: 1u128 << MAX_ORACLE_COLUMNS,
        });
    }

    let nonzero: Vec<bool> = (0..n).map(|j| numerical_rank(&frame.select_columns(&[j]), tol.rank_tol).rank > 0).collect();
    let one = rat_int(1);
    let mut fallback: Option<StabilityWitness> = None;

    for k in 1..=n {
        for subset in Combinations::new(n, k) {
            let weight = subset.iter().fold(Rational::zero(), |acc, &i| acc + &spec.r()[i]);
            // a nonzero column already forces rank >= 1
            if weight <= one && subset.iter().any(|&i| nonzero[i]) {
                continue;
            }
            let max_rank = rat_int(k.min(frame.d()) as i64);
            let decision = numerical_rank(&frame.select_columns(&subset), tol.rank_tol);
            if weight > rat_int(decision.rank as i64) {
                let witness = StabilityWitness {
                    indices: subset,
                    rank: decision.rank,
                    weight_sum: weight.clone(),
                    fragile: decision.fragile && weight <= max_rank,
                };
                if !witness.fragile {
                    return Ok(StabilityVerdict { semistable: false, witness: Some(witness) });
                }
                fallback.get_or_insert(witness);
            }
        }
    }
    Ok(match fallback {
        Some(w) => StabilityVerdict { semistable: false, witness: Some(w) },
        None => StabilityVerdict { semistable: true, witness: None },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriticalKind {
    GlobalMinimumPF,
    BlockwiseTight,
    WithZeroColumns,
    NotCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalBlock {
    /// 0-based column indices in this block.
    pub columns: Vec<usize>,
    /// Eigenvalue of FF* shared by the block.
    pub eigenvalue: f64,
    /// Dimension of the block's eigenspace.
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointClass {
    pub kind: CriticalKind,
    pub blocks: Vec<CriticalBlock>,
    /// Columns with ‖f_i‖² < residual_tol².
    pub zero_columns: BTreeSet<usize>,
    /// Columns that are bitwise zero.
    pub exact_zero_columns: BTreeSet<usize>,
    pub grad_norm: f64,
    /// max over nonzero columns of |λ_block − (4 + 1/r_i − ‖f_i‖²/r_i²)/4|.
    pub eigen_relation_error: f64,
    pub eigen_relation_ok: bool,
}

pub fn classify_critical_point(frame: &FrameMatrix, spec: &NormSpec, tol: &Tolerances) -> Result<CriticalPointClass> {
    classify_critical_point_with_gap(frame, spec, tol, DEFAULT_CLUSTER_GAP)
}

/// Classifies F as a global minimum, a blockwise tight critical point, a
/// critical point with zero columns, or not critical at all.
pub fn classify_critical_point_with_gap(
    frame: &FrameMatrix,
    spec: &NormSpec,
    tol: &Tolerances,
    cluster_gap: f64,
) -> Result<CriticalPointClass> {
    let grad_norm = gradient(frame, spec)?.norm_fro();
    let norms = column_norms_sq(frame);
    let zero_columns: BTreeSet<usize> =
        (0..frame.n()).filter(|&j| norms[j] < tol.residual_tol * tol.residual_tol).collect();
    let exact_zero_columns: BTreeSet<usize> = frame.exact_zero_columns().into_iter().collect();

    if grad_norm >= tol.grad_tol {
        return Ok(CriticalPointClass {
            kind: CriticalKind::NotCritical,
            blocks: Vec::new(),
            zero_columns,
            exact_zero_columns,
            grad_norm,
            eigen_relation_error: f64::NAN,
            eigen_relation_ok: false,
        });
    }

    let clusters = eigen_clusters(&frame.frame_operator(), cluster_gap)?;
    let r = spec.r_f64();

    // assign each nonzero column to the eigenspace capturing most of it
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    let mut relation_error: f64 = 0.0;
    for j in (0..frame.n()).filter(|j| !zero_columns.contains(j)) {
        let f = frame.as_matrix().column(j);
        let (best, _) = clusters
            .iter()
            .enumerate()
            .map(|(c, cl)| (c, (cl.basis.adjoint() * f).norm_squared()))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        members[best].push(j);
        let predicted = 0.25 * (4.0 + 1.0 / r[j] - norms[j] / (r[j] * r[j]));
        relation_error = relation_error.max((clusters[best].eigenvalue - predicted).abs());
    }

    let blocks: Vec<CriticalBlock> = clusters
        .iter()
        .zip(members)
        .filter(|(_, cols)| !cols.is_empty())
        .map(|(cl, columns)| CriticalBlock { columns, eigenvalue: cl.eigenvalue, dimension: cl.basis.ncols() })
        .collect();

    let kind = if !zero_columns.is_empty() {
        CriticalKind::WithZeroColumns
    } else if is_in_pf(frame, spec, tol.residual_tol)? {
        CriticalKind::GlobalMinimumPF
    } else {
        CriticalKind::BlockwiseTight
    };

    Ok(CriticalPointClass {
        kind,
        blocks,
        zero_columns,
        exact_zero_columns,
        grad_norm,
        eigen_relation_error: relation_error,
        eigen_relation_ok: relation_error < tol.residual_tol,
    })
}

struct EigenCluster {
    eigenvalue: f64,
    basis: DMatrix<Scalar>,
}

// Eigenvalues of a Hermitian matrix grouped by relative gap, in decreasing
// order, each with an orthonormal basis of its eigenspace.
fn eigen_clusters(op: &DMatrix<Scalar>, gap: f64) -> Result<Vec<EigenCluster>> {
    let eig = SymmetricEigen::try_new(op.clone(), 1e-15, 10_000)
        .ok_or_else(|| FrameError::EigenDecompositionFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if eig.eigenvalues[*g.last().unwrap()] - eig.eigenvalues[i] <= gap * scale => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| EigenCluster {
            eigenvalue: g.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / g.len() as f64,
            basis: eig.eigenvectors.select_columns(&g),
        })
        .collect())
}
