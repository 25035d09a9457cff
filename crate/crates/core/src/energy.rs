//! Total frame energy, its gradient, and the classical functionals it
//! relates to.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frame::{column_norms_sq, frobenius_distance_to_identity, FrameMatrix, Scalar};
use crate::spec::NormSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// ‖FF* − I‖²_Fr
    pub parseval_term: f64,
    /// (1/4) Σ (‖f_i‖²/r_i − 1)²
    pub norm_term: f64,
    pub total: f64,
}

fn check_dims(frame: &FrameMatrix, spec: &NormSpec) -> Result<()> {
    if frame.n() != spec.n() {
        return Err(FrameError::DimensionMismatch(format!(
            "frame has {} columns but the norm spec has {} entries",
            frame.n(),
            spec.n()
        )));
    }
    Ok(())
}

/// E_r(F) = ‖FF* − I_d‖²_Fr + (1/4) Σ_i (‖f_i‖²/r_i − 1)².
pub fn energy(frame: &FrameMatrix, spec: &NormSpec) -> Result<EnergyBreakdown> {
    check_dims(frame, spec)?;
    Ok(energy_with(frame, &spec.r_f64()))
}

pub(crate) fn energy_with(frame: &FrameMatrix, r: &[f64]) -> EnergyBreakdown {
    let parseval_term = frobenius_distance_to_identity(frame);
    let norm_term = 0.25
        * column_norms_sq(frame)
            .iter()
            .zip(r)
            .map(|(m, ri)| (m / ri - 1.0).powi(2))
            .sum::<f64>();
    EnergyBreakdown { parseval_term, norm_term, total: parseval_term + norm_term }
}

/// ∇E_r(F) = F [4F*F + diag(‖f_i‖²/r_i² − 1/r_i − 4)], the gradient with
/// respect to the real inner product Re tr(A*B).
pub fn gradient(frame: &FrameMatrix, spec: &NormSpec) -> Result<FrameMatrix> {
    check_dims(frame, spec)?;
    Ok(gradient_with(frame, &spec.r_f64()))
}

pub(crate) fn gradient_with(frame: &FrameMatrix, r: &[f64]) -> FrameMatrix {
    let f = frame.as_matrix();
    let norms = column_norms_sq(frame);
    let mut inner: DMatrix<Scalar> = frame.gram() * Scalar::new(4.0, 0.0);
    for (i, (m, ri)) in norms.iter().zip(r).enumerate() {
        inner[(i, i)] += Scalar::new(m / (ri * ri) - 1.0 / ri - 4.0, 0.0);
    }
    FrameMatrix::from_parts(frame.field(), f * inner)
}

/// Benedetto–Fickus frame potential ‖F*F‖²_Fr.
pub fn frame_potential(frame: &FrameMatrix) -> f64 {
    frame.gram().iter().map(|z| z.norm_sqr()).sum()
}

/// Bodmann–Casazza frame energy Σ_{j,k} (‖f_j‖² − ‖f_k‖²)².
pub fn frame_energy_bc(frame: &FrameMatrix) -> f64 {
    let norms = column_norms_sq(frame);
    norms
        .iter()
        .map(|a| norms.iter().map(|b| (a - b).powi(2)).sum::<f64>())
        .sum()
}

/// True when both the Parseval residual ‖FF* − I‖_Fr and the worst norm
/// residual max_i |‖f_i‖² − r_i| are below `tol`.
pub fn is_in_pf(frame: &FrameMatrix, spec: &NormSpec, tol: f64) -> Result<bool> {
    check_dims(frame, spec)?;
    let (p, m) = residuals(frame, &spec.r_f64());
    Ok(p < tol && m < tol)
}

/// (‖FF* − I‖_Fr, max_i |‖f_i‖² − r_i|)
pub(crate) fn residuals(frame: &FrameMatrix, r: &[f64]) -> (f64, f64) {
    let parseval = frobenius_distance_to_identity(frame).sqrt();
    let norm = column_norms_sq(frame)
        .iter()
        .zip(r)
        .map(|(m, ri)| (m - ri).abs())
        .fold(0.0, f64::max);
    (parseval, norm)
}
