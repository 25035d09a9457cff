//! Parseval frames with prescribed column norms, built by descending the
//! total frame energy, plus exact checks of admissibility, semistability,
//! critical points and connectivity certificates.

pub mod admissibility;
pub mod cli;
pub mod energy;
pub mod error;
pub mod flow;
pub mod frame;
pub mod io;
pub mod spec;
pub mod stability;
pub mod topology;

pub use admissibility::{build_s_vector, check_admissible, AdmissibilityVerdict, SVector};
pub use energy::{energy, frame_energy_bc, frame_potential, gradient, is_in_pf, EnergyBreakdown};
pub use error::{FrameError, Result};
pub use flow::{descend, descend_with_observer, random_full_spark_init, FlowConfig, FlowReport, Outcome, TraceSample};
pub use frame::{column_norms_sq, frobenius_distance_to_identity, Field, FrameMatrix, Scalar};
pub use spec::{NormSpec, Rational, Tolerances};
pub use stability::{
    check_property_s, classify_critical_point, is_full_spark, CriticalBlock, CriticalKind, CriticalPointClass,
    SparkVerdict, StabilityVerdict, StabilityWitness,
};
pub use topology::{
    best_ansatz_constant, certify_connectivity, certify_neighborhood_connectivity, codimension_bound, k_ell,
    min_n_for_q_connected, stratum_dimension, AnsatzConstant, ConnectivityCertificate,
};
