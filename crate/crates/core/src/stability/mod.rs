//! Extrema of `v_u`, the `g`/`h` certificates, peakon proximity and the weak-form residual.

mod certificate;
mod extrema;
mod proximity;
mod shock;

pub use certificate::{
    ch_refined_inequality, cubic_p, cubic_roots, gh_certificate, gh_certificate_with,
    momentum_is_nonnegative, ChReport, CubicRoots, RootStructure, StabilityCertificate,
    HYPOTHESIS_TOL,
};
pub use extrema::{
    aggregates, an_bn, extrema_scan, extrema_scan_slack, extrema_scan_with, sequence_inequalities,
    Aggregates,
    ExtremaProfile, Extremum, Refinement, SequenceReport, DEFAULT_AMP_FLOOR,
};
pub use proximity::{
    lemma37, peakon_proximity, proximity_unchecked, theorem1_verify, Lemma37, ProximityReport,
    SnapshotCheck, Theorem1Bounds, Theorem1Verdict, EVOLVED_SLACK, NEGATIVE_GATE,
};
pub use shock::{
    default_test_functions, kernel_convolution, peakon_weak_residual, refinement_study,
    shock_weak_residual, shock_weak_residual_with, weak_residuals, RefinementStudy,
    ResidualReport, ResidualRow, TestFunction,
};
