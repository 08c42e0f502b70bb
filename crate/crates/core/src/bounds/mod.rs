//! Finite-block-length bounds and the sliced/cyclic mutual-information certificate.

mod certificate;
mod closed_form;
mod mi;

pub use certificate::{
    mi_gap_certificate, CertificateConfig, CertificateRow, CertificateSummary, DmaxRule, MiGapCertificate,
};
pub use closed_form::{
    alpha_default, asymptotic_rhs, char_fn_magnitude, converse_rhs, gamma, lambda_bound, zeta, BoundReport,
    CharFnMagnitude,
};
pub use mi::{gaussian_mi, ChannelMode, MAX_MI_BLOCK};
