//! The walk on `Z` under `μ′`: the shift law `η`, its large deviations, the
//! Green sum at `π`, and the classification of points.

mod classify;
mod eta;
mod green;

pub use classify::{absorption_oracle, classify_named, classify_point, trichotomy, ClassificationReport, McSummary, Verdict};
pub use eta::{eta_law, exact_h_tail, ldp_check, sample_eta, EtaLaw, LdpFit, LdpPoint};
pub use green::{
    compare_methods, first_term_oracle, shifted_green_sum, CrossMethod, GreenCheckpoint, GreenCurve, GreenMethod,
    GreenOptions,
};
