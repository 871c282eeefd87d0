//! Stable limits: densities, lattice convolutions, local limit errors.

mod convolve;
mod density;
mod llt;

pub use convolve::{convolve, convolve_f64, self_convolve, self_convolve_f64, self_convolve_schedule};
pub use density::{cauchy_density, cauchy_scaled, gaussian_density, integrate_real_line, Density, StableTarget};
pub use llt::{
    doa_check, error_curve_csv, lll_error, lower_bound_check, ConditionCheck, DoAReport, ErrorCurveRow, LltError,
    LowerBoundReport, TailData, DOA_TOLERANCE,
};
