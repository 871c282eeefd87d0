//! First-return laws of the vertical component and the law `ν` of the
//! horizontal position at the first vertical return.

pub mod cache;
pub mod excursion;
mod first_return;
mod nu;

pub use first_return::{
    d_mu_estimate, exact_first_return, exact_survival, first_return_law, first_return_prob, fit_power_law,
    kesten_fit, survival, KestenFit, ReturnTimeLaw, EXACT_BOUND,
};
pub use nu::{extrapolate_limit, nu_law, tail_functional, NuLaw, TailFunctional};
