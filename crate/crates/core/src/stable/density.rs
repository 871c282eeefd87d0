use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// `1 / (π (s² + 1))`.
pub fn cauchy_density(s: f64) -> f64 {
    1.0 / (PI * (s * s + 1.0))
}

/// `γ / (π (s² + γ²))`.
pub fn cauchy_scaled(s: f64, gamma: f64) -> f64 {
    gamma / (PI * (s * s + gamma * gamma))
}

pub fn gaussian_density(s: f64, sd: f64) -> f64 {
    (-(s * s) / (2.0 * sd * sd)).exp() / (sd * (2.0 * PI).sqrt())
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SeqFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Density {
    Cauchy { scale: f64 },
    Gaussian { sd: f64 },
    Custom(RealFn),
}

impl Density {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Density::Cauchy { scale } => cauchy_scaled(s, *scale),
            Density::Gaussian { sd } => gaussian_density(s, *sd),
            Density::Custom(f) => f(s),
        }
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Cauchy { scale } => write!(f, "Cauchy {{ scale: {scale} }}"),
            Density::Gaussian { sd } => write!(f, "Gaussian {{ sd: {sd} }}"),
            Density::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Limit density together with the lattice `{a + kh}` and the norming
/// `B_n` and centering `A_n` of a local limit theorem.
#[derive(Clone)]
pub struct StableTarget {
    pub alpha: f64,
    pub density: Density,
    pub span: u64,
    pub offset: i64,
    norming: SeqFn,
    centering: SeqFn,
}

impl fmt::Debug for StableTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StableTarget")
            .field("alpha", &self.alpha)
            .field("density", &self.density)
            .field("span", &self.span)
            .field("offset", &self.offset)
            .finish_non_exhaustive()
    }
}

impl StableTarget {
    pub fn new(
        alpha: f64,
        density: Density,
        span: u64,
        offset: i64,
        norming: impl Fn(u64) -> f64 + Send + Sync + 'static,
        centering: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 2]")));
        }
        if span == 0 {
            return Err(Error::InvalidArgument("span must be positive".into()));
        }
        match density {
            Density::Cauchy { scale } | Density::Gaussian { sd: scale } if !(scale > 0.0) => {
                return Err(Error::InvalidArgument(format!("scale {scale} must be positive")));
            }
            _ => {}
        }
        Ok(StableTarget {
            alpha,
            density,
            span,
            offset,
            norming: Arc::new(norming),
            centering: Arc::new(centering),
        })
    }

    /// Cauchy limit with `B_n = n`, `A_n = 0` on the even lattice.
    pub fn cauchy(gamma: f64) -> Result<Self> {
        Self::new(1.0, Density::Cauchy { scale: gamma }, 2, 0, |n| n as f64, |_| 0.0)
    }

    /// Gaussian limit with `B_n = sd_step · √n`, `A_n = 0`, standard normal
    /// density.
    pub fn gaussian(step_sd: f64, span: u64, offset: i64) -> Result<Self> {
        Self::new(
            2.0,
            Density::Gaussian { sd: 1.0 },
            span,
            offset,
            move |n| step_sd * (n as f64).sqrt(),
            |_| 0.0,
        )
    }

    pub fn norming(&self, n: u64) -> f64 {
        (self.norming)(n)
    }

    pub fn centering(&self, n: u64) -> f64 {
        (self.centering)(n)
    }

    /// `∫ g` by adaptive Simpson after `s = tan θ`.
    pub fn normalization(&self) -> f64 {
        integrate_real_line(|s| self.density.eval(s), 1e-13)
    }
}

/// `∫_ℝ f` via `s = tan θ` on `(-π/2, π/2)`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let h = |t: f64| {
        let c = t.cos();
        if c.abs() < 1e-300 {
            return 0.0;
        }
        let v = f(t.tan()) / (c * c);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let eps = 1e-9;
    let (a, b) = (-PI / 2.0 + eps, PI / 2.0 - eps);
    // Split into panels so narrow peaks are seen by the first pass.
    let panels = 64;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * w, a + (k + 1) as f64 * w);
            let (f0, f1, fm) = (h(x0), h(x1), h(0.5 * (x0 + x1)));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson(&h, x0, x1, f0, fm, f1, whole, tol / panels as f64, 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
