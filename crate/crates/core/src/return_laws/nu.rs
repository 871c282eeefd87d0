use serde::Serialize;

use super::first_return::{first_return_prob, survival};
use crate::chain::SparseDist;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::stats::{compensated_sum, linear_fit, CompensatedSum};

/// Law of the horizontal position `S_{R₁}` at the first vertical return.
///
/// Only `l = 0, 2, ..., l_max` are stored; the law is symmetric and
/// supported on even integers.
#[derive(Debug, Clone, PartialEq)]
pub struct NuLaw {
    l_max: u64,
    k_max: u64,
    probs: Vec<f64>,
}

/// Exponent step used when rescaling point masses that start below the
/// smallest positive `f64`.
const RESCALE: i32 = 64;

/// A nonnegative number held as `v · 2^shift` with `shift <= 0`, so that
/// point masses like `2^-2000` can be carried until they become representable.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    shift: i32,
    factor: f64,
}

impl Scaled {
    fn new(shift: i32) -> Self {
        let mut s = Scaled { shift, factor: 0.0 };
        s.refresh();
        s
    }

    fn refresh(&mut self) {
        self.factor = if self.shift < -1074 {
            0.0
        } else {
            2f64.powi(self.shift)
        };
    }

    /// Move powers of two from the mantissas into the shift while `lead`
    /// (the largest mantissa) is large.
    fn normalize(&mut self, vals: &mut [f64], lead: f64) {
        if self.shift < 0 && lead > 2f64.powi(RESCALE) {
            let t = RESCALE.min(-self.shift);
            let s = 2f64.powi(-t);
            for v in vals.iter_mut() {
                *v *= s;
            }
            self.shift += t;
            self.refresh();
        }
    }
}

/// `P(S_{k+2} = l) / P(S_k = l)` for the ±1 walk.
#[inline]
fn ratio(k: u64, l: u64) -> f64 {
    let a = ((k + l) / 2 + 1) as f64;
    let b = ((k - l) / 2 + 1) as f64;
    ((k + 1) as f64 * (k + 2) as f64) / (4.0 * a * b)
}

/// `Σ_{k even, l <= k <= k_max} P(S_k = l) · f[k/2]`.
fn nu_value(l: u64, k_max: u64, f: &[f64]) -> f64 {
    let mut sc = Scaled::new(-(l as i32));
    let mut p = [1.0f64];
    let mut sum = CompensatedSum::default();
    let mut k = l;
    while k <= k_max {
        let term = p[0] * f[(k / 2) as usize];
        if sc.shift == 0 {
            sum.add(term);
        } else {
            sum.add(term * sc.factor);
            let lead = p[0];
            sc.normalize(&mut p, lead);
        }
        p[0] *= ratio(k, l);
        k += 2;
    }
    sum.value()
}

fn return_table(k_max: u64) -> Vec<f64> {
    (0..=k_max / 2).map(first_return_prob).collect()
}

/// `ν(l) = Σ_{k even <= k_max} P(S_k = l) P(R₁ = k)` for even `|l| <= l_max`.
pub fn nu_law(l_max: u64, k_max: u64, exec: Exec) -> Result<NuLaw> {
    if l_max < 2 || k_max < 2 || l_max % 2 == 1 || k_max % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "l_max and k_max must be even and at least 2, got {l_max} and {k_max}"
        )));
    }
    if l_max > 1 << 20 || k_max > 1 << 32 {
        return Err(Error::InvalidArgument("truncation bounds too large".into()));
    }
    let f = return_table(k_max);
    let probs = exec.map_indices(l_max / 2 + 1, |idx| nu_value(2 * idx, k_max, &f));
    Ok(NuLaw { l_max, k_max, probs })
}

impl NuLaw {
    /// Rebuild from stored values (`l = 0, 2, ..., l_max`).
    pub fn from_parts(l_max: u64, k_max: u64, probs: Vec<f64>) -> Result<Self> {
        if l_max % 2 == 1 || k_max % 2 == 1 || probs.len() as u64 != l_max / 2 + 1 {
            return Err(Error::InvalidDistribution(format!(
                "{} values do not match l_max = {l_max}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidDistribution("value outside [0, 1]".into()));
        }
        Ok(NuLaw { l_max, k_max, probs })
    }

    pub fn l_max(&self) -> u64 {
        self.l_max
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    /// `ν(l)`; zero for odd `l` and for `|l| > l_max`.
    pub fn prob(&self, l: i64) -> f64 {
        let a = l.unsigned_abs();
        if a % 2 == 1 || a > self.l_max {
            0.0
        } else {
            self.probs[(a / 2) as usize]
        }
    }

    /// Stored values for `l = 0, 2, ..., l_max`.
    pub fn values(&self) -> &[f64] {
        &self.probs
    }

    /// Mass outside the stored window, including the inner truncation.
    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.window_mass()).max(0.0)
    }

    fn window_mass(&self) -> f64 {
        self.probs[0] + 2.0 * compensated_sum(self.probs[1..].iter().copied())
    }

    /// Certified bound on `|ν(l) - stored ν(l)|` for every `l`:
    /// `P(R₁ > k_max) · max_{k > k_max} P(S_k = l)`.
    pub fn error_bound(&self) -> f64 {
        let h = self.k_max / 2;
        survival(h) * survival(h + 1)
    }

    /// The law on `[-l_max, l_max]` with the outside mass as leaked mass.
    pub fn to_dist(&self) -> SparseDist<i64, f64> {
        let mut items = Vec::with_capacity(self.probs.len() * 2);
        for (k, p) in self.probs.iter().enumerate() {
            let l = 2 * k as i64;
            items.push((l, *p));
            if l != 0 {
                items.push((-l, *p));
            }
        }
        SparseDist::from_entries(items, self.tail_mass()).expect("nonnegative values")
    }
}

/// `m · F̃(m)` with `F̃(m) = P(S_{R₁} >= m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFunctional {
    pub m: u64,
    pub f_tilde: f64,
    /// `m · f_tilde`.
    pub value: f64,
    /// Certified bound on the error of `value`.
    pub error: f64,
    /// `Σ_{m <= l <= l_max} ν(l)` from the stored window.
    pub in_window: f64,
    /// Remaining part of `f_tilde` beyond the stored window.
    pub beyond_window: f64,
}

/// Compute `F̃(m)` directly as `Σ_k P(S_k >= m) P(R₁ = k)`.
///
/// Terms with `k <= k_max` are summed exactly. For `k > k_max`,
/// `P(S_k >= m) ∈ [(1 - (m-1) u) / 2, 1/2]` with `u = P(S_{k_max} = 0)`,
/// which brackets the remainder; the midpoint is used and the half-width is
/// reported as the error.
pub fn tail_functional(nu: &NuLaw, m: u64) -> Result<TailFunctional> {
    if m == 0 || m > nu.l_max() {
        return Err(Error::InvalidArgument(format!(
            "m must lie in [1, {}], got {m}",
            nu.l_max()
        )));
    }
    let me = m + m % 2;
    let k_max = nu.k_max();
    // vals = [T, p(me), p(me - 2)] at k = me, scaled by 2^-me.
    let mut sc = Scaled::new(-(me as i32));
    let mut vals = [1.0f64, 1.0, me as f64];
    let mut sum = CompensatedSum::default();
    let mut k = me;
    while k <= k_max {
        let term = vals[0] * first_return_prob(k / 2);
        if sc.shift == 0 {
            sum.add(term);
        } else {
            sum.add(term * sc.factor);
        }
        vals[0] += 0.25 * (vals[2] - vals[1]);
        vals[1] *= ratio(k, me);
        vals[2] *= ratio(k, me - 2);
        if sc.shift != 0 {
            let lead = vals[2];
            sc.normalize(&mut vals, lead);
        }
        k += 2;
    }
    let h = k_max / 2;
    // P(R₁ > k_max) and P(S_{k_max} = 0) coincide.
    let u = survival(h);
    let lo = 0.5 * u * (1.0 - (me - 1) as f64 * u).max(0.0);
    let hi = 0.5 * u;
    let f_tilde = sum.value() + 0.5 * (lo + hi);
    let half_width = 0.5 * (hi - lo) + 1e-12 * f_tilde;
    let value = m as f64 * f_tilde;
    let error = m as f64 * half_width;
    if error > 0.1 * value {
        return Err(Error::TruncationTooLarge { m, value, error });
    }
    let in_window = compensated_sum(
        (me..=nu.l_max())
            .step_by(2)
            .map(|l| nu.prob(l as i64)),
    );
    Ok(TailFunctional {
        m,
        f_tilde,
        value,
        error,
        in_window,
        beyond_window: f_tilde - in_window,
    })
}

/// Limit of `v(m) = σ + c/m` from a least-squares fit on `1/m`.
pub fn extrapolate_limit(points: &[(u64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::FitFailed("need at least two points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|(m, _)| 1.0 / *m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    let (intercept, slope) = linear_fit(&xs, &ys);
    if !intercept.is_finite() || !slope.is_finite() {
        return Err(Error::FitFailed("degenerate extrapolation".into()));
    }
    Ok(intercept)
}
