use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{compensated_sum, linear_fit};
use crate::weight::{q_to_f64, Q};

/// Exact rationals are kept for `n` up to this bound.
pub const EXACT_BOUND: u64 = 64;

/// Survival table size; larger half-lengths use the asymptotic series.
const SERIES_FROM: u64 = 128;

/// `P(R₁ = n)` exactly: `2·Cat(m-1) / 4^m` for `n = 2m`, zero otherwise.
pub fn exact_first_return(n: u64) -> Q {
    if n == 0 || n % 2 == 1 {
        return Q::zero();
    }
    let m = n / 2;
    // 2·Cat(m-1) counts the bridges of length 2m that avoid 0 in between.
    let mut cat = BigInt::one();
    for k in 0..m - 1 {
        cat = cat * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 2);
    }
    Q::new(cat * 2, BigInt::one() << (2 * m))
}

/// `u_m = P(R₁ > 2m) = C(2m, m) / 4^m`, exactly.
pub fn exact_survival(m: u64) -> Q {
    let mut u = Q::one();
    for k in 0..m {
        u *= Q::new(BigInt::from(2 * k + 1), BigInt::from(2 * k + 2));
    }
    u
}

fn series(m: f64) -> f64 {
    let x = 1.0 / m;
    let poly = 1.0
        + x * (-1.0 / 8.0
            + x * (1.0 / 128.0
                + x * (5.0 / 1024.0
                    + x * (-21.0 / 32768.0 + x * (-399.0 / 262144.0 + x * (869.0 / 4194304.0))))));
    poly / (std::f64::consts::PI * m).sqrt()
}

fn small_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let exact_m = EXACT_BOUND / 2;
        let mut t = Vec::with_capacity(SERIES_FROM as usize);
        let mut u = Q::one();
        for m in 0..=exact_m {
            if m > 0 {
                u *= Q::new(BigInt::from(2 * m - 1), BigInt::from(2 * m));
            }
            t.push(q_to_f64(&u));
        }
        let mut v = t[exact_m as usize];
        for m in exact_m + 1..SERIES_FROM {
            v *= (2 * m - 1) as f64 / (2 * m) as f64;
            t.push(v);
        }
        t
    })
}

/// `u_m = P(R₁ > 2m)` in floating point, for any `m`.
pub fn survival(m: u64) -> f64 {
    if m < SERIES_FROM {
        small_table()[m as usize]
    } else {
        series(m as f64)
    }
}

/// `P(R₁ = 2m) = u_m / (2m - 1)` in floating point.
pub fn first_return_prob(m: u64) -> f64 {
    if m == 0 {
        0.0
    } else {
        survival(m) / (2 * m - 1) as f64
    }
}

/// Law of the first return time to 0 of the simple ±1 walk, up to `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTimeLaw {
    n_max: u64,
    exact: Vec<Q>,
    probs: Vec<f64>,
    tail_mass: f64,
}

pub fn first_return_law(n_max: u64) -> Result<ReturnTimeLaw> {
    if n_max < 2 || n_max % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "n_max must be even and at least 2, got {n_max}"
        )));
    }
    let half = n_max / 2;
    let exact_half = half.min(EXACT_BOUND / 2);
    let mut exact = Vec::with_capacity(exact_half as usize);
    let mut u = Q::one();
    for m in 1..=exact_half {
        // P(R₁ = 2m) = u_{m-1} / (2m)
        exact.push(&u / Q::from_integer(BigInt::from(2 * m)));
        u *= Q::new(BigInt::from(2 * m - 1), BigInt::from(2 * m));
    }
    let mut probs: Vec<f64> = exact.iter().map(q_to_f64).collect();
    probs.extend((exact_half + 1..=half).map(first_return_prob));
    Ok(ReturnTimeLaw {
        n_max,
        exact,
        probs,
        tail_mass: survival(half),
    })
}

impl ReturnTimeLaw {
    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn prob(&self, n: u64) -> f64 {
        if n == 0 || n % 2 == 1 || n > self.n_max {
            return 0.0;
        }
        self.probs[(n / 2 - 1) as usize]
    }

    /// Exact value, available for `n <= 64`.
    pub fn exact(&self, n: u64) -> Option<Q> {
        if n == 0 || n % 2 == 1 {
            return (n <= self.n_max).then(Q::zero);
        }
        self.exact.get((n / 2 - 1) as usize).cloned()
    }

    /// `P(R₁ > n_max)`.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `(n, P(R₁ = n))` over even `n <= n_max`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().enumerate().map(|(k, p)| (2 * k as u64 + 2, *p))
    }

    /// `|Σ probs + tail_mass - 1|`.
    pub fn mass_defect(&self) -> f64 {
        (compensated_sum(self.probs.iter().copied().chain([self.tail_mass])) - 1.0).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KestenFit {
    pub slope: f64,
    pub tau_hat: f64,
    pub points: usize,
}

/// Fit `log P(R₁ = n)` against `log n` over even `n ∈ [lo, hi]`. `tau_hat`
/// is `exp(mean(log P + 1.5 log n))`.
pub fn kesten_fit(law: &ReturnTimeLaw, lo: u64, hi: u64) -> Result<KestenFit> {
    if lo < 2 || hi > law.n_max() || lo > hi {
        return Err(Error::InsufficientRange(format!(
            "fit window [{lo}, {hi}] must lie in [2, {}]",
            law.n_max()
        )));
    }
    let pts: Vec<(f64, f64)> = law
        .iter()
        .filter(|(n, p)| *n >= lo && *n <= hi && *p > 0.0)
        .map(|(n, p)| ((n as f64).ln(), p.ln()))
        .collect();
    fit_power_law(&pts)
}

/// Least-squares power-law fit on `(ln n, ln p)` pairs.
pub fn fit_power_law(pts: &[(f64, f64)]) -> Result<KestenFit> {
    if pts.len() < 10 {
        return Err(Error::FitFailed(format!(
            "{} points in the fit window, need at least 10",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (_, slope) = linear_fit(&xs, &ys);
    if !slope.is_finite() {
        return Err(Error::FitFailed("degenerate fit".into()));
    }
    let log_tau = pts.iter().map(|(x, y)| y + 1.5 * x).sum::<f64>() / pts.len() as f64;
    Ok(KestenFit {
        slope,
        tau_hat: log_tau.exp(),
        points: pts.len(),
    })
}

/// `√k · P(S_k = 0)` for the horizontal ±1 component at even `k`, the
/// finite-`k` value of the local constant `d_μ`.
pub fn d_mu_estimate(k: u64) -> Result<f64> {
    if k == 0 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("k must be even and positive, got {k}")));
    }
    Ok((k as f64).sqrt() * survival(k / 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::q;

    #[test]
    fn small_values() {
        assert_eq!(exact_first_return(2), q(1, 2));
        assert_eq!(exact_first_return(4), q(1, 8));
        assert_eq!(exact_first_return(6), q(1, 16));
        assert_eq!(exact_first_return(3), q(0, 1));
        let law = first_return_law(64).unwrap();
        for n in 1..=64 {
            assert_eq!(law.exact(n).unwrap(), exact_first_return(n), "n = {n}");
        }
    }

    #[test]
    fn odd_or_tiny_bound_rejected() {
        assert!(first_return_law(3).is_err());
        assert!(first_return_law(0).is_err());
    }

    #[test]
    fn series_matches_recursion_at_switch() {
        let mut u = small_table()[(SERIES_FROM - 1) as usize];
        u *= (2 * SERIES_FROM - 1) as f64 / (2 * SERIES_FROM) as f64;
        assert!((u / survival(SERIES_FROM) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn table_matches_exact() {
        for m in [0u64, 1, 5, 32, 33, 100, 127] {
            let e = q_to_f64(&exact_survival(m));
            assert!((survival(m) / e - 1.0).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn mass_accounting() {
        for n in [2u64, 10, 64, 1000, 100_000] {
            let law = first_return_law(n).unwrap();
            assert!(law.mass_defect() < 1e-12, "n = {n}: {}", law.mass_defect());
        }
    }

    #[test]
    fn too_few_points() {
        let law = first_return_law(100).unwrap();
        assert!(matches!(kesten_fit(&law, 2, 18), Err(Error::FitFailed(_))));
        assert!(kesten_fit(&law, 2, 20).is_ok());
        assert!(kesten_fit(&law, 2, 200).is_err());
    }
}
