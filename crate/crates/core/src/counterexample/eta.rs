use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{stream, Purpose};
use crate::stats::Proportion;
use crate::weight::{q, q_to_f64, Q};

/// Law of the shift `η` accumulated along `Δ` during one visit:
/// `P(η = 2m) = 4 / 5^{m+1}`, truncated at `m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaLaw {
    m_max: u64,
    probs: Vec<Q>,
}

pub fn eta_law(m_max: u64) -> Result<EtaLaw> {
    if m_max > 100_000 {
        return Err(Error::InvalidArgument(format!("m_max = {m_max} is too large")));
    }
    let mut probs = Vec::with_capacity(m_max as usize + 1);
    let mut p = q(4, 5);
    for _ in 0..=m_max {
        probs.push(p.clone());
        p *= q(1, 5);
    }
    Ok(EtaLaw { m_max, probs })
}

impl EtaLaw {
    pub fn m_max(&self) -> u64 {
        self.m_max
    }

    /// `P(η = 2m)`, zero beyond the truncation.
    pub fn prob(&self, m: u64) -> Q {
        self.probs.get(m as usize).cloned().unwrap_or_else(Q::zero)
    }

    pub fn probs(&self) -> &[Q] {
        &self.probs
    }

    pub fn total(&self) -> Q {
        self.probs.iter().sum()
    }

    /// `P(η > 2 m_max) = 5^{-(m_max+1)}`.
    pub fn tail_mass(&self) -> Q {
        Q::new(BigInt::one(), BigInt::from(5).pow(self.m_max as u32 + 1))
    }

    /// Mean of the truncated law, `Σ 2m P(η = 2m)`.
    pub fn mean(&self) -> Q {
        self.probs
            .iter()
            .enumerate()
            .map(|(m, p)| p * Q::from_integer(BigInt::from(2 * m)))
            .sum()
    }

    /// Mean carried by the tail beyond the truncation:
    /// `Σ_{m > M} 2m · 4/5^{m+1} = (4M + 5) / (2 · 5^{M+1})`.
    pub fn tail_mean(&self) -> Q {
        let m = self.m_max as i64;
        self.tail_mass() * q(4 * m + 5, 2)
    }
}

/// Draw `η`: twice the number of `a` steps before the first other step.
pub fn sample_eta<R: RngCore>(rng: &mut R) -> u64 {
    // P(next draw is a) = 1/5: compare 64-bit words against ⌊2^64/5⌋.
    const FIFTH: u64 = u64::MAX / 5;
    let mut m = 0;
    while rng.next_u64() < FIFTH {
        m += 1;
    }
    2 * m
}

/// Exact `P(H_n > n)` for `H_n = η_1 + ... + η_n`.
///
/// Only values of `η` up to `n` influence `P(H_n <= n)`, so the law of
/// `H_n` is convolved exactly on `{0, 2, ..., n}`.
pub fn exact_h_tail(n: u64) -> Q {
    let half = (n / 2) as usize;
    let eta: Vec<Q> = (0..=half).map(|m| q(4, 5) * Q::new(BigInt::one(), BigInt::from(5).pow(m as u32))).collect();
    let mut h = vec![Q::zero(); half + 1];
    h[0] = Q::one();
    for _ in 0..n {
        let mut next = vec![Q::zero(); half + 1];
        for (i, hi) in h.iter().enumerate() {
            if hi.is_zero() {
                continue;
            }
            for (j, ej) in eta.iter().enumerate().take(half + 1 - i) {
                next[i + j] += hi * ej;
            }
        }
        h = next;
    }
    Q::one() - h.iter().sum::<Q>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpPoint {
    pub n: u64,
    pub estimate: Proportion,
    pub exact: f64,
    pub exact_rational: String,
    /// `(estimate - exact) / σ(exact)`.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpFit {
    pub points: Vec<LdpPoint>,
    /// `min_n -ln(p̂_n) / n` over nonzero estimates; every estimate then
    /// satisfies `p̂_n <= exp(-ĉ n)`.
    pub c_hat: Option<f64>,
    /// Slope of the least-squares line of `ln p̂_n` on `n`.
    pub slope: Option<f64>,
    /// Some estimate sits below the Monte Carlo resolution.
    pub resolution_warning: bool,
    /// Every estimate within 4σ of the exact tail.
    pub consistent_with_exact: bool,
    pub pass: bool,
}

/// Monte Carlo `P(H_n > n)` for each `n` in `nvals`, sample `k` using
/// stream `k`, checked against [`exact_h_tail`].
pub fn ldp_check(nvals: &[u64], nsamples: u64, seed: u64, exec: Exec) -> Result<LdpFit> {
    if nvals.is_empty() || nvals.len() > 64 || nvals.contains(&0) || nsamples == 0 {
        return Err(Error::InvalidArgument("need 1 to 64 positive n values and positive samples".into()));
    }
    let top = *nvals.iter().max().expect("nonempty");
    let mut sorted: Vec<(usize, u64)> = nvals.iter().copied().enumerate().collect();
    sorted.sort_by_key(|x| x.1);
    let flags = exec.map_indices(nsamples, |k| {
        let mut rng = stream(seed, Purpose::Shift, k);
        let mut h = 0u64;
        let mut out = 0u64;
        let mut next = 0;
        for step in 1..=top {
            h += sample_eta(&mut rng);
            while next < sorted.len() && sorted[next].1 == step {
                if h > step {
                    out |= 1 << sorted[next].0;
                }
                next += 1;
            }
        }
        out
    });
    let mut points = Vec::with_capacity(nvals.len());
    for (idx, &n) in nvals.iter().enumerate() {
        let hits = flags.iter().filter(|f| *f >> idx & 1 == 1).count() as u64;
        let estimate = Proportion::new(hits, nsamples);
        let exact_q = exact_h_tail(n);
        let exact = q_to_f64(&exact_q);
        let sigma = estimate.sigma_at(exact);
        let z_score = if sigma > 0.0 {
            (estimate.estimate - exact) / sigma
        } else if estimate.estimate == exact {
            0.0
        } else {
            f64::INFINITY
        };
        points.push(LdpPoint {
            n,
            estimate,
            exact,
            exact_rational: crate::weight::format_q(&exact_q),
            z_score,
        });
    }
    let positive: Vec<&LdpPoint> = points.iter().filter(|p| p.estimate.successes > 0).collect();
    let resolution_warning = points.iter().any(|p| p.exact * (nsamples as f64) < 10.0);
    let c_hat = positive
        .iter()
        .map(|p| -p.estimate.estimate.ln() / p.n as f64)
        .min_by(|a, b| a.total_cmp(b));
    let slope = (positive.len() >= 2).then(|| {
        let xs: Vec<f64> = positive.iter().map(|p| p.n as f64).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.estimate.estimate.ln()).collect();
        crate::stats::linear_fit(&xs, &ys).1
    });
    let consistent_with_exact = points.iter().all(|p| p.z_score.abs() <= 4.0);
    let bound_ok = match c_hat {
        Some(c) => c > 0.0 && points.iter().all(|p| p.estimate.estimate <= (-c * p.n as f64).exp() * (1.0 + 1e-12)),
        None => true,
    };
    Ok(LdpFit {
        points,
        c_hat,
        slope,
        resolution_warning,
        consistent_with_exact,
        pass: bound_ok && consistent_with_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_identities() {
        let e = eta_law(0).unwrap();
        assert_eq!(e.prob(0), q(4, 5));
        for m in [0u64, 1, 7, 30] {
            let e = eta_law(m).unwrap();
            assert_eq!(e.total() + e.tail_mass(), Q::one());
            assert_eq!(e.mean() + e.tail_mean(), q(1, 2));
        }
    }

    #[test]
    fn one_step_tail() {
        assert_eq!(exact_h_tail(1), q(1, 5));
        assert_eq!(exact_h_tail(2), Q::one() - q(16, 25) - q(2 * 16, 125));
    }

    #[test]
    fn eta_sampler_frequencies() {
        let mut rng = stream(4, Purpose::Shift, 0);
        let n = 100_000;
        let zeros = (0..n).filter(|_| sample_eta(&mut rng) == 0).count();
        let p = zeros as f64 / n as f64;
        assert!((p - 0.8).abs() < 5.0 * (0.16 / n as f64).sqrt());
    }
}
