use serde::Serialize;

use super::eta::{sample_eta, EtaLaw};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::return_laws::excursion::{sample_displacement, sample_half_length};
use crate::return_laws::NuLaw;
use crate::rng::{stream, Purpose};
use crate::space::{apply_z, StepMeasure, ZState};
use crate::weight::q_to_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenMethod {
    /// `1{S_{R_n} = -H_n}` with independent excursion and shift streams.
    Auxiliary,
    /// The walk on `Z` from `π`, observed at its returns to the line `i = 0`.
    Direct,
}

impl GreenMethod {
    pub fn name(self) -> &'static str {
        match self {
            GreenMethod::Auxiliary => "auxiliary",
            GreenMethod::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenCheckpoint {
    pub n: u64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenCurve {
    pub method: GreenMethod,
    pub n_max: u64,
    pub nsamples: u64,
    pub seed: u64,
    /// `Ĝ_N` for `N = 1..=n_max` (index `N - 1`); the `n = 0` term is left out.
    pub partial_sums: Vec<f64>,
    pub checkpoints: Vec<GreenCheckpoint>,
    /// Trajectories cut short before `n_max` returns.
    pub exhausted: u64,
}

impl GreenCurve {
    pub fn at(&self, n: u64) -> Option<f64> {
        n.checked_sub(1).and_then(|k| self.partial_sums.get(k as usize).copied())
    }

    pub fn checkpoint(&self, n: u64) -> Option<&GreenCheckpoint> {
        self.checkpoints.iter().find(|c| c.n == n)
    }

    pub fn exhausted_fraction(&self) -> f64 {
        self.exhausted as f64 / self.nsamples as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GreenOptions {
    /// Seed for the shift stream in auxiliary mode; defaults to the main seed.
    pub eta_seed: Option<u64>,
    /// Horizons at which standard errors are computed; defaults to powers
    /// of ten and `n_max`.
    pub checkpoints: Option<Vec<u64>>,
}

struct PathHits {
    hits: Vec<u32>,
    exhausted: bool,
}

fn auxiliary_path(seed: u64, eta_seed: u64, k: u64, n_max: u64) -> PathHits {
    let mut walk = stream(seed, Purpose::Excursion, k);
    let mut shift = stream(eta_seed, Purpose::Shift, k);
    let (mut s, mut h) = (0i64, 0i64);
    let mut hits = Vec::new();
    for n in 1..=n_max {
        let Some(m) = sample_half_length(&mut walk) else {
            return PathHits { hits, exhausted: true };
        };
        s += sample_displacement(&mut walk, 2 * m);
        h += sample_eta(&mut shift) as i64;
        if s == -h {
            hits.push(n as u32);
        }
    }
    PathHits { hits, exhausted: false }
}

fn direct_path(seed: u64, k: u64, n_max: u64, mu: &StepMeasure) -> Result<PathHits> {
    let mut rng = stream(seed, Purpose::Direct, k);
    let mut j = 0i64;
    let mut hits = Vec::new();
    for n in 1..=n_max {
        // On the line i = 0: `a` moves along Δ or holds until another
        // generator steps off the line.
        let first_j = loop {
            let g = mu.sample(&mut rng);
            match apply_z(g, ZState::Lattice { i: 0, j })? {
                ZState::Lattice { i: 0, j: nj } => j = nj,
                ZState::Lattice { j: nj, .. } => break nj - j,
                other => {
                    return Err(Error::InvalidState(format!("left the lattice at {other}")));
                }
            }
        };
        let Some(m) = sample_half_length(&mut rng) else {
            return Ok(PathHits { hits, exhausted: true });
        };
        // The first of the 2m lattice steps is already drawn; `a` holds off the line.
        j += first_j + sample_displacement(&mut rng, 2 * m - 1);
        if j == 0 {
            hits.push(n as u32);
        }
    }
    Ok(PathHits { hits, exhausted: false })
}

/// Partial sums `Ĝ_N = Σ_{1 <= n <= N} P̂(n-th return lands at π)` by either
/// method, with standard errors at powers of ten.
pub fn shifted_green_sum(
    n_max: u64,
    nsamples: u64,
    seed: u64,
    method: GreenMethod,
    opts: &GreenOptions,
    exec: Exec,
) -> Result<GreenCurve> {
    if n_max == 0 || nsamples == 0 || n_max > u32::MAX as u64 {
        return Err(Error::InvalidArgument("n_max and nsamples must be positive".into()));
    }
    let mu = StepMeasure::mu_prime();
    let eta_seed = opts.eta_seed.unwrap_or(seed);
    let paths: Vec<Result<PathHits>> = exec.map_indices(nsamples, |k| match method {
        GreenMethod::Auxiliary => Ok(auxiliary_path(seed, eta_seed, k, n_max)),
        GreenMethod::Direct => direct_path(seed, k, n_max, &mu),
    });
    let mut counts = vec![0u64; n_max as usize];
    let mut exhausted = 0;
    let mut marks: Vec<u64> = match &opts.checkpoints {
        Some(c) => c.iter().copied().filter(|n| (1..=n_max).contains(n)).collect(),
        None => std::iter::successors(Some(10u64), |x| x.checked_mul(10))
            .take_while(|x| *x <= n_max)
            .chain([n_max])
            .collect(),
    };
    marks.sort_unstable();
    marks.dedup();
    let mut sum = vec![0.0f64; marks.len()];
    let mut sum_sq = vec![0.0f64; marks.len()];
    for p in paths {
        let p = p?;
        if p.exhausted {
            exhausted += 1;
        }
        for &n in &p.hits {
            counts[n as usize - 1] += 1;
        }
        for (c, &mark) in marks.iter().enumerate() {
            let t = p.hits.partition_point(|&n| n as u64 <= mark) as f64;
            sum[c] += t;
            sum_sq[c] += t * t;
        }
    }
    let ns = nsamples as f64;
    let mut acc = 0u64;
    let partial_sums = counts
        .iter()
        .map(|c| {
            acc += c;
            acc as f64 / ns
        })
        .collect();
    let checkpoints = marks
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let mean = sum[c] / ns;
            let var = if nsamples > 1 {
                ((sum_sq[c] - ns * mean * mean) / (ns - 1.0)).max(0.0)
            } else {
                0.0
            };
            GreenCheckpoint {
                n,
                value: mean,
                stderr: (var / ns).sqrt(),
            }
        })
        .collect();
    Ok(GreenCurve {
        method,
        n_max,
        nsamples,
        seed,
        partial_sums,
        checkpoints,
        exhausted,
    })
}

/// `P(S_{R₁} = -H₁) = Σ_m ν(-2m) · P(η = 2m)` from the two exact laws.
pub fn first_term_oracle(nu: &NuLaw, eta: &EtaLaw) -> f64 {
    crate::stats::compensated_sum(
        (0..=eta.m_max()).map(|m| nu.prob(-2 * m as i64) * q_to_f64(&eta.prob(m))),
    )
}

/// Difference of two curves at `n`, with the joint standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossMethod {
    pub n: u64,
    pub auxiliary: f64,
    pub direct: f64,
    pub difference: f64,
    pub joint_stderr: f64,
    /// `|difference| / joint_stderr`.
    pub sigmas: f64,
    pub agree: bool,
}

pub fn compare_methods(aux: &GreenCurve, direct: &GreenCurve, n: u64) -> Result<CrossMethod> {
    let (Some(a), Some(d)) = (aux.checkpoint(n), direct.checkpoint(n)) else {
        return Err(Error::InvalidArgument(format!("no checkpoint at n = {n}")));
    };
    let difference = a.value - d.value;
    let joint_stderr = (a.stderr * a.stderr + d.stderr * d.stderr).sqrt();
    let sigmas = if joint_stderr > 0.0 {
        difference.abs() / joint_stderr
    } else if difference == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CrossMethod {
        n,
        auxiliary: a.value,
        direct: d.value,
        difference,
        joint_stderr,
        sigmas,
        agree: sigmas <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exec_modes_agree() {
        for method in [GreenMethod::Auxiliary, GreenMethod::Direct] {
            let a = shifted_green_sum(200, 300, 5, method, &GreenOptions::default(), Exec::Sequential).unwrap();
            let b = shifted_green_sum(200, 300, 5, method, &GreenOptions::default(), Exec::Parallel).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn partial_sums_nondecreasing() {
        let c = shifted_green_sum(1000, 200, 1, GreenMethod::Direct, &GreenOptions::default(), Exec::Parallel).unwrap();
        assert!(c.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(c.checkpoints.iter().map(|c| c.n).collect::<Vec<_>>(), vec![10, 100, 1000]);
        assert_eq!(c.at(1000), Some(c.checkpoint(1000).unwrap().value));
    }

    #[test]
    fn rejects_empty_runs() {
        assert!(shifted_green_sum(0, 1, 0, GreenMethod::Auxiliary, &GreenOptions::default(), Exec::Sequential).is_err());
    }
}
