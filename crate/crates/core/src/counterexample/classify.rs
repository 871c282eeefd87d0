use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::chain::finite::solve_exact;
use crate::chain::{return_prob_estimate, walk_until};
use crate::rng::{stream, Purpose};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::space::{apply_z, CounterexampleSpace, NamedPoints, StepMeasure, ZState};
use crate::stats::Proportion;
use crate::weight::{format_q, Q};

/// `(P(enter the lattice region), P(escape along the tail))`, exactly.
///
/// Lattice states are absorbed already. `Tail(k)` with `k >= 1` escapes
/// surely: only `a` moves it, always to the right. The remaining reachable
/// states form a finite system solved by first-step analysis.
pub fn absorption_oracle(s: ZState) -> Result<(Q, Q)> {
    let s = s.validated()?;
    if s.is_lattice() {
        return Ok((Q::one(), Q::zero()));
    }
    let mu = StepMeasure::mu_prime();
    let terminal = |t: &ZState| t.is_lattice() || matches!(t, ZState::Tail(k) if *k >= 1);
    if terminal(&s) {
        return Ok((Q::zero(), Q::one()));
    }
    let mut index: BTreeMap<ZState, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([s]);
    index.insert(s, 0);
    while let Some(x) = queue.pop_front() {
        for (g, _) in mu.support() {
            let y = apply_z(*g, x)?;
            if !terminal(&y) && !index.contains_key(&y) {
                index.insert(y, index.len());
                queue.push_back(y);
            }
        }
        if index.len() > 100_000 {
            return Err(Error::InvalidState(format!("{s} reaches too many states")));
        }
    }
    let n = index.len();
    let mut a = vec![vec![Q::zero(); n]; n];
    let mut b = vec![Q::zero(); n];
    for (x, &r) in &index {
        a[r][r] += Q::one();
        for (g, w) in mu.support() {
            let y = apply_z(*g, *x)?;
            if y.is_lattice() {
                b[r] += w;
            } else if let Some(&c) = index.get(&y) {
                a[r][c] -= w;
            }
        }
    }
    let h = solve_exact(a, b)?;
    let p = h[0].clone();
    Ok((p.clone(), Q::one() - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Recurrent,
    Transient,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSummary {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub horizon: u64,
    pub nsamples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub point: String,
    pub state: String,
    pub verdict: Verdict,
    pub p_recurrent: String,
    pub p_escape: String,
    pub mc: McSummary,
    /// `(MC - exact) / σ`; absent when the Monte Carlo target differs from
    /// the oracle's event.
    pub z_score: Option<f64>,
    /// Monte Carlo disagrees with the oracle by more than 4σ.
    pub contradiction: bool,
    /// 95% half-width above 0.005.
    pub wide_ci: bool,
    pub notes: Vec<String>,
}

/// Monte Carlo `P(enter the lattice within horizon)`. Paths stop early once
/// on `Tail(k)`, `k >= 1`, from where entry is impossible.
fn entry_estimate(mu: &StepMeasure, s: ZState, horizon: u64, nsamples: u64, seed: u64, exec: Exec) -> Result<Proportion> {
    if nsamples == 0 {
        return Err(Error::InvalidArgument("nsamples must be positive".into()));
    }
    let stop = |x: &ZState| x.is_lattice() || matches!(x, ZState::Tail(k) if *k >= 1);
    let hits = exec.map_indices(nsamples, |k| {
        let mut rng = stream(seed, Purpose::Path, k);
        walk_until(&CounterexampleSpace, mu, &s, horizon, &mut rng, stop)
            .map(|r| matches!(r, Some((_, x)) if x.is_lattice()))
    });
    let mut successes = 0;
    for h in hits {
        successes += u64::from(h?);
    }
    Ok(Proportion::new(successes, nsamples))
}

/// Classify `s` from the exact absorption probabilities and cross-check
/// them by Monte Carlo entry into the lattice within `horizon` steps.
pub fn classify_point(name: &str, s: ZState, horizon: u64, nsamples: u64, seed: u64, exec: Exec) -> Result<ClassificationReport> {
    let (p, e) = absorption_oracle(s)?;
    let verdict = if p.is_one() {
        Verdict::Recurrent
    } else if p.is_zero() {
        Verdict::Transient
    } else {
        Verdict::Neither
    };
    let mu = StepMeasure::mu_prime();
    let mut notes = Vec::new();
    let (prop, z_score): (Proportion, Option<f64>) = if s.is_lattice() {
        notes.push(
            "lattice region: recurrent by the divergent Green sum at π (see the green command); \
             Monte Carlo estimates a return to the start within the horizon"
                .into(),
        );
        let prop = return_prob_estimate(&CounterexampleSpace, &mu, &s, |x| *x == s, horizon, nsamples, seed, exec)?;
        (prop, None)
    } else {
        let prop = entry_estimate(&mu, s, horizon, nsamples, seed, exec)?;
        let exact = crate::weight::q_to_f64(&p);
        let sigma = prop.sigma_at(exact);
        let z = if sigma > 0.0 {
            (prop.estimate - exact) / sigma
        } else if prop.estimate == exact {
            0.0
        } else {
            f64::INFINITY
        };
        match verdict {
            Verdict::Transient => notes.push("escapes along the tail: only a moves it, always to the right".into()),
            Verdict::Neither => notes.push(
                "absorption probability strictly inside (0, 1) from first-step analysis on the tail and inlet".into(),
            ),
            Verdict::Recurrent => {}
        }
        (prop, Some(z))
    };
    let contradiction = z_score.is_some_and(|z| z.abs() > 4.0);
    let wide_ci = 0.5 * (prop.ci_hi - prop.ci_lo) > 0.005;
    if wide_ci {
        notes.push("wide confidence interval; the exact oracle decides".into());
    }
    Ok(ClassificationReport {
        point: name.to_string(),
        state: s.to_string(),
        verdict,
        p_recurrent: format_q(&p),
        p_escape: format_q(&e),
        mc: McSummary {
            estimate: prop.estimate,
            ci_lo: prop.ci_lo,
            ci_hi: prop.ci_hi,
            horizon,
            nsamples,
            seed,
        },
        z_score,
        contradiction,
        wide_ci,
        notes,
    })
}

/// Classify the six named points. Point `k` uses seed `seed + k`.
pub fn classify_named(points: NamedPoints, horizon: u64, nsamples: u64, seed: u64, exec: Exec) -> Result<Vec<ClassificationReport>> {
    points
        .all()
        .iter()
        .enumerate()
        .map(|(k, (name, s))| classify_point(name, *s, horizon, nsamples, seed.wrapping_add(k as u64), exec))
        .collect()
}

/// All three verdicts occur among the reports.
pub fn trichotomy(reports: &[ClassificationReport]) -> bool {
    [Verdict::Recurrent, Verdict::Transient, Verdict::Neither]
        .iter()
        .all(|v| reports.iter().any(|r| r.verdict == *v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::q;

    #[test]
    fn named_absorption_values() {
        assert_eq!(absorption_oracle(ZState::PI).unwrap(), (q(1, 1), q(0, 1)));
        assert_eq!(absorption_oracle(ZState::R).unwrap(), (q(0, 1), q(1, 1)));
        assert_eq!(absorption_oracle(ZState::O1).unwrap(), (q(4, 9), q(5, 9)));
        assert_eq!(absorption_oracle(ZState::O2).unwrap(), (q(5, 9), q(4, 9)));
        assert_eq!(absorption_oracle(ZState::Tail(-3)).unwrap(), (q(4, 9), q(5, 9)));
        assert_eq!(absorption_oracle(ZState::Inlet(-3)).unwrap(), (q(5, 9), q(4, 9)));
    }

    #[test]
    fn invalid_state_rejected() {
        assert!(absorption_oracle(ZState::Inlet(2)).is_err());
        assert!(absorption_oracle(ZState::Lattice { i: 1, j: 0 }).is_err());
    }

    #[test]
    fn small_run_reports() {
        let r = classify_named(NamedPoints::default(), 200, 100, 1, Exec::Parallel).unwrap();
        assert!(trichotomy(&r));
        assert!(r.iter().all(|x| x.wide_ci));
        let o1 = r.iter().find(|x| x.point == "O1").unwrap();
        assert_eq!(o1.p_recurrent, "4/9");
    }
}
