use rand::RngCore;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{stream, Purpose};
use crate::space::{Generator, Space, StepMeasure};
use crate::stats::Proportion;

/// A sampled path: start state, the drawn generators, and the seed that
/// reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub start: S,
    pub steps: Vec<Generator>,
    pub seed: u64,
    pub index: u64,
}

impl<S: Clone> Trajectory<S> {
    /// `X_0, X_1, ..., X_n`.
    pub fn states<Sp: Space<State = S>>(&self, space: &Sp) -> Result<Vec<S>> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut cur = self.start.clone();
        out.push(cur.clone());
        for g in &self.steps {
            cur = space.act(*g, &cur)?;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

pub fn sample_path<Sp: Space>(
    space: &Sp,
    m: &StepMeasure,
    start: Sp::State,
    horizon: usize,
    seed: u64,
) -> Result<Trajectory<Sp::State>> {
    sample_path_indexed(space, m, start, horizon, seed, 0)
}

/// Path number `index` of the ensemble keyed by `seed`.
pub fn sample_path_indexed<Sp: Space>(
    space: &Sp,
    m: &StepMeasure,
    start: Sp::State,
    horizon: usize,
    seed: u64,
    index: u64,
) -> Result<Trajectory<Sp::State>> {
    // Fail early on invalid start states.
    for (g, _) in m.support() {
        space.act(*g, &start)?;
    }
    let mut rng = stream(seed, Purpose::Path, index);
    let steps = (0..horizon).map(|_| m.sample(&mut rng)).collect();
    Ok(Trajectory {
        start,
        steps,
        seed,
        index,
    })
}

/// Walk from `start` until `stop` holds or `horizon` steps elapse; returns
/// the stopping time and state.
pub fn walk_until<Sp, R, F>(
    space: &Sp,
    m: &StepMeasure,
    start: &Sp::State,
    horizon: u64,
    rng: &mut R,
    stop: F,
) -> Result<Option<(u64, Sp::State)>>
where
    Sp: Space,
    R: RngCore,
    F: Fn(&Sp::State) -> bool,
{
    let mut cur = start.clone();
    for n in 1..=horizon {
        cur = space.act(m.sample(rng), &cur)?;
        if stop(&cur) {
            return Ok(Some((n, cur)));
        }
    }
    Ok(None)
}

/// Successive returns of a scalar observable to zero along a path.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnObservables {
    /// `R_1 < R_2 < ...`, indices into the path.
    pub return_times: Vec<usize>,
    /// `position(X_{R_n})`.
    pub positions: Vec<i64>,
    /// False when the path ended before `max_returns` returns were seen.
    pub completed: bool,
}

/// Record up to `max_returns` returns of `scalar` to 0 along `states`, which
/// must start with `scalar == 0`.
pub fn observe_returns<S, F, G>(
    states: &[S],
    scalar: F,
    position: G,
    max_returns: usize,
) -> Result<ReturnObservables>
where
    F: Fn(&S) -> i64,
    G: Fn(&S) -> i64,
{
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
    if scalar(first) != 0 {
        return Err(Error::InvalidArgument(
            "path must start on the zero set of the scalar".into(),
        ));
    }
    let mut return_times = Vec::new();
    let mut positions = Vec::new();
    for (n, s) in states.iter().enumerate().skip(1) {
        if return_times.len() == max_returns {
            break;
        }
        if scalar(s) == 0 {
            return_times.push(n);
            positions.push(position(s));
        }
    }
    let completed = return_times.len() == max_returns;
    Ok(ReturnObservables {
        return_times,
        positions,
        completed,
    })
}

/// Monte Carlo estimate of `P_start(∃ n ∈ [1, horizon] : X_n ∈ target)`
/// with a Wilson interval. Sample `k` uses stream `k` of `seed`, so the
/// result does not depend on the execution mode.
pub fn return_prob_estimate<Sp, F>(
    space: &Sp,
    m: &StepMeasure,
    start: &Sp::State,
    target: F,
    horizon: u64,
    nsamples: u64,
    seed: u64,
    exec: Exec,
) -> Result<Proportion>
where
    Sp: Space,
    F: Fn(&Sp::State) -> bool + Sync,
{
    if nsamples == 0 {
        return Err(Error::InvalidArgument("nsamples must be positive".into()));
    }
    for (g, _) in m.support() {
        space.act(*g, start)?;
    }
    let hits = exec.map_indices(nsamples, |k| {
        let mut rng = stream(seed, Purpose::Path, k);
        walk_until(space, m, start, horizon, &mut rng, &target).map(|t| t.is_some())
    });
    let mut successes = 0;
    for h in hits {
        if h? {
            successes += 1;
        }
    }
    Ok(Proportion::new(successes, nsamples))
}
