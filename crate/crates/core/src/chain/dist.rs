use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::space::{Space, StepMeasure};
use crate::weight::Weight;

/// Finitely supported distribution with explicit truncation accounting.
///
/// Stored entries are strictly positive. `leaked` is the mass discarded by
/// truncation so far, so `total() + leaked() == 1` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDist<S: Ord, W = f64> {
    entries: BTreeMap<S, W>,
    leaked: f64,
}

impl<S: Ord + Clone, W: Weight> SparseDist<S, W> {
    pub fn point(s: S) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(s, W::one());
        SparseDist {
            entries,
            leaked: 0.0,
        }
    }

    /// Build from explicit entries; zero weights are skipped, negative
    /// weights are rejected. Duplicate states are summed.
    pub fn from_entries<I: IntoIterator<Item = (S, W)>>(items: I, leaked: f64) -> Result<Self> {
        if !(leaked >= 0.0) {
            return Err(Error::InvalidDistribution(format!("leaked mass {leaked} < 0")));
        }
        let mut entries: BTreeMap<S, W> = BTreeMap::new();
        for (s, w) in items {
            if w < W::zero() {
                return Err(Error::InvalidDistribution("negative weight".into()));
            }
            if w.is_zero() {
                continue;
            }
            match entries.get_mut(&s) {
                Some(v) => *v = v.add(&w),
                None => {
                    entries.insert(s, w);
                }
            }
        }
        Ok(SparseDist { entries, leaked })
    }

    pub fn get(&self, s: &S) -> W {
        self.entries.get(s).cloned().unwrap_or_else(W::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &W)> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &BTreeMap<S, W> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn leaked(&self) -> f64 {
        self.leaked
    }

    pub fn total(&self) -> W {
        self.entries.values().fold(W::zero(), |acc, w| acc.add(w))
    }

    /// `|total + leaked - 1|`.
    pub fn mass_defect(&self) -> f64 {
        let total = crate::stats::compensated_sum(self.entries.values().map(|w| w.to_f64()));
        (total + self.leaked - 1.0).abs()
    }

    /// Drop entries lighter than `cutoff`, moving their mass to `leaked`.
    pub fn truncate(&mut self, cutoff: f64) {
        if cutoff <= 0.0 {
            return;
        }
        let mut dropped = 0.0;
        self.entries.retain(|_, w| {
            let v = w.to_f64();
            if v < cutoff {
                dropped += v;
                false
            } else {
                true
            }
        });
        self.leaked += dropped;
    }

    /// Remove and return the mass at states matching `pred` (taboo step).
    pub fn take_where<F: Fn(&S) -> bool>(&mut self, pred: F) -> W {
        let mut taken = W::zero();
        self.entries.retain(|s, w| {
            if pred(s) {
                taken = taken.add(w);
                false
            } else {
                true
            }
        });
        taken
    }

    pub fn map_states<T: Ord + Clone, F: Fn(&S) -> T>(&self, f: F) -> SparseDist<T, W> {
        let mut entries: BTreeMap<T, W> = BTreeMap::new();
        for (s, w) in &self.entries {
            let t = f(s);
            match entries.get_mut(&t) {
                Some(v) => *v = v.add(w),
                None => {
                    entries.insert(t, w.clone());
                }
            }
        }
        SparseDist {
            entries,
            leaked: self.leaked,
        }
    }

    /// Total variation distance, ignoring leaked mass.
    pub fn total_variation(&self, other: &SparseDist<S, W>) -> f64 {
        let mut keys: Vec<&S> = self.entries.keys().collect();
        keys.extend(other.entries.keys());
        keys.sort();
        keys.dedup();
        0.5 * keys
            .into_iter()
            .map(|k| (self.get(k).to_f64() - other.get(k).to_f64()).abs())
            .sum::<f64>()
    }
}

/// One step of the chain: `Σ_g m(g) · (g · d)`, then entries below `cutoff`
/// are moved to the leaked mass. With `cutoff == 0` the mass is preserved
/// exactly (exactly, for rational weights).
pub fn push_forward<Sp: Space, W: Weight>(
    d: &SparseDist<Sp::State, W>,
    m: &StepMeasure,
    space: &Sp,
    cutoff: f64,
) -> Result<SparseDist<Sp::State, W>> {
    let weights: Vec<(crate::space::Generator, W)> =
        m.support().iter().map(|(g, w)| (*g, W::from_q(w))).collect();
    let mut out: BTreeMap<Sp::State, W> = BTreeMap::new();
    for (s, w) in d.iter() {
        for (g, p) in &weights {
            let t = space.act(*g, s)?;
            let add = w.mul(p);
            match out.get_mut(&t) {
                Some(v) => *v = v.add(&add),
                None => {
                    out.insert(t, add);
                }
            }
        }
    }
    let mut next = SparseDist {
        entries: out,
        leaked: d.leaked,
    };
    next.truncate(cutoff);
    Ok(next)
}

/// Exact law of `X_n` after `n` steps.
pub fn law_after<Sp: Space, W: Weight>(
    space: &Sp,
    m: &StepMeasure,
    start: Sp::State,
    n: usize,
    cutoff: f64,
) -> Result<SparseDist<Sp::State, W>> {
    let mut d = SparseDist::point(start);
    for _ in 0..n {
        d = push_forward(&d, m, space, cutoff)?;
    }
    Ok(d)
}

/// `P(∃ k ∈ [1, n] : X_k ∈ target)` for every `n <= horizon`, by taboo
/// push-forward: mass is removed the first time it enters the target.
pub fn hitting_by_horizon<Sp: Space, W: Weight, F: Fn(&Sp::State) -> bool>(
    space: &Sp,
    m: &StepMeasure,
    start: Sp::State,
    target: F,
    horizon: usize,
    cutoff: f64,
) -> Result<Vec<W>> {
    let mut d: SparseDist<Sp::State, W> = SparseDist::point(start);
    let mut acc = W::zero();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        d = push_forward(&d, m, space, cutoff)?;
        acc = acc.add(&d.take_where(&target));
        out.push(acc.clone());
    }
    Ok(out)
}
