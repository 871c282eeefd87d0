//! State spaces, generators, and generator actions.
//!
//! Three spaces are supported: the integer line, the diagonal lattice
//! `{(s, t) : s + t even}`, and the counterexample space `Z` of the free
//! group on `a, b, c`, which glues a bi-infinite tail, a one-sided inlet, and
//! a lattice region.
//!
//! # Lattice frame of `Z`
//!
//! `Lattice { i, j }` always has `i + j` even; `π` is `(0, 0)`. `b` and `c`
//! translate diagonally, `b: (i, j) -> (i+1, j+1)` and `c: (i, j) -> (i+1, j-1)`.
//! The half-axis `Δ = {(0, j) : j >= 0}` is where `a` acts, as
//! `(0, j) -> (0, j + 2)`; elsewhere on the lattice `a` is the identity.
//! Returns are returns of `i` to 0 (the line containing `Δ`), and `j` is the
//! coordinate observed at those returns. [`to_figure_frame`] maps this frame
//! onto the drawing convention where `Δ` is the positive horizontal axis.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::{q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Generator {
    A,
    B,
    Binv,
    C,
    Cinv,
}

impl Generator {
    pub const ALL: [Generator; 5] = [
        Generator::A,
        Generator::B,
        Generator::Binv,
        Generator::C,
        Generator::Cinv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::A => "a",
            Generator::B => "b",
            Generator::Binv => "b^-1",
            Generator::C => "c",
            Generator::Cinv => "c^-1",
        }
    }

    /// `None` for `a`, which is never inverted by a supported measure.
    pub fn inverse(self) -> Option<Generator> {
        match self {
            Generator::A => None,
            Generator::B => Some(Generator::Binv),
            Generator::Binv => Some(Generator::B),
            Generator::C => Some(Generator::Cinv),
            Generator::Cinv => Some(Generator::C),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point of the counterexample space.
///
/// Variant order gives the total order used for deterministic iteration:
/// tail < inlet < lattice, then by coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ZState {
    /// `Tail(0)` is `O₁`, `Tail(1)` is `R`.
    Tail(i64),
    /// `k <= 0`; `Inlet(0)` is `O₂`.
    Inlet(i64),
    /// `i + j` even; `(0, 0)` is `π`.
    Lattice { i: i64, j: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Tail,
    Inlet,
    Lattice,
}

impl ZState {
    pub const PI: ZState = ZState::Lattice { i: 0, j: 0 };
    pub const O1: ZState = ZState::Tail(0);
    pub const O2: ZState = ZState::Inlet(0);
    pub const R: ZState = ZState::Tail(1);

    pub fn lattice(i: i64, j: i64) -> Result<ZState> {
        ZState::Lattice { i, j }.validated()
    }

    pub fn inlet(k: i64) -> Result<ZState> {
        ZState::Inlet(k).validated()
    }

    pub fn validated(self) -> Result<ZState> {
        match self {
            ZState::Lattice { i, j } if (i + j).rem_euclid(2) != 0 => Err(Error::InvalidState(
                format!("lattice point ({i}, {j}) has odd coordinate sum"),
            )),
            ZState::Inlet(k) if k > 0 => Err(Error::InvalidState(format!(
                "inlet index {k} must be <= 0"
            ))),
            s => Ok(s),
        }
    }

    pub fn region(&self) -> Region {
        match self {
            ZState::Tail(_) => Region::Tail,
            ZState::Inlet(_) => Region::Inlet,
            ZState::Lattice { .. } => Region::Lattice,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, ZState::Lattice { .. })
    }

    /// On the half-axis where `a` translates.
    pub fn on_delta(&self) -> bool {
        matches!(*self, ZState::Lattice { i: 0, j } if j >= 0)
    }
}

impl fmt::Display for ZState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZState::Tail(k) => write!(f, "Tail({k})"),
            ZState::Inlet(k) => write!(f, "Inlet({k})"),
            ZState::Lattice { i, j } => write!(f, "Lattice({i},{j})"),
        }
    }
}

/// The six points singled out in the construction, with the ray offset of
/// `P` and `Q` configurable (default 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NamedPoints {
    pub offset: i64,
}

impl Default for NamedPoints {
    fn default() -> Self {
        NamedPoints { offset: 3 }
    }
}

impl NamedPoints {
    pub fn p(&self) -> ZState {
        ZState::Tail(-self.offset)
    }

    pub fn q(&self) -> ZState {
        ZState::Inlet(-self.offset)
    }

    pub fn all(&self) -> [(&'static str, ZState); 6] {
        [
            ("pi", ZState::PI),
            ("R", ZState::R),
            ("O1", ZState::O1),
            ("O2", ZState::O2),
            ("P", self.p()),
            ("Q", self.q()),
        ]
    }
}

/// Action of a generator on `Z`.
pub fn apply_z(g: Generator, s: ZState) -> Result<ZState> {
    use Generator::*;
    let s = s.validated()?;
    Ok(match (g, s) {
        (A, ZState::Tail(k)) => ZState::Tail(k + 1),
        (A, ZState::Inlet(0)) => ZState::PI,
        (A, ZState::Inlet(k)) => ZState::Inlet(k + 1),
        (A, ZState::Lattice { i: 0, j }) if j >= 0 => ZState::Lattice { i: 0, j: j + 2 },
        (A, l @ ZState::Lattice { .. }) => l,
        (_, ZState::Tail(0)) => ZState::Inlet(0),
        (_, ZState::Inlet(0)) => ZState::Tail(0),
        (_, s @ (ZState::Tail(_) | ZState::Inlet(_))) => s,
        (B, ZState::Lattice { i, j }) => ZState::Lattice { i: i + 1, j: j + 1 },
        (Binv, ZState::Lattice { i, j }) => ZState::Lattice { i: i - 1, j: j - 1 },
        (C, ZState::Lattice { i, j }) => ZState::Lattice { i: i + 1, j: j - 1 },
        (Cinv, ZState::Lattice { i, j }) => ZState::Lattice { i: i - 1, j: j + 1 },
    })
}

/// Action of the four diagonal translations on the lattice `Z²`.
pub fn apply_diag(g: Generator, p: (i64, i64)) -> Result<(i64, i64)> {
    let (s, t) = p;
    if (s + t).rem_euclid(2) != 0 {
        return Err(Error::InvalidState(format!(
            "diagonal lattice point ({s}, {t}) has odd coordinate sum"
        )));
    }
    match g {
        Generator::A => Err(Error::UnsupportedGenerator {
            generator: "a",
            space: "diagonal lattice",
        }),
        Generator::B => Ok((s + 1, t + 1)),
        Generator::Binv => Ok((s - 1, t - 1)),
        Generator::C => Ok((s + 1, t - 1)),
        Generator::Cinv => Ok((s - 1, t + 1)),
    }
}

/// `(i, j) -> (X, Y)` in the drawing convention where `Δ` is the positive
/// `X` half-axis. The map swaps the coordinates, so it intertwines `b` with
/// `b` and `c` with `c⁻¹`; the symmetric measures used here are invariant
/// under that relabelling.
pub fn to_figure_frame(i: i64, j: i64) -> (i64, i64) {
    (j, i)
}

pub fn from_figure_frame(x: i64, y: i64) -> (i64, i64) {
    (y, x)
}

/// A countable space on which the generators act.
pub trait Space: Sync {
    type State: Clone + Ord + std::hash::Hash + fmt::Debug + Send + Sync;
    const NAME: &'static str;

    fn act(&self, g: Generator, s: &Self::State) -> Result<Self::State>;
}

/// `ℤ` with `b = +1`, `b⁻¹ = -1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegerLine;

impl Space for IntegerLine {
    type State = i64;
    const NAME: &'static str = "integer line";

    fn act(&self, g: Generator, s: &i64) -> Result<i64> {
        match g {
            Generator::B => Ok(s + 1),
            Generator::Binv => Ok(s - 1),
            other => Err(Error::UnsupportedGenerator {
                generator: other.name(),
                space: Self::NAME,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DiagonalLattice;

impl Space for DiagonalLattice {
    type State = (i64, i64);
    const NAME: &'static str = "diagonal lattice";

    fn act(&self, g: Generator, s: &(i64, i64)) -> Result<(i64, i64)> {
        apply_diag(g, *s)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CounterexampleSpace;

impl Space for CounterexampleSpace {
    type State = ZState;
    const NAME: &'static str = "counterexample space";

    fn act(&self, g: Generator, s: &ZState) -> Result<ZState> {
        apply_z(g, *s)
    }
}

/// A finitely supported probability measure on the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasure {
    support: Vec<(Generator, Q)>,
    thresholds: Vec<u64>,
}

impl StepMeasure {
    pub fn new(support: Vec<(Generator, Q)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let mut seen = Vec::new();
        let mut total = Q::zero();
        for (g, w) in &support {
            if !w.is_positive() {
                return Err(Error::InvalidMeasure(format!("weight of {g} is not positive")));
            }
            if seen.contains(g) {
                return Err(Error::InvalidMeasure(format!("{g} listed twice")));
            }
            seen.push(*g);
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let mut thresholds = Vec::with_capacity(support.len());
        let mut cum = Q::zero();
        let scale = Q::from_integer(num_bigint::BigInt::from(1u128 << 64));
        for (k, (_, w)) in support.iter().enumerate() {
            cum += w;
            let t = if k + 1 == support.len() {
                u64::MAX
            } else {
                let v = (&cum * &scale).floor().to_integer();
                u64::try_from(v).unwrap_or(u64::MAX)
            };
            thresholds.push(t);
        }
        Ok(StepMeasure {
            support,
            thresholds,
        })
    }

    /// `μ′ = (δ_a + δ_b + δ_b⁻¹ + δ_c + δ_c⁻¹) / 5`.
    pub fn mu_prime() -> Self {
        Self::uniform(&Generator::ALL)
    }

    /// The four diagonal steps with weight 1/4 each.
    pub fn diagonal() -> Self {
        Self::uniform(&[Generator::B, Generator::Binv, Generator::C, Generator::Cinv])
    }

    /// Simple ±1 walk on the integer line.
    pub fn simple_line() -> Self {
        Self::uniform(&[Generator::B, Generator::Binv])
    }

    pub fn uniform(gens: &[Generator]) -> Self {
        let w = q(1, gens.len() as i64);
        Self::new(gens.iter().map(|g| (*g, w.clone())).collect()).expect("uniform measure")
    }

    pub fn support(&self) -> &[(Generator, Q)] {
        &self.support
    }

    pub fn weight(&self, g: Generator) -> Q {
        self.support
            .iter()
            .find(|(h, _)| *h == g)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Draw one generator; consumes exactly one `u64`.
    #[inline]
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> Generator {
        let u = rng.next_u64();
        for (k, t) in self.thresholds.iter().enumerate() {
            if u < *t {
                return self.support[k].0;
            }
        }
        self.support[self.support.len() - 1].0
    }
}

/// Breadth-first search over the moves available under `gens`; returns the
/// graph distance of every state within `radius` of `start`.
pub fn bfs<S: Space>(
    space: &S,
    gens: &[Generator],
    start: &S::State,
    radius: usize,
) -> Result<BTreeMap<S::State, usize>> {
    let mut dist = BTreeMap::new();
    dist.insert(start.clone(), 0usize);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if d == radius {
            continue;
        }
        for g in gens {
            let t = space.act(*g, &s)?;
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    Ok(dist)
}
