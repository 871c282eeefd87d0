//! Finite Markov chains with rational transition matrices.

use std::collections::VecDeque;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weight::{format_q, parse_q, q_to_f64, Q};

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    p: Vec<Vec<Q>>,
}

impl FiniteChain {
    pub fn new(p: Vec<Vec<Q>>) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            return Err(Error::InvalidChain("no states".into()));
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidChain(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidChain(format!("row {i} has a negative entry")));
            }
            let s: Q = row.iter().sum();
            if !s.is_one() {
                return Err(Error::InvalidChain(format!("row {i} sums to {s}")));
            }
        }
        Ok(FiniteChain { p })
    }

    /// First non-empty line: the number of states `n`. Then `n` rows of `n`
    /// comma-separated entries (`p/q`, integers, or decimals). Lines starting
    /// with `#` are ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidChain("empty input".into()))?
            .trim_end_matches(',')
            .parse()
            .map_err(|_| Error::InvalidChain("first line must be the state count".into()))?;
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|f| parse_q(f.trim()))
                .collect::<Result<Vec<Q>>>()
                .map_err(|e| Error::InvalidChain(format!("row {i}: {e}")))?;
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::InvalidChain(format!(
                "expected {n} rows, found {}",
                rows.len()
            )));
        }
        Self::new(rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", self.n());
        for row in &self.p {
            let cells: Vec<String> = row.iter().map(format_q).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.p[i][j]
    }

    pub fn rows(&self) -> &[Vec<Q>] {
        &self.p
    }

    fn check_state(&self, s: usize) -> Result<()> {
        if s >= self.n() {
            return Err(Error::InvalidArgument(format!(
                "state {s} out of range 0..{}",
                self.n()
            )));
        }
        Ok(())
    }
}

/// `Σ_{n=0}^{N} P^n(z, y)` for `N = 0..=n_max`, exactly.
pub fn green_partial_sums(chain: &FiniteChain, z: usize, y: usize, n_max: usize) -> Result<Vec<Q>> {
    chain.check_state(z)?;
    chain.check_state(y)?;
    let n = chain.n();
    let mut row: Vec<Q> = (0..n).map(|k| if k == z { Q::one() } else { Q::zero() }).collect();
    let mut acc = row[y].clone();
    let mut out = vec![acc.clone()];
    for _ in 0..n_max {
        row = step_row(&chain.p, &row);
        acc += &row[y];
        out.push(acc.clone());
    }
    Ok(out)
}

fn step_row(p: &[Vec<Q>], row: &[Q]) -> Vec<Q> {
    let n = p.len();
    let mut next = vec![Q::zero(); n];
    for (i, ri) in row.iter().enumerate() {
        if ri.is_zero() {
            continue;
        }
        for (j, pij) in p[i].iter().enumerate() {
            if !pij.is_zero() {
                next[j] += ri * pij;
            }
        }
    }
    next
}

/// Floating-point partial sums, for long horizons.
pub fn green_partial_sums_f64(chain: &FiniteChain, z: usize, y: usize, n_max: usize) -> Result<Vec<f64>> {
    chain.check_state(z)?;
    chain.check_state(y)?;
    let p = to_f64(&chain.p);
    let n = p.len();
    let mut row = vec![0.0; n];
    row[z] = 1.0;
    let mut acc = row[y];
    let mut out = vec![acc];
    let mut next = vec![0.0; n];
    for _ in 0..n_max {
        next.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            if row[i] != 0.0 {
                for j in 0..n {
                    next[j] += row[i] * p[i][j];
                }
            }
        }
        std::mem::swap(&mut row, &mut next);
        acc += row[y];
        out.push(acc);
    }
    Ok(out)
}

fn to_f64(p: &[Vec<Q>]) -> Vec<Vec<f64>> {
    p.iter().map(|r| r.iter().map(q_to_f64).collect()).collect()
}

/// Solve `A x = b` exactly by Gaussian elimination with pivot search.
pub fn solve_exact(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Result<Vec<Q>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::Singular)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..n {
                if !a[col][c].is_zero() {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
            let delta = &factor * &b[col];
            b[r] -= delta;
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// `P_x(∃ n >= 0 : X_n ∈ target)` for every `x`, exactly.
pub fn hitting_probabilities(p: &[Vec<Q>], target: &[bool]) -> Result<Vec<Q>> {
    let n = p.len();
    // States from which the target is reachable.
    let mut reach = target.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| target[i]).collect();
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if !reach[i] && !p[i][j].is_zero() {
                reach[i] = true;
                queue.push_back(i);
            }
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&i| reach[i] && !target[i]).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &i) in unknown.iter().enumerate() {
        index[i] = k;
    }
    let m = unknown.len();
    let mut a = vec![vec![Q::zero(); m]; m];
    let mut b = vec![Q::zero(); m];
    for (k, &i) in unknown.iter().enumerate() {
        a[k][k] += Q::one();
        for j in 0..n {
            if p[i][j].is_zero() {
                continue;
            }
            if target[j] {
                b[k] += &p[i][j];
            } else if reach[j] {
                a[k][index[j]] -= &p[i][j];
            }
        }
    }
    let x = solve_exact(a, b)?;
    Ok((0..n)
        .map(|i| {
            if target[i] {
                Q::one()
            } else if reach[i] {
                x[index[i]].clone()
            } else {
                Q::zero()
            }
        })
        .collect())
}

/// `P_z(R¹_y < ∞)` for every `z`, where `R¹_y` is the first visit at a time `>= 1`.
pub fn first_passage(chain: &FiniteChain, y: usize) -> Result<Vec<Q>> {
    chain.check_state(y)?;
    let n = chain.n();
    let target: Vec<bool> = (0..n).map(|k| k == y).collect();
    let h0 = hitting_probabilities(&chain.p, &target)?;
    Ok((0..n)
        .map(|z| (0..n).map(|x| &chain.p[z][x] * &h0[x]).sum())
        .collect())
}

/// `P_z(G_y >= k)` for `k = 1..=k_max` from the chain augmented with a visit
/// counter: states `(x, c)` with `c` the number of visits to `y` so far,
/// absorbed once `c` reaches `k`.
pub fn visits_at_least_augmented(chain: &FiniteChain, z: usize, y: usize, k: usize) -> Result<Q> {
    chain.check_state(z)?;
    chain.check_state(y)?;
    if k == 0 {
        return Ok(Q::one());
    }
    let n = chain.n();
    let size = n * k + 1;
    let done = n * k;
    let mut p = vec![vec![Q::zero(); size]; size];
    p[done][done] = Q::one();
    // State (x, c) means: at x, having counted c visits, x itself not yet counted.
    for x in 0..n {
        for c in 0..k {
            let from = x * k + c;
            let c_after = if x == y { c + 1 } else { c };
            if c_after == k {
                p[from] = vec![Q::zero(); size];
                p[from][done] = Q::one();
                continue;
            }
            for xn in 0..n {
                if !chain.p[x][xn].is_zero() {
                    p[from][xn * k + c_after] += &chain.p[x][xn];
                }
            }
        }
    }
    let target: Vec<bool> = (0..size).map(|s| s == done).collect();
    let h = hitting_probabilities(&p, &target)?;
    Ok(h[z * k].clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub z: usize,
    pub y: usize,
    /// `P_z(R¹_y < ∞)`.
    pub hit: String,
    /// `P_y(R¹_y < ∞)`.
    pub ret: String,
    /// `P_z(G_y >= k)` for `k = 1..=k_max` via `P_z(G_y >= 1) · ret^{k-1}`.
    pub at_least_product: Vec<String>,
    /// The same quantities from the augmented chain.
    pub at_least_augmented: Vec<String>,
    /// `E_z[G_y]`, `None` when infinite.
    pub expected_visits: Option<String>,
    /// Green partial sum at the largest horizon used by the numerical check.
    pub green_partial: f64,
    pub green_horizon: usize,
    /// The four statements `∀n P_z(R^n_y < ∞) = 1`,
    /// `P_z(R¹_y < ∞) = P_y(R¹_y < ∞) = 1`, `P_z(G_y = ∞) = 1`, and
    /// `E_z[G_y] = ∞ ∧ P_z(R¹_y < ∞) = 1`, each decided from different data.
    pub statements: [bool; 4],
    pub consistent: bool,
}

/// Check the equivalent characterisations of `y` being visited infinitely
/// often from `z`, with exact arithmetic wherever possible.
pub fn verify_equivalences(chain: &FiniteChain, z: usize, y: usize, k_max: usize) -> Result<EquivalenceReport> {
    if k_max < 2 {
        return Err(Error::InvalidArgument("k_max must be at least 2".into()));
    }
    chain.check_state(z)?;
    chain.check_state(y)?;
    let fp = first_passage(chain, y)?;
    let hit = fp[z].clone();
    let ret = fp[y].clone();
    let at_least_one = if z == y { Q::one() } else { hit.clone() };

    let mut product = Vec::with_capacity(k_max);
    let mut augmented = Vec::with_capacity(k_max);
    let mut pow = Q::one();
    for k in 1..=k_max {
        let prod = &at_least_one * &pow;
        let aug = visits_at_least_augmented(chain, z, y, k)?;
        if prod != aug {
            return Err(Error::EquivalenceMismatch {
                k,
                product: format_q(&prod),
                augmented: format_q(&aug),
            });
        }
        product.push(prod);
        augmented.push(aug);
        pow *= &ret;
    }

    let expected = if at_least_one.is_zero() {
        Some(Q::zero())
    } else if ret.is_one() {
        None
    } else {
        Some(&at_least_one / (Q::one() - &ret))
    };

    let (green_partial, green_horizon, diverging) = green_numeric(chain, z, y, expected.as_ref())?;

    // P_z(R^n_y < ∞) = hit · ret^{n-1}.
    let s2 = ret.is_one() && (1..=k_max).all(|n| (&hit * pow_q(&ret, n - 1)).is_one());
    let s3 = hit.is_one() && ret.is_one();
    let s4 = augmented[k_max - 1].is_one();
    let s5 = diverging && hit.is_one();
    let statements = [s2, s3, s4, s5];
    let consistent = statements.iter().all(|&s| s == s3) && diverging == expected.is_none();

    Ok(EquivalenceReport {
        z,
        y,
        hit: format_q(&hit),
        ret: format_q(&ret),
        at_least_product: product.iter().map(format_q).collect(),
        at_least_augmented: augmented.iter().map(format_q).collect(),
        expected_visits: expected.as_ref().map(format_q),
        green_partial,
        green_horizon,
        statements,
        consistent,
    })
}

fn pow_q(x: &Q, e: usize) -> Q {
    let mut out = Q::one();
    for _ in 0..e {
        out *= x;
    }
    out
}

/// Partial sums up to `2^14`: a finite limit must be matched, an infinite
/// one must show linear growth over the last doubling.
fn green_numeric(chain: &FiniteChain, z: usize, y: usize, expected: Option<&Q>) -> Result<(f64, usize, bool)> {
    const HORIZON: usize = 1 << 14;
    let sums = green_partial_sums_f64(chain, z, y, HORIZON)?;
    let last = sums[HORIZON];
    let half = sums[HORIZON / 2];
    let diverging = match expected {
        Some(e) => {
            let e = q_to_f64(e);
            let close = (last - e).abs() <= 1e-6 * (1.0 + e);
            !close && last - half > 0.5
        }
        None => last - half > 0.5,
    };
    Ok((last, HORIZON, diverging))
}
