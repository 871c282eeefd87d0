//! Local limit errors, the `a/n` lower bound, and domain-of-attraction checks.

use serde::Serialize;

use super::density::StableTarget;
use crate::chain::SparseDist;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LltError {
    pub n: u64,
    /// `sup_k |B_n/h · P(Z_n = an + kh) - g((an + kh)/B_n - A_n)|`.
    pub sup_error: f64,
    /// Lattice point `an + kh` where the sup is attained.
    pub argmax: i64,
    /// Bound on how much missing mass could move any scaled point value.
    pub truncation_effect: f64,
    /// Set when `truncation_effect` exceeds 10% of `sup_error`.
    pub truncation_warning: bool,
}

/// Local limit error of the law `dn` of `Z_n`. `point_leak` bounds the
/// mass missing from `dn` at any single point.
pub fn lll_error(dn: &SparseDist<i64, f64>, target: &StableTarget, n: u64, point_leak: f64) -> Result<LltError> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let h = target.span as i64;
    let bn = target.norming(n);
    let an = target.centering(n);
    let base = target.offset * n as i64;
    if !(bn > 0.0) {
        return Err(Error::InvalidArgument(format!("norming B_{n} = {bn} must be positive")));
    }
    let scale = bn / h as f64;
    let err_at = |x: i64| (scale * dn.get(&x) - target.density.eval(x as f64 / bn - an)).abs();
    // Support points on the lattice, plus one step beyond each end where
    // only the density contributes.
    let mut best = (f64::NEG_INFINITY, base);
    for (&x, _) in dn.iter() {
        if (x - base).rem_euclid(h) != 0 {
            return Err(Error::InvalidDistribution(format!(
                "point {x} is off the lattice {base} + {h}ℤ"
            )));
        }
        let e = err_at(x);
        if e > best.0 {
            best = (e, x);
        }
    }
    let lo = dn.entries().keys().next().copied().unwrap_or(base);
    let hi = dn.entries().keys().next_back().copied().unwrap_or(base);
    for x in [lo - h, hi + h] {
        let e = err_at(x);
        if e > best.0 {
            best = (e, x);
        }
    }
    let truncation_effect = scale * point_leak;
    Ok(LltError {
        n,
        sup_error: best.0,
        argmax: best.1,
        truncation_effect,
        truncation_warning: truncation_effect > 0.1 * best.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    /// `(n, n · P(Z_n = 0))`.
    pub values: Vec<(u64, f64)>,
    pub a_const: f64,
    pub n0: u64,
    pub pass: bool,
    /// `n · P(Z_n = 0)` at the largest `n`.
    pub limit_estimate: f64,
}

/// Check `n · P(Z_n = 0) >= a_const` for every supplied `n >= n0`.
pub fn lower_bound_check(points: &[(u64, f64)], a_const: f64, n0: u64) -> Result<LowerBoundReport> {
    let values: Vec<(u64, f64)> = points.iter().map(|&(n, p0)| (n, n as f64 * p0)).collect();
    let tested: Vec<&(u64, f64)> = values.iter().filter(|(n, _)| *n >= n0).collect();
    if tested.is_empty() {
        return Err(Error::InsufficientRange(format!("no n >= {n0} supplied")));
    }
    let pass = tested.iter().all(|(_, v)| *v >= a_const);
    let limit_estimate = values.iter().max_by_key(|(n, _)| *n).map(|v| v.1).unwrap_or(0.0);
    Ok(LowerBoundReport {
        values,
        a_const,
        n0,
        pass,
        limit_estimate,
    })
}

/// One row of an error curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorCurveRow {
    pub n: u64,
    pub sup_error: f64,
    pub argmax_k: i64,
    pub n_times_p0: f64,
}

pub fn error_curve_csv(rows: &[ErrorCurveRow]) -> String {
    let mut out = String::from("n,sup_error,argmax_k,n_times_p0\n");
    for r in rows {
        out.push_str(&format!("{},{:.17e},{},{:.17e}\n", r.n, r.sup_error, r.argmax_k, r.n_times_p0));
    }
    out
}

/// Tails `(x, F(-x), 1 - F(x))` on an increasing grid of `x > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailData {
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub target: f64,
    /// `(x, value)` along the grid.
    pub sequence: Vec<(f64, f64)>,
    /// `|value/target - 1|` at the largest `x`.
    pub final_discrepancy: f64,
    /// Distances to the target shrink over the last three grid points.
    pub trend_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoAReport {
    pub alpha: f64,
    pub tolerance: f64,
    /// `F(-x) / (1 - F(x))` against the expected `c₋/c₊`.
    pub ratio_left_right: ConditionCheck,
    /// `(1 - F(ax)) / (1 - F(x))` against `a^{-α}`, one entry per scale.
    pub scaling_right: Vec<ConditionCheck>,
    /// `F(-ax) / F(-x)` against `a^{-α}`.
    pub scaling_left: Vec<ConditionCheck>,
    pub pass: bool,
}

/// Default relative tolerance for the finite-grid verdicts.
pub const DOA_TOLERANCE: f64 = 0.10;

fn judge(name: String, target: f64, sequence: Vec<(f64, f64)>, tol: f64) -> Result<ConditionCheck> {
    if sequence.len() < 3 {
        return Err(Error::InsufficientRange(format!(
            "{name}: {} usable grid points, need at least 3",
            sequence.len()
        )));
    }
    let dev = |v: f64| if target == 0.0 { v.abs() } else { (v / target - 1.0).abs() };
    let last3: Vec<f64> = sequence[sequence.len() - 3..].iter().map(|p| dev(p.1)).collect();
    let final_discrepancy = last3[2];
    let settled = last3.iter().all(|d| *d < tol / 10.0);
    let trend_ok = settled || (last3[1] <= last3[0] && last3[2] <= last3[1]);
    let pass = final_discrepancy.is_finite() && final_discrepancy < tol && trend_ok;
    Ok(ConditionCheck {
        name,
        target,
        sequence,
        final_discrepancy,
        trend_ok,
        pass,
    })
}

fn lookup(points: &[(f64, f64, f64)], x: f64) -> Option<&(f64, f64, f64)> {
    points.iter().find(|p| (p.0 / x - 1.0).abs() < 1e-9)
}

/// Evaluate the three domain-of-attraction limits on the grid. Scale
/// checks use grid pairs `(x, a x)`, so each `a` should be a ratio of grid
/// points.
pub fn doa_check(tails: &TailData, alpha: f64, expected_ratio: f64, scales: &[f64], tol: f64) -> Result<DoAReport> {
    let pts = &tails.points;
    if pts.len() < 4 {
        return Err(Error::InsufficientRange(format!(
            "{} grid points, need at least 4",
            pts.len()
        )));
    }
    if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) || pts[0].0 <= 0.0 {
        return Err(Error::InvalidArgument("grid must be positive and increasing".into()));
    }
    let ratio = judge(
        "F(-x)/(1-F(x))".into(),
        expected_ratio,
        pts.iter().map(|p| (p.0, p.1 / p.2)).collect(),
        tol,
    )?;
    let mut right = Vec::new();
    let mut left = Vec::new();
    for &a in scales {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("scale {a} must be positive")));
        }
        let target = a.powf(-alpha);
        let pairs: Vec<_> =
            pts.iter().filter_map(|p| lookup(pts, a * p.0).map(|q| (p, q))).collect();
        right.push(judge(
            format!("(1-F({a}x))/(1-F(x))"),
            target,
            pairs.iter().map(|(p, q)| (p.0, q.2 / p.2)).collect(),
            tol,
        )?);
        left.push(judge(
            format!("F(-{a}x)/F(-x)"),
            target,
            pairs.iter().map(|(p, q)| (p.0, q.1 / p.1)).collect(),
            tol,
        )?);
    }
    let pass = ratio.pass && right.iter().all(|c| c.pass) && left.iter().all(|c| c.pass);
    Ok(DoAReport {
        alpha,
        tolerance: tol,
        ratio_left_right: ratio,
        scaling_right: right,
        scaling_left: left,
        pass,
    })
}
