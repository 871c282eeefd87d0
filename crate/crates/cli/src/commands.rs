use std::f64::consts::PI;
use std::fmt::Write as _;

use serde_json::{json, Value};

use recwalk::counterexample::{
    classify_named, compare_methods, shifted_green_sum, trichotomy, GreenCurve, GreenMethod, GreenOptions,
};
use recwalk::return_laws::cache::load_or_compute_nu;
use recwalk::return_laws::{extrapolate_limit, first_return_law, kesten_fit, tail_functional};
use recwalk::space::NamedPoints;
use recwalk::stable::{
    doa_check, lll_error, lower_bound_check, self_convolve_schedule, ErrorCurveRow, StableTarget, TailData,
    DOA_TOLERANCE,
};
use recwalk::weight::format_q;
use recwalk::Exec;

use crate::output::{config, csv_header, dec, json_document};
use crate::{Common, Failure, Format, Outcome, EXIT_CONTRADICTION, EXIT_NUMERICAL, EXIT_PASS};

fn exec(c: &Common) -> Exec {
    if c.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn positive(name: &str, v: u64) -> Result<u64, Failure> {
    if v == 0 {
        Err(Failure::Usage(format!("--{name} must be positive")))
    } else {
        Ok(v)
    }
}

fn even_at_least_two(name: &str, v: u64) -> Result<u64, Failure> {
    if v < 2 || v % 2 == 1 {
        Err(Failure::Usage(format!("--{name} must be even and at least 2, got {v}")))
    } else {
        Ok(v)
    }
}

const SLOPE_BAND: (f64, f64) = (-1.55, -1.45);

pub fn return_law(c: &Common) -> Result<Outcome, Failure> {
    let n_max = even_at_least_two("n-max", c.n_max.unwrap_or(1000))?;
    let (lo, hi) = (100.min(n_max), 1000.min(n_max));
    let cfg = config(
        "return-law",
        &[("n_max", json!(n_max)), ("fit_lo", json!(lo)), ("fit_hi", json!(hi))],
    );
    let law = first_return_law(n_max)?;
    let fit = kesten_fit(&law, lo, hi);
    let (status, mut messages) = match &fit {
        Ok(f) if f.slope >= SLOPE_BAND.0 && f.slope <= SLOPE_BAND.1 => (EXIT_PASS, vec![]),
        Ok(f) => (EXIT_NUMERICAL, vec![format!("slope {} outside {:?}", f.slope, SLOPE_BAND)]),
        Err(e) => (EXIT_NUMERICAL, vec![format!("fit failed: {e}")]),
    };
    messages.push(format!("tail mass P(R1 > {n_max}) = {:e}", law.tail_mass()));
    let text = match c.format {
        Format::Csv => {
            let mut s = csv_header(&cfg);
            s.push_str("n,probability,n_three_halves_probability\n");
            for (n, p) in law.iter() {
                let _ = writeln!(s, "{n},{},{}", dec(p), dec((n as f64).powf(1.5) * p));
            }
            match &fit {
                Ok(f) => {
                    let _ = writeln!(s, "# fit: slope={} tau_hat={} points={}", dec(f.slope), dec(f.tau_hat), f.points);
                }
                Err(e) => {
                    let _ = writeln!(s, "# fit: failed ({e})");
                }
            }
            let _ = writeln!(s, "# tail_mass={}", dec(law.tail_mass()));
            s
        }
        Format::Json => {
            let rows: Vec<Value> = law
                .iter()
                .map(|(n, p)| {
                    let mut r = json!({"n": n, "probability": p, "n_three_halves_probability": (n as f64).powf(1.5) * p});
                    if let Some(q) = law.exact(n) {
                        r["exact"] = json!(format_q(&q));
                    }
                    r
                })
                .collect();
            let fit_json = match &fit {
                Ok(f) => json!(f),
                Err(e) => json!({"error": e.to_string()}),
            };
            json_document(&cfg, json!({"rows": rows, "fit": fit_json, "tail_mass": law.tail_mass(), "pass": status == EXIT_PASS}))
        }
    };
    Ok(Outcome { text, status, messages })
}

pub fn lll(c: &Common) -> Result<Outcome, Failure> {
    let l_max = even_at_least_two("l-max", c.l_max.unwrap_or(2000))?;
    let k_max = even_at_least_two("k-max", c.k_max.unwrap_or(l_max * l_max))?;
    let schedule = c.schedule.clone().unwrap_or_else(|| vec![8, 16, 32, 64]);
    if schedule.is_empty() || schedule.contains(&0) {
        return Err(Failure::Usage("--schedule must list positive integers".into()));
    }
    let cfg = config(
        "lll",
        &[
            ("l_max", json!(l_max)),
            ("k_max", json!(k_max)),
            ("schedule", json!(schedule)),
            ("lower_bound_a", json!(0.5)),
            ("lower_bound_n0", json!(16)),
        ],
    );
    let ex = exec(c);
    let (nu, hit) = load_or_compute_nu(c.cache_dir.as_deref(), l_max, k_max, ex)?;
    let mut messages = vec![if hit {
        "nu: loaded from cache".to_string()
    } else {
        "nu: computed".to_string()
    }];

    // Tail constant from m·F̃(m) at l_max/20, l_max/10, l_max/5.
    let ms: Vec<u64> = [20u64, 10, 5].iter().map(|d| (l_max / d).max(2)).collect();
    let mut tail_pts = Vec::new();
    for &m in &ms {
        tail_pts.push((m, tail_functional(&nu, m)?.value));
    }
    let sigma = extrapolate_limit(&tail_pts)?;
    let gamma = PI * sigma;
    let target = StableTarget::cauchy(gamma)?;

    let grid: Vec<u64> = std::iter::successors(Some((l_max / 80).max(2)), |m| Some(m * 2))
        .take_while(|m| *m <= l_max / 5)
        .collect();
    let mut tails = Vec::new();
    for &m in &grid {
        let t = tail_functional(&nu, m)?;
        tails.push((m as f64, t.f_tilde, t.f_tilde));
    }
    let doa = doa_check(&TailData { points: tails }, 1.0, 1.0, &[2.0], DOA_TOLERANCE);

    let d = nu.to_dist();
    let point_leak = nu.prob(l_max as i64) + nu.error_bound();
    let pows = self_convolve_schedule(&d, &schedule, 0.0, ex)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (&n, p) in schedule.iter().zip(&pows) {
        let e = lll_error(p, &target, n, n as f64 * point_leak)?;
        if e.truncation_warning {
            warnings.push(format!(
                "n = {n}: truncation could move the sup by {:e} (sup {:e})",
                e.truncation_effect, e.sup_error
            ));
        }
        rows.push(ErrorCurveRow {
            n,
            sup_error: e.sup_error,
            argmax_k: e.argmax,
            n_times_p0: n as f64 * p.get(&0),
        });
    }
    messages.extend(warnings.iter().cloned());
    let decreasing = rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    let p0: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.n_times_p0 / r.n as f64)).collect();
    let lower = lower_bound_check(&p0, 0.5, 16).ok();
    let lower_pass = lower.as_ref().is_none_or(|l| l.pass);
    let doa_pass = doa.as_ref().map(|r| r.pass).unwrap_or(false);
    let status = if decreasing && lower_pass { EXIT_PASS } else { EXIT_NUMERICAL };
    if !decreasing {
        messages.push("sup error is not strictly decreasing along the schedule".into());
    }

    let text = match c.format {
        Format::Csv => {
            let mut s = csv_header(&cfg);
            let _ = writeln!(s, "# sigma_hat={} gamma={}", dec(sigma), dec(gamma));
            for (m, v) in &tail_pts {
                let _ = writeln!(s, "# m_times_tail m={m} value={}", dec(*v));
            }
            let _ = writeln!(s, "# doa_pass={doa_pass}");
            if let Some(l) = &lower {
                let _ = writeln!(s, "# lower_bound a={} n0={} pass={} limit_estimate={}", l.a_const, l.n0, l.pass, dec(l.limit_estimate));
            }
            for w in &warnings {
                let _ = writeln!(s, "# warning: {w}");
            }
            s.push_str(&recwalk::stable::error_curve_csv(&rows));
            s
        }
        Format::Json => json_document(
            &cfg,
            json!({
                "sigma_hat": sigma,
                "gamma": gamma,
                "tail_points": tail_pts,
                "doa": doa.as_ref().ok(),
                "rows": rows,
                "lower_bound": lower,
                "warnings": warnings,
                "decreasing": decreasing,
                "pass": status == EXIT_PASS,
            }),
        ),
    };
    Ok(Outcome { text, status, messages })
}

pub fn classify(c: &Common) -> Result<Outcome, Failure> {
    let horizon = positive("horizon", c.horizon.unwrap_or(10_000))?;
    let samples = positive("samples", c.samples.unwrap_or(100_000))?;
    let points = NamedPoints::default();
    let cfg = config(
        "classify",
        &[
            ("seed", json!(c.seed)),
            ("samples", json!(samples)),
            ("horizon", json!(horizon)),
            ("offset", json!(points.offset)),
        ],
    );
    let reports = classify_named(points, horizon, samples, c.seed, exec(c))?;
    let contradiction = reports.iter().any(|r| r.contradiction);
    let all_three = trichotomy(&reports);
    let status = if contradiction {
        EXIT_CONTRADICTION
    } else if all_three {
        EXIT_PASS
    } else {
        EXIT_NUMERICAL
    };
    let mut messages = Vec::new();
    for r in reports.iter().filter(|r| r.contradiction) {
        messages.push(format!("{}: Monte Carlo contradicts the exact value (z = {:?})", r.point, r.z_score));
    }
    let text = match c.format {
        Format::Json => json_document(&cfg, json!({"reports": reports, "trichotomy": all_three})),
        Format::Csv => {
            let mut s = csv_header(&cfg);
            s.push_str("point,state,verdict,p_recurrent,p_escape,mc_estimate,ci_lo,ci_hi,wide_ci\n");
            for r in &reports {
                let _ = writeln!(
                    s,
                    "{},{},{:?},{},{},{},{},{},{}",
                    r.point,
                    r.state.replace(',', ";"),
                    r.verdict,
                    r.p_recurrent,
                    r.p_escape,
                    dec(r.mc.estimate),
                    dec(r.mc.ci_lo),
                    dec(r.mc.ci_hi),
                    r.wide_ci
                );
            }
            let _ = writeln!(s, "# trichotomy={all_three}");
            s
        }
    };
    Ok(Outcome { text, status, messages })
}

/// Horizons written to the green curve: 1, 2, 5 per decade plus the schedule.
fn curve_points(n_max: u64, schedule: &[u64]) -> Vec<u64> {
    let mut pts: Vec<u64> = std::iter::successors(Some(1u64), |x| x.checked_mul(10))
        .take_while(|x| *x <= n_max)
        .flat_map(|d| [d, 2 * d, 5 * d])
        .filter(|x| *x <= n_max)
        .chain(schedule.iter().copied().filter(|x| *x <= n_max))
        .chain([n_max])
        .collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

pub fn green(c: &Common) -> Result<Outcome, Failure> {
    let schedule = c.schedule.clone().unwrap_or_else(|| vec![100, 1000, 10_000]);
    if schedule.is_empty() || schedule.contains(&0) {
        return Err(Failure::Usage("--schedule must list positive integers".into()));
    }
    let n_max = positive("n-max", c.n_max.unwrap_or(*schedule.iter().max().expect("nonempty")))?;
    let samples = positive("samples", c.samples.unwrap_or(10_000))?;
    let cfg = config(
        "green",
        &[
            ("seed", json!(c.seed)),
            ("samples", json!(samples)),
            ("n_max", json!(n_max)),
            ("schedule", json!(schedule)),
        ],
    );
    let pts = curve_points(n_max, &schedule);
    let opts = GreenOptions {
        eta_seed: None,
        checkpoints: Some(pts.clone()),
    };
    let ex = exec(c);
    let aux = shifted_green_sum(n_max, samples, c.seed, GreenMethod::Auxiliary, &opts, ex)?;
    let direct = shifted_green_sum(n_max, samples, c.seed, GreenMethod::Direct, &opts, ex)?;
    let mut messages = Vec::new();
    for curve in [&aux, &direct] {
        if curve.exhausted_fraction() > 0.01 {
            messages.push(format!(
                "warning: {} of {} {} trajectories stopped before {} returns",
                curve.exhausted,
                curve.nsamples,
                curve.method.name(),
                n_max
            ));
        }
    }
    let sched: Vec<u64> = {
        let mut s: Vec<u64> = schedule.iter().copied().filter(|n| *n <= n_max).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let growth = growth_summary(&aux, &direct, &sched);
    let nondecreasing = aux.partial_sums.windows(2).all(|w| w[1] >= w[0])
        && direct.partial_sums.windows(2).all(|w| w[1] >= w[0]);
    let status = if nondecreasing && growth.iter().all(|g| g.aux_in_band) {
        EXIT_PASS
    } else {
        EXIT_NUMERICAL
    };
    let cross: Vec<_> = pts.iter().filter_map(|&n| compare_methods(&aux, &direct, n).ok()).collect();
    if let Some(x) = cross.iter().rev().find(|x| x.n <= 1000) {
        if !x.agree {
            messages.push(format!(
                "auxiliary and direct curves differ at N = {} by {:.1} joint standard errors",
                x.n, x.sigmas
            ));
        }
    }
    let text = match c.format {
        Format::Csv => {
            let mut s = csv_header(&cfg);
            s.push_str("n,auxiliary,auxiliary_stderr,direct,direct_stderr,difference,joint_stderr,sigmas\n");
            for x in &cross {
                let a = aux.checkpoint(x.n).expect("checkpoint");
                let d = direct.checkpoint(x.n).expect("checkpoint");
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    x.n,
                    dec(a.value),
                    dec(a.stderr),
                    dec(d.value),
                    dec(d.stderr),
                    dec(x.difference),
                    dec(x.joint_stderr),
                    dec(x.sigmas)
                );
            }
            for g in &growth {
                let _ = writeln!(
                    s,
                    "# growth {}->{}: auxiliary_ratio={} direct_ratio={} auxiliary_in_band={}",
                    g.from,
                    g.to,
                    dec(g.aux_ratio),
                    dec(g.direct_ratio),
                    g.aux_in_band
                );
            }
            let _ = writeln!(s, "# exhausted: auxiliary={} direct={}", aux.exhausted, direct.exhausted);
            s
        }
        Format::Json => json_document(
            &cfg,
            json!({
                "auxiliary": aux.checkpoints,
                "direct": direct.checkpoints,
                "cross_method": cross,
                "growth": growth.iter().map(|g| json!({
                    "from": g.from, "to": g.to, "auxiliary_ratio": g.aux_ratio,
                    "direct_ratio": g.direct_ratio, "auxiliary_in_band": g.aux_in_band,
                })).collect::<Vec<_>>(),
                "exhausted": {"auxiliary": aux.exhausted, "direct": direct.exhausted},
                "pass": status == EXIT_PASS,
            }),
        ),
    };
    Ok(Outcome { text, status, messages })
}

struct Growth {
    from: u64,
    to: u64,
    aux_ratio: f64,
    direct_ratio: f64,
    aux_in_band: bool,
}

const GROWTH_BAND: (f64, f64) = (1.3, 2.7);

fn growth_summary(aux: &GreenCurve, direct: &GreenCurve, sched: &[u64]) -> Vec<Growth> {
    sched
        .windows(2)
        .map(|w| {
            let ratio = |c: &GreenCurve| c.at(w[1]).unwrap_or(f64::NAN) / c.at(w[0]).unwrap_or(f64::NAN);
            let aux_ratio = ratio(aux);
            Growth {
                from: w[0],
                to: w[1],
                aux_ratio,
                direct_ratio: ratio(direct),
                aux_in_band: aux_ratio >= GROWTH_BAND.0 && aux_ratio <= GROWTH_BAND.1,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::curve_points;

    #[test]
    fn curve_points_are_log_spaced_with_schedule() {
        assert_eq!(curve_points(100, &[30]), vec![1, 2, 5, 10, 20, 30, 50, 100]);
        assert_eq!(curve_points(7, &[100]), vec![1, 2, 5, 7]);
    }
}
