use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use weylcoef_core::asymptotics::{
    asymptotics_row, check_condition_ii, check_condition_iii, check_condition_iv, default_gammas, default_pairs,
    default_t_grid, log_grid, probe_sequences, A_L, AsymptoticsRow, TermSeries,
};
use weylcoef_core::hamiltonian::catalog::{self, CATALOG};
use weylcoef_core::verify::{run_check, CheckConfig, SuiteName, WeylConstants, SLACK_FLOOR};
use weylcoef_core::weyl::{weyl_coefficient, NevanlinnaSample};
use weylcoef_core::{Error, HamiltonianModel};

use crate::table::{Format, Table};
use crate::{Common, Failure};

const DEFAULT_GRID: &str = "log:1:10000:9";

/// Parse `log:start:stop:count` into a strictly monotone grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Model(format!("grid must be log:start:stop:count with positive ends, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    let [kind, a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    if *kind != "log" {
        return Err(bad());
    }
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    if n >= 2 && a == b {
        return Err(Failure::Model(format!("grid '{text}' is not strictly monotone")));
    }
    Ok(log_grid(a, b, n))
}

pub fn load_model(c: &Common) -> Result<HamiltonianModel, Failure> {
    let path = Path::new(&c.model);
    if c.model.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Model(format!("cannot read {}: {e}", path.display())))?;
        return HamiltonianModel::from_json(&text).map_err(|e| Failure::Model(e.to_string()));
    }
    catalog::build(&c.model, &c.params).map_err(|e| Failure::Model(e.to_string()))
}

fn grid_or(c: &Common, default: &str) -> Result<Vec<f64>, Failure> {
    parse_grid(c.grid.as_deref().unwrap_or(default))
}

/// `q(iy)`, falling back to the best sample when the disc stalls.
fn sample(h: &HamiltonianModel, y: f64, tol: f64) -> Result<(NevanlinnaSample, bool), Error> {
    match weyl_coefficient(h, Complex64::new(0.0, y), tol) {
        Ok(s) => Ok((s, true)),
        Err(Error::NoConvergence(best)) => Ok((*best, false)),
        Err(Error::StepFailure { .. }) => Ok((failed_sample(y), false)),
        Err(e) => Err(e),
    }
}

/// Row placeholder when the propagation broke down before any disc was usable.
fn failed_sample(y: f64) -> NevanlinnaSample {
    NevanlinnaSample {
        z: Complex64::new(0.0, y),
        q: Complex64::new(f64::NAN, f64::NAN),
        err: f64::INFINITY,
        t_used: f64::NAN,
    }
}

fn is_inf(s: &NevanlinnaSample) -> bool {
    s.q.re.is_infinite() || s.q.im.is_infinite()
}

fn ratio(q: Complex64) -> f64 {
    if q.re.is_nan() || q.im.is_nan() {
        f64::NAN
    } else if q.re.is_finite() && q.im.is_finite() {
        q.im / q.norm()
    } else {
        0.0
    }
}

fn emit(t: &Table, c: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    t.write(c.format, out)?;
    Ok(())
}

fn stalled(n: usize) -> Result<(), Failure> {
    if n == 0 {
        Ok(())
    } else {
        Err(Failure::Convergence(format!("{n} grid point(s) did not converge; see the converged column")))
    }
}

pub fn cmd_q(c: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    let h = load_model(c)?;
    let grid = grid_or(c, DEFAULT_GRID)?;
    let samples = grid
        .par_iter()
        .map(|&y| sample(&h, y, c.tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["y", "re_q", "im_q", "abs_q", "ratio", "err", "T_used", "inf", "converged"]);
    for (&y, (s, ok)) in grid.iter().zip(&samples) {
        let inf = is_inf(s);
        let (re, im, abs) = if inf {
            (f64::INFINITY, f64::INFINITY, f64::INFINITY)
        } else {
            (s.q.re, s.q.im, s.q.norm())
        };
        t.push(vec![
            y.into(),
            re.into(),
            im.into(),
            abs.into(),
            ratio(s.q).into(),
            s.err.into(),
            s.t_used.into(),
            inf.into(),
            (*ok).into(),
        ]);
    }
    emit(&t, c, out)?;
    stalled(samples.iter().filter(|(_, ok)| !ok).count())
}

fn constants(c: &Common) -> WeylConstants {
    let mut k = WeylConstants::default();
    if let Some(v) = c.abs_band_constant {
        k.abs_band = v;
    }
    k
}

pub fn cmd_asym(c: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    let h = load_model(c)?;
    let grid = grid_or(c, DEFAULT_GRID)?;
    let k = constants(c);
    let rows = grid
        .par_iter()
        .map(|&r| -> Result<(AsymptoticsRow, NevanlinnaSample, bool), Error> {
            match asymptotics_row(&h, r, c.tol) {
                Ok((row, s)) => Ok((row, s, true)),
                Err(Error::NoConvergence(best)) => Ok((A_L(&h, r, c.tol)?, *best, false)),
                Err(Error::StepFailure { .. }) => Ok((A_L(&h, r, c.tol)?, failed_sample(r), false)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&[
        "r",
        "t_hat",
        "A",
        "L",
        "d",
        "abs_q",
        "im_q",
        "ratio",
        "err",
        "slack_abs_lower",
        "slack_abs_upper",
        "slack_im_lower",
        "slack_im_upper",
        "slack_ratio_lower",
        "inf",
        "converged",
    ]);
    for (row, s, ok) in &rows {
        let inf = is_inf(s);
        let (abs, im) = if inf { (f64::INFINITY, f64::INFINITY) } else { (s.q.norm(), s.q.im) };
        let q_ratio = ratio(s.q);
        t.push(vec![
            row.r.into(),
            row.t_hat.into(),
            row.a.into(),
            row.l.into(),
            row.d_at_t_hat.into(),
            abs.into(),
            im.into(),
            q_ratio.into(),
            s.err.into(),
            (abs - row.a / k.abs_band).into(),
            (k.abs_band * row.a - abs).into(),
            (im - row.l / k.im_lower).into(),
            (k.im_upper * row.a - im).into(),
            (q_ratio - row.d_at_t_hat / k.chain).into(),
            inf.into(),
            (*ok).into(),
        ]);
    }
    emit(&t, c, out)?;
    stalled(rows.iter().filter(|(_, _, ok)| !ok).count())
}

fn series_rows(t: &mut Table, condition: &str, series: &[TermSeries]) {
    for s in series {
        for (x, v) in s.points.iter().zip(&s.values) {
            t.push(vec![
                condition.into(),
                s.term.clone().into(),
                s.along.clone().into(),
                (*x).into(),
                (*v).into(),
                format!("{:?}", s.verdict).into(),
            ]);
        }
    }
}

pub fn cmd_conditions(c: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    let h = load_model(c)?;
    let t_grid = match &c.grid {
        Some(g) => parse_grid(g)?,
        None => default_t_grid(),
    };
    let gammas = default_gammas();
    let pairs = default_pairs(&h);
    let mut sequences = probe_sequences(&h);
    if sequences.is_empty() {
        sequences.push(("grid".to_string(), t_grid.clone()));
    }
    // frak_t_s(1) = 2, so T = 2 covers x in (0, s)
    let window = 2.0;
    let ii = check_condition_ii(&h, &t_grid, c.tol.min(1e-10))?;
    let iii = check_condition_iii(&h, window, &gammas, &pairs, &sequences)?;
    let iv = check_condition_iv(&h, &gammas, &pairs, &sequences);
    let precondition = match &iv {
        Err(e @ Error::NotTraceNormalized { .. }) => Some(e.to_string()),
        Err(e) => return Err(e.clone().into()),
        Ok(_) => None,
    };
    match c.format {
        Format::Json => {
            let iv_json = match &iv {
                Ok(r) => {
                    let along: serde_json::Map<String, serde_json::Value> = sequences
                        .iter()
                        .map(|(n, _)| (n.clone(), json!(r.holds_along(n))))
                        .collect();
                    json!({"report": r, "holds_along": along})
                }
                Err(e) => json!({"error": e.to_string()}),
            };
            let report = json!({
                "model": c.model,
                "t_grid": t_grid,
                "gammas": gammas,
                "pairs": pairs,
                "window": window,
                "sequences": sequences.iter().map(|(n, v)| json!({"name": n, "points": v})).collect::<Vec<_>>(),
                "ii": ii,
                "iii": iii,
                "iv": iv_json,
            });
            serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| Failure::Model(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut t = Table::new(&["condition", "term", "along", "x", "value", "verdict"]);
            for d in &ii.values {
                t.push(vec![
                    "ii".into(),
                    "d".into(),
                    "t_grid".into(),
                    d.t.into(),
                    d.value.into(),
                    format!("{:?}", ii.lim_verdict).into(),
                ]);
            }
            series_rows(&mut t, "iii", &iii.series);
            if let Ok(r) = &iv {
                series_rows(&mut t, "iv", &r.series);
            }
            emit(&t, c, out)?;
        }
    }
    match precondition {
        Some(msg) => Err(Failure::Precondition(msg)),
        None => Ok(()),
    }
}

pub fn cmd_check(c: &Common, suites: &[SuiteName], n_random: usize, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = CheckConfig {
        suites: if suites.is_empty() { SuiteName::ALL.to_vec() } else { suites.to_vec() },
        n_random,
        first_seed: c.seed.unwrap_or(1),
        tol: c.tol,
        constants: constants(c),
        ..CheckConfig::default()
    };
    let reports = run_check(&cfg)?;
    match c.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &reports).map_err(|e| Failure::Model(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut t = Table::new(&["suite", "model", "label", "lhs", "rhs", "slack", "tol", "pass"]);
            for r in &reports {
                for case in &r.cases {
                    t.push(vec![
                        r.suite.clone().into(),
                        case.model.clone().into(),
                        case.label.clone().into(),
                        case.lhs.into(),
                        case.rhs.into(),
                        case.slack.into(),
                        case.tol.into(),
                        case.pass.into(),
                    ]);
                }
            }
            emit(&t, c, out)?;
        }
    }
    for r in &reports {
        eprintln!(
            "{}: {} (min slack {:e}, {} cases)",
            r.suite,
            if r.pass { "pass" } else { "FAIL" },
            r.min_slack,
            r.cases.len()
        );
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.suite.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Suite(format!(
            "suites failed beyond the slack floor {SLACK_FLOOR:e}: {}",
            failed.join(", ")
        )))
    }
}

pub fn cmd_catalog(c: &Common, out: &mut dyn Write) -> Result<(), Failure> {
    let mut t = Table::new(&["name", "params", "description", "json"]);
    for e in CATALOG {
        t.push(vec![e.name.into(), e.params.into(), e.description.into(), e.json.into()]);
    }
    emit(&t, c, out)
}
