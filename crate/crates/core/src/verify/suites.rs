//! The inequality suites and the runner over catalog and random models.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gen_random_ham, Case, RandomHamSpec, SuiteReport, SLACK_FLOOR};
use crate::asymptotics::{asymptotics_row, classify_trend, d_of, log_grid, preimage_measure, LevelSet, Transport, Verdict};
use crate::error::{Error, Result};
use crate::hamiltonian::{catalog, trace_reparameterize, HamiltonianModel};
use crate::intervals::Arc;
use crate::weyl::NevanlinnaSample;

const D_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    OffdiagBound,
    ArcBounds,
    SubintervalBound,
    WeylEstimates,
    RegularVariation,
}

impl SuiteName {
    pub const ALL: [SuiteName; 5] = [
        SuiteName::OffdiagBound,
        SuiteName::ArcBounds,
        SuiteName::SubintervalBound,
        SuiteName::WeylEstimates,
        SuiteName::RegularVariation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::OffdiagBound => "offdiag_bound",
            SuiteName::ArcBounds => "arc_bounds",
            SuiteName::SubintervalBound => "subinterval_bound",
            SuiteName::WeylEstimates => "weyl_estimates",
            SuiteName::RegularVariation => "regular_variation",
        }
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidModel(format!("unknown suite '{s}'")))
    }
}

fn require_normalized(h: &HamiltonianModel) -> Result<()> {
    if h.is_trace_normalized() {
        return Ok(());
    }
    let trace = h.eval(1.0)?.trace();
    Err(Error::NotTraceNormalized { t: 1.0, trace })
}

/// `c(gamma) = max{20, 6 / (1 - gamma)}`.
pub fn offdiag_constant(gamma: f64) -> f64 {
    (6.0 / (1.0 - gamma)).max(20.0)
}

/// `(1/t) lambda((0,t) ∩ sigma^{-1}([0, gamma])) <= c(gamma) d(H, t)`.
pub fn suite_offdiag_bound(h: &HamiltonianModel, gammas: &[f64], t_grid: &[f64]) -> Result<SuiteReport> {
    let start = Instant::now();
    require_normalized(h)?;
    let digest = h.digest();
    let mut cases = Vec::new();
    for &t in t_grid {
        let d = d_of(h, t, D_TOL)?.value;
        for &gamma in gammas {
            let m = preimage_measure(h, LevelSet::Sigma { gamma }, t, Transport::None)?;
            let lhs = m.value / t;
            cases.push(Case::new(
                &digest,
                format!("gamma={gamma} t={t:e}"),
                lhs,
                offdiag_constant(gamma) * d,
                SLACK_FLOOR,
            ));
        }
    }
    Ok(SuiteReport::from_cases("offdiag_bound", cases, start.elapsed()))
}

/// The three arc geometries bounding `d` from below by products of
/// normalised `zeta` preimage measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "geometry")]
pub enum ArcCase {
    /// `A[-phi0, phi0]` against `A[psi0, 2 pi - psi0]`, `0 <= phi0 < psi0 <= pi`.
    Opposite { phi0: f64, psi0: f64 },
    /// `A[0, pi - alpha]` against `A[pi, 2 pi - beta]`; mirrored:
    /// `A[pi + alpha, 2 pi]` against `A[beta, pi]`.
    Halves { alpha: f64, beta: f64, mirrored: bool },
    /// `A[beta, pi - alpha]` against `A[pi, 2 pi]`, `alpha + beta <= pi`;
    /// mirrored: `A[pi + alpha, 2 pi - beta]` against `A[0, pi]`.
    Wedge { alpha: f64, beta: f64, mirrored: bool },
}

impl ArcCase {
    /// The two arcs and the constant of the bound.
    pub fn arcs(&self) -> Result<(Arc, Arc, f64)> {
        let in_range = |x: f64| x > 0.0 && x <= PI;
        let sin2 = |x: f64| (x / 2.0).sin().powi(2);
        match *self {
            ArcCase::Opposite { phi0, psi0 } => {
                if !(0.0 <= phi0 && phi0 < psi0 && psi0 <= PI) {
                    return Err(Error::ArcGeometry(format!("need 0 <= phi0 < psi0 <= pi, got {phi0}, {psi0}")));
                }
                Ok((Arc::new(-phi0, phi0)?, Arc::new(psi0, TAU - psi0)?, sin2(psi0 - phi0)))
            }
            ArcCase::Halves { alpha, beta, mirrored } => {
                if !(in_range(alpha) && in_range(beta)) {
                    return Err(Error::ArcGeometry(format!("need alpha, beta in (0, pi], got {alpha}, {beta}")));
                }
                let k = sin2(alpha) * sin2(beta);
                if mirrored {
                    Ok((Arc::new(PI + alpha, TAU)?, Arc::new(beta, PI)?, k))
                } else {
                    Ok((Arc::new(0.0, PI - alpha)?, Arc::new(PI, TAU - beta)?, k))
                }
            }
            ArcCase::Wedge { alpha, beta, mirrored } => {
                if !(in_range(alpha) && in_range(beta) && alpha + beta <= PI) {
                    return Err(Error::ArcGeometry(format!(
                        "need alpha, beta in (0, pi] with alpha + beta <= pi, got {alpha}, {beta}"
                    )));
                }
                let k = sin2(alpha.min(beta));
                if mirrored {
                    Ok((Arc::new(PI + alpha, TAU - beta)?, Arc::new(0.0, PI)?, k))
                } else {
                    Ok((Arc::new(beta, PI - alpha)?, Arc::new(PI, TAU)?, k))
                }
            }
        }
    }
}

pub fn default_arc_cases() -> Vec<ArcCase> {
    vec![
        ArcCase::Opposite { phi0: PI / 4.0, psi0: 3.0 * PI / 4.0 },
        ArcCase::Opposite { phi0: 0.2, psi0: 1.2 },
        ArcCase::Opposite { phi0: 1.0, psi0: PI },
        ArcCase::Halves { alpha: PI / 4.0, beta: PI / 2.0, mirrored: false },
        ArcCase::Halves { alpha: PI / 3.0, beta: PI / 6.0, mirrored: true },
        ArcCase::Wedge { alpha: PI / 6.0, beta: PI / 4.0, mirrored: false },
        ArcCase::Wedge { alpha: PI / 4.0, beta: PI / 3.0, mirrored: true },
    ]
}

/// `d(H, t) >= k (1/t) lambda(I1 ∩ (0,t)) (1/t) lambda(I2 ∩ (0,t))`.
pub fn suite_arc_bounds(h: &HamiltonianModel, cases_in: &[ArcCase], t_grid: &[f64]) -> Result<SuiteReport> {
    let start = Instant::now();
    require_normalized(h)?;
    let digest = h.digest();
    let mut cases = Vec::new();
    for case in cases_in {
        let (a1, a2, k) = case.arcs()?;
        for &t in t_grid {
            let d = d_of(h, t, D_TOL)?.value;
            let l1 = preimage_measure(h, LevelSet::ZetaArc { arc: a1 }, t, Transport::None)?.value / t;
            let l2 = preimage_measure(h, LevelSet::ZetaArc { arc: a2 }, t, Transport::None)?.value / t;
            cases.push(Case::new(&digest, format!("{case:?} t={t:e}"), k * l1 * l2, d, SLACK_FLOOR));
        }
    }
    Ok(SuiteReport::from_cases("arc_bounds", cases, start.elapsed()))
}

/// `d(H, t) >= det M(H 1_I, t) / t^2` for `I = (a t, b t)` with the given
/// fractions `(a, b)`; `a >= b` encodes the empty set.
pub fn suite_subinterval_bound(h: &HamiltonianModel, fractions: &[(f64, f64)], t_grid: &[f64]) -> Result<SuiteReport> {
    let start = Instant::now();
    require_normalized(h)?;
    let digest = h.digest();
    let mut cases = Vec::new();
    for &t in t_grid {
        let d = d_of(h, t, D_TOL)?.value;
        for &(fa, fb) in fractions {
            let lhs = if fa >= fb {
                0.0
            } else {
                let lo = (fa * t).min(t);
                let hi = (fb * t).min(t);
                let m = h.primitive(hi)?.since(&h.primitive(lo)?);
                (m.det() / (t * t)).max(0.0)
            };
            cases.push(Case::new(&digest, format!("I=({fa}t, {fb}t) t={t:e}"), lhs, d, SLACK_FLOOR));
        }
    }
    Ok(SuiteReport::from_cases("subinterval_bound", cases, start.elapsed()))
}

/// The explicit constants of the Weyl coefficient estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylConstants {
    /// `A/c <= |q| <= c A`.
    pub abs_band: f64,
    /// `L/c <= Im q`.
    pub im_lower: f64,
    /// `Im q <= c A`.
    pub im_upper: f64,
    /// `d(H, t_hat)/c <= Im q / |q|`.
    pub chain: f64,
}

impl Default for WeylConstants {
    fn default() -> Self {
        WeylConstants {
            abs_band: 44.0,
            im_lower: 64.0,
            im_upper: 79.0 / 2.0,
            chain: 2816.0,
        }
    }
}

fn sample_or_best(r: Result<NevanlinnaSample>) -> Result<NevanlinnaSample> {
    match r {
        Ok(s) => Ok(s),
        Err(Error::NoConvergence(best)) => Ok(*best),
        Err(e) => Err(e),
    }
}

/// Four two-sided estimates of `|q(ir)|`, `Im q(ir)` by `A`, `L`, and the
/// lower bound of `Im q / |q|` by `d(H, t_hat(r))`, per `r`.
pub fn suite_weyl_estimates(
    h: &HamiltonianModel,
    r_grid: &[f64],
    tol: f64,
    k: &WeylConstants,
) -> Result<SuiteReport> {
    let start = Instant::now();
    let digest = h.digest();
    let rows = r_grid
        .par_iter()
        .map(|&r| {
            let out = asymptotics_row(h, r, tol);
            match out {
                Ok((row, s)) => Ok((row, s)),
                Err(Error::NoConvergence(best)) => {
                    let mut row = crate::asymptotics::A_L(h, r, tol)?;
                    let s = sample_or_best(Err(Error::NoConvergence(best)))?;
                    row.q_abs = Some(s.q.norm());
                    row.q_im = Some(s.q.im);
                    row.ratio = Some(s.q.im / s.q.norm());
                    row.q_err = Some(s.err);
                    Ok((row, s))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cases = Vec::new();
    for (row, s) in rows {
        let r = row.r;
        let abs = s.q.norm();
        let im = s.q.im;
        let tol_q = SLACK_FLOOR + s.err;
        let ratio = if abs.is_finite() && abs > 0.0 { im / abs } else { 0.0 };
        let tol_ratio = SLACK_FLOOR + 2.0 * s.err / abs.max(f64::MIN_POSITIVE);
        let label = |what: &str| format!("{what} r={r:e}");
        cases.push(Case::new(&digest, label("A/c <= |q|"), row.a / k.abs_band, abs, tol_q));
        cases.push(Case::new(&digest, label("|q| <= cA"), abs, k.abs_band * row.a, tol_q));
        cases.push(Case::new(&digest, label("L/c <= Im q"), row.l / k.im_lower, im, tol_q));
        cases.push(Case::new(&digest, label("Im q <= cA"), im, k.im_upper * row.a, tol_q));
        cases.push(Case::new(&digest, label("d/c <= Im q/|q|"), row.d_at_t_hat / k.chain, ratio, tol_ratio));
    }
    Ok(SuiteReport::from_cases("weyl_estimates", cases, start.elapsed()))
}

/// `1 - (sqrt(rho1 rho2) / ((rho1 + rho2)/2))^2`.
pub fn regular_variation_bound(rho1: f64, rho2: f64) -> f64 {
    let g = (rho1 * rho2).sqrt() / (0.5 * (rho1 + rho2));
    1.0 - g * g
}

/// Equality of `min d` with the bound on the singular power family, and the
/// decay of `d` for the equal-index power-log family.
pub fn suite_regular_variation(rho_pairs: &[(f64, f64)]) -> Result<SuiteReport> {
    let start = Instant::now();
    let grid = log_grid(1e-1, 1e-8, 29);
    let mut cases = Vec::new();
    for &(r1, r2) in rho_pairs {
        let h = HamiltonianModel::singular_power(r1, r2)?;
        let digest = h.digest();
        let bound = regular_variation_bound(r1, r2);
        let min_d = grid
            .iter()
            .map(|&t| d_of(&h, t, D_TOL).map(|d| d.value))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        cases.push(Case::new(&digest, format!("bound <= min d rho=({r1}, {r2})"), bound, min_d, SLACK_FLOOR));
        cases.push(Case::new(&digest, format!("min d <= bound rho=({r1}, {r2})"), min_d, bound, SLACK_FLOOR));
    }
    let pl = HamiltonianModel::power_log([1.0, 1.0], [2.0, 0.0])?;
    let digest = pl.digest();
    let d3 = d_of(&pl, 1e-3, D_TOL)?.value;
    let d6 = d_of(&pl, 1e-6, D_TOL)?.value;
    cases.push(Case::new(&digest, "d(1e-6) <= d(1e-3)/2".into(), d6, 0.5 * d3, 0.0));
    let values = grid
        .iter()
        .map(|&t| d_of(&pl, t, D_TOL).map(|d| d.value))
        .collect::<Result<Vec<_>>>()?;
    let (verdict, _) = classify_trend(&grid, &values);
    let to_zero = if verdict == Verdict::TendsToZero { 1.0 } else { 0.0 };
    cases.push(Case::new(&digest, format!("trend of d is {verdict:?}"), 1.0, to_zero, 0.0));
    Ok(SuiteReport::from_cases("regular_variation", cases, start.elapsed()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub suites: Vec<SuiteName>,
    pub n_random: usize,
    /// Random models use seeds `first_seed .. first_seed + n_random`.
    pub first_seed: u64,
    pub tol: f64,
    pub constants: WeylConstants,
    pub gammas: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub arc_cases: Vec<ArcCase>,
    pub fractions: Vec<(f64, f64)>,
    pub catalog_r: Vec<f64>,
    pub random_r: Vec<f64>,
    pub rho_pairs: Vec<(f64, f64)>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            suites: SuiteName::ALL.to_vec(),
            n_random: 100,
            first_seed: 1,
            tol: 1e-6,
            constants: WeylConstants::default(),
            gammas: vec![0.25, 0.5, 0.9],
            t_grid: log_grid(1e-4, 1.0, 8),
            arc_cases: default_arc_cases(),
            fractions: vec![(0.0, 1.0), (0.25, 0.75), (0.5, 2.0), (1.0, 1.0)],
            catalog_r: log_grid(1.0, 1e4, 21),
            random_r: log_grid(1.0, 1e4, 5),
            rho_pairs: vec![(1.0, 3.0), (2.0, 2.0), (0.5, 2.0), (1.0, 1.5)],
        }
    }
}

/// Catalog sweep families followed by the random models.
pub fn check_models(cfg: &CheckConfig) -> Vec<(String, HamiltonianModel, bool)> {
    let mut out: Vec<(String, HamiltonianModel, bool)> = catalog::sweep_families()
        .into_iter()
        .map(|(n, h)| (n.to_string(), h, false))
        .collect();
    for k in 0..cfg.n_random as u64 {
        let seed = cfg.first_seed + k;
        out.push((format!("random seed={seed}"), gen_random_ham(&RandomHamSpec::new(seed)), true));
    }
    out
}

fn for_models<F>(name: &str, models: &[(String, HamiltonianModel, bool)], f: F) -> Result<SuiteReport>
where
    F: Fn(&HamiltonianModel, bool) -> Result<SuiteReport> + Sync,
{
    let parts = models
        .par_iter()
        .map(|(_, h, random)| f(h, *random))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::merge(name, parts))
}

/// Run the selected suites; one report per suite.
pub fn run_check(cfg: &CheckConfig) -> Result<Vec<SuiteReport>> {
    let models = check_models(cfg);
    let normalized = models
        .iter()
        .map(|(n, h, r)| Ok((n.clone(), trace_reparameterize(h)?, *r)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for suite in &cfg.suites {
        let report = match suite {
            SuiteName::OffdiagBound => for_models(suite.as_str(), &normalized, |h, _| {
                suite_offdiag_bound(h, &cfg.gammas, &cfg.t_grid)
            })?,
            SuiteName::ArcBounds => for_models(suite.as_str(), &normalized, |h, _| {
                suite_arc_bounds(h, &cfg.arc_cases, &cfg.t_grid)
            })?,
            SuiteName::SubintervalBound => for_models(suite.as_str(), &normalized, |h, _| {
                suite_subinterval_bound(h, &cfg.fractions, &cfg.t_grid)
            })?,
            SuiteName::WeylEstimates => for_models(suite.as_str(), &models, |h, random| {
                let grid = if random { &cfg.random_r } else { &cfg.catalog_r };
                suite_weyl_estimates(h, grid, cfg.tol, &cfg.constants)
            })?,
            SuiteName::RegularVariation => suite_regular_variation(&cfg.rho_pairs)?,
        };
        out.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
