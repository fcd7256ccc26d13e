//! Lebesgue measure of preimages of level sets of `sigma`, `pi`, `pi_{H,s}`
//! and `zeta`, optionally transported by `frak_t_s`.

use serde::{Deserialize, Serialize};

use super::{frak_t, frak_t_inv, ScalarRep};
use crate::error::{Error, Result};
use crate::hamiltonian::{Entries, HamiltonianModel, MonotoneMap};
use crate::intervals::{Arc, Interval, IntervalSet};

/// Sample count of the sampled path; the check run uses twice as many.
pub const SAMPLES: usize = 1 << 16;
/// Relative disagreement between the two sample counts flagged as unstable.
pub const UNSTABLE_REL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "quantity")]
pub enum LevelSet {
    /// `sigma^{-1}([0, gamma])`.
    Sigma { gamma: f64 },
    /// `pi^{-1}(I)`.
    Pi { interval: Interval },
    /// `pi_{H,s}^{-1}(I)`.
    PiWeighted { interval: Interval, s: f64 },
    /// `zeta^{-1}(arc)`.
    ZetaArc { arc: Arc },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    None,
    /// Measure of `frak_t_s((1/s) E)` instead of `E`.
    FrakT { s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub exact: bool,
    /// The estimate with half the samples, on the sampled path.
    pub coarse: Option<f64>,
    pub unstable: bool,
}

struct Predicate {
    level: LevelSet,
    // m1(s)/m2(s) for the weighted quantity
    weight: f64,
}

impl Predicate {
    fn holds(&self, e: &Entries) -> bool {
        let rep = ScalarRep::of_entries(0.0, e);
        match self.level {
            LevelSet::Sigma { gamma } => rep.sigma <= gamma,
            LevelSet::Pi { interval } => interval.contains(rep.pi_val),
            LevelSet::PiWeighted { interval, .. } => {
                let v = if rep.pi_val == 0.0 { 0.0 } else { rep.pi_val * self.weight };
                interval.contains(v)
            }
            LevelSet::ZetaArc { arc } => arc.contains_angle(2.0 * rep.phi),
        }
    }
}

/// `lambda((0, T) ∩ tau(E))` where `E = {t : q(c t) in L}` for the quantity
/// `q` with level set `L`. Without transport `tau` is the identity and `c = 1`;
/// with `FrakT { s }` it is `frak_t_s` and `c = s`. The weighted `pi` always
/// evaluates `H` at `s t` with its own `s`.
pub fn preimage_measure(
    h: &HamiltonianModel,
    level: LevelSet,
    window: f64,
    transport: Transport,
) -> Result<MeasureEstimate> {
    if !(window > 0.0) {
        return Err(Error::NonPositiveTime(window));
    }
    let weight = match level {
        LevelSet::PiWeighted { s, .. } => {
            let m = h.primitive(s)?;
            if !(m.m1 > 0.0) || !(m.m2 > 0.0) {
                return Err(Error::ZeroDiagonalPrimitive { t: s, m1: m.m1, m2: m.m2 });
            }
            m.m1 / m.m2
        }
        _ => 1.0,
    };
    let pred = Predicate { level, weight };
    let scale = match (level, transport) {
        (LevelSet::PiWeighted { s, .. }, _) => s,
        (_, Transport::FrakT { s }) => s,
        _ => 1.0,
    };
    let (upper, tau): (f64, Box<dyn Fn(f64) -> Result<f64>>) = match transport {
        Transport::None => (window, Box::new(|t| Ok(t))),
        Transport::FrakT { s } => (frak_t_inv(h, s, window)?, Box::new(move |t| frak_t(h, s, t))),
    };
    let tau_len = |a: f64, b: f64| -> Result<f64> { Ok((tau(b)? - tau(a)?).max(0.0)) };

    if let Some(pieces) = h.pieces(0.0, scale * upper)? {
        let mut total = 0.0;
        for (a, b, e) in pieces {
            if pred.holds(&e) {
                total += tau_len(a / scale, (b / scale).min(upper))?;
            }
        }
        return Ok(MeasureEstimate {
            value: total.min(window),
            exact: true,
            coarse: None,
            unstable: false,
        });
    }

    // Sampling variable `u`, its range, the model evaluated there and the
    // measure of a run `(a, b)` of `u`. For the trace-normalised wrapper the
    // base model is sampled directly and runs are weighed by its trace mass.
    let (model, u_upper, u_scale, run_len): (&HamiltonianModel, f64, f64, Box<dyn Fn(f64, f64) -> Result<f64> + '_>) =
        match (h, transport, level) {
            (HamiltonianModel::Reparameterized(r), Transport::None, l)
                if matches!(r.map, MonotoneMap::TraceInverse) && !matches!(l, LevelSet::PiWeighted { .. }) =>
            {
                let base = &r.base;
                (
                    base,
                    r.phi(upper)?,
                    1.0,
                    Box::new(move |a, b| Ok((base.trace_primitive(b)? - base.trace_primitive(a)?).max(0.0))),
                )
            }
            _ => (h, upper, scale, Box::new(tau_len)),
        };
    let sampled = |n: usize| -> Result<f64> {
        let dt = u_upper / n as f64;
        let mut total = 0.0;
        let mut run_start: Option<f64> = None;
        for k in 0..n {
            let mid = (k as f64 + 0.5) * dt;
            let inside = pred.holds(&model.eval(u_scale * mid)?);
            match (inside, run_start) {
                (true, None) => run_start = Some(k as f64 * dt),
                (false, Some(a)) => {
                    total += run_len(a, k as f64 * dt)?;
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(a) = run_start {
            total += run_len(a, u_upper)?;
        }
        Ok(total.min(window))
    };
    let coarse = sampled(SAMPLES)?;
    let fine = sampled(2 * SAMPLES)?;
    let unstable = (fine - coarse).abs() > UNSTABLE_REL * fine.abs().max(coarse.abs()) + 1e-12 * window;
    Ok(MeasureEstimate {
        value: fine,
        exact: false,
        coarse: Some(coarse),
        unstable,
    })
}

/// The preimage itself on `(0, window)`, for piecewise-constant models.
pub fn preimage_set(h: &HamiltonianModel, level: LevelSet, window: f64) -> Result<Option<IntervalSet>> {
    let weight = match level {
        LevelSet::PiWeighted { s, .. } => {
            let m = h.primitive(s)?;
            m.m1 / m.m2
        }
        _ => 1.0,
    };
    let scale = match level {
        LevelSet::PiWeighted { s, .. } => s,
        _ => 1.0,
    };
    let pred = Predicate { level, weight };
    let Some(pieces) = h.pieces(0.0, scale * window)? else {
        return Ok(None);
    };
    let items = pieces
        .into_iter()
        .filter(|(_, _, e)| pred.holds(e))
        .map(|(a, b, _)| Interval::closed_open(a / scale, b / scale))
        .collect();
    Ok(Some(IntervalSet::from_intervals(items)))
}
