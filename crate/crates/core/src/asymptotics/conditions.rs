//! Empirical checks of the limit conditions on `d`, on `sigma` preimages and
//! on pairs of `pi` preimages as `t -> 0` or `s -> 0`.
//!
//! A limit cannot be decided from finitely many samples. Series are classified
//! by a least-squares trend over their last decade; every verdict here is a
//! heuristic label attached to the raw values.

use serde::{Deserialize, Serialize};

use super::{d_of, preimage_measure, DetRatio, LevelSet, Transport};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::intervals::{validate_pair, Interval};

/// Trend slopes below this mean the series tends to zero.
pub const SLOPE_TO_ZERO: f64 = -0.2;
/// Flat trends within this band and above [`BOUNDED_FLOOR`] are bounded away.
pub const SLOPE_FLAT: f64 = 0.05;
pub const BOUNDED_FLOOR: f64 = 0.01;
/// `max / min` above this marks oscillation.
pub const OSCILLATION_RATIO: f64 = 5.0;
/// Values at or below this count as zero.
pub const ZERO_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    TendsToZero,
    BoundedAway,
    Oscillating,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendStats {
    /// Slope of `ln value` against `ln(1/x)` over the tail.
    pub slope: f64,
    pub last_value: f64,
    pub tail_points: usize,
    pub min: f64,
    pub max: f64,
    pub monotone_decreasing: bool,
}

/// Geometric grid from `start` to `stop` inclusive, in that order.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            // base 10 keeps decade points exact
            let (a, b) = (start.log10(), stop.log10());
            (0..count)
                .map(|k| match k {
                    0 => start,
                    k if k + 1 == count => stop,
                    _ => 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64),
                })
                .collect()
        }
    }
}

/// `10^-1 ... 10^-8`, eight points per decade.
pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-1, 1e-8, 57)
}

pub fn default_gammas() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 0.9]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IjPair {
    pub i: Interval,
    pub j: Interval,
}

/// A pair around the two-phase constants `c+-`, a decoy pair missing them, and
/// a wide pair separating the signs, which also catches the weighted `pi`
/// whose values move with `m1(s)/m2(s)`.
pub fn default_pairs(h: &HamiltonianModel) -> Vec<IjPair> {
    let (cp, cm) = match h {
        HamiltonianModel::TwoPhase(tp) => tp.c_plus_minus(),
        _ => (3.0, -3.0),
    };
    let delta = 0.25 * cp.abs().min(cm.abs()).min((cp - cm).abs());
    let around = |c: f64| Interval::open(c - delta, c + delta);
    let a = delta;
    vec![
        IjPair {
            i: around(cp),
            j: around(cm),
        },
        IjPair {
            i: Interval::open(0.5 * a, a),
            j: Interval::open(-a, -0.5 * a),
        },
        IjPair {
            i: Interval::open(1e-3, 1e3),
            j: Interval::open(-1e3, -1e-3),
        },
    ]
}

/// Named probe sequences tending to `0`; the band edges `t_n` of a two-phase
/// model give `t_n`, `t_{2n}` and `2 t_{2n}`.
pub fn probe_sequences(h: &HamiltonianModel) -> Vec<(String, Vec<f64>)> {
    let HamiltonianModel::TwoPhase(tp) = h else {
        return Vec::new();
    };
    let t = |n: usize| tp.t(n);
    let all: Vec<f64> = (1..=8).filter_map(t).collect();
    let even: Vec<f64> = (1..=4).filter_map(|n| t(2 * n)).collect();
    let doubled: Vec<f64> = even.iter().map(|x| 2.0 * x).collect();
    vec![
        ("t_n".into(), all),
        ("t_2n".into(), even),
        ("2t_2n".into(), doubled),
    ]
}

/// Classify `values[k]` sampled at `xs[k]` for `x -> 0`.
pub fn classify_trend(xs: &[f64], values: &[f64]) -> (Verdict, TrendStats) {
    let mut pts: Vec<(f64, f64)> = xs.iter().copied().zip(values.iter().copied()).collect();
    pts.retain(|(x, v)| *x > 0.0 && v.is_finite());
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let empty = TrendStats {
        slope: f64::NAN,
        last_value: f64::NAN,
        tail_points: 0,
        min: f64::NAN,
        max: f64::NAN,
        monotone_decreasing: false,
    };
    let Some(&(x_min, last)) = pts.last() else {
        return (Verdict::Undetermined, empty);
    };
    let min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let monotone = pts.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + ZERO_FLOOR);
    let mut tail: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 <= 10.0 * x_min).collect();
    if tail.len() < 3 {
        tail = pts[pts.len().saturating_sub(3)..].to_vec();
    }
    let slope = fit_slope(&tail);
    let stats = TrendStats {
        slope,
        last_value: last,
        tail_points: tail.len(),
        min,
        max,
        monotone_decreasing: monotone,
    };
    let tail_max = tail.iter().map(|p| p.1).fold(0.0, f64::max);
    let verdict = if tail_max <= ZERO_FLOOR {
        Verdict::TendsToZero
    } else if slope < SLOPE_TO_ZERO {
        Verdict::TendsToZero
    } else if slope.abs() <= SLOPE_FLAT && last > BOUNDED_FLOOR {
        Verdict::BoundedAway
    } else if max > OSCILLATION_RATIO * min.max(ZERO_FLOOR) {
        if monotone {
            Verdict::TendsToZero
        } else {
            Verdict::Oscillating
        }
    } else {
        Verdict::Undetermined
    };
    (verdict, stats)
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|(x, v)| (-x.ln(), v.max(1e-300).ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// `liminf` label derived from the `lim` label and the tail of the values.
fn liminf_verdict(lim: Verdict, xs: &[f64], values: &[f64], stats: &TrendStats) -> Verdict {
    match lim {
        Verdict::TendsToZero | Verdict::BoundedAway => lim,
        Verdict::Oscillating => {
            let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let low = xs
                .iter()
                .zip(values)
                .filter(|(x, _)| **x <= 100.0 * x_min)
                .map(|(_, v)| *v)
                .fold(f64::INFINITY, f64::min);
            if low <= BOUNDED_FLOOR * stats.max {
                Verdict::TendsToZero
            } else {
                Verdict::Undetermined
            }
        }
        Verdict::Undetermined => Verdict::Undetermined,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionIi {
    pub values: Vec<DetRatio>,
    pub lim_verdict: Verdict,
    pub liminf_verdict: Verdict,
    pub stats: TrendStats,
    pub heuristic: bool,
}

/// `lim` and `liminf` of `d(H, t)` as `t -> 0` along `t_grid`.
pub fn check_condition_ii(h: &HamiltonianModel, t_grid: &[f64], tol: f64) -> Result<ConditionIi> {
    let values = t_grid
        .iter()
        .map(|&t| d_of(h, t, tol))
        .collect::<Result<Vec<_>>>()?;
    let vs: Vec<f64> = values.iter().map(|d| d.value).collect();
    let (lim, stats) = classify_trend(t_grid, &vs);
    let liminf = liminf_verdict(lim, t_grid, &vs, &stats);
    Ok(ConditionIi {
        values,
        lim_verdict: lim,
        liminf_verdict: liminf,
        stats,
        heuristic: true,
    })
}

/// One probed quantity along one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSeries {
    pub term: String,
    pub along: String,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub verdict: Verdict,
    pub stats: TrendStats,
    pub sampling_unstable: bool,
}

impl TermSeries {
    fn new(term: String, along: &str, points: &[f64], values: Vec<f64>, unstable: bool) -> Self {
        let (verdict, stats) = classify_trend(points, &values);
        TermSeries {
            term,
            along: along.to_string(),
            points: points.to_vec(),
            values,
            verdict,
            stats,
            sampling_unstable: unstable,
        }
    }
}

/// `Some(true)` when every series tends to zero, `Some(false)` when one is
/// bounded away or oscillates with a large tail.
pub fn overall(series: &[TermSeries]) -> Option<bool> {
    let mut all_zero = true;
    for s in series {
        match s.verdict {
            Verdict::TendsToZero => {}
            Verdict::BoundedAway => return Some(false),
            Verdict::Oscillating if s.stats.max > BOUNDED_FLOOR => return Some(false),
            _ => all_zero = false,
        }
    }
    if all_zero {
        Some(true)
    } else {
        None
    }
}

fn pair_label(p: &IjPair) -> String {
    format!("I=({}, {}) J=({}, {})", p.i.lo, p.i.hi, p.j.lo, p.j.hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionIii {
    pub window: f64,
    pub gammas: Vec<f64>,
    pub pairs: Vec<IjPair>,
    pub series: Vec<TermSeries>,
    pub holds: Option<bool>,
    pub heuristic: bool,
}

/// The transported `sigma` and weighted `pi` measures on `(0, T)` as `s -> 0`.
pub fn check_condition_iii(
    h: &HamiltonianModel,
    window: f64,
    gammas: &[f64],
    pairs: &[IjPair],
    sequences: &[(String, Vec<f64>)],
) -> Result<ConditionIii> {
    for p in pairs {
        validate_pair(&p.i, &p.j)?;
    }
    let mut series = Vec::new();
    for (name, ss) in sequences {
        for &gamma in gammas {
            let mut unstable = false;
            let vals = ss
                .iter()
                .map(|&s| {
                    let m = preimage_measure(h, LevelSet::Sigma { gamma }, window, Transport::FrakT { s })?;
                    unstable |= m.unstable;
                    Ok(m.value)
                })
                .collect::<Result<Vec<_>>>()?;
            series.push(TermSeries::new(format!("sigma gamma={gamma}"), name, ss, vals, unstable));
        }
        for p in pairs {
            let mut unstable = false;
            let vals = ss
                .iter()
                .map(|&s| {
                    let mut prod = 1.0;
                    for interval in [p.i, p.j] {
                        let m = preimage_measure(h, LevelSet::PiWeighted { interval, s }, window, Transport::FrakT { s })?;
                        unstable |= m.unstable;
                        prod *= m.value;
                    }
                    Ok(prod)
                })
                .collect::<Result<Vec<_>>>()?;
            series.push(TermSeries::new(format!("pi {}", pair_label(p)), name, ss, vals, unstable));
        }
    }
    Ok(ConditionIii {
        window,
        gammas: gammas.to_vec(),
        pairs: pairs.to_vec(),
        holds: overall(&series),
        series,
        heuristic: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionIv {
    pub gammas: Vec<f64>,
    pub pairs: Vec<IjPair>,
    pub series: Vec<TermSeries>,
    /// `min (m1/t)(m2/t)` over the last decade of the first sequence.
    pub liminf_product: f64,
    pub precondition_warning: bool,
    pub holds: Option<bool>,
    pub heuristic: bool,
}

impl ConditionIv {
    /// The overall verdict restricted to one probe sequence.
    pub fn holds_along(&self, along: &str) -> Option<bool> {
        let sub: Vec<TermSeries> = self.series.iter().filter(|s| s.along == along).cloned().collect();
        overall(&sub)
    }
}

fn require_trace_normalized(h: &HamiltonianModel, points: &[f64]) -> Result<()> {
    if h.is_trace_normalized() {
        return Ok(());
    }
    for &t in points {
        let trace = h.eval(t)?.trace();
        if (trace - 1.0).abs() > 1e-12 {
            return Err(Error::NotTraceNormalized { t, trace });
        }
    }
    Ok(())
}

/// The unweighted `sigma` and `pi` densities `(1/t) lambda(...)` as `t -> 0`.
pub fn check_condition_iv(
    h: &HamiltonianModel,
    gammas: &[f64],
    pairs: &[IjPair],
    sequences: &[(String, Vec<f64>)],
) -> Result<ConditionIv> {
    for p in pairs {
        validate_pair(&p.i, &p.j)?;
    }
    let all_points: Vec<f64> = sequences.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    require_trace_normalized(h, &all_points)?;
    let mut liminf_product = f64::INFINITY;
    if let Some((_, first)) = sequences.first() {
        let x_min = first.iter().copied().fold(f64::INFINITY, f64::min);
        for &t in first.iter().filter(|t| **t <= 10.0 * x_min) {
            let m = h.primitive(t)?;
            liminf_product = liminf_product.min((m.m1 / t) * (m.m2 / t));
        }
    }
    let mut series = Vec::new();
    for (name, ts) in sequences {
        for &gamma in gammas {
            let mut unstable = false;
            let vals = ts
                .iter()
                .map(|&t| {
                    let m = preimage_measure(h, LevelSet::Sigma { gamma }, t, Transport::None)?;
                    unstable |= m.unstable;
                    Ok(m.value / t)
                })
                .collect::<Result<Vec<_>>>()?;
            series.push(TermSeries::new(format!("sigma gamma={gamma}"), name, ts, vals, unstable));
        }
        for p in pairs {
            let mut unstable = false;
            let vals = ts
                .iter()
                .map(|&t| {
                    let mut prod = 1.0;
                    for interval in [p.i, p.j] {
                        let m = preimage_measure(h, LevelSet::Pi { interval }, t, Transport::None)?;
                        unstable |= m.unstable;
                        prod *= m.value / t;
                    }
                    Ok(prod)
                })
                .collect::<Result<Vec<_>>>()?;
            series.push(TermSeries::new(format!("pi {}", pair_label(p)), name, ts, vals, unstable));
        }
    }
    Ok(ConditionIv {
        gammas: gammas.to_vec(),
        pairs: pairs.to_vec(),
        liminf_product,
        precondition_warning: !(liminf_product > BOUNDED_FLOOR),
        holds: overall(&series),
        series,
        heuristic: true,
    })
}
