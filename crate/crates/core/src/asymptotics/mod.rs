//! Scalar high-energy diagnostics of a Hamiltonian: the determinant ratio `d`,
//! the scale `t_hat(r)`, the bounds `A` and `L`, the pointwise quantities
//! `sigma`, `phi`, `zeta`, `pi`, the rescaled trace `frak_t_s`, the maps
//! `Gamma` and `Xi`, and weighted rescalings.

pub mod conditions;
pub mod measure;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{families::GammaForm, Entries, HamiltonianModel, Rescaled};
use crate::quadrature::{integrate, QuadConfig};
use crate::roots::solve_increasing;
use crate::weyl::{weyl_coefficient, NevanlinnaSample};

pub use conditions::{
    check_condition_ii, check_condition_iii, check_condition_iv, classify_trend, default_gammas, default_pairs,
    default_t_grid, log_grid, probe_sequences, ConditionIi, ConditionIii, ConditionIv, IjPair, TermSeries,
    TrendStats, Verdict,
};
pub use measure::{preimage_measure, preimage_set, LevelSet, MeasureEstimate, Transport};

/// `d(H, t) = det M(t) / (m1(t) m2(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetRatio {
    pub t: f64,
    pub value: f64,
}

pub fn d_of(h: &HamiltonianModel, t: f64, tol: f64) -> Result<DetRatio> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let m = h.primitive_tol(t, tol)?;
    if !(m.m1 > 0.0) || !(m.m2 > 0.0) {
        return Err(Error::ZeroDiagonalPrimitive { t, m1: m.m1, m2: m.m2 });
    }
    // 1 - m3^2 / (m1 m2) avoids forming the product twice
    let value = 1.0 - (m.m3 / m.m1) * (m.m3 / m.m2);
    Ok(DetRatio {
        t,
        value: value.clamp(0.0, 1.0),
    })
}

/// The unique `t` with `(m1 m2)(t) = 1 / (8 r)^2`.
pub fn t_hat(h: &HamiltonianModel, r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::RangeError(format!("r must be positive, got {r}")));
    }
    let target = (8.0 * r).powi(-2);
    let f = |t: f64| match h.primitive_tol(t, tol.min(1e-10)) {
        Ok(m) => m.m1 * m.m2,
        Err(_) => f64::NAN,
    };
    solve_increasing(f, target, tol)
}

/// Per-`r` diagnostics; the `q` fields are filled by [`asymptotics_row`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub r: f64,
    pub t_hat: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub d_at_t_hat: f64,
    pub q_abs: Option<f64>,
    pub q_im: Option<f64>,
    pub ratio: Option<f64>,
    pub q_err: Option<f64>,
}

/// `A(r) = sqrt(m1 / m2)(t_hat(r))` and `L(r) = A(r) d(H, t_hat(r))`.
#[allow(non_snake_case)]
pub fn A_L(h: &HamiltonianModel, r: f64, tol: f64) -> Result<AsymptoticsRow> {
    let th = t_hat(h, r, tol)?;
    let m = h.primitive_tol(th, tol.min(1e-10))?;
    let a = (m.m1 / m.m2).sqrt();
    let d = d_of(h, th, tol.min(1e-10))?.value;
    Ok(AsymptoticsRow {
        r,
        t_hat: th,
        a,
        l: a * d,
        d_at_t_hat: d,
        q_abs: None,
        q_im: None,
        ratio: None,
        q_err: None,
    })
}

/// [`A_L`] together with `q(i r)`.
pub fn asymptotics_row(h: &HamiltonianModel, r: f64, tol: f64) -> Result<(AsymptoticsRow, NevanlinnaSample)> {
    let mut row = A_L(h, r, tol)?;
    let s = weyl_coefficient(h, Complex64::new(0.0, r), tol)?;
    let abs = s.q.norm();
    row.q_abs = Some(abs);
    row.q_im = Some(s.q.im);
    row.ratio = Some(if abs.is_finite() { s.q.im / abs } else { 0.0 });
    row.q_err = Some(s.err);
    Ok((row, s))
}

/// Pointwise `sigma`, `phi`, `zeta = e^{2 i phi}` and `pi` of an entry triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarRep {
    pub t: f64,
    pub sigma: f64,
    pub phi: f64,
    pub zeta: Complex64,
    pub pi_val: f64,
}

impl ScalarRep {
    pub fn of_entries(t: f64, e: &Entries) -> ScalarRep {
        let sigma = if e.h3 != 0.0 {
            (e.h3.abs() / (e.h1 * e.h2).sqrt()).min(1.0)
        } else {
            0.0
        };
        let phi = if e.h2 == 0.0 {
            0.0
        } else {
            // Arccot sqrt(h1/h2) with values in (0, pi)
            let base = e.h2.sqrt().atan2(e.h1.max(0.0).sqrt());
            if e.h3 < 0.0 {
                std::f64::consts::PI - base
            } else {
                base
            }
        };
        let pi_val = if e.h3 != 0.0 { e.h3.signum() * e.h2 / e.h1 } else { 0.0 };
        ScalarRep {
            t,
            sigma,
            phi,
            zeta: Complex64::from_polar(1.0, 2.0 * phi),
            pi_val,
        }
    }
}

pub fn scalar_rep(h: &HamiltonianModel, t: f64) -> Result<ScalarRep> {
    Ok(ScalarRep::of_entries(t, &h.eval(t)?))
}

fn diagonal_primitives(h: &HamiltonianModel, s: f64) -> Result<(f64, f64)> {
    let m = h.primitive(s)?;
    if !(m.m1 > 0.0) || !(m.m2 > 0.0) {
        return Err(Error::ZeroDiagonalPrimitive { t: s, m1: m.m1, m2: m.m2 });
    }
    Ok((m.m1, m.m2))
}

/// `pi_H(s t) m1(s) / m2(s)`, zero where `h3(s t) = 0`.
pub fn pi_weighted(h: &HamiltonianModel, s: f64, t: f64) -> Result<f64> {
    let (m1, m2) = diagonal_primitives(h, s)?;
    let rep = scalar_rep(h, s * t)?;
    Ok(if rep.pi_val == 0.0 { 0.0 } else { rep.pi_val * (m1 / m2) })
}

/// `frak_t_s(t) = m1(s t)/m1(s) + m2(s t)/m2(s)`.
pub fn frak_t(h: &HamiltonianModel, s: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let (m1, m2) = diagonal_primitives(h, s)?;
    let m = h.primitive(s * t)?;
    Ok(m.m1 / m1 + m.m2 / m2)
}

/// Inverse of [`frak_t`] in `t`.
pub fn frak_t_inv(h: &HamiltonianModel, s: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if !(x > 0.0) {
        return Err(Error::BracketFailure { target: x });
    }
    match h {
        HamiltonianModel::PiecewiseConstant(pc) if pc.is_constant() => return Ok(0.5 * x),
        HamiltonianModel::DiagonalPower { rho } | HamiltonianModel::SingularPower { rho } if rho[0] == rho[1] => {
            return Ok((0.5 * x).powf(1.0 / rho[0]));
        }
        _ => {}
    }
    let (m1, m2) = diagonal_primitives(h, s)?;
    let f = |t: f64| match h.primitive(s * t) {
        Ok(m) => m.m1 / m1 + m.m2 / m2,
        Err(_) => f64::NAN,
    };
    solve_increasing(f, x, 1e-14)
}

/// `Gamma[sigma, zeta]` from step tables; see [`GammaForm`] for the layout.
pub fn gamma_map(knots: Vec<f64>, sigma: Vec<f64>, zeta: Vec<Complex64>) -> Result<HamiltonianModel> {
    Ok(HamiltonianModel::GammaForm(GammaForm::new(knots, sigma, zeta)?))
}

/// `Xi[H](t) = (sigma_H(t), zeta_H(t))`, defined for `tr H(t) = 1`.
pub fn xi_map(h: &HamiltonianModel, t: f64) -> Result<(f64, Complex64)> {
    let e = h.eval(t)?;
    let trace = e.trace();
    if (trace - 1.0).abs() > 1e-12 {
        return Err(Error::NotTraceNormalized { t, trace });
    }
    let rep = ScalarRep::of_entries(t, &e);
    Ok((rep.sigma, rep.zeta))
}

/// Weights of the rescaling `A_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RescaleMode {
    /// `g_j = 1 / m_j(s)`.
    PrimitiveWeights,
    /// `g1 = g2 = 1 / s`, for trace normalised `H`.
    PlainS,
}

/// `A_s H (t) = (s g1 h1(st), s g3 h3(st), s g2 h2(st))`.
pub fn rescale(h: &HamiltonianModel, s: f64, mode: RescaleMode) -> Result<HamiltonianModel> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::RangeError(format!("s must be positive, got {s}")));
    }
    let (g1, g2) = match mode {
        RescaleMode::PrimitiveWeights => {
            let (m1, m2) = diagonal_primitives(h, s)?;
            (1.0 / m1, 1.0 / m2)
        }
        RescaleMode::PlainS => {
            if !h.is_trace_normalized() {
                return Err(Error::ModeAssumptionViolated(format!(
                    "plain-s rescaling needs tr H = 1, model is {}",
                    h.kind_name()
                )));
            }
            (1.0 / s, 1.0 / s)
        }
    };
    if let Some(e) = h.as_constant() {
        let g3 = (g1 * g2).sqrt();
        return HamiltonianModel::constant(s * g1 * e.h1, s * g3 * e.h3, s * g2 * e.h2);
    }
    Ok(HamiltonianModel::Rescaled(Box::new(Rescaled::new(h.clone(), s, g1, g2)?)))
}

/// `g1`, `g2`, `g3` of a rescaled model (all `1` otherwise).
pub fn rescale_weights(h: &HamiltonianModel, s: f64, mode: RescaleMode) -> Result<(f64, f64, f64)> {
    let (g1, g2) = match mode {
        RescaleMode::PrimitiveWeights => {
            let (m1, m2) = diagonal_primitives(h, s)?;
            (1.0 / m1, 1.0 / m2)
        }
        RescaleMode::PlainS => (1.0 / s, 1.0 / s),
    };
    Ok((g1, g2, (g1 * g2).sqrt()))
}

/// `(1/t) int_0^t det H / (h1 h2)`, the integrand read as `1` where `h1 h2 = 0`.
pub fn det_integral_form(h: &HamiltonianModel, t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let density = |e: &Entries| {
        let rep = ScalarRep::of_entries(0.0, e);
        1.0 - rep.sigma * rep.sigma
    };
    if let Some(pieces) = h.pieces(0.0, t)? {
        let sum: f64 = pieces.iter().map(|(a, b, e)| (b - a) * density(e)).sum();
        return Ok((sum / t).clamp(0.0, 1.0));
    }
    let f = |x: f64| h.eval(x).map(|e| density(&e)).unwrap_or(f64::NAN);
    let bps = h.breakpoints(0.0, t);
    let r = integrate(f, 0.0, t, &bps, &QuadConfig::with_tol(tol * t))?;
    Ok((r.value / t).clamp(0.0, 1.0))
}
