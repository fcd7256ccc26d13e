//! Hamiltonians on `(0, inf)`, their primitives and reparameterisations.

pub mod catalog;
pub mod families;
pub mod reparam;
pub mod schema;

use serde::{Deserialize, Serialize};

pub use families::{
    gamma_entries, BreakpointRule, GammaForm, PiecewiseConstant, PowerLog, Segment, TwoPhaseRotation,
    SINGULAR_SENTINEL,
};
pub use reparam::{reparameterize, trace_reparameterize, MonotoneMap, Reparameterized, Rescaled, Tabulated};

use crate::error::{Error, Result};
use crate::roots::solve_increasing;

/// Default absolute tolerance for primitives without a closed form.
pub const PRIMITIVE_TOL: f64 = 1e-12;

const PSD_SLACK: f64 = 1e-12;

/// The three independent entries of a symmetric `H = [[h1, h3], [h3, h2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entries {
    pub h1: f64,
    pub h3: f64,
    pub h2: f64,
}

impl Entries {
    pub const fn new(h1: f64, h3: f64, h2: f64) -> Self {
        Entries { h1, h3, h2 }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Entries::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.h1, self.h3, self.h2]
    }

    pub fn trace(&self) -> f64 {
        self.h1 + self.h2
    }

    pub fn det(&self) -> f64 {
        self.h1 * self.h2 - self.h3 * self.h3
    }

    pub fn scale(&self, c: f64) -> Entries {
        Entries::new(c * self.h1, c * self.h3, c * self.h2)
    }

    pub fn is_psd(&self) -> bool {
        self.h1 >= 0.0 && self.h2 >= 0.0 && self.h3 * self.h3 <= self.h1 * self.h2 * (1.0 + PSD_SLACK) + PSD_SLACK
    }

    pub(crate) fn validate(&self, what: &str) -> Result<()> {
        if ![self.h1, self.h3, self.h2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidModel(format!("{what}: non-finite entries {self:?}")));
        }
        if !self.is_psd() {
            return Err(Error::InvalidModel(format!("{what}: entries {self:?} are not positive semidefinite")));
        }
        Ok(())
    }
}

/// `M(t) = int_0^t H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveMatrix {
    pub t: f64,
    pub m1: f64,
    pub m3: f64,
    pub m2: f64,
}

impl PrimitiveMatrix {
    pub fn zero() -> Self {
        PrimitiveMatrix {
            t: 0.0,
            m1: 0.0,
            m3: 0.0,
            m2: 0.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.m1 * self.m2 - self.m3 * self.m3
    }

    pub fn trace(&self) -> f64 {
        self.m1 + self.m2
    }

    /// Entrywise `self - earlier`, the integral over `(earlier.t, self.t)`.
    pub fn since(&self, earlier: &PrimitiveMatrix) -> PrimitiveMatrix {
        PrimitiveMatrix {
            t: self.t - earlier.t,
            m1: self.m1 - earlier.m1,
            m3: self.m3 - earlier.m3,
            m2: self.m2 - earlier.m2,
        }
    }

    pub fn entries(&self) -> Entries {
        Entries::new(self.m1, self.m3, self.m2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianModel {
    PiecewiseConstant(PiecewiseConstant),
    PowerLog(PowerLog),
    TwoPhase(TwoPhaseRotation),
    /// `diag(rho1 t^{rho1-1}, rho2 t^{rho2-1})`.
    DiagonalPower { rho: [f64; 2] },
    /// As `DiagonalPower` with `h3 = sqrt(h1 h2)`.
    SingularPower { rho: [f64; 2] },
    GammaForm(GammaForm),
    Reparameterized(Box<Reparameterized>),
    Rescaled(Box<Rescaled>),
}

fn check_rho(rho: [f64; 2]) -> Result<()> {
    if rho.iter().all(|&r| r > 0.0 && r.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("rho must be positive, got {rho:?}")))
    }
}

impl HamiltonianModel {
    pub fn constant(h1: f64, h3: f64, h2: f64) -> Result<Self> {
        Ok(HamiltonianModel::PiecewiseConstant(PiecewiseConstant::constant(Entries::new(
            h1, h3, h2,
        ))?))
    }

    pub fn piecewise(segments: Vec<Segment>, tail: Entries) -> Result<Self> {
        Ok(HamiltonianModel::PiecewiseConstant(PiecewiseConstant::new(segments, tail)?))
    }

    pub fn power_log(alpha: [f64; 2], beta: [f64; 2]) -> Result<Self> {
        Ok(HamiltonianModel::PowerLog(PowerLog::new(alpha, beta)?))
    }

    pub fn two_phase(phi_plus: f64, phi_minus: f64, rule: BreakpointRule) -> Result<Self> {
        Ok(HamiltonianModel::TwoPhase(TwoPhaseRotation::new(phi_plus, phi_minus, rule)?))
    }

    pub fn diagonal_power(rho1: f64, rho2: f64) -> Result<Self> {
        check_rho([rho1, rho2])?;
        Ok(HamiltonianModel::DiagonalPower { rho: [rho1, rho2] })
    }

    pub fn singular_power(rho1: f64, rho2: f64) -> Result<Self> {
        check_rho([rho1, rho2])?;
        Ok(HamiltonianModel::SingularPower { rho: [rho1, rho2] })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            HamiltonianModel::PiecewiseConstant(_) => "piecewise_constant",
            HamiltonianModel::PowerLog(_) => "power_log",
            HamiltonianModel::TwoPhase(_) => "two_phase",
            HamiltonianModel::DiagonalPower { .. } => "diagonal_power",
            HamiltonianModel::SingularPower { .. } => "singular_power",
            HamiltonianModel::GammaForm(_) => "gamma_form",
            HamiltonianModel::Reparameterized(_) => "reparameterized",
            HamiltonianModel::Rescaled(_) => "rescaled",
        }
    }

    /// Every supported kind carries analytic primitives.
    pub fn closed_form_primitive(&self) -> bool {
        true
    }

    /// Whether `int_0^inf tr H = inf` is guaranteed.
    pub fn limit_point_declared(&self) -> bool {
        match self {
            HamiltonianModel::PiecewiseConstant(pc) => pc.limit_point(),
            HamiltonianModel::Reparameterized(r) => r.base.limit_point_declared(),
            HamiltonianModel::Rescaled(r) => r.base.limit_point_declared(),
            _ => true,
        }
    }

    /// Right-continuous representative `H(t)`.
    pub fn eval(&self, t: f64) -> Result<Entries> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        let e = match self {
            HamiltonianModel::PiecewiseConstant(pc) => pc.eval(t),
            HamiltonianModel::PowerLog(p) => p.eval(t),
            HamiltonianModel::TwoPhase(m) => m.eval(t),
            HamiltonianModel::DiagonalPower { rho } => {
                Entries::new(rho[0] * t.powf(rho[0] - 1.0), 0.0, rho[1] * t.powf(rho[1] - 1.0))
            }
            HamiltonianModel::SingularPower { rho } => {
                let h1 = rho[0] * t.powf(rho[0] - 1.0);
                let h2 = rho[1] * t.powf(rho[1] - 1.0);
                Entries::new(h1, (h1 * h2).sqrt(), h2)
            }
            HamiltonianModel::GammaForm(g) => g.eval(t),
            HamiltonianModel::Reparameterized(r) => r.eval(t)?,
            HamiltonianModel::Rescaled(r) => r.eval(t)?,
        };
        if ![e.h1, e.h3, e.h2].iter().all(|v| v.is_finite()) {
            return Err(Error::ModelDomain {
                t,
                reason: format!("{} entries are not finite", self.kind_name()),
            });
        }
        Ok(e)
    }

    pub fn primitive(&self, t: f64) -> Result<PrimitiveMatrix> {
        self.primitive_tol(t, PRIMITIVE_TOL)
    }

    /// `M(t)`; `tol` bounds the absolute error of entries that need quadrature.
    pub fn primitive_tol(&self, t: f64, tol: f64) -> Result<PrimitiveMatrix> {
        if t == 0.0 {
            return Ok(PrimitiveMatrix::zero());
        }
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        match self {
            HamiltonianModel::PiecewiseConstant(pc) => Ok(pc.primitive(t)),
            HamiltonianModel::PowerLog(p) => p.primitive(t, tol),
            HamiltonianModel::TwoPhase(m) => Ok(m.primitive(t)),
            HamiltonianModel::DiagonalPower { rho } => Ok(PrimitiveMatrix {
                t,
                m1: t.powf(rho[0]),
                m3: 0.0,
                m2: t.powf(rho[1]),
            }),
            HamiltonianModel::SingularPower { rho } => {
                let r3 = 0.5 * (rho[0] + rho[1]);
                Ok(PrimitiveMatrix {
                    t,
                    m1: t.powf(rho[0]),
                    m3: (rho[0] * rho[1]).sqrt() / r3 * t.powf(r3),
                    m2: t.powf(rho[1]),
                })
            }
            HamiltonianModel::GammaForm(g) => Ok(g.primitive(t)),
            HamiltonianModel::Reparameterized(r) => r.primitive(t, tol),
            HamiltonianModel::Rescaled(r) => r.primitive(t, tol),
        }
    }

    /// Points in the open interval `(lo, hi)` where `H` may jump or blow up, ascending.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let inside = |v: &f64| *v > lo && *v < hi;
        let mut out: Vec<f64> = match self {
            HamiltonianModel::PiecewiseConstant(pc) => pc.starts().iter().copied().filter(inside).collect(),
            HamiltonianModel::PowerLog(_) => [1.0].into_iter().filter(inside).collect(),
            HamiltonianModel::TwoPhase(m) => m.breaks().iter().copied().filter(inside).collect(),
            HamiltonianModel::GammaForm(g) => g.knots().iter().copied().filter(inside).collect(),
            HamiltonianModel::DiagonalPower { .. } | HamiltonianModel::SingularPower { .. } => Vec::new(),
            HamiltonianModel::Reparameterized(r) => r.breakpoints(lo, hi),
            HamiltonianModel::Rescaled(r) => r.breakpoints(lo, hi),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Whether `H` is constant between consecutive breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        match self {
            HamiltonianModel::PiecewiseConstant(_)
            | HamiltonianModel::TwoPhase(_)
            | HamiltonianModel::GammaForm(_) => true,
            HamiltonianModel::DiagonalPower { rho } | HamiltonianModel::SingularPower { rho } => {
                rho[0] == 1.0 && rho[1] == 1.0
            }
            HamiltonianModel::PowerLog(_) => false,
            HamiltonianModel::Reparameterized(r) => r.is_piecewise_constant(),
            HamiltonianModel::Rescaled(r) => r.base.is_piecewise_constant(),
        }
    }

    /// The constant pieces of `H` on `(lo, hi)`, for piecewise-constant models.
    pub fn pieces(&self, lo: f64, hi: f64) -> Result<Option<Vec<(f64, f64, Entries)>>> {
        if !self.is_piecewise_constant() {
            return Ok(None);
        }
        if !(hi > lo) || !hi.is_finite() {
            return Ok(Some(Vec::new()));
        }
        let mut edges = vec![lo];
        edges.extend(self.breakpoints(lo, hi));
        edges.push(hi);
        let mut out = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            if w[1] > w[0] {
                let mid = 0.5 * (w[0] + w[1]);
                out.push((w[0], w[1], self.eval(mid)?));
            }
        }
        Ok(Some(out))
    }

    /// Structural check of `tr H = 1` a.e.
    pub fn is_trace_normalized(&self) -> bool {
        let unit = |e: &Entries| (e.trace() - 1.0).abs() <= 1e-12;
        match self {
            HamiltonianModel::PiecewiseConstant(pc) => {
                pc.segments().iter().all(|s| unit(&s.h)) && unit(&pc.tail())
            }
            HamiltonianModel::TwoPhase(_) | HamiltonianModel::GammaForm(_) => true,
            HamiltonianModel::Reparameterized(r) => matches!(r.map, MonotoneMap::TraceInverse),
            HamiltonianModel::Rescaled(r) => {
                r.g1 == r.g2 && (r.s * r.g1 - 1.0).abs() <= 1e-15 && r.base.is_trace_normalized()
            }
            _ => false,
        }
    }

    /// `t -> int_0^t tr H`.
    pub fn trace_primitive(&self, t: f64) -> Result<f64> {
        Ok(self.primitive(t)?.trace())
    }

    /// Inverse of [`Self::trace_primitive`].
    pub fn trace_inverse(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        if !(x > 0.0) {
            return Err(Error::BracketFailure { target: x });
        }
        if self.is_trace_normalized() {
            return Ok(x);
        }
        match self {
            HamiltonianModel::PiecewiseConstant(pc) => {
                pc.trace_inverse(x).ok_or(Error::BracketFailure { target: x })
            }
            HamiltonianModel::DiagonalPower { rho } | HamiltonianModel::SingularPower { rho }
                if rho[0] == rho[1] =>
            {
                Ok((0.5 * x).powf(1.0 / rho[0]))
            }
            _ => {
                let f = |t: f64| self.trace_primitive(t).unwrap_or(f64::NAN);
                solve_increasing(f, x, 1e-14)
            }
        }
    }

    /// Entries of a constant Hamiltonian, if this model is one.
    pub fn as_constant(&self) -> Option<Entries> {
        match self {
            HamiltonianModel::PiecewiseConstant(pc) if pc.is_constant() => Some(pc.tail()),
            HamiltonianModel::DiagonalPower { rho } if rho[0] == 1.0 && rho[1] == 1.0 => {
                Some(Entries::new(1.0, 0.0, 1.0))
            }
            HamiltonianModel::SingularPower { rho } if rho[0] == 1.0 && rho[1] == 1.0 => {
                Some(Entries::new(1.0, 1.0, 1.0))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadConfig};
    use std::f64::consts::{FRAC_PI_3, PI};

    #[test]
    fn eval_examples() {
        let tp = HamiltonianModel::two_phase(FRAC_PI_3, 2.0 * FRAC_PI_3, BreakpointRule::default()).unwrap();
        let e = tp.eval(0.2).unwrap();
        assert!((e.h1 - 0.25).abs() < 1e-15 && (e.h3 - 3f64.sqrt() / 4.0).abs() < 1e-15);
        let dp = HamiltonianModel::diagonal_power(1.0, 1.0).unwrap();
        assert_eq!(dp.eval(0.5).unwrap(), Entries::new(1.0, 0.0, 1.0));
        let pc = HamiltonianModel::piecewise(
            vec![Segment {
                len: 1.0,
                h: Entries::new(1.0, 0.0, 0.0),
            }],
            Entries::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        assert_eq!(pc.eval(2.0).unwrap(), Entries::new(0.0, 0.0, 1.0));
        assert!(matches!(pc.eval(0.0), Err(Error::NonPositiveTime(_))));
    }

    #[test]
    fn primitive_examples() {
        let dp = HamiltonianModel::diagonal_power(1.0, 3.0).unwrap();
        let m = dp.primitive(2.0).unwrap();
        assert_eq!((m.m1, m.m2, m.m3), (2.0, 8.0, 0.0));
        let sp = HamiltonianModel::singular_power(1.0, 3.0).unwrap();
        let m = sp.primitive(1.0).unwrap();
        assert!((m.m3 - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let c = HamiltonianModel::piecewise(
            vec![Segment {
                len: 1.0,
                h: Entries::new(0.5, 0.5, 0.5),
            }],
            Entries::new(0.5, 0.5, 0.5),
        )
        .unwrap();
        let m = c.primitive(3.0).unwrap();
        assert_eq!((m.m1, m.m2, m.m3), (1.5, 1.5, 1.5));
    }

    #[test]
    fn singular_power_m3_matches_brute_force() {
        let sp = HamiltonianModel::singular_power(1.0, 3.0).unwrap();
        for &t in &[1e-3, 0.5, 1.0, 7.0] {
            let q = integrate(
                |s| sp.eval(s).unwrap().h3,
                0.0,
                t,
                &[],
                &QuadConfig::with_tol(1e-12),
            )
            .unwrap();
            assert!((q.value - sp.primitive(t).unwrap().m3).abs() < 1e-9);
        }
    }

    #[test]
    fn two_phase_rejects_bad_angles() {
        assert!(HamiltonianModel::two_phase(PI / 2.0, 1.0, BreakpointRule::default()).is_err());
        assert!(HamiltonianModel::two_phase(1.0, 1.0, BreakpointRule::default()).is_err());
        assert!(HamiltonianModel::two_phase(0.0, 1.0, BreakpointRule::default()).is_err());
    }

    #[test]
    fn trace_inverse_round_trip() {
        let models = [
            HamiltonianModel::diagonal_power(1.0, 3.0).unwrap(),
            HamiltonianModel::power_log([1.0, 1.0], [2.0, 0.0]).unwrap(),
            HamiltonianModel::diagonal_power(2.0, 2.0).unwrap(),
        ];
        for m in &models {
            for &x in &[1e-6, 0.3, 2.0, 50.0] {
                let t = m.trace_inverse(x).unwrap();
                let back = m.trace_primitive(t).unwrap();
                assert!((back - x).abs() <= 1e-12 * x.max(1.0), "{} x={x}", m.kind_name());
            }
        }
    }
}
