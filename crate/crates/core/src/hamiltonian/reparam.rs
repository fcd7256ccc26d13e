//! Reparameterisations `H(phi(x)) phi'(x)` and weighted rescalings.

use super::{Entries, HamiltonianModel, PiecewiseConstant, PrimitiveMatrix, Segment};
use crate::error::{Error, Result};

/// Strictly increasing piecewise-linear map through the origin, extended
/// beyond the last knot with the last slope.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Tabulated {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NotMonotone("tabulated map needs at least one knot".into()));
        }
        let mut xs = vec![0.0];
        let mut ys = vec![0.0];
        for (x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NotMonotone(format!("non-finite knot ({x}, {y})")));
            }
            if x <= *xs.last().unwrap() || y <= *ys.last().unwrap() {
                return Err(Error::NotMonotone(format!("knot ({x}, {y}) breaks strict monotonicity")));
            }
            xs.push(x);
            ys.push(y);
        }
        Ok(Tabulated { xs, ys })
    }

    /// Knots including the origin.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn seg(v: &[f64], x: f64) -> usize {
        v.partition_point(|&k| k <= x).saturating_sub(1).min(v.len() - 2)
    }

    fn slope(&self, k: usize) -> f64 {
        (self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k])
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return x;
        }
        let k = Self::seg(&self.xs, x);
        self.ys[k] + self.slope(k) * (x - self.xs[k])
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.slope(Self::seg(&self.xs, x))
    }

    pub fn inverse(&self, y: f64) -> f64 {
        if y.is_infinite() {
            return y;
        }
        let k = Self::seg(&self.ys, y);
        self.xs[k] + (y - self.ys[k]) / self.slope(k)
    }

    fn knots(&self) -> &[f64] {
        &self.xs[1..]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneMap {
    /// `t -> c t`.
    Affine(f64),
    /// `t -> t^p`.
    Power(f64),
    Tabulated(Tabulated),
    /// Inverse of the trace primitive of the base model.
    TraceInverse,
}

impl MonotoneMap {
    fn validate(&self) -> Result<()> {
        match self {
            MonotoneMap::Affine(c) if !(*c > 0.0 && c.is_finite()) => {
                Err(Error::NotMonotone(format!("affine factor {c} must be positive")))
            }
            MonotoneMap::Power(p) if !(*p > 0.0 && p.is_finite()) => {
                Err(Error::NotMonotone(format!("power exponent {p} must be positive")))
            }
            _ => Ok(()),
        }
    }

    fn is_identity(&self) -> bool {
        matches!(self, MonotoneMap::Affine(c) | MonotoneMap::Power(c) if *c == 1.0)
    }
}

/// `x -> H(phi(x)) phi'(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparameterized {
    pub base: HamiltonianModel,
    pub map: MonotoneMap,
}

impl Reparameterized {
    pub fn phi(&self, x: f64) -> Result<f64> {
        Ok(match &self.map {
            MonotoneMap::Affine(c) => c * x,
            MonotoneMap::Power(p) => x.powf(*p),
            MonotoneMap::Tabulated(tab) => tab.apply(x),
            MonotoneMap::TraceInverse => {
                if x.is_infinite() {
                    x
                } else {
                    self.base.trace_inverse(x)?
                }
            }
        })
    }

    pub fn phi_inverse(&self, t: f64) -> Result<f64> {
        Ok(match &self.map {
            MonotoneMap::Affine(c) => t / c,
            MonotoneMap::Power(p) => t.powf(1.0 / p),
            MonotoneMap::Tabulated(tab) => tab.inverse(t),
            MonotoneMap::TraceInverse => {
                if t.is_infinite() {
                    t
                } else {
                    self.base.trace_primitive(t)?
                }
            }
        })
    }

    pub(super) fn eval(&self, x: f64) -> Result<Entries> {
        let t = self.phi(x)?;
        let h = self.base.eval(t)?;
        let dphi = match &self.map {
            MonotoneMap::Affine(c) => *c,
            MonotoneMap::Power(p) => p * x.powf(p - 1.0),
            MonotoneMap::Tabulated(tab) => tab.derivative(x),
            MonotoneMap::TraceInverse => return Ok(h.scale(1.0 / h.trace())),
        };
        Ok(h.scale(dphi))
    }

    pub(super) fn primitive(&self, x: f64, tol: f64) -> Result<PrimitiveMatrix> {
        let m = self.base.primitive_tol(self.phi(x)?, tol)?;
        Ok(PrimitiveMatrix { t: x, ..m })
    }

    pub(super) fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (Ok(a), Ok(b)) = (self.phi(lo), self.phi(hi)) else {
            return Vec::new();
        };
        let mut out: Vec<f64> = self
            .base
            .breakpoints(a, b)
            .into_iter()
            .filter_map(|t| self.phi_inverse(t).ok())
            .collect();
        if let MonotoneMap::Tabulated(tab) = &self.map {
            out.extend(tab.knots().iter().copied());
        }
        out.retain(|v| *v > lo && *v < hi);
        out
    }

    pub(super) fn is_piecewise_constant(&self) -> bool {
        match self.map {
            MonotoneMap::Power(p) => p == 1.0 && self.base.is_piecewise_constant(),
            _ => self.base.is_piecewise_constant(),
        }
    }
}

/// `t -> (s g1 h1(st), s g3 h3(st), s g2 h2(st))` with `g3 = sqrt(g1 g2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub base: HamiltonianModel,
    pub s: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Rescaled {
    pub fn new(base: HamiltonianModel, s: f64, g1: f64, g2: f64) -> Result<Self> {
        if ![s, g1, g2].iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidModel(format!("rescaling needs positive s, g1, g2; got {s}, {g1}, {g2}")));
        }
        Ok(Rescaled { base, s, g1, g2 })
    }

    pub fn g3(&self) -> f64 {
        (self.g1 * self.g2).sqrt()
    }

    pub(super) fn eval(&self, t: f64) -> Result<Entries> {
        let h = self.base.eval(self.s * t)?;
        Ok(Entries::new(
            self.s * self.g1 * h.h1,
            self.s * self.g3() * h.h3,
            self.s * self.g2 * h.h2,
        ))
    }

    pub(super) fn primitive(&self, t: f64, tol: f64) -> Result<PrimitiveMatrix> {
        let m = self.base.primitive_tol(self.s * t, tol)?;
        Ok(PrimitiveMatrix {
            t,
            m1: self.g1 * m.m1,
            m3: self.g3() * m.m3,
            m2: self.g2 * m.m2,
        })
    }

    pub(super) fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.base
            .breakpoints(self.s * lo, self.s * hi)
            .into_iter()
            .map(|t| t / self.s)
            .filter(|v| *v > lo && *v < hi)
            .collect()
    }
}

/// `H(phi(x)) phi'(x)`, exact where the family is closed under `phi`.
pub fn reparameterize(h: &HamiltonianModel, map: MonotoneMap) -> Result<HamiltonianModel> {
    map.validate()?;
    if map.is_identity() {
        return Ok(h.clone());
    }
    match (h, &map) {
        (HamiltonianModel::PiecewiseConstant(pc), MonotoneMap::Affine(c)) => {
            let segments = pc
                .segments()
                .iter()
                .map(|s| Segment {
                    len: s.len / c,
                    h: s.h.scale(*c),
                })
                .collect();
            Ok(HamiltonianModel::PiecewiseConstant(PiecewiseConstant::new(
                segments,
                pc.tail().scale(*c),
            )?))
        }
        (HamiltonianModel::DiagonalPower { rho }, MonotoneMap::Power(p)) => {
            HamiltonianModel::diagonal_power(rho[0] * p, rho[1] * p)
        }
        (HamiltonianModel::SingularPower { rho }, MonotoneMap::Power(p)) => {
            HamiltonianModel::singular_power(rho[0] * p, rho[1] * p)
        }
        _ => Ok(HamiltonianModel::Reparameterized(Box::new(Reparameterized {
            base: h.clone(),
            map,
        }))),
    }
}

/// The trace-normalised representative of the reparameterisation class of `h`.
pub fn trace_reparameterize(h: &HamiltonianModel) -> Result<HamiltonianModel> {
    if !h.limit_point_declared() {
        return Err(Error::NotLimitPoint);
    }
    if h.is_trace_normalized() {
        return Ok(h.clone());
    }
    match h {
        HamiltonianModel::PiecewiseConstant(pc) => {
            let segments = pc
                .segments()
                .iter()
                .map(|s| {
                    let tr = s.h.trace();
                    Segment {
                        len: s.len * tr,
                        h: s.h.scale(1.0 / tr),
                    }
                })
                .collect();
            let tail = pc.tail();
            Ok(HamiltonianModel::PiecewiseConstant(PiecewiseConstant::new(
                segments,
                tail.scale(1.0 / tail.trace()),
            )?))
        }
        HamiltonianModel::DiagonalPower { rho } if rho[0] == rho[1] => HamiltonianModel::constant(0.5, 0.0, 0.5),
        HamiltonianModel::SingularPower { rho } if rho[0] == rho[1] => HamiltonianModel::constant(0.5, 0.5, 0.5),
        HamiltonianModel::Reparameterized(r) => trace_reparameterize(&r.base),
        _ => Ok(HamiltonianModel::Reparameterized(Box::new(Reparameterized {
            base: h.clone(),
            map: MonotoneMap::TraceInverse,
        }))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::BreakpointRule;

    #[test]
    fn affine_on_constant_is_exact() {
        let h = HamiltonianModel::constant(0.5, 0.5, 0.5).unwrap();
        let r = reparameterize(&h, MonotoneMap::Affine(2.0)).unwrap();
        assert_eq!(r.as_constant(), Some(Entries::new(1.0, 1.0, 1.0)));
    }

    #[test]
    fn power_on_diagonal_power() {
        let h = HamiltonianModel::diagonal_power(1.0, 3.0).unwrap();
        let r = reparameterize(&h, MonotoneMap::Power(2.0)).unwrap();
        for &x in &[0.1, 0.7, 2.0] {
            let e = r.eval(x).unwrap();
            assert!((e.h1 - 2.0 * x).abs() < 1e-14);
            assert!((e.h2 - 6.0 * x.powi(5)).abs() < 1e-12 * x.powi(5).max(1.0));
            let m = r.primitive(x).unwrap();
            let mb = h.primitive(x * x).unwrap();
            assert!((m.m1 - mb.m1).abs() < 1e-14 && (m.m2 - mb.m2).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_map_returns_clone() {
        let h = HamiltonianModel::power_log([1.0, 1.0], [2.0, 0.0]).unwrap();
        assert_eq!(reparameterize(&h, MonotoneMap::Affine(1.0)).unwrap(), h);
        assert_eq!(reparameterize(&h, MonotoneMap::Power(1.0)).unwrap(), h);
    }

    #[test]
    fn rejects_non_monotone_maps() {
        let h = HamiltonianModel::constant(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            reparameterize(&h, MonotoneMap::Affine(-1.0)),
            Err(Error::NotMonotone(_))
        ));
        assert!(matches!(
            Tabulated::new(vec![(1.0, 2.0), (2.0, 1.0)]),
            Err(Error::NotMonotone(_))
        ));
    }

    #[test]
    fn trace_reparameterize_piecewise_segment() {
        let h = HamiltonianModel::piecewise(
            vec![Segment {
                len: 1.0,
                h: Entries::new(2.0, 0.0, 0.0),
            }],
            Entries::new(0.5, 0.5, 0.5),
        )
        .unwrap();
        let HamiltonianModel::PiecewiseConstant(pc) = trace_reparameterize(&h).unwrap() else {
            panic!("expected piecewise");
        };
        assert_eq!(pc.segments()[0].len, 2.0);
        assert_eq!(pc.segments()[0].h, Entries::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn trace_reparameterize_fixed_points_and_wrapper() {
        let tp = HamiltonianModel::two_phase(1.0, 2.0, BreakpointRule::default()).unwrap();
        assert_eq!(trace_reparameterize(&tp).unwrap(), tp);
        let half = HamiltonianModel::constant(0.5, 0.0, 0.5).unwrap();
        assert_eq!(trace_reparameterize(&half).unwrap(), half);
        let dp = HamiltonianModel::diagonal_power(1.0, 3.0).unwrap();
        let n = trace_reparameterize(&dp).unwrap();
        for &x in &[1e-4, 0.5, 3.0, 100.0] {
            assert!((n.eval(x).unwrap().trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tail_is_not_limit_point() {
        let h = HamiltonianModel::piecewise(
            vec![Segment {
                len: 1.0,
                h: Entries::new(1.0, 0.0, 0.0),
            }],
            Entries::new(0.0, 0.0, 0.0),
        )
        .unwrap();
        assert!(matches!(trace_reparameterize(&h), Err(Error::NotLimitPoint)));
    }

    #[test]
    fn tabulated_map_round_trip() {
        let tab = Tabulated::new(vec![(1.0, 2.0), (3.0, 3.0)]).unwrap();
        for &x in &[0.5, 1.0, 2.0, 10.0] {
            assert!((tab.inverse(tab.apply(x)) - x).abs() < 1e-14);
        }
        assert_eq!(tab.derivative(0.5), 2.0);
        assert_eq!(tab.derivative(5.0), 0.5);
    }

    #[test]
    fn rescaled_primitive_rule() {
        let h = HamiltonianModel::diagonal_power(1.0, 3.0).unwrap();
        let s = 0.1;
        let r = Rescaled::new(h.clone(), s, 1.0 / s, 1.0 / s.powi(3)).unwrap();
        let m = r.primitive(2.0, 1e-12).unwrap();
        assert!((m.m1 - 2.0).abs() < 1e-14);
        assert!((m.m2 - 8.0).abs() < 1e-12);
    }
}
