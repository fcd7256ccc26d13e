//! Concrete Hamiltonian families and their closed-form primitives.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_ur};

use super::{Entries, PrimitiveMatrix};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Pointwise value used for entries that diverge at an isolated point.
pub const SINGULAR_SENTINEL: f64 = 1e30;

/// Breakpoints of an exp-quadratic rule are generated while `c n^2` stays below this.
const EXP_QUADRATIC_CUTOFF: f64 = 690.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub len: f64,
    pub h: Entries,
}

/// `H` constant on consecutive segments starting at `0`, followed by a constant tail.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    segments: Vec<Segment>,
    tail: Entries,
    starts: Vec<f64>,
    cum: Vec<[f64; 3]>,
}

impl PiecewiseConstant {
    pub fn new(segments: Vec<Segment>, tail: Entries) -> Result<Self> {
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.len > 0.0) || !seg.len.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "segment {k} has non-positive length {}",
                    seg.len
                )));
            }
            seg.h.validate(&format!("segment {k}"))?;
            if !(seg.h.trace() > 0.0) {
                return Err(Error::InvalidModel(format!("segment {k} has zero trace")));
            }
        }
        tail.validate("tail")?;
        let mut starts = Vec::with_capacity(segments.len() + 1);
        let mut cum = Vec::with_capacity(segments.len() + 1);
        let (mut s, mut m) = (0.0, [0.0; 3]);
        starts.push(s);
        cum.push(m);
        for seg in &segments {
            s += seg.len;
            m[0] += seg.len * seg.h.h1;
            m[1] += seg.len * seg.h.h3;
            m[2] += seg.len * seg.h.h2;
            starts.push(s);
            cum.push(m);
        }
        Ok(PiecewiseConstant {
            segments,
            tail,
            starts,
            cum,
        })
    }

    pub fn constant(h: Entries) -> Result<Self> {
        Self::new(Vec::new(), h)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tail(&self) -> Entries {
        self.tail
    }

    /// Start of the tail.
    pub fn tail_start(&self) -> f64 {
        *self.starts.last().expect("starts is never empty")
    }

    /// Segment start points, beginning with `0`.
    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    fn locate(&self, t: f64) -> usize {
        // index k with t in [starts[k], starts[k+1]); k == segments.len() means tail
        self.starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> Entries {
        let k = self.locate(t);
        self.segments.get(k).map(|s| s.h).unwrap_or(self.tail)
    }

    pub fn primitive(&self, t: f64) -> PrimitiveMatrix {
        let k = self.locate(t);
        let h = self.segments.get(k).map(|s| s.h).unwrap_or(self.tail);
        let dt = t - self.starts[k];
        let c = self.cum[k];
        PrimitiveMatrix {
            t,
            m1: c[0] + dt * h.h1,
            m3: c[1] + dt * h.h3,
            m2: c[2] + dt * h.h2,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn limit_point(&self) -> bool {
        self.tail.trace() > 0.0
    }

    /// Inverse of `t -> m1(t) + m2(t)`, exact by linear interpolation.
    pub fn trace_inverse(&self, x: f64) -> Option<f64> {
        let traces: Vec<f64> = self.cum.iter().map(|c| c[0] + c[2]).collect();
        let k = traces.partition_point(|&v| v <= x).saturating_sub(1);
        let h = self.segments.get(k).map(|s| s.h).unwrap_or(self.tail);
        let tr = h.trace();
        if tr <= 0.0 {
            return None;
        }
        Some(self.starts[k] + (x - traces[k]) / tr)
    }
}

/// `h_j(t) = t^{a_j - 1} |log t|^{b_j}` with averaged exponents off the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLog {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl PowerLog {
    pub fn new(alpha: [f64; 2], beta: [f64; 2]) -> Result<Self> {
        if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidModel(format!("power_log alpha must be positive, got {alpha:?}")));
        }
        if beta.iter().any(|&b| !(b > -1.0) || !b.is_finite()) {
            return Err(Error::InvalidModel(format!("power_log beta must exceed -1, got {beta:?}")));
        }
        Ok(PowerLog { alpha, beta })
    }

    pub fn alpha3(&self) -> f64 {
        0.5 * (self.alpha[0] + self.alpha[1])
    }

    pub fn beta3(&self) -> f64 {
        0.5 * (self.beta[0] + self.beta[1])
    }

    pub fn eval(&self, t: f64) -> Entries {
        let h1 = power_log_density(self.alpha[0], self.beta[0], t);
        let h2 = power_log_density(self.alpha[1], self.beta[1], t);
        // t^{a3-1}|log t|^{b3} is exactly the geometric mean of the diagonal
        Entries::new(h1, (h1 * h2).sqrt(), h2)
    }

    pub fn primitive(&self, t: f64, tol: f64) -> Result<PrimitiveMatrix> {
        Ok(PrimitiveMatrix {
            t,
            m1: power_log_primitive(self.alpha[0], self.beta[0], t, tol)?,
            m3: power_log_primitive(self.alpha3(), self.beta3(), t, tol)?,
            m2: power_log_primitive(self.alpha[1], self.beta[1], t, tol)?,
        })
    }
}

fn power_log_density(alpha: f64, beta: f64, t: f64) -> f64 {
    let l = t.ln().abs();
    if l == 0.0 {
        return match beta {
            b if b < 0.0 => SINGULAR_SENTINEL,
            b if b == 0.0 => 1.0,
            _ => 0.0,
        };
    }
    let v = t.powf(alpha - 1.0) * l.powf(beta);
    v.min(SINGULAR_SENTINEL)
}

/// `int_0^t s^{alpha-1} |log s|^beta ds`.
///
/// Closed form for integer `beta`; otherwise an incomplete gamma function on
/// `(0, 1]` and a singularity-free substitution `v = u^{beta+1}` beyond `1`.
pub fn power_log_primitive(alpha: f64, beta: f64, t: f64, tol: f64) -> Result<f64> {
    if beta.fract() == 0.0 && (0.0..=32.0).contains(&beta) {
        return Ok(power_log_primitive_integer(alpha, beta as u32, t));
    }
    let a = beta + 1.0;
    let at_one = gamma(a) / alpha.powf(a);
    if t == 1.0 {
        return Ok(at_one);
    }
    if t < 1.0 {
        let l = -t.ln();
        return Ok(at_one * gamma_ur(a, alpha * l));
    }
    let upper = t.ln().powf(a);
    let p = 1.0 / a;
    let r = integrate(
        |v: f64| (alpha * v.powf(p)).exp(),
        0.0,
        upper,
        &[],
        &QuadConfig::with_tol(tol * a),
    )?;
    Ok(at_one + r.value / a)
}

fn power_log_primitive_integer(alpha: f64, k: u32, t: f64) -> f64 {
    // falling factorials k!/(k-j)!
    let mut falling = 1.0;
    let mut sum = 0.0;
    let l = t.ln();
    let mut fact_k = 1.0;
    for i in 1..=k {
        fact_k *= i as f64;
    }
    let at_one = fact_k / alpha.powi(k as i32 + 1);
    if t <= 1.0 {
        let lm = -l;
        for j in 0..=k {
            sum += falling * lm.powi((k - j) as i32) / alpha.powi(j as i32 + 1);
            falling *= (k - j) as f64;
        }
        t.powf(alpha) * sum
    } else {
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * falling * l.powi((k - j) as i32) / alpha.powi(j as i32 + 1);
            falling *= (k - j) as f64;
        }
        let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
        at_one + t.powf(alpha) * sum - sign_k * at_one
    }
}

/// Rule producing the decreasing breakpoints `t_1 > t_2 > ...` of a two-phase Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub enum BreakpointRule {
    /// `t_n = exp(-c n^2)`.
    ExpQuadratic(f64),
    Explicit(Vec<f64>),
}

impl Default for BreakpointRule {
    fn default() -> Self {
        BreakpointRule::ExpQuadratic(1.0)
    }
}

/// Trace-normalised Hamiltonian of rank one whose direction jumps between two
/// angles on the bands `[t_n, t_{n-1})`, with angle `phi_plus` on even `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseRotation {
    phi_plus: f64,
    phi_minus: f64,
    rule: BreakpointRule,
    breaks: Vec<f64>,
    cum: Vec<[f64; 3]>,
}

impl TwoPhaseRotation {
    pub fn new(phi_plus: f64, phi_minus: f64, rule: BreakpointRule) -> Result<Self> {
        for (name, phi) in [("phi_plus", phi_plus), ("phi_minus", phi_minus)] {
            if !(phi > 0.0 && phi < std::f64::consts::PI) || phi == FRAC_PI_2 {
                return Err(Error::InvalidModel(format!("{name} = {phi} outside (0, pi) minus pi/2")));
            }
        }
        if phi_plus == phi_minus {
            return Err(Error::InvalidModel("phi_plus and phi_minus must differ".into()));
        }
        let breaks = match &rule {
            BreakpointRule::ExpQuadratic(c) => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(Error::InvalidModel(format!("exp_quadratic rate must be positive, got {c}")));
                }
                (1..)
                    .map(|n: u32| c * (n as f64).powi(2))
                    .take_while(|&e| e <= EXP_QUADRATIC_CUTOFF)
                    .map(|e| (-e).exp())
                    .collect::<Vec<_>>()
            }
            BreakpointRule::Explicit(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidModel("explicit breakpoint list is empty".into()));
                }
                if list.iter().any(|&t| !(t > 0.0) || !t.is_finite()) || list.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::InvalidModel(
                        "explicit breakpoints must be positive and strictly decreasing".into(),
                    ));
                }
                list.clone()
            }
        };
        let mut model = TwoPhaseRotation {
            phi_plus,
            phi_minus,
            rule,
            breaks,
            cum: Vec::new(),
        };
        model.cum = model.cumulative();
        Ok(model)
    }

    pub fn phi_plus(&self) -> f64 {
        self.phi_plus
    }

    pub fn phi_minus(&self) -> f64 {
        self.phi_minus
    }

    pub fn rule(&self) -> &BreakpointRule {
        &self.rule
    }

    /// `t_1 > t_2 > ... > t_N`.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// `t_n` for `n >= 1`, or `None` beyond the generated range.
    pub fn t(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(f64::INFINITY);
        }
        self.breaks.get(n - 1).copied()
    }

    /// The constant values `c_+` and `c_-` taken by the signed diagonal ratio.
    pub fn c_plus_minus(&self) -> (f64, f64) {
        let c = |phi: f64| (FRAC_PI_2 - phi).signum() * phi.tan().powi(2);
        (c(self.phi_plus), c(self.phi_minus))
    }

    fn band_entries(&self, n: usize) -> Entries {
        let phi = if n % 2 == 0 { self.phi_plus } else { self.phi_minus };
        let (s, c) = phi.sin_cos();
        Entries::new(c * c, c * s, s * s)
    }

    /// Band index `n` with `t in [t_n, t_{n-1})`; `N + 1` below the last breakpoint.
    pub fn band(&self, t: f64) -> usize {
        self.breaks.partition_point(|&b| b > t) + 1
    }

    fn cumulative(&self) -> Vec<[f64; 3]> {
        // cum[n-1] = M(t_n)
        let n_max = self.breaks.len();
        let mut cum = vec![[0.0; 3]; n_max];
        let mut m = {
            let h = self.band_entries(n_max + 1);
            let t = self.breaks[n_max - 1];
            [t * h.h1, t * h.h3, t * h.h2]
        };
        cum[n_max - 1] = m;
        for n in (1..n_max).rev() {
            // band n + 1 = [t_{n+1}, t_n)
            let h = self.band_entries(n + 1);
            let len = self.breaks[n - 1] - self.breaks[n];
            m = [m[0] + len * h.h1, m[1] + len * h.h3, m[2] + len * h.h2];
            cum[n - 1] = m;
        }
        cum
    }

    pub fn eval(&self, t: f64) -> Entries {
        self.band_entries(self.band(t))
    }

    pub fn primitive(&self, t: f64) -> PrimitiveMatrix {
        let n = self.band(t);
        let h = self.band_entries(n);
        let (base, start) = if n > self.breaks.len() {
            ([0.0; 3], 0.0)
        } else {
            (self.cum[n - 1], self.breaks[n - 1])
        };
        let dt = t - start;
        PrimitiveMatrix {
            t,
            m1: base[0] + dt * h.h1,
            m3: base[1] + dt * h.h3,
            m2: base[2] + dt * h.h2,
        }
    }
}

/// Trace-normalised Hamiltonian `Gamma[sigma, zeta]` from piecewise-constant tables.
///
/// `knots` are increasing; value `k` applies on `[knots[k-1], knots[k])` with
/// `knots[-1] = 0` and the last value extended to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaForm {
    knots: Vec<f64>,
    sigma: Vec<f64>,
    zeta: Vec<Complex64>,
    pc: PiecewiseConstant,
}

impl GammaForm {
    pub fn new(knots: Vec<f64>, sigma: Vec<f64>, zeta: Vec<Complex64>) -> Result<Self> {
        if sigma.len() != knots.len() + 1 || zeta.len() != knots.len() + 1 {
            return Err(Error::RangeError(format!(
                "tables need {} values, got sigma {} and zeta {}",
                knots.len() + 1,
                sigma.len(),
                zeta.len()
            )));
        }
        if knots.iter().any(|&k| !(k > 0.0) || !k.is_finite()) || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::RangeError("knots must be positive and strictly increasing".into()));
        }
        for (&s, z) in sigma.iter().zip(&zeta) {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::RangeError(format!("sigma = {s} outside [0, 1]")));
            }
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::RangeError(format!("zeta = {z} is not unimodular")));
            }
        }
        let mut segments = Vec::with_capacity(knots.len());
        let mut prev = 0.0;
        for (k, &knot) in knots.iter().enumerate() {
            segments.push(Segment {
                len: knot - prev,
                h: gamma_entries(sigma[k], zeta[k]),
            });
            prev = knot;
        }
        let tail = gamma_entries(sigma[knots.len()], zeta[knots.len()]);
        let pc = PiecewiseConstant::new(segments, tail)?;
        Ok(GammaForm { knots, sigma, zeta, pc })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn zeta(&self) -> &[Complex64] {
        &self.zeta
    }

    fn index(&self, t: f64) -> usize {
        self.knots.partition_point(|&k| k <= t)
    }

    pub fn eval(&self, t: f64) -> Entries {
        let k = self.index(t);
        gamma_entries(self.sigma[k], self.zeta[k])
    }

    pub fn primitive(&self, t: f64) -> PrimitiveMatrix {
        self.pc.primitive(t)
    }
}

/// `Gamma[sigma, zeta] = 1/2 [[1 + Re zeta, sigma Im zeta], [sigma Im zeta, 1 - Re zeta]]`.
pub fn gamma_entries(sigma: f64, zeta: Complex64) -> Entries {
    Entries::new(
        0.5 * (1.0 + zeta.re),
        0.5 * sigma * zeta.im,
        0.5 * (1.0 - zeta.re),
    )
}
