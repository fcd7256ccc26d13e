//! Fundamental solutions, Weyl discs and Weyl coefficients.
//!
//! The fundamental solution solves `W' = -z W H J` with `W(0) = I` and
//! `J = [[0, -1], [1, 0]]`. Its Möbius map
//! `zeta -> (w11 zeta + w12) / (w21 zeta + w22)` sends the closed upper
//! half-plane onto a disc; the discs shrink to the Weyl coefficient as the
//! truncation point grows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Entries, HamiltonianModel, PrimitiveMatrix};
use crate::linalg::Mat2;

/// Rescale the accumulator once an entry exceeds this magnitude.
const RENORMALIZE_AT: f64 = 1e150;
/// Relative collinearity threshold of the three boundary points.
const COLLINEAR_TOL: f64 = 1e-14;
/// Largest schedule exponent: truncation points run up to `2^40` trace units.
pub const MAX_DOUBLINGS: u32 = 40;

/// Budget of Magnus steps of one propagator; beyond it the disc is left as is.
pub const MAX_STEPS: usize = 1 << 20;

/// Largest `|Re mu|` of a single exponential factor.
const MAX_GROWTH_EXPONENT: f64 = 64.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalSolution {
    pub t: f64,
    pub z: Complex64,
    /// `W(t, z)` divided by `exp(log_scale)`.
    pub w: Mat2,
    pub log_scale: f64,
}

impl FundamentalSolution {
    /// `|det W - 1|` measured against the size of the products that cancel in it.
    pub fn det_deviation(&self) -> f64 {
        let target = (-2.0 * self.log_scale).exp();
        let ad = (self.w.a * self.w.d).norm();
        let bc = (self.w.b * self.w.c).norm();
        (self.w.det() - target).norm() / target.max(ad).max(bc)
    }

    /// Möbius image of `zeta`; `None` when it is the point at infinity.
    pub fn mobius(&self, zeta: Complex64) -> Option<Complex64> {
        let num = self.w.a * zeta + self.w.b;
        let den = self.w.c * zeta + self.w.d;
        finite_ratio(num, den)
    }

    /// Image of `zeta = inf`.
    pub fn mobius_at_infinity(&self) -> Option<Complex64> {
        finite_ratio(self.w.a, self.w.c)
    }
}

fn finite_ratio(num: Complex64, den: Complex64) -> Option<Complex64> {
    if den == Complex64::new(0.0, 0.0) {
        return None;
    }
    let q = num / den;
    (q.re.is_finite() && q.im.is_finite()).then_some(q)
}

/// Image of the closed upper half-plane at truncation `t`.
///
/// A half-plane image is reported with `radius = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylDisc {
    pub t: f64,
    pub z: Complex64,
    pub center: Complex64,
    pub radius: f64,
}

impl WeylDisc {
    pub fn is_half_plane(&self) -> bool {
        self.radius.is_infinite()
    }

    pub fn contains(&self, q: Complex64, slack: f64) -> bool {
        (q - self.center).norm() <= self.radius + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NevanlinnaSample {
    pub z: Complex64,
    /// Non-finite components encode `q = inf`.
    pub q: Complex64,
    pub err: f64,
    pub t_used: f64,
}

impl NevanlinnaSample {
    pub fn is_infinite(&self) -> bool {
        !(self.q.re.is_finite() && self.q.im.is_finite())
    }
}

fn generator(z: Complex64, h: &Entries) -> Mat2 {
    // -z H J with H J = [[h3, -h1], [h2, -h3]]
    let m = -z;
    Mat2::new(m * h.h3, -m * h.h1, m * h.h2, -m * h.h3)
}

fn generator_of_increment(z: Complex64, a: &PrimitiveMatrix, b: &PrimitiveMatrix) -> Mat2 {
    let d = Entries::new(b.m1 - a.m1, b.m3 - a.m3, b.m2 - a.m2);
    generator(z, &d)
}

/// Incremental propagation of `W` along increasing truncation points.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    model: &'a HamiltonianModel,
    z: Complex64,
    tol: f64,
    t: f64,
    w: Mat2,
    log_scale: f64,
    m_t: PrimitiveMatrix,
    h_guess: Option<f64>,
    // start, W, log scale and entries of the open piece of a piecewise model
    anchor: Option<(f64, Mat2, f64, Entries)>,
    steps: usize,
    // W of a reparameterised model is W of its base at phi(t)
    base: Option<Box<Propagator<'a>>>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a HamiltonianModel, z: Complex64, tol: f64) -> Self {
        Propagator {
            model,
            z,
            tol,
            t: 0.0,
            w: Mat2::identity(),
            log_scale: 0.0,
            m_t: PrimitiveMatrix::zero(),
            h_guess: None,
            anchor: None,
            steps: 0,
            base: match model {
                HamiltonianModel::Reparameterized(r) => Some(Box::new(Propagator::new(&r.base, z, tol))),
                _ => None,
            },
        }
    }

    /// Integrates the model's own entries even for a reparameterisation.
    pub fn direct(model: &'a HamiltonianModel, z: Complex64, tol: f64) -> Self {
        Propagator {
            base: None,
            ..Propagator::new(model, z, tol)
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn solution(&self) -> FundamentalSolution {
        FundamentalSolution {
            t: self.t,
            z: self.z,
            w: self.w,
            log_scale: self.log_scale,
        }
    }

    /// Apply `exp(omega)`; a large growth factor `e^mu` goes into the scale.
    fn apply_exp(&mut self, omega: Mat2, mu: Complex64) {
        let (e, log) = scaled_exp(omega, mu);
        self.log_scale += log;
        self.apply(e);
    }

    fn apply(&mut self, e: Mat2) {
        self.w = self.w * e;
        let m = self.w.max_abs();
        if m > RENORMALIZE_AT {
            self.w = self.w.scale(Complex64::new(1.0 / m, 0.0));
            self.log_scale += m.ln();
        }
    }

    /// Continue the propagation up to `target >= self.t()`.
    pub fn advance_to(&mut self, target: f64) -> Result<FundamentalSolution> {
        if !(target > 0.0) {
            return Err(Error::NonPositiveTime(target));
        }
        if target <= self.t {
            return Ok(self.solution());
        }
        if let (Some(base), HamiltonianModel::Reparameterized(r)) = (self.base.as_mut(), self.model) {
            let sol = base.advance_to(r.phi(target)?)?;
            self.w = sol.w;
            self.log_scale = sol.log_scale;
            self.t = target;
            return Ok(self.solution());
        }
        let mut edges = vec![self.t];
        edges.extend(self.model.breakpoints(self.t, target));
        edges.push(target);
        if self.model.is_piecewise_constant() {
            // W on the open piece is recomputed from its start, so long constant
            // tails cost one product instead of a chain of large factors
            for w in edges.windows(2) {
                let h = self.model.eval(0.5 * (w[0] + w[1]))?;
                let (start, w0, log0) = match self.anchor {
                    Some((s, w0, l0, ha)) if ha == h && s <= w[0] => (s, w0, l0),
                    _ => (w[0], self.w, self.log_scale),
                };
                self.anchor = Some((start, w0, log0, h));
                self.w = w0;
                self.log_scale = log0;
                // mu^2 = -det(-z dt H J) = -z^2 dt^2 det H, exact zero for rank-one H
                let dt = w[1] - start;
                let mu = (-self.z * self.z * (dt * dt * h.det())).sqrt();
                self.apply_exp(generator(self.z, &h.scale(dt)), mu);
            }
            self.t = target;
            self.m_t = self.model.primitive(target)?;
            return Ok(self.solution());
        }
        for w in edges.windows(2) {
            self.smooth_segment(w[0], w[1])?;
        }
        if !self.w.is_finite() || self.w.max_abs() == 0.0 {
            return Err(Error::StepFailure { t: self.t });
        }
        Ok(self.solution())
    }

    fn step_tol(&self) -> f64 {
        (0.01 * self.tol).clamp(1e-13, 1e-9)
    }

    fn omega(&self, a: f64, b: f64, ma: &PrimitiveMatrix, mb: &PrimitiveMatrix) -> Result<Mat2> {
        let h = b - a;
        let g1 = a + (0.5 - SQRT3 / 6.0) * h;
        let g2 = a + (0.5 + SQRT3 / 6.0) * h;
        let a1 = generator(self.z, &self.model.eval(g1)?);
        let a2 = generator(self.z, &self.model.eval(g2)?);
        let corr = a1.commutator(&a2).scale(Complex64::new(SQRT3 / 12.0 * h * h, 0.0));
        Ok(generator_of_increment(self.z, ma, mb) + corr)
    }

    /// Fourth-order Magnus steps with exact increments of `M` on `(a, b)`.
    fn smooth_segment(&mut self, a: f64, b: f64) -> Result<()> {
        let tol = self.step_tol();
        let mut x = a;
        if x == 0.0 {
            // exact average over an initial interval on which |z| tr M is tiny
            let scale = self.z.norm().max(1e-300);
            let small = self.model.trace_inverse(0.1 * tol.sqrt() / scale)?;
            let t0 = small.min(b);
            let m0 = self.model.primitive(t0)?;
            let omega = generator_of_increment(self.z, &PrimitiveMatrix::zero(), &m0);
            self.apply_exp(omega, (-omega.det()).sqrt());
            x = t0;
            self.t = x;
            self.m_t = m0;
            self.h_guess.get_or_insert(t0);
        }
        let mut h = self.h_guess.unwrap_or(b - a).min(b - x);
        while x < b {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(Error::StepFailure { t: x });
            }
            let last = x + h >= b * (1.0 - 1e-14);
            let end = if last { b } else { x + h };
            let h_eff = end - x;
            let mid = x + 0.5 * h_eff;
            let m_mid = self.model.primitive(mid)?;
            let m_end = self.model.primitive(end)?;
            let omega_full = self.omega(x, end, &self.m_t, &m_end)?;
            if (-omega_full.det()).sqrt().re.abs() > MAX_GROWTH_EXPONENT && !last_retry(h_eff, x) {
                h = 0.5 * h_eff;
                continue;
            }
            let full = omega_full.expm_traceless();
            let half =
                self.omega(x, mid, &self.m_t, &m_mid)?.expm_traceless() * self.omega(mid, end, &m_mid, &m_end)?.expm_traceless();
            let err = (full - half).max_abs() / half.max_abs().max(1.0);
            if !err.is_finite() {
                return Err(Error::StepFailure { t: x });
            }
            // increments M(b) - M(a) carry an absolute rounding of about
            // eps |z| tr M(b); no step size gets below that
            let floor = 64.0 * f64::EPSILON * self.z.norm() * (m_end.m1 + m_end.m2);
            let tol = tol.max(floor);
            let factor = if err == 0.0 { 4.0 } else { 0.9 * (tol / err).powf(0.2) };
            if err <= tol {
                self.apply(half);
                x = end;
                self.t = end;
                self.m_t = m_end;
                h = h_eff * factor.clamp(0.2, 4.0);
                self.h_guess = Some(h);
            } else {
                h = h_eff * factor.clamp(0.1, 0.9);
                if h <= 4.0 * f64::EPSILON * x {
                    return Err(Error::StepFailure { t: x });
                }
            }
        }
        Ok(())
    }
}

/// `exp(omega) = e^log * e` for trace-free `omega`.
fn scaled_exp(omega: Mat2, mu: Complex64) -> (Mat2, f64) {
    let mu = if mu.re < 0.0 { -mu } else { mu };
    if mu.re <= MAX_GROWTH_EXPONENT {
        return (omega.expm_traceless_with(mu), 0.0);
    }
    // exp(omega) = e^mu (I + omega/mu)/2 + e^-mu (I - omega/mu)/2
    let half = Complex64::new(0.5, 0.0);
    let p = (Mat2::identity() + omega.scale(mu.inv())).scale(half);
    let m = (Mat2::identity() - omega.scale(mu.inv())).scale(half * (-2.0 * mu).exp());
    let phase = Complex64::from_polar(1.0, mu.im);
    ((p + m).scale(phase), mu.re)
}

fn last_retry(h: f64, x: f64) -> bool {
    h <= 4.0 * f64::EPSILON * x
}

/// `W(t, z)` for the given truncation point.
pub fn propagate(h: &HamiltonianModel, t: f64, z: Complex64, tol: f64) -> Result<FundamentalSolution> {
    Propagator::new(h, z, tol).advance_to(t)
}

/// Circle through three points; `None` if they are (nearly) collinear.
pub fn circumcircle(p0: Complex64, p1: Complex64, p2: Complex64) -> Option<(Complex64, f64)> {
    let a = p1 - p0;
    let b = p2 - p0;
    let cross = (a.conj() * b).im;
    if cross.abs() <= COLLINEAR_TOL * a.norm() * b.norm() {
        return None;
    }
    let c = (b * a.norm_sqr() - a * b.norm_sqr()) / Complex64::new(0.0, 2.0 * cross);
    Some((p0 + c, c.norm()))
}

/// Circumcircle of the images of `zeta in {0, 1, inf}`.
///
/// Exact in exact arithmetic, but the images of `0` and `inf` approach each
/// other quadratically faster than the radius shrinks, so this loses all
/// accuracy for small discs. Kept as an independent check of [`disc_of`].
pub fn three_point_disc(sol: &FundamentalSolution) -> Option<(Complex64, f64)> {
    circumcircle(
        sol.mobius(Complex64::new(0.0, 0.0))?,
        sol.mobius(Complex64::new(1.0, 0.0))?,
        sol.mobius_at_infinity()?,
    )
}

/// Image of the closed upper half-plane.
///
/// Writing the map as `a/c - det / (c^2 (zeta - p))` with pole `p = -d/c`,
/// the real line goes to the circle with center `a/c - i det / (2 c^2 Im p)`
/// and radius `|det| / (2 |c|^2 |Im p|)`. `det W = 1` is used exactly rather
/// than recomputed from the (cancelling) entries.
pub fn disc_of(sol: &FundamentalSolution) -> WeylDisc {
    let w = &sol.w;
    let half_plane = || WeylDisc {
        t: sol.t,
        z: sol.z,
        center: sol.mobius(Complex64::new(0.0, 1.0)).unwrap_or(Complex64::new(f64::INFINITY, f64::INFINITY)),
        radius: f64::INFINITY,
    };
    if w.c == Complex64::new(0.0, 0.0) {
        return half_plane();
    }
    let v = (-w.d / w.c).im;
    // det of the scaled accumulator is exp(-2 log_scale); stay in logs to avoid underflow
    let radius = (-2.0 * sol.log_scale - (2.0 * w.c.norm_sqr() * v.abs()).ln()).exp();
    let unit = w.c.conj() / w.c;
    let center = w.a / w.c - Complex64::new(0.0, v.signum() * radius) * unit;
    if !radius.is_finite() || !(center.re.is_finite() && center.im.is_finite()) {
        return half_plane();
    }
    WeylDisc {
        t: sol.t,
        z: sol.z,
        center,
        radius,
    }
}

pub fn weyl_disc(h: &HamiltonianModel, t: f64, z: Complex64) -> Result<WeylDisc> {
    check_z(z)?;
    Ok(disc_of(&propagate(h, t, z, 1e-10)?))
}

fn check_z(z: Complex64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::RangeError(format!("spectral parameter {z} must lie in the open upper half-plane")))
    }
}

/// `q_H(z)` by doubling the truncation point until the disc radius is at most `tol`.
///
/// The reported `err` is the final radius plus the distance between the last
/// two centers, which also covers the error of the propagation itself.
pub fn weyl_coefficient(h: &HamiltonianModel, z: Complex64, tol: f64) -> Result<NevanlinnaSample> {
    check_z(z)?;
    if !h.limit_point_declared() {
        return Err(Error::NotLimitPoint);
    }
    let mut prop = Propagator::new(h, z, tol);
    let mut best: Option<NevanlinnaSample> = None;
    let mut prev_center = None;
    for k in 0..=MAX_DOUBLINGS {
        let t = h.trace_inverse(2f64.powi(k as i32))?;
        let sol = match (prop.advance_to(t), best) {
            (Ok(sol), _) => sol,
            (Err(Error::StepFailure { .. }), Some(b)) => return Err(Error::NoConvergence(Box::new(b))),
            (Err(e), _) => return Err(e),
        };
        if sol.mobius_at_infinity().is_none() {
            let reach = [sol.mobius(Complex64::new(0.0, 0.0)), sol.mobius(Complex64::new(1.0, 0.0))]
                .iter()
                .map(|p| p.map_or(f64::INFINITY, |p| p.norm()))
                .fold(f64::INFINITY, f64::min);
            if reach >= 1.0 / tol {
                return Ok(NevanlinnaSample {
                    z,
                    q: Complex64::new(f64::INFINITY, f64::INFINITY),
                    err: 1.0 / reach,
                    t_used: t,
                });
            }
        }
        let disc = disc_of(&sol);
        // centers of nested discs move by at most the old radius; any further
        // drift is propagation error and is charged to the bound
        let drift = prev_center.map_or(f64::INFINITY, |c: Complex64| (disc.center - c).norm());
        prev_center = Some(disc.center);
        let sample = NevanlinnaSample {
            z,
            q: disc.center,
            err: disc.radius + drift,
            t_used: t,
        };
        if sample.err <= tol {
            return Ok(sample);
        }
        if !disc.is_half_plane() && best.map_or(true, |b| sample.err < b.err || b.err.is_nan()) {
            best = Some(sample);
        }
        if best.is_none() {
            best = Some(sample);
        }
    }
    Err(Error::NoConvergence(Box::new(best.expect("at least one truncation point"))))
}

/// Weyl coefficient of a constant Hamiltonian, `None` standing for `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QValue {
    Finite(Complex64),
    Infinity,
}

impl QValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            QValue::Finite(q) => Some(q),
            QValue::Infinity => None,
        }
    }
}

pub fn constant_q(h1: f64, h3: f64, h2: f64) -> QValue {
    let det = h1 * h2 - h3 * h3;
    if det <= 0.0 {
        if h2 == 0.0 {
            QValue::Infinity
        } else {
            QValue::Finite(Complex64::new(h3 / h2, 0.0))
        }
    } else {
        QValue::Finite(Complex64::new(h3, det.sqrt()) / h2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegenerateSide {
    H2Vanishes,
    H1Vanishes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateStart {
    pub side: DegenerateSide,
    pub delta: f64,
    pub trace_integral: f64,
    /// `i int tr H` for a vanishing `h2`, `i / int tr H` for a vanishing `h1`.
    pub limit: Complex64,
    pub y: Vec<f64>,
    /// `q(iy) / y` resp. `y q(iy)`.
    pub values: Vec<Complex64>,
    /// `Im q / |q|` per `y`.
    pub ratios: Vec<f64>,
    /// `|value - limit| / |limit|` at the largest `y`.
    pub rel_deviation: f64,
}

pub const DEGENERATE_Y: [f64; 3] = [1e2, 1e3, 1e4];

/// Compare `q(iy)` on a degenerate start `(0, delta)` against its linear asymptote.
pub fn degenerate_start_asymptote(h: &HamiltonianModel, side: DegenerateSide, tol: f64) -> Result<DegenerateStart> {
    let HamiltonianModel::PiecewiseConstant(pc) = h else {
        return Err(Error::NoDegenerateStart);
    };
    let vanishes = |e: &Entries| match side {
        DegenerateSide::H2Vanishes => e.h2 == 0.0,
        DegenerateSide::H1Vanishes => e.h1 == 0.0,
    };
    let run = pc.segments().iter().take_while(|s| vanishes(&s.h)).count();
    if run == 0 {
        return Err(Error::NoDegenerateStart);
    }
    let delta = pc.starts()[run];
    let trace_integral = h.trace_primitive(delta)?;
    let limit = match side {
        DegenerateSide::H2Vanishes => Complex64::new(0.0, trace_integral),
        DegenerateSide::H1Vanishes => Complex64::new(0.0, 1.0 / trace_integral),
    };
    let mut values = Vec::new();
    let mut ratios = Vec::new();
    for &y in &DEGENERATE_Y {
        let s = weyl_coefficient(h, Complex64::new(0.0, y), tol)?;
        values.push(match side {
            DegenerateSide::H2Vanishes => s.q / y,
            DegenerateSide::H1Vanishes => s.q * y,
        });
        ratios.push(s.q.im / s.q.norm());
    }
    let rel_deviation = (values.last().unwrap() - limit).norm() / limit.norm();
    Ok(DegenerateStart {
        side,
        delta,
        trace_integral,
        limit,
        y: DEGENERATE_Y.to_vec(),
        values,
        ratios,
        rel_deviation,
    })
}
