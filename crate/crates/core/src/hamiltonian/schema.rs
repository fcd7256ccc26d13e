//! JSON description of models.
//!
//! ```json
//! {"kind":"piecewise_constant","segments":[{"len":1.0,"h":[1.0,0.0,0.0]}],"tail":[0.5,0.5,0.5]}
//! {"kind":"two_phase","phi_plus":1.0471975512,"phi_minus":2.0943951024,"t_seq":{"exp_quadratic":1.0}}
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    BreakpointRule, Entries, GammaForm, HamiltonianModel, MonotoneMap, PiecewiseConstant, Reparameterized,
    Rescaled, Segment, Tabulated, TwoPhaseRotation,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub len: f64,
    pub h: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TSeqSpec {
    ExpQuadratic(f64),
    Explicit(Vec<f64>),
}

impl Default for TSeqSpec {
    fn default() -> Self {
        TSeqSpec::ExpQuadratic(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSpec {
    Affine(f64),
    Power(f64),
    Tabulated(Vec<[f64; 2]>),
    TraceInverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    PiecewiseConstant {
        #[serde(default)]
        segments: Vec<SegmentSpec>,
        tail: [f64; 3],
    },
    PowerLog {
        alpha: [f64; 2],
        beta: [f64; 2],
    },
    TwoPhase {
        phi_plus: f64,
        phi_minus: f64,
        #[serde(default)]
        t_seq: TSeqSpec,
    },
    DiagonalPower {
        rho: [f64; 2],
    },
    SingularPower {
        rho: [f64; 2],
    },
    /// `zeta = exp(2 i phi)` per piece.
    GammaForm {
        knots: Vec<f64>,
        sigma: Vec<f64>,
        phi: Vec<f64>,
    },
    Reparameterized {
        base: Box<ModelSpec>,
        map: MapSpec,
    },
    Rescaled {
        base: Box<ModelSpec>,
        s: f64,
        g1: f64,
        g2: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<HamiltonianModel> {
        Ok(match self {
            ModelSpec::PiecewiseConstant { segments, tail } => {
                let segs = segments
                    .iter()
                    .map(|s| Segment {
                        len: s.len,
                        h: Entries::from_array(s.h),
                    })
                    .collect();
                HamiltonianModel::PiecewiseConstant(PiecewiseConstant::new(segs, Entries::from_array(*tail))?)
            }
            ModelSpec::PowerLog { alpha, beta } => HamiltonianModel::power_log(*alpha, *beta)?,
            ModelSpec::TwoPhase {
                phi_plus,
                phi_minus,
                t_seq,
            } => {
                let rule = match t_seq {
                    TSeqSpec::ExpQuadratic(c) => BreakpointRule::ExpQuadratic(*c),
                    TSeqSpec::Explicit(v) => BreakpointRule::Explicit(v.clone()),
                };
                HamiltonianModel::TwoPhase(TwoPhaseRotation::new(*phi_plus, *phi_minus, rule)?)
            }
            ModelSpec::DiagonalPower { rho } => HamiltonianModel::diagonal_power(rho[0], rho[1])?,
            ModelSpec::SingularPower { rho } => HamiltonianModel::singular_power(rho[0], rho[1])?,
            ModelSpec::GammaForm { knots, sigma, phi } => {
                let zeta = phi.iter().map(|p| Complex64::from_polar(1.0, 2.0 * p)).collect();
                HamiltonianModel::GammaForm(GammaForm::new(knots.clone(), sigma.clone(), zeta)?)
            }
            ModelSpec::Reparameterized { base, map } => {
                let map = match map {
                    MapSpec::Affine(c) => MonotoneMap::Affine(*c),
                    MapSpec::Power(p) => MonotoneMap::Power(*p),
                    MapSpec::Tabulated(pts) => {
                        MonotoneMap::Tabulated(Tabulated::new(pts.iter().map(|p| (p[0], p[1])).collect())?)
                    }
                    MapSpec::TraceInverse => MonotoneMap::TraceInverse,
                };
                HamiltonianModel::Reparameterized(Box::new(Reparameterized { base: base.build()?, map }))
            }
            ModelSpec::Rescaled { base, s, g1, g2 } => {
                HamiltonianModel::Rescaled(Box::new(Rescaled::new(base.build()?, *s, *g1, *g2)?))
            }
        })
    }
}

impl HamiltonianModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.build()
    }

    pub fn to_spec(&self) -> ModelSpec {
        match self {
            HamiltonianModel::PiecewiseConstant(pc) => ModelSpec::PiecewiseConstant {
                segments: pc
                    .segments()
                    .iter()
                    .map(|s| SegmentSpec {
                        len: s.len,
                        h: s.h.to_array(),
                    })
                    .collect(),
                tail: pc.tail().to_array(),
            },
            HamiltonianModel::PowerLog(p) => ModelSpec::PowerLog {
                alpha: p.alpha,
                beta: p.beta,
            },
            HamiltonianModel::TwoPhase(m) => ModelSpec::TwoPhase {
                phi_plus: m.phi_plus(),
                phi_minus: m.phi_minus(),
                t_seq: match m.rule() {
                    BreakpointRule::ExpQuadratic(c) => TSeqSpec::ExpQuadratic(*c),
                    BreakpointRule::Explicit(v) => TSeqSpec::Explicit(v.clone()),
                },
            },
            HamiltonianModel::DiagonalPower { rho } => ModelSpec::DiagonalPower { rho: *rho },
            HamiltonianModel::SingularPower { rho } => ModelSpec::SingularPower { rho: *rho },
            HamiltonianModel::GammaForm(g) => ModelSpec::GammaForm {
                knots: g.knots().to_vec(),
                sigma: g.sigma().to_vec(),
                phi: g.zeta().iter().map(|z| 0.5 * z.arg().rem_euclid(std::f64::consts::TAU)).collect(),
            },
            HamiltonianModel::Reparameterized(r) => ModelSpec::Reparameterized {
                base: Box::new(r.base.to_spec()),
                map: match &r.map {
                    MonotoneMap::Affine(c) => MapSpec::Affine(*c),
                    MonotoneMap::Power(p) => MapSpec::Power(*p),
                    MonotoneMap::Tabulated(tab) => MapSpec::Tabulated(tab.points().skip(1).map(|(x, y)| [x, y]).collect()),
                    MonotoneMap::TraceInverse => MapSpec::TraceInverse,
                },
            },
            HamiltonianModel::Rescaled(r) => ModelSpec::Rescaled {
                base: Box::new(r.base.to_spec()),
                s: r.s,
                g1: r.g1,
                g2: r.g2,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("model specs always serialise")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLES: [&str; 5] = [
        r#"{"kind":"piecewise_constant","segments":[{"len":1.0,"h":[1.0,0.0,0.0]}],"tail":[0.5,0.5,0.5]}"#,
        r#"{"kind":"power_log","alpha":[1.0,1.0],"beta":[2.0,0.0]}"#,
        r#"{"kind":"two_phase","phi_plus":1.0471975512,"phi_minus":2.0943951024,"t_seq":{"exp_quadratic":1.0}}"#,
        r#"{"kind":"diagonal_power","rho":[1.0,3.0]}"#,
        r#"{"kind":"singular_power","rho":[1.0,3.0]}"#,
    ];

    #[test]
    fn documented_shapes_parse_and_round_trip() {
        for text in EXAMPLES {
            let m = HamiltonianModel::from_json(text).unwrap();
            let again = HamiltonianModel::from_json(&m.to_json()).unwrap();
            assert_eq!(m, again, "{text}");
        }
    }

    #[test]
    fn wrappers_round_trip() {
        let text = r#"{"kind":"rescaled","base":{"kind":"reparameterized","base":{"kind":"diagonal_power","rho":[1.0,3.0]},"map":"trace_inverse"},"s":0.5,"g1":2.0,"g2":3.0}"#;
        let m = HamiltonianModel::from_json(text).unwrap();
        assert_eq!(m.to_json(), text);
    }

    #[test]
    fn invalid_model_is_rejected() {
        let r = HamiltonianModel::from_json(r#"{"kind":"power_log","alpha":[1.0,1.0],"beta":[-2.0,0.0]}"#);
        assert!(r.is_err());
        assert!(HamiltonianModel::from_json(r#"{"kind":"nope"}"#).is_err());
    }

    #[test]
    fn digest_is_stable() {
        let m = HamiltonianModel::from_json(EXAMPLES[3]).unwrap();
        assert_eq!(m.digest(), m.clone().digest());
        assert_eq!(m.digest().len(), 64);
    }
}
