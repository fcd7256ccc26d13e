//! Executable checks of the explicit inequalities, on catalog families and on
//! seeded random Hamiltonians, reported case by case with their slack.

pub mod random;
pub mod suites;

use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use random::{gen_random_ham, RandomHamSpec};
pub use suites::{
    default_arc_cases, run_check, suite_arc_bounds, suite_offdiag_bound, suite_regular_variation,
    suite_subinterval_bound, suite_weyl_estimates, ArcCase, CheckConfig, SuiteName, WeylConstants,
};

/// Absolute slack floor of every inequality check.
pub const SLACK_FLOOR: f64 = 1e-8;

pub(crate) fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn de_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }
    match Num::deserialize(d)? {
        Num::F(v) => Ok(v),
        Num::S(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => other.parse().map_err(serde::de::Error::custom),
        },
    }
}

/// One checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    /// Digest of the model JSON.
    pub model: String,
    pub label: String,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub rhs: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub slack: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub tol: f64,
    pub pass: bool,
}

impl Case {
    pub fn new(model: &str, label: String, lhs: f64, rhs: f64, tol: f64) -> Case {
        let slack = rhs - lhs;
        Case {
            model: model.to_string(),
            label,
            lhs,
            rhs,
            slack,
            tol,
            pass: slack >= -tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub min_slack: f64,
    pub cases: Vec<Case>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl SuiteReport {
    pub fn from_cases(suite: &str, cases: Vec<Case>, runtime: Duration) -> SuiteReport {
        let min_slack = cases.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
        SuiteReport {
            suite: suite.to_string(),
            pass: cases.iter().all(|c| c.pass),
            min_slack,
            cases,
            runtime,
        }
    }

    /// Merge reports of the same suite, keeping case order.
    pub fn merge(suite: &str, parts: Vec<SuiteReport>) -> SuiteReport {
        let runtime = parts.iter().map(|p| p.runtime).sum();
        let cases = parts.into_iter().flat_map(|p| p.cases).collect();
        SuiteReport::from_cases(suite, cases, runtime)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }
}
