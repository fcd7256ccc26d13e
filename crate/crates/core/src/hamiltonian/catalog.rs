//! Built-in analytic families, addressable by name.
//!
//! Parameters are given as `key=v1,v2;key=v`, e.g. `alpha=1,1;beta=2,0`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_3;

use super::{BreakpointRule, Entries, HamiltonianModel, Segment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static str,
    pub json: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "constant-singular",
        description: "constant H = (1/2, 1/2, 1/2); q = 1",
        params: "",
        json: r#"{"kind":"piecewise_constant","segments":[],"tail":[0.5,0.5,0.5]}"#,
    },
    CatalogEntry {
        name: "identity-half",
        description: "constant H = I/2; q = i (alias diag-half)",
        params: "",
        json: r#"{"kind":"piecewise_constant","segments":[],"tail":[0.5,0.0,0.5]}"#,
    },
    CatalogEntry {
        name: "identity",
        description: "constant H = I, not trace normalised",
        params: "",
        json: r#"{"kind":"piecewise_constant","segments":[],"tail":[1.0,0.0,1.0]}"#,
    },
    CatalogEntry {
        name: "constant",
        description: "constant H with entries h = h1,h3,h2",
        params: "h=0.5,0.5,0.5",
        json: r#"{"kind":"piecewise_constant","segments":[],"tail":[h1,h3,h2]}"#,
    },
    CatalogEntry {
        name: "two-phase",
        description: "rank-one H rotating between phi_plus and phi_minus on bands [t_n, t_{n-1}), t_n = exp(-c n^2)",
        params: "phi_plus=pi/3;phi_minus=2pi/3;c=1",
        json: r#"{"kind":"two_phase","phi_plus":1.0471975512,"phi_minus":2.0943951024,"t_seq":{"exp_quadratic":1.0}}"#,
    },
    CatalogEntry {
        name: "power-log",
        description: "h_j = t^{alpha_j - 1} |log t|^{beta_j}, h3 = sqrt(h1 h2)",
        params: "alpha=1,1;beta=2,0",
        json: r#"{"kind":"power_log","alpha":[1.0,1.0],"beta":[2.0,0.0]}"#,
    },
    CatalogEntry {
        name: "diagonal-power",
        description: "H = diag(rho1 t^{rho1-1}, rho2 t^{rho2-1})",
        params: "rho=1,3",
        json: r#"{"kind":"diagonal_power","rho":[1.0,3.0]}"#,
    },
    CatalogEntry {
        name: "singular-power",
        description: "diagonal-power with h3 = sqrt(h1 h2)",
        params: "rho=1,3",
        json: r#"{"kind":"singular_power","rho":[1.0,3.0]}"#,
    },
    CatalogEntry {
        name: "degenerate-h2",
        description: "H = (1,0,0) on (0, delta), then (1/2,1/2,1/2)",
        params: "delta=1",
        json: r#"{"kind":"piecewise_constant","segments":[{"len":1.0,"h":[1.0,0.0,0.0]}],"tail":[0.5,0.5,0.5]}"#,
    },
    CatalogEntry {
        name: "degenerate-h1",
        description: "H = (0,0,1) on (0, delta), then (1/2,1/2,1/2)",
        params: "delta=2",
        json: r#"{"kind":"piecewise_constant","segments":[{"len":2.0,"h":[0.0,0.0,1.0]}],"tail":[0.5,0.5,0.5]}"#,
    },
];

/// The six families swept by the property suites.
pub const SWEEP_FAMILIES: [&str; 6] = [
    "constant-singular",
    "identity-half",
    "two-phase",
    "power-log",
    "diagonal-power",
    "singular-power",
];

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        return Ok(parse_number(num)? / parse_number(den)?);
    }
    if let Some(rest) = s.strip_suffix("pi") {
        let rest = rest.strip_suffix('*').unwrap_or(rest);
        let c = match rest {
            "" => 1.0,
            "-" => -1.0,
            r => parse_number(r)?,
        };
        return Ok(c * std::f64::consts::PI);
    }
    s.parse::<f64>()
        .map_err(|_| Error::InvalidModel(format!("cannot parse number '{s}'")))
}

/// Parse `key=v1,v2;key=v` into a map of number lists.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut out = BTreeMap::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidModel(format!("parameter '{item}' lacks '='")))?;
        let vals = v.split(',').map(parse_number).collect::<Result<Vec<_>>>()?;
        out.insert(k.trim().to_string(), vals);
    }
    Ok(out)
}

struct Params(BTreeMap<String, Vec<f64>>);

impl Params {
    fn get<const N: usize>(&self, key: &str, default: [f64; N]) -> Result<[f64; N]> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.as_slice().try_into().map_err(|_| {
                Error::InvalidModel(format!("parameter '{key}' expects {N} values, got {}", v.len()))
            }),
        }
    }
}

/// Build a catalog model from its name and a parameter string.
pub fn build(name: &str, params: &str) -> Result<HamiltonianModel> {
    let p = Params(parse_params(params)?);
    let known: &[&str] = match name {
        "constant" => &["h"],
        "two-phase" => &["phi_plus", "phi_minus", "c"],
        "power-log" => &["alpha", "beta"],
        "diagonal-power" | "singular-power" => &["rho"],
        "degenerate-h1" | "degenerate-h2" => &["delta"],
        _ => &[],
    };
    if let Some(k) = p.0.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::InvalidModel(format!("unknown parameter '{k}' for '{name}'")));
    }
    match name {
        "constant-singular" => HamiltonianModel::constant(0.5, 0.5, 0.5),
        "identity-half" | "diag-half" => HamiltonianModel::constant(0.5, 0.0, 0.5),
        "identity" => HamiltonianModel::constant(1.0, 0.0, 1.0),
        "constant" => {
            let [h1, h3, h2] = p.get("h", [0.5, 0.5, 0.5])?;
            HamiltonianModel::constant(h1, h3, h2)
        }
        "two-phase" => {
            let [pp] = p.get("phi_plus", [FRAC_PI_3])?;
            let [pm] = p.get("phi_minus", [2.0 * FRAC_PI_3])?;
            let [c] = p.get("c", [1.0])?;
            HamiltonianModel::two_phase(pp, pm, BreakpointRule::ExpQuadratic(c))
        }
        "power-log" => HamiltonianModel::power_log(p.get("alpha", [1.0, 1.0])?, p.get("beta", [2.0, 0.0])?),
        "diagonal-power" => {
            let [a, b] = p.get("rho", [1.0, 3.0])?;
            HamiltonianModel::diagonal_power(a, b)
        }
        "singular-power" => {
            let [a, b] = p.get("rho", [1.0, 3.0])?;
            HamiltonianModel::singular_power(a, b)
        }
        "degenerate-h2" | "degenerate-h1" => {
            let default = if name == "degenerate-h2" { 1.0 } else { 2.0 };
            let [delta] = p.get("delta", [default])?;
            let h = if name == "degenerate-h2" {
                Entries::new(1.0, 0.0, 0.0)
            } else {
                Entries::new(0.0, 0.0, 1.0)
            };
            HamiltonianModel::piecewise(vec![Segment { len: delta, h }], Entries::new(0.5, 0.5, 0.5))
        }
        _ => Err(Error::InvalidModel(format!("unknown catalog model '{name}'"))),
    }
}

/// All sweep families with default parameters.
pub fn sweep_families() -> Vec<(&'static str, HamiltonianModel)> {
    SWEEP_FAMILIES
        .iter()
        .map(|n| (*n, build(n, "").expect("catalog defaults are valid")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_matches_its_json() {
        for e in CATALOG {
            let m = build(e.name, "").unwrap();
            // the two-phase JSON shape rounds its angles
            if e.name != "constant" && e.name != "two-phase" {
                assert_eq!(m, HamiltonianModel::from_json(e.json).unwrap(), "{}", e.name);
            }
        }
    }

    #[test]
    fn params_parse_pi_and_fractions() {
        let p = parse_params("phi_plus=pi/3; phi_minus=2pi/3;c=0.5").unwrap();
        assert!((p["phi_plus"][0] - FRAC_PI_3).abs() < 1e-15);
        assert!((p["phi_minus"][0] - 2.0 * FRAC_PI_3).abs() < 1e-15);
        assert_eq!(p["c"], vec![0.5]);
    }

    #[test]
    fn unknown_names_and_params_fail() {
        assert!(build("nope", "").is_err());
        assert!(build("power-log", "gamma=1").is_err());
        assert!(build("diagonal-power", "rho=1").is_err());
    }

    #[test]
    fn alias_diag_half() {
        assert_eq!(build("diag-half", "").unwrap(), build("identity-half", "").unwrap());
    }
}
