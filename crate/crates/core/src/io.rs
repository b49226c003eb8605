//! The system file format and covector literals.
//!
//! A system file is a JSON object with keys `covectors`, `dim`, `name` and `params`,
//! written in that order with one covector per line. Numbers use the shortest decimal
//! form that reads back to the same double, so export, import and export again give
//! identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::builders::{parse_value, sum_zero_coords, Family, SystemSpec};
use crate::error::{Result, VeeError};
use crate::system::CovectorSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub covectors: Vec<Vec<f64>>,
    pub dim: usize,
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl From<&CovectorSystem> for SystemFile {
    fn from(s: &CovectorSystem) -> Self {
        Self {
            covectors: s.rows(),
            dim: s.dim,
            name: s.name.clone(),
            params: s.params.clone(),
        }
    }
}

impl SystemFile {
    pub fn into_system(self, eps: f64) -> Result<CovectorSystem> {
        CovectorSystem::new(self.name, self.dim, self.covectors, self.params, eps)
    }
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite numbers serialize")
}

/// Canonical text of a system file.
pub fn to_json(s: &CovectorSystem) -> String {
    let rows: Vec<String> = s
        .covectors
        .iter()
        .map(|c| format!("    [{}]", c.coords.iter().map(|x| number(*x)).collect::<Vec<_>>().join(", ")))
        .collect();
    let params: Vec<String> = s
        .params
        .iter()
        .map(|(k, v)| format!("{}: {}", serde_json::to_string(k).expect("strings serialize"), number(*v)))
        .collect();
    format!(
        "{{\n  \"covectors\": [\n{}\n  ],\n  \"dim\": {},\n  \"name\": {},\n  \"params\": {{{}}}\n}}\n",
        rows.join(",\n"),
        s.dim,
        serde_json::to_string(&s.name).expect("strings serialize"),
        params.join(", ")
    )
}

pub fn from_json(text: &str, eps: f64) -> Result<CovectorSystem> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| VeeError::Format(e.to_string()))?;
    file.into_system(eps)
}

/// Whether `system` was built in sum-zero coordinates of a larger space.
fn sum_zero_ambient(system: &CovectorSystem) -> bool {
    system
        .name
        .parse::<SystemSpec>()
        .is_ok_and(|s| matches!(s.family, Family::A | Family::AnDeformed))
}

/// Parses one literal such as `e7-e8`, `-e1+2e3` or `sqrt(2)e1 - 0.5*e2` into a
/// coordinate vector of length `dim` (indices are 1-based).
pub fn parse_covector(s: &str, dim: usize) -> Result<Vec<f64>> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(VeeError::Format("empty covector literal".into()));
    }
    let mut terms: Vec<String> = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in compact.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && !cur.is_empty() && !cur.ends_with('*') && !cur.ends_with('/') => {
                terms.push(std::mem::take(&mut cur));
            }
            _ => {}
        }
        cur.push(ch);
    }
    terms.push(cur);
    let mut v = vec![0.0; dim];
    for term in terms {
        let bad = || VeeError::Format(format!("bad covector term {term:?} in {s:?}"));
        let pos = term.rfind('e').ok_or_else(bad)?;
        let index: usize = term[pos + 1..].parse().map_err(|_| bad())?;
        if index == 0 || index > dim {
            return Err(VeeError::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let coef = term[..pos].trim_end_matches('*');
        let coef = coef.strip_prefix('+').unwrap_or(coef);
        let c = match coef {
            "" => 1.0,
            "-" => -1.0,
            _ => parse_value(coef)?,
        };
        v[index - 1] += c;
    }
    Ok(v)
}

/// Parses a comma-separated list of literals in the coordinates of `system`. For A-type
/// systems, which are stored in an orthonormal basis of `{sum x_i = 0}`, literals may
/// also use the `dim + 1` coordinates of the surrounding space.
pub fn parse_covector_list(s: &str, system: &CovectorSystem) -> Result<Vec<Vec<f64>>> {
    let dim = system.dim;
    let wide = sum_zero_ambient(system);
    split_top_level(s)
        .into_iter()
        .map(|lit| match parse_covector(&lit, dim) {
            Err(VeeError::DimensionMismatch { found, .. }) if wide && found == dim + 1 => {
                Ok(sum_zero_coords(&parse_covector(&lit, dim + 1)?))
            }
            Ok(v) if wide => {
                // a literal confined to the first dim coordinates is ambiguous only if it
                // is also meaningful in the wide space; prefer the wide reading when it sums to zero
                let wide_v = parse_covector(&lit, dim + 1)?;
                if wide_v.iter().sum::<f64>().abs() < 1e-12 {
                    Ok(sum_zero_coords(&wide_v))
                } else {
                    Ok(v)
                }
            }
            other => other,
        })
        .collect()
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().filter(|t| !t.trim().is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_str;

    #[test]
    fn literals() {
        assert_eq!(parse_covector("e7-e8", 8).unwrap(), vec![0., 0., 0., 0., 0., 0., 1., -1.]);
        assert_eq!(parse_covector("-e1 + 2e3", 3).unwrap(), vec![-1.0, 0.0, 2.0]);
        assert_eq!(parse_covector("0.5*e2", 2).unwrap(), vec![0.0, 0.5]);
        let v = parse_covector("sqrt(2)e1", 1).unwrap();
        assert!((v[0] - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!(parse_covector("e9", 8).is_err());
        assert!(parse_covector("x1", 8).is_err());
    }

    #[test]
    fn a_type_literals_use_the_wide_space() {
        let a3 = build_str("A:n=3").unwrap();
        let u = parse_covector_list("e1-e2", &a3).unwrap();
        assert_eq!(u[0], sum_zero_coords(&[1.0, -1.0, 0.0, 0.0]));
        let u = parse_covector_list("e3-e4", &a3).unwrap();
        assert_eq!(u[0], sum_zero_coords(&[0.0, 0.0, 1.0, -1.0]));
    }

    #[test]
    fn export_import_export_is_identical() {
        for spec in ["F4:lambda=sqrt(2)", "E7", "An_def:c=2,1,1", "T4:M=1/sqrt(2)"] {
            let s = build_str(spec).unwrap();
            let text = to_json(&s);
            let back = from_json(&text, 1e-9).unwrap();
            assert_eq!(SystemFile::from(&back), SystemFile::from(&s));
            assert_eq!(to_json(&back), text);
        }
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = from_json(r#"{"covectors": [[1.0]], "dim": 1, "name": "x", "extra": 1}"#, 1e-9);
        assert!(matches!(err, Err(VeeError::Format(_))));
    }
}
