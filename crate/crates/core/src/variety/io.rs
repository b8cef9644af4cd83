//! JSON definition files for varieties.
//!
//! ```json
//! { "n": 2, "beta": [3, 2], "dim": 1,
//!   "generators": [ { "terms": [ { "exps": [2, 0], "re": 1.0, "im": 0.0 },
//!                               { "exps": [0, 3], "re": -1.0, "im": 0.0 } ] } ] }
//! ```

use serde::{Deserialize, Serialize};

use crate::C64;

use super::{Term, VarietyError, WPolynomial, WeightVector, WeightedVariety};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermFile {
    pub exps: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub terms: Vec<TermFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarietyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub beta: Vec<i64>,
    pub generators: Vec<GeneratorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl VarietyFile {
    pub fn build(&self) -> Result<WeightedVariety, VarietyError> {
        if self.beta.len() != self.n {
            return Err(VarietyError::DimensionMismatch {
                expected: self.n,
                got: self.beta.len(),
            });
        }
        let weights = WeightVector::try_from(self.beta.clone())?;
        let generators = self
            .generators
            .iter()
            .map(|g| {
                WPolynomial::new(
                    self.n,
                    g.terms
                        .iter()
                        .map(|t| Term {
                            exps: t.exps.clone(),
                            coeff: C64::new(t.re, t.im),
                        })
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let v = WeightedVariety::new(weights, generators, self.dim)?;
        Ok(v.with_name(self.name.clone().unwrap_or_default()))
    }

    pub fn from_variety(v: &WeightedVariety) -> Self {
        Self {
            name: (!v.name().is_empty()).then(|| v.name().to_string()),
            n: v.ambient_dim(),
            beta: v.weights().as_slice().iter().map(|&b| b as i64).collect(),
            generators: v
                .generators()
                .iter()
                .map(|g| GeneratorFile {
                    terms: g
                        .terms()
                        .iter()
                        .map(|t| TermFile {
                            exps: t.exps.clone(),
                            re: t.coeff.re,
                            im: t.coeff.im,
                        })
                        .collect(),
                })
                .collect(),
            dim: v.dim_hint(),
        }
    }
}

pub fn parse_variety(json: &str) -> Result<WeightedVariety, VarietyError> {
    let file: VarietyFile = serde_json::from_str(json).map_err(|e| VarietyError::Invalid(e.to_string()))?;
    file.build()
}

pub fn variety_to_json(v: &WeightedVariety) -> String {
    serde_json::to_string_pretty(&VarietyFile::from_variety(v)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cusp_round_trip() {
        let json = r#"{ "n": 2, "beta": [3, 2], "dim": 1,
            "generators": [ { "terms": [ { "exps": [2, 0], "re": 1.0 },
                                         { "exps": [0, 3], "re": -1.0, "im": 0.0 } ] } ] }"#;
        let v = parse_variety(json).unwrap();
        assert_eq!(v.degrees(), &[6]);
        let back = parse_variety(&variety_to_json(&v)).unwrap();
        assert_eq!(back.generators(), v.generators());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_variety("{").is_err());
        let mixed = r#"{ "n": 2, "beta": [1, 1],
            "generators": [ { "terms": [ { "exps": [1, 0], "re": 1.0 }, { "exps": [0, 2], "re": 1.0 } ] } ] }"#;
        assert!(matches!(parse_variety(mixed), Err(VarietyError::MixedDegree { .. })));
        let short = r#"{ "n": 2, "beta": [1], "generators": [] }"#;
        assert!(parse_variety(short).is_err());
    }
}
