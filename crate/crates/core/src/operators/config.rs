use serde::{Deserialize, Serialize};

use super::{
    example_5_3_with, max, min, neg_detplus, neg_max_eigenvalue, neg_min_eigenvalue, neg_trace, scalar_term, scaled,
    source, sum, value, weighted_neg_trace, yamabe, Example53Exponents, OperatorSpec, ScalarField,
};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// JSON description of an operator, e.g.
/// `{"op": "yamabe", "n": 3, "S": "const:6", "S_prime": -1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    NegTrace,
    NegDetplus,
    NegMinEigenvalue,
    NegMaxEigenvalue,
    Value,
    ScalarTerm {
        #[serde(rename = "S")]
        s: ScalarField<f64>,
    },
    Source {
        f: ScalarField<f64>,
    },
    WeightedNegTrace {
        a: ScalarField<f64>,
    },
    Sum {
        terms: Vec<OperatorConfig>,
    },
    Max {
        terms: Vec<OperatorConfig>,
    },
    Min {
        terms: Vec<OperatorConfig>,
    },
    Scaled {
        factor: f64,
        of: Box<OperatorConfig>,
    },
    #[serde(rename = "example_5_3")]
    Example53 {
        f: ScalarField<f64>,
        g: ScalarField<f64>,
        #[serde(default)]
        exponents: Option<Example53Exponents>,
    },
    Yamabe {
        n: usize,
        #[serde(rename = "S")]
        s: ScalarField<f64>,
        #[serde(rename = "S_prime")]
        s_prime: f64,
    },
}

fn field<T: Real>(f: &ScalarField<f64>) -> ScalarField<T> {
    match *f {
        ScalarField::Const(c) => ScalarField::Const(T::lit(c)),
        ScalarField::Coord(i) => ScalarField::Coord(i),
        ScalarField::Affine { c, i, a } => ScalarField::Affine { c: T::lit(c), i, a: T::lit(a) },
    }
}

impl OperatorConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Self> {
        Self::deserialize(v).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build<T: Real>(&self) -> Result<OperatorSpec<T>> {
        let many = |terms: &[OperatorConfig]| terms.iter().map(|t| t.build()).collect::<Result<Vec<_>>>();
        Ok(match self {
            OperatorConfig::NegTrace => neg_trace(),
            OperatorConfig::NegDetplus => neg_detplus(),
            OperatorConfig::NegMinEigenvalue => neg_min_eigenvalue(),
            OperatorConfig::NegMaxEigenvalue => neg_max_eigenvalue(),
            OperatorConfig::Value => value(),
            OperatorConfig::ScalarTerm { s } => scalar_term(field(s)),
            OperatorConfig::Source { f } => source(field(f)),
            OperatorConfig::WeightedNegTrace { a } => weighted_neg_trace(field(a)),
            OperatorConfig::Sum { terms } => sum(many(terms)?)?,
            OperatorConfig::Max { terms } => max(many(terms)?)?,
            OperatorConfig::Min { terms } => min(many(terms)?)?,
            OperatorConfig::Scaled { factor, of } => scaled(T::lit(*factor), of.build()?)?,
            OperatorConfig::Example53 { f, g, exponents } => {
                example_5_3_with(field(f), field(g), exponents.unwrap_or_default())
            }
            OperatorConfig::Yamabe { n, s, s_prime } => yamabe(*n, field(s), T::lit(*s_prime))?,
        })
    }
}
