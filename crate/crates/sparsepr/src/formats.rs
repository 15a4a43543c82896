//! JSON documents for signals, ACFs, verdicts and grids.
//!
//! Exact scalars serialize as `"p/q"` strings (plain `"p"` when the
//! denominator is one); floating scalars serialize as JSON numbers. A signal
//! document carries its scalar mode explicitly; an ACF document's mode is
//! inferred from its values, with the CLI `--mode` flag as an override.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use sparsepr_core::coefficients::UniquenessVerdict;
use sparsepr_core::scalar::{Rational, Scalar, Tolerance};
use sparsepr_core::signal::{AcfDelta, DeltaAcf, Spike, SpikeSignal};

/// Errors raised while reading or interpreting documents. These correspond
/// to malformed input (CLI exit code 2), as opposed to solver failures.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scalar {0:?}")]
    Scalar(String),
    #[error("invalid document: {0}")]
    Invalid(#[from] sparsepr_core::Error),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    Exact,
    Float,
}

impl fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarMode::Exact => "exact",
            ScalarMode::Float => "float",
        })
    }
}

impl FromStr for ScalarMode {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, FormatError> {
        match s {
            "exact" => Ok(ScalarMode::Exact),
            "float" => Ok(ScalarMode::Float),
            other => Err(FormatError::Other(format!("unknown scalar mode {other:?}"))),
        }
    }
}

/// One JSON scalar: a number (floating mode) or a `"p/q"` string (exact).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarValue {
    Float(f64),
    Exact(String),
}

impl ScalarValue {
    fn is_exact(&self) -> bool {
        matches!(self, ScalarValue::Exact(_))
    }
}

fn parse_rational(text: &str) -> Result<Rational, FormatError> {
    let mut parts = text.splitn(2, '/');
    let numer = parts.next().unwrap_or("").trim();
    let numer =
        BigInt::from_str(numer).map_err(|_| FormatError::Scalar(text.to_string()))?;
    match parts.next() {
        None => Ok(Rational::from_integer(numer)),
        Some(denom) => {
            let denom = BigInt::from_str(denom.trim())
                .map_err(|_| FormatError::Scalar(text.to_string()))?;
            if denom == BigInt::from(0) {
                return Err(FormatError::Scalar(text.to_string()));
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

/// Scalar types that can cross the JSON boundary.
pub trait DocScalar: Scalar {
    const MODE: ScalarMode;
    fn to_value(&self) -> ScalarValue;
    fn from_value(value: &ScalarValue) -> Result<Self, FormatError>;
}

impl DocScalar for Rational {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn to_value(&self) -> ScalarValue {
        ScalarValue::Exact(self.to_string())
    }

    fn from_value(value: &ScalarValue) -> Result<Self, FormatError> {
        match value {
            ScalarValue::Exact(text) => parse_rational(text),
            ScalarValue::Float(v) => Rational::from_float(*v)
                .ok_or_else(|| FormatError::Scalar(v.to_string())),
        }
    }
}

impl DocScalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn to_value(&self) -> ScalarValue {
        ScalarValue::Float(*self)
    }

    fn from_value(value: &ScalarValue) -> Result<Self, FormatError> {
        match value {
            ScalarValue::Float(v) => Ok(*v),
            ScalarValue::Exact(text) => Ok(parse_rational(text)?.to_f64()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpikeDoc {
    pub pos: Vec<ScalarValue>,
    pub coef: ScalarValue,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalDoc {
    pub dim: usize,
    pub scalar: String,
    pub spikes: Vec<SpikeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaDoc {
    pub lag: Vec<ScalarValue>,
    pub coef: ScalarValue,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcfDoc {
    pub dim: usize,
    pub deltas: Vec<DeltaDoc>,
    pub half: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub signals: Vec<SignalDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDoc {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

/// Runtime-dispatched signal, one variant per scalar mode.
#[derive(Debug, Clone)]
pub enum AnySignal {
    Exact(SpikeSignal<Rational>),
    Float(SpikeSignal<f64>),
}

/// Runtime-dispatched ACF.
#[derive(Debug, Clone)]
pub enum AnyAcf {
    Exact(DeltaAcf<Rational>),
    Float(DeltaAcf<f64>),
}

impl AnyAcf {
    pub fn dim(&self) -> usize {
        match self {
            AnyAcf::Exact(a) => a.dim(),
            AnyAcf::Float(a) => a.dim(),
        }
    }
}

pub fn signal_to_doc<S: DocScalar>(signal: &SpikeSignal<S>) -> SignalDoc {
    SignalDoc {
        dim: signal.dim(),
        scalar: S::MODE.to_string(),
        spikes: signal
            .spikes()
            .iter()
            .map(|s| SpikeDoc {
                pos: s.pos.iter().map(DocScalar::to_value).collect(),
                coef: s.coef.to_value(),
            })
            .collect(),
    }
}

pub fn any_signal_to_doc(signal: &AnySignal) -> SignalDoc {
    match signal {
        AnySignal::Exact(s) => signal_to_doc(s),
        AnySignal::Float(s) => signal_to_doc(s),
    }
}

fn signal_from_doc_typed<S: DocScalar>(
    doc: &SignalDoc,
    tol: Tolerance,
) -> Result<SpikeSignal<S>, FormatError> {
    let spikes = doc
        .spikes
        .iter()
        .map(|s| {
            Ok(Spike {
                pos: s
                    .pos
                    .iter()
                    .map(S::from_value)
                    .collect::<Result<Vec<S>, FormatError>>()?,
                coef: S::from_value(&s.coef)?,
            })
        })
        .collect::<Result<Vec<Spike<S>>, FormatError>>()?;
    Ok(SpikeSignal::new(doc.dim, spikes, tol)?)
}

pub fn signal_from_doc(
    doc: &SignalDoc,
    mode_override: Option<ScalarMode>,
    tol: Tolerance,
) -> Result<AnySignal, FormatError> {
    let mode = match mode_override {
        Some(m) => m,
        None => doc.scalar.parse()?,
    };
    Ok(match mode {
        ScalarMode::Exact => AnySignal::Exact(signal_from_doc_typed(doc, tol)?),
        ScalarMode::Float => AnySignal::Float(signal_from_doc_typed(doc, tol)?),
    })
}

pub fn acf_to_doc<S: DocScalar>(acf: &DeltaAcf<S>) -> AcfDoc {
    AcfDoc {
        dim: acf.dim(),
        deltas: acf
            .deltas()
            .iter()
            .map(|d| DeltaDoc {
                lag: d.lag.iter().map(DocScalar::to_value).collect(),
                coef: d.coef.to_value(),
            })
            .collect(),
        half: acf.is_half(),
    }
}

pub fn any_acf_to_doc(acf: &AnyAcf) -> AcfDoc {
    match acf {
        AnyAcf::Exact(a) => acf_to_doc(a),
        AnyAcf::Float(a) => acf_to_doc(a),
    }
}

fn acf_from_doc_typed<S: DocScalar>(doc: &AcfDoc, tol: Tolerance) -> Result<DeltaAcf<S>, FormatError> {
    let deltas = doc
        .deltas
        .iter()
        .map(|d| {
            Ok(AcfDelta {
                lag: d
                    .lag
                    .iter()
                    .map(S::from_value)
                    .collect::<Result<Vec<S>, FormatError>>()?,
                coef: S::from_value(&d.coef)?,
            })
        })
        .collect::<Result<Vec<AcfDelta<S>>, FormatError>>()?;
    Ok(DeltaAcf::new(doc.dim, deltas, doc.half, tol)?)
}

/// Infers exact mode when any value is a `"p/q"` string.
fn infer_acf_mode(doc: &AcfDoc) -> ScalarMode {
    let exact = doc
        .deltas
        .iter()
        .any(|d| d.coef.is_exact() || d.lag.iter().any(ScalarValue::is_exact));
    if exact {
        ScalarMode::Exact
    } else {
        ScalarMode::Float
    }
}

pub fn acf_from_doc(
    doc: &AcfDoc,
    mode_override: Option<ScalarMode>,
    tol: Tolerance,
) -> Result<AnyAcf, FormatError> {
    let mode = mode_override.unwrap_or_else(|| infer_acf_mode(doc));
    Ok(match mode {
        ScalarMode::Exact => AnyAcf::Exact(acf_from_doc_typed(doc, tol)?),
        ScalarMode::Float => AnyAcf::Float(acf_from_doc_typed(doc, tol)?),
    })
}

pub fn verdict_to_doc<S: DocScalar>(verdict: &UniquenessVerdict<S>) -> VerdictDoc {
    match verdict {
        UniquenessVerdict::Unique(class) => VerdictDoc {
            verdict: "unique".into(),
            reason: None,
            signals: vec![signal_to_doc(class.representative())],
        },
        UniquenessVerdict::Ambiguous(witnesses) => VerdictDoc {
            verdict: "ambiguous".into(),
            reason: None,
            signals: witnesses
                .iter()
                .map(|c| signal_to_doc(c.representative()))
                .collect(),
        },
        UniquenessVerdict::NotCovered(reason) => VerdictDoc {
            verdict: "not_covered".into(),
            reason: Some(reason.clone()),
            signals: Vec::new(),
        },
    }
}
