//! JSON wire format for system descriptions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::DEFAULT_TOL;
use crate::rational::{RationalTF, TimeDomain};
use crate::sysmodel::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfSpec {
    pub gain: f64,
    #[serde(default)]
    pub zeros: Vec<[f64; 2]>,
    #[serde(default)]
    pub poles: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub eps_cancel: Option<f64>,
    pub eps_class: Option<f64>,
    pub eps_gain: Option<f64>,
    pub quad_tol: Option<f64>,
    pub run_quadrature: Option<bool>,
    pub run_lemma1: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub domain: TimeDomain,
    pub gx: TfSpec,
    pub gy: TfSpec,
    pub f: TfSpec,
    #[serde(default)]
    pub options: Options,
}

impl SystemSpecDocument {
    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            eps_cancel: self.options.eps_cancel.unwrap_or(d.eps_cancel),
            eps_class: self.options.eps_class.unwrap_or(d.eps_class),
            eps_gain: self.options.eps_gain.unwrap_or(d.eps_gain),
        }
    }

    pub fn quad_tol(&self) -> f64 {
        self.options.quad_tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn run_quadrature(&self) -> bool {
        self.options.run_quadrature.unwrap_or(true)
    }

    pub fn run_lemma1(&self) -> bool {
        self.options.run_lemma1.unwrap_or(false)
    }

    /// `(G_x, G_y, F)`; cannot fail on a document returned by [`parse_spec`].
    pub fn transfer_functions(&self) -> Result<(RationalTF, RationalTF, RationalTF)> {
        Ok((
            build_tf(&self.gx, "gx", self.domain)?,
            build_tf(&self.gy, "gy", self.domain)?,
            build_tf(&self.f, "f", self.domain)?,
        ))
    }
}

fn build_tf(spec: &TfSpec, field: &str, domain: TimeDomain) -> Result<RationalTF> {
    let lift = |v: &[[f64; 2]]| v.iter().map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>();
    RationalTF::new(spec.gain, lift(&spec.zeros), lift(&spec.poles), domain).map_err(|e| {
        let sub = match &e {
            Error::NotConjugateClosed { root } => {
                let which =
                    if spec.zeros.iter().any(|p| p[0] == root.re && p[1] == root.im) { "zeros" } else { "poles" };
                format!("{field}.{which}")
            }
            Error::Improper { .. } => field.to_string(),
            _ => field.to_string(),
        };
        Error::Schema { field: sub, message: e.to_string() }
    })
}

/// Parses and checks a document: syntax, schema, conjugate closure, properness, option ranges.
pub fn parse_spec(text: &str) -> Result<SystemSpecDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: SystemSpecDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => Error::Schema {
                field: if path == "." { "document".into() } else { path },
                message: strip_position(&inner.to_string()),
            },
            _ => {
                Error::Parse { line: inner.line(), column: inner.column(), message: strip_position(&inner.to_string()) }
            }
        }
    })?;
    let o = &doc.options;
    for (name, v) in [
        ("options.eps_cancel", o.eps_cancel),
        ("options.eps_class", o.eps_class),
        ("options.eps_gain", o.eps_gain),
        ("options.quad_tol", o.quad_tol),
    ] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Schema { field: name.into(), message: format!("must be positive, got {v}") });
            }
        }
    }
    doc.transfer_functions()?;
    Ok(doc)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
