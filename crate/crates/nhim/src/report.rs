//! Certificate JSON.

use std::collections::BTreeMap;

use nhim_core::verify::{Certificate, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Verdict string for a backward cone check that was refused before any
/// cone bound was attempted.
pub const CANNOT_CERTIFY: &str = "cannot certify";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R_Lambda")]
    pub r_lambda: f64,
    pub subdivision: SubdivisionDoc,
    pub k: u32,
    pub scheme: String,
    pub covering: CoveringDoc,
    pub backward_cone: BackwardConeDoc,
    pub rates: Option<RatesDoc>,
    pub errors: Vec<String>,
    pub certified: bool,
    pub version: String,
    /// seconds since the Unix epoch; not part of the reproducible body
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionDoc {
    pub rates: [usize; 3],
    pub checks: [usize; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringDoc {
    pub verdict: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackwardConeDoc {
    pub verdict: String,
    pub lambda_bound: Option<f64>,
    pub lift_degree: Option<i64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatesDoc {
    #[serde(flatten)]
    pub constants: BTreeMap<String, f64>,
    pub order: i64,
    pub k_cap: u32,
    /// first inequality that fails one order above `order`
    pub binding_condition: Option<String>,
}

impl CertificateDoc {
    pub fn new(cert: &Certificate, cfg: &RunConfig) -> CertificateDoc {
        let bc = &cert.backward_cone;
        let refused = bc.verdict != Verdict::True && bc.lift_degree != Some(1);
        let rates = cert.rates.as_ref().map(|r| RatesDoc {
            constants: r.constants.named().iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            order: r.order,
            k_cap: r.k_cap,
            binding_condition: r.binding.map(|b| b.to_string()),
        });
        CertificateDoc {
            model: cert.model.clone(),
            params: cert.params.iter().cloned().collect(),
            l: cert.l,
            r: cert.r,
            r_lambda: cert.r_lambda,
            subdivision: SubdivisionDoc { rates: cfg.certify.rate_subdivision, checks: cfg.certify.check_subdivision },
            k: cert.options.k,
            scheme: cfg.certify.scheme.as_str().to_string(),
            covering: CoveringDoc { verdict: cert.covering.verdict.to_string(), detail: cert.covering.detail.clone() },
            backward_cone: BackwardConeDoc {
                verdict: if refused { CANNOT_CERTIFY.to_string() } else { bc.verdict.to_string() },
                lambda_bound: bc.lambda_bound,
                lift_degree: bc.lift_degree,
                detail: bc.detail.clone(),
            },
            rates,
            errors: cert.errors.clone(),
            certified: cert.certified,
            version: VERSION.to_string(),
            timestamp: None,
        }
    }

    pub fn stamped(mut self) -> CertificateDoc {
        self.timestamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    /// JSON without the timestamp; identical configs give identical bodies.
    pub fn body(&self) -> String {
        CertificateDoc { timestamp: None, ..self.clone() }.to_json()
    }

    /// One line per check, for the terminal.
    pub fn summary(&self) -> String {
        let mut out = format!("model {} R={} L={}\n", self.model, self.r, self.l);
        match &self.rates {
            Some(r) => {
                out += &format!("rates: order {} (k = {})", r.order, self.k);
                if let Some(b) = &r.binding_condition {
                    out += &format!(", binding {b}");
                }
                out.push('\n');
            }
            None => out += "rates: unavailable\n",
        }
        let detail = |d: &str| if d.is_empty() { String::new() } else { format!(" ({d})") };
        out += &format!("covering: {}{}\n", self.covering.verdict, detail(&self.covering.detail));
        out += &format!("backward cone: {}{}\n", self.backward_cone.verdict, detail(&self.backward_cone.detail));
        for e in &self.errors {
            out += &format!("error: {e}\n");
        }
        out += &format!("certified: {}\n", self.certified);
        out
    }
}
