//! Versioned report documents shared by the command-line front end.

use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::chain::Norm;
use crate::complex::CellComplex;
use crate::error::Result;
use crate::filling::{cheeger, CheegerOptions, CheegerValue, Method, Side, Variant};
use crate::homology::{betti_numbers, homology_all};
use crate::spectral::{spectral_report, SpectralReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Every document carries the schema version, the producing command and the
/// hash of its input.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub input_hash: String,
    pub result: T,
    /// Wall-clock timings in milliseconds, present only on request and
    /// excluded from reproducibility comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<(String, f64)>>,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &str, input_hash: impl Into<String>, result: T) -> Self {
        Envelope { schema_version: SCHEMA_VERSION, command: command.into(), input_hash: input_hash.into(), result, timings: None }
    }
}

/// SHA-256 of raw input bytes, for inputs that are not complexes.
pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexSummary {
    pub name: String,
    pub hash: String,
    pub augmented: bool,
    pub cells: Vec<usize>,
    pub euler_characteristic: i64,
}

impl ComplexSummary {
    pub fn of(x: &CellComplex) -> Self {
        ComplexSummary {
            name: x.name().to_string(),
            hash: x.content_hash(),
            augmented: x.augmented(),
            cells: (0..=x.dims()).map(|d| x.num_cells(d as isize)).collect(),
            euler_characteristic: x.euler_characteristic(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheegerEntry {
    pub side: Side,
    pub dim: usize,
    pub norm: Norm,
    pub variant: Variant,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<CheegerValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologySummary {
    pub groups: Vec<String>,
    pub betti: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheegerReport {
    pub complex: ComplexSummary,
    pub entries: Vec<CheegerEntry>,
    pub homology: HomologySummary,
    pub spectral: Vec<SpectralReport>,
}

#[derive(Clone, Debug)]
pub struct AnalyzeConfig {
    pub norms: Vec<Norm>,
    pub method: Method,
    pub options: CheegerOptions,
    pub timings: bool,
    pub spectral: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig { norms: vec![Norm::L1], method: Method::Brute, options: CheegerOptions::default(), timings: false, spectral: true }
    }
}

/// Chain and cochain constants in every dimension and requested norm, with
/// homology and spectral summaries. Failing entries (caps, work limits) are
/// reported with their error rather than aborting the report.
pub fn analyze(x: &CellComplex, cfg: &AnalyzeConfig) -> Result<CheegerReport> {
    let mut entries = Vec::new();
    for &p in &cfg.norms {
        for i in 0..=x.dims() {
            for side in [Side::Chain, Side::Cochain] {
                let start = Instant::now();
                let r = cheeger(x, i, p, side, Variant::Plain, cfg.method, &cfg.options);
                let runtime_ms = cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
                let (value, error) = match r {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                entries.push(CheegerEntry { side, dim: i, norm: p, variant: Variant::Plain, method: cfg.method, value, error, runtime_ms });
            }
        }
    }
    let homology = HomologySummary { groups: homology_all(x).iter().map(ToString::to_string).collect(), betti: betti_numbers(x) };
    let spectral = if cfg.spectral { (0..=x.dims()).map(|i| spectral_report(x, i, false)).collect::<Result<Vec<_>>>()? } else { Vec::new() };
    Ok(CheegerReport { complex: ComplexSummary::of(x), entries, homology, spectral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, Magnitude};
    use crate::constructors::simplex_boundary;

    #[test]
    fn tetrahedron_report() {
        let x = simplex_boundary(3).unwrap();
        let r = analyze(&x, &AnalyzeConfig::default()).unwrap();
        assert_eq!(r.homology.betti, vec![0, 0, 1]);
        let h0 = r.entries.iter().find(|e| e.side == Side::Chain && e.dim == 0).unwrap();
        assert_eq!(h0.value.as_ref().unwrap().value, Magnitude::Rational(q(2)));
        let h1 = r.entries.iter().find(|e| e.side == Side::Chain && e.dim == 1).unwrap();
        assert_eq!(h1.value.as_ref().unwrap().value, Magnitude::Rational(q(2)));
        assert!(h1.value.as_ref().unwrap().witness_cycle.is_some());
        let a = serde_json::to_string(&Envelope::new("analyze", x.content_hash(), &r)).unwrap();
        let b = serde_json::to_string(&Envelope::new("analyze", x.content_hash(), &analyze(&x, &AnalyzeConfig::default()).unwrap())).unwrap();
        assert_eq!(a, b);
    }
}
