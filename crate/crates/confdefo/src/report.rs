//! Machine-readable JSON reports. Field order is fixed by the struct
//! definitions and maps use sorted keys, so identical inputs produce
//! byte-identical documents.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::geometry::Realization;
use crate::mesh::TriMesh;

pub const REPORT_SCHEMA: &str = "confdefo.report/1";

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub source: String,
    pub sha256: String,
    pub dim: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub genus: Option<usize>,
    pub closed: bool,
}

impl InputInfo {
    pub fn new(source: &str, mesh: &TriMesh, f: &Realization) -> Self {
        InputInfo {
            source: source.to_string(),
            sha256: digest(mesh, f),
            dim: f.dim(),
            vertices: mesh.vertex_count(),
            edges: mesh.edge_count(),
            faces: mesh.face_count(),
            genus: mesh.genus().ok(),
            closed: mesh.is_closed(),
        }
    }
}

/// SHA-256 over the face list and the exact coordinate bits.
pub fn digest(mesh: &TriMesh, f: &Realization) -> String {
    let mut h = Sha256::new();
    h.update((f.dim() as u64).to_le_bytes());
    h.update((mesh.vertex_count() as u64).to_le_bytes());
    for fc in mesh.faces() {
        for &v in fc {
            h.update((v as u64).to_le_bytes());
        }
    }
    for x in f.as_flat() {
        h.update(x.to_bits().to_le_bytes());
    }
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// One named check with its value, threshold and verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn le(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value == expected` exactly (dimension counts).
    pub fn eq(name: &str, value: usize, expected: usize) -> Self {
        Check {
            name: name.to_string(),
            value: value as f64,
            threshold: expected as f64,
            pass: value == expected,
        }
    }

    /// Passes when `value >= bound` (dimension lower bounds).
    pub fn ge(name: &str, value: usize, bound: usize) -> Self {
        Check {
            name: name.to_string(),
            value: value as f64,
            threshold: bound as f64,
            pass: value >= bound,
        }
    }

    pub fn flag(name: &str, value: bool, expected: bool) -> Self {
        Check {
            name: name.to_string(),
            value: value as u8 as f64,
            threshold: expected as u8 as f64,
            pass: value == expected,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub input: InputInfo,
    pub tol: f64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl Report {
    pub fn new(input: InputInfo, tol: f64, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        Report {
            schema: REPORT_SCHEMA,
            input,
            tol,
            seed,
            checks,
            passed,
        extra: None,
        }
    }

    pub fn with_extra(mut self, extra: serde_json::Value) -> Self {
        self.extra = Some(extra);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
