//! JSON serialization of run reports, matrices, and constellations.
//!
//! All interchange is JSON: complex numbers as [re, im] pairs, matrices as
//! row-major grids, stars as {x, y, z, mult} objects. Reports are
//! deterministic: the same inputs and seed produce identical bytes.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::stellar::{Constellation, MultiConstellation};
use crate::{CMat, Ket};

pub fn complex_json(c: Complex64) -> Value {
    json!([c.re, c.im])
}

/// Row-major grid of [re, im] pairs.
pub fn matrix_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| complex_json(m[(r, c)])).collect()))
            .collect(),
    )
}

pub fn ket_json(v: &Ket) -> Value {
    Value::Array(v.iter().map(|&c| complex_json(c)).collect())
}

pub fn constellation_json(c: &Constellation) -> Value {
    Value::Array(
        c.stars()
            .iter()
            .map(|(p, mult)| json!({"x": p.x, "y": p.y, "z": p.z, "mult": mult}))
            .collect(),
    )
}

/// The star-file schema: one entry per multiplet plus the spectator.
pub fn multiconstellation_json(mc: &MultiConstellation) -> Value {
    let multiplets: Vec<Value> = mc
        .multiplets
        .iter()
        .map(|m| {
            json!({
                "j": m.j.value(),
                "weight": complex_json(m.weight),
                "stars": m.constellation.as_ref().map(constellation_json).unwrap_or(json!([])),
            })
        })
        .collect();
    json!({
        "multiplets": multiplets,
        "spectator": mc.spectator.as_ref().map(constellation_json).unwrap_or(json!([])),
    })
}

/// A single named pass/fail check with its measured value and tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tol: f64,
}

/// The report emitted by every CLI command.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub diagnostics: Value,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            inputs: json!({}),
            outputs: json!({}),
            diagnostics: json!({}),
            verdicts: Vec::new(),
            pass: true,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, tol: f64) -> bool {
        let pass = value < tol;
        self.verdicts.push(Verdict { name: name.into(), pass, value, tol });
        self.pass &= pass;
        pass
    }

    pub fn check_bool(&mut self, name: impl Into<String>, pass: bool) -> bool {
        self.verdicts.push(Verdict { name: name.into(), pass, value: if pass { 0.0 } else { 1.0 }, tol: 1.0 });
        self.pass &= pass;
        pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
