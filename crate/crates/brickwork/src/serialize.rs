//! JSON wire formats.
//!
//! Circuits serialize as
//! `{"n": int, "layers": [[{"qubits": [...], "kind": "dense|clifford|named|pfc", "data": ...}]]}`
//! with dense matrices as row-major `[re, im]` pairs and Clifford tableaux
//! as 0/1 bit rows. Serialization is deterministic and round-trips
//! bit-exactly.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use crate::circuit::Circuit;
use crate::clifford::{CliffordElement, PauliBits};
use crate::error::{Error, Result};
use crate::gates::{Gate, GatePayload, NamedGate, PfcGate};
use crate::pfc::{FeistelPermutation, PfcUnitary};
use crate::statevector::StateVector;

fn err(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Row-major `[re, im]` pairs.
pub fn matrix_to_json(m: &DMatrix<C64>) -> Value {
    let rows = m.nrows();
    let cols = m.ncols();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let z = m[(r, c)];
            out.push(json!([z.re, z.im]));
        }
    }
    json!({ "rows": rows, "cols": cols, "entries": out })
}

pub fn matrix_from_json(v: &Value) -> Result<DMatrix<C64>> {
    let rows = v["rows"].as_u64().ok_or_else(|| err("matrix: missing rows"))? as usize;
    let cols = v["cols"].as_u64().ok_or_else(|| err("matrix: missing cols"))? as usize;
    let entries = v["entries"].as_array().ok_or_else(|| err("matrix: missing entries"))?;
    if entries.len() != rows * cols {
        return Err(err("matrix: entry count mismatch"));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (i, e) in entries.iter().enumerate() {
        let pair = e.as_array().filter(|a| a.len() == 2).ok_or_else(|| err("matrix: bad entry"))?;
        let re = pair[0].as_f64().ok_or_else(|| err("matrix: bad re"))?;
        let im = pair[1].as_f64().ok_or_else(|| err("matrix: bad im"))?;
        m[(i / cols, i % cols)] = C64::new(re, im);
    }
    Ok(m)
}

fn clifford_to_json(c: &CliffordElement) -> Value {
    let m = c.num_qubits();
    let row = |p: &PauliBits| -> Value {
        let mut bits = Vec::with_capacity(2 * m + 1);
        for q in 0..m {
            bits.push(json!(((p.x >> q) & 1) as u8));
        }
        for q in 0..m {
            bits.push(json!(((p.z >> q) & 1) as u8));
        }
        bits.push(json!(p.sign as u8));
        Value::Array(bits)
    };
    let mut rows = Vec::with_capacity(2 * m);
    for i in 0..m {
        rows.push(row(c.image_of_x(i)));
    }
    for i in 0..m {
        rows.push(row(c.image_of_z(i)));
    }
    json!({ "m": m, "rows": rows })
}

fn clifford_from_json(v: &Value) -> Result<CliffordElement> {
    let m = v["m"].as_u64().ok_or_else(|| err("clifford: missing m"))? as usize;
    let rows = v["rows"].as_array().ok_or_else(|| err("clifford: missing rows"))?;
    if rows.len() != 2 * m {
        return Err(err("clifford: row count mismatch"));
    }
    let parse_row = |r: &Value| -> Result<PauliBits> {
        let bits = r.as_array().filter(|a| a.len() == 2 * m + 1).ok_or_else(|| err("clifford: bad row"))?;
        let mut p = PauliBits::identity();
        for (q, b) in bits[..m].iter().enumerate() {
            if b.as_u64() == Some(1) {
                p.x |= 1 << q;
            }
        }
        for (q, b) in bits[m..2 * m].iter().enumerate() {
            if b.as_u64() == Some(1) {
                p.z |= 1 << q;
            }
        }
        p.sign = bits[2 * m].as_u64() == Some(1);
        Ok(p)
    };
    let xs: Vec<PauliBits> = rows[..m].iter().map(&parse_row).collect::<Result<_>>()?;
    let zs: Vec<PauliBits> = rows[m..].iter().map(&parse_row).collect::<Result<_>>()?;
    CliffordElement::from_rows(m, xs, zs)
}

fn named_to_json(g: &NamedGate) -> Value {
    match g {
        NamedGate::H => json!({ "name": "h" }),
        NamedGate::S => json!({ "name": "s" }),
        NamedGate::X => json!({ "name": "x" }),
        NamedGate::Y => json!({ "name": "y" }),
        NamedGate::Z => json!({ "name": "z" }),
        NamedGate::Cnot => json!({ "name": "cnot" }),
        NamedGate::Swap => json!({ "name": "swap" }),
        NamedGate::Rz(theta) => json!({ "name": "rz", "theta": theta }),
    }
}

fn named_from_json(v: &Value) -> Result<NamedGate> {
    let name = v["name"].as_str().ok_or_else(|| err("named: missing name"))?;
    Ok(match name {
        "h" => NamedGate::H,
        "s" => NamedGate::S,
        "x" => NamedGate::X,
        "y" => NamedGate::Y,
        "z" => NamedGate::Z,
        "cnot" => NamedGate::Cnot,
        "swap" => NamedGate::Swap,
        "rz" => NamedGate::Rz(v["theta"].as_f64().ok_or_else(|| err("rz: missing theta"))?),
        other => return Err(err(format!("unknown gate name {other}"))),
    })
}

fn pfc_to_json(p: &PfcGate) -> Value {
    json!({
        "n": p.unitary.n,
        "clifford": clifford_to_json(&p.unitary.clifford),
        "phase_key": p.unitary.phase_key,
        "feistel_key": p.unitary.permutation.key,
        "inverted": p.inverted,
    })
}

fn pfc_from_json(v: &Value) -> Result<PfcGate> {
    let n = v["n"].as_u64().ok_or_else(|| err("pfc: missing n"))? as usize;
    Ok(PfcGate {
        unitary: PfcUnitary {
            n,
            clifford: clifford_from_json(&v["clifford"])?,
            phase_key: v["phase_key"].as_u64().ok_or_else(|| err("pfc: missing phase_key"))?,
            permutation: FeistelPermutation::new(
                n,
                v["feistel_key"].as_u64().ok_or_else(|| err("pfc: missing feistel_key"))?,
            )?,
        },
        inverted: v["inverted"].as_bool().unwrap_or(false),
    })
}

pub fn gate_to_json(g: &Gate) -> Value {
    let (kind, data) = match &g.payload {
        GatePayload::Dense(u) => ("dense", matrix_to_json(u)),
        GatePayload::Clifford(c) => ("clifford", clifford_to_json(c)),
        GatePayload::Named(n) => ("named", named_to_json(n)),
        GatePayload::Pfc(p) => ("pfc", pfc_to_json(p)),
    };
    let mut map = Map::new();
    map.insert("qubits".into(), json!(g.qubits));
    map.insert("kind".into(), json!(kind));
    map.insert("data".into(), data);
    Value::Object(map)
}

pub fn gate_from_json(v: &Value) -> Result<Gate> {
    let qubits: Vec<usize> = v["qubits"]
        .as_array()
        .ok_or_else(|| err("gate: missing qubits"))?
        .iter()
        .map(|q| q.as_u64().map(|q| q as usize).ok_or_else(|| err("gate: bad qubit")))
        .collect::<Result<_>>()?;
    let payload = match v["kind"].as_str() {
        Some("dense") => GatePayload::Dense(matrix_from_json(&v["data"])?),
        Some("clifford") => GatePayload::Clifford(clifford_from_json(&v["data"])?),
        Some("named") => GatePayload::Named(named_from_json(&v["data"])?),
        Some("pfc") => GatePayload::Pfc(pfc_from_json(&v["data"])?),
        _ => return Err(err("gate: unknown kind")),
    };
    Gate::new(qubits, payload)
}

pub fn circuit_to_json(c: &Circuit) -> Value {
    let layers: Vec<Value> = c
        .layers()
        .iter()
        .map(|layer| Value::Array(layer.iter().map(gate_to_json).collect()))
        .collect();
    json!({ "n": c.n(), "layers": layers })
}

pub fn circuit_from_json(v: &Value) -> Result<Circuit> {
    let n = v["n"].as_u64().ok_or_else(|| err("circuit: missing n"))? as usize;
    let mut circuit = Circuit::new(n);
    for layer in v["layers"].as_array().ok_or_else(|| err("circuit: missing layers"))? {
        let gates: Vec<Gate> = layer
            .as_array()
            .ok_or_else(|| err("circuit: bad layer"))?
            .iter()
            .map(gate_from_json)
            .collect::<Result<_>>()?;
        circuit.push_layer(gates)?;
    }
    Ok(circuit)
}

pub fn circuit_to_string(c: &Circuit) -> String {
    serde_json::to_string_pretty(&circuit_to_json(c)).expect("serializable")
}

pub fn circuit_from_str(s: &str) -> Result<Circuit> {
    let v: Value = serde_json::from_str(s).map_err(|e| err(format!("bad JSON: {e}")))?;
    circuit_from_json(&v)
}

/// Amplitude-array export for test fixtures (n ≤ 12).
pub fn state_to_json(psi: &StateVector) -> Result<Value> {
    if psi.n() > 12 {
        return Err(Error::SizeCap("state export supports n ≤ 12".into()));
    }
    let amps: Vec<Value> = psi.amplitudes().iter().map(|z| json!([z.re, z.im])).collect();
    Ok(json!({ "n": psi.n(), "amplitudes": amps }))
}

pub fn state_from_json(v: &Value) -> Result<StateVector> {
    let n = v["n"].as_u64().ok_or_else(|| err("state: missing n"))? as usize;
    let amps: Vec<C64> = v["amplitudes"]
        .as_array()
        .ok_or_else(|| err("state: missing amplitudes"))?
        .iter()
        .map(|pair| {
            let a = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| err("state: bad amp"))?;
            Ok(C64::new(
                a[0].as_f64().ok_or_else(|| err("state: bad re"))?,
                a[1].as_f64().ok_or_else(|| err("state: bad im"))?,
            ))
        })
        .collect::<Result<_>>()?;
    StateVector::from_amplitudes(n, amps)
}

/// One snapshot as an NDJSON line: `{"circuit": ..., "b": "0101"}`,
/// where character `q` of `b` is the outcome of qubit `q`.
pub fn snapshot_to_json(s: &crate::shadows::Snapshot) -> Value {
    let b: String = s.outcome.iter().map(|&bit| if bit { '1' } else { '0' }).collect();
    json!({ "circuit": circuit_to_json(&s.circuit), "b": b })
}

pub fn snapshot_from_json(v: &Value) -> Result<crate::shadows::Snapshot> {
    let circuit = circuit_from_json(&v["circuit"])?;
    let b = v["b"].as_str().ok_or_else(|| err("snapshot: missing b"))?;
    if b.len() != circuit.n() {
        return Err(err("snapshot: outcome length mismatch"));
    }
    Ok(crate::shadows::Snapshot {
        circuit,
        outcome: b.chars().map(|c| c == '1').collect(),
    })
}

pub fn snapshots_to_ndjson(snaps: &[crate::shadows::Snapshot]) -> String {
    let mut out = String::new();
    for s in snaps {
        out.push_str(&serde_json::to_string(&snapshot_to_json(s)).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn snapshots_from_ndjson(text: &str) -> Result<Vec<crate::shadows::Snapshot>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let v: Value = serde_json::from_str(line).map_err(|e| err(format!("bad NDJSON: {e}")))?;
            snapshot_from_json(&v)
        })
        .collect()
}
