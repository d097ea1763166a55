//! Browser bindings for the brickwork toolkit. Each export takes plain
//! numbers/strings and returns one JSON document, so the page stays a
//! single static file with no framework.

use serde_json::json;
use wasm_bindgen::prelude::*;

use brickwork::circuit::Circuit;
use brickwork::ensemble::{BrickworkSpec, CircuitSampler, LocalKind, RandomCircuit1d, TwoQubitKind};
use brickwork::geometry::{hamiltonian_path_g4, random_connected_graph};
use brickwork::perm::design_depth_budget;
use brickwork::rng::RngStream;
use brickwork::verifier::{collision_probability, ProductBasis};

fn err_json(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// Sample one two-layer brickwork circuit and describe its structure:
/// patches, gate spans per layer, and the patch-size budget for a target
/// design error.
#[wasm_bindgen]
pub fn brickwork_layout(n: usize, xi: usize, kind: &str, seed: u64, k: usize, eps: f64) -> String {
    let local_kind = match kind {
        "haar" => LocalKind::Haar,
        "clifford" => LocalKind::Clifford,
        "lrc" => LocalKind::LocalRandomCircuit { depth: 4 },
        "pfc" => LocalKind::Pfc { key_seed: seed },
        other => return err_json(format!("unknown kind {other}")),
    };
    let spec = BrickworkSpec::line(n, xi, local_kind);
    let patches = match spec.patches() {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let circuit = match spec.sample_indexed(RngStream::new(seed), 0) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let gates: Vec<_> = circuit
        .layers()
        .iter()
        .enumerate()
        .flat_map(|(layer, gates)| {
            gates.iter().map(move |g| {
                json!({
                    "layer": layer,
                    "qubits": g.qubits,
                    "clifford": g.is_clifford(),
                })
            })
        })
        .collect();
    let budget = design_depth_budget(n.max(4), k.max(1), eps.clamp(1e-6, 1.0)).ok();
    json!({
        "n": n,
        "xi": xi,
        "patches": patches,
        "depth": circuit.depth(),
        "gate_count": circuit.gate_count(),
        "gates": gates,
        "max_lightcone": circuit.max_lightcone_size(),
        "budget": budget.map(|b| json!({
            "xi_min": b.xi_min,
            "patches": b.patches,
            "total_error_bound": b.total_error_bound,
        })),
    })
    .to_string()
}

/// Random connected bounded-degree graph plus its Hamiltonian path on the
/// distance-4 neighborhood graph.
#[wasm_bindgen]
pub fn geometry_path(n: usize, max_degree: usize, seed: u64, root: usize) -> String {
    let mut rng = RngStream::new(seed).rng();
    let g = match random_connected_graph(n, max_degree, &mut rng) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let root = root.min(n.saturating_sub(1));
    let path = match hamiltonian_path_g4(&g, root) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    json!({
        "n": n,
        "edges": g.edges(),
        "max_degree": g.max_degree(),
        "order": path.order,
        "jumps": path.jump_distances,
        "max_jump": path.jump_distances.iter().max().copied().unwrap_or(0),
        "valid": path.is_valid_for(&g),
    })
    .to_string()
}

/// Collision probability Z of depth-d 1D Clifford brickwork circuits for
/// d = 0..=max_depth, with the light-cone lower bound and the Haar value.
#[wasm_bindgen]
pub fn collision_curve(n: usize, max_depth: usize, samples: u64, seed: u64) -> String {
    if n > 16 {
        return err_json("demo caps at n = 16");
    }
    let samples = samples.clamp(50, 5000);
    let mut rows = Vec::new();
    for depth in 0..=max_depth.min(8) {
        let report = if depth == 0 {
            collision_probability(
                &brickwork::ensemble::FixedCircuit(Circuit::new(n)),
                ProductBasis::Clifford,
                samples,
                RngStream::with_stream(seed, depth as u64),
            )
        } else {
            let spec = RandomCircuit1d { n, depth, kind: TwoQubitKind::Clifford };
            collision_probability(
                &spec,
                ProductBasis::Clifford,
                samples,
                RngStream::with_stream(seed, depth as u64),
            )
        };
        match report {
            Ok(r) => rows.push(json!({
                "depth": depth,
                "z": r.z_estimate,
                "sigma": r.std_error,
                "bound": r.lower_bound_value,
                "lightcone": r.lightcone_size,
                "haar": r.haar_reference,
            })),
            Err(e) => return err_json(e),
        }
    }
    json!({ "n": n, "samples": samples, "rows": rows }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_json_parses() {
        let s = brickwork_layout(8, 2, "clifford", 7, 2, 0.5);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["gate_count"], 3);
        assert!(v["error"].is_null());
    }

    #[test]
    fn geometry_json_parses() {
        let s = geometry_path(24, 4, 3, 0);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["valid"], serde_json::Value::Bool(true));
        assert!(v["max_jump"].as_u64().unwrap() <= 4);
    }

    #[test]
    fn collision_json_parses() {
        let s = collision_curve(6, 3, 100, 1);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 4);
        // depth 0 is the product state: Z = (4/3)^n up to noise, above the bound
        assert!(rows[0]["z"].as_f64().unwrap() > 1.0);
    }
}
