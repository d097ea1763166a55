//! Layered circuits: gate lists with per-layer disjointness, depth counting,
//! light cones, and inversion.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gates::Gate;

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    layers: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, layers: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn push_layer(&mut self, gates: Vec<Gate>) -> Result<()> {
        let mut used = BTreeSet::new();
        for g in &gates {
            for &q in &g.qubits {
                if q >= self.n {
                    return Err(Error::InvalidInput(format!(
                        "gate targets qubit {q} on an {}-qubit circuit",
                        self.n
                    )));
                }
                if !used.insert(q) {
                    return Err(Error::InvalidInput(format!(
                        "layer gates overlap on qubit {q}"
                    )));
                }
            }
        }
        self.layers.push(gates);
        Ok(())
    }

    /// Append one gate as its own layer.
    pub fn push_gate(&mut self, gate: Gate) -> Result<()> {
        self.push_layer(vec![gate])
    }

    /// Append gates, greedily packing each into the earliest layer (at or
    /// after `from_layer`) whose qubits are free. Preserves gate order on
    /// overlapping qubits.
    pub fn pack_gates(&mut self, gates: Vec<Gate>) -> Result<()> {
        let from_layer = self.layers.len();
        let mut occupancy: Vec<BTreeSet<usize>> = Vec::new();
        for g in gates {
            for &q in &g.qubits {
                if q >= self.n {
                    return Err(Error::InvalidInput(format!(
                        "gate targets qubit {q} on an {}-qubit circuit",
                        self.n
                    )));
                }
            }
            // earliest layer after the last layer touching these qubits
            let mut earliest = 0;
            for (i, occ) in occupancy.iter().enumerate() {
                if g.qubits.iter().any(|q| occ.contains(q)) {
                    earliest = i + 1;
                }
            }
            if earliest == occupancy.len() {
                occupancy.push(BTreeSet::new());
                self.layers.push(Vec::new());
            }
            occupancy[earliest].extend(g.qubits.iter().copied());
            self.layers[from_layer + earliest].push(g);
        }
        Ok(())
    }

    pub fn is_clifford(&self) -> bool {
        self.gates().all(Gate::is_clifford)
    }

    /// Append all layers of `other`.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::InvalidInput("circuit width mismatch".into()));
        }
        for layer in &other.layers {
            self.push_layer(layer.clone())?;
        }
        Ok(())
    }

    /// The inverse circuit: layers reversed, every gate daggered.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n: self.n,
            layers: self
                .layers
                .iter()
                .rev()
                .map(|layer| layer.iter().map(Gate::dagger).collect())
                .collect(),
        }
    }

    /// Forward light cone of `start`: the support that a Pauli seeded on
    /// `start` can reach under conjugation by this circuit (layers applied
    /// in order).
    pub fn lightcone(&self, start: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut cone = start.clone();
        for layer in &self.layers {
            let mut grown = cone.clone();
            for g in layer {
                if g.qubits.iter().any(|q| cone.contains(q)) {
                    grown.extend(g.qubits.iter().copied());
                }
            }
            cone = grown;
        }
        cone
    }

    /// Maximum single-qubit light-cone size.
    pub fn max_lightcone_size(&self) -> usize {
        (0..self.n)
            .map(|q| self.lightcone(&BTreeSet::from([q])).len())
            .max()
            .unwrap_or(0)
    }
}
