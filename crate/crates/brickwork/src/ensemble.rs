//! Random-circuit ensembles: Haar and Clifford samplers, local random
//! circuits, the `P·F·C` composite, and the two-layer brickwork construction
//! that glues small random unitaries on patch pairs into a global ensemble.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::clifford::sample_random_clifford;
use crate::error::{Error, Result};
use crate::gates::{Gate, GatePayload, PfcGate};
use crate::geometry::Geometry;
use crate::pfc::PfcUnitary;
use crate::rng::{mix64, RngStream};

/// Haar-distributed unitary on a `dim`-dimensional space: complex Ginibre
/// matrix, QR, then the phases of the triangular diagonal folded into `Q`.
pub fn haar_unitary_dim<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed real orthogonal matrix (embedded into complex entries).
pub fn haar_orthogonal_dim<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r_diag = qr.r().diagonal();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        if *d < 0.0 {
            for i in 0..dim {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    DMatrix::from_fn(dim, dim, |i, j| C64::new(q[(i, j)], 0.0))
}

/// Haar-random unitary on `m_qubits ≤ 6` qubits.
pub fn sample_haar_unitary<R: Rng>(m_qubits: usize, rng: &mut R) -> Result<DMatrix<C64>> {
    if m_qubits == 0 || m_qubits > 6 {
        return Err(Error::SizeCap(format!(
            "dense Haar sampling supports 1..=6 qubits, got {m_qubits}"
        )));
    }
    Ok(haar_unitary_dim(1 << m_qubits, rng))
}

/// What each small brickwork unitary is drawn from.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LocalKind {
    /// Haar on the whole patch pair (dense; patch pairs of ≤ 6 qubits).
    Haar,
    /// Uniformly random Clifford on the patch pair.
    Clifford,
    /// 1D local random circuit of the given depth on the patch pair.
    LocalRandomCircuit { depth: usize },
    /// Structural `P·F·C` keyed by `key_seed`.
    Pfc { key_seed: u64 },
}

/// Two-layer brickwork ensemble descriptor: `n` qubits in patches of `ξ`
/// (the last patch absorbs any remainder), with staggered patch-pair
/// unitaries drawn from `local_kind`. With a geometry attached, patches run
/// along its Hamiltonian-path order instead of the 1D line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrickworkSpec {
    pub n: usize,
    pub xi: usize,
    pub local_kind: LocalKind,
    pub geometry: Option<Geometry>,
}

impl BrickworkSpec {
    pub fn line(n: usize, xi: usize, local_kind: LocalKind) -> Self {
        Self { n, xi, local_kind, geometry: None }
    }

    /// Number of patches `m`.
    pub fn patch_count(&self) -> Result<usize> {
        if self.xi == 0 {
            return Err(Error::InvalidInput("patch size ξ must be positive".into()));
        }
        let m = self.n / self.xi;
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "need n ≥ 2ξ (two patches); got n = {}, ξ = {}",
                self.n, self.xi
            )));
        }
        Ok(m)
    }

    /// Patch qubit lists in path order. Patch `p < m−1` has exactly `ξ`
    /// qubits; the last patch absorbs the remainder.
    pub fn patches(&self) -> Result<Vec<Vec<usize>>> {
        let m = self.patch_count()?;
        let order: Vec<usize> = match &self.geometry {
            None => (0..self.n).collect(),
            Some(g) => {
                if g.num_vertices() != self.n {
                    return Err(Error::InvalidInput(format!(
                        "geometry has {} vertices for an {}-qubit ensemble",
                        g.num_vertices(),
                        self.n
                    )));
                }
                crate::geometry::hamiltonian_path_g4(g, 0)?.order
            }
        };
        let mut patches = Vec::with_capacity(m);
        for p in 0..m {
            let start = p * self.xi;
            let end = if p == m - 1 { self.n } else { (p + 1) * self.xi };
            patches.push(order[start..end].to_vec());
        }
        Ok(patches)
    }
}

fn sample_patch_gate<R: Rng>(
    qubits: Vec<usize>,
    kind: LocalKind,
    gate_index: usize,
    rng: &mut R,
) -> Result<Vec<Vec<Gate>>> {
    let mq = qubits.len();
    match kind {
        LocalKind::Haar => {
            let u = sample_haar_unitary(mq, rng)?;
            Ok(vec![vec![Gate::dense(qubits, u)?]])
        }
        LocalKind::Clifford => {
            let c = sample_random_clifford(mq, rng)?;
            Ok(vec![vec![Gate::clifford(qubits, c)?]])
        }
        LocalKind::LocalRandomCircuit { depth } => {
            if depth == 0 {
                return Err(Error::InvalidInput("local random circuit depth must be ≥ 1".into()));
            }
            let mut layers = Vec::with_capacity(depth);
            for d in 0..depth {
                let start = d % 2;
                let mut layer = Vec::new();
                let mut i = start;
                while i + 1 < mq {
                    let u = haar_unitary_dim(4, rng);
                    layer.push(Gate::dense(vec![qubits[i], qubits[i + 1]], u)?);
                    i += 2;
                }
                layers.push(layer);
            }
            Ok(layers)
        }
        LocalKind::Pfc { key_seed } => {
            let key = mix64(key_seed ^ mix64(gate_index as u64));
            let unitary = PfcUnitary::from_key(mq, key)?;
            Ok(vec![vec![Gate::new(
                qubits,
                GatePayload::Pfc(PfcGate { unitary, inverted: false }),
            )?]])
        }
    }
}

/// Build one sample of the two-layer brickwork ensemble: `m−1` small
/// unitaries, `⌈m/2⌉` on patch pairs `(0,1),(2,3),…` in the first layer and
/// the rest on `(1,2),(3,4),…` in the second.
pub fn build_brickwork<R: Rng>(spec: &BrickworkSpec, rng: &mut R) -> Result<Circuit> {
    let patches = spec.patches()?;
    let m = patches.len();
    let mut circuit = Circuit::new(spec.n);
    let mut gate_index = 0usize;
    for layer_parity in 0..2usize {
        // sub-layers let LocalRandomCircuit patches contribute real depth
        let mut sublayers: Vec<Vec<Gate>> = Vec::new();
        let mut p = layer_parity;
        while p + 1 < m {
            let mut qubits = patches[p].clone();
            qubits.extend(patches[p + 1].iter().copied());
            let gate_layers = sample_patch_gate(qubits, spec.local_kind, gate_index, rng)?;
            gate_index += 1;
            for (i, mut gates) in gate_layers.into_iter().enumerate() {
                if sublayers.len() <= i {
                    sublayers.push(Vec::new());
                }
                sublayers[i].append(&mut gates);
            }
            p += 2;
        }
        for layer in sublayers {
            if !layer.is_empty() {
                circuit.push_layer(layer)?;
            }
        }
    }
    Ok(circuit)
}

/// 1D local random circuit: alternating even/odd brickwork of two-qubit
/// Haar gates.
pub fn build_local_random_circuit<R: Rng>(
    m_qubits: usize,
    depth: usize,
    rng: &mut R,
) -> Result<Circuit> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be ≥ 1".into()));
    }
    let mut circuit = Circuit::new(m_qubits);
    for d in 0..depth {
        let start = d % 2;
        let mut layer = Vec::new();
        let mut i = start;
        while i + 1 < m_qubits {
            layer.push(Gate::dense(vec![i, i + 1], haar_unitary_dim(4, rng))?);
            i += 2;
        }
        circuit.push_layer(layer)?;
    }
    Ok(circuit)
}

/// Structural `P·F·C` composite on `n` qubits as a one-gate circuit.
pub fn build_pfc(n_qubits: usize, key_seed: u64) -> Result<Circuit> {
    let unitary = PfcUnitary::from_key(n_qubits, key_seed)?;
    let mut circuit = Circuit::new(n_qubits);
    circuit.push_gate(Gate::new(
        (0..n_qubits).collect(),
        GatePayload::Pfc(PfcGate { unitary, inverted: false }),
    )?)?;
    Ok(circuit)
}

/// A distribution over circuits that can be sampled per stream. Samplers
/// are immutable descriptions, so they are `Sync` and parallel drivers can
/// evaluate batches on independent substreams.
pub trait CircuitSampler: Sync {
    fn n(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Circuit>;

    /// Convenience: sample with the `index`-th substream of `base`.
    fn sample_indexed(&self, base: RngStream, index: u64) -> Result<Circuit> {
        self.sample(&mut base.substream(index).rng())
    }
}

impl CircuitSampler for BrickworkSpec {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Circuit> {
        build_brickwork(self, rng)
    }
}

/// One global Haar unitary on all `n` qubits.
#[derive(Copy, Clone, Debug)]
pub struct HaarEnsemble {
    pub n: usize,
}

impl CircuitSampler for HaarEnsemble {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Circuit> {
        if self.n > 10 {
            return Err(Error::SizeCap(format!(
                "global Haar ensemble supports 1..=10 qubits, got {}",
                self.n
            )));
        }
        let mut c = Circuit::new(self.n);
        c.push_gate(Gate::dense((0..self.n).collect(), haar_unitary_dim(1 << self.n, rng))?)?;
        Ok(c)
    }
}

/// One global uniformly random Clifford on all `n` qubits.
#[derive(Copy, Clone, Debug)]
pub struct GlobalCliffordEnsemble {
    pub n: usize,
}

impl CircuitSampler for GlobalCliffordEnsemble {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Circuit> {
        let mut c = Circuit::new(self.n);
        c.push_gate(Gate::clifford(
            (0..self.n).collect(),
            sample_random_clifford(self.n, rng)?,
        )?)?;
        Ok(c)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TwoQubitKind {
    Haar,
    Clifford,
}

/// Depth-`d` 1D brickwork of independent two-qubit gates.
#[derive(Copy, Clone, Debug)]
pub struct RandomCircuit1d {
    pub n: usize,
    pub depth: usize,
    pub kind: TwoQubitKind,
}

impl CircuitSampler for RandomCircuit1d {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Circuit> {
        match self.kind {
            TwoQubitKind::Haar => build_local_random_circuit(self.n, self.depth, rng),
            TwoQubitKind::Clifford => {
                let mut circuit = Circuit::new(self.n);
                for d in 0..self.depth {
                    let start = d % 2;
                    let mut layer = Vec::new();
                    let mut i = start;
                    while i + 1 < self.n {
                        layer.push(Gate::clifford(
                            vec![i, i + 1],
                            sample_random_clifford(2, rng)?,
                        )?);
                        i += 2;
                    }
                    circuit.push_layer(layer)?;
                }
                Ok(circuit)
            }
        }
    }
}

/// A deterministic "ensemble" that always yields the same circuit.
#[derive(Clone, Debug)]
pub struct FixedCircuit(pub Circuit);

impl CircuitSampler for FixedCircuit {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn sample(&self, _rng: &mut ChaCha8Rng) -> Result<Circuit> {
        Ok(self.0.clone())
    }
}

/// Random local two-qubit-gate circuit on a `rows × cols` grid; layers cycle
/// through the four brickwork edge classes. Qubit `(r, c)` is index
/// `r·cols + c`.
pub fn build_grid_random_circuit<R: Rng>(
    rows: usize,
    cols: usize,
    depth: usize,
    rng: &mut R,
) -> Result<Circuit> {
    let n = rows * cols;
    let mut circuit = Circuit::new(n);
    for d in 0..depth {
        let mut layer = Vec::new();
        match d % 4 {
            0 | 1 => {
                // horizontal pairs, staggered by layer parity
                let start = (d % 4) % 2;
                for r in 0..rows {
                    let mut c = start;
                    while c + 1 < cols {
                        layer.push(Gate::dense(
                            vec![r * cols + c, r * cols + c + 1],
                            haar_unitary_dim(4, rng),
                        )?);
                        c += 2;
                    }
                }
            }
            _ => {
                let start = d % 2;
                for c in 0..cols {
                    let mut r = start;
                    while r + 1 < rows {
                        layer.push(Gate::dense(
                            vec![r * cols + c, (r + 1) * cols + c],
                            haar_unitary_dim(4, rng),
                        )?);
                        r += 2;
                    }
                }
            }
        }
        if !layer.is_empty() {
            circuit.push_layer(layer)?;
        }
    }
    Ok(circuit)
}
