//! Dense statevector simulation (n ≤ 20).
//!
//! Gate application is bit-sliced index arithmetic over amplitude groups; a
//! multi-qubit gate never materializes its embedding into the full space.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::circuit::Circuit;
use crate::clifford::CliffordOp;
use crate::error::{Error, Result};
use crate::gates::{Gate, GatePayload};

pub const MAX_DENSE_QUBITS: usize = 20;

/// Norm drift beyond this triggers a recorded renormalization.
pub const RENORM_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
    renorm_events: u32,
}

impl StateVector {
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::SizeCap(format!(
                "dense backend supports 1..={MAX_DENSE_QUBITS} qubits, got {n}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps, renorm_events: 0 })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_QUBITS || amps.len() != 1 << n {
            return Err(Error::InvalidInput(format!(
                "expected 2^{n} amplitudes, got {}",
                amps.len()
            )));
        }
        let state = Self { n, amps, renorm_events: 0 };
        if (state.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput("state is not normalized".into()));
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn renormalization_events(&self) -> u32 {
        self.renorm_events
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Apply a single gate.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        for &q in &gate.qubits {
            if q >= self.n {
                return Err(Error::InvalidInput(format!(
                    "gate qubit {q} outside 0..{}",
                    self.n
                )));
            }
        }
        match &gate.payload {
            GatePayload::Named(g) => {
                let u = g.dense();
                self.apply_dense(&gate.qubits, &u);
            }
            GatePayload::Dense(u) => self.apply_dense(&gate.qubits, u),
            GatePayload::Clifford(c) => {
                for op in c.synthesize() {
                    self.apply_clifford_op(op, &gate.qubits);
                }
            }
            GatePayload::Pfc(p) => {
                let cl_ops = p.unitary.clifford.synthesize();
                if !p.inverted {
                    for op in cl_ops {
                        self.apply_clifford_op(op, &gate.qubits);
                    }
                    self.apply_subset_phase(&gate.qubits, |x| p.unitary.phase_sign(x));
                    self.apply_subset_permutation(&gate.qubits, |x| p.unitary.permutation.forward(x));
                } else {
                    self.apply_subset_permutation(&gate.qubits, |x| p.unitary.permutation.inverse(x));
                    self.apply_subset_phase(&gate.qubits, |x| p.unitary.phase_sign(x));
                    for op in cl_ops.into_iter().rev() {
                        self.apply_clifford_op(op.inverse(), &gate.qubits);
                    }
                }
            }
        }
        Ok(())
    }

    /// Run a circuit; norm drift above [`RENORM_THRESHOLD`] is repaired and
    /// counted.
    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n() != self.n {
            return Err(Error::InvalidInput("circuit width mismatch".into()));
        }
        for layer in circuit.layers() {
            for gate in layer {
                self.apply_gate(gate)?;
            }
        }
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > RENORM_THRESHOLD {
            let scale = 1.0 / norm.sqrt();
            for a in &mut self.amps {
                *a *= scale;
            }
            self.renorm_events += 1;
        }
        Ok(())
    }

    fn apply_dense(&mut self, qubits: &[usize], u: &DMatrix<C64>) {
        let m = qubits.len();
        let groups = 1usize << (self.n - m);
        let sub = 1usize << m;
        let mut sorted_pos: Vec<usize> = qubits.to_vec();
        sorted_pos.sort_unstable();
        let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << q).collect();
        let mut gathered = vec![C64::new(0.0, 0.0); sub];
        let mut indices = vec![0usize; sub];
        for c in 0..groups {
            let mut base = c;
            for &p in &sorted_pos {
                base = ((base >> p) << (p + 1)) | (base & ((1usize << p) - 1));
            }
            for (l, idx) in indices.iter_mut().enumerate() {
                let mut g = base;
                for (j, &mask) in masks.iter().enumerate() {
                    if (l >> j) & 1 == 1 {
                        g |= mask;
                    }
                }
                *idx = g;
            }
            for (l, &idx) in indices.iter().enumerate() {
                gathered[l] = self.amps[idx];
            }
            for (r, &idx) in indices.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (cidx, &g) in gathered.iter().enumerate() {
                    acc += u[(r, cidx)] * g;
                }
                self.amps[idx] = acc;
            }
        }
    }

    /// Apply one elementary Clifford op; `qubit_map[local]` is the global
    /// qubit index.
    fn apply_clifford_op(&mut self, op: CliffordOp, qubit_map: &[usize]) {
        let dim = self.amps.len();
        match op {
            CliffordOp::H(q) => {
                let bit = 1usize << qubit_map[q];
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..dim {
                    if i & bit == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = (a + b) * s;
                        self.amps[i | bit] = (a - b) * s;
                    }
                }
            }
            CliffordOp::S(q) => {
                let bit = 1usize << qubit_map[q];
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *a = C64::new(-a.im, a.re);
                    }
                }
            }
            CliffordOp::Sdg(q) => {
                let bit = 1usize << qubit_map[q];
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *a = C64::new(a.im, -a.re);
                    }
                }
            }
            CliffordOp::X(q) => {
                let bit = 1usize << qubit_map[q];
                for i in 0..dim {
                    if i & bit == 0 {
                        self.amps.swap(i, i | bit);
                    }
                }
            }
            CliffordOp::Z(q) => {
                let bit = 1usize << qubit_map[q];
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *a = -*a;
                    }
                }
            }
            CliffordOp::Cnot(c, t) => {
                let cb = 1usize << qubit_map[c];
                let tb = 1usize << qubit_map[t];
                for i in 0..dim {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            CliffordOp::Swap(a, b) => {
                let ab = 1usize << qubit_map[a];
                let bb = 1usize << qubit_map[b];
                for i in 0..dim {
                    if i & ab != 0 && i & bb == 0 {
                        self.amps.swap(i, (i & !ab) | bb);
                    }
                }
            }
        }
    }

    fn local_index(&self, global: usize, qubits: &[usize]) -> u64 {
        let mut l = 0u64;
        for (j, &q) in qubits.iter().enumerate() {
            l |= (((global >> q) & 1) as u64) << j;
        }
        l
    }

    fn apply_subset_phase<F: Fn(u64) -> f64>(&mut self, qubits: &[usize], sign: F) {
        for i in 0..self.amps.len() {
            let l = self.local_index(i, qubits);
            self.amps[i] *= sign(l);
        }
    }

    fn apply_subset_permutation<F: Fn(u64) -> u64>(&mut self, qubits: &[usize], map: F) {
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let l = self.local_index(i, qubits);
            let l2 = map(l);
            let mut g = i;
            for (j, &q) in qubits.iter().enumerate() {
                let bit = 1usize << q;
                if (l2 >> j) & 1 == 1 {
                    g |= bit;
                } else {
                    g &= !bit;
                }
            }
            out[g] = a;
        }
        self.amps = out;
    }

    /// Multiply amplitude `x` by `diag[x]` (a global diagonal operator).
    pub fn apply_global_diagonal(&mut self, diag: &[C64]) -> Result<()> {
        if diag.len() != self.amps.len() {
            return Err(Error::InvalidInput("diagonal length mismatch".into()));
        }
        for (a, d) in self.amps.iter_mut().zip(diag) {
            *a *= d;
        }
        Ok(())
    }

    /// Exact output distribution.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draw one computational-basis outcome.
    pub fn born_sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                return i;
            }
        }
        self.amps.len() - 1
    }

    /// Partial trace over the complement of `subset` (local bit `j` of the
    /// result is `subset[j]`).
    pub fn reduced_density(&self, subset: &[usize]) -> Result<DMatrix<C64>> {
        let s = subset.len();
        if s > 12 {
            return Err(Error::SizeCap(format!("reduced density on {s} qubits")));
        }
        let sub = 1usize << s;
        let rest: Vec<usize> = (0..self.n).filter(|q| !subset.contains(q)).collect();
        let mut rho = DMatrix::zeros(sub, sub);
        for e in 0..(1usize << rest.len()) {
            let mut base = 0usize;
            for (j, &q) in rest.iter().enumerate() {
                if (e >> j) & 1 == 1 {
                    base |= 1 << q;
                }
            }
            for i in 0..sub {
                let gi = place_bits(base, subset, i);
                let ai = self.amps[gi];
                if ai == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..sub {
                    let gj = place_bits(base, subset, j);
                    rho[(i, j)] += ai * self.amps[gj].conj();
                }
            }
        }
        Ok(rho)
    }

    /// `tr(ρ²)` of the reduced state on `subset`.
    pub fn purity(&self, subset: &[usize]) -> Result<f64> {
        let rho = self.reduced_density(subset)?;
        Ok(rho.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `⟨ψ|O|ψ⟩` for a dense operator on the full space.
    pub fn quadratic_form(&self, op: &DMatrix<C64>) -> C64 {
        let dim = self.amps.len();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..dim {
            let mut row = C64::new(0.0, 0.0);
            for c in 0..dim {
                row += op[(r, c)] * self.amps[c];
            }
            acc += self.amps[r].conj() * row;
        }
        acc
    }
}

fn place_bits(base: usize, subset: &[usize], local: usize) -> usize {
    let mut g = base;
    for (j, &q) in subset.iter().enumerate() {
        if (local >> j) & 1 == 1 {
            g |= 1 << q;
        }
    }
    g
}

/// Full unitary of a circuit, built column-by-column (n ≤ 12).
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<C64>> {
    let n = circuit.n();
    if n > 12 {
        return Err(Error::SizeCap(format!("dense unitary of an {n}-qubit circuit")));
    }
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let mut psi = StateVector::basis_state(n, b)?;
        psi.run(circuit)?;
        for (i, &a) in psi.amplitudes().iter().enumerate() {
            u[(i, b)] = a;
        }
    }
    Ok(u)
}
