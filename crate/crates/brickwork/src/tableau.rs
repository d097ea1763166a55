//! Stabilizer-state simulation in the destabilizer/stabilizer tableau
//! representation (n ≤ 4096).
//!
//! Rows `0..n` are destabilizer generators, rows `n..2n` stabilizer
//! generators; each row is a sign-carrying Pauli stored as packed X/Z bit
//! words. Measurement follows the standard deterministic/random split with
//! destabilizer bookkeeping.

use rand::Rng;

use crate::circuit::Circuit;
use crate::clifford::{CliffordOp, PauliBits};
use crate::error::{Error, Result};
use crate::gates::{Gate, GatePayload};

pub const MAX_TABLEAU_QUBITS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    /// X bits, row-major: `x[row * words + w]`.
    x: Vec<u64>,
    z: Vec<u64>,
    /// Signs: `r[row] ∈ {0, 1}` for `±1`.
    r: Vec<u8>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MeasureOutcome {
    pub value: bool,
    pub was_random: bool,
}

impl StabilizerTableau {
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_TABLEAU_QUBITS {
            return Err(Error::SizeCap(format!(
                "tableau backend supports 1..={MAX_TABLEAU_QUBITS} qubits, got {n}"
            )));
        }
        let words = n.div_ceil(64);
        let mut t = Self {
            n,
            words,
            x: vec![0; 2 * n * words],
            z: vec![0; 2 * n * words],
            r: vec![0; 2 * n],
        };
        for i in 0..n {
            t.set_x(i, i, true); // destabilizer X_i
            t.set_z(n + i, i, true); // stabilizer Z_i
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn get_x(&self, row: usize, q: usize) -> bool {
        (self.x[row * self.words + q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn get_z(&self, row: usize, q: usize) -> bool {
        (self.z[row * self.words + q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn set_x(&mut self, row: usize, q: usize, v: bool) {
        let w = row * self.words + q / 64;
        let bit = 1u64 << (q % 64);
        if v {
            self.x[w] |= bit;
        } else {
            self.x[w] &= !bit;
        }
    }

    #[inline]
    fn set_z(&mut self, row: usize, q: usize, v: bool) {
        let w = row * self.words + q / 64;
        let bit = 1u64 << (q % 64);
        if v {
            self.z[w] |= bit;
        } else {
            self.z[w] &= !bit;
        }
    }

    /// `row_h ← row_i · row_h` with exact sign tracking.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let (hx, hz) = (h * w, h * w);
        let (ix, iz) = (i * w, i * w);
        // i-exponent: Hermitian→XZ for both, commute X past Z, XZ→Hermitian
        let mut e: u32 = 2 * (self.r[h] as u32 + self.r[i] as u32);
        for k in 0..w {
            let (xi, zi) = (self.x[ix + k], self.z[iz + k]);
            let (xh, zh) = (self.x[hx + k], self.z[hz + k]);
            e += (xi & zi).count_ones() % 4;
            e += (xh & zh).count_ones() % 4;
            e += 2 * ((zi & xh).count_ones() % 2);
            e += 4 - ((xi ^ xh) & (zi ^ zh)).count_ones() % 4;
        }
        // destabilizer-row signs are never read, and those products may be
        // anti-Hermitian; stabilizer-row targets must come out Hermitian
        debug_assert!(h < self.n || e % 2 == 0, "non-Hermitian stabilizer rowsum");
        self.r[h] = (((e % 4) / 2) & 1) as u8;
        for k in 0..w {
            self.x[hx + k] ^= self.x[ix + k];
            self.z[hz + k] ^= self.z[iz + k];
        }
    }

    /// Apply an elementary Clifford op; `map[local]` is the global qubit.
    pub fn apply_clifford_op(&mut self, op: CliffordOp, map: &[usize]) {
        match op {
            CliffordOp::H(q) => {
                let q = map[q];
                for row in 0..2 * self.n {
                    let (xq, zq) = (self.get_x(row, q), self.get_z(row, q));
                    self.r[row] ^= (xq & zq) as u8;
                    self.set_x(row, q, zq);
                    self.set_z(row, q, xq);
                }
            }
            CliffordOp::S(q) => {
                let q = map[q];
                for row in 0..2 * self.n {
                    let (xq, zq) = (self.get_x(row, q), self.get_z(row, q));
                    self.r[row] ^= (xq & zq) as u8;
                    self.set_z(row, q, zq ^ xq);
                }
            }
            CliffordOp::Sdg(q) => {
                let q = map[q];
                for row in 0..2 * self.n {
                    let (xq, zq) = (self.get_x(row, q), self.get_z(row, q));
                    self.r[row] ^= (xq & !zq) as u8;
                    self.set_z(row, q, zq ^ xq);
                }
            }
            CliffordOp::X(q) => {
                let q = map[q];
                for row in 0..2 * self.n {
                    self.r[row] ^= self.get_z(row, q) as u8;
                }
            }
            CliffordOp::Z(q) => {
                let q = map[q];
                for row in 0..2 * self.n {
                    self.r[row] ^= self.get_x(row, q) as u8;
                }
            }
            CliffordOp::Cnot(c, t) => {
                let (c, t) = (map[c], map[t]);
                for row in 0..2 * self.n {
                    let (xc, zc) = (self.get_x(row, c), self.get_z(row, c));
                    let (xt, zt) = (self.get_x(row, t), self.get_z(row, t));
                    self.r[row] ^= (xc & zt & !(xt ^ zc)) as u8;
                    self.set_x(row, t, xt ^ xc);
                    self.set_z(row, c, zc ^ zt);
                }
            }
            CliffordOp::Swap(a, b) => {
                let (a, b) = (map[a], map[b]);
                for row in 0..2 * self.n {
                    let (xa, xb) = (self.get_x(row, a), self.get_x(row, b));
                    self.set_x(row, a, xb);
                    self.set_x(row, b, xa);
                    let (za, zb) = (self.get_z(row, a), self.get_z(row, b));
                    self.set_z(row, a, zb);
                    self.set_z(row, b, za);
                }
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if !gate.is_clifford() {
            return Err(Error::Backend(format!(
                "non-Clifford gate on {:?} sent to the stabilizer backend",
                gate.qubits
            )));
        }
        let ops = match &gate.payload {
            GatePayload::Named(g) => g.clifford_ops().unwrap(),
            GatePayload::Clifford(c) => c.synthesize(),
            _ => unreachable!("is_clifford filtered the rest"),
        };
        for op in ops {
            self.apply_clifford_op(op, &gate.qubits);
        }
        Ok(())
    }

    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n() != self.n {
            return Err(Error::InvalidInput("circuit width mismatch".into()));
        }
        for gate in circuit.gates() {
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    /// Is the Z-basis measurement of `q` random (as opposed to determined)?
    fn measurement_pivot(&self, q: usize) -> Option<usize> {
        (self.n..2 * self.n).find(|&p| self.get_x(p, q))
    }

    fn collapse(&mut self, q: usize, pivot: usize, value: bool) {
        let rows: Vec<usize> = (0..2 * self.n)
            .filter(|&i| i != pivot && self.get_x(i, q))
            .collect();
        for i in rows {
            self.rowsum(i, pivot);
        }
        // destabilizer partner takes the old stabilizer row
        let w = self.words;
        let (dst, src) = (pivot - self.n, pivot);
        for k in 0..w {
            self.x[dst * w + k] = self.x[src * w + k];
            self.z[dst * w + k] = self.z[src * w + k];
        }
        self.r[dst] = self.r[src];
        for k in 0..w {
            self.x[src * w + k] = 0;
            self.z[src * w + k] = 0;
        }
        self.set_z(src, q, true);
        self.r[src] = value as u8;
    }

    /// Value of a determined measurement of `q`: the product of the
    /// stabilizer rows selected by destabilizer X-bits equals `±Z_q`, and
    /// the sign is the outcome. Accumulation runs in `i^e · X^x Z^z` normal
    /// form; the selected rows commute, so the order is irrelevant.
    fn determined_value(&self, q: usize) -> bool {
        let w = self.words;
        let mut acc_x = vec![0u64; w];
        let mut acc_z = vec![0u64; w];
        let mut e: u32 = 0;
        for i in 0..self.n {
            if self.get_x(i, q) {
                let s = self.n + i;
                let mut es: u32 = 2 * self.r[s] as u32;
                let mut commute: u32 = 0;
                for k in 0..w {
                    let (xs, zs) = (self.x[s * w + k], self.z[s * w + k]);
                    es = (es + (xs & zs).count_ones()) % 4;
                    commute = (commute + (acc_z[k] & xs).count_ones()) % 2;
                    acc_x[k] ^= xs;
                    acc_z[k] ^= zs;
                }
                e = (e + es + 2 * commute) % 4;
            }
        }
        // ±Z_q has no Y content, so e is directly the sign exponent
        debug_assert!(acc_x.iter().all(|&v| v == 0), "product is not ±Z_q");
        debug_assert!(e % 2 == 0);
        e == 2
    }

    /// Measure qubit `q` in the Z basis.
    pub fn measure<R: Rng>(&mut self, q: usize, rng: &mut R) -> MeasureOutcome {
        match self.measurement_pivot(q) {
            Some(pivot) => {
                let value: bool = rng.gen();
                self.collapse(q, pivot, value);
                MeasureOutcome { value, was_random: true }
            }
            None => MeasureOutcome { value: self.determined_value(q), was_random: false },
        }
    }

    /// Measure qubit `q` while forcing the outcome; returns the Born
    /// probability of that outcome (1, 1/2, or 0).
    pub fn measure_forced(&mut self, q: usize, desired: bool) -> f64 {
        match self.measurement_pivot(q) {
            Some(pivot) => {
                self.collapse(q, pivot, desired);
                0.5
            }
            None => {
                if self.determined_value(q) == desired {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Draw one full computational-basis sample (qubit order 0..n).
    pub fn born_sample<R: Rng>(&self, rng: &mut R) -> Vec<bool> {
        let mut work = self.clone();
        (0..self.n).map(|q| work.measure(q, rng).value).collect()
    }

    /// Born probability of a full bitstring.
    pub fn probability_of(&self, bits: &[bool]) -> f64 {
        let mut work = self.clone();
        let mut p = 1.0;
        for (q, &b) in bits.iter().enumerate() {
            p *= work.measure_forced(q, b);
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    }

    /// Exact output distribution (n small).
    pub fn basis_probabilities(&self) -> Result<Vec<f64>> {
        if self.n > 16 {
            return Err(Error::SizeCap(format!(
                "dense distribution of a {}-qubit tableau",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        Ok((0..dim)
            .map(|idx| {
                let bits: Vec<bool> = (0..self.n).map(|q| (idx >> q) & 1 == 1).collect();
                self.probability_of(&bits)
            })
            .collect())
    }

    /// Number of random bits a full-basis measurement would consume; the
    /// output distribution is uniform over `2^count` strings.
    pub fn random_measurement_count(&self) -> usize {
        let mut work = self.clone();
        let mut count = 0;
        for q in 0..self.n {
            if work.measurement_pivot(q).is_some() {
                count += 1;
            }
            work.measure_forced(q, false);
        }
        count
    }

    /// Stabilizer rows as sign-carrying Paulis (n ≤ 64).
    pub fn stabilizer_rows(&self) -> Result<Vec<PauliBits>> {
        if self.n > 64 {
            return Err(Error::SizeCap("PauliBits view needs n ≤ 64".into()));
        }
        Ok((self.n..2 * self.n)
            .map(|row| {
                let mut p = PauliBits::identity();
                for q in 0..self.n {
                    if self.get_x(row, q) {
                        p.x |= 1 << q;
                    }
                    if self.get_z(row, q) {
                        p.z |= 1 << q;
                    }
                }
                p.sign = self.r[row] == 1;
                p
            })
            .collect())
    }
}

/// Conjugate a global Hermitian Pauli through a Clifford circuit:
/// `P ↦ U P U†` with `U` the whole circuit (n ≤ 64).
pub fn conjugate_pauli_through_circuit(circuit: &Circuit, p: &PauliBits) -> Result<PauliBits> {
    if circuit.n() > 64 {
        return Err(Error::SizeCap("Pauli propagation needs n ≤ 64".into()));
    }
    let mut current = *p;
    for gate in circuit.gates() {
        let local_mask: u64 = gate.qubits.iter().map(|&q| 1u64 << q).sum();
        if (current.x | current.z) & local_mask == 0 {
            continue;
        }
        let mut local = PauliBits::identity();
        for (j, &q) in gate.qubits.iter().enumerate() {
            if (current.x >> q) & 1 == 1 {
                local.x |= 1 << j;
            }
            if (current.z >> q) & 1 == 1 {
                local.z |= 1 << j;
            }
        }
        let image = gate.conjugate_local_pauli(&local).ok_or_else(|| {
            Error::Backend("non-Clifford gate in Pauli propagation".into())
        })?;
        current.sign ^= image.sign;
        for (j, &q) in gate.qubits.iter().enumerate() {
            let (xb, zb) = (1u64 << q, 1u64 << q);
            if (image.x >> j) & 1 == 1 {
                current.x |= xb;
            } else {
                current.x &= !xb;
            }
            if (image.z >> j) & 1 == 1 {
                current.z |= zb;
            } else {
                current.z &= !zb;
            }
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::sample_random_clifford;
    use crate::gates::NamedGate;
    use crate::rng::RngStream;
    use crate::statevector::StateVector;

    fn h(q: usize) -> Gate {
        Gate::named(vec![q], NamedGate::H).unwrap()
    }

    fn cnot(c: usize, t: usize) -> Gate {
        Gate::named(vec![c, t], NamedGate::Cnot).unwrap()
    }

    #[test]
    fn hadamard_gives_uniform_bit() {
        let mut t = StabilizerTableau::zero_state(1).unwrap();
        t.apply_gate(&h(0)).unwrap();
        let probs = t.basis_probabilities().unwrap();
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn bell_pair_stabilizers() {
        let mut t = StabilizerTableau::zero_state(2).unwrap();
        t.apply_gate(&h(0)).unwrap();
        t.apply_gate(&cnot(0, 1)).unwrap();
        let rows = t.stabilizer_rows().unwrap();
        assert_eq!(rows[0], PauliBits { x: 0b11, z: 0, sign: false }); // XX
        assert_eq!(rows[1], PauliBits { x: 0, z: 0b11, sign: false }); // ZZ
        // perfectly correlated outcomes
        let mut rng = RngStream::new(8).rng();
        for _ in 0..20 {
            let bits = t.born_sample(&mut rng);
            assert_eq!(bits[0], bits[1]);
        }
    }

    #[test]
    fn deterministic_outcomes_after_flip() {
        let mut t = StabilizerTableau::zero_state(3).unwrap();
        t.apply_gate(&Gate::named(vec![1], NamedGate::X).unwrap()).unwrap();
        let mut rng = RngStream::new(0).rng();
        let m0 = t.measure(0, &mut rng);
        let m1 = t.measure(1, &mut rng);
        assert!(!m0.was_random && !m0.value);
        assert!(!m1.was_random && m1.value);
    }

    #[test]
    fn forced_measurement_probabilities() {
        let mut t = StabilizerTableau::zero_state(2).unwrap();
        t.apply_gate(&h(0)).unwrap();
        t.apply_gate(&cnot(0, 1)).unwrap();
        assert_eq!(t.probability_of(&[false, false]), 0.5);
        assert_eq!(t.probability_of(&[true, true]), 0.5);
        assert_eq!(t.probability_of(&[true, false]), 0.0);
    }

    #[test]
    fn agrees_with_dense_backend_on_random_clifford_circuits() {
        let mut rng = RngStream::new(31).rng();
        for n in [2usize, 4, 8] {
            for trial in 0..(if n == 8 { 20 } else { 50 }) {
                let mut circuit = Circuit::new(n);
                for layer in 0..4 {
                    let start = layer % 2;
                    let mut gates = Vec::new();
                    let mut i = start;
                    while i + 1 < n {
                        gates.push(
                            Gate::clifford(vec![i, i + 1], sample_random_clifford(2, &mut rng).unwrap())
                                .unwrap(),
                        );
                        i += 2;
                    }
                    circuit.push_layer(gates).unwrap();
                }
                let mut tab = StabilizerTableau::zero_state(n).unwrap();
                tab.run(&circuit).unwrap();
                let tab_probs = tab.basis_probabilities().unwrap();

                let mut psi = StateVector::zero_state(n).unwrap();
                psi.run(&circuit).unwrap();
                let dense_probs = psi.probabilities();

                let tv: f64 = tab_probs
                    .iter()
                    .zip(&dense_probs)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
                    / 2.0;
                assert!(tv < 1e-9, "n={n} trial={trial}: TV {tv}");
            }
        }
    }

    #[test]
    fn rejects_non_clifford() {
        let mut t = StabilizerTableau::zero_state(2).unwrap();
        let rz = Gate::named(vec![0], NamedGate::Rz(0.3)).unwrap();
        assert!(matches!(t.apply_gate(&rz), Err(Error::Backend(_))));
    }

    #[test]
    fn random_measurement_count_counts_support() {
        // |+⟩|0⟩|+⟩: two random bits
        let mut t = StabilizerTableau::zero_state(3).unwrap();
        t.apply_gate(&h(0)).unwrap();
        t.apply_gate(&h(2)).unwrap();
        assert_eq!(t.random_measurement_count(), 2);
    }

    #[test]
    fn pauli_propagation_matches_dense() {
        let mut rng = RngStream::new(77).rng();
        for _ in 0..10 {
            let mut circuit = Circuit::new(3);
            for _ in 0..3 {
                circuit
                    .push_gate(
                        Gate::clifford(vec![0, 1, 2], sample_random_clifford(3, &mut rng).unwrap())
                            .unwrap(),
                    )
                    .unwrap();
            }
            let p = PauliBits::z_on(0);
            let image = conjugate_pauli_through_circuit(&circuit, &p).unwrap();
            // dense check
            let u = crate::statevector::circuit_unitary(&circuit).unwrap();
            let pd = |p: &PauliBits| {
                let m = 3;
                let mut out = nalgebra::DMatrix::<num_complex::Complex64>::identity(1, 1);
                for q in (0..m).rev() {
                    let f = match ((p.x >> q) & 1, (p.z >> q) & 1) {
                        (0, 0) => NamedGate::Rz(0.0).dense() * num_complex::Complex64::new(1.0, 0.0),
                        (1, 0) => NamedGate::X.dense(),
                        (1, 1) => NamedGate::Y.dense(),
                        _ => NamedGate::Z.dense(),
                    };
                    out = crate::linalg::kron(&out, &f);
                }
                if p.sign {
                    out = -out;
                }
                out
            };
            let lhs = &u * pd(&p) * u.adjoint();
            let rhs = pd(&image);
            assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-9));
        }
    }
}
