//! Quantitative design diagnostics: Monte Carlo moment channels against the
//! exact Haar twirl, frame potentials, collision-probability statistics with
//! the light-cone depth bound, the SWAP-test purity bound, and the
//! orthogonal-ensemble EPR test.
//!
//! Every estimator is built from mergeable batch accumulators so parallel
//! drivers can evaluate batches on independent substreams and combine them
//! deterministically.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::sample_random_clifford;
use crate::ensemble::{haar_unitary_dim, haar_orthogonal_dim, CircuitSampler};
use crate::error::{Error, Result};
use crate::linalg::{kron_power, trace_norm_hermitian};
use crate::perm::MomentOperatorDense;
use crate::rng::RngStream;
use crate::statevector::{circuit_unitary, StateVector};
use crate::tableau::StabilizerTableau;

/// Mergeable scalar moment accumulator.
#[derive(Copy, Clone, Debug, Default, Serialize, Deserialize)]
pub struct ScalarAccumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl ScalarAccumulator {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean: empirical std / √count.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Probe operator `A` for the `k`-fold moment channel.
#[derive(Clone, Debug)]
pub enum Probe {
    /// `A = (|ψ⟩⟨ψ|)^{⊗k}` for an `n`-qubit pure state; the cheap path.
    PureTensorPower(Vec<C64>),
    /// `A = |Ψ⟩⟨Ψ|` for a state on the full `D^k` space.
    Rank1(Vec<C64>),
    /// Arbitrary dense `A` (small `D^k` only).
    Dense(DMatrix<C64>),
}

impl Probe {
    pub fn zero_state_power(n: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); 1 << n];
        v[0] = C64::new(1.0, 0.0);
        Probe::PureTensorPower(v)
    }

    /// The probe as an explicit moment operator.
    pub fn to_moment_operator(&self, k: usize, n: usize) -> Result<MomentOperatorDense> {
        match self {
            Probe::PureTensorPower(psi) => {
                let mut big = psi.clone();
                for _ in 1..k {
                    big = tensor_vec(&big, psi);
                }
                MomentOperatorDense::new(k, n, outer(&big))
            }
            Probe::Rank1(v) => MomentOperatorDense::new(k, n, outer(v)),
            Probe::Dense(a) => MomentOperatorDense::new(k, n, a.clone()),
        }
    }
}

fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

fn outer(v: &[C64]) -> DMatrix<C64> {
    let dim = v.len();
    DMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj())
}

fn apply_unitary_to_vec(u: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let dim = u.nrows();
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (c, &amp) in v.iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        for r in 0..dim {
            out[r] += u[(r, c)] * amp;
        }
    }
    out
}

/// Apply `U` to the `slot`-th tensor factor of a `D^k`-dimensional vector.
fn apply_to_slot(u: &DMatrix<C64>, v: &mut [C64], slot: usize, d: usize, k: usize) {
    let stride = d.pow(slot as u32);
    let outer_blocks = d.pow((k - slot - 1) as u32);
    let mut scratch = vec![C64::new(0.0, 0.0); d];
    for ob in 0..outer_blocks {
        for inner in 0..stride {
            let base = ob * stride * d + inner;
            for (a, s) in scratch.iter_mut().enumerate() {
                *s = v[base + a * stride];
            }
            for r in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..d {
                    acc += u[(r, c)] * scratch[c];
                }
                v[base + r * stride] = acc;
            }
        }
    }
}

/// One batch of the Monte Carlo moment channel.
#[derive(Clone, Debug)]
pub struct MomentBatch {
    pub count: u64,
    pub sum: DMatrix<C64>,
    /// Σ ‖sample‖²_F, for the exact Frobenius standard error.
    pub sum_fro_sq: f64,
}

/// Empirical `Φ_E(A)` over one batch of samples drawn from substreams
/// `stream.substream(first_index + i)`.
pub fn moment_channel_batch<S: CircuitSampler + ?Sized>(
    sampler: &S,
    k: usize,
    probe: &Probe,
    batch_samples: u64,
    stream: RngStream,
    first_index: u64,
) -> Result<MomentBatch> {
    let n = sampler.n();
    if n * k > 12 {
        return Err(Error::SizeCap(format!(
            "dense moment probe needs nk ≤ 12; got n = {n}, k = {k}"
        )));
    }
    let d = 1usize << n;
    let dim = d.pow(k as u32);
    let mut sum = DMatrix::zeros(dim, dim);
    let mut sum_fro_sq = 0.0;
    for i in 0..batch_samples {
        let circuit = sampler.sample(&mut stream.substream(first_index + i).rng())?;
        let u = circuit_unitary(&circuit)?;
        match probe {
            Probe::PureTensorPower(psi) => {
                let w = apply_unitary_to_vec(&u, psi);
                let mut big = w.clone();
                for _ in 1..k {
                    big = tensor_vec(&big, &w);
                }
                accumulate_outer(&mut sum, &big);
                let norm_sq: f64 = big.iter().map(|z| z.norm_sqr()).sum();
                sum_fro_sq += norm_sq * norm_sq;
            }
            Probe::Rank1(v) => {
                let mut big = v.clone();
                for slot in 0..k {
                    apply_to_slot(&u, &mut big, slot, d, k);
                }
                accumulate_outer(&mut sum, &big);
                let norm_sq: f64 = big.iter().map(|z| z.norm_sqr()).sum();
                sum_fro_sq += norm_sq * norm_sq;
            }
            Probe::Dense(a) => {
                let w = kron_power(&u, k);
                let m = &w * a * w.adjoint();
                sum_fro_sq += m.iter().map(|z| z.norm_sqr()).sum::<f64>();
                sum += m;
            }
        }
    }
    Ok(MomentBatch { count: batch_samples, sum, sum_fro_sq })
}

fn accumulate_outer(sum: &mut DMatrix<C64>, v: &[C64]) {
    let dim = v.len();
    for j in 0..dim {
        let cj = v[j].conj();
        if cj == C64::new(0.0, 0.0) {
            continue;
        }
        for i in 0..dim {
            sum[(i, j)] += v[i] * cj;
        }
    }
}

/// Monte Carlo estimate of the `k`-fold moment channel on a fixed probe.
#[derive(Clone, Debug)]
pub struct MomentEstimate {
    pub k: usize,
    pub n: usize,
    pub mean_channel_output: MomentOperatorDense,
    pub sample_count: u64,
    /// Frobenius-norm standard error of the mean matrix.
    pub standard_error: f64,
    /// Per-batch means, for jackknife error bars on derived scalars.
    pub batch_means: Vec<DMatrix<C64>>,
}

pub fn moment_estimate_from_batches(
    k: usize,
    n: usize,
    batches: Vec<MomentBatch>,
) -> Result<MomentEstimate> {
    let count: u64 = batches.iter().map(|b| b.count).sum();
    if count == 0 {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let dim = batches[0].sum.nrows();
    let mut total = DMatrix::zeros(dim, dim);
    let mut sum_fro_sq = 0.0;
    let mut batch_means = Vec::with_capacity(batches.len());
    for b in &batches {
        total += &b.sum;
        sum_fro_sq += b.sum_fro_sq;
        batch_means.push(&b.sum / C64::new(b.count as f64, 0.0));
    }
    let mean = total / C64::new(count as f64, 0.0);
    let mean_fro_sq: f64 = mean.iter().map(|z| z.norm_sqr()).sum();
    let nf = count as f64;
    // E‖M̄ − μ‖²_F = Var_F / count with Var_F the per-sample Frobenius variance
    let var = ((sum_fro_sq - nf * mean_fro_sq) / (nf - 1.0)).max(0.0);
    Ok(MomentEstimate {
        k,
        n,
        mean_channel_output: MomentOperatorDense::new(k, n, mean)?,
        sample_count: count,
        standard_error: (var / nf).sqrt(),
        batch_means,
    })
}

/// Single-driver convenience: `batches` sequential batches.
pub fn moment_channel_mc<S: CircuitSampler + ?Sized>(
    sampler: &S,
    k: usize,
    probe: &Probe,
    samples: u64,
    batches: u64,
    stream: RngStream,
) -> Result<MomentEstimate> {
    let batches = batches.clamp(1, samples.max(1));
    let mut out = Vec::new();
    let mut done = 0;
    for b in 0..batches {
        let this = samples / batches + u64::from(b < samples % batches);
        out.push(moment_channel_batch(sampler, k, probe, this, stream, done)?);
        done += this;
    }
    moment_estimate_from_batches(k, sampler.n(), out)
}

impl MomentEstimate {
    /// Trace distance to a reference operator, with a leave-one-batch-out
    /// jackknife standard error.
    pub fn trace_distance_to(&self, reference: &MomentOperatorDense) -> (f64, f64) {
        let mean = &self.mean_channel_output.matrix;
        let distance = 0.5 * trace_norm_hermitian(&(mean - &reference.matrix));
        let b = self.batch_means.len();
        if b < 2 {
            return (distance, f64::NAN);
        }
        let bf = b as f64;
        let mut loo = Vec::with_capacity(b);
        for m in &self.batch_means {
            let without = (mean * C64::new(bf, 0.0) - m) / C64::new(bf - 1.0, 0.0);
            loo.push(0.5 * trace_norm_hermitian(&(without - &reference.matrix)));
        }
        let avg: f64 = loo.iter().sum::<f64>() / bf;
        let var: f64 = loo.iter().map(|d| (d - avg) * (d - avg)).sum::<f64>() * (bf - 1.0) / bf;
        (distance, var.sqrt())
    }
}

/// Monte Carlo Choi state of an ensemble twirl,
/// `[Φ_E ⊗ 1](P_EPR) = E_U[vec(U^{⊗k}) vec(U^{⊗k})†]/D^k`,
/// comparable entrywise to the closed-form Choi states of `Φ_a` and `Φ_H`.
pub fn choi_of_ensemble_mc<S: CircuitSampler + ?Sized>(
    sampler: &S,
    k: usize,
    samples: u64,
    stream: RngStream,
) -> Result<DMatrix<C64>> {
    let n = sampler.n();
    let bits = 2 * n * k;
    if bits > 16 {
        return Err(Error::SizeCap(format!(
            "Monte Carlo Choi needs 2nk ≤ 16, got {bits}"
        )));
    }
    let side = 1usize << (n * k);
    let dim = side * side;
    let norm = 1.0 / ((n * k) as f64).exp2() / samples as f64;
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..samples {
        let circuit = sampler.sample(&mut stream.substream(i).rng())?;
        let u = circuit_unitary(&circuit)?;
        let w = kron_power(&u, k);
        // vec(W) in the pairing |row⟩⊗|col⟩ matching σ⊗σ Choi states
        let vecw: Vec<C64> = (0..dim).map(|idx| w[(idx / side, idx % side)]).collect();
        for (j, &b) in vecw.iter().enumerate() {
            let bc = b.conj() * norm;
            if bc == C64::new(0.0, 0.0) {
                continue;
            }
            for (r, &a) in vecw.iter().enumerate() {
                out[(r, j)] += a * bc;
            }
        }
    }
    Ok(out)
}

// --- frame potential ---

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FramePotentialReport {
    pub k: usize,
    pub estimate: f64,
    pub std_error: f64,
    /// Haar value `k!` (for `2^n ≥ k`).
    pub haar_value: f64,
    pub pair_samples: u64,
}

pub fn frame_potential_batch<S: CircuitSampler + ?Sized>(
    sampler: &S,
    k: usize,
    pairs: u64,
    stream: RngStream,
    first_index: u64,
) -> Result<ScalarAccumulator> {
    if sampler.n() > 12 {
        return Err(Error::SizeCap("frame potential needs n ≤ 12".into()));
    }
    if k > 4 {
        return Err(Error::SizeCap("frame potential supports k ≤ 4".into()));
    }
    let mut acc = ScalarAccumulator::default();
    for i in 0..pairs {
        let base = first_index + i;
        let u = circuit_unitary(&sampler.sample(&mut stream.substream(2 * base).rng())?)?;
        let v = circuit_unitary(&sampler.sample(&mut stream.substream(2 * base + 1).rng())?)?;
        let t: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
        acc.push(t.norm_sqr().powi(k as i32));
    }
    Ok(acc)
}

pub fn frame_potential<S: CircuitSampler + ?Sized>(
    sampler: &S,
    k: usize,
    pair_samples: u64,
    stream: RngStream,
) -> Result<FramePotentialReport> {
    let acc = frame_potential_batch(sampler, k, pair_samples, stream, 0)?;
    Ok(FramePotentialReport {
        k,
        estimate: acc.mean(),
        std_error: acc.std_error(),
        haar_value: crate::perm::factorial(k) as f64,
        pair_samples,
    })
}

// --- collision probability ---

/// Basis for the random product measurement; both choices are single-qubit
/// 2-designs, which is all the twirl formula needs.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProductBasis {
    Haar,
    Clifford,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollisionReport {
    pub n: usize,
    pub z_estimate: f64,
    pub std_error: f64,
    /// Exact finite-size Haar value `2D/(D+1)`.
    pub haar_reference: f64,
    /// `1 + n/3^L`.
    pub lower_bound_value: f64,
    /// Light-cone size `L` used in the bound (max over single qubits).
    pub lightcone_size: usize,
    pub samples: u64,
}

pub fn collision_probability_batch<S: CircuitSampler + ?Sized>(
    sampler: &S,
    basis: ProductBasis,
    samples: u64,
    stream: RngStream,
    first_index: u64,
) -> Result<ScalarAccumulator> {
    let n = sampler.n();
    let mut acc = ScalarAccumulator::default();
    for i in 0..samples {
        let sub = stream.substream(first_index + i);
        let mut rng = sub.rng();
        let circuit = sampler.sample(&mut rng)?;
        let use_tableau = circuit.is_clifford() && basis == ProductBasis::Clifford;
        if use_tableau {
            let mut tab = StabilizerTableau::zero_state(n)?;
            tab.run(&circuit)?;
            for q in 0..n {
                let c1 = sample_random_clifford(1, &mut rng)?;
                // v† on qubit q
                for op in c1.inverse().synthesize() {
                    tab.apply_clifford_op(op, &[q]);
                }
            }
            let r = tab.random_measurement_count();
            acc.push(((n - r) as f64).exp2());
        } else {
            if n > 14 {
                return Err(Error::SizeCap(format!(
                    "dense collision sampling needs n ≤ 14, got {n}"
                )));
            }
            let mut psi = StateVector::zero_state(n)?;
            psi.run(&circuit)?;
            for q in 0..n {
                let v = match basis {
                    ProductBasis::Haar => haar_unitary_dim(2, &mut rng),
                    ProductBasis::Clifford => {
                        sample_random_clifford(1, &mut rng)?.to_dense()?
                    }
                };
                psi.apply_gate(&crate::gates::Gate::dense(vec![q], v.adjoint())?)?;
            }
            let z: f64 = psi.probabilities().iter().map(|p| p * p).sum();
            acc.push((n as f64).exp2() * z);
        }
    }
    Ok(acc)
}

pub fn collision_probability<S: CircuitSampler + ?Sized>(
    sampler: &S,
    basis: ProductBasis,
    samples: u64,
    stream: RngStream,
) -> Result<CollisionReport> {
    let acc = collision_probability_batch(sampler, basis, samples, stream, 0)?;
    collision_report_from_acc(sampler, acc, stream)
}

pub fn collision_report_from_acc<S: CircuitSampler + ?Sized>(
    sampler: &S,
    acc: ScalarAccumulator,
    stream: RngStream,
) -> Result<CollisionReport> {
    let n = sampler.n();
    let d = (n as f64).exp2();
    // light cone from one sampled circuit; the gate layout is a property of
    // the ensemble, not of the random draw
    let probe_circuit = sampler.sample(&mut stream.substream(u64::MAX / 2).rng())?;
    let lightcone_size = probe_circuit.max_lightcone_size().max(1);
    let z = acc.mean();
    // Σ p² ≥ 1/2^n forces Z ≥ 1; a violation beyond noise is a bug
    if z < 1.0 - 6.0 * acc.std_error() - 1e-9 {
        return Err(Error::Numerical(format!("collision estimate {z} below the Z ≥ 1 floor")));
    }
    Ok(CollisionReport {
        n,
        z_estimate: z,
        std_error: acc.std_error(),
        haar_reference: 2.0 * d / (d + 1.0),
        lower_bound_value: 1.0 + n as f64 / 3f64.powi(lightcone_size as i32),
        lightcone_size,
        samples: acc.count,
    })
}

// --- SWAP-test purity bound ---

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwapTestReport {
    pub n: usize,
    pub lightcone: Vec<usize>,
    pub purity_mean: f64,
    pub std_error: f64,
    /// `2^{−L+1}`: the exact value when the light cone covers the operator.
    pub shallow_reference: f64,
    /// `2^{−L} + 2^{−L}(4^L − 1)/(4^n − 1)`: the Haar-random value.
    pub haar_reference: f64,
    /// Largest per-sample deviation from `shallow_reference`.
    pub max_dev_from_shallow: f64,
    pub samples: u64,
}

/// `E[tr(ρ_L²)]` for `ρ = (1 + U Z₀ U†)/2^n` restricted to `lightcone`.
pub fn swap_test_lower_bound<S: CircuitSampler + ?Sized>(
    sampler: &S,
    lightcone: &[usize],
    samples: u64,
    stream: RngStream,
) -> Result<SwapTestReport> {
    let n = sampler.n();
    let l = lightcone.len();
    if l > 12 || n > 12 {
        return Err(Error::SizeCap("SWAP-test bound needs n ≤ 12 and |L| ≤ 12".into()));
    }
    let mut acc = ScalarAccumulator::default();
    let mut max_dev: f64 = 0.0;
    let shallow = (1.0 - l as f64).exp2();
    for i in 0..samples {
        let circuit = sampler.sample(&mut stream.substream(i).rng())?;
        let u = circuit_unitary(&circuit)?;
        // M = U Z₀ U†  (columns of U scaled by ±1, times U†)
        let dim = 1usize << n;
        let mut uz = u.clone();
        for c in 0..dim {
            if c & 1 == 1 {
                for r in 0..dim {
                    uz[(r, c)] = -uz[(r, c)];
                }
            }
        }
        let m = uz * u.adjoint();
        let m_red = partial_trace(&m, n, lightcone);
        let scale = 1.0 / ((n - l) as f64).exp2();
        // tr(ρ_L²) = 2^{−2L} (2^L + tr(M̃²)), M̃ = Tr_rest(M)/2^{n−L};
        // M̃ is Hermitian, so tr(M̃²) is the squared Frobenius norm
        let tr_m2: f64 = m_red.iter().map(|z| (z * scale).norm_sqr()).sum();
        let purity = ((l as f64).exp2() + tr_m2) / (2.0 * l as f64).exp2();
        acc.push(purity);
        max_dev = max_dev.max((purity - shallow).abs());
    }
    let lf = l as f64;
    let nf = n as f64;
    Ok(SwapTestReport {
        n,
        lightcone: lightcone.to_vec(),
        purity_mean: acc.mean(),
        std_error: acc.std_error(),
        shallow_reference: shallow,
        haar_reference: (-lf).exp2() + (-lf).exp2() * ((2.0 * lf).exp2() - 1.0) / ((2.0 * nf).exp2() - 1.0),
        max_dev_from_shallow: max_dev,
        samples,
    })
}

/// Partial trace keeping `keep` (local bit `j` of the result is `keep[j]`).
pub fn partial_trace(m: &DMatrix<C64>, n: usize, keep: &[usize]) -> DMatrix<C64> {
    let s = keep.len();
    let sub = 1usize << s;
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let mut out = DMatrix::zeros(sub, sub);
    for e in 0..(1usize << rest.len()) {
        let mut base = 0usize;
        for (j, &q) in rest.iter().enumerate() {
            if (e >> j) & 1 == 1 {
                base |= 1 << q;
            }
        }
        for i in 0..sub {
            let gi = place(base, keep, i);
            for j in 0..sub {
                out[(i, j)] += m[(gi, place(base, keep, j))];
            }
        }
    }
    out
}

fn place(base: usize, subset: &[usize], local: usize) -> usize {
    let mut g = base;
    for (j, &q) in subset.iter().enumerate() {
        if (local >> j) & 1 == 1 {
            g |= 1 << q;
        }
    }
    g
}

// --- orthogonal-ensemble EPR test ---

/// What to apply to the perturbed EPR state, as `V ⊗ V̄`.
#[derive(Clone, Debug)]
pub enum EprTestOp {
    Identity,
    /// Haar-orthogonal on the listed qubits of the first half.
    Orthogonal { support: Vec<usize> },
    /// Haar-unitary on the listed qubits of the first half.
    Unitary { support: Vec<usize> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EprFidelityProfile {
    pub n: usize,
    /// Mean Bell fidelity of pair `(i, n+i)`.
    pub pair_fidelity: Vec<f64>,
    pub pair_std_error: Vec<f64>,
    pub samples: u64,
}

/// Prepare `(Z₀ ⊗ 1)|Ψ_EPR⟩` on `2n` qubits, apply `V ⊗ V̄`, and measure the
/// per-pair Bell fidelity profile.
pub fn orthogonal_epr_test(n: usize, op: &EprTestOp, samples: u64, stream: RngStream) -> Result<EprFidelityProfile> {
    if n > 8 {
        return Err(Error::SizeCap("EPR test simulates 2n ≤ 16 qubits".into()));
    }
    let mut accs = vec![ScalarAccumulator::default(); n];
    for s in 0..samples {
        let mut rng = stream.substream(s).rng();
        let mut psi = StateVector::zero_state(2 * n)?;
        for i in 0..n {
            psi.apply_gate(&crate::gates::Gate::named(vec![i], crate::gates::NamedGate::H)?)?;
            psi.apply_gate(&crate::gates::Gate::named(vec![i, n + i], crate::gates::NamedGate::Cnot)?)?;
        }
        // perturbation on the first qubit of the first half
        psi.apply_gate(&crate::gates::Gate::named(vec![0], crate::gates::NamedGate::Z)?)?;
        match op {
            EprTestOp::Identity => {}
            EprTestOp::Orthogonal { support } => {
                let o = haar_orthogonal_dim(1 << support.len(), &mut rng);
                psi.apply_gate(&crate::gates::Gate::dense(support.clone(), o.clone())?)?;
                let mirrored: Vec<usize> = support.iter().map(|&q| n + q).collect();
                psi.apply_gate(&crate::gates::Gate::dense(mirrored, o)?)?;
            }
            EprTestOp::Unitary { support } => {
                let u = haar_unitary_dim(1 << support.len(), &mut rng);
                let conj = u.map(|z| z.conj());
                psi.apply_gate(&crate::gates::Gate::dense(support.clone(), u)?)?;
                let mirrored: Vec<usize> = support.iter().map(|&q| n + q).collect();
                psi.apply_gate(&crate::gates::Gate::dense(mirrored, conj)?)?;
            }
        }
        for i in 0..n {
            let rho = psi.reduced_density(&[i, n + i])?;
            let f = 0.5 * (rho[(0, 0)] + rho[(0, 3)] + rho[(3, 0)] + rho[(3, 3)]).re;
            accs[i].push(f);
        }
    }
    Ok(EprFidelityProfile {
        n,
        pair_fidelity: accs.iter().map(ScalarAccumulator::mean).collect(),
        pair_std_error: accs.iter().map(ScalarAccumulator::std_error).collect(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{BrickworkSpec, FixedCircuit, HaarEnsemble, GlobalCliffordEnsemble, LocalKind};
    use crate::perm::haar_twirl_exact;

    #[test]
    fn haar_ensemble_moment_channel_converges() {
        // single Haar patch covering all n: Φ_E = Φ_H up to MC error
        let sampler = HaarEnsemble { n: 2 };
        let probe = Probe::zero_state_power(2);
        let est = moment_channel_mc(&sampler, 2, &probe, 4000, 20, RngStream::new(5)).unwrap();
        let exact = haar_twirl_exact(&probe.to_moment_operator(2, 2).unwrap()).unwrap();
        let (dist, sigma) = est.trace_distance_to(&exact);
        assert!(dist < 5.0 * sigma.max(est.standard_error * 4.0) + 0.05, "dist {dist}, σ {sigma}");
        // rate check: quadrupling samples halves the distance-ish; just
        // confirm the error scale is sane
        assert!(est.standard_error < 0.02);
    }

    #[test]
    fn one_design_depolarizes_at_k1() {
        // k = 1 with Clifford patches: Φ(A) = tr(A)·1/2^n
        let spec = BrickworkSpec::line(3, 1, LocalKind::Clifford);
        let probe = Probe::zero_state_power(3);
        let est = moment_channel_mc(&spec, 1, &probe, 3000, 10, RngStream::new(6)).unwrap();
        let flat = MomentOperatorDense::new(
            1,
            3,
            DMatrix::identity(8, 8) / C64::new(8.0, 0.0),
        )
        .unwrap();
        let (dist, _) = est.trace_distance_to(&flat);
        assert!(dist < 0.05, "distance {dist}");
    }

    #[test]
    fn frame_potential_values() {
        // fixed circuit → D^{2k} exactly
        let fixed = FixedCircuit(crate::circuit::Circuit::new(2));
        let fp = frame_potential(&fixed, 2, 50, RngStream::new(1)).unwrap();
        assert!((fp.estimate - 256.0).abs() < 1e-9);

        // Haar at n=2, k=2 → 2 ± 3σ
        let haar = HaarEnsemble { n: 2 };
        let fp = frame_potential(&haar, 2, 8000, RngStream::new(2)).unwrap();
        assert!(
            (fp.estimate - 2.0).abs() < 3.0 * fp.std_error,
            "frame potential {} ± {}",
            fp.estimate,
            fp.std_error
        );

        // global Clifford is an exact 2-design
        let cl = GlobalCliffordEnsemble { n: 2 };
        let fp = frame_potential(&cl, 2, 8000, RngStream::new(3)).unwrap();
        assert!((fp.estimate - 2.0).abs() < 3.0 * fp.std_error);
    }

    #[test]
    fn collision_identity_circuit() {
        // depth-0 circuit at n=4: Z = (4/3)^4, L = 1, bound 1 + 4/3
        let fixed = FixedCircuit(crate::circuit::Circuit::new(4));
        let report = collision_probability(&fixed, ProductBasis::Haar, 4000, RngStream::new(7)).unwrap();
        let expect = (4.0f64 / 3.0).powi(4);
        assert!(
            (report.z_estimate - expect).abs() < 3.0 * report.std_error,
            "Z {} ± {} vs {expect}",
            report.z_estimate,
            report.std_error
        );
        assert_eq!(report.lightcone_size, 1);
        assert!((report.lower_bound_value - (1.0 + 4.0 / 3.0)).abs() < 1e-12);
        assert!(report.z_estimate >= report.lower_bound_value - 3.0 * report.std_error);
    }

    #[test]
    fn collision_haar_matches_reference() {
        for n in [2usize, 3] {
            let haar = HaarEnsemble { n };
            let report = collision_probability(&haar, ProductBasis::Haar, 4000, RngStream::new(8)).unwrap();
            assert!(
                (report.z_estimate - report.haar_reference).abs() < 3.0 * report.std_error,
                "n={n}: Z {} ± {} vs {}",
                report.z_estimate,
                report.std_error,
                report.haar_reference
            );
        }
    }

    #[test]
    fn collision_clifford_tableau_path() {
        // Clifford basis + Clifford circuit runs on the tableau; at n=2 the
        // global Clifford ensemble must reproduce 2D/(D+1)
        let cl = GlobalCliffordEnsemble { n: 2 };
        let report = collision_probability(&cl, ProductBasis::Clifford, 6000, RngStream::new(9)).unwrap();
        assert!(
            (report.z_estimate - report.haar_reference).abs() < 3.0 * report.std_error,
            "Z {} ± {}",
            report.z_estimate,
            report.std_error
        );
    }

    #[test]
    fn swap_test_shallow_exactness_and_haar() {
        // depth-1 1D circuit at n=4: light cone of qubit 0 is {0,1};
        // purity = 2^{−L+1} exactly per sample
        let spec = crate::ensemble::RandomCircuit1d {
            n: 4,
            depth: 1,
            kind: crate::ensemble::TwoQubitKind::Haar,
        };
        let report = swap_test_lower_bound(&spec, &[0, 1], 40, RngStream::new(10)).unwrap();
        assert!(report.max_dev_from_shallow < 1e-9, "dev {}", report.max_dev_from_shallow);
        assert!((report.purity_mean - 0.5).abs() < 1e-9);

        // Haar at n=4 with L = {0,1}: matches 2^{−L} + 2^{−L}(4^L−1)/(4^n−1)
        let haar = HaarEnsemble { n: 4 };
        let report = swap_test_lower_bound(&haar, &[0, 1], 3000, RngStream::new(11)).unwrap();
        assert!(
            (report.purity_mean - report.haar_reference).abs() < 3.0 * report.std_error,
            "purity {} ± {} vs {}",
            report.purity_mean,
            report.std_error,
            report.haar_reference
        );
        // n = L: the two references coincide
        let full = swap_test_lower_bound(&haar, &[0, 1, 2, 3], 10, RngStream::new(12)).unwrap();
        assert!((full.shallow_reference - full.haar_reference).abs() < 1e-12);
    }

    #[test]
    fn epr_test_profiles() {
        let n = 4;
        // identity: pair 0 carries the Z perturbation (fidelity 0), others 1
        let id = orthogonal_epr_test(n, &EprTestOp::Identity, 3, RngStream::new(13)).unwrap();
        assert!(id.pair_fidelity[0].abs() < 1e-12);
        for i in 1..n {
            assert!((id.pair_fidelity[i] - 1.0).abs() < 1e-12);
        }

        // orthogonal depth-1 on (0,1): pairs 2.. stay at fidelity exactly 1
        let orth = orthogonal_epr_test(
            n,
            &EprTestOp::Orthogonal { support: vec![0, 1] },
            60,
            RngStream::new(14),
        )
        .unwrap();
        for i in 2..n {
            assert!(
                (orth.pair_fidelity[i] - 1.0).abs() < 1e-10,
                "pair {i}: {}",
                orth.pair_fidelity[i]
            );
        }

        // global Haar unitary: mean fidelity near (4^{n−1}−1)/(4^n−1), well below 0.9
        let unit = orthogonal_epr_test(
            n,
            &EprTestOp::Unitary { support: (0..n).collect() },
            400,
            RngStream::new(15),
        )
        .unwrap();
        let reference = ((4.0f64).powi(n as i32 - 1) - 1.0) / ((4.0f64).powi(n as i32) - 1.0);
        let mean: f64 = unit.pair_fidelity.iter().sum::<f64>() / n as f64;
        let sigma: f64 = unit.pair_std_error.iter().sum::<f64>() / n as f64;
        assert!(mean < 0.9);
        assert!((mean - reference).abs() < 4.0 * sigma, "mean {mean} vs {reference} (σ {sigma})");
    }
}
