//! Classical shadow tomography with randomized Clifford-style ensembles:
//! snapshot collection, inverse-map estimation via
//! `M⁻¹(O) = (2^n+1)·O − tr(O)·1`, median-of-means aggregation, and
//! empirical bias/variance probes.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::clifford::PauliBits;
use crate::ensemble::CircuitSampler;
use crate::error::{Error, Result};
use crate::gates::{Gate, NamedGate};
use crate::rng::RngStream;
use crate::statevector::StateVector;
use crate::tableau::{conjugate_pauli_through_circuit, StabilizerTableau};
use crate::verifier::ScalarAccumulator;

/// One classical snapshot: the sampled unitary and the measured bitstring.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub circuit: Circuit,
    pub outcome: Vec<bool>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Mean,
    MedianOfMeans { batches: usize },
}

/// `K = 2⌈ln(2/δ)⌉` at δ = 0.05.
pub fn default_median_batches() -> usize {
    2 * (2.0f64 / 0.05).ln().ceil() as usize
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowEstimate {
    pub value: f64,
    pub batch_means: Vec<f64>,
    pub n_snapshots: usize,
    pub method: Method,
    /// Standard error of the plain mean over all snapshots.
    pub std_error: f64,
}

/// Observables the estimator understands.
#[derive(Clone, Debug)]
pub enum Observable {
    Identity,
    /// Hermitian Pauli string.
    Pauli(PauliBits),
    /// Rank-1 stabilizer projector `|φ⟩⟨φ|`, given by a Clifford circuit
    /// preparing `|φ⟩` from `|0^n⟩`.
    StabilizerProjector(Circuit),
    /// Dense Hermitian operator (small n).
    Dense(DMatrix<C64>),
}

impl Observable {
    pub fn trace(&self, n: usize) -> Result<f64> {
        Ok(match self {
            Observable::Identity => (n as f64).exp2(),
            Observable::Pauli(p) => {
                if p.is_identity() {
                    let s = if p.sign { -1.0 } else { 1.0 };
                    s * (n as f64).exp2()
                } else {
                    0.0
                }
            }
            Observable::StabilizerProjector(_) => 1.0,
            Observable::Dense(o) => {
                let tr = o.diagonal().sum();
                if tr.im.abs() > 1e-9 {
                    return Err(Error::InvalidInput("observable is not Hermitian".into()));
                }
                tr.re
            }
        })
    }

    /// `tr(O₀²)` of the traceless part.
    pub fn traceless_square_trace(&self, n: usize) -> Result<f64> {
        let d = (n as f64).exp2();
        Ok(match self {
            Observable::Identity => 0.0,
            Observable::Pauli(p) => {
                if p.is_identity() {
                    0.0
                } else {
                    d
                }
            }
            Observable::StabilizerProjector(_) => 1.0 - 1.0 / d,
            Observable::Dense(o) => {
                let tr = self.trace(n)?;
                let fro_sq: f64 = o.iter().map(|z| z.norm_sqr()).sum();
                fro_sq - tr * tr / d
            }
        })
    }

    /// `⟨ψ|O|ψ⟩` for a dense state.
    pub fn expectation_in(&self, psi: &StateVector) -> Result<f64> {
        Ok(match self {
            Observable::Identity => 1.0,
            Observable::Pauli(p) => {
                let mut phi = psi.clone();
                apply_pauli_bits(&mut phi, p)?;
                let sign = if p.sign { -1.0 } else { 1.0 };
                sign * psi.inner(&phi).re
            }
            Observable::StabilizerProjector(prep) => {
                let mut target = StateVector::zero_state(psi.n())?;
                target.run(prep)?;
                target.inner(psi).norm_sqr()
            }
            Observable::Dense(o) => psi.quadratic_form(o).re,
        })
    }
}

/// Apply the bit part of a Pauli (sign handled by the caller).
fn apply_pauli_bits(psi: &mut StateVector, p: &PauliBits) -> Result<()> {
    for q in 0..psi.n() {
        match ((p.x >> q) & 1, (p.z >> q) & 1) {
            (0, 0) => {}
            (1, 0) => psi.apply_gate(&Gate::named(vec![q], NamedGate::X)?)?,
            (1, 1) => psi.apply_gate(&Gate::named(vec![q], NamedGate::Y)?)?,
            _ => psi.apply_gate(&Gate::named(vec![q], NamedGate::Z)?)?,
        }
    }
    Ok(())
}

/// Collect `count` snapshots of `state_prep|0^n⟩` under the ensemble.
/// Clifford preparations and ensembles run on the stabilizer backend;
/// anything else runs densely.
pub fn collect_shadows<S: CircuitSampler + ?Sized>(
    state_prep: &Circuit,
    ensemble: &S,
    count: usize,
    stream: RngStream,
) -> Result<Vec<Snapshot>> {
    let n = ensemble.n();
    if state_prep.n() != n {
        return Err(Error::Backend("state prep width differs from ensemble".into()));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let sub = stream.substream(i as u64);
        let mut rng = sub.rng();
        let circuit = ensemble.sample(&mut rng)?;
        let outcome = if state_prep.is_clifford() && circuit.is_clifford() {
            let mut tab = StabilizerTableau::zero_state(n)?;
            tab.run(state_prep)?;
            tab.run(&circuit)?;
            tab.born_sample(&mut rng)
        } else {
            let mut psi = StateVector::zero_state(n)?;
            psi.run(state_prep)?;
            psi.run(&circuit)?;
            let idx = psi.born_sample(&mut rng);
            (0..n).map(|q| (idx >> q) & 1 == 1).collect()
        };
        out.push(Snapshot { circuit, outcome });
    }
    Ok(out)
}

/// `⟨b|U O U†|b⟩` for one snapshot.
fn snapshot_overlap(snapshot: &Snapshot, observable: &Observable, n: usize) -> Result<f64> {
    match observable {
        Observable::Identity => Ok(1.0),
        Observable::Pauli(p) => {
            if snapshot.circuit.is_clifford() {
                let image = conjugate_pauli_through_circuit(&snapshot.circuit, p)?;
                if image.x != 0 {
                    return Ok(0.0);
                }
                let mut sign = if image.sign { -1.0 } else { 1.0 };
                for (q, &bit) in snapshot.outcome.iter().enumerate() {
                    if bit && (image.z >> q) & 1 == 1 {
                        sign = -sign;
                    }
                }
                Ok(sign)
            } else {
                dense_overlap(snapshot, observable, n)
            }
        }
        Observable::StabilizerProjector(prep) => {
            if snapshot.circuit.is_clifford() && prep.is_clifford() {
                // |⟨b|U|φ⟩|² = Born probability of b for the state U|φ⟩
                let mut tab = StabilizerTableau::zero_state(n)?;
                tab.run(prep)?;
                tab.run(&snapshot.circuit)?;
                Ok(tab.probability_of(&snapshot.outcome))
            } else {
                dense_overlap(snapshot, observable, n)
            }
        }
        Observable::Dense(_) => dense_overlap(snapshot, observable, n),
    }
}

fn dense_overlap(snapshot: &Snapshot, observable: &Observable, n: usize) -> Result<f64> {
    let mut idx = 0usize;
    for (q, &bit) in snapshot.outcome.iter().enumerate() {
        if bit {
            idx |= 1 << q;
        }
    }
    let mut v = StateVector::basis_state(n, idx)?;
    v.run(&snapshot.circuit.inverse())?;
    observable.expectation_in(&v)
}

/// Per-snapshot estimator value `(2^n+1)·⟨b|U O U†|b⟩ − tr(O)`.
pub fn snapshot_values(snapshots: &[Snapshot], observable: &Observable) -> Result<Vec<f64>> {
    if snapshots.is_empty() {
        return Err(Error::InvalidInput("no snapshots".into()));
    }
    let n = snapshots[0].circuit.n();
    let tr = observable.trace(n)?;
    let scale = (n as f64).exp2() + 1.0;
    snapshots
        .iter()
        .map(|s| Ok(scale * snapshot_overlap(s, observable, n)? - tr))
        .collect()
}

pub fn estimate_observable(
    snapshots: &[Snapshot],
    observable: &Observable,
    method: Method,
) -> Result<ShadowEstimate> {
    let values = snapshot_values(snapshots, observable)?;
    let mut acc = ScalarAccumulator::default();
    for &v in &values {
        acc.push(v);
    }
    let (value, batch_means) = match method {
        Method::Mean => (acc.mean(), vec![acc.mean()]),
        Method::MedianOfMeans { batches } => {
            if batches == 0 || batches > values.len() {
                return Err(Error::InvalidInput(format!(
                    "need 1 ≤ batches ≤ {}",
                    values.len()
                )));
            }
            let per = values.len() / batches;
            let means: Vec<f64> = (0..batches)
                .map(|b| values[b * per..(b + 1) * per].iter().sum::<f64>() / per as f64)
                .collect();
            let mut sorted = means.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mid = sorted.len() / 2;
            let median = if sorted.len() % 2 == 1 {
                sorted[mid]
            } else {
                0.5 * (sorted[mid - 1] + sorted[mid])
            };
            (median, means)
        }
    };
    Ok(ShadowEstimate {
        value,
        batch_means,
        n_snapshots: values.len(),
        method,
        std_error: acc.std_error(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiasReport {
    pub truth: f64,
    pub mean_estimate: f64,
    pub std_error: f64,
    pub bias_estimate: f64,
    /// `2ε·tr(O)` for the caller-supplied design error ε.
    pub paper_bound: f64,
    pub n_snapshots: usize,
}

/// Measured estimator bias against the exact expectation value.
pub fn bias_probe<S: CircuitSampler + ?Sized>(
    ensemble: &S,
    state_prep: &Circuit,
    observable: &Observable,
    count: usize,
    epsilon: f64,
    stream: RngStream,
) -> Result<BiasReport> {
    let n = ensemble.n();
    if n > 12 {
        return Err(Error::SizeCap("bias probe computes the truth densely (n ≤ 12)".into()));
    }
    let mut psi = StateVector::zero_state(n)?;
    psi.run(state_prep)?;
    let truth = observable.expectation_in(&psi)?;
    let snapshots = collect_shadows(state_prep, ensemble, count, stream)?;
    let est = estimate_observable(&snapshots, observable, Method::Mean)?;
    Ok(BiasReport {
        truth,
        mean_estimate: est.value,
        std_error: est.std_error,
        bias_estimate: (est.value - truth).abs(),
        paper_bound: 2.0 * epsilon * observable.trace(n)?,
        n_snapshots: count,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowNormReport {
    pub estimate: f64,
    pub std_error: f64,
    /// `tr(O₀²)` and `3·tr(O₀²)`: the exact-3-design bracket.
    pub traceless_square: f64,
    pub samples: u64,
}

/// Monte Carlo `2^n E_{U,b}[⟨b|UσU†|b⟩·⟨b|U M⁻¹(O) U†|b⟩²]` at the supplied
/// state σ, sampling `b` from the Born distribution (which absorbs the
/// `2^n·⟨b|UσU†|b⟩` weight).
pub fn shadow_norm_empirical<S: CircuitSampler + ?Sized>(
    ensemble: &S,
    observable: &Observable,
    sigma_prep: &Circuit,
    samples: u64,
    stream: RngStream,
) -> Result<ShadowNormReport> {
    let n = ensemble.n();
    let tr = observable.trace(n)?;
    let scale = (n as f64).exp2() + 1.0;
    let mut acc = ScalarAccumulator::default();
    for i in 0..samples {
        let sub = stream.substream(i);
        let mut rng = sub.rng();
        let circuit = ensemble.sample(&mut rng)?;
        let outcome: Vec<bool> = if sigma_prep.is_clifford() && circuit.is_clifford() {
            let mut tab = StabilizerTableau::zero_state(n)?;
            tab.run(sigma_prep)?;
            tab.run(&circuit)?;
            tab.born_sample(&mut rng)
        } else {
            let mut psi = StateVector::zero_state(n)?;
            psi.run(sigma_prep)?;
            psi.run(&circuit)?;
            let idx = psi.born_sample(&mut rng);
            (0..n).map(|q| (idx >> q) & 1 == 1).collect()
        };
        let snap = Snapshot { circuit, outcome };
        let q = scale * snapshot_overlap(&snap, observable, n)? - tr;
        acc.push(q * q);
    }
    Ok(ShadowNormReport {
        estimate: acc.mean(),
        std_error: acc.std_error(),
        traceless_square: observable.traceless_square_trace(n)?,
        samples,
    })
}

/// `|GHZ_n⟩` preparation circuit (Clifford).
pub fn ghz_circuit(n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    c.push_gate(Gate::named(vec![0], NamedGate::H)?)?;
    for q in 1..n {
        c.push_gate(Gate::named(vec![q - 1, q], NamedGate::Cnot)?)?;
    }
    Ok(c)
}
