//! Executable protocol demonstrations: the time-reversal detector for
//! long-range couplings and the SWAP-test purity distinguisher.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::sample_random_clifford;
use crate::ensemble::{build_grid_random_circuit, CircuitSampler};
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::rng::RngStream;
use crate::statevector::StateVector;
use crate::verifier::ScalarAccumulator;

/// Configuration of the time-reversal experiment on a square grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeReversalConfig {
    pub side: usize,
    /// Local circuit depth `d < side/2`.
    pub depth: usize,
    /// Long-range coupling angle θ (radians).
    pub theta: f64,
    /// The perturbed qubit `i`.
    pub perturbed: usize,
    /// Far partner map `j(i)`, every partner at grid distance ≥ side/2.
    pub pairing: Vec<usize>,
    pub runs: u64,
}

impl TimeReversalConfig {
    /// Antipodal pairing; on odd grids the fixed center maps to the
    /// top-right corner instead.
    pub fn square(side: usize, depth: usize, theta: f64, runs: u64) -> Result<Self> {
        let n = side * side;
        let pairing = (0..n)
            .map(|v| if n - 1 - v == v { side - 1 } else { n - 1 - v })
            .collect();
        let cfg = Self { side, depth, theta, perturbed: 0, pairing, runs };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.side * self.side
    }

    fn grid_distance(&self, a: usize, b: usize) -> usize {
        let (ra, ca) = (a / self.side, a % self.side);
        let (rb, cb) = (b / self.side, b % self.side);
        ra.abs_diff(rb) + ca.abs_diff(cb)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n > 16 {
            return Err(Error::SizeCap("time-reversal experiment runs densely (n ≤ 16)".into()));
        }
        if 2 * self.depth >= self.side {
            return Err(Error::InvalidInput(format!(
                "need depth < side/2; got d = {}, side = {}",
                self.depth, self.side
            )));
        }
        if self.pairing.len() != n || self.perturbed >= n {
            return Err(Error::InvalidInput("bad pairing or perturbed index".into()));
        }
        for (i, &j) in self.pairing.iter().enumerate() {
            if j >= n || j == i || 2 * self.grid_distance(i, j) < self.side {
                return Err(Error::InvalidInput(format!(
                    "partner of {i} is {j}, closer than side/2"
                )));
            }
        }
        Ok(())
    }

    /// Distinct unordered couplings `(i, j(i))`.
    fn couplings(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &j) in self.pairing.iter().enumerate() {
            // involutive partners would list the pair twice
            if self.pairing[j] == i && j < i {
                continue;
            }
            out.push((i, j));
        }
        out
    }

    /// Diagonal of the long-range coupling layer. The generator uses the
    /// half-angle convention, so that conjugation acts as
    /// `X_i ↦ cos θ · X_i + sin θ · Y_i Z_{j(i)}` and a faraway flip is
    /// detected with probability `(2/3)·sin²θ` per run.
    fn long_range_diagonal(&self) -> Vec<C64> {
        let n = self.n();
        let couplings = self.couplings();
        (0..1usize << n)
            .map(|b| {
                let mut zz_sum = 0.0;
                for &(i, j) in &couplings {
                    let si = 1.0 - 2.0 * ((b >> i) & 1) as f64;
                    let sj = 1.0 - 2.0 * ((b >> j) & 1) as f64;
                    zz_sum += si * sj;
                }
                C64::from_polar(1.0, -0.5 * self.theta * zz_sum)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeReversalReport {
    pub faraway_one_frequency: f64,
    /// `(2/3)·sin²θ`.
    pub threshold: f64,
    pub n_runs: u64,
    pub faraway_qubits: usize,
    pub with_long_range: bool,
}

/// Run the echo protocol: prepare a random stabilizer product state, apply
/// `U†`, flip qubit `i`, apply `U`, undo the basis, measure, and flag any
/// `1` outside the light cone of `i` in the local circuit.
pub fn time_reversal_experiment(
    cfg: &TimeReversalConfig,
    with_long_range: bool,
    stream: RngStream,
) -> Result<TimeReversalReport> {
    cfg.validate()?;
    let n = cfg.n();
    let lr_diag = with_long_range.then(|| cfg.long_range_diagonal());
    let lr_diag_conj: Option<Vec<C64>> =
        lr_diag.as_ref().map(|d| d.iter().map(|z| z.conj()).collect());
    let mut flagged = 0u64;
    let mut faraway_count = 0usize;
    for run in 0..cfg.runs {
        let mut rng = stream.substream(run).rng();
        let local = build_grid_random_circuit(cfg.side, cfg.side, cfg.depth, &mut rng)?;
        let cone = local.lightcone(&std::collections::BTreeSet::from([cfg.perturbed]));
        let faraway: Vec<usize> = (0..n).filter(|q| !cone.contains(q)).collect();
        faraway_count = faraway.len();

        // per-qubit random stabilizer basis v
        let vs: Vec<_> = (0..n)
            .map(|_| sample_random_clifford(1, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let mut psi = StateVector::zero_state(n)?;
        for (q, v) in vs.iter().enumerate() {
            psi.apply_gate(&Gate::clifford(vec![q], v.inverse())?)?;
        }
        // U† = U_LR† · U_local†
        psi.run(&local.inverse())?;
        if let Some(diag) = &lr_diag_conj {
            psi.apply_global_diagonal(diag)?;
        }
        psi.apply_gate(&Gate::named(vec![cfg.perturbed], crate::gates::NamedGate::X)?)?;
        // U = U_local · U_LR
        if let Some(diag) = &lr_diag {
            psi.apply_global_diagonal(diag)?;
        }
        psi.run(&local)?;
        for (q, v) in vs.iter().enumerate() {
            psi.apply_gate(&Gate::clifford(vec![q], v.clone())?)?;
        }
        let outcome = psi.born_sample(&mut rng);
        if faraway.iter().any(|&q| (outcome >> q) & 1 == 1) {
            flagged += 1;
        }
    }
    Ok(TimeReversalReport {
        faraway_one_frequency: flagged as f64 / cfg.runs as f64,
        threshold: 2.0 / 3.0 * cfg.theta.sin().powi(2),
        n_runs: cfg.runs,
        faraway_qubits: faraway_count,
        with_long_range,
    })
}

/// What the purity distinguisher is fed.
pub enum PuritySource<'a> {
    /// Two copies of one pure state drawn per pair from the ensemble.
    PureEnsemble(&'a dyn CircuitSampler),
    /// The maximally mixed state, realized as a uniformly random basis
    /// state per copy.
    MaximallyMixed { n: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PurityDecision {
    Pure,
    Mixed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PurityReport {
    pub statistic_mean: f64,
    pub std_error: f64,
    pub pairs: u64,
    pub decision: PurityDecision,
}

/// SWAP-test statistic `tr(ρσ)` over pairs of copies; decides "pure" when
/// the mean exceeds 1/2.
pub fn purity_distinguisher(
    source: &PuritySource<'_>,
    pairs: u64,
    stream: RngStream,
) -> Result<PurityReport> {
    let mut acc = ScalarAccumulator::default();
    for p in 0..pairs {
        let sub = stream.substream(p);
        let mut rng = sub.rng();
        match source {
            PuritySource::PureEnsemble(sampler) => {
                if sampler.n() > 12 {
                    return Err(Error::SizeCap("purity distinguisher runs densely (n ≤ 12)".into()));
                }
                let circuit = sampler.sample(&mut rng)?;
                let mut psi = StateVector::zero_state(sampler.n())?;
                psi.run(&circuit)?;
                // both copies are the same pure state
                acc.push(psi.inner(&psi).norm_sqr());
            }
            PuritySource::MaximallyMixed { n } => {
                let x: u64 = rng.gen_range(0..(1u64 << n));
                let y: u64 = rng.gen_range(0..(1u64 << n));
                acc.push(if x == y { 1.0 } else { 0.0 });
            }
        }
    }
    Ok(PurityReport {
        statistic_mean: acc.mean(),
        std_error: acc.std_error(),
        pairs,
        decision: if acc.mean() > 0.5 { PurityDecision::Pure } else { PurityDecision::Mixed },
    })
}

/// A circuit sampler for PFC-patch brickwork states used by the purity demo.
pub fn pfc_brickwork_spec(n: usize, xi: usize, key_seed: u64) -> crate::ensemble::BrickworkSpec {
    crate::ensemble::BrickworkSpec::line(n, xi, crate::ensemble::LocalKind::Pfc { key_seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{FixedCircuit, HaarEnsemble};
    use crate::gates::NamedGate;

    #[test]
    fn config_validation() {
        assert!(TimeReversalConfig::square(3, 1, 0.5, 10).is_ok());
        // depth too large for the light-cone argument
        assert!(TimeReversalConfig::square(3, 2, 0.5, 10).is_err());
        // partner distance: tamper with the pairing
        let mut cfg = TimeReversalConfig::square(3, 1, 0.5, 10).unwrap();
        cfg.pairing[0] = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn no_long_range_means_no_faraway_ones() {
        let cfg = TimeReversalConfig::square(3, 1, std::f64::consts::FRAC_PI_2, 400).unwrap();
        let report = time_reversal_experiment(&cfg, false, RngStream::new(1)).unwrap();
        assert_eq!(report.faraway_one_frequency, 0.0);
        assert!(report.faraway_qubits >= 5);
    }

    #[test]
    fn zero_angle_long_range_is_inert() {
        let cfg = TimeReversalConfig::square(3, 1, 0.0, 300).unwrap();
        let report = time_reversal_experiment(&cfg, true, RngStream::new(2)).unwrap();
        assert_eq!(report.faraway_one_frequency, 0.0);
        assert_eq!(report.threshold, 0.0);
    }

    #[test]
    fn strong_coupling_detected() {
        let cfg = TimeReversalConfig::square(3, 1, std::f64::consts::FRAC_PI_2, 600).unwrap();
        let report = time_reversal_experiment(&cfg, true, RngStream::new(3)).unwrap();
        let sigma = (report.faraway_one_frequency * (1.0 - report.faraway_one_frequency)
            / report.n_runs as f64)
            .sqrt();
        assert!(
            report.faraway_one_frequency >= report.threshold - 3.0 * sigma,
            "frequency {} below threshold {}",
            report.faraway_one_frequency,
            report.threshold
        );
    }

    #[test]
    fn purity_of_product_state_is_one() {
        let n = 4;
        let mut c = crate::circuit::Circuit::new(n);
        c.push_layer((0..n).map(|q| Gate::named(vec![q], NamedGate::H).unwrap()).collect())
            .unwrap();
        let fixed = FixedCircuit(c);
        let report =
            purity_distinguisher(&PuritySource::PureEnsemble(&fixed), 10, RngStream::new(4)).unwrap();
        assert!((report.statistic_mean - 1.0).abs() < 1e-12);
        assert_eq!(report.decision, PurityDecision::Pure);
    }

    #[test]
    fn maximally_mixed_statistic_is_two_to_minus_n() {
        let n = 4;
        let pairs = 4000;
        let report = purity_distinguisher(
            &PuritySource::MaximallyMixed { n },
            pairs,
            RngStream::new(5),
        )
        .unwrap();
        let p = (n as f64).exp2().recip();
        let sigma = (p * (1.0 - p) / pairs as f64).sqrt();
        assert!(
            (report.statistic_mean - p).abs() < 3.0 * sigma,
            "mean {} vs {p}",
            report.statistic_mean
        );
        assert_eq!(report.decision, PurityDecision::Mixed);
    }

    #[test]
    fn haar_states_always_look_pure() {
        let sampler = HaarEnsemble { n: 4 };
        for trial in 0..20 {
            let report = purity_distinguisher(
                &PuritySource::PureEnsemble(&sampler),
                5,
                RngStream::new(100 + trial),
            )
            .unwrap();
            assert_eq!(report.decision, PurityDecision::Pure);
        }
    }

}
