//! Output-distribution analytics: exact k-norms, Haar joint-probability
//! formulas, the exact total-variation distance between Haar-output samples
//! and uniform samples, Berger-inequality lower bounds on distance from
//! uniformity, and k-norm concentration probes.

use serde::{Deserialize, Serialize};

use crate::ensemble::CircuitSampler;
use crate::error::{Error, Result};
use crate::perm::factorial;
use crate::rng::RngStream;
use crate::statevector::StateVector;

#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution {
    pub n: usize,
    pub probabilities: Vec<f64>,
}

impl OutputDistribution {
    pub fn new(n: usize, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != 1 << n {
            return Err(Error::InvalidInput(format!(
                "expected 2^{n} probabilities, got {}",
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|&p| p < -1e-12) {
            return Err(Error::InvalidInput("negative probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}")));
        }
        Ok(Self { n, probabilities })
    }

    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        Self { n, probabilities: vec![1.0 / dim as f64; dim] }
    }

    /// `Σ_x P(x)^k`.
    pub fn k_norm(&self, k: u32) -> f64 {
        self.probabilities.iter().map(|p| p.powi(k as i32)).sum()
    }

    pub fn tv_to_uniform(&self) -> f64 {
        let u = 1.0 / self.probabilities.len() as f64;
        0.5 * self.probabilities.iter().map(|p| (p - u).abs()).sum::<f64>()
    }

    /// Berger lower bound on the TV distance: `½·‖v‖₂³/‖v‖₄²` for
    /// `v = P − uniform`.
    pub fn berger_tv_bound(&self) -> f64 {
        let u = 1.0 / self.probabilities.len() as f64;
        let l2: f64 = self.probabilities.iter().map(|p| (p - u).powi(2)).sum::<f64>().sqrt();
        let l4: f64 = self
            .probabilities
            .iter()
            .map(|p| (p - u).powi(4))
            .sum::<f64>()
            .powf(0.25);
        if l4 == 0.0 {
            0.0
        } else {
            0.5 * l2.powi(3) / (l4 * l4)
        }
    }
}

/// Joint probability of observing the (ordered) strings under a single
/// Haar-random state: `∏_j (multiplicity_j)! / ∏_{i=0}^{N−1}(D+i)`.
pub fn haar_joint_probability(strings: &[u64], n: usize) -> Result<f64> {
    let count = strings.len();
    if count == 0 || count > 8 {
        return Err(Error::SizeCap("joint probability supports 1..=8 strings".into()));
    }
    let d = (n as f64).exp2();
    let mut sorted = strings.to_vec();
    sorted.sort_unstable();
    let mut numerator = 1.0;
    let mut run = 1usize;
    for i in 1..=sorted.len() {
        if i < sorted.len() && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            numerator *= factorial(run) as f64;
            run = 1;
        }
    }
    let mut denom = 1.0;
    for i in 0..count {
        denom *= d + i as f64;
    }
    Ok(numerator / denom)
}

/// All integer partitions of `total`, parts descending.
fn partitions(total: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rest.min(cap)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, total, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TvReport {
    pub n: usize,
    pub sample_count: usize,
    pub tv_exact: f64,
    /// `N²/2^{n−1}`.
    pub paper_bound: f64,
}

/// Exact total-variation distance between `N` samples of a Haar-state output
/// distribution and `N` uniform samples, by multiplicity-profile enumeration.
pub fn tv_haar_vs_uniform(n: usize, sample_count: usize) -> Result<TvReport> {
    if sample_count == 0 || sample_count > 4 {
        return Err(Error::SizeCap("exact joint TV supports N ≤ 4".into()));
    }
    if n > 10 {
        return Err(Error::SizeCap("exact joint TV supports n ≤ 10".into()));
    }
    let d = (n as f64).exp2();
    let n_samples = sample_count;
    let p_unif = d.powi(-(n_samples as i32));
    let mut tv = 0.0;
    let mut total_tuples = 0.0;
    let mut total_mass = 0.0;
    for lambda in partitions(n_samples) {
        let parts = lambda.len();
        // ordered tuples with this collision profile
        let mut multinomial = factorial(n_samples) as f64;
        for &part in &lambda {
            multinomial /= factorial(part) as f64;
        }
        let mut falling = 1.0;
        for i in 0..parts {
            falling *= d - i as f64;
        }
        let mut mult_correction = 1.0;
        let mut run = 1usize;
        for i in 1..=lambda.len() {
            if i < lambda.len() && lambda[i] == lambda[i - 1] {
                run += 1;
            } else {
                mult_correction *= factorial(run) as f64;
                run = 1;
            }
        }
        let tuples = multinomial * falling / mult_correction;
        let mut p_haar = 1.0;
        for &part in &lambda {
            p_haar *= factorial(part) as f64;
        }
        for i in 0..n_samples {
            p_haar /= d + i as f64;
        }
        tv += tuples * (p_haar - p_unif).abs();
        total_tuples += tuples;
        total_mass += tuples * p_haar;
    }
    debug_assert!((total_tuples - d.powi(n_samples as i32)).abs() < total_tuples * 1e-12);
    debug_assert!((total_mass - 1.0).abs() < 1e-9);
    Ok(TvReport {
        n,
        sample_count,
        tv_exact: 0.5 * tv,
        paper_bound: (n_samples * n_samples) as f64 / ((n - 1) as f64).exp2(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FarFromUniformRow {
    pub circuit_index: u64,
    pub tv: f64,
    pub berger_bound: f64,
    pub knorm_2: f64,
    pub knorm_3: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FarFromUniformReport {
    pub rows: Vec<FarFromUniformRow>,
    /// Fraction of circuits with TV ≥ 0.1.
    pub far_fraction: f64,
}

/// Exact per-circuit distance-from-uniformity statistics.
pub fn far_from_uniform_report<S: CircuitSampler + ?Sized>(
    sampler: &S,
    circuits: u64,
    stream: RngStream,
) -> Result<FarFromUniformReport> {
    let n = sampler.n();
    if n > 14 {
        return Err(Error::SizeCap("exact output distribution needs n ≤ 14".into()));
    }
    let mut rows = Vec::with_capacity(circuits as usize);
    let mut far = 0u64;
    for i in 0..circuits {
        let dist = sample_output_distribution(sampler, stream, i)?;
        let tv = dist.tv_to_uniform();
        if tv >= 0.1 {
            far += 1;
        }
        rows.push(FarFromUniformRow {
            circuit_index: i,
            tv,
            berger_bound: dist.berger_tv_bound(),
            knorm_2: dist.k_norm(2),
            knorm_3: dist.k_norm(3),
        });
    }
    Ok(FarFromUniformReport { rows, far_fraction: far as f64 / circuits as f64 })
}

/// The exact output distribution of one sampled circuit on `|0^n⟩`.
pub fn sample_output_distribution<S: CircuitSampler + ?Sized>(
    sampler: &S,
    stream: RngStream,
    index: u64,
) -> Result<OutputDistribution> {
    let n = sampler.n();
    let circuit = sampler.sample(&mut stream.substream(index).rng())?;
    let mut psi = StateVector::zero_state(n)?;
    psi.run(&circuit)?;
    OutputDistribution::new(n, psi.probabilities())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnormTailReport {
    pub k: u32,
    pub a: f64,
    /// Empirical frequency of `|Σ P^k − μ| ≥ a·μ` with `μ = k!/2^{(k−1)n}`.
    pub tail_frequency: f64,
    /// `(ε + k²·2^{−n})/a²`: the concentration bound up to its constant.
    pub chebyshev_scale: f64,
    pub circuits: u64,
}

pub fn knorm_concentration_probe<S: CircuitSampler + ?Sized>(
    sampler: &S,
    k: u32,
    a: f64,
    epsilon: f64,
    circuits: u64,
    stream: RngStream,
) -> Result<KnormTailReport> {
    let n = sampler.n();
    if n > 12 || k > 4 {
        return Err(Error::SizeCap("k-norm probe needs n ≤ 12, k ≤ 4".into()));
    }
    let mu = factorial(k as usize) as f64 / (((k - 1) as f64) * n as f64).exp2();
    let mut tail = 0u64;
    for i in 0..circuits {
        let dist = sample_output_distribution(sampler, stream, i)?;
        if (dist.k_norm(k) - mu).abs() >= a * mu {
            tail += 1;
        }
    }
    Ok(KnormTailReport {
        k,
        a,
        tail_frequency: tail as f64 / circuits as f64,
        chebyshev_scale: (epsilon + (k * k) as f64 / (n as f64).exp2()) / (a * a),
        circuits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{FixedCircuit, HaarEnsemble};
    use approx::assert_relative_eq;

    #[test]
    fn k_norm_basics() {
        let u = OutputDistribution::uniform(3);
        // uniform: 2^{n(1−k)}
        assert_relative_eq!(u.k_norm(2), 2f64.powi(-3), max_relative = 1e-12);
        assert_relative_eq!(u.k_norm(3), 2f64.powi(-6), max_relative = 1e-12);
        assert_relative_eq!(u.k_norm(1), 1.0, max_relative = 1e-12);

        let mut point = vec![0.0; 8];
        point[5] = 1.0;
        let p = OutputDistribution::new(3, point).unwrap();
        assert_relative_eq!(p.k_norm(4), 1.0);
        assert_relative_eq!(p.tv_to_uniform(), 1.0 - 1.0 / 8.0);
    }

    #[test]
    fn haar_state_second_and_third_moments() {
        // E Σ p² = 2/(D+1); E Σ p³ = D·3!/(D(D+1)(D+2)) at n=3
        let sampler = HaarEnsemble { n: 3 };
        let stream = RngStream::new(31);
        let samples = 4000u64;
        let (mut acc2, mut acc3) = (
            crate::verifier::ScalarAccumulator::default(),
            crate::verifier::ScalarAccumulator::default(),
        );
        for i in 0..samples {
            let d = sample_output_distribution(&sampler, stream, i).unwrap();
            acc2.push(d.k_norm(2));
            acc3.push(d.k_norm(3));
        }
        assert!(
            (acc2.mean() - 2.0 / 9.0).abs() < 3.0 * acc2.std_error(),
            "Σp²: {} ± {}",
            acc2.mean(),
            acc2.std_error()
        );
        let expect3 = 6.0 / (9.0 * 10.0);
        assert!(
            (acc3.mean() - expect3).abs() < 3.0 * acc3.std_error(),
            "Σp³: {} ± {}",
            acc3.mean(),
            acc3.std_error()
        );
    }

    #[test]
    fn joint_probability_examples() {
        // N=1 → 1/D
        assert_relative_eq!(haar_joint_probability(&[3], 2).unwrap(), 0.25);
        // N=2 equal strings at D=4 → 2/20
        assert_relative_eq!(haar_joint_probability(&[1, 1], 2).unwrap(), 0.1);
        // N=2 distinct at D=4 → 1/20
        assert_relative_eq!(haar_joint_probability(&[1, 2], 2).unwrap(), 0.05);
    }

    #[test]
    fn joint_probability_sums_to_one() {
        for (n, count) in [(1usize, 2usize), (2, 2), (2, 3), (3, 3)] {
            let d = 1u64 << n;
            let mut total = 0.0;
            let mut tuple = vec![0u64; count];
            loop {
                total += haar_joint_probability(&tuple, n).unwrap();
                // odometer
                let mut i = 0;
                loop {
                    if i == count {
                        break;
                    }
                    tuple[i] += 1;
                    if tuple[i] < d {
                        break;
                    }
                    tuple[i] = 0;
                    i += 1;
                }
                if i == count {
                    break;
                }
            }
            assert_relative_eq!(total, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn tv_haar_vs_uniform_examples() {
        // N = 1: the Haar ensemble is an exact 1-design
        let r = tv_haar_vs_uniform(4, 1).unwrap();
        assert!(r.tv_exact.abs() < 1e-14);

        // n=2, N=2 → (D−1)/(D(D+1)) = 3/20
        let r = tv_haar_vs_uniform(2, 2).unwrap();
        assert_relative_eq!(r.tv_exact, 0.15, max_relative = 1e-12);
        assert_relative_eq!(r.paper_bound, 2.0, max_relative = 1e-12);

        // n=8, N=2 → 255/(256·257), bound 4/128
        let r = tv_haar_vs_uniform(8, 2).unwrap();
        assert_relative_eq!(r.tv_exact, 255.0 / (256.0 * 257.0), max_relative = 1e-12);
        assert!(r.tv_exact <= r.paper_bound);
        assert_relative_eq!(r.paper_bound, 4.0 / 128.0, max_relative = 1e-12);
    }

    #[test]
    fn tv_monotone_in_n() {
        let mut prev = f64::INFINITY;
        for n in 2..=10 {
            let r = tv_haar_vs_uniform(n, 2).unwrap();
            assert!(r.tv_exact <= prev + 1e-15, "n = {n}");
            prev = r.tv_exact;
        }
    }

    #[test]
    fn uniform_output_circuit_has_zero_tv() {
        // n-fold H on |0^n⟩ → exactly uniform
        let n = 4;
        let mut c = crate::circuit::Circuit::new(n);
        let layer: Vec<_> = (0..n)
            .map(|q| crate::gates::Gate::named(vec![q], crate::gates::NamedGate::H).unwrap())
            .collect();
        c.push_layer(layer).unwrap();
        let report = far_from_uniform_report(&FixedCircuit(c), 3, RngStream::new(1)).unwrap();
        for row in &report.rows {
            assert!(row.tv < 1e-12);
            assert!(row.berger_bound < 1e-12);
        }
        assert_eq!(report.far_fraction, 0.0);
    }

    #[test]
    fn berger_bound_below_tv() {
        let sampler = HaarEnsemble { n: 5 };
        let report = far_from_uniform_report(&sampler, 40, RngStream::new(3)).unwrap();
        for row in &report.rows {
            assert!(
                row.berger_bound <= row.tv + 1e-12,
                "berger {} > tv {}",
                row.berger_bound,
                row.tv
            );
        }
        // Haar outputs are far from uniform essentially always
        assert!(report.far_fraction > 0.9);
    }

    #[test]
    fn knorm_tail_shrinks_with_a() {
        let sampler = HaarEnsemble { n: 6 };
        let r1 = knorm_concentration_probe(&sampler, 2, 0.5, 0.0, 300, RngStream::new(4)).unwrap();
        let r2 = knorm_concentration_probe(&sampler, 2, 5.0, 0.0, 300, RngStream::new(4)).unwrap();
        assert!(r2.tail_frequency <= r1.tail_frequency);
        assert_eq!(r2.tail_frequency, 0.0);
    }

    #[test]
    fn depth_zero_product_ensemble_is_a_nondesign_witness() {
        // |0^n⟩ output: Σp² = 1 ≫ 2/2^n; tail frequency at a=1 is 1
        let n = 6;
        let fixed = FixedCircuit(crate::circuit::Circuit::new(n));
        let r = knorm_concentration_probe(&fixed, 2, 1.0, 0.0, 10, RngStream::new(5)).unwrap();
        assert_eq!(r.tail_frequency, 1.0);
    }
}
