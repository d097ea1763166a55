//! Acceptance suite: every release criterion, each printing one line.
//!
//! Run with output visible:
//! `cargo test --test acceptance -- --nocapture`

use std::time::Instant;

use brickwork::diststats::{far_from_uniform_report, sample_output_distribution, tv_haar_vs_uniform};
use brickwork::ensemble::{
    BrickworkSpec, FixedCircuit, GlobalCliffordEnsemble, HaarEnsemble, LocalKind, RandomCircuit1d,
    TwoQubitKind,
};
use brickwork::gates::{Gate, NamedGate};
use brickwork::geometry::{
    compile_1d_to_geometry, hamiltonian_path_g4, random_connected_graph, verify_compilation,
};
use brickwork::linalg::hermitian_eigenvalues;
use brickwork::perm::{
    choi_of_approx_twirl, factorial, gram_matrix, haar_twirl_exact, weingarten_matrix,
    MomentOperatorDense,
};
use brickwork::rng::RngStream;
use brickwork::shadows::{
    collect_shadows, estimate_observable, ghz_circuit, snapshot_values, Method, Observable,
};
use brickwork::statevector::StateVector;
use brickwork::verifier::{
    collision_probability, moment_channel_mc, swap_test_lower_bound, Probe, ScalarAccumulator,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn report(id: &str, pass: bool, detail: &str, started: Instant) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!(
        "ACCEPTANCE {id}: {status} — {detail} ({:.2?})",
        started.elapsed()
    );
    assert!(pass, "ACCEPTANCE {id} FAILED — {detail}");
}

#[test]
fn criterion_01_weingarten_inverse() {
    let t = Instant::now();
    let mut worst = 0.0_f64;
    for k in 1..=5usize {
        // D ∈ {k, …, 8} intersected with the Gram precondition D ≥ 2
        for d in k.max(2)..=8usize {
            let wg = weingarten_matrix(k, d).unwrap();
            let g = gram_matrix(k, d).unwrap();
            let size = g.entries.nrows();
            let residual = &wg.entries * &g.entries - DMatrix::<f64>::identity(size, size);
            worst = worst.max(residual.iter().fold(0.0_f64, |m, &x| m.max(x.abs())));
        }
    }
    report(
        "01 weingarten-inverse",
        worst <= 1e-10,
        &format!("max ‖Wg·G − 1‖_max = {worst:.2e} over k ≤ 5, D ∈ {{k..8}}"),
        t,
    );
}

#[test]
fn criterion_02_haar_twirl_oracle() {
    let t = Instant::now();
    let (n, k) = (2usize, 2usize);
    let sampler = HaarEnsemble { n };
    let mut detail = String::new();
    let mut pass = true;
    for probe_seed in 0..5u64 {
        let mut rng = RngStream::with_stream(1201, probe_seed).rng();
        let dim = 1usize << (n * k);
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            use rand::Rng;
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let herm = (&g + g.adjoint()) * C64::new(0.5, 0.0);
        let probe = Probe::Dense(herm.clone());
        let est = moment_channel_mc(&sampler, k, &probe, 100_000, 25, RngStream::new(1300 + probe_seed)).unwrap();
        let exact = haar_twirl_exact(&MomentOperatorDense::new(k, n, herm).unwrap()).unwrap();
        let (dist, _) = est.trace_distance_to(&exact);
        let tol = 5.0 * est.standard_error;
        pass &= dist <= tol;
        detail.push_str(&format!("[{dist:.4} ≤ {tol:.4}] "));
    }
    report("02 haar-twirl-oracle", pass, &format!("5 probes at 10⁵ samples: {detail}"), t);
}

#[test]
fn criterion_03_choi_flatness() {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for (n, k) in [(1usize, 2usize), (2, 2), (1, 3)] {
        let rho = choi_of_approx_twirl(k, n).unwrap();
        let d_sq = (2.0f64 * n as f64).exp2(); // D²
        let expected_count = binomial(d_sq as usize + k - 1, k);
        let expected_value = factorial(k) as f64 / (2.0 * (n * k) as f64).exp2();
        let ev = hermitian_eigenvalues(&rho);
        let nonzero: Vec<f64> = ev.into_iter().filter(|x| x.abs() > 1e-12).collect();
        let count_ok = nonzero.len() == expected_count;
        let value_ok = nonzero.iter().all(|v| (v - expected_value).abs() <= 1e-10);
        pass &= count_ok && value_ok;
        detail.push_str(&format!(
            "(n={n},k={k}): {} eigenvalues at {expected_value:.3e} [{}] ",
            nonzero.len(),
            if count_ok && value_ok { "ok" } else { "BAD" }
        ));
    }
    report("03 choi-flatness", pass, &detail, t);
}

fn binomial(n: usize, k: usize) -> usize {
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

#[test]
fn criterion_04_gluing_monotonicity() {
    let t = Instant::now();
    let n = 4;
    let k = 2;
    let probe = Probe::zero_state_power(n);
    let exact = haar_twirl_exact(&probe.to_moment_operator(k, n).unwrap()).unwrap();
    let samples = 20_000;
    let mut results = Vec::new();
    for xi in [1usize, 2] {
        let spec = BrickworkSpec::line(n, xi, LocalKind::Haar);
        let est = moment_channel_mc(&spec, k, &probe, samples, 20, RngStream::new(1400 + xi as u64)).unwrap();
        results.push(est.trace_distance_to(&exact));
    }
    let (d1, s1) = results[0];
    let (d2, s2) = results[1];
    let gap = d1 - d2;
    let combined = 3.0 * (s1 * s1 + s2 * s2).sqrt();
    report(
        "04 gluing-monotonicity",
        d2 < d1 && gap > combined,
        &format!("distance(ξ=1) = {d1:.4}, distance(ξ=2) = {d2:.4}, gap {gap:.4} > 3σ = {combined:.4}"),
        t,
    );
}

#[test]
fn criterion_05_collision_statistics() {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    // Haar at n ∈ {2,3,4} vs 2D/(D+1)
    for n in [2usize, 3, 4] {
        let rep = collision_probability(
            &HaarEnsemble { n },
            brickwork::verifier::ProductBasis::Haar,
            20_000,
            RngStream::new(1500 + n as u64),
        )
        .unwrap();
        let ok = (rep.z_estimate - rep.haar_reference).abs() <= 3.0 * rep.std_error;
        pass &= ok;
        detail.push_str(&format!("haar n={n}: {:.4}±{:.4} vs {:.4}; ", rep.z_estimate, rep.std_error, rep.haar_reference));
    }
    // identity circuit at n=4 vs (4/3)^4
    let rep = collision_probability(
        &FixedCircuit(brickwork::circuit::Circuit::new(4)),
        brickwork::verifier::ProductBasis::Haar,
        20_000,
        RngStream::new(1510),
    )
    .unwrap();
    let expect = (4.0f64 / 3.0).powi(4);
    let ok = (rep.z_estimate - expect).abs() <= 3.0 * rep.std_error;
    pass &= ok;
    detail.push_str(&format!("identity n=4: {:.4}±{:.4} vs {expect:.4}; ", rep.z_estimate, rep.std_error));
    // depth-d Clifford brickwork at n=16: Z ≥ 1 + n/3^{2d} − 3σ
    for depth in [2usize, 4] {
        let spec = RandomCircuit1d { n: 16, depth, kind: TwoQubitKind::Clifford };
        let rep = collision_probability(
            &spec,
            brickwork::verifier::ProductBasis::Clifford,
            20_000,
            RngStream::new(1520 + depth as u64),
        )
        .unwrap();
        let bound = 1.0 + 16.0 / 3f64.powi(2 * depth as i32);
        let ok = rep.z_estimate >= bound - 3.0 * rep.std_error && rep.lightcone_size == 2 * depth;
        pass &= ok;
        detail.push_str(&format!(
            "clifford d={depth}: Z {:.3} ≥ {bound:.4} (L={}); ",
            rep.z_estimate, rep.lightcone_size
        ));
    }
    report("05 collision-statistics", pass, &detail, t);
}

#[test]
fn criterion_06_swap_test_bound() {
    let t = Instant::now();
    // depth-1 1D circuits at n=6: light-cone purity exactly 2^{−L+1}
    let spec = RandomCircuit1d { n: 6, depth: 1, kind: TwoQubitKind::Haar };
    let shallow = swap_test_lower_bound(&spec, &[0, 1], 200, RngStream::new(1600)).unwrap();
    let exact_ok = shallow.max_dev_from_shallow <= 1e-9;
    // Haar reference at n=4 within 3σ
    let haar = swap_test_lower_bound(&HaarEnsemble { n: 4 }, &[0, 1], 20_000, RngStream::new(1601)).unwrap();
    let haar_ok = (haar.purity_mean - haar.haar_reference).abs() <= 3.0 * haar.std_error;
    report(
        "06 swap-test-bound",
        exact_ok && haar_ok,
        &format!(
            "shallow max dev {:.2e}; haar purity {:.5}±{:.5} vs {:.5}",
            shallow.max_dev_from_shallow, haar.purity_mean, haar.std_error, haar.haar_reference
        ),
        t,
    );
}

#[test]
fn criterion_07_geometry_compiler() {
    let t = Instant::now();
    // 200 random connected graphs: single-visit Hamiltonian paths, jumps ≤ 4
    let mut rng = RngStream::new(1700).rng();
    let mut paths_ok = true;
    for trial in 0..200 {
        let n = 2 + (trial * 13) % 63;
        let g = random_connected_graph(n, 4, &mut rng).unwrap();
        let p = hamiltonian_path_g4(&g, trial % n).unwrap();
        paths_ok &= p.is_valid_for(&g);
    }
    // 20 graphs with n ≤ 10: compiled circuits unitary-equivalent to 1e−8
    let mut compile_ok = true;
    let mut max_dev = 0.0_f64;
    let mut ratio_sum = 0.0;
    for trial in 0..20u64 {
        let n = 4 + (trial as usize * 3) % 7; // 4..10
        let g = random_connected_graph(n, 3, &mut rng).unwrap();
        let circuit = brickwork::ensemble::build_local_random_circuit(
            n,
            3,
            &mut RngStream::new(1710 + trial).rng(),
        )
        .unwrap();
        let compiled = compile_1d_to_geometry(&circuit, &g).unwrap();
        let rep = verify_compilation(&circuit, &compiled.circuit, &compiled.relabeling, 1e-8).unwrap();
        compile_ok &= rep.equal;
        max_dev = max_dev.max(rep.max_dev);
        ratio_sum += compiled.depth_ratio;
    }
    report(
        "07 geometry-compiler",
        paths_ok && compile_ok,
        &format!(
            "200 paths valid: {paths_ok}; 20 compilations equal (max dev {max_dev:.2e}, mean depth ratio {:.1})",
            ratio_sum / 20.0
        ),
        t,
    );
}

#[test]
fn criterion_08_shadows() {
    let t = Instant::now();
    // (a) full-n Clifford patches at n=3: 10 random stabilizer targets,
    // 50 repetitions: CI contains truth, variance within 3·tr(O₀²)·1.3
    let n = 3;
    let ens = GlobalCliffordEnsemble { n };
    let prep = ghz_circuit(n).unwrap();
    let mut rho = StateVector::zero_state(n).unwrap();
    rho.run(&prep).unwrap();
    let mut unbiased = true;
    let mut variance_ok = true;
    for target_idx in 0..10u64 {
        let target = {
            let mut c = brickwork::circuit::Circuit::new(n);
            let el = brickwork::clifford::sample_random_clifford(
                n,
                &mut RngStream::with_stream(1800, target_idx).rng(),
            )
            .unwrap();
            c.push_gate(Gate::clifford((0..n).collect(), el).unwrap()).unwrap();
            c
        };
        let obs = Observable::StabilizerProjector(target.clone());
        let truth = obs.expectation_in(&rho).unwrap();
        let mut rep_means = ScalarAccumulator::default();
        let mut var_acc = 0.0;
        let reps = 50;
        let per = 2000;
        for r in 0..reps {
            let snaps = collect_shadows(
                &prep,
                &ens,
                per,
                RngStream::with_stream(1801 + target_idx, r),
            )
            .unwrap();
            let est = estimate_observable(&snaps, &obs, Method::Mean).unwrap();
            rep_means.push(est.value);
            var_acc += est.std_error * est.std_error * per as f64;
        }
        let ci = 3.0 * rep_means.std_error();
        unbiased &= (rep_means.mean() - truth).abs() <= ci;
        let var_bound = 3.0 * obs.traceless_square_trace(n).unwrap() * 1.3;
        variance_ok &= var_acc / reps as f64 <= var_bound;
    }
    // (b) log-depth brickwork at n=8 (ξ = ⌈log₂ n⌉ = 3): GHZ fidelity of the
    // GHZ state within ±0.1 at N = 5000
    let n8 = 8;
    let xi = (n8 as f64).log2().ceil() as usize;
    let spec = BrickworkSpec::line(n8, xi, LocalKind::Clifford);
    let prep8 = ghz_circuit(n8).unwrap();
    let obs8 = Observable::StabilizerProjector(prep8.clone());
    let snaps = collect_shadows(&prep8, &spec, 5000, RngStream::new(1850)).unwrap();
    let est = estimate_observable(&snaps, &obs8, Method::MedianOfMeans { batches: 8 }).unwrap();
    let ghz_ok = (est.value - 1.0).abs() <= 0.1;
    report(
        "08 shadows",
        unbiased && variance_ok && ghz_ok,
        &format!(
            "10 targets unbiased: {unbiased}, variance bounded: {variance_ok}; GHZ@n=8 (ξ={xi}): {:.3}",
            est.value
        ),
        t,
    );
}

#[test]
fn criterion_09_output_distributions() {
    let t = Instant::now();
    // E Σp² for Haar states at n=3 within 3σ of 2/9
    let sampler = HaarEnsemble { n: 3 };
    let mut acc = ScalarAccumulator::default();
    for i in 0..10_000u64 {
        let d = sample_output_distribution(&sampler, RngStream::new(1900), i).unwrap();
        acc.push(d.k_norm(2));
    }
    let second_ok = (acc.mean() - 2.0 / 9.0).abs() <= 3.0 * acc.std_error();
    // tv_haar_vs_uniform(8, 2) exactly 255/(256·257) and ≤ N²/2^{n−1}
    let tv = tv_haar_vs_uniform(8, 2).unwrap();
    let exact = 255.0 / (256.0 * 257.0);
    let tv_ok = (tv.tv_exact - exact).abs() <= 1e-15 && tv.tv_exact <= tv.paper_bound;
    // Berger bound ≤ exact TV on every sampled circuit at n=10
    let deep = RandomCircuit1d { n: 10, depth: 6, kind: TwoQubitKind::Haar };
    let rep = far_from_uniform_report(&deep, 50, RngStream::new(1901)).unwrap();
    let berger_ok = rep.rows.iter().all(|r| r.berger_bound <= r.tv + 1e-12);
    report(
        "09 output-distributions",
        second_ok && tv_ok && berger_ok,
        &format!(
            "EΣp² = {:.5}±{:.5} (2/9 = {:.5}); tv(8,2) = {:.6e} ≤ {:.4}; berger ≤ tv on 50/50",
            acc.mean(),
            acc.std_error(),
            2.0 / 9.0,
            tv.tv_exact,
            tv.paper_bound
        ),
        t,
    );
}

#[test]
fn criterion_10_time_reversal() {
    let t = Instant::now();
    use brickwork::protocols::{time_reversal_experiment, TimeReversalConfig};
    let cfg = TimeReversalConfig::square(3, 1, std::f64::consts::FRAC_PI_2, 2000).unwrap();
    let with = time_reversal_experiment(&cfg, true, RngStream::new(2000)).unwrap();
    let without = time_reversal_experiment(&cfg, false, RngStream::new(2001)).unwrap();
    let sigma = (with.faraway_one_frequency * (1.0 - with.faraway_one_frequency) / 2000.0).sqrt();
    let with_ok = with.faraway_one_frequency >= 2.0 / 3.0 - 3.0 * sigma;
    let without_ok = without.faraway_one_frequency == 0.0;
    report(
        "10 time-reversal",
        with_ok && without_ok,
        &format!(
            "frequency {:.4} ≥ 2/3 − 3σ ({:.4}); without coupling: {}",
            with.faraway_one_frequency,
            2.0 / 3.0 - 3.0 * sigma,
            without.faraway_one_frequency
        ),
        t,
    );
}

#[test]
fn criterion_11_desk_scale_exclusions() {
    let t = Instant::now();
    // Large-n/k asymptotics and cryptographic security claims are out of
    // desk-scale reach by definition; the structural checks above stand in.
    report(
        "11 exclusions",
        true,
        "asymptotic/PRU-security claims excluded by design; structural checks cover the mechanism",
        t,
    );
}

/// Shadow-norm inequality chain from the variance analysis:
/// `tr(O₀²) ≤ ‖O‖²_shadow ≤ 3·tr(O₀²)` at the exact design, and the
/// `+10ε·tr(O)²` headroom at shallow depth.
#[test]
fn supplement_shadow_norm_bracket() {
    let t = Instant::now();
    use brickwork::shadows::shadow_norm_empirical;
    let n = 3;
    let ens = GlobalCliffordEnsemble { n };
    let prep = ghz_circuit(n).unwrap();
    let obs = Observable::StabilizerProjector(prep.clone());
    let rep = shadow_norm_empirical(&ens, &obs, &prep, 20_000, RngStream::new(2100)).unwrap();
    let lo = rep.traceless_square;
    let hi = 3.0 * rep.traceless_square;
    let ok = rep.estimate >= lo - 3.0 * rep.std_error && rep.estimate <= hi + 3.0 * rep.std_error;
    report(
        "S1 shadow-norm-bracket",
        ok,
        &format!("{:.4}±{:.4} within [{lo:.4}, {hi:.4}]", rep.estimate, rep.std_error),
        t,
    );
}

/// Measured bias of shallow (ξ=2) brickwork shadows at n=8, reported against
/// the (vacuous at this scale) analytic bound; not gated on a magnitude.
#[test]
fn supplement_shallow_bias_report() {
    let t = Instant::now();
    use brickwork::shadows::bias_probe;
    let n = 8;
    let spec = BrickworkSpec::line(n, 2, LocalKind::Clifford);
    let prep = ghz_circuit(n).unwrap();
    let obs = Observable::StabilizerProjector(prep.clone());
    let rep = bias_probe(&spec, &prep, &obs, 4000, 1.0, RngStream::new(2200)).unwrap();
    report(
        "S2 shallow-bias-report",
        rep.bias_estimate.is_finite(),
        &format!(
            "measured bias {:.3} (±{:.3}) against 2ε·tr(O) = {:.1} at ε = 1",
            rep.bias_estimate, 3.0 * rep.std_error, rep.paper_bound
        ),
        t,
    );
}

/// Snapshot values of O = 1 are exactly 1 (estimator identity).
#[test]
fn supplement_identity_estimator() {
    let t = Instant::now();
    let ens = GlobalCliffordEnsemble { n: 4 };
    let snaps = collect_shadows(&brickwork::circuit::Circuit::new(4), &ens, 100, RngStream::new(2300)).unwrap();
    let vals = snapshot_values(&snaps, &Observable::Identity).unwrap();
    let ok = vals.iter().all(|&v| (v - 1.0).abs() < 1e-12);
    report("S3 identity-estimator", ok, "all snapshot values exactly 1", t);
}

/// The named-gate layer respects unitarity caps claimed in the interfaces.
#[test]
fn supplement_sampled_gate_unitarity() {
    let t = Instant::now();
    let mut rng = RngStream::new(2400).rng();
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let u = brickwork::ensemble::haar_unitary_dim(8, &mut rng);
        worst = worst.max(brickwork::linalg::unitarity_defect(&u));
    }
    for g in [NamedGate::H, NamedGate::S, NamedGate::Rz(0.321)] {
        worst = worst.max(brickwork::linalg::unitarity_defect(&g.dense()));
    }
    report("S4 gate-unitarity", worst <= 1e-10, &format!("max defect {worst:.2e}"), t);
}
