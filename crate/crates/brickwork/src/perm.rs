//! Symmetric-group and Weingarten machinery.
//!
//! Everything here is exact and dense: permutations of `k` tensor copies,
//! their `k! × k!` Gram matrix `G_{σ,τ}(D) = D^{#cycles(στ⁻¹)}`, its inverse
//! (the Weingarten matrix), and the exact and approximate Haar twirls built
//! from them. Sizes are desk-scale by design; every constructor guards its
//! allocation and fails loudly instead of thrashing.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{kron, spectral_norm_hermitian};

/// Hard cap on the moment order; `k! × k!` matrices above this are refused.
pub const MAX_MOMENT_ORDER: usize = 8;

/// Allocation budget for dense objects in this module (bytes).
pub const BYTE_BUDGET: usize = 1 << 30;

/// A permutation of `{0, …, k−1}` in one-line notation: `mapping[i]` is the
/// image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let k = mapping.len();
        let mut seen = vec![false; k];
        for &v in &mapping {
            if v >= k || seen[v] {
                return Err(Error::InvalidInput(format!(
                    "not a bijection on 0..{k}: {mapping:?}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(k: usize) -> Self {
        Self { mapping: (0..k).collect() }
    }

    /// Transposition `(a b)` on `k` points.
    pub fn transposition(k: usize, a: usize, b: usize) -> Self {
        let mut mapping: Vec<usize> = (0..k).collect();
        mapping.swap(a, b);
        Self { mapping }
    }

    pub fn k(&self) -> usize {
        self.mapping.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.k(), other.k());
        Self {
            mapping: (0..self.k()).map(|i| self.mapping[other.mapping[i]]).collect(),
        }
    }

    pub fn invert(&self) -> Self {
        let mut inv = vec![0; self.k()];
        for (i, &v) in self.mapping.iter().enumerate() {
            inv[v] = i;
        }
        Self { mapping: inv }
    }

    /// Number of cycles in the cycle decomposition (fixed points count).
    pub fn cycle_count(&self) -> usize {
        let k = self.k();
        let mut seen = vec![false; k];
        let mut cycles = 0;
        for start in 0..k {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut at = start;
            while !seen[at] {
                seen[at] = true;
                at = self.mapping[at];
            }
        }
        cycles
    }

    /// Cayley distance `|σ| = k − #cycles(σ)`.
    pub fn cayley_distance(&self) -> usize {
        self.k() - self.cycle_count()
    }

    /// Lexicographic rank of the one-line notation among all of `S_k`.
    pub fn lex_rank(&self) -> usize {
        let k = self.k();
        let mut rank = 0;
        let mut fact = factorial(k);
        for i in 0..k {
            fact /= k - i;
            let smaller = self.mapping[i + 1..]
                .iter()
                .filter(|&&v| v < self.mapping[i])
                .count();
            rank += smaller * fact;
        }
        rank
    }

    /// Act on a base-`dim` digit string of length `k` packed into an index:
    /// digit `t` of the input moves to digit position `σ(t)`.
    pub fn apply_to_index(&self, index: usize, dim: usize) -> usize {
        let k = self.k();
        let mut digits = vec![0usize; k];
        let mut rem = index;
        for d in digits.iter_mut() {
            *d = rem % dim;
            rem /= dim;
        }
        let mut out = 0usize;
        let mut scale = 1usize;
        let inv = self.invert();
        for t in 0..k {
            out += digits[inv.mapping[t]] * scale;
            scale *= dim;
        }
        out
    }
}

pub fn factorial(k: usize) -> usize {
    (1..=k).product::<usize>().max(1)
}

/// All of `S_k` in lexicographic order of one-line notation. This fixed
/// order indexes the rows and columns of the Gram and Weingarten matrices.
pub fn enumerate_sk(k: usize) -> Result<Vec<Permutation>> {
    if k == 0 || k > MAX_MOMENT_ORDER {
        return Err(Error::SizeCap(format!(
            "moment order k = {k} outside 1..={MAX_MOMENT_ORDER}"
        )));
    }
    let mut perms = Vec::with_capacity(factorial(k));
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        perms.push(Permutation { mapping: current.clone() });
        // next lexicographic permutation
        let Some(i) = (0..k - 1).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    Ok(perms)
}

/// The `k! × k!` Gram matrix of permutation operators on `(C^D)^{⊗k}`:
/// `entry(σ, τ) = D^{#cycles(στ⁻¹)}`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub k: usize,
    pub dim: usize,
    pub entries: DMatrix<f64>,
}

/// Matrix inverse of [`GramMatrix`], defined for `D ≥ k`.
#[derive(Clone, Debug)]
pub struct WeingartenMatrix {
    pub k: usize,
    pub dim: usize,
    pub entries: DMatrix<f64>,
}

pub fn gram_matrix(k: usize, dim: usize) -> Result<GramMatrix> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("local dimension D = {dim} < 2")));
    }
    let perms = enumerate_sk(k)?;
    let size = perms.len();
    if size * size * std::mem::size_of::<f64>() > BYTE_BUDGET {
        return Err(Error::SizeCap(format!(
            "Gram matrix at k = {k} needs {size}×{size} entries"
        )));
    }
    let mut entries = DMatrix::zeros(size, size);
    for (i, sigma) in perms.iter().enumerate() {
        for (j, tau) in perms.iter().enumerate() {
            let cycles = sigma.compose(&tau.invert()).cycle_count();
            entries[(i, j)] = (dim as f64).powi(cycles as i32);
        }
    }
    Ok(GramMatrix { k, dim, entries })
}

pub fn weingarten_matrix(k: usize, dim: usize) -> Result<WeingartenMatrix> {
    if dim < k {
        return Err(Error::Regime(format!(
            "Gram matrix is singular for D = {dim} < k = {k}"
        )));
    }
    let gram = gram_matrix(k, dim)?;
    let size = gram.entries.nrows();
    let mut inv = gram
        .entries
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("Gram inversion failed at k={k}, D={dim}")))?;
    // one or two Newton refinement passes keep ‖Wg·G − 1‖_max at f64 floor
    for _ in 0..3 {
        let residual = &inv * &gram.entries - DMatrix::identity(size, size);
        let worst = residual.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        if worst < 1e-13 {
            break;
        }
        inv -= &residual * &inv;
    }
    Ok(WeingartenMatrix { k, dim, entries: inv })
}

/// Row sums of the Gram matrix: brute-force enumeration and the two closed
/// forms under comparison. Brute force is authoritative.
#[derive(Clone, Copy, Debug)]
pub struct GramSum {
    pub brute: f64,
    /// `(k+D−1)!/D!` as printed in the source analysis.
    pub stated_closed_form: f64,
    /// Rising factorial `D(D+1)···(D+k−1) = (k+D−1)!/(D−1)!`.
    pub rising_factorial: f64,
}

pub fn sum_gram(k: usize, dim: usize) -> Result<GramSum> {
    let perms = enumerate_sk(k)?;
    let brute: f64 = perms
        .iter()
        .map(|p| (dim as f64).powi(p.cycle_count() as i32))
        .sum();
    let mut stated = 1.0;
    for i in (dim + 1)..=(k + dim - 1) {
        stated *= i as f64;
    }
    let mut rising = 1.0;
    for i in 0..k {
        rising *= (dim + i) as f64;
    }
    Ok(GramSum { brute, stated_closed_form: stated, rising_factorial: rising })
}

#[derive(Clone, Copy, Debug)]
pub struct WeingartenSum {
    pub brute: f64,
    /// `(D−k)!/D!`.
    pub closed_form: f64,
}

pub fn sum_abs_weingarten(k: usize, dim: usize) -> Result<WeingartenSum> {
    let wg = weingarten_matrix(k, dim)?;
    // one row: all rows have the same multiset of |Wg| values
    let brute: f64 = wg.entries.row(0).iter().map(|x| x.abs()).sum();
    let mut falling = 1.0;
    for i in 0..k {
        falling *= (dim - i) as f64;
    }
    Ok(WeingartenSum { brute, closed_form: 1.0 / falling })
}

/// A dense operator on `(C^{2^n})^{⊗k}`.
#[derive(Clone, Debug)]
pub struct MomentOperatorDense {
    pub k: usize,
    pub n: usize,
    pub matrix: DMatrix<C64>,
}

impl MomentOperatorDense {
    pub fn new(k: usize, n: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = moment_space_dim(k, n)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "expected {dim}×{dim} matrix, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { k, n, matrix })
    }

    pub fn identity(k: usize, n: usize) -> Result<Self> {
        let dim = moment_space_dim(k, n)?;
        Ok(Self { k, n, matrix: DMatrix::identity(dim, dim) })
    }

    /// `|b⟩⟨b|^{⊗k}` for the computational basis state `b` on `n` qubits.
    pub fn basis_projector(k: usize, n: usize, b: usize) -> Result<Self> {
        let dim = moment_space_dim(k, n)?;
        let d = 1usize << n;
        let mut idx = 0usize;
        let mut scale = 1usize;
        for _ in 0..k {
            idx += b * scale;
            scale *= d;
        }
        let mut matrix = DMatrix::zeros(dim, dim);
        matrix[(idx, idx)] = C64::new(1.0, 0.0);
        Ok(Self { k, n, matrix })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diagonal().sum()
    }
}

fn moment_space_dim(k: usize, n: usize) -> Result<usize> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("k and n must be positive".into()));
    }
    let bits = n.checked_mul(k).ok_or_else(|| Error::SizeCap("nk overflow".into()))?;
    if bits > 26 {
        return Err(Error::SizeCap(format!("moment space needs 2^{bits} amplitudes")));
    }
    let dim = 1usize << bits;
    if dim * dim * std::mem::size_of::<C64>() > BYTE_BUDGET {
        return Err(Error::SizeCap(format!("moment operator would need {dim}×{dim} entries")));
    }
    Ok(dim)
}

/// The representation of `p` on `(C^D)^{⊗k}` as an explicit 0/1 matrix.
pub fn permutation_operator(p: &Permutation, dim: usize) -> Result<DMatrix<C64>> {
    let k = p.k();
    let total = dim
        .checked_pow(k as u32)
        .ok_or_else(|| Error::SizeCap("D^k overflow".into()))?;
    if total * total * std::mem::size_of::<C64>() > BYTE_BUDGET {
        return Err(Error::SizeCap(format!("permutation operator of dim {total}")));
    }
    let mut m = DMatrix::zeros(total, total);
    for idx in 0..total {
        m[(p.apply_to_index(idx, dim), idx)] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

/// `Tr(A · P_σ)` without materializing `P_σ`.
fn trace_against_permutation(a: &DMatrix<C64>, p: &Permutation, dim: usize) -> C64 {
    let total = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..total {
        acc += a[(r, p.apply_to_index(r, dim))];
    }
    acc
}

/// Accumulate `out += w · P_τ`.
fn add_scaled_permutation(out: &mut DMatrix<C64>, w: C64, p: &Permutation, dim: usize) {
    let total = out.nrows();
    for c in 0..total {
        out[(p.apply_to_index(c, dim), c)] += w;
    }
}

/// Exact Haar twirl `Φ_H(A) = Σ_{σ,τ} Tr(Aσ⁻¹) · Wg_{σ,τ}(D) · τ`,
/// with `D = 2^n` the full Hilbert-space dimension.
pub fn haar_twirl_exact(a: &MomentOperatorDense) -> Result<MomentOperatorDense> {
    let d = 1usize << a.n;
    if a.k > d {
        return Err(Error::Regime(format!(
            "Haar twirl needs k ≤ D; got k = {}, D = {d}",
            a.k
        )));
    }
    let perms = enumerate_sk(a.k)?;
    let wg = weingarten_matrix(a.k, d)?;
    let coeffs: Vec<C64> = perms
        .iter()
        .map(|s| trace_against_permutation(&a.matrix, &s.invert(), d))
        .collect();
    let mut out = DMatrix::zeros(a.matrix.nrows(), a.matrix.ncols());
    for (j, tau) in perms.iter().enumerate() {
        let mut w = C64::new(0.0, 0.0);
        for (i, &c) in coeffs.iter().enumerate() {
            w += c * C64::new(wg.entries[(i, j)], 0.0);
        }
        add_scaled_permutation(&mut out, w, tau, d);
    }
    MomentOperatorDense::new(a.k, a.n, out)
}

/// Approximate Haar twirl `Φ_a(A) = D^{−k} Σ_σ Tr(Aσ⁻¹) σ`.
pub fn haar_twirl_approx(a: &MomentOperatorDense) -> Result<MomentOperatorDense> {
    let d = 1usize << a.n;
    let perms = enumerate_sk(a.k)?;
    let norm = 1.0 / (d as f64).powi(a.k as i32);
    let mut out = DMatrix::zeros(a.matrix.nrows(), a.matrix.ncols());
    for sigma in &perms {
        let c = trace_against_permutation(&a.matrix, &sigma.invert(), d) * norm;
        add_scaled_permutation(&mut out, c, sigma, d);
    }
    MomentOperatorDense::new(a.k, a.n, out)
}

fn choi_space_guard(k: usize, n: usize) -> Result<usize> {
    let bits = 2 * n * k;
    if bits > 24 {
        return Err(Error::SizeCap(format!(
            "Choi object needs 2^{bits} amplitudes (guard: 2nk ≤ 24)"
        )));
    }
    let dim = 1usize << bits;
    if dim * dim * std::mem::size_of::<C64>() > BYTE_BUDGET {
        return Err(Error::SizeCap(format!("Choi matrix would need {dim}×{dim} entries")));
    }
    Ok(dim)
}

/// `[Φ_a ⊗ 1](P_EPR) = D^{−2k} Σ_σ σ ⊗ σ` on `H^{⊗k} ⊗ H^{⊗k}`.
pub fn choi_of_approx_twirl(k: usize, n: usize) -> Result<DMatrix<C64>> {
    let dim = choi_space_guard(k, n)?;
    let d = 1usize << n;
    let perms = enumerate_sk(k)?;
    let mut out = DMatrix::zeros(dim, dim);
    let norm = 1.0 / (d as f64).powi(2 * k as i32);
    for sigma in &perms {
        let op = permutation_operator(sigma, d)?;
        out += kron(&op, &op) * C64::new(norm, 0.0);
    }
    Ok(out)
}

/// `[Φ_H ⊗ 1](P_EPR) = D^{−k} Σ_{σ,τ} Wg_{σ,τ}(D) σ ⊗ τ`.
pub fn choi_of_haar_twirl(k: usize, n: usize) -> Result<DMatrix<C64>> {
    let dim = choi_space_guard(k, n)?;
    let d = 1usize << n;
    let perms = enumerate_sk(k)?;
    let wg = weingarten_matrix(k, d)?;
    let ops: Vec<DMatrix<C64>> = perms
        .iter()
        .map(|p| permutation_operator(p, d))
        .collect::<Result<_>>()?;
    let norm = 1.0 / (d as f64).powi(k as i32);
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..perms.len() {
        for j in 0..perms.len() {
            let w = wg.entries[(i, j)] * norm;
            if w == 0.0 {
                continue;
            }
            out += kron(&ops[i], &ops[j]) * C64::new(w, 0.0);
        }
    }
    Ok(out)
}

/// The bound `ε = 4^{nk}/k! · (1 + k²/2^n) · ‖[(Φ_E − Φ_a) ⊗ 1](P_EPR)‖_∞ + k²/2^n`
/// applied to a precomputed additive norm.
pub fn relative_error_from_epr_norm(diff_norm: f64, k: usize, n: usize) -> Result<f64> {
    let d = (1usize << n) as f64;
    let kk = (k * k) as f64;
    if kk > d {
        return Err(Error::Regime(format!("needs k² ≤ 2^n; got k = {k}, n = {n}")));
    }
    let prefactor = d.powi(2 * k as i32) / factorial(k) as f64;
    Ok(prefactor * (1.0 + kk / d) * diff_norm + kk / d)
}

/// Design relative-error bound from the Choi state of a twirl:
/// `ε = 4^{nk}/k! · (1 + k²/2^n) · ‖choi_E − choi_a‖_∞ + k²/2^n`.
pub fn relative_error_from_epr(choi_e: &DMatrix<C64>, k: usize, n: usize) -> Result<f64> {
    let choi_a = choi_of_approx_twirl(k, n)?;
    if choi_e.shape() != choi_a.shape() {
        return Err(Error::InvalidInput(format!(
            "Choi dimension mismatch: {:?} vs {:?}",
            choi_e.shape(),
            choi_a.shape()
        )));
    }
    relative_error_from_epr_norm(spectral_norm_hermitian(&(choi_e - &choi_a)), k, n)
}

/// A Hermitian combination `Σ_{σ,τ} c_{στ} σ ⊗ τ` on `H^{⊗k} ⊗ H^{⊗k}`,
/// applied matrix-free. Lets us reach dimensions where the dense Choi
/// matrix cannot be materialized.
struct PermKronOperator {
    dim_side: usize,
    /// `index_maps[s][i] = σ_s · i`
    index_maps: Vec<Vec<usize>>,
    coeffs: DMatrix<f64>,
}

impl PermKronOperator {
    fn build(k: usize, n: usize, coeffs: DMatrix<f64>) -> Result<Self> {
        let bits = n * k;
        if 2 * bits > 26 {
            return Err(Error::SizeCap(format!(
                "implicit Choi operator needs 2^{} amplitudes",
                2 * bits
            )));
        }
        let d = 1usize << n;
        let dim_side = 1usize << bits;
        let perms = enumerate_sk(k)?;
        let index_maps = perms
            .iter()
            .map(|p| (0..dim_side).map(|i| p.apply_to_index(i, d)).collect())
            .collect();
        Ok(Self { dim_side, index_maps, coeffs })
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let side = self.dim_side;
        out.fill(0.0);
        for (s, map_s) in self.index_maps.iter().enumerate() {
            for (t, map_t) in self.index_maps.iter().enumerate() {
                let c = self.coeffs[(s, t)];
                if c == 0.0 {
                    continue;
                }
                for i in 0..side {
                    let oi = map_s[i];
                    for j in 0..side {
                        out[oi * side + map_t[j]] += c * v[i * side + j];
                    }
                }
            }
        }
    }

    /// `‖M‖_∞` by power iteration (the operator is real symmetric).
    fn spectral_norm(&self, iters: usize) -> f64 {
        let dim = self.dim_side * self.dim_side;
        let mut v: Vec<f64> = (0..dim)
            .map(|i| {
                let h = crate::rng::mix64(i as u64 ^ 0xabcd_1234);
                (h as f64 / u64::MAX as f64) - 0.5
            })
            .collect();
        let mut w = vec![0.0; dim];
        let mut norm_est = 0.0;
        for _ in 0..iters {
            self.apply(&v, &mut w);
            let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nw == 0.0 {
                return 0.0;
            }
            norm_est = nw;
            for (a, b) in v.iter_mut().zip(&w) {
                *a = b / nw;
            }
        }
        norm_est
    }
}

/// `‖[(Φ_H − Φ_a) ⊗ 1](P_EPR)‖_∞` without materializing either Choi matrix.
pub fn choi_haar_vs_approx_norm(k: usize, n: usize) -> Result<f64> {
    let d = 1usize << n;
    let perms = enumerate_sk(k)?;
    let wg = weingarten_matrix(k, d)?;
    let df = d as f64;
    let mut coeffs = wg.entries / df.powi(k as i32);
    let delta = 1.0 / df.powi(2 * k as i32);
    for i in 0..perms.len() {
        coeffs[(i, i)] -= delta;
    }
    Ok(PermKronOperator::build(k, n, coeffs)?.spectral_norm(120))
}

/// Gluing bound for `V_ABC = U_AB · U_BC`:
/// `1+ε = (1+ε₁)(1+ε₂)(1−k²/2D_AB)⁻¹(1−k²/2D_BC)⁻¹ · e^{k²/2D_B} · (1+k²/D_ABC)`.
/// `k = 0` is accepted as the degenerate no-correction limit.
pub fn gluing_error_bound(
    eps1: f64,
    eps2: f64,
    k: usize,
    n_a: usize,
    n_b: usize,
    n_c: usize,
) -> Result<f64> {
    let kk = (k * k) as f64;
    if k == 0 {
        return Ok((1.0 + eps1) * (1.0 + eps2) - 1.0);
    }
    let d_b = (n_b as f64).exp2();
    if kk > d_b / 2.0 {
        return Err(Error::Regime(format!(
            "gluing bound needs k² ≤ D_B/2; got k = {k}, |B| = {n_b}"
        )));
    }
    let d_ab = ((n_a + n_b) as f64).exp2();
    let d_bc = ((n_b + n_c) as f64).exp2();
    let d_abc = ((n_a + n_b + n_c) as f64).exp2();
    let one_plus = (1.0 + eps1) * (1.0 + eps2)
        / (1.0 - kk / (2.0 * d_ab))
        / (1.0 - kk / (2.0 * d_bc))
        * (kk / (2.0 * d_b)).exp()
        * (1.0 + kk / d_abc);
    Ok(one_plus - 1.0)
}

/// Simplified gluing bound `1+ε ≤ (1+ε₁)(1+ε₂)(1 + 2k²/2^{|B|})`,
/// valid for `|B| ≥ log₂(2k²)`.
pub fn gluing_error_bound_simplified(eps1: f64, eps2: f64, k: usize, n_b: usize) -> f64 {
    let kk = (k * k) as f64;
    (1.0 + eps1) * (1.0 + eps2) * (1.0 + 2.0 * kk / (n_b as f64).exp2()) - 1.0
}

/// Patch-size and accumulated-error budget for the two-layer brickwork
/// construction.
#[derive(Clone, Copy, Debug)]
pub struct DepthBudget {
    /// Minimal patch size `ξ ≥ log₂(nk²/ε)`.
    pub xi_min: usize,
    /// Number of patches `m` at `ξ = ξ_min`.
    pub patches: usize,
    /// `(1+ε/n)^{m−1}(1+f(k,q))^{m−2} − 1` with `q = 2^ξ`.
    pub total_error_bound: f64,
}

/// Per-gluing-step correction `f(k, q)`, `q = 2^ξ`.
pub fn gluing_step_correction(k: usize, q: f64) -> f64 {
    let kk = (k * k) as f64;
    let k4 = kk * kk;
    2.0 * (kk / q + kk / (q * q) + k4 / (q * q * q) + (kk / (2.0 * q * q)) / (1.0 - kk / (2.0 * q * q)))
        * (1.0 + kk / (q * q))
}

pub fn design_depth_budget(n: usize, k: usize, eps: f64) -> Result<DepthBudget> {
    if !(eps > 0.0 && eps <= 1.0) || k == 0 {
        return Err(Error::InvalidInput(format!("need 0 < ε ≤ 1 and k ≥ 1; got ε = {eps}, k = {k}")));
    }
    let xi_min = ((n * k * k) as f64 / eps).log2().ceil().max(1.0) as usize;
    let patches = (n / xi_min).max(2);
    let q = (xi_min as f64).exp2();
    let local = 1.0 + eps / n as f64;
    let glue = 1.0 + gluing_step_correction(k, q);
    let bound = local.powi(patches as i32 - 1) * glue.powi(patches as i32 - 2) - 1.0;
    Ok(DepthBudget { xi_min, patches, total_error_bound: bound })
}
