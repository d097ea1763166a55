//! Small dense linear-algebra helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

/// `a ⊗ a ⊗ ... ⊗ a` (`k` factors).
pub fn kron_power(a: &DMatrix<C64>, k: usize) -> DMatrix<C64> {
    assert!(k >= 1);
    let mut out = a.clone();
    for _ in 1..k {
        out = kron(&out, a);
    }
    out
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = m.clone().symmetric_eigen();
    let mut ev: Vec<f64> = sym.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Spectral norm `‖m‖_∞` of a Hermitian matrix.
pub fn spectral_norm_hermitian(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// Trace norm `‖m‖₁` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).into_iter().map(f64::abs).sum()
}

/// Trace distance `½‖a − b‖₁` between Hermitian matrices.
pub fn trace_distance_hermitian(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    0.5 * trace_norm_hermitian(&(a - b))
}

/// Max absolute entry.
pub fn max_abs_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖m† m − 1‖_max`, the unitarity defect.
pub fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((prod[(i, j)] - expect).norm());
        }
    }
    worst
}
