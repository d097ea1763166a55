//! Clifford-group elements as symplectic tableaux over GF(2).
//!
//! A [`CliffordElement`] on `m ≤ 64` qubits stores the conjugation images of
//! the generators `X_i`, `Z_i` as sign-carrying Pauli rows. Elements are
//! sampled uniformly by drawing a uniformly random ordered symplectic basis
//! (the group acts simply transitively on those) plus independent sign bits,
//! and can be synthesized into an `H/S/CNOT`-style gate sequence by sweeping
//! the tableau to the identity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Hermitian Pauli on at most 64 qubits: `(−1)^sign · ∏_q σ_{x_q z_q}`
/// with `σ_{00}=1, σ_{10}=X, σ_{11}=Y, σ_{01}=Z`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliBits {
    pub x: u64,
    pub z: u64,
    pub sign: bool,
}

impl PauliBits {
    pub fn identity() -> Self {
        Self { x: 0, z: 0, sign: false }
    }

    pub fn x_on(q: usize) -> Self {
        Self { x: 1 << q, z: 0, sign: false }
    }

    pub fn z_on(q: usize) -> Self {
        Self { x: 0, z: 1 << q, sign: false }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// 0 if the two Paulis commute, 1 otherwise.
    pub fn anticommutes(&self, other: &Self) -> bool {
        (((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) & 1) == 1
    }
}

/// A Pauli in `i^e · X^x Z^z` normal form; the working representation for
/// products, where the global `i`-exponent is tracked mod 4.
#[derive(Copy, Clone, Debug)]
struct XzForm {
    x: u64,
    z: u64,
    e: u8,
}

impl XzForm {
    fn from_hermitian(p: &PauliBits) -> Self {
        // each Y = i·XZ contributes one factor of i
        let e = (2 * p.sign as u32 + (p.x & p.z).count_ones()) % 4;
        Self { x: p.x, z: p.z, e: e as u8 }
    }

    fn mul(&mut self, other: &Self) {
        // move other's X block past our Z block: Z^z X^x' = (−1)^{|z∧x'|} X^x' Z^z
        let swaps = (self.z & other.x).count_ones();
        self.e = ((self.e as u32 + other.e as u32 + 2 * swaps) % 4) as u8;
        self.x ^= other.x;
        self.z ^= other.z;
    }

    fn into_hermitian(self) -> PauliBits {
        let e = (self.e as u32 + 4 - (self.x & self.z).count_ones() % 4) % 4;
        debug_assert!(e % 2 == 0, "non-Hermitian Pauli product");
        PauliBits { x: self.x, z: self.z, sign: e == 2 }
    }
}

/// Gate alphabet used by tableau synthesis. Qubit indices are local.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordOp {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
    Swap(usize, usize),
}

impl CliffordOp {
    pub fn inverse(self) -> Self {
        match self {
            CliffordOp::S(q) => CliffordOp::Sdg(q),
            CliffordOp::Sdg(q) => CliffordOp::S(q),
            other => other,
        }
    }
}

/// An element of the Clifford group on `m ≤ 64` qubits.
///
/// `xs[i]` and `zs[i]` are the conjugation images `C X_i C†` and `C Z_i C†`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordElement {
    m: usize,
    xs: Vec<PauliBits>,
    zs: Vec<PauliBits>,
}

fn symplectic_product(a: u128, b: u128) -> u32 {
    let (ax, az) = ((a & u64::MAX as u128) as u64, (a >> 64) as u64);
    let (bx, bz) = ((b & u64::MAX as u128) as u64, (b >> 64) as u64);
    ((ax & bz).count_ones() + (az & bx).count_ones()) & 1
}

impl CliffordElement {
    pub fn num_qubits(&self) -> usize {
        self.m
    }

    pub fn identity(m: usize) -> Self {
        Self {
            m,
            xs: (0..m).map(PauliBits::x_on).collect(),
            zs: (0..m).map(PauliBits::z_on).collect(),
        }
    }

    pub fn image_of_x(&self, i: usize) -> &PauliBits {
        &self.xs[i]
    }

    pub fn image_of_z(&self, i: usize) -> &PauliBits {
        &self.zs[i]
    }

    pub fn from_rows(m: usize, xs: Vec<PauliBits>, zs: Vec<PauliBits>) -> Result<Self> {
        if m == 0 || m > 64 || xs.len() != m || zs.len() != m {
            return Err(Error::InvalidInput(format!("bad tableau shape for m = {m}")));
        }
        let el = Self { m, xs, zs };
        if !el.is_symplectic() {
            return Err(Error::InvalidInput("rows violate symplectic constraints".into()));
        }
        Ok(el)
    }

    /// Check all pairwise (anti)commutation constraints.
    pub fn is_symplectic(&self) -> bool {
        let mask = if self.m == 64 { u64::MAX } else { (1u64 << self.m) - 1 };
        for i in 0..self.m {
            for p in [&self.xs[i], &self.zs[i]] {
                if (p.x | p.z) & !mask != 0 {
                    return false;
                }
            }
            for j in 0..self.m {
                if self.xs[i].anticommutes(&self.xs[j]) || self.zs[i].anticommutes(&self.zs[j]) {
                    return false;
                }
                let want = i == j;
                if self.xs[i].anticommutes(&self.zs[j]) != want {
                    return false;
                }
            }
        }
        true
    }

    /// Conjugate a Hermitian Pauli: `P ↦ C P C†`.
    pub fn conjugate_pauli(&self, p: &PauliBits) -> PauliBits {
        let mut acc = XzForm { x: 0, z: 0, e: XzForm::from_hermitian(p).e };
        // note: only the i-exponent of p survives; its bits select factors
        for i in 0..self.m {
            if (p.x >> i) & 1 == 1 {
                acc.mul(&XzForm::from_hermitian(&self.xs[i]));
            }
        }
        for i in 0..self.m {
            if (p.z >> i) & 1 == 1 {
                acc.mul(&XzForm::from_hermitian(&self.zs[i]));
            }
        }
        acc.into_hermitian()
    }

    /// Compose: `(other ∘ self)(P) = other(self(P))`; the returned element
    /// is the circuit "apply `self` first, then `other`".
    pub fn then(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        Self {
            m: self.m,
            xs: self.xs.iter().map(|p| other.conjugate_pauli(p)).collect(),
            zs: self.zs.iter().map(|p| other.conjugate_pauli(p)).collect(),
        }
    }

    /// Tableau of the inverse element.
    pub fn inverse(&self) -> Self {
        // bit part: for symplectic M (in (x|z) block form), M⁻¹ = J Mᵀ J
        let m = self.m;
        let mut inv_xs = vec![PauliBits::identity(); m];
        let mut inv_zs = vec![PauliBits::identity(); m];
        // row vectors of M: image of X_i is (xs[i].x | xs[i].z), etc.
        // entry lookup: bit q of image row
        for j in 0..m {
            // preimage of X_j / Z_j: J Mᵀ J index gymnastics done explicitly
            let mut px = PauliBits::identity();
            let mut pz = PauliBits::identity();
            for i in 0..m {
                // coefficient of X_j's preimage on X_i is ⟨Z-part of zs[i] at j⟩ etc.
                if (self.zs[i].z >> j) & 1 == 1 {
                    px.x |= 1 << i;
                }
                if (self.xs[i].z >> j) & 1 == 1 {
                    px.z |= 1 << i;
                }
                if (self.zs[i].x >> j) & 1 == 1 {
                    pz.x |= 1 << i;
                }
                if (self.xs[i].x >> j) & 1 == 1 {
                    pz.z |= 1 << i;
                }
            }
            inv_xs[j] = px;
            inv_zs[j] = pz;
        }
        // fix signs: require C(C⁻¹(P)) = +P
        let mut out = Self { m, xs: inv_xs, zs: inv_zs };
        for j in 0..m {
            let round = self.conjugate_pauli(&out.xs[j]);
            out.xs[j].sign ^= round.sign;
            let round = self.conjugate_pauli(&out.zs[j]);
            out.zs[j].sign ^= round.sign;
        }
        out
    }

    // --- in-place conjugation by elementary gates (rows ← g · row · g†) ---

    fn conj_h(&mut self, q: usize) {
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            let xq = (p.x >> q) & 1;
            let zq = (p.z >> q) & 1;
            p.sign ^= xq & zq == 1;
            p.x = (p.x & !(1 << q)) | (zq << q);
            p.z = (p.z & !(1 << q)) | (xq << q);
        }
    }

    fn conj_s(&mut self, q: usize) {
        // X → Y, Y → −X, Z → Z
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            let xq = (p.x >> q) & 1;
            let zq = (p.z >> q) & 1;
            p.sign ^= xq & zq == 1;
            p.z ^= xq << q;
        }
    }

    fn conj_sdg(&mut self, q: usize) {
        // X → −Y, Y → X, Z → Z
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            let xq = (p.x >> q) & 1;
            let zq = (p.z >> q) & 1;
            p.sign ^= xq == 1 && zq == 0;
            p.z ^= xq << q;
        }
    }

    fn conj_x(&mut self, q: usize) {
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            p.sign ^= (p.z >> q) & 1 == 1;
        }
    }

    fn conj_z(&mut self, q: usize) {
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            p.sign ^= (p.x >> q) & 1 == 1;
        }
    }

    fn conj_cnot(&mut self, c: usize, t: usize) {
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            let xc = (p.x >> c) & 1;
            let zc = (p.z >> c) & 1;
            let xt = (p.x >> t) & 1;
            let zt = (p.z >> t) & 1;
            p.sign ^= xc & zt & (xt ^ zc ^ 1) == 1;
            p.x ^= xc << t;
            p.z ^= zt << c;
        }
    }

    fn conj_swap(&mut self, a: usize, b: usize) {
        for p in self.xs.iter_mut().chain(self.zs.iter_mut()) {
            let xa = (p.x >> a) & 1;
            let xb = (p.x >> b) & 1;
            p.x ^= (xa ^ xb) << a | (xa ^ xb) << b;
            let za = (p.z >> a) & 1;
            let zb = (p.z >> b) & 1;
            p.z ^= (za ^ zb) << a | (za ^ zb) << b;
        }
    }

    fn conj_op(&mut self, op: CliffordOp) {
        match op {
            CliffordOp::H(q) => self.conj_h(q),
            CliffordOp::S(q) => self.conj_s(q),
            CliffordOp::Sdg(q) => self.conj_sdg(q),
            CliffordOp::X(q) => self.conj_x(q),
            CliffordOp::Z(q) => self.conj_z(q),
            CliffordOp::Cnot(c, t) => self.conj_cnot(c, t),
            CliffordOp::Swap(a, b) => self.conj_swap(a, b),
        }
    }

    /// Tableau of a gate sequence (time order).
    pub fn from_ops(m: usize, ops: &[CliffordOp]) -> Self {
        // conjugating the identity tableau by g_k ⋯ g_1 yields the element
        // g_1-then-g_2-… as a unitary product g_k ⋯ g_1
        let mut el = Self::identity(m);
        for &op in ops {
            el.conj_op(op);
        }
        el
    }

    /// Decompose into a gate sequence (time order) whose product equals this
    /// element up to global phase.
    pub fn synthesize(&self) -> Vec<CliffordOp> {
        let mut w = self.clone();
        let mut applied: Vec<CliffordOp> = Vec::new();
        let push = |w: &mut Self, applied: &mut Vec<CliffordOp>, op: CliffordOp| {
            w.conj_op(op);
            applied.push(op);
        };
        let m = self.m;
        for j in 0..m {
            // stage 1: sweep image of X_j to ±X_j
            let row = w.xs[j];
            if row.x >> j == 0 {
                // no X support at or above j: create one from a Z bit
                let t = (j..m).find(|&t| (row.z >> t) & 1 == 1).expect("row supported on ≥ j");
                push(&mut w, &mut applied, CliffordOp::H(t));
            }
            let t = (j..m).find(|&t| (w.xs[j].x >> t) & 1 == 1).unwrap();
            if t != j {
                push(&mut w, &mut applied, CliffordOp::Swap(j, t));
            }
            for t in j + 1..m {
                let row = w.xs[j];
                if (row.z >> t) & 1 == 1 {
                    if (row.x >> t) & 1 == 1 {
                        push(&mut w, &mut applied, CliffordOp::Sdg(t)); // Y → X
                    } else {
                        push(&mut w, &mut applied, CliffordOp::H(t)); // Z → X
                    }
                }
            }
            for t in j + 1..m {
                if (w.xs[j].x >> t) & 1 == 1 {
                    push(&mut w, &mut applied, CliffordOp::Cnot(j, t));
                }
            }
            if (w.xs[j].z >> j) & 1 == 1 {
                push(&mut w, &mut applied, CliffordOp::Sdg(j)); // Y_j → X_j
            }
            debug_assert_eq!((w.xs[j].x, w.xs[j].z), (1 << j, 0));

            // stage 2: sweep image of Z_j to ±Z_j; it anticommutes with X_j
            for t in j + 1..m {
                let row = w.zs[j];
                if (row.x >> t) & 1 == 1 {
                    if (row.z >> t) & 1 == 1 {
                        push(&mut w, &mut applied, CliffordOp::Sdg(t)); // Y → X
                    }
                    push(&mut w, &mut applied, CliffordOp::H(t)); // X → Z
                }
            }
            for t in j + 1..m {
                if (w.zs[j].z >> t) & 1 == 1 {
                    push(&mut w, &mut applied, CliffordOp::Cnot(t, j));
                }
            }
            if (w.zs[j].x >> j) & 1 == 1 {
                // Y_j → Z_j while fixing X_j
                push(&mut w, &mut applied, CliffordOp::H(j));
                push(&mut w, &mut applied, CliffordOp::S(j));
                push(&mut w, &mut applied, CliffordOp::H(j));
            }
            debug_assert_eq!((w.zs[j].x, w.zs[j].z), (0, 1 << j));

            // stage 3: phases
            if w.xs[j].sign {
                push(&mut w, &mut applied, CliffordOp::Z(j));
            }
            if w.zs[j].sign {
                push(&mut w, &mut applied, CliffordOp::X(j));
            }
        }
        debug_assert_eq!(w, Self::identity(m));
        // applied ∘ C = 1 ⟹ C = applied⁻¹ read back to front with inverses
        applied.into_iter().rev().map(CliffordOp::inverse).collect()
    }

    /// Depth of the synthesized gate sequence when packed greedily into
    /// disjoint layers, counting every op as one gate. Recorded as metadata;
    /// no optimality is claimed.
    pub fn synthesized_depth(&self) -> usize {
        let mut busy = vec![0usize; self.m];
        for op in self.synthesize() {
            let slot = match op {
                CliffordOp::H(q) | CliffordOp::S(q) | CliffordOp::Sdg(q) | CliffordOp::X(q)
                | CliffordOp::Z(q) => {
                    let s = busy[q] + 1;
                    busy[q] = s;
                    s
                }
                CliffordOp::Cnot(a, b) | CliffordOp::Swap(a, b) => {
                    let s = busy[a].max(busy[b]) + 1;
                    busy[a] = s;
                    busy[b] = s;
                    s
                }
            };
            let _ = slot;
        }
        busy.into_iter().max().unwrap_or(0)
    }

    /// Dense `2^m × 2^m` matrix of one representative (global phase fixed by
    /// the synthesis), for `m` small enough to materialize.
    pub fn to_dense(&self) -> Result<nalgebra::DMatrix<num_complex::Complex64>> {
        use num_complex::Complex64 as C64;
        if self.m > 10 {
            return Err(Error::SizeCap(format!("dense Clifford on m = {} qubits", self.m)));
        }
        let dim = 1usize << self.m;
        let ops = self.synthesize();
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
        for b in 0..dim {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[b] = C64::new(1.0, 0.0);
            for &op in &ops {
                apply_clifford_op_dense(&mut v, op);
            }
            cols.push(v);
        }
        let mut mat = nalgebra::DMatrix::zeros(dim, dim);
        for (j, col) in cols.iter().enumerate() {
            for (i, &a) in col.iter().enumerate() {
                mat[(i, j)] = a;
            }
        }
        Ok(mat)
    }
}

/// Apply an elementary Clifford gate to a dense amplitude vector.
pub(crate) fn apply_clifford_op_dense(v: &mut [num_complex::Complex64], op: CliffordOp) {
    use num_complex::Complex64 as C64;
    let dim = v.len();
    match op {
        CliffordOp::H(q) => {
            let bit = 1usize << q;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..dim {
                if i & bit == 0 {
                    let (a, b) = (v[i], v[i | bit]);
                    v[i] = (a + b) * s;
                    v[i | bit] = (a - b) * s;
                }
            }
        }
        CliffordOp::S(q) => {
            let bit = 1usize << q;
            for (i, a) in v.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a *= C64::new(0.0, 1.0);
                }
            }
        }
        CliffordOp::Sdg(q) => {
            let bit = 1usize << q;
            for (i, a) in v.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a *= C64::new(0.0, -1.0);
                }
            }
        }
        CliffordOp::X(q) => {
            let bit = 1usize << q;
            for i in 0..dim {
                if i & bit == 0 {
                    v.swap(i, i | bit);
                }
            }
        }
        CliffordOp::Z(q) => {
            let bit = 1usize << q;
            for (i, a) in v.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a = -*a;
                }
            }
        }
        CliffordOp::Cnot(c, t) => {
            let (cb, tb) = (1usize << c, 1usize << t);
            for i in 0..dim {
                if i & cb != 0 && i & tb == 0 {
                    v.swap(i, i | tb);
                }
            }
        }
        CliffordOp::Swap(a, b) => {
            let (ab, bb) = (1usize << a, 1usize << b);
            for i in 0..dim {
                if i & ab != 0 && i & bb == 0 {
                    v.swap(i, (i & !ab) | bb);
                }
            }
        }
    }
}

/// Draw a uniformly random Clifford element on `m ≤ 64` qubits.
///
/// A uniformly random ordered symplectic basis is built pair by pair
/// (each `(v, w)` uniform over nonzero `v` and `w` with `⟨v,w⟩ = 1` inside
/// the running symplectic complement), then sign bits are drawn uniformly.
pub fn sample_random_clifford<R: Rng>(m: usize, rng: &mut R) -> Result<CliffordElement> {
    if m == 0 || m > 64 {
        return Err(Error::SizeCap(format!("Clifford sampling supports 1..=64 qubits, got {m}")));
    }
    let pack = |p: (u64, u64)| -> u128 { (p.0 as u128) | ((p.1 as u128) << 64) };
    let mut basis: Vec<(u128, u128)> = (0..m)
        .map(|i| (pack((1 << i, 0)), pack((0, 1 << i))))
        .collect();
    let mut xs = Vec::with_capacity(m);
    let mut zs = Vec::with_capacity(m);
    for _ in 0..m {
        let r = basis.len();
        let flat: Vec<u128> = basis.iter().flat_map(|&(e, f)| [e, f]).collect();
        // v: uniform nonzero combination of the complement basis
        let v = loop {
            let mut v = 0u128;
            let mut any = false;
            for &b in &flat {
                if rng.gen::<bool>() {
                    v ^= b;
                    any = true;
                }
            }
            // "any" tracks coefficient vector ≠ 0; v itself is nonzero then,
            // because the basis vectors are independent
            if any {
                break v;
            }
        };
        // w: uniform over ⟨v, w⟩ = 1; shift the kernel coset by some d with
        // ⟨v, d⟩ = 1 (exists by nondegeneracy of the restricted form)
        let d = flat
            .iter()
            .copied()
            .find(|&b| symplectic_product(v, b) == 1)
            .expect("nondegenerate form");
        let mut w = 0u128;
        for &b in &flat {
            if rng.gen::<bool>() {
                w ^= b;
            }
        }
        if symplectic_product(v, w) == 0 {
            w ^= d;
        }
        xs.push(PauliBits { x: (v & u64::MAX as u128) as u64, z: (v >> 64) as u64, sign: rng.gen() });
        zs.push(PauliBits { x: (w & u64::MAX as u128) as u64, z: (w >> 64) as u64, sign: rng.gen() });
        // project the old basis into the symplectic complement of (v, w)
        // and re-extract a symplectic basis
        let corrected: Vec<u128> = flat
            .into_iter()
            .map(|u| {
                let mut u = u;
                if symplectic_product(u, w) == 1 {
                    u ^= v;
                }
                if symplectic_product(u, v) == 1 {
                    u ^= w;
                }
                u
            })
            .collect();
        basis = symplectic_gram_schmidt(corrected);
        debug_assert_eq!(basis.len(), r - 1);
    }
    CliffordElement::from_rows(m, xs, zs)
}

fn symplectic_gram_schmidt(pool: Vec<u128>) -> Vec<(u128, u128)> {
    let mut pairs: Vec<(u128, u128)> = Vec::new();
    let mut pool = pool;
    loop {
        let reduce = |mut u: u128, pairs: &[(u128, u128)]| -> u128 {
            for &(e, f) in pairs {
                if symplectic_product(u, f) == 1 {
                    u ^= e;
                }
                if symplectic_product(u, e) == 1 {
                    u ^= f;
                }
            }
            u
        };
        let reduced: Vec<u128> = pool
            .iter()
            .map(|&u| reduce(u, &pairs))
            .filter(|&u| u != 0)
            .collect();
        let Some(&p) = reduced.first() else { break };
        let q = reduced
            .iter()
            .copied()
            .find(|&q| symplectic_product(p, q) == 1)
            .expect("radical of a symplectic space is trivial");
        pairs.push((p, q));
        pool = reduced;
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn pauli_dense(m: usize, p: &PauliBits) -> nalgebra::DMatrix<C64> {
        let x = nalgebra::DMatrix::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let y = nalgebra::DMatrix::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(0.0, -1.0),
            C64::new(0.0, 1.0), C64::new(0.0, 0.0),
        ]);
        let z = nalgebra::DMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(-1.0, 0.0),
        ]);
        let id = nalgebra::DMatrix::<C64>::identity(2, 2);
        // qubit 0 is the least-significant bit: build kron from high to low
        let mut out = nalgebra::DMatrix::<C64>::identity(1, 1);
        for q in (0..m).rev() {
            let f = match ((p.x >> q) & 1, (p.z >> q) & 1) {
                (0, 0) => &id,
                (1, 0) => &x,
                (1, 1) => &y,
                (0, 1) => &z,
                _ => unreachable!(),
            };
            out = crate::linalg::kron(&out, f);
        }
        if p.sign {
            out = -out;
        }
        out
    }

    #[test]
    fn pauli_products_track_phases() {
        // (X)(Z) = −iY: as Hermitian inputs the product must be flagged odd,
        // so multiply X·Z·X·Z = −1 instead
        let x = PauliBits::x_on(0);
        let z = PauliBits::z_on(0);
        let mut acc = XzForm::from_hermitian(&x);
        acc.mul(&XzForm::from_hermitian(&z));
        acc.mul(&XzForm::from_hermitian(&x));
        acc.mul(&XzForm::from_hermitian(&z));
        let out = acc.into_hermitian();
        assert_eq!(out, PauliBits { x: 0, z: 0, sign: true });
    }

    #[test]
    fn elementary_conjugations_match_dense() {
        let ops = [
            CliffordOp::H(0),
            CliffordOp::S(0),
            CliffordOp::Sdg(1),
            CliffordOp::X(1),
            CliffordOp::Z(0),
            CliffordOp::Cnot(0, 1),
            CliffordOp::Cnot(1, 0),
            CliffordOp::Swap(0, 1),
        ];
        let m = 2;
        let dim = 1 << m;
        for &op in &ops {
            // dense unitary of the op
            let mut u = nalgebra::DMatrix::<C64>::zeros(dim, dim);
            for b in 0..dim {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[b] = C64::new(1.0, 0.0);
                apply_clifford_op_dense(&mut v, op);
                for i in 0..dim {
                    u[(i, b)] = v[i];
                }
            }
            let mut el = CliffordElement::identity(m);
            el.conj_op(op);
            for i in 0..m {
                for (gen, img) in [
                    (PauliBits::x_on(i), el.image_of_x(i)),
                    (PauliBits::z_on(i), el.image_of_z(i)),
                ] {
                    let lhs = &u * pauli_dense(m, &gen) * u.adjoint();
                    let rhs = pauli_dense(m, img);
                    assert!(
                        (lhs - rhs).iter().all(|v| v.norm() < 1e-12),
                        "mismatch for {op:?} on generator {gen:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn sampled_elements_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [1usize, 2, 3, 5, 8, 17, 64] {
            for _ in 0..20 {
                let c = sample_random_clifford(m, &mut rng).unwrap();
                assert!(c.is_symplectic(), "m = {m}");
            }
        }
    }

    #[test]
    fn synthesis_reproduces_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [1usize, 2, 3, 4, 6] {
            for _ in 0..10 {
                let c = sample_random_clifford(m, &mut rng).unwrap();
                let ops = c.synthesize();
                let rebuilt = CliffordElement::from_ops(m, &ops);
                assert_eq!(rebuilt, c, "m = {m}");
            }
        }
    }

    #[test]
    fn dense_conjugation_matches_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [1usize, 2, 3] {
            for _ in 0..5 {
                let c = sample_random_clifford(m, &mut rng).unwrap();
                let u = c.to_dense().unwrap();
                assert!(crate::linalg::unitarity_defect(&u) < 1e-10);
                for i in 0..m {
                    for (gen, img) in [
                        (PauliBits::x_on(i), c.image_of_x(i)),
                        (PauliBits::z_on(i), c.image_of_z(i)),
                    ] {
                        let lhs = &u * pauli_dense(m, &gen) * u.adjoint();
                        let rhs = pauli_dense(m, img);
                        assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-10));
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for m in [1usize, 2, 4, 7] {
            for _ in 0..10 {
                let c = sample_random_clifford(m, &mut rng).unwrap();
                let inv = c.inverse();
                assert_eq!(c.then(&inv), CliffordElement::identity(m));
                assert_eq!(inv.then(&c), CliffordElement::identity(m));
            }
        }
    }

    #[test]
    fn single_qubit_cliffords_uniform() {
        // all 24 single-qubit Cliffords appear with frequency 1/24 ± 3σ
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let mut counts: HashMap<(PauliBits, PauliBits), u64> = HashMap::new();
        for _ in 0..draws {
            let c = sample_random_clifford(1, &mut rng).unwrap();
            *counts.entry((*c.image_of_x(0), *c.image_of_z(0))).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        for (_, &c) in counts.iter() {
            let freq = c as f64 / draws as f64;
            assert!((freq - p).abs() < 3.0 * sigma + 1e-9, "freq {freq}");
        }
    }

    #[test]
    fn two_qubit_frame_potential_is_two_design() {
        // E |tr(U†V)|⁴ = 2 for an exact 2-design at D = 4
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let pairs = 10_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..pairs {
            let u = sample_random_clifford(2, &mut rng).unwrap().to_dense().unwrap();
            let v = sample_random_clifford(2, &mut rng).unwrap().to_dense().unwrap();
            let t: C64 = u
                .iter()
                .zip(v.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let val = t.norm_sqr() * t.norm_sqr();
            acc += val;
            acc2 += val * val;
        }
        let mean = acc / pairs as f64;
        let var = (acc2 / pairs as f64 - mean * mean).max(0.0);
        let sigma = (var / pairs as f64).sqrt();
        assert!(
            (mean - 2.0).abs() < 3.0 * sigma,
            "frame potential {mean} ± {sigma}"
        );
    }
}
