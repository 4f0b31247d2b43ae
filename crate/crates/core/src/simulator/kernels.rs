//! In-place kernels over flat amplitude buffers of length `2^k`.
//!
//! A density matrix of `n` qubits is stored row-major, so its flat index is
//! `row << n | col`: row qubit `q` sits on flat bit `q + n` and column qubit
//! `q` on flat bit `q`. Conjugating by a one-qubit unitary `A` is then `A` on
//! the row bit followed by `conj(A)` on the column bit.

use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn conj(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[0][1].conj()],
        [a[1][0].conj(), a[1][1].conj()],
    ]
}

pub fn is_diagonal(a: &Mat2) -> bool {
    a[0][1] == ZERO && a[1][0] == ZERO
}

/// `v ← (I ⊗ m ⊗ I) v` acting on flat bit `bit`.
pub fn apply_1q(v: &mut [Complex64], bit: usize, m: &Mat2) {
    if is_diagonal(m) {
        return apply_diag(v, bit, m[0][0], m[1][1]);
    }
    let stride = 1usize << bit;
    for chunk in v.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    }
}

pub fn apply_diag(v: &mut [Complex64], bit: usize, d0: Complex64, d1: Complex64) {
    let stride = 1usize << bit;
    let (skip0, skip1) = (d0 == ONE, d1 == ONE);
    for chunk in v.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        if !skip0 {
            lo.iter_mut().for_each(|a| *a *= d0);
        }
        if !skip1 {
            hi.iter_mut().for_each(|b| *b *= d1);
        }
    }
}

/// Swaps the target bit wherever the control bit is set.
pub fn apply_cnot(v: &mut [Complex64], control_bit: usize, target_bit: usize) {
    let (cm, tm) = (1usize << control_bit, 1usize << target_bit);
    let bits = sorted2(control_bit, target_bit);
    for k in 0..(v.len() >> 2) {
        let i = deposit(k, &bits) | cm;
        v.swap(i, i | tm);
    }
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    [a.min(b), a.max(b)]
}

/// Inserts zero bits at the (ascending) positions in `bits`.
#[inline]
pub fn deposit(mut k: usize, bits: &[usize]) -> usize {
    for &b in bits {
        let low = k & ((1 << b) - 1);
        k = ((k >> b) << (b + 1)) | low;
    }
    k
}

/// Visits every 2x2 block `(row r/r', col c/c')` of a row-major `2^n × 2^n`
/// buffer where the primed indices have qubit `q` set.
#[inline(always)]
fn for_each_block(
    rho: &mut [Complex64],
    n: usize,
    q: usize,
    mut f: impl FnMut(&mut Complex64, &mut Complex64, &mut Complex64, &mut Complex64),
) {
    let dim = 1usize << n;
    let m = 1usize << q;
    for rows in rho.chunks_exact_mut(2 * m * dim) {
        let (top, bottom) = rows.split_at_mut(m * dim);
        for (r0, r1) in top.chunks_exact_mut(dim).zip(bottom.chunks_exact_mut(dim)) {
            for (c0, c1) in r0.chunks_exact_mut(2 * m).zip(r1.chunks_exact_mut(2 * m)) {
                let (x00, x01) = c0.split_at_mut(m);
                let (x10, x11) = c1.split_at_mut(m);
                for (((a, b), c), d) in x00.iter_mut().zip(x01).zip(x10).zip(x11) {
                    f(a, b, c, d);
                }
            }
        }
    }
}

/// Density-matrix conjugation `ρ ← A ρ A†` on qubit `q` of an `n`-qubit ρ.
pub fn conjugate_1q(rho: &mut [Complex64], n: usize, q: usize, a: &Mat2) {
    if is_diagonal(a) {
        apply_diag(rho, q + n, a[0][0], a[1][1]);
        return apply_diag(rho, q, a[0][0].conj(), a[1][1].conj());
    }
    let b = conj(a);
    for_each_block(rho, n, q, |x00, x01, x10, x11| {
        // Y = A X, then Y A†
        let y00 = a[0][0] * *x00 + a[0][1] * *x10;
        let y01 = a[0][0] * *x01 + a[0][1] * *x11;
        let y10 = a[1][0] * *x00 + a[1][1] * *x10;
        let y11 = a[1][0] * *x01 + a[1][1] * *x11;
        *x00 = y00 * b[0][0] + y01 * b[0][1];
        *x01 = y00 * b[1][0] + y01 * b[1][1];
        *x10 = y10 * b[0][0] + y11 * b[0][1];
        *x11 = y10 * b[1][0] + y11 * b[1][1];
    });
}

pub fn conjugate_cnot(rho: &mut [Complex64], n: usize, control: usize, target: usize) {
    apply_cnot(rho, control + n, target + n);
    apply_cnot(rho, control, target);
}

/// CNOT conjugation followed by two-qubit depolarizing on the same pair, in
/// one pass. The two commute, so the kernel is also its own adjoint.
pub fn cnot_depolarize(rho: &mut [Complex64], n: usize, control: usize, target: usize, eps: f64) {
    let mut bits = [control, target, control + n, target + n];
    bits.sort_unstable();
    let (rc, rt, cc, ct) = (
        1usize << (control + n),
        1usize << (target + n),
        1usize << control,
        1usize << target,
    );
    // pair index p = control bit | target bit << 1; CNOT maps p to cnot[p]
    let cnot = [0usize, 3, 2, 1];
    let row = [0, rc, rt, rc | rt];
    let col = [0, cc, ct, cc | ct];
    let keep = 1.0 - eps;
    let mut block = [ZERO; 16];
    for k in 0..(rho.len() >> 4) {
        let base = deposit(k, &bits);
        for r in 0..4 {
            for c in 0..4 {
                block[4 * cnot[r] + cnot[c]] = rho[base + row[r] + col[c]];
            }
        }
        let add = if eps == 0.0 {
            ZERO
        } else {
            (block[0] + block[5] + block[10] + block[15]) * (eps / 4.0)
        };
        for r in 0..4 {
            for c in 0..4 {
                let mut x = block[4 * r + c];
                if eps != 0.0 {
                    x *= keep;
                    if r == c {
                        x += add;
                    }
                }
                rho[base + row[r] + col[c]] = x;
            }
        }
    }
}

/// Two-qubit depolarizing on the pair `(a, b)`:
/// `ρ ← (1−ε)ρ + ε · I/4 ⊗ Tr_{ab} ρ`.
///
/// The map is self-adjoint under the Hilbert–Schmidt inner product, so the
/// same kernel propagates observables backwards.
pub fn pair_depolarize(rho: &mut [Complex64], n: usize, a: usize, b: usize, eps: f64) {
    if eps == 0.0 {
        return;
    }
    let mut bits = [a, b, a + n, b + n];
    bits.sort_unstable();
    let (ra, rb, ca, cb) = (1usize << (a + n), 1usize << (b + n), 1usize << a, 1usize << b);
    // pair state k = (bit_a, bit_b) on both row and column
    let diag_offsets = [0, ra | ca, rb | cb, ra | rb | ca | cb];
    let keep = 1.0 - eps;
    for k in 0..(rho.len() >> 4) {
        let base = deposit(k, &bits);
        let tr: Complex64 = diag_offsets.iter().map(|&o| rho[base + o]).sum();
        for r in 0..4usize {
            for c in 0..4usize {
                let off = (if r & 1 != 0 { ra } else { 0 })
                    | (if r & 2 != 0 { rb } else { 0 })
                    | (if c & 1 != 0 { ca } else { 0 })
                    | (if c & 2 != 0 { cb } else { 0 });
                let x = &mut rho[base + off];
                *x *= keep;
                if r == c {
                    *x += tr * (eps / 4.0);
                }
            }
        }
    }
}

/// `ρ ← f ρ + (1−f) Tr(ρ) I/d` for a `d × d` row-major ρ.
pub fn depolarize_global(rho: &mut [Complex64], dim: usize, f: f64) {
    if f == 1.0 {
        return;
    }
    let tr: Complex64 = (0..dim).map(|i| rho[i * dim + i]).sum();
    rho.iter_mut().for_each(|x| *x *= f);
    let add = tr * ((1.0 - f) / dim as f64);
    for i in 0..dim {
        rho[i * dim + i] += add;
    }
}

/// The 4×4×... contraction data for one-qubit blocks: for Hermitian `O` and
/// `ρ`, `Tr(O · UρU†) = Re Σ M[a][b][a'][b'] U[a][a'] conj(U[b][b'])`.
pub type Transfer = [[[[Complex64; 2]; 2]; 2]; 2];

pub fn transfer(o: &[Complex64], rho: &[Complex64], n: usize, q: usize) -> Transfer {
    let dim = 1usize << n;
    let m = 1usize << q;
    let mut acc: Transfer = [[[[ZERO; 2]; 2]; 2]; 2];
    let rows = o.chunks_exact(2 * m * dim).zip(rho.chunks_exact(2 * m * dim));
    for (orows, rrows) in rows {
        let (ot, ob) = orows.split_at(m * dim);
        let (rt, rb) = rrows.split_at(m * dim);
        let pairs = ot
            .chunks_exact(dim)
            .zip(ob.chunks_exact(dim))
            .zip(rt.chunks_exact(dim).zip(rb.chunks_exact(dim)));
        for ((o0, o1), (r0, r1)) in pairs {
            for c in (0..dim).filter(|c| c & m == 0) {
                let ov = [[o0[c], o0[c | m]], [o1[c], o1[c | m]]];
                let rv = [[r0[c], r0[c | m]], [r1[c], r1[c | m]]];
                for a in 0..2 {
                    for b in 0..2 {
                        let w = ov[a][b].conj();
                        for ap in 0..2 {
                            for bp in 0..2 {
                                acc[a][b][ap][bp] += w * rv[ap][bp];
                            }
                        }
                    }
                }
            }
        }
    }
    acc
}

pub fn contract(m: &Transfer, u: &Mat2) -> f64 {
    let mut acc = ZERO;
    for a in 0..2 {
        for b in 0..2 {
            for ap in 0..2 {
                for bp in 0..2 {
                    acc += m[a][b][ap][bp] * u[a][ap] * u[b][bp].conj();
                }
            }
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deposit_inserts_zero_bits() {
        assert_eq!(deposit(0b11, &[1]), 0b101);
        assert_eq!(deposit(0b111, &[0, 2]), 0b11010);
        // enumerates exactly the indices with the chosen bits clear
        let bits = [1, 3];
        let got: Vec<usize> = (0..4).map(|k| deposit(k, &bits)).collect();
        assert_eq!(got, vec![0b0000, 0b0001, 0b0100, 0b0101]);
    }

    fn random_buffer(n: usize, seed: u64) -> Vec<Complex64> {
        let mut x = seed;
        (0..1usize << (2 * n))
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (x >> 11) as f64 / (1u64 << 53) as f64;
                let b = (x.rotate_left(17) >> 11) as f64 / (1u64 << 53) as f64;
                Complex64::new(a - 0.5, b - 0.5)
            })
            .collect()
    }

    fn two_pass_conjugate(rho: &mut [Complex64], n: usize, q: usize, a: &Mat2) {
        apply_1q(rho, q + n, a);
        apply_1q(rho, q, &conj(a));
    }

    #[test]
    fn fused_kernels_match_two_pass_versions() {
        let n = 4;
        let a = mat_mul(&crate::simulator::ry(0.9), &crate::simulator::rz(-1.3));
        for q in 0..n {
            let mut x = random_buffer(n, q as u64);
            let mut y = x.clone();
            conjugate_1q(&mut x, n, q, &a);
            two_pass_conjugate(&mut y, n, q, &a);
            assert!(x.iter().zip(&y).all(|(u, v)| (u - v).norm() < 1e-14));
        }
        for (c, t) in [(0, 1), (1, 0), (0, 3), (3, 2)] {
            for eps in [0.0, 0.01, 1.0] {
                let mut x = random_buffer(n, 7);
                let mut y = x.clone();
                let mut z = x.clone();
                cnot_depolarize(&mut x, n, c, t, eps);
                conjugate_cnot(&mut y, n, c, t);
                pair_depolarize(&mut y, n, c, t, eps);
                pair_depolarize(&mut z, n, c, t, eps);
                conjugate_cnot(&mut z, n, c, t);
                assert!(x.iter().zip(&y).all(|(u, v)| (u - v).norm() < 1e-14));
                assert!(x.iter().zip(&z).all(|(u, v)| (u - v).norm() < 1e-14));
            }
        }
    }

    #[test]
    fn cnot_permutes_basis() {
        // 2 qubits, control bit 0, target bit 1: |01> (index 1) -> index 3
        let mut v = vec![ZERO; 4];
        v[1] = ONE;
        apply_cnot(&mut v, 0, 1);
        assert_eq!(v[3], ONE);
    }
}
