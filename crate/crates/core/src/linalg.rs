//! Eigenvalue helpers for Hermitian operators.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// All eigenvalues of a dense Hermitian matrix given row-major.
pub fn hermitian_eigenvalues(dim: usize, row_major: &[Complex64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(dim, dim, row_major);
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

/// Largest eigenvalue of a Hermitian operator given only its action, by
/// Lanczos with full reorthogonalization. Runs until the Krylov space is
/// exhausted or the Ritz value stops moving.
pub fn lanczos_max(dim: usize, mut apply: impl FnMut(&[Complex64], &mut [Complex64])) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    // Deterministic, generic start vector.
    let mut v: Vec<Complex64> = (0..dim)
        .map(|k| {
            let x = (k as f64 + 1.0) * 0.618_033_988_749_895;
            Complex64::new(1.0 + (x - x.floor()), 0.3 * (x * 7.0).sin())
        })
        .collect();
    normalize(&mut v);

    let max_iter = dim.min(300);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_iter);
    let mut alphas = Vec::with_capacity(max_iter);
    let mut betas: Vec<f64> = Vec::with_capacity(max_iter);
    let mut w = vec![zero; dim];
    let mut last = f64::NEG_INFINITY;

    for it in 0..max_iter {
        apply(&v, &mut w);
        let alpha = dot(&v, &w).re;
        alphas.push(alpha);
        basis.push(v.clone());
        // w -= alpha v + beta v_prev, then reorthogonalize twice against all
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let beta = norm(&w);
        let ritz = tridiagonal_max(&alphas, &betas);
        let converged = (ritz - last).abs() <= 1e-13 * ritz.abs().max(1.0) && it > 4;
        if beta < 1e-12 || converged {
            return ritz;
        }
        last = ritz;
        betas.push(beta);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / beta;
        }
    }
    tridiagonal_max(&alphas, &betas[..alphas.len() - 1])
}

fn tridiagonal_max(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    SymmetricEigen::new(t)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    a.iter_mut().for_each(|x| *x /= n);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanczos_on_diagonal() {
        let diag = [3.0, -1.0, 7.5, 2.0, 7.4];
        let max = lanczos_max(5, |v, out| {
            for i in 0..5 {
                out[i] = v[i] * diag[i];
            }
        });
        assert!((max - 7.5).abs() < 1e-10);
    }

    #[test]
    fn dense_eigenvalues_of_pauli_y() {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let mut ev = hermitian_eigenvalues(2, &[z, -i, i, z]);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }
}
