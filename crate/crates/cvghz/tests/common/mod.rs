//! Shared helpers for the integration suites: generic valid covariance
//! matrices and Gauss-Legendre quadrature for Wigner normalization checks.

use cvghz::{CovarianceMatrix, SymplecticForm, SymplecticMatrix};
use nalgebra::DMatrix;
use rand::Rng;

/// A random valid covariance: a random symplectic conjugation of a thermal
/// spectrum. `exp(ΩH)` with symmetric `H` is symplectic, so the result mixes
/// x and p blocks generically while satisfying the uncertainty relation.
pub fn random_covariance<R: Rng>(rng: &mut R, num_modes: usize) -> CovarianceMatrix {
    let dim = 2 * num_modes;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let v = rng.gen_range(-0.35..0.35);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let omega = SymplecticForm::new(num_modes);
    let s = (omega.matrix() * h).exp();
    let s = SymplecticMatrix::from_matrix(s).expect("exp of a Hamiltonian generator");
    let mut nu = DMatrix::zeros(dim, dim);
    for k in 0..num_modes {
        let n = rng.gen_range(0.5..2.0);
        nu[(2 * k, 2 * k)] = n;
        nu[(2 * k + 1, 2 * k + 1)] = n;
    }
    let v = s.matrix() * nu * s.matrix().transpose();
    CovarianceMatrix::from_matrix((&v + v.transpose()) * 0.5).expect("symmetric by construction")
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via the Golub-Welsch
/// eigenproblem of the Jacobi matrix.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)] * eig.eigenvectors[(0, i)];
            (node, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}
