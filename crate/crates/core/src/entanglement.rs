//! Schmidt decomposition of the outgoing two-photon SDF.
//!
//! With trapezoid weights `W` the continuous eigenproblem
//! `∫ρ(ω,ν)φ(ν)dν = λφ(ω)` becomes the Hermitian matrix problem
//! `W^{1/2} ρ W^{1/2} u = λu` with `u = W^{1/2}φ`, so the discrete modes
//! come out orthonormal under the same quadrature.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rayon::prelude::*;

use crate::analytic::ScatteredSdf;
use crate::quadrature::FrequencyGrid;
use crate::{Error, Result, C64};

/// Eigenvalues above `−CLAMP_TOL·trace` are clamped to zero.
const CLAMP_TOL: f64 = 1e-10;

/// `K[a,b] = Σ_c conj(Φ[a,c]) Φ[b,c] dω_c` for the total SDF.
pub fn build_kernel(sdf: &ScatteredSdf) -> Array2<C64> {
    kernel_of(&sdf.total, &sdf.grid)
}

pub fn kernel_of(phi: &Array2<C64>, grid: &FrequencyGrid) -> Array2<C64> {
    let n = grid.len();
    let w = grid.weights();
    let mut k = Array2::<C64>::zeros((n, n));
    k.axis_iter_mut(ndarray::Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(a, mut row)| {
            for b in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..n {
                    acc += phi[[a, c]].conj() * phi[[b, c]] * w[c];
                }
                row[b] = acc;
            }
        });
    k
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtResult {
    /// All Schmidt coefficients, descending, summing to 1.
    pub lambdas: Vec<f64>,
    /// Retained mode functions `φ_j(ω_k)` as columns, `Σ_k |φ_jk|² dω_k = 1`.
    pub modes: Array2<C64>,
    /// Von Neumann entropy in bits.
    pub entropy: f64,
    pub grid: FrequencyGrid,
    /// Two-photon norm `Σ|Φ|²dω²` before normalising the coefficients.
    pub trace: f64,
}

/// Solves the weighted kernel eigenproblem and keeps `n_modes` modes.
pub fn schmidt(kernel: &Array2<C64>, grid: &FrequencyGrid, n_modes: usize) -> Result<SchmidtResult> {
    let n = grid.len();
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(Error::Dimension {
            what: "Schmidt kernel",
            expected: n,
            got: kernel.nrows(),
        });
    }
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    // ρ(a,b) = conj(K[a,b])
    let h = DMatrix::from_fn(n, n, |a, b| kernel[[a, b]].conj() * (sw[a] * sw[b]));
    let eig = SymmetricEigen::try_new(h, 1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let trace: f64 = eig.eigenvalues.iter().sum();
    if !(trace > 0.0) {
        return Err(Error::Numerical(format!("kernel trace {trace} is not positive")));
    }
    let mut lambdas = Vec::with_capacity(n);
    for &i in &order {
        let l = eig.eigenvalues[i] / trace;
        if l < -CLAMP_TOL {
            return Err(Error::Numerical(format!(
                "kernel is not positive semidefinite (λ = {l:e})"
            )));
        }
        lambdas.push(l.max(0.0));
    }
    let sum: f64 = lambdas.iter().sum();
    lambdas.iter_mut().for_each(|l| *l /= sum);

    let m = n_modes.min(n);
    let modes = Array2::from_shape_fn((n, m), |(k, j)| eig.eigenvectors[(k, order[j])] / sw[k]);
    Ok(SchmidtResult {
        entropy: entropy(&lambdas),
        lambdas,
        modes,
        grid: grid.clone(),
        trace,
    })
}

/// Schmidt decomposition of a scattered SDF with mode phases fixed so that
/// `Φ ≈ Σ_j sqrt(λ_j) φ_j ⊗ φ_j`.
pub fn schmidt_sdf(sdf: &ScatteredSdf, n_modes: usize) -> Result<SchmidtResult> {
    let mut res = schmidt(&build_kernel(sdf), &sdf.grid, n_modes)?;
    align_phases(&mut res, &sdf.total);
    Ok(res)
}

/// Rotates each mode so that `φ_j^† Φ φ_j^*` is real and positive, which
/// turns the eigenvectors of the reduced state into symmetric Schmidt modes.
pub fn align_phases(res: &mut SchmidtResult, phi: &Array2<C64>) {
    let w = res.grid.weights();
    let n = w.len();
    for mut col in res.modes.columns_mut() {
        let mut c = C64::new(0.0, 0.0);
        for a in 0..n {
            let mut inner = C64::new(0.0, 0.0);
            for b in 0..n {
                inner += phi[[a, b]] * col[b].conj() * w[b];
            }
            c += col[a].conj() * inner * w[a];
        }
        let rot = C64::from_polar(1.0, 0.5 * c.arg());
        col.mapv_inplace(|z| z * rot);
    }
}

/// `Σ_j sqrt(λ_j) φ_j ⊗ φ_j` over the retained modes; compare against
/// `Φ / sqrt(trace)`.
pub fn reconstruct(res: &SchmidtResult) -> Array2<C64> {
    let n = res.modes.nrows();
    let mut out = Array2::<C64>::zeros((n, n));
    for (j, col) in res.modes.columns().into_iter().enumerate() {
        let s = res.lambdas[j].sqrt();
        for a in 0..n {
            for b in 0..n {
                out[[a, b]] += s * col[a] * col[b];
            }
        }
    }
    out
}

/// `−Σ λ log₂ λ`, skipping `λ < 1e-14`.
pub fn entropy(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .filter(|&&l| l >= 1e-14)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}
