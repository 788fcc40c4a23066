//! Reduced density matrices and von Neumann entropy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest subsystem [`StateVector::reduced_density`](super::StateVector::reduced_density) builds.
pub const MAX_DENSITY_QUBITS: usize = 12;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
/// Eigenvalues at or below this count as zero in the entropy sum.
const EIGEN_CLIP: f64 = 1e-12;

/// `2^k x 2^k` density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    k: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-10).
    pub fn from_entries(k: usize, entries: Vec<Complex64>) -> Result<Self> {
        if k == 0 || k > MAX_DENSITY_QUBITS {
            return Err(Error::Capacity {
                what: "density matrix qubits",
                value: k,
                max: MAX_DENSITY_QUBITS,
            });
        }
        let dim = 1usize << k;
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for {k} qubits, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let dm = Self { k, entries };
        if !dm.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        let tr = dm.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!("trace is {tr}, not 1")));
        }
        if let Some(&low) = dm
            .eigenvalues()
            .iter()
            .find(|&&l| l < -NEGATIVE_EIGEN_TOL)
        {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {low}"
            )));
        }
        Ok(dm)
    }

    /// Diagonal matrix with the given probabilities.
    pub fn diagonal_of(probs: &[f64]) -> Result<Self> {
        let dim = probs.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{dim} is not a power of two"
            )));
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &p) in probs.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(p, 0.0);
        }
        Self::from_entries(dim.trailing_zeros() as usize, entries)
    }

    pub(super) fn from_entries_unchecked(k: usize, entries: Vec<Complex64>) -> Self {
        Self { k, entries }
    }

    pub fn num_qubits(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `Tr(rho^2)`, computed as the squared Frobenius norm (valid for Hermitian rho).
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|r| (r..d).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = DMatrix::from_row_slice(d, d, &self.entries);
        let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        let s: f64 = self
            .eigenvalues()
            .into_iter()
            .filter(|&l| l > EIGEN_CLIP)
            .map(|l| -l * l.log2())
            .sum();
        // -0.0 from an all-clipped spectrum
        s.max(0.0)
    }
}

pub fn entropy(dm: &DensityMatrix) -> f64 {
    dm.entropy()
}
