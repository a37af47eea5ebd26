//! Truncated Fock-space states and operators: density matrices, displacement
//! operators, displaced thermal states, trace distance.

use crate::error::{Error, Result};
use crate::{C64, CMatrix, CVector};

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Dense complex Hermitian unit-trace matrix. Used both for truncated bosonic
/// states and for n-qubit states.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian to 1e-12, unit trace to 1e-10,
    /// minimum eigenvalue >= -1e-10.
    pub fn new(data: CMatrix) -> Result<Self> {
        let rho = Self { data };
        rho.validate()?;
        Ok(rho)
    }

    /// Constructor for matrices produced by trace-preserving internal
    /// operations; skips the O(d^3) eigenvalue check.
    pub fn from_matrix_unchecked(data: CMatrix) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        Self { data }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.data.nrows();
        if d == 0 || self.data.ncols() != d {
            return Err(Error::Dimension(format!(
                "density matrix must be square and non-empty, got {}x{}",
                d,
                self.data.ncols()
            )));
        }
        let mut herm_err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                herm_err = herm_err.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        if herm_err > HERMITICITY_TOL * self.data.norm().max(1.0) {
            return Err(Error::Numerical(format!(
                "matrix is not Hermitian (deviation {herm_err:.3e})"
            )));
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::Numerical(format!(
                "trace must be 1, got {trace}"
            )));
        }
        let min_eig = self
            .eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::Numerical(format!(
                "matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// Pure state |psi><psi| from a (normalized) state vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::Parameter("cannot form a state from the zero vector".into()));
        }
        let psi = psi / C64::new(norm, 0.0);
        Ok(Self {
            data: &psi * psi.adjoint(),
        })
    }

    /// Computational basis state |k><k| in dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Dimension(format!("basis index {k} out of range for dim {dim}")));
        }
        let mut data = CMatrix::zeros(dim, dim);
        data[(k, k)] = C64::new(1.0, 0.0);
        Ok(Self { data })
    }

    /// Maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            data: CMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.diagonal().sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real eigenvalues of the Hermitian matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.data)
    }

    /// Tensor product self (x) other, with self on the most significant index.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            data: self.data.kronecker(&other.data),
        }
    }

    /// Expectation value Tr(rho A) of a Hermitian observable.
    pub fn expect(&self, observable: &CMatrix) -> f64 {
        debug_assert_eq!(observable.nrows(), self.dim());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.data[(i, j)] * observable[(j, i)];
            }
        }
        acc.re
    }

    /// Bloch vector (x, y, z) of a single-qubit state, basis (|0>, |1>).
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::Dimension(format!(
                "Bloch vector requires a 2x2 state, got dim {}",
                self.dim()
            )));
        }
        let x = 2.0 * self.data[(0, 1)].re;
        let y = -2.0 * self.data[(0, 1)].im;
        let z = self.data[(0, 0)].re - self.data[(1, 1)].re;
        Ok([x, y, z])
    }
}

/// Eigenvalues of a Hermitian matrix (real, ascending-unordered).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Full Hermitian eigendecomposition: (eigenvalues, eigenvector columns).
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Annihilation operator b on a `dim`-level truncated Fock space.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut b = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        b[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    b
}

/// Number operator b^dag b.
pub fn number_operator(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        dim,
        (0..dim).map(|n| C64::new(n as f64, 0.0)),
    ))
}

/// Truncation policy for bosonic states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockTruncation {
    pub dim: usize,
    pub leakage_tol: f64,
}

impl FockTruncation {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            leakage_tol: 1e-8,
        }
    }

    /// Smallest dimension (>= 16) whose displaced-thermal tail mass stays
    /// below `leakage_tol` for the given state parameters.
    pub fn auto(nbar: f64, alpha0: C64, leakage_tol: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return Err(Error::Parameter(format!("nbar must be >= 0, got {nbar}")));
        }
        // Starting guess from the mean photon number plus a generous spread.
        let mean = alpha0.norm_sqr() + nbar;
        let spread = (mean * (2.0 * nbar + 1.0) + nbar * (nbar + 1.0)).sqrt();
        let mut dim = ((mean + 8.0 * spread + 10.0).ceil() as usize).max(16);
        let fits = |dim: usize| -> Result<bool> {
            let rho = build_displaced_thermal(nbar, alpha0, dim)?;
            Ok(tail_mass(&rho, 2) < leakage_tol)
        };
        for _ in 0..32 {
            if fits(dim)? {
                // Shrink back down while the tail stays in tolerance.
                while dim > 16 && fits(dim - 1)? {
                    dim -= 1;
                }
                return Ok(Self { dim, leakage_tol });
            }
            dim = dim * 3 / 2;
        }
        Err(Error::Truncation(format!(
            "no dimension up to {dim} kept displaced-thermal leakage below {leakage_tol:.1e}"
        )))
    }
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self::new(16)
    }
}

/// Population in the top `levels` Fock levels; the truncation-leakage proxy.
pub fn tail_mass(rho: &DensityMatrix, levels: usize) -> f64 {
    let d = rho.dim();
    (d.saturating_sub(levels)..d)
        .map(|n| rho.data()[(n, n)].re)
        .sum()
}

/// Displacement operator D(alpha) = exp(alpha b^dag - alpha* b) on a
/// `dim`-level space, built by exponentiating the truncated generator.
pub fn displacement_operator(alpha: C64, dim: usize) -> Result<CMatrix> {
    if dim < 2 {
        return Err(Error::Dimension(format!(
            "displacement operator needs dim >= 2, got {dim}"
        )));
    }
    if alpha == C64::new(0.0, 0.0) {
        return Ok(CMatrix::identity(dim, dim));
    }
    let b = annihilation(dim);
    // exp(K) with K anti-Hermitian: diagonalize the Hermitian matrix iK.
    let generator = &b.adjoint() * alpha - &b * alpha.conj();
    let h = generator.map(|z| z * C64::i());
    let (eigenvalues, vectors) = hermitian_eigen(&h);
    let phases = CVector::from_iterator(
        dim,
        eigenvalues.iter().map(|&l| (C64::new(0.0, -l)).exp()),
    );
    Ok(&vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint())
}

/// Thermal state with mean occupation `nbar`, diagonal p_n = nbar^n/(nbar+1)^{n+1}.
pub fn thermal_state(nbar: f64, dim: usize) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) {
        return Err(Error::Parameter(format!("nbar must be >= 0, got {nbar}")));
    }
    let mut data = CMatrix::zeros(dim, dim);
    let ratio = nbar / (nbar + 1.0);
    let mut p = 1.0 / (nbar + 1.0);
    let mut total = 0.0;
    for n in 0..dim {
        data[(n, n)] = C64::new(p, 0.0);
        total += p;
        p *= ratio;
    }
    // Renormalize the truncated geometric tail.
    data /= C64::new(total, 0.0);
    Ok(DensityMatrix::from_matrix_unchecked(data))
}

fn build_displaced_thermal(nbar: f64, alpha0: C64, dim: usize) -> Result<DensityMatrix> {
    let rho_th = thermal_state(nbar, dim)?;
    let d_op = displacement_operator(alpha0, dim)?;
    Ok(DensityMatrix::from_matrix_unchecked(
        &d_op * rho_th.data() * d_op.adjoint(),
    ))
}

/// Displaced thermal state D(alpha0) rho_th(nbar) D(alpha0)^dag.
pub fn displaced_thermal(nbar: f64, alpha0: C64, trunc: FockTruncation) -> Result<DensityMatrix> {
    let rho = build_displaced_thermal(nbar, alpha0, trunc.dim)?;
    let leak = tail_mass(&rho, 2);
    if leak > trunc.leakage_tol {
        return Err(Error::Truncation(format!(
            "displaced-thermal leakage {leak:.3e} exceeds tolerance {:.1e}; increase dim beyond {}",
            trunc.leakage_tol, trunc.dim
        )));
    }
    Ok(rho)
}

/// Displaced thermal state with the truncation dimension chosen automatically.
pub fn displaced_thermal_auto(
    nbar: f64,
    alpha0: C64,
    leakage_tol: f64,
) -> Result<(DensityMatrix, FockTruncation)> {
    let trunc = FockTruncation::auto(nbar, alpha0, leakage_tol)?;
    Ok((displaced_thermal(nbar, alpha0, trunc)?, trunc))
}

/// Trace distance (1/2) Tr |rho - sigma|.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "trace distance needs equal dims, got {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.data() - sigma.data();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}
