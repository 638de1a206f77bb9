//! Dense complex-Hermitian linear algebra: the carrier types for every
//! channel output, eigendecomposition, tensor products and validation.

mod eigen;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

pub use eigen::{symmetric_eigenvalues, Eigen, JACOBI_MAX_DIM};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Builds a matrix from row-major entries, checking the Hermitian
    /// invariant within [`Tolerances::hermitian`].
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        Self::with_tolerances(dim, entries, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(dim: usize, entries: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation(
                "matrix dimension must be positive".into(),
            ));
        }
        if dim > tol.dim_cap {
            return Err(Error::Size {
                required: dim,
                cap: tol.dim_cap,
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        let m = Self::from_raw(dim, entries);
        let asym = m.hermiticity_defect();
        if asym > tol.hermitian {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian (max |a_ij - conj(a_ji)| = {asym:e})"
            )));
        }
        Ok(m.hermitize())
    }

    /// Builds a real symmetric matrix from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Validation("rows must form a square matrix".into()));
            }
            entries.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(dim, entries)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![ZERO; n * n];
        for (i, &x) in diag.iter().enumerate() {
            data[i * n + i] = C64::new(x, 0.0);
        }
        Self::from_raw(n, data)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub(crate) fn zeros(dim: usize) -> Self {
        Self::from_raw(dim, vec![ZERO; dim * dim])
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    /// Symmetrizes away rounding: `(A + A†)/2` with a real diagonal.
    pub(crate) fn hermitize(mut self) -> Self {
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in i + 1..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
        self
    }

    fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[i * n + j] == ZERO))
    }

    /// Largest entrywise modulus of `self − other`; `∞` on shape mismatch.
    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|z| z * w).collect())
    }

    /// `self += w · other`. Panics on dimension mismatch.
    pub(crate) fn add_scaled(&mut self, w: f64, other: &HermitianMatrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add_scaled");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * w;
        }
    }

    /// Plain matrix product; the result is generally not Hermitian.
    pub(crate) fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
        out
    }

    /// `U · self · U†` for a square `U` given row-major.
    pub fn conjugated_by(&self, u: &[C64]) -> Result<Self> {
        let n = self.dim;
        if u.len() != n * n {
            return Err(Error::Validation(
                "conjugating matrix has wrong size".into(),
            ));
        }
        let mut u_dag = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                u_dag[j * n + i] = u[i * n + j].conj();
            }
        }
        let left = Self::matmul(u, &self.data, n);
        Ok(Self::from_raw(n, Self::matmul(&left, &u_dag, n)).hermitize())
    }

    /// `⟨v| self |v⟩`, real for Hermitian matrices.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            let mut row = ZERO;
            for j in 0..n {
                row += self.data[i * n + j] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }

    /// `Tr[self · other]`, real when both are Hermitian.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                // Tr[AB] = Σ a_ij b_ji = Σ a_ij conj(b_ij)
                let a = self.data[i * n + j];
                let b = other.data[i * n + j];
                acc += a.re * b.re + a.im * b.im;
            }
        }
        acc
    }
}

/// Eigenvalues in non-increasing order.
pub fn hermitian_eigenvalues(m: &HermitianMatrix) -> Vec<f64> {
    eigenvalues_with(m, &Tolerances::DEFAULT)
}

pub fn eigenvalues_with(m: &HermitianMatrix, tol: &Tolerances) -> Vec<f64> {
    if m.is_diagonal() {
        let mut d: Vec<f64> = (0..m.dim()).map(|i| m.get(i, i).re).collect();
        d.sort_by(|a, b| b.total_cmp(a));
        return d;
    }
    if m.dim() == 2 {
        let (a, d) = (m.get(0, 0).re, m.get(1, 1).re);
        let mean = 0.5 * (a + d);
        let radius = (0.5 * (a - d)).hypot(m.get(0, 1).norm());
        return vec![mean + radius, mean - radius];
    }
    // Real input takes the Householder/QL route at every size: it is several
    // times faster than complex Jacobi and just as accurate for eigenvalues.
    if m.dim() <= JACOBI_MAX_DIM && !m.is_real() {
        eigen::jacobi(m, tol.jacobi_off_diagonal, false).values
    } else {
        eigen::tridiagonal_eigenvalues(m)
    }
}

/// Full spectral decomposition by cyclic Jacobi.
pub fn eigh(m: &HermitianMatrix) -> Eigen {
    eigen::jacobi(m, Tolerances::DEFAULT.jacobi_off_diagonal, true)
}

/// Kronecker product with the default dimension cap.
pub fn tensor(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    tensor_with(a, b, &Tolerances::DEFAULT)
}

pub fn tensor_with(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &Tolerances,
) -> Result<HermitianMatrix> {
    let required = a.dim.checked_mul(b.dim).ok_or(Error::Size {
        required: usize::MAX,
        cap: tol.dim_cap,
    })?;
    if required > tol.dim_cap {
        return Err(Error::Size {
            required,
            cap: tol.dim_cap,
        });
    }
    Ok(kron(a, b))
}

fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut data = vec![ZERO; n * n];
    for i1 in 0..na {
        for j1 in 0..na {
            let x = a.data[i1 * na + j1];
            if x == ZERO {
                continue;
            }
            for i2 in 0..nb {
                let row = (i1 * nb + i2) * n + j1 * nb;
                for j2 in 0..nb {
                    data[row + j2] = x * b.data[i2 * nb + j2];
                }
            }
        }
    }
    HermitianMatrix::from_raw(n, data)
}

/// Unit vector in `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Validation(
                "pure state must have positive dimension".into(),
            ));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > Tolerances::DEFAULT.normalization {
            return Err(Error::Validation(format!(
                "pure state is not normalized (squared norm {norm2})"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm()
    }
}

/// `|v⟩⟨v|`.
pub fn projector(v: &PureState) -> DensityMatrix {
    let n = v.dim();
    let mut data = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = v.amplitudes[i] * v.amplitudes[j].conj();
        }
    }
    DensityMatrix(HermitianMatrix::from_raw(n, data).hermitize())
}

/// Positive semi-definite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(m: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let tr = m.trace();
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::Validation(format!("density matrix has trace {tr}")));
        }
        let min = eigenvalues_with(&m, tol).last().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::Validation(format!(
                "density matrix is not positive semi-definite (min eigenvalue {min:e})"
            )));
        }
        Ok(Self(m))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Validation(
                "diagonal state has negative entries".into(),
            ));
        }
        Self::new(HermitianMatrix::from_real_diagonal(probabilities))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix::identity(dim).scaled(1.0 / dim as f64))
    }

    /// Convex combination `Σ w_k ρ_k`. The weights must be a probability
    /// vector and the states share one dimension; the result needs no
    /// spectral check since the state space is convex.
    pub fn mixture(weights: &[f64], states: &[&DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Validation(
                "mixture needs one weight per state".into(),
            ));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::Validation(
                "mixture states differ in dimension".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0))
            || (total - 1.0).abs() > Tolerances::DEFAULT.probability
        {
            return Err(Error::Validation(
                "mixture weights are not a probability vector".into(),
            ));
        }
        Ok(Self::mixture_unchecked(weights, states))
    }

    pub(crate) fn mixture_unchecked(weights: &[f64], states: &[&DensityMatrix]) -> Self {
        let mut acc = HermitianMatrix::zeros(states[0].dim());
        for (w, s) in weights.iter().zip(states) {
            if *w != 0.0 {
                acc.add_scaled(*w, &s.0);
            }
        }
        Self(acc)
    }

    pub(crate) fn from_hermitian_unchecked(m: HermitianMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }

    /// Rank one within `tol.purity`.
    pub fn is_pure(&self, tol: &Tolerances) -> bool {
        self.eigenvalues()
            .first()
            .is_some_and(|&top| top >= 1.0 - tol.purity)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self(tensor(&self.0, &other.0)?))
    }
}

/// Root fidelity `Tr √(√ρ σ √ρ)`; equals `|⟨ψ|φ⟩|` on pure states.
///
/// When either state is pure the closed form `√⟨ψ|σ|ψ⟩` is used, which
/// avoids square roots of rounding-level eigenvalues.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Validation(
            "fidelity of states with different dimensions".into(),
        ));
    }
    let tol = Tolerances::DEFAULT;
    let er = eigh(rho.as_hermitian());
    if er.values[0] >= 1.0 - tol.purity {
        return Ok(sigma
            .as_hermitian()
            .expectation(&er.vectors[0])
            .max(0.0)
            .sqrt());
    }
    let es = eigh(sigma.as_hermitian());
    if es.values[0] >= 1.0 - tol.purity {
        return Ok(rho
            .as_hermitian()
            .expectation(&es.vectors[0])
            .max(0.0)
            .sqrt());
    }
    let n = rho.dim();
    let sqrt_rho = er.apply(|x| x.max(0.0).sqrt());
    let inner = HermitianMatrix::matmul(
        &HermitianMatrix::matmul(sqrt_rho.entries(), sigma.as_hermitian().entries(), n),
        sqrt_rho.entries(),
        n,
    );
    let inner = HermitianMatrix::from_raw(n, inner).hermitize();
    Ok(hermitian_eigenvalues(&inner)
        .into_iter()
        .filter(|&x| x > tol.eigenvalue_clip)
        .map(f64::sqrt)
        .sum())
}
