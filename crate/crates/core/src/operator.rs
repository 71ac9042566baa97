//! Exact complex-matrix algebra for small qudit systems: validated operator
//! types, spectral calculus, trace forms, and seeded random instances.
//!
//! Operators are dense `d x d` complex matrices with `d <= 64`; everything is
//! computed exactly in the scalar type `T` via Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Dense complex matrix over the scalar `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Largest dimension accepted by any operation; keeps exact simulation honest.
pub const DIM_CAP: usize = 64;

/// Validation tolerances (absolute, max-entry). Double precision with
/// `d <= 64` keeps roundoff far below these.
pub mod tol {
    /// Hermiticity: max entry deviation of `M - M^dagger`.
    pub const HERM: f64 = 1e-9;
    /// Idempotency: max entry deviation of `P^2 - P`.
    pub const IDEM: f64 = 1e-9;
    /// Positive semidefiniteness: eigenvalue floor.
    pub const PSD: f64 = 1e-9;
    /// Unit trace deviation.
    pub const TRACE: f64 = 1e-9;
    /// Slack for clamping trace forms back into [0, 1].
    pub const CLAMP: f64 = 1e-9;
}

fn check_square_finite<T: Real>(m: &CMatrix<T>) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::ZeroDimension);
    }
    if rows > DIM_CAP {
        return Err(Error::DimensionCap { dim: rows, cap: DIM_CAP });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(rows)
}

/// Max-entry deviation of `M` from its adjoint.
pub fn hermitian_deviation<T: Real>(m: &CMatrix<T>) -> T {
    let d = m.nrows();
    let mut dev = T::zero();
    for i in 0..d {
        for j in i..d {
            let gap = m[(i, j)] - m[(j, i)].conj();
            dev = dev.max(gap.norm_sqr().sqrt());
        }
    }
    dev
}

fn check_hermitian<T: Real>(m: &CMatrix<T>) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > real(tol::HERM) {
        return Err(Error::NotHermitian { max_dev: to_f64(dev) });
    }
    Ok(())
}

/// Trace of a complex matrix.
pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    let mut t = Complex::new(T::zero(), T::zero());
    for i in 0..m.nrows() {
        t += m[(i, i)];
    }
    t
}

/// `Tr[A B]` without forming the product.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let d = a.nrows();
    let mut t = Complex::new(T::zero(), T::zero());
    for i in 0..d {
        for j in 0..d {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and a unitary
/// matrix of eigenvectors (columns), so `M = V diag(lambda) V^dagger`.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (DVector<T>, CMatrix<T>) {
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// Quantum sample: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone)]
pub struct DensityOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        check_square_finite(&matrix)?;
        check_hermitian(&matrix)?;
        let tr = trace(&matrix);
        let dev = (tr.re - T::one()).abs().max(tr.im.abs());
        if dev > real(tol::TRACE) {
            return Err(Error::TraceNotUnit { dev: to_f64(dev) });
        }
        let (eigs, _) = hermitian_eigen(&matrix);
        let min_eig = eigs.iter().copied().fold(T::zero(), T::min);
        if min_eig < -real::<T>(tol::PSD) {
            return Err(Error::NotPositiveSemidefinite { min_eig: to_f64(min_eig) });
        }
        Ok(Self { matrix })
    }

    /// Pure state `|psi><psi|`; the amplitude vector is normalized first.
    pub fn pure(amplitudes: &[Complex<T>]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let norm_sq: T = amplitudes.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if norm_sq <= T::zero() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "zero vector cannot be normalized".into(),
            });
        }
        let inv = norm_sq.sqrt().recip();
        let psi: Vec<Complex<T>> = amplitudes.iter().map(|z| z.scale(inv)).collect();
        let d = psi.len();
        let matrix = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Self::new(matrix)
    }

    /// The computational basis state `|k><k|`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, len: dim });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[k] = Complex::new(T::one(), T::zero());
        Self::pure(&amps)
    }

    /// `I / d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let inv = Complex::new(real_of_dim::<T>(dim).recip(), T::zero());
        Self::new(CMatrix::from_diagonal_element(dim, dim, inv))
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn real_of_dim<T: Real>(d: usize) -> T {
    crate::scalar::real_of_usize(d)
}

/// Orthogonal projector: Hermitian and idempotent.
#[derive(Debug, Clone)]
pub struct Projector<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> Projector<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        check_square_finite(&matrix)?;
        check_hermitian(&matrix)?;
        let sq = &matrix * &matrix;
        let mut dev = T::zero();
        for (a, b) in sq.iter().zip(matrix.iter()) {
            dev = dev.max((a - b).norm_sqr().sqrt());
        }
        if dev > real(tol::IDEM) {
            return Err(Error::NotIdempotent { max_dev: to_f64(dev) });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Self::new(CMatrix::identity(dim, dim))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Self::new(CMatrix::zeros(dim, dim))
    }

    /// Rank-1 projector onto a basis vector.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, len: dim });
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = Complex::new(T::one(), T::zero());
        Self::new(m)
    }

    /// Rank-1 projector `|psi><psi|` with `Tr[|0><0| psi psi^dagger] = overlap`,
    /// for planting hypotheses of known quality against the `|0>` state.
    pub fn with_overlap(dim: usize, overlap: T) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "overlap projector needs dimension >= 2".into(),
            });
        }
        if overlap < T::zero() || overlap > T::one() {
            return Err(Error::InvalidParameter {
                name: "overlap",
                reason: format!("{} not in [0, 1]", to_f64(overlap)),
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[0] = Complex::new(overlap.sqrt(), T::zero());
        amps[1] = Complex::new((T::one() - overlap).sqrt(), T::zero());
        let d = amps.len();
        Self::new(CMatrix::from_fn(d, d, |i, j| amps[i] * amps[j].conj()))
    }

    /// The complement `I - P`.
    pub fn complement(&self) -> Self {
        let d = self.dim();
        let m = CMatrix::identity(d, d) - &self.matrix;
        // I - P is Hermitian idempotent whenever P is; skip revalidation.
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace equals the rank for an orthogonal projector.
    pub fn rank(&self) -> usize {
        let t = trace(&self.matrix).re;
        to_f64(t).round() as usize
    }
}

/// Hermitian observable, e.g. a Hamiltonian at a fixed parameter point.
#[derive(Debug, Clone)]
pub struct HermitianOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        check_square_finite(&matrix)?;
        check_hermitian(&matrix)?;
        Ok(Self { matrix })
    }

    /// Diagonal Hermitian matrix from real entries.
    pub fn diagonal(entries: &[T]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let d = entries.len();
        Self::new(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex::new(entries[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        }))
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `Re Tr[rho Pi]`, clamped into [0, 1] when roundoff pushes it within
/// `tol::CLAMP` outside.
pub fn expectation<T: Real>(rho: &DensityOperator<T>, pi: &Projector<T>) -> Result<T> {
    if rho.dim() != pi.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: pi.dim() });
    }
    let t = trace_product(rho.matrix(), pi.matrix());
    if t.im.abs() > real(tol::HERM) {
        return Err(Error::ExpectationOutOfRange { excess: to_f64(t.im.abs()) });
    }
    let v = t.re;
    let clamp: T = real(tol::CLAMP);
    if v < -clamp || v > T::one() + clamp {
        let excess = if v < T::zero() { -v } else { v - T::one() };
        return Err(Error::ExpectationOutOfRange { excess: to_f64(excess) });
    }
    Ok(v.clamp(T::zero(), T::one()))
}

/// `e^{scale H}` for Hermitian `H`, via eigendecomposition:
/// `V diag(exp(scale lambda_i)) V^dagger`. The result is Hermitian PSD.
pub fn matrix_exp_hermitian<T: Real>(h: &HermitianOperator<T>, scale: T) -> CMatrix<T> {
    let (eigs, vecs) = hermitian_eigen(h.matrix());
    let mut scaled = vecs.clone();
    for (c, lambda) in eigs.iter().enumerate() {
        let w = (scale * *lambda).exp();
        for r in 0..scaled.nrows() {
            scaled[(r, c)] = scaled[(r, c)].scale(w);
        }
    }
    &scaled * vecs.adjoint()
}

/// Haar-like random pure state from a normalized complex-Gaussian vector.
///
/// Gaussian draws happen in `f64` so that seeded streams agree across scalar
/// types.
pub fn random_pure_state<T: Real>(dim: usize, rng: &mut impl Rng) -> Result<DensityOperator<T>> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    let amps: Vec<Complex<T>> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(real(re), real(im))
        })
        .collect();
    DensityOperator::pure(&amps)
}

/// Full-rank random mixed state `G G^dagger / Tr[G G^dagger]`.
pub fn random_mixed_state<T: Real>(dim: usize, rng: &mut impl Rng) -> Result<DensityOperator<T>> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    let g = random_gaussian_matrix::<T>(dim, rng);
    let w = &g * g.adjoint();
    let tr = trace(&w).re;
    let inv = Complex::new(tr.recip(), T::zero());
    DensityOperator::new(w.map(|z| z * inv))
}

/// Random Hermitian matrix `(A + A^dagger) / 2` with complex-Gaussian `A`.
pub fn random_hermitian<T: Real>(dim: usize, rng: &mut impl Rng) -> Result<HermitianOperator<T>> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    let a = random_gaussian_matrix::<T>(dim, rng);
    let half = Complex::new(real::<T>(0.5), T::zero());
    let h = (&a + a.adjoint()).map(|z| z * half);
    HermitianOperator::new(h)
}

/// Orthogonal projector of the given rank: QR of a random complex matrix,
/// projector onto the first `rank` columns of Q.
pub fn random_rank_projector<T: Real>(
    dim: usize,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<Projector<T>> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    if rank > dim {
        return Err(Error::RankOutOfRange { rank, dim });
    }
    if rank == 0 {
        return Projector::zero(dim);
    }
    let g = random_gaussian_matrix::<T>(dim, rng);
    let q = g.qr().q();
    let q1 = q.columns(0, rank).into_owned();
    Projector::new(&q1 * q1.adjoint())
}

fn random_gaussian_matrix<T: Real>(dim: usize, rng: &mut impl Rng) -> CMatrix<T> {
    let entries: Vec<Complex<T>> = (0..dim * dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(real(re), real(im))
        })
        .collect();
    CMatrix::from_vec(dim, dim, entries)
}

/// Row-major serialization of a complex matrix as `[re, im]` pairs.
pub fn matrix_to_rows<T: Real>(m: &CMatrix<T>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [to_f64(m[(i, j)].re), to_f64(m[(i, j)].im)]).collect())
        .collect()
}

/// Parse a row-major `[re, im]` nested array back into a matrix.
pub fn matrix_from_rows<T: Real>(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix<T>> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    for row in rows {
        if row.len() != d {
            return Err(Error::NotSquare { rows: d, cols: row.len() });
        }
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        Complex::new(real(rows[i][j][0]), real(rows[i][j][1]))
    }))
}
