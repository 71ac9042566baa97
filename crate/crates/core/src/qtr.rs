//! Tilted risk of a Hamiltonian model: `(1/gamma) log Tr(e^{gamma H} rho)`,
//! its zero-tilt limit `Tr(H rho)`, the underlying partition function, and
//! the Renyi relative entropy it connects to.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operator::{hermitian_eigen, trace_product, CMatrix, DensityOperator, HermitianOperator};
use crate::scalar::{real, to_f64, Real};

/// A Hamiltonian at a fixed parameter point together with the input state.
#[derive(Debug, Clone)]
pub struct TiltedHamiltonianModel<T: Real> {
    hamiltonian: HermitianOperator<T>,
    state: DensityOperator<T>,
}

impl<T: Real> TiltedHamiltonianModel<T> {
    pub fn new(hamiltonian: HermitianOperator<T>, state: DensityOperator<T>) -> Result<Self> {
        if hamiltonian.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: hamiltonian.dim(),
            });
        }
        Ok(Self { hamiltonian, state })
    }

    pub fn hamiltonian(&self) -> &HermitianOperator<T> {
        &self.hamiltonian
    }

    pub fn state(&self) -> &DensityOperator<T> {
        &self.state
    }

    /// Nonnegative spectral weights `<v_i| rho |v_i>` of the state in the
    /// Hamiltonian eigenbasis, paired with the eigenvalues. The weights sum
    /// to 1 up to roundoff.
    fn spectral_weights(&self) -> (Vec<T>, Vec<T>) {
        let (eigs, vecs) = hermitian_eigen(self.hamiltonian.matrix());
        let overlap = vecs.adjoint() * self.state.matrix() * &vecs;
        let weights = (0..eigs.len()).map(|i| overlap[(i, i)].re.max(T::zero())).collect();
        (eigs.iter().copied().collect(), weights)
    }
}

/// Partition function `Z(gamma) = Tr(e^{gamma H} rho)`, evaluated in the
/// Hamiltonian eigenbasis.
pub fn partition_function<T: Real>(model: &TiltedHamiltonianModel<T>, gamma: T) -> T {
    let (eigs, weights) = model.spectral_weights();
    eigs.iter()
        .zip(weights.iter())
        .map(|(lambda, w)| *w * (gamma * *lambda).exp())
        .fold(T::zero(), |a, b| a + b)
}

/// Tilted risk `(1/gamma) log Z(gamma)` for `gamma != 0`; the zero-tilt
/// value is a separate operation ([`qtr_limit`]) because it is an analytic
/// limit, not a formula instance.
///
/// Computed as a log-sum-exp over the spectrum, so large `|gamma|` stays
/// finite; the result always lies between the extreme eigenvalues.
pub fn qtr<T: Real>(model: &TiltedHamiltonianModel<T>, gamma: T) -> Result<T> {
    if gamma == T::zero() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: "zero tilt has its own limit operation".into(),
        });
    }
    let (eigs, weights) = model.spectral_weights();
    let mut peak = T::min_value().unwrap_or_else(|| real(f64::MIN));
    let mut any = false;
    for (lambda, w) in eigs.iter().zip(weights.iter()) {
        if *w > T::zero() {
            peak = peak.max(gamma * *lambda);
            any = true;
        }
    }
    if !any {
        return Err(Error::InvalidParameter {
            name: "state",
            reason: "state has no weight on the spectrum".into(),
        });
    }
    let sum = eigs
        .iter()
        .zip(weights.iter())
        .map(|(lambda, w)| *w * (gamma * *lambda - peak).exp())
        .fold(T::zero(), |a, b| a + b);
    let value = (peak + sum.ln()) / gamma;
    let lo = eigs.iter().copied().fold(eigs[0], T::min);
    let hi = eigs.iter().copied().fold(eigs[0], T::max);
    Ok(value.clamp(lo, hi))
}

/// Zero-tilt limit of the tilted risk: `Tr(H rho)`.
pub fn qtr_limit<T: Real>(model: &TiltedHamiltonianModel<T>) -> T {
    trace_product(model.hamiltonian().matrix(), model.state().matrix()).re
}

fn support_projector_weight<T: Real>(
    rho: &DensityOperator<T>,
    sigma_eigs: &[T],
    sigma_vecs: &CMatrix<T>,
    cutoff: T,
) -> T {
    // Weight of rho outside the support of sigma.
    let overlap = sigma_vecs.adjoint() * rho.matrix() * sigma_vecs;
    let mut leak = T::zero();
    for (i, q) in sigma_eigs.iter().enumerate() {
        if *q <= cutoff {
            leak += overlap[(i, i)].re.max(T::zero());
        }
    }
    leak
}

/// Renyi relative entropy `D_alpha(rho || sigma) =
/// (1/(alpha-1)) log Tr(rho^alpha sigma^{1-alpha})` for `alpha > 0`,
/// `alpha != 1`. Powers are taken on the supports; if `rho` has weight
/// outside the support of `sigma` where the entropy diverges, the call
/// signals [`Error::InfiniteDivergence`].
pub fn renyi_relative_entropy<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    alpha: T,
) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    if !(alpha > T::zero()) || alpha == T::one() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{} not in (0, 1) u (1, inf)", to_f64(alpha)),
        });
    }
    let cutoff: T = real(crate::operator::tol::PSD);
    let (sig_eigs_v, sig_vecs) = hermitian_eigen(sigma.matrix());
    let sig_eigs: Vec<T> = sig_eigs_v.iter().copied().collect();
    if alpha > T::one() {
        let leak = support_projector_weight(rho, &sig_eigs, &sig_vecs, cutoff);
        if leak > cutoff {
            return Err(Error::InfiniteDivergence);
        }
    }
    let rho_alpha = hermitian_power(rho.matrix(), alpha, cutoff);
    let sigma_pow = {
        let one_minus = T::one() - alpha;
        spectral_power(&sig_eigs, &sig_vecs, one_minus, cutoff)
    };
    let overlap = trace_product(&rho_alpha, &sigma_pow).re;
    if !(overlap > T::zero()) {
        return Err(Error::InfiniteDivergence);
    }
    Ok(overlap.ln() / (alpha - T::one()))
}

fn hermitian_power<T: Real>(m: &CMatrix<T>, power: T, cutoff: T) -> CMatrix<T> {
    let (eigs, vecs) = hermitian_eigen(m);
    let eigs: Vec<T> = eigs.iter().copied().collect();
    spectral_power(&eigs, &vecs, power, cutoff)
}

// Pseudo-power on the support: eigenvalues at or below the cutoff map to 0.
fn spectral_power<T: Real>(eigs: &[T], vecs: &CMatrix<T>, power: T, cutoff: T) -> CMatrix<T> {
    let mut scaled = vecs.clone();
    for (c, q) in eigs.iter().enumerate() {
        let w = if *q > cutoff { q.powf(power) } else { T::zero() };
        for r in 0..scaled.nrows() {
            scaled[(r, c)] = scaled[(r, c)].scale(w);
        }
    }
    &scaled * vecs.adjoint()
}

/// Matrix logarithm of a full-rank state, for the tilted-overlap identity.
fn state_log<T: Real>(sigma: &DensityOperator<T>) -> Result<HermitianOperator<T>> {
    let (eigs, vecs) = hermitian_eigen(sigma.matrix());
    let cutoff: T = real(crate::operator::tol::PSD);
    if eigs.iter().any(|q| *q <= cutoff) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: "matrix logarithm needs a full-rank state".into(),
        });
    }
    let mut scaled = vecs.clone();
    for (c, q) in eigs.iter().enumerate() {
        let w = q.ln();
        for r in 0..scaled.nrows() {
            scaled[(r, c)] = scaled[(r, c)].scale(w);
        }
    }
    HermitianOperator::new(hermitize(&(&scaled * vecs.adjoint())))
}

fn hermitize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = Complex::new(real::<T>(0.5), T::zero());
    (m + m.adjoint()).map(|z| z * half)
}

/// Both routes of the overlap identity `Tr(e^{gamma log sigma} rho) =
/// Tr(sigma^gamma rho)`: the partition function of `H = log sigma`, and the
/// direct spectral power. Requires full-rank `sigma`.
pub fn tilted_overlap_check<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    gamma: T,
) -> Result<(T, T)> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let h = state_log(sigma)?;
    let model = TiltedHamiltonianModel::new(h, rho.clone())?;
    let via_log = partition_function(&model, gamma);
    let cutoff: T = real(crate::operator::tol::PSD);
    let sigma_gamma = hermitian_power(sigma.matrix(), gamma, cutoff);
    let direct = trace_product(&sigma_gamma, rho.matrix()).re;
    Ok((via_log, direct))
}
