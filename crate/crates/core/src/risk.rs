//! Risk functionals: empirical risk, the exponentially tilted risk and its
//! quantum counterpart over projector-valued hypotheses, and the tilted
//! generalization error.
//!
//! Every tilted aggregate goes through one log-sum-exp kernel (max
//! subtracted before exponentiating), so `|gamma| * max-loss` far beyond the
//! overflow point of `exp` stays finite. `gamma = 0` is an explicit analytic
//! branch returning the plain mean, not a small-`gamma` substitution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{expectation, DensityOperator, Projector};
use crate::scalar::{real, real_of_usize, to_f64, Real};

/// Bounded per-sample losses: every value lies in `[0, bound]`.
#[derive(Debug, Clone)]
pub struct LossVector<T: Real> {
    values: Vec<T>,
    bound: T,
}

impl<T: Real> LossVector<T> {
    /// Losses in `[0, 1]`.
    pub fn new(values: Vec<T>) -> Result<Self> {
        Self::with_bound(values, T::one())
    }

    /// Losses in `[0, bound]`. The bound is carried so that operations which
    /// require unit-bounded losses can assert it.
    pub fn with_bound(values: Vec<T>, bound: T) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput { what: "loss vector" });
        }
        if !(bound > T::zero()) || !bound.is_finite() {
            return Err(Error::InvalidParameter {
                name: "bound",
                reason: format!("{} is not a positive finite real", to_f64(bound)),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < T::zero() || *v > bound {
                return Err(Error::InvalidParameter {
                    name: "losses",
                    reason: format!("value {} at index {i} outside [0, {}]", to_f64(*v), to_f64(bound)),
                });
            }
        }
        Ok(Self { values, bound })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Tilt parameter, accuracy/confidence targets, block geometry, and the
/// calibration constants shared by the search and the learner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TiltConfig<T: Real> {
    /// Tilt `gamma`; 0 recovers the untilted mean.
    pub gamma: T,
    /// Accuracy target in (0, 1].
    pub epsilon: T,
    /// Confidence target in (0, 1).
    pub delta: T,
    /// Number of binary-search stages.
    pub t: usize,
    /// Consecutive-failure budget per stage.
    pub k: usize,
    /// Block length.
    pub l: usize,
    /// Threshold-search precondition constant.
    pub c1: T,
    /// Threshold-search precondition offset.
    pub c2: T,
    /// Error-budget prefactor for the agnostic bound.
    pub c3: T,
}

pub const DEFAULT_C1: f64 = 0.25;
pub const DEFAULT_C2: f64 = 1.0;
pub const DEFAULT_C3: f64 = 1.0;

impl<T: Real> TiltConfig<T> {
    /// Config with explicit block geometry and default constants.
    pub fn new(gamma: T, epsilon: T, delta: T, t: usize, k: usize, l: usize) -> Result<Self> {
        let cfg = Self {
            gamma,
            epsilon,
            delta,
            t,
            k,
            l,
            c1: real(DEFAULT_C1),
            c2: real(DEFAULT_C2),
            c3: real(DEFAULT_C3),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("{} not in (0, 1]", to_f64(self.epsilon)),
            });
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("{} not in (0, 1)", to_f64(self.delta)),
            });
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidParameter { name: "gamma", reason: "not finite".into() });
        }
        if self.t == 0 || self.k == 0 || self.l == 0 {
            return Err(Error::InvalidParameter {
                name: "t/k/l",
                reason: "block geometry must be positive".into(),
            });
        }
        if !(self.c1 > T::zero()) || !(self.c2 > T::zero()) || !(self.c3 > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "c1/c2/c3",
                reason: "constants must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Tilted mean of a slice: `(1/gamma) log((1/N) sum exp(gamma v_i))`,
/// log-sum-exp stabilized; the plain mean for `gamma = 0`. The result is
/// clamped into `[min v, max v]`, which it satisfies analytically.
pub(crate) fn tilted_mean<T: Real>(values: &[T], gamma: T) -> T {
    debug_assert!(!values.is_empty());
    let n = real_of_usize::<T>(values.len());
    let lo = values.iter().copied().fold(values[0], T::min);
    let hi = values.iter().copied().fold(values[0], T::max);
    if gamma == T::zero() {
        let mean = values.iter().copied().fold(T::zero(), |a, b| a + b) / n;
        return mean.clamp(lo, hi);
    }
    let peak = values
        .iter()
        .map(|v| gamma * *v)
        .fold(gamma * values[0], T::max);
    // Sum exp(x - peak) as 1 + exp_m1(x - peak) so that near-zero tilts do
    // not lose the signal to cancellation in `log(sum/n)`.
    let shifted = values
        .iter()
        .map(|v| (gamma * *v - peak).exp_m1())
        .fold(T::zero(), |a, b| a + b);
    let out = (peak + (shifted / n).ln_1p()) / gamma;
    out.clamp(lo, hi)
}

/// Average loss over the training data.
pub fn erm<T: Real>(losses: &LossVector<T>) -> T {
    tilted_mean(losses.values(), T::zero())
}

/// The gamma-tilted risk of a loss vector; `gamma = 0` returns [`erm`].
pub fn term<T: Real>(losses: &LossVector<T>, gamma: T) -> T {
    tilted_mean(losses.values(), gamma)
}

/// Tilted statistic of measurement outcomes in `[0, 1]`:
/// `(1/gamma) log((1/l) sum exp(gamma y_j))`.
pub fn tilted_statistic_from_outcomes<T: Real>(outcomes: &[T], gamma: T) -> Result<T> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput { what: "outcomes" });
    }
    for (i, v) in outcomes.iter().enumerate() {
        if !v.is_finite() || *v < T::zero() || *v > T::one() {
            return Err(Error::InvalidParameter {
                name: "outcomes",
                reason: format!("value {} at index {i} outside [0, 1]", to_f64(*v)),
            });
        }
    }
    Ok(tilted_mean(outcomes, gamma))
}

/// Tilted mean of the exact fidelities `Tr[rho_i Pi_i]`, unclamped beyond its
/// analytic range. This is the quantity the learner estimates.
pub fn qterm_mu<T: Real>(
    rhos: &[DensityOperator<T>],
    pis: &[Projector<T>],
    gamma: T,
) -> Result<T> {
    if rhos.len() != pis.len() {
        return Err(Error::LengthMismatch { left: rhos.len(), right: pis.len() });
    }
    if rhos.is_empty() {
        return Err(Error::EmptyInput { what: "states" });
    }
    let values: Vec<T> = rhos
        .iter()
        .zip(pis.iter())
        .map(|(rho, pi)| expectation(rho, pi))
        .collect::<Result<_>>()?;
    Ok(tilted_mean(&values, gamma))
}

/// [`qterm_mu`] clamped into `[0, 1]`.
pub fn qterm_mu_clamped<T: Real>(
    rhos: &[DensityOperator<T>],
    pis: &[Projector<T>],
    gamma: T,
) -> Result<T> {
    Ok(qterm_mu(rhos, pis, gamma)?.clamp(T::zero(), T::one()))
}

/// Tilted risk of a projector-valued hypothesis: `1 - qterm_mu`.
pub fn qterm_risk<T: Real>(
    rhos: &[DensityOperator<T>],
    pis: &[Projector<T>],
    gamma: T,
) -> Result<T> {
    Ok(T::one() - qterm_mu(rhos, pis, gamma)?)
}

/// Population risk minus the tilted empirical risk.
pub fn tilted_generalization_error<T: Real>(
    population_risk: T,
    losses: &LossVector<T>,
    gamma: T,
) -> Result<T> {
    if population_risk < T::zero() || population_risk > losses.bound() {
        return Err(Error::InvalidParameter {
            name: "population_risk",
            reason: format!(
                "{} outside [0, {}]",
                to_f64(population_risk),
                to_f64(losses.bound())
            ),
        });
    }
    Ok(population_risk - term(losses, gamma))
}

/// A sequence of per-index projectors; the `Repeated` form backs planted
/// scenarios whose index count would make explicit storage wasteful.
#[derive(Debug, Clone)]
pub enum ProjectorList<T: Real> {
    Explicit(Vec<Projector<T>>),
    Repeated { projector: Projector<T>, len: usize },
}

impl<T: Real> ProjectorList<T> {
    pub fn explicit(projectors: Vec<Projector<T>>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::EmptyInput { what: "projector list" });
        }
        let dim = projectors[0].dim();
        for p in &projectors {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
        }
        Ok(Self::Explicit(projectors))
    }

    pub fn repeated(projector: Projector<T>, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput { what: "projector list" });
        }
        Ok(Self::Repeated { projector, len })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Explicit(list) => list.len(),
            Self::Repeated { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Explicit(list) => list[0].dim(),
            Self::Repeated { projector, .. } => projector.dim(),
        }
    }

    pub fn get(&self, index: usize) -> &Projector<T> {
        match self {
            Self::Explicit(list) => &list[index],
            Self::Repeated { projector, .. } => projector,
        }
    }

    /// The projectors at the given indices as a positional list.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyInput { what: "index selection" });
        }
        match self {
            Self::Repeated { projector, .. } => {
                Ok(Self::Repeated { projector: projector.clone(), len: indices.len() })
            }
            Self::Explicit(list) => {
                let selected: Result<Vec<_>> = indices
                    .iter()
                    .map(|&i| {
                        list.get(i)
                            .cloned()
                            .ok_or(Error::IndexOutOfRange { index: i, len: list.len() })
                    })
                    .collect();
                Ok(Self::Explicit(selected?))
            }
        }
    }

    /// Complement list `I - Pi_i`, index by index.
    pub fn complement(&self) -> Self {
        match self {
            Self::Explicit(list) => Self::Explicit(list.iter().map(Projector::complement).collect()),
            Self::Repeated { projector, len } => {
                Self::Repeated { projector: projector.complement(), len: *len }
            }
        }
    }
}

/// A finite class of projector-valued hypotheses over a shared index range.
#[derive(Debug, Clone)]
pub struct HypothesisEnsemble<T: Real> {
    lists: Vec<ProjectorList<T>>,
    labels: Vec<String>,
}

impl<T: Real> HypothesisEnsemble<T> {
    pub fn new(lists: Vec<ProjectorList<T>>, labels: Vec<String>) -> Result<Self> {
        if lists.is_empty() {
            return Err(Error::EmptyHypotheses);
        }
        if labels.len() != lists.len() {
            return Err(Error::LengthMismatch { left: labels.len(), right: lists.len() });
        }
        let width = lists[0].len();
        let dim = lists[0].dim();
        for list in &lists {
            if list.len() != width {
                return Err(Error::LengthMismatch { left: width, right: list.len() });
            }
            if list.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: list.dim() });
            }
        }
        Ok(Self { lists, labels })
    }

    /// Number of hypotheses.
    pub fn m(&self) -> usize {
        self.lists.len()
    }

    /// Shared index count per hypothesis.
    pub fn width(&self) -> usize {
        self.lists[0].len()
    }

    pub fn dim(&self) -> usize {
        self.lists[0].dim()
    }

    pub fn list(&self, c: usize) -> &ProjectorList<T> {
        &self.lists[c]
    }

    pub fn label(&self, c: usize) -> &str {
        &self.labels[c]
    }

    /// Restrict to a subset of hypotheses; indices refer to this ensemble.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyHypotheses);
        }
        let mut lists = Vec::with_capacity(keep.len());
        let mut labels = Vec::with_capacity(keep.len());
        for &c in keep {
            if c >= self.m() {
                return Err(Error::IndexOutOfRange { index: c, len: self.m() });
            }
            lists.push(self.lists[c].clone());
            labels.push(self.labels[c].clone());
        }
        Self::new(lists, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{DensityOperator, Projector};

    fn lv(values: &[f64]) -> LossVector<f64> {
        LossVector::new(values.to_vec()).unwrap()
    }

    // Closed-form constants computed with 50-digit arithmetic.
    const TERM_ZERO_ONE_G1: f64 = 0.62011450695827752463; // ln((1+e)/2)
    const QTERM_ZERO_ONE_G1: f64 = 0.37988549304172247537; // 1 - ln((1+e)/2)

    #[test]
    fn erm_examples() {
        assert_eq!(erm(&lv(&[0.0, 1.0])), 0.5);
        assert!((erm(&lv(&[0.3, 0.3, 0.3])) - 0.3).abs() < 1e-15);
        assert!((erm(&lv(&[0.1, 0.2, 0.7])) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn term_closed_form() {
        assert!((term(&lv(&[0.0, 1.0]), 1.0) - TERM_ZERO_ONE_G1).abs() < 1e-14);
    }

    #[test]
    fn term_constant_losses_for_any_gamma() {
        for gamma in [-30.0, -1.0, 0.0, 0.5, 40.0] {
            assert!((term(&lv(&[0.4, 0.4, 0.4]), gamma) - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn term_large_gamma_tracks_max() {
        // Exact: 0.9 + ln((1 + e^{-140})/2)/200, from 50-digit arithmetic.
        let v = term(&lv(&[0.2, 0.9]), 200.0);
        assert!((v - 0.89653426409720027345).abs() < 1e-13);
        assert!((v - 0.9).abs() < 0.02);
    }

    #[test]
    fn term_survives_overflow_regime() {
        let v = term(&lv(&[0.2, 0.9]), 5000.0);
        assert!(v.is_finite());
        assert!((v - 0.9).abs() < 1e-3);
    }

    #[test]
    fn tilted_statistic_examples() {
        let ones = vec![1.0; 8];
        assert_eq!(tilted_statistic_from_outcomes(&ones, 0.5).unwrap(), 1.0);
        let half = tilted_statistic_from_outcomes(&[0.0f64, 0.0, 1.0, 1.0], 0.0).unwrap();
        assert_eq!(half, 0.5);
        let near = tilted_statistic_from_outcomes(&[0.0f64, 0.0, 1.0, 1.0], 1e-8).unwrap();
        assert!((near - 0.5).abs() < 1e-6);
        let neg = tilted_statistic_from_outcomes(&[0.0, 1.0], -1.0).unwrap();
        assert!((neg - QTERM_ZERO_ONE_G1).abs() < 1e-14);
        assert!(tilted_statistic_from_outcomes::<f64>(&[], 1.0).is_err());
        assert!(tilted_statistic_from_outcomes(&[1.5], 1.0).is_err());
    }

    #[test]
    fn qterm_risk_examples() {
        let zero = DensityOperator::<f64>::basis_state(2, 0).unwrap();
        let p0 = Projector::basis(2, 0).unwrap();
        let p1 = Projector::basis(2, 1).unwrap();
        for gamma in [-2.0, 0.0, 1.0] {
            let aligned = qterm_risk(&[zero.clone(), zero.clone()], &[p0.clone(), p0.clone()], gamma)
                .unwrap();
            assert!(aligned.abs() < 1e-12);
            let orthogonal =
                qterm_risk(&[zero.clone(), zero.clone()], &[p1.clone(), p1.clone()], gamma).unwrap();
            assert!((orthogonal - 1.0).abs() < 1e-12);
        }
        let mixed = qterm_risk(&[zero.clone(), zero.clone()], &[p0.clone(), p1.clone()], 1.0).unwrap();
        assert!((mixed - QTERM_ZERO_ONE_G1).abs() < 1e-13);
        assert!(qterm_risk(&[zero], &[p0, p1], 1.0).is_err());
    }

    #[test]
    fn generalization_error_examples() {
        let l = lv(&[0.5, 0.5]);
        for gamma in [-3.0, 0.0, 2.0] {
            assert!(tilted_generalization_error(0.5, &l, gamma).unwrap().abs() < 1e-12);
        }
        let g = tilted_generalization_error(0.7, &lv(&[0.0, 1.0]), 1.0).unwrap();
        assert!((g - 0.079885493041722475368).abs() < 1e-14);
        assert_eq!(tilted_generalization_error(0.0, &lv(&[0.0, 0.0]), 3.0).unwrap(), 0.0);
        assert!(tilted_generalization_error(1.2, &l, 0.0).is_err());
    }

    #[test]
    fn loss_vector_validation() {
        assert!(LossVector::<f64>::new(vec![]).is_err());
        assert!(LossVector::new(vec![0.5, 1.2]).is_err());
        assert!(LossVector::with_bound(vec![0.5, 1.2], 2.0).is_ok());
        assert!(LossVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn ensemble_validation() {
        let p0 = Projector::<f64>::basis(2, 0).unwrap();
        let p1 = Projector::basis(2, 1).unwrap();
        let a = ProjectorList::repeated(p0, 4).unwrap();
        let b = ProjectorList::repeated(p1.clone(), 4).unwrap();
        let e = HypothesisEnsemble::new(vec![a, b], vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(e.m(), 2);
        assert_eq!(e.width(), 4);
        let short = ProjectorList::repeated(p1, 3).unwrap();
        assert!(HypothesisEnsemble::new(
            vec![e.list(0).clone(), short],
            vec!["a".into(), "b".into()]
        )
        .is_err());
    }

    #[test]
    fn projector_list_select_and_complement() {
        let p0 = Projector::<f64>::basis(2, 0).unwrap();
        let p1 = Projector::basis(2, 1).unwrap();
        let list = ProjectorList::explicit(vec![p0, p1]).unwrap();
        let sel = list.select(&[1, 0, 1]).unwrap();
        assert_eq!(sel.len(), 3);
        assert_eq!(sel.get(0).matrix()[(1, 1)].re, 1.0);
        let comp = list.complement();
        assert_eq!(comp.get(0).matrix()[(1, 1)].re, 1.0);
        assert!(list.select(&[5]).is_err());
    }
}
