//! Sequential threshold search over one product state: scan
//! hypothesis/threshold pairs in order and output the first hypothesis whose
//! block mean clears its threshold.
//!
//! Two backends honor the same contract. The oracle backend decides with
//! exact means and is deterministic; the sampled backend spends a fresh
//! sub-block of `ceil(n/m)` unconsumed factors per scan and accepts when the
//! empirical mean reaches `theta - epsilon/2`. Under a planted signal the
//! acceptance probability is far above the 0.03 floor, and a scan of a
//! hypothesis whose true mean lies below `theta - epsilon` falsely accepts
//! with probability at most `2 exp(-n eps^2 / (2m))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::ProjectorList;
use crate::scalar::{real_of_usize, to_f64, Real};
use crate::sim::{exact_block_mean, measure_projector, ProductSample};

/// Which decision rule the search (and the learner built on it) runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Exact means; deterministic, consumes nothing.
    Oracle,
    /// Measured sub-block means; consumes factors.
    Sampled,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "oracle" => Ok(Self::Oracle),
            "sampled" => Ok(Self::Sampled),
            other => Err(format!("unknown backend `{other}` (expected oracle|sampled)")),
        }
    }
}

/// One hypothesis/threshold pair: `n` projectors (one per sample index) and
/// an acceptance threshold in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct ThresholdedHypothesis<T: Real> {
    pub projectors: ProjectorList<T>,
    pub theta: T,
}

impl<T: Real> ThresholdedHypothesis<T> {
    pub fn new(projectors: ProjectorList<T>, theta: T) -> Result<Self> {
        if theta < T::zero() || theta > T::one() || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("{} not in [0, 1]", to_f64(theta)),
            });
        }
        Ok(Self { projectors, theta })
    }
}

/// Search knobs: precision, precondition constants, and whether a violated
/// precondition aborts or merely gets recorded (warn-and-proceed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchParams<T: Real> {
    pub epsilon: T,
    pub c1: T,
    pub c2: T,
    pub enforce_precondition: bool,
}

impl<T: Real> SearchParams<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) || epsilon > T::one() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("{} not in (0, 1]", to_f64(epsilon)),
            });
        }
        Ok(Self {
            epsilon,
            c1: crate::scalar::real(crate::risk::DEFAULT_C1),
            c2: crate::scalar::real(crate::risk::DEFAULT_C2),
            enforce_precondition: true,
        })
    }

    pub fn warn_only(mut self) -> Self {
        self.enforce_precondition = false;
        self
    }
}

/// What one scan saw and decided.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRecord<T: Real> {
    pub hypothesis: usize,
    pub observed_mean: T,
    pub accepted: bool,
}

/// Outcome of a full search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome<T: Real> {
    /// Index of the accepted hypothesis, if any scan accepted.
    pub accepted: Option<usize>,
    /// Per-scan record, in scan order; the scan stops at the first
    /// acceptance, so this may be shorter than the hypothesis list.
    pub scans: Vec<ScanRecord<T>>,
    /// Whether `(ln m + C2)^2 < C1 n eps^2` held.
    pub precondition_ok: bool,
}

/// Scan the hypotheses in order against one product state; halt at the first
/// acceptance. Oracle scans accept iff the exact mean strictly exceeds
/// `theta`; sampled scans measure `ceil(n/m)` fresh factors and accept iff
/// the empirical mean reaches `theta - epsilon/2`.
pub fn threshold_search<T: Real>(
    sample: &mut ProductSample<T>,
    hypotheses: &[ThresholdedHypothesis<T>],
    params: &SearchParams<T>,
    backend: Backend,
    rng: &mut impl Rng,
) -> Result<SearchOutcome<T>> {
    if hypotheses.is_empty() {
        return Err(Error::EmptyHypotheses);
    }
    let n = sample.len();
    for h in hypotheses {
        if h.projectors.len() != n {
            return Err(Error::LengthMismatch { left: h.projectors.len(), right: n });
        }
    }
    let m = hypotheses.len();
    let lhs = (real_of_usize::<T>(m).ln() + params.c2).powi(2);
    let rhs = params.c1 * real_of_usize::<T>(n) * params.epsilon.powi(2);
    let precondition_ok = lhs < rhs;
    if !precondition_ok && params.enforce_precondition {
        return Err(Error::PreconditionViolated { lhs: to_f64(lhs), rhs: to_f64(rhs) });
    }

    let mut scans = Vec::with_capacity(m);
    let mut accepted = None;
    let all_indices: Vec<usize> = (0..n).collect();
    let budget = n.div_ceil(m);

    for (c, h) in hypotheses.iter().enumerate() {
        let (mean, hit) = match backend {
            Backend::Oracle => {
                let mean = exact_block_mean(sample, &all_indices, &h.projectors)?;
                (mean, mean > h.theta)
            }
            Backend::Sampled => {
                let picks = sample.next_unconsumed(budget)?;
                let mut ones = 0usize;
                for &i in &picks {
                    if measure_projector(sample, i, h.projectors.get(i), rng)? {
                        ones += 1;
                    }
                }
                let mean = real_of_usize::<T>(ones) / real_of_usize(picks.len());
                let half = params.epsilon / crate::scalar::real(2.0);
                (mean, mean >= h.theta - half)
            }
        };
        scans.push(ScanRecord { hypothesis: c, observed_mean: mean, accepted: hit });
        if hit {
            accepted = Some(c);
            break;
        }
    }

    Ok(SearchOutcome { accepted, scans, precondition_ok })
}
