//! Closed-form tail-bound evaluators paired with Monte Carlo experiments
//! that check the empirical deviation frequency never exceeds them.
//!
//! Every deviation event is defined in one place ([`tail_event`]) so the
//! evaluator and the sampler cannot drift apart by a constant. Bounds above
//! 1 are returned uncapped with a `vacuous` flag; callers that verify
//! frequencies must refuse vacuous bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::{term, LossVector, TiltConfig};
use crate::scalar::{real, real_of_usize, to_f64, Real};
use crate::sim::draw_disjoint_blocks;

/// A tail bound with all of its parameters pinned.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundSpec<T: Real> {
    /// `2 exp(-E[X] eps^2 / 3)` for sums of independent `[0, 1]` variables.
    ChernoffUnit { expected_sum: T, epsilon: T },
    /// `2 exp(-n d^2 / (3 (hi - lo)^2))` for independent `[lo, hi]` variables.
    ChernoffBounded { n: usize, delta_dev: T, lo: T, hi: T },
    /// `2 exp(-n eps^2 / 3)`: projective outcomes summed across a product state.
    NaiveExpectation { n: usize, epsilon: T },
    /// `2 exp(-n eps^2 / (3 r^2))` with `r = |e^c - 1|` for exponentiated
    /// outcomes `e^{c Y}`.
    ExponentialExpectation { n: usize, epsilon: T, c: T },
    /// `2 exp(-2 n t^2 / (hi - lo)^2)`: sampling without replacement.
    HoeffdingWor { n: usize, t_dev: T, lo: T, hi: T },
    /// `2 M exp(-2 l t^2 / (hi - lo)^2)`: one index draw shared by M populations.
    HoeffdingMulti { populations: usize, l: usize, t_dev: T, lo: T, hi: T },
    /// `2 K M exp(-2 l t^2 / (4 (hi - lo)^2))`: K disjoint batches per population.
    HoeffdingBatched { batches: usize, populations: usize, l: usize, t_dev: T, lo: T, hi: T },
    /// `8 Gamma exp(-n eps^2 / (32 |e^gamma - 1|^2))`: uniform tilted-risk
    /// deviation over a class with covering number `Gamma`, `gamma in (0, eps)`.
    PacTerm { covering: u64, n: usize, epsilon: T, gamma: T },
    /// Three-term selection error budget of the agnostic pipeline.
    AgnosticBudget {
        gamma: T,
        epsilon: T,
        delta: T,
        t: usize,
        k: usize,
        l: usize,
        c3: T,
        covering_search: u64,
        covering_unif: u64,
        net_size: usize,
        #[serde(default)]
        squared_unif_exponent: bool,
    },
}

/// Evaluated bound; `vacuous` flags values that fail to be below 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundValue<T: Real> {
    pub value: T,
    pub vacuous: bool,
}

fn bound_value<T: Real>(value: T) -> BoundValue<T> {
    BoundValue { value, vacuous: !(value < T::one()) }
}

fn check_unit_interval<T: Real>(name: &'static str, x: T) -> Result<()> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::InvalidParameter { name, reason: format!("{} not in [0, 1]", to_f64(x)) });
    }
    Ok(())
}

fn check_range<T: Real>(lo: T, hi: T) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lo/hi",
            reason: format!("[{}, {}] is not a proper interval", to_f64(lo), to_f64(hi)),
        });
    }
    Ok(())
}

/// Exact closed-form value of the bound, uncapped.
pub fn eval_bound<T: Real>(spec: &BoundSpec<T>) -> Result<BoundValue<T>> {
    let three = real::<T>(3.0);
    let two = real::<T>(2.0);
    match spec {
        BoundSpec::ChernoffUnit { expected_sum, epsilon } => {
            check_unit_interval("epsilon", *epsilon)?;
            if *expected_sum < T::zero() {
                return Err(Error::InvalidParameter {
                    name: "expected_sum",
                    reason: "negative".into(),
                });
            }
            Ok(bound_value(two * (-*expected_sum * epsilon.powi(2) / three).exp()))
        }
        BoundSpec::ChernoffBounded { n, delta_dev, lo, hi } => {
            check_range(*lo, *hi)?;
            if !(*delta_dev > T::zero() && *delta_dev < T::one()) {
                return Err(Error::InvalidParameter {
                    name: "delta_dev",
                    reason: format!("{} not in (0, 1)", to_f64(*delta_dev)),
                });
            }
            let nf = real_of_usize::<T>(*n);
            let width = *hi - *lo;
            Ok(bound_value(two * (-nf * delta_dev.powi(2) / (three * width.powi(2))).exp()))
        }
        BoundSpec::NaiveExpectation { n, epsilon } => {
            check_unit_interval("epsilon", *epsilon)?;
            let nf = real_of_usize::<T>(*n);
            Ok(bound_value(two * (-nf * epsilon.powi(2) / three).exp()))
        }
        BoundSpec::ExponentialExpectation { n, epsilon, c } => {
            check_unit_interval("epsilon", *epsilon)?;
            let r = c.exp_m1().abs();
            if r == T::zero() {
                // c -> 0 limit: the interval collapses, so any positive
                // deviation has probability 0.
                let v = if *epsilon > T::zero() { T::zero() } else { two };
                return Ok(bound_value(v));
            }
            let nf = real_of_usize::<T>(*n);
            Ok(bound_value(two * (-nf * epsilon.powi(2) / (three * r.powi(2))).exp()))
        }
        BoundSpec::HoeffdingWor { n, t_dev, lo, hi } => {
            check_range(*lo, *hi)?;
            if !(*t_dev > T::zero()) {
                return Err(Error::InvalidParameter { name: "t_dev", reason: "not positive".into() });
            }
            let nf = real_of_usize::<T>(*n);
            let width = *hi - *lo;
            Ok(bound_value(two * (-two * nf * t_dev.powi(2) / width.powi(2)).exp()))
        }
        BoundSpec::HoeffdingMulti { populations, l, t_dev, lo, hi } => {
            check_range(*lo, *hi)?;
            if !(*t_dev > T::zero()) {
                return Err(Error::InvalidParameter { name: "t_dev", reason: "not positive".into() });
            }
            let lf = real_of_usize::<T>(*l);
            let mf = real_of_usize::<T>(*populations);
            let width = *hi - *lo;
            Ok(bound_value(two * mf * (-two * lf * t_dev.powi(2) / width.powi(2)).exp()))
        }
        BoundSpec::HoeffdingBatched { batches, populations, l, t_dev, lo, hi } => {
            check_range(*lo, *hi)?;
            if !(*t_dev > T::zero()) {
                return Err(Error::InvalidParameter { name: "t_dev", reason: "not positive".into() });
            }
            let lf = real_of_usize::<T>(*l);
            let kf = real_of_usize::<T>(*batches);
            let mf = real_of_usize::<T>(*populations);
            let width = *hi - *lo;
            let four = real::<T>(4.0);
            Ok(bound_value(
                two * kf * mf * (-two * lf * t_dev.powi(2) / (four * width.powi(2))).exp(),
            ))
        }
        BoundSpec::PacTerm { covering, n, epsilon, gamma } => {
            if *covering == 0 {
                return Err(Error::InvalidParameter { name: "covering", reason: "zero".into() });
            }
            if !(*gamma > T::zero() && *gamma < *epsilon) {
                return Err(Error::InvalidParameter {
                    name: "gamma",
                    reason: format!("{} not in (0, epsilon = {})", to_f64(*gamma), to_f64(*epsilon)),
                });
            }
            let nf = real_of_usize::<T>(*n);
            let r = gamma.exp_m1().abs();
            let eight = real::<T>(8.0);
            let thirty_two = real::<T>(32.0);
            let g = real::<T>(*covering as f64);
            Ok(bound_value(eight * g * (-nf * epsilon.powi(2) / (thirty_two * r.powi(2))).exp()))
        }
        BoundSpec::AgnosticBudget {
            gamma,
            epsilon,
            delta,
            t,
            k,
            l,
            c3,
            covering_search,
            covering_unif,
            net_size,
            squared_unif_exponent,
        } => {
            let mut tilt = TiltConfig::new(*gamma, *epsilon, *delta, *t, *k, *l)?;
            tilt.c3 = *c3;
            let covering = CoveringSpec {
                search_scale: *covering_search,
                unif_scale: *covering_unif,
                net_scale: *covering_search,
            };
            let form = if *squared_unif_exponent {
                UnifExponent::Lemma
            } else {
                UnifExponent::Statement
            };
            Ok(bound_value(agnostic_error_budget(&tilt, &covering, *net_size, form)?))
        }
    }
}

/// Sampler that realizes one bound's hypotheses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailScenario<T: Real> {
    /// n i.i.d. Bernoulli(p) values.
    Bernoulli { p: T, n: usize },
    /// n i.i.d. Uniform[lo, hi] values.
    BoundedUniform { lo: T, hi: T, n: usize },
    /// Independent Bernoulli(p_i), one per index.
    BernoulliPerIndex { probs: Vec<T> },
    /// Exponentiated Bernoulli outcomes `e^{c Y_i}` against `sum e^{c p_i}`.
    ExponentialBernoulli { probs: Vec<T>, c: T },
    /// `draws` values without replacement from a finite population.
    FinitePopulation { values: Vec<T>, draws: usize },
    /// One shared index draw of size `draws` applied to every population.
    MultiPopulation { populations: Vec<Vec<T>>, draws: usize },
    /// `batches` disjoint index blocks of length `block_len`, all populations.
    BatchedPopulation { populations: Vec<Vec<T>>, block_len: usize, batches: usize },
}

/// One Monte Carlo draw of the deviation event matched to a bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailObservation<T: Real> {
    pub deviation: T,
    pub threshold: T,
    pub event: bool,
}

fn mismatch(reason: impl Into<String>) -> Error {
    Error::ScenarioMismatch { reason: reason.into() }
}

/// Check that the scenario realizes exactly the hypotheses of the bound.
pub fn validate_pair<T: Real>(spec: &BoundSpec<T>, scenario: &TailScenario<T>) -> Result<()> {
    let close = |a: T, b: T| (a - b).abs() <= real(1e-9);
    match (spec, scenario) {
        (BoundSpec::ChernoffUnit { expected_sum, .. }, TailScenario::Bernoulli { p, n }) => {
            check_unit_interval("p", *p)?;
            if !close(*expected_sum, *p * real_of_usize(*n)) {
                return Err(mismatch("expected_sum must equal n * p"));
            }
        }
        (
            BoundSpec::ChernoffBounded { n, lo, hi, .. },
            TailScenario::BoundedUniform { lo: slo, hi: shi, n: sn },
        ) => {
            if n != sn || !close(*lo, *slo) || !close(*hi, *shi) {
                return Err(mismatch("interval or count differs between bound and sampler"));
            }
            if *lo < T::zero() {
                return Err(mismatch("bounded variables must be nonnegative"));
            }
        }
        (BoundSpec::NaiveExpectation { n, .. }, TailScenario::BernoulliPerIndex { probs }) => {
            if *n != probs.len() {
                return Err(mismatch("probs length must equal n"));
            }
            for p in probs {
                check_unit_interval("probs", *p)?;
            }
        }
        (
            BoundSpec::ExponentialExpectation { n, c, .. },
            TailScenario::ExponentialBernoulli { probs, c: sc },
        ) => {
            if *n != probs.len() || !close(*c, *sc) {
                return Err(mismatch("probs length or exponent differs"));
            }
            for p in probs {
                check_unit_interval("probs", *p)?;
            }
        }
        (
            BoundSpec::HoeffdingWor { n, lo, hi, .. },
            TailScenario::FinitePopulation { values, draws },
        ) => {
            if n != draws {
                return Err(mismatch("draw count must equal n"));
            }
            if *draws == 0 || *draws > values.len() {
                return Err(mismatch("draws must be in 1..=population size"));
            }
            if values.iter().any(|v| *v < *lo || *v > *hi) {
                return Err(mismatch("population leaves [lo, hi]"));
            }
        }
        (
            BoundSpec::HoeffdingMulti { populations, l, lo, hi, .. },
            TailScenario::MultiPopulation { populations: pops, draws },
        ) => {
            if *populations != pops.len() || l != draws {
                return Err(mismatch("population count or draw size differs"));
            }
            let size = pops.first().map(Vec::len).unwrap_or(0);
            if size == 0 || *draws == 0 || *draws > size {
                return Err(mismatch("draws must be in 1..=population size"));
            }
            for pop in pops {
                if pop.len() != size {
                    return Err(mismatch("populations must share a size"));
                }
                if pop.iter().any(|v| *v < *lo || *v > *hi) {
                    return Err(mismatch("population leaves [lo, hi]"));
                }
            }
        }
        (
            BoundSpec::HoeffdingBatched { batches, populations, l, lo, hi, .. },
            TailScenario::BatchedPopulation { populations: pops, block_len, batches: sb },
        ) => {
            if *populations != pops.len() || l != block_len || batches != sb {
                return Err(mismatch("batch geometry differs"));
            }
            let size = pops.first().map(Vec::len).unwrap_or(0);
            if size == 0 {
                return Err(mismatch("empty population"));
            }
            if size < 3 * *sb * *block_len {
                return Err(mismatch("population must hold at least 3 K l points"));
            }
            for pop in pops {
                if pop.len() != size {
                    return Err(mismatch("populations must share a size"));
                }
                if pop.iter().any(|v| *v < *lo || *v > *hi) {
                    return Err(mismatch("population leaves [lo, hi]"));
                }
            }
        }
        _ => return Err(mismatch("scenario kind does not implement this bound's hypotheses")),
    }
    Ok(())
}

/// Draw the deviation event once. The event definitions mirror the bound
/// statements: sums compared at `n * scale` deviations.
pub fn tail_event<T: Real>(
    spec: &BoundSpec<T>,
    scenario: &TailScenario<T>,
    rng: &mut impl Rng,
) -> Result<TailObservation<T>> {
    let obs = match (spec, scenario) {
        (BoundSpec::ChernoffUnit { expected_sum, epsilon }, TailScenario::Bernoulli { p, n }) => {
            let p64 = to_f64(*p);
            let mut sum = 0usize;
            for _ in 0..*n {
                if rng.random_bool(p64) {
                    sum += 1;
                }
            }
            let dev = (real_of_usize::<T>(sum) - *expected_sum).abs();
            let thr = real_of_usize::<T>(*n) * *epsilon;
            TailObservation { deviation: dev, threshold: thr, event: dev >= thr }
        }
        (
            BoundSpec::ChernoffBounded { n, delta_dev, lo, hi },
            TailScenario::BoundedUniform { .. },
        ) => {
            let (lo64, hi64) = (to_f64(*lo), to_f64(*hi));
            let mut sum = T::zero();
            for _ in 0..*n {
                sum += real(rng.random_range(lo64..=hi64));
            }
            let expected = real_of_usize::<T>(*n) * (*lo + *hi) / real(2.0);
            let dev = (sum - expected).abs();
            let thr = real_of_usize::<T>(*n) * *delta_dev;
            TailObservation { deviation: dev, threshold: thr, event: dev >= thr }
        }
        (BoundSpec::NaiveExpectation { n, epsilon }, TailScenario::BernoulliPerIndex { probs }) => {
            let mut sum = 0usize;
            let mut target = T::zero();
            for p in probs {
                target += *p;
                if rng.random_bool(to_f64(*p)) {
                    sum += 1;
                }
            }
            let dev = (real_of_usize::<T>(sum) - target).abs();
            let thr = real_of_usize::<T>(*n) * *epsilon;
            TailObservation { deviation: dev, threshold: thr, event: dev >= thr }
        }
        (
            BoundSpec::ExponentialExpectation { n, epsilon, c },
            TailScenario::ExponentialBernoulli { probs, .. },
        ) => {
            let mut sum = T::zero();
            let mut target = T::zero();
            let e_c = c.exp();
            for p in probs {
                target += (*c * *p).exp();
                sum += if rng.random_bool(to_f64(*p)) { e_c } else { T::one() };
            }
            let dev = (sum - target).abs();
            let thr = real_of_usize::<T>(*n) * *epsilon;
            TailObservation { deviation: dev, threshold: thr, event: dev >= thr }
        }
        (BoundSpec::HoeffdingWor { t_dev, .. }, TailScenario::FinitePopulation { values, draws }) => {
            let idx = draw_disjoint_blocks(values.len(), &[*draws], rng)?;
            let sum: T = idx[0].iter().map(|&i| values[i]).fold(T::zero(), |a, b| a + b);
            let mu = values.iter().copied().fold(T::zero(), |a, b| a + b)
                / real_of_usize(values.len());
            let dev = (sum - real_of_usize::<T>(*draws) * mu).abs();
            let thr = real_of_usize::<T>(*draws) * *t_dev;
            TailObservation { deviation: dev, threshold: thr, event: dev >= thr }
        }
        (
            BoundSpec::HoeffdingMulti { t_dev, .. },
            TailScenario::MultiPopulation { populations, draws },
        ) => {
            let size = populations[0].len();
            let idx = draw_disjoint_blocks(size, &[*draws], rng)?;
            let lf = real_of_usize::<T>(*draws);
            let mut dev = T::zero();
            for pop in populations {
                let sum: T = idx[0].iter().map(|&i| pop[i]).fold(T::zero(), |a, b| a + b);
                let mu = pop.iter().copied().fold(T::zero(), |a, b| a + b) / real_of_usize(size);
                dev = dev.max((sum - lf * mu).abs());
            }
            let thr = lf * *t_dev;
            TailObservation { deviation: dev, threshold: thr, event: dev >= thr }
        }
        (
            BoundSpec::HoeffdingBatched { t_dev, .. },
            TailScenario::BatchedPopulation { populations, block_len, batches },
        ) => {
            let size = populations[0].len();
            let lengths = vec![*block_len; *batches];
            let blocks = draw_disjoint_blocks(size, &lengths, rng)?;
            let lf = real_of_usize::<T>(*block_len);
            let mut dev = T::zero();
            for pop in populations {
                let mu = pop.iter().copied().fold(T::zero(), |a, b| a + b) / real_of_usize(size);
                for block in &blocks {
                    let sum: T = block.iter().map(|&i| pop[i]).fold(T::zero(), |a, b| a + b);
                    dev = dev.max((sum - lf * mu).abs());
                }
            }
            let thr = lf * *t_dev;
            TailObservation { deviation: dev, threshold: thr, event: dev >= thr }
        }
        _ => return Err(mismatch("scenario kind does not implement this bound's hypotheses")),
    };
    Ok(obs)
}

/// Evaluated bound next to the empirical frequency that is supposed to stay
/// under it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundReport<T: Real> {
    pub theoretical: T,
    pub empirical_frequency: T,
    pub trials: usize,
    pub seed: u64,
    pub vacuous: bool,
}

impl<T: Real> BoundReport<T> {
    /// One-sided domination with Monte Carlo slack:
    /// `empirical <= theoretical + 3 sqrt(theoretical / trials)`.
    pub fn dominated(&self) -> bool {
        let slack = real::<T>(3.0) * (self.theoretical / real_of_usize(self.trials)).sqrt();
        self.empirical_frequency <= self.theoretical + slack
    }
}

/// Empirical frequency of the deviation event over independently seeded
/// trials, paired with the closed-form bound.
pub fn mc_tail<T: Real>(
    spec: &BoundSpec<T>,
    scenario: &TailScenario<T>,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<BoundReport<T>> {
    if trials == 0 {
        return Err(Error::EmptyInput { what: "trials" });
    }
    validate_pair(spec, scenario)?;
    let evaluated = eval_bound(spec)?;
    let seed = rng.next_u64();
    let events: usize = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut trial_rng = ChaCha12Rng::seed_from_u64(seed);
            trial_rng.set_stream(i);
            match tail_event(spec, scenario, &mut trial_rng) {
                Ok(obs) if obs.event => 1,
                _ => 0,
            }
        })
        .sum();
    Ok(BoundReport {
        theoretical: evaluated.value,
        empirical_frequency: real_of_usize::<T>(events) / real_of_usize(trials),
        trials,
        seed,
        vacuous: evaluated.vacuous,
    })
}

/// A loss distribution on `[0, 1]` with a known exact mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSampler<T: Real> {
    Constant { value: T },
    Bernoulli { p: T },
    Uniform { lo: T, hi: T },
}

impl<T: Real> LossSampler<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { value } => check_unit_interval("value", *value),
            Self::Bernoulli { p } => check_unit_interval("p", *p),
            Self::Uniform { lo, hi } => {
                check_unit_interval("lo", *lo)?;
                check_unit_interval("hi", *hi)?;
                if lo > hi {
                    return Err(Error::InvalidParameter {
                        name: "lo/hi",
                        reason: "lo exceeds hi".into(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Exact population mean.
    pub fn mean(&self) -> T {
        match self {
            Self::Constant { value } => *value,
            Self::Bernoulli { p } => *p,
            Self::Uniform { lo, hi } => (*lo + *hi) / real(2.0),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> T {
        match self {
            Self::Constant { value } => *value,
            Self::Bernoulli { p } => {
                if rng.random_bool(to_f64(*p)) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Uniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    real(rng.random_range(to_f64(*lo)..=to_f64(*hi)))
                }
            }
        }
    }
}

/// One draw of the class-wide sup of `|R(h) - tilted empirical risk(h)|`
/// on a fresh size-`n` sample per hypothesis.
pub fn pac_sup_gap<T: Real>(
    class: &[LossSampler<T>],
    n: usize,
    gamma: T,
    rng: &mut impl Rng,
) -> Result<T> {
    if class.is_empty() {
        return Err(Error::EmptyHypotheses);
    }
    if n == 0 {
        return Err(Error::EmptyInput { what: "sample size" });
    }
    let mut sup = T::zero();
    for h in class {
        let losses: Vec<T> = (0..n).map(|_| h.sample(rng)).collect();
        let tilted = term(&LossVector::new(losses)?, gamma);
        sup = sup.max((h.mean() - tilted).abs());
    }
    Ok(sup)
}

/// Frequency of `sup_h |R(h) - tilted risk| >= epsilon` against the
/// finite-class bound with covering number `m`.
pub fn pac_gap_experiment<T: Real>(
    class: &[LossSampler<T>],
    n: usize,
    gamma: T,
    epsilon: T,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<BoundReport<T>> {
    if class.is_empty() {
        return Err(Error::EmptyHypotheses);
    }
    for h in class {
        h.validate()?;
    }
    if trials == 0 {
        return Err(Error::EmptyInput { what: "trials" });
    }
    if !(gamma > T::zero() && gamma < epsilon) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("{} not in (0, epsilon = {})", to_f64(gamma), to_f64(epsilon)),
        });
    }
    let spec = BoundSpec::PacTerm { covering: class.len() as u64, n, epsilon, gamma };
    let evaluated = eval_bound(&spec)?;
    let seed = rng.next_u64();
    let events: usize = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut trial_rng = ChaCha12Rng::seed_from_u64(seed);
            trial_rng.set_stream(i);
            match pac_sup_gap(class, n, gamma, &mut trial_rng) {
                Ok(sup) if sup >= epsilon => 1,
                _ => 0,
            }
        })
        .sum();
    Ok(BoundReport {
        theoretical: evaluated.value,
        empirical_frequency: real_of_usize::<T>(events) / real_of_usize(trials),
        trials,
        seed,
        vacuous: evaluated.vacuous,
    })
}

/// Covering numbers at the three scales the agnostic budget consumes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoveringSpec {
    /// Cover at `(6tkl, eps/2)`: multiplies the selection term.
    pub search_scale: u64,
    /// Cover at `(12tkl, eps/128)`: multiplies the uniform-convergence term.
    pub unif_scale: u64,
    /// Cover at `(l0, eps/2)`: cap on the net size.
    pub net_scale: u64,
}

impl CoveringSpec {
    /// Finite classes are their own covers at every scale.
    pub fn finite_class(m: usize) -> Self {
        Self { search_scale: m as u64, unif_scale: m as u64, net_scale: m as u64 }
    }
}

/// Which uniform-convergence exponent denominator to use; the two appear in
/// print with and without the square on `|e^gamma - 1|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnifExponent {
    /// `512 |e^gamma - 1|`.
    Statement,
    /// `512 |e^gamma - 1|^2`.
    Lemma,
}

/// Three-term error budget of the agnostic pipeline:
/// `delta/2 + C3 t k G_s exp(-l |g| eps^2 / (12 (e^|g| - 1)))
///  + 8 G_u exp(-6tkl eps^2 / (512 D))` with `D` picked by `form`.
pub fn agnostic_error_budget<T: Real>(
    tilt: &TiltConfig<T>,
    covering: &CoveringSpec,
    net_size: usize,
    form: UnifExponent,
) -> Result<T> {
    tilt.validate()?;
    if covering.search_scale == 0 || covering.unif_scale == 0 || covering.net_scale == 0 {
        return Err(Error::InvalidParameter { name: "covering", reason: "zero".into() });
    }
    if net_size == 0 || (net_size as u64) > covering.net_scale {
        return Err(Error::InvalidParameter {
            name: "net_size",
            reason: format!("{net_size} outside 1..=covering cap {}", covering.net_scale),
        });
    }
    let g = tilt.gamma.abs();
    if g == T::zero() {
        return Err(Error::InvalidParameter { name: "gamma", reason: "zero tilt".into() });
    }
    let eps = tilt.epsilon;
    let lf = real_of_usize::<T>(tilt.l);
    let tkf = real_of_usize::<T>(tilt.t * tilt.k);
    let twelve = real::<T>(12.0);
    let term2 = tilt.c3
        * tkf
        * real::<T>(covering.search_scale as f64)
        * (-lf * g * eps.powi(2) / (twelve * g.exp_m1())).exp();
    let r = tilt.gamma.exp_m1().abs();
    let denom = match form {
        UnifExponent::Statement => r,
        UnifExponent::Lemma => r.powi(2),
    };
    let six_tkl = real::<T>(6.0) * tkf * lf;
    let term3 = real::<T>(8.0)
        * real::<T>(covering.unif_scale as f64)
        * (-six_tkl * eps.powi(2) / (real::<T>(512.0) * denom)).exp();
    Ok(tilt.delta / real(2.0) + term2 + term3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn zero_epsilon_is_vacuous() {
        let v = eval_bound(&BoundSpec::ChernoffUnit { expected_sum: 100.0, epsilon: 0.0 }).unwrap();
        assert_eq!(v.value, 2.0);
        assert!(v.vacuous);
    }

    #[test]
    fn pac_term_frozen_value() {
        // 32 exp(-0.25 / (32 (e^0.01 - 1)^2)), exponent 77.346998701182712751
        // from 50-digit arithmetic.
        let v = eval_bound(&BoundSpec::PacTerm::<f64> {
            covering: 4,
            n: 100,
            epsilon: 0.05,
            gamma: 0.01,
        })
        .unwrap();
        assert!((v.value - 8.1992711848230034463e-33).abs() / 8.2e-33 < 1e-12);
        assert!(!v.vacuous);
    }

    #[test]
    fn pac_term_monotonicity() {
        let at = |n: usize, gamma: f64| {
            eval_bound(&BoundSpec::PacTerm { covering: 4, n, epsilon: 0.05, gamma })
                .unwrap()
                .value
        };
        assert!(at(200, 0.01) < at(100, 0.01));
        assert!(at(100, 0.02) > at(100, 0.01));
    }

    #[test]
    fn exponential_expectation_limit_and_monotonicity() {
        let at = |c: f64| {
            eval_bound(&BoundSpec::ExponentialExpectation { n: 100, epsilon: 0.1, c })
                .unwrap()
                .value
        };
        assert_eq!(at(0.0), 0.0);
        assert!(at(0.25) < at(0.5));
        assert!(at(0.5) < at(1.0));
    }

    #[test]
    fn chernoff_bounded_on_unit_interval_matches_unit_form() {
        // With [lo, hi] = [0, 1] and E[X] = n the exponents coincide.
        let n = 137;
        let eps = 0.23;
        let unit = eval_bound(&BoundSpec::ChernoffUnit { expected_sum: n as f64, epsilon: eps })
            .unwrap()
            .value;
        let bounded =
            eval_bound(&BoundSpec::ChernoffBounded { n, delta_dev: eps, lo: 0.0, hi: 1.0 })
                .unwrap()
                .value;
        assert!((unit - bounded).abs() < 1e-15);
    }

    #[test]
    fn domain_violations_error() {
        assert!(eval_bound(&BoundSpec::ChernoffUnit { expected_sum: 10.0, epsilon: 1.5 }).is_err());
        assert!(
            eval_bound(&BoundSpec::ChernoffBounded { n: 10, delta_dev: 0.2, lo: 1.0, hi: 0.5 })
                .is_err()
        );
        assert!(eval_bound(&BoundSpec::PacTerm {
            covering: 4,
            n: 100,
            epsilon: 0.05,
            gamma: 0.2
        })
        .is_err());
    }

    #[test]
    fn mc_tail_rejects_mismatched_scenarios() {
        let spec = BoundSpec::ChernoffUnit { expected_sum: 50.0, epsilon: 0.2 };
        let wrong = TailScenario::FinitePopulation { values: vec![0.0, 1.0], draws: 1 };
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        assert!(matches!(
            mc_tail(&spec, &wrong, 10, &mut rng),
            Err(Error::ScenarioMismatch { .. })
        ));
        let inconsistent = TailScenario::Bernoulli { p: 0.9, n: 100 };
        assert!(mc_tail(&spec, &inconsistent, 10, &mut rng).is_err());
    }

    #[test]
    fn mc_tail_is_seed_deterministic() {
        let spec = BoundSpec::ChernoffUnit { expected_sum: 20.0, epsilon: 0.15 };
        let scenario = TailScenario::Bernoulli { p: 0.2, n: 100 };
        let mut r1 = ChaCha12Rng::seed_from_u64(9);
        let mut r2 = ChaCha12Rng::seed_from_u64(9);
        let a = mc_tail(&spec, &scenario, 500, &mut r1).unwrap();
        let b = mc_tail(&spec, &scenario, 500, &mut r2).unwrap();
        assert_eq!(a.empirical_frequency, b.empirical_frequency);
        assert_eq!(a.seed, b.seed);
    }

    #[test]
    fn pac_gap_constant_class_never_deviates() {
        let class = vec![LossSampler::Constant { value: 0.4f64 }];
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let report = pac_gap_experiment(&class, 50, 0.01, 0.05, 200, &mut rng).unwrap();
        assert_eq!(report.empirical_frequency, 0.0);
        assert!(report.dominated());
    }

    #[test]
    fn pac_gap_guards_gamma_regime() {
        let class = vec![LossSampler::Bernoulli { p: 0.5f64 }];
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        assert!(pac_gap_experiment(&class, 100, 0.2, 0.05, 10, &mut rng).is_err());
    }

    #[test]
    fn budget_tends_to_half_delta() {
        let mut tilt = TiltConfig::new(0.05f64, 0.1, 0.2, 4, 8, 2_000_000).unwrap();
        tilt.c3 = 1.0;
        let covering = CoveringSpec::finite_class(1);
        let b = agnostic_error_budget(&tilt, &covering, 1, UnifExponent::Statement).unwrap();
        assert!((b - 0.1).abs() < 1e-9, "budget {b}");
    }

    #[test]
    fn budget_never_grows_with_block_length() {
        let covering = CoveringSpec::finite_class(6);
        let mut prev = f64::INFINITY;
        for l in [1000, 2000, 4000, 8000, 16000] {
            let tilt = TiltConfig::new(0.05f64, 0.1, 0.2, 4, 8, l).unwrap();
            let b = agnostic_error_budget(&tilt, &covering, 3, UnifExponent::Statement).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn budget_forms_differ_as_printed() {
        let tilt = TiltConfig::new(0.05f64, 0.1, 0.2, 4, 8, 9000).unwrap();
        let covering = CoveringSpec::finite_class(6);
        let s = agnostic_error_budget(&tilt, &covering, 3, UnifExponent::Statement).unwrap();
        let l = agnostic_error_budget(&tilt, &covering, 3, UnifExponent::Lemma).unwrap();
        // |e^g - 1| < 1 makes the squared denominator smaller, the exponent
        // more negative, and the lemma-form budget no larger.
        assert!(l <= s);
    }
}
