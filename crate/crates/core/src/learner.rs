//! Hypothesis selection by block binary search over thresholds: paired
//! threshold searches on odd blocks, tilted-statistic checks on even blocks,
//! the sample-size calculator behind the block geometry, and the two-stage
//! agnostic pipeline that first covers the class with an epsilon-net.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::{tilted_statistic_from_outcomes, HypothesisEnsemble, ProjectorList, TiltConfig};
use crate::scalar::{real, to_f64, Real};
use crate::search::{threshold_search, Backend, SearchParams, ThresholdedHypothesis};
use crate::sim::{draw_disjoint_blocks, measure_projector, ProductSample, StateList};
use crate::operator::expectation;

/// Derived block geometry: `t` binary-search stages, `k` failures per stage,
/// block length `l`, and the total budget `n = 6 t k l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub t: usize,
    pub k: usize,
    pub l: usize,
    pub n: usize,
}

/// `((e^|gamma| - 1)/gamma)^2`, the tilt-dependent inflation of the block
/// length; analytically 1 at `gamma = 0`, recovering the untilted geometry.
pub fn gamma_factor<T: Real>(gamma: T) -> T {
    if gamma == T::zero() {
        return T::one();
    }
    let g = gamma.abs();
    (g.exp_m1() / g).powi(2)
}

/// Derive `(t, k, l, n)` from the accuracy, confidence, and tilt targets:
/// `t = ceil(log2(1/eps))`, `k = ceil(log2(1/delta) log2(1/eps))`,
/// `l = ceil(max(gf ln(4tkm/delta), (ln m + C2)^2) / (C1 eps^2))`, `n = 6tkl`.
pub fn sample_plan<T: Real>(tilt: &TiltConfig<T>, m: usize) -> Result<SamplePlan> {
    if m == 0 {
        return Err(Error::EmptyHypotheses);
    }
    let eps = to_f64(tilt.epsilon);
    let delta = to_f64(tilt.delta);
    let gamma = to_f64(tilt.gamma);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter { name: "epsilon", reason: format!("{eps} not in (0, 1)") });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter { name: "delta", reason: format!("{delta} not in (0, 1)") });
    }
    if !(gamma.abs() > 0.0 && gamma.abs() < eps) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("|{gamma}| not in (0, epsilon = {eps})"),
        });
    }
    let t = (1.0 / eps).log2().ceil().max(1.0);
    let k = ((1.0 / delta).log2() * (1.0 / eps).log2()).ceil().max(1.0);
    let gf = to_f64(gamma_factor(tilt.gamma));
    let mf = m as f64;
    let inner = (gf * (4.0 * t * k * mf / delta).ln()).max(((mf).ln() + to_f64(tilt.c2)).powi(2));
    let l = (inner / (to_f64(tilt.c1) * eps * eps)).ceil();
    if !l.is_finite() || l < 1.0 || l > 1e12 {
        return Err(Error::InvalidParameter { name: "l", reason: format!("derived block length {l}") });
    }
    let (t, k, l) = (t as usize, k as usize, l as usize);
    Ok(SamplePlan { t, k, l, n: 6 * t * k * l })
}

/// Product-state budget sufficient for the selection contract at the
/// configured accuracy, confidence, and tilt over `m` hypotheses.
pub fn required_sample_size<T: Real>(tilt: &TiltConfig<T>, m: usize) -> Result<usize> {
    Ok(sample_plan(tilt, m)?.n)
}

/// Learner configuration: tilt targets plus the hypothesis count; the run
/// needs `n_required = 6 t k l` single-copy states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerParams<T: Real> {
    pub tilt: TiltConfig<T>,
    pub m: usize,
    pub n_required: usize,
}

impl<T: Real> LearnerParams<T> {
    pub fn new(tilt: TiltConfig<T>, m: usize) -> Result<Self> {
        tilt.validate()?;
        if m == 0 {
            return Err(Error::EmptyHypotheses);
        }
        let g = tilt.gamma.abs();
        if !(g > T::zero() && g < tilt.epsilon) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!(
                    "|{}| not in (0, epsilon = {})",
                    to_f64(tilt.gamma),
                    to_f64(tilt.epsilon)
                ),
            });
        }
        let n_required = 6 * tilt.t * tilt.k * tilt.l;
        Ok(Self { tilt, m, n_required })
    }

    /// Params with the block geometry derived from the targets.
    pub fn derived(tilt: TiltConfig<T>, m: usize) -> Result<Self> {
        let plan = sample_plan(&tilt, m)?;
        let mut tilt = tilt;
        tilt.t = plan.t;
        tilt.k = plan.k;
        tilt.l = plan.l;
        Self::new(tilt, m)
    }
}

/// One row of the audit transcript: the threshold scanned, what the search
/// and check decided, and the interval after the round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundRecord<T: Real> {
    pub round: usize,
    pub theta: T,
    pub low: T,
    pub high: T,
    pub searched: Option<usize>,
    pub check_statistic: Option<T>,
    pub check_passed: Option<bool>,
    pub failures: usize,
    pub halved_down: bool,
}

/// Selection output: the chosen hypothesis, its estimate, the final
/// threshold, and the per-round transcript.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerResult<T: Real> {
    pub c_star: usize,
    /// Tilted statistic from the last passed check, clamped into [0, 1];
    /// falls back to the final threshold when no check ever passed.
    pub mu_hat: T,
    pub theta_final: T,
    /// Whether `c_star` was drawn uniformly because no check passed.
    pub random_pick: bool,
    pub transcript: Vec<RoundRecord<T>>,
}

/// Run the block binary search and output `(c*, mu_hat)`.
pub fn learn<T: Real>(
    sample: &mut ProductSample<T>,
    ensemble: &HypothesisEnsemble<T>,
    params: &LearnerParams<T>,
    backend: Backend,
    rng: &mut impl Rng,
) -> Result<LearnerResult<T>> {
    run_learn(sample, ensemble, params, backend, rng, params.tilt.gamma)
}

/// Untilted reference run: identical block plan, searches, and measurement
/// stream, but the check statistic is the plain empirical mean. Acts as the
/// zero-tilt baseline that tilted runs are compared against.
pub fn learn_untilted<T: Real>(
    sample: &mut ProductSample<T>,
    ensemble: &HypothesisEnsemble<T>,
    params: &LearnerParams<T>,
    backend: Backend,
    rng: &mut impl Rng,
) -> Result<LearnerResult<T>> {
    run_learn(sample, ensemble, params, backend, rng, T::zero())
}

fn run_learn<T: Real>(
    sample: &mut ProductSample<T>,
    ensemble: &HypothesisEnsemble<T>,
    params: &LearnerParams<T>,
    backend: Backend,
    rng: &mut impl Rng,
    gamma: T,
) -> Result<LearnerResult<T>> {
    if ensemble.m() != params.m {
        return Err(Error::LengthMismatch { left: ensemble.m(), right: params.m });
    }
    if ensemble.width() != sample.len() {
        return Err(Error::LengthMismatch { left: ensemble.width(), right: sample.len() });
    }
    if sample.len() < params.n_required {
        return Err(Error::InsufficientPopulation {
            needed: params.n_required,
            available: sample.len(),
        });
    }
    if ensemble.dim() != sample.dim() {
        return Err(Error::DimensionMismatch { expected: sample.dim(), found: ensemble.dim() });
    }

    let eps = params.tilt.epsilon;
    let k = params.tilt.k;
    let l = params.tilt.l;
    let m = ensemble.m();
    let entries = 2 * m;
    // Sampled searches spend ceil(width/entries) factors per scan; rounding
    // the search block up to a multiple of the entry count lets every scan
    // draw a full sub-block out of the spare budget beyond 2tkl.
    let l_search = match backend {
        Backend::Oracle => l,
        Backend::Sampled => entries * l.div_ceil(entries),
    };
    let pairs = params.tilt.t * params.tilt.k;
    if pairs * (l_search + l) > sample.len() {
        return Err(Error::InsufficientPopulation {
            needed: pairs * (l_search + l),
            available: sample.len(),
        });
    }
    let mut lengths = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        lengths.push(l_search);
        lengths.push(l);
    }
    let blocks = draw_disjoint_blocks(sample.len(), &lengths, rng)?;

    let search_params = SearchParams {
        epsilon: eps / real(4.0),
        c1: params.tilt.c1,
        c2: params.tilt.c2,
        // The paired scans run at precision eps/4 over 2m entries, which the
        // block length derived for the outer targets does not satisfy;
        // record the margin instead of aborting.
        enforce_precondition: false,
    };

    let two = real::<T>(2.0);
    let six = real::<T>(6.0);
    let seven_quarters = real::<T>(1.75);
    let mut low = T::zero();
    let mut high = T::one();
    let mut theta = real::<T>(0.5);
    let mut failures = 0usize;
    let mut pair = 0usize;
    let mut round = 0usize;
    let mut last: Option<(usize, T)> = None;
    let mut transcript = Vec::new();

    while high - low >= six * eps {
        round += 1;
        if failures < k {
            if pair >= pairs {
                return Err(Error::SampleExhausted { pairs_used: pair });
            }
            let search_block = &blocks[2 * pair];
            let check_block = &blocks[2 * pair + 1];
            pair += 1;

            let mut search_sample = sample.split_off(search_block)?;
            let mut hypotheses = Vec::with_capacity(entries);
            for c in 0..m {
                let list = ensemble.list(c).select(search_block)?;
                let direct_theta = (theta + seven_quarters * eps).min(T::one());
                let comp_theta = (T::one() - theta - seven_quarters * eps).clamp(T::zero(), T::one());
                hypotheses.push(ThresholdedHypothesis::new(list.clone(), direct_theta)?);
                hypotheses.push(ThresholdedHypothesis::new(list.complement(), comp_theta)?);
            }
            let outcome =
                threshold_search(&mut search_sample, &hypotheses, &search_params, backend, rng)?;

            match outcome.accepted {
                None => {
                    failures += 1;
                    transcript.push(RoundRecord {
                        round,
                        theta,
                        low,
                        high,
                        searched: None,
                        check_statistic: None,
                        check_passed: None,
                        failures,
                        halved_down: false,
                    });
                }
                Some(entry) => {
                    let c = entry / 2;
                    let list = ensemble.list(c);
                    let mut outcomes = Vec::with_capacity(check_block.len());
                    for &i in check_block {
                        let bit = measure_projector(sample, i, list.get(i), rng)?;
                        outcomes.push(if bit { T::one() } else { T::zero() });
                    }
                    let stat = tilted_statistic_from_outcomes(&outcomes, gamma)?;
                    let theta_scanned = theta;
                    let passed = (stat - theta).abs() > eps;
                    if passed {
                        low = theta - two * eps;
                        theta = (high + low) / two;
                        failures = 0;
                        last = Some((c, stat));
                    } else {
                        failures += 1;
                    }
                    transcript.push(RoundRecord {
                        round,
                        theta: theta_scanned,
                        low,
                        high,
                        searched: Some(c),
                        check_statistic: Some(stat),
                        check_passed: Some(passed),
                        failures,
                        halved_down: false,
                    });
                }
            }
        } else {
            high = theta;
            theta = (high + low) / two;
            failures = 0;
            transcript.push(RoundRecord {
                round,
                theta: high,
                low,
                high,
                searched: None,
                check_statistic: None,
                check_passed: None,
                failures,
                halved_down: true,
            });
        }
    }

    let (c_star, mu_hat, random_pick) = match last {
        Some((c, stat)) => (c, stat.clamp(T::zero(), T::one()), false),
        None => (rng.random_range(0..m), theta.clamp(T::zero(), T::one()), true),
    };
    Ok(LearnerResult { c_star, mu_hat, theta_final: theta, random_pick, transcript })
}

/// Exact tilted mean of `Tr[rho_i Pi_i]` over aligned state/projector
/// sequences; constant sequences collapse to a single trace form.
pub fn exact_tilted_mu<T: Real>(
    states: &StateList<T>,
    list: &ProjectorList<T>,
    gamma: T,
) -> Result<T> {
    if states.len() != list.len() {
        return Err(Error::LengthMismatch { left: states.len(), right: list.len() });
    }
    if let (StateList::Repeated { state, .. }, ProjectorList::Repeated { projector, .. }) =
        (states, list)
    {
        // All summands equal: the tilted mean is the common value.
        return expectation(state, projector);
    }
    let values: Vec<T> = (0..states.len())
        .map(|i| expectation(states.get(i), list.get(i)))
        .collect::<Result<_>>()?;
    tilted_statistic_from_outcomes(&values, gamma)
}

/// Representative subset under the tilted-risk pseudometric
/// `d(g1, g2) = |R(g1) - R(g2)|`; every hypothesis sits within `radius` of
/// its assigned representative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonNet<T: Real> {
    pub representatives: Vec<usize>,
    pub radius: T,
    /// Tilted risk per hypothesis; the pseudometric is the absolute
    /// difference of these values.
    pub risks: Vec<T>,
    /// Representative (original index) covering each hypothesis.
    pub assignment: Vec<usize>,
}

impl<T: Real> EpsilonNet<T> {
    pub fn size(&self) -> usize {
        self.representatives.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> T {
        (self.risks[i] - self.risks[j]).abs()
    }

    /// Exhaustive check that the assignment is a valid cover.
    pub fn is_cover(&self) -> bool {
        self.assignment
            .iter()
            .enumerate()
            .all(|(i, &rep)| self.distance(i, rep) <= self.radius)
    }
}

/// Greedy cover from explicit risk values: scan in index order, make each
/// uncovered hypothesis a representative, and cover everything within
/// `radius` of it.
pub fn epsilon_net_from_risks<T: Real>(risks: &[T], radius: T) -> Result<EpsilonNet<T>> {
    if risks.is_empty() {
        return Err(Error::EmptyHypotheses);
    }
    if !(radius > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("{} is not positive", to_f64(radius)),
        });
    }
    let m = risks.len();
    let mut representatives = Vec::new();
    let mut assignment = vec![usize::MAX; m];
    for i in 0..m {
        if assignment[i] != usize::MAX {
            continue;
        }
        representatives.push(i);
        for j in i..m {
            if assignment[j] == usize::MAX && (risks[j] - risks[i]).abs() <= radius {
                assignment[j] = i;
            }
        }
    }
    Ok(EpsilonNet { representatives, radius, risks: risks.to_vec(), assignment })
}

/// Cover the ensemble using exact tilted risks computed from classical
/// side-information about the states.
pub fn build_epsilon_net<T: Real>(
    ensemble: &HypothesisEnsemble<T>,
    classical: &StateList<T>,
    gamma: T,
    radius: T,
) -> Result<EpsilonNet<T>> {
    if classical.len() > ensemble.width() {
        return Err(Error::LengthMismatch { left: classical.len(), right: ensemble.width() });
    }
    let prefix: Vec<usize> = (0..classical.len()).collect();
    let mut risks = Vec::with_capacity(ensemble.m());
    for c in 0..ensemble.m() {
        let list = ensemble.list(c).select(&prefix)?;
        let mu = exact_tilted_mu(classical, &list, gamma)?;
        risks.push(T::one() - mu);
    }
    epsilon_net_from_risks(&risks, radius)
}

/// Agnostic selection output: the learner result with `c_star` mapped back
/// to the original ensemble, plus the net it ran over.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgnosticOutcome<T: Real> {
    pub result: LearnerResult<T>,
    pub net: EpsilonNet<T>,
}

/// Two-stage agnostic pipeline: build an `epsilon/2`-net from classical
/// data, then run the learner over the net representatives only.
pub fn agnostic_learn<T: Real>(
    sample: &mut ProductSample<T>,
    ensemble: &HypothesisEnsemble<T>,
    classical: &StateList<T>,
    params: &LearnerParams<T>,
    backend: Backend,
    rng: &mut impl Rng,
) -> Result<AgnosticOutcome<T>> {
    let radius = params.tilt.epsilon / real(2.0);
    let net = build_epsilon_net(ensemble, classical, params.tilt.gamma, radius)?;
    let sub = ensemble.restrict(&net.representatives)?;
    let sub_params = LearnerParams::new(params.tilt.clone(), sub.m())?;
    let mut result = learn(sample, &sub, &sub_params, backend, rng)?;
    result.c_star = net.representatives[result.c_star];
    Ok(AgnosticOutcome { result, net })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{DensityOperator, Projector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn tilt(gamma: f64, epsilon: f64, delta: f64) -> TiltConfig<f64> {
        TiltConfig::new(gamma, epsilon, delta, 2, 3, 40).unwrap()
    }

    fn planted(mus: &[f64], width: usize) -> (ProductSample<f64>, HypothesisEnsemble<f64>) {
        let rho = DensityOperator::basis_state(2, 0).unwrap();
        let sample = ProductSample::new(StateList::repeated(rho, width).unwrap());
        let lists: Vec<ProjectorList<f64>> = mus
            .iter()
            .map(|&mu| {
                ProjectorList::repeated(Projector::with_overlap(2, mu).unwrap(), width).unwrap()
            })
            .collect();
        let labels = (0..mus.len()).map(|c| format!("h{c}")).collect();
        (sample, HypothesisEnsemble::new(lists, labels).unwrap())
    }

    #[test]
    fn gamma_factor_limit_is_one() {
        assert_eq!(gamma_factor(0.0f64), 1.0);
        assert!((gamma_factor(1e-9f64) - 1.0).abs() < 1e-8);
        assert!(gamma_factor(0.5f64) > 1.0);
    }

    #[test]
    fn sample_plan_hand_check() {
        // eps = 0.1, delta = 0.05, m = 8, gamma = 0.05, C1 = 1/4, C2 = 1:
        // t = ceil(log2 10) = 4, k = ceil(log2 20 * log2 10) = 15,
        // l = ceil(400 * max(1.05149 * ln 38400, (ln 8 + 1)^2)) = 4440.
        let cfg = TiltConfig::new(0.05, 0.1, 0.05, 1, 1, 1).unwrap();
        let plan = sample_plan(&cfg, 8).unwrap();
        assert_eq!((plan.t, plan.k, plan.l), (4, 15, 4440));
        assert_eq!(plan.n, 6 * plan.t * plan.k * plan.l);
    }

    #[test]
    fn sample_size_monotonicity() {
        let base = TiltConfig::new(0.02, 0.1, 0.1, 1, 1, 1).unwrap();
        let n0 = required_sample_size(&base, 4).unwrap();
        for (eps, delta, m) in [(0.05, 0.1, 4), (0.1, 0.05, 4), (0.1, 0.1, 8), (0.1, 0.1, 64)] {
            let cfg = TiltConfig::new(0.02, eps, delta, 1, 1, 1).unwrap();
            let n = required_sample_size(&cfg, m).unwrap();
            assert!(n >= n0, "tightening (eps={eps}, delta={delta}, m={m}) must not shrink n");
        }
        // Doubling m never decreases n.
        let mut prev = 0;
        for m in [1, 2, 4, 8, 16, 32] {
            let n = required_sample_size(&base, m).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn sample_plan_rejects_bad_parameters() {
        let cfg = TiltConfig::new(0.2, 0.1, 0.1, 1, 1, 1).unwrap();
        assert!(sample_plan(&cfg, 4).is_err(), "|gamma| must stay below epsilon");
        assert!(LearnerParams::new(cfg, 4).is_err());
    }

    #[test]
    fn single_perfect_hypothesis() {
        let cfg = TiltConfig::new(0.05, 0.1, 0.1, 2, 3, 40).unwrap();
        let params = LearnerParams::new(cfg, 1).unwrap();
        let (mut sample, ensemble) = planted(&[1.0], params.n_required);
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let out = learn(&mut sample, &ensemble, &params, Backend::Oracle, &mut rng).unwrap();
        assert_eq!(out.c_star, 0);
        assert!(out.mu_hat >= 0.9, "mu_hat = {}", out.mu_hat);
        assert!(!out.random_pick);
    }

    #[test]
    fn transcript_moves_are_consistent() {
        let cfg = TiltConfig::new(0.02, 0.05, 0.1, 5, 6, 120).unwrap();
        let params = LearnerParams::new(cfg, 3).unwrap();
        let (mut sample, ensemble) = planted(&[0.9, 0.5, 0.3], params.n_required);
        let mut rng = ChaCha12Rng::seed_from_u64(32);
        let out = learn(&mut sample, &ensemble, &params, Backend::Oracle, &mut rng).unwrap();
        let mut updates = 0usize;
        for r in &out.transcript {
            if r.halved_down {
                updates += 1;
                assert!(r.searched.is_none());
            }
            if r.check_passed == Some(true) {
                updates += 1;
            }
        }
        let eps = 0.05f64;
        let cap = (1.0 / (6.0 * eps)).log2().ceil() as usize + 2;
        assert!(updates <= cap, "{updates} interval updates > cap {cap}");
        // low never decreases, high never increases.
        let mut low = 0.0;
        let mut high = 1.0;
        for r in &out.transcript {
            assert!(r.low >= low - 1e-12 && r.high <= high + 1e-12);
            low = r.low;
            high = r.high;
        }
    }

    #[test]
    fn learner_validates_sizes() {
        let cfg = tilt(0.05, 0.1, 0.1);
        let params = LearnerParams::new(cfg, 2).unwrap();
        let (mut small, ensemble) = planted(&[0.9, 0.3], 100);
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        assert!(learn(&mut small, &ensemble, &params, Backend::Oracle, &mut rng).is_err());
    }

    #[test]
    fn net_examples() {
        let net = epsilon_net_from_risks(&[0.4, 0.4, 0.4], 0.1).unwrap();
        assert_eq!(net.size(), 1);
        let net = epsilon_net_from_risks(&[0.1, 0.5, 0.9], 0.1).unwrap();
        assert_eq!(net.size(), 3);
        assert!(net.is_cover());
        assert!(epsilon_net_from_risks::<f64>(&[], 0.1).is_err());
        assert!(epsilon_net_from_risks(&[0.1], 0.0).is_err());
    }

    #[test]
    fn net_size_bounded_on_uniform_risks() {
        // 20 risks spread over [0, 1]: a 0.25-net needs at most 5 reps.
        let risks: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let net = epsilon_net_from_risks(&risks, 0.25).unwrap();
        assert!(net.size() <= 5, "net size {}", net.size());
        assert!(net.is_cover());
        for (i, &rep) in net.assignment.iter().enumerate() {
            assert!((risks[i] - risks[rep]).abs() <= 0.25);
        }
    }

    #[test]
    fn agnostic_reduces_to_single_candidate() {
        // Clones within eps/2 of each other collapse to one representative.
        let cfg = TiltConfig::new(0.05, 0.1, 0.1, 2, 3, 60).unwrap();
        let params = LearnerParams::new(cfg, 3).unwrap();
        let (mut sample, ensemble) = planted(&[0.82, 0.8, 0.79], params.n_required);
        let classical = StateList::repeated(DensityOperator::basis_state(2, 0).unwrap(), 32).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(34);
        let out =
            agnostic_learn(&mut sample, &ensemble, &classical, &params, Backend::Oracle, &mut rng)
                .unwrap();
        assert_eq!(out.net.size(), 1);
        assert_eq!(out.result.c_star, 0);
        assert!((out.result.mu_hat - 0.82).abs() <= 0.2);
    }

    #[test]
    fn exact_mu_fast_path_matches_general() {
        let rho = DensityOperator::<f64>::basis_state(2, 0).unwrap();
        let pi = Projector::with_overlap(2, 0.7).unwrap();
        let fast = exact_tilted_mu(
            &StateList::repeated(rho.clone(), 5).unwrap(),
            &ProjectorList::repeated(pi.clone(), 5).unwrap(),
            0.3,
        )
        .unwrap();
        let general = exact_tilted_mu(
            &StateList::explicit(vec![rho.clone(), rho.clone(), rho.clone(), rho.clone(), rho])
                .unwrap(),
            &ProjectorList::explicit(vec![pi.clone(), pi.clone(), pi.clone(), pi.clone(), pi])
                .unwrap(),
            0.3,
        )
        .unwrap();
        assert!((fast - general).abs() < 1e-12);
        assert!((fast - 0.7).abs() < 1e-12);
    }
}
