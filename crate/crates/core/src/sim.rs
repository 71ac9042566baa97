//! Single-copy measurement simulation on product states: Bernoulli
//! projective outcomes, without-replacement block plans, and a consumption
//! ledger enforcing the one-copy-per-index constraint.

use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::{expectation, DensityOperator, Projector};
use crate::risk::ProjectorList;
use crate::scalar::{real_of_usize, to_f64, Real};

/// A sequence of single-copy states; `Repeated` backs planted scenarios
/// where every index carries the same state.
#[derive(Debug, Clone)]
pub enum StateList<T: Real> {
    Explicit(Vec<DensityOperator<T>>),
    Repeated { state: DensityOperator<T>, len: usize },
}

impl<T: Real> StateList<T> {
    pub fn explicit(states: Vec<DensityOperator<T>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyInput { what: "state list" });
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
            }
        }
        Ok(Self::Explicit(states))
    }

    pub fn repeated(state: DensityOperator<T>, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput { what: "state list" });
        }
        Ok(Self::Repeated { state, len })
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
            Self::Repeated { state, .. } => state.dim(),
        }
    }

    pub fn get(&self, index: usize) -> &DensityOperator<T> {
        match self {
            Self::Explicit(list) => &list[index],
            Self::Repeated { state, .. } => state,
        }
    }

    fn select(&self, indices: &[usize]) -> Result<Self> {
        match self {
            Self::Repeated { state, .. } => {
                Ok(Self::Repeated { state: state.clone(), len: indices.len() })
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
}

/// Ordered single-copy states with a per-index consumption ledger. A state
/// may be measured at most once; consuming it twice is an error because the
/// underlying copy no longer exists.
#[derive(Debug, Clone)]
pub struct ProductSample<T: Real> {
    states: StateList<T>,
    consumed: Vec<bool>,
}

impl<T: Real> ProductSample<T> {
    pub fn new(states: StateList<T>) -> Self {
        let n = states.len();
        Self { states, consumed: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.dim()
    }

    pub fn state(&self, index: usize) -> Result<&DensityOperator<T>> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange { index, len: self.len() });
        }
        Ok(self.states.get(index))
    }

    pub fn is_consumed(&self, index: usize) -> bool {
        self.consumed.get(index).copied().unwrap_or(false)
    }

    pub fn consumed_count(&self) -> usize {
        self.consumed.iter().filter(|&&c| c).count()
    }

    pub fn remaining(&self) -> usize {
        self.len() - self.consumed_count()
    }

    fn consume(&mut self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange { index, len: self.len() });
        }
        if self.consumed[index] {
            return Err(Error::AlreadyConsumed { index });
        }
        self.consumed[index] = true;
        Ok(())
    }

    /// Hand off the given indices as a fresh sample with its own ledger.
    /// The indices are marked consumed here: the copies now live in the
    /// returned sample and cannot be measured through this one.
    pub fn split_off(&mut self, indices: &[usize]) -> Result<ProductSample<T>> {
        if indices.is_empty() {
            return Err(Error::EmptyInput { what: "index selection" });
        }
        for &i in indices {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange { index: i, len: self.len() });
            }
            if self.consumed[i] {
                return Err(Error::AlreadyConsumed { index: i });
            }
        }
        for &i in indices {
            self.consumed[i] = true;
        }
        Ok(ProductSample::new(self.states.select(indices)?))
    }

    /// The first `count` unconsumed indices, in index order.
    pub fn next_unconsumed(&self, count: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(count);
        for i in 0..self.len() {
            if !self.consumed[i] {
                out.push(i);
                if out.len() == count {
                    return Ok(out);
                }
            }
        }
        Err(Error::InsufficientUnconsumed { needed: count, available: out.len() })
    }
}

/// Disjoint index blocks drawn without replacement from `[n]`.
#[derive(Debug, Clone)]
pub struct BlockPlan {
    pub block_len: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockPlan {
    /// Every index drawn, across all blocks.
    pub fn total_indices(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

/// Projective two-outcome measurement of `pi` on the state at `index`:
/// returns 1 with probability `Tr[rho Pi]`, else 0, and consumes the index.
pub fn measure_projector<T: Real>(
    sample: &mut ProductSample<T>,
    index: usize,
    pi: &Projector<T>,
    rng: &mut impl Rng,
) -> Result<bool> {
    if index >= sample.len() {
        return Err(Error::IndexOutOfRange { index, len: sample.len() });
    }
    if sample.is_consumed(index) {
        return Err(Error::AlreadyConsumed { index });
    }
    let p = expectation(sample.state(index)?, pi)?;
    sample.consume(index)?;
    let p64 = to_f64(p).clamp(0.0, 1.0);
    Ok(rng.random_bool(p64))
}

/// Disjoint uniformly random index blocks: a Fisher-Yates prefix of a
/// permutation of `[n]`, chunked into the requested lengths.
pub fn draw_disjoint_blocks(
    n: usize,
    lengths: &[usize],
    rng: &mut impl Rng,
) -> Result<Vec<Vec<usize>>> {
    let total: usize = lengths.iter().sum();
    if total > n {
        return Err(Error::InsufficientPopulation { needed: total, available: n });
    }
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..total {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut blocks = Vec::with_capacity(lengths.len());
    let mut start = 0;
    for &len in lengths {
        blocks.push(pool[start..start + len].to_vec());
        start += len;
    }
    Ok(blocks)
}

/// `count` disjoint blocks of length `l` drawn without replacement from `[n]`.
pub fn draw_block_plan(
    n: usize,
    l: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<BlockPlan> {
    if l == 0 || count == 0 {
        return Err(Error::EmptyInput { what: "block plan" });
    }
    let lengths = vec![l; count];
    Ok(BlockPlan { block_len: l, blocks: draw_disjoint_blocks(n, &lengths, rng)? })
}

/// Exact block mean `(1/l) sum_j Tr[rho_j Pi_j]` over the given indices.
/// Positional: `pis.get(j)` pairs with `block[j]`. Does not consume states.
pub fn exact_block_mean<T: Real>(
    sample: &ProductSample<T>,
    block: &[usize],
    pis: &ProjectorList<T>,
) -> Result<T> {
    if block.len() != pis.len() {
        return Err(Error::LengthMismatch { left: block.len(), right: pis.len() });
    }
    if block.is_empty() {
        return Err(Error::EmptyInput { what: "block" });
    }
    let mut sum = T::zero();
    for (j, &i) in block.iter().enumerate() {
        sum += expectation(sample.state(i)?, pis.get(j))?;
    }
    Ok(sum / real_of_usize(block.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{DensityOperator, Projector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn fresh_sample(n: usize) -> ProductSample<f64> {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        ProductSample::new(StateList::repeated(rho, n).unwrap())
    }

    #[test]
    fn identity_always_accepts_zero_never() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let id = Projector::<f64>::identity(2).unwrap();
        let zero = Projector::<f64>::zero(2).unwrap();
        let mut sample = fresh_sample(20);
        for i in 0..10 {
            assert!(measure_projector(&mut sample, i, &id, &mut rng).unwrap());
        }
        for i in 10..20 {
            assert!(!measure_projector(&mut sample, i, &zero, &mut rng).unwrap());
        }
    }

    #[test]
    fn double_consumption_is_an_error() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let pi = Projector::<f64>::basis(2, 0).unwrap();
        let mut sample = fresh_sample(3);
        measure_projector(&mut sample, 1, &pi, &mut rng).unwrap();
        assert!(matches!(
            measure_projector(&mut sample, 1, &pi, &mut rng),
            Err(Error::AlreadyConsumed { index: 1 })
        ));
        assert_eq!(sample.consumed_count(), 1);
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let pi = Projector::<f64>::basis(2, 0).unwrap();
        let mut sample = fresh_sample(2);
        assert!(matches!(
            measure_projector(&mut sample, 5, &pi, &mut rng),
            Err(Error::IndexOutOfRange { index: 5, len: 2 })
        ));
    }

    #[test]
    fn block_plan_small_partitions() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let plan = draw_block_plan(4, 2, 2, &mut rng).unwrap();
        let mut all: Vec<usize> = plan.blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);

        let plan = draw_block_plan(10, 3, 2, &mut rng).unwrap();
        let mut seen: Vec<usize> = plan.blocks.iter().flatten().copied().collect();
        let len = seen.len();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(len, 6);
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn block_plan_insufficient_population() {
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        assert!(matches!(
            draw_block_plan(5, 3, 2, &mut rng),
            Err(Error::InsufficientPopulation { needed: 6, available: 5 })
        ));
    }

    #[test]
    fn exact_block_mean_matches_expectations() {
        let zero = DensityOperator::<f64>::basis_state(2, 0).unwrap();
        let p0 = Projector::basis(2, 0).unwrap();
        let p1 = Projector::basis(2, 1).unwrap();
        let sample = ProductSample::new(StateList::repeated(zero, 4).unwrap());

        let aligned = ProjectorList::repeated(p0.clone(), 4).unwrap();
        assert_eq!(exact_block_mean(&sample, &[0, 1, 2, 3], &aligned).unwrap(), 1.0);

        let half = ProjectorList::explicit(vec![p0.clone(), p0, p1.clone(), p1]).unwrap();
        assert!((exact_block_mean(&sample, &[0, 1, 2, 3], &half).unwrap() - 0.5).abs() < 1e-15);

        let wrong_len = ProjectorList::repeated(Projector::basis(2, 0).unwrap(), 3).unwrap();
        assert!(exact_block_mean(&sample, &[0, 1, 2, 3], &wrong_len).is_err());
    }

    #[test]
    fn exact_block_mean_does_not_consume() {
        let sample = fresh_sample(4);
        let pis = ProjectorList::repeated(Projector::basis(2, 0).unwrap(), 4).unwrap();
        exact_block_mean(&sample, &[0, 1, 2, 3], &pis).unwrap();
        assert_eq!(sample.consumed_count(), 0);
    }

    #[test]
    fn split_off_hands_indices_over() {
        let mut sample = fresh_sample(6);
        let sub = sample.split_off(&[1, 3, 5]).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(sample.consumed_count(), 3);
        assert!(matches!(sample.split_off(&[3]), Err(Error::AlreadyConsumed { index: 3 })));
        assert_eq!(sample.next_unconsumed(3).unwrap(), vec![0, 2, 4]);
        assert!(sample.next_unconsumed(4).is_err());
    }
}
