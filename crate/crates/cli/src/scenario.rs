//! Scenario files: a JSON description of the operators, hypotheses, tilt
//! targets, and per-subcommand sections an experiment runs from. Complex
//! matrices are nested row-major arrays of `[re, im]` pairs.

use anyhow::{anyhow, bail, Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

use qterm_core::bounds::{BoundSpec, LossSampler, TailScenario};
use qterm_core::operator::{
    matrix_from_rows, random_pure_state, random_rank_projector, DensityOperator,
    HermitianOperator, Projector,
};
use qterm_core::risk::{HypothesisEnsemble, ProjectorList, TiltConfig};
use qterm_core::search::Backend;
use qterm_core::sim::StateList;

pub type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    #[serde(default)]
    pub dim: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub tilt: Option<TiltConfig<f64>>,
    /// Classical losses for the `risk` subcommand.
    #[serde(default)]
    pub losses: Option<Vec<f64>>,
    /// Tilt sweep grid (defaults to the single configured gamma).
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Single-copy state constructor shared by quantum subcommands.
    #[serde(default)]
    pub states: Option<StateCtor>,
    /// Hypothesis class; `theta` is only read by `search`.
    #[serde(default)]
    pub hypotheses: Option<Vec<HypothesisSpec>>,
    /// Extra knobs for the `search` subcommand.
    #[serde(default)]
    pub search: Option<SearchSection>,
    /// Bound under evaluation for `bounds` and `mc`.
    #[serde(default)]
    pub bound: Option<BoundSpec<f64>>,
    /// Sampler matched to `bound` for `mc`.
    #[serde(default)]
    pub sampler: Option<TailScenario<f64>>,
    /// Finite-class gap experiment for `pac`.
    #[serde(default)]
    pub pac: Option<PacSection>,
    /// Hamiltonian model for `qtr`.
    #[serde(default)]
    pub qtr: Option<QtrSection>,
    /// Agnostic-pipeline knobs.
    #[serde(default)]
    pub agnostic: Option<AgnosticSection>,
}

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            bail!("scenario field `sweep.steps`: must be positive");
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|i| self.start + step * i as f64).collect())
    }
}

/// How the product sample's states come to be.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateCtor {
    /// One matrix per index.
    Explicit { matrices: Vec<Rows> },
    /// The same explicit matrix at every index.
    Repeated { matrix: Rows },
    /// `|psi><psi|` at every index.
    RepeatedPure { amplitudes: Vec<[f64; 2]> },
    /// `|index><index|` at every index.
    Basis { index: usize },
    /// `I/d` at every index.
    MaximallyMixed,
    /// A fresh Haar-like pure state per index, drawn from the trial stream.
    RandomPure,
}

impl StateCtor {
    pub fn build(&self, dim: usize, width: usize, rng: &mut impl Rng) -> Result<StateList<f64>> {
        let list = match self {
            Self::Explicit { matrices } => {
                if matrices.len() != width {
                    bail!(
                        "scenario field `states.matrices`: {} matrices for width {width}",
                        matrices.len()
                    );
                }
                let states: Vec<DensityOperator<f64>> = matrices
                    .iter()
                    .map(|rows| DensityOperator::new(matrix_from_rows(rows)?))
                    .collect::<qterm_core::Result<_>>()
                    .context("scenario field `states.matrices`")?;
                StateList::explicit(states)?
            }
            Self::Repeated { matrix } => {
                let state = DensityOperator::new(matrix_from_rows(matrix)?)
                    .context("scenario field `states.matrix`")?;
                check_dim(state.dim(), dim, "states.matrix")?;
                StateList::repeated(state, width)?
            }
            Self::RepeatedPure { amplitudes } => {
                let amps: Vec<num_complex::Complex<f64>> = amplitudes
                    .iter()
                    .map(|[re, im]| num_complex::Complex::new(*re, *im))
                    .collect();
                let state =
                    DensityOperator::pure(&amps).context("scenario field `states.amplitudes`")?;
                check_dim(state.dim(), dim, "states.amplitudes")?;
                StateList::repeated(state, width)?
            }
            Self::Basis { index } => {
                let state = DensityOperator::basis_state(dim, *index)
                    .context("scenario field `states.index`")?;
                StateList::repeated(state, width)?
            }
            Self::MaximallyMixed => StateList::repeated(DensityOperator::maximally_mixed(dim)?, width)?,
            Self::RandomPure => {
                let states: Vec<DensityOperator<f64>> = (0..width)
                    .map(|_| random_pure_state(dim, rng))
                    .collect::<qterm_core::Result<_>>()?;
                StateList::explicit(states)?
            }
        };
        check_dim(list.dim(), dim, "states")?;
        Ok(list)
    }
}

/// How one hypothesis' projector list comes to be.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProjectorCtor {
    Explicit { matrices: Vec<Rows> },
    Repeated { matrix: Rows },
    /// Rank-1 projector with `Tr[|0><0| P] = mu` at every index.
    Overlap { mu: f64 },
    /// `|index><index|` at every index.
    Basis { index: usize },
    /// One random projector of the given rank, repeated.
    RandomRank { rank: usize },
}

impl ProjectorCtor {
    pub fn build(
        &self,
        dim: usize,
        width: usize,
        rng: &mut impl Rng,
    ) -> Result<ProjectorList<f64>> {
        let list = match self {
            Self::Explicit { matrices } => {
                if matrices.len() != width {
                    bail!(
                        "scenario field `hypotheses.projectors.matrices`: {} matrices for width {width}",
                        matrices.len()
                    );
                }
                let pis: Vec<Projector<f64>> = matrices
                    .iter()
                    .map(|rows| Projector::new(matrix_from_rows(rows)?))
                    .collect::<qterm_core::Result<_>>()
                    .context("scenario field `hypotheses.projectors.matrices`")?;
                ProjectorList::explicit(pis)?
            }
            Self::Repeated { matrix } => {
                let pi = Projector::new(matrix_from_rows(matrix)?)
                    .context("scenario field `hypotheses.projectors.matrix`")?;
                ProjectorList::repeated(pi, width)?
            }
            Self::Overlap { mu } => {
                let pi = Projector::with_overlap(dim, *mu)
                    .context("scenario field `hypotheses.projectors.mu`")?;
                ProjectorList::repeated(pi, width)?
            }
            Self::Basis { index } => {
                let pi = Projector::basis(dim, *index)
                    .context("scenario field `hypotheses.projectors.index`")?;
                ProjectorList::repeated(pi, width)?
            }
            Self::RandomRank { rank } => {
                let pi = random_rank_projector(dim, *rank, rng)?;
                ProjectorList::repeated(pi, width)?
            }
        };
        check_dim(list.dim(), dim, "hypotheses.projectors")?;
        Ok(list)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub label: String,
    pub projectors: ProjectorCtor,
    /// Acceptance threshold, read by `search` only.
    #[serde(default)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSection {
    /// Sample width for a standalone search.
    pub n: usize,
    pub epsilon: f64,
    #[serde(default)]
    pub backend: Option<Backend>,
    #[serde(default = "default_true")]
    pub enforce_precondition: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PacSection {
    pub losses: Vec<LossSampler<f64>>,
    pub n: usize,
    pub epsilon: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QtrSection {
    pub hamiltonian: Rows,
    pub state: StateCtor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgnosticSection {
    /// Number of classical samples the net is built from.
    pub classical_len: usize,
    /// Use the squared uniform-convergence exponent form.
    #[serde(default)]
    pub squared_unif_exponent: bool,
}

fn check_dim(found: usize, expected: usize, field: &str) -> Result<()> {
    if expected != 0 && found != expected {
        bail!("scenario field `{field}`: dimension {found} does not match `dim` = {expected}");
    }
    Ok(())
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        // Path-tracking deserialization so the error names the offending field.
        let scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            anyhow!("malformed scenario {}: field `{}`: {}", path.display(), e.path(), e.inner())
        })?;
        if scenario.name.is_empty() {
            bail!("malformed scenario: field `name` must be non-empty");
        }
        Ok(scenario)
    }

    pub fn tilt(&self) -> Result<&TiltConfig<f64>> {
        self.tilt.as_ref().ok_or_else(|| anyhow!("scenario field `tilt`: missing"))
    }

    pub fn hamiltonian(&self) -> Result<HermitianOperator<f64>> {
        let section = self.qtr.as_ref().ok_or_else(|| anyhow!("scenario field `qtr`: missing"))?;
        Ok(HermitianOperator::new(matrix_from_rows(&section.hamiltonian)?)?)
    }

    /// Build the hypothesis ensemble at the given width.
    pub fn ensemble(&self, width: usize, rng: &mut impl Rng) -> Result<HypothesisEnsemble<f64>> {
        let specs = self
            .hypotheses
            .as_ref()
            .ok_or_else(|| anyhow!("scenario field `hypotheses`: missing"))?;
        if specs.is_empty() {
            bail!("scenario field `hypotheses`: must be non-empty");
        }
        let mut lists = Vec::with_capacity(specs.len());
        let mut labels = Vec::with_capacity(specs.len());
        for spec in specs {
            lists.push(spec.projectors.build(self.dim, width, rng)?);
            labels.push(spec.label.clone());
        }
        Ok(HypothesisEnsemble::new(lists, labels)?)
    }
}
