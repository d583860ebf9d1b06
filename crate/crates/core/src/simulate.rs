//! Equilibrium action draws and the Monte Carlo replication harness.
//!
//! Observed actions are independent across players given the public
//! information, so drawing `Y_i` from the categorical distribution `σ*_i` is
//! the same as drawing extreme-value shocks and applying the equilibrium
//! decision rule.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{amle, AlphaBox, Dataset, OptimizerSettings};
use crate::game::{solve_equilibrium, ChoiceProfile, Covariates, GameState, PayoffParams, SolveOptions};
use crate::network::{generate_circle, generate_random, DirectedNetwork};
use crate::rng::{derive_seed, rng_from_seed};

/// Stream purposes passed to [`crate::rng::derive_seed`] for each replication.
pub const PURPOSE_NETWORK: u64 = 0;
pub const PURPOSE_COVARIATES: u64 = 1;
pub const PURPOSE_ACTIONS: u64 = 2;

/// One realised action per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimDraw {
    pub actions: Vec<usize>,
    pub seed: u64,
}

/// Draws every player's action from its row of `profile`, using a fresh
/// stream seeded by `seed`.
pub fn draw_actions(profile: &ChoiceProfile, seed: u64) -> SimDraw {
    SimDraw {
        actions: draw_actions_with(profile, &mut rng_from_seed(seed)),
        seed,
    }
}

/// [`draw_actions`] consuming one uniform draw per player from `rng`.
pub fn draw_actions_with<R: Rng + ?Sized>(profile: &ChoiceProfile, rng: &mut R) -> Vec<usize> {
    (0..profile.n())
        .map(|i| {
            let row = profile.row(i);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (k, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    return k;
                }
            }
            // rows sum to one up to rounding; land on the last action with mass
            row.iter().rposition(|&p| p > 0.0).unwrap_or(0)
        })
        .collect()
}

/// Distribution of one covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase", deny_unknown_fields)]
pub enum CovariateDist {
    Uniform {
        low: f64,
        high: f64,
    },
    /// `var` is the variance.
    Normal {
        mean: f64,
        var: f64,
    },
    Bernoulli {
        p: f64,
    },
    Constant {
        value: f64,
    },
}

enum Sampler {
    Uniform(Uniform<f64>),
    Normal(Normal<f64>),
    Bernoulli(Bernoulli),
    Constant(f64),
}

impl CovariateDist {
    fn sampler(&self) -> Result<Sampler> {
        let bad = |msg: String| Error::InvalidParams(msg);
        Ok(match *self {
            Self::Uniform { low, high } => {
                Sampler::Uniform(Uniform::new(low, high).map_err(|e| bad(format!("uniform({low}, {high}): {e}")))?)
            }
            Self::Normal { mean, var } => {
                if var.is_nan() || var < 0.0 {
                    return Err(bad(format!("normal variance must be non-negative, got {var}")));
                }
                Sampler::Normal(Normal::new(mean, var.sqrt()).map_err(|e| bad(format!("normal({mean}, {var}): {e}")))?)
            }
            Self::Bernoulli { p } => {
                Sampler::Bernoulli(Bernoulli::new(p).map_err(|e| bad(format!("bernoulli({p}): {e}")))?)
            }
            Self::Constant { value } => Sampler::Constant(value),
        })
    }
}

impl Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Uniform(d) => d.sample(rng),
            Self::Normal(d) => d.sample(rng),
            Self::Bernoulli(d) => {
                if d.sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Constant(v) => *v,
        }
    }
}

/// `n` players' covariates, independent across players and columns. Draws
/// go player by player, columns in order.
pub fn draw_covariates<R: Rng + ?Sized>(n: usize, columns: &[CovariateDist], rng: &mut R) -> Result<Covariates> {
    let samplers: Vec<Sampler> = columns.iter().map(CovariateDist::sampler).collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(n * columns.len());
    for _ in 0..n {
        for s in &samplers {
            data.push(s.sample(rng));
        }
    }
    Covariates::new(n, columns.len(), data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Circle,
    Random,
}

impl NetworkKind {
    pub fn build(self, n: usize, seed: u64) -> Result<DirectedNetwork> {
        match self {
            Self::Circle => generate_circle(n),
            Self::Random => generate_random(n, seed),
        }
    }
}

/// Everything needed to generate and re-estimate one family of datasets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloDesign {
    pub network: NetworkKind,
    pub n: usize,
    pub theta: PayoffParams,
    pub covariates: Vec<CovariateDist>,
    pub replications: usize,
    /// Subnetwork radius used for estimation.
    pub h: usize,
    pub base_seed: u64,
    pub alpha_box: AlphaBox,
    pub optimizer: OptimizerSettings,
    /// Tolerance of the exact equilibrium used to generate data.
    pub solve_tol: f64,
}

impl MonteCarloDesign {
    /// A design with the default box, optimiser and solver settings.
    pub fn new(
        network: NetworkKind,
        n: usize,
        theta: PayoffParams,
        covariates: Vec<CovariateDist>,
        replications: usize,
        h: usize,
        base_seed: u64,
    ) -> Self {
        let k = theta.k();
        Self {
            network,
            n,
            theta,
            covariates,
            replications,
            h,
            base_seed,
            alpha_box: AlphaBox::default_for(k),
            optimizer: OptimizerSettings::default(),
            solve_tol: crate::game::DEFAULT_TOL,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.covariates.len() != self.theta.d() {
            return Err(Error::Dimension(format!(
                "{} covariate distributions for d = {}",
                self.covariates.len(),
                self.theta.d()
            )));
        }
        let lambda = self.theta.lambda();
        if lambda >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "true parameters give lambda = {lambda:.4}; the design needs lambda < 1"
            )));
        }
        Ok(())
    }

    /// Seed for stream `purpose` of replication `r`.
    pub fn seed_for(&self, r: usize, purpose: u64) -> u64 {
        derive_seed(self.base_seed, r as u64, purpose)
    }

    /// The dataset of replication `r`, generated from the exact equilibrium.
    pub fn dataset(&self, r: usize) -> Result<(Dataset, ChoiceProfile)> {
        self.validate()?;
        let network = self.network.build(self.n, self.seed_for(r, PURPOSE_NETWORK))?;
        let x = draw_covariates(
            self.n,
            &self.covariates,
            &mut rng_from_seed(self.seed_for(r, PURPOSE_COVARIATES)),
        )?;
        let state = GameState::new(network, x)?;
        let (profile, _) = solve_equilibrium(&state, &self.theta, &SolveOptions::with_tol(self.solve_tol))?;
        let y = draw_actions(&profile, self.seed_for(r, PURPOSE_ACTIONS));
        Ok((Dataset::new(state, y.actions, self.theta.k())?, profile))
    }
}

/// Outcome of one replication at one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replication {
    pub index: usize,
    /// `θ̂` stacked, when estimation ran to completion.
    pub estimate: Option<Vec<f64>>,
    pub std_errors: Vec<Option<f64>>,
    pub loglik: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

impl Replication {
    fn failed(index: usize, err: &Error) -> Self {
        Self {
            index,
            estimate: None,
            std_errors: Vec::new(),
            loglik: None,
            converged: false,
            error: Some(err.to_string()),
        }
    }

    pub fn succeeded(&self) -> bool {
        self.converged && self.estimate.is_some()
    }
}

/// Summary over replications. Means and standard deviations use converged
/// replications only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCResult {
    pub replications: usize,
    pub h: usize,
    /// `θ̂` of each converged replication, in replication order.
    pub estimates: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Sample standard deviation (divisor `R − 1`).
    pub sd: Vec<f64>,
    /// Average reported standard error per coordinate, over converged
    /// replications that reported one.
    pub mean_se: Vec<Option<f64>>,
    pub failures: usize,
    pub records: Vec<Replication>,
}

impl MCResult {
    fn from_records(h: usize, dim: usize, records: Vec<Replication>) -> Self {
        let estimates: Vec<Vec<f64>> = records
            .iter()
            .filter(|r| r.succeeded())
            .filter_map(|r| r.estimate.clone())
            .collect();
        let m = estimates.len() as f64;
        let mean: Vec<f64> = (0..dim)
            .map(|c| estimates.iter().map(|e| e[c]).sum::<f64>() / m)
            .collect();
        let sd = (0..dim)
            .map(|c| {
                let ss: f64 = estimates.iter().map(|e| (e[c] - mean[c]).powi(2)).sum();
                (ss / (m - 1.0)).sqrt()
            })
            .collect();
        let mean_se = (0..dim)
            .map(|c| {
                let se: Vec<f64> = records
                    .iter()
                    .filter(|r| r.succeeded())
                    .filter_map(|r| r.std_errors.get(c).copied().flatten())
                    .collect();
                (!se.is_empty()).then(|| se.iter().sum::<f64>() / se.len() as f64)
            })
            .collect();
        Self {
            replications: records.len(),
            h,
            failures: records.iter().filter(|r| !r.succeeded()).count(),
            estimates,
            mean,
            sd,
            mean_se,
            records,
        }
    }
}

/// Generates `design.replications` datasets and estimates each at radius
/// `design.h`.
///
/// Replication `r` draws from streams derived from `(base_seed, r)`, so
/// results do not depend on scheduling and any replication can be rerun on
/// its own. Estimation failures are counted, not propagated.
pub fn run_montecarlo(design: &MonteCarloDesign) -> Result<MCResult> {
    Ok(run_ladder(design, &[design.h])?.remove(0))
}

/// Like [`run_montecarlo`] but estimates every dataset at each radius in
/// `radii`, so the columns of the ladder share their data.
pub fn run_ladder(design: &MonteCarloDesign, radii: &[usize]) -> Result<Vec<MCResult>> {
    design.validate()?;
    let dim = design.theta.dim();
    let per_rep: Vec<Vec<Replication>> = (0..design.replications)
        .into_par_iter()
        .map(|r| match design.dataset(r) {
            Ok((data, _)) => radii.iter().map(|&h| replicate(design, &data, r, h)).collect(),
            Err(e) => radii.iter().map(|_| Replication::failed(r, &e)).collect(),
        })
        .collect();
    Ok(radii
        .iter()
        .enumerate()
        .map(|(col, &h)| MCResult::from_records(h, dim, per_rep.iter().map(|reps| reps[col].clone()).collect()))
        .collect())
}

fn replicate(design: &MonteCarloDesign, data: &Dataset, r: usize, h: usize) -> Replication {
    match amle(data, h, None, &design.alpha_box, &design.optimizer) {
        Ok(fit) => Replication {
            index: r,
            estimate: Some(fit.theta_hat.to_vector()),
            std_errors: fit.std_errors,
            loglik: Some(fit.loglik),
            converged: fit.converged,
            error: None,
        },
        Err(e) => {
            log::warn!("replication {r} at h = {h} failed: {e}");
            Replication::failed(r, &e)
        }
    }
}
