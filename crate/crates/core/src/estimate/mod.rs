//! Approximated maximum likelihood.
//!
//! The likelihood of player `i`'s observed action is evaluated at the
//! equilibrium of the game restricted to its h-hop subnetwork rather than the
//! full network. [`amle`] maximises the average of those log-probabilities by
//! projected BFGS with analytic gradients; standard errors come from the
//! average outer product of per-player scores.

mod ident;
mod likelihood;
mod optimizer;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ChoiceProfile, GameState, PayoffParams, SolveOptions};

pub use ident::{ident_diagnostics, invert_probabilities, IdentDiagnostics};
pub use likelihood::{ApproxLikelihood, Evaluation, PlayerTerm, PROB_FLOOR};
pub use optimizer::{OptimizerSettings, OptimizerTrace, StopReason};

/// Standard errors are withheld when the Fisher matrix is worse conditioned
/// than this.
pub const MAX_FISHER_CONDITION: f64 = 1e12;

/// Observed play: public information plus one action per player.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    state: GameState,
    actions: Vec<usize>,
    k: usize,
}

impl Dataset {
    /// `k` is the number of non-baseline actions; every action must lie in `0..=k`.
    pub fn new(state: GameState, actions: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams(
                "at least one non-baseline action is required".into(),
            ));
        }
        if actions.len() != state.n() {
            return Err(Error::Dimension(format!(
                "{} actions for {} players",
                actions.len(),
                state.n()
            )));
        }
        if let Some((i, &y)) = actions.iter().enumerate().find(|(_, &y)| y > k) {
            return Err(Error::InvalidProfile {
                player: i,
                reason: format!("action {y} outside 0..={k}"),
            });
        }
        Ok(Self { state, actions, k })
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn n(&self) -> usize {
        self.state.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }
}

/// `floor(h0 · n^a)`.
pub fn choose_h(n: usize, h0: f64, a: f64) -> usize {
    // guard against values like 0.1 * 10 landing a hair under an integer
    let h = h0 * (n as f64).powf(a);
    (h * (1.0 + 1e-12)).floor().max(0.0) as usize
}

/// Bounds on every interaction coefficient `α_kℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaBox {
    pub lower: f64,
    pub upper: f64,
}

impl AlphaBox {
    /// The widest symmetric box keeping `λ ≤ 0.995`: `[−1.99, 1.99]` for a
    /// binary choice, `|α| ≤ 0.995 (K+1)/(2K)` otherwise.
    pub fn default_for(k: usize) -> Self {
        let c = if k <= 1 {
            1.99
        } else {
            0.995 * (k as f64 + 1.0) / (2.0 * k as f64)
        };
        Self { lower: -c, upper: c }
    }

    /// Largest `λ` any point of the box can produce.
    pub fn sup_lambda(&self, k: usize) -> f64 {
        // with one action the only gap is against the baseline's zero
        let widest = if k <= 1 {
            self.upper.abs().max(self.lower.abs())
        } else {
            self.upper.max(0.0) - self.lower.min(0.0)
        };
        k as f64 / (k as f64 + 1.0) * widest
    }
}

/// Output of [`amle`].
#[derive(Debug, Clone, Serialize)]
pub struct EstimateResult {
    pub theta_hat: PayoffParams,
    /// One entry per coordinate of the stacked `θ`; `None` where the
    /// coordinate was held fixed or the information matrix is unusable.
    pub std_errors: Vec<Option<f64>>,
    /// `Q̂(θ̂)`, the average log-probability.
    pub loglik: f64,
    /// `n · Q̂(θ̂)`.
    pub loglik_total: f64,
    pub h_used: usize,
    /// Average outer product of scores, `P × P`.
    pub fisher: Vec<Vec<f64>>,
    /// Condition number of the Fisher block over the estimated coordinates.
    pub fisher_condition: Option<f64>,
    pub converged: bool,
    /// Coordinates held at their starting value.
    pub fixed: Vec<bool>,
    /// Score at `θ̂`.
    pub gradient: Vec<f64>,
    pub trace: OptimizerTrace,
}

impl EstimateResult {
    /// `θ̂` stacked as `(β_1', α_1', ..., β_K', α_K')'`.
    pub fn theta_vector(&self) -> Vec<f64> {
        self.theta_hat.to_vector()
    }
}

fn solve_options(settings: &OptimizerSettings) -> SolveOptions {
    SolveOptions {
        tol: settings.solve_tol,
        max_iter: settings.solve_max_iter,
        record_steps: false,
    }
}

/// `Q̂(θ)`: average over players of the log subnetwork-equilibrium
/// probability of the observed action.
pub fn loglik_approx(data: &Dataset, params: &PayoffParams, h: usize, opts: &SolveOptions) -> Result<f64> {
    Ok(ApproxLikelihood::new(data, h, *opts)?.evaluate(params, false)?.value)
}

/// Gradient of [`loglik_approx`] with respect to the stacked `θ`.
pub fn score_approx(data: &Dataset, params: &PayoffParams, h: usize, opts: &SolveOptions) -> Result<Vec<f64>> {
    let eval = ApproxLikelihood::new(data, h, *opts)?.evaluate(params, true)?;
    Ok(eval.gradient.unwrap_or_default())
}

/// Average outer product of the per-player scores at `params`.
pub fn fisher_info(data: &Dataset, params: &PayoffParams, h: usize, opts: &SolveOptions) -> Result<DMatrix<f64>> {
    let terms = ApproxLikelihood::new(data, h, *opts)?.player_terms(params, true)?;
    Ok(outer_product_mean(&terms, params.dim()))
}

fn outer_product_mean(terms: &[PlayerTerm], p: usize) -> DMatrix<f64> {
    let mut j = DMatrix::<f64>::zeros(p, p);
    for t in terms {
        let s = t.score.as_deref().unwrap_or_default();
        for r in 0..p {
            for c in r..p {
                j[(r, c)] += s[r] * s[c];
            }
        }
    }
    let n = terms.len().max(1) as f64;
    for r in 0..p {
        for c in r..p {
            j[(r, c)] /= n;
            j[(c, r)] = j[(r, c)];
        }
    }
    j
}

/// Ratio of the largest to the smallest eigenvalue of a symmetric matrix;
/// infinite when the smallest is not positive.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let lo = eig.min();
    let hi = eig.max();
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// `sqrt(diag(J⁻¹) / n)`.
///
/// Fails with [`Error::Singular`] when `J` is not positive definite or its
/// condition number exceeds [`MAX_FISHER_CONDITION`].
pub fn std_errors(fisher: &DMatrix<f64>, n: usize) -> Result<Vec<f64>> {
    if !fisher.is_square() {
        return Err(Error::Dimension("information matrix must be square".into()));
    }
    let cond = condition_number(fisher);
    if cond.is_nan() || cond > MAX_FISHER_CONDITION {
        return Err(Error::Singular(format!(
            "information matrix condition number {cond:.3e}"
        )));
    }
    let chol = fisher
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("information matrix is not positive definite".into()))?;
    let inv = chol.inverse();
    Ok((0..fisher.nrows()).map(|i| (inv[(i, i)] / n as f64).sqrt()).collect())
}

/// σ^h_i for every player, solved on each player's subnetwork.
pub fn subnetwork_profile(
    state: &GameState,
    params: &PayoffParams,
    h: usize,
    opts: &SolveOptions,
) -> Result<ChoiceProfile> {
    let rows: Vec<Vec<f64>> = (0..state.n())
        .into_par_iter()
        .map(|i| crate::game::solve_subnetwork(state, i, h, params, opts))
        .collect::<Result<_>>()?;
    ChoiceProfile::new(params.k() + 1, rows.concat())
}

/// Approximated maximum likelihood over `θ` with `α` restricted to `alpha_box`.
///
/// Without `init`, `β` starts from the plain logit fit (radius 0, no
/// interactions) and `α` from zero. At radius 0 the interaction coefficients
/// do not enter the likelihood, so they are held at their starting values
/// and get no standard errors.
///
/// Failure to meet the gradient tolerance is not an error: the best iterate
/// comes back with `converged = false`.
pub fn amle(
    data: &Dataset,
    h: usize,
    init: Option<&PayoffParams>,
    alpha_box: &AlphaBox,
    settings: &OptimizerSettings,
) -> Result<EstimateResult> {
    let k = data.k();
    let d = data.state().d();
    if alpha_box.lower > alpha_box.upper || alpha_box.lower > 0.0 || alpha_box.upper < 0.0 {
        return Err(Error::InvalidParams(format!(
            "alpha box [{}, {}] must contain 0",
            alpha_box.lower, alpha_box.upper
        )));
    }
    if alpha_box.sup_lambda(k) >= 1.0 {
        log::warn!(
            "alpha box allows lambda up to {:.4}; equilibria inside the box may not be unique",
            alpha_box.sup_lambda(k)
        );
    }
    let start = match init {
        Some(p) => {
            if p.k() != k || p.d() != d {
                return Err(Error::Dimension(format!(
                    "initial parameters are for K = {}, d = {} but data has K = {k}, d = {d}",
                    p.k(),
                    p.d()
                )));
            }
            p.clone()
        }
        None if h == 0 => PayoffParams::zeros(k, d),
        None => {
            let logit = fit(data, 0, &PayoffParams::zeros(k, d), alpha_box, settings)?;
            let mut theta = logit.theta_hat.to_vector();
            for c in 0..k {
                for l in 0..k {
                    theta[logit.theta_hat.alpha_index(c, l)] = 0.0;
                }
            }
            PayoffParams::from_vector(k, d, &theta)?
        }
    };
    fit(data, h, &start, alpha_box, settings)
}

fn fit(
    data: &Dataset,
    h: usize,
    start: &PayoffParams,
    alpha_box: &AlphaBox,
    settings: &OptimizerSettings,
) -> Result<EstimateResult> {
    let k = data.k();
    let d = data.state().d();
    let p = start.dim();
    let mut lower = vec![f64::NEG_INFINITY; p];
    let mut upper = vec![f64::INFINITY; p];
    let mut frozen = vec![false; p];
    for c in 0..k {
        for l in 0..k {
            let idx = start.alpha_index(c, l);
            lower[idx] = alpha_box.lower;
            upper[idx] = alpha_box.upper;
            frozen[idx] = h == 0;
        }
    }
    let problem = optimizer::Problem {
        lower: &lower,
        upper: &upper,
        frozen: &frozen,
    };

    let mut lik = ApproxLikelihood::new(data, h, solve_options(settings))?;
    let outcome = optimizer::maximize(&problem, &start.to_vector(), settings, |theta| {
        let params = PayoffParams::from_vector(k, d, theta)?;
        let eval = lik.evaluate(&params, true)?;
        Ok(optimizer::Point {
            value: eval.value,
            gradient: eval.gradient.unwrap_or_default(),
            rejected: eval.clamped,
        })
    })?;
    if !outcome.converged {
        log::warn!(
            "optimizer stopped ({:?}) with projected gradient {:.3e}",
            outcome.trace.stop,
            outcome.trace.gradient_norm
        );
    }

    let theta_hat = PayoffParams::from_vector(k, d, &outcome.x)?;
    let terms = lik.player_terms(&theta_hat, true)?;
    let fisher = outer_product_mean(&terms, p);

    let free: Vec<usize> = (0..p).filter(|&i| !frozen[i]).collect();
    let block = DMatrix::from_fn(free.len(), free.len(), |r, c| fisher[(free[r], free[c])]);
    let condition = condition_number(&block);
    let mut std_err = vec![None; p];
    match std_errors(&block, data.n()) {
        Ok(se) => {
            for (&i, v) in free.iter().zip(se) {
                std_err[i] = Some(v);
            }
        }
        Err(e) => log::warn!("standard errors withheld: {e}"),
    }

    let n = data.n() as f64;
    Ok(EstimateResult {
        theta_hat,
        std_errors: std_err,
        loglik: outcome.value,
        loglik_total: outcome.value * n,
        h_used: h,
        fisher: (0..p).map(|r| (0..p).map(|c| fisher[(r, c)]).collect()).collect(),
        fisher_condition: condition.is_finite().then_some(condition),
        converged: outcome.converged,
        fixed: frozen,
        gradient: outcome.gradient,
        trace: outcome.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Covariates;
    use crate::network::generate_circle;
    use approx::assert_abs_diff_eq;

    #[test]
    fn choose_h_examples() {
        assert_eq!(choose_h(1000, 0.1, 0.5), 3);
        assert_eq!(choose_h(500, 0.1, 0.5), 2);
        assert_eq!(choose_h(2000, 0.1, 0.5), 4);
        assert_eq!(choose_h(100, 0.1, 0.5), 1);
        assert_eq!(choose_h(1, 0.1, 0.5), 0);
    }

    #[test]
    fn std_errors_closed_form() {
        let eye = DMatrix::<f64>::identity(3, 3);
        for v in std_errors(&eye, 100).unwrap() {
            assert_abs_diff_eq!(v, 0.1, epsilon = 1e-15);
        }
        let j = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let a = std_errors(&j, 50).unwrap();
        let b = std_errors(&j, 100).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(y / x, 1.0 / 2f64.sqrt(), epsilon = 1e-14);
        }
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(std_errors(&singular, 10), Err(Error::Singular(_))));
    }

    #[test]
    fn default_boxes_keep_lambda_below_one() {
        assert_eq!(AlphaBox::default_for(1).upper, 1.99);
        for k in 1..6 {
            let b = AlphaBox::default_for(k);
            assert!(b.sup_lambda(k) < 1.0);
            assert!(b.sup_lambda(k) > 0.99);
        }
    }

    #[test]
    fn dataset_rejects_out_of_range_actions() {
        let state = GameState::new(
            generate_circle(4).unwrap(),
            Covariates::from_rows(&vec![vec![1.0]; 4]).unwrap(),
        )
        .unwrap();
        assert!(Dataset::new(state.clone(), vec![0, 1, 2, 0], 1).is_err());
        assert!(Dataset::new(state.clone(), vec![0, 1], 1).is_err());
        assert!(Dataset::new(state, vec![0, 1, 2, 0], 2).is_ok());
    }
}
