//! Payoffs, logit best responses and the equilibrium fixed point.
//!
//! Player `i` choosing action `k ∈ {1..K}` receives
//! `x_i'β_k + Σ_ℓ α_kℓ · s_iℓ + ε_ik`, where `s_iℓ` is the average over the
//! `Q_i` friends of their probability of playing `ℓ`. Action 0 is the
//! baseline with zero mean utility. With extreme-value shocks the equilibrium
//! choice probabilities solve `σ_i = Γ_i(σ_{F_i})` for every player, and the
//! map is a sup-L1 contraction with modulus `λ` (see [`PayoffParams::lambda`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{DirectedNetwork, Subnetwork};

/// Default stopping tolerance on the sup-L1 Jacobi step.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap for the Jacobi solver.
pub const DEFAULT_MAX_ITER: usize = 10_000;

const ROW_SUM_TOL: f64 = 1e-12;
const PARALLEL_SWEEP_MIN: usize = 4096;

/// Structural parameters `θ`.
///
/// Non-baseline actions `1..=K` are stored at 0-based rows `0..K`:
/// `beta_row(k)` is `β_{k+1}` and `alpha(k, l)` is `α_{k+1, l+1}`. The
/// baseline normalisations `β_0 = 0` and `α_{0ℓ} = α_{k0} = 0` are implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffParams {
    k: usize,
    d: usize,
    beta: Vec<f64>,
    alpha: Vec<f64>,
}

impl PayoffParams {
    /// `beta` is `K × d` and `alpha` is `K × K`, both row-major.
    pub fn new(k: usize, d: usize, beta: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams(
                "at least one non-baseline action is required".into(),
            ));
        }
        if beta.len() != k * d {
            return Err(Error::InvalidParams(format!(
                "beta has {} entries, expected K*d = {}",
                beta.len(),
                k * d
            )));
        }
        if alpha.len() != k * k {
            return Err(Error::InvalidParams(format!(
                "alpha has {} entries, expected K*K = {}",
                alpha.len(),
                k * k
            )));
        }
        if beta.iter().chain(&alpha).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        Ok(Self { k, d, beta, alpha })
    }

    /// Builds parameters from nested rows, as written in config files.
    pub fn from_rows(beta: &[Vec<f64>], alpha: &[Vec<f64>]) -> Result<Self> {
        let k = beta.len();
        let d = beta.first().map_or(0, Vec::len);
        if beta.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParams("beta rows have unequal lengths".into()));
        }
        if alpha.len() != k || alpha.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParams(format!("alpha must be {k} x {k}")));
        }
        Self::new(k, d, beta.concat(), alpha.concat())
    }

    pub fn zeros(k: usize, d: usize) -> Self {
        Self {
            k,
            d,
            beta: vec![0.0; k * d],
            alpha: vec![0.0; k * k],
        }
    }

    /// Number of non-baseline actions.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Covariate dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Dimension of `θ`, `K(d + K)`.
    pub fn dim(&self) -> usize {
        self.k * (self.d + self.k)
    }

    pub fn beta_row(&self, k: usize) -> &[f64] {
        &self.beta[k * self.d..(k + 1) * self.d]
    }

    pub fn alpha_row(&self, k: usize) -> &[f64] {
        &self.alpha[k * self.k..(k + 1) * self.k]
    }

    pub fn alpha(&self, k: usize, l: usize) -> f64 {
        self.alpha[k * self.k + l]
    }

    pub fn beta_rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|k| self.beta_row(k).to_vec()).collect()
    }

    pub fn alpha_rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|k| self.alpha_row(k).to_vec()).collect()
    }

    /// Contraction modulus `λ = K/(K+1) · max_{k,m,ℓ} |α_kℓ − α_mℓ|`, with
    /// the baseline row `α_0ℓ = 0` included in the maximum.
    pub fn lambda(&self) -> f64 {
        let mut widest = 0.0f64;
        for l in 0..self.k {
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for k in 0..self.k {
                let a = self.alpha(k, l);
                lo = lo.min(a);
                hi = hi.max(a);
            }
            widest = widest.max(hi - lo);
        }
        self.k as f64 / (self.k as f64 + 1.0) * widest
    }

    /// `θ` stacked as `(β_1', α_1', ..., β_K', α_K')'`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        for k in 0..self.k {
            v.extend_from_slice(self.beta_row(k));
            v.extend_from_slice(self.alpha_row(k));
        }
        v
    }

    /// Inverse of [`to_vector`](Self::to_vector).
    pub fn from_vector(k: usize, d: usize, theta: &[f64]) -> Result<Self> {
        if theta.len() != k * (d + k) {
            return Err(Error::InvalidParams(format!(
                "theta has {} entries, expected K(d+K) = {}",
                theta.len(),
                k * (d + k)
            )));
        }
        let mut beta = Vec::with_capacity(k * d);
        let mut alpha = Vec::with_capacity(k * k);
        for block in theta.chunks_exact(d + k) {
            beta.extend_from_slice(&block[..d]);
            alpha.extend_from_slice(&block[d..]);
        }
        Self::new(k, d, beta, alpha)
    }

    /// Position of `β_{k+1, c}` in the stacked vector.
    pub fn beta_index(&self, k: usize, c: usize) -> usize {
        k * (self.d + self.k) + c
    }

    /// Position of `α_{k+1, l+1}` in the stacked vector.
    pub fn alpha_index(&self, k: usize, l: usize) -> usize {
        k * (self.d + self.k) + self.d + l
    }

    /// `x'β_k` for every non-baseline action.
    pub(crate) fn linear_index(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.beta_row(k).iter().zip(x).map(|(b, v)| b * v).sum();
        }
    }

    /// Lower bound on any equilibrium (or subnetwork-equilibrium) choice
    /// probability of a player with covariates `x`.
    ///
    /// Friends' average probabilities lie in `{s ≥ 0, Σ s ≤ 1}`, so the
    /// strategic term of action `k` lies between `min(0, min_ℓ α_kℓ)` and
    /// `max(0, max_ℓ α_kℓ)`. Plugging the extremes against each other bounds
    /// every logit ratio.
    pub fn sigma_floor(&self, x: &[f64]) -> f64 {
        let mut xb = vec![0.0; self.k];
        self.linear_index(x, &mut xb);
        // (low, high) utility per action, baseline first
        let mut bounds = vec![(0.0, 0.0)];
        for (k, &base) in xb.iter().enumerate() {
            let row = self.alpha_row(k);
            let lo = row.iter().copied().fold(0.0f64, f64::min);
            let hi = row.iter().copied().fold(0.0f64, f64::max);
            bounds.push((base + lo, base + hi));
        }
        (0..bounds.len())
            .map(|k| {
                let denom: f64 = bounds
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, &(_, hi))| (hi - bounds[k].0).exp())
                    .sum();
                1.0 / (1.0 + denom)
            })
            .fold(1.0, f64::min)
    }
}

/// Player covariates, `n × d` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Covariates {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::Dimension(format!(
                "{} covariate values for {n} players with {d} columns",
                data.len()
            )));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("covariate rows have unequal lengths".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.data[i * self.d + c])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows permuted so that old player `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for (i, &p) in perm.iter().enumerate() {
            data[p * self.d..(p + 1) * self.d].copy_from_slice(self.row(i));
        }
        Self {
            n: self.n,
            d: self.d,
            data,
        }
    }
}

/// Public information: the network and every player's covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    network: DirectedNetwork,
    covariates: Covariates,
    degrees: Vec<usize>,
}

impl GameState {
    pub fn new(network: DirectedNetwork, covariates: Covariates) -> Result<Self> {
        if network.n() != covariates.n() {
            return Err(Error::Dimension(format!(
                "network has {} players but covariates have {} rows",
                network.n(),
                covariates.n()
            )));
        }
        let degrees = network.out_degrees();
        Ok(Self {
            network,
            covariates,
            degrees,
        })
    }

    pub fn n(&self) -> usize {
        self.network.n()
    }

    pub fn d(&self) -> usize {
        self.covariates.d()
    }

    pub fn network(&self) -> &DirectedNetwork {
        &self.network
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }

    /// `Q_i` for every player.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    fn check_params(&self, params: &PayoffParams) -> Result<()> {
        if params.d() != self.d() {
            return Err(Error::Dimension(format!(
                "parameters have d = {} but covariates have {} columns",
                params.d(),
                self.d()
            )));
        }
        Ok(())
    }

    /// The full game viewed through the generic solver interface.
    pub(crate) fn full_view(&self) -> GameView<'_> {
        GameView {
            network: &self.network,
            members: None,
            degrees: &self.degrees,
            covariates: &self.covariates,
        }
    }

    /// The subnetwork game on `sub`. Friend lists are restricted to members,
    /// but each player keeps its original friend count `Q_j` in the average,
    /// so friends outside the subnetwork contribute as if they played the
    /// baseline action.
    pub(crate) fn sub_view<'a>(&'a self, sub: &'a Subnetwork) -> GameView<'a> {
        GameView {
            network: &sub.network,
            members: Some(&sub.members),
            degrees: &self.degrees,
            covariates: &self.covariates,
        }
    }
}

/// Choice probabilities, one row per player over actions `0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceProfile {
    actions: usize,
    data: Vec<f64>,
}

impl ChoiceProfile {
    /// Validates that every row is a probability vector.
    pub fn new(actions: usize, data: Vec<f64>) -> Result<Self> {
        if actions < 2 || !data.len().is_multiple_of(actions) {
            return Err(Error::Dimension(format!(
                "{} entries cannot form rows of {actions} actions",
                data.len()
            )));
        }
        let p = Self { actions, data };
        for i in 0..p.n() {
            check_simplex(i, p.row(i))?;
        }
        Ok(p)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let actions = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != actions) {
            return Err(Error::Dimension("profile rows have unequal lengths".into()));
        }
        Self::new(actions, rows.concat())
    }

    /// Every player mixing uniformly over `K + 1` actions.
    pub fn uniform(n: usize, k: usize) -> Self {
        let a = k + 1;
        Self {
            actions: a,
            data: vec![1.0 / a as f64; n * a],
        }
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.actions
    }

    /// `K`, the number of non-baseline actions.
    pub fn k(&self) -> usize {
        self.actions - 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.actions..(i + 1) * self.actions]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest per-player L1 distance to `other`.
    pub fn sup_l1_distance(&self, other: &ChoiceProfile) -> f64 {
        self.data
            .chunks_exact(self.actions)
            .zip(other.data.chunks_exact(other.actions))
            .map(|(a, b)| l1(a, b))
            .fold(0.0, f64::max)
    }

    /// Rows permuted so that old player `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let a = self.actions;
        let mut data = vec![0.0; self.data.len()];
        for (i, &p) in perm.iter().enumerate() {
            data[p * a..(p + 1) * a].copy_from_slice(self.row(i));
        }
        Self { actions: a, data }
    }
}

pub(crate) fn check_simplex(player: usize, row: &[f64]) -> Result<()> {
    if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidProfile {
            player,
            reason: format!("entries must lie in [0, 1], got {row:?}"),
        });
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidProfile {
            player,
            reason: format!("row sums to {total}"),
        });
    }
    Ok(())
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Softmax over `(0, u_1, ..., u_K)` written into `out` (length `K + 1`),
/// shifted by the largest utility.
pub(crate) fn softmax_with_baseline(utilities: &[f64], out: &mut [f64]) {
    let top = utilities.iter().copied().fold(0.0f64, f64::max);
    out[0] = (-top).exp();
    let mut total = out[0];
    for (o, &u) in out[1..].iter_mut().zip(utilities) {
        *o = (u - top).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// The logit best response `Γ_i` of a player with covariates `x_i` and `q_i`
/// friends whose choice probabilities are `friend_probs`.
///
/// Returns the `K + 1` probabilities proportional to
/// `exp(x_i'β_k + Σ_ℓ α_kℓ · (1/q_i) Σ_j σ_jℓ)`, with the baseline numerator
/// `exp(0)`. A friendless player gets the plain multinomial logit.
pub fn best_response(x: &[f64], q: usize, friend_probs: &[&[f64]], params: &PayoffParams) -> Result<Vec<f64>> {
    if x.len() != params.d() {
        return Err(Error::Dimension(format!(
            "covariate vector has {} entries, parameters expect {}",
            x.len(),
            params.d()
        )));
    }
    if friend_probs.len() != q {
        return Err(Error::Dimension(format!(
            "{} friend rows supplied for q = {q}",
            friend_probs.len()
        )));
    }
    let k = params.k();
    let mut shares = vec![0.0; k];
    for (j, row) in friend_probs.iter().enumerate() {
        if row.len() != k + 1 {
            return Err(Error::Dimension(format!(
                "friend row {j} has {} entries, expected {}",
                row.len(),
                k + 1
            )));
        }
        check_simplex(j, row)?;
        for (s, p) in shares.iter_mut().zip(&row[1..]) {
            *s += p;
        }
    }
    if q > 0 {
        for s in &mut shares {
            *s /= q as f64;
        }
    }
    let mut xb = vec![0.0; k];
    params.linear_index(x, &mut xb);
    let mut out = vec![0.0; k + 1];
    respond(params, &xb, &shares, &mut vec![0.0; k], &mut out);
    Ok(out)
}

/// `Γ` given precomputed `x'β` and friend shares.
#[inline]
pub(crate) fn respond(params: &PayoffParams, xb: &[f64], shares: &[f64], utilities: &mut [f64], out: &mut [f64]) {
    for (k, u) in utilities.iter_mut().enumerate() {
        *u = xb[k] + params.alpha_row(k).iter().zip(shares).map(|(a, s)| a * s).sum::<f64>();
    }
    softmax_with_baseline(utilities, out);
}

/// Stopping rule and diagnostics switches for the Jacobi solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once the sup-L1 step falls to or below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Keep every step size in [`SolveReport::steps`].
    pub record_steps: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            record_steps: false,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Last sup-L1 step; the distance to the fixed point is at most
    /// `final_residual · λ / (1 − λ)` when `λ < 1`.
    pub final_residual: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<f64>,
}

/// A game on a (possibly induced) network, addressed by local indices.
pub(crate) struct GameView<'a> {
    pub network: &'a DirectedNetwork,
    pub members: Option<&'a [usize]>,
    pub degrees: &'a [usize],
    pub covariates: &'a Covariates,
}

impl GameView<'_> {
    pub fn len(&self) -> usize {
        self.network.n()
    }

    #[inline]
    pub fn global(&self, local: usize) -> usize {
        self.members.map_or(local, |m| m[local])
    }

    #[inline]
    pub fn q(&self, local: usize) -> usize {
        self.degrees[self.global(local)]
    }

    pub fn x(&self, local: usize) -> &[f64] {
        self.covariates.row(self.global(local))
    }

    /// `x'β_k` for every local player, `m × K`.
    pub fn linear_indices(&self, params: &PayoffParams) -> Vec<f64> {
        let k = params.k();
        let mut xb = vec![0.0; self.len() * k];
        for (j, chunk) in xb.chunks_exact_mut(k).enumerate() {
            params.linear_index(self.x(j), chunk);
        }
        xb
    }

    /// Friend shares `s_jℓ = (1/Q_j) Σ_{j' ∈ F_j} σ_j'ℓ` for `ℓ = 1..K`.
    #[inline]
    pub fn shares(&self, j: usize, sigma: &[f64], actions: usize, out: &mut [f64]) {
        out.fill(0.0);
        let friends = self.network.friends_of(j);
        if friends.is_empty() {
            return;
        }
        for &f in friends {
            let row = &sigma[f * actions + 1..(f + 1) * actions];
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        let q = self.q(j) as f64;
        for o in out.iter_mut() {
            *o /= q;
        }
    }

    /// One synchronous sweep `next = Γ(sigma)`; returns the sup-L1 step.
    fn sweep(&self, params: &PayoffParams, xb: &[f64], sigma: &[f64], next: &mut [f64]) -> f64 {
        let k = params.k();
        let a = k + 1;
        let update = |j: usize, out: &mut [f64]| -> f64 {
            let mut shares = [0.0f64; 8];
            let mut util = [0.0f64; 8];
            let mut heap_s;
            let mut heap_u;
            let (shares, util): (&mut [f64], &mut [f64]) = if k <= 8 {
                (&mut shares[..k], &mut util[..k])
            } else {
                heap_s = vec![0.0; k];
                heap_u = vec![0.0; k];
                (&mut heap_s, &mut heap_u)
            };
            self.shares(j, sigma, a, shares);
            respond(params, &xb[j * k..(j + 1) * k], shares, util, out);
            l1(out, &sigma[j * a..(j + 1) * a])
        };
        if self.len() >= PARALLEL_SWEEP_MIN {
            next.par_chunks_mut(a)
                .enumerate()
                .map(|(j, out)| update(j, out))
                .reduce(|| 0.0, f64::max)
        } else {
            next.chunks_exact_mut(a)
                .enumerate()
                .map(|(j, out)| update(j, out))
                .fold(0.0, f64::max)
        }
    }

    /// Jacobi iteration from `sigma` (overwritten with the solution).
    pub fn solve_in_place(
        &self,
        params: &PayoffParams,
        sigma: &mut Vec<f64>,
        opts: &SolveOptions,
    ) -> Result<SolveReport> {
        let lambda = params.lambda();
        let xb = self.linear_indices(params);
        let mut next = vec![0.0; sigma.len()];
        let mut steps = Vec::new();
        let mut step = f64::INFINITY;
        for it in 1..=opts.max_iter {
            step = self.sweep(params, &xb, sigma, &mut next);
            std::mem::swap(sigma, &mut next);
            if opts.record_steps {
                steps.push(step);
            }
            if !step.is_finite() {
                break;
            }
            if step <= opts.tol {
                return Ok(SolveReport {
                    iterations: it,
                    final_residual: step,
                    lambda,
                    steps,
                });
            }
        }
        Err(Error::NotConverged {
            iterations: opts.max_iter,
            residual: step,
        })
    }
}

fn warn_if_not_contracting(lambda: f64) {
    if lambda >= 1.0 {
        log::warn!("interaction modulus lambda = {lambda:.4} >= 1: equilibrium uniqueness is not guaranteed");
    }
}

/// Solves the full-network equilibrium by Jacobi iteration from the uniform
/// profile.
pub fn solve_equilibrium(
    state: &GameState,
    params: &PayoffParams,
    opts: &SolveOptions,
) -> Result<(ChoiceProfile, SolveReport)> {
    let init = ChoiceProfile::uniform(state.n(), params.k());
    solve_equilibrium_from(state, params, &init, opts)
}

/// Jacobi iteration from an arbitrary starting profile.
pub fn solve_equilibrium_from(
    state: &GameState,
    params: &PayoffParams,
    init: &ChoiceProfile,
    opts: &SolveOptions,
) -> Result<(ChoiceProfile, SolveReport)> {
    state.check_params(params)?;
    if init.n() != state.n() || init.k() != params.k() {
        return Err(Error::Dimension(format!(
            "initial profile is {} x {}, expected {} x {}",
            init.n(),
            init.k() + 1,
            state.n(),
            params.k() + 1
        )));
    }
    warn_if_not_contracting(params.lambda());
    let mut sigma = init.data.clone();
    let report = state.full_view().solve_in_place(params, &mut sigma, opts)?;
    Ok((
        ChoiceProfile {
            actions: params.k() + 1,
            data: sigma,
        },
        report,
    ))
}

/// The subnetwork approximation `σ^h_i`: solve the game restricted to
/// `N_(i,h)` and return the centre player's probabilities.
pub fn solve_subnetwork(
    state: &GameState,
    center: usize,
    radius: usize,
    params: &PayoffParams,
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    state.check_params(params)?;
    warn_if_not_contracting(params.lambda());
    let sub = state.network().subgraph(center, radius)?;
    let view = state.sub_view(&sub);
    let a = params.k() + 1;
    let mut sigma = vec![1.0 / a as f64; sub.members.len() * a];
    view.solve_in_place(params, &mut sigma, opts)
        .map_err(|e| Error::Subnetwork {
            player: center,
            source: Box::new(e),
        })?;
    Ok(sigma[sub.center * a..(sub.center + 1) * a].to_vec())
}

/// The network-decaying-dependence bound `2 λ^{h+1}` on the L1 distance
/// between `σ^h_i` and `σ*_i`.
pub fn ndd_bound(lambda: f64, radius: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParams(format!(
            "decay bound needs 0 <= lambda < 1, got {lambda}"
        )));
    }
    Ok(2.0 * lambda.powi(radius as i32 + 1))
}
