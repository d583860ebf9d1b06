//! The approximated log-likelihood and its analytic score.
//!
//! Each player's likelihood term comes from the equilibrium of the small game
//! on its h-hop subnetwork. Derivatives of that equilibrium with respect to
//! `θ` follow from the implicit function theorem applied to the fixed point
//! `σ = Γ(σ; θ)`:
//!
//! `(I − ∂Γ/∂σ) · ∂σ/∂θ = ∂Γ/∂θ`.
//!
//! Only the centre player's log-probability is needed, so the adjoint system
//! `(I − ∂Γ/∂σ)' z = ∂ ln σ_{c,y} / ∂σ` is solved once per player and the
//! score is `(∂Γ/∂θ)' z`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::Dataset;
use crate::error::{Error, Result};
use crate::game::{GameView, PayoffParams, SolveOptions};
use crate::network::Subnetwork;

/// Probabilities are clamped here before taking logs.
pub const PROB_FLOOR: f64 = 1e-300;

/// One player's contribution at a given `θ`.
#[derive(Debug, Clone)]
pub struct PlayerTerm {
    /// `ln σ^h_{i,Y_i}` (after clamping).
    pub log_prob: f64,
    pub clamped: bool,
    /// `∂ ln σ^h_{i,Y_i} / ∂θ`, when requested.
    pub score: Option<Vec<f64>>,
}

/// Aggregated objective value and gradient.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// `Q̂(θ)`, the average log-probability.
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    /// Whether any player's probability hit [`PROB_FLOOR`].
    pub clamped: bool,
}

/// Subnetwork decomposition of a dataset plus per-player warm starts.
///
/// Subnetworks do not depend on `θ`, so they are extracted once and reused
/// for every evaluation. Each player's last equilibrium is kept as the
/// starting point for the next solve.
pub struct ApproxLikelihood<'a> {
    data: &'a Dataset,
    radius: usize,
    subnets: Vec<Subnetwork>,
    warm: Vec<Vec<f64>>,
    opts: SolveOptions,
}

impl<'a> ApproxLikelihood<'a> {
    pub fn new(data: &'a Dataset, radius: usize, opts: SolveOptions) -> Result<Self> {
        let net = data.state().network();
        let subnets: Vec<Subnetwork> = (0..data.n())
            .into_par_iter()
            .map(|i| net.subgraph(i, radius))
            .collect::<Result<_>>()?;
        let a = data.k() + 1;
        let warm = subnets
            .iter()
            .map(|s| vec![1.0 / a as f64; s.members.len() * a])
            .collect();
        Ok(Self {
            data,
            radius,
            subnets,
            warm,
            opts,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    /// Largest subnetwork size.
    pub fn max_subnet_size(&self) -> usize {
        self.subnets.iter().map(|s| s.members.len()).max().unwrap_or(0)
    }

    fn check(&self, params: &PayoffParams) -> Result<()> {
        if params.k() != self.data.k() || params.d() != self.data.state().d() {
            return Err(Error::Dimension(format!(
                "parameters are for K = {}, d = {} but data has K = {}, d = {}",
                params.k(),
                params.d(),
                self.data.k(),
                self.data.state().d()
            )));
        }
        Ok(())
    }

    /// Per-player terms, in player order.
    pub fn player_terms(&mut self, params: &PayoffParams, with_score: bool) -> Result<Vec<PlayerTerm>> {
        self.check(params)?;
        let data = self.data;
        let opts = self.opts;
        self.subnets
            .par_iter()
            .zip(self.warm.par_iter_mut())
            .enumerate()
            .map(|(i, (sub, warm))| {
                player_term(data, sub, params, warm, &opts, with_score).map_err(|e| Error::Subnetwork {
                    player: i,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// `Q̂(θ)` and optionally its gradient, summed in player order.
    pub fn evaluate(&mut self, params: &PayoffParams, with_score: bool) -> Result<Evaluation> {
        let terms = self.player_terms(params, with_score)?;
        let n = terms.len() as f64;
        let value = terms.iter().map(|t| t.log_prob).sum::<f64>() / n;
        let clamped = terms.iter().any(|t| t.clamped);
        let gradient = with_score.then(|| {
            let mut g = vec![0.0; params.dim()];
            for t in &terms {
                for (acc, s) in g.iter_mut().zip(t.score.as_deref().unwrap_or_default()) {
                    *acc += s;
                }
            }
            g.iter_mut().for_each(|v| *v /= n);
            g
        });
        Ok(Evaluation {
            value,
            gradient,
            clamped,
        })
    }
}

fn player_term(
    data: &Dataset,
    sub: &Subnetwork,
    params: &PayoffParams,
    sigma: &mut Vec<f64>,
    opts: &SolveOptions,
    with_score: bool,
) -> Result<PlayerTerm> {
    let view = data.state().sub_view(sub);
    let a = params.k() + 1;
    if let Err(e) = view.solve_in_place(params, sigma, opts) {
        // a diverged iterate would poison later warm starts
        sigma.iter_mut().for_each(|v| *v = 1.0 / a as f64);
        return Err(e);
    }
    let y = data.actions()[sub.members[sub.center]];
    let p = sigma[sub.center * a + y];
    let clamped = p.is_nan() || p < PROB_FLOOR;
    let log_prob = p.max(PROB_FLOOR).ln();
    let score = if with_score {
        Some(center_score(&view, sub.center, y, params, sigma)?)
    } else {
        None
    };
    Ok(PlayerTerm {
        log_prob,
        clamped,
        score,
    })
}

/// `∂ ln σ_{center, y} / ∂θ` at the fixed point `sigma` of `view`.
pub(crate) fn center_score(
    view: &GameView<'_>,
    center: usize,
    y: usize,
    params: &PayoffParams,
    sigma: &[f64],
) -> Result<Vec<f64>> {
    let k = params.k();
    let a = k + 1;
    let m = view.len();
    let dim = m * k;

    // ∂σ_j(1..K)/∂u_j = diag(p) − p p'
    let mut jac = vec![0.0; m * k * k];
    for j in 0..m {
        let p = &sigma[j * a + 1..(j + 1) * a];
        let block = &mut jac[j * k * k..(j + 1) * k * k];
        for r in 0..k {
            for c in 0..k {
                block[r * k + c] = if r == c { p[r] } else { 0.0 } - p[r] * p[c];
            }
        }
    }

    let mut system = DMatrix::<f64>::identity(dim, dim);
    let mut coupling = vec![0.0; k * k];
    for j in 0..m {
        let friends = view.network.friends_of(j);
        if friends.is_empty() {
            continue;
        }
        let q = view.q(j) as f64;
        let block = &jac[j * k * k..(j + 1) * k * k];
        // (D_j α / Q_j)[r, l]
        for r in 0..k {
            for l in 0..k {
                coupling[r * k + l] = (0..k).map(|c| block[r * k + c] * params.alpha(c, l)).sum::<f64>() / q;
            }
        }
        for &f in friends {
            for r in 0..k {
                for l in 0..k {
                    system[(j * k + r, f * k + l)] -= coupling[r * k + l];
                }
            }
        }
    }

    let mut rhs = DVector::<f64>::zeros(dim);
    let pc = &sigma[center * a..(center + 1) * a];
    if y == 0 {
        for r in 0..k {
            rhs[center * k + r] = -1.0 / pc[0].max(PROB_FLOOR);
        }
    } else {
        rhs[center * k + y - 1] = 1.0 / pc[y].max(PROB_FLOOR);
    }

    let adjoint = system
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("I - dΓ/dσ is singular on a subnetwork".into()))?;

    let d = params.d();
    let mut score = vec![0.0; params.dim()];
    let mut shares = vec![0.0; k];
    for j in 0..m {
        let z = &adjoint.as_slice()[j * k..(j + 1) * k];
        if z.iter().all(|v| *v == 0.0) {
            continue;
        }
        view.shares(j, sigma, a, &mut shares);
        let x = view.x(j);
        let block = &jac[j * k * k..(j + 1) * k * k];
        for c in 0..k {
            // Σ_r z_r ∂σ_jr/∂u_jc
            let w: f64 = (0..k).map(|r| z[r] * block[r * k + c]).sum();
            if w == 0.0 {
                continue;
            }
            for (col, xv) in x.iter().enumerate().take(d) {
                score[params.beta_index(c, col)] += w * xv;
            }
            for (l, s) in shares.iter().enumerate() {
                score[params.alpha_index(c, l)] += w * s;
            }
        }
    }
    Ok(score)
}
