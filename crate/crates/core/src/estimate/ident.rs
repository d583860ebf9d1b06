//! Identification diagnostics from choice probabilities.
//!
//! At any profile generated by the model, the log-odds of action `k` against
//! the baseline is linear in `W_i = (X_i', s_i1, ..., s_iK)'`, where `s_iℓ`
//! is the average friend probability of action `ℓ`:
//!
//! `δ_ik = ln σ_ik − ln σ_i0 = X_i'β_k + Σ_ℓ α_kℓ s_iℓ`.
//!
//! Invertibility of `E[W W']` is what pins down `θ`, and when it holds
//! `θ_k = E[W W']⁻¹ E[W δ_k]`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{ChoiceProfile, GameState, PayoffParams};

/// Moment matrices with a smallest eigenvalue at or below this (relative to
/// the largest) are reported as singular.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentDiagnostics {
    /// Smallest eigenvalue of the symmetrised `(1/n) Σ W_i W_i'`.
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub determinant: f64,
    pub singular: bool,
    /// Mean and standard deviation of `δ_ik` for each `k = 1..K`.
    pub delta_mean: Vec<f64>,
    pub delta_sd: Vec<f64>,
    /// Mean and standard deviation of `φ_iℓ = Σ_{j ∈ F_i} σ_jℓ` for each `ℓ = 1..K`.
    pub phi_mean: Vec<f64>,
    pub phi_sd: Vec<f64>,
}

struct Moments {
    /// `(1/n) Σ W W'`, size `d + K`.
    ww: DMatrix<f64>,
    /// `(1/n) Σ W δ_k`, one column per action.
    wd: DMatrix<f64>,
    delta: Vec<Vec<f64>>,
    phi: Vec<Vec<f64>>,
}

fn moments(state: &GameState, probs: &ChoiceProfile) -> Result<Moments> {
    let n = state.n();
    if probs.n() != n {
        return Err(Error::Dimension(format!(
            "profile has {} rows for {n} players",
            probs.n()
        )));
    }
    let k = probs.k();
    let d = state.d();
    let dim = d + k;
    let net = state.network();
    let mut ww = DMatrix::<f64>::zeros(dim, dim);
    let mut wd = DMatrix::<f64>::zeros(dim, k);
    let mut delta = vec![vec![0.0; n]; k];
    let mut phi = vec![vec![0.0; n]; k];
    let mut w = vec![0.0; dim];
    for i in 0..n {
        let row = probs.row(i);
        if row.iter().any(|&p| p.is_nan() || p <= 0.0) {
            return Err(Error::InvalidProfile {
                player: i,
                reason: "log-odds need strictly positive probabilities".into(),
            });
        }
        w[..d].copy_from_slice(state.covariates().row(i));
        let friends = net.friends_of(i);
        for l in 0..k {
            let total: f64 = friends.iter().map(|&j| probs.row(j)[l + 1]).sum();
            phi[l][i] = total;
            w[d + l] = if friends.is_empty() {
                0.0
            } else {
                total / friends.len() as f64
            };
        }
        for c in 0..k {
            delta[c][i] = row[c + 1].ln() - row[0].ln();
        }
        for r in 0..dim {
            for c in r..dim {
                ww[(r, c)] += w[r] * w[c];
            }
            for c in 0..k {
                wd[(r, c)] += w[r] * delta[c][i];
            }
        }
    }
    let nf = n.max(1) as f64;
    for r in 0..dim {
        for c in r..dim {
            ww[(r, c)] /= nf;
            ww[(c, r)] = ww[(r, c)];
        }
    }
    wd /= nf;
    Ok(Moments { ww, wd, delta, phi })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Rank diagnostics of the moment matrix built from `probs`.
///
/// A singular matrix is reported through [`IdentDiagnostics::singular`],
/// not as an error.
pub fn ident_diagnostics(state: &GameState, probs: &ChoiceProfile) -> Result<IdentDiagnostics> {
    let m = moments(state, probs)?;
    let eig = m.ww.clone().symmetric_eigen().eigenvalues;
    let min_eigenvalue = eig.min();
    let max_eigenvalue = eig.max();
    let (delta_mean, delta_sd) = m.delta.iter().map(|v| mean_sd(v)).unzip();
    let (phi_mean, phi_sd) = m.phi.iter().map(|v| mean_sd(v)).unzip();
    Ok(IdentDiagnostics {
        min_eigenvalue,
        max_eigenvalue,
        determinant: m.ww.determinant(),
        singular: min_eigenvalue.is_nan() || min_eigenvalue <= RANK_TOL * max_eigenvalue.abs().max(1.0),
        delta_mean,
        delta_sd,
        phi_mean,
        phi_sd,
    })
}

/// Recovers `θ` from choice probabilities by least squares of `δ_k` on `W`.
///
/// Exact when `probs` is the equilibrium of the game at some `θ` with
/// non-degenerate `W`.
pub fn invert_probabilities(state: &GameState, probs: &ChoiceProfile) -> Result<PayoffParams> {
    let m = moments(state, probs)?;
    let k = probs.k();
    let d = state.d();
    let chol =
        m.ww.clone()
            .cholesky()
            .ok_or_else(|| Error::Singular("moment matrix E[W W'] is not positive definite".into()))?;
    let mut beta = Vec::with_capacity(k * d);
    let mut alpha = Vec::with_capacity(k * k);
    for c in 0..k {
        let rhs: DVector<f64> = m.wd.column(c).into_owned();
        let coef = chol.solve(&rhs);
        beta.extend(coef.iter().take(d));
        alpha.extend(coef.iter().skip(d));
    }
    PayoffParams::new(k, d, beta, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{ChoiceProfile, Covariates};
    use crate::network::generate_circle;

    #[test]
    fn identical_players_are_rank_deficient() {
        let state = GameState::new(
            generate_circle(20).unwrap(),
            Covariates::from_rows(&vec![vec![1.0, 0.5]; 20]).unwrap(),
        )
        .unwrap();
        let probs = ChoiceProfile::from_rows(&vec![vec![0.4, 0.6]; 20]).unwrap();
        let diag = ident_diagnostics(&state, &probs).unwrap();
        assert!(diag.singular);
        assert!(diag.min_eigenvalue.abs() < 1e-12);
        assert!(invert_probabilities(&state, &probs).is_err());
        assert!((diag.phi_mean[0] - 1.2).abs() < 1e-12);
        assert!((diag.delta_mean[0] - (0.6f64 / 0.4).ln()).abs() < 1e-12);
    }
}
