//! Shared helpers and independent oracles for the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use netgame_core::rng::SimRng;
use netgame_core::{ChoiceProfile, Covariates, PayoffParams};
use rand::Rng;

/// Random `θ` with `λ(θ)` equal to `lambda` and `β` entries in `(-1, 1)`.
pub fn random_params(rng: &mut SimRng, k: usize, d: usize, lambda: f64) -> PayoffParams {
    let beta: Vec<f64> = (0..k * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let raw: Vec<f64> = (0..k * k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let unit = PayoffParams::new(k, d, beta.clone(), raw.clone()).unwrap().lambda();
    let alpha = raw.iter().map(|a| a * lambda / unit).collect();
    PayoffParams::new(k, d, beta, alpha).unwrap()
}

/// Rows drawn uniformly-ish from the interior of the simplex.
pub fn random_simplex_profile(rng: &mut SimRng, n: usize, k: usize) -> ChoiceProfile {
    let mut data = Vec::with_capacity(n * (k + 1));
    for _ in 0..n {
        let w: Vec<f64> = (0..=k).map(|_| -rng.random_range(1e-9..1.0f64).ln()).collect();
        let total: f64 = w.iter().sum();
        data.extend(w.iter().map(|v| v / total));
    }
    ChoiceProfile::new(k + 1, data).unwrap()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..m {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Multinomial logit probabilities `(p_0, ..., p_K)` at one covariate row.
pub fn logit_probs(beta: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let u: Vec<f64> = std::iter::once(0.0)
        .chain(beta.iter().map(|b| b.iter().zip(x).map(|(p, q)| p * q).sum()))
        .collect();
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = u.iter().map(|v| (v - top).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|v| v / z).collect()
}

/// Average multinomial logit log-likelihood.
pub fn logit_loglik(beta: &[Vec<f64>], x: &Covariates, y: &[usize]) -> f64 {
    (0..x.n()).map(|i| logit_probs(beta, x.row(i))[y[i]].ln()).sum::<f64>() / x.n() as f64
}

/// Multinomial logit MLE by damped Newton-Raphson with the exact Hessian.
/// Returns `β` as `K` rows of length `d`.
pub fn logit_mle(x: &Covariates, y: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = x.d();
    let p = k * d;
    let n = x.n() as f64;
    let mut beta = vec![vec![0.0; d]; k];
    for _ in 0..200 {
        let mut grad = vec![0.0; p];
        let mut hess = vec![vec![0.0; p]; p];
        for i in 0..x.n() {
            let xi = x.row(i);
            let pr = logit_probs(&beta, xi);
            for a in 0..k {
                let resid = f64::from(u8::from(y[i] == a + 1)) - pr[a + 1];
                for c in 0..d {
                    grad[a * d + c] += resid * xi[c] / n;
                }
                for b in 0..k {
                    let w = pr[a + 1] * (f64::from(u8::from(a == b)) - pr[b + 1]);
                    for c in 0..d {
                        for e in 0..d {
                            hess[a * d + c][b * d + e] += w * xi[c] * xi[e] / n;
                        }
                    }
                }
            }
        }
        if grad.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-14 {
            break;
        }
        // Newton step solves (−H) s = g with −H the information matrix
        let step = gauss_solve(hess, grad);
        let base = logit_loglik(&beta, x, y);
        let mut t = 1.0;
        loop {
            let trial: Vec<Vec<f64>> = (0..k)
                .map(|a| (0..d).map(|c| beta[a][c] + t * step[a * d + c]).collect())
                .collect();
            if logit_loglik(&trial, x, y) >= base - 1e-15 || t < 1e-10 {
                beta = trial;
                break;
            }
            t *= 0.5;
        }
    }
    beta
}
