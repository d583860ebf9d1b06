//! Projected BFGS for smooth maximisation over a box.
//!
//! Works on the minimisation of `−f`. Bounds apply per coordinate (use
//! infinities for free coordinates); coordinates can also be frozen
//! entirely. At each iterate the variables sitting on a bound with the
//! gradient pushing outward are held fixed, the quasi-Newton direction is
//! taken over the rest, and an Armijo backtracking search runs along the
//! projected path.

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    /// Converged when the projected gradient's sup-norm is at most this.
    pub gtol: f64,
    /// Stop when an accepted step moves no coordinate by more than this.
    pub xtol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// Tolerance for every subnetwork fixed point.
    pub solve_tol: f64,
    pub solve_max_iter: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            gtol: 1e-6,
            xtol: 1e-9,
            max_iter: 500,
            max_backtracks: 50,
            solve_tol: crate::game::DEFAULT_TOL,
            solve_max_iter: crate::game::DEFAULT_MAX_ITER,
        }
    }
}

/// Why the optimiser stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Gradient,
    StepSize,
    LineSearchFailed,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerTrace {
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
    /// Sup-norm of the projected gradient at the returned point.
    pub gradient_norm: f64,
    /// Objective value after each accepted step, starting point first.
    pub values: Vec<f64>,
}

/// Result of one objective evaluation.
pub struct Point {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Evaluation hit a numerical safeguard; the line search rejects it.
    pub rejected: bool,
}

pub struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub converged: bool,
    pub trace: OptimizerTrace,
}

pub struct Problem<'b> {
    pub lower: &'b [f64],
    pub upper: &'b [f64],
    pub frozen: &'b [bool],
}

impl Problem<'_> {
    fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Coordinates that may move this iteration, given the ascent gradient.
    fn free(&self, x: &[f64], g: &[f64]) -> Vec<bool> {
        (0..x.len())
            .map(|i| {
                if self.frozen[i] {
                    return false;
                }
                let at_lo = x[i] <= self.lower[i] && g[i] < 0.0;
                let at_hi = x[i] >= self.upper[i] && g[i] > 0.0;
                !(at_lo || at_hi)
            })
            .collect()
    }

    fn projected_gradient_norm(&self, x: &[f64], g: &[f64]) -> f64 {
        let free = self.free(x, g);
        g.iter()
            .zip(&free)
            .filter(|(_, &f)| f)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Maximises `eval` from `x0`.
pub fn maximize<F>(problem: &Problem<'_>, x0: &[f64], settings: &OptimizerSettings, mut eval: F) -> Result<Outcome>
where
    F: FnMut(&[f64]) -> Result<Point>,
{
    let p = x0.len();
    let mut x = x0.to_vec();
    problem.project(&mut x);
    let mut here = eval(&x)?;
    let mut evaluations = 1;
    let mut values = vec![here.value];
    // inverse Hessian of −f
    let mut hinv = identity(p);
    let mut fresh = true;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < settings.max_iter {
        let gnorm = problem.projected_gradient_norm(&x, &here.gradient);
        if gnorm <= settings.gtol {
            stop = StopReason::Gradient;
            break;
        }
        iterations += 1;
        let free = problem.free(&x, &here.gradient);

        // ascent direction d = H g over free coordinates
        let mut dir = vec![0.0; p];
        for i in (0..p).filter(|&i| free[i]) {
            dir[i] = (0..p)
                .filter(|&j| free[j])
                .map(|j| hinv[i * p + j] * here.gradient[j])
                .sum();
        }
        if dot(&dir, &here.gradient) <= 0.0 {
            hinv = identity(p);
            fresh = true;
            for i in 0..p {
                dir[i] = if free[i] { here.gradient[i] } else { 0.0 };
            }
        }

        let accepted = loop {
            match line_search(problem, &x, &here, &dir, settings, &mut eval, &mut evaluations)? {
                Some(found) => break Some(found),
                None if !fresh => {
                    hinv = identity(p);
                    fresh = true;
                    for i in 0..p {
                        dir[i] = if free[i] { here.gradient[i] } else { 0.0 };
                    }
                }
                None => break None,
            }
        };
        let Some((x_new, there)) = accepted else {
            stop = StopReason::LineSearchFailed;
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // gradient change of −f
        let yv: Vec<f64> = there.gradient.iter().zip(&here.gradient).map(|(a, b)| b - a).collect();
        let step = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x = x_new;
        here = there;
        values.push(here.value);

        let sy = dot(&s, &yv);
        if sy > 1e-12 * norm(&s) * norm(&yv) {
            if fresh {
                let scale = sy / dot(&yv, &yv);
                hinv.iter_mut().for_each(|v| *v *= scale);
                fresh = false;
            }
            bfgs_update(&mut hinv, &s, &yv, sy);
        }

        if step <= settings.xtol {
            stop = StopReason::StepSize;
            break;
        }
    }

    let gradient_norm = problem.projected_gradient_norm(&x, &here.gradient);
    Ok(Outcome {
        converged: gradient_norm <= settings.gtol,
        value: here.value,
        gradient: here.gradient,
        x,
        trace: OptimizerTrace {
            iterations,
            evaluations,
            stop: if gradient_norm <= settings.gtol {
                StopReason::Gradient
            } else {
                stop
            },
            gradient_norm,
            values,
        },
    })
}

fn line_search<F>(
    problem: &Problem<'_>,
    x: &[f64],
    here: &Point,
    dir: &[f64],
    settings: &OptimizerSettings,
    eval: &mut F,
    evaluations: &mut usize,
) -> Result<Option<(Vec<f64>, Point)>>
where
    F: FnMut(&[f64]) -> Result<Point>,
{
    const ARMIJO: f64 = 1e-4;
    // objective changes below this are lost in rounding
    let resolution = 64.0 * f64::EPSILON * (1.0 + here.value.abs());
    let here_gnorm = problem.projected_gradient_norm(x, &here.gradient);
    let mut t = 1.0;
    for _ in 0..settings.max_backtracks {
        let mut trial: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        problem.project(&mut trial);
        let moved: Vec<f64> = trial.iter().zip(x).map(|(a, b)| a - b).collect();
        if moved.iter().all(|v| *v == 0.0) {
            return Ok(None);
        }
        let candidate = eval(&trial);
        *evaluations += 1;
        match candidate {
            Ok(pt) if !pt.rejected && pt.value.is_finite() => {
                let predicted = dot(&here.gradient, &moved);
                if pt.value >= here.value + ARMIJO * predicted {
                    return Ok(Some((trial, pt)));
                }
                // Near the optimum the predicted gain drops below what the
                // objective can resolve; fall back to requiring a smaller
                // projected gradient at no measurable loss.
                if predicted <= resolution
                    && pt.value >= here.value - resolution
                    && problem.projected_gradient_norm(&trial, &pt.gradient) < here_gnorm
                {
                    return Ok(Some((trial, pt)));
                }
            }
            // a failed solve at a trial point is treated like a rejected step
            Ok(_) => {}
            Err(e) if e.is_numerical() => {}
            Err(e) => return Err(e),
        }
        t *= 0.5;
    }
    Ok(None)
}

fn identity(p: usize) -> Vec<f64> {
    let mut m = vec![0.0; p * p];
    for i in 0..p {
        m[i * p + i] = 1.0;
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `H ← (I − ρ s y') H (I − ρ y s') + ρ s s'`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let p = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..p).map(|i| (0..p).map(|j| h[i * p + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    for i in 0..p {
        for j in 0..p {
            h[i * p + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(x: &[f64]) -> Result<Point> {
        // maximum at (1, -2) with correlated curvature
        let (a, b) = (x[0] - 1.0, x[1] + 2.0);
        Ok(Point {
            value: -(2.0 * a * a + a * b + b * b),
            gradient: vec![-(4.0 * a + b), -(a + 2.0 * b)],
            rejected: false,
        })
    }

    #[test]
    fn finds_interior_maximum() {
        let inf = [f64::INFINITY; 2];
        let ninf = [f64::NEG_INFINITY; 2];
        let prob = Problem {
            lower: &ninf,
            upper: &inf,
            frozen: &[false, false],
        };
        let out = maximize(&prob, &[5.0, 5.0], &OptimizerSettings::default(), quad).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] + 2.0).abs() < 1e-6);
        assert!(out.trace.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn respects_bounds() {
        let prob = Problem {
            lower: &[f64::NEG_INFINITY, 0.0],
            upper: &[f64::INFINITY, 10.0],
            frozen: &[false, false],
        };
        let out = maximize(&prob, &[0.0, 3.0], &OptimizerSettings::default(), quad).unwrap();
        assert!(out.converged);
        assert_eq!(out.x[1], 0.0);
        // with b pinned at 2, the best a solves 4a + 2 = 0, so x0 = 0.5
        assert!((out.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn frozen_coordinates_stay_put() {
        let inf = [f64::INFINITY; 2];
        let ninf = [f64::NEG_INFINITY; 2];
        let prob = Problem {
            lower: &ninf,
            upper: &inf,
            frozen: &[false, true],
        };
        let out = maximize(&prob, &[0.0, 7.0], &OptimizerSettings::default(), quad).unwrap();
        assert_eq!(out.x[1], 7.0);
        // b = 9: 4a + 9 = 0, so x0 = a + 1 = -1.25
        assert!((out.x[0] + 1.25).abs() < 1e-6);
    }
}
