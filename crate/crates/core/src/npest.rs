//! Window-matching estimator of `P(Y_i = 1 | 𝕊)` on a circle.
//!
//! On a circle every player's covariate neighbourhood is a sequence
//! `(X_{j(−h)}, ..., X_{j(h)})` read left to right, where `j(ℓ)` is the
//! `|ℓ|`-th neighbour of `j` on the left (`ℓ < 0`) or right (`ℓ > 0`). The
//! estimate for player `i` is the share of `Y_j = 1` among players whose
//! window equals `i`'s. Mirror-image windows do not count as matches.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NpConfig {
    /// Half-width `h` of the matching window.
    pub radius: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NpEstimate {
    pub estimate: f64,
    /// Number of players whose window matched, the target included.
    pub matches: usize,
    pub radius: usize,
}

/// `floor(h0 · ln n)`; `h0 = 0.5 / ln 2` gives `floor(0.5 · log2 n)`.
pub fn default_radius(n: usize, h0: f64) -> usize {
    if n <= 1 {
        return 0;
    }
    let h = h0 * (n as f64).ln();
    (h * (1.0 + 1e-12)).floor() as usize
}

/// The default `h0` for [`default_radius`].
pub const DEFAULT_H0: f64 = 0.5 / std::f64::consts::LN_2;

/// Validated circle layout with integer-coded covariates.
struct Layout<'a> {
    data: &'a Dataset,
    order: Vec<usize>,
    position: Vec<usize>,
}

impl<'a> Layout<'a> {
    fn new(data: &'a Dataset) -> Result<Self> {
        let order = data.state().network().circle_order()?;
        let x = data.state().covariates();
        for i in 0..x.n() {
            if let Some(v) = x.row(i).iter().find(|v| !(v.is_finite() && v.fract() == 0.0)) {
                return Err(Error::InvalidParams(format!(
                    "covariates must be discrete (integer-coded); player {i} has {v}"
                )));
            }
        }
        let mut position = vec![0; order.len()];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        Ok(Self { data, order, position })
    }

    fn n(&self) -> usize {
        self.order.len()
    }

    /// Player at offset `l` from `player`, negative to the left.
    fn at(&self, player: usize, l: isize) -> usize {
        let n = self.n() as isize;
        let p = (self.position[player] as isize + l).rem_euclid(n);
        self.order[p as usize]
    }

    fn window_matches(&self, a: usize, b: usize, radius: usize) -> bool {
        let x = self.data.state().covariates();
        let h = radius as isize;
        (-h..=h).all(|l| x.row(self.at(a, l)) == x.row(self.at(b, l)))
    }

    fn key(&self, player: usize, radius: usize) -> Vec<i64> {
        let x = self.data.state().covariates();
        let h = radius as isize;
        (-h..=h)
            .flat_map(|l| x.row(self.at(player, l)).iter().map(|&v| v as i64))
            .collect()
    }
}

fn check_target(data: &Dataset, target: usize) -> Result<()> {
    if target >= data.n() {
        return Err(Error::PlayerOutOfRange {
            index: target,
            n: data.n(),
        });
    }
    Ok(())
}

/// Estimate for one target by scanning every player's window.
pub fn np_estimate(data: &Dataset, cfg: &NpConfig) -> Result<NpEstimate> {
    check_target(data, cfg.target)?;
    let layout = Layout::new(data)?;
    let (mut matches, mut ones) = (0usize, 0usize);
    for j in 0..data.n() {
        if layout.window_matches(j, cfg.target, cfg.radius) {
            matches += 1;
            ones += usize::from(data.actions()[j] == 1);
        }
    }
    if matches == 0 {
        return Err(Error::NoMatchingWindow { player: cfg.target });
    }
    Ok(NpEstimate {
        estimate: ones as f64 / matches as f64,
        matches,
        radius: cfg.radius,
    })
}

/// Estimates for every player at once, grouping identical windows.
pub fn np_estimate_all(data: &Dataset, radius: usize) -> Result<Vec<NpEstimate>> {
    let layout = Layout::new(data)?;
    let keys: Vec<Vec<i64>> = (0..data.n()).map(|j| layout.key(j, radius)).collect();
    let mut groups: HashMap<&[i64], (usize, usize)> = HashMap::new();
    for (j, key) in keys.iter().enumerate() {
        let entry = groups.entry(key.as_slice()).or_default();
        entry.0 += 1;
        entry.1 += usize::from(data.actions()[j] == 1);
    }
    Ok(keys
        .iter()
        .map(|key| {
            // every key has at least its own player
            let (matches, ones) = groups[key.as_slice()];
            NpEstimate {
                estimate: ones as f64 / matches as f64,
                matches,
                radius,
            }
        })
        .collect())
}
