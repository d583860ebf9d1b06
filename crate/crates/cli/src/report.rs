//! Human-readable summaries.

use std::fmt::Write;

use netgame_core::{EstimateResult, PayoffParams};

/// Two-sided normal critical values for the 10% and 5% levels.
const Z_10: f64 = 1.645;
const Z_05: f64 = 1.96;

pub fn stars(estimate: f64, se: Option<f64>) -> &'static str {
    match se {
        Some(s) if s > 0.0 => {
            let z = (estimate / s).abs();
            if z > Z_05 {
                "**"
            } else if z > Z_10 {
                "*"
            } else {
                ""
            }
        }
        _ => "",
    }
}

/// Label of every stacked coordinate, e.g. `beta[1].age` or `alpha[1][2]`.
pub fn coordinate_labels(params: &PayoffParams, names: &[String]) -> Vec<String> {
    let mut labels = vec![String::new(); params.dim()];
    for k in 0..params.k() {
        for (c, name) in names.iter().enumerate().take(params.d()) {
            labels[params.beta_index(k, c)] = format!("beta[{}].{name}", k + 1);
        }
        for l in 0..params.k() {
            labels[params.alpha_index(k, l)] = format!("alpha[{}][{}]", k + 1, l + 1);
        }
    }
    labels
}

/// Coefficient table: one block per non-baseline action, covariates first,
/// then the friend shares.
pub fn coefficient_table(fit: &EstimateResult, names: &[String], n: usize) -> String {
    let p = &fit.theta_hat;
    let theta = p.to_vector();
    let mut rows: Vec<(String, Option<usize>)> = Vec::new();
    for k in 0..p.k() {
        rows.push((format!("Action {}", k + 1), None));
        for (c, name) in names.iter().enumerate() {
            rows.push((format!("  {name}"), Some(p.beta_index(k, c))));
        }
        for l in 0..p.k() {
            rows.push((format!("  friends choosing {}", l + 1), Some(p.alpha_index(k, l))));
        }
    }
    let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0).max(8);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "Approximate MLE, h = {}, n = {n}, log-likelihood = {:.4}{}",
        fit.h_used,
        fit.loglik_total,
        if fit.converged { "" } else { " (not converged)" }
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:width$}  {:>12}  {:>12}", "", "Estimate", "S.E.");
    for (label, idx) in rows {
        match idx {
            None => {
                let _ = writeln!(out, "{label}");
            }
            Some(i) => {
                let est = theta[i];
                let se = fit.std_errors[i];
                let se_text = match se {
                    Some(s) => format!("({s:.4})"),
                    None if fit.fixed[i] => "(fixed)".to_owned(),
                    None => "(n/a)".to_owned(),
                };
                let est_text = format!("{est:.4}{:<2}", stars(est, se));
                let _ = writeln!(out, "{label:width$}  {est_text:>12}  {se_text:>12}");
            }
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "* significant at 10% level; ** significant at 5% level");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(1.7, Some(1.0)), "*");
        assert_eq!(stars(-2.0, Some(1.0)), "**");
        assert_eq!(stars(1.6, Some(1.0)), "");
        assert_eq!(stars(5.0, None), "");
    }

    #[test]
    fn labels_follow_stacking() {
        let p = PayoffParams::zeros(2, 2);
        let names = vec!["a".to_owned(), "b".to_owned()];
        let labels = coordinate_labels(&p, &names);
        assert_eq!(
            labels,
            [
                "beta[1].a",
                "beta[1].b",
                "alpha[1][1]",
                "alpha[1][2]",
                "beta[2].a",
                "beta[2].b",
                "alpha[2][1]",
                "alpha[2][2]"
            ]
        );
    }
}
