//! Empirical ε from fitted constants, and the critical separation τ*.

use serde::{Deserialize, Serialize};

use super::fit::{DecayFit, LightConeFit};
use crate::bell::CoefficientSums;
use crate::error::{Error, Result};

/// Which clustering statement the state is assumed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateFamily {
    Ground,
    Gibbs {
        beta: f64,
    },
    Evolved {
        t: f64,
    },
    /// No clustering statement; the ground-state forms are reported.
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonVariant {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub variants: Vec<EpsilonVariant>,
    pub min: f64,
    pub min_label: String,
}

/// Every applicable ε for the family and the smallest one.
///
/// Ground (and `Other`): `{η, γ, γ̂}·c e^{−κτ}|X|`. Gibbs: the same without
/// `|X|`. Evolved: `η c e^{−κτ}(e^{κvt}−1) Π|X_i|`, `μ c e^{−κτ}(e^{κvt}−1)`
/// and `μ̂ c e^{−κτ}(e^{κvt}−1)`, with `c, κ` taken from the light-cone fit.
pub fn epsilon_bound(
    family: StateFamily,
    fit: Option<&DecayFit>,
    light_cone: Option<&LightConeFit>,
    sums: &CoefficientSums,
    region_sizes: &[usize],
    tau: f64,
) -> Result<EpsilonReport> {
    let max_region = region_sizes.iter().copied().max().unwrap_or(0) as f64;
    let mut variants = Vec::new();
    let mut push = |label: &str, value: f64| {
        variants.push(EpsilonVariant {
            label: label.to_string(),
            value,
        })
    };
    match family {
        StateFamily::Ground | StateFamily::Other | StateFamily::Gibbs { .. } => {
            let fit = fit.ok_or_else(|| Error::Config("ε needs a decay fit".into()))?;
            let size = if matches!(family, StateFamily::Gibbs { .. }) {
                1.0
            } else {
                max_region
            };
            let base = fit.c_est * (-fit.kappa_est * tau).exp() * size;
            push("eta", sums.eta * base);
            push("gamma", sums.gamma * base);
            push("gamma_hat", sums.gamma_hat * base);
        }
        StateFamily::Evolved { t } => {
            let lc = light_cone.ok_or_else(|| {
                Error::Config("time-dependent ε needs a light-cone velocity".into())
            })?;
            let base =
                lc.c_est * (-lc.kappa_est * tau).exp() * (lc.kappa_est * lc.v_est * t).exp_m1();
            let product: f64 = region_sizes.iter().map(|&s| s as f64).product();
            push("eta_product", sums.eta * base * product);
            push("mu", sums.mu * base);
            push("mu_hat", sums.mu_hat * base);
        }
    }
    let best = variants
        .iter()
        .fold(None::<&EpsilonVariant>, |acc, v| match acc {
            Some(a) if a.value <= v.value => Some(a),
            _ => Some(v),
        })
        .expect("at least one variant")
        .clone();
    Ok(EpsilonReport {
        min: best.value,
        min_label: best.label,
        variants,
    })
}

pub const DEFAULT_DELTA: f64 = 0.01;

/// `τ* = ln(prefactor·c/δ)/κ`, clamped at zero.
pub fn tau_star(fit: &DecayFit, delta: f64, prefactor: f64) -> Result<f64> {
    if !(delta > 0.0) || !(prefactor > 0.0) {
        return Err(Error::Domain(format!(
            "δ = {delta} and prefactor = {prefactor} must be positive"
        )));
    }
    if !(fit.kappa_est > 0.0) {
        return Err(Error::NoDecay(format!(
            "κ = {} gives no finite τ*",
            fit.kappa_est
        )));
    }
    Ok(((prefactor * fit.c_est / delta).ln() / fit.kappa_est).max(0.0))
}
