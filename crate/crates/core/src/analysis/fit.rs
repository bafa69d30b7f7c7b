//! Exponential-decay and light-cone fits on defect data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Defects at or below this are treated as numerically zero.
pub const DEFECT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Defect divided by the largest region size before fitting.
    PerMaxregion,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c_est: f64,
    pub kappa_est: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// Points at or below the floor, left out of the regression.
    pub points_excluded: usize,
    pub normalization: Normalization,
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r²)`.
fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= 1e-24 {
        1.0
    } else {
        0.0
    };
    (a, b, r2)
}

/// Fit `defect ≈ c e^{−κτ}` by least squares on `ln defect`. Under
/// [`Normalization::PerMaxregion`] each defect is first divided by
/// `max_region`.
pub fn fit_decay(
    points: &[(f64, f64)],
    normalization: Normalization,
    max_region: usize,
) -> Result<DecayFit> {
    let scale = match normalization {
        Normalization::PerMaxregion => max_region.max(1) as f64,
        Normalization::Raw => 1.0,
    };
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut excluded = 0;
    for &(tau, d) in points {
        let d = d / scale;
        if d > DEFECT_FLOOR && d.is_finite() {
            x.push(tau);
            y.push(d.ln());
        } else {
            excluded += 1;
        }
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points above the {DEFECT_FLOOR:e} floor ({excluded} excluded); need 3",
            x.len()
        )));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::InsufficientData(
            "all points share one separation".into(),
        ));
    }
    let (a, b, r2) = linear_regression(&x, &y);
    Ok(DecayFit {
        c_est: a.exp(),
        kappa_est: -b,
        r_squared: r2,
        points_used: x.len(),
        points_excluded: excluded,
        normalization,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightConeFit {
    pub v_est: f64,
    pub kappa_est: f64,
    pub c_est: f64,
    /// Root-mean-square residual of `ln defect` over the points used.
    pub residual: f64,
    pub points_used: usize,
}

/// `ln(e^{x} − 1)` without cancellation for small `x`.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Fit `defect ≈ c e^{−κτ}(e^{κvt} − 1)` on a `(τ, t, defect)` grid.
///
/// `κ` comes from the log-linear slope along `τ` at the largest `t`. With
/// `κ` fixed, `ln c` is profiled out in closed form for each trial `v` and
/// the remaining one-dimensional residual is minimized over `ln v`.
pub fn fit_light_cone(points: &[(f64, f64, f64)]) -> Result<LightConeFit> {
    let usable: Vec<(f64, f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, t, d)| t > 0.0 && d > DEFECT_FLOOR && d.is_finite())
        .collect();
    let mut taus: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let mut ts: Vec<f64> = usable.iter().map(|p| p.1).collect();
    for v in [&mut taus, &mut ts] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    if taus.len() < 3 || ts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "light-cone fit needs 3 separations and 3 positive times above the floor, got {} and {}",
            taus.len(),
            ts.len()
        )));
    }
    let t_max = *ts.last().expect("nonempty");
    let edge: Vec<(f64, f64)> = usable
        .iter()
        .filter(|p| p.1 == t_max)
        .map(|p| (p.0, p.2))
        .collect();
    if edge.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than two separations at the largest time".into(),
        ));
    }
    let ex: Vec<f64> = edge.iter().map(|p| p.0).collect();
    let ey: Vec<f64> = edge.iter().map(|p| p.1.ln()).collect();
    let (_, slope, _) = linear_regression(&ex, &ey);
    let kappa = -slope;
    if !(kappa > 0.0) {
        return Err(Error::NoDecay(format!(
            "no decay along τ at t = {t_max} (κ = {kappa})"
        )));
    }

    // z_i = ln d_i + κτ_i = ln c + ln(e^{κ v t_i} − 1)
    let z: Vec<f64> = usable
        .iter()
        .map(|&(tau, _, d)| d.ln() + kappa * tau)
        .collect();
    let profile = |lnv: f64| -> (f64, f64) {
        let v = lnv.exp();
        let g: Vec<f64> = usable
            .iter()
            .map(|&(_, t, _)| ln_expm1(kappa * v * t))
            .collect();
        let lnc = z.iter().zip(&g).map(|(a, b)| a - b).sum::<f64>() / z.len() as f64;
        let ss = z.iter().zip(&g).map(|(a, b)| (a - b - lnc).powi(2)).sum();
        (lnc, ss)
    };
    // coarse scan, then golden refinement around the best cell
    let (lo, hi, steps) = (-12.0f64, 8.0f64, 400);
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + h * i as f64)
        .map(|x| (x, profile(x).1))
        .fold(
            (lo, f64::INFINITY),
            |acc, p| if p.1 < acc.1 { p } else { acc },
        );
    let lnv = golden_min(|x| profile(x).1, best.0 - h, best.0 + h, 200);
    let (lnc, ss) = profile(lnv);
    let v = lnv.exp();
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::InsufficientData(
            "light-cone velocity did not converge".into(),
        ));
    }
    Ok(LightConeFit {
        v_est: v,
        kappa_est: kappa,
        c_est: lnc.exp(),
        residual: (ss / usable.len() as f64).sqrt(),
        points_used: usable.len(),
    })
}
