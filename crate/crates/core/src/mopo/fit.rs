use serde::Serialize;

use crate::error::{Error, Result};

/// Variances this far below the vacuum level are treated as measurement
/// noise and accepted; anything lower is rejected as not a gain curve.
const VARIANCE_FLOOR_TOL: f64 = 0.2;

/// Golden-section iteration cap. The bracket shrinks by ~0.618 per step, so
/// 200 steps reach machine precision with a huge margin; hitting the cap
/// means the objective is pathological and the fit reports non-convergence.
const MAX_ITERATIONS: usize = 200;

/// Result of fitting the single-parameter gain model
/// `a(I) = (cosh(g√I) + 1)/2`.
///
/// `converged` is false only when the bounded search exhausted its iteration
/// budget; `g` and `residual` then carry the best point found so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainFit {
    pub g: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Least-squares fit of `a(I) = (cosh(g√I) + 1)/2` over g ≥ 0 to measured
/// (intensity, variance) points.
///
/// The search is a deterministic coarse scan plus golden-section refinement,
/// so equal inputs give bit-equal results. `residual` is the sum of squared
/// deviations at the returned g.
pub fn fit_gain_curve(points: &[(f64, f64)]) -> Result<GainFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "gain fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(intensity, variance) in points {
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(Error::invalid(format!(
                "gain fit needs intensities >= 0, got {intensity}"
            )));
        }
        if !variance.is_finite() || variance < 1.0 - VARIANCE_FLOOR_TOL {
            return Err(Error::invalid(format!(
                "gain fit needs variances >= {}, got {variance}",
                1.0 - VARIANCE_FLOOR_TOL
            )));
        }
    }

    let objective = |g: f64| -> f64 {
        points
            .iter()
            .map(|&(intensity, variance)| {
                let model = (f64::cosh(g * intensity.sqrt()) + 1.0) / 2.0;
                let r = model - variance;
                r * r
            })
            .sum()
    };

    // Upper bound for g: the model through the largest measured variance,
    // with headroom. cosh grows fast enough that doubling a few times
    // always brackets the minimum.
    let max_intensity = points
        .iter()
        .map(|&(i, _)| i)
        .fold(0.0_f64, f64::max);
    if max_intensity == 0.0 {
        let residual = objective(0.0);
        return Ok(GainFit {
            g: 0.0,
            residual,
            converged: true,
        });
    }
    let max_variance = points.iter().map(|&(_, v)| v).fold(1.0_f64, f64::max);
    let target = (2.0 * max_variance - 1.0).max(1.0);
    let mut hi = (2.0 * target.acosh().max(1.0)) / max_intensity.sqrt();
    let mut tries = 0;
    while objective(hi * 2.0) < objective(hi) && tries < 8 {
        // Minimum might sit above the heuristic bound; expand until the
        // objective turns upward.
        hi *= 2.0;
        tries += 1;
    }

    // Coarse scan to isolate the basin, then golden-section inside it.
    const SCAN: usize = 256;
    let mut best_k = 0;
    let mut best_val = f64::INFINITY;
    for k in 0..=SCAN {
        let g = hi * k as f64 / SCAN as f64;
        let val = objective(g);
        if val < best_val {
            best_val = val;
            best_k = k;
        }
    }
    let step = hi / SCAN as f64;
    let mut lo = step * best_k.saturating_sub(1) as f64;
    let mut up = (step * (best_k + 1) as f64).min(hi);

    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = up - inv_phi * (up - lo);
    let mut d = lo + inv_phi * (up - lo);
    let mut fc = objective(c);
    let mut fd = objective(d);
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        if (up - lo).abs() <= 1e-12 * (1.0 + lo.abs() + up.abs()) {
            converged = true;
            break;
        }
        if fc < fd {
            up = d;
            d = c;
            fd = fc;
            c = up - inv_phi * (up - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (up - lo);
            fd = objective(d);
        }
    }
    let mut g = (lo + up) / 2.0;
    let mut residual = objective(g);
    // The search cannot land exactly on the g = 0 boundary; snap to it when
    // it is at least as good, so flat data reports zero gain exactly.
    let at_zero = objective(0.0);
    if at_zero <= residual {
        g = 0.0;
        residual = at_zero;
    }
    Ok(GainFit {
        g,
        residual,
        converged,
    })
}
