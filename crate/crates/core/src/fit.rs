//! Least-squares fits used by the convergence studies.

use crate::error::{Error, Result};
use crate::Real;

/// Result of a log-log regression `y ~ exp(intercept) * x^slope`.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct OrderFit<T: Real> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    /// False when max(x)/min(x) < 4; the slope estimate is then based on a
    /// narrow range and should be read as indicative only.
    pub span_ok: bool,
}

/// Fits a convergence order through `(x, y)` samples in log-log coordinates.
/// Needs at least 3 samples with strictly positive coordinates.
pub fn fit_order<T: Real>(xs: &[T], ys: &[T]) -> Result<OrderFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::Fit("mismatched sample lengths".into()));
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", xs.len())));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > T::zero()) || !(y > T::zero()) {
            return Err(Error::Fit(
                "order fit requires strictly positive samples".into(),
            ));
        }
    }

    let lx: Vec<T> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|&y| y.ln()).collect();
    let n = T::of(xs.len() as f64);
    let mean_x = lx.iter().copied().sum::<T>() / n;
    let mean_y = ly.iter().copied().sum::<T>() / n;

    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in lx.iter().zip(&ly) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() {
        return Err(Error::Fit("all x samples coincide".into()));
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = syy - slope * sxy;
    let r_squared = if syy > T::zero() {
        (T::one() - ss_res / syy).max(T::zero())
    } else {
        T::one()
    };

    let xmax = xs.iter().copied().fold(T::zero(), T::max);
    let xmin = xs.iter().copied().fold(T::infinity(), T::min);
    Ok(OrderFit {
        slope,
        intercept,
        r_squared,
        span_ok: xmax / xmin >= T::of(4.0),
    })
}

/// Result of a two-regressor linear fit `y ~ c1 * u + c2 * w` (no intercept).
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct TwoTermFit<T: Real> {
    pub c1: T,
    pub c2: T,
    pub r_squared: T,
}

/// Least-squares fit of `y` against two regressor columns.
pub fn fit_two_term<T: Real>(design: &[[T; 2]], ys: &[T]) -> Result<TwoTermFit<T>> {
    if design.len() != ys.len() {
        return Err(Error::Fit("mismatched sample lengths".into()));
    }
    if design.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", design.len())));
    }

    // normal equations for the 2-column design matrix
    let mut a11 = T::zero();
    let mut a12 = T::zero();
    let mut a22 = T::zero();
    let mut b1 = T::zero();
    let mut b2 = T::zero();
    for (row, &y) in design.iter().zip(ys) {
        a11 = a11 + row[0] * row[0];
        a12 = a12 + row[0] * row[1];
        a22 = a22 + row[1] * row[1];
        b1 = b1 + row[0] * y;
        b2 = b2 + row[1] * y;
    }
    let det = a11 * a22 - a12 * a12;
    let scale = a11 * a22;
    if det.abs() <= T::of(1e-12) * scale.max(T::of(1e-300)) {
        return Err(Error::Fit("degenerate design matrix".into()));
    }
    let c1 = (b1 * a22 - b2 * a12) / det;
    let c2 = (b2 * a11 - b1 * a12) / det;

    let n = T::of(ys.len() as f64);
    let mean_y = ys.iter().copied().sum::<T>() / n;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for (row, &y) in design.iter().zip(ys) {
        let pred = c1 * row[0] + c2 * row[1];
        ss_res = ss_res + (y - pred) * (y - pred);
        ss_tot = ss_tot + (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot > T::zero() {
        (T::one() - ss_res / ss_tot).max(T::zero())
    } else {
        T::one()
    };

    Ok(TwoTermFit { c1, c2, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_power_law() {
        let xs: Vec<f64> = vec![0.025, 0.05, 0.1, 0.2];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(2.5)).collect();
        let fit = fit_order(&xs, &ys).unwrap();
        assert!((fit.slope - 2.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert!(fit.span_ok);
    }

    #[test]
    fn tolerates_multiplicative_noise() {
        let xs: Vec<f64> = vec![0.02, 0.04, 0.08, 0.16, 0.32];
        let noise = [1.08, 0.94, 1.03, 0.97, 1.05];
        let ys: Vec<f64> = xs
            .iter()
            .zip(&noise)
            .map(|(x, n)| 0.7 * x * x * n)
            .collect();
        let fit = fit_order(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.1, "slope {}", fit.slope);
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn narrow_span_is_flagged_not_rejected() {
        let xs: Vec<f64> = vec![0.1, 0.15, 0.2];
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let fit = fit_order(&xs, &ys).unwrap();
        assert!(!fit.span_ok);
        assert!((fit.slope - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(fit_order(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_order(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_order(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn two_term_fit_recovers_planted_coefficients() {
        let mut design = Vec::new();
        let mut ys = Vec::new();
        for &a in &[0.05f64, 0.1, 0.2] {
            for &e in &[0.1f64, 0.2] {
                design.push([a * a, e * e * a]);
                ys.push(2.0 * a * a + 0.5 * e * e * a);
            }
        }
        let fit = fit_two_term(&design, &ys).unwrap();
        assert!((fit.c1 - 2.0).abs() < 1e-10);
        assert!((fit.c2 - 0.5).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn two_term_fit_rejects_collinear_design() {
        let design = vec![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let ys = vec![1.0, 2.0, 3.0];
        assert!(fit_two_term(&design, &ys).is_err());
    }
}
