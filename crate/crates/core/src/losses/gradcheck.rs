//! Central finite-difference verification of analytic gradients.

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheckReport {
    /// Coordinates compared.
    pub checked: usize,
    /// Coordinates skipped because a kink lies within one step.
    pub skipped_kinks: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
}

/// Compares `analytic[i]` with `(f(x + h·e_i) − f(x − h·e_i)) / 2h` for every
/// `i` in `indices`.
///
/// The losses are piecewise linear in the depth values, so the forward and
/// backward one-sided slopes agree away from L1 kinks; coordinates where they
/// disagree are counted in `skipped_kinks` instead of being compared.
/// Relative errors are taken against the larger of the slope and the
/// rounding resolution `8ε·|f| / step` of the difference quotient.
pub fn check_gradient<F>(
    f: F,
    x: &[f64],
    analytic: &[f64],
    indices: &[usize],
    step: f64,
) -> Result<GradCheckReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let f0 = f(&probe)?;
    let mut report = GradCheckReport {
        checked: 0,
        skipped_kinks: 0,
        max_rel_error: 0.0,
        max_abs_error: 0.0,
    };
    for &i in indices {
        let orig = probe[i];
        probe[i] = orig + step;
        let fp = f(&probe)?;
        probe[i] = orig - step;
        let fm = f(&probe)?;
        probe[i] = orig;

        let fwd = (fp - f0) / step;
        let bwd = (f0 - fm) / step;
        if (fwd - bwd).abs() > 1e-6 * fwd.abs().max(bwd.abs()) + 1e-11 {
            report.skipped_kinks += 1;
            continue;
        }
        let numeric = (fp - fm) / (2.0 * step);
        let abs_err = (numeric - analytic[i]).abs();
        // slopes smaller than the difference quotient can resolve are
        // compared against that resolution instead of themselves
        let resolution = 8.0 * f64::EPSILON * f0.abs().max(fp.abs()).max(fm.abs()) / step;
        let scale = numeric.abs().max(analytic[i].abs()).max(resolution);
        let rel = if scale == 0.0 { 0.0 } else { abs_err / scale };
        report.checked += 1;
        report.max_rel_error = report.max_rel_error.max(rel);
        report.max_abs_error = report.max_abs_error.max(abs_err);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_function_passes() {
        let f = |x: &[f64]| Ok(3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2]);
        let r = check_gradient(f, &[1.0, 2.0, 3.0], &[3.0, -2.0, 0.5], &[0, 1, 2], 1e-4).unwrap();
        assert_eq!(r.checked, 3);
        assert!(r.max_rel_error < 1e-9);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let f = |x: &[f64]| Ok(3.0 * x[0]);
        let r = check_gradient(f, &[1.0], &[2.0], &[0], 1e-4).unwrap();
        assert!(r.max_rel_error > 0.3);
    }

    #[test]
    fn kinks_are_skipped() {
        let f = |x: &[f64]| Ok(x[0].abs());
        let r = check_gradient(f, &[0.0], &[0.0], &[0], 1e-4).unwrap();
        assert_eq!(r.checked, 0);
        assert_eq!(r.skipped_kinks, 1);
    }

    #[test]
    fn small_wrong_slope_is_caught() {
        let f = |x: &[f64]| Ok(1.0 + 1e-8 * x[0]);
        let r = check_gradient(f, &[1.0], &[2e-8], &[0], 1e-4).unwrap();
        assert!(r.max_rel_error > 0.3, "{r:?}");
    }
}
