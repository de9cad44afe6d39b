//! Central finite-difference gradient checking.
//!
//! The checker only evaluates a scalar function at perturbed points; it
//! knows nothing about the ops under test, which keeps it an independent
//! oracle for the hand-derived backward passes.

/// Denominator floor for relative errors, so that gradients which are zero
/// up to round-off do not produce spurious huge ratios.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub max_abs_err: f64,
    /// Index of the coordinate with the largest relative error.
    pub worst_index: usize,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn merge(self, other: GradCheckReport) -> GradCheckReport {
        let worse = if other.max_rel_err > self.max_rel_err { other } else { self };
        GradCheckReport {
            max_rel_err: worse.max_rel_err,
            max_abs_err: self.max_abs_err.max(other.max_abs_err),
            worst_index: worse.worst_index,
            checked: self.checked + other.checked,
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Central-difference derivative of `f` along each coordinate of `x`.
/// `x` is restored after every probe.
pub fn numeric_gradient<F>(x: &mut [f64], h: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let up = f(x);
            x[i] = orig - h;
            let down = f(x);
            x[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Compares `analytic` with the central-difference gradient of `f` at `x`.
pub fn check_gradient<F>(x: &mut [f64], analytic: &[f64], h: f64, f: F) -> GradCheckReport
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x.len(), analytic.len(), "analytic gradient length");
    let numeric = numeric_gradient(x, h, f);
    compare(analytic, &numeric)
}

pub fn compare(analytic: &[f64], numeric: &[f64]) -> GradCheckReport {
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        max_abs_err: 0.0,
        worst_index: 0,
        checked: analytic.len(),
    };
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let rel = relative_error(a, n);
        report.max_abs_err = report.max_abs_err.max((a - n).abs());
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_index = i;
        }
    }
    report
}
