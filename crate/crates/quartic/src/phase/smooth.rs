/// The canonical smooth step `S`: 0 for `k ≤ 1/2`, 1 for `k ≥ 1`, C^∞ in between.
///
/// `S(k) = g(2k−1) / (g(2k−1) + g(2−2k))` with `g(s) = e^{−1/s}` for `s > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SmoothStep;

impl SmoothStep {
    pub fn value(self, k: f64) -> f64 {
        smooth_step(k)
    }

    pub fn derivative(self, k: f64) -> f64 {
        smooth_step_derivative(k)
    }
}

pub fn smooth_step(k: f64) -> f64 {
    if k.is_nan() {
        return f64::NAN;
    }
    if k <= 0.5 {
        return 0.0;
    }
    if k >= 1.0 {
        return 1.0;
    }
    let u = 2.0 * k - 1.0;
    let v = 2.0 - 2.0 * k;
    // g(v)/g(u) = e^{1/u − 1/v}
    let e = 1.0 / u - 1.0 / v;
    if e > 0.0 {
        let r = (-e).exp();
        r / (1.0 + r)
    } else {
        1.0 / (1.0 + e.exp())
    }
}

/// Closed form `S'(k) = 2 (1/u² + 1/v²) r / (1 + r)²` with `r = g(v)/g(u)`.
pub fn smooth_step_derivative(k: f64) -> f64 {
    if k.is_nan() {
        return f64::NAN;
    }
    if k <= 0.5 || k >= 1.0 {
        return 0.0;
    }
    let u = 2.0 * k - 1.0;
    let v = 2.0 - 2.0 * k;
    let e = (1.0 / u - 1.0 / v).abs();
    // r/(1+r)² is symmetric under r → 1/r, so use the decaying branch
    let r = (-e).exp();
    if r == 0.0 {
        return 0.0;
    }
    2.0 * (1.0 / (u * u) + 1.0 / (v * v)) * r / ((1.0 + r) * (1.0 + r))
}
