//! Link head-loss laws.

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.80665;

/// Hazen-Williams flow exponent.
pub const HW_EXPONENT: f64 = 1.852;

/// Below this flow (m³/s) the friction derivative is frozen at its value
/// here, which keeps the Newton step finite at zero flow.
pub const ZERO_FLOW: f64 = 1e-8;

/// Resistance `r` of the Hazen-Williams law `h = r·|Q|^1.852` (SI units).
pub fn hazen_williams_resistance(length: f64, diameter: f64, roughness: f64) -> f64 {
    10.667 * length / (roughness.powf(HW_EXPONENT) * diameter.powf(4.871))
}

/// Friction head loss (m) of a pipe carrying `flow` m³/s; odd in `flow`.
pub fn hazen_williams_headloss(flow: f64, length: f64, diameter: f64, roughness: f64) -> f64 {
    let r = hazen_williams_resistance(length, diameter, roughness);
    r * flow.signum() * flow.abs().powf(HW_EXPONENT)
}

/// Head loss and its (regularised) derivative for resistance `r`.
pub(crate) fn hw_loss_and_gradient(r: f64, flow: f64) -> (f64, f64) {
    let q = flow.abs();
    let loss = if q == 0.0 {
        0.0
    } else {
        r * flow.signum() * q.powf(HW_EXPONENT)
    };
    let grad = HW_EXPONENT * r * q.max(ZERO_FLOW).powf(HW_EXPONENT - 1.0);
    (loss, grad)
}

/// Minor-loss resistance `K/(2gA²)` so that `h = r·Q|Q|`.
pub fn minor_loss_resistance(coef: f64, diameter: f64) -> f64 {
    let area = std::f64::consts::PI * 0.25 * diameter * diameter;
    coef / (2.0 * GRAVITY * area * area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_flow_zero_loss() {
        assert_eq!(hazen_williams_headloss(0.0, 1000.0, 0.3, 100.0), 0.0);
    }

    #[test]
    fn closed_form_value() {
        // 10.667·1000·0.1^1.852 / (100^1.852·0.3^4.871), evaluated term by term
        let num = 10.667 * 1000.0 * (0.1f64.ln() * 1.852).exp();
        let den = (100f64.ln() * 1.852).exp() * (0.3f64.ln() * 4.871).exp();
        let expected = num / den;
        let h = hazen_williams_headloss(0.1, 1000.0, 0.3, 100.0);
        assert!((h - expected).abs() < 1e-9 * expected);
        assert!((h - 10.45).abs() / 10.45 < 0.01, "{h}");
    }

    #[test]
    fn odd_symmetry() {
        let a = hazen_williams_headloss(0.1, 1000.0, 0.3, 100.0);
        let b = hazen_williams_headloss(-0.1, 1000.0, 0.3, 100.0);
        assert_eq!(a, -b);
    }

    #[test]
    fn gradient_is_floored_near_zero() {
        let r = hazen_williams_resistance(100.0, 0.1, 120.0);
        let (_, g0) = hw_loss_and_gradient(r, 0.0);
        let (_, g1) = hw_loss_and_gradient(r, 1e-12);
        assert!(g0 > 0.0);
        assert_eq!(g0, g1);
    }
}
