//! Pump head curves fitted to the power form `H = ω²·(h₀ − r·(Q/ω)ⁿ)`.

use thiserror::Error;

use crate::network::Curve;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveFitError {
    #[error("curve {0}: need 1 or 3 points to fit a pump curve, found {1}")]
    PointCount(String, usize),
    #[error("curve {0}: three-point curve must start at zero flow")]
    NoShutoffPoint(String),
    #[error("curve {0}: points do not admit positive h0, r, n")]
    NotPowerLaw(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpCurveFit {
    pub shutoff_head: f64,
    pub resistance: f64,
    pub exponent: f64,
}

impl PumpCurveFit {
    /// A single design point (Q₀, H₀) is expanded to
    /// (0, 1.33·H₀), (Q₀, H₀), (2·Q₀, 0) before fitting.
    pub fn from_curve(curve: &Curve) -> Result<Self, CurveFitError> {
        let pts = match curve.points.as_slice() {
            [(q, h)] => [(0.0, 1.33 * h), (*q, *h), (2.0 * q, 0.0)],
            [a, b, c] => [*a, *b, *c],
            other => return Err(CurveFitError::PointCount(curve.id.clone(), other.len())),
        };
        let [(q0, h0), (q1, h1), (q2, h2)] = pts;
        if q0 != 0.0 {
            return Err(CurveFitError::NoShutoffPoint(curve.id.clone()));
        }
        let (d1, d2) = (h0 - h1, h0 - h2);
        if !(h0 > 0.0 && q1 > 0.0 && q2 > q1 && d1 > 0.0 && d2 > d1) {
            return Err(CurveFitError::NotPowerLaw(curve.id.clone()));
        }
        let exponent = (d2 / d1).ln() / (q2 / q1).ln();
        let resistance = d1 / q1.powf(exponent);
        if !(exponent > 0.0 && resistance > 0.0 && exponent.is_finite() && resistance.is_finite()) {
            return Err(CurveFitError::NotPowerLaw(curve.id.clone()));
        }
        Ok(Self {
            shutoff_head: h0,
            resistance,
            exponent,
        })
    }

    /// Head gain (m) at `flow` ≥ 0 and relative speed `speed`, clamped at 0.
    pub fn head_gain(&self, flow: f64, speed: f64) -> f64 {
        if speed <= 0.0 {
            return 0.0;
        }
        let h = speed * speed * self.shutoff_head
            - self.resistance * speed.powf(2.0 - self.exponent) * flow.max(0.0).powf(self.exponent);
        h.max(0.0)
    }

    /// Signed head loss across the pump (negative of the gain) and its
    /// derivative. Reverse flow meets a steep linear resistance.
    pub(crate) fn loss_and_gradient(&self, flow: f64, speed: f64) -> (f64, f64) {
        const REVERSE_RESISTANCE: f64 = 1e8;
        const MIN_GRADIENT: f64 = 1e-6;
        let shutoff = speed * speed * self.shutoff_head;
        if flow < 0.0 {
            return (-shutoff + REVERSE_RESISTANCE * flow, REVERSE_RESISTANCE);
        }
        let r = self.resistance * speed.powf(2.0 - self.exponent);
        let loss = -shutoff + r * flow.powf(self.exponent);
        let grad = (self.exponent * r * flow.powf(self.exponent - 1.0)).max(MIN_GRADIENT);
        (loss, grad)
    }
}

/// Head gain of a pump running `curve` at `speed`; see [`PumpCurveFit`].
pub fn pump_head_gain(curve: &Curve, flow: f64, speed: f64) -> Result<f64, CurveFitError> {
    Ok(PumpCurveFit::from_curve(curve)?.head_gain(flow, speed))
}
