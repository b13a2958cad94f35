use serde::{Deserialize, Serialize};

use crate::error::NetError;

/// Substrate constants. Defaults reproduce the fig1a/fig1b golden networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub dw: f64,
    pub decay_w: f64,
    pub theta: f64,
    pub w_max: f64,
    pub a_max: f64,
    /// Fraction of activation removed per tick.
    pub decay_a: f64,
    pub beta: f64,
    pub back_factor: f64,
    pub reset_factor: f64,
    pub fire_threshold_det: f64,
    /// Matched-context multiplier λ.
    pub boost: f64,
    /// Activation response floor: a += v * (act_base + act_gain * w / w_max) / 3.
    pub act_base: f64,
    pub act_gain: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            dw: 0.4,
            decay_w: 0.005,
            theta: 1.0,
            w_max: 3.0,
            a_max: 1.0,
            decay_a: 0.2,
            beta: 0.5,
            back_factor: 0.5,
            reset_factor: 0.8,
            fire_threshold_det: 0.5,
            boost: 2.0,
            act_base: 0.2,
            act_gain: 0.3,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), NetError> {
        let positive = [
            ("dw", self.dw),
            ("decay_w", self.decay_w),
            ("theta", self.theta),
            ("w_max", self.w_max),
            ("a_max", self.a_max),
            ("boost", self.boost),
            ("act_base", self.act_base),
            ("act_gain", self.act_gain),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(NetError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        let unit = [
            ("decay_a", self.decay_a),
            ("beta", self.beta),
            ("back_factor", self.back_factor),
            ("reset_factor", self.reset_factor),
        ];
        for (name, v) in unit {
            if !(v > 0.0 && v < 1.0) {
                return Err(NetError::InvalidParams(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        if !(self.fire_threshold_det > 0.0 && self.fire_threshold_det <= 1.0) {
            return Err(NetError::InvalidParams(format!(
                "fire_threshold_det must lie in (0,1], got {}",
                self.fire_threshold_det
            )));
        }
        if self.theta > self.w_max {
            return Err(NetError::InvalidParams(format!(
                "theta ({}) exceeds w_max ({})",
                self.theta, self.w_max
            )));
        }
        Ok(())
    }

    /// Per-unit-signal activation response of an element with weight `w`.
    pub fn response(&self, w: f64) -> f64 {
        (self.act_base + self.act_gain * w / self.w_max) / 3.0
    }
}
