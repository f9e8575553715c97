//! Rectenna output model and the fourth-order harvesting metric `z_DC`.

use crate::error::{invalid, Result};
use crate::waveform::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectennaParams {
    /// Second-order diode coefficient, 1/(V*Ohm).
    pub k2: f64,
    /// Fourth-order diode coefficient, 1/(V^3*Ohm^2).
    pub k4: f64,
    pub r_ant: f64,
    /// Sensitivity, W.
    pub gamma_in: f64,
    /// Saturation input power, W. Inputs above it are clamped here.
    pub gamma_sat: f64,
    pub beta2: f64,
    pub beta4: f64,
    pub r_load: f64,
    pub n_eh: usize,
}

impl Default for RectennaParams {
    fn default() -> Self {
        Self {
            k2: 0.0034,
            k4: 0.3829,
            r_ant: 50.0,
            gamma_in: dbm_to_watts(-20.0),
            gamma_sat: dbm_to_watts(10.0),
            beta2: 1.0,
            beta4: 0.1,
            r_load: 1000.0,
            n_eh: 4,
        }
    }
}

impl RectennaParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.k2, self.k4, self.r_ant, self.gamma_in, self.gamma_sat, self.beta2, self.r_load];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || self.beta4 < 0.0 || self.n_eh == 0 {
            return Err(invalid("rectenna parameters must be positive"));
        }
        if self.gamma_in >= self.gamma_sat {
            return Err(invalid("rectenna sensitivity must lie below saturation"));
        }
        Ok(())
    }

    /// Input power at which the output saturates.
    pub fn delta_sat(&self) -> f64 {
        self.gamma_sat
    }
}

/// Piecewise rectenna output for received power `p_r`: dead zone below the
/// sensitivity, `beta2 p + beta4 p^2` in the operating region, constant above
/// saturation.
pub fn vout(p_r: f64, params: &RectennaParams) -> Result<f64> {
    if !(p_r >= 0.0) {
        return Err(invalid(format!("received power {p_r} W is negative")));
    }
    let poly = |p: f64| params.beta2 * p + params.beta4 * p * p;
    Ok(if p_r < params.gamma_in {
        0.0
    } else if p_r < params.gamma_sat {
        poly(p_r)
    } else {
        poly(params.delta_sat())
    })
}

/// DC combining: `sum_q vout_q^2 / R_L` over the per-rectenna input powers.
pub fn total_dc_power(p_r: &[f64], params: &RectennaParams) -> Result<f64> {
    p_r.iter()
        .map(|&p| vout(p, params).map(|v| v * v / params.r_load))
        .sum()
}

/// Time averages of `y^2` and `y^4`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SignalMoments {
    pub m2: f64,
    pub m4: f64,
}

pub fn signal_moments(samples: &[f64]) -> Result<SignalMoments> {
    if samples.is_empty() {
        return Err(invalid("no samples"));
    }
    let (s2, s4) = samples.iter().fold((0.0, 0.0), |(a, b), &y| {
        let y2 = y * y;
        (a + y2, b + y2 * y2)
    });
    let n = samples.len() as f64;
    Ok(SignalMoments { m2: s2 / n, m4: s4 / n })
}

/// `k2 R m2 + k4 R^2 m4` for one rectenna.
pub fn z_dc(moments: &SignalMoments, params: &RectennaParams) -> f64 {
    params.k2 * params.r_ant * moments.m2 + params.k4 * params.r_ant * params.r_ant * moments.m4
}
