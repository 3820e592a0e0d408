//! Large-scale pathloss, mean channel gains and small-scale fading.
//!
//! Two pathloss models are in use: the macro-cell urban model
//! `128.1 + 37.6 log10(d[km])` for every link that terminates at the base
//! station, and the WINNER II B1 line-of-sight model for street-level links
//! between vehicles (including an individual entity interfering with a
//! platoon vehicle). Everything returned here is a linear power ratio except
//! the explicit `*_db` functions.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ModelParams, Position};

/// WINNER II B1 LOS (below breakpoint): `A log10(d) + B + C log10(fc / 5 GHz)`.
pub mod winner_b1 {
    pub const SLOPE_DB: f64 = 22.7;
    pub const INTERCEPT_DB: f64 = 41.0;
    pub const FREQ_SLOPE_DB: f64 = 20.0;
    pub const REF_FREQ_GHZ: f64 = 5.0;
    /// Lower edge of the model's validity range; shorter distances are evaluated here.
    pub const MIN_DISTANCE_M: f64 = 10.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkClass {
    /// Platoon vehicle to platoon vehicle of the same platoon.
    V2vIntraPlatoon,
    /// Individual entity (or any foreign vehicle) to a platoon vehicle.
    V2vCross,
    /// Any ground transmitter to the base station.
    CellularUplink,
}

/// Mean gain plus one fading realisation; the instantaneous gain is their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGain {
    pub mean_gain: f64,
    pub fading: f64,
}

impl ChannelGain {
    pub fn instantaneous(&self) -> f64 {
        self.fading * self.mean_gain
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDistance(d))
    }
}

/// Urban macro-cell pathloss with `d` given in meters.
pub fn pathloss_cellular_db(d: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(128.1 + 37.6 * (d / 1000.0).log10())
}

/// WINNER II B1 LOS pathloss. Distances below the model's lower validity
/// bound are clamped, which keeps the function continuous and monotone.
pub fn pathloss_v2v_db(d: f64, carrier_freq_hz: f64) -> Result<f64> {
    use winner_b1::*;
    check_distance(d)?;
    let d = d.max(MIN_DISTANCE_M);
    let fc_ghz = carrier_freq_hz / 1e9;
    Ok(SLOPE_DB * d.log10() + INTERCEPT_DB + FREQ_SLOPE_DB * (fc_ghz / REF_FREQ_GHZ).log10())
}

/// Statistical average channel gain between two ground positions.
pub fn mean_gain(tx: Position, rx: Position, class: LinkClass, params: &ModelParams) -> Result<f64> {
    let d = tx.distance(rx);
    if d == 0.0 {
        return Err(Error::CoincidentPositions);
    }
    let gain_db = match class {
        LinkClass::CellularUplink => params.bs_antenna_gain_db - pathloss_cellular_db(d)?,
        LinkClass::V2vIntraPlatoon | LinkClass::V2vCross => {
            -pathloss_v2v_db(d, params.carrier_freq_hz)?
        }
    };
    Ok(db_to_linear(gain_db))
}

/// Abstract power-law gain `G d^-alpha` of the channel model, used when the
/// concrete pathloss tables are not wanted.
pub fn power_law_gain(gain_constant: f64, d: f64, alpha: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(gain_constant * d.powf(-alpha))
}

/// Rayleigh fading power gain `|h0|^2` with `h0 ~ CN(0, 1)`, i.e. `Exp(1)`.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

pub fn sample_gain<R: Rng + ?Sized>(mean_gain: f64, rng: &mut R) -> ChannelGain {
    ChannelGain {
        mean_gain,
        fading: sample_fading(rng),
    }
}
