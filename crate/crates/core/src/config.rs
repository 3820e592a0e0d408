//! Human-readable parameter file.
//!
//! Quantities are written in the units a parameter table would use (dB, dBm,
//! bps/Hz) and converted to the linear `ModelParams` on load. Every key is
//! optional; missing keys take the default model values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocator::Method;
use crate::channel::{dbm_to_mw, linear_to_db, mw_to_dbm};
use crate::error::{Error, Result};
use crate::link::qos_sinr_threshold;
use crate::scenario::ModelParams;
use crate::sweep::{SweepConfig, DEFAULT_SEED_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub cell_radius_m: f64,
    pub bs_antenna_height_m: f64,
    pub bs_antenna_gain_dbi: f64,
    pub bs_road_distance_m: f64,
    pub vehicle_antenna_height_m: f64,
    pub road_lanes: usize,
    pub lane_width_m: f64,
    pub sinr_threshold_db: f64,
    pub ie_qos_rate_bps_per_hz: f64,
    pub reliability_threshold: f64,
    pub num_platoons: usize,
    pub max_platoon_size: usize,
    pub num_ies: usize,
    pub num_subchannels: usize,
    pub vehicle_max_tx_power_dbm: f64,
    pub ie_tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub carrier_frequency_hz: f64,
    pub fading_factor: f64,
    pub noise_power_dbm: f64,
    pub packet_size_bytes: f64,
    pub inter_vehicle_gap_m: f64,
    pub road_half_length_m: f64,
    pub strict_groupcast_qos: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection::from_params(&ModelParams::default())
    }
}

impl ModelSection {
    pub fn from_params(p: &ModelParams) -> Self {
        ModelSection {
            cell_radius_m: p.cell_radius_m,
            bs_antenna_height_m: p.bs_antenna_height_m,
            bs_antenna_gain_dbi: p.bs_antenna_gain_db,
            bs_road_distance_m: p.bs_road_offset_m,
            vehicle_antenna_height_m: p.vehicle_antenna_height_m,
            road_lanes: p.lanes,
            lane_width_m: p.lane_width_m,
            sinr_threshold_db: linear_to_db(p.gamma_thr),
            ie_qos_rate_bps_per_hz: (1.0 + p.delta_thr).log2(),
            reliability_threshold: p.theta_th,
            num_platoons: p.num_platoons,
            max_platoon_size: p.max_platoon_size,
            num_ies: p.num_ies,
            num_subchannels: p.num_subchannels,
            vehicle_max_tx_power_dbm: mw_to_dbm(p.p_max_mw),
            ie_tx_power_dbm: mw_to_dbm(p.ie_tx_power_mw),
            bandwidth_hz: p.total_bandwidth_hz,
            carrier_frequency_hz: p.carrier_freq_hz,
            fading_factor: p.alpha,
            noise_power_dbm: mw_to_dbm(p.noise_mw),
            packet_size_bytes: p.packet_size_bytes,
            inter_vehicle_gap_m: p.inter_vehicle_gap_m,
            road_half_length_m: p.road_half_length_m,
            strict_groupcast_qos: p.strict_groupcast_qos,
        }
    }

    pub fn to_params(&self) -> Result<ModelParams> {
        let p = ModelParams {
            cell_radius_m: self.cell_radius_m,
            bs_antenna_height_m: self.bs_antenna_height_m,
            bs_antenna_gain_db: self.bs_antenna_gain_dbi,
            bs_road_offset_m: self.bs_road_distance_m,
            vehicle_antenna_height_m: self.vehicle_antenna_height_m,
            lanes: self.road_lanes,
            lane_width_m: self.lane_width_m,
            gamma_thr: crate::channel::db_to_linear(self.sinr_threshold_db),
            delta_thr: qos_sinr_threshold(self.ie_qos_rate_bps_per_hz),
            theta_th: self.reliability_threshold,
            num_platoons: self.num_platoons,
            max_platoon_size: self.max_platoon_size,
            num_ies: self.num_ies,
            num_subchannels: self.num_subchannels,
            p_max_mw: dbm_to_mw(self.vehicle_max_tx_power_dbm),
            ie_tx_power_mw: dbm_to_mw(self.ie_tx_power_dbm),
            total_bandwidth_hz: self.bandwidth_hz,
            carrier_freq_hz: self.carrier_frequency_hz,
            alpha: self.fading_factor,
            noise_mw: dbm_to_mw(self.noise_power_dbm),
            packet_size_bytes: self.packet_size_bytes,
            inter_vehicle_gap_m: self.inter_vehicle_gap_m,
            road_half_length_m: self.road_half_length_m,
            strict_groupcast_qos: self.strict_groupcast_qos,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub vehicle_totals: Vec<usize>,
    pub methods: Vec<Method>,
    /// Number of seeds, numbered from 0.
    pub seeds: u64,
    pub monte_carlo_fading_draws: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            vehicle_totals: SweepConfig::default_totals(),
            methods: Method::ALL.to_vec(),
            seeds: DEFAULT_SEED_COUNT,
            monte_carlo_fading_draws: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub model: ModelSection,
    pub sweep: SweepSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        ConfigFile::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config sections serialize")
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let cfg = SweepConfig {
            params: self.model.to_params()?,
            vehicle_totals: self.sweep.vehicle_totals.clone(),
            methods: self.sweep.methods.clone(),
            seeds: (0..self.sweep.seeds).collect(),
            monte_carlo_fading_draws: self.sweep.monte_carlo_fading_draws,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ConfigFile::parse("").unwrap();
        let p = cfg.model.to_params().unwrap();
        let d = ModelParams::default();
        assert!((p.gamma_thr - d.gamma_thr).abs() < 1e-12 * d.gamma_thr);
        assert!((p.delta_thr - d.delta_thr).abs() < 1e-12);
        assert!((p.noise_mw - d.noise_mw).abs() < 1e-12 * d.noise_mw);
        assert_eq!(p.num_ies, 65);
        assert_eq!(cfg.sweep_config().unwrap().seeds.len(), 20);
    }

    #[test]
    fn table_units_are_converted() {
        let cfg = ConfigFile::parse(
            "[model]\nsinr_threshold_db = 10.0\nie_qos_rate_bps_per_hz = 1.0\nvehicle_max_tx_power_dbm = 20.0\n",
        )
        .unwrap();
        let p = cfg.model.to_params().unwrap();
        assert!((p.gamma_thr - 10.0).abs() < 1e-12);
        assert!((p.delta_thr - 1.0).abs() < 1e-12);
        assert!((p.p_max_mw - 100.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(ConfigFile::parse("[model]\nsinr_treshold_db = 5\n").is_err());
        let cfg = ConfigFile::parse("[model]\nnum_platoons = 40\n").unwrap();
        assert!(cfg.model.to_params().is_err());
        let cfg = ConfigFile::parse("[sweep]\nmethods = [\"greedy\"]\n");
        assert!(cfg.is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ConfigFile::default();
        assert_eq!(ConfigFile::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
