//! Single-cell urban topology: a base station at the centre of a street block,
//! four perpendicular roads around it, platoons travelling along road lanes
//! and individual entities scattered over the roads.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, dbm_to_mw};
use crate::error::{Error, Result};
use crate::link::qos_sinr_threshold;

/// Every global model parameter, in linear units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub cell_radius_m: f64,
    pub bs_antenna_height_m: f64,
    pub bs_antenna_gain_db: f64,
    /// Distance from the base station to each road's centre line.
    pub bs_road_offset_m: f64,
    pub vehicle_antenna_height_m: f64,
    /// Lanes per road, split evenly between the two travel directions.
    pub lanes: usize,
    pub lane_width_m: f64,
    /// Groupcast receiver SINR threshold.
    pub gamma_thr: f64,
    /// Individual entity uplink SINR threshold.
    pub delta_thr: f64,
    /// Target success probability for a groupcast link; reporting only.
    pub theta_th: f64,
    pub num_platoons: usize,
    pub max_platoon_size: usize,
    pub num_ies: usize,
    pub num_subchannels: usize,
    pub p_max_mw: f64,
    pub ie_tx_power_mw: f64,
    pub total_bandwidth_hz: f64,
    pub carrier_freq_hz: f64,
    /// Exponent of the abstract power-law channel model.
    pub alpha: f64,
    /// Noise power per subchannel.
    pub noise_mw: f64,
    pub packet_size_bytes: f64,
    pub inter_vehicle_gap_m: f64,
    /// How far each road extends on either side of the block centre (further
    /// limited by the cell edge).
    pub road_half_length_m: f64,
    /// Drop candidate matchings whose groupcaster cannot reach its first receiver.
    #[serde(default)]
    pub strict_groupcast_qos: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            cell_radius_m: 1000.0,
            bs_antenna_height_m: 25.0,
            bs_antenna_gain_db: 8.0,
            bs_road_offset_m: 100.0,
            vehicle_antenna_height_m: 1.5,
            lanes: 2,
            lane_width_m: 4.0,
            gamma_thr: db_to_linear(5.0),
            delta_thr: qos_sinr_threshold(0.5),
            theta_th: 0.9,
            num_platoons: 5,
            max_platoon_size: 11,
            num_ies: 65,
            num_subchannels: 65,
            p_max_mw: dbm_to_mw(30.0),
            ie_tx_power_mw: dbm_to_mw(30.0),
            total_bandwidth_hz: 10e6,
            carrier_freq_hz: 2e9,
            alpha: 3.0,
            noise_mw: dbm_to_mw(-114.0),
            packet_size_bytes: 300.0,
            inter_vehicle_gap_m: 10.0,
            road_half_length_m: DEFAULT_ROAD_HALF_LENGTH_M,
            strict_groupcast_qos: false,
        }
    }
}

pub const DEFAULT_ROAD_HALF_LENGTH_M: f64 = 300.0;

impl ModelParams {
    pub fn subchannel_bandwidth_hz(&self) -> f64 {
        self.total_bandwidth_hz / self.num_subchannels as f64
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")))
            }
        }
        for (name, v) in [
            ("cell_radius_m", self.cell_radius_m),
            ("bs_antenna_height_m", self.bs_antenna_height_m),
            ("bs_road_offset_m", self.bs_road_offset_m),
            ("vehicle_antenna_height_m", self.vehicle_antenna_height_m),
            ("lane_width_m", self.lane_width_m),
            ("gamma_thr", self.gamma_thr),
            ("delta_thr", self.delta_thr),
            ("p_max_mw", self.p_max_mw),
            ("ie_tx_power_mw", self.ie_tx_power_mw),
            ("total_bandwidth_hz", self.total_bandwidth_hz),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("alpha", self.alpha),
            ("noise_mw", self.noise_mw),
            ("packet_size_bytes", self.packet_size_bytes),
            ("inter_vehicle_gap_m", self.inter_vehicle_gap_m),
            ("road_half_length_m", self.road_half_length_m),
        ] {
            positive(name, v)?;
        }
        if !self.bs_antenna_gain_db.is_finite() {
            return Err(Error::InvalidParams("bs_antenna_gain_db must be finite".into()));
        }
        if !(self.theta_th > 0.0 && self.theta_th <= 1.0) {
            return Err(Error::InvalidParams(format!("theta_th must lie in (0, 1], got {}", self.theta_th)));
        }
        if self.num_platoons == 0 || self.num_ies == 0 {
            return Err(Error::InvalidParams("need at least one platoon and one individual entity".into()));
        }
        if self.num_subchannels < 2 * self.num_platoons {
            return Err(Error::InvalidParams(format!(
                "{} subchannels cannot serve a leader and a relay for each of {} platoons",
                self.num_subchannels, self.num_platoons
            )));
        }
        if self.max_platoon_size < 2 {
            return Err(Error::InvalidParams("max_platoon_size must be at least 2".into()));
        }
        if self.lanes == 0 {
            return Err(Error::InvalidParams("roads need at least one lane".into()));
        }
        let outer_edge = self.bs_road_offset_m + self.lanes as f64 * self.lane_width_m / 2.0;
        if outer_edge >= self.cell_radius_m {
            return Err(Error::InvalidParams("roads lie outside the cell".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// The four roads bounding the block, named by their side of the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Road {
    North,
    South,
    East,
    West,
}

impl Road {
    pub const ALL: [Road; 4] = [Road::North, Road::South, Road::East, Road::West];
}

/// Travel direction along the road axis (towards +x / +y or the opposite).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heading {
    Increasing,
    Decreasing,
}

impl Heading {
    fn sign(self) -> f64 {
        match self {
            Heading::Increasing => 1.0,
            Heading::Decreasing => -1.0,
        }
    }
}

/// Where a lane sits and how far it runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneGeometry {
    pub road: Road,
    pub lane: usize,
    /// Signed distance of the lane centre line from the base station.
    pub offset_m: f64,
    /// Lane runs over `[-half_length_m, half_length_m]` along the road axis.
    pub half_length_m: f64,
}

impl LaneGeometry {
    pub fn new(road: Road, lane: usize, params: &ModelParams) -> Self {
        let lateral = -(params.lanes as f64) * params.lane_width_m / 2.0
            + (lane as f64 + 0.5) * params.lane_width_m;
        let offset_m = match road {
            Road::North | Road::East => params.bs_road_offset_m + lateral,
            Road::South | Road::West => -params.bs_road_offset_m + lateral,
        };
        let chord = (params.cell_radius_m.powi(2) - offset_m.powi(2)).max(0.0).sqrt();
        LaneGeometry {
            road,
            lane,
            offset_m,
            half_length_m: chord.min(params.road_half_length_m),
        }
    }

    pub fn point(&self, along: f64) -> Position {
        match self.road {
            Road::North | Road::South => Position::new(along, self.offset_m),
            Road::East | Road::West => Position::new(self.offset_m, along),
        }
    }

    /// Lanes used by traffic with the given heading.
    pub fn lanes_for(heading: Heading, lanes: usize) -> std::ops::Range<usize> {
        if lanes == 1 {
            return 0..1;
        }
        match heading {
            Heading::Decreasing => 0..lanes / 2,
            Heading::Increasing => lanes / 2..lanes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Platoon {
    pub id: usize,
    pub road: Road,
    pub heading: Heading,
    pub lane: usize,
    /// Index 0 is the leader, followed by the members in driving order.
    pub vehicles: Vec<Position>,
}

impl Platoon {
    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn leader(&self) -> Position {
        self.vehicles[0]
    }

    pub fn tail(&self) -> Position {
        self.vehicles[self.vehicles.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualEntity {
    pub id: usize,
    pub position: Position,
    pub tx_power_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: ModelParams,
    pub bs_position: Position,
    pub platoons: Vec<Platoon>,
    pub ies: Vec<IndividualEntity>,
    pub rng_seed: u64,
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

impl Scenario {
    pub fn platoon_sizes(&self) -> Vec<usize> {
        self.platoons.iter().map(Platoon::len).collect()
    }

    pub fn total_platoon_vehicles(&self) -> usize {
        self.platoons.iter().map(Platoon::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let p = &self.params;
        if self.platoons.len() != p.num_platoons {
            return Err(Error::InvalidScenario(format!(
                "{} platoons, expected {}",
                self.platoons.len(),
                p.num_platoons
            )));
        }
        if self.ies.len() != p.num_ies {
            return Err(Error::InvalidScenario(format!(
                "{} individual entities, expected {}",
                self.ies.len(),
                p.num_ies
            )));
        }
        let inside = |q: Position| q.x.is_finite() && q.y.is_finite() && q.distance(self.bs_position) <= p.cell_radius_m;
        for (m, platoon) in self.platoons.iter().enumerate() {
            if platoon.id != m {
                return Err(Error::InvalidScenario(format!("platoon at index {m} has id {}", platoon.id)));
            }
            if platoon.len() < 2 || platoon.len() > p.max_platoon_size {
                return Err(Error::InvalidScenario(format!(
                    "platoon {m} has {} vehicles, allowed 2..={}",
                    platoon.len(),
                    p.max_platoon_size
                )));
            }
            if !platoon.vehicles.iter().all(|&v| inside(v)) {
                return Err(Error::InvalidScenario(format!("platoon {m} leaves the cell")));
            }
            if platoon.vehicles.windows(2).any(|w| w[0].distance(w[1]) == 0.0) {
                return Err(Error::InvalidScenario(format!("platoon {m} has stacked vehicles")));
            }
        }
        for (c, ie) in self.ies.iter().enumerate() {
            if ie.id != c {
                return Err(Error::InvalidScenario(format!("entity at index {c} has id {}", ie.id)));
            }
            if !(ie.tx_power_mw > 0.0 && ie.tx_power_mw <= p.ie_tx_power_mw) {
                return Err(Error::InvalidScenario(format!("entity {c} transmit power {} mW", ie.tx_power_mw)));
            }
            if !inside(ie.position) {
                return Err(Error::InvalidScenario(format!("entity {c} lies outside the cell")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_json(&fs::read_to_string(path)?)
    }
}

/// Splits `total` vehicles over `platoons` platoons as evenly as possible;
/// which platoons receive the remainder is decided by a seeded shuffle.
pub fn distribute_vehicles(total: usize, platoons: usize, max_size: usize, seed: u64) -> Result<Vec<usize>> {
    if platoons == 0 || total < 2 * platoons || total > platoons * max_size {
        return Err(Error::InfeasibleDistribution {
            total,
            platoons,
            max_size,
        });
    }
    let base = total / platoons;
    let remainder = total % platoons;
    let mut order: Vec<usize> = (0..platoons).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    order.shuffle(&mut rng);
    let mut sizes = vec![base; platoons];
    for &m in &order[..remainder] {
        sizes[m] += 1;
    }
    Ok(sizes)
}

pub fn generate_scenario(params: &ModelParams, total_platoon_vehicles: usize, seed: u64) -> Result<Scenario> {
    params.validate()?;
    let sizes = distribute_vehicles(
        total_platoon_vehicles,
        params.num_platoons,
        params.max_platoon_size,
        seed,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Every platoon reserves the footprint of a maximum-size platoon, so a
    // seed fixes leader and entity positions independently of the total.
    let mut footprints: Vec<Platoon> = Vec::with_capacity(sizes.len());
    for id in 0..sizes.len() {
        let platoon = place_platoon(id, params.max_platoon_size, params, &footprints, &mut rng)?;
        footprints.push(platoon);
    }

    let min_separation = params.inter_vehicle_gap_m / 2.0;
    let mut ies = Vec::with_capacity(params.num_ies);
    for id in 0..params.num_ies {
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let road = Road::ALL[rng.random_range(0..Road::ALL.len())];
            let lane = LaneGeometry::new(road, rng.random_range(0..params.lanes), params);
            let pos = lane.point(rng.random_range(-lane.half_length_m..=lane.half_length_m));
            let clear = footprints
                .iter()
                .flat_map(|p| p.vehicles.iter())
                .all(|v| v.distance(pos) >= min_separation);
            if clear {
                placed = Some(pos);
                break;
            }
        }
        let position = placed.ok_or_else(|| Error::Placement {
            what: format!("individual entity {id}"),
            attempts: MAX_PLACEMENT_ATTEMPTS,
        })?;
        ies.push(IndividualEntity {
            id,
            position,
            tx_power_mw: params.ie_tx_power_mw,
        });
    }

    let platoons = footprints
        .into_iter()
        .zip(&sizes)
        .map(|(mut p, &size)| {
            p.vehicles.truncate(size);
            p
        })
        .collect();
    let scenario = Scenario {
        params: params.clone(),
        bs_position: Position::new(0.0, 0.0),
        platoons,
        ies,
        rng_seed: seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn place_platoon(
    id: usize,
    size: usize,
    params: &ModelParams,
    placed: &[Platoon],
    rng: &mut ChaCha8Rng,
) -> Result<Platoon> {
    let gap = params.inter_vehicle_gap_m;
    let span = (size - 1) as f64 * gap;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let road = Road::ALL[rng.random_range(0..Road::ALL.len())];
        let heading = if rng.random_bool(0.5) {
            Heading::Increasing
        } else {
            Heading::Decreasing
        };
        let lane_idx = rng.random_range(LaneGeometry::lanes_for(heading, params.lanes));
        let lane = LaneGeometry::new(road, lane_idx, params);
        if 2.0 * lane.half_length_m < span {
            continue;
        }
        // Followers trail the leader against the heading.
        let (lo, hi) = match heading {
            Heading::Increasing => (-lane.half_length_m + span, lane.half_length_m),
            Heading::Decreasing => (-lane.half_length_m, lane.half_length_m - span),
        };
        let head = rng.random_range(lo..=hi);
        let vehicles: Vec<Position> = (0..size)
            .map(|i| lane.point(head - heading.sign() * i as f64 * gap))
            .collect();
        if !overlaps(&vehicles, road, lane_idx, params, placed) {
            return Ok(Platoon {
                id,
                road,
                heading,
                lane: lane_idx,
                vehicles,
            });
        }
    }
    Err(Error::Placement {
        what: format!("platoon {id} of {size} vehicles"),
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

fn overlaps(candidate: &[Position], road: Road, lane: usize, params: &ModelParams, placed: &[Platoon]) -> bool {
    placed.iter().any(|other| {
        let threshold = if other.road == road && other.lane == lane {
            params.inter_vehicle_gap_m
        } else {
            params.lane_width_m / 2.0
        };
        candidate
            .iter()
            .any(|a| other.vehicles.iter().any(|b| a.distance(*b) < threshold))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_balance() {
        assert_eq!(distribute_vehicles(30, 5, 11, 0).unwrap(), vec![6; 5]);
        assert_eq!(distribute_vehicles(15, 5, 11, 9).unwrap(), vec![3; 5]);
        assert_eq!(distribute_vehicles(55, 5, 11, 2).unwrap(), vec![11; 5]);
    }

    #[test]
    fn remainder_is_balanced() {
        // Every balanced partition of 17 into 5 parts is a permutation of {4,4,3,3,3}.
        let mut oracle: Vec<Vec<usize>> = Vec::new();
        let mut stack = vec![vec![]];
        while let Some(prefix) = stack.pop() {
            if prefix.len() == 5 {
                if prefix.iter().sum::<usize>() == 17 {
                    let (mx, mn) = (prefix.iter().max().unwrap(), prefix.iter().min().unwrap());
                    if mx - mn <= 1 {
                        let mut sorted = prefix.clone();
                        sorted.sort_unstable();
                        if !oracle.contains(&sorted) {
                            oracle.push(sorted);
                        }
                    }
                }
                continue;
            }
            for s in 2..=11 {
                let mut next = prefix.clone();
                next.push(s);
                stack.push(next);
            }
        }
        assert_eq!(oracle, vec![vec![3, 3, 3, 4, 4]]);
        for seed in 0..50 {
            let mut sizes = distribute_vehicles(17, 5, 11, seed).unwrap();
            sizes.sort_unstable();
            assert_eq!(sizes, oracle[0]);
        }
    }

    #[test]
    fn infeasible_distribution() {
        assert!(matches!(
            distribute_vehicles(9, 5, 11, 0),
            Err(Error::InfeasibleDistribution { total: 9, .. })
        ));
        assert!(distribute_vehicles(56, 5, 11, 0).is_err());
        let params = ModelParams::default();
        assert!(generate_scenario(&params, 9, 1).is_err());
    }

    #[test]
    fn full_platoons_at_maximum() {
        let params = ModelParams::default();
        let s = generate_scenario(&params, 55, 7).unwrap();
        assert_eq!(s.platoon_sizes(), vec![11; 5]);
    }

    #[test]
    fn generation_is_deterministic() {
        let params = ModelParams::default();
        let a = generate_scenario(&params, 30, 3).unwrap();
        let b = generate_scenario(&params, 30, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = generate_scenario(&params, 30, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let params = ModelParams::default();
        let s = generate_scenario(&params, 42, 12).unwrap();
        let text = s.to_json().unwrap();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(s, back);
        assert_eq!(text, back.to_json().unwrap());
    }

    #[test]
    fn sweep_totals_are_respected() {
        let params = ModelParams::default();
        for total in (15..=55).step_by(5) {
            let s = generate_scenario(&params, total, total as u64).unwrap();
            assert_eq!(s.total_platoon_vehicles(), total);
        }
    }

    #[test]
    fn platoons_are_collinear_with_fixed_gap() {
        let params = ModelParams::default();
        let s = generate_scenario(&params, 40, 21).unwrap();
        for p in &s.platoons {
            let lane = LaneGeometry::new(p.road, p.lane, &params);
            for w in p.vehicles.windows(2) {
                assert!((w[0].distance(w[1]) - params.inter_vehicle_gap_m).abs() < 1e-9);
            }
            for v in &p.vehicles {
                let lateral = match p.road {
                    Road::North | Road::South => v.y,
                    Road::East | Road::West => v.x,
                };
                assert_eq!(lateral, lane.offset_m);
            }
            assert!(LaneGeometry::lanes_for(p.heading, params.lanes).contains(&p.lane));
        }
    }

    #[test]
    fn platoons_do_not_share_lane_space() {
        let params = ModelParams::default();
        for seed in 0..30 {
            let s = generate_scenario(&params, 55, seed).unwrap();
            for (i, a) in s.platoons.iter().enumerate() {
                for b in &s.platoons[i + 1..] {
                    for va in &a.vehicles {
                        for vb in &b.vehicles {
                            assert!(va.distance(*vb) >= params.lane_width_m / 2.0);
                            if a.road == b.road && a.lane == b.lane {
                                assert!(va.distance(*vb) >= params.inter_vehicle_gap_m);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = ModelParams::default();
        p.num_subchannels = 9;
        assert!(p.validate().is_err());
        let mut p = ModelParams::default();
        p.theta_th = 0.0;
        assert!(p.validate().is_err());
        let mut p = ModelParams::default();
        p.p_max_mw = -1.0;
        assert!(p.validate().is_err());
        assert!(ModelParams::default().validate().is_ok());
    }

    #[test]
    fn defaults_match_reference_table() {
        let p = ModelParams::default();
        assert!((p.gamma_thr - 3.162_277_660_168_379_5).abs() < 1e-12);
        assert!((p.p_max_mw - 1000.0).abs() < 1e-9);
        assert!((p.noise_mw - 3.981_071_705_534_972e-12).abs() < 1e-24);
        assert!((p.subchannel_bandwidth_hz() - 10e6 / 65.0).abs() < 1e-9);
    }
}
