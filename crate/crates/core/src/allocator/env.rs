use crate::channel::{mean_gain, LinkClass};
use crate::error::Result;
use crate::link::{self, power_upper_bound};
use crate::scenario::{ModelParams, Scenario};

/// What the allocators need to know about the radio environment.
///
/// Vehicle indices are positions inside a platoon, 0 being the leader.
/// `sharer` is the individual entity reusing the subchannel, if any.
pub trait GroupcastEnv {
    fn num_ies(&self) -> usize;
    fn num_subchannels(&self) -> usize;
    fn num_platoons(&self) -> usize;
    fn platoon_size(&self, platoon: usize) -> usize;
    fn gamma_thr(&self) -> f64;
    fn p_max_mw(&self) -> f64;

    /// Clipped power bound for `tx` of `platoon` sharing `subchannel` with
    /// `ie`, or `None` when the triple is infeasible.
    fn power_bound(&self, ie: usize, subchannel: usize, platoon: usize, tx: usize) -> Option<f64>;

    /// Mean SINR at member `rx` of a groupcast from member `tx`.
    fn groupcast_sinr(&self, platoon: usize, tx: usize, rx: usize, power_mw: f64, sharer: Option<usize>) -> f64;
}

/// Mean gains of a generated scenario, precomputed once.
#[derive(Debug, Clone)]
pub struct ScenarioEnv<'a> {
    scenario: &'a Scenario,
    sizes: Vec<usize>,
    /// `[m][i][j]`, zero on the diagonal.
    intra: Vec<Vec<Vec<f64>>>,
    /// `[c][m][j]`
    ie_to_vehicle: Vec<Vec<Vec<f64>>>,
    ie_to_bs: Vec<f64>,
    /// `[m][i]`
    vehicle_to_bs: Vec<Vec<f64>>,
}

impl<'a> ScenarioEnv<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let p = &scenario.params;
        let bs = scenario.bs_position;
        let mut intra = Vec::with_capacity(scenario.platoons.len());
        let mut vehicle_to_bs = Vec::with_capacity(scenario.platoons.len());
        for platoon in &scenario.platoons {
            let v = &platoon.vehicles;
            let mut rows = vec![vec![0.0; v.len()]; v.len()];
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if i != j {
                        rows[i][j] = mean_gain(v[i], v[j], LinkClass::V2vIntraPlatoon, p)?;
                    }
                }
            }
            intra.push(rows);
            vehicle_to_bs.push(
                v.iter()
                    .map(|&x| mean_gain(x, bs, LinkClass::CellularUplink, p))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let mut ie_to_vehicle = Vec::with_capacity(scenario.ies.len());
        let mut ie_to_bs = Vec::with_capacity(scenario.ies.len());
        for ie in &scenario.ies {
            ie_to_bs.push(mean_gain(ie.position, bs, LinkClass::CellularUplink, p)?);
            ie_to_vehicle.push(
                scenario
                    .platoons
                    .iter()
                    .map(|pl| {
                        pl.vehicles
                            .iter()
                            .map(|&x| mean_gain(ie.position, x, LinkClass::V2vCross, p))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(ScenarioEnv {
            scenario,
            sizes: scenario.platoon_sizes(),
            intra,
            ie_to_vehicle,
            ie_to_bs,
            vehicle_to_bs,
        })
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn params(&self) -> &'a ModelParams {
        &self.scenario.params
    }

    pub fn platoon_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn intra_gain(&self, platoon: usize, tx: usize, rx: usize) -> f64 {
        self.intra[platoon][tx][rx]
    }

    pub fn ie_vehicle_gain(&self, ie: usize, platoon: usize, rx: usize) -> f64 {
        self.ie_to_vehicle[ie][platoon][rx]
    }

    pub fn ie_bs_gain(&self, ie: usize) -> f64 {
        self.ie_to_bs[ie]
    }

    pub fn vehicle_bs_gain(&self, platoon: usize, vehicle: usize) -> f64 {
        self.vehicle_to_bs[platoon][vehicle]
    }

    pub fn ie_power_mw(&self, ie: usize) -> f64 {
        self.scenario.ies[ie].tx_power_mw
    }

    /// Interference an entity causes at a platoon member.
    pub fn ie_interference_at(&self, ie: usize, platoon: usize, rx: usize) -> f64 {
        self.ie_power_mw(ie) * self.ie_vehicle_gain(ie, platoon, rx)
    }

    /// Uplink SINR of `ie` when `(platoon, tx)` groupcasts on its subchannel at `power_mw`.
    pub fn ie_sinr(&self, ie: usize, sharer: Option<(usize, usize, f64)>) -> f64 {
        let interference = sharer.map_or(0.0, |(m, tx, p)| p * self.vehicle_bs_gain(m, tx));
        link::ie_sinr(self.ie_power_mw(ie), self.ie_bs_gain(ie), interference, self.params().noise_mw)
    }
}

impl GroupcastEnv for ScenarioEnv<'_> {
    fn num_ies(&self) -> usize {
        self.scenario.ies.len()
    }

    fn num_subchannels(&self) -> usize {
        self.params().num_subchannels
    }

    fn num_platoons(&self) -> usize {
        self.sizes.len()
    }

    fn platoon_size(&self, platoon: usize) -> usize {
        self.sizes[platoon]
    }

    fn gamma_thr(&self) -> f64 {
        self.params().gamma_thr
    }

    fn p_max_mw(&self) -> f64 {
        self.params().p_max_mw
    }

    fn power_bound(&self, ie: usize, _subchannel: usize, platoon: usize, tx: usize) -> Option<f64> {
        let p = self.params();
        let power = power_upper_bound(
            self.ie_power_mw(ie),
            self.ie_bs_gain(ie),
            self.vehicle_bs_gain(platoon, tx),
            p.noise_mw,
            p.delta_thr,
            p.p_max_mw,
        )
        .power()?;
        if p.strict_groupcast_qos && tx + 1 < self.sizes[platoon] {
            let sinr = self.groupcast_sinr(platoon, tx, tx + 1, power, Some(ie));
            if sinr < p.gamma_thr {
                return None;
            }
        }
        Some(power)
    }

    fn groupcast_sinr(&self, platoon: usize, tx: usize, rx: usize, power_mw: f64, sharer: Option<usize>) -> f64 {
        let interference = sharer.map_or(0.0, |c| self.ie_interference_at(c, platoon, rx));
        power_mw * self.intra_gain(platoon, tx, rx) / (self.params().noise_mw + interference)
    }
}
