//! Per-link math: groupcast and uplink SINR, co-channel interference,
//! achievable rate, closed-form success probability under Rayleigh fading and
//! the largest groupcast power that still protects a co-channel uplink.
//!
//! All quantities are linear (mW and power ratios).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which groupcaster of a platoon transmits: the leader (`g = 0`) or the relay (`g = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupcastRole {
    #[serde(rename = "plv")]
    Leader,
    #[serde(rename = "prv")]
    Relay,
}

impl GroupcastRole {
    pub fn index(self) -> usize {
        match self {
            GroupcastRole::Leader => 0,
            GroupcastRole::Relay => 1,
        }
    }
}

impl fmt::Display for GroupcastRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupcastRole::Leader => "plv",
            GroupcastRole::Relay => "prv",
        })
    }
}

impl FromStr for GroupcastRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plv" | "0" => Ok(GroupcastRole::Leader),
            "prv" | "1" => Ok(GroupcastRole::Relay),
            other => Err(Error::InvalidAllocation(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_mw: f64,
    pub mean_gain: f64,
    pub interference_mw: f64,
    pub noise_mw: f64,
}

impl LinkBudget {
    pub fn sinr(&self) -> f64 {
        groupcast_sinr(self)
    }
}

/// `P h / (sigma^2 + I)`.
pub fn groupcast_sinr(budget: &LinkBudget) -> f64 {
    budget.tx_power_mw * budget.mean_gain / (budget.noise_mw + budget.interference_mw)
}

/// A co-channel transmitter as seen by one receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sharer {
    pub power_mw: f64,
    pub gain: f64,
}

fn single_sharer(sharers: &[Sharer], what: &'static str) -> Result<f64> {
    match sharers {
        [] => Ok(0.0),
        [s] => Ok(s.power_mw * s.gain),
        _ => Err(Error::SharingConflict {
            what,
            count: sharers.len(),
        }),
    }
}

/// Interference a groupcaster causes at the base station while sharing an
/// uplink subchannel. At most one groupcaster may share a given subchannel.
pub fn ie_interference(sharers: &[Sharer]) -> Result<f64> {
    single_sharer(sharers, "groupcasters")
}

/// Interference an individual entity causes at a groupcast receiver. At most
/// one individual entity may share a groupcast subchannel.
pub fn groupcaster_interference(ies: &[Sharer]) -> Result<f64> {
    single_sharer(ies, "individual entities")
}

/// Uplink SINR of an individual entity at the base station.
pub fn ie_sinr(ie_power_mw: f64, ie_to_bs_gain: f64, interference_mw: f64, noise_mw: f64) -> f64 {
    ie_power_mw * ie_to_bs_gain / (noise_mw + interference_mw)
}

pub fn rate_bps_per_hz(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// SINR needed to sustain `rate_req` bps/Hz.
pub fn qos_sinr_threshold(rate_req: f64) -> f64 {
    rate_req.exp2() - 1.0
}

/// `Prob(beta * P h / (sigma^2 + I) >= gamma)` for `beta ~ Exp(1)`, which is
/// `exp(-gamma (sigma^2 + I) / (P h))`. A silent transmitter never succeeds.
pub fn success_probability(
    tx_power_mw: f64,
    mean_gain: f64,
    interference_mw: f64,
    noise_mw: f64,
    gamma_thr: f64,
) -> f64 {
    if tx_power_mw <= 0.0 || mean_gain <= 0.0 {
        return 0.0;
    }
    (-gamma_thr * (noise_mw + interference_mw) / (tx_power_mw * mean_gain)).exp()
}

/// Same probability expressed through the mean SINR of the link.
pub fn success_probability_from_sinr(mean_sinr: f64, gamma_thr: f64) -> f64 {
    if mean_sinr <= 0.0 {
        return 0.0;
    }
    (-gamma_thr / mean_sinr).exp()
}

/// Upper bound on a groupcaster's transmit power that keeps the co-channel
/// individual entity at `delta_thr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBound {
    /// `(P_c h_c / delta - sigma^2) / h_gc` before clipping; may be `<= 0`.
    pub raw_mw: f64,
    pub p_max_mw: f64,
}

impl PowerBound {
    pub fn is_feasible(&self) -> bool {
        self.raw_mw > 0.0
    }

    pub fn is_clipped(&self) -> bool {
        self.raw_mw >= self.p_max_mw
    }

    pub fn power(&self) -> Option<f64> {
        self.is_feasible().then(|| self.raw_mw.min(self.p_max_mw))
    }
}

pub fn power_upper_bound(
    ie_power_mw: f64,
    ie_to_bs_gain: f64,
    groupcaster_to_bs_gain: f64,
    noise_mw: f64,
    delta_thr: f64,
    p_max_mw: f64,
) -> PowerBound {
    let headroom = ie_power_mw * ie_to_bs_gain / delta_thr - noise_mw;
    PowerBound {
        raw_mw: headroom / groupcaster_to_bs_gain,
        p_max_mw,
    }
}

/// Smallest transmit power reaching `target_sinr` over `gain` against
/// `interference_mw` plus noise.
pub fn min_power_for_sinr(target_sinr: f64, gain: f64, interference_mw: f64, noise_mw: f64) -> f64 {
    target_sinr * (noise_mw + interference_mw) / gain
}

/// One receiver's term in the relay-selection objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTerm {
    pub tx_power_mw: f64,
    pub mean_gain: f64,
    pub interference_mw: f64,
}

/// Sum of closed-form success probabilities over a platoon's receivers.
pub fn reliability_objective(terms: &[ReliabilityTerm], noise_mw: f64, gamma_thr: f64) -> f64 {
    terms
        .iter()
        .map(|t| success_probability(t.tx_power_mw, t.mean_gain, t.interference_mw, noise_mw, gamma_thr))
        .sum()
}

/// Sum of interference-to-power ratios; smaller is better.
pub fn interference_ratio_objective(terms: &[ReliabilityTerm]) -> f64 {
    terms.iter().map(|t| t.interference_mw / t.tx_power_mw).sum()
}
