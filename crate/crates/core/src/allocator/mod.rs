//! Subchannel, power and relay allocation for platoon groupcasting.
//!
//! The resource-sharing method matches individual entities, subchannels and
//! platoon groupcasters as triples: leaders first, then relays for the
//! platoons whose leader cannot reach every member. Two baselines are
//! provided for comparison: a centralized minimum-power relay method and a
//! leader-only method without relays.

mod centralized;
mod env;
mod no_relay;
mod rspg;

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::GroupcastRole;
use crate::scenario::Scenario;

pub use centralized::{centralized_allocate, centralized_relay_choice, RelayPowerPlan};
pub use env::{GroupcastEnv, ScenarioEnv};
pub use no_relay::{no_relay_allocate, required_leader_power};
pub use rspg::{
    generate_candidates, resulted_matching, rspg_allocate, rspg_run, select_prvs, sort_candidates,
    Groupcaster, Pools, RelaySelection, RspgTrace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rspg,
    Centralized,
    NoRelay,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rspg, Method::Centralized, Method::NoRelay];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rspg => "rspg",
            Method::Centralized => "centralized",
            Method::NoRelay => "no_relay",
        }
    }

    pub fn allocate(self, env: &ScenarioEnv<'_>) -> Allocation {
        match self {
            Method::Rspg => rspg_allocate(env),
            Method::Centralized => centralized_allocate(env),
            Method::NoRelay => no_relay_allocate(env),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rspg" => Ok(Method::Rspg),
            "centralized" => Ok(Method::Centralized),
            "no_relay" | "no-relay" => Ok(Method::NoRelay),
            other => Err(Error::InvalidSweep(format!(
                "unknown method `{other}` (expected rspg, centralized or no_relay)"
            ))),
        }
    }
}

/// A feasible (entity, subchannel, platoon, role) triple with its power bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub ie: usize,
    pub subchannel: usize,
    pub platoon: usize,
    pub role: GroupcastRole,
    pub power_mw: f64,
}

/// A committed groupcast subchannel. `ie` is `None` when no entity shares it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub ie: Option<usize>,
    pub subchannel: usize,
    pub platoon: usize,
    pub role: GroupcastRole,
    pub power_mw: f64,
}

impl From<Candidate> for Match {
    fn from(c: Candidate) -> Self {
        Match {
            ie: Some(c.ie),
            subchannel: c.subchannel,
            platoon: c.platoon,
            role: c.role,
            power_mw: c.power_mw,
        }
    }
}

/// An entity keeping a subchannel to itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusiveGrant {
    pub ie: usize,
    pub subchannel: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlatoonIssue {
    /// No feasible leader matching was left for this platoon.
    NoLeaderMatch,
    /// The leader's committed power does not even reach the first member.
    LeaderCoverageFailed,
    /// A relay was selected but no relay matching could be committed.
    RelayUnmatched,
    /// The power a baseline asked for exceeded the transmit power limit.
    PowerShortfall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub method: Method,
    pub matches: Vec<Match>,
    /// Relay vehicle index per platoon, `-1` in text form when there is none.
    #[serde(with = "relay_sentinel")]
    pub relays: Vec<Option<usize>>,
    /// Farthest member reached by the leader's groupcast, when defined.
    pub coverage_boundary: Vec<Option<usize>>,
    pub issues: Vec<Option<PlatoonIssue>>,
    pub exclusive: Vec<ExclusiveGrant>,
}

mod relay_sentinel {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Option<usize>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|r| r.map_or(-1, |i| i as i64))
            .collect::<Vec<i64>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<usize>>, D::Error> {
        let raw = Vec::<i64>::deserialize(d)?;
        raw.into_iter()
            .map(|r| match r {
                -1 => Ok(None),
                r if r >= 0 => Ok(Some(r as usize)),
                r => Err(serde::de::Error::custom(format!("invalid relay index {r}"))),
            })
            .collect()
    }
}

impl Allocation {
    /// Relay vector with the `-1` sentinel.
    pub fn prv_vector(&self) -> Vec<i64> {
        self.relays.iter().map(|r| r.map_or(-1, |i| i as i64)).collect()
    }

    pub fn subchannel_count(&self) -> usize {
        self.matches.len()
    }

    pub fn groupcast_match(&self, platoon: usize, role: GroupcastRole) -> Option<&Match> {
        self.matches.iter().find(|m| m.platoon == platoon && m.role == role)
    }

    pub fn relay_count(&self) -> usize {
        self.relays.iter().filter(|r| r.is_some()).count()
    }

    /// Checks every structural constraint against the platoon sizes and pool
    /// dimensions the allocation was made for.
    pub fn validate(&self, platoon_sizes: &[usize], num_ies: usize, num_subchannels: usize, p_max_mw: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidAllocation(msg));
        let platoons = platoon_sizes.len();
        if self.relays.len() != platoons || self.coverage_boundary.len() != platoons || self.issues.len() != platoons {
            return bad(format!("per-platoon vectors must have length {platoons}"));
        }
        let mut subchannels = BTreeSet::new();
        let mut ies = BTreeSet::new();
        let mut groupcasters = BTreeSet::new();
        for m in &self.matches {
            if m.subchannel >= num_subchannels || m.platoon >= platoons {
                return bad(format!("match {m:?} indexes outside the scenario"));
            }
            if !subchannels.insert(m.subchannel) {
                return bad(format!("subchannel {} used by two groupcasters", m.subchannel));
            }
            if let Some(c) = m.ie {
                if c >= num_ies {
                    return bad(format!("entity {c} does not exist"));
                }
                if !ies.insert(c) {
                    return bad(format!("entity {c} shares two subchannels"));
                }
            }
            if !groupcasters.insert((m.platoon, m.role)) {
                return bad(format!("platoon {} holds two {} subchannels", m.platoon, m.role));
            }
            if m.role == GroupcastRole::Relay && self.relays[m.platoon].is_none() {
                return bad(format!("platoon {} has a relay subchannel but no relay", m.platoon));
            }
            if !(m.power_mw >= 0.0 && m.power_mw <= p_max_mw) {
                return bad(format!("power {} mW outside [0, {p_max_mw}]", m.power_mw));
            }
        }
        for g in &self.exclusive {
            if g.ie >= num_ies || g.subchannel >= num_subchannels {
                return bad(format!("exclusive grant {g:?} indexes outside the scenario"));
            }
            if !subchannels.insert(g.subchannel) {
                return bad(format!("subchannel {} granted twice", g.subchannel));
            }
            if !ies.insert(g.ie) {
                return bad(format!("entity {} holds two subchannels", g.ie));
            }
        }
        for (m, (&size, (&relay, &boundary))) in platoon_sizes
            .iter()
            .zip(self.relays.iter().zip(self.coverage_boundary.iter()))
            .enumerate()
        {
            if let Some(n) = boundary {
                if n < 1 || n > size - 1 {
                    return bad(format!("platoon {m}: coverage boundary {n} outside [1, {}]", size - 1));
                }
            }
            if let Some(r) = relay {
                let Some(n) = boundary else {
                    return bad(format!("platoon {m}: relay {r} without a coverage boundary"));
                };
                if r < 1 || r > n {
                    return bad(format!("platoon {m}: relay {r} outside [1, {n}]"));
                }
            }
        }
        Ok(())
    }

    pub fn validate_for(&self, scenario: &Scenario) -> Result<()> {
        let p = &scenario.params;
        self.validate(&scenario.platoon_sizes(), p.num_ies, p.num_subchannels, p.p_max_mw)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Allocation::from_json(&fs::read_to_string(path)?)
    }
}

/// Hands leftover subchannels to entities that share nothing, both in
/// ascending index order.
pub(crate) fn exclusive_grants(matches: &[Match], num_ies: usize, num_subchannels: usize) -> Vec<ExclusiveGrant> {
    let used_k: BTreeSet<usize> = matches.iter().map(|m| m.subchannel).collect();
    let used_c: BTreeSet<usize> = matches.iter().filter_map(|m| m.ie).collect();
    let free_k = (0..num_subchannels).filter(|k| !used_k.contains(k));
    let free_c = (0..num_ies).filter(|c| !used_c.contains(c));
    free_c
        .zip(free_k)
        .map(|(ie, subchannel)| ExclusiveGrant { ie, subchannel })
        .collect()
}
