use std::collections::BTreeSet;

use super::env::{GroupcastEnv, ScenarioEnv};
use super::rspg::{resulted_matching, sort_candidates, Pools};
use super::{exclusive_grants, Allocation, Candidate, Match, Method, PlatoonIssue};
use crate::link::{min_power_for_sinr, GroupcastRole};

/// Interference-free powers for the two hops through relay `relay`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayPowerPlan {
    pub relay: usize,
    pub leader_power_mw: f64,
    /// Zero when the relay is the tail and has nobody to forward to.
    pub relay_power_mw: f64,
}

impl RelayPowerPlan {
    pub fn total_mw(&self) -> f64 {
        self.leader_power_mw + self.relay_power_mw
    }
}

fn hop_power(env: &ScenarioEnv<'_>, platoon: usize, tx: usize, receivers: std::ops::RangeInclusive<usize>) -> f64 {
    let p = env.params();
    receivers
        .map(|j| min_power_for_sinr(p.gamma_thr, env.intra_gain(platoon, tx, j), 0.0, p.noise_mw))
        .fold(0.0, f64::max)
}

/// Relay minimising total transmit power, ties to the member nearer the leader.
pub fn centralized_relay_choice(env: &ScenarioEnv<'_>, platoon: usize) -> RelayPowerPlan {
    let tail = env.platoon_size(platoon) - 1;
    let mut best: Option<RelayPowerPlan> = None;
    for r in 1..=tail {
        let plan = RelayPowerPlan {
            relay: r,
            leader_power_mw: hop_power(env, platoon, 0, 1..=r),
            relay_power_mw: if r < tail { hop_power(env, platoon, r, r + 1..=tail) } else { 0.0 },
        };
        if best.is_none_or(|b| plan.total_mw() < b.total_mw()) {
            best = Some(plan);
        }
    }
    best.expect("platoons have at least two vehicles")
}

/// Minimum-power relay selection with a fixed two subchannels per platoon.
/// Entities are paired by the same greedy matcher whenever their uplink stays
/// above its threshold; unpaired groupcasters get subchannels of their own.
pub fn centralized_allocate(env: &ScenarioEnv<'_>) -> Allocation {
    let p = env.params();
    let platoons = env.num_platoons();
    let plans: Vec<RelayPowerPlan> = (0..platoons).map(|m| centralized_relay_choice(env, m)).collect();
    let shortfall: Vec<bool> = plans
        .iter()
        .map(|pl| pl.leader_power_mw > p.p_max_mw || pl.relay_power_mw > p.p_max_mw)
        .collect();

    let mut pools = Pools::full(env);
    let mut matches: Vec<Match> = Vec::new();
    for role in [GroupcastRole::Leader, GroupcastRole::Relay] {
        let mut candidates = Vec::new();
        for &k in &pools.subchannels {
            for &c in &pools.ies {
                for (m, plan) in plans.iter().enumerate() {
                    let (tx, power) = match role {
                        GroupcastRole::Leader => (0, plan.leader_power_mw),
                        GroupcastRole::Relay => (plan.relay, plan.relay_power_mw),
                    };
                    let power = power.min(p.p_max_mw);
                    if env.ie_sinr(c, Some((m, tx, power))) >= p.delta_thr {
                        candidates.push(Candidate { ie: c, subchannel: k, platoon: m, role, power_mw: power });
                    }
                }
            }
        }
        pools.platoons = (0..platoons).collect();
        let matched = resulted_matching(&sort_candidates(candidates), &mut pools);
        matches.extend(matched.into_iter().map(Match::from));
        let paired: BTreeSet<usize> = matches.iter().filter(|x| x.role == role).map(|x| x.platoon).collect();
        for (m, plan) in plans.iter().enumerate() {
            if paired.contains(&m) {
                continue;
            }
            let Some(&k) = pools.subchannels.iter().next() else { break };
            pools.subchannels.remove(&k);
            let power = match role {
                GroupcastRole::Leader => plan.leader_power_mw,
                GroupcastRole::Relay => plan.relay_power_mw,
            };
            matches.push(Match { ie: None, subchannel: k, platoon: m, role, power_mw: power.min(p.p_max_mw) });
        }
    }

    let exclusive = exclusive_grants(&matches, env.num_ies(), env.num_subchannels());
    let has_both = |m: usize| {
        matches.iter().any(|x| x.platoon == m && x.role == GroupcastRole::Leader)
            && matches.iter().any(|x| x.platoon == m && x.role == GroupcastRole::Relay)
    };
    let issues = (0..platoons)
        .map(|m| {
            if shortfall[m] {
                Some(PlatoonIssue::PowerShortfall)
            } else if !has_both(m) {
                Some(PlatoonIssue::RelayUnmatched)
            } else {
                None
            }
        })
        .collect();
    Allocation {
        method: Method::Centralized,
        matches,
        relays: plans.iter().map(|pl| Some(pl.relay)).collect(),
        coverage_boundary: plans.iter().map(|pl| Some(pl.relay)).collect(),
        issues,
        exclusive,
    }
}
