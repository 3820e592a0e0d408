use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::env::GroupcastEnv;
use super::{exclusive_grants, Allocation, Candidate, Match, Method, PlatoonIssue};
use crate::link::GroupcastRole;

/// A platoon and the member that transmits for it in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Groupcaster {
    pub platoon: usize,
    pub vehicle: usize,
}

/// Indices still free for matching.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pools {
    pub ies: BTreeSet<usize>,
    pub subchannels: BTreeSet<usize>,
    pub platoons: BTreeSet<usize>,
}

impl Pools {
    pub fn full<E: GroupcastEnv + ?Sized>(env: &E) -> Self {
        Pools {
            ies: (0..env.num_ies()).collect(),
            subchannels: (0..env.num_subchannels()).collect(),
            platoons: (0..env.num_platoons()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaySelection {
    /// The leader reaches every member.
    NotNeeded,
    Relay(usize),
    /// Even the first member is out of the leader's reach.
    CoverageFailed,
    /// The platoon received no leader matching.
    NoLeader,
}

impl RelaySelection {
    pub fn relay(self) -> Option<usize> {
        match self {
            RelaySelection::Relay(r) => Some(r),
            _ => None,
        }
    }

    /// Relay index with `-1` for "no relay".
    pub fn sentinel(self) -> i64 {
        self.relay().map_or(-1, |r| r as i64)
    }
}

/// Every intermediate result of one resource-sharing run.
#[derive(Debug, Clone, PartialEq)]
pub struct RspgTrace {
    pub leader_candidates: Vec<Candidate>,
    pub leader_matches: Vec<Candidate>,
    pub relays: Vec<RelaySelection>,
    pub relay_candidates: Vec<Candidate>,
    pub relay_matches: Vec<Candidate>,
}

/// All feasible triples over the given pools, in (subchannel, entity,
/// groupcaster) order.
pub fn generate_candidates<E: GroupcastEnv + ?Sized>(
    env: &E,
    role: GroupcastRole,
    groupcasters: &[Groupcaster],
    ies: &BTreeSet<usize>,
    subchannels: &BTreeSet<usize>,
) -> Vec<Candidate> {
    let mut out = Vec::new();
    for &k in subchannels {
        for &c in ies {
            for g in groupcasters {
                if let Some(power_mw) = env.power_bound(c, k, g.platoon, g.vehicle) {
                    out.push(Candidate { ie: c, subchannel: k, platoon: g.platoon, role, power_mw });
                }
            }
        }
    }
    out
}

fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.power_mw
        .total_cmp(&a.power_mw)
        .then(a.subchannel.cmp(&b.subchannel))
        .then(a.ie.cmp(&b.ie))
        .then(a.platoon.cmp(&b.platoon))
}

/// Descending power bound; ties by ascending subchannel, entity, platoon.
pub fn sort_candidates(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    candidates.sort_by(candidate_order);
    candidates
}

/// One greedy pass: a candidate is committed iff its entity, subchannel and
/// platoon are all still free. Committed indices leave `pools`.
pub fn resulted_matching(sorted: &[Candidate], pools: &mut Pools) -> Vec<Candidate> {
    let mut matched = Vec::new();
    for cand in sorted {
        if pools.platoons.is_empty() {
            break;
        }
        if pools.ies.contains(&cand.ie)
            && pools.subchannels.contains(&cand.subchannel)
            && pools.platoons.contains(&cand.platoon)
        {
            pools.ies.remove(&cand.ie);
            pools.subchannels.remove(&cand.subchannel);
            pools.platoons.remove(&cand.platoon);
            matched.push(*cand);
        }
    }
    matched
}

/// Walks each platoon outward from the leader at its committed power; the
/// last member above threshold before the first one at or below it relays.
pub fn select_prvs<E: GroupcastEnv + ?Sized>(env: &E, leader_matches: &[Candidate]) -> Vec<RelaySelection> {
    let gamma = env.gamma_thr();
    (0..env.num_platoons())
        .map(|m| {
            let Some(lm) = leader_matches.iter().find(|c| c.platoon == m) else {
                return RelaySelection::NoLeader;
            };
            let size = env.platoon_size(m);
            match (1..size).find(|&i| env.groupcast_sinr(m, 0, i, lm.power_mw, Some(lm.ie)) <= gamma) {
                None => RelaySelection::NotNeeded,
                Some(1) => RelaySelection::CoverageFailed,
                Some(i) => RelaySelection::Relay(i - 1),
            }
        })
        .collect()
}

pub fn rspg_run<E: GroupcastEnv + ?Sized>(env: &E) -> RspgTrace {
    let mut pools = Pools::full(env);
    let leaders: Vec<Groupcaster> = (0..env.num_platoons()).map(|m| Groupcaster { platoon: m, vehicle: 0 }).collect();
    let leader_candidates = sort_candidates(generate_candidates(
        env,
        GroupcastRole::Leader,
        &leaders,
        &pools.ies,
        &pools.subchannels,
    ));
    let leader_matches = resulted_matching(&leader_candidates, &mut pools);
    let relays = select_prvs(env, &leader_matches);

    let relay_casters: Vec<Groupcaster> = relays
        .iter()
        .enumerate()
        .filter_map(|(m, r)| r.relay().map(|v| Groupcaster { platoon: m, vehicle: v }))
        .collect();
    pools.platoons = relay_casters.iter().map(|g| g.platoon).collect();
    let relay_candidates = sort_candidates(generate_candidates(
        env,
        GroupcastRole::Relay,
        &relay_casters,
        &pools.ies,
        &pools.subchannels,
    ));
    let relay_matches = resulted_matching(&relay_candidates, &mut pools);

    RspgTrace { leader_candidates, leader_matches, relays, relay_candidates, relay_matches }
}

impl RspgTrace {
    pub fn into_allocation<E: GroupcastEnv + ?Sized>(self, env: &E) -> Allocation {
        let matches: Vec<Match> = self
            .leader_matches
            .iter()
            .chain(self.relay_matches.iter())
            .map(|&c| Match::from(c))
            .collect();
        let mut relays = Vec::with_capacity(self.relays.len());
        let mut coverage_boundary = Vec::with_capacity(self.relays.len());
        let mut issues = Vec::with_capacity(self.relays.len());
        for (m, sel) in self.relays.iter().enumerate() {
            let (relay, boundary, issue) = match *sel {
                RelaySelection::NotNeeded => (None, Some(env.platoon_size(m) - 1), None),
                RelaySelection::Relay(r) => {
                    let matched = self.relay_matches.iter().any(|c| c.platoon == m);
                    (Some(r), Some(r), (!matched).then_some(PlatoonIssue::RelayUnmatched))
                }
                RelaySelection::CoverageFailed => (None, None, Some(PlatoonIssue::LeaderCoverageFailed)),
                RelaySelection::NoLeader => (None, None, Some(PlatoonIssue::NoLeaderMatch)),
            };
            relays.push(relay);
            coverage_boundary.push(boundary);
            issues.push(issue);
        }
        let exclusive = exclusive_grants(&matches, env.num_ies(), env.num_subchannels());
        Allocation { method: Method::Rspg, matches, relays, coverage_boundary, issues, exclusive }
    }
}

pub fn rspg_allocate<E: GroupcastEnv + ?Sized>(env: &E) -> Allocation {
    rspg_run(env).into_allocation(env)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(c: usize, k: usize, m: usize, x: f64) -> Candidate {
        Candidate { ie: c, subchannel: k, platoon: m, role: GroupcastRole::Leader, power_mw: x }
    }

    #[test]
    fn sort_breaks_ties_by_subchannel_then_entity_then_platoon() {
        let sorted = sort_candidates(vec![
            cand(1, 2, 0, 5.0),
            cand(0, 2, 1, 5.0),
            cand(0, 2, 0, 5.0),
            cand(3, 0, 0, 5.0),
            cand(9, 9, 9, 7.0),
        ]);
        let keys: Vec<_> = sorted.iter().map(|c| (c.ie, c.subchannel, c.platoon)).collect();
        assert_eq!(keys, vec![(9, 9, 9), (3, 0, 0), (0, 2, 0), (0, 2, 1), (1, 2, 0)]);
    }

    #[test]
    fn matching_skips_used_indices_and_stops_when_platoons_run_out() {
        let sorted = vec![
            cand(0, 0, 0, 9.0),
            cand(0, 1, 1, 8.0),
            cand(1, 0, 1, 7.0),
            cand(1, 1, 0, 6.0),
            cand(1, 1, 1, 5.0),
            cand(2, 2, 1, 4.0),
        ];
        let mut pools = Pools {
            ies: (0..3).collect(),
            subchannels: (0..3).collect(),
            platoons: (0..2).collect(),
        };
        let got = resulted_matching(&sorted, &mut pools);
        assert_eq!(got, vec![cand(0, 0, 0, 9.0), cand(1, 1, 1, 5.0)]);
        assert!(pools.platoons.is_empty());
        assert_eq!(pools.ies, BTreeSet::from([2]));
        assert_eq!(pools.subchannels, BTreeSet::from([2]));
    }
}
