use super::env::{GroupcastEnv, ScenarioEnv};
use super::rspg::Pools;
use super::{exclusive_grants, Allocation, Match, Method, PlatoonIssue};
use crate::link::{min_power_for_sinr, GroupcastRole};

/// Leader power that lifts every member to the SINR threshold, with `sharer`
/// interfering. The entity's own uplink quality is not considered.
pub fn required_leader_power(env: &ScenarioEnv<'_>, platoon: usize, sharer: Option<usize>) -> f64 {
    let p = env.params();
    (1..env.platoon_size(platoon))
        .map(|j| {
            let interference = sharer.map_or(0.0, |c| env.ie_interference_at(c, platoon, j));
            min_power_for_sinr(p.gamma_thr, env.intra_gain(platoon, 0, j), interference, p.noise_mw)
        })
        .fold(0.0, f64::max)
}

/// Leader-only groupcast. Each platoon takes the lowest-index free entity
/// whose interference still lets the leader reach the tail within the power
/// limit, else a subchannel of its own.
pub fn no_relay_allocate(env: &ScenarioEnv<'_>) -> Allocation {
    let p = env.params();
    let platoons = env.num_platoons();
    let mut pools = Pools::full(env);
    let mut matches = Vec::new();
    let mut issues = vec![None; platoons];
    for m in 0..platoons {
        let Some(&k) = pools.subchannels.iter().next() else {
            issues[m] = Some(PlatoonIssue::NoLeaderMatch);
            continue;
        };
        pools.subchannels.remove(&k);
        let alone = required_leader_power(env, m, None);
        let shared = if alone <= p.p_max_mw {
            pools
                .ies
                .iter()
                .map(|&c| (c, required_leader_power(env, m, Some(c))))
                .find(|&(_, power)| power <= p.p_max_mw)
        } else {
            None
        };
        let (ie, power) = match shared {
            Some((c, power)) => {
                pools.ies.remove(&c);
                (Some(c), power)
            }
            None => (None, alone),
        };
        if power > p.p_max_mw {
            issues[m] = Some(PlatoonIssue::PowerShortfall);
        }
        matches.push(Match {
            ie,
            subchannel: k,
            platoon: m,
            role: GroupcastRole::Leader,
            power_mw: power.min(p.p_max_mw),
        });
    }
    let exclusive = exclusive_grants(&matches, env.num_ies(), env.num_subchannels());
    Allocation {
        method: Method::NoRelay,
        matches,
        relays: vec![None; platoons],
        coverage_boundary: (0..platoons).map(|m| Some(env.platoon_size(m) - 1)).collect(),
        issues,
        exclusive,
    }
}
