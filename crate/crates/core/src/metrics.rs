//! Evaluation metrics for an allocation: groupcast latency, entity QoS
//! satisfaction, subchannel usage, spectral efficiency and reliability.
//!
//! A groupcast hop runs at the rate of its weakest intended receiver. With a
//! relay the message crosses two hops back to back, so hop times add.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocator::{Allocation, GroupcastEnv, Match, ScenarioEnv};
use crate::channel::sample_fading;
use crate::link::{rate_bps_per_hz, success_probability_from_sinr, GroupcastRole};
use crate::scenario::ModelParams;

/// Relative slack when comparing a SINR against a threshold that a power
/// was computed to meet exactly; absorbs rounding only.
pub const QOS_RELATIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Mean over platoons with finite latency; infinite when none has one.
    pub avg_latency_ms: f64,
    pub qos_satisfaction_rate: f64,
    pub allocated_subchannels: usize,
    pub spectral_efficiency: f64,
    pub coverage_failures: usize,
    /// Closed-form success probability averaged over members, then platoons.
    pub mean_reliability: f64,
    /// Share of members whose success probability reaches `theta_th`.
    pub reliability_satisfied_rate: f64,
    /// Monte Carlo counterpart of `mean_reliability`, when requested.
    pub mc_reliability: Option<f64>,
}

/// Packet size and subchannel bandwidth; together they turn a rate into time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub packet_bits: f64,
    pub subchannel_bandwidth_hz: f64,
}

impl Timing {
    pub fn from_params(p: &ModelParams) -> Self {
        Timing {
            packet_bits: p.packet_size_bytes * 8.0,
            subchannel_bandwidth_hz: p.subchannel_bandwidth_hz(),
        }
    }

    /// Serialization time in ms; infinite at zero rate.
    pub fn hop_latency_ms(&self, rate_bps_per_hz: f64) -> f64 {
        if rate_bps_per_hz <= 0.0 {
            return f64::INFINITY;
        }
        1e3 * self.packet_bits / (rate_bps_per_hz * self.subchannel_bandwidth_hz)
    }
}

/// One groupcast transmission of a platoon and the members it must serve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub platoon: usize,
    pub role: GroupcastRole,
    pub tx: usize,
    /// Inclusive receiver range; empty when `first > last`.
    pub first: usize,
    pub last: usize,
    pub link: Option<Match>,
}

impl Hop {
    pub fn receivers(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn is_empty(&self) -> bool {
        self.first > self.last
    }
}

/// The hops that together deliver a leader's message to every member.
pub fn platoon_hops(alloc: &Allocation, platoon: usize, size: usize) -> Vec<Hop> {
    let tail = size - 1;
    let leader = alloc.groupcast_match(platoon, GroupcastRole::Leader).copied();
    match alloc.relays[platoon] {
        None => vec![Hop { platoon, role: GroupcastRole::Leader, tx: 0, first: 1, last: tail, link: leader }],
        Some(r) => vec![
            Hop { platoon, role: GroupcastRole::Leader, tx: 0, first: 1, last: r, link: leader },
            Hop {
                platoon,
                role: GroupcastRole::Relay,
                tx: r,
                first: r + 1,
                last: tail,
                link: alloc.groupcast_match(platoon, GroupcastRole::Relay).copied(),
            },
        ],
    }
}

fn hop_sinrs<'a, E: GroupcastEnv + ?Sized>(env: &'a E, hop: &'a Hop) -> impl Iterator<Item = f64> + 'a {
    let link = hop.link;
    hop.receivers().map(move |rx| match link {
        Some(l) => env.groupcast_sinr(hop.platoon, hop.tx, rx, l.power_mw, l.ie),
        None => 0.0,
    })
}

/// Rate of the weakest receiver; a hop without receivers carries nothing.
pub fn hop_rate<E: GroupcastEnv + ?Sized>(env: &E, hop: &Hop) -> f64 {
    if hop.is_empty() || hop.link.is_none() {
        return 0.0;
    }
    rate_bps_per_hz(hop_sinrs(env, hop).fold(f64::INFINITY, f64::min))
}

/// Latency of one platoon in ms, infinite when a needed hop cannot deliver.
pub fn platoon_latency<E: GroupcastEnv + ?Sized>(env: &E, alloc: &Allocation, platoon: usize, timing: &Timing) -> f64 {
    platoon_hops(alloc, platoon, env.platoon_size(platoon))
        .iter()
        .filter(|h| !h.is_empty())
        .map(|h| timing.hop_latency_ms(hop_rate(env, h)))
        .sum()
}

/// Mean latency over platoons whose latency is finite.
pub fn average_latency<E: GroupcastEnv + ?Sized>(env: &E, alloc: &Allocation, timing: &Timing) -> f64 {
    let finite: Vec<f64> = (0..env.num_platoons())
        .map(|m| platoon_latency(env, alloc, m, timing))
        .filter(|l| l.is_finite())
        .collect();
    if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

pub fn meets_threshold(sinr: f64, threshold: f64) -> bool {
    sinr >= threshold * (1.0 - QOS_RELATIVE_SLACK)
}

pub fn qos_satisfied(sinr: f64, delta_thr: f64) -> bool {
    meets_threshold(sinr, delta_thr)
}

/// Satisfied sharing entities over sharing entities; 1 when nobody shares.
pub fn qos_satisfaction(env: &ScenarioEnv<'_>, alloc: &Allocation) -> f64 {
    let delta = env.params().delta_thr;
    let mut sharing = 0usize;
    let mut satisfied = 0usize;
    for m in &alloc.matches {
        let Some(c) = m.ie else { continue };
        let tx = match m.role {
            GroupcastRole::Leader => 0,
            GroupcastRole::Relay => alloc.relays[m.platoon].expect("validated allocation"),
        };
        sharing += 1;
        if qos_satisfied(env.ie_sinr(c, Some((m.platoon, tx, m.power_mw))), delta) {
            satisfied += 1;
        }
    }
    if sharing == 0 {
        1.0
    } else {
        satisfied as f64 / sharing as f64
    }
}

pub fn subchannel_count(alloc: &Allocation) -> usize {
    alloc.subchannel_count()
}

/// Mean worst-receiver rate over allocated groupcast subchannels.
pub fn spectral_efficiency<E: GroupcastEnv + ?Sized>(env: &E, alloc: &Allocation) -> f64 {
    let rates: Vec<f64> = (0..env.num_platoons())
        .flat_map(|m| platoon_hops(alloc, m, env.platoon_size(m)))
        .filter(|h| h.link.is_some())
        .map(|h| hop_rate(env, &h))
        .collect();
    if rates.is_empty() {
        0.0
    } else {
        rates.iter().sum::<f64>() / rates.len() as f64
    }
}

/// Platoons with a missing hop, a flagged issue or a member below threshold.
pub fn coverage_failures<E: GroupcastEnv + ?Sized>(env: &E, alloc: &Allocation) -> usize {
    let gamma = env.gamma_thr();
    (0..env.num_platoons())
        .filter(|&m| {
            alloc.issues[m].is_some()
                || platoon_hops(alloc, m, env.platoon_size(m))
                    .iter()
                    .filter(|h| !h.is_empty())
                    .any(|h| h.link.is_none() || hop_sinrs(env, h).any(|s| !meets_threshold(s, gamma)))
        })
        .count()
}

/// Per member: mean SINR on the hop that serves it.
fn member_sinrs<E: GroupcastEnv + ?Sized>(env: &E, alloc: &Allocation, platoon: usize) -> Vec<f64> {
    platoon_hops(alloc, platoon, env.platoon_size(platoon))
        .iter()
        .flat_map(|h| hop_sinrs(env, h).collect::<Vec<_>>())
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Closed-form mean success probability and the share of members reaching `theta`.
pub fn reliability<E: GroupcastEnv + ?Sized>(env: &E, alloc: &Allocation, theta: f64) -> (f64, f64) {
    let gamma = env.gamma_thr();
    let per_platoon: Vec<Vec<f64>> = (0..env.num_platoons())
        .map(|m| {
            member_sinrs(env, alloc, m)
                .into_iter()
                .map(|s| success_probability_from_sinr(s, gamma))
                .collect()
        })
        .collect();
    let avg = mean(per_platoon.iter().map(|ps| mean(ps.iter().copied())));
    let members = per_platoon.iter().map(Vec::len).sum::<usize>();
    let ok = per_platoon.iter().flatten().filter(|&&p| p >= theta).count();
    (avg, if members == 0 { 0.0 } else { ok as f64 / members as f64 })
}

/// Monte Carlo estimate of `reliability`'s mean with Rayleigh fading on the
/// desired link only.
pub fn mc_reliability<E: GroupcastEnv + ?Sized, R: Rng + ?Sized>(
    env: &E,
    alloc: &Allocation,
    draws: usize,
    rng: &mut R,
) -> f64 {
    let gamma = env.gamma_thr();
    mean((0..env.num_platoons()).map(|m| {
        mean(member_sinrs(env, alloc, m).into_iter().map(|s| {
            let hits = (0..draws).filter(|_| sample_fading(rng) * s >= gamma).count();
            hits as f64 / draws as f64
        }))
    }))
}

pub fn evaluate(env: &ScenarioEnv<'_>, alloc: &Allocation) -> MetricsReport {
    let p = env.params();
    let timing = Timing::from_params(p);
    let (mean_reliability, reliability_satisfied_rate) = reliability(env, alloc, p.theta_th);
    MetricsReport {
        avg_latency_ms: average_latency(env, alloc, &timing),
        qos_satisfaction_rate: qos_satisfaction(env, alloc),
        allocated_subchannels: subchannel_count(alloc),
        spectral_efficiency: spectral_efficiency(env, alloc),
        coverage_failures: coverage_failures(env, alloc),
        mean_reliability,
        reliability_satisfied_rate,
        mc_reliability: None,
    }
}

pub fn evaluate_with_fading<R: Rng + ?Sized>(
    env: &ScenarioEnv<'_>,
    alloc: &Allocation,
    draws: usize,
    rng: &mut R,
) -> MetricsReport {
    let mut report = evaluate(env, alloc);
    if draws > 0 {
        report.mc_reliability = Some(mc_reliability(env, alloc, draws, rng));
    }
    report
}
