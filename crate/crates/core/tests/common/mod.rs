#![allow(dead_code)]

//! Five entities, six subchannels and three platoons with injected entity
//! SINR tables, power bounds and member SINR profiles.

use platoon_core::GroupcastEnv;

/// Entities with an uplink SINR at or below this are excluded from sharing.
pub const SHARING_THRESHOLD: f64 = 30.0;

/// Entity SINR when sharing with a leader, `[k][m][c]`.
pub const LEADER_SHARING_SINR: [[[f64; 5]; 3]; 6] = [
    [[29.4, 42.1, 37.5, 20.1, 30.5], [35.2, 25.1, 40.2, 22.3, 25.4], [31.7, 30.4, 37.2, 27.5, 14.5]],
    [[22.4, 32.1, 32.7, 24.1, 20.5], [33.2, 35.7, 34.3, 32.3, 24.1], [31.5, 31.4, 33.3, 30.8, 21.1]],
    [[37.4, 44.4, 31.4, 42.5, 25.2], [39.5, 24.3, 22.5, 43.5, 24.6], [34.6, 39.6, 44.2, 42.6, 35.6]],
    [[44.8, 30.4, 31.4, 41.3, 28.4], [42.6, 33.5, 21.1, 36.6, 35.6], [39.6, 27.6, 21.6, 24.6, 38.6]],
    [[35.6, 31.4, 27.1, 42.6, 22.2], [44.6, 28.6, 39.6, 36.6, 27.1], [40.3, 26.6, 31.4, 30.6, 27.3]],
    [[36.1, 38.9, 37.5, 30.6, 24.6], [36.6, 22.6, 30.6, 33.6, 25.7], [28.4, 42.7, 39.9, 35.6, 44.6]],
];

/// Entity SINR when sharing with a relay, for entities 4 and 5, subchannels
/// 2, 4 and 6 and platoons 1 and 3 (one-based): `[k][m][c]`.
pub const RELAY_SHARING_SINR: [[[f64; 2]; 2]; 3] = [
    [[37.5, 35.1], [28.8, 33.8]],
    [[31.5, 29.6], [39.3, 29.0]],
    [[39.2, 29.1], [33.3, 37.2]],
];
const RELAY_SUBCHANNELS: [usize; 3] = [1, 3, 5];
const RELAY_PLATOONS: [usize; 2] = [0, 2];
const RELAY_IES: [usize; 2] = [3, 4];

/// Leader power bounds that are known explicitly, one-based `(c, k, m, x)`.
/// Every other feasible leader triple reuses its sharing SINR as its bound,
/// which keeps it below all of these.
pub const LEADER_BOUNDS: [(usize, usize, usize, f64); 12] = [
    (2, 3, 1, 50.7),
    (3, 3, 3, 50.4),
    (2, 6, 3, 49.8),
    (1, 4, 1, 49.6),
    (1, 5, 3, 48.3),
    (1, 3, 2, 46.1),
    (1, 1, 2, 43.4),
    (1, 1, 3, 40.5),
    (2, 1, 1, 37.2),
    (2, 1, 3, 38.4),
    (5, 6, 3, 41.1),
    (3, 1, 2, 39.1),
];

/// Relay power bounds for every feasible relay triple, one-based.
pub const RELAY_BOUNDS: [(usize, usize, usize, f64); 8] = [
    (4, 4, 3, 37.6),
    (4, 2, 1, 37.5),
    (5, 2, 3, 35.4),
    (4, 4, 1, 34.1),
    (5, 2, 1, 32.8),
    (4, 6, 1, 33.0),
    (4, 6, 3, 31.0),
    (5, 6, 3, 30.5),
];

pub const PLATOON_SIZES: [usize; 3] = [8, 6, 6];
pub const GAMMA: f64 = 3.0;

/// Member SINR at the leader's committed power, members 1.. in order.
pub const LEADER_PROFILES: [&[f64]; 3] = [
    &[20.0, 15.0, 10.0, 5.0, 2.0, 1.0, 0.5],
    &[30.0, 25.0, 20.0, 15.0, 10.0],
    &[12.0, 8.0, 4.0, 1.0, 0.5],
];

/// SINR at every member served by a relay.
pub const RELAY_HOP_SINR: f64 = 7.0;

pub struct WorkedExample;

fn lookup(table: &[(usize, usize, usize, f64)], c: usize, k: usize, m: usize) -> Option<f64> {
    table
        .iter()
        .find(|&&(tc, tk, tm, _)| (tc, tk, tm) == (c + 1, k + 1, m + 1))
        .map(|t| t.3)
}

impl WorkedExample {
    pub fn leader_sharing_sinr(c: usize, k: usize, m: usize) -> f64 {
        LEADER_SHARING_SINR[k][m][c]
    }

    pub fn relay_sharing_sinr(c: usize, k: usize, m: usize) -> Option<f64> {
        let ki = RELAY_SUBCHANNELS.iter().position(|&x| x == k)?;
        let mi = RELAY_PLATOONS.iter().position(|&x| x == m)?;
        let ci = RELAY_IES.iter().position(|&x| x == c)?;
        Some(RELAY_SHARING_SINR[ki][mi][ci])
    }
}

impl GroupcastEnv for WorkedExample {
    fn num_ies(&self) -> usize {
        5
    }

    fn num_subchannels(&self) -> usize {
        6
    }

    fn num_platoons(&self) -> usize {
        3
    }

    fn platoon_size(&self, platoon: usize) -> usize {
        PLATOON_SIZES[platoon]
    }

    fn gamma_thr(&self) -> f64 {
        GAMMA
    }

    fn p_max_mw(&self) -> f64 {
        100.0
    }

    fn power_bound(&self, ie: usize, subchannel: usize, platoon: usize, tx: usize) -> Option<f64> {
        if tx == 0 {
            let sinr = Self::leader_sharing_sinr(ie, subchannel, platoon);
            (sinr > SHARING_THRESHOLD).then(|| lookup(&LEADER_BOUNDS, ie, subchannel, platoon).unwrap_or(sinr))
        } else {
            let sinr = Self::relay_sharing_sinr(ie, subchannel, platoon)?;
            (sinr > SHARING_THRESHOLD).then(|| lookup(&RELAY_BOUNDS, ie, subchannel, platoon).expect("relay bound listed"))
        }
    }

    fn groupcast_sinr(&self, platoon: usize, tx: usize, rx: usize, _power_mw: f64, _sharer: Option<usize>) -> f64 {
        if tx == 0 {
            LEADER_PROFILES[platoon][rx - 1]
        } else {
            RELAY_HOP_SINR
        }
    }
}

/// One-based `(c, k, m)` label of a zero-based triple.
pub fn label(c: usize, k: usize, m: usize) -> (usize, usize, usize) {
    (c + 1, k + 1, m + 1)
}
