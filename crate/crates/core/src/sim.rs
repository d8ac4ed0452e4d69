//! Slot-accurate Monte Carlo reference simulator for single-link EDCA.
//!
//! Stations carry saturated traffic and contend with RTS/CTS, per-AC AIFS,
//! binary-exponential backoff with a retry limit, and TXOP bursts. Backoff
//! counters freeze during busy periods. The channel clock advances busy
//! periods by the same occupancy durations the analytical model uses, so
//! delay samples and analytic tails share one time base.
//!
//! Two simulators live here: [`simulate`] runs full EDCA stations and is the
//! ground truth for the fixed point and the delay tails; [`simulate_bernoulli`]
//! drives the same AIFS zone timeline with stations that transmit
//! independently at fixed per-slot probabilities, which makes the zone chain
//! and the zone-weighted collision formula exact and directly checkable.

use crate::airtime::AcTiming;
use crate::scenario::LinkScenario;
use crate::zone::{build_zones, ZoneModel};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stop condition for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    /// Run until every AC has processed (delivered or dropped) this many
    /// packets.
    Packets(u64),
    /// Run for a fixed number of backoff-slot visits.
    Slots(u64),
}

/// Per-AC empirical counters and delay samples.
#[derive(Debug, Clone, Default)]
pub struct AcStats {
    /// (station, slot) pairs where the station was eligible and the slot
    /// completed idle, i.e. its counter ticked.
    pub eligible_idle_slots: u64,
    /// Transmission attempts (RTS fired).
    pub attempts: u64,
    /// Attempts that collided.
    pub collided_attempts: u64,
    /// Packets delivered.
    pub successes: u64,
    /// Contention cycles won (one per TXOP burst).
    pub bursts: u64,
    /// Packets dropped at the retry limit.
    pub drops: u64,
    /// Head-of-line access delay per delivered packet (us).
    pub delay_samples_us: Vec<f64>,
}

impl AcStats {
    /// Empirical transmission probability per eligible idle slot.
    pub fn tx_prob(&self) -> f64 {
        self.attempts as f64 / self.eligible_idle_slots as f64
    }

    /// Empirical conditional collision probability.
    pub fn collision_prob(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.collided_attempts as f64 / self.attempts as f64
        }
    }

    /// Empirical loss per service attempt: drops over head-of-line packets
    /// that entered contention. Matches the c^R loss semantics, where the
    /// follow-up packets of a TXOP burst ride on the head's success.
    pub fn loss_prob(&self) -> f64 {
        let serviced = self.bursts + self.drops;
        if serviced == 0 {
            0.0
        } else {
            self.drops as f64 / serviced as f64
        }
    }
}

/// Outcome of one full-EDCA run.
#[derive(Debug, Clone)]
pub struct SimReport {
    pub seed: u64,
    /// Backoff-slot visits processed.
    pub slots: u64,
    /// Visits per zone (indexed like the link's [`ZoneModel`]).
    pub zone_visits: Vec<u64>,
    /// Stats per AC, in the link's input order.
    pub per_ac: Vec<AcStats>,
}

impl SimReport {
    /// Zone occupancy frequencies.
    pub fn zone_freq(&self) -> Vec<f64> {
        let total: u64 = self.zone_visits.iter().sum();
        self.zone_visits.iter().map(|&v| v as f64 / total as f64).collect()
    }
}

/// Tail frequency Pr(D >= x) with a 95% Wilson interval.
/// `wide` flags fewer than 100 samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub probability: f64,
    pub lower: f64,
    pub upper: f64,
    pub samples: u64,
    pub wide: bool,
}

/// Empirical complementary CDF of the delay samples at threshold `x_us`.
pub fn empirical_ccdf(samples_us: &[f64], x_us: f64) -> TailEstimate {
    let n = samples_us.len() as u64;
    let hits = samples_us.iter().filter(|&&d| d >= x_us).count() as u64;
    let (lower, upper) = wilson_interval(hits, n, 1.96);
    TailEstimate {
        probability: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
        lower,
        upper,
        samples: n,
        wide: n < 100,
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

struct Station {
    ac: usize,     // input-order AC index
    sorted: usize, // sorted position (for the AIFS offset)
    counter: u32,
    stage: u32,
    hol_us: f64,
}

/// Run the full EDCA simulator on one link. Identical inputs produce
/// identical reports.
pub fn simulate(link: &LinkScenario, horizon: Horizon, seed: u64) -> SimReport {
    let zm = build_zones(link);
    let timings: Vec<AcTiming> =
        link.acs.iter().map(|ac| AcTiming::compute(ac, &link.phy)).collect();
    let mut sorted_of_ac = vec![0usize; link.acs.len()];
    for (k, &orig) in zm.order.iter().enumerate() {
        sorted_of_ac[orig] = k;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stations: Vec<Station> = Vec::new();
    for (ac_idx, ac) in link.acs.iter().enumerate() {
        for _ in 0..ac.n_stations {
            stations.push(Station {
                ac: ac_idx,
                sorted: sorted_of_ac[ac_idx],
                counter: rng.gen_range(0..ac.cw_min),
                stage: 0,
                hol_us: 0.0,
            });
        }
    }

    let mut per_ac: Vec<AcStats> = vec![AcStats::default(); link.acs.len()];
    let mut zone_visits = vec![0u64; zm.num_zones()];
    let mut t_us = 0.0_f64;
    let mut slot = 1u32; // 1-based slot index within the current epoch
    let mut slots_done = 0u64;
    let mut transmitters: Vec<usize> = Vec::new();

    let done = |per_ac: &[AcStats], slots_done: u64| match horizon {
        Horizon::Packets(n) => per_ac.iter().all(|s| s.successes + s.drops >= n),
        Horizon::Slots(n) => slots_done >= n,
    };

    while !done(&per_ac, slots_done) {
        zone_visits[zm.slot_zone(slot)] += 1;
        slots_done += 1;

        transmitters.clear();
        for (si, st) in stations.iter().enumerate() {
            let eligible = zm.offsets[st.sorted] < slot;
            if eligible && st.counter == 0 {
                transmitters.push(si);
            }
        }

        if transmitters.is_empty() {
            // Idle slot: every eligible counter ticks.
            for st in stations.iter_mut() {
                if zm.offsets[st.sorted] < slot {
                    per_ac[st.ac].eligible_idle_slots += 1;
                    st.counter -= 1;
                }
            }
            t_us += link.phy.slot_us;
            slot += 1;
            continue;
        }

        if transmitters.len() == 1 {
            let si = transmitters[0];
            let ac_idx = stations[si].ac;
            let tm = &timings[ac_idx];
            per_ac[ac_idx].attempts += 1;
            // Burst of N packets: the head's delay runs from reaching the
            // head of line to the ACK that closes its own exchange; the rest
            // occupy one TXOP slice each.
            let head_exchange =
                tm.t_success_us - tm.aifs_us - (tm.n_txop as f64 - 1.0) * tm.delta_us;
            let first_delay = (t_us - stations[si].hol_us) + head_exchange;
            per_ac[ac_idx].delay_samples_us.push(first_delay);
            for _ in 1..tm.n_txop {
                per_ac[ac_idx].delay_samples_us.push(tm.delta_us);
            }
            per_ac[ac_idx].successes += tm.n_txop as u64;
            per_ac[ac_idx].bursts += 1;
            t_us += tm.t_success_us;
            let st = &mut stations[si];
            st.stage = 0;
            st.counter = rng.gen_range(0..link.acs[ac_idx].cw_min);
            // The next head-of-line packet starts its cycle where the burst's
            // airtime ends; the AIFS folded into the occupancy time belongs
            // to the new cycle's defer.
            st.hol_us = t_us - tm.aifs_us;
        } else {
            let busy: f64 = transmitters
                .iter()
                .map(|&si| timings[stations[si].ac].t_collision_us)
                .fold(0.0, f64::max);
            t_us += busy;
            for &si in &transmitters {
                let ac_idx = stations[si].ac;
                let ac = &link.acs[ac_idx];
                per_ac[ac_idx].attempts += 1;
                per_ac[ac_idx].collided_attempts += 1;
                let st = &mut stations[si];
                st.stage += 1;
                if st.stage >= ac.retry_limit as u32 {
                    per_ac[ac_idx].drops += 1;
                    st.stage = 0;
                    st.hol_us = t_us - timings[ac_idx].aifs_us;
                }
                st.counter = rng.gen_range(0..ac.window_at_stage(st.stage));
            }
        }
        slot = 1; // busy period ends, AIFS deferral restarts
    }

    SimReport { seed, slots: slots_done, zone_visits, per_ac }
}

/// Outcome of a probe run with fixed per-slot transmission probabilities.
#[derive(Debug, Clone)]
pub struct BernoulliReport {
    pub slots: u64,
    pub zone_visits: Vec<u64>,
    /// Attempts / collided attempts per sorted AC.
    pub attempts: Vec<u64>,
    pub collided_attempts: Vec<u64>,
}

impl BernoulliReport {
    pub fn zone_freq(&self) -> Vec<f64> {
        let total: u64 = self.zone_visits.iter().sum();
        self.zone_visits.iter().map(|&v| v as f64 / total as f64).collect()
    }

    pub fn collision_prob(&self, sorted_ac: usize) -> f64 {
        self.collided_attempts[sorted_ac] as f64 / self.attempts[sorted_ac] as f64
    }
}

/// Drive the zone timeline with stations that transmit independently with
/// probability `p_sorted[ac]` in every slot where their AIFS has elapsed.
/// `p_sorted` follows the sorted (ascending AIFS) order of `zm`.
pub fn simulate_bernoulli(
    zm: &ZoneModel,
    p_sorted: &[f64],
    n_sorted: &[u32],
    slots: u64,
    seed: u64,
) -> BernoulliReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let i_total = zm.num_acs();
    let mut zone_visits = vec![0u64; zm.num_zones()];
    let mut attempts = vec![0u64; i_total];
    let mut collided = vec![0u64; i_total];
    let mut slot = 1u32;
    let mut tx: Vec<usize> = Vec::new();
    for _ in 0..slots {
        zone_visits[zm.slot_zone(slot)] += 1;
        tx.clear();
        for k in 0..i_total {
            if zm.offsets[k] < slot {
                for _ in 0..n_sorted[k] {
                    if rng.gen_bool(p_sorted[k]) {
                        tx.push(k);
                    }
                }
            }
        }
        if tx.is_empty() {
            slot += 1;
        } else {
            for &k in &tx {
                attempts[k] += 1;
                if tx.len() > 1 {
                    collided[k] += 1;
                }
            }
            slot = 1;
        }
    }
    BernoulliReport { slots, zone_visits, attempts, collided_attempts: collided }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{AcEdcaConfig, PhyProfile};

    fn link(acs: &[(u8, u32, u32, u32)]) -> LinkScenario {
        let acs = acs
            .iter()
            .map(|&(aifsn, cw_min, cw_max, n_stations)| AcEdcaConfig {
                name: String::new(),
                cw_min,
                cw_max,
                aifsn,
                txop_us: 0.0,
                retry_limit: 7,
                n_stations,
                payload_bits: 8000,
                dmax_ms: 100.0,
                epsilon: 1e-4,
            })
            .collect();
        LinkScenario { phy: PhyProfile::default(), acs }
    }

    #[test]
    fn deterministic_given_seed() {
        let l = link(&[(2, 16, 256, 2), (5, 32, 1024, 2)]);
        let a = simulate(&l, Horizon::Packets(500), 7);
        let b = simulate(&l, Horizon::Packets(500), 7);
        assert_eq!(a.slots, b.slots);
        assert_eq!(a.zone_visits, b.zone_visits);
        for (x, y) in a.per_ac.iter().zip(&b.per_ac) {
            assert_eq!(x.attempts, y.attempts);
            assert_eq!(x.delay_samples_us, y.delay_samples_us);
        }
        let c = simulate(&l, Horizon::Packets(500), 8);
        assert_ne!(a.slots, c.slots);
    }

    #[test]
    fn single_station_never_collides() {
        let l = link(&[(2, 32, 1024, 1)]);
        let r = simulate(&l, Horizon::Packets(5_000), 1);
        assert_eq!(r.per_ac[0].collided_attempts, 0);
        assert_eq!(r.per_ac[0].drops, 0);
        // mean counter draw is (CW_min - 1) / 2 idle slots per packet
        let mean_backoff = r.per_ac[0].eligible_idle_slots as f64 / r.per_ac[0].attempts as f64;
        assert!((mean_backoff - 15.5).abs() < 0.5, "mean backoff {mean_backoff}");
    }

    #[test]
    fn symmetric_acs_see_symmetric_rates() {
        let l = link(&[(3, 32, 1024, 2), (3, 32, 1024, 2)]);
        let r = simulate(&l, Horizon::Packets(20_000), 3);
        let p0 = r.per_ac[0].tx_prob();
        let p1 = r.per_ac[1].tx_prob();
        assert!((p0 - p1).abs() / p0 < 0.05, "p0 {p0} p1 {p1}");
    }

    #[test]
    fn lower_aifsn_wins_priority() {
        let l = link(&[(2, 32, 1024, 2), (8, 32, 1024, 2)]);
        let r = simulate(&l, Horizon::Packets(20_000), 5);
        assert!(r.per_ac[0].tx_prob() > r.per_ac[1].tx_prob());
    }

    #[test]
    fn wilson_interval_rule_of_three() {
        // zero hits: upper bound close to 3/n for large n
        let (lo, hi) = wilson_interval(0, 1000, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi < 0.005, "hi {hi}");
        let est = empirical_ccdf(&[1.0, 2.0, 3.0], 0.0);
        assert_eq!(est.probability, 1.0);
        assert!(est.wide);
    }

    #[test]
    fn wilson_covers_a_known_distribution() {
        // exponential samples: the analytic tail should land inside the
        // 95% interval in the vast majority of repeated experiments
        let rate = 1.0 / 500.0;
        let x = 800.0;
        let exact = (-rate * x as f64).exp();
        let mut inside = 0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let samples: Vec<f64> = (0..2000)
                .map(|_| -(1.0 - rng.gen::<f64>()).ln() / rate)
                .collect();
            let est = empirical_ccdf(&samples, x);
            if exact >= est.lower && exact <= est.upper {
                inside += 1;
            }
        }
        assert!(inside >= 17, "only {inside}/20 intervals covered the exact tail");
    }
}
