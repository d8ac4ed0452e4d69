//! Scenario configuration: PHY timing profile, per-AC EDCA parameters,
//! and the AC-to-link assignment of a multi-link setup.
//!
//! All types are plain immutable data; every other module consumes them.
//! Durations are carried in microseconds, payloads in bits (config files
//! accept bytes and convert on load), delay bounds in milliseconds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// PHY-layer timing and framing constants shared by every AC on a link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyProfile {
    /// Backoff slot duration sigma (us).
    pub slot_us: f64,
    /// Discrete lattice step used by the delay transforms (us). Must divide
    /// the slot time evenly.
    pub delta_us: f64,
    /// Short interframe space (us).
    pub sifs_us: f64,
    /// PHY preamble + header duration (us).
    pub phy_header_us: f64,
    /// Data rate (Mbps, numerically bits/us).
    pub data_rate_mbps: f64,
    /// Control-frame rate (Mbps, numerically bits/us).
    pub ctrl_rate_mbps: f64,
    /// RTS frame length (bits).
    pub rts_bits: u32,
    /// CTS frame length (bits).
    pub cts_bits: u32,
    /// ACK frame length (bits).
    pub ack_bits: u32,
    /// MAC header length (bits).
    pub mac_header_bits: u32,
}

impl Default for PhyProfile {
    /// Legacy 11 Mbps profile used throughout the built-in examples.
    fn default() -> Self {
        Self {
            slot_us: 20.0,
            delta_us: 10.0,
            sifs_us: 10.0,
            phy_header_us: 192.0,
            data_rate_mbps: 11.0,
            ctrl_rate_mbps: 1.0,
            rts_bits: 160,
            cts_bits: 112,
            ack_bits: 112,
            mac_header_bits: 224,
        }
    }
}

/// EDCA tunables plus workload and QoS target for one access category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcEdcaConfig {
    /// Label used in reports. Purely cosmetic.
    #[serde(default)]
    pub name: String,
    /// Minimum contention window (slots). The collision model needs
    /// CW_min >= 2 and CW_max/CW_min an exact power of two.
    pub cw_min: u32,
    /// Maximum contention window (slots).
    pub cw_max: u32,
    /// Arbitration interframe space number; AIFS = SIFS + AIFSN * slot.
    pub aifsn: u8,
    /// TXOP limit (us), multiple of 32 us; 0 means a single packet per access.
    pub txop_us: f64,
    /// Retry limit R: attempts before the head-of-line packet is dropped.
    pub retry_limit: u8,
    /// Number of saturated stations carrying this AC.
    pub n_stations: u32,
    /// Payload per packet (bits). Serialized as `payload_bytes`.
    #[serde(with = "payload_bytes", rename = "payload_bytes")]
    pub payload_bits: u64,
    /// Delay bound D_max (ms).
    pub dmax_ms: f64,
    /// Delay-violation probability target; 1.0 disables the constraint.
    pub epsilon: f64,
}

/// Config files quote payloads in bytes; the model works in bits.
mod payload_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(bits / 8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        u64::deserialize(d).map(|bytes| bytes * 8)
    }
}

impl AcEdcaConfig {
    /// Backoff-stage cap m = log2(CW_max / CW_min). Meaningful only when the
    /// ratio is a power of two, which validation enforces.
    pub fn max_backoff_stage(&self) -> u32 {
        (self.cw_max / self.cw_min).trailing_zeros()
    }

    /// Contention window at 0-based backoff stage `j`: 2^min(j, m) * CW_min.
    pub fn window_at_stage(&self, j: u32) -> u32 {
        (1u32 << j.min(self.max_backoff_stage())) * self.cw_min
    }
}

/// AIFS duration for an AC: SIFS + AIFSN * slot (us).
pub fn aifs_of(ac: &AcEdcaConfig, phy: &PhyProfile) -> f64 {
    phy.sifs_us + ac.aifsn as f64 * phy.slot_us
}

/// The set of ACs active on one link, sharing one PHY profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    pub phy: PhyProfile,
    pub acs: Vec<AcEdcaConfig>,
}

/// A multi-link scenario: every AC is pinned to exactly one of `links`
/// independent links. This struct is also the on-disk JSON config schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MloScenario {
    pub phy: PhyProfile,
    /// Number of independent links M.
    #[serde(default = "one")]
    pub links: u32,
    /// 1-based link id per AC; defaults to everything on link 1.
    #[serde(default)]
    pub assignment: Vec<u32>,
    pub acs: Vec<AcEdcaConfig>,
}

fn one() -> u32 {
    1
}

/// How bad a violated invariant is. `Error` breaks the model's arithmetic
/// and analysis must refuse to run; `Range` flags a value outside the
/// standard parameter grid the optimizer searches, which the analytical
/// model itself handles fine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Range,
}

/// A single violated invariant, reported with the offending field path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
    pub severity: Severity,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// True if any violation is fatal for analysis.
pub fn has_fatal(violations: &[Violation]) -> bool {
    violations.iter().any(|v| v.severity == Severity::Error)
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("assignment[{index}] = {link} is outside 1..={links}")]
    AssignmentOutOfRange { index: usize, link: u32, links: u32 },
    #[error("assignment has {got} entries for {expected} ACs")]
    AssignmentLength { got: usize, expected: usize },
}

fn check(out: &mut Vec<Violation>, ok: bool, path: &str, message: impl Into<String>) {
    if !ok {
        out.push(Violation {
            path: path.to_string(),
            message: message.into(),
            severity: Severity::Error,
        });
    }
}

fn check_range(out: &mut Vec<Violation>, ok: bool, path: &str, message: impl Into<String>) {
    if !ok {
        out.push(Violation {
            path: path.to_string(),
            message: message.into(),
            severity: Severity::Range,
        });
    }
}

impl PhyProfile {
    pub fn validate(&self) -> Vec<Violation> {
        self.validate_at("phy")
    }

    fn validate_at(&self, base: &str) -> Vec<Violation> {
        let mut v = Vec::new();
        let positive: [(&str, f64); 6] = [
            ("slot_us", self.slot_us),
            ("delta_us", self.delta_us),
            ("sifs_us", self.sifs_us),
            ("phy_header_us", self.phy_header_us),
            ("data_rate_mbps", self.data_rate_mbps),
            ("ctrl_rate_mbps", self.ctrl_rate_mbps),
        ];
        for (name, value) in positive {
            check(
                &mut v,
                value > 0.0 && value.is_finite(),
                &format!("{base}.{name}"),
                "must be strictly positive",
            );
        }
        for (name, value) in [
            ("rts_bits", self.rts_bits),
            ("cts_bits", self.cts_bits),
            ("ack_bits", self.ack_bits),
            ("mac_header_bits", self.mac_header_bits),
        ] {
            check(&mut v, value > 0, &format!("{base}.{name}"), "must be strictly positive");
        }
        if self.slot_us > 0.0 && self.delta_us > 0.0 {
            let ratio = self.slot_us / self.delta_us;
            check(
                &mut v,
                (ratio - ratio.round()).abs() < 1e-9,
                &format!("{base}.delta_us"),
                "discrete step must divide the slot time evenly",
            );
        }
        v
    }
}

impl AcEdcaConfig {
    pub fn validate(&self) -> Vec<Violation> {
        self.validate_at("ac")
    }

    fn validate_at(&self, base: &str) -> Vec<Violation> {
        let mut v = Vec::new();
        check(
            &mut v,
            self.cw_min >= 2,
            &format!("{base}.cw_min"),
            "CW_min must be at least 2 (the collision model degenerates at 1)",
        );
        check(
            &mut v,
            self.cw_max <= 1024,
            &format!("{base}.cw_max"),
            "CW_max must not exceed 1024",
        );
        check(
            &mut v,
            self.cw_min <= self.cw_max,
            &format!("{base}.cw_max"),
            "CW_max must be >= CW_min",
        );
        if self.cw_min > 0 && self.cw_min <= self.cw_max {
            let ratio_pow2 = self.cw_max % self.cw_min == 0
                && (self.cw_max / self.cw_min).is_power_of_two();
            check(&mut v, ratio_pow2, &format!("{base}.cw_max"), "CW ratio not power of two");
        }
        check_range(
            &mut v,
            (2..=15).contains(&self.aifsn),
            &format!("{base}.aifsn"),
            "AIFSN must lie in 2..=15",
        );
        check(
            &mut v,
            self.txop_us.is_finite() && self.txop_us >= 0.0,
            &format!("{base}.txop_us"),
            "TXOP must be non-negative",
        );
        check_range(
            &mut v,
            self.txop_us <= 8192.0,
            &format!("{base}.txop_us"),
            "TXOP must not exceed 8192 us",
        );
        check_range(
            &mut v,
            (self.txop_us / 32.0 - (self.txop_us / 32.0).round()).abs() < 1e-9,
            &format!("{base}.txop_us"),
            "TXOP not multiple of 32 us",
        );
        check_range(
            &mut v,
            (4..=7).contains(&self.retry_limit),
            &format!("{base}.retry_limit"),
            "retry limit must lie in 4..=7",
        );
        check(
            &mut v,
            self.retry_limit >= 1,
            &format!("{base}.retry_limit"),
            "retry limit must be at least 1",
        );
        check(&mut v, self.n_stations >= 1, &format!("{base}.n_stations"), "need at least one station");
        check(
            &mut v,
            self.epsilon > 0.0 && self.epsilon <= 1.0,
            &format!("{base}.epsilon"),
            "violation threshold must lie in (0, 1]",
        );
        check(
            &mut v,
            self.dmax_ms > 0.0 && self.dmax_ms.is_finite(),
            &format!("{base}.dmax_ms"),
            "delay bound must be positive",
        );
        v
    }
}

impl LinkScenario {
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = self.phy.validate_at("phy");
        check(&mut v, !self.acs.is_empty(), "acs", "link needs at least one active AC");
        for (i, ac) in self.acs.iter().enumerate() {
            v.extend(ac.validate_at(&format!("acs[{i}]")));
        }
        v
    }
}

impl MloScenario {
    /// Effective assignment: explicit entries, or everything on link 1.
    pub fn effective_assignment(&self) -> Vec<u32> {
        if self.assignment.is_empty() {
            vec![1; self.acs.len()]
        } else {
            self.assignment.clone()
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = self.phy.validate_at("phy");
        check(&mut v, self.links >= 1, "links", "need at least one link");
        check(&mut v, !self.acs.is_empty(), "acs", "need at least one AC");
        let assignment = self.effective_assignment();
        check(
            &mut v,
            assignment.len() == self.acs.len(),
            "assignment",
            format!("has {} entries for {} ACs", assignment.len(), self.acs.len()),
        );
        for (i, &m) in assignment.iter().enumerate() {
            check(
                &mut v,
                (1..=self.links).contains(&m),
                &format!("assignment[{i}]"),
                format!("link id {m} outside 1..={}", self.links),
            );
        }
        for (i, ac) in self.acs.iter().enumerate() {
            v.extend(ac.validate_at(&format!("acs[{i}]")));
        }
        v
    }

    /// Partition the ACs into per-link scenarios. Link `m`'s scenario holds
    /// exactly the ACs with assignment m; links may come back empty and are
    /// skipped by downstream analysis.
    pub fn split_links(&self) -> Result<Vec<LinkScenario>, ConfigError> {
        let assignment = self.effective_assignment();
        if assignment.len() != self.acs.len() {
            return Err(ConfigError::AssignmentLength {
                got: assignment.len(),
                expected: self.acs.len(),
            });
        }
        let mut links: Vec<LinkScenario> = (0..self.links)
            .map(|_| LinkScenario { phy: self.phy.clone(), acs: Vec::new() })
            .collect();
        for (i, &m) in assignment.iter().enumerate() {
            if m < 1 || m > self.links {
                return Err(ConfigError::AssignmentOutOfRange { index: i, link: m, links: self.links });
            }
            links[(m - 1) as usize].acs.push(self.acs[i].clone());
        }
        Ok(links)
    }

    /// Original AC indices per link, in the same order `split_links` emits them.
    pub fn link_members(&self) -> Vec<Vec<usize>> {
        let assignment = self.effective_assignment();
        let mut members = vec![Vec::new(); self.links as usize];
        for (i, &m) in assignment.iter().enumerate() {
            if m >= 1 && m <= self.links {
                members[(m - 1) as usize].push(i);
            }
        }
        members
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ac(aifsn: u8) -> AcEdcaConfig {
        AcEdcaConfig {
            name: String::new(),
            cw_min: 32,
            cw_max: 1024,
            aifsn,
            txop_us: 4096.0,
            retry_limit: 7,
            n_stations: 4,
            payload_bits: 8000,
            dmax_ms: 100.0,
            epsilon: 1e-4,
        }
    }

    #[test]
    fn aifs_matches_definition() {
        let phy = PhyProfile::default();
        assert_eq!(aifs_of(&ac(2), &phy), 50.0);
        assert_eq!(aifs_of(&ac(8), &phy), 170.0);
        assert_eq!(aifs_of(&ac(15), &phy), 310.0);
    }

    #[test]
    fn aifs_strictly_increasing_in_aifsn() {
        let phy = PhyProfile::default();
        let mut prev = f64::NEG_INFINITY;
        for aifsn in 2..=15 {
            let v = aifs_of(&ac(aifsn), &phy);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn cw_ratio_must_be_power_of_two() {
        let mut a = ac(2);
        a.cw_min = 32;
        a.cw_max = 1024;
        assert!(a.validate().is_empty());
        a.cw_max = 1000;
        let v = a.validate();
        assert!(v.iter().any(|v| v.message.contains("power of two")), "{v:?}");
    }

    #[test]
    fn txop_step_is_32us() {
        let mut a = ac(2);
        a.txop_us = 100.0;
        let v = a.validate();
        assert!(v.iter().any(|v| v.message.contains("multiple of 32")), "{v:?}");
        a.txop_us = 96.0;
        assert!(a.validate().is_empty());
    }

    #[test]
    fn off_grid_txop_is_flagged_but_not_fatal() {
        // Values like 4080 us fall between 32 us steps; the model still
        // analyzes them, so the flag must not block a run.
        let mut a = ac(8);
        a.txop_us = 4080.0;
        let v = a.validate();
        assert_eq!(v.len(), 1);
        assert!(!has_fatal(&v));
    }

    #[test]
    fn cw_min_one_rejected() {
        let mut a = ac(2);
        a.cw_min = 1;
        a.cw_max = 1024;
        assert!(!a.validate().is_empty());
    }

    #[test]
    fn split_links_partitions() {
        let mlo = MloScenario {
            phy: PhyProfile::default(),
            links: 2,
            assignment: vec![1, 1, 1, 2, 2],
            acs: (0..5).map(|i| ac(2 + i as u8)).collect(),
        };
        let links = mlo.split_links().unwrap();
        assert_eq!(links[0].acs.len(), 3);
        assert_eq!(links[1].acs.len(), 2);
        assert_eq!(links[0].acs[0].aifsn, 2);
        assert_eq!(links[1].acs[0].aifsn, 5);
    }

    #[test]
    fn split_links_empty_link() {
        let mlo = MloScenario {
            phy: PhyProfile::default(),
            links: 2,
            assignment: vec![1; 5],
            acs: (0..5).map(|_| ac(2)).collect(),
        };
        let links = mlo.split_links().unwrap();
        assert_eq!(links[0].acs.len(), 5);
        assert!(links[1].acs.is_empty());
    }

    #[test]
    fn split_links_bad_assignment() {
        let mlo = MloScenario {
            phy: PhyProfile::default(),
            links: 2,
            assignment: vec![1, 3],
            acs: vec![ac(2), ac(3)],
        };
        assert!(mlo.split_links().is_err());
        assert!(!mlo.validate().is_empty());
    }

    #[test]
    fn payload_roundtrips_in_bytes() {
        let a = ac(2);
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["payload_bytes"], 1000);
        let back: AcEdcaConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back.payload_bits, 8000);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn grid_ac() -> impl Strategy<Value = AcEdcaConfig> {
            (1u32..=10, 2u8..=15, 0u16..=256, 4u8..=7, 1u32..=8, 1u64..=3000).prop_flat_map(
                |(cw_exp, aifsn, txop_steps, retry, n, bytes)| {
                    (0u32..=(10 - cw_exp)).prop_map(move |ratio_exp| AcEdcaConfig {
                        name: String::new(),
                        cw_min: 1 << cw_exp,
                        cw_max: 1 << (cw_exp + ratio_exp),
                        aifsn,
                        txop_us: 32.0 * txop_steps as f64,
                        retry_limit: retry,
                        n_stations: n,
                        payload_bits: bytes * 8,
                        dmax_ms: 100.0,
                        epsilon: 1e-4,
                    })
                },
            )
        }

        proptest! {
            /// Every configuration on the standard parameter grid is clean;
            /// pushing any single field off the grid raises a violation.
            #[test]
            fn grid_configs_validate_clean(a in grid_ac(), which in 0usize..5) {
                prop_assert!(a.validate().is_empty(), "{:?}", a.validate());
                let mut bad = a.clone();
                match which {
                    0 => bad.cw_min = 1,
                    1 => bad.aifsn = 16,
                    2 => bad.txop_us += 1.0,
                    3 => bad.retry_limit = 8,
                    _ => bad.n_stations = 0,
                }
                prop_assert!(!bad.validate().is_empty());
            }

            /// Splitting links partitions the AC set for any assignment.
            #[test]
            fn split_is_a_partition(
                aifsns in proptest::collection::vec(2u8..=15, 1..8),
                links in 1u32..4,
                seed in 0u64..500,
            ) {
                let mut s = seed;
                let assignment: Vec<u32> = aifsns.iter().map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    1 + ((s >> 33) as u32 % links)
                }).collect();
                let mlo = MloScenario {
                    phy: PhyProfile::default(),
                    links,
                    assignment,
                    acs: aifsns.iter().map(|&a| ac(a)).collect(),
                };
                let split = mlo.split_links().unwrap();
                let total: usize = split.iter().map(|l| l.acs.len()).sum();
                prop_assert_eq!(total, aifsns.len());
                // and link members recover every index exactly once
                let mut seen: Vec<usize> = mlo.link_members().into_iter().flatten().collect();
                seen.sort_unstable();
                prop_assert_eq!(seen, (0..aifsns.len()).collect::<Vec<_>>());
            }
        }
    }
}
