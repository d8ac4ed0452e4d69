//! Frame durations, TXOP packet counts, and channel-occupancy times.
//!
//! Durations are kept in real-valued microseconds; the delay transforms
//! round them onto the discrete lattice at context-build time.

use crate::scenario::{aifs_of, AcEdcaConfig, PhyProfile};

/// Per-AC timing bundle derived from a PHY profile and EDCA config.
#[derive(Debug, Clone, PartialEq)]
pub struct AcTiming {
    /// Data frame duration: PHY header + (MAC header + payload) / data rate.
    pub t_data_us: f64,
    /// RTS duration at the control rate.
    pub t_rts_us: f64,
    /// CTS duration at the control rate.
    pub t_cts_us: f64,
    /// ACK duration at the control rate.
    pub t_ack_us: f64,
    /// Per-packet slice inside a TXOP: DATA + ACK + 2 SIFS.
    pub delta_us: f64,
    /// Packets per TXOP: max(floor(TXOP / delta), 1).
    pub n_txop: u32,
    /// Channel time consumed by an RTS collision, including the AIFS that
    /// follows it.
    pub t_collision_us: f64,
    /// Channel time of a full successful exchange (RTS/CTS + burst),
    /// including the trailing AIFS.
    pub t_success_us: f64,
    /// This AC's AIFS (us).
    pub aifs_us: f64,
}

/// Data and control frame durations for one AC.
pub fn frame_times(ac: &AcEdcaConfig, phy: &PhyProfile) -> (f64, f64, f64, f64) {
    let t_data = phy.phy_header_us
        + (phy.mac_header_bits as f64 + ac.payload_bits as f64) / phy.data_rate_mbps;
    let t_rts = phy.phy_header_us + phy.rts_bits as f64 / phy.ctrl_rate_mbps;
    let t_cts = phy.phy_header_us + phy.cts_bits as f64 / phy.ctrl_rate_mbps;
    let t_ack = phy.phy_header_us + phy.ack_bits as f64 / phy.ctrl_rate_mbps;
    (t_data, t_rts, t_cts, t_ack)
}

/// Packets per TXOP; a zero or short TXOP still carries one packet.
pub fn txop_count(txop_us: f64, delta_us: f64) -> u32 {
    ((txop_us / delta_us).floor() as u32).max(1)
}

impl AcTiming {
    pub fn compute(ac: &AcEdcaConfig, phy: &PhyProfile) -> AcTiming {
        let (t_data_us, t_rts_us, t_cts_us, t_ack_us) = frame_times(ac, phy);
        let delta_us = t_data_us + t_ack_us + 2.0 * phy.sifs_us;
        let n_txop = txop_count(ac.txop_us, delta_us);
        let aifs_us = aifs_of(ac, phy);
        let t_collision_us = t_rts_us + aifs_us;
        let t_success_us =
            t_rts_us + t_cts_us + n_txop as f64 * delta_us + phy.sifs_us + aifs_us;
        AcTiming {
            t_data_us,
            t_rts_us,
            t_cts_us,
            t_ack_us,
            delta_us,
            n_txop,
            t_collision_us,
            t_success_us,
            aifs_us,
        }
    }
}
