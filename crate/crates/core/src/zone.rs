//! AIFS zone structure of a link.
//!
//! After a busy period every AC defers its own AIFS; the backoff timeline
//! that follows the shortest AIFS therefore splits into zones, each with a
//! fixed set of ACs eligible to contend. ACs sharing an AIFS value share a
//! zone; the last zone is unbounded.

use crate::scenario::LinkScenario;

/// Zone decomposition of one link. Zones are stored 0-based; reports number
/// them 1..=J.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneModel {
    /// Sorted position -> original AC index (ascending AIFS, stable).
    pub order: Vec<usize>,
    /// Relative slot offset h of each sorted AC: (AIFS_k - AIFS_1) / slot.
    pub offsets: Vec<u32>,
    /// Distinct offsets, one per zone; boundaries[0] == 0.
    pub boundaries: Vec<u32>,
    /// Number of sorted ACs eligible in each zone (non-decreasing, ends at I).
    pub eligible: Vec<usize>,
    /// First zone in which each sorted AC may contend.
    pub first_zone: Vec<usize>,
}

/// Build the zone structure for a link. ACs are re-sorted by ascending AIFS
/// internally; `order` maps sorted positions back to input positions.
pub fn build_zones(link: &LinkScenario) -> ZoneModel {
    assert!(!link.acs.is_empty(), "zone model needs at least one AC");
    let mut order: Vec<usize> = (0..link.acs.len()).collect();
    order.sort_by_key(|&i| (link.acs[i].aifsn, i));
    let base = link.acs[order[0]].aifsn as u32;
    // AIFS differences are whole slots by construction from AIFSN.
    let offsets: Vec<u32> = order.iter().map(|&i| link.acs[i].aifsn as u32 - base).collect();

    let mut boundaries = Vec::new();
    let mut eligible = Vec::new();
    for (k, &h) in offsets.iter().enumerate() {
        if boundaries.last() == Some(&h) {
            *eligible.last_mut().unwrap() = k + 1;
        } else {
            boundaries.push(h);
            eligible.push(k + 1);
        }
    }
    let first_zone = offsets
        .iter()
        .map(|h| boundaries.iter().position(|b| b == h).unwrap())
        .collect();
    ZoneModel { order, offsets, boundaries, eligible, first_zone }
}

impl ZoneModel {
    /// Number of zones J.
    pub fn num_zones(&self) -> usize {
        self.boundaries.len()
    }

    /// Number of ACs I.
    pub fn num_acs(&self) -> usize {
        self.order.len()
    }

    /// Zone (0-based) of the 1-based backoff slot `j` counted from the end
    /// of the shortest AIFS. Slot j spans offsets [j-1, j); an AC contends in
    /// it once its extra offset h has fully elapsed, i.e. h <= j - 1.
    pub fn slot_zone(&self, j: u32) -> usize {
        assert!(j >= 1, "slots are numbered from 1");
        self.boundaries.partition_point(|&b| b <= j - 1) - 1
    }

    /// Number of sorted ACs whose AIFS has fully elapsed before slot `j`.
    pub fn eligible_in_slot(&self, j: u32) -> usize {
        self.eligible[self.slot_zone(j)]
    }
}
