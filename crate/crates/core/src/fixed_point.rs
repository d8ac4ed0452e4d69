//! Coupled per-AC transmission/collision probabilities on one link.
//!
//! The zone chain gives the stationary distribution over backoff slots; the
//! collision probability of an AC weights per-zone collision odds by that
//! distribution; the mean-value backoff relation maps collision probability
//! back to a per-countdown-slot transmission probability. Iterating the
//! three maps with damping yields the link's operating point.

use crate::scenario::{AcEdcaConfig, LinkScenario};
use crate::zone::{build_zones, ZoneModel};
use thiserror::Error;

/// Iteration controls for [`solve`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Fraction of the new iterate blended in per step.
    pub damping: f64,
    /// Convergence threshold on max |delta p| per step.
    pub tolerance: f64,
    pub max_iterations: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { damping: 0.5, tolerance: 1e-10, max_iterations: 10_000 }
    }
}

/// Stationary zone quantities for a fixed transmission-probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneStationary {
    /// Stationary probability of each zone; sums to 1.
    pub pi: Vec<f64>,
    /// Stationary probability of the chain's root slot.
    pub pi00: f64,
    /// Survival through all slots of zones 1..=j (alpha[0] = 1).
    pub alpha: Vec<f64>,
    /// Per-slot probability that no eligible station transmits, per zone.
    pub q: Vec<f64>,
}

/// Converged operating point of one link. Per-AC vectors are in the link's
/// input AC order; zone vectors follow the stored [`ZoneModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    pub zones: ZoneModel,
    /// Transmission probability p per AC (per eligible countdown slot).
    pub tx_prob: Vec<f64>,
    /// Conditional collision probability c per AC.
    pub collision_prob: Vec<f64>,
    /// Packet loss probability c^R per AC.
    pub loss_prob: Vec<f64>,
    pub zone_stationary: ZoneStationary,
    pub iterations: u32,
    /// Max |delta p| of the final step.
    pub residual: f64,
}

impl FixedPointSolution {
    /// 1 - p per AC, in input order.
    pub fn idle_prob(&self, ac: usize) -> f64 {
        1.0 - self.tx_prob[ac]
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("fixed point did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: u32, residual: f64 },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Stationary zone distribution for sorted-order per-AC transmission
/// probabilities. With every p zero the chain drifts forever and all mass
/// sits in the unbounded last zone; that degenerate case is returned
/// explicitly rather than dividing by zero.
pub fn zone_stationary(p_sorted: &[f64], n_sorted: &[u32], zm: &ZoneModel) -> ZoneStationary {
    let j_total = zm.num_zones();
    // q[z] = prod over ACs eligible in zone z of (1-p)^n
    let q: Vec<f64> = (0..j_total)
        .map(|z| {
            (0..zm.eligible[z]).map(|k| (1.0 - p_sorted[k]).powi(n_sorted[k] as i32)).product()
        })
        .collect();
    // alpha[j] = survival through all slots of zones 1..=j
    let mut alpha = vec![1.0; j_total];
    for z in 1..j_total {
        let width = (zm.boundaries[z] - zm.boundaries[z - 1]) as i32;
        alpha[z] = alpha[z - 1] * q[z - 1].powi(width);
    }
    let tail = q[j_total - 1];
    if tail >= 1.0 {
        // Nobody ever transmits: all mass escapes to the last zone.
        let mut pi = vec![0.0; j_total];
        pi[j_total - 1] = 1.0;
        return ZoneStationary { pi, pi00: 0.0, alpha, q };
    }
    let mut mass = vec![0.0; j_total];
    for z in 0..j_total {
        mass[z] = if z + 1 < j_total {
            let width = zm.boundaries[z + 1] - zm.boundaries[z];
            // finite geometric sum 1 + q + ... + q^(width-1)
            let g = if (1.0 - q[z]).abs() < 1e-12 {
                width as f64
            } else {
                (1.0 - q[z].powi(width as i32)) / (1.0 - q[z])
            };
            alpha[z] * g
        } else {
            alpha[z] / (1.0 - tail)
        };
    }
    let total: f64 = mass.iter().sum();
    let pi00 = 1.0 / total;
    let pi = mass.iter().map(|m| m * pi00).collect();
    ZoneStationary { pi, pi00, alpha, q }
}

/// Conditional collision probability of sorted AC `k`: zone-weighted chance
/// that at least one other eligible station transmits alongside it. The
/// tagged station is factored out of the product directly, so n = 1 and
/// p -> 1 edge cases need no special handling.
pub fn collision_prob(
    k: usize,
    pi: &[f64],
    p_sorted: &[f64],
    n_sorted: &[u32],
    zm: &ZoneModel,
) -> f64 {
    let j_total = zm.num_zones();
    let z0 = zm.first_zone[k];
    let denom: f64 = pi[z0..].iter().sum();
    if denom <= 0.0 {
        return 0.0;
    }
    let mut c = 0.0;
    for z in z0..j_total {
        let mut others = 1.0;
        for i in 0..zm.eligible[z] {
            let r = 1.0 - p_sorted[i];
            let exp = if i == k { n_sorted[i] - 1 } else { n_sorted[i] };
            others *= r.powi(exp as i32);
        }
        c += pi[z] / denom * (1.0 - others);
    }
    c.clamp(0.0, 1.0)
}

/// Mean-value backoff relation: transmission probability per eligible
/// countdown slot for a given conditional collision probability. The result
/// is clamped to 1; reaching the clamp signals model breakdown at tiny
/// contention windows.
pub fn tx_prob(c: f64, ac: &AcEdcaConfig) -> f64 {
    let c = c.clamp(0.0, 1.0 - 1e-12);
    let retries = ac.retry_limit as u32;
    let eta = if c > 0.0 { (1.0 - c) / (1.0 - c.powi(retries as i32)) } else { 1.0 };
    let mut sum = 0.0;
    let mut cj = 1.0;
    for j in 0..retries {
        sum += cj * (ac.window_at_stage(j) as f64 - 1.0);
        cj *= c;
    }
    (2.0 / (eta * sum)).min(1.0)
}

/// Solve the link's fixed point by damped iteration.
pub fn solve(link: &LinkScenario, opts: &SolverOptions) -> Result<FixedPointSolution, SolveError> {
    if link.acs.is_empty() {
        return Err(SolveError::InvalidScenario("no active ACs".into()));
    }
    let zm = build_zones(link);
    let n_sorted: Vec<u32> = zm.order.iter().map(|&i| link.acs[i].n_stations).collect();
    let acs_sorted: Vec<&AcEdcaConfig> = zm.order.iter().map(|&i| &link.acs[i]).collect();

    // Collision-free initial guess.
    let mut p: Vec<f64> =
        acs_sorted.iter().map(|ac| 2.0 / (ac.cw_min as f64 + 1.0)).collect();
    let mut c = vec![0.0; p.len()];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=opts.max_iterations {
        let zs = zone_stationary(&p, &n_sorted, &zm);
        for k in 0..p.len() {
            c[k] = collision_prob(k, &zs.pi, &p, &n_sorted, &zm);
        }
        residual = 0.0;
        for k in 0..p.len() {
            let target = tx_prob(c[k], acs_sorted[k]);
            let next = (1.0 - opts.damping) * p[k] + opts.damping * target;
            residual = residual.max((next - p[k]).abs());
            p[k] = next;
        }
        iterations = it;
        if residual < opts.tolerance {
            break;
        }
    }
    if residual >= opts.tolerance {
        return Err(SolveError::NonConvergence { iterations, residual });
    }

    let zs = zone_stationary(&p, &n_sorted, &zm);
    for k in 0..p.len() {
        c[k] = collision_prob(k, &zs.pi, &p, &n_sorted, &zm);
    }
    // Map sorted-space results back to the link's input AC order.
    let i_total = link.acs.len();
    let mut tx = vec![0.0; i_total];
    let mut coll = vec![0.0; i_total];
    let mut loss = vec![0.0; i_total];
    for (k, &orig) in zm.order.iter().enumerate() {
        tx[orig] = p[k];
        coll[orig] = c[k];
        loss[orig] = c[k].powi(link.acs[orig].retry_limit as i32);
    }
    Ok(FixedPointSolution {
        zones: zm,
        tx_prob: tx,
        collision_prob: coll,
        loss_prob: loss,
        zone_stationary: zs,
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PhyProfile;
    use approx::assert_abs_diff_eq;

    fn link(acs: &[(u8, u32, u32, u32)]) -> LinkScenario {
        // (aifsn, cw_min, cw_max, n)
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
    fn zone_stationary_single_zone() {
        let zm = build_zones(&link(&[(2, 32, 1024, 1)]));
        let zs = zone_stationary(&[0.3], &[1], &zm);
        assert_eq!(zs.pi, vec![1.0]);
        assert_abs_diff_eq!(zs.pi00, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn zone_stationary_degenerate_all_idle() {
        let zm = build_zones(&link(&[(2, 32, 1024, 1), (4, 32, 1024, 1)]));
        let zs = zone_stationary(&[0.0, 0.0], &[1, 1], &zm);
        assert_eq!(zs.pi, vec![0.0, 1.0]);
        assert_eq!(zs.pi00, 0.0);
    }

    #[test]
    fn zone_stationary_normalizes() {
        let zm = build_zones(&link(&[(2, 32, 1024, 2), (5, 32, 1024, 3), (9, 32, 1024, 1)]));
        let zs = zone_stationary(&[0.05, 0.1, 0.2], &[2, 3, 1], &zm);
        let sum: f64 = zs.pi.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(zs.pi.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn collision_prob_single_station_is_zero() {
        let zm = build_zones(&link(&[(2, 32, 1024, 1)]));
        let zs = zone_stationary(&[0.2], &[1], &zm);
        assert_eq!(collision_prob(0, &zs.pi, &[0.2], &[1], &zm), 0.0);
    }

    #[test]
    fn collision_prob_two_same_ac_stations_is_p() {
        let zm = build_zones(&link(&[(2, 32, 1024, 2)]));
        for p in [0.05, 0.3, 0.9] {
            let zs = zone_stationary(&[p], &[2], &zm);
            assert_abs_diff_eq!(collision_prob(0, &zs.pi, &[p], &[2], &zm), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn tx_prob_collision_free() {
        let ac = &link(&[(2, 32, 1024, 1)]).acs[0];
        assert_abs_diff_eq!(tx_prob(0.0, ac), 2.0 / 31.0, epsilon = 1e-15);
    }

    #[test]
    fn tx_prob_clamps_at_tiny_windows() {
        let mut l = link(&[(2, 2, 2, 1)]);
        l.acs[0].cw_min = 2;
        l.acs[0].cw_max = 2;
        assert_eq!(tx_prob(0.0, &l.acs[0]), 1.0);
    }

    #[test]
    fn tx_prob_series_oracle() {
        // Frozen from a term-by-term evaluation of the stage series at
        // c = 0.5, R = 7, CW 32/1024.
        let ac = &link(&[(2, 32, 1024, 1)]).acs[0];
        assert_abs_diff_eq!(tx_prob(0.5, ac), 0.0192643155100493, epsilon = 1e-15);
    }

    #[test]
    fn solve_single_station_closed_form() {
        let sol = solve(&link(&[(2, 32, 1024, 1)]), &SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.tx_prob[0], 2.0 / 31.0, epsilon = 1e-9);
        assert_eq!(sol.collision_prob[0], 0.0);
        assert_eq!(sol.loss_prob[0], 0.0);
    }

    #[test]
    fn loss_is_collision_to_the_retry_power() {
        assert_abs_diff_eq!(0.5f64.powi(7), 0.0078125, epsilon = 1e-15);
        let sol = solve(&link(&[(8, 32, 1024, 4), (8, 32, 1024, 4)]), &SolverOptions::default())
            .unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(
                sol.loss_prob[k],
                sol.collision_prob[k].powi(7),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn symmetric_acs_converge_identically() {
        let sol = solve(&link(&[(8, 32, 1024, 4), (8, 32, 1024, 4)]), &SolverOptions::default())
            .unwrap();
        assert_eq!(sol.tx_prob[0], sol.tx_prob[1]);
        assert_eq!(sol.collision_prob[0], sol.collision_prob[1]);
    }

    #[test]
    fn converged_point_is_idempotent() {
        let l = link(&[(2, 32, 1024, 3), (5, 16, 256, 2)]);
        let opts = SolverOptions::default();
        let sol = solve(&l, &opts).unwrap();
        // one more full iteration moves p by less than the tolerance
        let zm = &sol.zones;
        let p_sorted: Vec<f64> = zm.order.iter().map(|&i| sol.tx_prob[i]).collect();
        let n_sorted: Vec<u32> = zm.order.iter().map(|&i| l.acs[i].n_stations).collect();
        let zs = zone_stationary(&p_sorted, &n_sorted, zm);
        for k in 0..p_sorted.len() {
            let c = collision_prob(k, &zs.pi, &p_sorted, &n_sorted, zm);
            let target = tx_prob(c, &l.acs[zm.order[k]]);
            let step = opts.damping * (target - p_sorted[k]).abs();
            assert!(step < 10.0 * opts.tolerance, "step {step:.3e}");
        }
    }

    #[test]
    fn adding_stations_never_reduces_collisions() {
        let mut prev = vec![0.0, 0.0];
        for n in 1..=6 {
            let sol =
                solve(&link(&[(2, 32, 1024, n), (5, 32, 1024, 2)]), &SolverOptions::default())
                    .unwrap();
            assert!(sol.collision_prob[0] >= prev[0] - 1e-9);
            assert!(sol.collision_prob[1] >= prev[1] - 1e-9);
            prev = sol.collision_prob.clone();
        }
    }
}
