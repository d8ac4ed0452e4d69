//! Oracle checks for the analytical pieces.
//!
//! The Bernoulli probe simulator transmits i.i.d. per slot, which makes the
//! zone chain and the zone-weighted collision formula exact: disagreement
//! there is a bug, not an approximation. The full-EDCA comparisons live in
//! the acceptance suite.

use mledca::fixed_point::{collision_prob, solve, zone_stationary, SolverOptions};
use mledca::scenario::{AcEdcaConfig, LinkScenario, PhyProfile};
use mledca::sim::simulate_bernoulli;
use mledca::zone::build_zones;

fn link(aifsns: &[u8], n: &[u32]) -> LinkScenario {
    let acs = aifsns
        .iter()
        .zip(n)
        .map(|(&aifsn, &n_stations)| AcEdcaConfig {
            name: String::new(),
            cw_min: 32,
            cw_max: 1024,
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

fn mean_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mu = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
    (mu, (var / n).sqrt())
}

#[test]
fn zone_occupancy_matches_bernoulli_probe() {
    // Two ACs with offsets [0, 2], fixed p = 0.1 each, one station each.
    let l = link(&[2, 4], &[1, 1]);
    let zm = build_zones(&l);
    let p = [0.1, 0.1];
    let n = [1, 1];
    let zs = zone_stationary(&p, &n, &zm);

    let freqs: Vec<Vec<f64>> = (0..12)
        .map(|seed| simulate_bernoulli(&zm, &p, &n, 200_000, 1000 + seed).zone_freq())
        .collect();
    for zone in 0..zm.num_zones() {
        let per_seed: Vec<f64> = freqs.iter().map(|f| f[zone]).collect();
        let (mu, se) = mean_se(&per_seed);
        let dev = (zs.pi[zone] - mu).abs();
        assert!(
            dev <= 3.0 * se,
            "zone {zone}: chain {:.5} probe {mu:.5} +- {se:.5}",
            zs.pi[zone]
        );
    }
}

#[test]
fn zone_occupancy_matches_probe_with_ties_and_multistation() {
    let l = link(&[2, 2, 7], &[2, 1, 3]);
    let zm = build_zones(&l);
    let p = [0.08, 0.15, 0.05];
    let n = [2, 1, 3];
    let zs = zone_stationary(&p, &n, &zm);
    let freqs: Vec<Vec<f64>> = (0..12)
        .map(|seed| simulate_bernoulli(&zm, &p, &n, 200_000, 2000 + seed).zone_freq())
        .collect();
    for zone in 0..zm.num_zones() {
        let per_seed: Vec<f64> = freqs.iter().map(|f| f[zone]).collect();
        let (mu, se) = mean_se(&per_seed);
        assert!(
            (zs.pi[zone] - mu).abs() <= 3.0 * se.max(1e-6),
            "zone {zone}: chain {:.5} probe {mu:.5} +- {se:.5}",
            zs.pi[zone]
        );
    }
}

#[test]
fn collision_prob_matches_bernoulli_probe() {
    // Two ACs, two stations each, probabilities taken from a converged
    // solve; the probe then measures the conditional collision frequency.
    let l = link(&[2, 5], &[2, 2]);
    let sol = solve(&l, &SolverOptions::default()).unwrap();
    let zm = build_zones(&l);
    let p_sorted: Vec<f64> = zm.order.iter().map(|&i| sol.tx_prob[i]).collect();
    let n_sorted: Vec<u32> = zm.order.iter().map(|&i| l.acs[i].n_stations).collect();
    let zs = zone_stationary(&p_sorted, &n_sorted, &zm);

    for k in 0..2 {
        let model = collision_prob(k, &zs.pi, &p_sorted, &n_sorted, &zm);
        let per_seed: Vec<f64> = (0..12)
            .map(|seed| {
                simulate_bernoulli(&zm, &p_sorted, &n_sorted, 300_000, 3000 + seed)
                    .collision_prob(k)
            })
            .collect();
        let (mu, se) = mean_se(&per_seed);
        assert!(
            (model - mu).abs() <= 3.0 * se,
            "ac {k}: model {model:.5} probe {mu:.5} +- {se:.5}"
        );
    }
}
