//! Total-delay probability generating function of one AC on a link.
//!
//! The head-of-line delay of a packet decomposes into the AIFS defer (with
//! restarts when a higher-priority AC grabs the channel), the backoff
//! countdown whose every tick costs an idle slot or a busy period, the
//! collision/retry cycle, and finally the data transmission itself; packets
//! riding a TXOP burst behind the head contribute a flat per-packet slice.
//! Each piece is a generating function over the discrete time lattice, and
//! the total is their product mixed over the burst position.
//!
//! Everything here evaluates numerically at complex points inside the unit
//! disk; the tail inversion drives those evaluations.

use crate::airtime::AcTiming;
use crate::fixed_point::FixedPointSolution;
use crate::scenario::LinkScenario;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GfError {
    #[error("defer generating function pole too close to z (|denominator| = {magnitude:.3e})")]
    PoleProximity { magnitude: f64 },
    #[error("context degenerate: {0}")]
    Degenerate(String),
}

/// One interruption branch of the defer process: probability mass and the
/// lattice exponent of its duration.
#[derive(Debug, Clone, Copy)]
struct DeferTerm {
    weight: f64,
    exponent: u32,
}

/// Precomputed evaluation context for one tagged AC.
///
/// All durations are pre-divided by the lattice step and rounded to the
/// nearest integer exponent at build time.
#[derive(Debug, Clone)]
pub struct GfContext {
    /// Tagged AC's index in the link's input order.
    pub ac: usize,
    /// Packets per TXOP burst of the tagged AC.
    pub n_txop: u32,
    /// Conditional collision probability of the tagged AC.
    pub c: f64,
    /// Retry limit R.
    retries: u32,
    /// Success normalizer (1-c) / (1-c^R).
    eta: f64,
    /// Contention windows per backoff stage.
    windows: Vec<u32>,
    /// Probability that the defer survives every pre-eligibility slot.
    defer_survival: f64,
    /// Interruption branches of the defer recursion.
    defer_terms: Vec<DeferTerm>,
    /// Blocking probability per countdown tick, split by blocking AC
    /// (sorted order), plus the residual multi-station collision mass.
    gamma: Vec<f64>,
    nu: f64,
    /// Lattice exponents.
    aifs_exp: u32,
    slot_exp: u32,
    t_data_exp: u32,
    t_coll_exp: u32,
    burst_slice_exp: u32,
    /// Per sorted AC: exponent of the blocking-success cost.
    blocking_exps: Vec<u32>,
}

fn lattice(duration_us: f64, delta_us: f64) -> u32 {
    let e = (duration_us / delta_us).round();
    if e < 0.0 {
        0
    } else {
        e as u32
    }
}

impl GfContext {
    /// Build the evaluation context for the AC at input position `ac` of
    /// `link`, given the link's converged operating point and per-AC timings
    /// (input order).
    pub fn build(
        link: &LinkScenario,
        sol: &FixedPointSolution,
        timings: &[AcTiming],
        ac: usize,
    ) -> Result<GfContext, GfError> {
        let zm = &sol.zones;
        let delta = link.phy.delta_us;
        let i_total = zm.num_acs();
        let k = zm.order.iter().position(|&o| o == ac).expect("AC index in range");
        let p_sorted: Vec<f64> = zm.order.iter().map(|&o| sol.tx_prob[o]).collect();
        let r_sorted: Vec<f64> = p_sorted.iter().map(|p| 1.0 - p).collect();
        let n_sorted: Vec<u32> = zm.order.iter().map(|&o| link.acs[o].n_stations).collect();
        let tagged = &link.acs[ac];
        let tagged_timing = &timings[ac];
        // saturation clamp: c = 1 exactly would blow up the success
        // normalizer eta
        let c = sol.collision_prob[ac].clamp(0.0, 1.0 - 1e-12);

        // Defer interruptions: one term per (pre-eligibility slot, branch).
        // In slot ell the ACs whose AIFS has elapsed may interrupt; a lone
        // transmission by such an AC costs its burst time, overlapping
        // transmissions cost an RTS.
        let h_k = zm.offsets[k];
        let aifs_min = timings[zm.order[0]].aifs_us;
        let mut defer_terms = Vec::new();
        let mut survival = 1.0;
        for ell in 1..=h_k {
            let eligible = zm.eligible_in_slot(ell);
            let no_tx: f64 =
                (0..eligible).map(|i| r_sorted[i].powi(n_sorted[i] as i32)).product();
            let interrupt = 1.0 - no_tx;
            let base_us = aifs_min + (ell - 1) as f64 * link.phy.slot_us;
            if interrupt > 0.0 {
                let mut lone_mass = 0.0;
                for j in 0..eligible {
                    // exactly one station, of sorted AC j, transmits
                    let mut lone = n_sorted[j] as f64
                        * p_sorted[j]
                        * r_sorted[j].powi(n_sorted[j] as i32 - 1);
                    for i in 0..eligible {
                        if i != j {
                            lone *= r_sorted[i].powi(n_sorted[i] as i32);
                        }
                    }
                    let t = &timings[zm.order[j]];
                    let cost_us = t.n_txop as f64 * t.delta_us - link.phy.sifs_us;
                    defer_terms.push(DeferTerm {
                        weight: survival * lone,
                        exponent: lattice(base_us + cost_us.max(0.0), delta),
                    });
                    lone_mass += lone;
                }
                let collision_mass = (interrupt - lone_mass).max(0.0);
                if collision_mass > 0.0 {
                    defer_terms.push(DeferTerm {
                        weight: survival * collision_mass,
                        exponent: lattice(base_us + tagged_timing.t_rts_us, delta),
                    });
                }
            }
            survival *= no_tx;
        }
        // Recompute the survival as the exact complement of the branch
        // weights so the renewal identity telescopes to machine precision
        // even when the multiplicative survival underflows toward zero.
        if !defer_terms.is_empty() {
            let weight_sum: f64 = defer_terms.iter().map(|t| t.weight).sum();
            survival = (1.0 - weight_sum).max(0.0);
        }

        // Blocking probabilities during countdown: chance that a tick is
        // consumed by a lone success of sorted AC l (gamma) or by a collision
        // not involving the tagged station (nu), weighted over the zones the
        // tagged AC contends in.
        let pi = &sol.zone_stationary.pi;
        let z0 = zm.first_zone[k];
        let pi_tail: f64 = pi[z0..].iter().sum();
        let mut gamma = vec![0.0; i_total];
        if pi_tail > 0.0 {
            for l in 0..i_total {
                let z_start = z0.max(zm.first_zone[l]);
                let mut acc = 0.0;
                for z in z_start..zm.num_zones() {
                    let eligible = zm.eligible[z];
                    let mut term = if l == k {
                        if n_sorted[k] < 2 {
                            0.0
                        } else {
                            (n_sorted[k] - 1) as f64
                                * p_sorted[k]
                                * r_sorted[k].powi(n_sorted[k] as i32 - 2)
                        }
                    } else {
                        n_sorted[l] as f64
                            * p_sorted[l]
                            * r_sorted[l].powi(n_sorted[l] as i32 - 1)
                            * r_sorted[k].powi(n_sorted[k] as i32 - 1)
                    };
                    for i in 0..eligible {
                        if i != k && i != l {
                            term *= r_sorted[i].powi(n_sorted[i] as i32);
                        }
                    }
                    acc += pi[z] / pi_tail * term;
                }
                gamma[l] = acc;
            }
        }
        let gamma_sum: f64 = gamma.iter().sum();
        debug_assert!(c - gamma_sum > -1e-9, "nu = {:.3e}", c - gamma_sum);
        let nu = (c - gamma_sum).max(0.0);

        let retries = tagged.retry_limit as u32;
        let eta = if c > 0.0 { (1.0 - c) / (1.0 - c.powi(retries as i32)) } else { 1.0 };
        let windows: Vec<u32> = (0..retries).map(|j| tagged.window_at_stage(j)).collect();

        let blocking_exps: Vec<u32> = (0..i_total)
            .map(|l| {
                let t = &timings[zm.order[l]];
                let cost = t.t_success_us - tagged_timing.aifs_us - link.phy.sifs_us;
                lattice(cost.max(0.0), delta)
            })
            .collect();

        Ok(GfContext {
            ac,
            n_txop: tagged_timing.n_txop,
            c,
            retries,
            eta,
            windows,
            defer_survival: survival,
            defer_terms,
            gamma,
            nu,
            aifs_exp: lattice(tagged_timing.aifs_us, delta),
            slot_exp: lattice(link.phy.slot_us, delta),
            t_data_exp: lattice(tagged_timing.t_data_us, delta),
            t_coll_exp: lattice(tagged_timing.t_collision_us, delta),
            burst_slice_exp: lattice(tagged_timing.delta_us, delta),
            blocking_exps,
        })
    }

    /// Defer-period generating function: the wait until the tagged AC's AIFS
    /// has fully elapsed with no interruption, restarting after each one.
    pub fn defer_gf(&self, z: Complex64) -> Result<Complex64, GfError> {
        let aifs = z.powi(self.aifs_exp as i32);
        if self.defer_terms.is_empty() {
            return Ok(aifs);
        }
        // 1 - sum_t w_t z^e = s + sum_t w_t (1 - z^e): the complement form
        // avoids cancellation when the survival is tiny
        let mut denom = Complex64::new(self.defer_survival, 0.0);
        for t in &self.defer_terms {
            denom += t.weight * (Complex64::new(1.0, 0.0) - z.powi(t.exponent as i32));
        }
        if denom.norm() < 1e-14 {
            return Err(GfError::PoleProximity { magnitude: denom.norm() });
        }
        Ok(self.defer_survival * aifs / denom)
    }

    /// Cost of one countdown tick: an idle slot, a blocking success of some
    /// AC, or a collision the tagged station is not part of.
    pub fn occupancy_gf(&self, z: Complex64) -> Result<Complex64, GfError> {
        let defer = self.defer_gf(z)?;
        let mut y = (1.0 - self.c) * z.powi(self.slot_exp as i32);
        for (l, &g) in self.gamma.iter().enumerate() {
            if g > 0.0 {
                y += g * defer * z.powi(self.blocking_exps[l] as i32);
            }
        }
        y += self.nu * self.other_collision_gf(z)?;
        Ok(y)
    }

    /// Cost of a collision the tagged station participates in: the collision
    /// airtime plus a fresh defer.
    pub fn collision_gf(&self, z: Complex64) -> Result<Complex64, GfError> {
        Ok(self.defer_gf(z)? * z.powi(self.t_coll_exp as i32))
    }

    /// Cost of a collision among other stations observed during countdown.
    /// Shares the collision-cost form.
    pub fn other_collision_gf(&self, z: Complex64) -> Result<Complex64, GfError> {
        self.collision_gf(z)
    }

    /// Backoff-and-retry generating function: stage backoffs are uniform
    /// draws whose every tick costs one occupancy period, with a collision
    /// cost between stages, summed over the retry ladder conditioned on
    /// eventual success.
    pub fn backoff_gf(&self, z: Complex64) -> Result<Complex64, GfError> {
        let y = self.occupancy_gf(z)?;
        let coll = self.collision_gf(z)?;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut stage_weight = Complex64::new(self.eta, 0.0);
        let mut window_product = Complex64::new(1.0, 0.0);
        for j in 0..self.retries {
            window_product *= uniform_window_gf(y, self.windows[j as usize]);
            acc += stage_weight * window_product;
            stage_weight *= self.c * coll;
        }
        Ok(acc)
    }

    /// Total head-of-line delay generating function: the burst head pays
    /// defer + backoff + data airtime; later burst positions pay one TXOP
    /// slice each.
    pub fn total_delay_gf(&self, z: Complex64) -> Result<Complex64, GfError> {
        let n = self.n_txop as f64;
        let head = self.backoff_gf(z)?
            * z.powi(self.t_data_exp as i32)
            * self.defer_gf(z)?;
        Ok(head / n + (n - 1.0) / n * z.powi(self.burst_slice_exp as i32))
    }
}

/// Average of z^0..z^(w-1): the generating function of a uniform backoff
/// draw with each unit costing `y`. Evaluated by its limit near y = 1.
fn uniform_window_gf(y: Complex64, w: u32) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let diff = one - y;
    if diff.norm() < 1e-9 {
        // first-order expansion around y = 1
        one - diff * ((w as f64 - 1.0) / 2.0)
    } else {
        (one - y.powi(w as i32)) / (w as f64 * diff)
    }
}

/// Convenience: build contexts for every AC on a link.
pub fn build_all(
    link: &LinkScenario,
    sol: &FixedPointSolution,
) -> Result<Vec<GfContext>, GfError> {
    let timings: Vec<AcTiming> =
        link.acs.iter().map(|ac| AcTiming::compute(ac, &link.phy)).collect();
    (0..link.acs.len()).map(|i| GfContext::build(link, sol, &timings, i)).collect()
}
