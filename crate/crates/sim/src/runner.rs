//! Trial execution and seeded parallel sweeps.
//!
//! One trial = one channel realization: build the transceiver, run the
//! configured digital-stage allocation, then push a block of symbols
//! through the link and count bit errors. Sweeps fan trials out with rayon;
//! every trial owns counter-derived random streams (channel on lane 0, each
//! power-weight variant's symbols on its own lane), and aggregation walks
//! the results in trial order, so outputs do not depend on the thread
//! count. A channel realization is shared across all power weights of a
//! point, which pairs the comparisons.
//!
//! Trials whose MSE budget turns out infeasible (or that starve the beam
//! selector) are counted and skipped rather than aborting the sweep; hard
//! numerical failures still propagate.

use crate::config::{DigitalMode, LinkContext};
use crate::output::SweepRecord;
use crate::seeding::substream;
use bpm_isac_core::allocation::{
    optimize_digital, raw_allocation, unoptimized_allocation, AllocationResult,
};
use bpm_isac_core::beamspace::sample_channel;
use bpm_isac_core::modem::{count_bit_errors, draw_sensing_symbol};
use bpm_isac_core::precoding::{select_beams, BeamSelection, EquivalentChannels, LinkNoise};
use bpm_isac_core::{complex_normal, C64, Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Error/bit counts and allocation quality of one trial under one variant.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub bits_sent: u64,
    pub beampattern_mse: f64,
    pub iterations: usize,
}

/// Aggregated sweep output plus trial accounting.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub trials_completed: u64,
    pub trials_skipped: u64,
}

impl SweepOutcome {
    pub fn skipped_fraction(&self) -> f64 {
        let total = self.trials_completed + self.trials_skipped;
        if total == 0 {
            0.0
        } else {
            self.trials_skipped as f64 / total as f64
        }
    }
}

/// Channel-dependent, weight-independent part of a trial.
pub struct LinkSetup {
    pub selection: BeamSelection,
    pub eq: EquivalentChannels<f64>,
}

pub fn build_link(
    rng: &mut ChaCha8Rng,
    ctx: &LinkContext,
    sigma2: f64,
) -> Result<LinkSetup> {
    let h = sample_channel(rng, ctx.geom, ctx.cfg.channel.paths, ctx.cfg.channel.on_grid)?;
    link_from_channel(ctx, &h, sigma2)
}

/// Transceiver for an externally supplied channel realization.
pub fn link_from_channel(
    ctx: &LinkContext,
    h: &bpm_isac_core::Channel64,
    sigma2: f64,
) -> Result<LinkSetup> {
    let noise = LinkNoise::new(sigma2)?;
    let (selection, eq) = select_beams(
        h,
        &ctx.tx_cb,
        &ctx.rx_cb,
        &ctx.sensing,
        &noise,
        &ctx.im_config,
        ctx.cfg.selection.l,
    )?;
    Ok(LinkSetup { selection, eq })
}

pub fn allocate(
    ctx: &LinkContext,
    setup: &LinkSetup,
    sigma2: f64,
    mu: f64,
    mode: DigitalMode,
) -> Result<AllocationResult<f64>> {
    let noise = LinkNoise::new(sigma2)?;
    let opts = ctx.cfg.solver_options();
    match mode {
        DigitalMode::Optimized => optimize_digital(
            &setup.eq,
            &ctx.sensing,
            &noise,
            &ctx.im_config,
            mu,
            &opts,
        ),
        DigitalMode::Projected => unoptimized_allocation(
            &setup.eq,
            &ctx.sensing,
            &noise,
            &ctx.im_config,
            mu,
            &opts,
        ),
        DigitalMode::Raw => raw_allocation(&setup.eq, &ctx.sensing, &noise, &ctx.im_config),
    }
}

/// Push `symbols` random messages through the fixed link and count errors.
pub fn transmit(
    rng: &mut ChaCha8Rng,
    ctx: &LinkContext,
    setup: &LinkSetup,
    alloc: &AllocationResult<f64>,
    sigma2: f64,
    symbols: usize,
) -> TrialOutcome {
    let eta = ctx.im_config.spectral_efficiency();
    let sigma = sigma2.sqrt();
    let mut errors = 0u64;
    for _ in 0..symbols {
        let bits: Vec<bool> = (0..eta).map(|_| rng.gen::<bool>()).collect();
        let x_c = ctx.im_codebook.modulate(&bits).expect("eta bits");
        let x_r = draw_sensing_symbol(rng, &ctx.sensing);
        let scaled_c: Vec<C64> = x_c
            .iter()
            .zip(&alloc.p)
            .map(|(x, pi)| x.scale(*pi))
            .collect();
        let scaled_r: Vec<C64> = x_r
            .iter()
            .zip(&alloc.b)
            .map(|(x, bi)| C64::new(x * bi, 0.0))
            .collect();
        let mut y = setup.eq.h_c.mul_vec(&scaled_c);
        for (yi, zi) in y.iter_mut().zip(setup.eq.h_r.mul_vec(&scaled_r)) {
            *yi += zi;
        }
        for yi in y.iter_mut() {
            *yi += complex_normal::<f64, _>(rng).scale(sigma);
        }
        let estimate = alloc.w_bb.mul_vec(&y);
        let detected = ctx.im_codebook.demodulate_ml(&estimate);
        errors += count_bit_errors(&bits, &detected).expect("equal lengths") as u64;
    }
    TrialOutcome {
        bit_errors: errors,
        bits_sent: (symbols * eta) as u64,
        beampattern_mse: allocation_pattern_error(ctx, alloc),
        iterations: alloc.iterations,
    }
}

/// Weighted squared deviation of the realized sensing amplitudes from the
/// desired ones; equals the beampattern error for on-grid sensing beams.
fn allocation_pattern_error(ctx: &LinkContext, alloc: &AllocationResult<f64>) -> f64 {
    ctx.sensing
        .d
        .iter()
        .zip(&alloc.b)
        .zip(&ctx.sensing.t)
        .map(|((d, b), t)| d * (b - t) * (b - t))
        .sum()
}

fn is_skip(err: &Error) -> bool {
    matches!(
        err,
        Error::InfeasibleMseBudget { .. } | Error::CandidateStarvation { .. }
    )
}

/// One trial at the configured weight and digital mode. `Ok(None)` means
/// the trial was skipped (infeasible budget or starved selection).
pub fn run_trial(
    rng: &mut ChaCha8Rng,
    ctx: &LinkContext,
    sigma2: f64,
) -> Result<Option<TrialOutcome>> {
    let setup = match build_link(rng, ctx, sigma2) {
        Ok(s) => s,
        Err(e) if is_skip(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let alloc = match allocate(ctx, &setup, sigma2, ctx.cfg.optimizer.mu, ctx.cfg.optimizer.mode) {
        Ok(a) => a,
        Err(e) if is_skip(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(transmit(
        rng,
        ctx,
        &setup,
        &alloc,
        sigma2,
        ctx.cfg.symbols_per_channel,
    )))
}

/// Sweep over SNR points, power weights, and digital-stage variants.
///
/// Record order is (point, weight, variant). Within a point every weight
/// and variant sees the same channel realizations, and the two variants of
/// one weight see identical symbol and noise draws.
pub fn run_sweep(
    ctx: &LinkContext,
    snr_grid_db: &[f64],
    mu_list: &[f64],
    variants: &[DigitalMode],
) -> Result<SweepOutcome> {
    let mut records = Vec::new();
    let mut completed = 0u64;
    let mut skipped = 0u64;
    let lanes = mu_list.len();
    assert!(lanes >= 1 && !variants.is_empty());

    for (point, &snr_db) in snr_grid_db.iter().enumerate() {
        let started = Instant::now();
        let sigma2 = ctx.cfg.sigma2_at(snr_db)?;
        let per_trial: Vec<Result<Option<Vec<TrialOutcome>>>> = (0..ctx.cfg.trials)
            .into_par_iter()
            .map(|trial| trial_outcomes(ctx, sigma2, point, trial, mu_list, variants))
            .collect();

        let cells = lanes * variants.len();
        let mut sums = vec![TrialAccumulator::default(); cells];
        for result in per_trial {
            match result? {
                Some(outcomes) => {
                    completed += 1;
                    for (cell, outcome) in outcomes.iter().enumerate() {
                        sums[cell].add(outcome);
                    }
                }
                None => skipped += 1,
            }
        }

        let wall_time = started.elapsed().as_secs_f64();
        for (mi, &mu) in mu_list.iter().enumerate() {
            for (vi, variant) in variants.iter().enumerate() {
                let acc = &sums[mi * variants.len() + vi];
                records.push(acc.record(
                    snr_db,
                    format!("{}{}", ctx.cfg.scheme.label(), variant.suffix()),
                    mu,
                    wall_time,
                ));
            }
        }
    }

    Ok(SweepOutcome {
        records,
        trials_completed: completed,
        trials_skipped: skipped,
    })
}

/// All (weight, variant) outcomes of one trial, or `None` when skipped.
fn trial_outcomes(
    ctx: &LinkContext,
    sigma2: f64,
    point: usize,
    trial: usize,
    mu_list: &[f64],
    variants: &[DigitalMode],
) -> Result<Option<Vec<TrialOutcome>>> {
    let mut channel_rng = substream(ctx.cfg.seed, point, 0, trial);
    let setup = match build_link(&mut channel_rng, ctx, sigma2) {
        Ok(s) => s,
        Err(e) if is_skip(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut outcomes = Vec::with_capacity(mu_list.len() * variants.len());
    for (mi, &mu) in mu_list.iter().enumerate() {
        let symbol_rng = substream(ctx.cfg.seed, point, 1 + mi, trial);
        for &variant in variants {
            let alloc = match allocate(ctx, &setup, sigma2, mu, variant) {
                Ok(a) => a,
                Err(e) if is_skip(&e) => return Ok(None),
                Err(e) => return Err(e),
            };
            // identical symbol/noise draws across variants of one weight
            let mut rng = symbol_rng.clone();
            outcomes.push(transmit(
                &mut rng,
                ctx,
                &setup,
                &alloc,
                sigma2,
                ctx.cfg.symbols_per_channel,
            ));
        }
    }
    Ok(Some(outcomes))
}

/// Bit-error sweep over the configured SNR grid, one record per
/// (point, weight).
pub fn run_ber_sweep(ctx: &LinkContext, mu_list: &[f64]) -> Result<SweepOutcome> {
    run_sweep(
        ctx,
        &ctx.cfg.snr_grid_db,
        mu_list,
        &[ctx.cfg.optimizer.mode],
    )
}

/// Sensing/communication trade-off at one SNR point: per weight, the
/// optimized allocation and the feasibility-projected (unoptimized)
/// comparison.
pub fn run_tradeoff_sweep(
    ctx: &LinkContext,
    mu_list: &[f64],
    snr_db: f64,
) -> Result<SweepOutcome> {
    run_sweep(
        ctx,
        &[snr_db],
        mu_list,
        &[DigitalMode::Optimized, DigitalMode::Projected],
    )
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialAccumulator {
    bit_errors: u64,
    bits_sent: u64,
    pattern_error: f64,
    iterations: u64,
    trials: u64,
}

impl TrialAccumulator {
    fn add(&mut self, outcome: &TrialOutcome) {
        self.bit_errors += outcome.bit_errors;
        self.bits_sent += outcome.bits_sent;
        self.pattern_error += outcome.beampattern_mse;
        self.iterations += outcome.iterations as u64;
        self.trials += 1;
    }

    fn record(&self, snr_db: f64, scheme: String, mu: f64, wall_time: f64) -> SweepRecord {
        let trials = self.trials.max(1) as f64;
        SweepRecord {
            snr_db,
            scheme,
            mu,
            ber: if self.bits_sent == 0 {
                0.0
            } else {
                self.bit_errors as f64 / self.bits_sent as f64
            },
            bit_errors: self.bit_errors,
            bits_sent: self.bits_sent,
            beampattern_mse: self.pattern_error / trials,
            mean_iterations: self.iterations as f64 / trials,
            wall_time,
        }
    }
}
