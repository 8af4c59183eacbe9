//! Transmit beampattern scan: radiated gain over a dense angle grid for one
//! channel use with a chosen set of active beams.

use crate::config::{DigitalMode, LinkContext};
use crate::runner::{allocate, build_link};
use crate::seeding::substream;
use bpm_isac_core::beamspace::steering_vector;
use bpm_isac_core::linalg::hdot;
use bpm_isac_core::{C64, Error, Result};

/// Number of angle samples in `[-pi/2, pi/2)`.
pub const ANGLE_SAMPLES: usize = 1024;

/// Gain table `(theta_rad, normalized gain)` for one random activation:
/// `n_c` of the selected communication beams plus the sensing beam in slot
/// `sensing_slot`, normalized so the peak is exactly 1.
pub fn run_beampattern(
    ctx: &LinkContext,
    mu: f64,
    sensing_slot: usize,
) -> Result<Vec<(f64, f64)>> {
    if ctx.sensing.w > 0 && sensing_slot >= ctx.sensing.w {
        return Err(Error::InvalidParameter(format!(
            "sensing slot {sensing_slot} outside 0..{}",
            ctx.sensing.w
        )));
    }
    let snr_db = ctx.cfg.snr_grid_db[0];
    let sigma2 = ctx.cfg.sigma2_at(snr_db)?;
    let mut rng = substream(ctx.cfg.seed, 0, 0, 0);

    let setup = build_link(&mut rng, ctx, sigma2)?;
    let alloc = allocate(ctx, &setup, sigma2, mu, DigitalMode::Optimized)?;

    let active = rand::seq::index::sample(&mut rng, ctx.im_config.k, ctx.im_config.n_c);
    let mut emitters: Vec<(f64, Vec<C64>)> = active
        .iter()
        .map(|slot| {
            let amp = alloc.p[slot];
            (
                amp * amp,
                ctx.tx_cb
                    .codeword(setup.selection.tx_indices[slot])
                    .to_vec(),
            )
        })
        .collect();
    if ctx.sensing.w > 0 {
        let amp = alloc.b[sensing_slot];
        emitters.push((
            amp * amp,
            ctx.tx_cb
                .codeword(ctx.sensing.codeword_indices[sensing_slot])
                .to_vec(),
        ));
    }

    let mut rows = Vec::with_capacity(ANGLE_SAMPLES);
    let mut peak = 0.0f64;
    for i in 0..ANGLE_SAMPLES {
        let theta =
            -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * i as f64 / ANGLE_SAMPLES as f64;
        let a = steering_vector(theta, ctx.geom.n_t);
        let gain: f64 = emitters
            .iter()
            .map(|(power, f)| power * hdot(&a, f).norm_sqr())
            .sum();
        peak = peak.max(gain);
        rows.push((theta, gain));
    }
    if peak > 0.0 {
        for row in rows.iter_mut() {
            row.1 /= peak;
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.geometry.n_t = 16;
        cfg.geometry.n_r = 16;
        cfg.channel.paths = 6;
        cfg.sensing.codeword_indices = vec![5, 6];
        cfg.sensing.t_r = 4.0;
        cfg.selection.l = 24;
        cfg.snr_grid_db = vec![0.0];
        cfg
    }

    #[test]
    fn scan_is_normalized_and_nonnegative() {
        let ctx = cfg().context().unwrap();
        let rows = run_beampattern(&ctx, 0.8, 0).unwrap();
        assert_eq!(rows.len(), ANGLE_SAMPLES);
        let peak = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.1 >= 0.0));
    }

    #[test]
    fn full_weight_scan_peaks_at_the_sensing_direction() {
        let ctx = cfg().context().unwrap();
        let rows = run_beampattern(&ctx, 1.0, 0).unwrap();
        // with mu = 1 the sensing beam keeps its full desired amplitude
        // t = 2, which dominates every unit-power communication beam
        let theta_s = ctx.tx_cb.grid_angle(5);
        let nearest = rows
            .iter()
            .min_by(|a, b| {
                (a.0 - theta_s)
                    .abs()
                    .partial_cmp(&(b.0 - theta_s).abs())
                    .unwrap()
            })
            .unwrap();
        assert!(
            nearest.1 > 0.8,
            "gain {} at the sensing direction",
            nearest.1
        );
    }

    #[test]
    fn bad_slot_is_rejected() {
        let ctx = cfg().context().unwrap();
        assert!(run_beampattern(&ctx, 0.5, 7).is_err());
    }
}
