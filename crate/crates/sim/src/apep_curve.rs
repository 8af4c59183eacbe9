//! Analytic error-rate curve over the configured SNR grid.

use crate::config::LinkContext;
use bpm_isac_core::apep::{apep, GridParams};
use bpm_isac_core::precoding::LinkNoise;
use bpm_isac_core::Result;

/// `(snr_db, apep)` rows for the context's grid and modulation.
pub fn run_apep_curve(ctx: &LinkContext) -> Result<Vec<(f64, f64)>> {
    let grid = GridParams::new(
        ctx.geom.n_t,
        ctx.geom.n_r,
        ctx.sensing.w,
        ctx.cfg.channel.paths,
    )?;
    ctx.cfg
        .snr_grid_db
        .iter()
        .map(|&snr_db| {
            let noise = LinkNoise::new(ctx.cfg.sigma2_at(snr_db)?)?;
            Ok((snr_db, apep(&grid, &ctx.im_codebook, &noise)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Scheme};

    #[test]
    fn curve_is_monotone_and_dominated_by_no_sensing() {
        let mut cfg = ExperimentConfig::default();
        cfg.snr_grid_db = vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0];
        let with = run_apep_curve(&cfg.context().unwrap()).unwrap();
        cfg.scheme = Scheme::Gbm;
        let without = run_apep_curve(&cfg.context().unwrap()).unwrap();

        let mut prev = f64::INFINITY;
        for ((snr, a), (_, b)) in with.iter().zip(&without) {
            assert!(*a <= prev + 1e-15, "not monotone at {snr} dB");
            assert!(b <= a, "sensing-free curve above at {snr} dB");
            prev = *a;
        }
    }
}
