//! Built-in self checks: fast versions of the structural properties the
//! test suite verifies at full scale, runnable from the CLI as a health
//! check of a deployed build. Emits one JSON line per check.

use crate::config::{DigitalMode, LinkContext};
use crate::runner::{allocate, build_link, transmit};
use crate::seeding::substream;
use bpm_isac_core::allocation::{
    check_monotone_trace, solve_b_step, solve_p_step, SolverOptions,
};
use bpm_isac_core::apep::{effective_path_dist, mc_path_oracle, GridParams};
use bpm_isac_core::modem::draw_sensing_symbol;
use bpm_isac_core::oracle;
use bpm_isac_core::precoding::{
    baseline_combiner, comm_mse, lmmse_combiner, mse_threshold, LinkNoise,
};
use bpm_isac_core::{complex_normal, C64, CMat64, Result};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"check\":\"{}\",\"pass\":{},\"detail\":\"{}\"}}",
            self.name, self.pass, self.detail
        )
    }
}

/// Run every check; the report passes only if all do.
pub fn run_validation(ctx: &LinkContext) -> Result<Vec<CheckResult>> {
    Ok(vec![
        path_distribution_normalization(),
        path_distribution_vs_oracle(ctx),
        lmmse_optimality(ctx)?,
        mse_identity(ctx)?,
        monotone_objective(ctx)?,
        subproblems_vs_oracle(ctx)?,
    ])
}

fn path_distribution_normalization() -> CheckResult {
    let mut worst = 0.0f64;
    for (n_t, n_r) in [(4usize, 4usize), (8, 8), (16, 8), (7, 7)] {
        for w in [1usize, 2, 3] {
            for p in [1usize, 4, 8] {
                let g = GridParams::new(n_t, n_r, w, p).unwrap();
                let total: f64 = effective_path_dist::<f64>(&g).pmf.iter().sum();
                worst = worst.max((total - 1.0).abs());
            }
        }
    }
    CheckResult {
        name: "path_distribution_normalization",
        pass: worst < 1e-9,
        detail: format!("worst |sum - 1| = {worst:.3e}"),
    }
}

fn path_distribution_vs_oracle(ctx: &LinkContext) -> CheckResult {
    let mut rng = substream(ctx.cfg.seed, 90, 0, 0);
    let mut worst = 0.0f64;
    for (n_t, n_r, w, p) in [(7usize, 7usize, 3usize, 7usize), (8, 4, 2, 5)] {
        let g = GridParams::new(n_t, n_r, w, p).unwrap();
        let emp = mc_path_oracle::<f64, _>(&mut rng, &g, 200_000);
        let pmf = effective_path_dist::<f64>(&g).pmf;
        let tv: f64 = emp
            .iter()
            .zip(&pmf)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        worst = worst.max(tv);
    }
    CheckResult {
        name: "path_distribution_vs_oracle",
        pass: worst <= 0.01,
        detail: format!("worst total variation = {worst:.4}"),
    }
}

fn lmmse_optimality(ctx: &LinkContext) -> Result<CheckResult> {
    let mut rng = substream(ctx.cfg.seed, 91, 0, 0);
    let sigma2 = ctx.cfg.sigma2_at(ctx.cfg.snr_grid_db[0])?;
    let noise = LinkNoise::new(sigma2)?;
    let mut pass = true;
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let mut ch_rng = substream(ctx.cfg.seed, 92, 0, trial);
        let setup = build_link(&mut ch_rng, ctx, sigma2)?;
        let k = ctx.im_config.k;
        let p: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..1.2)).collect();
        let b: Vec<f64> = ctx.sensing.t.iter().map(|t| t * rng.gen_range(0.0..1.0)).collect();
        let w = lmmse_combiner(&setup.eq, &p, &b, &ctx.sensing, &noise, &ctx.im_config)?;
        let chi = comm_mse(&setup.eq, &w, &p, &b, &ctx.sensing, &noise, &ctx.im_config);
        for _ in 0..200 {
            let delta: CMat64 = CMat64::from_fn(k, k, |_, _| complex_normal(&mut rng));
            let delta = delta.scale_real(1e-3 / delta.frob_sq().sqrt());
            let perturbed = comm_mse(
                &setup.eq,
                &w.add(&delta),
                &p,
                &b,
                &ctx.sensing,
                &noise,
                &ctx.im_config,
            );
            let gap = chi - perturbed;
            worst = worst.max(gap);
            if gap > 1e-15 {
                pass = false;
            }
        }
    }
    Ok(CheckResult {
        name: "lmmse_optimality",
        pass,
        detail: format!("worst improvement by perturbation = {worst:.3e}"),
    })
}

fn mse_identity(ctx: &LinkContext) -> Result<CheckResult> {
    let sigma2 = ctx.cfg.sigma2_at(ctx.cfg.snr_grid_db[0])?;
    let noise = LinkNoise::new(sigma2)?;
    let mut worst = 0.0f64;
    for trial in 0..2 {
        let mut ch_rng = substream(ctx.cfg.seed, 93, 0, trial);
        let setup = build_link(&mut ch_rng, ctx, sigma2)?;
        let alloc = allocate(ctx, &setup, sigma2, ctx.cfg.optimizer.mu, DigitalMode::Optimized)?;
        let chi = comm_mse(
            &setup.eq,
            &alloc.w_bb,
            &alloc.p,
            &alloc.b,
            &ctx.sensing,
            &noise,
            &ctx.im_config,
        );
        let mut rng = substream(ctx.cfg.seed, 94, 0, trial);
        let symbols = 100_000;
        let eta = ctx.im_config.spectral_efficiency();
        let sigma = sigma2.sqrt();
        let mut acc = 0.0;
        for _ in 0..symbols {
            let bits: Vec<bool> = (0..eta).map(|_| rng.gen::<bool>()).collect();
            let x_c = ctx.im_codebook.modulate(&bits).expect("eta bits");
            let x_r = draw_sensing_symbol(&mut rng, &ctx.sensing);
            let sc: Vec<C64> = x_c.iter().zip(&alloc.p).map(|(x, p)| x.scale(*p)).collect();
            let sr: Vec<C64> = x_r
                .iter()
                .zip(&alloc.b)
                .map(|(x, b)| C64::new(x * b, 0.0))
                .collect();
            let mut y = setup.eq.h_c.mul_vec(&sc);
            for (yi, zi) in y.iter_mut().zip(setup.eq.h_r.mul_vec(&sr)) {
                *yi += zi;
            }
            for yi in y.iter_mut() {
                *yi += complex_normal::<f64, _>(&mut rng).scale(sigma);
            }
            let est = alloc.w_bb.mul_vec(&y);
            acc += est
                .iter()
                .zip(&x_c)
                .map(|(a, c)| (a - c).norm_sqr())
                .sum::<f64>();
        }
        let empirical = acc / symbols as f64;
        worst = worst.max((empirical - chi).abs() / chi);
    }
    Ok(CheckResult {
        name: "mse_identity",
        pass: worst < 0.015,
        detail: format!("worst relative gap = {worst:.4}"),
    })
}

fn monotone_objective(ctx: &LinkContext) -> Result<CheckResult> {
    let sigma2 = ctx.cfg.sigma2_at(ctx.cfg.snr_grid_db[0])?;
    let mut pass = true;
    let mut detail = String::from("traces non-increasing");
    for trial in 0..10 {
        let mut ch_rng = substream(ctx.cfg.seed, 95, 0, trial);
        let setup = build_link(&mut ch_rng, ctx, sigma2)?;
        let mu = 0.1 + 0.08 * trial as f64;
        let alloc = allocate(ctx, &setup, sigma2, mu, DigitalMode::Optimized)?;
        if let Err(e) = check_monotone_trace(&alloc.objective_trace, 1e-9) {
            pass = false;
            detail = format!("{e}");
        }
        let noise = LinkNoise::new(sigma2)?;
        let gamma = mse_threshold(&setup.eq, &ctx.sensing, &noise, &ctx.im_config, mu)?;
        let chi = comm_mse(
            &setup.eq,
            &alloc.w_bb,
            &alloc.p,
            &alloc.b,
            &ctx.sensing,
            &noise,
            &ctx.im_config,
        );
        if chi > gamma + 1e-6 {
            pass = false;
            detail = format!("budget violated: chi {chi} > gamma {gamma}");
        }
    }
    Ok(CheckResult {
        name: "monotone_objective",
        pass,
        detail,
    })
}

fn subproblems_vs_oracle(ctx: &LinkContext) -> Result<CheckResult> {
    let sigma2 = ctx.cfg.sigma2_at(ctx.cfg.snr_grid_db[0])?;
    let noise = LinkNoise::new(sigma2)?;
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    let mut rng = substream(ctx.cfg.seed, 96, 0, 0);
    for trial in 0..5 {
        let mut ch_rng = substream(ctx.cfg.seed, 97, 0, trial);
        let setup = build_link(&mut ch_rng, ctx, sigma2)?;
        let w0 = baseline_combiner(&setup.eq, &ctx.sensing, &noise, &ctx.im_config)?;
        let mu = rng.gen_range(0.1..1.0);
        let gamma = mse_threshold(&setup.eq, &ctx.sensing, &noise, &ctx.im_config, mu)?;
        let ones = vec![1.0; ctx.im_config.k];

        let b = solve_b_step(
            &setup.eq, &w0, &ones, &ctx.sensing, &noise, &ctx.im_config, gamma, &opts,
        )?;
        if let Some(reference) = oracle::b_step_reference(
            &setup.eq, &w0, &ones, &ctx.sensing, &noise, &ctx.im_config, gamma, 10_000,
        ) {
            let gap = (oracle::sensing_objective_of(&b, &ctx.sensing)
                - oracle::sensing_objective_of(&reference, &ctx.sensing))
            .abs();
            worst = worst.max(gap);
        }

        let p = solve_p_step(&setup.eq, &w0, &ctx.im_config, &opts);
        let reference = oracle::p_step_reference(&setup.eq, &w0, &ctx.im_config, 100_000);
        let gap = (oracle::comm_fit_objective_of(&p, &setup.eq, &w0, &ctx.im_config)
            - oracle::comm_fit_objective_of(&reference, &setup.eq, &w0, &ctx.im_config))
        .abs();
        worst = worst.max(gap);
    }
    Ok(CheckResult {
        name: "subproblems_vs_oracle",
        pass: worst < 1e-4,
        detail: format!("worst objective gap = {worst:.3e}"),
    })
}

/// Quick end-to-end exercise used by the CLI smoke path: run one trial and
/// report the error count.
pub fn smoke_trial(ctx: &LinkContext) -> Result<Option<u64>> {
    let sigma2 = ctx.cfg.sigma2_at(ctx.cfg.snr_grid_db[0])?;
    let mut rng = substream(ctx.cfg.seed, 98, 0, 0);
    let setup = match build_link(&mut rng, ctx, sigma2) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    let alloc = allocate(ctx, &setup, sigma2, ctx.cfg.optimizer.mu, ctx.cfg.optimizer.mode)?;
    let outcome = transmit(&mut rng, ctx, &setup, &alloc, sigma2, 50);
    Ok(Some(outcome.bit_errors))
}
