//! Digital-part power allocation: alternating updates of the sensing
//! amplitudes `b`, the communication amplitudes `p`, and the LMMSE combiner,
//! minimizing the sensing beampattern error under a communication MSE
//! budget.
//!
//! Both subproblems are separable QCQPs. Their KKT systems give each
//! coordinate in closed form as a function of the Lagrange multipliers, and
//! the multipliers are located by bisection (nested for the two-constraint
//! sensing step). The loop keeps the objective non-increasing by
//! construction and asserts it at run time.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::modem::{ImConfig, SensingSpec};
use crate::precoding::{
    baseline_combiner, comm_mse, lmmse_combiner, mse_quadratic_in_b, threshold_given,
    EquivalentChannels, LinkNoise,
};
use crate::scalar::{lit, Real};

/// Stopping rules and tolerances of the alternating optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Stop once the objective decreases by less than this between
    /// iterations.
    pub convergence_tol: T,
    pub max_iterations: usize,
    /// Slack allowed in constraint activity and complementary slackness.
    pub kkt_tol: T,
    /// Relative width at which multiplier bisection stops.
    pub bisection_tol: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            convergence_tol: lit(1e-3),
            max_iterations: 200,
            kkt_tol: lit(1e-8),
            bisection_tol: lit(1e-10),
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if self.convergence_tol <= T::zero()
            || self.kkt_tol <= T::zero()
            || self.bisection_tol <= T::zero()
            || self.max_iterations == 0
        {
            return Err(Error::InvalidParameter(
                "solver tolerances must be positive and iteration cap nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Final allocation state with the per-iteration objective trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult<T> {
    pub b: Vec<T>,
    pub p: Vec<T>,
    pub w_bb: CMat<T>,
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Realized per-direction sensing gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Beampattern<T> {
    pub v: Vec<T>,
}

/// Per-direction gains `v_l = |b_l a(theta_l)^H F_R[:, l]|` of the sensing
/// precoder `f_r`; with on-grid sensing beams this reduces to `v = |b|`.
pub fn beampattern<T: Real>(b: &[T], f_r: &CMat<T>, spec: &SensingSpec<T>) -> Beampattern<T> {
    assert_eq!(b.len(), spec.w, "amplitude count mismatch");
    assert_eq!(f_r.cols(), spec.w, "precoder column count mismatch");
    let n_t = f_r.rows();
    let cb = crate::beamspace::dft_codebook::<T>(n_t);
    let v = (0..spec.w)
        .map(|l| {
            let a = crate::beamspace::steering_vector(cb.grid_angle(spec.codeword_indices[l]), n_t);
            (crate::linalg::hdot(&a, &f_r.col(l)) * b[l]).norm()
        })
        .collect();
    Beampattern { v }
}

/// Weighted squared deviation of the realized gains from the desired
/// beampattern: `sum_i d_i (v_i - t_i)^2`.
pub fn beampattern_mse<T: Real>(v: &Beampattern<T>, spec: &SensingSpec<T>) -> T {
    assert_eq!(v.v.len(), spec.w, "beampattern length mismatch");
    sensing_objective(&v.v, spec)
}

/// Objective in the digital domain, `sum_i d_i (b_i - t_i)^2`; equals the
/// beampattern error when the sensing beams are on-grid and `b >= 0`.
fn sensing_objective<T: Real>(b: &[T], spec: &SensingSpec<T>) -> T {
    spec.d
        .iter()
        .zip(b)
        .zip(&spec.t)
        .fold(T::zero(), |acc, ((&d, &bi), &ti)| {
            acc + d * (bi - ti) * (bi - ti)
        })
}

/// Sensing-amplitude update: minimize `sum_i d_i (b_i - t_i)^2` subject to
/// the MSE budget `c0 + sum_i g_i b_i^2 <= gamma` and the average power cap
/// `sum_i d_i b_i^2 <= t_r`, for the fixed combiner `w_bb` and amplitudes
/// `p`.
///
/// The KKT stationarity condition gives
/// `b_i = d_i t_i / (d_i + lambda g_i + nu d_i)` with multipliers
/// `lambda, nu >= 0`; `nu` is located by an inner bisection on the power
/// cap and `lambda` by an outer bisection on the MSE budget.
pub fn solve_b_step<T: Real>(
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    p: &[T],
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    gamma: T,
    opts: &SolverOptions<T>,
) -> Result<Vec<T>> {
    let (c0, g) = mse_quadratic_in_b(eq, w_bb, p, spec, noise, config);
    if c0 > gamma + opts.kkt_tol {
        return Err(Error::InfeasibleMseBudget {
            residual: c0.to_f64().unwrap_or(f64::NAN),
            budget: gamma.to_f64().unwrap_or(f64::NAN),
        });
    }
    if spec.w == 0 {
        return Ok(vec![]);
    }
    let budget = (gamma - c0).max(T::zero());

    let b_of = |lambda: T, nu: T| -> Vec<T> {
        spec.d
            .iter()
            .zip(&spec.t)
            .zip(&g)
            .map(|((&d, &t), &gi)| {
                if d == T::zero() {
                    // unweighted direction: contributes only MSE load, so
                    // the optimum parks it at zero
                    T::zero()
                } else {
                    d * t / (d + lambda * gi + nu * d)
                }
            })
            .collect()
    };
    let mse_load = |b: &[T]| -> T {
        g.iter()
            .zip(b)
            .fold(T::zero(), |acc, (&gi, &bi)| acc + gi * bi * bi)
    };
    let power_load = |b: &[T]| -> T {
        spec.d
            .iter()
            .zip(b)
            .fold(T::zero(), |acc, (&d, &bi)| acc + d * bi * bi)
    };
    let nu_for = |lambda: T| -> T {
        if power_load(&b_of(lambda, T::zero())) <= spec.t_r + opts.kkt_tol {
            return T::zero();
        }
        bisect_multiplier(
            |nu| power_load(&b_of(lambda, nu)) - spec.t_r,
            opts.bisection_tol,
        )
    };

    // the unconstrained-in-lambda point (power cap enforced) may already
    // satisfy the budget
    let nu0 = nu_for(T::zero());
    let b0 = b_of(T::zero(), nu0);
    if mse_load(&b0) <= budget + opts.kkt_tol {
        return Ok(b0);
    }
    if budget <= T::zero() {
        // all MSE-loaded directions must shut off entirely
        let b = spec
            .d
            .iter()
            .zip(&spec.t)
            .zip(&g)
            .map(|((&d, &t), &gi)| if gi > T::zero() || d == T::zero() { T::zero() } else { t })
            .collect();
        return Ok(b);
    }
    let lambda = bisect_multiplier(
        |lambda| mse_load(&b_of(lambda, nu_for(lambda))) - budget,
        opts.bisection_tol,
    );
    Ok(b_of(lambda, nu_for(lambda)))
}

/// Find `x >= 0` with `f(x) ~= 0` for a decreasing `f` with `f(0) > 0`.
/// Returns the feasible (non-positive `f`) end of the final bracket.
fn bisect_multiplier<T: Real>(f: impl Fn(T) -> T, rel_tol: T) -> T {
    let mut hi = T::one();
    let mut grow = 0;
    while f(hi) > T::zero() {
        hi = hi * lit(2.0);
        grow += 1;
        if grow > 200 {
            return hi; // constraint asymptotically tight; hi is feasible enough
        }
    }
    let mut lo = T::zero();
    let mut iters = 0;
    while hi - lo > rel_tol * hi.max(T::one()) && iters < 20_000 {
        let mid = (lo + hi) * lit(0.5);
        if f(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    hi
}

/// Communication-amplitude update: minimize
/// `(n_c/k) |w_bb h_c diag(p) - I|_F^2` subject to `|p|^2 <= k`.
///
/// With `A = w_bb h_c`, stationarity gives
/// `p_i = Re(A_ii) / (|A[:, i]|^2 + lambda)`; the multiplier is found by
/// bisection on the power constraint (zero when inactive).
pub fn solve_p_step<T: Real>(
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    config: &ImConfig,
    opts: &SolverOptions<T>,
) -> Vec<T> {
    let a = w_bb.mul(&eq.h_c);
    let k = a.cols();
    let diag_re: Vec<T> = (0..k).map(|i| a[(i, i)].re).collect();
    let col_sq: Vec<T> = (0..k)
        .map(|i| {
            let mut acc = T::zero();
            for r in 0..a.rows() {
                acc += a[(r, i)].norm_sqr();
            }
            acc
        })
        .collect();
    let p_of = |lambda: T| -> Vec<T> {
        diag_re
            .iter()
            .zip(&col_sq)
            .map(|(&num, &den)| {
                let d = den + lambda;
                if d == T::zero() {
                    T::zero()
                } else {
                    num / d
                }
            })
            .collect()
    };
    let power = |p: &[T]| p.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let cap = lit::<T>(config.k as f64);
    let p0 = p_of(T::zero());
    if power(&p0) <= cap + opts.kkt_tol {
        return p0;
    }
    let lambda = bisect_multiplier(|lambda| power(&p_of(lambda)) - cap, opts.bisection_tol);
    p_of(lambda)
}

/// Alternating optimization of the digital stage.
///
/// Starts from the unoptimized state (`b = t`, `p = 1`, baseline combiner),
/// fixes the MSE budget once, then cycles sensing amplitudes,
/// communication amplitudes, and the LMMSE combiner until the objective
/// decrease falls below `convergence_tol` or the iteration cap is hit. The
/// objective trace is checked to be non-increasing at every step; a
/// violation beyond 1e-9 is reported as an error rather than tolerated.
pub fn optimize_digital<T: Real>(
    eq: &EquivalentChannels<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    mu: T,
    opts: &SolverOptions<T>,
) -> Result<AllocationResult<T>> {
    let (w0, gamma) = budget(eq, spec, noise, config, mu, opts)?;

    let mut p = vec![T::one(); config.k];
    let mut w_bb = w0;
    let mut trace: Vec<T> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut b = spec.t.clone();
    let slack = lit::<T>(1e-9);

    for iter in 1..=opts.max_iterations {
        b = solve_b_step(eq, &w_bb, &p, spec, noise, config, gamma, opts)?;
        let objective = sensing_objective(&b, spec);
        p = solve_p_step(eq, &w_bb, config, opts);
        w_bb = lmmse_combiner(eq, &p, &b, spec, noise, config)?;
        iterations = iter;

        if let Some(&previous) = trace.last() {
            if objective > previous + slack {
                return Err(Error::NonMonotoneObjective {
                    iteration: iter,
                    previous: previous.to_f64().unwrap_or(f64::NAN),
                    current: objective.to_f64().unwrap_or(f64::NAN),
                });
            }
            if previous - objective < opts.convergence_tol {
                trace.push(objective);
                converged = true;
                break;
            }
        }
        trace.push(objective);

        debug_assert!(
            comm_mse(eq, &w_bb, &p, &b, spec, noise, config)
                <= gamma + opts.kkt_tol * (T::one() + gamma),
            "MSE budget violated mid-iteration"
        );
    }

    Ok(AllocationResult {
        b,
        p,
        w_bb,
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// Unoptimized digital stage made feasible: a single sensing-amplitude
/// projection at unit communication amplitudes and the baseline combiner.
/// Used as the no-optimization comparison point.
pub fn unoptimized_allocation<T: Real>(
    eq: &EquivalentChannels<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    mu: T,
    opts: &SolverOptions<T>,
) -> Result<AllocationResult<T>> {
    let (w0, gamma) = budget(eq, spec, noise, config, mu, opts)?;
    let p = vec![T::one(); config.k];
    let b = solve_b_step(eq, &w0, &p, spec, noise, config, gamma, opts)?;
    let objective = sensing_objective(&b, spec);
    Ok(AllocationResult {
        b,
        p,
        w_bb: w0,
        objective_trace: vec![objective],
        iterations: 1,
        converged: true,
    })
}

/// Digital stage exactly as assumed by the analog design: full desired
/// sensing amplitudes, unit communication amplitudes, baseline combiner.
/// No feasibility projection is applied.
pub fn raw_allocation<T: Real>(
    eq: &EquivalentChannels<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
) -> Result<AllocationResult<T>> {
    let w0 = baseline_combiner(eq, spec, noise, config)?;
    Ok(AllocationResult {
        b: spec.t.clone(),
        p: vec![T::one(); config.k],
        w_bb: w0,
        objective_trace: vec![T::zero()],
        iterations: 0,
        converged: true,
    })
}

fn budget<T: Real>(
    eq: &EquivalentChannels<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    mu: T,
    opts: &SolverOptions<T>,
) -> Result<(CMat<T>, T)> {
    if mu < T::zero() || mu > T::one() {
        return Err(Error::InvalidParameter(format!(
            "sensing-tolerance weight must lie in [0, 1], got {mu}"
        )));
    }
    opts.validate()?;
    let w0 = baseline_combiner(eq, spec, noise, config)?;
    let gamma = threshold_given(&w0, eq, spec, noise, config, mu);
    Ok((w0, gamma))
}

/// Check that a recorded objective trace is non-increasing up to `slack`.
pub fn check_monotone_trace<T: Real>(trace: &[T], slack: T) -> Result<()> {
    for (i, pair) in trace.windows(2).enumerate() {
        if pair[1] > pair[0] + slack {
            return Err(Error::NonMonotoneObjective {
                iteration: i + 1,
                previous: pair[0].to_f64().unwrap_or(f64::NAN),
                current: pair[1].to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamspace::dft_codebook;
    use crate::modem::ModulationKind;
    use crate::precoding::sensing_precoder;
    use crate::scalar::complex_normal;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qam4() -> ImConfig {
        ImConfig::new(4, 3, 4, ModulationKind::Qam).unwrap()
    }

    fn spec3() -> SensingSpec<f64> {
        SensingSpec::uniform(vec![11, 12, 13], 5.0).unwrap()
    }

    fn random_eq(rng: &mut ChaCha8Rng, k: usize, w: usize) -> EquivalentChannels<f64> {
        EquivalentChannels {
            h_c: CMat::from_fn(k, k, |_, _| complex_normal(rng)),
            h_r: CMat::from_fn(k, w, |_, _| complex_normal(rng)),
        }
    }

    #[test]
    fn on_grid_beampattern_equals_amplitudes() {
        let spec = spec3();
        let cb = dft_codebook::<f64>(32);
        let f_r = sensing_precoder(&spec, &cb).unwrap();
        let bp = beampattern(&spec.t, &f_r, &spec);
        for (v, t) in bp.v.iter().zip(&spec.t) {
            assert!((v - t).abs() < 1e-12);
        }
        assert!(beampattern_mse(&bp, &spec) < 1e-20);

        let zero = beampattern(&[0.0; 3], &f_r, &spec);
        assert_eq!(zero.v, vec![0.0; 3]);
    }

    #[test]
    fn beampattern_mse_of_zero_allocation() {
        let spec = spec3();
        let bp = Beampattern { v: vec![0.0; 3] };
        let mse = beampattern_mse(&bp, &spec);
        assert!((mse - 5.0).abs() < 1e-12, "mse = {mse}");
    }

    #[test]
    fn b_step_unconstrained_optimum_is_t() {
        // no sensing coupling: the budget constraint cannot bind
        let eq = EquivalentChannels {
            h_c: CMat::identity(4),
            h_r: CMat::zeros(4, 3),
        };
        let spec = spec3();
        let noise = LinkNoise::new(0.1).unwrap();
        let opts = SolverOptions::default();
        let w = baseline_combiner(&eq, &spec, &noise, &qam4()).unwrap();
        let b = solve_b_step(&eq, &w, &[1.0; 4], &spec, &noise, &qam4(), 10.0, &opts).unwrap();
        for (bi, ti) in b.iter().zip(&spec.t) {
            assert!((bi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn b_step_first_iteration_at_full_weight_returns_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let eq = random_eq(&mut rng, 4, 3);
            let spec = spec3();
            let noise = LinkNoise::new(0.15).unwrap();
            let config = qam4();
            let opts = SolverOptions::default();
            let w0 = baseline_combiner(&eq, &spec, &noise, &config).unwrap();
            let gamma = crate::precoding::mse_threshold(&eq, &spec, &noise, &config, 1.0).unwrap();
            let b =
                solve_b_step(&eq, &w0, &[1.0; 4], &spec, &noise, &config, gamma, &opts).unwrap();
            for (bi, ti) in b.iter().zip(&spec.t) {
                assert!((bi - ti).abs() < 1e-9, "b = {bi}, t = {ti}");
            }
        }
    }

    #[test]
    fn b_step_detects_infeasible_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let eq = random_eq(&mut rng, 4, 3);
        let spec = spec3();
        let noise = LinkNoise::new(0.15).unwrap();
        let config = qam4();
        let opts = SolverOptions::default();
        let w0 = baseline_combiner(&eq, &spec, &noise, &config).unwrap();
        let err = solve_b_step(&eq, &w0, &[1.0; 4], &spec, &noise, &config, 0.0, &opts);
        assert!(matches!(err, Err(Error::InfeasibleMseBudget { .. })));
    }

    #[test]
    fn b_step_respects_both_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let config = qam4();
        let opts = SolverOptions::default();
        for _ in 0..50 {
            let eq = random_eq(&mut rng, 4, 3);
            let spec = spec3();
            let noise = LinkNoise::new(rng.gen_range(0.02..0.5)).unwrap();
            let w0 = baseline_combiner(&eq, &spec, &noise, &config).unwrap();
            let mu = rng.gen_range(0.0..1.0);
            let gamma = crate::precoding::mse_threshold(&eq, &spec, &noise, &config, mu).unwrap();
            let b =
                solve_b_step(&eq, &w0, &[1.0; 4], &spec, &noise, &config, gamma, &opts).unwrap();
            let chi = comm_mse(&eq, &w0, &[1.0; 4], &b, &spec, &noise, &config);
            assert!(chi <= gamma + 1e-6, "chi = {chi}, gamma = {gamma}");
            let power: f64 = spec.d.iter().zip(&b).map(|(d, bi)| d * bi * bi).sum();
            assert!(power <= spec.t_r + 1e-6);
            // coordinates stay inside [0, t_i]
            for (bi, ti) in b.iter().zip(&spec.t) {
                assert!(*bi >= 0.0 && *bi <= *ti + 1e-12);
            }
        }
    }

    #[test]
    fn p_step_identity_examples() {
        let opts = SolverOptions::default();
        let config = qam4();
        // A = I: per-branch optimum is 1, power exactly K
        let eq: EquivalentChannels<f64> = EquivalentChannels {
            h_c: CMat::identity(4),
            h_r: CMat::zeros(4, 3),
        };
        let p = solve_p_step(&eq, &CMat::identity(4), &config, &opts);
        for v in &p {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((p.iter().map(|v| v * v).sum::<f64>() - 4.0).abs() < 1e-12);

        // A = 2I: unconstrained optimum 1/2
        let p = solve_p_step(&eq, &CMat::identity(4).scale_real(2.0), &config, &opts);
        for v in &p {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn p_step_power_never_exceeds_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let config = qam4();
        let opts = SolverOptions::default();
        for _ in 0..50 {
            let eq = random_eq(&mut rng, 4, 3);
            let w = CMat::from_fn(4, 4, |_, _| complex_normal(&mut rng)).scale_real(3.0);
            let p = solve_p_step(&eq, &w, &config, &opts);
            let power: f64 = p.iter().map(|v| v * v).sum();
            assert!(power <= 4.0 + 1e-6, "power = {power}");
        }
    }

    fn svlike_instance(rng: &mut ChaCha8Rng) -> (EquivalentChannels<f64>, SensingSpec<f64>, LinkNoise<f64>) {
        (
            random_eq(rng, 4, 3),
            spec3(),
            LinkNoise::new(rng.gen_range(0.02..0.4)).unwrap(),
        )
    }

    #[test]
    fn optimizer_full_weight_keeps_desired_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..10 {
            let (eq, spec, noise) = svlike_instance(&mut rng);
            let res =
                optimize_digital(&eq, &spec, &noise, &qam4(), 1.0, &SolverOptions::default())
                    .unwrap();
            assert!(res.converged);
            for (bi, ti) in res.b.iter().zip(&spec.t) {
                assert!((bi - ti).abs() < 1e-9);
            }
            assert!(*res.objective_trace.last().unwrap() < 1e-12);
        }
    }

    #[test]
    fn optimizer_decouples_when_sensing_is_invisible() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let eq = EquivalentChannels {
            h_c: CMat::from_fn(4, 4, |_, _| complex_normal(&mut rng)),
            h_r: CMat::zeros(4, 3),
        };
        let spec = spec3();
        let noise = LinkNoise::new(0.1).unwrap();
        for mu in [0.0, 0.3, 0.8] {
            let res =
                optimize_digital(&eq, &spec, &noise, &qam4(), mu, &SolverOptions::default())
                    .unwrap();
            for (bi, ti) in res.b.iter().zip(&spec.t) {
                assert!((bi - ti).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn optimizer_trace_is_monotone_and_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let config = qam4();
        let opts = SolverOptions::default();
        for _ in 0..25 {
            let (eq, spec, noise) = svlike_instance(&mut rng);
            let mu = rng.gen_range(0.05..1.0);
            let res = optimize_digital(&eq, &spec, &noise, &config, mu, &opts).unwrap();
            check_monotone_trace(&res.objective_trace, 1e-9).unwrap();
            assert!(res.converged, "no convergence within cap");
            let gamma = crate::precoding::mse_threshold(&eq, &spec, &noise, &config, mu).unwrap();
            let chi = comm_mse(&eq, &res.w_bb, &res.p, &res.b, &spec, &noise, &config);
            assert!(chi <= gamma + 1e-6);
            let power: f64 = res.p.iter().map(|v| v * v).sum();
            assert!(power <= 4.0 + 1e-6);
            let sensing_power: f64 = spec.d.iter().zip(&res.b).map(|(d, b)| d * b * b).sum();
            assert!(sensing_power <= spec.t_r + 1e-6);
        }
    }

    #[test]
    fn optimizer_rejects_bad_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let (eq, spec, noise) = svlike_instance(&mut rng);
        let err = optimize_digital(&eq, &spec, &noise, &qam4(), 1.5, &SolverOptions::default());
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn unoptimized_allocation_upper_bounds_optimized() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let config = qam4();
        let opts = SolverOptions::default();
        for _ in 0..20 {
            let (eq, spec, noise) = svlike_instance(&mut rng);
            let mu = rng.gen_range(0.05..1.0);
            let opt = optimize_digital(&eq, &spec, &noise, &config, mu, &opts).unwrap();
            let unopt = unoptimized_allocation(&eq, &spec, &noise, &config, mu, &opts).unwrap();
            assert!(
                opt.objective_trace.last().unwrap()
                    <= &(unopt.objective_trace[0] + 1e-12)
            );
        }
    }

    #[test]
    fn degenerate_no_sensing_configuration() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let eq = EquivalentChannels {
            h_c: CMat::from_fn(4, 4, |_, _| complex_normal(&mut rng)),
            h_r: CMat::zeros(4, 0),
        };
        let spec = SensingSpec::uniform(vec![], 0.0).unwrap();
        let noise = LinkNoise::new(0.1).unwrap();
        let res = optimize_digital(&eq, &spec, &noise, &qam4(), 0.5, &SolverOptions::default())
            .unwrap();
        assert!(res.b.is_empty());
        assert!(res.converged);
    }

    #[test]
    fn tampered_trace_is_rejected() {
        let trace = [0.5, 0.3, 0.30001];
        let err = check_monotone_trace(&trace, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneObjective { iteration: 2, .. }));
        check_monotone_trace(&[0.5, 0.3, 0.3], 1e-9).unwrap();
    }
}
