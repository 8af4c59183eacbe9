//! Analog-part construction and the digital combiner: sensing precoder
//! assignment, two-stage communication beam selection, equivalent digital
//! channels, LMMSE combining, and the communication MSE machinery.
//!
//! The analog stage is codebook-constrained: every transmit/receive beam is
//! a DFT codeword, communication transmit beams must avoid the sensing
//! directions, and the `K` receive beams are kept distinct so the analog
//! combiner stays column-orthonormal (the post-combining noise is then white
//! with the per-branch variance).

use crate::beamspace::{to_beamspace, ChannelRealization, Codebook};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::modem::{ImConfig, SensingSpec};
use crate::scalar::{lit, Real};
use num_complex::Complex;

/// Post-combining noise variance per receive branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkNoise<T> {
    pub sigma2: T,
}

impl<T: Real> LinkNoise<T> {
    pub fn new(sigma2: T) -> Result<Self> {
        if sigma2 <= T::zero() || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    /// Noise variance for a per-bit SNR of `ebn0_db`:
    /// `sigma^2 = n_c / (eta * 10^(ebn0_db / 10))`.
    pub fn from_ebn0_db(ebn0_db: T, config: &ImConfig) -> Result<Self> {
        let snr = lit::<T>(10.0).powf(ebn0_db / lit(10.0));
        let eta = lit::<T>(config.spectral_efficiency() as f64);
        Self::new(lit::<T>(config.n_c as f64) / (eta * snr))
    }
}

/// Chosen analog beams, as 1-based DFT codeword indices. Transmit indices
/// never collide with the sensing directions, and each list is
/// duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamSelection {
    pub tx_indices: Vec<usize>,
    pub rx_indices: Vec<usize>,
}

/// Low-dimensional channels seen by the digital stage once the analog beams
/// are fixed: `h_c` is `K x K` (communication), `h_r` is `K x W` (sensing
/// leakage into the receive beams).
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannels<T> {
    pub h_c: CMat<T>,
    pub h_r: CMat<T>,
}

/// Analog sensing precoder: column `l` is the DFT codeword at
/// `spec.codeword_indices[l]`, which equals the steering vector of the
/// corresponding grid direction.
pub fn sensing_precoder<T: Real>(
    spec: &SensingSpec<T>,
    codebook: &Codebook<T>,
) -> Result<CMat<T>> {
    for &ix in &spec.codeword_indices {
        if ix < 1 || ix > codebook.size() {
            return Err(Error::InvalidParameter(format!(
                "sensing codeword index {ix} outside 1..={}",
                codebook.size()
            )));
        }
    }
    Ok(codebook.columns(&spec.codeword_indices))
}

/// Stage one of beam selection: the `l` strongest admissible (tx, rx)
/// codeword pairs by beamspace power `|f_rx^H H f_tx|`, excluding transmit
/// indices in `omega`. Sorted by descending power with `(tx, rx)`
/// lexicographic tie-break.
pub fn candidate_pairs<T: Real>(
    h: &ChannelRealization<T>,
    tx_cb: &Codebook<T>,
    rx_cb: &Codebook<T>,
    omega: &[usize],
    l: usize,
) -> Result<Vec<(usize, usize)>> {
    let gram = to_beamspace(h, rx_cb, tx_cb);
    ranked_pairs(&gram, omega, l)
}

fn ranked_pairs<T: Real>(
    gram: &CMat<T>,
    omega: &[usize],
    l: usize,
) -> Result<Vec<(usize, usize)>> {
    let (n_r, n_t) = (gram.rows(), gram.cols());
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(n_r * n_t);
    for tx in 1..=n_t {
        if omega.contains(&tx) {
            continue;
        }
        for rx in 1..=n_r {
            pairs.push((gram[(rx - 1, tx - 1)].norm_sqr(), tx, rx));
        }
    }
    if l > pairs.len() {
        return Err(Error::CandidateStarvation {
            needed: l,
            available: pairs.len(),
        });
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("beam powers are finite")
            .then_with(|| (a.1, a.2).cmp(&(b.1, b.2)))
    });
    pairs.truncate(l);
    Ok(pairs.into_iter().map(|(_, tx, rx)| (tx, rx)).collect())
}

/// `(n_c / k) * |W h_c diag(p) - I|_F^2`, the residual symbol-estimation
/// error term of the communication MSE.
fn identity_error_term<T: Real>(
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    p: &[T],
    config: &ImConfig,
) -> T {
    let wp = w_bb.mul(&eq.h_c).scale_cols_real(p);
    let k = wp.rows();
    let mut acc = T::zero();
    for i in 0..k {
        for j in 0..k {
            let mut z = wp[(i, j)];
            if i == j {
                z -= Complex::new(T::one(), T::zero());
            }
            acc += z.norm_sqr();
        }
    }
    acc * config.activation_ratio()
}

/// Per-sensing-beam quadratic weights of the MSE: entry `i` is
/// `d_i * |(W h_r)[:, i]|^2`, so the sensing contribution to the MSE is
/// `sum_i g_i b_i^2`.
fn sensing_weights<T: Real>(wh_r: &CMat<T>, d: &[T]) -> Vec<T> {
    (0..wh_r.cols())
        .map(|i| {
            let mut col = T::zero();
            for r in 0..wh_r.rows() {
                col += wh_r[(r, i)].norm_sqr();
            }
            d[i] * col
        })
        .collect()
}

fn sensing_term<T: Real>(weights: &[T], b: &[T]) -> T {
    weights
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (&g, &bi)| acc + g * bi * bi)
}

fn noise_term<T: Real>(w_bb: &CMat<T>, noise: &LinkNoise<T>) -> T {
    noise.sigma2 * w_bb.frob_sq()
}

/// Communication symbol MSE for combiner `w_bb`, communication amplitudes
/// `p`, and sensing amplitudes `b`:
///
/// `(n_c/k) |W h_c diag(p) - I|^2 + sum_i d_i b_i^2 |(W h_r)[:,i]|^2
///  + sigma^2 |W|^2`.
pub fn comm_mse<T: Real>(
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    p: &[T],
    b: &[T],
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
) -> T {
    let weights = sensing_weights(&w_bb.mul(&eq.h_r), &spec.d);
    identity_error_term(eq, w_bb, p, config)
        + sensing_term(&weights, b)
        + noise_term(w_bb, noise)
}

/// LMMSE combiner for the given power allocation. With the communication
/// second moment `(n_c/k) I` and the one-hot sensing second moment
/// `diag(d)`:
///
/// `W = (n_c/k) diag(p) h_c^H ( (n_c/k) A A^H + B diag(d) B^H
///      + sigma^2 I )^{-1}`,
/// where `A = h_c diag(p)` and `B = h_r diag(b)`. This is the global
/// minimizer of [`comm_mse`] over all `K x K` combiners.
pub fn lmmse_combiner<T: Real>(
    eq: &EquivalentChannels<T>,
    p: &[T],
    b: &[T],
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
) -> Result<CMat<T>> {
    let ratio: T = config.activation_ratio();
    let a = eq.h_c.scale_cols_real(p);
    let mut m = a.mul(&a.adjoint()).scale_real(ratio);
    if spec.w > 0 {
        let hb = eq.h_r.scale_cols_real(b);
        m = m.add(&hb.scale_cols_real(&spec.d).mul(&hb.adjoint()));
    }
    let k = eq.h_c.rows();
    for i in 0..k {
        m[(i, i)] += Complex::new(noise.sigma2, T::zero());
    }
    Ok(a.adjoint().scale_real(ratio).mul(&m.inverse()?))
}

/// Combiner of the unoptimized digital stage: LMMSE at unit communication
/// amplitudes and the desired sensing amplitudes `t`.
pub fn baseline_combiner<T: Real>(
    eq: &EquivalentChannels<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
) -> Result<CMat<T>> {
    let ones = vec![T::one(); eq.h_c.cols()];
    lmmse_combiner(eq, &ones, &spec.t, spec, noise, config)
}

/// Relative communication MSE budget: the MSE of the unoptimized digital
/// stage with the sensing term weighted by `mu`.
pub fn mse_threshold<T: Real>(
    eq: &EquivalentChannels<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    mu: T,
) -> Result<T> {
    let w0 = baseline_combiner(eq, spec, noise, config)?;
    Ok(threshold_given(&w0, eq, spec, noise, config, mu))
}

/// MSE budget evaluated at a precomputed baseline combiner.
pub(crate) fn threshold_given<T: Real>(
    w0: &CMat<T>,
    eq: &EquivalentChannels<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    mu: T,
) -> T {
    let ones = vec![T::one(); eq.h_c.cols()];
    let weights = sensing_weights(&w0.mul(&eq.h_r), &spec.d);
    identity_error_term(eq, w0, &ones, config)
        + mu * sensing_term(&weights, &spec.t)
        + noise_term(w0, noise)
}

/// Residual and weights of the MSE as a function of the sensing amplitudes:
/// `mse(b) = c0 + sum_i g_i b_i^2` for fixed combiner and communication
/// amplitudes.
pub(crate) fn mse_quadratic_in_b<T: Real>(
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    p: &[T],
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
) -> (T, Vec<T>) {
    let c0 = identity_error_term(eq, w_bb, p, config) + noise_term(w_bb, noise);
    let weights = sensing_weights(&w_bb.mul(&eq.h_r), &spec.d);
    (c0, weights)
}

/// Two-stage analog beam selection.
///
/// Stage one ranks the `l` strongest admissible beam pairs. Stage two
/// scans every `K`-subset of the candidates whose transmit indices are
/// pairwise distinct and whose receive indices are pairwise distinct, and
/// keeps the subset minimizing the unoptimized-digital MSE (the budget at
/// full sensing weight). Ties resolve to the first subset in candidate
/// order.
pub fn select_beams<T: Real>(
    h: &ChannelRealization<T>,
    tx_cb: &Codebook<T>,
    rx_cb: &Codebook<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    l: usize,
) -> Result<(BeamSelection, EquivalentChannels<T>)> {
    let gram = to_beamspace(h, rx_cb, tx_cb);
    let candidates = ranked_pairs(&gram, &spec.codeword_indices, l)?;
    let k = config.k;

    let mut best: Option<(T, Vec<usize>)> = None;
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    scan_subsets(&candidates, k, &mut chosen, &mut |subset| {
        let eq = equivalent_channels(&gram, &candidates, subset, spec);
        let chi = mse_threshold(&eq, spec, noise, config, T::one())?;
        match &best {
            Some((best_chi, _)) if chi >= *best_chi => {}
            _ => best = Some((chi, subset.to_vec())),
        }
        Ok(())
    })?;

    let (_, subset) = best.ok_or(Error::CandidateStarvation {
        needed: k,
        available: candidates.len(),
    })?;
    let eq = equivalent_channels(&gram, &candidates, &subset, spec);
    let selection = BeamSelection {
        tx_indices: subset.iter().map(|&i| candidates[i].0).collect(),
        rx_indices: subset.iter().map(|&i| candidates[i].1).collect(),
    };
    Ok((selection, eq))
}

/// Equivalent digital channels induced by the candidate pairs in `subset`:
/// entry `(i, j)` of `h_c` couples the i-th selected receive beam with the
/// j-th selected transmit beam, and `h_r` couples receive beams with the
/// sensing directions.
fn equivalent_channels<T: Real>(
    gram: &CMat<T>,
    candidates: &[(usize, usize)],
    subset: &[usize],
    spec: &SensingSpec<T>,
) -> EquivalentChannels<T> {
    let k = subset.len();
    let h_c = CMat::from_fn(k, k, |i, j| {
        let (_, rx) = candidates[subset[i]];
        let (tx, _) = candidates[subset[j]];
        gram[(rx - 1, tx - 1)]
    });
    let h_r = CMat::from_fn(k, spec.w, |i, l| {
        let (_, rx) = candidates[subset[i]];
        gram[(rx - 1, spec.codeword_indices[l] - 1)]
    });
    EquivalentChannels { h_c, h_r }
}

/// Visit every `k`-subset of candidate indices with pairwise-distinct tx
/// and rx indices, in lexicographic candidate order.
fn scan_subsets<E>(
    candidates: &[(usize, usize)],
    k: usize,
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]) -> std::result::Result<(), E>,
) -> std::result::Result<(), E> {
    if chosen.len() == k {
        return visit(chosen);
    }
    let start = chosen.last().map_or(0, |&i| i + 1);
    let remaining = k - chosen.len();
    if start + remaining > candidates.len() {
        return Ok(());
    }
    for i in start..=candidates.len() - remaining {
        let (tx, rx) = candidates[i];
        let clash = chosen
            .iter()
            .any(|&j| candidates[j].0 == tx || candidates[j].1 == rx);
        if clash {
            continue;
        }
        chosen.push(i);
        scan_subsets(candidates, k, chosen, visit)?;
        chosen.pop();
    }
    Ok(())
}
