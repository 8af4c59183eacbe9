//! Analytic error-probability machinery.
//!
//! With on-grid paths, the sensing beams knock out part of the beamspace:
//! paths falling in the `w` sensing transmit columns are lost outright, and
//! any receive row those paths touch is swamped by sensing interference, so
//! only paths outside both remain usable for communication. This module
//! computes the exact distribution of that effective path count by counting
//! cell placements, validates it against a brute-force placement oracle,
//! and combines it with a per-pair error formula into an average pairwise
//! error probability over all candidate messages.

use crate::error::{Error, Result};
use crate::modem::{count_bit_errors, value_to_bits, ImCodebook, ImConfig};
use crate::precoding::LinkNoise;
use crate::scalar::{lit, Real};
use num_complex::Complex;
use rand::Rng;

/// Counting universe: array sizes, sensing beam count, and path count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridParams {
    pub n_t: usize,
    pub n_r: usize,
    pub w: usize,
    pub p: usize,
}

impl GridParams {
    pub fn new(n_t: usize, n_r: usize, w: usize, p: usize) -> Result<Self> {
        if n_t == 0 || n_r == 0 || p == 0 {
            return Err(Error::InvalidParameter(
                "array sizes and path count must be positive".into(),
            ));
        }
        if w >= n_t {
            return Err(Error::InvalidParameter(format!(
                "sensing beam count {w} must leave transmit beams free (n_t = {n_t})"
            )));
        }
        if p > n_t * n_r {
            return Err(Error::ImpossiblePlacement {
                paths: p,
                cells: n_t * n_r,
            });
        }
        Ok(Self { n_t, n_r, w, p })
    }
}

/// Distribution of the effective communication path count, together with
/// the intermediate tables: `p_mr[r]` is the probability that the sensing
/// columns cover `r` paths, and `p_mb[r][b]` the probability that those `r`
/// paths touch `b` receive rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCoverDistribution<T> {
    pub pmf: Vec<T>,
    pub p_mr: Vec<T>,
    pub p_mb: Vec<Vec<T>>,
}

impl<T: Real> PathCoverDistribution<T> {
    /// Probability that fewer than `k` effective paths remain.
    pub fn below(&self, k: usize) -> T {
        self.pmf
            .iter()
            .take(k.min(self.pmf.len()))
            .fold(T::zero(), |a, &v| a + v)
    }
}

/// Index convention used by the clean-row split of the conditional count.
/// The corrected variant splits the non-sensing columns by interfered rows
/// (`b`), which makes the distribution normalize; the miscounted variant
/// reproduces a plausible transcription slip (splitting by `r`) and exists
/// only as a negative control for the oracle-agreement check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowSplit {
    ByInterferedRows,
    #[allow(dead_code)]
    ByCoveredPaths,
}

/// Exact distribution of the effective communication path count.
pub fn effective_path_dist<T: Real>(g: &GridParams) -> PathCoverDistribution<T> {
    effective_path_dist_impl(g, RowSplit::ByInterferedRows)
}

pub(crate) fn effective_path_dist_impl<T: Real>(
    g: &GridParams,
    split: RowSplit,
) -> PathCoverDistribution<T> {
    let lf = LnFactorials::<T>::up_to(g.n_t * g.n_r);
    let free_cells = g.n_r * (g.n_t - g.w);
    let sensing_cells = g.n_r * g.w;

    // P(sensing columns cover r paths): hypergeometric split of the p cells
    // between the sensing block and the rest.
    let p_mr: Vec<T> = (0..=g.p)
        .map(|r| {
            match (
                lf.ln_binom(free_cells, g.p as isize - r as isize),
                lf.ln_binom(sensing_cells, r as isize),
                lf.ln_binom(g.n_t * g.n_r, g.p as isize),
            ) {
                (Some(a), Some(b), Some(c)) => (a + b - c).exp(),
                _ => T::zero(),
            }
        })
        .collect();

    // P(r covered paths touch b receive rows), by sequential placement into
    // the sensing block: the i-th path lands in a fresh row or an already
    // touched one, proportionally to the free cells of each kind.
    let r_max = g.p.min(sensing_cells);
    let mut p_mb: Vec<Vec<T>> = vec![vec![T::zero(); g.n_r + 1]; r_max + 1];
    p_mb[0][0] = T::one();
    for r in 1..=r_max {
        let denom = lit::<T>((sensing_cells - r + 1) as f64);
        for b in 1..=r.min(g.n_r) {
            let fresh = lit::<T>(((g.n_r - b + 1) * g.w) as f64);
            let stale_cells = (b * g.w) as isize - (r as isize - 1);
            let stale = lit::<T>(stale_cells.max(0) as f64);
            let mut prob = p_mb[r - 1][b - 1] * fresh / denom;
            if b <= r - 1 {
                prob += p_mb[r - 1][b] * stale / denom;
            }
            p_mb[r][b] = prob;
        }
    }

    // P(c effective | r covered, b interfered rows): the remaining p - r
    // paths are uniform over the non-sensing columns; those in the b
    // interfered rows are useless.
    let p_mc = |c: usize, r: usize, b: usize| -> T {
        let clean_rows = match split {
            RowSplit::ByInterferedRows => g.n_r - b,
            RowSplit::ByCoveredPaths => g.n_r.saturating_sub(r),
        };
        let interfered = b * (g.n_t - g.w);
        let clean = clean_rows * (g.n_t - g.w);
        let rest = g.p as isize - r as isize;
        match (
            lf.ln_binom(interfered, rest - c as isize),
            lf.ln_binom(clean, c as isize),
            lf.ln_binom(free_cells, rest),
        ) {
            (Some(a), Some(b2), Some(d)) => (a + b2 - d).exp(),
            _ => T::zero(),
        }
    };

    let mut pmf = vec![T::zero(); g.p + 1];
    pmf[g.p] = p_mr[0];
    for c in 0..g.p {
        let mut acc = T::zero();
        for r in 1..=(g.p - c).min(r_max) {
            for b in 1..=r.min(g.n_r) {
                acc += p_mr[r] * p_mb[r][b] * p_mc(c, r, b);
            }
        }
        pmf[c] = acc;
    }

    PathCoverDistribution { pmf, p_mr, p_mb }
}

/// Brute-force placement oracle: drop `p` paths on distinct cells of the
/// `n_r x n_t` grid uniformly at random, count the paths surviving outside
/// the sensing columns and the interfered rows, and return the empirical
/// distribution of that count. The sensing columns are fixed to the first
/// `w`; the count distribution does not depend on which columns they are.
pub fn mc_path_oracle<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    g: &GridParams,
    trials: usize,
) -> Vec<T> {
    assert!(trials >= 1);
    let mut counts = vec![0u64; g.p + 1];
    let cells = g.n_t * g.n_r;
    let mut row_hit = vec![false; g.n_r];
    for _ in 0..trials {
        row_hit.fill(false);
        let placed = rand::seq::index::sample(rng, cells, g.p);
        let mut effective = 0usize;
        for cell in placed.iter() {
            let (row, col) = (cell / g.n_t, cell % g.n_t);
            if col < g.w {
                row_hit[row] = true;
            }
        }
        for cell in placed.iter() {
            let (row, col) = (cell / g.n_t, cell % g.n_t);
            if col >= g.w && !row_hit[row] {
                effective += 1;
            }
        }
        counts[effective] += 1;
    }
    counts
        .into_iter()
        .map(|c| lit::<T>(c as f64 / trials as f64))
        .collect()
}

/// Pairwise error probability between two modulated candidates, averaged
/// over the effective-path distribution. Below `k` effective paths the link
/// is in outage and every one of the `2^eta` candidates is equally likely.
pub fn pairwise_error_prob<T: Real>(
    x_bar: &[Complex<T>],
    x_hat: &[Complex<T>],
    g: &GridParams,
    config: &ImConfig,
    noise: &LinkNoise<T>,
) -> Result<T> {
    if x_bar.len() != config.k || x_hat.len() != config.k {
        return Err(Error::LengthMismatch {
            expected: config.k,
            got: x_bar.len().max(x_hat.len()),
        });
    }
    if config.k > g.p {
        return Err(Error::InvalidParameter(format!(
            "analysis needs at least k = {} paths, grid has p = {}",
            config.k, g.p
        )));
    }
    let dist = effective_path_dist::<T>(g);
    Ok(pairwise_with_dist(x_bar, x_hat, g, config, noise, &dist))
}

fn pairwise_with_dist<T: Real>(
    x_bar: &[Complex<T>],
    x_hat: &[Complex<T>],
    g: &GridParams,
    config: &ImConfig,
    noise: &LinkNoise<T>,
    dist: &PathCoverDistribution<T>,
) -> T {
    let k = config.k;
    let delta_sq: Vec<T> = x_bar
        .iter()
        .zip(x_hat)
        .map(|(a, b)| (*a - *b).norm_sqr())
        .collect();
    let base = lit::<T>((g.n_t * g.n_r) as f64) / (lit::<T>(g.p as f64) * noise.sigma2);
    let branch4 = ErrorBranch::new(&delta_sq, base / lit(4.0), lit(12.0));
    let branch3 = ErrorBranch::new(&delta_sq, base / lit(3.0), lit(4.0));

    let mut prob = T::zero();
    for c in k..=g.p {
        let y = c - k + 1;
        prob += dist.pmf[c] * (branch4.conditional(y) + branch3.conditional(y));
    }
    let eta = config.spectral_efficiency();
    let outage = dist.below(k) / lit::<T>((1u64 << eta) as f64);
    (prob + outage).max(T::zero()).min(T::one())
}

/// One additive branch of the conditional pairwise error formula:
/// `B(x, c - k + 1) / (front * prod_{j=2..k} s_j)` with
/// `x = sum_i (coeff d_i + 1)` and tail sums `s_j = sum_{i>=j} (coeff d_i + 1)`.
struct ErrorBranch<T> {
    x: T,
    denom: T,
}

impl<T: Real> ErrorBranch<T> {
    fn new(delta_sq: &[T], coeff: T, front: T) -> Self {
        let terms: Vec<T> = delta_sq.iter().map(|&d| coeff * d + T::one()).collect();
        let x = terms.iter().fold(T::zero(), |a, &v| a + v);
        let mut denom = front;
        let mut tail = x;
        for j in 1..terms.len() {
            tail -= terms[j - 1];
            denom *= tail;
        }
        Self { x, denom }
    }

    /// `B(x, y) / denom` with the Beta function in exact rational form for
    /// integer `y >= 1`: `B(x, y) = (y - 1)! / (x (x+1) ... (x+y-1))`.
    fn conditional(&self, y: usize) -> T {
        let mut beta = T::one() / self.x;
        for i in 1..y {
            let i_t = lit::<T>(i as f64);
            beta = beta * i_t / (self.x + i_t);
        }
        beta / self.denom
    }
}

/// Average pairwise error probability over all ordered candidate pairs,
/// weighted by bit errors: an analytic proxy for the bit error rate of the
/// on-grid link without digital optimization.
pub fn apep<T: Real>(g: &GridParams, cb: &ImCodebook<T>, noise: &LinkNoise<T>) -> Result<T> {
    let config = *cb.config();
    let eta = config.spectral_efficiency();
    if eta > 16 {
        return Err(Error::InvalidParameter(format!(
            "candidate enumeration over eta = {eta} bits is intractable (max 16)"
        )));
    }
    if config.k > g.p {
        return Err(Error::InvalidParameter(format!(
            "analysis needs at least k = {} paths, grid has p = {}",
            config.k, g.p
        )));
    }
    let dist = effective_path_dist::<T>(g);
    let candidates = cb.candidates();
    let mut acc = T::zero();
    for (va, a) in candidates.iter().enumerate() {
        for (vb, b) in candidates.iter().enumerate().skip(va + 1) {
            let errors = count_bit_errors(&value_to_bits(va, eta), &value_to_bits(vb, eta))
                .expect("labels share length");
            let pep = pairwise_with_dist(a, b, g, &config, noise, &dist);
            // the pair formula is symmetric in (a, b)
            acc += pep * lit::<T>(2.0 * errors as f64);
        }
    }
    Ok(acc / (lit::<T>(eta as f64) * lit::<T>((1u64 << eta) as f64)))
}

/// Natural-log factorial table for exact binomial ratios at grid scale.
struct LnFactorials<T> {
    table: Vec<T>,
}

impl<T: Real> LnFactorials<T> {
    fn up_to(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        table.push(acc);
        for i in 1..=n {
            acc += lit::<T>(i as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    /// `ln C(n, k)`, or `None` when the coefficient is zero.
    fn ln_binom(&self, n: usize, k: isize) -> Option<T> {
        if k < 0 || k as usize > n {
            return None;
        }
        let k = k as usize;
        Some(self.table[n] - self.table[k] - self.table[n - k])
    }
}
