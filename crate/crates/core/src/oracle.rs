//! Independent reference implementations used to validate the production
//! algorithms.
//!
//! These deliberately avoid the closed-form KKT paths used by the real
//! solvers: the subproblem oracles run plain projected gradient descent
//! (with Dykstra's alternating projections for the two-constraint sensing
//! step), and the selection oracle enumerates admissible pair subsets
//! directly. They are slow and only suitable for small validation runs.

use crate::beamspace::{to_beamspace, ChannelRealization, Codebook};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::modem::{ImConfig, SensingSpec};
use crate::precoding::{mse_threshold, EquivalentChannels, LinkNoise};
use crate::scalar::{lit, Real};

/// Reference solution of the sensing-amplitude subproblem by projected
/// gradient descent. Returns `None` when the budget is infeasible even at
/// zero sensing power.
pub fn b_step_reference<T: Real>(
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    p: &[T],
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
    gamma: T,
    iterations: usize,
) -> Option<Vec<T>> {
    // re-derive the quadratic MSE model with its own loops
    let wc = w_bb.mul(&eq.h_c);
    let k = wc.rows();
    let mut c0 = noise.sigma2 * w_bb.frob_sq();
    let mut fit = T::zero();
    for i in 0..k {
        for j in 0..k {
            let mut z = wc[(i, j)].scale(p[j]);
            if i == j {
                z.re -= T::one();
            }
            fit += z.norm_sqr();
        }
    }
    c0 += fit * lit::<T>(config.n_c as f64) / lit::<T>(config.k as f64);
    let wr = w_bb.mul(&eq.h_r);
    let g: Vec<T> = (0..spec.w)
        .map(|i| {
            let mut acc = T::zero();
            for r in 0..wr.rows() {
                acc += wr[(r, i)].norm_sqr();
            }
            spec.d[i] * acc
        })
        .collect();
    let budget = gamma - c0;
    if budget < -lit::<T>(1e-8) {
        return None;
    }
    let budget = budget.max(T::zero());
    if spec.w == 0 {
        return Some(vec![]);
    }

    let project = |mut b: Vec<T>| -> Vec<T> {
        // Dykstra's alternating projections onto the two ellipsoids
        let mut p1 = vec![T::zero(); spec.w];
        let mut p2 = vec![T::zero(); spec.w];
        for _ in 0..200 {
            let y1: Vec<T> = b.iter().zip(&p1).map(|(&x, &c)| x + c).collect();
            let z1 = project_ellipsoid(&y1, &g, budget);
            for i in 0..spec.w {
                p1[i] = y1[i] - z1[i];
            }
            let y2: Vec<T> = z1.iter().zip(&p2).map(|(&x, &c)| x + c).collect();
            let z2 = project_ellipsoid(&y2, &spec.d, spec.t_r);
            for i in 0..spec.w {
                p2[i] = y2[i] - z2[i];
            }
            b = z2;
        }
        b
    };

    let max_d = spec.d.iter().cloned().fold(T::zero(), T::max);
    let step = T::one() / (lit::<T>(2.0) * max_d.max(T::min_positive_value()));
    let mut b = project(vec![T::zero(); spec.w]);
    for _ in 0..iterations {
        let stepped: Vec<T> = b
            .iter()
            .zip(&spec.d)
            .zip(&spec.t)
            .map(|((&bi, &di), &ti)| bi - step * lit::<T>(2.0) * di * (bi - ti))
            .collect();
        let next = project(stepped);
        let moved = b
            .iter()
            .zip(&next)
            .fold(T::zero(), |acc, (&a, &c)| acc + (a - c) * (a - c));
        b = next;
        if moved < lit(1e-26) {
            break;
        }
    }
    Some(b)
}

/// Euclidean projection onto `{x : sum_i a_i x_i^2 <= r}` with `a_i >= 0`.
fn project_ellipsoid<T: Real>(y: &[T], a: &[T], r: T) -> Vec<T> {
    let load = y
        .iter()
        .zip(a)
        .fold(T::zero(), |acc, (&yi, &ai)| acc + ai * yi * yi);
    if load <= r {
        return y.to_vec();
    }
    // solve sum_i a_i (y_i / (1 + 2 beta a_i))^2 = r by bisection in beta
    let eval = |beta: T| -> T {
        y.iter().zip(a).fold(T::zero(), |acc, (&yi, &ai)| {
            let x = yi / (T::one() + lit::<T>(2.0) * beta * ai);
            acc + ai * x * x
        })
    };
    let mut hi = T::one();
    let mut grow = 0;
    while eval(hi) > r && grow < 500 {
        hi = hi * lit(2.0);
        grow += 1;
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if eval(mid) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    y.iter()
        .zip(a)
        .map(|(&yi, &ai)| yi / (T::one() + lit::<T>(2.0) * hi * ai))
        .collect()
}

/// Reference solution of the communication-amplitude subproblem by
/// projected gradient descent with a Euclidean ball projection.
pub fn p_step_reference<T: Real>(
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    config: &ImConfig,
    iterations: usize,
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
    let cap = lit::<T>(config.k as f64);
    let max_col = col_sq.iter().cloned().fold(T::zero(), T::max);
    let step = T::one() / (lit::<T>(2.0) * max_col.max(T::min_positive_value()));

    let project = |p: Vec<T>| -> Vec<T> {
        let power = p.iter().fold(T::zero(), |acc, &v| acc + v * v);
        if power <= cap {
            p
        } else {
            let s = (cap / power).sqrt();
            p.into_iter().map(|v| v * s).collect()
        }
    };

    let mut p = vec![T::zero(); k];
    for _ in 0..iterations {
        let stepped: Vec<T> = p
            .iter()
            .zip(&col_sq)
            .zip(&diag_re)
            .map(|((&pi, &cs), &dr)| pi - step * lit::<T>(2.0) * (cs * pi - dr))
            .collect();
        let next = project(stepped);
        let moved = p
            .iter()
            .zip(&next)
            .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
        p = next;
        if moved < lit(1e-28) {
            break;
        }
    }
    p
}

/// Objective of the sensing-amplitude subproblem.
pub fn sensing_objective_of<T: Real>(b: &[T], spec: &SensingSpec<T>) -> T {
    spec.d
        .iter()
        .zip(b)
        .zip(&spec.t)
        .fold(T::zero(), |acc, ((&d, &bi), &ti)| {
            acc + d * (bi - ti) * (bi - ti)
        })
}

/// Objective of the communication-amplitude subproblem.
pub fn comm_fit_objective_of<T: Real>(
    p: &[T],
    eq: &EquivalentChannels<T>,
    w_bb: &CMat<T>,
    config: &ImConfig,
) -> T {
    let a = w_bb.mul(&eq.h_c);
    let k = a.rows();
    let mut acc = T::zero();
    for i in 0..k {
        for j in 0..k {
            let mut z = a[(i, j)].scale(p[j]);
            if i == j {
                z.re -= T::one();
            }
            acc += z.norm_sqr();
        }
    }
    acc * lit::<T>(config.n_c as f64) / lit::<T>(config.k as f64)
}

/// Exhaustive min-MSE beam selection over every admissible pair subset.
/// Enumerates all (tx not in sensing set, rx) pairs directly, so it is only
/// usable on small arrays; returns the winning pairs and their MSE score.
pub fn exhaustive_selection<T: Real>(
    h: &ChannelRealization<T>,
    tx_cb: &Codebook<T>,
    rx_cb: &Codebook<T>,
    spec: &SensingSpec<T>,
    noise: &LinkNoise<T>,
    config: &ImConfig,
) -> Result<(Vec<(usize, usize)>, T)> {
    let gram = to_beamspace(h, rx_cb, tx_cb);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for tx in 1..=tx_cb.size() {
        if spec.codeword_indices.contains(&tx) {
            continue;
        }
        for rx in 1..=rx_cb.size() {
            pairs.push((tx, rx));
        }
    }

    let k = config.k;
    let mut best: Option<(T, Vec<(usize, usize)>)> = None;
    let mut stack: Vec<usize> = Vec::with_capacity(k);
    enumerate(&pairs, k, &mut stack, &mut |chosen: &[usize]| {
        let selected: Vec<(usize, usize)> = chosen.iter().map(|&i| pairs[i]).collect();
        let h_c = CMat::from_fn(k, k, |i, j| {
            gram[(selected[i].1 - 1, selected[j].0 - 1)]
        });
        let h_r = CMat::from_fn(k, spec.w, |i, l| {
            gram[(selected[i].1 - 1, spec.codeword_indices[l] - 1)]
        });
        let eq = EquivalentChannels { h_c, h_r };
        let chi = mse_threshold(&eq, spec, noise, config, T::one())?;
        if best.as_ref().is_none_or(|(b, _)| chi < *b) {
            best = Some((chi, selected));
        }
        Ok(())
    })?;
    let (chi, selected) = best.ok_or(Error::CandidateStarvation {
        needed: k,
        available: pairs.len(),
    })?;
    Ok((selected, chi))
}

fn enumerate<E>(
    pairs: &[(usize, usize)],
    k: usize,
    stack: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]) -> std::result::Result<(), E>,
) -> std::result::Result<(), E> {
    if stack.len() == k {
        return visit(stack);
    }
    let start = stack.last().map_or(0, |&i| i + 1);
    for i in start..pairs.len() {
        let (tx, rx) = pairs[i];
        if stack
            .iter()
            .any(|&j| pairs[j].0 == tx || pairs[j].1 == rx)
        {
            continue;
        }
        stack.push(i);
        enumerate(pairs, k, stack, visit)?;
        stack.pop();
    }
    Ok(())
}
