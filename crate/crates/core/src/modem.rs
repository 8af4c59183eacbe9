//! Index-modulation bit mapping over beams, constellations, sensing symbol
//! generation, and maximum-likelihood detection.
//!
//! A message of `eta` bits selects one of the stored activation patterns
//! (`n_c` of `k` beams) with the leading bits and fills the active beams
//! with Gray-labeled constellation points using the rest. The sensing chain
//! activates exactly one of `w` scanning beams per use, drawn from the
//! configured probabilities.

use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::scalar::{lit, Real};
use num_complex::Complex;
use rand::Rng;
use std::sync::OnceLock;

/// Constellation family carried on the active beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulationKind {
    Psk,
    Qam,
}

/// Index-modulation configuration: `n_c` of `k` beams active, `m`-ary
/// constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImConfig {
    pub k: usize,
    pub n_c: usize,
    pub m: usize,
    pub kind: ModulationKind,
}

impl ImConfig {
    pub fn new(k: usize, n_c: usize, m: usize, kind: ModulationKind) -> Result<Self> {
        if k == 0 || n_c == 0 || n_c > k {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= n_c <= k, got n_c = {n_c}, k = {k}"
            )));
        }
        if k > 64 {
            return Err(Error::InvalidParameter(format!(
                "beam count {k} too large for pattern enumeration"
            )));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "constellation order {m} must be a power of two >= 2"
            )));
        }
        if kind == ModulationKind::Qam && floor_log2(m as u128) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "square QAM requires an even number of bits per symbol, got order {m}"
            )));
        }
        let cfg = Self { k, n_c, m, kind };
        if cfg.index_bits() > 20 {
            return Err(Error::InvalidParameter(format!(
                "pattern table with {} index bits is too large",
                cfg.index_bits()
            )));
        }
        Ok(cfg)
    }

    /// Bits carried by the choice of activation pattern.
    pub fn index_bits(&self) -> usize {
        floor_log2(binomial(self.k, self.n_c))
    }

    /// Bits carried by the constellation points.
    pub fn symbol_bits(&self) -> usize {
        self.n_c * self.bits_per_symbol()
    }

    pub fn bits_per_symbol(&self) -> usize {
        floor_log2(self.m as u128)
    }

    /// Spectral efficiency in bits per channel use.
    pub fn spectral_efficiency(&self) -> usize {
        self.symbol_bits() + self.index_bits()
    }

    /// Fraction of beams active on average, `n_c / k`; this is the
    /// per-beam second moment of the transmitted vector.
    pub fn activation_ratio<T: Real>(&self) -> T {
        lit(self.n_c as f64 / self.k as f64)
    }
}

/// Spectral efficiency of a configuration, in bits per channel use.
pub fn spectral_efficiency(config: &ImConfig) -> usize {
    config.spectral_efficiency()
}

/// Pattern table, constellation, and bit labeling for one configuration.
///
/// Patterns are the first `2^index_bits` strictly-increasing `n_c`-subsets
/// of `0..k` in lexicographic order; a pattern's bit label is its position.
#[derive(Debug)]
pub struct ImCodebook<T> {
    config: ImConfig,
    patterns: Vec<Vec<usize>>,
    constellation: Vec<Complex<T>>,
    candidates: OnceLock<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> ImCodebook<T> {
    pub fn new(config: ImConfig) -> Result<Self> {
        ImConfig::new(config.k, config.n_c, config.m, config.kind)?;
        let count = 1usize << config.index_bits();
        Ok(Self {
            config,
            patterns: first_combinations(config.k, config.n_c, count),
            constellation: constellation(config.m, config.kind),
            candidates: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &ImConfig {
        &self.config
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    pub fn constellation(&self) -> &[Complex<T>] {
        &self.constellation
    }

    /// Map `eta` bits to the `k`-dimensional transmit vector: leading bits
    /// pick the pattern, the rest fill constellation points onto the active
    /// beams in ascending index order. Inactive beams are exactly zero.
    pub fn modulate(&self, bits: &[bool]) -> Result<Vec<Complex<T>>> {
        let eta = self.config.spectral_efficiency();
        if bits.len() != eta {
            return Err(Error::LengthMismatch {
                expected: eta,
                got: bits.len(),
            });
        }
        let idx_bits = self.config.index_bits();
        let bps = self.config.bits_per_symbol();
        let pattern = &self.patterns[bits_to_value(&bits[..idx_bits])];
        let mut x = vec![Complex::new(T::zero(), T::zero()); self.config.k];
        for (slot, &beam) in pattern.iter().enumerate() {
            let lo = idx_bits + slot * bps;
            x[beam] = self.constellation[bits_to_value(&bits[lo..lo + bps])];
        }
        Ok(x)
    }

    /// Maximum-likelihood detection: the candidate closest to `x` in
    /// Euclidean distance wins, ties broken by smallest bit label.
    pub fn demodulate_ml(&self, x: &[Complex<T>]) -> Vec<bool> {
        let eta = self.config.spectral_efficiency();
        let mut best = 0usize;
        let mut best_dist = T::infinity();
        for (label, cand) in self.candidates().iter().enumerate() {
            let mut dist = T::zero();
            for (a, b) in x.iter().zip(cand) {
                dist += (*a - *b).norm_sqr();
            }
            if dist < best_dist {
                best_dist = dist;
                best = label;
            }
        }
        value_to_bits(best, eta)
    }

    /// All `2^eta` modulated candidates, indexed by bit-label value.
    pub fn candidates(&self) -> &[Vec<Complex<T>>] {
        self.candidates.get_or_init(|| {
            let eta = self.config.spectral_efficiency();
            (0..1usize << eta)
                .map(|v| self.modulate(&value_to_bits(v, eta)).expect("label in range"))
                .collect()
        })
    }
}

/// Sensing beam schedule: `w` scanning directions given as 1-based DFT
/// codeword indices, desired per-direction amplitudes `t`, activation
/// probabilities `d`, and the average radiated sensing power `t_r`.
///
/// `w = 0` is the degenerate communication-only configuration; all vectors
/// are then empty and `t_r` must be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingSpec<T> {
    pub w: usize,
    pub codeword_indices: Vec<usize>,
    pub t: Vec<T>,
    pub d: Vec<T>,
    pub t_r: T,
}

impl<T: Real> SensingSpec<T> {
    pub fn new(codeword_indices: Vec<usize>, t: Vec<T>, d: Vec<T>, t_r: T) -> Result<Self> {
        let w = codeword_indices.len();
        if t.len() != w || d.len() != w {
            return Err(Error::InvalidParameter(format!(
                "sensing vectors must all have length {w}"
            )));
        }
        for (i, &ix) in codeword_indices.iter().enumerate() {
            if ix == 0 {
                return Err(Error::InvalidParameter(
                    "codeword indices are 1-based".into(),
                ));
            }
            if codeword_indices[..i].contains(&ix) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate sensing codeword index {ix}"
                )));
            }
        }
        if t.iter().any(|&v| v < T::zero()) || d.iter().any(|&v| v < T::zero()) {
            return Err(Error::InvalidParameter(
                "sensing amplitudes and probabilities must be nonnegative".into(),
            ));
        }
        let tol = lit::<T>(1e-9).max(T::epsilon() * lit(64.0));
        if w == 0 {
            if t_r != T::zero() {
                return Err(Error::InvalidParameter(
                    "average sensing power must be zero without sensing beams".into(),
                ));
            }
        } else {
            let d_sum = d.iter().fold(T::zero(), |a, &v| a + v);
            if (d_sum - T::one()).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "activation probabilities sum to {d_sum}, expected 1"
                )));
            }
            let power = d
                .iter()
                .zip(&t)
                .fold(T::zero(), |a, (&di, &ti)| a + di * ti * ti);
            if (power - t_r).abs() > tol * (T::one() + t_r.abs()) {
                return Err(Error::InvalidParameter(format!(
                    "desired beampattern carries power {power}, expected {t_r}"
                )));
            }
        }
        Ok(Self {
            w,
            codeword_indices,
            t,
            d,
            t_r,
        })
    }

    /// Uniform scanning over `w` directions at indices `omega`, with the
    /// flat desired beampattern `t = sqrt(t_r) * 1`.
    pub fn uniform(omega: Vec<usize>, t_r: T) -> Result<Self> {
        let w = omega.len();
        if w == 0 {
            return Self::new(omega, vec![], vec![], T::zero());
        }
        let d = vec![T::one() / lit(w as f64); w];
        // t_i = sqrt(t_r) makes sum_i d_i t_i^2 = t_r
        let t = vec![t_r.sqrt(); w];
        Self::new(omega, t, d, t_r)
    }
}

/// Draw the one-hot sensing symbol: entry `i` is active with probability
/// `d[i]`.
pub fn draw_sensing_symbol<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    spec: &SensingSpec<T>,
) -> Vec<T> {
    let mut x = vec![T::zero(); spec.w];
    if spec.w == 0 {
        return x;
    }
    let u = T::unit_uniform(rng);
    let mut cum = T::zero();
    let mut chosen = spec.w - 1;
    for (i, &di) in spec.d.iter().enumerate() {
        cum += di;
        if u < cum {
            chosen = i;
            break;
        }
    }
    x[chosen] = T::one();
    x
}

/// Hamming distance between two equal-length bit vectors.
pub fn count_bit_errors(sent: &[bool], detected: &[bool]) -> Result<usize> {
    if sent.len() != detected.len() {
        return Err(Error::LengthMismatch {
            expected: sent.len(),
            got: detected.len(),
        });
    }
    Ok(sent
        .iter()
        .zip(detected)
        .filter(|(a, b)| a != b)
        .count())
}

/// Interpret bits as a big-endian unsigned value.
pub fn bits_to_value(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Expand a value into `n` big-endian bits.
pub fn value_to_bits(value: usize, n: usize) -> Vec<bool> {
    (0..n).rev().map(|i| (value >> i) & 1 == 1).collect()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
    }
    result
}

fn floor_log2(v: u128) -> usize {
    if v <= 1 {
        0
    } else {
        (127 - v.leading_zeros()) as usize
    }
}

/// First `count` strictly-increasing `k`-subsets of `0..n` in lexicographic
/// order.
fn first_combinations(n: usize, k: usize, count: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        out.push(combo.clone());
        if out.len() == count {
            return out;
        }
        // advance to the next combination
        let mut i = k;
        loop {
            assert!(i > 0, "ran out of combinations before count");
            i -= 1;
            if combo[i] != i + n - k {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

fn gray(v: usize) -> usize {
    v ^ (v >> 1)
}

/// Gray-labeled constellation with unit average energy, indexed by symbol
/// bit value.
fn constellation<T: Real>(m: usize, kind: ModulationKind) -> Vec<Complex<T>> {
    match kind {
        ModulationKind::Psk => {
            let mut points = vec![Complex::new(T::zero(), T::zero()); m];
            let step = lit::<T>(2.0) * T::PI() / lit::<T>(m as f64);
            for position in 0..m {
                points[gray(position)] =
                    Complex::from_polar(T::one(), step * lit::<T>(position as f64));
            }
            points
        }
        ModulationKind::Qam => {
            let half_bits = floor_log2(m as u128) / 2;
            let levels = 1usize << half_bits;
            let mut axis = vec![T::zero(); levels];
            for position in 0..levels {
                axis[gray(position)] = lit::<T>(2.0 * position as f64 - (levels as f64 - 1.0));
            }
            let norm = lit::<T>(2.0 * (m as f64 - 1.0) / 3.0).sqrt();
            (0..m)
                .map(|v| {
                    let i_part = axis[v >> half_bits] / norm;
                    let q_part = axis[v & (levels - 1)] / norm;
                    Complex::new(i_part, q_part)
                })
                .collect()
        }
    }
}

/// Average energy of the transmitted vector over uniform messages equals
/// `n_c` (each active beam carries a unit-energy point).
pub fn average_transmit_energy<T: Real>(cb: &ImCodebook<T>) -> T {
    let total = cb
        .candidates()
        .iter()
        .fold(T::zero(), |acc, c| acc + norm_sq(c));
    total / lit(cb.candidates().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qam4() -> ImConfig {
        ImConfig::new(4, 3, 4, ModulationKind::Qam).unwrap()
    }

    #[test]
    fn spectral_efficiency_examples() {
        assert_eq!(qam4().spectral_efficiency(), 8);
        let bpsk = ImConfig::new(1, 1, 2, ModulationKind::Psk).unwrap();
        assert_eq!(bpsk.spectral_efficiency(), 1);
        let pairs = ImConfig::new(4, 2, 4, ModulationKind::Qam).unwrap();
        assert_eq!(pairs.spectral_efficiency(), 6);
    }

    #[test]
    fn patterns_for_three_of_four() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        assert_eq!(
            cb.patterns(),
            &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
    }

    #[test]
    fn patterns_for_two_of_four_keep_first_four() {
        let cfg = ImConfig::new(4, 2, 4, ModulationKind::Qam).unwrap();
        let cb = ImCodebook::<f64>::new(cfg).unwrap();
        assert_eq!(cb.patterns().len(), 4);
        assert_eq!(
            cb.patterns(),
            &[vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2]]
        );
    }

    #[test]
    fn qam4_points() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for p in cb.constellation() {
            assert!((p.re.abs() - s).abs() < 1e-15);
            assert!((p.im.abs() - s).abs() < 1e-15);
        }
        let avg: f64 = cb.constellation().iter().map(|p| p.norm_sqr()).sum::<f64>() / 4.0;
        assert!((avg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constellations_have_unit_average_energy() {
        for (m, kind) in [
            (2, ModulationKind::Psk),
            (8, ModulationKind::Psk),
            (4, ModulationKind::Qam),
            (16, ModulationKind::Qam),
            (64, ModulationKind::Qam),
        ] {
            let c = constellation::<f64>(m, kind);
            let avg: f64 = c.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((avg - 1.0).abs() < 1e-12, "order {m}: avg energy {avg}");
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        let m = 16;
        let c = constellation::<f64>(m, ModulationKind::Psk);
        for pos in 0..m {
            let a = c
                .iter()
                .position(|p| (*p - c[gray(pos)]).norm() < 1e-12)
                .unwrap();
            let b = gray((pos + 1) % m);
            assert_eq!((a ^ b).count_ones(), 1);
        }
    }

    #[test]
    fn modulate_first_message() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        let x = cb.modulate(&vec![false; 8]).unwrap();
        let p0 = cb.constellation()[0];
        assert_eq!(x[0], p0);
        assert_eq!(x[1], p0);
        assert_eq!(x[2], p0);
        assert_eq!(x[3], Complex::new(0.0, 0.0));
    }

    #[test]
    fn modulate_rejects_wrong_length() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        assert_eq!(
            cb.modulate(&[true; 7]),
            Err(Error::LengthMismatch {
                expected: 8,
                got: 7
            })
        );
    }

    #[test]
    fn every_candidate_has_nc_active_constellation_points() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        for cand in cb.candidates() {
            let active: Vec<&Complex<f64>> =
                cand.iter().filter(|z| z.norm_sqr() > 0.0).collect();
            assert_eq!(active.len(), 3);
            for z in active {
                assert!(cb
                    .constellation()
                    .iter()
                    .any(|p| (*p - *z).norm() < 1e-15));
            }
        }
    }

    #[test]
    fn modulation_is_injective_and_roundtrips() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        let cands = cb.candidates();
        for (i, a) in cands.iter().enumerate() {
            for b in cands.iter().skip(i + 1) {
                assert_ne!(a, b);
            }
        }
        for v in 0..cands.len() {
            let bits = value_to_bits(v, 8);
            let x = cb.modulate(&bits).unwrap();
            assert_eq!(cb.demodulate_ml(&x), bits);
        }
    }

    #[test]
    fn ml_detector_tolerates_small_perturbations() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        let bits = value_to_bits(0b1011_0010, 8);
        let mut x = cb.modulate(&bits).unwrap();
        x[0] += Complex::new(1e-3, -2e-3);
        x[3] += Complex::new(-1e-3, 1e-3);
        assert_eq!(cb.demodulate_ml(&x), bits);
    }

    #[test]
    fn ml_matches_brute_force_on_tiny_config() {
        let cfg = ImConfig::new(2, 1, 2, ModulationKind::Psk).unwrap();
        let cb = ImCodebook::<f64>::new(cfg).unwrap();
        assert_eq!(cb.config().spectral_efficiency(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let x = vec![
                crate::scalar::complex_normal::<f64, _>(&mut rng),
                crate::scalar::complex_normal::<f64, _>(&mut rng),
            ];
            // hand-rolled search over the four labels
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for v in 0..4 {
                let cand = cb.modulate(&value_to_bits(v, 2)).unwrap();
                let d: f64 = x
                    .iter()
                    .zip(&cand)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = v;
                }
            }
            assert_eq!(cb.demodulate_ml(&x), value_to_bits(best, 2));
        }
    }

    #[test]
    fn empirical_covariance_matches_activation_ratio() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let trials = 100_000;
        let mut diag = [0.0f64; 4];
        let mut off = Complex::new(0.0, 0.0);
        for _ in 0..trials {
            let bits: Vec<bool> = (0..8).map(|_| rng.gen::<bool>()).collect();
            let x = cb.modulate(&bits).unwrap();
            for i in 0..4 {
                diag[i] += x[i].norm_sqr();
            }
            off += x[0] * x[1].conj();
        }
        for d in diag {
            let v = d / trials as f64;
            assert!((v - 0.75).abs() < 0.02, "diag {v}, expected 0.75");
        }
        assert!((off / trials as f64).norm() < 0.02);
    }

    #[test]
    fn average_energy_equals_active_beams() {
        let cb = ImCodebook::<f64>::new(qam4()).unwrap();
        assert!((average_transmit_energy(&cb) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sensing_symbol_degenerate_probability() {
        let spec = SensingSpec::new(vec![5, 6, 7], vec![1.0, 1.0, 1.0], vec![1.0, 0.0, 0.0], 1.0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let x = draw_sensing_symbol(&mut rng, &spec);
            assert_eq!(x, vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn sensing_symbol_frequencies_and_norm() {
        let spec = SensingSpec::uniform(vec![11, 12, 13], 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let trials = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            let x = draw_sensing_symbol(&mut rng, &spec);
            let sq: f64 = x.iter().map(|v| v * v).sum();
            assert_eq!(sq, 1.0);
            counts[x.iter().position(|&v| v == 1.0).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / trials as f64;
            assert!((f - 1.0 / 3.0).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn sensing_spec_validates_power() {
        let err = SensingSpec::new(
            vec![1, 2],
            vec![1.0, 1.0],
            vec![0.5, 0.5],
            5.0, // actual power is 1.0
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn empty_sensing_spec_is_allowed() {
        let spec = SensingSpec::<f64>::uniform(vec![], 0.0).unwrap();
        assert_eq!(spec.w, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(draw_sensing_symbol(&mut rng, &spec).is_empty());
    }

    #[test]
    fn bit_error_counting() {
        assert_eq!(count_bit_errors(&[true; 8], &[true; 8]).unwrap(), 0);
        assert_eq!(count_bit_errors(&[true; 8], &[false; 8]).unwrap(), 8);
        let a = [true, false, true, true, false];
        let b = [true, false, false, true, true];
        assert_eq!(count_bit_errors(&a, &b).unwrap(), 2);
        assert!(count_bit_errors(&a, &b[..4]).is_err());
    }
}
