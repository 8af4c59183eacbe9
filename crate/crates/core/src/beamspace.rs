//! Array geometry, steering vectors, DFT beam codebooks, and random
//! multipath channel generation.
//!
//! Both link ends use half-wavelength uniform linear arrays, so a steering
//! vector is a pure phase ramp across elements and the `N` DFT codewords form
//! an orthonormal beam basis. Channels follow the narrow-band
//! Saleh-Valenzuela model: a handful of planar paths, each with a complex
//! normal gain and azimuth angles of departure/arrival. In the on-grid
//! variant every path sits on a distinct (receive beam, transmit beam) cell,
//! which is the regime the analytic error model counts over.

use crate::error::{Error, Result};
use crate::linalg::{hdot, CMat};
use crate::scalar::{complex_normal, lit, Real};
use num_complex::Complex;
use rand::Rng;

/// Antenna counts at the two link ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    pub n_t: usize,
    pub n_r: usize,
}

impl ArrayGeometry {
    pub fn new(n_t: usize, n_r: usize) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::InvalidParameter(
                "antenna counts must be at least 1".into(),
            ));
        }
        Ok(Self { n_t, n_r })
    }

    /// Number of beamspace cells (receive beams x transmit beams).
    pub fn cells(&self) -> usize {
        self.n_t * self.n_r
    }
}

/// One propagation path: complex gain plus azimuth angles in
/// `[-pi/2, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams<T> {
    pub gain: Complex<T>,
    pub aod: T,
    pub aoa: T,
}

/// A sampled channel matrix together with the paths that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    /// `n_r x n_t` channel matrix.
    pub matrix: CMat<T>,
    pub paths: Vec<PathParams<T>>,
    pub on_grid: bool,
}

impl<T: Real> ChannelRealization<T> {
    /// Assemble the channel matrix from explicit paths with the
    /// `sqrt(n_t * n_r / P)` normalization, so the ensemble-average squared
    /// Frobenius norm is `n_t * n_r` for unit-variance gains.
    pub fn from_paths(geom: ArrayGeometry, paths: Vec<PathParams<T>>, on_grid: bool) -> Self {
        assert!(!paths.is_empty(), "a channel needs at least one path");
        let scale = lit::<T>((geom.n_t * geom.n_r) as f64 / paths.len() as f64).sqrt();
        let mut matrix = CMat::zeros(geom.n_r, geom.n_t);
        for path in &paths {
            let ar = steering_vector(path.aoa, geom.n_r);
            let at = steering_vector(path.aod, geom.n_t);
            let g = path.gain.scale(scale);
            for m in 0..geom.n_r {
                let row_factor = g * ar[m];
                for n in 0..geom.n_t {
                    matrix[(m, n)] = matrix[(m, n)] + row_factor * at[n].conj();
                }
            }
        }
        Self {
            matrix,
            paths,
            on_grid,
        }
    }

    pub fn geometry(&self) -> ArrayGeometry {
        ArrayGeometry {
            n_t: self.matrix.cols(),
            n_r: self.matrix.rows(),
        }
    }
}

/// Unit-norm steering vector of an `n`-element half-wavelength ULA:
/// element `m` is `exp(-j pi m sin(theta)) / sqrt(n)`.
pub fn steering_vector<T: Real>(theta: T, n: usize) -> Vec<Complex<T>> {
    assert!(n >= 1);
    let amp = (T::one() / lit::<T>(n as f64)).sqrt();
    let step = -T::PI() * theta.sin();
    (0..n)
        .map(|m| Complex::from_polar(amp, step * lit::<T>(m as f64)))
        .collect()
}

/// Orthonormal DFT beam codebook of an `n`-element array.
///
/// Codewords use 1-based indices to match the usual `f(i)` notation;
/// codeword `i` has element `m` equal to `exp(j 2 pi m (i-1) / n) / sqrt(n)`
/// and steers to the grid direction returned by [`Codebook::grid_sin`].
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    codewords: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Codebook<T> {
    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    /// Codeword by 1-based index.
    pub fn codeword(&self, index: usize) -> &[Complex<T>] {
        assert!(
            index >= 1 && index <= self.codewords.len(),
            "codeword index {index} out of range 1..={}",
            self.codewords.len()
        );
        &self.codewords[index - 1]
    }

    /// Sine of the grid direction codeword `index` steers to, in `[-1, 1)`.
    ///
    /// The codeword phase progression `+2 pi (i-1)/N` equals the steering
    /// ramp `-pi sin(theta)` when `sin(theta) = -2(i-1)/N` modulo 2, wrapped
    /// into `[-1, 1)`.
    pub fn grid_sin(&self, index: usize) -> T {
        assert!(index >= 1 && index <= self.codewords.len());
        let n = self.codewords.len() as f64;
        let mut s = -2.0 * (index as f64 - 1.0) / n;
        if s < -1.0 {
            s += 2.0;
        }
        lit(s)
    }

    /// Grid direction of codeword `index`, in `[-pi/2, pi/2)`.
    pub fn grid_angle(&self, index: usize) -> T {
        self.grid_sin(index).asin()
    }

    /// Stack the codewords at `indices` (1-based) as matrix columns.
    pub fn columns(&self, indices: &[usize]) -> CMat<T> {
        let n = self.codewords.first().map_or(0, Vec::len);
        let cols: Vec<Vec<Complex<T>>> = indices
            .iter()
            .map(|&i| self.codeword(i).to_vec())
            .collect();
        CMat::from_cols(n, &cols)
    }

    /// All codewords as the columns of an `n x n` matrix.
    pub fn as_matrix(&self) -> CMat<T> {
        CMat::from_cols(self.codewords.len(), &self.codewords)
    }
}

/// Build the `n`-codeword DFT codebook.
pub fn dft_codebook<T: Real>(n: usize) -> Codebook<T> {
    assert!(n >= 1);
    let amp = (T::one() / lit::<T>(n as f64)).sqrt();
    let base = lit::<T>(2.0) * T::PI() / lit::<T>(n as f64);
    let codewords = (1..=n)
        .map(|i| {
            let step = base * lit::<T>((i - 1) as f64);
            (0..n)
                .map(|m| Complex::from_polar(amp, step * lit::<T>(m as f64)))
                .collect()
        })
        .collect();
    Codebook { codewords }
}

/// Draw a random channel with `p` paths.
///
/// Gains are i.i.d. circularly-symmetric complex normal with unit variance.
/// Off-grid, angles are uniform on `[-pi/2, pi/2)`. On-grid, the paths
/// occupy `p` distinct cells drawn uniformly from the `n_r x n_t` beamspace
/// grid, with angles set to the corresponding codeword directions.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    geom: ArrayGeometry,
    p: usize,
    on_grid: bool,
) -> Result<ChannelRealization<T>> {
    if p == 0 {
        return Err(Error::InvalidParameter("path count must be positive".into()));
    }
    let paths = if on_grid {
        if p > geom.cells() {
            return Err(Error::ImpossiblePlacement {
                paths: p,
                cells: geom.cells(),
            });
        }
        let tx_cb = dft_codebook::<T>(geom.n_t);
        let rx_cb = dft_codebook::<T>(geom.n_r);
        let cells = rand::seq::index::sample(rng, geom.cells(), p);
        cells
            .iter()
            .map(|cell| {
                let rx = cell / geom.n_t + 1;
                let tx = cell % geom.n_t + 1;
                PathParams {
                    gain: complex_normal(rng),
                    aod: tx_cb.grid_angle(tx),
                    aoa: rx_cb.grid_angle(rx),
                }
            })
            .collect()
    } else {
        (0..p)
            .map(|_| PathParams {
                gain: complex_normal(rng),
                aod: (T::unit_uniform(rng) - lit(0.5)) * T::PI(),
                aoa: (T::unit_uniform(rng) - lit(0.5)) * T::PI(),
            })
            .collect()
    };
    Ok(ChannelRealization::from_paths(geom, paths, on_grid))
}

/// Beamspace image of the channel: entry `(m, n)` is
/// `f_r(m+1)^H H f_t(n+1)`.
pub fn to_beamspace<T: Real>(
    h: &ChannelRealization<T>,
    rx_cb: &Codebook<T>,
    tx_cb: &Codebook<T>,
) -> CMat<T> {
    assert_eq!(rx_cb.size(), h.matrix.rows(), "receive codebook size mismatch");
    assert_eq!(tx_cb.size(), h.matrix.cols(), "transmit codebook size mismatch");
    rx_cb
        .as_matrix()
        .adjoint()
        .mul(&h.matrix)
        .mul(&tx_cb.as_matrix())
}

/// Magnitude of the beamspace cell `(rx, tx)` (1-based codeword indices).
pub fn beamspace_cell<T: Real>(
    h: &ChannelRealization<T>,
    rx_cb: &Codebook<T>,
    tx_cb: &Codebook<T>,
    rx: usize,
    tx: usize,
) -> T {
    hdot(rx_cb.codeword(rx), &h.matrix.mul_vec(tx_cb.codeword(tx))).norm()
}
