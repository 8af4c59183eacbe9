//! Experiment configuration: a single JSON document with defaults matching
//! the reference setup (32-antenna arrays, 8 paths, 4 beams with 3 active,
//! 4-QAM, three sensing directions at codewords 11-13 sharing 5 units of
//! average power, 20 candidate pairs, convergence tolerance 1e-3).

use bpm_isac_core::allocation::SolverOptions;
use bpm_isac_core::beamspace::{dft_codebook, ArrayGeometry};
use bpm_isac_core::modem::{ImCodebook, ImConfig, ModulationKind, SensingSpec};
use bpm_isac_core::{Codebook64, Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Index-modulated communication beams plus scanning sensing beams.
    Bpm,
    /// Plain variant: all beams carry symbols, no index bits.
    Pbpm,
    /// Communication-only baseline: no sensing beams at all.
    Gbm,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Bpm => "bpm",
            Scheme::Pbpm => "pbpm",
            Scheme::Gbm => "gbm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bpm" => Ok(Scheme::Bpm),
            "pbpm" => Ok(Scheme::Pbpm),
            "gbm" => Ok(Scheme::Gbm),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme '{other}' (expected bpm, pbpm, or gbm)"
            ))),
        }
    }
}

/// How the digital stage is set per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DigitalMode {
    /// Full alternating optimization.
    Optimized,
    /// One feasibility projection of the sensing amplitudes, nothing else.
    Projected,
    /// Desired amplitudes as-is with the baseline combiner.
    Raw,
}

impl DigitalMode {
    pub fn suffix(&self) -> &'static str {
        match self {
            DigitalMode::Optimized => "",
            DigitalMode::Projected => "-unopt",
            DigitalMode::Raw => "-raw",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometrySection {
    pub n_t: usize,
    pub n_r: usize,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { n_t: 32, n_r: 32 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelSection {
    pub paths: usize,
    pub on_grid: bool,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            paths: 8,
            on_grid: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ImSection {
    pub k: usize,
    pub n_c: usize,
    pub m: usize,
    pub kind: String,
}

impl Default for ImSection {
    fn default() -> Self {
        Self {
            k: 4,
            n_c: 3,
            m: 4,
            kind: "qam".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SensingSection {
    pub codeword_indices: Vec<usize>,
    pub t_r: f64,
    /// Activation probabilities; uniform when omitted.
    pub d: Option<Vec<f64>>,
    /// Desired per-direction amplitudes; flat at `sqrt(t_r)` when omitted.
    pub t: Option<Vec<f64>>,
}

impl Default for SensingSection {
    fn default() -> Self {
        Self {
            codeword_indices: vec![11, 12, 13],
            t_r: 5.0,
            d: None,
            t: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionSection {
    pub l: usize,
}

impl Default for SelectionSection {
    fn default() -> Self {
        Self { l: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSection {
    pub mu: f64,
    pub convergence_tol: f64,
    pub max_iterations: usize,
    pub kkt_tol: f64,
    pub bisection_tol: f64,
    pub mode: DigitalMode,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            mu: 0.5,
            convergence_tol: 1e-3,
            max_iterations: 200,
            kkt_tol: 1e-8,
            bisection_tol: 1e-10,
            mode: DigitalMode::Optimized,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub geometry: GeometrySection,
    pub channel: ChannelSection,
    pub im: ImSection,
    pub sensing: SensingSection,
    pub selection: SelectionSection,
    pub optimizer: OptimizerSection,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub symbols_per_channel: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySection::default(),
            channel: ChannelSection::default(),
            im: ImSection::default(),
            sensing: SensingSection::default(),
            selection: SelectionSection::default(),
            optimizer: OptimizerSection::default(),
            snr_grid_db: (-2..=6).map(|s| (2 * s) as f64).collect(),
            trials: 50,
            symbols_per_channel: 500,
            seed: 1,
            scheme: Scheme::Bpm,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {path:?}: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("cannot parse {path:?}: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn modulation_kind(&self) -> Result<ModulationKind> {
        match self.im.kind.as_str() {
            "qam" => Ok(ModulationKind::Qam),
            "psk" => Ok(ModulationKind::Psk),
            other => Err(Error::InvalidParameter(format!(
                "unknown modulation kind '{other}' (expected qam or psk)"
            ))),
        }
    }

    /// Index-modulation configuration after applying the scheme: the plain
    /// variant activates every beam (no index bits), the others use the
    /// configured split.
    pub fn im_config(&self) -> Result<ImConfig> {
        let kind = self.modulation_kind()?;
        let n_c = match self.scheme {
            Scheme::Pbpm => self.im.k,
            _ => self.im.n_c,
        };
        ImConfig::new(self.im.k, n_c, self.im.m, kind)
    }

    /// Sensing schedule after applying the scheme: the communication-only
    /// baseline drops all sensing beams.
    pub fn sensing_spec(&self) -> Result<SensingSpec<f64>> {
        if self.scheme == Scheme::Gbm {
            return SensingSpec::uniform(vec![], 0.0);
        }
        let idx = self.sensing.codeword_indices.clone();
        let w = idx.len();
        let d = self
            .sensing
            .d
            .clone()
            .unwrap_or_else(|| vec![1.0 / w.max(1) as f64; w]);
        let t = self
            .sensing
            .t
            .clone()
            .unwrap_or_else(|| vec![self.sensing.t_r.sqrt(); w]);
        SensingSpec::new(idx, t, d, self.sensing.t_r)
    }

    pub fn solver_options(&self) -> SolverOptions<f64> {
        SolverOptions {
            convergence_tol: self.optimizer.convergence_tol,
            max_iterations: self.optimizer.max_iterations,
            kkt_tol: self.optimizer.kkt_tol,
            bisection_tol: self.optimizer.bisection_tol,
        }
    }

    /// Noise variance at a per-bit SNR point: `n_c / (eta * snr_linear)`,
    /// using the scheme's own spectral efficiency.
    pub fn sigma2_at(&self, snr_db: f64) -> Result<f64> {
        let im = self.im_config()?;
        let snr = 10f64.powf(snr_db / 10.0);
        Ok(im.n_c as f64 / (im.spectral_efficiency() as f64 * snr))
    }

    /// Validate and freeze everything a sweep needs.
    pub fn context(&self) -> Result<LinkContext> {
        let geom = ArrayGeometry::new(self.geometry.n_t, self.geometry.n_r)?;
        let im_config = self.im_config()?;
        let sensing = self.sensing_spec()?;
        if self.channel.paths == 0 {
            return Err(Error::InvalidParameter("path count must be positive".into()));
        }
        if self.trials == 0 || self.symbols_per_channel == 0 {
            return Err(Error::InvalidParameter(
                "trials and symbols_per_channel must be positive".into(),
            ));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidParameter("empty SNR grid".into()));
        }
        if sensing.w >= geom.n_t {
            return Err(Error::InvalidParameter(
                "sensing beams must leave transmit codewords free".into(),
            ));
        }
        for &ix in &sensing.codeword_indices {
            if ix > geom.n_t {
                return Err(Error::InvalidParameter(format!(
                    "sensing codeword index {ix} outside 1..={}",
                    geom.n_t
                )));
            }
        }
        self.solver_options().validate()?;
        let im_codebook = ImCodebook::new(im_config)?;
        Ok(LinkContext {
            cfg: self.clone(),
            geom,
            tx_cb: dft_codebook(geom.n_t),
            rx_cb: dft_codebook(geom.n_r),
            im_config,
            im_codebook,
            sensing,
        })
    }
}

/// Frozen, validated experiment state shared by all trials of a run.
pub struct LinkContext {
    pub cfg: ExperimentConfig,
    pub geom: ArrayGeometry,
    pub tx_cb: Codebook64,
    pub rx_cb: Codebook64,
    pub im_config: ImConfig,
    pub im_codebook: ImCodebook<f64>,
    pub sensing: SensingSpec<f64>,
}
