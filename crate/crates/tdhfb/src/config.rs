//! Run configuration: strict TOML with defaults for everything except the
//! grid and the potential.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::bogoliubov::{PairExcitation, DEFAULT_SERIES_TOL};
use crate::diagnostics::{sigma_for_beta, EstimateParams};
use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::initial::{gaussian_packet, quasifree, PacketRanges};
use crate::integrator::{Scheme, StepConfig};
use crate::potential::{Discretization, InteractionPotential, PotentialTable, Profile, TabulatedProfile};
use crate::snapshot::read_snapshot;

/// Minimum time samples per unit time for the spacetime-spectral verifiers.
pub const MIN_SAMPLES_PER_UNIT_TIME: f64 = 64.0;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_length: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Gaussian,
    Sech2,
    Tabulated,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationName {
    #[default]
    Sampled,
    BandLimited,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub profile: ProfileName,
    /// Two-column `x v(x)` file, relative to the config file.
    #[serde(default)]
    pub table: Option<PathBuf>,
    pub beta: f64,
    pub n: f64,
    #[serde(default)]
    pub discretization: DiscretizationName,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PairName {
    None,
    #[default]
    RankOne,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
    /// `k = c·u⊗u` with `u` the normalized condensate profile.
    pub pair: PairName,
    pub pair_strength: f64,
    /// Overrides the closed-form data when set.
    pub snapshot: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
            pair: PairName::RankOne,
            pair_strength: 0.3,
            snapshot: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    StrangIprk4,
    Picard,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub scheme: SchemeName,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub resym_every: usize,
    pub picard_iters: usize,
    pub picard_nodes: usize,
}

impl Default for StepperSection {
    fn default() -> Self {
        StepperSection {
            scheme: SchemeName::StrangIprk4,
            dt: 1e-3,
            t_final: 1.0,
            snapshot_stride: 8,
            resym_every: 16,
            picard_iters: 8,
            picard_nodes: 21,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatesSection {
    pub epsilon: f64,
    pub ensemble_size: usize,
    /// Number of packets per random kernel.
    pub rank: usize,
    /// Verifier window `[0, T]`.
    pub window: f64,
    pub time_samples: usize,
    pub center: [f64; 2],
    pub width: [f64; 2],
    pub momentum: [f64; 2],
}

impl Default for EstimatesSection {
    fn default() -> Self {
        EstimatesSection {
            epsilon: 0.1,
            ensemble_size: 50,
            rank: 2,
            window: 1.0,
            time_samples: 129,
            center: [-2.0, 2.0],
            width: [0.8, 1.6],
            momentum: [-1.0, 1.0],
        }
    }
}

impl EstimatesSection {
    pub fn packet_ranges(&self) -> PacketRanges {
        PacketRanges {
            center: self.center[0]..self.center[1],
            width: self.width[0]..self.width[1],
            momentum: self.momentum[0]..self.momentum[1],
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n_values: Vec<f64>,
    pub beta_values: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            n_values: vec![16.0, 64.0, 256.0],
            beta_values: vec![1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Snapshot,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv],
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: u64,
    grid: GridSection,
    potential: PotentialSection,
    #[serde(default)]
    initial: InitialSection,
    #[serde(default)]
    stepper: StepperSection,
    #[serde(default)]
    estimates: EstimatesSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    output: OutputSection,
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridSection,
    pub potential: PotentialSection,
    pub initial: InitialSection,
    pub stepper: StepperSection,
    pub estimates: EstimatesSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
    /// Hex sha256 of the config text.
    pub source_hash: String,
    /// Relative paths in the config resolve against this directory.
    pub base_dir: PathBuf,
    profile: Profile,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigValidation(msg.into())
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base)
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    RunConfig::validate(raw, hash, base_dir.to_path_buf())
}

impl RunConfig {
    fn validate(raw: RawConfig, source_hash: String, base_dir: PathBuf) -> Result<Self> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };

        let grid = SpatialGrid::new(raw.grid.half_length, raw.grid.points)?;

        let p = &raw.potential;
        let profile = match (p.profile, &p.table) {
            (ProfileName::Tabulated, Some(t)) => {
                let path = resolve(t);
                if !path.is_file() {
                    return Err(invalid(format!("potential.table {} does not exist", path.display())));
                }
                Profile::Tabulated(TabulatedProfile::from_file(&path)?)
            }
            (ProfileName::Tabulated, None) => return Err(invalid("potential.table is required for the tabulated profile")),
            (_, Some(_)) => return Err(invalid("potential.table is only allowed with profile = \"tabulated\"")),
            (ProfileName::Gaussian, None) => Profile::Gaussian,
            (ProfileName::Sech2, None) => Profile::Sech2,
        };

        let s = &raw.stepper;
        StepConfig::new(s.dt, s.t_final).validate().map_err(|e| invalid(format!("stepper: {e}")))?;
        for (name, v) in [("snapshot_stride", s.snapshot_stride), ("resym_every", s.resym_every)] {
            if v == 0 {
                return Err(invalid(format!("stepper.{name} must be at least 1")));
            }
        }
        if s.picard_nodes < 4 {
            return Err(invalid("stepper.picard_nodes must be at least 4"));
        }

        let e = &raw.estimates;
        if !(e.epsilon > 0.0 && e.epsilon < 0.2) {
            return Err(invalid(format!("estimates.epsilon must lie in (0, 1/5), got {}", e.epsilon)));
        }
        if e.ensemble_size == 0 || e.rank == 0 {
            return Err(invalid("estimates.ensemble_size and estimates.rank must be at least 1"));
        }
        if !(e.window > 0.0) {
            return Err(invalid("estimates.window must be positive"));
        }
        if ((e.time_samples.max(1) - 1) as f64) < MIN_SAMPLES_PER_UNIT_TIME * e.window {
            return Err(invalid(format!(
                "estimates.time_samples = {} is below {} per unit time over a window of {}",
                e.time_samples, MIN_SAMPLES_PER_UNIT_TIME, e.window
            )));
        }
        for (name, r) in [("center", e.center), ("width", e.width), ("momentum", e.momentum)] {
            if !(r[0] < r[1]) {
                return Err(invalid(format!("estimates.{name} must be an increasing pair")));
            }
        }
        if !(e.width[0] > 0.0) {
            return Err(invalid("estimates.width must be positive"));
        }

        let i = &raw.initial;
        if !(i.width > 0.0) {
            return Err(invalid("initial.width must be positive"));
        }
        if let Some(snap) = &i.snapshot {
            let path = resolve(snap);
            if !path.is_file() {
                return Err(invalid(format!("initial.snapshot {} does not exist", path.display())));
            }
        }

        if raw.sweep.n_values.is_empty() || raw.sweep.beta_values.is_empty() {
            return Err(invalid("sweep.n_values and sweep.beta_values must be non-empty"));
        }

        let cfg = RunConfig {
            seed: raw.seed,
            grid: raw.grid,
            potential: raw.potential,
            initial: raw.initial,
            stepper: raw.stepper,
            estimates: raw.estimates,
            sweep: raw.sweep,
            output: raw.output,
            source_hash,
            base_dir,
            profile,
        };
        // the run's own potential has to be representable on the grid
        cfg.interaction(cfg.potential.beta, cfg.potential.n)?.check_resolution(&grid)?;
        for &n in &cfg.sweep.n_values {
            for &b in &cfg.sweep.beta_values {
                InteractionPotential::new(cfg.profile.clone(), b, n)?;
            }
        }
        Ok(cfg)
    }

    pub fn spatial_grid(&self) -> SpatialGrid {
        SpatialGrid::new(self.grid.half_length, self.grid.points).expect("validated grid")
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn discretization(&self) -> Discretization {
        match self.potential.discretization {
            DiscretizationName::Sampled => Discretization::Sampled,
            DiscretizationName::BandLimited => Discretization::BandLimited,
        }
    }

    /// The configured potential family at another `(β, N)`.
    pub fn interaction(&self, beta: f64, n: f64) -> Result<InteractionPotential> {
        Ok(InteractionPotential::new(self.profile.clone(), beta, n)?.with_discretization(self.discretization()))
    }

    pub fn table_for(&self, beta: f64, n: f64) -> Result<Arc<PotentialTable>> {
        Ok(Arc::new(PotentialTable::new(&self.interaction(beta, n)?, &self.spatial_grid())?))
    }

    pub fn table(&self) -> Result<Arc<PotentialTable>> {
        self.table_for(self.potential.beta, self.potential.n)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Initial state on `table`: the snapshot if configured, else the closed form.
    pub fn initial_state(&self, table: Arc<PotentialTable>) -> Result<SystemState> {
        if let Some(p) = &self.initial.snapshot {
            return read_snapshot(&self.resolve(p))?.into_state(table);
        }
        let i = &self.initial;
        let phi = gaussian_packet(table.grid(), i.center, i.width, i.momentum);
        let k = match i.pair {
            PairName::None => PairExcitation::zero(table.grid()),
            PairName::RankOne => PairExcitation::rank_one(&phi, C64::from(i.pair_strength)),
        };
        quasifree(&phi, &k, table, DEFAULT_SERIES_TOL)
    }

    pub fn step_config(&self) -> StepConfig {
        let s = &self.stepper;
        let mut c = StepConfig::new(s.dt, s.t_final);
        c.scheme = match s.scheme {
            SchemeName::StrangIprk4 => Scheme::StrangIprk4,
            SchemeName::Picard => Scheme::Picard,
        };
        c.snapshot_stride = s.snapshot_stride;
        c.resym_every = s.resym_every;
        c.picard_iters = s.picard_iters;
        c.picard_nodes = s.picard_nodes;
        c
    }

    pub fn estimate_params(&self, beta: f64) -> Result<EstimateParams> {
        sigma_for_beta(beta, self.estimates.epsilon)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.directory)
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.output.formats.contains(&f)
    }
}
