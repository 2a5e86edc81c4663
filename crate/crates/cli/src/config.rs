//! Experiment configuration: parsing, defaults and the provenance hash.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use msalab::decay::ShellStatistic;
use msalab::msa::{KindFilter, MsaParams};
use msalab::spectral::EnergyGrid;
use msalab::{BoxSpec, Config, ModelParams};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Assemble,
    Spectrum,
    Green,
    Classify,
    GeometryCheck,
    Scales,
    McWegner,
    McS0,
    McDs,
    McCount,
    JnsCheck,
    Decay,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Assemble => "assemble",
            Kind::Spectrum => "spectrum",
            Kind::Green => "green",
            Kind::Classify => "classify",
            Kind::GeometryCheck => "geometry-check",
            Kind::Scales => "scales",
            Kind::McWegner => "mc-wegner",
            Kind::McS0 => "mc-s0",
            Kind::McDs => "mc-ds",
            Kind::McCount => "mc-count",
            Kind::JnsCheck => "jns-check",
            Kind::Decay => "decay",
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Kind::McWegner | Kind::McS0 | Kind::McDs | Kind::McCount)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WegnerEvent {
    Ws1,
    Ws2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometrySuite {
    Covering,
    Projections,
    Both,
}

/// Kind-specific settings. Every field is optional in the file; the ones the
/// chosen kind reads are filled in by [`ExperimentConfig::resolve`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Config>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<u32>,
    /// Box sides swept by the Monte Carlo kinds; `[side]` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<u32>>,
    /// Second box of a pair, same side as the first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other_center: Option<Config>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Config>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Config>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<WegnerEvent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_side: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_kind: Option<KindFilter>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<GeometrySuite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Config>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<ShellStatistic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_grid: Option<EnergyGrid>,
    #[serde(default = "default_model")]
    pub model: ModelParams,
    #[serde(default)]
    pub msa: MsaParams,
    #[serde(default)]
    pub experiment: Experiment,
}

fn default_model() -> ModelParams {
    ModelParams::new(1, 1, 1.0, 0)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: None,
            threads: None,
            output_path: None,
            e_grid: None,
            model: default_model(),
            msa: MsaParams::default(),
            experiment: Experiment::default(),
        }
    }
}

pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_GRID_POINTS: usize = 64;

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn kind(&self) -> Kind {
        self.experiment.kind.expect("resolved configuration has a kind")
    }

    /// Fills in every default the selected kind reads and validates the
    /// result.
    pub fn resolve(mut self, kind: Option<Kind>) -> Result<Self, CliError> {
        let kind = match (kind, self.experiment.kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!(
                    "subcommand {} does not match experiment.kind = {}",
                    a, b
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => {
                return Err(CliError::Config("experiment.kind is required for run".into()))
            }
        };
        self.model.validate().map_err(|e| CliError::Config(format!("model: {}", e)))?;
        self.msa.validate().map_err(|e| CliError::Config(format!("msa: {}", e)))?;
        let (n, d) = (self.model.n_particles, self.model.dim);
        let msa = self.msa.clone();
        let ex = &mut self.experiment;
        ex.kind = Some(kind);
        let needs_box = !matches!(kind, Kind::Scales | Kind::GeometryCheck);
        if needs_box {
            let center = ex
                .center
                .get_or_insert_with(|| Config::from_flat(n, d, vec![0; n * d]).expect("shape"));
            if center.n_particles() != n || center.dim() != d {
                return Err(CliError::Config(format!(
                    "experiment.center has {} particles in dimension {}, model has {} in {}",
                    center.n_particles(),
                    center.dim(),
                    n,
                    d
                )));
            }
            let side = *ex.side.get_or_insert(msa.l0);
            if side == 0 {
                return Err(CliError::Config("experiment.side must be positive".into()));
            }
        }
        if matches!(kind, Kind::Green | Kind::Classify | Kind::JnsCheck) {
            ex.energy.get_or_insert(0.0);
        }
        if matches!(
            kind,
            Kind::Assemble | Kind::Spectrum | Kind::Green | Kind::Classify | Kind::JnsCheck | Kind::Decay
        ) {
            ex.realization.get_or_insert(0);
        }
        if matches!(kind, Kind::Classify | Kind::McDs | Kind::McCount | Kind::JnsCheck) {
            ex.mass.get_or_insert(msa.m0);
        }
        if kind == Kind::Green {
            let c = ex.center.clone().expect("set above");
            for p in [&mut ex.x, &mut ex.y] {
                let p = p.get_or_insert_with(|| c.clone());
                if !p.same_shape(&c) {
                    return Err(CliError::Config("green endpoints must match the model shape".into()));
                }
            }
        }
        if kind.is_monte_carlo() {
            let side = ex.side.expect("set above");
            let sides = ex.sides.get_or_insert_with(|| vec![side]);
            if sides.is_empty() || sides.contains(&0) {
                return Err(CliError::Config("experiment.sides must be nonempty and positive".into()));
            }
            let trials = *self.trials.get_or_insert(DEFAULT_TRIALS);
            if trials == 0 {
                return Err(CliError::Config("trials must be positive".into()));
            }
        }
        if kind == Kind::McWegner {
            let event = *ex.event.get_or_insert(WegnerEvent::Ws1);
            if event == WegnerEvent::Ws1 {
                ex.energy.get_or_insert(0.0);
            }
        }
        if matches!(kind, Kind::McDs) || ex.event == Some(WegnerEvent::Ws2) {
            let c = ex.center.clone().expect("set above");
            let side = ex.sides.as_ref().and_then(|s| s.iter().max().copied()).unwrap_or(0);
            let other = ex.other_center.get_or_insert_with(|| {
                let mut coords = c.coords().to_vec();
                coords[0] += 2 * side as i64 + 1;
                Config::from_flat(n, d, coords).expect("shape")
            });
            if !other.same_shape(&c) {
                return Err(CliError::Config("experiment.other_center must match the model shape".into()));
            }
        }
        if matches!(kind, Kind::McCount | Kind::JnsCheck) {
            let side = ex.side.expect("set above");
            let default_sub = ((side as f64).powf(1.0 / msa.alpha).round() as u32).max(1);
            ex.sub_side.get_or_insert(default_sub);
            ex.count_kind.get_or_insert(KindFilter::Any);
            ex.cap.get_or_insert(4096);
        }
        if kind == Kind::McCount {
            let t = *ex.threshold.get_or_insert(msa.j as usize + 1);
            if t == 0 {
                return Err(CliError::Config("experiment.threshold must be positive".into()));
            }
        }
        if kind == Kind::Classify {
            ex.stride.get_or_insert(1);
        }
        if kind == Kind::Scales {
            ex.k_max.get_or_insert(3);
        }
        if kind == Kind::GeometryCheck {
            ex.suite.get_or_insert(GeometrySuite::Both);
            ex.points
                .get_or_insert_with(|| vec![Config::line(&[0, 0]), Config::line(&[0, 7])]);
            ex.lengths.get_or_insert_with(|| vec![2, 3]);
            ex.range.get_or_insert(40);
            ex.samples.get_or_insert(10_000);
            ex.r0.get_or_insert(1);
        }
        if kind == Kind::Decay {
            ex.statistic.get_or_insert(ShellStatistic::Max);
        }
        let uses_grid = matches!(kind, Kind::Classify | Kind::McS0 | Kind::McDs | Kind::McCount);
        if uses_grid && self.e_grid.is_none() {
            self.e_grid = Some(EnergyGrid::new(
                msa.interval[0],
                msa.interval[1],
                DEFAULT_GRID_POINTS,
            ));
        }
        Ok(self)
    }

    /// SHA-256 of the resolved configuration without the thread count and
    /// output location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.threads = None;
        c.output_path = None;
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn primary_box(&self) -> BoxSpec {
        BoxSpec::new(
            self.experiment.center.clone().expect("resolved"),
            self.experiment.side.expect("resolved"),
        )
    }

    pub fn grid(&self) -> EnergyGrid {
        self.e_grid.expect("resolved")
    }
}
