use std::path::{Path, PathBuf};

use horolab_core::asymptotics::{Rect, Thresholds};
use horolab_core::domain::DomainSpec;
use horolab_core::metric::DEFAULT_SEED;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub type Point = [f64; 2];

/// Where the scenario's domain comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    /// Built-in name such as `disk` or `annulus(0.3)`.
    Builtin(String),
    /// Domain spec file, relative to the scenario file.
    File {
        file: PathBuf,
    },
    Inline(DomainSpec),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub domain: DomainRef,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Grid spacing; the command line overrides it.
    #[serde(default)]
    pub h: Option<f64>,
    /// `auto`, `closed-form`, `transport` or `pde`.
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub halt_on_error: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub operations: Vec<Operation>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_method() -> String {
    "auto".into()
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A boundary point; `side` is the inward direction, needed on slits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub at: Point,
    #[serde(default)]
    pub side: Option<Point>,
}

fn n_default() -> usize {
    10
}

fn d0_default() -> f64 {
    horolab_core::asymptotics::DEFAULT_D0
}

/// How interior points approach a boundary point. Distances shrink as
/// `d0 2^-k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Approach {
    /// Along the side hint or the inward normal.
    Radial {
        #[serde(default = "n_default")]
        n: usize,
        #[serde(default = "d0_default")]
        d0: f64,
    },
    /// Along the inward normal tilted by `slant` times the tangent.
    Oblique {
        #[serde(default = "n_default")]
        n: usize,
        #[serde(default = "d0_default")]
        d0: f64,
        slant: f64,
    },
    /// Alternately along the side hint and against it.
    Alternating {
        #[serde(default = "n_default")]
        n: usize,
        #[serde(default = "d0_default")]
        d0: f64,
    },
    Points {
        points: Vec<Point>,
    },
}

impl Default for Approach {
    fn default() -> Self {
        Approach::Radial {
            n: n_default(),
            d0: d0_default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sequence {
    pub target: Target,
    #[serde(default)]
    pub approach: Approach,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySpec {
    /// Defaults to the domain's base point.
    #[serde(default)]
    pub origin: Option<Point>,
    pub target: Target,
}

fn probes_default() -> usize {
    24
}

fn rel_tol_default() -> f64 {
    1e-2
}

fn yes() -> bool {
    true
}

fn pairs_default() -> usize {
    50
}

fn samples_default() -> usize {
    200
}

fn short_n() -> usize {
    8
}

fn core_delta_default() -> f64 {
    0.2
}

fn stability_default() -> f64 {
    0.1
}

fn lambda_default() -> f64 {
    1.0
}

fn kappa_default() -> f64 {
    0.1
}

fn qg_samples_default() -> usize {
    100
}

/// Grid on which a Busemann sample is also evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsetSpec {
    /// Nodes per side of the bounding box.
    pub n: usize,
    #[serde(default = "levelset_delta")]
    pub min_delta: f64,
}

fn levelset_delta() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    Distance {
        z: Point,
        w: Point,
        #[serde(default)]
        expect: Option<f64>,
        #[serde(default = "rel_tol_default")]
        rel_tol: f64,
    },
    Gromov {
        #[serde(default)]
        o: Option<Point>,
        x: Point,
        y: Point,
    },
    Ray {
        #[serde(default)]
        origin: Option<Point>,
        target: Target,
        #[serde(default)]
        t_max: Option<f64>,
    },
    Busemann {
        #[serde(default)]
        origin: Option<Point>,
        target: Target,
        #[serde(default)]
        t_max: Option<f64>,
        #[serde(default = "probes_default")]
        probes: usize,
        #[serde(default)]
        levelset: Option<LevelsetSpec>,
    },
    RayPair {
        a: RaySpec,
        b: RaySpec,
        #[serde(default)]
        t_max: Option<f64>,
        #[serde(default = "yes")]
        strong: bool,
        /// Also compare the Busemann samples of the two rays.
        #[serde(default)]
        compare_busemann: bool,
        #[serde(default = "probes_default")]
        probes: usize,
        #[serde(default)]
        expect_asymptotic: Option<bool>,
        #[serde(default)]
        expect_strong: Option<bool>,
    },
    Limit {
        target: Target,
        #[serde(default)]
        approach: Approach,
        #[serde(default = "probes_default")]
        probes: usize,
        #[serde(default)]
        expect_converged: Option<bool>,
    },
    /// Horofunction limits along several sequences, compared pairwise.
    BoundaryMap {
        sequences: Vec<Sequence>,
        #[serde(default = "probes_default")]
        probes: usize,
        #[serde(default = "yes")]
        gromov: bool,
    },
    Squeeze {
        points: Vec<Point>,
        #[serde(default)]
        expect_monotone: bool,
        #[serde(default)]
        expect_final_min: Option<f64>,
    },
    DeltaHyperbolicity {
        #[serde(default = "samples_default")]
        samples: usize,
        #[serde(default)]
        region: Option<Rect>,
        /// Explicit quadruples instead of random ones.
        #[serde(default)]
        quadruples: Option<Vec<[Point; 4]>>,
        #[serde(default)]
        expect_max: Option<f64>,
    },
    Visibility {
        xi1: Target,
        xi2: Target,
        #[serde(default = "short_n")]
        n: usize,
        #[serde(default = "core_delta_default")]
        core_delta: f64,
        #[serde(default)]
        o: Option<Point>,
        #[serde(default)]
        expect_core_max: Option<f64>,
        #[serde(default)]
        expect_gromov_max: Option<f64>,
    },
    Separation {
        p: Target,
        q: Target,
        #[serde(default = "short_n")]
        n: usize,
        #[serde(default)]
        expect_min: Option<f64>,
    },
    Localization {
        u: Rect,
        w: Rect,
        #[serde(default = "pairs_default")]
        pairs: usize,
        /// Repeat at half the grid spacing and compare the constants.
        #[serde(default = "yes")]
        refine: bool,
        #[serde(default = "stability_default")]
        stability: f64,
    },
    QuasiGeodesic {
        z: Point,
        w: Point,
        #[serde(default = "lambda_default")]
        lambda: f64,
        #[serde(default = "kappa_default")]
        kappa: f64,
        #[serde(default = "qg_samples_default")]
        samples: usize,
        #[serde(default = "yes")]
        expect_valid: bool,
    },
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Distance { .. } => "distance",
            Operation::Gromov { .. } => "gromov",
            Operation::Ray { .. } => "ray",
            Operation::Busemann { .. } => "busemann",
            Operation::RayPair { .. } => "ray_pair",
            Operation::Limit { .. } => "limit",
            Operation::BoundaryMap { .. } => "boundary_map",
            Operation::Squeeze { .. } => "squeeze",
            Operation::DeltaHyperbolicity { .. } => "delta_hyperbolicity",
            Operation::Visibility { .. } => "visibility",
            Operation::Separation { .. } => "separation",
            Operation::Localization { .. } => "localization",
            Operation::QuasiGeodesic { .. } => "quasi_geodesic",
        }
    }
}
