//! Experiment configs: one YAML document per run.
//!
//! ```yaml
//! command: certify-l1
//! seed: 7
//! parameters:
//!   alpha: 0.5
//!   c: 1.5707963267948966
//!   eps_grid: [0.0625, 0.03125]
//!   placement: { kind: through_origin }
//! ```

use std::f64::consts::PI;

use kakeya_core::constructions::{Offsets, PlacementSpec};
use kakeya_core::rng;
use kakeya_core::union_measure::{Exact2dEngine, DEFAULT_SLACK};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Monte Carlo sample count, where a command uses one.
    pub samples: Option<u64>,
    pub threads: Option<usize>,
    pub run: Run,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Run {
    Fan(FanParams),
    Book(BookParams),
    Boxdim(BoxdimParams),
    Lift(LiftParams),
    CertifyL1(CertifyL1Params),
    CertifyBook(CertifyBookParams),
    Spaghetti(SpaghettiParams),
    Adversarial(AdversarialParams),
}

impl Run {
    pub fn name(&self) -> &'static str {
        match self {
            Run::Fan(_) => "fan",
            Run::Book(_) => "book",
            Run::Boxdim(_) => "boxdim",
            Run::Lift(_) => "lift",
            Run::CertifyL1(_) => "certify-l1",
            Run::CertifyBook(_) => "certify-book",
            Run::Spaghetti(_) => "spaghetti",
            Run::Adversarial(_) => "adversarial",
        }
    }
}

/// Tube placement; random placements draw from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Placement {
    ThroughOrigin,
    RandomBall {
        #[serde(default = "one")]
        radius: f64,
    },
    Explicit {
        centers: Vec<Vec<f64>>,
    },
    Adversarial {
        iterations: usize,
    },
}

impl Placement {
    pub fn resolve(&self, seed: u64) -> PlacementSpec {
        match self {
            Placement::ThroughOrigin => PlacementSpec::ThroughOrigin,
            Placement::RandomBall { radius } => PlacementSpec::RandomBall { radius: *radius, seed },
            Placement::Explicit { centers } => PlacementSpec::Explicit { centers: centers.clone() },
            Placement::Adversarial { iterations } => PlacementSpec::Adversarial { iterations: *iterations, seed },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OffsetKind {
    Zero,
    #[default]
    Random,
}

impl OffsetKind {
    pub fn resolve(self, seed: u64) -> Offsets {
        match self {
            OffsetKind::Zero => Offsets::Zero,
            OffsetKind::Random => Offsets::Random { seed },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanParams {
    pub alpha: f64,
    pub c: f64,
    pub eps_grid: Vec<f64>,
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyL1Params {
    pub alpha: f64,
    pub c: f64,
    pub eps_grid: Vec<f64>,
    pub placement: Placement,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_r2")]
    pub min_r_squared: f64,
    #[serde(default)]
    pub engine: Exact2dEngine,
}

/// Segment skeleton of a book, counted at `δ = ε` over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BookParams {
    pub n: usize,
    pub alpha: f64,
    /// Page exponent; `α²` when absent.
    #[serde(default)]
    pub beta: Option<f64>,
    pub eps_grid: Vec<f64>,
    #[serde(default)]
    pub offsets: OffsetKind,
    #[serde(default = "default_bound_c")]
    pub bound_c: f64,
    /// Required skeleton dimension; `n − 0.3` when absent.
    #[serde(default)]
    pub min_dimension: Option<f64>,
    #[serde(default = "default_r2")]
    pub min_r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyBookParams {
    pub alpha: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "pi")]
    pub c: f64,
    pub eps_grid: Vec<f64>,
    #[serde(default)]
    pub offsets: OffsetKind,
    #[serde(default = "default_bound_c")]
    pub bound_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Corpus {
    Point {
        #[serde(default = "two")]
        n: usize,
    },
    Segment,
    Square {
        #[serde(default = "square_level")]
        level: i32,
    },
    Cantor {
        #[serde(default = "cantor_level")]
        level: u32,
    },
    Points {
        points: Vec<Vec<f64>>,
    },
    /// Segments as endpoint pairs.
    Segments {
        segments: Vec<[Vec<f64>; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxdimParams {
    pub corpus: Corpus,
    /// Scales `2^-delta_from, …, 2^-delta_to`.
    pub delta_from: i32,
    pub delta_to: i32,
    #[serde(default = "default_exclude")]
    pub exclude_coarsest: usize,
    #[serde(default)]
    pub expected: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_r2")]
    pub min_r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftParams {
    pub n: usize,
    #[serde(default = "thousand")]
    pub directions: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Normal of `H`; `e₁` when absent.
    #[serde(default)]
    pub normal: Option<Vec<f64>>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaghettiParams {
    pub n: usize,
    /// Segment centers sit at `center_offset·θ`.
    #[serde(default)]
    pub center_offset: f64,
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default)]
    pub cap_axis: usize,
    #[serde(default = "default_cap_radius")]
    pub cap_radius: f64,
    #[serde(default = "thousand")]
    pub direction_samples: usize,
    #[serde(default = "thousand")]
    pub sector_samples: usize,
    #[serde(default = "default_members")]
    pub min_members: usize,
    /// Radial segments in the sector skeleton; dimension-dependent when absent.
    #[serde(default)]
    pub skeleton_directions: Option<usize>,
    #[serde(default = "default_delta_from")]
    pub delta_from: i32,
    #[serde(default)]
    pub delta_to: Option<i32>,
    /// `n − 0.1` when absent.
    #[serde(default)]
    pub min_dimension: Option<f64>,
}

impl SpaghettiParams {
    pub fn skeleton_directions(&self) -> usize {
        self.skeleton_directions.unwrap_or(if self.n == 2 { 4000 } else { 200_000 })
    }

    pub fn delta_to(&self) -> i32 {
        self.delta_to.unwrap_or(if self.n == 2 { 11 } else { 9 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarialParams {
    pub alpha: f64,
    pub c: f64,
    pub eps: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn pi() -> f64 {
    PI
}
fn thousand() -> usize {
    1000
}
fn square_level() -> i32 {
    10
}
fn cantor_level() -> u32 {
    6
}
fn default_slack() -> f64 {
    DEFAULT_SLACK
}
fn default_r2() -> f64 {
    0.95
}
fn default_bound_c() -> f64 {
    kakeya_core::constructions::DEFAULT_BOUND_C
}
fn default_exclude() -> usize {
    kakeya_core::box_dimension::DEFAULT_EXCLUDE_COARSEST
}
fn default_tolerance() -> f64 {
    0.05
}
fn default_margin() -> f64 {
    kakeya_core::lift_project::DEFAULT_MARGIN
}
fn default_deltas() -> Vec<f64> {
    vec![0.1, 0.01, 0.001]
}
fn default_cap_radius() -> f64 {
    kakeya_core::lift_project::DEFAULT_MARGIN.acos()
}
fn default_members() -> usize {
    8
}
fn default_delta_from() -> i32 {
    4
}
fn default_iterations() -> usize {
    200
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Repr<P> {
    command: String,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    parameters: P,
}

#[derive(Deserialize)]
struct Header {
    command: String,
}

fn yaml_error(e: serde_yaml::Error) -> CliError {
    CliError::Config { line: e.location().map_or(1, |l| l.line()), message: e.to_string() }
}

/// 1-based line of the first `key:` entry, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let pat = format!("{key}:");
    text.lines()
        .position(|l| {
            let t = l.trim_start().trim_start_matches("- ");
            t.starts_with(&pat) || t.contains(&format!("{{ {pat}")) || t.contains(&format!(", {pat}"))
        })
        .map_or(1, |i| i + 1)
}

impl ExperimentConfig {
    pub fn new(run: Run) -> Self {
        ExperimentConfig { seed: 0, samples: None, threads: None, run }
    }

    pub fn from_yaml(text: &str) -> Result<Self> {
        let header: Header = serde_yaml::from_str(text).map_err(yaml_error)?;
        fn typed<P: DeserializeOwned>(text: &str) -> Result<Repr<P>> {
            serde_yaml::from_str(text).map_err(yaml_error)
        }
        macro_rules! build {
            ($variant:ident) => {{
                let r = typed(text)?;
                ExperimentConfig { seed: r.seed, samples: r.samples, threads: r.threads, run: Run::$variant(r.parameters) }
            }};
        }
        let cfg = match header.command.as_str() {
            "fan" => build!(Fan),
            "book" => build!(Book),
            "boxdim" => build!(Boxdim),
            "lift" => build!(Lift),
            "certify-l1" => build!(CertifyL1),
            "certify-book" => build!(CertifyBook),
            "spaghetti" => build!(Spaghetti),
            "adversarial" => build!(Adversarial),
            other => {
                return Err(CliError::Config { line: line_of(text, "command"), message: format!("unknown command `{other}`") })
            }
        };
        cfg.validate().map_err(|(key, message)| CliError::Config { line: line_of(text, key), message })?;
        Ok(cfg)
    }

    pub fn to_yaml(&self) -> Result<String> {
        fn emit<P: Serialize>(c: &ExperimentConfig, p: &P) -> Result<String> {
            Ok(serde_yaml::to_string(&Repr {
                command: c.run.name().to_string(),
                seed: c.seed,
                samples: c.samples,
                threads: c.threads,
                parameters: p,
            })?)
        }
        match &self.run {
            Run::Fan(p) => emit(self, p),
            Run::Book(p) => emit(self, p),
            Run::Boxdim(p) => emit(self, p),
            Run::Lift(p) => emit(self, p),
            Run::CertifyL1(p) => emit(self, p),
            Run::CertifyBook(p) => emit(self, p),
            Run::Spaghetti(p) => emit(self, p),
            Run::Adversarial(p) => emit(self, p),
        }
    }

    /// Seed for the `k`-th independent consumer in a run.
    pub fn sub_seed(&self, k: u64) -> u64 {
        rng::derive(self.seed, k)
    }

    /// Checks value ranges; errors name the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        fn unit_open(key: &'static str, v: f64) -> std::result::Result<(), (&'static str, String)> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err((key, format!("{key} must lie in (0,1), got {v}")))
            }
        }
        fn positive(key: &'static str, v: f64) -> std::result::Result<(), (&'static str, String)> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err((key, format!("{key} must be positive, got {v}")))
            }
        }
        fn grid(v: &[f64]) -> std::result::Result<(), (&'static str, String)> {
            if v.is_empty() {
                return Err(("eps_grid", "eps_grid is empty".into()));
            }
            for &e in v {
                unit_open("eps_grid", e)?;
            }
            if v.windows(2).any(|w| w[1] >= w[0]) {
                return Err(("eps_grid", "eps_grid must be strictly decreasing".into()));
            }
            Ok(())
        }
        fn dim(n: usize) -> std::result::Result<(), (&'static str, String)> {
            if (2..=kakeya_core::geometry::MAX_DIM).contains(&n) {
                Ok(())
            } else {
                Err(("n", format!("n must lie in 2..={}, got {n}", kakeya_core::geometry::MAX_DIM)))
            }
        }
        if let Some(s) = self.samples {
            if s < 10_000 {
                return Err(("samples", format!("samples must be at least 10000, got {s}")));
            }
        }
        if self.threads == Some(0) {
            return Err(("threads", "threads must be at least 1".into()));
        }
        match &self.run {
            Run::Fan(p) => {
                unit_open("alpha", p.alpha)?;
                positive("c", p.c)?;
                grid(&p.eps_grid)?;
            }
            Run::CertifyL1(p) => {
                unit_open("alpha", p.alpha)?;
                positive("c", p.c)?;
                grid(&p.eps_grid)?;
                unit_open("min_r_squared", p.min_r_squared)?;
            }
            Run::Book(p) => {
                dim(p.n)?;
                unit_open("alpha", p.alpha)?;
                if let Some(b) = p.beta {
                    unit_open("beta", b)?;
                }
                grid(&p.eps_grid)?;
                positive("bound_c", p.bound_c)?;
            }
            Run::CertifyBook(p) => {
                unit_open("alpha", p.alpha)?;
                if let Some(b) = p.beta {
                    unit_open("beta", b)?;
                }
                positive("c", p.c)?;
                grid(&p.eps_grid)?;
                positive("bound_c", p.bound_c)?;
            }
            Run::Boxdim(p) => {
                if p.delta_to <= p.delta_from {
                    return Err(("delta_to", "delta_to must exceed delta_from".into()));
                }
                positive("tolerance", p.tolerance)?;
            }
            Run::Lift(p) => {
                dim(p.n)?;
                unit_open("margin", p.margin)?;
                if p.directions == 0 {
                    return Err(("directions", "directions must be positive".into()));
                }
                for &d in &p.deltas {
                    if !(0.0..0.5).contains(&d) {
                        return Err(("deltas", format!("deltas must lie in [0, 0.5), got {d}")));
                    }
                }
            }
            Run::Spaghetti(p) => {
                dim(p.n)?;
                positive("length", p.length)?;
                if !(p.cap_radius > 0.0 && p.cap_radius < std::f64::consts::FRAC_PI_2) {
                    return Err(("cap_radius", format!("cap_radius must lie in (0, π/2), got {}", p.cap_radius)));
                }
                if p.cap_axis >= p.n {
                    return Err(("cap_axis", format!("cap_axis must be below n = {}", p.n)));
                }
                if p.delta_to() <= p.delta_from {
                    return Err(("delta_to", "delta_to must exceed delta_from".into()));
                }
            }
            Run::Adversarial(p) => {
                unit_open("alpha", p.alpha)?;
                positive("c", p.c)?;
                unit_open("eps", p.eps)?;
                if p.iterations == 0 {
                    return Err(("iterations", "iterations must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}
