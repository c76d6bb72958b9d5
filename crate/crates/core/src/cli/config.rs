use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use crate::bers::LaurentSeries;
use crate::circle::{CircleMapLift, DEFAULT_DIAGONAL_BAND, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::fields::{BeltramiField, DiskGrid, GridSpec, HolomorphicField};
use crate::rigidity::Direction;
use crate::solver::SolverConfig;
use crate::wp::sampling::random_beltrami;
use crate::wp::SuiteConfig;

pub const MAX_CUTOFF: u32 = 16;
pub const MAX_ANGLES: usize = 4096;

/// A named Beltrami coefficient on the disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuSpec {
    Constant {
        k: C64,
    },
    /// `k` on `|z| < radius`, zero elsewhere.
    DiskIndicator {
        k: C64,
        radius: f64,
    },
    /// `k (1 - |z|²)`
    RadialBump {
        k: C64,
    },
    /// Seeded boundary-vanishing polynomial with the given sup.
    Random {
        sup: f64,
    },
}

impl MuSpec {
    pub fn build(&self, grid: &Arc<DiskGrid>, seed: u64) -> Result<BeltramiField> {
        match *self {
            MuSpec::Constant { k } => BeltramiField::constant(grid.clone(), k),
            MuSpec::DiskIndicator { k, radius } => {
                BeltramiField::disk_indicator(grid.clone(), k, radius)
            }
            MuSpec::RadialBump { k } => {
                BeltramiField::from_fn(grid.clone(), move |z| k * (1.0 - z.norm_sqr()))
            }
            MuSpec::Random { sup } => {
                random_beltrami(grid, &mut ChaCha8Rng::seed_from_u64(seed), sup)
            }
        }
    }

    /// `k` when the coefficient is `k` on the whole disk.
    pub fn full_disk_constant(&self) -> Option<C64> {
        match *self {
            MuSpec::Constant { k } => Some(k),
            MuSpec::DiskIndicator { k, radius } if radius >= 1.0 => Some(k),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let k = match *self {
            MuSpec::Constant { k } | MuSpec::DiskIndicator { k, .. } | MuSpec::RadialBump { k } => {
                k.norm()
            }
            MuSpec::Random { sup } => sup,
        };
        if !(k.is_finite() && k < 1.0) {
            return Err(Error::Config(format!(
                "coefficient size {k} is not below 1"
            )));
        }
        Ok(())
    }
}

/// A quadratic differential `Σ c_n z^-n` on the exterior disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiSpec {
    Monomial {
        c: C64,
        n: usize,
    },
    /// `coeffs[n]` multiplies `z^-n`.
    Laurent {
        coeffs: Vec<C64>,
    },
}

impl PhiSpec {
    pub fn build(&self, grid: &Arc<DiskGrid>) -> Result<HolomorphicField> {
        match self {
            PhiSpec::Monomial { c, n } => {
                if *n < 4 {
                    return Err(Error::Config(format!(
                        "z^-{n} is not integrable at infinity; need n >= 4"
                    )));
                }
                Ok(HolomorphicField::monomial(grid.clone(), *c, *n))
            }
            PhiSpec::Laurent { coeffs } => {
                if coeffs.iter().take(4).any(|c| c.norm() != 0.0) {
                    return Err(Error::Config("coefficients below z^-4 must vanish".into()));
                }
                Ok(HolomorphicField::from_laurent(
                    grid.clone(),
                    LaurentSeries::plain(coeffs.clone()),
                ))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveParams {
    pub mu: MuSpec,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            mu: MuSpec::Constant {
                k: C64::new(0.3, 0.0),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BersParams {
    pub mu: MuSpec,
    /// Coefficients written to the series CSV.
    pub terms: usize,
}

impl Default for BersParams {
    fn default() -> Self {
        Self {
            mu: MuSpec::Constant {
                k: C64::new(0.2, 0.0),
            },
            terms: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AwParams {
    pub phi: PhiSpec,
    pub tolerance: f64,
}

impl Default for AwParams {
    fn default() -> Self {
        Self {
            phi: PhiSpec::Monomial {
                c: C64::new(0.1, 0.0),
                n: 4,
            },
            tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RigidityParams {
    pub lambda: f64,
    pub attract_angle: f64,
    pub repel_angle: f64,
    pub alpha: f64,
    pub rel_tol: f64,
    pub direction: Direction,
    pub exclusion: f64,
    /// With `coboundary`, ψ = γ*φ₀ - φ₀; otherwise ψ = φ₀.
    pub phi: PhiSpec,
    pub coboundary: bool,
}

impl Default for RigidityParams {
    fn default() -> Self {
        Self {
            lambda: 0.25,
            attract_angle: 0.3,
            repel_angle: 0.3 + PI,
            alpha: 0.5,
            rel_tol: 1e-10,
            direction: Direction::AttractingSum,
            exclusion: 0.05,
            phi: PhiSpec::Monomial {
                c: C64::new(1.0, 0.0),
                n: 4,
            },
            coboundary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WpBoundParams {
    pub mu: MuSpec,
    pub p: f64,
    pub segment_nodes: usize,
}

impl Default for WpBoundParams {
    fn default() -> Self {
        Self {
            mu: MuSpec::Random { sup: 0.3 },
            p: 2.0,
            segment_nodes: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CircleParams {
    pub map: CircleMapLift,
    pub samples: usize,
    /// Halvings of `t` in the symmetry ladder, starting at `t = 1/2`.
    pub levels: u32,
    pub alpha: f64,
    pub band: f64,
}

impl Default for CircleParams {
    fn default() -> Self {
        Self {
            map: CircleMapLift::sine(0.3, 1).expect("valid sine map"),
            samples: DEFAULT_SAMPLES,
            levels: 10,
            alpha: 0.5,
            band: DEFAULT_DIAGONAL_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub solve: SolveParams,
    pub bers: BersParams,
    pub aw: AwParams,
    pub rigidity: RigidityParams,
    pub wp_bound: WpBoundParams,
    pub qs: CircleParams,
    pub cocycle: CircleParams,
    pub verify: SuiteConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            grid: GridSpec::default(),
            solver: SolverConfig::default(),
            solve: SolveParams::default(),
            bers: BersParams::default(),
            aw: AwParams::default(),
            rigidity: RigidityParams::default(),
            wp_bound: WpBoundParams::default(),
            qs: CircleParams::default(),
            cocycle: CircleParams::default(),
            verify: SuiteConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} must be positive")))
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// The suite runs on the top-level seed, grid and solver settings.
    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            grid: self.grid,
            solver: self.solver,
            ..self.verify.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.k > MAX_CUTOFF {
            return Err(Error::Config(format!(
                "cutoff k = {} exceeds {MAX_CUTOFF}",
                self.grid.k
            )));
        }
        if self.grid.angles > MAX_ANGLES {
            return Err(Error::Config(format!(
                "{} angles exceed {MAX_ANGLES}",
                self.grid.angles
            )));
        }
        self.grid
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        positive("solver.tol", self.solver.tol)?;
        if self.solver.max_iter == 0 {
            return Err(Error::Config("solver.max_iter must be positive".into()));
        }
        self.solve.mu.validate()?;
        self.bers.mu.validate()?;
        self.wp_bound.mu.validate()?;
        positive("aw.tolerance", self.aw.tolerance)?;
        let r = &self.rigidity;
        positive("rigidity.rel_tol", r.rel_tol)?;
        positive("rigidity.exclusion", r.exclusion)?;
        if !(r.lambda > 0.0 && r.lambda < 1.0) {
            return Err(Error::Config(format!("λ = {} not in (0, 1)", r.lambda)));
        }
        if !(r.alpha > 0.0 && r.alpha < 1.0) {
            return Err(Error::Config(format!("α = {} not in (0, 1)", r.alpha)));
        }
        if ![2.0, 3.0, 4.0].contains(&self.wp_bound.p) {
            return Err(Error::Config(format!(
                "p = {} not in {{2, 3, 4}}",
                self.wp_bound.p
            )));
        }
        if self.wp_bound.segment_nodes == 0 {
            return Err(Error::Config(
                "wp_bound.segment_nodes must be positive".into(),
            ));
        }
        for c in [&self.qs, &self.cocycle] {
            positive("band", c.band)?;
            if c.samples < 16 {
                return Err(Error::Config(format!("{} samples are too few", c.samples)));
            }
        }
        self.suite().validate()
    }
}
