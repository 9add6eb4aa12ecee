//! JSON run configuration and the built-in presets.

use std::path::{Path, PathBuf};

use mollifem::fem::experiments::StudyOptions;
use mollifem::fem::{QuadConfig, RuleSpec, SolveOptions};
use mollifem::mollifier::MollifierKind;
use serde::{Deserialize, Serialize};

/// Highest supported polynomial and mollifier degree.
pub const MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Sin1d,
    Sin2d,
    PlateHole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MollifierSpec {
    Bspline { degree: usize },
    Quartic,
}

impl MollifierSpec {
    pub fn kind(self) -> MollifierKind {
        match self {
            Self::Bspline { degree } => MollifierKind::BSpline { degree },
            Self::Quartic => MollifierKind::Quartic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    UnitSquare,
    Plate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    /// The six-cell interval mesh bisected `levels` times.
    Bisected1d { levels: usize },
    /// Perturbed `n × n` lattices of the unit square, one per entry.
    Grid { sizes: Vec<usize> },
    /// Perturbed 6 × 6 plate mesh refined `levels` times.
    Plate { levels: usize },
    /// Seeds read from a CSV file with an `x,y` header.
    Seeds { path: PathBuf, domain: Domain },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainRule {
    Points(usize),
    Degree(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    pub domain: DomainRule,
    pub boundary_points: usize,
}

impl From<QuadSpec> for QuadConfig {
    fn from(q: QuadSpec) -> Self {
        let domain = match q.domain {
            DomainRule::Points(n) => RuleSpec::Points(n),
            DomainRule::Degree(d) => RuleSpec::Degree(d),
        };
        QuadConfig { domain, boundary_points: q.boundary_points }
    }
}

/// Settings that apply only to one polynomial degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeOverride {
    pub degree: usize,
    #[serde(default)]
    pub quadrature: Option<QuadSpec>,
    /// Degree of the correction monomials instead of `q - 1`.
    #[serde(default)]
    pub vci_degree: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchCase {
    pub degree: usize,
    /// `patch_linear` or `patch_quadratic`.
    pub field: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub n: usize,
    pub cases: Vec<PatchCase>,
}

impl Default for PatchSpec {
    fn default() -> Self {
        Self {
            n: 8,
            cases: vec![
                PatchCase { degree: 1, field: "patch_linear".into() },
                PatchCase { degree: 2, field: "patch_quadratic".into() },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub cell: usize,
    pub degree: usize,
    /// Samples per direction over the support.
    pub samples: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self { cell: 3, degree: 3, samples: 201 }
    }
}

fn default_chi() -> f64 {
    1.0
}

fn default_perturbation() -> f64 {
    0.15
}

fn default_seed() -> u64 {
    2021
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Polynomial degrees `q` studied by `converge` and used by `mesh`.
    pub degrees: Vec<usize>,
    pub mollifier: MollifierSpec,
    /// Mollifier width as a multiple of twice the cell size.
    #[serde(default = "default_chi")]
    pub chi: f64,
    pub mesh: MeshSpec,
    /// Seed offsets as a fraction of the mollifier half width.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    #[serde(default)]
    pub overrides: Vec<DegreeOverride>,
    #[serde(default)]
    pub norm_degree: Option<usize>,
    #[serde(default)]
    pub patch: PatchSpec,
    #[serde(default)]
    pub basis: BasisSpec,
    /// Fail `converge` when a slope misses the expected rate.
    #[serde(default)]
    pub check_rates: bool,
    /// Write zero wall times so repeated runs give identical files.
    #[serde(default = "default_true")]
    pub deterministic: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        // relative seed paths are taken relative to the config file
        if let MeshSpec::Seeds { path: seeds, .. } = &mut cfg.mesh {
            if seeds.is_relative() {
                if let Some(dir) = path.parent() {
                    *seeds = dir.join(&*seeds);
                }
            }
        }
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let base = |experiment, degrees: Vec<usize>, mollifier, mesh| RunConfig {
            experiment,
            degrees,
            mollifier,
            chi: 1.0,
            mesh,
            perturbation: 0.15,
            rng_seed: 2021,
            overrides: Vec::new(),
            norm_degree: None,
            patch: PatchSpec::default(),
            basis: BasisSpec::default(),
            check_rates: true,
            deterministic: true,
            out: None,
        };
        // linear bases in 2D need correction monomials of degree one
        let linear_vci = DegreeOverride { degree: 1, quadrature: None, vci_degree: Some(1) };
        match name {
            "paper-1d" => Ok(base(
                Experiment::Sin1d,
                vec![0, 1, 2, 3],
                MollifierSpec::Bspline { degree: 1 },
                MeshSpec::Bisected1d { levels: 5 },
            )),
            "paper-square" => {
                let mut c = base(Experiment::Sin2d, vec![1, 2], MollifierSpec::Quartic, MeshSpec::Grid { sizes: vec![4, 8, 16, 32] });
                c.overrides = vec![linear_vci];
                c.basis = BasisSpec { cell: 14, degree: 2, samples: 41 };
                Ok(c)
            }
            "paper-plate" => {
                let mut c = base(Experiment::PlateHole, vec![1, 2], MollifierSpec::Quartic, MeshSpec::Plate { levels: 2 });
                let fine = QuadSpec { domain: DomainRule::Degree(8), boundary_points: 5 };
                c.overrides = vec![linear_vci, DegreeOverride { degree: 2, quadrature: Some(fine), vci_degree: None }];
                c.basis = BasisSpec { cell: 36, degree: 2, samples: 41 };
                Ok(c)
            }
            _ => Err(bad(format!("unknown preset '{name}' (expected paper-1d, paper-square or paper-plate)"))),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let one_d = self.experiment == Experiment::Sin1d;
        if self.degrees.is_empty() {
            return Err(bad("degrees must not be empty"));
        }
        let degrees = self.degrees.iter().chain(self.overrides.iter().map(|o| &o.degree));
        let degrees = degrees.chain(self.patch.cases.iter().map(|c| &c.degree)).chain([&self.basis.degree]);
        for q in degrees {
            if *q > MAX_DEGREE {
                return Err(bad(format!("polynomial degree {q} exceeds {MAX_DEGREE}")));
            }
        }
        match self.mollifier {
            MollifierSpec::Bspline { degree } if degree == 0 || degree > MAX_DEGREE => {
                return Err(bad(format!("B-spline mollifier degree must be 1..={MAX_DEGREE}, got {degree}")))
            }
            MollifierSpec::Quartic if one_d => return Err(bad("the 1D study uses B-spline mollifiers")),
            _ => {}
        }
        if !(self.chi.is_finite() && self.chi > 0.0) {
            return Err(bad("chi must be positive"));
        }
        if !(self.perturbation.is_finite() && (0.0..1.0).contains(&self.perturbation)) {
            return Err(bad("perturbation must lie in [0, 1)"));
        }
        match (&self.mesh, self.experiment) {
            (MeshSpec::Bisected1d { .. }, Experiment::Sin1d) => {}
            (MeshSpec::Grid { sizes }, Experiment::Sin2d) => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(bad("grid sizes must be positive"));
                }
            }
            (MeshSpec::Plate { .. }, Experiment::PlateHole) => {}
            (MeshSpec::Seeds { path, domain }, e) => {
                let expected = if e == Experiment::PlateHole { Domain::Plate } else { Domain::UnitSquare };
                if e == Experiment::Sin1d || *domain != expected {
                    return Err(bad("seed file domain does not match the experiment"));
                }
                if !path.is_file() {
                    return Err(bad(format!("seed file {} does not exist", path.display())));
                }
            }
            (m, e) => return Err(bad(format!("mesh {m:?} does not fit experiment {e:?}"))),
        }
        if self.patch.n == 0 {
            return Err(bad("patch grid size must be positive"));
        }
        for c in &self.patch.cases {
            if !matches!(c.field.as_str(), "patch_linear" | "patch_quadratic") {
                return Err(bad(format!("unknown patch field '{}'", c.field)));
            }
        }
        if self.basis.samples < 2 {
            return Err(bad("basis needs at least two samples per direction"));
        }
        Ok(())
    }

    pub fn mollifier_degree(&self) -> usize {
        match self.mollifier {
            MollifierSpec::Bspline { degree } => degree,
            MollifierSpec::Quartic => 4,
        }
    }

    /// Study options for polynomial degree `q`.
    pub fn study(&self, q: usize) -> StudyOptions {
        let o = self.overrides.iter().find(|o| o.degree == q);
        StudyOptions {
            quad: o.and_then(|o| o.quadrature).map(Into::into),
            vci: true,
            vci_degree: o.and_then(|o| o.vci_degree),
            solve: SolveOptions::default(),
            mollifier: self.mollifier.kind(),
            chi: self.chi,
            norm_degree: self.norm_degree,
            rng_seed: self.rng_seed,
            perturbation: self.perturbation,
            deterministic: self.deterministic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in ["paper-1d", "paper-square", "paper-plate"] {
            let c = RunConfig::preset(name).unwrap();
            c.validate().unwrap();
            let text = serde_json::to_string(&c).unwrap();
            assert_eq!(RunConfig::from_json(&text).unwrap(), c);
        }
        assert!(RunConfig::preset("paper-3d").is_err());
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let c = RunConfig::from_json(
            r#"{"experiment":"sin2d","degrees":[1],"mollifier":{"kind":"quartic"},"mesh":{"kind":"grid","sizes":[4]}}"#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.chi, 1.0);
        assert_eq!(c.rng_seed, 2021);
        assert!(c.deterministic);
        assert_eq!(c.patch, PatchSpec::default());
    }

    #[test]
    fn range_violations() {
        let mut c = RunConfig::preset("paper-1d").unwrap();
        c.degrees = vec![4];
        assert!(c.validate().is_err());
        let mut c = RunConfig::preset("paper-1d").unwrap();
        c.mollifier = MollifierSpec::Bspline { degree: 4 };
        assert!(c.validate().is_err());
        let mut c = RunConfig::preset("paper-square").unwrap();
        c.mesh = MeshSpec::Plate { levels: 1 };
        assert!(c.validate().is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"sin2d","bogus":1}"#).is_err());
    }

    #[test]
    fn overrides_reach_the_study_options() {
        let c = RunConfig::preset("paper-plate").unwrap();
        assert_eq!(c.study(1).vci_degree, Some(1));
        assert_eq!(c.study(2).quad, Some(QuadConfig { domain: RuleSpec::Degree(8), boundary_points: 5 }));
        assert_eq!(c.study(2).vci_degree, None);
    }
}
