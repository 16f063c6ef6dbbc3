//! Experiment configuration: JSON schema, validation, canonical hashing.
//!
//! A single [`ExperimentConfig`] describes the physics (problem kind,
//! forcing, obstacle or confinement planes, shell parameters) plus up to
//! one section per study type (`kappa_sweep`, `cauchy`, `force_sweep`).
//! Each driver reads only its own section, so one file can describe a
//! whole family of studies over the same physics.
//!
//! [`ExperimentConfig::canonical_json`] serializes the parsed (and
//! defaulted) config with fields in declaration order; its SHA-256
//! ([`ExperimentConfig::config_hash`]) is embedded in every report and
//! CSV so an artifact can be traced back to the exact configuration that
//! produced it. Hashing the parsed form rather than the input bytes makes
//! the hash independent of file formatting and inclusive of CLI flag
//! overrides.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;

use crate::biharmonic::{RadialForcing, ScalarObstacle};
use crate::nonlinear::{NewtonConfig, StoppingRule, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::shell::{HalfSpaceConstraint, ShellParams};

/// Default Cauchy stopping tolerance for biharmonic mesh studies.
pub const BIHARMONIC_CAUCHY_TOL: f64 = 6.0e-5;

/// Default Cauchy stopping tolerance for shell mesh studies.
pub const SHELL_CAUCHY_TOL: f64 = 2.0e-4;

/// Largest accepted halving count; beyond this `kappa0 / 2^j` would sink
/// into subnormal territory for any reasonable `kappa0`.
pub const MAX_HALVINGS: usize = 200;

/// Configuration loading and validation failures.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// The JSON text does not parse into the schema.
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    /// The config file cannot be read.
    #[error("config io error: {0}")]
    Io(#[from] std::io::Error),
    /// The parsed config violates a schema invariant.
    #[error("invalid config: {0}")]
    Invalid(String),
    /// A driver needs a section the config does not carry.
    #[error("config is missing the `{0}` section required by this command")]
    MissingSection(&'static str),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Which problem module an experiment drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Penalized mixed biharmonic obstacle problem (3 fields per vertex).
    Biharmonic,
    /// Penalized mixed flat-shell confinement problem (5 fields per vertex).
    Shell,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::Biharmonic => write!(f, "biharmonic"),
            ProblemKind::Shell => write!(f, "shell"),
        }
    }
}

/// Transverse forcing specification.
///
/// Both variants describe the radial profile `f(y) = a |y|^2 + c` on the
/// support `|y|^2 < s` (zero outside) that [`RadialForcing`] turns into a
/// divergence potential. `fixed` pins one profile; `ell-family` is the
/// force-sweep family `f_ell(y) = a |y|^2 - coeff * ell` supported on
/// `|y|^2 < coeff * ell`, which vanishes identically at `ell = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ForcingSpec {
    /// One fixed radial profile `a |y|^2 + c` on `|y|^2 < s`.
    Fixed {
        /// Quadratic coefficient.
        a: f64,
        /// Constant offset.
        c: f64,
        /// Support threshold on `|y|^2`.
        s: f64,
    },
    /// The family `a |y|^2 - coeff * ell` on `|y|^2 < coeff * ell`.
    EllFamily {
        /// Quadratic coefficient.
        a: f64,
        /// Scale tying the constant offset and the support to `ell`.
        coeff: f64,
    },
}

impl ForcingSpec {
    /// Schema checks shared by all uses of the forcing.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            ForcingSpec::Fixed { a, c, s } => {
                if !(a.is_finite() && c.is_finite() && s.is_finite()) {
                    return Err(invalid("forcing coefficients must be finite"));
                }
                if s < 0.0 {
                    return Err(invalid(format!("forcing support must be >= 0 (got {s})")));
                }
            }
            ForcingSpec::EllFamily { a, coeff } => {
                if !(a.is_finite() && coeff.is_finite()) {
                    return Err(invalid("forcing coefficients must be finite"));
                }
                if coeff <= 0.0 {
                    return Err(invalid(format!(
                        "forcing family coeff must be > 0 (got {coeff})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The single profile of a `fixed` forcing; an error for a family.
    pub fn fixed(&self) -> Result<RadialForcing, ConfigError> {
        match *self {
            ForcingSpec::Fixed { a, c, s } => Ok(RadialForcing::new(a, c, s)),
            ForcingSpec::EllFamily { .. } => Err(invalid(
                "this study needs a fixed forcing; the config carries an ell-family",
            )),
        }
    }

    /// The family member at `ell`; an error for a fixed forcing.
    pub fn at_ell(&self, ell: u64) -> Result<RadialForcing, ConfigError> {
        match *self {
            ForcingSpec::EllFamily { a, coeff } => {
                let t = coeff * ell as f64;
                Ok(RadialForcing::new(a, -t, t))
            }
            ForcingSpec::Fixed { .. } => Err(invalid(
                "force sweeps need an ell-family forcing; the config carries a fixed profile",
            )),
        }
    }
}

/// One affine lower-bound plane `theta(y) >= grad . y + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    /// In-plane gradient of the bound.
    pub grad: [f64; 2],
    /// Constant offset of the bound.
    pub offset: f64,
}

/// Scalar obstacle specification for the biharmonic problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ObstacleSpec {
    /// Constant obstacle `theta == value`.
    Constant {
        /// Obstacle height.
        value: f64,
    },
    /// Piecewise-affine obstacle `theta = max_j (grad_j . y + offset_j)`.
    Planes {
        /// The planes whose maximum defines the obstacle.
        planes: Vec<PlaneSpec>,
    },
}

impl ObstacleSpec {
    /// Schema checks for the obstacle.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            ObstacleSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(invalid("obstacle value must be finite"));
                }
            }
            ObstacleSpec::Planes { planes } => {
                if planes.is_empty() {
                    return Err(invalid("obstacle planes list must not be empty"));
                }
                for p in planes {
                    if !(p.grad[0].is_finite() && p.grad[1].is_finite() && p.offset.is_finite()) {
                        return Err(invalid("obstacle plane coefficients must be finite"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Builds the runtime obstacle.
    pub fn build(&self) -> ScalarObstacle {
        match self {
            ObstacleSpec::Constant { value } => ScalarObstacle::constant(*value),
            ObstacleSpec::Planes { planes } => {
                ScalarObstacle::from_planes(planes.iter().map(|p| (p.grad, p.offset)).collect())
            }
        }
    }
}

fn default_radius() -> f64 {
    1.0
}

/// Disk mesh parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    /// Resolution: subdivisions per radius; must be a power of two.
    pub n: usize,
    /// Disk radius (default 1).
    #[serde(default = "default_radius")]
    pub radius: f64,
}

/// Shell physics: material and geometry parameters plus the confinement
/// planes and load layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellSection {
    /// Half-thickness of the shell.
    pub epsilon: f64,
    /// First Lame constant.
    pub lambda: f64,
    /// Second Lame constant (shear modulus).
    pub mu: f64,
    /// Height of the flat reference surface.
    pub z0: f64,
    /// Inward normals of the confinement half-spaces (normalized on use).
    pub normals: Vec<[f64; 3]>,
    /// Scale multiplying the transverse forcing profile; defaults to
    /// `epsilon^3`, the thin-shell load regime under which the scaled
    /// solutions stay bounded as `epsilon` shrinks.
    #[serde(default)]
    pub transverse_scale: Option<f64>,
    /// Constant in-plane load density acting on the tangential
    /// displacements.
    #[serde(default)]
    pub in_plane: [f64; 2],
    /// Constant moment density acting on the dual (rotation) fields.
    #[serde(default)]
    pub moments: [f64; 2],
}

impl ShellSection {
    /// Material/geometry parameters as the shell module consumes them.
    pub fn params(&self) -> ShellParams {
        ShellParams {
            epsilon: self.epsilon,
            lambda: self.lambda,
            mu: self.mu,
            z0: self.z0,
        }
    }

    /// Builds the confinement constraints (normalizing the normals).
    pub fn constraints(&self) -> Result<Vec<HalfSpaceConstraint>, ConfigError> {
        self.normals
            .iter()
            .map(|&q| {
                HalfSpaceConstraint::new(q)
                    .map_err(|e| invalid(format!("shell normal {q:?}: {e}")))
            })
            .collect()
    }

    /// Effective transverse load scale (`epsilon^3` unless overridden).
    pub fn load_scale(&self) -> f64 {
        self.transverse_scale
            .unwrap_or_else(|| self.epsilon.powi(3))
    }
}

/// Parameters of a penalty-halving table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaSweepSection {
    /// Starting penalty parameter.
    pub kappa0: f64,
    /// Number of halvings; `halvings + 1` solves, `halvings` error rows.
    pub halvings: usize,
    /// Start each solve from the previous solution instead of zero.
    #[serde(default)]
    pub warm_start: bool,
}

/// Parameters of a mesh Cauchy study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchySection {
    /// Penalty-mesh coupling exponent in `kappa = h^q`; `0 < q < 1/2`.
    pub q: f64,
    /// Finest resolution allowed (power of two, `>= mesh.n`).
    pub n_max: usize,
    /// Stopping tolerance on the successive `H^1` error; defaults per
    /// problem ([`BIHARMONIC_CAUCHY_TOL`] / [`SHELL_CAUCHY_TOL`]).
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_force_scale() -> f64 {
    1.0
}

/// Parameters of a force sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSweepSection {
    /// Load indices, strictly increasing.
    pub ell: Vec<u64>,
    /// Fixed penalty parameter; exactly one of `kappa` and `q` is set.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Penalty-mesh coupling exponent, used as `kappa = h^q`.
    #[serde(default)]
    pub q: Option<f64>,
    /// Amplitude multiplier applied to every family member.
    #[serde(default = "default_force_scale")]
    pub force_scale: f64,
    /// Margin threshold below which a vertex counts as touching;
    /// defaults to a small multiple of `kappa` (the scale of the
    /// penalty-induced violation at true contact).
    #[serde(default)]
    pub contact_tol: Option<f64>,
}

/// Which quantity the Newton stopping rule tests against `tol`.
///
/// `residual` tests the Euclidean norm of the energy gradient and is
/// the default. `increment` tests the length of the damped Newton step
/// instead: at penalties near 1e-9 and below the gradient is a
/// difference of `1/kappa`-scaled terms whose floating-point
/// cancellation floor exceeds any absolute tolerance, while the step
/// length still contracts to machine level, so the penalty-table and
/// force-sweep presets select `increment`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StoppingSpec {
    /// Stop on the residual norm.
    #[default]
    Residual,
    /// Stop on the Newton step length.
    Increment,
}

impl StoppingSpec {
    /// The solver-level rule this spec selects.
    pub fn rule(self) -> StoppingRule {
        match self {
            StoppingSpec::Residual => StoppingRule::Residual,
            StoppingSpec::Increment => StoppingRule::Increment,
        }
    }
}

/// Newton solver settings exposed to configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonSection {
    /// Stopping tolerance.
    pub tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Quantity tested by the stopping rule.
    pub stopping: StoppingSpec,
}

impl Default for NewtonSection {
    fn default() -> Self {
        NewtonSection {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            stopping: StoppingSpec::Residual,
        }
    }
}

impl NewtonSection {
    /// The solver configuration these settings select.
    pub fn newton_config(&self) -> NewtonConfig {
        NewtonConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            stopping: self.stopping.rule(),
            ..NewtonConfig::default()
        }
    }
}

/// One experiment description: physics plus study sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name used in report headers and output file names; restricted to
    /// `[A-Za-z0-9._-]` so it is always a safe file-name stem.
    pub label: String,
    /// Which problem module to drive.
    pub problem: ProblemKind,
    /// Disk mesh parameters.
    pub mesh: MeshSection,
    /// Transverse forcing specification.
    pub forcing: ForcingSpec,
    /// Scalar obstacle; required for (and exclusive to) `biharmonic`.
    #[serde(default)]
    pub obstacle: Option<ObstacleSpec>,
    /// Shell physics; required for (and exclusive to) `shell`.
    #[serde(default)]
    pub shell: Option<ShellSection>,
    /// Penalty-halving study parameters.
    #[serde(default)]
    pub kappa_sweep: Option<KappaSweepSection>,
    /// Mesh Cauchy study parameters.
    #[serde(default)]
    pub cauchy: Option<CauchySection>,
    /// Force sweep parameters.
    #[serde(default)]
    pub force_sweep: Option<ForceSweepSection>,
    /// Newton solver settings.
    #[serde(default)]
    pub newton: NewtonSection,
    /// Directory for CSV/VTK artifacts; drivers skip file output when
    /// unset.
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    /// Parses and validates a config from JSON text.
    pub fn from_json_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads, parses, and validates a config file.
    pub fn from_path(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::from_json_str(&text)
    }

    /// Checks every schema invariant; drivers call this before running.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.label.is_empty()
            || !self
                .label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(invalid(format!(
                "label must be nonempty over [A-Za-z0-9._-] (got {:?})",
                self.label
            )));
        }
        if self.mesh.n == 0 || !self.mesh.n.is_power_of_two() {
            return Err(invalid(format!(
                "mesh.n must be a power of two (got {})",
                self.mesh.n
            )));
        }
        if !(self.mesh.radius.is_finite() && self.mesh.radius > 0.0) {
            return Err(invalid(format!(
                "mesh.radius must be positive and finite (got {})",
                self.mesh.radius
            )));
        }
        self.forcing.validate()?;
        match self.problem {
            ProblemKind::Biharmonic => {
                match &self.obstacle {
                    Some(spec) => spec.validate()?,
                    None => {
                        return Err(invalid("problem \"biharmonic\" needs an `obstacle` section"))
                    }
                }
                if self.shell.is_some() {
                    return Err(invalid(
                        "problem \"biharmonic\" does not take a `shell` section",
                    ));
                }
            }
            ProblemKind::Shell => {
                let section = self.shell.as_ref().ok_or_else(|| {
                    invalid("problem \"shell\" needs a `shell` section")
                })?;
                if self.obstacle.is_some() {
                    return Err(invalid(
                        "problem \"shell\" does not take an `obstacle` section",
                    ));
                }
                section
                    .params()
                    .validate()
                    .map_err(|e| invalid(format!("shell parameters: {e}")))?;
                let constraints = section.constraints()?;
                if constraints.is_empty() {
                    return Err(invalid("shell normals list must not be empty"));
                }
                if let Some(scale) = section.transverse_scale {
                    if !scale.is_finite() {
                        return Err(invalid("shell transverse_scale must be finite"));
                    }
                }
                let finite2 = |v: [f64; 2]| v[0].is_finite() && v[1].is_finite();
                if !finite2(section.in_plane) || !finite2(section.moments) {
                    return Err(invalid("shell loads must be finite"));
                }
            }
        }
        if let Some(sweep) = &self.kappa_sweep {
            if !(sweep.kappa0.is_finite() && sweep.kappa0 > 0.0) {
                return Err(invalid(format!(
                    "kappa_sweep.kappa0 must be positive (got {})",
                    sweep.kappa0
                )));
            }
            if sweep.halvings < 2 || sweep.halvings > MAX_HALVINGS {
                return Err(invalid(format!(
                    "kappa_sweep.halvings must lie in [2, {MAX_HALVINGS}] (got {})",
                    sweep.halvings
                )));
            }
        }
        if let Some(cauchy) = &self.cauchy {
            if !(cauchy.q > 0.0 && cauchy.q < 0.5) {
                return Err(invalid(format!(
                    "cauchy.q must lie strictly between 0 and 1/2 (got {})",
                    cauchy.q
                )));
            }
            if !cauchy.n_max.is_power_of_two() || cauchy.n_max < self.mesh.n {
                return Err(invalid(format!(
                    "cauchy.n_max must be a power of two >= mesh.n (got {})",
                    cauchy.n_max
                )));
            }
            if let Some(tol) = cauchy.tol {
                if !(tol.is_finite() && tol > 0.0) {
                    return Err(invalid(format!("cauchy.tol must be positive (got {tol})")));
                }
            }
        }
        if let Some(sweep) = &self.force_sweep {
            if sweep.ell.is_empty() {
                return Err(invalid("force_sweep.ell must not be empty"));
            }
            if !sweep.ell.windows(2).all(|w| w[0] < w[1]) {
                return Err(invalid("force_sweep.ell must be strictly increasing"));
            }
            match (sweep.kappa, sweep.q) {
                (Some(kappa), None) => {
                    if !(kappa.is_finite() && kappa > 0.0) {
                        return Err(invalid(format!(
                            "force_sweep.kappa must be positive (got {kappa})"
                        )));
                    }
                }
                (None, Some(q)) => {
                    if !(q > 0.0 && q < 0.5) {
                        return Err(invalid(format!(
                            "force_sweep.q must lie strictly between 0 and 1/2 (got {q})"
                        )));
                    }
                }
                _ => {
                    return Err(invalid(
                        "force_sweep needs exactly one of `kappa` and `q`",
                    ));
                }
            }
            if !(sweep.force_scale.is_finite() && sweep.force_scale > 0.0) {
                return Err(invalid(format!(
                    "force_sweep.force_scale must be positive (got {})",
                    sweep.force_scale
                )));
            }
            if let Some(tol) = sweep.contact_tol {
                if !(tol.is_finite() && tol > 0.0) {
                    return Err(invalid(format!(
                        "force_sweep.contact_tol must be positive (got {tol})"
                    )));
                }
            }
            if matches!(self.forcing, ForcingSpec::Fixed { .. }) {
                return Err(invalid(
                    "force_sweep needs an ell-family forcing; the config carries a fixed profile",
                ));
            }
        }
        if !(self.newton.tol.is_finite() && self.newton.tol > 0.0) {
            return Err(invalid(format!(
                "newton.tol must be positive (got {})",
                self.newton.tol
            )));
        }
        if self.newton.max_iter == 0 {
            return Err(invalid("newton.max_iter must be at least 1"));
        }
        Ok(())
    }

    /// Compact JSON serialization with fields in declaration order; the
    /// hashing basis for [`ExperimentConfig::config_hash`].
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Lowercase-hex SHA-256 of [`ExperimentConfig::canonical_json`].
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The Cauchy tolerance a mesh study runs with: the explicit value
    /// when set, the per-problem default otherwise.
    pub fn cauchy_tol(&self) -> f64 {
        let explicit = self.cauchy.as_ref().and_then(|c| c.tol);
        explicit.unwrap_or(match self.problem {
            ProblemKind::Biharmonic => BIHARMONIC_CAUCHY_TOL,
            ProblemKind::Shell => SHELL_CAUCHY_TOL,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn biharmonic_json() -> String {
        r#"{
            "label": "table-demo",
            "problem": "biharmonic",
            "mesh": { "n": 8 },
            "forcing": { "type": "fixed", "a": 7.5, "c": -0.295, "s": 0.060 },
            "obstacle": { "type": "constant", "value": -1.0 },
            "kappa_sweep": { "kappa0": 1.5e-9, "halvings": 7 }
        }"#
        .to_string()
    }

    fn shell_config() -> ExperimentConfig {
        ExperimentConfig {
            label: "shell-demo".to_string(),
            problem: ProblemKind::Shell,
            mesh: MeshSection { n: 4, radius: 1.0 },
            forcing: ForcingSpec::EllFamily {
                a: 0.5,
                coeff: 0.0059,
            },
            obstacle: None,
            shell: Some(ShellSection {
                epsilon: 1e-3,
                lambda: 0.4,
                mu: 0.012,
                z0: 0.15,
                normals: vec![[0.0, 0.0, 1.0]],
                transverse_scale: None,
                in_plane: [0.0, 0.0],
                moments: [0.0, 0.0],
            }),
            kappa_sweep: None,
            cauchy: None,
            force_sweep: Some(ForceSweepSection {
                ell: vec![0, 2, 5],
                kappa: Some(1e-6),
                q: None,
                force_scale: 100.0,
                contact_tol: None,
            }),
            newton: NewtonSection::default(),
            output_dir: None,
        }
    }

    #[test]
    fn parses_with_defaults_and_round_trips() {
        let config = ExperimentConfig::from_json_str(&biharmonic_json()).unwrap();
        assert!(config.mesh.radius == 1.0, "radius defaults to 1");
        assert!(config.newton.tol == DEFAULT_TOL, "newton tol defaults");
        assert!(
            config.newton.max_iter == DEFAULT_MAX_ITER,
            "newton budget defaults"
        );
        assert!(config.output_dir.is_none(), "output dir defaults to none");
        assert!(!config.kappa_sweep.as_ref().unwrap().warm_start);

        let round = ExperimentConfig::from_json_str(&config.canonical_json()).unwrap();
        assert!(round == config, "canonical json round-trips");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_json_str(&biharmonic_json()).unwrap();
        let b = ExperimentConfig::from_json_str(&biharmonic_json()).unwrap();
        assert!(a.config_hash() == b.config_hash(), "same config same hash");
        assert!(a.config_hash().len() == 64, "sha-256 hex length");
        assert!(
            a.config_hash().chars().all(|c| c.is_ascii_hexdigit()),
            "hex digits only"
        );

        let mut c = a.clone();
        c.kappa_sweep.as_mut().unwrap().kappa0 = 3.0e-9;
        assert!(a.config_hash() != c.config_hash(), "parameter change changes hash");
    }

    #[test]
    fn forcing_family_resolves_members() {
        let family = ForcingSpec::EllFamily {
            a: 0.25,
            coeff: 0.0059,
        };
        let f = family.at_ell(40).unwrap();
        assert!(f.a == 0.25);
        assert!(f.c == -0.0059 * 40.0);
        assert!(f.s == 0.0059 * 40.0);
        let any = family.at_ell(0).unwrap();
        assert!(any.s == 0.0 && any.c == 0.0, "ell = 0 is the zero forcing");
        assert!(family.fixed().is_err(), "family is not a fixed profile");

        let fixed = ForcingSpec::Fixed {
            a: 7.5,
            c: -0.295,
            s: 0.060,
        };
        assert!(fixed.at_ell(1).is_err(), "fixed profile is not a family");
        let f = fixed.fixed().unwrap();
        assert!(f.a == 7.5 && f.c == -0.295 && f.s == 0.060);
    }

    #[test]
    fn rejects_schema_violations() {
        let base = ExperimentConfig::from_json_str(&biharmonic_json()).unwrap();

        let mut bad = base.clone();
        bad.mesh.n = 12;
        assert!(bad.validate().is_err(), "n must be a power of two");

        let mut bad = base.clone();
        bad.label = "has space".to_string();
        assert!(bad.validate().is_err(), "label charset");

        let mut bad = base.clone();
        bad.kappa_sweep.as_mut().unwrap().halvings = 1;
        assert!(bad.validate().is_err(), "halvings lower bound");

        let mut bad = base.clone();
        bad.obstacle = None;
        assert!(bad.validate().is_err(), "biharmonic needs an obstacle");

        let mut bad = base.clone();
        bad.shell = shell_config().shell;
        assert!(bad.validate().is_err(), "shell section rejected on biharmonic");

        let mut bad = base.clone();
        bad.cauchy = Some(CauchySection {
            q: 0.5,
            n_max: 64,
            tol: None,
        });
        assert!(bad.validate().is_err(), "q = 1/2 excluded");

        let mut bad = base;
        bad.cauchy = Some(CauchySection {
            q: 0.3,
            n_max: 4,
            tol: None,
        });
        assert!(bad.validate().is_err(), "n_max below mesh.n");

        let shell = shell_config();
        assert!(shell.validate().is_ok(), "shell base config is valid");

        let mut bad = shell.clone();
        bad.force_sweep.as_mut().unwrap().q = Some(0.3);
        assert!(bad.validate().is_err(), "kappa and q are exclusive");

        let mut bad = shell.clone();
        bad.force_sweep.as_mut().unwrap().ell = vec![0, 5, 5];
        assert!(bad.validate().is_err(), "ell strictly increasing");

        let mut bad = shell.clone();
        bad.forcing = ForcingSpec::Fixed {
            a: 1.0,
            c: 0.0,
            s: 1.0,
        };
        assert!(bad.validate().is_err(), "force sweep needs a family");

        let mut bad = shell;
        bad.shell.as_mut().unwrap().epsilon = 0.0;
        assert!(bad.validate().is_err(), "shell params validated");
    }

    #[test]
    fn unknown_fields_are_parse_errors() {
        let text = biharmonic_json().replace("\"label\"", "\"typo_field\": 1, \"label\"");
        let err = ExperimentConfig::from_json_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)), "typos rejected: {err}");
    }

    #[test]
    fn cauchy_tolerance_defaults_per_problem() {
        let biharmonic = ExperimentConfig::from_json_str(&biharmonic_json()).unwrap();
        assert!(biharmonic.cauchy_tol() == BIHARMONIC_CAUCHY_TOL);
        let shell = shell_config();
        assert!(shell.cauchy_tol() == SHELL_CAUCHY_TOL);
        let mut custom = shell;
        custom.cauchy = Some(CauchySection {
            q: 0.3,
            n_max: 8,
            tol: Some(1e-3),
        });
        assert!(custom.cauchy_tol() == 1e-3, "explicit tolerance wins");
    }
}
