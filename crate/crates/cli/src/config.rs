//! Run-configuration document and its translation into library objects.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vortex_core::desing::DesingParams;
use vortex_core::dynamics::Scheme;
use vortex_core::equilibrium::{N2Params, SearchParams};
use vortex_core::{Configuration, Domain, GreenBackend, HamiltonianModel, HarmonicTerm, Point, Strengths};

/// Environment variable that replaces the configured output directory.
pub const OUTPUT_ENV: &str = "VORTEX_OUTPUT_DIR";

/// A configuration that could not be read or does not describe a valid run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn invalid(e: impl std::fmt::Display) -> ConfigError {
    ConfigError(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disc {},
    Annulus {
        inner_radius: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        strip_width: Option<f64>,
    },
    /// One `x y` pair per line, in boundary orientation order.
    BoundaryFile {
        path: PathBuf,
        #[serde(default)]
        strip_width: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendSpec {
    /// Closed forms where available, boundary elements otherwise.
    Auto {},
    Disc {},
    Annulus {
        #[serde(default)]
        truncation: Option<usize>,
    },
    Bem {
        panels: usize,
        quadrature: usize,
    },
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Auto {}
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSpec {
    /// `ψ₀(x) = Σₖ (reₖ Re zᵏ + imₖ Im zᵏ)`.
    #[serde(default)]
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenSpec {
    /// Evaluation points; random interior samples when absent.
    pub points: Option<Vec<[f64; 2]>>,
    pub samples: usize,
    /// Relative to the inradius.
    pub margin: f64,
}

impl Default for GreenSpec {
    fn default() -> Self {
        Self {
            points: None,
            samples: 16,
            margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleSpec {
    pub rho: f64,
    pub center: [f64; 2],
    pub resolution: usize,
}

impl Default for CycleSpec {
    fn default() -> Self {
        Self {
            rho: 0.1,
            center: [0.0, 0.0],
            resolution: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSpec {
    pub tol: f64,
    pub max_newton: usize,
    pub candidate_tol: f64,
    pub max_steps: usize,
    /// Records every k-th flow step and writes the paths as CSV.
    pub record_every: Option<usize>,
    /// Multistart count for two vortices.
    pub starts: usize,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let s = SearchParams::default();
        Self {
            tol: s.tol,
            max_newton: s.max_newton,
            candidate_tol: s.candidate_tol,
            max_steps: s.max_steps,
            record_every: None,
            starts: N2Params::default().starts,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    #[default]
    ImplicitMidpoint,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSpec {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: SchemeSpec,
    pub record_every: usize,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 10.0,
            scheme: SchemeSpec::ImplicitMidpoint,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesingSpec {
    pub eps: Vec<f64>,
    pub h: f64,
    pub p: f64,
    pub ball_radius: Option<f64>,
    pub tol: f64,
    pub max_newton: usize,
    /// Also write `x, y, ψ, ω` for every node.
    pub fields: bool,
}

impl Default for DesingSpec {
    fn default() -> Self {
        Self {
            eps: vec![0.1, 0.05],
            h: 1.0 / 128.0,
            p: 2.0,
            ball_radius: None,
            tol: 1e-9,
            max_newton: 60,
            fields: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSpec {
    pub contract_samples: usize,
    pub configurations: usize,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        Self {
            contract_samples: 2000,
            configurations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub backend: BackendSpec,
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub flux: FluxSpec,
    /// Vortex positions for `simulate` and `desingularize`.
    #[serde(default)]
    pub positions: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub green: GreenSpec,
    #[serde(default)]
    pub cycle: CycleSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub dynamics: DynamicsSpec,
    #[serde(default)]
    pub desing: DesingSpec,
    #[serde(default)]
    pub validate: ValidateSpec,
}

/// A parsed configuration with everything the commands need.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub hash: String,
    pub model: HamiltonianModel,
    pub output: PathBuf,
}

fn point(p: &[f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

/// Reads `x y` lines, skipping blanks and `#` comments.
pub fn read_boundary_file(path: &Path) -> Result<Vec<Point>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| ConfigError(format!("{}:{}: {e}", path.display(), n + 1)))?;
        if v.len() != 2 {
            return Err(ConfigError(format!("{}:{}: expected two numbers", path.display(), n + 1)));
        }
        out.push(Point::new(v[0], v[1]));
    }
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(invalid)
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configuration serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn domain(&self, base: &Path) -> Result<Domain, ConfigError> {
        let with_width = |d: Domain, w: Option<f64>| match w {
            Some(w) => d.with_strip_width(w).map_err(invalid),
            None => Ok(d),
        };
        match &self.domain {
            DomainSpec::Disc {} => Ok(Domain::unit_disc()),
            DomainSpec::Annulus { inner_radius } => Domain::annulus(*inner_radius).map_err(invalid),
            DomainSpec::Polygon { vertices, strip_width } => {
                with_width(Domain::panels(vertices.iter().map(point).collect()).map_err(invalid)?, *strip_width)
            }
            DomainSpec::BoundaryFile { path, strip_width } => {
                let pts = read_boundary_file(&base.join(path))?;
                with_width(Domain::panels(pts).map_err(invalid)?, *strip_width)
            }
        }
    }

    pub fn backend(&self, domain: Domain) -> Result<GreenBackend, ConfigError> {
        let mismatch = |kind: &str| ConfigError(format!("{kind} backend needs a {kind} domain"));
        match (&self.backend, &self.domain) {
            (BackendSpec::Auto {}, _) => GreenBackend::for_domain(domain).map_err(invalid),
            (BackendSpec::Disc {}, DomainSpec::Disc {}) => Ok(GreenBackend::disc()),
            (BackendSpec::Disc {}, _) => Err(mismatch("disc")),
            (BackendSpec::Annulus { truncation }, DomainSpec::Annulus { inner_radius }) => match truncation {
                Some(k) => GreenBackend::annulus_truncated(*inner_radius, *k),
                None => GreenBackend::annulus(*inner_radius),
            }
            .map_err(invalid),
            (BackendSpec::Annulus { .. }, _) => Err(mismatch("annulus")),
            (BackendSpec::Bem { panels, quadrature }, _) => {
                GreenBackend::bem(domain, *panels, *quadrature).map_err(invalid)
            }
        }
    }

    pub fn positions(&self) -> Option<Configuration> {
        self.positions
            .as_ref()
            .map(|p| Configuration::new(p.iter().map(point).collect()))
    }

    pub fn cycle_center(&self) -> Point {
        point(&self.cycle.center)
    }

    pub fn search_params(&self) -> SearchParams {
        SearchParams {
            tol: self.flow.tol,
            max_newton: self.flow.max_newton,
            candidate_tol: self.flow.candidate_tol,
            max_steps: self.flow.max_steps,
            record_every: self.flow.record_every,
            seed: self.seed,
        }
    }

    pub fn n2_params(&self) -> N2Params {
        N2Params {
            starts: self.flow.starts,
            tol: self.flow.tol,
            seed: self.seed,
            ..N2Params::default()
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self.dynamics.scheme {
            SchemeSpec::ImplicitMidpoint => Scheme::ImplicitMidpoint,
            SchemeSpec::Rk4 => Scheme::Rk4,
        }
    }

    /// Parameters for each requested ε.
    pub fn desing_params(&self) -> Result<Vec<DesingParams>, ConfigError> {
        let d = &self.desing;
        d.eps
            .iter()
            .map(|&eps| {
                let mut p = DesingParams::new(eps, d.h).map_err(invalid)?.with_exponent(d.p).map_err(invalid)?;
                if let Some(r) = d.ball_radius {
                    p = p.with_ball_radius(r).map_err(invalid)?;
                }
                p.tol = d.tol;
                p.max_newton = d.max_newton;
                Ok(p)
            })
            .collect()
    }

    fn check_values(&self) -> Result<(), ConfigError> {
        let dy = &self.dynamics;
        if !(dy.dt > 0.0 && dy.t_final >= 0.0 && dy.record_every > 0) {
            return Err(ConfigError("dynamics needs dt > 0, t_final ≥ 0 and record_every > 0".into()));
        }
        if self.flow.record_every == Some(0) {
            return Err(ConfigError("flow.record_every must be positive".into()));
        }
        if let Some(p) = &self.positions {
            if p.len() != self.gamma.len() {
                return Err(ConfigError(format!("{} positions for {} strengths", p.len(), self.gamma.len())));
            }
        }
        if self.desing.eps.is_empty() {
            return Err(ConfigError("desing.eps is empty".into()));
        }
        self.desing_params().map(|_| ())
    }

    /// Validates everything and builds the model; `base` resolves relative
    /// boundary-file paths.
    pub fn build(self, base: &Path, output_override: Option<PathBuf>) -> Result<Run, ConfigError> {
        self.check_values()?;
        let backend = self.backend(self.domain(base)?)?;
        let strengths = Strengths::new(self.gamma.clone()).map_err(invalid)?;
        let flux = HarmonicTerm::new(self.flux.re.clone(), self.flux.im.clone()).map_err(invalid)?;
        let model = HamiltonianModel::new(backend, strengths).with_flux(flux);
        let output = output_override
            .or_else(|| self.output.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Run {
            hash: self.hash(),
            config: self,
            model,
            output,
        })
    }
}
