//! Experiment configuration: a TOML document describing the domain, the
//! metrics under test, the sample grid and the tolerances.
//!
//! Every parameter is validated by [`ExperimentConfig::parse`] before any
//! computation runs; errors carry the offending line of the source.

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::metric::{FinslerMetric, SeriesMetric, MAX_SERIES_ORDER};
use crate::norm::{ConvexDomain, MinkowskiNorm};
use crate::sampling::GridSpec;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Norm grammar: `{ kind = "euclidean" }`, `{ kind = "ellipsoid", matrix = [[..], ..] }`,
/// `{ kind = "randers", b = [..] }`, `{ kind = "quartic-perturbed", epsilon = 0.3 }`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NormSpec {
    #[default]
    Euclidean,
    Ellipsoid { matrix: Vec<Vec<f64>> },
    Randers { b: Vec<f64> },
    QuarticPerturbed {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_epsilon() -> f64 {
    0.3
}

impl NormSpec {
    /// Parses one norm table, e.g. `kind = "randers"` and `b = [0.2, 0.0]`.
    pub fn parse(source: &str) -> Result<Self> {
        parse_table(source)
    }

    pub fn build(&self, dim: usize) -> Result<MinkowskiNorm> {
        let norm = match self {
            NormSpec::Euclidean => MinkowskiNorm::euclidean(dim),
            NormSpec::Ellipsoid { matrix } => MinkowskiNorm::ellipsoid(matrix.clone())?,
            NormSpec::Randers { b } => MinkowskiNorm::randers(b.clone())?,
            NormSpec::QuarticPerturbed { epsilon } => MinkowskiNorm::quartic_perturbed(dim, *epsilon)?,
        };
        if norm.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: norm.dim(),
            });
        }
        Ok(norm)
    }
}

/// The strongly convex domain `{phi(x - x_o) < 1}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default)]
    pub norm: NormSpec,
    /// Defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<f64>>,
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> Result<ConvexDomain> {
        let norm = self.norm.build(dim)?;
        let base = self.base_point.clone().unwrap_or_else(|| vec![0.0; dim]);
        ConvexDomain::new(norm, base)
    }
}

/// One `[[metric]]` entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    /// Funk metric of the configured domain. `implicit` forces the implicit
    /// solve even on the unit ball.
    Funk {
        #[serde(default)]
        implicit: bool,
    },
    Hilbert,
    /// `anchor` must be interior; `closed_form` uses the unit-ball formula.
    ShenK0 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor: Option<Vec<f64>>,
        #[serde(default)]
        closed_form: bool,
    },
    /// Lives on the unit ball regardless of the configured domain.
    /// `a` defaults to `(0.3, 0.1, 0, ...)`.
    RandersFunkType {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
    },
    /// Lives on `{phi < 1}` regardless of the configured domain.
    Series {
        #[serde(default)]
        phi: NormSpec,
        #[serde(default)]
        psi: NormSpec,
        #[serde(default = "default_order")]
        order: usize,
    },
    Minkowski {
        #[serde(default)]
        norm: NormSpec,
    },
    NegativeControl,
}

fn default_order() -> usize {
    12
}

impl MetricSpec {
    /// Parses one metric table, e.g. `kind = "shen-k0"` and `anchor = [0.2, 0.0]`.
    pub fn parse(source: &str) -> Result<Self> {
        parse_table(source)
    }

    pub fn label(&self) -> &'static str {
        match self {
            MetricSpec::Funk { implicit: false } => "funk",
            MetricSpec::Funk { implicit: true } => "funk-implicit",
            MetricSpec::Hilbert => "hilbert",
            MetricSpec::ShenK0 { closed_form: false, .. } => "shen-k0",
            MetricSpec::ShenK0 { closed_form: true, .. } => "shen-k0-ball",
            MetricSpec::RandersFunkType { .. } => "randers-funk-type",
            MetricSpec::Series { .. } => "series",
            MetricSpec::Minkowski { .. } => "minkowski",
            MetricSpec::NegativeControl => "negative-control",
        }
    }

    pub fn build(&self, domain: &ConvexDomain) -> Result<FinslerMetric> {
        let dim = domain.dim();
        let need_ball = |what: &str| -> Result<()> {
            if domain.is_unit_ball() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} requires the euclidean unit ball domain")))
            }
        };
        Ok(match self {
            MetricSpec::Funk { implicit: false } => FinslerMetric::funk(domain),
            MetricSpec::Funk { implicit: true } => FinslerMetric::funk_implicit(domain),
            MetricSpec::Hilbert => FinslerMetric::hilbert(domain),
            MetricSpec::ShenK0 {
                anchor,
                closed_form,
            } => {
                let anchor = anchor.clone().unwrap_or_else(|| domain.base_point().to_vec());
                if anchor.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: anchor.len(),
                    });
                }
                if *closed_form {
                    need_ball("shen-k0 with closed_form")?;
                    FinslerMetric::shen_k0_ball(anchor)?
                } else {
                    FinslerMetric::shen_k0(domain, anchor)?
                }
            }
            MetricSpec::RandersFunkType { a } => {
                let a = a.clone().unwrap_or_else(|| {
                    let mut v = vec![0.0; dim];
                    v[0] = 0.3;
                    v[1] = 0.1;
                    v
                });
                if a.len() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        got: a.len(),
                    });
                }
                FinslerMetric::randers_funk_type(a)?
            }
            MetricSpec::Series { phi, psi, order } => {
                if *order > MAX_SERIES_ORDER {
                    return Err(Error::OrderTooHigh {
                        requested: *order,
                        limit: MAX_SERIES_ORDER,
                    });
                }
                FinslerMetric::series(SeriesMetric::new(phi.build(dim)?, psi.build(dim)?, *order)?)?
            }
            MetricSpec::Minkowski { norm } => FinslerMetric::minkowski(norm.build(dim)?),
            MetricSpec::NegativeControl => FinslerMetric::negative_control(dim),
        })
    }

    /// Constant flag curvature the metric is expected to have, if any.
    pub fn target_curvature(&self) -> Option<f64> {
        match self {
            MetricSpec::Funk { .. } | MetricSpec::RandersFunkType { .. } => Some(-0.25),
            MetricSpec::Hilbert => Some(-1.0),
            MetricSpec::ShenK0 { .. } | MetricSpec::Minkowski { .. } => Some(0.0),
            MetricSpec::Series { .. } | MetricSpec::NegativeControl => None,
        }
    }
}

fn default_metrics() -> Vec<Spanned<MetricSpec>> {
    [
        MetricSpec::Funk { implicit: false },
        MetricSpec::Hilbert,
        MetricSpec::ShenK0 {
            anchor: None,
            closed_form: false,
        },
        MetricSpec::RandersFunkType { a: None },
    ]
    .into_iter()
    .map(|m| Spanned::new(0..0, m))
    .collect()
}

/// Absolute bounds on the normalized residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// `|K - target|` on the grid.
    pub flag_curvature: f64,
    /// Same, for the Hilbert metric.
    pub flag_curvature_hilbert: f64,
    pub constant_curvature: f64,
    /// `|R y| / (|y| max(|R|, |y|^2))`.
    pub riemann_y: f64,
    /// `max |R| / F^2` for the R-flat spray `2 F y`.
    pub riemann_flat: f64,
    pub self_adjoint: f64,
    pub rapcsak: f64,
    pub inverse_pde: f64,
    pub funk_pde: f64,
    pub closed_form: f64,
    /// Generic Shen-K0 construction against its unit-ball closed form.
    pub shen_closed_form: f64,
    pub homogeneity: f64,
    pub euler: f64,
    pub straightness: f64,
    pub speed: f64,
    pub series_closed_form: f64,
    /// Series inverse-problem residual must stay below this multiple of the tail.
    pub series_tail_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            flag_curvature: 1e-6,
            flag_curvature_hilbert: 1e-5,
            constant_curvature: 1e-6,
            riemann_y: 1e-9,
            riemann_flat: 1e-8,
            self_adjoint: 1e-7,
            rapcsak: 1e-9,
            inverse_pde: 1e-9,
            funk_pde: 1e-9,
            closed_form: 1e-10,
            shen_closed_form: 1e-9,
            homogeneity: 1e-12,
            euler: 1e-10,
            straightness: 1e-7,
            speed: 1e-7,
            series_closed_form: 1e-8,
            series_tail_factor: 10.0,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            ("flag_curvature", self.flag_curvature),
            ("flag_curvature_hilbert", self.flag_curvature_hilbert),
            ("constant_curvature", self.constant_curvature),
            ("riemann_y", self.riemann_y),
            ("riemann_flat", self.riemann_flat),
            ("self_adjoint", self.self_adjoint),
            ("rapcsak", self.rapcsak),
            ("inverse_pde", self.inverse_pde),
            ("funk_pde", self.funk_pde),
            ("closed_form", self.closed_form),
            ("shen_closed_form", self.shen_closed_form),
            ("homogeneity", self.homogeneity),
            ("euler", self.euler),
            ("straightness", self.straightness),
            ("speed", self.speed),
            ("series_closed_form", self.series_closed_form),
            ("series_tail_factor", self.series_tail_factor),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Series sweep: the `series` command tabulates `orders` at `(x, y)`;
/// `verify` samples `samples` points with `phi(x) <= level`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSpec {
    pub orders: Vec<usize>,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub level: f64,
    pub samples: usize,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec {
            orders: vec![4, 6, 8, 10, 12],
            x: None,
            y: None,
            level: 0.2,
            samples: 20,
        }
    }
}

/// Which spray the `geodesic` command integrates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SprayChoice {
    /// `G^i = F y^i` built from the domain's Funk metric.
    FunkSpray,
    /// Spray induced by `metric[metric_index]`.
    Induced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeodesicSpec {
    pub spray: SprayChoice,
    pub metric_index: usize,
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub t_end: f64,
    pub tol: f64,
    /// Number of random geodesics per spray in `verify`.
    pub count: usize,
    /// Random starts satisfy `phi(x0 - x_o) <= start_level`.
    pub start_level: f64,
}

impl Default for GeodesicSpec {
    fn default() -> Self {
        GeodesicSpec {
            spray: SprayChoice::FunkSpray,
            metric_index: 0,
            x0: None,
            y0: None,
            t_end: 2.0,
            tol: 1e-10,
            count: 20,
            start_level: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: "out".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_metrics", rename = "metric")]
    pub metrics: Vec<Spanned<MetricSpec>>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub series: SeriesSpec,
    #[serde(default)]
    pub geodesic: GeodesicSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_dim() -> usize {
    2
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: default_dim(),
            seed: default_seed(),
            domain: DomainSpec::default(),
            metrics: default_metrics(),
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            series: SeriesSpec::default(),
            geodesic: GeodesicSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

/// Validated, ready-to-run form of a config.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub domain: ConvexDomain,
    pub metrics: Vec<(MetricSpec, FinslerMetric)>,
}

impl ExperimentConfig {
    /// Parses and validates; nothing is computed on failure.
    pub fn parse(source: &str) -> Result<Experiment> {
        let config: ExperimentConfig = parse_table(source)?;
        config.validate(source)
    }

    /// Validates a config built in code.
    pub fn into_experiment(self) -> Result<Experiment> {
        self.validate("")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(self, source: &str) -> Result<Experiment> {
        let at = |span: std::ops::Range<usize>, e: Error| -> Error {
            let line = (span.end > 0).then(|| line_of(source, span.start));
            Error::Config(with_line(source, line, &e.to_string()))
        };
        if !(MIN_DIM..=MAX_DIM).contains(&self.dim) {
            return Err(Error::Config(format!(
                "dim must be between {MIN_DIM} and {MAX_DIM}, got {}",
                self.dim
            )));
        }
        let domain = self.domain.build(self.dim).map_err(|e| {
            // A span is unavailable when the table only exists through a dotted header.
            let line = domain_line(source);
            Error::Config(with_line(source, line, &e.to_string()))
        })?;
        if self.metrics.is_empty() {
            return Err(Error::Config("at least one [[metric]] entry is required".into()));
        }
        let metrics = self
            .metrics
            .iter()
            .map(|m| {
                let spec = m.get_ref().clone();
                let metric = spec.build(&domain).map_err(|e| at(m.span(), e))?;
                Ok((spec, metric))
            })
            .collect::<Result<Vec<_>>>()?;
        self.grid.validate()?;
        self.tolerances.validate()?;
        self.validate_series()?;
        self.validate_geodesic(&domain, &metrics)?;
        Ok(Experiment {
            config: self,
            domain,
            metrics,
        })
    }

    fn validate_series(&self) -> Result<()> {
        let s = &self.series;
        if s.orders.is_empty() || s.orders.iter().any(|&m| m > MAX_SERIES_ORDER) {
            return Err(Error::Config(format!(
                "series.orders must be non-empty with every order <= {MAX_SERIES_ORDER}"
            )));
        }
        if !(s.level > 0.0 && s.level < 1.0) {
            return Err(Error::Config(format!("series.level must lie in (0, 1), got {}", s.level)));
        }
        for (name, v) in [("series.x", &s.x), ("series.y", &s.y)] {
            if let Some(v) = v {
                check_vector(name, v, self.dim)?;
            }
        }
        Ok(())
    }

    fn validate_geodesic(&self, domain: &ConvexDomain, metrics: &[(MetricSpec, FinslerMetric)]) -> Result<()> {
        let g = &self.geodesic;
        if !(g.t_end > 0.0 && g.t_end.is_finite()) {
            return Err(Error::Config(format!("geodesic.t_end must be positive, got {}", g.t_end)));
        }
        if !(g.tol > 0.0 && g.tol < 1.0) {
            return Err(Error::Config(format!("geodesic.tol must lie in (0, 1), got {}", g.tol)));
        }
        if !(g.start_level > 0.0 && g.start_level < 1.0) {
            return Err(Error::Config(format!(
                "geodesic.start_level must lie in (0, 1), got {}",
                g.start_level
            )));
        }
        if g.spray == SprayChoice::Induced && g.metric_index >= metrics.len() {
            return Err(Error::Config(format!(
                "geodesic.metric_index {} out of range ({} metrics)",
                g.metric_index,
                metrics.len()
            )));
        }
        let spray_domain = match g.spray {
            SprayChoice::FunkSpray => domain,
            SprayChoice::Induced => metrics[g.metric_index].1.domain(),
        };
        if let Some(x0) = &g.x0 {
            check_vector("geodesic.x0", x0, self.dim)?;
            spray_domain
                .require_interior(x0)
                .map_err(|e| Error::Config(format!("geodesic.x0: {e}")))?;
        }
        if let Some(y0) = &g.y0 {
            check_vector("geodesic.y0", y0, self.dim)?;
            if y0.iter().all(|&c| c == 0.0) {
                return Err(Error::Config("geodesic.y0 must be nonzero".into()));
            }
        }
        Ok(())
    }
}

fn check_vector(name: &str, v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::Config(format!("{name} has length {}, expected {dim}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::Config(format!("{name} must be finite")));
    }
    Ok(())
}

/// Deserializes a standalone TOML table, reporting errors like
/// [`ExperimentConfig::parse`].
fn parse_table<T: serde::de::DeserializeOwned>(source: &str) -> Result<T> {
    toml::from_str(source).map_err(|e| {
        let line = e.span().map(|s| line_of(source, s.start));
        Error::Config(with_line(source, line, e.message()))
    })
}

/// First line that opens or assigns the top-level `domain` table.
fn domain_line(source: &str) -> Option<usize> {
    source
        .lines()
        .position(|l| {
            let t = l.trim_start();
            t.starts_with("[domain") || t.starts_with("domain")
        })
        .map(|i| i + 1)
}

fn line_of(source: &str, offset: usize) -> usize {
    source.as_bytes()[..offset.min(source.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

fn with_line(source: &str, line: Option<usize>, message: &str) -> String {
    // Errors at end of input point one past the final newline.
    let line = line.map(|l| l.min(source.lines().count()));
    match line.and_then(|l| source.lines().nth(l.checked_sub(1)?).map(|text| (l, text))) {
        Some((l, text)) => format!("line {l}: {}: {message}", text.trim()),
        None => message.trim().to_string(),
    }
}
