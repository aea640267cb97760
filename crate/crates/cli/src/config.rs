//! Scenario files: which system to build, what to run on it, where to write.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use qgc_core::basis::SpectralBasis;
use qgc_core::expr::parse_real;
use qgc_core::graph::{canonical, GraphSpec, VertexList};
use qgc_core::operator::{star_operator, tadpole_operator, CrossCoupling, OperatorSpec, TermSpec};
use qgc_core::{ChainClass, ControlOperator, CouplingMatrix, MetricGraph};

/// Problems with a scenario file. All of them map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot build the system: {0}")]
    Build(#[from] qgc_core::Error),
}

type Result<T> = std::result::Result<T, ConfigError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    AssumptionAudit,
    MomentControl,
    EnergeticTransfer,
    PerturbationScan,
    LieAudit,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::AssumptionAudit => "assumption_audit",
            Self::MomentControl => "moment_control",
            Self::EnergeticTransfer => "energetic_transfer",
            Self::PerturbationScan => "perturbation_scan",
            Self::LieAudit => "lie_audit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphPreset {
    Tadpole,
    Star,
}

/// Either a preset, a separate graph file, or an inline description.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub preset: Option<GraphPreset>,
    /// Edge-pair lengths for the star preset.
    #[serde(default)]
    pub lengths: Vec<String>,
    /// Graph file relative to the scenario file.
    pub file: Option<String>,
    pub edges: Option<toml::Table>,
    pub vertices: Option<VertexList>,
    pub boundary: Option<toml::Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Tadpole,
    StarPairs,
    UniformChain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub family: BasisKind,
    /// Truncation N.
    pub n: usize,
    #[serde(default = "default_head")]
    pub head: String,
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    #[serde(default)]
    pub edges: Vec<String>,
    pub class: Option<ChainClass>,
}

fn default_head() -> String {
    "head".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorPreset {
    Tadpole,
    Star,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub preset: Option<OperatorPreset>,
    pub cross: Option<CrossCoupling>,
    #[serde(default)]
    pub term: Vec<TermSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

/// Raw file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    #[serde(default)]
    description: String,
    kind: ScenarioKind,
    #[serde(default)]
    seed: u64,
    graph: GraphConfig,
    basis: BasisConfig,
    operator: OperatorConfig,
    #[serde(default)]
    params: toml::Table,
    /// Parameters for `qgc audit` on a scenario of another kind.
    audit: Option<toml::Table>,
    #[serde(default)]
    output: OutputConfig,
}

/// Assumption checks: coupling decay, diagonal non-resonance, gaps, boundary
/// bookkeeping and, for two-length stars, class mixing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditParams {
    pub eta: f64,
    pub a: f64,
    /// Threshold under which a diagonal combination counts as vanishing.
    pub diagonal_tol: f64,
    /// Resonance tolerance; integer detection or 1e-9·max μ when absent.
    pub resonance_tol: Option<f64>,
    /// Exponent d̃ of the polynomial gap check.
    pub d_tilde: f64,
    /// Uniform gap δ; skipped when absent.
    pub delta: Option<f64>,
    pub boundary_tol: f64,
    /// Tolerance for cross-class resonances, star bases only.
    pub mixed_class_tol: Option<f64>,
    /// Compare star diagonals with the closed form 27L²√3m²/((36m²−1)π).
    pub star_diagonal_formula: bool,
    pub formula_tol: f64,
}

impl Default for AuditParams {
    fn default() -> Self {
        Self {
            eta: 1.0,
            a: 0.0,
            diagonal_tol: 1e-12,
            resonance_tol: None,
            d_tilde: 0.0,
            delta: None,
            boundary_tol: 1e-8,
            mixed_class_tol: None,
            star_diagonal_formula: false,
            formula_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentParams {
    pub horizon: f64,
    pub epsilons: Vec<f64>,
    /// Direction of the target in the linearized problem as [re, im] pairs
    /// for modes 1..N; (1 + 0.5ik)/k on modes 2..N when empty.
    pub direction: Vec<[f64; 2]>,
    /// Pieces of the control; the smallest admissible count when absent.
    pub samples: Option<usize>,
    pub residual_tol: f64,
    pub ratio_range: [f64; 2],
    pub trajectory_stride: usize,
}

impl Default for MomentParams {
    fn default() -> Self {
        Self {
            horizon: 2.0,
            epsilons: vec![0.04, 0.02, 0.01],
            direction: Vec::new(),
            samples: None,
            residual_tol: 1e-8,
            ratio_range: [3.2, 4.8],
            trajectory_stride: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferParams {
    pub from: usize,
    pub to: usize,
    pub amplitudes: Vec<f64>,
    pub theta: f64,
    /// Rotation angle as an expression; `pi/2` moves the full population.
    pub alpha: String,
    pub steps_per_period: usize,
    pub min_fidelity: f64,
    /// Accepted range of defect(A)/defect(A/2) for consecutive amplitudes
    /// that halve; unchecked when absent.
    pub defect_ratio: Option<[f64; 2]>,
    pub budget_tol: f64,
    pub trajectory_stride: usize,
}

impl Default for TransferParams {
    fn default() -> Self {
        Self {
            from: 1,
            to: 2,
            amplitudes: vec![0.04, 0.02, 0.01],
            theta: 0.0,
            alpha: "pi/2".into(),
            steps_per_period: 20,
            min_fidelity: 0.999,
            defect_ratio: None,
            budget_tol: 1e-9,
            trajectory_stride: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationParams {
    pub grid: Vec<f64>,
    pub tol: f64,
    /// Two constant controls, the second half the first, for the first-order check.
    pub first_order: [f64; 2],
    pub ratio_range: [f64; 2],
}

impl Default for PerturbationParams {
    fn default() -> Self {
        Self {
            grid: vec![-2e-2, -1e-2, -5e-3, 5e-3, 1e-2, 2e-2],
            tol: 1e-12,
            first_order: [1e-2, 5e-3],
            ratio_range: [1.4, 2.6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LieParams {
    pub coupling_tol: f64,
    /// Transition frequencies closer than this times max μ count as equal.
    pub frequency_tol: f64,
    pub targets: usize,
    pub reconstruct_tol: f64,
}

impl Default for LieParams {
    fn default() -> Self {
        Self {
            coupling_tol: 1e-12,
            frequency_tol: 1e-9,
            targets: 20,
            reconstruct_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Audit(AuditParams),
    Moment(MomentParams),
    Transfer(TransferParams),
    Perturbation(PerturbationParams),
    Lie(LieParams),
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub description: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub graph: GraphConfig,
    pub basis: BasisConfig,
    pub operator: OperatorConfig,
    pub params: Params,
    pub audit: AuditParams,
    pub output: OutputConfig,
    /// Directory relative paths in the file resolve against.
    pub base_dir: PathBuf,
}

fn typed<T: for<'de> Deserialize<'de>>(table: toml::Table, what: &str) -> Result<T> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| ConfigError::Parse(format!("[{what}]: {e}")))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be positive, got {v}"))
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        if text.trim().is_empty() {
            return invalid("empty configuration");
        }
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let params = match raw.kind {
            ScenarioKind::AssumptionAudit => Params::Audit(typed(raw.params.clone(), "params")?),
            ScenarioKind::MomentControl => Params::Moment(typed(raw.params, "params")?),
            ScenarioKind::EnergeticTransfer => Params::Transfer(typed(raw.params, "params")?),
            ScenarioKind::PerturbationScan => Params::Perturbation(typed(raw.params, "params")?),
            ScenarioKind::LieAudit => Params::Lie(typed(raw.params, "params")?),
        };
        let audit = match (&raw.audit, &params) {
            (Some(t), _) => typed(t.clone(), "audit")?,
            (None, Params::Audit(p)) => p.clone(),
            (None, _) => AuditParams::default(),
        };
        let cfg = Self {
            name: raw.name,
            description: raw.description,
            kind: raw.kind,
            seed: raw.seed,
            graph: raw.graph,
            basis: raw.basis,
            operator: raw.operator,
            params,
            audit,
            output: raw.output,
            base_dir: base_dir.to_path_buf(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return invalid("name is empty");
        }
        if self.basis.n < 2 {
            return invalid("basis.n must be at least 2");
        }
        validate_audit(&self.audit)?;
        match &self.params {
            Params::Audit(p) => validate_audit(p),
            Params::Moment(p) => {
                positive("horizon", p.horizon)?;
                if p.epsilons.is_empty() {
                    return invalid("epsilons is empty");
                }
                for &e in &p.epsilons {
                    positive("epsilon", e)?;
                }
                if !p.direction.is_empty() && p.direction.len() != self.basis.n {
                    return invalid(format!(
                        "direction has {} entries for N = {}",
                        p.direction.len(),
                        self.basis.n
                    ));
                }
                positive("residual_tol", p.residual_tol)?;
                range("ratio_range", p.ratio_range)
            }
            Params::Transfer(p) => {
                let n = self.basis.n;
                if p.from == 0 || p.to == 0 || p.from > n || p.to > n || p.from == p.to {
                    return invalid(format!("levels {} → {} are not distinct levels of 1..={n}", p.from, p.to));
                }
                if p.amplitudes.is_empty() {
                    return invalid("amplitudes is empty");
                }
                for &a in &p.amplitudes {
                    positive("amplitude", a)?;
                }
                if p.steps_per_period < 20 {
                    return invalid("steps_per_period must be at least 20");
                }
                if !(0.0..=1.0).contains(&p.min_fidelity) {
                    return invalid("min_fidelity must lie in [0, 1]");
                }
                positive("budget_tol", p.budget_tol)?;
                positive("alpha", parse_expr(&p.alpha)?)?;
                if let Some(r) = p.defect_ratio {
                    range("defect_ratio", r)?;
                }
                Ok(())
            }
            Params::Perturbation(p) => {
                if p.grid.is_empty() {
                    return invalid("grid is empty");
                }
                positive("tol", p.tol)?;
                positive("first_order[0]", p.first_order[0])?;
                positive("first_order[1]", p.first_order[1])?;
                range("ratio_range", p.ratio_range)
            }
            Params::Lie(p) => {
                positive("coupling_tol", p.coupling_tol)?;
                positive("frequency_tol", p.frequency_tol)?;
                positive("reconstruct_tol", p.reconstruct_tol)
            }
        }
    }

    /// Graph described by the `[graph]` section.
    pub fn build_graph(&self) -> Result<MetricGraph> {
        let g = &self.graph;
        let inline = g.edges.is_some() || g.vertices.is_some() || g.boundary.is_some();
        let sources = [g.preset.is_some(), g.file.is_some(), inline];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return invalid("[graph] needs exactly one of preset, file or an inline description");
        }
        if let Some(preset) = g.preset {
            return Ok(match preset {
                GraphPreset::Tadpole => canonical::tadpole(),
                GraphPreset::Star if g.lengths.is_empty() => canonical::star_example(),
                GraphPreset::Star => {
                    let l: Vec<&str> = g.lengths.iter().map(String::as_str).collect();
                    canonical::star_pairs(&l)?
                }
            });
        }
        let spec: GraphSpec = if let Some(file) = &g.file {
            let path = self.base_dir.join(file);
            let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
                path: path.display().to_string(),
                source,
            })?;
            toml::from_str(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?
        } else {
            GraphSpec {
                edges: g.edges.clone().unwrap_or_default(),
                vertices: g.vertices.clone().unwrap_or_default(),
                boundary: g.boundary.clone().unwrap_or_default(),
            }
        };
        Ok(MetricGraph::build(&spec)?)
    }

    /// Basis truncated to N modes.
    pub fn build_basis(&self, graph: Arc<MetricGraph>) -> Result<SpectralBasis> {
        let b = &self.basis;
        let basis = match b.family {
            BasisKind::Tadpole => SpectralBasis::tadpole(graph, &b.head, b.n)?,
            BasisKind::StarPairs => {
                let pairs: Vec<(String, String)> = if b.pairs.is_empty() {
                    let count = graph.edges().len() / 2;
                    (0..count)
                        .map(|l| (format!("e{}", 2 * l + 1), format!("e{}", 2 * l + 2)))
                        .collect()
                } else {
                    b.pairs.iter().map(|[p, q]| (p.clone(), q.clone())).collect()
                };
                let refs: Vec<(&str, &str)> = pairs.iter().map(|(p, q)| (p.as_str(), q.as_str())).collect();
                // N per class is always enough for the first N merged modes
                SpectralBasis::star_pairs(graph, &refs, b.n)?.truncated(b.n)?
            }
            BasisKind::UniformChain => {
                let Some(class) = b.class else {
                    return invalid("uniform-chain basis needs `class`");
                };
                let edges: Vec<&str> = b.edges.iter().map(String::as_str).collect();
                SpectralBasis::uniform_chain(graph, &edges, class, b.n)?
            }
        };
        Ok(basis)
    }

    pub fn build_operator(&self, graph: Arc<MetricGraph>) -> Result<ControlOperator> {
        let o = &self.operator;
        match (o.preset, o.term.is_empty()) {
            (Some(_), false) => invalid("[operator] has both a preset and explicit terms"),
            (None, true) => invalid("[operator] needs a preset or at least one term"),
            (Some(OperatorPreset::Tadpole), true) => Ok(tadpole_operator(graph)?),
            (Some(OperatorPreset::Star), true) => {
                Ok(star_operator(graph, o.cross.unwrap_or(CrossCoupling::Symmetrized))?)
            }
            (None, false) => Ok(ControlOperator::from_spec(graph, &OperatorSpec { term: o.term.clone() })?),
        }
    }

    /// Graph, basis, operator and the N×N coupling matrix.
    pub fn build_system(&self) -> Result<System> {
        let graph = Arc::new(self.build_graph()?);
        let basis = self.build_basis(graph.clone())?;
        let op = self.build_operator(graph)?;
        let b = op.assemble_matrix(&basis, basis.len())?;
        Ok(System { basis, op, b })
    }

    /// Output directory: the override, then `[output] dir`, then `out/<name>`.
    pub fn output_dir(&self, over: Option<&Path>) -> PathBuf {
        match (over, &self.output.dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(d)) => PathBuf::from(d),
            (None, None) => PathBuf::from("out").join(&self.name),
        }
    }

    /// Edge lengths as written and as parsed, for the output record.
    pub fn parsed_lengths(&self, graph: &MetricGraph) -> Vec<(String, String, f64)> {
        let written = |id: &str| -> String {
            self.graph
                .edges
                .as_ref()
                .and_then(|t| t.get(id))
                .and_then(|e| e.get("length"))
                .and_then(|l| l.as_str())
                .map(str::to_string)
                .unwrap_or_default()
        };
        graph
            .edges()
            .iter()
            .map(|e| {
                let expr = written(&e.id);
                let expr = if expr.is_empty() {
                    preset_length(&self.graph, &e.id).unwrap_or_else(|| format!("{}", e.length))
                } else {
                    expr
                };
                (e.id.clone(), expr, e.length)
            })
            .collect()
    }
}

fn preset_length(g: &GraphConfig, edge: &str) -> Option<String> {
    match g.preset? {
        GraphPreset::Tadpole => Some(if edge == "head" { "1" } else { "inf" }.into()),
        GraphPreset::Star => {
            let n: usize = edge.strip_prefix('e')?.parse().ok()?;
            let lengths: Vec<String> = if g.lengths.is_empty() {
                vec!["cbrt(2)".into(), "cbrt(5)".into()]
            } else {
                g.lengths.clone()
            };
            lengths.get((n - 1) / 2).cloned()
        }
    }
}

fn range(name: &str, r: [f64; 2]) -> Result<()> {
    if r[0] > 0.0 && r[0] < r[1] && r[1].is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be an increasing pair of positive numbers"))
    }
}

fn validate_audit(p: &AuditParams) -> Result<()> {
    if !(p.eta >= 0.0) {
        return invalid("eta must be non-negative");
    }
    positive("diagonal_tol", p.diagonal_tol)?;
    positive("boundary_tol", p.boundary_tol)?;
    positive("formula_tol", p.formula_tol)?;
    if let Some(t) = p.resonance_tol {
        positive("resonance_tol", t)?;
    }
    if let Some(t) = p.mixed_class_tol {
        positive("mixed_class_tol", t)?;
    }
    if let Some(d) = p.delta {
        positive("delta", d)?;
    }
    if !(p.d_tilde >= 0.0) {
        return invalid("d_tilde must be non-negative");
    }
    Ok(())
}

/// The objects every scenario works on.
pub struct System {
    pub basis: SpectralBasis,
    pub op: ControlOperator,
    pub b: CouplingMatrix,
}

/// Parses an expression such as `pi/2` from a config string field.
pub fn parse_expr(s: &str) -> Result<f64> {
    Ok(parse_real(s)?)
}
