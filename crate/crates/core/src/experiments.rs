//! File-driven batch runs behind the `ursell` binary.
//!
//! A run is described by one JSON file:
//!
//! ```json
//! { "experiment": "figure4", "params": { … }, "output": "fig4.csv", "format": "csv", "seed": 7 }
//! ```
//!
//! Each run produces a [`Table`] (written as CSV or JSON) and a JSON summary.
//! Relative file paths inside `params` are resolved against the directory of
//! the config file.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::closed_form::{ghz_un_asymptotic, ghz_un_exact, xx_un_closed_form};
use crate::correlators::{
    connected_table_partition, un_generating_fd, un_partition_sum, un_recursive, u2, CorrelatorRequest,
    DEFAULT_FD_STEP,
};
use crate::error::{Error, Result};
use crate::geometry::{
    calibrate_velocity, check_bound, critical_distance, BoundParams, CalibrationProbe, Geometry,
};
use crate::quantum::{dense_ceiling, CMatrix, Hamiltonian, Observable, Pauli, PauliString, Propagator, StateVector};
use crate::states::{
    cluster_state, cluster_state_by_evolution, window_observables, ghz, graph_stabilizer_group,
    tripartite_example_state, path_end_y_observables, stabilizer_connected_correlator, GraphSpec,
};

/// Process exit codes of the binary.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const PRECONDITION: i32 = 3;
    pub const BOUND_VIOLATION: i32 = 4;
}

/// Exit code for a failed run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Json(_) | Error::Io(_) => exit_code::CONFIG,
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Resource(_) | Error::Calibration(_) => {
            exit_code::PRECONDITION
        }
        Error::Csv(_) => exit_code::OTHER,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Figure4,
    GhzScan,
    Tripartite,
    Cluster,
    BoundCheck,
    Xcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Figure4,
        Experiment::GhzScan,
        Experiment::Tripartite,
        Experiment::Cluster,
        Experiment::BoundCheck,
        Experiment::Xcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Figure4 => "figure4",
            Experiment::GhzScan => "ghz-scan",
            Experiment::Tripartite => "tripartite",
            Experiment::Cluster => "cluster",
            Experiment::BoundCheck => "bound-check",
            Experiment::Xcheck => "xcheck",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub seed: u64,
    /// Directory that relative paths in `params` refer to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            params: Value::Null,
            output: None,
            format: OutputFormat::Csv,
            seed: 0,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn params<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.params {
            Value::Null => Ok(T::default()),
            v => serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("params: {e}"))),
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn existing_file(&self, p: &Path) -> Result<PathBuf> {
        let full = self.resolve(p);
        if !full.is_file() {
            return Err(Error::Config(format!("referenced file {} does not exist", full.display())));
        }
        Ok(full)
    }
}

/// Times `t_min + k (t_max − t_min)/(points − 1)`, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub t_min: f64,
    #[serde(default = "TimeGrid::default_t_max")]
    pub t_max: f64,
    #[serde(default = "TimeGrid::default_points")]
    pub points: usize,
}

impl TimeGrid {
    fn default_t_max() -> f64 {
        FRAC_PI_2
    }

    fn default_points() -> usize {
        50
    }

    pub fn linspace(t_min: f64, t_max: f64, points: usize) -> Self {
        Self {
            times: None,
            t_min,
            t_max,
            points,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let ts = match &self.times {
            Some(ts) => ts.clone(),
            None => {
                if self.points == 0 {
                    return Err(Error::Config("time grid needs at least one point".into()));
                }
                if self.points == 1 {
                    vec![self.t_min]
                } else {
                    let dt = (self.t_max - self.t_min) / (self.points - 1) as f64;
                    (0..self.points).map(|k| self.t_min + dt * k as f64).collect()
                }
            }
        };
        if ts.is_empty() || ts.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("time grid must be nonempty, finite and non-negative".into()));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("time grid must be strictly increasing".into()));
        }
        Ok(ts)
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::linspace(0.0, Self::default_t_max(), Self::default_points())
    }
}

/// A rectangular result table; `None` cells are written blank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
    Blank(Option<()>),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Blank(_) => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Blank(None), Cell::Num)
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    Value::Object(
                        self.columns
                            .iter()
                            .cloned()
                            .zip(row.iter().map(|c| serde_json::to_value(c).expect("cell")))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub experiment: Experiment,
    pub table: Table,
    pub summary: Value,
    /// Bound violations found (nonzero only for `bound-check`).
    pub violations: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violations > 0 {
            exit_code::BOUND_VIOLATION
        } else {
            exit_code::SUCCESS
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.table.to_csv(),
            OutputFormat::Json => Ok(serde_json::to_string_pretty(&json!({
                "experiment": self.experiment.name(),
                "summary": self.summary,
                "rows": self.table.to_json_rows(),
            }))?),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format)?)?;
        Ok(())
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::Figure4 => run_figure4(&cfg.params()?),
        Experiment::GhzScan => run_ghz_scan(&cfg.params()?),
        Experiment::Tripartite => run_tripartite_demo(),
        Experiment::Cluster => {
            let mut p: ClusterParams = cfg.params()?;
            if let GraphSource::File(path) = &p.graph {
                p.graph = GraphSource::File(cfg.existing_file(path)?);
            }
            run_cluster(&p)
        }
        Experiment::BoundCheck => {
            let mut p: BoundCheckParams = cfg.params()?;
            if let Some(path) = &p.geometry {
                p.geometry = Some(cfg.existing_file(path)?);
            }
            run_bound_check(&p, cfg.seed)
        }
        Experiment::Xcheck => run_xcheck(&cfg.params()?, cfg.seed),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Figure4Params {
    pub n_values: Vec<usize>,
    pub grid: TimeGrid,
    /// Largest `n` given a dense cross-check column.
    pub dense_max_n: usize,
}

impl Default for Figure4Params {
    fn default() -> Self {
        Self {
            n_values: (2..=10).collect(),
            grid: TimeGrid::default(),
            dense_max_n: 10,
        }
    }
}

/// Dense `u_n(Z, …, Z)` of the XX chain started in `|0…0⟩`.
pub fn xx_chain_un_dense(n: usize, t: f64) -> Result<f64> {
    let h = Hamiltonian::xx_chain(n)?;
    let state = h.evolve(&StateVector::basis(n, 0)?, t)?;
    let req = CorrelatorRequest::new(&state, (0..n).map(Observable::z).collect())?;
    un_partition_sum(&req)
}

/// `u_n(Z, …, Z)` of the XX chain against time: closed form for every `n`,
/// dense partition sum up to `dense_max_n`.
pub fn run_figure4(p: &Figure4Params) -> Result<Outcome> {
    let times = p.grid.values()?;
    if p.n_values.is_empty() || p.n_values.iter().any(|&n| n < 2) {
        return Err(Error::Config("n_values must be nonempty with every n >= 2".into()));
    }
    let dense_limit = p.dense_max_n.min(dense_ceiling());
    let mut table = Table::new(&["n", "t", "u_closed_form", "u_dense_or_blank", "abs_diff"]);
    let mut max_diff = 0.0f64;
    for &n in &p.n_values {
        let h = Hamiltonian::xx_chain(n)?;
        for &t in &times {
            let closed = xx_un_closed_form(n, t);
            let dense = if n <= dense_limit {
                let state = h.evolve(&StateVector::basis(n, 0)?, t)?;
                let req = CorrelatorRequest::new(&state, (0..n).map(Observable::z).collect())?;
                Some(un_partition_sum(&req)?)
            } else {
                None
            };
            let diff = dense.map(|d| (d - closed).abs());
            if let Some(d) = diff {
                max_diff = max_diff.max(d);
            }
            table.push(vec![n.into(), t.into(), closed.into(), dense.into(), diff.into()]);
        }
    }
    Ok(Outcome {
        experiment: Experiment::Figure4,
        table,
        summary: json!({ "max_abs_diff": max_diff, "dense_max_n": dense_limit }),
        violations: 0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GhzScanParams {
    pub n_max: usize,
    pub dense_max_n: usize,
}

impl Default for GhzScanParams {
    fn default() -> Self {
        Self {
            n_max: 40,
            dense_max_n: 12,
        }
    }
}

/// Dense partition-sum `u_n(Z, …, Z)` on GHZ(n).
pub fn ghz_un_dense(n: usize) -> Result<f64> {
    let state = ghz(n)?;
    let req = CorrelatorRequest::new(&state, (0..n).map(Observable::z).collect())?;
    un_partition_sum(&req)
}

pub fn run_ghz_scan(p: &GhzScanParams) -> Result<Outcome> {
    if p.n_max < 2 || p.n_max > 60 {
        return Err(Error::Config("n_max must lie in 2..=60".into()));
    }
    let dense_limit = p.dense_max_n.min(dense_ceiling()).min(12);
    let mut table = Table::new(&[
        "n",
        "u_exact",
        "u_dense_or_blank",
        "u_asymptotic_or_blank",
        "dense_over_exact",
        "asymptotic_over_exact",
    ]);
    for n in 2..=p.n_max {
        let exact = ghz_un_exact(n)?;
        let dense = if n <= dense_limit { Some(ghz_un_dense(n)?) } else { None };
        let asym = if n % 2 == 0 && n >= 10 {
            Some(ghz_un_asymptotic(n)?)
        } else {
            None
        };
        let ratio = |x: Option<f64>| x.filter(|_| exact != 0.0).map(|v| v / exact.abs());
        let dense_ratio = dense.filter(|_| exact != 0.0).map(|v| v / exact);
        table.push(vec![
            n.into(),
            exact.into(),
            dense.into(),
            asym.into(),
            dense_ratio.into(),
            ratio(asym).into(),
        ]);
    }
    Ok(Outcome {
        experiment: Experiment::GhzScan,
        table,
        summary: json!({ "n_max": p.n_max, "dense_max_n": dense_limit }),
        violations: 0,
    })
}

/// Tripartite and bipartite `Z` correlators of the three-qubit example state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripartiteReport {
    pub u3_partition: f64,
    pub u3_recursive: f64,
    pub u3_finite_difference: f64,
    pub cut_1_23: f64,
    pub cut_2_13: f64,
    pub cut_3_12: f64,
}

pub fn tripartite_report() -> Result<TripartiteReport> {
    let psi = tripartite_example_state();
    let zs: Vec<Observable> = (0..3).map(Observable::z).collect();
    let req = CorrelatorRequest::new(&psi, zs)?;
    let zz = |a: usize, b: usize| Observable::from(PauliString::from_pairs(&[(a, Pauli::Z), (b, Pauli::Z)]).expect("distinct"));
    Ok(TripartiteReport {
        u3_partition: un_partition_sum(&req)?,
        u3_recursive: un_recursive(&req)?,
        u3_finite_difference: un_generating_fd(&req, DEFAULT_FD_STEP)?,
        cut_1_23: u2(&psi, &Observable::z(0), &zz(1, 2))?,
        cut_2_13: u2(&psi, &Observable::z(1), &zz(0, 2))?,
        cut_3_12: u2(&psi, &Observable::z(2), &zz(0, 1))?,
    })
}

pub fn run_tripartite_demo() -> Result<Outcome> {
    let r = tripartite_report()?;
    let mut table = Table::new(&["quantity", "value"]);
    for (name, v) in [
        ("u3_partition", r.u3_partition),
        ("u3_recursive", r.u3_recursive),
        ("u3_finite_difference", r.u3_finite_difference),
        ("u2_cut_1_23", r.cut_1_23),
        ("u2_cut_2_13", r.cut_2_13),
        ("u2_cut_3_12", r.cut_3_12),
    ] {
        table.push(vec![name.into(), v.into()]);
    }
    Ok(Outcome {
        experiment: Experiment::Tripartite,
        table,
        summary: serde_json::to_value(&r)?,
        violations: 0,
    })
}

/// Where the cluster-state graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Path,
    Windows,
    File(PathBuf),
}

/// Which Pauli pattern is correlated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternSource {
    /// `Y, X, …, X, Y`.
    EndY,
    Windows,
    /// One Pauli letter per site, e.g. `"YXXY"`.
    Letters(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterParams {
    pub graph: GraphSource,
    /// Site count for the built-in graphs (ignored for files).
    pub n: usize,
    pub pattern: Option<PatternSource>,
    /// Largest `n` for which the dense route is also run.
    pub dense_max_n: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            graph: GraphSource::Path,
            n: 6,
            pattern: None,
            dense_max_n: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub n: usize,
    pub edges: usize,
    pub pattern: String,
    pub u_stabilizer: String,
    pub u_dense: Option<f64>,
    pub preparation_time: f64,
    /// Distance up to global phase between the gate and Hamiltonian routes.
    pub preparation_phase_distance: Option<f64>,
}

pub fn cluster_report(p: &ClusterParams) -> Result<ClusterReport> {
    let graph = match &p.graph {
        GraphSource::Path => GraphSpec::path(p.n),
        GraphSource::Windows => GraphSpec::chained_windows(p.n)?,
        GraphSource::File(path) => GraphSpec::load(path)?,
    };
    let n = graph.n;
    let pattern = p.pattern.clone().unwrap_or(match p.graph {
        GraphSource::Windows => PatternSource::Windows,
        _ => PatternSource::EndY,
    });
    let paulis = match &pattern {
        PatternSource::EndY => path_end_y_observables(n)?,
        PatternSource::Windows => window_observables(n)?,
        PatternSource::Letters(s) => {
            let letters: Vec<char> = s.chars().collect();
            if letters.len() != n {
                return Err(Error::Config(format!("pattern {s:?} needs one letter per site ({n})")));
            }
            letters
                .iter()
                .enumerate()
                .map(|(site, &c)| Ok(PauliString::single(site, Pauli::from_char(c)?)))
                .collect::<Result<_>>()?
        }
    };
    let group = graph_stabilizer_group(&graph)?;
    let u_stab = stabilizer_connected_correlator(&group, &paulis)?;
    let (u_dense, phase) = if n <= p.dense_max_n.min(dense_ceiling()).min(10) {
        let state = cluster_state(&graph)?;
        let obs = paulis.iter().cloned().map(Observable::from).collect();
        let u = un_partition_sum(&CorrelatorRequest::new(&state, obs)?)?;
        let via_h = cluster_state_by_evolution(&graph)?;
        (Some(u), Some(crate::quantum::global_phase_distance(&state, &via_h)?))
    } else {
        (None, None)
    };
    Ok(ClusterReport {
        n,
        edges: graph.edges.len(),
        pattern: paulis.iter().map(|p| p.letters()[0].as_char()).collect(),
        u_stabilizer: u_stab.to_string(),
        u_dense,
        preparation_time: graph.preparation_time(),
        preparation_phase_distance: phase,
    })
}

pub fn run_cluster(p: &ClusterParams) -> Result<Outcome> {
    let r = cluster_report(p)?;
    let mut table = Table::new(&[
        "n",
        "edges",
        "pattern",
        "u_stabilizer",
        "u_dense_or_blank",
        "preparation_time",
        "phase_distance_or_blank",
    ]);
    table.push(vec![
        r.n.into(),
        r.edges.into(),
        r.pattern.clone().into(),
        r.u_stabilizer.clone().into(),
        r.u_dense.into(),
        r.preparation_time.into(),
        r.preparation_phase_distance.into(),
    ]);
    Ok(Outcome {
        experiment: Experiment::Cluster,
        table,
        summary: serde_json::to_value(&r)?,
        violations: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    /// Uniform `Σ X_k X_{k+1}`.
    Xx,
    /// Uniform `Σ (X_k X_{k+1} + Y_k Y_{k+1})/2` (non-commuting).
    Xy,
    /// Seeded random nearest-neighbour couplings and fields (see
    /// [`random_nn_hamiltonian`]).
    RandomNn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsSource {
    Calibrate,
    Fixed { c2: f64, v: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundCheckParams {
    pub n: usize,
    pub hamiltonian: HamiltonianKind,
    /// Geometry file; a unit-spaced chain when absent.
    pub geometry: Option<PathBuf>,
    pub params: ParamsSource,
    pub k_values: Vec<usize>,
    /// Supports are `start, start + s, …` for strides `s = 1..=max_stride`.
    pub max_stride: usize,
    pub grid: TimeGrid,
    /// Extra supports whose critical distance is reported (no dynamics).
    pub report_supports: Option<Vec<Vec<usize>>>,
}

impl Default for BoundCheckParams {
    fn default() -> Self {
        Self {
            n: 6,
            hamiltonian: HamiltonianKind::Xx,
            geometry: None,
            params: ParamsSource::Calibrate,
            k_values: (2..=6).collect(),
            max_stride: 1,
            grid: TimeGrid::linspace(0.0, 3.0, 31),
            report_supports: None,
        }
    }
}

/// Random nearest-neighbour Hamiltonian: per bond `J_xx XX + J_yy YY + J_zz ZZ`
/// and per site `h_x X + h_z Z`, all couplings uniform in `[−1, 1]`.
pub fn random_nn_hamiltonian<R: Rng>(n: usize, rng: &mut R) -> Result<Hamiltonian> {
    let mut h = Hamiltonian::new(n);
    for k in 0..n.saturating_sub(1) {
        for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
            let m = letter.matrix();
            h.add_two_site(rng.gen_range(-1.0..=1.0), k, k + 1, m.kron(&m))?;
        }
    }
    for k in 0..n {
        h.add_single_site(rng.gen_range(-1.0..=1.0), k, Pauli::X.matrix())?;
        h.add_single_site(rng.gen_range(-1.0..=1.0), k, Pauli::Z.matrix())?;
    }
    Ok(h)
}

pub fn build_hamiltonian(kind: HamiltonianKind, n: usize, seed: u64) -> Result<Hamiltonian> {
    match kind {
        HamiltonianKind::Xx => Hamiltonian::xx_chain(n),
        HamiltonianKind::Xy => {
            let mut h = Hamiltonian::new(n);
            for k in 0..n.saturating_sub(1) {
                for letter in [Pauli::X, Pauli::Y] {
                    let m = letter.matrix();
                    h.add_two_site(0.5, k, k + 1, m.kron(&m))?;
                }
            }
            Ok(h)
        }
        HamiltonianKind::RandomNn => random_nn_hamiltonian(n, &mut ChaCha8Rng::seed_from_u64(seed)),
    }
}

/// Site sets `{start + s·m : m < k}` inside `n` sites, for every stride `s`.
pub fn strided_supports(n: usize, k: usize, max_stride: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in 1..=max_stride.max(1) {
        if k == 0 || (k - 1) * s >= n {
            continue;
        }
        for start in 0..n - (k - 1) * s {
            out.push((0..k).map(|m| start + s * m).collect());
        }
    }
    out
}

/// Evaluates `u_k(Z, …, Z)` on every strided support against the envelope,
/// after calibrating `(c2, v)` from two-point data when asked to.
pub fn run_bound_check(p: &BoundCheckParams, seed: u64) -> Result<Outcome> {
    let n = p.n;
    if n < 2 {
        return Err(Error::Config("bound check needs n >= 2".into()));
    }
    let times = p.grid.values()?;
    let geometry = match &p.geometry {
        Some(path) => Geometry::load(path)?,
        None => Geometry::chain(n, 1.0)?,
    };
    let h = build_hamiltonian(p.hamiltonian, n, seed)?;
    let (params, calibration) = match &p.params {
        ParamsSource::Fixed { c2, v } => (BoundParams::new(*c2, *v)?, None),
        ParamsSource::Calibrate => {
            let cal = calibrate_velocity(&geometry, &h, &CalibrationProbe::zz(n, times.clone())?)?;
            (cal.params, Some(cal))
        }
    };
    let mut table = Table::new(&["k", "sites", "t", "u", "R", "envelope", "log_slack", "pass"]);
    let initial = StateVector::basis(n, 0)?;
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    let mut evolved = Vec::with_capacity(times.len());
    for &t in &times {
        evolved.push(Propagator::new(&h, t)?.apply(&initial)?);
    }
    for &k in &p.k_values {
        if k < 2 || k > n {
            return Err(Error::Config(format!("k = {k} outside 2..={n}")));
        }
        for sites in strided_supports(n, k, p.max_stride) {
            let supports: Vec<Vec<usize>> = sites.iter().map(|&s| vec![s]).collect();
            let (r, _) = critical_distance(&geometry, &supports)?;
            let obs: Vec<Observable> = sites.iter().map(|&s| Observable::z(s)).collect();
            let mut series = Vec::with_capacity(times.len());
            for (state, &t) in evolved.iter().zip(&times) {
                let req = CorrelatorRequest::new(state, obs.clone())?;
                series.push((t, un_partition_sum(&req)?));
            }
            let report = check_bound(&series, k, r, &params)?;
            violations += report.violations();
            min_slack = min_slack.min(report.min_log_slack);
            let label = sites.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            for pt in &report.points {
                table.push(vec![
                    k.into(),
                    label.clone().into(),
                    pt.t.into(),
                    pt.value.into(),
                    r.into(),
                    pt.envelope.into(),
                    pt.log_slack.into(),
                    pt.pass.into(),
                ]);
            }
        }
    }
    let reported: Vec<Value> = match &p.report_supports {
        Some(list) => {
            let (r, bp) = critical_distance(&geometry, list)?;
            vec![json!({ "supports": list, "R": r, "first": bp.first, "second": bp.second })]
        }
        None => Vec::new(),
    };
    Ok(Outcome {
        experiment: Experiment::BoundCheck,
        table,
        summary: json!({
            "c2": params.c2,
            "v": params.v,
            "calibrated": calibration.is_some(),
            "calibration_samples": calibration.as_ref().map(|c| c.samples.len()),
            "violations": violations,
            "min_log_slack": if min_slack.is_finite() { Some(min_slack) } else { None },
            "critical_distances": reported,
        }),
        violations,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XcheckParams {
    pub trials: usize,
    pub max_sites: usize,
    pub step: f64,
}

impl Default for XcheckParams {
    fn default() -> Self {
        Self {
            trials: 100,
            max_sites: 5,
            step: DEFAULT_FD_STEP,
        }
    }
}

/// Haar-like random state from independent complex Gaussian amplitudes.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> Result<StateVector> {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::from_unnormalized(amps)
}

/// Random Hermitian observable of unit operator norm on `sites`.
pub fn random_observable<R: Rng>(sites: Vec<usize>, rng: &mut R) -> Result<Observable> {
    let dim = 1 << sites.len();
    let mut g = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            g.set(r, c, Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        }
    }
    let herm = (&g + &g.adjoint()).scale(Complex64::new(0.5, 0.0));
    let norm = herm.spectral_norm();
    Observable::dense(sites, herm.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Random product state `⊗ (a|0⟩ + b|1⟩)`.
pub fn random_product_state<R: Rng>(n: usize, rng: &mut R) -> Result<StateVector> {
    let sites: Vec<[Complex64; 2]> = (0..n)
        .map(|_| {
            let a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let b = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            [a / norm, b / norm]
        })
        .collect();
    StateVector::product(&sites)
}

/// Splits a random permutation of `0..n` into `k` nonempty consecutive groups.
fn random_supports<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut sites: Vec<usize> = (0..n).collect();
    sites.shuffle(rng);
    let used = rng.gen_range(k..=n);
    let mut cuts: Vec<usize> = (1..used).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(used)) {
        let mut s = sites[prev..c].to_vec();
        s.sort_unstable();
        out.push(s);
        prev = c;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XcheckReport {
    pub trials: usize,
    pub step: f64,
    pub max_partition_vs_recursive: f64,
    pub max_partition_vs_fd: f64,
    pub fd_tolerance: f64,
    /// Largest `|u_k|` over product-state trials (should vanish).
    pub max_product_state_un: f64,
}

/// Random-state agreement of the three correlator definitions, plus the
/// vanishing of `u_k` on product states.
pub fn xcheck_report(p: &XcheckParams, seed: u64) -> Result<XcheckReport> {
    if p.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if !(2..=6).contains(&p.max_sites) {
        return Err(Error::Config("max_sites must lie in 2..=6".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_rec = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut worst_product = 0.0f64;
    for _ in 0..p.trials {
        let n = rng.gen_range(2..=p.max_sites);
        let k = rng.gen_range(2..=n);
        let supports = random_supports(n, k, &mut rng);
        let obs: Vec<Observable> = supports
            .iter()
            .map(|s| random_observable(s.clone(), &mut rng))
            .collect::<Result<_>>()?;
        let state = random_state(n, &mut rng)?;
        let req = CorrelatorRequest::new(&state, obs.clone())?;
        let part = un_partition_sum(&req)?;
        worst_rec = worst_rec.max((part - un_recursive(&req)?).abs());
        worst_fd = worst_fd.max((part - un_generating_fd(&req, p.step)?).abs());

        let product = random_product_state(n, &mut rng)?;
        let preq = CorrelatorRequest::new(&product, obs)?;
        let table = connected_table_partition(&preq)?;
        // every subset of two or more observables straddles a product cut
        for (mask, u) in table.iter().enumerate() {
            if mask.count_ones() >= 2 {
                worst_product = worst_product.max(u.norm());
            }
        }
    }
    Ok(XcheckReport {
        trials: p.trials,
        step: p.step,
        max_partition_vs_recursive: worst_rec,
        max_partition_vs_fd: worst_fd,
        fd_tolerance: 10.0 * p.step * p.step,
        max_product_state_un: worst_product,
    })
}

pub fn run_xcheck(p: &XcheckParams, seed: u64) -> Result<Outcome> {
    let r = xcheck_report(p, seed)?;
    let mut table = Table::new(&["quantity", "value"]);
    for (name, v) in [
        ("max_partition_vs_recursive", r.max_partition_vs_recursive),
        ("max_partition_vs_fd", r.max_partition_vs_fd),
        ("fd_tolerance", r.fd_tolerance),
        ("max_product_state_un", r.max_product_state_un),
    ] {
        table.push(vec![name.into(), v.into()]);
    }
    Ok(Outcome {
        experiment: Experiment::Xcheck,
        table,
        summary: serde_json::to_value(&r)?,
        violations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_validation() {
        assert_eq!(TimeGrid::linspace(0.0, 1.0, 3).values().unwrap(), vec![0.0, 0.5, 1.0]);
        let bad = TimeGrid {
            times: Some(vec![0.0, 0.5, 0.5]),
            ..TimeGrid::default()
        };
        assert!(matches!(bad.values(), Err(Error::Config(_))));
        assert!(TimeGrid::linspace(0.0, 1.0, 0).values().is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "ghz-scan", "params": {"n_max": 6}, "seed": 3}"#).unwrap();
        assert_eq!(cfg.experiment, Experiment::GhzScan);
        assert_eq!(cfg.seed, 3);
        assert!(ExperimentConfig::from_json(r#"{"experiment": "nope"}"#).is_err());
        let bad = ExperimentConfig::new(Experiment::GhzScan).with_params(json!({"n_maximum": 3}));
        assert!(matches!(run(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), exit_code::CONFIG);
        assert_eq!(exit_code_for(&Error::Calibration("x".into())), exit_code::PRECONDITION);
    }

    #[test]
    fn strided() {
        assert_eq!(strided_supports(4, 2, 1), vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
        assert_eq!(strided_supports(4, 2, 3).len(), 3 + 2 + 1);
        assert!(strided_supports(3, 4, 1).is_empty());
    }

    #[test]
    fn random_supports_are_disjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s = random_supports(5, 3, &mut rng);
            assert_eq!(s.len(), 3);
            let mut all: Vec<usize> = s.concat();
            let len = all.len();
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), len);
            assert!(s.iter().all(|b| !b.is_empty()));
        }
    }

    #[test]
    fn csv_blank_cells() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1usize.into(), None.into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,\n");
    }
}
