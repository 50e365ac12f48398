//! Run configuration and its validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use lindblad_relax::generator::{GKLSGenerator, JumpTerm, Tabulated, TimeDependent};
use lindblad_relax::operator::ComplexMatrix;
use lindblad_relax::otto::OttoCycleConfig;
use lindblad_relax::Tolerances;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cycles integrated by the `otto` scenario when no grid is given.
pub const DEFAULT_OTTO_CYCLES: usize = 30;
/// Grid samples per period for the default Otto grid and for certification
/// of periodic generators.
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Certify,
    Evolve,
    Otto,
    Commutant,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "certify" => Ok(Self::Certify),
            "evolve" => Ok(Self::Evolve),
            "otto" => Ok(Self::Otto),
            "commutant" => Ok(Self::Commutant),
            other => Err(format!("unknown scenario `{other}` (certify, evolve, otto, commutant)")),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Certify => "certify",
            Self::Evolve => "evolve",
            Self::Otto => "otto",
            Self::Commutant => "commutant",
        })
    }
}

/// Row-major complex matrix, each entry `[re, im]`.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

/// Time profile of a scalar coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// `offset + amplitude · sin(omega t + phase)`.
    Sine {
        offset: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Piecewise constant: `values[k]` on `[times[k−1], times[k])`, so
    /// `values` has one entry more than `times`.
    Steps {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    /// Linear interpolation of `values` sampled every `dt` from `t0`.
    Table {
        t0: f64,
        dt: f64,
        values: Vec<f64>,
        #[serde(default)]
        periodic: bool,
    },
}

/// A schedule, or a bare number for a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Value(f64),
    Schedule(Schedule),
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self::Value(1.0)
    }
}

impl ScheduleSpec {
    fn schedule(&self) -> Schedule {
        match self {
            Self::Value(v) => Schedule::Constant { value: *v },
            Self::Schedule(s) => s.clone(),
        }
    }

    fn numbers(&self) -> Vec<f64> {
        match self.schedule() {
            Schedule::Constant { value } => vec![value],
            Schedule::Sine {
                offset,
                amplitude,
                omega,
                phase,
            } => vec![offset, amplitude, omega, phase],
            Schedule::Steps { mut times, values } => {
                times.extend(values);
                times
            }
            Schedule::Table { t0, dt, mut values, .. } => {
                values.extend([t0, dt]);
                values
            }
        }
    }

    fn problem(&self) -> Option<String> {
        if self.numbers().iter().any(|x| !x.is_finite()) {
            return Some("non-finite schedule parameter".into());
        }
        match self.schedule() {
            Schedule::Steps { times, values } => {
                if values.len() != times.len() + 1 {
                    Some(format!(
                        "steps need {} values for {} times",
                        times.len() + 1,
                        times.len()
                    ))
                } else if times.windows(2).any(|w| !(w[1] > w[0])) {
                    Some("step times must increase".into())
                } else {
                    None
                }
            }
            Schedule::Table { dt, values, .. } => {
                if values.is_empty() {
                    Some("empty table".into())
                } else if !(dt > 0.0) {
                    Some(format!("table step {dt} must be positive"))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Times where the profile is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.schedule() {
            Schedule::Steps { times, .. } => times,
            _ => Vec::new(),
        }
    }

    fn time_dependent(&self) -> TimeDependent<f64> {
        match self.schedule() {
            Schedule::Constant { value } => TimeDependent::Constant(value),
            Schedule::Sine {
                offset,
                amplitude,
                omega,
                phase,
            } => TimeDependent::function(move |t| offset + amplitude * (omega * t + phase).sin()),
            Schedule::Steps { times, values } => TimeDependent::function(move |t| {
                let k = times.partition_point(|&s| s <= t);
                values[k]
            }),
            Schedule::Table {
                t0,
                dt,
                values,
                periodic,
            } => Tabulated::new(t0, dt, values, periodic)
                .expect("validated table")
                .into_time_dependent(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianTerm {
    pub matrix: MatrixSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub operator: MatrixSpec,
    #[serde(default)]
    pub rate: ScheduleSpec,
    #[serde(default)]
    pub tag: Option<String>,
}

/// Inline generator: `H(t) = Σ_k f_k(t) H_k` and jumps `γ_α(t) D[L_α]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub dim: usize,
    #[serde(default)]
    pub hamiltonian: Vec<HamiltonianTerm>,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
    /// Rates may be negative before this time.
    #[serde(default)]
    pub markovian_from: f64,
    /// Declares the generator periodic with this period.
    #[serde(default)]
    pub period: Option<f64>,
}

impl GeneratorSpec {
    pub fn build(&self) -> GKLSGenerator {
        let terms: Vec<(ComplexMatrix, TimeDependent<f64>)> = self
            .hamiltonian
            .iter()
            .map(|h| {
                (
                    to_matrix(&h.matrix).expect("validated matrix"),
                    h.schedule.time_dependent(),
                )
            })
            .collect();
        let mut gen = GKLSGenerator::new(self.dim);
        if !terms.is_empty() {
            let h = if terms.iter().all(|(_, f)| f.is_constant()) {
                let mut sum = ComplexMatrix::zeros(self.dim);
                for (m, f) in &terms {
                    sum = &sum + &m.scale_real(*f.at(0.0));
                }
                TimeDependent::Constant(sum)
            } else {
                let dim = self.dim;
                TimeDependent::function(move |t| {
                    let mut sum = ComplexMatrix::zeros(dim);
                    for (m, f) in &terms {
                        sum = &sum + &m.scale_real(*f.at(t));
                    }
                    sum
                })
            };
            gen = gen.with_hamiltonian(h);
        }
        for j in &self.jumps {
            let op = to_matrix(&j.operator).expect("validated matrix");
            let mut term = JumpTerm::new(TimeDependent::Constant(op), j.rate.time_dependent());
            if let Some(tag) = &j.tag {
                term = term.tagged(tag.clone());
            }
            gen = gen.with_jump(term);
        }
        gen.with_markovian_from(self.markovian_from)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let set: BTreeSet<u64> = self
            .hamiltonian
            .iter()
            .map(|h| &h.schedule)
            .chain(self.jumps.iter().map(|j| &j.rate))
            .flat_map(|s| s.breakpoints())
            .map(f64::to_bits)
            .collect();
        let mut out: Vec<f64> = set.into_iter().map(f64::from_bits).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub count: usize,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { count: 5, seed: 0 }
    }
}

fn default_integrator_tol() -> f64 {
    1e-9
}

/// A complete run, read from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub otto: Option<OttoCycleConfig>,
    /// Operator set of the `commutant` scenario.
    #[serde(default)]
    pub operators: Vec<MatrixSpec>,
    /// Append the adjoint of every operator before the commutant test.
    #[serde(default)]
    pub include_adjoints: bool,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Local error tolerance of the integrator.
    #[serde(default = "default_integrator_tol")]
    pub integrator_tol: f64,
    /// Samples per period on the certification grid of periodic generators.
    #[serde(default)]
    pub certify_samples: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Command-line values that replace configuration entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

/// A broken configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub fn to_matrix(spec: &MatrixSpec) -> Result<ComplexMatrix, String> {
    let rows: Vec<Vec<Complex64>> = spec
        .iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.scenario {
            // keep the implied default engine when leaving the otto scenario
            if self.otto.is_none() && s != Scenario::Commutant {
                self.otto = self.otto_config();
            }
            self.scenario = s;
        }
        if let Some(seed) = o.seed {
            self.ensemble.seed = seed;
        }
        if let Some(n) = o.samples {
            let mut g = self.grid_or_default().unwrap_or(GridSpec {
                t_start: 0.0,
                t_end: 1.0,
                samples: n,
            });
            g.samples = n;
            self.grid = Some(g);
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = Some(dir.clone());
        }
    }

    /// The Otto configuration in effect: the given one, or the default
    /// engine for the `otto` scenario.
    pub fn otto_config(&self) -> Option<OttoCycleConfig> {
        match (&self.otto, self.scenario) {
            (Some(c), _) => Some(c.clone()),
            (None, Scenario::Otto) if self.generator.is_none() => Some(OttoCycleConfig::default()),
            _ => None,
        }
    }

    /// The configured grid, or `DEFAULT_OTTO_CYCLES` periods for Otto runs.
    pub fn grid_or_default(&self) -> Option<GridSpec> {
        self.grid.or_else(|| {
            self.otto_config().map(|c| GridSpec {
                t_start: 0.0,
                t_end: DEFAULT_OTTO_CYCLES as f64 * c.period(),
                samples: DEFAULT_OTTO_CYCLES * DEFAULT_SAMPLES_PER_PERIOD + 1,
            })
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Every broken invariant; empty when the run can start.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |code: &str, message: String| {
            v.push(Violation {
                code: code.into(),
                message,
            })
        };

        if self.scenario == Scenario::Commutant {
            validate_operators(&self.operators, &mut push);
        } else {
            match (&self.generator, self.otto_config()) {
                (Some(_), Some(_)) => push(
                    "generator.conflict",
                    "give either `generator` or `otto`, not both".into(),
                ),
                (None, None) => push(
                    "generator.missing",
                    format!("scenario {} needs `generator` or `otto`", self.scenario),
                ),
                (Some(g), None) => validate_generator(g, self.tolerances.herm, &mut push),
                (None, Some(c)) => {
                    for x in c.validate() {
                        push(x.code, x.message);
                    }
                }
            }
            match self.grid_or_default() {
                None => push("grid.missing", "no time grid given".into()),
                Some(g) => {
                    if !(g.t_start.is_finite() && g.t_end.is_finite()) {
                        push("grid.non_finite", "grid bounds must be finite".into());
                    } else if !(g.t_end > g.t_start) {
                        push(
                            "grid.monotone",
                            format!("t_end {} must exceed t_start {}", g.t_end, g.t_start),
                        );
                    } else if g.t_start < 0.0 && self.otto_config().is_some() {
                        push("grid.monotone", "Otto runs start at t ≥ 0".into());
                    }
                    if g.samples < 2 {
                        push("grid.samples", format!("{} samples, need at least 2", g.samples));
                    }
                }
            }
            if self.scenario != Scenario::Certify && self.ensemble.count < 1 {
                push("ensemble.count", "ensemble needs at least one state".into());
            }
            if self.certify_samples.is_some_and(|n| n < 2) {
                push(
                    "certify.samples",
                    "certification needs at least 2 samples per period".into(),
                );
            }
        }

        let t = &self.tolerances;
        let tols = [
            ("herm", t.herm),
            ("orth", t.orth),
            ("trace", t.trace),
            ("psd", t.psd),
            ("tp", t.tp),
            ("comm", t.comm),
            ("sigma_cut", t.sigma_cut),
            ("env", t.env),
            ("integrator_tol", self.integrator_tol),
        ];
        for (name, x) in tols {
            if !(x.is_finite() && x > 0.0) {
                push(
                    "tolerances.positive",
                    format!("{name} = {x} must be positive and finite"),
                );
            }
        }
        v
    }
}

fn check_matrix(
    spec: &MatrixSpec,
    dim: Option<usize>,
    what: &str,
    push: &mut impl FnMut(&str, String),
) -> Option<ComplexMatrix> {
    if spec.iter().flatten().flatten().any(|x| !x.is_finite()) {
        push("generator.non_finite", format!("{what} has non-finite entries"));
        return None;
    }
    match to_matrix(spec) {
        Err(e) => {
            push("generator.dimension", format!("{what}: {e}"));
            None
        }
        Ok(m) => {
            if let Some(d) = dim.filter(|&d| d != m.dim()) {
                push(
                    "generator.dimension",
                    format!("{what} is {}x{}, expected {d}x{d}", m.dim(), m.dim()),
                );
                return None;
            }
            Some(m)
        }
    }
}

fn validate_generator(g: &GeneratorSpec, herm_tol: f64, push: &mut impl FnMut(&str, String)) {
    if g.dim < 1 {
        push("generator.dimension", "dim must be at least 1".into());
        return;
    }
    for (k, h) in g.hamiltonian.iter().enumerate() {
        if let Some(m) = check_matrix(&h.matrix, Some(g.dim), &format!("hamiltonian[{k}]"), push) {
            if !m.is_hermitian(herm_tol) {
                push("generator.hermitian", format!("hamiltonian[{k}] is not Hermitian"));
            }
        }
        if let Some(p) = h.schedule.problem() {
            push("schedule.invalid", format!("hamiltonian[{k}]: {p}"));
        }
    }
    for (k, j) in g.jumps.iter().enumerate() {
        check_matrix(&j.operator, Some(g.dim), &format!("jumps[{k}]"), push);
        if let Some(p) = j.rate.problem() {
            push("schedule.invalid", format!("jumps[{k}]: {p}"));
        }
    }
    if !g.markovian_from.is_finite() {
        push("generator.non_finite", "markovian_from must be finite".into());
    }
    if let Some(p) = g.period {
        if !(p.is_finite() && p > 0.0) {
            push("generator.period_positive", format!("period {p} must be positive"));
        }
    }
}

fn validate_operators(ops: &[MatrixSpec], push: &mut impl FnMut(&str, String)) {
    if ops.is_empty() {
        push(
            "commutant.operators",
            "scenario commutant needs a non-empty `operators` list".into(),
        );
        return;
    }
    let mut dim = None;
    for (k, op) in ops.iter().enumerate() {
        if let Some(m) = check_matrix(op, dim, &format!("operators[{k}]"), push) {
            dim.get_or_insert(m.dim());
        }
    }
}
