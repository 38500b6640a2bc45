//! Experiment configuration files.
//!
//! ```text
//! # keys before the first section are shared by every run
//! output_dir = runs/e1
//! seeds = 0, 1, 2
//!
//! [run.dl]
//! problem = linear
//! solver = double_loop
//! alpha = 5e-5
//! ```
//!
//! A file without sections is a single run named `main`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use drmoo_core::solvers::{BaselineConfig, DoubleClipConfig, DoubleLoopConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

type Parsed<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Linear,
    Wine,
    Toy,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Linear => "linear",
            ProblemKind::Wine => "wine",
            ProblemKind::Toy => "toy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverSpec {
    DoubleLoop(DoubleLoopConfig),
    DoubleClip(DoubleClipConfig),
    Mgda(BaselineConfig),
    Modo(BaselineConfig),
}

impl SolverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::DoubleLoop(_) => "double_loop",
            SolverSpec::DoubleClip(_) => "double_clip",
            SolverSpec::Mgda(_) => "mgda",
            SolverSpec::Modo(_) => "modo",
        }
    }

    /// The same solver with its seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        match &mut s {
            SolverSpec::DoubleLoop(c) => c.seed = seed,
            SolverSpec::DoubleClip(c) => c.seed = seed,
            SolverSpec::Mgda(c) | SolverSpec::Modo(c) => c.seed = seed,
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzSetting {
    /// Largest per-sample gradient norm at `theta = 0`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub problem: ProblemKind,
    pub solver: SolverSpec,
    pub lambda: f64,
    pub lipschitz: LipschitzSetting,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Seed of the synthetic data (linear inputs, toy perturbations).
    pub data_seed: u64,
    pub wine_path: Option<PathBuf>,
    pub surrogate_every: usize,
    pub record_wall_clock: bool,
    pub plot: bool,
    pub toy_std: f64,
    pub toy_draws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub runs: Vec<RunConfig>,
}

pub const DEFAULT_LAMBDA: f64 = 0.8;

const COMMON_KEYS: &[&str] = &[
    "problem",
    "solver",
    "lambda",
    "G",
    "seeds",
    "output_dir",
    "data_seed",
    "wine_path",
    "surrogate_every",
    "record_wall_clock",
    "plot",
    "toy_std",
    "toy_draws",
    "T",
];
const DOUBLE_LOOP_KEYS: &[&str] = &["D", "B", "alpha", "beta", "gamma", "rho"];
const DOUBLE_CLIP_KEYS: &[&str] = &["N1", "N2", "beta", "gamma", "rho", "c1", "c2", "f1", "f2"];
const BASELINE_KEYS: &[&str] = &["B", "alpha", "beta", "rho"];

fn is_known(key: &str) -> bool {
    [COMMON_KEYS, DOUBLE_LOOP_KEYS, DOUBLE_CLIP_KEYS, BASELINE_KEYS]
        .iter()
        .any(|set| set.contains(&key))
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

pub fn parse_config(text: &str) -> Parsed<ExperimentConfig> {
    let mut shared = Section {
        name: "main".into(),
        line: 1,
        ..Section::default()
    };
    let mut runs: Vec<Section> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let inner = header
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(line, "unterminated section header"))?;
            let name = inner
                .trim()
                .strip_prefix("run.")
                .map(str::trim)
                .filter(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
                .ok_or_else(|| ConfigError::new(line, format!("expected [run.NAME], found [{inner}]")))?;
            if runs.iter().any(|r| r.name == name) {
                return Err(ConfigError::new(line, format!("duplicate run {name:?}")));
            }
            runs.push(Section {
                name: name.to_string(),
                line,
                ..Section::default()
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::new(line, format!("expected `key = value`, found {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if !is_known(key) {
            return Err(ConfigError::new(line, format!("unknown key {key:?}")));
        }
        if value.is_empty() {
            return Err(ConfigError::new(line, format!("missing value for {key:?}")));
        }
        let target = runs.last_mut().unwrap_or(&mut shared);
        let entry = Entry {
            value: value.to_string(),
            line,
        };
        if target.entries.insert(key.to_string(), entry).is_some() {
            return Err(ConfigError::new(line, format!("duplicate key {key:?}")));
        }
    }

    if runs.is_empty() {
        let run = build_run(&shared.name, shared.line, &shared.entries)?;
        return Ok(ExperimentConfig { runs: vec![run] });
    }
    let runs = runs
        .iter()
        .map(|sec| {
            let mut merged = shared.entries.clone();
            merged.extend(sec.entries.clone());
            build_run(&sec.name, sec.line, &merged)
        })
        .collect::<Parsed<Vec<_>>>()?;
    Ok(ExperimentConfig { runs })
}

struct Fields<'a> {
    entries: &'a BTreeMap<String, Entry>,
}

impl Fields<'_> {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn parse<T>(&self, key: &str, kind: &str, f: impl Fn(&str) -> Option<T>) -> Parsed<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .ok_or_else(|| ConfigError::new(e.line, format!("{key} must be {kind}, found {:?}", e.value))),
        }
    }

    fn real(&self, key: &str) -> Parsed<Option<f64>> {
        self.parse(key, "a finite real", |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn count(&self, key: &str) -> Parsed<Option<usize>> {
        self.parse(key, "a nonnegative integer", |v| v.parse::<usize>().ok())
    }

    fn flag(&self, key: &str) -> Parsed<Option<bool>> {
        self.parse(key, "true or false", |v| match v {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

}

fn set<T>(slot: &mut T, value: Parsed<Option<T>>) -> Parsed<()> {
    if let Some(v) = value? {
        *slot = v;
    }
    Ok(())
}

fn parse_seeds(v: &str) -> Option<Vec<u64>> {
    if let Some((a, b)) = v.split_once("..") {
        let (a, b) = (a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?);
        return (a < b).then(|| (a..b).collect());
    }
    let seeds = v
        .split(',')
        .map(|s| s.trim().parse::<u64>().ok())
        .collect::<Option<Vec<_>>>()?;
    (!seeds.is_empty()).then_some(seeds)
}

fn build_run(name: &str, header_line: usize, entries: &BTreeMap<String, Entry>) -> Parsed<RunConfig> {
    let f = Fields { entries };
    let missing: Vec<&str> = ["problem", "solver"]
        .into_iter()
        .filter(|k| f.raw(k).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::new(
            header_line,
            format!("run {name:?} is missing required keys: {}", missing.join(", ")),
        ));
    }

    let p = f.raw("problem").expect("checked above");
    let problem = match p.value.as_str() {
        "linear" => ProblemKind::Linear,
        "wine" => ProblemKind::Wine,
        "toy" => ProblemKind::Toy,
        other => {
            return Err(ConfigError::new(
                p.line,
                format!("problem must be linear, wine or toy, found {other:?}"),
            ))
        }
    };
    let s = f.raw("solver").expect("checked above");
    let allowed = match s.value.as_str() {
        "double_loop" => DOUBLE_LOOP_KEYS,
        "double_clip" => DOUBLE_CLIP_KEYS,
        "mgda" | "modo" => BASELINE_KEYS,
        other => {
            return Err(ConfigError::new(
                s.line,
                format!("solver must be double_loop, double_clip, mgda or modo, found {other:?}"),
            ))
        }
    };
    for (key, e) in entries {
        if !COMMON_KEYS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
            return Err(ConfigError::new(
                e.line,
                format!("key {key:?} does not apply to solver {}", s.value),
            ));
        }
    }

    let linear = problem != ProblemKind::Wine;
    let solver = match s.value.as_str() {
        "double_loop" => {
            let mut c = if linear {
                DoubleLoopConfig::linear_defaults(0)
            } else {
                DoubleLoopConfig::wine_defaults(0)
            };
            set(&mut c.iterations, f.count("T"))?;
            set(&mut c.inner_iterations, f.count("D"))?;
            set(&mut c.batch_size, f.count("B"))?;
            set(&mut c.alpha, f.real("alpha"))?;
            set(&mut c.beta, f.real("beta"))?;
            set(&mut c.gamma, f.real("gamma"))?;
            set(&mut c.rho, f.real("rho"))?;
            SolverSpec::DoubleLoop(c)
        }
        "double_clip" => {
            let mut c = if linear {
                DoubleClipConfig::linear_defaults(0)
            } else {
                DoubleClipConfig::wine_defaults(0)
            };
            set(&mut c.iterations, f.count("T"))?;
            set(&mut c.n1, f.count("N1"))?;
            set(&mut c.n2, f.count("N2"))?;
            set(&mut c.beta, f.real("beta"))?;
            set(&mut c.gamma, f.real("gamma"))?;
            set(&mut c.rho, f.real("rho"))?;
            set(&mut c.c1, f.real("c1"))?;
            set(&mut c.c2, f.real("c2"))?;
            set(&mut c.f1, f.real("f1"))?;
            set(&mut c.f2, f.real("f2"))?;
            SolverSpec::DoubleClip(c)
        }
        name => {
            let modo = name == "modo";
            let mut c = match (linear, modo) {
                (true, false) => BaselineConfig::linear_mgda(0),
                (true, true) => BaselineConfig::linear_modo(0),
                (false, false) => BaselineConfig::wine_mgda(0),
                (false, true) => BaselineConfig::wine_modo(0),
            };
            set(&mut c.iterations, f.count("T"))?;
            set(&mut c.batch_size, f.count("B"))?;
            set(&mut c.alpha, f.real("alpha"))?;
            set(&mut c.beta, f.real("beta"))?;
            set(&mut c.rho, f.real("rho"))?;
            if modo {
                SolverSpec::Modo(c)
            } else {
                SolverSpec::Mgda(c)
            }
        }
    };

    let lipschitz = match f.raw("G") {
        None => LipschitzSetting::Auto,
        Some(e) if e.value == "auto" => LipschitzSetting::Auto,
        Some(e) => match e.value.parse::<f64>() {
            Ok(g) if g.is_finite() && g > 0.0 => LipschitzSetting::Fixed(g),
            _ => {
                return Err(ConfigError::new(
                    e.line,
                    format!("G must be `auto` or a positive real, found {:?}", e.value),
                ))
            }
        },
    };

    let mut run = RunConfig {
        name: name.to_string(),
        problem,
        solver,
        lambda: DEFAULT_LAMBDA,
        lipschitz,
        seeds: vec![0],
        output_dir: PathBuf::from("runs"),
        data_seed: 0,
        wine_path: None,
        surrogate_every: 10,
        record_wall_clock: false,
        plot: false,
        toy_std: 0.5,
        toy_draws: 200,
    };
    set(&mut run.lambda, f.real("lambda"))?;
    set(&mut run.seeds, f.parse("seeds", "a seed list like `0, 1, 2` or `0..5`", parse_seeds))?;
    set(&mut run.output_dir, Ok(f.raw("output_dir").map(|e| PathBuf::from(&e.value))))?;
    set(&mut run.data_seed, f.parse("data_seed", "an unsigned integer", |v| v.parse().ok()))?;
    run.wine_path = f.raw("wine_path").map(|e| PathBuf::from(&e.value));
    set(&mut run.surrogate_every, f.count("surrogate_every"))?;
    set(&mut run.record_wall_clock, f.flag("record_wall_clock"))?;
    set(&mut run.plot, f.flag("plot"))?;
    set(&mut run.toy_std, f.real("toy_std"))?;
    set(&mut run.toy_draws, f.count("toy_draws"))?;

    let line_of = |key: &str| f.raw(key).map_or(header_line, |e| e.line);
    if run.lambda.is_nan() || run.lambda <= 0.0 {
        return Err(ConfigError::new(line_of("lambda"), "lambda must be positive"));
    }
    if run.toy_std < 0.0 {
        return Err(ConfigError::new(line_of("toy_std"), "toy_std must be nonnegative"));
    }
    if run.toy_draws == 0 {
        return Err(ConfigError::new(line_of("toy_draws"), "toy_draws must be at least 1"));
    }
    let valid = match &run.solver {
        SolverSpec::DoubleLoop(c) => c.validate(),
        SolverSpec::DoubleClip(c) => c.validate(),
        SolverSpec::Mgda(c) | SolverSpec::Modo(c) => c.validate(),
    };
    valid.map_err(|e| ConfigError::new(header_line, format!("run {name:?}: {e}")))?;
    Ok(run)
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} / {}, lambda={}, seeds={:?})",
            self.name,
            self.problem.name(),
            self.solver.name(),
            self.lambda,
            self.seeds
        )
    }
}
