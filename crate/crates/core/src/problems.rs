//! Multi-task problem instances.
//!
//! A [`MultiTaskProblem`] holds one labelled dataset per objective over a
//! shared parameter dimension. Losses are per-sample: squared error
//! `(x . theta - y)^2` or logistic cross-entropy.

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dro::SampleBatch;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, Role, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `(x . theta - y)^2`, no one-half factor.
    SquaredError,
    /// `log(1 + exp(z)) - y z` with `z = x . theta`, labels in `{0, 1}`.
    BinaryCrossEntropy,
}

/// Row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Features {
    pub fn new(data: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { data, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// One objective's dataset. Features may be shared between tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub features: Arc<Features>,
    pub labels: Vec<f64>,
    /// Per-sample constant added to the loss.
    pub offsets: Option<Vec<f64>>,
}

impl TaskData {
    pub fn new(features: Arc<Features>, labels: Vec<f64>) -> Self {
        Self {
            features,
            labels,
            offsets: None,
        }
    }

    fn offset(&self, idx: usize) -> f64 {
        self.offsets.as_ref().map_or(0.0, |o| o[idx])
    }
}

/// How a batch is drawn from a task's dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// `B` indices uniformly with replacement.
    WithReplacement(usize),
    /// Every sample once, in dataset order.
    FullPass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTaskProblem {
    dim: usize,
    loss_kind: LossKind,
    tasks: Vec<TaskData>,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl MultiTaskProblem {
    pub fn new(loss_kind: LossKind, tasks: Vec<TaskData>) -> Result<Self> {
        let first = tasks
            .first()
            .ok_or_else(|| Error::invalid("a problem needs at least one objective"))?;
        let dim = first.features.cols();
        if dim == 0 {
            return Err(Error::invalid("parameter dimension must be positive"));
        }
        for t in &tasks {
            if t.features.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: t.features.cols(),
                });
            }
            if t.labels.is_empty() || t.labels.len() != t.features.rows() {
                return Err(Error::invalid("every task needs a nonempty dataset with one label per row"));
            }
            if t.offsets.as_ref().is_some_and(|o| o.len() != t.labels.len()) {
                return Err(Error::invalid("one loss offset per sample"));
            }
        }
        Ok(Self { dim, loss_kind, tasks })
    }

    pub fn num_objectives(&self) -> usize {
        self.tasks.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss_kind
    }

    pub fn task(&self, i: usize) -> &TaskData {
        &self.tasks[i]
    }

    pub fn dataset_size(&self, i: usize) -> usize {
        self.tasks[i].labels.len()
    }

    /// Loss of sample `idx` of task `i`; writes its gradient into `grad`.
    pub fn sample_loss_grad(&self, i: usize, idx: usize, theta: &[f64], grad: &mut [f64]) -> f64 {
        let task = &self.tasks[i];
        let x = task.features.row(idx);
        let y = task.labels[idx];
        let z = linalg::dot(x, theta);
        let (loss, scale) = match self.loss_kind {
            LossKind::SquaredError => {
                let r = z - y;
                (r * r, 2.0 * r)
            }
            LossKind::BinaryCrossEntropy => (softplus(z) - y * z, sigmoid(z) - y),
        };
        for (g, xk) in grad.iter_mut().zip(x) {
            *g = scale * xk;
        }
        loss + task.offset(idx)
    }

    pub fn sample_loss(&self, i: usize, idx: usize, theta: &[f64]) -> f64 {
        let task = &self.tasks[i];
        let z = linalg::dot(task.features.row(idx), theta);
        let y = task.labels[idx];
        let loss = match self.loss_kind {
            LossKind::SquaredError => (z - y) * (z - y),
            LossKind::BinaryCrossEntropy => softplus(z) - y * z,
        };
        loss + task.offset(idx)
    }

    fn batch_from_indices(&self, i: usize, theta: &[f64], idx: impl ExactSizeIterator<Item = usize>) -> SampleBatch {
        let b = idx.len();
        let mut losses = Vec::with_capacity(b);
        let mut grads = vec![0.0; b * self.dim];
        for (k, j) in idx.enumerate() {
            let g = &mut grads[k * self.dim..(k + 1) * self.dim];
            losses.push(self.sample_loss_grad(i, j, theta, g));
        }
        SampleBatch::from_flat(losses, grads, self.dim)
    }

    /// Per-sample losses and gradients of objective `i` at `theta`.
    pub fn sample_batch(&self, i: usize, theta: &[f64], sampling: Sampling, rng: &mut Stream) -> Result<SampleBatch> {
        if i >= self.tasks.len() {
            return Err(Error::invalid(format!("objective index {i} out of range")));
        }
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: theta.len(),
            });
        }
        let n = self.dataset_size(i);
        match sampling {
            Sampling::WithReplacement(0) => Err(Error::invalid("batch size must be at least 1")),
            Sampling::WithReplacement(b) => {
                let idx: Vec<usize> = (0..b).map(|_| rng.random_range(0..n)).collect();
                Ok(self.batch_from_indices(i, theta, idx.into_iter()))
            }
            Sampling::FullPass => Ok(self.batch_from_indices(i, theta, 0..n)),
        }
    }

    /// The whole dataset of objective `i`, in order.
    pub fn full_batch(&self, i: usize, theta: &[f64]) -> SampleBatch {
        self.batch_from_indices(i, theta, 0..self.dataset_size(i))
    }

    pub fn full_batches(&self, theta: &[f64]) -> Vec<SampleBatch> {
        (0..self.num_objectives()).map(|i| self.full_batch(i, theta)).collect()
    }

    /// Empirical Lipschitz bound: the largest per-sample loss-gradient norm
    /// over every task at `theta`.
    pub fn estimate_lipschitz(&self, theta: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim];
        let mut best: f64 = 0.0;
        for i in 0..self.num_objectives() {
            for j in 0..self.dataset_size(i) {
                self.sample_loss_grad(i, j, theta, &mut g);
                best = best.max(linalg::norm(&g));
            }
        }
        best
    }
}

/// Law of one task's ground-truth parameter: `N(mean_scale * theta_1, std^2 I)`.
/// The first task's law ignores `mean_scale` (`theta_1 ~ N(0, std^2 I)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorLaw {
    pub mean_scale: f64,
    pub std: f64,
}

/// Synthetic multi-task linear regression with shared Gaussian inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSpec {
    pub dim: usize,
    pub samples: usize,
    pub anchors: Vec<AnchorLaw>,
    pub noise_std: Vec<f64>,
    pub seed: u64,
}

impl LinearSpec {
    /// Three tasks, `n = 10`, 6000 samples, anchors `N(0, I)`,
    /// `N(-0.2 theta_1, 0.04 I)`, `N(0.5 theta_1, 0.25 I)` and noise
    /// standard deviations 0.2, 0.6, 0.5.
    pub fn standard(seed: u64) -> Self {
        Self {
            dim: 10,
            samples: 6000,
            anchors: vec![
                AnchorLaw { mean_scale: 0.0, std: 1.0 },
                AnchorLaw { mean_scale: -0.2, std: 0.2 },
                AnchorLaw { mean_scale: 0.5, std: 0.5 },
            ],
            noise_std: vec![0.2, 0.6, 0.5],
            seed,
        }
    }

    pub fn num_objectives(&self) -> usize {
        self.anchors.len()
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.samples == 0 {
            return Err(Error::invalid("linear spec needs positive dimension and sample count"));
        }
        if self.anchors.is_empty() || self.anchors.len() != self.noise_std.len() {
            return Err(Error::invalid("one anchor law and one noise level per task"));
        }
        let ok = self.noise_std.iter().chain(self.anchors.iter().map(|a| &a.std)).all(|s| s.is_finite() && *s >= 0.0);
        if !ok {
            return Err(Error::invalid("standard deviations must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// A generated linear instance with its ground truth.
#[derive(Debug, Clone)]
pub struct LinearInstance {
    pub problem: MultiTaskProblem,
    /// `theta^{i,*}` per task.
    pub anchors: Vec<Vec<f64>>,
    /// Realized label noise per task.
    pub noise: Vec<Vec<f64>>,
}

fn gaussian(rng: &mut Stream) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// Draws anchors, inputs and noisy labels; deterministic in `spec.seed`.
pub fn gen_linear(spec: &LinearSpec) -> Result<LinearInstance> {
    spec.validate()?;
    let m = spec.num_objectives();
    let n = spec.dim;

    let mut anchor_rng = rng::stream(spec.seed, Role::Data, 0);
    let first: Vec<f64> = (0..n).map(|_| spec.anchors[0].std * gaussian(&mut anchor_rng)).collect();
    let mut anchors = vec![first.clone()];
    for law in &spec.anchors[1..] {
        anchors.push(first.iter().map(|&t| law.mean_scale * t + law.std * gaussian(&mut anchor_rng)).collect());
    }

    let mut x_rng = rng::stream(spec.seed, Role::Data, 1);
    let data: Vec<f64> = (0..spec.samples * n).map(|_| gaussian(&mut x_rng)).collect();
    let features = Arc::new(Features::new(data, spec.samples, n)?);

    let mut tasks = Vec::with_capacity(m);
    let mut noise = Vec::with_capacity(m);
    for i in 0..m {
        // Streams 2.. of the data role carry per-task noise.
        let mut e_rng = rng::stream(spec.seed, Role::Data, 2 + i);
        let eps: Vec<f64> = (0..spec.samples).map(|_| spec.noise_std[i] * gaussian(&mut e_rng)).collect();
        let labels = (0..spec.samples)
            .map(|r| linalg::dot(features.row(r), &anchors[i]) + eps[r])
            .collect();
        tasks.push(TaskData::new(Arc::clone(&features), labels));
        noise.push(eps);
    }

    Ok(LinearInstance {
        problem: MultiTaskProblem::new(LossKind::SquaredError, tasks)?,
        anchors,
        noise,
    })
}

/// Logistic counterpart of [`gen_linear`]: the same draws with labels
/// `1[x . theta_i + eps > 0]`.
pub fn gen_logistic(spec: &LinearSpec) -> Result<MultiTaskProblem> {
    let inst = gen_linear(spec)?;
    let tasks = (0..inst.problem.num_objectives())
        .map(|i| {
            let t = inst.problem.task(i);
            let labels = t.labels.iter().map(|&y| if y > 0.0 { 1.0 } else { 0.0 }).collect();
            TaskData::new(Arc::clone(&t.features), labels)
        })
        .collect();
    MultiTaskProblem::new(LossKind::BinaryCrossEntropy, tasks)
}

/// Column names of the UCI white-wine quality file.
pub const WINE_COLUMNS: [&str; 12] = [
    "fixed acidity",
    "volatile acidity",
    "citric acid",
    "residual sugar",
    "chlorides",
    "free sulfur dioxide",
    "total sulfur dioxide",
    "density",
    "pH",
    "sulphates",
    "alcohol",
    "quality",
];

/// Quantile levels used to binarize the label-source columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WineThresholds {
    pub quality: f64,
    pub residual_sugar: f64,
    pub alcohol: f64,
}

impl Default for WineThresholds {
    fn default() -> Self {
        Self {
            quality: 0.5,
            residual_sugar: 0.8,
            alcohol: 0.1,
        }
    }
}

/// Smallest observed value `v` whose empirical CDF reaches `level`.
pub fn quantile_threshold(values: &[f64], level: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut k = 0;
    while k < n {
        // Advance over ties so the CDF counts all copies of sorted[k].
        let mut end = k;
        while end + 1 < n && sorted[end + 1] == sorted[k] {
            end += 1;
        }
        if (end + 1) as f64 / n as f64 >= level {
            return sorted[k];
        }
        k = end + 1;
    }
    sorted[n - 1]
}

/// `1` where `value >= quantile_threshold(values, level)`.
pub fn binarize(values: &[f64], level: f64) -> Vec<f64> {
    let v = quantile_threshold(values, level);
    values.iter().map(|&x| if x >= v { 1.0 } else { 0.0 }).collect()
}

/// Three logistic tasks (quality, residual sugar, alcohol) from the UCI
/// white-wine CSV.
///
/// The label-source columns are dropped from the inputs; the remaining nine
/// columns are z-scored and a constant bias feature is appended.
pub fn load_wine_tasks(path: &Path, thresholds: WineThresholds) -> Result<MultiTaskProblem> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::Parse {
        path: display.clone(),
        line: 0,
        message: format!("cannot open: {e}"),
    })?;
    parse_wine(file, &display, thresholds)
}

/// [`load_wine_tasks`] over any reader; `origin` labels error messages.
pub fn parse_wine<R: std::io::Read>(reader: R, origin: &str, thresholds: WineThresholds) -> Result<MultiTaskProblem> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b';')
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    for name in &names {
        if !WINE_COLUMNS.contains(&name.as_str()) {
            return Err(parse_err(1, format!("unknown column {name:?}")));
        }
    }
    let col = |want: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| n == want)
            .ok_or_else(|| parse_err(1, format!("missing column {want:?}")))
    };
    let label_cols = [col("quality")?, col("residual sugar")?, col("alcohol")?];
    let feature_cols: Vec<usize> = (0..names.len()).filter(|c| !label_cols.contains(c)).collect();

    let mut raw: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != names.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", names.len(), rec.len())));
        }
        let row = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line, format!("not a number: {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        raw.push(row);
    }
    if raw.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }

    let rows = raw.len();
    let n = feature_cols.len() + 1;
    let mut data = vec![0.0; rows * n];
    for (k, &c) in feature_cols.iter().enumerate() {
        let mean = raw.iter().map(|r| r[c]).sum::<f64>() / rows as f64;
        let var = raw.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / rows as f64;
        let sd = var.sqrt();
        for (r, row) in raw.iter().enumerate() {
            data[r * n + k] = if sd > 0.0 { (row[c] - mean) / sd } else { 0.0 };
        }
    }
    for r in 0..rows {
        data[r * n + n - 1] = 1.0;
    }
    let features = Arc::new(Features::new(data, rows, n)?);

    let levels = [thresholds.quality, thresholds.residual_sugar, thresholds.alcohol];
    let tasks = label_cols
        .iter()
        .zip(levels)
        .map(|(&c, level)| {
            let column: Vec<f64> = raw.iter().map(|r| r[c]).collect();
            TaskData::new(Arc::clone(&features), binarize(&column, level))
        })
        .collect();
    MultiTaskProblem::new(LossKind::BinaryCrossEntropy, tasks)
}

/// Bi-objective toy: `f1 = (theta - x1)^2 + b1`, `f2 = (theta - x2)^2 + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToySpec {
    pub x1: f64,
    pub x2: f64,
    pub b1: f64,
    pub b2: f64,
    pub perturb_std: f64,
    pub grid: Vec<f64>,
}

impl ToySpec {
    /// Anchors `x1 = 0`, `x2 = 2`, zero offsets, on `grid`.
    pub fn nominal(perturb_std: f64, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invalid("toy grid must be nonempty"));
        }
        if !(perturb_std.is_finite() && perturb_std >= 0.0) {
            return Err(Error::invalid("perturbation std must be nonnegative"));
        }
        Ok(Self {
            x1: 0.0,
            x2: 2.0,
            b1: 0.0,
            b2: 0.0,
            perturb_std,
            grid,
        })
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn toy_objectives(spec: &ToySpec, theta: f64) -> (f64, f64) {
    let f1 = (theta - spec.x1).powi(2) + spec.b1;
    let f2 = (theta - spec.x2).powi(2) + spec.b2;
    (f1, f2)
}

/// Shifts `x1, x2, b1, b2` by independent `N(0, std^2)` draws.
pub fn perturb_toy(spec: &ToySpec, seed: u64) -> ToySpec {
    let mut rng = rng::stream(seed, Role::Perturb, 0);
    let s = spec.perturb_std;
    let mut shift = || s * gaussian(&mut rng);
    ToySpec {
        x1: spec.x1 + shift(),
        x2: spec.x2 + shift(),
        b1: spec.b1 + shift(),
        b2: spec.b2 + shift(),
        perturb_std: spec.perturb_std,
        grid: spec.grid.clone(),
    }
}

/// The toy problem as a two-task dataset: sample `k` of task `i` is the
/// objective under the `k`-th perturbed spec, `(theta - x_i^k)^2 + b_i^k`.
///
/// Draw `k` uses seed `seed + k`, the same draws as
/// [`crate::metrics::robust_frontier`].
pub fn gen_toy_problem(spec: &ToySpec, draws: usize, seed: u64) -> Result<MultiTaskProblem> {
    if draws == 0 {
        return Err(Error::invalid("at least one perturbation draw is required"));
    }
    let specs: Vec<ToySpec> = (0..draws as u64).map(|k| perturb_toy(spec, seed.wrapping_add(k))).collect();
    let ones = Arc::new(Features::new(vec![1.0; draws], draws, 1)?);
    let task = |x: fn(&ToySpec) -> f64, b: fn(&ToySpec) -> f64| TaskData {
        features: Arc::clone(&ones),
        labels: specs.iter().map(x).collect(),
        offsets: Some(specs.iter().map(b).collect()),
    };
    MultiTaskProblem::new(
        LossKind::SquaredError,
        vec![task(|s| s.x1, |s| s.b1), task(|s| s.x2, |s| s.b2)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_equal_anchors_give_zero_loss() {
        let spec = LinearSpec {
            dim: 4,
            samples: 50,
            anchors: vec![
                AnchorLaw { mean_scale: 0.0, std: 1.0 },
                AnchorLaw { mean_scale: 1.0, std: 0.0 },
            ],
            noise_std: vec![0.0, 0.0],
            seed: 3,
        };
        let inst = gen_linear(&spec).unwrap();
        assert_eq!(inst.anchors[0], inst.anchors[1]);
        let theta = &inst.anchors[0];
        for i in 0..2 {
            let b = inst.problem.full_batch(i, theta);
            assert!(b.losses().iter().all(|&l| l < 1e-24));
            assert!(b.max_grad_norm() < 1e-10);
        }
    }

    #[test]
    fn standard_shapes() {
        let inst = gen_linear(&LinearSpec::standard(0)).unwrap();
        let p = &inst.problem;
        assert_eq!(p.num_objectives(), 3);
        assert_eq!(p.dim(), 10);
        for i in 0..3 {
            assert_eq!(p.task(i).features.rows(), 6000);
            assert_eq!(p.task(i).features.cols(), 10);
            assert_eq!(p.task(i).labels.len(), 6000);
        }
        assert!(Arc::ptr_eq(&p.task(0).features, &p.task(2).features));
    }

    #[test]
    fn second_task_noise_variance() {
        let inst = gen_linear(&LinearSpec::standard(11)).unwrap();
        let e = &inst.noise[1];
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (e.len() - 1) as f64;
        assert!((var - 0.36).abs() <= 0.036, "{var}");
    }

    #[test]
    fn gen_linear_is_reproducible() {
        let a = gen_linear(&LinearSpec::standard(5)).unwrap();
        let b = gen_linear(&LinearSpec::standard(5)).unwrap();
        let c = gen_linear(&LinearSpec::standard(6)).unwrap();
        assert_eq!(a.problem, b.problem);
        assert_ne!(a.problem, c.problem);
    }

    #[test]
    fn logistic_single_sample() {
        let f = Arc::new(Features::new(vec![0.0, 0.0, 1.0], 1, 3).unwrap());
        let p = MultiTaskProblem::new(
            LossKind::BinaryCrossEntropy,
            vec![TaskData::new(f, vec![1.0])],
        )
        .unwrap();
        let b = p.full_batch(0, &[0.0; 3]);
        assert!((b.losses()[0] - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(b.grad(0), &[0.0, 0.0, -0.5]);
    }

    #[test]
    fn batch_sampling() {
        let inst = gen_linear(&LinearSpec {
            samples: 20,
            ..LinearSpec::standard(1)
        })
        .unwrap();
        let p = &inst.problem;
        let theta = vec![0.1; 10];
        let mut rng = rng::stream(0, Role::Inner, 0);
        assert!(p.sample_batch(0, &theta, Sampling::WithReplacement(0), &mut rng).is_err());
        let b = p.sample_batch(0, &theta, Sampling::WithReplacement(7), &mut rng).unwrap();
        assert_eq!(b.len(), 7);
        let full = p.sample_batch(0, &theta, Sampling::FullPass, &mut rng).unwrap();
        assert_eq!(full, p.full_batch(0, &theta));
        for j in 0..20 {
            assert_eq!(full.losses()[j], p.sample_loss(0, j, &theta));
        }
    }

    #[test]
    fn quantile_rule() {
        assert_eq!(binarize(&[3.0, 5.0, 6.0, 8.0], 0.5), vec![0.0, 1.0, 1.0, 1.0]);
        assert_eq!(binarize(&[3.0, 5.0, 6.0, 8.0], 0.0), vec![1.0; 4]);
        assert_eq!(binarize(&[3.0, 8.0, 6.0, 8.0], 1.0), vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(quantile_threshold(&[1.0, 1.0, 2.0], 0.5), 1.0);
        assert_eq!(quantile_threshold(&[1.0, 1.0, 2.0], 0.7), 2.0);
    }

    #[test]
    fn toy_examples() {
        let spec = ToySpec::nominal(0.0, vec![0.0]).unwrap();
        assert_eq!(toy_objectives(&spec, 0.0).0, 0.0);
        assert_eq!(toy_objectives(&spec, 2.0).1, 0.0);
        assert_eq!(toy_objectives(&spec, 1.0), (1.0, 1.0));
        assert_eq!(perturb_toy(&spec, 9), spec);

        let noisy = ToySpec::nominal(0.5, vec![0.0]).unwrap();
        assert_ne!(perturb_toy(&noisy, 1), perturb_toy(&noisy, 2));
        assert!(ToySpec::nominal(0.5, vec![]).is_err());
    }

    #[test]
    fn perturbation_std() {
        let spec = ToySpec::nominal(0.5, vec![0.0]).unwrap();
        let shifts: Vec<f64> = (0..10_000).map(|s| perturb_toy(&spec, s).x1).collect();
        let mean = shifts.iter().sum::<f64>() / shifts.len() as f64;
        let sd = (shifts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (shifts.len() - 1) as f64).sqrt();
        assert!((sd - 0.5).abs() <= 0.025, "{sd}");
    }

    #[test]
    fn toy_problem_matches_toy_objectives() {
        let spec = ToySpec::nominal(0.5, vec![0.0]).unwrap();
        let p = gen_toy_problem(&spec, 7, 3).unwrap();
        assert_eq!((p.num_objectives(), p.dim(), p.dataset_size(0)), (2, 1, 7));
        for k in 0..7 {
            let (f1, f2) = toy_objectives(&perturb_toy(&spec, 3 + k as u64), 0.4);
            assert!((p.sample_loss(0, k, &[0.4]) - f1).abs() < 1e-12);
            assert!((p.sample_loss(1, k, &[0.4]) - f2).abs() < 1e-12);
        }
    }
}
