//! `gen-data` and `pareto-toy` writers.

use std::fs;
use std::path::{Path, PathBuf};

use drmoo_core::metrics::{self, FrontierPoint, ToyFrontiers};
use drmoo_core::problems::{self, LinearSpec, ToySpec};

use crate::error::{Error, Result};
use crate::plot::{self, Series};
use crate::trace::fmt_real;

/// Writes the synthetic linear instance as `x1..xn,y1..ym`.
pub fn write_linear_csv(seed: u64, out: &Path) -> Result<()> {
    let inst = problems::gen_linear(&LinearSpec::standard(seed))?;
    let p = &inst.problem;
    let csv_err = |source| Error::Csv {
        path: out.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(out).map_err(csv_err)?;
    let header: Vec<String> = (1..=p.dim())
        .map(|j| format!("x{j}"))
        .chain((1..=p.num_objectives()).map(|i| format!("y{i}")))
        .collect();
    w.write_record(&header).map_err(csv_err)?;
    let features = &p.task(0).features;
    for r in 0..features.rows() {
        let row: Vec<String> = features
            .row(r)
            .iter()
            .copied()
            .chain((0..p.num_objectives()).map(|i| p.task(i).labels[r]))
            .map(fmt_real)
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(out, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyOptions {
    pub std: f64,
    pub draws: usize,
    pub grid: usize,
    pub lambda: f64,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for ToyOptions {
    fn default() -> Self {
        Self {
            std: 0.5,
            draws: 200,
            grid: 401,
            lambda: 1.0,
            seed: 0,
            lo: -1.0,
            hi: 3.0,
        }
    }
}

pub fn toy_frontiers(opts: &ToyOptions) -> Result<ToyFrontiers> {
    let spec = ToySpec::nominal(opts.std, problems::linspace(opts.lo, opts.hi, opts.grid))?;
    Ok(metrics::robust_frontier(&spec, opts.draws, opts.lambda, opts.seed)?)
}

/// Writes `frontier.csv` (`kind,theta,f1,f2`) and `frontier.svg` into `dir`.
pub fn write_toy(opts: &ToyOptions, dir: &Path) -> Result<(ToyFrontiers, Vec<PathBuf>)> {
    let fronts = toy_frontiers(opts)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("frontier.csv");
    let csv_err = |source| Error::Csv {
        path: csv_path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(["kind", "theta", "f1", "f2"]).map_err(csv_err)?;
    for (kind, pts) in [("nominal", &fronts.nominal), ("robust", &fronts.robust)] {
        for p in pts.iter() {
            w.write_record([kind.to_string(), fmt_real(p.theta[0]), fmt_real(p.values[0]), fmt_real(p.values[1])])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let to_series = |label: &str, pts: &[FrontierPoint]| Series {
        label: label.to_string(),
        points: pts.iter().map(|p| (p.values[0], p.values[1])).collect(),
    };
    let svg = plot::render_scatter(
        &[to_series("nominal", &fronts.nominal), to_series("robust", &fronts.robust)],
        "f1",
        "f2",
    )?;
    let svg_path = dir.join("frontier.svg");
    fs::write(&svg_path, svg).map_err(|e| Error::io(&svg_path, e))?;
    Ok((fronts, vec![csv_path, svg_path]))
}
