use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use opinion_lab::distributions::{
    w1_empirical, w1_empirical_grid, w1_grid, EmpiricalDistribution, GridDensity,
};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::table::{parse_cell, write_atomic, Format, Table, TableWriter};
use crate::CliError;

/// Population law at one saved time.
#[derive(Debug, Clone)]
pub enum Law {
    Samples(EmpiricalDistribution),
    Grid(GridDensity),
}

impl Law {
    fn w1(&self, other: &Law) -> Result<f64, CliError> {
        Ok(match (self, other) {
            (Law::Samples(a), Law::Samples(b)) => w1_empirical(a, b),
            (Law::Samples(a), Law::Grid(g)) | (Law::Grid(g), Law::Samples(a)) => {
                w1_empirical_grid(a, g)
            }
            (Law::Grid(f), Law::Grid(g)) => {
                w1_grid(f, g).map_err(|e| CliError::Mismatch(e.to_string()))?
            }
        })
    }
}

/// Saved frames of one run: `(step, t, law per population)`.
pub struct Frames {
    pub populations: Vec<String>,
    pub frames: Vec<(usize, f64, Vec<Law>)>,
}

fn data_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Data {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Reads the population laws of a finished run. Micro runs pool all trials.
pub fn load_frames(dir: &Path) -> Result<Frames, CliError> {
    let manifest = RunManifest::read(dir)?;
    let populations = manifest.populations.clone();
    let index = |path: &Path, name: &str| {
        populations
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| data_error(path, format!("unknown population `{name}`")))
    };
    let (role, value_col) = if manifest.engine == "micro" {
        ("trajectory", "opinion")
    } else {
        ("density", "density")
    };
    let file = manifest
        .file(role)
        .ok_or_else(|| data_error(dir, format!("manifest lists no {role} file")))?;
    let path = dir.join(&file.path);
    let table = Table::read(&path, manifest.format)?;
    let (c_step, c_t, c_pop, c_val) = (
        table.column(&path, "step")?,
        table.column(&path, "t")?,
        table.column(&path, "population")?,
        table.column(&path, value_col)?,
    );
    let mut by_step: BTreeMap<usize, (f64, Vec<Vec<f64>>)> = BTreeMap::new();
    for row in &table.rows {
        let step: usize = parse_cell(&path, &row[c_step])?;
        let t: f64 = parse_cell(&path, &row[c_t])?;
        let k = index(&path, &row[c_pop])?;
        let v: f64 = parse_cell(&path, &row[c_val])?;
        let entry = by_step
            .entry(step)
            .or_insert_with(|| (t, vec![Vec::new(); populations.len()]));
        entry.1[k].push(v);
    }
    let mut frames = Vec::with_capacity(by_step.len());
    for (step, (t, values)) in by_step {
        let laws = values
            .into_iter()
            .map(|v| {
                let law = if manifest.engine == "micro" {
                    EmpiricalDistribution::new(v).map(Law::Samples)
                } else {
                    GridDensity::new(v).map(Law::Grid)
                };
                law.map_err(|e| data_error(&path, e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        frames.push((step, t, laws));
    }
    Ok(Frames {
        populations,
        frames,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub t: f64,
    pub step_a: usize,
    pub step_b: usize,
    pub population: String,
    pub w1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    pub matched_times: usize,
    pub max_w1: f64,
    pub max_w1_by_population: BTreeMap<String, f64>,
    #[serde(skip)]
    pub rows: Vec<CompareRow>,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

/// W1 between matching populations of two runs at every saved time the two
/// runs share.
pub fn compare_runs(a: &Path, b: &Path) -> Result<CompareReport, CliError> {
    let fa = load_frames(a)?;
    let fb = load_frames(b)?;
    let mut names_a = fa.populations.clone();
    let mut names_b = fb.populations.clone();
    names_a.sort();
    names_b.sort();
    if names_a != names_b {
        return Err(CliError::Mismatch(format!(
            "population sets differ: [{}] vs [{}]",
            names_a.join(", "),
            names_b.join(", ")
        )));
    }
    let mut rows = Vec::new();
    let mut matched = 0;
    for (step_a, t, laws_a) in &fa.frames {
        let Some((step_b, _, laws_b)) = fb.frames.iter().find(|(_, tb, _)| same_time(*t, *tb))
        else {
            continue;
        };
        matched += 1;
        for (k, name) in fa.populations.iter().enumerate() {
            let kb = fb
                .populations
                .iter()
                .position(|p| p == name)
                .expect("same population sets");
            rows.push(CompareRow {
                t: *t,
                step_a: *step_a,
                step_b: *step_b,
                population: name.clone(),
                w1: laws_a[k].w1(&laws_b[kb])?,
            });
        }
    }
    if matched == 0 {
        return Err(CliError::Mismatch("the runs share no saved time".into()));
    }
    let mut by_pop = BTreeMap::new();
    for r in &rows {
        let m = by_pop.entry(r.population.clone()).or_insert(0.0f64);
        *m = m.max(r.w1);
    }
    Ok(CompareReport {
        run_a: a.to_path_buf(),
        run_b: b.to_path_buf(),
        matched_times: matched,
        max_w1: rows.iter().map(|r| r.w1).fold(0.0, f64::max),
        max_w1_by_population: by_pop,
        rows,
    })
}

/// Writes `comparison.<ext>` with the per-step table and `summary.json` with
/// the maxima.
pub fn write_report(report: &CompareReport, out: &Path, format: Format) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let cols = ["t", "step_a", "step_b", "population", "w1"]
        .map(String::from)
        .to_vec();
    let mut w = TableWriter::create(out, "comparison", format, cols)?;
    for r in &report.rows {
        w.row(&[
            r.t.into(),
            r.step_a.into(),
            r.step_b.into(),
            r.population.as_str().into(),
            r.w1.into(),
        ])?;
    }
    w.finish()?;
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    write_atomic(&out.join("summary.json"), text.as_bytes())
}
