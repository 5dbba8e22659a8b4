use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use opinion_lab::meanfield::{run_meanfield, MeanFieldRun};
use opinion_lab::micro::{DistanceRecord, MicroRun};
use opinion_lab::scenarios::{
    preset, validate, EngineKind, ScenarioConfig, ScenarioError, ValidScenario,
};

use crate::manifest::{file_entry, sha256_hex, FileEntry, PartitionInfo, RunManifest};
use crate::table::{write_atomic, Format, TableWriter, Value};
use crate::CliError;

pub const HISTOGRAM_BINS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Preset(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub source: Source,
    /// Overrides the scenario seed when set.
    pub seed: Option<u64>,
    pub engine: Option<EngineKind>,
    pub out: PathBuf,
    pub format: Format,
}

pub fn load_source(source: &Source) -> Result<ScenarioConfig, CliError> {
    match source {
        Source::File(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            ScenarioConfig::from_toml(&text)
                .map_err(|e| CliError::Scenario(ScenarioError::Parse(e.to_string())))
        }
        Source::Preset(name) => Ok(preset(name)?),
    }
}

/// Validates, runs and writes every output file plus the manifest.
pub fn run(opts: &RunOptions) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let mut config = load_source(&opts.source)?;
    if let Some(seed) = opts.seed {
        config.seed = Some(seed);
    }
    if let Some(engine) = opts.engine {
        config.engine = engine;
    }
    let scenario = validate(config).map_err(|e| CliError::Scenario(ScenarioError::Invalid(e)))?;
    fs::create_dir_all(&opts.out).map_err(|source| CliError::Io {
        path: opts.out.clone(),
        source,
    })?;

    let toml = scenario.config().to_toml();
    write_atomic(&opts.out.join("scenario.toml"), toml.as_bytes())?;
    let mut files = vec![file_entry(&opts.out, "scenario", "scenario.toml")?];
    match scenario.engine() {
        EngineKind::Micro => files.extend(write_micro(&scenario, &opts.out, opts.format)?),
        EngineKind::Meanfield => files.extend(write_meanfield(&scenario, &opts.out, opts.format)?),
    }

    let partitions = scenario
        .config()
        .partitions
        .iter()
        .enumerate()
        .map(|(r, p)| PartitionInfo {
            name: p.name.clone(),
            groups: scenario.group_names(r),
        })
        .collect();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        scenario_name: scenario.config().name.clone(),
        scenario_sha256: sha256_hex(toml.as_bytes()),
        engine: match scenario.engine() {
            EngineKind::Micro => "micro".into(),
            EngineKind::Meanfield => "meanfield".into(),
        },
        seed: scenario.seed(),
        trials: scenario.trials(),
        format: opts.format,
        n_cells: (scenario.engine() == EngineKind::Meanfield).then(|| scenario.n_cells()),
        populations: scenario.population_names(),
        partitions,
        files,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&opts.out)?;
    Ok(manifest)
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn entry(dir: &Path, role: &str, path: PathBuf) -> Result<FileEntry, CliError> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    file_entry(dir, role, &name)
}

fn write_distances(
    scenario: &ValidScenario,
    dir: &Path,
    format: Format,
    per_trial: &[&[DistanceRecord]],
) -> Result<FileEntry, CliError> {
    let group_names: Vec<Vec<String>> = (0..scenario.config().partitions.len())
        .map(|r| scenario.group_names(r))
        .collect();
    let mut w = TableWriter::create(
        dir,
        "distances",
        format,
        columns(&[
            "trial",
            "step",
            "t",
            "partition",
            "group_a",
            "group_b",
            "w1",
        ]),
    )?;
    for (trial, records) in per_trial.iter().enumerate() {
        for d in records.iter() {
            w.row(&[
                trial.into(),
                d.step.into(),
                d.t.into(),
                scenario.config().partitions[d.partition]
                    .name
                    .as_str()
                    .into(),
                group_names[d.partition][d.group_a].as_str().into(),
                group_names[d.partition][d.group_b].as_str().into(),
                d.w1.into(),
            ])?;
        }
    }
    entry(dir, "distances", w.finish()?)
}

fn write_micro(
    scenario: &ValidScenario,
    dir: &Path,
    format: Format,
) -> Result<Vec<FileEntry>, CliError> {
    let seed = scenario.seed();
    // Trials run one after another; each engine parallelizes internally.
    let runs: Vec<MicroRun> = (0..scenario.trials())
        .map(|trial| {
            scenario
                .micro_engine(seed, trial)
                .and_then(|e| Ok(e.run()?))
        })
        .collect::<Result<_, ScenarioError>>()?;

    let config = scenario.config();
    let population_of: Vec<usize> = config
        .populations
        .iter()
        .enumerate()
        .flat_map(|(k, p)| std::iter::repeat_n(k, p.size.unwrap_or(0)))
        .collect();
    let group_names: Vec<Vec<String>> = (0..config.partitions.len())
        .map(|r| scenario.group_names(r))
        .collect();

    let mut cols = columns(&["trial", "step", "t", "agent", "population"]);
    cols.extend(
        config
            .partitions
            .iter()
            .map(|p| format!("group_{}", p.name)),
    );
    cols.push("opinion".into());
    let mut w = TableWriter::create(dir, "trajectory", format, cols)?;
    for (trial, run) in runs.iter().enumerate() {
        let tr = &run.trajectory;
        for f in 0..tr.len() {
            for (i, (&x, agent)) in tr.opinions[f].iter().zip(&run.agents).enumerate() {
                let mut row: Vec<Value> = vec![
                    trial.into(),
                    tr.steps[f].into(),
                    tr.times[f].into(),
                    i.into(),
                    config.populations[population_of[i]].name.as_str().into(),
                ];
                row.extend(
                    agent
                        .groups
                        .iter()
                        .enumerate()
                        .map(|(r, &g)| group_names[r][g].as_str().into()),
                );
                row.push(x.into());
                w.row(&row)?;
            }
        }
    }
    let mut files = vec![entry(dir, "trajectory", w.finish()?)?];

    let distances: Vec<&[DistanceRecord]> = runs.iter().map(|r| r.distances.as_slice()).collect();
    files.push(write_distances(scenario, dir, format, &distances)?);

    if runs.len() > 1 {
        files.push(write_histogram(
            scenario,
            dir,
            format,
            &runs,
            &population_of,
        )?);
    }
    Ok(files)
}

/// Density histogram per population and saved step, pooled over trials.
fn write_histogram(
    scenario: &ValidScenario,
    dir: &Path,
    format: Format,
    runs: &[MicroRun],
    population_of: &[usize],
) -> Result<FileEntry, CliError> {
    let names = scenario.population_names();
    let width = 2.0 / HISTOGRAM_BINS as f64;
    let mut w = TableWriter::create(
        dir,
        "histogram",
        format,
        columns(&["step", "t", "population", "bin_center", "density"]),
    )?;
    let first = &runs[0].trajectory;
    for f in 0..first.len() {
        let mut counts = vec![vec![0usize; HISTOGRAM_BINS]; names.len()];
        for run in runs {
            for (i, &x) in run.trajectory.opinions[f].iter().enumerate() {
                let bin = (((x + 1.0) / width) as usize).min(HISTOGRAM_BINS - 1);
                counts[population_of[i]][bin] += 1;
            }
        }
        for (k, c) in counts.iter().enumerate() {
            let total: usize = c.iter().sum();
            for (b, &n) in c.iter().enumerate() {
                w.row(&[
                    first.steps[f].into(),
                    first.times[f].into(),
                    names[k].as_str().into(),
                    (-1.0 + (b as f64 + 0.5) * width).into(),
                    (n as f64 / (total as f64 * width)).into(),
                ])?;
            }
        }
    }
    entry(dir, "histogram", w.finish()?)
}

fn write_meanfield(
    scenario: &ValidScenario,
    dir: &Path,
    format: Format,
) -> Result<Vec<FileEntry>, CliError> {
    let system = scenario.meanfield_system()?;
    let run: MeanFieldRun = run_meanfield(&system).map_err(ScenarioError::from)?;
    let names = scenario.population_names();
    let mut w = TableWriter::create(
        dir,
        "density",
        format,
        columns(&["step", "t", "population", "cell_center", "density"]),
    )?;
    for (f, frame) in run.densities.iter().enumerate() {
        for (k, d) in frame.iter().enumerate() {
            for (i, &v) in d.values().iter().enumerate() {
                w.row(&[
                    run.steps[f].into(),
                    run.times[f].into(),
                    names[k].as_str().into(),
                    d.cell_center(i).into(),
                    v.into(),
                ])?;
            }
        }
    }
    let mut files = vec![entry(dir, "density", w.finish()?)?];
    files.push(write_distances(scenario, dir, format, &[&run.distances])?);
    Ok(files)
}
