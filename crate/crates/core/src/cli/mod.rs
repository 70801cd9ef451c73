//! Batch runner: reads an experiment file, writes CSV tables, a manifest and
//! optional SVG charts. Every table starts with a `# schema_version` line.

mod config;
mod plot;
mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use config::{
    CalibrationSection, EngineSection, ExperimentConfig, Figure4Section, JarzynskiSection, RunSection, SpaceSection,
};
pub use plot::{Chart, Kind, Series};
pub use table::{num, sha256_hex, OutputEntry, RunManifest, Table, SCHEMA_VERSION};

use crate::channels::{calibrate_recoil, mean_recoil_energy};
use crate::engine::{estimate_m1, estimate_m2, jarzynski_check, run_engine, verify_m2, Backend, Engine, EngineRun};
use crate::error::{Error, Result};
use crate::fock::StochasticKernel;
use crate::metrics::{
    bath_temperature, binomial_distribution, efficiencies, efficiencies_ideal, engine_power, ergotropy,
    mutual_information, EnergySpectrum,
};
use crate::seed;

pub const SIMULATE_TABLE: &str = "simulate.csv";
pub const READOUT_TABLE: &str = "simulate_readout.csv";
pub const ERGOTROPY_TABLE: &str = "figure4_ergotropy.csv";
pub const EFFICIENCY_TABLE: &str = "figure4_efficiency.csv";
pub const CALIBRATION_TABLE: &str = "calibration.csv";
pub const JARZYNSKI_TABLE: &str = "jarzynski.csv";

fn finish(
    command: &str,
    cfg: &ExperimentConfig,
    out: &Path,
    started: Instant,
    files: Vec<(String, Vec<u8>)>,
) -> Result<Vec<PathBuf>> {
    let outputs = table::write_files(out, &files)?;
    let manifest = RunManifest {
        command: command.into(),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        seed: cfg.run.seed,
        seed_scheme: seed::SCHEME.into(),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
        config: toml::Value::try_from(cfg).map_err(|e| Error::Config(e.to_string()))?,
    };
    let mut paths: Vec<PathBuf> = files.iter().map(|(n, _)| out.join(n)).collect();
    paths.push(table::write_manifest(out, &manifest)?);
    Ok(paths)
}

/// Seed of one `(command, grid point)` work unit.
fn unit_seed(cfg: &ExperimentConfig, command: &str, index: usize) -> u64 {
    seed::derive(cfg.run.seed, &[seed::tag(command), index as u64])
}

fn level_columns(prefix: &str, n_max: usize) -> Vec<String> {
    (0..=n_max).map(|n| format!("{prefix}{n}")).collect()
}

/// Per-backend runs over the bath grid, sharing kernels between grid points.
fn grid_runs(cfg: &ExperimentConfig, command: &str, backend: Backend, grid: &[f64]) -> Result<Vec<EngineRun>> {
    let Some(&first) = grid.first() else { return Ok(Vec::new()) };
    if backend == Backend::IdealMarkov {
        return grid.iter().map(|&p| run_engine(&cfg.engine_config(p, backend)?)).collect();
    }
    let base = Engine::new(&cfg.engine_config(first, backend)?)?;
    grid.iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut e = base.with_p_up(p)?;
            e = e.reseeded(unit_seed(cfg, command, i));
            e.run()
        })
        .collect()
}

/// Per-cycle mean phonon number and battery distribution for every backend
/// and bath setting.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let n_max = cfg.space()?.n_max;
    let mut header = vec!["backend".to_string(), "p_up".into(), "cycle".into(), "mean_phonon".into()];
    header.extend(level_columns("p", n_max));
    header.extend(["leakage", "tail", "mean_phonon_stderr", "mean_work", "work_stderr"].map(String::from));
    let mut dist = Table::new(header);
    let mut header = vec!["backend".to_string(), "p_up".into(), "cycle".into(), "readout_mean_phonon".into()];
    header.extend(level_columns("r", n_max));
    let mut readout = Table::new(header);
    for &backend in &cfg.run.backends {
        for run in grid_runs(cfg, "simulate", backend, &cfg.run.p_grid)? {
            let p = run.config.p_up;
            let initial = crate::fock::PhononDistribution::new(run.initial.clone())?;
            let (head, tail) = initial.truncated(n_max);
            let mut row = vec![backend.name().into(), num(p), "0".into(), num(initial.mean())];
            row.extend(head.probs().iter().map(|&x| num(x)));
            row.extend([num(0.0), num(tail), num(0.0), num(0.0), num(0.0)]);
            dist.push(row);
            for c in &run.per_cycle {
                let mut row = vec![backend.name().into(), num(p), c.cycle.to_string(), num(c.mean_phonon)];
                row.extend(c.distribution.iter().map(|&x| num(x)));
                row.extend([num(c.leakage), num(c.tail), num(c.mean_phonon_stderr), num(c.mean_work), num(c.work_stderr)]);
                dist.push(row);
                let mut row = vec![backend.name().into(), num(p), c.cycle.to_string(), num(c.readout_mean_phonon)];
                row.extend(c.readout.iter().map(|&x| num(x)));
                readout.push(row);
            }
        }
    }
    finish(
        "simulate",
        cfg,
        out,
        started,
        vec![
            (SIMULATE_TABLE.into(), dist.to_bytes()?),
            (READOUT_TABLE.into(), readout.to_bytes()?),
        ],
    )
}

/// Ergotropy against cycle number and efficiencies against bath setting,
/// ideal and with the error model.
pub fn cmd_figure4(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let space = cfg.space()?;
    let cycles = cfg.engine.cycles;
    let spectrum = EnergySpectrum::harmonic(space.n_max);
    let simulate = cfg.figure4.simulate;

    let mut erg = Table::new([
        "p_up",
        "cycle",
        "ideal_ergotropy",
        "ergotropy",
        "readout_ergotropy",
        "ideal_mean_phonon",
        "mean_phonon",
    ]);
    let runs = if simulate {
        grid_runs(cfg, "figure4", Backend::ExactChannel, &cfg.run.p_grid)?
    } else {
        Vec::new()
    };
    for (i, &p) in cfg.run.p_grid.iter().enumerate() {
        for k in 0..=cycles {
            let ideal = binomial_distribution(k, p, space.dim())?;
            let (ideal_head, _) = ideal.truncated(space.n_max);
            let mut row = vec![num(p), k.to_string(), num(ergotropy(&ideal_head, &spectrum)?)];
            match runs.get(i) {
                Some(run) if k > 0 => {
                    let c = &run.per_cycle[k - 1];
                    row.extend([
                        num(ergotropy(&c.distribution(), &spectrum)?),
                        num(ergotropy(&c.readout(), &spectrum)?),
                        num(ideal.mean()),
                        num(c.mean_phonon),
                    ]);
                }
                Some(run) => {
                    let init = crate::fock::PhononDistribution::new(run.initial.clone())?;
                    let e = ergotropy(&init.truncated(space.n_max).0, &spectrum)?;
                    row.extend([num(e), num(e), num(ideal.mean()), num(init.mean())]);
                }
                None => row.extend([String::new(), String::new(), num(ideal.mean()), String::new()]),
            }
            erg.push(row);
        }
    }

    let mut eff = Table::new([
        "p_up",
        "k_b_t",
        "mutual_info",
        "power",
        "ideal_info_work_eff",
        "ideal_charging_eff",
        "ideal_charging_eff_final",
        "info_work_eff",
        "charging_eff",
        "charging_eff_final",
    ]);
    let sims = if simulate {
        grid_runs(cfg, "figure4-efficiency", Backend::ExactChannel, &cfg.figure4.p_grid)?
    } else {
        Vec::new()
    };
    for (i, &p) in cfg.figure4.p_grid.iter().enumerate() {
        let ideal = efficiencies_ideal(cycles, p)?;
        let mut row = vec![
            num(bath_temperature(p)?),
            num(mutual_information(p)?),
            num(engine_power(p, cfg.engine.cycle_time_us)?),
            num(ideal.info_work_eff),
            num(ideal.charging_eff),
            num(ideal.charging_eff_final),
        ];
        row.insert(0, num(p));
        match sims.get(i) {
            Some(run) => {
                let r = efficiencies(run)?;
                row.extend([num(r.info_work_eff), num(r.charging_eff), num(r.charging_eff_final)]);
            }
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        eff.push(row);
    }
    finish(
        "figure4",
        cfg,
        out,
        started,
        vec![
            (ERGOTROPY_TABLE.into(), erg.to_bytes()?),
            (EFFICIENCY_TABLE.into(), eff.to_bytes()?),
        ],
    )
}

fn kernel_table(k: &StochasticKernel, n_max: usize) -> Result<Vec<u8>> {
    let mut header = vec!["level".to_string()];
    header.extend(level_columns("c", n_max));
    let mut t = Table::new(header);
    for m in 0..=n_max {
        let mut row = vec![m.to_string()];
        row.extend((0..=n_max).map(|n| num(k.get(m, n))));
        t.push(row);
    }
    let mut row = vec!["above".to_string()];
    row.extend((0..=n_max).map(|n| num((n_max + 1..k.rows()).map(|m| k.get(m, n)).sum())));
    t.push(row);
    t.to_bytes()
}

/// Fits the recoil geometry and tabulates the readout and disturbance matrices.
pub fn cmd_calibrate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let p = cfg.run.p_grid.first().copied().unwrap_or(0.5);
    let mut ecfg = cfg.engine_config(p, Backend::ExactChannel)?;
    let n_pairs = ecfg.detector.n_photon_pairs;
    let cal = &cfg.calibration;
    let (mean, se) = if n_pairs > 0 {
        let mut rng = seed::stream(cfg.run.seed, &[seed::tag("calibrate")]);
        ecfg.geometry = calibrate_recoil(cal.target_mean_phonon, n_pairs, &ecfg.geometry, cal.shots, &mut rng)?;
        let mut rng = seed::stream(cfg.run.seed, &[seed::tag("calibrate-check")]);
        mean_recoil_energy(n_pairs, &ecfg.geometry, cal.shots, &mut rng)
    } else {
        (0.0, 0.0)
    };
    let mut t = Table::new(["eta", "f_x", "n_photon_pairs", "target_mean_phonon", "mean_kick", "mean_kick_stderr", "shots"]);
    t.push(vec![
        num(ecfg.geometry.eta),
        num(ecfg.geometry.f_x),
        n_pairs.to_string(),
        num(cal.target_mean_phonon),
        num(mean),
        num(se),
        cal.shots.to_string(),
    ]);
    let engine = Engine::new(&ecfg)?;
    let n_max = ecfg.space.n_max;
    let m1 = estimate_m1(&engine, cal.m1_shots, &mut seed::stream(cfg.run.seed, &[seed::tag("m1")]))?;
    let m2 = estimate_m2(&engine, cal.m2_samples, &mut seed::stream(cfg.run.seed, &[seed::tag("m2")]))?;
    let mut files = vec![
        (CALIBRATION_TABLE.to_string(), t.to_bytes()?),
        ("m1.csv".to_string(), kernel_table(&m1, n_max)?),
        ("m1_exact.csv".to_string(), kernel_table(engine.readout_kernel(), n_max)?),
        ("m2.csv".to_string(), kernel_table(&m2, n_max)?),
    ];
    if cal.verify_shots > 0 {
        let check = verify_m2(&engine, cal.verify_shots, &mut seed::stream(cfg.run.seed, &[seed::tag("m2-check")]))?;
        let mut t = Table::new(["column", "total_variation"]);
        for (i, tv) in check.total_variation.iter().enumerate() {
            t.push(vec![i.to_string(), num(*tv)]);
        }
        files.push(("m2_check.csv".to_string(), t.to_bytes()?));
    }
    finish("calibrate", cfg, out, started, files)
}

/// Forward average `⟨e^{(ΔF-W)/k_BT}⟩` and backward `γ` over the bath grid.
pub fn cmd_jarzynski(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let mut t = Table::new(["backend", "p_up", "lhs", "lhs_stderr", "gamma", "gamma_stderr", "agree", "ideal"]);
    let grid = &cfg.jarzynski.p_grid;
    for (b, &backend) in cfg.jarzynski.backends.iter().enumerate() {
        let Some(&first) = grid.first() else { break };
        let mut ecfg = cfg.engine_config(first, backend)?;
        ecfg.cycles = 1;
        let base = Engine::new(&ecfg)?;
        for (i, &p) in grid.iter().enumerate() {
            let engine = base.with_p_up(p)?;
            let mut rng = seed::stream(cfg.run.seed, &[seed::tag("jarzynski"), b as u64, i as u64]);
            let r = jarzynski_check(&engine, cfg.jarzynski.shots, &mut rng)?;
            t.push(vec![
                backend.name().into(),
                num(p),
                num(r.lhs),
                num(r.lhs_stderr),
                num(r.gamma),
                num(r.gamma_stderr),
                r.agree.to_string(),
                num(2.0 * (1.0 - p)),
            ]);
        }
    }
    finish("jarzynski", cfg, out, started, vec![(JARZYNSKI_TABLE.into(), t.to_bytes()?)])
}

/// Rows of `(x, y)` points keyed by the values of the `key` columns.
type Groups = Vec<(Vec<String>, Vec<(f64, f64)>)>;

fn grouped(t: &Table, key: &[&str], x: &str, y: &str) -> Result<Groups> {
    let keys: Vec<usize> = key.iter().map(|k| t.column(k)).collect::<Result<_>>()?;
    let (xi, yi) = (t.column(x)?, t.column(y)?);
    let mut groups: Groups = Vec::new();
    for r in 0..t.rows.len() {
        if t.rows[r][yi].is_empty() {
            continue;
        }
        let k: Vec<String> = keys.iter().map(|&c| t.rows[r][c].clone()).collect();
        let pt = (t.f64_at(r, xi)?, t.f64_at(r, yi)?);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, pts)) => pts.push(pt),
            None => groups.push((k, vec![pt])),
        }
    }
    Ok(groups)
}

fn line(title: &str, x: &str, y: &str, series: Vec<Series>) -> Chart {
    Chart {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        kind: Kind::Line,
        series,
    }
}

fn figure3(data: &Path) -> Result<Option<Chart>> {
    let path = data.join(SIMULATE_TABLE);
    if !path.is_file() {
        return Ok(None);
    }
    let t = Table::read(&path)?;
    let groups = grouped(&t, &["backend", "p_up"], "cycle", "mean_phonon")?;
    let preferred = ["exact_channel", "trajectory", "ideal_markov"]
        .into_iter()
        .find(|b| groups.iter().any(|(k, _)| k[0] == *b))
        .unwrap_or("exact_channel");
    let series = groups
        .into_iter()
        .filter(|(k, _)| k[0] == preferred)
        .map(|(k, points)| Series {
            name: format!("P↑ = {}", k[1]),
            points,
            dashed: false,
        })
        .collect();
    Ok(Some(line(&format!("Mean phonon number ({preferred})"), "cycle", "mean phonon number", series)))
}

fn figure4(data: &Path) -> Result<Vec<(String, Chart)>> {
    let mut charts = Vec::new();
    let path = data.join(ERGOTROPY_TABLE);
    if path.is_file() {
        let t = Table::read(&path)?;
        let mut series = Vec::new();
        for (col, dashed, label) in [("ideal_ergotropy", true, "ideal"), ("readout_ergotropy", false, "errors")] {
            for (k, points) in grouped(&t, &["p_up"], "cycle", col)? {
                series.push(Series {
                    name: format!("P↑ = {} {label}", k[0]),
                    points,
                    dashed,
                });
            }
        }
        charts.push(("figure4a.svg".into(), line("Battery ergotropy", "cycle", "ergotropy (ħωₓ)", series)));
    }
    let path = data.join(EFFICIENCY_TABLE);
    if path.is_file() {
        let t = Table::read(&path)?;
        let mut series = Vec::new();
        for (col, dashed, label) in [
            ("ideal_info_work_eff", true, "ideal −W/kTI"),
            ("info_work_eff", false, "errors −W/kTI"),
            ("ideal_charging_eff", true, "ideal E/kTI"),
            ("charging_eff", false, "errors E/kTI"),
        ] {
            for (_, points) in grouped(&t, &[], "p_up", col)? {
                series.push(Series {
                    name: label.into(),
                    points,
                    dashed,
                });
            }
        }
        charts.push(("figure4bc.svg".into(), line("Efficiencies", "P↑", "efficiency", series)));
    }
    Ok(charts)
}

fn jarzynski_chart(data: &Path) -> Result<Option<Chart>> {
    let path = data.join(JARZYNSKI_TABLE);
    if !path.is_file() {
        return Ok(None);
    }
    let t = Table::read(&path)?;
    let mut series = Vec::new();
    for (col, dashed) in [("lhs", false), ("gamma", false)] {
        for (k, points) in grouped(&t, &["backend"], "p_up", col)? {
            series.push(Series {
                name: format!("{col} {}", k[0]),
                points,
                dashed,
            });
        }
    }
    if let Some((_, points)) = grouped(&t, &["backend"], "p_up", "ideal")?.into_iter().next() {
        series.push(Series {
            name: "2(1−P↑)".into(),
            points,
            dashed: true,
        });
    }
    Ok(Some(line("Generalized Jarzynski check", "P↑", "value", series)))
}

fn calibration_chart(data: &Path) -> Result<Option<Chart>> {
    let mut series = Vec::new();
    for name in ["m1.csv", "m2.csv"] {
        let path = data.join(name);
        if !path.is_file() {
            continue;
        }
        let t = Table::read(&path)?;
        let points = (0..t.rows.len())
            .filter(|&r| t.rows[r][0] != "above")
            .map(|r| Ok((r as f64, t.f64_at(r, r + 1)?)))
            .collect::<Result<Vec<_>>>()?;
        series.push(Series {
            name: format!("{} diagonal", name.trim_end_matches(".csv").to_uppercase()),
            points,
            dashed: false,
        });
    }
    if series.is_empty() {
        return Ok(None);
    }
    Ok(Some(Chart {
        title: "Readout and disturbance matrices".into(),
        x_label: "phonon number".into(),
        y_label: "diagonal element".into(),
        kind: Kind::Bar,
        series,
    }))
}

/// Renders every table found in `data` as SVG into `out`. Nothing is
/// written unless at least one table exists.
pub fn cmd_emit_plots(cfg: &ExperimentConfig, data: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let mut charts: Vec<(String, Chart)> = Vec::new();
    if let Some(c) = figure3(data)? {
        charts.push(("figure3.svg".into(), c));
    }
    charts.extend(figure4(data)?);
    if let Some(c) = jarzynski_chart(data)? {
        charts.push(("jarzynski.svg".into(), c));
    }
    if let Some(c) = calibration_chart(data)? {
        charts.push(("calibration.svg".into(), c));
    }
    if charts.is_empty() {
        return Err(Error::MissingTable(data.join(SIMULATE_TABLE)));
    }
    let files = charts.into_iter().map(|(n, c)| (n, c.render().into_bytes())).collect();
    finish("emit-plots", cfg, out, started, files)
}

fn parse_backend(s: &str) -> std::result::Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "szilard", version, about = "Single-ion Szilard engine charging a phonon battery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment file (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_backend)]
    pub backend: Option<Backend>,
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean phonon number and distributions per cycle.
    Simulate,
    /// Ergotropy and efficiency curves.
    Figure4,
    /// Recoil calibration and readout/disturbance matrices.
    Calibrate,
    /// Forward/backward work protocol.
    Jarzynski,
    /// Render tables as SVG.
    EmitPlots {
        /// Directory holding the tables; defaults to --out.
        data: Option<PathBuf>,
    },
}

impl Cli {
    /// Loads the config file and applies the command-line overrides.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(b) = self.backend {
            cfg.run.backends = vec![b];
            cfg.jarzynski.backends = vec![b];
        }
        if let Some(n) = self.shots {
            cfg.run.shots = n;
            cfg.jarzynski.shots = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn execute(&self) -> Result<Vec<PathBuf>> {
        if let Some(n) = self.threads {
            // the global pool can only be set once per process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let cfg = self.experiment()?;
        match &self.command {
            Command::Simulate => cmd_simulate(&cfg, &self.out),
            Command::Figure4 => cmd_figure4(&cfg, &self.out),
            Command::Calibrate => cmd_calibrate(&cfg, &self.out),
            Command::Jarzynski => cmd_jarzynski(&cfg, &self.out),
            Command::EmitPlots { data } => cmd_emit_plots(&cfg, data.as_deref().unwrap_or(&self.out), &self.out),
        }
    }
}

/// Parses arguments and runs the chosen command.
pub fn run<I, T>(args: I) -> Result<Vec<PathBuf>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    cli.execute()
}
