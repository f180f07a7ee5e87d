//! Command-line front end: `relax`, `evolve`, `decay`, `census` and `orbit`.
//!
//! Every command reads an optional plain-text `key = value` config file
//! (`#` starts a comment, unknown keys are rejected), applies `--set key=value`
//! overrides, and writes CSV/JSON artifacts into the output directory. JSON
//! summaries echo the config path and the SHA-256 of its contents.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! failure, 4 classification failure.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::charges::{charges, classify_sector, Family, SectorLabel};
use crate::error::{Error, Result};
use crate::evolver::{evolve, write_run, EvolveConfig};
use crate::experiments::{
    binding_energy, census, default_pump_factors, track_solitons, write_census, DecayLab,
};
use crate::lattice::{fmt_sig, load_snapshot, save_snapshot, Grid};
use crate::model::ModelParams;
use crate::relaxer::{relax, write_trace, RelaxConfig};
use crate::seeds::{orbit_residual, SeedKind, SeedSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CLASSIFICATION: i32 = 4;

/// Points with `min(|phi|, |psi|)` below this are excluded from the orbit-law
/// residual summary.
pub const ORBIT_CENTER_EXCLUSION: f64 = 0.05;

/// Every run parameter, with defaults matching the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub phi0: f64,
    pub psi0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub eps: f64,
    pub relax: RelaxConfig,
    /// `None` means `0.4 eps`.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// `None` means one snapshot per unit time.
    pub snapshot_every: Option<usize>,
    pub output_dir: PathBuf,
    pub sector: Option<String>,
    pub center: f64,
    pub velocity: f64,
    pub seed: SeedChoice,
    pub pump_factor_min: f64,
    pub pump_factor_max: f64,
    pub pump_factor_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedChoice {
    /// The analytic seed of the sector's family.
    Analytic,
    /// Closed-form D solution; needs `phi0 == psi0`.
    Exact,
    /// First-order integration; needs `phi0 == psi0`.
    Bps,
}

impl Default for RunConfig {
    fn default() -> Self {
        let g = Grid::default();
        RunConfig {
            phi0: 1.0,
            psi0: 2.0,
            x_min: g.x_min,
            x_max: g.x_max,
            eps: g.eps(),
            relax: RelaxConfig::default(),
            dt: None,
            t_end: 50.0,
            snapshot_every: None,
            output_dir: PathBuf::from("out"),
            sector: None,
            center: 0.0,
            velocity: 0.0,
            seed: SeedChoice::Analytic,
            pump_factor_min: 1.1,
            pump_factor_max: 2.0,
            pump_factor_step: 0.1,
        }
    }
}

/// Recognised keys, in documentation order.
pub const CONFIG_KEYS: &[&str] = &[
    "phi0",
    "psi0",
    "x_min",
    "x_max",
    "eps",
    "step_amplitude",
    "anneal_factor",
    "max_sweeps",
    "tol",
    "window",
    "rng_seed",
    "min_amplitude",
    "dt",
    "t_end",
    "snapshot_every",
    "output_dir",
    "sector",
    "center",
    "velocity",
    "seed",
    "pump_factor_min",
    "pump_factor_max",
    "pump_factor_step",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse value {value:?} for key {key}")))
}

impl RunConfig {
    /// Parses `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "phi0" => self.phi0 = parse_num(key, value)?,
            "psi0" => self.psi0 = parse_num(key, value)?,
            "x_min" => self.x_min = parse_num(key, value)?,
            "x_max" => self.x_max = parse_num(key, value)?,
            "eps" => self.eps = parse_num(key, value)?,
            "step_amplitude" => self.relax.step_amplitude = parse_num(key, value)?,
            "anneal_factor" => self.relax.anneal_factor = parse_num(key, value)?,
            "max_sweeps" => self.relax.max_sweeps = parse_num(key, value)?,
            "tol" => self.relax.tol = parse_num(key, value)?,
            "window" => self.relax.window = parse_num(key, value)?,
            "rng_seed" => self.relax.rng_seed = parse_num(key, value)?,
            "min_amplitude" => self.relax.min_amplitude = parse_num(key, value)?,
            "dt" => self.dt = Some(parse_num(key, value)?),
            "t_end" => self.t_end = parse_num(key, value)?,
            "snapshot_every" => self.snapshot_every = Some(parse_num(key, value)?),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "sector" => self.sector = Some(value.to_string()),
            "center" => self.center = parse_num(key, value)?,
            "velocity" => self.velocity = parse_num(key, value)?,
            "seed" => {
                self.seed = match value {
                    "analytic" => SeedChoice::Analytic,
                    "exact" => SeedChoice::Exact,
                    "bps" => SeedChoice::Bps,
                    _ => {
                        return Err(Error::Config(format!(
                            "seed must be analytic, exact or bps, got {value:?}"
                        )))
                    }
                }
            }
            "pump_factor_min" => self.pump_factor_min = parse_num(key, value)?,
            "pump_factor_max" => self.pump_factor_max = parse_num(key, value)?,
            "pump_factor_step" => self.pump_factor_step = parse_num(key, value)?,
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; valid keys: {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.phi0, self.psi0)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::with_spacing(self.x_min, self.x_max, self.eps)
    }

    pub fn evolve_config(&self, grid: &Grid) -> Result<EvolveConfig> {
        let mut cfg = EvolveConfig::for_grid(grid);
        if let Some(dt) = self.dt {
            cfg.dt = dt;
            cfg.snapshot_every = ((1.0 / dt).round() as usize).max(1);
        }
        cfg.t_end = self.t_end;
        if let Some(k) = self.snapshot_every {
            cfg.snapshot_every = k;
        }
        cfg.validate(grid)?;
        Ok(cfg)
    }

    pub fn pump_factors(&self) -> Result<Vec<f64>> {
        let (lo, hi, step) = (self.pump_factor_min, self.pump_factor_max, self.pump_factor_step);
        if (lo, hi, step) == (1.1, 2.0, 0.1) {
            return Ok(default_pump_factors());
        }
        if !(lo > 0.0 && hi >= lo && step > 0.0) {
            return Err(Error::Config(format!(
                "pump factor range needs 0 < min <= max and step > 0, got {lo}..{hi} step {step}"
            )));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|k| lo + k as f64 * step).collect())
    }

    /// Validates everything a run depends on before any work starts.
    pub fn validate(&self) -> Result<()> {
        let g = self.grid()?;
        self.params()?;
        self.relax.validate()?;
        self.evolve_config(&g)?;
        Ok(())
    }
}

/// Where a config came from, for provenance in every summary.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_path: Option<String>,
    /// SHA-256 of the config file contents followed by the `--set` overrides.
    pub config_hash: String,
}

#[derive(Debug, Parser)]
#[command(name = "soliton-lab", version, about = "Soliton lab for a coupled two-scalar-field model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key = value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output_dir)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a config key, e.g. --set eps=0.02
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relax a sector seed and report its mass and charges
    Relax {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sector: Option<String>,
    },
    /// Evolve a saved state and write a snapshot series
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Snapshot CSV to start from
        #[arg(long)]
        input: PathBuf,
    },
    /// Pump a relaxed V-type soliton and watch it decay
    Decay {
        #[command(flatten)]
        common: Common,
        /// Parent sector (V_DB, V_BD, V_EC or V_CE)
        #[arg(long, alias = "parent")]
        sector: Option<String>,
        /// Run a single pump factor instead of the scan
        #[arg(long)]
        factor: Option<f64>,
        #[arg(long)]
        factor_min: Option<f64>,
        #[arg(long)]
        factor_max: Option<f64>,
        #[arg(long)]
        factor_step: Option<f64>,
    },
    /// Relax all mass-table sectors and classify their stability
    Census {
        #[command(flatten)]
        common: Common,
    },
    /// Relax a D sector and check the orbit law along the profile
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sector: Option<String>,
    },
}

impl Common {
    fn load(&self) -> Result<(RunConfig, Provenance)> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?,
            None => String::new(),
        };
        let mut cfg = RunConfig::parse(&text)?;
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        for o in &self.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            cfg.set(k.trim(), v.trim())?;
            hasher.update(b"\n");
            hasher.update(o.as_bytes());
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        let prov = Provenance {
            config_path: self.config.as_ref().map(|p| p.display().to_string()),
            config_hash: hex::encode(hasher.finalize()),
        };
        Ok((cfg, prov))
    }
}

/// Maps an error to the documented exit status.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else if e.is_classification() {
        EXIT_CLASSIFICATION
    } else {
        EXIT_CONFIG
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Relax { common, sector } => {
            let (cfg, prov) = common.load()?;
            cmd_relax(&cfg, &prov, sector.as_deref())
        }
        Command::Evolve { common, input } => {
            let (cfg, prov) = common.load()?;
            cmd_evolve(&cfg, &prov, &input)
        }
        Command::Decay { common, sector, factor, factor_min, factor_max, factor_step } => {
            let (mut cfg, prov) = common.load()?;
            if let Some(f) = factor {
                cfg.pump_factor_min = f;
                cfg.pump_factor_max = f;
            }
            if let Some(v) = factor_min {
                cfg.pump_factor_min = v;
            }
            if let Some(v) = factor_max {
                cfg.pump_factor_max = v;
            }
            if let Some(v) = factor_step {
                cfg.pump_factor_step = v;
            }
            cmd_decay(&cfg, &prov, sector.as_deref())
        }
        Command::Census { common } => {
            let (cfg, prov) = common.load()?;
            cmd_census(&cfg, &prov)
        }
        Command::Orbit { common, sector } => {
            let (cfg, prov) = common.load()?;
            cmd_orbit(&cfg, &prov, sector.as_deref())
        }
    }
}

fn resolve_sector(cfg: &RunConfig, flag: Option<&str>) -> Result<SectorLabel> {
    let name = flag
        .map(str::to_string)
        .or_else(|| cfg.sector.clone())
        .ok_or_else(|| Error::Config("no sector given (use --sector or the sector key)".into()))?;
    name.parse()
}

/// Rounds every float in `v` to 9 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = fmt_sig(x).parse().expect("formatted float parses");
            json!(r)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn write_json(path: &Path, mut body: Value, prov: &Provenance) -> Result<()> {
    if let Value::Object(map) = &mut body {
        map.insert("config_path".into(), json!(prov.config_path));
        map.insert("config_hash".into(), json!(prov.config_hash));
    }
    let mut f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, &round_json(body))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn seed_spec(cfg: &RunConfig, sector: SectorLabel) -> SeedSpec {
    let mut spec = SeedSpec::for_sector(sector, cfg.center);
    if sector.family() == Family::D {
        spec.kind = match cfg.seed {
            SeedChoice::Analytic => SeedKind::DTable1,
            SeedChoice::Exact => SeedKind::DExactSymmetric,
            SeedChoice::Bps => SeedKind::BpsD,
        };
    }
    spec
}

pub fn cmd_relax(cfg: &RunConfig, prov: &Provenance, sector: Option<&str>) -> Result<i32> {
    let sector = resolve_sector(cfg, sector)?;
    let (p, g) = (cfg.params()?, cfg.grid()?);
    let seed = seed_spec(cfg, sector).build(g, &p)?;
    let outcome = relax(&seed, &cfg.relax, &p)?;
    let found = classify_sector(&outcome.state, &p)?;
    let (qh, qv) = charges(&outcome.state, &p)?;

    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    save_snapshot(&out.join(format!("relaxed_{sector}.csv")), &outcome.state, &p)?;
    let trace = BufWriter::new(fs::File::create(out.join(format!("trace_{sector}.csv")))?);
    write_trace(trace, &outcome.trace)?;
    write_json(
        &out.join(format!("summary_{sector}.json")),
        json!({
            "command": "relax",
            "sector": sector,
            "mass": outcome.final_energy,
            "QH": qh.value(),
            "QV": qv.value(),
            "converged": outcome.converged,
            "sweeps": outcome.sweeps,
            "stop": outcome.stop,
        }),
        prov,
    )?;
    if found != sector {
        return Err(Error::Unclassifiable(format!("relaxed state is {found}, expected {sector}")));
    }
    Ok(if outcome.converged { EXIT_OK } else { EXIT_NUMERICAL })
}

pub fn cmd_evolve(cfg: &RunConfig, prov: &Provenance, input: &Path) -> Result<i32> {
    let p = cfg.params()?;
    let state = load_snapshot(input)?;
    let ecfg = cfg.evolve_config(&state.grid)?;
    let report = evolve(&state, &ecfg, &p)?;
    let out = &cfg.output_dir;
    write_run(&out.join("snapshots"), &report)?;
    let last = report.last();
    write_json(
        &out.join("evolve_summary.json"),
        json!({
            "command": "evolve",
            "input": input.display().to_string(),
            "dt": ecfg.dt,
            "t_end": last.t,
            "snapshots": report.snapshots.len(),
            "initial_energy": report.initial().total_energy,
            "final_energy": last.total_energy,
            "max_energy_drift": report.max_energy_drift(),
            "charges_conserved": report.charges_conserved(),
            "initial_solitons": report.initial().solitons,
            "final_solitons": last.solitons,
            "tracking_error": last.tracking_error,
        }),
        prov,
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_decay(cfg: &RunConfig, prov: &Provenance, parent: Option<&str>) -> Result<i32> {
    let parent = resolve_sector(cfg, parent)?;
    let (p, g) = (cfg.params()?, cfg.grid()?);
    let factors = cfg.pump_factors()?;
    let lab = DecayLab::new(parent, g, &cfg.relax, &cfg.evolve_config(&g)?, &p)?;
    let reports = lab.scan(&factors)?;
    let chosen = reports
        .iter()
        .position(|r| r.decayed)
        .unwrap_or(reports.len() - 1);
    let (report, run) = lab.run(factors[chosen])?;

    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    write_run(&out.join("snapshots"), &run)?;
    write_json(&out.join("decay_report.json"), serde_json::to_value(&report)?, prov)?;
    write_json(
        &out.join("decay_scan.json"),
        json!({
            "command": "decay",
            "parent": parent,
            "parent_relaxed": lab.relaxed.converged,
            "parent_mass": lab.relaxed.final_energy,
            "product_masses": [lab.product_masses.0, lab.product_masses.1],
            "first_decay_factor": reports.iter().find(|r| r.decayed).map(|r| r.pumped_factor),
            "reports": reports,
        }),
        prov,
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_census(cfg: &RunConfig, prov: &Provenance) -> Result<i32> {
    let (p, g) = (cfg.params()?, cfg.grid()?);
    let rows = census(&p, g, &cfg.relax, &cfg.evolve_config(&g)?)?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    write_census(BufWriter::new(fs::File::create(out.join("census.csv"))?), &rows)?;
    for r in &rows {
        if let Some(s) = &r.relaxed {
            save_snapshot(&out.join(format!("relaxed_{}.csv", r.sector)), s, &p)?;
        }
    }
    write_json(
        &out.join("census_summary.json"),
        json!({
            "command": "census",
            "phi0": p.phi0,
            "psi0": p.psi0,
            "binding_energy": binding_energy(&rows)?,
            "rows": rows,
        }),
        prov,
    )?;
    for r in rows.iter().filter(|r| !r.converged) {
        eprintln!("warning: {} did not converge in {} sweeps", r.sector, r.sweeps);
    }
    Ok(EXIT_OK)
}

pub const ORBIT_NOTE: &str = "orbit law applies to D-type sectors only; residual column omitted";

pub fn cmd_orbit(cfg: &RunConfig, prov: &Provenance, sector: Option<&str>) -> Result<i32> {
    let sector = resolve_sector(cfg, sector)?;
    let (p, g) = (cfg.params()?, cfg.grid()?);
    let seed = seed_spec(cfg, sector).build(g, &p)?;
    let outcome = relax(&seed, &cfg.relax, &p)?;
    let s = &outcome.state;
    let is_d = sector.family() == Family::D;

    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    let mut w = BufWriter::new(fs::File::create(out.join(format!("orbit_{sector}.csv")))?);
    writeln!(w, "{}", if is_d { "x,phi,psi,orbit_residual" } else { "x,phi,psi" })?;
    let mut max_residual: f64 = 0.0;
    for i in 0..g.n {
        let (phi, psi) = (s.phi[i], s.psi[i]);
        write!(w, "{},{},{}", fmt_sig(g.x(i)), fmt_sig(phi), fmt_sig(psi))?;
        if is_d {
            match orbit_residual(phi, psi, &p) {
                Ok(r) => {
                    if phi.abs().min(psi.abs()) > ORBIT_CENTER_EXCLUSION {
                        max_residual = max_residual.max(r.abs());
                    }
                    write!(w, ",{}", fmt_sig(r))?;
                }
                Err(_) => write!(w, ",nan")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    let solitons = track_solitons(s, &p).unwrap_or_default();
    write_json(
        &out.join(format!("orbit_summary_{sector}.json")),
        json!({
            "command": "orbit",
            "sector": sector,
            "mass": outcome.final_energy,
            "converged": outcome.converged,
            "max_orbit_residual": if is_d { json!(max_residual) } else { Value::Null },
            "center_exclusion": ORBIT_CENTER_EXCLUSION,
            "note": if is_d { Value::Null } else { json!(ORBIT_NOTE) },
            "solitons": solitons,
        }),
        prov,
    )?;
    if !is_d {
        eprintln!("note: {ORBIT_NOTE}");
    }
    Ok(if outcome.converged { EXIT_OK } else { EXIT_NUMERICAL })
}
