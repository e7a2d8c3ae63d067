use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use holstein_core::circuit::{classify_regime, map_to_holstein, MapOptions};
use holstein_core::eigen::EigenOptions;
use holstein_core::fock::{build_basis, io::EigenDump, momentum_ground_state, Sector};
use holstein_core::observables::quasiparticle_residue;
use holstein_core::preparation::{rabi_time, simulate_pump, PumpParams};
use holstein_cli::config::{ConfigError, Preset, RunConfig, Solver};
use holstein_cli::sweep::{run_sweep, solve_point, write_csv};
use holstein_cli::validate::{run_all, ValidateOptions};
use holstein_cli::{exit_code, EXIT_OK, EXIT_VALIDATION};
use serde_json::json;

#[derive(Parser)]
#[command(name = "holstein", version, about = "Circuit-QED Holstein polaron simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "HOLSTEIN_THREADS")]
    threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Map circuit parameters onto the Holstein model.
    Map(Common),
    /// Solve a grid of drive amplitudes and write observables as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, conflicts_with = "config")]
        preset: Option<Preset>,
        #[arg(long, value_enum)]
        solver: Option<Solver>,
    },
    /// Simulate pumped preparation of the polaron and write the fidelity trace.
    Prepare(Common),
    /// Run every limit and oracle check; exit 1 if any fails.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Phonon cutoff for the exact Lang-Firsov checks.
        #[arg(long, default_value_t = 24)]
        cutoff: usize,
        /// Skip the figure-grid sweep.
        #[arg(long)]
        skip_sweep: bool,
    },
    /// Solve a single point and print JSON.
    Ground {
        #[command(flatten)]
        common: Common,
        /// Write the exact eigenvector to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let path = common.config.as_ref().ok_or_else(|| ConfigError("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    apply_overrides(&mut cfg, common);
    Ok(cfg)
}

fn apply_overrides(cfg: &mut RunConfig, common: &Common) {
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.threads {
        cfg.threads = t;
    }
    if let Some(o) = &common.output {
        cfg.output = Some(o.clone());
    }
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(path: Option<&Path>, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_map(common: &Common) -> anyhow::Result<u8> {
    let cfg = load(common)?;
    let Some(cp) = cfg.circuit_params() else {
        return Err(ConfigError("map needs a [circuit] block".into()).into());
    };
    let cp = cp?;
    let opts = MapOptions::default();
    let hp = map_to_holstein(&cp, &opts)?;
    let regime = classify_regime(&cp, &hp, &opts);
    emit_json(cfg.output.as_deref(), &json!({ "holstein": hp, "regime": regime }))?;
    Ok(EXIT_OK)
}

fn cmd_sweep(common: &Common, preset: Option<Preset>, solver: Option<Solver>) -> anyhow::Result<u8> {
    let mut cfg = match preset {
        Some(p) => {
            let mut c = RunConfig::preset(p);
            apply_overrides(&mut c, common);
            c
        }
        None => load(common)?,
    };
    if let Some(s) = solver {
        cfg.solver = s;
    }
    let rows = run_sweep(&cfg)?;
    let mut w = sink(cfg.output.as_deref())?;
    write_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(EXIT_OK)
}

fn cmd_ground(common: &Common, dump: Option<&Path>) -> anyhow::Result<u8> {
    let cfg = load(common)?;
    let value = cfg.sweep.as_ref().map(|s| s.from);
    let ratio = cfg.ratios.first().copied();
    // surface mapping errors as config errors before solving
    cfg.point(ratio, value)?;
    let point = solve_point(&cfg, ratio, value, true);
    if let (Some(path), Some(ed)) = (dump, &point.ed) {
        let hp = point.holstein.as_ref().expect("solved point has parameters");
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        EigenDump::new(hp.n_sites(), cfg.cutoff, ed.energy, ed.state.amplitudes()).write_to(&mut w)?;
        w.flush()?;
    }
    let failed = !point.errors.is_empty();
    emit_json(cfg.output.as_deref(), &serde_json::to_value(&point)?)?;
    if failed {
        anyhow::bail!("solver failure: {}", point.errors.join("; "));
    }
    Ok(EXIT_OK)
}

fn cmd_prepare(common: &Common) -> anyhow::Result<u8> {
    let cfg = load(common)?;
    let pump = cfg.pump.clone().ok_or_else(|| ConfigError("prepare needs a [pump] block".into()))?;
    let (_, hp) = cfg.point(cfg.ratios.first().copied(), cfg.sweep.as_ref().map(|s| s.from))?;
    let basis = Arc::new(build_basis(hp.n_sites(), cfg.cutoff, Sector::OneExcitation)?);
    let opts = EigenOptions {
        seed: cfg.seed,
        ..EigenOptions::default()
    };
    let (energy, target) = momentum_ground_state(&hp, &basis, cfg.kappa_index, &opts)?;
    let q = pump.q_index.unwrap_or(cfg.kappa_index);
    let z = quasiparticle_residue(&target, cfg.kappa_index)?;
    let tau = rabi_time(pump.beta_p, z)?;
    let pp = PumpParams {
        q_index: q,
        beta_p: pump.beta_p,
        omega_p: pump.omega_p,
        duration_ns: pump.duration_ns.unwrap_or(2.0 * tau),
        dt_ns: pump.dt_ns,
        stride: pump.stride,
    };
    let trace = simulate_pump(&hp, &pp, &target)?;
    let mut w = sink(cfg.output.as_deref())?;
    trace.write_csv(&mut w)?;
    w.flush()?;
    let peak = trace.peak();
    eprintln!(
        "{}",
        json!({
            "energy": energy,
            "Z0": z,
            "rabi_time_ns": tau,
            "omega_p": trace.omega_p,
            "dt_ns": trace.dt_ns,
            "steps": trace.steps,
            "peak_t_ns": peak.t_ns,
            "peak_fidelity": peak.fidelity,
            "max_norm_drift": trace.max_norm_drift(),
        })
    );
    Ok(EXIT_OK)
}

fn cmd_validate(common: &Common, cutoff: usize, skip_sweep: bool) -> anyhow::Result<u8> {
    let opts = ValidateOptions {
        lang_firsov_cutoff: cutoff,
        sweep: !skip_sweep,
        threads: common.threads.unwrap_or(0),
        seed: common.seed.unwrap_or(0),
        ..ValidateOptions::default()
    };
    let checks = run_all(&opts);
    let failing: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    let all_pass = failing.is_empty();
    emit_json(
        common.output.as_deref(),
        &json!({ "pass": all_pass, "checks": checks, "failing": failing }),
    )?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VALIDATION })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Map(c) => cmd_map(c),
        Command::Sweep { common, preset, solver } => cmd_sweep(common, *preset, *solver),
        Command::Prepare(c) => cmd_prepare(c),
        Command::Validate {
            common,
            cutoff,
            skip_sweep,
        } => cmd_validate(common, *cutoff, *skip_sweep),
        Command::Ground { common, dump } => cmd_ground(common, dump.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
