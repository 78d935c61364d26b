use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lwpa_core::analytic::DensityApproximations;
use lwpa_cli::config::{validate_raw, RawConfig, ValidatedConfig};
use lwpa_cli::presets::{run_figure_preset, FigurePreset, PresetOptions};
use lwpa_cli::sweep::{run_sweep, Engine};
use lwpa_cli::{figure_failure, output, sweep_failure, write_figure_csv, CliError, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "lwpa", version, about = "LTE-WLAN path aggregation performance sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure preset on the reference scenario.
    Figure {
        /// fig2, fig4, fig5, fig6, fig7 or fig8.
        name: FigurePreset,
        /// Optional configuration supplying network and Monte Carlo settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated engines: analytic, montecarlo.
        #[arg(long, value_delimiter = ',')]
        engines: Option<Vec<String>>,
        /// Comma-separated closed-access shares.
        #[arg(long, value_delimiter = ',')]
        p_set: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the sweep described by a configuration file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check a configuration file and print the resolved settings.
    Validate { config: PathBuf },
    /// Print the density approximations and validity flags of a configuration.
    Density { config: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Root seed; overrides mc.seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Window side in metres.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    fading_draws: Option<usize>,
    /// active_closed or all_closed.
    #[arg(long)]
    closed_exclusion: Option<String>,
    /// active_closed or all_closed.
    #[arg(long)]
    ase_baseline: Option<String>,
    /// Output file, or `-` for stdout. Defaults to `$LWPA_OUTPUT_DIR/<name>.csv`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, raw: &mut RawConfig) {
        if let Some(s) = self.seed {
            raw.set("mc.seed", s.to_string());
        }
        if let Some(r) = self.replications {
            raw.set("mc.replications", r.to_string());
        }
        if let Some(w) = self.window {
            raw.set("mc.window", format!("{w} m"));
        }
        if let Some(d) = self.fading_draws {
            raw.set("mc.fading_draws", d.to_string());
        }
        if let Some(e) = &self.closed_exclusion {
            raw.set("closed_exclusion", e.clone());
        }
        if let Some(b) = &self.ase_baseline {
            raw.set("ase_baseline", b.clone());
        }
    }
}

fn read_raw(path: &Path) -> Result<RawConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    RawConfig::parse(&text).map_err(CliError::Config)
}

fn resolve(raw: &RawConfig) -> Result<ValidatedConfig, CliError> {
    validate_raw(raw).map_err(CliError::Config)
}

fn output_path(explicit: &Option<PathBuf>, stem: &str) -> PathBuf {
    match explicit {
        Some(p) => p.clone(),
        None => {
            let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{stem}.csv"))
        }
    }
}

fn write_to(path: &Path, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    if path == Path::new("-") {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        write(&mut lock)?;
        return Ok(lock.flush()?);
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut file = BufWriter::new(File::create(path)?);
    write(&mut file)?;
    file.flush()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn parse_engines(names: &[String]) -> Result<Vec<Engine>, CliError> {
    names
        .iter()
        .map(|n| Engine::from_name(n.trim()).ok_or_else(|| CliError::Usage(format!("unknown engine '{n}'"))))
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Figure {
            name,
            config,
            engines,
            p_set,
            common,
        } => {
            let mut raw = match &config {
                Some(path) => read_raw(path)?,
                None => RawConfig::default(),
            };
            common.apply(&mut raw);
            let cfg = resolve(&raw)?;
            if cfg.sweep.is_some() {
                return Err(CliError::Usage("figure presets ignore sweep.* keys; remove them or use `sweep`".into()));
            }
            let opts = PresetOptions {
                base: cfg.params,
                mc: cfg.mc,
                settings: cfg.settings,
                engines: engines.as_deref().map(parse_engines).transpose()?,
                p_set,
            };
            let result = run_figure_preset(name, &opts)?;
            write_to(&output_path(&common.out, name.name()), |w| write_figure_csv(w, &result))?;
            figure_failure(&result).map_or(Ok(()), Err)
        }
        Command::Sweep { config, common } => {
            let mut raw = read_raw(&config)?;
            common.apply(&mut raw);
            let cfg = resolve(&raw)?;
            let spec = cfg
                .sweep
                .ok_or_else(|| CliError::Usage("configuration has no sweep.* keys".into()))?;
            let result = run_sweep(&spec, &cfg.params, &cfg.mc, &cfg.settings);
            let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
            write_to(&output_path(&common.out, stem), |w| output::write_sweep_csv(w, &result))?;
            sweep_failure(&result).map_or(Ok(()), Err)
        }
        Command::Validate { config } => {
            let cfg = resolve(&read_raw(&config)?)?;
            println!("params: {}", cfg.params);
            println!(
                "montecarlo: replications={} window_m={} fading_draws={} confidence={} seed={}",
                cfg.mc.replications,
                cfg.mc.window.width(),
                cfg.mc.fading_draws_per_geometry,
                cfg.mc.confidence_level,
                cfg.mc.root_seed.0
            );
            match &cfg.sweep {
                Some(s) => println!(
                    "sweep: parameter={} values={} p_set={:?} metric={} engines={:?}",
                    s.parameter().name(),
                    s.values().len(),
                    s.p_set(),
                    s.metric().name(),
                    s.engines().iter().map(|e| e.name()).collect::<Vec<_>>()
                ),
                None => println!("sweep: none"),
            }
            for w in cfg.mc.warnings(&cfg.params) {
                println!("warning: {w}");
            }
            println!("ok");
            Ok(())
        }
        Command::Density { config } => {
            let cfg = resolve(&read_raw(&config)?)?;
            let d = DensityApproximations::new(&cfg.params);
            let per_km2 = |x: f64| x * 1e6;
            println!("lambda_A1        {:.6e} per_m2  ({:.3} per_km2)", d.lambda_a1, per_km2(d.lambda_a1));
            println!("lambda_A2        {:.6e} per_m2  ({:.3} per_km2)", d.lambda_a2, per_km2(d.lambda_a2));
            println!("lambda_A3        {:.6e} per_m2  ({:.3} per_km2)", d.lambda_a3, per_km2(d.lambda_a3));
            println!("lambda_tilde_W2  {:.6e} per_m2  ({:.3} per_km2)", d.lambda_tilde_w2, per_km2(d.lambda_tilde_w2));
            println!("P1               {:.6}", d.p1);
            println!("P2               {:.6}", d.p2);
            let flag = |ok: bool| if ok { "holds" } else { "violated" };
            println!("lambda_tilde_W2 < P1*lambda_W1      {}", flag(d.validity_a));
            println!("lambda_tilde_W2 < P1*lambda_hat_W1  {}", flag(d.validity_b));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            if !matches!(e, CliError::Config(_)) {
                eprintln!();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
