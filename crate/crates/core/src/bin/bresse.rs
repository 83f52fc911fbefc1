use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bresse::harness::write_decay_report;
use bresse::{
    load_config_or_preset, run_chi_scan, run_decay, run_l_limit_scan, run_simulation, validate_params,
    ChiScanConfig, DecayOptions, Error, RunConfig,
};

#[derive(Parser)]
#[command(name = "bresse", version, about = "Thermoelastic transmission Bresse beam simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Config file, or the name of a built-in preset (paper-5.1, paper-5.2).
    #[arg(long)]
    config: String,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    n_per_unit: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single simulation.
    Run(Common),
    /// Curvature scan against the straight beam (0 denotes the straight model).
    LScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001])]
        l_values: Vec<f64>,
    },
    /// Double-limit scan against the von Kármán beam.
    ChiScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 10.0, 100.0, 1000.0])]
        chi: Vec<f64>,
    },
    /// Long-time decay study (requires zero heat sources).
    Decay(Common),
    /// Checks the parameters only.
    Validate(Common),
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = load_config_or_preset(&c.config)?;
    if let Some(out) = &c.out {
        cfg.outdir = out.clone();
    }
    if let Some(t) = c.t_end {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidConfig(format!("--t-end {t} must be positive")));
        }
        cfg.time.t_end = t;
    }
    if let Some(n) = c.n_per_unit {
        cfg.n_per_unit = n;
    }
    Ok(cfg)
}

fn print_table(t: &bresse::ConvergenceTable) {
    println!("{}", t.header.join("\t"));
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6e}")).collect();
        println!("{}", cells.join("\t"));
    }
}

fn execute(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Run(c) => {
            let cfg = load(&c)?;
            let s = run_simulation(&cfg)?;
            println!(
                "steps {} dt {:.6e} final E {:.10e} max |balance residual| {:.3e} max flux residual {:.3e} wall {:.2} s",
                s.steps, s.dt, s.final_energy, s.max_abs_balance_residual, s.max_transmission_flux, s.wall_time_s
            );
            println!("wrote {} files to {}", s.files.len(), cfg.outdir.display());
        }
        Cmd::LScan { common, l_values } => {
            let cfg = load(&common)?;
            print_table(&run_l_limit_scan(&cfg, &l_values)?);
        }
        Cmd::ChiScan { common, chi } => {
            let cfg = load(&common)?;
            let scan = ChiScanConfig {
                chi_values: chi,
                ..Default::default()
            };
            print_table(&run_chi_scan(&cfg, &scan)?);
        }
        Cmd::Decay(c) => {
            let cfg = load(&c)?;
            let r = run_decay(&cfg, &DecayOptions::for_config(&cfg))?;
            write_decay_report(&r, &cfg.outdir)?;
            for (f, t) in &r.thresholds {
                match t {
                    Some(t) => println!("gap below {f} of initial at t = {t:.6}"),
                    None => println!("gap below {f} of initial: not reached by t = {}", r.t_final),
                }
            }
            println!(
                "largest step increase relative to E(0): E {:.3e}, L {:.3e}; lyapunov monotone: {}",
                r.max_energy_increase, r.max_lyapunov_increase, r.lyapunov_monotone
            );
        }
        Cmd::Validate(c) => {
            let cfg = load(&c)?;
            let report = validate_params(&cfg.params)?;
            println!("parameters valid; attractor_condition = {}", report.attractor_condition);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
