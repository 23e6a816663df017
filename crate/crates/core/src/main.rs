use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use modqec::error::{Error, Result};
use modqec::harness::{
    build_point, fit_threshold, optimize_cutoff, parse_runs_csv, report_csv, report_row, run_sweep, run_sweep_with, runs_csv,
    should_abandon, CutoffOutcome, CutoffSpec, EmissionVariant, ExperimentConfig, FitPoint, FitResult, SchemeKind,
};
use modqec::noise::CircuitNoise;
use modqec::schemes::{carving_coherent_ghz, carving_sps_ghz, double_click, reflection_ghz, scan_carving_nsc, single_click, CarvingSource};
use modqec::superop::save_table;

#[derive(Parser)]
#[command(name = "modqec", about = "Distributed surface-code threshold simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity and success probability of the configured entanglement scheme.
    Scheme {
        #[arg(long)]
        config: PathBuf,
        /// Spin count for direct GHZ schemes (defaults to the architecture's GHZ size).
        #[arg(long)]
        n: Option<usize>,
        /// Carving only: pick n_sc up to this value under the success floor.
        #[arg(long)]
        scan_nsc: Option<usize>,
        #[arg(long, default_value_t = 1e-4)]
        p_succ_floor: f64,
    },
    /// Builds and saves the superoperator table at one error rate.
    Superop {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo sweep over distances and error rates; writes runs.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Threshold fit from a runs.csv; writes fit.json.
    Fit {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Searches the GHZ completion fraction that maximizes the threshold.
    Cutoff {
        #[arg(long)]
        config: PathBuf,
        /// Trials per point while probing.
        #[arg(long, default_value_t = 500)]
        probe_trials: usize,
    },
    /// Summary row at the fitted threshold(s).
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        fit_uf: Option<PathBuf>,
        #[arg(long)]
        fit_mwpm: Option<PathBuf>,
        #[arg(long)]
        x: Option<f64>,
    },
}

fn read_fit(path: &Path) -> Result<FitResult> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn scheme_report(cfg: &ExperimentConfig, n: Option<usize>, scan_nsc: Option<usize>, floor: f64) -> Result<String> {
    let n = n.unwrap_or(cfg.architecture.ghz_size());
    let mut out = String::from("scheme,variant,n,n_sc,p_g,fidelity,p_succ\n");
    for &p in &cfg.p_values {
        let noise = CircuitNoise::uniform(p)?;
        let (variant, n_out, n_sc, r) = match cfg.scheme {
            SchemeKind::Werner => ("-", n, None, modqec::harness::ghz_source(cfg, p)?),
            SchemeKind::Emission(EmissionVariant::SingleClick) => ("single", 2, None, single_click(&cfg.emission, &noise)?),
            SchemeKind::Emission(EmissionVariant::DoubleClick) => ("double", 2, None, double_click(&cfg.emission, &noise)?),
            SchemeKind::Reflection => ("-", n, None, reflection_ghz(&cfg.reflection, n, &noise)?),
            SchemeKind::Carving(source) => {
                let params = modqec::harness::estimate::carving_params(cfg);
                let n_u = cfg.carving_n_u.unwrap_or(n.div_ceil(2));
                let variant = if source == CarvingSource::SinglePhoton { "sps" } else { "coherent" };
                match scan_nsc {
                    Some(max) => {
                        let (n_sc, r) = scan_carving_nsc(&params, n_u, n - n_u, &noise, source, floor, max)?;
                        (variant, n, Some(n_sc), r)
                    }
                    None => {
                        let r = match source {
                            CarvingSource::SinglePhoton => carving_sps_ghz(&params, n_u, n - n_u, &noise)?,
                            CarvingSource::Coherent => carving_coherent_ghz(&params, n_u, n - n_u, &noise)?,
                        };
                        (variant, n, Some(params.n_sc), r)
                    }
                }
            }
        };
        let n_sc = n_sc.map_or("-".to_string(), |v| v.to_string());
        out.push_str(&format!("{},{variant},{n_out},{n_sc},{p},{:.12},{:.12e}\n", cfg.scheme.as_str(), r.fidelity(), r.p_succ));
    }
    Ok(out)
}

fn fit_rows(rows: &[modqec::harness::RunRow]) -> Result<Option<FitResult>> {
    let pts: Vec<FitPoint> = rows.iter().map(FitPoint::from).collect();
    if should_abandon(&pts) {
        return Ok(None);
    }
    match fit_threshold(&pts) {
        Ok(f) => Ok(Some(f)),
        Err(Error::NoCrossing) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scheme { config, n, scan_nsc, p_succ_floor } => {
            let cfg = ExperimentConfig::load(&config)?;
            print!("{}", scheme_report(&cfg, n, scan_nsc, p_succ_floor)?);
        }
        Command::Superop { config, p, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let setup = build_point(&cfg, p)?;
            save_table(&setup.table, &out)?;
            eprintln!(
                "wrote {} (p_ghz={:.6}, t_cut={}, ghz fidelity={:.6})",
                out.display(),
                setup.table.p_ghz(),
                setup.t_cut,
                setup.ghz.fidelity()
            );
        }
        Command::Run { config, out_dir, trials } => {
            let cfg = ExperimentConfig::load(&config)?;
            let rows = run_sweep_with(&cfg, trials.unwrap_or(cfg.trials))?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("runs.csv");
            std::fs::write(&path, runs_csv(&rows))?;
            eprintln!("wrote {}", path.display());
        }
        Command::Fit { runs, out } => {
            let rows = parse_runs_csv(&std::fs::read_to_string(&runs)?)?;
            let pts: Vec<FitPoint> = rows.iter().map(FitPoint::from).collect();
            if should_abandon(&pts) {
                println!("NT");
                return Ok(());
            }
            let fit = fit_threshold(&pts)?;
            let json = serde_json::to_string_pretty(&fit).map_err(|e| Error::Io(e.to_string()))?;
            let out = out.unwrap_or_else(|| runs.with_file_name("fit.json"));
            std::fs::write(&out, &json)?;
            println!("p_th = {:.6e} ± {:.1e}, nu0 = {:.4}", fit.p_th, fit.p_th_sigma(), fit.nu0);
        }
        Command::Cutoff { config, probe_trials } => {
            let base = ExperimentConfig::load(&config)?;
            let outcome = optimize_cutoff(|x| {
                let cfg = ExperimentConfig { cutoff: CutoffSpec::Fraction(x), ..base.clone() };
                let fit = fit_rows(&run_sweep_with(&cfg, probe_trials)?)?;
                eprintln!("x = {x:.4}: {}", fit.as_ref().map_or("NT".to_string(), |f| format!("p_th = {:.4e}", f.p_th)));
                Ok(fit.map(|f| (f.p_th, f.p_th_sigma())))
            })?;
            match outcome {
                CutoffOutcome::NoThreshold { .. } => println!("NT"),
                CutoffOutcome::Threshold { x, .. } => {
                    let cfg = ExperimentConfig { cutoff: CutoffSpec::Fraction(x), ..base };
                    match fit_rows(&run_sweep(&cfg)?)? {
                        Some(f) => println!("x = {x:.4}, p_th = {:.6e} ± {:.1e}", f.p_th, f.p_th_sigma()),
                        None => println!("x = {x:.4}, NT at full trials"),
                    }
                }
            }
        }
        Command::Report { config, fit_uf, fit_mwpm, x } => {
            let cfg = ExperimentConfig::load(&config)?;
            let uf = fit_uf.as_deref().map(read_fit).transpose()?;
            let mwpm = fit_mwpm.as_deref().map(read_fit).transpose()?;
            print!("{}", report_csv(&[report_row(&cfg, uf.as_ref(), mwpm.as_ref(), x)?]));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
