use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gss::commands::{self, BackendChoice, ComputeSettings};
use gss::config::load_system;
use gss::container::{load_expansion, save_expansion, save_pade};
use gss::csvio::{read_forcing, state_header, write_forcing, write_trajectory};
use gss::error::{CliError, Result};
use gss::generate::{generate_forcing, ForcingKind, GenerateSpec};
use gss_core::gss::FrcStatus;

#[derive(Parser)]
#[command(name = "gss", version, about = "Generalized steady states of forced nonlinear mechanical systems")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Kernel,
    Newmark,
    Qp,
}

#[derive(Args)]
struct Inputs {
    /// System description (TOML).
    #[arg(long)]
    system: PathBuf,
    /// Forcing CSV (optional time column, one column per dof).
    #[arg(long)]
    forcing: PathBuf,
    /// Time step when the forcing has no time column.
    #[arg(long)]
    dt: Option<f64>,
    /// Seconds of zero forcing prepended.
    #[arg(long, default_value_t = 0.0)]
    pad: f64,
    #[arg(long, default_value_t = 5)]
    order: usize,
    #[arg(long, value_enum, default_value = "kernel")]
    backend: BackendArg,
    #[arg(long, default_value_t = 1e-3)]
    eps_trunc: f64,
    /// Evaluation amplitude (default: the forcing's supremum).
    #[arg(long)]
    delta: Option<f64>,
    /// Base frequencies (rad/s) for the qp backend.
    #[arg(long, value_delimiter = ',')]
    frequencies: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    max_harmonic: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Expand, sum and write the steady state.
    Compute {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
        /// Also save the expansion container here.
        #[arg(long)]
        expansion_out: Option<PathBuf>,
    },
    /// Run GSS and full Newmark side by side.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pade resummation of a saved expansion.
    Pade {
        #[arg(long)]
        expansion: PathBuf,
        /// Orders as L:M.
        #[arg(long)]
        pade: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pade_out: Option<PathBuf>,
    },
    /// Forced-response curve under harmonic forcing.
    Frc {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        omega_min: f64,
        #[arg(long)]
        omega_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 5)]
        order: usize,
        /// Forced dofs (unit weight each).
        #[arg(long, value_delimiter = ',', default_value = "0")]
        dofs: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        probe: usize,
        #[arg(long, default_value_t = 5)]
        max_harmonic: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectrum, Gamma and the contraction check.
    Diagnose {
        #[arg(long)]
        system: PathBuf,
        /// Radius of the state ball.
        #[arg(long)]
        ball: f64,
        /// Forcing amplitude.
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        eps_trunc: f64,
    },
    /// Write a forcing CSV.
    Generate {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        delta: f64,
        /// Degrees of freedom of the target system.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        dofs: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Chirp {
        #[arg(long)]
        omega0: f64,
    },
    Gaussian {
        #[arg(long)]
        sigma: f64,
        /// Cutoff frequency in Hz.
        #[arg(long)]
        cutoff: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Rossler {
        #[arg(long, default_value_t = 0.2)]
        a: f64,
        #[arg(long, default_value_t = 0.2)]
        b: f64,
        #[arg(long, default_value_t = 5.7)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    TwoTone {
        #[arg(long)]
        omega1: f64,
        #[arg(long)]
        omega2: f64,
    },
}

fn settings(i: &Inputs) -> ComputeSettings {
    ComputeSettings {
        order: i.order,
        backend: match i.backend {
            BackendArg::Kernel => BackendChoice::Kernel,
            BackendArg::Newmark => BackendChoice::Newmark,
            BackendArg::Qp => BackendChoice::Qp,
        },
        eps_trunc: i.eps_trunc,
        delta: i.delta,
        frequencies: i.frequencies.clone(),
        max_harmonic: i.max_harmonic,
    }
}

fn load_inputs(i: &Inputs) -> Result<(gss_core::model::MechanicalSystem, gss_core::model::ForcingSignal)> {
    let system = load_system(&i.system)?;
    let forcing = read_forcing(&i.forcing, system.n(), i.dt, i.pad)?;
    Ok((system, forcing))
}

fn parse_pade(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Config(format!("--pade expects L:M, got `{s}`"));
    let (l, m) = s.split_once(':').ok_or_else(bad)?;
    Ok((l.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compute { inputs, out, expansion_out } => {
            let (system, forcing) = load_inputs(&inputs)?;
            let r = commands::compute(&system, &forcing, &settings(&inputs))?;
            let e = &r.expansion;
            write_trajectory(&out, &state_header(e.dim()), e.grid(), &r.trajectory, forcing.pad())?;
            if let Some(dir) = expansion_out {
                save_expansion(&dir, e)?;
            }
            println!("backend: {}", e.backend.as_str());
            println!("order: {}", e.order());
            println!("delta: {:e}", r.delta);
            println!("retained_modes: {}", e.retained_modes);
            println!("wall_time_s: {:.6}", r.wall.as_secs_f64());
            match &e.divergence {
                Some(w) => println!(
                    "divergence_warning: sup grows from {:e} (order {}) to {:e} (order {})",
                    w.sup_half,
                    w.half_order,
                    w.sup_full,
                    e.order()
                ),
                None => println!("divergence_warning: none"),
            }
        }
        Command::Compare { inputs, out } => {
            let (system, forcing) = load_inputs(&inputs)?;
            let r = commands::compare(&system, &forcing, &settings(&inputs))?;
            let dim = r.newmark.dim();
            let mut both = gss_core::Trajectory::zeros(2 * dim, r.newmark.len());
            for k in 0..r.newmark.len() {
                for i in 0..dim {
                    both.set(i, k, r.gss.trajectory.get(i, k));
                    both.set(dim + i, k, r.newmark.get(i, k));
                }
            }
            let base = state_header(dim);
            let header: Vec<String> = std::iter::once("t".to_string())
                .chain(base[1..].iter().map(|h| format!("gss_{h}")))
                .chain(base[1..].iter().map(|h| format!("newmark_{h}")))
                .collect();
            write_trajectory(&out, &header, forcing.grid(), &both, forcing.pad())?;
            println!("nmte: {:e}", r.nmte);
            println!("gss_wall_time_s: {:.6}", r.gss.wall.as_secs_f64());
            println!("newmark_wall_time_s: {:.6}", r.newmark_wall.as_secs_f64());
            println!("speedup: {:.3}", r.speedup());
        }
        Command::Pade { expansion, pade, delta, out, pade_out } => {
            let (l, m) = parse_pade(&pade)?;
            let e = load_expansion(&expansion)?;
            let delta = delta.unwrap_or(e.delta_ref);
            let (p, z) = commands::pade(&e, l, m, delta)?;
            write_trajectory(&out, &state_header(p.dim()), p.grid, &z, e.pad)?;
            if let Some(dir) = pade_out {
                save_pade(&dir, &p)?;
            }
            println!("pade: [{l}/{m}] at delta {delta:e}");
            println!("ill_conditioned_coordinates: {}", p.conditioning.iter().filter(|c| c.ill_conditioned).count());
        }
        Command::Frc { system, omega_min, omega_max, points, delta, order, dofs, probe, max_harmonic, out } => {
            let system = load_system(&system)?;
            let omegas = commands::linspace(omega_min, omega_max, points);
            let pts = commands::frc(&system, &omegas, &dofs, probe, delta, order, max_harmonic)?;
            let mut text = String::from("omega,amplitude,status\n");
            let mut flagged = 0;
            for p in &pts {
                let status = match &p.status {
                    FrcStatus::Ok => "ok".to_string(),
                    FrcStatus::NearResonance { mode, .. } => {
                        flagged += 1;
                        format!("near_resonance(mode {mode})")
                    }
                    FrcStatus::Failed(m) => format!("failed({})", m.replace(',', ";")),
                };
                let a = p.amplitude.map_or("nan".to_string(), |a| format!("{a:.16e}"));
                text.push_str(&format!("{:.16e},{a},{status}\n", p.omega));
            }
            write_text(&out, &text)?;
            println!("points: {}", pts.len());
            println!("near_resonance: {flagged}");
        }
        Command::Diagnose { system, ball, delta, dt, eps_trunc } => {
            let system = load_system(&system)?;
            let d = commands::diagnose(&system, ball, delta, dt, eps_trunc)?;
            println!("damping: {}", if d.structural { "structural" } else { "general" });
            println!("eigenvalues:");
            for l in &d.eigenvalues {
                println!("  {:+.10e} {:+.10e}i", l.re, l.im);
            }
            println!("gamma: {:e}", d.gamma);
            let r = &d.report;
            println!("norm_product: {:e}", r.vnorm_product);
            println!("lipschitz_f: {:e} (bound {:e})", r.lipschitz_f, r.lipschitz_f_bound);
            println!("contraction_factor: {:e}", r.contraction_factor);
            println!("admissible_delta: {:e}", r.admissible_delta_bound);
            println!("satisfied: {}", r.satisfied);
            println!("strict_factor: {:e}", r.strict_factor);
            println!("strict_admissible_delta: {:e}", r.strict_admissible_delta_bound);
            println!("strict_satisfied: {}", r.strict_satisfied);
            if let Some(m) = d.retained {
                println!("retained_modes: {} of {}", m.len(), d.eigenvalues.len());
            }
        }
        Command::Generate { kind, duration, dt, delta, n, dofs, out } => {
            let kind = match kind {
                GenKind::Chirp { omega0 } => ForcingKind::Chirp { omega0 },
                GenKind::Gaussian { sigma, cutoff, seed } => ForcingKind::FilteredGaussian { sigma, cutoff, seed },
                GenKind::Rossler { a, b, c, seed } => ForcingKind::Rossler { a, b, c, seed },
                GenKind::TwoTone { omega1, omega2 } => ForcingKind::TwoTone { omega1, omega2 },
            };
            let f = generate_forcing(&GenerateSpec { kind, duration, dt, delta, n_dofs: n, dofs })?;
            write_forcing(&out, &f)?;
            println!("samples: {}", f.len());
            println!("delta: {:e}", f.max_magnitude());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Config(format!("thread pool: {e}"))),
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {} {}: {e}", e.category(), e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
