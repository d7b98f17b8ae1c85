use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use transonic::config::RunConfig;
use transonic::run;

#[derive(Parser)]
#[command(name = "transonic", version, about = "Front tracking for steady supersonic flow above a free boundary")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one run at the first delta and write its artifacts.
    Run(Opts),
    /// Run every delta and tabulate residuals and distances.
    Study(Opts),
    /// Re-run the verifier on the artifacts in --out.
    Verify(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long)]
    xmax: Option<f64>,
}

impl Opts {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => RunConfig::default(),
        };
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = &self.delta {
            cfg.deltas = d.clone();
        }
        if let Some(x) = self.xmax {
            cfg.x_max = x;
            cfg.weak_t = cfg.weak_t.min(x);
            cfg.weak_s = cfg.weak_s.min(cfg.weak_t / 2.0);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summary(rep: &run::RunReport) {
    println!(
        "delta {} events {} (collisions {}, reflections {}) cutoff N = {}",
        rep.delta, rep.events, rep.collisions, rep.reflections, rep.constants.cutoff
    );
    println!(
        "glimm: G {} -> {}, flagged {}, g increases {}",
        rep.glimm.g_initial, rep.glimm.g_final, rep.glimm.flagged, rep.glimm.g_increases
    );
    println!(
        "bounds: TV {} sup {} |g'| {}",
        rep.bounds.max_tv, rep.bounds.max_sup, rep.bounds.max_boundary_slope
    );
    println!(
        "rh: shock {} step {} contact {} boundary {} inadmissible {}",
        rep.rh.max_shock, rep.rh.max_step, rep.rh.max_contact, rep.rh.max_boundary, rep.rh.inadmissible_shocks
    );
    println!(
        "weak form on [{}, {}]: max residual {} E {}",
        rep.weak_form.s,
        rep.weak_form.t,
        rep.weak_form.max_residual(),
        rep.weak_form.e
    );
    match (&rep.asymptotic, &rep.asymptotic_error) {
        (Some(a), _) => println!(
            "far field: slope error {} kind {:?} (predicted {:?})",
            a.slope_error, a.measured_kind, a.predicted_kind
        ),
        (None, Some(e)) => println!("far field: {e}"),
        _ => {}
    }
    if let Some(e) = &rep.abort {
        println!("aborted: {e}");
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(o) => {
            let cfg = o.config()?;
            let rep = run::run(&cfg)?;
            summary(&rep);
            Ok(!rep.failed())
        }
        Command::Study(o) => {
            let cfg = o.config()?;
            let rep = run::study(&cfg)?;
            run::write_study(&cfg.out, &rep)?;
            println!("delta,events,max_residual,entropy,g_to_next");
            for r in &rep.rows {
                println!(
                    "{},{},{},{},{}",
                    r.delta,
                    r.events,
                    r.max_residual,
                    r.entropy,
                    r.g_to_next.map_or(String::new(), |g| g.to_string())
                );
            }
            println!(
                "residual slope {} g distances decrease {}",
                rep.residual_slope, rep.g_distances_decrease
            );
            Ok(rep.rows.iter().all(|r| r.flagged == 0))
        }
        Command::Verify(o) => {
            let Some(dir) = o.out.clone() else {
                bail!("verify needs --out pointing at a run directory");
            };
            let cfg = o.config.as_ref().map(|_| o.config()).transpose()?;
            let rep = run::verify(cfg.as_ref(), &dir)?;
            summary(&rep);
            Ok(!rep.failed())
        }
    }
}
