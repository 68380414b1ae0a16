use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use sqkd_cli::acceptance::{self, CRITERIA, DEFAULT_ACCEPTANCE_SEED};
use sqkd_cli::config::{load_config, ExperimentSpec};
use sqkd_cli::error::{CliError, EXIT_CONFIG, EXIT_OK};
use sqkd_cli::experiment::{budget_report, fmt_f64, run_experiment, session_config, write_summary_csv};
use sqkd_core::protocol::{run_session, tap_scan, write_transcript_csv};

#[derive(Debug, Parser)]
#[command(name = "sqkd", version, about = "Squeezed-state QKD simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; overrides `session.seed` in the config.
    #[arg(long, global = true, env = "SQKD_SEED")]
    seed: Option<u64>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one session and write its transcript and detection report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every sweep point and repetition and write summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Scan the beam-splitter tap over reflectivity and write tap_scan.csv.
    Attack {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare closed forms against the grid oracles and write oracle.csv.
    OracleCheck,
    /// Run the acceptance criteria.
    Accept {
        /// Comma-separated criterion ids, e.g. `A1,A7`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { EXIT_OK as u8 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate { config } => simulate(&cli, &load_config(config)?),
        Command::Sweep { config } => sweep(&cli, &load_config(config)?),
        Command::Attack { config } => attack(&cli, &load_config(config)?),
        Command::OracleCheck => oracle_check(&cli),
        Command::Accept { only } => accept(&cli, only),
    }
}

fn master_seed(cli: &Cli, spec: Option<&ExperimentSpec>) -> u64 {
    cli.seed
        .or_else(|| spec.and_then(|s| s.session.seed))
        .unwrap_or(DEFAULT_ACCEPTANCE_SEED)
}

fn output_dir(cli: &Cli, spec: Option<&ExperimentSpec>, fallback: &str) -> Result<PathBuf, CliError> {
    let dir = cli
        .out
        .clone()
        .or_else(|| spec.map(|s| s.output_dir()))
        .unwrap_or_else(|| PathBuf::from("out").join(fallback));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    info!("writing {}", path.display());
    Ok(BufWriter::new(File::create(path)?))
}

fn simulate(cli: &Cli, spec: &ExperimentSpec) -> Result<(), CliError> {
    let dir = output_dir(cli, Some(spec), "simulate")?;
    let seed = master_seed(cli, Some(spec));
    let config = session_config(spec, seed, 0, 0)?;
    let outcome = run_session(&config)?;
    write_transcript_csv(&outcome.transcript, &config.binning, create(&dir, "transcript.csv")?)?;

    let budget = budget_report(spec, &spec.session)?;
    let r = &outcome.report;
    let mut report = create(&dir, "report.txt")?;
    writeln!(report, "rounds                {}", outcome.transcript.len())?;
    writeln!(report, "kept rounds           {}", outcome.kept_rounds())?;
    writeln!(report, "sifted symbols        {}", outcome.key.len())?;
    writeln!(report, "key rate per round    {}", fmt_f64(outcome.key_rate()))?;
    writeln!(report, "key error rate        {}", fmt_f64(outcome.key_error_rate()))?;
    writeln!(report, "checked rounds        {}", r.checked_rounds)?;
    writeln!(report, "check mismatches      {}", r.mismatches)?;
    writeln!(report, "observed error rate   {}", fmt_f64(r.observed_error_rate))?;
    writeln!(report, "expected error rate   {}", fmt_f64(r.expected_error_rate))?;
    writeln!(report, "binomial p-value      {}", fmt_f64(r.p_value))?;
    writeln!(report, "eavesdropper flagged  {}", r.eavesdropper_flagged)?;
    if let Some(a) = &r.wrong_amp_check {
        writeln!(report, "audit rounds          {}", a.rounds)?;
        writeln!(report, "audit spread ratio    {}", fmt_f64(a.spread_ratio))?;
        writeln!(report, "audit p-value         {}", fmt_f64(a.p_value))?;
        writeln!(report, "audit flagged         {}", a.flagged)?;
    }
    match budget.budget {
        Some(b) => writeln!(report, "loss budget ({:?})  {} (gamma_t = {})", budget.kind, fmt_f64(b), fmt_f64(budget.gamma_t))?,
        None => writeln!(report, "loss budget ({:?})  none at this margin", budget.kind)?,
    }
    report.flush()?;
    println!(
        "kept {} of {} rounds, key error rate {:.4e}, flagged {}",
        outcome.kept_rounds(),
        outcome.transcript.len(),
        outcome.key_error_rate(),
        r.any_flag()
    );
    Ok(())
}

fn sweep(cli: &Cli, spec: &ExperimentSpec) -> Result<(), CliError> {
    let dir = output_dir(cli, Some(spec), "sweep")?;
    let result = run_experiment(spec, master_seed(cli, Some(spec)))?;
    write_summary_csv(&result.rows, create(&dir, "summary.csv")?)?;
    let failed = result.rows.iter().filter(|r| !r.is_ok()).count();
    println!("{} sweep points, {failed} failed; wrote {}", result.rows.len(), dir.join("summary.csv").display());
    Ok(())
}

fn attack(cli: &Cli, spec: &ExperimentSpec) -> Result<(), CliError> {
    let dir = output_dir(cli, Some(spec), "attack")?;
    let scan = spec.tap_scan.build(&spec.session)?;
    let rows = tap_scan(&scan)?;
    let mut w = csv::Writer::from_writer(create(&dir, "tap_scan.csv")?);
    w.write_record(["reflection", "eve_stddev", "bob_width_ratio", "max_shift", "eve_accurate", "bob_undisturbed", "compatible"])?;
    for row in &rows {
        w.write_record([
            fmt_f64(row.reflection),
            fmt_f64(row.eve_stddev),
            fmt_f64(row.bob_width_ratio),
            fmt_f64(row.max_shift),
            row.eve_accurate.to_string(),
            row.bob_undisturbed.to_string(),
            row.compatible().to_string(),
        ])?;
    }
    w.flush()?;
    let compatible = rows.iter().filter(|r| r.compatible()).count();
    println!("{compatible} of {} reflectivities satisfy both tap conditions", rows.len());
    Ok(())
}

fn oracle_check(cli: &Cli) -> Result<(), CliError> {
    let dir = output_dir(cli, None, "oracle-check")?;
    let seed = master_seed(cli, None);
    let results = acceptance::run_acceptance_suite(&["A6", "A8"], seed)?;
    let mut w = create(&dir, "oracle.csv")?;
    acceptance::write_report_csv(&results, &mut w)?;
    w.flush()?;
    report_results(&results)
}

fn accept(cli: &Cli, only: &[String]) -> Result<(), CliError> {
    let dir = output_dir(cli, None, "acceptance")?;
    let seed = master_seed(cli, None);
    let ids: Vec<&str> = if only.is_empty() {
        CRITERIA.to_vec()
    } else {
        only.iter().map(|s| s.trim()).collect()
    };
    for id in &ids {
        if !CRITERIA.contains(id) {
            return Err(CliError::Usage(format!("unknown criterion '{id}'; expected one of {}", CRITERIA.join(", "))));
        }
    }
    let mut results = Vec::new();
    for id in ids {
        let r = acceptance::run_criterion(id, seed)?;
        print!("{r}");
        results.push(r);
    }
    acceptance::write_report_csv(&results, create(&dir, "acceptance.csv")?)?;
    acceptance::write_report_text(&results, create(&dir, "acceptance.txt")?)?;
    let failed = results.iter().filter(|r| !r.passed()).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        return Err(CliError::CriteriaFailed(failed));
    }
    Ok(())
}

fn report_results(results: &[acceptance::CriterionResult]) -> Result<(), CliError> {
    for r in results {
        print!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError::CriteriaFailed(failed));
    }
    Ok(())
}
