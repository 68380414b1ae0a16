use std::io::Write;

use rayon::prelude::*;

use sqkd_core::channel::{gain_window, loss_budget, EstimatorKind, LinkBudget};
use sqkd_core::protocol::{run_session, SessionConfig, SessionOutcome};
use sqkd_core::rng::derive_seed;
use sqkd_core::{GaussianMode, Quadrature};

use crate::config::{ExperimentSpec, SessionSpec};
use crate::error::CliError;

pub const SUMMARY_HEADER: [&str; 9] = [
    "parameter",
    "value",
    "repetitions",
    "kept_fraction",
    "key_rate_symbols_per_round",
    "error_rate",
    "detection_flag_rate",
    "expected_error_rate",
    "status",
];

/// Float formatting used in every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Aggregate over the repetitions at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub parameter: String,
    pub value: f64,
    pub repetitions: usize,
    pub kept_fraction: f64,
    pub key_rate: f64,
    /// Symbol error rate over all kept rounds of all repetitions.
    pub error_rate: f64,
    pub detection_flag_rate: f64,
    pub expected_error_rate: f64,
    /// `ok`, or the reason the point could not run.
    pub status: String,
}

impl SummaryRow {
    fn failed(parameter: &str, value: f64, repetitions: usize, reason: String) -> Self {
        SummaryRow {
            parameter: parameter.to_string(),
            value,
            repetitions,
            kept_fraction: f64::NAN,
            key_rate: f64::NAN,
            error_rate: f64::NAN,
            detection_flag_rate: f64::NAN,
            expected_error_rate: f64::NAN,
            status: reason,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.parameter.clone(),
            fmt_f64(self.value),
            self.repetitions.to_string(),
            fmt_f64(self.kept_fraction),
            fmt_f64(self.key_rate),
            fmt_f64(self.error_rate),
            fmt_f64(self.detection_flag_rate),
            fmt_f64(self.expected_error_rate),
            self.status.clone(),
        ]
    }
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Loss budget of the session's link under the experiment's margin.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub kind: EstimatorKind,
    /// `None` when the squeezed variance already exceeds the target.
    pub budget: Option<f64>,
    pub gamma_t: f64,
    pub gain_window: Option<(f64, f64)>,
}

impl BudgetReport {
    pub fn within_budget(&self) -> bool {
        self.budget.is_some_and(|b| self.gamma_t <= b)
    }
}

pub fn budget_report(spec: &ExperimentSpec, session: &SessionSpec) -> Result<BudgetReport, CliError> {
    let var0 = GaussianMode::squeezed(Quadrature::X1, 0.0, session.r)?.var(Quadrature::X1);
    let link = LinkBudget::new(spec.link.s_margin, session.binning.delta, var0)?;
    let kind = if session.amplifier.is_some() {
        EstimatorKind::AmplifiedRight
    } else {
        EstimatorKind::Plain
    };
    let gain = session.amplifier.map_or(1.0, |a| a.gain);
    let budget = loss_budget(kind, &link, gain).ok();
    let window = session.amplifier.map(|_| {
        let w = gain_window(spec.link.s_margin, session.binning.delta, spec.link.dominance_factor);
        (w.min, w.max)
    });
    Ok(BudgetReport {
        kind,
        budget,
        gamma_t: session.gamma_t,
        gain_window: window,
    })
}

/// Sessions for one sweep point.
fn sweep_point(spec: &ExperimentSpec, index: usize) -> Result<(String, f64, SessionSpec), CliError> {
    match &spec.sweep {
        None => Ok((String::new(), f64::NAN, spec.session.clone())),
        Some(sweep) => {
            let values = sweep.resolved_values()?;
            let v = values[index];
            Ok((sweep.parameter.clone(), v, spec.session.with_parameter(&sweep.parameter, v)?))
        }
    }
}

pub fn sweep_len(spec: &ExperimentSpec) -> Result<usize, CliError> {
    Ok(match &spec.sweep {
        None => 1,
        Some(s) => s.resolved_values()?.len(),
    })
}

/// Seed of repetition `rep` at sweep point `point`.
pub fn session_seed(master_seed: u64, point: usize, rep: usize) -> u64 {
    derive_seed(master_seed, &[point as u64, rep as u64])
}

pub fn session_config(spec: &ExperimentSpec, master_seed: u64, point: usize, rep: usize) -> Result<SessionConfig, CliError> {
    let (_, _, session) = sweep_point(spec, point)?;
    Ok(session.build(session_seed(master_seed, point, rep))?)
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<SummaryRow>,
    pub budgets: Vec<BudgetReport>,
}

/// Runs every sweep point and repetition in parallel. Results are ordered by
/// sweep index and depend only on `master_seed`. A point whose parameters are
/// infeasible becomes a failed row; with `link.enforce_budget` the whole
/// experiment fails instead.
pub fn run_experiment(spec: &ExperimentSpec, master_seed: u64) -> Result<ExperimentResult, CliError> {
    let n_points = sweep_len(spec)?;
    let points: Vec<(String, f64, SessionSpec)> = (0..n_points).map(|i| sweep_point(spec, i)).collect::<Result<_, _>>()?;
    let budgets: Vec<BudgetReport> = points
        .iter()
        .map(|(_, _, s)| budget_report(spec, s))
        .collect::<Result<_, _>>()?;
    if spec.link.enforce_budget {
        if let Some((i, b)) = budgets.iter().enumerate().find(|(_, b)| !b.within_budget()) {
            return Err(CliError::Infeasible(match b.budget {
                None => format!("sweep point {i}: no admissible loss at s_margin = {}", spec.link.s_margin),
                Some(budget) => format!("sweep point {i}: gamma_t = {} exceeds the loss budget {budget}", b.gamma_t),
            }));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..n_points)
        .flat_map(|i| (0..spec.repetitions).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<Result<SessionOutcome, String>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let config = points[i].2.build(session_seed(master_seed, i, j)).map_err(|e| e.to_string())?;
            run_session(&config).map_err(|e| e.to_string())
        })
        .collect();

    let rows = points
        .iter()
        .enumerate()
        .map(|(i, (parameter, value, session))| {
            let chunk = &outcomes[i * spec.repetitions..(i + 1) * spec.repetitions];
            summarise(parameter, *value, session, chunk)
        })
        .collect();
    Ok(ExperimentResult { rows, budgets })
}

fn summarise(parameter: &str, value: f64, session: &SessionSpec, outcomes: &[Result<SessionOutcome, String>]) -> SummaryRow {
    let reps = outcomes.len();
    if let Some(Err(e)) = outcomes.iter().find(|o| o.is_err()) {
        return SummaryRow::failed(parameter, value, reps, e.replace(',', ";"));
    }
    let ok: Vec<&SessionOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let rounds: usize = ok.iter().map(|o| o.transcript.len()).sum();
    let kept: usize = ok.iter().map(|o| o.kept_rounds()).sum();
    let key: usize = ok.iter().map(|o| o.kept_rounds() - o.report.checked_rounds).sum();
    let errors: usize = ok
        .iter()
        .map(|o| o.key.alice.iter().zip(&o.key.bob).filter(|(a, b)| a != b).count())
        .sum();
    let flags = ok.iter().filter(|o| o.report.any_flag()).count();
    let expected = session
        .build(0)
        .ok()
        .and_then(|c| sqkd_core::protocol::expected_honest_error(&c).ok())
        .unwrap_or(f64::NAN);
    SummaryRow {
        parameter: parameter.to_string(),
        value,
        repetitions: reps,
        kept_fraction: kept as f64 / rounds as f64,
        key_rate: key as f64 / rounds as f64,
        error_rate: if kept == 0 { f64::NAN } else { errors as f64 / kept as f64 },
        detection_flag_rate: flags as f64 / reps as f64,
        expected_error_rate: expected,
        status: "ok".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use std::path::Path;

    fn spec(text: &str) -> ExperimentSpec {
        parse_config(text, Path::new("t.toml")).unwrap()
    }

    #[test]
    fn summary_is_deterministic_across_thread_counts() {
        let s = spec("name = \"d\"\nrepetitions = 3\n[session]\nn_rounds = 400\n[sweep]\nparameter = \"gamma_t\"\nvalues = [0.0, 1e-3]\n");
        let csv_with = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let result = pool.install(|| run_experiment(&s, 42)).unwrap();
            let mut buf = Vec::new();
            write_summary_csv(&result.rows, &mut buf).unwrap();
            buf
        };
        assert_eq!(csv_with(1), csv_with(4));
    }

    #[test]
    fn infeasible_budget_is_reported() {
        let s = spec("name = \"b\"\n[session]\nr = 3.35\ngamma_t = 1e-3\nn_rounds = 200\n[link]\nenforce_budget = true\n");
        assert!(matches!(run_experiment(&s, 1), Err(CliError::Infeasible(_))));
        let s = spec("name = \"b\"\n[session]\nr = 5.0\ngamma_t = 1e-4\nn_rounds = 200\n[link]\nenforce_budget = true\n");
        run_experiment(&s, 1).unwrap();
    }

    #[test]
    fn failed_points_become_rows() {
        // A quarter of 120 rounds is kept, so the check sample falls below ten.
        let s = spec("name = \"f\"\n[session]\nn_rounds = 120\ncheck_fraction = 0.25\n[session.amplifier]\ngain = 2.0\nrandomized = true\n[sweep]\nparameter = \"amplifier.gain\"\nvalues = [2.0, 3.0]\n");
        let result = run_experiment(&s, 3).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert!(result.rows.iter().any(|r| r.status.contains("check")), "{:?}", result.rows);
    }
}
