use std::io::{self, Write};

use super::binning::BinningScheme;
use super::config::SessionConfig;
use super::detect::{detect, DetectionReport};
use super::round::{run_round, RoundRecord};
use super::sift::{sift, SiftedKey};
use crate::error::Result;
use crate::rng::stream_rng;

/// Stream reserved for choosing check rounds; round `i` uses stream `i`.
pub const DETECTION_STREAM: u64 = u64::MAX;

pub const TRANSCRIPT_HEADER: &str = "round,alice_axis,alice_bin,amp_axis,bob_axis,bob_value,bob_bin,kept,checked,mismatch";

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub transcript: Vec<RoundRecord>,
    pub key: SiftedKey,
    pub report: DetectionReport,
}

impl SessionOutcome {
    pub fn kept_rounds(&self) -> usize {
        self.key.len()
    }

    pub fn kept_fraction(&self) -> f64 {
        self.key.len() as f64 / self.transcript.len() as f64
    }

    /// Kept rounds left after the check sample is revealed, per round sent.
    pub fn key_rate(&self) -> f64 {
        (self.key.len() - self.report.checked_rounds) as f64 / self.transcript.len() as f64
    }

    /// Symbol error rate over every kept round.
    pub fn key_error_rate(&self) -> f64 {
        1.0 - self.key.agreement()
    }
}

/// Runs `config.n_rounds` rounds, sifts, and runs detection. Each round
/// draws from its own stream, so the transcript only depends on the seed.
pub fn run_session(config: &SessionConfig) -> Result<SessionOutcome> {
    config.validate()?;
    let mut transcript = (0..config.n_rounds)
        .map(|i| run_round(config, &mut stream_rng(config.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let key = sift(&transcript, &config.binning);
    let report = detect(&mut transcript, config, &mut stream_rng(config.seed, DETECTION_STREAM))?;
    Ok(SessionOutcome {
        transcript,
        key,
        report,
    })
}

/// Writes one CSV row per round; floats use 17 significant digits.
pub fn write_transcript_csv<W: Write>(
    transcript: &[RoundRecord],
    binning: &BinningScheme,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{TRANSCRIPT_HEADER}")?;
    for (i, rec) in transcript.iter().enumerate() {
        let amp = rec.amp_axis.map(|a| a.to_string()).unwrap_or_default();
        let bob_bin = rec.bob_bin.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{:.16e},{},{},{},{}",
            i,
            rec.alice_axis,
            rec.alice_bin,
            amp,
            rec.bob_axis,
            rec.bob_value,
            bob_bin,
            rec.kept as u8,
            rec.used_for_check as u8,
            rec.is_mismatch(binning) as u8,
        )?;
    }
    Ok(())
}
