//! Alice–Bob–Eve key distribution sessions: preparation, transmission,
//! optional eavesdropping, random-basis homodyne detection, sifting and
//! error-rate detection, plus the beam-splitter tap analysis.

mod binning;
mod config;
mod detect;
mod round;
mod session;
mod sift;
mod tap;

pub use binning::{Alphabet, BinningScheme, MAX_SECURE_DELTA};
pub use config::{
    expected_honest_error, AmplifierSetting, DetectionSettings, EveStrategy, SessionConfig,
    MIN_EXPECTED_CHECKS,
};
pub use detect::{
    audit_wrong_amplifier, binomial_upper_tail, detect, AmplifierAudit, DetectionReport,
    MIN_AUDIT_ROUNDS, MIN_CHECK_ROUNDS,
};
pub use round::{alice_prepare, bob_measure, run_round, Preparation, RoundRecord};
pub use session::{run_session, write_transcript_csv, SessionOutcome, DETECTION_STREAM, TRANSCRIPT_HEADER};
pub use sift::{sift, SiftedKey};
pub use tap::{
    tap_attack_analysis, tap_compatible_region, tap_exact_center_shift, tap_scan, ShiftModel,
    TapAnalysis, TapScan, TapScanRow,
};
