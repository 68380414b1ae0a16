use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form figures of merit of a beam-splitter tap with reflectivity
/// `R` on a state of width `σ = e^{-r}` centred at `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapAnalysis {
    /// `√((T/R + σ²)/4)`: spread of Eve's rescaled estimate of `s`.
    pub eve_estimator_stddev: f64,
    /// Bob's conditioned width over the original, `1/√(T + σ²R)`.
    pub bob_width_ratio: f64,
    /// Leading-order shift `−sR/2 + y√R` at the typical `y = −√R s`.
    pub bob_center_shift: f64,
}

fn check_reflection(reflection: f64) -> Result<()> {
    if reflection > 0.0 && reflection < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSession(format!(
            "tap reflection must be in (0, 1), got {reflection}"
        )))
    }
}

pub fn tap_attack_analysis(reflection: f64, r: f64, s: f64) -> Result<TapAnalysis> {
    check_reflection(reflection)?;
    let t = 1.0 - reflection;
    let sigma2 = (-2.0 * r).exp();
    let y = -reflection.sqrt() * s;
    Ok(TapAnalysis {
        eve_estimator_stddev: ((t / reflection + sigma2) / 4.0).sqrt(),
        bob_width_ratio: (t + sigma2 * reflection).sqrt().recip(),
        bob_center_shift: -s * reflection / 2.0 + y * reflection.sqrt(),
    })
}

/// Exact centre of the transmitted state after Eve reads `y` on the
/// reflected `X1` port, minus the original centre `s`.
pub fn tap_exact_center_shift(reflection: f64, r: f64, s: f64, y: f64) -> Result<f64> {
    check_reflection(reflection)?;
    let t = 1.0 - reflection;
    let sigma2 = (-2.0 * r).exp();
    Ok(t.sqrt() * (s + reflection.sqrt() * (1.0 - sigma2) * y) / (t + reflection * sigma2) - s)
}

/// How Bob's disturbance is bounded over `|s| ≤ s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftModel {
    /// `|shift| ≈ R·|s|`, giving the condition `R < δ/s_max`.
    #[default]
    LeadingOrder,
    /// `|−sR/2 + y√R|` at `y = −√R s`, i.e. `3R|s|/2`.
    Typical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapScan {
    pub delta: f64,
    pub r: f64,
    /// Largest `|s|` Alice may send; `1/σ` or the binning half-range.
    pub s_max: f64,
    pub points: usize,
    pub reflection_min: f64,
    pub reflection_max: f64,
    pub shift_model: ShiftModel,
}

impl TapScan {
    /// 100-point log grid over `R ∈ [1e-6, 1 − 1e-6]` with `s_max = 1/σ`.
    pub fn new(delta: f64, r: f64) -> Self {
        TapScan {
            delta,
            r,
            s_max: r.exp(),
            points: 100,
            reflection_min: 1e-6,
            reflection_max: 1.0 - 1e-6,
            shift_model: ShiftModel::LeadingOrder,
        }
    }

    pub fn reflections(&self) -> Vec<f64> {
        let (a, b) = (self.reflection_min.log10(), self.reflection_max.log10());
        let n = self.points;
        (0..n)
            .map(|k| {
                let f = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                10f64.powf(a + f * (b - a))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TapScanRow {
    pub reflection: f64,
    pub eve_stddev: f64,
    pub bob_width_ratio: f64,
    pub max_shift: f64,
    pub eve_accurate: bool,
    pub bob_undisturbed: bool,
}

impl TapScanRow {
    pub fn compatible(&self) -> bool {
        self.eve_accurate && self.bob_undisturbed
    }
}

/// One row per reflectivity: can Eve resolve a bin, and does Bob stay within
/// one bin for every `|s| ≤ s_max`?
pub fn tap_scan(scan: &TapScan) -> Result<Vec<TapScanRow>> {
    if !(scan.delta > 0.0) || !(scan.s_max > 0.0) || scan.points == 0 {
        return Err(Error::InvalidSession("tap scan needs delta > 0, s_max > 0 and points >= 1".into()));
    }
    scan.reflections()
        .into_iter()
        .map(|reflection| {
            let a = tap_attack_analysis(reflection, scan.r, scan.s_max)?;
            let max_shift = match scan.shift_model {
                ShiftModel::LeadingOrder => reflection * scan.s_max,
                ShiftModel::Typical => a.bob_center_shift.abs(),
            };
            Ok(TapScanRow {
                reflection,
                eve_stddev: a.eve_estimator_stddev,
                bob_width_ratio: a.bob_width_ratio,
                max_shift,
                eve_accurate: a.eve_estimator_stddev <= scan.delta,
                bob_undisturbed: max_shift < scan.delta,
            })
        })
        .collect()
}

/// Reflectivities at which a tap would be both informative and invisible.
pub fn tap_compatible_region(scan: &TapScan) -> Result<Vec<TapScanRow>> {
    Ok(tap_scan(scan)?.into_iter().filter(TapScanRow::compatible).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_reflection_limit_shows_everything() {
        let r = 2.0;
        let a = tap_attack_analysis(1.0 - 1e-12, r, 1.0).unwrap();
        assert!((a.eve_estimator_stddev - (-r).exp() / 2.0).abs() < 1e-6);
    }

    #[test]
    fn vanishing_reflection_swamps_eve() {
        let a = tap_attack_analysis(1e-10, 3.35, 1.0).unwrap();
        assert!(a.eve_estimator_stddev > 1e4);
        assert!((a.bob_width_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn typical_shift_is_three_halves_sr() {
        let a = tap_attack_analysis(0.01, 3.35, 2.0).unwrap();
        assert!((a.bob_center_shift + 1.5 * 2.0 * 0.01).abs() < 1e-15);
        assert!(tap_attack_analysis(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn exact_shift_expands_to_plus_half_sr() {
        // √T/(T + σ²R) ≈ 1 + R/2, so the exact shift is +sR/2 + y√R at small R.
        for (reflection, s, y) in [(1e-3, 2.0, -0.05), (1e-4, -5.0, 0.01), (1e-3, 10.0, 0.0)] {
            let exact = tap_exact_center_shift(reflection, 6.0, s, y).unwrap();
            let leading = s * reflection / 2.0 + y * f64::sqrt(reflection);
            assert!((exact - leading).abs() < 1e-5, "{exact} vs {leading}");
        }
    }

    #[test]
    fn no_compatible_reflection_at_reference_parameters() {
        let mut scan = TapScan::new(0.125, 3.35);
        assert!(tap_compatible_region(&scan).unwrap().is_empty());
        scan.s_max = (3.35f64).exp() / 4.0;
        assert!(tap_compatible_region(&scan).unwrap().is_empty());
        scan.shift_model = ShiftModel::Typical;
        assert!(tap_compatible_region(&scan).unwrap().is_empty());
    }

    #[test]
    fn wide_bins_reopen_the_window() {
        // With δ ≈ 1 and small s_max the conditions overlap.
        let mut scan = TapScan::new(1.2, 3.35);
        scan.s_max = 1.0;
        assert!(!tap_compatible_region(&scan).unwrap().is_empty());
    }
}
