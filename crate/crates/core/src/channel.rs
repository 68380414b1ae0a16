//! Lossy fibre and phase-sensitive amplifier models.
//!
//! Loss of rate `γ` over a transit time `T` only enters through the product
//! `γT`: means shrink by `e^{-γT/2}` and each variance relaxes toward the
//! vacuum value, `Var → e^{-γT} Var + (1 − e^{-γT})/4`. The amplifier is an
//! ideal degenerate parametric amplifier, a pure squeeze of the quadrature
//! plane by `G` along one axis and `1/G` along the other.
//!
//! Bob reads the initial centre from an estimator that undoes the known
//! attenuation and gain (`ξ = e^{γT/2}X`, `ξ₁ = e^{γT/2}X/G`,
//! `ξ₂ = G e^{γT/2}X`); [`estimator_stats`] gives its exact spread and
//! [`loss_budget`] the small-loss bound on `γT` that keeps it below `sδ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianMode, Quadrature, VACUUM_VARIANCE};

pub const DEFAULT_S_MARGIN: f64 = 0.14;
pub const DEFAULT_DOMINANCE_FACTOR: f64 = 3.0;

fn check_loss(gamma_t: f64) -> Result<()> {
    if gamma_t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLoss(gamma_t))
    }
}

/// A fibre segment characterised by its loss-time product `γT = γL/c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSegment {
    gamma_t: f64,
}

impl FiberSegment {
    pub fn new(gamma_t: f64) -> Result<Self> {
        check_loss(gamma_t)?;
        Ok(FiberSegment { gamma_t })
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    /// Two segments in series.
    pub fn then(&self, next: &FiberSegment) -> FiberSegment {
        FiberSegment {
            gamma_t: self.gamma_t + next.gamma_t,
        }
    }

    pub fn transmit(&self, mode: &GaussianMode) -> GaussianMode {
        let eta = (-self.gamma_t).exp();
        let mean = mode.means().map(|m| eta.sqrt() * m);
        let var = mode
            .variances()
            .map(|v| eta * v + VACUUM_VARIANCE * (1.0 - eta));
        GaussianMode::from_parts(mean, var)
    }
}

/// Output of a fibre with loss-time product `gamma_t`.
pub fn loss_evolve(mode: &GaussianMode, gamma_t: f64) -> Result<GaussianMode> {
    Ok(FiberSegment::new(gamma_t)?.transmit(mode))
}

/// Ideal phase-sensitive amplifier: `G` on `amplified_axis`, `1/G` on the other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSensitiveAmplifier {
    gain: f64,
    amplified_axis: Quadrature,
}

impl PhaseSensitiveAmplifier {
    pub fn new(gain: f64, amplified_axis: Quadrature) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::InvalidGain(gain));
        }
        Ok(PhaseSensitiveAmplifier {
            gain,
            amplified_axis,
        })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn amplified_axis(&self) -> Quadrature {
        self.amplified_axis
    }

    /// Same gain, other axis.
    pub fn flipped(&self) -> Self {
        PhaseSensitiveAmplifier {
            gain: self.gain,
            amplified_axis: self.amplified_axis.conjugate(),
        }
    }

    /// Amplitude factor applied to `axis`.
    pub fn factor(&self, axis: Quadrature) -> f64 {
        if axis == self.amplified_axis {
            self.gain
        } else {
            self.gain.recip()
        }
    }
}

pub fn psa_amplify(mode: &GaussianMode, amp: &PhaseSensitiveAmplifier) -> GaussianMode {
    let mut mean = mode.means();
    let mut var = mode.variances();
    for axis in Quadrature::ALL {
        let g = amp.factor(axis);
        mean[axis.index()] *= g;
        var[axis.index()] *= g * g;
    }
    GaussianMode::from_parts(mean, var)
}

/// Fibre of `gamma_t/2`, amplifier, fibre of `gamma_t/2`.
pub fn amplified_link(
    mode: &GaussianMode,
    gamma_t: f64,
    amp: &PhaseSensitiveAmplifier,
) -> Result<GaussianMode> {
    let half = FiberSegment::new(gamma_t / 2.0)?;
    Ok(half.transmit(&psa_amplify(&half.transmit(mode), amp)))
}

/// Which estimator Bob forms from his homodyne outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Single unamplified fibre, `ξ = e^{γT/2} X`.
    Plain,
    /// Amplifier boosts the measured quadrature, `ξ₁ = e^{γT/2} X / G`.
    AmplifiedRight,
    /// Amplifier boosts the conjugate quadrature, `ξ₂ = G e^{γT/2} X`.
    AmplifiedWrong,
}

impl EstimatorKind {
    /// The estimator kind for a link with an optional amplifier setting,
    /// when Bob measures `measured`.
    pub fn for_link(amp_axis: Option<Quadrature>, measured: Quadrature) -> Self {
        match amp_axis {
            None => EstimatorKind::Plain,
            Some(a) if a == measured => EstimatorKind::AmplifiedRight,
            Some(_) => EstimatorKind::AmplifiedWrong,
        }
    }

    /// Multiplier taking the raw homodyne outcome to the estimator.
    pub fn scale(self, gamma_t: f64, gain: f64) -> f64 {
        let undo_loss = (gamma_t / 2.0).exp();
        match self {
            EstimatorKind::Plain => undo_loss,
            EstimatorKind::AmplifiedRight => undo_loss / gain,
            EstimatorKind::AmplifiedWrong => undo_loss * gain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats {
    pub mean: f64,
    pub stddev: f64,
}

/// Exact mean and spread of the rescaled estimator of the initial centre on
/// `axis`. The `gain` is ignored for [`EstimatorKind::Plain`].
pub fn estimator_stats(
    kind: EstimatorKind,
    mode0: &GaussianMode,
    axis: Quadrature,
    gamma_t: f64,
    gain: f64,
) -> Result<EstimatorStats> {
    check_loss(gamma_t)?;
    if kind != EstimatorKind::Plain && !(gain >= 1.0) {
        return Err(Error::InvalidGain(gain));
    }
    let var0 = mode0.var(axis);
    let var = match kind {
        EstimatorKind::Plain => var0 + 0.25 * gamma_t.exp_m1(),
        EstimatorKind::AmplifiedRight | EstimatorKind::AmplifiedWrong => {
            let g2 = if kind == EstimatorKind::AmplifiedRight {
                (gain * gain).recip()
            } else {
                gain * gain
            };
            var0 + 0.25 * (gamma_t / 2.0).exp_m1()
                + 0.25 * g2 * gamma_t.exp() * -(-gamma_t / 2.0).exp_m1()
        }
    };
    Ok(EstimatorStats {
        mean: mode0.mean(axis),
        stddev: var.sqrt(),
    })
}

/// Estimator variance to first order in `γT` (`e^{γT} − 1 ≅ γT`), the form
/// the loss budgets are derived from.
pub fn estimator_variance_small_loss(kind: EstimatorKind, var0: f64, gamma_t: f64, gain: f64) -> f64 {
    match kind {
        EstimatorKind::Plain => var0 + gamma_t / 4.0,
        EstimatorKind::AmplifiedRight => var0 + gamma_t / 8.0 + gamma_t / (8.0 * gain * gain),
        EstimatorKind::AmplifiedWrong => var0 + gamma_t / 8.0 + gain * gain * gamma_t / 8.0,
    }
}

/// Tolerance target `Δξ < sδ` together with the initial squeezed-axis variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    s_margin: f64,
    delta: f64,
    initial_var: f64,
}

impl LinkBudget {
    pub fn new(s_margin: f64, delta: f64, initial_var: f64) -> Result<Self> {
        if !(s_margin > 0.0 && s_margin < 1.0 && delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidLinkBudget { s_margin, delta });
        }
        if !(initial_var > 0.0) {
            return Err(Error::InvalidVariance {
                axis: Quadrature::X1,
                value: initial_var,
            });
        }
        Ok(LinkBudget {
            s_margin,
            delta,
            initial_var,
        })
    }

    pub fn s_margin(&self) -> f64 {
        self.s_margin
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn initial_var(&self) -> f64 {
        self.initial_var
    }

    /// `(sδ)²`.
    pub fn target_var(&self) -> f64 {
        (self.s_margin * self.delta).powi(2)
    }
}

/// Largest admissible `γT` in the small-loss, high-gain limit.
///
/// Plain: `4[(sδ)² − ΔX(0)²]`; amplified on the measured axis:
/// `8[(sδ)² − ΔX(0)²]`; amplified on the conjugate axis: `8(sδ)²/G²`.
pub fn loss_budget(kind: EstimatorKind, budget: &LinkBudget, gain: f64) -> Result<f64> {
    let headroom = budget.target_var() - budget.initial_var();
    let infeasible = || Error::NoAdmissibleLoss {
        target: budget.target_var(),
        initial: budget.initial_var(),
    };
    match kind {
        EstimatorKind::Plain if headroom >= 0.0 => Ok(4.0 * headroom),
        EstimatorKind::AmplifiedRight if headroom >= 0.0 => Ok(8.0 * headroom),
        EstimatorKind::AmplifiedWrong => {
            if !(gain >= 1.0) {
                return Err(Error::InvalidGain(gain));
            }
            Ok(8.0 * budget.target_var() / (gain * gain))
        }
        _ => Err(infeasible()),
    }
}

/// Admissible gain interval `G² ≫ 1`, `G ≪ 1/(sδ)`, with "≫" read as a
/// factor `dominance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainWindow {
    pub min: f64,
    pub max: f64,
}

impl GainWindow {
    pub fn is_empty(&self) -> bool {
        !(self.min < self.max)
    }

    pub fn contains(&self, gain: f64) -> bool {
        !self.is_empty() && gain >= self.min && gain <= self.max
    }

    pub fn require_nonempty(self) -> Result<Self> {
        if self.is_empty() {
            Err(Error::EmptyGainWindow {
                g_min: self.min,
                g_max: self.max,
            })
        } else {
            Ok(self)
        }
    }
}

pub fn gain_window(s_margin: f64, delta: f64, dominance: f64) -> GainWindow {
    GainWindow {
        min: dominance,
        max: 1.0 / (dominance * s_margin * delta),
    }
}

/// `γT` at which a perfectly squeezed input reaches estimator width
/// `v = 2·Var` after the fibre: solves `(1 − e^{-γT})/2 = v`.
pub fn loss_for_output_width(v: f64) -> f64 {
    -(-2.0 * v).ln_1p()
}
