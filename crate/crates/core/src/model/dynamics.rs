use serde::{Deserialize, Serialize};

use super::estimator::CognitiveParams;
use super::state::{EstimatedState, InternalState};

/// Sign convention of the consideration update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateSign {
    /// `Δc = ψ(â − c)`: positive ψ closes the gap to the other's preference.
    #[default]
    GapClosing,
    /// `Δc = −ψ(â − c)`: the literal leading-minus form, kept for comparison.
    LeadingMinus,
}

impl UpdateSign {
    fn factor(self) -> f64 {
        match self {
            UpdateSign::GapClosing => 1.0,
            UpdateSign::LeadingMinus => -1.0,
        }
    }
}

/// One tick of consideration dynamics.
///
/// Control moves toward the other's estimated Acceptance and Acceptance
/// toward the other's estimated Control, each by `ψ` times the gap. An
/// uninformative estimate leaves the state unchanged.
pub fn update_internal(s: InternalState, other: &EstimatedState, cog: &CognitiveParams) -> InternalState {
    if !other.informative {
        return s;
    }
    let gain = cog.sign.factor() * cog.psi;
    let dc = gain * (other.s_hat.a - s.c);
    let da = gain * (other.s_hat.c - s.a);
    InternalState::new(s.c + dc, s.a + da)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn informative(c: f64, a: f64) -> EstimatedState {
        EstimatedState {
            s_hat: InternalState::new(c, a),
            score: 1.0,
            informative: true,
        }
    }

    #[test]
    fn zero_gain_is_identity() {
        let s = InternalState::new(0.3, -0.7);
        let out = update_internal(s, &informative(-1.0, 1.0), &CognitiveParams::with_psi(0.0));
        assert_eq!(out, s);
    }

    #[test]
    fn single_step_substitution() {
        let s = InternalState::new(0.5, 0.5);
        let out = update_internal(s, &informative(-0.5, -0.5), &CognitiveParams::with_psi(0.01));
        assert!((out.c - 0.49).abs() < 1e-15);
        assert!((out.a - 0.49).abs() < 1e-15);
    }

    #[test]
    fn uninformative_estimate_is_ignored() {
        let s = InternalState::new(0.5, 0.5);
        let est = EstimatedState::prior(InternalState::new(-1.0, -1.0));
        assert_eq!(update_internal(s, &est, &CognitiveParams::with_psi(0.01)), s);
    }

    #[test]
    fn repeated_updates_converge() {
        let cog = CognitiveParams::with_psi(0.01);
        let other = informative(0.2, -0.6);
        let mut s = InternalState::new(0.5, 0.5);
        let mut gap = (s.c - other.s_hat.a).abs();
        let mut ticks = 0;
        while gap >= 1e-3 {
            s = update_internal(s, &other, &cog);
            let next = (s.c - other.s_hat.a).abs();
            assert!(next < gap);
            gap = next;
            ticks += 1;
            assert!(ticks < 10_000);
        }
    }

    #[test]
    fn leading_minus_diverges_for_positive_gain() {
        let cog = CognitiveParams {
            sign: UpdateSign::LeadingMinus,
            ..CognitiveParams::with_psi(0.01)
        };
        let other = informative(0.0, 0.0);
        let s = update_internal(InternalState::new(0.5, 0.5), &other, &cog);
        assert!(s.c > 0.5 && s.a > 0.5);
    }

    proptest! {
        #[test]
        fn state_stays_in_unit_square(
            c in -1.0f64..=1.0, a in -1.0f64..=1.0,
            steps in proptest::collection::vec((-1.0f64..=1.0, -1.0f64..=1.0, -2.0f64..2.0), 1..50),
        ) {
            let mut s = InternalState::new(c, a);
            for (ec, ea, psi) in steps {
                s = update_internal(s, &informative(ec, ea), &CognitiveParams::with_psi(psi));
                prop_assert!((-1.0..=1.0).contains(&s.c));
                prop_assert!((-1.0..=1.0).contains(&s.a));
            }
        }
    }
}
