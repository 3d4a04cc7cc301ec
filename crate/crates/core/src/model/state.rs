use serde::{Deserialize, Serialize};

/// An agent's (Control, Acceptance) pair, always inside `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InternalState {
    /// Desire for own involvement toward the other.
    pub c: f64,
    /// Desire for the other's involvement toward oneself.
    pub a: f64,
}

impl InternalState {
    pub const NEUTRAL: InternalState = InternalState { c: 0.0, a: 0.0 };

    /// Builds a state, clamping both components into `[-1, 1]`.
    pub fn new(c: f64, a: f64) -> Self {
        InternalState {
            c: c.clamp(-1.0, 1.0),
            a: a.clamp(-1.0, 1.0),
        }
    }

    pub fn norm(self) -> f64 {
        self.c.hypot(self.a)
    }

    pub fn distance(self, other: InternalState) -> f64 {
        (self.c - other.c).hypot(self.a - other.a)
    }
}

/// Result of estimating the other agent's internal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedState {
    pub s_hat: InternalState,
    /// Likelihood score of the chosen candidate, in `[0, 1]`.
    pub score: f64,
    /// False when the estimate was carried over (stillness or warm-up).
    pub informative: bool,
}

impl EstimatedState {
    /// Uninformative prior estimate used before any motion has been observed.
    pub fn prior(s_hat: InternalState) -> Self {
        EstimatedState {
            s_hat,
            score: 0.0,
            informative: false,
        }
    }

    pub(crate) fn held(self) -> Self {
        EstimatedState {
            informative: false,
            ..self
        }
    }
}

impl Default for EstimatedState {
    fn default() -> Self {
        EstimatedState::prior(InternalState::NEUTRAL)
    }
}
