use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which blockage description a label sequence or rate table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateModel {
    TwoState,
    FourState,
}

impl StateModel {
    /// Legal transitions, in canonical order.
    pub fn transitions(self) -> &'static [(State, State)] {
        use State::*;
        match self {
            StateModel::TwoState => &[(Unshadowed, Shadowed), (Shadowed, Unshadowed)],
            StateModel::FourState => &[
                (Unshadowed, Decaying),
                (Decaying, Shadowed),
                (Shadowed, Rising),
                (Rising, Unshadowed),
            ],
        }
    }

    pub fn states(self) -> &'static [State] {
        use State::*;
        match self {
            StateModel::TwoState => &[Unshadowed, Shadowed],
            StateModel::FourState => &[Unshadowed, Decaying, Shadowed, Rising],
        }
    }

    pub fn contains(self, state: State) -> bool {
        self.states().contains(&state)
    }

    /// The state entered when an event starts.
    pub fn onset_state(self) -> State {
        match self {
            StateModel::TwoState => State::Shadowed,
            StateModel::FourState => State::Decaying,
        }
    }

    pub fn is_legal(self, from: State, to: State) -> bool {
        from == to || self.transitions().contains(&(from, to))
    }
}

impl fmt::Display for StateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateModel::TwoState => "two_state",
            StateModel::FourState => "four_state",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    Unshadowed,
    Decaying,
    Shadowed,
    Rising,
}

impl State {
    pub fn name(self) -> &'static str {
        match self {
            State::Unshadowed => "unshadowed",
            State::Decaying => "decaying",
            State::Shadowed => "shadowed",
            State::Rising => "rising",
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for State {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unshadowed" => Ok(State::Unshadowed),
            "decaying" => Ok(State::Decaying),
            "shadowed" => Ok(State::Shadowed),
            "rising" => Ok(State::Rising),
            other => Err(format!("unknown state {other:?}")),
        }
    }
}

/// Per-sample state labels aligned to a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    pub model: StateModel,
    pub labels: Vec<State>,
    /// Seconds between consecutive labels.
    pub sample_interval: f64,
}

impl StateSequence {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Fraction of samples carrying `state`.
    pub fn occupancy(&self, state: State) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&s| s == state).count() as f64 / self.labels.len() as f64
    }

    /// First adjacent pair that is not a legal transition of `self.model`.
    pub fn first_illegal_transition(&self) -> Option<(usize, State, State)> {
        self.labels
            .windows(2)
            .enumerate()
            .find(|(_, w)| !self.model.is_legal(w[0], w[1]))
            .map(|(i, w)| (i, w[0], w[1]))
    }
}
