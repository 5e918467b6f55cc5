//! Transition-rate estimation and discrete-time chain simulation.
//!
//! A rate is the per-sample transition probability divided by the sampling
//! interval, `λ = p / T`. Simulation runs the discrete chain at the same
//! interval, so sojourns are geometric with mean `1 / λ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::state::{State, StateModel, StateSequence};

/// Transition rates of one model, in transitions per second.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub model: StateModel,
    rates: BTreeMap<(State, State), f64>,
    /// Interval of the sequence the rates were estimated from, seconds.
    pub sample_interval_used: f64,
}

/// Serialized form of one rate-table entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub from: State,
    pub to: State,
    pub rate_per_s: f64,
}

impl RateTable {
    pub fn new(model: StateModel, sample_interval_used: f64) -> Self {
        Self {
            model,
            rates: BTreeMap::new(),
            sample_interval_used,
        }
    }

    pub fn two_state(unshadowed_to_shadowed: f64, shadowed_to_unshadowed: f64, sample_interval: f64) -> Result<Self> {
        Self::from_transitions(
            StateModel::TwoState,
            sample_interval,
            [unshadowed_to_shadowed, shadowed_to_unshadowed],
        )
    }

    /// Rates for U→D, D→S, S→R, R→U.
    pub fn four_state(rates: [f64; 4], sample_interval: f64) -> Result<Self> {
        Self::from_transitions(StateModel::FourState, sample_interval, rates)
    }

    fn from_transitions<const N: usize>(model: StateModel, dt: f64, rates: [f64; N]) -> Result<Self> {
        let mut table = Self::new(model, dt);
        for (&(from, to), lambda) in model.transitions().iter().zip(rates) {
            table.set(from, to, lambda)?;
        }
        Ok(table)
    }

    pub fn set(&mut self, from: State, to: State, rate_per_s: f64) -> Result<()> {
        if !self.model.transitions().contains(&(from, to)) {
            return Err(Error::InvalidParameter(format!(
                "{from} -> {to} is not a transition of the {} model",
                self.model
            )));
        }
        if !(rate_per_s >= 0.0) || !rate_per_s.is_finite() {
            return Err(Error::InvalidParameter(format!("rate {rate_per_s} must be finite and >= 0")));
        }
        self.rates.insert((from, to), rate_per_s);
        Ok(())
    }

    /// `None` when the rate is undefined (source state never observed).
    pub fn rate(&self, from: State, to: State) -> Option<f64> {
        self.rates.get(&(from, to)).copied()
    }

    /// Rate of leaving `state`; every state has a single exit in both models.
    pub fn outgoing(&self, state: State) -> Option<f64> {
        let mut found = None;
        for (&(from, _), &r) in &self.rates {
            if from == state {
                *found.get_or_insert(0.0) += r;
            }
        }
        found
    }

    /// Defined entries in canonical transition order.
    pub fn transitions(&self) -> Vec<Transition> {
        self.model
            .transitions()
            .iter()
            .filter_map(|&(from, to)| self.rate(from, to).map(|rate_per_s| Transition { from, to, rate_per_s }))
            .collect()
    }

    pub fn from_transition_list(model: StateModel, sample_interval_used: f64, list: &[Transition]) -> Result<Self> {
        let mut table = Self::new(model, sample_interval_used);
        for t in list {
            if table.rate(t.from, t.to).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate transition {} -> {}", t.from, t.to)));
            }
            table.set(t.from, t.to, t.rate_per_s)?;
        }
        Ok(table)
    }

    /// Long-run fraction of time in each state of the cyclic chain,
    /// proportional to the mean sojourn `1 / λ_out`.
    pub fn stationary_occupancy(&self) -> Result<Vec<(State, f64)>> {
        let sojourns = self
            .model
            .states()
            .iter()
            .map(|&s| mean_sojourn(self, s).map(|t| (s, t)))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = sojourns.iter().map(|(_, t)| t).sum();
        Ok(sojourns.into_iter().map(|(s, t)| (s, t / total)).collect())
    }
}

/// Counts of consecutive label pairs, additive across sequences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransitionCounts {
    pairs: [[u64; 4]; 4],
}

fn idx(s: State) -> usize {
    match s {
        State::Unshadowed => 0,
        State::Decaying => 1,
        State::Shadowed => 2,
        State::Rising => 3,
    }
}

impl TransitionCounts {
    pub fn from_labels(labels: &[State]) -> Self {
        let mut c = Self::default();
        for w in labels.windows(2) {
            c.pairs[idx(w[0])][idx(w[1])] += 1;
        }
        c
    }

    pub fn merge(&mut self, other: &TransitionCounts) {
        for i in 0..4 {
            for j in 0..4 {
                self.pairs[i][j] += other.pairs[i][j];
            }
        }
    }

    pub fn pair(&self, from: State, to: State) -> u64 {
        self.pairs[idx(from)][idx(to)]
    }

    /// Steps observed starting in `state` (each has a known successor).
    pub fn visits(&self, state: State) -> u64 {
        self.pairs[idx(state)].iter().sum()
    }

    pub fn rates(&self, model: StateModel, sample_interval: f64) -> RateTable {
        let mut table = RateTable::new(model, sample_interval);
        for &(from, to) in model.transitions() {
            let visits = self.visits(from);
            if visits > 0 {
                let p = self.pair(from, to) as f64 / visits as f64;
                table.rates.insert((from, to), p / sample_interval);
            }
        }
        table
    }
}

/// Maximum-likelihood rates of the discrete chain behind `seq`.
pub fn estimate_rates(seq: &StateSequence) -> Result<RateTable> {
    if seq.is_empty() {
        return Err(Error::InsufficientData("empty state sequence".into()));
    }
    Ok(TransitionCounts::from_labels(&seq.labels).rates(seq.model, seq.sample_interval))
}

pub fn simulate_chain(rates: &RateTable, sample_interval: f64, n_samples: usize, seed: u64) -> Result<StateSequence> {
    simulate_chain_with(rates, sample_interval, n_samples, 0, &mut SimRng::seed_from_u64(seed))
}

/// Runs the chain from the unshadowed state, discarding `burn_in` steps.
pub fn simulate_chain_with(
    rates: &RateTable,
    sample_interval: f64,
    n_samples: usize,
    burn_in: usize,
    rng: &mut SimRng,
) -> Result<StateSequence> {
    if !(sample_interval > 0.0) {
        return Err(Error::InvalidParameter(format!("sample interval {sample_interval} must be > 0")));
    }
    let model = rates.model;
    // per-state exit probability and successor
    let mut exit = [(0.0, State::Unshadowed); 4];
    for &(from, to) in model.transitions() {
        let p = rates.rate(from, to).unwrap_or(0.0) * sample_interval;
        if p >= 1.0 {
            return Err(Error::IntervalTooCoarse { state: from.name(), prob: p });
        }
        exit[idx(from)] = (p, to);
    }

    let mut state = State::Unshadowed;
    let mut labels = Vec::with_capacity(n_samples);
    for step in 0..burn_in + n_samples {
        if step >= burn_in {
            labels.push(state);
        }
        let (p, next) = exit[idx(state)];
        if p > 0.0 && rng.uniform() < p {
            state = next;
        }
    }
    Ok(StateSequence {
        model,
        labels,
        sample_interval,
    })
}

/// Mean time spent in `state` per visit, seconds.
pub fn mean_sojourn(rates: &RateTable, state: State) -> Result<f64> {
    match rates.outgoing(state) {
        Some(r) if r > 0.0 => Ok(1.0 / r),
        _ => Err(Error::InfiniteSojourn(state.name())),
    }
}
