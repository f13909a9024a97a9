//! Causal queries: interventions and effects relative to reference time 0,
//! plus the per-series intervention schedule used by the threshold
//! computations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scg::Scg;
use crate::series::{SeriesId, TemporalVertex};

/// One intervention `do(x at time)`; time is relative, non-positive.
pub type Intervention = TemporalVertex;

/// A total-effect query: `P(effects | do(interventions))`.
///
/// Single-effect queries have exactly one effect at time 0; multi-effect
/// queries are decided per effect after shifting that effect to time 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalQuery {
    pub interventions: Vec<Intervention>,
    pub effects: Vec<TemporalVertex>,
}

impl CausalQuery {
    pub fn new(interventions: Vec<Intervention>, effects: Vec<TemporalVertex>) -> Result<Self> {
        let q = CausalQuery {
            interventions,
            effects,
        };
        q.validate_shape()?;
        Ok(q)
    }

    /// Single effect at time 0.
    pub fn single(interventions: Vec<Intervention>, effect: SeriesId) -> Result<Self> {
        CausalQuery::new(interventions, vec![TemporalVertex::new(effect, 0)])
    }

    fn validate_shape(&self) -> Result<()> {
        if self.effects.is_empty() {
            return Err(Error::InvalidQuery("at least one effect is required".into()));
        }
        for x in &self.interventions {
            if x.time > 0 {
                return Err(Error::InvalidQuery(format!(
                    "intervention {x} is after the reference time 0"
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for x in &self.interventions {
            if !seen.insert((x.series.clone(), x.time)) {
                return Err(Error::InvalidQuery(format!("duplicate intervention {x}")));
            }
        }
        let mut seen_eff = std::collections::BTreeSet::new();
        for y in &self.effects {
            if !seen_eff.insert((y.series.clone(), y.time)) {
                return Err(Error::InvalidQuery(format!("duplicate effect {y}")));
            }
            if seen.contains(&(y.series.clone(), y.time)) {
                return Err(Error::Overlap(format!(
                    "{y} is both an intervention and an effect"
                )));
            }
        }
        Ok(())
    }

    /// Check all series against a graph.
    pub fn validate_against(&self, g: &Scg) -> Result<()> {
        for v in self.interventions.iter().chain(self.effects.iter()) {
            g.idx(v.series.as_str())?;
        }
        Ok(())
    }

    /// The query for one effect, shifted so that effect sits at time 0.
    /// Interventions landing after 0 are kept; preprocessing prunes them.
    pub(crate) fn shifted_for_effect(&self, effect: &TemporalVertex) -> ShiftedQuery {
        ShiftedQuery {
            effect_series: effect.series.clone(),
            shift: effect.time,
            interventions: self
                .interventions
                .iter()
                .map(|x| TemporalVertex::new(x.series.clone(), x.time - effect.time))
                .collect(),
        }
    }

    pub fn max_gamma(&self) -> i64 {
        self.interventions.iter().map(|x| -x.time).max().unwrap_or(0)
    }
}

/// A single-effect view of a query, normalized to effect time 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ShiftedQuery {
    pub effect_series: SeriesId,
    /// Original effect time; added back when reporting absolute times.
    pub shift: i64,
    pub interventions: Vec<Intervention>,
}

/// Per-series index of intervention times with O(log n) membership and
/// release-time lookups.
///
/// The release time of an intervention `(S, t)` is the smallest `t1 >= t`
/// such that `(S, t1)` is not itself an intervention; consecutive
/// interventions on one series share the release of the latest one.
#[derive(Debug, Clone, Default)]
pub struct InterventionSchedule {
    by_series: HashMap<String, Vec<i64>>, // sorted ascending
}

impl InterventionSchedule {
    pub fn new(interventions: &[Intervention]) -> Self {
        let mut by_series: HashMap<String, Vec<i64>> = HashMap::new();
        for x in interventions {
            by_series
                .entry(x.series.to_string())
                .or_default()
                .push(x.time);
        }
        for times in by_series.values_mut() {
            times.sort_unstable();
        }
        InterventionSchedule { by_series }
    }

    pub fn is_intervention(&self, series: &str, time: i64) -> bool {
        self.by_series
            .get(series)
            .map(|ts| ts.binary_search(&time).is_ok())
            .unwrap_or(false)
    }

    pub fn has_series(&self, series: &str) -> bool {
        self.by_series.contains_key(series)
    }

    /// Smallest `t1 >= t` with `(series, t1)` not an intervention.
    pub fn free_at_or_above(&self, series: &str, t: i64) -> i64 {
        match self.by_series.get(series) {
            None => t,
            Some(ts) => {
                let mut t = t;
                if let Ok(mut i) = ts.binary_search(&t) {
                    // Walk the consecutive run upward.
                    while i + 1 < ts.len() && ts[i + 1] == ts[i] + 1 {
                        i += 1;
                    }
                    t = ts[i] + 1;
                }
                t
            }
        }
    }

    /// Largest `t1 <= t` with `(series, t1)` not an intervention.
    pub fn free_at_or_below(&self, series: &str, t: i64) -> i64 {
        match self.by_series.get(series) {
            None => t,
            Some(ts) => {
                let mut t = t;
                if let Ok(mut i) = ts.binary_search(&t) {
                    while i > 0 && ts[i - 1] == ts[i] - 1 {
                        i -= 1;
                    }
                    t = ts[i] - 1;
                }
                t
            }
        }
    }
}

/// Release time of every intervention, in the order given.
///
/// For `X^i` at time `t_i` this is the smallest `t1 >= t_i` such that
/// `(X^i, t1)` is not an intervention.
pub fn intervention_release_times(interventions: &[Intervention]) -> Vec<(Intervention, i64)> {
    let sched = InterventionSchedule::new(interventions);
    interventions
        .iter()
        .map(|x| {
            (
                x.clone(),
                sched.free_at_or_above(x.series.as_str(), x.time),
            )
        })
        .collect()
}
