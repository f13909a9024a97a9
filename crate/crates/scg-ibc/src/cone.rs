//! Cone of descendants and the non-conditionable set, characterized by the
//! per-series thresholds `t_NC(S)`.
//!
//! `S@t1` is non-conditionable iff `t1 >= t_NC(S)` and `(S, t1)` is not an
//! intervention; the cone of descendants adds the intervention vertices.
//! Thresholds are computed in one pass: interventions sorted by increasing
//! time, one shared seen-set across the strict-descendant traversals, and the
//! apparently self-referential `min { t1 | t1 >= t_i and D_t1 in NC }`
//! resolved through the intervention release times.

use std::collections::HashMap;

use crate::error::Result;
use crate::query::{CausalQuery, Intervention, InterventionSchedule};
use crate::scg::Scg;
use crate::series::{ExtTime, SeriesId, TemporalVertex};

/// Thresholds `t_NC(S)` for one single-effect query, plus the intervention
/// schedule needed for membership tests. Immutable once built.
#[derive(Debug, Clone)]
pub struct NcProfile {
    pub(crate) interventions: Vec<Intervention>, // sorted by (time, series)
    pub(crate) schedule: InterventionSchedule,
    thresholds: Vec<ExtTime>, // indexed like the graph's vertices
    names: Vec<SeriesId>,
    index: HashMap<String, usize>,
}

impl NcProfile {
    pub fn threshold(&self, series: &str) -> Result<ExtTime> {
        let i = self
            .index
            .get(series)
            .copied()
            .ok_or_else(|| crate::error::Error::UnknownVertex(series.to_string()))?;
        Ok(self.thresholds[i])
    }

    pub(crate) fn threshold_idx(&self, i: usize) -> ExtTime {
        self.thresholds[i]
    }

    /// Thresholds for every series in canonical order.
    pub fn thresholds(&self) -> impl Iterator<Item = (&SeriesId, ExtTime)> + '_ {
        self.names.iter().zip(self.thresholds.iter().copied())
    }

    pub fn interventions(&self) -> &[Intervention] {
        &self.interventions
    }

    pub fn is_intervention(&self, v: &TemporalVertex) -> bool {
        self.schedule.is_intervention(v.series.as_str(), v.time)
    }

    /// Membership in the cone of descendants.
    pub fn in_cd(&self, v: &TemporalVertex) -> Result<bool> {
        if self.is_intervention(v) {
            // The index lookup still validates the series name.
            self.threshold(v.series.as_str())?;
            return Ok(true);
        }
        Ok(ExtTime::Finite(v.time) >= self.threshold(v.series.as_str())?)
    }

    /// Membership in the non-conditionable set: the cone minus interventions.
    pub fn in_nc(&self, v: &TemporalVertex) -> Result<bool> {
        Ok(!self.is_intervention(v) && ExtTime::Finite(v.time) >= self.threshold(v.series.as_str())?)
    }

    /// Largest `t1 <= t` with `(series, t1)` in NC; `NegInf` when none.
    pub(crate) fn max_nc_at_or_below(&self, series: usize, t: i64) -> ExtTime {
        let thr = match self.thresholds[series] {
            ExtTime::Finite(thr) => thr,
            _ => return ExtTime::NegInf,
        };
        let t1 = self
            .schedule
            .free_at_or_below(self.names[series].as_str(), t);
        if t1 >= thr {
            ExtTime::Finite(t1)
        } else {
            ExtTime::NegInf
        }
    }

    /// Smallest `t1 >= t` with `(series, t1)` in NC; `PosInf` when none.
    pub(crate) fn min_nc_at_or_above(&self, series: usize, t: i64) -> ExtTime {
        let thr = match self.thresholds[series] {
            ExtTime::Finite(thr) => thr,
            _ => return ExtTime::PosInf,
        };
        let t1 = self
            .schedule
            .free_at_or_above(self.names[series].as_str(), t.max(thr));
        ExtTime::Finite(t1)
    }
}

/// Compute `t_NC(S)` for every series of `g` under the single-effect query
/// with the given interventions.
///
/// Interventions are visited by increasing time (decreasing lag), ties broken
/// by series name. Each series is assigned on first reach and never
/// revisited, so the pass is linear in `|V| + |E| + n`.
pub fn compute_t_nc(g: &Scg, interventions: &[Intervention]) -> Result<NcProfile> {
    let mut sorted = interventions.to_vec();
    sorted.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.series.cmp(&b.series)));
    for x in &sorted {
        g.idx(x.series.as_str())?;
    }
    let schedule = InterventionSchedule::new(&sorted);

    let n = g.len();
    let mut thresholds = vec![ExtTime::PosInf; n];
    let mut seen = vec![false; n];

    for x in &sorted {
        let src = g.idx(x.series.as_str())?;
        let t_i = x.time;
        // Strict descendants of the intervention series, pruned at vertices
        // already assigned by an earlier (no later) intervention.
        let mut stack: Vec<usize> = Vec::new();
        for &c in g.children_idx(src) {
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
        while let Some(d) = stack.pop() {
            // First free instant at or after t_i; earlier instants of an
            // intervention run are not in NC by definition.
            thresholds[d] = ExtTime::Finite(schedule.free_at_or_above(g.name(d).as_str(), t_i));
            for &c in g.children_idx(d) {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
    }

    Ok(NcProfile {
        interventions: sorted,
        schedule,
        thresholds,
        names: g.vertices().to_vec(),
        index: g
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.to_string(), i))
            .collect(),
    })
}

/// Convenience wrapper taking a full query; the query must be single-effect
/// (the decision procedures shift multi-effect queries first).
pub fn compute_t_nc_query(g: &Scg, q: &CausalQuery) -> Result<NcProfile> {
    q.validate_against(g)?;
    compute_t_nc(g, &q.interventions)
}
