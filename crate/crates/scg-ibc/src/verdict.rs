//! Decision results: verdicts, witnesses, symbolic adjustment sets and the
//! do-free formula rendering.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ftcg::TemporalPath;
use crate::series::{ExtTime, SeriesId, TemporalVertex};

/// Which closed form the adjustment set comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdjustmentKind {
    /// Everything outside the cone of descendants.
    ComplementOfCd,
    A0,
    A1,
    AGamma,
}

/// `all (series, t') with t' < upper` (or `<= upper` when inclusive);
/// `upper = PosInf` means the whole series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesTimeRange {
    pub series: SeriesId,
    pub upper: ExtTime,
    pub inclusive: bool,
}

/// A symbolic set of temporal vertices: per-series time ranges, plus explicit
/// single vertices, minus explicit exclusions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjustmentSet {
    pub kind: AdjustmentKind,
    pub effect: TemporalVertex,
    pub ranges: Vec<SeriesTimeRange>,
    pub singletons: Vec<TemporalVertex>,
    pub exclusions: Vec<TemporalVertex>,
}

impl AdjustmentSet {
    /// Membership of one temporal vertex in the symbolic set.
    pub fn contains(&self, v: &TemporalVertex) -> bool {
        if self.exclusions.contains(v) {
            return false;
        }
        if self.singletons.contains(v) {
            return true;
        }
        self.ranges.iter().any(|r| {
            r.series == v.series
                && if r.inclusive {
                    ExtTime::Finite(v.time) <= r.upper
                } else {
                    ExtTime::Finite(v.time) < r.upper
                }
        })
    }

    pub fn is_empty_symbolically(&self) -> bool {
        self.singletons.is_empty()
            && self
                .ranges
                .iter()
                .all(|r| r.upper == ExtTime::NegInf)
    }

    /// Human-readable description, canonical order.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for r in &self.ranges {
            match (r.upper, r.inclusive) {
                (ExtTime::NegInf, _) => {}
                (ExtTime::PosInf, _) => parts.push(format!("{}@t' for all t'", r.series)),
                (ExtTime::Finite(u), true) => {
                    parts.push(format!("{}@t' for t' <= {u}", r.series))
                }
                (ExtTime::Finite(u), false) => {
                    parts.push(format!("{}@t' for t' < {u}", r.series))
                }
            }
        }
        for s in &self.singletons {
            parts.push(s.to_string());
        }
        let mut out = if parts.is_empty() {
            "(empty)".to_string()
        } else {
            parts.join("; ")
        };
        if !self.exclusions.is_empty() {
            let ex: Vec<String> = self.exclusions.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("; excluding {}", ex.join(", ")));
        }
        out
    }
}

/// Shape of a non-identifiability witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    DirectedNoFork,
    Fork,
}

/// A collider-free backdoor path certificate at the graph level: the
/// intervention it starts at, the fork series (if any) and a concrete
/// temporal path sketch the oracle can embed into a candidate FTCG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub effect: TemporalVertex,
    pub intervention: TemporalVertex,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fork: Option<TemporalVertex>,
    pub path: TemporalPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Assumptions {
    pub consistency: bool,
}

/// A pruned intervention together with the effect whose subquery dropped it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrunedIntervention {
    pub series: SeriesId,
    pub time: i64,
    pub effect: TemporalVertex,
}

/// Outcome of the identifiability-by-common-backdoor decision.
///
/// Invariant: `identifiable` iff `adjustment` is present iff `witness` is
/// absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IbcVerdict {
    pub identifiable: bool,
    pub assumptions: Assumptions,
    pub pruned: Vec<PrunedIntervention>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjustment: Option<Vec<AdjustmentSet>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
}

impl IbcVerdict {
    pub fn check_invariants(&self) -> Result<()> {
        let ok = self.identifiable == self.adjustment.is_some()
            && self.identifiable == self.witness.is_none();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidQuery(
                "verdict violates identifiable/adjustment/witness invariant".into(),
            ))
        }
    }
}

/// A rendered do-free formula (the backdoor adjustment sum).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DoFreeFormula(pub String);

fn value_list(vs: &[TemporalVertex]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// The do-free formula of an identifiable verdict.
///
/// Fails with [`Error::NotIdentifiable`] otherwise; non-identifiable
/// effects have no backdoor rewriting.
pub fn emit_formula(v: &IbcVerdict) -> Result<DoFreeFormula> {
    match (&v.formula, v.identifiable) {
        (Some(f), true) => Ok(DoFreeFormula(f.clone())),
        _ => Err(Error::NotIdentifiable),
    }
}

/// Render the backdoor adjustment for an identifiable verdict:
/// `sum_z P(effects | interventions-as-observations, z) P(z)`, with the
/// adjustment set expanded symbolically, collapsing to plain conditionals
/// when the set is empty and to a marginal when nothing remains conditioned.
pub fn render_formula(
    effects: &[TemporalVertex],
    kept_interventions: &[TemporalVertex],
    adjustment: &[AdjustmentSet],
) -> DoFreeFormula {
    let y = value_list(effects);
    let obs = value_list(kept_interventions);
    let empty = adjustment.iter().all(AdjustmentSet::is_empty_symbolically);
    let text = if kept_interventions.is_empty() {
        format!("P({y})")
    } else if empty {
        format!("P({y} | {obs})")
    } else {
        let desc: Vec<String> = adjustment.iter().map(AdjustmentSet::describe).collect();
        format!(
            "sum_z P({y} | {obs}, z) P(z)  [z over: {}]",
            desc.join(" | ")
        )
    };
    DoFreeFormula(text)
}
