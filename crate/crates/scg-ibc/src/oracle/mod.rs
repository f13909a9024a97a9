//! Brute-force ground truth at desk scale.
//!
//! Candidate FTCGs for an SCG are explored two ways: literal bitmask
//! enumeration over the realizable arrows of a bounded window (tiny
//! instances only), and exhaustive path search over the same arrow universe,
//! which is equivalent for every existence question because any
//! time-respecting path whose reduction is a subgraph of the SCG embeds in a
//! candidate FTCG. Consistency throughout time keeps every causal
//! relationship's direction constant, so under that regime a path embeds iff
//! no series pair carries instantaneous arrows in both directions.
//!
//! The literal enumeration's consistency mode yields the time-translation-
//! invariant subclass (patterns repeated across the window); that is enough
//! for reduction and count checks, and every such candidate is consistent.

mod dsep;
mod search;

pub use dsep::{backdoor_criterion, d_separated};
pub use search::{
    descendant_of_intervention, embed_path, nc_accessible_in_some_candidate, witness_search,
    witness_search_query, OracleVerdict,
};

use crate::error::{Error, Result};
use crate::ftcg::Ftcg;
use crate::query::CausalQuery;
use crate::scg::Scg;
use crate::series::{SeriesId, TemporalVertex};

/// How strictly a bounded-window candidate must reproduce the SCG.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relaxation {
    /// The reduction must equal the SCG. Only meaningful when the window is
    /// wide enough to host every edge.
    ExactReduction,
    /// The reduction may be any subgraph of the SCG; missing arrows are
    /// thought of as realized outside the window.
    SubgraphReduction,
}

/// Bounded enumeration parameters.
#[derive(Debug, Clone)]
pub struct EnumSpec {
    pub scg: Scg,
    pub window: (i64, i64),
    pub max_lag: i64,
    pub consistency: bool,
    pub relaxation: Relaxation,
    /// Work cap: maximum enumerated bitmasks or search expansions.
    pub budget: u64,
}

pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// One realizable arrow: ((series, time), (series, time)).
type Arrow = ((usize, i64), (usize, i64));

impl EnumSpec {
    pub fn new(scg: Scg, window: (i64, i64), max_lag: i64, consistency: bool) -> Result<Self> {
        let spec = EnumSpec {
            scg,
            window,
            max_lag,
            consistency,
            relaxation: Relaxation::SubgraphReduction,
            budget: DEFAULT_BUDGET,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The default window for a query: `[-(gamma_max + 2), 0]` with
    /// `max_lag = gamma_max + 1` (shifted when effects sit away from 0).
    /// Wide enough to host every witness the decision procedures can
    /// construct; documented as a heuristic, not a theorem.
    pub fn default_for_query(scg: &Scg, q: &CausalQuery, consistency: bool) -> Result<Self> {
        let hi = q.effects.iter().map(|e| e.time).max().unwrap_or(0);
        let lo_q = q.interventions.iter().map(|x| x.time).min().unwrap_or(hi);
        let gamma = (hi - lo_q).max(0);
        EnumSpec::new(scg.clone(), (hi - gamma - 2, hi), gamma + 1, consistency)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        if lo > hi {
            return Err(Error::InvalidGraph(format!("empty window [{lo}, {hi}]")));
        }
        if self.max_lag < 0 {
            return Err(Error::InvalidGraph("negative max_lag".into()));
        }
        let has_self_loop = self
            .scg
            .vertices()
            .iter()
            .any(|v| self.scg.has_edge(v.as_str(), v.as_str()));
        if has_self_loop && self.max_lag < 1 {
            return Err(Error::InvalidGraph(
                "self-loops need max_lag >= 1".into(),
            ));
        }
        if hi - lo < self.max_lag {
            return Err(Error::InvalidGraph(
                "window must span at least max_lag".into(),
            ));
        }
        if self.budget == 0 {
            return Err(Error::InvalidGraph("budget must be positive".into()));
        }
        Ok(())
    }

    /// Every realizable arrow of the window, canonical order: SCG edges
    /// sorted, then lag ascending, then head time ascending.
    pub(crate) fn arrow_universe(&self) -> Vec<Arrow> {
        let (lo, hi) = self.window;
        let mut out = Vec::new();
        for (a, b) in self.scg.edges() {
            let ai = self.scg.idx(a.as_str()).expect("own edge");
            let bi = self.scg.idx(b.as_str()).expect("own edge");
            let min_lag = if ai == bi { 1 } else { 0 };
            for lag in min_lag..=self.max_lag {
                for t in lo + lag..=hi {
                    out.push(((ai, t - lag), (bi, t)));
                }
            }
        }
        out
    }

    /// Independent enumeration units: arrows, or (edge, lag) patterns under
    /// consistency.
    fn units(&self) -> Vec<Vec<Arrow>> {
        if !self.consistency {
            return self.arrow_universe().into_iter().map(|a| vec![a]).collect();
        }
        let (lo, hi) = self.window;
        let mut out: Vec<Vec<Arrow>> = Vec::new();
        for (a, b) in self.scg.edges() {
            let ai = self.scg.idx(a.as_str()).expect("own edge");
            let bi = self.scg.idx(b.as_str()).expect("own edge");
            let min_lag = if ai == bi { 1 } else { 0 };
            for lag in min_lag..=self.max_lag {
                let pattern: Vec<Arrow> = (lo + lag..=hi)
                    .map(|t| ((ai, t - lag), (bi, t)))
                    .collect();
                out.push(pattern);
            }
        }
        out
    }
}

/// Lag-forgetting projection: the SCG with an edge wherever some arrow
/// realizes it.
pub fn reduce(f: &Ftcg) -> Scg {
    let mut edges: Vec<(SeriesId, SeriesId)> = Vec::new();
    for (a, b) in f.arrows() {
        let e = (a.series.clone(), b.series.clone());
        if !edges.contains(&e) {
            edges.push(e);
        }
    }
    Scg::new(f.series().to_vec(), edges).expect("reduction of a valid FTCG is valid")
}

/// Lazy enumeration of candidate FTCGs in bitmask order.
pub struct Candidates {
    spec: EnumSpec,
    units: Vec<Vec<Arrow>>,
    mask: u64,
    total: u64,
    pub yielded: u64,
}

impl Candidates {
    pub fn total_masks(&self) -> u64 {
        self.total
    }
}

/// Enumerate every candidate FTCG of the bounded window.
///
/// Fails upfront with `BudgetExceeded` when the raw mask count passes the
/// budget. Masks producing instantaneous cycles are skipped; under
/// `ExactReduction` only candidates whose reduction equals the SCG are
/// yielded.
pub fn enumerate_candidates(spec: &EnumSpec) -> Result<Candidates> {
    spec.validate()?;
    let units = spec.units();
    if units.len() >= 63 {
        return Err(Error::BudgetExceeded(spec.budget));
    }
    let total = 1u64 << units.len();
    if total > spec.budget {
        return Err(Error::BudgetExceeded(spec.budget));
    }
    Ok(Candidates {
        spec: spec.clone(),
        units,
        mask: 0,
        total,
        yielded: 0,
    })
}

impl Iterator for Candidates {
    type Item = Ftcg;

    fn next(&mut self) -> Option<Ftcg> {
        while self.mask < self.total {
            let mask = self.mask;
            self.mask += 1;
            let mut arrows = Vec::new();
            for (i, unit) in self.units.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    arrows.extend(unit.iter().copied());
                }
            }
            let arrows: Vec<(TemporalVertex, TemporalVertex)> = arrows
                .into_iter()
                .map(|(a, b)| {
                    (
                        TemporalVertex::new(self.spec.scg.vertices()[a.0].clone(), a.1),
                        TemporalVertex::new(self.spec.scg.vertices()[b.0].clone(), b.1),
                    )
                })
                .collect();
            let Ok(f) = Ftcg::new(self.spec.scg.vertices().to_vec(), self.spec.window, arrows)
            else {
                continue; // instantaneous cycle
            };
            if self.spec.relaxation == Relaxation::ExactReduction && reduce(&f) != self.spec.scg {
                continue;
            }
            self.yielded += 1;
            return Some(f);
        }
        None
    }
}

/// Outcome of comparing the decision procedure against the exhaustive
/// witness search on the default (or overridden) bounded window.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OracleCheck {
    pub agree: bool,
    pub decide_identifiable: bool,
    pub oracle_witness_found: bool,
    pub expansions: u64,
    pub arrow_universe: usize,
    pub window: (i64, i64),
    pub max_lag: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<crate::ftcg::TemporalPath>,
}

/// Decide the query and independently search for a disproving witness.
///
/// Multi-effect queries are checked per effect, each shifted to reference
/// time 0; window and lag overrides apply in those shifted coordinates.
pub fn oracle_check(
    g: &Scg,
    q: &CausalQuery,
    consistency: bool,
    window: Option<(i64, i64)>,
    max_lag: Option<i64>,
    budget: Option<u64>,
) -> Result<OracleCheck> {
    let verdict = crate::decide::decide(g, q, consistency)?;
    let mut witness_found = false;
    let mut witness = None;
    let mut expansions = 0;
    let mut universe = 0;
    let mut used_window = (0, 0);
    let mut used_lag = 0;
    for effect in &q.effects {
        let shifted: Vec<TemporalVertex> = q
            .interventions
            .iter()
            .map(|x| TemporalVertex::new(x.series.clone(), x.time - effect.time))
            .filter(|x| x.time <= 0)
            .collect();
        let y = g.idx(effect.series.as_str())?;
        let (kept, _) = crate::decide::preprocess_single(g, &shifted, y);
        if kept.is_empty() {
            continue;
        }
        let sub = CausalQuery::single(kept.clone(), effect.series.clone())?;
        let mut spec = EnumSpec::default_for_query(g, &sub, consistency)?;
        if let Some(w) = window {
            spec.window = w;
        }
        if let Some(l) = max_lag {
            spec.max_lag = l;
        }
        if let Some(b) = budget {
            spec.budget = b;
        }
        spec.validate()?;
        used_window = spec.window;
        used_lag = spec.max_lag;
        universe = universe.max(spec.arrow_universe().len());
        let profile = crate::cone::compute_t_nc(g, &kept)?;
        let effect0 = TemporalVertex::new(effect.series.clone(), 0);
        let res = search::witness_search_query(&spec, &kept, &effect0, &profile)?;
        expansions += res.expansions;
        if res.exists_witness {
            witness_found = true;
            witness = res.witness;
            break;
        }
    }
    Ok(OracleCheck {
        agree: verdict.identifiable == !witness_found,
        decide_identifiable: verdict.identifiable,
        oracle_witness_found: witness_found,
        expansions,
        arrow_universe: universe,
        window: used_window,
        max_lag: used_lag,
        witness,
    })
}
