//! NC-accessibility: for an anchor temporal vertex `V`, the per-series
//! ceilings `t^NC_V(S)` = the latest time at which `S` can start a directed
//! path to `V` that stays in the non-conditionable set (anchor excepted).
//!
//! Computed by a max-time priority traversal over parent edges; each series
//! is finalized on first visit. The combined variant seeds the queue with
//! every intervention at once and equals the pointwise maximum of the
//! per-intervention profiles.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::cone::NcProfile;
use crate::error::{Error, Result};
use crate::scg::Scg;
use crate::series::{ExtTime, SeriesId, TemporalVertex};

/// What an accessibility profile is anchored at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Anchor {
    Vertex(TemporalVertex),
    /// All interventions at once (the fictitious common sink).
    Combined,
}

/// Ceilings `t^NC_anchor(S)` plus enough bookkeeping to reconstruct one
/// witness leg per series. Immutable once built.
#[derive(Debug, Clone)]
pub struct AccessibilityProfile {
    pub anchor: Anchor,
    pub forbidden_edge: Option<(SeriesId, SeriesId)>,
    names: Vec<SeriesId>,
    ceilings: Vec<ExtTime>,
    /// For a finalized series `p`: (successor series, successor time).
    /// The successor is the queue element whose pop relaxed `p`; `None` for
    /// series that were never reached (ceiling `-inf`).
    steps: Vec<Option<(usize, i64)>>,
    /// Anchor vertices the step chains terminate at.
    anchor_vertices: Vec<(usize, i64)>,
}

impl AccessibilityProfile {
    pub fn ceiling(&self, series: &str) -> Result<ExtTime> {
        let i = self
            .names
            .iter()
            .position(|n| n.as_str() == series)
            .ok_or_else(|| Error::UnknownVertex(series.to_string()))?;
        Ok(self.ceilings[i])
    }

    pub(crate) fn ceiling_idx(&self, i: usize) -> ExtTime {
        self.ceilings[i]
    }

    /// Ceilings for every series in canonical order.
    pub fn ceilings(&self) -> impl Iterator<Item = (&SeriesId, ExtTime)> + '_ {
        self.names.iter().zip(self.ceilings.iter().copied())
    }

    /// Directed leg from `(series, start_time)` to the anchor, following the
    /// traversal tree; `start_time` must be a valid accessible time for the
    /// series (the first recorded arrow is re-aimed onto it).
    pub(crate) fn leg_from(&self, series: usize, start_time: i64) -> Vec<(usize, i64)> {
        let mut leg = vec![(series, start_time)];
        let mut cur = series;
        // The chain ends on the first anchor vertex; a self-loop anchor can
        // point a step at itself, so the anchor check comes first.
        while let Some((next, t)) = self.steps[cur] {
            leg.push((next, t));
            if self.anchor_vertices.contains(&(next, t)) {
                break;
            }
            cur = next;
        }
        leg
    }
}

/// Core traversal shared by the single-anchor and combined variants.
///
/// `anchors` seeds the queue; `excluded` vertices never count as NC during
/// relaxation (the anchor itself, when it could be in NC); `forbidden_edge`
/// drops one SCG edge from the traversal entirely.
fn run_traversal(
    g: &Scg,
    p: &NcProfile,
    anchors: &[(usize, i64)],
    excluded: &[(usize, i64)],
    forbidden_edge: Option<(usize, usize)>,
) -> (Vec<ExtTime>, Vec<Option<(usize, i64)>>) {
    let n = g.len();
    let mut ceilings = vec![ExtTime::NegInf; n];
    let mut steps: Vec<Option<(usize, i64)>> = vec![None; n];
    let mut seen = vec![false; n];
    // Max time first; ties popped by lexicographically smallest series.
    let mut heap: BinaryHeap<(i64, Reverse<usize>)> = BinaryHeap::new();
    for &(s, t) in anchors {
        heap.push((t, Reverse(s)));
    }
    while let Some((t_s, Reverse(s))) = heap.pop() {
        for &parent in g.parents_idx(s) {
            if forbidden_edge == Some((parent, s)) {
                continue;
            }
            if seen[parent] {
                continue;
            }
            let mut c = p.max_nc_at_or_below(parent, t_s);
            // Skip excluded vertices (at most one in practice).
            while let ExtTime::Finite(t1) = c {
                if excluded.contains(&(parent, t1)) {
                    c = p.max_nc_at_or_below(parent, t1 - 1);
                } else {
                    break;
                }
            }
            ceilings[parent] = c;
            if let ExtTime::Finite(t1) = c {
                steps[parent] = Some((s, t_s));
                heap.push((t1, Reverse(parent)));
            }
            seen[parent] = true;
        }
    }
    (ceilings, steps)
}

/// `t^NC_anchor(S)` for every series, for one anchor vertex.
///
/// `forbidden_edge` excludes one SCG edge (in that direction) from the
/// traversal; this implements the "without using ..." side conditions for
/// same-time accessibility questions.
pub fn compute_accessibility(
    g: &Scg,
    p: &NcProfile,
    anchor: &TemporalVertex,
    forbidden_edge: Option<(&str, &str)>,
) -> Result<AccessibilityProfile> {
    let a = g.idx(anchor.series.as_str())?;
    let forbidden = match forbidden_edge {
        Some((u, v)) => Some((g.idx(u)?, g.idx(v)?)),
        None => None,
    };
    let (ceilings, steps) = run_traversal(
        g,
        p,
        &[(a, anchor.time)],
        &[(a, anchor.time)],
        forbidden,
    );
    Ok(AccessibilityProfile {
        anchor: Anchor::Vertex(anchor.clone()),
        forbidden_edge: forbidden_edge
            .map(|(u, v)| (SeriesId::new(u).unwrap(), SeriesId::new(v).unwrap())),
        names: g.vertices().to_vec(),
        ceilings,
        steps,
        anchor_vertices: vec![(a, anchor.time)],
    })
}

/// Single traversal computing `max_i t^NC_{X^i}(S)` over all interventions.
///
/// Intervention anchors are never in NC, so no exclusion is needed.
pub fn compute_accessibility_combined(g: &Scg, p: &NcProfile) -> Result<AccessibilityProfile> {
    let anchors = p
        .interventions
        .iter()
        .map(|x| Ok((g.idx(x.series.as_str())?, x.time)))
        .collect::<Result<Vec<_>>>()?;
    let (ceilings, steps) = run_traversal(g, p, &anchors, &[], None);
    Ok(AccessibilityProfile {
        anchor: Anchor::Combined,
        forbidden_edge: None,
        names: g.vertices().to_vec(),
        ceilings,
        steps,
        anchor_vertices: anchors,
    })
}

/// Combined traversal over a subset of the interventions (still anchored at
/// intervention vertices only).
pub(crate) fn compute_accessibility_for_anchors(
    g: &Scg,
    p: &NcProfile,
    anchors: &[(usize, i64)],
) -> AccessibilityProfile {
    let (ceilings, steps) = run_traversal(g, p, anchors, &[], None);
    AccessibilityProfile {
        anchor: Anchor::Combined,
        forbidden_edge: None,
        names: g.vertices().to_vec(),
        ceilings,
        steps,
        anchor_vertices: anchors.to_vec(),
    }
}

/// Is `f` accessible to the profile's anchor?
///
/// By the two-sided characterization: `t_NC(F) <= t_f <= t^NC_anchor(F)`,
/// `f` is not an intervention, and `f` is not the anchor itself.
pub fn is_nc_accessible(p: &NcProfile, a: &AccessibilityProfile, f: &TemporalVertex) -> bool {
    if let Anchor::Vertex(anchor) = &a.anchor {
        if anchor == f {
            return false;
        }
    }
    if p.is_intervention(f) {
        return false;
    }
    let t = ExtTime::Finite(f.time);
    match (p.threshold(f.series.as_str()), a.ceiling(f.series.as_str())) {
        (Ok(thr), Ok(ceil)) => thr <= t && t <= ceil,
        _ => false,
    }
}

/// Does series `f` have some instant accessible to both anchors?
///
/// Equivalent to `t_NC(F) <= t^NC_x(F)` and `t_NC(F) <= t^NC_y(F)`.
pub fn fork_exists_free(
    p: &NcProfile,
    a_x: &AccessibilityProfile,
    a_y: &AccessibilityProfile,
    f: &str,
) -> Result<bool> {
    let thr = p.threshold(f)?;
    Ok(thr <= a_x.ceiling(f)? && thr <= a_y.ceiling(f)?)
}

/// Forward dual of the accessibility traversal: earliest time each series is
/// reachable from `source` through a directed path staying in NC, never
/// visiting `excluded_vertex`, and never passing the time `cap`.
///
/// `floors[S] = PosInf` means unreachable. The source series' floor is its
/// own start time.
pub(crate) struct ForwardReach {
    pub floors: Vec<ExtTime>,
    /// (predecessor series, predecessor time) for reconstructing a path.
    pub steps: Vec<Option<(usize, i64)>>,
}

pub(crate) fn forward_min_reach(
    g: &Scg,
    p: &NcProfile,
    source: (usize, i64),
    excluded_vertex: (usize, i64),
    cap: i64,
) -> ForwardReach {
    let n = g.len();
    let mut floors = vec![ExtTime::PosInf; n];
    let mut steps: Vec<Option<(usize, i64)>> = vec![None; n];
    let mut seen = vec![false; n];
    floors[source.0] = ExtTime::Finite(source.1);
    seen[source.0] = true;
    let mut heap: BinaryHeap<Reverse<(i64, usize)>> = BinaryHeap::new();
    heap.push(Reverse((source.1, source.0)));
    while let Some(Reverse((t_s, s))) = heap.pop() {
        for &child in g.children_idx(s) {
            if seen[child] {
                continue;
            }
            let lb = if child == s { t_s + 1 } else { t_s };
            let mut c = p.min_nc_at_or_above(child, lb);
            while let ExtTime::Finite(t1) = c {
                if (child, t1) == excluded_vertex {
                    c = p.min_nc_at_or_above(child, t1 + 1);
                } else {
                    break;
                }
            }
            if let ExtTime::Finite(t1) = c {
                if t1 <= cap {
                    floors[child] = c;
                    steps[child] = Some((s, t_s));
                    seen[child] = true;
                    heap.push(Reverse((t1, child)));
                }
            }
            // Series whose earliest NC instant lies beyond the cap are left
            // unseen; no route through them can come back below the cap.
        }
    }
    ForwardReach { floors, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::compute_t_nc;
    use crate::corpus;
    use crate::query::Intervention;

    fn x(s: &str, t: i64) -> Intervention {
        TemporalVertex::new(SeriesId::new(s).unwrap(), t)
    }

    fn thermo() -> (Scg, NcProfile) {
        let g = corpus::thermoregulation_scg();
        let p = compute_t_nc(&g, &[x("Kitchen", -1), x("LivingRoom", -1)]).unwrap();
        (g, p)
    }

    #[test]
    fn effect_anchor_ceilings() {
        let (g, p) = thermo();
        let a = compute_accessibility(&g, &p, &x("Office", 0), None).unwrap();
        assert_eq!(a.ceiling("LivingRoom").unwrap(), ExtTime::Finite(0));
        assert_eq!(a.ceiling("Bathroom").unwrap(), ExtTime::Finite(0));
        assert_eq!(a.ceiling("Kitchen").unwrap(), ExtTime::Finite(0));
        assert_eq!(a.ceiling("Office").unwrap(), ExtTime::Finite(-1));
        assert_eq!(a.ceiling("Outside").unwrap(), ExtTime::NegInf);
    }

    #[test]
    fn intervention_anchor_ceilings() {
        let (g, p) = thermo();
        let a = compute_accessibility(&g, &p, &x("LivingRoom", -1), None).unwrap();
        assert_eq!(a.ceiling("Bathroom").unwrap(), ExtTime::Finite(-1));
        assert_eq!(a.ceiling("Kitchen").unwrap(), ExtTime::NegInf);
        assert_eq!(a.ceiling("Outside").unwrap(), ExtTime::NegInf);

        let k = compute_accessibility(&g, &p, &x("Kitchen", -1), None).unwrap();
        for (_, c) in k.ceilings() {
            assert_eq!(c, ExtTime::NegInf, "nothing reaches the kitchen in NC");
        }
    }

    #[test]
    fn anchor_without_parents_drains_immediately() {
        let g = Scg::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        let p = compute_t_nc(&g, &[x("A", -1)]).unwrap();
        let a = compute_accessibility(&g, &p, &x("A", -1), None).unwrap();
        assert!(a.ceilings().all(|(_, c)| c == ExtTime::NegInf));
    }

    #[test]
    fn nc_filter_dominates_edges() {
        // F -> V exists but F is never in NC (unrelated intervention).
        let g = Scg::from_edges(&[], &[("F", "V"), ("W", "W")]).unwrap();
        let p = compute_t_nc(&g, &[x("W", -1)]).unwrap();
        let a = compute_accessibility(&g, &p, &x("V", 0), None).unwrap();
        assert_eq!(a.ceiling("F").unwrap(), ExtTime::NegInf);
    }

    #[test]
    fn accessibility_membership() {
        let (g, p) = thermo();
        let a = compute_accessibility(&g, &p, &x("Office", 0), None).unwrap();

        assert!(is_nc_accessible(&p, &a, &x("Bathroom", -1)));
        // Below threshold.
        assert!(!is_nc_accessible(&p, &a, &x("Bathroom", -2)));
        // Intervention vertices are excluded.
        assert!(!is_nc_accessible(&p, &a, &x("LivingRoom", -1)));
        // The anchor itself is excluded.
        assert!(!is_nc_accessible(&p, &a, &x("Office", 0)));
    }

    #[test]
    fn fork_series_detection() {
        let (g, p) = thermo();
        let a_y = compute_accessibility(&g, &p, &x("Office", 0), None).unwrap();
        let a_l = compute_accessibility(&g, &p, &x("LivingRoom", -1), None).unwrap();
        assert!(fork_exists_free(&p, &a_l, &a_y, "Bathroom").unwrap());
        assert!(!fork_exists_free(&p, &a_l, &a_y, "Outside").unwrap());
        assert!(!fork_exists_free(&p, &a_l, &a_y, "Kitchen").unwrap());

        // Accessible to the effect only.
        let a_k = compute_accessibility(&g, &p, &x("Kitchen", -1), None).unwrap();
        assert!(!fork_exists_free(&p, &a_k, &a_y, "Bathroom").unwrap());
    }

    #[test]
    fn combined_equals_pointwise_max() {
        let (g, p) = thermo();
        let combined = compute_accessibility_combined(&g, &p).unwrap();
        let per: Vec<AccessibilityProfile> = p
            .interventions()
            .to_vec()
            .iter()
            .map(|xi| compute_accessibility(&g, &p, xi, None).unwrap())
            .collect();
        for s in g.vertices() {
            let want = per
                .iter()
                .map(|a| a.ceiling(s.as_str()).unwrap())
                .max()
                .unwrap();
            assert_eq!(combined.ceiling(s.as_str()).unwrap(), want, "series {s}");
        }
    }

    #[test]
    fn forbidden_edge_off_route_is_noop() {
        let (g, p) = thermo();
        let base = compute_accessibility(&g, &p, &x("Office", 0), None).unwrap();
        // Outside -> Kitchen is never on an accessible route (Outside is
        // never in NC).
        let cut = compute_accessibility(&g, &p, &x("Office", 0), Some(("Outside", "Kitchen")))
            .unwrap();
        for s in g.vertices() {
            assert_eq!(
                base.ceiling(s.as_str()).unwrap(),
                cut.ceiling(s.as_str()).unwrap()
            );
        }
    }

    #[test]
    fn forbidden_edge_cuts_the_only_route() {
        let (g, p) = thermo();
        let cut = compute_accessibility(
            &g,
            &p,
            &x("LivingRoom", -1),
            Some(("Bathroom", "LivingRoom")),
        )
        .unwrap();
        assert_eq!(cut.ceiling("Bathroom").unwrap(), ExtTime::NegInf);
    }

    #[test]
    fn anti_causality_bound() {
        let (g, p) = thermo();
        for anchor in [x("Office", 0), x("LivingRoom", -1), x("Kitchen", -1)] {
            let a = compute_accessibility(&g, &p, &anchor, None).unwrap();
            for (_, c) in a.ceilings() {
                assert!(c <= ExtTime::Finite(anchor.time));
            }
        }
    }

    #[test]
    fn witness_leg_reconstruction() {
        let (g, p) = thermo();
        let a = compute_accessibility(&g, &p, &x("Office", 0), None).unwrap();
        let b = g.idx("Bathroom").unwrap();
        let leg = a.leg_from(b, -1);
        let named: Vec<String> = leg
            .iter()
            .map(|&(s, t)| format!("{}@{t}", g.vertices()[s]))
            .collect();
        assert_eq!(named, ["Bathroom@-1", "LivingRoom@0", "Office@0"]);
    }
}
