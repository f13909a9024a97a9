//! Full-time causal graphs over a finite window, and temporal paths.
//!
//! An FTCG is a DAG over (series, time) instances. Arrows never point back in
//! time, and an arrow between two instances of the same series must be
//! strictly lagged.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{SeriesId, TemporalVertex};

pub(crate) type Vix = (usize, i64); // (series index, time)

/// A finite-window full-time causal graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ftcg {
    series: Vec<SeriesId>, // sorted
    index: HashMap<String, usize>,
    t_lo: i64,
    t_hi: i64,
    arrows: BTreeSet<(Vix, Vix)>,
    children: BTreeMap<Vix, Vec<Vix>>,
    parents: BTreeMap<Vix, Vec<Vix>>,
}

impl Ftcg {
    /// Build and validate an FTCG.
    ///
    /// Checks: endpoints inside the window, time-respecting arrows, strictly
    /// lagged self-arrows, no duplicate arrows, acyclicity (instantaneous
    /// arrows could otherwise form same-time cycles).
    pub fn new(
        series: Vec<SeriesId>,
        window: (i64, i64),
        arrows: Vec<(TemporalVertex, TemporalVertex)>,
    ) -> Result<Self> {
        let (t_lo, t_hi) = window;
        if t_lo > t_hi {
            return Err(Error::InvalidGraph(format!(
                "empty window [{t_lo}, {t_hi}]"
            )));
        }
        let mut series = series;
        series.sort();
        series.dedup();
        let index: HashMap<String, usize> = series
            .iter()
            .enumerate()
            .map(|(i, s)| (s.to_string(), i))
            .collect();

        let mut set: BTreeSet<(Vix, Vix)> = BTreeSet::new();
        for (a, b) in &arrows {
            let ia = *index
                .get(a.series.as_str())
                .ok_or_else(|| Error::UnknownVertex(a.series.to_string()))?;
            let ib = *index
                .get(b.series.as_str())
                .ok_or_else(|| Error::UnknownVertex(b.series.to_string()))?;
            for v in [a, b] {
                if v.time < t_lo || v.time > t_hi {
                    return Err(Error::OutOfWindow {
                        series: v.series.to_string(),
                        time: v.time,
                        lo: t_lo,
                        hi: t_hi,
                    });
                }
            }
            if a.time > b.time {
                return Err(Error::InvalidGraph(format!(
                    "arrow {a} -> {b} points back in time"
                )));
            }
            if ia == ib && a.time == b.time {
                return Err(Error::InvalidGraph(format!(
                    "self-cause {a} -> {b} must be lagged"
                )));
            }
            if !set.insert(((ia, a.time), (ib, b.time))) {
                return Err(Error::DuplicateEdge {
                    from: a.to_string(),
                    to: b.to_string(),
                });
            }
        }

        let mut children: BTreeMap<Vix, Vec<Vix>> = BTreeMap::new();
        let mut parents: BTreeMap<Vix, Vec<Vix>> = BTreeMap::new();
        for &(a, b) in &set {
            children.entry(a).or_default().push(b);
            parents.entry(b).or_default().push(a);
        }
        let g = Ftcg {
            series,
            index,
            t_lo,
            t_hi,
            arrows: set,
            children,
            parents,
        };
        g.check_acyclic()?;
        Ok(g)
    }

    /// Only instantaneous arrows can close a cycle; lagged arrows follow the
    /// flow of time. Kahn's algorithm restricted to lag-0 arrows per slice.
    fn check_acyclic(&self) -> Result<()> {
        let mut indeg: BTreeMap<Vix, usize> = BTreeMap::new();
        let mut touched: BTreeSet<Vix> = BTreeSet::new();
        for &(a, b) in &self.arrows {
            if a.1 == b.1 {
                *indeg.entry(b).or_insert(0) += 1;
                indeg.entry(a).or_insert(0);
                touched.insert(a);
                touched.insert(b);
            }
        }
        let mut queue: Vec<Vix> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&v, _)| v)
            .collect();
        let mut seen = 0usize;
        while let Some(v) = queue.pop() {
            seen += 1;
            if let Some(cs) = self.children.get(&v) {
                for &c in cs {
                    if c.1 == v.1 {
                        let d = indeg.get_mut(&c).expect("instantaneous child counted");
                        *d -= 1;
                        if *d == 0 {
                            queue.push(c);
                        }
                    }
                }
            }
        }
        if seen != touched.len() {
            return Err(Error::InvalidGraph(
                "instantaneous arrows form a cycle".into(),
            ));
        }
        Ok(())
    }

    pub fn window(&self) -> (i64, i64) {
        (self.t_lo, self.t_hi)
    }

    pub fn series(&self) -> &[SeriesId] {
        &self.series
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub(crate) fn series_idx(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub(crate) fn vix(&self, v: &TemporalVertex) -> Result<Vix> {
        let i = self.series_idx(v.series.as_str())?;
        if v.time < self.t_lo || v.time > self.t_hi {
            return Err(Error::OutOfWindow {
                series: v.series.to_string(),
                time: v.time,
                lo: self.t_lo,
                hi: self.t_hi,
            });
        }
        Ok((i, v.time))
    }

    pub(crate) fn vertex(&self, v: Vix) -> TemporalVertex {
        TemporalVertex::new(self.series[v.0].clone(), v.1)
    }

    pub fn has_arrow(&self, a: &TemporalVertex, b: &TemporalVertex) -> bool {
        match (self.vix(a), self.vix(b)) {
            (Ok(a), Ok(b)) => self.arrows.contains(&(a, b)),
            _ => false,
        }
    }

    /// Arrows in canonical order as temporal vertex pairs.
    pub fn arrows(&self) -> impl Iterator<Item = (TemporalVertex, TemporalVertex)> + '_ {
        self.arrows.iter().map(|&(a, b)| (self.vertex(a), self.vertex(b)))
    }

    pub(crate) fn children_of(&self, v: Vix) -> &[Vix] {
        self.children.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn parents_of(&self, v: Vix) -> &[Vix] {
        self.parents.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Descendants of `seeds` inside the graph (reflexive).
    pub(crate) fn descendants_of(&self, seeds: &[Vix]) -> BTreeSet<Vix> {
        let mut out: BTreeSet<Vix> = seeds.iter().copied().collect();
        let mut stack: Vec<Vix> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            for &c in self.children_of(v) {
                if out.insert(c) {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Remove all incoming arrows of `cut_incoming` and all outgoing arrows
    /// of `cut_outgoing`; everything else is preserved.
    pub fn mutilate(
        &self,
        cut_incoming: &[TemporalVertex],
        cut_outgoing: &[TemporalVertex],
    ) -> Result<Ftcg> {
        let cin: BTreeSet<Vix> = cut_incoming
            .iter()
            .map(|v| self.vix(v))
            .collect::<Result<_>>()?;
        let cout: BTreeSet<Vix> = cut_outgoing
            .iter()
            .map(|v| self.vix(v))
            .collect::<Result<_>>()?;
        let arrows = self
            .arrows
            .iter()
            .filter(|(a, b)| !cout.contains(a) && !cin.contains(b))
            .map(|&(a, b)| (self.vertex(a), self.vertex(b)))
            .collect();
        Ftcg::new(self.series.clone(), (self.t_lo, self.t_hi), arrows)
    }
}

/// Orientation of one path step relative to the walking direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArrowDir {
    /// `v[i] -> v[i+1]`
    #[serde(rename = "->")]
    Forward,
    /// `v[i] <- v[i+1]`
    #[serde(rename = "<-")]
    Backward,
}

/// A path over temporal vertices with the orientation of every step.
///
/// Vertices are pairwise distinct; `arrows[i]` orients the edge between
/// `vertices[i]` and `vertices[i+1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalPath {
    pub vertices: Vec<TemporalVertex>,
    pub arrows: Vec<ArrowDir>,
}

impl TemporalPath {
    pub fn new(vertices: Vec<TemporalVertex>, arrows: Vec<ArrowDir>) -> Result<Self> {
        if vertices.is_empty() || arrows.len() + 1 != vertices.len() {
            return Err(Error::InvalidGraph(
                "path needs n vertices and n-1 arrows".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert((v.series.clone(), v.time)) {
                return Err(Error::InvalidGraph(format!(
                    "path repeats vertex {v}"
                )));
            }
        }
        Ok(TemporalPath { vertices, arrows })
    }

    pub fn len_arrows(&self) -> usize {
        self.arrows.len()
    }

    /// The arrow of step `i` as an ordered (tail, head) pair.
    pub fn step(&self, i: usize) -> (&TemporalVertex, &TemporalVertex) {
        match self.arrows[i] {
            ArrowDir::Forward => (&self.vertices[i], &self.vertices[i + 1]),
            ArrowDir::Backward => (&self.vertices[i + 1], &self.vertices[i]),
        }
    }

    /// A collider is a vertex receiving both adjacent path arrows.
    pub fn is_collider_free(&self) -> bool {
        for i in 1..self.vertices.len().saturating_sub(1) {
            if self.arrows[i - 1] == ArrowDir::Forward && self.arrows[i] == ArrowDir::Backward {
                return false;
            }
        }
        true
    }

    /// Backdoor: the first arrow points into the start vertex.
    pub fn is_backdoor(&self) -> bool {
        matches!(self.arrows.first(), Some(ArrowDir::Backward))
    }

    /// Check that every step is an arrow of `g` in the stated orientation.
    pub fn contained_in(&self, g: &Ftcg) -> bool {
        (0..self.arrows.len()).all(|i| {
            let (tail, head) = self.step(i);
            g.has_arrow(tail, head)
        })
    }
}

impl Serialize for TemporalPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Step<'a> {
            series: &'a SeriesId,
            time: i64,
            #[serde(skip_serializing_if = "Option::is_none")]
            arrow: Option<ArrowDir>,
        }
        let steps: Vec<Step> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| Step {
                series: &v.series,
                time: v.time,
                arrow: if i == 0 { None } else { Some(self.arrows[i - 1]) },
            })
            .collect();
        steps.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str, t: i64) -> TemporalVertex {
        TemporalVertex::new(SeriesId::new(s).unwrap(), t)
    }

    fn names(ns: &[&str]) -> Vec<SeriesId> {
        ns.iter().map(|n| SeriesId::new(*n).unwrap()).collect()
    }

    #[test]
    fn validates_time_respecting_arrows() {
        let e = Ftcg::new(names(&["A", "B"]), (-1, 0), vec![(v("A", 0), v("B", -1))]);
        assert!(e.is_err());
        let e = Ftcg::new(names(&["A"]), (-1, 0), vec![(v("A", 0), v("A", 0))]);
        assert!(e.is_err());
        let ok = Ftcg::new(names(&["A"]), (-1, 0), vec![(v("A", -1), v("A", 0))]);
        assert!(ok.is_ok());
    }

    #[test]
    fn rejects_instantaneous_cycle() {
        let e = Ftcg::new(
            names(&["A", "B"]),
            (0, 0),
            vec![(v("A", 0), v("B", 0)), (v("B", 0), v("A", 0))],
        );
        assert!(e.is_err());
    }

    #[test]
    fn rejects_out_of_window() {
        let e = Ftcg::new(names(&["A", "B"]), (0, 0), vec![(v("A", -1), v("B", 0))]);
        assert!(matches!(e, Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn mutilation_cuts_exactly_the_named_classes() {
        let g = Ftcg::new(
            names(&["A", "B", "C"]),
            (-1, 0),
            vec![
                (v("A", -1), v("B", 0)),
                (v("B", -1), v("B", 0)),
                (v("B", 0), v("C", 0)),
            ],
        )
        .unwrap();

        // Cutting both classes at B@0 isolates it.
        let m = g.mutilate(&[v("B", 0)], &[v("B", 0)]).unwrap();
        assert_eq!(m.arrow_count(), 0);

        // Identity mutilation.
        let m = g.mutilate(&[], &[]).unwrap();
        assert_eq!(m, g);

        // Only incoming.
        let m = g.mutilate(&[v("B", 0)], &[]).unwrap();
        assert_eq!(m.arrow_count(), 1);
        assert!(m.has_arrow(&v("B", 0), &v("C", 0)));
    }

    #[test]
    fn mutilation_matches_manual_removal() {
        // Three series over two steps; cut all arrows of the vertices B@-1
        // and C@0 (both directions), as when mutilating away interventions.
        let g = Ftcg::new(
            names(&["A", "B", "C"]),
            (-1, 0),
            vec![
                (v("A", -1), v("B", -1)),
                (v("B", -1), v("C", -1)),
                (v("A", -1), v("A", 0)),
                (v("B", -1), v("B", 0)),
                (v("A", 0), v("C", 0)),
                (v("B", 0), v("C", 0)),
            ],
        )
        .unwrap();
        let cut = [v("B", -1), v("C", 0)];
        let m = g.mutilate(&cut, &cut).unwrap();
        let left: Vec<_> = m.arrows().collect();
        assert_eq!(
            left,
            vec![(v("A", -1), v("A", 0))],
            "only the A self-arrow survives"
        );
    }

    #[test]
    fn path_shapes() {
        // A@0 <- F@-1 -> B@0 : collider-free backdoor fork.
        let p = TemporalPath::new(
            vec![v("A", 0), v("F", -1), v("B", 0)],
            vec![ArrowDir::Backward, ArrowDir::Forward],
        )
        .unwrap();
        assert!(p.is_backdoor());
        assert!(p.is_collider_free());

        // A@0 -> B@0 <- C@0 : collider at B.
        let p = TemporalPath::new(
            vec![v("A", 0), v("B", 0), v("C", 0)],
            vec![ArrowDir::Forward, ArrowDir::Backward],
        )
        .unwrap();
        assert!(!p.is_collider_free());
        assert!(!p.is_backdoor());

        assert!(TemporalPath::new(
            vec![v("A", 0), v("A", 0)],
            vec![ArrowDir::Forward]
        )
        .is_err());
    }

    #[test]
    fn path_serialization_shape() {
        let p = TemporalPath::new(
            vec![v("L", -1), v("B", -1), v("L", 0)],
            vec![ArrowDir::Backward, ArrowDir::Forward],
        )
        .unwrap();
        let json = serde_json::to_value(&p).unwrap();
        assert_eq!(
            json,
            serde_json::json!([
                {"series": "L", "time": -1},
                {"series": "B", "time": -1, "arrow": "<-"},
                {"series": "L", "time": 0, "arrow": "->"},
            ])
        );
    }
}
