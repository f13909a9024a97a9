//! Summary causal graphs: directed graphs over time series names.
//!
//! Cycles and self-loops are allowed. Vertices are kept sorted so every
//! traversal and serialization is deterministic.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::series::SeriesId;

/// A summary causal graph.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scg {
    names: Vec<SeriesId>,            // sorted lexicographically
    index: HashMap<String, usize>,   // name -> position in `names`
    children: Vec<Vec<usize>>,       // sorted adjacency, may contain v itself (self-loop)
    parents: Vec<Vec<usize>>,        // sorted reverse adjacency
}

impl Scg {
    /// Build a graph from explicit vertex and edge lists.
    ///
    /// Rejects duplicate vertices, duplicate edges, and edges whose endpoints
    /// were not declared.
    pub fn new(vertices: Vec<SeriesId>, edges: Vec<(SeriesId, SeriesId)>) -> Result<Self> {
        let mut names = vertices;
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateVertex(w[0].to_string()));
            }
        }
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str().to_string(), i))
            .collect();
        let n = names.len();
        let mut children = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        let mut seen_edges = std::collections::HashSet::new();
        for (a, b) in edges {
            let ia = *index
                .get(a.as_str())
                .ok_or_else(|| Error::UnknownVertex(a.to_string()))?;
            let ib = *index
                .get(b.as_str())
                .ok_or_else(|| Error::UnknownVertex(b.to_string()))?;
            if !seen_edges.insert((ia, ib)) {
                return Err(Error::DuplicateEdge {
                    from: a.to_string(),
                    to: b.to_string(),
                });
            }
            children[ia].push(ib);
            parents[ib].push(ia);
        }
        for v in &mut children {
            v.sort_unstable();
        }
        for v in &mut parents {
            v.sort_unstable();
        }
        Ok(Scg {
            names,
            index,
            children,
            parents,
        })
    }

    /// Convenience constructor from string slices; endpoints are implicitly
    /// declared as vertices.
    pub fn from_edges(
        extra_vertices: &[&str],
        edges: &[(&str, &str)],
    ) -> Result<Self> {
        let mut vertices: Vec<SeriesId> = Vec::new();
        let push = |name: &str, vertices: &mut Vec<SeriesId>| -> Result<()> {
            let id = SeriesId::new(name)?;
            if !vertices.contains(&id) {
                vertices.push(id);
            }
            Ok(())
        };
        for v in extra_vertices {
            push(v, &mut vertices)?;
        }
        for (a, b) in edges {
            push(a, &mut vertices)?;
            push(b, &mut vertices)?;
        }
        let edges = edges
            .iter()
            .map(|(a, b)| Ok((SeriesId::new(*a)?, SeriesId::new(*b)?)))
            .collect::<Result<Vec<_>>>()?;
        Scg::new(vertices, edges)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Vertices in canonical (lexicographic) order.
    pub fn vertices(&self) -> &[SeriesId] {
        &self.names
    }

    /// Edges in canonical order (sorted by endpoint names).
    pub fn edges(&self) -> Vec<(&SeriesId, &SeriesId)> {
        let mut out = Vec::new();
        for (a, cs) in self.children.iter().enumerate() {
            for &b in cs {
                out.push((&self.names[a], &self.names[b]));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.children[a].binary_search(&b).is_ok(),
            _ => false,
        }
    }

    pub(crate) fn idx(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub(crate) fn name(&self, i: usize) -> &SeriesId {
        &self.names[i]
    }

    pub(crate) fn children_idx(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub(crate) fn parents_idx(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub(crate) fn has_edge_idx(&self, from: usize, to: usize) -> bool {
        self.children[from].binary_search(&to).is_ok()
    }

    /// Parents of `v`: all `u` with `u -> v`.
    pub fn parents(&self, v: &str) -> Result<Vec<&SeriesId>> {
        let i = self.idx(v)?;
        Ok(self.parents[i].iter().map(|&p| &self.names[p]).collect())
    }

    /// Children of `v`: all `u` with `v -> u`.
    pub fn children(&self, v: &str) -> Result<Vec<&SeriesId>> {
        let i = self.idx(v)?;
        Ok(self.children[i].iter().map(|&c| &self.names[c]).collect())
    }

    pub fn has_self_loop(&self, v: &str) -> Result<bool> {
        let i = self.idx(v)?;
        Ok(self.children[i].binary_search(&i).is_ok())
    }

    /// Reachability closure over an adjacency selector. `strict` excludes the
    /// empty path: the seed is a member only when it is reachable again
    /// through at least one edge.
    fn closure(&self, seed: usize, strict: bool, forward: bool) -> Vec<bool> {
        let adj = if forward { &self.children } else { &self.parents };
        let mut member = vec![false; self.names.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &u in &adj[seed] {
            if !member[u] {
                member[u] = true;
                stack.push(u);
            }
        }
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !member[w] {
                    member[w] = true;
                    stack.push(w);
                }
            }
        }
        if !strict {
            member[seed] = true;
        }
        member
    }

    pub(crate) fn descendants_mask(&self, seed: usize, strict: bool) -> Vec<bool> {
        self.closure(seed, strict, true)
    }

    pub(crate) fn ancestors_mask(&self, seed: usize, strict: bool) -> Vec<bool> {
        self.closure(seed, strict, false)
    }

    /// Descendants of `v`. With `strict`, only series reachable through a
    /// non-empty directed path (so `v` itself is a member only when it lies
    /// on a cycle or has a self-loop).
    pub fn descendants(&self, v: &str, strict: bool) -> Result<Vec<&SeriesId>> {
        let i = self.idx(v)?;
        let mask = self.descendants_mask(i, strict);
        Ok(self.collect_mask(&mask))
    }

    /// Ancestors of `v`; dual of [`Scg::descendants`].
    pub fn ancestors(&self, v: &str, strict: bool) -> Result<Vec<&SeriesId>> {
        let i = self.idx(v)?;
        let mask = self.ancestors_mask(i, strict);
        Ok(self.collect_mask(&mask))
    }

    fn collect_mask<'a>(&'a self, mask: &[bool]) -> Vec<&'a SeriesId> {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| &self.names[i])
            .collect()
    }

    /// True iff `v` lies on a directed cycle with at least two distinct
    /// vertices (self-loops do not count).
    pub fn has_big_cycle(&self, v: &str) -> Result<bool> {
        let i = self.idx(v)?;
        let desc = self.descendants_mask(i, true);
        let anc = self.ancestors_mask(i, true);
        Ok(desc
            .iter()
            .zip(anc.iter())
            .enumerate()
            .any(|(u, (&d, &a))| d && a && u != i))
    }

    /// Subgraph induced by `keep`: those vertices and every edge with both
    /// endpoints in `keep`.
    pub fn induced_subgraph(&self, keep: &[&str]) -> Result<Scg> {
        let mut mask = vec![false; self.names.len()];
        for k in keep {
            mask[self.idx(k)?] = true;
        }
        Ok(self.induced_subgraph_mask(&mask))
    }

    pub(crate) fn induced_subgraph_mask(&self, mask: &[bool]) -> Scg {
        let vertices: Vec<SeriesId> = self
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| mask[*i])
            .map(|(_, n)| n.clone())
            .collect();
        let edges: Vec<(SeriesId, SeriesId)> = self
            .children
            .iter()
            .enumerate()
            .filter(|(a, _)| mask[*a])
            .flat_map(|(a, cs)| {
                cs.iter()
                    .filter(|&&b| mask[b])
                    .map(move |&b| (self.names[a].clone(), self.names[b].clone()))
            })
            .collect();
        Scg::new(vertices, edges).expect("induced subgraph of a valid graph is valid")
    }
}
