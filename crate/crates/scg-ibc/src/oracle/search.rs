//! Exhaustive path search over the bounded arrow universe.
//!
//! Existence questions about candidate FTCGs reduce to path questions: a
//! time-respecting path whose reduction is a subgraph of the SCG embeds in a
//! candidate, and under consistency the path's instantaneous arrows must
//! additionally form an acyclic series-level orientation pattern. The
//! searches below track exactly that.

use crate::error::{Error, Result};
use crate::ftcg::{ArrowDir, Ftcg, TemporalPath, Vix};
use crate::query::Intervention;
use crate::scg::Scg;
use crate::series::TemporalVertex;

use super::EnumSpec;

/// Work-unit budget shared by the searches.
struct Work {
    left: u64,
    limit: u64,
    pub spent: u64,
}

impl Work {
    fn new(limit: u64) -> Self {
        Work {
            left: limit,
            limit,
            spent: 0,
        }
    }

    fn tick(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::BudgetExceeded(self.limit));
        }
        self.left -= 1;
        self.spent += 1;
        Ok(())
    }
}

/// On-the-fly neighbor generation over every realizable arrow.
struct SuperGraph<'a> {
    scg: &'a Scg,
    lo: i64,
    hi: i64,
    max_lag: i64,
}

impl<'a> SuperGraph<'a> {
    fn new(spec: &'a EnumSpec) -> Self {
        SuperGraph {
            scg: &spec.scg,
            lo: spec.window.0,
            hi: spec.window.1,
            max_lag: spec.max_lag,
        }
    }

    fn out_neighbors(&self, (s, t): Vix) -> Vec<Vix> {
        let mut out = Vec::new();
        for &c in self.scg.children_idx(s) {
            let min_lag = if c == s { 1 } else { 0 };
            for lag in min_lag..=self.max_lag {
                let t2 = t + lag;
                if t2 <= self.hi {
                    out.push((c, t2));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn in_neighbors(&self, (s, t): Vix) -> Vec<Vix> {
        let mut out = Vec::new();
        for &p in self.scg.parents_idx(s) {
            let min_lag = if p == s { 1 } else { 0 };
            for lag in min_lag..=self.max_lag {
                let t2 = t - lag;
                if t2 >= self.lo {
                    out.push((p, t2));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Committed instantaneous orientations along one path. Consistency means
/// causal relationships keep one direction through time, so a path embeds in
/// a consistent candidate iff no series pair carries instantaneous arrows
/// both ways.
#[derive(Default)]
struct InstantPattern {
    edges: Vec<(usize, usize)>,
}

impl InstantPattern {
    /// Commit `a -> b`; returns how many entries were added (for rollback),
    /// or None when the opposite orientation is already committed.
    fn try_commit(&mut self, a: usize, b: usize) -> Option<usize> {
        if self.edges.contains(&(a, b)) {
            return Some(0);
        }
        if self.edges.contains(&(b, a)) {
            return None;
        }
        self.edges.push((a, b));
        Some(1)
    }

    fn rollback(&mut self, added: usize) {
        for _ in 0..added {
            self.edges.pop();
        }
    }
}

fn commit_step(
    pattern: &mut InstantPattern,
    consistency: bool,
    tail: Vix,
    head: Vix,
) -> Option<usize> {
    if consistency && tail.1 == head.1 {
        pattern.try_commit(tail.0, head.0)
    } else {
        Some(0)
    }
}

/// Is there a directed path `from -> ... -> to` over the arrow universe with
/// every vertex except `to` satisfying `allowed`?
fn directed_path_exists(
    sg: &SuperGraph,
    consistency: bool,
    from: Vix,
    to: Vix,
    allowed: &dyn Fn(Vix) -> bool,
    work: &mut Work,
) -> Result<bool> {
    if from == to {
        return Ok(true);
    }
    if !allowed(from) {
        return Ok(false);
    }
    // Walk reachability equals path reachability; without orientation
    // commitments a BFS answers directly, and a negative BFS settles the
    // consistent regime too since commitments only remove options.
    if !bfs_reachable(sg, from, to, allowed, work)? {
        return Ok(false);
    }
    if !consistency {
        return Ok(true);
    }
    let mut path = vec![from];
    let mut pattern = InstantPattern::default();
    dfs_directed(sg, consistency, to, allowed, &mut path, &mut pattern, work)
}

fn bfs_reachable(
    sg: &SuperGraph,
    from: Vix,
    to: Vix,
    allowed: &dyn Fn(Vix) -> bool,
    work: &mut Work,
) -> Result<bool> {
    let mut seen = std::collections::BTreeSet::new();
    seen.insert(from);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        work.tick()?;
        for nb in sg.out_neighbors(u) {
            if nb == to {
                return Ok(true);
            }
            if allowed(nb) && seen.insert(nb) {
                queue.push_back(nb);
            }
        }
    }
    Ok(false)
}

fn dfs_directed(
    sg: &SuperGraph,
    consistency: bool,
    to: Vix,
    allowed: &dyn Fn(Vix) -> bool,
    path: &mut Vec<Vix>,
    pattern: &mut InstantPattern,
    work: &mut Work,
) -> Result<bool> {
    work.tick()?;
    let cur = *path.last().expect("path never empty");
    for nb in sg.out_neighbors(cur) {
        if path.contains(&nb) {
            continue;
        }
        if nb != to && !allowed(nb) {
            continue;
        }
        let Some(added) = commit_step(pattern, consistency, cur, nb) else {
            continue;
        };
        if nb == to {
            pattern.rollback(added);
            return Ok(true);
        }
        path.push(nb);
        let found = dfs_directed(sg, consistency, to, allowed, path, pattern, work)?;
        path.pop();
        pattern.rollback(added);
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Ground truth for cone membership: is `v` a descendant of some
/// intervention in some candidate FTCG, after cutting away the other
/// interventions?
pub fn descendant_of_intervention(
    spec: &EnumSpec,
    interventions: &[Intervention],
    v: &TemporalVertex,
) -> Result<bool> {
    let sg = SuperGraph::new(spec);
    let vi = (spec.scg.idx(v.series.as_str())?, v.time);
    let xs: Vec<Vix> = interventions
        .iter()
        .map(|x| Ok((spec.scg.idx(x.series.as_str())?, x.time)))
        .collect::<Result<_>>()?;
    if xs.contains(&vi) {
        return Ok(true);
    }
    let mut work = Work::new(spec.budget);
    for (i, &x) in xs.iter().enumerate() {
        let others: Vec<Vix> = xs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &o)| o)
            .collect();
        let allowed = |u: Vix| !others.contains(&u);
        if directed_path_exists(&sg, spec.consistency, x, vi, &allowed, &mut work)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Ground truth for NC-accessibility: a directed path from `from` to
/// `anchor` in some candidate, every vertex except the anchor inside NC.
pub fn nc_accessible_in_some_candidate(
    spec: &EnumSpec,
    in_nc: &dyn Fn(&TemporalVertex) -> bool,
    from: &TemporalVertex,
    anchor: &TemporalVertex,
) -> Result<bool> {
    if from == anchor {
        return Ok(false);
    }
    if !in_nc(from) {
        return Ok(false);
    }
    let sg = SuperGraph::new(spec);
    let f = (spec.scg.idx(from.series.as_str())?, from.time);
    let a = (spec.scg.idx(anchor.series.as_str())?, anchor.time);
    let names = spec.scg.vertices();
    let allowed = |u: Vix| in_nc(&TemporalVertex::new(names[u.0].clone(), u.1));
    let mut work = Work::new(spec.budget);
    directed_path_exists(&sg, spec.consistency, f, a, &allowed, &mut work)
}

/// Result of an exhaustive witness search.
#[derive(Debug, Clone)]
pub struct OracleVerdict {
    pub exists_witness: bool,
    pub witness: Option<TemporalPath>,
    pub ftcg: Option<Ftcg>,
    pub intervention: Option<Intervention>,
    /// Work units spent; reported by the CLI.
    pub expansions: u64,
}

struct WitnessCtx<'a> {
    sg: SuperGraph<'a>,
    consistency: bool,
    effect: Vix,
    others: Vec<Vix>,
    region: &'a dyn Fn(&TemporalVertex) -> bool,
}

impl WitnessCtx<'_> {
    fn vertex_ok(&self, u: Vix) -> bool {
        !self.others.contains(&u)
            && (self.region)(&TemporalVertex::new(
                self.sg.scg.vertices()[u.0].clone(),
                u.1,
            ))
    }
}

/// Search for a collider-free backdoor path from some intervention to the
/// effect that stays inside `region`, avoiding the other interventions
/// (their vertices are cut in the mutilated graphs).
///
/// The first witness in canonical order wins: shortest first, interventions
/// by (time, series), neighbors in sorted order.
pub fn witness_search(
    spec: &EnumSpec,
    interventions: &[Intervention],
    effect: &TemporalVertex,
    region: &dyn Fn(&TemporalVertex) -> bool,
) -> Result<OracleVerdict> {
    spec.validate()?;
    let mut xs = interventions.to_vec();
    xs.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.series.cmp(&b.series)));
    let effect_vix = (spec.scg.idx(effect.series.as_str())?, effect.time);
    let all: Vec<Vix> = xs
        .iter()
        .map(|x| Ok((spec.scg.idx(x.series.as_str())?, x.time)))
        .collect::<Result<_>>()?;

    let n_vertices =
        spec.scg.len() as u64 * (spec.window.1 - spec.window.0 + 1) as u64;
    // A collider-free backdoor path is two directed legs off a fork; inside
    // the cone each leg shortens to a series-simple one (non-conditionable
    // times span at most max_lag, so shortcut arrows stay realizable), which
    // caps useful witness lengths at two vertices per series.
    let max_depth = n_vertices.min(2 * spec.scg.len() as u64).min(63) as usize;
    let mut work = Work::new(spec.budget);

    for depth in 1..=max_depth {
        for (i, x) in xs.iter().enumerate() {
            let start = all[i];
            let others: Vec<Vix> = all
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &o)| o)
                .collect();
            let ctx = WitnessCtx {
                sg: SuperGraph::new(spec),
                consistency: spec.consistency,
                effect: effect_vix,
                others,
                region,
            };
            if !ctx.vertex_ok(start) || start == effect_vix {
                continue;
            }
            let mut path = vec![start];
            let mut pattern = InstantPattern::default();
            if let Some((vertices, arrows)) =
                dfs_witness(&ctx, &mut path, &mut pattern, false, depth, &mut work)?
            {
                let witness = assemble_witness(spec, &vertices, &arrows);
                let ftcg = materialize(spec, &witness)?;
                debug_assert!(witness.contained_in(&ftcg));
                return Ok(OracleVerdict {
                    exists_witness: true,
                    witness: Some(witness),
                    ftcg: Some(ftcg),
                    intervention: Some(x.clone()),
                    expansions: work.spent,
                });
            }
        }
    }
    Ok(OracleVerdict {
        exists_witness: false,
        witness: None,
        ftcg: None,
        intervention: None,
        expansions: work.spent,
    })
}

/// Convenience wrapper for a single-effect query with the cone region.
pub fn witness_search_query(
    spec: &EnumSpec,
    interventions: &[Intervention],
    effect: &TemporalVertex,
    profile: &crate::cone::NcProfile,
) -> Result<OracleVerdict> {
    let region = |v: &TemporalVertex| profile.in_cd(v).unwrap_or(false);
    witness_search(spec, interventions, effect, &region)
}

/// Depth-limited DFS. `path` holds the vertices from the intervention
/// onward; arrows are reconstructed from the phase log returned on success
/// (false = the step was backward, i.e. the arrow points toward the start).
fn dfs_witness(
    ctx: &WitnessCtx,
    path: &mut Vec<Vix>,
    pattern: &mut InstantPattern,
    forward: bool,
    remaining: usize,
    work: &mut Work,
) -> Result<Option<(Vec<Vix>, Vec<bool>)>> {
    work.tick()?;
    if remaining == 0 {
        return Ok(None);
    }
    let cur = *path.last().expect("path never empty");

    // Backward continuation: arrow nb -> cur, walking toward ancestors.
    if !forward {
        for nb in ctx.sg.in_neighbors(cur) {
            if path.contains(&nb) {
                continue;
            }
            let accept = nb == ctx.effect && remaining == 1;
            if nb == ctx.effect && !accept {
                continue;
            }
            if !ctx.vertex_ok(nb) {
                continue;
            }
            let Some(added) = commit_step(pattern, ctx.consistency, nb, cur) else {
                continue;
            };
            if accept {
                pattern.rollback(added);
                let mut vertices = path.clone();
                vertices.push(nb);
                // This step is backward; earlier flags are filled in while
                // the recursion unwinds.
                return Ok(Some((vertices, vec![false; path.len()])));
            }
            path.push(nb);
            let found = dfs_witness(ctx, path, pattern, false, remaining - 1, work)?;
            path.pop();
            pattern.rollback(added);
            if let Some((vertices, mut arrows)) = found {
                arrows[path.len() - 1] = false;
                return Ok(Some((vertices, arrows)));
            }
        }
    }

    // Forward steps: arrow cur -> nb. Switching from backward to forward is
    // the fork; it needs at least one backward step first so the path stays
    // a backdoor path.
    if forward || path.len() >= 2 {
        for nb in ctx.sg.out_neighbors(cur) {
            if path.contains(&nb) {
                continue;
            }
            let accept = nb == ctx.effect && remaining == 1;
            if nb == ctx.effect && !accept {
                continue;
            }
            if !ctx.vertex_ok(nb) {
                continue;
            }
            let Some(added) = commit_step(pattern, ctx.consistency, cur, nb) else {
                continue;
            };
            if accept {
                pattern.rollback(added);
                let mut vertices = path.clone();
                vertices.push(nb);
                let mut arrows = vec![false; path.len()];
                *arrows.last_mut().expect("non-empty") = true;
                return Ok(Some((vertices, arrows)));
            }
            path.push(nb);
            let found = dfs_witness(ctx, path, pattern, true, remaining - 1, work)?;
            path.pop();
            pattern.rollback(added);
            if let Some((vertices, mut arrows)) = found {
                arrows[path.len() - 1] = true;
                return Ok(Some((vertices, arrows)));
            }
        }
    }
    Ok(None)
}

fn assemble_witness(spec: &EnumSpec, path: &[Vix], forward_flags: &[bool]) -> TemporalPath {
    let vertices: Vec<TemporalVertex> = path
        .iter()
        .map(|&(s, t)| TemporalVertex::new(spec.scg.vertices()[s].clone(), t))
        .collect();
    // Path runs intervention -> ... -> effect; a backward step i means the
    // arrow points from vertex i+1 to vertex i.
    let arrows: Vec<ArrowDir> = forward_flags
        .iter()
        .map(|&f| if f { ArrowDir::Forward } else { ArrowDir::Backward })
        .collect();
    TemporalPath::new(vertices, arrows).expect("search paths are simple")
}

/// Check that a temporal path embeds into the spec's candidate class and
/// return the bounded candidate hosting it: arrows must realize SCG edges
/// within the lag bound, and under consistency no series pair may carry
/// instantaneous arrows both ways. Window, time direction and self-lag
/// validity come from the FTCG constructor.
pub fn embed_path(spec: &EnumSpec, path: &TemporalPath) -> Result<Ftcg> {
    let mut pattern = InstantPattern::default();
    for i in 0..path.len_arrows() {
        let (tail, head) = path.step(i);
        if !spec.scg.has_edge(tail.series.as_str(), head.series.as_str()) {
            return Err(Error::InvalidGraph(format!(
                "arrow {tail} -> {head} realizes no edge of the graph"
            )));
        }
        if head.time - tail.time > spec.max_lag {
            return Err(Error::InvalidGraph(format!(
                "arrow {tail} -> {head} exceeds the lag bound {}",
                spec.max_lag
            )));
        }
        if spec.consistency && tail.time == head.time {
            let a = spec.scg.idx(tail.series.as_str())?;
            let b = spec.scg.idx(head.series.as_str())?;
            if pattern.try_commit(a, b).is_none() {
                return Err(Error::InvalidGraph(format!(
                    "instantaneous arrow {tail} -> {head} flips a committed direction"
                )));
            }
        }
    }
    materialize(spec, path)
}

/// Build a candidate FTCG containing the witness: just the path's arrows, a
/// valid bounded candidate under the subgraph relaxation. The search already
/// keeps instantaneous orientations one-directional, so the result respects
/// the consistency regime as well.
pub(crate) fn materialize(spec: &EnumSpec, path: &TemporalPath) -> Result<Ftcg> {
    let mut arrows: Vec<(TemporalVertex, TemporalVertex)> = Vec::new();
    for i in 0..path.len_arrows() {
        let (tail, head) = path.step(i);
        arrows.push((tail.clone(), head.clone()));
    }
    Ftcg::new(spec.scg.vertices().to_vec(), spec.window, arrows)
}
