//! d-separation and the multivariate backdoor criterion on concrete FTCGs.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ftcg::{Ftcg, Vix};
use crate::series::TemporalVertex;

/// Standard d-separation verdict on an FTCG: is every path between `a` and
/// `b` blocked by `z`?
///
/// Reachability over (vertex, entered-downstream) states; a collider is
/// passable iff it is an ancestor of the conditioning set.
pub fn d_separated(
    f: &Ftcg,
    a: &TemporalVertex,
    b: &TemporalVertex,
    z: &[TemporalVertex],
) -> Result<bool> {
    let av = f.vix(a)?;
    let bv = f.vix(b)?;
    let zs: BTreeSet<Vix> = z.iter().map(|v| f.vix(v)).collect::<Result<_>>()?;
    if av == bv || zs.contains(&av) || zs.contains(&bv) {
        return Err(Error::Overlap(format!("{a}, {b} and z must be distinct")));
    }
    Ok(!d_connected_vix(f, av, bv, &zs))
}

pub(crate) fn d_connected_vix(f: &Ftcg, a: Vix, b: Vix, zs: &BTreeSet<Vix>) -> bool {
    // Ancestors of z (including z) decide collider passability.
    let anc_z = {
        let mut out: BTreeSet<Vix> = zs.clone();
        let mut stack: Vec<Vix> = zs.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &p in f.parents_of(v) {
                if out.insert(p) {
                    stack.push(p);
                }
            }
        }
        out
    };

    // State: (vertex, entered through an arrow into it).
    let mut visited: BTreeSet<(Vix, bool)> = BTreeSet::new();
    let mut stack: Vec<(Vix, bool)> = Vec::new();
    for &c in f.children_of(a) {
        stack.push((c, true));
    }
    for &p in f.parents_of(a) {
        stack.push((p, false));
    }
    while let Some((v, came_down)) = stack.pop() {
        if !visited.insert((v, came_down)) {
            continue;
        }
        if v == b {
            return true;
        }
        let in_z = zs.contains(&v);
        if came_down {
            if !in_z {
                for &c in f.children_of(v) {
                    stack.push((c, true));
                }
            }
            if anc_z.contains(&v) {
                for &p in f.parents_of(v) {
                    stack.push((p, false));
                }
            }
        } else if !in_z {
            for &p in f.parents_of(v) {
                stack.push((p, false));
            }
            for &c in f.children_of(v) {
                stack.push((c, true));
            }
        }
    }
    false
}

/// The multivariate backdoor criterion for `z` relative to `xs` and `ys`:
/// no element of `z` descends from any intervention, and for every pair the
/// backdoor paths are blocked in the graph where the other interventions
/// lose their outgoing arrows.
pub fn backdoor_criterion(
    f: &Ftcg,
    xs: &[TemporalVertex],
    ys: &[TemporalVertex],
    z: &[TemporalVertex],
) -> Result<bool> {
    let xset: BTreeSet<Vix> = xs.iter().map(|v| f.vix(v)).collect::<Result<_>>()?;
    let yset: BTreeSet<Vix> = ys.iter().map(|v| f.vix(v)).collect::<Result<_>>()?;
    let zset: BTreeSet<Vix> = z.iter().map(|v| f.vix(v)).collect::<Result<_>>()?;
    if !xset.is_disjoint(&yset) || !xset.is_disjoint(&zset) || !yset.is_disjoint(&zset) {
        return Err(Error::Overlap(
            "xs, ys and z must be pairwise disjoint".into(),
        ));
    }

    // Condition 1: z contains no descendant of any intervention.
    let xvec: Vec<Vix> = xset.iter().copied().collect();
    let desc = f.descendants_of(&xvec);
    if z.iter().any(|v| desc.contains(&f.vix(v).expect("checked"))) {
        return Ok(false);
    }

    // Condition 2. Removing the outgoing arrows of every intervention
    // restricts attention to backdoor paths; with condition 1 established,
    // blocking in that graph coincides with blocking the backdoor paths of
    // the per-pair mutilated graphs.
    let cut = f.mutilate(&[], xs)?;
    for x in xs {
        for y in ys {
            let xv = cut.vix(x)?;
            let yv = cut.vix(y)?;
            if d_connected_vix(&cut, xv, yv, &zset) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
