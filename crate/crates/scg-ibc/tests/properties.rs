//! Property suites: format round-trips, graph dualities, d-separation
//! invariants, the per-effect backdoor decomposition, and witness soundness.

use proptest::prelude::*;

use scg_ibc::corpus::{self, CorpusParams};
use scg_ibc::oracle::{backdoor_criterion, d_separated, embed_path, EnumSpec};
use scg_ibc::{
    compute_accessibility, compute_accessibility_combined, compute_t_nc, decide, parse_scg,
    preprocess, serialize_scg, ArrowDir, CausalQuery, Format, Ftcg, Scg, SeriesId, TemporalPath,
    TemporalVertex,
};

fn v(s: &str, t: i64) -> TemporalVertex {
    TemporalVertex::new(SeriesId::new(s).unwrap(), t)
}

/// Strategy: an SCG over up to 8 vertices as an adjacency bitmap.
fn scg_strategy(max_n: usize) -> impl Strategy<Value = Scg> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::ANY, n * n).prop_map(move |bits| {
            let names: Vec<SeriesId> = (0..n)
                .map(|i| SeriesId::new(format!("V{i}")).unwrap())
                .collect();
            let mut edges = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if bits[a * n + b] {
                        edges.push((names[a].clone(), names[b].clone()));
                    }
                }
            }
            Scg::new(names, edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn round_trip_all_formats(g in scg_strategy(8)) {
        for f in [Format::Json, Format::EdgeList, Format::Dot] {
            let text = serialize_scg(&g, f);
            let back = parse_scg(&text, f).unwrap();
            prop_assert_eq!(&back, &g);
        }
    }

    #[test]
    fn descendants_ancestors_duality(g in scg_strategy(6), strict in proptest::bool::ANY) {
        for u in g.vertices() {
            let du = g.descendants(u.as_str(), strict).unwrap();
            for w in g.vertices() {
                let in_desc = du.contains(&w);
                let in_anc = g.ancestors(w.as_str(), strict).unwrap().contains(&u);
                prop_assert_eq!(in_desc, in_anc, "u={} w={}", u, w);
            }
        }
    }

    #[test]
    fn big_cycle_matches_brute_force(g in scg_strategy(5)) {
        // Independent check: enumerate simple directed cycles through v by
        // DFS over vertex sequences.
        fn brute(g: &Scg, start: &str) -> bool {
            fn dfs(g: &Scg, start: &str, path: &mut Vec<String>) -> bool {
                let cur = path.last().unwrap().clone();
                for c in g.children(&cur).unwrap() {
                    if c.as_str() == start && path.len() >= 2 {
                        return true;
                    }
                    if !path.iter().any(|p| p == c.as_str()) && c.as_str() != start {
                        path.push(c.to_string());
                        if dfs(g, start, path) {
                            return true;
                        }
                        path.pop();
                    }
                }
                false
            }
            dfs(g, start, &mut vec![start.to_string()])
        }
        for u in g.vertices() {
            prop_assert_eq!(
                g.has_big_cycle(u.as_str()).unwrap(),
                brute(&g, u.as_str()),
                "vertex {}", u
            );
        }
    }

    #[test]
    fn d_separation_is_symmetric(seed in 0u64..500) {
        let params = CorpusParams { series: 4, ..CorpusParams::default() };
        let (g, q) = corpus::instance(seed, 0, &params);
        let spec = EnumSpec::default_for_query(&g, &q, false).unwrap();
        // A deterministic small candidate: every arrow with lag 1.
        let arrows: Vec<(TemporalVertex, TemporalVertex)> = g
            .edges()
            .iter()
            .map(|(a, b)| (v(a.as_str(), -1), v(b.as_str(), 0)))
            .collect();
        let f = Ftcg::new(g.vertices().to_vec(), spec.window, arrows).unwrap();
        let verts: Vec<TemporalVertex> = g
            .vertices()
            .iter()
            .flat_map(|s| [v(s.as_str(), -1), v(s.as_str(), 0)])
            .collect();
        for a in &verts {
            for b in &verts {
                if a == b {
                    continue;
                }
                for z in &verts {
                    if z == a || z == b {
                        continue;
                    }
                    let ab = d_separated(&f, a, b, std::slice::from_ref(z)).unwrap();
                    let ba = d_separated(&f, b, a, std::slice::from_ref(z)).unwrap();
                    prop_assert_eq!(ab, ba);
                }
            }
        }
    }
}

/// d-separation against an independent exhaustive path-blocking check.
#[test]
fn d_separation_matches_path_enumeration() {
    fn all_paths(
        f: &Ftcg,
        a: &TemporalVertex,
        b: &TemporalVertex,
    ) -> Vec<TemporalPath> {
        fn extend(
            f: &Ftcg,
            b: &TemporalVertex,
            vertices: &mut Vec<TemporalVertex>,
            arrows: &mut Vec<ArrowDir>,
            out: &mut Vec<TemporalPath>,
        ) {
            let cur = vertices.last().unwrap().clone();
            if cur == *b {
                out.push(TemporalPath::new(vertices.clone(), arrows.clone()).unwrap());
                return;
            }
            let mut moves: Vec<(TemporalVertex, ArrowDir)> = Vec::new();
            for (t, h) in f.arrows() {
                if t == cur {
                    moves.push((h.clone(), ArrowDir::Forward));
                }
                if h == cur {
                    moves.push((t.clone(), ArrowDir::Backward));
                }
            }
            for (nb, dir) in moves {
                if vertices.contains(&nb) {
                    continue;
                }
                vertices.push(nb);
                arrows.push(dir);
                extend(f, b, vertices, arrows, out);
                vertices.pop();
                arrows.pop();
            }
        }
        let mut out = Vec::new();
        extend(f, b, &mut vec![a.clone()], &mut Vec::new(), &mut out);
        out
    }

    fn blocked(f: &Ftcg, p: &TemporalPath, z: &[TemporalVertex]) -> bool {
        for i in 1..p.vertices.len().saturating_sub(1) {
            let collider =
                p.arrows[i - 1] == ArrowDir::Forward && p.arrows[i] == ArrowDir::Backward;
            let vtx = &p.vertices[i];
            if collider {
                // Blocked unless some descendant of the collider is in z.
                let mut frontier = vec![vtx.clone()];
                let mut desc = vec![vtx.clone()];
                while let Some(u) = frontier.pop() {
                    for (t, h) in f.arrows() {
                        if t == u && !desc.contains(&h) {
                            desc.push(h.clone());
                            frontier.push(h.clone());
                        }
                    }
                }
                if !desc.iter().any(|d| z.contains(d)) {
                    return true;
                }
            } else if z.contains(vtx) {
                return true;
            }
        }
        false
    }

    let names: Vec<SeriesId> = ["A", "B", "C", "D"]
        .iter()
        .map(|s| SeriesId::new(*s).unwrap())
        .collect();
    let f = Ftcg::new(
        names,
        (-1, 0),
        vec![
            (v("A", -1), v("B", 0)),
            (v("A", -1), v("C", -1)),
            (v("C", -1), v("B", 0)),
            (v("B", -1), v("B", 0)),
            (v("C", -1), v("D", 0)),
            (v("A", -1), v("D", 0)),
        ],
    )
    .unwrap();
    let verts: Vec<TemporalVertex> = ["A", "B", "C", "D"]
        .iter()
        .flat_map(|s| [v(s, -1), v(s, 0)])
        .collect();
    let mut cases = 0;
    for a in &verts {
        for b in &verts {
            if a == b {
                continue;
            }
            for mask in 0..(1 << verts.len()) {
                let z: Vec<TemporalVertex> = verts
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, u)| u.clone())
                    .collect();
                if z.contains(a) || z.contains(b) || z.len() > 2 {
                    continue;
                }
                let fast = d_separated(&f, a, b, &z).unwrap();
                let slow = all_paths(&f, a, b).iter().all(|p| blocked(&f, p, &z));
                assert_eq!(fast, slow, "a={a} b={b} z={z:?}");
                cases += 1;
            }
        }
    }
    assert!(cases > 1000, "exercised {cases} cases");
}

/// The multivariate criterion decomposes over single effects.
#[test]
fn backdoor_criterion_decomposes_per_effect() {
    let params = CorpusParams {
        series: 4,
        ..CorpusParams::default()
    };
    for seed in 0..40u64 {
        let (g, q) = corpus::instance(seed, 1, &params);
        let spec = EnumSpec::default_for_query(&g, &q, false).unwrap();
        let arrows: Vec<(TemporalVertex, TemporalVertex)> = g
            .edges()
            .iter()
            .flat_map(|(a, b)| {
                let mut out = vec![(v(a.as_str(), -1), v(b.as_str(), 0))];
                // Instantaneous arrows along the name order only, so the
                // slice stays acyclic whatever the SCG's cycles.
                if a < b {
                    out.push((v(a.as_str(), -1), v(b.as_str(), -1)));
                }
                out
            })
            .collect();
        let f = Ftcg::new(g.vertices().to_vec(), spec.window, arrows).unwrap();
        let names = g.vertices();
        if names.len() < 4 {
            continue;
        }
        let xs = [v(names[0].as_str(), -1)];
        let ys = [v(names[1].as_str(), 0), v(names[2].as_str(), 0)];
        let z = [v(names[3].as_str(), -1)];
        let joint = backdoor_criterion(&f, &xs, &ys, &z).unwrap();
        let each = ys
            .iter()
            .all(|y| backdoor_criterion(&f, &xs, std::slice::from_ref(y), &z).unwrap());
        assert_eq!(joint, each, "seed {seed}");
    }
}

/// Combined accessibility equals the pointwise max of per-anchor profiles,
/// exhaustively over all 3-series graphs and a 4-series sample.
#[test]
fn combined_accessibility_is_pointwise_max() {
    let queries = |g: &Scg| -> Vec<CausalQuery> {
        let n = g.vertices().to_vec();
        let mut out = vec![CausalQuery::single(
            vec![TemporalVertex::new(n[0].clone(), -1)],
            n.last().unwrap().clone(),
        )
        .unwrap()];
        if n.len() >= 2 {
            out.push(
                CausalQuery::single(
                    vec![
                        TemporalVertex::new(n[0].clone(), -2),
                        TemporalVertex::new(n[1].clone(), -1),
                    ],
                    n.last().unwrap().clone(),
                )
                .unwrap(),
            );
        }
        out
    };
    let mut graphs: Vec<Scg> = corpus::all_scgs(3).collect();
    let params = CorpusParams {
        series: 4,
        ..CorpusParams::default()
    };
    for seed in 0..30 {
        graphs.push(corpus::instance(seed, 2, &params).0);
    }
    for g in graphs {
        for q in queries(&g) {
            let p = compute_t_nc(&g, &q.interventions).unwrap();
            let combined = compute_accessibility_combined(&g, &p).unwrap();
            for s in g.vertices() {
                let want = q
                    .interventions
                    .iter()
                    .map(|x| {
                        compute_accessibility(&g, &p, x, None)
                            .unwrap()
                            .ceiling(s.as_str())
                            .unwrap()
                    })
                    .max()
                    .unwrap();
                assert_eq!(combined.ceiling(s.as_str()).unwrap(), want);
            }
        }
    }
}

/// Every non-identifiable verdict ships a witness path that embeds into the
/// candidate class of the default window: a simple collider-free backdoor
/// path from the reported intervention to the effect, inside the cone,
/// avoiding the other interventions.
#[test]
fn witness_sketches_embed() {
    let params = CorpusParams::default();
    let mut checked = 0;
    for i in 0..200u64 {
        let (g, q) = corpus::instance(4242, i, &params);
        for consistency in [false, true] {
            let verdict = decide(&g, &q, consistency).unwrap();
            let Some(w) = verdict.witness else { continue };
            checked += 1;
            assert!(w.path.is_backdoor(), "instance {i}");
            assert!(w.path.is_collider_free(), "instance {i}");
            assert_eq!(w.path.vertices.first().unwrap(), &w.intervention);
            assert_eq!(w.path.vertices.last().unwrap(), &w.effect);

            let kept = preprocess(&g, &q).unwrap().0.interventions;
            let p = compute_t_nc(&g, &kept).unwrap();
            for u in &w.path.vertices {
                assert!(p.in_cd(u).unwrap(), "instance {i}: {u} outside the cone");
                assert!(
                    !kept.iter().any(|x| x == u) || *u == w.intervention,
                    "instance {i}: {u} is a mutilated intervention"
                );
            }
            let spec = EnumSpec::default_for_query(&g, &q, consistency).unwrap();
            let f = embed_path(&spec, &w.path)
                .unwrap_or_else(|e| panic!("instance {i} consistency={consistency}: {e}"));
            assert!(w.path.contained_in(&f));
        }
    }
    assert!(checked > 50, "only {checked} witnesses exercised");
}
