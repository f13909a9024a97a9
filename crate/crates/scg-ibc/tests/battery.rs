//! Exhaustive multi-intervention battery: every SCG on three vertices
//! against a fixed set of queries chosen to hit the same-time-intervention
//! branches of the consistent fork test, both regimes, decided and
//! oracle-checked.

use scg_ibc::corpus;
use scg_ibc::oracle::{witness_search_query, EnumSpec};
use scg_ibc::{compute_t_nc, decide, preprocess, CausalQuery, SeriesId, TemporalVertex};

fn v(s: &str, t: i64) -> TemporalVertex {
    TemporalVertex::new(SeriesId::new(s).unwrap(), t)
}

#[test]
fn three_vertex_multi_intervention_battery() {
    let batteries: Vec<(Vec<TemporalVertex>, &str)> = vec![
        (vec![v("S0", 0), v("S1", -1)], "S2"),
        (vec![v("S0", -1), v("S1", -1)], "S2"),
        (vec![v("S0", -1), v("S1", -1), v("S2", -2)], "S2"),
        (vec![v("S1", 0), v("S2", 0)], "S0"),
        (vec![v("S0", -1), v("S0", 0)], "S1"),
        (vec![v("S0", -2), v("S0", -1)], "S1"),
        (vec![v("S0", -1), v("S1", 0)], "S1"),
        (vec![v("S1", -1)], "S1"),
        (vec![v("S1", -2), v("S2", -1)], "S1"),
    ];
    let mut checked = 0u64;
    for g in corpus::all_scgs(3) {
        for (xs, eff) in &batteries {
            if xs.iter().any(|x| x.series.as_str() == *eff && x.time == 0) {
                continue;
            }
            let q = CausalQuery::single(xs.clone(), SeriesId::new(*eff).unwrap()).unwrap();
            let kept = preprocess(&g, &q).unwrap().0.interventions;
            for consistency in [false, true] {
                checked += 1;
                let verdict = decide(&g, &q, consistency).unwrap();
                let oracle_has = if kept.is_empty() {
                    false
                } else {
                    let p = compute_t_nc(&g, &kept).unwrap();
                    let spec = EnumSpec::default_for_query(&g, &q, consistency).unwrap();
                    witness_search_query(&spec, &kept, &q.effects[0], &p)
                        .unwrap()
                        .exists_witness
                };
                assert_eq!(
                    verdict.identifiable,
                    !oracle_has,
                    "consistency={consistency} graph={:?} query={q:?}",
                    scg_ibc::serialize_scg(&g, scg_ibc::Format::EdgeList)
                );
            }
        }
    }
    assert_eq!(checked, 8192);
}
