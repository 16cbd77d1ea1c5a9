use proptest::prelude::*;

use urtlab::format::{from_text, to_text};
use urtlab::hyperbolic::{hyperbolic_distance, HPoint, MobiusMap};
use urtlab::stats::{tv_distance, EmpiricalRootedDist};
use urtlab::{ball, canonical_code, local_distance, rooted_isomorphic, Mark, NetworkBuilder, RootedNetwork, Validity};

#[derive(Clone, Debug)]
struct Shape {
    n: usize,
    edges: Vec<(usize, usize, u32)>,
    vmarks: Vec<u32>,
    root: usize,
}

fn shape(max_n: usize, extra: usize) -> impl Strategy<Value = Shape> {
    (1..=max_n).prop_flat_map(move |n| {
        let parents = proptest::collection::vec(any::<prop::sample::Index>(), n - 1);
        let extras = proptest::collection::vec((0..n, 0..n), 0..=extra);
        let emarks = proptest::collection::vec(0u32..2, n - 1 + extra);
        let vmarks = proptest::collection::vec(0u32..2, n);
        (Just(n), parents, extras, emarks, vmarks, 0..n).prop_map(|(n, parents, extras, emarks, vmarks, root)| {
            let mut edges = Vec::new();
            for (i, p) in parents.iter().enumerate() {
                edges.push((p.index(i + 1), i + 1, 0));
            }
            for (a, b) in extras {
                if a != b {
                    edges.push((a, b, 0));
                }
            }
            for (e, m) in edges.iter_mut().zip(emarks) {
                e.2 = m;
            }
            Shape { n, edges, vmarks, root }
        })
    })
}

fn build(s: &Shape, perm: &[usize], edge_order: &[usize], flip: bool) -> RootedNetwork {
    let mut b = NetworkBuilder::new();
    let mut inv = vec![0; s.n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    for &old in perm {
        b.add_vertex(Mark::new(s.vmarks[old], &[]).unwrap());
    }
    for &i in edge_order {
        let (x, y, m) = s.edges[i];
        let (ma, mb) = (Mark::new(m, &[0.5]).unwrap(), Mark::new(0, &[]).unwrap());
        if flip {
            b.add_marked_edge(inv[y], inv[x], mb, ma).unwrap();
        } else {
            b.add_marked_edge(inv[x], inv[y], ma, mb).unwrap();
        }
    }
    b.build(inv[s.root], Validity::Unbounded).unwrap()
}

fn identity(s: &Shape) -> RootedNetwork {
    build(s, &(0..s.n).collect::<Vec<_>>(), &(0..s.edges.len()).collect::<Vec<_>>(), false)
}

fn relabeled() -> impl Strategy<Value = (Shape, Vec<usize>, Vec<usize>, bool)> {
    shape(9, 4).prop_flat_map(|s| {
        let perm = Just((0..s.n).collect::<Vec<_>>()).prop_shuffle();
        let order = Just((0..s.edges.len()).collect::<Vec<_>>()).prop_shuffle();
        (Just(s), perm, order, any::<bool>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn codes_ignore_labels((s, perm, order, flip) in relabeled(), depth in 0u32..4) {
        let a = identity(&s);
        let b = build(&s, &perm, &order, flip);
        prop_assert_eq!(canonical_code(&a, depth, 0.0).unwrap(), canonical_code(&b, depth, 0.0).unwrap());
        prop_assert!(rooted_isomorphic(&a, &b, 0.0));
    }

    #[test]
    fn codes_decide_isomorphism(s in shape(5, 2), t in shape(5, 2), depth in 0u32..3) {
        let (a, b) = (identity(&s), identity(&t));
        let (ba, bb) = (ball(&a, a.root(), depth).unwrap(), ball(&b, b.root(), depth).unwrap());
        let same_code = canonical_code(&a, depth, 0.0).unwrap() == canonical_code(&b, depth, 0.0).unwrap();
        prop_assert_eq!(same_code, rooted_isomorphic(&ba, &bb, 0.0));
    }

    #[test]
    fn balls_nest(s in shape(10, 3), r in 0u32..4, k in 0u32..4) {
        let g = identity(&s);
        let inner = ball(&g, g.root(), r.min(k)).unwrap();
        let outer = ball(&ball(&g, g.root(), r.max(k)).unwrap(), 0, r.min(k)).unwrap();
        prop_assert!(rooted_isomorphic(&inner, &outer, 0.0));
        prop_assert_eq!(inner.validity(), Validity::Finite(r.min(k)));
    }

    #[test]
    fn local_distance_is_a_symmetric_bounded_quantity(s in shape(7, 2), t in shape(7, 2)) {
        let (a, b) = (identity(&s), identity(&t));
        let (d1, e1) = local_distance(&a, &b, 4).unwrap();
        let (d2, e2) = local_distance(&b, &a, 4).unwrap();
        prop_assert_eq!((d1, e1), (d2, e2));
        prop_assert!(d1 > 0.0 && d1 <= 1.0);
        prop_assert_eq!(local_distance(&a, &a, 4).unwrap().0, 0.2);
    }

    #[test]
    fn text_round_trip(s in shape(8, 3), x in -1e6f64..1e6) {
        let g = identity(&s);
        let (marks, mut edges, root, _) = g.into_parts();
        if let Some(e) = edges.first_mut() {
            e.marks[0] = Mark::new(3, &[x, x / 7.0]).unwrap();
        }
        let g = RootedNetwork::from_parts(marks, edges, root, Validity::Finite(5)).unwrap();
        let h = from_text(&to_text(&g)).unwrap();
        prop_assert_eq!(to_text(&h), to_text(&g));
        prop_assert!(rooted_isomorphic(&g, &h, 0.0));
    }

    #[test]
    fn tv_is_a_metric_on_small_laws(w in proptest::collection::vec((0usize..4, 0.0f64..1.0), 1..20),
                                     v in proptest::collection::vec((0usize..4, 0.0f64..1.0), 1..20)) {
        let codes: Vec<_> = (1..=4).map(|n| canonical_code(&urtlab::generators::star_graph(n).unwrap(), 1, 0.0).unwrap()).collect();
        let mk = |w: &[(usize, f64)]| EmpiricalRootedDist::from_weighted(1, 0.0, w.iter().map(|&(i, x)| (codes[i].clone(), x + 0.01))).unwrap();
        let (a, b) = (mk(&w), mk(&v));
        let d = tv_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - tv_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(tv_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn mobius_maps_are_isometries(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0,
                                  x1 in -5.0f64..5.0, y1 in 0.05f64..5.0, x2 in -5.0f64..5.0, y2 in 0.05f64..5.0) {
        prop_assume!(a.abs() > 0.1);
        let m = MobiusMap::new(a, b, c, (1.0 + b * c) / a).unwrap();
        let (p, q) = (HPoint::new(x1, y1).unwrap(), HPoint::new(x2, y2).unwrap());
        let d = hyperbolic_distance(p, q);
        prop_assert!((d - hyperbolic_distance(m.apply(p), m.apply(q))).abs() < 1e-7 * (1.0 + d));
    }
}
