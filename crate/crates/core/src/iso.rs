//! Root-preserving isomorphism of finite networks with a mark tolerance.
//!
//! Tolerance matching is not transitive, so this cannot go through canonical
//! codes. Trees are matched bottom-up with bipartite matchings between child
//! lists; other networks by backtracking along a breadth-first order.

use std::collections::HashMap;

use crate::network::{Mark, RootedNetwork};

fn close(a: &Mark, b: &Mark, tol: f64) -> bool {
    a.distance(b) <= tol
}

/// Kuhn's augmenting-path algorithm on a square compatibility matrix.
fn has_perfect_matching(compat: &[Vec<bool>]) -> bool {
    let k = compat.len();
    let mut match_right: Vec<Option<usize>> = vec![None; k];

    fn augment(i: usize, compat: &[Vec<bool>], seen: &mut [bool], match_right: &mut [Option<usize>]) -> bool {
        for j in 0..compat.len() {
            if compat[i][j] && !seen[j] {
                seen[j] = true;
                if match_right[j].is_none_or(|i2| augment(i2, compat, seen, match_right)) {
                    match_right[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }

    (0..k).all(|i| {
        let mut seen = vec![false; k];
        augment(i, compat, &mut seen, &mut match_right)
    })
}

fn profile(g: &RootedNetwork) -> (Vec<Option<u32>>, Vec<(u32, usize)>) {
    let dist = g.distances_from(g.root(), None);
    let mut p: Vec<(u32, usize)> = (0..g.vertex_count()).map(|v| (dist[v].unwrap_or(u32::MAX), g.degree(v))).collect();
    p.sort_unstable();
    (dist, p)
}

/// True iff some root-preserving isomorphism matches vertex and edge-endpoint
/// marks within `mark_tol` (tags must agree exactly).
pub fn rooted_isomorphic(a: &RootedNetwork, b: &RootedNetwork, mark_tol: f64) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let (dist_a, pa) = profile(a);
    let (dist_b, pb) = profile(b);
    if pa != pb {
        return false;
    }
    if a.is_tree() {
        TreeMatcher::new(a, b, mark_tol).matches(a.root(), b.root())
    } else {
        GraphMatcher::new(a, b, mark_tol, dist_a, dist_b).run()
    }
}

fn children_lists(g: &RootedNetwork) -> Vec<Vec<(usize, usize)>> {
    let n = g.vertex_count();
    let mut kids = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([g.root()]);
    seen[g.root()] = true;
    while let Some(u) = queue.pop_front() {
        for (e, w) in g.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                kids[u].push((e, w));
                queue.push_back(w);
            }
        }
    }
    kids
}

struct TreeMatcher<'a> {
    a: &'a RootedNetwork,
    b: &'a RootedNetwork,
    tol: f64,
    kids_a: Vec<Vec<(usize, usize)>>,
    kids_b: Vec<Vec<(usize, usize)>>,
    memo: HashMap<(usize, usize), bool>,
}

impl<'a> TreeMatcher<'a> {
    fn new(a: &'a RootedNetwork, b: &'a RootedNetwork, tol: f64) -> Self {
        TreeMatcher { a, b, tol, kids_a: children_lists(a), kids_b: children_lists(b), memo: HashMap::new() }
    }

    fn matches(&mut self, u: usize, v: usize) -> bool {
        if let Some(&r) = self.memo.get(&(u, v)) {
            return r;
        }
        let ok = self.compute(u, v);
        self.memo.insert((u, v), ok);
        ok
    }

    fn compute(&mut self, u: usize, v: usize) -> bool {
        if !close(self.a.vertex_mark(u), self.b.vertex_mark(v), self.tol) {
            return false;
        }
        let ka = self.kids_a[u].clone();
        let kb = self.kids_b[v].clone();
        if ka.len() != kb.len() {
            return false;
        }
        let mut compat = vec![vec![false; kb.len()]; ka.len()];
        for (i, &(ea, ca)) in ka.iter().enumerate() {
            for (j, &(eb, cb)) in kb.iter().enumerate() {
                let (ea, eb) = (self.a.edge(ea), self.b.edge(eb));
                compat[i][j] = close(ea.mark_at(u), eb.mark_at(v), self.tol)
                    && close(ea.mark_at(ca), eb.mark_at(cb), self.tol)
                    && self.matches(ca, cb);
            }
        }
        has_perfect_matching(&compat)
    }
}

struct GraphMatcher<'a> {
    a: &'a RootedNetwork,
    b: &'a RootedNetwork,
    tol: f64,
    dist_a: Vec<Option<u32>>,
    dist_b: Vec<Option<u32>>,
    order: Vec<usize>,
    bfs_parent: Vec<usize>,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl<'a> GraphMatcher<'a> {
    fn new(
        a: &'a RootedNetwork,
        b: &'a RootedNetwork,
        tol: f64,
        dist_a: Vec<Option<u32>>,
        dist_b: Vec<Option<u32>>,
    ) -> Self {
        let n = a.vertex_count();
        let mut order = vec![a.root()];
        let mut bfs_parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[a.root()] = true;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for (_, w) in a.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    bfs_parent[w] = u;
                    order.push(w);
                }
            }
        }
        GraphMatcher { a, b, tol, dist_a, dist_b, order, bfs_parent, map: vec![None; n], used: vec![false; n] }
    }

    fn run(&mut self) -> bool {
        self.assign(0)
    }

    fn consistent(&self, u: usize, x: usize) -> bool {
        let (a, b) = (self.a, self.b);
        if self.dist_a[u] != self.dist_b[x]
            || a.degree(u) != b.degree(x)
            || !close(a.vertex_mark(u), b.vertex_mark(x), self.tol)
        {
            return false;
        }
        // edges from u to mapped vertices, grouped by neighbour
        let mut groups_a: HashMap<usize, Vec<usize>> = HashMap::new();
        for (e, w) in a.neighbors(u) {
            if self.map[w].is_some() {
                groups_a.entry(w).or_default().push(e);
            }
        }
        let mapped_b = b.neighbors(x).filter(|&(_, y)| self.used[y]).count();
        if mapped_b != groups_a.values().map(Vec::len).sum::<usize>() {
            return false;
        }
        for (w, ea_list) in groups_a {
            let y = self.map[w].expect("mapped");
            let eb_list: Vec<usize> = b.neighbors(x).filter(|&(_, z)| z == y).map(|(e, _)| e).collect();
            if eb_list.len() != ea_list.len() {
                return false;
            }
            let compat: Vec<Vec<bool>> = ea_list
                .iter()
                .map(|&ea| {
                    eb_list
                        .iter()
                        .map(|&eb| {
                            let (ea, eb) = (a.edge(ea), b.edge(eb));
                            close(ea.mark_at(u), eb.mark_at(x), self.tol)
                                && close(ea.mark_at(w), eb.mark_at(y), self.tol)
                        })
                        .collect()
                })
                .collect();
            if !has_perfect_matching(&compat) {
                return false;
            }
        }
        true
    }

    fn assign(&mut self, i: usize) -> bool {
        if i == self.order.len() {
            return true;
        }
        let u = self.order[i];
        let candidates: Vec<usize> = if i == 0 {
            vec![self.b.root()]
        } else {
            let p = self.map[self.bfs_parent[u]].expect("parent mapped first");
            let mut c: Vec<usize> = self.b.neighbors(p).map(|(_, y)| y).collect();
            c.sort_unstable();
            c.dedup();
            c
        };
        for x in candidates {
            if self.used[x] || !self.consistent(u, x) {
                continue;
            }
            self.map[u] = Some(x);
            self.used[x] = true;
            if self.assign(i + 1) {
                return true;
            }
            self.map[u] = None;
            self.used[x] = false;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{NetworkBuilder, Validity};

    fn from_edges(n: usize, edges: &[(usize, usize)], root: usize) -> RootedNetwork {
        let mut b = NetworkBuilder::new();
        b.add_vertices(n);
        for &(u, v) in edges {
            b.add_edge(u, v).unwrap();
        }
        b.build(root, Validity::Unbounded).unwrap()
    }

    #[test]
    fn identity_and_root_choice() {
        let p = from_edges(3, &[(0, 1), (1, 2)], 1);
        assert!(rooted_isomorphic(&p, &p, 0.0));
        let q = from_edges(3, &[(0, 1), (1, 2)], 0);
        assert!(!rooted_isomorphic(&p, &q, 0.0));
    }

    #[test]
    fn star_relabeled() {
        let a = from_edges(4, &[(0, 1), (0, 2), (0, 3)], 0);
        let b = from_edges(4, &[(3, 0), (3, 2), (3, 1)], 3);
        assert!(rooted_isomorphic(&a, &b, 0.0));
    }

    #[test]
    fn tolerance_on_marks() {
        let mk = |x: f64| {
            let mut b = NetworkBuilder::new();
            b.add_vertex(Mark::new(0, &[0.0]).unwrap());
            b.add_vertex(Mark::new(0, &[x]).unwrap());
            b.add_vertex(Mark::new(0, &[1.0]).unwrap());
            b.add_edge(0, 1).unwrap();
            b.add_edge(0, 2).unwrap();
            b.build(0, Validity::Unbounded).unwrap()
        };
        assert!(rooted_isomorphic(&mk(0.1), &mk(0.15), 0.05));
        assert!(!rooted_isomorphic(&mk(0.1), &mk(0.2), 0.05));
        // children may be matched crosswise
        assert!(rooted_isomorphic(&mk(0.9), &mk(0.95), 0.1));
    }

    #[test]
    fn cycles_with_parallel_edges() {
        let a = from_edges(3, &[(0, 1), (1, 2), (2, 0), (1, 2)], 0);
        let b = from_edges(3, &[(0, 2), (2, 1), (1, 0), (2, 1)], 0);
        let c = from_edges(3, &[(0, 1), (1, 2), (2, 0), (0, 1)], 0);
        assert!(rooted_isomorphic(&a, &b, 0.0));
        assert!(!rooted_isomorphic(&a, &c, 0.0));
    }

    #[test]
    fn matching_helper() {
        assert!(has_perfect_matching(&[vec![true, true], vec![true, false]]));
        assert!(!has_perfect_matching(&[vec![true, false], vec![true, false]]));
        assert!(has_perfect_matching(&[]));
    }
}
