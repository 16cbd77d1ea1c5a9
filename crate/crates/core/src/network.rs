//! Rooted marked multigraphs and ball extraction.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use arrayvec::ArrayVec;
use rand::Rng;

use crate::error::{Result, UrtError};

/// Maximum number of real coordinates carried by a [`Mark`].
pub const MAX_MARK_VALUES: usize = 8;

/// Index of the color channel in edge endpoint marks of labeled percolations.
pub const COLOR_CHANNEL: usize = 0;

/// A point of the mark space: a discrete tag and up to eight finite reals.
///
/// Two marks are at distance `max |a_i - b_i|` when tags and lengths agree and
/// at infinite distance otherwise.
#[derive(Clone, Default, PartialEq)]
pub struct Mark {
    tag: u32,
    values: ArrayVec<f64, MAX_MARK_VALUES>,
}

impl Mark {
    pub fn new(tag: u32, values: &[f64]) -> Result<Self> {
        if values.len() > MAX_MARK_VALUES {
            return Err(UrtError::Mark(format!("{} values exceed the limit of {MAX_MARK_VALUES}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(UrtError::Mark(format!("non-finite value {v}")));
        }
        let mut out = ArrayVec::new();
        out.extend(values.iter().copied());
        Ok(Mark { tag, values: out })
    }

    /// The unmarked point (tag 0, no values).
    pub fn empty() -> Self {
        Mark::default()
    }

    pub fn tag(&self) -> u32 {
        self.tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn push(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(UrtError::Mark(format!("non-finite value {value}")));
        }
        self.values.try_push(value).map_err(|_| UrtError::Mark(format!("more than {MAX_MARK_VALUES} values")))
    }

    /// Mark with the first `n` values removed.
    pub fn without_prefix(&self, n: usize) -> Mark {
        let mut out = Mark { tag: self.tag, values: ArrayVec::new() };
        out.values.extend(self.values.iter().skip(n).copied());
        out
    }

    pub fn distance(&self, other: &Mark) -> f64 {
        if self.tag != other.tag || self.values.len() != other.values.len() {
            return f64::INFINITY;
        }
        self.values.iter().zip(other.values.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.tag, self.values.as_slice())
    }
}

/// Radius up to which a network is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validity {
    Finite(u32),
    Unbounded,
}

impl Validity {
    pub fn covers(self, r: u64) -> bool {
        match self {
            Validity::Unbounded => true,
            Validity::Finite(v) => r <= u64::from(v),
        }
    }

    pub fn saturating_sub(self, k: u32) -> Validity {
        match self {
            Validity::Unbounded => Validity::Unbounded,
            Validity::Finite(v) => Validity::Finite(v.saturating_sub(k)),
        }
    }

    pub fn min(self, other: Validity) -> Validity {
        match (self, other) {
            (Validity::Unbounded, x) | (x, Validity::Unbounded) => x,
            (Validity::Finite(a), Validity::Finite(b)) => Validity::Finite(a.min(b)),
        }
    }

    pub(crate) fn check(self, requested: u64) -> Result<()> {
        match self {
            Validity::Finite(v) if requested > u64::from(v) => {
                Err(UrtError::Truncation { requested, validity: u64::from(v) })
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validity::Finite(v) => write!(f, "{v}"),
            Validity::Unbounded => write!(f, "inf"),
        }
    }
}

/// An edge with one mark per endpoint; `marks[i]` sits at `ends[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub ends: [usize; 2],
    pub marks: [Mark; 2],
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    /// Mark at the endpoint `v`, i.e. the mark of the direction leaving `v`.
    pub fn mark_at(&self, v: usize) -> &Mark {
        if self.ends[0] == v {
            &self.marks[0]
        } else {
            &self.marks[1]
        }
    }

    pub fn mark_at_mut(&mut self, v: usize) -> &mut Mark {
        if self.ends[0] == v {
            &mut self.marks[0]
        } else {
            &mut self.marks[1]
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NetworkBuilder {
    marks: Vec<Mark>,
    edges: Vec<Edge>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(vertices: usize) -> Self {
        NetworkBuilder { marks: Vec::with_capacity(vertices), edges: Vec::with_capacity(vertices) }
    }

    pub fn vertex_count(&self) -> usize {
        self.marks.len()
    }

    pub fn add_vertex(&mut self, mark: Mark) -> usize {
        self.marks.push(mark);
        self.marks.len() - 1
    }

    pub fn add_vertices(&mut self, n: usize) -> std::ops::Range<usize> {
        let lo = self.marks.len();
        self.marks.resize(lo + n, Mark::empty());
        lo..lo + n
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<usize> {
        self.add_marked_edge(a, b, Mark::empty(), Mark::empty())
    }

    pub fn add_marked_edge(&mut self, a: usize, b: usize, mark_a: Mark, mark_b: Mark) -> Result<usize> {
        let n = self.marks.len();
        if a >= n || b >= n {
            return Err(UrtError::Domain(format!("edge ({a}, {b}) references a missing vertex")));
        }
        if a == b {
            return Err(UrtError::Domain(format!("loop at vertex {a}")));
        }
        self.edges.push(Edge { ends: [a, b], marks: [mark_a, mark_b] });
        Ok(self.edges.len() - 1)
    }

    pub fn set_vertex_mark(&mut self, v: usize, mark: Mark) {
        self.marks[v] = mark;
    }

    pub fn build(self, root: usize, validity: Validity) -> Result<RootedNetwork> {
        RootedNetwork::from_parts(self.marks, self.edges, root, validity)
    }
}

/// A finite connected marked multigraph with a root.
///
/// `validity = Finite(r)` promises that every vertex at distance `< r` from the
/// root has its complete neighbourhood present, and that the sub-network
/// induced on the `r`-ball is exact. Finite graphs given in full carry
/// `Validity::Unbounded`. Vertex ids are the indices `0..vertex_count()`.
#[derive(Clone, Debug)]
pub struct RootedNetwork {
    marks: Vec<Mark>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<u32>>,
    root: usize,
    validity: Validity,
}

impl RootedNetwork {
    pub fn from_parts(marks: Vec<Mark>, edges: Vec<Edge>, root: usize, validity: Validity) -> Result<Self> {
        let n = marks.len();
        if root >= n {
            return Err(UrtError::Domain(format!("root {root} is not a vertex")));
        }
        let mut incidence = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            let [a, b] = e.ends;
            if a >= n || b >= n {
                return Err(UrtError::Domain(format!("edge ({a}, {b}) references a missing vertex")));
            }
            if a == b {
                return Err(UrtError::Domain(format!("loop at vertex {a}")));
            }
            incidence[a].push(i as u32);
            incidence[b].push(i as u32);
        }
        let net = RootedNetwork { marks, edges, incidence, root, validity };
        let reached = net.distances_from(root, None).iter().filter(|d| d.is_some()).count();
        if reached != n {
            return Err(UrtError::Domain(format!(
                "network is disconnected: {reached} of {n} vertices reachable from the root"
            )));
        }
        Ok(net)
    }

    pub fn single_vertex(mark: Mark, validity: Validity) -> Self {
        RootedNetwork { marks: vec![mark], edges: Vec::new(), incidence: vec![Vec::new()], root: 0, validity }
    }

    pub fn vertex_count(&self) -> usize {
        self.marks.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn vertex_mark(&self, v: usize) -> &Mark {
        &self.marks[v]
    }

    pub fn vertex_marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Indices of the edges incident to `v`, in insertion order.
    pub fn incident(&self, v: usize) -> &[u32] {
        &self.incidence[v]
    }

    /// `(edge index, neighbour)` pairs of `v`; parallel edges repeat the neighbour.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incidence[v].iter().map(move |&e| (e as usize, self.edges[e as usize].other(v)))
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.marks.len()
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Breadth-first distances from `source`, optionally stopping at `limit`.
    pub fn distances_from(&self, source: usize, limit: Option<u32>) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.marks.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            if limit.is_some_and(|l| du >= l) {
                continue;
            }
            for &e in &self.incidence[u] {
                let w = self.edges[e as usize].other(u);
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, a: usize, b: usize) -> Option<u32> {
        self.distances_from(a, None)[b]
    }

    /// Validity of the network seen from `center`: radius up to which balls
    /// around `center` are exact.
    pub fn validity_at(&self, center: usize) -> Result<Validity> {
        self.check_vertex(center)?;
        match self.validity {
            Validity::Unbounded => Ok(Validity::Unbounded),
            Validity::Finite(v) => {
                let d = self.distance(self.root, center).unwrap_or(u32::MAX);
                Ok(Validity::Finite(v.saturating_sub(d)))
            }
        }
    }

    /// The same network rooted at `v`.
    pub fn rerooted(&self, v: usize) -> Result<RootedNetwork> {
        let validity = self.validity_at(v)?;
        let mut out = self.clone();
        out.root = v;
        out.validity = validity;
        Ok(out)
    }

    /// Re-roots at a uniformly chosen vertex.
    pub fn rerooted_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> RootedNetwork {
        let v = rng.random_range(0..self.vertex_count());
        self.rerooted(v).expect("vertex in range")
    }

    pub fn with_validity(mut self, validity: Validity) -> RootedNetwork {
        self.validity = validity;
        self
    }

    pub fn into_parts(self) -> (Vec<Mark>, Vec<Edge>, usize, Validity) {
        (self.marks, self.edges, self.root, self.validity)
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.marks.len() {
            return Err(UrtError::Domain(format!("vertex {v} is absent")));
        }
        Ok(())
    }

    pub(crate) fn set_vertex_marks(&mut self, marks: Vec<Mark>) {
        debug_assert_eq!(marks.len(), self.marks.len());
        self.marks = marks;
    }

    pub(crate) fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }
}

/// A rooted network with a second distinguished vertex.
#[derive(Clone, Debug)]
pub struct DoublyRootedNetwork {
    net: RootedNetwork,
    second: usize,
}

impl DoublyRootedNetwork {
    pub fn new(net: RootedNetwork, second: usize) -> Result<Self> {
        net.check_vertex(second)?;
        Ok(DoublyRootedNetwork { net, second })
    }

    pub fn network(&self) -> &RootedNetwork {
        &self.net
    }

    pub fn root(&self) -> usize {
        self.net.root()
    }

    pub fn second_root(&self) -> usize {
        self.second
    }

    /// Exchanges the two roots.
    pub fn swapped(&self) -> Result<DoublyRootedNetwork> {
        Ok(DoublyRootedNetwork { net: self.net.rerooted(self.second)?, second: self.net.root() })
    }
}

/// Sub-network induced on the vertices within distance `r` of `center`,
/// rooted at `center`, with validity `r`.
///
/// Vertices of the result are numbered in breadth-first order from the center.
pub fn ball(net: &RootedNetwork, center: usize, r: u32) -> Result<RootedNetwork> {
    let (out, _) = ball_with_map(net, center, r)?;
    Ok(out)
}

/// Like [`ball`], also returning the original id of every vertex in the ball.
pub fn ball_with_map(net: &RootedNetwork, center: usize, r: u32) -> Result<(RootedNetwork, Vec<usize>)> {
    net.check_vertex(center)?;
    net.validity_at(center)?.check(u64::from(r))?;

    let mut local: HashMap<usize, u32> = HashMap::new();
    let mut order = vec![center];
    let mut dist = vec![0u32];
    local.insert(center, 0);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        let du = dist[head];
        head += 1;
        if du == r {
            continue;
        }
        for (_, w) in net.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(slot) = local.entry(w) {
                slot.insert(order.len() as u32);
                order.push(w);
                dist.push(du + 1);
            }
        }
    }

    let marks: Vec<Mark> = order.iter().map(|&v| net.marks[v].clone()).collect();
    let mut edges = Vec::new();
    for (iu, &u) in order.iter().enumerate() {
        for &e in &net.incidence[u] {
            let edge = &net.edges[e as usize];
            let w = edge.other(u);
            if let Some(&iw) = local.get(&w) {
                if iw as usize > iu {
                    edges.push(Edge {
                        ends: [iu, iw as usize],
                        marks: [edge.mark_at(u).clone(), edge.mark_at(w).clone()],
                    });
                }
            }
        }
    }
    let mut incidence = vec![Vec::new(); order.len()];
    for (i, e) in edges.iter().enumerate() {
        incidence[e.ends[0]].push(i as u32);
        incidence[e.ends[1]].push(i as u32);
    }
    let out = RootedNetwork { marks, edges, incidence, root: 0, validity: Validity::Finite(r) };
    Ok((out, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize, root: usize) -> RootedNetwork {
        let mut b = NetworkBuilder::new();
        b.add_vertices(n);
        for i in 1..n {
            b.add_edge(i - 1, i).unwrap();
        }
        b.build(root, Validity::Unbounded).unwrap()
    }

    #[test]
    fn mark_validation() {
        assert!(Mark::new(0, &[f64::NAN]).is_err());
        assert!(Mark::new(0, &[f64::INFINITY]).is_err());
        assert!(Mark::new(0, &[0.0; 9]).is_err());
        let mut m = Mark::new(1, &[0.5; 8]).unwrap();
        assert!(m.push(1.0).is_err());
        assert_eq!(Mark::new(1, &[0.0]).unwrap().distance(&Mark::new(2, &[0.0]).unwrap()), f64::INFINITY);
        assert_eq!(Mark::new(1, &[0.0, 3.0]).unwrap().distance(&Mark::new(1, &[0.25, 1.0]).unwrap()), 2.0);
    }

    #[test]
    fn builder_rejects_loops_and_disconnection() {
        let mut b = NetworkBuilder::new();
        b.add_vertices(3);
        assert!(b.add_edge(1, 1).is_err());
        b.add_edge(0, 1).unwrap();
        assert!(matches!(b.build(0, Validity::Unbounded), Err(UrtError::Domain(_))));
    }

    #[test]
    fn ball_of_radius_zero_is_root_only() {
        let g = path(7, 3);
        let b = ball(&g, 3, 0).unwrap();
        assert_eq!(b.vertex_count(), 1);
        assert_eq!(b.edge_count(), 0);
        assert_eq!(b.validity(), Validity::Finite(0));
    }

    #[test]
    fn ball_of_star_at_leaf() {
        let mut b = NetworkBuilder::new();
        b.add_vertices(6);
        for i in 1..6 {
            b.add_edge(0, i).unwrap();
        }
        let star = b.build(1, Validity::Unbounded).unwrap();
        let ball1 = ball(&star, 1, 1).unwrap();
        assert_eq!((ball1.vertex_count(), ball1.edge_count()), (2, 1));
    }

    #[test]
    fn ball_errors() {
        let g = path(5, 0).with_validity(Validity::Finite(2));
        assert!(matches!(ball(&g, 9, 1), Err(UrtError::Domain(_))));
        assert!(matches!(ball(&g, 0, 3), Err(UrtError::Truncation { requested: 3, validity: 2 })));
        // vertex 1 sits at distance 1, so only radius 1 around it is exact
        assert!(ball(&g, 1, 1).is_ok());
        assert!(ball(&g, 1, 2).is_err());
    }

    #[test]
    fn ball_keeps_induced_edges_and_marks() {
        // triangle with marked endpoints
        let mut b = NetworkBuilder::new();
        b.add_vertices(3);
        b.add_marked_edge(0, 1, Mark::new(1, &[]).unwrap(), Mark::new(2, &[]).unwrap()).unwrap();
        b.add_edge(1, 2).unwrap();
        b.add_edge(2, 0).unwrap();
        let g = b.build(0, Validity::Unbounded).unwrap();
        let ball1 = ball(&g, 1, 1).unwrap();
        assert_eq!(ball1.edge_count(), 3);
        let e = ball1.edges().iter().find(|e| e.mark_at(0).tag() == 2).unwrap();
        assert_eq!(e.mark_at(e.other(0)).tag(), 1);
    }

    #[test]
    fn parallel_edges_are_kept() {
        let mut b = NetworkBuilder::new();
        b.add_vertices(2);
        b.add_edge(0, 1).unwrap();
        b.add_edge(1, 0).unwrap();
        let g = b.build(0, Validity::Unbounded).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(ball(&g, 0, 1).unwrap().edge_count(), 2);
    }

    #[test]
    fn doubly_rooted_swap() {
        let g = path(4, 0);
        let d = DoublyRootedNetwork::new(g, 2).unwrap();
        let s = d.swapped().unwrap();
        assert_eq!((s.root(), s.second_root()), (2, 0));
        assert!(DoublyRootedNetwork::new(path(2, 0), 5).is_err());
    }
}
