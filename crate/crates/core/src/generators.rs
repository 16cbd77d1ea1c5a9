//! Exact ball samplers and finite graph families.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Result, UrtError};
use crate::network::{ball, NetworkBuilder, RootedNetwork, Validity};
use crate::rng::SimRng;
use crate::sampler::RootedLawSampler;

/// A probability law on `{0, ..., K}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringLaw {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl OffspringLaw {
    /// `probs[k]` is the probability of `k`; weights are normalised.
    pub fn new(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(UrtError::Domain("offspring weights must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(UrtError::Domain("offspring weights sum to zero".into()));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(OffspringLaw { probs, cumulative })
    }

    /// Uniform law on `lo..=hi`.
    pub fn uniform(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(UrtError::Domain(format!("empty range {lo}..={hi}")));
        }
        let mut p = vec![0.0; hi + 1];
        p[lo..=hi].iter_mut().for_each(|x| *x = 1.0);
        Self::new(&p)
    }

    pub fn point(k: usize) -> Result<Self> {
        Self::uniform(k, k)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_value(&self) -> usize {
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn min_value(&self) -> usize {
        self.probs.iter().position(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let k = self.cumulative.partition_point(|&c| c <= u);
        k.min(self.max_value())
    }
}

/// Probability that the canopy root sits at height `h` above the leaves,
/// `2^{-(h+1)}`. Height `h` is the vertex `x_{h-1}` of the usual labelling.
pub fn canopy_level_probability(height: u32) -> f64 {
    0.5f64.powi(height as i32 + 1)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Came {
    Root,
    FromParent,
    FromChild,
}

/// The `r`-ball of the canopy tree around a vertex at height `height`.
///
/// A vertex at height `h >= 1` has two children at height `h - 1` and every
/// vertex has one parent at height `h + 1`.
pub fn canopy_ball(height: u32, r: u32) -> RootedNetwork {
    let mut b = NetworkBuilder::new();
    let root = b.add_vertex(Default::default());
    let mut queue = std::collections::VecDeque::from([(root, height, 0u32, Came::Root)]);
    while let Some((v, h, d, came)) = queue.pop_front() {
        if d == r {
            continue;
        }
        let (parent, children) = match came {
            Came::Root => (true, if h >= 1 { 2 } else { 0 }),
            Came::FromParent => (false, if h >= 1 { 2 } else { 0 }),
            Came::FromChild => (true, 1),
        };
        if parent {
            let w = b.add_vertex(Default::default());
            b.add_edge(v, w).expect("fresh vertex");
            queue.push_back((w, h + 1, d + 1, Came::FromChild));
        }
        for _ in 0..children {
            let w = b.add_vertex(Default::default());
            b.add_edge(v, w).expect("fresh vertex");
            queue.push_back((w, h - 1, d + 1, Came::FromParent));
        }
    }
    b.build(root, Validity::Finite(r)).expect("canopy ball is a tree")
}

/// The canopy tree rooted at height `h` with probability `2^{-(h+1)}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CanopySampler;

pub fn canopy_sampler() -> CanopySampler {
    CanopySampler
}

impl CanopySampler {
    pub fn sample_height(rng: &mut SimRng) -> u32 {
        let mut h = 0;
        while rng.random::<bool>() {
            h += 1;
        }
        h
    }
}

impl RootedLawSampler for CanopySampler {
    fn name(&self) -> String {
        "canopy".into()
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        Ok(canopy_ball(Self::sample_height(rng), radius))
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(3)
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        Some(vec![0.0, 0.5, 0.0, 0.5])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointMass {
    SingleVertex,
    /// The two-ended line.
    Line,
    /// The k-regular tree.
    Regular(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct PointMassSampler {
    kind: PointMass,
}

pub fn point_mass_sampler(kind: PointMass) -> Result<PointMassSampler> {
    if kind == PointMass::Regular(0) {
        return Err(UrtError::Domain("regular tree needs degree k >= 1".into()));
    }
    Ok(PointMassSampler { kind })
}

impl PointMassSampler {
    fn degree(&self) -> usize {
        match self.kind {
            PointMass::SingleVertex => 0,
            PointMass::Line => 2,
            PointMass::Regular(k) => k,
        }
    }
}

impl RootedLawSampler for PointMassSampler {
    fn name(&self) -> String {
        match self.kind {
            PointMass::SingleVertex => "single_vertex".into(),
            PointMass::Line => "line".into(),
            PointMass::Regular(k) => format!("regular:{k}"),
        }
    }

    fn sample(&self, radius: u32, _rng: &mut SimRng) -> Result<RootedNetwork> {
        let d = self.degree();
        if d == 0 {
            return Ok(RootedNetwork::single_vertex(Default::default(), Validity::Finite(radius)));
        }
        Ok(regular_tree_ball(d, radius)?.with_validity(Validity::Finite(radius)))
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.degree())
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        let d = self.degree();
        let mut law = vec![0.0; d + 1];
        law[d] = 1.0;
        Some(law)
    }
}

/// The one-ended path rooted at its endpoint. Not unimodular: the root sends
/// mass it never receives. Used as a negative control.
#[derive(Clone, Copy, Debug, Default)]
pub struct RayFromEndpoint;

impl RootedLawSampler for RayFromEndpoint {
    fn name(&self) -> String {
        "ray_from_endpoint".into()
    }

    fn sample(&self, radius: u32, _rng: &mut SimRng) -> Result<RootedNetwork> {
        let mut b = NetworkBuilder::with_capacity(radius as usize + 1);
        b.add_vertices(radius as usize + 1);
        for i in 1..=radius as usize {
            b.add_edge(i - 1, i)?;
        }
        b.build(0, Validity::Finite(radius))
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(2)
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        Some(vec![0.0, 1.0])
    }
}

/// Full radius-`n` ball of the `d`-regular tree, rooted at its center.
pub fn regular_tree_ball(d: usize, n: u32) -> Result<RootedNetwork> {
    if d == 0 {
        return Err(UrtError::Domain("regular tree needs degree d >= 1".into()));
    }
    let mut b = NetworkBuilder::new();
    let root = b.add_vertex(Default::default());
    let mut layer = vec![root];
    for depth in 0..n {
        let mut next = Vec::with_capacity(layer.len() * (d - 1).max(1));
        let kids = if depth == 0 { d } else { d - 1 };
        for &v in &layer {
            for _ in 0..kids {
                let w = b.add_vertex(Default::default());
                b.add_edge(v, w)?;
                next.push(w);
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    b.build(root, Validity::Unbounded)
}

/// Boundary graph of the `n`-th stage Sierpinski gasket (`n = 0` is a
/// triangle), rooted at a corner. Each stage glues three copies of the previous
/// one at their corners.
pub fn sierpinski_graph(n: u32) -> Result<RootedNetwork> {
    if n > 15 {
        return Err(UrtError::Domain(format!("gasket level {n} is too large")));
    }
    // edges as pairs of lattice points, (i, j) in axial coordinates
    let mut edges: Vec<((i64, i64), (i64, i64))> = vec![((0, 0), (1, 0)), ((1, 0), (0, 1)), ((0, 1), (0, 0))];
    for level in 1..=n {
        let s = 1i64 << (level - 1);
        let mut next = Vec::with_capacity(edges.len() * 3);
        for (ox, oy) in [(0, 0), (s, 0), (0, s)] {
            next.extend(edges.iter().map(|&((a, b), (c, d))| ((a + ox, b + oy), (c + ox, d + oy))));
        }
        edges = next;
    }
    let mut ids: HashMap<(i64, i64), usize> = HashMap::new();
    let mut b = NetworkBuilder::new();
    let mut id =
        |p: (i64, i64), b: &mut NetworkBuilder| *ids.entry(p).or_insert_with(|| b.add_vertex(Default::default()));
    let root = id((0, 0), &mut b);
    for (p, q) in edges {
        let (u, v) = (id(p, &mut b), id(q, &mut b));
        b.add_edge(u, v)?;
    }
    b.build(root, Validity::Unbounded)
}

/// `K_{1,n}` rooted at the hub.
pub fn star_graph(n: usize) -> Result<RootedNetwork> {
    if n == 0 {
        return Err(UrtError::Domain("star needs n >= 1 leaves".into()));
    }
    let mut b = NetworkBuilder::with_capacity(n + 1);
    let hub = b.add_vertex(Default::default());
    for _ in 0..n {
        let leaf = b.add_vertex(Default::default());
        b.add_edge(hub, leaf)?;
    }
    b.build(hub, Validity::Unbounded)
}

/// Universal cover, rooted at a lift of 0, of the multigraph on the integers
/// where `k` and `k + 1` are joined by `N_k` parallel edges, `N_k` IID from the
/// offspring law.
#[derive(Clone, Debug)]
pub struct ChainCoverSampler {
    law: OffspringLaw,
}

pub fn chain_cover_sampler(law: OffspringLaw) -> Result<ChainCoverSampler> {
    if law.probs()[0] > 0.0 {
        return Err(UrtError::Domain("chain multiplicities must be >= 1 so the base is connected".into()));
    }
    Ok(ChainCoverSampler { law })
}

impl ChainCoverSampler {
    pub fn law(&self) -> &OffspringLaw {
        &self.law
    }
}

impl RootedLawSampler for ChainCoverSampler {
    fn name(&self) -> String {
        let w: Vec<String> = self.law.probs()[1..].iter().map(|p| format!("{p}")).collect();
        format!("chain_cover:{}", w.join(","))
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        let r = i64::from(radius);
        // multiplicity of the base edge {j, j+1}, j in [-r, r-1]
        let mult: Vec<usize> = (0..2 * r).map(|_| self.law.sample(rng)).collect();
        let m = |j: i64| mult[(j + r) as usize];

        let mut b = NetworkBuilder::new();
        let root = b.add_vertex(Default::default());
        // (cover vertex, base vertex, edge copy used to arrive, distance)
        let mut queue = std::collections::VecDeque::from([(root, 0i64, None::<(i64, usize)>, 0u32)]);
        while let Some((v, k, came, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for (j, target) in [(k - 1, k - 1), (k, k + 1)] {
                for copy in 0..m(j) {
                    if came == Some((j, copy)) {
                        continue;
                    }
                    let w = b.add_vertex(Default::default());
                    b.add_edge(v, w)?;
                    queue.push_back((w, target, Some((j, copy)), d + 1));
                }
            }
        }
        b.build(root, Validity::Finite(radius))
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(2 * self.law.max_value())
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        let p = self.law.probs();
        let mut law = vec![0.0; 2 * p.len() - 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                law[i + j] += a * b;
            }
        }
        Some(law)
    }
}

/// Uniformly rooted finite network, `U(G)`.
#[derive(Clone, Debug)]
pub struct UniformRootSampler {
    graph: Arc<RootedNetwork>,
    name: String,
}

impl UniformRootSampler {
    pub fn new(graph: RootedNetwork, name: impl Into<String>) -> Self {
        UniformRootSampler { graph: Arc::new(graph), name: name.into() }
    }

    pub fn graph(&self) -> &RootedNetwork {
        &self.graph
    }
}

impl RootedLawSampler for UniformRootSampler {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        let v = rng.random_range(0..self.graph.vertex_count());
        ball(&self.graph, v, radius)
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.graph.max_degree())
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        let n = self.graph.vertex_count() as f64;
        let mut law = vec![0.0; self.graph.max_degree() + 1];
        for v in 0..self.graph.vertex_count() {
            law[self.graph.degree(v)] += 1.0 / n;
        }
        Some(law)
    }
}
