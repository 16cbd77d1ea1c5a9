//! Embedding a bounded-degree unimodular tree as the open cluster of an
//! invariant labeled percolation on the `d`-regular tree.
//!
//! Starting from `mu`, every vertex of degree `k < d` receives `d - k` closed
//! edges leading to independent copies of `nu`. A `nu` sample is a tree drawn
//! from the degree-biased law `mu'` (density `(d - deg o) / alpha`) whose root
//! gets one closed edge fewer, the missing edge being the one it hangs from.
//! `nu` solves its own fixed-point equation, so it is sampled by expanding
//! copies recursively out to the requested radius.
//!
//! Edge endpoint marks carry the color in `values[0]` (`1.0` open, `0.0`
//! closed) and, after [`direction_marks`], a direction label in `values[1]` of
//! closed edges.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Result, UrtError};
use crate::generators::regular_tree_ball;
use crate::network::{ball, Mark, NetworkBuilder, RootedNetwork, Validity, COLOR_CHANNEL};
use crate::rng::{par_draws, SeedStream, SimRng};
use crate::sampler::{RootedLawSampler, SharedSampler};

pub const OPEN: f64 = 1.0;
pub const CLOSED: f64 = 0.0;

/// Index of the direction label in closed-edge endpoint marks.
pub const DIRECTION_CHANNEL: usize = 1;

/// Proposals a rejection sampler may spend on one accepted draw.
pub const MAX_PROPOSALS: usize = 1_000_000;

fn closed_mark() -> Mark {
    Mark::new(0, &[CLOSED]).expect("valid")
}

fn open_mark(orig: &Mark) -> Result<Mark> {
    let mut values = vec![OPEN];
    values.extend_from_slice(orig.values());
    Mark::new(orig.tag(), &values)
}

/// Color of an endpoint mark, if it carries one.
pub fn color_of(m: &Mark) -> Option<f64> {
    m.values().get(COLOR_CHANNEL).copied().filter(|c| *c == OPEN || *c == CLOSED)
}

pub fn is_open(m: &Mark) -> bool {
    color_of(m) == Some(OPEN)
}

/// Root-degree probabilities `p_k` (k <= d) and `alpha = sum_k p_k (d - k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeProfile {
    pub d: usize,
    pub p: Vec<f64>,
    pub alpha: f64,
    /// `true` when `p` comes from the sampler's closed-form law.
    pub exact: bool,
    pub samples: usize,
}

impl DegreeProfile {
    fn from_law(d: usize, law: &[f64], exact: bool, samples: usize) -> Result<Self> {
        if let Some(k) = law.iter().rposition(|&p| p > 0.0) {
            if k > d {
                return Err(UrtError::ContractViolation(format!("root degree {k} exceeds d = {d}")));
            }
        }
        let mut p = vec![0.0; d + 1];
        for (k, &x) in law.iter().enumerate().take(d + 1) {
            p[k] = x;
        }
        let alpha = p.iter().enumerate().map(|(k, x)| x * (d - k) as f64).sum();
        Ok(DegreeProfile { d, p, alpha, exact, samples })
    }
}

pub fn degree_profile(mu: &dyn RootedLawSampler, d: usize, n: usize, stream: SeedStream) -> Result<DegreeProfile> {
    if let Some(law) = mu.root_degree_law() {
        return DegreeProfile::from_law(d, &law, true, 0);
    }
    if n == 0 {
        return Err(UrtError::Domain("degree profile needs at least one sample".into()));
    }
    let degrees = par_draws(n, stream, |rng, _| {
        let g = mu.sample(1, rng)?;
        let k = g.degree(g.root());
        if k > d {
            return Err(UrtError::ContractViolation(format!("sampled root degree {k} exceeds d = {d}")));
        }
        Ok(k)
    })?;
    let mut law = vec![0.0; d + 1];
    for k in degrees {
        law[k] += 1.0 / n as f64;
    }
    DegreeProfile::from_law(d, &law, false, n)
}

/// `mu'`: `mu` reweighted by `(d - deg o) / alpha`, realised by rejection with
/// acceptance probability `(d - deg o) / d`.
#[derive(Clone)]
pub struct BiasedSampler {
    mu: SharedSampler,
    d: usize,
    alpha: Option<f64>,
}

pub fn biased_sampler(mu: SharedSampler, d: usize) -> Result<BiasedSampler> {
    if d == 0 {
        return Err(UrtError::Domain("d must be positive".into()));
    }
    let alpha = match mu.root_degree_law() {
        Some(law) => Some(DegreeProfile::from_law(d, &law, true, 0)?.alpha),
        None => None,
    };
    if alpha == Some(0.0) {
        return Err(UrtError::Degenerate(format!("alpha = 0: {} is concentrated on {d}-regular roots", mu.name())));
    }
    Ok(BiasedSampler { mu, d, alpha })
}

impl BiasedSampler {
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }
}

impl RootedLawSampler for BiasedSampler {
    fn name(&self) -> String {
        format!("biased({},{})", self.mu.name(), self.d)
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        for _ in 0..MAX_PROPOSALS {
            let g = self.mu.sample(radius.max(1), rng)?;
            let k = g.degree(g.root());
            if k > self.d {
                return Err(UrtError::ContractViolation(format!("root degree {k} exceeds d = {}", self.d)));
            }
            if rng.random_range(0..self.d) < self.d - k {
                return if radius == 0 { ball(&g, g.root(), 0) } else { Ok(g) };
            }
        }
        Err(UrtError::Retry(format!("{}: no proposal accepted in {MAX_PROPOSALS} tries", self.name())))
    }

    fn degree_bound(&self) -> Option<usize> {
        self.mu.degree_bound()
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        let alpha = self.alpha?;
        let law = self.mu.root_degree_law()?;
        Some(law.iter().enumerate().map(|(k, p)| p * (self.d - k) as f64 / alpha).collect())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CopyKind {
    Mu,
    Nu,
}

struct Task {
    attach: Option<usize>,
    depth: u32,
    kind: CopyKind,
}

/// Grows a labeled tree out to `radius` with an explicit work stack.
fn grow(
    mu: &dyn RootedLawSampler,
    biased: Option<&BiasedSampler>,
    d: usize,
    radius: u32,
    top: CopyKind,
    rng: &mut SimRng,
) -> Result<RootedNetwork> {
    let mut b = NetworkBuilder::new();
    let mut root = None;
    let mut stack = vec![Task { attach: None, depth: 0, kind: top }];
    while let Some(task) = stack.pop() {
        let rem = radius - task.depth;
        let copy = match task.kind {
            CopyKind::Mu => mu.sample(rem, rng)?,
            CopyKind::Nu => biased
                .ok_or_else(|| UrtError::Degenerate("closed edges requested but alpha = 0".into()))?
                .sample(rem, rng)?,
        };
        let dist = copy.distances_from(copy.root(), Some(rem));
        let mut global = vec![usize::MAX; copy.vertex_count()];
        for v in 0..copy.vertex_count() {
            if dist[v].is_some() {
                global[v] = b.add_vertex(copy.vertex_mark(v).clone());
            }
        }
        let top_vertex = global[copy.root()];
        match task.attach {
            Some(parent) => {
                b.add_marked_edge(parent, top_vertex, closed_mark(), closed_mark())?;
            }
            None => root = Some(top_vertex),
        }
        for e in copy.edges() {
            let [x, y] = e.ends;
            if dist[x].is_some() && dist[y].is_some() {
                b.add_marked_edge(global[x], global[y], open_mark(&e.marks[0])?, open_mark(&e.marks[1])?)?;
            }
        }
        for x in 0..copy.vertex_count() {
            let Some(dx) = dist[x] else { continue };
            if dx >= rem {
                continue;
            }
            let k = copy.degree(x);
            let slots = if x == copy.root() && task.kind == CopyKind::Nu { d - 1 } else { d };
            if k > slots {
                return Err(UrtError::ContractViolation(format!(
                    "vertex degree {k} exceeds the {slots} available slots"
                )));
            }
            for _ in 0..slots - k {
                stack.push(Task { attach: Some(global[x]), depth: task.depth + dx + 1, kind: CopyKind::Nu });
            }
        }
    }
    b.build(root.expect("top copy"), Validity::Finite(radius))
}

/// `nu`, the law with `nu = Q(mu', nu)`.
#[derive(Clone)]
pub struct NuSampler {
    mu: SharedSampler,
    biased: BiasedSampler,
    d: usize,
}

impl NuSampler {
    pub fn new(mu: SharedSampler, d: usize) -> Result<Self> {
        let biased = biased_sampler(mu.clone(), d)?;
        Ok(NuSampler { mu, biased, d })
    }
}

impl RootedLawSampler for NuSampler {
    fn name(&self) -> String {
        format!("nu({},{})", self.mu.name(), self.d)
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        grow(&self.biased, Some(&self.biased), self.d, radius, CopyKind::Nu, rng)
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.d)
    }
}

pub fn nu_sample(mu: SharedSampler, d: usize, r: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
    NuSampler::new(mu, d)?.sample(r, rng)
}

/// `rho`: `mu` with open edges, saturated to degree `d` by closed edges to
/// independent `nu` samples.
#[derive(Clone)]
pub struct RhoSampler {
    mu: SharedSampler,
    d: usize,
    biased: Option<BiasedSampler>,
}

pub fn rho_sampler(mu: SharedSampler, d: usize) -> Result<RhoSampler> {
    if d == 0 {
        return Err(UrtError::Domain("d must be positive".into()));
    }
    if let Some(bound) = mu.degree_bound() {
        if bound > d {
            return Err(UrtError::ContractViolation(format!("{} declares degree bound {bound} > d = {d}", mu.name())));
        }
    }
    let biased = match biased_sampler(mu.clone(), d) {
        Ok(s) => Some(s),
        Err(UrtError::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(RhoSampler { mu, d, biased })
}

impl RhoSampler {
    pub fn d(&self) -> usize {
        self.d
    }

    /// `true` when `alpha = 0` and samples are all-open regular balls.
    pub fn is_all_open(&self) -> bool {
        self.biased.is_none()
    }
}

impl RootedLawSampler for RhoSampler {
    fn name(&self) -> String {
        format!("rho({},{})", self.mu.name(), self.d)
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        match &self.biased {
            Some(b) => grow(&*self.mu, Some(b), self.d, radius, CopyKind::Mu, rng),
            None => {
                let g = regular_tree_ball(self.d, radius)?;
                let (marks, mut edges, root, _) = g.into_parts();
                for e in &mut edges {
                    e.marks = [open_mark(&e.marks[0])?, open_mark(&e.marks[1])?];
                }
                RootedNetwork::from_parts(marks, edges, root, Validity::Finite(radius))
            }
        }
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.d)
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        let mut law = vec![0.0; self.d + 1];
        law[self.d] = 1.0;
        Some(law)
    }
}

/// `rho'`: `rho` with uniform direction labels on closed edges.
#[derive(Clone)]
pub struct RhoPrimeSampler {
    rho: RhoSampler,
}

impl RhoPrimeSampler {
    pub fn new(rho: RhoSampler) -> Self {
        RhoPrimeSampler { rho }
    }
}

impl RootedLawSampler for RhoPrimeSampler {
    fn name(&self) -> String {
        format!("rho_prime({},{})", self.rho.mu.name(), self.rho.d)
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        // labels at the boundary need the closed degree one step further out
        let g = PercolationBall::new_unchecked(self.rho.sample(radius + 1, rng)?, self.rho.d);
        let marked = direction_marks(&g, rng);
        ball(marked.network(), marked.network().root(), radius)
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.rho.d)
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        self.rho.root_degree_law()
    }
}

/// A ball of the `d`-regular tree with open/closed edge colors.
#[derive(Clone, Debug)]
pub struct PercolationBall {
    net: RootedNetwork,
    d: usize,
}

impl PercolationBall {
    /// Checks colors on every endpoint mark and degree `d` at interior vertices.
    pub fn new(net: RootedNetwork, d: usize) -> Result<Self> {
        for e in net.edges() {
            let (a, b) = (color_of(&e.marks[0]), color_of(&e.marks[1]));
            if a.is_none() || a != b {
                return Err(UrtError::Mark(format!("edge {:?} lacks a consistent color", e.ends)));
            }
        }
        if let Validity::Finite(r) = net.validity() {
            let dist = net.distances_from(net.root(), None);
            for v in 0..net.vertex_count() {
                if dist[v].is_some_and(|x| x < r) && net.degree(v) != d {
                    return Err(UrtError::Domain(format!("interior vertex {v} has degree {} != {d}", net.degree(v))));
                }
            }
        }
        Ok(PercolationBall { net, d })
    }

    pub(crate) fn new_unchecked(net: RootedNetwork, d: usize) -> Self {
        PercolationBall { net, d }
    }

    pub fn network(&self) -> &RootedNetwork {
        &self.net
    }

    pub fn into_network(self) -> RootedNetwork {
        self.net
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// At every vertex whose neighbourhood is complete, labels its `k` closed
/// edges (in the outgoing direction) by a uniform permutation of `1..=k`.
pub fn direction_marks(ball: &PercolationBall, rng: &mut SimRng) -> PercolationBall {
    let mut net = ball.net.clone();
    let limit = match net.validity() {
        Validity::Finite(r) => Some(r),
        Validity::Unbounded => None,
    };
    let dist = net.distances_from(net.root(), None);
    for v in 0..net.vertex_count() {
        if limit.is_some_and(|r| dist[v].is_none_or(|x| x >= r)) {
            continue;
        }
        let closed: Vec<usize> = net
            .incident(v)
            .iter()
            .map(|&e| e as usize)
            .filter(|&e| color_of(net.edge(e).mark_at(v)) == Some(CLOSED))
            .collect();
        let mut labels: Vec<usize> = (1..=closed.len()).collect();
        labels.shuffle(rng);
        let edges = net.edges_mut();
        for (e, label) in closed.into_iter().zip(labels) {
            *edges[e].mark_at_mut(v) = Mark::new(0, &[CLOSED, label as f64]).expect("valid");
        }
    }
    PercolationBall { net, d: ball.d }
}

/// Deletes closed edges and returns the root's open cluster without colors.
pub fn strip_closed(ball: &PercolationBall) -> RootedNetwork {
    let g = &ball.net;
    let n = g.vertex_count();
    let mut local = vec![usize::MAX; n];
    let mut order = vec![g.root()];
    local[g.root()] = 0;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for (e, w) in g.neighbors(u) {
            if is_open(g.edge(e).mark_at(u)) && local[w] == usize::MAX {
                local[w] = order.len();
                order.push(w);
            }
        }
    }
    let mut b = NetworkBuilder::with_capacity(order.len());
    for &v in &order {
        b.add_vertex(g.vertex_mark(v).clone());
    }
    for e in g.edges() {
        let [x, y] = e.ends;
        if is_open(&e.marks[0]) && local[x] != usize::MAX && local[y] != usize::MAX {
            b.add_marked_edge(local[x], local[y], e.marks[0].without_prefix(1), e.marks[1].without_prefix(1))
                .expect("valid edge");
        }
    }
    b.build(0, g.validity()).expect("open cluster is connected")
}

/// Deletes every edge incident to a vertex of degree `> d` and returns the
/// root's component. Degrees of boundary vertices are unknown, so a finite
/// validity drops by one.
pub fn truncate_degree(net: &RootedNetwork, d: usize) -> Result<RootedNetwork> {
    let n = net.vertex_count();
    let keep_edge = |e: usize| {
        let [x, y] = net.edge(e).ends;
        net.degree(x) <= d && net.degree(y) <= d
    };
    let mut local = vec![usize::MAX; n];
    let mut order = vec![net.root()];
    local[net.root()] = 0;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for (e, w) in net.neighbors(u) {
            if keep_edge(e) && local[w] == usize::MAX {
                local[w] = order.len();
                order.push(w);
            }
        }
    }
    let mut b = NetworkBuilder::with_capacity(order.len());
    for &v in &order {
        b.add_vertex(net.vertex_mark(v).clone());
    }
    for (i, e) in net.edges().iter().enumerate() {
        let [x, y] = e.ends;
        if keep_edge(i) && local[x] != usize::MAX {
            b.add_marked_edge(local[x], local[y], e.marks[0].clone(), e.marks[1].clone())?;
        }
    }
    b.build(0, net.validity().saturating_sub(1))
}

/// Replaces every vertex mark by `phi(net, v)`. `phi` must depend only on the
/// rooted isomorphism class of `(net, v)` within `phi_radius`; the validity
/// drops by `phi_radius`.
pub fn map_marks<F>(net: &RootedNetwork, phi_radius: u32, phi: F) -> Result<RootedNetwork>
where
    F: Fn(&RootedNetwork, usize) -> Result<Mark>,
{
    let marks = (0..net.vertex_count()).map(|v| phi(net, v)).collect::<Result<Vec<_>>>()?;
    let mut out = net.clone().with_validity(net.validity().saturating_sub(phi_radius));
    out.set_vertex_marks(marks);
    Ok(out)
}

/// Law of IID vertex marks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MarkLaw {
    Uniform { lo: f64, hi: f64 },
}

impl MarkLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MarkLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

/// Appends an IID coordinate to every vertex mark.
pub fn add_iid_marks(net: &RootedNetwork, law: MarkLaw, rng: &mut SimRng) -> Result<RootedNetwork> {
    let marks = net
        .vertex_marks()
        .iter()
        .map(|m| {
            let mut m = m.clone();
            m.push(law.sample(rng))?;
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = net.clone();
    out.set_vertex_marks(marks);
    Ok(out)
}

/// Wraps a sampler with IID vertex marks.
#[derive(Clone)]
pub struct IidMarkedSampler {
    inner: SharedSampler,
    law: MarkLaw,
}

impl IidMarkedSampler {
    pub fn new(inner: SharedSampler, law: MarkLaw) -> Self {
        IidMarkedSampler { inner, law }
    }
}

impl RootedLawSampler for IidMarkedSampler {
    fn name(&self) -> String {
        format!("iid_marked({})", self.inner.name())
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        let g = self.inner.sample(radius, rng)?;
        add_iid_marks(&g, self.law, rng)
    }

    fn degree_bound(&self) -> Option<usize> {
        self.inner.degree_bound()
    }

    fn root_degree_law(&self) -> Option<Vec<f64>> {
        self.inner.root_degree_law()
    }
}

/// `mu` pushed through [`truncate_degree`].
#[derive(Clone)]
pub struct TruncatedSampler {
    inner: SharedSampler,
    d: usize,
}

impl TruncatedSampler {
    pub fn new(inner: SharedSampler, d: usize) -> Self {
        TruncatedSampler { inner, d }
    }
}

impl RootedLawSampler for TruncatedSampler {
    fn name(&self) -> String {
        format!("truncated({},{})", self.inner.name(), self.d)
    }

    fn sample(&self, radius: u32, rng: &mut SimRng) -> Result<RootedNetwork> {
        truncate_degree(&self.inner.sample(radius + 1, rng)?, self.d)
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.d)
    }
}

pub fn shared<S: RootedLawSampler + 'static>(s: S) -> SharedSampler {
    Arc::new(s)
}
