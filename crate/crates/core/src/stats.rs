//! Empirical ball statistics, total variation distance, mass-transport and
//! involution tests, and tightness diagnostics.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::canon::{canonical_code, canonical_code_pair, push_mark, CanonicalCode};
use crate::embed::truncate_degree;
use crate::error::{Result, UrtError};
use crate::network::RootedNetwork;
use crate::rng::{par_draws, SeedStream, SimRng};
use crate::sampler::RootedLawSampler;

/// Law of depth-`r` ball classes, stored as weights per canonical code.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalRootedDist {
    depth: u32,
    quantization: f64,
    weights: BTreeMap<CanonicalCode, f64>,
    n: usize,
    total: f64,
}

impl EmpiricalRootedDist {
    pub fn new(depth: u32, quantization: f64) -> Self {
        EmpiricalRootedDist { depth, quantization, weights: BTreeMap::new(), n: 0, total: 0.0 }
    }

    /// Builds a distribution from `(code, weight)` pairs; the codes must all
    /// carry `depth` and `quantization`.
    pub fn from_weighted<I>(depth: u32, quantization: f64, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CanonicalCode, f64)>,
    {
        let mut d = EmpiricalRootedDist::new(depth, quantization);
        for (c, w) in items {
            d.add(c, w)?;
        }
        Ok(d)
    }

    pub fn add(&mut self, code: CanonicalCode, weight: f64) -> Result<()> {
        if code.depth() != self.depth || code.quantization().to_bits() != self.quantization.to_bits() {
            return Err(UrtError::Domain(format!(
                "code at depth {} / quantization {} added to a depth {} / {} distribution",
                code.depth(),
                code.quantization(),
                self.depth,
                self.quantization
            )));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(UrtError::Domain(format!("weight {weight} must be finite and >= 0")));
        }
        *self.weights.entry(code).or_insert(0.0) += weight;
        self.n += 1;
        self.total += weight;
        Ok(())
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn quantization(&self) -> f64 {
        self.quantization
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn class_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, code: &CanonicalCode) -> f64 {
        self.weights.get(code).copied().unwrap_or(0.0)
    }

    pub fn frequency(&self, code: &CanonicalCode) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.weight(code) / self.total
        }
    }

    /// `(code, frequency)` in code order.
    pub fn frequencies(&self) -> impl Iterator<Item = (&CanonicalCode, f64)> + '_ {
        self.weights.iter().map(move |(c, w)| (c, w / self.total))
    }
}

fn check_compatible(a: &EmpiricalRootedDist, b: &EmpiricalRootedDist) -> Result<()> {
    if a.depth != b.depth || a.quantization.to_bits() != b.quantization.to_bits() {
        return Err(UrtError::Domain(format!(
            "distributions differ in depth/quantization: {}/{} vs {}/{}",
            a.depth, a.quantization, b.depth, b.quantization
        )));
    }
    if a.total == 0.0 || b.total == 0.0 {
        return Err(UrtError::Domain("empty distribution".into()));
    }
    Ok(())
}

pub fn tv_distance(a: &EmpiricalRootedDist, b: &EmpiricalRootedDist) -> Result<f64> {
    check_compatible(a, b)?;
    let mut s = 0.0;
    for (c, fa) in a.frequencies() {
        s += (fa - b.frequency(c)).abs();
    }
    for (c, fb) in b.frequencies() {
        if !a.weights.contains_key(c) {
            s += fb;
        }
    }
    Ok((0.5 * s).clamp(0.0, 1.0))
}

/// Standard error scale of the TV between two independent empirical laws:
/// `1/2 sum_c sqrt(p_c (1 - p_c) (1/N1 + 1/N2))` with `p_c` the pooled frequency.
pub fn tv_standard_error(a: &EmpiricalRootedDist, b: &EmpiricalRootedDist) -> Result<f64> {
    check_compatible(a, b)?;
    let (n1, n2) = (a.n as f64, b.n as f64);
    let mut pooled: BTreeMap<&CanonicalCode, f64> = BTreeMap::new();
    for (c, f) in a.frequencies() {
        *pooled.entry(c).or_insert(0.0) += f * n1;
    }
    for (c, f) in b.frequencies() {
        *pooled.entry(c).or_insert(0.0) += f * n2;
    }
    let scale = 1.0 / n1 + 1.0 / n2;
    Ok(0.5
        * pooled
            .values()
            .map(|m| {
                let p = m / (n1 + n2);
                (p * (1.0 - p) * scale).sqrt()
            })
            .sum::<f64>())
}

/// Per-class comparison row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassDiagnostic {
    pub code: String,
    pub freq_a: f64,
    pub freq_b: f64,
}

/// All classes of `a` and `b`, largest `|freq_a - freq_b|` first.
pub fn class_table(a: &EmpiricalRootedDist, b: &EmpiricalRootedDist) -> Vec<ClassDiagnostic> {
    let mut codes: Vec<&CanonicalCode> = a.weights.keys().chain(b.weights.keys()).collect();
    codes.sort();
    codes.dedup();
    let mut rows: Vec<ClassDiagnostic> = codes
        .into_iter()
        .map(|c| ClassDiagnostic { code: c.to_hex(), freq_a: a.frequency(c), freq_b: b.frequency(c) })
        .collect();
    rows.sort_by(|x, y| {
        (y.freq_a - y.freq_b).abs().total_cmp(&(x.freq_a - x.freq_b).abs()).then_with(|| x.code.cmp(&y.code))
    });
    rows
}

pub fn class_table_csv(rows: &[ClassDiagnostic]) -> String {
    let mut s = String::from("code,freq_a,freq_b\n");
    for r in rows {
        let _ = writeln!(s, "{},{:?},{:?}", r.code, r.freq_a, r.freq_b);
    }
    s
}

/// Where ball statistics come from.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    /// Independent draws from a rooted law.
    Sampler(&'a dyn RootedLawSampler),
    /// A finite network with a uniformly chosen root.
    Finite(&'a RootedNetwork),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Draws {
    Sample(usize),
    /// Every vertex of a finite network once; an error for samplers.
    Exhaustive,
}

/// Ball statistics of a sampler whose draws are taken at `radius >= depth`.
pub fn sampler_distribution(
    s: &dyn RootedLawSampler,
    radius: u32,
    depth: u32,
    quantization: f64,
    n: usize,
    stream: SeedStream,
) -> Result<EmpiricalRootedDist> {
    if radius < depth {
        return Err(UrtError::Domain(format!("sample radius {radius} is below depth {depth}")));
    }
    if n == 0 {
        return Err(UrtError::Domain("sample count must be positive".into()));
    }
    let codes = par_draws(n, stream, |rng, _| canonical_code(&s.sample(radius, rng)?, depth, quantization))?;
    EmpiricalRootedDist::from_weighted(depth, quantization, codes.into_iter().map(|c| (c, 1.0)))
}

pub fn empirical_distribution(
    source: Source<'_>,
    depth: u32,
    quantization: f64,
    draws: Draws,
    stream: SeedStream,
) -> Result<EmpiricalRootedDist> {
    match (source, draws) {
        (Source::Sampler(s), Draws::Sample(n)) => sampler_distribution(s, depth, depth, quantization, n, stream),
        (Source::Sampler(_), Draws::Exhaustive) => {
            Err(UrtError::Domain("exhaustive enumeration needs a finite network".into()))
        }
        (Source::Finite(g), draws) => {
            let nv = g.vertex_count();
            let code_at = |v: usize| canonical_code(&g.rerooted(v)?, depth, quantization);
            let n = match draws {
                Draws::Sample(0) => return Err(UrtError::Domain("sample count must be positive".into())),
                Draws::Sample(n) => n,
                Draws::Exhaustive => nv,
            };
            let codes: Vec<CanonicalCode> = if draws == Draws::Exhaustive {
                par_draws(nv, stream, |_, v| code_at(v))?
            } else if nv <= n {
                let all = par_draws(nv, stream.child("classes"), |_, v| code_at(v))?;
                let mut rng = stream.rng(0);
                (0..n).map(|_| all[rng.random_range(0..nv)].clone()).collect()
            } else {
                par_draws(n, stream, |rng, _| code_at(rng.random_range(0..nv)))?
            };
            EmpiricalRootedDist::from_weighted(depth, quantization, codes.into_iter().map(|c| (c, 1.0)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

fn ser_real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn ser_reals<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    struct R(f64);
    impl Serialize for R {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            ser_real(&self.0, s)
        }
    }
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &R(*v))?;
    }
    map.end()
}

/// Outcome of a statistical check. `verdict` is `Pass` iff
/// `statistic <= threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub test: String,
    #[serde(serialize_with = "ser_real")]
    pub statistic: f64,
    #[serde(serialize_with = "ser_real")]
    pub threshold: f64,
    pub verdict: Verdict,
    pub n: usize,
    /// Key of the randomness stream the test consumed.
    pub stream_key: u64,
    pub diagnostics: Vec<ClassDiagnostic>,
    #[serde(serialize_with = "ser_reals")]
    pub extras: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl TestReport {
    pub fn new(test: impl Into<String>, statistic: f64, threshold: f64, n: usize, stream: SeedStream) -> Self {
        let verdict = if statistic <= threshold { Verdict::Pass } else { Verdict::Fail };
        TestReport {
            test: test.into(),
            statistic,
            threshold,
            verdict,
            n,
            stream_key: stream.key(),
            diagnostics: Vec::new(),
            extras: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }
}

/// Number of classes kept in report diagnostics.
pub const MAX_DIAGNOSTICS: usize = 20;

/// A bounded mass function on adjacent pairs `(G, u, v)` that depends only on
/// the depth-`depth` ball around `u` with `v` distinguished.
pub trait MassFunction: Sync {
    fn name(&self) -> String;
    fn depth(&self) -> u32;
    fn bound(&self) -> f64;
    fn eval(&self, g: &RootedNetwork, u: usize, v: usize) -> f64;
}

/// `f = c` on adjacent pairs.
pub struct ConstantMass(pub f64);

impl MassFunction for ConstantMass {
    fn name(&self) -> String {
        format!("constant({})", self.0)
    }
    fn depth(&self) -> u32 {
        0
    }
    fn bound(&self) -> f64 {
        self.0.abs()
    }
    fn eval(&self, _: &RootedNetwork, _: usize, _: usize) -> f64 {
        self.0
    }
}

/// `f(G, u, v) = 1{deg u = k}`.
pub struct DegreeIndicator(pub usize);

impl MassFunction for DegreeIndicator {
    fn name(&self) -> String {
        format!("deg_eq({})", self.0)
    }
    fn depth(&self) -> u32 {
        1
    }
    fn bound(&self) -> f64 {
        1.0
    }
    fn eval(&self, g: &RootedNetwork, u: usize, _: usize) -> f64 {
        f64::from(u8::from(g.degree(u) == self.0))
    }
}

/// Two-sided z-threshold at level 1%.
pub const MTP_Z_THRESHOLD: f64 = 2.576;

/// Compares `E sum_{x~o} f(o,x)` with `E sum_{x~o} f(x,o)`. The statistic is
/// `|mean D| / (sd(D)/sqrt N)` for `D = sum_{x~o} (f(o,x) - f(x,o))`.
pub fn mtp_test(
    mu: &dyn RootedLawSampler,
    f: &dyn MassFunction,
    n: usize,
    threshold: f64,
    stream: SeedStream,
) -> Result<TestReport> {
    if n < 2 {
        return Err(UrtError::Domain("mtp_test needs at least two samples".into()));
    }
    let radius = f.depth() + 1;
    let bound = f.bound();
    let rows = par_draws(n, stream, |rng, _| {
        let g = mu.sample(radius, rng)?;
        let o = g.root();
        let (mut sent, mut received) = (0.0, 0.0);
        for (_, x) in g.neighbors(o) {
            let (a, b) = (f.eval(&g, o, x), f.eval(&g, x, o));
            if !(a.abs() <= bound && b.abs() <= bound) {
                return Err(UrtError::ContractViolation(format!("{} exceeded its declared bound {bound}", f.name())));
            }
            sent += a;
            received += b;
        }
        Ok((sent, received))
    })?;
    let nf = n as f64;
    let sent = rows.iter().map(|r| r.0).sum::<f64>() / nf;
    let received = rows.iter().map(|r| r.1).sum::<f64>() / nf;
    let mean = sent - received;
    let var = rows.iter().map(|r| (r.0 - r.1 - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let se = (var / nf).sqrt();
    let z = if se > 0.0 {
        mean.abs() / se
    } else if mean == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(TestReport::new(format!("mtp:{}", f.name()), z, threshold, n, stream)
        .extra("sent_mean", sent)
        .extra("received_mean", received)
        .extra("difference", mean)
        .extra("standard_error", se))
}

/// Replicates of the swap null used by [`involution_test`].
pub const NULL_REPLICATES: usize = 100;

/// Involution invariance of `mu` at depth `r`.
///
/// Each draw picks `o'` through a uniform edge at the root and records the
/// class `A` of the `r`-ball around `o` with `o'` distinguished (plus the marks
/// of the chosen edge) and the class `B` seen from `o'`. Observations are
/// weighted by `deg o`. The statistic is the TV between the weighted laws of
/// `A` and `B`. Under invariance, given the unordered pair `{A, B}`, the draw
/// is oriented as `(A, B)` with probability `deg o' / (deg o + deg o')` and
/// then weighted by `deg o`. The threshold is the 99th percentile of the
/// statistic over independent re-orientations drawn from that law, so the
/// test has exact level conditional on the unordered pairs.
pub fn involution_test(
    mu: &dyn RootedLawSampler,
    r: u32,
    quantization: f64,
    n: usize,
    stream: SeedStream,
) -> Result<TestReport> {
    if r < 1 {
        return Err(UrtError::Domain("involution test needs depth >= 1".into()));
    }
    if n == 0 {
        return Err(UrtError::Domain("sample count must be positive".into()));
    }
    let obs = par_draws(n, stream.child("draws"), |rng, _| pair_codes(mu, r, quantization, rng))?;
    let isolated = obs.iter().filter(|o| o.is_none()).count();
    let obs: Vec<(CanonicalCode, CanonicalCode, f64, f64)> = obs.into_iter().flatten().collect();
    if obs.is_empty() {
        let mut rep = TestReport::new("involution", 0.0, 0.0, n, stream);
        rep.warnings.push("every sampled root is isolated; the test is vacuous".into());
        return Ok(rep);
    }

    // intern codes
    let mut ids: HashMap<&CanonicalCode, usize> = HashMap::new();
    let mut pairs = Vec::with_capacity(obs.len());
    for (a, b, wa, wb) in &obs {
        let k = ids.len();
        let ia = *ids.entry(a).or_insert(k);
        let k = ids.len();
        let ib = *ids.entry(b).or_insert(k);
        pairs.push((ia, ib, *wa, *wb));
    }
    let mut diff = vec![0.0; ids.len()];
    let mut tv_of = |flip: &mut dyn FnMut(f64, f64) -> bool| {
        diff.iter_mut().for_each(|x| *x = 0.0);
        let mut total = 0.0;
        for &(a, b, wa, wb) in &pairs {
            let (a, b, w) = if flip(wa, wb) { (b, a, wb) } else { (a, b, wa) };
            diff[a] += w;
            diff[b] -= w;
            total += w;
        }
        0.5 * diff.iter().map(|x| x.abs()).sum::<f64>() / total
    };
    let stat = tv_of(&mut |_, _| false);
    let mut rng = stream.child("null").rng(0);
    let mut null: Vec<f64> =
        (0..NULL_REPLICATES).map(|_| tv_of(&mut |wa, wb| rng.random::<f64>() * (wa + wb) < wa)).collect();
    null.sort_by(f64::total_cmp);
    let threshold = null[(NULL_REPLICATES * 99).div_ceil(100) - 1];

    let a = EmpiricalRootedDist::from_weighted(r, quantization, obs.iter().map(|(a, _, w, _)| (a.clone(), *w)))?;
    let b = EmpiricalRootedDist::from_weighted(r, quantization, obs.iter().map(|(_, b, w, _)| (b.clone(), *w)))?;
    let mut rep = TestReport::new("involution", stat, threshold, n, stream)
        .extra("isolated_roots", isolated as f64)
        .extra("null_median", null[NULL_REPLICATES / 2])
        .extra("classes", ids.len() as f64);
    if isolated > 0 {
        rep.warnings.push(format!("{isolated} isolated roots carry zero weight"));
    }
    rep.diagnostics = class_table(&a, &b);
    Ok(rep)
}

fn pair_codes(
    mu: &dyn RootedLawSampler,
    r: u32,
    q: f64,
    rng: &mut SimRng,
) -> Result<Option<(CanonicalCode, CanonicalCode, f64, f64)>> {
    let g = mu.sample(r + 1, rng)?;
    let o = g.root();
    let deg = g.degree(o);
    if deg == 0 {
        return Ok(None);
    }
    let e = g.incident(o)[rng.random_range(0..deg)] as usize;
    let edge = g.edge(e);
    let o2 = edge.other(o);
    let code = |x: usize, y: usize| -> Result<CanonicalCode> {
        let c = canonical_code_pair(&g, x, y, r, q)?;
        let mut bytes = c.as_bytes().to_vec();
        push_mark(&mut bytes, edge.mark_at(x), q);
        push_mark(&mut bytes, edge.mark_at(y), q);
        Ok(CanonicalCode::from_parts(bytes, r, q))
    };
    Ok(Some((code(o, o2)?, code(o2, o)?, deg as f64, g.degree(o2) as f64)))
}

/// TV between depth-`depth` statistics drawn at radius `depth + 1` and at
/// radius `depth`; passes when below three standard errors.
pub fn sampler_consistency(
    s: &dyn RootedLawSampler,
    depth: u32,
    quantization: f64,
    n: usize,
    stream: SeedStream,
) -> Result<TestReport> {
    let wide = sampler_distribution(s, depth + 1, depth, quantization, n, stream.child("wide"))?;
    let tight = sampler_distribution(s, depth, depth, quantization, n, stream.child("tight"))?;
    let tv = tv_distance(&wide, &tight)?;
    let se = tv_standard_error(&wide, &tight)?;
    let mut rep = TestReport::new(format!("consistency:{}", s.name()), tv, 3.0 * se, n, stream)
        .extra("standard_error", se)
        .extra("classes", wide.class_count().max(tight.class_count()) as f64);
    rep.diagnostics = class_table(&wide, &tight).into_iter().take(MAX_DIAGNOSTICS).collect();
    Ok(rep)
}

/// TV between `mu` and its degree truncations at each `d`, on shared draws:
/// every sample of `mu` is truncated at every `d`.
pub fn truncation_profile(
    mu: &dyn RootedLawSampler,
    ds: &[usize],
    depth: u32,
    quantization: f64,
    n: usize,
    stream: SeedStream,
) -> Result<Vec<f64>> {
    let rows = par_draws(n, stream, |rng, _| {
        let g = mu.sample(depth + 1, rng)?;
        let base = canonical_code(&g, depth, quantization)?;
        let cut = ds
            .iter()
            .map(|&d| canonical_code(&truncate_degree(&g, d)?, depth, quantization))
            .collect::<Result<Vec<_>>>()?;
        Ok((base, cut))
    })?;
    let base = EmpiricalRootedDist::from_weighted(depth, quantization, rows.iter().map(|r| (r.0.clone(), 1.0)))?;
    (0..ds.len())
        .map(|i| {
            let t =
                EmpiricalRootedDist::from_weighted(depth, quantization, rows.iter().map(|r| (r.1[i].clone(), 1.0)))?;
            tv_distance(&base, &t)
        })
        .collect()
}

fn check_no_isolated(g: &RootedNetwork) -> Result<()> {
    if g.vertex_count() > 1 || g.edge_count() > 0 {
        if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) == 0) {
            return Err(UrtError::Domain(format!("vertex {v} is isolated")));
        }
        return Ok(());
    }
    Err(UrtError::Domain("a single isolated vertex has no degree-biased law".into()))
}

/// `D(G)`: vertex `x` weighted by `deg x / sum deg`.
pub fn degree_biased(g: &RootedNetwork) -> Result<Vec<f64>> {
    check_no_isolated(g)?;
    let total = 2.0 * g.edge_count() as f64;
    Ok((0..g.vertex_count()).map(|v| g.degree(v) as f64 / total).collect())
}

/// `max_y |sum_x deg(x) P(x -> y) - deg(y)|` for simple random walk.
pub fn stationarity_residual(g: &RootedNetwork) -> Result<f64> {
    check_no_isolated(g)?;
    let mut flow = vec![0.0; g.vertex_count()];
    for x in 0..g.vertex_count() {
        let dx = g.degree(x) as f64;
        for (_, y) in g.neighbors(x) {
            flow[y] += dx * (1.0 / dx);
        }
    }
    Ok((0..g.vertex_count()).map(|y| (flow[y] - g.degree(y) as f64).abs()).fold(0.0, f64::max))
}

/// For each vertex, whether some vertex within distance `r` has degree `> m`.
pub fn high_degree_nearby(g: &RootedNetwork, r: u32, m: usize) -> Vec<bool> {
    let n = g.vertex_count();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if g.degree(v) > m {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        if dist[u] == r {
            continue;
        }
        for (_, w) in g.neighbors(u) {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist.into_iter().map(|d| d <= r).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightnessRow {
    pub name: String,
    pub vertices: usize,
    /// `m(G)`, the mean degree.
    pub mean_degree: f64,
    /// `E[deg o 1{deg o > M}]` under `U(G)`.
    pub degree_tail: f64,
    /// `P[F_r^M]` under `U(G)`.
    pub p_uniform: f64,
    /// `P[F_r^M]` under `D(G)`.
    pub p_biased: f64,
}

pub fn tightness_row(name: &str, g: &RootedNetwork, r: u32, m: usize) -> Result<TightnessRow> {
    check_no_isolated(g)?;
    let n = g.vertex_count();
    let total_deg = 2.0 * g.edge_count() as f64;
    let near = high_degree_nearby(g, r, m);
    let (mut pu, mut pd, mut tail) = (0.0, 0.0, 0.0);
    for v in 0..n {
        let k = g.degree(v) as f64;
        if near[v] {
            pu += 1.0;
            pd += k;
        }
        if g.degree(v) > m {
            tail += k;
        }
    }
    Ok(TightnessRow {
        name: name.to_string(),
        vertices: n,
        mean_degree: total_deg / n as f64,
        degree_tail: tail / n as f64,
        p_uniform: pu / n as f64,
        p_biased: pd / total_deg,
    })
}

/// Tightness of a family of finite networks at `(r, M)`, computed exactly.
/// The statistic is the supremum over the family of `P[F_r^M]` under both
/// `U(G)` and `D(G)`; the family is flagged tight when it is at most `eps`.
pub fn tightness_report(
    family: &[(String, RootedNetwork)],
    r: u32,
    m: usize,
    eps: f64,
) -> Result<(TestReport, Vec<TightnessRow>)> {
    if family.is_empty() {
        return Err(UrtError::Domain("empty family".into()));
    }
    let rows = family.iter().map(|(name, g)| tightness_row(name, g, r, m)).collect::<Result<Vec<_>>>()?;
    let sup_u = rows.iter().map(|x| x.p_uniform).fold(0.0, f64::max);
    let sup_d = rows.iter().map(|x| x.p_biased).fold(0.0, f64::max);
    let sup_tail = rows.iter().map(|x| x.degree_tail).fold(0.0, f64::max);
    let rep = TestReport::new("tightness", sup_u.max(sup_d), eps, family.len(), SeedStream::new(0, "tightness"))
        .extra("r", f64::from(r))
        .extra("M", m as f64)
        .extra("sup_p_uniform", sup_u)
        .extra("sup_p_biased", sup_d)
        .extra("sup_degree_tail", sup_tail);
    Ok((rep, rows))
}

/// Smallest `M` with `P[F_r^M] <= eps` under `U` and `D` across the family.
pub fn tightness_threshold(family: &[(String, RootedNetwork)], r: u32, eps: f64) -> Result<usize> {
    let max_deg = family.iter().map(|(_, g)| g.max_degree()).max().unwrap_or(0);
    for m in 0..=max_deg {
        if tightness_report(family, r, m, eps)?.0.passed() {
            return Ok(m);
        }
    }
    Ok(max_deg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub depth: u32,
    pub tv: Vec<f64>,
    /// `tv` is nonincreasing.
    pub monotone: bool,
}

/// TV of each member of `sequence` against `target` at depth `r`, or, when
/// `target` is `None`, between consecutive members. Samplers always take `n`
/// draws; finite networks are enumerated root by root when `exhaustive`.
pub fn convergence_check(
    sequence: &[Source<'_>],
    target: Option<Source<'_>>,
    r: u32,
    quantization: f64,
    n: usize,
    exhaustive: bool,
    stream: SeedStream,
) -> Result<ConvergenceReport> {
    let dist = |s: Source<'_>, name: &str| -> Result<EmpiricalRootedDist> {
        let draws = match s {
            Source::Finite(_) if exhaustive => Draws::Exhaustive,
            _ => Draws::Sample(n),
        };
        empirical_distribution(s, r, quantization, draws, stream.child(name))
    };
    let members =
        sequence.iter().enumerate().map(|(i, s)| dist(*s, &format!("member{i}"))).collect::<Result<Vec<_>>>()?;
    let tv = match target {
        Some(t) => {
            let t = dist(t, "target")?;
            members.iter().map(|m| tv_distance(m, &t)).collect::<Result<Vec<_>>>()?
        }
        None => members.windows(2).map(|w| tv_distance(&w[0], &w[1])).collect::<Result<Vec<_>>>()?,
    };
    let monotone = tv.windows(2).all(|w| w[1] <= w[0]);
    Ok(ConvergenceReport { depth: r, tv, monotone })
}
