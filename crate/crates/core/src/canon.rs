//! Canonical codes of rooted balls.
//!
//! Mark values are rounded to a grid of step `quantization` (exact bit patterns
//! when the step is zero) before coding. Trees are coded by sorted nested
//! child encodings; balls with cycles or parallel edges go through colour
//! refinement with individualisation, keeping the smallest certificate.

use std::collections::HashMap;

use crate::error::{Result, UrtError};
use crate::network::{ball, ball_with_map, DoublyRootedNetwork, Mark, RootedNetwork};

const TREE: u8 = b'T';
const GRAPH: u8 = b'G';
const OPEN: u8 = b'(';
const CHILD: u8 = b'C';
const CLOSE: u8 = b')';

/// Canonical code of a rooted ball: equal codes exactly for rooted-isomorphic
/// balls after quantization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode {
    bytes: Vec<u8>,
    depth: u32,
    quantization_bits: u64,
}

impl CanonicalCode {
    pub(crate) fn from_parts(bytes: Vec<u8>, depth: u32, quantization: f64) -> Self {
        CanonicalCode { bytes, depth, quantization_bits: quantization.to_bits() }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn quantization(&self) -> f64 {
        f64::from_bits(self.quantization_bits)
    }

    pub fn to_hex(&self) -> String {
        hex_string(&self.bytes)
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    use std::fmt::Write;
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub(crate) fn check_quantization(q: f64) -> Result<()> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(UrtError::Domain(format!("quantization step {q} must be finite and >= 0")));
    }
    Ok(())
}

pub fn canonical_code(net: &RootedNetwork, depth: u32, quantization: f64) -> Result<CanonicalCode> {
    check_quantization(quantization)?;
    let b = ball(net, net.root(), depth)?;
    Ok(CanonicalCode { bytes: encode(&b, None, quantization), depth, quantization_bits: quantization.to_bits() })
}

/// Code of the depth-ball around the first root with the second root
/// distinguished (when it lies inside the ball).
pub fn canonical_code_doubly(net: &DoublyRootedNetwork, depth: u32, quantization: f64) -> Result<CanonicalCode> {
    canonical_code_pair(net.network(), net.root(), net.second_root(), depth, quantization)
}

/// Code of the depth-ball around `first` with `second` distinguished.
pub fn canonical_code_pair(
    net: &RootedNetwork,
    first: usize,
    second: usize,
    depth: u32,
    quantization: f64,
) -> Result<CanonicalCode> {
    check_quantization(quantization)?;
    net.check_vertex(second)?;
    let (b, map) = ball_with_map(net, first, depth)?;
    let local = map.iter().position(|&v| v == second);
    let mut bytes = encode(&b, Some(local), quantization);
    bytes.insert(0, b'2');
    Ok(CanonicalCode { bytes, depth, quantization_bits: quantization.to_bits() })
}

pub(crate) fn push_mark(out: &mut Vec<u8>, m: &Mark, q: f64) {
    out.extend_from_slice(&m.tag().to_le_bytes());
    out.push(m.values().len() as u8);
    for &v in m.values() {
        let x: i64 = if q > 0.0 { (v / q).round() as i64 } else { (v + 0.0).to_bits() as i64 };
        out.extend_from_slice(&x.to_le_bytes());
    }
}

/// `second`: `None` for singly rooted codes, `Some(None)` when the second root
/// is outside the ball, `Some(Some(v))` otherwise.
fn encode(b: &RootedNetwork, second: Option<Option<usize>>, q: f64) -> Vec<u8> {
    let flag = |v: usize| -> u8 {
        match second {
            Some(Some(s)) if s == v => 1,
            _ => 0,
        }
    };
    let mut out = if b.is_tree() { encode_tree(b, &flag, q) } else { encode_graph(b, &flag, q) };
    if second == Some(None) {
        out.push(b'x');
    }
    out
}

fn encode_tree(b: &RootedNetwork, flag: &dyn Fn(usize) -> u8, q: f64) -> Vec<u8> {
    let n = b.vertex_count();
    let root = b.root();
    let mut order = Vec::with_capacity(n);
    let mut parent_edge = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    order.push(root);
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for (e, w) in b.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                parent_edge[w] = e;
                order.push(w);
            }
        }
    }

    let mut chunks: Vec<Vec<Vec<u8>>> = vec![Vec::new(); n];
    let mut enc: Vec<Vec<u8>> = vec![Vec::new(); n];
    for &v in order.iter().rev() {
        let mut s = Vec::with_capacity(16);
        s.push(OPEN);
        push_mark(&mut s, b.vertex_mark(v), q);
        s.push(flag(v));
        let mut kids = std::mem::take(&mut chunks[v]);
        kids.sort_unstable();
        for k in kids {
            s.extend_from_slice(&k);
        }
        s.push(CLOSE);
        if v == root {
            enc[v] = s;
        } else {
            let e = b.edge(parent_edge[v]);
            let p = e.other(v);
            let mut chunk = Vec::with_capacity(s.len() + 32);
            chunk.push(CHILD);
            push_mark(&mut chunk, e.mark_at(p), q);
            push_mark(&mut chunk, e.mark_at(v), q);
            chunk.extend_from_slice(&s);
            chunks[p].push(chunk);
        }
    }
    let mut out = Vec::with_capacity(enc[root].len() + 1);
    out.push(TREE);
    out.extend_from_slice(&enc[root]);
    out
}

struct Refiner {
    n: usize,
    /// (neighbour, interned oriented edge-mark pair)
    adj: Vec<Vec<(usize, u32)>>,
    vertex_keys: Vec<Vec<u8>>,
    edge_keys: Vec<(usize, usize, Vec<u8>, Vec<u8>)>,
}

fn rank<K: Ord>(keys: &[K]) -> (Vec<u32>, usize) {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut colors = vec![0u32; keys.len()];
    let mut next = 0u32;
    for (i, &v) in idx.iter().enumerate() {
        if i > 0 && keys[idx[i - 1]] != keys[v] {
            next += 1;
        }
        colors[v] = next;
    }
    let count = if keys.is_empty() { 0 } else { next as usize + 1 };
    (colors, count)
}

impl Refiner {
    fn new(b: &RootedNetwork, flag: &dyn Fn(usize) -> u8, q: f64) -> Self {
        let n = b.vertex_count();
        let dist = b.distances_from(b.root(), None);
        let mut vertex_keys = Vec::with_capacity(n);
        for v in 0..n {
            let mut k = Vec::new();
            k.extend_from_slice(&dist[v].unwrap_or(u32::MAX).to_be_bytes());
            k.extend_from_slice(&(b.degree(v) as u32).to_be_bytes());
            k.push(flag(v));
            push_mark(&mut k, b.vertex_mark(v), q);
            vertex_keys.push(k);
        }
        let mut pair_bytes: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
        let mut oriented = Vec::new();
        let mut edge_keys = Vec::with_capacity(b.edge_count());
        for e in b.edges() {
            let [a, c] = e.ends;
            let (mut ma, mut mc) = (Vec::new(), Vec::new());
            push_mark(&mut ma, &e.marks[0], q);
            push_mark(&mut mc, &e.marks[1], q);
            oriented.push((a, c, pair_bytes.len()));
            pair_bytes.push((ma.clone(), mc.clone()));
            oriented.push((c, a, pair_bytes.len()));
            pair_bytes.push((mc.clone(), ma.clone()));
            edge_keys.push((a, c, ma, mc));
        }
        let (pair_ids, _) = rank(&pair_bytes);
        let mut adj = vec![Vec::new(); n];
        for (from, to, k) in oriented {
            adj[from].push((to, pair_ids[k]));
        }
        Refiner { n, adj, vertex_keys, edge_keys }
    }

    fn refine(&self, colors: &mut Vec<u32>) -> usize {
        let (mut cur, mut count) = rank(colors);
        loop {
            let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..self.n)
                .map(|v| {
                    let mut nb: Vec<(u32, u32)> = self.adj[v].iter().map(|&(w, p)| (cur[w], p)).collect();
                    nb.sort_unstable();
                    (cur[v], nb)
                })
                .collect();
            let (next, next_count) = rank(&sigs);
            cur = next;
            if next_count == count {
                break;
            }
            count = next_count;
        }
        *colors = cur;
        count
    }

    fn certificate(&self, colors: &[u32]) -> Vec<u8> {
        let mut by_pos = vec![0usize; self.n];
        for (v, &c) in colors.iter().enumerate() {
            by_pos[c as usize] = v;
        }
        let mut out = vec![GRAPH];
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for &v in &by_pos {
            out.extend_from_slice(&(self.vertex_keys[v].len() as u32).to_le_bytes());
            out.extend_from_slice(&self.vertex_keys[v]);
        }
        let mut edges: Vec<(u32, u32, &[u8], &[u8])> = self
            .edge_keys
            .iter()
            .map(|(a, c, ma, mc)| {
                let (pa, pc) = (colors[*a], colors[*c]);
                if pa < pc {
                    (pa, pc, ma.as_slice(), mc.as_slice())
                } else {
                    (pc, pa, mc.as_slice(), ma.as_slice())
                }
            })
            .collect();
        edges.sort_unstable();
        out.extend_from_slice(&(edges.len() as u32).to_le_bytes());
        for (a, c, ma, mc) in edges {
            out.extend_from_slice(&a.to_le_bytes());
            out.extend_from_slice(&c.to_le_bytes());
            out.extend_from_slice(ma);
            out.extend_from_slice(mc);
        }
        out
    }

    fn search(&self, mut colors: Vec<u32>, best: &mut Option<Vec<u8>>) {
        let count = self.refine(&mut colors);
        if count == self.n {
            let cert = self.certificate(&colors);
            if best.as_ref().is_none_or(|b| cert < *b) {
                *best = Some(cert);
            }
            return;
        }
        let mut sizes: HashMap<u32, usize> = HashMap::new();
        for &c in &colors {
            *sizes.entry(c).or_default() += 1;
        }
        let target = sizes.iter().filter(|(_, &s)| s > 1).map(|(&c, _)| c).min().expect("non-discrete");
        let members: Vec<usize> = (0..self.n).filter(|&v| colors[v] == target).collect();
        for v in members {
            let next: Vec<u32> =
                colors.iter().enumerate().map(|(x, &c)| if x == v { 2 * c } else { 2 * c + 1 }).collect();
            self.search(next, best);
        }
    }
}

fn encode_graph(b: &RootedNetwork, flag: &dyn Fn(usize) -> u8, q: f64) -> Vec<u8> {
    let r = Refiner::new(b, flag, q);
    let (initial, _) = rank(&r.vertex_keys);
    let mut best = None;
    r.search(initial, &mut best);
    best.expect("search visits at least one leaf")
}
