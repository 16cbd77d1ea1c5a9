//! Plain-text edge-list format for rooted networks.
//!
//! ```text
//! # comment
//! graph <label>                 # starts a network; optional for a single one
//! root <id>
//! radius <r | inf>              # validity; defaults to inf
//! vertex <id> <tag> <vals>
//! <u> <v> <tag_u> <vals_u> <tag_v> <vals_v>
//! ```
//!
//! Ids are non-negative integers. `<vals>` is a comma-separated list of reals
//! or `-` when empty. An edge line carries the mark at `u` followed by the
//! mark at `v`. Ids used by edges but never declared get the empty mark.
//! Reals are written in shortest round-trip form, so write-then-read is exact.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, UrtError};
use crate::network::{Mark, NetworkBuilder, RootedNetwork, Validity};

fn write_vals(out: &mut String, m: &Mark) {
    if m.values().is_empty() {
        out.push('-');
        return;
    }
    for (i, v) in m.values().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:?}");
    }
}

/// Appends one network to `out`.
pub fn write_network(out: &mut String, net: &RootedNetwork, label: Option<&str>) {
    if let Some(l) = label {
        let _ = writeln!(out, "graph {l}");
    }
    let _ = writeln!(out, "root {}", net.root());
    let _ = writeln!(out, "radius {}", net.validity());
    for (v, m) in net.vertex_marks().iter().enumerate() {
        let _ = write!(out, "vertex {v} {} ", m.tag());
        write_vals(out, m);
        out.push('\n');
    }
    for e in net.edges() {
        let _ = write!(out, "{} {} {} ", e.ends[0], e.ends[1], e.marks[0].tag());
        write_vals(out, &e.marks[0]);
        let _ = write!(out, " {} ", e.marks[1].tag());
        write_vals(out, &e.marks[1]);
        out.push('\n');
    }
}

pub fn to_text(net: &RootedNetwork) -> String {
    let mut s = String::new();
    write_network(&mut s, net, None);
    s
}

pub fn networks_to_text<'a>(nets: impl IntoIterator<Item = &'a RootedNetwork>) -> String {
    let mut s = String::new();
    for (i, n) in nets.into_iter().enumerate() {
        write_network(&mut s, n, Some(&i.to_string()));
    }
    s
}

#[derive(Default)]
struct Pending {
    start_line: usize,
    ids: HashMap<u64, usize>,
    builder: NetworkBuilder,
    declared: Vec<bool>,
    root: Option<u64>,
    validity: Option<Validity>,
}

impl Pending {
    fn vertex(&mut self, id: u64) -> usize {
        if let Some(&v) = self.ids.get(&id) {
            return v;
        }
        let v = self.builder.add_vertex(Mark::empty());
        self.declared.push(false);
        self.ids.insert(id, v);
        v
    }

    fn is_empty(&self) -> bool {
        self.builder.vertex_count() == 0 && self.root.is_none()
    }

    fn finish(self) -> Result<RootedNetwork> {
        let line = self.start_line;
        let root_id = self.root.ok_or(UrtError::Parse { line, message: "missing root declaration".into() })?;
        let root = *self
            .ids
            .get(&root_id)
            .ok_or(UrtError::Parse { line, message: format!("root {root_id} is not a vertex") })?;
        self.builder
            .build(root, self.validity.unwrap_or(Validity::Unbounded))
            .map_err(|e| UrtError::Parse { line, message: e.to_string() })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> UrtError {
    UrtError::Parse { line, message: message.into() }
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<u64> {
    let t = tok.ok_or_else(|| parse_err(line, "missing vertex id"))?;
    t.parse().map_err(|_| parse_err(line, format!("bad vertex id '{t}'")))
}

fn parse_mark(tag: Option<&str>, vals: Option<&str>, line: usize) -> Result<Mark> {
    let tag = tag.ok_or_else(|| parse_err(line, "missing mark tag"))?;
    let tag: u32 = tag.parse().map_err(|_| parse_err(line, format!("bad mark tag '{tag}'")))?;
    let vals = vals.ok_or_else(|| parse_err(line, "missing mark values"))?;
    let values: Vec<f64> = if vals == "-" {
        Vec::new()
    } else {
        vals.split(',')
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(line, format!("bad mark value '{s}'"))))
            .collect::<Result<_>>()?
    };
    Mark::new(tag, &values).map_err(|e| parse_err(line, e.to_string()))
}

/// Parses every network in `text`.
pub fn from_text_many(text: &str) -> Result<Vec<RootedNetwork>> {
    let mut out = Vec::new();
    let mut cur = Pending { start_line: 1, ..Default::default() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().expect("non-empty");
        match head {
            "graph" => {
                toks.next();
                let done = std::mem::replace(&mut cur, Pending { start_line: line, ..Default::default() });
                if !done.is_empty() {
                    out.push(done.finish()?);
                }
            }
            "root" => {
                if cur.root.is_some() {
                    return Err(parse_err(line, "duplicate root declaration"));
                }
                cur.root = Some(parse_id(toks.next(), line)?);
            }
            "radius" => {
                let t = toks.next().ok_or_else(|| parse_err(line, "missing radius"))?;
                cur.validity = Some(if t == "inf" {
                    Validity::Unbounded
                } else {
                    Validity::Finite(t.parse().map_err(|_| parse_err(line, format!("bad radius '{t}'")))?)
                });
            }
            "vertex" => {
                let id = parse_id(toks.next(), line)?;
                let mark = parse_mark(toks.next(), toks.next(), line)?;
                let v = cur.vertex(id);
                if cur.declared[v] {
                    return Err(parse_err(line, format!("vertex {id} declared twice")));
                }
                cur.declared[v] = true;
                cur.builder.set_vertex_mark(v, mark);
            }
            _ => {
                let u = parse_id(Some(head), line)?;
                let v = parse_id(toks.next(), line)?;
                let mu = parse_mark(toks.next(), toks.next(), line)?;
                let mv = parse_mark(toks.next(), toks.next(), line)?;
                let (iu, iv) = (cur.vertex(u), cur.vertex(v));
                cur.builder.add_marked_edge(iu, iv, mu, mv).map_err(|e| parse_err(line, e.to_string()))?;
            }
        }
        if toks.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
    }
    if !cur.is_empty() {
        out.push(cur.finish()?);
    }
    Ok(out)
}

/// Parses a text holding exactly one network.
pub fn from_text(text: &str) -> Result<RootedNetwork> {
    let mut nets = from_text_many(text)?;
    match nets.len() {
        1 => Ok(nets.pop().expect("one")),
        n => Err(parse_err(1, format!("expected one network, found {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = "\
# a marked cherry
root 10
radius 2
vertex 10 0 -
vertex 11 1 0.5,-2
12 10 0 1 3 -
10 11 0 - 0 -
";
        let g = from_text(text).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.degree(g.root()), 2);
        assert_eq!(g.validity(), Validity::Finite(2));
        assert_eq!(g.vertex_mark(1).values(), &[0.5, -2.0]);
        let e = &g.edges()[0];
        assert_eq!(e.mark_at(g.root()).tag(), 3);
        assert_eq!(e.mark_at(e.other(g.root())).values(), &[1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(from_text("root 0\nvertex 0 0 -\n0 0 0 - 0 -\n"), Err(UrtError::Parse { line: 3, .. })));
        assert!(matches!(from_text("vertex 0 0 -\n"), Err(UrtError::Parse { .. })));
        assert!(matches!(from_text("root 0\nvertex 0 0 nan\n"), Err(UrtError::Parse { line: 2, .. })));
        assert!(matches!(from_text("root 0\nvertex 0 0 - extra\n"), Err(UrtError::Parse { line: 2, .. })));
        assert!(matches!(from_text("root 0\n0 1 0 - 0 -\n2 3 0 - 0 -\n"), Err(UrtError::Parse { .. })));
    }

    #[test]
    fn several_networks() {
        let text = "graph a\nroot 0\nvertex 0 0 -\ngraph b\nroot 1\n0 1 0 - 0 -\n";
        let nets = from_text_many(text).unwrap();
        assert_eq!(nets.len(), 2);
        assert_eq!(nets[1].edge_count(), 1);
        assert!(from_text(text).is_err());
    }
}
