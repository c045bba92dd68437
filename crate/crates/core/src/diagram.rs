//! Combinatorial codes of well-oriented knotted trivalent graph diagrams and tangles.
//!
//! An arc runs from exactly one source slot (a vertex output, a crossing's `under_out`,
//! or a boundary input) to exactly one sink slot (a vertex input, a crossing's
//! `under_in`, or a boundary output). Over-strands pass through crossings unbroken, so
//! `over` may reference an arc any number of times.
//!
//! Planar conventions used by the built-in fixtures: reading the half-edges at a vertex
//! counter-clockwise, a zip shows `out, in_right, in_left` and an unzip shows
//! `in, out_left, out_right`. With both in-arcs coming from above a zip, `in_left` is
//! the left one. A crossing is positive when the over-strand, seen from the
//! under-strand's direction of travel, crosses from right to left.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn parse(s: &str) -> Result<Sign> {
        match s {
            "+" => Ok(Sign::Plus),
            "-" | "−" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("bad crossing sign {other:?}"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Sign::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Crossing {
    pub sign: Sign,
    pub over: String,
    pub under_in: String,
    pub under_out: String,
}

impl Crossing {
    pub fn new(sign: Sign, over: &str, under_in: &str, under_out: &str) -> Self {
        Crossing {
            sign,
            over: over.into(),
            under_in: under_in.into(),
            under_out: under_out.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Vertex {
    Zip {
        in_left: String,
        in_right: String,
        out: String,
    },
    Unzip {
        #[serde(rename = "in")]
        input: String,
        out_left: String,
        out_right: String,
    },
}

impl Vertex {
    pub fn zip(in_left: &str, in_right: &str, out: &str) -> Self {
        Vertex::Zip {
            in_left: in_left.into(),
            in_right: in_right.into(),
            out: out.into(),
        }
    }

    pub fn unzip(input: &str, out_left: &str, out_right: &str) -> Self {
        Vertex::Unzip {
            input: input.into(),
            out_left: out_left.into(),
            out_right: out_right.into(),
        }
    }

    pub fn is_zip(&self) -> bool {
        matches!(self, Vertex::Zip { .. })
    }

    /// The two co-oriented arcs (ins of a zip, outs of an unzip) and the third arc.
    pub fn legs(&self) -> (&str, &str, &str) {
        match self {
            Vertex::Zip { in_left, in_right, out } => (in_left, in_right, out),
            Vertex::Unzip { input, out_left, out_right } => (out_left, out_right, input),
        }
    }

    pub(crate) fn sources(&self) -> Vec<&str> {
        match self {
            Vertex::Zip { out, .. } => vec![out],
            Vertex::Unzip { out_left, out_right, .. } => vec![out_left, out_right],
        }
    }

    pub(crate) fn sinks(&self) -> Vec<&str> {
        match self {
            Vertex::Zip { in_left, in_right, .. } => vec![in_left, in_right],
            Vertex::Unzip { input, .. } => vec![input],
        }
    }

    pub(crate) fn rename(&mut self, f: &impl Fn(&str) -> String) {
        match self {
            Vertex::Zip { in_left, in_right, out } => {
                *in_left = f(in_left);
                *in_right = f(in_right);
                *out = f(out);
            }
            Vertex::Unzip { input, out_left, out_right } => {
                *input = f(input);
                *out_left = f(out_left);
                *out_right = f(out_right);
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Boundary {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub arcs: Vec<String>,
    pub crossings: Vec<Crossing>,
    pub vertices: Vec<Vertex>,
    pub free_loops: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
}

#[derive(Deserialize)]
struct RawVertex {
    kind: String,
    in_left: Option<String>,
    in_right: Option<String>,
    out: Option<String>,
    #[serde(rename = "in")]
    input: Option<String>,
    out_left: Option<String>,
    out_right: Option<String>,
}

#[derive(Deserialize)]
struct RawDiagram {
    arcs: Vec<String>,
    #[serde(default)]
    crossings: Vec<Crossing>,
    #[serde(default)]
    vertices: Vec<RawVertex>,
    #[serde(default)]
    free_loops: usize,
    #[serde(default)]
    boundary: Option<Boundary>,
}

impl RawVertex {
    fn into_vertex(self) -> Result<Vertex> {
        let need = |v: Option<String>, f: &str| {
            v.ok_or_else(|| Error::Parse(format!("{} vertex is missing {f}", self.kind)))
        };
        match self.kind.as_str() {
            "zip" => Ok(Vertex::Zip {
                in_left: need(self.in_left.clone(), "in_left")?,
                in_right: need(self.in_right.clone(), "in_right")?,
                out: need(self.out.clone(), "out")?,
            }),
            "unzip" => Ok(Vertex::Unzip {
                input: need(self.input.clone(), "in")?,
                out_left: need(self.out_left.clone(), "out_left")?,
                out_right: need(self.out_right.clone(), "out_right")?,
            }),
            other => Err(Error::SinkVertexPresent(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub arcs: usize,
    pub crossings: usize,
    pub zips: usize,
    pub unzips: usize,
    pub free_loops: usize,
    pub tangle: bool,
}

impl Diagram {
    /// Parses the JSON wire format; vertex kinds other than zip/unzip are rejected with
    /// `SinkVertexPresent`. The result is validated.
    pub fn from_json(text: &str) -> Result<Diagram> {
        let raw: RawDiagram = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let vertices = raw
            .vertices
            .into_iter()
            .map(RawVertex::into_vertex)
            .collect::<Result<Vec<_>>>()?;
        let d = Diagram {
            arcs: raw.arcs,
            crossings: raw.crossings,
            vertices,
            free_loops: raw.free_loops,
            boundary: raw.boundary,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagram serializes")
    }

    pub fn zips(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_zip()).count()
    }

    pub fn unzips(&self) -> usize {
        self.vertices.len() - self.zips()
    }

    pub fn arc_index(&self) -> BTreeMap<&str, usize> {
        self.arcs.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect()
    }

    /// Slot accounting: each arc has exactly one source and one sink slot, and every
    /// referenced name is a declared arc.
    pub fn validate(&self) -> Result<ValidationReport> {
        let index = self.arc_index();
        if index.len() != self.arcs.len() {
            let mut seen = BTreeSet::new();
            let dup = self.arcs.iter().find(|a| !seen.insert(a.as_str())).expect("duplicate");
            return Err(Error::InvalidTable(format!("arc {dup} declared twice")));
        }
        let mut sources = vec![0usize; self.arcs.len()];
        let mut sinks = vec![0usize; self.arcs.len()];
        let lookup = |a: &str| index.get(a).copied().ok_or_else(|| Error::UnknownArc(a.to_string()));
        let add = |counts: &mut Vec<usize>, a: &str| -> Result<()> {
            counts[lookup(a)?] += 1;
            Ok(())
        };
        for c in &self.crossings {
            lookup(&c.over)?;
            add(&mut sinks, &c.under_in)?;
            add(&mut sources, &c.under_out)?;
        }
        for v in &self.vertices {
            for a in v.sources() {
                add(&mut sources, a)?;
            }
            for a in v.sinks() {
                add(&mut sinks, a)?;
            }
        }
        if let Some(b) = &self.boundary {
            for a in &b.inputs {
                add(&mut sources, a)?;
            }
            for a in &b.outputs {
                add(&mut sinks, a)?;
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if sources[i] > 1 {
                return Err(Error::DoubleSource(a.clone()));
            }
            if sinks[i] > 1 {
                return Err(Error::DoubleSink(a.clone()));
            }
            if sources[i] == 0 || sinks[i] == 0 {
                return Err(Error::DanglingArc(a.clone()));
            }
        }
        Ok(ValidationReport {
            arcs: self.arcs.len(),
            crossings: self.crossings.len(),
            zips: self.zips(),
            unzips: self.unzips(),
            free_loops: self.free_loops,
            tangle: self.boundary.is_some(),
        })
    }

    /// Renames arcs everywhere they occur.
    pub fn rename_arcs(&mut self, f: impl Fn(&str) -> String) {
        for a in &mut self.arcs {
            *a = f(a);
        }
        for c in &mut self.crossings {
            c.over = f(&c.over);
            c.under_in = f(&c.under_in);
            c.under_out = f(&c.under_out);
        }
        for v in &mut self.vertices {
            v.rename(&f);
        }
        if let Some(b) = &mut self.boundary {
            for a in b.inputs.iter_mut().chain(b.outputs.iter_mut()) {
                *a = f(a);
            }
        }
    }

    /// Equality ignoring the order of arcs, crossings and vertices.
    pub fn same_up_to_order(&self, other: &Diagram) -> bool {
        let sorted = |d: &Diagram| {
            let mut a = d.arcs.clone();
            a.sort();
            let mut c = d.crossings.clone();
            c.sort();
            let mut v = d.vertices.clone();
            v.sort();
            (a, c, v, d.free_loops, d.boundary.clone())
        };
        sorted(self) == sorted(other)
    }
}

/// An abstract graph with every vertex of valency three (loops count twice).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl AbstractGraph {
    pub fn check_trivalent(&self) -> Result<()> {
        let mut deg = vec![0usize; self.vertices];
        for &(u, v) in &self.edges {
            if u >= self.vertices || v >= self.vertices {
                return Err(Error::InvalidTable(format!("edge ({u},{v}) out of range")));
            }
            deg[u] += 1;
            deg[v] += 1;
        }
        match deg.iter().position(|&d| d != 3) {
            Some(v) => Err(Error::NonTrivalent { vertex: v, valency: deg[v] }),
            None => Ok(()),
        }
    }
}

/// Orients every edge so that no vertex is a source or a sink, by repeatedly taking a
/// maximal trail in the unused edges and orienting it along its direction of travel.
/// Returns, for each input edge, the pair (tail, head).
pub fn well_orient(g: &AbstractGraph) -> Result<Vec<(usize, usize)>> {
    g.check_trivalent()?;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.vertices];
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        incident[u].push(e);
        if u != v {
            incident[v].push(e);
        }
    }
    let other = |e: usize, x: usize| {
        let (u, v) = g.edges[e];
        if u == x {
            v
        } else {
            u
        }
    };
    let mut used = vec![false; g.edges.len()];
    let mut oriented = vec![(0, 0); g.edges.len()];
    for start in 0..g.edges.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (u0, v0) = g.edges[start];
        // trail as a list of (edge, tail, head)
        let mut trail = std::collections::VecDeque::from([(start, u0, v0)]);
        loop {
            let head = trail.back().expect("nonempty").2;
            match incident[head].iter().copied().find(|&e| !used[e]) {
                Some(e) => {
                    used[e] = true;
                    trail.push_back((e, head, other(e, head)));
                }
                None => break,
            }
        }
        loop {
            let tail = trail.front().expect("nonempty").1;
            match incident[tail].iter().copied().find(|&e| !used[e]) {
                Some(e) => {
                    used[e] = true;
                    trail.push_front((e, other(e, tail), tail));
                }
                None => break,
            }
        }
        for (e, t, h) in trail {
            oriented[e] = (t, h);
        }
    }
    Ok(oriented)
}

/// In-degrees of an oriented graph.
pub fn in_degrees(vertices: usize, oriented: &[(usize, usize)]) -> Vec<usize> {
    let mut d = vec![0; vertices];
    for &(_, h) in oriented {
        d[h] += 1;
    }
    d
}

pub const BUILTIN_DIAGRAMS: [&str; 6] = ["unknot", "trefoil", "theta_st", "theta_kt", "cuff_st", "cuff_hopf"];

fn arcs(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn builtin_diagram(name: &str) -> Result<Diagram> {
    use Sign::{Minus, Plus};
    let d = match name {
        "unknot" => Diagram {
            free_loops: 1,
            ..Diagram::default()
        },
        "trefoil" => Diagram {
            arcs: arcs(&["a", "b", "c"]),
            crossings: vec![
                Crossing::new(Plus, "c", "a", "b"),
                Crossing::new(Plus, "a", "b", "c"),
                Crossing::new(Plus, "b", "c", "a"),
            ],
            ..Diagram::default()
        },
        // Three parallel edges: two co-oriented ones and the returning one.
        "theta_st" => Diagram {
            arcs: arcs(&["x1", "x2", "xx"]),
            vertices: vec![Vertex::zip("x1", "x2", "xx"), Vertex::unzip("xx", "x1", "x2")],
            ..Diagram::default()
        },
        // Two vertices and six crossings; each edge passes under twice.
        "theta_kt" => Diagram {
            arcs: arcs(&["x1", "x2", "xx", "c", "yy", "y1", "y2", "a", "b"]),
            crossings: vec![
                Crossing::new(Minus, "y2", "xx", "c"),
                Crossing::new(Minus, "x1", "c", "yy"),
                Crossing::new(Plus, "x2", "y1", "a"),
                Crossing::new(Minus, "yy", "a", "x1"),
                Crossing::new(Minus, "xx", "y2", "b"),
                Crossing::new(Plus, "y1", "b", "x2"),
            ],
            vertices: vec![Vertex::zip("x2", "x1", "xx"), Vertex::unzip("yy", "y2", "y1")],
            ..Diagram::default()
        },
        // A loop at each vertex joined by a bridge.
        "cuff_st" => Diagram {
            arcs: arcs(&["a", "b", "c"]),
            vertices: vec![Vertex::unzip("a", "b", "a"), Vertex::zip("b", "c", "c")],
            ..Diagram::default()
        },
        // As cuff_st, with the two loops clasped.
        "cuff_hopf" => Diagram {
            arcs: arcs(&["a", "a2", "b", "c", "c2"]),
            crossings: vec![
                Crossing::new(Minus, "c2", "a", "a2"),
                Crossing::new(Minus, "a", "c2", "c"),
            ],
            vertices: vec![Vertex::unzip("a2", "b", "a"), Vertex::zip("b", "c", "c2")],
            ..Diagram::default()
        },
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(d)
}
