//! Reidemeister-type move fixtures for well-oriented diagrams and a local rewriting
//! engine.
//!
//! A fixture is a pair of tangles with the same boundary shape; boundary endpoints
//! correspond by position. `Direction::Remove` finds the `lhs` pattern and replaces it
//! with `rhs`; `Direction::Insert` goes the other way. A `Site` anchors the pattern:
//! its arcs are the images of the fixture's anchor arcs (in order) and its vertex is
//! the image of the pattern's vertex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{Boundary, Crossing, Diagram, Sign, Vertex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveId {
    R1Plus,
    R1Minus,
    R2,
    R3,
    R4z,
    R4u,
    R5z,
    R5u,
    R6z,
    R6u,
}

impl MoveId {
    pub const ALL: [MoveId; 10] = [
        MoveId::R1Plus,
        MoveId::R1Minus,
        MoveId::R2,
        MoveId::R3,
        MoveId::R4z,
        MoveId::R4u,
        MoveId::R5z,
        MoveId::R5u,
        MoveId::R6z,
        MoveId::R6u,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MoveId::R1Plus => "R1+",
            MoveId::R1Minus => "R1-",
            MoveId::R2 => "R2",
            MoveId::R3 => "R3",
            MoveId::R4z => "R4z",
            MoveId::R4u => "R4u",
            MoveId::R5z => "R5z",
            MoveId::R5u => "R5u",
            MoveId::R6z => "R6z",
            MoveId::R6u => "R6u",
        }
    }

    /// Moves whose fixtures involve no vertex.
    pub fn is_classical(self) -> bool {
        matches!(self, MoveId::R1Plus | MoveId::R1Minus | MoveId::R2 | MoveId::R3)
    }
}

impl fmt::Display for MoveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MoveId {
    type Err = Error;
    fn from_str(s: &str) -> Result<MoveId> {
        let s = s.replace('−', "-");
        MoveId::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or(Error::UnknownMove(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Insert,
    Remove,
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Direction> {
        match s {
            "insert" => Ok(Direction::Insert),
            "remove" => Ok(Direction::Remove),
            other => Err(Error::InvalidDirection(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    #[serde(default)]
    pub arcs: Vec<String>,
    #[serde(default)]
    pub vertex: Option<usize>,
    /// Insert on one of the diagram's free loops (single-strand patterns only).
    #[serde(default)]
    pub free_loop: bool,
}

impl Site {
    pub fn arcs(arcs: &[&str]) -> Site {
        Site {
            arcs: arcs.iter().map(|s| s.to_string()).collect(),
            ..Site::default()
        }
    }

    pub fn vertex(v: usize, arcs: &[&str]) -> Site {
        Site {
            vertex: Some(v),
            ..Site::arcs(arcs)
        }
    }

    pub fn free_loop() -> Site {
        Site {
            free_loop: true,
            ..Site::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MovePair {
    pub move_id: MoveId,
    pub lhs: Diagram,
    pub rhs: Diagram,
    /// Pattern arcs a site's `arcs` refer to, for either side.
    pub anchors: Vec<String>,
}

fn tangle(arcs: &[&str], crossings: Vec<Crossing>, vertices: Vec<Vertex>, ins: &[&str], outs: &[&str]) -> Diagram {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    Diagram {
        arcs: s(arcs),
        crossings,
        vertices,
        free_loops: 0,
        boundary: Some(Boundary {
            inputs: s(ins),
            outputs: s(outs),
        }),
    }
}

pub fn move_fixture(id: MoveId) -> MovePair {
    use Sign::{Minus, Plus};
    let c = Crossing::new;
    let (lhs, rhs, anchors): (Diagram, Diagram, &[&str]) = match id {
        MoveId::R1Plus | MoveId::R1Minus => {
            let sign = if id == MoveId::R1Plus { Plus } else { Minus };
            (
                tangle(&["x", "y"], vec![c(sign, "x", "x", "y")], vec![], &["x"], &["y"]),
                tangle(&["x"], vec![], vec![], &["x"], &["x"]),
                &["x"],
            )
        }
        MoveId::R2 => (
            tangle(
                &["x", "x1", "x2", "y"],
                vec![c(Plus, "y", "x", "x1"), c(Minus, "y", "x1", "x2")],
                vec![],
                &["x", "y"],
                &["x2", "y"],
            ),
            tangle(&["x", "y"], vec![], vec![], &["x", "y"], &["x", "y"]),
            &["x", "y"],
        ),
        MoveId::R3 => (
            tangle(
                &["a", "b", "c", "a1", "a2", "b1"],
                vec![c(Plus, "b", "a", "a1"), c(Plus, "c", "a1", "a2"), c(Plus, "c", "b", "b1")],
                vec![],
                &["a", "b", "c"],
                &["a2", "b1", "c"],
            ),
            tangle(
                &["a", "b", "c", "a1", "a2", "b1"],
                vec![c(Plus, "c", "b", "b1"), c(Plus, "c", "a", "a1"), c(Plus, "b1", "a1", "a2")],
                vec![],
                &["a", "b", "c"],
                &["a2", "b1", "c"],
            ),
            &["a", "b", "c"],
        ),
        // strand a under the out-arc of a zip / under both of its in-arcs
        MoveId::R4z => (
            tangle(
                &["a", "b", "c", "bc", "a2"],
                vec![c(Plus, "bc", "a", "a2")],
                vec![Vertex::zip("b", "c", "bc")],
                &["a", "b", "c"],
                &["bc", "a2"],
            ),
            tangle(
                &["a", "b", "c", "a1", "a2", "bc"],
                vec![c(Plus, "b", "a", "a1"), c(Plus, "c", "a1", "a2")],
                vec![Vertex::zip("b", "c", "bc")],
                &["a", "b", "c"],
                &["bc", "a2"],
            ),
            &["a"],
        ),
        // strand x under the in-arc of an unzip / under both of its out-arcs
        MoveId::R4u => (
            tangle(
                &["u", "x", "x2", "l", "r"],
                vec![c(Plus, "u", "x", "x2")],
                vec![Vertex::unzip("u", "l", "r")],
                &["u", "x"],
                &["l", "r", "x2"],
            ),
            tangle(
                &["u", "x", "x1", "x2", "l", "r"],
                vec![c(Plus, "l", "x", "x1"), c(Plus, "r", "x1", "x2")],
                vec![Vertex::unzip("u", "l", "r")],
                &["u", "x"],
                &["l", "r", "x2"],
            ),
            &["x"],
        ),
        // a passes under b before both enter the zip (in the opposite order)
        MoveId::R5z => (
            tangle(
                &["a", "b", "a1", "o"],
                vec![c(Plus, "b", "a", "a1")],
                vec![Vertex::zip("b", "a1", "o")],
                &["a", "b"],
                &["o"],
            ),
            tangle(&["a", "b", "o"], vec![], vec![Vertex::zip("a", "b", "o")], &["a", "b"], &["o"]),
            &[],
        ),
        // the two out-arcs of an unzip cross; outputs are (top-left, top-right)
        MoveId::R5u => (
            tangle(
                &["u", "l", "l2", "r"],
                vec![c(Plus, "r", "l", "l2")],
                vec![Vertex::unzip("u", "l", "r")],
                &["u"],
                &["l2", "r"],
            ),
            tangle(&["u", "tl", "tr"], vec![], vec![Vertex::unzip("u", "tr", "tl")], &["u"], &["tl", "tr"]),
            &[],
        ),
        // out-arc of a zip under c / both in-arcs under c
        MoveId::R6z => (
            tangle(
                &["a", "b", "c", "m", "o"],
                vec![c(Plus, "c", "m", "o")],
                vec![Vertex::zip("a", "b", "m")],
                &["a", "b", "c"],
                &["c", "o"],
            ),
            tangle(
                &["a", "b", "c", "a1", "b1", "o"],
                vec![c(Plus, "c", "a", "a1"), c(Plus, "c", "b", "b1")],
                vec![Vertex::zip("a1", "b1", "o")],
                &["a", "b", "c"],
                &["c", "o"],
            ),
            &["c"],
        ),
        // in-arc of an unzip under c / both out-arcs under c
        MoveId::R6u => (
            tangle(
                &["u0", "u1", "c", "l", "r"],
                vec![c(Plus, "c", "u0", "u1")],
                vec![Vertex::unzip("u1", "l", "r")],
                &["u0", "c"],
                &["c", "l", "r"],
            ),
            tangle(
                &["u0", "c", "l0", "r0", "l", "r"],
                vec![c(Plus, "c", "l0", "l"), c(Plus, "c", "r0", "r")],
                vec![Vertex::unzip("u0", "l0", "r0")],
                &["u0", "c"],
                &["c", "l", "r"],
            ),
            &["c"],
        ),
    };
    MovePair {
        move_id: id,
        lhs,
        rhs,
        anchors: anchors.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn all_fixtures() -> Vec<MovePair> {
    MoveId::ALL.iter().map(|&m| move_fixture(m)).collect()
}

// ---------------------------------------------------------------------------------
// Pattern matching

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Slot {
    UnderIn,
    UnderOut,
    ZipInLeft,
    ZipInRight,
    ZipOut,
    UnzipIn,
    UnzipOutLeft,
    UnzipOutRight,
}

impl Slot {
    fn is_source(self) -> bool {
        matches!(self, Slot::UnderOut | Slot::ZipOut | Slot::UnzipOutLeft | Slot::UnzipOutRight)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
enum Elt {
    C(usize),
    V(usize),
}

/// Arc incidences of a diagram, indexed by arc position.
struct Incidence {
    index: BTreeMap<String, usize>,
    source: Vec<Option<(Elt, Slot)>>,
    sink: Vec<Option<(Elt, Slot)>>,
    over: Vec<Vec<usize>>,
}

fn element_slots(d: &Diagram, e: Elt) -> Vec<(Slot, &str)> {
    match e {
        Elt::C(i) => {
            let c = &d.crossings[i];
            vec![(Slot::UnderIn, &c.under_in), (Slot::UnderOut, &c.under_out)]
        }
        Elt::V(i) => match &d.vertices[i] {
            Vertex::Zip { in_left, in_right, out } => {
                vec![(Slot::ZipInLeft, in_left), (Slot::ZipInRight, in_right), (Slot::ZipOut, out)]
            }
            Vertex::Unzip { input, out_left, out_right } => vec![
                (Slot::UnzipIn, input),
                (Slot::UnzipOutLeft, out_left),
                (Slot::UnzipOutRight, out_right),
            ],
        },
    }
}

impl Incidence {
    fn new(d: &Diagram) -> Incidence {
        let index: BTreeMap<String, usize> = d.arcs.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let n = d.arcs.len();
        let mut inc = Incidence {
            index,
            source: vec![None; n],
            sink: vec![None; n],
            over: vec![Vec::new(); n],
        };
        let elts = (0..d.crossings.len()).map(Elt::C).chain((0..d.vertices.len()).map(Elt::V));
        for e in elts {
            for (slot, a) in element_slots(d, e) {
                let i = inc.index[a];
                if slot.is_source() {
                    inc.source[i] = Some((e, slot));
                } else {
                    inc.sink[i] = Some((e, slot));
                }
            }
        }
        for (ci, c) in d.crossings.iter().enumerate() {
            inc.over[inc.index[&c.over]].push(ci);
        }
        inc
    }
}

struct Matcher<'a> {
    pat: &'a Diagram,
    host: &'a Diagram,
    pinc: Incidence,
    hinc: Incidence,
    inputs: BTreeSet<usize>,
    outputs: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
struct Match {
    arcs: Vec<Option<usize>>,
    elts: BTreeMap<Elt, Elt>,
}

impl<'a> Matcher<'a> {
    fn new(pat: &'a Diagram, host: &'a Diagram) -> Self {
        let pinc = Incidence::new(pat);
        let b = pat.boundary.as_ref().expect("fixtures are tangles");
        let inputs = b.inputs.iter().map(|a| pinc.index[a]).collect();
        let outputs = b.outputs.iter().map(|a| pinc.index[a]).collect();
        Matcher {
            pat,
            host,
            hinc: Incidence::new(host),
            pinc,
            inputs,
            outputs,
        }
    }

    fn pattern_elts(&self) -> Vec<Elt> {
        (0..self.pat.crossings.len())
            .map(Elt::C)
            .chain((0..self.pat.vertices.len()).map(Elt::V))
            .collect()
    }

    /// Two pattern arcs may share an image only when one enters and the other leaves
    /// the pattern (the strand closes up outside it).
    fn may_share(&self, p: usize, q: usize) -> bool {
        let only_in = |x: usize| self.inputs.contains(&x) && !self.outputs.contains(&x);
        let only_out = |x: usize| self.outputs.contains(&x) && !self.inputs.contains(&x);
        (only_in(p) && only_out(q)) || (only_out(p) && only_in(q))
    }

    fn bind_arc(&self, m: &mut Match, p: usize, h: usize) -> bool {
        match m.arcs[p] {
            Some(x) => x == h,
            None => {
                for (q, img) in m.arcs.iter().enumerate() {
                    if *img == Some(h) && !self.may_share(p, q) {
                        return false;
                    }
                }
                m.arcs[p] = Some(h);
                true
            }
        }
    }

    fn bind_elt(&self, m: &mut Match, pe: Elt, he: Elt) -> bool {
        if m.elts.contains_key(&pe) || m.elts.values().any(|&x| x == he) {
            return false;
        }
        let ok_kind = match (pe, he) {
            (Elt::C(a), Elt::C(b)) => self.pat.crossings[a].sign == self.host.crossings[b].sign,
            (Elt::V(a), Elt::V(b)) => self.pat.vertices[a].is_zip() == self.host.vertices[b].is_zip(),
            _ => false,
        };
        if !ok_kind {
            return false;
        }
        m.elts.insert(pe, he);
        let ps = element_slots(self.pat, pe);
        let hs = element_slots(self.host, he);
        for ((_, pa), (_, ha)) in ps.iter().zip(&hs) {
            if !self.bind_arc(m, self.pinc.index[*pa], self.hinc.index[*ha]) {
                return false;
            }
        }
        if let (Elt::C(a), Elt::C(b)) = (pe, he) {
            let po = self.pinc.index[&self.pat.crossings[a].over];
            let ho = self.hinc.index[&self.host.crossings[b].over];
            if !self.bind_arc(m, po, ho) {
                return false;
            }
        }
        true
    }

    /// Host candidates for an unmatched pattern element adjacent to a matched arc.
    fn candidates(&self, m: &Match, pe: Elt) -> Option<Vec<Elt>> {
        for (slot, pa) in element_slots(self.pat, pe) {
            let p = self.pinc.index[pa];
            if let Some(h) = m.arcs[p] {
                let target = if slot.is_source() { self.hinc.source[h] } else { self.hinc.sink[h] };
                return Some(match target {
                    Some((he, hslot)) if hslot == slot => vec![he],
                    _ => vec![],
                });
            }
        }
        if let Elt::C(ci) = pe {
            let p = self.pinc.index[&self.pat.crossings[ci].over];
            if let Some(h) = m.arcs[p] {
                return Some(self.hinc.over[h].iter().map(|&c| Elt::C(c)).collect());
            }
        }
        None
    }

    fn complete(&self, m: Match, out: &mut Vec<Match>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let pending: Vec<Elt> = self.pattern_elts().into_iter().filter(|e| !m.elts.contains_key(e)).collect();
        if pending.is_empty() {
            if self.accept(&m) {
                out.push(m);
            }
            return;
        }
        for pe in pending {
            if let Some(cands) = self.candidates(&m, pe) {
                for he in cands {
                    let mut next = m.clone();
                    if self.bind_elt(&mut next, pe, he) {
                        self.complete(next, out, limit);
                    }
                }
                return;
            }
        }
        // remaining elements are not reachable from the anchored part
    }

    fn accept(&self, m: &Match) -> bool {
        if m.arcs.iter().any(|a| a.is_none()) {
            return false;
        }
        let matched_crossings: BTreeSet<usize> = m
            .elts
            .values()
            .filter_map(|e| if let Elt::C(c) = e { Some(*c) } else { None })
            .collect();
        for p in 0..self.pat.arcs.len() {
            if self.inputs.contains(&p) || self.outputs.contains(&p) {
                continue;
            }
            let h = m.arcs[p].expect("complete");
            if self.hinc.over[h].iter().any(|c| !matched_crossings.contains(c)) {
                return false;
            }
        }
        true
    }

    fn seeded(&self, anchors: &[String], site: &Site) -> Result<Match> {
        let mut m = Match {
            arcs: vec![None; self.pat.arcs.len()],
            elts: BTreeMap::new(),
        };
        if site.arcs.len() != anchors.len() {
            return Err(Error::SiteMismatch(format!(
                "expected {} anchor arcs, got {}",
                anchors.len(),
                site.arcs.len()
            )));
        }
        for (pa, ha) in anchors.iter().zip(&site.arcs) {
            let h = *self
                .hinc
                .index
                .get(ha)
                .ok_or_else(|| Error::SiteMismatch(format!("no arc {ha}")))?;
            if !self.bind_arc(&mut m, self.pinc.index[pa], h) {
                return Err(Error::SiteMismatch(format!("arc {ha} cannot play the role of {pa}")));
            }
        }
        match (site.vertex, self.pat.vertices.len()) {
            (Some(v), 1) => {
                if v >= self.host.vertices.len() || !self.bind_elt(&mut m, Elt::V(0), Elt::V(v)) {
                    return Err(Error::SiteMismatch(format!("vertex {v} does not fit the pattern")));
                }
            }
            (Some(_), _) => return Err(Error::SiteMismatch("this pattern has no vertex".into())),
            (None, 1) => return Err(Error::SiteMismatch("a vertex is required".into())),
            (None, _) => {}
        }
        Ok(m)
    }

    fn site_of(&self, m: &Match, anchors: &[String]) -> Site {
        Site {
            arcs: anchors
                .iter()
                .map(|a| self.host.arcs[m.arcs[self.pinc.index[a]].expect("complete")].clone())
                .collect(),
            vertex: m.elts.get(&Elt::V(0)).map(|e| match e {
                Elt::V(v) => *v,
                Elt::C(_) => unreachable!(),
            }),
            free_loop: false,
        }
    }
}

fn sides(mp: &MovePair, dir: Direction) -> (&Diagram, &Diagram) {
    match dir {
        Direction::Remove => (&mp.lhs, &mp.rhs),
        Direction::Insert => (&mp.rhs, &mp.lhs),
    }
}

fn single_strand(p: &Diagram) -> bool {
    p.arcs.len() == 1 && p.crossings.is_empty() && p.vertices.is_empty()
}

// ---------------------------------------------------------------------------------
// Replacement

fn fresh_name(taken: &BTreeSet<String>, base: &str) -> String {
    (1..)
        .map(|k| format!("{base}.{k}"))
        .find(|s| !taken.contains(s))
        .expect("unbounded")
}

fn rename_in(d: &mut Diagram, from: &str, to: &str) {
    let (from, to) = (from.to_string(), to.to_string());
    d.rename_arcs(|a| if a == from { to.clone() } else { a.to_string() });
    let mut seen = BTreeSet::new();
    d.arcs.retain(|a| seen.insert(a.clone()));
}

fn has_slot(d: &Diagram, arc: &str) -> (bool, bool) {
    let mut src = false;
    let mut snk = false;
    for c in &d.crossings {
        src |= c.under_out == arc;
        snk |= c.under_in == arc;
    }
    for v in &d.vertices {
        src |= v.sources().contains(&arc);
        snk |= v.sinks().contains(&arc);
    }
    if let Some(b) = &d.boundary {
        src |= b.inputs.iter().any(|a| a == arc);
        snk |= b.outputs.iter().any(|a| a == arc);
    }
    (src, snk)
}

/// Moves the sink slot of `arc` (outside the pattern) onto `to`.
fn move_sink(d: &mut Diagram, arc: &str, to: &str) {
    for c in &mut d.crossings {
        if c.under_in == arc {
            c.under_in = to.into();
            return;
        }
    }
    for v in &mut d.vertices {
        match v {
            Vertex::Zip { in_left, in_right, .. } => {
                if in_left == arc {
                    *in_left = to.into();
                    return;
                }
                if in_right == arc {
                    *in_right = to.into();
                    return;
                }
            }
            Vertex::Unzip { input, .. } => {
                if input == arc {
                    *input = to.into();
                    return;
                }
            }
        }
    }
    if let Some(b) = &mut d.boundary {
        for a in &mut b.outputs {
            if a == arc {
                *a = to.into();
                return;
            }
        }
    }
}

fn replace(host: &Diagram, pat: &Diagram, with: &Diagram, arc_map: &[usize], elts: &BTreeSet<Elt>) -> Result<Diagram> {
    let pb = pat.boundary.as_ref().expect("tangle");
    let wb = with.boundary.as_ref().expect("tangle");
    let pidx = pat.arc_index();
    let mut in_d: Vec<String> = pb.inputs.iter().map(|a| host.arcs[arc_map[pidx[a.as_str()]]].clone()).collect();
    let mut out_d: Vec<String> = pb.outputs.iter().map(|a| host.arcs[arc_map[pidx[a.as_str()]]].clone()).collect();

    let mut d = Diagram {
        arcs: Vec::new(),
        crossings: Vec::new(),
        vertices: Vec::new(),
        free_loops: host.free_loops,
        boundary: host.boundary.clone(),
    };
    d.crossings = host
        .crossings
        .iter()
        .enumerate()
        .filter(|(i, _)| !elts.contains(&Elt::C(*i)))
        .map(|(_, c)| c.clone())
        .collect();
    d.vertices = host
        .vertices
        .iter()
        .enumerate()
        .filter(|(i, _)| !elts.contains(&Elt::V(*i)))
        .map(|(_, v)| v.clone())
        .collect();
    let internal: BTreeSet<&str> = pat
        .arcs
        .iter()
        .filter(|a| !pb.inputs.contains(a) && !pb.outputs.contains(a))
        .map(|a| host.arcs[arc_map[pidx[a.as_str()]]].as_str())
        .collect();
    d.arcs = host.arcs.iter().filter(|a| !internal.contains(a.as_str())).cloned().collect();

    let mut taken: BTreeSet<String> = host.arcs.iter().cloned().collect();
    let mut name: BTreeMap<&str, String> = BTreeMap::new();
    let mut added: Vec<String> = Vec::new();
    for wa in &with.arcs {
        let ins: Vec<usize> = (0..wb.inputs.len()).filter(|&i| &wb.inputs[i] == wa).collect();
        let outs: Vec<usize> = (0..wb.outputs.len()).filter(|&j| &wb.outputs[j] == wa).collect();
        let n = match (ins.as_slice(), outs.as_slice()) {
            ([], []) => {
                let f = fresh_name(&taken, wa);
                taken.insert(f.clone());
                added.push(f.clone());
                f
            }
            ([i], []) => in_d[*i].clone(),
            ([], [j]) => out_d[*j].clone(),
            ([i], [j]) => {
                let (a, b) = (in_d[*i].clone(), out_d[*j].clone());
                if a != b {
                    rename_in(&mut d, &b, &a);
                    for x in in_d.iter_mut().chain(out_d.iter_mut()) {
                        if *x == b {
                            *x = a.clone();
                        }
                    }
                    for v in name.values_mut() {
                        if *v == b {
                            *v = a.clone();
                        }
                    }
                }
                a
            }
            _ => return Err(Error::SiteMismatch(format!("boundary arc {wa} used twice"))),
        };
        name.insert(wa.as_str(), n);
    }
    // A strand that was bare in the pattern but is split in the replacement: the
    // output end gets a fresh arc that takes over the outside sink.
    for j in 0..wb.outputs.len() {
        let wa = wb.outputs[j].as_str();
        if wb.inputs.iter().any(|x| x == wa) {
            continue;
        }
        let current = name[wa].clone();
        let also_input = wb
            .inputs
            .iter()
            .any(|x| !wb.outputs.contains(x) && name[x.as_str()] == current);
        if also_input && has_slot(&d, &current).1 {
            let f = fresh_name(&taken, wa);
            taken.insert(f.clone());
            move_sink(&mut d, &current, &f);
            added.push(f.clone());
            name.insert(wa, f);
        }
    }
    let map = |a: &str| name[a].clone();
    for c in &with.crossings {
        d.crossings.push(Crossing {
            sign: c.sign,
            over: map(&c.over),
            under_in: map(&c.under_in),
            under_out: map(&c.under_out),
        });
    }
    for v in &with.vertices {
        let mut v = v.clone();
        v.rename(&|a| map(a));
        d.vertices.push(v);
    }
    d.arcs.extend(added);
    // A strand with no special points left is a free loop.
    let mut keep = Vec::new();
    for a in std::mem::take(&mut d.arcs) {
        let (src, snk) = has_slot(&d, &a);
        if !src && !snk {
            if d.crossings.iter().any(|c| c.over == a) {
                return Err(Error::SiteMismatch(format!(
                    "arc {a} would become a closed over-strand with no special points"
                )));
            }
            d.free_loops += 1;
        } else {
            keep.push(a);
        }
    }
    d.arcs = keep;
    d.validate()?;
    Ok(d)
}

/// Applies a move at a site.
pub fn apply_move(d: &Diagram, id: MoveId, dir: Direction, site: &Site) -> Result<Diagram> {
    let mp = move_fixture(id);
    let (pat, with) = sides(&mp, dir);
    if site.free_loop {
        if !single_strand(pat) {
            return Err(Error::InvalidDirection(format!(
                "{id} {dir:?} does not start from a bare strand"
            )));
        }
        if d.free_loops == 0 {
            return Err(Error::SiteMismatch("no free loop".into()));
        }
        let mut host = d.clone();
        host.free_loops -= 1;
        let taken: BTreeSet<String> = host.arcs.iter().cloned().collect();
        let loop_arc = fresh_name(&taken, "loop");
        host.arcs.push(loop_arc);
        let arc_map = vec![host.arcs.len() - 1];
        return replace(&host, pat, with, &arc_map, &BTreeSet::new());
    }
    let matcher = Matcher::new(pat, d);
    let seed = matcher.seeded(&mp.anchors, site)?;
    let mut found = Vec::new();
    matcher.complete(seed, &mut found, 1);
    let m = found
        .pop()
        .ok_or_else(|| Error::SiteMismatch(format!("{id} {dir:?} pattern does not match at {site:?}")))?;
    let arc_map: Vec<usize> = m.arcs.iter().map(|a| a.expect("complete")).collect();
    let elts: BTreeSet<Elt> = m.elts.values().copied().collect();
    replace(d, pat, with, &arc_map, &elts)
}

/// All sites where a move applies in the given direction, in deterministic order.
pub fn find_sites(d: &Diagram, id: MoveId, dir: Direction) -> Vec<Site> {
    let mp = move_fixture(id);
    let (pat, _) = sides(&mp, dir);
    let mut sites = BTreeSet::new();
    if pat.crossings.is_empty() && pat.vertices.is_empty() {
        // bare strands: every assignment of distinct arcs to the anchors
        let k = mp.anchors.len();
        let n = d.arcs.len();
        let mut idx = vec![0usize; k];
        if n > 0 {
            'outer: loop {
                let distinct: BTreeSet<usize> = idx.iter().copied().collect();
                if distinct.len() == k {
                    let names: Vec<&str> = idx.iter().map(|&i| d.arcs[i].as_str()).collect();
                    sites.insert(Site::arcs(&names));
                }
                for pos in (0..k).rev() {
                    idx[pos] += 1;
                    if idx[pos] < n {
                        continue 'outer;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
        if single_strand(pat) && d.free_loops > 0 {
            sites.insert(Site::free_loop());
        }
        return sites.into_iter().collect();
    }
    let matcher = Matcher::new(pat, d);
    let first = matcher.pattern_elts()[0];
    let hosts: Vec<Elt> = match first {
        Elt::C(_) => (0..d.crossings.len()).map(Elt::C).collect(),
        Elt::V(_) => (0..d.vertices.len()).map(Elt::V).collect(),
    };
    for he in hosts {
        let mut m = Match {
            arcs: vec![None; pat.arcs.len()],
            elts: BTreeMap::new(),
        };
        if !matcher.bind_elt(&mut m, first, he) {
            continue;
        }
        let mut found = Vec::new();
        matcher.complete(m, &mut found, usize::MAX);
        for m in found {
            let site = matcher.site_of(&m, &mp.anchors);
            // the anchored search must find this very match first for the site to be usable
            if apply_move(d, id, dir, &site).is_ok() {
                sites.insert(site);
            }
        }
    }
    sites.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AppliedMove {
    pub move_id: String,
    pub direction: Direction,
    pub site: Site,
}

/// Picks a random applicable move (uniform over applicable move kinds, then over
/// sites) and applies it. `None` when nothing applies.
pub fn random_move<R: Rng + ?Sized>(d: &Diagram, rng: &mut R, allow_vertex_moves: bool) -> Option<(Diagram, AppliedMove)> {
    let mut options: Vec<(MoveId, Direction, Vec<Site>)> = Vec::new();
    for id in MoveId::ALL {
        if !allow_vertex_moves && !id.is_classical() {
            continue;
        }
        for dir in [Direction::Insert, Direction::Remove] {
            let sites = find_sites(d, id, dir);
            if !sites.is_empty() {
                options.push((id, dir, sites));
            }
        }
    }
    let (id, dir, sites) = options.choose(rng)?;
    let site = sites.choose(rng)?.clone();
    let next = apply_move(d, *id, *dir, &site).ok()?;
    Some((
        next,
        AppliedMove {
            move_id: id.to_string(),
            direction: *dir,
            site,
        },
    ))
}
