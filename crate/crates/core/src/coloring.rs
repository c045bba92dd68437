//! Colorings of diagrams by quandles, qualgebras and squandles.
//!
//! Three modes: `Qualgebra` (zip out = in_left ◇ in_right, unzip in = out_left ◇
//! out_right), `Isosceles` (qualgebra rule plus equal co-oriented arcs) and
//! `Squandle` (equal co-oriented arcs, third arc their square). A bare quandle can
//! color vertex-free diagrams in any mode.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{Elem, Structure};
use crate::diagram::{Diagram, Sign, Vertex};
use crate::error::{Error, Result};
use crate::moves::MovePair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Qualgebra,
    Isosceles,
    Squandle,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Qualgebra => "qualgebra",
            Mode::Isosceles => "isosceles",
            Mode::Squandle => "squandle",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "qualgebra" => Ok(Mode::Qualgebra),
            "isosceles" => Ok(Mode::Isosceles),
            "squandle" => Ok(Mode::Squandle),
            other => Err(Error::ModeMismatch(format!("unknown mode {other}"))),
        }
    }
}

/// A coloring: one color per arc, plus one per free loop.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Coloring {
    pub assignment: BTreeMap<String, Elem>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub loop_colors: Vec<Elem>,
    pub mode: Mode,
}

impl Coloring {
    pub fn color(&self, arc: &str) -> Option<Elem> {
        self.assignment.get(arc).copied()
    }
}

#[derive(Clone, Copy, Debug)]
enum Constraint {
    /// uo = ui ⊲^sign ov
    Cross { ui: usize, ov: usize, uo: usize, sign: Sign },
    /// o = l ◇ r
    Bin { l: usize, r: usize, o: usize },
    /// a = b and o = f(a), with f the square (or a ◇ a in isosceles mode)
    Sq { a: usize, b: usize, o: usize },
}

/// The constraint system of a diagram colored in a given mode.
struct System<'a> {
    s: &'a Structure,
    n: usize,
    arcs: usize,
    constraints: Vec<Constraint>,
    square: Vec<Elem>,
}

fn check_mode(s: &Structure, d: &Diagram, mode: Mode) -> Result<()> {
    let ok = match (s, mode) {
        (Structure::Quandle(_), _) => d.vertices.is_empty(),
        (Structure::Qualgebra(_), Mode::Qualgebra | Mode::Isosceles) => true,
        (Structure::Squandle(_), Mode::Squandle) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ModeMismatch(format!(
            "a {} cannot color this diagram in {mode} mode",
            s.kind()
        )))
    }
}

impl<'a> System<'a> {
    fn new(s: &'a Structure, d: &Diagram, mode: Mode) -> Result<Self> {
        check_mode(s, d, mode)?;
        let idx = d.arc_index();
        let at = |a: &str| -> Result<usize> { idx.get(a).copied().ok_or_else(|| Error::UnknownArc(a.to_string())) };
        let mut constraints = Vec::new();
        for c in &d.crossings {
            constraints.push(Constraint::Cross {
                ui: at(&c.under_in)?,
                ov: at(&c.over)?,
                uo: at(&c.under_out)?,
                sign: c.sign,
            });
        }
        for v in &d.vertices {
            let (l, r, o) = v.legs();
            let (l, r, o) = (at(l)?, at(r)?, at(o)?);
            constraints.push(match mode {
                Mode::Qualgebra => Constraint::Bin { l, r, o },
                Mode::Isosceles | Mode::Squandle => Constraint::Sq { a: l, b: r, o },
            });
        }
        let square = match (s, mode) {
            (Structure::Qualgebra(q), Mode::Isosceles) => (0..q.n()).map(|a| q.diamond(a, a)).collect(),
            (Structure::Squandle(q), _) => q.square_table().to_vec(),
            _ => Vec::new(),
        };
        Ok(System {
            s,
            n: s.n(),
            arcs: d.arcs.len(),
            constraints,
            square,
        })
    }

    fn diamond(&self, a: Elem, b: Elem) -> Elem {
        match self.s {
            Structure::Qualgebra(q) => q.diamond(a, b),
            _ => unreachable!("Bin constraints only arise for qualgebras"),
        }
    }

    /// Candidate values for the one unknown arc of a constraint, when exactly one is
    /// unknown. `None` when the constraint has zero or several unknowns.
    fn options(&self, c: &Constraint, col: &[Option<Elem>]) -> Option<(usize, Vec<Elem>)> {
        let q = self.s.quandle();
        match *c {
            Constraint::Cross { ui, ov, uo, sign } => match (col[ui], col[ov], col[uo]) {
                (Some(a), Some(b), None) => Some((uo, vec![q.act(a, b, sign)])),
                (None, Some(b), Some(o)) => Some((ui, vec![q.act(o, b, sign.flip())])),
                (Some(a), None, Some(o)) if ui != ov && ov != uo => {
                    Some((ov, (0..self.n).filter(|&x| q.act(a, x, sign) == o).collect()))
                }
                _ => None,
            },
            Constraint::Bin { l, r, o } => match (col[l], col[r], col[o]) {
                (Some(a), Some(b), None) => Some((o, vec![self.diamond(a, b)])),
                (Some(a), None, Some(v)) if r != l && r != o => {
                    Some((r, (0..self.n).filter(|&x| self.diamond(a, x) == v).collect()))
                }
                (None, Some(b), Some(v)) if l != r && l != o => {
                    Some((l, (0..self.n).filter(|&x| self.diamond(x, b) == v).collect()))
                }
                _ => None,
            },
            Constraint::Sq { a, b, o } => match (col[a], col[b], col[o]) {
                (Some(x), None, _) => Some((b, vec![x])),
                (None, Some(x), _) => Some((a, vec![x])),
                (Some(x), Some(_), None) => Some((o, vec![self.square[x]])),
                (None, None, Some(v)) if a != o && b != o => {
                    Some((a, (0..self.n).filter(|&x| self.square[x] == v).collect()))
                }
                _ => None,
            },
        }
    }

    fn satisfied(&self, c: &Constraint, col: &[Option<Elem>]) -> bool {
        let q = self.s.quandle();
        match *c {
            Constraint::Cross { ui, ov, uo, sign } => match (col[ui], col[ov], col[uo]) {
                (Some(a), Some(b), Some(o)) => q.act(a, b, sign) == o,
                _ => true,
            },
            Constraint::Bin { l, r, o } => match (col[l], col[r], col[o]) {
                (Some(a), Some(b), Some(v)) => self.diamond(a, b) == v,
                _ => true,
            },
            Constraint::Sq { a, b, o } => match (col[a], col[b], col[o]) {
                (Some(x), Some(y), Some(v)) => x == y && self.square[x] == v,
                (Some(x), Some(y), None) => x == y,
                _ => true,
            },
        }
    }

    /// Applies every forced value until a fixed point. `false` on contradiction.
    fn propagate(&self, col: &mut [Option<Elem>]) -> bool {
        loop {
            let mut changed = false;
            for c in &self.constraints {
                if !self.satisfied(c, col) {
                    return false;
                }
                if let Some((arc, opts)) = self.options(c, col) {
                    match opts.as_slice() {
                        [] => return false,
                        [v] => {
                            col[arc] = Some(*v);
                            changed = true;
                        }
                        _ => {}
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&self, mut col: Vec<Option<Elem>>, out: &mut Vec<Vec<Elem>>) {
        if !self.propagate(&mut col) {
            return;
        }
        let branch = self
            .constraints
            .iter()
            .filter_map(|c| self.options(c, &col))
            .find(|(_, o)| o.len() > 1);
        let (arc, opts) = match branch {
            Some(b) => b,
            None => match col.iter().position(Option::is_none) {
                Some(arc) => (arc, (0..self.n).collect()),
                None => {
                    out.push(col.into_iter().map(|c| c.expect("complete")).collect());
                    return;
                }
            },
        };
        for v in opts {
            let mut next = col.clone();
            next[arc] = Some(v);
            self.search(next, out);
        }
    }

    fn solve(&self, fixed: &[Option<Elem>]) -> Vec<Vec<Elem>> {
        let mut out = Vec::new();
        self.search(fixed.to_vec(), &mut out);
        out.sort();
        out
    }
}

/// All arc colorings of `d` (free loops excluded), as color vectors in `d.arcs`
/// order, sorted.
pub fn arc_solutions(s: &Structure, d: &Diagram, mode: Mode) -> Result<Vec<Vec<Elem>>> {
    let sys = System::new(s, d, mode)?;
    Ok(sys.solve(&vec![None; sys.arcs]))
}

fn solutions_with(s: &Structure, d: &Diagram, mode: Mode, fix: &BTreeMap<String, Elem>) -> Result<Vec<Vec<Elem>>> {
    let sys = System::new(s, d, mode)?;
    let idx = d.arc_index();
    let mut start = vec![None; sys.arcs];
    for (a, &v) in fix {
        let i = *idx.get(a.as_str()).ok_or_else(|| Error::UnknownArc(a.clone()))?;
        if v >= sys.n {
            return Err(Error::InvalidTable(format!("color {v} outside carrier of size {}", sys.n)));
        }
        start[i] = Some(v);
    }
    Ok(sys.solve(&start))
}

/// Enumerates all colorings extending `fix`, sorted by arc name then color.
pub fn enumerate_colorings(
    s: &Structure,
    d: &Diagram,
    mode: Mode,
    fix: Option<&BTreeMap<String, Elem>>,
) -> Result<Vec<Coloring>> {
    let empty = BTreeMap::new();
    let sols = solutions_with(s, d, mode, fix.unwrap_or(&empty))?;
    let n = s.n();
    let loops: Vec<Vec<Elem>> = (0..d.free_loops).fold(vec![Vec::new()], |acc, _| {
        acc.iter()
            .flat_map(|p| {
                (0..n).map(move |c| {
                    let mut p = p.clone();
                    p.push(c);
                    p
                })
            })
            .collect()
    });
    let mut out = Vec::with_capacity(sols.len() * loops.len());
    for sol in &sols {
        let assignment: BTreeMap<String, Elem> = d.arcs.iter().cloned().zip(sol.iter().copied()).collect();
        for lc in &loops {
            out.push(Coloring {
                assignment: assignment.clone(),
                loop_colors: lc.clone(),
                mode,
            });
        }
    }
    out.sort();
    Ok(out)
}

/// `n^free_loops`, checked.
pub(crate) fn loop_factor(n: usize, loops: usize) -> Result<u128> {
    (n as u128)
        .checked_pow(loops as u32)
        .filter(|_| loops <= u32::MAX as usize)
        .ok_or_else(|| Error::Overflow(format!("{n}^{loops} colorings")))
}

pub fn count_colorings(s: &Structure, d: &Diagram, mode: Mode) -> Result<u128> {
    let sols = arc_solutions(s, d, mode)?.len() as u128;
    sols.checked_mul(loop_factor(s.n(), d.free_loops)?)
        .ok_or_else(|| Error::Overflow("coloring count".into()))
}

pub fn count_isosceles(q: &crate::algebra::FiniteQualgebra, d: &Diagram) -> Result<u128> {
    count_colorings(&Structure::Qualgebra(q.clone()), d, Mode::Isosceles)
}

/// Boundary colors of a tangle coloring: (inputs, outputs) by position.
pub(crate) fn boundary_colors(d: &Diagram, sol: &[Elem]) -> (Vec<Elem>, Vec<Elem>) {
    let idx = d.arc_index();
    let b = d.boundary.as_ref().expect("tangle");
    (
        b.inputs.iter().map(|a| sol[idx[a.as_str()]]).collect(),
        b.outputs.iter().map(|a| sol[idx[a.as_str()]]).collect(),
    )
}

pub(crate) type BoundaryKey = (Vec<Elem>, Vec<Elem>);

fn boundary_histogram(s: &Structure, t: &Diagram, mode: Mode) -> Result<HashMap<BoundaryKey, u128>> {
    let mut h = HashMap::new();
    for sol in arc_solutions(s, t, mode)? {
        *h.entry(boundary_colors(t, &sol)).or_insert(0) += 1;
    }
    Ok(h)
}

/// A boundary coloring with different numbers of extensions on the two sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryMismatch {
    pub inputs: Vec<Elem>,
    pub outputs: Vec<Elem>,
    pub lhs_extensions: u128,
    pub rhs_extensions: u128,
}

/// `None` when every boundary coloring extends the same number of times to both
/// sides of the move; otherwise the least offending boundary coloring.
pub fn check_topological(s: &Structure, mp: &MovePair, mode: Mode) -> Result<Option<BoundaryMismatch>> {
    let l = boundary_histogram(s, &mp.lhs, mode)?;
    let r = boundary_histogram(s, &mp.rhs, mode)?;
    let mut bad: Vec<BoundaryMismatch> = l
        .keys()
        .chain(r.keys())
        .filter_map(|k| {
            let (a, b) = (l.get(k).copied().unwrap_or(0), r.get(k).copied().unwrap_or(0));
            (a != b).then(|| BoundaryMismatch {
                inputs: k.0.clone(),
                outputs: k.1.clone(),
                lhs_extensions: a,
                rhs_extensions: b,
            })
        })
        .collect();
    bad.sort_by(|x, y| (&x.inputs, &x.outputs).cmp(&(&y.inputs, &y.outputs)));
    Ok(bad.into_iter().next())
}

/// Modes a structure can color vertex diagrams in.
pub fn modes_for(s: &Structure) -> Vec<Mode> {
    match s {
        Structure::Quandle(_) => vec![Mode::Qualgebra],
        Structure::Qualgebra(_) => vec![Mode::Qualgebra, Mode::Isosceles],
        Structure::Squandle(_) => vec![Mode::Squandle],
    }
}

/// Whether a vertex is isosceles-colored (its co-oriented arcs share a color).
pub fn is_isosceles_vertex(v: &Vertex, c: &Coloring) -> bool {
    let (l, r, _) = v.legs();
    c.color(l) == c.color(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{group_qualgebra, squandle_of, FiniteQualgebra, GroupTable, Quandle};
    use crate::builtins::{builtin_structure, p_qualgebra};
    use crate::diagram::builtin_diagram;
    use crate::moves::{all_fixtures, move_fixture, MoveId};

    fn st(name: &str) -> Structure {
        builtin_structure(name).unwrap()
    }

    #[test]
    fn unknot_has_n_colorings_in_every_mode() {
        let u = builtin_diagram("unknot").unwrap();
        for name in ["P_qs-q_qq-s", "SQ4_s3sq", "Z3_dihedral", "S3"] {
            let s = st(name);
            for m in modes_for(&s) {
                assert_eq!(count_colorings(&s, &u, m).unwrap(), s.n() as u128);
                assert_eq!(enumerate_colorings(&s, &u, m, None).unwrap().len(), s.n());
            }
        }
    }

    #[test]
    fn trefoil_by_dihedral_three() {
        let t = builtin_diagram("trefoil").unwrap();
        assert_eq!(count_colorings(&st("Z3_dihedral"), &t, Mode::Qualgebra).unwrap(), 9);
    }

    #[test]
    fn quandles_refuse_vertices_and_kinds_must_match_modes() {
        let th = builtin_diagram("theta_st").unwrap();
        assert!(matches!(
            count_colorings(&st("Z3_dihedral"), &th, Mode::Qualgebra),
            Err(Error::ModeMismatch(_))
        ));
        assert!(matches!(
            count_colorings(&st("P_qs-q_qq-s"), &th, Mode::Squandle),
            Err(Error::ModeMismatch(_))
        ));
        assert!(matches!(
            count_colorings(&st("SQ4_s3sq"), &th, Mode::Isosceles),
            Err(Error::ModeMismatch(_))
        ));
    }

    #[test]
    fn theta_st_with_p() {
        let th = builtin_diagram("theta_st").unwrap();
        let p = p_qualgebra(1, 3);
        assert_eq!(count_isosceles(&p, &th).unwrap(), 4);
        assert_eq!(count_colorings(&Structure::Qualgebra(p), &th, Mode::Qualgebra).unwrap(), 16);
    }

    #[test]
    fn fixed_boundary_restricts_enumeration() {
        let s = st("P_qs-q_qq-s");
        let d = builtin_diagram("cuff_st").unwrap();
        let all = enumerate_colorings(&s, &d, Mode::Qualgebra, None).unwrap();
        let mut fix = BTreeMap::new();
        fix.insert("b".to_string(), 0);
        let some = enumerate_colorings(&s, &d, Mode::Qualgebra, Some(&fix)).unwrap();
        assert_eq!(some, all.iter().filter(|c| c.color("b") == Some(0)).cloned().collect::<Vec<_>>());
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn isosceles_matches_squandle_of() {
        for name in ["P_qs-p_qq-q", "S3", "Z3"] {
            let q = st(name).as_qualgebra().unwrap().clone();
            let sq = Structure::Squandle(squandle_of(&q));
            for dn in crate::diagram::BUILTIN_DIAGRAMS {
                let d = builtin_diagram(dn).unwrap();
                assert_eq!(
                    count_isosceles(&q, &d).unwrap(),
                    count_colorings(&sq, &d, Mode::Squandle).unwrap(),
                    "{name} {dn}"
                );
            }
        }
    }

    #[test]
    fn broken_commutativity_is_detected_on_r5z() {
        // P quandle with a diamond that fails QA_Comm; built without validation
        let p = p_qualgebra(1, 3);
        let mut t = p.diamond_table().clone();
        t[0][1] = 0;
        assert!(FiniteQualgebra::new(p.quandle().clone(), t.clone()).is_err());
        let bad = Structure::Qualgebra(FiniteQualgebra::unchecked(p.quandle().clone(), t));
        let w = check_topological(&bad, &move_fixture(MoveId::R5z), Mode::Qualgebra).unwrap();
        assert!(w.is_some());
    }

    #[test]
    fn group_structures_are_topological() {
        let s3 = Structure::Qualgebra(group_qualgebra(&GroupTable::symmetric(3).unwrap()));
        for mp in all_fixtures() {
            for m in modes_for(&s3) {
                assert_eq!(check_topological(&s3, &mp, m).unwrap(), None, "{} {m}", mp.move_id);
            }
        }
        let z3 = Structure::Quandle(Quandle::dihedral(3).unwrap());
        for mp in all_fixtures().into_iter().filter(|m| m.move_id.is_classical()) {
            assert_eq!(check_topological(&z3, &mp, Mode::Qualgebra).unwrap(), None);
        }
    }
}
