//! Cocycle weights of colored diagrams and their multisets.
//!
//! A positive crossing contributes +χ(under_in, over), a negative one
//! −χ(under_out, over); a zip contributes −λ(in_left, in_right) and an unzip
//! +λ(out_left, out_right) (squandles: ∓λ of the shared color).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::algebra::{Elem, Kind, Structure};
use crate::cohomology::{is_cocycle, CocyclePair};
use crate::coloring::{arc_solutions, boundary_colors, loop_factor, BoundaryKey, Coloring, Mode};
use crate::diagram::{Diagram, Sign, Vertex};
use crate::error::{Error, Result};
use crate::moves::MovePair;

/// Multiset of weights; doubles as the polynomial Σ t^W (exponent → coefficient).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WeightMultiset {
    pub counts: BTreeMap<i128, u128>,
}

impl WeightMultiset {
    pub fn total(&self) -> u128 {
        self.counts.values().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.counts.keys().all(|&w| w == 0)
    }

    fn add(&mut self, w: i128, k: u128) -> Result<()> {
        let e = self.counts.entry(w).or_insert(0);
        *e = e.checked_add(k).ok_or_else(|| Error::Overflow("weight multiplicity".into()))?;
        Ok(())
    }

    /// Polynomial rendering such as `3 + 2t^2 + t^-1`, highest exponent last.
    pub fn polynomial(&self) -> String {
        let terms: Vec<String> = self
            .counts
            .iter()
            .map(|(&e, &c)| {
                let mono = match e {
                    0 => String::new(),
                    1 => "t".into(),
                    e => format!("t^{e}"),
                };
                match (c, mono.is_empty()) {
                    (c, true) => c.to_string(),
                    (1, false) => mono,
                    (c, false) => format!("{c}{mono}"),
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

impl fmt::Display for WeightMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.polynomial())
    }
}

fn check_pairing(cp: &CocyclePair, d: &Diagram, mode: Mode) -> Result<()> {
    let ok = match cp.kind {
        Kind::Qualgebra => matches!(mode, Mode::Qualgebra | Mode::Isosceles),
        Kind::Squandle => mode == Mode::Squandle,
        Kind::Quandle => d.vertices.is_empty(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::ModeMismatch(format!("a {} cocycle cannot weigh {mode} colorings", cp.kind)))
    }
}

/// Weight of a coloring given as colors in `d.arcs` order.
pub(crate) fn weight_of(d: &Diagram, colors: &[Elem], cp: &CocyclePair) -> Result<i128> {
    let idx = d.arc_index();
    let col = |a: &str| -> Result<Elem> {
        let c = *colors.get(idx[a]).ok_or_else(|| Error::UnknownArc(a.to_string()))?;
        if c >= cp.n() {
            return Err(Error::ShapeMismatch(format!("color {c} outside cocycle of size {}", cp.n())));
        }
        Ok(c)
    };
    let mut w: i128 = 0;
    for c in &d.crossings {
        w += match c.sign {
            Sign::Plus => i128::from(cp.chi(col(&c.under_in)?, col(&c.over)?)),
            Sign::Minus => -i128::from(cp.chi(col(&c.under_out)?, col(&c.over)?)),
        };
    }
    for v in &d.vertices {
        let (l, r, _) = v.legs();
        let (l, r) = (col(l)?, col(r)?);
        let lam = match cp.kind {
            Kind::Squandle => cp.lambda1(l),
            _ => cp.lambda2(l, r),
        };
        w += match v {
            Vertex::Zip { .. } => -i128::from(lam),
            Vertex::Unzip { .. } => i128::from(lam),
        };
    }
    Ok(w)
}

/// Weight of a coloring of `d`.
pub fn weight(d: &Diagram, c: &Coloring, cp: &CocyclePair) -> Result<i128> {
    check_pairing(cp, d, c.mode)?;
    let colors = d
        .arcs
        .iter()
        .map(|a| c.color(a).ok_or_else(|| Error::UnknownArc(a.clone())))
        .collect::<Result<Vec<_>>>()?;
    weight_of(d, &colors, cp)
}

/// The mode a cocycle of this kind weighs by default.
pub fn default_mode(kind: Kind) -> Mode {
    match kind {
        Kind::Squandle => Mode::Squandle,
        _ => Mode::Qualgebra,
    }
}

/// Weights over all colorings in `mode`. Refuses non-cocycles.
pub fn weight_multiset_in(s: &Structure, cp: &CocyclePair, d: &Diagram, mode: Mode) -> Result<WeightMultiset> {
    if !is_cocycle(s, cp)? {
        return Err(Error::NotACocycle("weights of a non-cocycle are not invariants".into()));
    }
    weight_multiset_unchecked(s, cp, d, mode)
}

pub(crate) fn weight_multiset_unchecked(s: &Structure, cp: &CocyclePair, d: &Diagram, mode: Mode) -> Result<WeightMultiset> {
    check_pairing(cp, d, mode)?;
    let loops = loop_factor(s.n(), d.free_loops)?;
    let mut ms = WeightMultiset::default();
    for sol in arc_solutions(s, d, mode)? {
        ms.add(weight_of(d, &sol, cp)?, loops)?;
    }
    Ok(ms)
}

/// Weight multiset in the cocycle's default mode.
pub fn weight_multiset(s: &Structure, cp: &CocyclePair, d: &Diagram) -> Result<WeightMultiset> {
    weight_multiset_in(s, cp, d, default_mode(cp.kind))
}

/// A boundary coloring whose extensions carry different weights on the two sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightMismatch {
    pub inputs: Vec<Elem>,
    pub outputs: Vec<Elem>,
    pub lhs_weights: Vec<i128>,
    pub rhs_weights: Vec<i128>,
}

fn weights_by_boundary(s: &Structure, cp: &CocyclePair, t: &Diagram, mode: Mode) -> Result<HashMap<BoundaryKey, Vec<i128>>> {
    let mut h: HashMap<BoundaryKey, Vec<i128>> = HashMap::new();
    for sol in arc_solutions(s, t, mode)? {
        h.entry(boundary_colors(t, &sol)).or_default().push(weight_of(t, &sol, cp)?);
    }
    for v in h.values_mut() {
        v.sort_unstable();
    }
    Ok(h)
}

/// `None` when, for every boundary coloring, the weights of its extensions agree on
/// both sides of the move.
pub fn check_boltzmann(s: &Structure, cp: &CocyclePair, mp: &MovePair, mode: Mode) -> Result<Option<WeightMismatch>> {
    cp.check_shape(s)?;
    check_pairing(cp, &mp.lhs, mode)?;
    let l = weights_by_boundary(s, cp, &mp.lhs, mode)?;
    let r = weights_by_boundary(s, cp, &mp.rhs, mode)?;
    let mut bad: Vec<WeightMismatch> = l
        .keys()
        .chain(r.keys())
        .filter_map(|k| {
            let (a, b) = (l.get(k).cloned().unwrap_or_default(), r.get(k).cloned().unwrap_or_default());
            (a != b).then(|| WeightMismatch {
                inputs: k.0.clone(),
                outputs: k.1.clone(),
                lhs_weights: a,
                rhs_weights: b,
            })
        })
        .collect();
    bad.sort_by(|x, y| (&x.inputs, &x.outputs).cmp(&(&y.inputs, &y.outputs)));
    Ok(bad.into_iter().next())
}

/// weight(cp1 + cp2) = weight(cp1) + weight(cp2) on one coloring.
pub fn linearity_check(d: &Diagram, c: &Coloring, cp1: &CocyclePair, cp2: &CocyclePair) -> Result<bool> {
    let sum = cp1.checked_add(cp2)?;
    Ok(weight(d, c, &sum)? == weight(d, c, cp1)? + weight(d, c, cp2)?)
}
