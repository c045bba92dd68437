//! Finite quandles, qualgebras, squandles and group tables.
//!
//! Elements are dense indices `0..n`. Every table is row-major with the row indexed by
//! the left argument, so `lhd[a][b] = a ⊲ b` and `diamond[a][b] = a ◇ b`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diagram::Sign;
use crate::error::{Error, Result};

pub type Elem = usize;
pub type Table = Vec<Vec<Elem>>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Carrier {
    n: usize,
    names: Option<Vec<String>>,
}

impl Carrier {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("carrier must be nonempty".into()));
        }
        Ok(Carrier { n, names: None })
    }

    pub fn with_names(names: Vec<String>) -> Result<Self> {
        let mut c = Carrier::new(names.len())?;
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::InvalidTable("element names must be distinct".into()));
        }
        c.names = Some(names);
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn name(&self, a: Elem) -> String {
        match &self.names {
            Some(v) => v[a].clone(),
            None => a.to_string(),
        }
    }

    /// Looks an element up by display name, falling back to its decimal index.
    pub fn index_of(&self, name: &str) -> Option<Elem> {
        if let Some(v) = &self.names {
            if let Some(i) = v.iter().position(|x| x == name) {
                return Some(i);
            }
        }
        name.parse::<usize>().ok().filter(|&i| i < self.n)
    }

    /// Carrier of the sub-structure on `elems`, keeping display names.
    pub fn restrict(&self, elems: &[Elem]) -> Carrier {
        Carrier {
            n: elems.len(),
            names: self
                .names
                .as_ref()
                .map(|v| elems.iter().map(|&e| v[e].clone()).collect()),
        }
    }
}

fn check_square(t: &Table, n: usize, what: &str) -> Result<()> {
    if t.len() != n || t.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidTable(format!("{what} table must be {n}x{n}")));
    }
    if t.iter().flatten().any(|&x| x >= n) {
        return Err(Error::InvalidTable(format!("{what} table has entries outside 0..{n}")));
    }
    Ok(())
}

fn violation(axiom: &str, witness: &[Elem]) -> Error {
    Error::AxiomViolation {
        axiom: axiom.to_string(),
        witness: witness.to_vec(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Quandle,
    Qualgebra,
    Squandle,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Quandle => "quandle",
            Kind::Qualgebra => "qualgebra",
            Kind::Squandle => "squandle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quandle {
    carrier: Carrier,
    lhd: Table,
    lhd_inv: Table,
}

impl Quandle {
    pub fn new(carrier: Carrier, lhd: Table) -> Result<Self> {
        let n = carrier.n();
        check_square(&lhd, n, "lhd")?;
        let mut lhd_inv = vec![vec![0; n]; n];
        for b in 0..n {
            let mut seen = vec![false; n];
            for a in 0..n {
                let x = lhd[a][b];
                if seen[x] {
                    return Err(Error::NonBijectiveTranslation { column: b });
                }
                seen[x] = true;
                lhd_inv[x][b] = a;
            }
        }
        for a in 0..n {
            if lhd[a][a] != a {
                return Err(violation("Q_Idem", &[a]));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if lhd_inv[lhd[a][b]][b] != a || lhd[lhd_inv[a][b]][b] != a {
                    return Err(violation("Q_Inv", &[a, b]));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if lhd[lhd[a][b]][c] != lhd[lhd[a][c]][lhd[b][c]] {
                        return Err(violation("Q_SD", &[a, b, c]));
                    }
                }
            }
        }
        Ok(Quandle { carrier, lhd, lhd_inv })
    }

    pub fn trivial(n: usize) -> Self {
        let lhd = (0..n).map(|a| vec![a; n]).collect();
        Quandle::new(Carrier::new(n).expect("n >= 1"), lhd).expect("trivial quandle")
    }

    /// Dihedral quandle on Z/n: a ⊲ b = 2b − a.
    pub fn dihedral(n: usize) -> Result<Self> {
        let lhd = (0..n)
            .map(|a| (0..n).map(|b| (2 * b + n - a) % n).collect())
            .collect();
        Quandle::new(Carrier::new(n)?, lhd)
    }

    pub fn n(&self) -> usize {
        self.carrier.n()
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    #[inline]
    pub fn lhd(&self, a: Elem, b: Elem) -> Elem {
        self.lhd[a][b]
    }

    #[inline]
    pub fn lhd_inv(&self, a: Elem, b: Elem) -> Elem {
        self.lhd_inv[a][b]
    }

    /// `a ⊲ b` for `Plus`, `a ⊲̃ b` for `Minus`.
    #[inline]
    pub fn act(&self, a: Elem, b: Elem, sign: Sign) -> Elem {
        match sign {
            Sign::Plus => self.lhd[a][b],
            Sign::Minus => self.lhd_inv[a][b],
        }
    }

    pub fn lhd_table(&self) -> &Table {
        &self.lhd
    }

    pub fn lhd_inv_table(&self) -> &Table {
        &self.lhd_inv
    }

    /// The right translation S_b : x ↦ x ⊲ b.
    pub fn translation(&self, b: Elem) -> Vec<Elem> {
        (0..self.n()).map(|x| self.lhd[x][b]).collect()
    }

    pub fn is_trivial(&self) -> bool {
        (0..self.n()).all(|a| (0..self.n()).all(|b| self.lhd[a][b] == a))
    }

    pub fn with_carrier(mut self, carrier: Carrier) -> Result<Self> {
        if carrier.n() != self.n() {
            return Err(Error::InvalidTable("carrier size changed".into()));
        }
        self.carrier = carrier;
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteQualgebra {
    quandle: Quandle,
    diamond: Table,
}

impl FiniteQualgebra {
    pub fn new(quandle: Quandle, diamond: Table) -> Result<Self> {
        let n = quandle.n();
        check_square(&diamond, n, "diamond")?;
        let l = &quandle.lhd;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if l[a][diamond[b][c]] != l[l[a][b]][c] {
                        return Err(violation("QA_Comp", &[a, b, c]));
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if l[diamond[a][b]][c] != diamond[l[a][c]][l[b][c]] {
                        return Err(violation("QA_D", &[a, b, c]));
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if diamond[a][b] != diamond[b][l[a][b]] {
                    return Err(violation("QA_Comm", &[a, b]));
                }
            }
        }
        Ok(FiniteQualgebra { quandle, diamond })
    }

    /// Skips axiom checks; only for exercising failure paths.
    #[doc(hidden)]
    pub fn unchecked(quandle: Quandle, diamond: Table) -> Self {
        FiniteQualgebra { quandle, diamond }
    }

    pub fn quandle(&self) -> &Quandle {
        &self.quandle
    }

    pub fn n(&self) -> usize {
        self.quandle.n()
    }

    #[inline]
    pub fn diamond(&self, a: Elem, b: Elem) -> Elem {
        self.diamond[a][b]
    }

    pub fn diamond_table(&self) -> &Table {
        &self.diamond
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteSquandle {
    quandle: Quandle,
    square: Vec<Elem>,
}

impl FiniteSquandle {
    pub fn new(quandle: Quandle, square: Vec<Elem>) -> Result<Self> {
        let n = quandle.n();
        if square.len() != n || square.iter().any(|&x| x >= n) {
            return Err(Error::InvalidTable(format!("square must have {n} entries in 0..{n}")));
        }
        let l = &quandle.lhd;
        for a in 0..n {
            for b in 0..n {
                if l[a][square[b]] != l[l[a][b]][b] {
                    return Err(violation("SQ_1", &[a, b]));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if l[square[a]][b] != square[l[a][b]] {
                    return Err(violation("SQ_2", &[a, b]));
                }
            }
        }
        Ok(FiniteSquandle { quandle, square })
    }

    #[doc(hidden)]
    pub fn unchecked(quandle: Quandle, square: Vec<Elem>) -> Self {
        FiniteSquandle { quandle, square }
    }

    pub fn quandle(&self) -> &Quandle {
        &self.quandle
    }

    pub fn n(&self) -> usize {
        self.quandle.n()
    }

    #[inline]
    pub fn square(&self, a: Elem) -> Elem {
        self.square[a]
    }

    pub fn square_table(&self) -> &[Elem] {
        &self.square
    }
}

/// The squandle (Q, ⊲, a ↦ a◇a) underlying a qualgebra.
pub fn squandle_of(q: &FiniteQualgebra) -> FiniteSquandle {
    let square = (0..q.n()).map(|a| q.diamond(a, a)).collect();
    FiniteSquandle::new(q.quandle.clone(), square).expect("QA_Comp and QA_D imply SQ_1 and SQ_2")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    carrier: Carrier,
    mul: Table,
    unit: Elem,
    inv: Vec<Elem>,
}

impl GroupTable {
    /// Validates associativity and finds the unit and inverses.
    pub fn new(carrier: Carrier, mul: Table) -> Result<Self> {
        let n = carrier.n();
        check_square(&mul, n, "mul")?;
        let unit = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or_else(|| violation("group unit", &[]))?;
        let mut inv = vec![0; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a][b] == unit && mul[b][a] == unit)
                .ok_or_else(|| violation("group inverse", &[a]))?;
        }
        Self::with_unit_inv(carrier, mul, unit, inv)
    }

    pub fn with_unit_inv(carrier: Carrier, mul: Table, unit: Elem, inv: Vec<Elem>) -> Result<Self> {
        let n = carrier.n();
        check_square(&mul, n, "mul")?;
        if unit >= n || inv.len() != n || inv.iter().any(|&x| x >= n) {
            return Err(Error::InvalidTable("unit or inverse table out of range".into()));
        }
        for a in 0..n {
            if mul[unit][a] != a || mul[a][unit] != a {
                return Err(violation("group unit", &[a]));
            }
            if mul[a][inv[a]] != unit || mul[inv[a]][a] != unit {
                return Err(violation("group inverse", &[a]));
            }
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(violation("group associativity", &[a, b, c]));
                    }
                }
            }
        }
        Ok(GroupTable { carrier, mul, unit, inv })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        GroupTable::new(Carrier::new(n)?, mul)
    }

    /// The group generated by the given permutations of {0..k-1}. Products compose left
    /// to right: `σ·τ` applies σ first. Elements are sorted by image vector, so the
    /// identity comes first; names use 1-based cycle notation.
    pub fn from_permutations(gens: &[Vec<usize>]) -> Result<Self> {
        let k = gens.first().map(|g| g.len()).unwrap_or(0);
        let id: Vec<usize> = (0..k).collect();
        let mut elems: BTreeSet<Vec<usize>> = BTreeSet::new();
        elems.insert(id);
        let mut frontier: Vec<Vec<usize>> = elems.iter().cloned().collect();
        while let Some(p) = frontier.pop() {
            for g in gens {
                let prod: Vec<usize> = (0..k).map(|x| g[p[x]]).collect();
                if elems.insert(prod.clone()) {
                    frontier.push(prod);
                }
            }
        }
        let elems: Vec<Vec<usize>> = elems.into_iter().collect();
        let index = |p: &Vec<usize>| elems.binary_search(p).expect("closed under products");
        let mul = elems
            .iter()
            .map(|s| {
                elems
                    .iter()
                    .map(|t| index(&(0..k).map(|x| t[s[x]]).collect()))
                    .collect()
            })
            .collect();
        let names = elems.iter().map(|p| cycle_notation(p)).collect();
        GroupTable::new(Carrier::with_names(names)?, mul)
    }

    pub fn symmetric(k: usize) -> Result<Self> {
        if k < 2 {
            return GroupTable::from_permutations(&[vec![0]]);
        }
        let mut transposition: Vec<usize> = (0..k).collect();
        transposition.swap(0, 1);
        let cycle: Vec<usize> = (0..k).map(|x| (x + 1) % k).collect();
        GroupTable::from_permutations(&[transposition, cycle])
    }

    pub fn n(&self) -> usize {
        self.carrier.n()
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a][b]
    }

    pub fn mul_table(&self) -> &Table {
        &self.mul
    }

    pub fn unit(&self) -> Elem {
        self.unit
    }

    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a]
    }

    pub fn inv_table(&self) -> &[Elem] {
        &self.inv
    }

    fn conjugation(&self) -> Quandle {
        let n = self.n();
        let lhd = (0..n)
            .map(|a| (0..n).map(|b| self.mul[self.mul[self.inv[b]][a]][b]).collect())
            .collect();
        Quandle::new(self.carrier.clone(), lhd).expect("conjugation is a quandle")
    }
}

/// 1-based cycle notation, e.g. `(1 2 3)`; the identity prints as `Id`.
pub fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cyc = vec![start + 1];
        seen[start] = true;
        let mut x = p[start];
        while x != start {
            seen[x] = true;
            cyc.push(x + 1);
            x = p[x];
        }
        let parts: Vec<String> = cyc.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("({})", parts.join(" ")));
    }
    if out.is_empty() {
        "Id".into()
    } else {
        out
    }
}

/// a ⊲ b = b⁻¹ab, a ◇ b = ab.
pub fn group_qualgebra(g: &GroupTable) -> FiniteQualgebra {
    FiniteQualgebra::new(g.conjugation(), g.mul.clone()).expect("group qualgebra axioms")
}

/// Conjugation together with a ↦ a·a.
pub fn group_squandle(g: &GroupTable) -> FiniteSquandle {
    let square = (0..g.n()).map(|a| g.mul[a][a]).collect();
    FiniteSquandle::new(g.conjugation(), square).expect("group squandle axioms")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    Quandle(Quandle),
    Qualgebra(FiniteQualgebra),
    Squandle(FiniteSquandle),
}

impl Structure {
    pub fn kind(&self) -> Kind {
        match self {
            Structure::Quandle(_) => Kind::Quandle,
            Structure::Qualgebra(_) => Kind::Qualgebra,
            Structure::Squandle(_) => Kind::Squandle,
        }
    }

    pub fn quandle(&self) -> &Quandle {
        match self {
            Structure::Quandle(q) => q,
            Structure::Qualgebra(q) => q.quandle(),
            Structure::Squandle(q) => q.quandle(),
        }
    }

    pub fn n(&self) -> usize {
        self.quandle().n()
    }

    pub fn carrier(&self) -> &Carrier {
        self.quandle().carrier()
    }

    pub fn as_qualgebra(&self) -> Result<&FiniteQualgebra> {
        match self {
            Structure::Qualgebra(q) => Ok(q),
            other => Err(Error::KindMismatch {
                expected: "qualgebra".into(),
                found: other.kind().to_string(),
            }),
        }
    }

    pub fn as_squandle(&self) -> Result<&FiniteSquandle> {
        match self {
            Structure::Squandle(q) => Ok(q),
            other => Err(Error::KindMismatch {
                expected: "squandle".into(),
                found: other.kind().to_string(),
            }),
        }
    }

    /// Applies every operation of the structure to (a, b), for closure computations.
    fn products(&self, a: Elem, b: Elem, out: &mut Vec<Elem>) {
        let q = self.quandle();
        out.push(q.lhd(a, b));
        out.push(q.lhd_inv(a, b));
        match self {
            Structure::Quandle(_) => {}
            Structure::Qualgebra(qa) => out.push(qa.diamond(a, b)),
            Structure::Squandle(sq) => {
                out.push(sq.square(a));
                out.push(sq.square(b));
            }
        }
    }

    /// The sub-structure on a closed subset, relabelled to `0..elems.len()`.
    pub fn restrict(&self, elems: &[Elem]) -> Result<Structure> {
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &e) in elems.iter().enumerate() {
            pos[e] = i;
        }
        let map = |x: Elem| -> Result<Elem> {
            match pos[x] {
                usize::MAX => Err(Error::InvalidTable("subset is not closed".into())),
                i => Ok(i),
            }
        };
        let q = self.quandle();
        let mut lhd = Vec::with_capacity(elems.len());
        for &a in elems {
            lhd.push(elems.iter().map(|&b| map(q.lhd(a, b))).collect::<Result<Vec<_>>>()?);
        }
        let sub_q = Quandle::new(q.carrier().restrict(elems), lhd)?;
        Ok(match self {
            Structure::Quandle(_) => Structure::Quandle(sub_q),
            Structure::Qualgebra(qa) => {
                let mut d = Vec::with_capacity(elems.len());
                for &a in elems {
                    d.push(elems.iter().map(|&b| map(qa.diamond(a, b))).collect::<Result<Vec<_>>>()?);
                }
                Structure::Qualgebra(FiniteQualgebra::new(sub_q, d)?)
            }
            Structure::Squandle(sq) => {
                let s = elems.iter().map(|&a| map(sq.square(a))).collect::<Result<Vec<_>>>()?;
                Structure::Squandle(FiniteSquandle::new(sub_q, s)?)
            }
        })
    }
}

/// Smallest subset containing `seed` and closed under every operation of `s`, together
/// with the induced sub-structure.
pub fn closure(s: &Structure, seed: &[Elem]) -> Result<(Vec<Elem>, Structure)> {
    if seed.is_empty() {
        return Err(Error::InvalidTable("closure seed must be nonempty".into()));
    }
    if let Some(&bad) = seed.iter().find(|&&x| x >= s.n()) {
        return Err(Error::InvalidTable(format!("seed element {bad} outside carrier")));
    }
    let mut inside = vec![false; s.n()];
    let mut members: Vec<Elem> = Vec::new();
    for &x in seed {
        if !inside[x] {
            inside[x] = true;
            members.push(x);
        }
    }
    let mut buf = Vec::new();
    let mut i = 0;
    // Every new member is paired with all earlier ones (in both orders) exactly once.
    while i < members.len() {
        let a = members[i];
        for j in 0..=i {
            let b = members[j];
            buf.clear();
            s.products(a, b, &mut buf);
            s.products(b, a, &mut buf);
            for &x in &buf {
                if !inside[x] {
                    inside[x] = true;
                    members.push(x);
                }
            }
        }
        i += 1;
    }
    members.sort_unstable();
    let sub = s.restrict(&members)?;
    Ok((members, sub))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalData {
    pub translation: Vec<Elem>,
    pub fix: Vec<Elem>,
    pub stab: Vec<Elem>,
    pub generated: Vec<Elem>,
}

pub fn local_data(s: &Structure, a: Elem) -> Result<LocalData> {
    let q = s.quandle();
    if a >= q.n() {
        return Err(Error::InvalidTable(format!("element {a} outside carrier")));
    }
    let fix = (0..q.n()).filter(|&x| q.lhd(x, a) == x).collect();
    let stab = (0..q.n()).filter(|&x| q.lhd(a, x) == a).collect();
    let (generated, _) = closure(s, &[a])?;
    Ok(LocalData {
        translation: q.translation(a),
        fix,
        stab,
        generated,
    })
}

/// Whether `subset` is closed under every operation of `s`.
pub fn is_closed(s: &Structure, subset: &[Elem]) -> bool {
    let mut inside = vec![false; s.n()];
    for &x in subset {
        inside[x] = true;
    }
    let mut buf = Vec::new();
    for &a in subset {
        for &b in subset {
            buf.clear();
            s.products(a, b, &mut buf);
            if buf.iter().any(|&x| !inside[x]) {
                return false;
            }
        }
    }
    true
}

/// Wire format shared by the CLI and the fixtures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureJson {
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhd: Option<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diamond: Option<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub square: Option<Vec<Elem>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mul: Option<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Elem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inv: Option<Vec<Elem>>,
}

impl StructureJson {
    fn carrier(&self) -> Result<Carrier> {
        match &self.names {
            Some(names) if names.len() != self.n => {
                Err(Error::InvalidTable("names length differs from n".into()))
            }
            Some(names) => Carrier::with_names(names.clone()),
            None => Carrier::new(self.n),
        }
    }

    fn field<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
        v.clone()
            .ok_or_else(|| Error::InvalidTable(format!("missing field {name}")))
    }

    /// Builds the structure. A `group` table becomes its group qualgebra, or its group
    /// squandle when `group_as` is `Kind::Squandle`.
    pub fn into_structure(self, group_as: Kind) -> Result<Structure> {
        let carrier = self.carrier()?;
        match self.kind.as_str() {
            "quandle" => Ok(Structure::Quandle(Quandle::new(carrier, Self::field(&self.lhd, "lhd")?)?)),
            "qualgebra" => {
                let q = Quandle::new(carrier, Self::field(&self.lhd, "lhd")?)?;
                Ok(Structure::Qualgebra(FiniteQualgebra::new(q, Self::field(&self.diamond, "diamond")?)?))
            }
            "squandle" => {
                let q = Quandle::new(carrier, Self::field(&self.lhd, "lhd")?)?;
                Ok(Structure::Squandle(FiniteSquandle::new(q, Self::field(&self.square, "square")?)?))
            }
            "group" => {
                let mul = Self::field(&self.mul, "mul")?;
                let g = match (self.unit, &self.inv) {
                    (Some(u), Some(inv)) => GroupTable::with_unit_inv(carrier, mul, u, inv.clone())?,
                    _ => GroupTable::new(carrier, mul)?,
                };
                Ok(match group_as {
                    Kind::Squandle => Structure::Squandle(group_squandle(&g)),
                    _ => Structure::Qualgebra(group_qualgebra(&g)),
                })
            }
            other => Err(Error::InvalidTable(format!("unknown structure kind {other}"))),
        }
    }

    pub fn from_structure(s: &Structure) -> Self {
        let q = s.quandle();
        let mut j = StructureJson {
            kind: s.kind().to_string(),
            n: q.n(),
            names: q.carrier().names().map(|v| v.to_vec()),
            lhd: Some(q.lhd_table().clone()),
            diamond: None,
            square: None,
            mul: None,
            unit: None,
            inv: None,
        };
        match s {
            Structure::Quandle(_) => {}
            Structure::Qualgebra(qa) => j.diamond = Some(qa.diamond_table().clone()),
            Structure::Squandle(sq) => j.square = Some(sq.square_table().to_vec()),
        }
        j
    }

    pub fn from_group(g: &GroupTable) -> Self {
        StructureJson {
            kind: "group".into(),
            n: g.n(),
            names: g.carrier().names().map(|v| v.to_vec()),
            lhd: None,
            diamond: None,
            square: None,
            mul: Some(g.mul_table().clone()),
            unit: Some(g.unit()),
            inv: Some(g.inv_table().to_vec()),
        }
    }
}

impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StructureJson::from_structure(self).serialize(s)
    }
}

/// Sorted cycle lengths of a permutation.
pub fn cycle_type(p: &[Elem]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for i in 0..p.len() {
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len > 0 {
            out.push(len);
        }
    }
    out.sort_unstable();
    out
}

fn fingerprint(s: &Structure, a: Elem) -> (Vec<usize>, usize, usize, bool, bool) {
    let q = s.quandle();
    let fix = (0..q.n()).filter(|&x| q.lhd(x, a) == x).count();
    let stab = (0..q.n()).filter(|&x| q.lhd(a, x) == a).count();
    let (idem, unary) = match s {
        Structure::Quandle(_) => (true, true),
        Structure::Qualgebra(qa) => (qa.diamond(a, a) == a, (0..q.n()).any(|b| qa.diamond(a, b) == a)),
        Structure::Squandle(sq) => (sq.square(a) == a, sq.square(sq.square(a)) == sq.square(a)),
    };
    (cycle_type(&q.translation(a)), fix, stab, idem, unary)
}

/// A bijection `f` (as `f[a]`) with `f(op_A(x, y)) = op_B(f(x), f(y))` for every
/// operation, or `None`.
pub fn find_isomorphism(a: &Structure, b: &Structure) -> Result<Option<Vec<Elem>>> {
    if a.kind() != b.kind() {
        return Err(Error::KindMismatch {
            expected: a.kind().to_string(),
            found: b.kind().to_string(),
        });
    }
    let n = a.n();
    if b.n() != n {
        return Ok(None);
    }
    let fa: Vec<_> = (0..n).map(|x| fingerprint(a, x)).collect();
    let fb: Vec<_> = (0..n).map(|x| fingerprint(b, x)).collect();
    let mut sa = fa.clone();
    let mut sb = fb.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return Ok(None);
    }
    let mut f = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(iso_search(a, b, &fa, &fb, 0, &mut f, &mut used).then_some(f))
}

fn binary_ops(s: &Structure) -> Vec<&Table> {
    let mut ops = vec![s.quandle().lhd_table()];
    if let Structure::Qualgebra(q) = s {
        ops.push(q.diamond_table());
    }
    ops
}

fn consistent(a: &Structure, b: &Structure, k: usize, f: &[Elem], used: &[bool]) -> bool {
    // value op_B(fx, fy) for op_A(x, y) = z must be f(z) if z is mapped, else unused
    let ok = |z: Elem, w: Elem| if f[z] != usize::MAX { f[z] == w } else { !used[w] };
    for (ta, tb) in binary_ops(a).into_iter().zip(binary_ops(b)) {
        for x in 0..=k {
            for y in 0..=k {
                if !ok(ta[x][y], tb[f[x]][f[y]]) {
                    return false;
                }
            }
        }
    }
    if let (Structure::Squandle(sa), Structure::Squandle(sb)) = (a, b) {
        for x in 0..=k {
            if !ok(sa.square(x), sb.square(f[x])) {
                return false;
            }
        }
    }
    true
}

fn iso_search<F: PartialEq>(
    a: &Structure,
    b: &Structure,
    fa: &[F],
    fb: &[F],
    k: usize,
    f: &mut Vec<Elem>,
    used: &mut Vec<bool>,
) -> bool {
    let n = a.n();
    if k == n {
        return true;
    }
    for c in 0..n {
        if used[c] || fa[k] != fb[c] {
            continue;
        }
        f[k] = c;
        used[c] = true;
        if consistent(a, b, k, f, used) && iso_search(a, b, fa, fb, k + 1, f, used) {
            return true;
        }
        used[c] = false;
        f[k] = usize::MAX;
    }
    false
}
