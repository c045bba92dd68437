//! ⊲-terms over a free alphabet, product forms, semi-commutativity shifts, the tail
//! relation, and evaluation into the free group.
//!
//! Text syntax: `a<+b<-c` is a⊲b⊲̃c (left-associated); factors of a product are
//! joined by `*`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::diagram::Sign;
use crate::error::{Error, Result};

pub type Gen = String;

/// a₀ ⊲^{ε₁} a₁ ⋯ ⊲^{ε_r} a_r
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LdTerm {
    pub head: Gen,
    pub ops: Vec<(Sign, Gen)>,
}

impl LdTerm {
    pub fn gen(a: &str) -> Self {
        LdTerm {
            head: a.to_string(),
            ops: Vec::new(),
        }
    }

    pub fn with(mut self, sign: Sign, a: &str) -> Self {
        self.ops.push((sign, a.to_string()));
        self
    }

    pub fn is_generator(&self, g: &str) -> bool {
        self.ops.is_empty() && self.head == g
    }

    pub fn is_reduced(&self) -> bool {
        if self.ops.first().is_some_and(|(_, a)| *a == self.head) {
            return false;
        }
        !self.ops.windows(2).any(|w| w[0].1 == w[1].1 && w[0].0 != w[1].0)
    }

    /// t ⊲^sign t′, unreduced: x ⊲ (y ⊲ w) = x ⊲̃ w ⊲ y ⊲ w (and mirrored).
    pub fn act(&self, sign: Sign, by: &LdTerm) -> LdTerm {
        let mut ops = self.ops.clone();
        ops.extend(inverse(&by.ops));
        ops.push((sign, by.head.clone()));
        ops.extend(by.ops.iter().cloned());
        LdTerm {
            head: self.head.clone(),
            ops,
        }
    }
}

fn inverse(w: &[(Sign, Gen)]) -> Vec<(Sign, Gen)> {
    w.iter().rev().map(|(s, a)| (s.flip(), a.clone())).collect()
}

impl fmt::Display for LdTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.head)?;
        for (s, a) in &self.ops {
            write!(f, "<{s}{a}")?;
        }
        Ok(())
    }
}

fn valid_gen(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

impl FromStr for LdTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<LdTerm> {
        let s = s.trim();
        let mut parts = s.split('<');
        let head = parts.next().unwrap_or_default().trim();
        if !valid_gen(head) {
            return Err(Error::Parse(format!("bad term {s:?}")));
        }
        let mut t = LdTerm::gen(head);
        for p in parts {
            let p = p.trim();
            let (sign, rest) = match p.chars().next() {
                Some('+') => (Sign::Plus, &p[1..]),
                Some('-') => (Sign::Minus, &p[1..]),
                _ => return Err(Error::Parse(format!("expected <+ or <- in {s:?}"))),
            };
            let rest = rest.trim();
            if !valid_gen(rest) {
                return Err(Error::Parse(format!("bad generator {rest:?} in {s:?}")));
            }
            t = t.with(sign, rest);
        }
        Ok(t)
    }
}

/// Free reduction of the operations, then removal of leading operations by the head
/// itself (a ⊲^± a = a).
pub fn reduce_term(t: &LdTerm) -> LdTerm {
    let mut ops: Vec<(Sign, Gen)> = Vec::with_capacity(t.ops.len());
    for op in &t.ops {
        match ops.last() {
            Some(last) if last.1 == op.1 && last.0 != op.0 => {
                ops.pop();
            }
            _ => ops.push(op.clone()),
        }
    }
    let skip = ops.iter().take_while(|(_, a)| *a == t.head).count();
    LdTerm {
        head: t.head.clone(),
        ops: ops.split_off(skip),
    }
}

fn require_reduced(t: &LdTerm) -> Result<()> {
    if t.is_reduced() {
        Ok(())
    } else {
        Err(Error::NotReduced(t.to_string()))
    }
}

fn tail_with(t: &LdTerm, t2: &LdTerm, join: Sign) -> Result<bool> {
    require_reduced(t)?;
    require_reduced(t2)?;
    let k = t.ops.len();
    if t2.ops.len() < k + 1 {
        return Ok(false);
    }
    let cut = t2.ops.len() - k - 1;
    if t2.ops[cut] != (join, t.head.clone()) || t2.ops[cut + 1..] != t.ops[..] {
        return Ok(false);
    }
    let before = if cut == 0 { &t2.head } else { &t2.ops[cut - 1].1 };
    Ok(*before != t.head)
}

/// Whether t′ = (b₀ ⊲^{ζ₁} b₁ ⋯ ⊲^{ζ_s} b_s) ⊲ t with b_s ≠ a₀, both reduced.
pub fn is_tail(t: &LdTerm, t2: &LdTerm) -> Result<bool> {
    tail_with(t, t2, Sign::Plus)
}

/// As [`is_tail`] with a joining ⊲̃.
pub fn is_neg_tail(t: &LdTerm, t2: &LdTerm) -> Result<bool> {
    tail_with(t, t2, Sign::Minus)
}

/// t₁ ◇ t₂ ◇ ⋯ ◇ t_n
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductForm {
    pub factors: Vec<LdTerm>,
}

impl ProductForm {
    pub fn new(factors: Vec<LdTerm>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Parse("empty product".into()));
        }
        for f in &factors {
            require_reduced(f)?;
        }
        Ok(ProductForm { factors })
    }

    /// Reduces every factor.
    pub fn reduced(factors: Vec<LdTerm>) -> Result<Self> {
        ProductForm::new(factors.iter().map(reduce_term).collect())
    }
}

impl fmt::Display for ProductForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(" * "))
    }
}

impl FromStr for ProductForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<ProductForm> {
        let factors = s.split('*').map(str::parse).collect::<Result<Vec<LdTerm>>>()?;
        ProductForm::reduced(factors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    Positive,
    Negative,
}

/// Positive: tᵢ ◇ tᵢ₊₁ → tᵢ₊₁ ◇ red(tᵢ ⊲ tᵢ₊₁). Negative: tᵢ ◇ tᵢ₊₁ → red(tᵢ₊₁ ⊲̃ tᵢ) ◇ tᵢ.
/// Positions are 1-based.
pub fn shift(p: &ProductForm, i: usize, dir: ShiftDirection) -> Result<ProductForm> {
    let len = p.factors.len();
    if i == 0 || i >= len {
        return Err(Error::PositionOutOfRange { pos: i, len });
    }
    let (a, b) = (&p.factors[i - 1], &p.factors[i]);
    let (x, y) = match dir {
        ShiftDirection::Positive => (b.clone(), reduce_term(&a.act(Sign::Plus, b))),
        ShiftDirection::Negative => (reduce_term(&b.act(Sign::Minus, a)), a.clone()),
    };
    let mut factors = p.factors.clone();
    factors[i - 1] = x;
    factors[i] = y;
    Ok(ProductForm { factors })
}

/// Freely reduced group word: (generator, exponent ±1).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupWord(pub Vec<(Gen, i8)>);

impl GroupWord {
    fn push(&mut self, g: &str, e: i8) {
        match self.0.last() {
            Some((h, f)) if h == g && *f == -e => {
                self.0.pop();
            }
            _ => self.0.push((g.to_string(), e)),
        }
    }

    fn extend(&mut self, w: &GroupWord) {
        for (g, e) in &w.0 {
            self.push(g, *e);
        }
    }

    fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().rev().map(|(g, e)| (g.clone(), -e)).collect())
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (g, e) in &self.0 {
            f.write_str(g)?;
            if *e < 0 {
                f.write_str("⁻¹")?;
            }
        }
        Ok(())
    }
}

fn term_to_group(t: &LdTerm) -> GroupWord {
    // x ⊲ y = y⁻¹ x y, x ⊲̃ y = y x y⁻¹
    let mut w = GroupWord(vec![(t.head.clone(), 1)]);
    for (s, a) in &t.ops {
        let y = GroupWord(vec![(a.clone(), 1)]);
        let (l, r) = match s {
            Sign::Plus => (y.inverse(), y),
            Sign::Minus => (y.clone(), y.inverse()),
        };
        let mut next = GroupWord(Vec::new());
        next.extend(&l);
        next.extend(&w);
        next.extend(&r);
        w = next;
    }
    w
}

/// ⊲ as conjugation b⁻¹ab, ◇ as multiplication.
pub fn to_free_group(p: &ProductForm) -> GroupWord {
    let mut w = GroupWord(Vec::new());
    for t in &p.factors {
        w.extend(&term_to_group(t));
    }
    w
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub position: usize,
    pub direction: ShiftDirection,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent(Vec<Step>),
    DistinctAtDepth(usize),
}

/// Breadth-first search over shifts, up to `depth` steps.
pub fn bounded_equivalence(p: &ProductForm, q: &ProductForm, depth: usize) -> Equivalence {
    if p.factors.len() != q.factors.len() {
        return Equivalence::DistinctAtDepth(0);
    }
    let mut parent: HashMap<ProductForm, Option<(ProductForm, Step)>> = HashMap::new();
    parent.insert(p.clone(), None);
    let mut frontier = VecDeque::from([(p.clone(), 0usize)]);
    while let Some((cur, d)) = frontier.pop_front() {
        if cur == *q {
            let mut path = Vec::new();
            let mut at = cur;
            while let Some(Some((prev, step))) = parent.get(&at).cloned() {
                path.push(step);
                at = prev;
            }
            path.reverse();
            return Equivalence::Equivalent(path);
        }
        if d == depth {
            continue;
        }
        for i in 1..cur.factors.len() {
            for dir in [ShiftDirection::Positive, ShiftDirection::Negative] {
                let next = shift(&cur, i, dir).expect("position in range");
                if !parent.contains_key(&next) {
                    parent.insert(next.clone(), Some((cur.clone(), Step { position: i, direction: dir })));
                    frontier.push_back((next, d + 1));
                }
            }
        }
    }
    Equivalence::DistinctAtDepth(depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TailReport {
    pub ok: bool,
    /// Products visited, along the positive and the negative chains.
    pub visited: usize,
    pub failure: Option<String>,
}

/// Follows the positive and the negative shift chains of a two-factor product for
/// `depth` steps. Checks that no factor equals the generator `g`, that each positive
/// step keeps the old second factor as a tail of the new one, and mirrored for
/// negative steps with first factors and ⊲̃.
pub fn tail_invariant_check(p: &ProductForm, g: &str, depth: usize) -> Result<TailReport> {
    if p.factors.len() != 2 {
        return Err(Error::PositionOutOfRange {
            pos: 1,
            len: p.factors.len(),
        });
    }
    let hits = |x: &ProductForm| x.factors.iter().any(|t| t.is_generator(g));
    let fail = |visited, msg: String| {
        Ok(TailReport {
            ok: false,
            visited,
            failure: Some(msg),
        })
    };
    let mut visited = 1;
    if hits(p) {
        return fail(visited, format!("{p} already has the factor {g}"));
    }
    for dir in [ShiftDirection::Positive, ShiftDirection::Negative] {
        let mut cur = p.clone();
        for step in 1..=depth {
            let next = shift(&cur, 1, dir)?;
            visited += 1;
            if hits(&next) {
                return fail(visited, format!("{dir:?} step {step} reaches the factor {g}: {next}"));
            }
            let kept = match dir {
                ShiftDirection::Positive => is_tail(&cur.factors[1], &next.factors[1])?,
                ShiftDirection::Negative => is_neg_tail(&cur.factors[0], &next.factors[0])?,
            };
            if !kept {
                return fail(visited, format!("{dir:?} step {step} breaks the tail relation: {cur} -> {next}"));
            }
            cur = next;
        }
    }
    Ok(TailReport {
        ok: true,
        visited,
        failure: None,
    })
}

/// The two sides of the relation (b⊲a) ◇ (a⊲b) = ((a⊲̃b)⊲a) ◇ b.
pub fn relation_sides() -> (ProductForm, ProductForm) {
    let lhs = "b<+a * a<+b".parse().expect("valid");
    let rhs = "a<-b<+a * b".parse().expect("valid");
    (lhs, rhs)
}
