//! Enumeration of small qualgebras and squandles up to isomorphism.
//!
//! Quandles are enumerated first (columns are permutations fixing their own index,
//! filtered by self-distributivity) and reduced to canonical forms; each canonical
//! quandle is then extended by all ◇ tables or square maps, which are canonicalized
//! under the quandle's automorphism group.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::algebra::{Carrier, Elem, FiniteQualgebra, FiniteSquandle, Kind, Quandle, Structure, Table};
use crate::error::{Error, Result};

pub const DEFAULT_BUDGET_SECONDS: u64 = 60;

struct Budget {
    deadline: Instant,
    seconds: u64,
    n: usize,
    ticks: u32,
}

impl Budget {
    fn new(n: usize, seconds: u64) -> Self {
        Budget {
            deadline: Instant::now() + Duration::from_secs(seconds),
            seconds,
            n,
            ticks: 0,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(4096) && Instant::now() > self.deadline {
            return Err(Error::SizeTooLarge {
                n: self.n,
                budget_seconds: self.seconds,
            });
        }
        Ok(())
    }
}

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    let mut p: Vec<Elem> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

fn relabel_table(t: &Table, s: &[Elem]) -> Table {
    let n = t.len();
    let mut out = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            out[s[a]][s[b]] = s[t[a][b]];
        }
    }
    out
}

fn relabel_map(m: &[Elem], s: &[Elem]) -> Vec<Elem> {
    let mut out = vec![0; m.len()];
    for a in 0..m.len() {
        out[s[a]] = s[m[a]];
    }
    out
}

fn check_sd_partial(cols: &[Vec<Elem>], k: usize) -> bool {
    // columns 0..=k known; lhd[a][b] = cols[b][a]
    for b in 0..=k {
        for c in 0..=k {
            let bc = cols[c][b];
            if bc > k {
                continue;
            }
            if b != k && c != k && bc != k {
                continue;
            }
            for a in 0..cols.len() {
                if cols[c][cols[b][a]] != cols[bc][cols[c][a]] {
                    return false;
                }
            }
        }
    }
    true
}

fn quandle_search(
    n: usize,
    perms: &[Vec<Elem>],
    cols: &mut Vec<Vec<Elem>>,
    out: &mut Vec<Table>,
    budget: &mut Budget,
) -> Result<()> {
    let k = cols.len();
    if k == n {
        out.push((0..n).map(|a| (0..n).map(|b| cols[b][a]).collect()).collect());
        return Ok(());
    }
    for p in perms.iter().filter(|p| p[k] == k) {
        budget.tick()?;
        cols.push(p.clone());
        let mut padded = cols.clone();
        padded.resize(n, Vec::new());
        if check_sd_partial(&padded, k) {
            quandle_search(n, perms, cols, out, budget)?;
        }
        cols.pop();
    }
    Ok(())
}

fn labeled_quandles(n: usize, budget: &mut Budget) -> Result<Vec<Table>> {
    let perms = permutations(n);
    let mut out = Vec::new();
    quandle_search(n, &perms, &mut Vec::new(), &mut out, budget)?;
    Ok(out)
}

/// Every quandle table on 0..n (labeled, not up to isomorphism).
pub fn all_quandle_tables(n: usize, budget_seconds: u64) -> Result<Vec<Table>> {
    if n == 0 {
        return Err(Error::InvalidTable("size must be at least 1".into()));
    }
    labeled_quandles(n, &mut Budget::new(n, budget_seconds))
}

/// Canonical quandles of size n, one per isomorphism class, sorted.
pub fn enumerate_quandles(n: usize, budget_seconds: u64) -> Result<Vec<Quandle>> {
    if n == 0 {
        return Err(Error::InvalidTable("size must be at least 1".into()));
    }
    let mut budget = Budget::new(n, budget_seconds);
    let perms = permutations(n);
    let mut canon = BTreeSet::new();
    for t in labeled_quandles(n, &mut budget)? {
        let mut best: Option<Table> = None;
        for s in &perms {
            budget.tick()?;
            let r = relabel_table(&t, s);
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        }
        canon.insert(best.expect("n ≥ 1"));
    }
    canon
        .into_iter()
        .map(|t| Quandle::new(Carrier::new(n)?, t))
        .collect()
}

fn automorphisms(q: &Quandle, perms: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    perms
        .iter()
        .filter(|s| relabel_table(q.lhd_table(), s) == *q.lhd_table())
        .cloned()
        .collect()
}

struct DiamondSearch<'a> {
    q: &'a Quandle,
    n: usize,
    cand: Vec<Vec<bool>>,
}

impl DiamondSearch<'_> {
    fn new(q: &Quandle) -> DiamondSearch<'_> {
        let n = q.n();
        // QA_Comp: x ⊲ (a◇b) = (x⊲a)⊲b for all x
        let cand = (0..n * n)
            .map(|ab| {
                let (a, b) = (ab / n, ab % n);
                (0..n)
                    .map(|d| (0..n).all(|x| q.lhd(x, d) == q.lhd(q.lhd(x, a), b)))
                    .collect()
            })
            .collect();
        DiamondSearch { q, n, cand }
    }

    fn assign(&self, t: &mut [Option<Elem>], a: Elem, b: Elem, v: Elem) -> bool {
        let n = self.n;
        let q = self.q;
        let mut work = vec![(a, b, v)];
        while let Some((a, b, v)) = work.pop() {
            let cell = a * n + b;
            match t[cell] {
                Some(w) if w == v => continue,
                Some(_) => return false,
                None => {}
            }
            if !self.cand[cell][v] {
                return false;
            }
            t[cell] = Some(v);
            for c in 0..n {
                work.push((q.lhd(a, c), q.lhd(b, c), q.lhd(v, c)));
                work.push((q.lhd_inv(a, c), q.lhd_inv(b, c), q.lhd_inv(v, c)));
            }
            work.push((b, q.lhd(a, b), v));
            work.push((q.lhd_inv(b, a), a, v));
        }
        true
    }

    /// Calls `visit` on every complete table, flattened row-major.
    fn search(
        &self,
        t: Vec<Option<Elem>>,
        visit: &mut dyn FnMut(&[Elem]) -> Result<()>,
        budget: &mut Budget,
    ) -> Result<()> {
        let n = self.n;
        let Some(cell) = t.iter().position(Option::is_none) else {
            let flat: Vec<Elem> = t.iter().map(|x| x.expect("full")).collect();
            return visit(&flat);
        };
        for v in 0..n {
            if !self.cand[cell][v] {
                continue;
            }
            budget.tick()?;
            let mut next = t.clone();
            if self.assign(&mut next, cell / n, cell % n, v) {
                self.search(next, visit, budget)?;
            }
        }
        Ok(())
    }
}

fn unflatten(flat: &[Elem], n: usize) -> Table {
    flat.chunks(n).map(<[Elem]>::to_vec).collect()
}

/// Least relabeling of a flat table under the given permutations (which must include
/// the identity).
fn canonical_flat(t: &[Elem], n: usize, perms: &[Vec<Elem>], buf: &mut Vec<Elem>) -> Vec<Elem> {
    let mut best = t.to_vec();
    buf.resize(n * n, 0);
    for s in perms {
        for a in 0..n {
            for b in 0..n {
                buf[s[a] * n + s[b]] = s[t[a * n + b]];
            }
        }
        if buf[..] < best[..] {
            best.copy_from_slice(buf);
        }
    }
    best
}

fn qualgebrizations_within(q: &Quandle, budget: &mut Budget) -> Result<Vec<Table>> {
    let s = DiamondSearch::new(q);
    let mut out = Vec::new();
    s.search(
        vec![None; q.n() * q.n()],
        &mut |flat| {
            let table = unflatten(flat, q.n());
            if FiniteQualgebra::new(q.clone(), table.clone()).is_ok() {
                out.push(table);
            }
            Ok(())
        },
        budget,
    )?;
    out.sort();
    Ok(out)
}

/// All ◇ tables completing `q` into a qualgebra (not up to isomorphism), sorted.
pub fn qualgebrizations(q: &Quandle) -> Vec<Table> {
    qualgebrizations_within(q, &mut Budget::new(q.n(), u64::MAX / 4)).expect("no deadline")
}

fn squandlizations_within(q: &Quandle, budget: &mut Budget) -> Result<Vec<Vec<Elem>>> {
    let n = q.n();
    // SQ_1: x ⊲ a² = (x⊲a)⊲a
    let cand: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|d| (0..n).all(|x| q.lhd(x, d) == q.lhd(q.lhd(x, a), a))).collect())
        .collect();
    fn assign(q: &Quandle, cand: &[Vec<bool>], sq: &mut [Option<Elem>], a: Elem, v: Elem) -> bool {
        let mut work = vec![(a, v)];
        while let Some((a, v)) = work.pop() {
            match sq[a] {
                Some(w) if w == v => continue,
                Some(_) => return false,
                None => {}
            }
            if !cand[a][v] {
                return false;
            }
            sq[a] = Some(v);
            // SQ_2: (a⊲b)² = a²⊲b
            for b in 0..q.n() {
                work.push((q.lhd(a, b), q.lhd(v, b)));
                work.push((q.lhd_inv(a, b), q.lhd_inv(v, b)));
            }
        }
        true
    }
    fn search(
        q: &Quandle,
        cand: &[Vec<bool>],
        sq: Vec<Option<Elem>>,
        out: &mut Vec<Vec<Elem>>,
        budget: &mut Budget,
    ) -> Result<()> {
        let Some(a) = sq.iter().position(Option::is_none) else {
            let m: Vec<Elem> = sq.into_iter().map(|x| x.expect("full")).collect();
            if FiniteSquandle::new(q.clone(), m.clone()).is_ok() {
                out.push(m);
            }
            return Ok(());
        };
        for v in 0..q.n() {
            budget.tick()?;
            let mut next = sq.clone();
            if assign(q, cand, &mut next, a, v) {
                search(q, cand, next, out, budget)?;
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    search(q, &cand, vec![None; n], &mut out, budget)?;
    out.sort();
    Ok(out)
}

/// All square maps completing `q` into a squandle, sorted.
pub fn squandlizations(q: &Quandle) -> Vec<Vec<Elem>> {
    squandlizations_within(q, &mut Budget::new(q.n(), u64::MAX / 4)).expect("no deadline")
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationResult {
    pub size: usize,
    pub kind: Kind,
    pub representatives: Vec<Structure>,
    /// `None` when only non-trivial structures were requested.
    pub trivial_count: Option<usize>,
    pub nontrivial_count: usize,
}

fn classify(n: usize, kind: Kind, nontrivial_only: bool, budget_seconds: u64) -> Result<ClassificationResult> {
    let mut budget = Budget::new(n, budget_seconds);
    let quandles = enumerate_quandles(n, budget_seconds)?;
    let perms = permutations(n);
    let mut reps = Vec::new();
    let (mut trivial, mut nontrivial) = (0, 0);
    for q in quandles {
        let is_trivial = q.is_trivial();
        if nontrivial_only && is_trivial {
            continue;
        }
        let aut = automorphisms(&q, &perms);
        let found: Vec<Structure> = match kind {
            Kind::Qualgebra => {
                let mut canon = BTreeSet::new();
                let mut buf = Vec::new();
                DiamondSearch::new(&q).search(
                    vec![None; n * n],
                    &mut |flat| {
                        canon.insert(canonical_flat(flat, n, &aut, &mut buf));
                        Ok(())
                    },
                    &mut budget,
                )?;
                // the search is exact; validation here guards the representatives only
                canon
                    .into_iter()
                    .map(|t| FiniteQualgebra::new(q.clone(), unflatten(&t, n)).map(Structure::Qualgebra))
                    .collect::<Result<_>>()?
            }
            Kind::Squandle => {
                let mut canon = BTreeSet::new();
                for m in squandlizations_within(&q, &mut budget)? {
                    let best = aut.iter().map(|s| relabel_map(&m, s)).min().expect("identity");
                    canon.insert(best);
                }
                canon
                    .into_iter()
                    .map(|m| FiniteSquandle::new(q.clone(), m).map(Structure::Squandle))
                    .collect::<Result<_>>()?
            }
            Kind::Quandle => vec![Structure::Quandle(q.clone())],
        };
        if is_trivial {
            trivial += found.len();
        } else {
            nontrivial += found.len();
        }
        reps.extend(found);
    }
    Ok(ClassificationResult {
        size: n,
        kind,
        representatives: reps,
        trivial_count: (!nontrivial_only).then_some(trivial),
        nontrivial_count: nontrivial,
    })
}

pub fn enumerate_qualgebras(n: usize, nontrivial_only: bool, budget_seconds: u64) -> Result<ClassificationResult> {
    classify(n, Kind::Qualgebra, nontrivial_only, budget_seconds)
}

pub fn enumerate_squandles(n: usize, nontrivial_only: bool, budget_seconds: u64) -> Result<ClassificationResult> {
    classify(n, Kind::Squandle, nontrivial_only, budget_seconds)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub commutative: bool,
    pub cancellative: bool,
    pub unital: bool,
    pub associative: bool,
    pub unital_associative: bool,
    pub unit: Option<Elem>,
}

pub fn property_report(q: &FiniteQualgebra) -> PropertyReport {
    let n = q.n();
    let d = |a, b| q.diamond(a, b);
    let pairs = || (0..n).flat_map(move |a| (0..n).map(move |b| (a, b)));
    let commutative = pairs().all(|(a, b)| d(a, b) == d(b, a));
    let left_cancel = (0..n).all(|a| {
        let row: BTreeSet<Elem> = (0..n).map(|b| d(a, b)).collect();
        row.len() == n
    });
    let right_cancel = (0..n).all(|b| {
        let col: BTreeSet<Elem> = (0..n).map(|a| d(a, b)).collect();
        col.len() == n
    });
    let unit = (0..n).find(|&e| (0..n).all(|a| d(e, a) == a && d(a, e) == a));
    let associative = pairs().all(|(a, b)| (0..n).all(|c| d(d(a, b), c) == d(a, d(b, c))));
    PropertyReport {
        commutative,
        cancellative: left_cancel && right_cancel,
        unital: unit.is_some(),
        associative,
        unital_associative: unit.is_some() && associative,
        unit,
    }
}
