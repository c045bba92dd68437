//! 2-cocycles, 2-coboundaries and second cohomology by exact integer elimination.
//!
//! Variables are ordered χ(0,0), χ(0,1), …, χ(n−1,n−1), then λ: n² entries λ(a,b)
//! for qualgebras, n entries λ(a) for squandles, none for bare quandles.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{Kind, Structure};
use crate::error::{Error, Result};

/// Largest carrier handled by the cohomology routines.
pub const MAX_COHOMOLOGY_SIZE: usize = 12;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        write!(f, "IntMatrix{rows:?}")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        })
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let r = rows.len();
        let data: Vec<BigInt> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * cols, "ragged rows");
        IntMatrix { rows: r, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!("{} columns, vector of {}", self.cols, v.len())));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = v;
        }
    }

    /// Distinct nonzero rows, in first-occurrence order.
    pub fn dedup_rows(&self) -> IntMatrix {
        let mut seen = BTreeSet::new();
        let mut rows = Vec::new();
        for i in 0..self.rows {
            let r = self.row(i).to_vec();
            if r.iter().any(|x| !x.is_zero()) && seen.insert(r.clone()) {
                rows.push(r);
            }
        }
        IntMatrix::from_big_rows(rows, self.cols)
    }
}

/// `u · m · v = d` with `d` diagonal, `d[i][i]` dividing `d[i+1][i+1]`, all nonnegative,
/// `u` and `v` unimodular; `v_inv` is the inverse of `v`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    pub rank: usize,
}

impl Smith {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d.get(i, i).clone()).collect()
    }
}

struct Snf {
    a: IntMatrix,
    u: Option<IntMatrix>,
    v: Option<IntMatrix>,
    vi: Option<IntMatrix>,
}

impl Snf {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        if let Some(u) = &mut self.u {
            u.swap_rows(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        if let Some(v) = &mut self.v {
            v.swap_cols(i, j);
        }
        if let Some(vi) = &mut self.vi {
            vi.swap_rows(i, j);
        }
    }

    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.a.add_row(dst, src, k);
        if let Some(u) = &mut self.u {
            u.add_row(dst, src, k);
        }
    }

    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.a.add_col(dst, src, k);
        if let Some(v) = &mut self.v {
            v.add_col(dst, src, k);
        }
        // V ← V·E with E = I + k·e_src e_dstᵀ, so V⁻¹ ← E⁻¹·V⁻¹: row src −= k·row dst
        if let Some(vi) = &mut self.vi {
            vi.add_row(src, dst, &-k);
        }
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        if let Some(u) = &mut self.u {
            u.negate_row(i);
        }
    }

    fn run(&mut self) -> usize {
        let (rows, cols) = (self.a.rows, self.a.cols);
        let mut t = 0;
        while t < rows.min(cols) {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = self.a.get(i, j);
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < self.a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                // smallest entry of row t / column t as pivot; remainders are at most
                // half of it, so this takes logarithmically many passes
                let mut best = (t, t);
                for i in t + 1..rows {
                    let x = self.a.get(i, t);
                    if !x.is_zero() && x.abs() < self.a.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    let x = self.a.get(t, j);
                    if !x.is_zero() && x.abs() < self.a.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                self.swap_rows(t, best.0);
                self.swap_cols(t, best.1);
                let p = self.a.get(t, t).clone();
                let mut clean = true;
                for i in t + 1..rows {
                    if !self.a.get(i, t).is_zero() {
                        let q = nearest_quotient(self.a.get(i, t), &p);
                        self.add_row(i, t, &-q);
                        clean &= self.a.get(i, t).is_zero();
                    }
                }
                for j in t + 1..cols {
                    if !self.a.get(t, j).is_zero() {
                        let q = nearest_quotient(self.a.get(t, j), &p);
                        self.add_col(j, t, &-q);
                        clean &= self.a.get(t, j).is_zero();
                    }
                }
                if !clean {
                    continue;
                }
                // divisibility: fold an offending row into the pivot row and retry
                let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !self.a.get(i, j).is_multiple_of(&p)));
                match offender {
                    Some(i) => self.add_row(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.a.get(t, t).is_negative() {
                self.negate_row(t);
            }
            t += 1;
        }
        t
    }
}

/// Quotient with remainder of absolute value at most |p|/2.
fn nearest_quotient(x: &BigInt, p: &BigInt) -> BigInt {
    let q = x.div_floor(p);
    let r = x - &q * p;
    if (&r * 2u32).abs() > p.abs() {
        q + 1u32
    } else {
        q
    }
}

fn snf(m: &IntMatrix, track: bool) -> Smith {
    let mut s = Snf {
        a: m.clone(),
        u: track.then(|| IntMatrix::identity(m.rows)),
        v: track.then(|| IntMatrix::identity(m.cols)),
        vi: track.then(|| IntMatrix::identity(m.cols)),
    };
    let rank = s.run();
    Smith {
        d: s.a,
        u: s.u.unwrap_or_else(|| IntMatrix::zeros(0, 0)),
        v: s.v.unwrap_or_else(|| IntMatrix::zeros(0, 0)),
        v_inv: s.vi.unwrap_or_else(|| IntMatrix::zeros(0, 0)),
        rank,
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    snf(m, true)
}

/// Invariant factors only (no transforms).
pub fn invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    snf(m, false).diagonal()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Coeff {
    #[default]
    Z,
    /// Z/m, m ≥ 2
    Mod(u64),
}

impl Coeff {
    fn modulus(self) -> BigInt {
        match self {
            Coeff::Z => BigInt::zero(),
            Coeff::Mod(m) => BigInt::from(m),
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Z => f.write_str("z"),
            Coeff::Mod(m) => write!(f, "z{m}"),
        }
    }
}

impl FromStr for Coeff {
    type Err = Error;
    fn from_str(s: &str) -> Result<Coeff> {
        let s = s.to_ascii_lowercase();
        match s.strip_prefix('z') {
            Some("") => Ok(Coeff::Z),
            Some(m) => match m.parse::<u64>() {
                Ok(m) if m >= 2 => Ok(Coeff::Mod(m)),
                _ => Err(Error::Parse(format!("bad coefficient ring {s}"))),
            },
            None => Err(Error::Parse(format!("bad coefficient ring {s}"))),
        }
    }
}

impl Serialize for Coeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Basis of `{x : m·x = 0}` over Z (`m` = 0) or generators of the preimage lattice of
/// the kernel over Z/m, as rows.
pub fn kernel_mod(m: &IntMatrix, coeff: Coeff) -> IntMatrix {
    let sm = smith_normal_form(&m.dedup_rows());
    let cols = m.cols;
    // with no rows left, V is the identity
    let v = if sm.v.rows == cols { sm.v.clone() } else { IntMatrix::identity(cols) };
    let modulus = coeff.modulus();
    let mut rows = Vec::new();
    for i in 0..cols {
        let col = v.column(i);
        if i < sm.rank {
            let f = if modulus.is_zero() {
                BigInt::zero()
            } else {
                &modulus / sm.d.get(i, i).gcd(&modulus)
            };
            if !f.is_zero() {
                rows.push(col.into_iter().map(|x| x * &f).collect());
            }
        } else {
            rows.push(col);
        }
    }
    IntMatrix::from_big_rows(rows, cols)
}

pub fn integer_kernel(m: &IntMatrix) -> IntMatrix {
    kernel_mod(m, Coeff::Z)
}

/// A finitely generated abelian group Z^free_rank ⊕ Z/d₁ ⊕ … with d₁ | d₂ | ….
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AbelianGroupPresentation {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroupPresentation {
    /// Normalizes a direct sum of cyclic groups Z/oᵢ (0 meaning Z).
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Result<Self> {
        let k = orders.len();
        let mut m = IntMatrix::zeros(k, k);
        for (i, o) in orders.iter().enumerate() {
            m.set(i, i, o.clone());
        }
        let diag = invariant_factors(&m);
        let rank = diag.len();
        let torsion = diag
            .iter()
            .filter(|d| !d.is_one())
            .map(|d| d.to_u64().ok_or_else(|| Error::Overflow(format!("invariant factor {d}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(AbelianGroupPresentation {
            free_rank: k - rank,
            torsion,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianGroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z/{d}")).collect();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda {
    Binary(Vec<Vec<i64>>),
    Unary(Vec<i64>),
}

/// (χ, λ) as integer tables; `lambda` is absent for bare quandles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocyclePair {
    pub kind: Kind,
    pub chi: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Lambda>,
}

impl CocyclePair {
    pub fn zero(kind: Kind, n: usize) -> Self {
        CocyclePair::from_vector(kind, n, &vec![0; var_count(kind, n)]).expect("right length")
    }

    pub fn chi(&self, a: usize, b: usize) -> i64 {
        self.chi[a][b]
    }

    /// λ(a, b) for qualgebras.
    pub fn lambda2(&self, a: usize, b: usize) -> i64 {
        match &self.lambda {
            Some(Lambda::Binary(t)) => t[a][b],
            _ => 0,
        }
    }

    /// λ(a) for squandles.
    pub fn lambda1(&self, a: usize) -> i64 {
        match &self.lambda {
            Some(Lambda::Unary(t)) => t[a],
            _ => 0,
        }
    }

    pub fn n(&self) -> usize {
        self.chi.len()
    }

    pub fn to_vector(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.chi.iter().flatten().copied().collect();
        match &self.lambda {
            Some(Lambda::Binary(t)) => v.extend(t.iter().flatten()),
            Some(Lambda::Unary(t)) => v.extend(t),
            None => {}
        }
        v
    }

    pub fn from_vector(kind: Kind, n: usize, v: &[i64]) -> Result<Self> {
        if v.len() != var_count(kind, n) {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {kind} cocycle on {n} elements",
                v.len()
            )));
        }
        let chi = v[..n * n].chunks(n.max(1)).map(<[i64]>::to_vec).collect();
        let rest = &v[n * n..];
        let lambda = match kind {
            Kind::Quandle => None,
            Kind::Qualgebra => Some(Lambda::Binary(rest.chunks(n.max(1)).map(<[i64]>::to_vec).collect())),
            Kind::Squandle => Some(Lambda::Unary(rest.to_vec())),
        };
        Ok(CocyclePair { kind, chi, lambda })
    }

    pub fn from_big_vector(kind: Kind, n: usize, v: &[BigInt]) -> Result<Self> {
        let small = v
            .iter()
            .map(|x| x.to_i64().ok_or_else(|| Error::Overflow(format!("cocycle entry {x}"))))
            .collect::<Result<Vec<_>>>()?;
        CocyclePair::from_vector(kind, n, &small)
    }

    fn combine(&self, other: &CocyclePair, f: impl Fn(i64, i64) -> Option<i64>) -> Result<CocyclePair> {
        if self.kind != other.kind || self.n() != other.n() {
            return Err(Error::ShapeMismatch("cocycles of different shapes".into()));
        }
        let v = self
            .to_vector()
            .into_iter()
            .zip(other.to_vector())
            .map(|(a, b)| f(a, b).ok_or_else(|| Error::Overflow("cocycle entry".into())))
            .collect::<Result<Vec<_>>>()?;
        CocyclePair::from_vector(self.kind, self.n(), &v)
    }

    pub fn checked_add(&self, other: &CocyclePair) -> Result<CocyclePair> {
        self.combine(other, i64::checked_add)
    }

    pub fn checked_neg(&self) -> Result<CocyclePair> {
        self.combine(self, |a, _| a.checked_neg())
    }

    pub fn scaled(&self, k: i64) -> Result<CocyclePair> {
        self.combine(self, |a, _| a.checked_mul(k))
    }

    /// Shape must match the structure.
    pub fn check_shape(&self, s: &Structure) -> Result<()> {
        let n = s.n();
        let lam_ok = match (&self.lambda, s.kind()) {
            (None, Kind::Quandle) => true,
            (Some(Lambda::Binary(t)), Kind::Qualgebra) => t.len() == n && t.iter().all(|r| r.len() == n),
            (Some(Lambda::Unary(t)), Kind::Squandle) => t.len() == n,
            _ => false,
        };
        if self.kind != s.kind() || !lam_ok || self.chi.len() != n || self.chi.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "cocycle does not fit a {} on {n} elements",
                s.kind()
            )));
        }
        Ok(())
    }
}

pub fn var_count(kind: Kind, n: usize) -> usize {
    n * n
        + match kind {
            Kind::Quandle => 0,
            Kind::Qualgebra => n * n,
            Kind::Squandle => n,
        }
}

/// The linear system whose kernel is Z². Rows from `consistency_start` on are the
/// quandle rows implied by the others (qualgebras only).
#[derive(Clone, Debug)]
pub struct CocycleSystem {
    pub kind: Kind,
    pub n: usize,
    pub matrix: IntMatrix,
    pub consistency_start: usize,
}

impl CocycleSystem {
    pub fn main_block(&self) -> IntMatrix {
        IntMatrix::from_big_rows(
            (0..self.consistency_start).map(|i| self.matrix.row(i).to_vec()).collect(),
            self.matrix.cols,
        )
    }

    pub fn consistency_block(&self) -> IntMatrix {
        IntMatrix::from_big_rows(
            (self.consistency_start..self.matrix.rows).map(|i| self.matrix.row(i).to_vec()).collect(),
            self.matrix.cols,
        )
    }
}

struct RowBuilder {
    n: usize,
    cols: usize,
    rows: Vec<Vec<BigInt>>,
}

impl RowBuilder {
    fn chi(&self, a: usize, b: usize) -> usize {
        a * self.n + b
    }

    fn lam2(&self, a: usize, b: usize) -> usize {
        self.n * self.n + a * self.n + b
    }

    fn lam1(&self, a: usize) -> usize {
        self.n * self.n + a
    }

    fn push(&mut self, terms: &[(usize, i64)]) {
        let mut r = vec![BigInt::zero(); self.cols];
        for &(i, k) in terms {
            r[i] += k;
        }
        self.rows.push(r);
    }
}

fn check_size(s: &Structure) -> Result<()> {
    if s.n() > MAX_COHOMOLOGY_SIZE {
        return Err(Error::SizeTooLarge {
            n: s.n(),
            budget_seconds: 0,
        });
    }
    Ok(())
}

fn quandle_rows(s: &Structure, b: &mut RowBuilder) {
    let q = s.quandle();
    let n = s.n();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                // χ(x,y) + χ(x⊲y,z) = χ(x,z) + χ(x⊲z,y⊲z)
                b.push(&[
                    (b.chi(x, y), 1),
                    (b.chi(q.lhd(x, y), z), 1),
                    (b.chi(x, z), -1),
                    (b.chi(q.lhd(x, z), q.lhd(y, z)), -1),
                ]);
            }
        }
        b.push(&[(b.chi(x, x), 1)]);
    }
}

pub fn cocycle_system(s: &Structure) -> Result<CocycleSystem> {
    check_size(s)?;
    let n = s.n();
    let cols = var_count(s.kind(), n);
    let mut b = RowBuilder {
        n,
        cols,
        rows: Vec::new(),
    };
    let q = s.quandle();
    let consistency_start;
    match s {
        Structure::Quandle(_) => {
            quandle_rows(s, &mut b);
            consistency_start = b.rows.len();
        }
        Structure::Qualgebra(qa) => {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        // χ(x, y◇z) = χ(x,y) + χ(x⊲y, z)
                        b.push(&[
                            (b.chi(x, qa.diamond(y, z)), 1),
                            (b.chi(x, y), -1),
                            (b.chi(q.lhd(x, y), z), -1),
                        ]);
                    }
                }
            }
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        // χ(x◇y, z) + λ(x⊲z, y⊲z) = χ(x,z) + χ(y,z) + λ(x,y)
                        b.push(&[
                            (b.chi(qa.diamond(x, y), z), 1),
                            (b.lam2(q.lhd(x, z), q.lhd(y, z)), 1),
                            (b.chi(x, z), -1),
                            (b.chi(y, z), -1),
                            (b.lam2(x, y), -1),
                        ]);
                    }
                }
            }
            for x in 0..n {
                for y in 0..n {
                    // χ(x,y) + λ(x,y) = λ(y, x⊲y)
                    b.push(&[(b.chi(x, y), 1), (b.lam2(x, y), 1), (b.lam2(y, q.lhd(x, y)), -1)]);
                }
            }
            consistency_start = b.rows.len();
            quandle_rows(s, &mut b);
        }
        Structure::Squandle(sq) => {
            quandle_rows(s, &mut b);
            for x in 0..n {
                for y in 0..n {
                    // χ(x, y²) = χ(x,y) + χ(x⊲y, y)
                    b.push(&[
                        (b.chi(x, sq.square(y)), 1),
                        (b.chi(x, y), -1),
                        (b.chi(q.lhd(x, y), y), -1),
                    ]);
                    // χ(x², y) + λ(x⊲y) = 2χ(x,y) + λ(x)
                    b.push(&[
                        (b.chi(sq.square(x), y), 1),
                        (b.lam1(q.lhd(x, y)), 1),
                        (b.chi(x, y), -2),
                        (b.lam1(x), -1),
                    ]);
                }
            }
            consistency_start = b.rows.len();
        }
    }
    Ok(CocycleSystem {
        kind: s.kind(),
        n,
        matrix: IntMatrix::from_big_rows(b.rows, cols),
        consistency_start,
    })
}

/// Coboundaries of the Dirac maps φ_a, one per element.
pub fn coboundary_generators(s: &Structure) -> Vec<CocyclePair> {
    let n = s.n();
    let q = s.quandle();
    (0..n)
        .map(|a| {
            let phi = |x: usize| i64::from(x == a);
            let chi = (0..n).map(|x| (0..n).map(|y| phi(q.lhd(x, y)) - phi(x)).collect()).collect();
            let lambda = match s {
                Structure::Quandle(_) => None,
                Structure::Qualgebra(qa) => Some(Lambda::Binary(
                    (0..n)
                        .map(|x| (0..n).map(|y| phi(x) + phi(y) - phi(qa.diamond(x, y))).collect())
                        .collect(),
                )),
                Structure::Squandle(sq) => Some(Lambda::Unary((0..n).map(|x| 2 * phi(x) - phi(sq.square(x))).collect())),
            };
            CocyclePair {
                kind: s.kind(),
                chi,
                lambda,
            }
        })
        .collect()
}

fn coboundary_matrix(s: &Structure) -> IntMatrix {
    let gens = coboundary_generators(s);
    let cols = var_count(s.kind(), s.n());
    IntMatrix::from_big_rows(
        gens.iter()
            .map(|g| g.to_vector().into_iter().map(BigInt::from).collect())
            .collect(),
        cols,
    )
}

/// Exhaustive check of every cocycle equation (including the redundant block).
pub fn is_cocycle(s: &Structure, c: &CocyclePair) -> Result<bool> {
    c.check_shape(s)?;
    let sys = cocycle_system(s)?;
    let v: Vec<BigInt> = c.to_vector().into_iter().map(BigInt::from).collect();
    Ok(sys.matrix.mul_vec(&v)?.iter().all(Zero::is_zero))
}

/// Solves `x · rows = target` over Z, if possible.
fn solve_in_row_span(rows: &IntMatrix, target: &[BigInt]) -> Option<Vec<BigInt>> {
    // xᵀ: Mᵀ x = t with Mᵀ = rowsᵀ; U Mᵀ V = D ⇒ D (V⁻¹x) = U t
    let mt = rows.transpose();
    let sm = smith_normal_form(&mt);
    let ut = sm.u.mul_vec(target).ok()?;
    let mut y = vec![BigInt::zero(); mt.cols];
    for (i, val) in ut.iter().enumerate() {
        if i < sm.rank {
            let (qt, r) = val.div_rem(sm.d.get(i, i));
            if !r.is_zero() {
                return None;
            }
            y[i] = qt;
        } else if !val.is_zero() {
            return None;
        }
    }
    sm.v.mul_vec(&y).ok()
}

pub fn is_coboundary(s: &Structure, c: &CocyclePair) -> Result<bool> {
    c.check_shape(s)?;
    check_size(s)?;
    let v: Vec<BigInt> = c.to_vector().into_iter().map(BigInt::from).collect();
    Ok(solve_in_row_span(&coboundary_matrix(s), &v).is_some())
}

/// A basis of Z² over Z, as cocycles.
pub fn cocycle_basis(s: &Structure) -> Result<Vec<CocyclePair>> {
    let sys = cocycle_system(s)?;
    let k = integer_kernel(&sys.matrix);
    (0..k.rows)
        .map(|i| CocyclePair::from_big_vector(s.kind(), s.n(), k.row(i)))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Cohomology {
    pub coeff: Coeff,
    /// Z², B², H² as abstract groups.
    pub z2: AbelianGroupPresentation,
    pub b2: AbelianGroupPresentation,
    pub h2: AbelianGroupPresentation,
    /// One cocycle per generator of H², torsion generators first (same order as
    /// `h2.torsion`), then free ones.
    pub representatives: Vec<CocyclePair>,
}

/// gcd(dᵢ, m) per coordinate, with dᵢ = 0 past the rank.
fn cyclic_pieces(diag: &[BigInt], total: usize, modulus: &BigInt) -> Vec<BigInt> {
    (0..total)
        .map(|i| diag.get(i).cloned().unwrap_or_else(BigInt::zero).gcd(modulus))
        .collect()
}

/// H² = Z² / B² with coefficients in Z or Z/m, plus representative cocycles.
pub fn second_cohomology(s: &Structure, coeff: Coeff) -> Result<Cohomology> {
    let sys = cocycle_system(s)?;
    let n = s.n();
    let kind = s.kind();
    let cols = sys.matrix.cols;
    let modulus = coeff.modulus();

    let sm = smith_normal_form(&sys.matrix.dedup_rows());
    let (v, v_inv) = if sm.v.rows == cols {
        (sm.v.clone(), sm.v_inv.clone())
    } else {
        (IntMatrix::identity(cols), IntMatrix::identity(cols))
    };
    let diag = sm.diagonal();

    // Lattice L (preimage of Z² in Z^cols) has basis f_i · V[:, i] over the kept indices.
    let mut basis_idx = Vec::new();
    let mut scale = Vec::new();
    for i in 0..cols {
        if i < sm.rank {
            if modulus.is_zero() {
                continue;
            }
            basis_idx.push(i);
            scale.push(&modulus / diag[i].gcd(&modulus));
        } else {
            basis_idx.push(i);
            scale.push(BigInt::one());
        }
    }
    let dim = basis_idx.len();
    let coords = |vec: &[BigInt]| -> Result<Vec<BigInt>> {
        let y = v_inv.mul_vec(vec)?;
        for i in 0..cols {
            if modulus.is_zero() && i < sm.rank && !y[i].is_zero() {
                return Err(Error::InconsistentLattice("vector outside the cocycle lattice".into()));
            }
        }
        basis_idx
            .iter()
            .zip(&scale)
            .map(|(&i, f)| {
                let (q, r) = y[i].div_rem(f);
                if r.is_zero() {
                    Ok(q)
                } else {
                    Err(Error::InconsistentLattice("vector outside the cocycle lattice".into()))
                }
            })
            .collect()
    };

    // Z²: over Z free of rank cols − rank; over Z/m, ⊕ Z/gcd(dᵢ, m) ⊕ (Z/m)^{cols−rank}
    let z2 = if modulus.is_zero() {
        AbelianGroupPresentation {
            free_rank: cols - sm.rank,
            torsion: vec![],
        }
    } else {
        AbelianGroupPresentation::from_cyclic_orders(&cyclic_pieces(&diag, cols, &modulus))?
    };

    // B²: image of δ: Z^n → (Z/m)^cols
    let delta = coboundary_matrix(s);
    let dd = invariant_factors(&delta);
    let b2 = if modulus.is_zero() {
        AbelianGroupPresentation {
            free_rank: dd.len(),
            torsion: vec![],
        }
    } else {
        let orders: Vec<BigInt> = dd.iter().map(|e| &modulus / e.gcd(&modulus)).collect();
        AbelianGroupPresentation::from_cyclic_orders(&orders)?
    };

    // H² = L / (δ(Zⁿ) + m·Z^cols), in L coordinates
    let mut sub_rows = Vec::new();
    for i in 0..delta.rows {
        sub_rows.push(coords(delta.row(i))?);
    }
    if !modulus.is_zero() {
        for j in 0..cols {
            let mut e = vec![BigInt::zero(); cols];
            e[j] = modulus.clone();
            sub_rows.push(coords(&e)?);
        }
    }
    let sub = IntMatrix::from_big_rows(sub_rows, dim);
    let hs = smith_normal_form(&sub);
    let hdiag = hs.diagonal();
    let h_v_inv = if hs.v_inv.rows == dim { hs.v_inv.clone() } else { IntMatrix::identity(dim) };

    let mut torsion_gens = Vec::new();
    let mut free_gens = Vec::new();
    let mut orders = Vec::new();
    for i in 0..dim {
        let d = hdiag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_one() {
            continue;
        }
        orders.push(d.clone());
        // generator: row i of the inverse column transform, in L coordinates
        let w = h_v_inv.row(i);
        let mut vec = vec![BigInt::zero(); cols];
        for (k, wk) in w.iter().enumerate() {
            if wk.is_zero() {
                continue;
            }
            let col = v.column(basis_idx[k]);
            for (x, c) in vec.iter_mut().zip(col) {
                *x += wk * &scale[k] * c;
            }
        }
        if d.is_zero() {
            free_gens.push(vec);
        } else {
            torsion_gens.push(vec);
        }
    }
    let h2 = AbelianGroupPresentation::from_cyclic_orders(&orders)?;
    let reduce_gen = |g: Vec<BigInt>| reduce_representative(g, &delta, &modulus);
    let mut representatives = Vec::new();
    for g in torsion_gens.into_iter().chain(free_gens) {
        representatives.push(CocyclePair::from_big_vector(kind, n, &reduce_gen(g))?);
    }
    Ok(Cohomology {
        coeff,
        z2,
        b2,
        h2,
        representatives,
    })
}

fn l1(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).sum()
}

/// Greedy L1 reduction of a cocycle by coboundaries (and by m in each entry).
fn reduce_representative(mut v: Vec<BigInt>, delta: &IntMatrix, modulus: &BigInt) -> Vec<BigInt> {
    let sym = |x: &BigInt| -> BigInt {
        if modulus.is_zero() {
            return x.clone();
        }
        let r = x.mod_floor(modulus);
        if &r * 2 > *modulus {
            r - modulus
        } else {
            r
        }
    };
    v = v.iter().map(sym).collect();
    loop {
        let cur = l1(&v);
        let mut best: Option<(BigInt, Vec<BigInt>)> = None;
        for i in 0..delta.rows {
            for sgn in [1i64, -1] {
                let cand: Vec<BigInt> = v
                    .iter()
                    .zip(delta.row(i))
                    .map(|(a, b)| sym(&(a + b * sgn)))
                    .collect();
                let c = l1(&cand);
                if c < cur && best.as_ref().is_none_or(|(b, _)| c < *b) {
                    best = Some((c, cand));
                }
            }
        }
        match best {
            Some((_, cand)) => v = cand,
            None => return v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FiniteQualgebra, Quandle};
    use crate::builtins::{builtin_structure, p_family, sq4_family};

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_smith_forms() {
        assert_eq!(invariant_factors(&m(&[vec![2, 0], vec![0, 3]])), big(&[1, 6]));
        assert_eq!(invariant_factors(&m(&[vec![2]])), big(&[2]));
        assert_eq!(invariant_factors(&m(&[vec![0, 0]])), big(&[]));
        let a = m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.diagonal(), big(&[2, 6, 12]));
        assert_eq!(s.u.mul(&a).unwrap().mul(&s.v).unwrap(), s.d);
        assert_eq!(s.v.mul(&s.v_inv).unwrap(), IntMatrix::identity(3));
    }

    #[test]
    fn kernels() {
        assert_eq!(integer_kernel(&IntMatrix::identity(3)).rows(), 0);
        assert_eq!(integer_kernel(&IntMatrix::zeros(2, 3)).rows(), 3);
        let k = integer_kernel(&m(&[vec![2, -2]]));
        assert_eq!(k.rows(), 1);
        let r = k.row(0);
        assert!(r == big(&[1, 1]).as_slice() || r == big(&[-1, -1]).as_slice());
        // over Z/2 the same equation is vacuous
        let k2 = kernel_mod(&m(&[vec![2, -2]]), Coeff::Mod(2));
        assert_eq!(k2.rows(), 2);
    }

    #[test]
    fn coeff_parsing() {
        assert_eq!("z".parse::<Coeff>().unwrap(), Coeff::Z);
        assert_eq!("Z2".parse::<Coeff>().unwrap(), Coeff::Mod(2));
        assert!("z1".parse::<Coeff>().is_err());
        assert!("q".parse::<Coeff>().is_err());
    }

    #[test]
    fn presentation_normalization() {
        let p = AbelianGroupPresentation::from_cyclic_orders(&big(&[2, 3, 0, 1, 4])).unwrap();
        assert_eq!(p, AbelianGroupPresentation { free_rank: 1, torsion: vec![2, 12] });
        assert_eq!(p.to_string(), "Z/2 + Z/12 + Z");
    }

    #[test]
    fn p_family_cohomology() {
        for (name, q) in p_family() {
            let s = Structure::Qualgebra(q);
            let h = second_cohomology(&s, Coeff::Z).unwrap();
            assert_eq!(h.z2.free_rank, 8, "{name}");
            assert_eq!(h.b2.free_rank, 4, "{name}");
            assert_eq!(h.h2, AbelianGroupPresentation { free_rank: 4, torsion: vec![2] }, "{name}");
            assert_eq!(h.representatives.len(), 5);
            for r in &h.representatives {
                assert!(is_cocycle(&s, r).unwrap());
                assert!(!is_coboundary(&s, r).unwrap());
            }
            // the torsion generator is a coboundary once doubled
            assert!(is_coboundary(&s, &h.representatives[0].scaled(2).unwrap()).unwrap());
        }
    }

    #[test]
    fn sq4_cohomology() {
        for (name, s) in sq4_family() {
            let h = second_cohomology(&s, Coeff::Z).unwrap();
            assert_eq!(h.z2.free_rank, 4, "{name}");
            assert_eq!(h.b2.free_rank, 4, "{name}");
            let torsion = if name == "SQ4_q2-s" { vec![2, 2] } else { vec![2] };
            assert_eq!(h.h2, AbelianGroupPresentation { free_rank: 0, torsion }, "{name}");
        }
    }

    #[test]
    fn singleton_and_trivial_qualgebras() {
        let one = Structure::Qualgebra(FiniteQualgebra::new(Quandle::trivial(1), vec![vec![0]]).unwrap());
        let h = second_cohomology(&one, Coeff::Z).unwrap();
        assert_eq!(h.z2.free_rank, 1);
        assert!(h.h2.is_trivial());
        let g = coboundary_generators(&one);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].chi, vec![vec![0]]);
        assert_eq!(g[0].lambda, Some(Lambda::Binary(vec![vec![1]])));

        // trivial quandle with addition mod 4: Z² is the symmetric forms
        let t = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
        let triv = Structure::Qualgebra(FiniteQualgebra::new(Quandle::trivial(4), t).unwrap());
        let sys = cocycle_system(&triv).unwrap();
        assert_eq!(integer_kernel(&sys.matrix).rows(), 10);
        for g in coboundary_generators(&triv) {
            assert!(g.chi.iter().flatten().all(|&x| x == 0));
        }
    }

    #[test]
    fn constant_and_kronecker_lambda_are_cocycles() {
        let s = builtin_structure("P_qs-q_qq-s").unwrap();
        let n = 4;
        let mut one = CocyclePair::zero(Kind::Qualgebra, n);
        one.lambda = Some(Lambda::Binary(vec![vec![1; n]; n]));
        assert!(is_cocycle(&s, &one).unwrap());
        let mut delta = CocyclePair::zero(Kind::Qualgebra, n);
        delta.lambda = Some(Lambda::Binary((0..n).map(|a| (0..n).map(|b| i64::from(a == b)).collect()).collect()));
        assert!(is_cocycle(&s, &delta).unwrap());
        for g in coboundary_generators(&s) {
            assert!(is_cocycle(&s, &g).unwrap());
            assert!(is_coboundary(&s, &g).unwrap());
        }
        let sq = builtin_structure("SQ4_s3sq").unwrap();
        assert!(matches!(is_cocycle(&sq, &one), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn torsion_coefficients() {
        let s = builtin_structure("P_qs-s_qq-s").unwrap();
        let h = second_cohomology(&s, Coeff::Mod(2)).unwrap();
        assert_eq!(h.h2.free_rank, 0);
        for r in &h.representatives {
            let v: Vec<BigInt> = r.to_vector().into_iter().map(BigInt::from).collect();
            let sys = cocycle_system(&s).unwrap();
            assert!(sys.matrix.mul_vec(&v).unwrap().iter().all(|x| x.is_even()));
        }
    }
}
