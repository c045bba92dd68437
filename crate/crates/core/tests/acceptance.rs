//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qualgebra::algebra::{find_isomorphism, FiniteQualgebra};
use qualgebra::builtins::{builtin_structure, builtin_structure_names, p_family, p_qualgebra, sq4_family, Q, S};
use qualgebra::classify::{enumerate_qualgebras, enumerate_quandles, enumerate_squandles, property_report};
use qualgebra::cohomology::{
    coboundary_generators, cocycle_basis, cocycle_system, integer_kernel, second_cohomology, smith_normal_form,
};
use qualgebra::coloring::{arc_solutions, check_topological, count_colorings, count_isosceles, enumerate_colorings, modes_for};
use qualgebra::diagram::{builtin_diagram, BUILTIN_DIAGRAMS};
use qualgebra::freeqa::{bounded_equivalence, relation_sides, tail_invariant_check, to_free_group, Equivalence};
use qualgebra::invariants::{check_boltzmann, weight, weight_multiset_in};
use qualgebra::moves::{all_fixtures, random_move};
use qualgebra::{Coeff, CocyclePair, Diagram, Elem, IntMatrix, Kind, Mode, Sign, Structure, Vertex};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    let el = t.elapsed();
    ensure(el < limit, || format!("took {el:?}, limit {limit:?}"))
}

fn classification() -> Outcome {
    let t = Instant::now();
    let qa = enumerate_qualgebras(4, true, 60).map_err(e2s)?;
    ensure(qa.representatives.len() == 9, || format!("{} qualgebras", qa.representatives.len()))?;
    for (i, a) in qa.representatives.iter().enumerate() {
        for b in &qa.representatives[i + 1..] {
            ensure(find_isomorphism(a, b).map_err(e2s)?.is_none(), || "two representatives are isomorphic".into())?;
        }
    }
    for (name, p) in p_family() {
        let p = Structure::Qualgebra(p);
        let hits = qa
            .representatives
            .iter()
            .filter(|r| find_isomorphism(r, &p).ok().flatten().is_some())
            .count();
        ensure(hits == 1, || format!("{name} matched {hits} representatives"))?;
    }
    within(t, Duration::from_secs(10))?;
    let sq = enumerate_squandles(4, true, 60).map_err(e2s)?;
    ensure(sq.representatives.len() == 4, || format!("{} squandles", sq.representatives.len()))?;
    for (name, s) in sq4_family() {
        let hits = sq
            .representatives
            .iter()
            .filter(|r| find_isomorphism(r, &s).ok().flatten().is_some())
            .count();
        ensure(hits == 1, || format!("{name} matched {hits} representatives"))?;
    }
    let three = enumerate_qualgebras(3, true, 60).map_err(e2s)?.nontrivial_count
        + enumerate_squandles(3, true, 60).map_err(e2s)?.nontrivial_count;
    ensure(three == 0, || format!("{three} non-trivial structures of size 3"))?;
    Ok("9 qualgebras, 4 squandles, none of size 3".into())
}

fn property_flags() -> Outcome {
    let qa = enumerate_qualgebras(4, true, 60).map_err(e2s)?;
    let reports: Vec<_> = qa
        .representatives
        .iter()
        .map(|s| s.as_qualgebra().map(property_report))
        .collect::<Result<_, _>>()
        .map_err(e2s)?;
    let count = |f: &dyn Fn(&qualgebra::classify::PropertyReport) -> bool| reports.iter().filter(|r| f(r)).count();
    let got = [
        count(&|r| r.unital),
        count(&|r| r.associative),
        count(&|r| r.unital_associative),
        count(&|r| r.commutative),
        count(&|r| r.cancellative),
    ];
    ensure(got == [3, 2, 0, 9, 0], || format!("unital/assoc/both/comm/cancel = {got:?}"))?;
    Ok("3 unital, 2 associative, 0 both, 9 commutative, 0 cancellative".into())
}

/// Isosceles colorings of theta_kt by S₄, counted from the three closure equations on
/// the two free colors.
fn theta_kt_isosceles_oracle(g: &FiniteQualgebra) -> u128 {
    let n = g.n();
    let q = g.quandle();
    let sq = |a: Elem| g.diamond(a, a);
    let mut count = 0;
    for x in 0..n {
        for y in 0..n {
            if q.lhd(x, sq(y)) == q.lhd(y, x)
                && q.lhd_inv(x, y) == q.lhd_inv(y, sq(x))
                && q.lhd(sq(y), x) == q.lhd_inv(sq(x), y)
            {
                count += 1;
            }
        }
    }
    count
}

fn coloring_counts() -> Outcome {
    let t = Instant::now();
    let d = |n: &str| builtin_diagram(n).map_err(e2s);
    let p = Structure::Qualgebra(p_qualgebra(Q, S));
    let s43 = builtin_structure("S4_3cycles").map_err(e2s)?;
    let s4 = builtin_structure("S4").map_err(e2s)?;
    let s4q = s4.as_qualgebra().map_err(e2s)?;
    let got = [
        count_colorings(&p, &d("cuff_st")?, Mode::Qualgebra).map_err(e2s)?,
        count_colorings(&p, &d("cuff_hopf")?, Mode::Qualgebra).map_err(e2s)?,
        count_colorings(&s43, &d("theta_st")?, Mode::Squandle).map_err(e2s)?,
        count_colorings(&s43, &d("theta_kt")?, Mode::Squandle).map_err(e2s)?,
        count_isosceles(s4q, &d("theta_st")?).map_err(e2s)?,
    ];
    ensure(got == [18, 14, 8, 32, 24], || format!("cuff_st, cuff_hopf, theta_st, theta_kt, theta_st iso = {got:?}"))?;
    let kt = count_isosceles(s4q, &d("theta_kt")?).map_err(e2s)?;
    let oracle = theta_kt_isosceles_oracle(s4q);
    ensure(kt == oracle, || format!("theta_kt isosceles {kt}, oracle {oracle}"))?;
    ensure(kt > 24, || format!("theta_kt isosceles {kt} ≤ 24"))?;
    within(t, Duration::from_secs(30))?;
    Ok(format!("18, 14, 8, 32, 24, theta_kt isosceles {kt}"))
}

fn cohomology() -> Outcome {
    for (name, p) in p_family() {
        let h = second_cohomology(&Structure::Qualgebra(p), Coeff::Z).map_err(e2s)?;
        let shape = (h.z2.free_rank, h.b2.free_rank, h.h2.free_rank, h.h2.torsion.clone());
        ensure(shape == (8, 4, 4, vec![2]), || format!("{name}: Z² {}, B² {}, H² {}", h.z2, h.b2, h.h2))?;
    }
    for (name, s) in sq4_family() {
        let h = second_cohomology(&s, Coeff::Z).map_err(e2s)?;
        let torsion = if name == "SQ4_q2-s" { vec![2, 2] } else { vec![2] };
        let shape = (h.z2.free_rank, h.b2.free_rank, h.h2.free_rank, h.h2.torsion.clone());
        ensure(shape == (4, 4, 0, torsion), || format!("{name}: Z² {}, B² {}, H² {}", h.z2, h.b2, h.h2))?;
    }
    Ok("P family H² = Z/2 + Z^4; squandles as expected".into())
}

fn boltzmann_suite() -> Outcome {
    let fixtures = all_fixtures();
    let (mut topo, mut boltz, mut cob) = (0usize, 0usize, 0usize);
    for name in builtin_structure_names() {
        let s = builtin_structure(&name).map_err(e2s)?;
        let quandle = s.kind() == Kind::Quandle;
        let relevant: Vec<_> = fixtures.iter().filter(|f| !quandle || f.move_id.is_classical()).collect();
        for mode in modes_for(&s) {
            for f in &relevant {
                if let Some(m) = check_topological(&s, f, mode).map_err(e2s)? {
                    return Err(format!("{name} {} {mode}: {m:?}", f.move_id.as_str()));
                }
                topo += 1;
            }
        }
        let mut cocycles: Vec<CocyclePair> = coboundary_generators(&s);
        if s.n() <= 12 {
            cocycles.extend(cocycle_basis(&s).map_err(e2s)?);
        }
        for cp in &cocycles {
            for mode in modes_for(&s) {
                for f in &relevant {
                    if let Some(m) = check_boltzmann(&s, cp, f, mode).map_err(e2s)? {
                        return Err(format!("{name} {} {mode}: {m:?}", f.move_id.as_str()));
                    }
                    boltz += 1;
                }
            }
        }
        for cp in coboundary_generators(&s) {
            for dn in BUILTIN_DIAGRAMS {
                let d = builtin_diagram(dn).map_err(e2s)?;
                if quandle && !d.vertices.is_empty() {
                    continue;
                }
                for mode in modes_for(&s) {
                    for c in enumerate_colorings(&s, &d, mode, None).map_err(e2s)? {
                        let w = weight(&d, &c, &cp).map_err(e2s)?;
                        ensure(w == 0, || format!("{name} on {dn}: coboundary weight {w}"))?;
                        cob += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{topo} topological, {boltz} Boltzmann, {cob} coboundary checks"))
}

fn random_cocycle(s: &Structure, rng: &mut ChaCha8Rng) -> Result<Option<CocyclePair>, String> {
    if s.n() > 12 {
        return Ok(None);
    }
    let basis = cocycle_basis(s).map_err(e2s)?;
    let mut acc = CocyclePair::zero(s.kind(), s.n());
    for b in &basis {
        acc = acc.checked_add(&b.scaled(rng.gen_range(-3..=3)).map_err(e2s)?).map_err(e2s)?;
    }
    Ok(Some(acc))
}

fn move_fuzzing() -> Outcome {
    let structures: Vec<(String, Structure)> = builtin_structure_names()
        .into_iter()
        .map(|n| builtin_structure(&n).map(|s| (n, s)))
        .collect::<Result<_, _>>()
        .map_err(e2s)?;
    let mut total_moves = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (name, s) = &structures[seed as usize % structures.len()];
        let quandle = s.kind() == Kind::Quandle;
        let choices: Vec<&str> = BUILTIN_DIAGRAMS
            .iter()
            .copied()
            .filter(|n| !quandle || matches!(*n, "unknot" | "trefoil"))
            .collect();
        let dn = choices[rng.gen_range(0..choices.len())];
        let d0 = builtin_diagram(dn).map_err(e2s)?;
        let cp = random_cocycle(s, &mut rng)?;
        let snapshot = |d: &Diagram| -> Result<Vec<String>, String> {
            let mut out = Vec::new();
            for mode in modes_for(s) {
                out.push(count_colorings(s, d, mode).map_err(e2s)?.to_string());
                if let Some(cp) = &cp {
                    out.push(weight_multiset_in(s, cp, d, mode).map_err(e2s)?.to_string());
                }
            }
            Ok(out)
        };
        let before = snapshot(&d0)?;
        let mut d = d0;
        let steps = rng.gen_range(1..=5);
        let mut trail = Vec::new();
        for _ in 0..steps {
            let Some((next, applied)) = random_move(&d, &mut rng, !quandle) else { break };
            trail.push(format!("{} {:?}", applied.move_id, applied.direction));
            d = next;
            total_moves += 1;
        }
        let after = snapshot(&d)?;
        ensure(before == after, || format!("seed {seed} ({name} on {dn}, moves {trail:?}): {before:?} -> {after:?}"))?;
    }
    Ok(format!("200 sequences, {total_moves} moves"))
}

fn free_qualgebra() -> Outcome {
    let t = Instant::now();
    let (lhs, rhs) = relation_sides();
    let (gl, gr) = (to_free_group(&lhs).to_string(), to_free_group(&rhs).to_string());
    ensure(gl == "a⁻¹bab⁻¹ab" && gr == gl, || format!("images {gl} and {gr}"))?;
    match bounded_equivalence(&lhs, &rhs, 6) {
        Equivalence::DistinctAtDepth(6) => {}
        other => return Err(format!("bounded equivalence: {other:?}")),
    }
    let report = tail_invariant_check(&lhs, "b", 6).map_err(e2s)?;
    ensure(report.ok, || format!("tail check failed: {:?}", report.failure))?;
    within(t, Duration::from_secs(10))?;
    Ok(format!("images agree, distinct at depth 6, {} product forms checked", report.visited))
}

/// Fraction-free determinant.
fn det(m: &IntMatrix) -> BigInt {
    let n = m.rows();
    let mut a: Vec<Vec<BigInt>> = m.to_rows();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

fn snf_oracle(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for trial in 0..1000 {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let m = IntMatrix::from_rows(&rows).map_err(e2s)?;
        let sm = smith_normal_form(&m);
        let d = sm.u.mul(&m).and_then(|x| x.mul(&sm.v)).map_err(e2s)?;
        ensure(d == sm.d, || format!("trial {trial}: u·m·v ≠ d for {rows:?}"))?;
        for i in 0..r {
            for j in 0..c {
                let e = d.get(i, j);
                ensure(i == j || e.is_zero(), || format!("trial {trial}: off-diagonal entry"))?;
            }
        }
        let diag: Vec<BigInt> = (0..r.min(c)).map(|i| d.get(i, i).clone()).collect();
        for w in diag.windows(2) {
            ensure(!w[0].is_negative(), || format!("trial {trial}: negative factor"))?;
            let divides = if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() };
            ensure(divides, || format!("trial {trial}: {} does not divide {}", w[0], w[1]))?;
        }
        ensure(det(&sm.u).abs().is_one() && det(&sm.v).abs().is_one(), || format!("trial {trial}: not unimodular"))?;
        let vv = sm.v.mul(&sm.v_inv).map_err(e2s)?;
        ensure(vv == IntMatrix::identity(c), || format!("trial {trial}: v·v⁻¹ ≠ 1"))?;
    }
    Ok(())
}

/// Colorings found by trying every assignment against the local rules.
fn brute_colorings(s: &Structure, d: &Diagram, mode: Mode) -> Vec<Vec<Elem>> {
    let n = s.n();
    let idx = d.arc_index();
    let q = s.quandle();
    let k = d.arcs.len();
    let mut out = Vec::new();
    let total = n.pow(k as u32);
    for code in 0..total {
        let col: Vec<Elem> = (0..k).map(|i| code / n.pow(i as u32) % n).collect();
        let c = |a: &str| col[idx[a]];
        let crossings_ok = d.crossings.iter().all(|x| {
            let (ui, ov, uo) = (c(&x.under_in), c(&x.over), c(&x.under_out));
            match x.sign {
                Sign::Plus => uo == q.lhd(ui, ov),
                Sign::Minus => uo == q.lhd_inv(ui, ov),
            }
        });
        let vertices_ok = d.vertices.iter().all(|v| {
            let (l, r, third) = match v {
                Vertex::Zip { in_left, in_right, out } => (c(in_left), c(in_right), c(out)),
                Vertex::Unzip { input, out_left, out_right } => (c(out_left), c(out_right), c(input)),
            };
            match (mode, s) {
                (Mode::Qualgebra, Structure::Qualgebra(g)) => third == g.diamond(l, r),
                (Mode::Isosceles, Structure::Qualgebra(g)) => l == r && third == g.diamond(l, r),
                (Mode::Squandle, Structure::Squandle(g)) => l == r && third == g.square(l),
                _ => false,
            }
        });
        if crossings_ok && vertices_ok {
            out.push(col);
        }
    }
    out
}

fn brute_force_oracle(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut diagrams: Vec<(String, Diagram)> = Vec::new();
    for n in BUILTIN_DIAGRAMS {
        diagrams.push((n.to_string(), builtin_diagram(n).map_err(e2s)?));
    }
    for f in all_fixtures() {
        diagrams.push((format!("{} lhs", f.move_id.as_str()), f.lhs.clone()));
        diagrams.push((format!("{} rhs", f.move_id.as_str()), f.rhs.clone()));
    }
    diagrams.retain(|(_, d)| d.arcs.len() <= 6);

    let mut structures: Vec<Structure> = Vec::new();
    for n in 1..=4 {
        structures.extend(enumerate_quandles(n, 60).map_err(e2s)?.into_iter().map(Structure::Quandle));
        structures.extend(enumerate_squandles(n, false, 60).map_err(e2s)?.representatives);
    }
    for n in 1..=3 {
        structures.extend(enumerate_qualgebras(n, false, 60).map_err(e2s)?.representatives);
    }
    structures.extend(enumerate_qualgebras(4, true, 60).map_err(e2s)?.representatives);
    // a seeded sample of size-4 qualgebras over the trivial quandle
    let trivial4 = enumerate_qualgebras(4, false, 60).map_err(e2s)?.representatives;
    for _ in 0..40 {
        structures.push(trivial4[rng.gen_range(0..trivial4.len())].clone());
    }

    let mut checked = 0;
    for s in &structures {
        for (dn, d) in &diagrams {
            let modes: Vec<Mode> = if s.kind() == Kind::Quandle {
                if !d.vertices.is_empty() {
                    continue;
                }
                vec![Mode::Qualgebra]
            } else {
                modes_for(s)
            };
            for mode in modes {
                let fast = arc_solutions(s, d, mode).map_err(e2s)?;
                let slow = {
                    let mut v = brute_colorings(s, d, mode);
                    v.sort();
                    v
                };
                ensure(fast == slow, || format!("{dn} in {mode} mode, size {}: {} vs {}", s.n(), fast.len(), slow.len()))?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// The consistency rows vanish on the kernel of the main block.
fn redundancy_holds(s: &Structure) -> Result<bool, String> {
    let sys = cocycle_system(s).map_err(e2s)?;
    let k = integer_kernel(&sys.main_block());
    let prod = sys.consistency_block().mul(&k.transpose()).map_err(e2s)?;
    Ok(prod.is_zero())
}

fn redundancy_oracle() -> Result<usize, String> {
    let all4 = enumerate_qualgebras(4, false, 60).map_err(e2s)?.representatives;
    for s in &all4 {
        ensure(redundancy_holds(s)?, || format!("redundancy fails for {:?}", s.as_qualgebra().map(|q| q.diamond_table().clone())))?;
    }
    Ok(all4.len())
}

fn oracle_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    snf_oracle(&mut rng)?;
    let colorings = brute_force_oracle(&mut rng)?;
    let red = redundancy_oracle()?;
    Ok(format!("1000 SNF checks, {colorings} brute-force comparisons, redundancy on all {red} size-4 qualgebras"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("classification", classification),
        ("property flags", property_flags),
        ("coloring counts", coloring_counts),
        ("cohomology", cohomology),
        ("Boltzmann and topological rules", boltzmann_suite),
        ("move-invariance fuzzing", move_fuzzing),
        ("free qualgebra", free_qualgebra),
        ("oracle suites", oracle_suites),
    ];
    let mut failed = 0;
    let mut summary = BTreeMap::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let ms = t.elapsed().as_millis();
        match &r {
            Ok(detail) => println!("PASS {} {name}: {detail} ({ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} ({ms} ms)", i + 1);
            }
        }
        summary.insert(i + 1, r.is_ok());
    }
    println!("{}/{} criteria passed", summary.values().filter(|ok| **ok).count(), criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
