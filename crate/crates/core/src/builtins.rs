//! Named structures used by the tests, the acceptance suite and the CLI.

use crate::algebra::{
    closure, group_qualgebra, group_squandle, Carrier, Elem, FiniteQualgebra, FiniteSquandle, GroupTable,
    Quandle, Structure,
};
use crate::error::{Error, Result};

pub const P: Elem = 0;
pub const Q: Elem = 1;
pub const R: Elem = 2;
pub const S: Elem = 3;

const PQS: [(char, Elem); 3] = [('p', P), ('q', Q), ('s', S)];

fn tau(x: Elem) -> Elem {
    match x {
        P => Q,
        Q => P,
        other => other,
    }
}

fn pqrs() -> Carrier {
    Carrier::with_names(["p", "q", "r", "s"].iter().map(|s| s.to_string()).collect()).expect("distinct names")
}

/// The quandle on {p, q, r, s} where r swaps p and q and every other element acts
/// trivially.
pub fn p_quandle() -> Quandle {
    let lhd = (0..4)
        .map(|x| (0..4).map(|y| if y == R { tau(x) } else { x }).collect())
        .collect();
    Quandle::new(pqrs(), lhd).expect("valid quandle")
}

/// The size-4 qualgebra with the given values of q◇s and q◇q (each in {p, q, s}).
pub fn p_qualgebra(qs: Elem, qq: Elem) -> FiniteQualgebra {
    let mut d = vec![vec![0; 4]; 4];
    for x in 0..4 {
        d[R][x] = R;
        d[x][R] = R;
    }
    d[R][R] = S;
    d[S][S] = S;
    d[P][Q] = S;
    d[Q][P] = S;
    d[Q][S] = qs;
    d[S][Q] = qs;
    d[P][S] = tau(qs);
    d[S][P] = tau(qs);
    d[Q][Q] = qq;
    d[P][P] = tau(qq);
    FiniteQualgebra::new(p_quandle(), d).expect("valid qualgebra")
}

/// The size-4 squandle on the P quandle with r² = s² = s and q² = `qq`.
pub fn sq4_squandle(qq: Elem) -> FiniteSquandle {
    FiniteSquandle::new(p_quandle(), vec![tau(qq), qq, S, S]).expect("valid squandle")
}

/// Identity and transpositions of S₃ under conjugation and squaring.
pub fn s3_squared() -> Structure {
    let g = GroupTable::symmetric(3).expect("S3");
    let seed: Vec<Elem> = (0..g.n()).filter(|&a| g.mul(a, a) == g.unit()).collect();
    closure(&Structure::Squandle(group_squandle(&g)), &seed).expect("closure").1
}

/// The 3-cycles of S₄ under conjugation and squaring.
pub fn s4_three_cycles() -> Structure {
    let g = GroupTable::symmetric(4).expect("S4");
    let seed: Vec<Elem> = (0..g.n())
        .filter(|&a| a != g.unit() && g.mul(g.mul(a, a), a) == g.unit())
        .collect();
    closure(&Structure::Squandle(group_squandle(&g)), &seed).expect("closure").1
}

fn letter(c: char) -> Option<Elem> {
    PQS.iter().find(|(l, _)| *l == c).map(|&(_, e)| e)
}

fn p_name(qs: Elem, qq: Elem) -> String {
    let l = |e: Elem| PQS.iter().find(|(_, x)| *x == e).map(|(c, _)| *c).expect("p, q or s");
    format!("P_qs-{}_qq-{}", l(qs), l(qq))
}

pub fn builtin_structure_names() -> Vec<String> {
    let mut names = Vec::new();
    for (_, qs) in PQS {
        for (_, qq) in PQS {
            names.push(p_name(qs, qq));
        }
    }
    names.push("SQ4_s3sq".into());
    for c in ['p', 'q', 's'] {
        names.push(format!("SQ4_q2-{c}"));
    }
    for n in ["S3", "S4", "S3_squandle", "S4_squandle", "S4_3cycles", "Z3_dihedral", "Z2", "Z3", "Z4"] {
        names.push(n.into());
    }
    names
}

/// The nine non-trivial size-4 qualgebras.
pub fn p_family() -> Vec<(String, FiniteQualgebra)> {
    let mut out = Vec::new();
    for (_, qs) in PQS {
        for (_, qq) in PQS {
            out.push((p_name(qs, qq), p_qualgebra(qs, qq)));
        }
    }
    out
}

/// The four non-trivial size-4 squandles.
pub fn sq4_family() -> Vec<(String, Structure)> {
    let mut out = vec![("SQ4_s3sq".to_string(), s3_squared())];
    for (c, e) in PQS {
        out.push((format!("SQ4_q2-{c}"), Structure::Squandle(sq4_squandle(e))));
    }
    out
}

pub fn builtin_structure(name: &str) -> Result<Structure> {
    let unknown = || Error::UnknownName(name.to_string());
    if let Some(rest) = name.strip_prefix("P_qs-") {
        let c: Vec<char> = rest.chars().collect();
        if let [a, '_', 'q', 'q', '-', b] = c.as_slice() {
            if let (Some(qs), Some(qq)) = (letter(*a), letter(*b)) {
                return Ok(Structure::Qualgebra(p_qualgebra(qs, qq)));
            }
        }
        return Err(unknown());
    }
    if let Some(rest) = name.strip_prefix("SQ4_q2-") {
        let c: Vec<char> = rest.chars().collect();
        return match c.as_slice() {
            [a] => letter(*a).map(|e| Structure::Squandle(sq4_squandle(e))).ok_or_else(unknown),
            _ => Err(unknown()),
        };
    }
    let group = |k: usize| GroupTable::symmetric(k).expect("symmetric group");
    let cyclic = |k: usize| GroupTable::cyclic(k).expect("cyclic group");
    Ok(match name {
        "SQ4_s3sq" => s3_squared(),
        "S3" => Structure::Qualgebra(group_qualgebra(&group(3))),
        "S4" => Structure::Qualgebra(group_qualgebra(&group(4))),
        "S3_squandle" => Structure::Squandle(group_squandle(&group(3))),
        "S4_squandle" => Structure::Squandle(group_squandle(&group(4))),
        "S4_3cycles" => s4_three_cycles(),
        "Z3_dihedral" => Structure::Quandle(Quandle::dihedral(3)?),
        "Z2" => Structure::Qualgebra(group_qualgebra(&cyclic(2))),
        "Z3" => Structure::Qualgebra(group_qualgebra(&cyclic(3))),
        "Z4" => Structure::Qualgebra(group_qualgebra(&cyclic(4))),
        _ => return Err(unknown()),
    })
}
