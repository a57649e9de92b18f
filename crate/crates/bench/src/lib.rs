//! Instance generators shared by the benchmarks and the corpus writer.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Lit(String),
    Var(String),
}

pub type Side = Vec<Item>;

fn term(side: &[Item]) -> String {
    let parts: Vec<String> = side
        .iter()
        .map(|i| match i {
            Item::Lit(s) => format!("\"{s}\""),
            Item::Var(x) => x.clone(),
        })
        .collect();
    match parts.len() {
        0 => "\"\"".to_string(),
        1 => parts[0].clone(),
        _ => format!("(str.++ {})", parts.join(" ")),
    }
}

/// SMT-LIB2 text declaring every variable of `eqs`.
pub fn smt2(eqs: &[(Side, Side)]) -> String {
    let mut vars: Vec<&str> = Vec::new();
    for (l, r) in eqs {
        for i in l.iter().chain(r) {
            if let Item::Var(x) = i {
                if !vars.contains(&x.as_str()) {
                    vars.push(x);
                }
            }
        }
    }
    let mut s = String::from("(set-logic QF_S)\n");
    for x in vars {
        let _ = writeln!(s, "(declare-fun {x} () String)");
    }
    for (l, r) in eqs {
        let _ = writeln!(s, "(assert (= {} {}))", term(l), term(r));
    }
    s.push_str("(check-sat)\n");
    s
}

fn word(rng: &mut impl Rng, alphabet: &[char], len: usize) -> String {
    (0..len).map(|_| *alphabet.choose(rng).expect("non-empty alphabet")).collect()
}

/// Cuts `w` into pieces and replaces some of them by variables; equal
/// pieces share a variable.
fn abstract_word(rng: &mut impl Rng, w: &str, names: &mut BTreeMap<String, String>) -> Side {
    let chars: Vec<char> = w.chars().collect();
    let mut side = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let n = rng.random_range(1..=3.min(chars.len() - i));
        let piece: String = chars[i..i + n].iter().collect();
        i += n;
        if rng.random_bool(0.5) {
            let k = names.len();
            let x = names.entry(piece).or_insert_with(|| format!("x{k}")).clone();
            side.push(Item::Var(x));
        } else {
            match side.last_mut() {
                Some(Item::Lit(s)) => s.push_str(&piece),
                _ => side.push(Item::Lit(piece)),
            }
        }
    }
    side
}

/// One equation built from two abstractions of the same word, so it is
/// satisfiable by construction.
pub fn concat_instance(rng: &mut impl Rng, alphabet: &[char], max_word: usize) -> Vec<(Side, Side)> {
    loop {
        let n = rng.random_range(3..=max_word);
        let w = word(rng, alphabet, n);
        let mut names = BTreeMap::new();
        let l = abstract_word(rng, &w, &mut names);
        let r = abstract_word(rng, &w, &mut names);
        if l != r && !names.is_empty() {
            return vec![(l, r)];
        }
    }
}

fn random_side(rng: &mut impl Rng, vars: &[&str], alphabet: &[char], len: usize) -> Side {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.55) {
                Item::Var(vars.choose(rng).expect("vars").to_string())
            } else {
                Item::Lit(alphabet.choose(rng).expect("alphabet").to_string())
            }
        })
        .collect()
}

/// Up to two unconstrained random equations over few variables.
pub fn random_instance(rng: &mut impl Rng, alphabet: &[char], max_side: usize) -> Vec<(Side, Side)> {
    let vars = ["x", "y", "z"];
    let nv = rng.random_range(1..=3);
    let n = rng.random_range(1..=2);
    (0..n)
        .map(|_| {
            let (nl, nr) = (rng.random_range(1..=max_side), rng.random_range(1..=max_side));
            let l = random_side(rng, &vars[..nv], alphabet, nl);
            let r = random_side(rng, &vars[..nv], alphabet, nr);
            (l, r)
        })
        .collect()
}

const REGRESSION: [(&str, &str); 5] = [
    ("square", "(set-logic QF_S)\n(declare-fun x () String)\n(declare-fun y () String)\n(assert (= (str.++ x x) (str.++ y \"b\")))\n(check-sat)\n"),
    ("powers", "(set-logic QF_S)\n(declare-fun x () String)\n(assert (= (str.++ x \"b\" x \"a\") (str.++ \"a\" x \"b\" x)))\n(check-sat)\n"),
    ("parikh-root", "(set-logic QF_S)\n(declare-fun x () String)\n(declare-fun y () String)\n(assert (= (str.++ x \"a\" y) (str.++ y \"b\" x)))\n(check-sat)\n"),
    ("parikh-ab", "(set-logic QF_S)\n(declare-fun x () String)\n(declare-fun y () String)\n(assert (= (str.++ x \"a\" x \"aabbb\" y) (str.++ x y \"ababab\" x)))\n(check-sat)\n"),
    (
        "five-vars",
        "(set-logic QF_S)\n(declare-fun x1 () String)\n(declare-fun x2 () String)\n(declare-fun x3 () String)\n(declare-fun x4 () String)\n(declare-fun x5 () String)\n\
         (assert (= (str.++ x3 x3 x4 \"b\" x5 \"b\") (str.++ x5 x5 x5 x5 x4 \"bb\")))\n\
         (assert (= (str.++ x1 x1 \"ac\" x2 x4 x2 x5 x3 \"ba\" x5 x3 x4 x3) (str.++ x2 x2 \"abc\" x1 x1 x3 x3 x3 x4 x4 \"a\" x4)))\n(check-sat)\n",
    ),
];

/// Writes `regression/`, `track01/` and `track03/` below `dir`.
pub fn write_corpus(dir: &Path, seed: u64, per_track: usize) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::fs::create_dir_all(dir.join("regression"))?;
    for (name, text) in REGRESSION {
        std::fs::write(dir.join("regression").join(format!("{name}.smt2")), text)?;
    }
    std::fs::create_dir_all(dir.join("track01"))?;
    for i in 0..per_track {
        let eqs = concat_instance(&mut rng, &['a', 'b', 'c'], 14);
        std::fs::write(dir.join("track01").join(format!("{i:03}.smt2")), smt2(&eqs))?;
    }
    std::fs::create_dir_all(dir.join("track03"))?;
    for i in 0..per_track {
        let eqs = random_instance(&mut rng, &['a', 'b'], 7);
        std::fs::write(dir.join("track03").join(format!("{i:03}.smt2")), smt2(&eqs))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_instances_parse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = wordsolve::smtlib::parse_smt2(&smt2(&concat_instance(&mut rng, &['a', 'b'], 10))).unwrap();
            assert_eq!(p.assertions.len(), 1);
            wordsolve::smtlib::parse_smt2(&smt2(&random_instance(&mut rng, &['a', 'b'], 5))).unwrap();
        }
    }
}
