#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordsolve::notation::parse_equation;
use wordsolve::{StringEquation, Vocab};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random side over `vars` and `alphabet` with character runs of at most
/// `max_run`.
pub fn random_side(r: &mut ChaCha8Rng, vars: &[&str], alphabet: &[char], max_tokens: usize, max_run: usize) -> String {
    let n = r.random_range(0..=max_tokens);
    let mut out: Vec<String> = Vec::new();
    let mut run = 0;
    for _ in 0..n {
        if run < max_run && r.random_bool(0.45) {
            out.push(alphabet[r.random_range(0..alphabet.len())].to_string());
            run += 1;
        } else {
            out.push(vars[r.random_range(0..vars.len())].to_string());
            run = 0;
        }
    }
    out.join(" ")
}

pub fn random_system(r: &mut ChaCha8Rng, max_eqs: usize, max_vars: usize, alphabet: &[char], max_run: usize) -> (Vocab, Vec<StringEquation>) {
    let all = ["x", "y", "z"];
    let nv = r.random_range(1..=max_vars.min(3));
    let vars = &all[..nv];
    let ne = r.random_range(1..=max_eqs);
    let mut v = Vocab::new();
    let mut eqs = Vec::new();
    for _ in 0..ne {
        let l = random_side(r, vars, alphabet, 6, max_run);
        let rr = random_side(r, vars, alphabet, 6, max_run);
        eqs.push(parse_equation(&mut v, &format!("{l} = {rr}")).expect("generated notation parses"));
    }
    (v, eqs)
}

pub fn show(v: &Vocab, eqs: &[StringEquation]) -> String {
    eqs.iter().map(|e| e.display(v).to_string()).collect::<Vec<_>>().join(" ∧ ")
}
