mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;
use wordsolve::graph::TraceEvent;
use wordsolve::harness::{load, run_bench};
use wordsolve::notation::{parse_equation, parse_term};
use wordsolve::oracle::{all_models, brute_force, count_occurrences, Bounds, OracleResult};
use wordsolve::parikh::{is_unbordered, parikh_rewrite, Mode};
use wordsolve::powers::{detect_chain, introduce, sdec, PrefixCase};
use wordsolve::rules::Branch;
use wordsolve::{solve, Atom, Binding, IntSolver, IntSolverConfig, IntStore, Model, SearchConfig, StringEquation, StringTerm, Token, Verdict, Vocab};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn system(eqs: &[&str]) -> (Vocab, Vec<StringEquation>) {
    let mut v = Vocab::new();
    let es = eqs.iter().map(|s| parse_equation(&mut v, s).unwrap()).collect();
    (v, es)
}

fn regression_verdicts() -> Check {
    let mut times = Vec::new();
    let timed = |eqs: &[&str], times: &mut Vec<u128>| {
        let (v, es) = system(eqs);
        let t = Instant::now();
        let out = solve(&es, v, &SearchConfig::default());
        times.push(t.elapsed().as_millis());
        (out, es)
    };

    let (out, es) = timed(&["x x = y b"], &mut times);
    match &out.verdict {
        Verdict::Sat(m) => ensure(m.satisfies_all(&es, 'a'), || "xx=yb model does not verify".into())?,
        v => return Err(format!("xx=yb gave {}", v.name())),
    }

    let (out, _) = timed(&["x b x a = a x b x"], &mut times);
    ensure(out.verdict == Verdict::Unsat, || format!("xbxa=axbx gave {}", out.verdict.name()))?;

    let (out, _) = timed(&["x a y = y b x"], &mut times);
    ensure(out.verdict == Verdict::Unsat && out.stats.nodes_expanded == 0 && out.stats.parikh_refutations >= 1, || {
        format!("xay=ybx gave {} after {} expansions", out.verdict.name(), out.stats.nodes_expanded)
    })?;

    let (out, _) = timed(&["x a x a a b b b y = x y a b a b a b x"], &mut times);
    let via_ab = out.trace.iter().any(|e| matches!(e, TraceEvent::Parikh { pattern, .. } if pattern == "ab"));
    ensure(out.verdict == Verdict::Unsat && via_ab, || format!("xaxaabbby gave {} (ab refutation: {via_ab})", out.verdict.name()))?;
    let mut v = Vocab::new();
    let hi = parikh_rewrite(Mode::Max, &['a', 'b'], &parse_term(&mut v, "xaxaabbby").unwrap()).unwrap();
    let lo = parikh_rewrite(Mode::Min, &['a', 'b'], &parse_term(&mut v, "xyabababx").unwrap()).unwrap();
    ensure(hi.coeffs == lo.coeffs && hi.constant - lo.constant == -1, || "difference for ab is not -1".into())?;

    let (out, _) = timed(&["x3x3x4bx5b = x5x5x5x5x4bb", "x1x1acx2x4x2x5x3bax5x3x4x3 = x2x2abcx1x1x3x3x3x4x4ax4"], &mut times);
    let target = vec!["x1 x1 a c x2 x2 b = x2 x2 a b c x1 x1".to_string()];
    let reached = out.trace.iter().any(|e| matches!(e, TraceEvent::Parikh { equations, .. } if *equations == target));
    ensure(out.verdict == Verdict::Unsat && reached, || format!("five-variable system gave {} (target node refuted: {reached})", out.verdict.name()))?;

    let slowest = *times.iter().max().unwrap();
    ensure(slowest < 10_000, || format!("slowest instance took {slowest} ms"))?;
    Ok(format!("5/5 verdicts, slowest {slowest} ms"))
}

fn parikh_worked_values() -> Check {
    let mut v = Vocab::new();
    let coeff = |v: &Vocab, s: &wordsolve::parikh::ParikhSum, name: &str| s.coeffs.get(&Token::Var(v.lookup_var(name).unwrap())).copied();
    let hi = parikh_rewrite(Mode::Max, &['a', 'b'], &parse_term(&mut v, "xaxaabbby").unwrap()).unwrap();
    let lo = parikh_rewrite(Mode::Min, &['a', 'b'], &parse_term(&mut v, "xyabababx").unwrap()).unwrap();
    for (what, s, c) in [("max", &hi, 2), ("min", &lo, 3)] {
        ensure(s.constant == c && s.coeffs.len() == 2 && coeff(&v, s, "x") == Some(2) && coeff(&v, s, "y") == Some(1), || format!("{what} normal form is {s:?}"))?;
    }
    Ok("max 2 + 2x + y, min 3 + 2x + y".into())
}

fn oracle_soundness() -> Check {
    let mut r = common::rng(2000);
    let config = SearchConfig { timeout: Some(Duration::from_secs(2)), max_nodes: 20_000, ..SearchConfig::default() };
    let start = Instant::now();
    let (mut sat, mut unsat, mut unknown) = (0, 0, 0);
    let mut bad = Vec::new();
    for _ in 0..2000 {
        let (v, eqs) = common::random_system(&mut r, 2, 3, &['a', 'b'], 4);
        let text = common::show(&v, &eqs);
        match solve(&eqs, v, &config).verdict {
            Verdict::Sat(m) => {
                sat += 1;
                if !m.satisfies_all(&eqs, 'a') {
                    bad.push(format!("unverified model for {text}"));
                }
            }
            Verdict::Unsat => {
                unsat += 1;
                if let OracleResult::Sat(_) = brute_force(&eqs, 4, &['a', 'b']) {
                    bad.push(format!("bounded model refutes unsat for {text}"));
                }
            }
            Verdict::Unknown(_) => unknown += 1,
        }
    }
    let secs = start.elapsed().as_secs();
    ensure(bad.is_empty(), || format!("{} disagreements, first: {}", bad.len(), bad[0]))?;
    ensure(secs <= 300, || format!("took {secs} s"))?;
    Ok(format!("0 disagreements; sat {sat}, unsat {unsat}, unknown {unknown}; {secs} s"))
}

fn parikh_lemma() -> Check {
    let mut r = common::rng(1000);
    let alphabet = ['a', 'b', 'c'];
    let mut checks = 0;
    let mut cases = 0;
    while cases < 1000 {
        let w: Vec<char> = (0..r.random_range(2..=4)).map(|_| alphabet[r.random_range(0..3)]).collect();
        if !is_unbordered(&w) {
            continue;
        }
        cases += 1;
        let mut v = Vocab::new();
        let ground: String = (0..r.random_range(0..=14)).map(|_| alphabet[r.random_range(0..3)]).collect();
        let g = StringTerm::from_chars(&ground);
        let n = count_occurrences(&w, &ground.chars().collect::<Vec<_>>()) as i64;
        let (lo, hi) = (parikh_rewrite(Mode::Min, &w, &g).unwrap(), parikh_rewrite(Mode::Max, &w, &g).unwrap());
        ensure(lo.constant == n && hi.constant == n && lo.coeffs.is_empty() && hi.coeffs.is_empty(), || format!("{w:?} in {ground}: {lo:?} / {hi:?}"))?;

        let shape: Vec<String> = (0..r.random_range(0..=10))
            .map(|_| match r.random_range(0..5) {
                0 => "x".to_string(),
                1 => "y".to_string(),
                k => alphabet[k - 2].to_string(),
            })
            .collect();
        let u = parse_term(&mut v, &shape.join(" ")).unwrap();
        let (lo, hi) = (parikh_rewrite(Mode::Min, &w, &u).unwrap(), parikh_rewrite(Mode::Max, &w, &u).unwrap());
        for _ in 0..10 {
            let xs: String = (0..r.random_range(0..=5)).map(|_| alphabet[r.random_range(0..3)]).collect();
            let ys: String = (0..r.random_range(0..=5)).map(|_| alphabet[r.random_range(0..3)]).collect();
            let concrete: String = shape.iter().map(|t| if t == "x" { xs.as_str() } else if t == "y" { ys.as_str() } else { t.as_str() }).collect();
            let n = count_occurrences(&w, &concrete.chars().collect::<Vec<_>>()) as i64;
            let inner = |t: &Token| {
                let s = if matches!(t, Token::Var(x) if v.var_name(*x) == "x") { &xs } else { &ys };
                count_occurrences(&w, &s.chars().collect::<Vec<_>>()) as i64
            };
            let (a, b) = (lo.eval(&inner), hi.eval(&inner));
            ensure(a <= n && n <= b, || format!("{w:?} in {concrete}: {n} outside [{a}, {b}]"))?;
            checks += 1;
        }
    }
    Ok(format!("0 violations over {cases} patterns, {checks} substitutions"))
}

/// Whether `m` extends to the fresh integers of `b` so that `b` holds.
fn branch_covers(b: &Branch, m: &Model, inputs: &[StringEquation]) -> bool {
    let mut fresh: Vec<Atom> = Vec::new();
    for bind in &b.bindings {
        if let Binding::Str(_, t) = bind {
            fresh.extend(t.int_atoms().into_iter().filter(|a| matches!(a, Atom::Int(k) if !m.ints.contains_key(k))));
        }
    }
    for c in &b.constraints {
        fresh.extend(c.lhs.atoms().chain(c.rhs.atoms()).filter(|a| matches!(a, Atom::Int(k) if !m.ints.contains_key(k))));
    }
    fresh.sort();
    fresh.dedup();
    let Some(store) = IntStore::new().with(b.constraints.iter()) else { return false };
    let mut digits = vec![0i64; fresh.len()];
    loop {
        let mut ext = m.clone();
        for (a, d) in fresh.iter().zip(&digits) {
            if let Atom::Int(k) = a {
                ext.ints.insert(*k, *d);
            }
        }
        let binds_ok = b.bindings.iter().all(|bind| match bind {
            Binding::Str(x, t) => ext.eval_term(t, 'a').ok().as_deref() == Some(ext.strings[x].as_str()),
            _ => true,
        });
        if binds_ok && store.holds(&|a| ext.int_value(a)) && ext.satisfies_all(&b.equations, 'a') && ext.satisfies_all(inputs, 'a') {
            return true;
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return false;
            }
            digits[i] += 1;
            if digits[i] <= 6 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn random_chain(r: &mut rand_chacha::ChaCha8Rng) -> Vec<String> {
    let k = r.random_range(1..=2);
    let vars: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let ground = |r: &mut rand_chacha::ChaCha8Rng| -> String {
        if r.random_bool(0.2) {
            return format!("({})^m{}", if r.random_bool(0.5) { "ab" } else { "a" }, r.random_range(1..=2));
        }
        (0..r.random_range(1..=3)).map(|_| if r.random_bool(0.5) { "a " } else { "b " }).collect()
    };
    let tail = |r: &mut rand_chacha::ChaCha8Rng, vars: &[String]| -> String {
        (0..r.random_range(0..=2)).map(|_| if r.random_bool(0.5) { format!("{} ", vars[r.random_range(0..vars.len())]) } else { "a ".to_string() }).collect()
    };
    (0..k)
        .map(|i| {
            let from = &vars[(i + k - 1) % k];
            format!("{} {from} {} = {} {}", ground(r), tail(r, &vars), vars[i], tail(r, &vars))
        })
        .collect()
}

fn power_exhaustiveness() -> Check {
    let mut r = common::rng(200);
    let (mut chains, mut models, mut tries) = (0, 0, 0);
    while chains < 200 {
        tries += 1;
        ensure(tries < 20_000, || format!("only {chains} chains detected"))?;
        let text = random_chain(&mut r);
        let refs: Vec<&str> = text.iter().map(String::as_str).collect();
        let (mut v, eqs) = system(&refs);
        let Some(chain) = detect_chain(&eqs) else { continue };
        chains += 1;
        let mut solver = IntSolver::new(IntSolverConfig::default());
        let branches = introduce(&chain, &IntStore::new(), &mut solver, &mut v);
        for m in all_models(&eqs, None, &Bounds::new(6, &['a', 'b'])) {
            models += 1;
            ensure(branches.iter().any(|b| branch_covers(b, &m, &eqs)), || format!("model {m:?} of {} lost", text.join(" ∧ ")))?;
        }
    }
    Ok(format!("0 violations over {chains} chains, {models} models"))
}

fn sdec_vectors() -> Check {
    let mut v = Vocab::new();
    let shown = |v: &Vocab, cs: &[PrefixCase]| cs.iter().map(|c| c.prefix.display(v).to_string()).collect::<Vec<_>>();
    let o = sdec(&parse_term(&mut v, "o").unwrap(), &mut v);
    ensure(o == vec![PrefixCase { prefix: StringTerm::empty(), side: vec![] }], || format!("SDec(o) = {o:?}"))?;
    ensure(sdec(&StringTerm::empty(), &mut v).is_empty(), || "SDec(ε) not empty".into())?;
    let ab = sdec(&parse_term(&mut v, "ab").unwrap(), &mut v);
    ensure(shown(&v, &ab) == ["ε", "a"] && ab.iter().all(|c| c.side.is_empty()), || format!("SDec(ab) = {:?}", shown(&v, &ab)))?;
    let p = sdec(&parse_term(&mut v, "(ab)^m").unwrap(), &mut v);
    let ok = p.len() == 2
        && p.iter().all(|c| c.side.len() == 2 && matches!(c.prefix.first(), Some(Token::Power(_))))
        && p[0].prefix.symbolic_length() == 1
        && p[1].prefix.symbolic_length() == 2;
    ensure(ok, || format!("SDec((ab)^m) = {:?}", shown(&v, &p)))?;
    Ok("SDec(o), SDec(ε), SDec(ab), SDec((ab)^m)".into())
}

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn benchmark_gate() -> Check {
    let config = SearchConfig { timeout: Some(Duration::from_secs(10)), ..SearchConfig::default() };
    let mut summary = Vec::new();
    for track in ["regression", "track01", "track03"] {
        let dir = corpus().join(track);
        let report = run_bench(&dir, &config).map_err(|e| e.to_string())?;
        ensure(!report.rows.is_empty(), || format!("{track} is empty"))?;
        for row in report.rows.iter().filter(|r| r.verdict == "unsat") {
            let p = load(&dir.join(&row.file)).map_err(|e| e.to_string())?;
            let mut alphabet: Vec<char> = p.vocab.alphabet().iter().copied().collect();
            if alphabet.is_empty() {
                alphabet.push('a');
            }
            ensure(!brute_force(&p.assertions, 3, &alphabet).is_sat(), || format!("{track}/{}: unsat refuted at length 3", row.file))?;
        }
        let t = &report.totals()[track_key(&report)];
        summary.push(format!("{track} {}/{}", t.solved(), t.files));
    }
    Ok(format!("models verified, no refuted unsat; solved {}", summary.join(", ")))
}

fn track_key(r: &wordsolve::harness::BenchReport) -> &str {
    r.rows[0].track.as_str()
}

fn determinism() -> Check {
    let mut files: Vec<PathBuf> = Vec::new();
    for track in ["regression", "track01", "track03"] {
        let mut fs: Vec<PathBuf> = std::fs::read_dir(corpus().join(track)).unwrap().map(|e| e.unwrap().path()).collect();
        fs.sort();
        files.extend(fs.into_iter().take(8));
    }
    for seed in [1, 99] {
        let config = SearchConfig { seed: Some(seed), ..SearchConfig::default() };
        for f in &files {
            let p = load(f).map_err(|e| e.to_string())?;
            let run = || {
                let out = solve(&p.assertions, p.vocab.clone(), &config);
                let reason = match &out.verdict {
                    Verdict::Unknown(r) => Some(*r),
                    _ => None,
                };
                (out.verdict.clone(), out.stats.report(reason), out.graph.to_dot())
            };
            let (a, b) = (run(), run());
            ensure(a == b, || format!("{} differs between runs with seed {seed}", f.display()))?;
        }
    }
    Ok(format!("{} files, 2 seeds: identical verdicts, stats and DOT", files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("regression verdicts", regression_verdicts),
        ("worked occurrence normal forms", parikh_worked_values),
        ("bounded-oracle soundness", oracle_soundness),
        ("occurrence bound properties", parikh_lemma),
        ("power introduction exhaustiveness", power_exhaustiveness),
        ("prefix decomposition vectors", sdec_vectors),
        ("corpus benchmark gate", benchmark_gate),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
