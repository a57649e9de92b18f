use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wordsolve::smtlib::parse_smt2;
use wordsolve::{solve, SearchConfig};

fn regression(c: &mut Criterion) {
    let dir = tempfile_dir();
    wordsolve_bench::write_corpus(&dir, 2024, 0).unwrap();
    let mut g = c.benchmark_group("regression");
    for name in ["square", "powers", "parikh-root", "parikh-ab", "five-vars"] {
        let text = std::fs::read_to_string(dir.join("regression").join(format!("{name}.smt2"))).unwrap();
        let p = parse_smt2(&text).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| solve(&p.assertions, p.vocab.clone(), &SearchConfig::default()))
        });
    }
    g.finish();
    let _ = std::fs::remove_dir_all(dir);
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("wordsolve-bench-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn generated(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let concat: Vec<_> = (0..20).map(|_| parse_smt2(&wordsolve_bench::smt2(&wordsolve_bench::concat_instance(&mut rng, &['a', 'b', 'c'], 14))).unwrap()).collect();
    let random: Vec<_> = (0..20).map(|_| parse_smt2(&wordsolve_bench::smt2(&wordsolve_bench::random_instance(&mut rng, &['a', 'b'], 7))).unwrap()).collect();
    let config = SearchConfig { timeout: Some(std::time::Duration::from_secs(1)), ..SearchConfig::default() };
    c.bench_function("concat-20", |b| {
        b.iter(|| concat.iter().map(|p| solve(&p.assertions, p.vocab.clone(), &config).stats.nodes_created).sum::<u64>())
    });
    c.bench_function("random-20", |b| {
        b.iter(|| random.iter().map(|p| solve(&p.assertions, p.vocab.clone(), &config).stats.nodes_created).sum::<u64>())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = regression, generated
}
criterion_main!(benches);
