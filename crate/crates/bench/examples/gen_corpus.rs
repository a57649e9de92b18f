//! Regenerates the checked-in corpus: `cargo run -p wordsolve-bench --example gen_corpus -- corpus`

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "corpus".to_string());
    wordsolve_bench::write_corpus(std::path::Path::new(&dir), 2024, 40)
}
