//! Directory benchmark runner with CSV output and per-track totals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{HarnessError, ParseError};
use crate::graph::{solve, Outcome, SearchConfig, Verdict};
use crate::smtlib::{parse_smt2, Problem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub file: String,
    pub track: String,
    pub verdict: String,
    pub time_ms: u128,
    pub nodes: u64,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrackTotals {
    pub files: usize,
    pub sat: usize,
    pub unsat: usize,
    pub unknown: usize,
    pub other: usize,
}

impl TrackTotals {
    pub fn solved(&self) -> usize {
        self.sat + self.unsat
    }
}

impl BenchReport {
    pub fn totals(&self) -> BTreeMap<String, TrackTotals> {
        let mut out: BTreeMap<String, TrackTotals> = BTreeMap::new();
        for r in &self.rows {
            let t = out.entry(r.track.clone()).or_default();
            t.files += 1;
            match r.verdict.as_str() {
                "sat" => t.sat += 1,
                "unsat" => t.unsat += 1,
                "unknown" => t.unknown += 1,
                _ => t.other += 1,
            }
        }
        out
    }

    pub fn table(&self) -> String {
        let mut s = String::from("track        files  solved    sat  unsat  unknown  other\n");
        for (track, t) in self.totals() {
            let _ = writeln!(s, "{track:<12} {:>5}  {:>6}  {:>5}  {:>5}  {:>7}  {:>5}", t.files, t.solved(), t.sat, t.unsat, t.unknown, t.other);
        }
        s
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HarnessError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["file", "verdict", "time_ms", "nodes"])?;
        for r in &self.rows {
            out.write_record([r.file.as_str(), r.verdict.as_str(), &r.time_ms.to_string(), &r.nodes.to_string()])?;
        }
        out.flush().map_err(|e| HarnessError::Io { path: "csv".into(), source: e })?;
        Ok(())
    }
}

pub fn load(path: &Path) -> Result<Problem, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e })?;
    let mut p = parse_smt2(&text).map_err(|e| HarnessError::Parse { path: path.display().to_string(), source: e })?;
    p.source = Some(path.display().to_string());
    Ok(p)
}

/// Solves a parsed problem and re-checks any model against the input.
pub fn solve_problem(p: &Problem, config: &SearchConfig) -> Result<Outcome, HarnessError> {
    let out = solve(&p.assertions, p.vocab.clone(), config);
    if let Verdict::Sat(m) = &out.verdict {
        let least = p.vocab.alphabet().iter().next().copied().unwrap_or('a');
        if !m.satisfies_all(&p.assertions, least) {
            return Err(HarnessError::ModelRejected { path: p.source.clone().unwrap_or_default() });
        }
    }
    Ok(out)
}

fn smt2_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    let io = |e| HarnessError::Io { path: dir.display().to_string(), source: e };
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.is_dir() {
            smt2_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "smt2") {
            out.push(p);
        }
    }
    Ok(())
}

/// Runs every `.smt2` file below `dir`. The track of a file is its first
/// directory below `dir`.
pub fn run_bench(dir: &Path, config: &SearchConfig) -> Result<BenchReport, HarnessError> {
    let mut files = Vec::new();
    smt2_files(dir, &mut files)?;
    files.sort();
    let mut report = BenchReport::default();
    for f in files {
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        let track = match rel.components().count() {
            0 | 1 => ".".to_string(),
            _ => rel.components().next().map(|c| c.as_os_str().to_string_lossy().into_owned()).unwrap_or_default(),
        };
        let start = Instant::now();
        let (verdict, nodes) = match load(&f) {
            Ok(p) => {
                let out = solve_problem(&p, config)?;
                (out.verdict.name().to_string(), out.stats.nodes_created)
            }
            Err(HarnessError::Parse { source: ParseError::Unsupported { .. }, .. }) => ("unsupported".to_string(), 0),
            Err(HarnessError::Parse { .. }) => ("error".to_string(), 0),
            Err(e) => return Err(e),
        };
        let time_ms = start.elapsed().as_millis();
        log::info!("{}: {verdict} in {time_ms} ms", rel.display());
        report.rows.push(BenchRow { file: rel.display().to_string(), track, verdict, time_ms, nodes });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory_gives_empty_report() {
        let d = tempfile::tempdir().unwrap();
        let r = run_bench(d.path(), &SearchConfig::default()).unwrap();
        assert!(r.rows.is_empty());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "file,verdict,time_ms,nodes\n");
    }

    #[test]
    fn tracks_and_unsupported_rows() {
        let d = tempfile::tempdir().unwrap();
        std::fs::create_dir(d.path().join("t1")).unwrap();
        std::fs::write(d.path().join("t1/a.smt2"), "(declare-const x String)\n(assert (= (str.++ x \"a\") (str.++ \"a\" x)))\n(check-sat)\n").unwrap();
        std::fs::write(d.path().join("t1/b.smt2"), "(declare-const x String)\n(assert (str.in_re x re.all))\n").unwrap();
        let r = run_bench(d.path(), &SearchConfig::default()).unwrap();
        assert_eq!(r.rows.iter().map(|r| r.verdict.as_str()).collect::<Vec<_>>(), ["sat", "unsupported"]);
        let t = &r.totals()["t1"];
        assert_eq!((t.files, t.solved(), t.other), (2, 1, 1));
    }
}
