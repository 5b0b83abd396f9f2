//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use qcomm::exact::RatioDoc;
use qcomm_lab::{Config, Suite, SuiteReport};

const SEED: u64 = 1;

struct Criterion {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn timed(suite: Suite, cfg: &Config) -> (SuiteReport, Duration) {
    let start = Instant::now();
    let report = suite.run(cfg, SEED).unwrap_or_else(|e| panic!("{}: {e}", suite.name()));
    (report, start.elapsed())
}

/// Passes when every listed check (or every check with a listed prefix)
/// passed and the suite finished inside `limit`.
fn judge(id: u32, title: &'static str, r: &SuiteReport, took: Duration, limit: Option<Duration>, keys: &[&str]) -> Criterion {
    let selected: Vec<(&String, &bool)> = r
        .checks
        .iter()
        .filter(|(k, _)| keys.iter().any(|p| k.as_str() == *p || (p.ends_with('.') && k.starts_with(p))))
        .collect();
    let failed: Vec<&str> = selected.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.as_str()).collect();
    let in_time = limit.is_none_or(|l| took <= l);
    let mut detail = format!("{} checks, {:.1}s", selected.len(), took.as_secs_f64());
    if let Some(l) = limit {
        detail += &format!(" (limit {}s)", l.as_secs());
    }
    if !failed.is_empty() {
        detail += &format!("; failed: {}", failed.join(", "));
    }
    Criterion {
        id,
        title,
        pass: !selected.is_empty() && failed.is_empty() && in_time,
        detail,
    }
}

fn metric(r: &SuiteReport, key: &str) -> String {
    r.metrics.get(key).map_or_else(|| "missing".into(), |v| v.to_string())
}

fn golden_oracle() -> RatioDoc {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../qcomm/tests/data/golden_classical_oracle.json");
    serde_json::from_str(&std::fs::read_to_string(path).expect("golden file")).expect("golden json")
}

fn run_binary(dir: &std::path::Path, jobs: usize) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_qcomm-lab"))
        .args(["full-suite", "--seed", &SEED.to_string(), "--jobs", &jobs.to_string()])
        .arg("--out")
        .arg(dir.join("runs.jsonl"))
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn main() {
    let cfg = Config::default();
    let secs = Duration::from_secs;
    let mut results = Vec::new();

    let (r, t) = timed(Suite::DecomposeCheck, &cfg);
    results.push(judge(1, "decomposition exactness", &r, t, Some(secs(10)), &["d1.", "d2."]));

    let (r, t) = timed(Suite::FourierGrowth, &cfg);
    results.push(judge(2, "two-way POVM completeness", &r, t, Some(secs(30)), &["povm.complete"]));
    results.push(judge(3, "exact evaluation vs sequential sampling", &r, t, Some(secs(120)), &["sampling."]));
    let growth = judge(5, "SMP Fourier growth chain", &r, t, None, &["growth."]);

    let (r, t) = timed(Suite::LevelkAudit, &cfg);
    results.push(judge(4, "level-k inequality audits", &r, t, Some(secs(60)), &["scalar.", "matrix."]));
    results.push(growth);

    let (r, t) = timed(Suite::MomentCheck, &cfg);
    let mut c = judge(6, "moment agreement up to k, counterexample at k+1", &r, t, Some(secs(120)), &["moments."]);
    let firsts: Vec<String> = cfg
        .moment_configs
        .iter()
        .map(|[n, m, k]| {
            let w = &r.metrics[&format!("moments.{n}-{m}-{k}.first_disagreement")];
            format!("({n},{m},{k}) first disagreement at size {}", w["size"])
        })
        .collect();
    c.detail += &format!("; {}", firsts.join(", "));
    results.push(c);
    results.push(judge(
        7,
        "correlation identity and matching probability",
        &r,
        t,
        None,
        &["identity.exact", "match_probability.equals_enumeration"],
    ));

    let (r, t) = timed(Suite::BhmDemo, &cfg);
    let mut c = judge(8, "BHM quantum protocol", &r, t, Some(secs(300)), &["relation.", "edge_hit.", "protocol."]);
    c.detail += &format!(
        "; success {} at reps {}, conditional correctness {}",
        metric(&r, "protocol.success"),
        metric(&r, "protocol.reps"),
        metric(&r, "protocol.conditional_correctness")
    );
    results.push(c);

    let (r, t) = timed(Suite::StripQsmp, &cfg);
    let mut c = judge(
        9,
        "entanglement removal, simultaneous protocols",
        &r,
        t,
        None,
        &[
            "flag_rate_within_4_sigma_of_required",
            "conditional_state_exact",
            "advantage_within_4_sigma_of_required",
        ],
    );
    c.detail += &format!(
        "; flag exact {} vs required {}, stripped advantage {} vs required {}",
        metric(&r, "flag.exact"),
        metric(&r, "flag.required"),
        metric(&r, "advantage.stripped_exact"),
        metric(&r, "advantage.required")
    );
    results.push(c);

    let (r, t) = timed(Suite::StripOneway, &cfg);
    results.push(judge(
        10,
        "entanglement removal, one-way protocols",
        &r,
        t,
        None,
        &[
            "d1.identity",
            "d2.identity",
            "d1.quantization_bound",
            "d2.quantization_bound",
            "family.advantage_above_floor",
        ],
    ));

    let (r, _) = timed(Suite::ClassicalOracle, &cfg);
    let golden = golden_oracle();
    let reproduced = r.metrics.get("classical.advantage") == Some(&serde_json::to_value(&golden).unwrap());
    let juxtaposed = r.metrics.contains_key("quantum.conditional_correctness");
    results.push(Criterion {
        id: 11,
        title: "classical oracle golden rational",
        pass: reproduced && juxtaposed,
        detail: format!(
            "classical advantage {}/{} (golden {}/{}), quantum conditional correctness {}",
            r.metrics["classical.advantage"]["num"].as_str().unwrap_or("?"),
            r.metrics["classical.advantage"]["den"].as_str().unwrap_or("?"),
            golden.num,
            golden.den,
            metric(&r, "quantum.conditional_correctness")
        ),
    });

    let dir = tempfile::tempdir().expect("temp dir");
    let (a, code_a) = run_binary(dir.path(), 1);
    let (b, code_b) = run_binary(dir.path(), 1);
    let (c4, code_c) = run_binary(dir.path(), 4);
    let log = qcomm_lab::record::read_log(&dir.path().join("runs.jsonl")).expect("run log");
    let same_log = log.len() == 3 && log.iter().all(|rec| rec.outcome == log[0].outcome);
    results.push(Criterion {
        id: 12,
        title: "determinism across runs and worker counts",
        pass: !a.is_empty() && a == b && a == c4 && same_log && code_a == code_b && code_a == code_c,
        detail: format!(
            "{} report bytes, jobs 1/1/4 identical: {}, log records: {}, exit codes {code_a}/{code_b}/{code_c}",
            a.len(),
            a == b && a == c4,
            log.len()
        ),
    });

    results.sort_by_key(|c| c.id);
    for c in &results {
        println!(
            "{} criterion {:02}: {} [{}]",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            c.detail
        );
    }
    let failed = results.iter().filter(|c| !c.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
