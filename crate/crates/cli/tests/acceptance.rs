//! Acceptance run: every criterion prints PASS or FAIL, and the process
//! exits nonzero if any of them failed.
//!
//! CLI checks go through the built `teamcheck` binary; the rest call the
//! library directly.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value as Json;
use teamcheck::entailment::{phi1, phi2, psi1, psi2};
use teamcheck::nogo::{cabello_config, ks_colorable};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples")
}

fn example(name: &str) -> String {
    examples().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamcheck")).args(args).output().expect("teamcheck runs")
}

/// Runs with `--json` and parses stdout; nonzero exit is an error.
fn json(args: &[&str]) -> Result<Json, String> {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let text = String::from_utf8_lossy(&out.stdout);
    if !out.status.success() {
        return Err(format!("`teamcheck {}` exited with {}: {text}", args.join(" "), out.status));
    }
    serde_json::from_str(&text).map_err(|e| format!("`teamcheck {}` printed bad JSON: {e}", args.join(" ")))
}

fn verdict(args: &[&str]) -> Result<bool, String> {
    let j = json(args)?;
    j["verdict"].as_bool().ok_or_else(|| format!("no verdict from `teamcheck {}`", args.join(" ")))
}

fn expect(what: &str, got: bool, want: bool) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: expected {want}, got {got}"))
    }
}

fn suite(name: &str, samples: usize) -> Outcome {
    let n = samples.to_string();
    let j = json(&["verify", "--suite", name, "--samples", &n])?;
    let checks = j["checks"].as_array().cloned().unwrap_or_default();
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c["passed"] != Json::Bool(true))
        .map(|c| format!("{} ({})", c["name"], c["detail"]))
        .collect();
    if j["passed"] == Json::Bool(true) && failed.is_empty() && !checks.is_empty() {
        let details: Vec<&str> = checks.iter().filter_map(|c| c["detail"].as_str()).filter(|d| !d.is_empty()).collect();
        Ok(details.join("; "))
    } else {
        Err(format!("suite {name} failed: {}", failed.join(", ")))
    }
}

fn flag(j: &Json, key: &str) -> Result<bool, String> {
    j[key].as_bool().ok_or_else(|| format!("report has no boolean `{key}`"))
}

fn within(t: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if t <= limit {
        Ok(())
    } else {
        Err(format!("{what} took {t:.1?}, target {limit:?}"))
    }
}

fn example_verdicts() -> Outcome {
    let cases = [
        ("sig.json", "weak-det", true),
        ("sig.json", "strong-det", false),
        ("sig_lambda.json", "weak-det", true),
        ("sig_lambda.json", "out-indep", true),
        ("sig_lambda.json", "par-indep", false),
        ("sig_lambda.json", "strong-det", false),
        ("loc6.json", "locality", false),
        ("loc6.json", "out-indep", true),
        ("loc6.json", "lambda-indep", true),
        ("loc6.json", "par-indep", false),
        ("ex22.json", "no-sig", true),
        ("ex22.json", "weak-det", false),
    ];
    for (file, prop, want) in cases {
        let got = verdict(&["check", "--model", &example(file), "--property", prop])?;
        expect(&format!("{prop} on {file}"), got, want)?;
    }
    let got = verdict(&["eval", "--team", &example("sig.json"), "--formula", "o1 _||_{m1} m2"])?;
    expect("o1 _||_{m1} m2 on sig.json", got, false)?;
    Ok(format!("{} verdicts", cases.len() + 1))
}

fn separations() -> Outcome {
    let start = Instant::now();
    let pt1 = example("pt1.json");
    let rt2 = example("rt2.json");
    let (p1, f1, p2, f2) = (psi1().to_string(), phi1().to_string(), psi2().to_string(), phi2().to_string());
    expect("PT1 |= psi1", verdict(&["eval", "--team", &pt1, "--prob", "--formula", &p1])?, true)?;
    expect("PT1 |= phi1", verdict(&["eval", "--team", &pt1, "--prob", "--formula", &f1])?, false)?;
    expect("RT2 |= psi2", verdict(&["eval", "--team", &rt2, "--formula", &p2])?, true)?;
    expect("RT2 |= phi2", verdict(&["eval", "--team", &rt2, "--formula", &f2])?, false)?;
    let j = json(&["entail", "--lhs", &p1, "--rhs", &f1, "--vars", "x y z w", "--universe", "2", "--max-rows", "7"])?;
    if !j["report"]["counterexample"].is_null() {
        return Err(format!("relational counterexample to psi1 |= phi1: {}", j["report"]["counterexample"]));
    }
    let checked = j["report"]["teams_checked"].as_u64().unwrap_or(0);
    if checked == 0 {
        return Err("the bounded search checked no teams".into());
    }
    within(start.elapsed(), Duration::from_secs(60), "separations")?;
    Ok(format!("{checked} teams searched in {:.1?}", start.elapsed()))
}

fn entailments() -> Outcome {
    let start = Instant::now();
    let detail = suite("entailments", 0)?;
    within(start.elapsed(), Duration::from_secs(600), "entailments")?;
    Ok(detail)
}

fn constructions() -> Outcome {
    let detail = suite("constructions", 100)?;
    let dir = std::env::temp_dir().join(format!("teamcheck-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let targets = [("single-valued", "sing-val"), ("strong-det", "strong-det"), ("weak-det", "lambda-indep")];
    for (target, prop) in targets {
        let out = dir.join(format!("{target}.json")).to_string_lossy().into_owned();
        json(&["construct", "--model", &example("ex22.json"), "--target", target, "--out", &out])?;
        expect(
            &format!("{prop} of the {target} construction"),
            verdict(&["check", "--model", &out, "--property", prop])?,
            true,
        )?;
    }
    // LOC6 is not local, so localisation must refuse it
    let out = dir.join("localized.json").to_string_lossy().into_owned();
    let refused = run(&["construct", "--model", &example("loc6.json"), "--target", "localize", "--out", &out]);
    let _ = std::fs::remove_dir_all(&dir);
    let stderr = String::from_utf8_lossy(&refused.stderr);
    expect("localize refuses LOC6", refused.status.code() == Some(2) && stderr.contains("Loc^h"), true)?;
    Ok(detail)
}

fn hardy() -> Outcome {
    let start = Instant::now();
    let j = json(&["nogo", "hardy"])?;
    expect("HARDY conditions", flag(&j, "conditions")?, true)?;
    expect("StrongDet and lambda-Indep model", flag(&j, "strong_det_lambda_indep")?, false)?;
    expect("Loc and lambda-Indep model", flag(&j, "local_lambda_indep")?, false)?;
    let detail = suite("hardy", 0)?;
    within(start.elapsed(), Duration::from_secs(300), "hardy")?;
    Ok(detail)
}

fn kochen_specker() -> Outcome {
    let cfg = cabello_config();
    cfg.validate().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let colouring = ks_colorable(&cfg);
    let t = start.elapsed();
    expect("ks_colorable finds a colouring", colouring.is_some(), false)?;
    within(t, Duration::from_secs(1), "ks_colorable")?;
    let j = json(&["nogo", "ks", "--config", &example("cabello-18.json")])?;
    let r = &j["report"];
    expect("bundled configuration has 18 vectors", r["vectors"] == 18, true)?;
    expect("bundled configuration has 9 bases", r["bases"] == 9, true)?;
    expect("colouring", !r["colouring"].is_null(), false)?;
    expect("ncc(m1..m4)", flag(r, "ncc")?, false)?;
    expect("non-contextual extension", flag(r, "noncontextual_extension")?, false)?;
    let detail = suite("ks", 0)?;
    Ok(format!("colouring search {t:.1?}; {detail}"))
}

fn appendix() -> Outcome {
    let start = Instant::now();
    let detail = suite("appendix", 0)?;
    within(start.elapsed(), Duration::from_secs(300), "appendix")?;
    Ok(detail)
}

fn determinism() -> Outcome {
    let commands: Vec<Vec<String>> = [
        vec!["check", "--model", &example("sig_lambda.json"), "--property", "weak-det"],
        vec!["--json", "eval", "--team", &example("pt1.json"), "--prob", "--formula", &psi1().to_string()],
        vec!["--json", "nogo", "hardy"],
        vec!["--json", "nogo", "exists", "--model", &example("ex22.json"), "--target", "strong-det+lambda"],
        vec!["nogo", "ks"],
        vec!["--seed", "7", "verify", "--suite", "fig1"],
        vec!["--seed", "7", "--json", "verify", "--suite", "constructions"],
        vec!["--json", "entail", "--lhs", "dep(x, y)", "--rhs", "x _||_ y", "--vars", "x y", "--max-rows", "3"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(str::to_string).collect())
    .collect();
    for c in &commands {
        let args: Vec<&str> = c.iter().map(String::as_str).collect();
        let (a, b) = (run(&args), run(&args));
        if a.stdout != b.stdout || a.stderr != b.stderr || a.status != b.status {
            return Err(format!("`teamcheck {}` differs between runs", c.join(" ")));
        }
    }
    let dir = std::env::temp_dir().join(format!("teamcheck-determinism-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("{k}.json")).to_string_lossy().into_owned();
        json(&["construct", "--model", &example("ex22.json"), "--target", "weak-det", "--out", &out])?;
        files.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    if files[0] != files[1] {
        return Err("construct output differs between runs".into());
    }
    Ok(format!("{} commands plus construct --out", commands.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 example verdicts", example_verdicts),
        ("2 separations", separations),
        ("3 semantics comparison", || suite("semantics", 10_000)),
        ("4 property entailments", entailments),
        ("5 constructions", constructions),
        ("6 collapse/projection commutativity", || suite("fig1", 1000)),
        ("7 Hardy", hardy),
        ("8 Kochen-Specker", kochen_specker),
        ("9 appendix equivalences", appendix),
        ("10 determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name} [{:.1?}] {detail}", start.elapsed()),
            Err(why) => {
                println!("FAIL {name} [{:.1?}] {why}", start.elapsed());
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
