//! Command-line front end for the team-semantics checker.
//!
//! Exit status: 0 when a verdict was computed (the verdict itself is in the
//! report), 2 for bad input, 3 when a search budget ran out.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use teamcheck::constructions::{
    construct_single_valued, construct_strong_det, construct_weakdet_lambdaindep, localize,
};
use teamcheck::entailment::entail;
use teamcheck::hvmodel::{empirically_equivalent, read_model, Equivalence};
use teamcheck::json::read_team;
use teamcheck::nogo::{
    cabello_config, exists_local_lambdaindep, exists_strongdet_lambdaindep, hardy_conditions, hardy_team, load_ks,
    verify_ks_theorems,
};
use teamcheck::verify::{run_suite, Suite, VerifyOptions};
use teamcheck::{
    check_property, eval_prob, eval_rel, Error, EvalBudget, Formula, Model, ModelKind, ProbTeam, PropertyName,
    TeamData, Var,
};

const SCHEMA: &str = "teamcheck-report/1";

#[derive(Parser)]
#[command(name = "teamcheck", version, about = "Exact model checking for dependence and independence logic")]
struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Search steps allowed per evaluation.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Largest team a universal quantifier may build.
    #[arg(long, global = true)]
    max_team: Option<usize>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a team.
    Eval {
        #[arg(long)]
        team: PathBuf,
        #[arg(long)]
        formula: String,
        /// Use probabilistic semantics (uniform weights if the team has none).
        #[arg(long)]
        prob: bool,
    },
    /// Check a named property of an empirical or hidden-variable model.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        property: String,
    },
    /// Build an empirically equivalent hidden-variable model.
    Construct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for a counterexample to an entailment.
    Entail(EntailArgs),
    /// No-go theorems.
    Nogo {
        #[command(subcommand)]
        which: Nogo,
    },
    /// Run a bundled invariant suite.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        /// Random instances per sampled check (suites enforce a minimum).
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
}

#[derive(Args)]
struct EntailArgs {
    #[arg(long)]
    lhs: String,
    #[arg(long)]
    rhs: String,
    /// Variables of the searched teams, space separated.
    #[arg(long)]
    vars: String,
    #[arg(long, default_value_t = 2)]
    universe: usize,
    #[arg(long, default_value_t = 4)]
    max_rows: usize,
}

#[derive(Subcommand)]
enum Nogo {
    /// The Hardy team has no local realistic model.
    Hardy,
    /// Kochen-Specker checks on the bundled or a given configuration.
    Ks {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Decide whether a relational empirical model has a model of the target kind.
    Exists {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        target: ExistsTarget,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    SingleValued,
    StrongDet,
    WeakDet,
    Localize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExistsTarget {
    #[value(name = "strong-det+lambda")]
    StrongDetLambda,
    #[value(name = "local+lambda")]
    LocalLambda,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A finished command: JSON body plus its plain-text rendering.
struct Report {
    json: Json,
    text: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Report {
        Report { json: json!({ "schema": SCHEMA, "command": command }), text: Vec::new() }
    }

    fn set(&mut self, key: &str, value: Json) -> &mut Self {
        self.json[key] = value;
        self
    }

    fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.text.push(s.into());
        self
    }
}

fn read(path: &Path) -> teamcheck::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> teamcheck::Result<Model> {
    read_model(&read(path)?)
}

fn parse_formula(s: &str) -> teamcheck::Result<Formula> {
    s.parse()
}

fn doc(m: &Model) -> Json {
    serde_json::to_value(m.to_doc()).expect("documents serialise")
}

fn verdict(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn run(cli: &Cli) -> teamcheck::Result<Report> {
    let mut budget = EvalBudget::default();
    if let Some(steps) = cli.budget {
        budget.max_steps = steps;
    }
    if let Some(rows) = cli.max_team {
        budget.max_rows = rows;
    }
    budget.validate()?;
    match &cli.command {
        Command::Eval { team, formula, prob } => {
            let f = parse_formula(formula)?;
            let data: TeamData = read_team(&read(team)?)?;
            let mut r = Report::new("eval");
            r.set("formula", json!(f.to_string()));
            let value = match (&data, prob) {
                (TeamData::Probabilistic(p), true) => eval_prob(p, &f)?,
                (TeamData::Relational(t), true) => {
                    r.line("note: no weights given, using the uniform distribution");
                    r.set("note", json!("uniform distribution"));
                    if t.is_empty() {
                        true
                    } else {
                        let pt: ProbTeam = ProbTeam::uniform(t)?;
                        eval_prob(&pt, &f)?
                    }
                }
                (d, false) => eval_rel(d.team(), &f, &budget)?,
            };
            let sem = if *prob { "probabilistic" } else { "relational" };
            r.set("semantics", json!(sem)).set("verdict", json!(value));
            r.line(format!("formula: {f}"))
                .line(format!("semantics: {sem}"))
                .line(format!("verdict: {}", verdict(value)));
            Ok(r)
        }
        Command::Check { model, property } => {
            let m = load_model(model)?;
            let p = PropertyName::from_cli(property, m.kind())?;
            let value = check_property(&m, p, &budget)?;
            let mut r = Report::new("check");
            r.set("property", json!(p.to_string())).set("kind", json!(m.kind().name())).set("verdict", json!(value));
            for n in m.notes() {
                r.line(format!("note: {n}"));
            }
            r.line(format!("property: {p}")).line(format!("verdict: {}", verdict(value)));
            Ok(r)
        }
        Command::Construct { model, target, out } => {
            let m = load_model(model)?;
            let (h, props): (Model, &[PropertyName]) = match target {
                Target::SingleValued => (construct_single_valued(&m)?, &[PropertyName::SingValH]),
                Target::StrongDet => (construct_strong_det(&m)?, &[PropertyName::StrongDetH, PropertyName::LocH]),
                Target::WeakDet => {
                    (construct_weakdet_lambdaindep(&m)?, &[PropertyName::WeakDetH, PropertyName::LambdaIndepH])
                }
                Target::Localize => (localize(&m, &budget)?, &[PropertyName::StrongDetH, PropertyName::LambdaIndepH]),
            };
            let e = m.induced_empirical();
            let equivalent = empirically_equivalent(&e, &h, Equivalence::Joint)?;
            fs::write(out, h.to_doc().to_pretty() + "\n")
                .map_err(|err| Error::Format(format!("{}: {err}", out.display())))?;
            let mut r = Report::new("construct");
            r.line(format!(
                "wrote {} ({} rows, {} hidden values)",
                out.display(),
                h.team().len(),
                h.hidden_values().len()
            ));
            let mut checks = serde_json::Map::new();
            for p in props {
                let v = check_property(&h, *p, &budget)?;
                checks.insert(p.to_string(), json!(v));
                r.line(format!("{p}: {}", verdict(v)));
            }
            r.line(format!("empirically equivalent: {}", verdict(equivalent)));
            r.set("rows", json!(h.team().len()))
                .set("hidden_values", json!(h.hidden_values().len()))
                .set("properties", Json::Object(checks))
                .set("equivalent", json!(equivalent));
            Ok(r)
        }
        Command::Entail(a) => {
            let (lhs, rhs) = (parse_formula(&a.lhs)?, parse_formula(&a.rhs)?);
            let vs: Vec<Var> =
                a.vars.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).map(Var::new).collect();
            let rep = entail(&lhs, &rhs, &vs, a.universe, a.max_rows, &budget)?;
            let mut r = Report::new("entail");
            r.line(format!("lhs: {}", rep.lhs))
                .line(format!("rhs: {}", rep.rhs))
                .line(format!("fragment: {}", rep.fragment));
            r.line(format!("teams checked: {}", rep.teams_checked));
            if let Some(t) = &rep.counterexample {
                r.line("counterexample:");
                for l in t.to_string().lines() {
                    r.line(format!("  {l}"));
                }
            }
            if rep.applies_to_prob {
                r.line("relational and probabilistic entailment coincide for FO(dep)");
            }
            r.line(format!("verdict: {}", rep.verdict));
            r.set("report", serde_json::to_value(&rep).expect("serialisable"));
            Ok(r)
        }
        Command::Nogo { which } => nogo(which, &budget),
        Command::Verify { suite, samples } => {
            let opts = VerifyOptions { seed: cli.seed, samples: *samples, budget };
            let rep = run_suite(*suite, &opts)?;
            let mut r = Report::new("verify");
            for c in &rep.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    r.line(format!("{mark} {}", c.name));
                } else {
                    r.line(format!("{mark} {} ({})", c.name, c.detail));
                }
            }
            r.line(format!("suite {}: {}", rep.suite, if rep.passed() { "passed" } else { "failed" }));
            r.set("suite", json!(rep.suite.name())).set("passed", json!(rep.passed()));
            r.set("checks", serde_json::to_value(&rep.checks).expect("serialisable"));
            Ok(r)
        }
    }
}

fn nogo(which: &Nogo, budget: &EvalBudget) -> teamcheck::Result<Report> {
    match which {
        Nogo::Hardy => {
            let e = Model::empirical(TeamData::Relational(hardy_team()))?;
            let conditions = hardy_conditions(e.team()).is_some();
            let sd = exists_strongdet_lambdaindep(&e, budget)?;
            let loc = exists_local_lambdaindep(&e, budget)?;
            let mut r = Report::new("nogo hardy");
            r.line("team:");
            for l in e.team().to_string().lines() {
                r.line(format!("  {l}"));
            }
            r.line(format!("Hardy conditions hold: {}", verdict(conditions)));
            let say = |found: bool, what: &str| {
                if found {
                    format!("a {what} model exists")
                } else {
                    format!("no {what} model exists")
                }
            };
            r.line(say(sd.is_some(), "StrongDet∧λ-Indep"));
            r.line(say(loc.is_some(), "Loc∧λ-Indep"));
            if sd.is_none() && loc.is_none() {
                r.line("the same holds for every probabilistic model with this support");
            }
            r.set("conditions", json!(conditions))
                .set("strong_det_lambda_indep", json!(sd.is_some()))
                .set("local_lambda_indep", json!(loc.is_some()))
                .set("model", doc(&e));
            Ok(r)
        }
        Nogo::Ks { config } => {
            let cfg = match config {
                Some(p) => load_ks(&read(p)?)?,
                None => cabello_config(),
            };
            let rep = verify_ks_theorems(&cfg, budget)?;
            let mut r = Report::new("nogo ks");
            r.line(format!("{} vectors, {} bases: valid", rep.vectors, rep.bases));
            match rep.parity_obstruction {
                Some(_) => r.line("parity: every vector in two of an odd number of bases, so no colouring exists"),
                None => r.line("parity: argument does not apply"),
            };
            match &rep.colouring {
                Some(s) => r.line(format!("colouring: vectors {:?}", s)),
                None => r.line("colouring: none exists"),
            };
            r.line(format!("ncc(m1 m2 m3 m4): {}", verdict(rep.ncc)));
            r.line(format!(
                "non-contextual extension: {}",
                if rep.noncontextual_extension { "exists" } else { "none" }
            ));
            r.line(format!("checks agree: {}", verdict(rep.consistent())));
            r.set("report", serde_json::to_value(&rep).expect("serialisable"));
            Ok(r)
        }
        Nogo::Exists { model, target } => {
            let m = load_model(model)?;
            if m.kind() != ModelKind::Empirical {
                return Err(Error::Model("expected an empirical model".into()));
            }
            let mut r = Report::new("nogo exists");
            let probabilistic = m.is_probabilistic();
            let e = if probabilistic {
                r.line("note: deciding on the support of the distribution");
                m.collapse()
            } else {
                m
            };
            let (found, what) = match target {
                ExistsTarget::StrongDetLambda => (exists_strongdet_lambdaindep(&e, budget)?, "StrongDet∧λ-Indep"),
                ExistsTarget::LocalLambda => (exists_local_lambdaindep(&e, budget)?, "Loc∧λ-Indep"),
            };
            match (&found, probabilistic) {
                (Some(h), false) => {
                    r.line(format!("a {what} model exists ({} hidden values)", h.hidden_values().len()));
                }
                (Some(_), true) => {
                    r.line(format!("the support has a relational {what} model; the probabilistic question is open"));
                }
                (None, false) => {
                    r.line(format!("no {what} model exists"));
                }
                (None, true) => {
                    r.line(format!("no {what} model exists for the support, hence none for the distribution"));
                }
            }
            r.set("target", json!(what)).set("probabilistic_input", json!(probabilistic));
            r.set("exists", json!(found.is_some()));
            if let Some(h) = &found {
                r.set("model", doc(h));
            }
            Ok(r)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&r.json).expect("reports serialise"));
            } else {
                for l in &r.text {
                    println!("{l}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json {
                let body = json!({ "schema": SCHEMA, "error": { "code": e.code(), "message": e.to_string() } });
                println!("{}", serde_json::to_string_pretty(&body).expect("reports serialise"));
            } else {
                eprintln!("error[{}]: {e}", e.code());
            }
            ExitCode::from(if e.is_budget() { 3 } else { 2 })
        }
    }
}
