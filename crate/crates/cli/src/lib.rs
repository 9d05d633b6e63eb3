//! Command-line front end for conekit: JSON documents, property checks,
//! reports and the fixture corpus.

pub mod commands;
pub mod corpus;
pub mod doc;
pub mod report;

use clap::{Parser, ValueEnum};
use commands::{Command, Outcome, RunOptions};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    Check,
    Inf,
    Hilbert,
    Star,
    Subdivision,
    Cofinal,
    BundleAut,
    BundleHull,
    BundleKlyachko,
    BundlePayne,
    BundleApartment,
    Present,
    Pl,
    /// Run every shipped fixture against its expected results.
    Corpus,
}

impl Verb {
    fn command(self) -> Option<Command> {
        Some(match self {
            Verb::Check => Command::Check,
            Verb::Inf => Command::Inf,
            Verb::Hilbert => Command::Hilbert,
            Verb::Star => Command::Star,
            Verb::Subdivision => Command::Subdivision,
            Verb::Cofinal => Command::Cofinal,
            Verb::BundleAut => Command::BundleAut,
            Verb::BundleHull => Command::BundleHull,
            Verb::BundleKlyachko => Command::BundleKlyachko,
            Verb::BundlePayne => Command::BundlePayne,
            Verb::BundleApartment => Command::BundleApartment,
            Verb::Present => Command::Present,
            Verb::Pl => Command::Pl,
            Verb::Corpus => return None,
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "conekit", version, about = "Exact checks on monoid homomorphisms, cones, cone complexes and toric bundles")]
pub struct Cli {
    pub verb: Verb,
    /// Input documents (for `corpus`: optional fixture names to restrict to).
    pub files: Vec<PathBuf>,
    /// Machine-readable JSON output.
    #[arg(long)]
    pub json: bool,
    /// Bound on lattice points enumerated by brute-force searches.
    #[arg(long, env = "CONEKIT_BUDGET", default_value_t = conekit::budget::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Adds the brute-force fallback to the integrality check.
    #[arg(long)]
    pub paranoid: bool,
    /// Worker threads for independent inputs; output order is the input order.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Element of the target group for `inf`: a name from the document or a vector like 2,1.
    #[arg(long)]
    pub q: Option<String>,
    /// Restrict `check` to these properties (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Point for `star` (repeatable), a vector like 1,1.
    #[arg(long)]
    pub x: Vec<String>,
    /// Ray for `bundle-klyachko` on multicharacters of rank > 1.
    #[arg(long)]
    pub ray: Option<String>,
    /// Sliced presentation for `present`.
    #[arg(long)]
    pub sliced: bool,
    /// Bound for the quasisaturation search in `check`.
    #[arg(long)]
    pub quasisat_n: Option<u64>,
}

impl Cli {
    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            paranoid: self.paranoid,
            quasisat_n: self.quasisat_n,
            only: self.only.clone(),
            q: self.q.clone(),
            x: self.x.clone(),
            ray: self.ray.clone(),
            sliced: self.sliced,
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One rendered unit of output, in input order.
struct Rendered {
    exit: i32,
    json: Value,
    text: String,
}

fn render(verb: &str, label: &str, text: Option<&[u8]>, out: &Outcome, ms: u128) -> Rendered {
    let json = json!({
        "tool": "conekit",
        "version": env!("CARGO_PKG_VERSION"),
        "command": verb,
        "input": label,
        "input_digest": text.map(digest),
        "exit_code": out.exit,
        "result": out.result,
        "timing_ms": ms,
    });
    let mut t = if verb == "corpus" { String::new() } else { format!("== {label}\n") };
    for l in &out.lines {
        t.push_str(l);
        t.push('\n');
    }
    Rendered { exit: out.exit, json, text: t }
}

fn run_one(cli: &Cli, cmd: Command, path: &PathBuf) -> Rendered {
    let start = Instant::now();
    let label = path.display().to_string();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return render(cmd.name(), &label, None, &Outcome::error(&anyhow::anyhow!("{label}: {e}")), 0),
    };
    let out = match std::str::from_utf8(&bytes).map_err(anyhow::Error::from).and_then(|t| doc::parse(t).map_err(anyhow::Error::from)) {
        Ok(d) => conekit::budget::with_budget(cli.budget, || commands::run(cmd, &d, &cli.run_options())),
        Err(e) => Outcome::error(&e.context(label.clone())),
    };
    render(cmd.name(), &label, Some(&bytes), &out, start.elapsed().as_millis())
}

fn run_corpus_entry(cli: &Cli, file: &str, text: &str) -> Rendered {
    let start = Instant::now();
    let r = conekit::budget::with_budget(cli.budget, || corpus::run_fixture(file, text, &cli.run_options()));
    let out = Outcome {
        exit: if r.passed() { 0 } else { 1 },
        result: r.to_json(),
        summary: Default::default(),
        lines: {
            let mut l = vec![format!("{} [{}]: {}", file, r.kind, if r.passed() { "ok" } else { "MISMATCH" })];
            l.extend(r.mismatches.iter().map(|m| format!("  {m}")));
            l
        },
    };
    render("corpus", file, Some(text.as_bytes()), &out, start.elapsed().as_millis())
}

/// Runs `jobs` workers over `n` tasks; results come back in task order.
fn fan_out<T: Send>(n: usize, jobs: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let jobs = jobs.clamp(1, n.max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<T>>> = (0..n).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = f(i);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every task ran")).collect()
}

/// Executes the command line and returns (stdout, exit code).
pub fn execute(cli: &Cli) -> (String, i32) {
    let rendered: Vec<Rendered> = match cli.verb.command() {
        Some(cmd) => {
            if cli.files.is_empty() {
                let e = Outcome::error(&anyhow::anyhow!("no input documents"));
                vec![render(cmd.name(), "-", None, &e, 0)]
            } else {
                fan_out(cli.files.len(), cli.jobs, |i| run_one(cli, cmd, &cli.files[i]))
            }
        }
        None => {
            let wanted: Vec<String> = cli.files.iter().map(|p| p.display().to_string()).collect();
            let sel: Vec<&(&str, &str)> =
                corpus::FIXTURES.iter().filter(|(f, _)| wanted.is_empty() || wanted.iter().any(|w| w == f)).collect();
            if sel.is_empty() {
                let e = Outcome::error(&anyhow::anyhow!("no matching fixtures"));
                vec![render("corpus", "-", None, &e, 0)]
            } else {
                fan_out(sel.len(), cli.jobs, |i| run_corpus_entry(cli, sel[i].0, sel[i].1))
            }
        }
    };
    let exit = rendered.iter().map(|r| r.exit).max().unwrap_or(0);
    let exit = if rendered.iter().any(|r| r.exit == 2) { 2 } else { exit };
    let out = if cli.json {
        let v = if rendered.len() == 1 {
            rendered.into_iter().next().unwrap().json
        } else {
            Value::Array(rendered.into_iter().map(|r| r.json).collect())
        };
        serde_json::to_string_pretty(&v).expect("json") + "\n"
    } else {
        rendered.into_iter().map(|r| r.text).collect()
    };
    (out, exit)
}
