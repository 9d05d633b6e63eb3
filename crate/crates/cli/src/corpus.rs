//! The shipped fixture corpus and its runner.

use crate::commands::{self, Command, Outcome, RunOptions};
use crate::doc::{self, Document, Payload};
use conekit::checks::{self, CheckOptions};
use serde_json::{json, Map, Value};

pub static FIXTURES: &[(&str, &str)] = &[
    ("diagonal.json", include_str!("../corpus/diagonal.json")),
    ("edge_multichar.json", include_str!("../corpus/edge_multichar.json")),
    ("even_monoid.json", include_str!("../corpus/even_monoid.json")),
    ("even_slope.json", include_str!("../corpus/even_slope.json")),
    ("ex1.json", include_str!("../corpus/ex1.json")),
    ("ex1_multichar.json", include_str!("../corpus/ex1_multichar.json")),
    ("exa_exact_not_integral.json", include_str!("../corpus/exa_exact_not_integral.json")),
    ("identity.json", include_str!("../corpus/identity.json")),
    ("interval_complex.json", include_str!("../corpus/interval_complex.json")),
    ("klyachko_ray.json", include_str!("../corpus/klyachko_ray.json")),
    ("loop.json", include_str!("../corpus/loop.json")),
    ("mult_by_2.json", include_str!("../corpus/mult_by_2.json")),
    ("mult_by_3.json", include_str!("../corpus/mult_by_3.json")),
    ("non_saturated_monoid.json", include_str!("../corpus/non_saturated_monoid.json")),
    ("overlap.json", include_str!("../corpus/overlap.json")),
    ("perturbed_quadrant_flags.json", include_str!("../corpus/perturbed_quadrant_flags.json")),
    ("quadrant_aut.json", include_str!("../corpus/quadrant_aut.json")),
    ("quadrant_multichar.json", include_str!("../corpus/quadrant_multichar.json")),
    ("ray_borel.json", include_str!("../corpus/ray_borel.json")),
    ("single_ray_flags.json", include_str!("../corpus/single_ray_flags.json")),
    ("split_quadrant_flags.json", include_str!("../corpus/split_quadrant_flags.json")),
    ("square_diagonals.json", include_str!("../corpus/square_diagonals.json")),
    ("subdivided_interval.json", include_str!("../corpus/subdivided_interval.json")),
    ("subdivided_interval_complex.json", include_str!("../corpus/subdivided_interval_complex.json")),
    ("sum.json", include_str!("../corpus/sum.json")),
    ("tripod_lattices.json", include_str!("../corpus/tripod_lattices.json")),
    ("tripod_lattices_p3.json", include_str!("../corpus/tripod_lattices_p3.json")),
    ("tripod_sub_lattices.json", include_str!("../corpus/tripod_sub_lattices.json")),
];

/// The result of running one fixture against its expectations.
#[derive(Clone, Debug)]
pub struct FixtureRun {
    pub file: String,
    pub kind: String,
    pub summary: Map<String, Value>,
    pub expected: Map<String, Value>,
    pub mismatches: Vec<String>,
}

impl FixtureRun {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "file": self.file,
            "kind": self.kind,
            "summary": self.summary,
            "expected": self.expected,
            "passed": self.passed(),
            "mismatches": self.mismatches,
        })
    }
}

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(f, _)| *f == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Document {
    doc::parse(fixture(name).unwrap_or_else(|| panic!("no fixture {name}"))).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Values that are not part of any default command's summary, computed on
/// demand: `quasisaturated_upto_N` and `inf:NAME` for morphisms.
fn extra(d: &Document, key: &str, o: &RunOptions) -> Option<Value> {
    let Payload::Morphism(m) = &d.payload else { return None };
    let h = m.build().ok()?;
    if let Some(n) = key.strip_prefix("quasisaturated_upto_") {
        let n: u64 = n.parse().ok()?;
        let c = checks::lookup("quasisaturated")?;
        let opts = CheckOptions { paranoid: o.paranoid, quasisat_n: n };
        return Some(match c.run(&h, &opts) {
            Ok(v) => json!(v.holds),
            Err(_) => json!("error"),
        });
    }
    if let Some(q) = key.strip_prefix("inf:") {
        return Some(match commands::inf_of(&h, m, q) {
            Ok((_, r)) => json!(crate::report::inf_text(&r)),
            Err(_) => json!("error"),
        });
    }
    None
}

pub fn run_document(file: &str, d: &Document, o: &RunOptions) -> FixtureRun {
    let mut summary = Map::new();
    for &c in Command::defaults_for(d.payload.kind()) {
        let out: Outcome = commands::run(c, d, o);
        if out.exit == 2 {
            summary.insert(format!("{}_error", c.name()), out.result["error"].clone());
        }
        for (k, v) in out.summary {
            summary.insert(k, v);
        }
    }
    let expected: Map<String, Value> = d.expected.clone().into_iter().collect();
    let mut mismatches = Vec::new();
    for (k, want) in &expected {
        let got = summary.get(k).cloned().or_else(|| extra(d, k, o));
        match got {
            Some(g) => {
                if &g != want {
                    mismatches.push(format!("{k}: expected {want}, got {g}"));
                }
                summary.insert(k.clone(), g);
            }
            None => mismatches.push(format!("{k}: not computed")),
        }
    }
    FixtureRun { file: file.to_string(), kind: d.payload.kind().to_string(), summary, expected, mismatches }
}

pub fn run_fixture(file: &str, text: &str, o: &RunOptions) -> FixtureRun {
    match doc::parse(text) {
        Ok(d) => run_document(file, &d, o),
        Err(e) => FixtureRun {
            file: file.to_string(),
            kind: "unknown".into(),
            summary: Map::new(),
            expected: Map::new(),
            mismatches: vec![format!("parse error: {e}")],
        },
    }
}
