//! Command dispatch: each command maps a document to a JSON result, text
//! lines and an exit code.

use crate::doc::{self, Document, Payload};
use crate::report::*;
use anyhow::{anyhow, bail, Context};
use conekit::bundle;
use conekit::checks::{self, CheckOptions};
use conekit::complex::{self, Complex, Point};
use conekit::cone::Cone;
use conekit::lattice::{primitive, IVec, Int};
use conekit::morphism::{self, InfResult, MonoidMap};
use serde_json::{json, Map, Value};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
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
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Inf => "inf",
            Command::Hilbert => "hilbert",
            Command::Star => "star",
            Command::Subdivision => "subdivision",
            Command::Cofinal => "cofinal",
            Command::BundleAut => "bundle-aut",
            Command::BundleHull => "bundle-hull",
            Command::BundleKlyachko => "bundle-klyachko",
            Command::BundlePayne => "bundle-payne",
            Command::BundleApartment => "bundle-apartment",
            Command::Present => "present",
            Command::Pl => "pl",
        }
    }

    /// The commands the corpus runner applies to a document of each kind.
    pub fn defaults_for(kind: &str) -> &'static [Command] {
        match kind {
            "monoid" => &[Command::Hilbert],
            "morphism" => &[Command::Check],
            "complex" => &[Command::Pl, Command::Cofinal],
            "subdivision" => &[Command::Subdivision, Command::Cofinal],
            "multichar" => &[Command::BundleAut, Command::BundleHull],
            "flags" => &[Command::BundlePayne],
            "lattice_chain" => &[Command::BundleApartment],
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub paranoid: bool,
    pub quasisat_n: Option<u64>,
    pub only: Vec<String>,
    pub q: Option<String>,
    pub x: Vec<String>,
    pub ray: Option<String>,
    pub sliced: bool,
}

/// The result of one command: `result` is the machine output, `summary`
/// a flat map of headline values, `lines` the human output.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit: i32,
    pub result: Value,
    pub summary: Map<String, Value>,
    pub lines: Vec<String>,
}

impl Outcome {
    fn new(exit: i32, result: Value, lines: Vec<String>) -> Self {
        let summary = result.get("summary").and_then(|s| s.as_object()).cloned().unwrap_or_default();
        Outcome { exit, result, summary, lines }
    }

    pub fn error(e: &anyhow::Error) -> Self {
        let msg = format!("{e:#}");
        Outcome { exit: 2, result: json!({ "error": msg }), summary: Map::new(), lines: vec![format!("error: {msg}")] }
    }
}

pub fn parse_vec(s: &str) -> anyhow::Result<IVec> {
    let t = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(',').map(|x| Int::from_str(x.trim().trim_matches('"')).map_err(|_| anyhow!("not an integer vector: {s:?}"))).collect()
}

fn morphism_of(d: &Document) -> anyhow::Result<(MonoidMap, &doc::MorphismDoc)> {
    match &d.payload {
        Payload::Morphism(m) => Ok((m.build()?, m)),
        p => bail!("expected a morphism document, got {}", p.kind()),
    }
}

pub fn run(cmd: Command, d: &Document, o: &RunOptions) -> Outcome {
    let r = match cmd {
        Command::Check => check(d, o),
        Command::Inf => inf(d, o),
        Command::Hilbert => hilbert(d),
        Command::Star => star(d, o),
        Command::Subdivision => subdivision(d),
        Command::Cofinal => cofinal(d),
        Command::BundleAut => bundle_aut(d),
        Command::BundleHull => bundle_hull(d),
        Command::BundleKlyachko => bundle_klyachko(d, o),
        Command::BundlePayne => bundle_payne(d),
        Command::BundleApartment => bundle_apartment(d),
        Command::Present => present(d, o),
        Command::Pl => pl(d),
    };
    r.unwrap_or_else(|e| Outcome::error(&e))
}

fn check(d: &Document, o: &RunOptions) -> anyhow::Result<Outcome> {
    let (h, _) = morphism_of(d)?;
    let names: Vec<String> =
        if o.only.is_empty() { checks::names().into_iter().map(String::from).collect() } else { o.only.clone() };
    let opts = CheckOptions { paranoid: o.paranoid, quasisat_n: o.quasisat_n.unwrap_or(CheckOptions::default().quasisat_n) };
    let mut verdicts = Map::new();
    let mut summary = Map::new();
    let mut lines = Vec::new();
    let (mut any_false, mut any_error) = (false, false);
    for name in &names {
        let c = checks::lookup(name).ok_or_else(|| anyhow!("unknown check {name:?}; known: {}", checks::names().join(", ")))?;
        let key = if name == "quasisaturated" { format!("quasisaturated_upto_{}", opts.quasisat_n) } else { name.clone() };
        match c.run(&h, &opts) {
            Ok(v) => {
                let mut entry = json!({
                    "holds": v.holds,
                    "procedure": v.procedure,
                    "certificate": certificate_json(&v.certificate),
                });
                let mut line = format!("{key}: {}", v.holds);
                if !v.holds {
                    any_false = true;
                    let re = morphism::recheck(&h, &v.certificate)?;
                    entry["reverified"] = json!(re);
                    if re == Some(false) {
                        bail!("certificate for {name} failed re-verification");
                    }
                    line.push_str(&format!("  [{}]", certificate_text(&v.certificate)));
                }
                summary.insert(key.clone(), json!(v.holds));
                verdicts.insert(key, entry);
                lines.push(line);
            }
            Err(e) => {
                any_error = true;
                summary.insert(key.clone(), json!("error"));
                verdicts.insert(key.clone(), json!({ "error": e.to_string() }));
                lines.push(format!("{key}: error ({e})"));
            }
        }
    }
    let exit = if any_false { 1 } else if any_error { 2 } else { 0 };
    Ok(Outcome::new(exit, json!({ "verdicts": verdicts, "summary": summary }), lines))
}

/// Resolves `--q`: a named element of the document or a literal vector.
fn element(m: &doc::MorphismDoc, q: &str) -> anyhow::Result<IVec> {
    match m.elements.get(q) {
        Some(v) => Ok(doc::ivec(v)),
        None => parse_vec(q).with_context(|| format!("{q:?} is neither a named element nor a vector")),
    }
}

pub fn inf_of(h: &MonoidMap, m: &doc::MorphismDoc, q: &str) -> anyhow::Result<(IVec, InfResult)> {
    let v = element(m, q)?;
    if v.len() != h.target().ambient_rank() {
        return Err(conekit::Error::RankMismatch(format!("q has length {} not {}", v.len(), h.target().ambient_rank())).into());
    }
    let r = morphism::infimum(h, &v)?;
    Ok((v, r))
}

fn inf(d: &Document, o: &RunOptions) -> anyhow::Result<Outcome> {
    let (h, m) = morphism_of(d)?;
    let q = o.q.as_deref().ok_or_else(|| anyhow!("inf needs --q"))?;
    let (v, r) = inf_of(&h, m, q)?;
    let exit = if matches!(r, InfResult::NoMax(_)) { 1 } else { 0 };
    let lines = vec![format!("inf({q}) = {}", inf_text(&r))];
    Ok(Outcome::new(exit, json!({ "q": vec_json(&v), "infimum": inf_json(&r), "summary": { "infimum": inf_text(&r) } }), lines))
}

fn hilbert(d: &Document) -> anyhow::Result<Outcome> {
    let mut out = Map::new();
    let mut summary = Map::new();
    let mut lines = Vec::new();
    let monoids = match &d.payload {
        Payload::Monoid(m) => vec![("monoid", m.build()?)],
        Payload::Morphism(m) => {
            let h = m.build()?;
            vec![("source", h.source().clone()), ("target", h.target().clone())]
        }
        p => bail!("hilbert needs a monoid or morphism, got {}", p.kind()),
    };
    for (label, m) in monoids {
        let hb = m.hilbert_basis()?;
        lines.push(format!("{label}: {} Hilbert basis elements {}", hb.len(), vecs_text(&hb)));
        summary.insert(format!("{label}_hilbert_basis_size"), json!(hb.len()));
        out.insert(label.into(), json!({ "hilbert_basis": vecs_json(&hb), "saturated": m.is_saturated(), "sharp": m.is_sharp() }));
    }
    out.insert("summary".into(), Value::Object(summary));
    Ok(Outcome::new(0, Value::Object(out), lines))
}

fn subdivision_of(d: &Document) -> anyhow::Result<(complex::PoGroup, Vec<complex::PoGroup>, &doc::SubdivisionDoc)> {
    match &d.payload {
        Payload::Subdivision(s) => {
            let (a, b) = s.build()?;
            Ok((a, b, s))
        }
        p => bail!("expected a subdivision document, got {}", p.kind()),
    }
}

fn subdivision(d: &Document) -> anyhow::Result<Outcome> {
    let (sigma, pieces, _) = subdivision_of(d)?;
    let rep = complex::check_subdivision(&sigma, &pieces);
    let cx = Complex::from_pieces(&pieces)?;
    let prof = complex::integrality_profile(&cx)?;
    let non_integral: Vec<usize> = (0..prof.len()).filter(|&i| !prof[i].integral).collect();
    let sigma_integral = morphism::is_integral(&sigma.base_morphism()?, false)?.holds;
    let mut lines = vec![subdivision_text(&rep)];
    lines.push(format!("sigma integral: {sigma_integral}; non-integral cells of the subdivision: {}", non_integral.len()));
    let mut res = subdivision_json(&rep);
    res["sigma_integral"] = json!(sigma_integral);
    res["non_integral_cells"] = json!(non_integral);
    res["summary"] = json!({ "subdivision": rep.ok, "sigma_integral": sigma_integral, "non_integral_cells": non_integral.len() });
    Ok(Outcome::new(if rep.ok { 0 } else { 1 }, res, lines))
}

fn star(d: &Document, o: &RunOptions) -> anyhow::Result<Outcome> {
    let (sigma, pieces, s) = subdivision_of(d)?;
    let mut points: Vec<IVec> = o.x.iter().map(|x| parse_vec(x)).collect::<anyhow::Result<_>>()?;
    if points.is_empty() {
        points = s.points.iter().map(|p| doc::ivec(p)).collect();
    }
    if points.is_empty() {
        bail!("star needs --x or points in the document");
    }
    let c = sigma.realization();
    let mut results = Vec::new();
    let mut lines = Vec::new();
    let mut all_ok = true;
    for x in &points {
        if x.len() != sigma.rank() || !c.contains(x) {
            bail!("point {} is not in the realization of sigma", vec_text(x));
        }
        let p = Point::rank1(x);
        let st = complex::star(&sigma, &p)?;
        let mut stars = Vec::new();
        let mut used = Vec::new();
        for (i, piece) in pieces.iter().enumerate() {
            if piece.realization().contains(x) {
                stars.push(complex::star(piece, &p)?);
                used.push(i);
            }
        }
        let rep = complex::check_subdivision(&st, &stars);
        all_ok &= rep.ok;
        lines.push(format!("x = {}: pieces {:?}; {}", vec_text(x), used, subdivision_text(&rep)));
        results.push(json!({ "x": vec_json(x), "star": pogroup_json(&st), "pieces": used, "report": subdivision_json(&rep) }));
    }
    Ok(Outcome::new(
        if all_ok { 0 } else { 1 },
        json!({ "stars": results, "summary": { "stars_subdivide": all_ok } }),
        lines,
    ))
}

fn complex_of(d: &Document) -> anyhow::Result<Complex> {
    match &d.payload {
        Payload::Complex(c) => c.build(),
        Payload::Subdivision(s) => {
            let (_, pieces) = s.build()?;
            Ok(Complex::from_pieces(&pieces)?)
        }
        p => bail!("expected a complex or subdivision document, got {}", p.kind()),
    }
}

fn cofinal(d: &Document) -> anyhow::Result<Outcome> {
    let cx = complex_of(d)?;
    let (j, i) = complex::intersection_complexes(&cx)?;
    let f = complex::is_cofinal(&i, &j);
    let lines = vec![format!(
        "J has {} cells, I has {}; I cofinal in J: {}",
        j.len(),
        i.len(),
        if f.is_none() { "yes".into() } else { format!("no {}", cofinal_json(&f)) }
    )];
    Ok(Outcome::new(
        if f.is_none() { 0 } else { 1 },
        json!({
            "cells": j.len(),
            "integral_exact_cells": i,
            "cofinal": f.is_none(),
            "failure": cofinal_json(&f),
            "summary": { "cofinal": f.is_none() },
        }),
        lines,
    ))
}

fn pl(d: &Document) -> anyhow::Result<Outcome> {
    let cx = complex_of(d)?;
    let g = complex::pl_classes(&cx)?;
    let t = group_text(&g);
    Ok(Outcome::new(
        0,
        json!({
            "free_rank": g.free_rank,
            "torsion": g.torsion.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "summary": { "pl_classes": t },
        }),
        vec![format!("PL classes modulo linear: {t}")],
    ))
}

fn multichar_of(d: &Document) -> anyhow::Result<&doc::MulticharDoc> {
    match &d.payload {
        Payload::Multichar(m) => Ok(m),
        p => bail!("expected a multichar document, got {}", p.kind()),
    }
}

fn bundle_aut(d: &Document) -> anyhow::Result<Outcome> {
    let m = multichar_of(d)?;
    let (l, c) = (m.build()?, m.cone()?);
    let real = c.realization();
    let a = bundle::aut_dimension(&real, &l);
    let p = bundle::parabolic_intersection_dimension(&real, &l);
    let lines = vec![format!("aut dimension {a}; parabolic intersection dimension {p}")];
    Ok(Outcome::new(
        if a == p { 0 } else { 1 },
        json!({ "aut_dimension": a, "parabolic_dimension": p, "summary": { "aut_dimension": a, "agree": a == p } }),
        lines,
    ))
}

fn bundle_hull(d: &Document) -> anyhow::Result<Outcome> {
    let m = multichar_of(d)?;
    let (l, c) = (m.build()?, m.cone()?);
    let mat = bundle::inf_matrix(&c, &l)?;
    let mut lines: Vec<String> = mat
        .entries
        .iter()
        .enumerate()
        .map(|(i, row)| format!("row {i}: {}", row.iter().map(inf_text).collect::<Vec<_>>().join("  ")))
        .collect();
    lines.extend(mat.warnings.iter().map(|w| format!("warning: {w}")));
    let mut res = json!({ "inf_matrix": inf_matrix_json(&mat) });
    let exit = match bundle::weyl_hull(&c, &l) {
        Ok(h) => {
            let contains = c.refines(&h);
            let same = h == c;
            lines.push(format!(
                "Weyl hull realization rays {} lineality {}; contains sigma: {contains}; equals sigma: {same}",
                vecs_text(h.realization().rays()),
                vecs_text(h.realization().lineality())
            ));
            res["hull"] = pogroup_json(&h);
            res["summary"] = json!({ "hull_defined": true, "hull_equals_sigma": same, "warnings": mat.warnings.len() });
            0
        }
        Err(conekit::Error::InfUndefined(i, j)) => {
            lines.push(format!("Weyl hull undefined: entry ({i},{j}) has no maximum"));
            res["hull"] = Value::Null;
            res["summary"] = json!({ "hull_defined": false, "warnings": mat.warnings.len() });
            1
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome::new(exit, res, lines))
}

fn bundle_klyachko(d: &Document, o: &RunOptions) -> anyhow::Result<Outcome> {
    let m = multichar_of(d)?;
    let l = m.build()?;
    let values: Vec<Int> = if l.rank() == 1 {
        l.chars().iter().map(|c| c[0].clone()).collect()
    } else {
        let ray = parse_vec(o.ray.as_deref().ok_or_else(|| anyhow!("rank > 1 needs --ray"))?)?;
        if ray.len() != l.rank() {
            return Err(conekit::Error::RankMismatch("ray has the wrong length".into()).into());
        }
        let r = bundle::restrict_multichar(&l, &Cone::from_generators(l.rank(), &[primitive(&ray)]))?;
        r.chars().iter().map(|c| c[0].clone()).collect()
    };
    let f = bundle::klyachko_filtration(&values);
    let weights: Vec<String> = f.weights().iter().map(|w| w.to_string()).collect();
    let lines = vec![format!("weights ({}) dims {:?}", weights.join(","), f.dims())];
    let mut res = flag_json(&f);
    res["summary"] = json!({ "weights": weights, "dims": f.dims() });
    Ok(Outcome::new(0, res, lines))
}

fn bundle_payne(d: &Document) -> anyhow::Result<Outcome> {
    let Payload::Flags(fd) = &d.payload else { bail!("expected a flags document, got {}", d.payload.kind()) };
    let (fan, flags, psi) = fd.build()?;
    let r = bundle::payne_compatibility(&fan, &flags, &psi)?;
    Ok(match r {
        None => Outcome::new(0, json!({ "compatible": true, "summary": { "compatible": true } }), vec!["compatible: true".into()]),
        Some(f) => Outcome::new(
            1,
            json!({
                "compatible": false,
                "failure": {
                    "cone": f.cone,
                    "delta": f.delta.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "expected": f.expected,
                    "actual": f.actual,
                },
                "summary": { "compatible": false },
            }),
            vec![format!(
                "compatible: false at cone {} delta {}: intersection has dimension {}, count is {}",
                f.cone,
                vec_text(&f.delta),
                f.actual,
                f.expected
            )],
        ),
    })
}

fn bundle_apartment(d: &Document) -> anyhow::Result<Outcome> {
    let Payload::LatticeChain(ld) = &d.payload else { bail!("expected a lattice_chain document, got {}", d.payload.kind()) };
    let chain = ld.build()?;
    let a = bundle::common_apartment(&chain)?;
    let n = chain.lattices.len();
    let dist: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| chain.distance(i, j)).collect()).collect();
    Ok(match a {
        Some(a) => {
            let lines = vec![format!(
                "apartment: e = ({}, {}), f = ({}, {}); exponents {:?}",
                a.basis[0][0], a.basis[1][0], a.basis[0][1], a.basis[1][1], a.exponents
            )];
            let mut res = apartment_json(&a);
            res["distances"] = json!(dist);
            res["summary"] = json!({ "apartment": true });
            Outcome::new(0, res, lines)
        }
        None => Outcome::new(
            1,
            json!({ "apartment": null, "distances": dist, "summary": { "apartment": false } }),
            vec![format!("apartment: none (the lattices do not lie on one path; distances {dist:?})")],
        ),
    })
}

fn present(d: &Document, o: &RunOptions) -> anyhow::Result<Outcome> {
    let (h, _) = morphism_of(d)?;
    let p = complex::present_local_algebra(&h, o.sliced)?;
    let gens: Vec<Value> = p
        .generators
        .iter()
        .map(|g| json!({ "symbol": g.symbol, "degree": vec_json(&g.degree), "degree_torsion": vec_json(&g.degree_torsion), "invertible": g.invertible }))
        .collect();
    let rels = p.relation_strings();
    let syms: Vec<String> =
        p.generators.iter().map(|g| if g.invertible { format!("{}^±", g.symbol) } else { g.symbol.clone() }).collect();
    let lines = vec![format!("R[{}] / ({})", syms.join(", "), if rels.is_empty() { "0".to_string() } else { rels.join(", ") })];
    Ok(Outcome::new(
        0,
        json!({ "sliced": p.sliced, "generators": gens, "relations": rels, "summary": { "relations": rels } }),
        lines,
    ))
}
