//! JSON and text renderings of library results.

use conekit::bundle::{Apartment, InfMatrix, WeightedFlag};
use conekit::complex::{AbelianGroup, CofinalFailure, PoGroup, SubdivisionFailure, SubdivisionReport};
use conekit::cone::Cone;
use conekit::lattice::{IVec, Int};
use conekit::morphism::{Certificate, InfResult};
use serde_json::{json, Value};

pub fn vec_json(v: &[Int]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn vecs_json(v: &[IVec]) -> Value {
    Value::Array(v.iter().map(|x| vec_json(x)).collect())
}

pub fn vec_text(v: &[Int]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

pub fn vecs_text(v: &[IVec]) -> String {
    let parts: Vec<String> = v.iter().map(|x| vec_text(x)).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn cone_json(c: &Cone) -> Value {
    json!({ "rays": vecs_json(c.rays()), "lineality": vecs_json(c.lineality()) })
}

pub fn pogroup_json(g: &PoGroup) -> Value {
    json!({
        "rank": g.rank(),
        "positives": cone_json(g.positives()),
        "realization": cone_json(&g.realization()),
    })
}

pub fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::None => json!({ "type": "none" }),
        Certificate::KernelElement(p) => json!({ "type": "kernel_element", "element": vec_json(p) }),
        Certificate::Kernel(b) => json!({ "type": "kernel", "basis": vecs_json(b) }),
        Certificate::VerticalWitnesses(w) => json!({
            "type": "vertical_witnesses",
            "pairs": w.iter().map(|(q, p)| json!({ "q": vec_json(q), "p": vec_json(p) })).collect::<Vec<_>>(),
        }),
        Certificate::NotVertical(q) => json!({ "type": "not_vertical", "generator": vec_json(q) }),
        Certificate::ConesAgree(r) => json!({ "type": "cones_agree", "rays": vecs_json(r) }),
        Certificate::MissingRay(v) => json!({ "type": "missing_ray", "ray": vec_json(v) }),
        Certificate::AtFace { face_rays, inner } => {
            json!({ "type": "at_face", "face_rays": vecs_json(face_rays), "inner": certificate_json(inner) })
        }
        Certificate::KatoFailure { x1, x2, y1, y2 } => json!({
            "type": "kato_failure",
            "x1": vec_json(x1), "x2": vec_json(x2), "y1": vec_json(y1), "y2": vec_json(y2),
        }),
        Certificate::KatoChecked { pairs, minimal_pairs } => {
            json!({ "type": "kato_checked", "pairs": pairs, "minimal_pairs": minimal_pairs })
        }
        Certificate::FaceNotOnto { face_rays, image_rays } => {
            json!({ "type": "face_not_onto", "face_rays": vecs_json(face_rays), "image_rays": vecs_json(image_rays) })
        }
        Certificate::LatticeGap { face_rays, point } => {
            json!({ "type": "lattice_gap", "face_rays": vecs_json(face_rays), "point": vec_json(point) })
        }
        Certificate::FacesChecked(n) => json!({ "type": "faces_checked", "faces": n }),
        Certificate::QuasiFailure { n, torsion, free } => {
            json!({ "type": "quasi_failure", "n": n, "torsion": vec_json(torsion), "free": vec_json(free) })
        }
        Certificate::QuasiChecked(n) => json!({ "type": "quasi_checked", "up_to": n }),
    }
}

pub fn certificate_text(c: &Certificate) -> String {
    match c {
        Certificate::None => String::new(),
        Certificate::KernelElement(p) => format!("{} maps to a unit", vec_text(p)),
        Certificate::Kernel(b) => format!("kernel basis {}", vecs_text(b)),
        Certificate::VerticalWitnesses(w) => format!("{} dominating witnesses", w.len()),
        Certificate::NotVertical(q) => format!("{} is not dominated", vec_text(q)),
        Certificate::ConesAgree(_) => "dual cones agree".into(),
        Certificate::MissingRay(v) => format!("ray {} of the source dual cone is missed", vec_text(v)),
        Certificate::AtFace { face_rays, inner } => format!("at face {}: {}", vecs_text(face_rays), certificate_text(inner)),
        Certificate::KatoFailure { x1, x2, y1, y2 } => format!(
            "h{} + {} = h{} + {} has no decomposition",
            vec_text(x1),
            vec_text(y1),
            vec_text(x2),
            vec_text(y2)
        ),
        Certificate::KatoChecked { pairs, minimal_pairs } => format!("{pairs} pairs, {minimal_pairs} minimal pairs checked"),
        Certificate::FaceNotOnto { face_rays, image_rays } => {
            format!("face {} maps onto {} which is not a face", vecs_text(face_rays), vecs_text(image_rays))
        }
        Certificate::LatticeGap { face_rays, point } => {
            format!("lattice point {} of the image of face {} does not lift", vec_text(point), vecs_text(face_rays))
        }
        Certificate::FacesChecked(n) => format!("{n} faces checked"),
        Certificate::QuasiFailure { n, torsion, free } => {
            format!("pushout along [{n}] is not exact at torsion {} free {}", vec_text(torsion), vec_text(free))
        }
        Certificate::QuasiChecked(n) => format!("n <= {n} checked"),
    }
}

pub fn inf_json(r: &InfResult) -> Value {
    match r {
        InfResult::Max(v) => json!({ "kind": "max", "value": vec_json(v) }),
        InfResult::NoMax(m) => json!({ "kind": "no_max", "maximal": vecs_json(m) }),
        InfResult::NoLowerBound => json!({ "kind": "no_lower_bound" }),
    }
}

pub fn inf_text(r: &InfResult) -> String {
    match r {
        InfResult::Max(v) => format!("Max{}", vec_text(v)),
        InfResult::NoMax(m) => format!("NoMax{}", vecs_text(m)),
        InfResult::NoLowerBound => "NoLowerBound".into(),
    }
}

pub fn inf_matrix_json(m: &InfMatrix) -> Value {
    json!({
        "entries": m.entries.iter().map(|row| row.iter().map(inf_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "warnings": m.warnings,
    })
}

pub fn subdivision_json(r: &SubdivisionReport) -> Value {
    let failure = r.failure.as_ref().map(|f| match f {
        SubdivisionFailure::NotRefinement { piece } => json!({ "type": "not_refinement", "piece": piece }),
        SubdivisionFailure::DimensionMismatch { piece } => json!({ "type": "dimension_mismatch", "piece": piece }),
        SubdivisionFailure::NotAFace { first, second } => json!({ "type": "not_a_face", "pieces": [first, second] }),
        SubdivisionFailure::Uncovered { piece, facet_rays } => {
            json!({ "type": "uncovered", "piece": piece, "facet_rays": vecs_json(facet_rays) })
        }
        SubdivisionFailure::SampleMiss { point } => json!({ "type": "sample_miss", "point": vecs_json(point) }),
    });
    json!({
        "ok": r.ok,
        "condition": r.condition,
        "failure": failure,
        "separators": r.separators.iter().map(|(i, j, f)| json!({ "pieces": [i, j], "functional": vec_json(f) })).collect::<Vec<_>>(),
    })
}

pub fn subdivision_text(r: &SubdivisionReport) -> String {
    if r.ok {
        return format!("subdivision: yes ({} separating functionals)", r.separators.len());
    }
    let why = match r.failure.as_ref().expect("failure recorded") {
        SubdivisionFailure::NotRefinement { piece } => format!("piece {piece} does not refine sigma"),
        SubdivisionFailure::DimensionMismatch { piece } => format!("piece {piece} has the wrong dimension"),
        SubdivisionFailure::NotAFace { first, second } => format!("pieces {first} and {second} do not meet in a common face"),
        SubdivisionFailure::Uncovered { piece, facet_rays } => {
            format!("facet {} of piece {piece} is interior but unshared", vecs_text(facet_rays))
        }
        SubdivisionFailure::SampleMiss { point } => format!("point {} lies on no piece", vecs_text(point)),
    };
    format!("subdivision: no (condition {}): {why}", r.condition.unwrap_or(0))
}

pub fn cofinal_json(f: &Option<CofinalFailure>) -> Value {
    match f {
        None => json!(null),
        Some(CofinalFailure::Empty { at }) => json!({ "type": "empty", "at": at }),
        Some(CofinalFailure::Disconnected { at, components }) => {
            json!({ "type": "disconnected", "at": at, "components": components })
        }
    }
}

pub fn group_text(g: &AbelianGroup) -> String {
    if g.is_trivial() {
        return "0".into();
    }
    let mut parts = Vec::new();
    if g.free_rank > 0 {
        parts.push(if g.free_rank == 1 { "Z".to_string() } else { format!("Z^{}", g.free_rank) });
    }
    parts.extend(g.torsion.iter().map(|t| format!("Z/{t}")));
    parts.join(" + ")
}

pub fn flag_json(f: &WeightedFlag) -> Value {
    json!({
        "weights": f.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "dims": f.dims(),
        "spaces": f.spaces().iter().map(|s| s.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn apartment_json(a: &Apartment) -> Value {
    let col = |j: usize| json!([a.basis[0][j].to_string(), a.basis[1][j].to_string()]);
    json!({
        "basis": [col(0), col(1)],
        "exponents": a.exponents.iter().map(|(x, y)| json!([x, y])).collect::<Vec<_>>(),
    })
}
