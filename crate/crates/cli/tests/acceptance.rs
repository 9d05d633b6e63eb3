//! Acceptance criteria 1-10, one pass/fail line each. Runs without the
//! libtest harness so the table is always printed.

use conekit::bundle::{
    aut_dimension, common_apartment, inf_matrix, parabolic_intersection_dimension, payne_compatibility, split_flags,
    weyl_hull, Fan, Mat2, MultiCharacter, Scalar, WeightedFlag,
};
use conekit::complex::{self, Complex, Point, PoGroup};
use conekit::cone::Cone;
use conekit::lattice::{IVec, Int, IntegerMatrix};
use conekit::monoid::FineMonoid;
use conekit::morphism::{self, Certificate, InfResult, MonoidMap};
use conekit::Error;
use conekit_cli::corpus::{self, FIXTURES};
use conekit_cli::doc::{Document, Payload};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

const LIMIT: Duration = Duration::from_secs(10);

fn v(x: &[i64]) -> IVec {
    x.iter().map(|&a| Int::from(a)).collect()
}

fn vs(x: &[&[i64]]) -> Vec<IVec> {
    x.iter().map(|a| v(a)).collect()
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn morphism_fixture(name: &str) -> MonoidMap {
    match corpus::load(name).payload {
        Payload::Morphism(m) => m.build().unwrap(),
        _ => panic!("{name} is not a morphism"),
    }
}

fn corpus_docs() -> Vec<(&'static str, Document)> {
    FIXTURES.iter().map(|(f, _)| (*f, corpus::load(f))).collect()
}

fn e<T: std::fmt::Debug>(x: T) -> String {
    format!("{x:?}")
}

// ---- criterion 1 ----

fn counterexamples() -> Outcome {
    // (a) the sum map
    let s = morphism_fixture("sum.json");
    ensure(morphism::is_local(&s).holds, || "sum: not local".into())?;
    ensure(!morphism::is_injective_gp(&s).holds, || "sum: injective".into())?;
    ensure(!morphism::is_exact(&s).map_err(e)?.holds, || "sum: exact".into())?;

    // (b) exact but not integral, with the pair (z - x, z - y)
    let h = morphism_fixture("exa_exact_not_integral.json");
    ensure(morphism::is_exact(&h).map_err(e)?.holds, || "exa: not exact".into())?;
    let int = morphism::is_integral(&h, false).map_err(e)?;
    ensure(!int.holds, || "exa: integral".into())?;
    ensure(!morphism::is_saturated(&h).map_err(e)?.holds, || "exa: saturated".into())?;
    let (x, y) = (v(&[1, 0]), v(&[0, 1]));
    let zx = v(&[-1, 0, 1]);
    let zy = v(&[0, -1, 1]);
    ensure(
        int.certificate == Certificate::KatoFailure { x1: x.clone(), x2: y.clone(), y1: zx.clone(), y2: zy.clone() },
        || format!("exa: certificate {:?}", int.certificate),
    )?;
    ensure(morphism::verify_kato_failure(&h, &x, &y, &zx, &zy).map_err(e)?, || "exa: certificate does not verify".into())?;

    // (c) even slope: h(u) + (0,1) = h(v) + (1,0)
    let h = morphism_fixture("even_slope.json");
    ensure(morphism::is_exact(&h).map_err(e)?.holds, || "even slope: not exact".into())?;
    ensure(morphism::localizations_exact(&h).map_err(e)?.holds, || "even slope: a localization is not exact".into())?;
    let int = morphism::is_integral(&h, false).map_err(e)?;
    ensure(!int.holds, || "even slope: integral".into())?;
    let (u, w) = (v(&[2, 0]), v(&[1, 1]));
    ensure(
        int.certificate == Certificate::KatoFailure { x1: u.clone(), x2: w.clone(), y1: v(&[0, 1]), y2: v(&[1, 0]) },
        || format!("even slope: certificate {:?}", int.certificate),
    )?;
    ensure(morphism::verify_kato_failure(&h, &u, &w, &v(&[0, 1]), &v(&[1, 0])).map_err(e)?, || {
        "even slope: certificate does not verify".into()
    })?;

    // (d) [n] for n = 2, 3
    for (n, f) in [(2, "mult_by_2.json"), (3, "mult_by_3.json")] {
        let h = morphism_fixture(f);
        ensure(morphism::is_exact(&h).map_err(e)?.holds, || format!("[{n}]: not exact"))?;
        ensure(!morphism::quasisaturated_upto(&h, n).map_err(e)?.holds, || format!("[{n}]: quasisaturated up to {n}"))?;
        ensure(!morphism::is_saturated(&h).map_err(e)?.holds, || format!("[{n}]: saturated"))?;
    }

    // (e) the diagonal
    let d = morphism_fixture("diagonal.json");
    ensure(morphism::is_integral(&d, false).map_err(e)?.holds, || "diagonal: not integral".into())?;
    ensure(morphism::is_saturated(&d).map_err(e)?.holds, || "diagonal: not saturated".into())?;
    ensure(morphism::is_vertical(&d).map_err(e)?.holds, || "diagonal: not vertical".into())?;
    Ok("sum, exact-not-integral, even slope, [2], [3], diagonal".into())
}

// ---- criterion 2 ----

fn infima() -> Outcome {
    let h = morphism_fixture("ex1.json");
    let r = morphism::infimum(&h, &v(&[0, 0, 1])).map_err(e)?;
    ensure(r == InfResult::NoMax(vs(&[&[0, 1], &[1, 0]])), || format!("ex1 at z: {r:?}"))?;

    let h = morphism_fixture("even_slope.json");
    let r = morphism::infimum(&h, &v(&[2, 1])).map_err(e)?;
    ensure(r == InfResult::NoMax(vs(&[&[1, 1], &[2, 0]])), || format!("even slope at (2,1): {r:?}"))?;

    let h = morphism_fixture("diagonal.json");
    for a in 0..10 {
        for b in 0..10 {
            let r = morphism::infimum(&h, &v(&[a, b])).map_err(e)?;
            ensure(r == InfResult::Max(v(&[a.min(b)])), || format!("diagonal at ({a},{b}): {r:?}"))?;
        }
    }

    let edge = edge_cone();
    let r = edge.infimum(&v(&[1, 0])).map_err(e)?;
    ensure(r == InfResult::Max(v(&[0])), || format!("edge at gamma: {r:?}"))?;
    let r = edge.infimum(&v(&[-1, 0])).map_err(e)?;
    ensure(r == InfResult::Max(v(&[-1])), || format!("edge at -gamma: {r:?}"))?;
    Ok("ex1, even slope, 100 diagonal points, edge at +-gamma".into())
}

fn edge_cone() -> PoGroup {
    match corpus::load("edge_multichar.json").payload {
        Payload::Multichar(m) => m.cone().unwrap(),
        _ => unreachable!(),
    }
}

// ---- random maps for criteria 3 and 4 ----

fn random_vec(rng: &mut ChaCha8Rng, n: usize, b: i64) -> IVec {
    (0..n).map(|_| Int::from(rng.gen_range(-b..=b))).collect()
}

/// A saturated sharp monoid: the lattice points of a random pointed cone.
fn random_fs(rng: &mut ChaCha8Rng, n: usize, max_hb: usize) -> Option<FineMonoid> {
    let k = rng.gen_range(n..=n + 1);
    let gens: Vec<IVec> = (0..k).map(|_| random_vec(rng, n, 2)).collect();
    let c = Cone::from_generators(n, &gens);
    if !c.is_pointed() || !c.is_full_dimensional() {
        return None;
    }
    let hb = c.hilbert_basis().ok()?;
    (hb.len() <= max_hb).then(|| FineMonoid::new(n, hb).unwrap())
}

fn full_column_rank(m: &IntegerMatrix) -> bool {
    let cols: Vec<IVec> = (0..m.cols()).map(|j| m.col(j)).collect();
    conekit::lattice::Lattice::span(&cols, m.rows()).rank() == m.cols()
}

/// An injective map between saturated sharp monoids of rank at most 3 with
/// at most `max_hb` Hilbert generators on each side.
fn random_injective(rng: &mut ChaCha8Rng, max_hb: usize) -> MonoidMap {
    loop {
        let r = rng.gen_range(1..=3);
        let s = rng.gen_range(r..=3);
        let Some(p) = random_fs(rng, r, max_hb) else { continue };
        let entries: Vec<i64> = (0..r * s).map(|_| rng.gen_range(-1..=2)).collect();
        let m = IntegerMatrix::from_i64(s, r, &entries);
        if !full_column_rank(&m) {
            continue;
        }
        let mut gens: Vec<IVec> = p.generators().iter().map(|g| m.mul_vec(g)).collect();
        for _ in 0..rng.gen_range(0..=2) {
            gens.push(random_vec(rng, s, 2));
        }
        let c = Cone::from_generators(s, &gens);
        if !c.is_pointed() {
            continue;
        }
        let Ok(raw) = FineMonoid::new(s, gens) else { continue };
        let Ok(q) = raw.saturation() else { continue };
        if q.generators().len() > max_hb || !q.is_sharp() {
            continue;
        }
        if let Ok(h) = MonoidMap::new(p, q, m) {
            return h;
        }
    }
}

/// Maps `N^r -> N^s` by small nonnegative matrices; these are saturated
/// more often than the general ones.
fn random_free_map(rng: &mut ChaCha8Rng) -> MonoidMap {
    loop {
        let r = rng.gen_range(1..=2);
        let s = rng.gen_range(r..=3);
        let entries: Vec<i64> = (0..r * s).map(|_| rng.gen_range(0..=2)).collect();
        let m = IntegerMatrix::from_i64(s, r, &entries);
        if !full_column_rank(&m) {
            continue;
        }
        if let Ok(h) = MonoidMap::new(FineMonoid::free(r), FineMonoid::free(s), m) {
            return h;
        }
    }
}

// ---- criterion 3 ----

fn valuations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut exact, mut total) = (0, 0);
    while total < 40 {
        let h = random_injective(&mut rng, 5);
        let ex = morphism::is_exact(&h).map_err(e)?.holds;
        let (sp, _) = morphism::dual_cones(&h);
        let mut all = true;
        for ray in sp.generators() {
            match morphism::extend_rank1_valuation(&h, &ray).map_err(e)? {
                Some((c, w)) => {
                    // the extension is a point of σ_Q over c·ray
                    let (_, sq) = morphism::dual_cones(&h);
                    let img = h.gp_matrix().transpose().mul_vec(&w);
                    let want: IVec = ray.iter().map(|x| x * &c).collect();
                    ensure(sq.contains(&w) && img == want, || format!("bad extension {w:?} of {ray:?}"))?;
                }
                None => all = false,
            }
        }
        ensure(ex == all, || format!("disagreement on {h:?}: exact {ex}, valuations extend {all}"))?;
        exact += ex as usize;
        total += 1;
    }
    Ok(format!("{total} random maps agree ({exact} exact)"))
}

// ---- criterion 4 ----

fn saturation_theorem() -> Outcome {
    let agree = |h: &MonoidMap| -> Result<Option<bool>, String> {
        let s = match morphism::is_saturated(h) {
            Ok(s) => s.holds,
            Err(Error::HypothesisViolation(_)) | Err(Error::NotSaturated(_)) | Err(Error::NotSharp(_)) => return Ok(None),
            Err(x) => return Err(e(x)),
        };
        let i = morphism::is_integral(h, false).map_err(e)?.holds;
        let q = morphism::quasisaturated_upto(h, 6).map_err(e)?.holds;
        ensure(s == (i && q), || format!("{h:?}: saturated {s}, integral {i}, quasisaturated up to 6 {q}"))?;
        Ok(Some(s))
    };
    let mut checked = 0;
    let mut saturated = 0;
    let mut skipped = Vec::new();
    for (f, d) in corpus_docs() {
        let Payload::Morphism(m) = &d.payload else { continue };
        let h = m.build().map_err(e)?;
        match agree(&h)? {
            Some(s) => {
                checked += 1;
                saturated += s as usize;
            }
            None => skipped.push(f),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut random = 0;
    while random < 24 {
        let h = if random % 2 == 0 { random_free_map(&mut rng) } else { random_injective(&mut rng, 5) };
        if let Some(s) = agree(&h)? {
            random += 1;
            saturated += s as usize;
        }
    }
    Ok(format!(
        "{checked} corpus maps + {random} random maps agree ({saturated} saturated); outside the hypotheses: {}",
        skipped.join(", ")
    ))
}

// ---- criterion 5 ----

fn grid(rank: usize) -> Vec<IVec> {
    let b: i64 = match rank {
        0 => 0,
        1 => 10,
        2 => 5,
        _ => 2,
    };
    let mut out = vec![Vec::new()];
    for _ in 0..rank {
        out = out.into_iter().flat_map(|p: IVec| (-b..=b).map(move |x| [p.clone(), vec![Int::from(x)]].concat())).collect();
    }
    out.truncate(200);
    out
}

fn infimum_localization() -> Outcome {
    let mut maps = 0;
    let mut compared = 0;
    for (_, d) in corpus_docs() {
        let Payload::Morphism(m) = &d.payload else { continue };
        let h = m.build().map_err(e)?;
        if !h.source().is_fs_sharp() || !h.target().is_fs_sharp() || !morphism::is_exact(&h).map_err(e)?.holds {
            continue;
        }
        maps += 1;
        let qs = grid(h.target().rank());
        for face in h.source().cone_gp().faces() {
            let p = h.source().from_gp_coords(&face.cone.interior_point());
            let sq = morphism::localize_along(&h, &p).map_err(e)?;
            for c in &qs {
                let q = h.target().from_gp_coords(c);
                let InfResult::Max(x) = morphism::infimum(&h, &q).map_err(e)? else { continue };
                let q2 = sq.target_map.apply(c);
                let x2 = sq.source_map.apply(&h.source().gp_coords(&x).unwrap());
                let r = morphism::infimum(&sq.map, &q2).map_err(e)?;
                ensure(r == InfResult::Max(x2.clone()), || format!("localizing at {p:?}, q = {q:?}: {r:?}, image {x2:?}"))?;
                compared += 1;
            }
        }
    }
    Ok(format!("{maps} exact corpus maps, {compared} localized infima match"))
}

// ---- criterion 6 ----

fn decomposes(x: &IVec, basis: &[IVec], cone: &Cone, memo: &mut std::collections::HashMap<IVec, bool>) -> bool {
    if x.iter().all(|a| a == &Int::from(0)) {
        return true;
    }
    if let Some(&b) = memo.get(x) {
        return b;
    }
    let ok = basis.iter().any(|h| {
        let y: IVec = x.iter().zip(h).map(|(a, b)| a - b).collect();
        cone.contains(&y) && decomposes(&y, basis, cone, memo)
    });
    memo.insert(x.clone(), ok);
    ok
}

fn points_with_l1_at_most(n: usize, k: i64) -> Vec<IVec> {
    let mut out = vec![(Vec::new(), 0i64)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|(p, used): (IVec, i64)| {
                (-(k - used)..=(k - used)).map(move |x| ([p.clone(), vec![Int::from(x)]].concat(), used + x.abs()))
            })
            .collect();
    }
    out.into_iter().map(|(p, _)| p).collect()
}

fn hilbert_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cones = 0;
    let mut points = 0;
    while cones < 20 {
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=n + 1);
        let gens: Vec<IVec> = (0..k).map(|_| random_vec(&mut rng, n, 3)).collect();
        let c = Cone::from_generators(n, &gens);
        if !c.is_pointed() || c.is_zero() {
            continue;
        }
        let hb = c.hilbert_basis().map_err(e)?;
        ensure(hb.iter().all(|h| c.contains(h)), || format!("basis element outside {c:?}"))?;
        let mut memo = std::collections::HashMap::new();
        for x in points_with_l1_at_most(n, 10) {
            if c.contains(&x) {
                points += 1;
                ensure(decomposes(&x, &hb, &c, &mut memo), || format!("{x:?} does not decompose over {hb:?}"))?;
            }
        }
        // minimality: no basis element is a sum of two nonzero lattice points
        for h in &hb {
            let l1: i64 = h.iter().map(|a| i64::try_from(a.clone()).unwrap().abs()).sum();
            for u in points_with_l1_at_most(n, l1) {
                let w: IVec = h.iter().zip(&u).map(|(a, b)| a - b).collect();
                let nonzero = |z: &IVec| z.iter().any(|a| a != &Int::from(0));
                ensure(!(nonzero(&u) && nonzero(&w) && c.contains(&u) && c.contains(&w)), || {
                    format!("{h:?} = {u:?} + {w:?} is not minimal")
                })?;
            }
        }
        cones += 1;
    }
    Ok(format!("{cones} random cones, {points} lattice points decomposed"))
}

// ---- criterion 7 ----

fn over_n(rank: usize, realization: &[IVec]) -> PoGroup {
    let mut bm = vec![0i64; rank];
    bm[rank - 1] = 1;
    PoGroup::from_realization(rank, realization, FineMonoid::free(1), IntegerMatrix::from_i64(rank, 1, &bm)).unwrap()
}

/// Subdivisions over `N` of edges and of polygons at height one.
fn generated_subdivisions() -> Vec<(PoGroup, Vec<PoGroup>)> {
    let mut out = Vec::new();
    // an edge of length k cut at the given points (a, b) with a/b in (0, k)
    let edges: [(i64, &[(i64, i64)]); 5] =
        [(1, &[(1, 2)]), (2, &[(1, 1)]), (3, &[(1, 1), (2, 1)]), (1, &[(1, 3), (2, 3)]), (4, &[(3, 2), (3, 1)])];
    for (k, cuts) in edges {
        let mut pts = vec![(0, 1)];
        pts.extend_from_slice(cuts);
        pts.push((k, 1));
        let sigma = over_n(2, &vs(&[&[0, 1], &[k, 1]]));
        let pieces = pts.windows(2).map(|w| over_n(2, &vs(&[&[w[0].0, w[0].1], &[w[1].0, w[1].1]]))).collect();
        out.push((sigma, pieces));
    }
    // polygons with a stellar subdivision at an interior point, or a diagonal
    let polygons: [(&[[i64; 2]], Option<[i64; 3]>); 6] = [
        (&[[0, 0], [2, 0], [0, 2]], Some([1, 1, 3])),
        (&[[0, 0], [3, 0], [0, 3]], Some([1, 1, 1])),
        (&[[0, 0], [2, 0], [2, 2], [0, 2]], Some([1, 1, 1])),
        (&[[0, 0], [1, 0], [1, 1], [0, 1]], None),
        (&[[0, 0], [2, 0], [2, 1], [0, 1]], Some([1, 1, 2])),
        (&[[0, 0], [4, 0], [0, 2]], Some([1, 1, 1])),
    ];
    for (verts, centre) in polygons {
        let ray = |p: &[i64; 2]| v(&[p[0], p[1], 1]);
        let rays: Vec<IVec> = verts.iter().map(ray).collect();
        let sigma = over_n(3, &rays);
        let pieces = match centre {
            Some(c) => (0..verts.len())
                .map(|i| over_n(3, &[rays[i].clone(), rays[(i + 1) % verts.len()].clone(), v(&c)]))
                .collect(),
            None => vec![
                over_n(3, &[rays[0].clone(), rays[1].clone(), rays[2].clone()]),
                over_n(3, &[rays[0].clone(), rays[2].clone(), rays[3].clone()]),
            ],
        };
        out.push((sigma, pieces));
    }
    out
}

fn sample_points(sigma: &PoGroup, pieces: &[PoGroup]) -> Vec<IVec> {
    let mut xs: Vec<IVec> = Vec::new();
    for p in std::iter::once(sigma).chain(pieces) {
        let rays = p.realization().rays().to_vec();
        for i in 0..rays.len() {
            xs.push(rays[i].clone());
            for j in i + 1..rays.len() {
                xs.push(rays[i].iter().zip(&rays[j]).map(|(a, b)| a + b).collect());
            }
        }
        xs.push(p.realization().interior_point());
    }
    xs.sort();
    xs.dedup();
    xs
}

fn stars_and_subdivisions() -> Outcome {
    let subs = generated_subdivisions();
    let mut stars = 0;
    for (n, (sigma, pieces)) in subs.iter().enumerate() {
        let rep = complex::check_subdivision(sigma, pieces);
        ensure(rep.ok, || format!("generated subdivision {n} rejected: {:?}", rep.failure))?;
        for x in sample_points(sigma, pieces) {
            let p = Point::rank1(&x);
            let st = complex::star(sigma, &p).map_err(e)?;
            let local: Vec<PoGroup> = pieces
                .iter()
                .filter(|c| c.realization().contains(&x))
                .map(|c| complex::star(c, &p))
                .collect::<Result<_, _>>()
                .map_err(e)?;
            let rep = complex::check_subdivision(&st, &local);
            ensure(rep.ok, || format!("subdivision {n}: stars at {x:?} do not subdivide: {:?}", rep.failure))?;
            stars += 1;
        }
        let cx = Complex::from_pieces(pieces).map_err(e)?;
        let prof = complex::integrality_profile(&cx).map_err(e)?;
        ensure(cx.maximal_cells().iter().all(|&i| prof[i].integral), || format!("subdivision {n} is not integral"))?;
        let (j, i) = complex::intersection_complexes(&cx).map_err(e)?;
        let f = complex::is_cofinal(&i, &j);
        ensure(f.is_none(), || format!("subdivision {n}: I is not cofinal in J: {f:?}"))?;
    }
    let Payload::Subdivision(s) = corpus::load("square_diagonals.json").payload else { unreachable!() };
    let (_, pieces) = s.build().map_err(e)?;
    let cx = Complex::from_pieces(&pieces).map_err(e)?;
    let prof = complex::integrality_profile(&cx).map_err(e)?;
    let bad = cx.maximal_cells().into_iter().filter(|&i| !prof[i].integral).count();
    ensure(bad > 0, || "square with both diagonals: every piece is integral".into())?;
    Ok(format!("{} generated subdivisions, {stars} stars; square with both diagonals has {bad} non-integral pieces", subs.len()))
}

// ---- criterion 8 ----

fn bundles() -> Outcome {
    let mut pairs = 0;
    let mut hulls = 0;
    for (f, d) in corpus_docs() {
        let Payload::Multichar(m) = &d.payload else { continue };
        let lambda = m.build().map_err(e)?;
        let sigma = m.cone().map_err(e)?;
        let r = sigma.realization();
        let a = aut_dimension(&r, &lambda);
        let b = parabolic_intersection_dimension(&r, &lambda);
        ensure(a == b, || format!("{f}: aut dimension {a}, parabolic intersection {b}"))?;
        pairs += 1;
        match weyl_hull(&sigma, &lambda) {
            Ok(hull) => {
                ensure(hull.realization().contains_cone(&r), || format!("{f}: hull does not contain sigma"))?;
                let again = weyl_hull(&hull, &lambda).map_err(e)?;
                ensure(again.realization() == hull.realization(), || format!("{f}: hull is not idempotent"))?;
                hulls += 1;
            }
            Err(Error::InfUndefined(..)) => {}
            Err(x) => return Err(format!("{f}: {x:?}")),
        }
    }
    let hull_of = |f: &str| -> Result<(PoGroup, PoGroup), String> {
        let Payload::Multichar(m) = corpus::load(f).payload else { unreachable!() };
        let sigma = m.cone().map_err(e)?;
        Ok((weyl_hull(&sigma, &m.build().map_err(e)?).map_err(e)?, sigma))
    };
    let (hull, sigma) = hull_of("edge_multichar.json")?;
    ensure(hull.realization() == sigma.realization(), || "edge: hull differs from sigma".into())?;
    let (hull, _) = hull_of("quadrant_multichar.json")?;
    ensure(hull.realization() == Cone::from_generators(2, &vs(&[&[1, 0], &[0, 1], &[0, -1]])), || {
        format!("quadrant: hull {:?}", hull.realization())
    })?;

    let Payload::Multichar(m) = corpus::load("ex1_multichar.json").payload else { unreachable!() };
    let im = inf_matrix(&m.cone().map_err(e)?, &m.build().map_err(e)?).map_err(e)?;
    ensure(!im.warnings.is_empty(), || "ex1: no warning".into())?;

    for (f, want) in [("split_quadrant_flags.json", true), ("perturbed_quadrant_flags.json", false), ("single_ray_flags.json", true)] {
        let Payload::Flags(fl) = corpus::load(f).payload else { unreachable!() };
        let (fan, flags, psi) = fl.build().map_err(e)?;
        let ok = payne_compatibility(&fan, &flags, &psi).map_err(e)?.is_none();
        ensure(ok == want, || format!("{f}: compatible = {ok}"))?;
    }
    // random split models on the quadrant, and random flags on a single ray
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fan = Fan { dim: 2, rays: vs(&[&[1, 0], &[0, 1]]), cones: vec![vec![0, 1], vec![0], vec![1]] };
    for _ in 0..10 {
        let n = rng.gen_range(1..=3);
        let u = MultiCharacter::new(2, (0..n).map(|_| random_vec(&mut rng, 2, 3)).collect()).map_err(e)?;
        let project = |keep: usize| {
            let chars = u.chars().iter().map(|x| (0..2).map(|i| if i == keep { x[i].clone() } else { Int::from(0) }).collect()).collect();
            MultiCharacter::new(2, chars).unwrap()
        };
        let psi = vec![u.clone(), project(0), project(1)];
        let flags = split_flags(&fan, &psi);
        ensure(payne_compatibility(&fan, &flags, &psi).map_err(e)?.is_none(), || format!("split model {u:?} rejected"))?;
    }
    let ray = Fan { dim: 1, rays: vs(&[&[1]]), cones: vec![vec![0]] };
    for _ in 0..10 {
        let w1 = rng.gen_range(-3..=3i64);
        let w0 = w1 + rng.gen_range(1..=3);
        let line = conekit::bundle::rational_rows(&[random_vec(&mut rng, 2, 3)]);
        if line[0].iter().all(|x| *x == conekit::linalg::Rat::from_integer(0.into())) {
            continue;
        }
        let full = conekit::bundle::rational_rows(&vs(&[&[1, 0], &[0, 1]]));
        let flag = WeightedFlag::new(2, vec![Int::from(w0), Int::from(w1)], vec![line, full]).map_err(e)?;
        let psi = vec![MultiCharacter::new(1, vec![v(&[w0]), v(&[w1])]).map_err(e)?];
        ensure(payne_compatibility(&ray, &[flag], &psi).map_err(e)?.is_none(), || "single ray rejected".into())?;
    }
    Ok(format!("{pairs} (sigma, lambda) pairs, {hulls} hulls, ex1 warns, Payne on fixtures and 20 random models"))
}

// ---- criterion 9 ----

type M2 = [[Scalar; 2]; 2];

fn inverse(m: &M2) -> M2 {
    let det = m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0]));
    let d = det.inv();
    [[m[1][1].mul(&d), m[0][1].neg().mul(&d)], [m[1][0].neg().mul(&d), m[0][0].mul(&d)]]
}

fn product(a: &M2, b: &M2) -> M2 {
    let c = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]]
}

fn apartments() -> Outcome {
    for f in ["tripod_lattices.json", "tripod_lattices_p3.json"] {
        let Payload::LatticeChain(c) = corpus::load(f).payload else { unreachable!() };
        let r = common_apartment(&c.build().map_err(e)?).map_err(e)?;
        ensure(r.is_none(), || format!("{f}: found an apartment"))?;
    }
    let Payload::LatticeChain(c) = corpus::load("tripod_sub_lattices.json").payload else { unreachable!() };
    let chain = c.build().map_err(e)?;
    let a = common_apartment(&chain).map_err(e)?.ok_or("the three lattices have no common apartment")?;
    let basis: &Mat2 = &a.basis;
    let bi = inverse(basis);
    let val = |x: &Scalar| chain.uniformizer.valuation(x);
    // L = B diag(π^a, π^b) U with U invertible over the valuation ring:
    // row i of B^{-1} L has minimal valuation e_i and the determinant has
    // valuation e_0 + e_1.
    for (k, l) in chain.lattices.iter().enumerate() {
        let c = product(&bi, l);
        let row_min = |i: usize| [&c[i][0], &c[i][1]].into_iter().filter_map(|x| val(x)).min();
        let (e0, e1) = (row_min(0).ok_or("zero row")?, row_min(1).ok_or("zero row")?);
        let det = c[0][0].mul(&c[1][1]).sub(&c[0][1].mul(&c[1][0]));
        ensure(val(&det) == Some(e0 + e1), || format!("lattice {k} is not diagonal in the returned basis"))?;
        ensure(a.exponents[k] == (e0, e1), || format!("lattice {k}: exponents {:?} vs {:?}", a.exponents[k], (e0, e1)))?;
    }
    Ok(format!("tripods have no apartment; {} sub-chain lattices re-expand", chain.lattices.len()))
}

// ---- criterion 10 ----

fn pl_classes() -> Outcome {
    let mut out = Vec::new();
    for (f, want) in [("loop.json", "0"), ("subdivided_interval_complex.json", "Z"), ("interval_complex.json", "0")] {
        let Payload::Complex(c) = corpus::load(f).payload else { unreachable!() };
        let g = complex::pl_classes(&c.build().map_err(e)?).map_err(e)?;
        let got = match (g.free_rank, g.torsion.is_empty()) {
            (0, true) => "0".to_string(),
            (1, true) => "Z".to_string(),
            _ => format!("{g:?}"),
        };
        ensure(got == want, || format!("{f}: {got}, expected {want}"))?;
        out.push(format!("{f} = {got}"));
    }
    Ok(out.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("counterexample table", counterexamples),
        ("infimum fixtures", infima),
        ("exactness vs valuation extension", valuations),
        ("saturation vs integral + quasisaturated", saturation_theorem),
        ("infimum localization", infimum_localization),
        ("Hilbert basis oracle", hilbert_oracle),
        ("stars and subdivisions", stars_and_subdivisions),
        ("bundle suite", bundles),
        ("apartments", apartments),
        ("piecewise linear classes", pl_classes),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t.elapsed();
        let r = match r {
            Ok(s) if dt > LIMIT => Err(format!("{s}; took {dt:.1?}, limit {LIMIT:?}")),
            r => r,
        };
        match &r {
            Ok(s) => println!("criterion {:>2} PASS  {name}: {s} [{dt:.2?}]", i + 1),
            Err(s) => {
                println!("criterion {:>2} FAIL  {name}: {s} [{dt:.2?}]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
