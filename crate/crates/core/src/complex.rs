//! Weakly convex cones as partially ordered groups over a base monoid,
//! their stars, subdivisions, cone complexes glued along face maps, the
//! associated order complexes, conewise-linear classes and formal
//! presentations of local algebras.

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::lattice::{
    dot, integer_kernel, is_zero_vec, smith_normal_form, solve_diophantine, vneg, zero_vec,
    Diophantine, IVec, Int, IntegerMatrix, LatticeMap, QuotientGroup,
};
use crate::monoid::FineMonoid;
use crate::morphism::{self, InfResult, MonoidMap};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// A finitely generated partially ordered group `R̂ = Z^n` with saturated
/// positives `R = positives ∩ Z^n`, over a base monoid `P` mapped into `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoGroup {
    rank: usize,
    positives: Cone,
    base: FineMonoid,
    base_map: IntegerMatrix,
}

impl PoGroup {
    pub fn new(rank: usize, positive_generators: &[IVec], base: FineMonoid, base_map: IntegerMatrix) -> Result<Self> {
        for g in positive_generators {
            if g.len() != rank {
                return Err(Error::RankMismatch(format!("positive generator has length {} not {rank}", g.len())));
            }
        }
        Self::from_cone(Cone::from_generators(rank, positive_generators), base, base_map)
    }

    pub fn from_cone(positives: Cone, base: FineMonoid, base_map: IntegerMatrix) -> Result<Self> {
        let rank = positives.ambient_rank();
        if base_map.rows() != rank || base_map.cols() != base.ambient_rank() {
            return Err(Error::RankMismatch(format!(
                "base map is {}x{}, expected {}x{}",
                base_map.rows(),
                base_map.cols(),
                rank,
                base.ambient_rank()
            )));
        }
        for p in base.generators() {
            if !positives.contains(&base_map.mul_vec(p)) {
                return Err(Error::HypothesisViolation("base monoid does not map into the positives".into()));
            }
        }
        Ok(PoGroup { rank, positives, base, base_map })
    }

    /// Positives generated by `gens`, over the zero monoid.
    pub fn over_trivial_base(rank: usize, gens: &[IVec]) -> Result<Self> {
        Self::new(rank, gens, zero_monoid(), IntegerMatrix::zeros(rank, 0))
    }

    /// The po-group whose realization is the cone spanned by `gens` in the
    /// dual space.
    pub fn from_realization(rank: usize, gens: &[IVec], base: FineMonoid, base_map: IntegerMatrix) -> Result<Self> {
        Self::from_cone(Cone::from_generators(rank, gens).dual(), base, base_map)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn positives(&self) -> &Cone {
        &self.positives
    }

    pub fn base(&self) -> &FineMonoid {
        &self.base
    }

    pub fn base_map(&self) -> &IntegerMatrix {
        &self.base_map
    }

    /// Points with values in `R_{>=0}`: the dual of the positives.
    pub fn realization(&self) -> Cone {
        self.positives.dual()
    }

    pub fn is_positive(&self, v: &[Int]) -> bool {
        self.positives.contains(v)
    }

    /// Same group and base with positives replaced.
    pub fn with_positives(&self, positives: Cone) -> Result<PoGroup> {
        PoGroup::from_cone(positives, self.base.clone(), self.base_map.clone())
    }

    /// `R[-f]` for a positive `f`, in the same group.
    pub fn localize(&self, f: &[Int]) -> Result<PoGroup> {
        if !self.is_positive(f) {
            return Err(Error::HypothesisViolation("localizing element is not positive".into()));
        }
        let mut gens = self.positives.generators();
        gens.push(vneg(f));
        self.with_positives(Cone::from_generators(self.rank, &gens))
    }

    /// `R` as a monoid, `R/R^*`, and the quotient from `R^gp` coordinates.
    pub fn sharpened(&self) -> Result<(FineMonoid, FineMonoid, LatticeMap)> {
        let r = FineMonoid::new(self.rank, self.positives.lattice_point_generators()?)?;
        let (rbar, pi) = r.localize_sharpen(self.positives.lineality())?;
        Ok((r, rbar, pi))
    }

    /// `P -> R/R^*` with `P` in its group coordinates.
    pub fn base_morphism(&self) -> Result<MonoidMap> {
        Ok(self.base_morphism_parts()?.0)
    }

    fn base_morphism_parts(&self) -> Result<(MonoidMap, FineMonoid, LatticeMap)> {
        let (r, rbar, pi) = self.sharpened()?;
        let p = self.base.in_gp_coords();
        let cols: Vec<IVec> = self
            .base
            .gp()
            .basis
            .iter()
            .map(|b| pi.apply(&r.gp_coords(&self.base_map.mul_vec(b)).expect("base lands in R^gp")))
            .collect();
        let h = MonoidMap::new(p, rbar.clone(), IntegerMatrix::from_cols(&cols, rbar.ambient_rank()))?;
        Ok((h, r, pi))
    }

    /// Maximal `p` in `P^gp` with `q - p` positive; results in ambient
    /// coordinates of the base.
    pub fn infimum(&self, q: &[Int]) -> Result<InfResult> {
        Ok(self.infima(&[q.to_vec()])?.pop().expect("one result"))
    }

    /// [`PoGroup::infimum`] for several elements, sharing the setup.
    pub fn infima(&self, qs: &[IVec]) -> Result<Vec<InfResult>> {
        if let Some(q) = qs.iter().find(|q| q.len() != self.rank) {
            return Err(Error::RankMismatch(format!("element has length {} not {}", q.len(), self.rank)));
        }
        let (h, r, pi) = self.base_morphism_parts()?;
        let amb = |x: &IVec| self.base.from_gp_coords(x);
        let mut out = Vec::with_capacity(qs.len());
        for q in qs {
            if self.positives.equations().iter().any(|e| !dot(e, q).is_zero()) {
                if !morphism::is_exact(&h)?.holds {
                    return Err(Error::NotExact);
                }
                out.push(InfResult::NoLowerBound);
                continue;
            }
            let qbar = pi.apply(&r.gp_coords(q).expect("q in the span of the positives"));
            out.push(match morphism::infimum(&h, &qbar)? {
                InfResult::NoLowerBound => InfResult::NoLowerBound,
                InfResult::Max(x) => InfResult::Max(amb(&x)),
                InfResult::NoMax(xs) => {
                    let mut v: Vec<IVec> = xs.iter().map(amb).collect();
                    v.sort();
                    InfResult::NoMax(v)
                }
            });
        }
        Ok(out)
    }

    /// Does `self` refine the order of `other` (more positives)?
    pub fn refines(&self, other: &PoGroup) -> bool {
        self.rank == other.rank && self.positives.contains_cone(&other.positives)
    }
}

pub fn zero_monoid() -> FineMonoid {
    FineMonoid::new(0, Vec::new()).expect("zero monoid")
}

/// A point `x: R -> M` given by an integer matrix on `R̂`.
#[derive(Clone, Debug)]
pub struct Point {
    pub map: IntegerMatrix,
    pub target: FineMonoid,
}

impl Point {
    /// An `N`-valued point, i.e. a lattice point of the realization.
    pub fn rank1(x: &[Int]) -> Point {
        Point { map: IntegerMatrix::from_rows(&[x.to_vec()], x.len()), target: FineMonoid::free(1) }
    }
}

/// `Star_x(σ)`: same group, positives `R ∩ ker x`; the base becomes the face
/// of `P` killed by `x`.
pub fn star(sigma: &PoGroup, x: &Point) -> Result<PoGroup> {
    if x.map.cols() != sigma.rank || x.map.rows() != x.target.ambient_rank() {
        return Err(Error::RankMismatch("point has the wrong shape".into()));
    }
    for g in sigma.positives.lattice_point_generators()? {
        if !x.target.contains(&x.map.mul_vec(&g)) {
            return Err(Error::HypothesisViolation("point is not a monoid map on the positives".into()));
        }
    }
    star_lex(sigma, &[x.map.clone()])
}

/// `R ∩ ker x` for a point `x` of the realization.
fn star_positives(r: &Cone, x: &[Int]) -> Cone {
    let mut eqs = r.equations().to_vec();
    eqs.push(x.to_vec());
    Cone::from_inequalities(r.ambient_rank(), r.facets(), &eqs)
}

/// Iterated star: positives `R ∩ ker x_1 ∩ ... ∩ ker x_k`. Positivity of the
/// deeper points is not checked.
pub fn star_lex(sigma: &PoGroup, maps: &[IntegerMatrix]) -> Result<PoGroup> {
    let mut eqs = sigma.positives.equations().to_vec();
    for m in maps {
        eqs.extend(m.row_vecs());
    }
    let positives = Cone::from_inequalities(sigma.rank, sigma.positives.facets(), &eqs);
    let kept: Vec<IVec> = sigma
        .base
        .generators()
        .iter()
        .filter(|p| {
            let v = sigma.base_map.mul_vec(p);
            maps.iter().all(|m| is_zero_vec(&m.mul_vec(&v)))
        })
        .cloned()
        .collect();
    let base = FineMonoid::new(sigma.base.ambient_rank(), kept)?;
    PoGroup::from_cone(positives, base, sigma.base_map.clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubdivisionFailure {
    /// A piece does not refine the order of `σ`.
    NotRefinement { piece: usize },
    DimensionMismatch { piece: usize },
    /// Two pieces meet outside a common face.
    NotAFace { first: usize, second: usize },
    /// A facet of a piece lies neither on the boundary nor on another piece.
    Uncovered { piece: usize, facet_rays: Vec<IVec> },
    /// A sampled point of `σ` (rank one or rank two) lies on no piece.
    SampleMiss { point: Vec<IVec> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivisionReport {
    pub ok: bool,
    /// Which condition failed (1, 2 or 3).
    pub condition: Option<u8>,
    pub failure: Option<SubdivisionFailure>,
    /// For each pair of pieces meeting in a common face, `f` with
    /// `R_i + R_j = R_i[-f] = R_j[f]`.
    pub separators: Vec<(usize, usize, IVec)>,
}

impl SubdivisionReport {
    fn fail(condition: u8, failure: SubdivisionFailure, separators: Vec<(usize, usize, IVec)>) -> Self {
        SubdivisionReport { ok: false, condition: Some(condition), failure: Some(failure), separators }
    }
}

/// A functional `f` in `R_i ∩ -R_j` cutting out `C_i ∩ C_j` on both.
fn separator(ci: &Cone, cj: &Cone, meet: &Cone) -> Option<IVec> {
    let d = ci.dual().intersect(&cj.dual().image(&neg_identity(ci.ambient_rank())));
    let f = d.interior_point();
    let ok = |c: &Cone| c.face_of_functional(&f) == *meet;
    if ok(ci) && ok(cj) {
        Some(f)
    } else {
        None
    }
}

fn neg_identity(n: usize) -> IntegerMatrix {
    let mut m = IntegerMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, -Int::one());
    }
    m
}

/// Lattice points of `c` with coordinates in `[-b, b]`.
fn sample_points(c: &Cone, b: i64) -> Vec<IVec> {
    let n = c.ambient_rank();
    let mut out = Vec::new();
    let mut x = vec![-b; n];
    loop {
        let v: IVec = x.iter().map(|&t| Int::from(t)).collect();
        if c.contains(&v) {
            out.push(v);
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            x[i] += 1;
            if x[i] <= b {
                break;
            }
            x[i] = -b;
        }
    }
}

/// Checks that `pieces` subdivide `σ`: each refines `σ` (condition 1),
/// pairwise intersections of realizations are faces of both with a
/// separating functional (2), and the realizations cover `σ` with disjoint
/// relative interiors, sampled additionally at rank-one and rank-two
/// valuative points (3).
pub fn check_subdivision(sigma: &PoGroup, pieces: &[PoGroup]) -> SubdivisionReport {
    let c = sigma.realization();
    let cs: Vec<Cone> = pieces.iter().map(|p| p.realization()).collect();
    for (i, p) in pieces.iter().enumerate() {
        if !p.refines(sigma) {
            return SubdivisionReport::fail(1, SubdivisionFailure::NotRefinement { piece: i }, Vec::new());
        }
    }
    let mut seps = Vec::new();
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            let meet = cs[i].intersect(&cs[j]);
            let proper = meet != cs[i] && meet != cs[j];
            let sep = if proper { separator(&cs[i], &cs[j], &meet) } else { None };
            match sep {
                Some(f) => seps.push((i, j, f)),
                None => {
                    return SubdivisionReport::fail(2, SubdivisionFailure::NotAFace { first: i, second: j }, seps);
                }
            }
        }
    }
    for (i, ci) in cs.iter().enumerate() {
        if ci.dim() != c.dim() {
            return SubdivisionReport::fail(3, SubdivisionFailure::DimensionMismatch { piece: i }, seps);
        }
    }
    let boundary: Vec<Cone> = c.faces().into_iter().filter(|f| f.dim + 1 == c.dim()).map(|f| f.cone).collect();
    for (i, ci) in cs.iter().enumerate() {
        for f in ci.faces().into_iter().filter(|f| f.dim + 1 == ci.dim()) {
            let on_boundary = boundary.iter().any(|b| b.contains_cone(&f.cone));
            let shared = cs.iter().enumerate().any(|(j, cj)| j != i && cj.contains_cone(&f.cone));
            if !on_boundary && !shared {
                return SubdivisionReport::fail(
                    3,
                    SubdivisionFailure::Uncovered { piece: i, facet_rays: f.cone.generators() },
                    seps,
                );
            }
        }
    }
    // The star at x only depends on which generators of the positives x kills.
    let rs: Vec<&Cone> = std::iter::once(&sigma.positives).chain(pieces.iter().map(|p| &p.positives)).collect();
    let gens: Vec<Vec<IVec>> = rs.iter().map(|r| r.generators()).collect();
    let mut memo: BTreeMap<(usize, Vec<usize>), Cone> = BTreeMap::new();
    let mut tangent = |k: usize, x: &[Int]| -> Cone {
        let killed: Vec<usize> = (0..gens[k].len()).filter(|&g| dot(&gens[k][g], x).is_zero()).collect();
        memo.entry((k, killed)).or_insert_with(|| star_positives(rs[k], x).dual()).clone()
    };
    let sample = sample_points(&c, 2);
    for x in &sample {
        let holders: Vec<usize> = (0..cs.len()).filter(|&i| cs[i].contains(x)).collect();
        if holders.is_empty() {
            return SubdivisionReport::fail(3, SubdivisionFailure::SampleMiss { point: vec![x.clone()] }, seps);
        }
        let local: Vec<Cone> = holders.iter().map(|&i| tangent(i + 1, x)).collect();
        for y in sample_points(&tangent(0, x), 1) {
            let lifted = local.iter().any(|t| t.contains(&y));
            if !lifted {
                return SubdivisionReport::fail(
                    3,
                    SubdivisionFailure::SampleMiss { point: vec![x.clone(), y.clone()] },
                    seps,
                );
            }
        }
    }
    SubdivisionReport { ok: true, condition: None, failure: None, separators: seps }
}

/// A localization `R̂_from -> R̂_to`: the dual face morphism includes the
/// realization of `to` as a face of the realization of `from`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceMap {
    pub from: usize,
    pub to: usize,
    pub matrix: IntegerMatrix,
}

/// A finite diagram of weakly convex cones and face maps. `global`
/// optionally records a group of globally linear functions with a map to
/// every cell.
#[derive(Clone, Debug)]
pub struct Complex {
    pub cells: Vec<PoGroup>,
    pub face_maps: Vec<FaceMap>,
    pub global: Option<(usize, Vec<IntegerMatrix>)>,
}

impl Complex {
    pub fn new(cells: Vec<PoGroup>, face_maps: Vec<FaceMap>) -> Result<Self> {
        for (k, fm) in face_maps.iter().enumerate() {
            validate_face_map(&cells, fm).map_err(|e| Error::Invalid(format!("face map {k}: {e}")))?;
        }
        Ok(Complex { cells, face_maps, global: None })
    }

    /// All faces of the realizations of `pieces` (which share one group),
    /// each as a localization in the same group, with the identity face
    /// maps and the whole group as global linear functions.
    pub fn from_pieces(pieces: &[PoGroup]) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::Invalid("no pieces".into()))?;
        let n = first.rank;
        let mut cells: Vec<PoGroup> = Vec::new();
        let mut cones: Vec<Cone> = Vec::new();
        for p in pieces {
            if p.rank != n || p.base != first.base || p.base_map != first.base_map {
                return Err(Error::Invalid("pieces must share the group and the base".into()));
            }
            for f in p.realization().faces() {
                if !cones.contains(&f.cone) {
                    cells.push(p.with_positives(f.cone.dual())?);
                    cones.push(f.cone);
                }
            }
        }
        let mut maps = Vec::new();
        for i in 0..cones.len() {
            for j in 0..cones.len() {
                if i != j && cones[j].is_face_of(&cones[i]) {
                    maps.push(FaceMap { from: i, to: j, matrix: IntegerMatrix::identity(n) });
                }
            }
        }
        let global = Some((n, vec![IntegerMatrix::identity(n); cells.len()]));
        Ok(Complex { cells, face_maps: maps, global })
    }

    pub fn with_global(mut self, rank: usize, maps: Vec<IntegerMatrix>) -> Result<Self> {
        if maps.len() != self.cells.len() {
            return Err(Error::Invalid("one global map per cell".into()));
        }
        self.global = Some((rank, maps));
        Ok(self)
    }

    /// Indices of the cells that are not the source-side face of another
    /// cell, i.e. the maximal cells.
    pub fn maximal_cells(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&c| !self.face_maps.iter().any(|f| f.to == c && f.from != c)).collect()
    }
}

fn validate_face_map(cells: &[PoGroup], fm: &FaceMap) -> std::result::Result<(), String> {
    let (a, b) = (cells.get(fm.from).ok_or("bad source")?, cells.get(fm.to).ok_or("bad target")?);
    if fm.matrix.cols() != a.rank || fm.matrix.rows() != b.rank {
        return Err("matrix has the wrong shape".into());
    }
    if LatticeMap::new(fm.matrix.clone()).image().rank() != b.rank
        || !crate::lattice::Lattice::span(&fm.matrix.col_vecs(), b.rank).is_saturated()
    {
        return Err("group map is not surjective".into());
    }
    let ker = integer_kernel(&fm.matrix);
    let kc = Cone::from_inequalities(a.rank, a.positives.facets(), &{
        let mut e = a.positives.equations().to_vec();
        e.extend(fm.matrix.row_vecs());
        e
    });
    if kc.dim() != ker.len() {
        return Err("kernel is not generated by positive elements".into());
    }
    let img = b.realization().image(&fm.matrix.transpose());
    if !img.is_face_of(&a.realization()) {
        return Err("target realization is not a face of the source".into());
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellProfile {
    pub integral: bool,
    pub exact: bool,
}

/// Runs the integrality and exactness checks on each base morphism
/// `P -> R_i/R_i^*`.
pub fn integrality_profile(complex: &Complex) -> Result<Vec<CellProfile>> {
    complex
        .cells
        .iter()
        .map(|c| {
            let h = c.base_morphism()?;
            Ok(CellProfile { integral: morphism::is_integral(&h, false)?.holds, exact: morphism::is_exact(&h)?.holds })
        })
        .collect()
}

/// A finite poset given by its reflexive, transitive order relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    leq: Vec<Vec<bool>>,
}

impl Poset {
    /// The order generated by `a <= b` for each pair.
    pub fn new(n: usize, relations: &[(usize, usize)]) -> Self {
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in relations {
            leq[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        Poset { leq }
    }

    pub fn len(&self) -> usize {
        self.leq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leq.is_empty()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }
}

/// `J`: cells ordered by the face relation (`τ <= σ` when `τ` is a face of
/// `σ`), and `I`: the integral, exact cells.
pub fn intersection_complexes(complex: &Complex) -> Result<(Poset, Vec<usize>)> {
    let rel: Vec<(usize, usize)> = complex.face_maps.iter().map(|f| (f.to, f.from)).collect();
    let j = Poset::new(complex.cells.len(), &rel);
    let prof = integrality_profile(complex)?;
    let i = (0..prof.len()).filter(|&k| prof[k].integral && prof[k].exact).collect();
    Ok((j, i))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CofinalFailure {
    Empty { at: usize },
    Disconnected { at: usize, components: Vec<Vec<usize>> },
}

/// For each `j`, the up-set `{i in I : j <= i}` is nonempty and connected
/// under comparability. Returns the first failure.
pub fn is_cofinal(sub: &[usize], poset: &Poset) -> Option<CofinalFailure> {
    for j in 0..poset.len() {
        let up: Vec<usize> = sub.iter().cloned().filter(|&i| poset.leq(j, i)).collect();
        if up.is_empty() {
            return Some(CofinalFailure::Empty { at: j });
        }
        let mut comp: Vec<usize> = (0..up.len()).collect();
        fn find(c: &mut [usize], x: usize) -> usize {
            if c[x] != x {
                let r = find(c, c[x]);
                c[x] = r;
            }
            c[x]
        }
        for a in 0..up.len() {
            for b in a + 1..up.len() {
                if poset.leq(up[a], up[b]) || poset.leq(up[b], up[a]) {
                    let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
                    comp[ra] = rb;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for a in 0..up.len() {
            let r = find(&mut comp, a);
            groups.entry(r).or_default().push(up[a]);
        }
        if groups.len() > 1 {
            return Some(CofinalFailure::Disconnected { at: j, components: groups.into_values().collect() });
        }
    }
    None
}

/// A finitely generated abelian group `Z^free ⊕ ⊕ Z/t_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<Int>,
}

impl AbelianGroup {
    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

/// Projection of `Z^n` onto `Z^n / (units of the positives)` and a section.
fn unit_quotient(c: &PoGroup) -> (IntegerMatrix, IntegerMatrix) {
    let n = c.rank;
    let units = c.positives.lineality();
    let q = QuotientGroup::new(n, units);
    let cols: Vec<IVec> = (0..n).map(|i| q.reduce(&crate::lattice::unit_vec(n, i)).1).collect();
    let proj = IntegerMatrix::from_cols(&cols, q.free_rank());
    let sect: Vec<IVec> =
        (0..q.free_rank()).map(|k| q.lift(&[], &crate::lattice::unit_vec(q.free_rank(), k))).collect();
    (proj, IntegerMatrix::from_cols(&sect, n))
}

/// Conewise-linear functions on the complex modulo global linear
/// functions and base constants.
pub fn pl_classes(complex: &Complex) -> Result<AbelianGroup> {
    let quots: Vec<(IntegerMatrix, IntegerMatrix)> = complex.cells.iter().map(unit_quotient).collect();
    let dims: Vec<usize> = quots.iter().map(|(p, _)| p.rows()).collect();
    let offs: Vec<usize> = dims.iter().scan(0, |s, &d| {
        let o = *s;
        *s += d;
        Some(o)
    }).collect();
    let total: usize = dims.iter().sum();
    let mut rows: Vec<IVec> = Vec::new();
    for fm in &complex.face_maps {
        let (pt, _) = &quots[fm.to];
        let (_, ss) = &quots[fm.from];
        let a = pt.mul(&fm.matrix).mul(ss);
        for r in 0..a.rows() {
            let mut row = zero_vec(total);
            for c in 0..a.cols() {
                row[offs[fm.from] + c] += a.get(r, c);
            }
            row[offs[fm.to] + r] -= Int::one();
            rows.push(row);
        }
    }
    let kernel: Vec<IVec> = if rows.is_empty() {
        (0..total).map(|i| crate::lattice::unit_vec(total, i)).collect()
    } else {
        integer_kernel(&IntegerMatrix::from_rows(&rows, total))
    };
    let k = kernel.len();
    let mut trivial: Vec<IVec> = Vec::new();
    let mut push = |per_cell: &dyn Fn(usize) -> IVec| {
        let mut v = zero_vec(total);
        for (c, (p, _)) in quots.iter().enumerate() {
            let x = p.mul_vec(&per_cell(c));
            for (t, xi) in x.into_iter().enumerate() {
                v[offs[c] + t] = xi;
            }
        }
        trivial.push(v);
    };
    if let Some((g, maps)) = &complex.global {
        for e in 0..*g {
            push(&|c| maps[c].col(e));
        }
    }
    if let Some(first) = complex.cells.first() {
        for b in &first.base.gp().basis {
            push(&|c| complex.cells[c].base_map.mul_vec(b));
        }
    }
    if k == 0 {
        return Ok(AbelianGroup { free_rank: 0, torsion: Vec::new() });
    }
    let kmat = IntegerMatrix::from_cols(&kernel, total);
    let mut coords: Vec<IVec> = Vec::new();
    for t in &trivial {
        match solve_diophantine(&kmat, t) {
            Diophantine::Solution { particular, .. } => coords.push(particular),
            Diophantine::NoSolution => {
                return Err(Error::Invalid("a global function is not conewise linear on the complex".into()))
            }
        }
    }
    if coords.is_empty() {
        return Ok(AbelianGroup { free_rank: k, torsion: Vec::new() });
    }
    let (_, d, _) = smith_normal_form(&IntegerMatrix::from_cols(&coords, k));
    let mut free = k;
    let mut torsion = Vec::new();
    for i in 0..d.rows().min(d.cols()) {
        let x = d.get(i, i).abs();
        if !x.is_zero() {
            free -= 1;
            if !x.is_one() {
                torsion.push(x);
            }
        }
    }
    Ok(AbelianGroup { free_rank: free, torsion })
}

/// A monomial: symbol names with integer exponents, sorted by symbol.
pub type Monomial = Vec<(String, Int)>;

/// A formal generator with its degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub symbol: String,
    /// Degree in `Q^gp` (unsliced) or `Q^gp/P^gp` as (torsion, free) for
    /// the sliced form; `u` symbols have degree zero when sliced.
    pub degree: IVec,
    pub degree_torsion: IVec,
    pub invertible: bool,
}

/// `lhs = rhs` between monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub lhs: Monomial,
    pub rhs: Monomial,
}

impl Relation {
    pub fn render(&self) -> String {
        format!("{} - {}", render_monomial(&self.lhs), render_monomial(&self.rhs))
    }
}

pub fn render_monomial(m: &Monomial) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter()
        .map(|(s, e)| if e.is_one() { s.clone() } else { format!("{s}^{e}") })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicPresentation {
    pub sliced: bool,
    pub generators: Vec<Generator>,
    pub relations: Vec<Relation>,
}

impl SymbolicPresentation {
    pub fn relation_strings(&self) -> Vec<String> {
        self.relations.iter().map(|r| r.render()).collect()
    }
}

fn names(prefix: &str, k: usize) -> Vec<String> {
    if k == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=k).map(|i| format!("{prefix}_{i}")).collect()
    }
}

fn monomial(names: &[String], exps: &[Int]) -> Monomial {
    let mut m: Monomial = names.iter().zip(exps).filter(|(_, e)| !e.is_zero()).map(|(s, e)| (s.clone(), e.clone())).collect();
    m.sort();
    m
}

fn merge(a: Monomial, b: Monomial) -> Monomial {
    let mut acc: BTreeMap<String, Int> = BTreeMap::new();
    for (s, e) in a.into_iter().chain(b) {
        *acc.entry(s).or_insert_with(Int::zero) += e;
    }
    let mut m: Monomial = acc.into_iter().filter(|(_, e)| !e.is_zero()).collect();
    m.sort_by_key(|(s, _)| (symbol_class(s), s.clone()));
    m
}

/// Rendering order: `x` symbols, then `u`, then `s`.
fn symbol_class(s: &str) -> u8 {
    match s.chars().next() {
        Some('x') => 0,
        Some('u') => 1,
        _ => 2,
    }
}

/// Writes `v` as an N-combination of `basis` (a Hilbert basis of a
/// saturated monoid).
fn decompose_over(v: &[Int], basis: &[IVec]) -> Result<Vec<Int>> {
    let n = v.len();
    let k = basis.len();
    let mat: Vec<IVec> = (0..n).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
    let ineqs: Vec<(IVec, Int)> = (0..k).map(|i| (crate::lattice::unit_vec(k, i), Int::zero())).collect();
    crate::polyhedron::find_integer_solution(k, &mat, v, &ineqs)?
        .ok_or_else(|| Error::Invalid("element is not in the monoid".into()))
}

/// Formal generators and binomial relations of the local algebra of
/// `S ×_{A_P} A_Q`, either unsliced (`x^q`, `u^α` for a basis of `P^gp`,
/// `s` for `ε`) or sliced through the toric chart (`x^q`, `u^p` for a basis
/// of `K = ker h^gp`).
pub fn present_local_algebra(h: &MonoidMap, sliced: bool) -> Result<SymbolicPresentation> {
    h.source().require_fs_sharp("source")?;
    h.target().require_fs_sharp("target")?;
    let g = h.in_gp_coords();
    let hm = h.gp_matrix();
    let r = h.source().rank();
    let s = h.target().rank();
    let hb = g.target().cone_gp().hilbert_basis()?;
    let xs = names("x", hb.len());
    let ss = names("s", r);
    let kernel = integer_kernel(&hm);
    let mut gens = Vec::new();
    let mut rels = Vec::new();
    let image = QuotientGroup::new(s, &hm.col_vecs());
    for (q, name) in hb.iter().zip(&xs) {
        let (degree, degree_torsion) = if sliced { let (t, f) = image.reduce(q); (f, t) } else { (q.clone(), Vec::new()) };
        gens.push(Generator { symbol: name.clone(), degree, degree_torsion, invertible: false });
    }
    // relations among the x^q: a lattice basis of the syzygies
    let hbm = IntegerMatrix::from_cols(&hb, s);
    for z in integer_kernel(&hbm) {
        let pos: IVec = z.iter().map(|c| if c.is_positive() { c.clone() } else { Int::zero() }).collect();
        let neg: IVec = z.iter().map(|c| if c.is_negative() { -c } else { Int::zero() }).collect();
        rels.push(Relation { lhs: monomial(&xs, &pos), rhs: monomial(&xs, &neg) });
    }
    let us: Vec<String>;
    if sliced {
        us = names("u", kernel.len());
        for name in &us {
            gens.push(Generator { symbol: name.clone(), degree: zero_vec(image.free_rank()), degree_torsion: zero_vec(image.torsion().len()), invertible: true });
        }
        // x^{h(p)} = u^{g(p)} ε_p, with g: P^gp -> K the splitting read off an
        // adapted basis; on the complement of K this is x^{h(p)} = ε_p
        let adapted = crate::lattice::adapted_basis(&kernel, r);
        for p in g.source().cone_gp().hilbert_basis()? {
            let hp = hm.mul_vec(&p);
            let lhs = monomial(&xs, &decompose_over(&hp, &hb)?);
            let gp = adapted.mul_vec(&p)[..kernel.len()].to_vec();
            rels.push(Relation { lhs, rhs: merge(monomial(&us, &gp), monomial(&ss, &p)) });
        }
    } else {
        us = names("u", r);
        for (i, name) in us.iter().enumerate() {
            gens.push(Generator { symbol: name.clone(), degree: hm.col(i), degree_torsion: Vec::new(), invertible: true });
        }
        // ε_p - u^{-p} x^{h(p)}, written x^{h(p)} = u^{-p} s^p
        for p in g.source().cone_gp().hilbert_basis()? {
            let hp = hm.mul_vec(&p);
            let lhs = monomial(&xs, &decompose_over(&hp, &hb)?);
            let rhs = merge(monomial(&us, &vneg(&p)), monomial(&ss, &p));
            rels.push(Relation { lhs, rhs });
        }
    }
    for name in &ss {
        gens.push(Generator { symbol: name.clone(), degree: Vec::new(), degree_torsion: Vec::new(), invertible: false });
    }
    eliminate_linear(&mut gens, &mut rels, &xs);
    Ok(SymbolicPresentation { sliced, generators: gens, relations: rels })
}

/// Drops relations `x_i = m` where `x_i` occurs to the first power, nowhere
/// else, and `m` involves no `x`, together with the generator `x_i`.
fn eliminate_linear(gens: &mut Vec<Generator>, rels: &mut Vec<Relation>, xs: &[String]) {
    loop {
        let mut hit = None;
        for (k, r) in rels.iter().enumerate() {
            if r.lhs.len() == 1 && r.lhs[0].1.is_one() && r.rhs.iter().all(|(s, _)| !xs.contains(s)) {
                let x = &r.lhs[0].0;
                let elsewhere = rels
                    .iter()
                    .enumerate()
                    .any(|(j, o)| j != k && o.lhs.iter().chain(&o.rhs).any(|(s, _)| s == x));
                if !elsewhere {
                    hit = Some((k, x.clone()));
                    break;
                }
            }
        }
        match hit {
            Some((k, x)) => {
                rels.remove(k);
                gens.retain(|g| g.symbol != x);
            }
            None => break,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;

    fn vs(v: &[&[i64]]) -> Vec<IVec> {
        v.iter().map(|x| ivec(x)).collect()
    }

    fn quadrant() -> PoGroup {
        PoGroup::over_trivial_base(2, &vs(&[&[1, 0], &[0, 1]])).unwrap()
    }

    fn over_n(gens: &[&[i64]]) -> PoGroup {
        PoGroup::from_realization(2, &vs(gens), FineMonoid::free(1), IntegerMatrix::from_i64(2, 1, &[0, 1])).unwrap()
    }

    #[test]
    fn stars_of_the_quadrant() {
        let q = quadrant();
        let apex = star(&q, &Point::rank1(&ivec(&[0, 0]))).unwrap();
        assert_eq!(apex, q);
        let inner = star(&q, &Point::rank1(&ivec(&[1, 1]))).unwrap();
        assert!(inner.positives().is_zero());
        let edge = star(&q, &Point::rank1(&ivec(&[1, 0]))).unwrap();
        assert_eq!(edge.positives(), &Cone::from_generators(2, &vs(&[&[0, 1]])));
    }

    #[test]
    fn diagonal_subdivision_of_the_quadrant() {
        let q = quadrant();
        let piece = |g: &[&[i64]]| PoGroup::from_realization(2, &vs(g), zero_monoid(), IntegerMatrix::zeros(2, 0)).unwrap();
        let a = piece(&[&[1, 0], &[1, 1]]);
        let b = piece(&[&[1, 1], &[0, 1]]);
        assert!(check_subdivision(&q, &[a.clone(), b.clone()]).ok);
        assert!(check_subdivision(&q, &[q.clone()]).ok);
        let r = check_subdivision(&q, &[q.clone(), q.clone()]);
        assert_eq!(r.condition, Some(2));
        let r = check_subdivision(&q, &[a]);
        assert_eq!(r.condition, Some(3));
    }

    #[test]
    fn pl_classes_of_small_complexes() {
        let sigma = over_n(&[&[0, 1], &[2, 1]]);
        assert!(pl_classes(&Complex::from_pieces(&[sigma]).unwrap()).unwrap().is_trivial());
        let sub = Complex::from_pieces(&[over_n(&[&[0, 1], &[1, 1]]), over_n(&[&[1, 1], &[2, 1]])]).unwrap();
        assert_eq!(pl_classes(&sub).unwrap(), AbelianGroup { free_rank: 1, torsion: vec![] });
        // loop of length δ: one edge glued to one vertex at both ends
        let edge = PoGroup::new(2, &vs(&[&[1, 0], &[-1, 1]]), FineMonoid::free(1), IntegerMatrix::from_i64(2, 1, &[0, 1])).unwrap();
        let vertex = PoGroup::new(1, &vs(&[&[1]]), FineMonoid::free(1), IntegerMatrix::from_i64(1, 1, &[1])).unwrap();
        let maps = vec![
            FaceMap { from: 0, to: 1, matrix: IntegerMatrix::from_i64(1, 2, &[0, 1]) },
            FaceMap { from: 0, to: 1, matrix: IntegerMatrix::from_i64(1, 2, &[1, 1]) },
        ];
        let lp = Complex::new(vec![edge, vertex], maps).unwrap();
        assert!(pl_classes(&lp).unwrap().is_trivial());
    }

    #[test]
    fn cofinality() {
        let j = Poset::new(3, &[(0, 1), (0, 2)]);
        assert!(matches!(is_cofinal(&[1, 2], &j), Some(CofinalFailure::Disconnected { at: 0, .. })));
        assert_eq!(is_cofinal(&[0, 1, 2], &j), None);
        let sub = Complex::from_pieces(&[over_n(&[&[0, 1], &[1, 1]]), over_n(&[&[1, 1], &[2, 1]])]).unwrap();
        let (jj, ii) = intersection_complexes(&sub).unwrap();
        assert_eq!(ii.len(), jj.len() - 1, "only the apex lies over the closed point");
        assert_eq!(is_cofinal(&ii, &jj), None);
    }

    #[test]
    fn square_with_both_diagonals() {
        let base_map = IntegerMatrix::from_i64(3, 2, &[0, 0, 1, -1, 0, 1]);
        let cone = |g: &[&[i64]]| PoGroup::from_realization(3, &vs(g), FineMonoid::free(2), base_map.clone()).unwrap();
        let sigma = cone(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]]);
        let h = sigma.base_morphism().unwrap();
        assert!(morphism::is_integral(&h, false).unwrap().holds);
        let pieces = [
            cone(&[&[0, 0, 1], &[1, 0, 1], &[1, 1, 2]]),
            cone(&[&[1, 0, 1], &[1, 1, 1], &[1, 1, 2]]),
            cone(&[&[1, 1, 1], &[0, 1, 1], &[1, 1, 2]]),
            cone(&[&[0, 1, 1], &[0, 0, 1], &[1, 1, 2]]),
        ];
        assert!(check_subdivision(&sigma, &pieces).ok);
        let prof: Vec<bool> = pieces.iter().map(|p| morphism::is_integral(&p.base_morphism().unwrap(), false).unwrap().holds).collect();
        assert!(prof.iter().any(|b| !b));
    }

    #[test]
    fn edge_infima() {
        let e = over_n(&[&[0, 1], &[1, 1]]);
        assert_eq!(e.infimum(&ivec(&[1, 0])).unwrap(), InfResult::Max(ivec(&[0])));
        assert_eq!(e.infimum(&ivec(&[-1, 0])).unwrap(), InfResult::Max(ivec(&[-1])));
    }

    #[test]
    fn local_algebra_tokens() {
        let n = FineMonoid::free(1);
        let n2 = FineMonoid::free(2);
        let mu = MonoidMap::new(n.clone(), n2, IntegerMatrix::from_i64(2, 1, &[1, 1])).unwrap();
        assert_eq!(present_local_algebra(&mu, false).unwrap().relation_strings(), vec!["x_1 x_2 - u^-1 s"]);
        assert_eq!(present_local_algebra(&mu, true).unwrap().relation_strings(), vec!["x_1 x_2 - s"]);
        let two = MonoidMap::new(n.clone(), n.clone(), IntegerMatrix::from_i64(1, 1, &[2])).unwrap();
        assert_eq!(present_local_algebra(&two, true).unwrap().relation_strings(), vec!["x^2 - s"]);
        let id = MonoidMap::identity(&FineMonoid::free(2));
        assert!(present_local_algebra(&id, true).unwrap().relations.is_empty());
        assert!(present_local_algebra(&id, false).unwrap().relations.is_empty());
    }
}
