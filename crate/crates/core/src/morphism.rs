//! Homomorphisms of fine monoids and the property suite: local,
//! injective on groups, vertical, exact, integral, saturated,
//! quasisaturated; rank-one valuation extension; infima.
//!
//! Internally every computation runs in the coordinates of the chosen
//! bases of `P^gp` and `Q^gp`, where the monoids become full-dimensional
//! and `N_P = Hom(P^gp, Z)` is the dual lattice `Z^r`.

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::lattice::{
    dot, is_zero_vec, solve_diophantine, unit_vec, vadd, vneg, vscale, vsub, zero_vec, Diophantine, IVec, Int,
    IntegerMatrix, LatticeMap, QuotientGroup,
};
use crate::linalg::clear_denominators;
use crate::monoid::FineMonoid;
use crate::polyhedron::{find_integer_solution, Polyhedron};
use num_traits::{One, Zero};

#[derive(Clone, Debug)]
pub struct MonoidMap {
    source: FineMonoid,
    target: FineMonoid,
    matrix: IntegerMatrix,
    gp: IntegerMatrix,
}

impl PartialEq for MonoidMap {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.gp == other.gp
    }
}

impl MonoidMap {
    /// `matrix` acts on ambient coordinates: it has `target.ambient_rank()`
    /// rows and `source.ambient_rank()` columns.
    pub fn new(source: FineMonoid, target: FineMonoid, matrix: IntegerMatrix) -> Result<Self> {
        if matrix.cols() != source.ambient_rank() || matrix.rows() != target.ambient_rank() {
            return Err(Error::RankMismatch(format!(
                "matrix is {}x{} but the monoids have ambient ranks {} -> {}",
                matrix.rows(),
                matrix.cols(),
                source.ambient_rank(),
                target.ambient_rank()
            )));
        }
        for (i, g) in source.generators().iter().enumerate() {
            if !target.contains(&matrix.mul_vec(g)) {
                return Err(Error::NotAMorphism(i));
            }
        }
        let cols: Vec<IVec> = source
            .gp()
            .basis
            .iter()
            .map(|b| target.gp_coords(&matrix.mul_vec(b)).expect("image of the group lies in the target group"))
            .collect();
        let gp = IntegerMatrix::from_cols(&cols, target.rank());
        Ok(MonoidMap { source, target, matrix, gp })
    }

    pub fn identity(p: &FineMonoid) -> Self {
        Self::new(p.clone(), p.clone(), IntegerMatrix::identity(p.ambient_rank())).expect("identity")
    }

    pub fn source(&self) -> &FineMonoid {
        &self.source
    }

    pub fn target(&self) -> &FineMonoid {
        &self.target
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.matrix
    }

    /// The group map `P^gp -> Q^gp` in coordinates of the stored bases.
    pub fn gp_matrix(&self) -> IntegerMatrix {
        self.gp.clone()
    }

    pub fn apply(&self, v: &[Int]) -> IVec {
        self.matrix.mul_vec(v)
    }

    /// Same morphism with both monoids re-embedded in their group
    /// coordinates.
    pub fn in_gp_coords(&self) -> MonoidMap {
        MonoidMap::new(self.source.in_gp_coords(), self.target.in_gp_coords(), self.gp.clone()).expect("valid")
    }

    pub fn compose(&self, first: &MonoidMap) -> Result<MonoidMap> {
        MonoidMap::new(first.source.clone(), self.target.clone(), self.matrix.mul(&first.matrix))
    }

    fn require_fs(&self) -> Result<()> {
        self.source.require_fs_sharp("source")?;
        self.target.require_fs_sharp("target")
    }

    fn p_amb(&self, c: &[Int]) -> IVec {
        self.source.from_gp_coords(c)
    }

    fn q_amb(&self, c: &[Int]) -> IVec {
        self.target.from_gp_coords(c)
    }
}

/// Machine-checkable evidence attached to a verdict. Vectors are in
/// ambient coordinates unless the variant says otherwise; dual-cone data is
/// in the coordinates dual to the group bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    None,
    /// A nonzero element of `P` sent to zero.
    KernelElement(IVec),
    /// A basis of `ker h^gp`.
    Kernel(Vec<IVec>),
    /// Pairs `(q, p)` with `h(p) - q` in `Q`, one per Hilbert generator `q`.
    VerticalWitnesses(Vec<(IVec, IVec)>),
    /// A Hilbert generator `q` of `Q` whose class `-[q]` misses the image of `Q`.
    NotVertical(IVec),
    /// The common rays of `φ(σ_Q)` and `σ_P`.
    ConesAgree(Vec<IVec>),
    /// A ray of `σ_P` outside `φ(σ_Q)`.
    MissingRay(IVec),
    /// Rays of a face `τ` of `σ_Q` with the certificate for that face.
    AtFace { face_rays: Vec<IVec>, inner: Box<Certificate> },
    /// Kato's criterion fails: `h(x1) + y1 = h(x2) + y2` has no
    /// decomposition.
    KatoFailure { x1: IVec, x2: IVec, y1: IVec, y2: IVec },
    /// Number of Hilbert-basis pairs and minimal pairs checked.
    KatoChecked { pairs: usize, minimal_pairs: usize },
    /// `φ(τ)` is not a face of `σ_P`.
    FaceNotOnto { face_rays: Vec<IVec>, image_rays: Vec<IVec> },
    /// A lattice point of `φ(τ)` that is not the image of a lattice point
    /// of `τ`.
    LatticeGap { face_rays: Vec<IVec>, point: IVec },
    /// The number of faces of `σ_Q` that were checked.
    FacesChecked(usize),
    /// The pushout along `[n]` gives a non-exact `h'`; `element` is an
    /// element of `Q'^gp` (torsion residues, free part) mapping into `Q`
    /// but not lying in `Q'`.
    QuasiFailure { n: u64, torsion: IVec, free: IVec },
    /// All `n` up to the bound passed.
    QuasiChecked(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub certificate: Certificate,
    /// Which decision procedure produced the verdict.
    pub procedure: &'static str,
}

impl Verdict {
    fn new(holds: bool, certificate: Certificate, procedure: &'static str) -> Self {
        Verdict { holds, certificate, procedure }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicFlags {
    pub local: Verdict,
    pub injective_gp: Verdict,
    pub vertical: Verdict,
}

/// `ker(h ⊗ R) ∩ cone(P)` in group coordinates of `P`.
fn kernel_cone(h: &MonoidMap) -> Cone {
    let pc = h.source.cone_gp();
    let mut eqs = pc.equations().to_vec();
    eqs.extend(h.gp.row_vecs());
    Cone::from_inequalities(h.source.rank(), pc.facets(), &eqs)
}

pub fn is_local(h: &MonoidMap) -> Verdict {
    let k = kernel_cone(h);
    if k.is_zero() {
        return Verdict::new(true, Certificate::None, "kernel cone");
    }
    let w = k.generators().into_iter().next().expect("nonzero cone");
    Verdict::new(false, Certificate::KernelElement(h.p_amb(&w)), "kernel cone")
}

pub fn is_injective_gp(h: &MonoidMap) -> Verdict {
    let k = LatticeMap::new(h.gp.clone()).kernel();
    if k.rank() == 0 {
        Verdict::new(true, Certificate::None, "integer kernel")
    } else {
        let basis = k.basis.iter().map(|v| h.p_amb(v)).collect();
        Verdict::new(false, Certificate::Kernel(basis), "integer kernel")
    }
}

pub fn is_vertical(h: &MonoidMap) -> Result<Verdict> {
    h.target.require_fs_sharp("target")?;
    let s = h.target.rank();
    let r = h.source.rank();
    let mut gens: Vec<IVec> = h.target.generators_gp().to_vec();
    for c in h.gp.col_vecs() {
        gens.push(vneg(&c));
        gens.push(c);
    }
    let c = Cone::from_generators(s, &gens);
    let qc = h.target.cone_gp();
    let hb = qc.hilbert_basis()?;
    if !c.is_linear_space() {
        let q = hb.iter().find(|q| !c.contains(&vneg(q))).expect("some generator is not invertible");
        return Ok(Verdict::new(false, Certificate::NotVertical(h.q_amb(q)), "cone plus image span"));
    }
    // Lattice witnesses p with h(p) - q in Q.
    let hq: Vec<IVec> = qc.facets().iter().map(|a| h.gp.transpose().mul_vec(a)).collect();
    let mut witnesses = Vec::new();
    for q in &hb {
        let ineqs: Vec<(IVec, Int)> = qc.facets().iter().zip(&hq).map(|(a, ah)| (ah.clone(), dot(a, q))).collect();
        let p = find_integer_solution(r, &[], &[], &ineqs)?.expect("rational feasibility implies a lattice point");
        witnesses.push((h.q_amb(q), h.p_amb(&p)));
    }
    Ok(Verdict::new(true, Certificate::VerticalWitnesses(witnesses), "cone plus image span"))
}

pub fn basic_flags(h: &MonoidMap) -> Result<BasicFlags> {
    Ok(BasicFlags { local: is_local(h), injective_gp: is_injective_gp(h), vertical: is_vertical(h)? })
}

/// `σ_P` and `σ_Q` in dual group coordinates.
pub fn dual_cones(h: &MonoidMap) -> (Cone, Cone) {
    (h.source.cone_gp().dual(), h.target.cone_gp().dual())
}

pub fn is_exact(h: &MonoidMap) -> Result<Verdict> {
    h.require_fs()?;
    let (sp, sq) = dual_cones(h);
    let img = sq.image(&h.gp.transpose());
    if img == sp {
        return Ok(Verdict::new(true, Certificate::ConesAgree(sp.rays().to_vec()), "dual cone image"));
    }
    let miss = sp.generators().into_iter().find(|v| !img.contains(v)).expect("image is a proper subcone");
    Ok(Verdict::new(false, Certificate::MissingRay(miss), "dual cone image"))
}

/// For `v` in `σ_P ∩ N_P`, finds `c >= 1` and `w` in `σ_Q ∩ N_Q` with
/// `φ(w) = c v`, choosing a vertex of the fibre with the smallest
/// denominator. `None` when `v` is outside `φ(σ_Q)`.
pub fn extend_rank1_valuation(h: &MonoidMap, v: &[Int]) -> Result<Option<(Int, IVec)>> {
    h.require_fs()?;
    let (sp, _) = dual_cones(h);
    if v.len() != sp.ambient_rank() || !sp.contains(v) {
        return Err(Error::HypothesisViolation("valuation is not in the dual cone of the source".into()));
    }
    let s = h.target.rank();
    let mut poly = Polyhedron::new(s);
    for g in h.target.generators_gp() {
        poly.add_ineq(g.clone(), Int::zero());
    }
    let ht = h.gp.transpose();
    for i in 0..ht.rows() {
        poly.add_eq(ht.row(i), v[i].clone());
    }
    let vr = poly.vrep();
    let mut best: Option<(Int, IVec)> = None;
    for p in &vr.points {
        let (w, c) = clear_denominators(p);
        let better = match &best {
            None => true,
            Some((bc, bw)) => (&c, &w) < (bc, bw),
        };
        if better {
            best = Some((c, w));
        }
    }
    Ok(best)
}

/// The localization `P' = P[-h^{-1}(0)]^♯` with the induced local
/// `h': P' -> Q`, and the quotient map from `P^gp` (group coordinates).
pub fn localize_morphism(h: &MonoidMap) -> Result<(MonoidMap, LatticeMap)> {
    h.source.require_fs_sharp("source")?;
    let k = kernel_cone(h);
    let pg = h.in_gp_coords();
    let kill: Vec<IVec> = k.generators();
    let (p2, pi) = pg.source.localize_sharpen(&kill)?;
    let section = section_of(&pi.matrix)?;
    let h2 = h.gp.mul(&section);
    let qb = h.target.gp().basis_matrix();
    let amb = if h.target.rank() == 0 { IntegerMatrix::zeros(h.target.ambient_rank(), p2.ambient_rank()) } else { qb.mul(&h2) };
    Ok((MonoidMap::new(p2, h.target.clone(), amb)?, pi))
}

/// A right inverse of a surjective integer matrix.
fn section_of(m: &IntegerMatrix) -> Result<IntegerMatrix> {
    let mut cols = Vec::new();
    for i in 0..m.rows() {
        match solve_diophantine(m, &unit_vec(m.rows(), i)) {
            Diophantine::Solution { particular, .. } => cols.push(particular),
            Diophantine::NoSolution => return Err(Error::HypothesisViolation("quotient map is not surjective".into())),
        }
    }
    Ok(IntegerMatrix::from_cols(&cols, m.cols()))
}

/// The commutative square of localizations at `p` in `P` and `h(p)` in `Q`.
#[derive(Clone, Debug)]
pub struct LocalizedSquare {
    pub map: MonoidMap,
    /// `P^gp -> P'^gp` in group coordinates.
    pub source_map: LatticeMap,
    /// `Q^gp -> Q'^gp` in group coordinates.
    pub target_map: LatticeMap,
}

/// `P[-p]^♯ -> Q[-h(p)]^♯` for `p` in `P` (ambient coordinates).
pub fn localize_along(h: &MonoidMap, p: &[Int]) -> Result<LocalizedSquare> {
    h.require_fs()?;
    let g = h.in_gp_coords();
    let pc = h.source.gp_coords(p).ok_or_else(|| Error::HypothesisViolation("element not in P^gp".into()))?;
    let (p2, pi_p) = g.source.localize_sharpen(&[pc.clone()])?;
    let (q2, pi_q) = g.target.localize_sharpen(&[h.gp.mul_vec(&pc)])?;
    let m = pi_q.matrix.mul(&h.gp).mul(&section_of(&pi_p.matrix)?);
    let map = MonoidMap::new(p2, q2, m)?;
    Ok(LocalizedSquare { map, source_map: pi_p, target_map: pi_q })
}

pub fn localizations_exact(h: &MonoidMap) -> Result<Verdict> {
    h.require_fs()?;
    let g = h.in_gp_coords();
    let (_, sq) = dual_cones(h);
    let faces = sq.faces();
    for f in faces.iter().rev() {
        let l = f.cone.interior_point();
        let kill: Vec<IVec> =
            g.target.generators().iter().filter(|q| dot(&l, q).is_zero()).cloned().collect();
        let (q2, pi) = g.target.localize_sharpen(&kill)?;
        let comp = MonoidMap::new(g.source.clone(), q2, pi.matrix.mul(&h.gp))?;
        let (loc, _) = localize_morphism(&comp)?;
        let v = is_exact(&loc)?;
        if !v.holds {
            return Ok(Verdict::new(
                false,
                Certificate::AtFace { face_rays: f.cone.rays().to_vec(), inner: Box::new(v.certificate) },
                "faces of the target dual cone",
            ));
        }
    }
    Ok(Verdict::new(true, Certificate::FacesChecked(faces.len()), "faces of the target dual cone"))
}

/// Lattice points `y` of the polyhedron `{a.y >= b}` that are minimal for
/// the order defined by `down` (no `y - g` stays inside).
fn minimal_points(dim: usize, ineqs: &[(IVec, Int)], down: &[IVec]) -> Result<Vec<IVec>> {
    let mut neg = Polyhedron::new(dim);
    for (a, b) in ineqs {
        neg.add_ineq(vneg(a), b.clone());
    }
    Ok(neg.maximal_lattice_points(down)?.into_iter().map(|z| vneg(&z)).collect())
}

/// Does `h(x1) + y1 = h(x2) + y2` admit `x3, x4 in P`, `y in Q` with
/// `y1 = h(x3) + y`, `y2 = h(x4) + y`, `x1 + x3 = x2 + x4`? Group
/// coordinates throughout.
fn kato_witness(h: &MonoidMap, x1: &[Int], x2: &[Int], y1: &[Int], y2: &[Int]) -> Result<bool> {
    let s = h.target.rank();
    let r = h.source.rank();
    let qf = h.target.cone_gp().facets().to_vec();
    let pc = h.source.cone_gp();
    let mut box_ = Polyhedron::new(s);
    for a in &qf {
        box_.add_ineq(a.clone(), Int::zero());
        box_.add_ineq(vneg(a), -dot(a, y1));
        box_.add_ineq(vneg(a), -dot(a, y2));
    }
    let shift = vsub(x1, x2);
    let injective = LatticeMap::new(h.gp.clone()).is_injective();
    for y in box_.lattice_points()? {
        let z = vsub(y1, &y);
        if injective {
            let Diophantine::Solution { particular: x3, .. } = solve_diophantine(&h.gp, &z) else { continue };
            if pc.contains(&x3) && pc.contains(&vadd(&x3, &shift)) {
                return Ok(true);
            }
        } else {
            let mut ineqs: Vec<(IVec, Int)> = Vec::new();
            for a in pc.facets() {
                ineqs.push((a.clone(), Int::zero()));
                ineqs.push((a.clone(), -dot(a, &shift)));
            }
            if find_integer_solution(r, &h.gp.row_vecs(), &z, &ineqs)?.is_some() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Minimal pairs `(y1, y2)` in `Q^2` with `y1 - y2 = h(x2) - h(x1)`, in
/// group coordinates.
fn minimal_pairs(h: &MonoidMap, x1: &[Int], x2: &[Int]) -> Result<Vec<(IVec, IVec)>> {
    let s = h.target.rank();
    let d = vsub(&h.gp.mul_vec(x2), &h.gp.mul_vec(x1));
    let qc = h.target.cone_gp();
    let mut ineqs = Vec::new();
    for a in qc.facets() {
        ineqs.push((a.clone(), Int::zero()));
        ineqs.push((a.clone(), dot(a, &d)));
    }
    let hb = qc.hilbert_basis()?;
    Ok(minimal_points(s, &ineqs, &hb)?.into_iter().map(|y1| (y1.clone(), vsub(&y1, &d))).collect())
}

/// Checks Kato's criterion for one pair `(x1, x2)` of elements of `P`
/// (ambient coordinates). Returns the first minimal `(y1, y2)` (ambient
/// coordinates) without a decomposition.
pub fn integral_pair_failure(h: &MonoidMap, x1: &[Int], x2: &[Int]) -> Result<Option<(IVec, IVec)>> {
    h.require_fs()?;
    let c1 = h.source.gp_coords(x1).ok_or_else(|| Error::HypothesisViolation("x1 not in P^gp".into()))?;
    let c2 = h.source.gp_coords(x2).ok_or_else(|| Error::HypothesisViolation("x2 not in P^gp".into()))?;
    for (y1, y2) in minimal_pairs(h, &c1, &c2)? {
        if !kato_witness(h, &c1, &c2, &y1, &y2)? {
            return Ok(Some((h.q_amb(&y1), h.q_amb(&y2))));
        }
    }
    Ok(None)
}

/// Kato's equational criterion over pairs of Hilbert-basis elements of `P`
/// and minimal pairs in `Q`. With `paranoid`, also brute-forces small
/// sums of generators.
pub fn is_integral(h: &MonoidMap, paranoid: bool) -> Result<Verdict> {
    h.require_fs()?;
    let hb = h.source.cone_gp().hilbert_basis()?;
    let mut pairs = 0;
    let mut minimal = 0;
    for i in (0..hb.len()).rev() {
        for j in (0..i).rev() {
            pairs += 1;
            for (y1, y2) in minimal_pairs(h, &hb[i], &hb[j])? {
                minimal += 1;
                if !kato_witness(h, &hb[i], &hb[j], &y1, &y2)? {
                    return Ok(Verdict::new(
                        false,
                        Certificate::KatoFailure {
                            x1: h.p_amb(&hb[i]),
                            x2: h.p_amb(&hb[j]),
                            y1: h.q_amb(&y1),
                            y2: h.q_amb(&y2),
                        },
                        "Kato criterion on Hilbert-basis pairs",
                    ));
                }
            }
        }
    }
    if paranoid {
        if let Some(cert) = brute_force_kato(h, &hb)? {
            return Ok(Verdict::new(false, cert, "Kato criterion, brute force"));
        }
    }
    Ok(Verdict::new(
        true,
        Certificate::KatoChecked { pairs, minimal_pairs: minimal },
        if paranoid { "Kato criterion on Hilbert-basis pairs and brute force" } else { "Kato criterion on Hilbert-basis pairs" },
    ))
}

/// N-combinations of `gens` with total coefficient at most `k`.
fn small_sums(gens: &[IVec], dim: usize, k: usize) -> Vec<IVec> {
    let mut out = vec![zero_vec(dim)];
    let mut frontier = vec![(zero_vec(dim), 0usize)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (v, start) in &frontier {
            for (i, g) in gens.iter().enumerate().skip(*start) {
                let w = vadd(v, g);
                out.push(w.clone());
                next.push((w, i));
            }
        }
        frontier = next;
    }
    out.sort();
    out.dedup();
    out
}

fn brute_force_kato(h: &MonoidMap, hb: &[IVec]) -> Result<Option<Certificate>> {
    let xs = small_sums(hb, h.source.rank(), 2);
    let hq = h.target.cone_gp().hilbert_basis()?;
    let ys = small_sums(&hq, h.target.rank(), 2);
    let qc = h.target.cone_gp();
    for x1 in &xs {
        for x2 in &xs {
            if x1 >= x2 {
                continue;
            }
            let d = vsub(&h.gp.mul_vec(x2), &h.gp.mul_vec(x1));
            for y1 in &ys {
                let y2 = vsub(y1, &d);
                if !qc.contains(&y2) {
                    continue;
                }
                if !kato_witness(h, x1, x2, y1, &y2)? {
                    return Ok(Some(Certificate::KatoFailure {
                        x1: h.p_amb(x1),
                        x2: h.p_amb(x2),
                        y1: h.q_amb(y1),
                        y2: h.q_amb(&y2),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Weak semistability: every face of `σ_Q` maps onto a face of `σ_P`, and
/// lattice points of each image face lift to lattice points of the face.
pub fn is_saturated(h: &MonoidMap) -> Result<Verdict> {
    h.require_fs()?;
    if !LatticeMap::new(h.gp.clone()).is_injective() {
        return Err(Error::HypothesisViolation("is_saturated needs h injective on groups".into()));
    }
    const PROC: &str = "weak semistability";
    let (sp, sq) = dual_cones(h);
    let p_faces: Vec<Cone> = sp.faces().into_iter().map(|f| f.cone).collect();
    let phi = h.gp.transpose();
    let s = h.target.rank();
    let faces = sq.faces();
    for f in &faces {
        let img = f.cone.image(&phi);
        if !p_faces.contains(&img) {
            return Ok(Verdict::new(
                false,
                Certificate::FaceNotOnto { face_rays: f.cone.rays().to_vec(), image_rays: img.rays().to_vec() },
                PROC,
            ));
        }
        let mut ineqs: Vec<(IVec, Int)> = f.cone.facets().iter().map(|a| (a.clone(), Int::zero())).collect();
        for e in f.cone.equations() {
            ineqs.push((e.clone(), Int::zero()));
            ineqs.push((vneg(e), Int::zero()));
        }
        for b in img.hilbert_basis()? {
            if find_integer_solution(s, &phi.row_vecs(), &b, &ineqs)?.is_none() {
                return Ok(Verdict::new(
                    false,
                    Certificate::LatticeGap { face_rays: f.cone.rays().to_vec(), point: b },
                    PROC,
                ));
            }
        }
    }
    Ok(Verdict::new(true, Certificate::FacesChecked(faces.len()), PROC))
}

/// Is `v` (in `Z^k`, modulo the quotient) in the monoid generated by
/// `gens` inside `group`?
fn in_quotient_monoid(group: &QuotientGroup, gens: &[IVec], v: &[Int]) -> Result<bool> {
    let tors = group.torsion();
    let m = gens.len();
    let t = tors.len();
    let coords: Vec<(IVec, IVec)> = gens.iter().map(|g| group.reduce(g)).collect();
    let (vt, vf) = group.reduce(v);
    let n = m + t;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..group.free_rank() {
        let mut row: IVec = coords.iter().map(|(_, f)| f[k].clone()).collect();
        row.extend(zero_vec(t));
        rows.push(row);
        rhs.push(vf[k].clone());
    }
    for k in 0..t {
        let mut row: IVec = coords.iter().map(|(tt, _)| tt[k].clone()).collect();
        let mut tail = zero_vec(t);
        tail[k] = -tors[k].clone();
        row.extend(tail);
        rows.push(row);
        rhs.push(vt[k].clone());
    }
    let ineqs: Vec<(IVec, Int)> = (0..m).map(|i| (unit_vec(n, i), Int::zero())).collect();
    if n == 0 {
        return Ok(is_zero_vec(&vf));
    }
    let rows_or_none: Vec<IVec> = rows;
    Ok(find_integer_solution(n, &rows_or_none, &rhs, &ineqs)?.is_some())
}

/// Exactness of `f: S -> Q` where `S` is generated by `gens` inside the
/// quotient `group` of `Z^k`, `f` is given on `Z^k` by `fmat` (killing
/// the relations) and `Q` is saturated with full-dimensional cone `qcone`
/// in `Z^s`. Returns an element of `f^{-1}(Q)` outside `S`, if any.
fn quotient_exactness_gap(
    group: &QuotientGroup,
    gens: &[IVec],
    fmat: &IntegerMatrix,
    qcone: &Cone,
) -> Result<Option<(IVec, IVec)>> {
    let tors = group.torsion();
    let fr = group.free_rank();
    // f only sees the free coordinates.
    let ffree_cols: Vec<IVec> = (0..fr)
        .map(|k| {
            let mut e = zero_vec(fr);
            e[k] = Int::one();
            fmat.mul_vec(&group.lift(&zero_vec(tors.len()), &e))
        })
        .collect();
    let ffree = IntegerMatrix::from_cols(&ffree_cols, fmat.rows());
    let c = if fr == 0 { Cone::zero(0) } else { qcone.preimage(&ffree) };
    let mut tgens: Vec<(IVec, IVec)> = Vec::new();
    for k in 0..tors.len() {
        let mut t = zero_vec(tors.len());
        t[k] = Int::one();
        tgens.push((t, zero_vec(fr)));
    }
    if fr > 0 {
        for g in c.lattice_point_generators()? {
            tgens.push((zero_vec(tors.len()), g));
        }
    }
    for (t, f) in tgens {
        let v = group.lift(&t, &f);
        if !in_quotient_monoid(group, gens, &v)? {
            return Ok(Some((t, f)));
        }
    }
    Ok(None)
}

/// For `n = 1..=n_max`, forms the integral pushout `Q'` of `h` along
/// `[n]: P -> P` and tests exactness of the induced `h': Q' -> Q`.
pub fn quasisaturated_upto(h: &MonoidMap, n_max: u64) -> Result<Verdict> {
    h.require_fs()?;
    let r = h.source.rank();
    let s = h.target.rank();
    let mut gens: Vec<IVec> = Vec::new();
    for q in h.target.generators_gp() {
        let mut v = q.clone();
        v.extend(zero_vec(r));
        gens.push(v);
    }
    for p in h.source.generators_gp() {
        let mut v = zero_vec(s);
        v.extend(p.iter().cloned());
        gens.push(v);
    }
    for n in 1..=n_max {
        let nn = Int::from(n);
        let relations: Vec<IVec> = (0..r)
            .map(|j| {
                let mut v = h.gp.col(j);
                v.extend(vscale(&-nn.clone(), &unit_vec(r, j)));
                v
            })
            .collect();
        let group = QuotientGroup::new(s + r, &relations);
        // h'(a, b) = n a + h(b)
        let mut fm = IntegerMatrix::zeros(s, s + r);
        for i in 0..s {
            fm.set(i, i, nn.clone());
            for j in 0..r {
                fm.set(i, s + j, h.gp.get(i, j).clone());
            }
        }
        if let Some((t, f)) = quotient_exactness_gap(&group, &gens, &fm, h.target.cone_gp())? {
            return Ok(Verdict::new(
                false,
                Certificate::QuasiFailure { n, torsion: t, free: f },
                "pushout along [n], bounded",
            ));
        }
    }
    Ok(Verdict::new(true, Certificate::QuasiChecked(n_max), "pushout along [n], bounded"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfResult {
    NoLowerBound,
    Max(IVec),
    /// Maximal elements, sorted lexicographically.
    NoMax(Vec<IVec>),
}

/// Maximal elements of `P_{<=q} = {x in P^gp : h(x) <= q}` for exact `h`
/// and `q` in `Q^gp` (ambient coordinates); results in ambient
/// coordinates of `P`.
pub fn infimum(h: &MonoidMap, q: &[Int]) -> Result<InfResult> {
    if !is_exact(h)?.holds {
        return Err(Error::NotExact);
    }
    let qc = h
        .target
        .gp_coords(q)
        .ok_or_else(|| Error::HypothesisViolation("q is not in the target group".into()))?;
    // Exact and sharp implies local and injective, so the localization is trivial.
    let r = h.source.rank();
    let mut poly = Polyhedron::new(r);
    let ht = h.gp.transpose();
    for a in h.target.cone_gp().facets() {
        poly.add_ineq(vneg(&ht.mul_vec(a)), -dot(a, &qc));
    }
    let up = h.source.cone_gp().hilbert_basis()?;
    let mut maxima: Vec<IVec> = poly.maximal_lattice_points(&up)?.iter().map(|x| h.p_amb(x)).collect();
    maxima.sort();
    Ok(match maxima.len() {
        0 => InfResult::NoLowerBound,
        1 => InfResult::Max(maxima.pop().unwrap()),
        _ => InfResult::NoMax(maxima),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PushforwardCharacter {
    Invertible(IVec),
    IdealLike(Vec<IVec>),
    Zero,
}

pub fn pushforward_character(h: &MonoidMap, q: &[Int]) -> Result<PushforwardCharacter> {
    Ok(match infimum(h, q)? {
        InfResult::Max(d) => PushforwardCharacter::Invertible(d),
        InfResult::NoMax(a) => PushforwardCharacter::IdealLike(a),
        InfResult::NoLowerBound => PushforwardCharacter::Zero,
    })
}

/// Re-checks a Kato failure certificate: the equation holds and no
/// decomposition exists.
pub fn verify_kato_failure(h: &MonoidMap, x1: &[Int], x2: &[Int], y1: &[Int], y2: &[Int]) -> Result<bool> {
    if vadd(&h.apply(x1), y1) != vadd(&h.apply(x2), y2) {
        return Ok(false);
    }
    if !h.target.contains(y1) || !h.target.contains(y2) || !h.source.contains(x1) || !h.source.contains(x2) {
        return Ok(false);
    }
    let c = |m: &FineMonoid, v: &[Int]| m.gp_coords(v).expect("in group");
    Ok(!kato_witness(
        h,
        &c(&h.source, x1),
        &c(&h.source, x2),
        &c(&h.target, y1),
        &c(&h.target, y2),
    )?)
}

/// Re-checks a negative certificate against `h`. `None` for certificate
/// kinds without an independent check.
pub fn recheck(h: &MonoidMap, cert: &Certificate) -> Result<Option<bool>> {
    Ok(Some(match cert {
        Certificate::KernelElement(p) => {
            let q = h.apply(p);
            !crate::lattice::is_zero_vec(p)
                && h.source.contains(p)
                && h.target.contains(&q)
                && h.target.contains(&vneg(&q))
        }
        Certificate::Kernel(basis) => {
            !basis.is_empty() && basis.iter().all(|b| !crate::lattice::is_zero_vec(b) && crate::lattice::is_zero_vec(&h.apply(b)))
        }
        Certificate::MissingRay(v) => {
            h.require_fs()?;
            let (sp, sq) = dual_cones(h);
            sp.contains(v) && !sq.image(&h.gp.transpose()).contains(v)
        }
        Certificate::KatoFailure { x1, x2, y1, y2 } => verify_kato_failure(h, x1, x2, y1, y2)?,
        Certificate::FaceNotOnto { face_rays, .. } => {
            h.require_fs()?;
            let (sp, sq) = dual_cones(h);
            let tau = Cone::from_generators(h.target.rank(), face_rays);
            let img = tau.image(&h.gp.transpose());
            tau.is_face_of(&sq) && !img.is_face_of(&sp)
        }
        _ => return Ok(None),
    }))
}
