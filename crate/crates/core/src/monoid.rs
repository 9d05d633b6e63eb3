//! Fine monoids presented by generators inside an ambient lattice.

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::lattice::{
    is_zero_vec, vsub, zero_vec, IVec, Int, IntegerMatrix, Lattice, LatticeMap, QuotientGroup,
};
use crate::morphism::MonoidMap;
use crate::polyhedron::find_integer_solution;
use num_traits::{One, Zero};

/// A finitely generated submonoid of `Z^ambient_rank`.
#[derive(Clone, Debug)]
pub struct FineMonoid {
    ambient_rank: usize,
    generators: Vec<IVec>,
    gp: Lattice,
    cone: Cone,
    gens_gp: Vec<IVec>,
    cone_gp: Cone,
    saturated: bool,
    sharp: bool,
}

impl PartialEq for FineMonoid {
    /// Equality of submonoids of the same ambient lattice.
    fn eq(&self, other: &Self) -> bool {
        self.ambient_rank == other.ambient_rank
            && self.generators.iter().all(|g| other.contains(g))
            && other.generators.iter().all(|g| self.contains(g))
    }
}

/// An element together with an N-combination of the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoidElement {
    pub coords: IVec,
    pub witness: Vec<Int>,
}

impl FineMonoid {
    pub fn new(ambient_rank: usize, generators: Vec<IVec>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.len() != ambient_rank {
                return Err(Error::RankMismatch(format!(
                    "generator {i} has length {} but the ambient rank is {ambient_rank}",
                    g.len()
                )));
            }
        }
        let mut gens: Vec<IVec> = Vec::new();
        for g in generators {
            if !is_zero_vec(&g) && !gens.contains(&g) {
                gens.push(g);
            }
        }
        let gp = Lattice::span(&gens, ambient_rank);
        let cone = Cone::from_generators(ambient_rank, &gens);
        let gens_gp: Vec<IVec> = gens.iter().map(|g| gp.coords(g).expect("generator in its span")).collect();
        let cone_gp = Cone::from_generators(gp.rank(), &gens_gp);
        let sharp = cone_gp.is_pointed();
        let mut m = FineMonoid { ambient_rank, generators: gens, gp, cone, gens_gp, cone_gp, saturated: false, sharp };
        m.saturated = m.cone_gp.lattice_point_generators()?.iter().all(|h| m.decompose_gp(h).is_some());
        Ok(m)
    }

    /// `N^n` with the standard generators.
    pub fn free(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| crate::lattice::unit_vec(n, i)).collect()).expect("valid")
    }

    /// The monoid `N^k / (relations)` made integral, embedded in the free
    /// part of its groupification. Fails if the group has torsion.
    pub fn from_presentation(num_generators: usize, relations: &[IVec]) -> Result<Self> {
        for r in relations {
            if r.len() != num_generators {
                return Err(Error::RankMismatch("relation length differs from generator count".into()));
            }
        }
        let q = QuotientGroup::new(num_generators, relations);
        if !q.torsion().is_empty() {
            return Err(Error::HypothesisViolation("groupification has torsion".into()));
        }
        let gens = (0..num_generators).map(|i| q.reduce(&crate::lattice::unit_vec(num_generators, i)).1).collect();
        Self::new(q.free_rank(), gens)
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn generators(&self) -> &[IVec] {
        &self.generators
    }

    pub fn gp(&self) -> &Lattice {
        &self.gp
    }

    pub fn rank(&self) -> usize {
        self.gp.rank()
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    /// The cone spanned by the monoid in coordinates of `gp().basis`.
    pub fn cone_gp(&self) -> &Cone {
        &self.cone_gp
    }

    pub fn generators_gp(&self) -> &[IVec] {
        &self.gens_gp
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn is_sharp(&self) -> bool {
        self.sharp
    }

    pub fn is_fs_sharp(&self) -> bool {
        self.saturated && self.sharp
    }

    pub fn require_fs_sharp(&self, what: &str) -> Result<()> {
        if !self.saturated {
            return Err(Error::NotSaturated(what.to_string()));
        }
        if !self.sharp {
            return Err(Error::NotSharp(what.to_string()));
        }
        Ok(())
    }

    pub fn gp_coords(&self, v: &[Int]) -> Option<IVec> {
        self.gp.coords(v)
    }

    pub fn from_gp_coords(&self, c: &[Int]) -> IVec {
        self.gp.from_coords(c)
    }

    fn decompose_gp(&self, c: &[Int]) -> Option<Vec<Int>> {
        if self.saturated && !self.cone_gp.contains(c) {
            return None;
        }
        let m = self.gens_gp.len();
        let r = self.rank();
        let rows: Vec<IVec> = (0..r).map(|i| self.gens_gp.iter().map(|g| g[i].clone()).collect()).collect();
        let ineqs: Vec<(IVec, Int)> = (0..m).map(|i| (crate::lattice::unit_vec(m, i), Int::zero())).collect();
        if m == 0 {
            return is_zero_vec(c).then(Vec::new);
        }
        find_integer_solution(m, &rows, c, &ineqs).ok().flatten()
    }

    /// Coefficients expressing `v` as an N-combination of the generators.
    pub fn decompose(&self, v: &[Int]) -> Option<Vec<Int>> {
        let c = self.gp_coords(v)?;
        self.decompose_gp(&c)
    }

    pub fn element(&self, v: &[Int]) -> Option<MonoidElement> {
        self.decompose(v).map(|w| MonoidElement { coords: v.to_vec(), witness: w })
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        if v.len() != self.ambient_rank {
            return false;
        }
        let Some(c) = self.gp_coords(v) else { return false };
        if self.saturated {
            return self.cone_gp.contains(&c);
        }
        self.decompose_gp(&c).is_some()
    }

    /// `a <= b` iff `b - a` lies in the monoid.
    pub fn leq(&self, a: &[Int], b: &[Int]) -> bool {
        self.contains(&vsub(b, a))
    }

    /// Hilbert basis (ambient coordinates) of the saturation.
    pub fn hilbert_basis(&self) -> Result<Vec<IVec>> {
        let mut h: Vec<IVec> = self.cone_gp.hilbert_basis()?.iter().map(|c| self.from_gp_coords(c)).collect();
        h.sort();
        Ok(h)
    }

    /// `cone(P) ∩ P^gp`, generated by its Hilbert basis when sharp.
    /// The same monoid with generators written in group coordinates.
    pub fn in_gp_coords(&self) -> FineMonoid {
        let n = self.rank();
        FineMonoid {
            ambient_rank: n,
            generators: self.gens_gp.clone(),
            gp: Lattice::full(n),
            cone: self.cone_gp.clone(),
            gens_gp: self.gens_gp.clone(),
            cone_gp: self.cone_gp.clone(),
            saturated: self.saturated,
            sharp: self.sharp,
        }
    }

    pub fn saturation(&self) -> Result<FineMonoid> {
        let gens = self.cone_gp.lattice_point_generators()?.iter().map(|c| self.from_gp_coords(c)).collect();
        FineMonoid::new(self.ambient_rank, gens)
    }

    /// The sharpened localization `P[-S]^♯`, with the quotient map from
    /// `P^gp` (in coordinates of `gp().basis`) onto its groupification.
    pub fn localize_sharpen(&self, s: &[IVec]) -> Result<(FineMonoid, LatticeMap)> {
        let r = self.rank();
        let mut sum = zero_vec(r);
        for v in s {
            if !self.contains(v) {
                return Err(Error::HypothesisViolation("localizing set is not inside the monoid".into()));
            }
            sum = crate::lattice::vadd(&sum, &self.gp_coords(v).expect("in gp"));
        }
        let face = self.cone_gp.face_containing(&sum);
        let killed: Vec<IVec> = self.gens_gp.iter().filter(|g| face.contains(g)).cloned().collect();
        let q = QuotientGroup::new(r, &killed);
        if !q.torsion().is_empty() {
            return Err(Error::HypothesisViolation("sharpened localization has torsion".into()));
        }
        let cols: Vec<IVec> = (0..r).map(|i| q.reduce(&crate::lattice::unit_vec(r, i)).1).collect();
        let map = LatticeMap::new(IntegerMatrix::from_cols(&cols, q.free_rank()));
        let gens = self.gens_gp.iter().map(|g| map.apply(g)).collect();
        Ok((FineMonoid::new(q.free_rank(), gens)?, map))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PushoutCategory {
    Integral,
    Saturated,
}

/// The pushout of `P' <- P -> Q` inside
/// `(P'^gp ⊕ Q^gp) / {(f x, -g x)}`; groups are taken in the
/// generator-lattice coordinates of each monoid.
#[derive(Clone, Debug)]
pub struct PushoutMonoid {
    pub group: QuotientGroup,
    /// Representatives in `Z^(rank P' + rank Q)` of the generators.
    pub generators: Vec<IVec>,
    pub category: PushoutCategory,
    /// Ranks of the two summands.
    pub left_rank: usize,
    pub right_rank: usize,
}

impl PushoutMonoid {
    pub fn free_rank(&self) -> usize {
        self.group.free_rank()
    }

    pub fn torsion(&self) -> Vec<Int> {
        self.group.torsion()
    }

    /// Canonical `(torsion, free)` coordinates of the generators.
    pub fn generator_coords(&self) -> Vec<(IVec, IVec)> {
        self.generators.iter().map(|g| self.group.reduce(g)).collect()
    }

    /// The pushout as a monoid in its free lattice, when the group is
    /// torsion free.
    pub fn to_fine_monoid(&self) -> Result<FineMonoid> {
        if !self.torsion().is_empty() {
            return Err(Error::HypothesisViolation(format!(
                "pushout group has torsion {:?}",
                self.torsion().iter().map(|x| x.to_string()).collect::<Vec<_>>()
            )));
        }
        let gens = self.generators.iter().map(|g| self.group.reduce(g).1).collect();
        FineMonoid::new(self.free_rank(), gens)
    }
}

pub fn pushout(f: &MonoidMap, g: &MonoidMap, category: PushoutCategory) -> Result<PushoutMonoid> {
    if f.source() != g.source() {
        return Err(Error::HypothesisViolation("pushout legs have different sources".into()));
    }
    if category == PushoutCategory::Saturated
        && !(f.source().is_saturated() && f.target().is_saturated() && g.target().is_saturated())
    {
        return Err(Error::NotSaturated("saturated pushout needs saturated monoids".into()));
    }
    let fm = f.gp_matrix();
    let gm = g.gp_matrix();
    let (a, b) = (fm.rows(), gm.rows());
    let n = a + b;
    let relations: Vec<IVec> = (0..fm.cols())
        .map(|j| {
            let mut v = fm.col(j);
            v.extend(gm.col(j).into_iter().map(|x| -x));
            v
        })
        .collect();
    let group = QuotientGroup::new(n, &relations);
    let mut generators: Vec<IVec> = Vec::new();
    for p in f.target().generators_gp() {
        let mut v = p.clone();
        v.extend(zero_vec(b));
        generators.push(v);
    }
    for q in g.target().generators_gp() {
        let mut v = zero_vec(a);
        v.extend(q.iter().cloned());
        generators.push(v);
    }
    if category == PushoutCategory::Saturated {
        // Torsion elements and the lattice points of the free cone.
        let free: Vec<IVec> = generators.iter().map(|x| group.reduce(x).1).collect();
        let cone = Cone::from_generators(group.free_rank(), &free);
        let tors = group.torsion();
        let mut sat = Vec::new();
        for k in 0..tors.len() {
            let mut t = zero_vec(tors.len());
            t[k] = Int::one();
            sat.push(group.lift(&t, &zero_vec(group.free_rank())));
        }
        for c in cone.lattice_point_generators()? {
            sat.push(group.lift(&zero_vec(tors.len()), &c));
        }
        generators = sat;
    }
    Ok(PushoutMonoid { group, generators, category, left_rank: a, right_rank: b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;
    use num_traits::Signed;

    fn mon(n: usize, gens: &[&[i64]]) -> FineMonoid {
        FineMonoid::new(n, gens.iter().map(|g| ivec(g)).collect()).unwrap()
    }

    #[test]
    fn order_in_free_monoid() {
        let n2 = FineMonoid::free(2);
        assert!(n2.leq(&ivec(&[0, 0]), &ivec(&[2, 3])));
        assert!(!n2.leq(&ivec(&[1, 0]), &ivec(&[0, 1])));
    }

    #[test]
    fn order_in_even_slope_monoid() {
        let p = mon(2, &[&[2, 0], &[1, 1], &[0, 2]]);
        assert!(!p.leq(&ivec(&[2, 0]), &ivec(&[2, 1])));
        assert!(p.leq(&ivec(&[2, 0]), &ivec(&[3, 1])));
        assert!(p.is_saturated() && p.is_sharp());
    }

    #[test]
    fn numerical_semigroup_saturates_to_n() {
        let p = mon(1, &[&[2], &[3]]);
        assert!(!p.is_saturated());
        assert!(!p.contains(&ivec(&[1])));
        assert_eq!(p.saturation().unwrap(), FineMonoid::free(1));
    }

    #[test]
    fn saturation_adds_missing_generator() {
        let p = mon(2, &[&[1, 0], &[1, 2]]);
        assert!(p.is_saturated(), "gp is the index-2 lattice, so nothing is missing");
        let q = mon(2, &[&[2, 0], &[1, 1], &[0, 1]]);
        assert!(!q.is_saturated());
        let s = q.saturation().unwrap();
        assert!(s.contains(&ivec(&[1, 0])));
    }

    #[test]
    fn localize_free_monoid_at_a_ray() {
        let n2 = FineMonoid::free(2);
        let (p, map) = n2.localize_sharpen(&[ivec(&[1, 0])]).unwrap();
        assert_eq!(p, FineMonoid::free(1));
        assert_eq!(map.apply(&ivec(&[3, 5])).len(), 1);
        assert!(map.apply(&ivec(&[1, 0])).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn localize_at_empty_set_is_identity() {
        let p = mon(2, &[&[2, 0], &[1, 1], &[0, 2]]);
        let (q, map) = p.localize_sharpen(&[]).unwrap();
        assert_eq!(q.rank(), 2);
        assert_eq!(map.matrix.det().abs(), Int::one());
    }

    #[test]
    fn even_slope_inverting_u_gives_n() {
        let p = FineMonoid::from_presentation(3, &[ivec(&[1, -2, 1])]).unwrap();
        let u = p.generators()[0].clone();
        let (q, _) = p.localize_sharpen(&[u]).unwrap();
        assert_eq!(q, FineMonoid::free(1));
    }
}
