//! Rational polyhedral cones: double description, duality, faces, images,
//! membership and Hilbert bases.

use crate::error::{Error, Result};
use crate::lattice::{
    adapted_basis, dot, is_zero_vec, primitive, saturate_subgroup, smith_normal_form, unimodular_inverse,
    vneg, vsub, zero_vec, IVec, Int, IntegerMatrix,
};
use crate::linalg::{clear_denominators, project_out, solve, to_rat, RVec, Rat};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeSet, HashSet};

/// Generators of `{x : a.x >= 0 (a in ineqs), e.x = 0 (e in eqs)}` as a
/// lineality basis and a list of extreme rays (modulo lineality).
/// Incremental Fourier–Motzkin with the combinatorial adjacency test.
pub fn hrep_to_vrep(n: usize, ineqs: &[IVec], eqs: &[IVec]) -> (Vec<IVec>, Vec<IVec>) {
    let mut constraints: Vec<IVec> = Vec::new();
    for e in eqs {
        constraints.push(e.clone());
        constraints.push(vneg(e));
    }
    constraints.extend(ineqs.iter().cloned());

    let mut lin: Vec<IVec> = (0..n).map(|i| crate::lattice::unit_vec(n, i)).collect();
    let mut rays: Vec<(IVec, BTreeSet<usize>)> = Vec::new();

    for (k, a) in constraints.iter().enumerate() {
        if is_zero_vec(a) {
            continue;
        }
        if let Some(pos) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lin.swap_remove(pos);
            let mut al0 = dot(a, &l0);
            if al0.is_negative() {
                l0 = vneg(&l0);
                al0 = -al0;
            }
            let combine = |v: &IVec| -> IVec {
                let av = dot(a, v);
                primitive(&vsub(&crate::lattice::vscale(&al0, v), &crate::lattice::vscale(&av, &l0)))
            };
            lin = lin.iter().map(combine).collect();
            for (r, tight) in rays.iter_mut() {
                *r = combine(r);
                tight.insert(k);
            }
            let all_prev: BTreeSet<usize> = (0..k).collect();
            rays.push((l0, all_prev));
            continue;
        }
        let vals: Vec<Int> = rays.iter().map(|(r, _)| dot(a, r)).collect();
        let mut next: Vec<(IVec, BTreeSet<usize>)> = Vec::new();
        for (i, (r, tight)) in rays.iter().enumerate() {
            if vals[i].is_positive() {
                next.push((r.clone(), tight.clone()));
            } else if vals[i].is_zero() {
                let mut t = tight.clone();
                t.insert(k);
                next.push((r.clone(), t));
            }
        }
        for (i, (p, tp)) in rays.iter().enumerate() {
            if !vals[i].is_positive() {
                continue;
            }
            for (j, (q, tq)) in rays.iter().enumerate() {
                if !vals[j].is_negative() {
                    continue;
                }
                let common: BTreeSet<usize> = tp.intersection(tq).cloned().collect();
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(m, (_, tm))| m != i && m != j && common.is_subset(tm));
                if blocked {
                    continue;
                }
                let v = vsub(
                    &crate::lattice::vscale(&vals[i], q),
                    &crate::lattice::vscale(&vals[j], p),
                );
                let mut t = common;
                t.insert(k);
                next.push((primitive(&v), t));
            }
        }
        rays = next;
    }
    (lin, rays.into_iter().map(|(r, _)| r).collect())
}

fn canonical(n: usize, lin: &[IVec], rays: &[IVec]) -> (Vec<IVec>, Vec<IVec>) {
    let lat = saturate_subgroup(lin, n);
    let lin_basis = lat.basis;
    let lr: Vec<RVec> = lin_basis.iter().map(|l| to_rat(l)).collect();
    let mut out: Vec<IVec> = Vec::new();
    for r in rays {
        let p = project_out(&to_rat(r), &lr);
        let (v, _) = clear_denominators(&p);
        let v = primitive(&v);
        if !is_zero_vec(&v) {
            out.push(v);
        }
    }
    out.sort();
    out.dedup();
    (lin_basis, out)
}

/// A rational polyhedral cone in `R^n`, stored in canonical form: the
/// lineality lattice in Hermite form and primitive extreme rays orthogonal
/// to it, together with the same data for the dual cone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cone {
    ambient_rank: usize,
    rays: Vec<IVec>,
    lineality: Vec<IVec>,
    facets: Vec<IVec>,
    equations: Vec<IVec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Indices into the rays of the parent cone.
    pub rays: Vec<usize>,
    pub cone: Cone,
    /// A supporting functional in the dual cone whose zero set cuts out
    /// the face.
    pub normal: IVec,
    pub dim: usize,
}

impl Cone {
    pub fn from_generators(n: usize, gens: &[IVec]) -> Cone {
        for g in gens {
            assert_eq!(g.len(), n, "generator has wrong length");
        }
        let gens: Vec<IVec> = gens.iter().filter(|g| !is_zero_vec(g)).cloned().collect();
        let (dlin, drays) = hrep_to_vrep(n, &gens, &[]);
        let (facets_lin, facets) = canonical(n, &dlin, &drays);
        let (lin, rays) = hrep_to_vrep(n, &facets, &facets_lin);
        let (lineality, rays) = canonical(n, &lin, &rays);
        Cone { ambient_rank: n, rays, lineality, facets, equations: facets_lin }
    }

    pub fn from_inequalities(n: usize, ineqs: &[IVec], eqs: &[IVec]) -> Cone {
        let (lin, rays) = hrep_to_vrep(n, ineqs, eqs);
        let mut gens = rays;
        for l in lin {
            gens.push(vneg(&l));
            gens.push(l);
        }
        Cone::from_generators(n, &gens)
    }

    pub fn zero(n: usize) -> Cone {
        Cone::from_generators(n, &[])
    }

    pub fn full(n: usize) -> Cone {
        let mut gens = Vec::new();
        for i in 0..n {
            let e = crate::lattice::unit_vec(n, i);
            gens.push(vneg(&e));
            gens.push(e);
        }
        Cone::from_generators(n, &gens)
    }

    pub fn orthant(n: usize) -> Cone {
        let gens: Vec<IVec> = (0..n).map(|i| crate::lattice::unit_vec(n, i)).collect();
        Cone::from_generators(n, &gens)
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rays(&self) -> &[IVec] {
        &self.rays
    }

    pub fn lineality(&self) -> &[IVec] {
        &self.lineality
    }

    /// Inward facet normals (primitive, inside the linear span).
    pub fn facets(&self) -> &[IVec] {
        &self.facets
    }

    /// A basis of the integer vectors orthogonal to the cone.
    pub fn equations(&self) -> &[IVec] {
        &self.equations
    }

    /// Rays together with both signs of each lineality vector.
    pub fn generators(&self) -> Vec<IVec> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(vneg(l));
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.ambient_rank - self.equations.len()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn is_linear_space(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn dual(&self) -> Cone {
        Cone {
            ambient_rank: self.ambient_rank,
            rays: self.facets.clone(),
            lineality: self.equations.clone(),
            facets: self.rays.clone(),
            equations: self.lineality.clone(),
        }
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        assert_eq!(v.len(), self.ambient_rank, "dimension mismatch");
        self.equations.iter().all(|e| dot(e, v).is_zero())
            && self.facets.iter().all(|f| !dot(f, v).is_negative())
    }

    pub fn contains_rat(&self, v: &[Rat]) -> bool {
        let z = Rat::zero();
        self.equations.iter().all(|e| crate::linalg::rdot(&to_rat(e), v).is_zero())
            && self.facets.iter().all(|f| crate::linalg::rdot(&to_rat(f), v) >= z)
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.generators().iter().all(|g| self.contains(g))
    }

    pub fn in_relative_interior(&self, v: &[Int]) -> bool {
        self.equations.iter().all(|e| dot(e, v).is_zero())
            && self.facets.iter().all(|f| dot(f, v).is_positive())
    }

    /// The sum of the rays: a lattice point in the relative interior.
    pub fn interior_point(&self) -> IVec {
        self.rays.iter().fold(zero_vec(self.ambient_rank), |acc, r| crate::lattice::vadd(&acc, r))
    }

    pub fn intersect(&self, other: &Cone) -> Cone {
        let mut ineqs = self.facets.clone();
        ineqs.extend(other.facets.iter().cloned());
        let mut eqs = self.equations.clone();
        eqs.extend(other.equations.iter().cloned());
        Cone::from_inequalities(self.ambient_rank, &ineqs, &eqs)
    }

    /// The cone generated by the images of the generators under `f`.
    pub fn image(&self, f: &IntegerMatrix) -> Cone {
        assert_eq!(f.cols(), self.ambient_rank, "map source rank differs from cone rank");
        let gens: Vec<IVec> = self.generators().iter().map(|g| f.mul_vec(g)).collect();
        Cone::from_generators(f.rows(), &gens)
    }

    /// Preimage `{x : f x in self}`.
    pub fn preimage(&self, f: &IntegerMatrix) -> Cone {
        assert_eq!(f.rows(), self.ambient_rank, "map target rank differs from cone rank");
        let ft = f.transpose();
        let ineqs: Vec<IVec> = self.facets.iter().map(|a| ft.mul_vec(a)).collect();
        let eqs: Vec<IVec> = self.equations.iter().map(|a| ft.mul_vec(a)).collect();
        Cone::from_inequalities(f.cols(), &ineqs, &eqs)
    }

    /// Indices of the rays on which the facet normal `j` vanishes.
    fn facet_incidence(&self, j: usize) -> BTreeSet<usize> {
        (0..self.rays.len()).filter(|&i| dot(&self.facets[j], &self.rays[i]).is_zero()).collect()
    }

    /// All faces, from the minimal face (the lineality space) to the cone
    /// itself, sorted by dimension and then by ray indices.
    pub fn faces(&self) -> Vec<Face> {
        let incid: Vec<BTreeSet<usize>> = (0..self.facets.len()).map(|j| self.facet_incidence(j)).collect();
        let all: BTreeSet<usize> = (0..self.rays.len()).collect();
        let mut seen: HashSet<BTreeSet<usize>> = HashSet::new();
        let mut queue = vec![all.clone()];
        seen.insert(all);
        while let Some(f) = queue.pop() {
            for z in &incid {
                let g: BTreeSet<usize> = f.intersection(z).cloned().collect();
                if seen.insert(g.clone()) {
                    queue.push(g);
                }
            }
        }
        let mut faces: Vec<Face> = seen
            .into_iter()
            .map(|s| {
                let mut gens: Vec<IVec> = s.iter().map(|&i| self.rays[i].clone()).collect();
                for l in &self.lineality {
                    gens.push(l.clone());
                    gens.push(vneg(l));
                }
                let cone = Cone::from_generators(self.ambient_rank, &gens);
                let mut normal = zero_vec(self.ambient_rank);
                for (j, z) in incid.iter().enumerate() {
                    if s.is_subset(z) {
                        normal = crate::lattice::vadd(&normal, &self.facets[j]);
                    }
                }
                let dim = cone.dim();
                Face { rays: s.into_iter().collect(), cone, normal, dim }
            })
            .collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.rays.cmp(&b.rays)));
        faces
    }

    /// The face of `self` cut out by a functional `l` that is nonnegative
    /// on the cone.
    pub fn face_of_functional(&self, l: &[Int]) -> Cone {
        let gens: Vec<IVec> = self.generators().into_iter().filter(|g| dot(l, g).is_zero()).collect();
        Cone::from_generators(self.ambient_rank, &gens)
    }

    /// The smallest face containing `v` (which must lie in the cone).
    pub fn face_containing(&self, v: &[Int]) -> Cone {
        let mut normal = zero_vec(self.ambient_rank);
        for f in &self.facets {
            if dot(f, v).is_zero() {
                normal = crate::lattice::vadd(&normal, f);
            }
        }
        self.face_of_functional(&normal)
    }

    pub fn is_face_of(&self, other: &Cone) -> bool {
        other.faces().iter().any(|f| f.cone == *self)
    }

    /// Minimal generating set of the monoid of lattice points.
    pub fn hilbert_basis(&self) -> Result<Vec<IVec>> {
        if !self.is_pointed() {
            return Err(Error::NotStrictlyConvex);
        }
        if self.rays.is_empty() {
            return Ok(Vec::new());
        }
        let n = self.ambient_rank;
        let lat = saturate_subgroup(&self.rays, n);
        let d = lat.rank();
        let coords: Vec<IVec> = self.rays.iter().map(|r| lat.coords(r).expect("ray in its span")).collect();
        let local = Cone::from_generators(d, &coords);
        let local_rays = local.rays().to_vec();
        let faces = local.faces();
        let mut simplices = Vec::new();
        let top = faces.len() - 1;
        pulling_triangulation(&faces, top, &mut Vec::new(), &mut simplices);
        let mut cand: BTreeSet<IVec> = local_rays.iter().cloned().collect();
        for s in &simplices {
            let gens: Vec<IVec> = s.iter().map(|&i| local_rays[i].clone()).collect();
            for p in parallelepiped_points(&gens)? {
                if !is_zero_vec(&p) {
                    cand.insert(p);
                }
            }
        }
        let cand: Vec<IVec> = cand.into_iter().collect();
        let mut basis = Vec::new();
        for h in &cand {
            let reducible = cand.iter().any(|g| g != h && local.contains(&vsub(h, g)));
            if !reducible {
                basis.push(lat.from_coords(h));
            }
        }
        basis.sort();
        Ok(basis)
    }

    /// Generators of the monoid of lattice points, for cones that may have
    /// lineality: a Hilbert basis of the pointed quotient lifted back, plus
    /// both signs of a lineality basis.
    pub fn lattice_point_generators(&self) -> Result<Vec<IVec>> {
        if self.is_pointed() {
            return self.hilbert_basis();
        }
        let n = self.ambient_rank;
        let k = self.lineality.len();
        let u = adapted_basis(&self.lineality, n);
        let proj = IntegerMatrix::from_rows(&(k..n).map(|i| u.row(i)).collect::<Vec<_>>(), n);
        let quot = self.image(&proj);
        let uinv = unimodular_inverse(&u);
        let mut gens = Vec::new();
        for h in quot.hilbert_basis()? {
            let mut y = zero_vec(n);
            for (i, x) in h.into_iter().enumerate() {
                y[k + i] = x;
            }
            gens.push(uinv.mul_vec(&y));
        }
        for l in &self.lineality {
            gens.push(l.clone());
            gens.push(vneg(l));
        }
        Ok(gens)
    }
}

fn pulling_triangulation(faces: &[Face], f: usize, _stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let face = &faces[f];
    if face.rays.len() == face.dim {
        if !face.rays.is_empty() {
            out.push(face.rays.clone());
        }
        return;
    }
    let r0 = face.rays[0];
    for (g, cand) in faces.iter().enumerate() {
        if cand.dim + 1 != face.dim || cand.rays.contains(&r0) {
            continue;
        }
        if !cand.rays.iter().all(|i| face.rays.contains(i)) {
            continue;
        }
        let mut sub = Vec::new();
        pulling_triangulation(faces, g, _stack, &mut sub);
        for mut s in sub {
            s.push(r0);
            s.sort();
            out.push(s);
        }
    }
}

/// Lattice points of the half-open parallelepiped spanned by linearly
/// independent vectors that span `Z^d` rationally (`gens.len() == d`).
pub fn parallelepiped_points(gens: &[IVec]) -> Result<Vec<IVec>> {
    let d = gens.len();
    let v = IntegerMatrix::from_cols(gens, d);
    let (u, dm, _) = smith_normal_form(&v);
    let uinv = unimodular_inverse(&u);
    let mut count = Int::one();
    let mut moduli = Vec::with_capacity(d);
    for i in 0..d {
        let m = dm.get(i, i).clone();
        assert!(!m.is_zero(), "generators are not independent");
        count *= &m;
        moduli.push(m);
    }
    if count > Int::one() && count > Int::from(crate::budget::current()) {
        return Err(Error::BudgetExceeded(crate::budget::current()));
    }
    let vr: Vec<RVec> = (0..d).map(|i| to_rat(&v.row(i))).collect();
    let mut out = Vec::new();
    let mut k = zero_vec(d);
    loop {
        let x = uinv.mul_vec(&k);
        let lam = solve(&vr, &to_rat(&x), d).expect("nonsingular");
        let mut p = x.clone();
        for (l, g) in lam.iter().zip(gens) {
            let fl = l.floor().to_integer();
            if !fl.is_zero() {
                p = vsub(&p, &crate::lattice::vscale(&fl, g));
            }
        }
        out.push(p);
        let mut i = 0;
        loop {
            if i == d {
                return Ok(out);
            }
            k[i] += 1;
            if k[i] < moduli[i] {
                break;
            }
            k[i] = Int::zero();
            i += 1;
        }
    }
}

/// Lattice-point count and determinant helper for simplicial cones.
pub fn simplex_index(gens: &[IVec]) -> Int {
    IntegerMatrix::from_cols(gens, gens.len()).det().abs()
}
