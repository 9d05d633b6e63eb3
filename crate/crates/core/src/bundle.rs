//! Combinatorial invariants of equivariant vector bundles on cones:
//! multicharacters, Klyachko filtrations, Payne's compatibility condition,
//! automorphism dimensions, infimum matrices, Weyl hulls, pullbacks of
//! σ-families and common apartments of rank-two lattices.

use crate::complex::PoGroup;
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::lattice::{dot, primitive, saturate_subgroup, vsub, IVec, Int};
use crate::linalg::{self, RVec, Rat};
use crate::monoid::FineMonoid;
use crate::morphism::{InfResult, MonoidMap};
use num_traits::{One, Signed, Zero};
use std::fmt;

/// A multiset of characters in `Z^rank`, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiCharacter {
    rank: usize,
    chars: Vec<IVec>,
}

impl MultiCharacter {
    pub fn new(rank: usize, mut chars: Vec<IVec>) -> Result<Self> {
        if chars.is_empty() {
            return Err(Error::Invalid("a multicharacter needs at least one character".into()));
        }
        if let Some(c) = chars.iter().find(|c| c.len() != rank) {
            return Err(Error::RankMismatch(format!("character has length {} not {rank}", c.len())));
        }
        chars.sort();
        Ok(MultiCharacter { rank, chars })
    }

    pub fn from_i64(rank: usize, chars: &[&[i64]]) -> Result<Self> {
        Self::new(rank, chars.iter().map(|c| crate::lattice::ivec(c)).collect())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn chars(&self) -> &[IVec] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }
}

/// A basis of `span(τ) ∩ Z^n`; for a ray, its primitive generator.
pub fn face_lattice_basis(tau: &Cone) -> Vec<IVec> {
    if tau.lineality().is_empty() && tau.rays().len() == 1 {
        return vec![primitive(&tau.rays()[0])];
    }
    saturate_subgroup(&tau.generators(), tau.ambient_rank()).basis
}

/// Pairs each character with `basis`: the image in the character group
/// of the face spanned by `basis`.
pub fn restrict_along(u: &MultiCharacter, basis: &[IVec]) -> MultiCharacter {
    let chars = u.chars.iter().map(|c| basis.iter().map(|b| dot(c, b)).collect()).collect();
    MultiCharacter::new(basis.len(), chars).expect("nonempty")
}

/// `u(τ)`: the image of `u(σ)` in `P^gp / (τ^⊥ ∩ P^gp)`, in coordinates
/// given by [`face_lattice_basis`].
pub fn restrict_multichar(u: &MultiCharacter, tau: &Cone) -> Result<MultiCharacter> {
    if tau.ambient_rank() != u.rank {
        return Err(Error::RankMismatch("face and multicharacter live in different ranks".into()));
    }
    Ok(restrict_along(u, &face_lattice_basis(tau)))
}

fn span(vectors: &[RVec], n: usize) -> Vec<RVec> {
    linalg::canonical_span(vectors, n)
}

fn coordinate_span(n: usize, idx: impl Iterator<Item = usize>) -> Vec<RVec> {
    let rows: Vec<RVec> = idx.map(|i| linalg::to_rat(&crate::lattice::unit_vec(n, i))).collect();
    span(&rows, n)
}

/// A chain `W_1 ⊂ ... ⊂ W_k = Q^dim` with weights `δ_1 > ... > δ_k`;
/// subspaces are stored as reduced row-echelon bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedFlag {
    dim: usize,
    weights: Vec<Int>,
    spaces: Vec<Vec<RVec>>,
}

impl WeightedFlag {
    pub fn new(dim: usize, weights: Vec<Int>, spaces: Vec<Vec<RVec>>) -> Result<Self> {
        if weights.len() != spaces.len() || weights.is_empty() {
            return Err(Error::Invalid("one subspace per weight, at least one".into()));
        }
        if weights.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Invalid("weights must be strictly decreasing".into()));
        }
        let spaces: Vec<Vec<RVec>> = spaces.iter().map(|s| span(s, dim)).collect();
        for k in 0..spaces.len() {
            if k > 0 {
                let meet = linalg::intersect(&spaces[k - 1], &spaces[k], dim);
                if meet.len() != spaces[k - 1].len() || spaces[k].len() <= spaces[k - 1].len() {
                    return Err(Error::Invalid("subspaces must be strictly increasing".into()));
                }
            }
        }
        if spaces.last().map(|s| s.len()) != Some(dim) {
            return Err(Error::Invalid("the last subspace must be the whole space".into()));
        }
        Ok(WeightedFlag { dim, weights, spaces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[Int] {
        &self.weights
    }

    pub fn spaces(&self) -> &[Vec<RVec>] {
        &self.spaces
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.len()).collect()
    }

    /// `span{e_j : u_j >= c}` in the split model, i.e. `W_i` for the
    /// largest `i` with `δ_i >= c`.
    pub fn space_at(&self, c: &Int) -> Vec<RVec> {
        match self.weights.iter().rposition(|w| w >= c) {
            Some(i) => self.spaces[i].clone(),
            None => Vec::new(),
        }
    }

    /// The multiset of weights, each repeated by its jump in dimension.
    pub fn multiset(&self) -> Vec<Int> {
        let mut out = Vec::new();
        let mut prev = 0;
        for (w, s) in self.weights.iter().zip(&self.spaces) {
            for _ in prev..s.len() {
                out.push(w.clone());
            }
            prev = s.len();
        }
        out
    }

    /// Replaces the subspace at position `k`.
    pub fn with_space(&self, k: usize, space: Vec<RVec>) -> Result<Self> {
        let mut spaces = self.spaces.clone();
        spaces[k] = space;
        WeightedFlag::new(self.dim, self.weights.clone(), spaces)
    }
}

/// The split flag of the ray characters `u` (aligned with the standard
/// basis): weights are the distinct values in decreasing order and
/// `W_i = span{e_j : u_j >= δ_i}`, so `dim E_δ = #{u : δ >= -u}`.
pub fn klyachko_filtration(u: &[Int]) -> WeightedFlag {
    let n = u.len();
    let mut weights: Vec<Int> = u.to_vec();
    weights.sort_by(|a, b| b.cmp(a));
    weights.dedup();
    let spaces = weights.iter().map(|w| coordinate_span(n, (0..n).filter(|&j| &u[j] >= w))).collect();
    WeightedFlag::new(n, weights, spaces).expect("split flag is valid")
}

/// A fan: rays and cones as lists of ray indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    pub dim: usize,
    pub rays: Vec<IVec>,
    pub cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayneFailure {
    pub cone: usize,
    /// `δ_ρ` for each ray of the cone, in the cone's ray order.
    pub delta: Vec<Int>,
    pub expected: usize,
    pub actual: usize,
}

/// Checks `dim ⋂_ρ W^ρ_{δ_ρ} = #{u in u(σ) : u(v_ρ) >= -δ_ρ for all ρ}` for
/// every cone and every tuple of jump values (plus a sentinel below).
pub fn payne_compatibility(fan: &Fan, flags: &[WeightedFlag], psi: &[MultiCharacter]) -> Result<Option<PayneFailure>> {
    if flags.len() != fan.rays.len() || psi.len() != fan.cones.len() {
        return Err(Error::Invalid("one flag per ray and one multicharacter per cone".into()));
    }
    let r = flags.first().map(|f| f.dim).unwrap_or(0);
    if flags.iter().any(|f| f.dim != r) || psi.iter().any(|u| u.len() != r) {
        return Err(Error::IncompatibleChern("ranks differ".into()));
    }
    for (c, rays) in fan.cones.iter().enumerate() {
        for &i in rays {
            let res = restrict_along(&psi[c], &[primitive(&fan.rays[i])]);
            let mut got: Vec<Int> = res.chars.iter().map(|v| v[0].clone()).collect();
            got.sort();
            let mut want = flags[i].multiset();
            want.sort();
            if got != want {
                return Err(Error::IncompatibleChern(format!("cone {c} restricts to {got:?} on ray {i}, flag has {want:?}")));
            }
        }
    }
    for (c, rays) in fan.cones.iter().enumerate() {
        let cands: Vec<Vec<Int>> = rays
            .iter()
            .map(|&i| {
                let mut w = flags[i].weights.clone();
                let low = w.last().expect("nonempty") - Int::one();
                w.push(low);
                w
            })
            .collect();
        let mut idx = vec![0usize; rays.len()];
        loop {
            let cs: Vec<Int> = idx.iter().zip(&cands).map(|(&k, c)| c[k].clone()).collect();
            let mut meet = coordinate_span(r, 0..r);
            for (k, &i) in rays.iter().enumerate() {
                meet = linalg::intersect(&meet, &flags[i].space_at(&cs[k]), r);
            }
            let count = psi[c]
                .chars
                .iter()
                .filter(|u| rays.iter().zip(&cs).all(|(&i, ck)| &dot(u, &primitive(&fan.rays[i])) >= ck))
                .count();
            if count != meet.len() {
                return Ok(Some(PayneFailure {
                    cone: c,
                    delta: cs.iter().map(|x| -x).collect(),
                    expected: count,
                    actual: meet.len(),
                }));
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < cands[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    Ok(None)
}

/// `#{(i, j) : λ_j - λ_i in P}` where `P` is the monoid of `σ`.
pub fn aut_dimension(sigma: &Cone, lambda: &MultiCharacter) -> usize {
    let p = sigma.dual();
    let l = &lambda.chars;
    let mut n = 0;
    for a in l {
        for b in l {
            if p.contains(&vsub(b, a)) {
                n += 1;
            }
        }
    }
    n
}

/// Dimension of the intersection over the generators `ρ` of `σ` of the
/// Lie algebras of the parabolics stabilizing the flags of the restricted
/// multicharacters, by direct linear algebra on `gl_n`.
pub fn parabolic_intersection_dimension(sigma: &Cone, lambda: &MultiCharacter) -> usize {
    let n = lambda.len();
    let mut eqs: Vec<RVec> = Vec::new();
    for v in sigma.generators() {
        let u: Vec<Int> = lambda.chars.iter().map(|c| dot(c, &v)).collect();
        let flag = klyachko_filtration(&u);
        for w in flag.spaces() {
            let ann = linalg::nullspace(w, n);
            for x in w {
                for c in &ann {
                    // c^T A x = sum_{i,j} c_i A_ij x_j
                    let mut row = vec![Rat::zero(); n * n];
                    for i in 0..n {
                        for j in 0..n {
                            row[i * n + j] = &c[i] * &x[j];
                        }
                    }
                    eqs.push(row);
                }
            }
        }
    }
    n * n - linalg::rank(&eqs, n * n)
}

/// `entries[i][j] = inf_σ(λ_j - λ_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfMatrix {
    pub entries: Vec<Vec<InfResult>>,
    pub warnings: Vec<String>,
}

pub fn inf_matrix(sigma: &PoGroup, lambda: &MultiCharacter) -> Result<InfMatrix> {
    if lambda.rank != sigma.rank() {
        return Err(Error::RankMismatch("multicharacter and cone have different ranks".into()));
    }
    let l = &lambda.chars;
    let n = l.len();
    let diffs: Vec<IVec> = l.iter().flat_map(|a| l.iter().map(move |b| vsub(b, a))).collect();
    let mut all = sigma.infima(&diffs)?.into_iter();
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            let e = all.next().expect("n^2 entries");
            if let InfResult::NoMax(ref m) = e {
                warnings.push(format!(
                    "entry ({i},{j}) has {} maximal lower bounds and no maximum: the automorphism group is not representable",
                    m.len()
                ));
            }
            row.push(e);
        }
        entries.push(row);
    }
    Ok(InfMatrix { entries, warnings })
}

/// The weakly convex cone cut out by `λ_j - λ_i >= inf_σ(λ_j - λ_i)` for
/// finite entries, over the same base.
pub fn weyl_hull(sigma: &PoGroup, lambda: &MultiCharacter) -> Result<PoGroup> {
    let m = inf_matrix(sigma, lambda)?;
    let l = &lambda.chars;
    let mut gens: Vec<IVec> = sigma.base().generators().iter().map(|p| sigma.base_map().mul_vec(p)).collect();
    for (i, row) in m.entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            match e {
                InfResult::Max(mu) => gens.push(vsub(&vsub(&l[j], &l[i]), &sigma.base_map().mul_vec(mu))),
                InfResult::NoLowerBound => {}
                InfResult::NoMax(_) => return Err(Error::InfUndefined(i, j)),
            }
        }
    }
    sigma.with_positives(Cone::from_generators(sigma.rank(), &gens))
}

/// A torsion-free σ-family: `E_γ = Σ_{γ_k <= γ} V_k` for the order of
/// `monoid` on its ambient group.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaFamily {
    pub dim: usize,
    pub monoid: FineMonoid,
    pub generators: Vec<(IVec, Vec<RVec>)>,
}

impl SigmaFamily {
    pub fn value_at(&self, g: &[Int]) -> Vec<RVec> {
        let mut rows = Vec::new();
        for (gk, v) in &self.generators {
            if self.monoid.contains(&vsub(g, gk)) {
                rows.extend(v.iter().cloned());
            }
        }
        span(&rows, self.dim)
    }
}

/// `(h^*E)_δ = colim_{h(γ) <= δ} E_γ`, generated by the `(h(γ_k), V_k)`.
pub fn pullback_filtration(h: &MonoidMap, fam: &SigmaFamily) -> Result<SigmaFamily> {
    if &fam.monoid != h.source() {
        return Err(Error::Invalid("family is not defined over the source of h".into()));
    }
    Ok(SigmaFamily {
        dim: fam.dim,
        monoid: h.target().clone(),
        generators: fam.generators.iter().map(|(g, v)| (h.apply(g), v.clone())).collect(),
    })
}

/// The split family `⊕ O(u_j)` on the cone with monoid `monoid`:
/// generators `(-u_j, Q e_j)`.
pub fn split_family(monoid: &FineMonoid, u: &MultiCharacter) -> SigmaFamily {
    let n = u.len();
    SigmaFamily {
        dim: n,
        monoid: monoid.clone(),
        generators: u
            .chars
            .iter()
            .enumerate()
            .map(|(j, c)| (crate::lattice::vneg(c), coordinate_span(n, std::iter::once(j))))
            .collect(),
    }
}

// --- rank-two lattices over a discretely valued field -----------------------

/// Polynomials over `Q`, coefficients from degree zero up, trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly(Vec<Rat>);

impl Poly {
    fn trim(mut v: Vec<Rat>) -> Poly {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        Poly(v)
    }

    fn constant(c: Rat) -> Poly {
        Poly::trim(vec![c])
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::trim((0..n).map(|i| self.0.get(i).cloned().unwrap_or_default() + o.0.get(i).cloned().unwrap_or_default()).collect())
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut v = vec![Rat::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::trim(v)
    }

    fn scale(&self, c: &Rat) -> Poly {
        Poly::trim(self.0.iter().map(|x| x * c).collect())
    }

    fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let mut r = self.clone();
        let mut q = vec![Rat::zero(); self.0.len().saturating_sub(d.0.len()) + 1];
        let lead = d.0.last().expect("nonzero divisor").clone();
        while !r.is_zero() && r.0.len() >= d.0.len() {
            let shift = r.0.len() - d.0.len();
            let c = r.0.last().unwrap() / &lead;
            q[shift] = c.clone();
            let mut sub = vec![Rat::zero(); shift];
            sub.extend(d.0.iter().map(|x| x * &c));
            r = r.add(&Poly(sub).neg());
        }
        (Poly::trim(q), r)
    }

    fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// Order of vanishing at `t = 0`.
    fn ord(&self) -> i64 {
        self.0.iter().position(|c| !c.is_zero()).expect("nonzero") as i64
    }
}

/// An element of `Q(t)` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let terms: Vec<String> = p
        .0
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| match i {
            0 => c.to_string(),
            1 => format!("{c}*t"),
            _ => format!("{c}*t^{i}"),
        })
        .collect();
    terms.join(" + ")
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.0.len() == 1 && self.den.0[0].is_one() {
            write!(f, "{}", fmt_poly(&self.num))
        } else {
            write!(f, "({})/({})", fmt_poly(&self.num), fmt_poly(&self.den))
        }
    }
}

impl Scalar {
    fn from_parts(num: Poly, den: Poly) -> Scalar {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Scalar { num, den: Poly::constant(Rat::one()) };
        }
        let g = num.gcd(&den);
        let (n, _) = num.divrem(&g);
        let (d, _) = den.divrem(&g);
        let lead = d.0.last().unwrap().clone();
        Scalar { num: n.scale(&lead.recip()), den: d.scale(&lead.recip()) }
    }

    pub fn rational(c: Rat) -> Scalar {
        Scalar::from_parts(Poly::constant(c), Poly::constant(Rat::one()))
    }

    /// `c t^k`.
    pub fn monomial(c: Rat, k: i64) -> Scalar {
        let mut v = vec![Rat::zero(); k.unsigned_abs() as usize];
        if k >= 0 {
            v.push(c);
            Scalar::from_parts(Poly::trim(v), Poly::constant(Rat::one()))
        } else {
            v.push(Rat::one());
            Scalar::from_parts(Poly::constant(c), Poly::trim(v))
        }
    }

    pub fn zero() -> Scalar {
        Scalar::rational(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        Scalar::from_parts(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn neg(&self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        Scalar::from_parts(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn inv(&self) -> Scalar {
        Scalar::from_parts(self.den.clone(), self.num.clone())
    }

    /// The constant value, when `self` has no `t`.
    pub fn as_rational(&self) -> Option<Rat> {
        (self.num.0.len() <= 1 && self.den.0.len() == 1)
            .then(|| self.num.0.first().cloned().unwrap_or_default() / &self.den.0[0])
    }
}

/// The uniformizer of the discrete valuation: a prime `p` acting on
/// rational entries, or a formal parameter `t` on `Q(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Uniformizer {
    Prime(Int),
    Formal,
}

impl Uniformizer {
    pub fn pi_pow(&self, k: i64) -> Scalar {
        match self {
            Uniformizer::Prime(p) => {
                let x = Rat::from_integer(num_traits::pow(p.clone(), k.unsigned_abs() as usize));
                Scalar::rational(if k >= 0 { x } else { x.recip() })
            }
            Uniformizer::Formal => Scalar::monomial(Rat::one(), k),
        }
    }

    /// `None` for zero.
    pub fn valuation(&self, x: &Scalar) -> Option<i64> {
        if x.is_zero() {
            return None;
        }
        Some(match self {
            Uniformizer::Prime(p) => {
                let r = x.as_rational().expect("p-adic entries are rational");
                vp(r.numer(), p) - vp(r.denom(), p)
            }
            Uniformizer::Formal => x.num.ord() - x.den.ord(),
        })
    }
}

fn vp(n: &Int, p: &Int) -> i64 {
    let mut n = n.abs();
    let mut k = 0;
    while (&n % p).is_zero() {
        n /= p;
        k += 1;
    }
    k
}

/// A 2x2 matrix; columns are lattice bases.
pub type Mat2 = [[Scalar; 2]; 2];

fn det2(m: &Mat2) -> Scalar {
    m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0]))
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn inv2(m: &Mat2) -> Option<Mat2> {
    let d = det2(m);
    if d.is_zero() {
        return None;
    }
    let di = d.inv();
    Some([
        [m[1][1].mul(&di), m[0][1].neg().mul(&di)],
        [m[1][0].neg().mul(&di), m[0][0].mul(&di)],
    ])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeChain {
    pub uniformizer: Uniformizer,
    pub lattices: Vec<Mat2>,
}

/// A basis `(e, f)` and, for each lattice, `(a, b)` with
/// `L = <π^a e, π^b f>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Apartment {
    pub basis: [[Scalar; 2]; 2],
    pub exponents: Vec<(i64, i64)>,
}

impl LatticeChain {
    fn check(&self) -> Result<()> {
        for (i, l) in self.lattices.iter().enumerate() {
            if det2(l).is_zero() {
                return Err(Error::SingularLattice(i));
            }
            if let Uniformizer::Prime(_) = self.uniformizer {
                if l.iter().flatten().any(|x| x.as_rational().is_none()) {
                    return Err(Error::Invalid("entries must be rational for a prime uniformizer".into()));
                }
            }
        }
        Ok(())
    }

    /// Elementary divisor valuations `(m, n)`, `m <= n`, of `b` relative to `a`.
    fn divisors(&self, a: &Mat2, b: &Mat2) -> (i64, i64) {
        let m = mul2(&inv2(a).expect("nonsingular"), b);
        let v = |x: &Scalar| self.uniformizer.valuation(x);
        let lo = m.iter().flatten().filter_map(v).min().expect("nonzero matrix");
        let d = v(&det2(&m)).expect("nonsingular");
        (lo, d - lo)
    }

    /// Distance between the homothety classes in the Bruhat-Tits tree.
    pub fn distance(&self, i: usize, j: usize) -> i64 {
        let (m, n) = self.divisors(&self.lattices[i], &self.lattices[j]);
        n - m
    }

    /// Re-expands every lattice in `basis`; `None` unless each one is
    /// `<π^a e, π^b f>`.
    pub fn expand_in(&self, basis: &Mat2) -> Option<Vec<(i64, i64)>> {
        let bi = inv2(basis)?;
        let v = |x: &Scalar| self.uniformizer.valuation(x);
        let mut out = Vec::new();
        for l in &self.lattices {
            let c = mul2(&bi, l);
            let a = c[0].iter().filter_map(v).min()?;
            let b = c[1].iter().filter_map(v).min()?;
            if v(&det2(&c))? != a + b {
                return None;
            }
            out.push((a, b));
        }
        Some(out)
    }
}

/// A basis `(e, f)` with `L_b = <π^m e, π^n f>` and `L_a = <e, f>`, by
/// Smith reduction over the valuation ring.
fn adapted_pair(u: &Uniformizer, a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = mul2(&inv2(a).expect("nonsingular"), b);
    // row operations accumulated in `l`, acting on the left
    let one = Scalar::rational(Rat::one());
    let mut l: Mat2 = [[one.clone(), Scalar::zero()], [Scalar::zero(), one.clone()]];
    let v = |x: &Scalar| u.valuation(x);
    let (mut bi, mut bj, mut best) = (0, 0, i64::MAX);
    for i in 0..2 {
        for j in 0..2 {
            if let Some(x) = v(&m[i][j]) {
                if x < best {
                    (bi, bj, best) = (i, j, x);
                }
            }
        }
    }
    if bi == 1 {
        m.swap(0, 1);
        l.swap(0, 1);
    }
    if bj == 1 {
        for row in m.iter_mut() {
            row.swap(0, 1);
        }
    }
    let f = m[1][0].mul(&m[0][0].inv());
    for k in 0..2 {
        m[1][k] = m[1][k].sub(&f.mul(&m[0][k]));
        l[1][k] = l[1][k].sub(&f.mul(&l[0][k]));
    }
    mul2(a, &inv2(&l).expect("unimodular"))
}

/// A basis of `K^2` diagonalizing every lattice of the chain, or `None`
/// when their classes do not lie on one path of the Bruhat-Tits tree.
pub fn common_apartment(chain: &LatticeChain) -> Result<Option<Apartment>> {
    chain.check()?;
    let n = chain.lattices.len();
    if n == 0 {
        return Err(Error::Invalid("empty lattice chain".into()));
    }
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = chain.distance(i, j);
        }
    }
    let (mut a, mut b) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if d[i][j] > d[a][b] {
                (a, b) = (i, j);
            }
        }
    }
    if (0..n).any(|c| d[a][c] + d[c][b] != d[a][b]) {
        return Ok(None);
    }
    let basis = adapted_pair(&chain.uniformizer, &chain.lattices[a], &chain.lattices[b]);
    let exponents = chain.expand_in(&basis).ok_or_else(|| Error::Invalid("basis does not re-expand".into()))?;
    Ok(Some(Apartment { basis, exponents }))
}

/// Number of distinct classes adjacent to each lattice, for reporting.
pub fn tree_degrees(chain: &LatticeChain) -> Vec<usize> {
    let n = chain.lattices.len();
    (0..n).map(|i| (0..n).filter(|&j| chain.distance(i, j) == 1).count()).collect()
}

/// Helper for callers building flags from integer row vectors.
pub fn rational_rows(rows: &[IVec]) -> Vec<RVec> {
    rows.iter().map(|r| linalg::to_rat(r)).collect()
}

/// Ray filtrations of the split model of `psi` on each ray of `fan`, for
/// the common basis indexed by the characters of the first cone containing
/// the ray.
pub fn split_flags(fan: &Fan, psi: &[MultiCharacter]) -> Vec<WeightedFlag> {
    (0..fan.rays.len())
        .map(|i| {
            let c = fan.cones.iter().position(|c| c.contains(&i)).expect("every ray lies in a cone");
            let v = primitive(&fan.rays[i]);
            let u: Vec<Int> = psi[c].chars.iter().map(|x| dot(x, &v)).collect();
            klyachko_filtration(&u)
        })
        .collect()
}
