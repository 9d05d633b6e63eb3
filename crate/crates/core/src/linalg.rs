//! Exact rational linear algebra on row vectors.

use crate::lattice::{Int, IVec};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rat = BigRational;
pub type RVec = Vec<Rat>;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn to_rat(v: &[Int]) -> RVec {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

pub fn rdot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

/// Scales a rational vector by the lcm of its denominators, returning the
/// integer vector and the scale factor.
pub fn clear_denominators(v: &[Rat]) -> (IVec, Int) {
    let l = v.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    let out = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    (out, l)
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
pub fn rref(rows: &[RVec], ncols: usize) -> (Vec<RVec>, Vec<usize>) {
    let mut m: Vec<RVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(p, r);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[RVec], ncols: usize) -> usize {
    rref(rows, ncols).0.len()
}

/// Basis of `{x : rows . x = 0}`.
pub fn nullspace(rows: &[RVec], ncols: usize) -> Vec<RVec> {
    let (r, pivots) = rref(rows, ncols);
    let mut out = Vec::new();
    for f in 0..ncols {
        if pivots.contains(&f) {
            continue;
        }
        let mut v = vec![Rat::zero(); ncols];
        v[f] = Rat::one();
        for (row, &p) in r.iter().zip(&pivots) {
            v[p] = -row[f].clone();
        }
        out.push(v);
    }
    out
}

/// Integer basis (primitive vectors) of the rational nullspace.
pub fn int_nullspace(rows: &[IVec], ncols: usize) -> Vec<IVec> {
    let rr: Vec<RVec> = rows.iter().map(|r| to_rat(r)).collect();
    nullspace(&rr, ncols)
        .into_iter()
        .map(|v| crate::lattice::primitive(&clear_denominators(&v).0))
        .collect()
}

/// Canonical basis of a subspace: the reduced row echelon form.
pub fn canonical_span(rows: &[RVec], ncols: usize) -> Vec<RVec> {
    rref(rows, ncols).0
}

/// Intersection of two subspaces given by spanning rows.
pub fn intersect(a: &[RVec], b: &[RVec], ncols: usize) -> Vec<RVec> {
    // x in A and B  <=>  x orthogonal to (A^perp + B^perp).
    let mut perp = nullspace(a, ncols);
    perp.extend(nullspace(b, ncols));
    canonical_span(&nullspace(&perp, ncols), ncols)
}

/// A solution of `a x = b` (rows of `a` are equations), if one exists.
pub fn solve(a: &[RVec], b: &[Rat], ncols: usize) -> Option<RVec> {
    let aug: Vec<RVec> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (row, &p) in r.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Orthogonal projection of `v` onto the orthogonal complement of
/// `span(basis)`.
pub fn project_out(v: &[Rat], basis: &[RVec]) -> RVec {
    if basis.is_empty() {
        return v.to_vec();
    }
    let n = v.len();
    // Solve Gram * c = B v, then v - B^T c.
    let gram: Vec<RVec> = basis.iter().map(|bi| basis.iter().map(|bj| rdot(bi, bj)).collect()).collect();
    let rhs: RVec = basis.iter().map(|bi| rdot(bi, v)).collect();
    let c = solve(&gram, &rhs, basis.len()).expect("independent basis");
    let mut out = v.to_vec();
    for (ci, bi) in c.iter().zip(basis) {
        for k in 0..n {
            out[k] -= ci * &bi[k];
        }
    }
    out
}
