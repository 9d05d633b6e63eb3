//! Rational polyhedra `{x : a.x >= b}` and bounded lattice-point searches
//! over them.

use crate::budget;
use crate::cone::hrep_to_vrep;
use crate::error::{Error, Result};
use crate::lattice::{dot, is_zero_vec, solve_diophantine, Diophantine, IVec, Int, IntegerMatrix};
use crate::linalg::{RVec, Rat};
use num_traits::{One, Signed};

#[derive(Clone, Debug)]
pub struct Polyhedron {
    dim: usize,
    ineqs: Vec<(IVec, Int)>,
}

/// `conv(points) + cone(rays) + span(lineality)`.
#[derive(Clone, Debug)]
pub struct VRep {
    pub points: Vec<RVec>,
    pub rays: Vec<IVec>,
    pub lineality: Vec<IVec>,
}

impl Polyhedron {
    pub fn new(dim: usize) -> Self {
        Polyhedron { dim, ineqs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `a.x >= b`.
    pub fn add_ineq(&mut self, a: IVec, b: Int) {
        assert_eq!(a.len(), self.dim, "inequality has wrong length");
        self.ineqs.push((a, b));
    }

    /// Adds `a.x = b`.
    pub fn add_eq(&mut self, a: IVec, b: Int) {
        let na = a.iter().map(|x| -x).collect();
        self.ineqs.push((a, b.clone()));
        self.ineqs.push((na, -b));
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        self.ineqs.iter().all(|(a, b)| &dot(a, x) >= b)
    }

    pub fn vrep(&self) -> VRep {
        let n = self.dim;
        let mut rows: Vec<IVec> = self
            .ineqs
            .iter()
            .map(|(a, b)| {
                let mut r = a.clone();
                r.push(-b);
                r
            })
            .collect();
        rows.push(crate::lattice::unit_vec(n + 1, n));
        let (lin, rays) = hrep_to_vrep(n + 1, &rows, &[]);
        let mut points = Vec::new();
        let mut rec = Vec::new();
        for r in rays {
            let t = r[n].clone();
            if t.is_positive() {
                let tr = Rat::from_integer(t);
                points.push(r[..n].iter().map(|x| Rat::from_integer(x.clone()) / &tr).collect());
            } else {
                rec.push(r[..n].to_vec());
            }
        }
        let lineality = lin.into_iter().map(|l| l[..n].to_vec()).collect();
        VRep { points, rays: rec, lineality }
    }

    pub fn is_empty(&self) -> bool {
        self.vrep().points.is_empty()
    }

    /// Integer box containing `conv(points) + sum [lo_i, hi_i] * v_i`.
    fn bounding_box(points: &[RVec], shifts: &[(IVec, i64, i64)], n: usize) -> Vec<(Int, Int)> {
        (0..n)
            .map(|k| {
                let mut lo = points.iter().map(|p| p[k].clone()).min().unwrap();
                let mut hi = points.iter().map(|p| p[k].clone()).max().unwrap();
                for (v, a, b) in shifts {
                    let x = Rat::from_integer(v[k].clone());
                    let (ea, eb) = (&x * Rat::from_integer(Int::from(*a)), &x * Rat::from_integer(Int::from(*b)));
                    lo += ea.clone().min(eb.clone());
                    hi += ea.max(eb);
                }
                (lo.ceil().to_integer(), hi.floor().to_integer())
            })
            .collect()
    }

    /// Lattice points of a box, in lexicographic order, filtered by `keep`.
    fn scan_box(bx: &[(Int, Int)], mut keep: impl FnMut(&IVec) -> bool, first_only: bool) -> Result<Vec<IVec>> {
        let mut volume = Int::one();
        for (lo, hi) in bx {
            if hi < lo {
                return Ok(Vec::new());
            }
            volume *= hi - lo + 1;
        }
        let limit = budget::current();
        if volume > Int::from(limit) {
            return Err(Error::BudgetExceeded(limit));
        }
        let n = bx.len();
        let mut out = Vec::new();
        let mut x: IVec = bx.iter().map(|(lo, _)| lo.clone()).collect();
        loop {
            if keep(&x) {
                out.push(x.clone());
                if first_only {
                    return Ok(out);
                }
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                x[i] += 1;
                if x[i] <= bx[i].1 {
                    break;
                }
                x[i] = bx[i].0.clone();
            }
        }
    }

    /// All lattice points; the polyhedron must be bounded.
    pub fn lattice_points(&self) -> Result<Vec<IVec>> {
        let v = self.vrep();
        if v.points.is_empty() {
            return Ok(Vec::new());
        }
        if !v.rays.is_empty() || !v.lineality.is_empty() {
            return Err(Error::HypothesisViolation("polyhedron is unbounded".into()));
        }
        if self.dim == 0 {
            return Ok(vec![Vec::new()]);
        }
        let bx = Self::bounding_box(&v.points, &[], self.dim);
        Self::scan_box(&bx, |x| self.contains(x), false)
    }

    /// Some lattice point, or `None` when there is none.
    pub fn find_lattice_point(&self) -> Result<Option<IVec>> {
        let v = self.vrep();
        if v.points.is_empty() {
            return Ok(None);
        }
        if self.dim == 0 {
            return Ok(Some(Vec::new()));
        }
        let mut shifts: Vec<(IVec, i64, i64)> = v.rays.iter().map(|r| (r.clone(), 0, 1)).collect();
        shifts.extend(v.lineality.iter().map(|l| (l.clone(), 0, 1)));
        let bx = Self::bounding_box(&v.points, &shifts, self.dim);
        Ok(Self::scan_box(&bx, |x| self.contains(x), true)?.into_iter().next())
    }

    /// Lattice points `x` with `x + g` outside the polyhedron for every
    /// `g` in `up`. The recession cone must lie in `-cone(up)` and `up` must
    /// contain the primitive generators of the extreme rays of `cone(up)`.
    pub fn maximal_lattice_points(&self, up: &[IVec]) -> Result<Vec<IVec>> {
        let v = self.vrep();
        if v.points.is_empty() {
            return Ok(Vec::new());
        }
        if !v.lineality.is_empty() {
            return Err(Error::HypothesisViolation("polyhedron has lineality".into()));
        }
        if self.dim == 0 {
            return Ok(vec![Vec::new()]);
        }
        let shifts: Vec<(IVec, i64, i64)> = up.iter().map(|g| (g.clone(), -1, 0)).collect();
        let bx = Self::bounding_box(&v.points, &shifts, self.dim);
        Self::scan_box(
            &bx,
            |x| {
                self.contains(x)
                    && up.iter().all(|g| !self.contains(&crate::lattice::vadd(x, g)))
            },
            false,
        )
    }
}

/// Finds an integer `x` with `eq_mat x = eq_rhs` and `a.x >= b` for all
/// `(a, b)` in `ineqs`, by parametrizing the affine lattice of solutions.
pub fn find_integer_solution(
    n: usize,
    eq_mat: &[IVec],
    eq_rhs: &[Int],
    ineqs: &[(IVec, Int)],
) -> Result<Option<IVec>> {
    let (x0, kernel) = if eq_mat.is_empty() {
        (crate::lattice::zero_vec(n), (0..n).map(|i| crate::lattice::unit_vec(n, i)).collect())
    } else {
        match solve_diophantine(&IntegerMatrix::from_rows(eq_mat, n), eq_rhs) {
            Diophantine::NoSolution => return Ok(None),
            Diophantine::Solution { particular, kernel_basis } => (particular, kernel_basis),
        }
    };
    let k = kernel.len();
    let kmat = IntegerMatrix::from_cols(&kernel, n);
    let mut poly = Polyhedron::new(k);
    for (a, b) in ineqs {
        let ak = kmat.transpose().mul_vec(a);
        let rhs = b - dot(a, &x0);
        if is_zero_vec(&ak) {
            if rhs.is_positive() {
                return Ok(None);
            }
            continue;
        }
        poly.add_ineq(ak, rhs);
    }
    if k == 0 {
        return Ok(Some(x0));
    }
    Ok(poly.find_lattice_point()?.map(|y| crate::lattice::vadd(&x0, &kmat.mul_vec(&y))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;
    use num_traits::Zero;

    #[test]
    fn triangle_lattice_points() {
        // x >= 0, y >= 0, x + y <= 2
        let mut p = Polyhedron::new(2);
        p.add_ineq(ivec(&[1, 0]), Int::zero());
        p.add_ineq(ivec(&[0, 1]), Int::zero());
        p.add_ineq(ivec(&[-1, -1]), Int::from(-2));
        assert_eq!(p.lattice_points().unwrap().len(), 6);
    }

    #[test]
    fn thin_strip_has_no_lattice_point() {
        // 1 <= 3x <= 2 has no integer solution but is nonempty.
        let mut p = Polyhedron::new(2);
        p.add_ineq(ivec(&[3, 0]), Int::from(1));
        p.add_ineq(ivec(&[-3, 0]), Int::from(-2));
        p.add_ineq(ivec(&[0, 1]), Int::zero());
        assert!(!p.is_empty());
        assert_eq!(p.find_lattice_point().unwrap(), None);
    }

    #[test]
    fn maximal_points_below_a_corner() {
        // {x <= (1,1)} in Z^2 with up = e1, e2 has the single maximum (1,1).
        let mut p = Polyhedron::new(2);
        p.add_ineq(ivec(&[-1, 0]), Int::from(-1));
        p.add_ineq(ivec(&[0, -1]), Int::from(-1));
        let m = p.maximal_lattice_points(&[ivec(&[1, 0]), ivec(&[0, 1])]).unwrap();
        assert_eq!(m, vec![ivec(&[1, 1])]);
    }

    #[test]
    fn integer_solution_with_equation() {
        // 2x + 3y = 7, x >= 0, y >= 0 -> (2,1)
        let s = find_integer_solution(
            2,
            &[ivec(&[2, 3])],
            &[Int::from(7)],
            &[(ivec(&[1, 0]), Int::zero()), (ivec(&[0, 1]), Int::zero())],
        )
        .unwrap()
        .unwrap();
        assert_eq!(s, ivec(&[2, 1]));
    }
}
