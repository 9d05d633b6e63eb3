//! Exact integer linear algebra: Hermite and Smith forms, diophantine
//! systems, saturation of subgroups and finite quotient groups.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Int = BigInt;
pub type IVec = Vec<Int>;

pub fn ivec(v: &[i64]) -> IVec {
    v.iter().map(|&x| Int::from(x)).collect()
}

pub fn zero_vec(n: usize) -> IVec {
    vec![Int::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> IVec {
    let mut v = zero_vec(n);
    v[i] = Int::one();
    v
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Int::zero(), |acc, (x, y)| acc + x * y)
}

pub fn vadd(a: &[Int], b: &[Int]) -> IVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Int], b: &[Int]) -> IVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vneg(a: &[Int]) -> IVec {
    a.iter().map(|x| -x).collect()
}

pub fn vscale(c: &Int, a: &[Int]) -> IVec {
    a.iter().map(|x| c * x).collect()
}

pub fn is_zero_vec(a: &[Int]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Gcd of the entries (zero for the zero vector).
pub fn content(a: &[Int]) -> Int {
    a.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Divides by the content. The zero vector is returned unchanged.
pub fn primitive(a: &[Int]) -> IVec {
    let g = content(a);
    if g.is_zero() || g.is_one() {
        return a.to_vec();
    }
    a.iter().map(|x| x / &g).collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", r.join(" "))?;
        }
        write!(f, "]")
    }
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::one();
        }
        m
    }

    /// Builds a matrix from its rows; `cols` is needed when `rows` is empty.
    pub fn from_rows(rows: &[IVec], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend(r.iter().cloned());
        }
        IntegerMatrix { rows: rows.len(), cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[IVec], rows: usize) -> Self {
        Self::from_rows(cols, rows).transpose()
    }

    pub fn from_i64(rows: usize, cols: usize, v: &[i64]) -> Self {
        assert_eq!(v.len(), rows * cols);
        IntegerMatrix { rows, cols, data: ivec(v) }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> IVec {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> IVec {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<IVec> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn col_vecs(&self) -> Vec<IVec> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> IVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in product");
        (0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[a] += c * row[b]
    fn add_row(&mut self, a: usize, b: usize, c: &Int) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(b, j) * c;
            self.data[a * self.cols + j] += v;
        }
    }

    /// col[a] += c * col[b]
    fn add_col(&mut self, a: usize, b: usize, c: &Int) {
        if c.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, b) * c;
            self.data[i * self.cols + a] += v;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let idx = a * self.cols + j;
            self.data[idx] = -&self.data[idx];
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut m = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if m.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !m.get(i, k).is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
            }
            prev = m.get(k, k).clone();
        }
        sign * m.get(n - 1, n - 1)
    }

    pub fn rank(&self) -> usize {
        hermite_normal_form(self).rank
    }
}

/// Row-style Hermite normal form: `h = u * m`, `u` unimodular, `h` in row
/// echelon form with positive pivots and entries above each pivot reduced
/// into `[0, pivot)`.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: IntegerMatrix,
    pub u: IntegerMatrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

pub fn hermite_normal_form(m: &IntegerMatrix) -> Hermite {
    let mut h = m.clone();
    let mut u = IntegerMatrix::identity(m.rows);
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        loop {
            let best = (r..m.rows)
                .filter(|&i| !h.get(i, c).is_zero())
                .min_by(|&a, &b| h.get(a, c).abs().cmp(&h.get(b, c).abs()));
            let Some(p) = best else { break };
            h.swap_rows(p, r);
            u.swap_rows(p, r);
            let mut done = true;
            for i in r + 1..m.rows {
                if h.get(i, c).is_zero() {
                    continue;
                }
                let q = -h.get(i, c).div_floor(h.get(r, c));
                h.add_row(i, r, &q);
                u.add_row(i, r, &q);
                if !h.get(i, c).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = -h.get(i, c).div_floor(h.get(r, c));
            h.add_row(i, r, &q);
            u.add_row(i, r, &q);
        }
        pivots.push(c);
        r += 1;
    }
    Hermite { h, u, rank: r, pivots }
}

/// Smith normal form `u * m * v = d`.
pub fn smith_normal_form(m: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix, IntegerMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntegerMatrix::identity(rows);
    let mut v = IntegerMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        'pivot: loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { return (u, d, v) };
            d.swap_rows(pi, t);
            u.swap_rows(pi, t);
            d.swap_cols(pj, t);
            v.swap_cols(pj, t);
            let mut clean = true;
            for i in t + 1..rows {
                let q = -d.get(i, t).div_floor(d.get(t, t));
                d.add_row(i, t, &q);
                u.add_row(i, t, &q);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = -d.get(t, j).div_floor(d.get(t, t));
                d.add_col(j, t, &q);
                v.add_col(j, t, &q);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            for i in t + 1..rows {
                for j in t + 1..cols {
                    if !d.get(i, j).is_multiple_of(d.get(t, t)) {
                        d.add_row(t, i, &Int::one());
                        u.add_row(t, i, &Int::one());
                        continue 'pivot;
                    }
                }
            }
            break;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    (u, d, v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diophantine {
    Solution { particular: IVec, kernel_basis: Vec<IVec> },
    NoSolution,
}

/// Integer solutions of `a x = b`. The kernel basis is in Hermite form and
/// the particular solution is reduced against it into a centred window.
pub fn solve_diophantine(a: &IntegerMatrix, b: &[Int]) -> Diophantine {
    assert_eq!(a.rows, b.len(), "right-hand side has wrong length");
    let n = a.cols;
    let hnf = hermite_normal_form(&a.transpose());
    // x = u^T y, a x = h^T y.
    let mut y = zero_vec(n);
    for (i, &p) in hnf.pivots.iter().enumerate() {
        let mut acc = b[p].clone();
        for (k, yk) in y.iter().enumerate().take(i) {
            acc -= hnf.h.get(k, p) * yk;
        }
        let piv = hnf.h.get(i, p);
        if !acc.is_multiple_of(piv) {
            return Diophantine::NoSolution;
        }
        y[i] = acc / piv;
    }
    let ut = hnf.u.transpose();
    let x = ut.mul_vec(&y);
    if a.mul_vec(&x) != b {
        return Diophantine::NoSolution;
    }
    let kernel: Vec<IVec> = (hnf.rank..n).map(|i| hnf.u.row(i)).collect();
    let kernel = hnf_basis(&kernel, n);
    let particular = reduce_centered(&x, &kernel);
    Diophantine::Solution { particular, kernel_basis: kernel }
}

/// Integer kernel `{x : a x = 0}` as a Hermite basis.
pub fn integer_kernel(a: &IntegerMatrix) -> Vec<IVec> {
    let hnf = hermite_normal_form(&a.transpose());
    let kernel: Vec<IVec> = (hnf.rank..a.cols).map(|i| hnf.u.row(i)).collect();
    hnf_basis(&kernel, a.cols)
}

/// Hermite basis (nonzero rows of the HNF) of the group spanned by `gens`.
pub fn hnf_basis(gens: &[IVec], n: usize) -> Vec<IVec> {
    if gens.is_empty() {
        return Vec::new();
    }
    let hnf = hermite_normal_form(&IntegerMatrix::from_rows(gens, n));
    (0..hnf.rank).map(|i| hnf.h.row(i)).collect()
}

/// Reduces `x` modulo a Hermite basis so that the entry at each pivot
/// column lies in `(-p/2, p/2]`.
pub fn reduce_centered(x: &[Int], basis: &[IVec]) -> IVec {
    let mut x = x.to_vec();
    for b in basis {
        let Some(p) = b.iter().position(|e| !e.is_zero()) else { continue };
        let piv = &b[p];
        let (mut q, r) = x[p].div_mod_floor(piv);
        if &(Int::from(2) * &r) > piv {
            q += 1;
        }
        if !q.is_zero() {
            x = vsub(&x, &vscale(&q, b));
        }
    }
    x
}

/// Reduces `x` modulo a Hermite basis into `[0, pivot)` at each pivot.
pub fn reduce_nonneg(x: &[Int], basis: &[IVec]) -> IVec {
    let mut x = x.to_vec();
    for b in basis {
        let Some(p) = b.iter().position(|e| !e.is_zero()) else { continue };
        let q = x[p].div_floor(&b[p]);
        if !q.is_zero() {
            x = vsub(&x, &vscale(&q, b));
        }
    }
    x
}

/// A subgroup of `Z^ambient_rank`, stored by its Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    pub ambient_rank: usize,
    pub basis: Vec<IVec>,
}

impl Lattice {
    pub fn span(gens: &[IVec], ambient_rank: usize) -> Self {
        Lattice { ambient_rank, basis: hnf_basis(gens, ambient_rank) }
    }

    pub fn full(n: usize) -> Self {
        Lattice { ambient_rank: n, basis: (0..n).map(|i| unit_vec(n, i)).collect() }
    }

    pub fn zero(n: usize) -> Self {
        Lattice { ambient_rank: n, basis: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_matrix(&self) -> IntegerMatrix {
        IntegerMatrix::from_cols(&self.basis, self.ambient_rank)
    }

    /// Coordinates of `v` in the stored basis, if `v` lies in the lattice.
    pub fn coords(&self, v: &[Int]) -> Option<IVec> {
        if self.basis.is_empty() {
            return is_zero_vec(v).then(Vec::new);
        }
        match solve_diophantine(&self.basis_matrix(), v) {
            Diophantine::Solution { particular, .. } => Some(particular),
            Diophantine::NoSolution => None,
        }
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        reduce_nonneg(v, &self.basis).iter().all(|x| x.is_zero())
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn is_saturated(&self) -> bool {
        saturate_subgroup(&self.basis, self.ambient_rank) == *self
    }

    /// Index in the saturation.
    pub fn index_in_saturation(&self) -> Int {
        let (_, d, _) = smith_normal_form(&self.basis_matrix());
        (0..self.rank()).fold(Int::one(), |acc, i| acc * d.get(i, i))
    }

    pub fn from_coords(&self, c: &[Int]) -> IVec {
        let mut out = zero_vec(self.ambient_rank);
        for (ci, b) in c.iter().zip(&self.basis) {
            out = vadd(&out, &vscale(ci, b));
        }
        out
    }
}

/// `{v : n v in span_Z(gens) for some n >= 1}`.
pub fn saturate_subgroup(gens: &[IVec], ambient_rank: usize) -> Lattice {
    if gens.is_empty() {
        return Lattice::zero(ambient_rank);
    }
    let orth = integer_kernel(&IntegerMatrix::from_rows(gens, ambient_rank));
    if orth.is_empty() {
        return Lattice::full(ambient_rank);
    }
    let sat = integer_kernel(&IntegerMatrix::from_rows(&orth, ambient_rank));
    Lattice { ambient_rank, basis: sat }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeMap {
    pub matrix: IntegerMatrix,
    pub source_rank: usize,
    pub target_rank: usize,
}

impl LatticeMap {
    pub fn new(matrix: IntegerMatrix) -> Self {
        LatticeMap { source_rank: matrix.cols(), target_rank: matrix.rows(), matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(IntegerMatrix::identity(n))
    }

    pub fn apply(&self, v: &[Int]) -> IVec {
        self.matrix.mul_vec(v)
    }

    pub fn compose(&self, first: &LatticeMap) -> LatticeMap {
        LatticeMap::new(self.matrix.mul(&first.matrix))
    }

    pub fn transpose(&self) -> LatticeMap {
        LatticeMap::new(self.matrix.transpose())
    }

    pub fn kernel(&self) -> Lattice {
        Lattice { ambient_rank: self.source_rank, basis: integer_kernel(&self.matrix) }
    }

    pub fn image(&self) -> Lattice {
        Lattice::span(&self.matrix.col_vecs(), self.target_rank)
    }

    pub fn is_injective(&self) -> bool {
        self.matrix.rank() == self.source_rank
    }
}

/// The finitely generated group `Z^n / span(relations)`, with coordinates
/// read off a Smith form: torsion coordinates modulo the invariant factors
/// greater than one, then free coordinates.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    pub n: usize,
    u: IntegerMatrix,
    rel_rank: usize,
    invariants: Vec<Int>,
    first_torsion: usize,
}

impl QuotientGroup {
    pub fn new(n: usize, relations: &[IVec]) -> Self {
        if relations.is_empty() {
            return QuotientGroup {
                n,
                u: IntegerMatrix::identity(n),
                rel_rank: 0,
                invariants: Vec::new(),
                first_torsion: 0,
            };
        }
        let (u, d, _) = smith_normal_form(&IntegerMatrix::from_cols(relations, n));
        let mut invariants = Vec::new();
        let mut rank = 0;
        for i in 0..n.min(relations.len()) {
            if d.get(i, i).is_zero() {
                break;
            }
            invariants.push(d.get(i, i).clone());
            rank += 1;
        }
        let first_torsion = invariants.iter().take_while(|x| x.is_one()).count();
        QuotientGroup { n, u, rel_rank: rank, invariants, first_torsion }
    }

    pub fn free_rank(&self) -> usize {
        self.n - self.rel_rank
    }

    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<Int> {
        self.invariants[self.first_torsion..].to_vec()
    }

    /// Canonical coordinates `(torsion residues, free part)`.
    pub fn reduce(&self, v: &[Int]) -> (IVec, IVec) {
        let y = self.u.mul_vec(v);
        let tors = (self.first_torsion..self.rel_rank)
            .map(|i| y[i].mod_floor(&self.invariants[i]))
            .collect();
        let free = y[self.rel_rank..].to_vec();
        (tors, free)
    }

    pub fn is_zero(&self, v: &[Int]) -> bool {
        let (t, f) = self.reduce(v);
        is_zero_vec(&t) && is_zero_vec(&f)
    }

    /// A representative in `Z^n` of the element with the given coordinates.
    pub fn lift(&self, torsion: &[Int], free: &[Int]) -> IVec {
        let mut y = zero_vec(self.n);
        for (k, t) in torsion.iter().enumerate() {
            y[self.first_torsion + k] = t.clone();
        }
        for (k, f) in free.iter().enumerate() {
            y[self.rel_rank + k] = f.clone();
        }
        let uinv = unimodular_inverse(&self.u);
        uinv.mul_vec(&y)
    }
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(u: &IntegerMatrix) -> IntegerMatrix {
    let n = u.rows();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        match solve_diophantine(u, &unit_vec(n, i)) {
            Diophantine::Solution { particular, .. } => cols.push(particular),
            Diophantine::NoSolution => panic!("matrix is not unimodular"),
        }
    }
    IntegerMatrix::from_cols(&cols, n)
}

/// For a saturated sublattice `k`, a unimodular `u` such that `u` maps `k`
/// onto the span of the first `rank(k)` unit vectors. The last rows of `u`
/// give the projection onto the quotient.
pub fn adapted_basis(k: &[IVec], n: usize) -> IntegerMatrix {
    if k.is_empty() {
        return IntegerMatrix::identity(n);
    }
    let (u, d, _) = smith_normal_form(&IntegerMatrix::from_cols(k, n));
    for i in 0..k.len().min(n) {
        debug_assert!(d.get(i, i).is_zero() || d.get(i, i).is_one(), "sublattice is not saturated");
    }
    u
}
