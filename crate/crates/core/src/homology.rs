//! Integer matrices, Smith normal form, and cohomology of finite complexes.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graded::{Basis, Element, MultilinearOp};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, x.clone().into());
            }
        }
        m
    }

    pub fn from_columns(rows: usize, cols: &[Vec<BigInt>]) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: &BigInt) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.combine(other, -1)
    }

    fn combine(&self, other: &Matrix, sign: i32) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            if sign > 0 {
                *a += b;
            } else {
                *a -= b;
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Matrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = -&*a;
        }
        out
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        let mut out = Matrix::zeros(r1 - r0, c1 - c0);
        for r in r0..r1 {
            for c in c0..c1 {
                out.set(r - r0, c - c0, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows + c.rows, a.cols + b.cols);
        for (m, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for r in 0..m.rows {
                for col in 0..m.cols {
                    out.set(r0 + r, c0 + col, m.get(r, col).clone());
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self.data[src * self.cols + c] * k;
            if !v.is_zero() {
                self.data[dst * self.cols + c] += v;
            }
        }
    }

    /// col[dst] += k * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = &self.data[r * self.cols + src] * k;
            if !v.is_zero() {
                self.data[r * self.cols + dst] += v;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -&self.data[r * self.cols + c];
            self.data[r * self.cols + c] = v;
        }
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&r| !a.get(r, k).is_zero()) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        Ok(sign * a.get(n - 1, n - 1))
    }

    pub fn rank(&self) -> usize {
        smith_normal_form(self).rank()
    }
}

/// `u * m * v = d` with `u`, `v` unimodular and `d` diagonal with a
/// divisibility chain of nonnegative entries.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: Matrix,
    pub d: Matrix,
    pub v: Matrix,
    pub u_inv: Matrix,
    pub v_inv: Matrix,
}

impl Snf {
    pub fn rank(&self) -> usize {
        (0..self.d.rows.min(self.d.cols))
            .take_while(|&i| !self.d.get(i, i).is_zero())
            .count()
    }

    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank()).map(|i| self.d.get(i, i).clone()).collect()
    }
}

/// Smallest-absolute-value pivoting; exact over arbitrary-precision integers.
pub fn smith_normal_form(m: &Matrix) -> Snf {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = Matrix::identity(rows);
    let mut u_inv = Matrix::identity(rows);
    let mut v = Matrix::identity(cols);
    let mut v_inv = Matrix::identity(cols);

    // Row op on a is mirrored on u; its inverse acts on columns of u_inv.
    macro_rules! row_axpy {
        ($dst:expr, $src:expr, $k:expr) => {{
            let k: &BigInt = $k;
            a.row_axpy($dst, $src, k);
            u.row_axpy($dst, $src, k);
            u_inv.col_axpy($src, $dst, &-k);
        }};
    }
    macro_rules! col_axpy {
        ($dst:expr, $src:expr, $k:expr) => {{
            let k: &BigInt = $k;
            a.col_axpy($dst, $src, k);
            v.col_axpy($dst, $src, k);
            v_inv.row_axpy($src, $dst, &-k);
        }};
    }

    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the remaining block.
        let mut best: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                let x = a.get(r, c);
                if !x.is_zero() && best.is_none_or(|(br, bc)| x.abs() < a.get(br, bc).abs()) {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        a.swap_rows(t, pr);
        u.swap_rows(t, pr);
        u_inv.swap_cols(t, pr);
        a.swap_cols(t, pc);
        v.swap_cols(t, pc);
        v_inv.swap_rows(t, pc);

        loop {
            let mut dirty = false;
            for r in t + 1..rows {
                if a.get(r, t).is_zero() {
                    continue;
                }
                let q = a.get(r, t).div_floor(a.get(t, t));
                row_axpy!(r, t, &-q);
                if !a.get(r, t).is_zero() {
                    dirty = true;
                }
            }
            for c in t + 1..cols {
                if a.get(t, c).is_zero() {
                    continue;
                }
                let q = a.get(t, c).div_floor(a.get(t, t));
                col_axpy!(c, t, &-q);
                if !a.get(t, c).is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // Pivot must divide the rest for the divisibility chain.
                let p = a.get(t, t).clone();
                let bad = (t + 1..rows).find(|&r| (t + 1..cols).any(|c| !a.get(r, c).is_multiple_of(&p)));
                match bad {
                    Some(r) => {
                        row_axpy!(t, r, &BigInt::one());
                        continue;
                    }
                    None => break,
                }
            }
            // Bring the new smallest entry of row t / column t to the pivot.
            let mut best = (t, t);
            for r in t..rows {
                let x = a.get(r, t);
                if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                    best = (r, t);
                }
            }
            for c in t..cols {
                let x = a.get(t, c);
                if !x.is_zero() && x.abs() < a.get(best.0, best.1).abs() {
                    best = (t, c);
                }
            }
            if best.0 != t {
                a.swap_rows(t, best.0);
                u.swap_rows(t, best.0);
                u_inv.swap_cols(t, best.0);
            }
            if best.1 != t {
                a.swap_cols(t, best.1);
                v.swap_cols(t, best.1);
                v_inv.swap_rows(t, best.1);
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
            for r in 0..rows {
                let x = -u_inv.get(r, t);
                u_inv.set(r, t, x);
            }
        }
        t += 1;
    }
    Snf {
        u,
        d: a,
        v,
        u_inv,
        v_inv,
    }
}

/// Integer solution of `m x = b`, if one exists.
pub fn solve(m: &Matrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let snf = smith_normal_form(m);
    let ub = snf.u.apply(b);
    let r = snf.rank();
    let mut y = vec![BigInt::zero(); m.cols];
    for (i, x) in ub.iter().enumerate() {
        if i < r {
            let (q, rem) = x.div_rem(snf.d.get(i, i));
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !x.is_zero() {
            return None;
        }
    }
    Some(snf.v.apply(&y))
}

/// Finite cochain complex: `diff[n]` maps degree `n` to degree `n + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteComplex {
    pub dims: BTreeMap<i64, usize>,
    pub diff: BTreeMap<i64, Matrix>,
    /// Optional generator names per degree, for reports.
    pub names: BTreeMap<i64, Vec<String>>,
}

impl FiniteComplex {
    pub fn new(dims: BTreeMap<i64, usize>) -> Self {
        FiniteComplex {
            dims,
            diff: BTreeMap::new(),
            names: BTreeMap::new(),
        }
    }

    pub fn dim(&self, n: i64) -> usize {
        self.dims.get(&n).copied().unwrap_or(0)
    }

    pub fn set_diff(&mut self, n: i64, m: Matrix) -> Result<()> {
        if m.rows != self.dim(n + 1) || m.cols != self.dim(n) {
            return Err(Error::Shape(format!(
                "d^{n} is {}x{}, pieces are {} -> {}",
                m.rows,
                m.cols,
                self.dim(n),
                self.dim(n + 1)
            )));
        }
        self.diff.insert(n, m);
        Ok(())
    }

    /// `d^n`, zero when absent.
    pub fn d(&self, n: i64) -> Matrix {
        self.diff
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dim(n + 1), self.dim(n)))
    }

    pub fn degree_range(&self) -> Option<(i64, i64)> {
        let lo = self.dims.iter().find(|(_, &d)| d > 0)?.0;
        let hi = self.dims.iter().rev().find(|(_, &d)| d > 0)?.0;
        Some((*lo, *hi))
    }

    /// Complex underlying a basis with a degree-one arity-one operation.
    pub fn from_op(basis: &Basis, d: &MultilinearOp) -> Result<Self> {
        if d.arity != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                found: d.arity,
            });
        }
        let mut dims = BTreeMap::new();
        let mut names: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        for g in basis.generators() {
            *dims.entry(g.degree).or_insert(0) += 1;
            names.entry(g.degree).or_default().push(g.name.clone());
        }
        let mut c = FiniteComplex::new(dims);
        c.names = names;
        for deg in basis.degrees() {
            let src = basis.of_degree(deg);
            let tgt = basis.of_degree(deg + d.degree);
            let m = op_matrix(d, &src, &tgt);
            if d.degree != 1 && !m.is_zero() {
                return Err(Error::Shape("differential must have degree 1".into()));
            }
            if d.degree == 1 && !tgt.is_empty() {
                c.set_diff(deg, m)?;
            }
        }
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        for &n in self.dims.keys() {
            if !self.d(n + 1).mul(&self.d(n))?.is_zero() {
                return Err(Error::NotAComplex(n));
            }
        }
        Ok(())
    }

    fn degrees_with_neighbours(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.dims.keys().copied().collect();
        v.sort_unstable();
        v
    }
}

/// Matrix of an arity-one operation from `src` generators to `tgt` generators.
pub fn op_matrix(op: &MultilinearOp, src: &[usize], tgt: &[usize]) -> Matrix {
    let mut m = Matrix::zeros(tgt.len(), src.len());
    for (j, &s) in src.iter().enumerate() {
        let out = op.on_gens(&[s]);
        for (i, &t) in tgt.iter().enumerate() {
            let c = out.coeff(t);
            if !c.is_zero() {
                m.set(i, j, c);
            }
        }
    }
    m
}

/// Matrix of an arbitrary linear function on generators.
pub fn linear_matrix(src: &[usize], tgt: &[usize], f: impl Fn(usize) -> Element) -> Matrix {
    let mut m = Matrix::zeros(tgt.len(), src.len());
    for (j, &s) in src.iter().enumerate() {
        let out = f(s);
        for (i, &t) in tgt.iter().enumerate() {
            let c = out.coeff(t);
            if !c.is_zero() {
                m.set(i, j, c);
            }
        }
    }
    m
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeHomology {
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomologySummary {
    pub degrees: BTreeMap<i64, DegreeHomology>,
}

impl HomologySummary {
    pub fn is_zero(&self) -> bool {
        self.degrees.values().all(|h| h.betti == 0 && h.torsion.is_empty())
    }

    pub fn is_free(&self) -> bool {
        self.degrees.values().all(|h| h.torsion.is_empty())
    }

    pub fn betti(&self, n: i64) -> usize {
        self.degrees.get(&n).map_or(0, |h| h.betti)
    }

    /// One line per degree: `deg b=<betti> tors=[..]`.
    pub fn report_lines(&self) -> Vec<String> {
        self.degrees
            .iter()
            .map(|(n, h)| {
                let t: Vec<String> = h.torsion.iter().map(|x| x.to_string()).collect();
                format!("{n} b={} tors=[{}]", h.betti, t.join(","))
            })
            .collect()
    }
}

pub fn cohomology(c: &FiniteComplex) -> Result<HomologySummary> {
    c.check()?;
    let mut out = HomologySummary::default();
    for n in c.degrees_with_neighbours() {
        let rank_out = c.d(n).rank();
        let incoming = smith_normal_form(&c.d(n - 1));
        let rank_in = incoming.rank();
        let betti = c.dim(n) - rank_out - rank_in;
        let torsion = incoming
            .invariant_factors()
            .into_iter()
            .filter(|x| !x.is_one())
            .collect();
        out.degrees.insert(n, DegreeHomology { betti, torsion });
    }
    Ok(out)
}

/// Free part of `H^n` with chosen cycle representatives and the projection
/// from cycles onto homology coordinates.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    /// Column `j` is a cycle representing the `j`-th basis class.
    pub reps: Matrix,
    /// Applied to a cycle, gives its class; meaningless on non-cycles.
    pub proj: Matrix,
    pub torsion: Vec<BigInt>,
}

impl HomologyBasis {
    pub fn rank(&self) -> usize {
        self.reps.cols
    }
}

pub fn homology_basis(c: &FiniteComplex, n: i64) -> HomologyBasis {
    let dim = c.dim(n);
    let out = smith_normal_form(&c.d(n));
    let r = out.rank();
    let k = dim - r;
    // Cycle lattice basis: last k columns of v; coordinates via v_inv rows.
    let kernel = out.v.block(0, dim, r, dim);
    let to_z = out.v_inv.block(r, dim, 0, dim);
    let bz = to_z.mul(&c.d(n - 1)).expect("shapes agree");
    let s = smith_normal_form(&bz);
    let rb = s.rank();
    let torsion = s.invariant_factors().into_iter().filter(|x| !x.is_one()).collect();
    // New cycle basis kernel * u_inv; boundaries span the first rb directions.
    let new_basis = kernel.mul(&s.u_inv).expect("shapes agree");
    let reps = new_basis.block(0, dim, rb, k);
    let proj = s.u.mul(&to_z).expect("shapes agree").block(rb, k, 0, dim);
    HomologyBasis { reps, proj, torsion }
}

/// Degree-zero chain map given per degree by `maps[n]: C^n -> D^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    pub source: FiniteComplex,
    pub target: FiniteComplex,
    pub maps: BTreeMap<i64, Matrix>,
}

impl ChainMap {
    pub fn new(source: FiniteComplex, target: FiniteComplex) -> Self {
        ChainMap {
            source,
            target,
            maps: BTreeMap::new(),
        }
    }

    pub fn map(&self, n: i64) -> Matrix {
        self.maps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.target.dim(n), self.source.dim(n)))
    }

    pub fn identity(c: &FiniteComplex) -> Self {
        let mut f = ChainMap::new(c.clone(), c.clone());
        for (&n, &d) in &c.dims {
            f.maps.insert(n, Matrix::identity(d));
        }
        f
    }

    fn all_degrees(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self
            .source
            .dims
            .keys()
            .chain(self.target.dims.keys())
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn check(&self) -> Result<()> {
        for n in self.all_degrees() {
            let lhs = self.target.d(n).mul(&self.map(n))?;
            let rhs = self.map(n + 1).mul(&self.source.d(n))?;
            if lhs != rhs {
                return Err(Error::NotChainMap(n));
            }
        }
        Ok(())
    }

    /// Induced map on free homology in degree `n`, in the bases of
    /// [`homology_basis`]. Fails if either side has torsion in that degree.
    pub fn induced(&self, n: i64) -> Result<Matrix> {
        let hs = homology_basis(&self.source, n);
        let ht = homology_basis(&self.target, n);
        if !hs.torsion.is_empty() || !ht.torsion.is_empty() {
            return Err(Error::TorsionInCohomology);
        }
        ht.proj.mul(&self.map(n).mul(&hs.reps)?)
    }
}

/// `Cone^n = C^{n+1} + D^n` with `d(c, x) = (-dc, f(c) + dx)`.
pub fn cone(f: &ChainMap) -> Result<FiniteComplex> {
    f.check()?;
    let degs = f.all_degrees();
    let mut dims = BTreeMap::new();
    for &n in degs.iter().chain(degs.iter().map(|n| n - 1).collect::<Vec<_>>().iter()) {
        let d = f.source.dim(n + 1) + f.target.dim(n);
        if d > 0 {
            dims.insert(n, d);
        }
    }
    let mut c = FiniteComplex::new(dims);
    let keys: Vec<i64> = c.dims.keys().copied().collect();
    for n in keys {
        let m = Matrix::blocks(
            &f.source.d(n + 1).neg(),
            &Matrix::zeros(f.source.dim(n + 2), f.target.dim(n)),
            &f.map(n + 1),
            &f.target.d(n),
        );
        if m.rows > 0 && m.cols > 0 {
            c.set_diff(n, m)?;
        }
    }
    Ok(c)
}

pub fn is_quasi_iso(f: &ChainMap) -> Result<bool> {
    Ok(cohomology(&cone(f)?)?.is_zero())
}
