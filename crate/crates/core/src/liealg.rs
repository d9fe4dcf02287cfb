//! Operators on graded pieces of the polynomial ring `C[x_ia]` of
//! `r x n` matrices.
//!
//! `gl_r` acts on each column `a` by `E_ij^(a) = x_ia d/dx_ja`, and `gl_n`
//! acts on each row `b` by `E_ij = x_bi d/dx_bj`. Operators are first
//! described symbolically by [`Op`] and then evaluated monomial by
//! monomial, so products may pass through monomials outside the target
//! basis. Public builders take 1-based indices.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Debug, Display};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::NatMatrix;
use crate::error::{invalid, Error, Result};

/// Coefficient field for operators.
pub trait Scalar: Clone + Debug + Display + PartialEq + Num + std::ops::Neg<Output = Self> + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Numerator and denominator strings for coordinate export.
    fn num_den(&self) -> (String, String);
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn num_den(&self) -> (String, String) {
        (format!("{self:e}"), "1".into())
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn num_den(&self) -> (String, String) {
        (self.numer().to_string(), self.denom().to_string())
    }
}

/// Exact rational from a fraction of integers.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational equal to the binary value of `x`.
pub fn rat_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("{x} is not finite")))
}

/// Ordered monomial basis of `V(k)`, optionally cut down to one `gl_r`
/// weight (row sums).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightSpaceBasis {
    pub r: usize,
    pub n: usize,
    pub k: Vec<u32>,
    pub weight: Option<Vec<u32>>,
    monomials: Vec<NatMatrix>,
    #[serde(skip)]
    index: HashMap<NatMatrix, usize>,
}

pub fn basis_for(r: usize, n: usize, k: &[u32], weight: Option<&[u32]>) -> Result<Arc<WeightSpaceBasis>> {
    if r == 0 {
        return invalid("r must be positive");
    }
    if k.len() != n {
        return Err(Error::ShapeMismatch(format!("k has {} entries but n = {n}", k.len())));
    }
    if let Some(w) = weight {
        if w.len() != r {
            return Err(Error::ShapeMismatch(format!("weight has {} entries but r = {r}", w.len())));
        }
    }
    let mut monomials = NatMatrix::all_with_col_sums(r, k, weight);
    monomials.sort();
    let index = monomials.iter().enumerate().map(|(p, m)| (m.clone(), p)).collect();
    Ok(Arc::new(WeightSpaceBasis { r, n, k: k.to_vec(), weight: weight.map(<[u32]>::to_vec), monomials, index }))
}

impl WeightSpaceBasis {
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomials(&self) -> &[NatMatrix] {
        &self.monomials
    }

    pub fn position(&self, a: &NatMatrix) -> Option<usize> {
        self.index.get(a).copied()
    }

    /// The full degree block `V(k)` without the weight filter.
    pub fn enclosing_block(&self) -> Arc<WeightSpaceBasis> {
        basis_for(self.r, self.n, &self.k, None).expect("validated on construction")
    }

    /// Squared norms `prod A_ia!` of the basis monomials.
    pub fn norms(&self) -> Vec<f64> {
        self.monomials.iter().map(NatMatrix::factorial_weight).collect()
    }

    fn same_space(&self, other: &WeightSpaceBasis) -> bool {
        self.r == other.r && self.n == other.n && self.k == other.k && self.weight == other.weight
    }
}

/// Symbolic operator expression. Indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Op<T> {
    Identity,
    /// `E_ij` of `gl_r` acting on column `a`.
    Local { i: usize, j: usize, a: usize },
    /// `sum_a E_ij^(a)`.
    Global { i: usize, j: usize },
    /// `E_ab` of `gl_n` acting on row `row`.
    DualLocal { a: usize, b: usize, row: usize },
    /// `sum_row E_ab` on every row.
    DualGlobal { a: usize, b: usize },
    Scaled(T, Box<Op<T>>),
    Sum(Vec<Op<T>>),
    /// Composition; the last factor acts first.
    Product(Vec<Op<T>>),
}

impl<T: Scalar> Op<T> {
    pub fn scaled(self, c: T) -> Op<T> {
        Op::Scaled(c, Box::new(self))
    }

    pub fn then(self, first: Op<T>) -> Op<T> {
        Op::Product(vec![self, first])
    }
}

type MonoVec<T> = BTreeMap<NatMatrix, T>;

fn accumulate<T: Scalar>(out: &mut MonoVec<T>, key: NatMatrix, c: T) {
    match out.get_mut(&key) {
        Some(v) => *v = v.clone() + c,
        None => {
            out.insert(key, c);
        }
    }
}

fn shift(a: &NatMatrix, add: (usize, usize), sub: (usize, usize)) -> NatMatrix {
    let mut b = a.clone();
    b.add_at(sub.0, sub.1, -1);
    b.add_at(add.0, add.1, 1);
    b
}

fn apply_op<T: Scalar>(op: &Op<T>, v: &MonoVec<T>) -> MonoVec<T> {
    let mut out = MonoVec::new();
    match op {
        Op::Identity => return v.clone(),
        Op::Local { i, j, a } => {
            for (m, c) in v {
                let e = m.get(*j, *a);
                if e > 0 {
                    accumulate(&mut out, shift(m, (*i, *a), (*j, *a)), c.clone() * T::from_i64(e as i64));
                }
            }
        }
        Op::Global { i, j } => {
            for (m, c) in v {
                for a in 0..m.ncols() {
                    let e = m.get(*j, a);
                    if e > 0 {
                        accumulate(&mut out, shift(m, (*i, a), (*j, a)), c.clone() * T::from_i64(e as i64));
                    }
                }
            }
        }
        Op::DualLocal { a, b, row } => {
            for (m, c) in v {
                let e = m.get(*row, *b);
                if e > 0 {
                    accumulate(&mut out, shift(m, (*row, *a), (*row, *b)), c.clone() * T::from_i64(e as i64));
                }
            }
        }
        Op::DualGlobal { a, b } => {
            for (m, c) in v {
                for row in 0..m.nrows() {
                    let e = m.get(row, *b);
                    if e > 0 {
                        accumulate(&mut out, shift(m, (row, *a), (row, *b)), c.clone() * T::from_i64(e as i64));
                    }
                }
            }
        }
        Op::Scaled(s, inner) => {
            for (m, c) in apply_op(inner, v) {
                out.insert(m, c * s.clone());
            }
        }
        Op::Sum(terms) => {
            for t in terms {
                for (m, c) in apply_op(t, v) {
                    accumulate(&mut out, m, c);
                }
            }
        }
        Op::Product(factors) => {
            let mut cur = v.clone();
            for f in factors.iter().rev() {
                cur = apply_op(f, &cur);
                cur.retain(|_, c| !c.is_zero());
            }
            return cur;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Sparse operator on a [`WeightSpaceBasis`], stored by columns.
#[derive(Clone, Debug)]
pub struct LinearOperator<T> {
    basis: Arc<WeightSpaceBasis>,
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> PartialEq for LinearOperator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same_space(&other.basis) && self.cols == other.cols
    }
}

impl<T: Scalar> LinearOperator<T> {
    /// Evaluates `op` on every basis monomial.
    pub fn build(basis: &Arc<WeightSpaceBasis>, op: &Op<T>) -> Result<Self> {
        let mut cols = Vec::with_capacity(basis.dim());
        for m in basis.monomials() {
            let mut start = MonoVec::new();
            start.insert(m.clone(), T::one());
            let image = apply_op(op, &start);
            let mut col = Vec::with_capacity(image.len());
            for (target, c) in image {
                match basis.position(&target) {
                    Some(p) => col.push((p, c)),
                    None => return Err(Error::LeavesBasis(format!("{target} is the image of {m} outside the basis"))),
                }
            }
            col.sort_by_key(|e| e.0);
            cols.push(col);
        }
        Ok(LinearOperator { basis: basis.clone(), cols })
    }

    pub fn zero(basis: &Arc<WeightSpaceBasis>) -> Self {
        LinearOperator { basis: basis.clone(), cols: vec![Vec::new(); basis.dim()] }
    }

    pub fn identity(basis: &Arc<WeightSpaceBasis>) -> Self {
        LinearOperator { basis: basis.clone(), cols: (0..basis.dim()).map(|c| vec![(c, T::one())]).collect() }
    }

    pub fn basis(&self) -> &Arc<WeightSpaceBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.cols[col].iter().find(|e| e.0 == row).map_or_else(T::zero, |e| e.1.clone())
    }

    /// Image of basis vector `col` as `(row, coefficient)` pairs.
    pub fn column(&self, col: usize) -> &[(usize, T)] {
        &self.cols[col]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !self.basis.same_space(&other.basis) {
            return Err(Error::ShapeMismatch("operators live on different bases".into()));
        }
        Ok(())
    }

    fn from_maps(basis: &Arc<WeightSpaceBasis>, maps: Vec<BTreeMap<usize, T>>) -> Self {
        let cols = maps.into_iter().map(|m| m.into_iter().filter(|(_, c)| !c.is_zero()).collect()).collect();
        LinearOperator { basis: basis.clone(), cols }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, -T::one())
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        self.check(other)?;
        let maps = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(x, y)| {
                let mut m = BTreeMap::new();
                for (r, c) in x {
                    m.insert(*r, c.clone() * alpha.clone());
                }
                for (r, c) in y {
                    let v = m.remove(r).unwrap_or_else(T::zero) + c.clone() * beta.clone();
                    m.insert(*r, v);
                }
                m
            })
            .collect();
        Ok(Self::from_maps(&self.basis, maps))
    }

    pub fn scale(&self, s: T) -> Self {
        let cols = self
            .cols
            .iter()
            .map(|c| c.iter().map(|(r, v)| (*r, v.clone() * s.clone())).filter(|e| !e.1.is_zero()).collect())
            .collect();
        LinearOperator { basis: self.basis.clone(), cols }
    }

    /// `self * other` (other acts first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let maps = other
            .cols
            .iter()
            .map(|col| {
                let mut m: BTreeMap<usize, T> = BTreeMap::new();
                for (mid, c) in col {
                    for (r, d) in &self.cols[*mid] {
                        let v = m.remove(r).unwrap_or_else(T::zero) + c.clone() * d.clone();
                        m.insert(*r, v);
                    }
                }
                m
            })
            .collect();
        Ok(Self::from_maps(&self.basis, maps))
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.iter().all(|e| e.1.is_zero()))
    }

    pub fn transpose(&self) -> Self {
        let mut maps: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); self.dim()];
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                maps[*r].insert(c, v.clone());
            }
        }
        Self::from_maps(&self.basis, maps)
    }

    /// Dense matrix in the monomial basis.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                m[(*r, c)] = v.to_f64();
            }
        }
        m
    }

    /// Dense matrix in the orthonormal basis `x^A / sqrt(prod A_ia!)`.
    pub fn to_dense_orthonormal(&self) -> DMatrix<f64> {
        let s: Vec<f64> = self.basis.norms().iter().map(|w| w.sqrt()).collect();
        let mut m = self.to_dense();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                m[(r, c)] *= s[r] / s[c];
            }
        }
        m
    }

    /// Coordinate-list text: one `row col numerator denominator` line per
    /// nonzero entry, 0-based, sorted by column then row.
    pub fn to_coo(&self) -> String {
        let mut out = String::new();
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                let (num, den) = v.num_den();
                out.push_str(&format!("{r} {c} {num} {den}\n"));
            }
        }
        out
    }
}

impl LinearOperator<BigRational> {
    /// Parses the output of [`LinearOperator::to_coo`].
    pub fn from_coo(basis: &Arc<WeightSpaceBasis>, text: &str) -> Result<Self> {
        let mut maps: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); basis.dim()];
        for (lineno, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::InvalidInput(format!("bad coordinate line {}: {line}", lineno + 1));
            if f.len() != 4 {
                return Err(bad());
            }
            let r: usize = f[0].parse().map_err(|_| bad())?;
            let c: usize = f[1].parse().map_err(|_| bad())?;
            let num: BigInt = f[2].parse().map_err(|_| bad())?;
            let den: BigInt = f[3].parse().map_err(|_| bad())?;
            if r >= basis.dim() || c >= basis.dim() || den.is_zero() {
                return Err(bad());
            }
            maps[c].insert(r, BigRational::new(num, den));
        }
        Ok(Self::from_maps(basis, maps))
    }

    pub fn to_f64(&self) -> LinearOperator<f64> {
        let cols = self.cols.iter().map(|c| c.iter().map(|(r, v)| (*r, Scalar::to_f64(v))).collect()).collect();
        LinearOperator { basis: self.basis.clone(), cols }
    }
}

impl LinearOperator<f64> {
    pub fn max_abs(&self) -> f64 {
        self.cols.iter().flatten().fold(0.0, |m, e| m.max(e.1.abs()))
    }
}

impl<T: Scalar> Display for LinearOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_coo())
    }
}

/// `PQ - QP`.
pub fn commutator<T: Scalar>(p: &LinearOperator<T>, q: &LinearOperator<T>) -> Result<LinearOperator<T>> {
    p.compose(q)?.sub(&q.compose(p)?)
}

/// True if `<P u, v> = <u, Q v>` for all basis monomials, where
/// `<x^A, x^B> = delta_AB prod A_ia!`.
pub fn is_adjoint_pair(p: &LinearOperator<BigRational>, q: &LinearOperator<BigRational>) -> Result<bool> {
    p.check(q)?;
    let w: Vec<BigRational> = p
        .basis
        .monomials()
        .iter()
        .map(|m| {
            let f: BigInt = m.entries().iter().map(|&a| (1..=a as u64).map(BigInt::from).product::<BigInt>()).product();
            BigRational::from_integer(f)
        })
        .collect();
    for a in 0..p.dim() {
        for b in 0..p.dim() {
            // <P x^A, x^B> = P[B,A] w_B and <x^A, Q x^B> = Q[A,B] w_A
            if p.get(b, a) * w[b].clone() != q.get(a, b) * w[a].clone() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Points `z` (length `n`) and `q` (length `r`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Parameters<T = f64> {
    pub z: Vec<T>,
    pub q: Vec<T>,
}

impl<T: Scalar + PartialOrd> Parameters<T> {
    pub fn new(z: Vec<T>, q: Vec<T>) -> Self {
        Parameters { z, q }
    }

    pub fn z_regular(&self) -> bool {
        self.z.windows(2).all(|w| w[0] < w[1])
    }

    pub fn q_regular(&self) -> bool {
        self.q.windows(2).all(|w| w[0] < w[1])
    }
}

fn check_range(name: &str, idx: usize, bound: usize) -> Result<usize> {
    if idx == 0 || idx > bound {
        return Err(Error::IndexOutOfRange(format!("{name} = {idx} outside 1..={bound}")));
    }
    Ok(idx - 1)
}

/// `E_ij^(a)`.
pub fn op_e<T: Scalar>(i: usize, j: usize, a: usize, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    let op = Op::Local { i: check_range("i", i, basis.r)?, j: check_range("j", j, basis.r)?, a: check_range("a", a, basis.n)? };
    LinearOperator::build(basis, &op)
}

/// `E_ij` of `gl_n` acting on row `b`.
pub fn dual_op_e<T: Scalar>(i: usize, j: usize, b: usize, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    let op = Op::DualLocal { a: check_range("i", i, basis.n)?, b: check_range("j", j, basis.n)?, row: check_range("b", b, basis.r)? };
    LinearOperator::build(basis, &op)
}

/// Symbolic builders with 0-based indices, shared with the numerical code.
pub mod expr {
    use super::*;

    pub fn global<T: Scalar>(i: usize, j: usize) -> Op<T> {
        Op::Global { i, j }
    }

    pub fn dual_global<T: Scalar>(a: usize, b: usize) -> Op<T> {
        Op::DualGlobal { a, b }
    }

    /// `sum_ij E_ij^(a) E_ji^(b)`.
    pub fn omega<T: Scalar>(r: usize, a: usize, b: usize) -> Op<T> {
        let mut terms = Vec::new();
        for i in 0..r {
            for j in 0..r {
                terms.push(Op::Product(vec![Op::Local { i, j, a }, Op::Local { i: j, j: i, a: b }]));
            }
        }
        Op::Sum(terms)
    }

    /// `sum_ab E_ab^[i] E_ba^[j]` for the `gl_n` actions on rows `i`, `j`.
    pub fn dual_omega<T: Scalar>(n: usize, i: usize, j: usize) -> Op<T> {
        let mut terms = Vec::new();
        for a in 0..n {
            for b in 0..n {
                terms.push(Op::Product(vec![Op::DualLocal { a, b, row: i }, Op::DualLocal { a: b, b: a, row: j }]));
            }
        }
        Op::Sum(terms)
    }

    /// `2 (E_ij E_ji + E_ji E_ij)` through the diagonal embedding.
    pub fn kappa<T: Scalar>(i: usize, j: usize) -> Op<T> {
        Op::Sum(vec![
            Op::Product(vec![Op::Global { i, j }, Op::Global { i: j, j: i }]),
            Op::Product(vec![Op::Global { i: j, j: i }, Op::Global { i, j }]),
        ])
        .scaled(T::from_i64(2))
    }

    pub fn dual_kappa<T: Scalar>(a: usize, b: usize) -> Op<T> {
        Op::Sum(vec![
            Op::Product(vec![Op::DualGlobal { a, b }, Op::DualGlobal { a: b, b: a }]),
            Op::Product(vec![Op::DualGlobal { a: b, b: a }, Op::DualGlobal { a, b }]),
        ])
        .scaled(T::from_i64(2))
    }

    /// `sum_{b<a} Omega^(ba)`.
    pub fn jm<T: Scalar>(r: usize, a: usize) -> Op<T> {
        Op::Sum((0..a).map(|b| omega(r, b, a)).collect())
    }

    pub fn dual_jm<T: Scalar>(n: usize, i: usize) -> Op<T> {
        Op::Sum((0..i).map(|j| dual_omega(n, j, i)).collect())
    }

    /// Nested Casimir `tr(E^d)` for the corner `gl_{i+1}` of `gl_r`,
    /// acting diagonally or on one column.
    pub fn casimir<T: Scalar>(i: usize, degree: u8, factor: Option<usize>) -> Op<T> {
        let e = |x: usize, y: usize| match factor {
            Some(a) => Op::Local { i: x, j: y, a },
            None => Op::Global { i: x, j: y },
        };
        cyclic(i, degree, e)
    }

    /// `sum E_{x1 x2} E_{x2 x3} ... E_{xd x1}` over indices `<= i`.
    fn cyclic<T: Scalar>(i: usize, degree: u8, e: impl Fn(usize, usize) -> Op<T>) -> Op<T> {
        let d = degree as usize;
        let mut terms = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            terms.push(Op::Product((0..d).map(|k| e(idx[k], idx[(k + 1) % d])).collect()));
            let mut k = 0;
            while k < d && idx[k] == i {
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
            idx[k] += 1;
        }
        Op::Sum(terms)
    }

    /// Nested Casimir `tr(E^d)` for the corner `gl_{a+1}` of `gl_n`, acting on all rows.
    pub fn dual_casimir<T: Scalar>(a: usize, degree: u8) -> Op<T> {
        cyclic(a, degree, |x, y| Op::DualGlobal { a: x, b: y })
    }

    /// Coefficients of `E_ii^(a)` and `kappa_ij` in `nabla_i(z, q)`.
    pub fn nabla<T: Scalar>(i: usize, z: &[T], q: &[T]) -> Result<Op<T>> {
        let mut terms: Vec<Op<T>> = z
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, c)| Op::Local { i, j: i, a }.scaled(c.clone()))
            .collect();
        for j in 0..q.len() {
            if j == i {
                continue;
            }
            let d = q[i].clone() - q[j].clone();
            if d.is_zero() {
                return Err(Error::Pole(format!("q_{} = q_{}", i + 1, j + 1)));
            }
            terms.push(kappa(i, j).scaled(T::one() / d));
        }
        Ok(Op::Sum(terms))
    }

    /// `sum_i q_i E_ii^(a) + sum_{b != a} kappa'_ab / (z_a - z_b)`, with
    /// `kappa'` built from the `gl_n` action.
    pub fn dual_nabla<T: Scalar>(a: usize, q: &[T], z: &[T]) -> Result<Op<T>> {
        let mut terms: Vec<Op<T>> = q
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| Op::Local { i, j: i, a }.scaled(c.clone()))
            .collect();
        for b in 0..z.len() {
            if b == a {
                continue;
            }
            let d = z[a].clone() - z[b].clone();
            if d.is_zero() {
                return Err(Error::Pole(format!("z_{} = z_{}", a + 1, b + 1)));
            }
            terms.push(dual_kappa(a, b).scaled(T::one() / d));
        }
        Ok(Op::Sum(terms))
    }
}

/// `Omega^(ab) = sum_ij E_ij^(a) E_ji^(b)`.
pub fn omega<T: Scalar>(a: usize, b: usize, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    let (a0, b0) = (check_range("a", a, basis.n)?, check_range("b", b, basis.n)?);
    if a0 == b0 {
        return invalid("omega needs two distinct tensor factors");
    }
    LinearOperator::build(basis, &expr::omega(basis.r, a0, b0))
}

/// `kappa_ij = 2 (E_ij E_ji + E_ji E_ij)` with `E` acting diagonally.
pub fn kappa<T: Scalar>(i: usize, j: usize, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    LinearOperator::build(basis, &expr::kappa(check_range("i", i, basis.r)?, check_range("j", j, basis.r)?))
}

fn check_params<T: Scalar>(params: &Parameters<T>, basis: &WeightSpaceBasis) -> Result<()> {
    if params.z.len() != basis.n || params.q.len() != basis.r {
        return Err(Error::ShapeMismatch(format!(
            "parameters have |z| = {}, |q| = {} but n = {}, r = {}",
            params.z.len(),
            params.q.len(),
            basis.n,
            basis.r
        )));
    }
    Ok(())
}

/// `nabla_i(z, q) = sum_a z_a E_ii^(a) + sum_{j != i} kappa_ij / (q_i - q_j)`.
pub fn nabla<T: Scalar>(i: usize, params: &Parameters<T>, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    check_params(params, basis)?;
    let i0 = check_range("i", i, basis.r)?;
    LinearOperator::build(basis, &expr::nabla(i0, &params.z, &params.q)?)
}

/// The same construction with the roles of `gl_r` and `gl_n` exchanged:
/// `sum_i q_i E_ii^(a) + sum_{b != a} kappa'_ab / (z_a - z_b)`.
pub fn dual_nabla<T: Scalar>(a: usize, params: &Parameters<T>, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    check_params(params, basis)?;
    let a0 = check_range("a", a, basis.n)?;
    LinearOperator::build(basis, &expr::dual_nabla(a0, &params.q, &params.z)?)
}

/// `G_h = sum_{i<j} (h_i - h_j)/(q_i - q_j) E_ij E_ji` on a single column.
pub fn g_h<T: Scalar>(h: &[T], q: &[T], basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    if basis.n != 1 {
        return invalid("G_h acts on a single tensor factor (n = 1)");
    }
    if h.len() != basis.r || q.len() != basis.r {
        return Err(Error::ShapeMismatch("h and q need r entries".into()));
    }
    let mut terms = Vec::new();
    for i in 0..basis.r {
        for j in i + 1..basis.r {
            let d = q[i].clone() - q[j].clone();
            if d.is_zero() {
                return Err(Error::Pole(format!("q_{} = q_{}", i + 1, j + 1)));
            }
            let c = (h[i].clone() - h[j].clone()) / d;
            if !c.is_zero() {
                terms.push(Op::Product(vec![Op::Local { i, j, a: 0 }, Op::Local { i: j, j: i, a: 0 }]).scaled(c));
            }
        }
    }
    LinearOperator::build(basis, &Op::Sum(terms))
}

/// Jucys-Murphy type operator `J_a = sum_{b<a} Omega^(ba)`, `2 <= a <= n`.
pub fn jm<T: Scalar>(a: usize, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    let a0 = check_range("a", a, basis.n)?;
    if a0 == 0 {
        return invalid("J_a needs a >= 2");
    }
    LinearOperator::build(basis, &expr::jm(basis.r, a0))
}

/// `J'_i = sum_{j<i} Omega'^(ji)` for the `gl_n` actions on rows.
pub fn dual_jm<T: Scalar>(i: usize, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    let i0 = check_range("i", i, basis.r)?;
    if i0 == 0 {
        return invalid("J'_i needs i >= 2");
    }
    LinearOperator::build(basis, &expr::dual_jm(basis.n, i0))
}

/// `C_i^(1) = sum_{a<=i} E_aa`, `C_i^(2) = sum_{a,b<=i} E_ab E_ba` or the
/// cubic `C_i^(3) = sum E_ab E_bc E_ca` for the corner `gl_i` of `gl_r`, acting diagonally (`diagonal = true`) or on
/// the first column only.
pub fn nested_casimirs<T: Scalar>(i: usize, degree: u8, basis: &Arc<WeightSpaceBasis>, diagonal: bool) -> Result<LinearOperator<T>> {
    let i0 = check_range("i", i, basis.r)?;
    if !(1..=3).contains(&degree) {
        return invalid("Casimir degree must be 1, 2 or 3");
    }
    LinearOperator::build(basis, &expr::casimir(i0, degree, if diagonal { None } else { Some(0) }))
}

/// Nested Casimirs of `gl_n` acting on all rows.
pub fn dual_nested_casimirs<T: Scalar>(a: usize, degree: u8, basis: &Arc<WeightSpaceBasis>) -> Result<LinearOperator<T>> {
    let a0 = check_range("a", a, basis.n)?;
    if !(1..=3).contains(&degree) {
        return invalid("Casimir degree must be 1, 2 or 3");
    }
    LinearOperator::build(basis, &expr::dual_casimir(a0, degree))
}

/// Reduced row echelon helper over the rationals.
struct Echelon {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Echelon {
    fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    fn reduce(&self, v: &mut [BigRational]) {
        for (pivot, row) in &self.rows {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x = x.clone() - f.clone() * y.clone();
                    }
                }
            }
        }
    }

    /// Adds `v` if independent; returns whether it was.
    fn insert(&mut self, mut v: Vec<BigRational>) -> bool {
        self.reduce(&mut v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in v.iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        self.rows.push((p, v));
        true
    }

    fn contains(&self, v: &[BigRational]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(Zero::is_zero)
    }
}

fn flatten(op: &LinearOperator<BigRational>) -> Vec<BigRational> {
    let d = op.dim();
    let mut v = vec![BigRational::zero(); d * d];
    for (c, col) in op.cols.iter().enumerate() {
        for (r, x) in col {
            v[r * d + c] = x.clone();
        }
    }
    v
}

/// Basis of the unital algebra generated by a commuting family.
pub fn generated_algebra(basis: &Arc<WeightSpaceBasis>, family: &[LinearOperator<BigRational>]) -> Result<Vec<LinearOperator<BigRational>>> {
    let mut ech = Echelon::new();
    let mut span = vec![LinearOperator::identity(basis)];
    ech.insert(flatten(&span[0]));
    let mut frontier = span.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in family {
                let y = g.compose(x)?;
                if ech.insert(flatten(&y)) {
                    next.push(y.clone());
                    span.push(y);
                }
            }
        }
        frontier = next;
    }
    Ok(span)
}

/// Exact test that two commuting families of diagonalizable operators
/// generate the same algebra, hence have the same joint eigenspaces.
pub fn same_joint_eigenspaces(
    basis: &Arc<WeightSpaceBasis>,
    first: &[LinearOperator<BigRational>],
    second: &[LinearOperator<BigRational>],
) -> Result<bool> {
    let span_of = |fam: &[LinearOperator<BigRational>]| -> Result<Echelon> {
        let mut e = Echelon::new();
        for x in generated_algebra(basis, fam)? {
            e.insert(flatten(&x));
        }
        Ok(e)
    };
    let (s1, s2) = (span_of(first)?, span_of(second)?);
    Ok(first.iter().all(|x| s2.contains(&flatten(x))) && second.iter().all(|x| s1.contains(&flatten(x))))
}

/// Eigenvalue of `C_i^(2)` on the irreducible `gl_i` module `V_lambda`.
pub fn casimir2_eigenvalue(lambda: &[u32], i: usize) -> i64 {
    lambda
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let l = l as i64;
            l * (l + i as i64 - 1 - 2 * j as i64)
        })
        .sum()
}

/// Eigenvalue of `tr(E^d)` on `V_lambda` for `gl_i`, from the shifted
/// parts `l_j = lambda_j + i - j`.
pub fn casimir_power_eigenvalue(lambda: &[u32], i: usize, degree: u32) -> f64 {
    let l: Vec<f64> = (0..i).map(|j| lambda.get(j).copied().unwrap_or(0) as f64 + (i - 1 - j) as f64).collect();
    (0..i)
        .map(|j| {
            let prod: f64 = (0..i).filter(|&m| m != j).map(|m| 1.0 - 1.0 / (l[j] - l[m])).product();
            l[j].powi(degree as i32) * prod
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    type Q = BigRational;

    fn b(r: usize, n: usize, k: &[u32], w: Option<&[u32]>) -> Arc<WeightSpaceBasis> {
        basis_for(r, n, k, w).unwrap()
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(b(2, 2, &[1, 1], None).dim(), 4);
        assert_eq!(b(3, 3, &[1, 1, 1], Some(&[1, 1, 1])).dim(), 6);
        let x = b(2, 1, &[2], None);
        assert_eq!(x.dim(), 3);
        assert!(x.monomials().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn raising_operator_on_one_variable() {
        let x = b(2, 1, &[1], None);
        let e: LinearOperator<Q> = op_e(1, 2, 1, &x).unwrap();
        let x1 = x.position(&NatMatrix::from_rows(&[vec![1], vec![0]]).unwrap()).unwrap();
        let x2 = x.position(&NatMatrix::from_rows(&[vec![0], vec![1]]).unwrap()).unwrap();
        assert_eq!(e.column(x2), &[(x1, rat(1, 1))]);
        assert!(e.column(x1).is_empty());
    }

    #[test]
    fn gl2_relation_on_symmetric_powers() {
        for k in 0..=4 {
            let x = b(2, 1, &[k], None);
            let e12: LinearOperator<Q> = op_e(1, 2, 1, &x).unwrap();
            let e21 = op_e(2, 1, 1, &x).unwrap();
            let h = op_e(1, 1, 1, &x).unwrap().sub(&op_e(2, 2, 1, &x).unwrap()).unwrap();
            assert_eq!(commutator(&e12, &e21).unwrap(), h);
        }
    }

    #[test]
    fn weight_filter_rejects_leaving_images() {
        let x = b(2, 2, &[1, 1], Some(&[1, 1]));
        assert!(matches!(op_e::<Q>(1, 2, 1, &x), Err(Error::LeavesBasis(_))));
        assert!(op_e::<Q>(1, 2, 1, &x.enclosing_block()).is_ok());
        assert!(op_e::<Q>(1, 1, 1, &x).is_ok());
    }

    #[test]
    fn jm_is_the_swap() {
        let x = b(2, 2, &[1, 1], Some(&[1, 1]));
        let j: LinearOperator<Q> = jm(2, &x).unwrap();
        assert_eq!(j.get(0, 1), rat(1, 1));
        assert_eq!(j.get(1, 0), rat(1, 1));
        assert_eq!(j.get(0, 0), rat(0, 1));
    }

    #[test]
    fn nablas_commute_at_rational_point() {
        let x = b(2, 2, &[1, 1], Some(&[1, 1]));
        let p = Parameters::new(vec![rat(1, 3), rat(7, 5)], vec![rat(-2, 7), rat(11, 4)]);
        let n1 = nabla(1, &p, &x).unwrap();
        let n2 = nabla(2, &p, &x).unwrap();
        assert!(commutator(&n1, &n2).unwrap().is_zero());
    }

    #[test]
    fn pole_is_reported() {
        let x = b(2, 2, &[1, 1], None);
        let p = Parameters::new(vec![rat(1, 1), rat(2, 1)], vec![rat(1, 1), rat(1, 1)]);
        assert!(matches!(nabla(1, &p, &x), Err(Error::Pole(_))));
    }

    #[test]
    fn g_h_family() {
        let x = b(3, 1, &[2], None);
        let q = [rat(0, 1), rat(1, 2), rat(3, 1)];
        let g1 = g_h(&[rat(1, 1), rat(-2, 3), rat(5, 1)], &q, &x).unwrap();
        let g2 = g_h(&[rat(2, 7), rat(4, 1), rat(-1, 1)], &q, &x).unwrap();
        assert!(commutator(&g1, &g2).unwrap().is_zero());
        let ones = [rat(1, 1), rat(1, 1), rat(1, 1)];
        assert!(g_h(&ones, &q, &x).unwrap().is_zero());
        for i in 1..=3 {
            assert!(commutator(&g1, &op_e(i, i, 1, &x).unwrap()).unwrap().is_zero());
        }
    }

    #[test]
    fn coo_roundtrip() {
        let x = b(2, 2, &[2, 1], None);
        let p = Parameters::new(vec![rat(1, 3), rat(7, 5)], vec![rat(-2, 7), rat(11, 4)]);
        let n1 = nabla(1, &p, &x).unwrap();
        assert_eq!(LinearOperator::from_coo(&x, &n1.to_coo()).unwrap(), n1);
    }

    #[test]
    fn adjointness_of_generators() {
        let x = b(2, 2, &[2, 1], None);
        for i in 1..=2 {
            for j in 1..=2 {
                for a in 1..=2 {
                    let p: LinearOperator<Q> = op_e(i, j, a, &x).unwrap();
                    let q = op_e(j, i, a, &x).unwrap();
                    assert!(is_adjoint_pair(&p, &q).unwrap());
                }
            }
        }
    }

    #[test]
    fn casimir_on_total_degree() {
        let x = b(3, 2, &[2, 1], None);
        let c: LinearOperator<Q> = nested_casimirs(3, 1, &x, true).unwrap();
        assert_eq!(c, LinearOperator::identity(&x).scale(rat(3, 1)));
    }

    #[test]
    fn power_casimirs_on_highest_weight_vectors() {
        use crate::combinatorics::Permutation;
        use nalgebra::DVector;
        // highest weight vectors of gl_3 are products of leading minors
        let m1 = vec![(vec![[0, 0]], 1)];
        let m2 = vec![(vec![[0, 0], [1, 1]], 1), (vec![[0, 1], [1, 0]], -1)];
        let m3: Vec<(Vec<[usize; 2]>, i64)> = Permutation::all(3)
            .into_iter()
            .map(|p| {
                let inv = (0..3).flat_map(|a| (a + 1..3).map(move |b| (a, b))).filter(|&(a, b)| p.apply(a + 1) > p.apply(b + 1)).count();
                ((0..3).map(|a| [a, p.apply(a + 1) - 1]).collect(), if inv % 2 == 0 { 1 } else { -1 })
            })
            .collect();
        let mul = |x: &Vec<(Vec<[usize; 2]>, i64)>, y: &Vec<(Vec<[usize; 2]>, i64)>| {
            let mut out = Vec::new();
            for (a, s) in x {
                for (b, t) in y {
                    let mut c = a.clone();
                    c.extend(b);
                    out.push((c, s * t));
                }
            }
            out
        };
        let cases = [(vec![2, 1], mul(&m1, &m2)), (vec![1, 1, 1], m3.clone()), (vec![2], mul(&m1, &m1)), (vec![3, 1, 1], mul(&mul(&m1, &m1), &m3))];
        for (lambda, poly) in cases {
            let mut k = vec![0u32; 3];
            for [_, c] in &poly[0].0 {
                k[*c] += 1;
            }
            let basis = b(3, 3, &k, None);
            let mut v = DVector::zeros(basis.dim());
            for (cells, coeff) in &poly {
                let mut a = NatMatrix::zeros(3, 3);
                for [i, c] in cells {
                    a.add_at(*i, *c, 1);
                }
                v[basis.position(&a).unwrap()] += *coeff as f64;
            }
            for degree in 1..=3u8 {
                let c = LinearOperator::<f64>::build(&basis, &expr::casimir(2, degree, None)).unwrap().to_dense();
                let expect = casimir_power_eigenvalue(&lambda, 3, degree as u32);
                assert!((&c * &v - &v * expect).norm() < 1e-9, "lambda {lambda:?} degree {degree}");
            }
            assert_eq!(casimir_power_eigenvalue(&lambda, 3, 2).round() as i64, casimir2_eigenvalue(&lambda, 3));
        }
    }
}
