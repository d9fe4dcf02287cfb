//! Partitions, tableaux, nonnegative integer matrices and the RSK
//! correspondence.
//!
//! All tableau entries and matrix indices exposed through public
//! constructors are 1-based, matching the usual combinatorial notation.
//! Internally rows and columns are stored 0-based.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A weakly decreasing sequence of positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Builds a partition, dropping trailing zeros.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return invalid(format!("parts {parts:?} are not weakly decreasing"));
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Part `i` (0-based), zero past the end.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.part(0);
        Partition((1..=first).map(|c| self.0.iter().filter(|&&p| p >= c).count() as u32).collect())
    }

    /// True if the Young diagram of `other` fits inside `self`.
    pub fn contains(&self, other: &Partition) -> bool {
        other.len() <= self.len() && (0..other.len()).all(|i| other.part(i) <= self.part(i))
    }

    /// True if `self / mu` is a horizontal strip (no two boxes in a column).
    pub fn is_horizontal_strip_over(&self, mu: &Partition) -> bool {
        self.contains(mu) && (0..self.len()).all(|i| i == 0 || self.part(i) <= mu.part(i - 1))
    }

    /// Number of standard Young tableaux, by the hook length formula.
    pub fn num_standard_tableaux(&self) -> u64 {
        let n = self.size() as u64;
        let conj = self.conjugate();
        let mut num: u128 = (1..=n as u128).product();
        let mut den: u128 = 1;
        for (i, &p) in self.0.iter().enumerate() {
            for j in 0..p as usize {
                let arm = p as usize - j - 1;
                let leg = conj.part(j) as usize - i - 1;
                den *= (arm + leg + 1) as u128;
            }
        }
        num /= den;
        num as u64
    }

    /// Number of semistandard tableaux with entries at most `m`,
    /// by the hook-content formula.
    pub fn num_semistandard_tableaux(&self, m: usize) -> u64 {
        if self.len() > m {
            return 0;
        }
        let conj = self.conjugate();
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for (i, &p) in self.0.iter().enumerate() {
            for j in 0..p as usize {
                let arm = p as usize - j - 1;
                let leg = conj.part(j) as usize - i - 1;
                num *= (m + j - i) as u128;
                den *= (arm + leg + 1) as u128;
            }
        }
        (num / den) as u64
    }

    /// All partitions of `size` with at most `max_parts` parts, in
    /// reverse lexicographic order.
    pub fn all(size: u32, max_parts: usize) -> Vec<Partition> {
        fn rec(rest: u32, max_part: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            if slots == 0 {
                return;
            }
            for p in (1..=max_part.min(rest)).rev() {
                cur.push(p);
                rec(rest - p, p, slots - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(size, size, max_parts, &mut Vec::new(), &mut out);
        out
    }

    /// Partitions `lambda` such that `lambda / self` is a horizontal strip
    /// of size `l`, with at most `max_parts` parts.
    pub fn add_horizontal_strips(&self, l: u32, max_parts: usize) -> Vec<Partition> {
        let rows = (self.len() + 1).min(max_parts.max(self.len()));
        let mut out = Vec::new();
        let mut add = vec![0u32; rows];
        fn rec(i: usize, left: u32, mu: &Partition, add: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if i == add.len() {
                if left == 0 {
                    let parts = (0..add.len()).map(|r| mu.part(r) + add[r]).collect();
                    out.push(Partition::new(parts).expect("strip keeps order"));
                }
                return;
            }
            let cap = if i == 0 { left } else { (mu.part(i - 1) - mu.part(i)).min(left) };
            for a in (0..=cap).rev() {
                add[i] = a;
                rec(i + 1, left - a, mu, add, out);
            }
            add[i] = 0;
        }
        if rows == 0 {
            return out;
        }
        rec(0, l, self, &mut add, &mut out);
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// A semistandard Young tableau with positive entries, stored by rows.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u32>>", into = "Vec<Vec<u32>>")]
pub struct SemistandardTableau {
    rows: Vec<Vec<u32>>,
}

impl TryFrom<Vec<Vec<u32>>> for SemistandardTableau {
    type Error = Error;
    fn try_from(rows: Vec<Vec<u32>>) -> Result<Self> {
        SemistandardTableau::new(rows)
    }
}

impl From<SemistandardTableau> for Vec<Vec<u32>> {
    fn from(t: SemistandardTableau) -> Self {
        t.rows
    }
}

impl SemistandardTableau {
    /// Validates rows weakly increasing, columns strictly increasing and a
    /// partition shape. Empty trailing rows are dropped.
    pub fn new(mut rows: Vec<Vec<u32>>) -> Result<Self> {
        while rows.last().is_some_and(|r| r.is_empty()) {
            rows.pop();
        }
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return invalid("empty row inside tableau");
            }
            if row.contains(&0) {
                return invalid("tableau entries must be positive");
            }
            if row.windows(2).any(|w| w[0] > w[1]) {
                return invalid(format!("row {} is not weakly increasing", i + 1));
            }
            if i > 0 {
                let above = &rows[i - 1];
                if row.len() > above.len() {
                    return invalid("row lengths are not weakly decreasing");
                }
                if row.iter().zip(above).any(|(b, a)| a >= b) {
                    return invalid(format!("column strictness fails in row {}", i + 1));
                }
            }
        }
        Ok(SemistandardTableau { rows })
    }

    pub fn empty() -> Self {
        SemistandardTableau { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn shape(&self) -> Partition {
        Partition(self.rows.iter().map(|r| r.len() as u32).collect())
    }

    pub fn size(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<u32> {
        self.rows.get(row).and_then(|r| r.get(col)).copied()
    }

    pub fn max_entry(&self) -> u32 {
        self.rows.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Multiplicities of `1..=bound`.
    pub fn content(&self, bound: usize) -> Vec<u32> {
        let mut c = vec![0u32; bound];
        for &x in self.rows.iter().flatten() {
            if (x as usize) <= bound {
                c[x as usize - 1] += 1;
            }
        }
        c
    }

    /// True if entries are exactly `1..=size`.
    pub fn is_standard(&self) -> bool {
        let mut seen: Vec<u32> = self.rows.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.iter().enumerate().all(|(i, &x)| x as usize == i + 1)
    }

    /// Transpose of a standard tableau.
    pub fn transpose(&self) -> Result<SemistandardTableau> {
        if !self.is_standard() {
            return Err(Error::NonStandard("transpose needs a standard tableau".into()));
        }
        let conj = self.shape().conjugate();
        let rows = (0..conj.len())
            .map(|c| (0..conj.part(c) as usize).map(|r| self.rows[r][c]).collect())
            .collect();
        SemistandardTableau::new(rows)
    }

    /// Rows read from bottom to top, each left to right.
    pub fn row_reading_word(&self) -> Vec<u32> {
        self.rows.iter().rev().flatten().copied().collect()
    }

    /// Columns read from left to right, each bottom to top.
    pub fn column_reading_word(&self) -> Vec<u32> {
        let conj = self.shape().conjugate();
        let mut w = Vec::with_capacity(self.size());
        for c in 0..conj.len() {
            for r in (0..conj.part(c) as usize).rev() {
                w.push(self.rows[r][c]);
            }
        }
        w
    }

    /// Cell positions `(row, col)` in column reading order.
    pub fn column_reading_cells(&self) -> Vec<(usize, usize)> {
        let conj = self.shape().conjugate();
        let mut cells = Vec::with_capacity(self.size());
        for c in 0..conj.len() {
            for r in (0..conj.part(c) as usize).rev() {
                cells.push((r, c));
            }
        }
        cells
    }

    /// Replaces the entry at a cell without validation.
    pub(crate) fn with_entry(&self, cell: (usize, usize), value: u32) -> SemistandardTableau {
        let mut rows = self.rows.clone();
        rows[cell.0][cell.1] = value;
        SemistandardTableau { rows }
    }

    /// Sub-tableau of entries `<= m`.
    pub fn restrict(&self, m: u32) -> SemistandardTableau {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().copied().filter(|&x| x <= m).collect::<Vec<_>>())
            .filter(|r| !r.is_empty())
            .collect();
        SemistandardTableau { rows }
    }

    /// The Gelfand-Tsetlin chain `shape(T|<=0) c ... c shape(T|<=bound)`.
    pub fn gt_chain(&self, bound: u32) -> Vec<Partition> {
        (0..=bound).map(|m| self.restrict(m).shape()).collect()
    }

    /// Rebuilds a tableau from a chain of partitions in which consecutive
    /// skew shapes are horizontal strips.
    pub fn from_gt_chain(chain: &[Partition]) -> Result<SemistandardTableau> {
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for m in 1..chain.len() {
            let (lam, mu) = (&chain[m], &chain[m - 1]);
            if !lam.is_horizontal_strip_over(mu) {
                return invalid(format!("{lam} / {mu} is not a horizontal strip"));
            }
            for i in 0..lam.len() {
                if rows.len() <= i {
                    rows.push(Vec::new());
                }
                for _ in mu.part(i)..lam.part(i) {
                    rows[i].push(m as u32);
                }
            }
        }
        SemistandardTableau::new(rows)
    }

    /// Row insertion of `x`. Returns the new tableau and the added cell.
    pub fn row_insert(&self, x: u32) -> (SemistandardTableau, (usize, usize)) {
        let mut rows = self.rows.clone();
        let mut x = x;
        let mut r = 0;
        loop {
            if r == rows.len() {
                rows.push(vec![x]);
                return (SemistandardTableau { rows }, (r, 0));
            }
            match rows[r].iter().position(|&y| y > x) {
                Some(c) => {
                    std::mem::swap(&mut rows[r][c], &mut x);
                    r += 1;
                }
                None => {
                    rows[r].push(x);
                    let c = rows[r].len() - 1;
                    return (SemistandardTableau { rows }, (r, c));
                }
            }
        }
    }

    /// All semistandard tableaux of the given shape with entries `<= bound`.
    pub fn all_of_shape(shape: &Partition, bound: u32) -> Vec<SemistandardTableau> {
        let cells: Vec<(usize, usize)> = (0..shape.len())
            .flat_map(|r| (0..shape.part(r) as usize).map(move |c| (r, c)))
            .collect();
        let mut rows: Vec<Vec<u32>> = shape.parts().iter().map(|&p| vec![0; p as usize]).collect();
        let mut out = Vec::new();
        fn rec(k: usize, cells: &[(usize, usize)], rows: &mut Vec<Vec<u32>>, bound: u32, out: &mut Vec<SemistandardTableau>) {
            if k == cells.len() {
                out.push(SemistandardTableau { rows: rows.clone() });
                return;
            }
            let (r, c) = cells[k];
            let lo_left = if c > 0 { rows[r][c - 1] } else { 1 };
            let lo_up = if r > 0 { rows[r - 1][c] + 1 } else { 1 };
            for v in lo_left.max(lo_up)..=bound {
                rows[r][c] = v;
                rec(k + 1, cells, rows, bound, out);
            }
            rows[r][c] = 0;
        }
        rec(0, &cells, &mut rows, bound, &mut out);
        out
    }

    /// All standard tableaux of the given shape.
    pub fn all_standard(shape: &Partition) -> Vec<SemistandardTableau> {
        let n = shape.size();
        let mut out = Vec::new();
        fn rec(k: u32, n: u32, shape: &Partition, rows: &mut Vec<Vec<u32>>, out: &mut Vec<SemistandardTableau>) {
            if k > n {
                out.push(SemistandardTableau { rows: rows.clone() });
                return;
            }
            for r in 0..shape.len() {
                let len = rows[r].len();
                let fits = len < shape.part(r) as usize && (r == 0 || rows[r - 1].len() > len);
                if fits {
                    rows[r].push(k);
                    rec(k + 1, n, shape, rows, out);
                    rows[r].pop();
                }
            }
        }
        let mut rows = vec![Vec::new(); shape.len()];
        rec(1, n, shape, &mut rows, &mut out);
        out
    }
}

impl fmt::Display for SemistandardTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

/// An `r x n` matrix of nonnegative integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u32>>", into = "Vec<Vec<u32>>")]
pub struct NatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl TryFrom<Vec<Vec<u32>>> for NatMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<u32>>) -> Result<Self> {
        NatMatrix::from_rows(&rows)
    }
}

impl From<NatMatrix> for Vec<Vec<u32>> {
    fn from(a: NatMatrix) -> Self {
        a.to_rows()
    }
}

impl NatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        NatMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let r = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(NatMatrix { rows: r, cols: n, data: rows.concat() })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// Entry at 0-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub(crate) fn add_at(&mut self, i: usize, j: usize, d: i64) {
        let v = self.data[i * self.cols + j] as i64 + d;
        self.data[i * self.cols + j] = v as u32;
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[u32]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<u32> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u32> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn total(&self) -> u32 {
        self.data.iter().sum()
    }

    pub fn transpose(&self) -> NatMatrix {
        let mut t = NatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `prod A_ij!`, the squared norm of the monomial `x^A`.
    pub fn factorial_weight(&self) -> f64 {
        self.data.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product()
    }

    /// All `r x n` matrices with entries in `0..=max_entry`.
    pub fn all_bounded(rows: usize, cols: usize, max_entry: u32) -> Vec<NatMatrix> {
        let len = rows * cols;
        let base = max_entry as usize + 1;
        let count = base.pow(len as u32);
        (0..count)
            .map(|mut code| {
                let mut data = vec![0u32; len];
                for d in data.iter_mut().rev() {
                    *d = (code % base) as u32;
                    code /= base;
                }
                NatMatrix { rows, cols, data }
            })
            .collect()
    }

    /// All `r x n` matrices with prescribed column sums, optionally with
    /// prescribed row sums, in lexicographic order of the column vectors.
    pub fn all_with_col_sums(rows: usize, col_sums: &[u32], row_sums: Option<&[u32]>) -> Vec<NatMatrix> {
        let cols = col_sums.len();
        let column_options: Vec<Vec<Vec<u32>>> = col_sums.iter().map(|&k| compositions(k, rows)).collect();
        let mut out = Vec::new();
        let mut current: Vec<&Vec<u32>> = Vec::with_capacity(cols);
        fn rec<'a>(
            a: usize,
            opts: &'a [Vec<Vec<u32>>],
            rows: usize,
            cur: &mut Vec<&'a Vec<u32>>,
            remaining: &mut Vec<i64>,
            filter: bool,
            out: &mut Vec<NatMatrix>,
        ) {
            if a == opts.len() {
                if filter && remaining.iter().any(|&x| x != 0) {
                    return;
                }
                let mut m = NatMatrix::zeros(rows, opts.len());
                for (j, col) in cur.iter().enumerate() {
                    for i in 0..rows {
                        m.set(i, j, col[i]);
                    }
                }
                out.push(m);
                return;
            }
            for col in &opts[a] {
                if filter && col.iter().zip(remaining.iter()).any(|(&c, &rem)| c as i64 > rem) {
                    continue;
                }
                if filter {
                    for i in 0..rows {
                        remaining[i] -= col[i] as i64;
                    }
                }
                cur.push(col);
                rec(a + 1, opts, rows, cur, remaining, filter, out);
                cur.pop();
                if filter {
                    for i in 0..rows {
                        remaining[i] += col[i] as i64;
                    }
                }
            }
        }
        let mut remaining: Vec<i64> = match row_sums {
            Some(w) => w.iter().map(|&x| x as i64).collect(),
            None => vec![0; rows],
        };
        rec(0, &column_options, rows, &mut current, &mut remaining, row_sums.is_some(), &mut out);
        out
    }
}

impl fmt::Display for NatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.to_rows().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

/// Weak compositions of `k` into `parts` parts, in reverse lexicographic
/// order (first part largest first).
pub fn compositions(k: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=rest).rev() {
            cur.push(a);
            rec(rest - a, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if k == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(k, parts, &mut Vec::new(), &mut out);
    out
}

/// A two-line array of pairs `(i, j)` sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Biword {
    pub pairs: Vec<(u32, u32)>,
}

impl Biword {
    pub fn top(&self) -> Vec<u32> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn bottom(&self) -> Vec<u32> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

/// Each entry `A_ij` contributes `A_ij` copies of `(i, j)` (1-based).
pub fn matrix_to_biword(a: &NatMatrix) -> Biword {
    let mut pairs = Vec::with_capacity(a.total() as usize);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            for _ in 0..a.get(i, j) {
                pairs.push((i as u32 + 1, j as u32 + 1));
            }
        }
    }
    Biword { pairs }
}

/// Inverse of [`matrix_to_biword`].
pub fn biword_to_matrix(b: &Biword, rows: usize, cols: usize) -> Result<NatMatrix> {
    let mut a = NatMatrix::zeros(rows, cols);
    for &(i, j) in &b.pairs {
        if i == 0 || j == 0 || i as usize > rows || j as usize > cols {
            return Err(Error::IndexOutOfRange(format!("pair ({i},{j}) outside {rows}x{cols}")));
        }
        a.add_at(i as usize - 1, j as usize - 1, 1);
    }
    Ok(a)
}

/// Row insertion of `x` into `t`; see [`SemistandardTableau::row_insert`].
pub fn row_insert(t: &SemistandardTableau, x: u32) -> (SemistandardTableau, (usize, usize)) {
    t.row_insert(x)
}

/// The RSK correspondence. The column indices are inserted into `P` while
/// `Q` records the row indices, so `P` has content the column sums and `Q`
/// has content the row sums.
pub fn rsk(a: &NatMatrix) -> (SemistandardTableau, SemistandardTableau) {
    let mut p = SemistandardTableau::empty();
    let mut q_rows: Vec<Vec<u32>> = Vec::new();
    for (i, j) in matrix_to_biword(a).pairs {
        let (np, (r, _)) = p.row_insert(j);
        p = np;
        if q_rows.len() <= r {
            q_rows.push(Vec::new());
        }
        q_rows[r].push(i);
    }
    (p, SemistandardTableau { rows: q_rows })
}

/// Inverse RSK. `P` must have entries `<= n`, `Q` entries `<= r`.
pub fn rsk_inverse(p: &SemistandardTableau, q: &SemistandardTableau, r: usize, n: usize) -> Result<NatMatrix> {
    if p.shape() != q.shape() {
        return Err(Error::ShapeMismatch(format!("P has shape {} but Q has shape {}", p.shape(), q.shape())));
    }
    if p.max_entry() as usize > n {
        return invalid(format!("P has an entry above n = {n}"));
    }
    if q.max_entry() as usize > r {
        return invalid(format!("Q has an entry above r = {r}"));
    }
    let mut prow = p.rows.clone();
    let mut qrow = q.rows.clone();
    let mut a = NatMatrix::zeros(r, n);
    while !qrow.is_empty() {
        // the largest entry of Q, rightmost among equals
        let mut best: Option<(u32, usize, usize)> = None;
        for (ri, row) in qrow.iter().enumerate() {
            let c = row.len() - 1;
            let v = row[c];
            let better = match best {
                None => true,
                Some((bv, _, bc)) => v > bv || (v == bv && c > bc),
            };
            if better {
                best = Some((v, ri, c));
            }
        }
        let (i, ri, _) = best.expect("nonempty");
        qrow[ri].pop();
        let mut x = prow[ri].pop().expect("same shape");
        for row in prow[..ri].iter_mut().rev() {
            let pos = row.iter().rposition(|&y| y < x).expect("reverse bump exists");
            std::mem::swap(&mut row[pos], &mut x);
        }
        if qrow[ri].is_empty() {
            qrow.pop();
            prow.pop();
        }
        a.add_at(i as usize - 1, x as usize - 1, 1);
    }
    Ok(a)
}

/// A permutation of `1..=n` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl Permutation {
    pub fn new(one_line: Vec<usize>) -> Result<Self> {
        let n = one_line.len();
        let mut seen = vec![false; n + 1];
        for &x in &one_line {
            if x == 0 || x > n || seen[x] {
                return invalid(format!("{one_line:?} is not a permutation"));
            }
            seen[x] = true;
        }
        Ok(Permutation(one_line))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n).collect())
    }

    /// The longest element `i -> n + 1 - i`.
    pub fn longest(n: usize) -> Self {
        Permutation((1..=n).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn one_line(&self) -> &[usize] {
        &self.0
    }

    /// `w(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x - 1] = i + 1;
        }
        Permutation(inv)
    }

    /// Function composition, `(self.compose(other))(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i - 1]).collect())
    }

    /// All permutations of `1..=n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut cur: Vec<usize> = (1..=n).collect();
        let mut out = vec![Permutation(cur.clone())];
        loop {
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                return out;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot");
            cur.swap(i - 1, j);
            cur[i..].reverse();
            out.push(Permutation(cur.clone()));
        }
    }

    /// The 0/1 matrix with `A_ij = 1` iff `j = w(i)`.
    pub fn matrix(&self) -> NatMatrix {
        let n = self.len();
        let mut a = NatMatrix::zeros(n, n);
        for i in 0..n {
            a.set(i, self.0[i] - 1, 1);
        }
        a
    }

    /// The exponent matrix of the monomial attached to `w`:
    /// `A_ia = 1` iff `i = w(a)`. This is the transpose of [`Self::matrix`].
    pub fn monomial_exponent(&self) -> NatMatrix {
        self.matrix().transpose()
    }

    /// Recovers `w` from a monomial exponent matrix.
    pub fn from_monomial_exponent(a: &NatMatrix) -> Result<Permutation> {
        let n = a.ncols();
        if a.nrows() != n {
            return Err(Error::ShapeMismatch("permutation monomial must be square".into()));
        }
        let mut w = Vec::with_capacity(n);
        for col in 0..n {
            let hits: Vec<usize> = (0..n).filter(|&i| a.get(i, col) == 1).collect();
            if hits.len() != 1 || a.col_sums()[col] != 1 {
                return invalid(format!("{a} is not a permutation monomial"));
            }
            w.push(hits[0] + 1);
        }
        Permutation::new(w)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Robinson-Schensted of the word `w(1) ... w(n)`: `P` is the insertion
/// tableau and `Q` the recording tableau. Equals `rsk(w.matrix())`.
pub fn rs_permutation(w: &Permutation) -> (SemistandardTableau, SemistandardTableau) {
    rsk(&w.matrix())
}

/// Checks `rsk(A^t) = (Q, P)` given `rsk(A) = (P, Q)`.
pub fn transpose_check(a: &NatMatrix) -> bool {
    let (p, q) = rsk(a);
    let (pt, qt) = rsk(&a.transpose());
    pt == q && qt == p
}

/// Sub-tableau of entries `<= m`.
pub fn restrict(t: &SemistandardTableau, m: u32) -> SemistandardTableau {
    t.restrict(m)
}

/// Schutzenberger evacuation of a standard tableau.
pub fn evacuation(t: &SemistandardTableau) -> Result<SemistandardTableau> {
    if !t.is_standard() {
        return Err(Error::NonStandard(format!("{t}")));
    }
    let n = t.size() as u32;
    let mut cur: Vec<Vec<Option<u32>>> = t.rows.iter().map(|r| r.iter().map(|&x| Some(x)).collect()).collect();
    let mut out: Vec<Vec<u32>> = t.rows.iter().map(|r| vec![0; r.len()]).collect();
    for step in 0..n {
        // remove the minimum (always at the corner) and slide
        let (mut r, mut c) = (0usize, 0usize);
        cur[0][0] = None;
        loop {
            let right = cur.get(r).and_then(|row| row.get(c + 1)).copied().flatten();
            let below = cur.get(r + 1).and_then(|row| row.get(c)).copied().flatten();
            match (right, below) {
                (None, None) => break,
                (Some(x), Some(y)) if y < x => {
                    cur[r][c] = Some(y);
                    cur[r + 1][c] = None;
                    r += 1;
                }
                (Some(x), _) => {
                    cur[r][c] = Some(x);
                    cur[r][c + 1] = None;
                    c += 1;
                }
                (None, Some(y)) => {
                    cur[r][c] = Some(y);
                    cur[r + 1][c] = None;
                    r += 1;
                }
            }
        }
        out[r][c] = n - step;
        cur[r].truncate(c);
        while cur.last().is_some_and(|row| row.is_empty()) {
            cur.pop();
        }
    }
    SemistandardTableau::new(out)
}

/// Groups items by a key, preserving first-seen order of keys.
pub(crate) fn group_by_key<T: Clone, K: Ord + Clone>(items: &[T], key: impl Fn(&T) -> K) -> Vec<Vec<T>> {
    let mut order: Vec<K> = Vec::new();
    let mut groups: BTreeMap<K, Vec<T>> = BTreeMap::new();
    for it in items {
        let k = key(it);
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(it.clone());
    }
    order.into_iter().map(|k| groups.remove(&k).expect("key present")).collect()
}
