//! Calogero-Moser points, the fibre of the eigenvalue map along the
//! scaling path, and cells of symmetric groups computed from the
//! coalescence of Gaudin eigenlines on the weight `(1, ..., 1)` block.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{group_by_key, rs_permutation, Partition, Permutation};
use crate::error::{invalid, Error, Result};
use crate::liealg::basis_for;
use crate::spectralflow::{
    coalescence_classes, collision_path, collision_path_unit, endpoint_handoff, log_grid, positive_shift,
    q_limit_companions, rayleigh, retry_with_q_jitter, start_at_infinity, track, z_limit_companions, FlowOptions,
    HandoffDiagnostics, LegDiagnostics, Mixer, OperatorBank, PathKind, PathSpec,
};

pub type C64 = Complex<f64>;

/// A pair `(Z, Y)` representing a point of the Calogero-Moser space.
#[derive(Clone, Debug, PartialEq)]
pub struct CMPoint {
    pub z: DMatrix<C64>,
    pub y: DMatrix<C64>,
}

impl CMPoint {
    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    /// `[Z, Y] + Id`.
    pub fn rank_matrix(&self) -> DMatrix<C64> {
        let n = self.n();
        &self.z * &self.y - &self.y * &self.z + DMatrix::identity(n, n)
    }

    /// Ratio of the second to the first singular value of `[Z, Y] + Id`.
    pub fn rank_defect(&self) -> f64 {
        let sv = self.rank_matrix().singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        match s.as_slice() {
            [] | [_] => 0.0,
            [a, b, ..] => b / a,
        }
    }

    pub fn satisfies_rank_condition(&self, tol: f64) -> bool {
        self.rank_defect() <= tol
    }
}

/// `Z = diag(z)`, `Y_ii = p_i`, `Y_ij = 1/(z_i - z_j)`.
pub fn cm_point(z: &[f64], p: &[f64]) -> Result<CMPoint> {
    let n = z.len();
    if p.len() != n {
        return Err(Error::ShapeMismatch(format!("|z| = {n}, |p| = {}", p.len())));
    }
    let y = cm_y(z, p)?;
    let point = CMPoint {
        z: DMatrix::from_diagonal(&DVector::from_iterator(n, z.iter().map(|&x| C64::new(x, 0.0)))),
        y: y.map(|x| C64::new(x, 0.0)),
    };
    if !point.satisfies_rank_condition(1e-9) {
        return invalid(format!("[Z, Y] + Id has rank defect {:e}", point.rank_defect()));
    }
    Ok(point)
}

fn cm_y(z: &[f64], p: &[f64]) -> Result<DMatrix<f64>> {
    let n = z.len();
    let mut y = DMatrix::from_diagonal(&DVector::from_column_slice(p));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = z[i] - z[j];
                if d == 0.0 {
                    return Err(Error::Pole(format!("z_{} = z_{}", i + 1, j + 1)));
                }
                y[(i, j)] = 1.0 / d;
            }
        }
    }
    Ok(y)
}

fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Eigenvalue multisets of `Z` and `Y`, each sorted by real then
/// imaginary part.
pub fn upsilon(point: &CMPoint) -> (Vec<C64>, Vec<C64>) {
    let eig = |m: &DMatrix<C64>| {
        let mut v: Vec<C64> = m.clone().schur().eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default();
        sort_complex(&mut v);
        v
    };
    (eig(&point.z), eig(&point.y))
}

/// The scaling path `z -> s z` with `s = (1 - t)/t`; flow parameter `s`.
pub fn gamma_path(z: &[f64], q: &[f64]) -> Result<PathSpec> {
    for (name, v) in [("z", z), ("q", q)] {
        if v.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid(format!("{name} must be strictly increasing"));
        }
    }
    Ok(PathSpec { kind: PathKind::CmGamma, base: z.to_vec(), start: 1e4, end: 1e-5, points_per_decade: 16 })
}

/// `s = (1 - t)/t`.
pub fn gamma_scale(t: f64) -> f64 {
    (1.0 - t) / t
}

/// The `z` slot `(1 - t) z` of the path at time `t`.
pub fn gamma_point(z: &[f64], t: f64) -> Vec<f64> {
    z.iter().map(|x| (1.0 - t) * x).collect()
}

/// `(q_{w^-1(1)}, ..., q_{w^-1(n)})`, the diagonal limit labelled by `w`.
pub fn cm_label(w: &Permutation, q: &[f64]) -> Vec<f64> {
    let inv = w.inverse();
    (1..=q.len()).map(|i| q[inv.apply(i) - 1]).collect()
}

/// The point `p` over `([s z], [q])` on the sheet labelled by `w`, for
/// `n = 2` in closed form.
pub fn fiber_point_n2(z: &[f64], q: &[f64], w: &Permutation, s: f64) -> Result<Vec<f64>> {
    if z.len() != 2 || q.len() != 2 || w.len() != 2 {
        return invalid("closed form needs n = 2");
    }
    let eps = 1.0 / (s * (z[0] - z[1]));
    let disc = ((q[0] - q[1]).powi(2) + 4.0 * eps * eps).sqrt();
    let mid = (q[0] + q[1]) / 2.0;
    let target = cm_label(w, q);
    let (lo, hi) = (mid - disc / 2.0, mid + disc / 2.0);
    Ok(if target[0] <= target[1] { vec![lo, hi] } else { vec![hi, lo] })
}

/// Power sums `tr(Y^k)`, `k = 1..=n`, and their gradients in `p`.
fn power_sums(y: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = y.nrows();
    let mut f = DVector::zeros(n);
    let mut jac = DMatrix::zeros(n, n);
    let mut pow = DMatrix::identity(n, n);
    for k in 1..=n {
        for i in 0..n {
            jac[(k - 1, i)] = k as f64 * pow[(i, i)];
        }
        pow = &pow * y;
        f[k - 1] = pow.trace();
    }
    (f, jac)
}

/// The point `p` with `eig Y(s z, p) = [q]` on the sheet labelled by `w`,
/// continued by Newton's method from `s = 1e6` where `p` is close to
/// [`cm_label`].
pub fn fiber_point(z: &[f64], q: &[f64], w: &Permutation, s: f64) -> Result<Vec<f64>> {
    let n = z.len();
    if q.len() != n || w.len() != n {
        return Err(Error::ShapeMismatch("z, q and w must have equal length".into()));
    }
    let target: DVector<f64> = DVector::from_iterator(n, (1..=n).map(|k| q.iter().map(|x| x.powi(k as i32)).sum()));
    let mut p = cm_label(w, q);
    let s0 = s.max(1e6);
    for sk in log_grid(s0, s, 20) {
        let zs: Vec<f64> = z.iter().map(|x| x * sk).collect();
        let mut converged = false;
        for _ in 0..50 {
            let (f, jac) = power_sums(&cm_y(&zs, &p)?);
            let res = &f - &target;
            if res.amax() <= 1e-13 * target.amax().max(1.0) {
                converged = true;
                break;
            }
            let step = jac.lu().solve(&res).ok_or_else(|| Error::Continuation(format!("singular Jacobian at s = {sk:e}")))?;
            for i in 0..n {
                p[i] -= step[i];
            }
        }
        if !converged {
            return Err(Error::Continuation(format!("Newton did not converge at s = {sk:e}")));
        }
    }
    Ok(p)
}

/// `max |Y(s z, p) - diag(cm_label(w, q))|` on the sheet of `w`.
pub fn y_degeneration(z: &[f64], q: &[f64], w: &Permutation, s: f64) -> Result<f64> {
    let p = fiber_point(z, q, w, s)?;
    let zs: Vec<f64> = z.iter().map(|x| x * s).collect();
    let y = cm_y(&zs, &p)?;
    let d = DMatrix::from_diagonal(&DVector::from_vec(cm_label(w, q)));
    Ok((y - d).amax())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    Right,
    Left,
    TwoSided,
}

/// A set partition of `S_n`, blocks and their members in lexicographic
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellPartition {
    pub n: usize,
    pub kind: CellKind,
    pub blocks: Vec<Vec<Permutation>>,
}

impl CellPartition {
    pub fn new(n: usize, kind: CellKind, mut blocks: Vec<Vec<Permutation>>) -> Result<Self> {
        for b in &mut blocks {
            b.sort();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        let mut all: Vec<&Permutation> = blocks.iter().flatten().collect();
        all.sort();
        let expected = Permutation::all(n);
        if all.len() != expected.len() || all.iter().zip(&expected).any(|(a, b)| *a != b) {
            return invalid(format!("blocks do not partition S_{n}"));
        }
        Ok(CellPartition { n, kind, blocks })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block sizes ordered by the shape of the `P` symbol of the first
    /// member, from `(n)` down to `(1^n)` in reverse lexicographic order.
    pub fn sizes_by_shape(&self) -> Vec<usize> {
        let mut keyed: Vec<(Partition, usize)> = self.blocks.iter().map(|b| (rs_permutation(&b[0]).0.shape(), b.len())).collect();
        keyed.sort_by(|a, b| b.0.parts().cmp(a.0.parts()));
        keyed.into_iter().map(|(_, s)| s).collect()
    }

    pub fn block_of(&self, w: &Permutation) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(w).is_ok())
    }

    /// Same blocks, ignoring the kind tag.
    pub fn same_blocks(&self, other: &CellPartition) -> bool {
        self.n == other.n && self.blocks == other.blocks
    }

    /// The finest partition coarser than both.
    pub fn join(&self, other: &CellPartition, kind: CellKind) -> Result<CellPartition> {
        let perms = Permutation::all(self.n);
        let index: BTreeMap<&Permutation, usize> = perms.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut parent: Vec<usize> = (0..perms.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for block in self.blocks.iter().chain(&other.blocks) {
            let first = index[&block[0]];
            for w in &block[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, index[w]));
                parent[a.max(b)] = a.min(b);
            }
        }
        let roots: Vec<usize> = (0..perms.len()).map(|i| find(&mut parent, i)).collect();
        let idx: Vec<usize> = (0..perms.len()).collect();
        let blocks = group_by_key(&idx, |&i| roots[i]).into_iter().map(|b| b.into_iter().map(|i| perms[i].clone()).collect()).collect();
        CellPartition::new(self.n, kind, blocks)
    }
}

/// Cells from Robinson-Schensted: equal `P` (right), equal `Q` (left) or
/// equal shape (two-sided).
pub fn kl_reference_cells(n: usize, kind: CellKind) -> Result<CellPartition> {
    if n > 7 {
        return invalid("reference cells are enumerated for n <= 7");
    }
    let perms = Permutation::all(n);
    let blocks = match kind {
        CellKind::Right => group_by_key(&perms, |w| rs_permutation(w).0),
        CellKind::Left => group_by_key(&perms, |w| rs_permutation(w).1),
        CellKind::TwoSided => group_by_key(&perms, |w| rs_permutation(w).0.shape()),
    };
    CellPartition::new(n, kind, blocks)
}

/// `sum_{lambda |- n} #SYT(lambda)`.
pub fn involution_count(n: usize) -> usize {
    Partition::all(n as u32, n).iter().map(|p| p.num_standard_tableaux() as usize).sum()
}

/// Path and grid used by the cell flows.
#[derive(Clone, Debug, Serialize)]
pub struct CellOptions {
    pub flow: FlowOptions,
    /// `CmGamma` scales the moving slot; `Collision` and `CollisionUnit`
    /// send it to zero along a collision path.
    pub path: PathKind,
}

impl Default for CellOptions {
    fn default() -> Self {
        CellOptions { flow: FlowOptions::default(), path: PathKind::CmGamma }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CellDiagnostics {
    pub t_max: f64,
    pub legs: Vec<LegDiagnostics>,
    pub handoffs: Vec<HandoffDiagnostics>,
    pub min_overlap: f64,
    pub coefficient_redraws: u64,
    pub q_jitter: Option<Vec<f64>>,
    /// Named consistency checks and their outcomes.
    pub cross_checks: Vec<(String, bool)>,
}

/// One permutation with its cell and endpoint eigenvalues.
#[derive(Clone, Debug, Serialize)]
pub struct CellBranch {
    pub permutation: Permutation,
    pub block: usize,
    pub endpoint_eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub n: usize,
    pub kind: CellKind,
    pub partition: CellPartition,
    pub branches: Vec<CellBranch>,
    pub expected_class_count: usize,
    pub matches_kl: bool,
    pub diagnostics: CellDiagnostics,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Moving {
    Z,
    Q,
    Both,
}

struct Endpoint {
    perms: Vec<Permutation>,
    values: Vec<Vec<f64>>,
    diag: CellDiagnostics,
}

fn cell_bank(n: usize) -> Result<OperatorBank> {
    if n == 0 {
        return invalid("n must be positive");
    }
    OperatorBank::new(&basis_for(n, n, &vec![1; n], Some(&vec![1; n]))?)
}

fn check_points(n: usize, z: &[f64], q: &[f64]) -> Result<()> {
    if z.len() != n || q.len() != n {
        return Err(Error::ShapeMismatch(format!("need |z| = |q| = {n}")));
    }
    for (name, v) in [("z", z), ("q", q)] {
        if v.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid(format!("{name} = {v:?} must be strictly increasing"));
        }
    }
    Ok(())
}

/// A path sending `x` to zero, parametrized by `s` from large to small.
fn moving_path(kind: PathKind, x: &[f64], opts: &FlowOptions) -> Result<PathSpec> {
    let (xpos, _) = positive_shift(x);
    let p = match kind {
        PathKind::CmGamma | PathKind::StraightToZero => {
            PathSpec { kind: PathKind::CmGamma, base: x.to_vec(), start: 1.0, end: opts.straight_end, points_per_decade: 0 }
        }
        PathKind::Collision => collision_path(x.len(), &xpos)?.with_range(1.0, opts.collision_end),
        PathKind::CollisionUnit => collision_path_unit(x.len()).with_range(1.0, opts.collision_end),
        other => return invalid(format!("{other:?} is not a cell path")),
    };
    Ok(p.with_density(opts.points_per_decade))
}

/// Follows every eigenline of the weight `(1, ..., 1)` block from the
/// monomial regime to the end of the path and reads the limit operators.
fn follow(bank: &OperatorBank, moving: Moving, z: &[f64], q: &[f64], opts: &CellOptions, jitter: Option<Vec<f64>>) -> Result<Endpoint> {
    let f = &opts.flow;
    let mut mixer = Mixer::new(f.seed);
    let zp = moving_path(opts.path, z, f)?;
    let qp = moving_path(opts.path, q, f)?;
    let family = |s: f64| match moving {
        Moving::Z => bank.gaudin_family(&zp.point(s), q),
        Moving::Q => bank.gaudin_family(z, &qp.point(s)),
        Moving::Both => bank.gaudin_family(&zp.point(s), &qp.point(s)),
    };
    let (t_max, v0, labels) = start_at_infinity(bank, &family, f, &mut mixer)?;
    let grid = log_grid(t_max, zp.end, f.points_per_decade);
    let (v, leg) = track("cells", &v0, &family, &grid, &mixer, &f.track, None)?;
    let (limit, read) = match moving {
        Moving::Z => {
            let read = bank.limit_q(q);
            let mut l = read.clone();
            l.extend(z_limit_companions(bank, opts.path, z));
            (l, read)
        }
        Moving::Q => {
            let read = bank.limit_z(z);
            let mut l = read.clone();
            l.extend(q_limit_companions(bank, opts.path, q));
            (l, read)
        }
        Moving::Both => {
            let mut read = vec![bank.gt()[2 * bank.basis.r - 1].clone()];
            read.extend(bank.gt_cubic().last().cloned());
            let mut l = bank.limit_q(q);
            l.extend(bank.limit_z(z));
            l.extend(read.iter().cloned());
            (l, read)
        }
    };
    let (tr, hd) = endpoint_handoff("cells: endpoint", &v, &limit, &mixer, f.handoff_threshold)?;
    let values = rayleigh(&tr.vectors, &read);
    let perms = labels.iter().map(Permutation::from_monomial_exponent).collect::<Result<Vec<_>>>()?;
    let diag = CellDiagnostics {
        t_max,
        min_overlap: leg.min_overlap.min(hd.min_overlap),
        legs: vec![leg],
        handoffs: vec![hd],
        coefficient_redraws: mixer.redraws(),
        q_jitter: jitter,
        cross_checks: Vec::new(),
    };
    Ok(Endpoint { perms, values, diag })
}

fn classes_of(n: usize, kind: CellKind, ep: &Endpoint, opts: &FlowOptions) -> Result<(CellPartition, Vec<CellBranch>)> {
    let classes = coalescence_classes(&ep.values, opts.cluster_tol, opts.gap_ratio)?;
    let blocks = classes.iter().map(|c| c.iter().map(|&b| ep.perms[b].clone()).collect()).collect();
    let partition = CellPartition::new(n, kind, blocks)?;
    let mut branches: Vec<CellBranch> = ep
        .perms
        .iter()
        .zip(&ep.values)
        .map(|(w, v)| CellBranch {
            permutation: w.clone(),
            block: partition.block_of(w).expect("partition covers S_n"),
            endpoint_eigenvalues: v.clone(),
        })
        .collect();
    branches.sort_by(|a, b| a.permutation.cmp(&b.permutation));
    Ok((partition, branches))
}

fn one_sided(n: usize, z: &[f64], q: &[f64], opts: &CellOptions, kind: CellKind) -> Result<CellReport> {
    check_points(n, z, q)?;
    let bank = cell_bank(n)?;
    let moving = if kind == CellKind::Right { Moving::Z } else { Moving::Q };
    retry_with_q_jitter(q, opts.flow.seed, |qj, jitter| {
        let ep = follow(&bank, moving, z, qj, opts, jitter)?;
        let (partition, branches) = classes_of(n, kind, &ep, &opts.flow)?;
        let expected = involution_count(n);
        let mut diag = ep.diag;
        diag.cross_checks.push(("class count".into(), partition.blocks.len() == expected));
        let reference = kl_reference_cells(n, kind).ok();
        Ok(CellReport {
            n,
            kind,
            matches_kl: reference.is_some_and(|r| r.same_blocks(&partition)),
            partition,
            branches,
            expected_class_count: expected,
            diagnostics: diag,
        })
    })
}

/// Right cells: eigenlines labelled by `w` at `z -> infinity`, grouped by
/// their limits as `z -> 0`.
pub fn right_cells(n: usize, z: &[f64], q: &[f64], opts: &CellOptions) -> Result<CellReport> {
    one_sided(n, z, q, opts, CellKind::Right)
}

/// Left cells: the same with `q` scaled to zero at fixed `z`.
pub fn left_cells(n: usize, z: &[f64], q: &[f64], opts: &CellOptions) -> Result<CellReport> {
    one_sided(n, z, q, opts, CellKind::Left)
}

/// Blocks of `p` mapped by `w -> w^-1`.
pub fn inverse_image(p: &CellPartition, kind: CellKind) -> Result<CellPartition> {
    CellPartition::new(p.n, kind, p.blocks.iter().map(|b| b.iter().map(Permutation::inverse).collect()).collect())
}

/// Two-sided cells as the join of left and right cells, checked against
/// the central Casimir classes at the end of the path scaling both `z`
/// and `q` to zero.
pub fn two_sided_cells(n: usize, z: &[f64], q: &[f64], opts: &CellOptions) -> Result<CellReport> {
    let right = right_cells(n, z, q, opts)?;
    let left = left_cells(n, z, q, opts)?;
    let join = right.partition.join(&left.partition, CellKind::TwoSided)?;
    // the path scaling both slots is always the straight one
    let mu_opts = CellOptions { path: PathKind::CmGamma, ..opts.clone() };
    let mu = retry_with_q_jitter(q, opts.flow.seed, |qj, jitter| {
        let ep = follow(&cell_bank(n)?, Moving::Both, z, qj, &mu_opts, jitter)?;
        let (p, branches) = classes_of(n, CellKind::TwoSided, &ep, &opts.flow)?;
        Ok((p, branches, ep.diag))
    })?;
    let (mu_partition, branches, mut diag) = mu;
    let reference = kl_reference_cells(n, CellKind::TwoSided).ok();
    diag.cross_checks.push(("left cells are inverses of right cells".into(), inverse_image(&right.partition, CellKind::Left)?.same_blocks(&left.partition)));
    diag.cross_checks.push(("central Casimir classes".into(), mu_partition.same_blocks(&join)));
    diag.cross_checks.push(("shape classes".into(), reference.as_ref().is_some_and(|r| r.same_blocks(&mu_partition))));
    let expected = Partition::all(n as u32, n).len();
    diag.cross_checks.push(("block sizes are squares".into(), {
        let mut sizes = join.sizes();
        sizes.sort();
        let mut squares: Vec<usize> = Partition::all(n as u32, n).iter().map(|p| (p.num_standard_tableaux() as usize).pow(2)).collect();
        squares.sort();
        sizes == squares
    }));
    let branches = branches
        .into_iter()
        .map(|mut b| {
            b.block = join.block_of(&b.permutation).expect("join covers S_n");
            b
        })
        .collect();
    Ok(CellReport {
        n,
        kind: CellKind::TwoSided,
        matches_kl: reference.is_some_and(|r| r.same_blocks(&join)),
        partition: join,
        branches,
        expected_class_count: expected,
        diagnostics: diag,
    })
}

/// Default generic points for the cell flows.
pub fn default_cell_points(n: usize) -> (Vec<f64>, Vec<f64>) {
    const Z: [f64; 5] = [1.0, 2.0, 3.2, 4.5, 6.0];
    const Q: [f64; 5] = [0.0, 1.0, 2.5, 3.7, 5.0];
    let z = (0..n).map(|i| Z.get(i).copied().unwrap_or_else(|| 6.0 + 1.6 * (i - 4) as f64)).collect();
    let q = (0..n).map(|i| Q.get(i).copied().unwrap_or_else(|| 5.0 + 1.4 * (i - 4) as f64)).collect();
    (z, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cm_point_examples() {
        let p = cm_point(&[0.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(p.y[(0, 1)], C64::new(-1.0, 0.0));
        assert_eq!(p.y[(1, 0)], C64::new(1.0, 0.0));
        assert!(p.rank_defect() < 1e-12);
        let (zs, ys) = upsilon(&p);
        assert_eq!(zs, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!((ys[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ys[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
        assert!(matches!(cm_point(&[1.0, 1.0], &[0.0, 0.0]), Err(Error::Pole(_))));
        assert!(cm_point(&[2.0], &[5.0]).unwrap().satisfies_rank_condition(0.0));
    }

    #[test]
    fn gamma_schedule() {
        assert_eq!(gamma_point(&[2.0, 4.0], 0.5), vec![1.0, 2.0]);
        assert_eq!(gamma_point(&[2.0, 4.0], 1.0), vec![0.0, 0.0]);
        assert_eq!(gamma_scale(0.5), 1.0);
        assert!(gamma_scale(1e-9) > 1e8);
    }

    #[test]
    fn newton_matches_closed_form() {
        let (z, q) = ([0.3, 1.7], [-0.5, 2.0]);
        for w in Permutation::all(2) {
            for s in [1.0, 10.0, 1e3] {
                let a = fiber_point(&z, &q, &w, s).unwrap();
                let b = fiber_point_n2(&z, &q, &w, s).unwrap();
                assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reference_cells() {
        let r = kl_reference_cells(3, CellKind::Right).unwrap();
        let mut sizes = r.sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2, 2]);
        assert_eq!(kl_reference_cells(3, CellKind::TwoSided).unwrap().blocks.len(), 3);
        let l = kl_reference_cells(3, CellKind::Left).unwrap();
        let meet: usize = r.blocks.iter().map(|b| l.blocks.iter().filter(|c| c.iter().any(|w| b.contains(w))).count()).sum();
        assert_eq!(meet, 6);
        assert_eq!(involution_count(4), 10);
    }

    #[test]
    fn right_cells_small() {
        let (z, q) = default_cell_points(3);
        let rep = right_cells(3, &z, &q, &CellOptions::default()).unwrap();
        assert!(rep.matches_kl);
        assert_eq!(rep.partition.blocks.len(), 4);
    }
}
