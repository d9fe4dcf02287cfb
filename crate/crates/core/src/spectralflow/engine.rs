//! Joint diagonalization of commuting symmetric families and eigenline
//! transport between nearby parameter values.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Eigenvalues closer than this (on the normalized combination) are
/// refined together with a fresh combination.
const SPLIT: f64 = 1e-6;
/// Below this norm a restricted, normalized operator is treated as scalar.
const ABS_FLOOR: f64 = 1e-10;
const MAX_DEPTH: usize = 8;

/// Seeded rational coefficients, one vector per refinement depth.
#[derive(Clone, Debug)]
pub struct Mixer {
    seed: u64,
    redraw: u64,
}

impl Mixer {
    pub fn new(seed: u64) -> Self {
        Mixer { seed, redraw: 0 }
    }

    /// Switches to a fresh set of coefficients.
    pub fn redraw(&mut self) {
        self.redraw += 1;
    }

    pub fn redraws(&self) -> u64 {
        self.redraw
    }

    /// Coefficients `p / 1009` with `p` uniform in `[-1009, 1009] \ {0}`.
    pub fn coeffs(&self, depth: usize, len: usize) -> Vec<f64> {
        let key = self.seed ^ (self.redraw.wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ ((depth as u64 + 1) << 48);
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        (0..len)
            .map(|_| {
                let p: i32 = rng.random_range(1..=1009);
                let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                s * p as f64 / 1009.0
            })
            .collect()
    }
}

/// Orthonormal joint eigenbasis with its unresolved (degenerate) groups.
#[derive(Clone, Debug)]
pub struct JointEigen {
    pub vectors: DMatrix<f64>,
    /// Column indices of numerically degenerate joint eigenspaces; every
    /// column appears in exactly one group.
    pub groups: Vec<Vec<usize>>,
    /// Smallest gap in the top-level combined spectrum.
    pub min_gap: f64,
}

impl JointEigen {
    pub fn is_simple(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Trace-free, Frobenius-normalized copies of the non-scalar operators.
fn prepare(ops: &[DMatrix<f64>], abs_floor: Option<f64>) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for a in ops {
        let n = a.nrows();
        let raw = a.norm();
        let mut b = a.clone();
        let tr = b.trace() / n as f64;
        for i in 0..n {
            b[(i, i)] -= tr;
        }
        let s = b.norm();
        let keep = match abs_floor {
            Some(f) => s > f,
            None => s > 1e-12 * raw && s > 0.0,
        };
        if keep {
            b /= s;
            symmetrize(&mut b);
            out.push(b);
        }
    }
    out
}

/// Combined operator of a family with the depth-0 coefficients.
pub fn combine(ops: &[DMatrix<f64>], mixer: &Mixer) -> Option<DMatrix<f64>> {
    let p = prepare(ops, None);
    if p.is_empty() {
        return None;
    }
    let c = mixer.coeffs(0, p.len());
    let mut l = DMatrix::zeros(p[0].nrows(), p[0].ncols());
    for (ck, pk) in c.iter().zip(&p) {
        l += pk * *ck;
    }
    Some(l)
}

fn sorted_eigen(l: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = l.nrows();
    let eig = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

fn joint_eig_rec(ops: &[DMatrix<f64>], mixer: &Mixer, depth: usize) -> JointEigen {
    let n = ops.first().map_or(0, DMatrix::nrows);
    let prepared = prepare(ops, if depth == 0 { None } else { Some(ABS_FLOOR) });
    if prepared.is_empty() {
        let groups = if n == 0 { Vec::new() } else { vec![(0..n).collect()] };
        return JointEigen { vectors: DMatrix::identity(n, n), groups, min_gap: f64::INFINITY };
    }
    let c = mixer.coeffs(depth, prepared.len());
    let mut l = DMatrix::zeros(n, n);
    for (ck, pk) in c.iter().zip(&prepared) {
        l += pk * *ck;
    }
    let (values, mut vectors) = sorted_eigen(l);
    let min_gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut groups = Vec::new();
    let mut start = 0;
    for end in 1..=n {
        if end < n && values[end] - values[end - 1] < SPLIT {
            continue;
        }
        let cluster: Vec<usize> = (start..end).collect();
        start = end;
        if cluster.len() == 1 {
            groups.push(cluster);
            continue;
        }
        if depth >= MAX_DEPTH {
            groups.push(cluster);
            continue;
        }
        let q = vectors.columns(cluster[0], cluster.len()).into_owned();
        let sub_ops: Vec<DMatrix<f64>> = prepared.iter().map(|a| q.transpose() * a * &q).collect();
        let sub = joint_eig_rec(&sub_ops, mixer, depth + 1);
        let rotated = &q * &sub.vectors;
        for (k, &col) in cluster.iter().enumerate() {
            vectors.set_column(col, &rotated.column(k));
        }
        for g in sub.groups {
            groups.push(g.into_iter().map(|k| cluster[k]).collect());
        }
    }
    JointEigen { vectors, groups, min_gap }
}

/// Joint eigenbasis of a commuting family of symmetric matrices.
pub fn joint_eig(ops: &[DMatrix<f64>], mixer: &Mixer) -> JointEigen {
    joint_eig_rec(ops, mixer, 0)
}

/// Largest relative commutator norm in a family.
pub fn commutation_defect(ops: &[DMatrix<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            let scale = a.norm() * b.norm();
            if scale > 0.0 {
                worst = worst.max((a * b - b * a).norm() / scale);
            }
        }
    }
    worst
}

/// Result of moving tracked eigenlines onto a new joint eigenbasis.
#[derive(Clone, Debug)]
pub struct Transport {
    /// New vectors, column `j` continuing tracked column `j`.
    pub vectors: DMatrix<f64>,
    /// Index into `groups` of the eigenspace each tracked column landed in.
    pub group_of: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
    /// `|<old_j, new_j>|` for every column.
    pub overlaps: Vec<f64>,
    pub min_gap: f64,
}

impl Transport {
    pub fn min_overlap(&self) -> f64 {
        self.overlaps.iter().copied().fold(1.0, f64::min)
    }
}

/// Assigns each tracked vector to a joint eigenspace of `target` greedily
/// by projection weight, respecting eigenspace dimensions, and replaces
/// it by the closest orthonormal set inside its eigenspace.
pub fn transport(old: &DMatrix<f64>, target: &JointEigen) -> Transport {
    let m = old.ncols();
    let groups = &target.groups;
    let bases: Vec<DMatrix<f64>> = groups
        .iter()
        .map(|g| DMatrix::from_fn(target.vectors.nrows(), g.len(), |i, k| target.vectors[(i, g[k])]))
        .collect();
    let coords: Vec<DMatrix<f64>> = bases.iter().map(|b| b.transpose() * old).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(m * groups.len());
    for (g, c) in coords.iter().enumerate() {
        for j in 0..m {
            let w = c.column(j).norm_squared();
            if w > 1e-6 {
                pairs.push((w, j, g));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut group_of = vec![usize::MAX; m];
    let mut left: Vec<usize> = groups.iter().map(Vec::len).collect();
    for (_, j, g) in pairs {
        if group_of[j] == usize::MAX && left[g] > 0 {
            group_of[j] = g;
            left[g] -= 1;
        }
    }
    // leftover columns (negligible weight everywhere) fill remaining slots
    for j in 0..m {
        if group_of[j] == usize::MAX {
            if let Some(g) = left.iter().position(|&l| l > 0) {
                group_of[j] = g;
                left[g] -= 1;
            }
        }
    }
    let mut vectors = DMatrix::zeros(old.nrows(), m);
    let mut overlaps = vec![0.0; m];
    for (g, basis) in bases.iter().enumerate() {
        let members: Vec<usize> = (0..m).filter(|&j| group_of[j] == g).collect();
        if members.is_empty() {
            continue;
        }
        let c = DMatrix::from_fn(basis.ncols(), members.len(), |i, k| coords[g][(i, members[k])]);
        let polar = polar_factor(&c);
        let new = basis * polar;
        for (k, &j) in members.iter().enumerate() {
            vectors.set_column(j, &new.column(k));
            overlaps[j] = old.column(j).dot(&new.column(k)).abs();
        }
    }
    Transport { vectors, group_of, groups: groups.clone(), overlaps, min_gap: target.min_gap }
}

/// Orthonormal factor `U V^T` of the SVD of a tall or square matrix.
fn polar_factor(c: &DMatrix<f64>) -> DMatrix<f64> {
    if c.ncols() == 1 {
        let n = c.column(0).norm();
        if n > 0.0 {
            return c / n;
        }
    }
    let svd = c.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    u * vt
}

/// Rayleigh quotients `v_j^T A v_j` for each column and operator.
pub fn rayleigh(vectors: &DMatrix<f64>, ops: &[DMatrix<f64>]) -> Vec<Vec<f64>> {
    (0..vectors.ncols())
        .map(|j| {
            let v: DVector<f64> = vectors.column(j).into_owned();
            ops.iter().map(|a| v.dot(&(a * &v))).collect()
        })
        .collect()
}

/// Step-control settings for [`track`].
#[derive(Clone, Debug, Serialize)]
pub struct TrackSettings {
    pub match_threshold: f64,
    pub hard_floor: f64,
    pub max_bisections: usize,
}

impl Default for TrackSettings {
    fn default() -> Self {
        TrackSettings { match_threshold: 0.9, hard_floor: 0.5, max_bisections: 30 }
    }
}

/// Per-leg bookkeeping.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LegDiagnostics {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub accepted_steps: usize,
    pub bisections: usize,
    pub min_overlap: f64,
    pub min_gap: f64,
    pub degenerate_steps: usize,
}

/// One sample of a tracked eigenvalue, for plotting.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub leg: String,
    pub param: f64,
    pub branch: usize,
    pub operator: usize,
    pub value: f64,
}

/// Follows the columns of `start` along `grid`, where `family(u)` gives
/// the commuting operators at parameter `u > 0`. The columns must be
/// (approximately) joint eigenvectors at `grid[0]`.
pub fn track(
    name: &str,
    start: &DMatrix<f64>,
    family: &dyn Fn(f64) -> Vec<DMatrix<f64>>,
    grid: &[f64],
    mixer: &Mixer,
    settings: &TrackSettings,
    traces: Option<&mut Vec<TraceRow>>,
) -> Result<(DMatrix<f64>, LegDiagnostics)> {
    let mut diag = LegDiagnostics {
        name: name.to_string(),
        start: grid.first().copied().unwrap_or(f64::NAN),
        end: grid.last().copied().unwrap_or(f64::NAN),
        min_overlap: 1.0,
        min_gap: f64::INFINITY,
        ..Default::default()
    };
    let mut traces = traces;
    let mut v = start.clone();
    let Some(&first) = grid.first() else {
        return Ok((v, diag));
    };
    let mut cur = first;
    let accept = |v: &mut DMatrix<f64>, u: f64, diag: &mut LegDiagnostics, traces: &mut Option<&mut Vec<TraceRow>>| -> Result<bool> {
        let ops = family(u);
        let je = joint_eig(&ops, mixer);
        let tr = transport(v, &je);
        let ov = tr.min_overlap();
        Ok({
            if ov < settings.match_threshold {
                false
            } else {
                commit(v, tr, &ops, u, name, diag, traces);
                true
            }
        })
    };
    // align with the exact eigenbasis at the first point
    if !accept(&mut v, first, &mut diag, &mut traces)? {
        let ops = family(first);
        let tr = transport(&v, &joint_eig(&ops, mixer));
        return Err(Error::Continuation(format!(
            "{name}: start vectors are not eigenvectors at u = {first:e} (overlap {:.3})",
            tr.min_overlap()
        )));
    }
    for &target in &grid[1..] {
        let mut pending = vec![target];
        while let Some(&u) = pending.last() {
            if accept(&mut v, u, &mut diag, &mut traces)? {
                cur = u;
                pending.pop();
                continue;
            }
            let mid = (cur * u).sqrt();
            let exhausted = pending.len() > settings.max_bisections || !(mid != cur && mid != u);
            if exhausted {
                let ops = family(u);
                let tr = transport(&v, &joint_eig(&ops, mixer));
                let ov = tr.min_overlap();
                if ov < settings.hard_floor {
                    return Err(Error::Continuation(format!(
                        "{name}: overlap {ov:.3} below floor {} between u = {cur:e} and u = {u:e} after {} bisections",
                        settings.hard_floor, diag.bisections
                    )));
                }
                commit(&mut v, tr, &ops, u, name, &mut diag, &mut traces);
                cur = u;
                pending.pop();
                continue;
            }
            diag.bisections += 1;
            pending.push(mid);
        }
    }
    Ok((v, diag))
}

fn commit(
    v: &mut DMatrix<f64>,
    tr: Transport,
    ops: &[DMatrix<f64>],
    u: f64,
    name: &str,
    diag: &mut LegDiagnostics,
    traces: &mut Option<&mut Vec<TraceRow>>,
) {
    diag.accepted_steps += 1;
    diag.min_overlap = diag.min_overlap.min(tr.min_overlap());
    diag.min_gap = diag.min_gap.min(tr.min_gap);
    if tr.groups.iter().any(|g| g.len() > 1) {
        diag.degenerate_steps += 1;
    }
    *v = tr.vectors;
    if let Some(rows) = traces.as_deref_mut() {
        for (b, vals) in rayleigh(v, ops).into_iter().enumerate() {
            for (k, value) in vals.into_iter().enumerate() {
                rows.push(TraceRow { leg: name.to_string(), param: u, branch: b, operator: k, value });
            }
        }
    }
}

/// Log-uniform grid from `from` to `to` (either direction) with at least
/// `per_decade` points per factor of ten.
pub fn log_grid(from: f64, to: f64, per_decade: usize) -> Vec<f64> {
    let decades = (to / from).log10().abs();
    let steps = ((decades * per_decade.max(1) as f64).ceil() as usize).max(1);
    let (a, b) = (from.ln(), to.ln());
    (0..=steps).map(|k| (a + (b - a) * k as f64 / steps as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn joint_eig_separates_with_second_operator() {
        let a = diag(&[1.0, 1.0, 2.0]);
        let b = diag(&[3.0, 4.0, 5.0]);
        let je = joint_eig(&[a.clone()], &Mixer::new(1));
        assert_eq!(je.groups.iter().filter(|g| g.len() == 2).count(), 1);
        let je = joint_eig(&[a, b], &Mixer::new(1));
        assert!(je.is_simple());
    }

    #[test]
    fn constant_family_is_identity_transport() {
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -0.2, 0.9);
        let q: DMatrix<f64> = DMatrix::from_fn(3, 3, |i, j| rot[(i, j)]);
        let a = &q * diag(&[1.0, 2.0, 3.0]) * q.transpose();
        let family = |_: f64| vec![a.clone()];
        let start = joint_eig(&family(1.0), &Mixer::new(3)).vectors;
        let (end, d) = track("const", &start, &family, &log_grid(1.0, 1e-2, 5), &Mixer::new(3), &TrackSettings::default(), None).unwrap();
        for j in 0..3 {
            assert!((end.column(j).dot(&start.column(j)) - 1.0).abs() < 1e-12);
        }
        assert_eq!(d.bisections, 0);
    }

    #[test]
    fn avoided_crossing_is_followed() {
        // eigenlines rotate by a quarter turn through a narrow avoided crossing
        let family = |u: f64| {
            let x = u.ln();
            vec![DMatrix::from_row_slice(2, 2, &[x, 0.05, 0.05, -x])]
        };
        let grid = log_grid(10.0, 0.1, 3);
        let start = joint_eig(&family(10.0), &Mixer::new(0)).vectors;
        let (end, d) = track("ac", &start, &family, &grid, &Mixer::new(0), &TrackSettings::default(), None).unwrap();
        assert!(d.bisections > 0);
        // the branch that started on e1 ends on e2
        let k = if start[(0, 0)].abs() > 0.9 { 0 } else { 1 };
        assert!(end[(1, k)].abs() > 0.99);
    }

    #[test]
    fn transport_respects_degenerate_groups() {
        let je = JointEigen { vectors: DMatrix::identity(3, 3), groups: vec![vec![0, 1], vec![2]], min_gap: 0.0 };
        let s = 0.5f64.sqrt();
        let old = DMatrix::from_row_slice(3, 3, &[s, -s, 0.0, s, s, 0.0, 0.0, 0.0, 1.0]);
        let t = transport(&old, &je);
        assert!((t.min_overlap() - 1.0).abs() < 1e-12);
        assert_eq!(t.group_of, vec![0, 0, 1]);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e3, 1e-3, 4);
        assert_eq!(g.len(), 25);
        assert!((g[0] - 1e3).abs() < 1e-9 && (g[24] - 1e-3).abs() < 1e-15);
    }
}
