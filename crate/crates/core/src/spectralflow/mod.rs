//! Continuation of joint eigenlines of the Gaudin family from the monomial
//! regime (`z -> infinity`) to the degenerate regimes `z -> 0` and
//! `q -> 0`, and extraction of the tableaux read off at the end.
//!
//! Each eigenline is labelled at infinity by the monomial `x^A` it tends
//! to. Following it to `z = 0` and then rescaling `q` lands on a
//! Gelfand-Tsetlin vector of `gl_r`, which gives the tableau `S(A)`; the
//! mirror route `q -> 0`, then rescaling `z`, gives `T(A)` for `gl_n`.

pub mod bank;
pub mod decode;
pub mod engine;
pub mod path;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{rsk, NatMatrix, SemistandardTableau};
use crate::error::{invalid, Error, Result};
use crate::liealg::{basis_for, WeightSpaceBasis};

pub use bank::{exact_precheck, OperatorBank};
pub use decode::{decode_gt, decode_gt_with_cubic};
pub use engine::{
    joint_eig, log_grid, rayleigh, track, transport, JointEigen, LegDiagnostics, Mixer, TraceRow, TrackSettings, Transport,
};
pub use path::{collision_path, collision_path_unit, q_rescale_path, straight_path, PathKind, PathSpec};

/// Knobs of a flow run. Defaults follow the documented step control.
#[derive(Clone, Debug, Serialize)]
pub struct FlowOptions {
    pub seed: u64,
    pub points_per_decade: usize,
    pub track: TrackSettings,
    /// Coalescence radius for endpoint eigenvalue vectors.
    pub cluster_tol: f64,
    /// Required ratio of the smallest inter-class distance to the largest
    /// intra-class distance.
    pub gap_ratio: f64,
    pub start_gap_min: f64,
    pub infinity_mixing: f64,
    /// Path sending `z` to zero.
    pub z_path: PathKind,
    /// Path sending `q` to zero.
    pub q_path: PathKind,
    pub collision_end: f64,
    pub straight_end: f64,
    pub rescale_end: f64,
    pub handoff_threshold: f64,
    pub exact_precheck: bool,
    #[serde(skip)]
    pub record_traces: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            seed: 0,
            points_per_decade: 16,
            track: TrackSettings::default(),
            cluster_tol: 1e-6,
            gap_ratio: 1e3,
            start_gap_min: 1e-6,
            infinity_mixing: 1e-8,
            z_path: PathKind::Collision,
            q_path: PathKind::Collision,
            collision_end: 1e-3,
            straight_end: 1e-5,
            rescale_end: 1e-4,
            handoff_threshold: 0.9,
            exact_precheck: true,
            record_traces: false,
        }
    }
}

/// Shifts a vector so that its first entry is at least one. Gaudin
/// families only see differences of `q`, and a shift of `z` adds a Cartan
/// term, so joint eigenlines are unchanged.
pub fn positive_shift(x: &[f64]) -> (Vec<f64>, f64) {
    let s = match x.first() {
        Some(&x0) if x0 < 1.0 => 1.0 - x0,
        _ => 0.0,
    };
    (x.iter().map(|v| v + s).collect(), s)
}

/// Off-diagonal mass of the combined operator relative to its diagonal,
/// in the monomial basis.
pub fn monomial_mixing(ops: &[DMatrix<f64>], mixer: &Mixer) -> f64 {
    let Some(l) = engine::combine(ops, mixer) else {
        return 0.0;
    };
    let diag = l.diagonal().norm();
    let n = l.nrows();
    let off = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| l[(i, j)].powi(2)).sum::<f64>().sqrt();
    if off == 0.0 {
        0.0
    } else {
        off / diag
    }
}

/// Smallest power of two `u >= 1` at which the monomial basis diagonalizes
/// the family up to `tol`.
pub fn truncate_infinity(family: &dyn Fn(f64) -> Vec<DMatrix<f64>>, mixer: &Mixer, tol: f64) -> Result<f64> {
    let mut u = 1.0;
    while u <= 1e12 {
        if monomial_mixing(&family(u), mixer) < tol {
            return Ok(u);
        }
        u *= 2.0;
    }
    Err(Error::Continuation("monomial regime not reached for u <= 1e12".into()))
}

/// Reads `A_ia` off Rayleigh quotients of the per-factor Cartan operators.
pub fn labels_at_infinity(bank: &OperatorBank, vectors: &DMatrix<f64>) -> Result<Vec<NatMatrix>> {
    let basis = &bank.basis;
    let mut labels = Vec::with_capacity(vectors.ncols());
    for j in 0..vectors.ncols() {
        let v = vectors.column(j);
        let mut a = NatMatrix::zeros(basis.r, basis.n);
        for (i, row) in bank.local_cartan().iter().enumerate() {
            for (col, diag) in row.iter().enumerate() {
                let x: f64 = v.iter().zip(diag.iter()).map(|(c, d)| c * c * d).sum();
                let rounded = x.round();
                if (x - rounded).abs() > 1e-6 {
                    return Err(Error::Inconclusive {
                        reason: format!("Cartan eigenvalue {x} at infinity is not an integer"),
                        suggested_tol: (x - rounded).abs(),
                    });
                }
                a.set(i, col, rounded as u32);
            }
        }
        labels.push(a);
    }
    let mut sorted = labels.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != labels.len() || sorted.iter().any(|m| basis.position(m).is_none()) {
        return Err(Error::Continuation("labels at infinity are not a bijection onto the monomials".into()));
    }
    Ok(labels)
}

/// Groups endpoint eigenvalue vectors by single linkage at radius `tol`
/// and validates the separation: the largest intra-class distance times
/// `gap_ratio` must stay below the smallest inter-class distance.
pub fn coalescence_classes(values: &[Vec<f64>], tol: f64, gap_ratio: f64) -> Result<Vec<Vec<usize>>> {
    let m = values.len();
    let dist = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).fold(0.0f64, |d, (x, y)| d.max((x - y).abs()));
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for i in 0..m {
        for j in i + 1..m {
            if dist(&values[i], &values[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..m).map(|i| find(&mut parent, i)).collect();
    let (mut d_in, mut d_out) = (0.0f64, f64::INFINITY);
    for i in 0..m {
        for j in i + 1..m {
            let d = dist(&values[i], &values[j]);
            if roots[i] == roots[j] {
                d_in = d_in.max(d);
            } else {
                d_out = d_out.min(d);
            }
        }
    }
    if d_in > 0.0 && d_in * gap_ratio >= d_out {
        return Err(Error::Inconclusive {
            reason: format!("endpoint clusters are not separated: intra {d_in:e}, inter {d_out:e}"),
            suggested_tol: (d_in * d_out).sqrt(),
        });
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_pos: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        match root_pos[roots[i]] {
            Some(c) => classes[c].push(i),
            None => {
                root_pos[roots[i]] = Some(classes.len());
                classes.push(vec![i]);
            }
        }
    }
    Ok(classes)
}

/// Finds the start of a flow in the monomial regime, aligns the monomial
/// basis with the exact eigenvectors there and labels them. Coefficients
/// are redrawn while the combined spectrum is nearly degenerate.
pub fn start_at_infinity(
    bank: &OperatorBank,
    family: &dyn Fn(f64) -> Vec<DMatrix<f64>>,
    opts: &FlowOptions,
    mixer: &mut Mixer,
) -> Result<(f64, DMatrix<f64>, Vec<NatMatrix>)> {
    let u = truncate_infinity(family, mixer, opts.infinity_mixing)?;
    let mut redraws = 0;
    loop {
        let je = joint_eig(&family(u), mixer);
        if je.min_gap >= opts.start_gap_min || redraws >= 8 {
            let d = bank.dim();
            let v = transport(&DMatrix::identity(d, d), &je).vectors;
            let labels = labels_at_infinity(bank, &v)?;
            return Ok((u, v, labels));
        }
        mixer.redraw();
        redraws += 1;
    }
}

/// Operators that, together with the `z = 0` family, separate the
/// eigenlines arriving along a `z` path of the given kind.
pub fn z_limit_companions(bank: &OperatorBank, kind: PathKind, z: &[f64]) -> Vec<DMatrix<f64>> {
    let mut m = match kind {
        PathKind::StraightToZero | PathKind::CmGamma => bank.limit_z(z),
        _ => bank.jm().to_vec(),
    };
    m.extend(bank.cartan().iter().cloned());
    m
}

/// The mirror of [`z_limit_companions`] for `q` paths.
pub fn q_limit_companions(bank: &OperatorBank, kind: PathKind, q: &[f64]) -> Vec<DMatrix<f64>> {
    let mut m = match kind {
        PathKind::StraightToZero | PathKind::CmGamma => bank.limit_q(q),
        _ => bank.dual_jm().to_vec(),
    };
    m.extend(bank.cartan().iter().cloned());
    m
}

/// Diagnostics of a degenerate endpoint handoff.
#[derive(Clone, Debug, Serialize)]
pub struct HandoffDiagnostics {
    pub name: String,
    pub min_overlap: f64,
    pub eigenspaces: usize,
    pub largest_eigenspace: usize,
}

/// Joint eigenvectors of `ops` matched to `v`, failing below `threshold`.
pub fn endpoint_handoff(name: &str, v: &DMatrix<f64>, ops: &[DMatrix<f64>], mixer: &Mixer, threshold: f64) -> Result<(Transport, HandoffDiagnostics)> {
    let je = joint_eig(ops, mixer);
    let tr = transport(v, &je);
    let diag = HandoffDiagnostics {
        name: name.to_string(),
        min_overlap: tr.min_overlap(),
        eigenspaces: tr.groups.len(),
        largest_eigenspace: tr.groups.iter().map(Vec::len).max().unwrap_or(0),
    };
    if diag.min_overlap < threshold {
        return Err(Error::Continuation(format!(
            "{name}: endpoint handoff overlap {:.4} below {threshold}",
            diag.min_overlap
        )));
    }
    Ok((tr, diag))
}

/// Everything a flow run records besides the branches.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FlowDiagnostics {
    pub t_max: Vec<f64>,
    pub legs: Vec<LegDiagnostics>,
    pub handoffs: Vec<HandoffDiagnostics>,
    pub coefficient_redraws: u64,
    pub z_shift: f64,
    pub q_shift: f64,
    pub q_jitter: Option<Vec<f64>>,
    /// Largest distance from an endpoint eigenvalue to the spectrum of the
    /// exact limiting operator.
    pub endpoint_residual: f64,
    pub min_overlap: f64,
}

/// One eigenline with its label and extracted tableaux.
#[derive(Clone, Debug, Serialize)]
pub struct FlowBranch {
    pub label_matrix: NatMatrix,
    pub endpoint_eigenvalues: Vec<f64>,
    #[serde(rename = "S")]
    pub s: SemistandardTableau,
    #[serde(rename = "T")]
    pub t: SemistandardTableau,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowResult {
    pub dim: usize,
    pub branches: Vec<FlowBranch>,
    /// Labels grouped by their eigenvalues at `z = 0`.
    pub classes: Vec<Vec<NatMatrix>>,
    pub diagnostics: FlowDiagnostics,
    #[serde(skip)]
    pub traces: Vec<TraceRow>,
}

impl FlowResult {
    /// Branches with `rsk(A) = (T(A), S(A))`: the tableau read on the
    /// `gl_n` side is the insertion tableau (content the column sums) and
    /// the one read on the `gl_r` side is the recording tableau.
    pub fn rsk_agreements(&self) -> usize {
        self.branches.iter().filter(|b| rsk(&b.label_matrix) == (b.t.clone(), b.s.clone())).count()
    }

    /// Branches where `S(A)` equals the insertion tableau literally.
    pub fn literal_s_equals_p(&self) -> usize {
        self.branches.iter().filter(|b| rsk(&b.label_matrix).0 == b.s).count()
    }

    pub fn rsk_agreement(&self) -> bool {
        self.rsk_agreements() == self.branches.len()
    }
}

struct Run<'a> {
    bank: &'a OperatorBank,
    opts: &'a FlowOptions,
    mixer: Mixer,
    diag: FlowDiagnostics,
    traces: Vec<TraceRow>,
}

impl<'a> Run<'a> {
    fn track(&mut self, name: &str, start: &DMatrix<f64>, family: &dyn Fn(f64) -> Vec<DMatrix<f64>>, grid: &[f64]) -> Result<DMatrix<f64>> {
        let traces = if self.opts.record_traces { Some(&mut self.traces) } else { None };
        let (v, leg) = track(name, start, family, grid, &self.mixer, &self.opts.track, traces)?;
        self.diag.min_overlap = self.diag.min_overlap.min(leg.min_overlap);
        self.diag.legs.push(leg);
        Ok(v)
    }

    fn handoff(&mut self, name: &str, v: &DMatrix<f64>, ops: &[DMatrix<f64>]) -> Result<Transport> {
        let (tr, d) = endpoint_handoff(name, v, ops, &self.mixer, self.opts.handoff_threshold)?;
        self.diag.handoffs.push(d);
        Ok(tr)
    }

    fn start_at_infinity(&mut self, family: &dyn Fn(f64) -> Vec<DMatrix<f64>>) -> Result<(f64, DMatrix<f64>, Vec<NatMatrix>)> {
        let start = start_at_infinity(self.bank, family, self.opts, &mut self.mixer)?;
        self.diag.t_max.push(start.0);
        self.diag.coefficient_redraws = self.mixer.redraws();
        Ok(start)
    }

    fn z_path(&self, z: &[f64], for_t_leg: bool) -> Result<(PathSpec, f64)> {
        let n = self.bank.basis.n;
        let ppd = self.opts.points_per_decade;
        let (zpos, _) = positive_shift(z);
        let p = match self.opts.z_path {
            PathKind::Collision => collision_path(n, &zpos)?.with_range(1.0, self.opts.collision_end),
            PathKind::CollisionUnit if !for_t_leg => collision_path_unit(n).with_range(1.0, self.opts.collision_end),
            PathKind::CollisionUnit => collision_path(n, &zpos)?.with_range(1.0, self.opts.collision_end),
            PathKind::StraightToZero => straight_path(z).with_range(1.0, self.opts.straight_end),
            other => return invalid(format!("{other:?} cannot send z to zero")),
        };
        let end = p.end;
        Ok((p.with_density(ppd), end))
    }

    fn s_companions(&self, z: &[f64]) -> Vec<DMatrix<f64>> {
        z_limit_companions(self.bank, self.opts.z_path, z)
    }

    fn t_companions(&self, q: &[f64]) -> Vec<DMatrix<f64>> {
        q_limit_companions(self.bank, self.opts.q_path, q)
    }

    fn s_leg(&mut self, z: &[f64], q: &[f64]) -> Result<(Vec<NatMatrix>, Vec<Vec<f64>>, Vec<SemistandardTableau>)> {
        let bank = self.bank;
        let r = bank.basis.r;
        let (zp, end) = self.z_path(z, false)?;
        let fam = |u: f64| bank.gaudin_family(&zp.point(u), q);
        let (t_max, v0, labels) = self.start_at_infinity(&fam)?;
        let grid = log_grid(t_max, end, self.opts.points_per_decade);
        let v = self.track("S: z to 0", &v0, &fam, &grid)?;

        let companions = self.s_companions(z);
        let mut limit = bank.limit_q(q);
        limit.extend(companions.iter().cloned());
        let tr = self.handoff("S: z = 0", &v, &limit)?;
        let endpoint = rayleigh(&tr.vectors, &bank.limit_q(q));
        self.check_endpoint(&endpoint, &bank.limit_q(q));

        let (qpos, _) = positive_shift(q);
        let qp = q_rescale_path(&qpos)?.with_range(1.0, self.opts.rescale_end).with_density(self.opts.points_per_decade);
        let fam_k = |s: f64| {
            let mut f = bank.limit_q(&qp.point(s));
            f.extend(companions.iter().cloned());
            f
        };
        let v2 = self.track("S: q rescale", &tr.vectors, &fam_k, &qp.grid())?;
        let mut gt = bank.gt();
        gt.extend(bank.gt_cubic().iter().cloned());
        let mut gt_family = gt.clone();
        gt_family.extend(companions.iter().cloned());
        let tr2 = self.handoff("S: Gelfand-Tsetlin", &v2, &gt_family)?;
        let tabs = rayleigh(&tr2.vectors, &gt).iter().map(|v| decode_levels(v, r)).collect::<Result<Vec<_>>>()?;
        Ok((labels, endpoint, tabs))
    }

    fn t_leg(&mut self, z: &[f64], q: &[f64]) -> Result<(Vec<NatMatrix>, Vec<SemistandardTableau>)> {
        let bank = self.bank;
        let (r, n) = (bank.basis.r, bank.basis.n);
        let (zp, _) = self.z_path(z, true)?;
        let zb = zp.point(1.0);
        let fam = |u: f64| bank.gaudin_family(&zp.point(u), q);
        let (t_max, v0, labels) = self.start_at_infinity(&fam)?;
        let grid = log_grid(t_max, 1.0, self.opts.points_per_decade);
        let v = self.track("T: z to base", &v0, &fam, &grid)?;

        let (qpos, _) = positive_shift(q);
        let qp = match self.opts.q_path {
            PathKind::Collision | PathKind::CollisionUnit => collision_path(r, &qpos)?.with_range(1.0, self.opts.collision_end),
            PathKind::StraightToZero => straight_path(q).with_range(1.0, self.opts.straight_end),
            other => return invalid(format!("{other:?} cannot send q to zero")),
        }
        .with_density(self.opts.points_per_decade);
        let fam_q = |u: f64| bank.gaudin_family(&zb, &qp.point(u));
        let v1 = self.track("T: q to 0", &v, &fam_q, &qp.grid())?;

        let companions = self.t_companions(q);
        let mut limit = bank.limit_z(&zb);
        limit.extend(companions.iter().cloned());
        let tr = self.handoff("T: q = 0", &v1, &limit)?;

        let (zpos, _) = positive_shift(&zb);
        let zr = q_rescale_path(&zpos)?.with_range(1.0, self.opts.rescale_end).with_density(self.opts.points_per_decade);
        let fam_k = |s: f64| {
            let mut f = bank.limit_z(&zr.point(s));
            f.extend(companions.iter().cloned());
            f
        };
        let v2 = self.track("T: z rescale", &tr.vectors, &fam_k, &zr.grid())?;
        let mut gt = bank.dual_gt();
        gt.extend(bank.dual_gt_cubic().iter().cloned());
        let mut gt_family = gt.clone();
        gt_family.extend(companions.iter().cloned());
        let tr2 = self.handoff("T: Gelfand-Tsetlin", &v2, &gt_family)?;
        let tabs = rayleigh(&tr2.vectors, &gt).iter().map(|v| decode_levels(v, n)).collect::<Result<Vec<_>>>()?;
        Ok((labels, tabs))
    }

    fn check_endpoint(&mut self, endpoint: &[Vec<f64>], ops: &[DMatrix<f64>]) {
        let spectra: Vec<Vec<f64>> =
            ops.iter().map(|a| SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect()).collect();
        for vals in endpoint {
            for (x, spec) in vals.iter().zip(&spectra) {
                let d = spec.iter().fold(f64::INFINITY, |m, s| m.min((s - x).abs()));
                self.diag.endpoint_residual = self.diag.endpoint_residual.max(d);
            }
        }
    }
}

/// Decodes `[C^(1) x m, C^(2) x m, C^(3) for levels 3..=m]`.
fn decode_levels(v: &[f64], m: usize) -> Result<SemistandardTableau> {
    let cubic: Vec<Option<f64>> = (0..m).map(|i| if i >= 2 { Some(v[2 * m + i - 2]) } else { None }).collect();
    decode_gt_with_cubic(&v[..m], &v[m..2 * m], &cubic)
}

/// Runs both extraction routes on one basis at `(z, q)`.
pub fn run_flow(basis: &Arc<WeightSpaceBasis>, z: &[f64], q: &[f64], opts: &FlowOptions) -> Result<FlowResult> {
    let bank = OperatorBank::new(basis)?;
    run_flow_with_bank(&bank, z, q, opts)
}

fn check_points(basis: &WeightSpaceBasis, z: &[f64], q: &[f64]) -> Result<()> {
    if z.len() != basis.n || q.len() != basis.r {
        return Err(Error::ShapeMismatch(format!("need |z| = {} and |q| = {}", basis.n, basis.r)));
    }
    for (name, v) in [("z", z), ("q", q)] {
        if v.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid(format!("{name} = {v:?} must be strictly increasing"));
        }
    }
    Ok(())
}

/// Largest basis on which the exact commutation precheck runs.
pub const EXACT_PRECHECK_MAX_DIM: usize = 120;

/// [`run_flow`] on a prebuilt bank. Retries with a seeded jitter of `q`
/// (at most `1e-3`) when the first attempt is inconclusive.
pub fn run_flow_with_bank(bank: &OperatorBank, z: &[f64], q: &[f64], opts: &FlowOptions) -> Result<FlowResult> {
    check_points(&bank.basis, z, q)?;
    if opts.exact_precheck && bank.dim() <= EXACT_PRECHECK_MAX_DIM {
        exact_precheck(&bank.basis, z, q)?;
    }
    retry_with_q_jitter(q, opts.seed, |qj, jitter| run_once(bank, z, qj, opts, jitter))
}

/// Runs `f` at `q`; when it fails for numerical reasons, retries twice at
/// `q` plus a seeded jitter of size at most `1e-3`, passing the jitter on.
pub fn retry_with_q_jitter<T>(q: &[f64], seed: u64, f: impl Fn(&[f64], Option<Vec<f64>>) -> Result<T>) -> Result<T> {
    let first = f(q, None);
    match first {
        Err(Error::Continuation(_)) | Err(Error::Inconclusive { .. }) | Err(Error::DecoderAmbiguity(_)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0F_1177E5);
            let mut last = first;
            for _ in 0..2 {
                let jitter: Vec<f64> = (0..q.len()).map(|_| rng.random_range(-1000..=1000) as f64 * 1e-6).collect();
                let qj: Vec<f64> = q.iter().zip(&jitter).map(|(a, b)| a + b).collect();
                if qj.windows(2).any(|w| w[0] >= w[1]) {
                    continue;
                }
                last = f(&qj, Some(jitter));
                if last.is_ok() {
                    return last;
                }
            }
            last
        }
        other => other,
    }
}

fn run_once(bank: &OperatorBank, z: &[f64], q: &[f64], opts: &FlowOptions, jitter: Option<Vec<f64>>) -> Result<FlowResult> {
    let mut run = Run { bank, opts, mixer: Mixer::new(opts.seed), diag: FlowDiagnostics { min_overlap: 1.0, ..Default::default() }, traces: Vec::new() };
    run.diag.z_shift = positive_shift(z).1;
    run.diag.q_shift = positive_shift(q).1;
    run.diag.q_jitter = jitter;
    let (labels_s, endpoint, s_tabs) = run.s_leg(z, q)?;
    let (labels_t, t_tabs) = run.t_leg(z, q)?;
    let dim = bank.dim();
    // both legs start from monomials; pair them by label
    let mut t_by_label = vec![None; dim];
    for (lab, t) in labels_t.iter().zip(t_tabs) {
        t_by_label[bank.basis.position(lab).expect("checked label")] = Some(t);
    }
    let branches: Vec<FlowBranch> = labels_s
        .iter()
        .zip(endpoint.iter())
        .zip(s_tabs)
        .map(|((lab, ep), s)| FlowBranch {
            label_matrix: lab.clone(),
            endpoint_eigenvalues: ep.clone(),
            s,
            t: t_by_label[bank.basis.position(lab).expect("checked label")].clone().expect("every label tracked"),
        })
        .collect();
    let classes = coalescence_classes(&endpoint, opts.cluster_tol, opts.gap_ratio)?
        .into_iter()
        .map(|c| c.into_iter().map(|b| labels_s[b].clone()).collect())
        .collect();
    Ok(FlowResult { dim, branches, classes, diagnostics: run.diag, traces: run.traces })
}

/// A label whose extracted pair disagrees with RSK.
#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub label: NatMatrix,
    #[serde(rename = "S")]
    pub s: SemistandardTableau,
    #[serde(rename = "T")]
    pub t: SemistandardTableau,
    #[serde(rename = "P")]
    pub p: SemistandardTableau,
    #[serde(rename = "Q")]
    pub q: SemistandardTableau,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub k: Vec<u32>,
    pub weight: Option<Vec<u32>>,
    pub dim: usize,
    pub labels_checked: usize,
    pub agreements: usize,
    pub literal_s_equals_p: usize,
    pub shapes_consistent: bool,
    pub min_overlap: f64,
    pub endpoint_residual: f64,
    pub failure: Option<String>,
    /// Set when the failure was numerical rather than a bad input.
    pub inconclusive: bool,
    /// The full flow result when the block succeeded.
    #[serde(skip)]
    pub flow: Option<FlowResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MainTheoremReport {
    pub r: usize,
    pub n: usize,
    pub corpus_size: usize,
    pub agreements: usize,
    pub literal_s_equals_p: usize,
    pub blocks: Vec<BlockReport>,
    pub mismatches: Vec<Mismatch>,
    pub failures: Vec<String>,
}

impl MainTheoremReport {
    pub fn all_agree(&self) -> bool {
        self.failures.is_empty() && self.mismatches.is_empty() && self.agreements == self.corpus_size
    }

    /// True if some block failed for numerical reasons.
    pub fn inconclusive(&self) -> bool {
        self.blocks.iter().any(|b| b.inconclusive)
    }
}

/// A block of the corpus: column sums and optional weight filter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    pub k: Vec<u32>,
    pub weight: Option<Vec<u32>>,
}

/// Blocks covering every `r x n` matrix with entries `<= bound`.
pub fn bounded_corpus(r: usize, n: usize, bound: u32) -> Vec<BlockSpec> {
    let mut ks: Vec<Vec<u32>> = NatMatrix::all_bounded(1, n, bound * r as u32).into_iter().map(|m| m.entries().to_vec()).collect();
    ks.sort();
    ks.into_iter().map(|k| BlockSpec { k, weight: None }).collect()
}

fn default_point(len: usize) -> Vec<f64> {
    (0..len).map(|i| 1.0 + i as f64 + 0.37 * (i * i) as f64).collect()
}

/// Runs the flow on each block and compares with RSK. Only labels whose
/// entries are `<= entry_bound` are counted when a bound is given.
pub fn verify_main_theorem(
    r: usize,
    n: usize,
    blocks: &[BlockSpec],
    entry_bound: Option<u32>,
    z: Option<&[f64]>,
    q: Option<&[f64]>,
    opts: &FlowOptions,
) -> Result<MainTheoremReport> {
    let z = z.map(<[f64]>::to_vec).unwrap_or_else(|| default_point(n));
    let q = q.map(<[f64]>::to_vec).unwrap_or_else(|| default_point(r).iter().map(|x| x * 0.9 - 0.4).collect());
    let results: Vec<(BlockReport, Vec<Mismatch>, usize)> = blocks
        .par_iter()
        .enumerate()
        .map(|(idx, spec)| {
            let mut o = opts.clone();
            o.seed = opts.seed.wrapping_add(idx as u64 * 7919);
            let in_corpus = |a: &NatMatrix| entry_bound.is_none_or(|b| a.entries().iter().all(|&x| x <= b));
            let basis = match basis_for(r, n, &spec.k, spec.weight.as_deref()) {
                Ok(b) => b,
                Err(e) => return (failed_block(spec, 0, &e), Vec::new(), 0),
            };
            let count = basis.monomials().iter().filter(|a| in_corpus(a)).count();
            match run_flow(&basis, &z, &q, &o) {
                Err(e) => (failed_block(spec, basis.dim(), &e), Vec::new(), count),
                Ok(res) => {
                    let mut mism = Vec::new();
                    let (mut agree, mut literal) = (0, 0);
                    let mut shapes = true;
                    for b in res.branches.iter().filter(|b| in_corpus(&b.label_matrix)) {
                        let (p, qq) = rsk(&b.label_matrix);
                        shapes &= b.s.shape() == b.t.shape();
                        if p == b.s {
                            literal += 1;
                        }
                        if p == b.t && qq == b.s {
                            agree += 1;
                        } else {
                            mism.push(Mismatch { label: b.label_matrix.clone(), s: b.s.clone(), t: b.t.clone(), p, q: qq });
                        }
                    }
                    let rep = BlockReport {
                        k: spec.k.clone(),
                        weight: spec.weight.clone(),
                        dim: res.dim,
                        labels_checked: count,
                        agreements: agree,
                        literal_s_equals_p: literal,
                        shapes_consistent: shapes,
                        min_overlap: res.diagnostics.min_overlap,
                        endpoint_residual: res.diagnostics.endpoint_residual,
                        failure: None,
                        inconclusive: false,
                        flow: Some(res),
                    };
                    (rep, mism, count)
                }
            }
        })
        .collect();
    let mut report = MainTheoremReport {
        r,
        n,
        corpus_size: 0,
        agreements: 0,
        literal_s_equals_p: 0,
        blocks: Vec::new(),
        mismatches: Vec::new(),
        failures: Vec::new(),
    };
    for (rep, mism, count) in results {
        report.corpus_size += count;
        report.agreements += rep.agreements;
        report.literal_s_equals_p += rep.literal_s_equals_p;
        if let Some(f) = &rep.failure {
            report.failures.push(format!("k = {:?}: {f}", rep.k));
        }
        report.mismatches.extend(mism);
        report.blocks.push(rep);
    }
    Ok(report)
}

fn failed_block(spec: &BlockSpec, dim: usize, err: &Error) -> BlockReport {
    BlockReport {
        k: spec.k.clone(),
        weight: spec.weight.clone(),
        dim,
        labels_checked: 0,
        agreements: 0,
        literal_s_equals_p: 0,
        shapes_consistent: false,
        min_overlap: 0.0,
        endpoint_residual: f64::NAN,
        failure: Some(err.to_string()),
        inconclusive: err.is_numerical(),
        flow: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coalescence_examples() {
        let v = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert_eq!(coalescence_classes(&v, 1e-6, 1e3).unwrap().len(), 3);
        let v = vec![vec![0.0], vec![1e-9], vec![1.0]];
        assert_eq!(coalescence_classes(&v, 1e-6, 1e3).unwrap(), vec![vec![0, 1], vec![2]]);
        let v = vec![vec![0.0], vec![5e-7], vec![1e-6 + 5e-7 + 1e-9]];
        assert!(matches!(coalescence_classes(&v, 1e-6, 1e3), Err(Error::Inconclusive { .. })));
    }

    #[test]
    fn two_by_two_block() {
        let basis = basis_for(2, 2, &[1, 1], Some(&[1, 1])).unwrap();
        let res = run_flow(&basis, &[1.0, 2.0], &[0.0, 1.0], &FlowOptions::default()).unwrap();
        assert_eq!(res.branches.len(), 2);
        assert!(res.rsk_agreement());
        assert_eq!(res.classes.len(), 2);
        assert!(res.diagnostics.endpoint_residual < 1e-8);
    }

    #[test]
    fn labels_of_symmetric_square() {
        let basis = basis_for(2, 1, &[2], None).unwrap();
        let bank = OperatorBank::new(&basis).unwrap();
        let labels = labels_at_infinity(&bank, &DMatrix::identity(3, 3)).unwrap();
        let cols: Vec<Vec<u32>> = labels.iter().map(|a| a.entries().to_vec()).collect();
        assert_eq!(cols, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn shift_keeps_order() {
        let (v, s) = positive_shift(&[-2.0, 0.5]);
        assert_eq!(v, vec![1.0, 3.5]);
        assert_eq!(s, 3.0);
        assert_eq!(positive_shift(&[2.0, 3.0]).1, 0.0);
    }
}
