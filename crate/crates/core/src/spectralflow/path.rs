use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::engine::log_grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    /// `z_i(t) = 2^(1-i) z_i t^(n-i+1) (1+t^2)^(i-1)`, through `z` at `t = 1`.
    Collision,
    /// `z_i(t) = t^(n-i+1) (1+t^2)^(i-1)`.
    CollisionUnit,
    /// `z(t) = t z`.
    StraightToZero,
    /// `q(t) = (q_1 t^(r-1), ..., q_r)`.
    QRescale,
    /// Scaling `s z` with `s = (1-t)/t`; the flow parameter is `s`.
    CmGamma,
}

/// A one-parameter family of points for one parameter slot. The flow
/// parameter `u` is always positive and grids are log-uniform in `u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSpec {
    pub kind: PathKind,
    pub base: Vec<f64>,
    /// First and last flow parameter.
    pub start: f64,
    pub end: f64,
    pub points_per_decade: usize,
}

fn check_positive_increasing(base: &[f64]) -> Result<()> {
    if base.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return invalid(format!("path base {base:?} must be positive"));
    }
    if base.windows(2).any(|w| w[0] >= w[1]) {
        return invalid(format!("path base {base:?} must be strictly increasing"));
    }
    Ok(())
}

/// The through-point collision path of length `n` passing `base_z` at `t = 1`.
pub fn collision_path(n: usize, base_z: &[f64]) -> Result<PathSpec> {
    if base_z.len() != n {
        return invalid(format!("base has {} entries, expected {n}", base_z.len()));
    }
    check_positive_increasing(base_z)?;
    Ok(PathSpec { kind: PathKind::Collision, base: base_z.to_vec(), start: 1.0, end: 1e-3, points_per_decade: 20 })
}

/// The collision path with unit base.
pub fn collision_path_unit(n: usize) -> PathSpec {
    PathSpec { kind: PathKind::CollisionUnit, base: vec![1.0; n], start: 1.0, end: 1e-3, points_per_decade: 20 }
}

pub fn straight_path(base: &[f64]) -> PathSpec {
    PathSpec { kind: PathKind::StraightToZero, base: base.to_vec(), start: 1.0, end: 1e-5, points_per_decade: 20 }
}

/// `q(s) = (q_1 s^(r-1), ..., q_r)`; `q` must be positive and increasing.
pub fn q_rescale_path(q: &[f64]) -> Result<PathSpec> {
    check_positive_increasing(q)?;
    Ok(PathSpec { kind: PathKind::QRescale, base: q.to_vec(), start: 1.0, end: 1e-4, points_per_decade: 20 })
}

impl PathSpec {
    pub fn with_range(mut self, start: f64, end: f64) -> Self {
        self.start = start;
        self.end = end;
        self
    }

    pub fn with_density(mut self, points_per_decade: usize) -> Self {
        self.points_per_decade = points_per_decade;
        self
    }

    /// The moving point at flow parameter `u`.
    pub fn point(&self, u: f64) -> Vec<f64> {
        let n = self.base.len();
        match self.kind {
            PathKind::Collision | PathKind::CollisionUnit => (0..n)
                .map(|i| {
                    let scale = if self.kind == PathKind::Collision { self.base[i] * 2f64.powi(-(i as i32)) } else { 1.0 };
                    scale * u.powi((n - i) as i32) * (1.0 + u * u).powi(i as i32)
                })
                .collect(),
            PathKind::StraightToZero | PathKind::CmGamma => self.base.iter().map(|x| x * u).collect(),
            PathKind::QRescale => (0..n).map(|i| self.base[i] * u.powi((n - 1 - i) as i32)).collect(),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        log_grid(self.start, self.end, self.points_per_decade)
    }

    /// Checks on the grid that points stay strictly increasing, tend to
    /// zero, and that consecutive ratios `z_i / z_(i+1)` decrease towards
    /// the small-parameter end.
    pub fn satisfies_collision_properties(&self) -> bool {
        let mut grid = self.grid();
        grid.sort_by(f64::total_cmp);
        let pts: Vec<Vec<f64>> = grid.iter().map(|&u| self.point(u)).collect();
        let ordered = pts.iter().all(|p| p.windows(2).all(|w| w[0] < w[1]));
        let small = self.point(grid[0].min(1e-6));
        let big_norm = self.point(1.0).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let limit = small.iter().all(|x| x.abs() < 1e-3 * big_norm.max(1.0));
        let ratios_shrink = pts.windows(2).all(|w| {
            (0..w[0].len().saturating_sub(1)).all(|i| w[0][i] / w[0][i + 1] <= w[1][i] / w[1][i + 1] * (1.0 + 1e-12))
        });
        let asymptotic = {
            let p = self.point(1e-6);
            (0..p.len().saturating_sub(1)).all(|i| p[i] / p[i + 1] < 1e-5)
        };
        ordered && limit && ratios_shrink && asymptotic
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collision_examples() {
        let p = collision_path(2, &[1.0, 2.0]).unwrap();
        assert_eq!(p.point(1.0), vec![1.0, 2.0]);
        assert_eq!(p.point(2.0), vec![4.0, 10.0]);
        let small = p.point(1e-4);
        assert!(small[0] / small[1] < 1e-3);
        assert!(p.satisfies_collision_properties());
        assert!(collision_path_unit(3).satisfies_collision_properties());
        assert!(collision_path(2, &[0.0, 1.0]).is_err());
        assert!(!straight_path(&[1.0, 2.0]).satisfies_collision_properties());
    }

    #[test]
    fn q_rescale_schedule() {
        let p = q_rescale_path(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.point(0.5), vec![0.25, 1.0, 3.0]);
    }
}
