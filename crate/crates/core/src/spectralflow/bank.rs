//! Dense orthonormal-basis matrices of the operators used by the flows.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liealg::{commutator, expr, rat_from_f64, LinearOperator, Op, WeightSpaceBasis};

/// Building blocks of every family on one basis, as symmetric matrices in
/// the orthonormal monomial basis.
pub struct OperatorBank {
    pub basis: Arc<WeightSpaceBasis>,
    /// `local[i][a]`: diagonal of `E_ii^(a)`.
    local: Vec<Vec<DVector<f64>>>,
    kappa: Vec<Vec<Option<DMatrix<f64>>>>,
    dual_kappa: Vec<Vec<Option<DMatrix<f64>>>>,
    jm: Vec<DMatrix<f64>>,
    dual_jm: Vec<DMatrix<f64>>,
    cartan: Vec<DMatrix<f64>>,
    casimir: Vec<[DMatrix<f64>; 2]>,
    dual_casimir: Vec<[DMatrix<f64>; 2]>,
    /// Cubic Casimirs of the corners of size at least 3.
    cubic: Vec<DMatrix<f64>>,
    dual_cubic: Vec<DMatrix<f64>>,
}

fn dense(basis: &Arc<WeightSpaceBasis>, op: &Op<f64>) -> Result<DMatrix<f64>> {
    let mut m = LinearOperator::build(basis, op)?.to_dense_orthonormal();
    let t = m.transpose();
    m += t;
    m *= 0.5;
    Ok(m)
}

enum Slot {
    Kappa(usize, usize),
    DualKappa(usize, usize),
    Jm(usize),
    DualJm(usize),
    Cas(usize, u8),
    DualCas(usize, u8),
}

impl OperatorBank {
    pub fn new(basis: &Arc<WeightSpaceBasis>) -> Result<Self> {
        let (r, n) = (basis.r, basis.n);
        let mut slots = Vec::new();
        for i in 0..r {
            for j in i + 1..r {
                slots.push(Slot::Kappa(i, j));
            }
            slots.push(Slot::Cas(i, 1));
            slots.push(Slot::Cas(i, 2));
            if i >= 2 {
                slots.push(Slot::Cas(i, 3));
            }
            if i > 0 {
                slots.push(Slot::DualJm(i));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                slots.push(Slot::DualKappa(a, b));
            }
            slots.push(Slot::DualCas(a, 1));
            slots.push(Slot::DualCas(a, 2));
            if a >= 2 {
                slots.push(Slot::DualCas(a, 3));
            }
            if a > 0 {
                slots.push(Slot::Jm(a));
            }
        }
        let built: Vec<Result<DMatrix<f64>>> = slots
            .par_iter()
            .map(|s| {
                let op = match *s {
                    Slot::Kappa(i, j) => expr::kappa(i, j),
                    Slot::DualKappa(a, b) => expr::dual_kappa(a, b),
                    Slot::Jm(a) => expr::jm(r, a),
                    Slot::DualJm(i) => expr::dual_jm(n, i),
                    Slot::Cas(i, d) => expr::casimir(i, d, None),
                    Slot::DualCas(a, d) => expr::dual_casimir(a, d),
                };
                dense(basis, &op)
            })
            .collect();
        let d = basis.dim();
        let mut bank = OperatorBank {
            basis: basis.clone(),
            local: (0..r)
                .map(|i| {
                    (0..n)
                        .map(|a| DVector::from_iterator(d, basis.monomials().iter().map(|m| m.get(i, a) as f64)))
                        .collect()
                })
                .collect(),
            kappa: vec![vec![None; r]; r],
            dual_kappa: vec![vec![None; n]; n],
            jm: Vec::new(),
            dual_jm: Vec::new(),
            cartan: Vec::new(),
            casimir: Vec::new(),
            dual_casimir: Vec::new(),
            cubic: Vec::new(),
            dual_cubic: Vec::new(),
        };
        let mut cas: Vec<Vec<DMatrix<f64>>> = vec![Vec::new(); r];
        let mut dcas: Vec<Vec<DMatrix<f64>>> = vec![Vec::new(); n];
        for (s, m) in slots.iter().zip(built) {
            let m = m?;
            match *s {
                Slot::Kappa(i, j) => {
                    bank.kappa[i][j] = Some(m.clone());
                    bank.kappa[j][i] = Some(m);
                }
                Slot::DualKappa(a, b) => {
                    bank.dual_kappa[a][b] = Some(m.clone());
                    bank.dual_kappa[b][a] = Some(m);
                }
                Slot::Jm(_) => bank.jm.push(m),
                Slot::DualJm(_) => bank.dual_jm.push(m),
                Slot::Cas(_, 3) => bank.cubic.push(m),
                Slot::DualCas(_, 3) => bank.dual_cubic.push(m),
                Slot::Cas(i, _) => cas[i].push(m),
                Slot::DualCas(a, _) => dcas[a].push(m),
            }
        }
        bank.casimir = cas.into_iter().map(|v| [v[0].clone(), v[1].clone()]).collect();
        bank.dual_casimir = dcas.into_iter().map(|v| [v[0].clone(), v[1].clone()]).collect();
        bank.cartan = (0..r)
            .map(|i| {
                let mut diag = DVector::zeros(d);
                for a in 0..n {
                    diag += &bank.local[i][a];
                }
                DMatrix::from_diagonal(&diag)
            })
            .collect();
        Ok(bank)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `nabla_i(z, q)`, 0-based `i`.
    pub fn nabla(&self, i: usize, z: &[f64], q: &[f64]) -> DMatrix<f64> {
        let mut diag = DVector::zeros(self.dim());
        for (a, za) in z.iter().enumerate() {
            if *za != 0.0 {
                diag.axpy(*za, &self.local[i][a], 1.0);
            }
        }
        let mut m = DMatrix::from_diagonal(&diag);
        for (j, qj) in q.iter().enumerate() {
            if let Some(k) = &self.kappa[i][j] {
                m += k / (q[i] - qj);
            }
        }
        m
    }

    /// The `gl_n`-side operator `sum_i q_i E_ii^(a) + sum_b kappa'_ab/(z_a - z_b)`.
    pub fn dual_nabla(&self, a: usize, q: &[f64], z: &[f64]) -> DMatrix<f64> {
        let mut diag = DVector::zeros(self.dim());
        for (i, qi) in q.iter().enumerate() {
            if *qi != 0.0 {
                diag.axpy(*qi, &self.local[i][a], 1.0);
            }
        }
        let mut m = DMatrix::from_diagonal(&diag);
        for (b, zb) in z.iter().enumerate() {
            if let Some(k) = &self.dual_kappa[a][b] {
                m += k / (z[a] - zb);
            }
        }
        m
    }

    /// All `nabla_i`, all dual operators and the `gl_r` Cartan.
    pub fn gaudin_family(&self, z: &[f64], q: &[f64]) -> Vec<DMatrix<f64>> {
        let mut ops: Vec<DMatrix<f64>> = (0..self.basis.r).map(|i| self.nabla(i, z, q)).collect();
        ops.extend((0..self.basis.n).map(|a| self.dual_nabla(a, q, z)));
        ops.extend(self.cartan.iter().cloned());
        ops
    }

    /// `nabla_i(0, q)` for all `i`.
    pub fn limit_q(&self, q: &[f64]) -> Vec<DMatrix<f64>> {
        let zero = vec![0.0; self.basis.n];
        (0..self.basis.r).map(|i| self.nabla(i, &zero, q)).collect()
    }

    /// The dual operators at `q = 0`.
    pub fn limit_z(&self, z: &[f64]) -> Vec<DMatrix<f64>> {
        let zero = vec![0.0; self.basis.r];
        (0..self.basis.n).map(|a| self.dual_nabla(a, &zero, z)).collect()
    }

    pub fn cartan(&self) -> &[DMatrix<f64>] {
        &self.cartan
    }

    pub fn jm(&self) -> &[DMatrix<f64>] {
        &self.jm
    }

    pub fn dual_jm(&self) -> &[DMatrix<f64>] {
        &self.dual_jm
    }

    /// `[C_1^(1), ..., C_r^(1), C_1^(2), ..., C_r^(2)]`.
    pub fn gt(&self) -> Vec<DMatrix<f64>> {
        let mut v: Vec<DMatrix<f64>> = self.casimir.iter().map(|c| c[0].clone()).collect();
        v.extend(self.casimir.iter().map(|c| c[1].clone()));
        v
    }

    /// Dual nested Casimirs in the same layout as [`Self::gt`].
    pub fn dual_gt(&self) -> Vec<DMatrix<f64>> {
        let mut v: Vec<DMatrix<f64>> = self.dual_casimir.iter().map(|c| c[0].clone()).collect();
        v.extend(self.dual_casimir.iter().map(|c| c[1].clone()));
        v
    }

    /// Cubic nested Casimirs for the corners `gl_3, ..., gl_r`.
    pub fn gt_cubic(&self) -> &[DMatrix<f64>] {
        &self.cubic
    }

    pub fn dual_gt_cubic(&self) -> &[DMatrix<f64>] {
        &self.dual_cubic
    }

    /// Diagonals of the per-factor Cartan operators, `[i][a]`.
    pub fn local_cartan(&self) -> &[Vec<DVector<f64>>] {
        &self.local
    }
}

/// Exact check that the full Gaudin family commutes at a rational point
/// close to `(z, q)`.
pub fn exact_precheck(basis: &Arc<WeightSpaceBasis>, z: &[f64], q: &[f64]) -> Result<()> {
    let zr: Vec<BigRational> = z.iter().map(|&x| rat_from_f64(x)).collect::<Result<_>>()?;
    let qr: Vec<BigRational> = q.iter().map(|&x| rat_from_f64(x)).collect::<Result<_>>()?;
    let mut ops: Vec<LinearOperator<BigRational>> = Vec::new();
    for i in 0..basis.r {
        ops.push(LinearOperator::build(basis, &expr::nabla(i, &zr, &qr)?)?);
    }
    for a in 0..basis.n {
        ops.push(LinearOperator::build(basis, &expr::dual_nabla(a, &qr, &zr)?)?);
    }
    for (x, a) in ops.iter().enumerate() {
        for b in &ops[x + 1..] {
            if !commutator(a, b)?.is_zero() {
                return Err(Error::NonCommuting(format!("family members {x} and later fail to commute exactly")));
            }
        }
    }
    Ok(())
}
