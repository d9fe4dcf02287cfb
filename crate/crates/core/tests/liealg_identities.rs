use std::collections::BTreeMap;

use gaudin_rsk::combinatorics::{Partition, SemistandardTableau};
use gaudin_rsk::liealg::*;
use nalgebra::DMatrix;
use num_rational::BigRational;

fn spectrum(m: &DMatrix<f64>) -> BTreeMap<i64, usize> {
    let sym = (m + m.transpose()) * 0.5;
    let mut out = BTreeMap::new();
    for x in sym.symmetric_eigenvalues().iter() {
        let k = x.round();
        assert!((x - k).abs() < 1e-8, "eigenvalue {x} is not an integer");
        *out.entry(k as i64).or_insert(0) += 1;
    }
    out
}

fn contents(t: &SemistandardTableau, n: usize) -> Vec<i64> {
    let mut c = vec![0; n];
    for (i, row) in t.rows().iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            c[x as usize - 1] = j as i64 - i as i64;
        }
    }
    c
}

#[test]
fn jm_operators_have_content_spectrum() {
    for n in 2..=4usize {
        let ones = vec![1; n];
        let basis = basis_for(n, n, &ones, Some(&ones)).unwrap();
        let base = 2 * n as i64;
        let mut combo = DMatrix::zeros(basis.dim(), basis.dim());
        for a in 2..=n {
            let j: LinearOperator<BigRational> = jm(a, &basis).unwrap();
            combo += j.to_f64().to_dense_orthonormal() * (base.pow(a as u32) as f64);
        }
        let mut expected = BTreeMap::new();
        for shape in Partition::all(n as u32, n) {
            let tabs = SemistandardTableau::all_standard(&shape);
            for t in &tabs {
                let c = contents(t, n);
                let key: i64 = (2..=n).map(|a| c[a - 1] * base.pow(a as u32)).sum();
                *expected.entry(key).or_insert(0) += tabs.len();
            }
        }
        assert_eq!(spectrum(&combo), expected, "n = {n}");
    }
}

#[test]
fn quadratic_casimir_multiplicities_match_kostka_numbers() {
    for (r, k) in [(2usize, vec![2u32, 1]), (3, vec![2, 1, 1]), (2, vec![1, 1, 1]), (3, vec![1, 2])] {
        let n = k.len();
        let basis = basis_for(r, n, &k, None).unwrap();
        let c: LinearOperator<BigRational> = nested_casimirs(r, 2, &basis, true).unwrap();
        let total: u32 = k.iter().sum();
        let mut expected = BTreeMap::new();
        for shape in Partition::all(total, r.min(n)) {
            let kostka = SemistandardTableau::all_of_shape(&shape, n as u32).into_iter().filter(|t| t.content(n) == k).count();
            let mult = kostka * shape.num_semistandard_tableaux(r) as usize;
            if mult > 0 {
                *expected.entry(casimir2_eigenvalue(shape.parts(), r)).or_insert(0) += mult;
            }
        }
        assert_eq!(spectrum(&c.to_f64().to_dense_orthonormal()), expected, "r = {r}, k = {k:?}");
    }
}

#[test]
fn actions_commute_exactly() {
    let basis = basis_for(2, 3, &[2, 1, 1], None).unwrap();
    for i in 1..=2 {
        for a in 1..=3 {
            let c: LinearOperator<BigRational> = nested_casimirs(i, 2, &basis, true).unwrap();
            let d: LinearOperator<BigRational> = dual_nested_casimirs(a, 2, &basis).unwrap();
            assert!(commutator(&c, &d).unwrap().is_zero());
        }
    }
}

#[test]
fn gaudin_operators_commute_at_rational_points() {
    let basis = basis_for(2, 3, &[1, 2, 1], None).unwrap();
    let z = vec![rat(1, 1), rat(5, 2), rat(4, 1)];
    let q = vec![rat(-1, 3), rat(2, 1)];
    let params = Parameters::new(z, q);
    let mut family: Vec<LinearOperator<BigRational>> = Vec::new();
    for i in 1..=2 {
        family.push(nabla(i, &params, &basis).unwrap());
    }
    for a in 1..=3 {
        family.push(dual_nabla(a, &params, &basis).unwrap());
    }
    for x in &family {
        for y in &family {
            assert!(commutator(x, y).unwrap().is_zero());
        }
    }
}
