use gaudin_rsk::combinatorics::{rsk, NatMatrix};
use gaudin_rsk::liealg::basis_for;
use gaudin_rsk::spectralflow::{run_flow, FlowOptions};

const Z3: [f64; 3] = [1.0, 2.3, 4.1];
const Q2: [f64; 2] = [-0.5, 1.2];

#[test]
fn tableaux_have_matching_shapes_and_contents() {
    let basis = basis_for(2, 3, &[2, 1, 1], None).unwrap();
    let res = run_flow(&basis, &Z3, &Q2, &FlowOptions::default()).unwrap();
    assert_eq!(res.branches.len(), basis.dim());
    for b in &res.branches {
        assert_eq!(b.s.shape(), b.t.shape());
        assert_eq!(b.s.content(2), b.label_matrix.row_sums());
        assert_eq!(b.t.content(3), b.label_matrix.col_sums());
    }
    assert!(res.rsk_agreement());
    assert!(res.diagnostics.endpoint_residual < 1e-8, "{}", res.diagnostics.endpoint_residual);
}

#[test]
fn same_seed_gives_identical_results() {
    let basis = basis_for(2, 2, &[2, 1], None).unwrap();
    let opts = FlowOptions { seed: 17, ..FlowOptions::default() };
    let a = run_flow(&basis, &Z3[..2], &Q2, &opts).unwrap();
    let b = run_flow(&basis, &Z3[..2], &Q2, &opts).unwrap();
    assert_eq!(format!("{:?}", a.branches), format!("{:?}", b.branches));
    assert_eq!(format!("{:?}", a.diagnostics), format!("{:?}", b.diagnostics));
}

#[test]
fn labels_do_not_depend_on_the_seed() {
    let basis = basis_for(2, 3, &[1, 1, 1], None).unwrap();
    let key = |seed| {
        let res = run_flow(&basis, &Z3, &Q2, &FlowOptions { seed, ..FlowOptions::default() }).unwrap();
        let mut v: Vec<_> = res.branches.into_iter().map(|b| (b.label_matrix, b.s, b.t)).collect();
        v.sort();
        v
    };
    assert_eq!(key(1), key(99));
}

#[test]
fn transposed_problem_swaps_the_tableaux() {
    let basis = basis_for(2, 3, &[1, 1, 1], Some(&[2, 1])).unwrap();
    let res = run_flow(&basis, &Z3, &Q2, &FlowOptions::default()).unwrap();
    let dual = basis_for(3, 2, &[2, 1], Some(&[1, 1, 1])).unwrap();
    let res_t = run_flow(&dual, &Q2, &Z3, &FlowOptions::default()).unwrap();
    assert_eq!(res.branches.len(), res_t.branches.len());
    for b in &res.branches {
        let bt = res_t.branches.iter().find(|x| x.label_matrix == b.label_matrix.transpose()).expect("transposed label");
        assert_eq!((bt.s.clone(), bt.t.clone()), (b.t.clone(), b.s.clone()));
    }
}

#[test]
fn every_monomial_labels_exactly_one_branch() {
    let basis = basis_for(3, 2, &[2, 2], None).unwrap();
    let res = run_flow(&basis, &Q2, &[0.0, 1.5, 2.0], &FlowOptions::default()).unwrap();
    let mut labels: Vec<NatMatrix> = res.branches.iter().map(|b| b.label_matrix.clone()).collect();
    labels.sort();
    assert_eq!(labels, basis.monomials().to_vec());
    for b in &res.branches {
        assert_eq!(rsk(&b.label_matrix), (b.t.clone(), b.s.clone()));
    }
}

#[test]
fn bad_points_are_rejected() {
    let basis = basis_for(2, 2, &[1, 1], None).unwrap();
    assert!(run_flow(&basis, &[1.0, 1.0], &Q2, &FlowOptions::default()).is_err());
    assert!(run_flow(&basis, &[1.0], &Q2, &FlowOptions::default()).is_err());
}
