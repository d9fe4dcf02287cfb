use gaudin_rsk::combinatorics::*;
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = NatMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, n)| {
        proptest::collection::vec(proptest::collection::vec(0u32..=4, n), r).prop_map(|rows| NatMatrix::from_rows(&rows).unwrap())
    })
}

fn permutation() -> impl Strategy<Value = Permutation> {
    (1usize..=7).prop_flat_map(|n| Just((1..=n).collect::<Vec<usize>>()).prop_shuffle().prop_map(|v| Permutation::new(v).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn rsk_is_invertible(a in matrix()) {
        let (p, q) = rsk(&a);
        prop_assert_eq!(rsk_inverse(&p, &q, a.nrows(), a.ncols()).unwrap(), a);
    }

    #[test]
    fn rsk_shapes_and_contents(a in matrix()) {
        let (p, q) = rsk(&a);
        prop_assert_eq!(p.shape(), q.shape());
        prop_assert_eq!(p.content(a.ncols()), a.col_sums());
        prop_assert_eq!(q.content(a.nrows()), a.row_sums());
    }

    #[test]
    fn rsk_of_transpose_swaps(a in matrix()) {
        let (p, q) = rsk(&a);
        prop_assert_eq!(rsk(&a.transpose()), (q, p));
    }

    #[test]
    fn biword_roundtrip(a in matrix()) {
        prop_assert_eq!(biword_to_matrix(&matrix_to_biword(&a), a.nrows(), a.ncols()).unwrap(), a);
    }

    #[test]
    fn rs_of_inverse_swaps(w in permutation()) {
        let (p, q) = rs_permutation(&w);
        prop_assert!(p.is_standard() && q.is_standard());
        prop_assert_eq!(rs_permutation(&w.inverse()), (q, p));
    }

    #[test]
    fn reversal_evacuates_recording_tableau(w in permutation()) {
        let w0 = Permutation::longest(w.len());
        let (_, q) = rs_permutation(&w);
        let (_, q_rev) = rs_permutation(&w.compose(&w0));
        prop_assert_eq!(q_rev, evacuation(&q).unwrap().transpose().unwrap());
    }

    #[test]
    fn monomial_exponent_roundtrip(w in permutation()) {
        let a = w.monomial_exponent();
        prop_assert_eq!(a.clone(), w.matrix().transpose());
        prop_assert_eq!(Permutation::from_monomial_exponent(&a).unwrap(), w);
    }
}

#[test]
fn exhaustive_small_matrices() {
    for r in 1..=3 {
        for n in 1..=3 {
            for a in NatMatrix::all_bounded(r, n, 2) {
                let (p, q) = rsk(&a);
                assert_eq!(rsk_inverse(&p, &q, r, n).unwrap(), a);
                assert!(transpose_check(&a));
            }
        }
    }
}

#[test]
fn rsk_is_a_bijection_onto_pairs() {
    // matrices with fixed margins correspond to pairs of tableaux with those contents
    let (rows, cols) = (vec![2, 1, 2], vec![1, 3, 1]);
    let mats = NatMatrix::all_with_col_sums(3, &cols, Some(&rows));
    let mut pairs = 0;
    for shape in Partition::all(5, 3) {
        let by_content = |c: &[u32]| SemistandardTableau::all_of_shape(&shape, 3).into_iter().filter(|t| t.content(3) == c).count();
        pairs += by_content(&cols) * by_content(&rows);
    }
    assert_eq!(mats.len(), pairs);
    let mut images: Vec<_> = mats.iter().map(rsk).collect();
    images.sort();
    images.dedup();
    assert_eq!(images.len(), mats.len());
}

#[test]
fn tableau_counts() {
    for n in 1..=7u32 {
        let shapes = Partition::all(n, n as usize);
        let total: u64 = shapes.iter().map(|s| s.num_standard_tableaux().pow(2)).sum();
        assert_eq!(total, (1..=n as u64).product::<u64>());
        for s in &shapes {
            assert_eq!(s.num_standard_tableaux() as usize, SemistandardTableau::all_standard(s).len());
        }
    }
    for s in Partition::all(4, 3) {
        assert_eq!(s.num_semistandard_tableaux(3) as usize, SemistandardTableau::all_of_shape(&s, 3).len());
    }
}

#[test]
fn gt_chain_roundtrip() {
    for s in Partition::all(5, 3) {
        for t in SemistandardTableau::all_of_shape(&s, 4) {
            let chain = t.gt_chain(4);
            for w in chain.windows(2) {
                assert!(w[1].is_horizontal_strip_over(&w[0]));
            }
            assert_eq!(SemistandardTableau::from_gt_chain(&chain).unwrap(), t);
        }
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(SemistandardTableau::new(vec![vec![2, 1]]).is_err());
    assert!(SemistandardTableau::new(vec![vec![1, 2], vec![1]]).is_err());
    assert!(Permutation::new(vec![1, 1]).is_err());
    let p = SemistandardTableau::new(vec![vec![1, 2]]).unwrap();
    let q = SemistandardTableau::new(vec![vec![1], vec![2]]).unwrap();
    assert!(rsk_inverse(&p, &q, 2, 2).is_err());
}
