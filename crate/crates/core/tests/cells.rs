use gaudin_rsk::cmcells::*;
use gaudin_rsk::combinatorics::{rs_permutation, Partition};

#[test]
fn flow_cells_match_reference_cells() {
    for n in 2..=4 {
        let opts = CellOptions::default();
        let (z, q) = default_cell_points(n);
        let right = right_cells(n, &z, &q, &opts).unwrap();
        let left = left_cells(n, &z, &q, &opts).unwrap();
        let two = two_sided_cells(n, &z, &q, &opts).unwrap();
        for rep in [&right, &left, &two] {
            assert!(rep.matches_kl, "n = {n}, {:?}", rep.kind);
            assert!(rep.diagnostics.cross_checks.iter().all(|c| c.1), "{:?}", rep.diagnostics.cross_checks);
        }
        assert_eq!(two.partition.blocks.len(), Partition::all(n as u32, n).len());
        // right cells of w^-1 are left cells of w
        for block in &right.partition.blocks {
            let inv: Vec<_> = block.iter().map(|w| w.inverse()).collect();
            let b = left.partition.block_of(&inv[0]).unwrap();
            let mut x = left.partition.blocks[b].clone();
            let mut y = inv.clone();
            x.sort();
            y.sort();
            assert_eq!(x, y);
        }
    }
}

#[test]
fn two_sided_block_sizes_are_squares() {
    let (z, q) = default_cell_points(4);
    let rep = two_sided_cells(4, &z, &q, &CellOptions::default()).unwrap();
    for block in &rep.partition.blocks {
        let shape = rs_permutation(&block[0]).0.shape();
        let f = shape.num_standard_tableaux() as usize;
        assert_eq!(block.len(), f * f);
    }
}
