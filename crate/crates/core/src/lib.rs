//! RSK correspondence, gl_r x gl_n crystals, commuting Gaudin-type
//! Hamiltonians on polynomial rings of matrices, spectral flow of their
//! eigenlines, and Calogero-Moser cells of symmetric groups.

pub mod cmcells;
pub mod combinatorics;
pub mod crystals;
pub mod error;
pub mod liealg;
pub mod spectralflow;

pub use combinatorics::{
    biword_to_matrix, evacuation, matrix_to_biword, restrict, row_insert, rs_permutation, rsk, rsk_inverse,
    transpose_check, Biword, NatMatrix, Partition, Permutation, SemistandardTableau,
};
pub use cmcells::{
    default_cell_points,
    cm_label, cm_point, fiber_point, gamma_point, kl_reference_cells, left_cells, right_cells, two_sided_cells, upsilon,
    CMPoint, CellKind, CellOptions, CellPartition, CellReport,
};
pub use crystals::{crystal_e, crystal_f, rsk_crystal_map, string_lengths, verify_isomorphism, weight, CrystalElement};
pub use error::{Error, Result};
pub use liealg::{basis_for, LinearOperator, WeightSpaceBasis};
pub use spectralflow::path::PathKind;
pub use spectralflow::{
    bounded_corpus, run_flow, verify_main_theorem, BlockSpec, FlowOptions, FlowResult, MainTheoremReport,
};
