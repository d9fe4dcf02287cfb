//! gl_r crystal structures on words, tableaux and integer matrices.
//!
//! Tableaux are read by columns, left to right and bottom to top in each
//! column. A matrix is the tensor product of its columns from left to
//! right, a column `(A_1a, ..., A_ra)` being the weakly increasing word
//! `1^A_1a ... r^A_ra`. On words the operators follow the bracket rule:
//! every `i + 1` is an opening bracket, every `i` a closing one.

use std::fmt;

use serde::Serialize;

use crate::combinatorics::{rsk, NatMatrix, Partition, SemistandardTableau};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CrystalElement {
    /// A word in the alphabet `1..=rank`.
    Word { letters: Vec<u32>, rank: usize },
    /// A tableau with entries `<= rank`.
    Tableau { tableau: SemistandardTableau, rank: usize },
    /// A matrix with `rank` rows, as a tensor product of its columns.
    Matrix { matrix: NatMatrix },
    /// A tableau in the copy of the crystal labelled by `fixed`.
    Pair { fixed: SemistandardTableau, active: SemistandardTableau, rank: usize },
}

impl CrystalElement {
    pub fn rank(&self) -> usize {
        match self {
            CrystalElement::Word { rank, .. } => *rank,
            CrystalElement::Tableau { rank, .. } => *rank,
            CrystalElement::Matrix { matrix } => matrix.nrows(),
            CrystalElement::Pair { rank, .. } => *rank,
        }
    }

    pub fn tableau(tableau: SemistandardTableau, rank: usize) -> Result<Self> {
        if tableau.max_entry() as usize > rank {
            return invalid(format!("tableau {tableau} has entries above {rank}"));
        }
        Ok(CrystalElement::Tableau { tableau, rank })
    }
}

impl fmt::Display for CrystalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrystalElement::Word { letters, .. } => write!(f, "{letters:?}"),
            CrystalElement::Tableau { tableau, .. } => write!(f, "{tableau}"),
            CrystalElement::Matrix { matrix } => write!(f, "{matrix}"),
            CrystalElement::Pair { fixed, active, .. } => write!(f, "({fixed}; {active})"),
        }
    }
}

pub fn weight(x: &CrystalElement) -> Vec<u32> {
    match x {
        CrystalElement::Word { letters, rank } => {
            let mut w = vec![0; *rank];
            for &l in letters {
                w[l as usize - 1] += 1;
            }
            w
        }
        CrystalElement::Tableau { tableau, rank } => tableau.content(*rank),
        CrystalElement::Matrix { matrix } => matrix.row_sums(),
        CrystalElement::Pair { active, rank, .. } => active.content(*rank),
    }
}

/// Positions of the unmatched `i` and unmatched `i + 1` letters.
fn unmatched(word: &[u32], i: u32) -> (Vec<usize>, Vec<usize>) {
    let mut open: Vec<usize> = Vec::new();
    let mut free_i = Vec::new();
    for (pos, &l) in word.iter().enumerate() {
        if l == i + 1 {
            open.push(pos);
        } else if l == i && open.pop().is_none() {
            free_i.push(pos);
        }
    }
    (free_i, open)
}

/// Position changed by `f_i` (raise = false) or `e_i` (raise = true).
fn act_position(word: &[u32], i: u32, raise: bool) -> Option<usize> {
    let (free_i, free_next) = unmatched(word, i);
    if raise {
        free_next.first().copied()
    } else {
        free_i.last().copied()
    }
}

/// Length of the `i`-string above (`epsilon`) and below (`phi`) `x`.
pub fn string_lengths(i: usize, x: &CrystalElement) -> Result<(usize, usize)> {
    check_index(i, x.rank())?;
    let word = reading_word(x);
    let (free_i, free_next) = unmatched(&word, i as u32);
    Ok((free_next.len(), free_i.len()))
}

fn check_index(i: usize, rank: usize) -> Result<()> {
    if i == 0 || i >= rank {
        return Err(Error::IndexOutOfRange(format!("crystal index {i} outside 1..{}", rank.saturating_sub(1))));
    }
    Ok(())
}

fn matrix_word(a: &NatMatrix) -> (Vec<u32>, Vec<(usize, usize)>) {
    let mut word = Vec::new();
    let mut slots = Vec::new();
    for col in 0..a.ncols() {
        for row in 0..a.nrows() {
            for _ in 0..a.get(row, col) {
                word.push(row as u32 + 1);
                slots.push((row, col));
            }
        }
    }
    (word, slots)
}

/// The word on which the crystal operators act.
pub fn reading_word(x: &CrystalElement) -> Vec<u32> {
    match x {
        CrystalElement::Word { letters, .. } => letters.clone(),
        CrystalElement::Tableau { tableau, .. } => tableau.column_reading_word(),
        CrystalElement::Matrix { matrix } => matrix_word(matrix).0,
        CrystalElement::Pair { active, .. } => active.column_reading_word(),
    }
}

fn apply(i: usize, x: &CrystalElement, raise: bool) -> Result<Option<CrystalElement>> {
    check_index(i, x.rank())?;
    let i32_ = i as u32;
    let (from, to) = if raise { (i32_ + 1, i32_) } else { (i32_, i32_ + 1) };
    let word = reading_word(x);
    let Some(pos) = act_position(&word, i32_, raise) else {
        return Ok(None);
    };
    debug_assert_eq!(word[pos], from);
    Ok(Some(match x {
        CrystalElement::Word { letters, rank } => {
            let mut l = letters.clone();
            l[pos] = to;
            CrystalElement::Word { letters: l, rank: *rank }
        }
        CrystalElement::Tableau { tableau, rank } => {
            let cell = tableau.column_reading_cells()[pos];
            CrystalElement::Tableau { tableau: tableau.with_entry(cell, to), rank: *rank }
        }
        CrystalElement::Matrix { matrix } => {
            let (_, slots) = matrix_word(matrix);
            let (row, col) = slots[pos];
            let mut m = matrix.clone();
            m.set(row, col, m.get(row, col) - 1);
            let target = to as usize - 1;
            m.set(target, col, m.get(target, col) + 1);
            CrystalElement::Matrix { matrix: m }
        }
        CrystalElement::Pair { fixed, active, rank } => {
            let cell = active.column_reading_cells()[pos];
            CrystalElement::Pair { fixed: fixed.clone(), active: active.with_entry(cell, to), rank: *rank }
        }
    }))
}

/// Raising operator `e_i`; `None` stands for the zero element.
pub fn crystal_e(i: usize, x: &CrystalElement) -> Result<Option<CrystalElement>> {
    apply(i, x, true)
}

/// Lowering operator `f_i`; `None` stands for the zero element.
pub fn crystal_f(i: usize, x: &CrystalElement) -> Result<Option<CrystalElement>> {
    apply(i, x, false)
}

/// A map between crystals, given as a total function on elements.
pub struct CrystalMap<'a> {
    pub name: String,
    pub domain: String,
    pub codomain: String,
    func: Box<dyn Fn(&CrystalElement) -> Result<CrystalElement> + Sync + 'a>,
}

impl<'a> CrystalMap<'a> {
    pub fn new(
        name: impl Into<String>,
        domain: impl Into<String>,
        codomain: impl Into<String>,
        func: impl Fn(&CrystalElement) -> Result<CrystalElement> + Sync + 'a,
    ) -> Self {
        CrystalMap { name: name.into(), domain: domain.into(), codomain: codomain.into(), func: Box::new(func) }
    }

    pub fn apply(&self, x: &CrystalElement) -> Result<CrystalElement> {
        (self.func)(x)
    }
}

/// RSK on matrices with `r` rows, landing in copies of `SSYT_r(lambda)`
/// indexed by the insertion tableau.
pub fn rsk_crystal_map() -> CrystalMap<'static> {
    CrystalMap::new("rsk", "Mat_{r x n}", "P-indexed copies of SSYT_r", |x| match x {
        CrystalElement::Matrix { matrix } => {
            let (p, q) = rsk(matrix);
            Ok(CrystalElement::Pair { fixed: p, active: q, rank: matrix.nrows() })
        }
        other => invalid(format!("rsk map expects a matrix, got {other}")),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IsomorphismReport {
    pub checked: usize,
    pub passed: bool,
    pub first_violation: Option<String>,
}

/// Checks weight preservation and `f(e_i x) = e_i f(x)`, `f(f_i x) =
/// f_i f(x)` on every sample, with zero matching zero.
pub fn verify_isomorphism(f: &CrystalMap<'_>, samples: &[CrystalElement]) -> IsomorphismReport {
    let mut report = IsomorphismReport { checked: 0, passed: true, first_violation: None };
    for x in samples {
        report.checked += 1;
        if let Some(v) = check_one(f, x) {
            report.passed = false;
            report.first_violation = Some(v);
            return report;
        }
    }
    report
}

fn check_one(f: &CrystalMap<'_>, x: &CrystalElement) -> Option<String> {
    let fx = match f.apply(x) {
        Ok(y) => y,
        Err(e) => return Some(format!("{} undefined at {x}: {e}", f.name)),
    };
    if weight(&fx) != weight(x) {
        return Some(format!("weight of {x} is {:?} but its image {fx} has {:?}", weight(x), weight(&fx)));
    }
    for i in 1..x.rank() {
        for raise in [true, false] {
            let op = if raise { "e" } else { "f" };
            let lhs = match apply(i, x, raise) {
                Ok(Some(y)) => match f.apply(&y) {
                    Ok(z) => Some(z),
                    Err(e) => return Some(format!("{} undefined at {y}: {e}", f.name)),
                },
                Ok(None) => None,
                Err(e) => return Some(e.to_string()),
            };
            let rhs = match apply(i, &fx, raise) {
                Ok(v) => v,
                Err(e) => return Some(e.to_string()),
            };
            if lhs != rhs {
                let show = |v: &Option<CrystalElement>| v.as_ref().map_or("0".to_string(), |e| e.to_string());
                return Some(format!("{op}_{i} at {x}: map gives {} but {op}_{i} of image gives {}", show(&lhs), show(&rhs)));
            }
        }
    }
    None
}

/// One labelled edge `source -> target` of a crystal graph under `f_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrystalEdge {
    pub source: usize,
    pub i: usize,
    pub target: usize,
}

/// The crystal graph of a finite set of elements closed under `f_i`.
pub fn crystal_graph(elements: &[CrystalElement]) -> Result<Vec<CrystalEdge>> {
    let index: std::collections::HashMap<&CrystalElement, usize> =
        elements.iter().enumerate().map(|(k, e)| (e, k)).collect();
    let mut edges = Vec::new();
    for (k, x) in elements.iter().enumerate() {
        for i in 1..x.rank() {
            if let Some(y) = crystal_f(i, x)? {
                let target = *index
                    .get(&y)
                    .ok_or_else(|| Error::InvalidInput(format!("f_{i}({x}) = {y} is outside the element set")))?;
                edges.push(CrystalEdge { source: k, i, target });
            }
        }
    }
    Ok(edges)
}

/// Shapes `mu` containing `lambda` with `mu / lambda` a horizontal strip of
/// size `l` and at most `max_parts` rows.
pub fn pieri_shapes(lambda: &Partition, l: u32, max_parts: usize) -> Vec<Partition> {
    lambda.add_horizontal_strips(l, max_parts).into_iter().filter(|mu| mu.len() <= max_parts).collect()
}

/// Row-inserts `1` `col[0]` times, then `2` `col[1]` times, and so on.
pub fn g_insert(t: &SemistandardTableau, col: &[u32]) -> SemistandardTableau {
    let mut out = t.clone();
    for (i, &mult) in col.iter().enumerate() {
        for _ in 0..mult {
            out = out.row_insert(i as u32 + 1).0;
        }
    }
    out
}

/// Fills `mu / shape(t)` with the letter `n`.
pub fn u_extend(t: &SemistandardTableau, mu: &Partition, n: u32) -> Result<SemistandardTableau> {
    let lam = t.shape();
    if !mu.is_horizontal_strip_over(&lam) {
        return invalid(format!("{mu} / {lam} is not a horizontal strip"));
    }
    if t.max_entry() >= n {
        return invalid(format!("tableau {t} already uses letters >= {n}"));
    }
    let mut rows: Vec<Vec<u32>> = t.rows().to_vec();
    for i in 0..mu.len() {
        if rows.len() <= i {
            rows.push(Vec::new());
        }
        for _ in lam.part(i)..mu.part(i) {
            rows[i].push(n);
        }
    }
    SemistandardTableau::new(rows)
}

/// Builds the pair of tableaux of `A` one column at a time: the columns are
/// fed through [`g_insert`], and the boxes added at step `a` are filled with
/// `a` by [`u_extend`]. Returns `(recording, inserted)`, which equals
/// `rsk(A)`.
pub fn column_chain(a: &NatMatrix) -> Result<(SemistandardTableau, SemistandardTableau)> {
    let mut inserted = SemistandardTableau::empty();
    let mut recording = SemistandardTableau::empty();
    for col in 0..a.ncols() {
        let c: Vec<u32> = (0..a.nrows()).map(|i| a.get(i, col)).collect();
        inserted = g_insert(&inserted, &c);
        recording = u_extend(&recording, &inserted.shape(), col as u32 + 1)?;
    }
    Ok((recording, inserted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tab(rows: &[&[u32]]) -> SemistandardTableau {
        SemistandardTableau::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn weights() {
        let q = CrystalElement::tableau(tab(&[&[1, 1, 1, 2], &[2]]), 2).unwrap();
        assert_eq!(weight(&q), vec![3, 2]);
        let a = NatMatrix::from_rows(&[vec![0, 2, 1], vec![1, 0, 1]]).unwrap();
        assert_eq!(weight(&CrystalElement::Matrix { matrix: a }), vec![3, 2]);
        assert_eq!(weight(&CrystalElement::Matrix { matrix: NatMatrix::zeros(3, 2) }), vec![0, 0, 0]);
    }

    #[test]
    fn single_box_string() {
        let one = CrystalElement::tableau(tab(&[&[1]]), 2).unwrap();
        let two = CrystalElement::tableau(tab(&[&[2]]), 2).unwrap();
        assert_eq!(crystal_f(1, &one).unwrap(), Some(two.clone()));
        assert_eq!(crystal_e(1, &two).unwrap(), Some(one.clone()));
        assert_eq!(crystal_e(1, &one).unwrap(), None);
        assert!(matches!(crystal_f(2, &one), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn highest_weight_is_killed() {
        let t = CrystalElement::tableau(tab(&[&[1, 1, 1], &[2, 2], &[3]]), 4).unwrap();
        for i in 1..4 {
            assert_eq!(crystal_e(i, &t).unwrap(), None);
        }
    }

    #[test]
    fn operators_are_partial_inverses_on_tableaux() {
        for shape in Partition::all(4, 3) {
            for t in SemistandardTableau::all_of_shape(&shape, 3) {
                let x = CrystalElement::tableau(t, 3).unwrap();
                for i in 1..3 {
                    if let Some(y) = crystal_f(i, &x).unwrap() {
                        if let CrystalElement::Tableau { tableau, .. } = &y {
                            assert!(SemistandardTableau::new(tableau.rows().to_vec()).is_ok());
                        }
                        assert_eq!(crystal_e(i, &y).unwrap(), Some(x.clone()));
                    }
                    if let Some(y) = crystal_e(i, &x).unwrap() {
                        assert_eq!(crystal_f(i, &y).unwrap(), Some(x.clone()));
                    }
                }
            }
        }
    }

    #[test]
    fn pieri_examples() {
        let one = Partition::new(vec![1]).unwrap();
        assert_eq!(pieri_shapes(&one, 1, 2).len(), 2);
        assert_eq!(pieri_shapes(&Partition::empty(), 4, 3), vec![Partition::new(vec![4]).unwrap()]);
        assert_eq!(pieri_shapes(&Partition::new(vec![2, 1]).unwrap(), 2, 3).len(), 4);
        assert_eq!(pieri_shapes(&Partition::new(vec![2, 1]).unwrap(), 2, 2).len(), 2);
    }

    #[test]
    fn insertion_examples() {
        assert_eq!(g_insert(&SemistandardTableau::empty(), &[2, 1]), tab(&[&[1, 1, 2]]));
        let t = tab(&[&[1, 2], &[3]]);
        assert_eq!(g_insert(&t, &[0, 0, 0]), t);
        assert_eq!(u_extend(&tab(&[&[1]]), &Partition::new(vec![1, 1]).unwrap(), 2).unwrap(), tab(&[&[1], &[2]]));
        assert_eq!(u_extend(&SemistandardTableau::empty(), &Partition::new(vec![3]).unwrap(), 2).unwrap(), tab(&[&[2, 2, 2]]));
        assert!(u_extend(&tab(&[&[1]]), &Partition::new(vec![1, 1, 1]).unwrap(), 2).is_err());
    }

    #[test]
    fn identity_map_is_an_isomorphism() {
        let id = CrystalMap::new("id", "SSYT", "SSYT", |x| Ok(x.clone()));
        let shape = Partition::new(vec![2, 1]).unwrap();
        let samples: Vec<_> = SemistandardTableau::all_of_shape(&shape, 3)
            .into_iter()
            .map(|t| CrystalElement::tableau(t, 3).unwrap())
            .collect();
        let rep = verify_isomorphism(&id, &samples);
        assert!(rep.passed);
        assert_eq!(rep.checked, 8);
    }

    #[test]
    fn rsk_is_an_isomorphism_on_small_matrices() {
        let samples: Vec<_> =
            NatMatrix::all_bounded(2, 3, 2).into_iter().map(|m| CrystalElement::Matrix { matrix: m }).collect();
        let rep = verify_isomorphism(&rsk_crystal_map(), &samples);
        assert!(rep.passed, "{:?}", rep.first_violation);
        assert_eq!(rep.checked, 729);
    }

    #[test]
    fn mutated_rsk_is_rejected() {
        let swap = CrystalMap::new("rsk with swapped Q letters", "Mat", "SSYT", |x| {
            let CrystalElement::Pair { fixed, active, rank } = rsk_crystal_map().apply(x)? else { unreachable!() };
            let rows = active.rows().iter().map(|r| r.iter().map(|&v| if v <= 2 { 3 - v } else { v }).collect()).collect();
            let mut rows: Vec<Vec<u32>> = rows;
            for r in rows.iter_mut() {
                r.sort_unstable();
            }
            let active = SemistandardTableau::new(rows).unwrap_or(active);
            Ok(CrystalElement::Pair { fixed, active, rank })
        });
        let samples: Vec<_> =
            NatMatrix::all_bounded(2, 3, 2).into_iter().map(|m| CrystalElement::Matrix { matrix: m }).collect();
        let rep = verify_isomorphism(&swap, &samples);
        assert!(!rep.passed);
        assert!(rep.first_violation.is_some());
    }

    #[test]
    fn matrix_graph_matches_tableau_graph() {
        let mats: Vec<_> = NatMatrix::all_with_col_sums(2, &[1, 1], None)
            .into_iter()
            .map(|m| CrystalElement::Matrix { matrix: m })
            .collect();
        assert_eq!(mats.len(), 4);
        let images: Vec<_> = mats.iter().map(|m| rsk_crystal_map().apply(m).unwrap()).collect();
        let mut g1 = crystal_graph(&mats).unwrap();
        let mut g2 = crystal_graph(&images).unwrap();
        g1.sort_by_key(|e| (e.source, e.target));
        g2.sort_by_key(|e| (e.source, e.target));
        assert_eq!(g1, g2);
        assert_eq!(g1.len(), 2);
    }

    #[test]
    fn column_chain_reproduces_rsk() {
        for r in 1..=3 {
            for n in 1..=3 {
                for a in NatMatrix::all_bounded(r, n, if r * n <= 6 { 2 } else { 1 }) {
                    assert_eq!(column_chain(&a).unwrap(), rsk(&a));
                }
            }
        }
    }
}
