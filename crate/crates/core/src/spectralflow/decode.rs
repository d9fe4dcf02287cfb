//! Reading a semistandard tableau off nested Casimir eigenvalues.

use crate::combinatorics::{Partition, SemistandardTableau};
use crate::error::{Error, Result};
use crate::liealg::{casimir2_eigenvalue, casimir_power_eigenvalue};

fn to_integer(x: f64, what: &str) -> Result<i64> {
    let r = x.round();
    let err = (x - r).abs();
    if err > 1e-6 * r.abs().max(1.0) {
        return Err(Error::Inconclusive {
            reason: format!("{what} = {x} is not an integer"),
            suggested_tol: err * 10.0,
        });
    }
    Ok(r as i64)
}

/// Partitions with at most `i` parts and size `size` whose `gl_i` quadratic
/// Casimir eigenvalue is `c2`.
pub fn casimir_candidates(size: i64, c2: i64, i: usize) -> Vec<Partition> {
    if size < 0 {
        return Vec::new();
    }
    Partition::all(size as u32, i).into_iter().filter(|p| casimir2_eigenvalue(p.parts(), i) == c2).collect()
}

/// Decodes `c1[i-1] = C_i^(1)` and `c2[i-1] = C_i^(2)` for `i = 1..=r` into
/// the tableau whose Gelfand-Tsetlin chain they determine. When a level
/// admits several partitions, the chain condition (horizontal strips)
/// selects among them.
pub fn decode_gt(c1: &[f64], c2: &[f64]) -> Result<SemistandardTableau> {
    decode_gt_with_cubic(c1, c2, &vec![None; c1.len()])
}

/// [`decode_gt`] with optional cubic Casimir values per level, which
/// separate partitions sharing size and quadratic Casimir.
pub fn decode_gt_with_cubic(c1: &[f64], c2: &[f64], c3: &[Option<f64>]) -> Result<SemistandardTableau> {
    let r = c1.len();
    let mut levels: Vec<Vec<Partition>> = Vec::with_capacity(r);
    for i in 1..=r {
        let size = to_integer(c1[i - 1], &format!("C_{i}^(1)"))?;
        let cas = to_integer(c2[i - 1], &format!("C_{i}^(2)"))?;
        let mut cands = casimir_candidates(size, cas, i);
        if let (true, Some(x)) = (cands.len() > 1, c3[i - 1]) {
            cands.retain(|p| (casimir_power_eigenvalue(p.parts(), i, 3) - x).abs() <= 1e-6 * x.abs().max(1.0));
        }
        if cands.is_empty() {
            return Err(Error::DecoderAmbiguity(format!("no partition of {size} with at most {i} parts has C2 = {cas}")));
        }
        levels.push(cands);
    }
    let mut chains: Vec<Vec<Partition>> = vec![vec![Partition::empty()]];
    for cands in &levels {
        let mut next = Vec::new();
        for chain in &chains {
            let last = chain.last().expect("chain starts with the empty partition");
            for c in cands {
                if c.is_horizontal_strip_over(last) {
                    let mut ext = chain.clone();
                    ext.push(c.clone());
                    next.push(ext);
                }
            }
        }
        chains = next;
    }
    match chains.len() {
        1 => SemistandardTableau::from_gt_chain(&chains[0]),
        0 => Err(Error::DecoderAmbiguity("no chain of horizontal strips fits the Casimir values".into())),
        k => Err(Error::DecoderAmbiguity(format!("{k} chains fit the Casimir values"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(t: &SemistandardTableau, r: usize) -> (Vec<f64>, Vec<f64>) {
        let chain = t.gt_chain(r as u32);
        let c1 = (1..=r).map(|i| chain[i].size() as f64).collect();
        let c2 = (1..=r).map(|i| casimir2_eigenvalue(chain[i].parts(), i) as f64).collect();
        (c1, c2)
    }

    fn cubic(t: &SemistandardTableau, r: usize) -> Vec<Option<f64>> {
        let chain = t.gt_chain(r as u32);
        (1..=r).map(|i| Some(casimir_power_eigenvalue(chain[i].parts(), i, 3))).collect()
    }

    #[test]
    fn roundtrip_small_tableaux() {
        for size in 0..=6 {
            for shape in Partition::all(size, 3) {
                for t in SemistandardTableau::all_of_shape(&shape, 3) {
                    let (c1, c2) = values(&t, 3);
                    assert_eq!(decode_gt_with_cubic(&c1, &c2, &cubic(&t, 3)).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn chain_resolves_equal_casimirs() {
        // (4,1,1) and (3,3) share size and C2 for gl_3
        assert_eq!(casimir_candidates(6, casimir2_eigenvalue(&[3, 3], 3), 3).len(), 2);
        let t = SemistandardTableau::new(vec![vec![1, 1, 1, 2], vec![2], vec![3]]).unwrap();
        let (c1, c2) = values(&t, 3);
        assert_eq!(decode_gt(&c1, &c2).unwrap(), t);
        // under (3,1) both shapes are horizontal strips; only the cubic value decides
        let t = SemistandardTableau::new(vec![vec![1, 1, 1, 3], vec![2], vec![3]]).unwrap();
        let (c1, c2) = values(&t, 3);
        assert!(matches!(decode_gt(&c1, &c2), Err(Error::DecoderAmbiguity(_))));
        assert_eq!(decode_gt_with_cubic(&c1, &c2, &cubic(&t, 3)).unwrap(), t);
    }

    #[test]
    fn non_integer_is_inconclusive() {
        assert!(matches!(decode_gt(&[1.3], &[1.0]), Err(Error::Inconclusive { .. })));
    }
}
