//! Exact rank over the rationals, used as an independent oracle for the
//! floating-point rank whenever joint coordinates are small rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::framework::Framework;

const MAX_DENOMINATOR: i64 = 1000;

/// Recovers `x` as `n/q` with `q <= 1000` when `x` is such a fraction up to
/// rounding in the last few bits.
pub fn small_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    for q in 1..=MAX_DENOMINATOR {
        let n = (x * q as f64).round();
        if n.abs() > 1e15 {
            return None;
        }
        if (x - n / q as f64).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(BigRational::new(BigInt::from(n as i64), BigInt::from(q)));
        }
    }
    None
}

/// Rank by fraction-exact Gaussian elimination.
pub fn exact_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let n_rows = m.len();
    let n_cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(pivot) = (rank..n_rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = BigRational::one() / m[rank][col].clone();
        for x in &mut m[rank][col..] {
            *x = &*x * &inv;
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    rank
}

/// Exact rigidity matrix when every coordinate is a small rational.
pub fn exact_rigidity_matrix(fw: &Framework) -> Option<Vec<Vec<BigRational>>> {
    let d = fw.dim();
    let sig = fw.signature();
    let pts: Vec<Vec<BigRational>> = fw
        .config()
        .points()
        .iter()
        .map(|p| p.iter().map(|&x| small_rational(x)).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()?;
    let n = fw.n_vertices();
    let rows = fw
        .graph()
        .edges()
        .iter()
        .map(|&(i, j)| {
            let mut row = vec![BigRational::zero(); d * n];
            for k in 0..d {
                let mut diff = &pts[i][k] - &pts[j][k];
                if sig.sign(k) < 0.0 {
                    diff = -diff;
                }
                row[d * j + k] = -diff.clone();
                row[d * i + k] = diff;
            }
            row
        })
        .collect();
    Some(rows)
}

/// Exact rank of the rigidity matrix, or `None` if some coordinate is not a
/// small rational.
pub fn exact_rigidity_rank(fw: &Framework) -> Option<usize> {
    exact_rigidity_matrix(fw).map(|m| exact_rank(&m))
}

/// `true` if every entry is a small rational.
pub fn is_rational_config(fw: &Framework) -> bool {
    fw.config()
        .points()
        .iter()
        .all(|p| p.iter().all(|&x| small_rational(x).is_some()))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::Configuration;
    use crate::graph::Graph;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn recognizes_small_fractions() {
        assert_eq!(small_rational(0.5), Some(q(1, 2)));
        assert_eq!(small_rational(-1.0 / 3.0), Some(q(-1, 3)));
        assert_eq!(small_rational(2.0), Some(q(2, 1)));
        assert!(small_rational(3f64.sqrt()).is_none());
    }

    #[test]
    fn exact_rank_of_simple_matrices() {
        let one = q(1, 1);
        let zero = q(0, 1);
        assert_eq!(exact_rank(&[vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]]), 1);
        assert_eq!(exact_rank(&[vec![one.clone(), zero.clone()], vec![zero, one]]), 2);
        assert_eq!(exact_rank(&[]), 0);
    }

    #[test]
    fn triangle_rigidity_rank_is_three() {
        let g = Graph::from_one_based(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        let c = Configuration::from_rows(&[&[0.0, 0.0], &[3.0, 1.0], &[1.0, 2.0]]).unwrap();
        let fw = Framework::euclidean(g, c).unwrap();
        assert_eq!(exact_rigidity_rank(&fw), Some(3));
    }
}
