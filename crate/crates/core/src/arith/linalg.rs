//! Exact Gaussian elimination over [`ExactScalar`].

use super::ExactScalar;
use crate::error::Result;

/// Determinant by exact elimination. The empty matrix has determinant 1.
pub fn exact_det(mut m: Vec<Vec<ExactScalar>>) -> Result<ExactScalar> {
    let n = m.len();
    let mut det = ExactScalar::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(ExactScalar::zero());
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det.checked_mul(&p)?;
        let pinv = p.inv()?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].checked_mul(&pinv)?;
            for c in col..n {
                let v = m[r][c].checked_sub(&f.checked_mul(&m[col][c])?)?;
                m[r][c] = v;
            }
        }
    }
    Ok(det)
}

/// Rank of a list of row vectors.
pub fn exact_rank(mut rows: Vec<Vec<ExactScalar>>) -> Result<usize> {
    let ncols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    for r in rows.iter_mut() {
        r.resize(ncols, ExactScalar::zero());
    }
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(piv, rank);
        let pinv = rows[rank][col].inv()?;
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].checked_mul(&pinv)?;
            for c in col..ncols {
                if rows[rank][c].is_zero() {
                    continue;
                }
                let v = rows[r][c].checked_sub(&f.checked_mul(&rows[rank][c])?)?;
                rows[r][c] = v;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    Ok(rank)
}

/// 2x2 determinant `a*d - b*c`.
pub fn det2(
    a: &ExactScalar,
    b: &ExactScalar,
    c: &ExactScalar,
    d: &ExactScalar,
) -> Result<ExactScalar> {
    a.checked_mul(d)?.checked_sub(&b.checked_mul(c)?)
}
