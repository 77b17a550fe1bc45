//! Dense helpers for the 2–3 parameter problems of this module.

/// Inverse of a small square matrix by Gauss–Jordan elimination with partial
/// pivoting. `None` if the matrix is singular to working precision.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())?;
        if m[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

/// Determinant of the column-normalised Gram matrix JᵀJ: 1 for orthogonal
/// columns, 0 for linearly dependent ones.
pub fn normalized_gram_determinant(gram: &[Vec<f64>]) -> f64 {
    let n = gram.len();
    let d: Vec<f64> = (0..n).map(|i| gram[i][i].sqrt()).collect();
    if d.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return 0.0;
    }
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| gram[i][j] / (d[i] * d[j])).collect()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap()).unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_3x3() {
        let a = vec![vec![4.0, 1.0, 2.0], vec![1.0, 3.0, 0.5], vec![2.0, 0.5, 5.0]];
        let inv = invert(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i][k] * inv[k][j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_is_none() {
        assert!(invert(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
        assert!(invert(&[vec![0.0, 0.0], vec![0.0, 0.0]]).is_none());
    }

    #[test]
    fn gram_determinant_bounds() {
        assert!((normalized_gram_determinant(&[vec![2.0, 0.0], vec![0.0, 8.0]]) - 1.0).abs() < 1e-15);
        assert!(normalized_gram_determinant(&[vec![1.0, 2.0], vec![2.0, 4.0]]) < 1e-15);
    }
}
