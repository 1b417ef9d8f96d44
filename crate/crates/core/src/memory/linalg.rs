//! Moore–Penrose pseudo-inverse and minimum-norm least squares.

use nalgebra::DMatrix;

/// Moore-Penrose pseudo-inverse through a complete orthogonal decomposition:
/// a column-pivoted QR `J P = Q R` followed by a QR of the leading rows of
/// `R^T`. Pivots below `max(rows, cols) * |R_00| * EPSILON` count as zero.
///
/// The SVD route is avoided because nalgebra's bidiagonal SVD can return a
/// factorization that does not recompose the input when several singular
/// values are exactly zero.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let tol = rows.max(cols) as f64 * r[(0, 0)].abs() * f64::EPSILON;
    let rank = (0..rows.min(cols)).take_while(|&i| r[(i, i)].abs() > tol).count();
    if rank == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let q1 = qr.q().columns(0, rank).into_owned();
    // J P = Q1 R2^T Q2^T, so pinv(J P) = Q2 R2^-T Q1^T.
    let lq = r.rows(0, rank).transpose().qr();
    let x = lq.r().transpose().solve_lower_triangular(&q1.transpose()).expect("non-zero pivots");
    let mut p = lq.q() * x;
    qr.p().inv_permute_rows(&mut p);
    p
}

/// Minimum-norm solution `J` of `inputs * J^T ≈ outputs`, with one sample per
/// row; `J` has shape `(outputs.ncols(), inputs.ncols())`.
pub fn fit_linear(inputs: &DMatrix<f64>, outputs: &DMatrix<f64>) -> DMatrix<f64> {
    (pseudo_inverse(inputs) * outputs).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_and_row_vector() {
        let i = DMatrix::<f64>::identity(2, 2);
        assert_abs_diff_eq!(pseudo_inverse(&i), i, epsilon = 1e-14);
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let p = pseudo_inverse(&j);
        assert_eq!(p.shape(), (2, 1));
        assert_abs_diff_eq!(p[(0, 0)], 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(p[(1, 0)], 0.4, epsilon = 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let z = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(pseudo_inverse(&z), DMatrix::<f64>::zeros(3, 2));
    }

    #[test]
    fn full_row_rank_matches_closed_form() {
        let j = DMatrix::from_row_slice(2, 4, &[1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 4.0, -1.0]);
        let closed = j.transpose() * (&j * j.transpose()).try_inverse().unwrap();
        assert_abs_diff_eq!(pseudo_inverse(&j), closed, epsilon = 1e-12);
    }
}
