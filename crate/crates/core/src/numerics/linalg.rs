//! Small dense solvers. Problem sizes here are at most a few hundred rows by
//! a few dozen columns, so nothing is blocked or pivoted beyond what
//! stability needs.

use ndarray::Array2;

use crate::Scalar;

/// Solves `m x = rhs` for symmetric positive definite `m` in place of `rhs`.
/// Returns `false` (leaving `rhs` unspecified) if `m` is not numerically
/// positive definite.
pub fn cholesky_solve<T: Scalar>(m: &Array2<T>, rhs: &mut [T]) -> bool {
    let n = m.nrows();
    debug_assert_eq!(m.ncols(), n);
    debug_assert_eq!(rhs.len(), n);
    let mut packed: Vec<T> = m.iter().copied().collect();
    cholesky_solve_flat(&mut packed, n, rhs)
}

/// Row-major `n × n` variant of [`cholesky_solve`] that reads only the lower
/// triangle of `m` and overwrites it with the factor.
pub(crate) fn cholesky_solve_flat<T: Scalar>(m: &mut [T], n: usize, rhs: &mut [T]) -> bool {
    for j in 0..n {
        let row_j = &mut m[j * n..(j + 1) * n];
        let mut d = row_j[j];
        for &v in &row_j[..j] {
            d -= v * v;
        }
        if !(d > T::zero()) {
            return false;
        }
        let d = d.sqrt();
        row_j[j] = d;
        for i in (j + 1)..n {
            let (upper, lower) = m.split_at_mut(i * n);
            let row_j = &upper[j * n..j * n + j];
            let row_i = &mut lower[..n];
            let mut s = row_i[j];
            for k in 0..j {
                s -= row_i[k] * row_j[k];
            }
            row_i[j] = s / d;
        }
    }
    // forward: L y = rhs
    for i in 0..n {
        let row = &m[i * n..i * n + i + 1];
        let mut s = rhs[i];
        for k in 0..i {
            s -= row[k] * rhs[k];
        }
        rhs[i] = s / row[i];
    }
    // back: Lᵀ x = y
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= m[k * n + i] * rhs[k];
        }
        rhs[i] = s / m[i * n + i];
    }
    true
}

/// Unconstrained least squares `min ‖a x − b‖₂` by Householder QR.
///
/// Returns `None` when `a` has fewer rows than columns or a column is
/// numerically dependent on the ones before it.
pub fn least_squares<T: Scalar>(a: &Array2<T>, b: &[T]) -> Option<Vec<T>> {
    let (m, n) = a.dim();
    if n > m || b.len() != m {
        return None;
    }
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    let eps = T::epsilon();
    for j in 0..n {
        let col_norm = (0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<T>().sqrt();
        let mut norm = T::zero();
        for i in j..m {
            norm += r[(i, j)] * r[(i, j)];
        }
        let norm = norm.sqrt();
        if norm <= T::of(1e3) * eps * col_norm.max(T::one()) * T::of_usize(m) {
            return None;
        }
        let alpha = if r[(j, j)] > T::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in a scratch vector
        let mut v: Vec<T> = (j..m).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 > T::zero() {
            let two = T::of(2.0);
            for c in j..n {
                let mut s = T::zero();
                for (k, i) in (j..m).enumerate() {
                    s += v[k] * r[(i, c)];
                }
                let f = two * s / vnorm2;
                for (k, i) in (j..m).enumerate() {
                    r[(i, c)] -= f * v[k];
                }
            }
            let mut s = T::zero();
            for (k, i) in (j..m).enumerate() {
                s += v[k] * qtb[i];
            }
            let f = two * s / vnorm2;
            for (k, i) in (j..m).enumerate() {
                qtb[i] -= f * v[k];
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = qtb[i];
        for k in (i + 1)..n {
            s -= r[(i, k)] * x[k];
        }
        x[i] = s / r[(i, i)];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn cholesky_solves_spd_system() {
        let m = array![[4.0, 2.0], [2.0, 3.0]];
        let mut rhs = [2.0, 1.0];
        assert!(cholesky_solve(&m, &mut rhs));
        // 4x + 2y = 2, 2x + 3y = 1 -> x = 0.5, y = 0
        assert_abs_diff_eq!(rhs[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = array![[1.0, 2.0], [2.0, 1.0]];
        let mut rhs = [1.0, 1.0];
        assert!(!cholesky_solve(&m, &mut rhs));
    }

    #[test]
    fn least_squares_line_fit() {
        // y = 1 + 2x through exact points
        let a = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]];
        let b = [1.0, 3.0, 5.0, 7.0];
        let x = least_squares(&a, &b).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn least_squares_detects_dependence() {
        let a = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        assert!(least_squares(&a, &[1.0, 2.0, 3.0]).is_none());
        let wide = array![[1.0, 2.0, 3.0]];
        assert!(least_squares(&wide, &[1.0]).is_none());
    }
}
