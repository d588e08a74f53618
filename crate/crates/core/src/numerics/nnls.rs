//! Lawson–Hanson active set method for non-negative least squares.

use ndarray::{Array2, ArrayView1, ArrayView2};

use super::least_squares;
use crate::{Error, Result, Scalar};

/// Solves `min ‖design·x − target‖₂` subject to `x ≥ 0`.
pub fn nnls<T: Scalar>(design: ArrayView2<T>, target: ArrayView1<T>) -> Result<Vec<T>> {
    let (m, n) = design.dim();
    if m == 0 || n == 0 {
        return Err(Error::param(
            "design",
            format!("empty {m}x{n} design matrix"),
        ));
    }
    if target.len() != m {
        return Err(Error::param(
            "target",
            format!("length {} does not match {m} design rows", target.len()),
        ));
    }
    if design.iter().chain(target.iter()).any(|v| !v.is_finite()) {
        return Err(Error::param("design", "entries must be finite"));
    }

    let max_abs_col = (0..n)
        .map(|j| design.column(j).iter().map(|v| v.abs()).sum::<T>())
        .fold(T::zero(), T::max);
    let tol = T::of(10.0) * T::epsilon() * max_abs_col * T::of_usize(m.max(n));

    let mut x = vec![T::zero(); n];
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let mut w = dual(&design, &target, &x);
        // Candidates rejected in this round (dependent column or a trial
        // solution that would not move into the interior).
        let mut rejected = vec![false; n];
        let trial = loop {
            let cand = (0..n)
                .filter(|&j| !passive[j] && !rejected[j] && w[j] > tol)
                .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap());
            let Some(j) = cand else { break None };
            let mut set: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            set.push(j);
            set.sort_unstable();
            match solve_on(&design, &target, &set) {
                Some(s) if s[set.iter().position(|&k| k == j).unwrap()] > T::zero() => {
                    break Some((j, set, s));
                }
                _ => {
                    rejected[j] = true;
                    w[j] = T::zero();
                }
            }
        };
        let Some((j, mut set, mut s)) = trial else {
            break;
        };
        passive[j] = true;

        // Inner loop: step back towards feasibility until the unconstrained
        // solution on the passive set is strictly positive.
        loop {
            if s.iter().all(|&v| v > T::zero()) {
                break;
            }
            let mut step = T::infinity();
            let mut blocking = None;
            for (pos, &k) in set.iter().enumerate() {
                if s[pos] <= T::zero() {
                    let denom = x[k] - s[pos];
                    let ratio = if denom > T::zero() {
                        x[k] / denom
                    } else {
                        T::zero()
                    };
                    if ratio < step {
                        step = ratio;
                        blocking = Some(k);
                    }
                }
            }
            for (pos, &k) in set.iter().enumerate() {
                let xk = x[k];
                x[k] = xk + step * (s[pos] - xk);
            }
            if let Some(k) = blocking {
                x[k] = T::zero();
            }
            for &k in &set {
                if x[k] <= tol {
                    x[k] = T::zero();
                    passive[k] = false;
                }
            }
            set.retain(|&k| passive[k]);
            if set.is_empty() {
                s.clear();
                break;
            }
            match solve_on(&design, &target, &set) {
                Some(next) => s = next,
                None => {
                    s = set.iter().map(|&k| x[k]).collect();
                    break;
                }
            }
        }
        for v in x.iter_mut() {
            *v = T::zero();
        }
        for (pos, &k) in set.iter().enumerate() {
            x[k] = s[pos].max(T::zero());
        }
    }
    Ok(x)
}

/// Negative gradient `designᵀ(target − design·x)`.
fn dual<T: Scalar>(design: &ArrayView2<T>, target: &ArrayView1<T>, x: &[T]) -> Vec<T> {
    let (m, n) = design.dim();
    let resid: Vec<T> = (0..m)
        .map(|i| target[i] - (0..n).map(|j| design[(i, j)] * x[j]).sum::<T>())
        .collect();
    (0..n)
        .map(|j| (0..m).map(|i| design[(i, j)] * resid[i]).sum())
        .collect()
}

fn solve_on<T: Scalar>(
    design: &ArrayView2<T>,
    target: &ArrayView1<T>,
    set: &[usize],
) -> Option<Vec<T>> {
    let m = design.nrows();
    let sub = Array2::from_shape_fn((m, set.len()), |(i, c)| design[(i, set[c])]);
    least_squares(&sub, &target.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array1};

    #[test]
    fn identity_design() {
        let x = nnls(Array2::<f64>::eye(2).view(), array![0.5, 0.2].view()).unwrap();
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn clipping_on_diagonal_design() {
        let x = nnls(Array2::<f64>::eye(2).view(), array![3.0, -1.0].view()).unwrap();
        assert_abs_diff_eq!(x[0], 3.0, epsilon = 1e-12);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn one_dimensional_mean_matches_grid_search() {
        let a = array![[1.0], [1.0]];
        let b = array![1.0, 3.0];
        let x = nnls(a.view(), b.view()).unwrap();
        let grid_best = (0..=500)
            .map(|k| k as f64 * 0.01)
            .min_by(|p, q| {
                let r = |v: f64| (v - 1.0).powi(2) + (v - 3.0).powi(2);
                r(*p).partial_cmp(&r(*q)).unwrap()
            })
            .unwrap();
        assert_abs_diff_eq!(grid_best, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn all_negative_target_gives_zero() {
        let a = array![[1.0, 0.5], [0.2, 1.0], [0.3, 0.3]];
        let x = nnls(a.view(), array![-1.0, -2.0, -0.5].view()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn underdetermined_and_duplicate_columns() {
        let a = array![[1.0, 1.0, 2.0]];
        let x = nnls(a.view(), array![4.0].view()).unwrap();
        let fit = x[0] + x[1] + 2.0 * x[2];
        assert_abs_diff_eq!(fit, 4.0, epsilon = 1e-9);
        assert!(x.iter().all(|&v| v >= 0.0));

        let dup = array![[1.0, 1.0], [1.0, 1.0]];
        let x = nnls(dup.view(), array![1.0, 1.0].view()).unwrap();
        assert_abs_diff_eq!(x[0] + x[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn empty_inputs_rejected() {
        let a = Array2::<f64>::zeros((0, 2));
        assert!(nnls(a.view(), Array1::zeros(0).view()).is_err());
        let a = Array2::<f64>::zeros((2, 0));
        assert!(nnls(a.view(), Array1::zeros(2).view()).is_err());
        let a = Array2::<f64>::eye(2);
        assert!(nnls(a.view(), Array1::zeros(3).view()).is_err());
    }

    #[test]
    fn f32_instantiation() {
        let x = nnls(Array2::<f32>::eye(2).view(), array![3.0f32, -1.0].view()).unwrap();
        assert_eq!(x, vec![3.0, 0.0]);
    }
}
