//! Confidence-weighted matrix factorization for implicit feedback, fit by
//! alternating least squares.
//!
//! Minimizes `Σ_ui c_ui (r_ui − θ_u·β_i)² + λ(‖θ‖² + ‖β‖²)` over every cell
//! of the binary interaction matrix, with `c_ui = a` on observed
//! interactions and `c_ui = b` elsewhere. Each half-sweep solves its block
//! exactly, so the objective never increases.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use super::linalg::cholesky_solve_flat;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmfParams<T> {
    pub k_model: usize,
    /// Confidence on observed interactions.
    pub a: T,
    /// Confidence on unobserved cells.
    pub b: T,
    pub lambda: T,
    pub max_sweeps: usize,
    /// Stop once the relative objective change of a sweep drops below this.
    pub tolerance: T,
}

impl<T: Scalar> Default for WmfParams<T> {
    fn default() -> Self {
        WmfParams {
            k_model: 20,
            a: T::one(),
            b: T::of(0.001),
            lambda: T::of(0.01),
            max_sweeps: 100,
            tolerance: T::of(1e-6),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorizationResult<T> {
    /// `|U| × k_model`
    pub user_factors: Array2<T>,
    /// `|I| × k_model`
    pub item_factors: Array2<T>,
    pub final_objective: T,
    /// Objective at initialization followed by the value after each sweep.
    pub objective_trace: Vec<T>,
}

impl<T: Scalar> FactorizationResult<T> {
    pub fn sweeps(&self) -> usize {
        self.objective_trace.len().saturating_sub(1)
    }

    pub fn predict(&self, user: usize, item: usize) -> T {
        self.user_factors
            .row(user)
            .iter()
            .zip(self.item_factors.row(item))
            .fold(T::zero(), |acc, (&p, &q)| acc + p * q)
    }
}

pub fn weighted_mf_train<T: Scalar, R: Rng + ?Sized>(
    interactions: ArrayView2<bool>,
    params: &WmfParams<T>,
    rng: &mut R,
) -> Result<FactorizationResult<T>> {
    let (n_users, n_items) = interactions.dim();
    if n_users == 0 || n_items == 0 {
        return Err(Error::param(
            "interactions",
            format!("degenerate {n_users}x{n_items} interaction matrix"),
        ));
    }
    let WmfParams {
        k_model: k,
        a,
        b,
        lambda,
        max_sweeps,
        tolerance,
    } = *params;
    if k == 0 {
        return Err(Error::param("k_model", "must be at least 1"));
    }
    if !(b > T::zero() && a > b) {
        return Err(Error::param(
            "a",
            format!("require a > b > 0, got a = {a}, b = {b}"),
        ));
    }
    if !(lambda >= T::zero()) {
        return Err(Error::param(
            "lambda",
            format!("must be non-negative, got {lambda}"),
        ));
    }

    let by_user: Vec<Vec<usize>> = (0..n_users)
        .map(|u| (0..n_items).filter(|&i| interactions[(u, i)]).collect())
        .collect();
    let mut by_item: Vec<Vec<usize>> = vec![Vec::new(); n_items];
    for (u, items) in by_user.iter().enumerate() {
        for &i in items {
            by_item[i].push(u);
        }
    }

    let scale = T::one() / T::of_usize(k).sqrt();
    let mut theta =
        Array2::from_shape_simple_fn((n_users, k), || T::of(rng.random::<f64>()) * scale);
    let mut beta =
        Array2::from_shape_simple_fn((n_items, k), || T::of(rng.random::<f64>()) * scale);

    let mut trace = vec![objective(&theta, &beta, &by_user, a, b, lambda)];
    for _ in 0..max_sweeps {
        solve_block(&mut theta, &beta, &by_user, a, b, lambda);
        solve_block(&mut beta, &theta, &by_item, a, b, lambda);
        let current = objective(&theta, &beta, &by_user, a, b, lambda);
        let previous = *trace.last().unwrap();
        trace.push(current);
        let denom = previous.abs().max(T::min_positive_value());
        if (previous - current).abs() / denom < tolerance {
            break;
        }
    }

    Ok(FactorizationResult {
        user_factors: theta,
        item_factors: beta,
        final_objective: *trace.last().unwrap(),
        objective_trace: trace,
    })
}

/// Exact minimization over the rows of `target` with `fixed` held constant.
/// `positives[r]` lists the rows of `fixed` observed together with row `r`.
fn solve_block<T: Scalar>(
    target: &mut Array2<T>,
    fixed: &Array2<T>,
    positives: &[Vec<usize>],
    a: T,
    b: T,
    lambda: T,
) {
    let k = fixed.ncols();
    let fixed = fixed.as_standard_layout();
    let rows = fixed.as_slice().expect("standard layout");
    // b·FᵀF + λI, lower triangle
    let mut base = vec![T::zero(); k * k];
    for f in rows.chunks_exact(k) {
        for p in 0..k {
            let fp = f[p];
            for q in 0..=p {
                base[p * k + q] += fp * f[q];
            }
        }
    }
    for v in base.iter_mut() {
        *v *= b;
    }
    for d in 0..k {
        base[d * k + d] += lambda;
    }
    let boost = a - b;
    let mut system = vec![T::zero(); k * k];
    let mut rhs = vec![T::zero(); k];
    for (r, pos) in positives.iter().enumerate() {
        let mut out = target.row_mut(r);
        if pos.is_empty() {
            // zero right-hand side: the minimizer is the origin
            out.fill(T::zero());
            continue;
        }
        system.copy_from_slice(&base);
        rhs.fill(T::zero());
        for &other in pos {
            let f = &rows[other * k..(other + 1) * k];
            for p in 0..k {
                let fp = f[p];
                rhs[p] += a * fp;
                let bf = boost * fp;
                let row = &mut system[p * k..p * k + p + 1];
                for (s, &fq) in row.iter_mut().zip(f) {
                    *s += bf * fq;
                }
            }
        }
        solve_with_jitter(&system, k, &mut rhs);
        out.iter_mut().zip(&rhs).for_each(|(t, &s)| *t = s);
    }
}

/// Cholesky solve, adding the smallest diagonal jitter that makes a
/// semidefinite system (possible only when `lambda = 0`) solvable.
fn solve_with_jitter<T: Scalar>(system: &[T], k: usize, rhs: &mut [T]) {
    let original = rhs.to_vec();
    let mut scratch = system.to_vec();
    if cholesky_solve_flat(&mut scratch, k, rhs) {
        return;
    }
    let trace: T = (0..k).map(|d| system[d * k + d]).sum();
    let mut jitter = (trace / T::of_usize(k)).max(T::one()) * T::epsilon() * T::of(16.0);
    loop {
        scratch.copy_from_slice(system);
        for d in 0..k {
            scratch[d * k + d] += jitter;
        }
        rhs.copy_from_slice(&original);
        if cholesky_solve_flat(&mut scratch, k, rhs) {
            return;
        }
        jitter *= T::of(10.0);
    }
}

fn objective<T: Scalar>(
    theta: &Array2<T>,
    beta: &Array2<T>,
    by_user: &[Vec<usize>],
    a: T,
    b: T,
    lambda: T,
) -> T {
    // Σ over all cells of b·p² via the item Gram matrix, then correct the
    // observed cells to a·(1 − p)².
    let gram = beta.t().dot(beta);
    let mut total = T::zero();
    for (u, items) in by_user.iter().enumerate() {
        let t = theta.row(u);
        let gt = gram.dot(&t);
        total += b * t.dot(&gt);
        for &i in items {
            let p = t.dot(&beta.row(i));
            total += a * (T::one() - p) * (T::one() - p) - b * p * p;
        }
    }
    let reg: T = theta.iter().chain(beta.iter()).map(|v| *v * *v).sum();
    total + lambda * reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_objective(
        r: &Array2<bool>,
        f: &FactorizationResult<f64>,
        a: f64,
        b: f64,
        lambda: f64,
    ) -> f64 {
        let mut total = 0.0;
        for ((u, i), &obs) in r.indexed_iter() {
            let (c, target) = if obs { (a, 1.0) } else { (b, 0.0) };
            total += c * (target - f.predict(u, i)).powi(2);
        }
        let reg: f64 = f
            .user_factors
            .iter()
            .chain(f.item_factors.iter())
            .map(|v| v * v)
            .sum();
        total + lambda * reg
    }

    #[test]
    fn objective_matches_cellwise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = Array2::from_shape_fn((7, 9), |_| rng.random::<f64>() < 0.3);
        let params = WmfParams {
            k_model: 3,
            lambda: 0.05,
            max_sweeps: 4,
            ..Default::default()
        };
        let f = weighted_mf_train(r.view(), &params, &mut rng).unwrap();
        let brute = brute_objective(&r, &f, 1.0, 0.001, 0.05);
        assert!((brute - f.final_objective).abs() <= 1e-10 * brute.max(1.0));
    }

    #[test]
    fn all_ones_rank_one_recovery() {
        let r = Array2::from_elem((2, 2), true);
        let params: WmfParams<f64> = WmfParams {
            k_model: 1,
            lambda: 1e-6,
            ..Default::default()
        };
        let f = weighted_mf_train(r.view(), &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for u in 0..2 {
            for i in 0..2 {
                assert!((f.predict(u, i) - 1.0).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn all_zeros_shrinks_to_zero() {
        let r = Array2::from_elem((5, 6), false);
        let params: WmfParams<f64> = WmfParams {
            k_model: 2,
            lambda: 0.1,
            ..Default::default()
        };
        let f = weighted_mf_train(r.view(), &params, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(f.user_factors.iter().all(|v| v.abs() < 1e-6));
        assert!(f.item_factors.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn monotone_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let r = Array2::from_shape_fn((20, 30), |_| rng.random::<f64>() < 0.2);
            let f = weighted_mf_train::<f64, _>(
                r.view(),
                &WmfParams {
                    k_model: 5,
                    ..Default::default()
                },
                &mut rng,
            )
            .unwrap();
            for w in f.objective_trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
            }
            assert!(f.final_objective.is_finite());
        }
    }

    #[test]
    fn zero_lambda_rank_deficient_is_solvable() {
        let r = Array2::from_shape_fn((3, 2), |(u, _)| u == 0);
        let params: WmfParams<f64> = WmfParams {
            k_model: 4,
            lambda: 0.0,
            max_sweeps: 10,
            ..Default::default()
        };
        let f = weighted_mf_train(r.view(), &params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(f.final_objective.is_finite());
    }

    #[test]
    fn rejects_bad_parameters() {
        let r = Array2::from_elem((2, 2), true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad =
            |p: WmfParams<f64>, rng: &mut ChaCha8Rng| weighted_mf_train(r.view(), &p, rng).is_err();
        assert!(bad(
            WmfParams {
                k_model: 0,
                ..Default::default()
            },
            &mut rng
        ));
        assert!(bad(
            WmfParams {
                a: 0.001,
                b: 0.001,
                ..Default::default()
            },
            &mut rng
        ));
        assert!(bad(
            WmfParams {
                b: 0.0,
                ..Default::default()
            },
            &mut rng
        ));
        assert!(bad(
            WmfParams {
                lambda: -1.0,
                ..Default::default()
            },
            &mut rng
        ));
        let empty = Array2::<bool>::from_elem((0, 3), false);
        assert!(
            weighted_mf_train::<f64, _>(empty.view(), &WmfParams::default(), &mut rng).is_err()
        );
    }

    #[test]
    fn stops_at_sweep_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = Array2::from_shape_fn((10, 10), |_| rng.random::<f64>() < 0.3);
        let params = WmfParams {
            k_model: 3,
            max_sweeps: 2,
            tolerance: 0.0,
            ..Default::default()
        };
        let f = weighted_mf_train(r.view(), &params, &mut rng).unwrap();
        assert_eq!(f.sweeps(), 2);
    }
}
