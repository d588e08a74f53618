use approx::assert_relative_eq;
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use confound_sim::numerics::{
    beta_prime_params, nnls, sample_beta_prime, sample_dirichlet, sample_utility,
    weighted_mf_train, SimplexVector, WmfParams,
};

fn residual(a: &Array2<f64>, b: &Array1<f64>, x: &Array1<f64>) -> f64 {
    (a.dot(x) - b).mapv(|r| r * r).sum().sqrt()
}

fn design(m: usize, n: usize, entries: Vec<f64>) -> Array2<f64> {
    Array2::from_shape_vec((m, n), entries[..m * n].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn nnls_meets_kkt(
        m in 1usize..=10,
        n in 1usize..=10,
        entries in prop::collection::vec(-3.0f64..3.0, 100),
        rhs in prop::collection::vec(-3.0f64..3.0, 10),
    ) {
        let a = design(m, n, entries);
        let b = Array1::from(rhs[..m].to_vec());
        let x = Array1::from(nnls(a.view(), b.view()).unwrap());
        let g = a.t().dot(&(a.dot(&x) - &b));
        for j in 0..n {
            prop_assert!(x[j] >= 0.0);
            if x[j] > 0.0 {
                prop_assert!(g[j].abs() <= 1e-6, "active gradient {}", g[j]);
            } else {
                prop_assert!(g[j] >= -1e-6, "zero coordinate gradient {}", g[j]);
            }
        }
    }

    #[test]
    fn nnls_no_worse_than_grid_search(
        m in 1usize..=6,
        n in 1usize..=2,
        entries in prop::collection::vec(0.2f64..1.0, 12),
        rhs in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let a = design(m, n, entries);
        let b = Array1::from(rhs[..m].to_vec());
        let x = Array1::from(nnls(a.view(), b.view()).unwrap());
        let steps: Vec<f64> = (0..=400).map(|s| s as f64 * 0.01).collect();
        let best = if n == 1 {
            steps.iter().map(|&p| residual(&a, &b, &Array1::from(vec![p]))).fold(f64::INFINITY, f64::min)
        } else {
            steps
                .iter()
                .flat_map(|&p| steps.iter().map(move |&q| (p, q)))
                .map(|(p, q)| residual(&a, &b, &Array1::from(vec![p, q])))
                .fold(f64::INFINITY, f64::min)
        };
        prop_assert!(residual(&a, &b, &x) <= best + 1e-12);
    }

    #[test]
    fn beta_params_round_trip(mu in 1e-4f64..0.9999, frac in 1e-9f64..0.999) {
        let var = mu * (1.0 - mu) * frac;
        let p = beta_prime_params(mu, var.sqrt()).unwrap();
        prop_assert!(p.alpha > 0.0 && p.beta > 0.0);
        prop_assert!(((p.mean() - mu) / mu).abs() <= 1e-12);
        prop_assert!(((p.variance() - var) / var).abs() <= 1e-12);
    }

    #[test]
    fn dirichlet_draws_lie_on_the_simplex(
        conc in prop::collection::vec(1e-4f64..50.0, 1..40),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = sample_dirichlet(&conc, &mut rng).unwrap();
        prop_assert_eq!(v.len(), conc.len());
        prop_assert!(SimplexVector::new(v.into_inner()).is_ok());
    }

    #[test]
    fn samplers_are_reproducible(seed in any::<u64>(), mu in 0.01f64..0.99) {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = sample_beta_prime(mu, 0.05, &mut rng).unwrap();
            let b: f64 = sample_utility(mu, 1e-5, &mut rng);
            let c = sample_dirichlet(&[0.01f64, 1.0, 3.0], &mut rng).unwrap();
            (a.to_bits(), b.to_bits(), c.into_inner().iter().map(|x: &f64| x.to_bits()).collect::<Vec<_>>())
        };
        prop_assert_eq!(draw(), draw());
    }
}

/// Gradient of the weighted objective with respect to every factor entry.
fn objective_gradient(
    r: &Array2<bool>,
    p: &WmfParams<f64>,
    theta: &Array2<f64>,
    beta: &Array2<f64>,
) -> f64 {
    let pred = theta.dot(&beta.t());
    let resid = Array2::from_shape_fn(r.dim(), |(u, i)| {
        let (target, c) = if r[[u, i]] { (1.0, p.a) } else { (0.0, p.b) };
        c * (pred[[u, i]] - target)
    });
    let g_theta = resid.dot(beta) * 2.0 + theta * (2.0 * p.lambda);
    let g_beta = resid.t().dot(theta) * 2.0 + beta * (2.0 * p.lambda);
    g_theta
        .iter()
        .chain(g_beta.iter())
        .fold(0.0f64, |m, g| m.max(g.abs()))
}

#[test]
fn converged_factorization_is_a_stationary_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = Array2::from_shape_fn((8, 12), |(u, i)| (u * 7 + i * 3) % 5 < 2);
    let p = WmfParams {
        k_model: 3,
        max_sweeps: 5000,
        tolerance: 1e-15,
        ..WmfParams::default()
    };
    let fit = weighted_mf_train(r.view(), &p, &mut rng).unwrap();
    let grad = objective_gradient(&r, &p, &fit.user_factors, &fit.item_factors);
    assert!(grad < 1e-5, "gradient {grad}");
}

#[test]
fn all_ones_two_by_two_matches_gradient_descent() {
    // Plain gradient descent on the same objective from a fixed start.
    let r = Array2::from_elem((2, 2), true);
    let p = WmfParams {
        k_model: 1,
        max_sweeps: 1000,
        tolerance: 1e-14,
        ..WmfParams::default()
    };
    let fit = weighted_mf_train(r.view(), &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut theta = Array2::from_elem((2, 1), 0.3);
    let mut beta = Array2::from_elem((2, 1), 0.4);
    for _ in 0..200_000 {
        let resid = theta.dot(&beta.t()) - 1.0;
        let gt = resid.dot(&beta) * 2.0 + &theta * (2.0 * p.lambda);
        let gb = resid.t().dot(&theta) * 2.0 + &beta * (2.0 * p.lambda);
        theta = theta - gt * 0.01;
        beta = beta - gb * 0.01;
    }
    let gd = theta.dot(&beta.t());
    for u in 0..2 {
        for i in 0..2 {
            assert_relative_eq!(fit.predict(u, i), gd[[u, i]], epsilon = 1e-6);
        }
    }
    // symmetric fixed point θ = β = s with 2s² + λ = 2
    assert_relative_eq!(gd[[0, 0]], 1.0 - p.lambda / 2.0, epsilon = 1e-6);
}

#[test]
fn block_structure_is_recovered() {
    let r = Array2::from_shape_fn((20, 30), |(u, i)| (u < 10) == (i < 15));
    let p: WmfParams<f64> = WmfParams {
        k_model: 2,
        ..WmfParams::default()
    };
    let fit = weighted_mf_train(r.view(), &p, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let (mut within, mut across, mut nw, mut na) = (0.0, 0.0, 0, 0);
    for u in 0..20 {
        for i in 0..30 {
            if r[[u, i]] {
                within += fit.predict(u, i);
                nw += 1;
            } else {
                across += fit.predict(u, i);
                na += 1;
            }
        }
    }
    assert!(within / nw as f64 > across / na as f64 + 0.5);
}

#[test]
fn positives_score_above_the_global_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    use rand::Rng;
    for _ in 0..10 {
        let r = Array2::from_shape_fn((30, 50), |_| rng.random_bool(0.15));
        let fit = weighted_mf_train(r.view(), &WmfParams::default(), &mut rng).unwrap();
        let pred = fit.user_factors.dot(&fit.item_factors.t());
        let global = pred.mean().unwrap();
        let (sum, n) = r
            .indexed_iter()
            .filter(|(_, &x)| x)
            .fold((0.0, 0usize), |(s, n), (ix, _)| (s + pred[ix], n + 1));
        assert!(sum / n as f64 > global);
    }
}
