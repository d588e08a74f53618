//! Self-checks of the numerical kernels against independent oracles.
//!
//! Run by the `validate` subcommand; every check draws its own random
//! instances from a fixed seed so results are reproducible.

use std::fmt;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metrics::gini;
use crate::numerics::{beta_prime_params, nnls, sample_dirichlet, weighted_mf_train, WmfParams};

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, worst: f64, limit: f64, what: &str) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= limit,
        detail: format!("worst {what} {worst:.3e} (limit {limit:.0e})"),
    }
}

/// Runs every check.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_gini(seed, 1000),
        check_nnls(seed, 1000),
        check_mf_monotone(seed, 100),
        check_beta_round_trip(seed, 1000),
        check_dirichlet(seed, 1000),
    ]
}

/// Mean absolute difference form of the Gini coefficient.
pub fn gini_mad(counts: &[f64]) -> f64 {
    let n = counts.len() as f64;
    let total: f64 = counts.iter().sum();
    let sum_abs: f64 = counts
        .iter()
        .flat_map(|a| counts.iter().map(move |b| (a - b).abs()))
        .sum();
    sum_abs / (2.0 * n * total)
}

pub fn check_gini(seed: u64, trials: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6131);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng.random_range(1..=50);
        let mut counts: Vec<f64> = (0..n).map(|_| rng.random_range(0..30) as f64).collect();
        if counts.iter().all(|&c| c == 0.0) {
            counts[0] = 1.0;
        }
        let g = gini(&counts).expect("positive total");
        worst = worst.max((g - gini_mad(&counts)).abs());
    }
    outcome("gini_vs_mean_absolute_difference", worst, 1e-9, "abs error")
}

pub fn check_nnls(seed: u64, trials: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4e4e);
    let mut worst = 0.0f64;
    let mut negative = 0usize;
    for _ in 0..trials {
        let m = rng.random_range(1..=15);
        let n = rng.random_range(1..=10);
        let a: Array2<f64> = Array2::from_shape_fn((m, n), |_| rng.random_range(-1.0..1.0));
        let b: Array1<f64> = Array1::from_shape_fn(m, |_| rng.random_range(-1.0..1.0));
        let x = match nnls(a.view(), b.view()) {
            Ok(x) => Array1::from(x),
            Err(_) => {
                worst = f64::INFINITY;
                continue;
            }
        };
        negative += x.iter().filter(|&&v| v < 0.0).count();
        let grad = a.t().dot(&(a.dot(&x) - &b));
        for (xj, gj) in x.iter().zip(grad.iter()) {
            let violation = if *xj > 0.0 { gj.abs() } else { (-gj).max(0.0) };
            worst = worst.max(violation);
        }
    }
    let mut o = outcome("nnls_kkt", worst, 1e-6, "KKT violation");
    if negative > 0 {
        o.passed = false;
        o.detail
            .push_str(&format!(", {negative} negative coefficients"));
    }
    o
}

pub fn check_mf_monotone(seed: u64, trials: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3f3f);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let users = rng.random_range(2..=25);
        let items = rng.random_range(2..=30);
        let density = rng.random_range(0.05..0.5);
        let r = Array2::from_shape_fn((users, items), |_| rng.random_bool(density));
        let params: WmfParams<f64> = WmfParams {
            k_model: rng.random_range(1..=6),
            lambda: rng.random_range(1e-3..1.0),
            max_sweeps: 30,
            tolerance: 0.0,
            ..WmfParams::default()
        };
        let fit = weighted_mf_train(r.view(), &params, &mut rng).expect("valid instance");
        for w in fit.objective_trace.windows(2) {
            worst = worst.max((w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE));
        }
    }
    outcome(
        "weighted_mf_objective_monotone",
        worst.max(0.0),
        1e-12,
        "relative increase",
    )
}

pub fn check_beta_round_trip(seed: u64, trials: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbe7a);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mu: f64 = rng.random_range(0.01..0.99);
        let var = mu * (1.0 - mu) * rng.random_range(1e-6..0.99);
        let sigma = var.sqrt();
        let p = beta_prime_params(mu, sigma).expect("feasible parameters");
        worst = worst
            .max(((p.mean() - mu) / mu).abs())
            .max(((p.variance() - var) / var).abs());
    }
    outcome(
        "beta_mean_variance_round_trip",
        worst,
        1e-12,
        "relative error",
    )
}

pub fn check_dirichlet(seed: u64, trials: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1c1);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let k = rng.random_range(1..=40);
        let conc: Vec<f64> = (0..k)
            .map(|_| 10f64.powf(rng.random_range(-4.0..2.0)))
            .collect();
        let v = sample_dirichlet(&conc, &mut rng).expect("valid concentrations");
        let sum: f64 = v.as_slice().iter().sum();
        let neg = v.as_slice().iter().any(|&x| !(x >= 0.0));
        worst = worst.max(if neg {
            f64::INFINITY
        } else {
            (sum - 1.0).abs()
        });
    }
    outcome("dirichlet_on_simplex", worst, 1e-9, "sum error")
}
