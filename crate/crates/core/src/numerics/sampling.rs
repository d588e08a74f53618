use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::{Error, Result, Scalar};

/// Beta distribution described by its mean and spread, together with the
/// equivalent standard shape parameters.
///
/// The conversion treats `sigma²` as the variance, so the Beta has mean
/// `mu` and variance `sigma²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPrimeParams<T> {
    pub mu: T,
    pub sigma: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> BetaPrimeParams<T> {
    pub fn mean(&self) -> T {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> T {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + T::one()))
    }
}

/// Shape parameters of the Beta with mean `mu` and variance `sigma²`:
/// `alpha = ((1 − mu)/sigma² − 1/mu)·mu²`, `beta = alpha·(1/mu − 1)`.
pub fn beta_prime_params<T: Scalar>(mu: T, sigma: T) -> Result<BetaPrimeParams<T>> {
    if !(mu > T::zero() && mu < T::one()) {
        return Err(Error::param("mu", format!("must lie in (0, 1), got {mu}")));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::param(
            "sigma",
            format!("must be positive and finite, got {sigma}"),
        ));
    }
    let var = sigma * sigma;
    if !(var < mu * (T::one() - mu)) {
        return Err(Error::param(
            "sigma",
            format!(
                "sigma² = {var} must be below mu(1 − mu) = {}",
                mu * (T::one() - mu)
            ),
        ));
    }
    let alpha = ((T::one() - mu) / var - mu.recip()) * mu * mu;
    let beta = alpha * (mu.recip() - T::one());
    Ok(BetaPrimeParams {
        mu,
        sigma,
        alpha,
        beta,
    })
}

/// One draw from the Beta with mean `mu` and variance `sigma²`.
pub fn sample_beta_prime<T: Scalar, R: Rng + ?Sized>(mu: T, sigma: T, rng: &mut R) -> Result<T> {
    let p = beta_prime_params(mu, sigma)?;
    Ok(T::of(beta_draw(p.alpha.as_f64(), p.beta.as_f64(), rng)))
}

/// Utility draw used by world generation.
///
/// Behaves like [`sample_beta_prime`] whenever that is defined. Means so
/// close to 0 or 1 that `sigma²` exceeds the largest attainable Beta
/// variance `mu(1 − mu)` get the variance capped at half that bound, and
/// means of exactly 0 or 1 are returned as point masses.
pub fn sample_utility<T: Scalar, R: Rng + ?Sized>(mu: T, sigma: T, rng: &mut R) -> T {
    let mu = mu.as_f64();
    if mu <= 0.0 {
        return T::zero();
    }
    if mu >= 1.0 {
        return T::one();
    }
    let bound = mu * (1.0 - mu);
    let var = (sigma.as_f64() * sigma.as_f64()).min(0.5 * bound);
    let total = bound / var - 1.0;
    let (alpha, beta) = (mu * total, (1.0 - mu) * total);
    T::of(beta_draw(alpha, beta, rng))
}

/// Point of the probability simplex: non-negative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> SimplexVector<T> {
    /// Validates `values` against the simplex invariants (tolerance 1e-9 on
    /// the sum).
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("values", "simplex vector must be non-empty"));
        }
        if values.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::param(
                "values",
                "simplex entries must be non-negative",
            ));
        }
        let sum: f64 = values.iter().map(|v| v.as_f64()).sum();
        let tol = if std::mem::size_of::<T>() < 8 {
            1e-5
        } else {
            1e-9
        };
        if (sum - 1.0).abs() > tol {
            return Err(Error::param(
                "values",
                format!("simplex entries sum to {sum}"),
            ));
        }
        Ok(SimplexVector { values })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.values
    }
}

/// One draw from `Dirichlet(concentration)`.
///
/// Gamma variates are generated in log space so that concentrations far
/// below one (which underflow a direct Gamma draw) still produce a proper
/// point of the simplex.
pub fn sample_dirichlet<T: Scalar, R: Rng + ?Sized>(
    concentration: &[T],
    rng: &mut R,
) -> Result<SimplexVector<T>> {
    if concentration.is_empty() {
        return Err(Error::param("concentration", "must be non-empty"));
    }
    if let Some(c) = concentration
        .iter()
        .find(|c| !(**c > T::zero()) || !c.is_finite())
    {
        return Err(Error::param(
            "concentration",
            format!("entries must be positive and finite, got {c}"),
        ));
    }
    let logs: Vec<f64> = concentration
        .iter()
        .map(|c| ln_gamma_draw(c.as_f64(), rng))
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let values: Vec<T> = weights.iter().map(|w| T::of(w / total)).collect();
    Ok(SimplexVector { values })
}

/// Natural log of a `Gamma(shape, 1)` draw. Shapes below one use the
/// boosting identity `G(a) = G(a + 1)·U^(1/a)`.
fn ln_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        gamma_draw(shape, rng).ln()
    } else {
        let boosted = gamma_draw(shape + 1.0, rng).ln();
        let u = 1.0 - rng.random::<f64>();
        boosted + u.ln() / shape
    }
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0)
        .expect("shape validated positive and finite")
        .sample(rng)
}

fn beta_draw<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let lx = ln_gamma_draw(alpha, rng);
    let ly = ln_gamma_draw(beta, rng);
    // x / (x + y) evaluated as a logistic of the log ratio
    1.0 / (1.0 + (ly - lx).exp())
}
