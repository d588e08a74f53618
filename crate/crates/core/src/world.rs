//! The latent ground truth: preferences, attributes, utilities and the social
//! network. Recommenders never see this directly.

use std::io::{self, Write};
use std::ops::Range;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

use crate::numerics::{sample_dirichlet, sample_utility};
use crate::{Error, ItemId, Result, Scalar, UserId};

/// Knobs of the generative model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldParams {
    pub num_users: usize,
    /// Latent dimensionality of preferences and attributes.
    pub k: usize,
    pub sigma: f64,
    /// Mean fraction of an item's utility the user knows before consuming.
    pub mu_eta: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams {
            num_users: 100,
            k: 20,
            sigma: 1e-5,
            mu_eta: 0.98,
        }
    }
}

/// Item-indexed matrices are stored item-major (`|I| × |U|`) so spawning
/// items appends rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthWorld<T> {
    pub params: WorldParams,
    /// Global popularity of each preference dimension (sums to 10).
    pub mu_rho: Vec<T>,
    /// Global popularity of each attribute dimension (sums to 0.1).
    pub mu_alpha: Vec<T>,
    /// `|U| × K`, one simplex vector per user.
    pub rho: Array2<T>,
    /// `|I| × K`, one simplex vector per item.
    pub alpha: Array2<T>,
    /// True utility `V`, `|I| × |U|`.
    pub utility: Array2<T>,
    /// Known fraction `η`, `|I| × |U|`.
    pub eta: Array2<T>,
    /// Known utility `P = η·V`, `|I| × |U|`.
    pub known: Array2<T>,
    /// Unknown utility `Q = V − P`, `|I| × |U|`.
    pub unknown: Array2<T>,
    /// Symmetric adjacency with empty diagonal.
    pub social: Array2<bool>,
}

impl<T: Scalar> GroundTruthWorld<T> {
    pub fn num_users(&self) -> usize {
        self.rho.nrows()
    }

    pub fn num_items(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn true_utility(&self, user: UserId, item: ItemId) -> T {
        self.utility[(item, user)]
    }

    pub fn known_utility(&self, user: UserId, item: ItemId) -> T {
        self.known[(item, user)]
    }

    /// `V_u·` restricted to the first `items` items.
    pub fn utility_row(&self, user: UserId, items: usize) -> Vec<T> {
        (0..items).map(|i| self.utility[(i, user)]).collect()
    }

    pub fn neighbors(&self, user: UserId) -> impl Iterator<Item = UserId> + '_ {
        self.social
            .row(user)
            .into_iter()
            .enumerate()
            .filter_map(|(v, &e)| e.then_some(v))
    }
}

/// Draws the population: preference popularity, per-user preferences and the
/// social network. The world starts without items.
pub fn generate_world<T: Scalar, R: Rng + ?Sized>(
    params: &WorldParams,
    rng: &mut R,
) -> Result<GroundTruthWorld<T>> {
    if params.num_users < 2 {
        return Err(Error::param(
            "num_users",
            format!("need at least 2 users to pair, got {}", params.num_users),
        ));
    }
    if params.k == 0 {
        return Err(Error::param(
            "k",
            "latent dimensionality must be at least 1",
        ));
    }
    if !(params.mu_eta > 0.0 && params.mu_eta < 1.0) {
        return Err(Error::param(
            "mu_eta",
            format!("must lie in (0, 1), got {}", params.mu_eta),
        ));
    }
    if !(params.sigma > 0.0) {
        return Err(Error::param(
            "sigma",
            format!("must be positive, got {}", params.sigma),
        ));
    }
    let k = params.k;
    let mu_rho: Vec<T> = sample_dirichlet(&vec![T::one(); k], rng)?
        .into_inner()
        .into_iter()
        .map(|v| v * T::of(10.0))
        .collect();
    let mu_alpha: Vec<T> = sample_dirichlet(&vec![T::of(100.0); k], rng)?
        .into_inner()
        .into_iter()
        .map(|v| v * T::of(0.1))
        .collect();
    // 10·simplex can have entries that underflow to 0 in extreme draws;
    // floor them so the per-user Dirichlet stays well defined.
    let floor = T::min_positive_value();
    let conc: Vec<T> = mu_rho.iter().map(|&c| c.max(floor)).collect();
    let mut rho = Array2::zeros((params.num_users, k));
    for mut row in rho.rows_mut() {
        let draw = sample_dirichlet(&conc, rng)?;
        row.assign(&ArrayView1::from(draw.as_slice()));
    }
    let social = build_social_network(&rho)?;
    Ok(GroundTruthWorld {
        params: *params,
        mu_rho,
        mu_alpha,
        rho,
        alpha: Array2::zeros((0, k)),
        utility: Array2::zeros((0, params.num_users)),
        eta: Array2::zeros((0, params.num_users)),
        known: Array2::zeros((0, params.num_users)),
        unknown: Array2::zeros((0, params.num_users)),
        social,
    })
}

/// Appends `count` items with attributes, utilities and known fractions for
/// every user. Returns the ids of the new items.
pub fn spawn_items<T: Scalar, R: Rng + ?Sized>(
    world: &mut GroundTruthWorld<T>,
    count: usize,
    rng: &mut R,
) -> Result<Range<ItemId>> {
    if count == 0 {
        return Err(Error::param("count", "must spawn at least one item"));
    }
    let users = world.num_users();
    if users == 0 {
        return Err(Error::param("world", "world has no users"));
    }
    let sigma = T::of(world.params.sigma);
    let mu_eta = T::of(world.params.mu_eta);
    let floor = T::min_positive_value();
    let conc: Vec<T> = world.mu_alpha.iter().map(|&c| c.max(floor)).collect();
    let start = world.num_items();
    for _ in 0..count {
        let attrs = Array1::from(sample_dirichlet(&conc, rng)?.into_inner());
        let mut v = Array1::zeros(users);
        let mut eta = Array1::zeros(users);
        for u in 0..users {
            let mean = world.rho.row(u).dot(&attrs).min(T::one());
            v[u] = sample_utility(mean, sigma, rng);
            eta[u] = sample_utility(mu_eta, sigma, rng);
        }
        let p = &eta * &v;
        let q = &v - &p;
        push(&mut world.alpha, attrs.view())?;
        push(&mut world.utility, v.view())?;
        push(&mut world.eta, eta.view())?;
        push(&mut world.known, p.view())?;
        push(&mut world.unknown, q.view())?;
    }
    Ok(start..start + count)
}

fn push<T: Scalar>(m: &mut Array2<T>, row: ArrayView1<T>) -> Result<()> {
    m.push_row(row)
        .map_err(|e| Error::Consistency(format!("matrix append failed: {e}")))
}

/// Binarized covariance of user preference vectors.
///
/// Users `u ≠ v` are connected iff `cov(ρ_u, ρ_v) ≥ θ*` where `θ*` is the
/// minimum over users of their largest off-diagonal covariance: the largest
/// global threshold that leaves nobody isolated.
pub fn build_social_network<T: Scalar>(rho: &Array2<T>) -> Result<Array2<bool>> {
    let n = rho.nrows();
    if n < 2 {
        return Err(Error::param(
            "rho",
            format!("need at least 2 users, got {n}"),
        ));
    }
    let cov = preference_covariance(rho);
    let threshold = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u)
                .map(|v| cov[(u, v)])
                .fold(T::neg_infinity(), T::max)
        })
        .fold(T::infinity(), T::min);
    Ok(Array2::from_shape_fn((n, n), |(u, v)| {
        u != v && cov[(u, v)] >= threshold
    }))
}

/// Sample covariance between every pair of preference rows (taken across
/// the K dimensions).
pub fn preference_covariance<T: Scalar>(rho: &Array2<T>) -> Array2<T> {
    let (n, k) = rho.dim();
    let means: Vec<T> = rho
        .rows()
        .into_iter()
        .map(|r| r.sum() / T::of_usize(k))
        .collect();
    let centered = Array2::from_shape_fn((n, k), |(u, d)| rho[(u, d)] - means[u]);
    let denom = T::of_usize(k.saturating_sub(1).max(1));
    let mut cov = centered.dot(&centered.t());
    cov.mapv_inplace(|c| c / denom);
    // exact symmetry regardless of summation order
    for u in 0..n {
        for v in (u + 1)..n {
            cov[(v, u)] = cov[(u, v)];
        }
    }
    cov
}

/// Plain-text dump: `header` lines, then one whitespace-separated table per
/// quantity with one row per entity.
pub fn write_world_dump<T: Scalar, W: Write>(
    world: &GroundTruthWorld<T>,
    header: &[String],
    out: &mut W,
) -> io::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    write_table(out, "mu_rho", std::iter::once(world.mu_rho.clone()))?;
    write_table(out, "mu_alpha", std::iter::once(world.mu_alpha.clone()))?;
    write_table(out, "rho", world.rho.rows().into_iter().map(|r| r.to_vec()))?;
    write_table(
        out,
        "alpha",
        world.alpha.rows().into_iter().map(|r| r.to_vec()),
    )?;
    // V with one row per user
    write_table(
        out,
        "V",
        world.utility.columns().into_iter().map(|c| c.to_vec()),
    )?;
    Ok(())
}

fn write_table<T: Scalar, W: Write>(
    out: &mut W,
    name: &str,
    rows: impl Iterator<Item = Vec<T>>,
) -> io::Result<()> {
    writeln!(out, "[{name}]")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    Ok(())
}
