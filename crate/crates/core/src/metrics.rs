//! Homogenization, utility and consumption-inequality measurements of a run
//! against its paired ideal run.

use rand::Rng;

use crate::engine::WorldRun;
use crate::interaction::ConsumptionSet;
use crate::numerics::cosine_similarity;
use crate::recommenders::Algorithm;
use crate::world::GroundTruthWorld;
use crate::{Error, ItemId, Result, Scalar, UserId};

/// Measurements of one algorithm in one world at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord<T> {
    pub iteration: usize,
    pub algorithm: Algorithm,
    /// Mean over users of `J(alg) − J(ideal)` with recommender-similarity pairs.
    pub delta_jaccard_neighbor: T,
    /// Same with uniformly random pairs.
    pub delta_jaccard_global: T,
    /// Mean over users of the summed true utility of consumed items.
    pub mean_cumulative_utility: T,
    pub gini: T,
    /// Filled on the final iteration only.
    pub per_user: Vec<UserRecord<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRecord<T> {
    pub user: UserId,
    pub utility_delta: T,
    pub neighbor_delta_jaccard: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingMode {
    /// Partner maximizes the cosine similarity of user representations.
    Nearest,
    /// Partner drawn uniformly from the other users.
    Random,
}

/// `|a ∩ b| / |a ∪ b|` for sorted, duplicate-free slices. Two empty sets
/// give 0.
pub fn jaccard<T: Scalar>(a: &[ItemId], b: &[ItemId]) -> T {
    debug_assert!(a.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(b.windows(2).all(|w| w[0] < w[1]));
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - common;
    if union == 0 {
        return T::zero();
    }
    T::of_usize(common) / T::of_usize(union)
}

/// One partner per user (not necessarily mutual). `representations[u]` is
/// `θ_u`; random mode only uses its length.
pub fn pair_users<T: Scalar, R: Rng + ?Sized>(
    representations: &[Vec<T>],
    mode: PairingMode,
    rng: &mut R,
) -> Result<Vec<UserId>> {
    let n = representations.len();
    if n < 2 {
        return Err(Error::param(
            "representations",
            format!("need at least 2 users, got {n}"),
        ));
    }
    Ok(match mode {
        PairingMode::Random => random_partners(n, rng),
        PairingMode::Nearest => (0..n)
            .map(|u| {
                let mut best = T::neg_infinity();
                let mut partner = usize::MAX;
                let mut ties = 0u32;
                for v in (0..n).filter(|&v| v != u) {
                    let sim = cosine_similarity(&representations[u], &representations[v]);
                    if sim > best || partner == usize::MAX {
                        best = sim;
                        partner = v;
                        ties = 1;
                    } else if sim == best {
                        ties += 1;
                        if rng.random_range(0..ties) == 0 {
                            partner = v;
                        }
                    }
                }
                partner
            })
            .collect(),
    })
}

/// Uniform partner over the other `n − 1` users, for each user.
pub fn random_partners<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<UserId> {
    (0..n)
        .map(|u| {
            let v = rng.random_range(0..n - 1);
            if v >= u {
                v + 1
            } else {
                v
            }
        })
        .collect()
}

/// Mean over users of `J(D_u, D_partner)` under `run` minus the same under
/// `ideal`, histories taken through iteration `t`.
pub fn delta_homogeneity<T: Scalar>(
    run: &WorldRun<T>,
    ideal: &WorldRun<T>,
    partners: &[UserId],
    t: usize,
) -> Result<T> {
    if run.seed != ideal.seed {
        return Err(Error::param(
            "ideal",
            format!(
                "runs come from different worlds (seeds {} and {})",
                run.seed, ideal.seed
            ),
        ));
    }
    delta_homogeneity_of(&run.consumption, &ideal.consumption, partners, t)
}

pub fn delta_homogeneity_of<T: Scalar>(
    run: &ConsumptionSet,
    ideal: &ConsumptionSet,
    partners: &[UserId],
    t: usize,
) -> Result<T> {
    let n = run.num_users();
    if ideal.num_users() != n || partners.len() != n {
        return Err(Error::param("partners", "user counts differ"));
    }
    let a: Vec<Vec<ItemId>> = (0..n).map(|u| run.items_through(u, t)).collect();
    let b: Vec<Vec<ItemId>> = (0..n).map(|u| ideal.items_through(u, t)).collect();
    let total: T = partners
        .iter()
        .enumerate()
        .map(|(u, &v)| jaccard::<T>(&a[u], &a[v]) - jaccard::<T>(&b[u], &b[v]))
        .sum();
    Ok(total / T::of_usize(n))
}

/// Per-user difference of `J(alg) − J(ideal)` with the given partners.
pub fn per_user_delta_jaccard<T: Scalar>(
    run: &ConsumptionSet,
    ideal: &ConsumptionSet,
    partners: &[UserId],
    t: usize,
) -> Vec<T> {
    let n = run.num_users();
    let a: Vec<Vec<ItemId>> = (0..n).map(|u| run.items_through(u, t)).collect();
    let b: Vec<Vec<ItemId>> = (0..n).map(|u| ideal.items_through(u, t)).collect();
    partners
        .iter()
        .enumerate()
        .map(|(u, &v)| jaccard::<T>(&a[u], &a[v]) - jaccard::<T>(&b[u], &b[v]))
        .collect()
}

/// Gini coefficient of per-item consumption counts using relative
/// popularity ranks (1 = least consumed, ties by ascending item id):
/// `Σ_i (2·RP_i − n − 1)·c_i / (n·Σ_i c_i)`.
pub fn gini<T: Scalar>(counts: &[T]) -> Result<T> {
    let n = counts.len();
    let total: T = counts.iter().copied().sum();
    if n == 0 || !(total > T::zero()) {
        return Err(Error::Undefined("Gini of zero total consumption".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| counts[a].partial_cmp(&counts[b]).unwrap().then(a.cmp(&b)));
    let nf = T::of_usize(n);
    let numer: T = order
        .iter()
        .enumerate()
        .map(|(r, &i)| (T::of_usize(2 * (r + 1)) - nf - T::one()) * counts[i])
        .sum();
    Ok(numer / (nf * total))
}

/// Summed true utility of the items `user` consumed through iteration `t`.
pub fn cumulative_utility<T: Scalar>(
    consumption: &ConsumptionSet,
    world: &GroundTruthWorld<T>,
    user: UserId,
    t: usize,
) -> T {
    consumption
        .history(user)
        .iter()
        .take_while(|(_, time)| *time <= t)
        .map(|&(i, _)| world.true_utility(user, i))
        .sum()
}

/// For each user, cumulative utility under `run` minus under `ideal`.
pub fn per_user_utility_delta<T: Scalar>(
    run: &WorldRun<T>,
    ideal: &WorldRun<T>,
    world: &GroundTruthWorld<T>,
    t: usize,
) -> Result<Vec<T>> {
    if run.seed != ideal.seed {
        return Err(Error::param("ideal", "runs come from different worlds"));
    }
    Ok((0..world.num_users())
        .map(|u| {
            cumulative_utility(&run.consumption, world, u, t)
                - cumulative_utility(&ideal.consumption, world, u, t)
        })
        .collect())
}

/// Ordinary least squares slope of `homogenization` regressed on
/// `utility_delta`.
pub fn utility_homogeneity_slope<T: Scalar>(
    utility_delta: &[T],
    homogenization: &[T],
) -> Result<T> {
    let n = utility_delta.len();
    if n != homogenization.len() {
        return Err(Error::param(
            "homogenization",
            "length differs from utility_delta",
        ));
    }
    if n < 2 {
        return Err(Error::Undefined("slope needs at least two points".into()));
    }
    let nf = T::of_usize(n);
    let mx = utility_delta.iter().copied().sum::<T>() / nf;
    let my = homogenization.iter().copied().sum::<T>() / nf;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&x, &y) in utility_delta.iter().zip(homogenization) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if !(sxx > T::zero()) {
        return Err(Error::Undefined("slope of a constant predictor".into()));
    }
    Ok(sxy / sxx)
}
