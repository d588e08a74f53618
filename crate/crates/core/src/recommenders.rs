//! Score-then-rank recommenders. Every algorithm reduces to a user
//! representation `θ_u` and an item representation `β_i` whose dot product
//! is the score; lists are the eligible items sorted by descending score
//! with ties in uniformly random order.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::interaction::{InteractionLog, RankedList};
use crate::numerics::{nnls, weighted_mf_train, WmfParams};
use crate::world::GroundTruthWorld;
use crate::{Error, ItemId, Result, Scalar, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Popularity,
    Content,
    Social,
    Mf,
    Random,
    Ideal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Popularity,
        Algorithm::Content,
        Algorithm::Social,
        Algorithm::Mf,
        Algorithm::Random,
        Algorithm::Ideal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Popularity => "popularity",
            Algorithm::Content => "content",
            Algorithm::Social => "social",
            Algorithm::Mf => "mf",
            Algorithm::Random => "random",
            Algorithm::Ideal => "ideal",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::param("algorithm", format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ItemRepresentation<T> {
    /// One row per trained item.
    Dense(Array2<T>),
    /// `β_i = e_i`, so the score is `θ_u[i]`.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommenderModel<T> {
    pub kind: Algorithm,
    /// One row per user.
    pub theta: Array2<T>,
    pub beta: ItemRepresentation<T>,
    /// Items `0..trained_item_horizon` existed at training time.
    pub trained_item_horizon: usize,
}

impl<T: Scalar> RecommenderModel<T> {
    /// `s_ui = θ_u·β_i`.
    pub fn score(&self, user: UserId, item: ItemId) -> Result<T> {
        if item >= self.trained_item_horizon {
            return Err(Error::Unscorable {
                item,
                horizon: self.trained_item_horizon,
            });
        }
        let theta = self.theta.row(user);
        Ok(match &self.beta {
            ItemRepresentation::Dense(beta) => theta.dot(&beta.row(item)),
            ItemRepresentation::Identity => theta[item],
        })
    }

    pub fn user_representation(&self, user: UserId) -> Vec<T> {
        self.theta.row(user).to_vec()
    }

    pub fn num_users(&self) -> usize {
        self.theta.nrows()
    }
}

/// Eligible items by descending score; equal scores in uniformly random
/// order.
pub fn rank_for_user<T: Scalar, R: Rng + ?Sized>(
    model: &RecommenderModel<T>,
    user: UserId,
    eligible: &[ItemId],
    rng: &mut R,
) -> Result<RankedList> {
    let mut scored = eligible
        .iter()
        .map(|&i| model.score(user, i).map(|s| (i, s)))
        .collect::<Result<Vec<_>>>()?;
    scored.shuffle(rng);
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    RankedList::new(scored.into_iter().map(|(i, _)| i).collect())
}

/// Everything a recommender may learn from at one retraining.
///
/// Behavioral data is always present; side information is attached only for
/// the algorithm that uses it.
#[derive(Debug, Clone, Copy)]
pub struct TrainingView<'a, T> {
    log: &'a InteractionLog,
    time: usize,
    num_users: usize,
    horizon: usize,
    social: Option<&'a Array2<bool>>,
    item_tags: Option<&'a Array2<T>>,
    truth: Option<&'a GroundTruthWorld<T>>,
}

impl<'a, T: Scalar> TrainingView<'a, T> {
    /// Interactions strictly before `time` over the first `horizon` items.
    pub fn new(log: &'a InteractionLog, time: usize, num_users: usize, horizon: usize) -> Self {
        TrainingView {
            log,
            time,
            num_users,
            horizon,
            social: None,
            item_tags: None,
            truth: None,
        }
    }

    pub fn with_social(mut self, adjacency: &'a Array2<bool>) -> Self {
        self.social = Some(adjacency);
        self
    }

    /// Binary `|I| × K` attribute tags for at least `horizon` items.
    pub fn with_item_tags(mut self, tags: &'a Array2<T>) -> Self {
        self.item_tags = Some(tags);
        self
    }

    pub fn with_truth(mut self, world: &'a GroundTruthWorld<T>) -> Self {
        self.truth = Some(world);
        self
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Items each user consumed before the training time, in log order.
    pub fn histories(&self) -> Vec<Vec<ItemId>> {
        let mut out = vec![Vec::new(); self.num_users];
        for e in self.log.before(self.time) {
            if e.item < self.horizon {
                out[e.user].push(e.item);
            }
        }
        out
    }
}

/// Trains the `kind` model on `view`.
pub fn train<T: Scalar, R: Rng + ?Sized>(
    kind: Algorithm,
    view: &TrainingView<'_, T>,
    mf: &WmfParams<T>,
    rng: &mut R,
) -> Result<RecommenderModel<T>> {
    if kind != Algorithm::Ideal && view.truth.is_some() {
        return Err(Error::param(
            "view",
            format!("{kind} must not be trained with access to true utilities"),
        ));
    }
    match kind {
        Algorithm::Popularity => Ok(train_popularity(view)),
        Algorithm::Content => train_content(view),
        Algorithm::Social => train_social(view),
        Algorithm::Mf => train_mf(view, mf, rng),
        Algorithm::Random => Ok(train_random(view)),
        Algorithm::Ideal => train_ideal(view),
    }
}

/// `θ_u = 1`; `β_i` counts interactions with `i` before the training time.
pub fn train_popularity<T: Scalar>(view: &TrainingView<'_, T>) -> RecommenderModel<T> {
    let mut counts = Array2::zeros((view.horizon, 1));
    for e in view.log.before(view.time) {
        if e.item < view.horizon {
            counts[(e.item, 0)] += T::one();
        }
    }
    RecommenderModel {
        kind: Algorithm::Popularity,
        theta: Array2::ones((view.num_users, 1)),
        beta: ItemRepresentation::Dense(counts),
        trained_item_horizon: view.horizon,
    }
}

/// Binarizes item attributes: tag `k` is set iff `α_ik ≥ 1/K`; an item with
/// no such entry gets its largest attribute.
pub fn content_tags<T: Scalar>(alpha: ArrayView2<T>) -> Array2<T> {
    let (n, k) = alpha.dim();
    let cut = T::one() / T::of_usize(k.max(1));
    let mut tags = Array2::zeros((n, k));
    for (i, row) in alpha.rows().into_iter().enumerate() {
        let mut any = false;
        for (d, &v) in row.iter().enumerate() {
            if v >= cut {
                tags[(i, d)] = T::one();
                any = true;
            }
        }
        if !any && k > 0 {
            let best = (0..k)
                .max_by(|&a, &b| {
                    row[a]
                        .partial_cmp(&row[b])
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            tags[(i, best)] = T::one();
        }
    }
    tags
}

/// `β` = item tags; `θ_u` is the non-negative least squares fit of the tag
/// rows of the user's history to an all-ones target.
pub fn train_content<T: Scalar>(view: &TrainingView<'_, T>) -> Result<RecommenderModel<T>> {
    let tags = view
        .item_tags
        .ok_or_else(|| Error::param("view", "content filtering needs item tags"))?;
    if tags.nrows() < view.horizon {
        return Err(Error::param(
            "item_tags",
            format!("{} tag rows for {} items", tags.nrows(), view.horizon),
        ));
    }
    let k = tags.ncols();
    let beta = tags.slice(ndarray::s![..view.horizon, ..]).to_owned();
    let mut theta = Array2::zeros((view.num_users, k));
    for (u, history) in view.histories().into_iter().enumerate() {
        if history.is_empty() {
            continue;
        }
        let design = Array2::from_shape_fn((history.len(), k), |(r, d)| beta[(history[r], d)]);
        let target = ndarray::Array1::ones(history.len());
        let fit = nnls(design.view(), target.view())?;
        theta
            .row_mut(u)
            .iter_mut()
            .zip(fit)
            .for_each(|(t, f)| *t = f);
    }
    Ok(RecommenderModel {
        kind: Algorithm::Content,
        theta,
        beta: ItemRepresentation::Dense(beta),
        trained_item_horizon: view.horizon,
    })
}

/// `θ_uv = adj(u, v)·(1 + |D_u ∩ D_v|)`; `β_iv = 1` iff `v` consumed `i`.
pub fn train_social<T: Scalar>(view: &TrainingView<'_, T>) -> Result<RecommenderModel<T>> {
    let adjacency = view
        .social
        .ok_or_else(|| Error::param("view", "social filtering needs the social network"))?;
    let n = view.num_users;
    if adjacency.dim() != (n, n) {
        return Err(Error::param(
            "social",
            format!("adjacency shape {:?} for {n} users", adjacency.dim()),
        ));
    }
    let mut beta = Array2::zeros((view.horizon, n));
    for e in view.log.before(view.time) {
        if e.item < view.horizon {
            beta[(e.item, e.user)] = T::one();
        }
    }
    // co-consumption counts
    let co = beta.t().dot(&beta);
    let theta = Array2::from_shape_fn((n, n), |(u, v)| {
        if adjacency[(u, v)] {
            T::one() + co[(u, v)]
        } else {
            T::zero()
        }
    });
    Ok(RecommenderModel {
        kind: Algorithm::Social,
        theta,
        beta: ItemRepresentation::Dense(beta),
        trained_item_horizon: view.horizon,
    })
}

/// Confidence-weighted matrix factorization refit from scratch on the binary
/// interaction matrix.
pub fn train_mf<T: Scalar, R: Rng + ?Sized>(
    view: &TrainingView<'_, T>,
    params: &WmfParams<T>,
    rng: &mut R,
) -> Result<RecommenderModel<T>> {
    let mut r = Array2::from_elem((view.num_users, view.horizon), false);
    let mut any = false;
    for e in view.log.before(view.time) {
        if e.item < view.horizon {
            r[(e.user, e.item)] = true;
            any = true;
        }
    }
    if !any {
        return Err(Error::param(
            "view",
            "matrix factorization needs a non-empty log",
        ));
    }
    let fit = weighted_mf_train(r.view(), params, rng)?;
    Ok(RecommenderModel {
        kind: Algorithm::Mf,
        theta: fit.user_factors,
        beta: ItemRepresentation::Dense(fit.item_factors),
        trained_item_horizon: view.horizon,
    })
}

/// Every score ties, so each ranking is a fresh uniform permutation.
pub fn train_random<T: Scalar>(view: &TrainingView<'_, T>) -> RecommenderModel<T> {
    RecommenderModel {
        kind: Algorithm::Random,
        theta: Array2::ones((view.num_users, 1)),
        beta: ItemRepresentation::Dense(Array2::zeros((view.horizon, 1))),
        trained_item_horizon: view.horizon,
    }
}

/// Scores are the true utilities: `θ_u = V_u·` over trained items, `β_i = e_i`.
pub fn train_ideal<T: Scalar>(view: &TrainingView<'_, T>) -> Result<RecommenderModel<T>> {
    let world = view
        .truth
        .ok_or_else(|| Error::param("view", "the ideal recommender needs true utilities"))?;
    if world.num_items() < view.horizon {
        return Err(Error::param("horizon", "beyond the items of the world"));
    }
    let theta = Array2::from_shape_fn((view.num_users, view.horizon), |(u, i)| {
        world.true_utility(u, i)
    });
    Ok(RecommenderModel {
        kind: Algorithm::Ideal,
        theta,
        beta: ItemRepresentation::Identity,
        trained_item_horizon: view.horizon,
    })
}
