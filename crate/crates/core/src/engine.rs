//! Orchestrates simulated worlds: start-up, training schedules, the
//! recommend/choose loop, and paired comparison against the ideal run.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rayon::prelude::*;

use crate::interaction::{
    choose_item, interleave_new_items, startup_list, ConsumptionSet, Interaction, InteractionLog,
};
use crate::metrics::{
    cumulative_utility, delta_homogeneity, gini, pair_users, per_user_delta_jaccard,
    per_user_utility_delta, random_partners, utility_homogeneity_slope, MetricsRecord, PairingMode,
    UserRecord,
};
use crate::numerics::WmfParams;
use crate::recommenders::{
    content_tags, rank_for_user, train, Algorithm, RecommenderModel, TrainingView,
};
use crate::rng::{Stream, Streams};
use crate::world::{generate_world, spawn_items, GroundTruthWorld, WorldParams};
use crate::{Error, ItemId, Result, Scalar, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Train once, right after start-up.
    Single,
    /// Retrain before every post start-up iteration on all data so far.
    Repeated,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Single => "single",
            Regime::Repeated => "repeated",
        }
    }

    /// `(startup, post)` iteration counts.
    pub fn default_schedule(self) -> (usize, usize) {
        match self {
            Regime::Single => (50, 50),
            Regime::Repeated => (10, 90),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "single" | "single_training" => Ok(Regime::Single),
            "repeated" | "repeated_training" => Ok(Regime::Repeated),
            other => Err(Error::param("regime", format!("unknown regime `{other}`"))),
        }
    }
}

/// Matrix factorization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfConfig {
    pub k_model: usize,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub max_sweeps: usize,
    pub tolerance: f64,
}

impl Default for MfConfig {
    fn default() -> Self {
        MfConfig {
            k_model: 20,
            a: 1.0,
            b: 0.001,
            lambda: 0.01,
            max_sweeps: 100,
            tolerance: 1e-6,
        }
    }
}

impl MfConfig {
    pub fn params<T: Scalar>(&self) -> WmfParams<T> {
        WmfParams {
            k_model: self.k_model,
            a: T::of(self.a),
            b: T::of(self.b),
            lambda: T::of(self.lambda),
            max_sweeps: self.max_sweeps,
            tolerance: T::of(self.tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub num_users: usize,
    pub items_per_iteration: usize,
    pub k: usize,
    pub sigma: f64,
    pub mu_eta: f64,
    pub rank_exponent: f64,
    pub regime: Regime,
    pub startup_iterations: usize,
    pub post_iterations: usize,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub mf: MfConfig,
    /// Minimum discounted known utility needed to interact at all.
    pub tau: Option<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig::for_regime(Regime::Repeated)
    }
}

impl SimulationConfig {
    pub fn for_regime(regime: Regime) -> Self {
        let (startup, post) = regime.default_schedule();
        SimulationConfig {
            num_users: 100,
            items_per_iteration: 10,
            k: 20,
            sigma: 1e-5,
            mu_eta: 0.98,
            rank_exponent: 0.8,
            regime,
            startup_iterations: startup,
            post_iterations: post,
            algorithms: Algorithm::ALL.to_vec(),
            seeds: (1..=10).collect(),
            mf: MfConfig::default(),
            tau: None,
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.startup_iterations + self.post_iterations
    }

    pub fn world_params(&self) -> WorldParams {
        WorldParams {
            num_users: self.num_users,
            k: self.k,
            sigma: self.sigma,
            mu_eta: self.mu_eta,
        }
    }

    /// Whether a (re)training happens at the start of iteration `t`.
    pub fn trains_at(&self, t: usize) -> bool {
        match self.regime {
            Regime::Single => t == self.startup_iterations,
            Regime::Repeated => t >= self.startup_iterations,
        }
    }

    /// Algorithms to run, with the ideal baseline appended when missing.
    pub fn algorithms_with_ideal(&self) -> Vec<Algorithm> {
        let mut algs: Vec<Algorithm> = Vec::new();
        for &a in &self.algorithms {
            if !algs.contains(&a) {
                algs.push(a);
            }
        }
        if !algs.contains(&Algorithm::Ideal) {
            algs.push(Algorithm::Ideal);
        }
        algs
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_users", self.num_users),
            ("items_per_iteration", self.items_per_iteration),
            ("k", self.k),
            ("startup_iterations", self.startup_iterations),
            ("post_iterations", self.post_iterations),
            ("mf_k", self.mf.k_model),
            ("mf_max_sweeps", self.mf.max_sweeps),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if self.num_users < 2 {
            return Err(Error::config("num_users", "pairing needs at least 2 users"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "need at least one seed"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "need at least one algorithm"));
        }
        if !(self.mu_eta > 0.0 && self.mu_eta < 1.0) {
            return Err(Error::config("mu_eta", "must lie in (0, 1)"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("sigma", "must be positive"));
        }
        if !(self.rank_exponent >= 0.0 && self.rank_exponent.is_finite()) {
            return Err(Error::config("rank_exponent", "must be non-negative"));
        }
        if !(self.mf.b > 0.0 && self.mf.a > self.mf.b) {
            return Err(Error::config("mf_a", "require mf_a > mf_b > 0"));
        }
        if !(self.mf.lambda >= 0.0) {
            return Err(Error::config("mf_lambda", "must be non-negative"));
        }
        if !(self.mf.tolerance >= 0.0) {
            return Err(Error::config("mf_tolerance", "must be non-negative"));
        }
        if let Some(tau) = self.tau {
            if !(tau >= 0.0) {
                return Err(Error::config("tau", "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// One algorithm simulated in one world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldRun<T> {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub log: InteractionLog,
    pub consumption: ConsumptionSet,
    /// Iterations at whose start the model was (re)trained.
    pub trainings: Vec<usize>,
    /// Items the model in effect could score, per iteration (`None` during
    /// start-up).
    pub horizons: Vec<Option<usize>>,
    /// Nearest-neighbor partners under the model in effect, per iteration.
    pub neighbor_partners: Vec<Option<Vec<UserId>>>,
    /// Filled by [`score_run`].
    pub records: Vec<MetricsRecord<T>>,
    /// Slope of per-user homogenization on per-user utility delta at the
    /// final iteration, when defined.
    pub slope: Option<T>,
}

impl<T: Scalar> WorldRun<T> {
    pub fn final_record(&self) -> Option<&MetricsRecord<T>> {
        self.records.last()
    }
}

/// The world of `seed` with every item it will ever contain already spawned.
/// Item ids `t·items_per_iteration ..` belong to iteration `t`.
pub fn build_world<T: Scalar>(config: &SimulationConfig, seed: u64) -> Result<GroundTruthWorld<T>> {
    config.validate()?;
    let mut rng = Streams::new(seed).rng(Stream::World, &[]);
    let mut world = generate_world(&config.world_params(), &mut rng)?;
    for _ in 0..config.total_iterations() {
        spawn_items(&mut world, config.items_per_iteration, &mut rng)?;
    }
    Ok(world)
}

/// Simulates `algorithm` in the world of `seed`. Metrics are not filled;
/// see [`run_experiment`].
pub fn run_world<T: Scalar>(
    config: &SimulationConfig,
    algorithm: Algorithm,
    seed: u64,
) -> Result<WorldRun<T>> {
    let world = build_world(config, seed)?;
    run_in_world(config, &world, algorithm, seed)
}

pub fn run_in_world<T: Scalar>(
    config: &SimulationConfig,
    world: &GroundTruthWorld<T>,
    algorithm: Algorithm,
    seed: u64,
) -> Result<WorldRun<T>> {
    let users = config.num_users;
    let per_iter = config.items_per_iteration;
    let total = config.total_iterations();
    if world.num_users() != users || world.num_items() < total * per_iter {
        return Err(Error::param(
            "world",
            "world does not match the configuration",
        ));
    }
    let streams = Streams::new(seed);
    let alg_key = algorithm as u64;
    let exponent = T::of(config.rank_exponent);
    let tau = config.tau.map(T::of);
    let mf = config.mf.params::<T>();
    let tags = (algorithm == Algorithm::Content).then(|| content_tags(world.alpha.view()));

    let mut log = InteractionLog::new();
    let mut consumption = ConsumptionSet::new(users);
    let mut model: Option<RecommenderModel<T>> = None;
    let mut partners: Option<Vec<UserId>> = None;
    let mut run = WorldRun {
        seed,
        algorithm,
        log: InteractionLog::new(),
        consumption: ConsumptionSet::new(users),
        trainings: Vec::new(),
        horizons: Vec::with_capacity(total),
        neighbor_partners: Vec::with_capacity(total),
        records: Vec::new(),
        slope: None,
    };

    for t in 0..total {
        if config.trains_at(t) {
            let horizon = t * per_iter;
            let mut view = TrainingView::new(&log, t, users, horizon);
            match algorithm {
                Algorithm::Social => view = view.with_social(&world.social),
                Algorithm::Content => view = view.with_item_tags(tags.as_ref().unwrap()),
                Algorithm::Ideal => view = view.with_truth(world),
                _ => {}
            }
            let mut rng = streams.rng(Stream::MfInit, &[t as u64]);
            let trained = train(algorithm, &view, &mf, &mut rng)?;
            let reps: Vec<Vec<T>> = (0..users).map(|u| trained.user_representation(u)).collect();
            let mut rng = streams.rng(Stream::NeighborPairing, &[alg_key, t as u64]);
            partners = Some(pair_users(&reps, PairingMode::Nearest, &mut rng)?);
            model = Some(trained);
            run.trainings.push(t);
        }

        let available = (t + 1) * per_iter;
        let newest_start = t * per_iter;
        for u in 0..users {
            let eligible: Vec<ItemId> = (0..available)
                .filter(|&i| !consumption.has_consumed(u, i))
                .collect();
            let list = match &model {
                None => {
                    let (older, newest): (Vec<ItemId>, Vec<ItemId>) =
                        eligible.iter().partition(|&&i| i < newest_start);
                    let mut rng = streams.rng(Stream::StartupOrder, &[t as u64, u as u64]);
                    startup_list(&newest, &older, &mut rng)
                }
                Some(m) => {
                    let horizon = m.trained_item_horizon;
                    let (known, fresh): (Vec<ItemId>, Vec<ItemId>) =
                        eligible.iter().partition(|&&i| i < horizon);
                    let mut rng = streams.rng(Stream::Ranking, &[alg_key, t as u64, u as u64]);
                    let ranked = rank_for_user(m, u, &known, &mut rng)?;
                    let mut rng = streams.rng(Stream::Interleave, &[t as u64, u as u64]);
                    interleave_new_items(ranked, &fresh, &mut rng)?
                }
            };
            let mut rng = streams.rng(Stream::Choice, &[t as u64, u as u64]);
            let choice = choose_item(
                &list,
                |i| world.known_utility(u, i),
                exponent,
                tau,
                &mut rng,
            )
            .map_err(|e| match e {
                Error::Consistency(_) => Error::Consistency(format!(
                    "user {u} has nothing left to consume at iteration {t}"
                )),
                other => other,
            })?;
            if let Some(item) = choice {
                consumption.record(u, item, t)?;
                log.push(Interaction {
                    user: u,
                    item,
                    time: t,
                });
            }
        }
        run.horizons
            .push(model.as_ref().map(|m| m.trained_item_horizon));
        run.neighbor_partners.push(partners.clone());
    }
    run.log = log;
    run.consumption = consumption;
    Ok(run)
}

/// Random partners per iteration, shared by every algorithm of a world.
pub fn global_partners(config: &SimulationConfig, seed: u64) -> Vec<Vec<UserId>> {
    let streams = Streams::new(seed);
    (0..config.total_iterations())
        .map(|t| {
            random_partners(
                config.num_users,
                &mut streams.rng(Stream::GlobalPairing, &[t as u64]),
            )
        })
        .collect()
}

/// Fills `run.records` and `run.slope` by comparison with the ideal run of
/// the same world. Before the first training, neighbor pairs fall back to
/// the global random pairs.
pub fn score_run<T: Scalar>(
    config: &SimulationConfig,
    world: &GroundTruthWorld<T>,
    run: &mut WorldRun<T>,
    ideal: &WorldRun<T>,
    global: &[Vec<UserId>],
) -> Result<()> {
    let users = config.num_users;
    let total = config.total_iterations();
    let mut counts = vec![T::zero(); total * config.items_per_iteration];
    let mut by_time: Vec<Vec<ItemId>> = vec![Vec::new(); total];
    for e in run.log.entries() {
        by_time[e.time].push(e.item);
    }
    let mut records = Vec::with_capacity(total);
    for t in 0..total {
        for &i in &by_time[t] {
            counts[i] += T::one();
        }
        let neighbors = run.neighbor_partners[t].as_deref().unwrap_or(&global[t]);
        let available = (t + 1) * config.items_per_iteration;
        let gini = if by_time[..=t].iter().any(|v| !v.is_empty()) {
            gini(&counts[..available])?
        } else {
            T::zero()
        };
        let mean_utility = (0..users)
            .map(|u| cumulative_utility(&run.consumption, world, u, t))
            .sum::<T>()
            / T::of_usize(users);
        records.push(MetricsRecord {
            iteration: t,
            algorithm: run.algorithm,
            delta_jaccard_neighbor: delta_homogeneity(run, ideal, neighbors, t)?,
            delta_jaccard_global: delta_homogeneity(run, ideal, &global[t], t)?,
            mean_cumulative_utility: mean_utility,
            gini,
            per_user: Vec::new(),
        });
    }
    let last = total - 1;
    let neighbors = run.neighbor_partners[last]
        .as_deref()
        .unwrap_or(&global[last]);
    let utility = per_user_utility_delta(run, ideal, world, last)?;
    let homog = per_user_delta_jaccard(&run.consumption, &ideal.consumption, neighbors, last);
    run.slope = utility_homogeneity_slope(&utility, &homog).ok();
    if let Some(rec) = records.last_mut() {
        rec.per_user = (0..users)
            .map(|u| UserRecord {
                user: u,
                utility_delta: utility[u],
                neighbor_delta_jaccard: homog[u],
            })
            .collect();
    }
    run.records = records;
    Ok(())
}

/// Mean over seeds of one algorithm's metrics at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRecord<T> {
    pub algorithm: Algorithm,
    pub iteration: usize,
    pub delta_jaccard_neighbor: T,
    pub delta_jaccard_global: T,
    pub mean_cumulative_utility: T,
    pub gini: T,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult<T> {
    pub config: SimulationConfig,
    /// Seed-major, algorithms in configuration order (ideal last if added).
    pub runs: Vec<WorldRun<T>>,
    pub aggregate: Vec<AggregateRecord<T>>,
}

impl<T: Scalar> ExperimentResult<T> {
    pub fn algorithms(&self) -> Vec<Algorithm> {
        self.config.algorithms_with_ideal()
    }

    pub fn runs_of(&self, algorithm: Algorithm) -> impl Iterator<Item = &WorldRun<T>> + '_ {
        self.runs.iter().filter(move |r| r.algorithm == algorithm)
    }

    pub fn run(&self, seed: u64, algorithm: Algorithm) -> Option<&WorldRun<T>> {
        self.runs
            .iter()
            .find(|r| r.seed == seed && r.algorithm == algorithm)
    }

    /// Seed-averaged series of one algorithm.
    pub fn series(&self, algorithm: Algorithm) -> Vec<&AggregateRecord<T>> {
        self.aggregate
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .collect()
    }
}

/// Runs every configured algorithm in every seed's world using the current
/// rayon pool, then scores each run against the ideal run of its world.
pub fn run_experiment<T: Scalar>(config: &SimulationConfig) -> Result<ExperimentResult<T>> {
    config.validate()?;
    let algorithms = config.algorithms_with_ideal();
    let worlds: Vec<GroundTruthWorld<T>> = config
        .seeds
        .par_iter()
        .map(|&seed| build_world(config, seed))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Algorithm)> = (0..config.seeds.len())
        .flat_map(|s| algorithms.iter().map(move |&a| (s, a)))
        .collect();
    let mut runs: Vec<WorldRun<T>> = jobs
        .par_iter()
        .map(|&(s, a)| run_in_world(config, &worlds[s], a, config.seeds[s]))
        .collect::<Result<_>>()?;

    let per_seed = algorithms.len();
    let ideal_pos = algorithms
        .iter()
        .position(|&a| a == Algorithm::Ideal)
        .unwrap();
    runs.par_chunks_mut(per_seed)
        .zip(worlds.par_iter())
        .try_for_each(|(chunk, world)| -> Result<()> {
            let seed = chunk[0].seed;
            let global = global_partners(config, seed);
            let ideal = chunk[ideal_pos].clone();
            for run in chunk.iter_mut() {
                score_run(config, world, run, &ideal, &global)?;
            }
            Ok(())
        })?;

    let aggregate = aggregate(config, &algorithms, &runs);
    Ok(ExperimentResult {
        config: config.clone(),
        runs,
        aggregate,
    })
}

/// Like [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads<T: Scalar>(
    config: &SimulationConfig,
    threads: usize,
) -> Result<ExperimentResult<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Consistency(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

fn aggregate<T: Scalar>(
    config: &SimulationConfig,
    algorithms: &[Algorithm],
    runs: &[WorldRun<T>],
) -> Vec<AggregateRecord<T>> {
    let n = T::of_usize(config.seeds.len());
    let mut out = Vec::new();
    for &alg in algorithms {
        let mine: Vec<&WorldRun<T>> = runs.iter().filter(|r| r.algorithm == alg).collect();
        for t in 0..config.total_iterations() {
            let mean = |f: fn(&MetricsRecord<T>) -> T| {
                mine.iter().map(|r| f(&r.records[t])).sum::<T>() / n
            };
            out.push(AggregateRecord {
                algorithm: alg,
                iteration: t,
                delta_jaccard_neighbor: mean(|r| r.delta_jaccard_neighbor),
                delta_jaccard_global: mean(|r| r.delta_jaccard_global),
                mean_cumulative_utility: mean(|r| r.mean_cumulative_utility),
                gini: mean(|r| r.gini),
            });
        }
    }
    out
}

/// Interaction matrix of a run at the start of iteration `t`, for
/// inspection.
pub fn interaction_matrix<T: Scalar>(
    run: &WorldRun<T>,
    users: usize,
    items: usize,
    t: usize,
) -> Array2<bool> {
    let mut m = Array2::from_elem((users, items), false);
    for e in run.log.before(t) {
        if e.item < items {
            m[(e.user, e.item)] = true;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(regime: Regime) -> SimulationConfig {
        SimulationConfig {
            num_users: 12,
            items_per_iteration: 4,
            startup_iterations: 3,
            post_iterations: 5,
            seeds: vec![7, 8],
            ..SimulationConfig::for_regime(regime)
        }
    }

    #[test]
    fn single_regime_trains_once_and_freezes_the_horizon() {
        let cfg = SimulationConfig {
            num_users: 10,
            items_per_iteration: 2,
            ..SimulationConfig::for_regime(Regime::Single)
        };
        let run: WorldRun<f64> = run_world(&cfg, Algorithm::Popularity, 3).unwrap();
        assert_eq!(run.trainings, vec![50]);
        assert!(run.horizons[..50].iter().all(Option::is_none));
        assert!(run.horizons[50..].iter().all(|h| *h == Some(100)));
    }

    #[test]
    fn repeated_regime_trains_every_post_iteration() {
        let cfg = SimulationConfig {
            num_users: 10,
            items_per_iteration: 2,
            ..SimulationConfig::for_regime(Regime::Repeated)
        };
        let run: WorldRun<f64> = run_world(&cfg, Algorithm::Popularity, 3).unwrap();
        assert_eq!(run.trainings.len(), 90);
        assert_eq!(run.trainings, (10..100).collect::<Vec<_>>());
        assert_eq!(run.horizons[99], Some(198));
    }

    #[test]
    fn default_world_holds_one_thousand_items() {
        let world: GroundTruthWorld<f64> = build_world(&SimulationConfig::default(), 1).unwrap();
        assert_eq!(world.num_items(), 1000);
    }

    #[test]
    fn every_user_consumes_once_per_iteration() {
        let cfg = small(Regime::Repeated);
        for alg in Algorithm::ALL {
            let run: WorldRun<f64> = run_world(&cfg, alg, 7).unwrap();
            assert_eq!(
                run.log.entries().len(),
                cfg.num_users * cfg.total_iterations()
            );
            for t in 0..cfg.total_iterations() {
                for u in 0..cfg.num_users {
                    assert_eq!(
                        run.log
                            .entries()
                            .iter()
                            .filter(|e| e.user == u && e.time == t)
                            .count(),
                        1
                    );
                }
            }
        }
    }

    #[test]
    fn start_up_is_shared_across_algorithms() {
        let cfg = small(Regime::Single);
        let runs: Vec<WorldRun<f64>> = Algorithm::ALL
            .iter()
            .map(|&a| run_world(&cfg, a, 8).unwrap())
            .collect();
        let startup = |r: &WorldRun<f64>| -> Vec<Interaction> {
            r.log
                .entries()
                .iter()
                .filter(|e| e.time < cfg.startup_iterations)
                .cloned()
                .collect()
        };
        for r in &runs[1..] {
            assert_eq!(startup(r), startup(&runs[0]));
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = small(Regime::Repeated);
        for alg in [Algorithm::Mf, Algorithm::Content, Algorithm::Random] {
            let a: WorldRun<f64> = run_world(&cfg, alg, 5).unwrap();
            let b: WorldRun<f64> = run_world(&cfg, alg, 5).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ideal_is_its_own_zero_baseline() {
        let cfg = small(Regime::Repeated);
        let result: ExperimentResult<f64> = run_experiment(&cfg).unwrap();
        for run in result.runs_of(Algorithm::Ideal) {
            for r in &run.records {
                assert_eq!(r.delta_jaccard_neighbor, 0.0);
                assert_eq!(r.delta_jaccard_global, 0.0);
            }
            assert!(run
                .final_record()
                .unwrap()
                .per_user
                .iter()
                .all(|u| u.utility_delta == 0.0));
        }
    }

    #[test]
    fn experiment_matches_independent_runs_and_thread_count() {
        let cfg = small(Regime::Repeated);
        let a: ExperimentResult<f64> = run_experiment_with_threads(&cfg, 1).unwrap();
        let b: ExperimentResult<f64> = run_experiment_with_threads(&cfg, 3).unwrap();
        assert_eq!(a.runs, b.runs);
        let alone: WorldRun<f64> = run_world(&cfg, Algorithm::Social, 8).unwrap();
        assert_eq!(a.run(8, Algorithm::Social).unwrap().log, alone.log);
    }

    #[test]
    fn adding_seeds_leaves_per_seed_records_unchanged() {
        let cfg = small(Regime::Repeated);
        let more = SimulationConfig {
            seeds: vec![7, 8, 9, 10],
            ..cfg.clone()
        };
        let a: ExperimentResult<f64> = run_experiment(&cfg).unwrap();
        let b: ExperimentResult<f64> = run_experiment(&more).unwrap();
        for run in &a.runs {
            assert_eq!(run, b.run(run.seed, run.algorithm).unwrap());
        }
    }

    #[test]
    fn aggregate_is_the_seed_mean() {
        let cfg = small(Regime::Repeated);
        let result: ExperimentResult<f64> = run_experiment(&cfg).unwrap();
        let series = result.series(Algorithm::Popularity);
        let t = cfg.total_iterations() - 1;
        let mean = result
            .runs_of(Algorithm::Popularity)
            .map(|r| r.records[t].gini)
            .sum::<f64>()
            / 2.0;
        assert!((series[t].gini - mean).abs() < 1e-15);
    }

    #[test]
    fn unreachable_threshold_blocks_all_consumption() {
        let cfg = SimulationConfig {
            tau: Some(2.0),
            ..small(Regime::Repeated)
        };
        let run: WorldRun<f64> = run_world(&cfg, Algorithm::Popularity, 1).unwrap();
        assert!(run.log.entries().is_empty());
    }

    #[test]
    fn invalid_config_names_the_key() {
        let cfg = SimulationConfig {
            items_per_iteration: 0,
            ..SimulationConfig::default()
        };
        match cfg.validate() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "items_per_iteration"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
