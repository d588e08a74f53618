//! How users pick one item per iteration from a ranked list, and the records
//! of what they picked.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, ItemId, Result, Scalar, UserId};

/// Exponent of the default rank discount `f(n) = n^(−0.8)`.
pub const DEFAULT_RANK_EXPONENT: f64 = 0.8;

/// Items in presentation order: `items[n − 1]` is shown at rank `n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankedList {
    items: Vec<ItemId>,
}

impl RankedList {
    pub fn new(items: Vec<ItemId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(items.len());
        if let Some(dup) = items.iter().find(|i| !seen.insert(**i)) {
            return Err(Error::param("items", format!("item {dup} listed twice")));
        }
        Ok(RankedList { items })
    }

    pub(crate) fn from_unique(items: Vec<ItemId>) -> Self {
        debug_assert!(RankedList::new(items.clone()).is_ok());
        RankedList { items }
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// 1-based rank of `item`, if listed.
    pub fn rank_of(&self, item: ItemId) -> Option<usize> {
        self.items.iter().position(|&i| i == item).map(|p| p + 1)
    }
}

/// One observed interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interaction {
    pub user: UserId,
    pub item: ItemId,
    pub time: usize,
}

/// Append-only record of `(user, item, time)` triplets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionLog {
    entries: Vec<Interaction>,
}

impl InteractionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: Interaction) {
        debug_assert!(self.entries.last().is_none_or(|l| l.time <= entry.time));
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[Interaction] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Triplets strictly before `time`.
    pub fn before(&self, time: usize) -> impl Iterator<Item = &Interaction> + '_ {
        self.entries.iter().take_while(move |e| e.time < time)
    }
}

/// Per-user consumption histories `D_u(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionSet {
    /// `(item, time)` in consumption order.
    history: Vec<Vec<(ItemId, usize)>>,
    consumed: Vec<HashSet<ItemId>>,
}

impl ConsumptionSet {
    pub fn new(num_users: usize) -> Self {
        ConsumptionSet {
            history: vec![Vec::new(); num_users],
            consumed: vec![HashSet::new(); num_users],
        }
    }

    pub fn num_users(&self) -> usize {
        self.history.len()
    }

    pub fn record(&mut self, user: UserId, item: ItemId, time: usize) -> Result<()> {
        if let Some(&(_, last)) = self.history[user].last() {
            if last >= time {
                return Err(Error::Consistency(format!(
                    "user {user} already consumed an item at time {last}"
                )));
            }
        }
        if !self.consumed[user].insert(item) {
            return Err(Error::Consistency(format!(
                "user {user} consumed item {item} twice"
            )));
        }
        self.history[user].push((item, time));
        Ok(())
    }

    pub fn has_consumed(&self, user: UserId, item: ItemId) -> bool {
        self.consumed[user].contains(&item)
    }

    pub fn history(&self, user: UserId) -> &[(ItemId, usize)] {
        &self.history[user]
    }

    /// `D_u(t)`: items consumed at or before `time`, sorted by id.
    pub fn items_through(&self, user: UserId, time: usize) -> Vec<ItemId> {
        let mut items: Vec<ItemId> = self.history[user]
            .iter()
            .take_while(|(_, t)| *t <= time)
            .map(|(i, _)| *i)
            .collect();
        items.sort_unstable();
        items
    }
}

/// Rank discount `f(n) = n^(−0.8)`.
pub fn rank_weight(n: usize) -> Result<f64> {
    rank_weight_with(n, DEFAULT_RANK_EXPONENT)
}

/// Rank discount `f(n) = n^(−exponent)`.
pub fn rank_weight_with<T: Scalar>(n: usize, exponent: T) -> Result<T> {
    if n < 1 {
        return Err(Error::param("n", "ranks start at 1"));
    }
    Ok(T::of_usize(n).powf(-exponent))
}

/// The listed item maximizing `f(rank)·P_ui`, ties broken uniformly at
/// random. With a threshold set, returns `None` when even the best score
/// falls below it.
pub fn choose_item<T: Scalar, R: Rng + ?Sized>(
    ranked: &RankedList,
    known_utility: impl Fn(ItemId) -> T,
    exponent: T,
    threshold: Option<T>,
    rng: &mut R,
) -> Result<Option<ItemId>> {
    if ranked.is_empty() {
        return match threshold {
            Some(_) => Ok(None),
            None => Err(Error::Consistency(
                "cannot choose from an empty list".into(),
            )),
        };
    }
    let mut best = T::neg_infinity();
    let mut chosen = ranked.items[0];
    let mut ties = 0u32;
    for (pos, &item) in ranked.items.iter().enumerate() {
        let score = rank_weight_with(pos + 1, exponent)? * known_utility(item);
        if score > best {
            best = score;
            chosen = item;
            ties = 1;
        } else if score == best {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                chosen = item;
            }
        }
    }
    match threshold {
        Some(tau) if best < tau => Ok(None),
        _ => Ok(Some(chosen)),
    }
}

/// Inserts each new item at a uniformly random position of the growing list.
/// The relative order of `ranked` is preserved and the new items end up in
/// uniformly random order and positions.
pub fn interleave_new_items<R: Rng + ?Sized>(
    ranked: RankedList,
    new_items: &[ItemId],
    rng: &mut R,
) -> Result<RankedList> {
    let existing: HashSet<ItemId> = ranked.items.iter().copied().collect();
    let mut fresh = HashSet::with_capacity(new_items.len());
    for &item in new_items {
        if existing.contains(&item) || !fresh.insert(item) {
            return Err(Error::param(
                "new_items",
                format!("item {item} already present in the list"),
            ));
        }
    }
    let mut items = ranked.items;
    items.reserve(new_items.len());
    for &item in new_items {
        let pos = rng.random_range(0..=items.len());
        items.insert(pos, item);
    }
    Ok(RankedList { items })
}

/// Start-up presentation: the newest items in random order, then every other
/// unconsumed item in random order.
pub fn startup_list<R: Rng + ?Sized>(
    newest: &[ItemId],
    older: &[ItemId],
    rng: &mut R,
) -> RankedList {
    let mut head = newest.to_vec();
    head.shuffle(rng);
    let mut tail = older.to_vec();
    tail.shuffle(rng);
    head.extend(tail);
    RankedList::from_unique(head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn list(items: &[ItemId]) -> RankedList {
        RankedList::new(items.to_vec()).unwrap()
    }

    #[test]
    fn rank_weight_values() {
        assert_eq!(rank_weight(1).unwrap(), 1.0);
        assert_abs_diff_eq!(rank_weight(2).unwrap(), 0.57435, epsilon = 1e-5);
        assert_abs_diff_eq!(rank_weight(10).unwrap(), 0.15849, epsilon = 1e-5);
        assert!(rank_weight(0).is_err());
        for n in 1..50 {
            assert!(rank_weight(n + 1).unwrap() < rank_weight(n).unwrap());
        }
    }

    #[test]
    fn choice_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = |i: ItemId| if i == 0 { 0.3 } else { 0.6 };
        assert_eq!(
            choose_item(&list(&[0, 1]), p, 0.8, None, &mut rng).unwrap(),
            Some(1)
        );
        assert_eq!(
            choose_item(&list(&[4, 2, 9]), |_| 0.5, 0.8, None, &mut rng).unwrap(),
            Some(4)
        );
        assert_eq!(
            choose_item(&list(&[7]), |_| 0.1, 0.8, None, &mut rng).unwrap(),
            Some(7)
        );
    }

    #[test]
    fn empty_list_handling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(choose_item(&list(&[]), |_| 1.0, 0.8, None, &mut rng).is_err());
        assert_eq!(
            choose_item(&list(&[]), |_| 1.0, 0.8, Some(0.1), &mut rng).unwrap(),
            None
        );
    }

    #[test]
    fn threshold_suppresses_weak_choices() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            choose_item(&list(&[0, 1]), |_| 0.05, 0.8, Some(0.1), &mut rng).unwrap(),
            None
        );
        assert_eq!(
            choose_item(&list(&[0, 1]), |_| 0.5, 0.8, Some(0.1), &mut rng).unwrap(),
            Some(0)
        );
    }

    #[test]
    fn exact_ties_split_evenly() {
        // exponent 0 gives every rank weight 1, so equal utilities tie exactly
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            let c = choose_item(&list(&[0, 1, 2]), |_| 0.5, 0.0, None, &mut rng)
                .unwrap()
                .unwrap();
            counts[c] += 1;
        }
        assert!(
            counts.iter().all(|&c| (850..1150).contains(&c)),
            "{counts:?}"
        );
    }

    #[test]
    fn duplicate_items_rejected() {
        assert!(RankedList::new(vec![1, 2, 1]).is_err());
        assert_eq!(list(&[5, 3]).rank_of(3), Some(2));
    }

    #[test]
    fn interleave_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = interleave_new_items(list(&[1, 2, 3]), &[], &mut rng).unwrap();
        assert_eq!(out.items(), &[1, 2, 3]);
        let out = interleave_new_items(list(&[1, 2, 3, 4]), &[10, 11], &mut rng).unwrap();
        assert_eq!(out.len(), 6);
        let kept: Vec<_> = out.items().iter().copied().filter(|i| *i < 10).collect();
        assert_eq!(kept, vec![1, 2, 3, 4]);
        assert!(interleave_new_items(list(&[1, 2]), &[2], &mut rng).is_err());
        assert!(interleave_new_items(list(&[1, 2]), &[5, 5], &mut rng).is_err());
    }

    #[test]
    fn consumption_rules() {
        let mut c = ConsumptionSet::new(2);
        c.record(0, 5, 0).unwrap();
        assert!(c.record(0, 6, 0).is_err(), "two items in one step");
        assert!(c.record(0, 5, 1).is_err(), "repeat consumption");
        c.record(0, 2, 1).unwrap();
        assert_eq!(c.items_through(0, 0), vec![5]);
        assert_eq!(c.items_through(0, 1), vec![2, 5]);
        assert!(c.has_consumed(0, 2) && !c.has_consumed(1, 2));
    }

    #[test]
    fn startup_list_puts_newest_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = startup_list(&[20, 21, 22], &[1, 2, 3, 4], &mut rng);
        let mut head = l.items()[..3].to_vec();
        head.sort_unstable();
        assert_eq!(head, vec![20, 21, 22]);
        assert_eq!(l.len(), 7);
    }
}
