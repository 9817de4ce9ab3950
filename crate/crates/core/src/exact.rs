//! Noise-free inference: every observer multiplies its belief about the actor
//! by the likelihood of the observed action under the uniform-over-argmax
//! typed policy. Beliefs stay unnormalized; [`conditional_likelihood`]
//! normalizes on demand.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::capability::{intervene, Belief, BeliefBank, BeliefMode, Capability, CapabilitySet};
use crate::{Error, Result};

/// Absolute band within which two Q-values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Likelihood entries below this are flushed to exactly zero after an update.
pub const UNDERFLOW_FLUSH: f64 = 1e-300;

/// A deterministic typed Q-function `Q^c(s, B, a)`.
pub trait TypedQProvider {
    type State;
    type Action: Clone + PartialEq;

    fn actions(&self, state: &Self::State) -> Vec<Self::Action>;

    fn q(&self, c: Capability, state: &Self::State, bank: &BeliefBank, action: &Self::Action) -> f64;
}

/// Outcome of a tie-broken greedy choice.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyDraw<A> {
    pub action: A,
    pub tie_set: Vec<A>,
    /// Seed of the RNG that broke the tie; replaying it reproduces `action`.
    pub seed: u64,
}

/// Indices of all entries within `tol` of the maximum.
pub fn argmax_set(values: &[f64], tol: f64) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| best - v <= tol)
        .map(|(i, _)| i)
        .collect()
}

fn q_values<Q: TypedQProvider>(
    q: &Q,
    c: Capability,
    state: &Q::State,
    bank: &BeliefBank,
) -> Result<(Vec<Q::Action>, Vec<f64>)> {
    let actions = q.actions(state);
    if actions.is_empty() {
        return Err(Error::NoActions);
    }
    let values = actions.iter().map(|a| q.q(c, state, bank, a)).collect();
    Ok((actions, values))
}

/// `v*(c)`: the best type-`c` Q-value for `actor`, evaluated on the bank
/// intervened at `actor = c` and reduced to `c`.
pub fn optimal_value<Q: TypedQProvider>(
    c: Capability,
    actor: usize,
    state: &Q::State,
    bank: &BeliefBank,
    q: &Q,
) -> Result<f64> {
    let view = intervene(bank, actor, c)?.reduced(c)?;
    let (_, values) = q_values(q, c, state, &view)?;
    Ok(values.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `A*(c)`: every action whose type-`c` Q-value ties `v*(c)`. Never empty.
pub fn optimal_action_set<Q: TypedQProvider>(
    c: Capability,
    actor: usize,
    state: &Q::State,
    bank: &BeliefBank,
    q: &Q,
) -> Result<Vec<Q::Action>> {
    let view = intervene(bank, actor, c)?.reduced(c)?;
    let (actions, values) = q_values(q, c, state, &view)?;
    Ok(argmax_set(&values, TIE_TOLERANCE)
        .into_iter()
        .map(|i| actions[i].clone())
        .collect())
}

/// Applies the multiplicative update for one observed action.
///
/// Every entry `c <= owner` of the belief about `actor` is multiplied by
/// `1/|A*(c)|` when `action ∈ A*(c)` and zeroed otherwise. All optimal sets
/// are computed from the pre-update bank.
pub fn exact_update<Q: TypedQProvider>(
    bank: &BeliefBank,
    actor: usize,
    action: &Q::Action,
    state: &Q::State,
    q: &Q,
) -> Result<BeliefBank> {
    if bank.mode() != BeliefMode::Exact {
        return Err(Error::WrongMode { expected: "exact" });
    }
    bank.belief(actor)?;
    let set = bank.set().clone();
    let preds = set.predecessors(bank.owner())?;
    let mut factors = Vec::with_capacity(preds.len());
    for &c in preds {
        let best = optimal_action_set(c, actor, state, bank, q)?;
        let factor = if best.contains(action) {
            1.0 / best.len() as f64
        } else {
            0.0
        };
        factors.push(factor);
    }
    let mut out = bank.clone();
    let belief = out.belief_mut(actor)?;
    for (v, f) in belief.values_mut().iter_mut().zip(factors) {
        *v *= f;
        if *v < UNDERFLOW_FLUSH {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// `P^c`: the belief restricted to `p(c)` and normalized, or `None` when it
/// has no mass there (the history rules out every type `<= c`).
pub fn conditional_likelihood(set: &CapabilitySet, belief: &Belief, c: Capability) -> Result<Option<Vec<f64>>> {
    let preds = set.predecessors(c)?.len();
    let head = &belief.values()[..preds];
    let total: f64 = head.iter().sum();
    if total <= 0.0 {
        return Ok(None);
    }
    Ok(Some(head.iter().map(|v| v / total).collect()))
}

/// Uniform draw from a tie set, recorded with the seed that made it.
pub(crate) fn draw_from_ties<A: Clone, R: RngCore>(tie_set: Vec<A>, rng: &mut R) -> PolicyDraw<A> {
    let seed = rng.next_u64();
    let mut tie_rng = crate::seeded_rng(seed);
    let pick = tie_rng.gen_range(0..tie_set.len());
    PolicyDraw {
        action: tie_set[pick].clone(),
        tie_set,
        seed,
    }
}

/// The greedy typed policy of a type-`c` player: argmax of `Q^c` on its bank
/// intervened at itself, ties broken uniformly.
pub fn greedy_policy<Q: TypedQProvider, R: RngCore>(
    c: Capability,
    player: usize,
    state: &Q::State,
    bank: &BeliefBank,
    q: &Q,
    rng: &mut R,
) -> Result<PolicyDraw<Q::Action>> {
    let view = intervene(bank, player, c)?;
    let (actions, values) = q_values(q, c, state, &view)?;
    let ties = argmax_set(&values, TIE_TOLERANCE)
        .into_iter()
        .map(|i| actions[i].clone())
        .collect();
    Ok(draw_from_ties(ties, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Fixed per-action values, independent of type and beliefs.
    struct Fixed(Vec<f64>);

    impl TypedQProvider for Fixed {
        type State = ();
        type Action = usize;
        fn actions(&self, _: &()) -> Vec<usize> {
            (0..self.0.len()).collect()
        }
        fn q(&self, _: Capability, _: &(), _: &BeliefBank, a: &usize) -> f64 {
            self.0[*a]
        }
    }

    fn bank(owner: Capability) -> BeliefBank {
        let set = CapabilitySet::new(vec![2, 4, 6, 8]).unwrap();
        BeliefBank::new(set, owner, 2, BeliefMode::Exact).unwrap()
    }

    #[test]
    fn optimal_value_and_set() {
        let b = bank(8);
        assert_eq!(optimal_value(4, 0, &(), &b, &Fixed(vec![0.3])).unwrap(), 0.3);
        assert_eq!(optimal_value(4, 0, &(), &b, &Fixed(vec![0.3, 0.7])).unwrap(), 0.7);
        assert_eq!(
            optimal_action_set(4, 0, &(), &b, &Fixed(vec![0.7, 0.7, 0.1])).unwrap(),
            vec![0, 1]
        );
        assert_eq!(
            optimal_action_set(4, 0, &(), &b, &Fixed(vec![0.1, 0.9])).unwrap(),
            vec![1]
        );
        assert_eq!(optimal_value(4, 0, &(), &b, &Fixed(vec![])), Err(Error::NoActions));
    }

    #[test]
    fn update_halves_on_two_way_tie_and_zeroes_misses() {
        let b = bank(4);
        let q = Fixed(vec![1.0, 1.0, 0.0]);
        let out = exact_update(&b, 1, &0, &(), &q).unwrap();
        assert_eq!(out.belief(1).unwrap().values(), &[0.5, 0.5, 0.0, 0.0]);
        // belief about the other player untouched
        assert_eq!(out.belief(0).unwrap().values(), &[1.0, 1.0, 0.0, 0.0]);

        let set = b.set().clone();
        let prior = Belief::new(vec![0.8, 0.8, 0.0, 0.0], BeliefMode::Exact).unwrap();
        let b = BeliefBank::from_parts(set, 4, vec![prior.clone(), prior]).unwrap();
        let out = exact_update(&b, 0, &2, &(), &q).unwrap();
        assert_eq!(out.belief(0).unwrap().values(), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn update_rejects_tempered_bank() {
        let set = CapabilitySet::new(vec![2, 4]).unwrap();
        let b = BeliefBank::new(set, 4, 2, BeliefMode::Tempered).unwrap();
        assert_eq!(
            exact_update(&b, 0, &0, &(), &Fixed(vec![1.0])),
            Err(Error::WrongMode { expected: "exact" })
        );
    }

    #[test]
    fn conditional_likelihood_cases() {
        let set = CapabilitySet::new(vec![2, 4, 6, 8]).unwrap();
        let b = Belief::new(vec![0.5, 0.25, 0.0, 0.0], BeliefMode::Exact).unwrap();
        let p = conditional_likelihood(&set, &b, 4).unwrap().unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);

        let z = Belief::new(vec![0.0, 0.0, 1.0, 0.0], BeliefMode::Exact).unwrap();
        assert_eq!(conditional_likelihood(&set, &z, 4).unwrap(), None);

        let d = Belief::delta(&set, 4, BeliefMode::Exact).unwrap();
        assert_eq!(
            conditional_likelihood(&set, &d, 6).unwrap().unwrap(),
            vec![0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn greedy_policy_singleton_and_ties() {
        let b = bank(8);
        let mut rng = crate::seeded_rng(7);
        let draw = greedy_policy(8, 0, &(), &b, &Fixed(vec![0.1, 0.9]), &mut rng).unwrap();
        assert_eq!((draw.action, draw.tie_set), (1, vec![1]));
        let draw = greedy_policy(8, 0, &(), &b, &Fixed(vec![0.5]), &mut rng).unwrap();
        assert_eq!(draw.action, 0);

        let q = Fixed(vec![0.4, 0.4]);
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|_| greedy_policy(8, 0, &(), &b, &q, &mut rng).unwrap().action == 0)
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn recorded_seed_replays_the_draw() {
        let b = bank(8);
        let q = Fixed(vec![1.0, 1.0, 1.0]);
        let mut rng = crate::seeded_rng(11);
        let draw = greedy_policy(8, 0, &(), &b, &q, &mut rng).unwrap();
        let mut replay = crate::seeded_rng(draw.seed);
        assert_eq!(draw.tie_set[replay.gen_range(0..3)], draw.action);
    }
}
