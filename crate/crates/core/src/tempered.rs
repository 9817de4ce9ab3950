//! Noise-robust inference with tempered beliefs.
//!
//! Beliefs accumulate per-capability losses (regret of the observed action
//! against the best action under the type-`c` φ-Q function). A temperature
//! turns them into per-player softmax likelihoods, and their product over the
//! feasible assignments `n(c) = p(c)^N` is the generalized likelihood φ.

use alloc::vec::Vec;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::capability::{feasible_assignments, intervene, Belief, BeliefBank, BeliefMode, Capability, CapabilitySet};
use crate::exact::{argmax_set, draw_from_ties, PolicyDraw, TIE_TOLERANCE};
use crate::{Error, Result};

/// Practical temperature used by search-backed play.
pub const PRACTICAL_TEMPERATURE: f64 = 0.1;

/// Practical loss clip used by search-backed play.
pub const PRACTICAL_LOSS_CLIP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseRegime {
    /// Worst-case bounded noise; `T(t) = 6tN`.
    Adversarial,
    /// IID bounded noise; `T(t) = sqrt(d) t^(2/3)`.
    Stochastic,
    /// Constant temperature.
    #[serde(rename = "fixed")]
    FixedPractical,
}

/// Bound on private value-function deviations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub regime: NoiseRegime,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::InvalidParameter("epsilon must be finite and >= 0".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidDelta(self.delta));
        }
        Ok(())
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            delta: 0.1,
            regime: NoiseRegime::FixedPractical,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperConfig {
    #[serde(rename = "fixed_T")]
    pub fixed_t: f64,
    pub loss_clip: Option<f64>,
}

impl Default for TemperConfig {
    fn default() -> Self {
        Self {
            fixed_t: PRACTICAL_TEMPERATURE,
            loss_clip: Some(PRACTICAL_LOSS_CLIP),
        }
    }
}

impl TemperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fixed_t > 0.0) {
            return Err(Error::InvalidParameter("fixed_T must be positive".into()));
        }
        if let Some(clip) = self.loss_clip {
            if !(clip > 0.0) {
                return Err(Error::InvalidParameter("loss_clip must be positive".into()));
            }
        }
        Ok(())
    }
}

/// The `d` constant of the stochastic schedule:
/// `72 N^2 ln(20 N^2 c_max / (9 delta))`.
pub fn stochastic_constant(n_players: usize, c_max: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let n2 = (n_players * n_players) as f64;
    Ok(72.0 * n2 * libm::log(20.0 * n2 * c_max as f64 / (9.0 * delta)))
}

/// Temperature at update count `t`. `c_max` is the largest predecessor-set
/// size among the players.
pub fn temperature(
    regime: NoiseRegime,
    t: usize,
    n_players: usize,
    c_max: usize,
    delta: f64,
    fixed_t: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    match regime {
        NoiseRegime::FixedPractical => Ok(fixed_t),
        NoiseRegime::Adversarial => {
            if t == 0 {
                return Err(Error::InvalidTimeStep);
            }
            Ok(6.0 * t as f64 * n_players as f64)
        }
        NoiseRegime::Stochastic => {
            if t == 0 {
                return Err(Error::InvalidTimeStep);
            }
            let d = stochastic_constant(n_players, c_max, delta)?;
            Ok(libm::sqrt(d) * libm::pow(t as f64, 2.0 / 3.0))
        }
    }
}

/// Regret of action `observed` against the best entry of `values`, clipped.
pub fn loss_from_values(values: &[f64], observed: usize, clip: Option<f64>) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::NoActions);
    }
    let chosen = *values.get(observed).ok_or(Error::IllegalAction)?;
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw = (best - chosen).max(0.0);
    Ok(match clip {
        Some(c) => raw.min(c),
        None => raw,
    })
}

/// Adds `losses[k]` to entry `k` of the belief about `actor` for every
/// `k` in `p(owner)`.
pub fn tempered_update(bank: &BeliefBank, actor: usize, losses: &[f64]) -> Result<BeliefBank> {
    if bank.mode() != BeliefMode::Tempered {
        return Err(Error::WrongMode { expected: "tempered" });
    }
    let width = bank.set().predecessors(bank.owner())?.len();
    if losses.len() != width {
        return Err(Error::LossLength {
            got: losses.len(),
            expected: width,
        });
    }
    if let Some(&bad) = losses.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::NegativeLoss(bad));
    }
    let mut out = bank.clone();
    let belief = out.belief_mut(actor)?;
    for (v, l) in belief.values_mut().iter_mut().zip(losses) {
        *v += l;
    }
    Ok(out)
}

/// Softmax of negated losses over `p(observer)`.
///
/// Entries at `+inf` get probability exactly zero. If every entry of the
/// predecessor set is `+inf` the result is uniform.
pub fn per_player_likelihood(
    set: &CapabilitySet,
    belief: &Belief,
    observer: Capability,
    temperature: f64,
) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter("temperature must be positive".into()));
    }
    let width = set.predecessors(observer)?.len();
    let head = &belief.values()[..width];
    let floor = head
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return Ok(alloc::vec![1.0 / width as f64; width]);
    }
    let weights: Vec<f64> = head
        .iter()
        .map(|&v| {
            if v.is_finite() {
                libm::exp(-(v - floor) / temperature)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Distribution over the feasible assignments `n(c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentDistribution {
    pub level: Capability,
    pub support: Vec<Vec<Capability>>,
    pub probs: Vec<f64>,
}

impl AssignmentDistribution {
    /// Marginal over player `j`'s type, indexed like `p(level)`.
    pub fn marginal(&self, set: &CapabilitySet, j: usize) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; set.predecessors(self.level)?.len()];
        for (assignment, &p) in self.support.iter().zip(&self.probs) {
            let cj = *assignment.get(j).ok_or(Error::PlayerOutOfRange {
                index: j,
                players: assignment.len(),
            })?;
            out[set.index_of(cj)?] += p;
        }
        Ok(out)
    }
}

/// φ^c: product of per-player likelihoods over every feasible assignment,
/// normalized over `n(c)`.
pub fn generalized_likelihood(bank: &BeliefBank, c: Capability, temperature: f64) -> Result<AssignmentDistribution> {
    let set = bank.set();
    let per_player = bank
        .beliefs()
        .iter()
        .map(|b| per_player_likelihood(set, b, c, temperature))
        .collect::<Result<Vec<_>>>()?;
    let support = feasible_assignments(set, c, bank.n_players())?;
    let mut probs: Vec<f64> = support
        .iter()
        .map(|assignment| {
            assignment
                .iter()
                .enumerate()
                .map(|(m, &cm)| per_player[m][set.index_of(cm).unwrap_or(0)])
                .product()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(AssignmentDistribution {
        level: c,
        support,
        probs,
    })
}

/// One possible outcome of taking an action.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<S> {
    pub prob: f64,
    pub reward: f64,
    pub next: S,
}

/// Known-type value functions `V^C(s)` for every joint assignment, plus an
/// explicit one-step model for the Bellman backup.
pub trait AssignmentValueProvider {
    type State;
    type Action: Clone + PartialEq;

    fn actions(&self, state: &Self::State) -> Vec<Self::Action>;

    fn outcomes(&self, state: &Self::State, action: &Self::Action) -> Vec<Outcome<Self::State>>;

    /// `None` when the provider has no value for this assignment.
    fn value(&self, assignment: &[Capability], state: &Self::State) -> Option<f64>;

    fn gamma(&self) -> f64;
}

/// `V^c_φ(s, B) = E_{C ~ φ^c_B}[V^C(s)]`, with each assignment capped at `c`
/// (best-effort substitution of the evaluator's own type).
pub fn phi_value<P: AssignmentValueProvider>(
    c: Capability,
    state: &P::State,
    bank: &BeliefBank,
    provider: &P,
    temperature: f64,
) -> Result<f64> {
    let phi = generalized_likelihood(bank, c, temperature)?;
    let mut total = 0.0;
    let mut capped = Vec::new();
    for (assignment, &p) in phi.support.iter().zip(&phi.probs) {
        if p == 0.0 {
            continue;
        }
        capped.clear();
        capped.extend(assignment.iter().map(|&x| x.min(c)));
        let v = provider.value(&capped, state).ok_or(Error::MissingAssignmentValue)?;
        total += p * v;
    }
    Ok(total)
}

/// `Q^c_φ(s, B, a) = E[r + γ V^c_φ(s', B) | a]`.
pub fn phi_q<P: AssignmentValueProvider>(
    c: Capability,
    state: &P::State,
    bank: &BeliefBank,
    action: &P::Action,
    provider: &P,
    temperature: f64,
) -> Result<f64> {
    let gamma = provider.gamma();
    let mut total = 0.0;
    for o in provider.outcomes(state, action) {
        total += o.prob * (o.reward + gamma * phi_value(c, &o.next, bank, provider, temperature)?);
    }
    Ok(total)
}

fn phi_q_all<P: AssignmentValueProvider>(
    c: Capability,
    state: &P::State,
    bank: &BeliefBank,
    provider: &P,
    temperature: f64,
) -> Result<(Vec<P::Action>, Vec<f64>)> {
    let actions = provider.actions(state);
    if actions.is_empty() {
        return Err(Error::NoActions);
    }
    let values = actions
        .iter()
        .map(|a| phi_q(c, state, bank, a, provider, temperature))
        .collect::<Result<Vec<_>>>()?;
    Ok((actions, values))
}

/// `ℓ_a(c)`: regret of the observed action under the type-`c` φ-Q function
/// evaluated on the bank intervened at `actor = c`.
#[allow(clippy::too_many_arguments)]
pub fn loss<P: AssignmentValueProvider>(
    c: Capability,
    actor: usize,
    state: &P::State,
    bank: &BeliefBank,
    observed: &P::Action,
    provider: &P,
    temperature: f64,
    clip: Option<f64>,
) -> Result<f64> {
    let view = intervene(bank, actor, c)?;
    let (actions, values) = phi_q_all(c, state, &view, provider, temperature)?;
    let idx = actions.iter().position(|a| a == observed).ok_or(Error::IllegalAction)?;
    loss_from_values(&values, idx, clip)
}

/// Loss vector over `p(owner)` for one observed action, ready for
/// [`tempered_update`].
#[allow(clippy::too_many_arguments)]
pub fn losses_for_observation<P: AssignmentValueProvider>(
    actor: usize,
    state: &P::State,
    bank: &BeliefBank,
    observed: &P::Action,
    provider: &P,
    temperature: f64,
    clip: Option<f64>,
) -> Result<Vec<f64>> {
    let preds: Vec<Capability> = bank.set().predecessors(bank.owner())?.to_vec();
    preds
        .into_iter()
        .map(|c| loss(c, actor, state, bank, observed, provider, temperature, clip))
        .collect()
}

/// The φ-greedy policy of a type-`c` player, ties broken uniformly.
pub fn phi_greedy_policy<P: AssignmentValueProvider, R: RngCore>(
    c: Capability,
    player: usize,
    state: &P::State,
    bank: &BeliefBank,
    provider: &P,
    temperature: f64,
    rng: &mut R,
) -> Result<PolicyDraw<P::Action>> {
    let view = intervene(bank, player, c)?;
    let (actions, values) = phi_q_all(c, state, &view, provider, temperature)?;
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

    fn set() -> CapabilitySet {
        CapabilitySet::new(vec![2, 4, 6, 8]).unwrap()
    }

    #[test]
    fn schedules() {
        let t = temperature(NoiseRegime::Adversarial, 5, 2, 4, 0.05, 0.1).unwrap();
        assert_eq!(t, 60.0);
        let d = 288.0 * (320.0f64 / 0.45).ln();
        assert!((stochastic_constant(2, 4, 0.05).unwrap() - d).abs() < 1e-9);
        assert!((d - 1891.3).abs() < 0.1);
        let t1 = temperature(NoiseRegime::Stochastic, 1, 2, 4, 0.05, 0.1).unwrap();
        assert!((t1 - d.sqrt()).abs() < 1e-9);
        for t in [1, 10, 1000] {
            assert_eq!(
                temperature(NoiseRegime::FixedPractical, t, 2, 4, 0.05, 0.1).unwrap(),
                0.1
            );
        }
        assert_eq!(
            temperature(NoiseRegime::Stochastic, 1, 2, 4, 1.0, 0.1),
            Err(Error::InvalidDelta(1.0))
        );
        assert_eq!(
            temperature(NoiseRegime::Adversarial, 0, 2, 4, 0.5, 0.1),
            Err(Error::InvalidTimeStep)
        );
    }

    #[test]
    fn loss_clipping() {
        assert_eq!(loss_from_values(&[1.0, 0.2], 0, Some(0.5)).unwrap(), 0.0);
        assert_eq!(loss_from_values(&[1.0, 0.2], 1, Some(0.5)).unwrap(), 0.5);
        assert!((loss_from_values(&[1.0, 0.2], 1, None).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(loss_from_values(&[], 0, None), Err(Error::NoActions));
    }

    #[test]
    fn update_accumulates() {
        let bank = BeliefBank::new(set(), 4, 2, BeliefMode::Tempered).unwrap();
        assert_eq!(tempered_update(&bank, 0, &[0.0, 0.0]).unwrap(), bank);
        let once = tempered_update(&bank, 0, &[0.1, 0.3]).unwrap();
        assert_eq!(once.belief(0).unwrap().values(), &[0.1, 0.3, 0.0, 0.0]);
        let twice = tempered_update(&once, 0, &[0.2, 0.05]).unwrap();
        let v = twice.belief(0).unwrap().values();
        assert!((v[0] - 0.3).abs() < 1e-15 && (v[1] - 0.35).abs() < 1e-15);
        assert_eq!(tempered_update(&bank, 0, &[-0.1, 0.0]), Err(Error::NegativeLoss(-0.1)));
        assert!(matches!(
            tempered_update(&bank, 0, &[0.0]),
            Err(Error::LossLength { .. })
        ));
    }

    #[test]
    fn softmax_cases() {
        let s = set();
        let zero = Belief::new(vec![0.0; 4], BeliefMode::Tempered).unwrap();
        assert_eq!(per_player_likelihood(&s, &zero, 6, 0.1).unwrap(), vec![1.0 / 3.0; 3]);

        let b = Belief::new(vec![0.0, 10.0, 0.0, 0.0], BeliefMode::Tempered).unwrap();
        let p = per_player_likelihood(&s, &b, 4, 0.1).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!((p[1] - 3.720075976020836e-44).abs() < 1e-56);

        let d = Belief::delta(&s, 4, BeliefMode::Tempered).unwrap();
        assert_eq!(per_player_likelihood(&s, &d, 8, 0.1).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn generalized_likelihood_uniform_and_product() {
        let s = CapabilitySet::new(vec![2, 4]).unwrap();
        let bank = BeliefBank::new(s.clone(), 4, 2, BeliefMode::Tempered).unwrap();
        let phi = generalized_likelihood(&bank, 4, 0.1).unwrap();
        assert_eq!(phi.probs, vec![0.25; 4]);

        let bank = intervene(&bank, 0, 2).unwrap();
        let phi = generalized_likelihood(&bank, 4, 0.1).unwrap();
        assert_eq!(phi.probs, vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(phi.marginal(&s, 0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(phi.marginal(&s, 1).unwrap(), vec![0.5, 0.5]);
    }

    /// One state with actions leading to absorbing states whose values are
    /// given per assignment.
    struct Star {
        values: Vec<(Vec<Capability>, [f64; 3])>,
        rewards: [f64; 2],
    }

    impl AssignmentValueProvider for Star {
        type State = usize;
        type Action = usize;
        fn actions(&self, s: &usize) -> Vec<usize> {
            if *s == 0 {
                vec![0, 1]
            } else {
                vec![0]
            }
        }
        fn outcomes(&self, s: &usize, a: &usize) -> Vec<Outcome<usize>> {
            if *s == 0 {
                vec![Outcome {
                    prob: 1.0,
                    reward: self.rewards[*a],
                    next: a + 1,
                }]
            } else {
                vec![Outcome {
                    prob: 1.0,
                    reward: 0.0,
                    next: *s,
                }]
            }
        }
        fn value(&self, c: &[Capability], s: &usize) -> Option<f64> {
            self.values.iter().find(|(k, _)| k.as_slice() == c).map(|(_, v)| v[*s])
        }
        fn gamma(&self) -> f64 {
            0.9
        }
    }

    #[test]
    fn phi_value_and_q() {
        let s = CapabilitySet::new(vec![2, 4]).unwrap();
        let star = Star {
            values: vec![
                (vec![2, 2], [2.0, 10.0, 0.0]),
                (vec![2, 4], [4.0, 10.0, 0.0]),
                (vec![4, 2], [2.0, 10.0, 0.0]),
                (vec![4, 4], [4.0, 10.0, 0.0]),
            ],
            rewards: [1.0, 0.0],
        };
        let bank = BeliefBank::new(s.clone(), 4, 2, BeliefMode::Tempered).unwrap();
        let delta = intervene(&intervene(&bank, 0, 2).unwrap(), 1, 4).unwrap();
        assert_eq!(phi_value(4, &0, &delta, &star, 0.1).unwrap(), 4.0);
        let half = intervene(&bank, 0, 2).unwrap();
        assert!((phi_value(4, &0, &half, &star, 0.1).unwrap() - 3.0).abs() < 1e-12);
        assert!((phi_q(4, &0, &bank, &0, &star, 0.1).unwrap() - 10.0).abs() < 1e-12);

        let mut rng = crate::seeded_rng(1);
        let draw = phi_greedy_policy(4, 0, &0, &bank, &star, 0.1, &mut rng).unwrap();
        assert_eq!(draw.action, 0);
        assert_eq!(loss(4, 0, &0, &bank, &0, &star, 0.1, None).unwrap(), 0.0);
        assert!((loss(4, 0, &0, &bank, &1, &star, 0.1, None).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn missing_value_is_an_error() {
        let s = CapabilitySet::new(vec![2, 4]).unwrap();
        let star = Star {
            values: vec![],
            rewards: [0.0, 0.0],
        };
        let bank = BeliefBank::new(s, 4, 2, BeliefMode::Tempered).unwrap();
        assert_eq!(phi_value(4, &0, &bank, &star, 0.1), Err(Error::MissingAssignmentValue));
    }
}
