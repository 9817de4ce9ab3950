//! Randomized and exhaustive checks of the inference guarantees on tabular games.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    brute_force_posterior_with, condition_on_at_most, recursive_q, tab_outcomes, AssignmentValues, CoupledQ,
    RandomGameSpec, TabState, TabularGame, TabularQ,
};
use crate::capability::{is_type_structure, Belief, BeliefBank, BeliefMode, Capability, STRUCTURE_TOLERANCE};
use crate::exact::{argmax_set, conditional_likelihood, exact_update, TypedQProvider, TIE_TOLERANCE};
use crate::tempered::{
    loss, losses_for_observation, stochastic_constant, temperature, tempered_update, AssignmentValueProvider,
    NoiseRegime, Outcome,
};
use crate::{seeded_rng, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    /// Exact beliefs of all observers form a capability type structure.
    T1,
    /// Exact conditional likelihoods equal the Bayes posterior.
    T2,
    /// Tempered beliefs stay close under adversarial noise.
    T3,
    /// Tempered beliefs stay close under stochastic noise.
    T4,
    /// One-step loss stability.
    Lemma,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::T1 => "t1",
            Theorem::T2 => "t2",
            Theorem::T3 => "t3",
            Theorem::T4 => "t4",
            Theorem::Lemma => "lemma",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Some(Theorem::T1),
            "t2" => Some(Theorem::T2),
            "t3" => Some(Theorem::T3),
            "t4" => Some(Theorem::T4),
            "lemma" => Some(Theorem::Lemma),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Observations per tempered trial.
    pub steps: usize,
    /// Longest history enumerated by the exact checks.
    pub history_len: usize,
    /// Multiplicative slack on the adversarial bound.
    pub slack: f64,
    /// Games for the exact checks.
    pub exact_game: RandomGameSpec,
    /// Games for the tempered checks.
    pub tempered_game: RandomGameSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            delta: 0.1,
            steps: 200,
            history_len: 4,
            slack: 1.05,
            exact_game: RandomGameSpec::default(),
            tempered_game: RandomGameSpec {
                n_states: 5,
                horizon: 6,
                gamma: 0.9,
                ..RandomGameSpec::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub trials: usize,
    /// Individual comparisons made across all trials.
    pub checks: u64,
    pub violations: u64,
    /// Seeds of trials with at least one violation.
    pub violation_seeds: Vec<u64>,
    /// Largest observed statistic (same units as `bound`).
    pub max_deviation: f64,
    pub bound: f64,
    /// Fraction of trials without a violation.
    pub pass_fraction: f64,
    pub passed: bool,
    pub seed: u64,
}

/// Runs `trials` randomized trials of one guarantee. Trial `k` uses seed
/// `seed + k`, so any failing trial can be replayed on its own.
pub fn verify_theorem(which: Theorem, trials: usize, seed: u64, cfg: &VerifyConfig) -> Result<TheoremReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("verify needs at least one trial".into()));
    }
    if !(cfg.epsilon > 0.0) || !(cfg.slack >= 1.0) || cfg.steps == 0 {
        return Err(Error::InvalidParameter(
            "epsilon > 0, slack >= 1 and steps >= 1 are required".into(),
        ));
    }
    let mut acc = Tally::default();
    let bound = match which {
        Theorem::T1 | Theorem::T2 => STRUCTURE_TOLERANCE,
        Theorem::T3 | Theorem::Lemma => 3.0 * cfg.epsilon * cfg.slack,
        Theorem::T4 => {
            let spec = &cfg.tempered_game;
            let d = stochastic_constant(spec.n_players, spec.labels.len(), cfg.delta)?;
            libm::sqrt(d) * cfg.epsilon / (2.0 * spec.n_players as f64)
        }
    };
    for k in 0..trials as u64 {
        let trial_seed = seed.wrapping_add(k);
        let out = match which {
            Theorem::T1 => exact_trial(trial_seed, cfg, true)?,
            Theorem::T2 => exact_trial(trial_seed, cfg, false)?,
            Theorem::T3 => tempered_trial(trial_seed, cfg, NoiseRegime::Adversarial, bound)?,
            Theorem::T4 => tempered_trial(trial_seed, cfg, NoiseRegime::Stochastic, bound)?,
            Theorem::Lemma => lemma_trial(trial_seed, cfg, bound)?,
        };
        acc.absorb(trial_seed, out);
    }
    let pass_fraction = 1.0 - acc.violation_seeds.len() as f64 / trials as f64;
    let passed = match which {
        Theorem::T4 => pass_fraction >= 1.0 - cfg.delta,
        _ => acc.violations == 0,
    };
    Ok(TheoremReport {
        theorem: which.name().into(),
        trials,
        checks: acc.checks,
        violations: acc.violations,
        violation_seeds: acc.violation_seeds,
        max_deviation: acc.max_deviation,
        bound,
        pass_fraction,
        passed,
        seed,
    })
}

#[derive(Default)]
struct Tally {
    checks: u64,
    violations: u64,
    violation_seeds: Vec<u64>,
    max_deviation: f64,
}

#[derive(Default)]
struct TrialOutcome {
    checks: u64,
    violations: u64,
    max_deviation: f64,
}

impl TrialOutcome {
    fn record(&mut self, deviation: f64, ok: bool) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
        }
        if deviation > self.max_deviation {
            self.max_deviation = deviation;
        }
    }
}

impl Tally {
    fn absorb(&mut self, seed: u64, out: TrialOutcome) {
        self.checks += out.checks;
        self.violations += out.violations;
        if out.violations > 0 {
            self.violation_seeds.push(seed);
        }
        if out.max_deviation > self.max_deviation {
            self.max_deviation = out.max_deviation;
        }
    }
}

// ---------------------------------------------------------------------------
// Exact inference: every history up to `history_len`.

struct ExactCtx<'a, Q> {
    game: &'a TabularGame,
    q: &'a Q,
    /// `likelihood[k][t][s][a]` from the recursive Q-values.
    likelihood: Vec<Vec<Vec<Vec<f64>>>>,
    structure: bool,
    out: TrialOutcome,
}

fn exact_trial(seed: u64, cfg: &VerifyConfig, structure: bool) -> Result<TrialOutcome> {
    let mut rng = seeded_rng(seed);
    let game = TabularGame::random(&cfg.exact_game, &mut rng)?;
    let base = TabularQ::new(&game)?;
    let likelihood = likelihood_table(&game);
    if !structure {
        return walk(&game, &base, likelihood, false, cfg.history_len);
    }
    // Belief-independent values, then values that read the beliefs.
    let mut out = walk(&game, &base, likelihood.clone(), true, cfg.history_len)?;
    let coupled = CoupledQ {
        base: base.clone(),
        weight: 0.5,
    };
    let more = walk(&game, &coupled, likelihood, true, cfg.history_len)?;
    out.checks += more.checks;
    out.violations += more.violations;
    out.max_deviation = out.max_deviation.max(more.max_deviation);
    Ok(out)
}

fn likelihood_table(game: &TabularGame) -> Vec<Vec<Vec<Vec<f64>>>> {
    game.set
        .labels()
        .iter()
        .map(|&c| {
            (0..game.horizon)
                .map(|t| {
                    (0..game.n_states)
                        .map(|s| {
                            let x = TabState { s, t };
                            let q: Vec<f64> = (0..game.n_actions).map(|a| recursive_q(game, c, &x, a)).collect();
                            let best = argmax_set(&q, TIE_TOLERANCE);
                            (0..game.n_actions)
                                .map(|a| {
                                    if best.contains(&a) {
                                        1.0 / best.len() as f64
                                    } else {
                                        0.0
                                    }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn walk<Q>(
    game: &TabularGame,
    q: &Q,
    likelihood: Vec<Vec<Vec<Vec<f64>>>>,
    structure: bool,
    max_len: usize,
) -> Result<TrialOutcome>
where
    Q: TypedQProvider<State = TabState, Action = usize>,
{
    let banks = game
        .set
        .labels()
        .iter()
        .map(|&c| BeliefBank::new(game.set.clone(), c, game.n_players, BeliefMode::Exact))
        .collect::<Result<Vec<_>>>()?;
    let mut ctx = ExactCtx {
        game,
        q,
        likelihood,
        structure,
        out: TrialOutcome::default(),
    };
    let mut history = Vec::new();
    ctx.check(&banks, &history)?;
    ctx.descend(game.initial(), &banks, &mut history, max_len)?;
    Ok(ctx.out)
}

impl<Q> ExactCtx<'_, Q>
where
    Q: TypedQProvider<State = TabState, Action = usize>,
{
    fn descend(
        &mut self,
        x: TabState,
        banks: &[BeliefBank],
        history: &mut Vec<(TabState, usize, usize)>,
        left: usize,
    ) -> Result<()> {
        if left == 0 || self.game.is_terminal(&x) {
            return Ok(());
        }
        let actor = self.game.actor(x.t);
        for a in 0..self.game.n_actions {
            let next_banks = banks
                .iter()
                .map(|b| exact_update(b, actor, &a, &x, self.q))
                .collect::<Result<Vec<_>>>()?;
            history.push((x, actor, a));
            self.check(&next_banks, history)?;
            for &(s, _) in &self.game.transitions[x.s][a] {
                self.descend(TabState { s, t: x.t + 1 }, &next_banks, history, left - 1)?;
            }
            history.pop();
        }
        Ok(())
    }

    fn check(&mut self, banks: &[BeliefBank], history: &[(TabState, usize, usize)]) -> Result<()> {
        let set = &self.game.set;
        if self.structure {
            for m in 0..self.game.n_players {
                let held: Vec<(Capability, &Belief)> = banks
                    .iter()
                    .map(|b| Ok((b.owner(), b.belief(m)?)))
                    .collect::<Result<_>>()?;
                let ok = is_type_structure(set, &held, STRUCTURE_TOLERANCE)?;
                let gap = structure_gap(set, &held)?;
                self.out.record(gap, ok);
            }
            return Ok(());
        }
        let table = &self.likelihood;
        let posterior = brute_force_posterior_with(self.game, history, |c, x, a| {
            let k = set.index_of(c).expect("label from the set");
            table[k][x.t][x.s][a]
        })?;
        for bank in banks {
            for m in 0..self.game.n_players {
                let belief = bank.belief(m)?;
                for &c in set.predecessors(bank.owner())? {
                    let got = conditional_likelihood(set, belief, c)?;
                    let want = condition_on_at_most(set, &posterior[m], c)?;
                    let (gap, ok) = match (&got, &want) {
                        (None, None) => (0.0, true),
                        (Some(g), Some(w)) => {
                            let gap = g.iter().zip(w).map(|(x, y)| libm::fabs(x - y)).fold(0.0, f64::max);
                            (gap, gap <= STRUCTURE_TOLERANCE)
                        }
                        _ => (f64::INFINITY, false),
                    };
                    self.out.record(gap, ok);
                }
            }
        }
        Ok(())
    }
}

/// Largest entrywise disagreement between any pair of held beliefs after
/// reducing the higher one to the lower type.
fn structure_gap(set: &crate::CapabilitySet, held: &[(Capability, &Belief)]) -> Result<f64> {
    let mut gap = 0.0f64;
    for (i, &(ci, bi)) in held.iter().enumerate() {
        for &(ck, bk) in &held[i + 1..] {
            let (hi, lo, lo_type) = if ci >= ck { (bi, bk, ck) } else { (bk, bi, ci) };
            let reduced = crate::capability::reduce(set, hi, lo_type)?;
            for (x, y) in reduced.values().iter().zip(lo.values()) {
                gap = gap.max(libm::fabs(x - y));
            }
        }
    }
    Ok(gap)
}

// ---------------------------------------------------------------------------
// Tempered inference under bounded value noise.

/// Deterministic noise in `[-1, 1]` keyed by its arguments.
fn unit_noise(key: &[u64]) -> f64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &k in key {
        h = splitmix(h ^ k);
    }
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One observer's private, noisy copy of the assignment values. Two
/// observers' copies differ by at most `epsilon` everywhere.
struct NoisyValues<'a> {
    exact: &'a AssignmentValues<'a>,
    epsilon: f64,
    regime: NoiseRegime,
    seed: u64,
    /// Update count; fresh noise per update.
    step: u64,
    observer: u64,
}

impl AssignmentValueProvider for NoisyValues<'_> {
    type State = TabState;
    type Action = usize;

    fn actions(&self, x: &TabState) -> Vec<usize> {
        self.exact.actions(x)
    }

    fn outcomes(&self, x: &TabState, a: &usize) -> Vec<Outcome<TabState>> {
        tab_outcomes(self.exact.game(), x, *a)
    }

    fn value(&self, assignment: &[Capability], x: &TabState) -> Option<f64> {
        let v = self.exact.exact(assignment, x)?;
        let mut key = vec![self.seed, self.step, x.s as u64, x.t as u64];
        key.extend(assignment.iter().map(|&c| c as u64));
        let half = self.epsilon / 2.0;
        let noise = match self.regime {
            // Worst case: the two observers are pushed in opposite directions.
            NoiseRegime::Adversarial => {
                let sign = if unit_noise(&key) >= 0.0 { half } else { -half };
                if self.observer == 0 {
                    sign
                } else {
                    -sign
                }
            }
            _ => {
                key.push(self.observer);
                unit_noise(&key) * half
            }
        };
        Some(v + noise)
    }

    fn gamma(&self) -> f64 {
        self.exact.gamma()
    }
}

fn max_bank_gap(a: &BeliefBank, b: &BeliefBank) -> f64 {
    let mut gap = 0.0f64;
    for (x, y) in a.beliefs().iter().zip(b.beliefs()) {
        for (u, v) in x.values().iter().zip(y.values()) {
            if u.is_finite() && v.is_finite() {
                gap = gap.max(libm::fabs(u - v));
            } else if u != v {
                return f64::INFINITY;
            }
        }
    }
    gap
}

fn tempered_trial(seed: u64, cfg: &VerifyConfig, regime: NoiseRegime, bound: f64) -> Result<TrialOutcome> {
    let mut rng = seeded_rng(seed);
    let game = TabularGame::random(&cfg.tempered_game, &mut rng)?;
    let exact = AssignmentValues::new(&game)?;
    let n = game.n_players;
    let top = game.set.max();
    let mut banks = [
        BeliefBank::new(game.set.clone(), top, n, BeliefMode::Tempered)?,
        BeliefBank::new(game.set.clone(), top, n, BeliefMode::Tempered)?,
    ];
    let mut out = TrialOutcome::default();
    let mut violated = false;
    let mut x = game.initial();
    for t in 1..=cfg.steps {
        let actor = game.actor(x.t);
        let a = rng.gen_range(0..game.n_actions);
        let temp = temperature(regime, t, n, game.set.len(), cfg.delta, 0.1)?;
        for (obs, bank) in banks.iter_mut().enumerate() {
            let private = NoisyValues {
                exact: &exact,
                epsilon: cfg.epsilon,
                regime,
                seed,
                step: t as u64,
                observer: obs as u64,
            };
            let losses = losses_for_observation(actor, &x, bank, &a, &private, temp, None)?;
            *bank = tempered_update(bank, actor, &losses)?;
        }
        let scale = match regime {
            NoiseRegime::Adversarial => t as f64,
            _ => libm::pow(t as f64, 2.0 / 3.0),
        };
        let stat = max_bank_gap(&banks[0], &banks[1]) / scale;
        let ok = stat <= bound;
        out.checks += 1;
        out.max_deviation = out.max_deviation.max(stat);
        violated |= !ok;
        x = sample_next(&game, &x, a, &mut rng);
    }
    // One trial is one sample of the guarantee.
    out.violations = violated as u64;
    Ok(out)
}

fn sample_next<R: Rng>(game: &TabularGame, x: &TabState, a: usize, rng: &mut R) -> TabState {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let outs = &game.transitions[x.s][a];
    let mut s = outs[outs.len() - 1].0;
    for &(n, p) in outs {
        acc += p;
        if u < acc {
            s = n;
            break;
        }
    }
    let next = TabState { s, t: x.t + 1 };
    if game.is_terminal(&next) {
        game.initial()
    } else {
        next
    }
}

fn lemma_trial(seed: u64, cfg: &VerifyConfig, bound: f64) -> Result<TrialOutcome> {
    let mut rng = seeded_rng(seed);
    let game = TabularGame::random(&cfg.tempered_game, &mut rng)?;
    let exact = AssignmentValues::new(&game)?;
    let n = game.n_players;
    let top = game.set.max();
    let width = game.set.len();
    let temp = rng.gen_range(0.5..50.0);
    let reach = temp * cfg.epsilon / (2.0 * n as f64);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for _ in 0..n {
        let base: Vec<f64> = (0..width).map(|_| rng.gen_range(0.0..5.0)).collect();
        let moved: Vec<f64> = base
            .iter()
            .map(|&v| (v + rng.gen_range(-reach..=reach)).max(0.0))
            .collect();
        left.push(Belief::new(base, BeliefMode::Tempered)?);
        right.push(Belief::new(moved, BeliefMode::Tempered)?);
    }
    let bj = BeliefBank::from_parts(game.set.clone(), top, left)?;
    let bk = BeliefBank::from_parts(game.set.clone(), top, right)?;
    let x = TabState {
        s: rng.gen_range(0..game.n_states),
        t: rng.gen_range(0..game.horizon),
    };
    let actor = game.actor(x.t);
    let a = rng.gen_range(0..game.n_actions);
    let regime = if rng.gen_bool(0.5) {
        NoiseRegime::Adversarial
    } else {
        NoiseRegime::Stochastic
    };
    let vj = NoisyValues {
        exact: &exact,
        epsilon: cfg.epsilon,
        regime,
        seed,
        step: 0,
        observer: 0,
    };
    let vk = NoisyValues { observer: 1, ..vj };
    let mut out = TrialOutcome::default();
    for &c in game.set.labels() {
        let lj = loss(c, actor, &x, &bj, &a, &vj, temp, None)?;
        let lk = loss(c, actor, &x, &bk, &a, &vk, temp, None)?;
        let gap = libm::fabs(lj - lk);
        out.record(gap, gap <= bound);
    }
    Ok(out)
}
