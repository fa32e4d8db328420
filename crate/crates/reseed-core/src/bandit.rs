//! Contextual-bandit training of test lists.
//!
//! Arms are corpus tests; the context is a coverage level; rewards are
//! coverage increments in percent. Two trainers share the ε-greedy
//! selection and mean-reward update:
//!
//! * [`train_adaptive`] keeps a working set of `k` arms, eliminates arms
//!   whose moving-average reward is zero after a check window of `gamma`
//!   pulls, and promotes arms whose selection weight reaches the adaptive
//!   threshold `theta` into the final list, refilling the working set from
//!   the corpus after every removal.
//! * [`train_plain`] runs the same loop with no elimination or promotion;
//!   the final list is the whole working set.
//!
//! Selection weights live in percent (uniform over 100 arms = 1.00), so
//! thresholds like 1.90 read as "almost twice the uniform share".

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::level::Level;

/// Where a trained list is used during a campaign.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListKind {
    Vulnerability,
    Coverage,
}

/// A trained test list: entries carry a selection probability, strictly
/// positive and summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedList {
    pub context: Level,
    pub kind: ListKind,
    pub entries: Vec<(String, f64)>,
}

impl TrainedList {
    pub fn empty(context: Level, kind: ListKind) -> Self {
        TrainedList {
            context,
            kind,
            entries: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Validates the probability mass: strictly positive entries summing to
    /// one within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.entries.is_empty() {
            return Ok(());
        }
        if self.entries.iter().any(|(_, p)| *p <= 0.0) {
            return Err(Error::structural(format!(
                "list for context {} has non-positive probabilities",
                self.context
            )));
        }
        let sum: f64 = self.entries.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::structural(format!(
                "list for context {} has probability mass {sum}",
                self.context
            )));
        }
        Ok(())
    }
}

/// Running statistics for one working-set arm.
#[derive(Clone, Debug)]
pub struct ArmStats {
    pub test_id: String,
    /// Arithmetic mean of all observed rewards.
    pub mean_reward: f64,
    pub pulls: u32,
}

/// The mutable bandit state for one context.
#[derive(Clone, Debug)]
pub struct PolicyState {
    pub context: Level,
    pub epsilon: f64,
    /// Working arm set; at most `k` entries.
    pub arms: Vec<ArmStats>,
    /// Selection weight per arm, in percent, aligned with `arms`.
    /// Reward-proportional; uniform when every mean reward is zero.
    pub weights: Vec<f64>,
    /// Promoted (test, weight-percent) pairs, in promotion order.
    pub promoted: Vec<(String, f64)>,
}

impl PolicyState {
    fn new(context: Level, epsilon: f64) -> Self {
        PolicyState {
            context,
            epsilon,
            arms: Vec::new(),
            weights: Vec::new(),
            promoted: Vec::new(),
        }
    }

    fn recompute_weights(&mut self) {
        let total: f64 = self.arms.iter().map(|a| a.mean_reward).sum();
        let n = self.arms.len();
        self.weights.clear();
        if n == 0 {
            return;
        }
        if total == 0.0 {
            self.weights.extend((0..n).map(|_| 100.0 / n as f64));
        } else {
            self.weights
                .extend(self.arms.iter().map(|a| 100.0 * a.mean_reward / total));
        }
    }
}

/// The environment a trainer pulls rewards from. Implementations must be
/// deterministic given the rng stream handed to them.
pub trait RewardSource {
    fn reward(&mut self, test_id: &str, rng: &mut ChaCha8Rng) -> f64;
}

impl<F: FnMut(&str, &mut ChaCha8Rng) -> f64> RewardSource for F {
    fn reward(&mut self, test_id: &str, rng: &mut ChaCha8Rng) -> f64 {
        self(test_id, rng)
    }
}

/// ε-greedy selection: with probability ε a uniform arm, otherwise the arm
/// with the highest mean reward (ties: fewest pulls, then smaller id).
///
/// Returns the selected index. Empty arm sets are structural errors.
pub fn select_arm(state: &PolicyState, rng: &mut ChaCha8Rng) -> Result<usize> {
    if state.arms.is_empty() {
        return Err(Error::structural("select_arm on an empty arm set"));
    }
    if rng.random::<f64>() < state.epsilon {
        return Ok(rng.random_range(0..state.arms.len()));
    }
    let mut best = 0;
    for i in 1..state.arms.len() {
        let (a, b) = (&state.arms[i], &state.arms[best]);
        let better = a.mean_reward > b.mean_reward
            || (a.mean_reward == b.mean_reward
                && (a.pulls < b.pulls || (a.pulls == b.pulls && a.test_id < b.test_id)));
        if better {
            best = i;
        }
    }
    Ok(best)
}

/// Applies one observed reward: mean update, pull count, and a full weight
/// recomputation (reward-proportional shares in percent).
pub fn update_policy(state: &mut PolicyState, arm: usize, reward: f64) -> Result<()> {
    let a = state
        .arms
        .get_mut(arm)
        .ok_or_else(|| Error::structural(format!("unknown arm index {arm}")))?;
    a.mean_reward = (a.mean_reward * f64::from(a.pulls) + reward) / f64::from(a.pulls + 1);
    a.pulls += 1;
    state.recompute_weights();
    Ok(())
}

/// Rescales weights proportionally so they sum to one. An all-zero vector
/// is a structural error; the caller decides whether uniform is acceptable.
pub fn normalize_policy(entries: &mut [(String, f64)]) -> Result<()> {
    let sum: f64 = entries.iter().map(|(_, w)| w).sum();
    if sum <= 0.0 {
        return Err(Error::structural("cannot normalize all-zero weights"));
    }
    for (_, w) in entries.iter_mut() {
        *w /= sum;
    }
    Ok(())
}

/// Training knobs shared by both trainers.
#[derive(Clone, Copy, Debug)]
pub struct BanditConfig {
    /// Working arm-set size `k`.
    pub arm_budget: usize,
    /// Check window `gamma`: pulls before an arm is evaluated.
    pub check_window: u32,
    /// Exploration probability.
    pub epsilon: f64,
    /// Training steps `n`.
    pub steps: u64,
}

/// What happened to the selected arm at one training step.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepAction {
    Keep,
    Drop,
    Promote,
}

impl StepAction {
    pub fn as_str(self) -> &'static str {
        match self {
            StepAction::Keep => "keep",
            StepAction::Drop => "drop",
            StepAction::Promote => "promote",
        }
    }
}

/// One observable training event. Initialization pulls report `step == 0`.
#[derive(Clone, Debug)]
pub struct StepEvent {
    pub step: u64,
    pub arm: String,
    pub reward: f64,
    pub action: StepAction,
    /// Pull count of the arm after this event.
    pub pulls: u32,
}

/// Receives training events; used for the training log and for tests.
pub trait TrainObserver {
    fn on_event(&mut self, _event: &StepEvent) {}
}

/// Discards all events.
pub struct NullObserver;

impl TrainObserver for NullObserver {}

impl TrainObserver for Vec<StepEvent> {
    fn on_event(&mut self, event: &StepEvent) {
        self.push(event.clone());
    }
}

/// Output of [`train_adaptive`].
#[derive(Clone, Debug)]
pub struct AdaptiveOutcome {
    pub list: TrainedList,
    /// Corpus tests never drawn into the working set, available for the
    /// next (lower) context.
    pub residual: Vec<String>,
}

/// Adaptive training loop with elimination and promotion.
///
/// Initializes the working set with `k` uniform draws from the corpus and
/// pulls each once, then runs `n` steps of select → reward → update. Once
/// an arm has `gamma` pulls it is checked on every pull: a zero mean reward
/// eliminates it; a selection weight at or above `theta` (percent) promotes
/// it with that weight. Either way the slot refills from the corpus while
/// tests remain. The promoted weights normalize into the final list.
pub fn train_adaptive(
    corpus: &[String],
    env: &mut dyn RewardSource,
    cfg: &BanditConfig,
    context: Level,
    theta: f64,
    rng: &mut ChaCha8Rng,
    observer: &mut dyn TrainObserver,
) -> AdaptiveOutcome {
    let mut pool: Vec<String> = corpus.to_vec();
    let mut state = PolicyState::new(context, cfg.epsilon);

    let initial = cfg.arm_budget.min(pool.len());
    for _ in 0..initial {
        let id = draw(&mut pool, rng);
        state.arms.push(ArmStats {
            test_id: id,
            mean_reward: 0.0,
            pulls: 0,
        });
    }
    // Initialization pulls: update mean and count once per arm. These count
    // toward the check window.
    for i in 0..state.arms.len() {
        let r = env.reward(&state.arms[i].test_id.clone(), rng);
        let a = &mut state.arms[i];
        a.mean_reward = r;
        a.pulls = 1;
        observer.on_event(&StepEvent {
            step: 0,
            arm: a.test_id.clone(),
            reward: r,
            action: StepAction::Keep,
            pulls: 1,
        });
    }
    state.recompute_weights();

    for step in 1..=cfg.steps {
        if state.arms.is_empty() {
            break;
        }
        let idx = select_arm(&state, rng).expect("arm set checked nonempty");
        let test_id = state.arms[idx].test_id.clone();
        let reward = env.reward(&test_id, rng);
        update_policy(&mut state, idx, reward).expect("index in range");

        let pulls = state.arms[idx].pulls;
        let mut action = StepAction::Keep;
        if pulls >= cfg.check_window {
            if state.arms[idx].mean_reward == 0.0 {
                action = StepAction::Drop;
                state.arms.swap_remove(idx);
                refill(&mut state, &mut pool, rng);
                state.recompute_weights();
            } else if state.weights[idx] >= theta {
                action = StepAction::Promote;
                let weight = state.weights[idx];
                let arm = state.arms.swap_remove(idx);
                state.promoted.push((arm.test_id, weight));
                refill(&mut state, &mut pool, rng);
                state.recompute_weights();
            }
        }
        observer.on_event(&StepEvent {
            step,
            arm: test_id,
            reward,
            action,
            pulls,
        });
        debug_assert!(
            pool.is_empty() || state.arms.len() == initial,
            "working set must stay at k while the corpus lasts"
        );
    }

    let mut entries = state.promoted;
    if !entries.is_empty() {
        normalize_policy(&mut entries).expect("promoted weights are positive");
    }
    AdaptiveOutcome {
        list: TrainedList {
            context,
            kind: ListKind::Coverage,
            entries,
        },
        residual: pool,
    }
}

/// Plain training loop: no elimination, no promotion. The final list is the
/// whole working set with ε-smoothed reward-proportional probabilities —
/// every arm keeps at least the uniform exploration share, so ineffective
/// arms remain in the list with a small positive weight.
pub fn train_plain(
    corpus: &[String],
    env: &mut dyn RewardSource,
    cfg: &BanditConfig,
    context: Level,
    kind: ListKind,
    rng: &mut ChaCha8Rng,
    observer: &mut dyn TrainObserver,
) -> AdaptiveOutcome {
    let mut pool: Vec<String> = corpus.to_vec();
    let mut state = PolicyState::new(context, cfg.epsilon);
    let initial = cfg.arm_budget.min(pool.len());
    for _ in 0..initial {
        let id = draw(&mut pool, rng);
        state.arms.push(ArmStats {
            test_id: id,
            mean_reward: 0.0,
            pulls: 0,
        });
    }
    for i in 0..state.arms.len() {
        let r = env.reward(&state.arms[i].test_id.clone(), rng);
        let a = &mut state.arms[i];
        a.mean_reward = r;
        a.pulls = 1;
        observer.on_event(&StepEvent {
            step: 0,
            arm: a.test_id.clone(),
            reward: r,
            action: StepAction::Keep,
            pulls: 1,
        });
    }
    state.recompute_weights();

    for step in 1..=cfg.steps {
        if state.arms.is_empty() {
            break;
        }
        let idx = select_arm(&state, rng).expect("arm set checked nonempty");
        let test_id = state.arms[idx].test_id.clone();
        let reward = env.reward(&test_id, rng);
        update_policy(&mut state, idx, reward).expect("index in range");
        observer.on_event(&StepEvent {
            step,
            arm: test_id,
            reward,
            action: StepAction::Keep,
            pulls: state.arms[idx].pulls,
        });
    }

    // Sort by id for a stable, readable artifact.
    let mut arms = state.arms;
    arms.sort_by(|a, b| a.test_id.cmp(&b.test_id));
    let total: f64 = arms.iter().map(|a| a.mean_reward).sum();
    let n = arms.len();
    let entries: Vec<(String, f64)> = arms
        .into_iter()
        .map(|a| {
            let proportional = if total > 0.0 {
                a.mean_reward / total
            } else {
                1.0 / n as f64
            };
            let smoothed = cfg.epsilon / n as f64 + (1.0 - cfg.epsilon) * proportional;
            (a.test_id, smoothed)
        })
        .collect();
    AdaptiveOutcome {
        list: TrainedList {
            context,
            kind,
            entries,
        },
        residual: pool,
    }
}

/// Uniform draw without replacement.
fn draw(pool: &mut Vec<String>, rng: &mut ChaCha8Rng) -> String {
    let i = rng.random_range(0..pool.len());
    pool.swap_remove(i)
}

fn refill(state: &mut PolicyState, pool: &mut Vec<String>, rng: &mut ChaCha8Rng) {
    if pool.is_empty() {
        return;
    }
    let id = draw(pool, rng);
    state.arms.push(ArmStats {
        test_id: id,
        mean_reward: 0.0,
        pulls: 0,
    });
}
