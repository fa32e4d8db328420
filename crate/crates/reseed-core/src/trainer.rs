//! Model training: context snapshots, the reward environment, automatic
//! threshold tuning, per-context list training, and model (de)serialization.
//!
//! Training runs highest context first. Tests consumed at a higher context
//! are withheld from lower ones, which keeps the coverage lists pairwise
//! disjoint. Vulnerability tests are never eliminated: their list is
//! trained with the plain (non-eliminating) loop and keeps every test.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bandit::{
    train_adaptive, train_plain, BanditConfig, ListKind, NullObserver, RewardSource, StepAction,
    StepEvent, TrainObserver, TrainedList,
};
use crate::bits::BitSet;
use crate::coverage::CoveredSet;
use crate::error::{Error, Result};
use crate::level::Level;
use crate::seed::mix_seed;

/// A coverage level paired with the concrete covered-point sets captured
/// when each processor's baseline run first reached that level.
#[derive(Clone, Debug)]
pub struct ContextSnapshot {
    pub level: Level,
    pub per_processor: BTreeMap<String, CoveredSet>,
}

/// Extracts one snapshot per level from per-processor baseline traces.
///
/// The snapshot is the first trace state at or above the level. A run that
/// never reaches a level simply has no entry for it; reward draws then skip
/// that processor.
pub fn snapshot_contexts(
    traces: &BTreeMap<String, Vec<CoveredSet>>,
    levels: &[Level],
) -> Result<Vec<ContextSnapshot>> {
    for (proc, trace) in traces {
        if trace.is_empty() {
            return Err(Error::structural(format!(
                "baseline trace for {proc:?} is empty"
            )));
        }
    }
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut per_processor = BTreeMap::new();
        for (proc, trace) in traces {
            let hit = trace.iter().find(|s| {
                // 100*count/len >= level, compared in integers.
                (s.count() as u64) * 10_000 >= u64::from(level.centi()) * s.universe_len() as u64
            });
            if let Some(state) = hit {
                per_processor.insert(proc.clone(), state.clone());
            }
        }
        out.push(ContextSnapshot {
            level,
            per_processor,
        });
    }
    Ok(out)
}

/// The training reward environment: per-(processor, test) coverage rows
/// plus per-level snapshots. A reward query draws one processor uniformly
/// among those holding the level's snapshot and returns the incremental
/// coverage of the test's row over that snapshot, in percent of the
/// drawing processor's universe.
///
/// Rows are precomputed once; repeated queries never re-execute a test.
#[derive(Clone, Debug, Default)]
pub struct RewardTable {
    rows: BTreeMap<(String, String), BitSet>,
    snapshots: BTreeMap<Level, ContextSnapshot>,
}

impl RewardTable {
    pub fn new() -> Self {
        RewardTable::default()
    }

    pub fn insert_row(&mut self, processor: &str, test_id: &str, bits: BitSet) {
        self.rows
            .insert((processor.to_owned(), test_id.to_owned()), bits);
    }

    pub fn insert_snapshots(&mut self, snapshots: Vec<ContextSnapshot>) {
        for s in snapshots {
            self.snapshots.insert(s.level, s);
        }
    }

    pub fn snapshot(&self, level: Level) -> Option<&ContextSnapshot> {
        self.snapshots.get(&level)
    }

    pub fn reward(&self, level: Level, test_id: &str, rng: &mut ChaCha8Rng) -> f64 {
        let Some(snapshot) = self.snapshots.get(&level) else {
            return 0.0;
        };
        if snapshot.per_processor.is_empty() {
            return 0.0;
        }
        let pick = rng.random_range(0..snapshot.per_processor.len());
        let (proc, covered) = snapshot
            .per_processor
            .iter()
            .nth(pick)
            .expect("index in range");
        match self.rows.get(&(proc.clone(), test_id.to_owned())) {
            Some(bits) => crate::coverage::coverage_percent(
                bits.count_new_in(covered.bits()),
                covered.universe_len(),
            ),
            None => 0.0,
        }
    }

    /// A [`RewardSource`] view bound to one level.
    pub fn env_at(&self, level: Level) -> LevelEnv<'_> {
        LevelEnv { table: self, level }
    }
}

pub struct LevelEnv<'a> {
    table: &'a RewardTable,
    level: Level,
}

impl RewardSource for LevelEnv<'_> {
    fn reward(&mut self, test_id: &str, rng: &mut ChaCha8Rng) -> f64 {
        self.table.reward(self.level, test_id, rng)
    }
}

// --- threshold tuning --------------------------------------------------------

/// One probe = one adaptive training run at a candidate threshold,
/// returning the promoted test ids. Abstracted so the binary-search logic
/// can be exercised against a closed-form response in tests.
pub trait ProbeRunner {
    fn probe(&mut self, level: Level, theta: f64, corpus: &[String], seed: u64) -> Vec<String>;
}

/// Production probe: runs the adaptive trainer against a [`RewardTable`].
pub struct BanditProbe<'a> {
    pub table: &'a RewardTable,
    pub arm_budget: usize,
    pub check_window: u32,
    pub epsilon: f64,
    pub steps: u64,
}

impl ProbeRunner for BanditProbe<'_> {
    fn probe(&mut self, level: Level, theta: f64, corpus: &[String], seed: u64) -> Vec<String> {
        let cfg = BanditConfig {
            arm_budget: self.arm_budget,
            check_window: self.check_window,
            epsilon: self.epsilon,
            steps: self.steps,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut env = self.table.env_at(level);
        train_adaptive(corpus, &mut env, &cfg, level, theta, &mut rng, &mut NullObserver)
            .list
            .entries
            .into_iter()
            .map(|(id, _)| id)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct TuneOutcome {
    pub thetas: BTreeMap<Level, f64>,
    /// Probe count per level; never exceeds 14.
    pub probes: BTreeMap<Level, u32>,
    pub warnings: Vec<String>,
}

/// Binary-searches a promotion threshold per level so the trained list size
/// lands within `(1 ± tolerance) * arm_budget`.
///
/// Levels are processed highest first. The search runs over θ ∈ [0, 100]
/// at 0.01 precision, at most 14 probes; if the band is never hit the last
/// midpoint is kept and a warning recorded. After accepting a threshold the
/// trainer runs once more and the chosen tests are withheld from the
/// remaining (lower) levels.
pub fn fine_tune_thresholds(
    corpus: &[String],
    levels: &[Level],
    arm_budget: usize,
    tolerance: f64,
    probe: &mut dyn ProbeRunner,
    master_seed: u64,
) -> TuneOutcome {
    let upper = (1.0 + tolerance) * arm_budget as f64;
    let lower = (1.0 - tolerance) * arm_budget as f64;

    let mut desc: Vec<Level> = levels.to_vec();
    desc.sort();
    desc.reverse();

    let mut working: Vec<String> = corpus.to_vec();
    working.sort();

    let mut out = TuneOutcome {
        thetas: BTreeMap::new(),
        probes: BTreeMap::new(),
        warnings: Vec::new(),
    };

    for level in desc {
        // Threshold grid in hundredths of a percent.
        let mut lo: u32 = 0;
        let mut hi: u32 = 10_000;
        let mut accepted: Option<u32> = None;
        let mut last_mid: u32 = 0;
        let mut probes = 0u32;
        for i in 1..=14u32 {
            let mid = (lo + hi) / 2;
            last_mid = mid;
            let theta = f64::from(mid) / 100.0;
            let seed = mix_seed(master_seed, &[u64::from(level.centi()), u64::from(i)]);
            let size = probe.probe(level, theta, &working, seed).len() as f64;
            probes = i;
            if size > upper {
                lo = mid;
            } else if size < lower {
                hi = mid;
            } else {
                accepted = Some(mid);
                break;
            }
        }
        let chosen_theta = f64::from(accepted.unwrap_or(last_mid)) / 100.0;
        if accepted.is_none() {
            if (working.len() as f64) < lower {
                out.warnings.push(format!(
                    "level {level}: corpus of {} cannot reach the lower band {lower:.1}; \
                     keeping best-effort threshold {chosen_theta}",
                    working.len()
                ));
            } else {
                out.warnings.push(format!(
                    "level {level}: size band not attained in 14 probes; \
                     keeping last midpoint {chosen_theta}"
                ));
            }
        }
        out.thetas.insert(level, chosen_theta);
        out.probes.insert(level, probes);

        // Acceptance run: consume the chosen tests before the next level.
        let seed = mix_seed(master_seed, &[u64::from(level.centi()), 1_000]);
        let chosen = probe.probe(level, chosen_theta, &working, seed);
        let chosen: BTreeSet<String> = chosen.into_iter().collect();
        working.retain(|id| !chosen.contains(id));
    }
    out
}

// --- full model training -----------------------------------------------------

/// Everything the trainer was configured with; recorded in the model file.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainParams {
    /// Working arm-set size `k`.
    pub arm_budget: usize,
    /// Check window `gamma`.
    pub check_window: u32,
    pub epsilon: f64,
    /// Training steps `n` per context.
    pub steps: u64,
    /// Tuning tolerance `f`.
    pub tolerance: f64,
    /// Promotion threshold per context level, in percent.
    pub thetas: BTreeMap<Level, f64>,
}

impl Default for TrainParams {
    /// The shipped defaults: k=100, γ=3, ε=0.2, n=10000, f=0.1 and the
    /// stock thresholds for the 55/60/65/70 contexts.
    fn default() -> Self {
        let mut thetas = BTreeMap::new();
        for (lvl, th) in [(55.0, 1.90), (60.0, 1.50), (65.0, 0.90), (70.0, 1.26)] {
            thetas.insert(Level::from_percent(lvl).unwrap(), th);
        }
        TrainParams {
            arm_budget: 100,
            check_window: 3,
            epsilon: 0.2,
            steps: 10_000,
            tolerance: 0.1,
            thetas,
        }
    }
}

/// The stock context levels.
pub fn default_levels() -> Vec<Level> {
    [55.0, 60.0, 65.0, 70.0]
        .iter()
        .map(|&p| Level::from_percent(p).unwrap())
        .collect()
}

/// The trained artifact: one vulnerability list plus one coverage list per
/// context level.
#[derive(Clone, Debug, PartialEq)]
pub struct TestListModel {
    pub params: TrainParams,
    /// Context levels, highest first.
    pub contexts: Vec<Level>,
    pub vulnerability_list: TrainedList,
    pub coverage_lists: BTreeMap<Level, TrainedList>,
}

/// A per-step training record, one row of the training log.
#[derive(Clone, Debug)]
pub struct TrainRecord {
    pub step: u64,
    pub context: Level,
    pub arm: String,
    pub reward: f64,
    pub action: StepAction,
}

/// Collects [`TrainRecord`]s across all per-context training runs.
#[derive(Default)]
pub struct TrainLog {
    pub records: Vec<TrainRecord>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,context,arm,reward,action\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{}",
                r.step,
                r.context,
                r.arm,
                r.reward,
                r.action.as_str()
            );
        }
        out
    }
}

struct ContextLogger<'a> {
    level: Level,
    log: &'a mut TrainLog,
}

impl TrainObserver for ContextLogger<'_> {
    fn on_event(&mut self, event: &StepEvent) {
        self.log.records.push(TrainRecord {
            step: event.step,
            context: self.level,
            arm: event.arm.clone(),
            reward: event.reward,
            action: event.action,
        });
    }
}

/// Trains the full model from an already-minimized coverage corpus plus the
/// (never-minimized) vulnerability tests.
///
/// Coverage lists train highest level first; tests promoted into a list are
/// withheld from lower levels, so lists stay disjoint. A test eliminated at
/// one level stays available below it — ineffectiveness is judged per
/// context. The vulnerability list is trained by the plain loop over all
/// vulnerability tests, rewarded at the lowest configured level (a campaign
/// consumes it first, when coverage is lowest).
pub fn train_model(
    coverage_corpus: &[String],
    vuln_tests: &[String],
    levels: &[Level],
    params: &TrainParams,
    table: &RewardTable,
    rng: &mut ChaCha8Rng,
    mut log: Option<&mut TrainLog>,
) -> Result<TestListModel> {
    if levels.is_empty() {
        return Err(Error::structural("no context levels configured"));
    }
    let mut desc: Vec<Level> = levels.to_vec();
    desc.sort();
    desc.reverse();
    let lowest = *desc.last().expect("nonempty");

    let cfg = BanditConfig {
        arm_budget: params.arm_budget,
        check_window: params.check_window,
        epsilon: params.epsilon,
        steps: params.steps,
    };

    let mut working: Vec<String> = coverage_corpus.to_vec();
    working.sort();
    let mut coverage_lists = BTreeMap::new();
    for &level in &desc {
        let theta = *params.thetas.get(&level).ok_or_else(|| {
            Error::structural(format!("no promotion threshold for level {level}"))
        })?;
        let mut env = table.env_at(level);
        let outcome = match log.as_deref_mut() {
            Some(l) => {
                let mut obs = ContextLogger { level, log: l };
                train_adaptive(&working, &mut env, &cfg, level, theta, rng, &mut obs)
            }
            None => train_adaptive(
                &working,
                &mut env,
                &cfg,
                level,
                theta,
                rng,
                &mut NullObserver,
            ),
        };
        outcome.list.validate(1e-9)?;
        let chosen: BTreeSet<&String> = outcome.list.entries.iter().map(|(id, _)| id).collect();
        working.retain(|id| !chosen.contains(id));
        coverage_lists.insert(level, outcome.list);
    }

    let vulnerability_list = if vuln_tests.is_empty() {
        TrainedList::empty(lowest, ListKind::Vulnerability)
    } else {
        let vuln_cfg = BanditConfig {
            arm_budget: vuln_tests.len(),
            ..cfg
        };
        let mut env = table.env_at(lowest);
        let outcome = match log.as_deref_mut() {
            Some(l) => {
                let mut obs = ContextLogger {
                    level: lowest,
                    log: l,
                };
                train_plain(
                    vuln_tests,
                    &mut env,
                    &vuln_cfg,
                    lowest,
                    ListKind::Vulnerability,
                    rng,
                    &mut obs,
                )
            }
            None => train_plain(
                vuln_tests,
                &mut env,
                &vuln_cfg,
                lowest,
                ListKind::Vulnerability,
                rng,
                &mut NullObserver,
            ),
        };
        outcome.list.validate(1e-9)?;
        outcome.list
    };

    let model = TestListModel {
        params: params.clone(),
        contexts: desc,
        vulnerability_list,
        coverage_lists,
    };
    check_disjoint(&model)?;
    Ok(model)
}

fn check_disjoint(model: &TestListModel) -> Result<()> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for list in model.coverage_lists.values() {
        for (id, _) in &list.entries {
            if !seen.insert(id) {
                return Err(Error::structural(format!(
                    "test {id:?} appears in two coverage lists"
                )));
            }
        }
    }
    Ok(())
}

// --- model file --------------------------------------------------------------

pub const MODEL_SCHEMA_VERSION: u64 = 1;

fn entries_to_json(list: &TrainedList) -> Value {
    Value::Array(
        list.entries
            .iter()
            .map(|(id, p)| json!({"test_id": id, "prob": p}))
            .collect(),
    )
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes a model to its canonical JSON text. Context blocks appear in
/// descending level order; the checksum covers everything below it.
pub fn model_to_json(model: &TestListModel) -> String {
    let mut theta = Map::new();
    let mut lists = Map::new();
    for level in &model.contexts {
        if let Some(t) = model.params.thetas.get(level) {
            theta.insert(level.to_string(), json!(t));
        }
        if let Some(l) = model.coverage_lists.get(level) {
            lists.insert(level.to_string(), entries_to_json(l));
        }
    }
    let mut payload = Map::new();
    payload.insert("schema_version".into(), json!(MODEL_SCHEMA_VERSION));
    payload.insert(
        "params".into(),
        json!({
            "k": model.params.arm_budget,
            "gamma": model.params.check_window,
            "epsilon": model.params.epsilon,
            "n": model.params.steps,
            "f": model.params.tolerance,
            "theta": Value::Object(theta),
        }),
    );
    payload.insert(
        "contexts".into(),
        serde_json::to_value(&model.contexts).expect("levels serialize"),
    );
    payload.insert(
        "vulnerability_list".into(),
        entries_to_json(&model.vulnerability_list),
    );
    payload.insert("coverage_lists".into(), Value::Object(lists));

    let checksum = sha256_hex(
        serde_json::to_string(&Value::Object(payload.clone()))
            .expect("payload serializes")
            .as_bytes(),
    );

    let mut file = Map::new();
    file.insert("checksum".into(), json!(checksum));
    for (k, v) in payload {
        file.insert(k, v);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(file)).expect("file serializes");
    text.push('\n');
    text
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFileTyped {
    schema_version: u64,
    params: ParamsTyped,
    contexts: Vec<Level>,
    vulnerability_list: Vec<EntryTyped>,
    coverage_lists: BTreeMap<String, Vec<EntryTyped>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsTyped {
    k: usize,
    gamma: u32,
    epsilon: f64,
    n: u64,
    f: f64,
    theta: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryTyped {
    test_id: String,
    prob: f64,
}

/// Probability mass tolerance applied when loading a model.
pub const LOAD_MASS_TOLERANCE: f64 = 1e-6;

/// Parses and validates a model file: schema version, checksum, probability
/// mass, and context/list consistency.
pub fn model_from_json(text: &str) -> Result<TestListModel> {
    let mut value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::model("top level must be an object"))?;
    let checksum = obj
        .shift_remove("checksum")
        .and_then(|v| v.as_str().map(str::to_owned))
        .ok_or_else(|| Error::model("missing checksum"))?;
    let payload_text = serde_json::to_string(&value).expect("value serializes");
    if sha256_hex(payload_text.as_bytes()) != checksum {
        return Err(Error::model("checksum failure"));
    }

    let typed: ModelFileTyped =
        serde_json::from_value(value).map_err(|e| Error::model(format!("bad shape: {e}")))?;
    if typed.schema_version != MODEL_SCHEMA_VERSION {
        return Err(Error::model(format!(
            "schema version {} unsupported (expected {MODEL_SCHEMA_VERSION})",
            typed.schema_version
        )));
    }

    let contexts = typed.contexts.clone();
    let mut sorted = contexts.clone();
    sorted.sort();
    sorted.reverse();
    if contexts != sorted {
        return Err(Error::model("contexts must be in descending order"));
    }

    let mut thetas = BTreeMap::new();
    for (key, theta) in &typed.params.theta {
        let level: Level = key
            .parse()
            .map_err(|_| Error::model(format!("theta key {key:?} is not a level")))?;
        thetas.insert(level, *theta);
    }

    let mut coverage_lists = BTreeMap::new();
    for (key, entries) in &typed.coverage_lists {
        let level: Level = key
            .parse()
            .map_err(|_| Error::model(format!("coverage list key {key:?} is not a level")))?;
        if !contexts.contains(&level) {
            return Err(Error::model(format!(
                "coverage list for {level} has no matching context"
            )));
        }
        let list = TrainedList {
            context: level,
            kind: ListKind::Coverage,
            entries: entries
                .iter()
                .map(|e| (e.test_id.clone(), e.prob))
                .collect(),
        };
        list.validate(LOAD_MASS_TOLERANCE)
            .map_err(|e| Error::model(e.to_string()))?;
        coverage_lists.insert(level, list);
    }
    for level in &contexts {
        if !coverage_lists.contains_key(level) {
            return Err(Error::model(format!(
                "context {level} has no coverage list"
            )));
        }
    }

    let lowest = *contexts.last().ok_or_else(|| Error::model("no contexts"))?;
    let vulnerability_list = TrainedList {
        context: lowest,
        kind: ListKind::Vulnerability,
        entries: typed
            .vulnerability_list
            .iter()
            .map(|e| (e.test_id.clone(), e.prob))
            .collect(),
    };
    vulnerability_list
        .validate(LOAD_MASS_TOLERANCE)
        .map_err(|e| Error::model(e.to_string()))?;

    let model = TestListModel {
        params: TrainParams {
            arm_budget: typed.params.k,
            check_window: typed.params.gamma,
            epsilon: typed.params.epsilon,
            steps: typed.params.n,
            tolerance: typed.params.f,
            thetas,
        },
        contexts,
        vulnerability_list,
        coverage_lists,
    };
    check_disjoint(&model).map_err(|e| Error::model(e.to_string()))?;
    Ok(model)
}

pub fn save_model(model: &TestListModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TestListModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}
