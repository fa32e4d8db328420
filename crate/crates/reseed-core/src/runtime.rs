//! The campaign engine: drives a fuzzer from a trained model.
//!
//! A campaign runs two phases over a shared iteration budget. The
//! vulnerability phase samples from the vulnerability list until it empties;
//! the coverage phase dispatches on running total coverage into the matching
//! context list, skipping empty lists upward, and falls back to the fuzzer's
//! native seed generation once no list applies. Every selected test is
//! tracked over a `gamma`-iteration window of cumulative coverage increment;
//! a window that completes at zero drops the test for good.
//!
//! Each iteration performs exactly one execution: the first time a test is
//! selected, the test itself; on every later selection, a fresh mutant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitSet;
use crate::coverage::{coverage_percent, CoveredSet, Test};
use crate::error::{Error, Result};
use crate::level::Level;
use crate::trainer::TestListModel;

/// What the campaign engine needs from a fuzzer and its bound target.
///
/// `execute` must be deterministic per (test identity, target, seed);
/// `mutate` and `generate_native` may advance internal fuzzer state.
pub trait FuzzerPort {
    /// Derives a fresh mutant of `base`.
    fn mutate(&mut self, base: &Test) -> Test;
    /// The fuzzer's own seed generation.
    fn generate_native(&mut self) -> Test;
    /// Runs one test on the target and returns its hit vector.
    fn execute(&mut self, test: &Test) -> BitSet;
    /// Size of the target's coverage-point universe.
    fn universe_len(&self) -> usize;
}

/// Per-test window accumulator for the drop rule.
#[derive(Clone, Debug, Default)]
pub struct DropTracker {
    pub window_pulls: u32,
    pub window_reward: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DropDecision {
    Keep,
    Drop,
}

/// Applies one execution's coverage increment to a test's window.
///
/// Below `gamma` executions the window just accumulates. When it completes,
/// a zero cumulative increment drops the test; anything positive keeps it
/// and resets both counters for the next window.
pub fn drop_test(tracker: &mut DropTracker, increment: f64, gamma: u32) -> DropDecision {
    tracker.window_pulls += 1;
    tracker.window_reward += increment;
    if tracker.window_pulls >= gamma {
        if tracker.window_reward == 0.0 {
            return DropDecision::Drop;
        }
        tracker.window_pulls = 0;
        tracker.window_reward = 0.0;
    }
    DropDecision::Keep
}

/// Campaign phase; never regresses.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Phase {
    Vulnerability,
    Coverage,
    Native,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Vulnerability => "vulnerability",
            Phase::Coverage => "coverage",
            Phase::Native => "native",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What happened in one iteration.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IterAction {
    /// Executed a list test (or one of its mutants); window still open.
    Run,
    /// Window completed with coverage gain; counters reset.
    Reset,
    /// Window completed at zero; test dropped from its list.
    Drop,
    /// Native seed executed.
    Native,
}

impl IterAction {
    pub fn as_str(self) -> &'static str {
        match self {
            IterAction::Run => "run",
            IterAction::Reset => "reset",
            IterAction::Drop => "drop",
            IterAction::Native => "native",
        }
    }
}

/// One row of the campaign trace.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub iteration: u64,
    pub total_cov: f64,
    pub phase: Phase,
    pub test_id: String,
    pub action: IterAction,
}

/// Full per-iteration record of a campaign plus summary figures.
#[derive(Clone, Debug)]
pub struct CampaignReport {
    pub trace: Vec<TraceRow>,
    pub final_cov: f64,
    pub covered_points: usize,
    pub universe_len: usize,
}

impl CampaignReport {
    /// First iteration whose running total coverage reached `threshold`
    /// percent, if any.
    pub fn first_crossing(&self, threshold: f64) -> Option<u64> {
        self.trace
            .iter()
            .find(|r| r.total_cov >= threshold)
            .map(|r| r.iteration)
    }

    /// The (iteration, total_cov) trace used by strategy comparisons.
    pub fn coverage_trace(&self) -> Vec<(u64, f64)> {
        self.trace
            .iter()
            .map(|r| (r.iteration, r.total_cov))
            .collect()
    }
}

/// A mutable copy of a trained list during a campaign: probabilities
/// renormalize as tests drop, keeping relative ratios.
#[derive(Clone, Debug)]
struct ActiveList {
    entries: Vec<(String, f64)>,
}

impl ActiveList {
    fn new(entries: &[(String, f64)]) -> Self {
        ActiveList {
            entries: entries.to_vec(),
        }
    }

    fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> &str {
        debug_assert!(!self.entries.is_empty());
        let total: f64 = self.entries.iter().map(|(_, p)| p).sum();
        let mut draw = rng.random::<f64>() * total;
        for (id, p) in &self.entries {
            draw -= p;
            if draw <= 0.0 {
                return id;
            }
        }
        &self.entries.last().expect("nonempty").0
    }

    fn drop_id(&mut self, id: &str) {
        self.entries.retain(|(e, _)| e != id);
        let total: f64 = self.entries.iter().map(|(_, p)| p).sum();
        if total > 0.0 {
            for (_, p) in &mut self.entries {
                *p /= total;
            }
        }
    }
}

/// Which list the coverage phase should draw from, if any.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ListChoice {
    /// Index into the ascending level order.
    Index(usize),
    Native,
}

/// Context dispatch: the list of the smallest level above the current total
/// coverage; if that list is empty, the next nonempty higher one; native
/// when coverage is above every level or everything is empty.
pub fn select_cov_list(total_cov: f64, levels_asc: &[Level], list_sizes: &[usize]) -> ListChoice {
    debug_assert_eq!(levels_asc.len(), list_sizes.len());
    for (i, level) in levels_asc.iter().enumerate() {
        if total_cov < level.percent() {
            // Skip rule: advance past empty lists.
            for (j, &size) in list_sizes.iter().enumerate().skip(i) {
                if size > 0 {
                    return ListChoice::Index(j);
                }
            }
            return ListChoice::Native;
        }
    }
    ListChoice::Native
}

/// Campaign parameters.
#[derive(Clone, Copy, Debug)]
pub struct CampaignParams {
    /// Check window for the drop rule.
    pub check_window: u32,
    /// Maximum iterations `m` shared by both phases.
    pub budget: u64,
    /// Seed for list sampling.
    pub seed: u64,
}

struct Campaign<'a, P: FuzzerPort> {
    port: &'a mut P,
    corpus: &'a BTreeMap<String, Test>,
    params: CampaignParams,
    rng: ChaCha8Rng,
    covered: CoveredSet,
    trackers: BTreeMap<String, DropTracker>,
    executed_once: BTreeSet<String>,
    iteration: u64,
    trace: Vec<TraceRow>,
}

impl<P: FuzzerPort> Campaign<'_, P> {
    fn total_cov(&self) -> f64 {
        coverage_percent(self.covered.count(), self.covered.universe_len())
    }

    /// One list-driven iteration: sample, execute test-or-mutant, merge,
    /// apply the drop rule.
    fn run_list_iteration(&mut self, list: &mut ActiveList, phase: Phase) -> Result<()> {
        self.iteration += 1;
        let id = list.sample(&mut self.rng).to_owned();
        let base = self
            .corpus
            .get(&id)
            .ok_or_else(|| Error::structural(format!("list test {id:?} not in corpus")))?;
        let row = if self.executed_once.insert(id.clone()) {
            self.port.execute(base)
        } else {
            let mutant = self.port.mutate(base);
            self.port.execute(&mutant)
        };
        let increment = crate::coverage::incremental_coverage(&row, &self.covered)?;
        self.covered.merge_row(&row)?;

        let tracker = self.trackers.entry(id.clone()).or_default();
        let action = match drop_test(tracker, increment, self.params.check_window) {
            DropDecision::Drop => {
                list.drop_id(&id);
                IterAction::Drop
            }
            DropDecision::Keep => {
                if tracker.window_pulls == 0 {
                    IterAction::Reset
                } else {
                    IterAction::Run
                }
            }
        };
        self.trace.push(TraceRow {
            iteration: self.iteration,
            total_cov: self.total_cov(),
            phase,
            test_id: id,
            action,
        });
        Ok(())
    }

    fn run_native_iteration(&mut self) -> Result<()> {
        self.iteration += 1;
        let test = self.port.generate_native();
        let row = self.port.execute(&test);
        self.covered.merge_row(&row)?;
        self.trace.push(TraceRow {
            iteration: self.iteration,
            total_cov: self.total_cov(),
            phase: Phase::Native,
            test_id: test.id,
            action: IterAction::Native,
        });
        Ok(())
    }
}

/// Runs a full campaign: vulnerability phase, then coverage phase with
/// native fallback, over a shared budget of `params.budget` iterations.
///
/// `corpus` must contain every test named by the model's lists.
pub fn run_campaign<P: FuzzerPort>(
    model: &TestListModel,
    corpus: &BTreeMap<String, Test>,
    port: &mut P,
    params: &CampaignParams,
) -> Result<CampaignReport> {
    let universe_len = port.universe_len();
    let mut c = Campaign {
        port,
        corpus,
        params: *params,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        covered: CoveredSet::empty(universe_len),
        trackers: BTreeMap::new(),
        executed_once: BTreeSet::new(),
        iteration: 0,
        trace: Vec::new(),
    };

    // Vulnerability phase: run until the list empties (or budget runs out).
    let mut vuln = ActiveList::new(&model.vulnerability_list.entries);
    while !vuln.is_empty() && c.iteration < params.budget {
        c.run_list_iteration(&mut vuln, Phase::Vulnerability)?;
    }

    // Coverage phase: context dispatch per iteration.
    let levels_asc: Vec<Level> = {
        let mut l = model.contexts.clone();
        l.sort();
        l
    };
    let mut lists: Vec<ActiveList> = levels_asc
        .iter()
        .map(|lvl| ActiveList::new(&model.coverage_lists[lvl].entries))
        .collect();
    while c.iteration < params.budget {
        let sizes: Vec<usize> = lists.iter().map(|l| l.entries.len()).collect();
        match select_cov_list(c.total_cov(), &levels_asc, &sizes) {
            ListChoice::Index(i) => {
                let mut list = std::mem::replace(&mut lists[i], ActiveList { entries: vec![] });
                let r = c.run_list_iteration(&mut list, Phase::Coverage);
                lists[i] = list;
                r?;
            }
            ListChoice::Native => c.run_native_iteration()?,
        }
    }

    Ok(CampaignReport {
        final_cov: c.total_cov(),
        covered_points: c.covered.count(),
        universe_len,
        trace: c.trace,
    })
}

/// The bare fuzzer: native generation only, same trace schema. A campaign
/// whose lists are all empty behaves identically to this.
pub fn run_native<P: FuzzerPort>(port: &mut P, budget: u64) -> Result<CampaignReport> {
    let universe_len = port.universe_len();
    let mut covered = CoveredSet::empty(universe_len);
    let mut trace = Vec::new();
    for iteration in 1..=budget {
        let test = port.generate_native();
        let row = port.execute(&test);
        covered.merge_row(&row)?;
        trace.push(TraceRow {
            iteration,
            total_cov: coverage_percent(covered.count(), universe_len),
            phase: Phase::Native,
            test_id: test.id,
            action: IterAction::Native,
        });
    }
    Ok(CampaignReport {
        final_cov: coverage_percent(covered.count(), universe_len),
        covered_points: covered.count(),
        universe_len,
        trace,
    })
}

/// Renders a campaign trace as CSV.
pub fn trace_to_csv(report: &CampaignReport) -> String {
    let mut out = String::from("iteration,tot_cov,phase,test_id,action\n");
    for r in &report.trace {
        out.push_str(&format!(
            "{},{:.4},{},{},{}\n",
            r.iteration,
            r.total_cov,
            r.phase.as_str(),
            r.test_id,
            r.action.as_str()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{ListKind, TrainedList};
    use crate::coverage::TestKind;
    use crate::trainer::TrainParams;

    fn lvl(p: f64) -> Level {
        Level::from_percent(p).unwrap()
    }

    #[test]
    fn drop_rule_zero_window_drops() {
        let mut t = DropTracker::default();
        assert_eq!(drop_test(&mut t, 0.0, 3), DropDecision::Keep);
        assert_eq!(drop_test(&mut t, 0.0, 3), DropDecision::Keep);
        assert_eq!(drop_test(&mut t, 0.0, 3), DropDecision::Drop);
    }

    #[test]
    fn drop_rule_positive_window_resets() {
        let mut t = DropTracker::default();
        assert_eq!(drop_test(&mut t, 0.0, 3), DropDecision::Keep);
        assert_eq!(drop_test(&mut t, 0.0, 3), DropDecision::Keep);
        assert_eq!(drop_test(&mut t, 0.5, 3), DropDecision::Keep);
        assert_eq!(t.window_pulls, 0);
        assert_eq!(t.window_reward, 0.0);
    }

    #[test]
    fn drop_rule_gamma_one_drops_immediately() {
        let mut t = DropTracker::default();
        assert_eq!(drop_test(&mut t, 0.0, 1), DropDecision::Drop);
    }

    #[test]
    fn drop_iff_complete_window_sums_zero() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let gamma = rng.random_range(1..=5u32);
            let len = rng.random_range(1..=20usize);
            let incs: Vec<f64> = (0..len)
                .map(|_| {
                    if rng.random_range(0..3) == 0 {
                        rng.random_range(0.01..2.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut t = DropTracker::default();
            let mut window: Vec<f64> = Vec::new();
            for (i, &inc) in incs.iter().enumerate() {
                window.push(inc);
                let decision = drop_test(&mut t, inc, gamma);
                if window.len() as u32 >= gamma {
                    let expect = if window.iter().sum::<f64>() == 0.0 {
                        DropDecision::Drop
                    } else {
                        DropDecision::Keep
                    };
                    assert_eq!(decision, expect, "gamma={gamma} incs={incs:?} at {i}");
                    if expect == DropDecision::Drop {
                        break;
                    }
                    window.clear();
                } else {
                    assert_eq!(decision, DropDecision::Keep);
                }
            }
        }
    }

    #[test]
    fn dispatch_examples() {
        let levels: Vec<Level> = [55.0, 60.0, 65.0, 70.0].iter().map(|&p| lvl(p)).collect();
        let sizes = [3, 3, 3, 3];
        assert_eq!(select_cov_list(57.0, &levels, &sizes), ListChoice::Index(1));
        // Skip rule: 60-list empty, 65-list next.
        assert_eq!(
            select_cov_list(57.0, &levels, &[3, 0, 3, 3]),
            ListChoice::Index(2)
        );
        // Above every level: native even with nonempty lists.
        assert_eq!(select_cov_list(72.0, &levels, &sizes), ListChoice::Native);
        // All empty: native.
        assert_eq!(
            select_cov_list(30.0, &levels, &[0, 0, 0, 0]),
            ListChoice::Native
        );
    }

    /// A tiny in-memory target for engine tests: every test id maps to a
    /// fixed row; mutants and native seeds take rows from preloaded
    /// sequences. Deterministic by construction.
    struct TableFuzzer {
        universe: usize,
        rows: BTreeMap<String, BitSet>,
        mutant_rows: BTreeMap<String, Vec<BitSet>>,
        mutant_next: BTreeMap<String, usize>,
        native_rows: Vec<BitSet>,
        native_next: usize,
    }

    impl TableFuzzer {
        fn new(universe: usize) -> Self {
            TableFuzzer {
                universe,
                rows: BTreeMap::new(),
                mutant_rows: BTreeMap::new(),
                mutant_next: BTreeMap::new(),
                native_rows: Vec::new(),
                native_next: 0,
            }
        }
    }

    impl FuzzerPort for TableFuzzer {
        fn mutate(&mut self, base: &Test) -> Test {
            let n = self.mutant_next.entry(base.id.clone()).or_insert(0);
            *n += 1;
            Test {
                id: format!("{}#m{}", base.id, n),
                origin: base.origin.clone(),
                kind: base.kind,
                payload: base.payload.clone(),
            }
        }

        fn generate_native(&mut self) -> Test {
            let i = self.native_next;
            self.native_next += 1;
            Test {
                id: format!("native-{i}"),
                origin: "target".into(),
                kind: TestKind::Coverage,
                payload: vec![],
            }
        }

        fn execute(&mut self, test: &Test) -> BitSet {
            if let Some((base, m)) = test.id.split_once("#m") {
                let idx: usize = m.parse().unwrap();
                return self.mutant_rows[base]
                    .get(idx - 1)
                    .cloned()
                    .unwrap_or_else(|| BitSet::new(self.universe));
            }
            if let Some(i) = test.id.strip_prefix("native-") {
                let idx: usize = i.parse().unwrap();
                return self
                    .native_rows
                    .get(idx)
                    .cloned()
                    .unwrap_or_else(|| BitSet::new(self.universe));
            }
            self.rows
                .get(&test.id)
                .cloned()
                .unwrap_or_else(|| BitSet::new(self.universe))
        }

        fn universe_len(&self) -> usize {
            self.universe
        }
    }

    fn test_of(id: &str, kind: TestKind) -> Test {
        Test {
            id: id.into(),
            origin: "p0".into(),
            kind,
            payload: vec![1, 2, 3],
        }
    }

    fn singleton_model(vuln: &[(&str, f64)], cov: &[(Level, Vec<(&str, f64)>)]) -> TestListModel {
        let mut contexts: Vec<Level> = cov.iter().map(|(l, _)| *l).collect();
        if contexts.is_empty() {
            contexts = vec![lvl(60.0)];
        }
        contexts.sort();
        contexts.reverse();
        let mut coverage_lists = BTreeMap::new();
        for level in &contexts {
            coverage_lists.insert(
                *level,
                TrainedList {
                    context: *level,
                    kind: ListKind::Coverage,
                    entries: cov
                        .iter()
                        .find(|(l, _)| l == level)
                        .map(|(_, es)| es.iter().map(|(id, p)| (id.to_string(), *p)).collect())
                        .unwrap_or_default(),
                },
            );
        }
        TestListModel {
            params: TrainParams::default(),
            contexts: contexts.clone(),
            vulnerability_list: TrainedList {
                context: *contexts.last().unwrap(),
                kind: ListKind::Vulnerability,
                entries: vuln.iter().map(|(id, p)| (id.to_string(), *p)).collect(),
            },
            coverage_lists,
        }
    }

    #[test]
    fn trivial_target_covers_fully_within_gamma() {
        let mut fz = TableFuzzer::new(1);
        fz.rows.insert("t".into(), BitSet::from_indices(1, [0]));
        let model = singleton_model(&[], &[(lvl(60.0), vec![("t", 1.0)])]);
        let corpus = BTreeMap::from([("t".to_string(), test_of("t", TestKind::Coverage))]);
        let report = run_campaign(
            &model,
            &corpus,
            &mut fz,
            &CampaignParams {
                check_window: 3,
                budget: 10,
                seed: 1,
            },
        )
        .unwrap();
        let crossing = report.first_crossing(100.0).unwrap();
        assert!(crossing <= 3);
        assert_eq!(report.final_cov, 100.0);
    }

    #[test]
    fn empty_vuln_list_transitions_immediately() {
        let mut fz = TableFuzzer::new(4);
        fz.native_rows = (0..6).map(|i| BitSet::from_indices(4, [i % 4])).collect();
        let model = singleton_model(&[], &[(lvl(60.0), vec![])]);
        let corpus = BTreeMap::new();
        let report = run_campaign(
            &model,
            &corpus,
            &mut fz,
            &CampaignParams {
                check_window: 3,
                budget: 5,
                seed: 1,
            },
        )
        .unwrap();
        assert!(report.trace.iter().all(|r| r.phase != Phase::Vulnerability));
    }

    #[test]
    fn already_covered_vuln_test_drops_after_gamma() {
        // The single vuln test's coverage never adds anything; after gamma
        // executions its window completes at zero and it drops.
        let mut fz = TableFuzzer::new(4);
        fz.rows.insert("v".into(), BitSet::new(4)); // hits nothing
        fz.mutant_rows.insert("v".into(), vec![BitSet::new(4); 10]);
        let model = singleton_model(&[("v", 1.0)], &[(lvl(60.0), vec![])]);
        let corpus = BTreeMap::from([("v".to_string(), test_of("v", TestKind::Vulnerability))]);
        let report = run_campaign(
            &model,
            &corpus,
            &mut fz,
            &CampaignParams {
                check_window: 3,
                budget: 20,
                seed: 1,
            },
        )
        .unwrap();
        let vuln_rows: Vec<&TraceRow> = report
            .trace
            .iter()
            .filter(|r| r.phase == Phase::Vulnerability)
            .collect();
        assert_eq!(vuln_rows.len(), 3);
        assert_eq!(vuln_rows.last().unwrap().action, IterAction::Drop);
    }

    #[test]
    fn zero_budget_leaves_state_unchanged() {
        let mut fz = TableFuzzer::new(4);
        let model = singleton_model(&[("v", 1.0)], &[(lvl(60.0), vec![("c", 1.0)])]);
        let corpus = BTreeMap::from([
            ("v".to_string(), test_of("v", TestKind::Vulnerability)),
            ("c".to_string(), test_of("c", TestKind::Coverage)),
        ]);
        let report = run_campaign(
            &model,
            &corpus,
            &mut fz,
            &CampaignParams {
                check_window: 3,
                budget: 0,
                seed: 1,
            },
        )
        .unwrap();
        assert!(report.trace.is_empty());
        assert_eq!(report.final_cov, 0.0);
    }

    #[test]
    fn all_lists_empty_runs_native_every_iteration() {
        let mut fz = TableFuzzer::new(8);
        fz.native_rows = (0..10).map(|i| BitSet::from_indices(8, [i % 8])).collect();
        let model = singleton_model(&[], &[(lvl(60.0), vec![])]);
        let report = run_campaign(
            &model,
            &BTreeMap::new(),
            &mut fz,
            &CampaignParams {
                check_window: 3,
                budget: 10,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(report.trace.len(), 10);
        assert!(report.trace.iter().all(|r| r.action == IterAction::Native));
    }

    #[test]
    fn pass_through_matches_bare_fuzzer() {
        let build = || {
            let mut fz = TableFuzzer::new(16);
            fz.native_rows = (0..20)
                .map(|i| BitSet::from_indices(16, [(i * 3) % 16, (i * 5) % 16]))
                .collect();
            fz
        };
        let model = singleton_model(&[], &[(lvl(60.0), vec![])]);
        let campaign = run_campaign(
            &model,
            &BTreeMap::new(),
            &mut build(),
            &CampaignParams {
                check_window: 3,
                budget: 15,
                seed: 42,
            },
        )
        .unwrap();
        let bare = run_native(&mut build(), 15).unwrap();
        assert_eq!(trace_to_csv(&campaign), trace_to_csv(&bare));
    }

    #[test]
    fn fixed_seed_reproduces_report_exactly() {
        let build = || {
            let mut fz = TableFuzzer::new(16);
            for i in 0..4 {
                fz.rows
                    .insert(format!("t{i}"), BitSet::from_indices(16, [i, i + 4, i + 8]));
                fz.mutant_rows.insert(
                    format!("t{i}"),
                    (0..20)
                        .map(|j| BitSet::from_indices(16, [(i + j) % 16]))
                        .collect(),
                );
            }
            fz.native_rows = (0..40).map(|i| BitSet::from_indices(16, [i % 16])).collect();
            fz
        };
        let model = singleton_model(
            &[],
            &[(
                lvl(60.0),
                vec![("t0", 0.25), ("t1", 0.25), ("t2", 0.25), ("t3", 0.25)],
            )],
        );
        let corpus: BTreeMap<String, Test> = (0..4)
            .map(|i| {
                (
                    format!("t{i}"),
                    test_of(&format!("t{i}"), TestKind::Coverage),
                )
            })
            .collect();
        let params = CampaignParams {
            check_window: 3,
            budget: 30,
            seed: 7,
        };
        let a = run_campaign(&model, &corpus, &mut build(), &params).unwrap();
        let b = run_campaign(&model, &corpus, &mut build(), &params).unwrap();
        assert_eq!(trace_to_csv(&a), trace_to_csv(&b));
    }

    #[test]
    fn coverage_is_monotone_and_phases_never_regress() {
        let mut fz = TableFuzzer::new(32);
        for i in 0..4 {
            fz.rows
                .insert(format!("t{i}"), BitSet::from_indices(32, [i * 2]));
            fz.mutant_rows.insert(
                format!("t{i}"),
                (0..30)
                    .map(|j| BitSet::from_indices(32, [(i * 2 + j) % 32]))
                    .collect(),
            );
        }
        fz.rows.insert("v0".into(), BitSet::from_indices(32, [31]));
        fz.mutant_rows
            .insert("v0".into(), vec![BitSet::new(32); 30]);
        fz.native_rows = (0..60).map(|i| BitSet::from_indices(32, [i % 32])).collect();

        let model = singleton_model(
            &[("v0", 1.0)],
            &[
                (lvl(20.0), vec![("t0", 0.5), ("t1", 0.5)]),
                (lvl(40.0), vec![("t2", 0.5), ("t3", 0.5)]),
            ],
        );
        let corpus: BTreeMap<String, Test> = ["t0", "t1", "t2", "t3", "v0"]
            .iter()
            .map(|id| ((*id).to_string(), test_of(id, TestKind::Coverage)))
            .collect();
        let report = run_campaign(
            &model,
            &corpus,
            &mut fz,
            &CampaignParams {
                check_window: 2,
                budget: 50,
                seed: 3,
            },
        )
        .unwrap();
        let mut last_cov = 0.0;
        let mut last_phase = Phase::Vulnerability;
        for row in &report.trace {
            assert!(row.total_cov >= last_cov, "coverage regressed");
            assert!(row.phase >= last_phase, "phase regressed");
            last_cov = row.total_cov;
            last_phase = row.phase;
        }
    }

    #[test]
    fn dropped_tests_are_never_reselected() {
        let mut fz = TableFuzzer::new(8);
        fz.rows.insert("a".into(), BitSet::new(8));
        fz.rows.insert("b".into(), BitSet::from_indices(8, [0]));
        fz.mutant_rows.insert("a".into(), vec![BitSet::new(8); 50]);
        fz.mutant_rows.insert("b".into(), vec![BitSet::new(8); 50]);
        fz.native_rows = (0..60).map(|i| BitSet::from_indices(8, [i % 8])).collect();
        let model = singleton_model(&[], &[(lvl(90.0), vec![("a", 0.5), ("b", 0.5)])]);
        let corpus: BTreeMap<String, Test> = ["a", "b"]
            .iter()
            .map(|id| ((*id).to_string(), test_of(id, TestKind::Coverage)))
            .collect();
        let report = run_campaign(
            &model,
            &corpus,
            &mut fz,
            &CampaignParams {
                check_window: 2,
                budget: 40,
                seed: 5,
            },
        )
        .unwrap();
        let mut dropped: BTreeSet<&str> = BTreeSet::new();
        for row in &report.trace {
            if row.action == IterAction::Drop {
                dropped.insert(&row.test_id);
            } else if row.action != IterAction::Native {
                assert!(
                    !dropped.contains(row.test_id.as_str()),
                    "{} reselected after drop",
                    row.test_id
                );
            }
        }
        assert!(!dropped.is_empty());
    }
}
