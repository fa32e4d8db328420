//! Corpus distillation: select the smallest subset of tests whose union
//! coverage equals the union coverage of the whole corpus.
//!
//! Two solvers share the contract:
//!
//! * [`minimize_exact`] — branch-and-bound over the set-cover formulation.
//!   The incumbent starts from the greedy solution; the lower bound is the
//!   larger of the remaining-points/max-gain quotient and forced picks from
//!   uniquely-covered points. On time-budget exhaustion the best incumbent
//!   so far is returned, flagged as a fallback.
//! * [`minimize_greedy`] — classic max-marginal-gain set cover, so
//!   `|selected| <= exact * (1 + ln universe)`.
//!
//! Points hit by no test impose no constraint. Points hit by every test are
//! satisfied by any nonempty selection; they stay in the formulation as
//! ordinary (easy) constraints, which also handles the corner case where
//! they are the only coverage. Rows hitting zero points are never selected
//! and are reported in the result diagnostics.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::bits::BitSet;
use crate::coverage::CoverageMatrix;
use crate::error::{Error, Result};

/// How a selection was obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveMethod {
    Exact,
    Greedy,
    /// The exact solver ran out of budget and returned its best incumbent.
    GreedyFallback,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::Exact => "exact",
            SolveMethod::Greedy => "greedy",
            SolveMethod::GreedyFallback => "greedy-fallback",
        }
    }
}

/// Result of a minimization run. `selected` always covers the same union as
/// the full corpus.
#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub selected: BTreeSet<String>,
    pub objective: usize,
    pub method: SolveMethod,
    pub elapsed: Duration,
    /// Tests whose rows hit zero points; never selected.
    pub empty_rows: Vec<String>,
}

/// Working form: rows sorted by id, deduplicated, over live columns only.
struct Instance {
    /// (test id, bits over live columns), sorted by test id.
    rows: Vec<(String, BitSet)>,
    /// Union of all live rows (the coverage target).
    target: BitSet,
    empty_rows: Vec<String>,
}

impl Instance {
    fn reduce(matrix: &CoverageMatrix) -> Instance {
        let mut empty_rows: Vec<String> = Vec::new();
        let mut rows: Vec<(String, &BitSet)> = Vec::new();
        for r in matrix.rows() {
            if r.bits.count_ones() == 0 {
                empty_rows.push(r.test_id.clone());
            } else {
                rows.push((r.test_id.clone(), &r.bits));
            }
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        empty_rows.sort();

        // Live columns: covered by at least one test.
        let mut union = BitSet::new(matrix.universe().len());
        for (_, bits) in &rows {
            union.union_with(bits);
        }
        let live: Vec<usize> = union.iter_ones().collect();
        let col_of: std::collections::HashMap<usize, usize> = live
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();

        let rows: Vec<(String, BitSet)> = rows
            .into_iter()
            .map(|(id, bits)| {
                let mut b = BitSet::new(live.len());
                for i in bits.iter_ones() {
                    b.set(col_of[&i]);
                }
                (id, b)
            })
            .collect();

        let mut target = BitSet::new(live.len());
        for (_, b) in &rows {
            target.union_with(b);
        }
        Instance {
            rows,
            target,
            empty_rows,
        }
    }
}

/// Greedy max-marginal-gain set cover. Deterministic: ties break on larger
/// gain first, then lexicographically smaller test id (guaranteed by the
/// sorted row order).
pub fn minimize_greedy(matrix: &CoverageMatrix) -> MinimizeResult {
    let start = Instant::now();
    let inst = Instance::reduce(matrix);
    let picks = greedy_on(&inst.rows, &inst.target);
    let selected: BTreeSet<String> = picks.iter().map(|&i| inst.rows[i].0.clone()).collect();
    MinimizeResult {
        objective: selected.len(),
        selected,
        method: SolveMethod::Greedy,
        elapsed: start.elapsed(),
        empty_rows: inst.empty_rows,
    }
}

fn greedy_on(rows: &[(String, BitSet)], target: &BitSet) -> Vec<usize> {
    let mut covered = BitSet::new(target.len());
    let mut picks = Vec::new();
    let remaining = target.count_ones();
    let mut covered_count = 0;
    while covered_count < remaining {
        let mut best: Option<(usize, usize)> = None; // (gain, idx)
        for (i, (_, bits)) in rows.iter().enumerate() {
            let gain = bits.count_new_in(&covered);
            if gain > 0 && best.map_or(true, |(bg, _)| gain > bg) {
                best = Some((gain, i));
            }
        }
        let Some((_, idx)) = best else { break };
        covered.union_with(&rows[idx].1);
        covered_count = covered.count_ones();
        picks.push(idx);
    }
    picks
}

/// Exact minimum-cardinality cover via branch-and-bound.
///
/// Guaranteed optimal when it finishes within `time_budget`; otherwise the
/// best incumbent found so far is returned with
/// [`SolveMethod::GreedyFallback`].
pub fn minimize_exact(matrix: &CoverageMatrix, time_budget: Duration) -> MinimizeResult {
    let start = Instant::now();
    let inst = Instance::reduce(matrix);
    if inst.rows.is_empty() {
        return MinimizeResult {
            selected: BTreeSet::new(),
            objective: 0,
            method: SolveMethod::Exact,
            elapsed: start.elapsed(),
            empty_rows: inst.empty_rows,
        };
    }

    // Domination pre-pass: a row whose bits are a subset of another row's is
    // never needed in some optimum. Process in (popcount desc, id asc) order
    // so duplicates keep the lexicographically smallest id.
    let mut order: Vec<usize> = (0..inst.rows.len()).collect();
    order.sort_by(|&a, &b| {
        inst.rows[b]
            .1
            .count_ones()
            .cmp(&inst.rows[a].1.count_ones())
            .then_with(|| inst.rows[a].0.cmp(&inst.rows[b].0))
    });
    let mut kept: Vec<usize> = Vec::new();
    for &cand in &order {
        if !kept
            .iter()
            .any(|&k| inst.rows[cand].1.subset_of(&inst.rows[k].1))
        {
            kept.push(cand);
        }
    }
    kept.sort(); // back to id order
    let rows: Vec<(String, BitSet)> = kept.iter().map(|&i| inst.rows[i].clone()).collect();

    let greedy_picks = greedy_on(&rows, &inst.target);
    let mut solver = Solver {
        rows: &rows,
        deadline: start + time_budget,
        timed_out: false,
        best: greedy_picks.clone(),
        check_counter: 0,
    };
    let mut chosen = Vec::new();
    let uncovered = inst.target.clone();
    solver.search(&mut chosen, uncovered, &BitSet::new(rows.len()));

    let selected: BTreeSet<String> = solver.best.iter().map(|&i| rows[i].0.clone()).collect();
    MinimizeResult {
        objective: selected.len(),
        selected,
        method: if solver.timed_out {
            SolveMethod::GreedyFallback
        } else {
            SolveMethod::Exact
        },
        elapsed: start.elapsed(),
        empty_rows: inst.empty_rows,
    }
}

struct Solver<'a> {
    rows: &'a [(String, BitSet)],
    deadline: Instant,
    timed_out: bool,
    best: Vec<usize>,
    check_counter: u32,
}

impl Solver<'_> {
    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        // Clock checks are amortized; Instant::now is not free. The first
        // call always checks so a zero budget falls back immediately.
        self.check_counter += 1;
        if self.check_counter % 256 == 1 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        self.timed_out
    }

    fn search(&mut self, chosen: &mut Vec<usize>, uncovered: BitSet, excluded: &BitSet) {
        if self.out_of_time() {
            return;
        }
        let remaining = uncovered.count_ones();
        if remaining == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        // A completion needs at least one more pick; strict improvement only.
        if chosen.len() + 1 >= self.best.len() {
            return;
        }

        // Pick the uncovered point with the fewest allowed coverers; a
        // unique coverer is a forced move.
        let mut branch_coverers: Vec<usize> = Vec::new();
        for p in uncovered.iter_ones() {
            let mut coverers = Vec::new();
            for (i, (_, bits)) in self.rows.iter().enumerate() {
                if !excluded.get(i) && bits.get(p) {
                    coverers.push(i);
                }
            }
            if coverers.is_empty() {
                return; // point became uncoverable under exclusions
            }
            if branch_coverers.is_empty() || coverers.len() < branch_coverers.len() {
                branch_coverers = coverers;
                if branch_coverers.len() == 1 {
                    break;
                }
            }
        }

        // Lower bound: every further pick covers at most max_gain points.
        let max_gain = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| !excluded.get(*i))
            .map(|(_, (_, bits))| bits.count_and(&uncovered))
            .max()
            .unwrap_or(0);
        if max_gain == 0 {
            return;
        }
        if chosen.len() + remaining.div_ceil(max_gain) >= self.best.len() {
            return;
        }

        // Branch over the coverers, largest marginal gain first (ties by
        // index = test id order). Earlier coverers are excluded in later
        // branches so each cover is enumerated once.
        branch_coverers.sort_by(|&a, &b| {
            let ga = self.rows[a].1.count_and(&uncovered);
            let gb = self.rows[b].1.count_and(&uncovered);
            gb.cmp(&ga).then_with(|| a.cmp(&b))
        });
        let mut excluded = excluded.clone();
        for &r in &branch_coverers {
            if self.out_of_time() {
                return;
            }
            chosen.push(r);
            self.search(chosen, uncovered.and_not(&self.rows[r].1), &excluded);
            chosen.pop();
            excluded.set(r);
        }
    }
}

/// True iff the union of the selected rows equals the union of all rows.
/// Unknown test ids are structural errors.
pub fn verify_equivalence(matrix: &CoverageMatrix, selected: &BTreeSet<String>) -> Result<bool> {
    let known: BTreeSet<&str> = matrix.rows().iter().map(|r| r.test_id.as_str()).collect();
    for id in selected {
        if !known.contains(id.as_str()) {
            return Err(Error::structural(format!("unknown test id {id:?}")));
        }
    }
    let mut union = BitSet::new(matrix.universe().len());
    for r in matrix.rows() {
        if selected.contains(&r.test_id) {
            union.union_with(&r.bits);
        }
    }
    Ok(union == matrix.union_all())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{CoverageMatrix, CoverageRow, Universe};
    use std::sync::Arc;

    fn matrix_of(rows: &[(&str, &[usize])], npoints: usize) -> CoverageMatrix {
        let universe = Arc::new(Universe::from_points(
            (0..npoints).map(|i| crate::coverage::CoveragePointId::new("m", i as u32)),
        ));
        let rows = rows
            .iter()
            .map(|(id, pts)| CoverageRow {
                test_id: (*id).to_owned(),
                bits: BitSet::from_indices(npoints, pts.iter().copied()),
            })
            .collect();
        CoverageMatrix::from_bit_rows(universe, rows).unwrap()
    }

    /// Exhaustive-enumeration oracle: smallest coverage-equivalent subset.
    fn brute_force_min(matrix: &CoverageMatrix) -> usize {
        let n = matrix.rows().len();
        assert!(n <= 20, "oracle is exponential");
        let target = matrix.union_all();
        let mut best = usize::MAX;
        for mask in 0u32..(1 << n) {
            let mut union = BitSet::new(matrix.universe().len());
            for (i, r) in matrix.rows().iter().enumerate() {
                if mask & (1 << i) != 0 {
                    union.union_with(&r.bits);
                }
            }
            if union == target {
                best = best.min(mask.count_ones() as usize);
            }
        }
        best
    }

    const BUDGET: Duration = Duration::from_secs(10);

    #[test]
    fn exact_picks_dominating_test() {
        let m = matrix_of(&[("t1", &[0, 1]), ("t2", &[0]), ("t3", &[1])], 2);
        assert_eq!(brute_force_min(&m), 1);
        let r = minimize_exact(&m, BUDGET);
        assert_eq!(r.method, SolveMethod::Exact);
        assert_eq!(r.objective, 1);
        assert!(r.selected.contains("t1"));
        assert!(verify_equivalence(&m, &r.selected).unwrap());
    }

    #[test]
    fn exact_keeps_non_redundant_tests() {
        let m = matrix_of(&[("t1", &[0]), ("t2", &[1])], 2);
        let r = minimize_exact(&m, BUDGET);
        assert_eq!(r.objective, 2);
    }

    #[test]
    fn greedy_traces_by_hand() {
        // Gains: t1=2, t2=1, t3=1 -> picks t1, nothing left.
        let m = matrix_of(&[("t1", &[0, 1]), ("t2", &[0]), ("t3", &[1])], 2);
        let r = minimize_greedy(&m);
        assert_eq!(r.selected.iter().collect::<Vec<_>>(), vec!["t1"]);
        assert_eq!(r.method, SolveMethod::Greedy);
    }

    #[test]
    fn identical_rows_collapse_to_one() {
        let m = matrix_of(&[("b", &[0, 1]), ("a", &[0, 1]), ("c", &[0, 1])], 2);
        let g = minimize_greedy(&m);
        assert_eq!(g.objective, 1);
        let e = minimize_exact(&m, BUDGET);
        assert_eq!(e.objective, 1);
        // Deterministic tie-break: lexicographically smallest id.
        assert!(e.selected.contains("a"));
        assert!(g.selected.contains("a"));
    }

    #[test]
    fn empty_matrix_and_empty_rows() {
        let m = matrix_of(&[], 0);
        let r = minimize_exact(&m, BUDGET);
        assert_eq!(r.objective, 0);
        assert_eq!(r.method, SolveMethod::Exact);

        let m = matrix_of(&[("z", &[]), ("a", &[0])], 1);
        let r = minimize_exact(&m, BUDGET);
        assert_eq!(r.selected.iter().collect::<Vec<_>>(), vec!["a"]);
        assert_eq!(r.empty_rows, vec!["z"]);
        let g = minimize_greedy(&m);
        assert_eq!(g.empty_rows, vec!["z"]);
    }

    #[test]
    fn universally_hit_point_still_requires_one_test() {
        // Every test hits point 0; minimal equivalent selection is 1 test.
        let m = matrix_of(&[("a", &[0]), ("b", &[0]), ("c", &[0])], 1);
        let r = minimize_exact(&m, BUDGET);
        assert_eq!(r.objective, 1);
        assert!(verify_equivalence(&m, &r.selected).unwrap());
    }

    #[test]
    fn zero_budget_falls_back_to_greedy_incumbent() {
        let m = matrix_of(&[("t1", &[0, 1]), ("t2", &[1, 2]), ("t3", &[0, 2])], 3);
        let r = minimize_exact(&m, Duration::ZERO);
        assert_eq!(r.method, SolveMethod::GreedyFallback);
        assert!(verify_equivalence(&m, &r.selected).unwrap());
    }

    #[test]
    fn random_instances_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for case in 0..200 {
            let ntests = rng.random_range(1..=12);
            let npoints = rng.random_range(1..=20);
            let rows: Vec<(String, Vec<usize>)> = (0..ntests)
                .map(|i| {
                    let pts: Vec<usize> =
                        (0..npoints).filter(|_| rng.random_range(0..3) == 0).collect();
                    (format!("t{i:02}"), pts)
                })
                .collect();
            let refs: Vec<(&str, &[usize])> = rows
                .iter()
                .map(|(id, pts)| (id.as_str(), pts.as_slice()))
                .collect();
            let m = matrix_of(&refs, npoints);

            let oracle = brute_force_min(&m);
            let exact = minimize_exact(&m, BUDGET);
            assert_eq!(
                exact.objective, oracle,
                "case {case}: exact {} != oracle {oracle}",
                exact.objective
            );
            assert!(verify_equivalence(&m, &exact.selected).unwrap());

            let greedy = minimize_greedy(&m);
            assert!(greedy.objective >= exact.objective);
            assert!(verify_equivalence(&m, &greedy.selected).unwrap());
            if m.universe().len() > 0 && oracle > 0 {
                let bound = (1.0 + (m.universe().len() as f64).ln()) * oracle as f64;
                assert!(greedy.objective as f64 <= bound.ceil());
            }
        }
    }

    #[test]
    fn solvers_are_deterministic() {
        let m = matrix_of(
            &[("t1", &[0, 1, 2]), ("t2", &[2, 3]), ("t3", &[3, 4]), ("t4", &[0, 4])],
            5,
        );
        let a = minimize_exact(&m, BUDGET);
        let b = minimize_exact(&m, BUDGET);
        assert_eq!(a.selected, b.selected);
        let g1 = minimize_greedy(&m);
        let g2 = minimize_greedy(&m);
        assert_eq!(g1.selected, g2.selected);
    }

    #[test]
    fn verify_equivalence_cases() {
        let m = matrix_of(&[("t1", &[0]), ("t2", &[1])], 2);
        let all: BTreeSet<String> = ["t1", "t2"].iter().map(|s| s.to_string()).collect();
        assert!(verify_equivalence(&m, &all).unwrap());
        assert!(!verify_equivalence(&m, &BTreeSet::new()).unwrap());
        let unknown: BTreeSet<String> = ["nope".to_string()].into_iter().collect();
        assert!(verify_equivalence(&m, &unknown).is_err());
    }
}
