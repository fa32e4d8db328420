//! Coverage model: tests, coverage points, hit vectors, and the coverage
//! matrix, plus the RCDB text-database parser.
//!
//! # RCDB format
//!
//! One UTF-8, LF-terminated document per (test, processor) execution:
//!
//! ```text
//! # comment
//! module <dot.separated.hier.path>   opens a module scope
//! point <local_index> <0|1>          a point in the current module + hit flag
//! ```
//!
//! Column order within a document is file traversal order. When documents
//! are unified into a matrix, the combined universe is ordered canonically
//! by (hierarchy path, local index) — a depth-first walk of the module tree
//! with sorted siblings — so the column ordering is a pure function of the
//! hierarchy, independent of file arrival order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};

/// Identity of one coverage point: its module path plus a local index.
///
/// The derived ordering (path segments, then index) is the canonical
/// depth-first universe order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CoveragePointId {
    pub hier_path: Vec<String>,
    pub local_index: u32,
}

impl CoveragePointId {
    pub fn new(path: &str, local_index: u32) -> Self {
        CoveragePointId {
            hier_path: path.split('.').map(str::to_owned).collect(),
            local_index,
        }
    }

    pub fn path_string(&self) -> String {
        self.hier_path.join(".")
    }
}

impl fmt::Display for CoveragePointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.path_string(), self.local_index)
    }
}

/// Whether a test is kept for its bug-triggering payload or for the
/// coverage it reaches.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Vulnerability,
    Coverage,
}

/// One member of the reusable test corpus.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Test {
    pub id: String,
    /// Name of the processor whose campaign produced the test.
    pub origin: String,
    pub kind: TestKind,
    /// Opaque payload; stands in for the instruction-sequence binary.
    #[serde(with = "payload_hex")]
    pub payload: Vec<u8>,
}

mod payload_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.iter().map(|b| format!("{b:02x}")).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        if s.len() % 2 != 0 {
            return Err(serde::de::Error::custom("odd-length hex payload"));
        }
        (0..s.len() / 2)
            .map(|i| {
                u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                    .map_err(|_| serde::de::Error::custom("invalid hex payload"))
            })
            .collect()
    }
}

/// The ordered coverage-point universe shared by all rows of a matrix.
#[derive(Clone, Debug)]
pub struct Universe {
    points: Vec<CoveragePointId>,
    index: HashMap<CoveragePointId, usize>,
}

impl Universe {
    /// Builds a universe from a point set, sorting into canonical order.
    pub fn from_points(points: impl IntoIterator<Item = CoveragePointId>) -> Self {
        let set: BTreeSet<CoveragePointId> = points.into_iter().collect();
        let points: Vec<CoveragePointId> = set.into_iter().collect();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Universe { points, index }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CoveragePointId] {
        &self.points
    }

    pub fn position(&self, p: &CoveragePointId) -> Option<usize> {
        self.index.get(p).copied()
    }
}

/// One parsed RCDB document: points in file traversal order plus hit flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RawCoverageDoc {
    pub points: Vec<CoveragePointId>,
    pub hits: Vec<bool>,
}

impl RawCoverageDoc {
    pub fn hit_count(&self) -> usize {
        self.hits.iter().filter(|h| **h).count()
    }
}

/// Parses one RCDB document.
///
/// Unknown directives and malformed fields are rejected with the offending
/// line number; a point id repeated within the document is a structural
/// error. An empty document parses to an empty row over an empty universe.
pub fn parse_coverage_db(text: &str) -> Result<RawCoverageDoc> {
    let mut points = Vec::new();
    let mut hits = Vec::new();
    let mut seen: BTreeSet<CoveragePointId> = BTreeSet::new();
    let mut current_module: Option<String> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("module") => {
                let path = fields.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "module directive without a path".into(),
                })?;
                if fields.next().is_some() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "trailing fields after module path".into(),
                    });
                }
                if path.split('.').any(str::is_empty) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("empty segment in module path {path:?}"),
                    });
                }
                current_module = Some(path.to_owned());
            }
            Some("point") => {
                let module = current_module.as_deref().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "point before any module directive".into(),
                })?;
                let idx: u32 = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: lineno,
                        message: "point needs a non-negative local index".into(),
                    })?;
                let hit = match fields.next() {
                    Some("0") => false,
                    Some("1") => true,
                    _ => {
                        return Err(Error::Parse {
                            line: lineno,
                            message: "point hit flag must be 0 or 1".into(),
                        })
                    }
                };
                if fields.next().is_some() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "trailing fields after point entry".into(),
                    });
                }
                let id = CoveragePointId::new(module, idx);
                if !seen.insert(id.clone()) {
                    return Err(Error::structural(format!(
                        "duplicate coverage point {id} (line {lineno})"
                    )));
                }
                points.push(id);
                hits.push(hit);
            }
            Some(other) => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unknown directive {other:?}"),
                })
            }
            None => unreachable!("blank lines are skipped"),
        }
    }

    Ok(RawCoverageDoc { points, hits })
}

/// One test's hit vector over a matrix universe.
#[derive(Clone, Debug)]
pub struct CoverageRow {
    pub test_id: String,
    pub bits: BitSet,
}

/// The binary test×point matrix. Rows preserve ingestion order; the
/// universe is canonical.
#[derive(Clone, Debug)]
pub struct CoverageMatrix {
    universe: Arc<Universe>,
    rows: Vec<CoverageRow>,
}

impl CoverageMatrix {
    /// Unifies per-test documents into one matrix.
    ///
    /// Universes are unioned; a point absent from a document counts as
    /// unhit for that test. Duplicate test ids are rejected.
    pub fn build(docs: Vec<(String, RawCoverageDoc)>) -> Result<Self> {
        let universe = Universe::from_points(
            docs.iter()
                .flat_map(|(_, d)| d.points.iter().cloned())
                .collect::<Vec<_>>(),
        );
        let universe = Arc::new(universe);

        let mut ids = BTreeSet::new();
        let mut rows = Vec::with_capacity(docs.len());
        for (test_id, doc) in docs {
            if !ids.insert(test_id.clone()) {
                return Err(Error::structural(format!("duplicate test id {test_id:?}")));
            }
            let mut bits = BitSet::new(universe.len());
            for (p, hit) in doc.points.iter().zip(&doc.hits) {
                if *hit {
                    let pos = universe
                        .position(p)
                        .expect("unioned universe contains every document point");
                    bits.set(pos);
                }
            }
            rows.push(CoverageRow { test_id, bits });
        }
        Ok(CoverageMatrix { universe, rows })
    }

    /// Assembles a matrix from pre-built bit rows over a known universe.
    pub fn from_bit_rows(universe: Arc<Universe>, rows: Vec<CoverageRow>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for r in &rows {
            if r.bits.len() != universe.len() {
                return Err(Error::structural(format!(
                    "row {} has {} bits, universe has {}",
                    r.test_id,
                    r.bits.len(),
                    universe.len()
                )));
            }
            if !ids.insert(r.test_id.clone()) {
                return Err(Error::structural(format!(
                    "duplicate test id {:?}",
                    r.test_id
                )));
            }
        }
        Ok(CoverageMatrix { universe, rows })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn rows(&self) -> &[CoverageRow] {
        &self.rows
    }

    pub fn row_by_id(&self, test_id: &str) -> Option<&CoverageRow> {
        self.rows.iter().find(|r| r.test_id == test_id)
    }

    /// Union of all rows' bits.
    pub fn union_all(&self) -> BitSet {
        let mut u = BitSet::new(self.universe.len());
        for r in &self.rows {
            u.union_with(&r.bits);
        }
        u
    }
}

/// The monotonically growing set of points reached during a campaign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveredSet {
    bits: BitSet,
}

impl CoveredSet {
    pub fn empty(universe_len: usize) -> Self {
        CoveredSet {
            bits: BitSet::new(universe_len),
        }
    }

    pub fn from_bits(bits: BitSet) -> Self {
        CoveredSet { bits }
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn universe_len(&self) -> usize {
        self.bits.len()
    }

    /// Union-only update; total coverage never decreases.
    pub fn merge_row(&mut self, row: &BitSet) -> Result<()> {
        check_universe(row, &self.bits)?;
        self.bits.union_with(row);
        Ok(())
    }

    /// Functional variant of [`CoveredSet::merge_row`].
    pub fn merged(&self, row: &BitSet) -> Result<CoveredSet> {
        let mut out = self.clone();
        out.merge_row(row)?;
        Ok(out)
    }
}

fn check_universe(a: &BitSet, b: &BitSet) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::structural(format!(
            "universe mismatch: {} vs {} points",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Percentage of the universe covered. An empty universe covers 0%.
pub fn total_coverage(covered: &CoveredSet) -> f64 {
    coverage_percent(covered.count(), covered.universe_len())
}

pub fn coverage_percent(count: usize, universe_len: usize) -> f64 {
    if universe_len == 0 {
        0.0
    } else {
        100.0 * count as f64 / universe_len as f64
    }
}

/// Percentage of the universe newly reached by `row` over `covered`.
/// Does not mutate `covered`.
pub fn incremental_coverage(row: &BitSet, covered: &CoveredSet) -> Result<f64> {
    check_universe(row, covered.bits())?;
    Ok(coverage_percent(
        row.count_new_in(covered.bits()),
        covered.universe_len(),
    ))
}

// --- serialized matrix file -------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    schema_version: u32,
    universe: Vec<MatrixPoint>,
    rows: Vec<MatrixRow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixPoint {
    path: String,
    index: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRow {
    test_id: String,
    /// Hit vector as lowercase hex of little-endian bytes.
    hits: String,
}

pub const MATRIX_SCHEMA_VERSION: u32 = 1;

/// Serializes a matrix to the JSON interchange form.
pub fn matrix_to_json(m: &CoverageMatrix) -> String {
    let file = MatrixFile {
        schema_version: MATRIX_SCHEMA_VERSION,
        universe: m
            .universe
            .points()
            .iter()
            .map(|p| MatrixPoint {
                path: p.path_string(),
                index: p.local_index,
            })
            .collect(),
        rows: m
            .rows
            .iter()
            .map(|r| MatrixRow {
                test_id: r.test_id.clone(),
                hits: r
                    .bits
                    .to_bytes()
                    .iter()
                    .map(|b| format!("{b:02x}"))
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("matrix serialization cannot fail")
}

/// Parses the JSON interchange form back into a matrix.
pub fn matrix_from_json(text: &str) -> Result<CoverageMatrix> {
    let file: MatrixFile = serde_json::from_str(text)?;
    if file.schema_version != MATRIX_SCHEMA_VERSION {
        return Err(Error::structural(format!(
            "unsupported matrix schema version {}",
            file.schema_version
        )));
    }
    let points: Vec<CoveragePointId> = file
        .universe
        .iter()
        .map(|p| CoveragePointId::new(&p.path, p.index))
        .collect();
    let universe = Universe::from_points(points.clone());
    if universe.len() != points.len() {
        return Err(Error::structural("duplicate points in matrix universe"));
    }
    // The file may list points in any order; bits are declared in file order.
    let file_to_canonical: Vec<usize> = points
        .iter()
        .map(|p| universe.position(p).expect("point present"))
        .collect();
    let universe = Arc::new(universe);

    let mut rows = Vec::with_capacity(file.rows.len());
    for r in &file.rows {
        let nbytes = points.len().div_ceil(8);
        if r.hits.len() != nbytes * 2 {
            return Err(Error::structural(format!(
                "row {}: hit vector has wrong length",
                r.test_id
            )));
        }
        let bytes: Vec<u8> = (0..nbytes)
            .map(|i| {
                u8::from_str_radix(&r.hits[2 * i..2 * i + 2], 16)
                    .map_err(|_| Error::structural(format!("row {}: invalid hex", r.test_id)))
            })
            .collect::<Result<_>>()?;
        let file_bits = BitSet::from_bytes(points.len(), &bytes)
            .ok_or_else(|| Error::structural(format!("row {}: padding bits set", r.test_id)))?;
        let mut bits = BitSet::new(universe.len());
        for i in file_bits.iter_ones() {
            bits.set(file_to_canonical[i]);
        }
        rows.push(CoverageRow {
            test_id: r.test_id.clone(),
            bits,
        });
    }
    CoverageMatrix::from_bit_rows(universe, rows)
}

/// Renders a matrix row back to RCDB text (used by the synthetic suite
/// exporter). Points are grouped by module in canonical order.
pub fn row_to_rcdb(universe: &Universe, bits: &BitSet) -> String {
    let mut out = String::new();
    let mut current: Option<String> = None;
    for (i, p) in universe.points().iter().enumerate() {
        let path = p.path_string();
        if current.as_deref() != Some(&path) {
            out.push_str(&format!("module {path}\n"));
            current = Some(path);
        }
        out.push_str(&format!(
            "point {} {}\n",
            p.local_index,
            u8::from(bits.get(i))
        ));
    }
    out
}

/// Parses many documents and unifies them into one matrix. Documents are
/// parsed independently (in parallel when enabled) and merged in input
/// order, so the result is deterministic.
pub fn parse_documents(docs: &[(String, String)]) -> Result<CoverageMatrix> {
    let parsed: Vec<Result<RawCoverageDoc>> =
        crate::par::map_collect(docs, |(_, text)| parse_coverage_db(text));
    let mut pairs = Vec::with_capacity(docs.len());
    for ((id, _), doc) in docs.iter().zip(parsed) {
        pairs.push((id.clone(), doc?));
    }
    CoverageMatrix::build(pairs)
}

/// Per-column hit counts, in canonical universe order.
pub fn column_hit_counts(m: &CoverageMatrix) -> Vec<u32> {
    let mut counts = vec![0u32; m.universe.len()];
    for r in m.rows() {
        for i in r.bits.iter_ones() {
            counts[i] += 1;
        }
    }
    counts
}

pub type LevelMap<T> = BTreeMap<crate::level::Level, T>;

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "# sample\nmodule core\npoint 0 1\nmodule core.alu\npoint 0 0\npoint 1 1\n";

    #[test]
    fn parses_hits_in_file_order() {
        let doc = parse_coverage_db(DOC).unwrap();
        assert_eq!(doc.points.len(), 3);
        assert_eq!(doc.hits, vec![true, false, true]);
        assert_eq!(doc.points[0].to_string(), "core:0");
        assert_eq!(doc.points[2].to_string(), "core.alu:1");
    }

    #[test]
    fn empty_document_is_empty_row() {
        let doc = parse_coverage_db("").unwrap();
        assert!(doc.points.is_empty());
        assert!(doc.hits.is_empty());
        let m = CoverageMatrix::build(vec![("t".into(), doc)]).unwrap();
        assert_eq!(m.universe().len(), 0);
        assert_eq!(m.rows().len(), 1);
    }

    #[test]
    fn identical_hierarchies_order_identically() {
        let a = parse_coverage_db(DOC).unwrap();
        let b = parse_coverage_db("module core\npoint 0 0\nmodule core.alu\npoint 0 1\npoint 1 0\n")
            .unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let err = parse_coverage_db("module core\npoint x 1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_coverage_db("point 0 1\n").is_err()); // point before module
        assert!(parse_coverage_db("module core\npoint 0 2\n").is_err());
        assert!(parse_coverage_db("branch core\n").is_err());
    }

    #[test]
    fn duplicate_point_is_structural() {
        let err = parse_coverage_db("module core\npoint 0 1\npoint 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn build_unifies_disjoint_universes() {
        let a = parse_coverage_db("module m\npoint 1 1\n").unwrap();
        let b = parse_coverage_db("module m\npoint 2 1\n").unwrap();
        let m = CoverageMatrix::build(vec![("t1".into(), a), ("t2".into(), b)]).unwrap();
        assert_eq!(m.universe().len(), 2);
        let r1: Vec<bool> = (0..2).map(|i| m.rows()[0].bits.get(i)).collect();
        let r2: Vec<bool> = (0..2).map(|i| m.rows()[1].bits.get(i)).collect();
        assert_eq!(r1, vec![true, false]);
        assert_eq!(r2, vec![false, true]);
    }

    #[test]
    fn file_arrival_order_does_not_change_columns() {
        let a = "module core\npoint 0 1\nmodule uncore\npoint 3 1\n";
        let b = "module core.alu\npoint 7 1\n";
        let m1 = parse_documents(&[("a".into(), a.into()), ("b".into(), b.into())]).unwrap();
        let m2 = parse_documents(&[("b".into(), b.into()), ("a".into(), a.into())]).unwrap();
        assert_eq!(m1.universe().points(), m2.universe().points());
        // Canonical order: depth-first with sorted siblings.
        let names: Vec<String> = m1
            .universe()
            .points()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(names, vec!["core:0", "core.alu:7", "uncore:3"]);
    }

    #[test]
    fn duplicate_test_ids_rejected() {
        let a = parse_coverage_db("module m\npoint 0 1\n").unwrap();
        let b = a.clone();
        assert!(CoverageMatrix::build(vec![("t".into(), a), ("t".into(), b)]).is_err());
    }

    #[test]
    fn coverage_percentages() {
        let mut c = CoveredSet::empty(200);
        assert_eq!(total_coverage(&c), 0.0);
        for i in 0..140 {
            c.merge_row(&BitSet::from_indices(200, [i])).unwrap();
        }
        assert_eq!(total_coverage(&c), 70.0);
        let full = CoveredSet::from_bits(BitSet::from_indices(200, 0..200));
        assert_eq!(total_coverage(&full), 100.0);
        assert_eq!(total_coverage(&CoveredSet::empty(0)), 0.0);
    }

    #[test]
    fn incremental_examples() {
        let covered = CoveredSet::from_bits(BitSet::from_indices(3, [0]));
        let row = BitSet::from_indices(3, [0, 1, 2]);
        let inc = incremental_coverage(&row, &covered).unwrap();
        assert!((inc - 66.67).abs() < 0.01);

        let sub = BitSet::from_indices(3, [0]);
        assert_eq!(incremental_coverage(&sub, &covered).unwrap(), 0.0);

        let wrong = BitSet::new(4);
        assert!(incremental_coverage(&wrong, &covered).is_err());
    }

    #[test]
    fn incremental_matches_per_point_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(1..120);
            let row = BitSet::from_indices(n, (0..n).filter(|_| rng.random_range(0..3) == 0));
            let cov = BitSet::from_indices(n, (0..n).filter(|_| rng.random_range(0..3) == 0));
            let covered = CoveredSet::from_bits(cov.clone());
            let mut brute = 0usize;
            for i in 0..n {
                if row.get(i) && !cov.get(i) {
                    brute += 1;
                }
            }
            let expect = 100.0 * brute as f64 / n as f64;
            let got = incremental_coverage(&row, &covered).unwrap();
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn merge_examples() {
        let mut c = CoveredSet::from_bits(BitSet::from_indices(3, [0]));
        c.merge_row(&BitSet::from_indices(3, [1, 2])).unwrap();
        assert_eq!(c.count(), 3);
        // Idempotent.
        let own = c.bits().clone();
        assert_eq!(c.merged(&own).unwrap(), c);
    }

    #[test]
    fn merge_order_independent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 64;
        let rows: Vec<BitSet> = (0..6)
            .map(|_| BitSet::from_indices(n, (0..n).filter(|_| rng.random_range(0..4) == 0)))
            .collect();
        let mut forward = CoveredSet::empty(n);
        for r in &rows {
            forward.merge_row(r).unwrap();
        }
        let mut backward = CoveredSet::empty(n);
        for r in rows.iter().rev() {
            backward.merge_row(r).unwrap();
        }
        assert_eq!(forward, backward);
    }

    #[test]
    fn matrix_json_round_trip() {
        let a = parse_coverage_db(DOC).unwrap();
        let b = parse_coverage_db("module core\npoint 0 1\nmodule dec\npoint 5 1\n").unwrap();
        let m = CoverageMatrix::build(vec![("t1".into(), a), ("t2".into(), b)]).unwrap();
        let json = matrix_to_json(&m);
        let back = matrix_from_json(&json).unwrap();
        assert_eq!(back.universe().points(), m.universe().points());
        assert_eq!(back.rows().len(), 2);
        for (x, y) in back.rows().iter().zip(m.rows()) {
            assert_eq!(x.test_id, y.test_id);
            assert_eq!(x.bits, y.bits);
        }
        // Emitting again is byte-stable.
        assert_eq!(matrix_to_json(&back), json);
    }

    #[test]
    fn rcdb_round_trip_via_emitter() {
        let doc = parse_coverage_db(DOC).unwrap();
        let m = CoverageMatrix::build(vec![("t".into(), doc)]).unwrap();
        let text = row_to_rcdb(m.universe(), &m.rows()[0].bits);
        let reparsed = parse_coverage_db(&text).unwrap();
        let m2 = CoverageMatrix::build(vec![("t".into(), reparsed)]).unwrap();
        assert_eq!(m2.universe().points(), m.universe().points());
        assert_eq!(m2.rows()[0].bits, m.rows()[0].bits);
    }
}
