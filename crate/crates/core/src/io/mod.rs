//! File formats and labelset derivation.
//!
//! Every format is line-oriented UTF-8 with LF endings and tab-separated
//! fields. Header lines start with `#` and carry `key: value` metadata;
//! the first header names the schema and version. Writers emit rows in a
//! canonical order so parse-then-write is byte identity.

pub mod synth;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeSet, LabelSet, NodeId, Provenance};
use crate::similarity::SparseCountVector;

const EDGES_SCHEMA: &str = "edges v1";
const ATTRS_SCHEMA: &str = "attributes v1";
const LABELS_SCHEMA: &str = "labels v1";
const PLAYS_SCHEMA: &str = "plays v1";
const GENRES_SCHEMA: &str = "genres v1";

/// Header block plus body lines with their original line numbers.
struct Parsed {
    headers: BTreeMap<String, String>,
    body: Vec<(usize, String)>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::parse(path.display().to_string(), line, message)
}

fn read_lines(path: &Path, schema: &str) -> Result<Parsed> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut headers = BTreeMap::new();
    let mut body = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if let Some(rest) = raw.strip_prefix('#') {
            if !body.is_empty() {
                return Err(parse_err(path, line_no, "header after body"));
            }
            let rest = rest.trim();
            let Some((key, value)) = rest.split_once(':') else {
                return Err(parse_err(path, line_no, "header without `key: value`"));
            };
            headers.insert(key.trim().to_string(), value.trim().to_string());
        } else if !raw.trim().is_empty() {
            body.push((line_no, raw.to_string()));
        }
    }
    match headers.get("schema") {
        Some(s) if s == schema => Ok(Parsed { headers, body }),
        Some(s) => Err(parse_err(path, 1, format!("expected schema `{schema}`, found `{s}`"))),
        None => Err(parse_err(path, 1, format!("missing schema header (expected `{schema}`)"))),
    }
}

fn header_usize(p: &Parsed, path: &Path, key: &str) -> Result<usize> {
    let v = p
        .headers
        .get(key)
        .ok_or_else(|| parse_err(path, 1, format!("missing `{key}` header")))?;
    v.parse()
        .map_err(|_| parse_err(path, 1, format!("header `{key}` is not a count: `{v}`")))
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(path, line, format!("bad {what}: `{s}`")))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Undirected provenances list each pair once with u < v; the
/// nearest-neighbor model lists every directed arc.
pub fn write_edges(path: &Path, e: &EdgeSet) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema: {EDGES_SCHEMA}").unwrap();
    writeln!(out, "# provenance: {}", e.provenance().as_str()).unwrap();
    writeln!(out, "# nodes: {}", e.num_nodes()).unwrap();
    match e.provenance() {
        Provenance::Observed | Provenance::Threshold => {
            for (u, v) in e.arcs().filter(|&(u, v)| u < v) {
                writeln!(out, "{u}\t{v}").unwrap();
            }
        }
        Provenance::Knn => {
            for (u, v) in e.arcs() {
                writeln!(out, "{u}\t{v}").unwrap();
            }
        }
    }
    write_file(path, &out)
}

pub fn parse_edges(path: &Path) -> Result<EdgeSet> {
    let p = read_lines(path, EDGES_SCHEMA)?;
    let num_nodes = header_usize(&p, path, "nodes")?;
    let provenance: Provenance = p
        .headers
        .get("provenance")
        .ok_or_else(|| parse_err(path, 1, "missing `provenance` header"))?
        .parse()?;
    let mut rows: Vec<(NodeId, NodeId)> = Vec::with_capacity(p.body.len());
    for (line, text) in &p.body {
        let Some((a, b)) = text.split_once('\t') else {
            return Err(parse_err(path, *line, "expected `u<TAB>v`"));
        };
        let u: NodeId = field(path, *line, a, "node id")?;
        let v: NodeId = field(path, *line, b, "node id")?;
        match provenance {
            Provenance::Observed | Provenance::Threshold if u >= v => {
                return Err(parse_err(path, *line, "undirected pairs require u < v"));
            }
            _ => {}
        }
        rows.push((u, v));
    }
    let result = match provenance {
        Provenance::Observed | Provenance::Threshold => {
            EdgeSet::from_undirected_pairs(num_nodes, &rows, provenance)
        }
        Provenance::Knn => EdgeSet::from_arcs(num_nodes, rows, provenance),
    };
    result.map_err(|e| parse_err(path, 1, e.to_string()))
}

pub fn write_attributes(path: &Path, attrs: &[SparseCountVector], num_dims: usize) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema: {ATTRS_SCHEMA}").unwrap();
    writeln!(out, "# nodes: {}", attrs.len()).unwrap();
    writeln!(out, "# dims: {num_dims}").unwrap();
    for (u, row) in attrs.iter().enumerate() {
        for (dim, count) in row.iter() {
            writeln!(out, "{u}\t{dim}\t{count}").unwrap();
        }
    }
    write_file(path, &out)
}

pub fn parse_attributes(path: &Path) -> Result<(Vec<SparseCountVector>, usize)> {
    let p = read_lines(path, ATTRS_SCHEMA)?;
    let num_nodes = header_usize(&p, path, "nodes")?;
    let num_dims = header_usize(&p, path, "dims")?;
    let mut per_node: Vec<Vec<(u32, u64)>> = vec![Vec::new(); num_nodes];
    for (line, text) in &p.body {
        let mut parts = text.split('\t');
        let (Some(u), Some(d), Some(c), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(parse_err(path, *line, "expected `u<TAB>dim<TAB>count`"));
        };
        let u: usize = field(path, *line, u, "node id")?;
        let dim: u32 = field(path, *line, d, "dimension")?;
        let count: u64 = field(path, *line, c, "count")?;
        if u >= num_nodes {
            return Err(parse_err(path, *line, format!("node {u} out of range")));
        }
        if dim as usize >= num_dims {
            return Err(parse_err(path, *line, format!("dimension {dim} out of range")));
        }
        if count == 0 {
            return Err(parse_err(path, *line, "zero counts must not be stored"));
        }
        if per_node[u].iter().any(|&(d2, _)| d2 == dim) {
            return Err(parse_err(path, *line, format!("duplicate dimension {dim} for node {u}")));
        }
        per_node[u].push((dim, count));
    }
    let attrs = per_node
        .into_iter()
        .map(|pairs| {
            let (indices, values) = {
                let mut pairs = pairs;
                pairs.sort_unstable_by_key(|&(d, _)| d);
                pairs.into_iter().unzip()
            };
            SparseCountVector::new(indices, values)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    Ok((attrs, num_dims))
}

pub fn write_labels(path: &Path, l: &LabelSet) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema: {LABELS_SCHEMA}").unwrap();
    writeln!(out, "# labelset: {}", l.name()).unwrap();
    writeln!(out, "# nodes: {}", l.len()).unwrap();
    for (u, &bit) in l.labels().iter().enumerate() {
        writeln!(out, "{u}\t{}", bit as u8).unwrap();
    }
    write_file(path, &out)
}

/// Nodes absent from the body default to label 0; prevalence is recomputed
/// from the parsed bits, never read from a header.
pub fn parse_labels(path: &Path) -> Result<LabelSet> {
    let p = read_lines(path, LABELS_SCHEMA)?;
    let num_nodes = header_usize(&p, path, "nodes")?;
    let name = p
        .headers
        .get("labelset")
        .ok_or_else(|| parse_err(path, 1, "missing `labelset` header"))?
        .clone();
    let mut labels = vec![false; num_nodes];
    let mut seen = vec![false; num_nodes];
    for (line, text) in &p.body {
        let Some((u, bit)) = text.split_once('\t') else {
            return Err(parse_err(path, *line, "expected `u<TAB>{0,1}`"));
        };
        let u: usize = field(path, *line, u, "node id")?;
        if u >= num_nodes {
            return Err(parse_err(path, *line, format!("node {u} out of range")));
        }
        if seen[u] {
            return Err(parse_err(path, *line, format!("duplicate label for node {u}")));
        }
        seen[u] = true;
        labels[u] = match bit {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(path, *line, format!("label must be 0 or 1, got `{other}`"))),
        };
    }
    Ok(LabelSet::new(name, labels))
}

/// Aggregated play counts: one row per (user, artist) after summation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayLog {
    num_nodes: usize,
    rows: Vec<(NodeId, u32, u64)>,
}

impl PlayLog {
    /// Rows may repeat (user, artist); they are summed. Zero-play rows are
    /// rejected rather than dropped.
    pub fn from_rows(num_nodes: usize, rows: Vec<(NodeId, u32, u64)>) -> Result<Self> {
        let mut agg: BTreeMap<(NodeId, u32), u64> = BTreeMap::new();
        for (u, a, plays) in rows {
            if u as usize >= num_nodes {
                return Err(Error::invalid(format!("user {u} out of range")));
            }
            if plays == 0 {
                return Err(Error::invalid(format!("zero plays for user {u} artist {a}")));
            }
            *agg.entry((u, a)).or_insert(0) += plays;
        }
        Ok(PlayLog {
            num_nodes,
            rows: agg.into_iter().map(|((u, a), p)| (u, a, p)).collect(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn rows(&self) -> &[(NodeId, u32, u64)] {
        &self.rows
    }
}

pub fn write_plays(path: &Path, log: &PlayLog) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema: {PLAYS_SCHEMA}").unwrap();
    writeln!(out, "# nodes: {}", log.num_nodes()).unwrap();
    for (u, a, p) in log.rows() {
        writeln!(out, "{u}\t{a}\t{p}").unwrap();
    }
    write_file(path, &out)
}

pub fn parse_plays(path: &Path) -> Result<PlayLog> {
    let p = read_lines(path, PLAYS_SCHEMA)?;
    let num_nodes = header_usize(&p, path, "nodes")?;
    let mut rows = Vec::with_capacity(p.body.len());
    for (line, text) in &p.body {
        let mut parts = text.split('\t');
        let (Some(u), Some(a), Some(c), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(parse_err(path, *line, "expected `user<TAB>artist<TAB>plays`"));
        };
        let u: NodeId = field(path, *line, u, "user id")?;
        let a: u32 = field(path, *line, a, "artist id")?;
        let plays: u64 = field(path, *line, c, "play count")?;
        if plays == 0 {
            return Err(parse_err(path, *line, "play count must be positive"));
        }
        rows.push((u, a, plays));
    }
    PlayLog::from_rows(num_nodes, rows).map_err(|e| parse_err(path, 1, e.to_string()))
}

/// Genre name to its artist set, each at most 1000 artists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GenreMap {
    genres: BTreeMap<String, Vec<u32>>,
}

impl GenreMap {
    pub fn from_sets(sets: impl IntoIterator<Item = (String, Vec<u32>)>) -> Result<Self> {
        let mut genres = BTreeMap::new();
        for (name, mut artists) in sets {
            artists.sort_unstable();
            artists.dedup();
            if artists.is_empty() {
                return Err(Error::invalid(format!("genre `{name}` has no artists")));
            }
            if artists.len() > 1000 {
                return Err(Error::invalid(format!(
                    "genre `{name}` lists {} artists, limit is 1000",
                    artists.len()
                )));
            }
            if genres.insert(name.clone(), artists).is_some() {
                return Err(Error::invalid(format!("duplicate genre `{name}`")));
            }
        }
        Ok(GenreMap { genres })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u32])> {
        self.genres.iter().map(|(n, a)| (n.as_str(), a.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.genres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genres.is_empty()
    }
}

pub fn write_genres(path: &Path, genres: &GenreMap) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema: {GENRES_SCHEMA}").unwrap();
    for (name, artists) in genres.iter() {
        for a in artists {
            writeln!(out, "{name}\t{a}").unwrap();
        }
    }
    write_file(path, &out)
}

pub fn parse_genres(path: &Path) -> Result<GenreMap> {
    let p = read_lines(path, GENRES_SCHEMA)?;
    let mut sets: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for (line, text) in &p.body {
        let Some((name, artist)) = text.split_once('\t') else {
            return Err(parse_err(path, *line, "expected `genre<TAB>artist`"));
        };
        let artist: u32 = field(path, *line, artist, "artist id")?;
        sets.entry(name.to_string()).or_default().push(artist);
    }
    GenreMap::from_sets(sets).map_err(|e| parse_err(path, 1, e.to_string()))
}

/// Per-user sorted artist lists: user u listens to artist a iff the
/// aggregated plays reach `min_plays`.
pub fn derive_artist_listeners(log: &PlayLog, min_plays: u64) -> Vec<Vec<u32>> {
    let mut listeners = vec![Vec::new(); log.num_nodes()];
    for &(u, a, plays) in log.rows() {
        if plays >= min_plays {
            listeners[u as usize].push(a);
        }
    }
    for l in &mut listeners {
        l.sort_unstable();
    }
    listeners
}

/// One labelset per genre: label 1 iff the user listens to at least
/// `min_artists` artists in the genre's set. Genres referencing artists no
/// one listens to simply contribute no listeners.
pub fn derive_genre_labels(
    listeners: &[Vec<u32>],
    genres: &GenreMap,
    min_artists: usize,
) -> Vec<LabelSet> {
    genres
        .iter()
        .map(|(name, artists)| {
            let labels = listeners
                .iter()
                .map(|heard| {
                    let overlap = heard
                        .iter()
                        .filter(|a| artists.binary_search(a).is_ok())
                        .count();
                    overlap >= min_artists
                })
                .collect();
            LabelSet::new(name, labels)
        })
        .collect()
}

/// Assemble a graph from an edge file, an attribute file, and label files.
pub fn parse_graph(
    edges_path: &Path,
    attrs_path: &Path,
    label_paths: &[impl AsRef<Path>],
) -> Result<AttributedGraph> {
    let edges = parse_edges(edges_path)?;
    let (attrs, num_dims) = parse_attributes(attrs_path)?;
    let labelsets = label_paths
        .iter()
        .map(|p| parse_labels(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    AttributedGraph::new(num_dims, edges, attrs, labelsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn edges_round_trip_both_conventions() {
        let d = dir();
        let undirected = EdgeSet::from_undirected_pairs(
            5,
            &[(0, 1), (2, 4)],
            Provenance::Observed,
        )
        .unwrap();
        let path = d.path().join("obs.tsv");
        write_edges(&path, &undirected).unwrap();
        assert_eq!(parse_edges(&path).unwrap(), undirected);
        let bytes = std::fs::read(&path).unwrap();
        write_edges(&path, &parse_edges(&path).unwrap()).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes);

        let directed =
            EdgeSet::from_arcs(4, vec![(0, 1), (1, 0), (3, 2)], Provenance::Knn).unwrap();
        let kpath = d.path().join("knn.tsv");
        write_edges(&kpath, &directed).unwrap();
        assert_eq!(parse_edges(&kpath).unwrap(), directed);
    }

    #[test]
    fn minimal_two_node_fixture_parses() {
        let d = dir();
        let path = d.path().join("e.tsv");
        std::fs::write(&path, "# schema: edges v1\n# provenance: observed\n# nodes: 2\n0\t1\n")
            .unwrap();
        let e = parse_edges(&path).unwrap();
        assert_eq!(e.num_nodes(), 2);
        assert_eq!(e.unordered_pair_count(), 1);
    }

    #[test]
    fn malformed_edge_files_are_rejected_with_line_numbers() {
        let d = dir();
        let path = d.path().join("bad.tsv");
        std::fs::write(
            &path,
            "# schema: edges v1\n# provenance: observed\n# nodes: 3\n0\t1\n2\t2\n",
        )
        .unwrap();
        match parse_edges(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }

        std::fs::write(
            &path,
            "# schema: edges v1\n# provenance: observed\n# nodes: 3\n0\t1\n0\t1\n",
        )
        .unwrap();
        assert!(parse_edges(&path).is_err());

        std::fs::write(&path, "# schema: labels v1\n# nodes: 3\n").unwrap();
        assert!(parse_edges(&path).is_err());
    }

    #[test]
    fn attributes_round_trip() {
        let d = dir();
        let attrs = vec![
            SparseCountVector::from_pairs([(0, 3), (7, 1)]),
            SparseCountVector::empty(),
            SparseCountVector::from_pairs([(2, 9)]),
        ];
        let path = d.path().join("a.tsv");
        write_attributes(&path, &attrs, 10).unwrap();
        let (parsed, dims) = parse_attributes(&path).unwrap();
        assert_eq!(parsed, attrs);
        assert_eq!(dims, 10);
    }

    #[test]
    fn labels_round_trip_and_recompute_prevalence() {
        let d = dir();
        let l = LabelSet::new("indie", vec![true, false, true, false, false]);
        let path = d.path().join("l.tsv");
        write_labels(&path, &l).unwrap();
        let parsed = parse_labels(&path).unwrap();
        assert_eq!(parsed, l);
        assert_eq!(parsed.prevalence(), 0.4);
    }

    #[test]
    fn plays_aggregate_duplicates() {
        let log = PlayLog::from_rows(3, vec![(0, 5, 2), (0, 5, 4), (1, 9, 1)]).unwrap();
        assert_eq!(log.rows(), &[(0, 5, 6), (1, 9, 1)]);
        assert!(PlayLog::from_rows(3, vec![(0, 5, 0)]).is_err());
        assert!(PlayLog::from_rows(1, vec![(4, 5, 1)]).is_err());
    }

    #[test]
    fn listener_thresholds_are_exact() {
        let log = PlayLog::from_rows(2, vec![(0, 1, 5), (0, 2, 4), (1, 1, 100)]).unwrap();
        let listeners = derive_artist_listeners(&log, 5);
        assert_eq!(listeners[0], vec![1]);
        assert_eq!(listeners[1], vec![1]);
        let empty = derive_artist_listeners(&PlayLog::from_rows(2, vec![]).unwrap(), 5);
        assert!(empty.iter().all(|l| l.is_empty()));
    }

    #[test]
    fn genre_labels_require_five_listened_artists() {
        // User 0 listens to artists 1..=5 (all in the genre), user 1 to only
        // four of them, user 2 to five artists but one outside the genre.
        let rows = vec![
            (0, 1, 5), (0, 2, 5), (0, 3, 5), (0, 4, 5), (0, 5, 5),
            (1, 1, 9), (1, 2, 9), (1, 3, 9), (1, 4, 9),
            (2, 1, 5), (2, 2, 5), (2, 3, 5), (2, 4, 5), (2, 99, 5),
        ];
        let log = PlayLog::from_rows(3, rows).unwrap();
        let listeners = derive_artist_listeners(&log, 5);
        let genres = GenreMap::from_sets([("rock".to_string(), vec![1, 2, 3, 4, 5, 6])]).unwrap();
        let labels = derive_genre_labels(&listeners, &genres, 5);
        assert_eq!(labels.len(), 1);
        assert_eq!(labels[0].labels(), &[true, false, false]);
    }

    #[test]
    fn genre_map_enforces_its_limits() {
        assert!(GenreMap::from_sets([("x".to_string(), vec![])]).is_err());
        assert!(GenreMap::from_sets([("x".to_string(), (0..1001).collect())]).is_err());
        assert!(GenreMap::from_sets([("x".to_string(), (0..1000).collect())]).is_ok());
    }

    #[test]
    fn graph_assembles_from_files() {
        let d = dir();
        let edges = EdgeSet::from_undirected_pairs(3, &[(0, 1)], Provenance::Observed).unwrap();
        let attrs = vec![
            SparseCountVector::from_pairs([(0, 2)]),
            SparseCountVector::from_pairs([(1, 1)]),
            SparseCountVector::empty(),
        ];
        let l = LabelSet::new("g", vec![true, false, true]);
        write_edges(&d.path().join("e.tsv"), &edges).unwrap();
        write_attributes(&d.path().join("a.tsv"), &attrs, 4).unwrap();
        write_labels(&d.path().join("l.tsv"), &l).unwrap();
        let g = parse_graph(
            &d.path().join("e.tsv"),
            &d.path().join("a.tsv"),
            &[d.path().join("l.tsv")],
        )
        .unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_dims(), 4);
        assert_eq!(g.labelset("g").unwrap(), &l);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Adding plays can only add listeners and labels, never remove them.
        #[test]
        fn derivation_is_monotone_in_plays(
            base in proptest::collection::vec((0u32..6, 0u32..12, 1u64..8), 0..30),
            extra in proptest::collection::vec((0u32..6, 0u32..12, 1u64..8), 0..10),
        ) {
            let log1 = PlayLog::from_rows(6, base.clone()).unwrap();
            let mut all = base;
            all.extend(extra);
            let log2 = PlayLog::from_rows(6, all).unwrap();
            let genres = GenreMap::from_sets([("g".to_string(), (0..8).collect())]).unwrap();
            let l1 = &derive_genre_labels(&derive_artist_listeners(&log1, 5), &genres, 5)[0];
            let l2 = &derive_genre_labels(&derive_artist_listeners(&log2, 5), &genres, 5)[0];
            for u in 0..6 {
                prop_assert!(!l1.label(u) || l2.label(u));
            }
        }
    }
}
