//! Partial contact maps, their compatibility constraints, and
//! tree-consistency via leaf-path distances.
//!
//! A map usable as a parsing constraint must be CF-compatible: pairs are
//! nested or disjoint (never crossing), no position sits in two pairs, and
//! endpoints are separated by at least [`MIN_SEPARATION`] in sequence. A
//! reference [`ContactSet`] used for evaluation only needs the separation
//! constraint.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::parser::tree::ParseTree;

/// Leaf-path distance threshold for tree-consistency. A contact-rule
/// realization of a pair puts its leaves exactly 4 edges apart; any other
/// derivation of a pair with separation >= 2 needs at least 5.
pub const DEFAULT_DELTA: usize = 4;

/// Minimum sequence separation `j - i` of a contact pair. The interior of a
/// contact-rule span is derived by a non-lexical symbol and therefore covers
/// at least two positions.
pub const MIN_SEPARATION: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapViolation {
    /// `i >= j` or an endpoint outside `1..=length`.
    OutOfRange { pair: (usize, usize), length: usize },
    /// `j - i < MIN_SEPARATION`.
    Separation { pair: (usize, usize) },
    /// A position participating in more than one pair.
    SharedPosition { position: usize, pairs: [(usize, usize); 2] },
    /// Pairs that interleave without nesting.
    Crossing { a: (usize, usize), b: (usize, usize) },
}

impl fmt::Display for MapViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapViolation::OutOfRange { pair, length } => {
                write!(f, "pair {pair:?} out of range for length {length}")
            }
            MapViolation::Separation { pair } => write!(
                f,
                "pair {pair:?} violates minimum separation {MIN_SEPARATION}"
            ),
            MapViolation::SharedPosition { position, pairs } => write!(
                f,
                "position {position} participates in both {:?} and {:?}",
                pairs[0], pairs[1]
            ),
            MapViolation::Crossing { a, b } => write!(f, "pairs {a:?} and {b:?} cross"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ContactError {
    #[error("invalid contact map: {}", format_violations(.0))]
    InvalidMap(Vec<MapViolation>),
    #[error("leaf position {position} out of range 1..={len}")]
    LeafOutOfRange { position: usize, len: usize },
    #[error("tree yields {tree_len} leaves but map has length {map_len}")]
    LengthMismatch { tree_len: usize, map_len: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

fn format_violations(violations: &[MapViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Report all CF-compatibility violations of a candidate pair list.
/// Empty result means the pairs form a valid [`ContactMap`].
pub fn validate_pairs(length: usize, pairs: &[(usize, usize)]) -> Vec<MapViolation> {
    let mut violations = Vec::new();
    for &(i, j) in pairs {
        if i == 0 || j == 0 || i >= j || j > length {
            violations.push(MapViolation::OutOfRange { pair: (i, j), length });
        } else if j - i < MIN_SEPARATION {
            violations.push(MapViolation::Separation { pair: (i, j) });
        }
    }
    for (a_idx, &a) in pairs.iter().enumerate() {
        for &b in &pairs[a_idx + 1..] {
            let (i, j) = a;
            let (k, l) = b;
            if i == k || i == l || j == k || j == l {
                let position = if i == k || i == l { i } else { j };
                violations.push(MapViolation::SharedPosition { position, pairs: [a, b] });
                continue;
            }
            // With endpoints distinct, exactly one endpoint of b inside
            // [i, j] means the pairs cross.
            let k_in = i < k && k < j;
            let l_in = i < l && l < j;
            if k_in != l_in {
                violations.push(MapViolation::Crossing { a, b });
            }
        }
    }
    violations
}

/// CF-compatible set of contact pairs for sequences of a fixed length.
/// Positions are 1-based with `i < j`; pairs are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactMap {
    length: usize,
    pairs: Vec<(usize, usize)>,
}

impl ContactMap {
    pub fn new(length: usize, mut pairs: Vec<(usize, usize)>) -> Result<Self, ContactError> {
        let violations = validate_pairs(length, &pairs);
        if !violations.is_empty() {
            return Err(ContactError::InvalidMap(violations));
        }
        pairs.sort_unstable();
        Ok(ContactMap { length, pairs })
    }

    pub fn empty(length: usize) -> Self {
        ContactMap { length, pairs: Vec::new() }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    /// Index of the pair a position participates in, if any.
    pub fn position_in_pair(&self, position: usize) -> Option<usize> {
        self.pairs
            .iter()
            .position(|&(i, j)| i == position || j == position)
    }

    /// Contact-pair file: `length: n` header, then one `i j` line per pair.
    pub fn to_text(&self) -> String {
        let mut out = format!("length: {}\n", self.length);
        for (i, j) in &self.pairs {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ContactError> {
        let (length, pairs) = parse_pair_file(text)?;
        ContactMap::new(length, pairs)
    }
}

/// Reference contact set: separation-3+ position pairs of a known structure,
/// with no nesting/crossing requirements. Used as evaluation ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactSet {
    length: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl ContactSet {
    pub fn new(length: usize, pairs: Vec<(usize, usize)>) -> Result<Self, ContactError> {
        let mut violations = Vec::new();
        for &(i, j) in &pairs {
            if i == 0 || j == 0 || i >= j || j > length {
                violations.push(MapViolation::OutOfRange { pair: (i, j), length });
            } else if j - i < MIN_SEPARATION {
                violations.push(MapViolation::Separation { pair: (i, j) });
            }
        }
        if !violations.is_empty() {
            return Err(ContactError::InvalidMap(violations));
        }
        Ok(ContactSet {
            length,
            pairs: pairs.into_iter().collect(),
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.contains(&pair)
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn from_text(text: &str) -> Result<Self, ContactError> {
        let (length, pairs) = parse_pair_file(text)?;
        ContactSet::new(length, pairs)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("length: {}\n", self.length);
        for (i, j) in &self.pairs {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}

fn parse_pair_file(text: &str) -> Result<(usize, Vec<(usize, usize)>), ContactError> {
    let mut length: Option<usize> = None;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |reason: String| ContactError::Parse { line, reason };
        if let Some(rest) = content.strip_prefix("length:") {
            let n = rest
                .trim()
                .parse()
                .map_err(|_| err(format!("bad length '{}'", rest.trim())))?;
            length = Some(n);
        } else {
            let mut it = content.split_whitespace();
            let i: usize = it
                .next()
                .unwrap()
                .parse()
                .map_err(|_| err("bad pair line, expected 'i j'".into()))?;
            let j: usize = it
                .next()
                .ok_or_else(|| err("bad pair line, expected 'i j'".into()))?
                .parse()
                .map_err(|_| err("bad pair line, expected 'i j'".into()))?;
            if it.next().is_some() {
                return Err(err("trailing tokens after pair".into()));
            }
            pairs.push((i, j));
        }
    }
    let length = length.ok_or(ContactError::Parse {
        line: 0,
        reason: "missing 'length: n' header".into(),
    })?;
    Ok((length, pairs))
}

/// Edge distances between terminal leaves of one tree, computed once from
/// the root paths of all leaves.
pub struct TreeDistances {
    paths: Vec<Vec<u32>>,
}

impl TreeDistances {
    pub fn new(tree: &ParseTree) -> Self {
        let mut paths = Vec::new();
        let mut prefix = Vec::new();
        collect_leaf_paths(tree, &mut prefix, &mut paths);
        TreeDistances { paths }
    }

    pub fn leaf_count(&self) -> usize {
        self.paths.len()
    }

    /// Edges on the unique path between the `i`-th and `j`-th leaf (1-based).
    pub fn distance(&self, i: usize, j: usize) -> Result<usize, ContactError> {
        let len = self.paths.len();
        for pos in [i, j] {
            if pos == 0 || pos > len {
                return Err(ContactError::LeafOutOfRange { position: pos, len });
            }
        }
        let a = &self.paths[i - 1];
        let b = &self.paths[j - 1];
        let common = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
        Ok((a.len() - common) + (b.len() - common))
    }
}

fn collect_leaf_paths(tree: &ParseTree, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    match tree {
        ParseTree::Leaf(_) => out.push(prefix.clone()),
        ParseTree::Node { children, .. } => {
            for (k, c) in children.iter().enumerate() {
                prefix.push(k as u32);
                collect_leaf_paths(c, prefix, out);
                prefix.pop();
            }
        }
    }
}

/// Number of edges on the path between the `i`-th and `j`-th terminal leaf.
/// The lexical-rule node above each terminal lies on the path.
pub fn leaf_distance(tree: &ParseTree, i: usize, j: usize) -> Result<usize, ContactError> {
    TreeDistances::new(tree).distance(i, j)
}

/// A measured leaf pair: its positions and the edge count between the
/// leaves. The distance is at least 2 (up to the lexical parent and down
/// again is the theoretical floor for distinct leaves).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeDistanceReport {
    pub pair: (usize, usize),
    pub distance: usize,
}

/// Distances for every leaf pair with at least `min_separation` positions
/// between the endpoints, in lexicographic pair order.
pub fn leaf_distance_reports(tree: &ParseTree, min_separation: usize) -> Vec<TreeDistanceReport> {
    let distances = TreeDistances::new(tree);
    let n = distances.leaf_count();
    let mut out = Vec::new();
    for i in 1..=n {
        for j in (i + min_separation)..=n {
            out.push(TreeDistanceReport {
                pair: (i, j),
                distance: distances.distance(i, j).expect("in range"),
            });
        }
    }
    out
}

/// True iff every pair of `map` is realized within `delta` edges in `tree`.
pub fn is_consistent(
    tree: &ParseTree,
    map: &ContactMap,
    delta: usize,
) -> Result<bool, ContactError> {
    let distances = TreeDistances::new(tree);
    if distances.leaf_count() != map.length() {
        return Err(ContactError::LengthMismatch {
            tree_len: distances.leaf_count(),
            map_len: map.length(),
        });
    }
    for &(i, j) in map.pairs() {
        if distances.distance(i, j)? > delta {
            return Ok(false);
        }
    }
    Ok(true)
}
