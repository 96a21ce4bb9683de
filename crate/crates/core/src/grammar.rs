//! Grammar representation: alphabet, partitioned non-terminals, rules with
//! probabilities, plus the one-rule-per-line text format.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Per-LHS probability sums must be within this tolerance of 1.
pub const PROPERNESS_TOLERANCE: f64 = 1e-9;

/// The 20 standard amino acids, one letter each.
pub const PROTEIN_SYMBOLS: &str = "ACDEFGHIKLMNPQRSTVWY";

/// Index of a terminal symbol in the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId(pub usize);

/// Index of a non-terminal in the combined ordering: all of `V_T` first
/// (declaration order), then all of `V_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NtId(pub usize);

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("alphabet must not be empty")]
    EmptyAlphabet,
    #[error("duplicate alphabet symbol '{0}'")]
    DuplicateSymbol(char),
    #[error("symbol '{symbol}' at position {position} is not in the alphabet")]
    UnknownSymbol { symbol: char, position: usize },
    #[error("grammar needs at least one lexical and one non-lexical non-terminal")]
    MissingNonTerminals,
    #[error("duplicate non-terminal name '{0}'")]
    DuplicateNonTerminal(String),
    #[error("start symbol '{0}' is not a non-lexical non-terminal")]
    BadStart(String),
    #[error("rule {index}: {reason}")]
    BadRule { index: usize, reason: String },
    #[error("probabilities for '{name}' sum to {sum:.12}, expected 1 within {PROPERNESS_TOLERANCE:e}")]
    Improper { name: String, sum: f64 },
    #[error("raw weights for '{0}' are all zero")]
    ZeroWeightGroup(String),
    #[error("weight vector has length {got}, grammar has {expected} rules")]
    WeightLength { got: usize, expected: usize },
    #[error("negative raw weight {weight} for rule {index}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Ordered set of distinct single-character terminal symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    index: HashMap<char, usize>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(symbols: I) -> Result<Self, GrammarError> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.is_empty() {
            return Err(GrammarError::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, &c) in symbols.iter().enumerate() {
            if index.insert(c, i).is_some() {
                return Err(GrammarError::DuplicateSymbol(c));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// The default 20-symbol amino-acid alphabet.
    pub fn protein() -> Self {
        Alphabet::new(PROTEIN_SYMBOLS.chars()).expect("builtin alphabet is valid")
    }

    pub fn from_symbols_str(s: &str) -> Result<Self, GrammarError> {
        Alphabet::new(s.chars())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol(&self, t: TermId) -> char {
        self.symbols[t.0]
    }

    pub fn term(&self, c: char) -> Option<TermId> {
        self.index.get(&c).copied().map(TermId)
    }

    /// Encode a string, reporting the first out-of-alphabet symbol with its
    /// 1-based position.
    pub fn encode(&self, s: &str) -> Result<Vec<TermId>, GrammarError> {
        s.chars()
            .enumerate()
            .map(|(i, c)| {
                self.term(c).ok_or(GrammarError::UnknownSymbol {
                    symbol: c,
                    position: i + 1,
                })
            })
            .collect()
    }

    pub fn decode(&self, seq: &[TermId]) -> String {
        seq.iter().map(|&t| self.symbol(t)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Lexical,
    Branching,
    Contact,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Lexical => write!(f, "lexical"),
            RuleKind::Branching => write!(f, "branching"),
            RuleKind::Contact => write!(f, "contact"),
        }
    }
}

/// Right-hand side of a rule; the variant fixes the rule kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleRhs {
    /// `V_T -> terminal`
    Lexical(TermId),
    /// `V_N -> (V_T ∪ V_N) (V_T ∪ V_N)`
    Branching(NtId, NtId),
    /// `V_N -> V_T V_N V_T`
    Contact(NtId, NtId, NtId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub lhs: NtId,
    pub rhs: RuleRhs,
    pub prob: f64,
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        match self.rhs {
            RuleRhs::Lexical(_) => RuleKind::Lexical,
            RuleRhs::Branching(_, _) => RuleKind::Branching,
            RuleRhs::Contact(_, _, _) => RuleKind::Contact,
        }
    }
}

/// A proper PCFG over the three rule kinds. Immutable after construction;
/// every mutation-like operation builds a new instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    alphabet: Alphabet,
    vt: Vec<String>,
    vn: Vec<String>,
    start: NtId,
    rules: Vec<Rule>,
}

impl Grammar {
    /// Validates shape constraints, probability ranges and properness.
    pub fn new(
        alphabet: Alphabet,
        vt: Vec<String>,
        vn: Vec<String>,
        start: &str,
        rules: Vec<Rule>,
    ) -> Result<Self, GrammarError> {
        if vt.is_empty() || vn.is_empty() {
            return Err(GrammarError::MissingNonTerminals);
        }
        let mut seen: HashMap<&str, ()> = HashMap::new();
        for name in vt.iter().chain(vn.iter()) {
            if seen.insert(name, ()).is_some() {
                return Err(GrammarError::DuplicateNonTerminal(name.clone()));
            }
        }
        let n_vt = vt.len();
        let n_all = n_vt + vn.len();
        let start_id = match vn.iter().position(|n| n == start) {
            Some(i) => NtId(n_vt + i),
            None => return Err(GrammarError::BadStart(start.to_string())),
        };

        let g = Grammar {
            alphabet,
            vt,
            vn,
            start: start_id,
            rules,
        };

        let mut seen_rules: HashMap<(usize, RuleRhs), ()> = HashMap::new();
        for (index, rule) in g.rules.iter().enumerate() {
            let bad = |reason: String| GrammarError::BadRule { index, reason };
            if rule.lhs.0 >= n_all {
                return Err(bad(format!("lhs id {} out of range", rule.lhs.0)));
            }
            if !(rule.prob >= 0.0 && rule.prob <= 1.0) {
                return Err(bad(format!("probability {} outside [0,1]", rule.prob)));
            }
            match rule.rhs {
                RuleRhs::Lexical(t) => {
                    if !g.is_lexical(rule.lhs) {
                        return Err(bad("lexical rule lhs must be in V_T".into()));
                    }
                    if t.0 >= g.alphabet.len() {
                        return Err(bad(format!("terminal id {} out of range", t.0)));
                    }
                }
                RuleRhs::Branching(a, b) => {
                    if g.is_lexical(rule.lhs) {
                        return Err(bad("branching rule lhs must be in V_N".into()));
                    }
                    if a.0 >= n_all || b.0 >= n_all {
                        return Err(bad("branching rhs id out of range".into()));
                    }
                }
                RuleRhs::Contact(a, m, b) => {
                    if g.is_lexical(rule.lhs) {
                        return Err(bad("contact rule lhs must be in V_N".into()));
                    }
                    if a.0 >= n_all || m.0 >= n_all || b.0 >= n_all {
                        return Err(bad("contact rhs id out of range".into()));
                    }
                    if !g.is_lexical(a) || !g.is_lexical(b) {
                        return Err(bad("contact rule outer symbols must be in V_T".into()));
                    }
                    if g.is_lexical(m) {
                        return Err(bad("contact rule middle symbol must be in V_N".into()));
                    }
                }
            }
            if seen_rules.insert((rule.lhs.0, rule.rhs), ()).is_some() {
                return Err(bad("duplicate rule".into()));
            }
        }
        g.check_proper()?;
        Ok(g)
    }

    /// Grammar with every rule permitted by the kind constraints and uniform
    /// probabilities per LHS. Lexical non-terminals are named `t1..`, the
    /// others `v0..` with `v0` the start symbol. With `with_contact_rules`
    /// false the contact-rule set is empty.
    pub fn full(
        alphabet: Alphabet,
        n_vt: usize,
        n_vn: usize,
        with_contact_rules: bool,
    ) -> Result<Self, GrammarError> {
        if n_vt == 0 || n_vn == 0 {
            return Err(GrammarError::MissingNonTerminals);
        }
        let vt: Vec<String> = (0..n_vt).map(|i| format!("t{}", i + 1)).collect();
        let vn: Vec<String> = (0..n_vn).map(|i| format!("v{i}")).collect();
        let n_all = n_vt + n_vn;
        let n_terms = alphabet.len();

        let mut rules = Vec::new();
        for t in 0..n_vt {
            let p = 1.0 / n_terms as f64;
            for a in 0..n_terms {
                rules.push(Rule {
                    lhs: NtId(t),
                    rhs: RuleRhs::Lexical(TermId(a)),
                    prob: p,
                });
            }
        }
        for v in n_vt..n_all {
            let n_branching = n_all * n_all;
            let n_contact = if with_contact_rules {
                n_vt * n_vn * n_vt
            } else {
                0
            };
            let p = 1.0 / (n_branching + n_contact) as f64;
            for a in 0..n_all {
                for b in 0..n_all {
                    rules.push(Rule {
                        lhs: NtId(v),
                        rhs: RuleRhs::Branching(NtId(a), NtId(b)),
                        prob: p,
                    });
                }
            }
            if with_contact_rules {
                for a in 0..n_vt {
                    for m in n_vt..n_all {
                        for b in 0..n_vt {
                            rules.push(Rule {
                                lhs: NtId(v),
                                rhs: RuleRhs::Contact(NtId(a), NtId(m), NtId(b)),
                                prob: p,
                            });
                        }
                    }
                }
            }
        }
        Grammar::new(alphabet, vt, vn, "v0", rules)
    }

    /// New grammar with the same rule set and `prob = weight / sum of weights
    /// sharing the LHS`. Errors if some LHS group has no positive weight.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self, GrammarError> {
        if weights.len() != self.rules.len() {
            return Err(GrammarError::WeightLength {
                got: weights.len(),
                expected: self.rules.len(),
            });
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) {
                return Err(GrammarError::NegativeWeight { index, weight: w });
            }
        }
        let mut sums = vec![0.0; self.nt_count()];
        for (rule, &w) in self.rules.iter().zip(weights) {
            sums[rule.lhs.0] += w;
        }
        for (id, &s) in sums.iter().enumerate() {
            // Only groups that actually have rules matter; rule-less
            // non-terminals are rejected at construction anyway.
            if s == 0.0 && self.rules.iter().any(|r| r.lhs.0 == id) {
                return Err(GrammarError::ZeroWeightGroup(
                    self.nt_name(NtId(id)).to_string(),
                ));
            }
        }
        let rules = self
            .rules
            .iter()
            .zip(weights)
            .map(|(rule, &w)| Rule {
                prob: w / sums[rule.lhs.0],
                ..rule.clone()
            })
            .collect();
        Grammar::new(
            self.alphabet.clone(),
            self.vt.clone(),
            self.vn.clone(),
            self.nt_name(self.start),
            rules,
        )
    }

    /// Same rule set, uniform probabilities per LHS.
    pub fn uniform(&self) -> Self {
        self.with_weights(&vec![1.0; self.rules.len()])
            .expect("uniform weights are valid")
    }

    fn check_proper(&self) -> Result<(), GrammarError> {
        let mut sums = vec![0.0; self.nt_count()];
        for rule in &self.rules {
            sums[rule.lhs.0] += rule.prob;
        }
        for (id, &sum) in sums.iter().enumerate() {
            if (sum - 1.0).abs() > PROPERNESS_TOLERANCE {
                return Err(GrammarError::Improper {
                    name: self.nt_name(NtId(id)).to_string(),
                    sum,
                });
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> NtId {
        self.start
    }

    pub fn vt_count(&self) -> usize {
        self.vt.len()
    }

    pub fn vn_count(&self) -> usize {
        self.vn.len()
    }

    pub fn nt_count(&self) -> usize {
        self.vt.len() + self.vn.len()
    }

    pub fn is_lexical(&self, id: NtId) -> bool {
        id.0 < self.vt.len()
    }

    pub fn nt_name(&self, id: NtId) -> &str {
        if id.0 < self.vt.len() {
            &self.vt[id.0]
        } else {
            &self.vn[id.0 - self.vt.len()]
        }
    }

    pub fn nt_id(&self, name: &str) -> Option<NtId> {
        if let Some(i) = self.vt.iter().position(|n| n == name) {
            return Some(NtId(i));
        }
        self.vn
            .iter()
            .position(|n| n == name)
            .map(|i| NtId(self.vt.len() + i))
    }

    pub fn encode(&self, s: &str) -> Result<Vec<TermId>, GrammarError> {
        self.alphabet.encode(s)
    }

    pub fn rule_count(&self, kind: RuleKind) -> usize {
        self.rules.iter().filter(|r| r.kind() == kind).count()
    }

    pub fn has_contact_rules(&self) -> bool {
        self.rules.iter().any(|r| r.kind() == RuleKind::Contact)
    }

    pub fn find_rule(&self, lhs: NtId, rhs: &RuleRhs) -> Option<&Rule> {
        self.rules.iter().find(|r| r.lhs == lhs && r.rhs == *rhs)
    }

    /// One-rule-per-line text form; probabilities keep full precision.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let symbols: Vec<String> = self.alphabet.symbols().iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("alphabet: {}\n", symbols.join(" ")));
        out.push_str(&format!("vt: {}\n", self.vt.join(" ")));
        out.push_str(&format!("vn: {}\n", self.vn.join(" ")));
        out.push_str(&format!("start: {}\n", self.nt_name(self.start)));
        for rule in &self.rules {
            let rhs = match rule.rhs {
                RuleRhs::Lexical(t) => self.alphabet.symbol(t).to_string(),
                RuleRhs::Branching(a, b) => {
                    format!("{} {}", self.nt_name(a), self.nt_name(b))
                }
                RuleRhs::Contact(a, m, b) => format!(
                    "{} {} {}",
                    self.nt_name(a),
                    self.nt_name(m),
                    self.nt_name(b)
                ),
            };
            out.push_str(&format!(
                "{} {} -> {} : {}\n",
                rule.kind(),
                self.nt_name(rule.lhs),
                rhs,
                rule.prob
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GrammarError> {
        let mut alphabet: Option<Alphabet> = None;
        let mut vt: Option<Vec<String>> = None;
        let mut vn: Option<Vec<String>> = None;
        let mut start: Option<String> = None;
        let mut rule_lines: Vec<(usize, String)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |reason: String| GrammarError::Parse { line, reason };
            if let Some(rest) = content.strip_prefix("alphabet:") {
                let mut symbols = Vec::new();
                for tok in rest.split_whitespace() {
                    let mut chars = tok.chars();
                    let c = chars.next().unwrap();
                    if chars.next().is_some() {
                        return Err(err(format!(
                            "alphabet symbol '{tok}' must be a single character"
                        )));
                    }
                    symbols.push(c);
                }
                alphabet = Some(Alphabet::new(symbols).map_err(|e| GrammarError::Parse {
                    line,
                    reason: e.to_string(),
                })?);
            } else if let Some(rest) = content.strip_prefix("vt:") {
                vt = Some(rest.split_whitespace().map(String::from).collect());
            } else if let Some(rest) = content.strip_prefix("vn:") {
                vn = Some(rest.split_whitespace().map(String::from).collect());
            } else if let Some(rest) = content.strip_prefix("start:") {
                start = Some(rest.trim().to_string());
            } else {
                rule_lines.push((line, content.to_string()));
            }
        }

        let header_err = |name: &str| GrammarError::Parse {
            line: 0,
            reason: format!("missing '{name}:' header line"),
        };
        let alphabet = alphabet.ok_or_else(|| header_err("alphabet"))?;
        let vt = vt.ok_or_else(|| header_err("vt"))?;
        let vn = vn.ok_or_else(|| header_err("vn"))?;
        let start = start.ok_or_else(|| header_err("start"))?;

        let nt_id = |name: &str, line: usize| -> Result<NtId, GrammarError> {
            if let Some(i) = vt.iter().position(|n| n == name) {
                Ok(NtId(i))
            } else if let Some(i) = vn.iter().position(|n| n == name) {
                Ok(NtId(vt.len() + i))
            } else {
                Err(GrammarError::Parse {
                    line,
                    reason: format!("undeclared non-terminal '{name}'"),
                })
            }
        };

        let mut rules = Vec::with_capacity(rule_lines.len());
        for (line, content) in rule_lines {
            let err = |reason: String| GrammarError::Parse { line, reason };
            let (head, prob_str) = content
                .rsplit_once(':')
                .ok_or_else(|| err("expected ': <prob>' at end of rule".into()))?;
            let prob: f64 = prob_str
                .trim()
                .parse()
                .map_err(|_| err(format!("bad probability '{}'", prob_str.trim())))?;
            let (lhs_part, rhs_part) = head
                .split_once("->")
                .ok_or_else(|| err("expected '->' in rule".into()))?;
            let mut lhs_tokens = lhs_part.split_whitespace();
            let kind = lhs_tokens
                .next()
                .ok_or_else(|| err("missing rule kind".into()))?;
            let lhs_name = lhs_tokens
                .next()
                .ok_or_else(|| err("missing rule lhs".into()))?;
            if lhs_tokens.next().is_some() {
                return Err(err("unexpected tokens before '->'".into()));
            }
            let lhs = nt_id(lhs_name, line)?;
            let rhs_tokens: Vec<&str> = rhs_part.split_whitespace().collect();
            let rhs = match kind {
                "lexical" => {
                    if rhs_tokens.len() != 1 || rhs_tokens[0].chars().count() != 1 {
                        return Err(err("lexical rhs must be a single terminal symbol".into()));
                    }
                    let c = rhs_tokens[0].chars().next().unwrap();
                    let t = alphabet
                        .term(c)
                        .ok_or_else(|| err(format!("terminal '{c}' not in alphabet")))?;
                    RuleRhs::Lexical(t)
                }
                "branching" => {
                    if rhs_tokens.len() != 2 {
                        return Err(err("branching rhs must have two symbols".into()));
                    }
                    RuleRhs::Branching(nt_id(rhs_tokens[0], line)?, nt_id(rhs_tokens[1], line)?)
                }
                "contact" => {
                    if rhs_tokens.len() != 3 {
                        return Err(err("contact rhs must have three symbols".into()));
                    }
                    RuleRhs::Contact(
                        nt_id(rhs_tokens[0], line)?,
                        nt_id(rhs_tokens[1], line)?,
                        nt_id(rhs_tokens[2], line)?,
                    )
                }
                other => return Err(err(format!("unknown rule kind '{other}'"))),
            };
            rules.push(Rule { lhs, rhs, prob });
        }
        Grammar::new(alphabet, vt, vn, &start, rules)
    }
}
