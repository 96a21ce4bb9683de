//! Parse trees, their unlabeled skeletons, and the bracketed text form.

use thiserror::Error;

use crate::grammar::{Grammar, NtId, RuleRhs, TermId};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("node '{0}' does not match any grammar rule")]
    NoMatchingRule(String),
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("bracketed tree, position {position}: {reason}")]
    Parse { position: usize, reason: String },
}

/// Labeled parse tree. Terminal leaves sit below their lexical non-terminal,
/// so a lexical rule application contributes one internal node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    Leaf(TermId),
    Node { label: NtId, children: Vec<ParseTree> },
}

/// Parse tree with non-leaf labels erased. Two parse trees that differ only
/// in internal labels map to the same skeleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ust {
    Leaf(TermId),
    Node(Vec<Ust>),
}

impl ParseTree {
    pub fn lexical(label: NtId, symbol: TermId) -> Self {
        ParseTree::Node {
            label,
            children: vec![ParseTree::Leaf(symbol)],
        }
    }

    pub fn children(&self) -> &[ParseTree] {
        match self {
            ParseTree::Leaf(_) => &[],
            ParseTree::Node { children, .. } => children,
        }
    }

    /// Terminal symbols left to right.
    pub fn leaf_symbols(&self) -> Vec<TermId> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<TermId>) {
        match self {
            ParseTree::Leaf(t) => out.push(*t),
            ParseTree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    pub fn yield_len(&self) -> usize {
        match self {
            ParseTree::Leaf(_) => 1,
            ParseTree::Node { children, .. } => children.iter().map(|c| c.yield_len()).sum(),
        }
    }

    /// Re-scores the tree node by node as a product of rule probabilities.
    /// Errors if some node does not correspond to a rule of `grammar`.
    pub fn probability(&self, grammar: &Grammar) -> Result<f64, TreeError> {
        match self {
            ParseTree::Leaf(_) => Err(TreeError::Malformed(
                "bare terminal leaf at rule position".into(),
            )),
            ParseTree::Node { label, children } => {
                let rhs = match children.as_slice() {
                    [ParseTree::Leaf(t)] => RuleRhs::Lexical(*t),
                    [a, b] => RuleRhs::Branching(a.label_or_err()?, b.label_or_err()?),
                    [a, m, b] => RuleRhs::Contact(
                        a.label_or_err()?,
                        m.label_or_err()?,
                        b.label_or_err()?,
                    ),
                    _ => {
                        return Err(TreeError::Malformed(format!(
                            "node with {} children",
                            children.len()
                        )))
                    }
                };
                let rule = grammar.find_rule(*label, &rhs).ok_or_else(|| {
                    TreeError::NoMatchingRule(grammar.nt_name(*label).to_string())
                })?;
                let mut p = rule.prob;
                if children.len() > 1 {
                    for c in children {
                        p *= c.probability(grammar)?;
                    }
                }
                Ok(p)
            }
        }
    }

    fn label_or_err(&self) -> Result<NtId, TreeError> {
        match self {
            ParseTree::Node { label, .. } => Ok(*label),
            ParseTree::Leaf(_) => Err(TreeError::Malformed(
                "terminal leaf where a non-terminal child was expected".into(),
            )),
        }
    }

    /// Skeleton of the tree: shape and leaves, labels erased.
    pub fn ust(&self) -> Ust {
        match self {
            ParseTree::Leaf(t) => Ust::Leaf(*t),
            ParseTree::Node { children, .. } => {
                Ust::Node(children.iter().map(|c| c.ust()).collect())
            }
        }
    }

    /// `(label (label leaf) ...)` on one line, labels from the grammar
    /// declaration.
    pub fn to_bracketed(&self, grammar: &Grammar) -> String {
        let mut out = String::new();
        self.write_bracketed(grammar, &mut out);
        out
    }

    fn write_bracketed(&self, grammar: &Grammar, out: &mut String) {
        match self {
            ParseTree::Leaf(t) => out.push(grammar.alphabet().symbol(*t)),
            ParseTree::Node { label, children } => {
                out.push('(');
                out.push_str(grammar.nt_name(*label));
                for c in children {
                    out.push(' ');
                    c.write_bracketed(grammar, out);
                }
                out.push(')');
            }
        }
    }

    pub fn from_bracketed(text: &str, grammar: &Grammar) -> Result<Self, TreeError> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let tree = parse_node(&tokens, &mut pos, grammar)?;
        if pos != tokens.len() {
            return Err(TreeError::Parse {
                position: tokens[pos].1,
                reason: "trailing input after tree".into(),
            });
        }
        Ok(tree)
    }
}

impl Ust {
    pub fn children(&self) -> &[Ust] {
        match self {
            Ust::Leaf(_) => &[],
            Ust::Node(children) => children,
        }
    }

    pub fn leaf_symbols(&self) -> Vec<TermId> {
        fn rec(u: &Ust, out: &mut Vec<TermId>) {
            match u {
                Ust::Leaf(t) => out.push(*t),
                Ust::Node(children) => children.iter().for_each(|c| rec(c, out)),
            }
        }
        let mut out = Vec::new();
        rec(self, &mut out);
        out
    }

    pub fn yield_len(&self) -> usize {
        match self {
            Ust::Leaf(_) => 1,
            Ust::Node(children) => children.iter().map(|c| c.yield_len()).sum(),
        }
    }
}

enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(Token<'_>, usize)> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                tokens.push((Token::Open, i));
                chars.next();
            }
            ')' => {
                tokens.push((Token::Close, i));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let start = i;
                let mut end = i + c.len_utf8();
                chars.next();
                while let Some(&(j, c2)) = chars.peek() {
                    if c2 == '(' || c2 == ')' || c2.is_whitespace() {
                        break;
                    }
                    end = j + c2.len_utf8();
                    chars.next();
                }
                tokens.push((Token::Atom(&text[start..end]), start));
            }
        }
    }
    tokens
}

fn parse_node(
    tokens: &[(Token<'_>, usize)],
    pos: &mut usize,
    grammar: &Grammar,
) -> Result<ParseTree, TreeError> {
    let err = |position: usize, reason: String| TreeError::Parse { position, reason };
    match tokens.get(*pos) {
        Some((Token::Open, _)) => {
            *pos += 1;
            let label = match tokens.get(*pos) {
                Some((Token::Atom(name), p)) => grammar
                    .nt_id(name)
                    .ok_or_else(|| err(*p, format!("unknown non-terminal '{name}'")))?,
                Some((_, p)) => return Err(err(*p, "expected node label".into())),
                None => return Err(err(0, "unexpected end of input".into())),
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some((Token::Close, _)) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_node(tokens, pos, grammar)?),
                    None => return Err(err(0, "unbalanced '('".into())),
                }
            }
            if children.is_empty() {
                return Err(err(0, format!("node '{}' has no children", grammar.nt_name(label))));
            }
            Ok(ParseTree::Node { label, children })
        }
        Some((Token::Atom(s), p)) => {
            if s.chars().count() != 1 {
                return Err(err(*p, format!("leaf '{s}' must be a single terminal symbol")));
            }
            let c = s.chars().next().unwrap();
            let t = grammar
                .alphabet()
                .term(c)
                .ok_or_else(|| err(*p, format!("terminal '{c}' not in alphabet")))?;
            *pos += 1;
            Ok(ParseTree::Leaf(t))
        }
        Some((Token::Close, p)) => Err(err(*p, "unexpected ')'".into())),
        None => Err(err(0, "empty input".into())),
    }
}
