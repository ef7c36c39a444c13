use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty input")]
    Empty,
    #[error("unbalanced parentheses at byte {0}")]
    Unbalanced(usize),
    #[error("empty label at byte {0}")]
    EmptyLabel(usize),
    #[error("expected '(' at byte {0}")]
    ExpectedOpen(usize),
    #[error("trailing input at byte {0}")]
    Trailing(usize),
    #[error("invalid label {0:?}")]
    InvalidLabel(String),
}

/// Ordered, labeled, rooted tree in constituency-parse shape.
///
/// Labels are non-empty and never contain whitespace or parentheses, so
/// every tree has exactly one canonical bracket string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    label: String,
    children: Vec<ParseTree>,
}

fn label_ok(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(|c| c.is_whitespace() || c == '(' || c == ')')
}

impl ParseTree {
    pub fn new(label: impl Into<String>, children: Vec<ParseTree>) -> Result<Self, TreeError> {
        let label = label.into();
        if !label_ok(&label) {
            return Err(TreeError::InvalidLabel(label));
        }
        Ok(ParseTree { label, children })
    }

    pub fn leaf(label: impl Into<String>) -> Result<Self, TreeError> {
        Self::new(label, Vec::new())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn children(&self) -> &[ParseTree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ParseTree::node_count).sum::<usize>()
    }

    /// Number of layers; a lone root has depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ParseTree::depth).max().unwrap_or(0)
    }

    /// Pre-order iterator over all nodes.
    pub fn nodes(&self) -> impl Iterator<Item = &ParseTree> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    /// Canonical bracket form. Leaf nodes that are the only child of their
    /// parent print bare (`(NN cat)`); every other node is parenthesized.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.write_node(&mut out, true);
        out
    }

    fn write_node(&self, out: &mut String, bracketed: bool) {
        if !bracketed {
            out.push_str(&self.label);
            return;
        }
        out.push('(');
        out.push_str(&self.label);
        let bare_child = self.children.len() == 1 && self.children[0].is_leaf();
        for child in &self.children {
            out.push(' ');
            child.write_node(out, !bare_child);
        }
        out.push(')');
    }

    /// Copy keeping only the first `k` layers (the root is layer 1).
    pub fn truncate_layers(&self, k: usize) -> ParseTree {
        assert!(k >= 1, "layer count must be positive");
        ParseTree {
            label: self.label.clone(),
            children: if k == 1 {
                Vec::new()
            } else {
                self.children.iter().map(|c| c.truncate_layers(k - 1)).collect()
            },
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl std::str::FromStr for ParseTree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bracket(s)
    }
}

/// Parses a single parenthesized expression such as
/// `(S (NP (DT The) (NN cat)) (VP (VBD sat)))`.
pub fn parse_bracket(text: &str) -> Result<ParseTree, TreeError> {
    let bytes = text.as_bytes();
    let skip_ws = |mut i: usize| {
        while i < bytes.len() {
            match text[i..].chars().next() {
                Some(c) if c.is_whitespace() => i += c.len_utf8(),
                _ => break,
            }
        }
        i
    };
    let read_atom = |start: usize| {
        let mut end = start;
        for c in text[start..].chars() {
            if c.is_whitespace() || c == '(' || c == ')' {
                break;
            }
            end += c.len_utf8();
        }
        end
    };

    let mut pos = skip_ws(0);
    if pos == bytes.len() {
        return Err(TreeError::Empty);
    }
    if bytes[pos] != b'(' {
        return Err(TreeError::ExpectedOpen(pos));
    }

    // Stack of partially built nodes; the root is finished when it pops.
    let mut stack: Vec<ParseTree> = Vec::new();
    loop {
        pos = skip_ws(pos);
        if pos == bytes.len() {
            return Err(TreeError::Unbalanced(pos));
        }
        match bytes[pos] {
            b'(' => {
                let open = pos;
                pos = skip_ws(pos + 1);
                let end = read_atom(pos);
                if end == pos {
                    return Err(TreeError::EmptyLabel(open));
                }
                stack.push(ParseTree {
                    label: text[pos..end].to_string(),
                    children: Vec::new(),
                });
                pos = end;
            }
            b')' => {
                let node = stack.pop().ok_or(TreeError::Unbalanced(pos))?;
                pos += 1;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => {
                        let rest = skip_ws(pos);
                        if rest != bytes.len() {
                            return Err(TreeError::Trailing(rest));
                        }
                        return Ok(node);
                    }
                }
            }
            _ => {
                let end = read_atom(pos);
                let parent = stack.last_mut().ok_or(TreeError::ExpectedOpen(pos))?;
                parent.children.push(ParseTree {
                    label: text[pos..end].to_string(),
                    children: Vec::new(),
                });
                pos = end;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let t = parse_bracket("(A)").unwrap();
        assert_eq!(t.label(), "A");
        assert!(t.is_leaf());
        assert_eq!(t.serialize(), "(A)");
    }

    #[test]
    fn small_tree_shape() {
        let t = parse_bracket("(A (B x) (C y))").unwrap();
        assert_eq!(t.node_count(), 5);
        let labels: Vec<_> = t.nodes().map(ParseTree::label).collect();
        assert_eq!(labels, ["A", "B", "x", "C", "y"]);
        assert_eq!(t.children()[0].children()[0].label(), "x");
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(parse_bracket("(A (B"), Err(TreeError::Unbalanced(5)));
        assert_eq!(parse_bracket("( )"), Err(TreeError::EmptyLabel(0)));
        assert_eq!(parse_bracket("(A) (B)"), Err(TreeError::Trailing(4)));
        assert_eq!(parse_bracket("(A))"), Err(TreeError::Trailing(3)));
        assert_eq!(parse_bracket("   "), Err(TreeError::Empty));
        assert_eq!(parse_bracket("x"), Err(TreeError::ExpectedOpen(0)));
        assert!(matches!(parse_bracket("(A (( x)))"), Err(TreeError::EmptyLabel(3))));
    }

    #[test]
    fn canonical_form() {
        let t = ParseTree::new("A", vec![ParseTree::leaf("x").unwrap()]).unwrap();
        assert_eq!(t.serialize(), "(A x)");
        assert_eq!(parse_bracket("( A  ( B  x ) )").unwrap().serialize(), "(A (B x))");
        assert_eq!(parse_bracket("(S (A) (B))").unwrap().serialize(), "(S (A) (B))");
        assert_eq!(
            parse_bracket("(S\n  (NP -LRB- )\t)").unwrap().serialize(),
            "(S (NP -LRB-))"
        );
    }

    #[test]
    fn serialize_parse_is_fixed_point() {
        for s in [
            "(S (NP (DT The) (NN cat)) (VP (VBD sat)))",
            "(A (B) (C))",
            "(A (B (D)) (C))",
            "(ROOT (S (NP (PRP I)) (VP (VBP like) (NP (NNS trees))) (. .)))",
        ] {
            let once = parse_bracket(s).unwrap().serialize();
            let twice = parse_bracket(&once).unwrap().serialize();
            assert_eq!(once, twice);
            assert_eq!(parse_bracket(&once).unwrap(), parse_bracket(s).unwrap());
        }
    }

    #[test]
    fn truncation() {
        let t = parse_bracket("(A (B (C (D))))").unwrap();
        assert_eq!(t.truncate_layers(3).serialize(), "(A (B C))");
        assert_eq!(t.truncate_layers(4), t);
        assert_eq!(t.truncate_layers(10), t);
        assert_eq!(t.truncate_layers(1).serialize(), "(A)");
        assert_eq!(t.depth(), 4);
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(ParseTree::leaf("").is_err());
        assert!(ParseTree::leaf("a b").is_err());
        assert!(ParseTree::leaf("(x").is_err());
    }
}
