//! Constituency trees in bracket notation and the syntactic diversity
//! scores computed over them: full and three-layer tree edit distance, and
//! Jaccard distances over complete subtrees and ancestor/descendant label
//! pairs.

mod kernel;
mod ted;
mod tree;

pub use kernel::{enumerate_node_pairs, enumerate_subtrees, jaccard_distance, np_kernel_score, st_kernel_score};
pub use ted::ted;
pub use tree::{parse_bracket, ParseTree, TreeError};

use serde::Serialize;

/// Layers kept by [`ted_3`].
pub const TED_LAYERS: usize = 3;

/// Edit distance between the trees cut down to their first three layers.
pub fn ted_3(a: &ParseTree, b: &ParseTree) -> usize {
    ted(&a.truncate_layers(TED_LAYERS), &b.truncate_layers(TED_LAYERS))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntaxScores {
    pub ted_f: usize,
    pub ted_3: usize,
    pub st_kernel: f64,
    pub np_kernel: f64,
}

pub fn syntax_scores(source: &ParseTree, paraphrase: &ParseTree) -> SyntaxScores {
    SyntaxScores {
        ted_f: ted(source, paraphrase),
        ted_3: ted_3(source, paraphrase),
        st_kernel: st_kernel_score(source, paraphrase),
        np_kernel: np_kernel_score(source, paraphrase),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> ParseTree {
        parse_bracket(s).unwrap()
    }

    #[test]
    fn ted_3_ignores_deep_differences() {
        let a = t("(S (NP (DT the) (NN cat)) (VP (VBD sat)))");
        let b = t("(S (NP (DT a) (NN dog)) (VP (VBD ran)))");
        assert!(ted(&a, &b) > 0);
        assert_eq!(ted_3(&a, &b), 0);
        assert_eq!(ted_3(&a, &a), 0);
        let c = t("(SQ (NP (DT the) (NN cat)) (VP (VBD sat)))");
        assert_eq!(ted_3(&a, &c), 1);
    }

    #[test]
    fn identity_scores_are_zero() {
        let a = t("(ROOT (S (NP (PRP I)) (VP (VBP like) (NP (NNS trees)))))");
        let s = syntax_scores(&a, &a);
        assert_eq!(
            s,
            SyntaxScores {
                ted_f: 0,
                ted_3: 0,
                st_kernel: 0.0,
                np_kernel: 0.0
            }
        );
    }
}
