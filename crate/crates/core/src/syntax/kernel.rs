use std::collections::HashSet;
use std::hash::Hash;

use super::ParseTree;

/// Canonical strings of every complete subtree, one entry per distinct string.
pub fn enumerate_subtrees(tree: &ParseTree) -> HashSet<String> {
    tree.nodes().map(ParseTree::serialize).collect()
}

/// Distinct `(ancestor, descendant)` label pairs over all strict
/// ancestor–descendant relations.
pub fn enumerate_node_pairs(tree: &ParseTree) -> HashSet<(String, String)> {
    let mut out = HashSet::new();
    let mut path: Vec<&str> = Vec::new();
    collect_pairs(tree, &mut path, &mut out);
    out
}

fn collect_pairs<'a>(node: &'a ParseTree, ancestors: &mut Vec<&'a str>, out: &mut HashSet<(String, String)>) {
    for anc in ancestors.iter() {
        out.insert((anc.to_string(), node.label().to_string()));
    }
    ancestors.push(node.label());
    for child in node.children() {
        collect_pairs(child, ancestors, out);
    }
    ancestors.pop();
}

/// `1 - |A ∩ B| / |A ∪ B|`, taken as 0 when both sets are empty.
pub fn jaccard_distance<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        1.0 - inter as f64 / union as f64
    }
}

pub fn st_kernel_score(a: &ParseTree, b: &ParseTree) -> f64 {
    jaccard_distance(&enumerate_subtrees(a), &enumerate_subtrees(b))
}

pub fn np_kernel_score(a: &ParseTree, b: &ParseTree) -> f64 {
    jaccard_distance(&enumerate_node_pairs(a), &enumerate_node_pairs(b))
}
