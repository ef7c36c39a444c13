//! Ordered tree edit distance with unit costs (Zhang & Shasha, 1989).

use std::collections::HashMap;

use super::ParseTree;

/// Post-order flattening used by the dynamic program.
struct Indexed {
    /// label ids in post-order
    labels: Vec<u32>,
    /// leftmost leaf descendant of each node, post-order index
    lmd: Vec<usize>,
    keyroots: Vec<usize>,
}

impl Indexed {
    fn build(tree: &ParseTree, interner: &mut HashMap<String, u32>) -> Self {
        let mut labels = Vec::new();
        let mut lmd = Vec::new();
        fn walk(
            node: &ParseTree,
            interner: &mut HashMap<String, u32>,
            labels: &mut Vec<u32>,
            lmd: &mut Vec<usize>,
        ) -> usize {
            let mut leftmost = None;
            for child in node.children() {
                let l = walk(child, interner, labels, lmd);
                leftmost.get_or_insert(l);
            }
            let next = interner.len() as u32;
            let id = *interner.entry(node.label().to_string()).or_insert(next);
            let idx = labels.len();
            labels.push(id);
            let l = leftmost.unwrap_or(idx);
            lmd.push(l);
            l
        }
        walk(tree, interner, &mut labels, &mut lmd);

        // A keyroot is the highest node sharing its leftmost leaf.
        let n = labels.len();
        let mut seen = vec![false; n];
        let mut keyroots = Vec::new();
        for i in (0..n).rev() {
            if !seen[lmd[i]] {
                seen[lmd[i]] = true;
                keyroots.push(i);
            }
        }
        keyroots.sort_unstable();
        Indexed { labels, lmd, keyroots }
    }
}

/// Minimum number of node insertions, deletions and relabelings turning
/// `a` into `b`.
pub fn ted(a: &ParseTree, b: &ParseTree) -> usize {
    let mut interner = HashMap::new();
    let ta = Indexed::build(a, &mut interner);
    let tb = Indexed::build(b, &mut interner);
    let (n, m) = (ta.labels.len(), tb.labels.len());

    let mut tree_dist = vec![0usize; n * m];
    let mut forest = vec![0usize; (n + 1) * (m + 1)];
    let fw = m + 1;

    for &i in &ta.keyroots {
        for &j in &tb.keyroots {
            let (li, lj) = (ta.lmd[i], tb.lmd[j]);
            let rows = i - li + 2;
            let cols = j - lj + 2;
            // forest[x][y] covers a[li..li+x) and b[lj..lj+y)
            forest[0] = 0;
            for x in 1..rows {
                forest[x * fw] = forest[(x - 1) * fw] + 1;
            }
            for y in 1..cols {
                forest[y] = forest[y - 1] + 1;
            }
            for x in 1..rows {
                let ai = li + x - 1;
                for y in 1..cols {
                    let bj = lj + y - 1;
                    let del = forest[(x - 1) * fw + y] + 1;
                    let ins = forest[x * fw + y - 1] + 1;
                    let cell = if ta.lmd[ai] == li && tb.lmd[bj] == lj {
                        let relabel = usize::from(ta.labels[ai] != tb.labels[bj]);
                        let d = del.min(ins).min(forest[(x - 1) * fw + y - 1] + relabel);
                        tree_dist[ai * m + bj] = d;
                        d
                    } else {
                        let px = ta.lmd[ai] - li;
                        let py = tb.lmd[bj] - lj;
                        del.min(ins).min(forest[px * fw + py] + tree_dist[ai * m + bj])
                    };
                    forest[x * fw + y] = cell;
                }
            }
        }
    }
    tree_dist[(n - 1) * m + (m - 1)]
}
