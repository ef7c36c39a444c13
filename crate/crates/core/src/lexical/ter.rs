//! Translation edit rate: word edits plus block shifts, normalized by
//! reference length.
//!
//! Shifts are chosen greedily in the tercom style. Each round enumerates
//! hypothesis spans that also occur in the reference, tries moving each to
//! positions implied by the current alignment, and applies the single move
//! that lowers the edit distance the most. The loop stops when no move helps.

use super::{LexicalError, TokenSeq};

const MAX_SHIFT_SIZE: usize = 10;
const MAX_SHIFT_DIST: usize = 50;
const MAX_SHIFT_CANDIDATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Sub,
    /// hypothesis word with no reference counterpart
    Ins,
    /// reference word missing from the hypothesis
    Del,
}

/// Levenshtein distance plus an edit trace (reference → hypothesis order).
fn edit_trace(hyp: &[&str], reference: &[&str]) -> (usize, Vec<Op>) {
    let (n, m) = (hyp.len(), reference.len());
    let w = m + 1;
    let mut dp = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        dp[i * w] = i;
    }
    for (j, cell) in dp.iter_mut().take(w).enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = dp[(i - 1) * w + j - 1] + usize::from(hyp[i - 1] != reference[j - 1]);
            let ins = dp[(i - 1) * w + j] + 1;
            let del = dp[i * w + j - 1] + 1;
            dp[i * w + j] = diag.min(ins).min(del);
        }
    }
    let mut trace = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * w + j];
        if i > 0 && j > 0 {
            let same = hyp[i - 1] == reference[j - 1];
            if dp[(i - 1) * w + j - 1] + usize::from(!same) == here {
                trace.push(if same { Op::Match } else { Op::Sub });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && dp[i * w + j - 1] + 1 == here {
            trace.push(Op::Del);
            j -= 1;
        } else {
            trace.push(Op::Ins);
            i -= 1;
        }
    }
    trace.reverse();
    (dp[n * w + m], trace)
}

struct Alignment {
    /// reference position → hypothesis position (-1 before the first word)
    ref_to_hyp: Vec<isize>,
    ref_err: Vec<bool>,
    hyp_err: Vec<bool>,
}

fn alignment(trace: &[Op], ref_len: usize) -> Alignment {
    let mut ref_to_hyp = vec![0isize; ref_len];
    let mut ref_err = Vec::with_capacity(ref_len);
    let mut hyp_err = Vec::new();
    let (mut ph, mut pr) = (-1isize, -1isize);
    for op in trace {
        match op {
            Op::Match | Op::Sub => {
                ph += 1;
                pr += 1;
                ref_to_hyp[pr as usize] = ph;
                let err = *op == Op::Sub;
                ref_err.push(err);
                hyp_err.push(err);
            }
            Op::Ins => {
                ph += 1;
                hyp_err.push(true);
            }
            Op::Del => {
                pr += 1;
                ref_to_hyp[pr as usize] = ph;
                ref_err.push(true);
            }
        }
    }
    Alignment {
        ref_to_hyp,
        ref_err,
        hyp_err,
    }
}

fn perform_shift<'a>(words: &[&'a str], start: usize, len: usize, target: usize) -> Vec<&'a str> {
    let mut out = Vec::with_capacity(words.len());
    if target < start {
        out.extend_from_slice(&words[..target]);
        out.extend_from_slice(&words[start..start + len]);
        out.extend_from_slice(&words[target..start]);
        out.extend_from_slice(&words[start + len..]);
    } else if target > start + len {
        out.extend_from_slice(&words[..start]);
        out.extend_from_slice(&words[start + len..target]);
        out.extend_from_slice(&words[start..start + len]);
        out.extend_from_slice(&words[target..]);
    } else {
        let mid_end = (len + target).min(words.len());
        out.extend_from_slice(&words[..start]);
        out.extend_from_slice(&words[start + len..mid_end]);
        out.extend_from_slice(&words[start..start + len]);
        out.extend_from_slice(&words[mid_end..]);
    }
    out
}

/// Every `(hyp start, ref start, length)` with matching spans.
fn shifted_pairs(hyp: &[&str], reference: &[&str]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for sh in 0..hyp.len() {
        for sr in 0..reference.len() {
            if sh.abs_diff(sr) > MAX_SHIFT_DIST {
                continue;
            }
            let mut len = 0;
            while len < MAX_SHIFT_SIZE
                && sh + len < hyp.len()
                && sr + len < reference.len()
                && hyp[sh + len] == reference[sr + len]
            {
                len += 1;
                out.push((sh, sr, len));
            }
        }
    }
    out
}

struct Candidate<'a> {
    gain: usize,
    len: usize,
    start: usize,
    target: usize,
    words: Vec<&'a str>,
}

impl Candidate<'_> {
    /// Larger gain, then longer span, then earlier start, then earlier target.
    fn beats(&self, other: &Candidate<'_>) -> bool {
        (
            self.gain,
            self.len,
            std::cmp::Reverse(self.start),
            std::cmp::Reverse(self.target),
        )
            .cmp(&(
                other.gain,
                other.len,
                std::cmp::Reverse(other.start),
                std::cmp::Reverse(other.target),
            ))
            .then_with(|| self.words.cmp(&other.words))
            .is_gt()
    }
}

fn best_shift<'a>(hyp: &[&'a str], reference: &[&str], checked: &mut usize) -> Option<(usize, Vec<&'a str>)> {
    let (score, trace) = edit_trace(hyp, reference);
    let al = alignment(&trace, reference.len());
    let mut best: Option<Candidate<'a>> = None;

    for (sh, sr, len) in shifted_pairs(hyp, reference) {
        if !al.hyp_err[sh..sh + len].iter().any(|&e| e) {
            continue;
        }
        if !al.ref_err[sr..sr + len].iter().any(|&e| e) {
            continue;
        }
        let aligned = al.ref_to_hyp[sr];
        if aligned >= sh as isize && aligned < (sh + len) as isize {
            continue;
        }
        let mut prev_idx: Option<usize> = None;
        for offset in -1isize..len as isize {
            let pos = sr as isize + offset;
            let idx = if pos == -1 {
                0
            } else if (pos as usize) < reference.len() {
                (al.ref_to_hyp[pos as usize] + 1) as usize
            } else {
                break;
            };
            if prev_idx == Some(idx) {
                continue;
            }
            prev_idx = Some(idx);
            let words = perform_shift(hyp, sh, len, idx);
            let (new_score, _) = edit_trace(&words, reference);
            *checked += 1;
            let cand = Candidate {
                gain: score.saturating_sub(new_score),
                len,
                start: sh,
                target: idx,
                words,
            };
            if new_score < score && best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
        if *checked >= MAX_SHIFT_CANDIDATES {
            break;
        }
    }
    best.map(|b| (b.gain, b.words))
}

/// Shift and edit counts for a hypothesis against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerCounts {
    pub shifts: usize,
    pub edits: usize,
    pub ref_len: usize,
}

impl TerCounts {
    pub fn rate(&self) -> f64 {
        (self.shifts + self.edits) as f64 / self.ref_len as f64
    }
}

pub fn ter_counts(reference: &[String], hyp: &[String]) -> TerCounts {
    let reference: Vec<&str> = reference.iter().map(String::as_str).collect();
    let mut words: Vec<&str> = hyp.iter().map(String::as_str).collect();
    let mut shifts = 0;
    let mut checked = 0;
    while let Some((gain, shifted)) = best_shift(&words, &reference, &mut checked) {
        if checked >= MAX_SHIFT_CANDIDATES || gain == 0 {
            break;
        }
        shifts += 1;
        words = shifted;
    }
    let (edits, _) = edit_trace(&words, &reference);
    TerCounts {
        shifts,
        edits,
        ref_len: reference.len(),
    }
}

/// Translation edit rate of `hyp` against `reference`; may exceed 1.
pub fn ter(reference: &TokenSeq, hyp: &TokenSeq) -> Result<f64, LexicalError> {
    if reference.is_empty() {
        return Err(LexicalError::EmptyReference("ter"));
    }
    Ok(ter_counts(reference, hyp).rate())
}
