//! Attachment-score evaluation.

use crate::conllu::Treebank;
use crate::error::{Error, Result};

/// Attachment counts for a gold/predicted treebank pair. All basic tokens
/// are scored, punctuation included; MWT ranges and empty nodes are not
/// basic tokens and never enter the counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalResult {
    pub correct_heads: usize,
    pub correct_labeled: usize,
    pub total: usize,
}

impl EvalResult {
    /// Unlabeled attachment score in [0, 100].
    pub fn uas(&self) -> f64 {
        100.0 * self.correct_heads as f64 / self.total as f64
    }

    /// Labeled attachment score in [0, 100].
    pub fn las(&self) -> f64 {
        100.0 * self.correct_labeled as f64 / self.total as f64
    }
}

/// Count head and head+deprel matches. Errors if the treebanks are not
/// sentence- and token-aligned, naming the first mismatch.
pub fn attachment_scores(gold: &Treebank, pred: &Treebank) -> Result<EvalResult> {
    if gold.len() != pred.len() {
        return Err(Error::usage(format!(
            "attachment_scores: gold has {} sentences, pred has {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut result = EvalResult {
        correct_heads: 0,
        correct_labeled: 0,
        total: 0,
    };
    for (i, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(Error::usage(format!(
                "attachment_scores: sentence {}: gold has {} tokens, pred has {}",
                i + 1,
                g.len(),
                p.len()
            )));
        }
        for (gt, pt) in g.tokens.iter().zip(&p.tokens) {
            result.total += 1;
            if gt.head == pt.head {
                result.correct_heads += 1;
                if gt.deprel == pt.deprel {
                    result.correct_labeled += 1;
                }
            }
        }
    }
    if result.total == 0 {
        return Err(Error::usage("attachment_scores: no tokens to score"));
    }
    Ok(result)
}
