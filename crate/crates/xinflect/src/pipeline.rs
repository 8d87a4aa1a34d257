//! X-inflection: rewrite the FORM column of a source treebank with forms
//! produced by a target-language inflector applied to each token's lemma
//! and converted morphological tag.
//!
//! Everything except FORM (and a `XInflected=Yes` MISC marker on changed
//! tokens) is preserved bit for bit: ids, heads, deprels, lemmas, UPOS,
//! FEATS, comments, and the opaque MWT/empty-node payloads.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::conllu::{Treebank, EMPTY};
use crate::inflector::{inflect, InflectorModel, Provenance};
use crate::schema::{ud_to_um, ConversionTable};

/// Per-token outcome counts for one x-inflection run.
///
/// `tokens_total` partitions into `tokens_replaced + tokens_copied +
/// tokens_skipped_pos + tokens_skipped_noconv + tokens_empty_lemma`;
/// `tokens_eligible` is the part that reached the inflector
/// (`replaced + copied`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct XInflectionStats {
    pub tokens_total: usize,
    pub tokens_eligible: usize,
    /// Inflector produced a form (memory, rule or backoff provenance).
    pub tokens_replaced: usize,
    /// Inflector fell back to copying the lemma.
    pub tokens_copied: usize,
    /// UPOS not in the covered set.
    pub tokens_skipped_pos: usize,
    /// UPOS maps to no UniMorph POS.
    pub tokens_skipped_noconv: usize,
    /// Lemma column empty (`_`): nothing to transduce.
    pub tokens_empty_lemma: usize,
    pub provenance_memory: usize,
    pub provenance_rule: usize,
    pub provenance_backoff: usize,
    pub provenance_copy: usize,
}

impl XInflectionStats {
    pub fn replacement_rate(&self) -> f64 {
        if self.tokens_total == 0 {
            0.0
        } else {
            self.tokens_replaced as f64 / self.tokens_total as f64
        }
    }

    /// Flat `key=value` block, one line per field, fixed key names.
    pub fn to_kv(&self) -> String {
        format!(
            "tokens_total={}\ntokens_eligible={}\ntokens_replaced={}\ntokens_copied={}\n\
             tokens_skipped_pos={}\ntokens_skipped_noconv={}\ntokens_empty_lemma={}\n\
             provenance_memory={}\nprovenance_rule={}\nprovenance_backoff={}\n\
             provenance_copy={}\nreplacement_rate={:.4}\n",
            self.tokens_total,
            self.tokens_eligible,
            self.tokens_replaced,
            self.tokens_copied,
            self.tokens_skipped_pos,
            self.tokens_skipped_noconv,
            self.tokens_empty_lemma,
            self.provenance_memory,
            self.provenance_rule,
            self.provenance_backoff,
            self.provenance_copy,
            self.replacement_rate()
        )
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("stats serialize");
        value["replacement_rate"] =
            serde_json::Value::from((self.replacement_rate() * 1e4).round() / 1e4);
        serde_json::to_string_pretty(&value).expect("stats serialize")
    }
}

/// Produce the x-inflected copy of `source` and the outcome counts.
///
/// A token's FORM is rewritten iff its UPOS is in `covered`, its tag
/// converts, and its lemma is non-empty; otherwise the skip reason is
/// counted and the token is untouched.
pub fn xinflect_treebank(
    source: &Treebank,
    model: &InflectorModel,
    table: &ConversionTable,
    covered: &BTreeSet<String>,
) -> (Treebank, XInflectionStats) {
    let mut out = source.clone();
    let mut stats = XInflectionStats::default();

    for sentence in &mut out.sentences {
        for token in &mut sentence.tokens {
            stats.tokens_total += 1;
            if !covered.contains(&token.upos) {
                stats.tokens_skipped_pos += 1;
                continue;
            }
            let tag = match ud_to_um(&token.upos, &token.feats, table).tag {
                Some(tag) => tag,
                None => {
                    stats.tokens_skipped_noconv += 1;
                    continue;
                }
            };
            if token.lemma.is_empty() || token.lemma == EMPTY {
                stats.tokens_empty_lemma += 1;
                continue;
            }

            let (form, provenance) = inflect(model, &token.lemma, &tag);
            stats.tokens_eligible += 1;
            match provenance {
                Provenance::Memory => {
                    stats.tokens_replaced += 1;
                    stats.provenance_memory += 1;
                }
                Provenance::Rule => {
                    stats.tokens_replaced += 1;
                    stats.provenance_rule += 1;
                }
                Provenance::Backoff => {
                    stats.tokens_replaced += 1;
                    stats.provenance_backoff += 1;
                }
                Provenance::Copy => {
                    stats.tokens_copied += 1;
                    stats.provenance_copy += 1;
                }
            }

            let form = match_sentence_initial_case(token.id, &token.form, form);
            if form != token.form {
                token.misc = add_misc_marker(&token.misc);
                token.form = form;
            }
        }
    }
    (out, stats)
}

/// Sentence-initial tokens keep their capitalization: when the original
/// form starts uppercase and the inflected one starts lowercase, the first
/// letter is uppercased. Everything else is emitted verbatim.
fn match_sentence_initial_case(id: usize, original: &str, inflected: String) -> String {
    if id != 1 {
        return inflected;
    }
    let orig_upper = original.chars().next().is_some_and(char::is_uppercase);
    let new_lower = inflected.chars().next().is_some_and(char::is_lowercase);
    if orig_upper && new_lower {
        let mut chars = inflected.chars();
        let first = chars.next().unwrap();
        first.to_uppercase().chain(chars).collect()
    } else {
        inflected
    }
}

fn add_misc_marker(misc: &str) -> String {
    if misc.is_empty() || misc == EMPTY {
        "XInflected=Yes".to_string()
    } else {
        format!("{misc}|XInflected=Yes")
    }
}

/// Human-readable run summary including the replacement rate.
pub fn xinflect_report(stats: &XInflectionStats) -> String {
    format!(
        "{} tokens: {} replaced, {} copied, {} skipped (pos), {} skipped (no conversion), \
         {} empty lemma\nprovenance: memory={} rule={} backoff={} copy={}\n{:.1}% replaced\n",
        stats.tokens_total,
        stats.tokens_replaced,
        stats.tokens_copied,
        stats.tokens_skipped_pos,
        stats.tokens_skipped_noconv,
        stats.tokens_empty_lemma,
        stats.provenance_memory,
        stats.provenance_rule,
        stats.provenance_backoff,
        stats.provenance_copy,
        stats.replacement_rate() * 100.0
    )
}
