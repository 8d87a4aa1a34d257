//! A lemma+tag → form inflector learned from UniMorph triples.
//!
//! The model memorizes training triples and extracts suffix-transduction
//! rules: for each triple, the longest common prefix of lemma and form
//! splits both into `prefix + lemma_suffix` / `prefix + form_suffix`, and
//! `(lemma_suffix -> form_suffix)` becomes a rule keyed by the tag string.
//! Lookup falls back from memory to exact-tag rules to generalized tags
//! (features dropped right to left) and finally copies the lemma, so
//! inflection is total.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::unimorph::{MorphTag, UMLexicon};

/// How an output form was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Memory,
    Rule,
    Backoff,
    Copy,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Memory => "memory",
            Provenance::Rule => "rule",
            Provenance::Backoff => "backoff",
            Provenance::Copy => "copy",
        };
        f.write_str(s)
    }
}

/// A suffix transduction: replace `lemma_suffix` with `form_suffix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub lemma_suffix: String,
    pub form_suffix: String,
    pub support: usize,
}

/// Tag generalization policy for rule lookup. v1 models drop trailing
/// features one at a time until only the POS remains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backoff {
    #[default]
    DropTrailingFeatures,
}

/// A trained inflector.
#[derive(Debug, Clone, PartialEq)]
pub struct InflectorModel {
    pub language: String,
    pub backoff: Backoff,
    memory: HashMap<(String, String), String>,
    rules: HashMap<String, Vec<SuffixRule>>,
}

impl InflectorModel {
    /// An empty model: every lookup copies the lemma.
    pub fn empty(language: &str) -> Self {
        InflectorModel {
            language: language.to_string(),
            backoff: Backoff::default(),
            memory: HashMap::new(),
            rules: HashMap::new(),
        }
    }

    pub fn memory_len(&self) -> usize {
        self.memory.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.values().map(Vec::len).sum()
    }
}

/// Rule order within a tag: longest lemma suffix first (most specific),
/// then higher support, then lexicographic form suffix, then lemma suffix.
/// The first match in this order is the applied rule.
fn rule_order(a: &SuffixRule, b: &SuffixRule) -> std::cmp::Ordering {
    b.lemma_suffix
        .chars()
        .count()
        .cmp(&a.lemma_suffix.chars().count())
        .then_with(|| b.support.cmp(&a.support))
        .then_with(|| a.form_suffix.cmp(&b.form_suffix))
        .then_with(|| a.lemma_suffix.cmp(&b.lemma_suffix))
}

fn common_prefix_bytes(a: &str, b: &str) -> usize {
    let mut n = 0;
    for (ca, cb) in a.chars().zip(b.chars()) {
        if ca != cb {
            break;
        }
        n += ca.len_utf8();
    }
    n
}

/// Train a model: memorize every triple (last wins on conflicting forms,
/// with a warning) and aggregate suffix rules per tag string.
pub fn train_inflector(train: &UMLexicon) -> InflectorModel {
    let mut model = InflectorModel::empty(&train.language);
    let mut support: HashMap<String, HashMap<(String, String), usize>> = HashMap::new();

    for t in &train.triples {
        let tag = t.tag.render();
        let key = (t.lemma.clone(), tag.clone());
        if let Some(old) = model.memory.get(&key) {
            if old != &t.form {
                log::warn!(
                    "train_inflector: ({}, {}) maps to both {:?} and {:?}; keeping the latter",
                    t.lemma,
                    tag,
                    old,
                    t.form
                );
            }
        }
        model.memory.insert(key, t.form.clone());

        let p = common_prefix_bytes(&t.lemma, &t.form);
        let pair = (t.lemma[p..].to_string(), t.form[p..].to_string());
        *support.entry(tag).or_default().entry(pair).or_insert(0) += 1;
    }

    for (tag, pairs) in support {
        let mut list: Vec<SuffixRule> = pairs
            .into_iter()
            .map(|((lemma_suffix, form_suffix), support)| SuffixRule {
                lemma_suffix,
                form_suffix,
                support,
            })
            .collect();
        list.sort_by(rule_order);
        model.rules.insert(tag, list);
    }
    model
}

fn apply_rules(model: &InflectorModel, lemma: &str, tag: &str) -> Option<String> {
    let list = model.rules.get(tag)?;
    let rule = list.iter().find(|r| lemma.ends_with(&r.lemma_suffix))?;
    let stem = &lemma[..lemma.len() - rule.lemma_suffix.len()];
    Some(format!("{stem}{}", rule.form_suffix))
}

/// Generalizations of a tag, dropping features right to left down to the
/// bare POS. The exact tag itself is not included.
fn backoff_tags(tag: &MorphTag) -> Vec<String> {
    let mut out = Vec::new();
    let mut features = tag.features.clone();
    while !features.is_empty() {
        features.pop();
        out.push(
            MorphTag {
                pos: tag.pos.clone(),
                features: features.clone(),
            }
            .render(),
        );
    }
    out
}

/// Inflect a lemma. Lookup order: memory, exact-tag rules, backoff-tag
/// rules, copy. Never fails.
pub fn inflect(model: &InflectorModel, lemma: &str, tag: &MorphTag) -> (String, Provenance) {
    let tag_str = tag.render();
    if let Some(form) = model.memory.get(&(lemma.to_string(), tag_str.clone())) {
        return (form.clone(), Provenance::Memory);
    }
    if let Some(form) = apply_rules(model, lemma, &tag_str) {
        return (form, Provenance::Rule);
    }
    match model.backoff {
        Backoff::DropTrailingFeatures => {
            for general in backoff_tags(tag) {
                if let Some(form) = apply_rules(model, lemma, &general) {
                    return (form, Provenance::Backoff);
                }
            }
        }
    }
    (lemma.to_string(), Provenance::Copy)
}

/// Exact-match accuracy over a held-out lexicon; duplicates are counted
/// each time. Errors on an empty test set.
pub fn evaluate_inflector(model: &InflectorModel, test: &UMLexicon) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::usage("evaluate_inflector: empty test set"));
    }
    let correct = test
        .triples
        .iter()
        .filter(|t| inflect(model, &t.lemma, &t.tag).0 == t.form)
        .count();
    Ok(correct as f64 / test.len() as f64)
}

const MODEL_MAGIC: &str = "xinflect-inflector";
const MODEL_VERSION: &str = "v1";

/// Serialize a model: a header line
/// `xinflect-inflector<TAB>v1<TAB>drop-last<TAB>language<TAB>n_memory<TAB>n_rules`,
/// then one `M<TAB>lemma<TAB>tag<TAB>form` line per memory entry (sorted)
/// and one `R<TAB>tag<TAB>lemma_suffix<TAB>form_suffix<TAB>support` line
/// per rule (tag-sorted, rule order within tags).
pub fn render_model(model: &InflectorModel) -> String {
    let mut out = format!(
        "{MODEL_MAGIC}\t{MODEL_VERSION}\tdrop-last\t{}\t{}\t{}\n",
        model.language,
        model.memory.len(),
        model.rule_count()
    );
    let mut mem: Vec<(&(String, String), &String)> = model.memory.iter().collect();
    mem.sort();
    for ((lemma, tag), form) in mem {
        out.push_str(&format!("M\t{lemma}\t{tag}\t{form}\n"));
    }
    let mut tags: Vec<&String> = model.rules.keys().collect();
    tags.sort();
    for tag in tags {
        for r in &model.rules[tag] {
            out.push_str(&format!(
                "R\t{tag}\t{}\t{}\t{}\n",
                r.lemma_suffix, r.form_suffix, r.support
            ));
        }
    }
    out
}

/// Parse the serialization produced by [`render_model`].
pub fn parse_model(text: &str, name: &str) -> Result<InflectorModel> {
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(name, 1, "empty model file"))?;
    let h: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    if h.len() != 6 || h[0] != MODEL_MAGIC {
        return Err(Error::parse(name, 1, "not an inflector model file"));
    }
    if h[1] != MODEL_VERSION {
        return Err(Error::parse(name, 1, format!("unsupported model version {:?}", h[1])));
    }
    if h[2] != "drop-last" {
        return Err(Error::parse(name, 1, format!("unsupported backoff {:?}", h[2])));
    }
    let mut model = InflectorModel::empty(h[3]);

    for (i, raw) in lines {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        match cols[0] {
            "M" if cols.len() == 4 => {
                model
                    .memory
                    .insert((cols[1].to_string(), cols[2].to_string()), cols[3].to_string());
            }
            "R" if cols.len() == 5 => {
                let support = cols[4].parse().map_err(|_| {
                    Error::parse(name, i + 1, "rule support is not an integer")
                })?;
                model.rules.entry(cols[1].to_string()).or_default().push(SuffixRule {
                    lemma_suffix: cols[2].to_string(),
                    form_suffix: cols[3].to_string(),
                    support,
                });
            }
            _ => {
                return Err(Error::parse(name, i + 1, format!("malformed model line {line:?}")))
            }
        }
    }
    for list in model.rules.values_mut() {
        list.sort_by(rule_order);
    }
    let (mem, rules): (usize, usize) = (
        h[4].parse().map_err(|_| Error::parse(name, 1, "bad memory count"))?,
        h[5].parse().map_err(|_| Error::parse(name, 1, "bad rule count"))?,
    );
    if model.memory.len() != mem || model.rule_count() != rules {
        return Err(Error::parse(
            name,
            1,
            format!(
                "header promises {mem} memory entries and {rules} rules, found {} and {}",
                model.memory.len(),
                model.rule_count()
            ),
        ));
    }
    Ok(model)
}

pub fn save_model(model: &InflectorModel, path: &Path) -> Result<()> {
    fs::write(path, render_model(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<InflectorModel> {
    let text = fs::read_to_string(path)?;
    parse_model(&text, &path.display().to_string())
}
