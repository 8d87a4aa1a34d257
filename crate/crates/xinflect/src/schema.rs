//! UD to UniMorph tag conversion, including induction of language-pair
//! post-editing rules from (lemma, form) pairs attested in both resources.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::conllu::Treebank;
use crate::error::{Error, Result};
use crate::unimorph::{MorphTag, UMLexicon};

/// Canonical rendering order of UniMorph dimensions, with the member
/// features this toolkit can emit. Features outside the table (e.g. from
/// induced post-edit rules quoting language-specific gold features) sort
/// after all known dimensions, alphabetically.
const DIMENSIONS: &[(&str, &[&str])] = &[
    ("Finiteness", &["FIN", "NFIN", "PTCP", "GER", "CVB", "MSDR"]),
    ("Mood", &["IND", "SBJV", "IMP", "COND", "OPT", "POT", "OBLIG"]),
    ("Tense", &["PRS", "PST", "FUT"]),
    ("Aspect", &["IPFV", "PFV", "PRF", "PROG", "HAB", "ITER", "PROSP"]),
    ("Voice", &["ACT", "PASS", "MID", "RECP", "CAUS", "ANTIP"]),
    ("Person", &["0", "1", "2", "3", "4", "INCL", "EXCL"]),
    ("Animacy", &["ANIM", "INAN", "HUM", "NHUM"]),
    ("Gender", &["MASC", "FEM", "NEUT"]),
    (
        "Case",
        &[
            "NOM", "ACC", "ERG", "ABS", "GEN", "DAT", "INS", "VOC", "ABL", "LOC", "PRT", "ESS",
            "TRANS", "COM", "PRIV", "TERM", "IN+ESS", "IN+ABL", "IN+ALL", "AT+ESS", "AT+ABL",
            "AT+ALL", "ON+ESS", "ON+ABL", "ON+ALL",
        ],
    ),
    ("Definiteness", &["DEF", "NDEF", "SPEC"]),
    ("Comparison", &["CMPR", "SPRL", "EQT"]),
    ("Number", &["SG", "PL", "DU"]),
    ("Polarity", &["POS", "NEG"]),
    ("Politeness", &["FORM", "INFM", "ELEV", "HUMB"]),
];

/// Where a single UD feature maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureMapping {
    Um(String),
    Drop,
}

/// Where a UPOS maps to. `None` marks categories that are never inflected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PosMapping {
    Um(String),
    None,
}

/// A correction induced from anchored (lemma, form) pairs: when every
/// feature in `match_feats` is present, drop `remove` and insert `add`.
/// Rules are applied in list order, at most once each per tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostEditRule {
    pub match_feats: BTreeSet<String>,
    pub remove: BTreeSet<String>,
    pub add: BTreeSet<String>,
    pub support: usize,
}

impl PostEditRule {
    fn applies(&self, features: &BTreeSet<String>) -> bool {
        self.match_feats.iter().all(|f| features.contains(f))
    }

    fn apply(&self, features: &mut BTreeSet<String>) {
        for f in &self.remove {
            features.remove(f);
        }
        for f in &self.add {
            features.insert(f.clone());
        }
    }
}

/// The full UD→UM conversion configuration.
#[derive(Debug, Clone)]
pub struct ConversionTable {
    pub feature_map: HashMap<(String, String), FeatureMapping>,
    pub upos_map: HashMap<String, PosMapping>,
    pub postedit_rules: Vec<PostEditRule>,
    /// Pass-through mode for ablation: UPOS and `Name=Value` strings are
    /// used verbatim instead of the mapped schema.
    pub pass_through: bool,
}

/// Result of converting one token's UPOS+FEATS bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Converted {
    /// `None` when the UPOS is not inflectable.
    pub tag: Option<MorphTag>,
    /// `Feature=Value` items intentionally dropped by the table.
    pub dropped: Vec<String>,
    /// `Feature=Value` items with no table entry (also dropped).
    pub unmapped: Vec<String>,
}

impl ConversionTable {
    /// The bundled default tables, no post-edit rules.
    pub fn bundled() -> Self {
        let feature_map =
            parse_feature_map(include_str!("../data/feature_map.tsv"), "bundled feature_map")
                .expect("bundled feature_map must parse");
        let upos_map = parse_upos_map(include_str!("../data/upos_map.tsv"), "bundled upos_map")
            .expect("bundled upos_map must parse");
        ConversionTable {
            feature_map,
            upos_map,
            postedit_rules: Vec::new(),
            pass_through: false,
        }
    }

    /// An identity table for the ablation that trains inflectors directly
    /// on UD feats.
    pub fn pass_through() -> Self {
        ConversionTable {
            feature_map: HashMap::new(),
            upos_map: HashMap::new(),
            postedit_rules: Vec::new(),
            pass_through: true,
        }
    }

    pub fn load(
        feature_map_path: &Path,
        upos_map_path: &Path,
        rules_path: Option<&Path>,
    ) -> Result<Self> {
        let feats = fs::read_to_string(feature_map_path)?;
        let upos = fs::read_to_string(upos_map_path)?;
        let mut table = ConversionTable {
            feature_map: parse_feature_map(&feats, &feature_map_path.display().to_string())?,
            upos_map: parse_upos_map(&upos, &upos_map_path.display().to_string())?,
            postedit_rules: Vec::new(),
            pass_through: false,
        };
        if let Some(p) = rules_path {
            let text = fs::read_to_string(p)?;
            table.postedit_rules = parse_rules(&text, &p.display().to_string())?;
        }
        Ok(table)
    }
}

/// Sort key for a feature: known features order by dimension then by
/// position within the dimension; unknown ones go last, alphabetically.
fn feature_key(feature: &str) -> (usize, usize, &str) {
    for (d, (_, members)) in DIMENSIONS.iter().enumerate() {
        if let Some(m) = members.iter().position(|&f| f == feature) {
            return (d, m, "");
        }
    }
    (usize::MAX, 0, feature)
}

fn sorted_features(features: &BTreeSet<String>) -> Vec<String> {
    let mut v: Vec<&String> = features.iter().collect();
    v.sort_by(|a, b| feature_key(a).cmp(&feature_key(b)));
    v.into_iter().cloned().collect()
}

/// Convert one UPOS + FEATS bundle to a UniMorph tag.
///
/// Total and deterministic: unknown UPOS behaves like `NONE`, unmapped
/// features are dropped with a warning, post-edit rules are applied in
/// order, and the result is rendered in canonical dimension order.
pub fn ud_to_um(upos: &str, feats: &[(String, String)], table: &ConversionTable) -> Converted {
    if table.pass_through {
        let features: BTreeSet<String> =
            feats.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let features = apply_rules(&table.postedit_rules, features);
        return Converted {
            tag: Some(MorphTag {
                pos: upos.to_string(),
                features: sorted_features(&features),
            }),
            dropped: Vec::new(),
            unmapped: Vec::new(),
        };
    }

    let pos = match table.upos_map.get(upos) {
        Some(PosMapping::Um(p)) => p.clone(),
        Some(PosMapping::None) => {
            return Converted {
                tag: None,
                dropped: Vec::new(),
                unmapped: Vec::new(),
            }
        }
        None => {
            log::warn!("ud_to_um: UPOS {upos:?} has no mapping; treated as non-inflectable");
            return Converted {
                tag: None,
                dropped: Vec::new(),
                unmapped: Vec::new(),
            };
        }
    };

    let mut features = BTreeSet::new();
    let mut dropped = Vec::new();
    let mut unmapped = Vec::new();
    for (name, value) in feats {
        match table.feature_map.get(&(name.clone(), value.clone())) {
            Some(FeatureMapping::Um(f)) => {
                features.insert(f.clone());
            }
            Some(FeatureMapping::Drop) => dropped.push(format!("{name}={value}")),
            None => {
                log::warn!("ud_to_um: no mapping for {name}={value}; dropped");
                unmapped.push(format!("{name}={value}"));
            }
        }
    }

    let features = apply_rules(&table.postedit_rules, features);
    Converted {
        tag: Some(MorphTag {
            pos,
            features: sorted_features(&features),
        }),
        dropped,
        unmapped,
    }
}

fn apply_rules(rules: &[PostEditRule], mut features: BTreeSet<String>) -> BTreeSet<String> {
    for rule in rules {
        if rule.applies(&features) {
            rule.apply(&mut features);
        }
    }
    features
}

/// Induce post-edit rules from tokens whose (lemma, form) pair is attested
/// in the UniMorph lexicon.
///
/// Each iteration converts every anchored token, compares the result `T`
/// against the closest gold tag `G` for that (lemma, form) (smallest
/// symmetric difference, which tolerates syncretism), and collects
/// `(match = T's features, remove = T∖G, add = G∖T)` candidates. Candidates
/// with support ≥ `min_support` become rules. Iteration stops at a
/// fixpoint, at `max_iters`, or — to keep anchor-set accuracy
/// non-decreasing — when an iteration's rules would lower it, in which
/// case they are discarded.
///
/// Returns the appended rules only.
pub fn induce_postedit_rules(
    ud: &Treebank,
    um: &UMLexicon,
    table: &ConversionTable,
    min_support: usize,
    max_iters: usize,
) -> Vec<PostEditRule> {
    // (lemma, form) -> gold tags.
    let mut anchors: HashMap<(&str, &str), Vec<&MorphTag>> = HashMap::new();
    for t in &um.triples {
        anchors
            .entry((t.lemma.as_str(), t.form.as_str()))
            .or_default()
            .push(&t.tag);
    }

    // Anchored tokens, referenced by (upos, feats) only.
    let mut anchored: Vec<(&str, &[(String, String)], &Vec<&MorphTag>)> = Vec::new();
    for s in &ud.sentences {
        for tok in &s.tokens {
            if let Some(golds) = anchors.get(&(tok.lemma.as_str(), tok.form.as_str())) {
                anchored.push((tok.upos.as_str(), &tok.feats, golds));
            }
        }
    }
    if anchored.is_empty() {
        log::warn!("induce_postedit_rules: no (lemma, form) overlap between treebank and lexicon");
        return Vec::new();
    }

    let mut work = table.clone();
    let mut appended: Vec<PostEditRule> = Vec::new();
    let mut accuracy = anchor_accuracy(&anchored, &work);

    for _ in 0..max_iters {
        let mut candidates: BTreeMap<
            (Vec<String>, Vec<String>, Vec<String>),
            usize,
        > = BTreeMap::new();

        for (upos, feats, golds) in &anchored {
            let converted = ud_to_um(upos, feats, &work);
            let tag = match converted.tag {
                Some(t) => t,
                None => continue,
            };
            let gold = match closest_gold(&tag, golds) {
                Some(g) => g,
                None => continue,
            };
            if gold.pos != tag.pos {
                continue;
            }
            let t_feats: BTreeSet<&str> = tag.features.iter().map(String::as_str).collect();
            let g_feats: BTreeSet<&str> = gold.features.iter().map(String::as_str).collect();
            if t_feats == g_feats {
                continue;
            }
            let remove: Vec<String> =
                t_feats.difference(&g_feats).map(|f| f.to_string()).collect();
            let add: Vec<String> =
                g_feats.difference(&t_feats).map(|f| f.to_string()).collect();
            let key = (
                tag.features.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                remove,
                add,
            );
            *candidates.entry(key).or_insert(0) += 1;
        }

        // An edit already in the table is not a new rule, whatever its
        // recount says.
        let mut new_rules: Vec<PostEditRule> = candidates
            .into_iter()
            .filter(|(_, support)| *support >= min_support)
            .map(|((m, r, a), support)| PostEditRule {
                match_feats: m.into_iter().collect(),
                remove: r.into_iter().collect(),
                add: a.into_iter().collect(),
                support,
            })
            .filter(|r| !work.postedit_rules.iter().any(|e| same_edit(e, r)))
            .collect();
        if new_rules.is_empty() {
            break;
        }
        new_rules.sort_by(|a, b| {
            b.support
                .cmp(&a.support)
                .then_with(|| a.match_feats.cmp(&b.match_feats))
                .then_with(|| a.remove.cmp(&b.remove))
                .then_with(|| a.add.cmp(&b.add))
        });

        let mut trial = work.clone();
        trial.postedit_rules.extend(new_rules.iter().cloned());
        let trial_accuracy = anchor_accuracy(&anchored, &trial);
        if trial_accuracy < accuracy {
            log::warn!(
                "induce_postedit_rules: iteration would lower anchor accuracy \
                 ({accuracy:.4} -> {trial_accuracy:.4}); stopping"
            );
            break;
        }
        accuracy = trial_accuracy;
        work = trial;
        appended.extend(new_rules);
    }

    appended
}

fn same_edit(a: &PostEditRule, b: &PostEditRule) -> bool {
    a.match_feats == b.match_feats && a.remove == b.remove && a.add == b.add
}

fn closest_gold<'a>(tag: &MorphTag, golds: &[&'a MorphTag]) -> Option<&'a MorphTag> {
    golds
        .iter()
        .min_by_key(|g| {
            let t: BTreeSet<&str> = std::iter::once(tag.pos.as_str())
                .chain(tag.features.iter().map(String::as_str))
                .collect();
            let gset: BTreeSet<&str> = std::iter::once(g.pos.as_str())
                .chain(g.features.iter().map(String::as_str))
                .collect();
            t.symmetric_difference(&gset).count()
        })
        .copied()
}

/// Exact-tag-match accuracy over the anchored tokens. Unconvertible
/// anchored tokens count as misses.
fn anchor_accuracy(
    anchored: &[(&str, &[(String, String)], &Vec<&MorphTag>)],
    table: &ConversionTable,
) -> f64 {
    let mut correct = 0usize;
    for (upos, feats, golds) in anchored {
        let converted = ud_to_um(upos, feats, table);
        if let Some(tag) = converted.tag {
            if let Some(gold) = closest_gold(&tag, golds) {
                let t: BTreeSet<&str> = tag.features.iter().map(String::as_str).collect();
                let g: BTreeSet<&str> = gold.features.iter().map(String::as_str).collect();
                if gold.pos == tag.pos && t == g {
                    correct += 1;
                }
            }
        }
    }
    correct as f64 / anchored.len() as f64
}

/// Conversion coverage summary for a treebank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionReport {
    pub tokens_total: usize,
    pub converted: usize,
    pub none_pos: usize,
    /// `Feature=Value` -> count of tokens where it was dropped (either
    /// mapped to DROP or unmapped).
    pub dropped: BTreeMap<String, usize>,
}

pub fn conversion_report(ud: &Treebank, table: &ConversionTable) -> ConversionReport {
    let mut report = ConversionReport {
        tokens_total: 0,
        converted: 0,
        none_pos: 0,
        dropped: BTreeMap::new(),
    };
    for s in &ud.sentences {
        for tok in &s.tokens {
            report.tokens_total += 1;
            let c = ud_to_um(&tok.upos, &tok.feats, table);
            if c.tag.is_some() {
                report.converted += 1;
            } else {
                report.none_pos += 1;
            }
            for f in c.dropped.iter().chain(c.unmapped.iter()) {
                *report.dropped.entry(f.clone()).or_insert(0) += 1;
            }
        }
    }
    report
}

/// Parse `UDFeature=Value<TAB>UMFeature|DROP` lines.
pub fn parse_feature_map(
    text: &str,
    name: &str,
) -> Result<HashMap<(String, String), FeatureMapping>> {
    let mut map = HashMap::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (ud, um) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(name, i + 1, "expected UDFeature=Value<TAB>UMFeature|DROP"))?;
        let (feat, value) = ud
            .split_once('=')
            .ok_or_else(|| Error::parse(name, i + 1, "left side must be UDFeature=Value"))?;
        let mapping = match um.trim() {
            "DROP" => FeatureMapping::Drop,
            "" => return Err(Error::parse(name, i + 1, "empty UM feature")),
            f => FeatureMapping::Um(f.to_string()),
        };
        map.insert((feat.trim().to_string(), value.trim().to_string()), mapping);
    }
    Ok(map)
}

/// Parse `UPOS<TAB>UMPOS|NONE` lines.
pub fn parse_upos_map(text: &str, name: &str) -> Result<HashMap<String, PosMapping>> {
    let mut map = HashMap::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (upos, um) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(name, i + 1, "expected UPOS<TAB>UMPOS|NONE"))?;
        let mapping = match um.trim() {
            "NONE" => PosMapping::None,
            "" => return Err(Error::parse(name, i + 1, "empty UM POS")),
            p => PosMapping::Um(p.to_string()),
        };
        map.insert(upos.trim().to_string(), mapping);
    }
    Ok(map)
}

fn render_feature_set(set: &BTreeSet<String>) -> String {
    set.iter().cloned().collect::<Vec<_>>().join(";")
}

fn parse_feature_set(s: &str) -> BTreeSet<String> {
    s.split(';')
        .map(str::trim)
        .filter(|f| !f.is_empty())
        .map(String::from)
        .collect()
}

/// Serialize rules as `match -> remove / add<TAB>support`, one per line.
pub fn render_rules(rules: &[PostEditRule]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&format!(
            "{} -> {} / {}\t{}\n",
            render_feature_set(&r.match_feats),
            render_feature_set(&r.remove),
            render_feature_set(&r.add),
            r.support
        ));
    }
    out
}

/// Parse the rule serialization produced by [`render_rules`].
pub fn parse_rules(text: &str, name: &str) -> Result<Vec<PostEditRule>> {
    let mut rules = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (body, support) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::parse(name, i + 1, "expected match -> remove / add<TAB>support"))?;
        let support: usize = support
            .trim()
            .parse()
            .map_err(|_| Error::parse(name, i + 1, "support is not an integer"))?;
        let (match_part, edit) = body
            .split_once(" -> ")
            .ok_or_else(|| Error::parse(name, i + 1, "missing \" -> \""))?;
        let (remove, add) = edit
            .split_once(" / ")
            .ok_or_else(|| Error::parse(name, i + 1, "missing \" / \""))?;
        rules.push(PostEditRule {
            match_feats: parse_feature_set(match_part),
            remove: parse_feature_set(remove),
            add: parse_feature_set(add),
            support,
        });
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{Sentence, Token, Treebank};
    use crate::unimorph::Triple;

    fn feats(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn converts_past_verb() {
        let table = ConversionTable::bundled();
        let c = ud_to_um(
            "VERB",
            &feats(&[
                ("Mood", "Ind"),
                ("Number", "Sing"),
                ("Person", "3"),
                ("Tense", "Past"),
            ]),
            &table,
        );
        assert_eq!(c.tag.unwrap().render(), "V;IND;PST;3;SG");
    }

    #[test]
    fn punct_is_none() {
        let table = ConversionTable::bundled();
        let c = ud_to_um("PUNCT", &[], &table);
        assert_eq!(c.tag, None);
    }

    #[test]
    fn bare_pos() {
        let table = ConversionTable::bundled();
        let c = ud_to_um("NOUN", &[], &table);
        assert_eq!(c.tag.unwrap().render(), "N");
    }

    #[test]
    fn unmapped_feature_is_dropped_and_recorded() {
        let table = ConversionTable::bundled();
        let c = ud_to_um("NOUN", &feats(&[("Weird", "Thing"), ("Number", "Plur")]), &table);
        assert_eq!(c.tag.unwrap().render(), "N;PL");
        assert_eq!(c.unmapped, vec!["Weird=Thing"]);
    }

    #[test]
    fn explicit_drop_is_silent_but_counted() {
        let table = ConversionTable::bundled();
        let c = ud_to_um("ADJ", &feats(&[("Degree", "Pos"), ("Gender", "Fem")]), &table);
        assert_eq!(c.tag.unwrap().render(), "ADJ;FEM");
        assert_eq!(c.dropped, vec!["Degree=Pos"]);
        assert!(c.unmapped.is_empty());
    }

    #[test]
    fn empty_rule_list_is_identity_composition() {
        // With no post-edit rules, conversion equals the raw feature_map
        // composition; adding a non-matching rule changes nothing either.
        let mut table = ConversionTable::bundled();
        let bundle = feats(&[("Number", "Plur"), ("Case", "Acc")]);
        let base = ud_to_um("NOUN", &bundle, &table);
        table.postedit_rules.push(PostEditRule {
            match_feats: ["ZZZ".to_string()].into_iter().collect(),
            remove: ["PL".to_string()].into_iter().collect(),
            add: BTreeSet::new(),
            support: 99,
        });
        assert_eq!(ud_to_um("NOUN", &bundle, &table), base);
    }

    #[test]
    fn conversion_is_stable_under_reconversion() {
        let table = ConversionTable::bundled();
        let bundle = feats(&[("Tense", "Past"), ("Mood", "Ind"), ("Person", "1"), ("Number", "Plur")]);
        let a = ud_to_um("VERB", &bundle, &table).tag.unwrap().render();
        let b = ud_to_um("VERB", &bundle, &table).tag.unwrap().render();
        assert_eq!(a, b);
        assert_eq!(a, "V;IND;PST;1;PL");
    }

    fn anchored_corpus(n: usize) -> (Treebank, UMLexicon) {
        // n tokens whose conversion carries a spurious FIN compared to the
        // gold lexicon.
        let mut tb = Treebank::new("toy", "xx");
        let mut um = UMLexicon::new("xx");
        for i in 0..n {
            let lemma = format!("lemma{i}");
            let form = format!("form{i}");
            let mut tok = Token::new(1, &form, 0);
            tok.lemma = lemma.clone();
            tok.upos = "VERB".to_string();
            tok.set_feats(feats(&[
                ("VerbForm", "Fin"),
                ("Mood", "Ind"),
                ("Tense", "Past"),
                ("Person", "3"),
                ("Number", "Sing"),
            ]));
            tb.sentences.push(Sentence::from_tokens(vec![tok]));
            um.triples.push(Triple {
                lemma,
                form,
                tag: MorphTag::parse("V;IND;PST;3;SG"),
            });
        }
        (tb, um)
    }

    #[test]
    fn induces_fin_removal_rule() {
        let (tb, um) = anchored_corpus(20);
        let table = ConversionTable::bundled();
        let rules = induce_postedit_rules(&tb, &um, &table, 5, 10);
        assert_eq!(rules.len(), 1);
        let r = &rules[0];
        assert_eq!(r.remove.iter().cloned().collect::<Vec<_>>(), vec!["FIN"]);
        assert!(r.add.is_empty());
        assert_eq!(r.support, 20);

        // Applying the induced rule fixes the conversion.
        let mut refined = table.clone();
        refined.postedit_rules = rules;
        let c = ud_to_um(
            "VERB",
            &feats(&[
                ("VerbForm", "Fin"),
                ("Mood", "Ind"),
                ("Tense", "Past"),
                ("Person", "3"),
                ("Number", "Sing"),
            ]),
            &refined,
        );
        assert_eq!(c.tag.unwrap().render(), "V;IND;PST;3;SG");
    }

    #[test]
    fn induction_without_anchors_is_empty() {
        let (tb, _) = anchored_corpus(5);
        let um = UMLexicon::new("xx"); // no overlap
        let rules = induce_postedit_rules(&tb, &um, &ConversionTable::bundled(), 5, 10);
        assert!(rules.is_empty());
    }

    #[test]
    fn induction_is_idempotent_at_fixpoint() {
        let (tb, um) = anchored_corpus(20);
        let mut table = ConversionTable::bundled();
        table.postedit_rules = induce_postedit_rules(&tb, &um, &table, 5, 10);
        let again = induce_postedit_rules(&tb, &um, &table, 5, 10);
        assert!(again.is_empty(), "second run must be a fixpoint: {again:?}");
    }

    #[test]
    fn report_counts_sum_to_total() {
        let mut tb = Treebank::new("toy", "xx");
        let mut tokens = Vec::new();
        for (i, (upos, head)) in [("NOUN", 2), ("VERB", 0), ("PUNCT", 2), ("ADJ", 1), ("SYM", 2)]
            .iter()
            .enumerate()
        {
            let mut t = Token::new(i + 1, &format!("w{i}"), *head);
            t.upos = upos.to_string();
            tokens.push(t);
        }
        tb.sentences.push(Sentence::from_tokens(tokens));
        let report = conversion_report(&tb, &ConversionTable::bundled());
        assert_eq!(report.tokens_total, 5);
        assert_eq!(report.converted, 3);
        assert_eq!(report.none_pos, 2);
        assert_eq!(report.converted + report.none_pos, report.tokens_total);
    }

    #[test]
    fn all_punct_sentence_converts_nothing() {
        let mut tb = Treebank::new("toy", "xx");
        let mut tokens = Vec::new();
        for i in 0..4 {
            let mut t = Token::new(i + 1, ".", if i == 0 { 0 } else { 1 });
            t.upos = "PUNCT".to_string();
            tokens.push(t);
        }
        tb.sentences.push(Sentence::from_tokens(tokens));
        let report = conversion_report(&tb, &ConversionTable::bundled());
        assert_eq!(report.converted, 0);
        assert_eq!(report.none_pos, 4);
    }

    #[test]
    fn rules_round_trip_through_text() {
        let rules = vec![
            PostEditRule {
                match_feats: parse_feature_set("FIN;IND;PST"),
                remove: parse_feature_set("FIN"),
                add: parse_feature_set(""),
                support: 20,
            },
            PostEditRule {
                match_feats: parse_feature_set("SG"),
                remove: parse_feature_set(""),
                add: parse_feature_set("NOM;X+Y"),
                support: 7,
            },
        ];
        let text = render_rules(&rules);
        let parsed = parse_rules(&text, "rules").unwrap();
        assert_eq!(parsed, rules);
    }

    #[test]
    fn pass_through_keeps_ud_feats() {
        let table = ConversionTable::pass_through();
        let c = ud_to_um("VERB", &feats(&[("Tense", "Past"), ("Mood", "Ind")]), &table);
        assert_eq!(c.tag.unwrap().render(), "VERB;Mood=Ind;Tense=Past");
    }
}
