//! UniMorph lexicons: loading, dialect concatenation, seeded 80-10-10
//! splitting, and part-of-speech coverage.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// A morphological tag: a part-of-speech symbol plus an ordered list of
/// feature strings, rendered as `POS;F1;F2;...`.
///
/// Features are opaque; composite values such as `IN+ESS` or multi-valued
/// language-specific features pass through untouched. Parsing then
/// rendering a tag string is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MorphTag {
    pub pos: String,
    pub features: Vec<String>,
}

impl MorphTag {
    pub fn new(pos: &str, features: &[&str]) -> Self {
        MorphTag {
            pos: pos.to_string(),
            features: features.iter().map(|f| f.to_string()).collect(),
        }
    }

    /// Parse `POS;F1;F2`. A bare POS has no features. Empty input yields a
    /// tag with an empty POS, which callers treat as invalid.
    pub fn parse(s: &str) -> Self {
        let mut parts = s.split(';').map(str::trim);
        let pos = parts.next().unwrap_or("").to_string();
        MorphTag {
            pos,
            features: parts.filter(|p| !p.is_empty()).map(String::from).collect(),
        }
    }

    pub fn render(&self) -> String {
        if self.features.is_empty() {
            self.pos.clone()
        } else {
            let mut s = self.pos.clone();
            for f in &self.features {
                s.push(';');
                s.push_str(f);
            }
            s
        }
    }
}

impl fmt::Display for MorphTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// One `(lemma, form, tag)` entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub lemma: String,
    pub form: String,
    pub tag: MorphTag,
}

/// A UniMorph lexicon. Duplicate triples are permitted on load; they are
/// deduplicated before splitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UMLexicon {
    pub triples: Vec<Triple>,
    pub language: String,
}

impl UMLexicon {
    pub fn new(language: &str) -> Self {
        UMLexicon {
            triples: Vec::new(),
            language: language.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Number of distinct lemma strings.
    pub fn lemma_count(&self) -> usize {
        self.triples
            .iter()
            .map(|t| t.lemma.as_str())
            .collect::<HashSet<_>>()
            .len()
    }

    /// Distinct triples in first-occurrence order.
    pub fn dedup(&self) -> Vec<Triple> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for t in &self.triples {
            if seen.insert(t.clone()) {
                out.push(t.clone());
            }
        }
        out
    }
}

/// An 80-10-10 split of a deduplicated lexicon.
#[derive(Debug, Clone)]
pub struct UMSplit {
    pub train: UMLexicon,
    pub dev: UMLexicon,
    pub test: UMLexicon,
}

/// Parse UniMorph TSV (`lemma<TAB>form<TAB>tag`). Blank lines are skipped;
/// any other column count is a parse error naming the line.
pub fn load_um(bytes: &[u8], language: &str) -> Result<UMLexicon> {
    let name = format!("um/{language}");
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(&name, 0, format!("input is not valid UTF-8: {e}")))?;

    let mut lex = UMLexicon::new(language);
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                &name,
                i + 1,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].is_empty() || cols[1].is_empty() {
            return Err(Error::parse(&name, i + 1, "empty lemma or form"));
        }
        lex.triples.push(Triple {
            lemma: cols[0].to_string(),
            form: cols[1].to_string(),
            tag: MorphTag::parse(cols[2]),
        });
    }
    Ok(lex)
}

/// Load a UniMorph file from disk.
pub fn load_um_file(path: &Path, language: &str) -> Result<UMLexicon> {
    let bytes = fs::read(path)?;
    load_um(&bytes, language)
}

/// Concatenate dialect lexicons in order. Errors on an empty list.
pub fn concat_dialects(lexicons: &[UMLexicon], language: &str) -> Result<UMLexicon> {
    if lexicons.is_empty() {
        return Err(Error::usage("concat_dialects: empty lexicon list"));
    }
    let mut out = UMLexicon::new(language);
    for lex in lexicons {
        out.triples.extend(lex.triples.iter().cloned());
    }
    Ok(out)
}

/// Shuffle the deduplicated triples with a seeded Fisher–Yates permutation
/// (see [`crate::rng`] for the pinned generator) and split 80-10-10.
///
/// The split unit is the triple, so a lemma's forms may span splits. Sizes
/// are `floor(0.8n)` / `floor(0.9n) - floor(0.8n)` / remainder, which stays
/// within one item of the exact proportions.
pub fn split_um(lex: &UMLexicon, seed: u64) -> Result<UMSplit> {
    let mut triples = lex.dedup();
    let n = triples.len();
    if n < 10 {
        return Err(Error::usage(format!(
            "split_um: need at least 10 distinct triples, got {n}"
        )));
    }
    SplitMix64::new(seed).shuffle(&mut triples);

    let train_end = n * 80 / 100;
    let dev_end = n * 90 / 100;
    let part = |range: std::ops::Range<usize>| UMLexicon {
        triples: triples[range].to_vec(),
        language: lex.language.clone(),
    };
    Ok(UMSplit {
        train: part(0..train_end),
        dev: part(train_end..dev_end),
        test: part(dev_end..n),
    })
}

/// Map UniMorph POS symbols to the UD UPOS tags they license for
/// x-inflection (e.g. `V -> {VERB, AUX}`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosMap {
    pub map: BTreeMap<String, BTreeSet<String>>,
}

impl PosMap {
    /// The bundled default mapping.
    pub fn bundled() -> Self {
        PosMap::parse(include_str!("../data/pos_map.tsv"), "bundled pos_map")
            .expect("bundled pos_map must parse")
    }

    /// Parse `UM-POS<TAB>UPOS[,UPOS...]` lines. `#` comments and blank
    /// lines are skipped.
    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.split('\n').enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (um, ud) = line.split_once('\t').ok_or_else(|| {
                Error::parse(name, i + 1, "expected UM-POS<TAB>UPOS[,UPOS...]")
            })?;
            let upos: BTreeSet<String> = ud
                .split(',')
                .map(|u| u.trim().to_string())
                .filter(|u| !u.is_empty())
                .collect();
            if upos.is_empty() {
                return Err(Error::parse(name, i + 1, "no UPOS values"));
            }
            map.insert(um.trim().to_string(), upos);
        }
        Ok(PosMap { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        PosMap::parse(&text, &path.display().to_string())
    }
}

/// The UPOS tags eligible for x-inflection given the POS symbols present
/// in a lexicon. UM POS symbols without a mapping are skipped with a
/// warning.
pub fn covered_pos(lex: &UMLexicon, pos_map: &PosMap) -> BTreeSet<String> {
    let mut covered = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for t in &lex.triples {
        if !seen.insert(t.tag.pos.clone()) {
            continue;
        }
        match pos_map.map.get(&t.tag.pos) {
            Some(upos) => covered.extend(upos.iter().cloned()),
            None => log::warn!(
                "covered_pos: UM POS {:?} has no UPOS mapping; skipped",
                t.tag.pos
            ),
        }
    }
    covered
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex_of(triples: &[(&str, &str, &str)]) -> UMLexicon {
        UMLexicon {
            triples: triples
                .iter()
                .map(|(l, f, t)| Triple {
                    lemma: l.to_string(),
                    form: f.to_string(),
                    tag: MorphTag::parse(t),
                })
                .collect(),
            language: "xx".to_string(),
        }
    }

    #[test]
    fn loads_single_triple() {
        let lex = load_um(b"cantar\tcantou\tV;PST;3;SG\n", "glg").unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.triples[0].tag.pos, "V");
        assert_eq!(lex.triples[0].tag.render(), "V;PST;3;SG");
    }

    #[test]
    fn empty_file_is_empty_lexicon() {
        assert!(load_um(b"", "glg").unwrap().is_empty());
        assert!(load_um(b"\n\n", "glg").unwrap().is_empty());
    }

    #[test]
    fn wrong_column_count_names_the_line() {
        let err = load_um(b"a\tb\tT\nx\ty\n", "glg").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn tag_parse_render_round_trip() {
        for s in ["V", "V;PST;3;SG", "N;IN+ESS;PL", "ADJ;FEM;SG;LGSPEC1"] {
            assert_eq!(MorphTag::parse(s).render(), s);
        }
    }

    #[test]
    fn concat_preserves_order_and_length() {
        let a = lex_of(&[("a", "a1", "T"); 5]);
        let b = lex_of(&[("b", "b1", "T"); 5]);
        let c = concat_dialects(&[a.clone(), b], "xx").unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c.triples[0].lemma, "a");
        assert_eq!(c.triples[5].lemma, "b");
        let single = concat_dialects(std::slice::from_ref(&a), "xx").unwrap();
        assert_eq!(single.triples, a.triples);
        assert!(concat_dialects(&[], "xx").is_err());
    }

    #[test]
    fn split_sizes_ten_triples() {
        let triples: Vec<(String, String)> =
            (0..10).map(|i| (format!("l{i}"), format!("f{i}"))).collect();
        let lex = UMLexicon {
            triples: triples
                .iter()
                .map(|(l, f)| Triple {
                    lemma: l.clone(),
                    form: f.clone(),
                    tag: MorphTag::parse("T"),
                })
                .collect(),
            language: "xx".to_string(),
        };
        for seed in [0, 1, 42, 999] {
            let split = split_um(&lex, seed).unwrap();
            assert_eq!((split.train.len(), split.dev.len(), split.test.len()), (8, 1, 1));
        }
    }

    #[test]
    fn split_is_deterministic() {
        let lex = lex_of(
            &(0..50)
                .map(|i| (format!("l{i}"), format!("f{i}"), "T".to_string()))
                .collect::<Vec<_>>()
                .iter()
                .map(|(l, f, t)| (l.as_str(), f.as_str(), t.as_str()))
                .collect::<Vec<_>>(),
        );
        let a = split_um(&lex, 7).unwrap();
        let b = split_um(&lex, 7).unwrap();
        assert_eq!(a.train.triples, b.train.triples);
        assert_eq!(a.dev.triples, b.dev.triples);
        assert_eq!(a.test.triples, b.test.triples);
    }

    #[test]
    fn split_partitions_thousand() {
        let lex = lex_of(
            &(0..1000)
                .map(|i| (format!("l{i}"), format!("f{i}"), "T".to_string()))
                .collect::<Vec<_>>()
                .iter()
                .map(|(l, f, t)| (l.as_str(), f.as_str(), t.as_str()))
                .collect::<Vec<_>>(),
        );
        let split = split_um(&lex, 3).unwrap();
        assert_eq!((split.train.len(), split.dev.len(), split.test.len()), (800, 100, 100));
        let mut union: Vec<Triple> = split
            .train
            .triples
            .iter()
            .chain(&split.dev.triples)
            .chain(&split.test.triples)
            .cloned()
            .collect();
        union.sort_by(|a, b| a.lemma.cmp(&b.lemma).then(a.form.cmp(&b.form)));
        let mut input = lex.dedup();
        input.sort_by(|a, b| a.lemma.cmp(&b.lemma).then(a.form.cmp(&b.form)));
        assert_eq!(union, input);
    }

    #[test]
    fn split_requires_ten_distinct() {
        let lex = lex_of(&[("a", "b", "T"); 20]); // 20 copies of one triple
        assert!(matches!(split_um(&lex, 0), Err(Error::Usage(_))));
    }

    #[test]
    fn covered_pos_applies_map() {
        let pos_map = PosMap::bundled();
        let verbs_only = lex_of(&[("mynd", "aeth", "V;PST")]);
        let covered = covered_pos(&verbs_only, &pos_map);
        assert_eq!(
            covered.iter().map(String::as_str).collect::<Vec<_>>(),
            vec!["AUX", "VERB"]
        );

        let nva = lex_of(&[("a", "a", "N;PL"), ("b", "b", "V;PST"), ("c", "c", "A;SG")]);
        let covered = covered_pos(&nva, &pos_map);
        assert_eq!(
            covered.iter().map(String::as_str).collect::<Vec<_>>(),
            vec!["ADJ", "AUX", "NOUN", "PROPN", "VERB"]
        );
    }

    #[test]
    fn covered_pos_skips_unmapped() {
        let pos_map = PosMap::bundled();
        let lex = lex_of(&[("a", "a", "ZZZ;X")]);
        assert!(covered_pos(&lex, &pos_map).is_empty());
    }
}
