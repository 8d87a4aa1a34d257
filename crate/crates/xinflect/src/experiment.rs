//! Zero-shot and few-shot experiment drivers and treebank overlap
//! statistics.
//!
//! Zero-shot: for each source treebank, train one parser on the original
//! source and one on its x-inflected version, and evaluate both on the
//! target test set; no target training data is touched. Few-shot: train on
//! the target training set alone, on target + merged original sources, and
//! on target + merged x-inflected sources.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use crate::analysis::AnalysisRow;
use crate::conllu::{merge_treebanks, Treebank, EMPTY};
use crate::error::{Error, Result};
use crate::eval::attachment_scores;
use crate::inflector::InflectorModel;
use crate::parser::{parse_treebank, train_parser, ParserKind};
use crate::pipeline::xinflect_treebank;
use crate::schema::ConversionTable;

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ZeroShot,
    FewShot,
}

/// One source treebank.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub language: String,
    pub train: Treebank,
}

/// Everything an experiment needs, already loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub target_name: String,
    /// Required for the few-shot setup; never touched in zero-shot.
    pub target_train: Option<Treebank>,
    pub target_test: Treebank,
    pub sources: Vec<Source>,
    pub inflector: InflectorModel,
    pub table: ConversionTable,
    pub covered: BTreeSet<String>,
    /// UniMorph training data sizes for the analysis features.
    pub um_forms: usize,
    pub um_lemmas: usize,
    pub parser_kinds: Vec<ParserKind>,
    pub epochs: usize,
    pub seed: u64,
}

/// Training configuration of one result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    /// Zero-shot: trained on the original source.
    Baseline,
    /// Zero-shot: trained on the x-inflected source.
    XInflected,
    /// Few-shot: target training data only.
    TargetOnly,
    /// Few-shot: target + merged original sources.
    TargetPlusOriginal,
    /// Few-shot: target + merged x-inflected sources.
    TargetPlusXInflected,
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::Baseline => "baseline",
            System::XInflected => "x-inflected",
            System::TargetOnly => "target-only",
            System::TargetPlusOriginal => "target+original",
            System::TargetPlusXInflected => "target+x-inflected",
        })
    }
}

/// One evaluated training run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub source: String,
    pub kind: ParserKind,
    pub system: System,
    pub uas: f64,
    pub las: f64,
}

/// Zero-shot results: two rows (baseline, x-inflected) per source and
/// parser kind, plus one analysis row per (source, kind).
#[derive(Debug, Clone)]
pub struct ZeroShotReport {
    pub target: String,
    pub rows: Vec<ResultRow>,
    pub analysis_rows: Vec<AnalysisRow>,
}

/// Few-shot results: three rows per parser kind with deltas against the
/// target-only system.
#[derive(Debug, Clone)]
pub struct FewShotReport {
    pub target: String,
    pub rows: Vec<ResultRow>,
}

fn train_and_eval(
    kind: ParserKind,
    train: &Treebank,
    test: &Treebank,
    epochs: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let model = train_parser(kind, train, epochs, seed)?;
    let predicted = parse_treebank(&model, test);
    let scores = attachment_scores(test, &predicted)?;
    Ok((scores.uas(), scores.las()))
}

/// Run the zero-shot setup.
pub fn run_zero_shot(exp: &Experiment) -> Result<ZeroShotReport> {
    if exp.target_test.is_empty() {
        return Err(Error::usage("run_zero_shot: target test set is empty"));
    }
    if exp.sources.is_empty() {
        return Err(Error::usage("run_zero_shot: no source treebanks"));
    }
    let mut rows = Vec::new();
    let mut analysis_rows = Vec::new();

    for source in &exp.sources {
        let (inflected, stats) =
            xinflect_treebank(&source.train, &exp.inflector, &exp.table, &exp.covered);
        log::info!(
            "x-inflected {}: {:.1}% of tokens replaced",
            source.name,
            stats.replacement_rate() * 100.0
        );
        let (feats_shared, lemmas_shared) = overlap_stats(&source.train, &exp.target_test);

        for &kind in &exp.parser_kinds {
            let (base_uas, base_las) =
                train_and_eval(kind, &source.train, &exp.target_test, exp.epochs, exp.seed)?;
            let (x_uas, x_las) =
                train_and_eval(kind, &inflected, &exp.target_test, exp.epochs, exp.seed)?;
            rows.push(ResultRow {
                source: source.name.clone(),
                kind,
                system: System::Baseline,
                uas: base_uas,
                las: base_las,
            });
            rows.push(ResultRow {
                source: source.name.clone(),
                kind,
                system: System::XInflected,
                uas: x_uas,
                las: x_las,
            });
            analysis_rows.push(AnalysisRow {
                pair: format!("{}<-{}", exp.target_name, source.name),
                kind,
                delta_uas: x_uas - base_uas,
                delta_las: x_las - base_las,
                features: [
                    exp.um_forms as f64,
                    exp.um_lemmas as f64,
                    source.train.len() as f64,
                    feats_shared,
                    lemmas_shared,
                ],
            });
        }
    }
    Ok(ZeroShotReport {
        target: exp.target_name.clone(),
        rows,
        analysis_rows,
    })
}

/// Run the few-shot setup.
pub fn run_few_shot(exp: &Experiment) -> Result<FewShotReport> {
    let target_train = exp
        .target_train
        .as_ref()
        .ok_or_else(|| Error::usage("run_few_shot: target training treebank is required"))?;
    if exp.target_test.is_empty() {
        return Err(Error::usage("run_few_shot: target test set is empty"));
    }

    // Target first, then sources in config order.
    let mut originals = vec![target_train.clone()];
    let mut inflecteds = vec![target_train.clone()];
    for source in &exp.sources {
        originals.push(source.train.clone());
        let (inflected, _) =
            xinflect_treebank(&source.train, &exp.inflector, &exp.table, &exp.covered);
        inflecteds.push(inflected);
    }
    let merged_original = merge_treebanks(&originals, "target+original")?;
    let merged_inflected = merge_treebanks(&inflecteds, "target+x-inflected")?;

    let mut rows = Vec::new();
    for &kind in &exp.parser_kinds {
        for (system, train) in [
            (System::TargetOnly, target_train),
            (System::TargetPlusOriginal, &merged_original),
            (System::TargetPlusXInflected, &merged_inflected),
        ] {
            let (uas, las) = train_and_eval(kind, train, &exp.target_test, exp.epochs, exp.seed)?;
            rows.push(ResultRow {
                source: "merged".to_string(),
                kind,
                system,
                uas,
                las,
            });
        }
    }
    Ok(FewShotReport {
        target: exp.target_name.clone(),
        rows,
    })
}

/// Percentage of the target's distinct FEATS (`Feature=Value` pairs) and
/// lemma types found in the source. Target-relative; `_`/empty lemmas are
/// not types. Empty target inventories yield 0.
pub fn overlap_stats(source: &Treebank, target: &Treebank) -> (f64, f64) {
    let feats_of = |tb: &Treebank| -> BTreeSet<String> {
        tb.sentences
            .iter()
            .flat_map(|s| &s.tokens)
            .flat_map(|t| t.feats.iter().map(|(k, v)| format!("{k}={v}")))
            .collect()
    };
    let lemmas_of = |tb: &Treebank| -> BTreeSet<String> {
        tb.sentences
            .iter()
            .flat_map(|s| &s.tokens)
            .filter(|t| !t.lemma.is_empty() && t.lemma != EMPTY)
            .map(|t| t.lemma.clone())
            .collect()
    };
    let pct = |target: &BTreeSet<String>, source: &BTreeSet<String>| -> f64 {
        if target.is_empty() {
            0.0
        } else {
            100.0 * target.intersection(source).count() as f64 / target.len() as f64
        }
    };
    let (sf, tf) = (feats_of(source), feats_of(target));
    let (sl, tl) = (lemmas_of(source), lemmas_of(target));
    (pct(&tf, &sf), pct(&tl, &sl))
}

/// Header notes emitted on every report, documenting the declared
/// conventions.
pub const REPORT_NOTES: &str = "# scores: UAS/LAS over all basic tokens, punctuation included\n\
     # overlap: target-relative (share of target types found in the source)\n";

/// Render result rows as an aligned text table.
pub fn render_result_table(target: &str, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "target: {target}");
    let _ = writeln!(
        out,
        "{:<24} {:<4} {:<20} {:>7} {:>7}",
        "source", "kind", "system", "UAS", "LAS"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<24} {:<4} {:<20} {:>7.2} {:>7.2}",
            r.source,
            r.kind.to_string(),
            r.system.to_string(),
            r.uas,
            r.las
        );
    }
    out
}

/// Render result rows as TSV, one row per result.
pub fn render_result_tsv(target: &str, rows: &[ResultRow]) -> String {
    let mut out = String::from(REPORT_NOTES);
    let _ = writeln!(out, "target\tsource\tkind\tsystem\tuas\tlas");
    for r in rows {
        let _ = writeln!(
            out,
            "{target}\t{}\t{}\t{}\t{:.2}\t{:.2}",
            r.source, r.kind, r.system, r.uas, r.las
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{Sentence, Token};
    use crate::schema::ConversionTable;

    fn simple_tb(name: &str, sentences: usize) -> Treebank {
        let mut tb = Treebank::new(name, "xx");
        for i in 0..sentences {
            let mut a = Token::new(1, &format!("a{i}"), 2);
            a.upos = "NOUN".to_string();
            a.lemma = format!("a{i}");
            a.deprel = "nsubj".to_string();
            let mut b = Token::new(2, &format!("b{i}"), 0);
            b.upos = "VERB".to_string();
            b.lemma = format!("b{i}");
            b.deprel = "root".to_string();
            tb.sentences.push(Sentence::from_tokens(vec![a, b]));
        }
        tb
    }

    fn toy_experiment(sources: usize) -> Experiment {
        Experiment {
            target_name: "target".to_string(),
            target_train: Some(simple_tb("target-train", 4)),
            target_test: simple_tb("target-test", 3),
            sources: (0..sources)
                .map(|i| Source {
                    name: format!("src{i}"),
                    language: "yy".to_string(),
                    train: simple_tb(&format!("src{i}"), 4),
                })
                .collect(),
            inflector: InflectorModel::empty("xx"),
            table: ConversionTable::bundled(),
            covered: BTreeSet::new(),
            um_forms: 100,
            um_lemmas: 10,
            parser_kinds: vec![ParserKind::Gb, ParserKind::Sl],
            epochs: 3,
            seed: 42,
        }
    }

    #[test]
    fn zero_shot_row_cardinality() {
        let exp = toy_experiment(3);
        let report = run_zero_shot(&exp).unwrap();
        assert_eq!(report.rows.len(), 12); // 3 sources x 2 kinds x 2 systems
        assert_eq!(report.analysis_rows.len(), 6);
    }

    #[test]
    fn zero_shot_identity_when_nothing_covered() {
        // covered = {} makes x-inflection the identity, so deltas are 0.
        let exp = toy_experiment(2);
        let report = run_zero_shot(&exp).unwrap();
        for row in &report.analysis_rows {
            assert_eq!(row.delta_uas, 0.0);
            assert_eq!(row.delta_las, 0.0);
        }
        for pair in report.rows.chunks(2) {
            assert_eq!(pair[0].uas, pair[1].uas);
            assert_eq!(pair[0].las, pair[1].las);
        }
    }

    #[test]
    fn few_shot_row_cardinality() {
        let exp = toy_experiment(2);
        let report = run_few_shot(&exp).unwrap();
        assert_eq!(report.rows.len(), 6); // 2 kinds x 3 systems
    }

    #[test]
    fn few_shot_without_sources_degenerates() {
        let exp = toy_experiment(0);
        let report = run_few_shot(&exp).unwrap();
        for kind_rows in report.rows.chunks(3) {
            assert_eq!(kind_rows[0].uas, kind_rows[1].uas);
            assert_eq!(kind_rows[0].uas, kind_rows[2].uas);
            assert_eq!(kind_rows[0].las, kind_rows[1].las);
            assert_eq!(kind_rows[0].las, kind_rows[2].las);
        }
    }

    #[test]
    fn few_shot_requires_target_train() {
        let mut exp = toy_experiment(1);
        exp.target_train = None;
        assert!(matches!(run_few_shot(&exp), Err(Error::Usage(_))));
    }

    #[test]
    fn overlap_identical_and_disjoint() {
        let mut a = Treebank::new("a", "xx");
        let mut t1 = Token::new(1, "x", 0);
        t1.lemma = "x".to_string();
        t1.set_feats(vec![("Case".to_string(), "Nom".to_string())]);
        a.sentences.push(Sentence::from_tokens(vec![t1]));
        assert_eq!(overlap_stats(&a, &a), (100.0, 100.0));

        let mut b = Treebank::new("b", "xx");
        let mut t2 = Token::new(1, "y", 0);
        t2.lemma = "y".to_string();
        t2.set_feats(vec![("Case".to_string(), "Acc".to_string())]);
        b.sentences.push(Sentence::from_tokens(vec![t2]));
        assert_eq!(overlap_stats(&a, &b), (0.0, 0.0));
    }

    #[test]
    fn overlap_counts_types() {
        // Target has 4 lemma types, 1 of which appears in the source.
        let mut target = Treebank::new("t", "xx");
        let mut tokens = Vec::new();
        for (i, lemma) in ["casa", "perro", "gato", "sol"].iter().enumerate() {
            let mut t = Token::new(i + 1, lemma, if i == 0 { 0 } else { 1 });
            t.lemma = lemma.to_string();
            tokens.push(t);
        }
        target.sentences.push(Sentence::from_tokens(tokens));
        let mut source = Treebank::new("s", "xx");
        let mut t = Token::new(1, "casa", 0);
        t.lemma = "casa".to_string();
        source.sentences.push(Sentence::from_tokens(vec![t]));
        let (_, lemmas) = overlap_stats(&source, &target);
        assert_eq!(lemmas, 25.0);
    }
}
