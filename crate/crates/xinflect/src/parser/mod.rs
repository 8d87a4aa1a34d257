//! Trainable dependency parsers behind one interface: a 2-planar
//! sequence-labeling parser and a graph-based parser with maximum
//! spanning tree decoding.
//!
//! Both use averaged linear models over explicit string features; the
//! decoders (2-planar stack decoding, Chu–Liu/Edmonds) do the structural
//! work. Training is deterministic given (data, epochs, seed).

mod mst;
mod perceptron;
mod planar;

pub use mst::{mst_decode, ScoreMatrix};
pub use planar::{
    arcs_cross, decode_2planar, encode_2planar, plane_assignment, Arc, EncodedSentence,
    PlaneAssignment, TokenLabel,
};

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::conllu::{Sentence, Token, Treebank};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

use perceptron::{predict_scores, score_arc, ArcScorerTrainer, MulticlassTrainer};

/// Parser family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParserKind {
    /// Sequence labeling over 2-planar bracket labels.
    Sl,
    /// Graph-based arc scoring with MST decoding.
    Gb,
}

impl fmt::Display for ParserKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParserKind::Sl => "sl",
            ParserKind::Gb => "gb",
        })
    }
}

impl std::str::FromStr for ParserKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl" => Ok(ParserKind::Sl),
            "gb" => Ok(ParserKind::Gb),
            other => Err(Error::usage(format!("unknown parser kind {other:?} (expected sl or gb)"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Sl {
        classes: Vec<TokenLabel>,
        weights: HashMap<String, Vec<f64>>,
    },
    Gb {
        deprels: Vec<String>,
        arc_weights: HashMap<String, f64>,
        label_weights: HashMap<String, Vec<f64>>,
    },
}

/// A trained parser.
#[derive(Debug, Clone)]
pub struct ParserModel {
    pub kind: ParserKind,
    pub epochs: usize,
    pub seed: u64,
    inner: Inner,
}

const BOUNDARY: &str = "<pad>";
const ROOT_MARK: &str = "<root>";

fn token_field(tokens: &[Token], idx: isize, field: fn(&Token) -> String) -> String {
    if idx < 0 || idx as usize >= tokens.len() {
        BOUNDARY.to_string()
    } else {
        field(&tokens[idx as usize])
    }
}

fn f_form(t: &Token) -> String {
    t.form.clone()
}
fn f_lemma(t: &Token) -> String {
    t.lemma.clone()
}
fn f_upos(t: &Token) -> String {
    t.upos.clone()
}
fn f_feats(t: &Token) -> String {
    t.feats_column()
}

/// Window features for the sequence labeler: forms, lemmas, UPOS and FEATS
/// at offsets -2..=2 plus character prefixes/suffixes of the focus form.
fn sl_features(tokens: &[Token], i: usize) -> Vec<String> {
    let mut fs = Vec::with_capacity(32);
    fs.push("b".to_string());
    for off in -2i32..=2 {
        let idx = i as isize + off as isize;
        fs.push(format!("f{off}={}", token_field(tokens, idx, f_form)));
        fs.push(format!("l{off}={}", token_field(tokens, idx, f_lemma)));
        fs.push(format!("u{off}={}", token_field(tokens, idx, f_upos)));
        fs.push(format!("m{off}={}", token_field(tokens, idx, f_feats)));
    }
    fs.push(format!(
        "uu={}|{}",
        token_field(tokens, i as isize - 1, f_upos),
        token_field(tokens, i as isize, f_upos)
    ));
    fs.push(format!(
        "uu+={}|{}",
        token_field(tokens, i as isize, f_upos),
        token_field(tokens, i as isize + 1, f_upos)
    ));
    let chars: Vec<char> = tokens[i].form.chars().collect();
    for k in 1..=3usize.min(chars.len()) {
        fs.push(format!("pre{k}={}", chars[..k].iter().collect::<String>()));
        fs.push(format!("suf{k}={}", chars[chars.len() - k..].iter().collect::<String>()));
    }
    fs
}

/// Arc features for the graph-based parser: head and dependent form,
/// lemma, UPOS and FEATS, their conjunctions, and the signed distance
/// (clamped at 6).
fn gb_features(tokens: &[Token], head: usize, dep: usize) -> Vec<String> {
    let d = &tokens[dep - 1];
    let (hf, hl, hu, hm) = if head == 0 {
        (
            ROOT_MARK.to_string(),
            ROOT_MARK.to_string(),
            ROOT_MARK.to_string(),
            ROOT_MARK.to_string(),
        )
    } else {
        let h = &tokens[head - 1];
        (h.form.clone(), h.lemma.clone(), h.upos.clone(), h.feats_column())
    };
    let df = &d.form;
    let du = &d.upos;
    let signed = dep as i64 - head as i64;
    let dist = signed.clamp(-6, 6);

    vec![
        "b".to_string(),
        format!("hf={hf}"),
        format!("hl={hl}"),
        format!("hu={hu}"),
        format!("hm={hm}"),
        format!("df={df}"),
        format!("dl={}", d.lemma),
        format!("du={du}"),
        format!("dm={}", d.feats_column()),
        format!("hf|df={hf}|{df}"),
        format!("hu|du={hu}|{du}"),
        format!("hf|du={hf}|{du}"),
        format!("hu|df={hu}|{df}"),
        format!("hl|dl={hl}|{}", d.lemma),
        format!("dist={dist}"),
        format!("hu|du|dist={hu}|{du}|{dist}"),
        format!("hf|dist={hf}|{dist}"),
    ]
}

/// Train a parser. Errors on a treebank without tokens.
pub fn train_parser(
    kind: ParserKind,
    train: &Treebank,
    epochs: usize,
    seed: u64,
) -> Result<ParserModel> {
    if train.token_count() == 0 {
        return Err(Error::usage("train_parser: training treebank has no tokens"));
    }
    let inner = match kind {
        ParserKind::Sl => train_sl(train, epochs, seed),
        ParserKind::Gb => train_gb(train, epochs, seed),
    };
    Ok(ParserModel {
        kind,
        epochs,
        seed,
        inner,
    })
}

fn train_sl(train: &Treebank, epochs: usize, seed: u64) -> Inner {
    // Gold label sequences and the class inventory, in first-seen order.
    let mut classes: Vec<TokenLabel> = Vec::new();
    let mut class_ids: HashMap<TokenLabel, usize> = HashMap::new();
    let mut gold: Vec<Vec<usize>> = Vec::with_capacity(train.len());
    for s in &train.sentences {
        let enc = encode_2planar(s);
        if !enc.dropped.is_empty() {
            log::info!(
                "train_parser: {} arcs not 2-planar in a sentence of {}; dropped at encoding",
                enc.dropped.len(),
                train.name
            );
        }
        gold.push(
            enc.labels
                .into_iter()
                .map(|label| {
                    *class_ids.entry(label.clone()).or_insert_with(|| {
                        classes.push(label);
                        classes.len() - 1
                    })
                })
                .collect(),
        );
    }

    let mut trainer = MulticlassTrainer::new(classes.len());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = SplitMix64::new(seed);
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for &si in &order {
            let tokens = &train.sentences[si].tokens;
            for (i, &gold_class) in gold[si].iter().enumerate() {
                let fs = sl_features(tokens, i);
                let pred = trainer.predict(&fs);
                trainer.update(&fs, gold_class, pred);
            }
        }
    }
    Inner::Sl {
        classes,
        weights: trainer.finalize(),
    }
}

fn train_gb(train: &Treebank, epochs: usize, seed: u64) -> Inner {
    let mut deprels: Vec<String> = Vec::new();
    let mut deprel_ids: HashMap<String, usize> = HashMap::new();
    for s in &train.sentences {
        for t in &s.tokens {
            deprel_ids.entry(t.deprel.clone()).or_insert_with(|| {
                deprels.push(t.deprel.clone());
                deprels.len() - 1
            });
        }
    }

    let mut arcs = ArcScorerTrainer::new();
    let mut labeler = MulticlassTrainer::new(deprels.len());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = SplitMix64::new(seed);
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for &si in &order {
            let tokens = &train.sentences[si].tokens;
            let n = tokens.len();
            if n == 0 {
                continue;
            }
            arcs.tick();
            let mut matrix = ScoreMatrix::new(n);
            for h in 0..=n {
                for d in 1..=n {
                    if h != d {
                        matrix.set(h, d, arcs.score(&gb_features(tokens, h, d)));
                    }
                }
            }
            let predicted = mst_decode(&matrix);
            for (i, tok) in tokens.iter().enumerate() {
                if predicted[i] != tok.head {
                    arcs.update(&gb_features(tokens, tok.head, tok.id), 1.0);
                    arcs.update(&gb_features(tokens, predicted[i], tok.id), -1.0);
                }
                let fs = gb_features(tokens, tok.head, tok.id);
                let pred_label = labeler.predict(&fs);
                labeler.update(&fs, deprel_ids[&tok.deprel], pred_label);
            }
        }
    }
    Inner::Gb {
        deprels,
        arc_weights: arcs.finalize(),
        label_weights: labeler.finalize(),
    }
}

/// Parse one sentence into heads and deprels. The output always passes
/// tree validation.
pub fn parse(model: &ParserModel, sentence: &Sentence) -> (Vec<usize>, Vec<String>) {
    let tokens = &sentence.tokens;
    let n = tokens.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    match &model.inner {
        Inner::Sl { classes, weights } => {
            let labels: Vec<TokenLabel> = (0..n)
                .map(|i| {
                    let fs = sl_features(tokens, i);
                    classes[predict_scores(weights, classes.len(), &fs)].clone()
                })
                .collect();
            decode_2planar(&labels)
        }
        Inner::Gb {
            deprels,
            arc_weights,
            label_weights,
        } => {
            let mut matrix = ScoreMatrix::new(n);
            for h in 0..=n {
                for d in 1..=n {
                    if h != d {
                        matrix.set(h, d, score_arc(arc_weights, &gb_features(tokens, h, d)));
                    }
                }
            }
            let mut heads = mst_decode(&matrix);
            enforce_single_root(&mut heads);
            let labels = heads
                .iter()
                .enumerate()
                .map(|(i, &h)| {
                    let fs = gb_features(tokens, h, i + 1);
                    deprels[predict_scores(label_weights, deprels.len(), &fs)].clone()
                })
                .collect();
            (heads, labels)
        }
    }
}

/// Keep the first root child and re-attach any other children of the root
/// to it.
fn enforce_single_root(heads: &mut [usize]) {
    let mut first_root = None;
    for i in 0..heads.len() {
        if heads[i] == 0 {
            match first_root {
                None => first_root = Some(i + 1),
                Some(r) => heads[i] = r,
            }
        }
    }
}

/// Parse every sentence of a treebank, filling HEAD and DEPREL.
pub fn parse_treebank(model: &ParserModel, tb: &Treebank) -> Treebank {
    let mut out = tb.clone();
    for s in &mut out.sentences {
        let (heads, deprels) = parse(model, s);
        for (tok, (head, deprel)) in s.tokens.iter_mut().zip(heads.into_iter().zip(deprels)) {
            tok.head = head;
            tok.deprel = deprel;
        }
    }
    out
}

const MODEL_MAGIC: &str = "xinflect-parser";
const MODEL_VERSION: &str = "v1";

/// Serialize a model to the versioned text format: a header
/// `xinflect-parser<TAB>v1<TAB>kind<TAB>epochs<TAB>seed`, the label
/// inventory (`C` lines for SL classes, `D` lines for GB deprels), and
/// sorted weight lines (`W` for SL, `A`/`L` for GB). Zero weights are
/// omitted.
pub fn render_parser_model(model: &ParserModel) -> String {
    let mut out = format!(
        "{MODEL_MAGIC}\t{MODEL_VERSION}\t{}\t{}\t{}\n",
        model.kind, model.epochs, model.seed
    );
    match &model.inner {
        Inner::Sl { classes, weights } => {
            for c in classes {
                out.push_str(&format!("C\t{}\t{}\t{}\n", c.plane1, c.plane2, c.deprel));
            }
            write_class_weights(&mut out, "W", weights);
        }
        Inner::Gb {
            deprels,
            arc_weights,
            label_weights,
        } => {
            for d in deprels {
                out.push_str(&format!("D\t{d}\n"));
            }
            let mut feats: Vec<(&String, &f64)> = arc_weights.iter().collect();
            feats.sort_by(|a, b| a.0.cmp(b.0));
            for (f, w) in feats {
                if *w != 0.0 {
                    out.push_str(&format!("A\t{f}\t{w}\n"));
                }
            }
            write_class_weights(&mut out, "L", label_weights);
        }
    }
    out
}

fn write_class_weights(out: &mut String, tag: &str, weights: &HashMap<String, Vec<f64>>) {
    let mut feats: Vec<(&String, &Vec<f64>)> = weights.iter().collect();
    feats.sort_by(|a, b| a.0.cmp(b.0));
    for (f, per_class) in feats {
        for (c, w) in per_class.iter().enumerate() {
            if *w != 0.0 {
                out.push_str(&format!("{tag}\t{f}\t{c}\t{w}\n"));
            }
        }
    }
}

/// Parse the serialization produced by [`render_parser_model`].
pub fn parse_parser_model(text: &str, name: &str) -> Result<ParserModel> {
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(name, 1, "empty model file"))?;
    let h: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
    if h.len() != 5 || h[0] != MODEL_MAGIC {
        return Err(Error::parse(name, 1, "not a parser model file"));
    }
    if h[1] != MODEL_VERSION {
        return Err(Error::parse(name, 1, format!("unsupported model version {:?}", h[1])));
    }
    let kind: ParserKind = h[2].parse()?;
    let epochs: usize = h[3]
        .parse()
        .map_err(|_| Error::parse(name, 1, "bad epoch count"))?;
    let seed: u64 = h[4].parse().map_err(|_| Error::parse(name, 1, "bad seed"))?;

    let mut classes: Vec<TokenLabel> = Vec::new();
    let mut deprels: Vec<String> = Vec::new();
    let mut sl_weights: HashMap<String, Vec<f64>> = HashMap::new();
    let mut arc_weights: HashMap<String, f64> = HashMap::new();
    let mut label_weights: HashMap<String, Vec<f64>> = HashMap::new();

    for (i, raw) in lines {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = |msg: &str| Error::parse(name, i + 1, msg.to_string());
        match cols[0] {
            "C" if cols.len() == 4 => classes.push(TokenLabel {
                plane1: cols[1].to_string(),
                plane2: cols[2].to_string(),
                deprel: cols[3].to_string(),
            }),
            "D" if cols.len() == 2 => deprels.push(cols[1].to_string()),
            "W" | "L" if cols.len() == 4 => {
                let class: usize = cols[2].parse().map_err(|_| bad("bad class id"))?;
                let w: f64 = cols[3].parse().map_err(|_| bad("bad weight"))?;
                let n = if cols[0] == "W" { classes.len() } else { deprels.len() };
                if class >= n {
                    return Err(bad("class id out of range"));
                }
                let target = if cols[0] == "W" { &mut sl_weights } else { &mut label_weights };
                target
                    .entry(cols[1].to_string())
                    .or_insert_with(|| vec![0.0; n])[class] = w;
            }
            "A" if cols.len() == 3 => {
                let w: f64 = cols[2].parse().map_err(|_| bad("bad weight"))?;
                arc_weights.insert(cols[1].to_string(), w);
            }
            _ => return Err(Error::parse(name, i + 1, format!("malformed model line {line:?}"))),
        }
    }

    let inner = match kind {
        ParserKind::Sl => Inner::Sl {
            classes,
            weights: sl_weights,
        },
        ParserKind::Gb => Inner::Gb {
            deprels,
            arc_weights,
            label_weights,
        },
    };
    Ok(ParserModel {
        kind,
        epochs,
        seed,
        inner,
    })
}

pub fn save_parser_model(model: &ParserModel, path: &Path) -> Result<()> {
    fs::write(path, render_parser_model(model))?;
    Ok(())
}

pub fn load_parser_model(path: &Path) -> Result<ParserModel> {
    let text = fs::read_to_string(path)?;
    parse_parser_model(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::validate_tree;

    fn sentence(words: &[(&str, &str, usize, &str)]) -> Sentence {
        Sentence::from_tokens(
            words
                .iter()
                .enumerate()
                .map(|(i, (form, upos, head, deprel))| {
                    let mut t = Token::new(i + 1, form, *head);
                    t.lemma = form.to_lowercase();
                    t.upos = upos.to_string();
                    t.deprel = deprel.to_string();
                    t
                })
                .collect(),
        )
    }

    fn singleton_treebank() -> Treebank {
        let mut tb = Treebank::new("toy", "xx");
        tb.sentences.push(sentence(&[
            ("the", "DET", 2, "det"),
            ("cat", "NOUN", 3, "nsubj"),
            ("slept", "VERB", 0, "root"),
            ("soundly", "ADV", 3, "advmod"),
        ]));
        tb
    }

    #[test]
    fn memorizes_singleton_both_kinds() {
        let tb = singleton_treebank();
        let gold_heads = tb.sentences[0].heads();
        let gold_deprels: Vec<String> =
            tb.sentences[0].tokens.iter().map(|t| t.deprel.clone()).collect();
        for kind in [ParserKind::Sl, ParserKind::Gb] {
            let model = train_parser(kind, &tb, 20, 42).unwrap();
            let (heads, deprels) = parse(&model, &tb.sentences[0]);
            assert_eq!(heads, gold_heads, "{kind}");
            assert_eq!(deprels, gold_deprels, "{kind}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let tb = singleton_treebank();
        for kind in [ParserKind::Sl, ParserKind::Gb] {
            let a = train_parser(kind, &tb, 5, 7).unwrap();
            let b = train_parser(kind, &tb, 5, 7).unwrap();
            assert_eq!(render_parser_model(&a), render_parser_model(&b), "{kind}");
        }
    }

    #[test]
    fn empty_treebank_is_usage_error() {
        let tb = Treebank::new("empty", "xx");
        assert!(matches!(
            train_parser(ParserKind::Gb, &tb, 1, 0),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn output_is_always_a_valid_tree() {
        let tb = singleton_treebank();
        for kind in [ParserKind::Sl, ParserKind::Gb] {
            let model = train_parser(kind, &tb, 3, 1).unwrap();
            // Parse unrelated sentences of various lengths.
            for n in 1..7 {
                let words: Vec<(String, &str, usize, &str)> = (0..n)
                    .map(|i| (format!("w{i}"), "X", 0, "dep"))
                    .collect();
                let s = Sentence::from_tokens(
                    words
                        .iter()
                        .enumerate()
                        .map(|(i, (form, upos, _, deprel))| {
                            let mut t = Token::new(i + 1, form, 0);
                            t.upos = upos.to_string();
                            t.deprel = deprel.to_string();
                            t
                        })
                        .collect(),
                );
                let (heads, deprels) = parse(&model, &s);
                let mut parsed = s.clone();
                for (tok, (h, d)) in parsed.tokens.iter_mut().zip(heads.iter().zip(&deprels)) {
                    tok.head = *h;
                    tok.deprel = d.clone();
                }
                assert!(validate_tree(&parsed).is_empty(), "{kind} n={n}: {heads:?}");
            }
        }
    }

    #[test]
    fn one_token_sentence_is_rooted() {
        let tb = singleton_treebank();
        for kind in [ParserKind::Sl, ParserKind::Gb] {
            let model = train_parser(kind, &tb, 5, 42).unwrap();
            let s = sentence(&[("hello", "INTJ", 0, "root")]);
            let (heads, deprels) = parse(&model, &s);
            assert_eq!(heads, vec![0], "{kind}");
            assert_eq!(deprels.len(), 1);
        }
    }

    #[test]
    fn model_round_trips_through_text() {
        let tb = singleton_treebank();
        for kind in [ParserKind::Sl, ParserKind::Gb] {
            let model = train_parser(kind, &tb, 5, 42).unwrap();
            let text = render_parser_model(&model);
            let parsed = parse_parser_model(&text, "model").unwrap();
            assert_eq!(render_parser_model(&parsed), text, "{kind}");
            // Behavioral equality on the training sentence.
            assert_eq!(
                parse(&model, &tb.sentences[0]),
                parse(&parsed, &tb.sentences[0]),
                "{kind}"
            );
        }
    }

    #[test]
    fn single_root_is_enforced() {
        let mut heads = vec![0, 0, 2, 0];
        enforce_single_root(&mut heads);
        assert_eq!(heads, vec![0, 1, 2, 1]);
    }
}
