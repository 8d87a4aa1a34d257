//! Lossless CoNLL-U data model: reader, writer, tree validation and
//! treebank merging.
//!
//! The reader keeps every column of every line so that files which are
//! already in canonical form (LF line endings, `_` for empty columns,
//! FEATS sorted case-insensitively) survive a read/write cycle
//! byte-for-byte. Multiword-token and empty-node lines are carried as
//! opaque column vectors and re-emitted verbatim; only basic token lines
//! are ever rewritten by the rest of the pipeline.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// The CoNLL-U empty-column marker.
pub const EMPTY: &str = "_";

/// A basic token line (integer ID).
///
/// String columns hold the raw column value; `_` means "empty". FEATS is
/// parsed into `(name, value)` pairs and kept sorted case-insensitively by
/// name, which is also the serialization order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: Vec<(String, String)>,
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// A token with everything but id/form/head left empty.
    pub fn new(id: usize, form: &str, head: usize) -> Self {
        Token {
            id,
            form: form.to_string(),
            lemma: EMPTY.to_string(),
            upos: EMPTY.to_string(),
            xpos: EMPTY.to_string(),
            feats: Vec::new(),
            head,
            deprel: EMPTY.to_string(),
            deps: EMPTY.to_string(),
            misc: EMPTY.to_string(),
        }
    }

    /// Set FEATS from `(name, value)` pairs, restoring the canonical
    /// case-insensitive order.
    pub fn set_feats(&mut self, mut feats: Vec<(String, String)>) {
        sort_feats(&mut feats);
        self.feats = feats;
    }

    /// FEATS rendered as the CoNLL-U column (`_` when empty).
    pub fn feats_column(&self) -> String {
        render_feats(&self.feats)
    }

    fn write_line(&self, out: &mut String) {
        use fmt::Write;
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id,
            col(&self.form),
            col(&self.lemma),
            col(&self.upos),
            col(&self.xpos),
            render_feats(&self.feats),
            self.head,
            col(&self.deprel),
            col(&self.deps),
            col(&self.misc),
        );
    }
}

fn col(s: &str) -> &str {
    if s.is_empty() {
        EMPTY
    } else {
        s
    }
}

fn sort_feats(feats: &mut [(String, String)]) {
    feats.sort_by(|a, b| {
        a.0.to_lowercase()
            .cmp(&b.0.to_lowercase())
            .then_with(|| a.0.cmp(&b.0))
    });
}

fn render_feats(feats: &[(String, String)]) -> String {
    if feats.is_empty() {
        EMPTY.to_string()
    } else {
        feats
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// A multiword-token line (`i-j` ID), kept as its 10 raw columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mwt {
    pub start: usize,
    pub end: usize,
    pub cols: Vec<String>,
}

impl Mwt {
    pub fn new(start: usize, end: usize, form: &str, misc: &str) -> Self {
        let mut cols = vec![EMPTY.to_string(); 10];
        cols[0] = format!("{start}-{end}");
        cols[1] = form.to_string();
        cols[9] = misc.to_string();
        Mwt { start, end, cols }
    }

    pub fn form(&self) -> &str {
        &self.cols[1]
    }

    pub fn misc(&self) -> &str {
        &self.cols[9]
    }
}

/// An empty-node line (`i.j` ID), kept as its 10 raw columns. `anchor` is
/// the integer part of the ID: the node is emitted after basic token
/// `anchor` (or before token 1 when 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyNode {
    pub anchor: usize,
    pub cols: Vec<String>,
}

/// One sentence: comments, basic tokens, and opaque MWT/empty-node lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    /// Raw comment lines, including the leading `#`.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    pub mwts: Vec<Mwt>,
    pub empty_nodes: Vec<EmptyNode>,
}

impl Sentence {
    pub fn from_tokens(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            ..Sentence::default()
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Head indices in token order (`heads()[i]` is the head of token `i+1`).
    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    fn write_block(&self, out: &mut String) {
        for c in &self.comments {
            out.push_str(c);
            out.push('\n');
        }
        for e in self.empty_nodes.iter().filter(|e| e.anchor == 0) {
            out.push_str(&e.cols.join("\t"));
            out.push('\n');
        }
        for token in &self.tokens {
            for m in self.mwts.iter().filter(|m| m.start == token.id) {
                out.push_str(&m.cols.join("\t"));
                out.push('\n');
            }
            token.write_line(out);
            out.push('\n');
            for e in self.empty_nodes.iter().filter(|e| e.anchor == token.id) {
                out.push_str(&e.cols.join("\t"));
                out.push('\n');
            }
        }
    }
}

/// An ordered collection of sentences with a name and language code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Treebank {
    pub sentences: Vec<Sentence>,
    pub language: String,
    pub name: String,
}

impl Treebank {
    pub fn new(name: &str, language: &str) -> Self {
        Treebank {
            sentences: Vec::new(),
            language: language.to_string(),
            name: name.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }
}

/// Parse CoNLL-U text. `name` is used in error messages and becomes the
/// treebank name.
///
/// Errors on: non-UTF-8 input, lines with a column count other than 10,
/// non-integer ID or HEAD on a basic token line, non-contiguous token IDs,
/// and malformed `i-j` / `i.j` IDs. Head/root/cycle problems are *not*
/// errors; they are reported by [`validate_tree`].
pub fn read_conllu(bytes: &[u8], name: &str, language: &str) -> Result<Treebank> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(name, 0, format!("input is not valid UTF-8: {e}")))?;

    let mut tb = Treebank::new(name, language);
    let mut current = Sentence::default();
    let mut line_no = 0usize;

    for raw in text.split('\n') {
        line_no += 1;
        // Normalize CRLF; byte identity is only promised for LF inputs.
        let line = raw.strip_suffix('\r').unwrap_or(raw);

        if line.is_empty() {
            close_sentence(&mut tb, &mut current, name, line_no)?;
            continue;
        }
        if line.starts_with('#') {
            current.comments.push(line.to_string());
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                name,
                line_no,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }

        let id_col = cols[0];
        if let Some((a, b)) = id_col.split_once('-') {
            let start = parse_index(a, name, line_no, "multiword token start")?;
            let end = parse_index(b, name, line_no, "multiword token end")?;
            if end < start {
                return Err(Error::parse(
                    name,
                    line_no,
                    format!("multiword token range {start}-{end} is reversed"),
                ));
            }
            if start != current.tokens.len() + 1 {
                return Err(Error::parse(
                    name,
                    line_no,
                    format!(
                        "multiword token {start}-{end} does not start at the next token id {}",
                        current.tokens.len() + 1
                    ),
                ));
            }
            current.mwts.push(Mwt {
                start,
                end,
                cols: cols.iter().map(|c| c.to_string()).collect(),
            });
        } else if let Some((a, _)) = id_col.split_once('.') {
            let anchor = parse_index_or_zero(a, name, line_no, "empty node anchor")?;
            if anchor != current.tokens.len() {
                return Err(Error::parse(
                    name,
                    line_no,
                    format!(
                        "empty node {id_col} is anchored at {anchor} but follows token {}",
                        current.tokens.len()
                    ),
                ));
            }
            current.empty_nodes.push(EmptyNode {
                anchor,
                cols: cols.iter().map(|c| c.to_string()).collect(),
            });
        } else {
            let id = parse_index(id_col, name, line_no, "token id")?;
            if id != current.tokens.len() + 1 {
                return Err(Error::parse(
                    name,
                    line_no,
                    format!("token id {id} is not contiguous (expected {})", current.tokens.len() + 1),
                ));
            }
            let head = parse_index_or_zero(cols[6], name, line_no, "head")?;
            let feats = parse_feats(cols[5], name, line_no)?;
            current.tokens.push(Token {
                id,
                form: cols[1].to_string(),
                lemma: cols[2].to_string(),
                upos: cols[3].to_string(),
                xpos: cols[4].to_string(),
                feats,
                head,
                deprel: cols[7].to_string(),
                deps: cols[8].to_string(),
                misc: cols[9].to_string(),
            });
        }
    }
    close_sentence(&mut tb, &mut current, name, line_no)?;

    // MWT ranges must not run past the sentence.
    for (i, s) in tb.sentences.iter().enumerate() {
        for m in &s.mwts {
            if m.end > s.tokens.len() {
                return Err(Error::parse(
                    name,
                    0,
                    format!(
                        "sentence {}: multiword token {}-{} exceeds sentence length {}",
                        i + 1,
                        m.start,
                        m.end,
                        s.tokens.len()
                    ),
                ));
            }
        }
    }

    Ok(tb)
}

fn close_sentence(
    tb: &mut Treebank,
    current: &mut Sentence,
    name: &str,
    line_no: usize,
) -> Result<()> {
    if !current.tokens.is_empty() {
        tb.sentences.push(std::mem::take(current));
    } else if !current.comments.is_empty() || !current.empty_nodes.is_empty() {
        return Err(Error::parse(name, line_no, "sentence block contains no tokens"));
    }
    Ok(())
}

fn parse_index(s: &str, name: &str, line: usize, what: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::parse(name, line, format!("{what} is not a positive integer: {s:?}"))),
    }
}

fn parse_index_or_zero(s: &str, name: &str, line: usize, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::parse(name, line, format!("{what} is not an integer: {s:?}")))
}

fn parse_feats(col: &str, name: &str, line: usize) -> Result<Vec<(String, String)>> {
    if col == EMPTY || col.is_empty() {
        return Ok(Vec::new());
    }
    let mut feats = Vec::new();
    for item in col.split('|') {
        match item.split_once('=') {
            Some((k, v)) if !k.is_empty() => feats.push((k.to_string(), v.to_string())),
            _ => {
                return Err(Error::parse(
                    name,
                    line,
                    format!("malformed FEATS item {item:?} (expected Name=Value)"),
                ))
            }
        }
    }
    sort_feats(&mut feats);
    Ok(feats)
}

/// Serialize a treebank to CoNLL-U text. Each sentence block ends with one
/// blank line, including the last, matching released UD files.
pub fn write_conllu(tb: &Treebank) -> String {
    let mut out = String::new();
    for s in &tb.sentences {
        s.write_block(&mut out);
        out.push('\n');
    }
    out
}

/// Read a treebank from disk; the file stem becomes the name.
pub fn read_conllu_file(path: &Path, language: &str) -> Result<Treebank> {
    let bytes = fs::read(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    read_conllu(&bytes, &name, language)
}

/// Write a treebank to disk.
pub fn write_conllu_file(tb: &Treebank, path: &Path) -> Result<()> {
    fs::write(path, write_conllu(tb))?;
    Ok(())
}

/// A well-formedness problem found by [`validate_tree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoRoot,
    MultipleRoots { ids: Vec<usize> },
    HeadOutOfRange { id: usize, head: usize },
    SelfHead { id: usize },
    Cycle { ids: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoRoot => write!(f, "no token has head 0"),
            Violation::MultipleRoots { ids } => write!(f, "multiple roots: tokens {ids:?}"),
            Violation::HeadOutOfRange { id, head } => {
                write!(f, "token {id} has out-of-range head {head}")
            }
            Violation::SelfHead { id } => write!(f, "token {id} is its own head"),
            Violation::Cycle { ids } => write!(f, "cycle through tokens {ids:?}"),
        }
    }
}

/// Check single-rootedness, head ranges and acyclicity. An empty result
/// means the sentence is a valid dependency tree. Violations are data,
/// not errors.
pub fn validate_tree(sentence: &Sentence) -> Vec<Violation> {
    let n = sentence.tokens.len();
    let mut violations = Vec::new();

    let roots: Vec<usize> = sentence
        .tokens
        .iter()
        .filter(|t| t.head == 0)
        .map(|t| t.id)
        .collect();
    match roots.len() {
        0 if n > 0 => violations.push(Violation::NoRoot),
        0 | 1 => {}
        _ => violations.push(Violation::MultipleRoots { ids: roots }),
    }

    for t in &sentence.tokens {
        if t.head == t.id {
            violations.push(Violation::SelfHead { id: t.id });
        } else if t.head > n {
            violations.push(Violation::HeadOutOfRange {
                id: t.id,
                head: t.head,
            });
        }
    }

    // Cycle detection over in-range, non-self heads.
    let head_of = |id: usize| -> Option<usize> {
        let h = sentence.tokens[id - 1].head;
        (h >= 1 && h <= n && h != id).then_some(h)
    };
    let mut state = vec![0u8; n + 1]; // 0 unvisited, 1 on path, 2 done
    for start in 1..=n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if state[cur] == 1 {
                // Found a cycle: the tail of `path` from `cur`.
                let pos = path.iter().position(|&x| x == cur).unwrap();
                violations.push(Violation::Cycle {
                    ids: path[pos..].to_vec(),
                });
                break;
            }
            if state[cur] == 2 {
                break;
            }
            state[cur] = 1;
            path.push(cur);
            match head_of(cur) {
                Some(h) => cur = h,
                None => break,
            }
        }
        for &p in &path {
            state[p] = 2;
        }
    }

    violations
}

/// Concatenate treebanks in order under a new name. The language is taken
/// from the first input. Errors on an empty list.
pub fn merge_treebanks(tbs: &[Treebank], name: &str) -> Result<Treebank> {
    let first = tbs
        .first()
        .ok_or_else(|| Error::usage("merge_treebanks: empty treebank list"))?;
    let mut merged = Treebank::new(name, &first.language);
    for tb in tbs {
        merged.sentences.extend(tb.sentences.iter().cloned());
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(heads: &[usize]) -> Sentence {
        Sentence::from_tokens(
            heads
                .iter()
                .enumerate()
                .map(|(i, &h)| Token::new(i + 1, &format!("w{}", i + 1), h))
                .collect(),
        )
    }

    #[test]
    fn two_token_sentence() {
        let text = "1\tHe\t_\t_\t_\t_\t2\t_\t_\t_\n2\tleft\t_\t_\t_\t_\t0\t_\t_\t_\n\n";
        let tb = read_conllu(text.as_bytes(), "toy", "en").unwrap();
        assert_eq!(tb.len(), 1);
        assert_eq!(tb.sentences[0].len(), 2);
        assert_eq!(tb.sentences[0].heads(), vec![2, 0]);
        assert_eq!(write_conllu(&tb), text);
    }

    #[test]
    fn nine_columns_is_an_error() {
        let text = "1\tHe\t_\t_\t_\t_\t2\t_\t_\n";
        let err = read_conllu(text.as_bytes(), "bad", "en").unwrap_err();
        match err {
            Error::Parse { name, line, msg } => {
                assert_eq!(name, "bad");
                assert_eq!(line, 1);
                assert!(msg.contains("9"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_integer_head_is_an_error() {
        let text = "1\tHe\t_\t_\t_\t_\tx\t_\t_\t_\n";
        let err = read_conllu(text.as_bytes(), "bad", "en").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn comment_emitted_before_sentence() {
        let text = "# sent_id = 1\n1\tHi\t_\t_\t_\t_\t0\t_\t_\t_\n\n";
        let tb = read_conllu(text.as_bytes(), "toy", "en").unwrap();
        assert_eq!(tb.sentences[0].comments, vec!["# sent_id = 1"]);
        assert_eq!(write_conllu(&tb), text);
    }

    #[test]
    fn mwt_and_empty_node_round_trip() {
        let text = concat!(
            "# text = toy\n",
            "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\tSpaceAfter=No\n",
            "1\tde\t_\tADP\t_\t_\t3\tcase\t_\t_\n",
            "2\tel\t_\tDET\t_\t_\t3\tdet\t_\t_\n",
            "3\tmar\t_\tNOUN\t_\t_\t0\troot\t_\t_\n",
            "3.1\televenses\t_\tNOUN\t_\t_\t_\t_\t_\t_\n",
            "\n"
        );
        let tb = read_conllu(text.as_bytes(), "toy", "es").unwrap();
        let s = &tb.sentences[0];
        assert_eq!(s.mwts.len(), 1);
        assert_eq!(s.mwts[0].form(), "del");
        assert_eq!(s.empty_nodes.len(), 1);
        assert_eq!(s.empty_nodes[0].anchor, 3);
        assert_eq!(write_conllu(&tb), text);
    }

    #[test]
    fn feats_are_sorted_case_insensitively() {
        let text = "1\tfoo\t_\t_\t_\tTense=Past|Number=Sing|Mood=Ind\t0\t_\t_\t_\n\n";
        let tb = read_conllu(text.as_bytes(), "toy", "xx").unwrap();
        assert_eq!(
            tb.sentences[0].tokens[0].feats_column(),
            "Mood=Ind|Number=Sing|Tense=Past"
        );
    }

    #[test]
    fn validate_accepts_valid_tree() {
        assert!(validate_tree(&toy(&[2, 0, 2])).is_empty());
    }

    #[test]
    fn validate_flags_cycle() {
        let v = validate_tree(&toy(&[2, 1]));
        assert_eq!(v.len(), 2); // no root and a cycle
        assert!(v.iter().any(|x| matches!(x, Violation::Cycle { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::NoRoot)));
    }

    #[test]
    fn validate_flags_multiple_roots() {
        let v = validate_tree(&toy(&[0, 0]));
        assert_eq!(v, vec![Violation::MultipleRoots { ids: vec![1, 2] }]);
    }

    #[test]
    fn validate_flags_out_of_range_and_self_head() {
        let v = validate_tree(&toy(&[5, 0, 3]));
        assert!(v.iter().any(|x| matches!(x, Violation::HeadOutOfRange { id: 1, head: 5 })));
        assert!(v.iter().any(|x| matches!(x, Violation::SelfHead { id: 3 })));
    }

    #[test]
    fn merge_concatenates_in_order() {
        let mut a = Treebank::new("a", "xx");
        a.sentences = vec![toy(&[0]), toy(&[0, 1]), toy(&[2, 0])];
        let mut b = Treebank::new("b", "xx");
        b.sentences = vec![toy(&[0]), toy(&[0])];
        let merged = merge_treebanks(&[a.clone(), b], "ab").unwrap();
        assert_eq!(merged.len(), 5);
        assert_eq!(merged.sentences[0], a.sentences[0]);
        assert_eq!(merged.name, "ab");
    }

    #[test]
    fn merge_of_one_is_identity_up_to_name() {
        let mut a = Treebank::new("a", "xx");
        a.sentences = vec![toy(&[0, 1])];
        let merged = merge_treebanks(std::slice::from_ref(&a), "a").unwrap();
        assert_eq!(merged, a);
    }

    #[test]
    fn merge_empty_list_is_usage_error() {
        assert!(matches!(merge_treebanks(&[], "x"), Err(Error::Usage(_))));
    }

    #[test]
    fn merge_counts_add_up() {
        // Sentence counts drawn from two large training sets merged in the
        // few-shot setup: 12 217 + 24 633.
        let mut a = Treebank::new("fi", "fi");
        a.sentences = vec![toy(&[0]); 12_217];
        let mut b = Treebank::new("et", "et");
        b.sentences = vec![toy(&[0]); 24_633];
        let merged = merge_treebanks(&[a, b], "fi+et").unwrap();
        assert_eq!(merged.len(), 36_850);
    }

    #[test]
    fn crlf_is_normalized() {
        let text = "1\tHi\t_\t_\t_\t_\t0\t_\t_\t_\r\n\r\n";
        let tb = read_conllu(text.as_bytes(), "toy", "en").unwrap();
        assert_eq!(tb.sentences[0].tokens[0].form, "Hi");
    }

    #[test]
    fn non_contiguous_ids_are_an_error() {
        let text = "1\ta\t_\t_\t_\t_\t0\t_\t_\t_\n3\tb\t_\t_\t_\t_\t1\t_\t_\t_\n\n";
        assert!(matches!(
            read_conllu(text.as_bytes(), "bad", "en"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
