//! Case-aware greedy subword tokenizer for action text.
//!
//! Ids `0..256` are single bytes. Trained tokens follow, ranked by how often
//! the subword occurs inside pre-tokenized pieces of the corpus.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

/// Number of byte-fallback ids.
pub const BYTE_IDS: usize = 256;
/// Longest candidate subword, in chars.
pub const MAX_TOKEN_CHARS: usize = 16;

const ESC: char = '\u{1b}';
const BEL: char = '\u{7}';

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TokError {
    #[error("vocabulary size {0} leaves no room past the 256 byte ids")]
    VocabTooSmall(usize),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown token id {0}")]
    UnknownId(u32),
    #[error("vocab line {line}: {reason}")]
    BadVocabLine { line: usize, reason: String },
    #[error("decoded bytes are not UTF-8")]
    NotUtf8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Lower,
    Upper,
    /// Letters without case and digits.
    Other,
    Underscore,
}

fn word_class(c: char) -> Option<Class> {
    if c == '_' {
        Some(Class::Underscore)
    } else if c.is_lowercase() {
        Some(Class::Lower)
    } else if c.is_uppercase() {
        Some(Class::Upper)
    } else if c.is_alphanumeric() {
        Some(Class::Other)
    } else {
        None
    }
}

fn is_punct(c: char) -> bool {
    !c.is_control() && !c.is_whitespace() && word_class(c).is_none()
}

/// Splits one word run at case transitions and after underscores.
fn split_word<'a>(word: &'a str, out: &mut Vec<&'a str>) {
    let mut start = 0;
    let mut prev: Option<(char, Class)> = None;
    for (i, c) in word.char_indices() {
        let cls = word_class(c).expect("word chars only");
        if let Some((pc, pcls)) = prev {
            let upper_after_lower = cls == Class::Upper && (pcls == Class::Lower || pc.is_ascii_digit());
            if pcls == Class::Underscore || upper_after_lower {
                out.push(&word[start..i]);
                start = i;
            }
        }
        prev = Some((c, cls));
    }
    if start < word.len() {
        out.push(&word[start..]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Atom {
    Word,
    Punct,
    Newline,
    Space,
    Spaces,
    Escape,
    Control,
}

fn atoms(text: &str) -> Vec<(Atom, &str)> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |k: usize| chars.get(k).map_or(text.len(), |&(i, _)| i);
    let run = |from: usize, pred: &dyn Fn(char) -> bool| {
        let mut j = from;
        while j < chars.len() && pred(chars[j].1) {
            j += 1;
        }
        j
    };
    let mut k = 0;
    while k < chars.len() {
        let (i, c) = chars[k];
        let (kind, j) = if c == ESC {
            let mut j = k + 1;
            match chars.get(j).map(|x| x.1) {
                Some('[') => {
                    j = run(j + 1, &|c| c.is_ascii_digit() || c == ';');
                    if j < chars.len() {
                        j += 1;
                    }
                }
                Some(']') => {
                    while j < chars.len() && j < k + MAX_TOKEN_CHARS && !matches!(chars[j].1, '=' | BEL) {
                        j += 1;
                    }
                    if j < chars.len() {
                        j += 1;
                    }
                }
                _ => {}
            }
            (Atom::Escape, j)
        } else if c == '\n' {
            (Atom::Newline, run(k + 1, &|c| c == ' ' || c == '\t'))
        } else if c == ' ' || c == '\t' {
            let j = run(k, &|x| x == c);
            (if c == ' ' && j == k + 1 { Atom::Space } else { Atom::Spaces }, j)
        } else if word_class(c).is_some() {
            let j = run(k, &|c| word_class(c).is_some());
            let mut parts = Vec::new();
            split_word(&text[i..end_of(j)], &mut parts);
            out.extend(parts.into_iter().map(|p| (Atom::Word, p)));
            k = j;
            continue;
        } else if is_punct(c) {
            (Atom::Punct, run(k, &is_punct))
        } else {
            (Atom::Control, run(k, &|x| x == c))
        };
        out.push((kind, &text[i..end_of(j)]));
        k = j;
    }
    out
}

/// Pre-tokenizer: the pieces whose substrings are vocabulary candidates.
///
/// Word runs split at case and underscore boundaries (digits stay with the
/// run before them). Punctuation runs, single spaces and a newline with its
/// indentation join the word, punctuation or newline that follows. Escape
/// sequences stay whole and identical control characters form runs.
pub fn pieces(text: &str) -> Vec<&str> {
    let atoms = atoms(text);
    let mut out = Vec::with_capacity(atoms.len());
    let mut k = 0;
    while k < atoms.len() {
        let (kind, s) = atoms[k];
        let joins = matches!(kind, Atom::Punct | Atom::Space | Atom::Newline);
        match atoms.get(k + 1) {
            Some(&(Atom::Word | Atom::Punct | Atom::Newline, next)) if joins => {
                // Atoms are adjacent slices of `text`.
                let start = s.as_ptr() as usize - text.as_ptr() as usize;
                out.push(&text[start..start + s.len() + next.len()]);
                k += 2;
            }
            _ => {
                out.push(s);
                k += 1;
            }
        }
    }
    out
}

/// A trained vocabulary: `tokens[id]` for every id, bytes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionVocab {
    tokens: Vec<Vec<u8>>,
    /// Corpus frequency per id; zero for byte ids and loaded vocabularies.
    freqs: Vec<u64>,
    trie: Trie,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Trie {
    /// Per node: sorted (byte, child) edges.
    edges: Vec<Vec<(u8, u32)>>,
    ids: Vec<Option<u32>>,
}

impl Trie {
    fn build(tokens: &[Vec<u8>]) -> Trie {
        let mut t = Trie { edges: vec![Vec::new()], ids: vec![None] };
        for (id, tok) in tokens.iter().enumerate() {
            let mut node = 0usize;
            for &b in tok {
                node = match t.edges[node].binary_search_by_key(&b, |e| e.0) {
                    Ok(p) => t.edges[node][p].1 as usize,
                    Err(p) => {
                        let child = t.edges.len();
                        t.edges.push(Vec::new());
                        t.ids.push(None);
                        t.edges[node].insert(p, (b, child as u32));
                        child
                    }
                };
            }
            t.ids[node] = Some(id as u32);
        }
        t
    }

    /// Longest token at the start of `bytes`: (id, length).
    fn longest(&self, bytes: &[u8]) -> (u32, usize) {
        let mut best = (bytes[0] as u32, 1);
        let mut node = 0usize;
        for (k, &b) in bytes.iter().enumerate() {
            match self.edges[node].binary_search_by_key(&b, |e| e.0) {
                Ok(p) => node = self.edges[node][p].1 as usize,
                Err(_) => break,
            }
            if let Some(id) = self.ids[node] {
                best = (id, k + 1);
            }
        }
        best
    }
}

fn count_pieces(doc: &str) -> HashMap<&str, u64> {
    let mut m = HashMap::new();
    for p in pieces(doc) {
        *m.entry(p).or_insert(0) += 1;
    }
    m
}

fn merge<K: std::hash::Hash + Eq>(mut a: HashMap<K, u64>, b: HashMap<K, u64>) -> HashMap<K, u64> {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Trains a vocabulary of at most `vocab_size` ids over `corpus`
/// documents. Candidates are the substrings (up to 16 chars, at least two
/// bytes) of every piece, counted once per piece occurrence.
pub fn train_vocab<S: AsRef<str> + Sync>(corpus: &[S], vocab_size: usize) -> Result<ActionVocab, TokError> {
    if vocab_size <= BYTE_IDS {
        return Err(TokError::VocabTooSmall(vocab_size));
    }
    if corpus.iter().all(|d| d.as_ref().is_empty()) {
        return Err(TokError::EmptyCorpus);
    }
    let piece_counts = corpus
        .par_iter()
        .map(|d| count_pieces(d.as_ref()))
        .reduce(HashMap::new, merge);
    let piece_list: Vec<(&str, u64)> = piece_counts.into_iter().collect();
    let cand = piece_list
        .par_chunks(4096)
        .map(|chunk| {
            let mut m: HashMap<&str, u64> = HashMap::new();
            for &(p, n) in chunk {
                let bounds: Vec<usize> = p.char_indices().map(|(i, _)| i).chain([p.len()]).collect();
                for a in 0..bounds.len() - 1 {
                    for b in a + 1..bounds.len().min(a + MAX_TOKEN_CHARS + 1) {
                        let s = &p[bounds[a]..bounds[b]];
                        if s.len() >= 2 {
                            *m.entry(s).or_insert(0) += n;
                        }
                    }
                }
            }
            m
        })
        .reduce(HashMap::new, merge);
    let mut ranked: Vec<(&str, u64)> = cand.into_iter().collect();
    ranked.par_sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.len().cmp(&b.0.len())).then(a.0.cmp(b.0)));
    ranked.truncate(vocab_size - BYTE_IDS);

    let mut tokens: Vec<Vec<u8>> = (0..=255u8).map(|b| vec![b]).collect();
    let mut freqs = vec![0; BYTE_IDS];
    for (s, n) in ranked {
        tokens.push(s.as_bytes().to_vec());
        freqs.push(n);
    }
    Ok(ActionVocab::from_parts(tokens, freqs))
}

impl ActionVocab {
    fn from_parts(tokens: Vec<Vec<u8>>, freqs: Vec<u64>) -> ActionVocab {
        let trie = Trie::build(&tokens);
        ActionVocab { tokens, freqs, trie }
    }

    /// Only the byte-fallback ids.
    pub fn bytes_only() -> ActionVocab {
        ActionVocab::from_parts((0..=255u8).map(|b| vec![b]).collect(), vec![0; BYTE_IDS])
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: u32) -> Option<&[u8]> {
        self.tokens.get(id as usize).map(Vec::as_slice)
    }

    pub fn frequency(&self, id: u32) -> Option<u64> {
        self.freqs.get(id as usize).copied()
    }

    pub fn id_of(&self, token: &[u8]) -> Option<u32> {
        if token.is_empty() {
            return None;
        }
        let (id, len) = self.trie.longest(token);
        (len == token.len()).then_some(id)
    }

    pub fn is_fallback(id: u32) -> bool {
        (id as usize) < BYTE_IDS
    }

    /// Greedy longest match, left to right.
    pub fn encode_bytes(&self, bytes: &[u8]) -> Vec<u32> {
        let mut out = Vec::with_capacity(bytes.len() / 2 + 1);
        let mut pos = 0;
        while pos < bytes.len() {
            let (id, len) = self.trie.longest(&bytes[pos..]);
            out.push(id);
            pos += len;
        }
        out
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        self.encode_bytes(text.as_bytes())
    }

    pub fn decode_bytes(&self, ids: &[u32]) -> Result<Vec<u8>, TokError> {
        let mut out = Vec::new();
        for &id in ids {
            out.extend_from_slice(self.token(id).ok_or(TokError::UnknownId(id))?);
        }
        Ok(out)
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String, TokError> {
        String::from_utf8(self.decode_bytes(ids)?).map_err(|_| TokError::NotUtf8)
    }

    /// Fraction of ids that are trained tokens rather than byte fallback.
    pub fn coverage(ids: &[u32]) -> f64 {
        if ids.is_empty() {
            return 1.0;
        }
        ids.iter().filter(|&&id| !Self::is_fallback(id)).count() as f64 / ids.len() as f64
    }

    /// One escaped token per line; the line number is the id.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.tokens {
            s.push_str(&escape(t));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<ActionVocab, TokError> {
        let lines: Vec<&str> = text.strip_suffix('\n').unwrap_or(text).split('\n').collect();
        let mut tokens = Vec::with_capacity(lines.len());
        let mut seen = HashMap::new();
        for (i, l) in lines.iter().enumerate() {
            let bad = |reason: &str| TokError::BadVocabLine { line: i + 1, reason: reason.to_string() };
            let t = unescape(l).ok_or_else(|| bad("bad escape"))?;
            if t.is_empty() {
                return Err(bad("empty token"));
            }
            if i < BYTE_IDS && t != [i as u8] {
                return Err(bad("byte ids must come first, in order"));
            }
            if let Some(prev) = seen.insert(t.clone(), i) {
                return Err(bad(&format!("duplicate of line {}", prev + 1)));
            }
            tokens.push(t);
        }
        if tokens.len() < BYTE_IDS {
            return Err(TokError::BadVocabLine { line: tokens.len() + 1, reason: "missing byte ids".into() });
        }
        let n = tokens.len();
        Ok(ActionVocab::from_parts(tokens, vec![0; n]))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<ActionVocab, LoadError> {
        Ok(ActionVocab::from_text(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Vocab(#[from] TokError),
}

/// Printable ASCII stays literal (backslash doubled); every other byte is
/// `\xHH`.
pub fn escape(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => s.push_str("\\\\"),
            0x21..=0x7e => s.push(b as char),
            _ => {
                let _ = write!(s, "\\x{b:02x}");
            }
        }
    }
    s
}

pub fn unescape(s: &str) -> Option<Vec<u8>> {
    let b = s.as_bytes();
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'\\' => match b.get(i + 1)? {
                b'\\' => {
                    out.push(b'\\');
                    i += 2;
                }
                b'x' => {
                    let hex = s.get(i + 2..i + 4)?;
                    if !hex.bytes().all(|c| matches!(c, b'0'..=b'9' | b'a'..=b'f')) {
                        return None;
                    }
                    out.push(u8::from_str_radix(hex, 16).ok()?);
                    i += 4;
                }
                _ => return None,
            },
            0x21..=0x7e => {
                out.push(b[i]);
                i += 1;
            }
            _ => return None,
        }
    }
    Some(out)
}

/// Concatenated action payloads of a decoded stream, the tokenizer's
/// training text.
pub fn action_text(actions: &[crate::termemu::Action]) -> String {
    actions.iter().map(|a| a.encode()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_and_underscore_boundaries() {
        assert_eq!(pieces("fooBar"), ["foo", "Bar"]);
        assert_eq!(pieces("snake_case_name"), ["snake_", "case_", "name"]);
        assert_eq!(pieces("PascalCase"), ["Pascal", "Case"]);
        assert_eq!(pieces("offset9Buffer"), ["offset9", "Buffer"]);
        assert_eq!(pieces("HTTPServer"), ["HTTPServer"]);
        assert_eq!(pieces("let x = f(y);\n    z"), ["let", " x", " =", " f", "(y", ");\n    ", "z"]);
        assert_eq!(pieces("\x1b[A\x1b[115;5u\x7f\x7f"), ["\x1b[A", "\x1b[115;5u", "\x7f\x7f"]);
        assert_eq!(pieces("\x1b]1337;open=a.txt\x07"), ["\x1b]1337;open=", "a", ".txt", "\x07"]);
        assert_eq!(pieces("a  b"), ["a", "  ", "b"]);
        assert!(pieces("").is_empty());
    }

    #[test]
    fn frequency_order() {
        let v = train_vocab(&["fooBar fooBar foo"], 260).unwrap();
        let rank = |s: &str| v.id_of(s.as_bytes());
        assert!(rank("foo").unwrap() < 260);
        assert!(rank("Bar").is_none_or(|b| b > rank("foo").unwrap()));
    }

    #[test]
    fn errors() {
        assert_eq!(train_vocab(&["x"], 256).unwrap_err(), TokError::VocabTooSmall(256));
        assert_eq!(train_vocab::<&str>(&[], 300).unwrap_err(), TokError::EmptyCorpus);
        assert_eq!(ActionVocab::bytes_only().decode(&[256]).unwrap_err(), TokError::UnknownId(256));
    }

    #[test]
    fn escape_round_trip() {
        let all: Vec<u8> = (0..=255).collect();
        assert_eq!(unescape(&escape(&all)).unwrap(), all);
        assert_eq!(escape(b"a b\\"), "a\\x20b\\\\");
        assert!(unescape("\\q").is_none());
        assert!(unescape("\\xAB").is_none());
    }
}
