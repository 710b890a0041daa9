use std::collections::HashSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

/// Bumped whenever tokenization output can change; part of every index key.
pub const TOKENIZER_VERSION: &str = "1";

static STOPWORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    include_str!("stopwords.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
});

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while", "true", "false", "null", "var", "record", "yield",
];

pub fn is_stopword(term: &str) -> bool {
    STOPWORDS.contains(term)
}

pub fn is_java_keyword(term: &str) -> bool {
    JAVA_KEYWORDS.contains(&term)
}

/// Lowercase, stemmed terms. Never contains empty terms or stopwords.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn terms(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &TokenStream) -> TokenStream {
        TokenStream(self.0.iter().chain(&other.0).cloned().collect())
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Splits an alphanumeric word at camelCase, acronym and letter/digit boundaries.
pub fn split_identifier(word: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        let (pos, c) = chars[i];
        let prev = chars[i - 1].1;
        let next = chars.get(i + 1).map(|&(_, n)| n);
        let boundary = (prev.is_lowercase() && c.is_uppercase())
            || (prev.is_alphabetic() && c.is_numeric())
            || (prev.is_numeric() && c.is_alphabetic())
            || (prev.is_uppercase() && c.is_uppercase() && next.is_some_and(char::is_lowercase));
        if boundary {
            parts.push(&word[start..pos]);
            start = pos;
        }
    }
    if start < word.len() {
        parts.push(&word[start..]);
    }
    parts
}

fn admit(term: &str) -> Option<String> {
    if term.chars().count() < 2 || is_stopword(term) || is_java_keyword(term) {
        return None;
    }
    let stem = porter_stemmer::stem(term);
    (stem.chars().count() >= 2).then_some(stem)
}

/// Tokenizes free text or source code.
///
/// Every alphanumeric run yields its stemmed lowercase compound form and,
/// when it splits into several parts, each stemmed part as well:
/// `updateHmac` gives `updatehmac`, `updat`, `hmac`.
pub fn tokenize(text: &str) -> TokenStream {
    let mut out = Vec::new();
    for word in text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
    {
        let parts = split_identifier(word);
        out.extend(admit(&word.to_lowercase()));
        if parts.len() > 1 {
            out.extend(parts.iter().filter_map(|p| admit(&p.to_lowercase())));
        }
    }
    TokenStream(out)
}
