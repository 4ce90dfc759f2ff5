//! Social-media tokenizer: words, sentences, mentions, hashtags, URLs, and
//! emoji.
//!
//! Token definitions:
//! * mentions match `@\w+`, hashtags `#\w+`
//! * URLs start with `http://` or `https://` and run to the next whitespace
//! * emoji are single codepoints with the Unicode `Emoji` property that are
//!   not `Emoji_Component` (this keeps pictographs and excludes ASCII
//!   digits, `#`, `*`, and keycap parts)
//! * words are maximal runs of alphanumeric characters plus internal
//!   apostrophes, lowercased; mentions/hashtags/URLs/emoji never contribute
//!   word tokens
//! * sentences break after `.` `!` `?` runs followed by whitespace or end
//!   of input

use unicode_properties::UnicodeEmoji;

/// Tokenized view of one text. `words` are lowercased; the other token
/// lists keep their original form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenStream {
    pub words: Vec<String>,
    pub sentences: Vec<String>,
    pub emojis: Vec<String>,
    pub mentions: Vec<String>,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub raw: String,
}

pub(crate) fn is_emoji_char(c: char) -> bool {
    c.is_emoji_char() && !c.is_emoji_component()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() && !is_emoji_char(c)
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Tokenize a text. Empty input yields empty streams.
pub fn tokenize(text: &str) -> TokenStream {
    let raw = text.to_string();
    let mut stream = TokenStream {
        raw,
        ..TokenStream::default()
    };
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        // URLs first so '#' or '@' inside a URL are not split out.
        if c == 'h' && (starts_with(&chars, i, "http://") || starts_with(&chars, i, "https://")) {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            stream.urls.push(collect(&chars, start, i));
            continue;
        }
        if (c == '@' || c == '#') && i + 1 < chars.len() && is_ident_char(chars[i + 1]) {
            let start = i;
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let tok = collect(&chars, start, i);
            if c == '@' {
                stream.mentions.push(tok);
            } else {
                stream.hashtags.push(tok);
            }
            continue;
        }
        if is_emoji_char(c) {
            stream.emojis.push(c.to_string());
            i += 1;
            continue;
        }
        if is_word_char(c) {
            let start = i;
            i += 1;
            while i < chars.len()
                && (is_word_char(chars[i])
                    || (is_apostrophe(chars[i])
                        && i + 1 < chars.len()
                        && is_word_char(chars[i + 1])))
            {
                i += 1;
            }
            stream.words.push(collect(&chars, start, i).to_lowercase());
            continue;
        }
        i += 1;
    }
    stream.sentences = split_sentences(text);
    stream
}

fn is_ident_char(c: char) -> bool {
    c == '_' || (c.is_alphanumeric() && !is_emoji_char(c))
}

fn starts_with(chars: &[char], at: usize, prefix: &str) -> bool {
    let p: Vec<char> = prefix.chars().collect();
    chars.len() >= at + p.len() && chars[at..at + p.len()] == p[..]
}

fn collect(chars: &[char], from: usize, to: usize) -> String {
    chars[from..to].iter().collect()
}

/// Split into sentences at `.` `!` `?` runs followed by whitespace or end.
/// Segments are trimmed; empty segments are dropped. Every non-whitespace
/// character of the input lands in exactly one sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            let mut j = i;
            while j < chars.len() && matches!(chars[j], '.' | '!' | '?') {
                j += 1;
            }
            if j >= chars.len() || chars[j].is_whitespace() {
                let s: String = chars[start..j].iter().collect();
                let s = s.trim();
                if !s.is_empty() {
                    sentences.push(s.to_string());
                }
                start = j;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        let s: String = chars[start..].iter().collect();
        let s = s.trim();
        if !s.is_empty() {
            sentences.push(s.to_string());
        }
    }
    sentences
}

/// Word tokens of one sentence, with the same exclusions as [`tokenize`].
pub fn sentence_words(sentence: &str) -> Vec<String> {
    tokenize(sentence).words
}
