use serde::{Deserialize, Serialize};

/// A token with its byte span in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Splits text into maximal alphanumeric runs and single punctuation
/// characters. Whitespace separates tokens and is dropped.
pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_at(text, 0)
}

/// Like [`tokenize`], with spans shifted by `base`.
pub(crate) fn tokenize_at(text: &str, base: usize) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run_start: Option<usize> = None;
    let flush = |tokens: &mut Vec<Token>, from: usize, to: usize| {
        tokens.push(Token { text: text[from..to].to_string(), start: base + from, end: base + to });
    };
    for (i, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            run_start.get_or_insert(i);
            continue;
        }
        if let Some(s) = run_start.take() {
            flush(&mut tokens, s, i);
        }
        if !ch.is_whitespace() {
            flush(&mut tokens, i, i + ch.len_utf8());
        }
    }
    if let Some(s) = run_start {
        flush(&mut tokens, s, text.len());
    }
    tokens
}

const DIGIT: &str = "DIGIT";

/// Maps every ASCII digit to the literal `DIGIT` and lower-cases every other
/// character. Existing `DIGIT` substrings are kept so the mapping is idempotent.
pub fn normalize(token: &str) -> String {
    let mut out = String::with_capacity(token.len() + 8);
    let mut rest = token;
    while let Some(ch) = rest.chars().next() {
        if rest.starts_with(DIGIT) {
            out.push_str(DIGIT);
            rest = &rest[DIGIT.len()..];
            continue;
        }
        if ch.is_ascii_digit() {
            out.push_str(DIGIT);
        } else {
            out.extend(ch.to_lowercase());
        }
        rest = &rest[ch.len_utf8()..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \n\t").is_empty());

        let t = tokenize("Dr. Smith");
        assert_eq!(texts(&t), ["Dr", ".", "Smith"]);
        let spans: Vec<_> = t.iter().map(|t| (t.start, t.end)).collect();
        assert_eq!(spans, [(0, 2), (2, 3), (4, 9)]);

        assert_eq!(texts(&tokenize("call 519-888")), ["call", "519", "-", "888"]);
        assert_eq!(texts(&tokenize("é1 (x)")), ["é1", "(", "x", ")"]);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("1990"), "DIGITDIGITDIGITDIGIT");
        assert_eq!(normalize("2005"), "DIGITDIGITDIGITDIGIT");
        assert_eq!(normalize("Glaucoma"), "glaucoma");
        assert_eq!(normalize("a1b"), "aDIGITb");
        assert_eq!(normalize("DIGIT"), "DIGIT");
        assert_eq!(normalize("Digit"), "digit");
        assert_eq!(normalize(""), "");
    }

    proptest! {
        #[test]
        fn spans_index_source(s in "\\PC{0,64}") {
            let tokens = tokenize(&s);
            let mut prev_end = 0;
            for t in &tokens {
                prop_assert!(t.start < t.end);
                prop_assert!(t.start >= prev_end);
                prop_assert_eq!(&s[t.start..t.end], t.text.as_str());
                prev_end = t.end;
            }
        }

        #[test]
        fn normalize_idempotent(s in "[a-zA-Z0-9DIGT ÄÉß]{0,24}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once.clone());
            prop_assert!(!once.chars().any(|c| c.is_ascii_digit()));
        }
    }
}
