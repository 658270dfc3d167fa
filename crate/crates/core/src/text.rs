//! Shared text normalization and matching helpers.
//!
//! Header comparison, question tokenization, and number rendering all have to
//! agree across modules (lookup, search, evaluation, serialization), so the
//! rules live here.

/// Normalizes header text for comparison: lowercase, collapsed whitespace,
/// trailing footnote markers stripped.
///
/// A footnote marker is a final whitespace-separated token that is a single
/// letter or a short digit run (at most two digits) following at least one
/// other token.
pub fn normalize_header(raw: &str) -> String {
    let mut tokens: Vec<String> = raw.split_whitespace().map(|t| t.to_lowercase()).collect();
    while tokens.len() > 1 {
        let last = tokens.last().unwrap();
        if is_footnote_marker(last) {
            tokens.pop();
        } else {
            break;
        }
    }
    tokens.join(" ")
}

pub(crate) fn is_footnote_marker(token: &str) -> bool {
    let chars: Vec<char> = token.chars().collect();
    match chars.len() {
        1 => chars[0].is_ascii_alphanumeric(),
        2 => chars.iter().all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// Tokenizes text for n-gram matching: lowercase, whitespace-split, with
/// leading/trailing punctuation trimmed from each token ("2012?" and "u.s."
/// become "2012" and "u.s").
pub fn match_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Stop words excluded from unigram header matching and from the
/// comparative/superlative suffix heuristic.
pub const STOP_WORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "to", "for", "by", "with", "from", "as", "is", "are",
    "was", "were", "be", "been", "being", "do", "does", "did", "have", "has", "had", "what",
    "which", "who", "whom", "whose", "when", "where", "why", "that", "this", "these", "those",
    "there", "here", "it", "its", "and", "or", "not", "no", "nor", "so", "if", "then", "else",
    "about", "into", "over", "under", "after", "before", "between", "during", "per", "each",
    "either", "neither", "other", "another", "such", "own", "same", "but", "very", "can", "could",
    "will", "would", "should", "may", "might", "whether", "never", "ever", "together", "rather",
    "s",
];

pub fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.contains(&token)
}

/// Longest n-gram (n in 1..=3) shared between two token sequences.
/// Unigrams only count when they are not stop words. Returns 0 when nothing
/// is shared.
pub fn shared_ngram_len(a: &[String], b: &[String]) -> usize {
    for n in (1..=3usize).rev() {
        if n > a.len() || n > b.len() {
            continue;
        }
        for wa in a.windows(n) {
            if n == 1 && is_stop_word(&wa[0]) {
                continue;
            }
            if b.windows(n).any(|wb| wa == wb) {
                return n;
            }
        }
    }
    0
}

/// Renders a number with the shortest decimal representation that round-trips
/// ("16.8", "1234", "0.1235").
pub fn render_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x}")
}

/// Rounds to `sig` significant digits.
pub fn round_sig(x: f64, sig: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(sig as i32 - 1 - magnitude);
    (x * factor).round() / factor
}

/// Absolute-tolerance equality used for cell lookups and order relations.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

/// Relative-tolerance equality used for answer matching (1e-6 relative,
/// 1e-9 absolute near zero).
pub fn answer_eq(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= (1e-6 * scale).max(1e-9)
}

/// Stable 64-bit FNV-1a hash, used to derive per-sample RNG seeds that do not
/// depend on platform hasher internals.
pub fn stable_hash(seed: u64, key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in seed.to_le_bytes().iter().chain(key.as_bytes()) {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_normalization() {
        assert_eq!(normalize_header("  Federal  Agencies "), "federal agencies");
        assert_eq!(normalize_header("Revenue 1"), "revenue");
        assert_eq!(normalize_header("Revenue a"), "revenue");
        assert_eq!(normalize_header("Table 12"), "table");
        // three-digit runs are data, not footnotes
        assert_eq!(normalize_header("Route 128"), "route 128");
        // a single token is never treated as a marker
        assert_eq!(normalize_header("a"), "a");
        assert_eq!(normalize_header("2012"), "2012");
    }

    #[test]
    fn match_token_trimming() {
        assert_eq!(
            match_tokens("What is U.S. GDP in 2012?"),
            vec!["what", "is", "u.s", "gdp", "in", "2012"]
        );
    }

    #[test]
    fn ngram_overlap() {
        let q = match_tokens("What is the GDP of China in 2012?");
        assert_eq!(shared_ngram_len(&q, &match_tokens("china")), 1);
        assert_eq!(shared_ngram_len(&q, &match_tokens("the mars")), 0);
        let h = match_tokens("gdp of china");
        assert_eq!(shared_ngram_len(&q, &h), 3);
    }

    #[test]
    fn number_rendering() {
        assert_eq!(render_number(16.8), "16.8");
        assert_eq!(render_number(1234.0), "1234");
        assert_eq!(render_number(-2.5), "-2.5");
        assert_eq!(round_sig(0.123456, 4), 0.1235);
        assert_eq!(round_sig(12345.6, 4), 12350.0);
        assert_eq!(render_number(round_sig(7.2, 4)), "7.2");
    }

    #[test]
    fn stable_hash_is_stable() {
        assert_eq!(stable_hash(7, "s-1"), stable_hash(7, "s-1"));
        assert_ne!(stable_hash(7, "s-1"), stable_hash(8, "s-1"));
        assert_ne!(stable_hash(7, "s-1"), stable_hash(7, "s-2"));
    }
}
