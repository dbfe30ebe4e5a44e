use crate::error::{Error, Result};

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";

fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}' | '`')
}

/// Lowercases, splits on whitespace, replaces URLs and @-mentions with
/// placeholders, removes apostrophes and strips punctuation from token edges.
pub fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let lower = raw.to_lowercase();
        let trimmed = lower.trim_matches(|c: char| is_edge_punct(c) && c != '@');
        if trimmed.starts_with("http://") || trimmed.starts_with("https://") || trimmed.starts_with("www.") {
            out.push(URL_TOKEN.to_string());
            continue;
        }
        if let Some(handle) = trimmed.strip_prefix('@') {
            if handle.chars().any(char::is_alphanumeric) {
                out.push(USER_TOKEN.to_string());
                continue;
            }
        }
        let cleaned: String = trimmed.chars().filter(|&c| !is_apostrophe(c)).collect();
        let cleaned = cleaned.trim_matches(is_edge_punct);
        if !cleaned.is_empty() {
            out.push(cleaned.to_string());
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(out)
}
