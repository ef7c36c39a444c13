use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ListError {
    #[error("model reported a non-English source")]
    NonEnglish,
    #[error("no numbered items in response")]
    NoItems,
}

fn strip_quotes(s: &str) -> &str {
    for (open, close) in [('"', '"'), ('\'', '\''), ('\u{201c}', '\u{201d}')] {
        if s.len() >= open.len_utf8() + close.len_utf8() && s.starts_with(open) && s.ends_with(close) {
            return s[open.len_utf8()..s.len() - close.len_utf8()].trim();
        }
    }
    s
}

/// Body of a `N.` or `N)` list line, if the line is one.
fn list_item(line: &str) -> Option<&str> {
    let line = line.trim_start();
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = &line[digits..];
    let rest = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))?;
    if !rest.starts_with(char::is_whitespace) {
        return None;
    }
    let item = strip_quotes(rest.trim());
    (!item.is_empty()).then_some(item)
}

/// Items of a numbered list, in order. Lines that are not list items are
/// ignored. A response that is just `Error` is reported as
/// [`ListError::NonEnglish`].
pub fn parse_numbered_list(raw: &str) -> Result<Vec<String>, ListError> {
    if raw.trim().eq_ignore_ascii_case("error") {
        return Err(ListError::NonEnglish);
    }
    let items: Vec<String> = raw.lines().filter_map(list_item).map(str::to_string).collect();
    if items.is_empty() {
        Err(ListError::NoItems)
    } else {
        Ok(items)
    }
}

pub fn render_numbered_list<S: AsRef<str>>(items: &[S]) -> String {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {}", i + 1, s.as_ref()))
        .collect::<Vec<_>>()
        .join("\n")
}
