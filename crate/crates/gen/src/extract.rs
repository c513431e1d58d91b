use std::sync::LazyLock;

use regex::Regex;

static FENCE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)```[^\n`]*\n(.*?)\n?```").unwrap());

/// Pulls HTML out of a model reply.
///
/// The longest fenced block wins (the first on ties); without fences the
/// reply is taken from its first `<` onward. Returns `None` when nothing
/// but whitespace remains.
pub fn extract_html(reply: &str) -> Option<String> {
    let mut best: Option<&str> = None;
    for cap in FENCE.captures_iter(reply) {
        let block = cap.get(1).unwrap().as_str();
        if best.is_none_or(|b| block.len() > b.len()) {
            best = Some(block);
        }
    }
    let html = match best {
        Some(b) => b,
        None => &reply[reply.find('<')?..],
    };
    (!html.trim().is_empty()).then(|| html.to_string())
}
