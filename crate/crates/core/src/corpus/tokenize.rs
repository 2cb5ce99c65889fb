use serde::{Deserialize, Serialize};

/// Tokenizer rules. Tokens are whitespace-delimited; non-alphanumeric
/// characters are trimmed from both edges and internal ones are kept.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    /// Split on internal hyphens as well ("natural-gas" -> "natural", "gas").
    #[serde(default)]
    pub split_hyphens: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub capitalized: bool,
}

impl Token {
    fn new(surface: &str) -> Self {
        let capitalized = surface.chars().next().is_some_and(char::is_uppercase);
        Self { surface: surface.to_string(), lower: surface.to_lowercase(), capitalized }
    }
}

fn trim_edges(raw: &str) -> &str {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Calls `f` for each token in `text` without allocating the token list.
pub fn for_each_token(text: &str, rules: &TokenizerConfig, mut f: impl FnMut(&str)) {
    for raw in text.split_whitespace() {
        if rules.split_hyphens {
            for part in raw.split('-') {
                let t = trim_edges(part);
                if !t.is_empty() {
                    f(t);
                }
            }
        } else {
            let t = trim_edges(raw);
            if !t.is_empty() {
                f(t);
            }
        }
    }
}

pub fn tokenize(text: &str, rules: &TokenizerConfig) -> Vec<Token> {
    let mut out = Vec::new();
    for_each_token(text, rules, |t| out.push(Token::new(t)));
    out
}

/// Lowercased token stream, the form used for counting and training.
pub fn tokenize_lower(text: &str, rules: &TokenizerConfig) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, rules, |t| out.push(t.to_lowercase()));
    out
}
