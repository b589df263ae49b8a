//! Reference tokenizer for turning raw text into the token lists the rest of
//! the crate expects. A convenience only: articles, gold files and tagger
//! input are all pre-tokenized, and nothing else in the crate calls this.

/// Splits on whitespace, then separates punctuation from word characters.
/// Apostrophes and hyphens between letters stay inside the word, as do
/// periods and commas between digits.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut word = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let prev = i.checked_sub(1).map(|j| chars[j]);
            let next = chars.get(i + 1).copied();
            let joins = match c {
                '\'' | '-' => {
                    prev.is_some_and(char::is_alphanumeric)
                        && next.is_some_and(char::is_alphanumeric)
                }
                '.' | ',' => {
                    prev.is_some_and(|p| p.is_ascii_digit())
                        && next.is_some_and(|n| n.is_ascii_digit())
                }
                _ => c.is_alphanumeric(),
            };
            if joins {
                word.push(c);
            } else {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(c.to_string());
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}
