/// Punctuation that becomes a standalone token. ASCII punctuation plus the
/// common typographic marks of European languages.
fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '\u{a1}' | '\u{a7}' | '\u{ab}' | '\u{b6}' | '\u{b7}' | '\u{bb}' | '\u{bf}')
        || ('\u{2010}'..='\u{2027}').contains(&c)
        || ('\u{2030}'..='\u{205e}').contains(&c)
        || ('\u{3001}'..='\u{3003}').contains(&c)
        || ('\u{3008}'..='\u{3011}').contains(&c)
}

/// Whitespace split, then every punctuation character becomes its own token.
/// Case is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if is_punct(c) {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
                out.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(tokenize("Hello, world."), ["Hello", ",", "world", "."]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a  b"), ["a", "b"]);
    }

    #[test]
    fn typographic_punctuation() {
        assert_eq!(tokenize("«Oui» – l'assurance…"), ["«", "Oui", "»", "–", "l", "'", "assurance", "…"]);
        assert_eq!(tokenize("Vertrag\tgilt\n"), ["Vertrag", "gilt"]);
    }
}
