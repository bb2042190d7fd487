//! Minimal Solidity token scanner for keyword-level metric counting.
//!
//! Comments are stripped and string literals are collapsed into opaque
//! tokens, so their contents never reach keyword counts. This is not a
//! full lexer: numbers and operators are only classified far enough to
//! keep token boundaries correct.

/// One token of the comment-stripped, string-shielded stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token<'a> {
    Ident(&'a str),
    Number,
    Str,
    Punct(char),
}

#[derive(Debug, Default)]
pub struct LexOutcome<'a> {
    pub tokens: Vec<Token<'a>>,
    pub unterminated_block_comment: bool,
    pub unterminated_string: bool,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Tokenizes `source`. Never fails; malformed input degrades to `Punct`
/// tokens and the unterminated flags.
pub fn lex(source: &str) -> LexOutcome<'_> {
    let mut out = LexOutcome::default();
    let bytes = source.as_bytes();
    let mut chars = source.char_indices().peekable();

    while let Some((start, c)) = chars.next() {
        match c {
            _ if c.is_whitespace() => {}
            '/' => match chars.peek() {
                Some((_, '/')) => {
                    // Line comment: consume to end of line.
                    for (_, c) in chars.by_ref() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some((_, '*')) => {
                    chars.next();
                    let mut terminated = false;
                    while let Some((_, c)) = chars.next() {
                        if c == '*' && matches!(chars.peek(), Some((_, '/'))) {
                            chars.next();
                            terminated = true;
                            break;
                        }
                    }
                    if !terminated {
                        out.unterminated_block_comment = true;
                    }
                }
                _ => out.tokens.push(Token::Punct('/')),
            },
            '"' | '\'' => {
                let mut terminated = false;
                while let Some((_, sc)) = chars.next() {
                    match sc {
                        '\\' => {
                            // Escaped character; an escaped newline still
                            // terminates the literal below.
                            if !matches!(chars.peek(), Some((_, '\n'))) {
                                chars.next();
                            }
                        }
                        '\n' => break,
                        _ if sc == c => {
                            terminated = true;
                            break;
                        }
                        _ => {}
                    }
                }
                if !terminated {
                    out.unterminated_string = true;
                }
                out.tokens.push(Token::Str);
            }
            _ if is_ident_start(c) => {
                let mut end = start + c.len_utf8();
                while let Some(&(idx, nc)) = chars.peek() {
                    if is_ident_continue(nc) {
                        chars.next();
                        end = idx + nc.len_utf8();
                    } else {
                        break;
                    }
                }
                out.tokens.push(Token::Ident(&source[start..end]));
            }
            '0'..='9' => {
                // Maximal munch: hex literals, exponents and identifier-like
                // suffixes are swallowed so `77if` never yields a keyword.
                let mut prev = c;
                while let Some(&(idx, nc)) = chars.peek() {
                    let take = is_ident_continue(nc)
                        || (nc == '.' && next_is_digit(bytes, idx + 1))
                        || ((nc == '+' || nc == '-')
                            && matches!(prev, 'e' | 'E')
                            && next_is_digit(bytes, idx + 1));
                    if take {
                        prev = nc;
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.tokens.push(Token::Number);
            }
            _ => out.tokens.push(Token::Punct(c)),
        }
    }
    out
}

fn next_is_digit(bytes: &[u8], idx: usize) -> bool {
    bytes.get(idx).is_some_and(|b| b.is_ascii_digit())
}
