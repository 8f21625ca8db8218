//! Tokenizer for program files. `//` starts a line comment.

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Value and source text (the text doubles as an outcome label).
    Num(f64, String),
    /// Imaginary literal such as `0.5i`.
    Imag(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "(+)", "->", ":=", "[]", ";", ":", ",", "[", "]", "(", ")", "{", "}", "=", "@", "|", ">", "+", "-", "*", "/",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut k, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |k: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*k] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *k += 1;
        }
    };
    while k < chars.len() {
        let ch = chars[k];
        if ch.is_whitespace() {
            advance(&mut k, &mut line, &mut col, 1);
            continue;
        }
        if ch == '/' && chars.get(k + 1) == Some(&'/') {
            while k < chars.len() && chars[k] != '\n' {
                advance(&mut k, &mut line, &mut col, 1);
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if ch.is_ascii_digit() || (ch == '.' && chars.get(k + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = k;
            let mut end = k;
            while end < chars.len() && (chars[end].is_ascii_digit() || chars[end] == '.') {
                end += 1;
            }
            if end < chars.len() && matches!(chars[end], 'e' | 'E') {
                let mut e = end + 1;
                if e < chars.len() && matches!(chars[e], '+' | '-') {
                    e += 1;
                }
                if e < chars.len() && chars[e].is_ascii_digit() {
                    while e < chars.len() && chars[e].is_ascii_digit() {
                        e += 1;
                    }
                    end = e;
                }
            }
            let text: String = chars[start..end].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| ParseError::new(tl, tc, format!("malformed number '{text}'")))?;
            let imag = end < chars.len()
                && chars[end] == 'i'
                && !chars.get(end + 1).is_some_and(|c| c.is_alphanumeric() || *c == '_');
            advance(&mut k, &mut line, &mut col, end - start);
            if imag {
                advance(&mut k, &mut line, &mut col, 1);
                out.push(Token { tok: Tok::Imag(value), line: tl, col: tc });
            } else {
                out.push(Token { tok: Tok::Num(value, text), line: tl, col: tc });
            }
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = k;
            let mut end = k;
            while end < chars.len() && (chars[end].is_alphanumeric() || chars[end] == '_') {
                end += 1;
            }
            let text: String = chars[start..end].iter().collect();
            advance(&mut k, &mut line, &mut col, end - start);
            out.push(Token { tok: Tok::Ident(text), line: tl, col: tc });
            continue;
        }
        if ch == '"' {
            let mut end = k + 1;
            while end < chars.len() && chars[end] != '"' && chars[end] != '\n' {
                end += 1;
            }
            if end >= chars.len() || chars[end] != '"' {
                return Err(ParseError::new(tl, tc, "unterminated string"));
            }
            let text: String = chars[k + 1..end].iter().collect();
            let n = end + 1 - k;
            advance(&mut k, &mut line, &mut col, n);
            out.push(Token { tok: Tok::Str(text), line: tl, col: tc });
            continue;
        }
        let rest: String = chars[k..chars.len().min(k + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                advance(&mut k, &mut line, &mut col, s.chars().count());
                out.push(Token { tok: Tok::Sym(s), line: tl, col: tc });
            }
            None => return Err(ParseError::new(tl, tc, format!("unexpected character '{ch}'"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_imaginaries_and_symbols() {
        assert_eq!(
            toks("0.5i -> |1> [] (+) 1e-3 2i"),
            vec![
                Tok::Imag(0.5),
                Tok::Sym("->"),
                Tok::Sym("|"),
                Tok::Num(1.0, "1".into()),
                Tok::Sym(">"),
                Tok::Sym("[]"),
                Tok::Sym("(+)"),
                Tok::Num(1e-3, "1e-3".into()),
                Tok::Imag(2.0),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn identifiers_comments_and_positions() {
        let t = tokenize("skip // c\n  H[q]").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("skip".into()));
        assert_eq!((t[1].line, t[1].col), (2, 3));
        assert_eq!(t[1].tok, Tok::Ident("H".into()));
        // "2in" is a number followed by an identifier, not an imaginary
        assert_eq!(toks("2in")[..2], [Tok::Num(2.0, "2".into()), Tok::Ident("in".into())]);
    }

    #[test]
    fn errors_carry_positions() {
        let e = tokenize("skip;\n  $").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(tokenize("\"abc").is_err());
    }
}
