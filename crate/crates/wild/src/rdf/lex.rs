//! Tokenizer shared by the Turtle parser, the rule parser, and the query
//! parser. The three surface syntaxes draw from one token vocabulary; each
//! parser simply rejects tokens its dialect does not use.

use super::RdfError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Contents of `<...>`, unresolved.
    Iri(String),
    /// `prefix:local`; either part may be empty.
    Pname { prefix: String, local: String },
    /// `_:label`
    Blank(String),
    /// `?name` or `$name`
    Var(String),
    /// Quoted string, unescaped.
    Str(String),
    /// Integer lexical form, sign included.
    Int(String),
    /// Bare word: `a`, `true`, `false`, SPARQL keywords.
    Word(String),
    /// `@prefix`, `@base`, or a language tag after a literal.
    At(String),
    Dot,
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    /// `^^`
    CaretCaret,
    /// `=>`
    Implies,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Iri(v) => write!(f, "<{v}>"),
            Tok::Pname { prefix, local } => write!(f, "{prefix}:{local}"),
            Tok::Blank(l) => write!(f, "_:{l}"),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Str(_) => write!(f, "string literal"),
            Tok::Int(v) => write!(f, "{v}"),
            Tok::Word(w) => write!(f, "{w}"),
            Tok::At(w) => write!(f, "@{w}"),
            Tok::Dot => write!(f, "."),
            Tok::Semi => write!(f, ";"),
            Tok::Comma => write!(f, ","),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::CaretCaret => write!(f, "^^"),
            Tok::Implies => write!(f, "=>"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub(crate) fn err(line: u32, col: u32, msg: impl Into<String>) -> RdfError {
    RdfError::Syntax { line, col, msg: msg.into() }
}

pub(crate) fn tokenize(input: &str) -> Result<Vec<Spanned>, RdfError> {
    Lexer { chars: input.chars().collect(), pos: 0, line: 1, col: 1 }.run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> RdfError {
        err(self.line, self.col, msg)
    }

    fn run(mut self) -> Result<Vec<Spanned>, RdfError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push(Spanned { tok: Tok::Eof, line, col });
                return Ok(out);
            };
            let tok = match c {
                '<' => self.lex_iri()?,
                '"' => self.lex_string()?,
                '_' if self.peek2() == Some(':') => self.lex_blank()?,
                '?' | '$' => self.lex_var()?,
                '@' => self.lex_at()?,
                '^' => {
                    self.bump();
                    if self.peek() == Some('^') {
                        self.bump();
                        Tok::CaretCaret
                    } else {
                        return Err(self.error("expected '^^'"));
                    }
                }
                '=' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::Implies
                    } else {
                        return Err(self.error("expected '=>'"));
                    }
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                '{' => {
                    self.bump();
                    Tok::LBrace
                }
                '}' => {
                    self.bump();
                    Tok::RBrace
                }
                '+' | '-' => self.lex_number()?,
                d if d.is_ascii_digit() => self.lex_number()?,
                c if is_name_start(c) => self.lex_word_or_pname()?,
                ':' => self.lex_word_or_pname()?,
                other => return Err(self.error(format!("unexpected character '{other}'"))),
            };
            out.push(Spanned { tok, line, col });
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn lex_iri(&mut self) -> Result<Tok, RdfError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    return Ok(Tok::Iri(value));
                }
                Some(c) if c == '<' || c == '"' || c == '{' || c == '}' || c == '|' => {
                    return Err(self.error(format!("character '{c}' not allowed in IRI")));
                }
                Some(c) if c.is_whitespace() => {
                    return Err(self.error("whitespace inside IRI"));
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
                None => return Err(self.error("unterminated IRI")),
            }
        }
    }

    fn lex_string(&mut self) -> Result<Tok, RdfError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(Tok::Str(value)),
                Some('\\') => {
                    let esc = self.bump().ok_or_else(|| self.error("unterminated escape"))?;
                    match esc {
                        't' => value.push('\t'),
                        'b' => value.push('\u{8}'),
                        'n' => value.push('\n'),
                        'r' => value.push('\r'),
                        'f' => value.push('\u{c}'),
                        '"' => value.push('"'),
                        '\'' => value.push('\''),
                        '\\' => value.push('\\'),
                        'u' => value.push(self.lex_unicode_escape(4)?),
                        'U' => value.push(self.lex_unicode_escape(8)?),
                        other => return Err(self.error(format!("unknown escape '\\{other}'"))),
                    }
                }
                Some('\n') => return Err(self.error("newline inside string literal")),
                Some(c) => value.push(c),
                None => return Err(self.error("unterminated string literal")),
            }
        }
    }

    fn lex_unicode_escape(&mut self, digits: u32) -> Result<char, RdfError> {
        let mut code = 0u32;
        for _ in 0..digits {
            let c = self.bump().ok_or_else(|| self.error("unterminated unicode escape"))?;
            let d = c.to_digit(16).ok_or_else(|| self.error("invalid unicode escape digit"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.error("invalid unicode code point"))
    }

    fn lex_blank(&mut self) -> Result<Tok, RdfError> {
        self.bump();
        self.bump();
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if label.is_empty() {
            return Err(self.error("empty blank node label"));
        }
        Ok(Tok::Blank(label))
    }

    fn lex_var(&mut self) -> Result<Tok, RdfError> {
        self.bump();
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if name.is_empty() {
            return Err(self.error("empty variable name"));
        }
        Ok(Tok::Var(name))
    }

    fn lex_at(&mut self) -> Result<Tok, RdfError> {
        self.bump();
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if word.is_empty() {
            return Err(self.error("empty '@' token"));
        }
        Ok(Tok::At(word))
    }

    fn lex_number(&mut self) -> Result<Tok, RdfError> {
        let mut value = String::new();
        if matches!(self.peek(), Some('+') | Some('-')) {
            value.push(self.bump().unwrap());
        }
        let mut any = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                value.push(c);
                self.bump();
                any = true;
            } else {
                break;
            }
        }
        if !any {
            return Err(self.error("expected digits after sign"));
        }
        if self.peek() == Some('.') && self.peek2().is_some_and(|c| c.is_ascii_digit()) {
            return Err(self.error("only integer numeric literals are supported"));
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            return Err(self.error("only integer numeric literals are supported"));
        }
        Ok(Tok::Int(value))
    }

    /// Bare word, or `prefix:local` if a colon follows the word.
    fn lex_word_or_pname(&mut self) -> Result<Tok, RdfError> {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if self.peek() != Some(':') {
            if word.is_empty() {
                return Err(self.error("unexpected ':'"));
            }
            return Ok(Tok::Word(word));
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) {
                local.push(c);
                self.bump();
            } else if c == '.' {
                // Dots are allowed inside local names but a trailing dot
                // terminates the statement instead.
                if self.peek2().is_some_and(is_name_char) {
                    local.push(c);
                    self.bump();
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(Tok::Pname { prefix: word, local })
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(input: &str) -> Vec<Tok> {
        tokenize(input).unwrap().into_iter().map(|s| s.tok).collect()
    }

    #[test]
    fn tokenizes_basic_turtle() {
        let got = toks("@prefix ex: <http://example.org/> . ex:s a ex:O ; ex:p \"v\"@en , 42 .");
        assert_eq!(
            got,
            vec![
                Tok::At("prefix".into()),
                Tok::Pname { prefix: "ex".into(), local: "".into() },
                Tok::Iri("http://example.org/".into()),
                Tok::Dot,
                Tok::Pname { prefix: "ex".into(), local: "s".into() },
                Tok::Word("a".into()),
                Tok::Pname { prefix: "ex".into(), local: "O".into() },
                Tok::Semi,
                Tok::Pname { prefix: "ex".into(), local: "p".into() },
                Tok::Str("v".into()),
                Tok::At("en".into()),
                Tok::Comma,
                Tok::Int("42".into()),
                Tok::Dot,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn pname_trailing_dot_ends_statement() {
        let got = toks(":s :p :o.v2.");
        assert_eq!(
            got,
            vec![
                Tok::Pname { prefix: "".into(), local: "s".into() },
                Tok::Pname { prefix: "".into(), local: "p".into() },
                Tok::Pname { prefix: "".into(), local: "o.v2".into() },
                Tok::Dot,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn rule_arrow_and_formulas() {
        let got = toks("{ ?s ?p ?o } => { ?o ?p ?s } .");
        assert!(got.contains(&Tok::Implies));
        assert!(got.contains(&Tok::Var("s".into())));
    }

    #[test]
    fn rejects_decimals() {
        assert!(tokenize(":s :p 1.5 .").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let got = toks("# hello\n:s :p :o . # trailing");
        assert_eq!(got.len(), 5);
    }

    #[test]
    fn string_escapes() {
        let got = toks(r#""a\"b\ncA""#);
        assert_eq!(got[0], Tok::Str("a\"b\nc\u{41}".into()));
    }
}
