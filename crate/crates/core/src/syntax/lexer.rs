use super::ParseDiagnostic;
use crate::model::is_local_char;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    PrefixKw,
    PName { label: String, local: String },
    IriRef(String),
    Str(String),
    LangTag(String),
    Caret2,
    Var(String),
    Blank(String),
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Pipe,
    Lt,
    Gt,
    Eq,
    Question,
    Bang,
    DColon,
    PlusPlus,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::PrefixKw => "'@prefix'".into(),
            Tok::PName { label, local } => format!("'{label}:{local}'"),
            Tok::IriRef(iri) => format!("'<{iri}>'"),
            Tok::Str(_) => "string literal".into(),
            Tok::LangTag(tag) => format!("'@{tag}'"),
            Tok::Caret2 => "'^^'".into(),
            Tok::Var(v) => format!("'?{v}'"),
            Tok::Blank(b) => format!("'_:{b}'"),
            Tok::Ident(w) => format!("'{w}'"),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Lt => "'<'".into(),
            Tok::Gt => "'>'".into(),
            Tok::Eq => "'='".into(),
            Tok::Question => "'?'".into(),
            Tok::Bang => "'!'".into(),
            Tok::DColon => "'::'".into(),
            Tok::PlusPlus => "'++'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
    tokens: Vec<Token>,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut lx = Lexer { chars: src.chars().collect(), i: 0, line: 1, column: 1, tokens: Vec::new() };
    lx.run()?;
    Ok(lx.tokens)
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.i + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic { line: pos.line, column: pos.column, message: message.into() }
    }

    fn push(&mut self, tok: Tok, pos: Pos) {
        self.tokens.push(Token { tok, pos });
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| f(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    /// Local part of a prefixed name; a '.' is kept only between name characters.
    fn local_name(&mut self) -> String {
        let mut s = String::new();
        loop {
            match self.peek() {
                Some(c) if is_local_char(c) => {
                    s.push(c);
                    self.bump();
                }
                Some('.') if !s.is_empty() && self.peek_at(1).is_some_and(is_local_char) => {
                    s.push('.');
                    self.bump();
                }
                _ => return s,
            }
        }
    }

    fn prev_is_list_kw(&self) -> bool {
        matches!(self.tokens.last(), Some(Token { tok: Tok::Ident(w), .. }) if w == "List")
    }

    fn run(&mut self) -> Result<(), ParseDiagnostic> {
        while let Some(c) = self.peek() {
            let pos = self.pos();
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '[' | ']' | '(' | ')' | '{' | '}' | ',' | '.' | '|' | '>' | '=' | '!' => {
                    self.bump();
                    let tok = match c {
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ',' => Tok::Comma,
                        '.' => Tok::Dot,
                        '|' => Tok::Pipe,
                        '>' => Tok::Gt,
                        '=' => Tok::Eq,
                        _ => Tok::Bang,
                    };
                    self.push(tok, pos);
                }
                ':' if self.peek_at(1) == Some(':') => {
                    self.bump();
                    self.bump();
                    self.push(Tok::DColon, pos);
                }
                '+' if self.peek_at(1) == Some('+') => {
                    self.bump();
                    self.bump();
                    self.push(Tok::PlusPlus, pos);
                }
                '^' if self.peek_at(1) == Some('^') => {
                    self.bump();
                    self.bump();
                    self.push(Tok::Caret2, pos);
                }
                '<' if self.prev_is_list_kw() => {
                    self.bump();
                    self.push(Tok::Lt, pos);
                }
                '<' => self.iri_ref(pos)?,
                '"' => self.string(pos)?,
                '@' => {
                    self.bump();
                    let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                    let after_string = matches!(self.tokens.last(), Some(Token { tok: Tok::Str(_), .. }));
                    if after_string && !word.is_empty() && word.starts_with(|c: char| c.is_ascii_alphabetic()) {
                        self.push(Tok::LangTag(word), pos);
                    } else if word == "prefix" {
                        self.push(Tok::PrefixKw, pos);
                    } else {
                        return Err(self.err(pos, format!("unexpected '@{word}'")));
                    }
                }
                '?' => {
                    self.bump();
                    let starts_name = self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
                    if starts_name {
                        // `?ottr:IRI` and `?List<..>` are the optional modifier followed by a type
                        let save = (self.i, self.line, self.column);
                        let name = self.take_while(is_local_char);
                        let type_follows = (self.peek() == Some(':') && self.peek_at(1) != Some(':'))
                            || (name == "List" && self.peek() == Some('<'));
                        if type_follows {
                            (self.i, self.line, self.column) = save;
                            self.push(Tok::Question, pos);
                        } else {
                            self.push(Tok::Var(name), pos);
                        }
                    } else {
                        self.push(Tok::Question, pos);
                    }
                }
                '_' if self.peek_at(1) == Some(':') => {
                    self.bump();
                    self.bump();
                    let label = self.take_while(is_local_char);
                    if label.is_empty() {
                        return Err(self.err(pos, "blank node needs a label"));
                    }
                    self.push(Tok::Blank(label), pos);
                }
                c if is_name_start(c) => {
                    let word = self.take_while(is_local_char);
                    if self.peek() == Some(':') && self.peek_at(1) != Some(':') {
                        self.bump();
                        let local = self.local_name();
                        self.push(Tok::PName { label: word, local }, pos);
                    } else {
                        self.push(Tok::Ident(word), pos);
                    }
                }
                other => return Err(self.err(pos, format!("unexpected character '{other}'"))),
            }
        }
        let pos = self.pos();
        self.push(Tok::Eof, pos);
        Ok(())
    }

    fn iri_ref(&mut self, pos: Pos) -> Result<(), ParseDiagnostic> {
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') => {
                    return Err(self.err(pos, format!("invalid character {c:?} in IRI")));
                }
                Some(c) => iri.push(c),
                None => return Err(self.err(pos, "unterminated IRI")),
            }
        }
        self.push(Tok::IriRef(iri), pos);
        Ok(())
    }

    fn hex_escape(&mut self, len: usize, at: Pos) -> Result<char, ParseDiagnostic> {
        let mut code = 0u32;
        for _ in 0..len {
            let d = self.bump().and_then(|c| c.to_digit(16)).ok_or_else(|| self.err(at, "malformed \\u escape"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.err(at, "escape is not a valid code point"))
    }

    fn string(&mut self, pos: Pos) -> Result<(), ParseDiagnostic> {
        self.bump();
        let mut s = String::new();
        loop {
            let at = self.pos();
            match self.bump() {
                Some('"') => break,
                Some('\n') | None => return Err(self.err(pos, "unterminated string literal")),
                Some('\\') => {
                    let c = match self.bump() {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4, at)?,
                        Some('U') => self.hex_escape(8, at)?,
                        Some(other) => return Err(self.err(at, format!("UnknownEscape: '\\{other}'"))),
                        None => return Err(self.err(pos, "unterminated string literal")),
                    };
                    s.push(c);
                }
                Some(c) => s.push(c),
            }
        }
        self.push(Tok::Str(s), pos);
        Ok(())
    }
}
