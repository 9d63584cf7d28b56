use super::{Arg, Number, PipelineExpr, Term};

/// A syntax error at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Number),
    LParen,
    RParen,
    Comma,
    Pipe,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(usize, Tok)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0, peeked: None }
    }

    fn error(&self, offset: usize, expected: &[&'static str], found: String) -> ParseError {
        ParseError { offset, expected: expected.to_vec(), found }
    }

    fn lex(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(start) else {
            return Ok((start, Tok::Eof));
        };
        let single = match b {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'|' => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((start, tok));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
        }
        if b.is_ascii_digit() || b == b'-' {
            return self.lex_number(start).map(|n| (start, Tok::Num(n)));
        }
        let ch = self.src[start..].chars().next().expect("offset is on a char boundary");
        Err(self.error(start, &["identifier", "number", "`(`", "`)`", "`,`", "`|`"], format!("character {ch:?}")))
    }

    fn lex_number(&mut self, start: usize) -> Result<Number, ParseError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let from = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos > from
        };
        if bytes[self.pos] == b'-' {
            self.pos += 1;
        }
        if !digits(&mut self.pos) {
            return Err(self.error(self.pos, &["digit"], self.found_at(self.pos)));
        }
        let mut decimal = false;
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            decimal = true;
            if !digits(&mut self.pos) {
                return Err(self.error(self.pos, &["digit"], self.found_at(self.pos)));
            }
        }
        let text = &self.src[start..self.pos];
        if decimal {
            match text.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Number::Decimal(x)),
                _ => Err(self.error(start, &["finite decimal"], format!("`{text}`"))),
            }
        } else {
            text.parse::<i64>()
                .map(Number::Int)
                .map_err(|_| self.error(start, &["integer within 64-bit range"], format!("`{text}`")))
        }
    }

    fn found_at(&self, offset: usize) -> String {
        match self.src[offset..].chars().next() {
            Some(c) => format!("character {c:?}"),
            None => "end of input".into(),
        }
    }

    fn peek(&mut self) -> Result<&(usize, Tok), ParseError> {
        if self.peeked.is_none() {
            let tok = self.lex()?;
            self.peeked = Some(tok);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn bump(&mut self) -> Result<(usize, Tok), ParseError> {
        self.peek()?;
        Ok(self.peeked.take().unwrap())
    }

    fn pipeline(&mut self) -> Result<PipelineExpr, ParseError> {
        let source = self.term()?;
        let mut stages = Vec::new();
        loop {
            let (offset, tok) = self.bump()?;
            match tok {
                Tok::Pipe => stages.push(self.term()?),
                Tok::Eof => return Ok(PipelineExpr { source, stages }),
                other => return Err(self.error(offset, &["`|`", "end of input"], other.describe())),
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (offset, tok) = self.bump()?;
        let Tok::Ident(name) = tok else {
            return Err(self.error(offset, &["identifier"], tok.describe()));
        };
        let mut args = Vec::new();
        if self.peek()?.1 == Tok::LParen {
            self.bump()?;
            args.push(self.arg()?);
            loop {
                let (offset, tok) = self.bump()?;
                match tok {
                    Tok::Comma => args.push(self.arg()?),
                    Tok::RParen => break,
                    other => return Err(self.error(offset, &["`,`", "`)`"], other.describe())),
                }
            }
        }
        Ok(Term { name, args, offset })
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        let (offset, tok) = self.bump()?;
        match tok {
            Tok::Num(n) => Ok(Arg::Number(n)),
            Tok::LParen => {
                let mut items = vec![self.number()?];
                loop {
                    let (offset, tok) = self.bump()?;
                    match tok {
                        Tok::Comma => items.push(self.number()?),
                        Tok::RParen => return Ok(Arg::Tuple(items)),
                        other => return Err(self.error(offset, &["`,`", "`)`"], other.describe())),
                    }
                }
            }
            other => Err(self.error(offset, &["argument"], other.describe())),
        }
    }

    fn number(&mut self) -> Result<Number, ParseError> {
        let (offset, tok) = self.bump()?;
        match tok {
            Tok::Num(n) => Ok(n),
            other => Err(self.error(offset, &["number"], other.describe())),
        }
    }
}

/// Parses a pipeline. Unknown names and wrong arities are not syntax
/// errors; they surface in [`super::resolve`].
pub fn parse(text: &str) -> Result<PipelineExpr, ParseError> {
    Parser::new(text).pipeline()
}

/// Like [`parse`], for arbitrary bytes; invalid UTF-8 is a parse error.
pub fn parse_bytes(bytes: &[u8]) -> Result<PipelineExpr, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => Err(ParseError {
            offset: e.valid_up_to(),
            expected: vec!["UTF-8 text"],
            found: "invalid UTF-8".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_and_stages() {
        let e = parse("uniform(3,42) | seven").unwrap();
        assert_eq!(e.source.name, "uniform");
        assert_eq!(e.source.args, vec![Arg::Number(Number::Int(3)), Arg::Number(Number::Int(42))]);
        assert_eq!(e.stages.len(), 1);
        assert_eq!(e.stages[0].name, "seven");
        assert_eq!(e.stages[0].offset, 16);
    }

    #[test]
    fn tuple_arguments() {
        let e = parse("iid((0.2,0.3,0.5),7) | swap2 | shift").unwrap();
        assert_eq!(
            e.source.args[0],
            Arg::Tuple(vec![Number::Decimal(0.2), Number::Decimal(0.3), Number::Decimal(0.5)])
        );
        let names: Vec<_> = e.stages.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["swap2", "shift"]);
    }

    #[test]
    fn truncated_input() {
        let text = "uniform(3,1) | swap2(";
        let err = parse(text).unwrap_err();
        assert_eq!(err.offset, text.len());
        assert_eq!(err.found, "end of input");
        assert_eq!(err.expected, vec!["argument"]);
    }

    #[test]
    fn syntax_errors() {
        for (text, offset) in [
            ("", 0),
            ("| seven", 0),
            ("uniform(3,,1)", 10),
            ("uniform()", 8),
            ("uniform(3) seven", 11),
            ("uniform(3) | ", 13),
            ("iid((0.5,), 1)", 9),
            ("osc(1.)", 6),
            ("osc(-)", 5),
            ("osc(1) # comment", 7),
            ("inc(99999999999999999999)", 4),
        ] {
            let err = parse(text).unwrap_err();
            assert_eq!(err.offset, offset, "{text:?}: {err}");
            assert!(err.offset <= text.len());
        }
    }

    #[test]
    fn whitespace_and_negatives() {
        let e = parse("\n const ( 0 )\t|\tinc( -1 )").unwrap();
        assert_eq!(e.stages[0].args, vec![Arg::Number(Number::Int(-1))]);
    }

    #[test]
    fn non_utf8_is_an_error() {
        let err = parse_bytes(b"osc(1) \xff").unwrap_err();
        assert_eq!(err.offset, 7);
    }
}
