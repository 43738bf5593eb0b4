use std::fmt;
use std::path::Path;

use crate::error::Result;
use crate::quantum::Spin;

use super::expr::Expr;
use super::lexer::{tokenize, ParseError, ParseErrorKind, Tok, Token};

const MAX_DEPTH: usize = 64;

/// Transverse rotation axis of a hard pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PulseAxis {
    X,
    Y,
    MinusX,
    MinusY,
}

impl PulseAxis {
    pub const ALL: [PulseAxis; 4] = [PulseAxis::X, PulseAxis::Y, PulseAxis::MinusX, PulseAxis::MinusY];

    /// Azimuth of the axis in the transverse plane.
    pub fn phase(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            PulseAxis::X => 0.0,
            PulseAxis::Y => PI / 2.0,
            PulseAxis::MinusX => PI,
            PulseAxis::MinusY => 1.5 * PI,
        }
    }

    fn item_name(self) -> &'static str {
        match self {
            PulseAxis::X => "Rx",
            PulseAxis::Y => "Ry",
            PulseAxis::MinusX => "Rmx",
            PulseAxis::MinusY => "Rmy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DelaySpec {
    /// Duration in seconds; may involve `J` (Hz).
    Duration(Expr),
    /// Delay long enough for the conditional generator `2πJ I_z` to rotate
    /// by the given angle.
    ZRotation(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Pulse { spin: Spin, axis: PulseAxis, angle: Expr },
    Delay(DelaySpec),
    Crusher,
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Pulse { spin, axis, angle } => write!(f, "{}({spin}, {angle})", axis.item_name()),
            Item::Delay(DelaySpec::Duration(e)) => write!(f, "d({e})"),
            Item::Delay(DelaySpec::ZRotation(e)) => write!(f, "d(zrot: {e})"),
            Item::Crusher => f.write_str("Gz"),
        }
    }
}

/// Parsed pulse sequence, items in execution order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SequenceAst {
    pub items: Vec<Item>,
}

impl SequenceAst {
    pub fn new(items: Vec<Item>) -> Self {
        SequenceAst { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &SequenceAst) -> SequenceAst {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        SequenceAst { items }
    }

    /// Symbols other than `pi` and `J` that must be bound before compiling.
    pub fn free_symbols(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .items
            .iter()
            .flat_map(|item| match item {
                Item::Pulse { angle, .. } => angle.free_symbols(),
                Item::Delay(DelaySpec::Duration(e) | DelaySpec::ZRotation(e)) => e.free_symbols(),
                Item::Crusher => Vec::new(),
            })
            .collect();
        names.sort();
        names.dedup();
        names
    }
}

impl fmt::Display for SequenceAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" - ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

/// Canonical text; re-parses to an equal AST.
pub fn pretty_print(ast: &SequenceAst) -> String {
    ast.to_string()
}

/// Parses sequence text such as `Rx(b, pi/3) - Gz - d(1/(2J))`.
///
/// Items are `Rx`, `Ry`, `Rmx`, `Rmy` (spin, angle), `d(expr)` for a
/// duration in seconds, `d(zrot: expr)` for an angle-targeted delay and `Gz`
/// for a gradient crusher. Items are separated by `-` or `;`.
pub fn parse_sequence(text: &str) -> std::result::Result<SequenceAst, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { src: text, tokens, pos: 0, depth: 0 };
    let mut items = Vec::new();
    if p.peek().is_none() {
        return Ok(SequenceAst { items });
    }
    loop {
        items.push(p.item()?);
        match p.next() {
            None => break,
            Some(Token { tok: Tok::Minus | Tok::Semi, .. }) => {
                if p.peek().is_none() {
                    return Err(p.error_end("a sequence item after the separator"));
                }
            }
            Some(t) => {
                return Err(ParseError::at(
                    text,
                    t.offset,
                    ParseErrorKind::UnexpectedToken { found: t.tok.to_string(), expected: "`-` or `;` between items" },
                ))
            }
        }
    }
    Ok(SequenceAst { items })
}

/// Reads and parses a UTF-8 sequence file.
pub fn parse_sequence_file(path: impl AsRef<Path>) -> Result<SequenceAst> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_sequence(&text)?)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = std::result::Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.src.len(), |t| t.offset)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_end(&self, expected: &'static str) -> ParseError {
        ParseError::at(self.src, self.src.len(), ParseErrorKind::UnexpectedEnd { expected })
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> PResult<()> {
        match self.next() {
            Some(t) if t.tok == want => Ok(()),
            Some(t) => Err(ParseError::at(
                self.src,
                t.offset,
                ParseErrorKind::UnexpectedToken { found: t.tok.to_string(), expected },
            )),
            None => Err(self.error_end(expected)),
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.offset();
        let name = match self.next() {
            Some(Token { tok: Tok::Ident(name), .. }) => name,
            Some(t) => {
                return Err(ParseError::at(
                    self.src,
                    t.offset,
                    ParseErrorKind::UnexpectedToken { found: t.tok.to_string(), expected: "a sequence item" },
                ))
            }
            None => return Err(self.error_end("a sequence item")),
        };
        let axis = match name.as_str() {
            "Rx" => Some(PulseAxis::X),
            "Ry" => Some(PulseAxis::Y),
            "Rmx" => Some(PulseAxis::MinusX),
            "Rmy" => Some(PulseAxis::MinusY),
            _ => None,
        };
        if let Some(axis) = axis {
            self.expect(Tok::LParen, "`(`")?;
            let spin = self.spin()?;
            self.expect(Tok::Comma, "`,`")?;
            let angle = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Item::Pulse { spin, axis, angle });
        }
        match name.as_str() {
            "Gz" => Ok(Item::Crusher),
            "d" => {
                self.expect(Tok::LParen, "`(`")?;
                let zrot = matches!(self.peek(), Some(Tok::Ident(s)) if s == "zrot")
                    && matches!(self.tokens.get(self.pos + 1), Some(Token { tok: Tok::Colon, .. }));
                let spec = if zrot {
                    self.pos += 2;
                    DelaySpec::ZRotation(self.expr()?)
                } else {
                    DelaySpec::Duration(self.expr()?)
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(Item::Delay(spec))
            }
            _ => Err(ParseError::at(self.src, start, ParseErrorKind::UnknownItem(name))),
        }
    }

    fn spin(&mut self) -> PResult<Spin> {
        match self.next() {
            Some(Token { tok: Tok::Ident(s), offset }) => match s.as_str() {
                "a" => Ok(Spin::A),
                "b" => Ok(Spin::B),
                _ => Err(ParseError::at(self.src, offset, ParseErrorKind::UnknownSpin(s))),
            },
            Some(t) => Err(ParseError::at(
                self.src,
                t.offset,
                ParseErrorKind::UnexpectedToken { found: t.tok.to_string(), expected: "a spin label" },
            )),
            None => Err(self.error_end("a spin label")),
        }
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if self.depth >= MAX_DEPTH {
            return Err(ParseError::at(
                self.src,
                self.offset(),
                ParseErrorKind::MalformedExpression("nesting too deep".into()),
            ));
        }
        self.depth += 1;
        let out = f(self);
        self.depth -= 1;
        out
    }

    fn lift(&self, offset: usize, r: Result<Expr>) -> PResult<Expr> {
        r.map_err(|e| ParseError::at(self.src, offset, ParseErrorKind::MalformedExpression(e.to_string())))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        loop {
            let at = self.offset();
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.lift(at, acc.mul(&rhs))?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.lift(at, acc.div(&rhs))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                self.nested(|p| p.unary()).map(|e| e.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.nested(|p| p.unary())
            }
            _ => self.juxt(),
        }
    }

    /// A number may be followed directly by names or parenthesised factors,
    /// as in `8J` or `3pi`; juxtaposition binds tighter than `/`.
    fn juxt(&mut self) -> PResult<Expr> {
        if let Some(Tok::Number(lexeme)) = self.peek() {
            let at = self.offset();
            let mut acc = Expr::decimal(lexeme)
                .ok_or_else(|| ParseError::at(self.src, at, ParseErrorKind::BadNumber(lexeme.clone())))?;
            self.pos += 1;
            while matches!(self.peek(), Some(Tok::Ident(_) | Tok::LParen)) {
                let at = self.offset();
                let factor = self.atom()?;
                acc = self.lift(at, acc.mul(&factor))?;
            }
            return Ok(acc);
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.next() {
            Some(Token { tok: Tok::Ident(name), .. }) => Ok(match name.as_str() {
                "pi" => Expr::pi(),
                "J" => Expr::j(),
                _ => Expr::symbol(&name),
            }),
            Some(Token { tok: Tok::LParen, .. }) => {
                let e = self.nested(|p| p.expr())?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(t) => Err(ParseError::at(
                self.src,
                t.offset,
                ParseErrorKind::UnexpectedToken { found: t.tok.to_string(), expected: "an angle expression" },
            )),
            None => Err(self.error_end("an angle expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREP: &str = "Rx(b,pi/3) - Gz - Rx(b,pi/4) - d(1/(2J)) - Rmy(b,pi/4) - Gz";

    #[test]
    fn prep_sequence_items() {
        let ast = parse_sequence(PREP).unwrap();
        assert_eq!(ast.len(), 6);
        assert_eq!(ast.items[0], Item::Pulse { spin: Spin::B, axis: PulseAxis::X, angle: Expr::pi_fraction(1, 3) });
        assert_eq!(ast.items[1], Item::Crusher);
        let half_j = Expr::integer(1).div(&Expr::integer(2).mul(&Expr::j()).unwrap()).unwrap();
        assert_eq!(ast.items[3], Item::Delay(DelaySpec::Duration(half_j)));
        assert!(matches!(ast.items[4], Item::Pulse { axis: PulseAxis::MinusY, .. }));
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(parse_sequence("").unwrap().is_empty());
        assert!(parse_sequence("  \n # only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn interferometer_sequence() {
        let text = "Ry(b,-pi/2) - d(zrot:theta) - Ry(b,pi/2) - d(zrot:pi) - Ry(b,-pi/2) - d(zrot:theta) - Ry(b,pi/2)";
        let ast = parse_sequence(text).unwrap();
        assert_eq!(ast.len(), 7);
        assert_eq!(ast.items[1], Item::Delay(DelaySpec::ZRotation(Expr::symbol("theta"))));
        assert_eq!(ast.free_symbols(), vec!["theta".to_string()]);
    }

    #[test]
    fn round_trip_and_canonical_angles() {
        let ast = parse_sequence(PREP).unwrap();
        let text = pretty_print(&ast);
        assert_eq!(parse_sequence(&text).unwrap(), ast);
        assert_eq!(pretty_print(&SequenceAst::default()), "");
        let ast = parse_sequence("Rx(a, pi + pi/2)").unwrap();
        assert_eq!(pretty_print(&ast), "Rx(a, 3pi/2)");
        let ast = parse_sequence("d(1/8J); d(zrot: pi - theta)").unwrap();
        assert_eq!(pretty_print(&ast), "d(1/(8J)) - d(zrot: pi - theta)");
    }

    #[test]
    fn separators_and_errors() {
        assert_eq!(parse_sequence("Gz;Gz - Gz").unwrap().len(), 3);
        assert!(parse_sequence("Gz -").is_err());
        assert!(parse_sequence("- Gz").is_err());
        assert!(parse_sequence("Gz Gz").is_err());
        let err = parse_sequence("Rx(c, pi)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSpin("c".into()));
        assert_eq!(err.column, 4);
        let err = parse_sequence("Gz - Rz(a, pi)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownItem("Rz".into()));
        assert_eq!(err.column, 6);
        assert!(matches!(parse_sequence("Rx(a, 1/(pi+1))").unwrap_err().kind, ParseErrorKind::MalformedExpression(_)));
        assert!(matches!(parse_sequence("Rx(a, )").unwrap_err().kind, ParseErrorKind::UnexpectedToken { .. }));
        assert!(matches!(parse_sequence("Rx(a, pi").unwrap_err().kind, ParseErrorKind::UnexpectedEnd { .. }));
    }

    #[test]
    fn deep_nesting_is_rejected_without_overflow() {
        let deep = format!("d({}1{})", "(".repeat(10_000), ")".repeat(10_000));
        assert!(parse_sequence(&deep).is_err());
        let minus = format!("d({}1)", "-".repeat(10_000));
        assert!(parse_sequence(&minus).is_err());
    }
}
