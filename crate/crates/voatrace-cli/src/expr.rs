//! Concrete syntax for Fock-space states.
//!
//! Grammar (whitespace separated):
//!
//! ```text
//! expression := term* 'vac'
//! term       := ident '[' '-' int ']' ('^' int)?     (bracket mode)
//!             | ident '(' '-' int ')' ('^' int)?     (round mode)
//! ident      := 'h' digit+ | 'a'                     ('a' is an alias for h1)
//! ```
//!
//! Direction indices are 1-based; exponents expand to repeated factors.
//! Rendering the parsed form reproduces a canonically equivalent expression.

use std::fmt;

use thiserror::Error;
use voatrace_core::fock::{BracketMonomial, FockState};

/// Which mode family the expression uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprMode {
    Bracket,
    Round,
}

/// A parsed state expression together with its source text and rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateExpr {
    pub source: String,
    pub rank: u32,
    pub parsed: ParsedState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedState {
    Bracket(BracketMonomial),
    Round(FockState),
}

impl StateExpr {
    /// Canonical rendering of the parsed form.
    pub fn render(&self) -> String {
        match &self.parsed {
            ParsedState::Bracket(m) => m.to_string(),
            ParsedState::Round(s) => s.to_string(),
        }
    }

    pub fn bracket(&self) -> Option<&BracketMonomial> {
        match &self.parsed {
            ParsedState::Bracket(m) => Some(m),
            ParsedState::Round(_) => None,
        }
    }
}

/// Parse failures, with positions for syntax problems.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("direction index {direction} exceeds the rank {rank}")]
    Rank { direction: u32, rank: u32 },
    #[error("mode {mode} is not negative; only creation modes are allowed")]
    Mode { mode: i64 },
}

struct Cursor<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> Result<(), ParseError> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.pos,
                msg: format!("expected {:?}", ch as char),
            })
        }
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(ParseError::Syntax {
                pos: start,
                msg: "expected an integer".into(),
            });
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "integer out of range".into(),
            })
    }
}

/// Parse a state expression of the requested mode at rank `d`.
pub fn parse_state_expr(text: &str, d: u32, mode: ExprMode) -> Result<StateExpr, ParseError> {
    let mut cur = Cursor::new(text);
    let mut factors: Vec<(u32, u32)> = Vec::new();
    loop {
        cur.skip_ws();
        let Some(c) = cur.peek() else {
            return Err(ParseError::Syntax {
                pos: cur.pos,
                msg: "expected a term or 'vac'".into(),
            });
        };
        if c == b'v' {
            // 'vac' terminates the expression
            for ch in *b"vac" {
                cur.eat(ch)?;
            }
            cur.skip_ws();
            if cur.pos != cur.bytes.len() {
                return Err(ParseError::Syntax {
                    pos: cur.pos,
                    msg: "unexpected input after 'vac'".into(),
                });
            }
            break;
        }
        // ident
        let direction = if c == b'a' {
            cur.pos += 1;
            1u32
        } else if c == b'h' {
            cur.pos += 1;
            let idx = cur.integer()?;
            u32::try_from(idx).map_err(|_| ParseError::Syntax {
                pos: cur.pos,
                msg: "direction index out of range".into(),
            })?
        } else {
            return Err(ParseError::Syntax {
                pos: cur.pos,
                msg: format!("expected 'h<digits>', 'a', or 'vac', found {:?}", c as char),
            });
        };
        if direction == 0 || direction > d {
            return Err(ParseError::Rank { direction, rank: d });
        }
        // opening delimiter per mode
        let (open, close) = match mode {
            ExprMode::Bracket => (b'[', b']'),
            ExprMode::Round => (b'(', b')'),
        };
        cur.eat(open)?;
        let negative = cur.peek() == Some(b'-');
        if negative {
            cur.pos += 1;
        }
        let magnitude = cur.integer()? as i64;
        let mode_value = if negative { -magnitude } else { magnitude };
        if mode_value >= 0 {
            return Err(ParseError::Mode { mode: mode_value });
        }
        cur.eat(close)?;
        // optional exponent
        let mut count = 1u64;
        if cur.peek() == Some(b'^') {
            cur.pos += 1;
            count = cur.integer()?;
            if count == 0 {
                return Err(ParseError::Syntax {
                    pos: cur.pos,
                    msg: "exponent must be positive".into(),
                });
            }
        }
        for _ in 0..count {
            factors.push((direction, (-mode_value) as u32));
        }
    }
    let parsed = match mode {
        ExprMode::Bracket => ParsedState::Bracket(BracketMonomial::new(factors, d)),
        ExprMode::Round => ParsedState::Round(FockState::new(factors, d)),
    };
    Ok(StateExpr {
        source: text.to_string(),
        rank: d,
        parsed,
    })
}

impl fmt::Display for StateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
