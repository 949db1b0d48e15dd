//! Recursive-descent parser for the property grammar:
//!
//! ```text
//! property   := coalition query
//! coalition  := "<<" block (":" block)? ">>"
//! block      := player ("," player)*
//! query      := "P" relop number "[" path "]"
//!             | ("Pmax" | "Pmin") "=?" "[" path "]"
//!             | "R" "{" label "}" ("max" | "min") "=?" "[" path "]"
//!             | ("max" | "min") "=?" "(" rterm ("+" rterm)* ")"
//! rterm      := "R" "{" label "}" "[" path "]"
//! path       := "F" ("<=" bound)? stateform
//! bound      := integer | "kmax" (("+" | "-") integer)?
//! stateform  := conj ("|" conj)*
//! conj       := unary ("&" unary)*
//! unary      := "!" unary | "(" stateform ")" | label | linear relop linear
//! linear     := ("+" | "-")? term (("+" | "-") term)*
//! term       := integer ("*" var)? | var          var := k | c<i> | kmax
//! ```

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{PropertyError, PropertyErrorKind};
use crate::game::GameParams;

type PResult<T> = Result<T, PropertyError>;

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    params: &'a GameParams,
}

/// Parses `text` and resolves labels and variables against `params`.
pub fn parse_property(text: &str, params: &GameParams) -> PResult<PropertyAst> {
    if text.trim().is_empty() {
        return Err(PropertyError::new(
            PropertyErrorKind::Syntax,
            0,
            "empty property",
        ));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        params,
    };
    let coalition = p.coalition()?;
    let (query, path) = p.query()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(PropertyAst {
        players: params.n,
        coalition,
        query,
        path,
    })
}

/// Parses a bare state predicate such as `c1+c2>400 & k=3` or `"good"`.
pub fn parse_predicate(text: &str, params: &GameParams) -> PResult<StatePredicate> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        params,
    };
    let pred = p.stateform()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(pred)
}

/// The predicate behind the `"good"` label: total resources exceed twice the threshold.
pub fn good_predicate(params: &GameParams) -> StatePredicate {
    let mut expr = LinearExpr::zero(params.n);
    expr.c_coefs.iter_mut().for_each(|c| *c = 1);
    expr.constant = -2 * i64::from(params.r_needed);
    StatePredicate::Compare(Comparison {
        expr,
        relation: Relation::Gt,
    })
}

/// Resolves `r<i>` and `done<i..>` reward labels.
pub fn reward_label(label: &str, params: &GameParams) -> Option<RewardExpr> {
    let players: Vec<usize> = if let Some(rest) = label.strip_prefix("done") {
        rest.chars()
            .map(|ch| ch.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()?
    } else {
        vec![label.strip_prefix('r')?.parse().ok()?]
    };
    if players.is_empty() {
        return None;
    }
    let mut coefficients = vec![0; params.n];
    for p in players {
        if p == 0 || p > params.n || coefficients[p - 1] > 0 {
            return None;
        }
        coefficients[p - 1] = 1;
    }
    Some(RewardExpr {
        coefficients,
        baseline: params.r_init,
    })
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> PropertyError {
        PropertyError::new(
            PropertyErrorKind::Syntax,
            self.offset(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn semantic(offset: usize, msg: impl Into<String>) -> PropertyError {
        PropertyError::new(PropertyErrorKind::Semantic, offset, msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.syntax(what))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.ident() == Some(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&format!("`{kw}`")))
        }
    }

    fn coalition(&mut self) -> PResult<Coalition> {
        self.expect(Tok::LCoal, "`<<`")?;
        let mut seen = vec![false; self.params.n];
        let mut blocks = vec![self.block(&mut seen)?];
        while *self.peek() == Tok::Colon {
            let at = self.bump().offset;
            if blocks.len() == 2 {
                return Err(Self::semantic(
                    at,
                    "more than two coalition blocks; at most two partitions are supported",
                ));
            }
            blocks.push(self.block(&mut seen)?);
        }
        self.expect(Tok::RCoal, "`>>`, `,` or `:`")?;
        Ok(Coalition { blocks })
    }

    fn block(&mut self, seen: &mut [bool]) -> PResult<Vec<usize>> {
        let mut players = vec![self.player(seen)?];
        while self.eat(&Tok::Comma) {
            players.push(self.player(seen)?);
        }
        Ok(players)
    }

    fn player(&mut self, seen: &mut [bool]) -> PResult<usize> {
        let at = self.offset();
        let Some(name) = self.ident() else {
            return Err(self.syntax("a player such as `p1`"));
        };
        let index = name
            .strip_prefix('p')
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or_else(|| self.syntax("a player such as `p1`"))?;
        if index == 0 || index > self.params.n {
            return Err(Self::semantic(
                at,
                format!(
                    "unknown player `{name}` (players are p1..p{})",
                    self.params.n
                ),
            ));
        }
        if std::mem::replace(&mut seen[index - 1], true) {
            return Err(Self::semantic(at, format!("player `{name}` listed twice")));
        }
        self.bump();
        Ok(index - 1)
    }

    fn query(&mut self) -> PResult<(Query, PathFormula)> {
        match self.ident() {
            Some("P") => {
                self.bump();
                let relation = self
                    .relop()
                    .ok_or_else(|| self.syntax("a comparison operator"))?;
                let num_at = self.offset();
                let threshold = match *self.peek() {
                    Tok::Int(i) => i as f64,
                    Tok::Real(r) => r,
                    _ => return Err(self.syntax("a probability threshold")),
                };
                self.bump();
                if !(0.0..=1.0).contains(&threshold) {
                    return Err(Self::semantic(
                        num_at,
                        format!("probability threshold {threshold} outside [0, 1]"),
                    ));
                }
                let path = self.bracketed_path()?;
                Ok((
                    Query::ProbBound {
                        relation,
                        threshold,
                    },
                    path,
                ))
            }
            Some(kw @ ("Pmax" | "Pmin")) => {
                let optimum = if kw == "Pmax" {
                    Optimum::Max
                } else {
                    Optimum::Min
                };
                self.bump();
                self.expect(Tok::Query, "`=?`")?;
                let path = self.bracketed_path()?;
                Ok((Query::ProbOptimum(optimum), path))
            }
            Some("R") => {
                let reward = self.reward_label()?;
                let optimum = self.optimum()?;
                self.expect(Tok::Query, "`=?`")?;
                let path = self.bracketed_path()?;
                Ok((Query::RewardOptimum { optimum, reward }, path))
            }
            Some("max" | "min") => {
                let optimum = self.optimum()?;
                self.expect(Tok::Query, "`=?`")?;
                self.expect(Tok::LParen, "`(`")?;
                let mut reward = self.reward_label()?;
                let path = self.bracketed_path()?;
                while *self.peek() == Tok::Plus {
                    self.bump();
                    let term_at = self.offset();
                    let next = self.reward_label()?;
                    let next_path = self.bracketed_path()?;
                    if next_path != path {
                        return Err(Self::semantic(
                            term_at,
                            "summed reward objectives must share the same path formula",
                        ));
                    }
                    for (a, b) in reward.coefficients.iter_mut().zip(&next.coefficients) {
                        *a += b;
                    }
                }
                self.expect(Tok::RParen, "`+` or `)`")?;
                Ok((Query::RewardOptimum { optimum, reward }, path))
            }
            _ => Err(self.syntax("`P`, `Pmax=?`, `Pmin=?`, `R{...}` or `max=? (...)`")),
        }
    }

    fn optimum(&mut self) -> PResult<Optimum> {
        match self.ident() {
            Some("max") => {
                self.bump();
                Ok(Optimum::Max)
            }
            Some("min") => {
                self.bump();
                Ok(Optimum::Min)
            }
            _ => Err(self.syntax("`max` or `min`")),
        }
    }

    fn reward_label(&mut self) -> PResult<RewardExpr> {
        self.keyword("R")?;
        self.expect(Tok::LBrace, "`{`")?;
        let at = self.offset();
        let Tok::Str(label) = self.peek().clone() else {
            return Err(self.syntax("a quoted reward label"));
        };
        self.bump();
        let reward = reward_label(&label, self.params)
            .ok_or_else(|| Self::semantic(at, format!("unknown reward label \"{label}\"")))?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(reward)
    }

    fn bracketed_path(&mut self) -> PResult<PathFormula> {
        self.expect(Tok::LBrack, "`[`")?;
        let path = self.path()?;
        self.expect(Tok::RBrack, "`]`")?;
        Ok(path)
    }

    fn path(&mut self) -> PResult<PathFormula> {
        let at = self.offset();
        match self.ident() {
            Some("F") => {
                self.bump();
            }
            Some(op @ ("G" | "U" | "X")) => {
                return Err(PropertyError::new(
                    PropertyErrorKind::Syntax,
                    at,
                    format!("unsupported operator `{op}`; only `F` (eventually) is available"),
                ));
            }
            _ => return Err(self.syntax("path operator `F`")),
        }
        let mut bound = None;
        if self.eat(&Tok::Le) {
            let b_at = self.offset();
            let b = self.bound()?;
            if b <= 0 {
                return Err(Self::semantic(b_at, "step bound must be positive"));
            }
            bound = Some(u32::try_from(b).map_err(|_| Self::semantic(b_at, "bound too large"))?);
        }
        let target = self.stateform()?;
        Ok(PathFormula { target, bound })
    }

    fn bound(&mut self) -> PResult<i64> {
        let symbolic = matches!(self.peek(), Tok::Ident(s) if s == "kmax");
        let at = self.offset();
        let base =
            i64::try_from(self.integer()?).map_err(|_| Self::semantic(at, "bound too large"))?;
        if !symbolic {
            return Ok(base);
        }
        let sign = match self.peek() {
            Tok::Plus => 1,
            Tok::Minus => -1,
            _ => return Ok(base),
        };
        self.bump();
        let at = self.offset();
        let offset =
            i64::try_from(self.integer()?).map_err(|_| Self::semantic(at, "bound too large"))?;
        Ok(base + sign * offset)
    }

    fn integer(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Int(i) => {
                self.bump();
                Ok(i)
            }
            Tok::Ident(ref s) if s == "kmax" => {
                self.bump();
                Ok(u64::from(self.params.k_max))
            }
            _ => Err(self.syntax("an integer")),
        }
    }

    fn stateform(&mut self) -> PResult<StatePredicate> {
        let mut items = vec![self.conj()?];
        while self.eat(&Tok::Or) {
            items.push(self.conj()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            StatePredicate::Or(items)
        })
    }

    fn conj(&mut self) -> PResult<StatePredicate> {
        let mut items = vec![self.unary()?];
        while self.eat(&Tok::And) {
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            StatePredicate::And(items)
        })
    }

    fn unary(&mut self) -> PResult<StatePredicate> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(StatePredicate::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.stateform()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Str(label) => {
                let at = self.offset();
                self.bump();
                match label.as_str() {
                    "good" => Ok(good_predicate(self.params)),
                    _ => Err(Self::semantic(
                        at,
                        format!("unknown state label \"{label}\""),
                    )),
                }
            }
            _ => {
                let lhs = self.linear()?;
                let relation = self
                    .relop()
                    .ok_or_else(|| self.syntax("a comparison operator"))?;
                let rhs = self.linear()?;
                let mut expr = lhs;
                expr.add_scaled(&rhs, -1);
                Ok(StatePredicate::Compare(Comparison { expr, relation }))
            }
        }
    }

    fn relop(&mut self) -> Option<Relation> {
        let r = match self.peek() {
            Tok::Lt => Relation::Lt,
            Tok::Le => Relation::Le,
            Tok::Eq => Relation::Eq,
            Tok::Ge => Relation::Ge,
            Tok::Gt => Relation::Gt,
            _ => return None,
        };
        self.bump();
        Some(r)
    }

    fn linear(&mut self) -> PResult<LinearExpr> {
        let mut expr = LinearExpr::zero(self.params.n);
        let mut sign = if self.eat(&Tok::Minus) {
            -1
        } else {
            self.eat(&Tok::Plus);
            1
        };
        loop {
            let term = self.term()?;
            expr.add_scaled(&term, sign);
            sign = match self.peek() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => return Ok(expr),
            };
            self.bump();
        }
    }

    fn term(&mut self) -> PResult<LinearExpr> {
        let at = self.offset();
        let coef = match *self.peek() {
            Tok::Int(i) => {
                self.bump();
                let c = i64::try_from(i).map_err(|_| Self::semantic(at, "integer too large"))?;
                if !self.eat(&Tok::Star) {
                    let mut e = LinearExpr::zero(self.params.n);
                    e.constant = c;
                    return Ok(e);
                }
                c
            }
            _ => 1,
        };
        let var = self.variable()?;
        let mut e = LinearExpr::zero(self.params.n);
        e.add_scaled(&var, coef);
        Ok(e)
    }

    fn variable(&mut self) -> PResult<LinearExpr> {
        let at = self.offset();
        let Some(name) = self.ident().map(str::to_string) else {
            return Err(self.syntax("an integer or a variable (`k`, `c1`, ...)"));
        };
        let mut e = LinearExpr::zero(self.params.n);
        match name.as_str() {
            "k" => e.k_coef = 1,
            "kmax" => e.constant = i64::from(self.params.k_max),
            _ => {
                let i = name
                    .strip_prefix('c')
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Self::semantic(at, format!("unknown variable `{name}`")))?;
                if i == 0 || i > self.params.n {
                    return Err(Self::semantic(
                        at,
                        format!(
                            "variable `{name}` out of range (players are 1..{})",
                            self.params.n
                        ),
                    ));
                }
                e.c_coefs[i - 1] = 1;
            }
        }
        self.bump();
        Ok(e)
    }
}
