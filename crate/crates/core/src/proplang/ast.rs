use std::fmt;

use crate::game::GameState;

/// Player partition of a property. The first block is the proponent; everyone else (the
/// second block plus any unmentioned player) opposes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    /// Zero-based player indices, in the order written.
    pub blocks: Vec<Vec<usize>>,
}

impl Coalition {
    pub fn proponents(&self) -> &[usize] {
        &self.blocks[0]
    }

    /// Players outside the first block, ascending.
    pub fn opponents(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|p| !self.blocks[0].contains(p)).collect()
    }

    /// True when the proponent block holds every player.
    pub fn is_grand(&self, n: usize) -> bool {
        self.opponents(n).is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimum {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds<T: PartialOrd>(self, lhs: T, rhs: T) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    /// The relation obtained by swapping the operands.
    pub fn flipped(self) -> Relation {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
            Relation::Gt => Relation::Lt,
        }
    }
}

/// `Σ coef_i · (c_i − baseline)` with non-negative integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardExpr {
    pub coefficients: Vec<u32>,
    pub baseline: u32,
}

impl RewardExpr {
    pub fn evaluate(&self, state: &GameState) -> f64 {
        self.coefficients
            .iter()
            .zip(&state.c)
            .map(|(&w, &c)| f64::from(w) * (f64::from(c) - f64::from(self.baseline)))
            .sum()
    }

    /// Splits the coefficients into a sum of `r<i>` / `done<ij..>` labels.
    pub fn labels(&self) -> Vec<String> {
        let mut left = self.coefficients.clone();
        let mut out = Vec::new();
        loop {
            let players: Vec<usize> = (0..left.len()).filter(|&i| left[i] > 0).collect();
            match players.len() {
                0 => return out,
                1 => out.push(format!("r{}", players[0] + 1)),
                _ => out.push(format!(
                    "done{}",
                    players
                        .iter()
                        .map(|p| (p + 1).to_string())
                        .collect::<String>()
                )),
            }
            for p in players {
                left[p] -= 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    ProbBound {
        relation: Relation,
        threshold: f64,
    },
    ProbOptimum(Optimum),
    RewardOptimum {
        optimum: Optimum,
        reward: RewardExpr,
    },
}

impl Query {
    pub fn is_probability(&self) -> bool {
        !matches!(self, Query::RewardOptimum { .. })
    }
}

/// `k_coef·k + Σ c_coefs[i]·c_i + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearExpr {
    pub k_coef: i64,
    pub c_coefs: Vec<i64>,
    pub constant: i64,
}

impl LinearExpr {
    pub fn zero(n: usize) -> Self {
        LinearExpr {
            k_coef: 0,
            c_coefs: vec![0; n],
            constant: 0,
        }
    }

    pub fn evaluate(&self, state: &GameState) -> i64 {
        let cs: i64 = self
            .c_coefs
            .iter()
            .zip(&state.c)
            .map(|(&a, &c)| a * i64::from(c))
            .sum();
        self.k_coef * i64::from(state.k) + cs + self.constant
    }

    pub(crate) fn add_scaled(&mut self, other: &LinearExpr, scale: i64) {
        self.k_coef += scale * other.k_coef;
        for (a, b) in self.c_coefs.iter_mut().zip(&other.c_coefs) {
            *a += scale * b;
        }
        self.constant += scale * other.constant;
    }
}

/// A normalized linear comparison `expr relation 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub expr: LinearExpr,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatePredicate {
    Compare(Comparison),
    Not(Box<StatePredicate>),
    And(Vec<StatePredicate>),
    Or(Vec<StatePredicate>),
}

impl StatePredicate {
    pub fn evaluate(&self, state: &GameState) -> bool {
        match self {
            StatePredicate::Compare(c) => c.relation.holds(c.expr.evaluate(state), 0),
            StatePredicate::Not(p) => !p.evaluate(state),
            StatePredicate::And(ps) => ps.iter().all(|p| p.evaluate(state)),
            StatePredicate::Or(ps) => ps.iter().any(|p| p.evaluate(state)),
        }
    }
}

/// Standard boolean and linear-arithmetic evaluation of `pred` at `state`.
pub fn evaluate_predicate(pred: &StatePredicate, state: &GameState) -> bool {
    pred.evaluate(state)
}

/// `F<=bound target`; the bound counts rounds played from the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFormula {
    pub target: StatePredicate,
    pub bound: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyAst {
    /// Player count the property was resolved against.
    pub players: usize,
    pub coalition: Coalition,
    pub query: Query,
    pub path: PathFormula,
}

// Printing. The output re-parses to an equal AST.

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<<")?;
        for (b, block) in self.blocks.iter().enumerate() {
            if b > 0 {
                f.write_str(":")?;
            }
            for (i, p) in block.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "p{}", p + 1)?;
            }
        }
        f.write_str(">>")
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[(i64, String)], constant: i64) -> fmt::Result {
    let mut first = true;
    for (coef, name) in terms {
        if !first {
            f.write_str("+")?;
        }
        first = false;
        if *coef == 1 {
            f.write_str(name)?;
        } else {
            write!(f, "{coef}*{name}")?;
        }
    }
    if constant != 0 || first {
        if !first {
            f.write_str("+")?;
        }
        write!(f, "{constant}")?;
    }
    Ok(())
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Positive terms on the left, negated negative terms on the right.
        let e = &self.expr;
        let mut named: Vec<(i64, String)> = Vec::new();
        if e.k_coef != 0 {
            named.push((e.k_coef, "k".to_string()));
        }
        for (i, &a) in e.c_coefs.iter().enumerate() {
            if a != 0 {
                named.push((a, format!("c{}", i + 1)));
            }
        }
        let lhs: Vec<_> = named.iter().filter(|t| t.0 > 0).cloned().collect();
        let rhs: Vec<_> = named
            .iter()
            .filter(|t| t.0 < 0)
            .map(|(a, n)| (-a, n.clone()))
            .collect();
        let (lc, rc) = if e.constant > 0 {
            (e.constant, 0)
        } else {
            (0, -e.constant)
        };
        write_terms(f, &lhs, lc)?;
        f.write_str(self.relation.symbol())?;
        write_terms(f, &rhs, rc)
    }
}

impl StatePredicate {
    // prec: 0 = top level, 1 = operand of `|`, 2 = operand of `&` or `!`
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let (own, sep, items) = match self {
            StatePredicate::Compare(c) => return write!(f, "{c}"),
            StatePredicate::Not(p) => {
                return match p.as_ref() {
                    StatePredicate::Compare(c) => write!(f, "!({c})"),
                    other => {
                        f.write_str("!")?;
                        other.fmt_prec(f, 2)
                    }
                };
            }
            StatePredicate::Or(ps) => (0, " | ", ps),
            StatePredicate::And(ps) => (1, " & ", ps),
        };
        let paren = prec > own;
        if paren {
            f.write_str("(")?;
        }
        for (i, p) in items.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            p.fmt_prec(f, own + 1)?;
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for StatePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Some(b) => write!(f, "F<={b} {}", self.target),
            None => write!(f, "F {}", self.target),
        }
    }
}

fn optimum(o: Optimum) -> &'static str {
    match o {
        Optimum::Max => "max",
        Optimum::Min => "min",
    }
}

impl fmt::Display for PropertyAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.coalition)?;
        match &self.query {
            Query::ProbBound {
                relation,
                threshold,
            } => {
                write!(f, "P{}{} [ {} ]", relation.symbol(), threshold, self.path)
            }
            Query::ProbOptimum(o) => write!(f, "P{}=? [ {} ]", optimum(*o), self.path),
            Query::RewardOptimum { optimum: o, reward } => {
                let labels = reward.labels();
                if let [label] = &labels[..] {
                    write!(f, "R{{\"{label}\"}}{}=? [ {} ]", optimum(*o), self.path)
                } else {
                    write!(f, "{}=? (", optimum(*o))?;
                    for (i, label) in labels.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" + ")?;
                        }
                        write!(f, "R{{\"{label}\"}}[ {} ]", self.path)?;
                    }
                    f.write_str(")")
                }
            }
        }
    }
}
