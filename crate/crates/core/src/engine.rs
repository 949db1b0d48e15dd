//! Backward induction over the round-leveled model.
//!
//! Values are computed level by level from the terminal round down to the initial state. A
//! state satisfying the (step-bounded) target is fixed at 1, or at its reward, and stops
//! accumulating; an unsatisfied terminal state is worth 0. Elsewhere the value is the best
//! successor value when one coalition controls every player, or the value of the zero-sum
//! matrix game between proponents and opponents otherwise.
//!
//! Step bounds are anchored at the initial state: `F<=b` admits target states at rounds
//! `k <= b + 1`. Since `k` is part of the state this keeps every state's value well defined.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{GameParams, GameState, JointAction};
use crate::matrix_game::{solve_matrix_game, GameSolution, MatrixGame};
use crate::proplang::{Optimum, PropertyAst, Query, Relation, RewardExpr, StatePredicate};
use crate::statespace::{StateId, TransitionModel};

/// Values within this distance of 0 or 1 count as exactly 0 or 1.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Probability,
    Reward,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Probability => "probability",
            ValueKind::Reward => "reward",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationTable {
    /// Indexed by state ID.
    pub values: Vec<f64>,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    /// Value at the initial state.
    pub value: f64,
    /// Outcome of a `P~t` query; `None` for `=?` queries.
    pub verdict: Option<bool>,
    pub valuation: ValuationTable,
    pub warnings: Vec<String>,
}

/// A property compiled against one model: who chooses, in which direction, and what a
/// satisfied target is worth.
#[derive(Debug, Clone)]
pub(crate) struct Objective<'a> {
    pub target: &'a StatePredicate,
    /// Last round at which the target may be satisfied.
    pub last_round: u32,
    pub reward: Option<&'a RewardExpr>,
    pub sense: Optimum,
    pub proponents: Vec<usize>,
    pub opponents: Vec<usize>,
}

/// The local decision at one state.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LocalChoice {
    /// The value is fixed because the target holds (or the state is a dead terminal).
    Settled,
    /// Single coalition: the chosen joint-action index.
    Pure(usize),
    /// Two coalitions: the matrix game and its solution.
    Mixed {
        game: MatrixGame,
        solution: GameSolution,
    },
}

impl<'a> Objective<'a> {
    pub fn new(params: &GameParams, prop: &'a PropertyAst) -> Result<(Self, Vec<String>)> {
        if prop.players != params.n {
            return Err(Error::Mismatch(format!(
                "property was parsed for {} players, model has {}",
                prop.players, params.n
            )));
        }
        let mut warnings = Vec::new();
        let horizon = params.terminal_round();
        let last_round = match prop.path.bound {
            None => horizon,
            Some(b) if b > horizon => {
                warnings.push(format!(
                    "step bound {b} exceeds the horizon k_max+1 = {horizon}; clamped to {horizon}"
                ));
                horizon
            }
            Some(b) => (b + 1).min(horizon),
        };
        let (sense, reward) = match &prop.query {
            Query::ProbBound {
                relation: Relation::Le | Relation::Lt,
                ..
            } => (Optimum::Min, None),
            Query::ProbBound { .. } => (Optimum::Max, None),
            Query::ProbOptimum(o) => (*o, None),
            Query::RewardOptimum { optimum, reward } => {
                if reward.baseline != params.r_init || reward.coefficients.len() != params.n {
                    return Err(Error::Mismatch(format!(
                        "reward was resolved with r_init = {}, model has {}",
                        reward.baseline, params.r_init
                    )));
                }
                (*optimum, Some(reward))
            }
        };
        let mut proponents = prop.coalition.proponents().to_vec();
        proponents.sort_unstable();
        if proponents.iter().any(|&p| p >= params.n) {
            return Err(Error::Mismatch(
                "coalition names a player outside the model".into(),
            ));
        }
        let opponents = prop.coalition.opponents(params.n);
        Ok((
            Objective {
                target: &prop.path.target,
                last_round,
                reward,
                sense,
                proponents,
                opponents,
            },
            warnings,
        ))
    }

    pub fn kind(&self) -> ValueKind {
        if self.reward.is_some() {
            ValueKind::Reward
        } else {
            ValueKind::Probability
        }
    }

    pub fn is_cooperative(&self) -> bool {
        self.opponents.is_empty()
    }

    /// Value of a state whose outcome no longer depends on play, if any.
    pub fn settled_value(&self, state: &GameState, terminal: bool) -> Option<f64> {
        if state.k <= self.last_round && self.target.evaluate(state) {
            return Some(self.reward.map_or(1.0, |r| r.evaluate(state)));
        }
        if terminal || state.k >= self.last_round {
            return Some(0.0);
        }
        None
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self.sense {
            Optimum::Max => a > b,
            Optimum::Min => a < b,
        }
    }

    /// Best successor under the joint-action index order; ties keep the lowest index.
    pub fn best_action(
        &self,
        model: &TransitionModel,
        values: &[f64],
        id: StateId,
    ) -> (usize, f64) {
        let mut best = (0, f64::NAN);
        for (a, t) in model.transitions_from(id).iter().enumerate() {
            let v = values[t.dst];
            if best.1.is_nan() || self.better(v, best.1) {
                best = (a, v);
            }
        }
        best
    }

    /// Assembles the joint-action index for a proponent row and an opponent column.
    pub fn joint_index(&self, model: &TransitionModel, row: usize, col: usize) -> usize {
        let params = model.params();
        let m = params.action_count();
        let r = JointAction::from_index(row, self.proponents.len(), m);
        let c = JointAction::from_index(col, self.opponents.len(), m);
        let mut choice = vec![0; params.n];
        for (&p, &a) in self.proponents.iter().zip(&r.choice) {
            choice[p] = a;
        }
        for (&p, &a) in self.opponents.iter().zip(&c.choice) {
            choice[p] = a;
        }
        JointAction::new(choice).index(m)
    }

    /// The proponent's view of the concurrent choice at `id`, always as a maximization.
    pub fn matrix(&self, model: &TransitionModel, values: &[f64], id: StateId) -> MatrixGame {
        let m = model.params().action_count();
        let rows = m.pow(self.proponents.len() as u32);
        let cols = m.pow(self.opponents.len() as u32);
        let transitions = model.transitions_from(id);
        let sign = self.sign();
        let payoff = (0..rows)
            .map(|i| {
                (0..cols)
                    .map(|j| sign * values[transitions[self.joint_index(model, i, j)].dst])
                    .collect()
            })
            .collect();
        MatrixGame {
            rows: (0..rows).collect(),
            cols: (0..cols).collect(),
            payoff,
        }
    }

    pub fn local_choice(
        &self,
        model: &TransitionModel,
        values: &[f64],
        id: StateId,
    ) -> Result<(LocalChoice, f64)> {
        let state = model.state(id);
        if let Some(v) = self.settled_value(state, model.is_terminal(id)) {
            return Ok((LocalChoice::Settled, v));
        }
        if self.is_cooperative() {
            let (a, v) = self.best_action(model, values, id);
            return Ok((LocalChoice::Pure(a), v));
        }
        let game = self.matrix(model, values, id);
        let solution = solve_matrix_game(&game)?;
        let sign = self.sign();
        let v = sign * solution.value;
        Ok((LocalChoice::Mixed { game, solution }, v))
    }

    fn state_value(&self, model: &TransitionModel, values: &[f64], id: StateId) -> Result<f64> {
        self.local_choice(model, values, id).map(|(_, v)| v)
    }

    /// +1 when the proponents maximize, -1 when they minimize.
    pub fn sign(&self) -> f64 {
        match self.sense {
            Optimum::Max => 1.0,
            Optimum::Min => -1.0,
        }
    }
}

/// Evaluates `prop` on every state of `model` by backward induction.
pub fn check(model: &TransitionModel, prop: &PropertyAst) -> Result<CheckResult> {
    let (objective, warnings) = Objective::new(model.params(), prop)?;
    let mut values = vec![0.0; model.len()];
    for k in (1..=model.params().terminal_round()).rev() {
        let level = model.level(k);
        let computed: Vec<f64> = level
            .clone()
            .into_par_iter()
            .map(|id| objective.state_value(model, &values, id))
            .collect::<Result<_>>()?;
        values[level].copy_from_slice(&computed);
    }
    let kind = objective.kind();
    let value = values[model.initial()];
    let verdict = match prop.query {
        Query::ProbBound {
            relation,
            threshold,
        } => Some(compare(value, relation, threshold)),
        _ => None,
    };
    Ok(CheckResult {
        value,
        verdict,
        valuation: ValuationTable { values, kind },
        warnings,
    })
}

/// Probability comparison with [`PROB_TOL`] slack toward satisfaction.
pub fn compare(value: f64, relation: Relation, threshold: f64) -> bool {
    match relation {
        Relation::Ge => value >= threshold - PROB_TOL,
        Relation::Gt => value > threshold + PROB_TOL,
        Relation::Le => value <= threshold + PROB_TOL,
        Relation::Lt => value < threshold - PROB_TOL,
        Relation::Eq => (value - threshold).abs() <= PROB_TOL,
    }
}

/// Recomputes every state's value from its successors and reports the first state whose
/// stored value is off by more than `tol`.
pub fn verify_bellman(
    model: &TransitionModel,
    prop: &PropertyAst,
    valuation: &ValuationTable,
    tol: f64,
) -> Result<Option<StateId>> {
    let (objective, _) = Objective::new(model.params(), prop)?;
    if valuation.values.len() != model.len() {
        return Err(Error::Mismatch("valuation size differs from model".into()));
    }
    for id in 0..model.len() {
        let v = objective.state_value(model, &valuation.values, id)?;
        if (v - valuation.values[id]).abs() > tol * v.abs().max(1.0) {
            return Ok(Some(id));
        }
    }
    Ok(None)
}

/// States partitioned by whether their optimal probability is 1, 0, or in between.
#[derive(Debug, Clone, PartialEq)]
pub struct QualClassification {
    pub yes: Vec<StateId>,
    pub no: Vec<StateId>,
    pub maybe: Vec<StateId>,
}

impl QualClassification {
    /// `|Y| / (|Y| + |N|)`, or `None` when both are empty.
    pub fn yes_ratio(&self) -> Option<f64> {
        let denom = self.yes.len() + self.no.len();
        (denom > 0).then(|| self.yes.len() as f64 / denom as f64)
    }
}

pub fn classify_states(model: &TransitionModel, prop: &PropertyAst) -> Result<QualClassification> {
    if !prop.query.is_probability() {
        return Err(Error::Unsupported(
            "yes/no/maybe classification needs a probability query".into(),
        ));
    }
    let result = check(model, prop)?;
    Ok(classify_values(&result.valuation.values))
}

pub fn classify_values(values: &[f64]) -> QualClassification {
    let mut c = QualClassification {
        yes: Vec::new(),
        no: Vec::new(),
        maybe: Vec::new(),
    };
    for (id, &v) in values.iter().enumerate() {
        if v >= 1.0 - PROB_TOL {
            c.yes.push(id);
        } else if v <= PROB_TOL {
            c.no.push(id);
        } else {
            c.maybe.push(id);
        }
    }
    c
}
