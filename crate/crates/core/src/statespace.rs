//! Explicit enumeration of the finite-horizon game as a round-leveled DAG.
//!
//! State IDs are canonical: level by level (ascending `k`), and within a level sorted by the
//! resource vector. Non-terminal states therefore occupy a prefix of the ID range and every
//! non-terminal state owns exactly `|fractions|^n` transitions, stored flat in joint-action
//! index order.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{play, GameParams, GameState, JointAction, RoundOutcome};

pub type StateId = usize;

pub const DEFAULT_STATE_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Refuse to build when the projected number of states exceeds this.
    pub state_cap: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub dst: StateId,
    pub per_agent_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    params: GameParams,
    states: Vec<GameState>,
    /// `level_start[k - 1]` is the first ID of round `k`; the last entry is `states.len()`.
    level_start: Vec<StateId>,
    transitions: Vec<Transition>,
}

impl TransitionModel {
    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn states(&self) -> &[GameState] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &GameState {
        &self.states[id]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn joint_actions(&self) -> usize {
        self.params.joint_action_count()
    }

    /// IDs of the states at round `k` (1-based).
    pub fn level(&self, k: u32) -> Range<StateId> {
        let i = (k - 1) as usize;
        self.level_start[i]..self.level_start[i + 1]
    }

    pub fn level_count(&self) -> usize {
        self.level_start.len() - 1
    }

    pub fn terminal_ids(&self) -> Range<StateId> {
        self.level(self.params.terminal_round())
    }

    pub fn is_terminal(&self, id: StateId) -> bool {
        id >= self.level_start[self.level_start.len() - 2]
    }

    /// Outgoing transitions of `id` in joint-action index order; empty for terminal states.
    pub fn transitions_from(&self, id: StateId) -> &[Transition] {
        if self.is_terminal(id) {
            return &[];
        }
        let a = self.joint_actions();
        &self.transitions[id * a..(id + 1) * a]
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn successor(&self, id: StateId, action: &JointAction) -> Option<StateId> {
        self.transitions_from(id)
            .get(action.index(self.params.action_count()))
            .map(|t| t.dst)
    }

    /// Recomputes the full round outcome for a stored transition.
    pub fn outcome(&self, id: StateId, action: &JointAction) -> Result<RoundOutcome> {
        crate::game::apply_round(&self.states[id], action, &self.params)
    }

    pub fn id_of(&self, state: &GameState) -> Option<StateId> {
        if state.k == 0 || state.k as usize >= self.level_start.len() {
            return None;
        }
        let range = self.level(state.k);
        self.states[range.clone()]
            .binary_search_by(|s| s.c.cmp(&state.c))
            .ok()
            .map(|i| range.start + i)
    }
}

/// Enumerates every state reachable from the initial state through round `k_max`.
pub fn build_model(params: &GameParams, options: BuildOptions) -> Result<TransitionModel> {
    params.validate()?;
    let actions = params.joint_action_count();
    let joint: Vec<JointAction> = JointAction::all(params.n, params.action_count()).collect();

    let mut states = vec![params.initial_state()];
    let mut level_start = vec![0, 1];
    let mut transitions: Vec<Transition> = Vec::new();

    for k in 1..=params.k_max {
        let frontier = level_start[k as usize - 1]..level_start[k as usize];
        let projected = projected_size(params, states.len() as u64, frontier.len() as u64, k);
        if projected > options.state_cap {
            return Err(Error::CapExceeded {
                projected,
                round: k + 1,
                cap: options.state_cap,
            });
        }
        let outcomes: Vec<Vec<(Vec<u32>, f64)>> = states[frontier.clone()]
            .par_iter()
            .map(|s| {
                joint
                    .iter()
                    .map(|a| {
                        let o = play(&s.c, a, params);
                        (o.next_resources, o.per_agent_reward)
                    })
                    .collect()
            })
            .collect();
        let next: BTreeSet<&Vec<u32>> = outcomes.iter().flatten().map(|(c, _)| c).collect();
        let next: Vec<Vec<u32>> = next.into_iter().cloned().collect();
        let base = states.len();
        transitions.reserve(frontier.len() * actions);
        for row in &outcomes {
            for (c, reward) in row {
                let offset = next.binary_search(c).expect("successor collected above");
                transitions.push(Transition {
                    dst: base + offset,
                    per_agent_reward: *reward,
                });
            }
        }
        states.extend(next.into_iter().map(|c| GameState::new(k + 1, c)));
        level_start.push(states.len());
    }

    Ok(TransitionModel {
        params: params.clone(),
        states,
        level_start,
        transitions,
    })
}

/// Worst-case model size when expanding round `k` with `frontier` states: every remaining
/// level may multiply by the joint-action count, bounded by the number of resource vectors.
fn projected_size(params: &GameParams, built: u64, frontier: u64, k: u32) -> u64 {
    let actions = params.joint_action_count() as u64;
    let vectors = u64::from(params.r_max + 1).saturating_pow(params.n as u32);
    let mut total = built;
    let mut width = frontier;
    for _ in k..=params.k_max {
        width = width.saturating_mul(actions).min(vectors);
        total = total.saturating_add(width);
    }
    total
}

/// Per-round state counts and an exponential fit of their growth.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    /// Number of states at each round `k = 1..=k_max+1`.
    pub per_round_state_counts: Vec<u64>,
    pub cumulative_count: u64,
    /// Least-squares slope of `ln(count)` against `k`; `None` when `k_max < 2`.
    pub fitted_log_slope: Option<f64>,
    pub fitted_log_intercept: Option<f64>,
    /// Same fit over the cumulative counts `Σ_{j<=k} count_j`, i.e. model size by horizon.
    pub cumulative_log_slope: Option<f64>,
}

pub fn level_stats(model: &TransitionModel) -> LevelStats {
    let counts: Vec<u64> = (1..=model.level_count() as u32)
        .map(|k| model.level(k).len() as u64)
        .collect();
    let cumulative: Vec<u64> = counts
        .iter()
        .scan(0u64, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    let fit = if model.params().k_max >= 2 {
        log_linear_fit(&counts)
    } else {
        None
    };
    let cum_fit = if model.params().k_max >= 2 {
        log_linear_fit(&cumulative)
    } else {
        None
    };
    LevelStats {
        cumulative_count: counts.iter().sum(),
        per_round_state_counts: counts,
        fitted_log_slope: fit.map(|f| f.0),
        fitted_log_intercept: fit.map(|f| f.1),
        cumulative_log_slope: cum_fit.map(|f| f.0),
    }
}

/// Ordinary least squares of `ln(y_k)` on `k = 1, 2, ...`; returns `(slope, intercept)`.
pub fn log_linear_fit(ys: &[u64]) -> Option<(f64, f64)> {
    if ys.len() < 2 || ys.contains(&0) {
        return None;
    }
    let m = ys.len() as f64;
    let xs: Vec<f64> = (1..=ys.len()).map(|k| k as f64).collect();
    let ls: Vec<f64> = ys.iter().map(|&y| (y as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ls.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

const FORMAT_HEADER: &str = "vdgmodel 1";

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Writes the line-based model format.
pub fn export_model<W: Write>(model: &TransitionModel, mut out: W) -> Result<()> {
    let p = &model.params;
    writeln!(out, "{FORMAT_HEADER}")?;
    writeln!(
        out,
        "params n={} kmax={} rinit={} rneeded={} rmax={} f={} slope={} fractions={}",
        p.n,
        p.k_max,
        p.r_init,
        p.r_needed,
        p.r_max,
        p.f,
        p.decay_slope,
        join(&p.fractions)
    )?;
    writeln!(out, "states {}", model.states.len())?;
    for (id, s) in model.states.iter().enumerate() {
        writeln!(out, "{id} {} {}", s.k, join(&s.c))?;
    }
    writeln!(out, "transitions {}", model.transitions.len())?;
    let actions = model.joint_actions();
    for (i, t) in model.transitions.iter().enumerate() {
        let (src, a) = (i / actions, i % actions);
        let ja = JointAction::from_index(a, p.n, p.action_count());
        writeln!(
            out,
            "{src} {} {} {}",
            join(&ja.choice),
            t.dst,
            t.per_agent_reward
        )?;
    }
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self, what: &str) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err(format!("unexpected end of input, expected {what}"))),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: &str, what: &str) -> Result<T> {
        tok.parse()
            .map_err(|_| self.err(format!("invalid {what} `{tok}`")))
    }

    fn list<T: std::str::FromStr>(&self, tok: &str, what: &str) -> Result<Vec<T>> {
        tok.split(',').map(|t| self.num(t, what)).collect()
    }

    fn counted(&mut self, keyword: &str) -> Result<usize> {
        let l = self.next_line(keyword)?;
        match l.split_whitespace().collect::<Vec<_>>()[..] {
            [kw, count] if kw == keyword => self.num(count, "count"),
            _ => Err(self.err(format!("expected `{keyword} <count>`"))),
        }
    }
}

fn parse_params<R: BufRead>(lines: &mut Lines<R>) -> Result<GameParams> {
    let l = lines.next_line("params line")?;
    let mut toks = l.split_whitespace();
    if toks.next() != Some("params") {
        return Err(lines.err("expected `params` line"));
    }
    let mut p = GameParams::default();
    let mut seen = Vec::new();
    for tok in toks {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| lines.err(format!("malformed field `{tok}`")))?;
        match key {
            "n" => p.n = lines.num(value, "n")?,
            "kmax" => p.k_max = lines.num(value, "kmax")?,
            "rinit" => p.r_init = lines.num(value, "rinit")?,
            "rneeded" => p.r_needed = lines.num(value, "rneeded")?,
            "rmax" => p.r_max = lines.num(value, "rmax")?,
            "f" => p.f = lines.num(value, "f")?,
            "slope" => p.decay_slope = lines.num(value, "slope")?,
            "fractions" => p.fractions = lines.list(value, "fraction")?,
            other => return Err(lines.err(format!("unknown parameter `{other}`"))),
        }
        seen.push(key);
    }
    for key in [
        "n",
        "kmax",
        "rinit",
        "rneeded",
        "rmax",
        "f",
        "slope",
        "fractions",
    ] {
        if !seen.contains(&key) {
            return Err(lines.err(format!("missing parameter `{key}`")));
        }
    }
    p.validate().map_err(|e| lines.err(e.to_string()))?;
    Ok(p)
}

/// Reads a model written by [`export_model`] and re-validates every structural invariant,
/// including that each stored successor agrees with the round dynamics.
pub fn import_model<R: BufRead>(source: R) -> Result<TransitionModel> {
    let mut lines = Lines {
        inner: source.lines(),
        line: 0,
    };
    if lines.next_line("header")?.trim() != FORMAT_HEADER {
        return Err(lines.err(format!("expected `{FORMAT_HEADER}`")));
    }
    let params = parse_params(&mut lines)?;
    let n_states = lines.counted("states")?;
    let mut states = Vec::with_capacity(n_states);
    for expected in 0..n_states {
        let l = lines.next_line("state line")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [id, k, c] = toks[..] else {
            return Err(lines.err("expected `<id> <k> <c1>,...,<cn>`"));
        };
        let id: usize = lines.num(id, "state id")?;
        if id != expected {
            return Err(lines.err(format!("state id {id} out of order, expected {expected}")));
        }
        let k: u32 = lines.num(k, "round")?;
        let c: Vec<u32> = lines.list(c, "resource")?;
        states.push(GameState::new(k, c));
    }
    let n_trans = lines.counted("transitions")?;
    let actions = params.joint_action_count();
    let mut transitions = Vec::with_capacity(n_trans);
    for i in 0..n_trans {
        let l = lines.next_line("transition line")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [src, action, dst, reward] = toks[..] else {
            return Err(lines.err("expected `<src> <actions> <dst> <reward>`"));
        };
        let src: usize = lines.num(src, "source id")?;
        let choice: Vec<usize> = lines.list(action, "action index")?;
        let dst: usize = lines.num(dst, "target id")?;
        let reward: f64 = lines.num(reward, "reward")?;
        let ja = JointAction::new(choice);
        ja.validate(&params).map_err(|e| lines.err(e.to_string()))?;
        if (src, ja.index(params.action_count())) != (i / actions, i % actions) {
            return Err(lines.err(format!(
                "transitions must be sorted by (source, action); found source {src}"
            )));
        }
        transitions.push(Transition {
            dst,
            per_agent_reward: reward,
        });
    }
    if lines.inner.next().is_some() {
        return Err(Error::Format {
            line: lines.line + 1,
            msg: "trailing content".into(),
        });
    }
    let level_start = validate_layout(&params, &states)?;
    let model = TransitionModel {
        params,
        states,
        level_start,
        transitions,
    };
    validate_transitions(&model)?;
    Ok(model)
}

fn validate_layout(params: &GameParams, states: &[GameState]) -> Result<Vec<StateId>> {
    let inv = |id: usize, msg: String| Err(Error::Invariant { id, msg });
    if states.first() != Some(&params.initial_state()) {
        return inv(0, "state 0 must be the initial state".into());
    }
    let mut level_start = vec![0];
    for (id, s) in states.iter().enumerate() {
        if s.c.len() != params.n {
            return inv(
                id,
                format!("expected {} resources, got {}", params.n, s.c.len()),
            );
        }
        if s.k == 0 || s.k > params.terminal_round() {
            return inv(
                id,
                format!("round {} outside 1..={}", s.k, params.terminal_round()),
            );
        }
        if let Some(&c) = s.c.iter().find(|&&c| c > params.r_max) {
            return inv(id, format!("resource {c} exceeds r_max"));
        }
        if id > 0 {
            let prev = &states[id - 1];
            if s.k == prev.k + 1 {
                level_start.push(id);
            } else if s.k != prev.k || s.c <= prev.c {
                return inv(id, "states not in canonical (k, c) order".into());
            }
        }
    }
    level_start.push(states.len());
    if level_start.len() != params.terminal_round() as usize + 1 {
        return inv(
            states.len().saturating_sub(1),
            "missing rounds in state table".into(),
        );
    }
    Ok(level_start)
}

fn validate_transitions(model: &TransitionModel) -> Result<()> {
    let actions = model.joint_actions();
    let non_terminal = model.terminal_ids().start;
    if model.transitions.len() != non_terminal * actions {
        return Err(Error::Invariant {
            id: non_terminal,
            msg: format!(
                "expected {} transitions ({} non-terminal states x {} joint actions), got {}",
                non_terminal * actions,
                non_terminal,
                actions,
                model.transitions.len()
            ),
        });
    }
    let mut reached = vec![false; model.len()];
    reached[0] = true;
    for (i, t) in model.transitions.iter().enumerate() {
        let src = i / actions;
        let err = |msg: String| Err(Error::Invariant { id: src, msg });
        if t.dst >= model.len() {
            return err(format!("dangling successor id {}", t.dst));
        }
        let ja = JointAction::from_index(i % actions, model.params.n, model.params.action_count());
        let o = play(&model.states[src].c, &ja, &model.params);
        let dst = &model.states[t.dst];
        if dst.k != model.states[src].k + 1 || dst.c != o.next_resources {
            return err(format!(
                "successor {} under {:?} disagrees with dynamics",
                t.dst, ja.choice
            ));
        }
        if (t.per_agent_reward - o.per_agent_reward).abs() > 1e-9 {
            return err(format!(
                "stored reward {} disagrees with dynamics",
                t.per_agent_reward
            ));
        }
        reached[t.dst] = true;
    }
    if let Some(id) = reached.iter().position(|r| !r) {
        return Err(Error::Invariant {
            id,
            msg: "state is unreachable".into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GameParams {
        GameParams {
            k_max: 1,
            fractions: vec![0.0],
            ..Default::default()
        }
    }

    fn export_string(m: &TransitionModel) -> String {
        let mut buf = Vec::new();
        export_model(m, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn tiny_model_has_two_states() {
        let m = build_model(&tiny(), BuildOptions::default()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.transition_count(), 1);
        assert_eq!(m.state(1), &GameState::new(2, vec![100, 100, 100]));
        let stats = level_stats(&m);
        assert_eq!(stats.per_round_state_counts, vec![1, 1]);
        assert_eq!(stats.fitted_log_slope, None);
        assert_eq!(stats.cumulative_count, 2);
    }

    #[test]
    fn one_round_default_model() {
        let p = GameParams {
            k_max: 1,
            ..Default::default()
        };
        let m = build_model(&p, BuildOptions::default()).unwrap();
        assert_eq!(m.transitions_from(0).len(), 27);
        let distinct: BTreeSet<_> = m.transitions_from(0).iter().map(|t| t.dst).collect();
        assert_eq!(m.terminal_ids().len(), distinct.len());
        assert_eq!(m.len(), 1 + distinct.len());
        let dst = m.successor(0, &JointAction::new(vec![2, 2, 0])).unwrap();
        assert_eq!(m.state(dst).c, vec![133, 133, 233]);
        assert_eq!(m.id_of(&GameState::new(2, vec![133, 133, 233])), Some(dst));
        assert_eq!(m.id_of(&GameState::new(2, vec![1, 2, 3])), None);
    }

    #[test]
    fn export_layout() {
        let m = build_model(&tiny(), BuildOptions::default()).unwrap();
        let text = export_string(&m);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "vdgmodel 1");
        assert_eq!(
            lines[1],
            "params n=3 kmax=1 rinit=100 rneeded=200 rmax=1000 f=2 slope=-0.014 fractions=0"
        );
        assert_eq!(lines[2], "states 2");
        assert_eq!(lines[3], "0 1 100,100,100");
        assert_eq!(lines[4], "1 2 100,100,100");
        assert_eq!(lines[5], "transitions 1");
        assert_eq!(lines[6], "0 0,0,0 1 0");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn round_trip() {
        let p = GameParams {
            k_max: 2,
            ..Default::default()
        };
        let m = build_model(&p, BuildOptions::default()).unwrap();
        let text = export_string(&m);
        let back = import_model(text.as_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(export_string(&back), text);
    }

    #[test]
    fn truncated_transition_line_reports_line() {
        let m = build_model(&tiny(), BuildOptions::default()).unwrap();
        let text = export_string(&m).replace("0 0,0,0 1 0", "0 0,0,0");
        match import_model(text.as_bytes()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected format error, got {other:?}"),
        }
        let cut: String = export_string(&m)
            .lines()
            .take(6)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            import_model(cut.as_bytes()),
            Err(Error::Format { line: 7, .. })
        ));
    }

    #[test]
    fn dangling_successor_is_rejected() {
        let m = build_model(&tiny(), BuildOptions::default()).unwrap();
        let text = export_string(&m).replace("0 0,0,0 1 0", "0 0,0,0 9 0");
        match import_model(text.as_bytes()) {
            Err(Error::Invariant { id, msg }) => {
                assert_eq!(id, 0);
                assert!(msg.contains('9'), "{msg}");
            }
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn cap_is_enforced() {
        let p = GameParams {
            k_max: 2,
            ..Default::default()
        };
        let err = build_model(&p, BuildOptions { state_cap: 100 }).unwrap_err();
        assert!(
            matches!(
                err,
                Error::CapExceeded {
                    round: 2,
                    projected: 757,
                    ..
                }
            ),
            "{err}"
        );
        let p = GameParams {
            k_max: 6,
            ..Default::default()
        };
        let err = build_model(&p, BuildOptions::default()).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }), "{err}");
        let p = GameParams {
            k_max: 4,
            ..Default::default()
        };
        assert!(build_model(&p, BuildOptions::default()).is_ok());
    }

    #[test]
    fn log_fit_recovers_exponential() {
        let ys: Vec<u64> = (1..=5)
            .map(|k| (2.0 * (1.5f64 * k as f64).exp()).round() as u64)
            .collect();
        let (slope, icpt) = log_linear_fit(&ys).unwrap();
        assert!((slope - 1.5).abs() < 1e-3);
        assert!((icpt - 2f64.ln()).abs() < 1e-2);
    }
}
