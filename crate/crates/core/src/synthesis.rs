//! Strategy extraction and DOT export.
//!
//! The strategy graph is the fragment of the model reachable from the initial state when the
//! proponents follow the optimal choice at every state. States whose value is already fixed
//! (target reached, or no time left) keep a single continuation edge through joint action 0
//! so the graph still ends at the terminal round.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use crate::engine::{LocalChoice, Objective, ValuationTable};
use crate::error::{Error, Result};
use crate::game::{apply_round, donation_amount, GameParams, GameState, JointAction};
use crate::proplang::PropertyAst;
use crate::statespace::{StateId, TransitionModel};

/// Row weights below this are treated as outside the support.
const SUPPORT_EPS: f64 = 1e-9;
/// Slack when deciding whether an opponent column is a best response.
const BEST_RESPONSE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyNode {
    pub state_id: StateId,
    pub state: GameState,
    /// Donation of each player at this node; `None` on terminal nodes, and on two-coalition
    /// nodes where branches disagree.
    pub donations: Vec<Option<u32>>,
    /// Proponent mixed strategy over its row actions, for two-coalition strategies.
    pub mixed: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyEdge {
    /// Node indices.
    pub src: usize,
    pub dst: usize,
    pub action: JointAction,
    /// Weight of the proponent row, for two-coalition strategies.
    pub probability: Option<f64>,
    /// Opponent column this branch answers with (two-coalition only).
    pub column: Option<usize>,
    pub per_agent_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGraph {
    pub params: GameParams,
    /// Breadth-first order; node 0 is the initial state.
    pub nodes: Vec<StrategyNode>,
    pub edges: Vec<StrategyEdge>,
    pub achieved_value: f64,
    pub cooperative: bool,
}

impl StrategyGraph {
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &StrategyEdge> {
        self.edges.iter().filter(move |e| e.src == node)
    }

    pub fn node_of(&self, state: &GameState) -> Option<usize> {
        self.nodes.iter().position(|n| &n.state == state)
    }
}

pub fn synthesize(
    model: &TransitionModel,
    prop: &PropertyAst,
    valuation: &ValuationTable,
) -> Result<StrategyGraph> {
    let (objective, _) = Objective::new(model.params(), prop)?;
    if valuation.values.len() != model.len() || valuation.kind != objective.kind() {
        return Err(Error::Mismatch(
            "valuation was not produced for this model and property".into(),
        ));
    }
    let params = model.params();
    let values = &valuation.values;
    let mut index_of: BTreeMap<StateId, usize> = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut queue = VecDeque::new();

    let mut visit = |id: StateId, nodes: &mut Vec<StrategyNode>, queue: &mut VecDeque<usize>| {
        *index_of.entry(id).or_insert_with(|| {
            nodes.push(StrategyNode {
                state_id: id,
                state: model.state(id).clone(),
                donations: vec![None; params.n],
                mixed: None,
            });
            queue.push_back(nodes.len() - 1);
            nodes.len() - 1
        })
    };
    visit(model.initial(), &mut nodes, &mut queue);

    while let Some(node) = queue.pop_front() {
        let id = nodes[node].state_id;
        if model.is_terminal(id) {
            continue;
        }
        let transitions = model.transitions_from(id);
        let m = params.action_count();
        let mut branches: Vec<(usize, Option<f64>, Option<usize>)> = Vec::new();
        match objective.local_choice(model, values, id)?.0 {
            LocalChoice::Settled => branches.push((0, None, None)),
            LocalChoice::Pure(a) => branches.push((a, None, None)),
            LocalChoice::Mixed { game, solution } => {
                let p = &solution.row_strategy;
                for j in 0..game.cols.len() {
                    let payoff: f64 = (0..game.rows.len()).map(|i| p[i] * game.payoff[i][j]).sum();
                    if payoff > solution.value + BEST_RESPONSE_TOL * solution.value.abs().max(1.0) {
                        continue;
                    }
                    for (i, &w) in p.iter().enumerate() {
                        if w > SUPPORT_EPS {
                            branches.push((objective.joint_index(model, i, j), Some(w), Some(j)));
                        }
                    }
                }
                nodes[node].mixed = Some(p.clone());
            }
        }

        let state = &nodes[node].state;
        let mut donations: Vec<Option<u32>> = Vec::new();
        for (b, &(a, _, _)) in branches.iter().enumerate() {
            let action = JointAction::from_index(a, params.n, m);
            for (i, &choice) in action.choice.iter().enumerate() {
                let d = donation_amount(state.c[i], params.fractions[choice]);
                if b == 0 {
                    donations.push(Some(d));
                } else if donations[i] != Some(d) {
                    donations[i] = None;
                }
            }
        }
        nodes[node].donations = donations;

        for (a, probability, column) in branches {
            let t = &transitions[a];
            let dst = visit(t.dst, &mut nodes, &mut queue);
            edges.push(StrategyEdge {
                src: node,
                dst,
                action: JointAction::from_index(a, params.n, m),
                probability,
                column,
                per_agent_reward: t.per_agent_reward,
            });
        }
    }

    let mut graph = StrategyGraph {
        params: params.clone(),
        nodes,
        edges,
        achieved_value: 0.0,
        cooperative: objective.is_cooperative(),
    };
    graph.achieved_value = graph_value(&graph, &objective, model)?;
    Ok(graph)
}

/// Value of the initial node computed on the graph alone: deterministic successors for
/// cooperative strategies, worst best-response branch for two-coalition ones.
fn graph_value(
    graph: &StrategyGraph,
    objective: &Objective,
    model: &TransitionModel,
) -> Result<f64> {
    let mut value = vec![0.0; graph.nodes.len()];
    // Successors always sit at a later round, so reverse breadth-first order is safe.
    for node in (0..graph.nodes.len()).rev() {
        let n = &graph.nodes[node];
        if let Some(v) = objective.settled_value(&n.state, model.is_terminal(n.state_id)) {
            value[node] = v;
            continue;
        }
        let mut by_column: BTreeMap<Option<usize>, f64> = BTreeMap::new();
        for e in graph.out_edges(node) {
            *by_column.entry(e.column).or_insert(0.0) +=
                e.probability.unwrap_or(1.0) * value[e.dst];
        }
        let sign = objective.sign();
        value[node] = by_column
            .values()
            .map(|v| sign * v)
            .fold(f64::INFINITY, f64::min)
            * sign;
        if !value[node].is_finite() {
            return Err(Error::Invariant {
                id: n.state_id,
                msg: format!("strategy node {node} has no outgoing edges"),
            });
        }
    }
    Ok(value[0])
}

/// Replays a deterministic strategy through the game dynamics, looking states up by content
/// rather than model IDs, and returns the value the property assigns to the resulting play.
pub fn replay_value(graph: &StrategyGraph, prop: &PropertyAst) -> Result<f64> {
    if !graph.cooperative {
        return Err(Error::Unsupported(
            "replay needs a deterministic (single-coalition) strategy".into(),
        ));
    }
    let params = &graph.params;
    let (objective, _) = Objective::new(params, prop)?;
    let mut state = params.initial_state();
    loop {
        let terminal = state.k == params.terminal_round();
        if let Some(v) = objective.settled_value(&state, terminal) {
            return Ok(v);
        }
        let node = graph.node_of(&state).ok_or_else(|| {
            Error::Mismatch(format!("state {state} is not in the strategy graph"))
        })?;
        let edge = graph
            .out_edges(node)
            .next()
            .ok_or_else(|| Error::Mismatch(format!("state {state} has no strategy edge")))?;
        let outcome = apply_round(&state, &edge.action, params)?;
        state = GameState::new(state.k + 1, outcome.next_resources);
    }
}

/// Writes the graph as a DOT digraph. Node labels read `[k, c1, s1, c2, s2, ...]`.
pub fn export_dot<W: Write>(graph: &StrategyGraph, mut out: W) -> Result<()> {
    writeln!(out, "digraph strategy {{")?;
    writeln!(out, "  node [shape=box];")?;
    for (i, node) in graph.nodes.iter().enumerate() {
        let mut label = format!("[{}", node.state.k);
        for (c, s) in node.state.c.iter().zip(&node.donations) {
            match s {
                Some(s) => label.push_str(&format!(", {c}, {s}")),
                None => label.push_str(&format!(", {c}, -")),
            }
        }
        label.push(']');
        if let Some(p) = &node.mixed {
            let weights: Vec<String> = p.iter().map(|w| format!("{w:.4}")).collect();
            label.push_str(&format!("\\nmix=({})", weights.join(",")));
        }
        writeln!(out, "  s{i} [label=\"{label}\"];")?;
    }
    for e in &graph.edges {
        let names: Vec<String> = e
            .action
            .choice
            .iter()
            .map(|&a| graph.params.action_name(a))
            .collect();
        let mut label = format!("{} | r={:.4}", names.join(","), e.per_agent_reward);
        if let Some(p) = e.probability {
            label.push_str(&format!(" p={p:.4}"));
        }
        writeln!(out, "  s{} -> s{} [label=\"{label}\"];", e.src, e.dst)?;
    }
    writeln!(out, "}}")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{check, ValueKind};
    use crate::proplang::parse_property;
    use crate::statespace::{build_model, BuildOptions};

    fn synth(params: &GameParams, text: &str) -> (StrategyGraph, f64, PropertyAst) {
        let model = build_model(params, BuildOptions::default()).unwrap();
        let prop = parse_property(text, params).unwrap();
        let r = check(&model, &prop).unwrap();
        (
            synthesize(&model, &prop, &r.valuation).unwrap(),
            r.value,
            prop,
        )
    }

    fn dot(g: &StrategyGraph) -> String {
        let mut buf = Vec::new();
        export_dot(g, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    const DONE: &str = "<<p1,p2,p3>> R{\"done123\"}max=? [ F k=kmax+1 ]";

    #[test]
    fn free_ride_only_is_a_chain() {
        let p = GameParams {
            fractions: vec![0.0],
            k_max: 3,
            ..Default::default()
        };
        let (g, v, prop) = synth(&p, DONE);
        assert_eq!(g.nodes.len(), 4);
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.achieved_value, 0.0);
        assert_eq!(v, 0.0);
        assert_eq!(replay_value(&g, &prop).unwrap(), 0.0);
    }

    #[test]
    fn single_round_matches_brute_force() {
        let p = GameParams {
            k_max: 1,
            ..Default::default()
        };
        let (g, v, _) = synth(&p, DONE);
        assert_eq!((g.nodes.len(), g.edges.len()), (2, 1));
        let best = JointAction::all(3, 3)
            .map(|a| {
                let o = apply_round(&p.initial_state(), &a, &p).unwrap();
                o.next_resources
                    .iter()
                    .map(|&c| c as f64 - 100.0)
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(v, best);
        assert_eq!(g.achieved_value, best);
        let text = dot(&g);
        let init = text.lines().find(|l| l.starts_with("  s0 ")).unwrap();
        let d = &g.nodes[0].donations;
        assert!(init.contains(&format!(
            "[1, 100, {}, 100, {}, 100, {}]",
            d[0].unwrap(),
            d[1].unwrap(),
            d[2].unwrap()
        )));
        assert!(text.contains("[2, "));
        assert!(text.contains(", -]"));
    }

    #[test]
    fn two_rounds_replay() {
        let p = GameParams {
            k_max: 2,
            ..Default::default()
        };
        let (g, v, prop) = synth(&p, DONE);
        assert_eq!((g.nodes.len(), g.edges.len()), (3, 2));
        assert_eq!(g.achieved_value, v);
        assert_eq!(replay_value(&g, &prop).unwrap(), v);
        assert_eq!(dot(&g), dot(&synth(&p, DONE).0));
    }

    #[test]
    fn early_target_keeps_going() {
        let p = GameParams {
            k_max: 3,
            ..Default::default()
        };
        let (g, v, prop) = synth(&p, "<<p1,p2,p3>> Pmax=? [ F c1<c2 ]");
        assert_eq!(v, 1.0);
        assert_eq!(g.achieved_value, 1.0);
        assert_eq!(replay_value(&g, &prop).unwrap(), 1.0);
        assert!(g.nodes.iter().any(|n| n.state.k == 4));
        for node in 0..g.nodes.len() {
            let out = g.out_edges(node).count();
            assert_eq!(out, usize::from(g.nodes[node].state.k < 4));
        }
    }

    #[test]
    fn two_coalition_graph() {
        let p = GameParams {
            k_max: 2,
            ..Default::default()
        };
        let (g, v, prop) = synth(&p, "<<p1:p2,p3>> R{\"r1\"}max=? [ F k=kmax+1 ]");
        assert!(!g.cooperative);
        assert!((g.achieved_value - v).abs() < 1e-9);
        assert!(g.nodes[0].mixed.is_some());
        for (i, n) in g.nodes.iter().enumerate() {
            if n.state.k < 3 {
                let total: f64 = n.mixed.as_ref().unwrap().iter().sum();
                assert!((total - 1.0).abs() < 1e-9);
                assert!(g.out_edges(i).count() >= 1);
            }
        }
        assert!(matches!(
            replay_value(&g, &prop),
            Err(Error::Unsupported(_))
        ));
        assert!(dot(&g).contains(" p="));
    }

    #[test]
    fn mismatched_valuation() {
        let p = GameParams {
            k_max: 1,
            ..Default::default()
        };
        let model = build_model(&p, BuildOptions::default()).unwrap();
        let prop = parse_property(DONE, &p).unwrap();
        let bad = ValuationTable {
            values: vec![0.0; 3],
            kind: ValueKind::Reward,
        };
        assert!(matches!(
            synthesize(&model, &prop, &bad),
            Err(Error::Mismatch(_))
        ));
    }
}
