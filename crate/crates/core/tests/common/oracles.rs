//! Reference implementations that share no code with the engine beyond the round dynamics.

#![allow(dead_code)]

use vdg_core::proplang::{Optimum, PropertyAst, Query};
use vdg_core::{apply_round, GameParams, GameState, JointAction};

/// Optimal cooperative value of `prop` by enumerating every joint-action sequence, with the
/// path target checked on first hit.
pub fn brute_force(params: &GameParams, prop: &PropertyAst) -> f64 {
    let maximize = match &prop.query {
        Query::ProbOptimum(o) | Query::RewardOptimum { optimum: o, .. } => *o == Optimum::Max,
        Query::ProbBound { relation, .. } => !matches!(
            relation,
            vdg_core::proplang::Relation::Le | vdg_core::proplang::Relation::Lt
        ),
    };
    let terminal = params.k_max + 1;
    let last = prop.path.bound.map_or(terminal, |b| (b + 1).min(terminal));
    let payoff = |s: &GameState| match &prop.query {
        Query::RewardOptimum { reward, .. } => reward
            .coefficients
            .iter()
            .zip(&s.c)
            .map(|(&w, &c)| w as f64 * (c as f64 - reward.baseline as f64))
            .sum(),
        _ => 1.0,
    };
    fn go(
        s: &GameState,
        params: &GameParams,
        prop: &PropertyAst,
        last: u32,
        maximize: bool,
        payoff: &dyn Fn(&GameState) -> f64,
    ) -> f64 {
        if s.k <= last && prop.path.target.evaluate(s) {
            return payoff(s);
        }
        if s.k >= last {
            return 0.0;
        }
        let mut best: Option<f64> = None;
        for a in JointAction::all(params.n, params.fractions.len()) {
            let o = apply_round(s, &a, params).unwrap();
            let v = go(
                &GameState::new(s.k + 1, o.next_resources),
                params,
                prop,
                last,
                maximize,
                payoff,
            );
            best = Some(match best {
                None => v,
                Some(b) if maximize => b.max(v),
                Some(b) => b.min(v),
            });
        }
        best.unwrap()
    }
    go(
        &params.initial_state(),
        params,
        prop,
        last,
        maximize,
        &payoff,
    )
}

/// Value of a zero-sum matrix game by enumerating equal-size support pairs and solving the
/// indifference equations on each.
pub fn support_enumeration(a: &[Vec<f64>]) -> Option<f64> {
    let (m, n) = (a.len(), a[0].len());
    let tol = 1e-9;
    let mut found: Option<f64> = None;
    for size in 1..=m.min(n) {
        for rows in subsets(m, size) {
            for cols in subsets(n, size) {
                // Row mix x over `rows` making every column in `cols` pay v.
                let Some((x, v)) = indifference(&rows, &cols, |i, j| a[i][j]) else {
                    continue;
                };
                let Some((y, w)) = indifference(&cols, &rows, |j, i| a[i][j]) else {
                    continue;
                };
                if (v - w).abs() > 1e-7 || x.iter().chain(&y).any(|&p| p < -tol) {
                    continue;
                }
                let row_ok = (0..n).all(|j| {
                    rows.iter().zip(&x).map(|(&i, &p)| p * a[i][j]).sum::<f64>() >= v - 1e-7
                });
                let col_ok = (0..m).all(|i| {
                    cols.iter().zip(&y).map(|(&j, &q)| q * a[i][j]).sum::<f64>() <= v + 1e-7
                });
                if row_ok && col_ok {
                    found.get_or_insert(v);
                }
            }
        }
    }
    found
}

/// Solves `Σ_{i∈own} x_i·g(i,j) = v` for all `j ∈ other` with `Σ x_i = 1`.
fn indifference(
    own: &[usize],
    other: &[usize],
    g: impl Fn(usize, usize) -> f64,
) -> Option<(Vec<f64>, f64)> {
    let s = own.len();
    // Unknowns: x_0..x_{s-1}, v.
    let mut mat = vec![vec![0.0; s + 2]; s + 1];
    for (r, &j) in other.iter().enumerate() {
        for (c, &i) in own.iter().enumerate() {
            mat[r][c] = g(i, j);
        }
        mat[r][s] = -1.0;
    }
    mat[s][..s].fill(1.0);
    mat[s][s + 1] = 1.0;
    let sol = gauss(mat)?;
    Some((sol[..s].to_vec(), sol[s]))
}

fn gauss(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}
