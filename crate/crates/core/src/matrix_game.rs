//! Zero-sum matrix games solved by linear programming.
//!
//! The row player maximizes. Payoffs are shifted to be strictly positive, after which the
//! column player's problem is `max 1ᵀy  s.t.  B y <= 1, y >= 0`, feasible at the origin, so
//! a single-phase dense simplex suffices. The row player's strategy comes from solving the
//! same LP for the transposed, negated game, and the two optima must agree.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
/// Allowed gap between the row and column LP optima.
pub const DUALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    /// Identifier of each row action (a proponent joint-action index in the engine).
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `payoff[i][j]` is what the row player receives.
    pub payoff: Vec<Vec<f64>>,
}

impl MatrixGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Self {
        let rows = (0..payoff.len()).collect();
        let cols = (0..payoff.first().map_or(0, Vec::len)).collect();
        MatrixGame { rows, cols, payoff }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.payoff.len(), self.payoff.first().map_or(0, Vec::len))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// Optimum of the row player's LP (its guaranteed payoff).
    pub row_lp_value: f64,
    /// Optimum of the column player's LP (the payoff it can hold the row player to).
    pub col_lp_value: f64,
}

pub fn solve_matrix_game(game: &MatrixGame) -> Result<GameSolution> {
    let (m, n) = game.shape();
    let fail = |msg: &str| Error::Numerical {
        rows: m,
        cols: n,
        msg: msg.to_string(),
    };
    if m == 0 || n == 0 || game.payoff.iter().any(|r| r.len() != n) {
        return Err(fail("matrix must be non-empty and rectangular"));
    }
    if game.payoff.iter().flatten().any(|x| !x.is_finite()) {
        return Err(fail("payoffs must be finite"));
    }
    let (col_value, col_strategy) =
        column_lp(&game.payoff).ok_or_else(|| fail("simplex did not converge"))?;
    let transposed: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| -game.payoff[i][j]).collect())
        .collect();
    let (neg_row_value, row_strategy) =
        column_lp(&transposed).ok_or_else(|| fail("simplex did not converge"))?;
    let row_value = -neg_row_value;
    if (row_value - col_value).abs() > DUALITY_TOL * col_value.abs().max(1.0) {
        return Err(fail(&format!(
            "duality gap: row {row_value} vs column {col_value}"
        )));
    }
    Ok(GameSolution {
        value: col_value,
        row_strategy,
        col_strategy,
        row_lp_value: row_value,
        col_lp_value: col_value,
    })
}

/// Value of the game and the column player's optimal strategy.
fn column_lp(a: &[Vec<f64>]) -> Option<(f64, Vec<f64>)> {
    let min = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let b: Vec<Vec<f64>> = a
        .iter()
        .map(|r| r.iter().map(|x| x + shift).collect())
        .collect();
    let y = simplex_max_sum(&b)?;
    let total: f64 = y.iter().sum();
    if total <= PIVOT_EPS {
        return None;
    }
    let mut strategy: Vec<f64> = y.iter().map(|v| (v / total).max(0.0)).collect();
    let s: f64 = strategy.iter().sum();
    strategy.iter_mut().for_each(|v| *v /= s);
    Some((1.0 / total - shift, strategy))
}

/// Maximizes `Σ y` subject to `B y <= 1`, `y >= 0`, for `B` with positive entries, using a
/// dense tableau and Bland's rule.
fn simplex_max_sum(b: &[Vec<f64>]) -> Option<Vec<f64>> {
    let (m, n) = (b.len(), b[0].len());
    let width = n + m + 1;
    // Rows 0..m are constraints, row m is the objective (reduced costs, negated value in rhs).
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&b[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    t[m][..n].fill(1.0);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (m + n) + 1000;
    for _ in 0..max_iter {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] > PIVOT_EPS) else {
            let mut y = vec![0.0; n];
            for (i, &var) in basis.iter().enumerate() {
                if var < n {
                    y[var] = t[i][width - 1];
                }
            }
            return Some(y);
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - PIVOT_EPS
                            || ((ratio - best).abs() <= PIVOT_EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let r = leave?;
        let pivot = t[r][enter];
        t[r].iter_mut().for_each(|x| *x /= pivot);
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r {
                let factor = row[enter];
                if factor != 0.0 {
                    row.iter_mut()
                        .zip(&pivot_row)
                        .for_each(|(x, p)| *x -= factor * p);
                }
            }
        }
        basis[r] = enter;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(a: Vec<Vec<f64>>) -> GameSolution {
        solve_matrix_game(&MatrixGame::new(a)).unwrap()
    }

    #[test]
    fn one_by_one() {
        let s = solve(vec![vec![5.0]]);
        assert_eq!(s.value, 5.0);
        assert_eq!(s.row_strategy, vec![1.0]);
        assert_eq!(s.col_strategy, vec![1.0]);
    }

    #[test]
    fn matching_pennies() {
        let s = solve(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert!(s.value.abs() < 1e-9);
        for p in s.row_strategy.iter().chain(&s.col_strategy) {
            assert!((p - 0.5).abs() < 1e-9);
        }
        assert!((s.row_lp_value - s.col_lp_value).abs() < 1e-9);
    }

    #[test]
    fn rock_paper_scissors() {
        let s = solve(vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ]);
        assert!(s.value.abs() < 1e-9);
        for p in s.row_strategy.iter().chain(&s.col_strategy) {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dominated_row_gets_no_weight() {
        // Row 1 is strictly dominated; the rest is a 2x2 game with value 5/2.
        let s = solve(vec![vec![3.0, 1.0], vec![0.0, 0.0], vec![2.0, 4.0]]);
        assert!((s.value - 2.5).abs() < 1e-9, "{s:?}");
        assert!(s.row_strategy[1].abs() < 1e-12);
        assert!((s.row_strategy[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn saddle_point_is_pure() {
        let s = solve(vec![vec![4.0, 5.0], vec![2.0, 7.0]]);
        assert!((s.value - 4.0).abs() < 1e-9);
        assert!((s.row_strategy[0] - 1.0).abs() < 1e-9);
        assert!((s.col_strategy[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(solve_matrix_game(&MatrixGame::new(vec![])).is_err());
        assert!(solve_matrix_game(&MatrixGame::new(vec![vec![1.0], vec![1.0, 2.0]])).is_err());
        let err = solve_matrix_game(&MatrixGame::new(vec![vec![f64::NAN]])).unwrap_err();
        assert!(err.to_string().contains("1x1"), "{err}");
    }
}
