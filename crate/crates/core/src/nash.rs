//! Zero-sum matrix games.
//!
//! The row player maximises. After shifting the payoffs to be strictly
//! positive, the column player's program `max 1ᵀy s.t. My ≤ 1, y ≥ 0` is
//! solved with a dense tableau simplex under Bland's rule. The row player's
//! strategy is read off the reduced costs of the slack columns.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Pivot and optimality tolerance of the simplex.
const PIVOT_EPS: f64 = 1e-12;

/// Equilibrium of a matrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct NashSolution {
    /// Row mix; masked rows carry zero mass.
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    /// Game value for the row player.
    pub value: f64,
}

/// Row-major `rows × cols` payoffs with an optional row mask.
///
/// Masked rows stand for `-∞` entries and are excluded from the row
/// player's support. If every row is masked the game is solved on all rows.
pub fn solve_matrix_game(payoff: &[f64], rows: usize, cols: usize, masked: Option<&[bool]>) -> Result<NashSolution> {
    if rows == 0 || cols == 0 || payoff.len() != rows * cols {
        return Err(Error::InvalidInput("payoff matrix has inconsistent dimensions".into()));
    }
    if payoff.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("payoff entries must be finite; mask rows instead".into()));
    }
    if masked.is_some_and(|m| m.len() != rows) {
        return Err(Error::InvalidInput("row mask has the wrong length".into()));
    }
    let mut active: Vec<usize> = (0..rows).filter(|&i| !masked.is_some_and(|m| m[i])).collect();
    if active.is_empty() {
        active = (0..rows).collect();
    }
    let sub: Vec<f64> = active.iter().flat_map(|&i| payoff[i * cols..(i + 1) * cols].iter().copied()).collect();
    let (sub_row, col, value) = solve_active(&sub, active.len(), cols);
    let mut row = vec![0.0; rows];
    for (&i, p) in active.iter().zip(sub_row) {
        row[i] = p;
    }
    Ok(NashSolution { row, col, value })
}

fn solve_active(payoff: &[f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let lo = payoff.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = payoff.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= PIVOT_EPS * (1.0 + hi.abs()) {
        // constant game
        return (vec![1.0 / m as f64; m], vec![1.0 / n as f64; n], lo);
    }
    // shifted entries lie in [1, 1 + hi - lo]
    let shift = 1.0 - lo;
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            t[i * width + j] = payoff[i * n + j] + shift;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = 1.0;
    }
    let obj = m * width;
    for j in 0..n {
        t[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| t[obj + j] < -PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        // bounded: every column has a positive entry
        let r = leave.expect("positive payoffs keep the program bounded");
        let pivot = t[r * width + enter];
        for x in &mut t[r * width..(r + 1) * width] {
            *x /= pivot;
        }
        for i in 0..=m {
            if i == r {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= f * t[r * width + j];
                }
            }
        }
        basis[r] = enter;
    }

    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i * width + width - 1].max(0.0);
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[obj + n + i].max(0.0)).collect();
    let total_y: f64 = y.iter().sum();
    let total_x: f64 = x.iter().sum();
    let col: Vec<f64> = y.iter().map(|v| v / total_y).collect();
    let row: Vec<f64> = x.iter().map(|v| v / total_x).collect();
    (row, col, 1.0 / total_y - shift)
}

/// `μᵀ M υ`.
pub fn expected_payoff(payoff: &[f64], row: &[f64], col: &[f64]) -> f64 {
    let cols = col.len();
    row.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| p * payoff[i * cols..(i + 1) * cols].iter().zip(col).map(|(m, q)| m * q).sum::<f64>())
        .sum()
}

/// Largest gain either player can get from a pure deviation, with the row
/// player restricted to unmasked rows.
pub fn best_response_gap(payoff: &[f64], masked: Option<&[bool]>, sol: &NashSolution) -> f64 {
    let (rows, cols) = (sol.row.len(), sol.col.len());
    let value = expected_payoff(payoff, &sol.row, &sol.col);
    let any_open = masked.is_none_or(|m| m.iter().any(|x| !x));
    let row_best = (0..rows)
        .filter(|&i| !any_open || !masked.is_some_and(|m| m[i]))
        .map(|i| payoff[i * cols..(i + 1) * cols].iter().zip(&sol.col).map(|(m, q)| m * q).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let col_best = (0..cols)
        .map(|j| (0..rows).map(|i| sol.row[i] * payoff[i * cols + j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (row_best - value).max(value - col_best)
}
