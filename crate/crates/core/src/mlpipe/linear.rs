//! Linear models over sparse rows, trained with L-BFGS.

use std::collections::VecDeque;

use super::features::FeatureMatrix;

const HISTORY: usize = 10;

/// Minimizes a smooth function. `objective` writes the gradient into its
/// second argument and returns the value. Stops when the largest gradient
/// component drops to `tol`.
pub(crate) fn lbfgs<F>(mut objective: F, x0: Vec<f64>, tol: f64, max_iter: usize) -> Vec<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let dim = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; dim];
    let mut fx = objective(&x, &mut g);
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);
    let mut x_new = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];

    for iter in 0..max_iter {
        if inf_norm(&g) <= tol {
            break;
        }
        // Two-loop recursion for the search direction.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &d);
            axpy(-a, y, &mut d);
            alphas.push(a);
        }
        let gamma = memory.back().map_or_else(
            || {
                if iter == 0 {
                    1.0 / inf_norm(&g).max(1.0)
                } else {
                    1.0
                }
            },
            |(s, y, _)| dot(s, y) / dot(y, y),
        );
        d.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &d);
            axpy(a - b, s, &mut d);
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            memory.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }

        // Backtracking line search with the Armijo condition.
        let mut step = 1.0;
        let mut f_new;
        loop {
            for i in 0..dim {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = objective(&x_new, &mut g_new);
            if f_new <= fx + 1e-4 * step * slope || step < 1e-12 {
                break;
            }
            step *= 0.5;
        }
        if step < 1e-12 {
            break;
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if memory.len() == HISTORY {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - f_new;
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        fx = f_new;
        if decrease.abs() <= 1e-14 * fx.abs().max(1.0) {
            break;
        }
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn sparse_dot(row: &[(usize, f64)], w: &[f64]) -> f64 {
    row.iter().map(|&(c, v)| v * w[c]).sum()
}

/// `ln(1 + e^(-m))` without overflow.
fn log1p_exp_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Loss {
    Logistic,
    SquaredHinge,
}

/// Fits `0.5 |w|^2 + C * sum loss(y_i (w.x_i + b))` with an unpenalized
/// bias. Returns the weights with the bias in the last slot.
pub(crate) fn fit_linear(x: &FeatureMatrix, y: &[bool], c: f64, loss: Loss, tol: f64) -> Vec<f64> {
    let d = x.n_cols;
    let signs: Vec<f64> = y.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
    let objective = |w: &[f64], grad: &mut [f64]| -> f64 {
        let (weights, bias) = w.split_at(d);
        let mut value = 0.5 * dot(weights, weights);
        grad[..d].copy_from_slice(weights);
        grad[d] = 0.0;
        for (row, &s) in x.rows.iter().zip(&signs) {
            let margin = s * (sparse_dot(row, weights) + bias[0]);
            let coef = match loss {
                Loss::Logistic => {
                    value += c * log1p_exp_neg(margin);
                    -c * s * sigmoid(-margin)
                }
                Loss::SquaredHinge => {
                    let gap = 1.0 - margin;
                    if gap <= 0.0 {
                        continue;
                    }
                    value += c * gap * gap;
                    -2.0 * c * s * gap
                }
            };
            for &(col, v) in row {
                grad[col] += coef * v;
            }
            grad[d] += coef;
        }
        value
    };
    lbfgs(objective, vec![0.0; d + 1], tol, 1000)
}
