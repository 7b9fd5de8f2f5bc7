//! Binary logistic regression with an L2 penalty, trained by full-batch L-BFGS.
//!
//! Objective, with labels `y = ±1` and `C = l2_weight`:
//!
//! ```text
//! J(w, b) = Σ_i log(1 + exp(-y_i (w·x_i + b))) + ‖w‖² / (2C)
//! ```
//!
//! The bias is not penalized. Training sorts examples into a canonical order
//! first, so the fitted model depends only on the multiset of examples.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::corpus::FeatureVector;
use crate::error::{Error, Result};

/// One training example: features and whether the document is positive.
pub type Example<'a> = (&'a FeatureVector, bool);

const HISTORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Inverse regularization strength `C`.
    pub l2_weight: f64,
    pub max_epochs: usize,
    /// Relative objective improvement below which training stops.
    pub tolerance: f64,
    /// Kept for configuration compatibility; the solver draws no random numbers.
    pub optimizer_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_weight: 1.0,
            max_epochs: 500,
            tolerance: 1e-8,
            optimizer_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_weight > 0.0 && self.l2_weight.is_finite()) {
            return Err(Error::domain(format!("l2_weight must be positive, got {}", self.l2_weight)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Linear score `w·x + b`.
    pub fn margin(&self, vec: &FeatureVector) -> Result<f64> {
        if let Some(max) = vec.max_index() {
            if max as usize >= self.weights.len() {
                return Err(Error::domain(format!(
                    "feature index {max} out of range for model of dimension {}",
                    self.weights.len()
                )));
            }
        }
        Ok(vec.dot_dense(&self.weights) + self.bias)
    }

    /// Probability of the positive class.
    pub fn score(&self, vec: &FeatureVector) -> Result<f64> {
        self.margin(vec).map(sigmoid)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(u))` without overflow.
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

fn check_examples(examples: &[Example<'_>], dim: usize) -> Result<()> {
    for (x, _) in examples {
        if let Some(max) = x.max_index() {
            if max as usize >= dim {
                return Err(Error::domain(format!("feature index {max} out of range for dimension {dim}")));
            }
        }
    }
    Ok(())
}

/// Objective and gradient at `params = [w_0, .., w_{dim-1}, b]`.
pub fn objective_and_gradient(
    params: &[f64],
    examples: &[Example<'_>],
    config: &TrainConfig,
) -> Result<(f64, Vec<f64>)> {
    let dim = params
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::domain("parameter vector must include the bias"))?;
    check_examples(examples, dim)?;
    config.validate()?;
    Ok(eval(params, examples, config.l2_weight))
}

fn eval(params: &[f64], examples: &[Example<'_>], c: f64) -> (f64, Vec<f64>) {
    let dim = params.len() - 1;
    let (w, b) = (&params[..dim], params[dim]);
    let mut grad = vec![0.0; dim + 1];
    let mut loss = 0.0;
    for &(x, positive) in examples {
        let y = if positive { 1.0 } else { -1.0 };
        let z = x.dot_dense(w) + b;
        loss += softplus(-y * z);
        let coef = -y * sigmoid(-y * z);
        x.add_to_dense(&mut grad[..dim], coef);
        grad[dim] += coef;
    }
    let mut penalty = 0.0;
    for (g, &wi) in grad[..dim].iter_mut().zip(w) {
        penalty += wi * wi;
        *g += wi / c;
    }
    (loss + penalty / (2.0 * c), grad)
}

fn canonical_cmp(a: &Example<'_>, b: &Example<'_>) -> Ordering {
    a.1.cmp(&b.1).then_with(|| {
        let (ea, eb) = (a.0.entries(), b.0.entries());
        for (&(ia, wa), &(ib, wb)) in ea.iter().zip(eb) {
            let ord = ia.cmp(&ib).then_with(|| wa.total_cmp(&wb));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        ea.len().cmp(&eb.len())
    })
}

pub fn train(examples: &[Example<'_>], dim: usize, config: &TrainConfig) -> Result<LinearModel> {
    train_with_history(examples, dim, config).map(|(m, _)| m)
}

/// Trains and also returns the objective value after every epoch (the first
/// entry is the objective at the zero model).
pub fn train_with_history(
    examples: &[Example<'_>],
    dim: usize,
    config: &TrainConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    config.validate()?;
    check_examples(examples, dim)?;
    let n_pos = examples.iter().filter(|e| e.1).count();
    if n_pos == 0 || n_pos == examples.len() {
        return Err(Error::Training(format!(
            "need both classes, got {n_pos} positive of {} examples",
            examples.len()
        )));
    }

    let mut sorted = examples.to_vec();
    sorted.sort_by(canonical_cmp);
    let c = config.l2_weight;

    let mut x = vec![0.0; dim + 1];
    let (mut f, mut g) = eval(&x, &sorted, c);
    let mut history = vec![f];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(HISTORY);

    for _ in 0..config.max_epochs {
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < 1e-12 {
            break;
        }

        let mut dir = two_loop(&g, &pairs);
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            pairs.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if pairs.is_empty() { 1.0 / gnorm.max(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let (ft, gt) = eval(&trial, &sorted, c);
            if ft <= f + ARMIJO_C1 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else { break };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if pairs.len() == HISTORY {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }

        let improvement = f - fnew;
        x = xn;
        g = gn;
        f = fnew;
        history.push(f);
        if improvement < config.tolerance * f.abs().max(1.0) {
            break;
        }
    }

    let bias = x.pop().unwrap_or(0.0);
    Ok((LinearModel { weights: x, bias }, history))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let beta = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - beta) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
