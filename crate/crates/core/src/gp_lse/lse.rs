use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::top_k_indices;

use super::posterior::GpPosterior;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Class {
    High,
    Low,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Probe(usize),
    Done,
}

/// Shrinking confidence intervals and the H/L/U partition of the grid.
#[derive(Debug, Clone)]
pub struct LseState {
    pub tau: f64,
    pub epsilon: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    class: Vec<Class>,
    /// number of completed `lse_step` calls
    pub t: usize,
    /// max ambiguity over U after each step (`-inf` when U is empty)
    pub max_ambiguity: Vec<f64>,
}

impl LseState {
    pub fn new(grid_len: usize, tau: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau = {tau}, epsilon = {epsilon}"
            )));
        }
        Ok(Self {
            tau,
            epsilon,
            lower: vec![f64::NEG_INFINITY; grid_len],
            upper: vec![f64::INFINITY; grid_len],
            class: vec![Class::Undecided; grid_len],
            t: 0,
            max_ambiguity: Vec::new(),
        })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn class(&self) -> &[Class] {
        &self.class
    }

    pub fn indices(&self, c: Class) -> Vec<usize> {
        (0..self.class.len())
            .filter(|&i| self.class[i] == c)
            .collect()
    }

    pub fn count(&self, c: Class) -> usize {
        self.class.iter().filter(|&&x| x == c).count()
    }

    pub fn ambiguity(&self, i: usize) -> f64 {
        (self.upper[i] - self.tau).min(self.tau - self.lower[i])
    }
}

/// One LSE iteration: intersect intervals with `μ ± sqrt(β) σ`, classify,
/// and select the most ambiguous undecided index (ties to the lowest index).
pub fn lse_step(state: &mut LseState, post: &GpPosterior, beta: f64) -> StepOutcome {
    let sb = beta.sqrt();
    let (hi_cut, lo_cut) = (state.tau - state.epsilon, state.tau + state.epsilon);
    let mut best: Option<(usize, f64)> = None;
    for i in 0..state.class.len() {
        if state.class[i] != Class::Undecided {
            continue;
        }
        let (mu, sd) = (post.mean(i), post.variance(i).sqrt());
        state.lower[i] = state.lower[i].max(mu - sb * sd);
        state.upper[i] = state.upper[i].min(mu + sb * sd);
        if state.lower[i] > hi_cut {
            state.class[i] = Class::High;
        } else if state.upper[i] <= lo_cut {
            state.class[i] = Class::Low;
        } else {
            let a = state.ambiguity(i);
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((i, a));
            }
        }
    }
    state.t += 1;
    match best {
        Some((i, a)) => {
            state.max_ambiguity.push(a);
            if a <= state.epsilon {
                StepOutcome::Done
            } else {
                StepOutcome::Probe(i)
            }
        }
        None => {
            state.max_ambiguity.push(f64::NEG_INFINITY);
            StepOutcome::Done
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportSelection {
    /// ascending linear indices
    pub indices: Vec<usize>,
    pub patched: bool,
    /// H and U were both empty, the single argmax-μ index was used
    pub fallback: bool,
}

/// `Ŝ = H` when U is empty, else the `k_cap` largest posterior means over H ∪ U.
pub fn finalize_support(state: &LseState, post: &GpPosterior, k_cap: usize) -> SupportSelection {
    let undecided = state.indices(Class::Undecided);
    let (mut indices, patched) = if undecided.is_empty() {
        (state.indices(Class::High), false)
    } else {
        let pool: Vec<usize> = (0..state.class.len())
            .filter(|&i| state.class[i] != Class::Low)
            .collect();
        let mus: Vec<f64> = pool.iter().map(|&i| post.mean(i)).collect();
        let picked = top_k_indices(&mus, k_cap.max(1))
            .into_iter()
            .map(|p| pool[p])
            .collect();
        (picked, true)
    };
    let mut fallback = false;
    if indices.is_empty() {
        let mus = post.means();
        indices = top_k_indices(&mus, 1);
        fallback = true;
    }
    indices.sort_unstable();
    SupportSelection {
        indices,
        patched,
        fallback,
    }
}
