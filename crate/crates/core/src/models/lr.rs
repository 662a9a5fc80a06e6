use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::SignalClass;
use crate::select::class_sizes;
use crate::vectorizer::DocTermMatrix;

use super::{check_width, Prediction};

/// L2-penalised logistic regression; Buy is the positive class. The
/// intercept is not penalised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            lambda: 1.0,
            tolerance: 1e-6,
            max_iters: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrFit {
    pub model: LrModel,
    /// Cost at the start point and after every accepted step.
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn sign(label: SignalClass) -> f64 {
    label.sign()
}

/// Cost and gradient at `params`, laid out as the feature weights followed by
/// the intercept:
/// `lambda * |w|^2 + sum_i ln(1 + exp(-c_i (w . d_i + b)))`.
pub fn lr_cost_gradient(
    m: &DocTermMatrix,
    labels: &[SignalClass],
    lambda: f64,
    params: &[f64],
) -> (f64, Vec<f64>) {
    let n = m.n_cols();
    let (w, b) = (&params[..n], params[n]);
    // Compensated sums: near the optimum successive costs differ by less
    // than the rounding error of a naive sum over all documents.
    let mut cost = Neumaier::default();
    for x in w {
        cost.add(lambda * x * x);
    }
    let mut grad: Vec<Neumaier> = w.iter().map(|x| Neumaier::from(2.0 * lambda * x)).collect();
    grad.push(Neumaier::default());
    for (row, &label) in m.rows().zip(labels) {
        let c = sign(label);
        let z = row.iter().map(|&(j, x)| w[j as usize] * x).sum::<f64>() + b;
        cost.add(softplus(-c * z));
        let r = -c * sigmoid(-c * z);
        for &(j, x) in row {
            grad[j as usize].add(r * x);
        }
        grad[n].add(r);
    }
    (cost.total(), grad.iter().map(Neumaier::total).collect())
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn from(x: f64) -> Self {
        Neumaier { sum: x, carry: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;

/// Minimises the cost from zero with limited-memory BFGS and a backtracking
/// line search. Every accepted step lowers (or, at rounding level, keeps)
/// the cost.
pub fn train_lr(m: &DocTermMatrix, labels: &[SignalClass], params: &LrParams) -> Result<LrFit> {
    if !params.lambda.is_finite() || params.lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda {} must be > 0",
            params.lambda
        )));
    }
    if m.n_rows() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} matrix rows",
            labels.len(),
            m.n_rows()
        )));
    }
    class_sizes(labels)?;
    let eval = |x: &[f64]| lr_cost_gradient(m, labels, params.lambda, x);

    let mut x = vec![0.0; m.n_cols() + 1];
    let (mut f, mut g) = eval(&x);
    let mut history = vec![f];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;

    while inf_norm(&g) > params.tolerance {
        if iterations >= params.max_iters {
            return Err(Error::NotConverged {
                iterations,
                grad_norm: inf_norm(&g),
            });
        }
        iterations += 1;

        let mut dir = two_loop(&g, &memory);
        if dot(&g, &dir) >= 0.0 {
            memory.clear();
            dir = two_loop(&g, &memory);
        }
        let step = line_search(&eval, &x, f, &g, &dir).or_else(|| {
            // Quasi-Newton direction failed; retry along the gradient.
            memory.clear();
            let steep = two_loop(&g, &memory);
            line_search(&eval, &x, f, &g, &steep)
        });
        let Some((x_new, f_new, g_new)) = step else {
            return Err(Error::NotConverged {
                iterations,
                grad_norm: inf_norm(&g),
            });
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if memory.len() == MEMORY {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f);
    }

    let n = m.n_cols();
    Ok(LrFit {
        model: LrModel {
            lambda: params.lambda,
            intercept: x[n],
            weights: x[..n].to_vec(),
        },
        cost_history: history,
        iterations,
        grad_norm: inf_norm(&g),
    })
}

/// Returns `-H g` for the inverse-Hessian approximation held in `memory`.
/// With no memory this is the gradient scaled to unit inf-norm at most.
fn two_loop(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let gamma = match memory.back() {
        Some((s, y, _)) => dot(s, y) / dot(y, y),
        None => 1.0 / inf_norm(g).max(1.0),
    };
    q.iter_mut().for_each(|v| *v *= gamma);
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

type Step = (Vec<f64>, f64, Vec<f64>);

fn line_search(
    eval: &impl Fn(&[f64]) -> (f64, Vec<f64>),
    x: &[f64],
    f: f64,
    g: &[f64],
    dir: &[f64],
) -> Option<Step> {
    let slope = dot(g, dir);
    if slope >= 0.0 {
        return None;
    }
    let g_norm = inf_norm(g);
    let mut t = 1.0;
    for _ in 0..60 {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let (f_new, g_new) = eval(&trial);
        if f_new <= f + ARMIJO * t * slope {
            return Some((trial, f_new, g_new));
        }
        // Near the optimum the decrease can drop below rounding; accept a
        // step that does not raise the cost and shrinks the gradient.
        if f_new <= f && inf_norm(&g_new) < g_norm {
            return Some((trial, f_new, g_new));
        }
        t *= 0.5;
    }
    None
}

impl LrModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, row: &[(u32, f64)]) -> Result<f64> {
        check_width(row, self.n_features())?;
        Ok(row
            .iter()
            .map(|&(j, x)| self.weights[j as usize] * x)
            .sum::<f64>()
            + self.intercept)
    }

    /// Buy only when the decision value is strictly positive.
    pub fn predict(&self, row: &[(u32, f64)]) -> Result<Prediction> {
        let z = self.decision(row)?;
        let class = if z > 0.0 {
            SignalClass::Buy
        } else {
            SignalClass::Sell
        };
        Ok(Prediction {
            class,
            p_buy: sigmoid(z),
        })
    }

    pub fn feature_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.abs()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use SignalClass::{Buy, Sell};

    fn random_instance(
        rng: &mut SplitMix64,
        rows: usize,
        cols: usize,
    ) -> (DocTermMatrix, Vec<SignalClass>) {
        let dense: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        if rng.chance(0.3) {
                            0.0
                        } else {
                            rng.next_f64() * 2.0 - 0.5
                        }
                    })
                    .collect()
            })
            .collect();
        let mut labels: Vec<SignalClass> = (0..rows)
            .map(|_| if rng.chance(0.5) { Buy } else { Sell })
            .collect();
        labels[0] = Buy;
        labels[1] = Sell;
        (DocTermMatrix::from_dense(&dense), labels)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..20 {
            let (m, labels) = random_instance(&mut rng, 5, 4);
            let p: Vec<f64> = (0..5).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            let (_, g) = lr_cost_gradient(&m, &labels, 0.3, &p);
            for j in 0..p.len() {
                let h = 1e-5;
                let mut up = p.clone();
                let mut dn = p.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (lr_cost_gradient(&m, &labels, 0.3, &up).0
                    - lr_cost_gradient(&m, &labels, 0.3, &dn).0)
                    / (2.0 * h);
                let rel = (fd - g[j]).abs() / g[j].abs().max(fd.abs()).max(1e-8);
                assert!(rel < 1e-5, "component {j}: {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn separable_pair() {
        let m = DocTermMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let fit = train_lr(
            &m,
            &[Buy, Sell],
            &LrParams {
                lambda: 0.1,
                ..LrParams::default()
            },
        )
        .unwrap();
        assert!(fit.grad_norm <= 1e-6);
        assert!(fit.cost_history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(fit.model.predict(m.row(0)).unwrap().class, Buy);
        assert_eq!(fit.model.predict(m.row(1)).unwrap().class, Sell);
    }

    #[test]
    fn heavy_penalty_follows_majority() {
        let m = DocTermMatrix::from_dense(&[vec![1.0], vec![0.5], vec![0.2]]);
        let fit = train_lr(
            &m,
            &[Sell, Buy, Sell],
            &LrParams {
                lambda: 1e6,
                ..LrParams::default()
            },
        )
        .unwrap();
        assert!(fit.model.weights[0].abs() < 1e-5);
        for i in 0..3 {
            assert_eq!(fit.model.predict(m.row(i)).unwrap().class, Sell);
        }
    }

    #[test]
    fn zero_model_ties_to_sell() {
        let model = LrModel {
            lambda: 1.0,
            weights: vec![0.0; 3],
            intercept: 0.0,
        };
        let p = model.predict(&[(1, 2.0)]).unwrap();
        assert_eq!(p.p_buy, 0.5);
        assert_eq!(p.class, Sell);
    }

    #[test]
    fn iteration_cap_reports_gradient() {
        let mut rng = SplitMix64::new(3);
        let (m, labels) = random_instance(&mut rng, 30, 6);
        let err = train_lr(
            &m,
            &labels,
            &LrParams {
                lambda: 0.01,
                tolerance: 1e-12,
                max_iters: 1,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 1, .. }));
    }
}
