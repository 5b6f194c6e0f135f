//! Analytic (sub)gradients of the score functions and losses.

use crate::graph::Triple;

use super::config::{LossKind, ModelConfig, ModelKind};
use super::score::{mde_terms, score_unchecked};
use super::space::EmbeddingSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Table {
    Entity,
    Relation,
}

/// Address of one parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamKey {
    pub set: u8,
    pub table: Table,
    pub index: u32,
}

impl ParamKey {
    fn entity(set: u8, index: usize) -> Self {
        ParamKey {
            set,
            table: Table::Entity,
            index: index as u32,
        }
    }

    fn relation(set: u8, index: usize) -> Self {
        ParamKey {
            set,
            table: Table::Relation,
            index: index as u32,
        }
    }
}

/// Sparse gradient: one dense vector per touched parameter row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradient {
    entries: Vec<(ParamKey, Vec<f64>)>,
}

impl Gradient {
    pub fn entries(&self) -> &[(ParamKey, Vec<f64>)] {
        &self.entries
    }

    pub fn get(&self, key: ParamKey) -> Option<&[f64]> {
        self.entries.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_slice())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.iter().all(|&x| x == 0.0))
    }

    fn add(&mut self, key: ParamKey, coeff: f64, dir: &[f64]) {
        let slot = match self.entries.iter().position(|(k, _)| *k == key) {
            Some(i) => &mut self.entries[i].1,
            None => {
                self.entries.push((key, vec![0.0; dir.len()]));
                &mut self.entries.last_mut().unwrap().1
            }
        };
        for (s, d) in slot.iter_mut().zip(dir) {
            *s += coeff * d;
        }
    }

    /// `params -= learning_rate * gradient`
    pub fn apply(&self, space: &mut EmbeddingSpace, learning_rate: f64) {
        for (key, g) in &self.entries {
            let set = space.set_mut(key.set as usize);
            let row = match key.table {
                Table::Entity => set.entities.row_mut(key.index as usize),
                Table::Relation => set.relations.row_mut(key.index as usize),
            };
            for (x, d) in row.iter_mut().zip(g) {
                *x -= learning_rate * d;
            }
        }
    }
}

/// Gradient of `||x||_p` with respect to `x`; zero at the origin for `p=2`
/// and `sign(0) = 0` componentwise for `p=1`.
pub fn norm_gradient(x: &[f64], p: u8) -> Vec<f64> {
    match p {
        1 => x
            .iter()
            .map(|&v| {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect(),
        _ => {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n == 0.0 {
                vec![0.0; x.len()]
            } else {
                x.iter().map(|v| v / n).collect()
            }
        }
    }
}

fn combine(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    a.iter().zip(b).zip(c).map(|((a, b), c)| a + b - c).collect()
}

/// Adds `coeff * d score / d params` for `t` into `grad`.
pub fn accumulate_score_gradient(
    space: &EmbeddingSpace,
    t: Triple,
    config: &ModelConfig,
    coeff: f64,
    grad: &mut Gradient,
) {
    let (h, r, tl) = (t.head.index(), t.relation.index(), t.tail.index());
    let p = config.norm_p;
    match space.model() {
        ModelKind::TransE => {
            let g = norm_gradient(
                &combine(space.entity(0, h), space.relation(0, r), space.entity(0, tl)),
                p,
            );
            grad.add(ParamKey::entity(0, h), coeff, &g);
            grad.add(ParamKey::relation(0, r), coeff, &g);
            grad.add(ParamKey::entity(0, tl), -coeff, &g);
        }
        ModelKind::Mde => {
            let w = config.weights;
            // set i: h + r - t
            let g = norm_gradient(
                &combine(space.entity(0, h), space.relation(0, r), space.entity(0, tl)),
                p,
            );
            grad.add(ParamKey::entity(0, h), coeff * w[0], &g);
            grad.add(ParamKey::relation(0, r), coeff * w[0], &g);
            grad.add(ParamKey::entity(0, tl), -coeff * w[0], &g);
            // set j: h + t - r
            let g = norm_gradient(
                &combine(space.entity(1, h), space.entity(1, tl), space.relation(1, r)),
                p,
            );
            grad.add(ParamKey::entity(1, h), coeff * w[1], &g);
            grad.add(ParamKey::entity(1, tl), coeff * w[1], &g);
            grad.add(ParamKey::relation(1, r), -coeff * w[1], &g);
            // set k: t + r - h
            let g = norm_gradient(
                &combine(space.entity(2, tl), space.relation(2, r), space.entity(2, h)),
                p,
            );
            grad.add(ParamKey::entity(2, tl), coeff * w[2], &g);
            grad.add(ParamKey::relation(2, r), coeff * w[2], &g);
            grad.add(ParamKey::entity(2, h), -coeff * w[2], &g);
        }
    }
}

/// Loss of `positive` against `negatives` and its gradient. Hinge terms
/// that are inactive contribute nothing.
pub fn gradient(
    space: &EmbeddingSpace,
    positive: Triple,
    negatives: &[Triple],
    config: &ModelConfig,
) -> (f64, Gradient) {
    let mut grad = Gradient::default();
    let fp = score_unchecked(space, positive, config);
    let mut loss = 0.0;
    match config.loss {
        LossKind::Margin => {
            for &n in negatives {
                let fn_ = score_unchecked(space, n, config);
                let l = config.margin + fp - fn_;
                if l > 0.0 {
                    loss += l;
                    accumulate_score_gradient(space, positive, config, 1.0, &mut grad);
                    accumulate_score_gradient(space, n, config, -1.0, &mut grad);
                }
            }
        }
        LossKind::Limit => {
            if fp > config.gamma1 {
                loss += config.beta1 * (fp - config.gamma1);
                accumulate_score_gradient(space, positive, config, config.beta1, &mut grad);
            }
            for &n in negatives {
                let fn_ = score_unchecked(space, n, config);
                if fn_ < config.gamma2 {
                    loss += config.beta2 * (config.gamma2 - fn_);
                    accumulate_score_gradient(space, n, config, -config.beta2, &mut grad);
                }
            }
        }
    }
    (loss, grad)
}

/// Smallest distance from any hinge boundary or any zero norm touched by
/// this sample; finite-difference checks need this to be well above the
/// step size.
pub fn kink_distance(space: &EmbeddingSpace, positive: Triple, negatives: &[Triple], config: &ModelConfig) -> f64 {
    let norms = |t: Triple| -> Vec<f64> {
        match space.model() {
            ModelKind::TransE => vec![super::score::transe_unchecked(space, t, config.norm_p)],
            ModelKind::Mde => mde_terms(space, t, config.norm_p).to_vec(),
        }
    };
    let fp = score_unchecked(space, positive, config);
    let mut d = norms(positive).into_iter().fold(f64::INFINITY, f64::min);
    match config.loss {
        LossKind::Margin => {
            for &n in negatives {
                let fn_ = score_unchecked(space, n, config);
                d = d.min((config.margin + fp - fn_).abs());
                d = norms(n).into_iter().fold(d, f64::min);
            }
        }
        LossKind::Limit => {
            d = d.min((fp - config.gamma1).abs());
            for &n in negatives {
                d = d.min((score_unchecked(space, n, config) - config.gamma2).abs());
                d = norms(n).into_iter().fold(d, f64::min);
            }
        }
    }
    d
}
