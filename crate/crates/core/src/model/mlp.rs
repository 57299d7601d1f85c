use super::ModelError;
use crate::domain::{DialogueAct, EldAction};
use crate::features::{TargetLabels, ACTION_CLASSES, DA_CLASSES, INPUT_DIM, OUTPUT_DIM, STATE_CLASSES};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

/// Hidden-layer nonlinearity, applied after layers 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
            Activation::Relu => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Relu),
            _ => None,
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the pre-activation and the output.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

impl FromStr for Activation {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "linear" | "none" => Ok(Activation::Identity),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(ModelError::InvalidConfig(format!("unknown activation '{other}'"))),
        }
    }
}

/// Per-head logits of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadLogits(pub Vec<f64>);

impl HeadLogits {
    pub fn action(&self) -> &[f64] {
        &self.0[..ACTION_CLASSES]
    }

    pub fn da(&self) -> &[f64] {
        &self.0[ACTION_CLASSES..ACTION_CLASSES + DA_CLASSES]
    }

    pub fn state(&self) -> &[f64] {
        &self.0[ACTION_CLASSES + DA_CLASSES..]
    }

    pub fn heads(&self) -> [&[f64]; 3] {
        [self.action(), self.da(), self.state()]
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in z.iter().enumerate() {
        if *v > z[best] {
            best = i;
        }
    }
    best
}

/// Summed cross-entropy of the three heads.
pub fn loss(logits: &HeadLogits, t: &TargetLabels) -> f64 {
    let targets = [t.eld_action, t.eld_da, t.next_belief];
    logits
        .heads()
        .iter()
        .zip(targets)
        .map(|(z, k)| log_sum_exp(z) - z[k])
        .sum()
}

/// Intermediate values of a forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
    /// Inverted-dropout multipliers (0 or 1/(1-p)); empty in eval mode.
    mask: Vec<f64>,
    pub logits: HeadLogits,
}

/// Three dense layers with a three-head output: action (7), dialogue act
/// (14), next belief (13).
///
/// Parameters live in one flat vector: W1 (h1×in, row-major), b1, W2, b2,
/// W3, b3.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub dims: [usize; 4],
    pub activation: Activation,
    pub dropout: f64,
    pub params: Vec<f64>,
}

fn param_count(d: [usize; 4]) -> usize {
    d[1] * d[0] + d[1] + d[2] * d[1] + d[2] + d[3] * d[2] + d[3]
}

impl Mlp {
    /// Uniform weights in ±1/sqrt(fan_in), zero biases.
    pub fn init(input: usize, hidden: (usize, usize), activation: Activation, dropout: f64, seed: u64) -> Self {
        let dims = [input, hidden.0, hidden.1, OUTPUT_DIM];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(dims));
        for l in 0..3 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.gen_range(-bound..bound));
            }
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Mlp {
            dims,
            activation,
            dropout,
            params,
        }
    }

    /// Default-shaped model for the 76-column schema.
    pub fn for_schema(hidden: (usize, usize), activation: Activation, dropout: f64, seed: u64) -> Self {
        Mlp::init(INPUT_DIM, hidden, activation, dropout, seed)
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Offsets of (W, b) for layer `l` in the flat vector.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let d = self.dims;
        let mut off = 0;
        for k in 0..l {
            off += d[k + 1] * d[k] + d[k + 1];
        }
        (off, off + d[l + 1] * d[l])
    }

    fn dense(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let (w, b) = self.layer_offsets(l);
        let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
        (0..n_out)
            .map(|o| {
                let row = &self.params[w + o * n_in..w + (o + 1) * n_in];
                self.params[b + o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.dims[0] {
            return Err(ModelError::DimensionMismatch {
                expected: self.dims[0],
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Forward pass. Dropout is applied after the second activation only
    /// when a mask source is given.
    pub fn forward_cached(&self, x: &[f64], mask_source: Option<&mut dyn RngCore>) -> Result<ForwardCache, ModelError> {
        self.check_input(x)?;
        let act = self.activation;
        let z1 = self.dense(0, x);
        let a1: Vec<f64> = z1.iter().map(|z| act.apply(*z)).collect();
        let z2 = self.dense(1, &a1);
        let a2: Vec<f64> = z2.iter().map(|z| act.apply(*z)).collect();
        let mut mask = Vec::new();
        let dropped: Vec<f64> = match mask_source {
            Some(rng) if self.dropout > 0.0 => {
                let keep = 1.0 - self.dropout;
                mask = (0..a2.len())
                    .map(|_| if rng.gen_bool(keep) { 1.0 / keep } else { 0.0 })
                    .collect();
                a2.iter().zip(&mask).map(|(a, m)| a * m).collect()
            }
            _ => a2.clone(),
        };
        let logits = HeadLogits(self.dense(2, &dropped));
        Ok(ForwardCache {
            z1,
            a1,
            z2,
            a2,
            mask,
            logits,
        })
    }

    /// Eval-mode logits.
    pub fn forward(&self, x: &[f64]) -> Result<HeadLogits, ModelError> {
        Ok(self.forward_cached(x, None)?.logits)
    }

    /// Adds d(loss)/d(params) for one example into `grad`; returns the loss.
    pub fn accumulate_gradient(
        &self,
        x: &[f64],
        t: &TargetLabels,
        cache: &ForwardCache,
        grad: &mut [f64],
        scale: f64,
    ) -> f64 {
        let d = self.dims;
        let act = self.activation;
        // output layer: softmax minus one-hot, per head
        let mut g3 = vec![0.0; d[3]];
        let offsets = [0, ACTION_CLASSES, ACTION_CLASSES + DA_CLASSES];
        let widths = [ACTION_CLASSES, DA_CLASSES, STATE_CLASSES];
        let targets = [t.eld_action, t.eld_da, t.next_belief];
        for h in 0..3 {
            let z = &cache.logits.0[offsets[h]..offsets[h] + widths[h]];
            let p = softmax(z);
            for (k, pk) in p.iter().enumerate() {
                g3[offsets[h] + k] = (pk - if k == targets[h] { 1.0 } else { 0.0 }) * scale;
            }
        }
        let a2_used: Vec<f64> = if cache.mask.is_empty() {
            cache.a2.clone()
        } else {
            cache.a2.iter().zip(&cache.mask).map(|(a, m)| a * m).collect()
        };
        let back = |l: usize, input: &[f64], g_out: &[f64], grad: &mut [f64]| -> Vec<f64> {
            let (w, b) = self.layer_offsets(l);
            let (n_in, n_out) = (d[l], d[l + 1]);
            let mut g_in = vec![0.0; n_in];
            for o in 0..n_out {
                let go = g_out[o];
                if go == 0.0 {
                    continue;
                }
                grad[b + o] += go;
                let row = w + o * n_in;
                for i in 0..n_in {
                    grad[row + i] += go * input[i];
                    g_in[i] += go * self.params[row + i];
                }
            }
            g_in
        };
        let mut g_a2 = back(2, &a2_used, &g3, grad);
        if !cache.mask.is_empty() {
            g_a2.iter_mut().zip(&cache.mask).for_each(|(g, m)| *g *= m);
        }
        let g_z2: Vec<f64> = (0..d[2])
            .map(|i| g_a2[i] * act.derivative(cache.z2[i], cache.a2[i]))
            .collect();
        let g_a1 = back(1, &cache.a1, &g_z2, grad);
        let g_z1: Vec<f64> = (0..d[1])
            .map(|i| g_a1[i] * act.derivative(cache.z1[i], cache.a1[i]))
            .collect();
        back(0, x, &g_z1, grad);
        loss(&cache.logits, t)
    }

    /// Loss and exact gradient for one example in eval mode.
    pub fn loss_and_gradient(&self, x: &[f64], t: &TargetLabels) -> Result<(f64, Vec<f64>), ModelError> {
        let cache = self.forward_cached(x, None)?;
        let mut grad = vec![0.0; self.params.len()];
        let l = self.accumulate_gradient(x, t, &cache, &mut grad, 1.0);
        Ok((l, grad))
    }

    /// Per-head argmax, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<TargetLabels, ModelError> {
        let z = self.forward(x)?;
        Ok(TargetLabels {
            eld_action: argmax(z.action()),
            eld_da: argmax(z.da()),
            next_belief: argmax(z.state()),
        })
    }

    /// Like [`predict`](Self::predict), but the action and dialogue-act
    /// heads agree on whether ELD moves at all. The head whose top class is
    /// more probable decides; the other head follows.
    pub fn predict_coherent(&self, x: &[f64]) -> Result<TargetLabels, ModelError> {
        let z = self.forward(x)?;
        let pa = softmax(z.action());
        let pd = softmax(z.da());
        let mut a = argmax(&pa);
        let mut d = argmax(&pd);
        let a_none = a == EldAction::NoAction.index();
        let d_none = d == DialogueAct::NoUtterance.index();
        if a_none != d_none {
            let action_leads = pa[a] >= pd[d];
            let silent = if action_leads { a_none } else { d_none };
            if silent {
                a = 0;
                d = 0;
            } else if action_leads {
                d = 1 + argmax(&pd[1..]);
            } else {
                a = 1 + argmax(&pa[1..]);
            }
        }
        Ok(TargetLabels {
            eld_action: a,
            eld_da: d,
            next_belief: argmax(z.state()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BeliefState;
    use approx::assert_abs_diff_eq;

    fn target() -> TargetLabels {
        TargetLabels::new(EldAction::GiveOT, DialogueAct::Instruct, BeliefState::new(1, 0, 0).unwrap())
    }

    fn zero_model() -> Mlp {
        let mut m = Mlp::for_schema((8, 8), Activation::Identity, 0.2, 0);
        m.params.iter_mut().for_each(|p| *p = 0.0);
        m
    }

    #[test]
    fn zero_weights_give_uniform_heads() {
        let m = zero_model();
        let z = m.forward(&[1.0; INPUT_DIM]).unwrap();
        for (head, k) in z.heads().iter().zip([7.0, 14.0, 13.0]) {
            for p in softmax(head) {
                assert_abs_diff_eq!(p, 1.0 / k, epsilon = 1e-12);
            }
        }
        let expected = 7f64.ln() + 14f64.ln() + 13f64.ln();
        assert_abs_diff_eq!(loss(&z, &target()), expected, epsilon = 1e-9);
        assert_eq!(m.predict(&[0.0; INPUT_DIM]).unwrap(), TargetLabels::new(EldAction::NoAction, DialogueAct::NoUtterance, BeliefState::INITIAL));
    }

    #[test]
    fn init_is_seeded_and_scaled() {
        let a = Mlp::for_schema((64, 32), Activation::Identity, 0.2, 5);
        assert_eq!(a, Mlp::for_schema((64, 32), Activation::Identity, 0.2, 5));
        assert_ne!(a, Mlp::for_schema((64, 32), Activation::Identity, 0.2, 6));
        let bound = 1.0 / (INPUT_DIM as f64).sqrt();
        assert!(a.params[..64 * INPUT_DIM].iter().all(|w| w.abs() <= bound));
        assert!(a.params[64 * INPUT_DIM..64 * INPUT_DIM + 64].iter().all(|b| *b == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let m = zero_model();
        assert!(matches!(m.forward(&[0.0; 75]), Err(ModelError::DimensionMismatch { expected: 76, found: 75 })));
    }

    #[test]
    fn shift_invariance_and_target_logit_gradient() {
        let mut z = HeadLogits((0..OUTPUT_DIM).map(|i| (i as f64 * 0.37).sin()).collect());
        let base = loss(&z, &target());
        z.0[..7].iter_mut().for_each(|v| *v += 3.5);
        assert_abs_diff_eq!(loss(&z, &target()), base, epsilon = 1e-12);
        let p = softmax(z.action());
        assert!(p[1] - 1.0 < 0.0);
    }

    #[test]
    fn zero_input_zero_weights_layer1_gradient_vanishes() {
        let m = zero_model();
        let (_, g) = m.loss_and_gradient(&[0.0; INPUT_DIM], &target()).unwrap();
        assert!(g[..8 * INPUT_DIM].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn coherent_prediction_couples_heads() {
        let mut m = zero_model();
        // bias the action head towards GiveOT strongly and the DA head weakly towards NoUtterance
        let n = m.params.len();
        let b3 = n - OUTPUT_DIM;
        m.params[b3 + 1] = 5.0;
        m.params[b3 + 7] = 0.5;
        m.params[b3 + 7 + 1] = 0.4;
        let raw = m.predict(&[0.0; INPUT_DIM]).unwrap();
        assert_eq!((raw.eld_action, raw.eld_da), (1, 0));
        let c = m.predict_coherent(&[0.0; INPUT_DIM]).unwrap();
        assert_eq!((c.eld_action, c.eld_da), (1, 1));
    }
}
