use super::mlp::{argmax, loss, Activation, Mlp};
use super::ModelError;
use crate::corpus::Corpus;
use crate::features::TargetLabels;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, cfg: &AdamConfig) {
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub seed: u64,
    pub activation: Activation,
    pub hidden: (usize, usize),
    pub dropout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 100,
            patience: 10,
            adam: AdamConfig::default(),
            batch_size: 32,
            seed: 0,
            activation: Activation::Identity,
            hidden: (64, 32),
            dropout: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |s: &str| Err(ModelError::InvalidConfig(s.to_string()));
        if self.max_epochs < 1 {
            return bad("max_epochs must be at least 1");
        }
        if self.patience < 1 {
            return bad("patience must be at least 1");
        }
        if !(self.adam.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.batch_size < 1 {
            return bad("batch size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if self.hidden.0 < 1 || self.hidden.1 < 1 {
            return bad("hidden widths must be at least 1");
        }
        Ok(())
    }
}

/// Encoded inputs with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<TargetLabels>,
}

impl Dataset {
    pub fn from_corpus(c: &Corpus) -> Self {
        Dataset {
            inputs: c.records.iter().map(|r| r.encoded().values().to_vec()).collect(),
            targets: c.targets(),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_action_acc: f64,
    pub val_da_acc: f64,
    pub val_state_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub stopped_at_epoch: usize,
    pub best_epoch: usize,
}

/// Mean loss and per-head accuracies in eval mode.
pub fn evaluate_loss(m: &Mlp, data: &Dataset) -> Result<(f64, [f64; 3]), ModelError> {
    let mut total = 0.0;
    let mut correct = [0usize; 3];
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        let z = m.forward(x)?;
        total += loss(&z, t);
        let preds = [argmax(z.action()), argmax(z.da()), argmax(z.state())];
        let truth = [t.eld_action, t.eld_da, t.next_belief];
        for h in 0..3 {
            correct[h] += (preds[h] == truth[h]) as usize;
        }
    }
    let n = data.len().max(1) as f64;
    Ok((total / n, correct.map(|c| c as f64 / n)))
}

/// Mini-batch Adam with early stopping on validation loss. Returns the
/// snapshot from the best validation epoch.
pub fn train(train_set: &Dataset, val_set: &Dataset, cfg: &TrainConfig) -> Result<(Mlp, TrainReport), ModelError> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(ModelError::InvalidConfig("training and validation sets must be non-empty".into()));
    }
    let input_dim = train_set.inputs[0].len();
    let mut model = Mlp::init(input_dim, cfg.hidden, cfg.activation, cfg.dropout, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));
    let mut adam = AdamState::new(model.num_params());
    let mut grad = vec![0.0; model.num_params()];
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut best: Option<(f64, usize, Mlp)> = None;
    let mut epochs = Vec::new();
    let mut since_best = 0;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut train_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let x = &train_set.inputs[i];
                let cache = model.forward_cached(x, Some(&mut rng))?;
                train_loss += model.accumulate_gradient(x, &train_set.targets[i], &cache, &mut grad, scale);
            }
            adam_step(&mut model.params, &grad, &mut adam, &cfg.adam);
        }
        let (val_loss, acc) = evaluate_loss(&model, val_set)?;
        let stats = EpochStats {
            epoch,
            train_loss: train_loss / train_set.len() as f64,
            val_loss,
            val_action_acc: acc[0],
            val_da_acc: acc[1],
            val_state_acc: acc[2],
        };
        log::info!(
            "epoch {:>3} train_loss {:.4} val_loss {:.4} val_acc action {:.3} da {:.3} state {:.3}",
            epoch,
            stats.train_loss,
            val_loss,
            acc[0],
            acc[1],
            acc[2]
        );
        epochs.push(stats);
        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((val_loss, epoch, model.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    let stopped_at_epoch = epochs.len();
    let (_, best_epoch, best_model) = best.expect("at least one epoch ran");
    Ok((
        best_model,
        TrainReport {
            epochs,
            stopped_at_epoch,
            best_epoch,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_adam_step_closed_form() {
        let cfg = AdamConfig::default();
        for g in [0.3, -2.0, 1e-3] {
            let mut p = [1.0];
            let mut s = AdamState::new(1);
            adam_step(&mut p, &[g], &mut s, &cfg);
            let expected = 1.0 - cfg.learning_rate * g / (g.abs() + cfg.epsilon);
            assert_abs_diff_eq!(p[0], expected, epsilon = 1e-12);
            assert_eq!(s.t, 1);
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = [0.5, -0.25];
        let mut s = AdamState::new(2);
        for _ in 0..10 {
            adam_step(&mut p, &[0.0, 0.0], &mut s, &AdamConfig::default());
        }
        assert_eq!(p, [0.5, -0.25]);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let c = TrainConfig { patience: 0, ..TrainConfig::default() };
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.adam.learning_rate = 0.0;
        assert!(c.validate().is_err());
    }
}
