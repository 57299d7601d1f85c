use approx::assert_abs_diff_eq;
use musim::features::TargetLabels;
use musim::model::{adam_step, loss, model_from_bytes, model_to_bytes, train, Activation, AdamConfig, AdamState, Dataset, Mlp, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng, input: usize) -> (Vec<f64>, TargetLabels) {
    let x = (0..input).map(|_| if rng.gen_bool(0.3) { 1.0 } else { 0.0 }).collect();
    let t = TargetLabels {
        eld_action: rng.gen_range(0..7),
        eld_da: rng.gen_range(0..14),
        next_belief: rng.gen_range(0..13),
    };
    (x, t)
}

/// Largest relative error between analytic and central-difference gradients.
fn max_relative_error(m: &Mlp, x: &[f64], t: &TargetLabels) -> f64 {
    let (_, analytic) = m.loss_and_gradient(x, t).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..m.params.len() {
        let mut plus = m.clone();
        plus.params[i] += h;
        let mut minus = m.clone();
        minus.params[i] -= h;
        let numeric = (loss(&plus.forward(x).unwrap(), t) - loss(&minus.forward(x).unwrap(), t)) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (k, act) in [Activation::Identity, Activation::Tanh, Activation::Relu, Activation::Tanh, Activation::Identity]
        .into_iter()
        .enumerate()
    {
        let m = Mlp::init(12, (6, 5), act, 0.2, k as u64);
        let (x, t) = random_case(&mut rng, 12);
        let err = max_relative_error(&m, &x, &t);
        assert!(err < 1e-4, "{act}: relative error {err}");
    }
}

#[test]
fn uniform_heads_cost_ln7_ln14_ln13() {
    let mut m = Mlp::for_schema((8, 4), Activation::Identity, 0.0, 1);
    m.params.iter_mut().for_each(|p| *p = 0.0);
    let t = TargetLabels {
        eld_action: 3,
        eld_da: 9,
        next_belief: 12,
    };
    let z = m.forward(&[1.0; 76]).unwrap();
    let expected = 7f64.ln() + 14f64.ln() + 13f64.ln();
    assert_abs_diff_eq!(loss(&z, &t), expected, epsilon = 1e-9);
}

#[test]
fn first_adam_step_is_the_bias_corrected_sign_step() {
    let cfg = AdamConfig::default();
    let mut p = [0.7];
    let mut s = AdamState::new(1);
    adam_step(&mut p, &[-0.4], &mut s, &cfg);
    assert_abs_diff_eq!(p[0], 0.7 + cfg.learning_rate * 0.4 / (0.4 + cfg.epsilon), epsilon = 1e-12);
}

fn toy_data(seed: u64, n: usize) -> Dataset {
    // the action is a function of the first columns, so the task is learnable
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Dataset {
        inputs: Vec::new(),
        targets: Vec::new(),
    };
    for _ in 0..n {
        let (x, _) = random_case(&mut rng, 76);
        let a = (x[0] as usize) * 2 + x[1] as usize;
        d.targets.push(TargetLabels {
            eld_action: a,
            eld_da: a,
            next_belief: a,
        });
        d.inputs.push(x);
    }
    d
}

#[test]
fn training_is_deterministic_and_learns() {
    let (tr, va) = (toy_data(1, 300), toy_data(2, 60));
    let cfg = TrainConfig {
        max_epochs: 30,
        hidden: (16, 8),
        seed: 4,
        adam: AdamConfig {
            learning_rate: 1e-2,
            ..AdamConfig::default()
        },
        ..TrainConfig::default()
    };
    let (a, ra) = train(&tr, &va, &cfg).unwrap();
    let (b, rb) = train(&tr, &va, &cfg).unwrap();
    assert_eq!(model_to_bytes(&a), model_to_bytes(&b));
    assert_eq!(ra, rb);
    let first = &ra.epochs[0];
    let best = &ra.epochs[ra.best_epoch - 1];
    assert!(best.val_loss < first.val_loss);
    assert!(best.val_action_acc > 0.9, "{best:?}");
    assert_eq!(model_from_bytes(&model_to_bytes(&a)).unwrap(), a);
}

#[test]
fn early_stopping_keeps_the_best_epoch() {
    let (tr, va) = (toy_data(3, 100), toy_data(4, 40));
    let cfg = TrainConfig {
        max_epochs: 200,
        patience: 3,
        hidden: (8, 4),
        adam: AdamConfig {
            learning_rate: 5e-2,
            ..AdamConfig::default()
        },
        ..TrainConfig::default()
    };
    let (_, r) = train(&tr, &va, &cfg).unwrap();
    let best = r.epochs.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(r.epochs[r.best_epoch - 1].val_loss, best);
    if r.stopped_at_epoch < cfg.max_epochs {
        assert_eq!(r.stopped_at_epoch, r.best_epoch + cfg.patience);
    }
}
