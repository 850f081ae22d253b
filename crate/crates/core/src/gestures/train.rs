//! Minibatch SGD with momentum over BPTT gradients.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::GestureSample;
use super::features::{featurize, FeatureSeq, FEATURE_DIM};
use super::lstm::{argmax, forward, Gradients, LstmModel};
use super::{GestureClass, GestureError};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Initial learning rate, annealed to zero over the run on a half cosine.
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
    /// Global gradient-norm clip per minibatch.
    pub clip_norm: f64,
    pub hidden: usize,
    pub seed: u64,
    /// Fraction of each class held out for evaluation.
    pub holdout: f64,
    /// Add stream-style crops of every non-null training sample.
    pub stream_crops: bool,
    /// Longest crop, matching the streaming window.
    pub crop_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            lr: 0.05,
            momentum: 0.9,
            batch_size: 16,
            clip_norm: 5.0,
            hidden: 32,
            seed: 0,
            holdout: 0.2,
            stream_crops: true,
            crop_window: 90,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Accuracy of the pre-update predictions seen during the epoch.
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LstmModel,
    pub curve: Vec<EpochStats>,
    pub train_indices: Vec<usize>,
    pub holdout_indices: Vec<usize>,
}

/// Stratified, seeded split: `fraction` of every class goes to the holdout.
pub fn split_holdout(labels: &[GestureClass], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut train = Vec::new();
    let mut hold = Vec::new();
    for class in GestureClass::ALL {
        let mut idx: Vec<usize> = labels.iter().enumerate().filter(|(_, l)| **l == class).map(|(i, _)| i).collect();
        idx.shuffle(&mut rng);
        let n_hold = (idx.len() as f64 * fraction).round() as usize;
        hold.extend_from_slice(&idx[..n_hold]);
        train.extend_from_slice(&idx[n_hold..]);
    }
    train.sort_unstable();
    hold.sort_unstable();
    (train, hold)
}

/// Fraction of samples whose argmax matches the label.
pub fn evaluate(model: &LstmModel, data: &[(FeatureSeq, GestureClass)]) -> Result<f64, GestureError> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0;
    for (seq, label) in data {
        if argmax(&forward(seq, model)?) == label.index() {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Featurizes the samples and trains a fresh model.
///
/// With `stream_crops`, every non-null training sample also contributes two
/// crops like the windows a streaming recognizer sees: its opening (lead-in
/// plus the first 10-40% of the motion) labeled null, so the recognizer does
/// not commit on the start of a gesture, and up to `crop_window` frames
/// ending between 60% of the motion and shortly after it, with its label.
pub fn train(dataset: &[GestureSample], config: &TrainConfig) -> Result<TrainOutcome, GestureError> {
    let labels: Vec<GestureClass> = dataset.iter().map(|s| s.label).collect();
    check_classes(&labels)?;
    let (train_idx, hold_idx) = split_holdout(&labels, config.holdout, config.seed);
    let featurized = |idx: &[usize]| -> Result<Vec<(FeatureSeq, GestureClass)>, GestureError> {
        idx.iter().map(|&i| Ok((featurize(&dataset[i].frames)?, dataset[i].label))).collect()
    };
    let mut train_set = featurized(&train_idx)?;
    let holdout = featurized(&hold_idx)?;
    if config.stream_crops {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(2));
        for &i in &train_idx {
            let s = &dataset[i];
            if s.label == GestureClass::Null {
                continue;
            }
            let p: f64 = rng.random_range(0.1..0.4);
            let cut = s.gesture_start + p * (s.gesture_end - s.gesture_start);
            let k = s.frames.iter().take_while(|f| f.timestamp <= cut).count();
            if k >= 10 {
                train_set.push((featurize(&s.frames[..k])?, GestureClass::Null));
            }
            let q: f64 = rng.random_range(0.6..1.15);
            let cut = s.gesture_start + q * (s.gesture_end - s.gesture_start);
            let end = s.frames.iter().take_while(|f| f.timestamp <= cut).count();
            let start = end.saturating_sub(config.crop_window);
            if end - start >= 10 {
                train_set.push((featurize(&s.frames[start..end])?, s.label));
            }
        }
    }
    fit(&train_set, &holdout, config, train_idx, hold_idx)
}

/// Trains on pre-featurized data with a stratified holdout split.
pub fn train_features(data: &[(FeatureSeq, GestureClass)], config: &TrainConfig) -> Result<TrainOutcome, GestureError> {
    let labels: Vec<GestureClass> = data.iter().map(|(_, l)| *l).collect();
    check_classes(&labels)?;
    let (train_idx, hold_idx) = split_holdout(&labels, config.holdout, config.seed);
    let train_set: Vec<_> = train_idx.iter().map(|&i| data[i].clone()).collect();
    let holdout: Vec<_> = hold_idx.iter().map(|&i| data[i].clone()).collect();
    fit(&train_set, &holdout, config, train_idx, hold_idx)
}

fn check_classes(labels: &[GestureClass]) -> Result<(), GestureError> {
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(GestureError::Dataset(format!("need at least two classes, found {}", classes.len())));
    }
    Ok(())
}

fn fit(
    data: &[(FeatureSeq, GestureClass)],
    holdout: &[(FeatureSeq, GestureClass)],
    config: &TrainConfig,
    train_indices: Vec<usize>,
    holdout_indices: Vec<usize>,
) -> Result<TrainOutcome, GestureError> {
    if config.batch_size == 0 {
        return Err(GestureError::Dataset("batch size must be positive".into()));
    }
    let mut model = LstmModel::init(FEATURE_DIM, config.hidden, config.seed);
    let mut velocity = vec![0.0; model.params().len()];
    let mut grads = Gradients::for_model(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let progress = (epoch - 1) as f64 / config.epochs as f64;
        let lr = config.lr * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos());
        let mut total_loss = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            for &i in batch {
                let (seq, label) = &data[i];
                let (l, predicted) = model.gradient(seq, label.index(), &mut grads)?;
                total_loss += l;
                if predicted == label.index() {
                    correct += 1;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            let norm = grads.norm() * scale;
            let clip = if norm > config.clip_norm { config.clip_norm / norm } else { 1.0 };
            for ((p, v), g) in model.params_mut().iter_mut().zip(velocity.iter_mut()).zip(&grads.values) {
                *v = config.momentum * *v - lr * g * scale * clip;
                *p += *v;
            }
        }
        let mean_loss = total_loss / order.len().max(1) as f64;
        if !mean_loss.is_finite() || model.params().iter().any(|p| !p.is_finite()) {
            return Err(GestureError::Diverged { epoch, loss: mean_loss });
        }
        let holdout_accuracy = evaluate(&model, holdout)?;
        let stats = EpochStats {
            epoch,
            mean_loss,
            train_accuracy: correct as f64 / order.len().max(1) as f64,
            holdout_accuracy,
        };
        log::debug!(
            "epoch {epoch}: loss {:.4} train {:.3} holdout {:.3}",
            stats.mean_loss,
            stats.train_accuracy,
            stats.holdout_accuracy
        );
        curve.push(stats);
    }
    Ok(TrainOutcome { model, curve, train_indices, holdout_indices })
}
