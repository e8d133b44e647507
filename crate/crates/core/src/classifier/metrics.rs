//! Accuracy reports and score-level fusion.

use super::model::{argmax, softmax, GcnModel};
use crate::error::{Error, Result};
use crate::features::FeatureTensor;
use crate::skeleton_io::DenseTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `None` for classes absent from the labels.
    pub per_class: Vec<Option<f64>>,
    pub hand_accuracy: Option<f64>,
    pub predictions: Vec<usize>,
}

/// Top-1 accuracies of predicted class ids against labels.
pub fn accuracy_report(
    predictions: &[usize],
    labels: &[usize],
    classes: usize,
    hand_classes: Option<&[usize]>,
) -> Result<Evaluation> {
    if labels.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    if predictions.len() != labels.len() {
        return Err(Error::shape(format!("{} predictions for {} labels", predictions.len(), labels.len())));
    }
    let mut hits = vec![0usize; classes];
    let mut totals = vec![0usize; classes];
    for (&p, &l) in predictions.iter().zip(labels) {
        if l >= classes {
            return Err(Error::shape(format!("label {l} out of range for {classes} classes")));
        }
        totals[l] += 1;
        hits[l] += (p == l) as usize;
    }
    let ratio = |h: usize, t: usize| h as f64 / t as f64;
    let hand_accuracy = hand_classes.map(|ids| {
        let (h, t) = ids.iter().filter(|&&c| c < classes).fold((0, 0), |(h, t), &c| (h + hits[c], t + totals[c]));
        if t == 0 {
            f64::NAN
        } else {
            ratio(h, t)
        }
    });
    Ok(Evaluation {
        accuracy: ratio(hits.iter().sum(), labels.len()),
        per_class: hits.iter().zip(&totals).map(|(&h, &t)| (t > 0).then(|| ratio(h, t))).collect(),
        hand_accuracy,
        predictions: predictions.to_vec(),
    })
}

/// Softmax scores, `N × classes`.
pub fn scores(model: &GcnModel, set: &FeatureTensor<f64>) -> Result<DenseTensor<f64>> {
    let classes = model.arch().classes;
    let logits = model.forward(set)?;
    let probs: Vec<f64> = logits.chunks_exact(classes).flat_map(softmax).collect();
    Ok(DenseTensor::new(vec![set.len(), classes], probs)?)
}

pub fn predictions(scores: &DenseTensor<f64>) -> Result<Vec<usize>> {
    match scores.dims() {
        [_, c] if *c > 0 => Ok(scores.data().chunks_exact(*c).map(argmax).collect()),
        dims => Err(Error::shape(format!("scores must be N×classes, got {dims:?}"))),
    }
}

pub fn evaluate(model: &GcnModel, set: &FeatureTensor<f64>, hand_classes: Option<&[usize]>) -> Result<Evaluation> {
    let labels = set.labels().ok_or_else(|| Error::shape("evaluation needs labeled features"))?;
    if set.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let s = scores(model, set)?;
    accuracy_report(&predictions(&s)?, labels, model.arch().classes, hand_classes)
}

/// Weighted sum of per-model scores; `None` weights means equal weights.
pub fn fuse_scores(scores: &[DenseTensor<f64>], weights: Option<&[f64]>) -> Result<DenseTensor<f64>> {
    let first = scores.first().ok_or(Error::Empty("score list"))?;
    if first.dims().len() != 2 {
        return Err(Error::shape(format!("scores must be N×classes, got {:?}", first.dims())));
    }
    if let Some(bad) = scores.iter().find(|s| s.dims() != first.dims()) {
        return Err(Error::shape(format!("score shapes {:?} and {:?} differ", first.dims(), bad.dims())));
    }
    let equal = vec![1.0; scores.len()];
    let weights = weights.unwrap_or(&equal);
    if weights.len() != scores.len() {
        return Err(Error::shape(format!("{} weights for {} score tensors", weights.len(), scores.len())));
    }
    let mut fused = vec![0.0; first.data().len()];
    for (s, &w) in scores.iter().zip(weights) {
        for (f, &x) in fused.iter_mut().zip(s.data()) {
            *f += w * x;
        }
    }
    Ok(DenseTensor::new(first.dims().to_vec(), fused)?)
}

/// Accuracy of the fused argmax.
pub fn ensemble(scores: &[DenseTensor<f64>], weights: Option<&[f64]>, labels: &[usize]) -> Result<f64> {
    let fused = fuse_scores(scores, weights)?;
    let classes = fused.dims()[1];
    Ok(accuracy_report(&predictions(&fused)?, labels, classes, None)?.accuracy)
}
