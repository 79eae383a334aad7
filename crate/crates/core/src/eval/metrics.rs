use crate::error::{Error, Result};
use crate::scale::{circular_distance, ShrutiId, ShrutiScale};

fn check_lengths(pred: &[ShrutiId], truth: &[ShrutiId]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    if pred.is_empty() {
        return Err(Error::InsufficientData("no positions to score".into()));
    }
    Ok(())
}

/// Fraction of positions where the predicted Shruti equals the true one.
pub fn shruti_accuracy(pred: &[ShrutiId], truth: &[ShrutiId]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Mean circular cent distance between predicted and true Shruti centers.
pub fn avg_pitch_error(pred: &[ShrutiId], truth: &[ShrutiId], scale: &ShrutiScale) -> Result<f64> {
    check_lengths(pred, truth)?;
    let total: f64 =
        pred.iter().zip(truth).map(|(&p, &t)| circular_distance(scale.cents_of(p), scale.cents_of(t))).sum();
    Ok(total / pred.len() as f64)
}

/// Mean absolute cent difference within one octave, without wrap-around.
pub fn avg_linear_pitch_error(pred: &[ShrutiId], truth: &[ShrutiId], scale: &ShrutiScale) -> Result<f64> {
    check_lengths(pred, truth)?;
    let total: f64 =
        pred.iter().zip(truth).map(|(&p, &t)| (scale.cents_of(p) - scale.cents_of(t)).abs()).sum();
    Ok(total / pred.len() as f64)
}

/// Pick out `positions` from both sequences, for scoring completion at gaps only.
pub fn select(
    pred: &[ShrutiId],
    truth: &[ShrutiId],
    positions: &[usize],
) -> Result<(Vec<ShrutiId>, Vec<ShrutiId>)> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    let mut p = Vec::with_capacity(positions.len());
    let mut t = Vec::with_capacity(positions.len());
    for &i in positions {
        if i >= pred.len() {
            return Err(Error::InvalidInput(format!("position {i} out of range")));
        }
        p.push(pred[i]);
        t.push(truth[i]);
    }
    Ok((p, t))
}
