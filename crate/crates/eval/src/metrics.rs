//! Location error, minimum-cost target assignment and the distancing
//! threshold classifier.

use csiloc_core::geometry::distance;
use csiloc_core::Point2;
use serde::{Deserialize, Serialize};

/// Euclidean distance between a predicted and a true position, in meters.
pub fn location_error(pred: Point2, truth: Point2) -> f64 {
    distance(pred, truth)
}

/// One prediction assigned to one ground-truth target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    /// Index into the prediction list.
    pub pred: usize,
    /// Index into the truth list.
    pub truth: usize,
    pub error_m: f64,
}

/// Result of assigning predictions to ground-truth targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// Assigned pairs, ascending by truth index.
    pub pairs: Vec<MatchedPair>,
    /// Prediction indices left over, ascending.
    pub unmatched_preds: Vec<usize>,
    /// Truth indices no prediction was available for (misses), ascending.
    pub unmatched_truths: Vec<usize>,
    /// Sum of the matched errors, in meters.
    pub total_error_m: f64,
}

/// One-to-one assignment between predictions and truths minimizing the total
/// Euclidean distance, found by exhaustive search over all injective
/// assignments of the smaller list into the larger. Intended for the handful
/// of targets a frame can hold; cost grows factorially.
///
/// Ties resolve to the lexicographically first assignment (by truth index,
/// then prediction index), which keeps the result deterministic.
pub fn match_targets(preds: &[Point2], truths: &[Point2]) -> Matching {
    // Enumerate injective assignments of the smaller list ("rows") into the
    // larger ("slots"); everything on the larger side that stays unused is
    // unmatched by construction.
    let swapped = truths.len() > preds.len();
    let (rows, slots) = if swapped {
        (preds, truths)
    } else {
        (truths, preds)
    };
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| slots.iter().map(|s| distance(*r, *s)).collect())
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    search(
        &cost,
        slots.len(),
        0.0,
        &mut vec![false; slots.len()],
        &mut Vec::with_capacity(rows.len()),
        &mut best,
    );
    let chosen = best.map(|(_, a)| a).unwrap_or_default();

    let mut pairs: Vec<MatchedPair> = chosen
        .iter()
        .enumerate()
        .map(|(row, &slot)| {
            let (pred, truth) = if swapped { (row, slot) } else { (slot, row) };
            MatchedPair {
                pred,
                truth,
                error_m: cost[row][slot],
            }
        })
        .collect();
    pairs.sort_by_key(|m| m.truth);

    let matched_preds: Vec<usize> = pairs.iter().map(|m| m.pred).collect();
    let matched_truths: Vec<usize> = pairs.iter().map(|m| m.truth).collect();
    Matching {
        total_error_m: pairs.iter().map(|m| m.error_m).sum(),
        unmatched_preds: (0..preds.len())
            .filter(|i| !matched_preds.contains(i))
            .collect(),
        unmatched_truths: (0..truths.len())
            .filter(|i| !matched_truths.contains(i))
            .collect(),
        pairs,
    }
}

/// Depth-first enumeration of injective assignments, keeping the cheapest.
/// `current[row] = slot`; ties keep the first assignment found, so the
/// result does not depend on floating-point summation order.
fn search(
    cost: &[Vec<f64>],
    n_slots: usize,
    so_far: f64,
    used: &mut [bool],
    current: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>)>,
) {
    let row = current.len();
    if row == cost.len() {
        if best.as_ref().is_none_or(|(t, _)| so_far < *t) {
            *best = Some((so_far, current.clone()));
        }
        return;
    }
    for slot in 0..n_slots {
        if used[slot] {
            continue;
        }
        used[slot] = true;
        current.push(slot);
        search(cost, n_slots, so_far + cost[row][slot], used, current, best);
        current.pop();
        used[slot] = false;
    }
}

/// Distancing classifier agreement: `true` when the predicted pair and the
/// true pair fall on the same side of the threshold (both closer than it or
/// both not).
pub fn threshold_accuracy(pred_pair: &[Point2; 2], true_pair: &[Point2; 2], threshold_m: f64) -> bool {
    let pred_close = distance(pred_pair[0], pred_pair[1]) < threshold_m;
    let true_close = distance(true_pair[0], true_pair[1]) < threshold_m;
    pred_close == true_close
}
