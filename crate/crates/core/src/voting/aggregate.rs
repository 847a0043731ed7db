use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imagery::{GridSpec, PatchIndex};
use crate::model::ProbabilityVector;

/// How an image-level label is derived from a trained patch classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InferenceMode {
    /// Every grid patch votes for its most probable class.
    Vote,
    /// One patch-sized crop from the image centre.
    Central,
    /// Average of the per-patch distributions.
    Mean,
}

impl InferenceMode {
    pub fn name(&self) -> &'static str {
        match self {
            InferenceMode::Vote => "vote",
            InferenceMode::Central => "central",
            InferenceMode::Mean => "mean",
        }
    }
}

impl fmt::Display for InferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "vote" => Ok(InferenceMode::Vote),
            "central" => Ok(InferenceMode::Central),
            "mean" => Ok(InferenceMode::Mean),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode {other:?} (expected vote, central or mean)"
            ))),
        }
    }
}

/// One probability vector per grid cell, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMatrix {
    grid: GridSpec,
    entries: Vec<ProbabilityVector>,
}

impl ProbabilityMatrix {
    pub fn new(grid: GridSpec, entries: Vec<ProbabilityVector>) -> Result<Self> {
        if entries.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} probability vectors for a {grid} grid",
                entries.len()
            )));
        }
        let c = entries[0].len();
        if let Some(bad) = entries.iter().find(|e| e.len() != c) {
            return Err(Error::ShapeMismatch(format!(
                "mixed class counts {c} and {} in one matrix",
                bad.len()
            )));
        }
        Ok(ProbabilityMatrix { grid, entries })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn num_classes(&self) -> usize {
        self.entries[0].len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ProbabilityVector] {
        &self.entries
    }

    pub fn get(&self, idx: PatchIndex) -> &ProbabilityVector {
        &self.entries[self.grid.linear(idx)]
    }

    /// Per-patch argmax classes, row-major.
    pub fn argmax_grid(&self) -> Vec<usize> {
        self.entries.iter().map(ProbabilityVector::argmax).collect()
    }

    /// Per-class sum over patches. Each column is summed in ascending value
    /// order, so the result does not depend on the patch order.
    pub fn summed_probs(&self) -> Vec<f64> {
        (0..self.num_classes())
            .map(|c| {
                let mut col: Vec<f64> = self.entries.iter().map(|e| e.as_slice()[c]).collect();
                col.sort_by(f64::total_cmp);
                col.iter().sum()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub predicted_class: usize,
    pub vote_tally: Vec<usize>,
    pub summed_probs: Vec<f64>,
    pub per_patch: ProbabilityMatrix,
    pub mode: InferenceMode,
}

fn tally(pm: &ProbabilityMatrix) -> Vec<usize> {
    let mut t = vec![0; pm.num_classes()];
    for c in pm.argmax_grid() {
        t[c] += 1;
    }
    t
}

/// Plurality of per-patch argmax votes. Ties between classes go to the larger
/// summed probability, then to the lower class index.
pub fn majority_vote(pm: &ProbabilityMatrix) -> Prediction {
    let vote_tally = tally(pm);
    let summed_probs = pm.summed_probs();
    let mut best = 0;
    for c in 1..vote_tally.len() {
        let better = vote_tally[c] > vote_tally[best]
            || (vote_tally[c] == vote_tally[best] && summed_probs[c] > summed_probs[best]);
        if better {
            best = c;
        }
    }
    Prediction {
        predicted_class: best,
        vote_tally,
        summed_probs,
        per_patch: pm.clone(),
        mode: InferenceMode::Vote,
    }
}

/// Argmax of the mean distribution over patches; the lowest index wins ties.
pub fn mean_aggregate(pm: &ProbabilityMatrix) -> Prediction {
    let summed_probs = pm.summed_probs();
    let n = pm.len() as f64;
    let mean: Vec<f64> = summed_probs.iter().map(|s| s / n).collect();
    Prediction {
        predicted_class: crate::model::argmax(&mean),
        vote_tally: tally(pm),
        summed_probs,
        per_patch: pm.clone(),
        mode: InferenceMode::Mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(rows: usize, cols: usize, vs: &[&[f64]]) -> ProbabilityMatrix {
        let entries = vs.iter().map(|v| ProbabilityVector::new(v.to_vec()).unwrap()).collect();
        ProbabilityMatrix::new(GridSpec::new(rows, cols).unwrap(), entries).unwrap()
    }

    #[test]
    fn three_way_vote_tie_resolved_by_summed_probability() {
        let m = pm(1, 3, &[&[0.6, 0.3, 0.1], &[0.2, 0.5, 0.3], &[0.1, 0.2, 0.7]]);
        let p = majority_vote(&m);
        assert_eq!(p.vote_tally, vec![1, 1, 1]);
        for (s, e) in p.summed_probs.iter().zip([0.9, 1.0, 1.1]) {
            assert!((s - e).abs() < 1e-12);
        }
        assert_eq!(p.predicted_class, 2);

        let mean = mean_aggregate(&m);
        assert_eq!(mean.predicted_class, 2);
    }

    #[test]
    fn unanimity() {
        let v = [0.1, 0.1, 0.1, 0.6, 0.1];
        let rows: Vec<&[f64]> = vec![&v; 48];
        let p = majority_vote(&pm(6, 8, &rows));
        assert_eq!(p.predicted_class, 3);
        assert_eq!(p.vote_tally[3], 48);
        assert_eq!(mean_aggregate(&pm(6, 8, &rows)).predicted_class, 3);
    }

    #[test]
    fn full_tie_goes_to_lowest_index() {
        let p = majority_vote(&pm(1, 2, &[&[0.5, 0.5], &[0.5, 0.5]]));
        assert_eq!(p.vote_tally, vec![2, 0]);
        assert_eq!(p.predicted_class, 0);
        let p = majority_vote(&pm(1, 2, &[&[1.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(p.predicted_class, 0);
    }

    #[test]
    fn votes_beat_probability_mass() {
        // class 1 wins two narrow votes, class 0 one confident one
        let m = pm(1, 3, &[&[0.45, 0.55], &[0.45, 0.55], &[1.0, 0.0]]);
        assert_eq!(majority_vote(&m).predicted_class, 1);
        assert_eq!(mean_aggregate(&m).predicted_class, 0);
    }

    #[test]
    fn shape_validation() {
        let v = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        assert!(ProbabilityMatrix::new(GridSpec::new(1, 2).unwrap(), vec![v.clone()]).is_err());
        let w = ProbabilityVector::new(vec![1.0]).unwrap();
        assert!(ProbabilityMatrix::new(GridSpec::new(1, 2).unwrap(), vec![v, w]).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in ["vote", "central", "mean"] {
            assert_eq!(m.parse::<InferenceMode>().unwrap().name(), m);
        }
        assert!("soft".parse::<InferenceMode>().is_err());
    }
}
