//! Detection metrics: interpolated equal error rate and small-sample
//! confidence intervals.
//!
//! Scores follow the higher-is-more-genuine convention: a trial is accepted
//! as genuine when score >= threshold. FAR is the fraction of replay trials
//! accepted, FRR the fraction of genuine trials rejected. The EER estimator
//! sweeps every distinct score as a threshold and linearly interpolates
//! between the two operating points that bracket the FAR/FRR crossing; an
//! exact crossing at an operating point reports that point, taking the
//! lowest such threshold.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialLabel {
    Genuine,
    Replay,
}

impl fmt::Display for TrialLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrialLabel::Genuine => "genuine",
            TrialLabel::Replay => "replay",
        })
    }
}

impl FromStr for TrialLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "genuine" => Ok(TrialLabel::Genuine),
            "replay" => Ok(TrialLabel::Replay),
            other => Err(Error::InvalidArgument(format!(
                "unknown trial label {other:?}"
            ))),
        }
    }
}

/// One scored trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredTrial {
    pub score: f64,
    pub label: TrialLabel,
}

/// EER estimate with the operating threshold and class counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EerReport {
    pub eer: f64,
    pub threshold: f64,
    pub n_genuine: usize,
    pub n_replay: usize,
}

/// Interpolated EER over a set of scored trials. Needs at least one trial
/// of each label.
pub fn compute_eer(trials: &[ScoredTrial]) -> Result<EerReport> {
    let mut genuine = Vec::new();
    let mut replay = Vec::new();
    for t in trials {
        if !t.score.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scores must be finite, got {}",
                t.score
            )));
        }
        match t.label {
            TrialLabel::Genuine => genuine.push(t.score),
            TrialLabel::Replay => replay.push(t.score),
        }
    }
    if genuine.is_empty() || replay.is_empty() {
        return Err(Error::SingleClass);
    }
    genuine.sort_by(f64::total_cmp);
    replay.sort_by(f64::total_cmp);
    let n_gen = genuine.len();
    let n_rep = replay.len();

    // Operating points at every distinct score, ascending, plus a virtual
    // reject-all endpoint. At threshold v: FRR = #genuine < v / n_gen,
    // FAR = #replay >= v / n_rep. FRR - FAR is nondecreasing in v.
    let mut thresholds: Vec<f64> = genuine.iter().chain(replay.iter()).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut gi = 0usize; // genuine strictly below the current threshold
    let mut ri = 0usize; // replay strictly below the current threshold
    let mut prev: Option<(f64, f64, f64)> = None; // (threshold, far, frr)
    let max_score = *thresholds.last().unwrap();
    let n_points = thresholds.len() + 1;
    for p in 0..n_points {
        let (v, far, frr) = if p < thresholds.len() {
            let v = thresholds[p];
            while gi < n_gen && genuine[gi] < v {
                gi += 1;
            }
            while ri < n_rep && replay[ri] < v {
                ri += 1;
            }
            (
                v,
                (n_rep - ri) as f64 / n_rep as f64,
                gi as f64 / n_gen as f64,
            )
        } else {
            // Above every score: everything rejected.
            (max_score, 0.0, 1.0)
        };
        let d = frr - far;
        if d == 0.0 {
            return Ok(EerReport {
                eer: far,
                threshold: v,
                n_genuine: n_gen,
                n_replay: n_rep,
            });
        }
        if d > 0.0 {
            let (pv, pfar, pfrr) = prev.expect("first operating point has FRR - FAR = -1");
            let pd = pfrr - pfar;
            let alpha = -pd / (d - pd);
            return Ok(EerReport {
                eer: pfar + alpha * (far - pfar),
                threshold: pv + alpha * (v - pv),
                n_genuine: n_gen,
                n_replay: n_rep,
            });
        }
        prev = Some((v, far, frr));
    }
    unreachable!("the reject-all endpoint has FRR - FAR = 1");
}

/// Student-t confidence interval: (mean, half width) at the given level,
/// e.g. 0.95. Needs at least two values.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::NotEnoughData {
            needed: 2,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("valid dof")
        .inverse_cdf(0.5 + level / 2.0);
    Ok((mean, t * var.sqrt() / n.sqrt()))
}

/// Reads a score file: one `trial_id,score` pair per line. Blank lines,
/// `#` comments, and a `trial_id,score` header are ignored.
pub fn read_score_file(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line_no: usize, reason: String| Error::BadScoreFile {
        path: path.to_path_buf(),
        reason: format!("line {line_no}: {reason}"),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if i == 0 && line == "trial_id,score" {
            continue;
        }
        let (id, score) = line
            .split_once(',')
            .ok_or_else(|| bad(i + 1, "expected `trial_id,score`".into()))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|e| bad(i + 1, format!("bad score: {e}")))?;
        out.push((id.trim().to_owned(), score));
    }
    Ok(out)
}

/// Joins scores to labels by trial id. Scores naming unknown trials are an
/// error listing every unmatched id; labeled trials without scores are
/// skipped.
pub fn join_scores(
    scores: &[(String, f64)],
    labels: &HashMap<String, TrialLabel>,
) -> Result<Vec<ScoredTrial>> {
    let mut unmatched = Vec::new();
    let mut out = Vec::with_capacity(scores.len());
    for (id, score) in scores {
        match labels.get(id) {
            Some(&label) => out.push(ScoredTrial {
                score: *score,
                label,
            }),
            None => unmatched.push(id.clone()),
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::UnmatchedTrials(unmatched));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trials(genuine: &[f64], replay: &[f64]) -> Vec<ScoredTrial> {
        genuine
            .iter()
            .map(|&s| ScoredTrial {
                score: s,
                label: TrialLabel::Genuine,
            })
            .chain(replay.iter().map(|&s| ScoredTrial {
                score: s,
                label: TrialLabel::Replay,
            }))
            .collect()
    }

    /// Exhaustive oracle: recompute FAR/FRR by direct counting at every
    /// candidate threshold, then apply the same crossing definition.
    fn oracle_eer(ts: &[ScoredTrial]) -> f64 {
        let mut cands: Vec<f64> = ts.iter().map(|t| t.score).collect();
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        cands.push(cands.last().unwrap() + 1.0);
        let n_gen = ts.iter().filter(|t| t.label == TrialLabel::Genuine).count() as f64;
        let n_rep = ts.iter().filter(|t| t.label == TrialLabel::Replay).count() as f64;
        let point = |v: f64| {
            let far = ts
                .iter()
                .filter(|t| t.label == TrialLabel::Replay && t.score >= v)
                .count() as f64
                / n_rep;
            let frr = ts
                .iter()
                .filter(|t| t.label == TrialLabel::Genuine && t.score < v)
                .count() as f64
                / n_gen;
            (far, frr)
        };
        let mut prev: Option<(f64, f64)> = None;
        for &v in &cands {
            let (far, frr) = point(v);
            let d = frr - far;
            if d == 0.0 {
                return far;
            }
            if d > 0.0 {
                let (pfar, pfrr) = prev.unwrap();
                let pd = pfrr - pfar;
                let alpha = -pd / (d - pd);
                return pfar + alpha * (far - pfar);
            }
            prev = Some((far, frr));
        }
        unreachable!()
    }

    #[test]
    fn perfectly_separated_scores_have_zero_eer() {
        let r = compute_eer(&trials(&[0.9, 0.8, 0.85], &[0.2, 0.1, 0.3])).unwrap();
        assert_eq!(r.eer, 0.0);
        assert_eq!(r.n_genuine, 3);
        assert_eq!(r.n_replay, 3);
    }

    #[test]
    fn identical_scores_have_half_eer() {
        let r = compute_eer(&trials(&[0.5, 0.5], &[0.5, 0.5, 0.5])).unwrap();
        assert!((r.eer - 0.5).abs() < 1e-12);
    }

    #[test]
    fn worked_example_is_one_third() {
        let r = compute_eer(&trials(&[0.9, 0.8, 0.7], &[0.75, 0.3, 0.2])).unwrap();
        assert!((r.eer - 1.0 / 3.0).abs() < 1e-12, "eer {}", r.eer);
        assert_eq!(r.threshold, 0.75);
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(matches!(
            compute_eer(&trials(&[0.5], &[])),
            Err(Error::SingleClass)
        ));
        assert!(matches!(compute_eer(&[]), Err(Error::SingleClass)));
    }

    #[test]
    fn confidence_interval_reference_values() {
        let (mean, hw) = confidence_interval(&[0.3, 0.3, 0.3], 0.95).unwrap();
        assert_eq!(mean, 0.3);
        assert!(hw.abs() < 1e-12);

        let (mean, hw) = confidence_interval(&[0.10, 0.20], 0.95).unwrap();
        assert!((mean - 0.15).abs() < 1e-12);
        // t_{1, 0.975} = 12.7062, s = 0.0707107.
        assert!((hw - 0.635_31).abs() < 1e-4, "half width {hw}");

        let (mean, hw) = confidence_interval(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.95).unwrap();
        assert!((mean - 3.0).abs() < 1e-12);
        // t_{4, 0.975} = 2.7764, s = 1.5811.
        assert!((hw - 1.963_2).abs() < 1e-3, "half width {hw}");

        assert!(matches!(
            confidence_interval(&[0.1], 0.95),
            Err(Error::NotEnoughData { .. })
        ));
    }

    #[test]
    fn score_file_round_trip_and_join() {
        let p = std::env::temp_dir().join("replaysim-scores.csv");
        std::fs::write(
            &p,
            "trial_id,score\n# comment\nu000_gen,0.92\nu000_rep0,-0.4\n\nu001_gen,0.81\n",
        )
        .unwrap();
        let scores = read_score_file(&p).unwrap();
        assert_eq!(scores.len(), 3);
        assert_eq!(scores[0], ("u000_gen".to_owned(), 0.92));

        let mut labels = HashMap::new();
        labels.insert("u000_gen".to_owned(), TrialLabel::Genuine);
        labels.insert("u000_rep0".to_owned(), TrialLabel::Replay);
        labels.insert("u001_gen".to_owned(), TrialLabel::Genuine);
        labels.insert("u001_rep0".to_owned(), TrialLabel::Replay);
        let joined = join_scores(&scores, &labels).unwrap();
        assert_eq!(joined.len(), 3);

        labels.remove("u001_gen");
        match join_scores(&scores, &labels) {
            Err(Error::UnmatchedTrials(ids)) => assert_eq!(ids, vec!["u001_gen".to_owned()]),
            other => panic!("expected UnmatchedTrials, got {other:?}"),
        }
    }

    #[test]
    fn malformed_score_files_are_reported() {
        let p = std::env::temp_dir().join("replaysim-badscores.csv");
        std::fs::write(&p, "u000_gen\t0.92\n").unwrap();
        assert!(matches!(
            read_score_file(&p),
            Err(Error::BadScoreFile { .. })
        ));
        std::fs::write(&p, "u000_gen,abc\n").unwrap();
        assert!(matches!(
            read_score_file(&p),
            Err(Error::BadScoreFile { .. })
        ));
    }

    proptest! {
        #[test]
        fn matches_the_exhaustive_oracle(
            gen_scores in prop::collection::vec(-6i32..6, 1..6),
            rep_scores in prop::collection::vec(-6i32..6, 1..6),
        ) {
            // Quantized scores force frequent ties.
            let g: Vec<f64> = gen_scores.iter().map(|&v| v as f64 / 2.0).collect();
            let r: Vec<f64> = rep_scores.iter().map(|&v| v as f64 / 2.0).collect();
            let ts = trials(&g, &r);
            let fast = compute_eer(&ts).unwrap().eer;
            let slow = oracle_eer(&ts);
            prop_assert!((fast - slow).abs() < 1e-12, "fast {} oracle {}", fast, slow);
            prop_assert!((0.0..=1.0).contains(&fast));
        }

        #[test]
        fn invariant_under_monotone_transforms(
            gen_scores in prop::collection::vec(-50.0f64..50.0, 1..6),
            rep_scores in prop::collection::vec(-50.0f64..50.0, 1..6),
        ) {
            let ts = trials(&gen_scores, &rep_scores);
            let base = compute_eer(&ts).unwrap().eer;
            let mapped: Vec<ScoredTrial> = ts
                .iter()
                .map(|t| ScoredTrial { score: t.score.powi(3) + 2.0 * t.score, label: t.label })
                .collect();
            let transformed = compute_eer(&mapped).unwrap().eer;
            prop_assert!((base - transformed).abs() < 1e-12);
        }

        #[test]
        fn symmetric_under_sign_and_label_swap(
            gen_idx in prop::collection::vec(0usize..40, 1..6),
            rep_idx in prop::collection::vec(40usize..80, 1..6),
        ) {
            // Indices map to distinct score values: no ties across the set.
            let score = |i: usize| i as f64 * 1.37 - 40.0;
            let g: Vec<f64> = {
                let mut v = gen_idx.clone();
                v.sort_unstable();
                v.dedup();
                v.iter().map(|&i| score(i)).collect()
            };
            let r: Vec<f64> = {
                let mut v = rep_idx.clone();
                v.sort_unstable();
                v.dedup();
                v.iter().map(|&i| score(i)).collect()
            };
            let fwd = compute_eer(&trials(&g, &r)).unwrap().eer;
            let neg_r: Vec<f64> = g.iter().map(|s| -s).collect();
            let neg_g: Vec<f64> = r.iter().map(|s| -s).collect();
            let swapped = compute_eer(&trials(&neg_g, &neg_r)).unwrap().eer;
            prop_assert!((fwd - swapped).abs() < 1e-9, "fwd {} swapped {}", fwd, swapped);
        }
    }
}
