//! Nearest-normal-neighbour novelty detection: fit on normal patterns, pick
//! a threshold from leave-one-out scores, flag candidates above it.
//!
//! Run with `cargo run --release --example novelty_detection`.

use ppkit::eval::detection_metrics;
use ppkit::novelty::{self, NoveltyModel, Scoring, DEFAULT_PERCENTILE};
use ppkit::simgen::Scenario;
use ppkit::{BaseDistance, DistanceSpec};

fn main() -> ppkit::Result<()> {
    let ds = Scenario::II.spec(3).generate()?;
    let labels = ds.labels().unwrap().to_vec();
    // Train on half of cluster 2; everything else is a candidate.
    let normal_idx: Vec<usize> = ds.indices_with_label(2).into_iter().step_by(2).collect();
    let candidate_idx: Vec<usize> = (0..ds.len()).filter(|i| !normal_idx.contains(i)).collect();
    let normal = ds.subset(&normal_idx);
    let candidates = ds.subset(&candidate_idx);
    let truth: Vec<bool> = candidate_idx.iter().map(|&i| labels[i] != 2).collect();

    let sel = novelty::select_cutoff(&normal, 2.0, 95.0, BaseDistance::Euclidean)?;
    println!(
        "selected cutoff {:.3} from cardinality part {:.3} and feature part {:.3}",
        sel.cutoff, sel.m_card, sel.m_feat
    );

    let runs = [
        ("hausdorff", DistanceSpec::hausdorff(), Scoring::Distance),
        ("ospa", DistanceSpec::ospa(2.0, sel.cutoff), Scoring::Distance),
        ("uncapped ospa", DistanceSpec::ospa(2.0, sel.cutoff), Scoring::UncappedOspa),
    ];
    for (name, spec, scoring) in runs {
        // Hausdorff cannot score empty patterns; drop them for that run only.
        let (normal, candidates, truth) = if spec.family.handles_empty() {
            (normal.clone(), candidates.clone(), truth.clone())
        } else {
            let keep: Vec<usize> = (0..candidates.len()).filter(|&i| !candidates.patterns()[i].is_empty()).collect();
            (normal.without_empty(), candidates.subset(&keep), keep.iter().map(|&i| truth[i]).collect())
        };
        let model = NoveltyModel::fit(normal, spec, scoring, DEFAULT_PERCENTILE)?;
        let flags: Vec<bool> = model.detect(&candidates)?.iter().map(|v| v.novel).collect();
        let m = detection_metrics(&flags, &truth)?;
        println!(
            "{name:<14} threshold {:>8.3}  precision {:.3}  recall {:.3}  F1 {:.3}",
            model.threshold(),
            m.precision,
            m.recall,
            m.f1
        );
    }
    Ok(())
}
