//! k-nearest-neighbour classification with set distances, cross-validated,
//! plus learning the OSPA cutoff from the training data.
//!
//! Run with `cargo run --release --example knn_classify`.

use ppkit::eval::kfold;
use ppkit::knn::{self, Aggregation, CutoffSearchConfig, KnnModel};
use ppkit::setdist::distance_matrix;
use ppkit::simgen::Scenario;
use ppkit::DistanceSpec;

fn main() -> ppkit::Result<()> {
    let ds = Scenario::II.spec(1).generate()?;
    let labels = ds.labels().unwrap();
    let folds = kfold(&ds, 10, 0, true)?;
    let ks: Vec<usize> = (1..=10).collect();

    // Learn c by minimising the within-class spread over between-class separation.
    let cfg = CutoffSearchConfig::with_default_grid(&ds, 2.0, 5, Aggregation::Average)?;
    let search = knn::learn_cutoff(&ds, &cfg)?;
    println!("learned cutoff {:.3} (rho {:.4})", search.cutoff, search.rho);

    for c in [1.0, 5.0, search.cutoff] {
        let d = distance_matrix(&ds, &DistanceSpec::ospa(2.0, c), None)?;
        let acc = knn::cv_accuracy(&d, labels, &folds, &ks)?;
        let means: Vec<String> = acc
            .iter()
            .map(|a| format!("{:.3}", a.iter().sum::<f64>() / a.len() as f64))
            .collect();
        println!("ospa c={c:<6.3} accuracy for k = 1..10: {}", means.join(" "));
    }

    // A fitted model classifies new patterns directly.
    let train = ds.subset(&(0..ds.len()).filter(|i| i % 5 != 0).collect::<Vec<_>>());
    let test = ds.subset(&(0..ds.len()).step_by(5).collect::<Vec<_>>());
    let model = KnnModel::new(train, DistanceSpec::ospa(2.0, search.cutoff), 5)?;
    let predicted = model.classify_all(test.patterns())?;
    let hits = predicted.iter().zip(test.labels().unwrap()).filter(|(a, b)| a == b).count();
    println!("held-out accuracy {hits}/{}", test.len());
    Ok(())
}
