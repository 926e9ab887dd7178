//! Scores clusterings, classifications and detections against ground truth,
//! and builds the cross-validation folds the learners use.
//!
//! Run with `cargo run --example evaluate_metrics`.

use ppkit::eval::{
    classification_metrics, clustering_metrics, detection_metrics, kfold_indices, ContingencyTable, Summary,
};

fn main() -> ppkit::Result<()> {
    let truth = [1, 1, 1, 2, 2, 2, 3, 3, 3];
    let clusters = [7, 7, 4, 4, 4, 4, 9, 9, 9];
    let table = ContingencyTable::new(&clusters, &truth)?;
    println!("clusters {:?} x labels {:?}", table.clusters, table.labels);
    for row in &table.counts {
        println!("  {row:?}");
    }
    let m = clustering_metrics(&clusters, &truth)?;
    println!(
        "purity {:.4}  nmi {:.4}  rand index {:.4}  pair F1 {:.4}",
        m.purity, m.nmi, m.rand_index, m.f1
    );

    let predicted = [1, 1, 2, 2, 2, 3, 3, 3, 1];
    let c = classification_metrics(&predicted, &truth)?;
    println!("\naccuracy {:.4}  macro F1 {:.4}", c.accuracy, c.macro_f1);
    for (label, f1) in &c.per_class_f1 {
        println!("  class {label}: F1 {f1:.4}");
    }

    let novel = [false, false, false, false, true, true];
    let flags = [false, true, false, false, true, false];
    let d = detection_metrics(&flags, &novel)?;
    println!("\nprecision {:.4}  recall {:.4}  F1 {:.4}", d.precision, d.recall, d.f1);

    let folds = kfold_indices(10, 3, 0)?;
    println!("\n3 folds over 10 items: {folds:?}");
    println!("accuracy over folds: {}", Summary::of(&[0.9, 0.85, 0.95]));
    Ok(())
}
