//! Hausdorff ignores how many points a pattern has; OSPA with a large
//! cutoff charges for every unmatched point.
//!
//! Run with `cargo run --example hausdorff_vs_ospa`.

use ppkit::{setdist, BaseDistance, PointPattern};

fn main() -> ppkit::Result<()> {
    let e = BaseDistance::Euclidean;
    let x = PointPattern::numeric("x", vec![vec![0.0, 0.0], vec![1.0, 0.0]])?;
    // Many points piled onto x's locations.
    let y = PointPattern::numeric(
        "y",
        (0..20).map(|i| vec![(i % 2) as f64, 0.0]).collect(),
    )?;
    // x plus one far outlier.
    let z = PointPattern::numeric("z", vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![4.0, 0.0]])?;

    println!("{:<16}{:>10}{:>10}", "", "d(x, y)", "d(x, z)");
    let row = |name: &str, a: f64, b: f64| println!("{name:<16}{a:>10.4}{b:>10.4}");
    row("hausdorff", setdist::hausdorff(&x, &y, e)?, setdist::hausdorff(&x, &z, e)?);
    for p in [1.0, 2.0] {
        row(
            &format!("wasserstein p={p}"),
            setdist::wasserstein(&x, &y, p, e)?,
            setdist::wasserstein(&x, &z, p, e)?,
        );
    }
    for c in [0.5, 2.0, 10.0] {
        row(
            &format!("ospa p=2 c={c}"),
            setdist::ospa(&x, &y, 2.0, c, e)?,
            setdist::ospa(&x, &z, 2.0, c, e)?,
        );
    }

    // The uncapped cardinality and feature parts behind OSPA.
    let parts = setdist::ospa_decompose(&x, &y, 2.0, e)?;
    println!(
        "\nx vs y: unmatched fraction {:.4}, mean squared match cost {:.4}",
        parts.card, parts.feat
    );

    // Empty patterns: OSPA is defined, Hausdorff is not.
    let empty = PointPattern::empty("nothing");
    println!("ospa(empty, x) at c=3: {}", setdist::ospa(&empty, &x, 2.0, 3.0, e)?);
    match setdist::hausdorff(&empty, &x, e) {
        Err(err) => println!("hausdorff(empty, x): {err}"),
        Ok(d) => println!("hausdorff(empty, x) = {d}"),
    }
    Ok(())
}
