//! Wasserstein distance as a transport problem between two uniform
//! distributions, and the OSPA assignment that the cutoff sits on top of.
//!
//! Run with `cargo run --example wasserstein_transport`.

use ppkit::solver::{min_cost_flow, solve_assignment, solve_transport};
use ppkit::{setdist, BaseDistance, PointPattern};

fn main() -> ppkit::Result<()> {
    let e = BaseDistance::Euclidean;
    let x = PointPattern::numeric("x", vec![vec![0.0, 0.0], vec![4.0, 0.0]])?;
    let y = PointPattern::numeric("y", vec![vec![0.0, 1.0], vec![4.0, 1.0], vec![2.0, 5.0]])?;

    let cost = setdist::base_cost_matrix(&x, &y, e)?.map(|d| d * d);
    let (plan, total) = solve_transport(&cost);
    println!("transport plan, rows ship 1/{} each, columns receive 1/{} each:", x.len(), y.len());
    for i in 0..plan.rows {
        let row: Vec<String> = (0..plan.cols).map(|j| format!("{:.4}", plan.get(i, j))).collect();
        println!("  {}", row.join("  "));
    }
    println!("W2 = sqrt({total:.4}) = {:.4}", setdist::wasserstein(&x, &y, 2.0, e)?);

    // The same problem in integers: every row ships |y| units, every column takes |x|.
    let (flow, scaled) = min_cost_flow(&cost);
    println!("integer flow {:?} with cost {scaled} (= {total:.4} x {})", flow.flow, x.len() * y.len());

    // OSPA matches each point of the smaller pattern to a distinct point of
    // the larger one and charges c^p for each leftover.
    let (assignment, matched) = solve_assignment(&cost)?;
    println!("rows matched to columns {:?}, matched cost {matched}", assignment.row_to_col);
    for c in [1.0, 3.0, 6.0] {
        println!("ospa p=2 c={c}: {:.4}", setdist::ospa(&x, &y, 2.0, c, e)?);
    }
    Ok(())
}
