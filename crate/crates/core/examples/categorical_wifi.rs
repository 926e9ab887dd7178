//! Patterns of categorical tokens, such as the set of WiFi access points a
//! phone saw in an hour. Tokens are compared with the 0/1 metric, so OSPA
//! with c >= 1 becomes a normalised set difference.
//!
//! Run with `cargo run --example categorical_wifi`.

use ppkit::ap::{self, ApConfig, Preference};
use ppkit::io;
use ppkit::knn::KnnModel;
use ppkit::setdist::distance_matrix;
use ppkit::{BaseDistance, DistanceSpec, PointPattern};

const DATA: &str = r#"{"id":"mon-lib","label":1,"points":["ap-lib-1","ap-lib-2","ap-lib-3"]}
{"id":"tue-lib","label":1,"points":["ap-lib-1","ap-lib-3"]}
{"id":"wed-lib","label":1,"points":["ap-lib-2","ap-lib-3","ap-cafe"]}
{"id":"mon-dorm","label":2,"points":["ap-dorm-a","ap-dorm-b"]}
{"id":"tue-dorm","label":2,"points":["ap-dorm-a"]}
{"id":"wed-dorm","label":2,"points":["ap-dorm-a","ap-dorm-b","ap-dorm-c","ap-hall"]}
{"id":"offline","label":2,"points":[]}
"#;

fn main() -> ppkit::Result<()> {
    let ds = io::parse_dataset_str(DATA)?;
    let spec = DistanceSpec::ospa(1.0, 1.0).with_base(BaseDistance::Discrete);
    let d = distance_matrix(&ds, &spec, None)?;
    for (i, p) in ds.patterns().iter().enumerate() {
        let row: Vec<String> = d.row(i).iter().map(|v| format!("{v:.2}")).collect();
        println!("{:<9} {}", p.id(), row.join(" "));
    }

    let config = ApConfig { preference: Preference::Min, ..ApConfig::default() };
    let r = ap::cluster_distances(&d, &config)?;
    let exemplars: Vec<&str> = r.exemplars.iter().map(|&e| ds.patterns()[e].id()).collect();
    println!("\nexemplars: {exemplars:?}");

    let model = KnnModel::new(ds, spec, 1)?;
    let q = PointPattern::categorical("thu", ["ap-lib-1", "ap-cafe"]);
    println!("{} -> class {}", q.id(), model.classify(&q)?);
    Ok(())
}
