//! On-disk formats: JSON-lines datasets and CSV distance matrices.
//!
//! Dataset files hold one object per pattern:
//!
//! ```text
//! {"id":"a","label":1,"points":[[0.5,1.25],[2.0,3.0]]}
//! {"id":"w","points":["ap1","ap7"]}
//! ```
//!
//! `label` is optional (integer >= 1) but must be present on every record or
//! on none. Reals are written with 17 significant digits.

use std::io::{BufRead, Write};

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::pattern::{Element, LabeledDataset, PointPattern};
use crate::setdist::DistanceMatrix;

/// Formats a real with 17 significant digits in plain decimal notation.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0.0000000000000000".into()
        } else {
            "0.0000000000000000".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// JSON formatter writing floats through [`format_sig17`].
struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_sig17(value).as_bytes())
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    label: Option<Value>,
    points: Vec<Value>,
}

fn parse_element(v: &Value, line: usize) -> Result<Element> {
    match v {
        Value::String(s) => Ok(Element::Categorical(s.clone())),
        Value::Array(coords) => {
            let mut out = Vec::with_capacity(coords.len());
            for c in coords {
                let x = c.as_f64().ok_or_else(|| {
                    Error::Schema(format!("line {line}: coordinate {c} is not a number"))
                })?;
                if !x.is_finite() {
                    return Err(Error::Schema(format!("line {line}: non-finite coordinate")));
                }
                out.push(x);
            }
            Ok(Element::Numeric(out))
        }
        other => Err(Error::Schema(format!(
            "line {line}: element {other} is neither a coordinate array nor a token"
        ))),
    }
}

fn parse_label(v: &Value, line: usize) -> Result<u32> {
    v.as_u64()
        .filter(|&l| l >= 1 && l <= u32::MAX as u64)
        .map(|l| l as u32)
        .ok_or_else(|| Error::Schema(format!("line {line}: label {v} is not an integer >= 1")))
}

/// Reads a JSON-lines dataset. Blank lines are skipped.
pub fn parse_dataset<R: BufRead>(reader: R) -> Result<LabeledDataset> {
    let mut patterns = Vec::new();
    let mut labels: Vec<Option<u32>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let elements = rec
            .points
            .iter()
            .map(|v| parse_element(v, line_no))
            .collect::<Result<Vec<_>>>()?;
        let pattern = PointPattern::new(rec.id, elements)
            .map_err(|e| Error::Schema(format!("line {line_no}: {e}")))?;
        let label = match &rec.label {
            None | Some(Value::Null) => None,
            Some(v) => Some(parse_label(v, line_no)?),
        };
        patterns.push(pattern);
        labels.push(label);
    }
    let labels = if labels.iter().all(Option::is_none) {
        None
    } else if labels.iter().all(Option::is_some) {
        Some(labels.into_iter().flatten().collect())
    } else {
        return Err(Error::Schema(
            "either every record or no record may carry a label".into(),
        ));
    };
    LabeledDataset::new(patterns, labels)
}

pub fn parse_dataset_str(s: &str) -> Result<LabeledDataset> {
    parse_dataset(s.as_bytes())
}

pub fn read_dataset(path: impl AsRef<std::path::Path>) -> Result<LabeledDataset> {
    let f = std::fs::File::open(path)?;
    parse_dataset(std::io::BufReader::new(f))
}

fn record_value(p: &PointPattern, label: Option<u32>) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("id".into(), Value::String(p.id().to_owned()));
    if let Some(l) = label {
        map.insert("label".into(), Value::from(l));
    }
    let points = p
        .elements()
        .iter()
        .map(|e| match e {
            Element::Numeric(v) => Value::Array(v.iter().map(|&x| Value::from(x)).collect()),
            Element::Categorical(s) => Value::String(s.clone()),
        })
        .collect();
    map.insert("points".into(), Value::Array(points));
    Value::Object(map)
}

/// Writes a dataset as JSON lines, one `\n`-terminated record per pattern.
pub fn serialize_dataset<W: Write>(ds: &LabeledDataset, mut out: W) -> Result<()> {
    for (i, p) in ds.patterns().iter().enumerate() {
        let v = record_value(p, ds.labels().map(|l| l[i]));
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17Formatter);
        serde::Serialize::serialize(&v, &mut ser)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn dataset_to_string(ds: &LabeledDataset) -> String {
    let mut buf = Vec::new();
    serialize_dataset(ds, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_dataset(ds: &LabeledDataset, path: impl AsRef<std::path::Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serialize_dataset(ds, &mut f)?;
    f.flush()?;
    Ok(())
}

/// Writes an N x N matrix as headerless CSV with 17-significant-digit cells.
pub fn write_matrix_csv<W: Write>(m: &DistanceMatrix, mut out: W) -> Result<()> {
    let n = m.len();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_sig17(m.get(i, j))).collect();
        out.write_all(row.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a headerless square CSV matrix.
pub fn read_matrix_csv<R: BufRead>(reader: R) -> Result<DistanceMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| {
                c.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("distance matrix CSV is not square".into()));
    }
    DistanceMatrix::from_vec(n, rows.into_iter().flatten().collect())
}

/// Writes `value` as one JSON line, reals with 17 significant digits.
pub fn write_json_line<W: Write, T: serde::Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17Formatter);
    value.serialize(&mut ser)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Pretty JSON document with 17-significant-digit reals.
pub fn to_json_pretty<T: serde::Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = PrettySig17(serde_json::ser::PrettyFormatter::new());
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

struct PrettySig17<'a>(serde_json::ser::PrettyFormatter<'a>);

impl serde_json::ser::Formatter for PrettySig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(format_sig17(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Sidecar for a CSV matrix: pattern ids in row order.
pub fn matrix_ids_json(ds: &LabeledDataset) -> String {
    let ids: Vec<&str> = ds.patterns().iter().map(|p| p.id()).collect();
    let mut s = serde_json::to_string(&serde_json::json!({ "ids": ids }))
        .expect("string list serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_numeric_record() {
        let ds = parse_dataset_str(r#"{"id":"a","points":[[0.0,0.0]]}"#).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.patterns()[0].len(), 1);
        assert!(ds.labels().is_none());
    }

    #[test]
    fn empty_pattern_record() {
        let ds = parse_dataset_str(r#"{"id":"b","points":[]}"#).unwrap();
        assert_eq!(ds.len(), 1);
        assert!(ds.patterns()[0].is_empty());
    }

    #[test]
    fn mixed_kinds_is_schema_error() {
        let text = "{\"id\":\"a\",\"points\":[[0.0,0.0]]}\n{\"id\":\"c\",\"points\":[[\"ap1\",\"ap2\"]]}\n";
        assert!(matches!(parse_dataset_str(text), Err(Error::Schema(_))));
        let text = "{\"id\":\"a\",\"points\":[[0.0,0.0]]}\n{\"id\":\"c\",\"points\":[\"ap1\",\"ap2\"]}\n";
        assert!(matches!(parse_dataset_str(text), Err(Error::Schema(_))));
    }

    #[test]
    fn mixed_dimensions_is_schema_error() {
        let text = "{\"id\":\"a\",\"points\":[[0.0,0.0]]}\n{\"id\":\"b\",\"points\":[[1.0]]}\n";
        assert!(matches!(parse_dataset_str(text), Err(Error::Schema(_))));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"id\":\"a\",\"points\":[]}\n{\"id\":\"b\",\"points\":[\n";
        match parse_dataset_str(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_number_is_rejected() {
        assert!(parse_dataset_str(r#"{"id":"a","points":[[1e999]]}"#).is_err());
    }

    #[test]
    fn partial_labels_rejected() {
        let text = "{\"id\":\"a\",\"label\":1,\"points\":[]}\n{\"id\":\"b\",\"points\":[]}\n";
        assert!(matches!(parse_dataset_str(text), Err(Error::Schema(_))));
        assert!(parse_dataset_str(r#"{"id":"a","label":0,"points":[]}"#).is_err());
        assert!(parse_dataset_str(r#"{"id":"a","label":1.5,"points":[]}"#).is_err());
    }

    #[test]
    fn empty_dataset_serializes_to_nothing() {
        let ds = LabeledDataset::default();
        assert_eq!(dataset_to_string(&ds), "");
    }

    #[test]
    fn one_pattern_one_line() {
        let p = PointPattern::numeric("a", vec![vec![0.1, 2.0]]).unwrap();
        let ds = LabeledDataset::new(vec![p], Some(vec![2])).unwrap();
        let s = dataset_to_string(&ds);
        assert_eq!(
            s,
            "{\"id\":\"a\",\"label\":2,\"points\":[[0.10000000000000001,2.0000000000000000]]}\n"
        );
        assert_eq!(s.matches('\n').count(), 1);
    }

    #[test]
    fn sig17_examples() {
        assert_eq!(format_sig17(5.0), "5.0000000000000000");
        assert_eq!(format_sig17(-123.5), "-123.50000000000000");
        assert_eq!(format_sig17(1e-3), "0.0010000000000000000");
    }

    fn arb_dataset() -> impl Strategy<Value = LabeledDataset> {
        let numeric = (1usize..4).prop_flat_map(|dim| {
            prop::collection::vec(
                prop::collection::vec(prop::collection::vec(-1e6f64..1e6, dim), 0..6),
                0..6,
            )
            .prop_map(|pats| {
                let patterns = pats
                    .into_iter()
                    .enumerate()
                    .map(|(i, pts)| PointPattern::numeric(format!("p{i}"), pts).unwrap())
                    .collect();
                LabeledDataset::unlabeled(patterns).unwrap()
            })
        });
        let categorical = prop::collection::vec(
            (prop::collection::vec("[a-z0-9\"\\\\]{0,5}", 0..5), 1u32..4),
            0..6,
        )
        .prop_map(|pats| {
            let (patterns, labels): (Vec<_>, Vec<_>) = pats
                .into_iter()
                .enumerate()
                .map(|(i, (toks, l))| (PointPattern::categorical(format!("w{i}"), toks), l))
                .unzip();
            LabeledDataset::new(patterns, Some(labels)).unwrap()
        });
        prop_oneof![numeric, categorical]
    }

    proptest! {
        #[test]
        fn round_trip_preserves_everything(ds in arb_dataset(), scale in prop::sample::select(vec![1.0, 1e-9, 3.7e12])) {
            let ds = LabeledDataset::new(
                ds.patterns().iter().map(|p| p.scaled(scale)).collect(),
                ds.labels().map(|l| l.to_vec()),
            ).unwrap();
            let text = dataset_to_string(&ds);
            let back = parse_dataset_str(&text).unwrap();
            prop_assert_eq!(back.len(), ds.len());
            prop_assert_eq!(back.labels(), ds.labels());
            for (a, b) in back.patterns().iter().zip(ds.patterns()) {
                prop_assert_eq!(a.id(), b.id());
                prop_assert_eq!(a.elements(), b.elements());
            }
            prop_assert_eq!(dataset_to_string(&back), text);
        }

        #[test]
        fn sig17_round_trips_bit_exactly(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let s = format_sig17(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
