use std::collections::BTreeMap;
use std::path::Path;

use crate::dataset::{BranchId, CustomerId};
use crate::error::{Error, Result};
use crate::metrics::{Task1Prediction, TOP_K};

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Load {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Reader::from_reader(file))
}

fn check_header(reader: &mut csv::Reader<std::fs::File>, name: &str, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::validation(name, 1, format!("expected header {}", expected.join(","))));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, row: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::validation(name, row, format!("bad value in column {}", i + 1)))
}

/// `customer_id,branch_id,rank,value`, customers ascending, ranks 1..5.
pub fn write_task1_predictions(path: &Path, predictions: &BTreeMap<CustomerId, Task1Prediction>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["customer_id", "branch_id", "rank", "value"])?;
    for (id, p) in predictions {
        for (rank, (b, v)) in p.selections().iter().enumerate() {
            w.write_record([id.to_string(), b.to_string(), (rank + 1).to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_task1_predictions(path: &Path) -> Result<BTreeMap<CustomerId, Task1Prediction>> {
    let name = path.display().to_string();
    let mut reader = open(path)?;
    check_header(&mut reader, &name, &["customer_id", "branch_id", "rank", "value"])?;
    let mut rows: BTreeMap<CustomerId, Vec<(usize, BranchId, f64)>> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::validation(&name, row, e.to_string()))?;
        let id: CustomerId = field(&rec, 0, &name, row)?;
        let branch: BranchId = field(&rec, 1, &name, row)?;
        let rank: usize = field(&rec, 2, &name, row)?;
        let value: f64 = field(&rec, 3, &name, row)?;
        if !(1..=TOP_K).contains(&rank) {
            return Err(Error::validation(&name, row, format!("rank {rank} outside 1..={TOP_K}")));
        }
        rows.entry(id).or_default().push((rank, branch, value));
    }
    rows.into_iter()
        .map(|(id, mut sel)| {
            sel.sort_by_key(|s| s.0);
            if sel.iter().map(|s| s.0).ne(1..=TOP_K) {
                return Err(Error::validation(
                    &name,
                    0,
                    format!("customer {id} needs exactly ranks 1..={TOP_K}"),
                ));
            }
            let pred = Task1Prediction::new(sel.iter().map(|s| (s.1, s.2)).collect())
                .map_err(|e| Error::validation(&name, 0, format!("customer {id}: {e}")))?;
            Ok((id, pred))
        })
        .collect()
}

/// `customer_id,score` in the given order.
pub fn write_task2_predictions(path: &Path, ids: &[CustomerId], scores: &[f64]) -> Result<()> {
    if ids.len() != scores.len() {
        return Err(Error::argument(format!("{} ids for {} scores", ids.len(), scores.len())));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["customer_id", "score"])?;
    for (id, s) in ids.iter().zip(scores) {
        w.write_record([id.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_task2_predictions(path: &Path) -> Result<BTreeMap<CustomerId, f64>> {
    let name = path.display().to_string();
    let mut reader = open(path)?;
    check_header(&mut reader, &name, &["customer_id", "score"])?;
    let mut out = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::validation(&name, row, e.to_string()))?;
        let id: CustomerId = field(&rec, 0, &name, row)?;
        let score: f64 = field(&rec, 1, &name, row)?;
        if !score.is_finite() {
            return Err(Error::validation(&name, row, "score must be finite"));
        }
        if out.insert(id, score).is_some() {
            return Err(Error::validation(&name, row, format!("duplicate customer_id {id}")));
        }
    }
    Ok(out)
}

/// `feature,importance` rows in the given order.
pub fn write_importance_csv(path: &Path, importance: &indexmap::IndexMap<String, f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["feature", "importance"])?;
    for (k, v) in importance {
        w.write_record([k.clone(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task1_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("p.csv");
        let mut preds = BTreeMap::new();
        preds.insert(
            3,
            Task1Prediction::new(vec![(0, 0.1), (4, 2.0 / 3.0), (2, 1e-300), (7, 5.0), (1, 0.0)]).unwrap(),
        );
        preds.insert(1, Task1Prediction::new((0..5).map(|b| (b, 1.0)).collect()).unwrap());
        write_task1_predictions(&path, &preds).unwrap();
        assert_eq!(read_task1_predictions(&path).unwrap(), preds);
    }

    #[test]
    fn task1_missing_rank_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("p.csv");
        std::fs::write(&path, "customer_id,branch_id,rank,value\n1,0,1,2.0\n1,1,2,1.0\n").unwrap();
        assert!(matches!(read_task1_predictions(&path), Err(Error::Validation { .. })));
        std::fs::write(&path, "customer_id,branch_id,rank,value\n1,0,9,2.0\n").unwrap();
        assert!(matches!(read_task1_predictions(&path), Err(Error::Validation { row: 2, .. })));
    }

    #[test]
    fn task2_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("p.csv");
        write_task2_predictions(&path, &[5, 2], &[0.25, 1.0 / 3.0]).unwrap();
        let back = read_task2_predictions(&path).unwrap();
        assert_eq!(back[&5], 0.25);
        assert_eq!(back[&2], 1.0 / 3.0);
    }
}
