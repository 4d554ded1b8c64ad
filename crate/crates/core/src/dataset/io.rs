use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, Writer};

use super::{
    Activity, Branch, BranchId, Customer, CustomerId, DataSplit, Dataset, Gender, Labels, Point,
    MONTHS,
};
use crate::error::{Error, Result};

const CUSTOMERS: &str = "customers.csv";
const BRANCHES: &str = "branches.csv";
const ACTIVITIES: &str = "activities.csv";
const VISITS: &str = "visits.csv";
const LABELS: &str = "labels_task2.csv";

fn customer_header() -> Vec<String> {
    let mut h: Vec<String> = ["customer_id", "age_cat", "income_cat", "gender", "res_x", "res_y"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=MONTHS).map(|m| format!("wealth_m{m}")));
    h.extend((1..=MONTHS).map(|m| format!("card_m{m}")));
    h
}

/// Rows of one CSV file, tagged with their 1-based line number.
struct Table {
    file: String,
    rows: Vec<(usize, StringRecord)>,
}

impl Table {
    fn open(dir: &Path, file: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(file);
        let handle = File::open(&path).map_err(|source| Error::Load {
            path: path.clone(),
            source,
        })?;
        let mut reader = ReaderBuilder::new().has_headers(true).from_reader(handle);
        let found: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if found != header {
            return Err(Error::validation(
                file,
                1,
                format!("expected header `{}`, got `{}`", header.join(","), found.join(",")),
            ));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::validation(file, i + 2, e.to_string()))?;
            if rec.len() != header.len() {
                return Err(Error::validation(
                    file,
                    i + 2,
                    format!("expected {} fields, got {}", header.len(), rec.len()),
                ));
            }
            rows.push((i + 2, rec));
        }
        Ok(Self {
            file: file.to_string(),
            rows,
        })
    }

    fn field<T: FromStr>(&self, row: usize, rec: &StringRecord, col: usize, name: &str) -> Result<T> {
        let raw = rec[col].trim();
        raw.parse::<T>()
            .map_err(|_| Error::validation(&self.file, row, format!("bad {name} `{raw}`")))
    }

    fn flag(&self, row: usize, rec: &StringRecord, col: usize) -> Result<bool> {
        match rec[col].trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::validation(
                &self.file,
                row,
                format!("flag must be 0 or 1, got `{other}`"),
            )),
        }
    }
}

/// Reads and validates the five dataset files in `dir`.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let header = customer_header();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let table = Table::open(dir, CUSTOMERS, &header_refs)?;
    let mut customers = Vec::with_capacity(table.rows.len());
    for (row, rec) in &table.rows {
        let row = *row;
        let mut wealth_flags = [false; MONTHS];
        let mut card_flags = [false; MONTHS];
        for m in 0..MONTHS {
            wealth_flags[m] = table.flag(row, rec, 6 + m)?;
            card_flags[m] = table.flag(row, rec, 6 + MONTHS + m)?;
        }
        customers.push(Customer {
            id: table.field(row, rec, 0, "customer_id")?,
            age_cat: table.field(row, rec, 1, "age_cat")?,
            income_cat: table.field(row, rec, 2, "income_cat")?,
            gender: table.field::<Gender>(row, rec, 3, "gender")?,
            residence: Point::new(
                table.field(row, rec, 4, "res_x")?,
                table.field(row, rec, 5, "res_y")?,
            ),
            wealth_flags,
            card_flags,
        });
    }
    let known_customers: HashSet<CustomerId> = customers.iter().map(|c| c.id).collect();

    let table = Table::open(dir, BRANCHES, &["branch_id", "x", "y"])?;
    let mut branches = Vec::with_capacity(table.rows.len());
    for (row, rec) in &table.rows {
        branches.push(Branch {
            id: table.field(*row, rec, 0, "branch_id")?,
            location: Point::new(table.field(*row, rec, 1, "x")?, table.field(*row, rec, 2, "y")?),
        });
    }
    let n_branches = branches.len();

    let table = Table::open(dir, ACTIVITIES, &["customer_id", "month", "channel", "x", "y"])?;
    let mut activities = Vec::with_capacity(table.rows.len());
    for (row, rec) in &table.rows {
        let row = *row;
        let geo = match (rec[3].trim().is_empty(), rec[4].trim().is_empty()) {
            (true, true) => None,
            (false, false) => Some(Point::new(
                table.field(row, rec, 3, "x")?,
                table.field(row, rec, 4, "y")?,
            )),
            _ => {
                return Err(Error::validation(ACTIVITIES, row, "x and y must both be set or both empty"))
            }
        };
        let customer_id: CustomerId = table.field(row, rec, 0, "customer_id")?;
        if !known_customers.contains(&customer_id) {
            return Err(Error::validation(ACTIVITIES, row, format!("unknown customer_id {customer_id}")));
        }
        activities.push(Activity {
            customer_id,
            month: table.field(row, rec, 1, "month")?,
            channel: rec[2].trim().to_string(),
            geo,
        });
    }

    let mut labels = Labels::default();
    let table = Table::open(dir, VISITS, &["customer_id", "branch_id", "count"])?;
    for (row, rec) in &table.rows {
        let row = *row;
        let c: CustomerId = table.field(row, rec, 0, "customer_id")?;
        let b: BranchId = table.field(row, rec, 1, "branch_id")?;
        let count: u32 = table.field(row, rec, 2, "count")?;
        if !known_customers.contains(&c) {
            return Err(Error::validation(VISITS, row, format!("unknown customer_id {c}")));
        }
        if b as usize >= n_branches {
            return Err(Error::validation(VISITS, row, format!("unknown branch_id {b}")));
        }
        if labels.visits.insert((c, b), count).is_some() {
            return Err(Error::validation(VISITS, row, format!("duplicate pair ({c}, {b})")));
        }
    }

    let table = Table::open(dir, LABELS, &["customer_id", "applied"])?;
    for (row, rec) in &table.rows {
        let row = *row;
        let c: CustomerId = table.field(row, rec, 0, "customer_id")?;
        if !known_customers.contains(&c) {
            return Err(Error::validation(LABELS, row, format!("unknown customer_id {c}")));
        }
        let applied = table.flag(row, rec, 1)?;
        if labels.applied.insert(c, applied).is_some() {
            return Err(Error::validation(LABELS, row, format!("duplicate customer_id {c}")));
        }
    }

    Dataset::new(customers, branches, activities, labels)
}

fn flag_str(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes the five dataset files into `dir`, creating it if needed.
pub fn write_dataset(dir: &Path, ds: &Dataset) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut w = Writer::from_path(dir.join(CUSTOMERS))?;
    w.write_record(customer_header())?;
    for c in ds.customers() {
        let mut rec = vec![
            c.id.to_string(),
            c.age_cat.to_string(),
            c.income_cat.to_string(),
            c.gender.to_string(),
            c.residence.x.to_string(),
            c.residence.y.to_string(),
        ];
        rec.extend(c.wealth_flags.iter().map(|&f| flag_str(f).to_string()));
        rec.extend(c.card_flags.iter().map(|&f| flag_str(f).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = Writer::from_path(dir.join(BRANCHES))?;
    w.write_record(["branch_id", "x", "y"])?;
    for b in ds.branches() {
        w.write_record([b.id.to_string(), b.location.x.to_string(), b.location.y.to_string()])?;
    }
    w.flush()?;

    let mut w = Writer::from_path(dir.join(ACTIVITIES))?;
    w.write_record(["customer_id", "month", "channel", "x", "y"])?;
    for a in ds.activities() {
        let (x, y) = match a.geo {
            Some(p) => (p.x.to_string(), p.y.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([a.customer_id.to_string(), a.month.to_string(), a.channel.clone(), x, y])?;
    }
    w.flush()?;

    let mut w = Writer::from_path(dir.join(VISITS))?;
    w.write_record(["customer_id", "branch_id", "count"])?;
    for (&(c, b), &count) in &ds.labels().visits {
        w.write_record([c.to_string(), b.to_string(), count.to_string()])?;
    }
    w.flush()?;

    let mut w = Writer::from_path(dir.join(LABELS))?;
    w.write_record(["customer_id", "applied"])?;
    for (&c, &applied) in &ds.labels().applied {
        w.write_record([c.to_string(), flag_str(applied).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a split as `customer_id,fold` rows with fold `train` or `valid`.
pub fn write_split(path: &Path, split: &DataSplit) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["customer_id", "fold"])?;
    let mut rows: BTreeMap<CustomerId, &str> = BTreeMap::new();
    rows.extend(split.train_ids.iter().map(|&id| (id, "train")));
    rows.extend(split.valid_ids.iter().map(|&id| (id, "valid")));
    for (id, fold) in rows {
        w.write_record([id.to_string(), fold.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a split written by [`write_split`]. The seed is not stored and is
/// reported as 0.
pub fn read_split(path: &Path) -> Result<DataSplit> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::argument("split path has no file name"))?;
    let file = name.to_string_lossy();
    let table = Table::open(dir, &file, &["customer_id", "fold"])?;
    let mut train_ids = Vec::new();
    let mut valid_ids = Vec::new();
    let mut seen = HashSet::new();
    for (row, rec) in &table.rows {
        let id: CustomerId = table.field(*row, rec, 0, "customer_id")?;
        if !seen.insert(id) {
            return Err(Error::validation(&file, *row, format!("duplicate customer_id {id}")));
        }
        match rec[1].trim() {
            "train" => train_ids.push(id),
            "valid" => valid_ids.push(id),
            other => {
                return Err(Error::validation(&file, *row, format!("fold must be train or valid, got `{other}`")))
            }
        }
    }
    train_ids.sort_unstable();
    valid_ids.sort_unstable();
    Ok(DataSplit {
        train_ids,
        valid_ids,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::{branches, customer};

    fn write(dir: &Path, name: &str, body: &str) {
        std::fs::write(dir.join(name), body).unwrap();
    }

    fn minimal_dir() -> tempfile::TempDir {
        let tmp = tempfile::tempdir().unwrap();
        let ds = Dataset::new(vec![customer(1, 0.0, 0.0)], branches(5), vec![], Labels::default())
            .unwrap();
        write_dataset(tmp.path(), &ds).unwrap();
        tmp
    }

    #[test]
    fn header_only_activities_load_empty() {
        let tmp = minimal_dir();
        let ds = load_dataset(tmp.path()).unwrap();
        assert!(ds.activities().is_empty());
        assert!(ds.channels().is_empty());
    }

    #[test]
    fn missing_file_names_the_file() {
        let tmp = minimal_dir();
        std::fs::remove_file(tmp.path().join(VISITS)).unwrap();
        let err = load_dataset(tmp.path()).unwrap_err();
        assert!(matches!(err, Error::Load { ref path, .. } if path.ends_with(VISITS)));
    }

    #[test]
    fn unknown_branch_in_visits_names_the_row() {
        let tmp = minimal_dir();
        write(tmp.path(), VISITS, "customer_id,branch_id,count\n1,0,2\n1,7,1\n");
        let err = load_dataset(tmp.path()).unwrap_err();
        assert!(
            matches!(err, Error::Validation { ref file, row: 3, .. } if file == VISITS),
            "{err}"
        );
    }

    #[test]
    fn bad_month_is_a_validation_error() {
        let tmp = minimal_dir();
        write(tmp.path(), ACTIVITIES, "customer_id,month,channel,x,y\n1,13,WEB,,\n");
        let err = load_dataset(tmp.path()).unwrap_err();
        assert!(matches!(err, Error::Validation { row: 2, .. }), "{err}");
    }

    #[test]
    fn bad_flag_is_rejected() {
        let tmp = minimal_dir();
        let text = std::fs::read_to_string(tmp.path().join(CUSTOMERS)).unwrap();
        let text = text.replacen(",1,1,1,1,1,1,1,1,1,1,1,1,", ",2,1,1,1,1,1,1,1,1,1,1,1,", 1);
        write(tmp.path(), CUSTOMERS, &text);
        assert!(load_dataset(tmp.path()).is_err());
    }

    #[test]
    fn split_file_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let split = DataSplit {
            train_ids: vec![1, 3, 4],
            valid_ids: vec![2],
            seed: 0,
        };
        let path = tmp.path().join("split.csv");
        write_split(&path, &split).unwrap();
        assert_eq!(read_split(&path).unwrap(), split);
    }
}
