//! Customer, branch and activity records, CSV ingestion, the customer-level
//! train/validation split and a synthetic data generator.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

mod generate;
mod io;
mod split;

pub use generate::{generate, generate_to_dir, GenConfig, CHANNEL_CATALOG};
pub use io::{load_dataset, read_split, write_dataset, write_split};
pub use split::{restrict_activities, split_customers, DataSplit, FEATURE_MONTHS};

pub type CustomerId = u32;
pub type BranchId = u32;

/// Number of monthly observations in a flag series.
pub const MONTHS: usize = 12;

/// Smallest branch count for which top-5 selection is defined.
pub const MIN_BRANCHES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    F,
    M,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::F => "F",
            Gender::M => "M",
        })
    }
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" => Ok(Gender::F),
            "M" => Ok(Gender::M),
            other => Err(Error::argument(format!("gender must be M or F, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Customer {
    pub id: CustomerId,
    /// Binned age, 1..=3.
    pub age_cat: u8,
    /// Binned income, 1..=3.
    pub income_cat: u8,
    pub gender: Gender,
    pub residence: Point,
    pub wealth_flags: [bool; MONTHS],
    pub card_flags: [bool; MONTHS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: BranchId,
    pub location: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Activity {
    pub customer_id: CustomerId,
    /// 1..=12
    pub month: u8,
    pub channel: String,
    /// Present iff the channel is geolocated.
    pub geo: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Channel {
    pub name: String,
    pub geolocated: bool,
}

/// Supervised targets. Visit pairs absent from the map have count 0; only
/// positive counts are stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub visits: BTreeMap<(CustomerId, BranchId), u32>,
    pub applied: BTreeMap<CustomerId, bool>,
}

/// A validated, immutable dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    customers: Vec<Customer>,
    branches: Vec<Branch>,
    activities: Vec<Activity>,
    labels: Labels,
    channels: Vec<Channel>,
    index: HashMap<CustomerId, usize>,
}

impl Dataset {
    /// Validates all record invariants. Customers are reordered by id and
    /// branches by branch id; activities keep their order.
    pub fn new(
        mut customers: Vec<Customer>,
        mut branches: Vec<Branch>,
        activities: Vec<Activity>,
        mut labels: Labels,
    ) -> Result<Self> {
        for (row, c) in customers.iter().enumerate() {
            validate_customer(c).map_err(|m| Error::validation("customers.csv", row + 2, m))?;
        }
        let mut index = HashMap::with_capacity(customers.len());
        for (row, c) in customers.iter().enumerate() {
            if index.insert(c.id, row).is_some() {
                return Err(Error::validation(
                    "customers.csv",
                    row + 2,
                    format!("duplicate customer_id {}", c.id),
                ));
            }
        }
        customers.sort_by_key(|c| c.id);
        let index: HashMap<_, _> = customers.iter().enumerate().map(|(i, c)| (c.id, i)).collect();

        for (row, b) in branches.iter().enumerate() {
            if !(b.location.x.is_finite() && b.location.y.is_finite()) {
                return Err(Error::validation("branches.csv", row + 2, "non-finite coordinates"));
            }
            if b.id as usize >= branches.len() {
                return Err(Error::validation(
                    "branches.csv",
                    row + 2,
                    format!("branch ids must be contiguous 0..{}, got {}", branches.len(), b.id),
                ));
            }
        }
        branches.sort_by_key(|b| b.id);
        if let Some(pos) = branches.windows(2).position(|w| w[0].id == w[1].id) {
            return Err(Error::validation(
                "branches.csv",
                pos + 3,
                format!("duplicate branch_id {}", branches[pos].id),
            ));
        }
        if branches.len() < MIN_BRANCHES {
            return Err(Error::validation(
                "branches.csv",
                branches.len() + 1,
                format!("at least {MIN_BRANCHES} branches required, got {}", branches.len()),
            ));
        }

        let mut geo_of_channel: BTreeMap<&str, bool> = BTreeMap::new();
        for (row, a) in activities.iter().enumerate() {
            let fail = |m: String| Error::validation("activities.csv", row + 2, m);
            if !(1..=MONTHS as u8).contains(&a.month) {
                return Err(fail(format!("month {} outside 1..=12", a.month)));
            }
            if !index.contains_key(&a.customer_id) {
                return Err(fail(format!("unknown customer_id {}", a.customer_id)));
            }
            if a.channel.is_empty() {
                return Err(fail("empty channel".into()));
            }
            if let Some(p) = a.geo {
                if !(p.x.is_finite() && p.y.is_finite()) {
                    return Err(fail("non-finite coordinates".into()));
                }
            }
            let geolocated = *geo_of_channel.entry(&a.channel).or_insert(a.geo.is_some());
            if geolocated != a.geo.is_some() {
                return Err(fail(format!(
                    "channel {} mixes rows with and without coordinates",
                    a.channel
                )));
            }
        }
        let channels = geo_of_channel
            .into_iter()
            .map(|(name, geolocated)| Channel {
                name: name.to_string(),
                geolocated,
            })
            .collect();

        labels.visits.retain(|_, count| *count > 0);
        for (row, &(c, b)) in labels.visits.keys().enumerate() {
            if !index.contains_key(&c) {
                return Err(Error::validation("visits.csv", row + 2, format!("unknown customer_id {c}")));
            }
            if b as usize >= branches.len() {
                return Err(Error::validation("visits.csv", row + 2, format!("unknown branch_id {b}")));
            }
        }
        for (row, c) in labels.applied.keys().enumerate() {
            if !index.contains_key(c) {
                return Err(Error::validation(
                    "labels_task2.csv",
                    row + 2,
                    format!("unknown customer_id {c}"),
                ));
            }
        }

        Ok(Self {
            customers,
            branches,
            activities,
            labels,
            channels,
            index,
        })
    }

    /// Customers sorted by id.
    pub fn customers(&self) -> &[Customer] {
        &self.customers
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn activities(&self) -> &[Activity] {
        &self.activities
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    /// Channels seen in the activity table, sorted by name.
    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn customer(&self, id: CustomerId) -> Option<&Customer> {
        self.index.get(&id).map(|&i| &self.customers[i])
    }

    /// Position of `id` in [`Dataset::customers`].
    pub fn customer_position(&self, id: CustomerId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn customer_ids(&self) -> Vec<CustomerId> {
        self.customers.iter().map(|c| c.id).collect()
    }

    pub fn visits(&self, customer: CustomerId, branch: BranchId) -> u32 {
        self.labels
            .visits
            .get(&(customer, branch))
            .copied()
            .unwrap_or(0)
    }

    /// Full visit vector of length `b` for one customer.
    pub fn visit_vector(&self, customer: CustomerId) -> Vec<u32> {
        let mut out = vec![0; self.branches.len()];
        for (&(_, b), &count) in self
            .labels
            .visits
            .range((customer, 0)..=(customer, BranchId::MAX))
        {
            out[b as usize] = count;
        }
        out
    }

    pub fn applied(&self, customer: CustomerId) -> Option<bool> {
        self.labels.applied.get(&customer).copied()
    }
}

fn validate_customer(c: &Customer) -> std::result::Result<(), String> {
    if !(1..=3).contains(&c.age_cat) {
        return Err(format!("age_cat {} outside 1..=3", c.age_cat));
    }
    if !(1..=3).contains(&c.income_cat) {
        return Err(format!("income_cat {} outside 1..=3", c.income_cat));
    }
    if !(c.residence.x.is_finite() && c.residence.y.is_finite()) {
        return Err("non-finite residence".into());
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn customer(id: CustomerId, x: f64, y: f64) -> Customer {
        Customer {
            id,
            age_cat: 1,
            income_cat: 2,
            gender: Gender::F,
            residence: Point::new(x, y),
            wealth_flags: [true; MONTHS],
            card_flags: [false; MONTHS],
        }
    }

    pub(crate) fn branches(n: u32) -> Vec<Branch> {
        (0..n)
            .map(|id| Branch {
                id,
                location: Point::new(id as f64, 0.0),
            })
            .collect()
    }

    #[test]
    fn distance_is_euclidean() {
        assert_eq!(Point::new(0.0, 0.0).distance(&Point::new(3.0, 4.0)), 5.0);
        assert_eq!(Point::new(1.5, -2.0).distance(&Point::new(1.5, -2.0)), 0.0);
    }

    #[test]
    fn rejects_too_few_branches() {
        let err = Dataset::new(vec![customer(1, 0.0, 0.0)], branches(4), vec![], Labels::default())
            .unwrap_err();
        assert!(matches!(err, Error::Validation { ref file, .. } if file == "branches.csv"));
    }

    #[test]
    fn rejects_gaps_in_branch_ids() {
        let mut bs = branches(6);
        bs[5].id = 9;
        assert!(Dataset::new(vec![], bs, vec![], Labels::default()).is_err());
    }

    #[test]
    fn rejects_visit_to_unknown_branch() {
        let mut labels = Labels::default();
        labels.visits.insert((1, 6), 2);
        let err = Dataset::new(vec![customer(1, 0.0, 0.0)], branches(6), vec![], labels).unwrap_err();
        assert!(matches!(err, Error::Validation { ref file, row: 2, .. } if file == "visits.csv"));
    }

    #[test]
    fn rejects_mixed_geolocation_within_channel() {
        let acts = vec![
            Activity {
                customer_id: 1,
                month: 1,
                channel: "POS".into(),
                geo: Some(Point::new(0.0, 0.0)),
            },
            Activity {
                customer_id: 1,
                month: 2,
                channel: "POS".into(),
                geo: None,
            },
        ];
        let err = Dataset::new(vec![customer(1, 0.0, 0.0)], branches(5), acts, Labels::default())
            .unwrap_err();
        assert!(matches!(err, Error::Validation { row: 3, .. }));
    }

    #[test]
    fn visit_vector_fills_zeros() {
        let mut labels = Labels::default();
        labels.visits.insert((2, 1), 3);
        labels.visits.insert((2, 4), 1);
        labels.visits.insert((1, 0), 0);
        let ds = Dataset::new(
            vec![customer(2, 0.0, 0.0), customer(1, 1.0, 1.0)],
            branches(5),
            vec![],
            labels,
        )
        .unwrap();
        assert_eq!(ds.visit_vector(2), vec![0, 3, 0, 0, 1]);
        assert_eq!(ds.visit_vector(1), vec![0; 5]);
        assert_eq!(ds.customer_ids(), vec![1, 2]);
        assert!(ds.labels().visits.len() == 2);
    }
}
