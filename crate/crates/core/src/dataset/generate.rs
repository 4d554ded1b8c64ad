//! Synthetic data with the shape of the branch-visit / card-application
//! problem. Visit rates decay exponentially with the distance between a
//! customer's residence and a branch, so location genuinely predicts visits.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};

use super::{
    write_dataset, Activity, Branch, BranchId, Customer, Dataset, Gender, Labels, Point,
    MIN_BRANCHES, MONTHS,
};
use crate::error::{Error, Result};
use crate::features::trajectory_category;
use crate::kv::KeyValues;

/// Channel names in generation order, with whether each carries coordinates.
pub const CHANNEL_CATALOG: [(&str, bool); 6] = [
    ("POS", true),
    ("WEB", false),
    ("ATM", true),
    ("MOBILE", false),
    ("BRANCH", true),
    ("PHONE", false),
];

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_customers: usize,
    pub n_branches: usize,
    /// 1..=6, taken from the front of [`CHANNEL_CATALOG`].
    pub n_channels: usize,
    /// Side length of the square map.
    pub extent: f64,
    /// Mean activities per customer per year, before the engagement factor.
    pub activity_rate: f64,
    /// Std-dev of geolocated activity positions around the residence.
    pub geo_jitter: f64,
    /// `A` in the visit rate `A * exp(-d / rho)`.
    pub visit_amplitude: f64,
    /// `rho` in the visit rate.
    pub visit_scale: f64,
    /// Expected share of customers applying for a card.
    pub positive_rate: f64,
    /// Multiplier on the card-application logit weights.
    pub label_signal: f64,
    /// Std-dev of the Gaussian noise added to the card-application logit.
    pub label_noise: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n_customers: 1000,
            n_branches: 10,
            n_channels: 4,
            extent: 100.0,
            activity_rate: 30.0,
            geo_jitter: 5.0,
            visit_amplitude: 4.0,
            visit_scale: 15.0,
            positive_rate: 0.1,
            label_signal: 1.2,
            label_noise: 0.7,
        }
    }
}

const KEYS: [&str; 11] = [
    "n_customers",
    "n_branches",
    "n_channels",
    "extent",
    "activity_rate",
    "geo_jitter",
    "visit_amplitude",
    "visit_scale",
    "positive_rate",
    "label_signal",
    "label_noise",
];

impl GenConfig {
    /// Reads a `key = value` file; missing keys keep their defaults.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.check_keys(&KEYS)?;
        let mut c = Self::default();
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = kv.get(stringify!($field))? { c.$field = v; })*
            };
        }
        take!(
            n_customers,
            n_branches,
            n_channels,
            extent,
            activity_rate,
            geo_jitter,
            visit_amplitude,
            visit_scale,
            positive_rate,
            label_signal,
            label_noise
        );
        c.validate()?;
        Ok(c)
    }

    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.insert("n_customers", self.n_customers);
        kv.insert("n_branches", self.n_branches);
        kv.insert("n_channels", self.n_channels);
        kv.insert("extent", self.extent);
        kv.insert("activity_rate", self.activity_rate);
        kv.insert("geo_jitter", self.geo_jitter);
        kv.insert("visit_amplitude", self.visit_amplitude);
        kv.insert("visit_scale", self.visit_scale);
        kv.insert("positive_rate", self.positive_rate);
        kv.insert("label_signal", self.label_signal);
        kv.insert("label_noise", self.label_noise);
        kv
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_branches < MIN_BRANCHES {
            return Err(Error::argument(format!(
                "n_branches must be at least {MIN_BRANCHES}, got {}",
                self.n_branches
            )));
        }
        if !(1..=CHANNEL_CATALOG.len()).contains(&self.n_channels) {
            return Err(Error::argument(format!(
                "n_channels must lie in 1..={}",
                CHANNEL_CATALOG.len()
            )));
        }
        let positive = [
            ("extent", self.extent),
            ("activity_rate", self.activity_rate),
            ("visit_amplitude", self.visit_amplitude),
            ("visit_scale", self.visit_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::argument(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("geo_jitter", self.geo_jitter),
            ("label_signal", self.label_signal),
            ("label_noise", self.label_noise),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::argument(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.positive_rate > 0.0 && self.positive_rate < 1.0) {
            return Err(Error::argument("positive_rate must lie in (0, 1)"));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// A flag series whose trajectory category (see
/// [`crate::features::trajectory_category`]) is `category`.
fn flags_for_category<R: Rng>(category: u8, rng: &mut R) -> [bool; MONTHS] {
    let mut flags = [false; MONTHS];
    match category {
        1 => flags = [true; MONTHS],
        2 => {}
        3 | 4 => {
            let switch = rng.random_range(1..MONTHS);
            for (t, f) in flags.iter_mut().enumerate() {
                *f = (t < switch) == (category == 3);
            }
        }
        _ => {
            // at least two switches
            let n_switches = rng.random_range(2..=4);
            let mut points: Vec<usize> = (1..MONTHS).collect();
            let (chosen, _) = points.partial_shuffle(rng, n_switches);
            let mut chosen = chosen.to_vec();
            chosen.sort_unstable();
            let mut state = rng.random_bool(0.5);
            let mut next = 0;
            for (t, f) in flags.iter_mut().enumerate() {
                if next < chosen.len() && chosen[next] == t {
                    state = !state;
                    next += 1;
                }
                *f = state;
            }
        }
    }
    flags
}

fn pick_category<R: Rng>(weights: &[f64; 5], rng: &mut R) -> u8 {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i as u8 + 1;
        }
        u -= w;
    }
    5
}

/// Generates a dataset; deterministic in `(config, seed)`.
pub fn generate(config: &GenConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extent = config.extent;

    let branches: Vec<Branch> = (0..config.n_branches)
        .map(|i| Branch {
            id: i as BranchId,
            location: Point::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent),
        })
        .collect();

    let engagement_dist = Gamma::new(2.0, 0.5).expect("valid gamma parameters");
    let mut customers = Vec::with_capacity(config.n_customers);
    let mut engagement = Vec::with_capacity(config.n_customers);
    for i in 0..config.n_customers {
        let age_cat = rng.random_range(1..=3u8);
        let income_cat = rng.random_range(1..=3u8);
        let gender = if rng.random_bool(0.5) { Gender::F } else { Gender::M };
        let residence = Point::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent);
        let wealth_cat = pick_category(&[0.2, 0.5, 0.1, 0.1, 0.1], &mut rng);
        let card_cat = pick_category(&[0.25, 0.45, 0.1, 0.1, 0.1], &mut rng);
        let wealth_flags = flags_for_category(wealth_cat, &mut rng);
        let card_flags = flags_for_category(card_cat, &mut rng);
        customers.push(Customer {
            id: i as u32 + 1,
            age_cat,
            income_cat,
            gender,
            residence,
            wealth_flags,
            card_flags,
        });
        engagement.push(engagement_dist.sample(&mut rng));
    }

    let channels = &CHANNEL_CATALOG[..config.n_channels];
    let jitter = Normal::new(0.0, config.geo_jitter).expect("jitter is finite");
    let mut activities = Vec::new();
    for (c, &e) in customers.iter().zip(&engagement) {
        let count = sample_poisson(config.activity_rate * e, &mut rng);
        for _ in 0..count {
            let month = rng.random_range(1..=MONTHS as u8);
            let (name, geolocated) = channels[rng.random_range(0..channels.len())];
            let geo = geolocated.then(|| {
                Point::new(
                    c.residence.x + jitter.sample(&mut rng),
                    c.residence.y + jitter.sample(&mut rng),
                )
            });
            activities.push(Activity {
                customer_id: c.id,
                month,
                channel: name.to_string(),
                geo,
            });
        }
    }

    let mut labels = Labels::default();
    for c in &customers {
        for b in &branches {
            let rate = config.visit_amplitude
                * (-c.residence.distance(&b.location) / config.visit_scale).exp();
            let count = sample_poisson(rate, &mut rng);
            if count > 0 {
                labels.visits.insert((c.id, b.id), count);
            }
        }
    }

    // Card-application logit: card and wealth history, income and engagement.
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let logits: Vec<f64> = customers
        .iter()
        .zip(&engagement)
        .map(|(c, &e)| {
            let card = trajectory_category(&c.card_flags)
                .expect("12 flags")
                .value();
            let wealth = trajectory_category(&c.wealth_flags)
                .expect("12 flags")
                .value();
            let mut z = match card {
                1 => 1.2,
                4 => 1.6,
                3 => -0.6,
                _ => 0.0,
            };
            if matches!(wealth, 1 | 4) {
                z += 0.5;
            }
            z += 0.5 * (c.income_cat as f64 - 2.0);
            z -= 0.3 * (c.age_cat as f64 - 2.0);
            z += 0.8 * e.ln();
            config.label_signal * z + config.label_noise * noise.sample(&mut rng)
        })
        .collect();
    let intercept = calibrate_intercept(&logits, config.positive_rate);
    for (c, z) in customers.iter().zip(&logits) {
        let applied = rng.random_bool(sigmoid(z + intercept));
        labels.applied.insert(c.id, applied);
    }

    Dataset::new(customers, branches, activities, labels)
}

fn sample_poisson<R: Rng>(rate: f64, rng: &mut R) -> u32 {
    if rate < 1e-12 {
        return 0;
    }
    let draw: f64 = Poisson::new(rate).expect("positive finite rate").sample(rng);
    draw as u32
}

/// Intercept `b` with `mean(sigmoid(z + b)) == rate`, by bisection.
fn calibrate_intercept(logits: &[f64], rate: f64) -> f64 {
    if logits.is_empty() {
        return (rate / (1.0 - rate)).ln();
    }
    let mean_at = |b: f64| logits.iter().map(|z| sigmoid(z + b)).sum::<f64>() / logits.len() as f64;
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Generates and writes the five CSV files into `dir`.
pub fn generate_to_dir(config: &GenConfig, seed: u64, dir: &Path) -> Result<Dataset> {
    let ds = generate(config, seed)?;
    write_dataset(dir, &ds)?;
    Ok(ds)
}
