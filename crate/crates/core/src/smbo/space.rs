use std::path::Path;

use crate::error::{Error, Result};
use crate::gbdt::HyperConfig;
use crate::kv::KeyValues;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dimension {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
    pub integer: bool,
}

impl Dimension {
    pub fn new(name: &str, lower: f64, upper: f64, scale: Scale, integer: bool) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::argument(format!("{name}: need finite lower < upper")));
        }
        if scale == Scale::Log && lower <= 0.0 {
            return Err(Error::argument(format!("{name}: log-scale bounds must be positive")));
        }
        Ok(Self {
            name: name.to_string(),
            lower,
            upper,
            scale,
            integer,
        })
    }

    fn warp(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => v,
            Scale::Log => v.ln(),
        }
    }

    pub fn normalize(&self, v: f64) -> Result<f64> {
        if !(v >= self.lower && v <= self.upper) {
            return Err(Error::argument(format!(
                "{} = {v} outside [{}, {}]",
                self.name, self.lower, self.upper
            )));
        }
        let (lo, hi) = (self.warp(self.lower), self.warp(self.upper));
        Ok(((self.warp(v) - lo) / (hi - lo)).clamp(0.0, 1.0))
    }

    /// Maps `u` (clamped to [0, 1]) back to the parameter scale; integer
    /// dimensions round half up.
    pub fn denormalize(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let v = if u == 0.0 {
            self.lower
        } else if u == 1.0 {
            self.upper
        } else {
            let (lo, hi) = (self.warp(self.lower), self.warp(self.upper));
            let w = lo + u * (hi - lo);
            match self.scale {
                Scale::Linear => w,
                Scale::Log => w.exp(),
            }
        };
        let v = if self.integer { (v + 0.5).floor() } else { v };
        v.clamp(self.lower, self.upper)
    }
}

/// Box-shaped hyperparameter domain; points are optimised in `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub dims: Vec<Dimension>,
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::argument("search space has no dimensions"));
        }
        for (i, d) in dims.iter().enumerate() {
            if dims[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::argument(format!("duplicate dimension {}", d.name)));
            }
        }
        Ok(Self { dims })
    }

    /// The boosting search space; `pos_weight_multiplier` only for the
    /// card-application task.
    pub fn gbdt(with_pos_weight: bool) -> Self {
        use Scale::*;
        let mut dims = vec![
            Dimension::new("n_trees", 50.0, 500.0, Log, true),
            Dimension::new("eta", 0.01, 0.3, Log, false),
            Dimension::new("max_depth", 2.0, 10.0, Linear, true),
            Dimension::new("min_child_weight", 1.0, 100.0, Log, false),
            Dimension::new("lambda_l2", 1e-3, 10.0, Log, false),
            Dimension::new("subsample", 0.5, 1.0, Linear, false),
            Dimension::new("colsample", 0.5, 1.0, Linear, false),
        ];
        if with_pos_weight {
            dims.push(Dimension::new("pos_weight_multiplier", 0.5, 2.0, Log, false));
        }
        Self {
            dims: dims.into_iter().map(|d| d.expect("static bounds")).collect(),
        }
    }

    /// Unit cube of dimension `d`, named `x0..`.
    pub fn unit_cube(d: usize) -> Self {
        Self {
            dims: (0..d)
                .map(|i| Dimension::new(&format!("x{i}"), 0.0, 1.0, Scale::Linear, false).expect("unit bounds"))
                .collect(),
        }
    }

    /// Parses lines of the form `name = lower upper [log] [int]`.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let mut dims = Vec::new();
        for (name, spec) in kv.iter() {
            let tokens: Vec<&str> = spec.split_whitespace().collect();
            if tokens.len() < 2 {
                return Err(Error::argument(format!("{name}: expected `lower upper [log] [int]`")));
            }
            let parse = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| Error::argument(format!("{name}: bad bound `{t}`")))
            };
            let (lower, upper) = (parse(tokens[0])?, parse(tokens[1])?);
            let mut scale = Scale::Linear;
            let mut integer = false;
            for flag in &tokens[2..] {
                match *flag {
                    "log" => scale = Scale::Log,
                    "linear" => scale = Scale::Linear,
                    "int" => integer = true,
                    "real" => integer = false,
                    other => return Err(Error::argument(format!("{name}: unknown flag `{other}`"))),
                }
            }
            dims.push(Dimension::new(name, lower, upper, scale, integer)?);
        }
        Self::new(dims)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_key_values(&KeyValues::read(path)?)
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn normalize(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        self.dims.iter().zip(values).map(|(d, &v)| d.normalize(v)).collect()
    }

    pub fn denormalize(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_len(point.len())?;
        Ok(self.dims.iter().zip(point).map(|(d, &u)| d.denormalize(u)).collect())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dims.len() {
            return Err(Error::argument(format!("expected {} coordinates, got {n}", self.dims.len())));
        }
        Ok(())
    }

    /// Overrides the named fields of `base` with `values`.
    pub fn to_hyper_config(&self, values: &[f64], base: &HyperConfig) -> Result<HyperConfig> {
        self.check_len(values.len())?;
        let mut c = base.clone();
        for (d, &v) in self.dims.iter().zip(values) {
            match d.name.as_str() {
                "n_trees" => c.n_trees = v.round() as usize,
                "eta" => c.eta = v,
                "max_depth" => c.max_depth = v.round() as usize,
                "min_child_weight" => c.min_child_weight = v,
                "lambda_l2" => c.lambda_l2 = v,
                "subsample" => c.subsample = v,
                "colsample" => c.colsample = v,
                "pos_weight_multiplier" => c.pos_weight_multiplier = v,
                other => return Err(Error::argument(format!("`{other}` is not a boosting hyperparameter"))),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bounds_map_to_unit_interval_ends() {
        let space = SearchSpace::gbdt(true);
        let lower: Vec<f64> = space.dims.iter().map(|d| d.lower).collect();
        let upper: Vec<f64> = space.dims.iter().map(|d| d.upper).collect();
        assert!(space.normalize(&lower).unwrap().iter().all(|&u| u == 0.0));
        assert!(space.normalize(&upper).unwrap().iter().all(|&u| u == 1.0));
        assert_eq!(space.denormalize(&[0.0; 8]).unwrap(), lower);
        assert_eq!(space.denormalize(&[1.0; 8]).unwrap(), upper);
    }

    #[test]
    fn log_midpoint_is_geometric_mean() {
        let d = Dimension::new("eta", 0.01, 0.3, Scale::Log, false).unwrap();
        assert!((d.denormalize(0.5) - (0.01f64 * 0.3).sqrt()).abs() < 1e-15);
        assert!((d.denormalize(0.5) - 0.0548).abs() < 1e-4);
    }

    #[test]
    fn integers_round_half_up() {
        let d = Dimension::new("depth", 2.0, 10.0, Scale::Linear, true).unwrap();
        assert_eq!(d.denormalize(0.0625), 3.0); // 2.5
        assert_eq!(d.denormalize(0.06), 2.0);
    }

    #[test]
    fn rejects_out_of_bounds_and_bad_dims() {
        let space = SearchSpace::gbdt(false);
        let mut v = space.denormalize(&[0.5; 7]).unwrap();
        v[1] = 0.5;
        assert!(space.normalize(&v).is_err());
        assert!(Dimension::new("a", 1.0, 1.0, Scale::Linear, false).is_err());
        assert!(Dimension::new("a", 0.0, 1.0, Scale::Log, false).is_err());
    }

    #[test]
    fn parses_space_file() {
        let kv = KeyValues::parse("eta = 0.01 0.3 log\nmax_depth = 2 8 int\n").unwrap();
        let space = SearchSpace::from_key_values(&kv).unwrap();
        assert_eq!(space.names(), ["eta", "max_depth"]);
        assert_eq!(space.dims[0].scale, Scale::Log);
        assert!(space.dims[1].integer);
        let c = space.to_hyper_config(&[0.05, 4.0], &HyperConfig::default()).unwrap();
        assert_eq!((c.eta, c.max_depth), (0.05, 4));
        assert!(SearchSpace::from_key_values(&KeyValues::parse("eta = 0.1 0.2 cubic").unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn denormalize_normalize_round_trip(u in proptest::collection::vec(0.0f64..=1.0, 8)) {
            let space = SearchSpace::gbdt(true);
            let c = space.denormalize(&u).unwrap();
            let back = space.denormalize(&space.normalize(&c).unwrap()).unwrap();
            for ((d, a), b) in space.dims.iter().zip(&c).zip(&back) {
                if d.integer {
                    prop_assert_eq!(a, b);
                } else {
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs());
                }
            }
        }
    }
}
