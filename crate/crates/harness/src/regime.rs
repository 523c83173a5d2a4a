//! Sequence-length plans. A plan draws the truncation length of each
//! training sequence: the base length with probability `1 - p_r`, otherwise
//! a length from one of the deeper buckets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::record::Task;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Small enough for the test suite (trotter L <= 10, ghz n <= 6).
    #[default]
    Desk,
    /// The full lengths (trotter L <= 20, ghz n <= 10).
    Full,
}

impl std::str::FromStr for Scale {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(HarnessError::Config(format!("unknown scale `{s}`"))),
        }
    }
}

/// Lengths `min..=max`, drawn uniformly, with total probability
/// `probability`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthBucket {
    pub min: usize,
    pub max: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimePlan {
    pub task: Task,
    pub scale: Scale,
    pub p_r: f64,
    pub buckets: Vec<LengthBucket>,
}

fn bucket(min: usize, max: usize, probability: f64) -> LengthBucket {
    LengthBucket { min, max, probability }
}

impl RegimePlan {
    pub fn new(task: Task, scale: Scale, p_r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_r) {
            return Err(HarnessError::Config(format!("p_r = {p_r} outside [0, 1]")));
        }
        let q = 1.0 - p_r;
        let buckets = match (task, scale) {
            (Task::Trotter, Scale::Full) => vec![
                bucket(10, 10, q),
                bucket(11, 13, 0.5 * p_r),
                bucket(14, 17, 0.3 * p_r),
                bucket(18, 20, 0.2 * p_r),
            ],
            (Task::Trotter, Scale::Desk) => vec![
                bucket(5, 5, q),
                bucket(6, 7, 0.5 * p_r),
                bucket(8, 9, 0.3 * p_r),
                bucket(10, 10, 0.2 * p_r),
            ],
            (Task::Ghz, Scale::Full) => vec![bucket(5, 5, q), bucket(6, 8, 0.7 * p_r), bucket(9, 10, 0.3 * p_r)],
            (Task::Ghz, Scale::Desk) => vec![bucket(3, 3, q), bucket(4, 5, 0.7 * p_r), bucket(6, 6, 0.3 * p_r)],
        };
        Ok(Self { task, scale, p_r, buckets })
    }

    /// Length used with probability `1 - p_r`; deeper layers form the hard
    /// regime.
    pub fn base_length(&self) -> usize {
        self.buckets[0].max
    }

    pub fn max_length(&self) -> usize {
        self.buckets.iter().map(|b| b.max).max().unwrap_or(0)
    }

    pub fn total_probability(&self) -> f64 {
        self.buckets.iter().map(|b| b.probability).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for b in &self.buckets {
            acc += b.probability;
            if u < acc {
                return rng.random_range(b.min..=b.max);
            }
        }
        // u landed in the rounding slack above the last cumulative sum
        let last = self.buckets.iter().rev().find(|b| b.probability > 0.0).unwrap_or(&self.buckets[0]);
        rng.random_range(last.min..=last.max)
    }

    /// Expected data points of `m` sequences when every bucket contributes
    /// its maximum length.
    pub fn expected_points_at_bucket_maxima(&self, m: usize) -> f64 {
        m as f64 * self.buckets.iter().map(|b| b.probability * b.max as f64).sum::<f64>()
    }

    /// Expected data points of `m` sequences under uniform within-bucket
    /// sampling.
    pub fn expected_points(&self, m: usize) -> f64 {
        m as f64 * self.buckets.iter().map(|b| b.probability * (b.min + b.max) as f64 / 2.0).sum::<f64>()
    }

    /// Index of the bucket containing `length`.
    pub fn bucket_of(&self, length: usize) -> Option<usize> {
        self.buckets.iter().position(|b| (b.min..=b.max).contains(&length))
    }
}

/// One full-scale draw of the truncation length.
pub fn sample_max_length(task: Task, p_r: f64, seed: u64) -> Result<usize> {
    let plan = RegimePlan::new(task, Scale::Full, p_r)?;
    Ok(plan.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}
