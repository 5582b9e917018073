use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Search limits for one pattern evaluation.
///
/// The first attempt uses `max_hops`. If it exceeds `time_limit`, each
/// `ladder` cap below the current one is tried in order, each with a fresh
/// time limit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    #[serde(with = "secs")]
    pub time_limit: Duration,
    pub max_hops: Option<u32>,
    pub ladder: Vec<u32>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            time_limit: Duration::from_secs(1800),
            max_hops: None,
            ladder: vec![64, 32, 16, 8],
        }
    }
}

impl Budget {
    pub fn with_time_limit(mut self, d: Duration) -> Self {
        self.time_limit = d;
        self
    }

    pub fn with_ladder(mut self, ladder: Vec<u32>) -> Self {
        self.ladder = ladder;
        self
    }

    pub fn with_max_hops(mut self, cap: Option<u32>) -> Self {
        self.max_hops = cap;
        self
    }

    /// Hop caps in the order they are attempted.
    pub fn attempts(&self) -> Vec<Option<u32>> {
        let mut out = vec![self.max_hops];
        let mut current = self.max_hops;
        for &c in &self.ladder {
            if current.is_none_or(|cur| c < cur) {
                out.push(Some(c));
                current = Some(c);
            }
        }
        out
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ladder_order() {
        let b = Budget::default();
        assert_eq!(b.time_limit, Duration::from_secs(1800));
        assert_eq!(b.attempts(), vec![None, Some(64), Some(32), Some(16), Some(8)]);
    }

    #[test]
    fn ladder_skips_caps_above_the_current_one() {
        let b = Budget::default().with_max_hops(Some(20));
        assert_eq!(b.attempts(), vec![Some(20), Some(16), Some(8)]);
    }
}
