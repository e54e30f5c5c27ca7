//! Seeded substream plan for reproducible parallel ensembles.
//!
//! Every random object in an experiment is drawn from a ChaCha8 stream
//! addressed by `(master seed, stream id)`. Path index `i` owns stream `i`;
//! streams used for the independent limit-law Brownian motions and for pilot
//! ensembles live in disjoint id ranges at fixed large offsets. Because a
//! stream id is a pure function of the path index, serial and parallel runs
//! produce identical ensembles for any worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stream-id offset separating path streams from limit-law (`W`) streams.
const LIMIT_OFFSET: u64 = 1 << 40;
/// Stream-id offset for pilot ensembles (design normalizers).
const PILOT_OFFSET: u64 = 2 << 40;
/// Maximum path index; keeps the three ranges disjoint.
const MAX_INDEX: u64 = (1 << 40) - 1;

/// What a substream is for. Limit sampling refuses `Path` streams so the
/// independence of the limit-law driver from the path driver is structural,
/// not assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamKind {
    Path,
    Limit,
    Pilot,
}

/// A fully addressed substream: master seed plus stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substream {
    pub master: u64,
    pub stream: u64,
    pub kind: StreamKind,
}

impl Substream {
    /// Instantiate the generator for this substream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Derives per-path substreams from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master: u64,
}

impl SeedPlan {
    pub fn new(master: u64) -> Self {
        SeedPlan { master }
    }

    /// Substream driving the Brownian path with the given ensemble index.
    pub fn path_stream(&self, index: u64) -> Substream {
        debug_assert!(index <= MAX_INDEX);
        Substream {
            master: self.master,
            stream: index,
            kind: StreamKind::Path,
        }
    }

    /// Substream for the independent limit-law Brownian array, disjoint from
    /// every path stream by construction.
    pub fn limit_stream(&self, index: u64) -> Substream {
        debug_assert!(index <= MAX_INDEX);
        Substream {
            master: self.master,
            stream: LIMIT_OFFSET + index,
            kind: StreamKind::Limit,
        }
    }

    /// Substream for pilot ensembles, disjoint from path and limit streams.
    pub fn pilot_stream(&self, index: u64) -> Substream {
        debug_assert!(index <= MAX_INDEX);
        Substream {
            master: self.master,
            stream: PILOT_OFFSET + index,
            kind: StreamKind::Pilot,
        }
    }

    /// A derived plan with an unrelated master seed, for auxiliary ensembles
    /// that must not pair with the primary one (e.g. the second sample in a
    /// two-sample comparison). SplitMix64 step keeps derivations spread out.
    pub fn derived(&self, label: u64) -> SeedPlan {
        let mut z = self
            .master
            .wrapping_add(label.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeedPlan::new(z ^ (z >> 31))
    }
}

/// Rejects a substream of the wrong kind. Used by the limit sampler to make
/// sure it was not handed the stream that generated the paths themselves.
pub fn require_kind(sub: &Substream, want: StreamKind) -> Result<()> {
    if sub.kind != want {
        return Err(Error::StreamCollision(format!(
            "expected a {:?} substream, got {:?} (stream id {})",
            want, sub.kind, sub.stream
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_deterministic() {
        let plan = SeedPlan::new(7);
        let a: Vec<u64> = plan.path_stream(3).rng().random_iter().take(8).collect();
        let b: Vec<u64> = plan.path_stream(3).rng().random_iter().take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ_across_indices_and_kinds() {
        let plan = SeedPlan::new(7);
        let a: u64 = plan.path_stream(1).rng().random();
        let b: u64 = plan.path_stream(2).rng().random();
        let c: u64 = plan.limit_stream(1).rng().random();
        let d: u64 = plan.pilot_stream(1).rng().random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(c, d);
    }

    #[test]
    fn kind_check_rejects_path_streams() {
        let plan = SeedPlan::new(7);
        assert!(require_kind(&plan.path_stream(0), StreamKind::Limit).is_err());
        assert!(require_kind(&plan.limit_stream(0), StreamKind::Limit).is_ok());
    }

    #[test]
    fn derived_plans_do_not_share_streams() {
        let plan = SeedPlan::new(42);
        let other = plan.derived(1);
        assert_ne!(plan.master, other.master);
        let a: u64 = plan.path_stream(0).rng().random();
        let b: u64 = other.path_stream(0).rng().random();
        assert_ne!(a, b);
    }
}
