//! Counter-based random streams.
//!
//! Every uniform is a pure function of `(seed, channel, replica, step, index)`,
//! so results do not depend on how replicas or sites are scheduled across
//! threads. The mixing function is the SplitMix64 finalizer; a stream at a
//! fixed key is exactly a SplitMix64 sequence addressed by its counter.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline(always)]
fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Independent purposes drawing from the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    Initial = 1,
    Forward = 2,
    Dual = 3,
    Survival = 4,
}

/// Root of all randomness for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self, channel: Channel, replica: u64) -> ReplicaStream {
        let base = mix64(self.seed.wrapping_add(GOLDEN.wrapping_mul(channel as u64)));
        ReplicaStream { key: mix64(base ^ mix64(replica.wrapping_add(0x632b_e59b_d9b4_e019))) }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReplicaStream {
    key: u64,
}

impl ReplicaStream {
    pub fn step(&self, step: u64) -> StepDraws {
        StepDraws { key: mix64(self.key.wrapping_add(GOLDEN.wrapping_mul(step.wrapping_add(1)))), next: 0 }
    }
}

/// Uniform draws for one `(replica, step)`; random access by index, or
/// sequential through [`StepDraws::next_f64`].
#[derive(Debug, Clone)]
pub struct StepDraws {
    key: u64,
    next: u64,
}

impl StepDraws {
    /// Uniform in `[0, 1)` at `index`.
    #[inline(always)]
    pub fn at(&self, index: u64) -> f64 {
        to_unit(mix64(self.key.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1)))))
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        let u = self.at(self.next);
        self.next += 1;
        u
    }
}
