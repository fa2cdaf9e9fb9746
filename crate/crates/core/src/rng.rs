//! Path-derived random streams.
//!
//! A stream is a 32-byte key. Children hash the parent key together with a
//! label, so any (seed, path) pair names one generator and siblings never share
//! state. Generators are ChaCha8 keyed directly by the stream key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Stream {
    key: [u8; 32],
}

/// One component of a stream path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Name(String),
    Index(u64),
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Name(s.to_owned())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label::Name(s)
    }
}

impl From<u64> for Label {
    fn from(i: u64) -> Self {
        Label::Index(i)
    }
}

impl From<usize> for Label {
    fn from(i: usize) -> Self {
        Label::Index(i as u64)
    }
}

impl Stream {
    pub fn root(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"sconcave-stream");
        h.update(seed.to_le_bytes());
        Self { key: h.finalize().into() }
    }

    pub fn child(&self, label: impl Into<Label>) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        // Tag byte keeps Name("1") and Index(1) apart.
        match label.into() {
            Label::Name(s) => {
                h.update([0u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
            Label::Index(i) => {
                h.update([1u8]);
                h.update(i.to_le_bytes());
            }
        }
        Self { key: h.finalize().into() }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }
}

/// The stream named by `path` under `seed`; the empty path is the root.
pub fn derive_stream<I, L>(seed: u64, path: I) -> Stream
where
    I: IntoIterator<Item = L>,
    L: Into<Label>,
{
    path.into_iter().fold(Stream::root(seed), |s, l| s.child(l))
}

/// Points per shard in sharded Monte Carlo work.
pub const SHARD: usize = 65_536;

/// Splits `count` items into fixed-size shards, runs `work(len, rng)` on each
/// with the generator of `stream.child(shard_index)`, and returns the results in
/// shard order. The output does not depend on how many threads run the shards.
pub fn sharded<T, F>(count: usize, stream: &Stream, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    let shards = count.div_ceil(SHARD);
    let run = |i: usize| {
        let len = SHARD.min(count - i * SHARD);
        work(len, &mut stream.child(i as u64).rng())
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..shards).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..shards).map(run).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_path_same_draws() {
        let a: Vec<u64> = {
            let mut r = derive_stream(7, ["round", "band-fill"]).rng();
            (0..1000).map(|_| r.random()).collect()
        };
        let mut r = derive_stream(7, ["round", "band-fill"]).rng();
        assert!(a.iter().all(|&x| x == r.random::<u64>()));
    }

    #[test]
    fn sharding_covers_every_item_in_order() {
        let s = Stream::root(1);
        let lens = sharded(2 * SHARD + 5, &s, |len, _| len);
        assert_eq!(lens, vec![SHARD, SHARD, 5]);
        let first = sharded(SHARD + 1, &s, |_, r| r.random::<u64>());
        assert_eq!(first[1], s.child(1u64).rng().random::<u64>());
    }

    #[test]
    fn empty_path_is_root() {
        assert_eq!(derive_stream::<_, Label>(3, []), Stream::root(3));
        assert_ne!(Stream::root(3), Stream::root(4));
    }

    #[test]
    fn name_and_index_labels_differ() {
        let r = Stream::root(0);
        assert_ne!(r.child("1"), r.child(1u64));
    }

    #[test]
    fn siblings_pass_chi_square_independence() {
        // 4x4 contingency table of paired draws from two sibling streams.
        let root = Stream::root(11);
        let (mut a, mut b) = (root.child(0u64).rng(), root.child(1u64).rng());
        let mut table = [[0f64; 4]; 4];
        let n = 10_000;
        for _ in 0..n {
            let i = (a.random::<u32>() >> 30) as usize;
            let j = (b.random::<u32>() >> 30) as usize;
            table[i][j] += 1.0;
        }
        let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..4).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        let mut chi2 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let e = rows[i] * cols[j] / n as f64;
                chi2 += (table[i][j] - e).powi(2) / e;
            }
        }
        // 1% critical value for 9 degrees of freedom.
        assert!(chi2 < 21.666, "chi2 = {chi2}");
    }
}
