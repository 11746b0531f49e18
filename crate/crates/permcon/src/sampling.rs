//! Deterministic, seedable generation of uniform random permutations,
//! with-replacement index samples and Rademacher signs.
//!
//! Every draw is keyed by a [`SeedSpec`] `(master_seed, stream_id)` plus an
//! internal per-operation tag, so that a permutation, an index sample and a
//! sign vector requested under the same replicate seed come from distinct,
//! statistically independent ChaCha streams. Identical seeds reproduce
//! bit-identical output regardless of scheduling or worker count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed for one random stream: a master seed shared by a whole experiment
/// and a stream id (one per Monte Carlo replicate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_id,
        }
    }

    /// Seed for the `rep`-th replicate of an experiment rooted at `self`.
    /// Callers that run several phases under one master seed should space
    /// their base stream ids further apart than their replicate counts.
    pub fn replicate(self, rep: u64) -> Self {
        SeedSpec {
            master_seed: self.master_seed,
            stream_id: self.stream_id.wrapping_add(rep),
        }
    }
}

/// Per-operation stream tags. Distinct tags decorrelate the draws made
/// under a single replicate seed.
#[derive(Debug, Clone, Copy)]
enum StreamKind {
    Permutation = 1,
    Replacement = 2,
    Rademacher = 3,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Expand `(master_seed, stream_id, op_tag)` into a 256-bit ChaCha key via a
/// splitmix64 chain. Counter-based: no state is shared between streams.
pub(crate) fn derive_rng(seed: SeedSpec, op_tag: u64) -> ChaCha8Rng {
    let mut s = seed.master_seed;
    let _ = splitmix64(&mut s);
    s ^= seed.stream_id.wrapping_mul(0xA24B_AED4_963E_E407);
    let _ = splitmix64(&mut s);
    s ^= op_tag.wrapping_mul(0x9FB2_1C65_1E98_DF25);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn rng_for(seed: SeedSpec, kind: StreamKind) -> ChaCha8Rng {
    derive_rng(seed, kind as u64)
}

/// A uniform random permutation of `{1..n}`, stored 0-based internally.
/// Its first `m` entries are the without-replacement sample `I_1..I_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSample {
    n: usize,
    sigma: Vec<usize>,
}

impl PermutationSample {
    /// Wrap an externally supplied permutation (0-based entries).
    pub fn from_zero_based(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for &v in &sigma {
            if v >= n || seen[v] {
                return Err(Error::invalid(format!(
                    "sigma is not a permutation of 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(PermutationSample { n, sigma })
    }

    pub fn identity(n: usize) -> Self {
        PermutationSample {
            n,
            sigma: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 0-based images: `sigma()[k]` is σ(k+1) − 1.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    /// The permutation composed with the transposition of positions `i`, `j`
    /// (0-based): images at `i` and `j` are exchanged.
    pub fn with_swap(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.n || j >= self.n {
            return Err(Error::invalid(format!(
                "swap index out of range: ({i}, {j}) with n = {}",
                self.n
            )));
        }
        let mut sigma = self.sigma.clone();
        sigma.swap(i, j);
        Ok(PermutationSample { n: self.n, sigma })
    }

    /// 1-based copy, the on-disk representation.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.sigma.iter().map(|&v| v + 1).collect()
    }
}

/// An i.i.d. uniform index sample `J_1..J_m` from `{1..n}`, 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementSample {
    n: usize,
    indices: Vec<usize>,
}

impl ReplacementSample {
    pub fn from_zero_based(n: usize, indices: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("population size n must be positive"));
        }
        if indices.iter().any(|&v| v >= n) {
            return Err(Error::invalid(format!("index out of range 0..{n}")));
        }
        Ok(ReplacementSample { n, indices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    /// 0-based draws.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&v| v + 1).collect()
    }
}

/// Draw a uniform random permutation of `{1..n}`.
///
/// Unbiased swap-based shuffle: position `i` is exchanged with a uniform
/// position in `{i..n}`, giving exact uniformity over `S_n` in O(n).
pub fn draw_permutation(n: usize, seed: SeedSpec) -> Result<PermutationSample> {
    if n == 0 {
        return Err(Error::invalid("population size n must be positive"));
    }
    let mut rng = rng_for(seed, StreamKind::Permutation);
    let mut sigma: Vec<usize> = (0..n).collect();
    for i in 0..n.saturating_sub(1) {
        let j = rng.random_range(i..n);
        sigma.swap(i, j);
    }
    Ok(PermutationSample { n, sigma })
}

/// Draw `m` i.i.d. uniform indices from `{1..n}`.
pub fn draw_with_replacement(n: usize, m: usize, seed: SeedSpec) -> Result<ReplacementSample> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("both n and m must be positive"));
    }
    let mut rng = rng_for(seed, StreamKind::Replacement);
    let indices = (0..m).map(|_| rng.random_range(0..n)).collect();
    Ok(ReplacementSample { n, indices })
}

/// Draw `m` i.i.d. Rademacher (±1) signs, on a stream independent of the
/// index draws under the same seed.
pub fn draw_rademacher(m: usize, seed: SeedSpec) -> Result<Vec<i8>> {
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    let mut rng = rng_for(seed, StreamKind::Rademacher);
    Ok((0..m)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect())
}
