//! Seeded permutations `p`, sign functions `f`, and the bit-flip partner
//! maps built on them.

pub mod feistel;
pub mod sidecar;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitcore::SystemShape;
use crate::error::{Error, Result};
pub use feistel::{keyed_mix, mix64, FeistelNetwork};

/// Largest `n` for which explicit tables are allowed.
pub const MAX_TABLE_QUBITS: u32 = 24;
/// Largest `n` for which the default backend is an explicit table.
pub const DEFAULT_TABLE_QUBITS: u32 = 16;
pub const DEFAULT_FEISTEL_ROUNDS: u32 = 4;

/// Well-known stream identifiers so independent objects drawn from the
/// same user seed never share a ChaCha stream.
pub mod streams {
    pub const PERMUTATION: u64 = 1;
    pub const SIGN: u64 = 2;
    pub const SUB_SIGN: u64 = 3;
    pub const COUPLINGS: u64 = 4;
    pub const SAMPLING: u64 = 5;
    pub const PROBES: u64 = 6;
    pub const CLIFFORD: u64 = 7;
    pub const ENSEMBLE: u64 = 8;
}

/// A `(seed, stream)` pair; identical pairs reproduce identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Derive the seed of the `i`-th member of an ensemble.
    pub fn child(&self, i: u64) -> RngSeed {
        RngSeed {
            seed: mix64(self.seed ^ mix64(i.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream: self.stream,
        }
    }
}

/// Which permutation backend to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PermutationBackend {
    /// Explicit table for small `n`, Feistel otherwise.
    #[default]
    Auto,
    ExplicitTable,
    Feistel { rounds: u32 },
    Identity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PermKind {
    Identity,
    Table { forward: Vec<u32>, inverse: Vec<u32> },
    Feistel(FeistelNetwork),
}

/// A bijection of `[0, 2^n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPermutation {
    shape: SystemShape,
    kind: PermKind,
}

impl SubsetPermutation {
    pub fn identity(shape: SystemShape) -> Self {
        SubsetPermutation { shape, kind: PermKind::Identity }
    }

    /// Draw a permutation. The explicit table is a Fisher-Yates shuffle
    /// run from the top: for `i = N-1` down to `1`, swap slot `i` with
    /// `j = gen_range(0..=i)` drawn as a `u64`.
    pub fn sample(shape: SystemShape, seed: RngSeed, backend: PermutationBackend) -> Result<Self> {
        let backend = match backend {
            PermutationBackend::Auto if shape.n() <= DEFAULT_TABLE_QUBITS => {
                PermutationBackend::ExplicitTable
            }
            PermutationBackend::Auto => PermutationBackend::Feistel { rounds: DEFAULT_FEISTEL_ROUNDS },
            b => b,
        };
        let mut rng = seed.rng();
        let kind = match backend {
            PermutationBackend::Identity => PermKind::Identity,
            PermutationBackend::ExplicitTable => {
                if shape.n() > MAX_TABLE_QUBITS {
                    return Err(Error::capacity(format!(
                        "explicit permutation table limited to n <= {MAX_TABLE_QUBITS}, got {}",
                        shape.n()
                    )));
                }
                let size = shape.full_dim();
                let mut forward: Vec<u32> = (0..size as u32).collect();
                for i in (1..size).rev() {
                    let j = rng.gen_range(0..=i as u64) as usize;
                    forward.swap(i, j);
                }
                let inverse = invert_table(&forward);
                PermKind::Table { forward, inverse }
            }
            PermutationBackend::Feistel { rounds } => {
                if rounds == 0 {
                    return Err(Error::domain("Feistel network needs at least one round"));
                }
                let keys = (0..rounds).map(|_| rng.gen::<u64>()).collect();
                PermKind::Feistel(FeistelNetwork::new(shape.n(), keys))
            }
            PermutationBackend::Auto => unreachable!(),
        };
        Ok(SubsetPermutation { shape, kind })
    }

    pub fn from_table(shape: SystemShape, forward: Vec<u32>) -> Result<Self> {
        if forward.len() != shape.full_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", shape.full_dim()),
                got: format!("{} entries", forward.len()),
            });
        }
        let mut seen = vec![false; forward.len()];
        for &v in &forward {
            let v = v as usize;
            if v >= forward.len() || seen[v] {
                return Err(Error::validation("table is not a bijection"));
            }
            seen[v] = true;
        }
        let inverse = invert_table(&forward);
        Ok(SubsetPermutation { shape, kind: PermKind::Table { forward, inverse } })
    }

    pub fn from_feistel(shape: SystemShape, network: FeistelNetwork) -> Self {
        SubsetPermutation { shape, kind: PermKind::Feistel(network) }
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn feistel(&self) -> Option<&FeistelNetwork> {
        match &self.kind {
            PermKind::Feistel(f) => Some(f),
            _ => None,
        }
    }

    pub fn backend_name(&self) -> &'static str {
        match self.kind {
            PermKind::Identity => "identity",
            PermKind::Table { .. } => "explicit_table",
            PermKind::Feistel(_) => "feistel",
        }
    }

    pub fn permute(&self, x: usize) -> Result<usize> {
        self.shape.index(x)?;
        Ok(self.permute_unchecked(x))
    }

    pub fn invert(&self, y: usize) -> Result<usize> {
        self.shape.index(y)?;
        Ok(self.invert_unchecked(y))
    }

    #[inline]
    pub fn permute_unchecked(&self, x: usize) -> usize {
        match &self.kind {
            PermKind::Identity => x,
            PermKind::Table { forward, .. } => forward[x] as usize,
            PermKind::Feistel(f) => f.forward(x),
        }
    }

    #[inline]
    pub fn invert_unchecked(&self, y: usize) -> usize {
        match &self.kind {
            PermKind::Identity => y,
            PermKind::Table { inverse, .. } => inverse[y] as usize,
            PermKind::Feistel(f) => f.inverse(y),
        }
    }

    /// Images `p(join(b, a))` for every `b` of seed block `a`.
    pub fn block_images(&self, a: usize, out: &mut [usize]) {
        for (b, slot) in out.iter_mut().enumerate() {
            *slot = self.permute_unchecked(self.shape.join_unchecked(b, a));
        }
    }

    /// The forward table, materialized if necessary (`n <= 24`).
    pub fn forward_table(&self) -> Result<Vec<u32>> {
        if self.shape.n() > MAX_TABLE_QUBITS {
            return Err(Error::capacity("table export limited to n <= 24"));
        }
        Ok(match &self.kind {
            PermKind::Table { forward, .. } => forward.clone(),
            _ => (0..self.shape.full_dim()).map(|x| self.permute_unchecked(x) as u32).collect(),
        })
    }

    pub fn save_sidecar(&self, path: &Path) -> Result<()> {
        sidecar::write_table(path, self.shape, &self.forward_table()?)
    }

    pub fn load_sidecar(path: &Path) -> Result<Self> {
        let (shape, forward) = sidecar::read_table(path)?;
        Self::from_table(shape, forward)
    }

    /// `(x_j, y_j)` with `p(join(x_j, y_j)) = p(join(b, a)) XOR 2^j`.
    pub fn bitflip_partner(&self, b: usize, a: usize, j: u32) -> Result<(usize, usize)> {
        let x = self.shape.join(b, a)?;
        self.shape.check_site(j)?;
        Ok(self.bitflip_partner_unchecked(x, j))
    }

    #[inline]
    fn bitflip_partner_unchecked(&self, x: usize, j: u32) -> (usize, usize) {
        let y = self.invert_unchecked(self.permute_unchecked(x) ^ (1usize << j));
        self.shape.split_unchecked(y)
    }

    /// Number of `(b, a)` whose bit-`j` partner stays in seed block `a`.
    pub fn count_seed_fixed_points(&self, j: u32, mode: CountMode) -> Result<FixedPointCount> {
        self.shape.check_site(j)?;
        let shape = self.shape;
        let stays = |x: usize| {
            let (_, a) = shape.split_unchecked(x);
            self.bitflip_partner_unchecked(x, j).1 == a
        };
        match mode {
            CountMode::Exact => {
                if shape.n() > 20 {
                    return Err(Error::capacity("exact fixed-point count limited to n <= 20"));
                }
                let count = (0..shape.full_dim()).into_par_iter().filter(|&x| stays(x)).count();
                Ok(FixedPointCount { estimate: count as f64, std_error: 0.0, samples: shape.full_dim() })
            }
            CountMode::MonteCarlo { samples, seed } => {
                if samples < 2 {
                    return Err(Error::domain("Monte-Carlo count needs at least two samples"));
                }
                let mut rng = seed.rng();
                let hits = (0..samples)
                    .filter(|_| stays(rng.gen_range(0..shape.full_dim())))
                    .count() as f64;
                let m = samples as f64;
                let mean = hits / m;
                let var = (hits - m * mean * mean) / (m - 1.0);
                let big_n = shape.full_dim() as f64;
                Ok(FixedPointCount {
                    estimate: big_n * mean,
                    std_error: big_n * (var.max(0.0) / m).sqrt(),
                    samples,
                })
            }
        }
    }
}

fn invert_table(forward: &[u32]) -> Vec<u32> {
    let mut inverse = vec![0u32; forward.len()];
    for (x, &y) in forward.iter().enumerate() {
        inverse[y as usize] = x as u32;
    }
    inverse
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    MonteCarlo { samples: usize, seed: RngSeed },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointCount {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Which sign-function backend to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SignBackend {
    #[default]
    Auto,
    ExplicitTable,
    KeyedPrf,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SignKind {
    Zero,
    Table(Vec<u64>),
    KeyedPrf(u64),
}

/// A deterministic bit `f(x)` on `[0, 2^n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFunction {
    shape: SystemShape,
    kind: SignKind,
}

impl SignFunction {
    pub fn zero(shape: SystemShape) -> Self {
        SignFunction { shape, kind: SignKind::Zero }
    }

    pub fn sample(shape: SystemShape, seed: RngSeed, backend: SignBackend) -> Result<Self> {
        let backend = match backend {
            SignBackend::Auto if shape.n() <= DEFAULT_TABLE_QUBITS => SignBackend::ExplicitTable,
            SignBackend::Auto => SignBackend::KeyedPrf,
            b => b,
        };
        let mut rng = seed.rng();
        let kind = match backend {
            SignBackend::Zero => SignKind::Zero,
            SignBackend::ExplicitTable => {
                if shape.n() > MAX_TABLE_QUBITS {
                    return Err(Error::capacity("explicit sign table limited to n <= 24"));
                }
                let words = shape.full_dim().div_ceil(64);
                let mut bits: Vec<u64> = (0..words).map(|_| rng.gen()).collect();
                let tail = shape.full_dim() % 64;
                if tail != 0 {
                    *bits.last_mut().unwrap() &= (1u64 << tail) - 1;
                }
                SignKind::Table(bits)
            }
            SignBackend::KeyedPrf => SignKind::KeyedPrf(rng.gen()),
            SignBackend::Auto => unreachable!(),
        };
        Ok(SignFunction { shape, kind })
    }

    /// Build from an explicit list of bits, one per basis index.
    pub fn from_bits(shape: SystemShape, bits: &[u8]) -> Result<Self> {
        if bits.len() != shape.full_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} bits", shape.full_dim()),
                got: format!("{} bits", bits.len()),
            });
        }
        let mut words = vec![0u64; shape.full_dim().div_ceil(64)];
        for (x, &v) in bits.iter().enumerate() {
            if v & 1 == 1 {
                words[x / 64] |= 1 << (x % 64);
            }
        }
        Ok(SignFunction { shape, kind: SignKind::Table(words) })
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn backend_name(&self) -> &'static str {
        match self.kind {
            SignKind::Zero => "zero",
            SignKind::Table(_) => "explicit_table",
            SignKind::KeyedPrf(_) => "keyed_prf",
        }
    }

    pub fn sign(&self, x: usize) -> Result<u8> {
        self.shape.index(x)?;
        Ok(self.sign_unchecked(x))
    }

    #[inline]
    pub fn sign_unchecked(&self, x: usize) -> u8 {
        match &self.kind {
            SignKind::Zero => 0,
            SignKind::Table(words) => ((words[x / 64] >> (x % 64)) & 1) as u8,
            SignKind::KeyedPrf(key) => (keyed_mix(*key, x as u64) >> 63) as u8,
        }
    }

    /// `(-1)^{f(x)}`.
    #[inline]
    pub fn factor(&self, x: usize) -> f64 {
        crate::bitcore::parity_sign(self.sign_unchecked(x))
    }
}
