//! Basis-index arithmetic.
//!
//! A basis index `x` on `n` qubits is split into the subsystem index `b`
//! (low `k` bits) and the seed `a` (high `n - k` bits), so `x = b + K * a`.
//! Site `j` is bit weight `2^j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported total qubit count.
pub const MAX_QUBITS: u32 = 30;

/// The `(n, k)` split of the full register into subsystem and seed bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct SystemShape {
    n: u32,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct RawShape {
    n: u32,
    k: u32,
}

impl TryFrom<RawShape> for SystemShape {
    type Error = Error;
    fn try_from(r: RawShape) -> Result<Self> {
        SystemShape::new(r.n, r.k)
    }
}

impl From<SystemShape> for RawShape {
    fn from(s: SystemShape) -> Self {
        RawShape { n: s.n, k: s.k }
    }
}

/// A validated computational-basis label for a given shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex(usize);

impl BasisIndex {
    pub fn value(self) -> usize {
        self.0
    }
}

impl From<BasisIndex> for usize {
    fn from(x: BasisIndex) -> usize {
        x.0
    }
}

impl SystemShape {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::domain(format!("n = {n} outside 1..={MAX_QUBITS}")));
        }
        if k == 0 || k > n {
            return Err(Error::domain(format!("k = {k} outside 1..={n}")));
        }
        Ok(SystemShape { n, k })
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of seed bits, `n - k`.
    #[inline]
    pub fn seed_bits(&self) -> u32 {
        self.n - self.k
    }

    /// Full dimension `N = 2^n`.
    #[inline]
    pub fn full_dim(&self) -> usize {
        1usize << self.n
    }

    /// Subsystem dimension `K = 2^k`.
    #[inline]
    pub fn sub_dim(&self) -> usize {
        1usize << self.k
    }

    /// Number of seeds `A = 2^(n-k)`.
    #[inline]
    pub fn num_seeds(&self) -> usize {
        1usize << (self.n - self.k)
    }

    pub fn index(&self, x: usize) -> Result<BasisIndex> {
        if x >= self.full_dim() {
            return Err(Error::domain(format!(
                "basis index {x} out of range for n = {}",
                self.n
            )));
        }
        Ok(BasisIndex(x))
    }

    /// Split `x` into `(b, a)`.
    pub fn split(&self, x: usize) -> Result<(usize, usize)> {
        self.index(x)?;
        Ok(self.split_unchecked(x))
    }

    #[inline]
    pub fn split_unchecked(&self, x: usize) -> (usize, usize) {
        (x & (self.sub_dim() - 1), x >> self.k)
    }

    pub fn join(&self, b: usize, a: usize) -> Result<usize> {
        if b >= self.sub_dim() {
            return Err(Error::domain(format!("b = {b} not below K = {}", self.sub_dim())));
        }
        if a >= self.num_seeds() {
            return Err(Error::domain(format!("a = {a} not below A = {}", self.num_seeds())));
        }
        Ok(self.join_unchecked(b, a))
    }

    #[inline]
    pub fn join_unchecked(&self, b: usize, a: usize) -> usize {
        b | (a << self.k)
    }

    pub fn check_site(&self, j: u32) -> Result<()> {
        if j >= self.n {
            return Err(Error::domain(format!("site {j} not below n = {}", self.n)));
        }
        Ok(())
    }

    /// `x XOR 2^j`.
    pub fn flip_bit(&self, x: usize, j: u32) -> Result<usize> {
        self.index(x)?;
        self.check_site(j)?;
        Ok(x ^ (1usize << j))
    }

    pub fn get_bit(&self, x: usize, j: u32) -> Result<u8> {
        self.index(x)?;
        self.check_site(j)?;
        Ok(bit(x, j))
    }
}

#[inline]
pub fn bit(x: usize, j: u32) -> u8 {
    ((x >> j) & 1) as u8
}

/// `+1.0` for bit 0, `-1.0` for bit 1.
#[inline]
pub fn parity_sign(bit: u8) -> f64 {
    if bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn split_examples() {
        let s = SystemShape::new(4, 2).unwrap();
        assert_eq!(s.split(0b1101).unwrap(), (0b01, 0b11));
        assert_eq!(s.split(0).unwrap(), (0, 0));
        assert_eq!(s.split(15).unwrap(), (3, 3));
        assert!(s.split(16).is_err());
    }

    #[test]
    fn join_examples() {
        let s = SystemShape::new(4, 2).unwrap();
        assert_eq!(s.join(1, 3).unwrap(), 0b1101);
        assert_eq!(s.join(0, 0).unwrap(), 0);
        assert!(s.join(4, 0).is_err());
        assert!(s.join(0, 4).is_err());
    }

    #[test]
    fn split_join_exhaustive() {
        for n in 1..=12 {
            for k in 1..=n {
                let s = SystemShape::new(n, k).unwrap();
                for x in 0..s.full_dim() {
                    let (b, a) = s.split(x).unwrap();
                    assert_eq!(s.join(b, a).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn flip_and_get() {
        let s = SystemShape::new(8, 3).unwrap();
        assert_eq!(s.flip_bit(0, 0).unwrap(), 1);
        assert_eq!(s.flip_bit(5, 0).unwrap(), 4);
        assert!(s.flip_bit(0, 8).is_err());
        assert_eq!(s.get_bit(4, 2).unwrap(), 1);
        assert_eq!(s.get_bit(4, 0).unwrap(), 0);
        assert!(s.get_bit(4, 8).is_err());

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = rng.gen_range(0..256);
            let j = rng.gen_range(0..8);
            assert_eq!(s.flip_bit(s.flip_bit(x, j).unwrap(), j).unwrap(), x);
            let rebuilt: usize = (0..8).map(|j| (s.get_bit(x, j).unwrap() as usize) << j).sum();
            assert_eq!(rebuilt, x);
        }
    }

    #[test]
    fn shape_validation() {
        assert!(SystemShape::new(0, 0).is_err());
        assert!(SystemShape::new(4, 5).is_err());
        assert!(SystemShape::new(31, 2).is_err());
        let s = SystemShape::new(10, 4).unwrap();
        assert_eq!((s.full_dim(), s.sub_dim(), s.num_seeds()), (1024, 16, 64));
    }
}
