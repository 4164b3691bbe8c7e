//! Random subsystem-embedded dynamics (RSED).
//!
//! A `k`-qubit unitary `u` is embedded into every one of the `2^(n-k)` seed
//! blocks of an `n`-qubit register through a random permutation `p` and
//! a random sign function `f`:
//!
//! `U = sum_a O_a u O_a^dagger`, with `O_a = sum_b (-1)^{f(ba)} |p(ba)><ba|`.
//!
//! The crate builds these operators, applies them blockwise, and computes
//! out-of-time-ordered correlators, spectral statistics and
//! pseudorandom-state diagnostics with brute-force oracles for small sizes.

pub mod bitcore;
pub mod circuits;
pub mod experiments;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod otoc;
pub mod prs;
pub mod randomness;
pub mod spectra;
pub mod subsystem;

pub use num_complex::Complex64 as C64;

pub use bitcore::{BasisIndex, SystemShape};
pub use error::{Error, Result};
pub use randomness::{PermutationBackend, RngSeed, SignBackend, SignFunction, SubsetPermutation};
pub use operator::{DenseEvolution, Evolution, PauliAxis, PauliString, RsedOperator, StateVector};
pub use subsystem::{SubHamiltonian, SubUnitary};
