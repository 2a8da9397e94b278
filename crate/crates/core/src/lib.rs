//! Toolkit for the ferromagnetic Ashkin–Teller (AT) model on the rotated
//! square lattice and its random-cluster representation (ATRC).
//!
//! The crate is organised around three layers:
//!
//! * exact machinery — lattice/domain construction ([`lattice`]), Gibbs
//!   weights and parameter transformations ([`measures`]), and a brute-force
//!   enumeration oracle ([`oracle`]) that certifies identities to machine
//!   precision on tiny domains;
//! * configuration-level couplings between the spin, edge, loop and height
//!   pictures ([`couplings`]);
//! * Monte Carlo samplers and estimators for desk-scale experiments
//!   ([`simulate`]), wired to a command-line driver ([`cli`]).

pub mod cli;
pub mod couplings;
pub mod error;
pub mod lattice;
pub mod measures;
pub mod oracle;
pub mod simulate;
pub mod stream;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Compensated (Kahan) accumulator for long partition sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }

    /// Merges another accumulator, keeping the compensation term.
    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.carry);
    }
}

#[cfg(test)]
mod tests {
    use super::KahanSum;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..1_000_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-10)).abs() < 1e-13);
    }
}
