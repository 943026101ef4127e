use crate::error::{Error, Result};

/// Ground field data: we work over K = Q_p with uniformizer pi = p, so every
/// norm is reported as a valuation exponent v with |z| = p^(-v).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub prime: u64,
    /// Dense digit cap N: dense scalars carry at most N base-p unit digits.
    pub precision: usize,
}

impl Config {
    pub fn new(prime: u64, precision: usize) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        if precision == 0 {
            return Err(Error::InvalidConfig("precision cap must be >= 1".into()));
        }
        Ok(Config { prime, precision })
    }
}

impl Default for Config {
    fn default() -> Self {
        Config { prime: 2, precision: 256 }
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_prime() {
        assert!(Config::new(4, 16).is_err());
        assert!(Config::new(1, 16).is_err());
        assert!(Config::new(2, 16).is_ok());
        assert!(Config::new(97, 16).is_ok());
    }

    #[test]
    fn rejects_zero_precision() {
        assert!(Config::new(5, 0).is_err());
    }
}
