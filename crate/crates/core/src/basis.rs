//! Fixed-magnetization sectors of an open spin-1/2 chain.
//!
//! Total `S^z` commutes with every term of the chain Hamiltonian, so the
//! dynamics split into sectors with `k` up-spins over the all-down
//! background. Only `k <= 2` is needed for single-qubit and Bell-pair
//! transfer.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Largest chain length representable by [`Config`].
pub const MAX_SITES: usize = 64;

/// Largest supported excitation number.
pub const MAX_EXCITATIONS: usize = 2;

/// Set of up-spin sites. Sites are numbered `1..=N`; bit `s - 1` marks site `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Config(u64);

impl Config {
    pub const VACUUM: Config = Config(0);

    pub fn from_sites(sites: &[usize]) -> Self {
        Config(sites.iter().fold(0u64, |acc, &s| {
            assert!((1..=MAX_SITES).contains(&s), "site {s} out of range");
            acc | (1u64 << (s - 1))
        }))
    }

    pub fn single(site: usize) -> Self {
        Self::from_sites(&[site])
    }

    pub fn pair(a: usize, b: usize) -> Self {
        Self::from_sites(&[a, b])
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn from_bits(bits: u64) -> Self {
        Config(bits)
    }

    #[inline]
    pub fn contains(self, site: usize) -> bool {
        (1..=MAX_SITES).contains(&site) && self.0 & (1u64 << (site - 1)) != 0
    }

    #[inline]
    pub fn excitations(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Sorted 1-based sites.
    pub fn sites(self) -> Vec<usize> {
        (1..=MAX_SITES).filter(|&s| self.contains(s)).collect()
    }

    /// Moves the excitation on `from` to the empty site `to`.
    #[inline]
    pub(crate) fn hop(self, from: usize, to: usize) -> Self {
        Config(self.0 & !(1u64 << (from - 1)) | (1u64 << (to - 1)))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.sites().iter().join(","))
    }
}

/// Ordered enumeration of the `k`-excitation configurations of an `N`-site
/// chain, with the inverse lookup.
#[derive(Debug, Clone)]
pub struct ExcitationBasis {
    n_sites: usize,
    n_excitations: usize,
    configs: Vec<Config>,
    index: HashMap<Config, usize>,
}

impl ExcitationBasis {
    /// Enumerates the sector in lexicographic order of the sorted site tuple.
    pub fn new(n_sites: usize, k: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::TooFewSites(n_sites));
        }
        if n_sites > MAX_SITES {
            return Err(Error::TooManySites(n_sites));
        }
        if k > MAX_EXCITATIONS || k > n_sites {
            return Err(Error::UnsupportedSector { n_sites, k });
        }
        let configs: Vec<Config> = (1..=n_sites)
            .combinations(k)
            .map(|sites| Config::from_sites(&sites))
            .collect();
        let index = configs.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Ok(Self {
            n_sites,
            n_excitations: k,
            configs,
            index,
        })
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn n_excitations(&self) -> usize {
        self.n_excitations
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    #[inline]
    pub fn config(&self, ordinal: usize) -> Config {
        self.configs[ordinal]
    }

    pub fn index_of(&self, config: Config) -> Result<usize> {
        self.index
            .get(&config)
            .copied()
            .ok_or_else(|| Error::UnknownConfiguration(config.to_string()))
    }

    /// Lookup by 1-based site list.
    pub fn index_of_sites(&self, sites: &[usize]) -> Result<usize> {
        if sites.iter().any(|&s| s == 0 || s > self.n_sites) {
            return Err(Error::UnknownConfiguration(format!("{sites:?}")));
        }
        self.index_of(Config::from_sites(sites))
    }

    pub(crate) fn lookup(&self, config: Config) -> Option<usize> {
        self.index.get(&config).copied()
    }
}

impl PartialEq for ExcitationBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n_sites == other.n_sites && self.n_excitations == other.n_excitations
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn two_site_single_excitation() {
        let b = ExcitationBasis::new(2, 1).unwrap();
        assert_eq!(b.configs(), &[Config::single(1), Config::single(2)]);
        assert_eq!(b.index_of(Config::single(1)).unwrap(), 0);
    }

    #[test]
    fn four_site_pairs_are_lexicographic() {
        let b = ExcitationBasis::new(4, 2).unwrap();
        assert_eq!(b.dim(), 6);
        assert_eq!(b.config(0).sites(), vec![1, 2]);
        assert_eq!(b.config(5).sites(), vec![3, 4]);
        let tuples: Vec<_> = b.configs().iter().map(|c| c.sites()).collect();
        let mut sorted = tuples.clone();
        sorted.sort();
        assert_eq!(tuples, sorted);
        assert_eq!(b.index_of_sites(&[1, 2]).unwrap(), 0);
        assert_eq!(b.index_of_sites(&[3, 4]).unwrap(), 5);
    }

    #[test]
    fn ten_site_pair_sector_has_45_states() {
        assert_eq!(ExcitationBasis::new(10, 2).unwrap().dim(), 45);
    }

    #[test]
    fn vacuum_sector() {
        let b = ExcitationBasis::new(5, 0).unwrap();
        assert_eq!(b.configs(), &[Config::VACUUM]);
        assert!(b.config(0).sites().is_empty());
    }

    #[test]
    fn sector_sizes_and_round_trip() {
        for n in 2..=12 {
            for k in 0..=2 {
                let b = ExcitationBasis::new(n, k).unwrap();
                assert_eq!(b.dim(), binomial(n, k));
                for (i, &c) in b.configs().iter().enumerate() {
                    assert_eq!(b.index_of(c).unwrap(), i);
                    assert_eq!(c.excitations(), k);
                    assert!(c.sites().iter().all(|&s| (1..=n).contains(&s)));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_sectors() {
        assert_eq!(ExcitationBasis::new(1, 0).unwrap_err(), Error::TooFewSites(1));
        assert!(matches!(
            ExcitationBasis::new(10, 3),
            Err(Error::UnsupportedSector { k: 3, .. })
        ));
        assert!(matches!(
            ExcitationBasis::new(65, 1),
            Err(Error::TooManySites(65))
        ));
    }

    #[test]
    fn unknown_configuration() {
        let b = ExcitationBasis::new(4, 1).unwrap();
        assert!(matches!(
            b.index_of(Config::pair(1, 2)),
            Err(Error::UnknownConfiguration(_))
        ));
        assert!(b.index_of_sites(&[5]).is_err());
        assert!(b.index_of_sites(&[0]).is_err());
    }

    #[test]
    fn display_lists_sites() {
        assert_eq!(Config::pair(3, 7).to_string(), "{3,7}");
        assert_eq!(Config::VACUUM.to_string(), "{}");
    }
}
