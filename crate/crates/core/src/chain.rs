//! Couplings, impurities and sector Hamiltonians of the multiferroic chain
//!
//! ```text
//! H = -Σ J1(i,i+1) S_i·S_{i+1} - Σ J2(i,i+2) S_i·S_{i+2}
//!     + B Σ S_i^z + E Σ (S_i × S_{i+1})^z
//! ```
//!
//! with open boundaries. In the excitation picture the exchange terms give
//! an Ising diagonal plus real hopping, and the chirality term
//! `(S_i × S_j)^z = (i/2)(S_i^+ S_j^- - S_i^- S_j^+)` gives a purely
//! imaginary hopping along nearest-neighbour bonds.

use serde::{Deserialize, Serialize};

use crate::basis::ExcitationBasis;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{cplx, phase_factor, Scalar, C};

/// Per-bond exchange constants. `j1[i]` couples sites `(i+1, i+2)` and
/// `j2[i]` couples `(i+1, i+3)`, in 1-based site labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile<T: Scalar> {
    n_sites: usize,
    j1: Vec<T>,
    j2: Vec<T>,
}

impl<T: Scalar> CouplingProfile<T> {
    /// Every nearest-neighbour bond `j1`, every next-nearest bond `j2`.
    pub fn uniform(n_sites: usize, j1: T, j2: T) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::TooFewSites(n_sites));
        }
        Ok(Self {
            n_sites,
            j1: vec![j1; n_sites - 1],
            j2: vec![j2; n_sites - 2],
        })
    }

    pub fn from_bonds(n_sites: usize, j1: Vec<T>, j2: Vec<T>) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::TooFewSites(n_sites));
        }
        if j1.len() != n_sites - 1 {
            return Err(Error::BondCount {
                kind: "nearest-neighbour",
                expected: n_sites - 1,
                actual: j1.len(),
            });
        }
        if j2.len() != n_sites - 2 {
            return Err(Error::BondCount {
                kind: "next-nearest-neighbour",
                expected: n_sites - 2,
                actual: j2.len(),
            });
        }
        Ok(Self { n_sites, j1, j2 })
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn j1_bonds(&self) -> &[T] {
        &self.j1
    }

    pub fn j2_bonds(&self) -> &[T] {
        &self.j2
    }

    /// Coupling on the nearest-neighbour bond `(site, site + 1)`.
    pub fn j1(&self, site: usize) -> Option<T> {
        site.checked_sub(1).and_then(|i| self.j1.get(i)).copied()
    }

    /// Coupling on the next-nearest bond `(site, site + 2)`.
    pub fn j2(&self, site: usize) -> Option<T> {
        site.checked_sub(1).and_then(|i| self.j2.get(i)).copied()
    }

    /// Bonds `(i, j, J, chirality weight)` with 1-based `i < j`.
    fn bonds(&self) -> impl Iterator<Item = (usize, usize, T, T)> + '_ {
        let nn = self
            .j1
            .iter()
            .enumerate()
            .map(|(i, &j)| (i + 1, i + 2, j, T::one()));
        let nnn = self
            .j2
            .iter()
            .enumerate()
            .map(|(i, &j)| (i + 1, i + 3, j, T::zero()));
        nn.chain(nnn)
    }

    /// Scales the bonds around an impurity. See [`ImpuritySpec`].
    pub fn with_impurity(&self, spec: &ImpuritySpec) -> Result<Self> {
        spec.validate(self.n_sites)?;
        let mut out = self.clone();
        for (site, ratio) in spec.scaled_nn_bonds() {
            if let Some(j) = site.checked_sub(1).and_then(|i| out.j1.get_mut(i)) {
                *j *= T::of(ratio);
            }
        }
        for (site, ratio) in spec.scaled_nnn_bonds() {
            if let Some(j) = site.checked_sub(1).and_then(|i| out.j2.get_mut(i)) {
                *j *= T::of(ratio);
            }
        }
        Ok(out)
    }
}

/// Whether an impurity compresses (Type I) or elongates (Type II) the
/// surrounding bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpurityKind {
    TypeI,
    #[serde(rename = "type_ii")]
    TypeII,
}

/// One impurity embedded at `site`.
///
/// With `n = site - 1` the scaled bonds are
///
/// | bond          | Type I             | Type II            |
/// |---------------|--------------------|--------------------|
/// | (n-1, n)      | `ratio_nn`         | `ratio_nn`         |
/// | (n+2, n+3)    | `ratio_nn`         | `ratio_nn`         |
/// | (n-2, n)      | `ratio_nnn_strong` | `ratio_nnn_weak`   |
/// | (n, n+2)      | `ratio_nnn_weak`   | `ratio_nnn_strong` |
/// | (n+2, n+4)    | `ratio_nnn_strong` | `ratio_nnn_weak`   |
///
/// The impurity's own bonds `(n, n+1)`, `(n+1, n+2)`, `(n-1, n+1)` and
/// `(n+1, n+3)` keep their values. Bonds that fall off the chain are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpuritySpec {
    pub kind: ImpurityKind,
    pub site: usize,
    /// `J11/J1` for Type I (>= 1), `J111/J1` for Type II (<= 1).
    pub ratio_nn: f64,
    /// `J22/J2`, the strengthened next-nearest bond (>= 1).
    pub ratio_nnn_strong: f64,
    /// `J222/J2`, the weakened next-nearest bond (<= 1).
    pub ratio_nnn_weak: f64,
}

impl ImpuritySpec {
    /// Mid-chain site used when none is configured.
    pub fn default_site(n_sites: usize) -> usize {
        n_sites / 2 + 1
    }

    /// Ratios along a one-parameter strength ramp. `strength` is `J11/J1`
    /// for Type I and `J22/J2` for Type II; the weakened bonds follow
    /// `1 - slope·(strength - 1)`.
    pub fn from_strength(kind: ImpurityKind, site: usize, strength: f64, slope: f64) -> Self {
        let weak = 1.0 - slope * (strength - 1.0);
        match kind {
            ImpurityKind::TypeI => Self {
                kind,
                site,
                ratio_nn: strength,
                ratio_nnn_strong: strength,
                ratio_nnn_weak: weak,
            },
            ImpurityKind::TypeII => Self {
                kind,
                site,
                ratio_nn: weak,
                ratio_nnn_strong: strength,
                ratio_nnn_weak: weak,
            },
        }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.site < 2 || self.site + 1 > n_sites {
            return Err(Error::ImpuritySite {
                site: self.site,
                max: n_sites.saturating_sub(1),
            });
        }
        let ratios = [self.ratio_nn, self.ratio_nnn_strong, self.ratio_nnn_weak];
        if ratios.iter().any(|r| !r.is_finite()) {
            return Err(Error::ImpurityRatio("ratios must be finite".into()));
        }
        let nn_ok = match self.kind {
            ImpurityKind::TypeI => self.ratio_nn >= 1.0,
            ImpurityKind::TypeII => self.ratio_nn <= 1.0,
        };
        if !nn_ok {
            return Err(Error::ImpurityRatio(format!(
                "{:?} needs ratio_nn {} 1, got {}",
                self.kind,
                if self.kind == ImpurityKind::TypeI { ">=" } else { "<=" },
                self.ratio_nn
            )));
        }
        if self.ratio_nnn_strong < 1.0 {
            return Err(Error::ImpurityRatio(format!(
                "ratio_nnn_strong must be >= 1, got {}",
                self.ratio_nnn_strong
            )));
        }
        if self.ratio_nnn_weak > 1.0 {
            return Err(Error::ImpurityRatio(format!(
                "ratio_nnn_weak must be <= 1, got {}",
                self.ratio_nnn_weak
            )));
        }
        Ok(())
    }

    /// Left sites of the scaled nearest-neighbour bonds with their ratio.
    pub fn scaled_nn_bonds(&self) -> Vec<(usize, f64)> {
        let n = self.site as isize - 1;
        [n - 1, n + 2]
            .into_iter()
            .filter(|&s| s >= 1)
            .map(|s| (s as usize, self.ratio_nn))
            .collect()
    }

    /// Left sites of the scaled next-nearest bonds with their ratio.
    pub fn scaled_nnn_bonds(&self) -> Vec<(usize, f64)> {
        let n = self.site as isize - 1;
        let (outer, middle) = match self.kind {
            ImpurityKind::TypeI => (self.ratio_nnn_strong, self.ratio_nnn_weak),
            ImpurityKind::TypeII => (self.ratio_nnn_weak, self.ratio_nnn_strong),
        };
        [(n - 2, outer), (n, middle), (n + 2, outer)]
            .into_iter()
            .filter(|&(s, _)| s >= 1)
            .map(|(s, r)| (s as usize, r))
            .collect()
    }
}

/// Couplings plus the uniform fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams<T: Scalar> {
    pub profile: CouplingProfile<T>,
    /// Effective chirality (DM) field `E`.
    pub dm_field: T,
    /// Magnetic field `B` along z.
    pub b_field: T,
}

impl<T: Scalar> ChainParams<T> {
    pub fn new(profile: CouplingProfile<T>, dm_field: T, b_field: T) -> Self {
        Self {
            profile,
            dm_field,
            b_field,
        }
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.profile.n_sites()
    }

    pub fn with_dm_field(&self, dm_field: T) -> Self {
        Self {
            dm_field,
            ..self.clone()
        }
    }

    /// The bare chirality operator `Σ (S_i × S_{i+1})^z`: no exchange, no field, `E = 1`.
    pub fn chirality_only(n_sites: usize) -> Result<Self> {
        Ok(Self::new(
            CouplingProfile::uniform(n_sites, T::zero(), T::zero())?,
            T::one(),
            T::zero(),
        ))
    }
}

/// Sector Hamiltonian in the ordering of `basis`.
pub fn build_hamiltonian<T: Scalar>(
    params: &ChainParams<T>,
    basis: &ExcitationBasis,
) -> Result<DenseMatrix<T>> {
    if basis.n_sites() != params.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: params.n_sites(),
            actual: basis.n_sites(),
        });
    }
    let n = params.n_sites();
    let quarter = T::of(0.25);
    let half = T::of(0.5);
    let zeeman = params.b_field * (T::of_usize(basis.n_excitations()) - T::of_usize(n) * half);

    let mut h = DenseMatrix::zeros(basis.dim(), basis.dim());
    for (col, &config) in basis.configs().iter().enumerate() {
        let mut diag = zeeman;
        for (i, j, coupling, chirality) in params.profile.bonds() {
            let aligned = config.contains(i) == config.contains(j);
            diag += if aligned { -coupling } else { coupling } * quarter;

            if aligned {
                continue;
            }
            // One end of the bond is up: hop it across.
            let (from, to) = if config.contains(j) { (j, i) } else { (i, j) };
            let target = config.hop(from, to);
            let row = basis
                .lookup(target)
                .expect("hopping preserves the excitation number");
            // S_i^+ S_j^- (hop j -> i, i < j) carries +iE/2, the reverse -iE/2.
            let sign = if to == i { T::one() } else { -T::one() };
            h[(row, col)] += cplx(-coupling * half, sign * params.dm_field * chirality * half);
        }
        h[(col, col)] += cplx(diag, T::zero());
    }
    Ok(h)
}

/// Energy of the all-down state.
pub fn vacuum_energy<T: Scalar>(params: &ChainParams<T>) -> T {
    let bonds: T = params
        .profile
        .j1_bonds()
        .iter()
        .chain(params.profile.j2_bonds())
        .copied()
        .sum();
    -bonds * T::of(0.25) - params.b_field * T::of_usize(params.n_sites()) * T::of(0.5)
}

/// `e^{-i E_vac t}`: the all-down state only picks up a phase.
pub fn vacuum_phase<T: Scalar>(params: &ChainParams<T>, t: T) -> C<T> {
    phase_factor(vacuum_energy(params) * t)
}
