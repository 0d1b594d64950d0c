//! Continuous and kicked (Floquet) time evolution inside one sector.
//!
//! Between kicks the chain evolves under `H0` (exchange plus the static
//! chirality field `E0`); each delta kick applies `exp(-i E1 D)` with `D` the
//! bare chirality operator. One period is `U1 U0` and the state just after
//! the m-th kick is `(U1 U0)^m psi(0)`.

use serde::{Deserialize, Serialize};

use crate::basis::{Config, ExcitationBasis};
use crate::chain::{build_hamiltonian, ChainParams};
use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, norm, DenseMatrix, Eigen};
use crate::scalar::{cone, czero, Scalar, C};

/// How the static field enters the between-kick propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U0Convention {
    /// `U0 = exp(-i H0 τ)` with τ multiplying every term of `H0`.
    #[default]
    HamiltonianTau,
    /// `U0 = exp(-i (H_J τ + E0 D))`: the exchange terms carry τ, the static
    /// chirality term does not.
    LiteralEq5,
}

/// Driving parameters of the kicked protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickSchedule<T: Scalar> {
    pub tau: T,
    pub e0: T,
    pub e1: T,
    pub n_kicks: usize,
    pub u0_convention: U0Convention,
}

impl<T: Scalar> KickSchedule<T> {
    pub fn new(tau: T, e0: T, e1: T, n_kicks: usize) -> Result<Self> {
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(Error::NonPositiveTau(tau.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self {
            tau,
            e0,
            e1,
            n_kicks,
            u0_convention: U0Convention::HamiltonianTau,
        })
    }

    pub fn with_convention(mut self, convention: U0Convention) -> Self {
        self.u0_convention = convention;
        self
    }

    pub fn with_tau(mut self, tau: T) -> Result<Self> {
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(Error::NonPositiveTau(tau.to_f64().unwrap_or(f64::NAN)));
        }
        self.tau = tau;
        Ok(self)
    }

    /// Elapsed time after `m` kicks.
    pub fn time_after(&self, m: usize) -> T {
        self.tau * T::of_usize(m)
    }
}

/// Where a propagator came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance<T: Scalar> {
    Continuous { t: T },
    KickStep(KickSchedule<T>),
}

/// `(N, k)` sector tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sector {
    pub n_sites: usize,
    pub n_excitations: usize,
}

impl Sector {
    pub fn of(basis: &ExcitationBasis) -> Self {
        Self {
            n_sites: basis.n_sites(),
            n_excitations: basis.n_excitations(),
        }
    }

    fn check(&self, other: &Sector) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SectorMismatch {
                expected_sites: self.n_sites,
                expected_k: self.n_excitations,
                actual_sites: other.n_sites,
                actual_k: other.n_excitations,
            })
        }
    }
}

/// Dense unitary acting on one sector.
#[derive(Debug, Clone)]
pub struct UnitaryPropagator<T: Scalar> {
    pub matrix: DenseMatrix<T>,
    pub sector: Sector,
    pub provenance: Provenance<T>,
}

impl<T: Scalar> UnitaryPropagator<T> {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn unitarity_defect(&self) -> T {
        self.matrix
            .unitarity_defect()
            .expect("propagators are square")
    }

    pub fn apply(&self, psi: &StateVector<T>) -> Result<StateVector<T>> {
        self.sector.check(&psi.sector)?;
        Ok(StateVector {
            amplitudes: self.matrix.matvec(&psi.amplitudes)?,
            sector: psi.sector,
        })
    }

    /// `⟨row|U|col⟩`.
    pub fn amplitude(&self, row: usize, col: usize) -> C<T> {
        self.matrix[(row, col)]
    }
}

/// Normalized state in one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Scalar> {
    pub amplitudes: Vec<C<T>>,
    pub sector: Sector,
}

impl<T: Scalar> StateVector<T> {
    /// Single basis configuration.
    pub fn basis_state(basis: &ExcitationBasis, config: Config) -> Result<Self> {
        let idx = basis.index_of(config)?;
        let mut amplitudes = vec![czero(); basis.dim()];
        amplitudes[idx] = cone();
        Ok(Self {
            amplitudes,
            sector: Sector::of(basis),
        })
    }

    pub fn from_amplitudes(basis: &ExcitationBasis, amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                actual: amplitudes.len(),
            });
        }
        let nrm = norm(&amplitudes);
        if (nrm - T::one()).abs() > T::tolerance(1e-10) {
            return Err(Error::NotNormalized(nrm.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self {
            amplitudes,
            sector: Sector::of(basis),
        })
    }

    pub fn norm(&self) -> T {
        norm(&self.amplitudes)
    }
}

/// `exp(-i H t)` through the eigendecomposition of `H`.
pub fn unitary_exp<T: Scalar>(
    h: &DenseMatrix<T>,
    t: T,
    basis: &ExcitationBasis,
) -> Result<UnitaryPropagator<T>> {
    if h.rows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: h.rows(),
        });
    }
    let eig = eigendecompose(h)?;
    Ok(UnitaryPropagator {
        matrix: eig.exp_i(t),
        sector: Sector::of(basis),
        provenance: Provenance::Continuous { t },
    })
}

/// Spectrum of the sector chirality operator `D = Σ (S_i × S_{i+1})^z`.
pub fn chirality_spectrum<T: Scalar>(basis: &ExcitationBasis) -> Result<Eigen<T>> {
    let d = build_hamiltonian(&ChainParams::chirality_only(basis.n_sites())?, basis)?;
    eigendecompose(&d)
}

/// The kick `U1 = exp(-i E1 D)`.
pub fn kick_operator<T: Scalar>(e1: T, basis: &ExcitationBasis) -> Result<DenseMatrix<T>> {
    Ok(chirality_spectrum(basis)?.exp_i(e1))
}

/// Between-kick propagator `U0`. `params.dm_field` is ignored in favour of
/// `schedule.e0`.
pub fn free_step<T: Scalar>(
    params: &ChainParams<T>,
    schedule: &KickSchedule<T>,
    basis: &ExcitationBasis,
) -> Result<DenseMatrix<T>> {
    // exp(-i (H_J τ + E0 D)) = exp(-i (H_J + (E0/τ) D) τ)
    let effective = match schedule.u0_convention {
        U0Convention::HamiltonianTau => schedule.e0,
        U0Convention::LiteralEq5 => schedule.e0 / schedule.tau,
    };
    let h0 = build_hamiltonian(&params.with_dm_field(effective), basis)?;
    Ok(eigendecompose(&h0)?.exp_i(schedule.tau))
}

/// One Floquet period `U1 U0`.
pub fn kick_step<T: Scalar>(
    params: &ChainParams<T>,
    schedule: &KickSchedule<T>,
    basis: &ExcitationBasis,
) -> Result<UnitaryPropagator<T>> {
    let u0 = free_step(params, schedule, basis)?;
    let u1 = kick_operator(schedule.e1, basis)?;
    kick_step_from_parts(&u0, &u1, schedule, basis)
}

/// `U1 U0` from precomputed factors; lets sweeps reuse `U1` across τ.
pub fn kick_step_from_parts<T: Scalar>(
    u0: &DenseMatrix<T>,
    u1: &DenseMatrix<T>,
    schedule: &KickSchedule<T>,
    basis: &ExcitationBasis,
) -> Result<UnitaryPropagator<T>> {
    if u0.rows() != basis.dim() || u1.rows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: u0.rows().max(u1.rows()),
        });
    }
    Ok(UnitaryPropagator {
        matrix: u1.matmul(u0)?,
        sector: Sector::of(basis),
        provenance: Provenance::KickStep(*schedule),
    })
}

/// Applies the step `m` times by repeated matrix-vector products.
pub fn evolve_kicked<T: Scalar>(
    step: &UnitaryPropagator<T>,
    m: usize,
    psi0: &StateVector<T>,
) -> Result<StateVector<T>> {
    step.sector.check(&psi0.sector)?;
    let mut psi = psi0.clone();
    for _ in 0..m {
        psi = step.apply(&psi)?;
    }
    Ok(psi)
}

/// Stroboscopic trajectory `psi(0), U psi(0), ..., U^m_max psi(0)`.
pub fn kicked_trajectory<T: Scalar>(
    step: &UnitaryPropagator<T>,
    m_max: usize,
    psi0: &StateVector<T>,
) -> Result<Vec<StateVector<T>>> {
    step.sector.check(&psi0.sector)?;
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(psi0.clone());
    for m in 0..m_max {
        let next = step.apply(&out[m])?;
        out.push(next);
    }
    Ok(out)
}

/// `⟨target|(U1 U0)^m|source⟩` for `m = 0..=m_max`.
pub fn amplitude_series<T: Scalar>(
    params: &ChainParams<T>,
    schedule: &KickSchedule<T>,
    basis: &ExcitationBasis,
    source: Config,
    target: Config,
    m_max: usize,
) -> Result<Vec<C<T>>> {
    let target_idx = basis.index_of(target)?;
    let psi0 = StateVector::basis_state(basis, source)?;
    let step = kick_step(params, schedule, basis)?;
    Ok(kicked_trajectory(&step, m_max, &psi0)?
        .iter()
        .map(|psi| psi.amplitudes[target_idx])
        .collect())
}

/// Continuous evolution from a fixed initial state, evaluated at arbitrary
/// times without rebuilding the propagator.
#[derive(Debug, Clone)]
pub struct SpectralEvolution<T: Scalar> {
    eigen: Eigen<T>,
    coefficients: Vec<C<T>>,
    sector: Sector,
}

impl<T: Scalar> SpectralEvolution<T> {
    pub fn new(h: &DenseMatrix<T>, psi0: &StateVector<T>) -> Result<Self> {
        if h.rows() != psi0.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: psi0.amplitudes.len(),
                actual: h.rows(),
            });
        }
        let eigen = eigendecompose(h)?;
        let coefficients = eigen.to_eigenbasis(&psi0.amplitudes);
        Ok(Self {
            eigen,
            coefficients,
            sector: psi0.sector,
        })
    }

    pub fn at(&self, t: T) -> StateVector<T> {
        StateVector {
            amplitudes: self.eigen.from_eigenbasis_evolved(&self.coefficients, t),
            sector: self.sector,
        }
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigen.values
    }
}
