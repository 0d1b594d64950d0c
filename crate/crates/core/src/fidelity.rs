//! Transfer fidelities.
//!
//! Closed forms take transition amplitudes between sender and receiver
//! sites. The direct oracle instead builds the output state of the whole
//! chain, traces out everything except the receivers and overlaps with the
//! input state; it is the independent check on the closed forms.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{Config, ExcitationBasis};
use crate::chain::{build_hamiltonian, ChainParams};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::propagator::{evolve_kicked, kick_step, unitary_exp, KickSchedule, StateVector};
use crate::scalar::{cplx, czero, Scalar, C};

/// Which input state is being transferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateTag {
    /// Single qubit `α|0⟩ + β|1⟩` on site 1, received on site N.
    Omega0,
    /// `b|01⟩ + c|10⟩` on sites (1, 2), received on (N-1, N).
    Omega1,
    /// `a|00⟩ + d|11⟩` on sites (1, 2), received on (N-1, N).
    Omega2,
}

impl StateTag {
    pub const ALL: [StateTag; 3] = [StateTag::Omega0, StateTag::Omega1, StateTag::Omega2];

    pub fn as_str(self) -> &'static str {
        match self {
            StateTag::Omega0 => "omega0",
            StateTag::Omega1 => "omega1",
            StateTag::Omega2 => "omega2",
        }
    }
}

impl fmt::Display for StateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reading of the last term of the two-excitation Bell formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Omega2Convention {
    /// `Re[g]`, the real part of the complex amplitude.
    #[default]
    ReAmplitude,
    /// `|g|`.
    AbsAmplitude,
}

/// Phase reference for transition amplitudes fed to the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeGauge {
    /// Divide by the all-down phase, i.e. measure energies from the vacuum.
    #[default]
    VacuumReferenced,
    /// Use `⟨r|U|s⟩` as computed.
    Raw,
}

impl AmplitudeGauge {
    pub fn apply<T: Scalar>(self, amplitude: C<T>, vacuum: C<T>) -> C<T> {
        match self {
            AmplitudeGauge::VacuumReferenced => amplitude * vacuum.conj(),
            AmplitudeGauge::Raw => amplitude,
        }
    }
}

/// Fidelity below which a quantum channel is no better than a classical one.
pub fn classical_threshold<T: Scalar>() -> T {
    T::of(2.0) / T::of(3.0)
}

/// `|f| cos γ / 3 + |f|² / 6 + 1/2` with `γ = arg f`.
pub fn single_qubit_fidelity<T: Scalar>(f: C<T>) -> Result<T> {
    let modulus = f.norm();
    if modulus > T::one() + T::tolerance(1e-9) {
        return Err(Error::AmplitudeTooLarge(modulus.to_f64().unwrap_or(f64::NAN)));
    }
    // |f| cos(arg f) is Re f; one division keeps exact inputs exact.
    Ok((T::of(2.0) * f.re + f.norm_sqr() + T::of(3.0)) / T::of(6.0))
}

/// Closed form for `b|01⟩ + c|10⟩` from single-excitation amplitudes
/// `f_{r,s} = ⟨r|U|s⟩`.
pub fn bell_fidelity_omega1<T: Scalar>(
    f_nm1_1: C<T>,
    f_n_2: C<T>,
    f_nm1_2: C<T>,
    f_n_1: C<T>,
) -> T {
    let two = T::of(2.0);
    (two * (f_nm1_1.norm_sqr() + f_n_2.norm_sqr())
        + f_nm1_2.norm_sqr()
        + f_n_1.norm_sqr()
        + two * (f_n_2 * f_nm1_1.conj()).re)
        / T::of(6.0)
}

/// Value of the two-excitation closed form, which is not bounded by 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega2Value<T: Scalar> {
    pub value: T,
    pub out_of_range: bool,
}

/// Closed form for `a|00⟩ + d|11⟩`. `g_cross[n-1]` holds
/// `(⟨n,N-1|U|1,2⟩, ⟨n,N|U|1,2⟩)` for `n = 1..=N-2`; `g_last` is
/// `⟨N-1,N|U|1,2⟩`.
pub fn bell_fidelity_omega2<T: Scalar>(
    g_cross: &[(C<T>, C<T>)],
    g_last: C<T>,
    convention: Omega2Convention,
) -> Omega2Value<T> {
    let cross: T = g_cross
        .iter()
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .sum();
    let last_term = match convention {
        Omega2Convention::ReAmplitude => g_last.re,
        Omega2Convention::AbsAmplitude => g_last.norm(),
    };
    let value = (T::of(3.0) - cross + T::of(2.0) * (g_last.norm_sqr() + last_term)) / T::of(6.0);
    Omega2Value {
        value,
        out_of_range: value < T::zero() || value > T::one(),
    }
}

/// One evaluated fidelity together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRecord {
    pub state: StateTag,
    pub value: f64,
    pub out_of_range: bool,
    /// The amplitudes the closed form consumed, as `(re, im)` pairs.
    pub amplitudes: Vec<(f64, f64)>,
    pub kick_index: Option<usize>,
    pub time: f64,
    pub point: String,
}

/// Two-qubit input family and its coefficients. For `Omega1` the pair is
/// `(b, c)` of `b|01⟩ + c|10⟩`, for `Omega2` it is `(a, d)` of
/// `a|00⟩ + d|11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellInput<T: Scalar> {
    family: StateTag,
    first: C<T>,
    second: C<T>,
}

impl<T: Scalar> BellInput<T> {
    pub fn new(family: StateTag, first: C<T>, second: C<T>) -> Result<Self> {
        if family == StateTag::Omega0 {
            return Err(Error::NotTwoQubitFamily);
        }
        let nrm = first.norm_sqr() + second.norm_sqr();
        if (nrm - T::one()).abs() > T::tolerance(1e-12) {
            return Err(Error::NotNormalized(nrm.sqrt().to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { family, first, second })
    }

    /// Equal-weight member of the family.
    pub fn maximal(family: StateTag) -> Result<Self> {
        let h = C::new(T::FRAC_1_SQRT_2(), T::zero());
        Self::new(family, h, h)
    }

    pub fn family(&self) -> StateTag {
        self.family
    }

    pub fn coefficients(&self) -> (C<T>, C<T>) {
        (self.first, self.second)
    }

    pub fn is_maximally_entangled(&self) -> bool {
        let tol = T::tolerance(1e-12);
        (self.first - self.second).norm() <= tol && (self.first.norm_sqr() - T::of(0.5)).abs() <= tol
    }

    /// Amplitudes over `|q1 q2⟩` ordered `00, 01, 10, 11` (1 = up).
    pub fn two_qubit_vector(&self) -> [C<T>; 4] {
        match self.family {
            StateTag::Omega1 => [czero(), self.first, self.second, czero()],
            _ => [self.first, czero(), czero(), self.second],
        }
    }
}

/// Uniform (Haar) sample `cos(θ/2)|·⟩ + e^{iφ} sin(θ/2)|·⟩` of a two-level
/// superposition.
pub fn sample_bloch<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> (C<T>, C<T>) {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let up = ((1.0 - cos_theta) * 0.5).max(0.0).sqrt();
    let down = ((1.0 + cos_theta) * 0.5).max(0.0).sqrt();
    (
        cplx(T::of(down), T::zero()),
        cplx(T::of(up * phi.cos()), T::of(up * phi.sin())),
    )
}

/// State spread over several excitation sectors, stored sparsely.
#[derive(Debug, Clone, Default)]
pub struct MultiSectorState<T: Scalar> {
    n_sites: usize,
    amplitudes: BTreeMap<Config, C<T>>,
}

impl<T: Scalar> MultiSectorState<T> {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Adds `weight · psi` (a sector state in `basis`).
    pub fn add_sector(&mut self, basis: &ExcitationBasis, psi: &StateVector<T>, weight: C<T>) -> Result<()> {
        if basis.n_sites() != self.n_sites || psi.amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                actual: basis.n_sites(),
            });
        }
        for (&config, &amp) in basis.configs().iter().zip(&psi.amplitudes) {
            *self.amplitudes.entry(config).or_insert_with(czero) += weight * amp;
        }
        Ok(())
    }

    pub fn add(&mut self, config: Config, amplitude: C<T>) {
        *self.amplitudes.entry(config).or_insert_with(czero) += amplitude;
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum()
    }

    /// Reduced density matrix of `sites` (first site is the most
    /// significant qubit, 1 = up).
    pub fn reduced_density_matrix(&self, sites: &[usize]) -> DenseMatrix<T> {
        let dim = 1usize << sites.len();
        let kept_mask = Config::from_sites(sites).bits();
        let local = |config: Config| {
            sites
                .iter()
                .fold(0usize, |acc, &s| (acc << 1) | usize::from(config.contains(s)))
        };
        // Group amplitudes by the configuration of the traced-out sites.
        let mut blocks: BTreeMap<u64, Vec<C<T>>> = BTreeMap::new();
        for (&config, &amp) in &self.amplitudes {
            let env = config.bits() & !kept_mask;
            blocks.entry(env).or_insert_with(|| vec![czero(); dim])[local(config)] += amp;
        }
        let mut rho = DenseMatrix::zeros(dim, dim);
        for block in blocks.values() {
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] += block[i] * block[j].conj();
                }
            }
        }
        rho
    }
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn expectation<T: Scalar>(rho: &DenseMatrix<T>, psi: &[C<T>]) -> T {
    let rho_psi = rho.matvec(psi).expect("state matches density matrix");
    psi.iter()
        .zip(&rho_psi)
        .fold(czero(), |acc, (&a, &b)| acc + a.conj() * b)
        .re
}

/// Input rescaled so its largest coefficient has modulus 1.
fn unit_peak<T: Scalar, const D: usize>(v: [C<T>; D]) -> [C<T>; D] {
    let peak = v.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    if peak > T::zero() {
        v.map(|z| z / peak)
    } else {
        v
    }
}

/// `⟨v|ρ|v⟩ / (⟨v|v⟩ tr ρ)` for the reduced state of `out` on `sites`.
/// Invariant under rescaling of the input, so equal-weight inputs are
/// handled without rounding in their coefficients.
fn normalized_overlap<T: Scalar>(out: &MultiSectorState<T>, sites: &[usize], v: &[C<T>]) -> T {
    let rho = out.reduced_density_matrix(sites);
    let v_norm: T = v.iter().map(|z| z.norm_sqr()).sum();
    expectation(&rho, v) / (v_norm * out.norm_sqr())
}

/// Time at which the oracle evaluates the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolutionPoint<T: Scalar> {
    /// `exp(-i H t)` with the chain's own static field.
    Continuous { t: T },
    /// Just after the m-th kick.
    Kicked { schedule: KickSchedule<T>, m: usize },
}

impl<T: Scalar> EvolutionPoint<T> {
    pub fn is_initial(&self) -> bool {
        match *self {
            EvolutionPoint::Continuous { t } => t == T::zero(),
            EvolutionPoint::Kicked { m, .. } => m == 0,
        }
    }
}

/// Evolves a basis configuration within its sector.
pub fn evolve_config<T: Scalar>(
    params: &ChainParams<T>,
    point: &EvolutionPoint<T>,
    basis: &ExcitationBasis,
    config: Config,
) -> Result<StateVector<T>> {
    let psi0 = StateVector::basis_state(basis, config)?;
    if point.is_initial() {
        return Ok(psi0);
    }
    match *point {
        EvolutionPoint::Continuous { t } => {
            let h = build_hamiltonian(params, basis)?;
            unitary_exp(&h, t, basis)?.apply(&psi0)
        }
        EvolutionPoint::Kicked { schedule, m } => {
            let step = kick_step(params, &schedule, basis)?;
            evolve_kicked(&step, m, &psi0)
        }
    }
}

/// Evolved images of the basis states a two-qubit input on sites (1, 2)
/// can occupy, plus the single-qubit sender state.
#[derive(Debug, Clone)]
pub struct EvolvedSenders<T: Scalar> {
    n_sites: usize,
    sectors: [ExcitationBasis; 3],
    vacuum: StateVector<T>,
    from_1: StateVector<T>,
    from_2: StateVector<T>,
    from_12: StateVector<T>,
}

impl<T: Scalar> EvolvedSenders<T> {
    pub fn new(params: &ChainParams<T>, point: &EvolutionPoint<T>) -> Result<Self> {
        let n = params.n_sites();
        let sectors = [
            ExcitationBasis::new(n, 0)?,
            ExcitationBasis::new(n, 1)?,
            ExcitationBasis::new(n, 2)?,
        ];
        Ok(Self {
            n_sites: n,
            vacuum: evolve_config(params, point, &sectors[0], Config::VACUUM)?,
            from_1: evolve_config(params, point, &sectors[1], Config::single(1))?,
            from_2: evolve_config(params, point, &sectors[1], Config::single(2))?,
            from_12: evolve_config(params, point, &sectors[2], Config::pair(1, 2))?,
            sectors,
        })
    }

    /// Phase acquired by the all-down state.
    pub fn vacuum_phase(&self) -> C<T> {
        self.vacuum.amplitudes[0]
    }

    /// `⟨target|U|source⟩` within the one- or two-excitation sector.
    pub fn amplitude(&self, source: Config, target: Config) -> Result<C<T>> {
        let (basis, psi) = match (source.excitations(), source) {
            (1, s) if s == Config::single(1) => (&self.sectors[1], &self.from_1),
            (1, s) if s == Config::single(2) => (&self.sectors[1], &self.from_2),
            (2, s) if s == Config::pair(1, 2) => (&self.sectors[2], &self.from_12),
            _ => return Err(Error::UnknownConfiguration(source.to_string())),
        };
        Ok(psi.amplitudes[basis.index_of(target)?])
    }

    /// Output state for `α|0⟩ + β|1⟩` injected on site 1.
    pub fn single_qubit_output(&self, alpha: C<T>, beta: C<T>) -> MultiSectorState<T> {
        let mut out = MultiSectorState::new(self.n_sites);
        out.add_sector(&self.sectors[0], &self.vacuum, alpha).expect("same chain");
        out.add_sector(&self.sectors[1], &self.from_1, beta).expect("same chain");
        out
    }

    /// Output state for a Bell input on sites (1, 2).
    pub fn bell_output(&self, input: &BellInput<T>) -> MultiSectorState<T> {
        self.two_qubit_output(input.two_qubit_vector())
    }

    fn two_qubit_output(&self, [v00, v01, v10, v11]: [C<T>; 4]) -> MultiSectorState<T> {
        let mut out = MultiSectorState::new(self.n_sites);
        // |q1 q2⟩ with q1 on site 1: |01⟩ has site 2 up, |10⟩ has site 1 up.
        out.add_sector(&self.sectors[0], &self.vacuum, v00).expect("same chain");
        out.add_sector(&self.sectors[1], &self.from_2, v01).expect("same chain");
        out.add_sector(&self.sectors[1], &self.from_1, v10).expect("same chain");
        out.add_sector(&self.sectors[2], &self.from_12, v11).expect("same chain");
        out
    }

    /// `⟨ψ_in|ρ_N|ψ_in⟩` for a single qubit.
    pub fn single_qubit_direct(&self, alpha: C<T>, beta: C<T>) -> T {
        let [alpha, beta] = unit_peak([alpha, beta]);
        let out = self.single_qubit_output(alpha, beta);
        normalized_overlap(&out, &[self.n_sites], &[alpha, beta])
    }

    /// `⟨Ω|ρ_{N-1,N}|Ω⟩` with the input relabelled onto the receivers.
    pub fn bell_direct(&self, input: &BellInput<T>) -> T {
        let n = self.n_sites;
        let v = unit_peak(input.two_qubit_vector());
        normalized_overlap(&self.two_qubit_output(v), &[n - 1, n], &v)
    }

    /// Closed-form single-qubit fidelity from `f_{N,1}`.
    pub fn single_qubit_closed_form(&self, gauge: AmplitudeGauge) -> Result<T> {
        let f = self.from_1.amplitudes[self.sectors[1].index_of(Config::single(self.n_sites))?];
        single_qubit_fidelity(gauge.apply(f, self.vacuum_phase()))
    }

    /// Closed-form `b|01⟩ + c|10⟩` fidelity.
    pub fn omega1_closed_form(&self, gauge: AmplitudeGauge) -> Result<T> {
        let n = self.n_sites;
        let v = self.vacuum_phase();
        let f = |r: usize, s: usize| -> Result<C<T>> {
            Ok(gauge.apply(self.amplitude(Config::single(s), Config::single(r))?, v))
        };
        Ok(bell_fidelity_omega1(f(n - 1, 1)?, f(n, 2)?, f(n - 1, 2)?, f(n, 1)?))
    }

    /// Closed-form `a|00⟩ + d|11⟩` fidelity.
    pub fn omega2_closed_form(
        &self,
        gauge: AmplitudeGauge,
        convention: Omega2Convention,
    ) -> Result<Omega2Value<T>> {
        let n = self.n_sites;
        let v = self.vacuum_phase();
        let g = |a: usize, b: usize| -> Result<C<T>> {
            Ok(gauge.apply(self.amplitude(Config::pair(1, 2), Config::pair(a, b))?, v))
        };
        let cross = (1..=n - 2)
            .map(|k| Ok((g(k, n - 1)?, g(k, n)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(bell_fidelity_omega2(&cross, g(n - 1, n)?, convention))
    }
}

pub(crate) fn require_pairs(n_sites: usize) -> Result<()> {
    if n_sites < 4 {
        Err(Error::ChainTooShortForPairs(n_sites))
    } else {
        Ok(())
    }
}

/// Fidelity of a two-qubit input by explicit partial trace over the chain.
pub fn bell_fidelity_direct<T: Scalar>(
    params: &ChainParams<T>,
    point: &EvolutionPoint<T>,
    input: &BellInput<T>,
) -> Result<T> {
    require_pairs(params.n_sites())?;
    Ok(EvolvedSenders::new(params, point)?.bell_direct(input))
}

/// Monte Carlo average of [`bell_fidelity_direct`] over the input family.
pub fn bell_family_average_direct<T: Scalar, R: Rng + ?Sized>(
    params: &ChainParams<T>,
    point: &EvolutionPoint<T>,
    family: StateTag,
    samples: usize,
    rng: &mut R,
) -> Result<T> {
    require_pairs(params.n_sites())?;
    let senders = EvolvedSenders::new(params, point)?;
    family_average(&senders, family, samples, rng)
}

pub(crate) fn family_average<T: Scalar, R: Rng + ?Sized>(
    senders: &EvolvedSenders<T>,
    family: StateTag,
    samples: usize,
    rng: &mut R,
) -> Result<T> {
    let mut total = T::zero();
    for _ in 0..samples {
        let (x, y) = sample_bloch::<T, R>(rng);
        total += senders.bell_direct(&BellInput::new(family, x, y)?);
    }
    Ok(total / T::of_usize(samples.max(1)))
}

/// Monte Carlo average of `⟨ψ_in|ρ_N|ψ_in⟩` over Bloch-uniform single-qubit
/// inputs on site 1.
pub fn bloch_average_fidelity<T: Scalar, R: Rng + ?Sized>(
    params: &ChainParams<T>,
    point: &EvolutionPoint<T>,
    samples: usize,
    rng: &mut R,
) -> Result<T> {
    let senders = EvolvedSenders::new(params, point)?;
    let mut total = T::zero();
    for _ in 0..samples {
        let (alpha, beta) = sample_bloch::<T, R>(rng);
        total += senders.single_qubit_direct(alpha, beta);
    }
    Ok(total / T::of_usize(samples.max(1)))
}
