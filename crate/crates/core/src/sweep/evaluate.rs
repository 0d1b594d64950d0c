//! Fidelity time series at a single parameter point.

use std::collections::BTreeMap;

use crate::basis::{Config, ExcitationBasis};
use crate::chain::{build_hamiltonian, ChainParams};
use crate::error::{Error, Result};
use crate::fidelity::{
    bell_fidelity_omega1, bell_fidelity_omega2, single_qubit_fidelity, AmplitudeGauge,
    Omega2Convention, StateTag,
};
use crate::linalg::{eigendecompose, DenseMatrix, Eigen};
use crate::propagator::{KickSchedule, U0Convention};
use crate::scalar::{cone, czero, Scalar, C};

/// Eigensystem with source states expanded in it.
type Spectral<T> = (Eigen<T>, Vec<Vec<C<T>>>);

/// Conventions that change how a point is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Conventions {
    pub u0: U0Convention,
    pub omega2: Omega2Convention,
    pub gauge: AmplitudeGauge,
}

/// Fidelity of one input state at successive evaluation times.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySeries<T: Scalar> {
    pub state: StateTag,
    pub values: Vec<T>,
    /// Set where the two-excitation closed form leaves `[0, 1]`.
    pub out_of_range: Vec<bool>,
}

impl<T: Scalar> FidelitySeries<T> {
    fn with_capacity(state: StateTag, n: usize) -> Self {
        Self {
            state,
            values: Vec::with_capacity(n),
            out_of_range: Vec::with_capacity(n),
        }
    }

    /// First index of the maximum.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|b| v > self.values[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// One sector, the sender configurations evolved in it and the receiver
/// indices the closed forms read.
#[derive(Debug, Clone)]
struct SectorTrack<T: Scalar> {
    basis: ExcitationBasis,
    sources: Vec<Config>,
    /// Between-kick Hamiltonian spectrum when it does not depend on τ.
    h0: Option<Eigen<T>>,
    /// `exp(-i E1 D)`.
    kick: DenseMatrix<T>,
}

/// Receiver-side amplitudes of every tracked sender at one instant.
struct Snapshot<'a, T: Scalar> {
    vacuum: C<T>,
    k1: Option<&'a [Vec<C<T>>]>,
    k2: Option<&'a [Vec<C<T>>]>,
}

/// Evaluates fidelity series for a chain, reusing decompositions across
/// kick intervals.
#[derive(Debug, Clone)]
pub struct PointEvaluator<T: Scalar> {
    params: ChainParams<T>,
    e0: T,
    e1: T,
    conventions: Conventions,
    states: Vec<StateTag>,
    vacuum: SectorTrack<T>,
    k1: Option<SectorTrack<T>>,
    k2: Option<SectorTrack<T>>,
    idx: ReceiverIndex,
}

#[derive(Debug, Clone, Default)]
struct ReceiverIndex {
    k1_n: usize,
    k1_nm1: usize,
    k2_cross: Vec<(usize, usize)>,
    k2_last: usize,
}

impl<T: Scalar> PointEvaluator<T> {
    /// `params.dm_field` is replaced by `e0` between kicks.
    pub fn new(
        params: &ChainParams<T>,
        e0: T,
        e1: T,
        states: &[StateTag],
        conventions: Conventions,
    ) -> Result<Self> {
        let n = params.n_sites();
        let needs_pairs = states.iter().any(|&s| s != StateTag::Omega0);
        if needs_pairs && n < 4 {
            return Err(Error::ChainTooShortForPairs(n));
        }
        let needs_k1 = states.iter().any(|&s| matches!(s, StateTag::Omega0 | StateTag::Omega1));
        let needs_k2 = states.contains(&StateTag::Omega2);

        let h0_params = params.with_dm_field(e0);
        let track = |k: usize, sources: Vec<Config>| -> Result<SectorTrack<T>> {
            let basis = ExcitationBasis::new(n, k)?;
            let h0 = match conventions.u0 {
                U0Convention::HamiltonianTau => {
                    Some(eigendecompose(&build_hamiltonian(&h0_params, &basis)?)?)
                }
                U0Convention::LiteralEq5 => None,
            };
            let d = build_hamiltonian(&ChainParams::chirality_only(n)?, &basis)?;
            let kick = eigendecompose(&d)?.exp_i(e1);
            Ok(SectorTrack {
                basis,
                sources,
                h0,
                kick,
            })
        };

        let vacuum = track(0, vec![Config::VACUUM])?;
        let k1 = if needs_k1 {
            let mut sources = vec![Config::single(1)];
            if states.contains(&StateTag::Omega1) {
                sources.push(Config::single(2));
            }
            Some(track(1, sources)?)
        } else {
            None
        };
        let k2 = if needs_k2 {
            Some(track(2, vec![Config::pair(1, 2)])?)
        } else {
            None
        };

        let mut idx = ReceiverIndex::default();
        if let Some(t) = &k1 {
            idx.k1_n = t.basis.index_of(Config::single(n))?;
            idx.k1_nm1 = t.basis.index_of(Config::single(n - 1))?;
        }
        if let Some(t) = &k2 {
            idx.k2_cross = (1..=n - 2)
                .map(|a| {
                    Ok((
                        t.basis.index_of(Config::pair(a, n - 1))?,
                        t.basis.index_of(Config::pair(a, n))?,
                    ))
                })
                .collect::<Result<_>>()?;
            idx.k2_last = t.basis.index_of(Config::pair(n - 1, n))?;
        }

        let mut states = states.to_vec();
        states.sort();
        states.dedup();
        Ok(Self {
            params: params.clone(),
            e0,
            e1,
            conventions,
            states,
            vacuum,
            k1,
            k2,
            idx,
        })
    }

    pub fn states(&self) -> &[StateTag] {
        &self.states
    }

    pub fn params(&self) -> &ChainParams<T> {
        &self.params
    }

    fn free_step(&self, track: &SectorTrack<T>, tau: T) -> Result<DenseMatrix<T>> {
        match &track.h0 {
            Some(eig) => Ok(eig.exp_i(tau)),
            None => {
                let h = build_hamiltonian(&self.params.with_dm_field(self.e0 / tau), &track.basis)?;
                Ok(eigendecompose(&h)?.exp_i(tau))
            }
        }
    }

    /// The Floquet step `U1 U0` of each tracked sector (vacuum, k=1, k=2).
    fn steps(&self, tau: T) -> Result<Vec<Option<DenseMatrix<T>>>> {
        [Some(&self.vacuum), self.k1.as_ref(), self.k2.as_ref()]
            .into_iter()
            .map(|t| match t {
                Some(track) => Ok(Some(track.kick.matmul(&self.free_step(track, tau)?)?)),
                None => Ok(None),
            })
            .collect()
    }

    /// Series just after kicks `0..=m_max` at interval `tau`.
    pub fn kicked(&self, tau: T, m_max: usize) -> Result<Vec<FidelitySeries<T>>> {
        KickSchedule::new(tau, self.e0, self.e1, m_max)?;
        let steps = self.steps(tau)?;
        let init = |track: Option<&SectorTrack<T>>| -> Vec<Vec<C<T>>> {
            track.map_or_else(Vec::new, |t| {
                t.sources
                    .iter()
                    .map(|&c| {
                        let mut v = vec![czero(); t.basis.dim()];
                        v[t.basis.index_of(c).expect("sender in sector")] = cone();
                        v
                    })
                    .collect()
            })
        };
        let mut vac: C<T> = cone();
        let mut k1 = init(self.k1.as_ref());
        let mut k2 = init(self.k2.as_ref());

        let mut out: Vec<FidelitySeries<T>> = self
            .states
            .iter()
            .map(|&s| FidelitySeries::with_capacity(s, m_max + 1))
            .collect();
        for m in 0..=m_max {
            if m > 0 {
                vac = steps[0].as_ref().expect("vacuum tracked")[(0, 0)] * vac;
                if let Some(u) = &steps[1] {
                    for v in &mut k1 {
                        *v = u.matvec(v)?;
                    }
                }
                if let Some(u) = &steps[2] {
                    for v in &mut k2 {
                        *v = u.matvec(v)?;
                    }
                }
            }
            let snap = Snapshot {
                vacuum: vac,
                k1: self.k1.as_ref().map(|_| k1.as_slice()),
                k2: self.k2.as_ref().map(|_| k2.as_slice()),
            };
            self.push(&mut out, &snap)?;
        }
        Ok(out)
    }

    /// Series under continuous evolution with the static field only, at
    /// the given times.
    pub fn continuous(&self, times: &[T]) -> Result<Vec<FidelitySeries<T>>> {
        let spectral = |track: Option<&SectorTrack<T>>| -> Result<Option<Spectral<T>>> {
            let Some(t) = track else { return Ok(None) };
            let eig = match &t.h0 {
                Some(e) => e.clone(),
                None => eigendecompose(&build_hamiltonian(&self.params.with_dm_field(self.e0), &t.basis)?)?,
            };
            let coeffs = t
                .sources
                .iter()
                .map(|&c| {
                    let mut v = vec![czero(); t.basis.dim()];
                    v[t.basis.index_of(c)?] = cone();
                    Ok(eig.to_eigenbasis(&v))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Some((eig, coeffs)))
        };
        let vac = spectral(Some(&self.vacuum))?.expect("vacuum tracked");
        let k1 = spectral(self.k1.as_ref())?;
        let k2 = spectral(self.k2.as_ref())?;
        let evolve = |s: &Option<Spectral<T>>, t: T| -> Vec<Vec<C<T>>> {
            s.as_ref().map_or_else(Vec::new, |(eig, coeffs)| {
                coeffs.iter().map(|c| eig.from_eigenbasis_evolved(c, t)).collect()
            })
        };

        let mut out: Vec<FidelitySeries<T>> = self
            .states
            .iter()
            .map(|&s| FidelitySeries::with_capacity(s, times.len()))
            .collect();
        for &t in times {
            let vacuum = vac.0.from_eigenbasis_evolved(&vac.1[0], t)[0];
            let a1 = evolve(&k1, t);
            let a2 = evolve(&k2, t);
            let snap = Snapshot {
                vacuum,
                k1: k1.as_ref().map(|_| a1.as_slice()),
                k2: k2.as_ref().map(|_| a2.as_slice()),
            };
            self.push(&mut out, &snap)?;
        }
        Ok(out)
    }

    fn push(&self, out: &mut [FidelitySeries<T>], snap: &Snapshot<'_, T>) -> Result<()> {
        let gauge = self.conventions.gauge;
        let v = snap.vacuum;
        let idx = &self.idx;
        for series in out.iter_mut() {
            let (value, flag) = match series.state {
                StateTag::Omega0 => {
                    let from_1 = &snap.k1.expect("k=1 tracked")[0];
                    (single_qubit_fidelity(gauge.apply(from_1[idx.k1_n], v))?, false)
                }
                StateTag::Omega1 => {
                    let k1 = snap.k1.expect("k=1 tracked");
                    let f = |r: usize, s: usize| gauge.apply(k1[s][r], v);
                    let value = bell_fidelity_omega1(
                        f(idx.k1_nm1, 0),
                        f(idx.k1_n, 1),
                        f(idx.k1_nm1, 1),
                        f(idx.k1_n, 0),
                    );
                    (value, false)
                }
                StateTag::Omega2 => {
                    let g = &snap.k2.expect("k=2 tracked")[0];
                    let cross: Vec<_> = idx
                        .k2_cross
                        .iter()
                        .map(|&(a, b)| (gauge.apply(g[a], v), gauge.apply(g[b], v)))
                        .collect();
                    let r = bell_fidelity_omega2(&cross, gauge.apply(g[idx.k2_last], v), self.conventions.omega2);
                    (r.value, r.out_of_range)
                }
            };
            series.values.push(value);
            series.out_of_range.push(flag);
        }
        Ok(())
    }
}

/// Series for one state at the point `(params, schedule)`, entries
/// `m = 0..=m_max`.
pub fn fidelity_series<T: Scalar>(
    params: &ChainParams<T>,
    schedule: &KickSchedule<T>,
    state: StateTag,
    m_max: usize,
    conventions: Conventions,
) -> Result<FidelitySeries<T>> {
    let conventions = Conventions {
        u0: schedule.u0_convention,
        ..conventions
    };
    let eval = PointEvaluator::new(params, schedule.e0, schedule.e1, &[state], conventions)?;
    Ok(eval.kicked(schedule.tau, m_max)?.remove(0))
}

/// Continuous-evolution series for one state at the given times.
pub fn continuous_fidelity_series<T: Scalar>(
    params: &ChainParams<T>,
    e0: T,
    times: &[T],
    state: StateTag,
    conventions: Conventions,
) -> Result<FidelitySeries<T>> {
    let eval = PointEvaluator::new(params, e0, T::zero(), &[state], conventions)?;
    Ok(eval.continuous(times)?.remove(0))
}

/// Series for several states keyed by tag.
pub fn fidelity_series_all<T: Scalar>(
    params: &ChainParams<T>,
    schedule: &KickSchedule<T>,
    states: &[StateTag],
    m_max: usize,
    conventions: Conventions,
) -> Result<BTreeMap<StateTag, FidelitySeries<T>>> {
    let conventions = Conventions {
        u0: schedule.u0_convention,
        ..conventions
    };
    let eval = PointEvaluator::new(params, schedule.e0, schedule.e1, states, conventions)?;
    Ok(eval
        .kicked(schedule.tau, m_max)?
        .into_iter()
        .map(|s| (s.state, s))
        .collect())
}
