//! Exhaustive parameter sweeps for maximum transfer fidelity.
//!
//! Each grid point is maximized over a lattice of kick intervals and kick
//! counts, or over integer times when the chain is not kicked. Grid points
//! are independent and may run on a thread pool; results are always ordered
//! by grid index.

mod evaluate;
mod periodogram;

pub use evaluate::{
    continuous_fidelity_series, fidelity_series, fidelity_series_all, Conventions,
    FidelitySeries, PointEvaluator,
};
pub use periodogram::{periodogram, Periodogram};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainParams, CouplingProfile, ImpurityKind, ImpuritySpec};
use crate::error::{Error, Result};
use crate::fidelity::StateTag;
use crate::scalar::Scalar;

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Kick interval; each point is maximized over kick counts only.
    Tau,
    /// Kick amplitude `E1`.
    E1,
    /// `J2/J1` at fixed `J1`.
    J2OverJ1,
    /// Impurity strength along the ratio ramp of [`ImpuritySpec::from_strength`].
    ImpurityStrength,
    /// Kick budget `m_max`.
    KickCount,
}

/// Chain and drive from which every grid point is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTemplate<T: Scalar> {
    pub n_sites: usize,
    pub j1: T,
    pub j2: T,
    pub b_field: T,
    pub e0: T,
    pub e1: T,
    pub impurity: Option<ImpuritySpec>,
    /// Slope of the weakened ratios along the impurity strength ramp.
    pub impurity_slope: f64,
}

impl<T: Scalar> ChainTemplate<T> {
    /// Uniform chain with the given couplings and drive, no impurity.
    pub fn uniform(n_sites: usize, j1: T, j2: T, e0: T, e1: T) -> Self {
        Self {
            n_sites,
            j1,
            j2,
            b_field: T::zero(),
            e0,
            e1,
            impurity: None,
            impurity_slope: 0.25,
        }
    }

    /// Chain parameters with the static field as the chirality field.
    pub fn params(&self) -> Result<ChainParams<T>> {
        let mut profile = CouplingProfile::uniform(self.n_sites, self.j1, self.j2)?;
        if let Some(spec) = &self.impurity {
            profile = profile.with_impurity(spec)?;
        }
        Ok(ChainParams::new(profile, self.e0, self.b_field))
    }

    fn at(&self, axis: SweepAxis, value: T) -> Result<Self> {
        let mut t = self.clone();
        match axis {
            SweepAxis::Tau | SweepAxis::KickCount => {}
            SweepAxis::E1 => t.e1 = value,
            SweepAxis::J2OverJ1 => t.j2 = value * self.j1,
            SweepAxis::ImpurityStrength => {
                let base = self.impurity.ok_or_else(|| {
                    Error::InvalidGrid("impurity strength sweep needs an impurity".into())
                })?;
                t.impurity = Some(ImpuritySpec::from_strength(
                    base.kind,
                    base.site,
                    value.to_f64().expect("finite grid value"),
                    self.impurity_slope,
                ));
            }
        }
        Ok(t)
    }
}

/// How long each point is evolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Budget<T: Scalar> {
    /// Kick intervals, strictly increasing.
    pub tau_grid: Vec<T>,
    /// Largest kick count; series run over `0..=m_max`.
    pub m_max: usize,
    /// Largest integer time for unkicked points.
    pub continuous_t_max: usize,
    /// Evolve `E1 = 0` points continuously over `1..=continuous_t_max`
    /// instead of on the kick lattice.
    pub continuous_when_unkicked: bool,
}

impl<T: Scalar> Budget<T> {
    pub fn kicked(tau_grid: Vec<T>, m_max: usize) -> Self {
        Self {
            tau_grid,
            m_max,
            continuous_t_max: 5000,
            continuous_when_unkicked: false,
        }
    }
}

/// Regular grid `start, start + step, ...` up to `stop` inclusive, built
/// from integer multiples of `step` and rounded to 10 decimals.
pub fn regular_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite()) || stop < start {
        return Err(Error::InvalidGrid(format!(
            "range {start}..={stop} step {step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
        .collect())
}

fn check_increasing<T: Scalar>(name: &str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} has non-finite values")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(format!("{name} is not strictly increasing")));
    }
    Ok(())
}

/// How the maximum was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    Kicked,
    /// Integer times; reported as unit interval with `kicks = t`.
    Continuous,
}

/// Maximum over an evolution budget with its location. Ties go to the
/// smallest interval, then the smallest kick count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxFidelity<T: Scalar> {
    pub value: T,
    pub tau: T,
    pub kicks: usize,
    pub out_of_range: bool,
    pub mode: EvolutionMode,
}

/// Series at the argmax interval. `values[i]` belongs to kick count
/// (or integer time) `start + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RetainedSeries<T: Scalar> {
    pub start: usize,
    pub values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T: Scalar> {
    pub index: usize,
    pub grid_value: T,
    pub state: StateTag,
    pub best: MaxFidelity<T>,
    pub series: Option<RetainedSeries<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T: Scalar> {
    pub axis: SweepAxis,
    /// Grid order, then state order.
    pub points: Vec<SweepPoint<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn for_state(&self, state: StateTag) -> impl Iterator<Item = &SweepPoint<T>> {
        self.points.iter().filter(move |p| p.state == state)
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan<T: Scalar> {
    pub template: ChainTemplate<T>,
    pub axis: SweepAxis,
    pub grid: Vec<T>,
    pub budget: Budget<T>,
    pub states: Vec<StateTag>,
    pub conventions: Conventions,
    pub retain_series: bool,
}

impl<T: Scalar> SweepPlan<T> {
    pub fn validate(&self) -> Result<()> {
        check_increasing("sweep grid", &self.grid)?;
        check_increasing("tau grid", &self.budget.tau_grid)?;
        if self.budget.tau_grid[0] <= T::zero() {
            return Err(Error::NonPositiveTau(self.budget.tau_grid[0].to_f64().unwrap_or(f64::NAN)));
        }
        if self.budget.m_max < 1 {
            return Err(Error::InvalidGrid("m_max must be at least 1".into()));
        }
        if self.budget.continuous_when_unkicked && self.budget.continuous_t_max < 1 {
            return Err(Error::InvalidGrid("continuous_t_max must be at least 1".into()));
        }
        if self.states.is_empty() {
            return Err(Error::InvalidGrid("no states requested".into()));
        }
        match self.axis {
            SweepAxis::KickCount => {
                if self
                    .grid
                    .iter()
                    .any(|&v| v < T::one() || v.fract() != T::zero())
                {
                    return Err(Error::InvalidGrid("kick counts must be positive integers".into()));
                }
            }
            SweepAxis::Tau => {
                if self.grid[0] <= T::zero() {
                    return Err(Error::NonPositiveTau(self.grid[0].to_f64().unwrap_or(f64::NAN)));
                }
            }
            SweepAxis::ImpurityStrength if self.template.impurity.is_none() => {
                return Err(Error::InvalidGrid("impurity strength sweep needs an impurity".into()));
            }
            _ => {}
        }
        for &v in &self.grid {
            self.template.at(self.axis, v)?.params()?;
        }
        self.template.params()?;
        Ok(())
    }

    fn budget_at(&self, value: T) -> Budget<T> {
        let mut b = self.budget.clone();
        match self.axis {
            SweepAxis::Tau => b.tau_grid = vec![value],
            SweepAxis::KickCount => b.m_max = value.to_usize().expect("validated kick count"),
            _ => {}
        }
        b
    }

    fn evaluate(&self, index: usize) -> Result<Vec<SweepPoint<T>>> {
        let value = self.grid[index];
        let template = self.template.at(self.axis, value)?;
        let budget = self.budget_at(value);
        let maxima = point_maxima(&template, &budget, &self.states, self.conventions, self.retain_series)?;
        Ok(maxima
            .into_iter()
            .map(|(state, best, series)| SweepPoint {
                index,
                grid_value: value,
                state,
                best,
                series,
            })
            .collect())
    }
}

type Maximum<T> = (StateTag, MaxFidelity<T>, Option<RetainedSeries<T>>);
type Leader<T> = Option<(MaxFidelity<T>, Option<RetainedSeries<T>>)>;

fn point_maxima<T: Scalar>(
    template: &ChainTemplate<T>,
    budget: &Budget<T>,
    states: &[StateTag],
    conventions: Conventions,
    retain: bool,
) -> Result<Vec<Maximum<T>>> {
    let params = template.params()?;
    let eval = PointEvaluator::new(&params, template.e0, template.e1, states, conventions)?;

    if budget.continuous_when_unkicked && template.e1 == T::zero() {
        let times: Vec<T> = (1..=budget.continuous_t_max).map(T::of_usize).collect();
        return Ok(eval
            .continuous(&times)?
            .into_iter()
            .map(|s| {
                let i = s.argmax().expect("nonempty series");
                let best = MaxFidelity {
                    value: s.values[i],
                    tau: T::one(),
                    kicks: i + 1,
                    out_of_range: s.out_of_range[i],
                    mode: EvolutionMode::Continuous,
                };
                let series = retain.then_some(RetainedSeries {
                    start: 1,
                    values: s.values,
                });
                (s.state, best, series)
            })
            .collect());
    }

    let mut best: Vec<Leader<T>> = vec![None; eval.states().len()];
    for &tau in &budget.tau_grid {
        for (slot, s) in best.iter_mut().zip(eval.kicked(tau, budget.m_max)?) {
            let i = s.argmax().expect("nonempty series");
            if slot.as_ref().is_none_or(|(b, _)| s.values[i] > b.value) {
                let m = MaxFidelity {
                    value: s.values[i],
                    tau,
                    kicks: i,
                    out_of_range: s.out_of_range[i],
                    mode: EvolutionMode::Kicked,
                };
                let series = retain.then_some(RetainedSeries {
                    start: 0,
                    values: s.values,
                });
                *slot = Some((m, series));
            }
        }
    }
    Ok(eval
        .states()
        .iter()
        .zip(best)
        .map(|(&state, b)| {
            let (m, series) = b.expect("tau grid is nonempty");
            (state, m, series)
        })
        .collect())
}

/// Exhaustive maximum over the `tau_grid × (0..=m_max)` lattice.
pub fn max_fidelity<T: Scalar>(
    template: &ChainTemplate<T>,
    tau_grid: &[T],
    m_max: usize,
    state: StateTag,
    conventions: Conventions,
) -> Result<MaxFidelity<T>> {
    check_increasing("tau grid", tau_grid)?;
    let budget = Budget::kicked(tau_grid.to_vec(), m_max);
    Ok(point_maxima(template, &budget, &[state], conventions, false)?[0].1)
}

/// Maximum over integer times `1..=t_max` without kicks.
pub fn max_fidelity_continuous<T: Scalar>(
    template: &ChainTemplate<T>,
    t_max: usize,
    state: StateTag,
    conventions: Conventions,
) -> Result<MaxFidelity<T>> {
    let budget = Budget {
        tau_grid: vec![T::one()],
        m_max: 1,
        continuous_t_max: t_max,
        continuous_when_unkicked: true,
    };
    let unkicked = ChainTemplate {
        e1: T::zero(),
        ..template.clone()
    };
    Ok(point_maxima(&unkicked, &budget, &[state], conventions, false)?[0].1)
}

/// Runs every grid point of `plan` on `workers` threads.
pub fn sweep_axis<T: Scalar>(plan: &SweepPlan<T>, workers: usize) -> Result<SweepResult<T>> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let per_point: Vec<Result<Vec<SweepPoint<T>>>> =
        pool.install(|| (0..plan.grid.len()).into_par_iter().map(|i| plan.evaluate(i)).collect());

    let mut points = Vec::with_capacity(plan.grid.len() * plan.states.len());
    for (index, r) in per_point.into_iter().enumerate() {
        match r {
            Ok(p) => points.extend(p),
            Err(e) => {
                return Err(Error::SweepPoint {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(SweepResult {
        axis: plan.axis,
        points,
    })
}

/// Ratios a strength value maps to, for reporting.
pub fn impurity_ratios(kind: ImpurityKind, strength: f64, slope: f64) -> (f64, f64, f64) {
    let s = ImpuritySpec::from_strength(kind, 2, strength, slope);
    (s.ratio_nn, s.ratio_nnn_strong, s.ratio_nnn_weak)
}
