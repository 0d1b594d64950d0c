//! Closed-form two-qubit fidelities against the partial-trace oracle.
//!
//! Each row pairs one closed form (under one amplitude gauge) with the
//! oracle at the maximally entangled input and with a Monte Carlo average
//! over the input family. Deviations are `closed_form - oracle`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{ChainParams, CouplingProfile};
use crate::error::Result;
use crate::fidelity::{
    family_average, require_pairs, AmplitudeGauge, BellInput, EvolutionPoint, EvolvedSenders, Omega2Convention,
    StateTag,
};
use crate::propagator::KickSchedule;

/// Which closed form a row evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    Omega1,
    Omega2ReAmplitude,
    Omega2AbsAmplitude,
}

impl ClosedForm {
    pub const ALL: [ClosedForm; 3] = [
        ClosedForm::Omega1,
        ClosedForm::Omega2ReAmplitude,
        ClosedForm::Omega2AbsAmplitude,
    ];

    pub fn family(self) -> StateTag {
        match self {
            ClosedForm::Omega1 => StateTag::Omega1,
            _ => StateTag::Omega2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformanceRow {
    pub n_sites: usize,
    /// `continuous` or `kicked`.
    pub evolution: &'static str,
    pub time: f64,
    /// Kick count for kicked rows, empty otherwise.
    pub kick_index: Option<usize>,
    pub closed_form: ClosedForm,
    pub gauge: AmplitudeGauge,
    pub closed_form_value: f64,
    pub out_of_range: bool,
    pub oracle_maximal: f64,
    pub oracle_family_mean: f64,
    pub deviation_maximal: f64,
    pub deviation_family: f64,
}

#[derive(Debug, Clone)]
pub struct ConformanceSettings {
    pub chain_lengths: Vec<usize>,
    pub continuous_times: Vec<f64>,
    pub kick_interval: f64,
    pub kick_counts: Vec<usize>,
    pub j1: f64,
    pub j2: f64,
    pub e0: f64,
    pub e1: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ConformanceSettings {
    fn default() -> Self {
        Self {
            chain_lengths: vec![4, 5, 6],
            continuous_times: vec![0.0, 0.7, 2.5, 9.0],
            kick_interval: 2.0,
            kick_counts: vec![0, 1, 5, 40],
            j1: 1.0,
            j2: -1.0,
            e0: 0.1,
            e1: 1.0,
            samples: 4000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformanceReport {
    pub rows: Vec<ConformanceRow>,
}

impl ConformanceReport {
    /// Largest `|deviation_family|` per closed form and gauge.
    pub fn worst_family_deviation(&self, form: ClosedForm, gauge: AmplitudeGauge) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.closed_form == form && r.gauge == gauge)
            .map(|r| r.deviation_family.abs())
            .fold(0.0, f64::max)
    }

    /// Oracle values at the maximal input for every initial-time row.
    pub fn initial_oracle_values(&self, family: StateTag) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.closed_form.family() == family && r.time == 0.0)
            .map(|r| r.oracle_maximal)
            .collect()
    }
}

/// Builds the report; the Monte Carlo stream is drawn in row order from a
/// single generator seeded with `settings.seed`.
pub fn conformance_report(settings: &ConformanceSettings) -> Result<ConformanceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut rows = Vec::new();
    for &n in &settings.chain_lengths {
        require_pairs(n)?;
        let profile = CouplingProfile::uniform(n, settings.j1, settings.j2)?;
        let params = ChainParams::new(profile, settings.e0, 0.0);
        let schedule = KickSchedule::new(settings.kick_interval, settings.e0, settings.e1, 0)?;

        let mut points: Vec<(EvolutionPoint<f64>, &'static str, f64, Option<usize>)> = settings
            .continuous_times
            .iter()
            .map(|&t| (EvolutionPoint::Continuous { t }, "continuous", t, None))
            .collect();
        points.extend(settings.kick_counts.iter().map(|&m| {
            (
                EvolutionPoint::Kicked { schedule, m },
                "kicked",
                schedule.time_after(m),
                Some(m),
            )
        }));

        for (point, evolution, time, kick_index) in points {
            let senders = EvolvedSenders::new(&params, &point)?;
            let oracle_max_1 = senders.bell_direct(&BellInput::maximal(StateTag::Omega1)?);
            let oracle_max_2 = senders.bell_direct(&BellInput::maximal(StateTag::Omega2)?);
            let family_1 = family_average(&senders, StateTag::Omega1, settings.samples, &mut rng)?;
            let family_2 = family_average(&senders, StateTag::Omega2, settings.samples, &mut rng)?;

            for gauge in [AmplitudeGauge::VacuumReferenced, AmplitudeGauge::Raw] {
                for form in ClosedForm::ALL {
                    let (value, out_of_range) = match form {
                        ClosedForm::Omega1 => {
                            let v = senders.omega1_closed_form(gauge)?;
                            (v, !(0.0..=1.0).contains(&v))
                        }
                        ClosedForm::Omega2ReAmplitude | ClosedForm::Omega2AbsAmplitude => {
                            let conv = if form == ClosedForm::Omega2ReAmplitude {
                                Omega2Convention::ReAmplitude
                            } else {
                                Omega2Convention::AbsAmplitude
                            };
                            let v = senders.omega2_closed_form(gauge, conv)?;
                            (v.value, v.out_of_range)
                        }
                    };
                    let (oracle_maximal, oracle_family_mean) = match form.family() {
                        StateTag::Omega1 => (oracle_max_1, family_1),
                        _ => (oracle_max_2, family_2),
                    };
                    rows.push(ConformanceRow {
                        n_sites: n,
                        evolution,
                        time,
                        kick_index,
                        closed_form: form,
                        gauge,
                        closed_form_value: value,
                        out_of_range,
                        oracle_maximal,
                        oracle_family_mean,
                        deviation_maximal: value - oracle_maximal,
                        deviation_family: value - oracle_family_mean,
                    });
                }
            }
        }
    }
    Ok(ConformanceReport { rows })
}
