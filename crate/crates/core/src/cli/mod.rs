//! Config-driven runs producing plot-ready tables.

pub mod config;
pub mod table;

pub use config::{load_config, parse_config, serialize_config, ConfigError, ExperimentConfig, RunMode};
pub use table::{format_g17, Cell, Format, Table};

use crate::conformance::{conformance_report, ConformanceSettings};
use crate::fidelity::{classical_threshold, StateTag};
use crate::propagator::KickSchedule;
use crate::sweep::{
    fidelity_series_all, periodogram, sweep_axis, Budget, ChainTemplate, Conventions, EvolutionMode,
    SweepPlan,
};

/// Physical time per unit of `ħ/|J1|`, in picoseconds.
pub const PS_PER_TIME_UNIT: f64 = 0.5;

pub const SWEEP_COLUMNS: [&str; 8] = [
    "grid_value",
    "state",
    "max_fidelity",
    "argmax_tau",
    "argmax_kicks",
    "out_of_range_flag",
    "curve",
    "evolution",
];

pub const PERIODOGRAM_COLUMNS: [&str; 6] = ["state", "bin", "frequency", "period_kicks", "magnitude", "is_dominant"];

pub const CONFORMANCE_COLUMNS: [&str; 13] = [
    "n_sites",
    "evolution",
    "time",
    "kick_index",
    "closed_form",
    "gauge",
    "closed_form_value",
    "out_of_range",
    "oracle_maximal",
    "oracle_family_mean",
    "deviation_maximal",
    "deviation_family",
    "samples",
];

fn conventions(config: &ExperimentConfig) -> Conventions {
    Conventions {
        u0: config.drive.u0_convention,
        omega2: config.drive.omega2_convention,
        gauge: config.drive.amplitude_gauge,
    }
}

fn template(config: &ExperimentConfig) -> Result<ChainTemplate<f64>, ConfigError> {
    let c = &config.chain;
    Ok(ChainTemplate {
        n_sites: c.n_sites,
        j1: c.j1,
        j2: c.j2,
        b_field: c.b_field,
        e0: config.drive.e0,
        e1: config.drive.e1,
        impurity: config.impurity_spec()?,
        impurity_slope: config.impurity.as_ref().map_or(0.25, |i| i.slope),
    })
}

fn schedule(config: &ExperimentConfig) -> Result<KickSchedule<f64>, ConfigError> {
    let d = &config.drive;
    Ok(KickSchedule::new(d.tau, d.e0, d.e1, d.n_kicks)?.with_convention(d.u0_convention))
}

/// One labelled plan per curve; a config without curves yields a single
/// plan labelled `base`.
pub(crate) fn sweep_plans(config: &ExperimentConfig) -> Result<Vec<(String, SweepPlan<f64>)>, ConfigError> {
    let axis = config.require_axis()?;
    let grid = config
        .run
        .grid_values()?
        .ok_or_else(|| ConfigError::Invalid {
            key: "run.grid".into(),
            message: "sweep mode needs `grid` or `grid_range`".into(),
        })?;
    let r = &config.run;
    let budget = Budget {
        tau_grid: r.tau_range.values()?,
        m_max: r.m_max,
        continuous_t_max: r.continuous_t_max,
        continuous_when_unkicked: r.continuous_when_unkicked,
    };
    let base = template(config)?;
    let plan_for = |template: ChainTemplate<f64>| SweepPlan {
        template,
        axis,
        grid: grid.clone(),
        budget: budget.clone(),
        states: r.states.clone(),
        conventions: conventions(config),
        retain_series: false,
    };
    if r.curves.is_empty() {
        return Ok(vec![("base".into(), plan_for(base))]);
    }
    r.curves
        .iter()
        .map(|curve| {
            let mut t = base.clone();
            if let Some(e1) = curve.e1 {
                t.e1 = e1;
            }
            if let Some(s) = curve.impurity_strength {
                let block = config.impurity.as_ref().expect("validated impurity block");
                t.impurity = Some(block.at_strength(config.chain.n_sites, s));
            }
            Ok((curve.label.clone(), plan_for(t)))
        })
        .collect()
}

/// Fidelity per kick for every requested state.
pub fn run_evolve(config: &ExperimentConfig) -> Result<Table, ConfigError> {
    let params = template(config)?.params()?;
    let schedule = schedule(config)?;
    let states = &config.run.states;
    let series = fidelity_series_all(&params, &schedule, states, schedule.n_kicks, conventions(config))?;

    let mut columns = vec!["kick_index".to_owned(), "time".to_owned()];
    if config.output.physical_time_column {
        columns.push("physical_time_ps".into());
    }
    columns.extend(states.iter().map(|s| format!("fidelity_{s}")));
    let flag_omega2 = states.contains(&StateTag::Omega2);
    if flag_omega2 {
        columns.push("out_of_range_omega2".into());
    }
    columns.push("classical_threshold".into());

    let mut table = Table::new(columns);
    for m in 0..=schedule.n_kicks {
        let t = schedule.time_after(m);
        let mut row: Vec<Cell> = vec![m.into(), t.into()];
        if config.output.physical_time_column {
            row.push((PS_PER_TIME_UNIT * t).into());
        }
        row.extend(states.iter().map(|s| Cell::from(series[s].values[m])));
        if flag_omega2 {
            row.push(series[&StateTag::Omega2].out_of_range[m].into());
        }
        row.push(classical_threshold::<f64>().into());
        table.push(row);
    }
    Ok(table)
}

/// Maximum fidelity per grid point, state and curve.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Table, ConfigError> {
    let mut table = Table::new(SWEEP_COLUMNS);
    for (label, plan) in sweep_plans(config)? {
        let result = sweep_axis(&plan, config.run.workers)?;
        for p in &result.points {
            let evolution = match p.best.mode {
                EvolutionMode::Kicked => "kicked",
                EvolutionMode::Continuous => "continuous",
            };
            table.push(vec![
                p.grid_value.into(),
                p.state.as_str().into(),
                p.best.value.into(),
                p.best.tau.into(),
                p.best.kicks.into(),
                p.best.out_of_range.into(),
                label.as_str().into(),
                evolution.into(),
            ]);
        }
    }
    Ok(table)
}

/// Spectrum of each state's kick series over bins `0..=L/2`.
pub fn run_periodogram(config: &ExperimentConfig) -> Result<Table, ConfigError> {
    let params = template(config)?.params()?;
    let schedule = schedule(config)?;
    let states = &config.run.states;
    let series = fidelity_series_all(&params, &schedule, states, schedule.n_kicks, conventions(config))?;

    let mut table = Table::new(PERIODOGRAM_COLUMNS);
    for s in states {
        let p = periodogram(&series[s].values)?;
        for k in 0..=p.len() / 2 {
            let f = p.frequencies[k];
            table.push(vec![
                s.as_str().into(),
                k.into(),
                f.into(),
                (k > 0).then(|| 1.0 / f).into(),
                p.magnitudes[k].into(),
                (p.dominant_bin == Some(k)).into(),
            ]);
        }
    }
    Ok(table)
}

/// Closed-form two-qubit fidelities against the partial-trace oracle on
/// short chains with the config's couplings and drive.
pub fn run_conformance(config: &ExperimentConfig) -> Result<Table, ConfigError> {
    let d = &config.drive;
    let settings = ConformanceSettings {
        j1: config.chain.j1,
        j2: config.chain.j2,
        e0: d.e0,
        e1: d.e1,
        kick_interval: d.tau,
        samples: config.run.samples,
        seed: config.run.seed,
        ..ConformanceSettings::default()
    };
    let report = conformance_report(&settings)?;
    let mut table = Table::new(CONFORMANCE_COLUMNS);
    for r in &report.rows {
        let form = serde_json::to_value(r.closed_form).expect("enum serializes");
        let gauge = serde_json::to_value(r.gauge).expect("enum serializes");
        table.push(vec![
            r.n_sites.into(),
            r.evolution.into(),
            r.time.into(),
            r.kick_index.into(),
            form.as_str().unwrap_or_default().into(),
            gauge.as_str().unwrap_or_default().into(),
            r.closed_form_value.into(),
            r.out_of_range.into(),
            r.oracle_maximal.into(),
            r.oracle_family_mean.into(),
            r.deviation_maximal.into(),
            r.deviation_family.into(),
            settings.samples.into(),
        ]);
    }
    Ok(table)
}

/// Runs `config` in `mode`.
pub fn run(config: &ExperimentConfig, mode: RunMode) -> Result<Table, ConfigError> {
    match mode {
        RunMode::Evolve => run_evolve(config),
        RunMode::Sweep => run_sweep(config),
        RunMode::Periodogram => run_periodogram(config),
    }
}
