use rayon::prelude::*;
use serde::Serialize;
use stepopt::mc::{mc_price, McEstimate};
use stepopt::spectrum::{
    approx_mode_high, approx_mode_low, exact_mode, high_error_absolute, high_error_estimate, low_error_estimate, n_max,
    n_max_raw, partition, FormulaRule,
};
use stepopt::{delta, price, MarketParams, OptionKind, PricingResult, StepOptionSpec, WellGeometry};

use crate::config::{Preset, RunConfig, SweepSpec, SweepVar};
use crate::output::{render_json, render_rows, Row};
use crate::CliError;

/// Table geometry: `a = ln 90`, `b = ln 130`.
pub fn table_geometry(mp: &MarketParams, v0: f64) -> Result<WellGeometry, CliError> {
    Ok(WellGeometry::new(mp, 90f64.ln(), 130f64.ln(), v0)?)
}

#[derive(Serialize)]
struct PriceReport<'a> {
    config: &'a RunConfig,
    result: PricingResult,
    mc: Option<McEstimate>,
}

pub fn cmd_price(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    let mp = cfg.market()?;
    let spec = cfg.spec();
    let x = cfg.spot.ln();
    let result = price(&mp, x, &spec, &cfg.pricing())?;
    let mc = if cfg.with_mc {
        Some(mc_price(&mp, x, &spec, &cfg.mc)?)
    } else {
        None
    };
    match cfg.format {
        crate::config::Format::Json => render_json(&PriceReport {
            config: cfg,
            result,
            mc,
        }),
        crate::config::Format::Csv => {
            let mut rows = vec![Row::echo(spec.kind.as_str(), cfg, &spec, cfg.spot).with_result(&result)];
            if let Some(est) = mc {
                let mut r = Row::echo(&format!("{}_mc", spec.kind), cfg, &spec, cfg.spot);
                r.price = est.mean;
                r.std_error = Some(est.std_error);
                rows.push(r);
            }
            render_rows(&rows, cfg.format)
        }
    }
}

/// One curve family of a sweep.
#[derive(Debug, Clone)]
pub struct Panel {
    pub kind: OptionKind,
    pub sweep: SweepSpec,
    pub delta: bool,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    kind: OptionKind,
    spot: f64,
    strike: f64,
    v0: f64,
    var: SweepVar,
    value: f64,
    delta: bool,
}

fn caption(cfg: &RunConfig) -> RunConfig {
    RunConfig {
        rate: 0.05,
        vol: 0.3,
        tau: 1.0,
        lower_barrier: 4.5,
        upper_barrier: 4.867,
        strike: 100.0,
        spot: 110.0,
        v0_series: vec![13.0, 26.0, 55.0],
        ..cfg.clone()
    }
}

fn sweep(variable: SweepVar, lo: f64, hi: f64, points: usize) -> SweepSpec {
    SweepSpec { variable, lo, hi, points }
}

/// Resolves a preset into its caption configuration and panels.
pub fn preset_panels(cfg: &RunConfig, preset: Preset) -> (RunConfig, Vec<Panel>) {
    let mut base = caption(cfg);
    let spot_pso = sweep(SweepVar::Spot, 50.0, 150.0, 101);
    let spot_pdbs = sweep(SweepVar::Spot, 90.5, 129.5, 79);
    let panel = |kind, sweep, delta| Panel { kind, sweep, delta };
    let panels = match preset {
        Preset::Fig1 => vec![panel(OptionKind::Pso, spot_pso, false), panel(OptionKind::Pdbs, spot_pdbs, false)],
        Preset::Fig2 => {
            base.spot = 4.605f64.exp();
            let strikes = sweep(SweepVar::Strike, 60.0, 125.0, 66);
            vec![panel(OptionKind::Pso, strikes, false), panel(OptionKind::Pdbs, strikes, false)]
        }
        Preset::Fig3 => {
            let v0s = sweep(SweepVar::V0, 5.0, 100.0, 96);
            vec![panel(OptionKind::Pso, v0s, false), panel(OptionKind::Pdbs, v0s, false)]
        }
        Preset::Fig4 => vec![panel(OptionKind::Pso, spot_pso, true), panel(OptionKind::Pdbs, spot_pdbs, true)],
    };
    (base, panels)
}

fn baseline_of(kind: OptionKind) -> Option<OptionKind> {
    match kind {
        OptionKind::Pso => Some(OptionKind::Uosb),
        OptionKind::Pdbs => Some(OptionKind::Sdb),
        _ => None,
    }
}

fn panel_jobs(cfg: &RunConfig, panel: &Panel) -> Vec<Job> {
    let grid = panel.sweep.grid();
    let var = panel.sweep.variable;
    let job = |kind, v0: f64, value: f64| {
        let (spot, strike, v0) = match var {
            SweepVar::Spot => (value, cfg.strike, v0),
            SweepVar::Strike => (cfg.spot, value, v0),
            SweepVar::V0 => (cfg.spot, cfg.strike, value),
        };
        Job {
            kind,
            spot,
            strike,
            v0,
            var,
            value,
            delta: panel.delta,
        }
    };
    let mut jobs = Vec::new();
    if panel.kind.is_step() && var != SweepVar::V0 {
        for &v0 in &cfg.v0_series {
            jobs.extend(grid.iter().map(|&g| job(panel.kind, v0, g)));
        }
    } else {
        jobs.extend(grid.iter().map(|&g| job(panel.kind, cfg.v0, g)));
    }
    let mut refs: Vec<OptionKind> = baseline_of(panel.kind).into_iter().collect();
    if panel.kind != OptionKind::Vanilla {
        refs.push(OptionKind::Vanilla);
    }
    for kind in refs {
        jobs.extend(grid.iter().map(|&g| job(kind, cfg.v0, g)));
    }
    jobs
}

fn run_job(cfg: &RunConfig, mp: &MarketParams, job: &Job) -> Result<Row, CliError> {
    let spec: StepOptionSpec = cfg.spec_for(job.kind, job.strike, job.v0);
    let x = job.spot.ln();
    let pc = cfg.pricing();
    let label = if job.delta {
        format!("{}_delta", job.kind)
    } else {
        job.kind.to_string()
    };
    let row = Row::echo(&label, cfg, &spec, job.spot).with_sweep(job.var.as_str(), job.value);
    if job.delta {
        let mut row = row;
        row.price = delta(mp, x, &spec, &pc)?;
        Ok(row)
    } else {
        Ok(row.with_result(&price(mp, x, &spec, &pc)?))
    }
}

/// Rows for every panel, evaluated in parallel and emitted in grid order.
pub fn sweep_rows(cfg: &RunConfig, panels: &[Panel]) -> Result<Vec<Row>, CliError> {
    cfg.validate()?;
    let mp = cfg.market()?;
    let jobs: Vec<Job> = panels.iter().flat_map(|p| panel_jobs(cfg, p)).collect();
    jobs.par_iter().map(|j| run_job(cfg, &mp, j)).collect()
}

fn resolve_sweep(cfg: &RunConfig, delta: bool) -> Result<(RunConfig, Vec<Panel>), CliError> {
    if let Some(p) = cfg.preset {
        return Ok(preset_panels(cfg, p));
    }
    let sweep = cfg
        .sweep
        .ok_or_else(|| CliError::Config("sweep needs a preset or --var/--lo/--hi/--points".into()))?;
    Ok((
        cfg.clone(),
        vec![Panel {
            kind: cfg.kind,
            sweep,
            delta,
        }],
    ))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let (base, panels) = resolve_sweep(cfg, false)?;
    render_rows(&sweep_rows(&base, &panels)?, cfg.format)
}

/// Delta at the configured spot, or along a spot sweep if one is given.
pub fn cmd_greeks(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.preset.is_some() || cfg.sweep.is_some() {
        let (base, mut panels) = resolve_sweep(cfg, true)?;
        panels.iter_mut().for_each(|p| p.delta = true);
        return render_rows(&sweep_rows(&base, &panels)?, cfg.format);
    }
    cfg.validate()?;
    let mp = cfg.market()?;
    let job = Job {
        kind: cfg.kind,
        spot: cfg.spot,
        strike: cfg.strike,
        v0: cfg.v0,
        var: SweepVar::Spot,
        value: cfg.spot,
        delta: true,
    };
    let mut row = run_job(cfg, &mp, &job)?;
    row.sweep_var = "none".into();
    row.sweep_value = None;
    render_rows(&[row], cfg.format)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub k_exact: f64,
    pub k_low: f64,
    pub k_high: f64,
    /// `|k_low − k_exact| / k_exact`.
    pub low_rel_err: f64,
    /// `|k_high − k_exact| / k_exact`.
    pub high_rel_err: f64,
    /// A-priori low-energy estimate `n²π²/(6β[β(b-a)+2]²)`.
    pub low_rel_err_estimate: f64,
    /// A-priori high-energy estimate `[…]^{3/2}/(12(n-1)π)`; absent at `n = 1`.
    pub high_rel_err_estimate: Option<f64>,
    /// A-priori high-energy absolute error divided by `k_high`.
    pub high_abs_err_over_k: f64,
}

pub fn table1_rows(mp: &MarketParams, v0: f64) -> Result<Vec<Table1Row>, CliError> {
    let geom = table_geometry(mp, v0)?;
    (1..=n_max(&geom)?)
        .map(|n| {
            let exact = exact_mode(&geom, n)?.k1;
            let low = approx_mode_low(&geom, n)?.k1;
            let high = approx_mode_high(&geom, n)?.k1;
            Ok(Table1Row {
                n,
                k_exact: exact,
                k_low: low,
                k_high: high,
                low_rel_err: (low - exact).abs() / exact,
                high_rel_err: (high - exact).abs() / exact,
                low_rel_err_estimate: low_error_estimate(&geom, n),
                high_rel_err_estimate: high_error_estimate(&geom, n).ok(),
                high_abs_err_over_k: high_error_absolute(&geom, n)? / high,
            })
        })
        .collect()
}

pub fn cmd_table1(cfg: &RunConfig) -> Result<String, CliError> {
    let mp = cfg.market()?;
    render_rows(&table1_rows(&mp, cfg.v0)?, cfg.format)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Row {
    pub v0: f64,
    pub beta: f64,
    pub beta_rounded: i64,
    pub n_max_raw: f64,
    pub n_max: usize,
    pub m_max1: usize,
    pub m_max2: usize,
    pub m1: usize,
    pub m2: usize,
    /// Cells as printed: `-` where a count adds no modes.
    pub m_max1_cell: String,
    pub m_max2_cell: String,
    pub m1_cell: String,
    pub m2_cell: String,
}

pub const TABLE2_V0: [f64; 3] = [55.0, 26.0, 13.0];

fn cell(count: usize, hidden: bool) -> String {
    if hidden {
        "-".into()
    } else {
        count.to_string()
    }
}

pub fn table2_rows(mp: &MarketParams) -> Result<Vec<Table2Row>, CliError> {
    TABLE2_V0
        .iter()
        .map(|&v0| {
            let geom = table_geometry(mp, v0)?;
            let p = partition(&geom, FormulaRule::TopLevel)?;
            Ok(Table2Row {
                v0,
                beta: geom.beta(),
                beta_rounded: geom.beta().round() as i64,
                n_max_raw: n_max_raw(&geom),
                n_max: p.n_max,
                m_max1: p.m_max1,
                m_max2: p.m_max2,
                m1: p.m1,
                m2: p.m2,
                m_max1_cell: cell(p.m_max1, p.m_max1 == p.m1),
                m_max2_cell: cell(p.m_max2, p.m_max2 == p.m2),
                m1_cell: cell(p.m1, p.m1 == 0),
                m2_cell: cell(p.m2, p.m2 == 0),
            })
        })
        .collect()
}

pub fn cmd_table2(cfg: &RunConfig) -> Result<String, CliError> {
    let mp = cfg.market()?;
    render_rows(&table2_rows(&mp)?, cfg.format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Format;

    #[test]
    fn vanilla_price_row() {
        let cfg = RunConfig {
            kind: OptionKind::Vanilla,
            ..RunConfig::default()
        };
        let out = cmd_price(&cfg).unwrap();
        let mut lines = out.lines();
        assert!(lines.next().unwrap().starts_with("kind,sweep_var,sweep_value,v0,spot,strike"));
        let row = lines.next().unwrap();
        let price: f64 = row.split(',').nth(11).unwrap().parse().unwrap();
        assert!((price - 21.06).abs() < 0.01);
    }

    #[test]
    fn explicit_sweep_layout() {
        let cfg = RunConfig {
            kind: OptionKind::Pso,
            sweep: Some(sweep(SweepVar::Spot, 100.0, 100.0 + 1e-6, 2)),
            v0_series: vec![26.0, 55.0],
            ..RunConfig::default()
        };
        let (base, panels) = resolve_sweep(&cfg, false).unwrap();
        let rows = sweep_rows(&base, &panels).unwrap();
        let kinds: Vec<&str> = rows.iter().map(|r| r.kind.as_str()).collect();
        assert_eq!(kinds, ["pso", "pso", "pso", "pso", "uosb", "uosb", "vanilla", "vanilla"]);
        assert!(rows[2].price <= rows[0].price);
        assert!(rows[0].c1.is_some() && rows[0].c3.is_none());
    }

    #[test]
    fn fig3_decreasing_in_v0() {
        let (base, panels) = preset_panels(&RunConfig::default(), Preset::Fig3);
        let rows = sweep_rows(&base, &panels[..1]).unwrap();
        let pso: Vec<f64> = rows.iter().filter(|r| r.kind == "pso").map(|r| r.price).collect();
        assert_eq!(pso.len(), 96);
        assert!(pso.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn table2_cells() {
        let rows = table2_rows(&MarketParams::new(0.05, 0.3).unwrap()).unwrap();
        let cells: Vec<[&str; 4]> = rows
            .iter()
            .map(|r| [r.m_max1_cell.as_str(), r.m_max2_cell.as_str(), r.m1_cell.as_str(), r.m2_cell.as_str()])
            .collect();
        assert_eq!(cells, [["2", "-", "1", "2"], ["1", "-", "-", "1"], ["-", "-", "-", "1"]]);
        assert_eq!(rows.iter().map(|r| r.beta_rounded).collect::<Vec<_>>(), [35, 24, 17]);
    }

    #[test]
    fn json_table() {
        let cfg = RunConfig {
            format: Format::Json,
            ..RunConfig::default()
        };
        let out = cmd_table1(&cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 4);
    }
}
