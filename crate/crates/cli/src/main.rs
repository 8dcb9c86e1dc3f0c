use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use stepopt::spectrum::FormulaRule;
use stepopt::{OptionKind, SpectrumChoice};
use stepopt_cli::{destination, run, CliError, Command, Format, Preset, RunConfig, SweepSpec, SweepVar, OUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "stepopt", version, about = "Price proportional step and double-barrier step call options")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: $STEPOPT_OUT_DIR/<command>.<ext>, else stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fewer Monte Carlo paths with proportionally wider tolerances.
    #[arg(long, global = true)]
    quick: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Price one contract.
    Price {
        #[command(flatten)]
        contract: ContractArgs,
        /// Also report a Monte Carlo estimate.
        #[arg(long)]
        mc: bool,
    },
    /// Price along a grid or a figure preset.
    Sweep {
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        grid: SweepArgs,
    },
    /// Wavenumber errors of the closed-form spectra.
    Table1 {
        #[command(flatten)]
        contract: ContractArgs,
    },
    /// Bound-state counts by formula and parity.
    Table2 {
        #[command(flatten)]
        contract: ContractArgs,
    },
    /// Run the consistency checks and print a JSON report.
    Validate {
        #[command(flatten)]
        contract: ContractArgs,
    },
    /// Finite-difference delta at a spot or along a sweep.
    Greeks {
        #[command(flatten)]
        contract: ContractArgs,
        #[command(flatten)]
        grid: SweepArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpectrumArg {
    Exact,
    Mixed,
    Nearest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VarArg {
    Spot,
    Strike,
    V0,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Args, Debug, Default)]
struct ContractArgs {
    /// pso, pdbs, uosb, sdb or vanilla.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    spot: Option<f64>,
    #[arg(long)]
    strike: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    vol: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Upper barrier as a log-price.
    #[arg(long, alias = "barrier")]
    upper: Option<f64>,
    /// Lower barrier as a log-price.
    #[arg(long)]
    lower: Option<f64>,
    #[arg(long)]
    v0: Option<f64>,
    #[arg(long, value_enum)]
    spectrum: Option<SpectrumArg>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Monte Carlo steps per year.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long, value_enum)]
    var: Option<VarArg>,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Comma-separated knock-out rates, one curve each.
    #[arg(long, value_delimiter = ',')]
    v0_list: Option<Vec<f64>>,
}

fn apply_contract(cfg: &mut RunConfig, c: &ContractArgs) -> Result<(), CliError> {
    if let Some(k) = &c.kind {
        cfg.kind = k.parse::<OptionKind>()?;
    }
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.spot, c.spot);
    set(&mut cfg.strike, c.strike);
    set(&mut cfg.rate, c.rate);
    set(&mut cfg.vol, c.vol);
    set(&mut cfg.tau, c.tau);
    set(&mut cfg.upper_barrier, c.upper);
    set(&mut cfg.lower_barrier, c.lower);
    set(&mut cfg.v0, c.v0);
    set(&mut cfg.quad.rel_tol, c.rel_tol);
    if let Some(s) = c.spectrum {
        cfg.spectrum = match s {
            SpectrumArg::Exact => SpectrumChoice::Exact,
            SpectrumArg::Mixed => SpectrumChoice::Mixed(FormulaRule::TopLevel),
            SpectrumArg::Nearest => SpectrumChoice::Mixed(FormulaRule::NearestRoot),
        };
    }
    if let Some(n) = c.paths {
        cfg.mc.n_paths = n;
    }
    if let Some(n) = c.steps {
        cfg.mc.n_steps = n;
    }
    Ok(())
}

fn apply_sweep(cfg: &mut RunConfig, s: &SweepArgs) -> Result<(), CliError> {
    if let Some(p) = s.preset {
        cfg.preset = Some(match p {
            PresetArg::Fig1 => Preset::Fig1,
            PresetArg::Fig2 => Preset::Fig2,
            PresetArg::Fig3 => Preset::Fig3,
            PresetArg::Fig4 => Preset::Fig4,
        });
    }
    if let Some(list) = &s.v0_list {
        cfg.v0_series = list.clone();
    }
    let any = s.var.is_some() || s.lo.is_some() || s.hi.is_some() || s.points.is_some();
    if any {
        let base = cfg.sweep;
        let variable = match s.var {
            Some(VarArg::Spot) => SweepVar::Spot,
            Some(VarArg::Strike) => SweepVar::Strike,
            Some(VarArg::V0) => SweepVar::V0,
            None => base.map(|b| b.variable).unwrap_or(SweepVar::Spot),
        };
        let need = |v: Option<f64>, old: Option<f64>, name: &str| {
            v.or(old).ok_or_else(|| CliError::Config(format!("sweep needs --{name}")))
        };
        cfg.sweep = Some(SweepSpec {
            variable,
            lo: need(s.lo, base.map(|b| b.lo), "lo")?,
            hi: need(s.hi, base.map(|b| b.hi), "hi")?,
            points: s.points.or(base.map(|b| b.points)).unwrap_or(21),
        });
    }
    Ok(())
}

fn build(cli: &Cli) -> Result<(Command, RunConfig), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    let command = match &cli.command {
        Sub::Price { contract, mc } => {
            apply_contract(&mut cfg, contract)?;
            cfg.with_mc |= *mc;
            Command::Price
        }
        Sub::Sweep { contract, grid } => {
            apply_contract(&mut cfg, contract)?;
            apply_sweep(&mut cfg, grid)?;
            Command::Sweep
        }
        Sub::Greeks { contract, grid } => {
            apply_contract(&mut cfg, contract)?;
            apply_sweep(&mut cfg, grid)?;
            Command::Greeks
        }
        Sub::Table1 { contract } => {
            apply_contract(&mut cfg, contract)?;
            Command::Table1
        }
        Sub::Table2 { contract } => {
            apply_contract(&mut cfg, contract)?;
            Command::Table2
        }
        Sub::Validate { contract } => {
            apply_contract(&mut cfg, contract)?;
            Command::Validate
        }
    };
    if let Some(f) = cli.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(p) = &cli.out {
        cfg.out = Some(p.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    cfg.quick |= cli.quick;
    Ok((command, cfg))
}

fn report(e: &CliError) {
    let msg = serde_json::json!({ "error": e.class(), "message": e.to_string() });
    eprintln!("{msg}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, cfg) = match build(&cli) {
        Ok(v) => v,
        Err(e) => {
            report(&e);
            return ExitCode::from(2);
        }
    };
    let outcome = match run(command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            report(&e);
            return ExitCode::from(2);
        }
    };
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let written = match destination(command, &cfg, env_dir) {
        Some(path) => std::fs::write(&path, outcome.text.as_bytes()).map_err(CliError::from),
        None => {
            print!("{}", outcome.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        report(&e);
        return ExitCode::from(2);
    }
    if outcome.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> (Command, RunConfig) {
        build(&Cli::try_parse_from(args).unwrap()).unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let (cmd, cfg) = parse(&["stepopt", "price", "--kind", "vanilla", "--spot", "120", "--seed", "9", "--format", "json"]);
        assert_eq!(cmd, Command::Price);
        assert_eq!(cfg.kind, OptionKind::Vanilla);
        assert_eq!(cfg.spot, 120.0);
        assert_eq!(cfg.mc.seed, 9);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn sweep_flags() {
        let (_, cfg) = parse(&["stepopt", "sweep", "--var", "strike", "--lo", "80", "--hi", "120", "--points", "5", "--v0-list", "13,55"]);
        let s = cfg.sweep.unwrap();
        assert_eq!((s.variable, s.lo, s.hi, s.points), (SweepVar::Strike, 80.0, 120.0, 5));
        assert_eq!(cfg.v0_series, vec![13.0, 55.0]);
        let (_, cfg) = parse(&["stepopt", "sweep", "--preset", "fig2"]);
        assert_eq!(cfg.preset, Some(Preset::Fig2));
    }

    #[test]
    fn incomplete_sweep_rejected() {
        let cli = Cli::try_parse_from(["stepopt", "sweep", "--lo", "80"]).unwrap();
        assert!(build(&cli).is_err());
    }

    #[test]
    fn unknown_kind_rejected() {
        let cli = Cli::try_parse_from(["stepopt", "price", "--kind", "asian"]).unwrap();
        assert!(matches!(build(&cli), Err(CliError::Pricing(_))));
    }
}
