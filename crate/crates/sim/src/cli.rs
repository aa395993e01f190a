use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context};
use clap::{Parser, ValueEnum};
use demon_core::{DemonParams, Objective, PolarityStrategy};

use crate::experiments::{self, Family, Settings};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Table3,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Eval,
    Optimize,
    Passivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Thermal,
    Split,
    Tmss,
    Anticorrelated,
    FixedM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveKind {
    Total,
    Demon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

/// Optical Maxwell's demon: reproduce the tables and figure data as CSV, or
/// evaluate and optimize a single input state.
#[derive(Debug, Clone, Parser)]
#[command(name = "demon", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub subcommand: Command,
    /// Input state for eval/optimize/passivity.
    #[arg(long, value_enum, default_value = "thermal")]
    pub family: FamilyKind,
    /// Mean photon number (per mode; the input of the splitter for `split`;
    /// n̄_A for fig6).
    #[arg(long)]
    pub nbar: Option<f64>,
    /// n̄_B for thermal inputs (defaults to --nbar).
    #[arg(long)]
    pub nbar_b: Option<f64>,
    /// n̄_B/n̄_A for fig4 (repeatable).
    #[arg(long)]
    pub ratio: Vec<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Splitting angle for `split`.
    #[arg(long, default_value_t = FRAC_PI_4)]
    pub theta: f64,
    /// Comma-separated sweep values overriding the default grid.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = demon_core::DEFAULT_EPS_TAIL)]
    pub eps_tail: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Objective evaluations per simplex start.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fixed polarity strategy as a bitmask over (0,0),(0,1),(1,0),(1,1),
    /// least significant first, e.g. 4 or 0b0100 for s(1,0)=1.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<PolarityStrategy>,
    /// Optimize R_A and R_B separately.
    #[arg(long)]
    pub independent_r: bool,
    /// Also write per-start traces (CSV, stderr).
    #[arg(long, short)]
    pub verbose: bool,
    #[arg(long, value_enum, default_value = "total")]
    pub objective: ObjectiveKind,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Parameters for eval: common R (or R_A with --r-b).
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub r_b: Option<f64>,
    #[arg(long)]
    pub eta_a: Option<f64>,
    #[arg(long)]
    pub eta_b: Option<f64>,
    /// Bath occupation for passivity (defaults to --nbar).
    #[arg(long)]
    pub nbar_bath: Option<f64>,
    /// Write the joint pmf of the input state to this file.
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
}

pub fn parse_strategy(s: &str) -> Result<PolarityStrategy, String> {
    let bits = match s.strip_prefix("0b") {
        Some(b) => u8::from_str_radix(b, 2),
        None => s.parse(),
    }
    .map_err(|e| format!("{s:?}: {e}"))?;
    PolarityStrategy::from_bits(bits).ok_or_else(|| format!("strategy mask must be below 16, got {bits}"))
}

/// What a run produced. `ok` is false when an embedded expectation failed.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub trace: Option<Table>,
    pub ok: bool,
}

impl Args {
    pub fn settings(&self) -> anyhow::Result<Settings> {
        ensure!(
            self.eps_tail > 0.0 && self.eps_tail <= 1e-6,
            "--eps-tail must lie in (0, 1e-6], got {}",
            self.eps_tail
        );
        ensure!(self.budget > 0, "--budget must be positive");
        Ok(Settings {
            eps_tail: self.eps_tail,
            seed: self.seed,
            budget: self.budget,
            common_r: !self.independent_r,
            strategy: self.strategy,
        })
    }

    fn nbar(&self) -> anyhow::Result<f64> {
        self.nbar.context("--nbar is required for this family")
    }

    pub fn family(&self) -> anyhow::Result<Family> {
        Ok(match self.family {
            FamilyKind::Thermal => {
                let nbar_a = self.nbar()?;
                Family::Thermal { nbar_a, nbar_b: self.nbar_b.unwrap_or(nbar_a) }
            }
            FamilyKind::Split => Family::Split { nbar_in: self.nbar()?, theta: self.theta },
            FamilyKind::Tmss => Family::Tmss { nbar: self.nbar()? },
            FamilyKind::Anticorrelated => Family::Anticorrelated { nbar: self.nbar()? },
            FamilyKind::FixedM => Family::FixedM { m: self.m.context("--m is required for fixed-m")? },
        })
    }

    pub fn params(&self) -> anyhow::Result<DemonParams> {
        let r = self.r.context("--r is required")?;
        let eta_a = self.eta_a.context("--eta-a is required")?;
        let eta_b = self.eta_b.context("--eta-b is required")?;
        Ok(match self.r_b {
            Some(r_b) => DemonParams::independent(r, r_b, eta_a, eta_b)?,
            None => DemonParams::new(r, eta_a, eta_b)?,
        })
    }

    fn grid_or(&self, default: &[f64]) -> Vec<f64> {
        if self.grid.is_empty() {
            default.to_vec()
        } else {
            self.grid.clone()
        }
    }

    fn objective(&self) -> Objective {
        match self.objective {
            ObjectiveKind::Total => Objective::TotalDelta,
            ObjectiveKind::Demon => Objective::DemonContribution,
        }
    }
}

pub fn run(args: &Args) -> anyhow::Result<Report> {
    let settings = args.settings()?;
    let done = |table| Ok(Report { table, trace: None, ok: true });
    match args.subcommand {
        Command::Table3 => {
            let (table, ok) = experiments::table3(&settings)?;
            Ok(Report { table, trace: None, ok })
        }
        Command::Fig3 => done(experiments::fig3(&args.grid_or(&experiments::FIG_NBAR_GRID), &settings)?),
        Command::Fig4 => {
            let ratios = if args.ratio.is_empty() { experiments::FIG4_RATIOS.to_vec() } else { args.ratio.clone() };
            done(experiments::fig4(&ratios, &args.grid_or(&experiments::FIG_NBAR_GRID), &settings)?)
        }
        Command::Fig5 => done(experiments::fig5(&args.grid_or(&experiments::FIG_NBAR_GRID), &settings)?),
        Command::Fig6 => {
            let nbar_a = args.nbar.unwrap_or(experiments::FIG6_NBAR_A);
            // the grid is given as n̄_B/n̄_A
            done(experiments::fig6(nbar_a, &args.grid_or(&experiments::fig6_ratios()), &settings)?)
        }
        Command::Fig7 => done(experiments::fig7(&args.grid_or(&experiments::FIG7_GRID), &settings)?),
        Command::Eval | Command::Optimize | Command::Passivity => {
            let family = args.family()?;
            let state = family.build(settings.eps_tail)?;
            if let Some(path) = &args.dump_state {
                let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                experiments::dump_state(&state).write_csv(file)?;
            }
            match args.subcommand {
                Command::Eval => done(experiments::eval(&state, &args.params()?, args.strategy)),
                Command::Optimize => {
                    let (table, res) = experiments::optimize(&state, family.name(), args.objective(), &settings)?;
                    let trace = args.verbose.then(|| experiments::trace(&res.runs));
                    Ok(Report { table, trace, ok: true })
                }
                _ => {
                    let bath = match args.nbar_bath {
                        Some(b) => b,
                        None => args.nbar()?,
                    };
                    done(experiments::passivity(&state, bath, 1e-9)?)
                }
            }
        }
    }
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv_string(),
        Format::Text => table.to_text(),
    }
}

/// Rejects combinations clap cannot express.
pub fn validate(args: &Args) -> anyhow::Result<()> {
    if args.independent_r && args.subcommand != Command::Optimize {
        bail!("--independent-r only applies to optimize");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("demon").chain(extra.iter().copied())).unwrap()
    }

    fn value(report: &Report, row: usize, col: &str) -> f64 {
        report.table.value(row, col).unwrap_or_else(|| panic!("no {col} in row {row}"))
    }

    #[test]
    fn strategy_masks() {
        assert_eq!(parse_strategy("4").unwrap().bits(), 4);
        assert_eq!(parse_strategy("0b0100").unwrap().bits(), 4);
        assert!(parse_strategy("16").is_err());
        assert!(parse_strategy("x").is_err());
    }

    #[test]
    fn eps_tail_window() {
        for bad in ["0", "1e-5", "-1e-9"] {
            let a = Args::try_parse_from(["demon", "--subcommand", "fig3", &format!("--eps-tail={bad}")]).unwrap();
            assert!(a.settings().is_err(), "{bad}");
        }
        assert!(args(&["--subcommand", "fig3", "--eps-tail", "1e-6"]).settings().is_ok());
    }

    #[test]
    fn unknown_subcommand_rejected() {
        assert!(Args::try_parse_from(["demon", "--subcommand", "fig9"]).is_err());
    }

    #[test]
    fn eval_split_keep_strategy_gives_transmitted_difference() {
        let a = args(&[
            "--subcommand", "eval", "--family", "split", "--nbar", "3", "--theta", "1.0471975511965976", "--r", "0.3",
            "--eta-a", "0.8", "--eta-b", "0.5", "--strategy", "0",
        ]);
        let rep = run(&a).unwrap();
        let total = value(&rep, 4, "contribution");
        // n̄_A = 0.75, n̄_B = 2.25
        assert!((total - 0.7 * 1.5).abs() < 1e-10, "{total}");
        assert!(value(&rep, 6, "contribution").abs() < 1e-10);
    }

    #[test]
    fn passivity_verdicts() {
        let rep = run(&args(&["--subcommand", "passivity", "--nbar", "2"])).unwrap();
        assert_eq!(rep.table.rows[0][3], "passive");
        let rep = run(&args(&["--subcommand", "passivity", "--family", "split", "--nbar", "2", "--nbar-bath", "2"])).unwrap();
        assert_eq!(rep.table.rows[0][3], "not passive");
        assert_eq!(rep.table.rows[0][4], "MeanDiffersFromBath");
    }

    #[test]
    fn optimize_tmss_unit_mean() {
        let rep = run(&args(&["--subcommand", "optimize", "--family", "tmss", "--nbar", "1", "--verbose"])).unwrap();
        assert!((value(&rep, 0, "value") - 0.272).abs() < 0.002);
        assert!((value(&rep, 0, "r_a") - 0.373).abs() < 0.01);
        assert!((value(&rep, 0, "eta_a") - 0.415).abs() < 0.01);
        assert_eq!(value(&rep, 0, "eta_b"), 1.0);
        assert_eq!(rep.trace.unwrap().rows.len(), 16);
    }

    #[test]
    fn outputs_are_deterministic() {
        let a = args(&["--subcommand", "fig5", "--grid", "0.5,2", "--seed", "7"]);
        assert_eq!(run(&a).unwrap().table.to_csv_string(), run(&a).unwrap().table.to_csv_string());
    }

    #[test]
    fn fig7_ordering_and_domain() {
        let rep = run(&args(&["--subcommand", "fig7", "--grid", "1"])).unwrap();
        let v = |c| value(&rep, 0, c);
        assert!(v("anticorrelated") > v("tmss") && v("tmss") > v("uncorrelated") && v("uncorrelated") > v("split_thermal"));
        assert!(v("split_thermal").abs() < 1e-9);
        assert!(run(&args(&["--subcommand", "fig7", "--grid", "1.5"])).is_err());
    }

    #[test]
    fn fig6_series_at_equal_means() {
        let rep = run(&args(&["--subcommand", "fig6", "--grid", "1"])).unwrap();
        let demon = value(&rep, 0, "demon_only");
        assert!((demon / 1e4 - 16.0 / 27.0).abs() < 0.01, "{demon}");
        assert_eq!(value(&rep, 0, "strategy"), 4.0);
        assert_eq!(value(&rep, 0, "no_demon"), 0.0);
    }

    #[test]
    fn fig3_scaled_column() {
        let rep = run(&args(&["--subcommand", "fig3", "--grid", "1,4"])).unwrap();
        assert!((value(&rep, 0, "value") - 0.2554).abs() < 1e-3);
        assert!((value(&rep, 1, "value_over_nbar") * 4.0 - value(&rep, 1, "value")).abs() < 1e-12);
    }

    #[test]
    fn missing_family_parameter_is_an_error() {
        assert!(run(&args(&["--subcommand", "optimize", "--family", "fixed-m"])).is_err());
        assert!(run(&args(&["--subcommand", "eval", "--nbar", "1", "--r", "0.3"])).is_err());
    }

    #[test]
    fn independent_r_only_for_optimize() {
        assert!(validate(&args(&["--subcommand", "fig3", "--independent-r"])).is_err());
        assert!(validate(&args(&["--subcommand", "optimize", "--independent-r"])).is_ok());
    }
}
