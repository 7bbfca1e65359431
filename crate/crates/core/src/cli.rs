//! Command-line front end: configuration, suite selection and report output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::report::{exit_status, Report};
use crate::sample::SampleConfig;
use crate::verify::{all_checks, find_by_any_id, run_suite, Suite};

/// Smallest accepted working precision in bits.
pub const MIN_PRECISION: u32 = 64;

/// Exit status for reports that could not be written.
pub const EXIT_IO: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Lemmas,
    Theorem4,
    Corollary7,
    Corollary8,
    Corollary9,
    Watson,
    Remark3,
}

impl SuiteArg {
    pub fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::All => Suite::ALL.to_vec(),
            SuiteArg::Lemmas => vec![Suite::Lemmas],
            SuiteArg::Theorem4 => vec![Suite::Theorem4],
            SuiteArg::Corollary7 => vec![Suite::Corollary7],
            SuiteArg::Corollary8 => vec![Suite::Corollary8],
            SuiteArg::Corollary9 => vec![Suite::Corollary9],
            SuiteArg::Watson => vec![Suite::Watson],
            SuiteArg::Remark3 => vec![Suite::Remark3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Verify q-series identities and continued fractions numerically.
#[derive(Clone, Debug, PartialEq, Parser)]
#[command(name = "qentry40", version)]
pub struct RunConfig {
    /// Working precision in bits.
    #[arg(
        long = "precision",
        env = "QENTRY40_PRECISION",
        default_value_t = 256,
        value_parser = clap::value_parser!(u32).range(MIN_PRECISION as i64..)
    )]
    pub precision_bits: u32,

    /// Seed of all random draws.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Trials per check.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    pub trials: u64,

    /// Checks to run.
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Describe what a check compares and exit.
    #[arg(long, value_name = "ID", conflicts_with = "output")]
    pub explain: Option<String>,

    /// Perturb one continued-fraction coefficient so that checks must fail.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

impl RunConfig {
    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig {
            seed: self.seed,
            trials: self.trials as usize,
            precision_bits: self.precision_bits,
            fault_injection: self.inject_fault,
            ..SampleConfig::default()
        }
    }
}

/// Parse a full argument vector, program name first.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    RunConfig::try_parse_from(argv)
}

/// Text for `--explain`, or `None` for an unknown id.
pub fn explain(id: &str) -> Option<String> {
    let c = find_by_any_id(id)?;
    Some(format!(
        "{} (suite {}; results {})\n{}\n",
        c.id,
        c.suite,
        c.outcomes.join(", "),
        c.description
    ))
}

/// Run the selected suites and write the report; returns the exit status.
pub fn run(config: &RunConfig) -> i32 {
    if let Some(id) = &config.explain {
        return match explain(id) {
            Some(text) => {
                print!("{text}");
                0
            }
            None => {
                let ids: Vec<&str> = all_checks()
                    .iter()
                    .flat_map(|c| c.outcomes.iter().copied())
                    .collect();
                eprintln!("unknown id {id:?}; known ids: {}", ids.join(", "));
                1
            }
        };
    }
    let suites = config.suite.suites();
    let cfg = config.sample_config();
    let results = run_suite(&cfg, &suites);
    let report = Report {
        seed: config.seed,
        precision_bits: config.precision_bits,
        trials: cfg.trials,
        suites: suites.iter().map(|s| s.name().to_string()).collect(),
        results,
    };
    let body = match config.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    let written = match &config.output {
        Some(path) => std::fs::write(path, body.as_bytes()),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return EXIT_IO;
    }
    exit_status(&report.results)
}

/// Parse `argv`, run, and return the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(config) => run(&config),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = parse_args(["qentry40"]).unwrap();
        // The environment may override the default precision.
        if std::env::var_os("QENTRY40_PRECISION").is_none() {
            assert_eq!(c.precision_bits, 256);
        }
        assert_eq!(
            (c.seed, c.trials, c.suite, c.format),
            (1, 20, SuiteArg::All, Format::Text)
        );
        assert_eq!(c.output, None);
        assert!(!c.inject_fault);
    }

    #[test]
    fn explicit_values() {
        let c = parse_args([
            "qentry40", "--suite", "watson", "--seed", "7", "--trials", "5",
        ])
        .unwrap();
        assert_eq!((c.suite, c.seed, c.trials), (SuiteArg::Watson, 7, 5));
        assert_eq!(c.sample_config().trials, 5);
    }

    #[test]
    fn invalid_arguments() {
        assert!(parse_args(["qentry40", "--precision", "16"]).is_err());
        assert!(parse_args(["qentry40", "--suite", "theorem5"]).is_err());
        assert!(parse_args(["qentry40", "--trials", "x"]).is_err());
        assert!(parse_args(["qentry40", "--bogus"]).is_err());
        assert!(parse_args(["qentry40", "--explain", "lemma1", "--output", "x"]).is_err());
    }

    #[test]
    fn explain_accepts_check_and_result_ids() {
        assert!(explain("lemma1").unwrap().contains("10phi9"));
        assert!(explain("recurrence_x3").unwrap().starts_with("recurrence"));
        assert!(explain("nothing").is_none());
    }
}
