use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::Format;
use realclone::DEFAULT_MAX_DIM;

pub const MAX_DIM_VAR: &str = "REALCLONE_MAX_DIM";

#[derive(Debug, Parser)]
#[command(name = "realclone", version, about = "Real-state quantum cloning machines: bounds, optimizer, explicit cloner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form fidelity bound
    Bound(BoundArgs),
    /// Numerical maximization of the fidelity under the cloning constraints
    Optimize(OptimizeArgs),
    /// Run the explicit cloner on one input state
    Clone(CloneArgs),
    /// Randomized property suite
    Verify(VerifyArgs),
    /// Bound curves for a range of dimensions, as CSV
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Dimension `N` or range `A..B`
    #[arg(long)]
    pub d: String,
    #[arg(long, default_value = "real")]
    pub family: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub d: String,
    #[arg(long, default_value = "real")]
    pub family: String,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Spectral convention of the objective
    #[arg(long, default_value = "table1")]
    pub basis: String,
    /// Trials for the constraint report on the optimum
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CloneArgs {
    /// Defaults to the number of components of `--state`
    #[arg(long)]
    pub d: Option<String>,
    /// Comma-separated real amplitudes
    #[arg(long, allow_hyphen_values = true)]
    pub state: String,
    #[arg(long, default_value = "real")]
    pub family: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    None,
    NegativeLambda,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "2..5")]
    pub d: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = FaultArg::None, hide = true)]
    pub inject_fault: FaultArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, conflicts_with_all = ["dmin", "dmax"])]
    pub d: Option<String>,
    #[arg(long)]
    pub dmin: Option<usize>,
    #[arg(long)]
    pub dmax: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Dimension cap, from the environment or the default.
pub fn max_dim() -> Result<usize, String> {
    match std::env::var(MAX_DIM_VAR) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(v) if v >= 2 => Ok(v),
            _ => Err(format!("{MAX_DIM_VAR} must be an integer >= 2, got `{raw}`")),
        },
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

fn check_range(lo: usize, hi: usize, max: usize) -> Result<Vec<usize>, String> {
    if lo < 2 || hi > max || lo > hi {
        return Err(format!(
            "dimension out of range: need 2 <= d <= {max} (got {})",
            if lo == hi { lo.to_string() } else { format!("{lo}..{hi}") }
        ));
    }
    Ok((lo..=hi).collect())
}

/// `N` or inclusive `A..B`.
pub fn parse_dims(raw: &str, max: usize) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid dimension `{raw}`: expected N or A..B");
    let raw_t = raw.trim();
    if let Some((a, b)) = raw_t.split_once("..") {
        let lo = a.trim().parse::<usize>().map_err(|_| bad())?;
        let hi = b.trim().parse::<usize>().map_err(|_| bad())?;
        check_range(lo, hi, max)
    } else {
        let d = raw_t.parse::<usize>().map_err(|_| bad())?;
        check_range(d, d, max)
    }
}

pub fn figure_dims(args: &FigureArgs, max: usize) -> Result<Vec<usize>, String> {
    match (&args.d, args.dmin, args.dmax) {
        (Some(raw), _, _) => parse_dims(raw, max),
        (None, Some(lo), Some(hi)) => check_range(lo, hi, max),
        _ => Err("figure needs --dmin and --dmax, or --d A..B".into()),
    }
}

/// Parsed `--state`, normalized, with a warning when it had to be rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedState {
    pub amplitudes: Vec<f64>,
    pub warning: Option<String>,
}

pub const RENORMALIZE_TOL: f64 = 1e-6;

pub fn parse_state(raw: &str) -> Result<ParsedState, String> {
    let mut amplitudes = Vec::new();
    for part in raw.split(',') {
        let t = part.trim();
        let decimal = !t.is_empty()
            && t.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+'))
            && t.chars().any(|c| c.is_ascii_digit());
        let value = decimal.then(|| t.parse::<f64>().ok()).flatten();
        match value {
            Some(v) => amplitudes.push(v),
            None => return Err(format!("invalid amplitude `{t}` in --state: expected a decimal number")),
        }
    }
    let norm = amplitudes.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = (norm - 1.0).abs();
    if off >= RENORMALIZE_TOL {
        return Err(format!(
            "state norm {norm} differs from 1 by more than {RENORMALIZE_TOL:e}; refusing to normalize"
        ));
    }
    let warning = (off > realclone::ANALYTIC_TOL)
        .then(|| format!("warning: state norm {norm} rescaled to 1"));
    Ok(ParsedState {
        amplitudes: amplitudes.iter().map(|x| x / norm).collect(),
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims() {
        assert_eq!(parse_dims("3", 32).unwrap(), vec![3]);
        assert_eq!(parse_dims("2..5", 32).unwrap(), vec![2, 3, 4, 5]);
        assert!(parse_dims("1", 32).is_err());
        assert!(parse_dims("33", 32).is_err());
        assert!(parse_dims("5..2", 32).is_err());
        assert!(parse_dims("x", 32).is_err());
        assert_eq!(parse_dims("40", 64).unwrap(), vec![40]);
    }

    #[test]
    fn state_parsing() {
        let s = parse_state("0.6,0.8").unwrap();
        assert_eq!(s.amplitudes, vec![0.6, 0.8]);
        assert!(s.warning.is_none());
        let s = parse_state("1.0000005,0").unwrap();
        assert_eq!(s.amplitudes, vec![1.0, 0.0]);
        assert!(s.warning.is_some());
        assert!(parse_state("1,1").is_err());
        assert!(parse_state("1e0,0").is_err());
        assert!(parse_state("1,").is_err());
        assert!(parse_state("-1, 0").is_ok());
    }
}
