//! Command-line surface. Flags only; no environment variables or config
//! files.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bestprox",
    version,
    about = "Best proximity points of cyclic contractions with certified error bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate from a start point until a stopping rule holds.
    Solve(SolveArgs),
    /// Regenerate an iteration-count grid over ε × p.
    Table(TableArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Evaluate the modulus of convexity and its power-type lower bound.
    Modulus(ModulusArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapChoice {
    /// T(x, y) = (−((1−λ)·sign(x) + λx), −λy) on A = {|y| ≤ x − 1}, B = −A.
    Example1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    Apriori,
    Aposteriori,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Markdown,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArithmeticChoice {
    /// IEEE double precision.
    Double,
    /// Multi-precision binary floating point.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteChoice {
    Norms,
    Cyclic,
    Bounds,
    Tables,
    All,
}

/// Map selection shared by `solve` and `table`.
#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long, value_enum, default_value = "example1")]
    pub map: MapChoice,
    /// Contraction parameter λ ∈ (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
}

/// Output selection shared by every command.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the machine-readable result (CSV) to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "plain")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Exponent of the ℓ_p norm (p > 1).
    #[arg(long)]
    pub p: f64,
    /// Start point, comma separated.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub x0: NumList,
    /// Error tolerance.
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "aposteriori")]
    pub criterion: Criterion,
    /// Even cap on the number of map applications.
    #[arg(long, default_value_t = bestprox_core::solver::DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    #[arg(long, value_enum, default_value = "extended")]
    pub arithmetic: ArithmeticChoice,
    /// Skip the reference-solution comparison.
    #[arg(long)]
    pub no_oracle: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Which bound decides the count.
    #[arg(
        long,
        visible_alias = "kind",
        value_enum,
        default_value = "aposteriori"
    )]
    pub criterion: Criterion,
    /// Start point, comma separated.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true, default_value = "1000,8")]
    pub x0: NumList,
    /// Tolerances, comma separated.
    #[arg(long, value_parser = parse_list, default_value = "1e-2,1e-4,1e-6,1e-8,1e-10")]
    pub eps: NumList,
    /// Exponents, comma separated.
    #[arg(long, value_parser = parse_list, default_value = "1.1,1.5,2,3,5,20")]
    pub p: NumList,
    #[arg(long, default_value_t = bestprox_core::solver::DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    #[arg(long, value_enum, default_value = "extended")]
    pub arithmetic: ArithmeticChoice,
    /// Append the published grid and the deltas; exit 1 if a delta exceeds
    /// ±2 (a posteriori) or ±4 (a priori).
    #[arg(long)]
    pub compare_paper: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteChoice,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Override the declared contraction coefficient of every scenario map
    /// (negative control).
    #[arg(long)]
    pub declared_k: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    /// Exponent of the ℓ_p norm (p > 1).
    #[arg(long)]
    pub p: f64,
    /// Argument ε ∈ (0, 2].
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Comma-separated numbers given as one flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct NumList(pub Vec<f64>);

/// Parses `a,b,c` into numbers.
pub fn parse_list(s: &str) -> Result<NumList, String> {
    let values = s
        .split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .map_err(|e| format!("'{part}' is not a number: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(NumList(values))
}
