use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sparchsim", version, about = "Outer-product SpGEMM accelerator model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one product and report statistics
    Run(RunArgs),
    /// Check simulated products against the reference kernel
    Verify(VerifyArgs),
    /// Sweep one hardware parameter over a matrix corpus
    Sweep(SweepArgs),
    /// Write an rMAT matrix in Matrix Market form
    Gen(GenArgs),
    /// Evaluate the analytical re-read and traffic model
    Model(ModelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Values {
    /// integer for rMAT and integer or pattern files, real otherwise
    Auto,
    Integer,
    Real,
}

/// Where matrices come from and how they are simulated.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// left matrix (Matrix Market)
    #[arg(long = "a", value_name = "PATH")]
    pub a: Option<PathBuf>,
    /// right matrix; the product is A×A when omitted
    #[arg(long = "b", value_name = "PATH")]
    pub b: Option<PathBuf>,
    /// synthesize A with rMAT: scale, ef, a, b, c, d, seed
    #[arg(long, value_name = "K=V,...")]
    pub rmat: Option<String>,
    /// seeds rMAT and the random schedule
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// no-condense, no-prefetch, schedule=huffman|sequential|random
    #[arg(long, value_name = "FLAG,...")]
    pub flags: Vec<String>,
    /// hardware overrides applied after the config file
    #[arg(long, value_name = "K=V,...")]
    pub hw: Vec<String>,
    /// hardware configuration as JSON
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long = "value-type", value_enum, default_value_t = Values::Auto)]
    pub value_type: Values,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// statistics destination; stdout when omitted
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// write the merge plan as JSON
    #[arg(long, value_name = "PATH")]
    pub dump_plan: Option<PathBuf>,
    /// write the product as Matrix Market
    #[arg(long, value_name = "PATH")]
    pub result: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// rMAT corpus size; matrix i uses seed + i
    #[arg(long, default_value_t = 1)]
    pub matrices: u64,
    /// verify under all twelve flag combinations
    #[arg(long)]
    pub all_flags: bool,
    /// corrupt the simulated product before comparing
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// line_elements, buffer_lines, merger_width, lookahead or tree_layers
    #[arg(long)]
    pub axis: String,
    /// axis values
    #[arg(long, value_name = "V,...", value_delimiter = ',', num_args = 0..)]
    pub values: Vec<String>,
    /// rMAT corpus size; matrix i uses seed + i
    #[arg(long, default_value_t = 1)]
    pub matrices: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// scale, ef, a, b, c, d, seed
    #[arg(long, value_name = "K=V,...", default_value = "scale=10,ef=8")]
    pub rmat: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// column count before condensing
    #[arg(long)]
    pub n: u64,
    /// merge way per round
    #[arg(long, default_value_t = 64)]
    pub w: u64,
    /// column count after condensing
    #[arg(long, default_value_t = 100)]
    pub condensed: u64,
    /// final result size relative to the product count
    #[arg(long, default_value_t = 0.5)]
    pub final_ratio: f64,
    /// prefetch buffer hit rate
    #[arg(long, default_value_t = 0.62)]
    pub hit_rate: f64,
    /// product count; traffic is also reported in elements when given
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}
