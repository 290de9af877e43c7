//! Matrix sources, configuration precedence and output plumbing.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use sparchsim::matrix::{load_matrix_market, rmat_generate, CsrMatrix, RmatParams};
use sparchsim::{AblationFlags, HardwareConfig, Scalar};

use crate::args::{InputArgs, Values};
use crate::{CliError, CliResult};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Splits `k=v,k=v` into trimmed pairs.
pub fn parse_kv(spec: &str) -> CliResult<Vec<(String, String)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| match item.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(usage(format!("expected key=value, got '{item}'"))),
        })
        .collect()
}

pub fn rmat_params(spec: &str, seed: u64) -> CliResult<RmatParams> {
    let mut p = RmatParams::new(10, 8, seed);
    for (k, v) in parse_kv(spec)? {
        let bad = || usage(format!("bad rmat value '{v}' for {k}"));
        match k.as_str() {
            "scale" => p.scale = v.parse().map_err(|_| bad())?,
            "ef" | "edge_factor" => p.edge_factor = v.parse().map_err(|_| bad())?,
            "seed" => p.seed = v.parse().map_err(|_| bad())?,
            "a" => p.a = v.parse().map_err(|_| bad())?,
            "b" => p.b = v.parse().map_err(|_| bad())?,
            "c" => p.c = v.parse().map_err(|_| bad())?,
            "d" => p.d = v.parse().map_err(|_| bad())?,
            _ => return Err(usage(format!("unknown rmat key '{k}'"))),
        }
    }
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Rmat(RmatParams),
}

impl Source {
    pub fn label(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Rmat(p) => format!("rmat:scale={},ef={},seed={}", p.scale, p.edge_factor, p.seed),
        }
    }

    pub fn load<T: Scalar>(&self) -> CliResult<CsrMatrix<T>> {
        Ok(match self {
            Source::File(p) => load_matrix_market(p)?,
            Source::Rmat(p) => rmat_generate(p)?,
        })
    }

    fn is_integer(&self) -> CliResult<bool> {
        match self {
            Source::Rmat(_) => Ok(true),
            Source::File(p) => integer_header(p),
        }
    }
}

/// Whether a Matrix Market banner declares `integer` or `pattern` values.
fn integer_header(path: &Path) -> CliResult<bool> {
    let file = fs::File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut line = String::new();
    BufReader::new(file).read_line(&mut line).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let field = line.split_whitespace().nth(3).unwrap_or("").to_ascii_lowercase();
    Ok(field == "integer" || field == "pattern")
}

/// Everything needed to simulate besides the matrices.
#[derive(Debug, Clone)]
pub struct Setup {
    pub hw: HardwareConfig,
    pub flags: AblationFlags,
    /// left operands, one per corpus member
    pub sources: Vec<Source>,
    pub right: Option<Source>,
    pub integer: bool,
}

impl Setup {
    /// Defaults, then the JSON config file, then `--hw` overrides.
    pub fn from_args(args: &InputArgs, corpus: u64) -> CliResult<Self> {
        let mut hw = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
            }
            None => HardwareConfig::default(),
        };
        for spec in &args.hw {
            for (k, v) in parse_kv(spec)? {
                hw.set(&k, &v)?;
            }
        }
        hw.validate()?;

        let mut flags = AblationFlags { seed: args.seed, ..AblationFlags::default() };
        for spec in &args.flags {
            for flag in spec.split(',').filter(|f| !f.trim().is_empty()) {
                flags.apply(flag)?;
            }
        }

        if corpus == 0 {
            return Err(usage("--matrices must be at least 1"));
        }
        let sources = match (&args.a, &args.rmat) {
            (Some(path), None) if corpus == 1 => vec![Source::File(path.clone())],
            (Some(_), None) => return Err(usage("--matrices applies to --rmat corpora only")),
            (None, Some(spec)) => {
                let base = rmat_params(spec, args.seed)?;
                (0..corpus).map(|i| Source::Rmat(RmatParams { seed: base.seed + i, ..base })).collect()
            }
            _ => return Err(usage("give exactly one of --a or --rmat")),
        };
        let right = args.b.clone().map(Source::File);

        let integer = match args.value_type {
            Values::Integer => true,
            Values::Real => false,
            Values::Auto => {
                let mut all = true;
                for s in sources.iter().chain(right.iter()) {
                    all &= s.is_integer()?;
                }
                all
            }
        };
        Ok(Self { hw, flags, sources, right, integer })
    }

    /// Loads corpus member `i` and its right operand.
    pub fn operands<T: Scalar>(&self, i: usize) -> CliResult<(CsrMatrix<T>, CsrMatrix<T>)> {
        let a = self.sources[i].load()?;
        let b = match &self.right {
            Some(src) => src.load()?,
            None => a.clone(),
        };
        Ok((a, b))
    }
}

/// Rayon pool sized by `SPARCHSIM_THREADS` when set.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let threads = match std::env::var("SPARCHSIM_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(usage(format!("SPARCHSIM_THREADS must be a positive integer, got '{v}'"))),
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| usage(e.to_string()))
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult {
    let res = match path {
        Some(p) => fs::write(p, bytes).map_err(|e| (p.display().to_string(), e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| ("stdout".to_string(), e)),
    };
    res.map_err(|(p, e)| usage(format!("{p}: {e}")))
}
