use rayon::prelude::*;
use serde::Serialize;

use sparchsim::matrix::{rmat_generate, write_matrix_market, CsrMatrix};
use sparchsim::simulator::{expected_rereads, simulate, simulate_report, traffic_steps, AnalysisParams};
use sparchsim::{AblationFlags, Scalar, SimStats};

use crate::args::{Format, GenArgs, ModelArgs, RunArgs, SweepArgs, VerifyArgs};
use crate::input::{emit, rmat_params, thread_pool, Setup};
use crate::{CliError, CliResult};

/// Relative tolerance for non-integer verification.
const REAL_TOLERANCE: f64 = 1e-12;

/// Sweepable axes and their accepted ranges.
const AXES: [(&str, usize, usize); 5] = [
    ("line_elements", 24, 60),
    ("buffer_lines", 256, 4096),
    ("merger_width", 2, 32),
    ("lookahead", 1024, 65536),
    ("tree_layers", 3, 8),
];

macro_rules! dispatch {
    ($integer:expr, $f:ident($($arg:expr),*)) => {
        if $integer { $f::<i64>($($arg),*) } else { $f::<f64>($($arg),*) }
    };
}

/// Flat form of [`SimStats`] for CSV output.
#[derive(Serialize)]
struct StatsRow {
    cycles: u64,
    seconds: f64,
    gflops: f64,
    read_left: u64,
    read_right: u64,
    read_partial: u64,
    read_final: u64,
    write_partial: u64,
    write_final: u64,
    multiplies: u64,
    adds: u64,
    partial_matrices: usize,
    rounds: usize,
    hit_rate: Option<f64>,
    bandwidth_utilization: f64,
    result_nnz: usize,
}

impl From<&SimStats> for StatsRow {
    fn from(s: &SimStats) -> Self {
        Self {
            cycles: s.cycles,
            seconds: s.seconds,
            gflops: s.gflops,
            read_left: s.dram_read_bytes.left,
            read_right: s.dram_read_bytes.right,
            read_partial: s.dram_read_bytes.partial,
            read_final: s.dram_read_bytes.final_,
            write_partial: s.dram_write_bytes.partial,
            write_final: s.dram_write_bytes.final_,
            multiplies: s.multiplies,
            adds: s.adds,
            partial_matrices: s.partial_matrices,
            rounds: s.rounds,
            hit_rate: s.hit_rate,
            bandwidth_utilization: s.bandwidth_utilization,
            result_nnz: s.result_nnz,
        }
    }
}

fn to_json<S: Serialize>(v: &S) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("plain data serializes");
    out.push(b'\n');
    out
}

fn to_csv<S: Serialize>(rows: &[S]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run(args: RunArgs) -> CliResult {
    let setup = Setup::from_args(&args.input, 1)?;
    dispatch!(setup.integer, run_typed(&args, &setup))
}

fn run_typed<T: Scalar>(args: &RunArgs, setup: &Setup) -> CliResult {
    let (a, b) = setup.operands::<T>(0)?;
    let report = simulate_report(&a, &b, &setup.hw, &setup.flags)?;
    if let Some(path) = &args.dump_plan {
        emit(Some(path), &to_json(&report.plan))?;
    }
    if let Some(path) = &args.result {
        write_matrix_market(&report.result, path)?;
    }
    let bytes = match args.format {
        Format::Json => to_json(&report.stats),
        Format::Csv => to_csv(&[StatsRow::from(&report.stats)])?,
    };
    emit(args.out.as_deref(), &bytes)
}

pub fn verify(args: VerifyArgs) -> CliResult {
    let setup = Setup::from_args(&args.input, args.matrices)?;
    let combos = if args.all_flags { AblationFlags::all_combinations(setup.flags.seed) } else { vec![setup.flags] };
    let failures = dispatch!(setup.integer, verify_typed(&setup, &combos, args.inject_fault))?;
    let products = setup.sources.len() * combos.len();
    if failures.is_empty() {
        println!("ok: {products} products match the reference");
        return Ok(());
    }
    for f in &failures {
        println!("{f}");
    }
    Err(CliError::Mismatch(format!("{} of {products} products differ", failures.len())))
}

fn verify_typed<T: Scalar>(setup: &Setup, combos: &[AblationFlags], fault: bool) -> CliResult<Vec<String>> {
    let per_matrix: Vec<CliResult<Vec<String>>> = thread_pool()?.install(|| {
        (0..setup.sources.len())
            .into_par_iter()
            .map(|i| {
                let (a, b) = setup.operands::<T>(i)?;
                let want = sparchsim::oracle_spgemm(&a, &b)?;
                let mut out = Vec::new();
                for flags in combos {
                    let (mut got, _) = simulate(&a, &b, &setup.hw, flags)?;
                    if fault {
                        got = corrupt(&got)?;
                    }
                    if let Some(msg) = describe_mismatch(&got, &want) {
                        out.push(format!("mismatch: {} [{flags}]: {msg}", setup.sources[i].label()));
                    }
                }
                Ok(out)
            })
            .collect()
    });
    let mut all = Vec::new();
    for r in per_matrix {
        all.extend(r?);
    }
    Ok(all)
}

fn describe_mismatch<T: Scalar>(got: &CsrMatrix<T>, want: &CsrMatrix<T>) -> Option<String> {
    let (r, c) = got.first_mismatch(want, REAL_TOLERANCE)?;
    if r == usize::MAX {
        return Some(format!(
            "shape {}x{} differs from expected {}x{}",
            got.num_rows(),
            got.num_cols(),
            want.num_rows(),
            want.num_cols()
        ));
    }
    let show = |v: Option<T>| v.map_or_else(|| "absent".to_string(), |v| v.to_string());
    Some(format!(
        "first difference at ({r}, {c}): simulated {}, expected {}",
        show(got.get(r, c)),
        show(want.get(r, c))
    ))
}

/// Perturbs one entry so the comparison must fail.
fn corrupt<T: Scalar>(m: &CsrMatrix<T>) -> CliResult<CsrMatrix<T>> {
    let mut trip: Vec<(u32, u32, T)> = m.iter().collect();
    match trip.first_mut() {
        Some(t) => t.2 += T::one(),
        None if m.num_rows() > 0 && m.num_cols() > 0 => trip.push((0, 0, T::one())),
        None => return Ok(m.clone()),
    }
    Ok(CsrMatrix::from_triplets(m.num_rows(), m.num_cols(), trip)?)
}

#[derive(Serialize)]
struct SweepRow {
    matrix: String,
    parameter: String,
    value: usize,
    cycles: u64,
    gflops: f64,
    dram_bytes: u64,
    partial_bytes: u64,
    right_bytes: u64,
    hit_rate: Option<f64>,
    bandwidth_utilization: f64,
}

pub fn sweep(args: SweepArgs) -> CliResult {
    let setup = Setup::from_args(&args.input, args.matrices)?;
    let (axis, lo, hi) = *AXES
        .iter()
        .find(|(name, _, _)| *name == args.axis)
        .ok_or_else(|| CliError::Usage(format!("unknown sweep axis '{}'", args.axis)))?;
    let mut points = Vec::new();
    for v in args.values.iter().map(|v| v.trim()).filter(|v| !v.is_empty()) {
        match v.parse::<usize>() {
            Ok(p) if (lo..=hi).contains(&p) => points.push(p),
            _ => return Err(CliError::Usage(format!("{axis} value '{v}' outside {lo}..={hi}"))),
        }
    }
    if points.is_empty() {
        return Err(CliError::Usage("empty sweep axis".into()));
    }
    let rows = dispatch!(setup.integer, sweep_typed(&setup, axis, &points))?;
    let bytes = match args.format {
        Format::Csv => to_csv(&rows)?,
        Format::Json => to_json(&rows),
    };
    emit(args.out.as_deref(), &bytes)
}

fn sweep_typed<T: Scalar>(setup: &Setup, axis: &str, points: &[usize]) -> CliResult<Vec<SweepRow>> {
    let mut configs = Vec::with_capacity(points.len());
    for &p in points {
        let mut hw = setup.hw.clone();
        hw.set(axis, &p.to_string())?;
        hw.validate()?;
        configs.push(hw);
    }
    // rows come back in (matrix, value) order whatever the scheduling
    let rows: Vec<CliResult<Vec<SweepRow>>> = thread_pool()?.install(|| {
        (0..setup.sources.len())
            .into_par_iter()
            .map(|i| {
                let (a, b) = setup.operands::<T>(i)?;
                let label = setup.sources[i].label();
                configs
                    .par_iter()
                    .zip(points)
                    .map(|(hw, &value)| {
                        let (_, s) = simulate(&a, &b, hw, &setup.flags)?;
                        Ok(SweepRow {
                            matrix: label.clone(),
                            parameter: axis.to_string(),
                            value,
                            cycles: s.cycles,
                            gflops: s.gflops,
                            dram_bytes: s.total_dram_bytes(),
                            partial_bytes: s.partial_bytes(),
                            right_bytes: s.dram_read_bytes.right,
                            hit_rate: s.hit_rate,
                            bandwidth_utilization: s.bandwidth_utilization,
                        })
                    })
                    .collect()
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

pub fn gen(args: GenArgs) -> CliResult {
    let params = rmat_params(&args.rmat, args.seed)?;
    let m: CsrMatrix<i64> = rmat_generate(&params)?;
    write_matrix_market(&m, &args.out)?;
    println!("wrote {} ({}x{}, {} nonzeros)", args.out.display(), m.num_rows(), m.num_cols(), m.nnz());
    Ok(())
}

#[derive(Serialize)]
struct ModelReport {
    n: u64,
    w: u64,
    condensed_columns: u64,
    rounds: f64,
    rereads_exact: f64,
    rereads_harmonic: f64,
    rereads_log: f64,
    reread_factor: f64,
    traffic_unoptimized: f64,
    traffic_condensed_partial: f64,
    traffic_condensed_total: f64,
    traffic_scheduled_total: f64,
    traffic_prefetched_total: f64,
    /// when given, the traffic fields are element counts instead of multiples of M
    m: Option<f64>,
}

pub fn model(args: ModelArgs) -> CliResult {
    let est = expected_rereads(AnalysisParams::new(args.n, args.w)?);
    let steps = traffic_steps(args.n, args.condensed, args.w, args.final_ratio, args.hit_rate)?;
    let scale = args.m.unwrap_or(1.0);
    let report = ModelReport {
        n: args.n,
        w: args.w,
        condensed_columns: args.condensed,
        rounds: est.rounds,
        rereads_exact: est.exact,
        rereads_harmonic: est.harmonic,
        rereads_log: est.log_form,
        reread_factor: est.reread_factor,
        traffic_unoptimized: steps.unoptimized * scale,
        traffic_condensed_partial: steps.condensed_partial * scale,
        traffic_condensed_total: steps.condensed_total * scale,
        traffic_scheduled_total: steps.scheduled_total * scale,
        traffic_prefetched_total: steps.prefetched_total * scale,
        m: args.m,
    };
    let bytes = match args.format {
        Format::Json => to_json(&report),
        Format::Csv => to_csv(&[report])?,
    };
    emit(None, &bytes)
}
