use std::fs;
use std::path::Path;

use polar_wiretap::bec::{evolve, BecParam};
use polar_wiretap::codec::union_bound_pe;
use polar_wiretap::leakage::{exact_leakage_enumeration, leakage_bounds, mc_leakage};
use polar_wiretap::scaling::{above_capacity_sweep, sweep, ScalingPoint, MAX_SWEEP_M};
use polar_wiretap::scheme::{
    build_partition, build_partition_above_capacity, ranked_partition, simulate_bob, PartitionJson,
    SecrecyPartition, WiretapConfig,
};
use serde::Serialize;

use crate::args::{Command, Format, Opts};
use crate::output::{format_sig, Cell, Table};
use crate::CliError;

const LEAKAGE_COLUMNS: &[&str] = &[
    "wiretap_eps",
    "k",
    "r",
    "n",
    "lb_norm",
    "ub_norm",
    "mc_mean_norm",
    "mc_stderr_norm",
];

const SIMULATE_COLUMNS: &[&str] = &[
    "n",
    "k",
    "r",
    "main_eps",
    "trials",
    "failures",
    "failure_rate",
    "failure_stderr",
    "pe_bound",
];

const SCALING_COLUMNS: &[&str] = &[
    "n",
    "k",
    "r",
    "secrecy_rate",
    "capacity_gap",
    "lb_norm",
    "ub_norm",
    "pe_bound",
];

/// What a command produced, for the one-line summary.
pub struct Report {
    pub rows: usize,
}

pub fn run(cmd: &Command) -> Result<Report, CliError> {
    let opts = cmd.opts();
    let config = canonical_config(cmd);
    match cmd {
        Command::Construct(_) => construct(opts, &config),
        Command::Bounds(_) => leakage_table(opts, &config, Estimator::None),
        Command::McLeakage(_) => leakage_table(opts, &config, Estimator::MonteCarlo),
        Command::ExactLeakage(_) => leakage_table(opts, &config, Estimator::Exact),
        Command::Simulate(_) => simulate(opts, &config),
        Command::Scaling(_) => scaling(opts, &config, false),
        Command::AboveCapacity(_) => scaling(opts, &config, true),
    }
}

/// Every option that affects the numbers, in a fixed order. Thread count and
/// output location are left out so that they never change the file contents.
fn canonical_config(cmd: &Command) -> String {
    let o = cmd.opts();
    let mut parts = vec![cmd.name().to_string()];
    let mut push = |flag: &str, value: Option<String>| {
        if let Some(v) = value {
            parts.push(format!("--{flag} {v}"));
        }
    };
    push("m", o.m.map(|m| m.to_string()));
    if !o.m_list.is_empty() {
        let list: Vec<String> = o.m_list.iter().map(u32::to_string).collect();
        push("m-list", Some(list.join(",")));
    }
    push("main-eps", o.main_eps.map(format_sig));
    push("wiretap-eps", o.wiretap_eps.map(format_sig));
    push("wiretap-eps-grid", o.wiretap_eps_grid.clone());
    push("pe", Some(format_sig(o.pe)));
    push("trials", Some(o.trials.to_string()));
    push("seed", Some(o.seed.to_string()));
    push("delta", o.delta.map(format_sig));
    push("k", o.k.map(|k| k.to_string()));
    push("r", o.r.map(|r| r.to_string()));
    push("partition", o.partition.as_ref().map(|p| p.display().to_string()));
    parts.join(" ")
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn channel(flag: &str, value: Option<f64>) -> Result<BecParam, CliError> {
    let e = value.ok_or_else(|| usage(format!("--{flag} is required")))?;
    Ok(BecParam::new(e)?)
}

fn check_m(m: u32) -> Result<u32, CliError> {
    if m > MAX_SWEEP_M {
        return Err(usage(format!("--m {m} exceeds the limit {MAX_SWEEP_M}")));
    }
    Ok(m)
}

/// Parses `start:stop:step` into an inclusive grid rounded to 1e-12.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || usage(format!("invalid grid '{spec}', expected start:stop:step"));
    let fields: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = fields[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && start <= stop) {
        return Err(usage(format!(
            "grid '{spec}' needs finite start <= stop and step > 0"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(usage(format!("grid '{spec}' has too many points")));
    }
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn wiretap_grid(opts: &Opts) -> Result<Vec<f64>, CliError> {
    match (&opts.wiretap_eps_grid, opts.wiretap_eps) {
        (Some(spec), _) => parse_grid(spec),
        (None, Some(e)) => Ok(vec![e]),
        (None, None) => Err(usage("--wiretap-eps or --wiretap-eps-grid is required")),
    }
}

fn load_partition(path: &Path) -> Result<SecrecyPartition, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let json: PartitionJson = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: not a partition file: {e}", path.display())))?;
    Ok(SecrecyPartition::from_json(&json)?)
}

/// Partition for a given wiretap erasure probability: a partition file,
/// a fixed-size ranked design, or the good-set construction.
struct PartitionSource {
    fixed: Option<SecrecyPartition>,
    m: Option<u32>,
}

impl PartitionSource {
    fn new(opts: &Opts) -> Result<Self, CliError> {
        let m = opts.m.map(check_m).transpose()?;
        if let Some(path) = &opts.partition {
            let p = load_partition(path)?;
            if let Some(m) = m {
                if p.n() != 1usize << m {
                    return Err(usage(format!(
                        "--m {m} does not match the partition file (n = {})",
                        p.n()
                    )));
                }
            }
            return Ok(Self { fixed: Some(p), m: None });
        }
        let m = m.ok_or_else(|| usage("--m is required without --partition"))?;
        if let (Some(k), Some(r)) = (opts.k, opts.r) {
            let main = channel("main-eps", opts.main_eps)?;
            let design = match opts.wiretap_eps {
                Some(e) => BecParam::new(e)?,
                None => main,
            };
            let p = ranked_partition(&evolve(main, m), &evolve(design, m), k, r)?;
            return Ok(Self { fixed: Some(p), m: None });
        }
        Ok(Self { fixed: None, m: Some(m) })
    }

    fn get(&self, opts: &Opts, wiretap_eps: f64) -> Result<SecrecyPartition, CliError> {
        if let Some(p) = &self.fixed {
            return Ok(p.clone());
        }
        let m = self.m.expect("m is set when no fixed partition");
        let cfg = WiretapConfig::new(
            channel("main-eps", opts.main_eps)?,
            BecParam::new(wiretap_eps)?,
            m,
            opts.pe,
        )?;
        Ok(match opts.delta {
            Some(delta) => build_partition_above_capacity(&cfg, delta)?,
            None => build_partition(&cfg),
        })
    }
}

fn output_format(opts: &Opts) -> Format {
    opts.format.unwrap_or_else(|| {
        match opts.out.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    })
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn write_table(opts: &Opts, config: &str, table: &Table) -> Result<Report, CliError> {
    let text = match output_format(opts) {
        Format::Csv => table.to_csv(config),
        Format::Json => table.to_json(config),
    };
    write_out(&opts.out, &text)?;
    Ok(Report { rows: table.rows.len() })
}

#[derive(Serialize)]
struct ConstructJson<'a> {
    config: &'a str,
    #[serde(flatten)]
    partition: PartitionJson,
}

fn construct(opts: &Opts, config: &str) -> Result<Report, CliError> {
    if opts.format == Some(Format::Csv) {
        return Err(usage("construct writes JSON only"));
    }
    if opts.wiretap_eps_grid.is_some() {
        return Err(usage("construct takes a single --wiretap-eps"));
    }
    let source = PartitionSource::new(opts)?;
    let p = match (&source.fixed, opts.wiretap_eps) {
        (Some(p), _) => p.clone(),
        (None, Some(e)) => source.get(opts, e)?,
        (None, None) => return Err(usage("--wiretap-eps is required")),
    };
    let doc = ConstructJson {
        config,
        partition: p.to_json(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    write_out(&opts.out, &text)?;
    Ok(Report { rows: 1 })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Estimator {
    None,
    MonteCarlo,
    Exact,
}

fn per_bit(value: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        value / k as f64
    }
}

fn leakage_table(opts: &Opts, config: &str, estimator: Estimator) -> Result<Report, CliError> {
    let grid = wiretap_grid(opts)?;
    let source = PartitionSource::new(opts)?;
    let mut table = Table::new(LEAKAGE_COLUMNS);
    for eps in grid {
        let p = source.get(opts, eps)?;
        let wiretap = BecParam::new(eps)?;
        let m = p.n().trailing_zeros();
        let (lb, ub) = leakage_bounds(&p, &evolve(wiretap, m))?.normalized();
        let (mean, stderr) = match estimator {
            Estimator::None => (Cell::Empty, Cell::Empty),
            Estimator::MonteCarlo => {
                let est = mc_leakage(&p, wiretap, opts.trials, opts.seed)?;
                (
                    Cell::Num(per_bit(est.mean, p.k())),
                    Cell::Num(per_bit(est.stderr, p.k())),
                )
            }
            Estimator::Exact => {
                let exact = exact_leakage_enumeration(&p, wiretap)?;
                (Cell::Num(per_bit(exact, p.k())), Cell::Num(0.0))
            }
        };
        table.push(vec![
            Cell::Num(eps),
            Cell::Int(p.k() as u64),
            Cell::Int(p.r() as u64),
            Cell::Int(p.n() as u64),
            Cell::Num(lb),
            Cell::Num(ub),
            mean,
            stderr,
        ]);
    }
    write_table(opts, config, &table)
}

fn simulate(opts: &Opts, config: &str) -> Result<Report, CliError> {
    let main = channel("main-eps", opts.main_eps)?;
    let source = PartitionSource::new(opts)?;
    let p = match (&source.fixed, opts.wiretap_eps) {
        (Some(p), _) => p.clone(),
        (None, Some(e)) => source.get(opts, e)?,
        (None, None) => {
            return Err(usage(
                "--wiretap-eps is required unless --partition or --k/--r is given",
            ))
        }
    };
    let est = simulate_bob(&p, main, opts.trials, opts.seed)?;
    let bound = union_bound_pe(&evolve(main, p.n().trailing_zeros()), &p.active())?;
    let mut table = Table::new(SIMULATE_COLUMNS);
    table.push(vec![
        Cell::Int(p.n() as u64),
        Cell::Int(p.k() as u64),
        Cell::Int(p.r() as u64),
        Cell::Num(main.erasure()),
        Cell::Int(est.trials),
        Cell::Int(est.failures),
        Cell::Num(est.rate),
        Cell::Num(est.stderr),
        Cell::Num(bound),
    ]);
    write_table(opts, config, &table)
}

fn scaling(opts: &Opts, config: &str, above: bool) -> Result<Report, CliError> {
    if opts.m_list.is_empty() {
        return Err(usage("--m-list is required"));
    }
    if opts.wiretap_eps_grid.is_some() || opts.partition.is_some() || opts.k.is_some() {
        return Err(usage(
            "sweeps take --main-eps and --wiretap-eps only, not a grid, partition or --k/--r",
        ));
    }
    for &m in &opts.m_list {
        check_m(m)?;
    }
    let template = WiretapConfig::new(
        channel("main-eps", opts.main_eps)?,
        channel("wiretap-eps", opts.wiretap_eps)?,
        0,
        opts.pe,
    )?;
    let points = if above {
        let delta = opts
            .delta
            .ok_or_else(|| usage("--delta is required for above-capacity"))?;
        above_capacity_sweep(&template, delta, &opts.m_list)?
    } else {
        if opts.delta.is_some() {
            return Err(usage("--delta belongs to above-capacity"));
        }
        sweep(&template, &opts.m_list)?
    };
    let mut table = Table::new(SCALING_COLUMNS);
    for p in &points {
        table.push(scaling_row(p));
    }
    write_table(opts, config, &table)
}

fn scaling_row(p: &ScalingPoint) -> Vec<Cell> {
    vec![
        Cell::Int(p.n as u64),
        Cell::Int(p.k as u64),
        Cell::Int(p.r as u64),
        Cell::Num(p.secrecy_rate),
        Cell::Num(p.capacity_gap),
        Cell::Num(p.leakage_lower_norm),
        Cell::Num(p.leakage_upper_norm),
        Cell::Num(p.pe_bound),
    ]
}
