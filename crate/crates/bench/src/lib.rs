//! Benchmark harness behind the `mlcs` binary.
//!
//! Every subcommand writes its result to a caller-supplied writer so the
//! commands can be driven from tests as well as from `main`.

pub mod args;
pub mod manifest;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use mlcs_core::dataset::{self, gen_correlated, gen_uncorrelated, DatasetDescriptor, DatasetError, Family};
use mlcs_core::oracle::{exact_lcs2, exact_lcs3, exhaustive_lcs, OracleBudget, OracleError};
use mlcs_core::prob::{
    build_table, cross_validate, p_beta_form, p_closed, p_closed_form2, q_value, AlphabetParams, KernelError,
    NumericMode,
};
use mlcs_core::{
    beam_search, hyper_heuristic, verify_solution, BeamConfig, HeuristicConstants, HeuristicKind, HeuristicSpec,
    Instance, RunReport, SearchError,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use args::{
    Command, CrossvalArgs, FamilyArg, FileFormat, GenFamily, HeuristicArg, InputArgs, KsweepArgs, OracleArgs,
    ProbeArgs, ProbeMethod, SearchArgs, SolveArgs, SweepArgs, TimingArgs,
};
use manifest::{Entry, ManifestError};

/// Exit status for a run that completed but recorded failures.
pub const EXIT_FAILURES: i32 = 1;
/// Exit status for flag, parse and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for unreadable or invalid datasets.
pub const EXIT_DATASET: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("solution {0:?} failed verification")]
    Unverified(String),
    #[error("{path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest(ManifestError::Io { .. }) | CliError::Dataset(_) => EXIT_DATASET,
            CliError::Unverified(_) => EXIT_FAILURES,
            _ => EXIT_USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Runs one subcommand and returns its exit status.
pub fn run(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Solve(a) => cmd_solve(&a, stdout),
        Command::Sweep(a) => cmd_sweep(&a, stdout),
        Command::Probe(a) => cmd_probe(&a, stdout),
        Command::Ksweep(a) => cmd_ksweep(&a, stdout),
        Command::Timing(a) => cmd_timing(&a, stdout),
        Command::Oracle(a) => cmd_oracle(&a, stdout),
        Command::Crossval(a) => cmd_crossval(&a, stdout),
    }
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::Uncorrelated => "uncorr",
        Family::Correlated => "corr",
        Family::Unknown => "unknown",
    }
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Uncorr => Family::Uncorrelated,
            FamilyArg::Corr => Family::Correlated,
        }
    }
}

pub fn heuristic_name(h: HeuristicArg) -> &'static str {
    match h {
        HeuristicArg::Minlen => "minlen",
        HeuristicArg::Kguess => "kguess",
        HeuristicArg::Kanalytic => "kanalytic",
        HeuristicArg::KanalyticUncorr => "kanalytic-uncorr",
        HeuristicArg::KanalyticCorr => "kanalytic-corr",
        HeuristicArg::Gcov => "gcov",
        HeuristicArg::Hh => "hh",
    }
}

/// A heuristic name resolved against a dataset family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    Single(HeuristicSpec),
    Hyper { first: HeuristicSpec, second: HeuristicSpec },
}

pub fn resolve(h: HeuristicArg, family: Family, constants: HeuristicConstants) -> Solver {
    let spec = |kind| HeuristicSpec { kind, constants };
    match h {
        HeuristicArg::Minlen => Solver::Single(spec(HeuristicKind::MinLen)),
        HeuristicArg::Kguess => Solver::Single(spec(HeuristicKind::ProbKGuess)),
        HeuristicArg::Kanalytic => Solver::Single(spec(family.default_k_heuristic())),
        HeuristicArg::KanalyticUncorr => Solver::Single(spec(HeuristicKind::ProbKAnalyticUncorr)),
        HeuristicArg::KanalyticCorr => Solver::Single(spec(HeuristicKind::ProbKAnalyticCorr)),
        HeuristicArg::Gcov => Solver::Single(spec(HeuristicKind::GCoV)),
        HeuristicArg::Hh => Solver::Hyper { first: spec(family.default_k_heuristic()), second: spec(HeuristicKind::GCoV) },
    }
}

fn constants(search: &SearchArgs) -> Result<HeuristicConstants> {
    match &search.constants {
        None => Ok(HeuristicConstants::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
    }
}

fn beam_config(search: &SearchArgs, heuristic: HeuristicSpec) -> Result<BeamConfig> {
    let cfg = BeamConfig {
        beta: search.beta,
        beta_h: search.beta_h.unwrap_or(search.beta.min(60)),
        heuristic,
        dominance_filter: search.dominance_filter,
        ..BeamConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Runs `solver` and rejects any report whose solution does not verify.
pub fn solve(instance: &Instance, solver: Solver, search: &SearchArgs) -> Result<RunReport> {
    let report = match solver {
        Solver::Single(spec) => beam_search(instance, &beam_config(search, spec)?)?,
        Solver::Hyper { first, second } => hyper_heuristic(instance, &beam_config(search, first)?, first, second)?,
    };
    if !report.verified || !verify_solution(instance, report.solution.as_bytes()) {
        return Err(CliError::Unverified(report.solution));
    }
    Ok(report)
}

fn load_input(input: &InputArgs) -> Result<(Instance, DatasetDescriptor)> {
    if let Some(path) = &input.input {
        return Ok(match input.format {
            FileFormat::Plain => dataset::load_plain(path)?,
            FileFormat::Fasta => dataset::load_fasta(path, input.alphabet.as_bytes(), input.truncate)?,
        });
    }
    let family = input.gen.ok_or_else(|| CliError::Usage("one of --input or --gen is required".into()))?;
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("--gen requires {flag}")));
    let (sigma, n, len) = (need(input.sigma, "--sigma")?, need(input.n, "--n")?, need(input.len, "--len")?);
    let seed = input.seed.ok_or_else(|| CliError::Usage("--gen requires an explicit --seed".into()))?;
    Ok(match family {
        GenFamily::Uncorr => gen_uncorrelated(sigma, n, len, seed)?,
        GenFamily::Corr => gen_correlated(sigma, n, len, input.rate, seed)?,
    })
}

/// Machine-readable outcome of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub dataset: String,
    pub family: String,
    pub sigma: usize,
    pub n: usize,
    pub len: usize,
    pub seed: Option<u64>,
    /// Heuristic as requested on the command line.
    pub heuristic: String,
    /// Heuristic that produced the solution.
    pub resolved: String,
    /// `kanalytic` or `gcov` for hyper-heuristic runs.
    pub chosen_heuristic: Option<String>,
    pub probe_lengths: Option<(usize, usize)>,
    pub solution: String,
    pub length: usize,
    pub verified: bool,
    pub levels: usize,
    pub nodes_expanded: usize,
    pub wall_ms: f64,
    pub beta: usize,
    pub beta_h: usize,
    pub dominance_filter: bool,
    pub constants: HeuristicConstants,
}

impl SolveOutput {
    pub fn new(desc: &DatasetDescriptor, requested: HeuristicArg, report: &RunReport) -> Self {
        Self {
            dataset: desc.name.clone(),
            family: family_name(desc.family).into(),
            sigma: desc.sigma_size,
            n: desc.n,
            len: desc.max_len(),
            seed: desc.source.seed(),
            heuristic: heuristic_name(requested).into(),
            resolved: report.config.heuristic.kind.to_string(),
            chosen_heuristic: report.chosen_heuristic.map(|k| {
                if k == HeuristicKind::GCoV { "gcov" } else { "kanalytic" }.to_owned()
            }),
            probe_lengths: report.probe_lengths,
            solution: report.solution.clone(),
            length: report.length,
            verified: report.verified,
            levels: report.levels,
            nodes_expanded: report.nodes_expanded,
            wall_ms: report.wall_ms,
            beta: report.config.beta,
            beta_h: report.config.beta_h,
            dominance_filter: report.config.dominance_filter,
            constants: report.config.heuristic.constants,
        }
    }

    fn write_human(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "dataset      {} ({}, |Σ|={}, N={}, l={})", self.dataset, self.family, self.sigma, self.n, self.len)?;
        write!(out, "heuristic    {}", self.heuristic)?;
        if self.resolved != self.heuristic {
            write!(out, " -> {}", self.resolved)?;
        }
        writeln!(out)?;
        if let (Some(chosen), Some((a, b))) = (&self.chosen_heuristic, self.probe_lengths) {
            writeln!(out, "probes       {a} / {b}, chose {chosen}")?;
        }
        writeln!(out, "beam         β={} β_h={}", self.beta, self.beta_h)?;
        writeln!(out, "length       {}", self.length)?;
        writeln!(out, "verified     {}", self.verified)?;
        writeln!(out, "levels       {}", self.levels)?;
        writeln!(out, "expanded     {}", self.nodes_expanded)?;
        writeln!(out, "time         {:.3} ms", self.wall_ms)?;
        writeln!(out, "solution     {}", self.solution)
    }
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write) -> Result<i32> {
    let constants = constants(&a.search)?;
    beam_config(&a.search, HeuristicSpec::new(HeuristicKind::MinLen))?;
    let (instance, mut desc) = load_input(&a.input)?;
    if let Some(f) = a.family {
        desc.family = f.into();
    }
    let report = solve(&instance, resolve(a.heuristic, desc.family, constants), &a.search)?;
    let output = SolveOutput::new(&desc, a.heuristic, &report);
    if a.json {
        serde_json::to_writer_pretty(&mut *stdout, &output)?;
        writeln!(stdout)?;
    } else {
        output.write_human(stdout)?;
    }
    Ok(0)
}

/// Opens `path` for writing, or falls back to `stdout`.
fn sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| CliError::Output { path: p.to_owned(), source })?,
        )),
        None => Box::new(stdout),
    })
}

fn with_threads<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Header of the sweep CSV.
pub const SWEEP_HEADER: [&str; 8] = ["dataset", "sigma", "n", "len", "heuristic", "length", "ms", "seed"];

#[derive(Debug, Clone)]
struct SweepRow {
    dataset: String,
    shape: Option<(usize, usize, usize)>,
    heuristic: HeuristicArg,
    outcome: std::result::Result<(usize, f64), String>,
    seed: Option<u64>,
}

fn load_entries(entries: &[Entry]) -> Vec<std::result::Result<(Instance, DatasetDescriptor), String>> {
    entries.par_iter().map(|e| e.load().map_err(|err| err.to_string())).collect()
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<i32> {
    let constants = constants(&a.search)?;
    beam_config(&a.search, HeuristicSpec::new(HeuristicKind::MinLen))?;
    let entries = manifest::load(&a.manifest)?;

    let rows: Vec<SweepRow> = with_threads(a.jobs, || {
        let loaded = load_entries(&entries);
        let cells: Vec<(usize, HeuristicArg)> =
            (0..entries.len()).flat_map(|d| a.heuristics.iter().map(move |&h| (d, h))).collect();
        cells
            .par_iter()
            .map(|&(d, h)| {
                let entry = &entries[d];
                match &loaded[d] {
                    Err(message) => SweepRow {
                        dataset: entry.label(),
                        shape: None,
                        heuristic: h,
                        outcome: Err(message.clone()),
                        seed: entry.seed(),
                    },
                    Ok((instance, desc)) => {
                        let outcome = solve(instance, resolve(h, desc.family, constants), &a.search)
                            .map(|r| (r.length, r.wall_ms))
                            .map_err(|e| e.to_string());
                        SweepRow {
                            dataset: desc.name.clone(),
                            shape: Some((desc.sigma_size, desc.n, desc.max_len())),
                            heuristic: h,
                            outcome,
                            seed: desc.source.seed(),
                        }
                    }
                }
            })
            .collect()
    })?;

    let failed = rows.iter().any(|r| r.outcome.is_err());
    let mut out = csv::Writer::from_writer(sink(a.out.as_deref(), stdout)?);
    let mut header = SWEEP_HEADER.to_vec();
    if failed {
        header.push("status");
    }
    out.write_record(&header)?;
    for row in &rows {
        let (sigma, n, len) = match row.shape {
            Some((s, n, l)) => (s.to_string(), n.to_string(), l.to_string()),
            None => Default::default(),
        };
        let (length, ms) = match &row.outcome {
            Ok((length, ms)) => (length.to_string(), ms.to_string()),
            Err(_) => Default::default(),
        };
        let mut record = vec![
            row.dataset.clone(),
            sigma,
            n,
            len,
            heuristic_name(row.heuristic).to_owned(),
            length,
            ms,
            row.seed.map(|s| s.to_string()).unwrap_or_default(),
        ];
        if failed {
            record.push(match &row.outcome {
                Ok(_) => "ok".to_owned(),
                Err(e) => format!("error: {e}"),
            });
        }
        out.write_record(&record)?;
    }
    for &h in &a.heuristics {
        let done: Vec<(usize, f64)> =
            rows.iter().filter(|r| r.heuristic == h).filter_map(|r| r.outcome.clone().ok()).collect();
        if done.is_empty() {
            continue;
        }
        let count = done.len() as f64;
        let mean_length = done.iter().map(|&(l, _)| l as f64).sum::<f64>() / count;
        let mean_ms = done.iter().map(|&(_, ms)| ms).sum::<f64>() / count;
        let mut record = vec![
            "average".to_owned(),
            String::new(),
            String::new(),
            String::new(),
            heuristic_name(h).to_owned(),
            mean_length.to_string(),
            mean_ms.to_string(),
            String::new(),
        ];
        if failed {
            record.push("ok".to_owned());
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(if failed { EXIT_FAILURES } else { 0 })
}

fn cmd_probe(a: &ProbeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let params = AlphabetParams::new(a.sigma)?;
    let (k_lo, k_hi) = a.k_range;
    let n = a.n;
    let mode = if a.log { NumericMode::LogSpace } else { NumericMode::default_for(a.sigma, n) };

    let values: Vec<(usize, f64)> = if a.q {
        if a.method != ProbeMethod::Closed {
            return Err(CliError::Usage("--q is evaluated by the closed form only; drop --method".into()));
        }
        let q_mode = if a.log { NumericMode::LogSpace } else { NumericMode::Linear };
        (k_lo..=k_hi).map(|k| Ok((k, q_value(k, n, params, q_mode)?))).collect::<Result<_>>()?
    } else {
        let table = if a.method == ProbeMethod::Table { Some(build_table(a.sigma, n)?) } else { None };
        let p = |k: usize| -> Result<f64> {
            Ok(match a.method {
                ProbeMethod::Table => table.as_ref().map_or(0.0, |t| if k > n { 0.0 } else { t.p(k, n) }),
                ProbeMethod::Closed => p_closed(k, n, params, mode)?,
                ProbeMethod::Closed2 => p_closed_form2(k, n, params, mode)?,
                ProbeMethod::Beta => p_beta_form(k, n, params, mode)?,
            })
        };
        (k_lo..=k_hi)
            .map(|k| {
                let v = if a.log && a.method == ProbeMethod::Table {
                    table.as_ref().map_or(f64::NEG_INFINITY, |t| if k > n { f64::NEG_INFINITY } else { t.ln_p(k, n) })
                } else if a.log {
                    p(k)?.ln()
                } else {
                    p(k)?
                };
                Ok((k, v))
            })
            .collect::<Result<_>>()?
    };

    let mut out = csv::Writer::from_writer(sink(a.out.as_deref(), stdout)?);
    out.write_record(["k", "value"])?;
    for (k, v) in values {
        out.write_record([k.to_string(), format!("{v:?}")])?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_ksweep(a: &KsweepArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (instance, _) = load_input(&a.input)?;
    let search = SearchArgs { beta: a.beta, beta_h: None, dominance_filter: false, constants: None };
    let (k_lo, k_hi) = a.k_range;
    if k_lo == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    let rows: Vec<(usize, usize)> = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let spec = HeuristicSpec::new(HeuristicKind::ProbFixedK(k));
            solve(&instance, Solver::Single(spec), &search).map(|r| (k, r.length))
        })
        .collect::<Result<_>>()?;
    let mut out = csv::Writer::from_writer(sink(a.out.as_deref(), stdout)?);
    out.write_record(["k", "length"])?;
    for (k, length) in rows {
        out.write_record([k.to_string(), length.to_string()])?;
    }
    out.flush()?;
    Ok(0)
}

/// Median of a non-empty sample.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Header of the timing CSV.
pub const TIMING_HEADER: [&str; 5] = ["dataset", "sigma", "n", "heuristic", "ms"];

/// Cells run one after another so the timings do not compete for cores.
fn cmd_timing(a: &TimingArgs, stdout: &mut dyn Write) -> Result<i32> {
    if a.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let constants = constants(&a.search)?;
    beam_config(&a.search, HeuristicSpec::new(HeuristicKind::MinLen))?;
    let entries = manifest::load(&a.manifest)?;
    let mut out = csv::Writer::from_writer(sink(a.out.as_deref(), stdout)?);
    out.write_record(TIMING_HEADER)?;
    for entry in &entries {
        let (instance, desc) = entry.load()?;
        for &h in &a.heuristics {
            let solver = resolve(h, desc.family, constants);
            let mut samples = (0..a.repeats)
                .map(|_| solve(&instance, solver, &a.search).map(|r| r.wall_ms))
                .collect::<Result<Vec<f64>>>()?;
            out.write_record([
                desc.name.clone(),
                desc.sigma_size.to_string(),
                desc.n.to_string(),
                heuristic_name(h).to_owned(),
                median(&mut samples).to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(0)
}

fn cmd_oracle(a: &OracleArgs, stdout: &mut dyn Write) -> Result<i32> {
    let (instance, _) = load_input(&a.input)?;
    let strings = instance.raw_strings();
    let budget = OracleBudget::default();
    let (method, length, witness) = match strings.len() {
        2 => {
            let (length, witness) = exact_lcs2(&strings[0], &strings[1], budget)?;
            ("dp2", length, Some(witness))
        }
        3 => ("dp3", exact_lcs3(&strings[0], &strings[1], &strings[2], budget)?, None),
        _ => ("exhaustive", exhaustive_lcs(&strings, budget)?, None),
    };
    writeln!(stdout, "method  {method}")?;
    writeln!(stdout, "length  {length}")?;
    if let Some(w) = witness {
        if !verify_solution(&instance, &w) {
            return Err(CliError::Unverified(String::from_utf8_lossy(&w).into_owned()));
        }
        writeln!(stdout, "witness {}", String::from_utf8_lossy(&w))?;
    }
    Ok(0)
}

fn cmd_crossval(a: &CrossvalArgs, stdout: &mut dyn Write) -> Result<i32> {
    let report = cross_validate(a.sigma, a.n_max, a.tol)?;
    let mut out = csv::Writer::from_writer(&mut *stdout);
    out.write_record(["first", "second", "max_abs", "k", "n"])?;
    for pair in &report.pairs {
        out.write_record([
            pair.first.to_owned(),
            pair.second.to_owned(),
            format!("{:?}", pair.max_abs),
            pair.at.0.to_string(),
            pair.at.1.to_string(),
        ])?;
    }
    out.flush()?;
    drop(out);
    writeln!(stdout, "{} at tolerance {:e}", if report.passed { "PASS" } else { "FAIL" }, a.tol)?;
    Ok(if report.passed { 0 } else { EXIT_FAILURES })
}
