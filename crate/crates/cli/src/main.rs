//! `polarseq` — design pipeline for nested rate-compatible symmetric
//! polar codes: enumerate candidate codes, measure their required SNR by
//! Monte-Carlo simulation, search the design graph, disambiguate into a
//! reliability order, and validate the artifacts.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input error,
//! 3 search/design failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polarseq::channel::{
    density_evolution_ga, estimate_bler, record_seed, required_snr, DecoderSpec, SnrPoint,
    SnrSearch, StopRule,
};
use polarseq::code::{code_from_order, supercode, InformationSet};
use polarseq::decode::{ae_sc_decode, sc_decode_with, EnsembleConfig, Kernel};
use polarseq::design::{
    design_nested, validate_order, DatasetRecord, SimMeta,
};
use polarseq::error::Error;
use polarseq::files::{
    read_dataset, read_partial_order, read_total_order, write_bler_csv, write_dataset,
    write_partial_order, write_total_order, BlerRow, RunConfig,
};
use polarseq::transform::{encode, systematic_encode};
use polarseq::upo::{enumerate_upo_codes, min_info_set};

#[derive(Parser)]
#[command(name = "polarseq", version, about)]
struct Cli {
    /// Master seed for every randomized step (recorded in outputs).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for Monte-Carlo simulation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Stdout format for encode/decode/validate.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Sc,
    AeSc,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate UPO-compliant codes into a dataset skeleton.
    Enumerate {
        /// log2 of the block length (N = 2^n).
        #[arg(long)]
        n: usize,
        /// Keep only codes with at most this many generators.
        #[arg(long)]
        max_generators: Option<usize>,
        /// Also include doubled-length supercodes of every code on the
        /// designed path in this partial-order file.
        #[arg(long)]
        supercodes_from: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fill in the required-SNR metric of every unsimulated record.
    Simulate {
        #[arg(long, short = 'i')]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = DecoderArg::AeSc)]
        decoder: DecoderArg,
        /// Ensemble size for ae-sc.
        #[arg(long, short, default_value_t = 8)]
        m: usize,
        /// Drop the forced identity permutation from the ensemble.
        #[arg(long)]
        no_identity: bool,
        /// Target block error rate.
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        tol_db: f64,
        #[arg(long, default_value_t = 100)]
        min_errors: u64,
        #[arg(long, default_value_t = 10_000_000)]
        max_trials: u64,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        scan_lo: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        scan_hi: f64,
        #[arg(long, default_value_t = 0.5)]
        scan_step: f64,
    },
    /// Run the nested sequence design over measured datasets.
    Design {
        /// Measured dataset files, one per block length.
        #[arg(long = "dataset", required = true)]
        datasets: Vec<PathBuf>,
        /// Comma-separated block lengths, in design order, e.g. "32,64".
        #[arg(long)]
        schedule: String,
        #[arg(long, default_value_t = 8)]
        z_max: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Resolve a partial order into a total reliability order.
    Disambiguate {
        /// Partial-order file from `design`.
        #[arg(long)]
        p: PathBuf,
        /// Es/N0 (dB) design point for the density-evolution tie-break.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        design_snr: f64,
        /// Allow orderings that break the universal partial order.
        #[arg(long)]
        no_enforce_upo: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Check a total order (and optionally its partial order).
    Validate {
        #[arg(long)]
        order: PathBuf,
        #[arg(long)]
        p: Option<PathBuf>,
    },
    /// Sweep block error rate over SNR points into a CSV.
    Bler {
        #[command(flatten)]
        code: CodeSpec,
        #[arg(long, value_enum, default_value_t = DecoderArg::Sc)]
        decoder: DecoderArg,
        #[arg(long, short, default_value_t = 8)]
        m: usize,
        /// Comma-separated Es/N0 points in dB.
        #[arg(long, allow_hyphen_values = true)]
        snrs: String,
        #[arg(long, default_value_t = 100)]
        min_errors: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_trials: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Encode a message (debugging helper).
    Encode {
        #[command(flatten)]
        code: CodeSpec,
        /// Message bits, e.g. "1011".
        #[arg(long)]
        msg: String,
        #[arg(long)]
        systematic: bool,
    },
    /// Decode an LLR vector (debugging helper).
    Decode {
        #[command(flatten)]
        code: CodeSpec,
        /// Comma-separated LLR values, positive favouring bit 0.
        #[arg(long, allow_hyphen_values = true)]
        llr: String,
        #[arg(long, value_enum, default_value_t = DecoderArg::Sc)]
        decoder: DecoderArg,
        #[arg(long, short, default_value_t = 8)]
        m: usize,
        /// Use the min-sum check-node kernel.
        #[arg(long)]
        min_sum: bool,
    },
}

/// The three ways to name a code on the command line.
#[derive(Args)]
struct CodeSpec {
    /// JSON file holding {"n": .., "info": [..]}.
    #[arg(long)]
    info_file: Option<PathBuf>,
    /// Inline information set, e.g. "3,5,6,7" (requires --n).
    #[arg(long)]
    info: Option<String>,
    /// log2 block length, for --info and --order.
    #[arg(long)]
    n: Option<usize>,
    /// Reliability order file (JSON or 16-per-row text).
    #[arg(long)]
    order: Option<PathBuf>,
    /// Code dimension, for --order.
    #[arg(long)]
    k: Option<usize>,
}

impl CodeSpec {
    fn load(&self) -> Result<InformationSet, Error> {
        if let Some(path) = &self.info_file {
            let text = std::fs::read_to_string(path)?;
            return serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()));
        }
        if let Some(list) = &self.info {
            let n = self.n.ok_or_else(|| Error::InvalidArgument("--info requires --n".into()))?;
            let indices = parse_u16_list(list)?;
            return InformationSet::from_indices(n, &indices);
        }
        if let Some(path) = &self.order {
            let order = read_total_order(path)?;
            let k = self.k.ok_or_else(|| Error::InvalidArgument("--order requires --k".into()))?;
            let block_len = 1usize << self.n.unwrap_or(order.n());
            return code_from_order(&order, block_len, k);
        }
        Err(Error::InvalidArgument(
            "specify a code via --info-file, --info --n, or --order --k".into(),
        ))
    }
}

fn parse_u16_list(text: &str) -> Result<Vec<u16>, Error> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u16>().map_err(|e| Error::Parse(format!("bad index {t:?}: {e}"))))
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad value {t:?}: {e}"))))
        .collect()
}

fn parse_bits(text: &str) -> Result<Vec<u8>, Error> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("bad bit {c:?}"))),
        })
        .collect()
}

fn decoder_spec(arg: DecoderArg, m: usize, include_identity: bool) -> DecoderSpec {
    match arg {
        DecoderArg::Sc => DecoderSpec::Sc,
        DecoderArg::AeSc => DecoderSpec::AeSc { m, include_identity },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_err() {
            eprintln!("warning: thread pool already initialized");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Search(_) | Error::Design(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Enumerate { n, max_generators, supercodes_from, out } => {
            cmd_enumerate(cli, *n, *max_generators, supercodes_from.as_deref(), out)
        }
        Command::Simulate {
            input,
            out,
            decoder,
            m,
            no_identity,
            epsilon,
            tol_db,
            min_errors,
            max_trials,
            scan_lo,
            scan_hi,
            scan_step,
        } => {
            let spec = decoder_spec(*decoder, *m, !*no_identity);
            let search = SnrSearch {
                epsilon: *epsilon,
                tol_db: *tol_db,
                stop: StopRule { min_errors: *min_errors, max_trials: *max_trials },
                scan_lo_db: *scan_lo,
                scan_hi_db: *scan_hi,
                scan_step_db: *scan_step,
            };
            cmd_simulate(cli, input, out, &spec, &search)
        }
        Command::Design { datasets, schedule, z_max, out } => {
            cmd_design(cli, datasets, schedule, *z_max, out)
        }
        Command::Disambiguate { p, design_snr, no_enforce_upo, out } => {
            cmd_disambiguate(cli, p, *design_snr, !*no_enforce_upo, out)
        }
        Command::Validate { order, p } => cmd_validate(order, p.as_deref()),
        Command::Bler { code, decoder, m, snrs, min_errors, max_trials, out } => {
            let spec = decoder_spec(*decoder, *m, true);
            let stop = StopRule { min_errors: *min_errors, max_trials: *max_trials };
            cmd_bler(cli, &code.load()?, &spec, &parse_f64_list(snrs)?, stop, out)
        }
        Command::Encode { code, msg, systematic } => {
            let info = code.load()?;
            let bits = parse_bits(msg)?;
            let cw = if *systematic {
                systematic_encode(&info, &bits)?
            } else {
                encode(&info, &bits)?
            };
            match cli.format {
                Format::Text => println!("{}", bits_string(&cw)),
                _ => println!(
                    "{}",
                    serde_json::json!({"n": info.n(), "k": info.len(), "codeword": cw})
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Decode { code, llr, decoder, m, min_sum } => {
            let info = code.load()?;
            let llr = parse_f64_list(llr)?;
            let kernel = if *min_sum { Kernel::MinSum } else { Kernel::Exact };
            let result = match decoder {
                DecoderArg::Sc => sc_decode_with(&info, &llr, None, kernel)?,
                DecoderArg::AeSc => {
                    let mut rng = polarseq::channel::trial_rng(cli.seed, u64::MAX);
                    let cfg = EnsembleConfig::sample(&info, *m, true, &mut rng)?;
                    ae_sc_decode(&info, &llr, &cfg)?
                }
            };
            match cli.format {
                Format::Text => {
                    println!("message  {}", bits_string(&result.message));
                    println!("codeword {}", bits_string(&result.codeword));
                    println!("score    {}", result.score);
                }
                _ => println!(
                    "{}",
                    serde_json::json!({
                        "message": result.message,
                        "codeword": result.codeword,
                        "score": result.score,
                    })
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

fn base_config(cli: &Cli, command: &str) -> RunConfig {
    let mut config = RunConfig::new(command).with_seed(cli.seed);
    if let Some(t) = cli.threads {
        config = config.with_threads(t);
    }
    config
}

fn cmd_enumerate(
    cli: &Cli,
    n: usize,
    max_generators: Option<usize>,
    supercodes_from: Option<&std::path::Path>,
    out: &PathBuf,
) -> Result<ExitCode, Error> {
    let mut codes = enumerate_upo_codes(n, max_generators)?;
    let mut config = base_config(cli, "enumerate").with_param("n", n);
    if let Some(g) = max_generators {
        config = config.with_param("max_generators", g);
    }
    if let Some(path) = supercodes_from {
        let (_, p) = read_partial_order(path)?;
        let base_len = p
            .max_len()
            .ok_or_else(|| Error::InvalidArgument("empty partial-order file".into()))?;
        let base_n = base_len.trailing_zeros() as usize;
        if base_n >= n {
            return Err(Error::InvalidArgument(format!(
                "supercode source N = {base_len} is not shorter than 2^{n}"
            )));
        }
        let t = n - base_n;
        let groups = p.groups_for(base_len).expect("length listed");
        // checkpoints of the designed path: unions of reliable suffixes
        let mut checkpoint = InformationSet::empty(base_n);
        let mut added = 0usize;
        for group in groups.iter().rev() {
            for &i in group {
                checkpoint.insert(i);
            }
            let gens = min_info_set(&checkpoint).map_err(|_| {
                Error::InvalidArgument(
                    "supercode construction needs UPO-compliant checkpoints".into(),
                )
            })?;
            let bigger = supercode(&gens, t)?;
            if !codes.contains(&bigger) {
                codes.push(bigger);
                added += 1;
            }
        }
        codes.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        config = config
            .with_param("supercodes_from", path.display().to_string())
            .with_param("supercodes_added", added);
    }
    let records: Vec<DatasetRecord> =
        codes.into_iter().map(DatasetRecord::skeleton).collect();
    write_dataset(out, &config, &records)?;
    println!(
        "N={}: {} UPO-compliant sets ({} requiring simulation) -> {}",
        1usize << n,
        records.len(),
        records.len() - 1,
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    cli: &Cli,
    input: &PathBuf,
    out: &PathBuf,
    decoder: &DecoderSpec,
    search: &SnrSearch,
) -> Result<ExitCode, Error> {
    let (_, mut records) = read_dataset(input)?;
    let config = base_config(cli, "simulate")
        .with_param("input", input.display().to_string())
        .with_param("decoder", decoder.id())
        .with_param("epsilon", search.epsilon)
        .with_param("tol_db", search.tol_db)
        .with_param("min_errors", search.stop.min_errors)
        .with_param("max_trials", search.stop.max_trials);
    let total = records.len();
    let mut filled = 0usize;
    let mut skipped = 0usize;
    let mut failures = 0usize;
    for rec in records.iter_mut() {
        if rec.mu_db.is_some() {
            skipped += 1;
            continue;
        }
        let seed = record_seed(cli.seed, &rec.info);
        let m = match decoder {
            DecoderSpec::Sc => 1,
            DecoderSpec::AeSc { m, .. } => *m,
        };
        let mut meta = SimMeta {
            decoder: decoder.id(),
            m,
            epsilon: search.epsilon,
            seed,
            trials: 0,
            error: None,
        };
        match required_snr(&rec.info, decoder, search, seed) {
            Ok((point, trials)) => {
                meta.trials = trials;
                rec.mu_db = Some(point.eb_n0_db);
                filled += 1;
            }
            Err(Error::Search(msg)) => {
                eprintln!("warning: K={} {:?}: {msg}", rec.info.len(), rec.info.indices());
                meta.error = Some(msg);
                failures += 1;
            }
            Err(other) => return Err(other),
        }
        rec.meta = Some(meta);
    }
    write_dataset(out, &config, &records)?;
    println!(
        "simulated {filled}/{total} records ({skipped} already done, {failures} failed) -> {}",
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_design(
    cli: &Cli,
    datasets: &[PathBuf],
    schedule: &str,
    z_max: usize,
    out: &PathBuf,
) -> Result<ExitCode, Error> {
    let mut by_len: BTreeMap<usize, Vec<DatasetRecord>> = BTreeMap::new();
    for path in datasets {
        let (_, records) = read_dataset(path)?;
        let Some(first) = records.first() else {
            return Err(Error::InvalidArgument(format!("{} holds no records", path.display())));
        };
        let block_len = first.info.block_len();
        if by_len.insert(block_len, records).is_some() {
            return Err(Error::InvalidArgument(format!(
                "two datasets for N = {block_len}"
            )));
        }
    }
    let schedule: Vec<usize> = schedule
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad N {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    let (p, outcomes) = design_nested(&schedule, &by_len, z_max)?;
    let config = base_config(cli, "design")
        .with_param("schedule", schedule.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","))
        .with_param("z_max", z_max);
    write_partial_order(out, &config, &p)?;
    for outcome in &outcomes {
        println!(
            "N={}: sequence metric sum {:.4} dB, average {:.4} dB",
            outcome.block_len,
            outcome.path.mu_sum(),
            outcome.path.mu_sum() / outcome.block_len as f64
        );
    }
    println!("partial order -> {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_disambiguate(
    cli: &Cli,
    p_path: &PathBuf,
    design_snr: f64,
    enforce_upo: bool,
    out: &PathBuf,
) -> Result<ExitCode, Error> {
    let (_, p) = read_partial_order(p_path)?;
    let block_len = p
        .max_len()
        .ok_or_else(|| Error::InvalidArgument("empty partial-order file".into()))?;
    let n = block_len.trailing_zeros() as usize;
    let nu = density_evolution_ga(n, design_snr);
    let order = polarseq::design::disambiguate(&p, &nu, enforce_upo)?;
    let config = base_config(cli, "disambiguate")
        .with_param("p", p_path.display().to_string())
        .with_param("design_snr_db", design_snr)
        .with_param("enforce_upo", enforce_upo);
    write_total_order(out, &config, &order)?;
    println!(
        "total order over [0, {block_len}) -> {} and {}",
        out.display(),
        out.with_extension("txt").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(order_path: &PathBuf, p_path: Option<&std::path::Path>) -> Result<ExitCode, Error> {
    let order = read_total_order(order_path)?;
    let p = match p_path {
        Some(path) => Some(read_partial_order(path)?.1),
        None => None,
    };
    let report = validate_order(&order, p.as_ref());
    if report.is_clean() {
        println!("OK: order over [0, {}) passes all checks", order.block_len());
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
        println!("{} violations", report.violations.len());
        Ok(ExitCode::from(1))
    }
}

fn cmd_bler(
    cli: &Cli,
    info: &InformationSet,
    decoder: &DecoderSpec,
    snrs: &[f64],
    stop: StopRule,
    out: &PathBuf,
) -> Result<ExitCode, Error> {
    let seed = record_seed(cli.seed, info);
    let mut rows = Vec::with_capacity(snrs.len());
    for &es in snrs {
        let est = estimate_bler(info, decoder, es, stop, seed)?;
        let point = if info.is_empty() {
            SnrPoint { es_n0_db: es, eb_n0_db: f64::NAN }
        } else {
            SnrPoint::from_es(es, info.len(), info.block_len())
        };
        println!(
            "Es/N0 {es:.2} dB: {} errors in {} trials, BLER {:.3e}",
            est.errors, est.trials, est.bler
        );
        rows.push(BlerRow {
            es_n0_db: es,
            eb_n0_db: point.eb_n0_db,
            errors: est.errors,
            trials: est.trials,
            bler: est.bler,
            ci95: est.half_width_95,
        });
    }
    let config = base_config(cli, "bler")
        .with_param("decoder", decoder.id())
        .with_param("n", info.n())
        .with_param("k", info.len())
        .with_param("min_errors", stop.min_errors)
        .with_param("max_trials", stop.max_trials);
    write_bler_csv(out, &config, &rows)?;
    println!("sweep -> {}", out.display());
    Ok(ExitCode::SUCCESS)
}
