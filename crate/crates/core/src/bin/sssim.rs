use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sssim::analysis::{
    bep_upper_bound, enumerate_pees, flop_saving, flops, sampled_bound, sampled_diversity,
};
use sssim::channel::{db_to_linear, CsiMode};
use sssim::detectors::{DetectorKind, LlrAlphabet};
use sssim::sim::{
    bound_rows, emit_csv, parse_snr_list, run_sweep, sweep_rows, write_csv, SweepConfig,
};
use sssim::sysconfig::{word_to_bits, MapperKind, OsiMetric, SystemConfig};
use sssim::{Modem, Result};

#[derive(Parser)]
#[command(
    name = "sssim",
    version,
    about = "SS-SIM-OFDM link simulator and analysis tools"
)]
struct Cli {
    #[command(flatten)]
    system: SystemArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct SystemArgs {
    /// key=value file with system parameters; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Subcarriers per cluster
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Active subcarriers
    #[arg(long, global = true)]
    k: Option<usize>,
    /// PSK order
    #[arg(long, global = true)]
    m: Option<usize>,
    /// SI mapper: comb, sisr or osi
    #[arg(long, global = true)]
    mapper: Option<MapperKind>,
    /// Zadoff-Chu root, coprime to K
    #[arg(long, global = true, allow_hyphen_values = true)]
    zc_d: Option<i64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    zc_u: Option<i64>,
    /// Use plain cyclic shifts without the per-code phase rotation
    #[arg(long, global = true)]
    no_rotation: bool,
    /// SI bits kept by the SISR mapper
    #[arg(long, global = true)]
    sisr_p1: Option<u32>,
    /// Pair distance used to order tuples: positional or diversity
    #[arg(long, global = true)]
    osi_metric: Option<OsiMetric>,
}

impl SystemArgs {
    fn resolve(&self) -> Result<SystemConfig> {
        let mut cfg = SystemConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| sssim::Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_kv(&text)?;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.mapper {
            cfg.mapper = v;
        }
        if let Some(v) = self.zc_d {
            cfg.zc_d = v;
        }
        if let Some(v) = self.zc_u {
            cfg.zc_u = v;
        }
        if self.no_rotation {
            cfg.rotation = false;
        }
        if self.sisr_p1.is_some() {
            cfg.sisr_p1 = self.sisr_p1;
        }
        if let Some(v) = self.osi_metric {
            cfg.osi_metric = v;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep
    Ber(BerArgs),
    /// Union bound on BEP
    Bound(BoundArgs),
    /// Diversity order and worst-case pair census
    Diversity(DiversityArgs),
    /// Flops per subcarrier of the three detectors
    Flops(FlopsArgs),
    /// Spreading code chips
    Codebook(CsvFlag),
    /// SI tuple family and its bit labels
    Simap(CsvFlag),
}

#[derive(Args)]
struct BerArgs {
    /// ml, near-ml or llr-mrc
    #[arg(long, default_value = "ml")]
    detector: DetectorKind,
    /// start:step:stop or a comma list, in dB
    #[arg(long, alias = "snr-db-list", default_value = "0:5:30")]
    snr_db: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = sssim::sim::DEFAULT_MIN_ERRORS)]
    min_errors: u64,
    #[arg(long, default_value_t = sssim::sim::DEFAULT_MAX_BITS)]
    max_bits: u64,
    /// perfect or mmse
    #[arg(long, default_value = "perfect")]
    csi: CsiMode,
    /// Worker threads, 0 for all cores
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Alphabet for LLR activity scores: spread or psk
    #[arg(long, default_value = "spread")]
    llr_alphabet: LlrAlphabet,
    /// Append an ebn0_db column
    #[arg(long)]
    ebn0: bool,
    /// Output CSV path; stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, alias = "snr-db-list", default_value = "0:5:40")]
    snr_db: String,
    /// Estimate from this many random pairs; ci95 holds the half-width
    #[arg(long)]
    sampled: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    ebn0: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiversityArgs {
    #[arg(long)]
    csv: bool,
    /// Sample this many random pairs instead of enumerating all of them
    #[arg(long)]
    sampled: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct FlopsArgs {
    /// Comma list of PSK orders to tabulate
    #[arg(long, value_delimiter = ',')]
    sweep_m: Option<Vec<usize>>,
}

#[derive(Args)]
struct CsvFlag {
    #[arg(long)]
    csv: bool,
}

fn emit(rows: &[sssim::sim::CsvRow], out: Option<&PathBuf>, ebn0: Option<u32>) -> Result<()> {
    match out {
        Some(path) => emit_csv(path, rows, ebn0),
        None => write_csv(std::io::stdout().lock(), rows, ebn0),
    }
}

fn run(cli: Cli) -> Result<()> {
    let system = cli.system.resolve()?;
    let checked = system.validate()?;
    match cli.cmd {
        Command::Ber(a) => {
            let sweep = SweepConfig {
                system,
                detector: a.detector,
                snr_db: parse_snr_list(&a.snr_db)?,
                min_errors: a.min_errors,
                max_bits: a.max_bits,
                seed: a.seed,
                csi: a.csi,
                workers: a.workers,
                llr_alphabet: a.llr_alphabet,
            };
            let stats = run_sweep(&sweep)?;
            let ebn0 = a.ebn0.then_some(checked.budget.total());
            emit(&sweep_rows(&sweep, &stats), a.out.as_ref(), ebn0)
        }
        Command::Bound(a) => {
            let modem = Modem::new(&checked)?;
            let snr_db = parse_snr_list(&a.snr_db)?;
            let lin: Vec<f64> = snr_db
                .iter()
                .map(|&s| {
                    if s == f64::INFINITY {
                        s
                    } else {
                        db_to_linear(s)
                    }
                })
                .collect();
            let ebn0 = a.ebn0.then_some(checked.budget.total());
            let rows = match a.sampled {
                Some(samples) => {
                    let est = sampled_bound(&modem, &lin, samples, a.seed);
                    let mut rows = bound_rows(
                        &system,
                        &snr_db,
                        &est.iter().map(|e| e.0).collect::<Vec<_>>(),
                    );
                    rows.iter_mut().zip(&est).for_each(|(r, e)| r.ci95 = e.1);
                    rows
                }
                None => bound_rows(&system, &snr_db, &bep_upper_bound(&modem, &lin)?),
            };
            emit(&rows, a.out.as_ref(), ebn0)
        }
        Command::Diversity(a) => {
            let modem = Modem::new(&checked)?;
            let fm = modem.family().metrics();
            if let Some(samples) = a.sampled {
                let s = sampled_diversity(&modem, samples, a.seed);
                if a.csv {
                    println!("n,k,m,mapper,min_d,hits,samples,n_d_ordered_estimate");
                    println!(
                        "{},{},{},{},{},{},{},{}",
                        system.n,
                        system.k,
                        system.m,
                        system.mapper,
                        s.min_d,
                        s.hits,
                        s.samples,
                        s.n_d_estimate
                    );
                } else {
                    println!("sampled pairs:        {}", s.samples);
                    println!("smallest d seen:      {} (upper bound on G_d)", s.min_d);
                    println!("pairs at that d:      {}", s.hits);
                    println!("ordered N_d estimate: {:.1}", s.n_d_estimate);
                }
                return Ok(());
            }
            let r = enumerate_pees(&modem)?;
            if a.csv {
                println!("n,k,m,mapper,g_d,n_d_ordered,n_d_unordered,n_d_per_rotation,kappa,gamma");
                println!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    system.n,
                    system.k,
                    system.m,
                    system.mapper,
                    r.g_d,
                    r.n_d_ordered,
                    r.n_d_unordered,
                    r.n_d_per_rotation,
                    fm.kappa,
                    fm.gamma
                );
            } else {
                println!(
                    "({},{},{}) {} mapper, {} ordered pairs",
                    system.n, system.k, system.m, system.mapper, r.pairs
                );
                println!("G_d                      {}", r.g_d);
                println!("N_d ordered pairs        {}", r.n_d_ordered);
                println!("N_d unordered pairs      {}", r.n_d_unordered);
                println!("N_d per common rotation  {}", r.n_d_per_rotation);
                println!("kappa / Gamma            {} / {}", fm.kappa, fm.gamma);
            }
            Ok(())
        }
        Command::Flops(a) => {
            match a.sweep_m {
                Some(ms) => {
                    println!("m,ml,near_ml,llr_mrc");
                    for m in ms {
                        let mut s = system.clone();
                        s.m = m;
                        let c = s.validate()?;
                        println!(
                            "{m},{},{},{}",
                            flops(DetectorKind::Ml, &c),
                            flops(DetectorKind::NearMl, &c),
                            flops(DetectorKind::LlrMrc, &c)
                        );
                    }
                }
                None => {
                    println!(
                        "flops per subcarrier, (N,K,M) = ({},{},{})",
                        system.n, system.k, system.m
                    );
                    for kind in DetectorKind::ALL {
                        let f = flops(kind, &checked);
                        if kind == DetectorKind::Ml {
                            println!("{:<8} {:>12.1}", kind.to_string(), f);
                        } else {
                            let save = 100.0 * flop_saving(kind, &checked);
                            println!(
                                "{:<8} {:>12.1}  saves {save:.2}% vs ml",
                                kind.to_string(),
                                f
                            );
                        }
                    }
                }
            }
            Ok(())
        }
        Command::Codebook(a) => {
            let modem = Modem::new(&checked)?;
            let cb = modem.codebook();
            if a.csv {
                println!("code,chip,re,im");
            } else {
                println!(
                    "{} codes of length {}, rotation denominator {}",
                    cb.len(),
                    cb.code_len(),
                    cb.denominator()
                );
            }
            for (i, code) in cb.codes().iter().enumerate() {
                for (j, c) in code.iter().enumerate() {
                    if a.csv {
                        println!("{},{},{:.12},{:.12}", i + 1, j + 1, c.re, c.im);
                    } else {
                        println!("c{}[{}] = {:+.12} {:+.12}j", i + 1, j + 1, c.re, c.im);
                    }
                }
            }
            Ok(())
        }
        Command::Simap(a) => {
            let modem = Modem::new(&checked)?;
            let p1 = checked.budget.p1;
            if a.csv {
                println!("index,bits,theta");
            }
            for (i, t) in modem.family().tuples().iter().enumerate() {
                let bits: String = word_to_bits(i as u64, p1)
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect();
                let theta = t
                    .indices()
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                if a.csv {
                    println!("{i},{bits},{theta}");
                } else {
                    println!("{i:>4}  {bits:>width$}  {t}", width = p1 as usize);
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
