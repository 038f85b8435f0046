use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use trng_core::analysis::{bit_balance, default_alpha, gaussian_fit, slope_series, time_lag, Histogram, HistogramReport};
use trng_core::bits::{meta_path, sha256_hex};
use trng_core::chain::run_chain;
use trng_core::config::KeyValues;
use trng_core::crypto::{self, dp_perturb, perturbation_report, EntropyPool, KeyMaterial, ALPHANUMERIC};
use trng_core::nist::run_suite;
use trng_core::nlfsr::expand;
use trng_core::pipeline::generate;
use trng_core::pnm::{Bitmap, Image, PnmKind};
use trng_core::sim::{integrate_charge, simulate, CurrentTrace};
use trng_core::{BitStream, Error, Result};

use crate::config::{load_file, RunConfig};
use crate::manifest::Manifest;
use crate::{Cli, Command, Format};

pub enum Status {
    Ok,
    /// Ran to completion but the result is a failure (e.g. a NIST test).
    Failed,
}

fn gather_config(cli: &Cli) -> Result<RunConfig> {
    let mut kv = match &cli.config {
        Some(path) => load_file(path)?,
        None => KeyValues::new(),
    };
    for item in &cli.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config { line: 0, reason: format!("--set expects KEY=VALUE, got {item:?}") })?;
        kv.set(k.trim(), v.trim());
    }
    if let Some(seed) = cli.seed {
        kv.set("sim.seed", seed.to_string());
    }
    RunConfig::resolve(&kv)
}

/// `.txt` is 0/1 text; anything else is packed bytes with an optional sidecar.
pub fn read_bits(path: &Path) -> Result<BitStream> {
    if path.extension().is_some_and(|e| e == "txt") {
        BitStream::read_ascii(path)
    } else {
        BitStream::read_raw(path)
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Simulate => "simulate",
        Command::Extract { .. } => "extract",
        Command::Analyze { .. } => "analyze",
        Command::Nist { .. } => "nist",
        Command::Expand { .. } => "expand",
        Command::Bitmap { .. } => "bitmap",
        Command::Otp { .. } => "otp",
        Command::Encrypt { .. } => "encrypt",
        Command::Decrypt { .. } => "decrypt",
        Command::Perturb { .. } => "perturb",
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    let cfg = gather_config(cli)?;
    fs::create_dir_all(&cli.out)?;
    let name = command_name(&cli.command);
    let mut m = Manifest::new(name, cfg.resolved());
    let start = Instant::now();
    let status = match &cli.command {
        Command::Simulate => cmd_simulate(cli, &cfg, &mut m)?,
        Command::Extract { trace } => cmd_extract(cli, &cfg, &mut m, trace)?,
        Command::Analyze { trace, bits } => cmd_analyze(cli, &cfg, &mut m, trace.as_deref(), bits.as_deref())?,
        Command::Nist { bits } => cmd_nist(cli, &cfg, &mut m, bits)?,
        Command::Expand { seed_bits, n } => cmd_expand(cli, &cfg, &mut m, seed_bits.as_deref(), *n)?,
        Command::Bitmap { bits, side } => cmd_bitmap(cli, &cfg, &mut m, bits.as_deref(), *side)?,
        Command::Otp { bits, length, charset } => cmd_otp(&cfg, &mut m, bits.as_deref(), *length, charset)?,
        Command::Encrypt { input, bits } => cmd_encrypt(cli, &cfg, &mut m, input, bits.as_deref())?,
        Command::Decrypt { input, key, output } => cmd_decrypt(cli, &mut m, input, key, output.as_deref())?,
        Command::Perturb { input, bits } => cmd_perturb(cli, &cfg, &mut m, input, bits.as_deref())?,
    };
    m.set_wall_clock(start.elapsed().as_secs_f64());
    m.write(&cli.out)?;
    print_summary(cli.format, name, &m);
    Ok(status)
}

fn print_summary(format: Format, name: &str, m: &Manifest) {
    let summary = m.summary_map();
    match format {
        Format::Json => {
            let mut obj = summary.clone();
            obj.insert("command".into(), Value::String(name.into()));
            println!("{}", Value::Object(obj));
        }
        Format::Csv => {
            let fields: Vec<String> = summary
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k}={s}"),
                    other => format!("{k}={other}"),
                })
                .collect();
            println!("{name},{}", fields.join(","));
        }
    }
}

/// Bits for the consumers: the given file, or `n` fresh pipeline bits.
fn source_bits(cfg: &RunConfig, m: &mut Manifest, path: Option<&Path>, n: usize) -> Result<BitStream> {
    match path {
        Some(p) => {
            m.input(p)?;
            read_bits(p)
        }
        None => Ok(generate(&cfg.sim, &cfg.chain, &cfg.nlfsr, n)?.expanded),
    }
}

fn cmd_simulate(cli: &Cli, cfg: &RunConfig, m: &mut Manifest) -> Result<Status> {
    let trace = simulate(&cfg.sim)?;
    let path = cli.out.join("trace.csv");
    trace.write_csv(&path)?;
    m.output(&path)?;
    m.summary("samples", json!(trace.len()));
    m.summary("mean_current_a", json!(trace.mean()));
    m.summary("trace_sha256", json!(sha256_hex(&fs::read(&path)?)));
    Ok(Status::Ok)
}

fn cmd_extract(cli: &Cli, cfg: &RunConfig, m: &mut Manifest, trace_path: &Path) -> Result<Status> {
    m.input(trace_path)?;
    let trace = CurrentTrace::read_csv(trace_path)?;
    let out = run_chain(&trace, &cfg.chain)?;
    let p1 = cli.out.join("port1.csv");
    let p2 = cli.out.join("port2.csv");
    let bits = cli.out.join("bits.bin");
    out.converted.write_csv(&p1)?;
    out.filtered.write_csv(&p2)?;
    out.bits.write_raw(&bits, &sha256_hex(&fs::read(trace_path)?))?;
    for p in [&p1, &p2, &bits, &meta_path(&bits)] {
        m.output(p)?;
    }
    m.summary("bits", json!(out.bits.len()));
    m.summary("ones_fraction", json!(out.bits.count_ones() as f64 / out.bits.len().max(1) as f64));
    Ok(Status::Ok)
}

fn cmd_analyze(cli: &Cli, cfg: &RunConfig, m: &mut Manifest, trace: Option<&Path>, bits: Option<&Path>) -> Result<Status> {
    if trace.is_none() && bits.is_none() {
        return Err(Error::InvalidParam { name: "analyze", reason: "give --trace, --bits or both".into() });
    }
    if let Some(tp) = trace {
        m.input(tp)?;
        let trace = CurrentTrace::read_csv(tp)?;
        let slopes = slope_series(&trace.samples, trace.dt)?;
        let hist = Histogram::build(&slopes.values, cfg.tl.bins)?;
        let fit = gaussian_fit(&hist)?;
        let hist_path = cli.out.join("slope_histogram.json");
        fs::write(&hist_path, HistogramReport::new(&hist, &fit).to_json())?;
        m.output(&hist_path)?;

        let charge = integrate_charge(&trace, cfg.tl.window)?;
        let alpha = cfg.tl.alpha.unwrap_or_else(|| default_alpha(&charge.values));
        let grid = time_lag(&charge, cfg.tl.grid_size, alpha)?;
        let tl_path = cli.out.join("time_lag.csv");
        grid.write(&tl_path)?;
        m.output(&tl_path)?;
        let mut meta = tl_path.clone().into_os_string();
        meta.push(".meta.json");
        m.output(&PathBuf::from(meta))?;

        m.summary("slope_sigma", json!(fit.sigma));
        m.summary("slope_r_squared", json!(fit.r_squared));
        m.summary("tl_diagonal_fraction", json!(grid.diagonal_fraction(-1.0, 0.1)));
    }
    if let Some(bp) = bits {
        m.input(bp)?;
        let balance = bit_balance(&read_bits(bp)?)?;
        let path = cli.out.join("balance.json");
        fs::write(&path, serde_json::to_string_pretty(&balance).expect("plain data serializes"))?;
        m.output(&path)?;
        m.summary("ones_fraction", json!(balance.ones_fraction));
    }
    Ok(Status::Ok)
}

fn cmd_nist(cli: &Cli, cfg: &RunConfig, m: &mut Manifest, bits_path: &Path) -> Result<Status> {
    m.input(bits_path)?;
    let bits = read_bits(bits_path)?;
    let report = run_suite(&bits, &cfg.nist)?;
    let json_path = cli.out.join("nist.json");
    let table_path = cli.out.join("nist.txt");
    fs::write(&json_path, report.to_json())?;
    fs::write(&table_path, report.to_table())?;
    m.output(&json_path)?;
    m.output(&table_path)?;
    let applicable = report.entries.iter().filter(|e| e.applicable).count();
    let passed = report.entries.iter().filter(|e| e.applicable && e.pass).count();
    let ok = report.all_applicable_pass();
    m.summary("bits", json!(bits.len()));
    m.summary("applicable", json!(applicable));
    m.summary("passed", json!(passed));
    m.summary("verdict", json!(if ok { "pass" } else { "fail" }));
    Ok(if ok { Status::Ok } else { Status::Failed })
}

fn cmd_expand(cli: &Cli, cfg: &RunConfig, m: &mut Manifest, seed_path: Option<&Path>, n: usize) -> Result<Status> {
    let (expanded, stats, secs) = match seed_path {
        Some(p) => {
            m.input(p)?;
            let seed = read_bits(p)?;
            let t = Instant::now();
            let (out, stats) = expand(&seed, &cfg.nlfsr.spec, cfg.nlfsr.reseed_interval, n)?;
            (out, stats, t.elapsed().as_secs_f64())
        }
        None => {
            let out = generate(&cfg.sim, &cfg.chain, &cfg.nlfsr, n)?;
            // time only the expansion, not the simulation feeding it
            let t = Instant::now();
            let (again, stats) = expand(&out.raw, &cfg.nlfsr.spec, cfg.nlfsr.reseed_interval, n)?;
            let secs = t.elapsed().as_secs_f64();
            debug_assert_eq!(again, out.expanded);
            (again, stats, secs)
        }
    };
    let path = cli.out.join("expanded.bin");
    let source = seed_path.map_or_else(|| "pipeline".to_string(), |p| sha256_hex(&fs::read(p).unwrap_or_default()));
    expanded.write_raw(&path, &source)?;
    m.output(&path)?;
    m.output(&meta_path(&path))?;
    let mbps = n as f64 / secs.max(1e-9) / 1e6;
    m.summary("bits", json!(expanded.len()));
    m.summary("seed_bits_used", json!(stats.seed_bits_used));
    m.summary("reseeds", json!(stats.reseeds));
    m.summary("throughput", json!(format!("{mbps:.1} Mbit/s")));
    Ok(Status::Ok)
}

fn cmd_bitmap(cli: &Cli, cfg: &RunConfig, m: &mut Manifest, bits: Option<&Path>, side: usize) -> Result<Status> {
    let bits = source_bits(cfg, m, bits, side * side)?;
    let bitmap = Bitmap::from_bits(&bits, side)?;
    let path = cli.out.join("bitmap.pbm");
    bitmap.write(&path, Some(&format!("{side}x{side} generated bits")))?;
    m.output(&path)?;
    m.summary("side", json!(side));
    m.summary("ones_fraction", json!(bitmap.ones_fraction(0, 0, side, side)));
    Ok(Status::Ok)
}

fn charset_symbols(name: &str) -> Vec<char> {
    match name {
        "alnum" => ALPHANUMERIC.chars().collect(),
        "digits" => ('0'..='9').collect(),
        "hex" => "0123456789abcdef".chars().collect(),
        "binary" => vec!['0', '1'],
        literal => {
            let mut v: Vec<char> = literal.chars().collect();
            v.sort_unstable();
            v.dedup();
            v
        }
    }
}

fn cmd_otp(cfg: &RunConfig, m: &mut Manifest, bits: Option<&Path>, length: usize, charset: &str) -> Result<Status> {
    let symbols = charset_symbols(charset);
    // rejection sampling discards under half the draws; 4x leaves ample slack
    let per = (usize::BITS - symbols.len().saturating_sub(1).leading_zeros()) as usize;
    let need = (4 * length * per).max(1024);
    let mut pool = EntropyPool::new(source_bits(cfg, m, bits, need)?);
    let password = crypto::otp(&mut pool, length, &symbols)?;
    m.summary("password", json!(password));
    m.summary("bits_used", json!(pool.consumed()));
    Ok(Status::Ok)
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| "data".into(), |n| n.to_string_lossy().into_owned())
}

fn cmd_encrypt(cli: &Cli, cfg: &RunConfig, m: &mut Manifest, input: &Path, bits: Option<&Path>) -> Result<Status> {
    m.input(input)?;
    let plaintext = fs::read(input)?;
    let mut pool = EntropyPool::new(source_bits(cfg, m, bits, 1024)?);
    let (envelope, keys) = crypto::encrypt(&plaintext, &mut pool)?;
    let base = file_name(input);
    let enc = cli.out.join(format!("{base}.enc"));
    let key = cli.out.join(format!("{base}.key"));
    fs::write(&enc, envelope.to_bytes())?;
    fs::write(&key, keys.to_bytes())?;
    m.output(&enc)?;
    m.summary("plaintext_bytes", json!(plaintext.len()));
    m.summary("envelope", json!(enc.display().to_string()));
    m.summary("key", json!(key.display().to_string()));
    Ok(Status::Ok)
}

fn cmd_decrypt(cli: &Cli, m: &mut Manifest, input: &Path, key: &Path, output: Option<&Path>) -> Result<Status> {
    m.input(input)?;
    let keys = KeyMaterial::from_bytes(&fs::read(key)?)?;
    let plaintext = crypto::decrypt(&fs::read(input)?, &keys)?;
    let out = output.map_or_else(
        || {
            let base = file_name(input);
            let stem = base.strip_suffix(".enc").unwrap_or(&base);
            cli.out.join(format!("{stem}.dec"))
        },
        Path::to_path_buf,
    );
    fs::write(&out, &plaintext)?;
    m.output(&out)?;
    m.summary("plaintext_bytes", json!(plaintext.len()));
    m.summary("output", json!(out.display().to_string()));
    Ok(Status::Ok)
}

fn cmd_perturb(cli: &Cli, cfg: &RunConfig, m: &mut Manifest, input: &Path, bits: Option<&Path>) -> Result<Status> {
    m.input(input)?;
    let image = Image::read(input)?;
    let need = image.len() * crypto::DEVIATE_BITS;
    let mut pool = EntropyPool::new(source_bits(cfg, m, bits, need)?);
    let noisy = dp_perturb(&image, &cfg.dp, &mut pool)?;
    let report = perturbation_report(&image, &noisy)?;
    let kind = if image.channels == 3 { PnmKind::ColorBinary } else { PnmKind::GrayBinary };
    let ext = if image.channels == 3 { "ppm" } else { "pgm" };
    let path = cli.out.join(format!("perturbed.{ext}"));
    noisy.write(&path, kind)?;
    m.output(&path)?;
    m.summary("mae", json!(report.mae));
    m.summary("psnr_db", json!(if report.psnr.is_finite() { json!(report.psnr) } else { json!("inf") }));
    m.summary("epsilon", json!(cfg.dp.epsilon));
    Ok(Status::Ok)
}
