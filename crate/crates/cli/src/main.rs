mod parse;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nnmod::channel::{ber_sweep_with, Transmitter};
use nnmod::learning::{fit_gradient, fit_least_squares, GradientConfig, TrainReport, TrainingSet};
use nnmod::model_io::{
    export_manifest, read_manifest, read_training_set, write_iq, write_manifest, write_training_set,
    IqFormat, ModelManifest,
};
use nnmod::predistortion::{fine_tune, Chain, FineTuneConfig, FrontEndModel, Predistorter};
use nnmod::protocols::wifi::{build_wifi_frame, WifiFrameConfig, DATA_SUBCARRIERS};
use nnmod::protocols::zigbee::{build_oqpsk_zigbee, ppdu};
use nnmod::rng::{derive_seed, random_bits, seeded};
use nnmod::{Scheme, SynthGraph};

use parse::{FrontEndSpec, Points};

#[derive(Parser)]
#[command(name = "nn-mod", version, about = "Modulators as transposed-convolution synthesis graphs")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, value_parser = parse::count_usize)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Modulate bits into an IQ file.
    Modulate(ModulateArgs),
    /// Fit template kernels to a dataset directory.
    Learn(LearnArgs),
    /// Jointly tune kernels and a predistorter against a front-end model.
    Finetune(FinetuneArgs),
    /// Monte Carlo BER sweep over AWGN.
    Ber(BerArgs),
    /// RMS EVM after AWGN and demodulation.
    Evm(EvmArgs),
    /// Build a protocol frame.
    Frame(FrameArgs),
    /// Write a scheme's graph as a JSON manifest.
    Export(ExportArgs),
    /// Validate a manifest and check its round trip.
    Import(ImportArgs),
    /// Generate a training-set directory from a scheme.
    Dataset(DatasetArgs),
    /// Measure modulate throughput.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ModulateArgs {
    #[arg(long)]
    scheme: String,
    /// Bit string such as `00011011`.
    #[arg(long, conflicts_with = "hex")]
    bits: Option<String>,
    /// Hex bytes, expanded most significant bit first.
    #[arg(long)]
    hex: Option<String>,
    /// Use the graph from this manifest instead of the scheme's own.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output file; `.cf64` selects 64-bit floats, anything else cf32.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ls,
    Gd,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "ls")]
    method: Method,
    #[arg(long, default_value = "1e-2", value_parser = parse::real)]
    lr: f64,
    #[arg(long, default_value = "500", value_parser = parse::count_usize)]
    epochs: usize,
    /// Examples per step (0 = full batch).
    #[arg(long, default_value = "0", value_parser = parse::count_usize)]
    batch_size: usize,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
    /// Scheme name recorded in the manifest metadata.
    #[arg(long, default_value = "learned")]
    name: String,
    #[arg(long)]
    out: PathBuf,
    /// CSV of the per-epoch MSE (gradient method only).
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct FinetuneArgs {
    #[arg(long, default_value = "qam16-rrc")]
    scheme: String,
    /// `rapp:p=2,sat=auto` (auto = 1.2 × RMS of the ideal signal) or `identity`.
    #[arg(long, default_value = "rapp:p=2,sat=auto", value_parser = parse::front_end)]
    fe: FrontEndSpec,
    #[arg(long, default_value = "30", value_parser = parse::count_usize)]
    epochs: usize,
    #[arg(long, default_value = "0.1", value_parser = parse::real)]
    lr: f64,
    #[arg(long, default_value = "0.5", value_parser = parse::real)]
    pd_step: f64,
    #[arg(long, default_value = "32", value_parser = parse::count_usize)]
    sequences: usize,
    #[arg(long, default_value = "128", value_parser = parse::count_usize)]
    symbols: usize,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Predistorter coefficients as JSON.
    #[arg(long)]
    pd_out: Option<PathBuf>,
    /// CSV of the per-epoch MSE.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BerArgs {
    #[arg(long)]
    scheme: String,
    /// Eb/N0 in dB: a value or `start:step:stop`.
    #[arg(long, default_value = "0:2:12", value_parser = parse::points)]
    ebn0: Points,
    /// Bits per Eb/N0 point.
    #[arg(long, default_value = "1e6", value_parser = parse::count)]
    bits: u64,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
    /// Transmit through the direct-form reference modulator.
    #[arg(long)]
    reference: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct EvmArgs {
    #[arg(long)]
    scheme: String,
    /// Per-sample SNR in dB: a value or `start:step:stop`.
    #[arg(long, default_value = "10", value_parser = parse::points)]
    snr: Points,
    #[arg(long, default_value = "1e4", value_parser = parse::count_usize)]
    symbols: usize,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Proto {
    Zigbee,
    Wifi,
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long, value_enum)]
    proto: Proto,
    /// File holding the payload as hex text.
    #[arg(long)]
    payload: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    scheme: String,
    /// Export the simplified (real-filter) form when it applies.
    #[arg(long)]
    simplify: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    manifest: PathBuf,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value = "256", value_parser = parse::count_usize)]
    sequences: usize,
    #[arg(long, default_value = "128", value_parser = parse::count_usize)]
    symbols: usize,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scheme: String,
    /// Symbol vectors per run.
    #[arg(long, default_value = "1e5", value_parser = parse::count_usize)]
    symbols: usize,
    #[arg(long, default_value = "5", value_parser = parse::count_usize)]
    repeats: usize,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    use nnmod::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::ChannelMismatch { .. } | E::LengthMismatch(_) | E::DimensionMismatch { .. } => "shape",
                E::NonFinite { .. } => "non-finite",
                E::InvalidLayer(_) | E::InvalidArgument(_) => "invalid-argument",
                E::DegenerateDataset { .. } => "degenerate-dataset",
                E::Diverged { .. } => "diverged",
                E::NoFrame { .. } => "no-frame",
                E::UnknownScheme(_) => "unknown-scheme",
                E::Schema(_) => "schema",
                E::CorruptFile { .. } => "corrupt-file",
                E::Io(_) => "io",
                E::Json(_) => "json",
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
    }
    "usage"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: usage: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {err:#}", error_kind(&err));
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Modulate(a) => modulate(a),
        Command::Learn(a) => learn(a),
        Command::Finetune(a) => finetune(a),
        Command::Ber(a) => ber(a),
        Command::Evm(a) => evm(a),
        Command::Frame(a) => frame(a),
        Command::Export(a) => export(a),
        Command::Import(a) => import(a),
        Command::Dataset(a) => dataset(a),
        Command::Bench(a) => bench(a),
    }
}

fn scheme(id: &str) -> Result<Scheme> {
    Ok(Scheme::from_id(id)?)
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn modulate(a: ModulateArgs) -> Result<()> {
    let s = scheme(&a.scheme)?;
    let bits = match (&a.bits, &a.hex) {
        (Some(b), None) => parse::bit_string(b)?,
        (None, Some(h)) => parse::bytes_to_bits(&parse::hex_bytes(h)?),
        _ => bail!("give exactly one of --bits or --hex"),
    };
    let graph = match &a.manifest {
        Some(p) => read_manifest(p)?.to_graph()?,
        None => s.graph(),
    };
    let frame = s.map_bits(&bits)?;
    let y = graph.modulate(&frame)?;
    write_iq(&a.out, &y, IqFormat::from_path(&a.out))?;
    println!("{} symbol vectors -> {} samples -> {}", frame.num_vectors(), y.len(), a.out.display());
    Ok(())
}

fn history_csv(report: &TrainReport) -> String {
    let mut s = String::from("epoch,mse\n");
    for (i, m) in report.mse_history.iter().enumerate() {
        s.push_str(&format!("{i},{m:e}\n"));
    }
    s
}

fn learn(a: LearnArgs) -> Result<()> {
    let data = read_training_set(&a.data)?;
    let graph = match a.method {
        Method::Ls => fit_least_squares(&data)?,
        Method::Gd => {
            let config = GradientConfig {
                learning_rate: a.lr,
                epochs: a.epochs,
                batch_size: a.batch_size,
                seed: a.seed,
            };
            let (g, report) = fit_gradient(&data, &config)?;
            if let Some(p) = &a.history {
                write_output(p, &history_csv(&report))?;
            }
            g
        }
    };
    let mse = data.mse(&graph)?;
    write_manifest(&a.out, &export_manifest(&graph, &a.name))?;
    println!("fitted {} examples, training mse {mse:e} -> {}", data.len(), a.out.display());
    Ok(())
}

fn front_end_model(spec: &FrontEndSpec, data: &TrainingSet) -> Result<FrontEndModel> {
    Ok(match *spec {
        FrontEndSpec::Identity => FrontEndModel::identity(),
        FrontEndSpec::Rapp { p, sat: Some(sat) } => FrontEndModel::rapp(p, sat)?,
        FrontEndSpec::Rapp { p, sat: None } => {
            let power: f64 = data
                .examples()
                .iter()
                .flat_map(|(_, s)| s.samples())
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                / data.total_samples() as f64;
            FrontEndModel::rapp(p, parse::AUTO_SATURATION_FACTOR * power.sqrt())?
        }
    })
}

fn finetune(a: FinetuneArgs) -> Result<()> {
    let s = scheme(&a.scheme)?;
    let graph = s.graph();
    let data = TrainingSet::generate(&graph, s.constellation(), a.sequences, a.symbols, a.seed)?;
    let fe = front_end_model(&a.fe, &data)?;
    let config = FineTuneConfig {
        learning_rate: a.lr,
        pd_step: a.pd_step,
        epochs: a.epochs,
        batch_size: 0,
        seed: a.seed,
    };
    let (tuned, pd, report) = fine_tune(&graph, &Predistorter::identity(), &fe, &data, &config)?;
    for (i, m) in report.mse_history.iter().enumerate() {
        eprintln!("epoch {i}: mse {m:e}");
    }
    let bits = random_bits(
        &mut seeded(derive_seed(a.seed, &[1])),
        4096 * s.bits_per_vector(),
    );
    let frame = s.map_bits(&bits)?;
    let before = Chain {
        graph: &graph,
        predistorter: None,
        front_end: Some(&fe),
    }
    .evm(&s, &frame, 0.0, 0)?;
    let after = Chain {
        graph: &tuned,
        predistorter: Some(&pd),
        front_end: Some(&fe),
    }
    .evm(&s, &frame, 0.0, 0)?;
    write_manifest(&a.out, &export_manifest(&tuned, s.id()))?;
    if let Some(p) = &a.csv {
        write_output(p, &history_csv(&report))?;
    }
    if let Some(p) = &a.pd_out {
        let coeffs: Vec<[f64; 2]> = pd.coeffs.iter().map(|c| [c.re, c.im]).collect();
        write_output(p, &format!("{}\n", coeffs_json(&coeffs)))?;
    }
    println!("noiseless post-front-end EVM: {before:.3}% without predistortion, {after:.3}% after fine-tuning");
    Ok(())
}

/// `{"c1":[re,im],"c3":[..],"c5":[..]}` with round-trip float formatting.
fn coeffs_json(coeffs: &[[f64; 2]]) -> String {
    let fields: Vec<String> = ["c1", "c3", "c5"]
        .iter()
        .zip(coeffs)
        .map(|(k, c)| format!("\"{k}\":[{:?},{:?}]", c[0], c[1]))
        .collect();
    format!("{{{}}}", fields.join(","))
}

fn ber(a: BerArgs) -> Result<()> {
    let s = scheme(&a.scheme)?;
    let tx = if a.reference {
        Transmitter::Reference
    } else {
        Transmitter::Graph(s.graph())
    };
    let points = ber_sweep_with(&s, &tx, &a.ebn0.0, a.bits, a.seed)?;
    let mut csv = String::from("ebn0_db,ber,ci95,theory\n");
    for p in &points {
        csv.push_str(&format!("{},{:e},{:e},{:e}\n", p.ebn0_db, p.ber, p.ci95_halfwidth, p.theory));
    }
    match &a.csv {
        Some(path) => write_output(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn evm(a: EvmArgs) -> Result<()> {
    let s = scheme(&a.scheme)?;
    let graph = s.graph();
    let bits = random_bits(&mut seeded(derive_seed(a.seed, &[0])), a.symbols * s.bits_per_vector());
    let frame = s.map_bits(&bits)?;
    let clean = graph.modulate(&frame)?;
    let power = clean.mean_power();
    let chain = Chain {
        graph: &graph,
        predistorter: None,
        front_end: None,
    };
    println!("snr_db,evm_percent");
    for (i, &snr) in a.snr.0.iter().enumerate() {
        let var = power / 10f64.powf(snr / 10.0);
        let e = chain.evm(&s, &frame, var, derive_seed(a.seed, &[1, i as u64]))?;
        println!("{snr},{e:.6}");
    }
    Ok(())
}

fn frame(a: FrameArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.payload).with_context(|| format!("reading {}", a.payload.display()))?;
    let payload = parse::hex_bytes(&text)?;
    let y = match a.proto {
        Proto::Zigbee => build_oqpsk_zigbee().modulate_bytes(&ppdu(&payload)?)?,
        Proto::Wifi => {
            let config = WifiFrameConfig::default();
            let bps = config.data_constellation.bits_per_symbol();
            let mut bits = parse::bytes_to_bits(&payload);
            let per_symbol = DATA_SUBCARRIERS * bps;
            bits.resize(bits.len().div_ceil(per_symbol).max(1) * per_symbol, 0);
            // SIG: payload length in bytes, 12 bits LSB first, zero padded
            let mut sig: Vec<u8> = (0..12).map(|i| ((payload.len() >> i) & 1) as u8).collect();
            sig.resize(DATA_SUBCARRIERS, 0);
            let data = config.data_constellation.map_bits_to_symbols(&bits)?;
            build_wifi_frame(&config, &sig, &data)?
        }
    };
    write_iq(&a.out, &y, IqFormat::from_path(&a.out))?;
    println!("{} payload bytes -> {} samples -> {}", payload.len(), y.len(), a.out.display());
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let s = scheme(&a.scheme)?;
    let graph = if a.simplify { s.graph().simplify() } else { s.graph() };
    let m = export_manifest(&graph, s.id());
    write_manifest(&a.out, &m)?;
    let ops: Vec<&str> = m.graph.iter().map(|n| n.op.as_str()).collect();
    println!("exported {} [{}] -> {}", s.id(), ops.join(", "), a.out.display());
    Ok(())
}

fn import(a: ImportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let m = ModelManifest::from_json(&text)?;
    let graph: SynthGraph = m.to_graph()?;
    let again = export_manifest(&graph, &m.metadata.scheme).to_json();
    if again != text {
        bail!("re-exported manifest differs from {}", a.manifest.display());
    }
    println!(
        "round trip ok: {} (N={}, L={}, K={}, {} nodes)",
        m.metadata.scheme,
        graph.symbol_dimension(),
        graph.samples_per_symbol(),
        graph.kernel_len(),
        m.graph.len()
    );
    Ok(())
}

fn dataset(a: DatasetArgs) -> Result<()> {
    let s = scheme(&a.scheme)?;
    let data = TrainingSet::generate(&s.graph(), s.constellation(), a.sequences, a.symbols, a.seed)?;
    write_training_set(&a.out, &data)?;
    println!("{} sequences x {} symbols -> {}", a.sequences, a.symbols, a.out.display());
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let s = scheme(&a.scheme)?;
    let graph = s.graph();
    let bits = random_bits(&mut seeded(a.seed), a.symbols * s.bits_per_vector());
    let frame = s.map_bits(&bits)?;
    let mut best = f64::INFINITY;
    let mut samples = 0;
    for _ in 0..a.repeats.max(1) {
        let t = Instant::now();
        samples = graph.modulate(&frame)?.len();
        best = best.min(t.elapsed().as_secs_f64());
    }
    println!(
        "{}: {} samples in {:.6} s (best of {}) = {:.2} Msamples/s",
        s.id(),
        samples,
        best,
        a.repeats.max(1),
        samples as f64 / best / 1e6
    );
    Ok(())
}
