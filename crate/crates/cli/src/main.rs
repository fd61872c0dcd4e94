//! `ans`: encode and decode files, generate synthetic sources, run length
//! benchmarks and dump tANS tables.
//!
//! Encoded files are a 32-byte presence bitmap of the input's byte alphabet
//! followed by a container. Symbol `i` is the `i`-th present byte in
//! increasing order.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ans_core::abs::AbsParams;
use ans_core::analysis::{self, BenchCell, CodecConfig, LengthReport};
use ans_core::container::Encoded;
use ans_core::model::{self, QuantizedModel, SourceDistribution};
use ans_core::source::{SplitMix64, SymbolSampler};
use ans_core::stream::StreamParams;
use ans_core::tans::TansTables;
use ans_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

const EXIT_IO: u8 = 1;
const EXIT_CORRUPT: u8 = 3;
const EXIT_PARAMS: u8 = 4;
const EXIT_BOUND: u8 = 5;

#[derive(Parser)]
#[command(name = "ans", version, about = "Asymmetric numeral systems codecs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a file of bytes into a container.
    Encode(EncodeArgs),
    /// Decode a container back into the original bytes.
    Decode(DecodeArgs),
    /// Write T i.i.d. bytes 0..k-1 drawn with the given weights.
    Gen(GenArgs),
    /// Measure average code lengths against their bounds; CSV output.
    Bench(BenchArgs),
    /// Print the tANS tables of a model.
    Tables(TablesArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Codec {
    Uabs,
    Rans,
    RansStream,
    Tans,
}

#[derive(Args, Clone)]
struct CodecArgs {
    /// Precision bits R, N = 2^R.
    #[arg(long = "R", default_value_t = 12)]
    r: u32,
    /// State bits r_a of streaming rANS.
    #[arg(long, default_value_t = 32)]
    ra: u32,
    /// Word bits r_b of streaming rANS.
    #[arg(long, default_value_t = 16)]
    rb: u32,
    /// uABS probability of symbol 1, as num/den.
    #[arg(long)]
    p1: Option<String>,
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "tans")]
    codec: Codec,
    #[command(flatten)]
    params: CodecArgs,
    /// Model weights for bytes 0..k-1 instead of a frequency scan.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<String>>,
    /// Output path; defaults to INPUT.ans.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    /// Output path; defaults to INPUT without `.ans`, else INPUT.out.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<String>,
    #[arg(long = "T")]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Codecs to sweep; the default suite runs when neither this nor
    /// --weights is given.
    #[arg(long, value_enum, value_delimiter = ',')]
    codec: Vec<Codec>,
    /// Source weights; repeat for several distributions.
    #[arg(long)]
    weights: Vec<String>,
    #[arg(long = "T", value_delimiter = ',', default_value = "10000")]
    t: Vec<usize>,
    #[command(flatten)]
    params: CodecArgs,
    /// rANS initial state x_T; defaults to 16·N.
    #[arg(long = "A")]
    a: Option<u64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV path; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<String>,
    #[arg(long = "R", default_value_t = 4)]
    r: u32,
}

#[derive(Debug)]
enum Failure {
    Io(PathBuf, io::Error),
    Corrupt(Error),
    Params(String),
    Bound(usize),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(path, e) => write!(f, "{}: {e}", path.display()),
            Self::Corrupt(e) => write!(f, "corrupt input: {e}"),
            Self::Params(msg) => write!(f, "invalid parameters: {msg}"),
            Self::Bound(n) => write!(f, "{n} cells exceeded their bound"),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Io(..) => EXIT_IO,
            Self::Corrupt(_) => EXIT_CORRUPT,
            Self::Params(_) => EXIT_PARAMS,
            Self::Bound(_) => EXIT_BOUND,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Params(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn parse_weights(list: &[String]) -> CliResult<SourceDistribution> {
    let weights = list
        .iter()
        .map(|w| model::parse_rational(w.trim()))
        .collect::<ans_core::Result<Vec<_>>>()?;
    Ok(SourceDistribution::new(&weights)?)
}

fn parse_p1(text: &str) -> CliResult<Ratio<u64>> {
    let (num, den) = text.split_once('/').unwrap_or((text, "1"));
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| Failure::Params(format!("p1 must be num/den, got {text:?}")))
    };
    let params = AbsParams::new(parse(num)?, parse(den)?)?;
    Ok(params.p1())
}

/// Byte alphabet as a presence bitmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Alphabet([u8; 32]);

impl Alphabet {
    fn from_bytes(bytes: impl IntoIterator<Item = u8>) -> Self {
        let mut map = [0u8; 32];
        for b in bytes {
            map[usize::from(b / 8)] |= 1 << (b % 8);
        }
        Self(map)
    }

    fn contains(&self, b: u8) -> bool {
        self.0[usize::from(b / 8)] & (1 << (b % 8)) != 0
    }

    fn symbols(&self) -> Vec<u8> {
        (0..=255u8).filter(|&b| self.contains(b)).collect()
    }

    /// Byte to symbol index.
    fn index(&self) -> [usize; 256] {
        let mut index = [usize::MAX; 256];
        for (i, b) in self.symbols().into_iter().enumerate() {
            index[usize::from(b)] = i;
        }
        index
    }
}

/// Alphabet and weights from the input frequencies. Inputs with fewer than
/// two distinct bytes are padded with weight-one bytes so the model is valid.
fn scan(input: &[u8]) -> (Alphabet, Vec<u64>) {
    let mut freq = [0u64; 256];
    for &b in input {
        freq[usize::from(b)] += 1;
    }
    let mut present: Vec<u8> = (0..=255u8).filter(|&b| freq[usize::from(b)] > 0).collect();
    for b in 0..=255u8 {
        if present.len() >= 2 {
            break;
        }
        if freq[usize::from(b)] == 0 {
            freq[usize::from(b)] = 1;
            present.push(b);
        }
    }
    let alphabet = Alphabet::from_bytes(present);
    let weights = alphabet
        .symbols()
        .iter()
        .map(|&b| freq[usize::from(b)])
        .collect();
    (alphabet, weights)
}

fn stream_params(args: &CodecArgs) -> CliResult<StreamParams> {
    Ok(StreamParams::new(args.r, args.ra, args.rb)?)
}

fn cmd_encode(args: EncodeArgs) -> CliResult<()> {
    let input = read(&args.input)?;
    let (alphabet, dist) = match &args.weights {
        Some(w) => {
            let dist = parse_weights(w)?;
            if dist.len() > 256 {
                return Err(Failure::Params("at most 256 weights".to_string()));
            }
            let alphabet = Alphabet::from_bytes(0..dist.len() as u8);
            if let Some(&b) = input.iter().find(|&&b| !alphabet.contains(b)) {
                return Err(Failure::Params(format!(
                    "input byte {b} outside the {}-symbol alphabet",
                    dist.len()
                )));
            }
            (alphabet, dist)
        }
        None => {
            let (alphabet, weights) = scan(&input);
            (alphabet, SourceDistribution::from_weights(&weights)?)
        }
    };
    let index = alphabet.index();
    let symbols: Vec<usize> = input.iter().map(|&b| index[usize::from(b)]).collect();

    let (encoded, model) = match args.codec {
        Codec::Uabs => {
            if dist.len() != 2 {
                return Err(Failure::Params(format!(
                    "uABS needs exactly two symbols, found {}",
                    dist.len()
                )));
            }
            let p1 = match &args.params.p1 {
                Some(text) => parse_p1(text)?,
                None => {
                    let p = dist.prob(1);
                    let (num, den) = (p.numer().try_into(), p.denom().try_into());
                    match (num, den) {
                        (Ok(num), Ok(den)) => Ratio::new(num, den),
                        _ => return Err(Failure::Params("p1 does not fit u64".to_string())),
                    }
                }
            };
            let params = AbsParams::new(*p1.numer(), *p1.denom())?;
            let bits: Vec<bool> = symbols.iter().map(|&s| s == 1).collect();
            (Encoded::encode_uabs(params, &bits), None)
        }
        Codec::Rans => {
            let m = model::quantize(&dist, args.params.r)?;
            (Encoded::encode_rans(&m, &symbols)?, Some(m))
        }
        Codec::RansStream => {
            let params = stream_params(&args.params)?;
            let m = model::quantize(&dist, args.params.r)?;
            (Encoded::encode_stream(&m, params, &symbols)?, Some(m))
        }
        Codec::Tans => {
            let m = model::quantize(&dist, args.params.r)?;
            (Encoded::encode_tans(&m, &symbols)?, Some(m))
        }
    };
    let container = encoded.to_bytes()?;
    let mut out = alphabet.0.to_vec();
    out.extend_from_slice(&container);
    let path = args.out.unwrap_or_else(|| {
        let mut p = args.input.clone().into_os_string();
        p.push(".ans");
        p.into()
    });
    write(&path, &out)?;

    let bits = codeword_bits(&encoded);
    let t = symbols.len().max(1) as f64;
    let h = model::entropy(&dist);
    let d = match &model {
        Some(m) => model::kl_divergence(&dist, m)?,
        None => 0.0,
    };
    eprintln!(
        "L={:.6} H={h:.6} D={d:.6} T={} bytes={}",
        bits / t,
        symbols.len(),
        out.len()
    );
    Ok(())
}

fn codeword_bits(encoded: &Encoded) -> f64 {
    match encoded {
        Encoded::Uabs { x0, .. } | Encoded::Rans { x0, .. } => analysis::lg_big(x0),
        Encoded::Stream {
            params, codeword, ..
        } => codeword.bit_length(params),
        Encoded::Tans { model, stream } => {
            f64::from(model.precision_bits().unwrap_or(0)) + stream.bit_len as f64
        }
    }
}

fn cmd_decode(args: DecodeArgs) -> CliResult<()> {
    let bytes = read(&args.input)?;
    if bytes.len() < 32 {
        return Err(Failure::Corrupt(Error::TruncatedPayload));
    }
    let alphabet = Alphabet(bytes[..32].try_into().unwrap());
    let symbols_of = alphabet.symbols();
    let encoded = Encoded::from_bytes(&bytes[32..]).map_err(Failure::Corrupt)?;
    let expected = match &encoded {
        Encoded::Uabs { .. } => 2,
        Encoded::Rans { model, .. } | Encoded::Stream { model, .. } | Encoded::Tans { model, .. } => {
            model.len()
        }
    };
    if symbols_of.len() != expected {
        return Err(Failure::Corrupt(Error::AlphabetMismatch(
            symbols_of.len(),
            expected,
        )));
    }
    let symbols = encoded.decode().map_err(Failure::Corrupt)?;
    let out: Vec<u8> = symbols.into_iter().map(|s| symbols_of[s]).collect();
    let path = args.out.unwrap_or_else(|| {
        let name = args.input.to_string_lossy();
        match name.strip_suffix(".ans") {
            Some(stem) if !stem.is_empty() => PathBuf::from(stem),
            _ => PathBuf::from(format!("{name}.out")),
        }
    });
    write(&path, &out)
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let dist = parse_weights(&args.weights)?;
    if dist.len() > 256 {
        return Err(Failure::Params("at most 256 weights".to_string()));
    }
    let mut rng = SplitMix64::new(args.seed);
    let out: Vec<u8> = SymbolSampler::new(&dist)
        .sequence(&mut rng, args.t)
        .into_iter()
        .map(|s| s as u8)
        .collect();
    write(&args.out, &out)
}

fn bench_cells(args: &BenchArgs) -> CliResult<Vec<BenchCell>> {
    if args.codec.is_empty() && args.weights.is_empty() {
        return Ok(analysis::default_suite(args.seed, args.trials)?);
    }
    let codecs = if args.codec.is_empty() {
        vec![Codec::Rans, Codec::RansStream, Codec::Tans]
    } else {
        args.codec.clone()
    };
    let dists = if args.weights.is_empty() {
        vec![SourceDistribution::from_weights(&[3, 1])?]
    } else {
        args.weights
            .iter()
            .map(|w| parse_weights(&w.split(',').map(str::to_string).collect::<Vec<_>>()))
            .collect::<CliResult<Vec<_>>>()?
    };
    let mut cells = Vec::new();
    for dist in &dists {
        for &codec in &codecs {
            let config = match codec {
                Codec::Uabs => {
                    let p1 = match &args.params.p1 {
                        Some(text) => parse_p1(text)?,
                        None => {
                            if dist.len() != 2 {
                                return Err(Failure::Params(
                                    "uABS needs a two-symbol distribution".to_string(),
                                ));
                            }
                            let p = dist.prob(1);
                            match (p.numer().try_into(), p.denom().try_into()) {
                                (Ok(n), Ok(d)) => Ratio::new(n, d),
                                _ => return Err(Failure::Params("p1 does not fit u64".to_string())),
                            }
                        }
                    };
                    CodecConfig::Uabs { p1 }
                }
                Codec::Rans => {
                    let model = model::quantize(dist, args.params.r)?;
                    let initial = args.a.unwrap_or(16 * model.total());
                    CodecConfig::Rans { model, initial }
                }
                Codec::RansStream => CodecConfig::Stream {
                    model: model::quantize(dist, args.params.r)?,
                    params: stream_params(&args.params)?,
                },
                Codec::Tans => CodecConfig::Tans {
                    model: model::quantize(dist, args.params.r)?,
                },
            };
            for &t in &args.t {
                cells.push(BenchCell {
                    config: config.clone(),
                    dist: dist.clone(),
                    t,
                    trials: args.trials,
                    seed: args.seed,
                });
            }
        }
    }
    Ok(cells)
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let cells = bench_cells(&args)?;
    let reports = cells
        .iter()
        .map(BenchCell::run)
        .collect::<ans_core::Result<Vec<LengthReport>>>()?;
    let mut csv = Vec::new();
    analysis::write_csv(&reports, &mut csv).expect("writing to memory");
    match &args.out {
        Some(path) => write(path, &csv)?,
        None => io::stdout()
            .write_all(&csv)
            .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e))?,
    }
    let violations = reports
        .iter()
        .filter(|r| r.margin().is_some_and(|m| m <= 0.0))
        .count();
    if violations > 0 {
        return Err(Failure::Bound(violations));
    }
    Ok(())
}

fn cmd_tables(args: TablesArgs) -> CliResult<()> {
    let dist = parse_weights(&args.weights)?;
    let m: QuantizedModel = model::quantize(&dist, args.r)?;
    let tables = TansTables::build(&m)?;
    let mut out = io::stdout().lock();
    let mut emit = || -> io::Result<()> {
        writeln!(out, "N={} counts={:?}", tables.size(), m.counts())?;
        writeln!(out, "x\tsymbol\ty\tnbits")?;
        for x in tables.size()..2 * tables.size() {
            let e = tables.decode_entry(x);
            writeln!(out, "{x}\t{}\t{}\t{}", e.symbol, e.y, e.nbits)?;
        }
        for s in 0..m.len() {
            writeln!(out, "X_{s} = {:?}", tables.states_of(s))?;
        }
        Ok(())
    };
    emit().map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Tables(a) => cmd_tables(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ans: {e}");
            ExitCode::from(e.code())
        }
    }
}
