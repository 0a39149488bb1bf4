use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use multiset_ans::bench::{self, BenchConfig};
use multiset_ans::container::{empirical_categorical, CodecParams, Payload};
use multiset_ans::nested::{self, PairCodec};
use multiset_ans::symbol::DEFAULT_PRECISION_BITS;
use multiset_ans::{
    info_content, ingest_json, nested_savings_bound, ByteStringCodec, Container, Contents,
    Multiset,
};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

#[derive(Parser)]
#[command(name = "msz", version, about = "Order-free compression of multisets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CodecKind {
    /// Uniform bytes with a length code.
    Bytes,
    /// Empirical distribution over the distinct inputs, stored in the header.
    Categorical,
}

#[derive(Subcommand)]
enum Command {
    /// Compress files (each file is one element) or, with --nested, a JSON
    /// array of flat objects.
    Compress {
        /// Files or directories. Directories contribute every regular file
        /// below them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "bytes")]
        codec: CodecKind,
        /// Categorical precision in bits.
        #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
        precision: u32,
        /// Longest byte string the bytes codec accepts. Defaults to the
        /// longest input.
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        nested: bool,
    },
    /// Restore a container into a directory.
    Decompress {
        container: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print a container's header.
    Info { container: PathBuf },
    /// Synthetic Dirichlet-source benchmark.
    BenchSynthetic {
        #[arg(long, default_value_t = 512)]
        unique: u64,
        /// Multiset sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1024u64, 2048, 4096, 8192, 16384])]
        sizes: Vec<u64>,
        /// Alphabet sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1024u64, 16384, 262144])]
        alphabets: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = bench::BENCH_PRECISION_BITS)]
        precision: u32,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Nested benchmark over growing prefixes of a JSON array of flat
    /// objects. Without a file, a seeded synthetic user corpus is used.
    BenchJson {
        json: Option<PathBuf>,
        /// Size of the synthetic corpus when no file is given.
        #[arg(long, default_value_t = 1000)]
        records: usize,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 255)]
        max_len: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in WalkDir::new(path) {
        let entry = entry.with_context(|| format!("cannot read {}", path.display()))?;
        if !entry.file_type().is_dir() {
            out.push(entry.into_path());
        }
    }
    Ok(())
}

fn compress(
    inputs: &[PathBuf],
    output: &Path,
    codec: CodecKind,
    precision: u32,
    max_len: Option<usize>,
    nested: bool,
) -> Result<()> {
    let container = if nested {
        if codec != CodecKind::Bytes {
            bail!("--nested supports only the bytes codec");
        }
        let [input] = inputs else {
            bail!("--nested takes exactly one JSON file");
        };
        let text = fs::read(input).with_context(|| format!("cannot read {}", input.display()))?;
        let nm = ingest_json(&text).with_context(|| format!("cannot ingest {}", input.display()))?;
        let longest = nm
            .outer()
            .iter()
            .flat_map(|(r, _)| r.pairs().iter().map(|(p, _)| p.key.len().max(p.value.len())))
            .max()
            .unwrap_or(0);
        let bytes = ByteStringCodec::new(max_len.unwrap_or(longest))?;
        let container = Container::compress_nested(&nm, bytes)?;
        let sequence = nested::encode_nested_sequence(&nm, &PairCodec::new(bytes))?;
        report(&container, sequence.length_bits(), "bound_bits", nested_savings_bound(&nm));
        container
    } else {
        let mut files = Vec::new();
        for input in inputs {
            collect_files(input, &mut files)?;
        }
        let mut elements = Vec::with_capacity(files.len());
        for file in &files {
            elements.push(fs::read(file).with_context(|| format!("cannot read {}", file.display()))?);
        }
        let longest = elements.iter().map(Vec::len).max().unwrap_or(0);
        let multiset: Multiset<Vec<u8>> = elements.into_iter().collect();
        let params = match codec {
            CodecKind::Bytes => CodecParams::Bytes(ByteStringCodec::new(max_len.unwrap_or(longest))?),
            CodecKind::Categorical => CodecParams::Categorical(empirical_categorical(&multiset, precision)?),
        };
        let (info, sequence) = match &params {
            CodecParams::Bytes(b) => (
                info_content(&multiset, b)?,
                multiset_ans::codec::encode_sequence(multiset.elements(), b)?,
            ),
            CodecParams::Categorical(d) => (
                info_content(&multiset, d)?,
                multiset_ans::codec::encode_sequence(multiset.elements(), d)?,
            ),
        };
        let container = Container::compress_flat(&multiset, params)?;
        report(&container, sequence.length_bits(), "info_content_bits", info);
        container
    };
    fs::write(output, container.to_bytes())
        .with_context(|| format!("cannot write {}", output.display()))?;
    Ok(())
}

fn report(container: &Container, sequence_bits: u64, ideal_name: &str, ideal: f64) {
    let compressed = container.state.length_bits();
    println!("elements: {}", container.payload.len());
    println!("compressed_bits: {compressed}");
    println!("{ideal_name}: {ideal:.1}");
    println!("sequence_bits: {sequence_bits}");
    println!("savings_bits: {}", sequence_bits as i64 - compressed as i64);
}

fn read_container(path: &Path) -> Result<Container> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Container::from_bytes(&bytes).with_context(|| format!("invalid container {}", path.display()))
}

fn decompress(path: &Path, output: &Path) -> Result<()> {
    let container = read_container(path)?;
    let (contents, clean) = container.decompress()?;
    if !clean {
        eprintln!("warning: residual state is not the initial state");
    }
    if output.exists() && fs::read_dir(output)?.next().is_some() {
        bail!("output directory {} is not empty", output.display());
    }
    fs::create_dir_all(output).with_context(|| format!("cannot create {}", output.display()))?;
    match contents {
        Contents::Flat(multiset) => {
            let mut seen: HashMap<String, u64> = HashMap::new();
            for element in multiset.elements() {
                let digest = hex::encode(Sha256::digest(element));
                let k = seen.entry(digest.clone()).or_insert(0);
                let name = if *k == 0 { digest } else { format!("{digest}_{k}") };
                *k += 1;
                fs::write(output.join(name), element)?;
            }
        }
        Contents::Nested(nm) => {
            fs::write(output.join("records.json"), nested::records_to_json(&nm))?;
        }
    }
    Ok(())
}

fn info(path: &Path) -> Result<()> {
    let container = read_container(path)?;
    println!("codec: {}", container.codec.name());
    match &container.codec {
        CodecParams::Bytes(b) => println!("max_len: {}", b.max_len()),
        CodecParams::Categorical(d) => {
            println!("precision_bits: {}", d.precision_bits());
            println!("alphabet_size: {}", d.alphabet().len());
        }
    }
    match &container.payload {
        Payload::Flat { size } => {
            println!("kind: flat");
            println!("elements: {size}");
        }
        Payload::Nested { sizes } => {
            println!("kind: nested");
            println!("records: {}", sizes.len());
            println!("pairs: {}", sizes.iter().sum::<u64>());
        }
    }
    println!("state_bits: {}", container.state.length_bits());
    Ok(())
}

fn write_csv<T: serde::Serialize>(rows: &[T], path: Option<&Path>) -> Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compress {
            inputs,
            output,
            codec,
            precision,
            max_len,
            nested,
        } => compress(&inputs, &output, codec, precision, max_len, nested),
        Command::Decompress { container, output } => decompress(&container, &output),
        Command::Info { container } => info(&container),
        Command::BenchSynthetic {
            unique,
            sizes,
            alphabets,
            reps,
            seed,
            precision,
            csv,
        } => {
            let cfg = BenchConfig {
                unique,
                multiset_sizes: sizes,
                alphabet_sizes: alphabets,
                repetitions: reps,
                seed,
                precision_bits: precision,
            };
            write_csv(&bench::run_synthetic(&cfg)?, csv.as_deref())
        }
        Command::BenchJson {
            json,
            records,
            reps,
            seed,
            max_len,
            csv,
        } => {
            let parsed = match json {
                Some(path) => {
                    let text = fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
                    nested::parse_json_records(&text)?
                }
                None => bench::synthetic_user_records(records, seed),
            };
            let rows = bench::run_json(&parsed, reps, ByteStringCodec::new(max_len)?)?;
            write_csv(&rows, csv.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
