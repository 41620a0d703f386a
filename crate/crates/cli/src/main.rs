//! `surya`: generate data, train, evaluate, predict, serve and inspect models.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use surya_core::data::{gen_synthetic, load_dataset, read_recording, split, write_dataset, LabeledDataset};
use surya_core::engine::{serve_stdio, Server, SessionConfig};
use surya_core::metrics::{accuracy, confusion, per_class_stats};
use surya_core::nn::{load_model, save_model, Network};
use surya_core::train::{argmax, train, TrainConfig};
use surya_core::{ClassLabel, Error, NUM_CLASSES};

const CURVES_FILE: &str = "curves.csv";
const CONFUSION_FILE: &str = "confusion.csv";
const PER_CLASS_FILE: &str = "per_class.json";
const ACCURACY_FILE: &str = "accuracy.txt";

#[derive(Parser, Debug)]
#[command(name = "surya", version, about = "Surya Namaskar pose-sequence classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic labeled dataset (SNK1 files plus manifest.json).
    GenSynthetic {
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        per_class: usize,
        /// Standard deviation of the Gaussian noise added to each value.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Train the canonical network; writes the model and curves.csv beside it.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Model file to write.
        #[arg(long, default_value = "model.snkm")]
        out: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
    },
    /// Score a model on the train, test and full partitions of a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Directory for confusion.csv, per_class.json and accuracy.txt.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// Classify sequence files; `--data` may be a file or a directory.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Run the streaming engine on a socket or on stdin/stdout.
    Serve {
        #[arg(long)]
        model: PathBuf,
        /// Address to listen on, e.g. 127.0.0.1:7700.
        #[arg(long, required_unless_present = "stdio", conflicts_with = "stdio")]
        listen: Option<String>,
        /// Serve a single session over stdin/stdout.
        #[arg(long)]
        stdio: bool,
        /// Minimum top-class probability for a stable prediction.
        #[arg(long, default_value_t = 0.7)]
        tau: f32,
        /// Consecutive agreeing predictions required for stability.
        #[arg(long, default_value_t = 5)]
        stability_n: usize,
    },
    /// Print the layer table and parameter counts of a model file.
    InspectModel {
        #[arg(long)]
        model: PathBuf,
    },
}

/// Train/test split parameters; eval must use the same values as train.
#[derive(Args, Debug, Clone, Copy)]
struct SplitArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.25)]
    test_fraction: f64,
}

/// Exit status plus message.
struct Failure {
    code: u8,
    message: String,
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Config(_) => EXIT_USAGE,
            _ if e.is_data_error() => EXIT_DATA,
            _ => EXIT_RUNTIME,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: EXIT_USAGE, message }
}

fn runtime(message: String) -> Failure {
    Failure { code: EXIT_RUNTIME, message }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("{}: {e}", path.display()),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    info!("resolved config: {:?}", cli.command);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenSynthetic { out, per_class, noise, seed } => {
            let data = gen_synthetic(per_class, noise, seed)?;
            write_dataset(&out, &data)?;
            println!("wrote {} sequences to {}", data.len(), out.display());
            Ok(())
        }
        Command::Train { data, out, split, epochs, lr, batch_size } => {
            let config = TrainConfig {
                epochs,
                learning_rate: lr,
                batch_size,
                seed: split.seed,
                test_fraction: split.test_fraction,
                ..TrainConfig::default()
            };
            config.validate()?;
            let dataset = load_dataset(&data)?;
            let (net, curve) = train(&dataset, &config)?;
            let dir = out.parent().unwrap_or(Path::new(""));
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)
                    .map_err(|e| Failure { code: EXIT_DATA, message: format!("{}: {e}", dir.display()) })?;
            }
            save_model(&net, &out)?;
            let curves = dir.join(CURVES_FILE);
            curve.write_csv(&curves)?;
            if let Some(last) = curve.last() {
                println!(
                    "epoch {}: train loss {:.6}, train accuracy {:.3}, test accuracy {}",
                    last.epoch,
                    last.train_loss,
                    last.train_accuracy,
                    last.val_accuracy.map_or("n/a".into(), |a| format!("{a:.3}"))
                );
            }
            println!("wrote {} and {}", out.display(), curves.display());
            Ok(())
        }
        Command::Eval { model, data, out, split: args } => eval(&model, &data, &out, args),
        Command::Predict { model, data } => predict(&model, &data),
        Command::Serve { model, listen, stdio, tau, stability_n } => {
            let net = load_model(&model)?;
            let config = SessionConfig { tau, stability_n, ..SessionConfig::default() };
            config.validate()?;
            if stdio {
                let summary = serve_stdio(&net, &config)?;
                info!("session ended: {summary:?}");
                return Ok(());
            }
            let addr = listen.expect("clap requires --listen without --stdio");
            let server = Server::bind(addr.as_str(), net, config).map_err(|e| match e {
                Error::Io(io) => runtime(format!("cannot listen on {addr}: {io}")),
                other => other.into(),
            })?;
            server.run().map_err(|e| runtime(e.to_string()))
        }
        Command::InspectModel { model } => {
            let net = load_model(&model)?;
            println!("{}", net.param_count());
            println!(
                "canonical architecture: {}",
                if net.is_canonical() { "yes" } else { "no" }
            );
            Ok(())
        }
    }
}

fn predict_labels(net: &Network<f32>, data: &LabeledDataset) -> Result<Vec<usize>, Failure> {
    data.samples()
        .iter()
        .map(|s| Ok(argmax(&net.forward(s.sequence.values())?)))
        .collect()
}

fn eval(model: &Path, data: &Path, out: &Path, args: SplitArgs) -> Result<(), Failure> {
    if !(args.test_fraction > 0.0 && args.test_fraction < 1.0) {
        return Err(usage(format!("--test-fraction {} must be in (0, 1)", args.test_fraction)));
    }
    let net = load_model(model)?;
    let dataset = load_dataset(data)?;
    if dataset.shape() != Some((net.seq_len(), net.input_dim())) {
        return Err(Failure {
            code: EXIT_DATA,
            message: format!(
                "{}: sequences are {:?}, model {} expects {}x{}",
                data.display(),
                dataset.shape(),
                model.display(),
                net.seq_len(),
                net.input_dim()
            ),
        });
    }

    let mut partitions = Vec::new();
    let scored = match split(&dataset, args.test_fraction, args.seed) {
        Ok((train_part, test_part)) => {
            partitions.push(("train", train_part));
            partitions.push(("test", test_part.clone()));
            test_part
        }
        Err(e) => {
            warn!("cannot split {}: {e}; reporting the full dataset only", data.display());
            dataset.clone()
        }
    };
    partitions.push(("all", dataset));

    let mut report = String::new();
    for (name, part) in &partitions {
        let truth: Vec<usize> = part.labels().iter().map(|l| l.index()).collect();
        let acc = accuracy(&truth, &predict_labels(&net, part)?)?;
        writeln!(report, "{name} accuracy {acc:.3} ({} sequences)", part.len()).unwrap();
    }
    print!("{report}");

    let truth: Vec<usize> = scored.labels().iter().map(|l| l.index()).collect();
    let cm = confusion(&truth, &predict_labels(&net, &scored)?, NUM_CLASSES)?;
    fs::create_dir_all(out).map_err(|e| Failure { code: EXIT_DATA, message: format!("{}: {e}", out.display()) })?;
    write_file(&out.join(CONFUSION_FILE), &cm.to_csv())?;
    write_file(&out.join(PER_CLASS_FILE), &per_class_stats(&cm).to_json())?;
    write_file(&out.join(ACCURACY_FILE), &report)?;
    Ok(())
}

fn sequence_paths(root: &Path) -> Result<Vec<PathBuf>, Failure> {
    let io_err = |p: &Path, e: std::io::Error| Failure { code: EXIT_DATA, message: format!("{}: {e}", p.display()) };
    if root.is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut found = Vec::new();
    let mut pending = vec![root.to_path_buf()];
    while let Some(dir) = pending.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| io_err(&dir, e))? {
            let path = entry.map_err(|e| io_err(&dir, e))?.path();
            if path.is_dir() {
                pending.push(path);
            } else if path.extension().is_some_and(|e| e == "snk") {
                found.push(path);
            }
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(Failure { code: EXIT_DATA, message: format!("{}: no .snk files", root.display()) });
    }
    Ok(found)
}

fn predict(model: &Path, data: &Path) -> Result<(), Failure> {
    let net = load_model(model)?;
    println!("path\tlabel\t{}", ClassLabel::all().map(|c| c.name().to_owned()).collect::<Vec<_>>().join("\t"));
    for path in sequence_paths(data)? {
        let record = read_recording(&path)?;
        if record.sequence.shape() != (net.seq_len(), net.input_dim()) {
            return Err(Failure {
                code: EXIT_DATA,
                message: format!(
                    "{}: sequence is {:?}, model expects {}x{}",
                    path.display(),
                    record.sequence.shape(),
                    net.seq_len(),
                    net.input_dim()
                ),
            });
        }
        let probs = net.forward(record.sequence.values())?;
        let label = ClassLabel::new(argmax(&probs))?;
        let row: Vec<String> = probs.iter().map(|p| format!("{p:.4}")).collect();
        println!("{}\t{}\t{}", path.display(), label, row.join("\t"));
    }
    Ok(())
}
