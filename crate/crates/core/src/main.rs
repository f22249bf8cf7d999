use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use sugaman::config::Config;
use sugaman::decor::{canonical_library, SignatureLibrary};
use sugaman::grammar::{self, GD_HEADER, NV_HEADER};
use sugaman::lofd::{self, ClassifierKind, ClassifierParams, RoomClassifier, N_LABELS};
use sugaman::metrics::{evaluate_corpus, parse_reference_blocks};
use sugaman::model::RoomLabel;
use sugaman::navigation::{render_overlay, save_overlay};
use sugaman::pipeline::analyze;
use sugaman::raster;
use sugaman::synth::{generate_corpus, read_split};

#[derive(Parser)]
#[command(name = "sugaman", version, about = "Describe floor-plan images in words")]
struct Cli {
    /// Configuration file (defaults to $SUGAMAN_CONFIG when set).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe one plan image.
    Describe {
        image: PathBuf,
        /// Trained room classifier.
        #[arg(long)]
        model: PathBuf,
        /// Directory receiving <name>.txt and <name>.xml.
        #[arg(long)]
        out: Option<PathBuf>,
        /// PNG with the routes drawn over the plan.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Train a room classifier on a corpus's features.csv and split.txt.
    Train {
        corpus: PathBuf,
        /// ovo or mlp (defaults to the config's classifier).
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the model (defaults to <corpus>/model.txt).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score candidate descriptions against reference descriptions.
    Eval {
        candidates: PathBuf,
        references: PathBuf,
        /// Also write the table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    Synth {
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Error categories mapped to exit codes 2 and 1.
enum Failure {
    Input(anyhow::Error),
    Pipeline(anyhow::Error),
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn pipeline(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Pipeline(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(input)
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())).map_err(pipeline)
}

fn load_config(path: Option<PathBuf>) -> Result<Config, Failure> {
    let path = path.or_else(|| std::env::var_os("SUGAMAN_CONFIG").filter(|v| !v.is_empty()).map(PathBuf::from));
    match path {
        Some(p) => Config::load(&p).with_context(|| format!("config {}", p.display())).map_err(input),
        None => Ok(Config::default()),
    }
}

fn library(cfg: &Config) -> Result<SignatureLibrary, Failure> {
    match &cfg.signature_library {
        Some(p) => SignatureLibrary::from_text(&read(p)?).with_context(|| format!("signature library {}", p.display())).map_err(input),
        None => Ok(canonical_library()),
    }
}

fn describe(cfg: &Config, image: &Path, model: &Path, out: Option<&Path>, overlay: Option<&Path>) -> Result<(), Failure> {
    let classifier = RoomClassifier::from_text(&read(model)?).with_context(|| format!("model {}", model.display())).map_err(input)?;
    let lib = library(cfg)?;
    let gray = raster::load_png(image).with_context(|| format!("cannot load {}", image.display())).map_err(input)?;
    let plan = raster::binarize(&gray, cfg.threshold).map_err(input)?;
    let analysis = analyze(&plan, &classifier, &lib, cfg).with_context(|| image.display().to_string()).map_err(pipeline)?;
    let text = grammar::render(&analysis.description);
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).map_err(pipeline)?;
        let stem = image.file_stem().and_then(|s| s.to_str()).unwrap_or("plan");
        write(&dir.join(format!("{stem}.txt")), &text)?;
        write(&dir.join(format!("{stem}.xml")), analysis.model.to_xml().map_err(pipeline)?)?;
    }
    if let Some(p) = overlay {
        save_overlay(&render_overlay(&plan, &analysis.model, &analysis.traversal), p).map_err(pipeline)?;
    }
    print!("{text}");
    Ok(())
}

fn train(cfg: &Config, corpus: &Path, kind: Option<&str>, seed: Option<u64>, model: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let kind = match kind {
        Some(k) => ClassifierKind::parse(k).ok_or_else(|| input(anyhow!("unknown classifier kind {k:?}")))?,
        None => cfg.classifier,
    };
    let seed = seed.unwrap_or(cfg.seed);
    let csv = corpus.join("features.csv");
    let rows = lofd::read_feature_csv(&read(&csv)?).with_context(|| csv.display().to_string()).map_err(input)?;
    let split_path = corpus.join("split.txt");
    let split = read_split(&read(&split_path)?).map_err(|e| input(anyhow!("{}: {e}", split_path.display())))?;
    if split.len() != rows.len() {
        return Err(input(anyhow!("split.txt has {} rows but features.csv has {}", split.len(), rows.len())));
    }
    let (mut xtr, mut ytr, mut xte, mut yte) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for ((x, y), is_train) in rows.into_iter().zip(split) {
        if is_train {
            xtr.push(x);
            ytr.push(y);
        } else {
            xte.push(x);
            yte.push(y);
        }
    }
    let clf = lofd::train(&xtr, &ytr, &cfg.train_config(kind, seed)).map_err(input)?;
    let model_path = model.map(Path::to_path_buf).unwrap_or_else(|| corpus.join("model.txt"));
    write(&model_path, clf.to_text())?;

    let mut r = String::new();
    let _ = writeln!(r, "classifier {}", kind.name());
    let _ = writeln!(r, "seed {seed}");
    if let ClassifierParams::Ovo(seps) = &clf.params {
        let _ = writeln!(r, "separators {}", seps.len());
    }
    let _ = writeln!(r, "train rows {} accuracy {:.4}", xtr.len(), lofd::accuracy(&ytr, &clf.predict(&xtr)));
    let pred = clf.predict(&xte);
    let _ = writeln!(r, "test rows {} accuracy {:.4}", xte.len(), lofd::accuracy(&yte, &pred));
    let _ = writeln!(r, "confusion (rows: true label, columns: predicted)");
    let names: Vec<&str> = RoomLabel::ALL.iter().map(|l| l.tag()).collect();
    let _ = writeln!(r, "\t{}", names.join("\t"));
    let m = lofd::confusion(&yte, &pred);
    for i in 0..N_LABELS {
        let cells: Vec<String> = m[i].iter().map(|c| c.to_string()).collect();
        let _ = writeln!(r, "{}\t{}", names[i], cells.join("\t"));
    }
    let _ = writeln!(r, "model {}", model_path.display());
    if let Some(p) = out {
        write(p, &r)?;
    }
    print!("{r}");
    Ok(())
}

fn text_files(dir: &Path) -> Result<Vec<String>, Failure> {
    let entries = fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display())).map_err(input)?;
    let mut names = Vec::new();
    for e in entries {
        let e = e.map_err(input)?;
        let name = e.file_name().to_string_lossy().into_owned();
        if name.ends_with(".txt") && e.path().is_file() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

/// A rendered description without its section headers.
fn candidate_body(text: &str) -> String {
    text.lines().filter(|l| l.trim() != GD_HEADER && l.trim() != NV_HEADER).collect::<Vec<_>>().join("\n")
}

fn eval(candidates: &Path, references: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let cands = text_files(candidates)?;
    let refs = text_files(references)?;
    let unmatched: Vec<&String> =
        cands.iter().filter(|c| !refs.contains(c)).chain(refs.iter().filter(|r| !cands.contains(r))).collect();
    if !unmatched.is_empty() {
        let list: Vec<&str> = unmatched.iter().map(|s| s.as_str()).collect();
        return Err(input(anyhow!("unmatched files: {}", list.join(", "))));
    }
    if cands.is_empty() {
        return Err(input(anyhow!("no .txt files in {}", candidates.display())));
    }
    let mut cand_texts = Vec::new();
    let mut ref_sets = Vec::new();
    for name in &cands {
        cand_texts.push(candidate_body(&read(&candidates.join(name))?));
        let blocks = parse_reference_blocks(&read(&references.join(name))?);
        if blocks.is_empty() {
            return Err(input(anyhow!("{} holds no reference description", references.join(name).display())));
        }
        ref_sets.push(blocks);
    }
    let table = evaluate_corpus(&cand_texts, &ref_sets).map_err(input)?.to_tsv();
    if let Some(p) = out {
        write(p, &table)?;
    }
    print!("{table}");
    Ok(())
}

fn synth(cfg: &Config, n: usize, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    if n == 0 {
        return Err(input(anyhow!("corpus size must be at least 1")));
    }
    let seed = seed.unwrap_or(cfg.seed);
    let gts = generate_corpus(n, seed, out).map_err(pipeline)?;
    let rooms: usize = gts.iter().map(|g| g.rooms.len()).sum();
    println!("wrote {n} plans ({rooms} rooms) to {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(cli.config)?;
    match cli.command {
        Command::Describe { image, model, out, overlay } => describe(&cfg, &image, &model, out.as_deref(), overlay.as_deref()),
        Command::Train { corpus, kind, seed, model, out } => train(&cfg, &corpus, kind.as_deref(), seed, model.as_deref(), out.as_deref()),
        Command::Eval { candidates, references, out } => eval(&candidates, &references, out.as_deref()),
        Command::Synth { n, seed, out } => synth(&cfg, n, seed, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: input: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: pipeline: {e:#}");
            ExitCode::from(1)
        }
    }
}
