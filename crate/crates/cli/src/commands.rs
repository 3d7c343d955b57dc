//! The six subcommands. Each validates all of its options before touching
//! any data.

use std::io::Write;
use std::path::{Path, PathBuf};

use faultcnn::encoders::{encode, write_pgm, write_vimg, EncodeOptions, Method};
use faultcnn::eval::{
    bench_single, confusion_csv, evaluate_saved, run_experiment, timing_csv_row, BenchConfig, EvalReport,
    ExperimentConfig, TimingReport, TIMING_CSV_HEADER,
};
use faultcnn::ingest::{
    label_for, load_manifest_records, parse_manifest, read_record_file, write_manifest, write_raw_f64le, ManifestEntry,
    RpmSubset, Scheme,
};
use faultcnn::nn::{encode_model, load_model};
use faultcnn::signal::{
    segment_record, synth_signal, Condition, RecordMeta, Segment, SynthConfig, CWRU_RPMS, CWRU_SAMPLE_RATE_HZ,
    DEFAULT_SEGMENT_LEN, FAULT_DIAMETERS_IN,
};

use crate::config::ConfigFile;
use crate::{
    BenchArgs, CliError, CommonArgs, DataArgs, EncodeArgs, EncodingArgs, EvalArgs, IngestArgs, SynthArgs, TrainArgs,
};

const COMMON_KEYS: [&str; 3] = ["seed", "out", "no-clobber"];
const ENCODING_KEYS: [&str; 6] = ["method", "side", "bins", "window", "fuzzy-kernel", "segment-len"];
const DATA_KEYS: [&str; 5] = ["data", "scheme", "rpm", "segments-per-class", "sample-rate"];

pub const MANIFEST_NAME: &str = "manifest.csv";

/// Writes a command's printed output; a closed pipe (`faultcnn ... | head`)
/// is not an error.
fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match stdout.write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Common flags merged with the option file.
struct Session {
    file: ConfigFile,
    seed: u64,
    out: Option<PathBuf>,
    no_clobber: bool,
}

impl Session {
    fn open(common: &CommonArgs, extra_keys: &[&[&str]]) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut allowed: Vec<&str> = COMMON_KEYS.to_vec();
        extra_keys.iter().for_each(|k| allowed.extend_from_slice(k));
        file.check_keys(&allowed)?;
        let seed = file.pick(common.seed, "seed")?.unwrap_or(0);
        let out = file.pick(common.out.clone(), "out")?;
        let no_clobber = common.no_clobber || file.get("no-clobber")?.unwrap_or(false);
        Ok(Session {
            file,
            seed,
            out,
            no_clobber,
        })
    }

    fn output(&self) -> Result<Output, CliError> {
        let dir = self.out.clone().ok_or_else(|| usage("--out is required"))?;
        Ok(Output {
            dir,
            no_clobber: self.no_clobber,
        })
    }
}

/// Writes files into one directory, honouring `--no-clobber`.
struct Output {
    dir: PathBuf,
    no_clobber: bool,
}

impl Output {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn ensure_free<S: AsRef<str>>(&self, names: &[S]) -> Result<(), CliError> {
        if self.no_clobber {
            for name in names {
                let p = self.path(name.as_ref());
                if p.exists() {
                    return Err(CliError::Clobber(p.display().to_string()));
                }
            }
        }
        Ok(())
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        self.ensure_free(&[name])?;
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let p = self.path(name);
        std::fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }
}

fn synth_rows(classes: usize) -> Result<Vec<(Condition, Option<f64>)>, CliError> {
    let faults = [Condition::Ball, Condition::InnerRace, Condition::OuterRace];
    let mut rows = vec![(Condition::Healthy, None)];
    match classes {
        4 => rows.extend(faults.map(|c| (c, Some(FAULT_DIAMETERS_IN[0])))),
        10 => rows.extend(
            faults
                .into_iter()
                .flat_map(|c| FAULT_DIAMETERS_IN.map(|d| (c, Some(d)))),
        ),
        n => return Err(usage(format!("--classes must be 4 or 10, got {n}"))),
    }
    Ok(rows)
}

fn record_file_name(meta: &RecordMeta) -> String {
    match meta.fault_diameter_in {
        None => format!("{}_{}.f64", meta.condition, meta.rpm),
        Some(d) => format!("{}_{:03}_{}.f64", meta.condition, (d * 1000.0).round() as u32, meta.rpm),
    }
}

pub fn cmd_synth(args: &SynthArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let s = Session::open(&args.common, &[&["classes", "duration", "rpm"]])?;
    let classes = s.file.pick(args.classes, "classes")?.unwrap_or(4);
    let duration: f64 = s.file.pick(args.duration, "duration")?.unwrap_or(10.0);
    let rpm = s.file.pick(args.rpm, "rpm")?.unwrap_or_default();
    let rows = synth_rows(classes)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(usage(format!("--duration must be positive, got {duration}")));
    }
    let out = s.output()?;

    let mut entries = Vec::new();
    let mut files = Vec::new();
    for (ri, &r) in CWRU_RPMS.iter().enumerate().filter(|(_, &r)| rpm.contains(r)) {
        for (ci, &(condition, diameter)) in rows.iter().enumerate() {
            let seed = s.seed.wrapping_add((ri * 100 + ci) as u64);
            let record = synth_signal(&SynthConfig::for_rpm(f64::from(r), seed), condition, diameter, duration)?;
            let name = record_file_name(&record.meta);
            files.push((name.clone(), write_raw_f64le(&record.samples)));
            entries.push(ManifestEntry {
                path: out.path(&name),
                meta: record.meta,
            });
        }
    }
    let mut names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    names.push(MANIFEST_NAME);
    out.ensure_free(&names)?;
    for (name, bytes) in &files {
        out.write(name, bytes)?;
    }
    out.write(MANIFEST_NAME, write_manifest(&entries, &out.dir).as_bytes())?;
    emit(
        stdout,
        &format!(
            "wrote {} recordings and {} to {}\n",
            files.len(),
            MANIFEST_NAME,
            out.dir.display()
        ),
    )?;
    Ok(())
}

pub fn cmd_ingest(args: &IngestArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let s = Session::open(&args.common, &[&["data", "segment-len", "sample-rate"]])?;
    let manifest: PathBuf = s
        .file
        .pick(args.data.clone(), "data")?
        .ok_or_else(|| usage("--data is required"))?;
    let segment_len = s
        .file
        .pick(args.segment_len, "segment-len")?
        .unwrap_or(DEFAULT_SEGMENT_LEN);
    let sample_rate = s.file.get("sample-rate")?.unwrap_or(CWRU_SAMPLE_RATE_HZ);
    let out = s.out.as_ref().map(|_| s.output()).transpose()?;

    let text = std::fs::read_to_string(&manifest).map_err(|e| CliError::io(&manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text, base)?;
    emit(stdout, "path,condition,diameter,rpm,samples,segments,four,ten\n")?;
    let mut converted = Vec::new();
    for entry in &entries {
        let record = read_record_file(&entry.path, entry.meta, sample_rate)?;
        let four = label_for(entry.meta.condition, entry.meta.fault_diameter_in, Scheme::FourClass)?;
        let ten = label_for(entry.meta.condition, entry.meta.fault_diameter_in, Scheme::TenClass)?;
        emit(
            stdout,
            &format!(
                "{},{},{},{},{},{},{},{}\n",
                entry.path.display(),
                entry.meta.condition,
                entry.meta.fault_diameter_in.map_or("-".into(), |d| d.to_string()),
                entry.meta.rpm,
                record.samples.len(),
                record.samples.len() / segment_len,
                four.value,
                ten.value
            ),
        )?;
        converted.push(record);
    }
    if let Some(out) = out {
        let mut new_entries = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for record in &converted {
            let name = record_file_name(&record.meta);
            if names.contains(&name) {
                return Err(usage(format!("two recordings map to {name}")));
            }
            names.push(name.clone());
            new_entries.push(ManifestEntry {
                path: out.path(&name),
                meta: record.meta,
            });
        }
        names.push(MANIFEST_NAME.into());
        out.ensure_free(&names)?;
        for (record, entry) in converted.iter().zip(&new_entries) {
            let name = entry.path.file_name().unwrap().to_string_lossy().into_owned();
            out.write(&name, &write_raw_f64le(&record.samples))?;
        }
        out.write(MANIFEST_NAME, write_manifest(&new_entries, &out.dir).as_bytes())?;
        log::info!("converted {} recordings into {}", converted.len(), out.dir.display());
    }
    Ok(())
}

/// Encoding options and segment length, validated against each other.
fn encoding_options(
    args: &EncodingArgs,
    file: &ConfigFile,
    default_side: Option<usize>,
) -> Result<(EncodeOptions, usize), CliError> {
    let method: Method = file.pick(args.method, "method")?.unwrap_or(Method::PixelStrength);
    let mut opts = EncodeOptions::new(method);
    opts.side = file
        .pick(args.side, "side")?
        .or(default_side)
        .unwrap_or(method.default_side());
    opts.bins = file.pick(args.bins, "bins")?.unwrap_or(opts.bins);
    opts.window = file.pick(args.window, "window")?.unwrap_or(opts.window);
    opts.fuzzy_kernel = file.pick(args.fuzzy_kernel, "fuzzy-kernel")?.unwrap_or(1);
    let segment_len = file
        .pick(args.segment_len, "segment-len")?
        .unwrap_or(DEFAULT_SEGMENT_LEN);
    if opts.side == 0 {
        return Err(usage("--side must be positive"));
    }
    if opts.bins < 2 {
        return Err(usage(format!("--bins must be at least 2, got {}", opts.bins)));
    }
    if opts.fuzzy_kernel == 0 || opts.fuzzy_kernel > opts.side {
        return Err(usage(format!(
            "--fuzzy-kernel must be between 1 and the side ({}), got {}",
            opts.side, opts.fuzzy_kernel
        )));
    }
    let needed = method.samples_needed(opts.side);
    if segment_len < needed {
        return Err(usage(format!(
            "{method} at side {} needs {needed} samples per segment, segment length is {segment_len}",
            opts.side
        )));
    }
    Ok((opts, segment_len))
}

pub fn cmd_encode(args: &EncodeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let s = Session::open(&args.common, &[&ENCODING_KEYS, &["input", "limit", "sample-rate"]])?;
    let (opts, segment_len) = encoding_options(&args.encoding, &s.file, None)?;
    let input: PathBuf = s
        .file
        .pick(args.input.clone(), "input")?
        .ok_or_else(|| usage("--input is required"))?;
    let limit = s.file.pick(args.limit, "limit")?.unwrap_or(usize::MAX);
    let sample_rate = s.file.get("sample-rate")?.unwrap_or(CWRU_SAMPLE_RATE_HZ);
    let out = s.output()?;

    // labels play no part in encoding
    let meta = RecordMeta::new(1, Condition::Healthy, None)?;
    let record = read_record_file(&input, meta, sample_rate)?;
    let segments = segment_record(&record, segment_len)?;
    let stem = input
        .file_stem()
        .map_or("segment".into(), |s| s.to_string_lossy().into_owned());
    let ext = if opts.method.channels() == 1 { "pgm" } else { "vimg" };
    let names: Vec<String> = (0..segments.len().min(limit))
        .map(|i| format!("{stem}_{i:04}.{ext}"))
        .collect();
    out.ensure_free(&names)?;
    for (segment, name) in segments.iter().zip(&names) {
        let image = encode(segment, &opts)?;
        let mut bytes = Vec::new();
        if image.channels == 1 {
            write_pgm(&image, &mut bytes)?;
        } else {
            write_vimg(&image, &mut bytes)?;
        }
        out.write(name, &bytes)?;
    }
    emit(
        stdout,
        &format!(
            "wrote {} {} images to {}\n",
            names.len(),
            opts.method,
            out.dir.display()
        ),
    )?;
    Ok(())
}

fn experiment_config(
    s: &Session,
    encoding: &EncodingArgs,
    data: &DataArgs,
    default_side: Option<usize>,
) -> Result<(ExperimentConfig, PathBuf, f64), CliError> {
    let (opts, segment_len) = encoding_options(encoding, &s.file, default_side)?;
    let scheme = s.file.pick(data.scheme, "scheme")?.unwrap_or(Scheme::FourClass);
    let mut config = ExperimentConfig::new(opts.method, scheme);
    config.encode = opts;
    config.segment_len = segment_len;
    config.seed = s.seed;
    config.rpm = s.file.pick(data.rpm, "rpm")?.unwrap_or(RpmSubset::All);
    config.segments_per_class_per_rpm = s
        .file
        .pick(data.segments_per_class, "segments-per-class")?
        .unwrap_or(config.segments_per_class_per_rpm);
    if config.segments_per_class_per_rpm == 0 {
        return Err(usage("--segments-per-class must be positive"));
    }
    let manifest = s
        .file
        .pick(data.data.clone(), "data")?
        .ok_or_else(|| usage("--data is required"))?;
    let sample_rate: f64 = s
        .file
        .pick(data.sample_rate, "sample-rate")?
        .unwrap_or(CWRU_SAMPLE_RATE_HZ);
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(usage(format!("--sample-rate must be positive, got {sample_rate}")));
    }
    Ok((config, manifest, sample_rate))
}

pub fn model_file_name(method: Method) -> String {
    format!("{}.vcnn", method.key())
}

/// Trains, writes `<method>.vcnn`, `<method>_report.txt` and
/// `<method>_confusion.csv`, and returns the report.
pub fn cmd_train(args: &TrainArgs, stdout: &mut dyn Write) -> Result<EvalReport, CliError> {
    let s = Session::open(
        &args.common,
        &[&ENCODING_KEYS, &DATA_KEYS, &["epochs", "batch-size", "lr"]],
    )?;
    let (mut config, manifest, sample_rate) = experiment_config(&s, &args.encoding, &args.data, None)?;
    config.epochs = s.file.pick(args.epochs, "epochs")?.unwrap_or(config.epochs);
    config.batch_size = s.file.pick(args.batch_size, "batch-size")?.unwrap_or(config.batch_size);
    config.lr = s.file.pick(args.lr, "lr")?.unwrap_or(config.lr);
    if config.batch_size == 0 {
        return Err(usage("--batch-size must be positive"));
    }
    if !(config.lr > 0.0 && config.lr.is_finite()) {
        return Err(usage(format!("--lr must be positive, got {}", config.lr)));
    }
    let out = s.output()?;
    let key = config.encode.method.key();
    let names = [
        model_file_name(config.encode.method),
        format!("{key}_report.txt"),
        format!("{key}_confusion.csv"),
    ];
    out.ensure_free(&names)?;

    let records = load_manifest_records(&manifest, sample_rate)?;
    let outcome = run_experiment(&config, &records)?;
    out.write(&names[0], &encode_model(&outcome.model))?;
    out.write(&names[1], outcome.report.to_text().as_bytes())?;
    out.write(&names[2], confusion_csv(&outcome.report.confusion).as_bytes())?;
    emit(stdout, &format!("accuracy={:.4}\n", outcome.report.accuracy()))?;
    emit(stdout, &format!("model={}\n", out.path(&names[0]).display()))?;
    Ok(outcome.report)
}

/// Scores a saved model on the held-out part of the split selected by the
/// seed. With the training seed this is exactly the training run's test set.
pub fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<EvalReport, CliError> {
    let s = Session::open(&args.common, &[&ENCODING_KEYS, &DATA_KEYS, &["model"]])?;
    let model_path: PathBuf = s
        .file
        .pick(args.model.clone(), "model")?
        .ok_or_else(|| usage("--model is required"))?;
    let model = load_model(&model_path)?;
    let (config, manifest, sample_rate) =
        experiment_config(&s, &args.encoding, &args.data, Some(model.input_shape[1]))?;
    let out = s.out.as_ref().map(|_| s.output()).transpose()?;
    if let Some(out) = &out {
        out.ensure_free(&["eval_report.txt", "eval_confusion.csv"])?;
    }
    let records = load_manifest_records(&manifest, sample_rate)?;
    let report = evaluate_saved(&model, &config, &records)?;
    let csv = confusion_csv(&report.confusion);
    emit(stdout, &format!("accuracy={:.4}\n", report.accuracy()))?;
    match &out {
        Some(out) => {
            out.write("eval_report.txt", report.to_text().as_bytes())?;
            out.write("eval_confusion.csv", csv.as_bytes())?;
        }
        None => emit(stdout, &csv)?,
    }
    Ok(report)
}

fn bench_segment(data: Option<&Path>, seed: u64) -> Result<Segment, CliError> {
    let record = match data {
        Some(manifest) => load_manifest_records(manifest, CWRU_SAMPLE_RATE_HZ)?
            .into_iter()
            .next()
            .ok_or_else(|| usage(format!("{} lists no recordings", manifest.display())))?,
        None => synth_signal(
            &SynthConfig::for_rpm(1797.0, seed),
            Condition::InnerRace,
            Some(0.007),
            0.1,
        )?,
    };
    Ok(segment_record(&record, DEFAULT_SEGMENT_LEN)?.swap_remove(0))
}

/// Benchmarks every `<method>.vcnn` found in the model directory. Prints the
/// timing CSV and writes it to `<out>/timing.csv` when `--out` is given.
pub fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<Vec<(Method, TimingReport)>, CliError> {
    let s = Session::open(&args.common, &[&["models", "data", "repetitions", "warmup"]])?;
    let dir: PathBuf = s
        .file
        .pick(args.models.clone(), "models")?
        .ok_or_else(|| usage("--models is required"))?;
    let data: Option<PathBuf> = s.file.pick(args.data.clone(), "data")?;
    let defaults = BenchConfig::default();
    let bench = BenchConfig {
        repetitions: s
            .file
            .pick(args.repetitions, "repetitions")?
            .unwrap_or(defaults.repetitions),
        warmup: s.file.pick(args.warmup, "warmup")?.unwrap_or(defaults.warmup),
    };
    if bench.repetitions == 0 {
        return Err(usage("--repetitions must be positive"));
    }
    let out = s.out.as_ref().map(|_| s.output()).transpose()?;
    if let Some(out) = &out {
        out.ensure_free(&["timing.csv"])?;
    }

    let segment = bench_segment(data.as_deref(), s.seed)?;
    let mut rows = Vec::new();
    for method in Method::ALL {
        let path = dir.join(model_file_name(method));
        if !path.exists() {
            continue;
        }
        let model = load_model(&path)?;
        let opts = EncodeOptions::new(method).with_side(model.input_shape[1]);
        let timing = bench_single(&model, &segment, &opts, &bench)?;
        rows.push((method, timing));
    }
    if rows.is_empty() {
        return Err(usage(format!("no <method>.vcnn models in {}", dir.display())));
    }
    let mut csv = format!("{TIMING_CSV_HEADER}\n");
    for (method, timing) in &rows {
        csv.push_str(&timing_csv_row(*method, timing));
        csv.push('\n');
    }
    emit(stdout, &csv)?;
    if let Some(out) = &out {
        out.write("timing.csv", csv.as_bytes())?;
    }
    Ok(rows)
}
