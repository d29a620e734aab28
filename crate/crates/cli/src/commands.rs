use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use affect_fuzzy::classifier::{train as train_model, Kernel, TrainConfig};
use affect_fuzzy::cooccurrence::{
    expected_profile, plausibility, regional_profile, table_for, CooccurrenceTable, DEFAULT_TOLERANCE,
};
use affect_fuzzy::dataset::{label_sessions, match_keys, SessionFeatures};
use affect_fuzzy::emotion::{level_from_percent, percent, BasicEmotion, EmotionProfile, Level, Region, SelfReport};
use affect_fuzzy::evaluation::{evaluate, DEFAULT_THRESHOLD};
use affect_fuzzy::features::{extract_with, ValidationMode};
use affect_fuzzy::fuzzy::{self, defuzzify};
use affect_fuzzy::io::{
    read_features, read_predictions, read_reports, read_sessions, write_features, write_predictions, Prediction,
    Strictness,
};
use affect_fuzzy::model_io::{load_model, save_model};
use affect_fuzzy::synth::{generate, manifest, GeneratorConfig};
use serde_json::json;

use crate::config::Format;
use crate::error::{CliError, CliResult};
use crate::{Context, EvalArgs, ExtractArgs, FuzzifyArgs, PredictArgs, SynthArgs, TablesArgs, TrainArgs};

const HOUR_MS: f64 = 3_600_000.0;

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or stdout when absent.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> CliResult) -> CliResult {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(format!("{}: {e}", p.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush().map_err(CliError::io)
        }
    }
}

fn print(text: &str) -> CliResult {
    with_output(None, |w| w.write_all(text.as_bytes()).map_err(CliError::io))
}

fn json_line(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn required(flag: Option<PathBuf>, file: &Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    flag.or_else(|| file.clone()).ok_or_else(|| CliError::usage(format!("missing --{name} (or `{name}` in the config file)")))
}

fn window_ms(hours: f64) -> CliResult<u64> {
    if !(hours >= 0.0 && hours.is_finite()) {
        return Err(CliError::usage(format!("window must be a non-negative number of hours, got {hours}")));
    }
    Ok((hours * HOUR_MS).round() as u64)
}

fn table_text(table: &CooccurrenceTable) -> String {
    let mut out = format!("{:<7}", table.anchor.as_str());
    for c in &table.columns {
        let _ = write!(out, " {:>12}", c.as_str());
    }
    out.push('\n');
    for (level, row) in table.rows.iter().enumerate() {
        let _ = write!(out, "{level:<7}");
        for v in row {
            let _ = write!(out, " {v:>12}");
        }
        out.push('\n');
    }
    out
}

fn profile_csv(profile: &EmotionProfile) -> String {
    let mut out = String::from("emotion,level,percent\n");
    for (e, l) in profile {
        let _ = writeln!(out, "{e},{},{}", l.value(), percent(*l));
    }
    out
}

fn profile_text(profile: &EmotionProfile) -> String {
    let mut out = format!("{:<14} {:>8} {:>8}\n", "emotion", "level", "percent");
    for (e, l) in profile {
        let _ = writeln!(out, "{:<14} {:>8.4} {:>7.1}%", e.as_str(), l.value(), percent(*l));
    }
    out
}

pub fn tables(ctx: &Context, args: TablesArgs) -> CliResult {
    let anchor: BasicEmotion = args.anchor.parse()?;
    let table = table_for(anchor)?;
    let format = if args.csv { Format::Csv } else { ctx.format };
    let level = args.level.map(Level::new).transpose()?;
    let region = args.region.or_else(|| ctx.file.region.clone()).map(|r| r.parse::<Region>()).transpose()?;

    let Some(level) = level else {
        if region.is_some() {
            return Err(CliError::usage("--region needs --level"));
        }
        if args.check.is_some() {
            return Err(CliError::usage("--check needs --level"));
        }
        if args.plot_data {
            return print(&table.plot_series(args.step)?);
        }
        return print(&match format {
            Format::Csv => table.to_csv(),
            Format::Json => json_line(&table),
            Format::Table => table_text(&table),
        });
    };

    if let Some(check) = &args.check {
        let (name, value) = check
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--check expects EMOTION=LEVEL, got `{check}`")))?;
        let candidate: BasicEmotion = name.trim().parse()?;
        let value: f64 =
            value.trim().parse().map_err(|e| CliError::usage(format!("--check level `{value}`: {e}")))?;
        let tolerance = args.tolerance.or(ctx.file.tolerance).unwrap_or(DEFAULT_TOLERANCE);
        let verdict = plausibility(anchor, level, candidate, Level::new(value)?, tolerance)?;
        return print(&match format {
            Format::Json => json_line(&verdict),
            Format::Csv => format!(
                "anchor,anchor_level,candidate,level,expected,margin,tolerance,verdict\n{anchor},{},{candidate},{value},{},{},{tolerance},{}\n",
                level.value(),
                verdict.expected.value(),
                verdict.margin,
                if verdict.is_plausible() { "plausible" } else { "implausible" }
            ),
            Format::Table => format!(
                "{candidate} at {value} given {anchor} at {}: {} (expected {:.4}, margin {:.4}, tolerance {tolerance})\n",
                level.value(),
                if verdict.is_plausible() { "plausible" } else { "implausible" },
                verdict.expected.value(),
                verdict.margin
            ),
        });
    }

    let profile = match region {
        Some(r) => regional_profile(r, anchor, level)?,
        None => expected_profile(anchor, level)?,
    };
    if args.plot_data {
        return print(&profile_csv(&profile));
    }
    print(&match format {
        Format::Csv => profile_csv(&profile),
        Format::Json => json_line(&json!({
            "anchor": anchor,
            "level": level.value(),
            "region": region,
            "profile": profile,
        })),
        Format::Table => {
            let mut head = format!("{anchor} at level {} ({}%)", level.value(), percent(level));
            if let Some(r) = region {
                let _ = write!(head, ", {r}");
            }
            head.push('\n');
            head + &profile_text(&profile)
        }
    })
}

pub fn fuzzify(ctx: &Context, args: FuzzifyArgs) -> CliResult {
    let mut rows = Vec::new();
    for v in &args.values {
        let level = if args.percent { level_from_percent(*v)? } else { Level::new(*v)? };
        let m = fuzzy::fuzzify(level);
        let back = defuzzify(&m).map_err(CliError::data)?;
        rows.push((level, m, back));
    }
    print(&match ctx.format {
        Format::Json => json_line(
            &rows
                .iter()
                .map(|(l, m, back)| {
                    json!({
                        "level": l.value(),
                        "percent": percent(*l),
                        "membership": m,
                        "class": m.argmax().value(),
                        "defuzzified": back.value(),
                    })
                })
                .collect::<Vec<_>>(),
        ),
        Format::Csv => {
            let mut out = String::from("level,m0,m1,m2,m3,m4,class\n");
            for (l, m, _) in &rows {
                let w = m.weights();
                let _ = writeln!(out, "{},{},{},{},{},{},{}", l.value(), w[0], w[1], w[2], w[3], w[4], m.argmax());
            }
            out
        }
        Format::Table => {
            let mut out = format!("{:>6} {:>7}  {:>6} {:>6} {:>6} {:>6} {:>6}  class\n", "level", "percent", "0", "1", "2", "3", "4");
            for (l, m, _) in &rows {
                let w = m.weights();
                let _ = writeln!(
                    out,
                    "{:>6.3} {:>6.1}%  {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3}  {}",
                    l.value(),
                    percent(*l),
                    w[0],
                    w[1],
                    w[2],
                    w[3],
                    w[4],
                    m.argmax()
                );
            }
            out
        }
    })
}

pub fn synth(ctx: &Context, args: SynthArgs) -> CliResult {
    let defaults = GeneratorConfig::default();
    let config = GeneratorConfig {
        seed: ctx.seed.unwrap_or(defaults.seed),
        participants: args.participants.or(ctx.file.participants).unwrap_or(defaults.participants),
        sessions_per_participant: args.sessions.or(ctx.file.sessions).unwrap_or(defaults.sessions_per_participant),
        noise_std: args.noise.or(ctx.file.noise).unwrap_or(defaults.noise_std),
        ..defaults
    };
    let dir = required(args.out_dir, &ctx.file.out_dir, "out-dir")?;
    let dataset = generate(&config)?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let write = |name: &str, bytes: &[u8]| -> CliResult {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
    };
    write("reports.jsonl", &dataset.reports_jsonl())?;
    write("sessions.jsonl", &dataset.sessions_jsonl())?;
    let m = manifest(&config, &dataset);
    write("manifest.json", json_line(&m).as_bytes())?;
    print(&match ctx.format {
        Format::Json => json_line(&m),
        Format::Csv => format!(
            "reports,sessions,config_sha256,dataset_sha256\n{},{},{},{}\n",
            m.reports, m.sessions, m.config_sha256, m.dataset_sha256
        ),
        Format::Table => format!(
            "wrote {} reports and {} sessions to {}\ndataset sha256 {}\n",
            m.reports,
            m.sessions,
            dir.display(),
            m.dataset_sha256
        ),
    })
}

fn extract_file(path: &Path, mode: ValidationMode) -> CliResult<Vec<SessionFeatures>> {
    let records = read_sessions(open(path)?, Strictness::Strict).map_err(|e| CliError::from(e).context(path.display()))?;
    let mut out = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for (i, r) in records.iter().enumerate() {
        let x = extract_with(&r.session, mode)
            .map_err(|e| CliError::data(format!("{}: session {} ({}): {e}", path.display(), i + 1, r.session.participant)))?;
        skipped += x.skipped;
        out.push(SessionFeatures { pid: r.session.participant.clone(), ts: r.start_ts().unwrap_or(0), features: x.features });
    }
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} inconsistent events", path.display());
    }
    Ok(out)
}

pub fn extract(_ctx: &Context, args: ExtractArgs) -> CliResult {
    let mode = if args.lenient { ValidationMode::Lenient } else { ValidationMode::Strict };
    let features = extract_file(&args.sessions, mode)?;
    with_output(args.out.as_deref(), |w| write_features(w, &features).map_err(CliError::from))
}

fn kernel(name: &str, gamma: f64, components: u32) -> CliResult<Kernel> {
    match name.to_ascii_lowercase().as_str() {
        "linear" => Ok(Kernel::Linear),
        "quadratic" => Ok(Kernel::Quadratic),
        "rbf" => Ok(Kernel::Rbf { gamma, components }),
        other => Err(CliError::usage(format!("unknown kernel `{other}` (expected linear, quadratic or rbf)"))),
    }
}

pub fn train(ctx: &Context, args: TrainArgs) -> CliResult {
    let reports_path = required(args.reports, &ctx.file.reports, "reports")?;
    let model_path = required(args.model, &ctx.file.model, "model")?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        c: args.c.or(ctx.file.c).unwrap_or(defaults.c),
        epochs: args.epochs.or(ctx.file.epochs).unwrap_or(defaults.epochs),
        temperature: args.temperature.or(ctx.file.temperature).unwrap_or(defaults.temperature),
        seed: ctx.seed.unwrap_or(defaults.seed),
        kernel: match args.kernel.or_else(|| ctx.file.kernel.clone()) {
            Some(k) => kernel(&k, args.gamma, args.components)?,
            None => defaults.kernel,
        },
        ..defaults
    };
    config.validate()?;
    let window = window_ms(args.window)?;

    let features = read_features(open(&args.features)?).map_err(|e| CliError::from(e).context(args.features.display()))?;
    let reports =
        read_reports(open(&reports_path)?, Strictness::Strict).map_err(|e| CliError::from(e).context(reports_path.display()))?;
    let labeled = label_sessions(&features, &reports, window);
    if labeled.samples.is_empty() {
        return Err(CliError::data("no session has a self-report within the join window"));
    }
    if labeled.dropped > 0 {
        log::warn!("{} sessions have no report within the join window and were skipped", labeled.dropped);
    }
    let model = train_model(&labeled.samples, &config)?;
    let mut w = create(&model_path)?;
    save_model(&model, &mut w)?;
    w.flush().map_err(|e| CliError::io(format!("{}: {e}", model_path.display())))?;

    let emotions: Vec<&str> = model.emotion_names().iter().map(|e| e.as_str()).collect();
    print(&match ctx.format {
        Format::Json => json_line(&json!({
            "model": model_path,
            "samples": labeled.samples.len(),
            "dropped": labeled.dropped,
            "emotions": emotions,
            "config": config,
        })),
        Format::Csv => format!("model,samples,dropped\n{},{},{}\n", model_path.display(), labeled.samples.len(), labeled.dropped),
        Format::Table => format!(
            "trained {} emotions on {} sessions ({} skipped), model written to {}\n",
            emotions.len(),
            labeled.samples.len(),
            labeled.dropped,
            model_path.display()
        ),
    })
}

pub fn predict(ctx: &Context, args: PredictArgs) -> CliResult {
    let model_path = required(args.model, &ctx.file.model, "model")?;
    let model = load_model(open(&model_path)?).map_err(|e| CliError::from(e).context(model_path.display()))?;
    let features = match (&args.features, &args.sessions) {
        (Some(f), _) => read_features(open(f)?).map_err(|e| CliError::from(e).context(f.display()))?,
        (None, Some(s)) => extract_file(s, ValidationMode::Strict)?,
        (None, None) => return Err(CliError::usage("one of --features or --sessions is required")),
    };
    let predictions = features
        .iter()
        .map(|f| Ok(Prediction { pid: f.pid.clone(), ts: f.ts, state: model.predict(&f.features)? }))
        .collect::<CliResult<Vec<_>>>()?;
    with_output(args.out.as_deref(), |w| write_predictions(w, &predictions).map_err(CliError::from))
}

pub fn eval(ctx: &Context, args: EvalArgs) -> CliResult {
    let truth_path = required(args.truth, &ctx.file.reports, "truth")?;
    let threshold = args.threshold.or(ctx.file.threshold).unwrap_or(DEFAULT_THRESHOLD);
    let window = window_ms(args.window)?;
    let predictions = read_predictions(open(&args.predictions)?, Strictness::Strict)
        .map_err(|e| CliError::from(e).context(args.predictions.display()))?;
    let reports: Vec<SelfReport> =
        read_reports(open(&truth_path)?, Strictness::Strict).map_err(|e| CliError::from(e).context(truth_path.display()))?;

    let keys: Vec<(&str, u64)> = predictions.iter().map(|p| (p.pid.as_str(), p.ts)).collect();
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for (p, m) in predictions.iter().zip(match_keys(&keys, &reports, window)) {
        match m {
            Some(i) => {
                pred.push(p.state.clone());
                truth.push(reports[i].clone());
            }
            None => log::warn!("no self-report for prediction {} at {}; skipped", p.pid, p.ts),
        }
    }
    if pred.is_empty() {
        return Err(CliError::data("no prediction has a self-report within the join window"));
    }
    let report = evaluate(&pred, &truth, threshold, None)?;
    let format = if args.csv { Format::Csv } else { ctx.format };
    print(&match format {
        Format::Json => json_line(&report),
        Format::Csv => report.confusion.to_csv(),
        Format::Table => report.to_table(),
    })
}
