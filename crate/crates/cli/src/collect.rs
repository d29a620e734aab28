//! Experience-sampling collection: one rating 0..=4 for each of the 27
//! emotions, appended as a self-report line.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use affect_fuzzy::emotion::{parse_reportable, EmotionName, LevelClass, Region, SelfReport};
use affect_fuzzy::features::{InteractionEvent, Session};
use affect_fuzzy::io::{report_to_line, write_session};
use serde_json::Value;

use crate::commands::open;
use crate::config::Format;
use crate::error::{CliError, CliResult};
use crate::{CollectArgs, Context};

fn parse_class(text: &str) -> Result<LevelClass, String> {
    let value: i64 = text.trim().parse().map_err(|_| format!("`{}` is not an integer", text.trim()))?;
    LevelClass::new(value).map_err(|e| e.to_string())
}

/// Parses `emotion = level` lines (`:` or whitespace also separate).
pub fn parse_answers(text: &str) -> CliResult<BTreeMap<EmotionName, LevelClass>> {
    let mut levels = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once(['=', ':'])
            .or_else(|| line.split_once(char::is_whitespace))
            .ok_or_else(|| CliError::usage(format!("answers line {}: expected `emotion = level`", i + 1)))?;
        let emotion = parse_reportable(name.trim()).map_err(|e| CliError::usage(format!("answers line {}: {e}", i + 1)))?;
        let class = parse_class(value).map_err(|e| CliError::usage(format!("answers line {}: {emotion}: {e}", i + 1)))?;
        if levels.insert(emotion, class).is_some() {
            return Err(CliError::usage(format!("answers line {}: `{emotion}` answered twice", i + 1)));
        }
    }
    let missing: Vec<&str> =
        EmotionName::REPORTABLE.iter().filter(|e| !levels.contains_key(e)).map(|e| e.as_str()).collect();
    if !missing.is_empty() {
        return Err(CliError::usage(format!("missing answers for: {}", missing.join(", "))));
    }
    Ok(levels)
}

/// Prompts for every emotion, asking again after invalid input.
fn prompt_answers(input: &mut impl BufRead, prompts: &mut impl Write) -> CliResult<BTreeMap<EmotionName, LevelClass>> {
    let mut levels = BTreeMap::new();
    for emotion in EmotionName::REPORTABLE {
        loop {
            write!(prompts, "{emotion} (0-4): ")?;
            prompts.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                return Err(CliError::usage(format!("input ended before `{emotion}` was rated")));
            }
            match parse_class(&line) {
                Ok(class) => {
                    levels.insert(emotion, class);
                    break;
                }
                Err(e) => writeln!(prompts, "  {e}; enter an integer from 0 to 4")?,
            }
        }
    }
    Ok(levels)
}

/// Events from a replay file. Session header lines are ignored.
fn replay_events(path: &Path) -> CliResult<Vec<InteractionEvent>> {
    let mut events = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let data = |e: &dyn std::fmt::Display| CliError::data(format!("{}: line {}: {e}", path.display(), i + 1));
        let value: Value = serde_json::from_str(&line).map_err(|e| data(&e))?;
        if value.get("kind").is_none() {
            continue;
        }
        events.push(serde_json::from_value(value).map_err(|e| data(&e))?);
    }
    Ok(events)
}

fn append(path: &Path, f: impl FnOnce(&mut std::fs::File) -> CliResult) -> CliResult {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    f(&mut file)
}

pub fn collect(ctx: &Context, args: CollectArgs) -> CliResult {
    if !(args.interval > 0.0 && args.interval.is_finite()) {
        return Err(CliError::usage(format!("--interval must be a positive number of hours, got {}", args.interval)));
    }
    let region = args.region.or_else(|| ctx.file.region.clone()).map(|r| r.parse::<Region>()).transpose()?;
    let levels = match &args.answers {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            parse_answers(&text)?
        }
        None => prompt_answers(&mut std::io::stdin().lock(), &mut std::io::stderr())?,
    };
    let now = match args.now {
        Some(t) => t,
        None => SystemTime::now().duration_since(UNIX_EPOCH).map_err(CliError::io)?.as_millis() as u64,
    };
    let events = args.replay.as_deref().map(replay_events).transpose()?;
    let report = SelfReport::new(now, args.participant.clone(), region, levels)?;

    let line = report_to_line(&report);
    append(&args.out, |f| writeln!(f, "{line}").map_err(|e| CliError::io(format!("{}: {e}", args.out.display()))))?;
    if let (Some(events), Some(log_path)) = (events, &args.session_log) {
        let session = Session::new(args.participant.clone(), region, events);
        append(log_path, |f| write_session(f, &session, Some(now)).map_err(CliError::from))?;
    }

    let next = now + (args.interval * 3_600_000.0).round() as u64;
    let out = match ctx.format {
        Format::Json => format!("{line}\n"),
        Format::Csv => format!("pid,ts,next_prompt_ts\n{},{now},{next}\n", report.participant),
        Format::Table => format!("recorded {} ratings for {} at {now}; next prompt at {next}\n", report.levels.len(), report.participant),
    };
    print!("{out}");
    Ok(())
}
