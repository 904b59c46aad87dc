//! Event log: one `tick,kind,payload` line per record.
//!
//! `payload` is a `;`-separated list of `key=value` items and never holds a
//! comma. Reals are written with `{:.16e}`. Lines starting with `#` are
//! comments.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{SoccerError, SoccerResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    GameStart,
    Roles,
    Striker,
    Goal,
    Decision,
    GameEnd,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::GameStart => "game_start",
            EventKind::Roles => "roles",
            EventKind::Striker => "striker",
            EventKind::Goal => "goal",
            EventKind::Decision => "decision",
            EventKind::GameEnd => "game_end",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            EventKind::GameStart,
            EventKind::Roles,
            EventKind::Striker,
            EventKind::Goal,
            EventKind::Decision,
            EventKind::GameEnd,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tick: u64,
    pub kind: EventKind,
    pub payload: String,
}

impl EventRecord {
    pub fn new(tick: u64, kind: EventKind, payload: impl Into<String>) -> Self {
        Self {
            tick,
            kind,
            payload: payload.into(),
        }
    }

    pub fn to_line(&self) -> String {
        format!("{},{},{}", self.tick, self.kind.as_str(), self.payload)
    }

    pub fn parse_line(line: &str, line_no: usize) -> SoccerResult<Self> {
        let err = |message: String| SoccerError::Parse { line: line_no, message };
        let mut parts = line.splitn(3, ',');
        let tick = parts
            .next()
            .unwrap_or("")
            .parse::<u64>()
            .map_err(|e| err(format!("tick: {e}")))?;
        let kind_text = parts.next().ok_or_else(|| err("missing kind".into()))?;
        let kind = EventKind::parse(kind_text).ok_or_else(|| err(format!("unknown kind {kind_text:?}")))?;
        let payload = parts.next().ok_or_else(|| err("missing payload".into()))?;
        if payload.contains(',') {
            return Err(err("payload must not contain commas".into()));
        }
        Ok(Self::new(tick, kind, payload))
    }

    /// Value of `key` in the payload.
    pub fn field(&self, key: &str) -> Option<&str> {
        self.payload
            .split(';')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }
}

pub const EVENT_HEADER: &str = "# tick,kind,payload";

pub fn write_events<W: Write>(out: &mut W, records: &[EventRecord]) -> SoccerResult<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

pub fn read_events<R: BufRead>(input: R) -> SoccerResult<Vec<EventRecord>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(EventRecord::parse_line(trimmed, k + 1)?);
    }
    Ok(out)
}
