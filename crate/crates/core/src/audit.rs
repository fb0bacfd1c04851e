//! Round-by-round transcript of a count.
//!
//! Each [`Event`] is one table row: the priorities (or `E`/`X` markers) seen
//! before acting, then the actions taken. A log can be replayed against its
//! profile to rebuild the final state, checking seat conservation and every
//! recorded priority along the way.

use crate::ballots::BallotProfile;
use crate::engine::{CandidateStatus, CountState, EngineError};
use crate::scalar::Scalar;
use serde_json::{json, Value};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell<T> {
    Priority(T),
    Elected,
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Elect(usize),
    Exclude(usize),
    Restart,
    End,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// A choice in this row was decided by the lowest-index rule.
    pub tie_broken: bool,
    /// An election filled a seat below quota because hopefuls ran out.
    pub forced: bool,
    /// A candidate was elected with no supporting ballots.
    pub zero_support: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event<T> {
    pub step: usize,
    pub cells: Vec<Cell<T>>,
    pub actions: Vec<Action>,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditLog<T> {
    initial: Vec<CandidateStatus>,
    events: Vec<Event<T>>,
}

impl<T: Scalar> AuditLog<T> {
    pub fn new(initial: Vec<CandidateStatus>) -> Self {
        AuditLog { initial, events: Vec::new() }
    }

    /// Statuses at the start of the count.
    pub fn initial_status(&self) -> &[CandidateStatus] {
        &self.initial
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub(crate) fn push(&mut self, event: Event<T>) {
        self.events.push(event);
    }

    pub(crate) fn last_mut(&mut self) -> &mut Event<T> {
        self.events.last_mut().expect("log has an open row")
    }

    pub fn tie_broken(&self) -> bool {
        self.events.iter().any(|e| e.flags.tie_broken)
    }

    /// Candidates shown as table columns: everyone not excluded before the
    /// count started.
    pub fn columns(&self) -> Vec<usize> {
        (0..self.initial.len())
            .filter(|&c| self.initial[c] != CandidateStatus::Excluded)
            .collect()
    }

    /// Priority of `candidate` in the row for `step` (1-based), if shown as a
    /// number.
    pub fn priority_at(&self, step: usize, candidate: usize) -> Option<&T> {
        match self.events.get(step.checked_sub(1)?)?.cells.get(candidate)? {
            Cell::Priority(p) => Some(p),
            _ => None,
        }
    }

    /// Re-runs the recorded actions on a fresh state, checking that every row
    /// snapshot matches and that seat loads sum to the elected seat count
    /// after every action.
    pub fn replay<'p>(&self, profile: &'p BallotProfile) -> Result<CountState<'p, T>, EngineError> {
        let mut state = CountState::with_status(profile, self.initial.clone())?;
        for event in &self.events {
            let tally = state.assign_support();
            state.record(&tally);
            if state.log().events().last().map(|e| &e.cells) != Some(&event.cells) {
                return Err(EngineError::ReplayMismatch { step: event.step });
            }
            for action in &event.actions {
                match *action {
                    Action::Elect(c) => state.elect(c)?,
                    Action::Exclude(c) => state.exclude(c)?,
                    Action::Restart => state.restart(),
                    Action::End => state.end(),
                }
                state.check_conservation()?;
            }
            if event.flags.tie_broken {
                state.flag_tie();
            }
            if event.flags.forced {
                state.flag_forced();
            }
            if state.log().events().last() != Some(event) {
                return Err(EngineError::ReplayMismatch { step: event.step });
            }
        }
        Ok(state)
    }

    /// Aligned text table in the layout `step | candidates... | Actions`.
    /// Previously elected candidates carry a `*` in the header. Inexact
    /// decimals end in `~`.
    pub fn render_table(&self, profile: &BallotProfile, caption: &str) -> String {
        let columns = self.columns();
        let mut rows: Vec<Vec<String>> = Vec::with_capacity(self.events.len() + 1);
        let mut header = vec!["step".to_string()];
        header.extend(columns.iter().map(|&c| {
            let mark = if self.initial[c] == CandidateStatus::PreviouslyElected { "*" } else { "" };
            format!("{}{mark}", profile.name(c))
        }));
        header.push("Actions".into());
        rows.push(header);
        for event in &self.events {
            let mut row = vec![event.step.to_string()];
            row.extend(columns.iter().map(|&c| render_cell(&event.cells[c])));
            row.push(render_actions(profile, event));
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        if !caption.is_empty() {
            let _ = writeln!(out, "{caption}");
        }
        for row in rows {
            let last = row.len() - 1;
            let mut line = String::new();
            for (i, text) in row.iter().enumerate() {
                if i == last {
                    line.push_str(text);
                } else {
                    let _ = write!(line, "{text:<w$}  ", w = widths[i]);
                }
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }

    /// Structured form with exact `"num/den"` priorities.
    pub fn to_json(&self, profile: &BallotProfile) -> Value {
        let columns = self.columns();
        let events: Vec<Value> = self
            .events
            .iter()
            .map(|e| {
                let cells: Vec<Value> = columns
                    .iter()
                    .map(|&c| {
                        let value = match &e.cells[c] {
                            Cell::Priority(p) => Value::String(p.to_exact_string()),
                            Cell::Elected => Value::String("E".into()),
                            Cell::Excluded => Value::String("X".into()),
                        };
                        json!({ "candidate": profile.name(c), "priority": value })
                    })
                    .collect();
                let actions: Vec<Value> = e
                    .actions
                    .iter()
                    .map(|a| match *a {
                        Action::Elect(c) => json!({ "elect": profile.name(c) }),
                        Action::Exclude(c) => json!({ "exclude": profile.name(c) }),
                        Action::Restart => json!("restart"),
                        Action::End => json!("end"),
                    })
                    .collect();
                json!({
                    "step": e.step,
                    "cells": cells,
                    "actions": actions,
                    "tie_broken": e.flags.tie_broken,
                    "forced": e.flags.forced,
                    "zero_support": e.flags.zero_support,
                })
            })
            .collect();
        let previously_elected: Vec<&str> = (0..self.initial.len())
            .filter(|&c| self.initial[c] == CandidateStatus::PreviouslyElected)
            .map(|c| profile.name(c))
            .collect();
        json!({
            "columns": columns.iter().map(|&c| profile.name(c)).collect::<Vec<_>>(),
            "previously_elected": previously_elected,
            "events": events,
        })
    }
}

pub fn render_cell<T: Scalar>(cell: &Cell<T>) -> String {
    match cell {
        Cell::Priority(p) => {
            let (text, inexact) = p.to_decimal(2);
            if inexact {
                text + "~"
            } else {
                text
            }
        }
        Cell::Elected => "E".into(),
        Cell::Excluded => "X".into(),
    }
}

fn render_actions<T>(profile: &BallotProfile, event: &Event<T>) -> String {
    let parts: Vec<String> = event
        .actions
        .iter()
        .filter_map(|a| match *a {
            Action::Elect(c) => Some(format!("Elect {}", profile.name(c))),
            Action::Exclude(c) => Some(format!("Exclude {}", profile.name(c))),
            Action::Restart => Some("Restart".into()),
            Action::End => None,
        })
        .collect();
    let notes: Vec<&str> = [
        (event.flags.tie_broken, "tie"),
        (event.flags.forced, "forced"),
        (event.flags.zero_support, "no support"),
    ]
    .iter()
    .filter(|(on, _)| *on)
    .map(|(_, n)| *n)
    .collect();
    let mut text = parts.join(", ");
    if !notes.is_empty() {
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(&format!("({})", notes.join(", ")));
    }
    text
}
