use std::fmt::Write as _;

use serde::Serialize;

use crate::graph::EdgeRef;
use crate::io::{fmt17, serialize_f64};
use crate::soliton::SolitonProfile;

/// One line of a condition checklist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub id: String,
    pub description: String,
    /// Nonnegative; zero means the condition holds exactly.
    #[serde(serialize_with = "serialize_f64")]
    pub residual: f64,
    pub pass: bool,
    /// Whether the entry takes part in the overall verdict.
    pub gating: bool,
    /// Edges blamed for a failure. Empty for global conditions or on pass.
    #[serde(serialize_with = "serialize_edges")]
    pub edges: Vec<EdgeRef>,
}

fn serialize_edges<S: serde::Serializer>(edges: &[EdgeRef], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(edges.iter().map(|e| e.to_string()))
}

impl ConditionEntry {
    pub(crate) fn new(id: &str, description: &str, residual: f64, pass: bool) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            residual,
            pass,
            gating: true,
            edges: Vec::new(),
        }
    }

    pub(crate) fn blame(mut self, edges: Vec<EdgeRef>) -> Self {
        if !self.pass {
            self.edges = edges;
        }
        self
    }

    pub(crate) fn advisory(mut self) -> Self {
        self.gating = false;
        self
    }
}

/// Per-edge wave data attached to a passing report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSummary {
    #[serde(serialize_with = "serialize_edge")]
    pub edge: EdgeRef,
    #[serde(serialize_with = "serialize_f64")]
    pub amplitude: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub width_rate: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub c: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub y0: f64,
}

fn serialize_edge<S: serde::Serializer>(e: &EdgeRef, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `main-theorem` or `y-junction`.
    pub kind: String,
    #[serde(serialize_with = "serialize_f64")]
    pub tolerance: f64,
    pub pass: bool,
    pub conditions: Vec<ConditionEntry>,
    /// The explicit wave, one profile per edge in graph order, on pass.
    #[serde(skip)]
    pub profiles: Option<Vec<(EdgeRef, SolitonProfile)>>,
    #[serde(rename = "profiles", skip_serializing_if = "Option::is_none")]
    summaries: Option<Vec<ProfileSummary>>,
}

impl ConditionReport {
    pub(crate) fn new(
        kind: &str,
        tolerance: f64,
        conditions: Vec<ConditionEntry>,
        build: impl FnOnce() -> Option<Vec<(EdgeRef, SolitonProfile)>>,
    ) -> Self {
        let pass = conditions.iter().filter(|c| c.gating).all(|c| c.pass);
        let profiles = if pass { build() } else { None };
        let summaries = profiles.as_ref().map(|ps| {
            ps.iter()
                .map(|(edge, p)| ProfileSummary {
                    edge: *edge,
                    amplitude: p.amplitude(),
                    width_rate: p.width_rate(),
                    c: p.speed(),
                    y0: p.y0(),
                })
                .collect()
        });
        Self {
            kind: kind.into(),
            tolerance,
            pass,
            conditions,
            profiles,
            summaries,
        }
    }

    pub fn entry(&self, id: &str) -> Option<&ConditionEntry> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// Ids of the failing gating conditions, in checklist order.
    pub fn failed(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| c.gating && !c.pass)
            .map(|c| c.id.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<[String; 5]> = vec![[
            "id".into(),
            "verdict".into(),
            "residual".into(),
            "edges".into(),
            "condition".into(),
        ]];
        for c in &self.conditions {
            let verdict = match (c.pass, c.gating) {
                (true, true) => "pass",
                (false, true) => "FAIL",
                (true, false) => "ok (info)",
                (false, false) => "off (info)",
            };
            let edges: Vec<String> = c.edges.iter().map(|e| e.to_string()).collect();
            rows.push([
                c.id.clone(),
                verdict.into(),
                fmt17(c.residual),
                if edges.is_empty() {
                    "-".into()
                } else {
                    edges.join(",")
                },
                c.description.clone(),
            ]);
        }
        let mut width = [0; 5];
        for r in &rows {
            for (w, cell) in width.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} check, tolerance {}",
            self.kind,
            fmt17(self.tolerance)
        );
        for r in &rows {
            let mut line = String::new();
            for (i, cell) in r.iter().enumerate() {
                if i + 1 == r.len() {
                    line.push_str(cell);
                } else {
                    let pad = width[i] - cell.chars().count();
                    line.push_str(cell);
                    line.push_str(&" ".repeat(pad + 2));
                }
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}
