use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value as Json};

use super::matrix::cell_json;
use super::{ConformanceMatrix, MatrixCell, TriageVerdict};
use crate::aasm::PROTOCOLS;
use crate::checker::Verdict;
use crate::ir::Principle;
use crate::models::{APS_LAYERS, APS_PROTOCOLS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Table,
    Structured,
}

impl FromStr for Format {
    type Err = String;

    /// An empty string selects the default table format.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "" | "table" | "table-text" => Ok(Format::Table),
            "structured" | "json" => Ok(Format::Structured),
            other => Err(format!("unknown format `{other}` (expected table or structured)")),
        }
    }
}

fn code(v: TriageVerdict) -> &'static str {
    match v {
        TriageVerdict::SpecFail => "S",
        TriageVerdict::ImplFail => "I",
        TriageVerdict::BothFail => "B",
        TriageVerdict::ModelFail => "M",
        TriageVerdict::AmbiguityFail => "A",
        TriageVerdict::Pass => "",
    }
}

fn glyph(c: &MatrixCell) -> String {
    let tag = c.class.map_or("--", |k| k.short());
    if c.model.is_none() {
        return format!("·:{tag}");
    }
    match c.triage {
        TriageVerdict::Pass => format!("✓:{tag}"),
        v => format!("✗{}:{tag}", code(v)),
    }
}

fn pad(s: &str, width: usize) -> String {
    let n = s.chars().count();
    format!("{s}{}", " ".repeat(width.saturating_sub(n)))
}

fn table(m: &ConformanceMatrix) -> String {
    let mut out = String::from("Conformance matrix\n\n");
    let w0 = PROTOCOLS.iter().map(|p| p.len()).max().unwrap_or(0) + 2;
    let w = 8;
    out.push_str(&pad("", w0));
    for p in Principle::ALL {
        out.push_str(&pad(p.as_str(), w));
    }
    out = out.trim_end().to_string() + "\n";
    for protocol in PROTOCOLS {
        let mut line = pad(protocol, w0);
        for p in Principle::ALL {
            let c = m.cell(protocol, p).expect("matrix is complete");
            line.push_str(&pad(&glyph(c), w));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.push_str(
        "\nLegend: ✓ pass, ✗ finding, · no property for the cell.\n\
         Codes: S spec-fail, I impl-fail, B both-fail, M model-fail, A ambiguity-fail.\n\
         Tags: SM spec-mandated, SR spec-recommended, AH hardening, AC completeness, -- not cataloged.\n",
    );

    out.push_str("\nTotals\n");
    for (v, n) in &m.totals.by_verdict {
        let _ = writeln!(out, "  {:<15}{n}", v.as_str());
    }
    let _ = writeln!(out, "  {:<15}{}", "cells", m.totals.cells);
    let _ = writeln!(out, "  {:<15}{}", "spec-level", m.totals.spec_level);

    out.push_str("\nSnapshots\n");
    for (name, snap) in &m.snapshots {
        let _ = writeln!(out, "  {:<12}{snap}", name);
    }

    out.push_str("\nAPS layer gaps\n");
    let lw = APS_LAYERS.iter().map(|l| l.title().chars().count()).max().unwrap_or(0) + 2;
    let mut head = pad("", lw);
    for p in APS_PROTOCOLS {
        head.push_str(&pad(p, 18));
    }
    out.push_str(head.trim_end());
    out.push('\n');
    for layer in APS_LAYERS {
        let mut line = pad(layer.title(), lw);
        for p in APS_PROTOCOLS {
            let status = m
                .aps
                .iter()
                .find(|c| c.layer == layer && c.protocol == p)
                .map_or("?", |c| c.status.as_str());
            line.push_str(&pad(status, 18));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }

    out.push_str("\nCompositions\n");
    for r in &m.compositions {
        let depth = r.depth.map_or_else(|| "-".to_string(), |d| d.to_string());
        let _ = writeln!(
            out,
            "  {:<24}{:<34}{:<16}depth {depth}",
            r.pattern,
            r.invariant,
            r.verdict.as_str()
        );
    }
    let failing = m.compositions.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let _ = writeln!(out, "  {failing} of {} invariants fail", m.compositions.len());

    out.push_str(
        "\nSpec-level findings count spec-fail, both-fail and ambiguity-fail cells.\n\
         A CS cell carries the worst verdict over the compositions its protocol takes part in.\n",
    );
    out
}

fn structured(m: &ConformanceMatrix) -> String {
    let doc = json!({
        "cells": m.cells.iter().map(cell_json).collect::<Vec<_>>(),
        "totals": {
            "by_verdict": m.totals.by_verdict.iter().map(|(v, n)| (v.as_str().to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
            "cells": m.totals.cells,
            "spec_level": m.totals.spec_level,
        },
        "snapshots": m.snapshots.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "aps": m.aps.iter().map(|c| json!({
            "layer": c.layer.title(),
            "protocol": c.protocol,
            "status": c.status.as_str(),
        })).collect::<Vec<Json>>(),
        "compositions": m.compositions.iter().map(|r| json!({
            "pattern": r.pattern,
            "protocols": [r.protocols.0, r.protocols.1],
            "invariant": r.invariant,
            "verdict": r.verdict.as_str(),
            "depth": r.depth,
            "states": r.states,
        })).collect::<Vec<Json>>(),
        "documents": m.documents.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

pub fn render(m: &ConformanceMatrix, format: Format) -> String {
    match format {
        Format::Table => table(m),
        Format::Structured => structured(m),
    }
}
