//! Text and JSON rendering. Exact `p/q` strings are authoritative; decimals
//! are for reading only.

use std::fmt::Write;

use iivcg_core::audit::{AuditReport, Status};
use iivcg_core::engine::Verdict;
use iivcg_core::first_price::PoaReport;
use iivcg_core::rational::to_decimal_string;
use iivcg_core::{Rational, Setting};
use serde::Serialize;
use serde_json::{json, Value};

const DIGITS: usize = 6;

pub fn exact(r: &Rational) -> String {
    r.to_string()
}

pub fn decimal(r: &Rational) -> String {
    to_decimal_string(r, DIGITS)
}

pub fn with_decimal(r: &Rational) -> String {
    if r.is_integer() {
        exact(r)
    } else {
        format!("{} (≈ {})", exact(r), decimal(r))
    }
}

pub fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

pub fn named_values(setting: &Setting, values: &[Rational]) -> Value {
    Value::Array(
        setting
            .principals()
            .iter()
            .zip(values)
            .map(|(p, t)| json!({ "principal": p.name, "payment": exact(t) }))
            .collect(),
    )
}

pub fn verdict_word(v: &Verdict) -> &'static str {
    if v.is_possible() {
        "Possible"
    } else {
        "Impossible"
    }
}

pub fn verdict_text(setting: &Setting, verdict: &Verdict) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", verdict_word(verdict));
    for c in verdict.checks() {
        let name = &setting.actions()[c.action].name;
        let k = c.k.as_ref().map_or("none".into(), with_decimal);
        let m = c
            .min_sum_m
            .as_ref()
            .map_or("never efficient".into(), with_decimal);
        let mark = if c.passed { "ok" } else { "FAIL" };
        let _ = write!(out, "  {name}: k = {k}, min Σm = {m} [{mark}]");
        if let Some(note) = &c.note {
            let _ = write!(out, " ({note})");
        }
        out.push('\n');
    }
    if let Some(w) = verdict.witness() {
        let _ = writeln!(
            out,
            "witness: at bids {} action {} is efficient and needs {}, but individual rationality allows only {}",
            w.profile,
            setting.actions()[w.action].name,
            with_decimal(&w.k),
            with_decimal(&w.sum_m)
        );
    }
    out
}

fn status_line(out: &mut String, setting: &Setting, label: &str, status: &Status) {
    match status {
        Status::Pass => {
            let _ = writeln!(out, "  {label:<22} pass");
        }
        Status::NotApplicable => {
            let _ = writeln!(out, "  {label:<22} n/a");
        }
        Status::Fail(c) => {
            let _ = write!(out, "  {label:<22} FAIL at bids {}", c.profile);
            if let Some(l) = c.principal {
                let _ = write!(out, ", principal {}", setting.principals()[l].name);
            }
            if let Some(d) = &c.deviation {
                let _ = write!(out, ", deviation {d}");
            }
            let _ = writeln!(out, ": {}", c.detail);
        }
    }
}

pub fn audit_text(setting: &Setting, report: &AuditReport) -> String {
    let mut out = String::new();
    let g = &report.grid;
    let _ = writeln!(
        out,
        "audit of {} on {} profiles (lattice {}, {} random points, seed {}, truncation at {})",
        report.contract,
        g.profiles,
        g.resolution,
        g.random_points,
        g.seed,
        exact(&g.truncation_bound)
    );
    status_line(&mut out, setting, "truthfulness", &report.truthful);
    status_line(&mut out, setting, "individual rationality", &report.ir);
    status_line(&mut out, setting, "limited liability", &report.ll);
    status_line(&mut out, setting, "  (aggregate)", &report.aggregate_ll);
    status_line(&mut out, setting, "efficiency", &report.efficiency);
    status_line(&mut out, setting, "payment identity", &report.identity);
    let _ = writeln!(
        out,
        "{}",
        if report.all_pass() {
            "all properties hold on the grid"
        } else {
            "some properties fail"
        }
    );
    out
}

pub fn poa_text(setting: &Setting, r: &PoaReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "equilibrium action {} with welfare {}",
        setting.actions()[r.eq_action].name,
        with_decimal(&r.eq_welfare)
    );
    let _ = writeln!(
        out,
        "optimal action {} with welfare {}",
        setting.actions()[r.opt_action].name,
        with_decimal(&r.opt_welfare)
    );
    let _ = writeln!(
        out,
        "ratio {}",
        r.ratio.as_ref().map_or("undefined".into(), with_decimal)
    );
    out
}
