//! Text and line-delimited JSON renderings of command results. Structured
//! output carries no timings and only sorted maps, so equal inputs give
//! byte-identical output.

use std::fmt::Write as _;
use std::io::Write as _;

use clap::ValueEnum;
use serde_json::{json, Value};
use vault_model::properties::{ExploreReport, Violation};
use vault_model::scenarios::ScenarioResult;
use vault_model::{ActionOutcome, Chain, Trace, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

pub struct Out {
    format: Format,
    buf: String,
}

fn describe(rec: &TraceRecord) -> String {
    format!("block {}: {} {} -> {}", rec.block, rec.sender, rec.action, rec.outcome)
}

impl Out {
    pub fn new(format: Format) -> Out {
        Out {
            format,
            buf: String::new(),
        }
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.buf.push_str(text.as_ref());
        self.buf.push('\n');
    }

    fn json(&mut self, value: Value) {
        let text = serde_json::to_string(&value).expect("json values serialize");
        self.line(text);
    }

    pub fn raw(&mut self, text: &str) {
        self.buf.push_str(text);
    }

    pub fn flush(&mut self) {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(self.buf.as_bytes());
        let _ = stdout.flush();
        self.buf.clear();
    }

    pub fn chain_summary(&mut self, chain: &Chain) {
        match self.format {
            Format::Structured => self.json(json!({
                "record": "vault",
                "block": chain.current_block.to_string(),
                "config": chain.config,
                "funds": chain.vault.funds,
                "pending": chain.vault.ledger.len(),
            })),
            Format::Text => {
                let c = &chain.config;
                self.line(format!(
                    "vault at block {}: delay {}, tier one {}, creator {}, up to {} requests, {} arithmetic",
                    chain.current_block, c.delay, c.t1, c.creator, c.max_ledger_size, c.mode
                ));
            }
        }
    }

    pub fn record(&mut self, rec: &TraceRecord) {
        match self.format {
            Format::Structured => self.line(serde_json::to_string(rec).expect("records serialize")),
            Format::Text => self.line(describe(rec)),
        }
    }

    pub fn divergence(&mut self, line: usize, recorded: &ActionOutcome, replayed: &ActionOutcome) {
        match self.format {
            Format::Structured => self.json(json!({
                "record": "divergence",
                "line": line,
                "recorded": recorded,
                "replayed": replayed,
            })),
            Format::Text => self.line(format!(
                "divergence at line {line}: recorded {recorded}, replayed {replayed}"
            )),
        }
    }

    fn violation(&mut self, v: &Violation) {
        match self.format {
            Format::Structured => self.json(json!({
                "record": "violation",
                "property": v.property,
                "layer": v.property.layer().to_string(),
                "detail": v.detail,
                "state": v.state_digest,
                "witness": v.witness,
            })),
            Format::Text => {
                let at = v
                    .witness
                    .last()
                    .map(|r| format!(" at block {}", r.block))
                    .unwrap_or_default();
                self.line(format!(
                    "property {} ({}) violated{at}: {}",
                    v.property,
                    v.property.description(),
                    v.detail
                ));
            }
        }
    }

    pub fn check_report(&mut self, trace: &Trace, violations: &[Violation]) {
        for v in violations {
            self.violation(v);
        }
        match self.format {
            Format::Structured => self.json(json!({
                "record": "summary",
                "records": trace.len(),
                "violations": violations.len(),
            })),
            Format::Text => self.line(if violations.is_empty() {
                format!("{} records checked, no violations", trace.len())
            } else {
                format!("{} records checked, {} violations", trace.len(), violations.len())
            }),
        }
    }

    pub fn explore_report(&mut self, report: &ExploreReport) {
        match self.format {
            Format::Structured => {
                for v in &report.verdicts {
                    self.json(json!({ "record": "verdict", "verdict": v }));
                }
                for v in &report.violations {
                    self.json(json!({
                        "record": "witness",
                        "property": v.property,
                        "detail": v.detail,
                        "trace": v.witness,
                    }));
                }
                self.json(json!({
                    "record": "summary",
                    "config": report.config,
                    "states": report.states_visited,
                    "transitions": report.transitions,
                    "depth": report.depth_reached,
                    "holding": report.holding(),
                    "properties": report.verdicts.len(),
                }));
            }
            Format::Text => {
                let c = &report.config;
                self.line(format!(
                    "explored {} states and {} transitions to depth {} ({} mode, {} addresses, amounts up to {}, delay {}, {} requests)",
                    report.states_visited,
                    report.transitions,
                    report.depth_reached,
                    c.mode,
                    c.addresses,
                    c.amount_cap,
                    c.delay,
                    c.max_ledger_size
                ));
                if let Some(m) = c.mutation {
                    self.line(format!("vault variant: {m:?}"));
                }
                for v in &report.verdicts {
                    let status = if v.holds {
                        "holds".to_string()
                    } else {
                        format!(
                            "VIOLATED ({} transitions, shortest witness {} actions)",
                            v.violating_transitions,
                            v.shortest_witness.unwrap_or(0)
                        )
                    };
                    self.line(format!(
                        "  {:<4} {:<22} {:<60} {}",
                        v.property,
                        v.property.layer().to_string(),
                        v.description,
                        status
                    ));
                }
                for v in &report.violations {
                    self.line(format!("witness for {}: {}", v.property, v.detail));
                    for rec in &v.witness {
                        self.line(format!("  {}", describe(rec)));
                    }
                }
                self.line(report.summary());
            }
        }
    }

    pub fn scenario_report(&mut self, r: &ScenarioResult) {
        match self.format {
            Format::Structured => {
                for s in &r.stages {
                    self.json(json!({ "record": "stage", "stage": s }));
                }
                self.json(json!({ "record": "scenario", "result": r }));
            }
            Format::Text => {
                let s = &r.spec;
                let mut head = format!("scenario {} ({} mode", s.kind, s.mode);
                let _ = write!(
                    head,
                    ", funds={}, K={}, L={}, n={}, delay={})",
                    s.funds, s.k, s.l, s.n, s.delay
                );
                self.line(head);
                for e in &r.events {
                    self.line(format!("  {e}"));
                }
                if r.violated.is_empty() {
                    self.line("properties: all hold");
                } else {
                    let ids: Vec<String> = r.violated.iter().map(|p| p.to_string()).collect();
                    self.line(format!("properties violated: {}", ids.join(", ")));
                }
                match &r.failure {
                    None => self.line("PASS"),
                    Some(f) => self.line(format!("FAIL {f}")),
                }
            }
        }
    }
}
