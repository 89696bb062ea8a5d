//! The line-oriented trace format.
//!
//! A trace is a plain-text record of one run:
//!
//! ```text
//! # disperse-trace v1
//! # graph n=3 m=3 delta=2
//! # source 0 effective 0
//! # k 3 L 3
//! # ids 1 2 3
//! R 1 1 | 1@0:M0:A 2@0:S:A 3@0:M0:A | 0:+0/-2 1:+2/-0
//! R 2 2 | 1@1:S:A 2@0:S:A 3@1:S:A |
//! E 77 boundary 1
//! # outcome Dispersed
//! # rounds 283
//! # class_moves 2 16 0 3 5 3
//! # final 0:3 1:1 2:2
//! ```
//!
//! Each `R` line shows the round, its dedicated class, every robot ascending
//! by id (`id@node:action:status` with the start-of-round node and post-step
//! status), and the per-node movement tallies `node:+entered/-left` for nodes
//! touched this round. `E` lines mark iteration boundaries and follow the
//! boundary round's own `R` line. `V` lines (verbosity 2) carry free-form
//! event notes and are ignored by comparisons.

use std::fmt::Write as _;

use thiserror::Error;

use crate::protocol::Action;

/// Fixed per-run facts, rendered as the trace header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub source: usize,
    pub effective: usize,
    pub k: usize,
    pub l: u64,
    /// Robot ids in input order.
    pub ids: Vec<u64>,
}

/// One robot's entry on an `R` line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RobotLine {
    pub id: u64,
    /// Node occupied at the start of the round.
    pub node: usize,
    pub action: Action,
    /// Post-step status letter.
    pub status: char,
}

/// One full `R` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundLine {
    pub round: u64,
    pub class: u8,
    pub robots: Vec<RobotLine>,
    /// (node, entered, left) for nodes with any movement, ascending by node.
    pub tallies: Vec<(usize, u32, u32)>,
}

/// One body line of a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceLine {
    Round(RoundLine),
    Boundary { round: u64, iter: usize },
    /// Free-form event note, only rendered at verbosity 2.
    Note { round: u64, text: String },
}

/// Trailing summary lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFooter {
    pub outcome: String,
    pub rounds: u64,
    pub class_moves: [u64; 6],
    /// (node, robot id), ascending by node.
    pub final_positions: Vec<(usize, u64)>,
}

/// A complete trace; `footer` is absent while a run is still in progress.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub lines: Vec<TraceLine>,
    pub footer: Option<TraceFooter>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {msg}")]
pub struct TraceParseError {
    pub line: usize,
    pub msg: String,
}

impl Trace {
    /// Render to text. Verbosity 1 emits header, `R`/`E` lines, and footer;
    /// verbosity 2 adds `V` note lines.
    pub fn render(&self, verbosity: u8) -> String {
        let mut out = String::new();
        let h = &self.header;
        out.push_str("# disperse-trace v1\n");
        let _ = writeln!(out, "# graph n={} m={} delta={}", h.n, h.m, h.delta);
        let _ = writeln!(out, "# source {} effective {}", h.source, h.effective);
        let _ = writeln!(out, "# k {} L {}", h.k, h.l);
        out.push_str("# ids");
        for id in &h.ids {
            let _ = write!(out, " {id}");
        }
        out.push('\n');
        for line in &self.lines {
            match line {
                TraceLine::Round(r) => {
                    let _ = write!(out, "R {} {} |", r.round, r.class);
                    for rb in &r.robots {
                        match rb.action {
                            Action::Stay => {
                                let _ = write!(out, " {}@{}:S:{}", rb.id, rb.node, rb.status);
                            }
                            Action::Move(p) => {
                                let _ =
                                    write!(out, " {}@{}:M{}:{}", rb.id, rb.node, p, rb.status);
                            }
                        }
                    }
                    out.push_str(" |");
                    for (node, entered, left) in &r.tallies {
                        let _ = write!(out, " {node}:+{entered}/-{left}");
                    }
                    out.push('\n');
                }
                TraceLine::Boundary { round, iter } => {
                    let _ = writeln!(out, "E {round} boundary {iter}");
                }
                TraceLine::Note { round, text } => {
                    if verbosity >= 2 {
                        let _ = writeln!(out, "V {round} {text}");
                    }
                }
            }
        }
        if let Some(f) = &self.footer {
            let _ = writeln!(out, "# outcome {}", f.outcome);
            let _ = writeln!(out, "# rounds {}", f.rounds);
            out.push_str("# class_moves");
            for c in &f.class_moves {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
            out.push_str("# final");
            for (node, id) in &f.final_positions {
                let _ = write!(out, " {node}:{id}");
            }
            out.push('\n');
        }
        out
    }

    /// Parse rendered text back into a structured trace.
    pub fn parse(text: &str) -> Result<Trace, TraceParseError> {
        let fail = |line: usize, msg: &str| TraceParseError {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| fail(1, "empty input"))?;
        if first != "# disperse-trace v1" {
            return Err(fail(1, "missing version header"));
        }

        let mut header = TraceHeader {
            n: 0,
            m: 0,
            delta: 0,
            source: 0,
            effective: 0,
            k: 0,
            l: 0,
            ids: Vec::new(),
        };
        let mut body = Vec::new();
        let mut outcome = None;
        let mut rounds = None;
        let mut class_moves = None;
        let mut final_positions = None;

        for (idx, raw) in lines {
            let ln = idx + 1;
            let bad = |msg: &str| fail(ln, msg);
            if let Some(rest) = raw.strip_prefix("# ") {
                let mut words = rest.split_whitespace();
                match words.next() {
                    Some("graph") => {
                        for word in words {
                            let (key, val) = word
                                .split_once('=')
                                .ok_or_else(|| bad("graph field without '='"))?;
                            let val =
                                val.parse().map_err(|_| bad("graph field not a number"))?;
                            match key {
                                "n" => header.n = val,
                                "m" => header.m = val,
                                "delta" => header.delta = val,
                                _ => return Err(bad("unknown graph field")),
                            }
                        }
                    }
                    Some("source") => {
                        let toks: Vec<_> = words.collect();
                        if toks.len() != 3 || toks[1] != "effective" {
                            return Err(bad("malformed source line"));
                        }
                        header.source =
                            toks[0].parse().map_err(|_| bad("bad source node"))?;
                        header.effective =
                            toks[2].parse().map_err(|_| bad("bad effective node"))?;
                    }
                    Some("k") => {
                        let toks: Vec<_> = words.collect();
                        if toks.len() != 3 || toks[1] != "L" {
                            return Err(bad("malformed k line"));
                        }
                        header.k = toks[0].parse().map_err(|_| bad("bad k"))?;
                        header.l = toks[2].parse().map_err(|_| bad("bad L"))?;
                    }
                    Some("ids") => {
                        header.ids = words
                            .map(|w| w.parse().map_err(|_| bad("bad id")))
                            .collect::<Result<_, _>>()?;
                    }
                    Some("outcome") => {
                        outcome = Some(
                            words
                                .next()
                                .ok_or_else(|| bad("missing outcome"))?
                                .to_string(),
                        );
                    }
                    Some("rounds") => {
                        rounds = Some(
                            words
                                .next()
                                .ok_or_else(|| bad("missing round count"))?
                                .parse()
                                .map_err(|_| bad("bad round count"))?,
                        );
                    }
                    Some("class_moves") => {
                        let vals: Vec<u64> = words
                            .map(|w| w.parse().map_err(|_| bad("bad class move count")))
                            .collect::<Result<_, _>>()?;
                        let arr: [u64; 6] = vals
                            .try_into()
                            .map_err(|_| bad("expected six class move counts"))?;
                        class_moves = Some(arr);
                    }
                    Some("final") => {
                        let mut pos = Vec::new();
                        for word in words {
                            let (node, id) = word
                                .split_once(':')
                                .ok_or_else(|| bad("final entry without ':'"))?;
                            pos.push((
                                node.parse().map_err(|_| bad("bad final node"))?,
                                id.parse().map_err(|_| bad("bad final id"))?,
                            ));
                        }
                        final_positions = Some(pos);
                    }
                    _ => return Err(bad("unknown header line")),
                }
            } else if let Some(rest) = raw.strip_prefix("R ") {
                body.push(TraceLine::Round(parse_round(rest, ln)?));
            } else if let Some(rest) = raw.strip_prefix("E ") {
                let toks: Vec<_> = rest.split_whitespace().collect();
                if toks.len() != 3 || toks[1] != "boundary" {
                    return Err(bad("malformed boundary line"));
                }
                body.push(TraceLine::Boundary {
                    round: toks[0].parse().map_err(|_| bad("bad boundary round"))?,
                    iter: toks[2].parse().map_err(|_| bad("bad boundary index"))?,
                });
            } else if let Some(rest) = raw.strip_prefix("V ") {
                let (round, text) = rest
                    .split_once(' ')
                    .ok_or_else(|| bad("malformed note line"))?;
                body.push(TraceLine::Note {
                    round: round.parse().map_err(|_| bad("bad note round"))?,
                    text: text.to_string(),
                });
            } else if !raw.trim().is_empty() {
                return Err(bad("unrecognized line"));
            }
        }

        let footer = match (outcome, rounds, class_moves, final_positions) {
            (Some(outcome), Some(rounds), Some(class_moves), Some(final_positions)) => {
                Some(TraceFooter {
                    outcome,
                    rounds,
                    class_moves,
                    final_positions,
                })
            }
            (None, None, None, None) => None,
            _ => return Err(fail(0, "incomplete footer")),
        };
        Ok(Trace {
            header,
            lines: body,
            footer,
        })
    }
}

fn parse_round(rest: &str, ln: usize) -> Result<RoundLine, TraceParseError> {
    let bad = |msg: &str| TraceParseError {
        line: ln,
        msg: msg.to_string(),
    };
    let (head, tail) = rest
        .split_once(" | ")
        .ok_or_else(|| bad("round line without robot segment"))?;
    let mut head_words = head.split_whitespace();
    let round = head_words
        .next()
        .ok_or_else(|| bad("missing round"))?
        .parse()
        .map_err(|_| bad("bad round number"))?;
    let class = head_words
        .next()
        .ok_or_else(|| bad("missing class"))?
        .parse()
        .map_err(|_| bad("bad class"))?;
    if head_words.next().is_some() {
        return Err(bad("extra tokens before robot segment"));
    }
    let (robot_part, tally_part) = tail
        .split_once(" |")
        .ok_or_else(|| bad("round line without tally separator"))?;
    let mut robots = Vec::new();
    for tok in robot_part.split_whitespace() {
        let (id, rest) = tok.split_once('@').ok_or_else(|| bad("robot entry without '@'"))?;
        let mut parts = rest.split(':');
        let node = parts.next().ok_or_else(|| bad("robot entry without node"))?;
        let act = parts.next().ok_or_else(|| bad("robot entry without action"))?;
        let st = parts.next().ok_or_else(|| bad("robot entry without status"))?;
        if parts.next().is_some() {
            return Err(bad("robot entry with extra fields"));
        }
        let action = if act == "S" {
            Action::Stay
        } else if let Some(port) = act.strip_prefix('M') {
            Action::Move(port.parse().map_err(|_| bad("bad move port"))?)
        } else {
            return Err(bad("unknown action"));
        };
        if st.chars().count() != 1 {
            return Err(bad("status must be one letter"));
        }
        robots.push(RobotLine {
            id: id.parse().map_err(|_| bad("bad robot id"))?,
            node: node.parse().map_err(|_| bad("bad robot node"))?,
            action,
            status: st.chars().next().unwrap(),
        });
    }
    let mut tallies = Vec::new();
    for tok in tally_part.split_whitespace() {
        let (node, counts) = tok.split_once(':').ok_or_else(|| bad("tally without ':'"))?;
        let counts = counts
            .strip_prefix('+')
            .ok_or_else(|| bad("tally without '+'"))?;
        let (entered, left) = counts
            .split_once("/-")
            .ok_or_else(|| bad("tally without '/-'"))?;
        tallies.push((
            node.parse().map_err(|_| bad("bad tally node"))?,
            entered.parse().map_err(|_| bad("bad entered count"))?,
            left.parse().map_err(|_| bad("bad left count"))?,
        ));
    }
    Ok(RoundLine {
        round,
        class,
        robots,
        tallies,
    })
}
