//! Line-oriented circuit text format.
//!
//! ```text
//! RSEDCIRC 1 n=8
//! PERM inv perm0
//! PHASE_F f0
//! H 0
//! CX 2 5
//! PHASE_F f0
//! PERM fwd perm0
//! ```
//!
//! The header is optional; without it `n` is one more than the largest
//! qubit index. `#` starts a comment; blank lines are ignored.

use super::{Gate, GateCircuit, PermDirection};
use crate::error::{Error, Result};

pub fn serialize(c: &GateCircuit) -> String {
    let mut out = format!("RSEDCIRC 1 n={}\n", c.num_qubits());
    for g in c.gates() {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn qubit(tok: &str, line: usize) -> Result<u32> {
    tok.parse().map_err(|_| perr(line, format!("invalid qubit index `{tok}`")))
}

fn name(tok: &str, line: usize) -> Result<String> {
    let ok = !tok.is_empty() && tok.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' || ch == '.');
    if !ok {
        return Err(perr(line, format!("invalid reference name `{tok}`")));
    }
    Ok(tok.to_string())
}

fn parse_gate(toks: &[&str], line: usize) -> Result<Gate> {
    let arity = |want: usize| {
        if toks.len() - 1 != want {
            Err(perr(line, format!("`{}` takes {want} operand(s), got {}", toks[0], toks.len() - 1)))
        } else {
            Ok(())
        }
    };
    let g = match toks[0] {
        "H" | "X" | "S" | "T" => {
            arity(1)?;
            let q = qubit(toks[1], line)?;
            match toks[0] {
                "H" => Gate::H(q),
                "X" => Gate::X(q),
                "S" => Gate::S(q),
                _ => Gate::T(q),
            }
        }
        "CX" => {
            arity(2)?;
            Gate::Cx(qubit(toks[1], line)?, qubit(toks[2], line)?)
        }
        "CCX" => {
            arity(3)?;
            Gate::Ccx(qubit(toks[1], line)?, qubit(toks[2], line)?, qubit(toks[3], line)?)
        }
        "PERM" => {
            arity(2)?;
            let dir = match toks[1] {
                "fwd" => PermDirection::Forward,
                "inv" => PermDirection::Inverse,
                other => return Err(perr(line, format!("PERM direction must be fwd or inv, got `{other}`"))),
            };
            Gate::Perm { name: name(toks[2], line)?, dir }
        }
        "PHASE_F" => {
            arity(1)?;
            Gate::PhaseF { name: name(toks[1], line)? }
        }
        "SUBPHASE" => {
            arity(1)?;
            Gate::SubPhase { name: name(toks[1], line)? }
        }
        "SUBU" => {
            arity(1)?;
            Gate::SubU { name: name(toks[1], line)? }
        }
        "PERM_ROUND" => {
            arity(2)?;
            let round = toks[2].parse().map_err(|_| perr(line, format!("invalid round `{}`", toks[2])))?;
            Gate::PermRound { name: name(toks[1], line)?, round }
        }
        other => return Err(perr(line, format!("unknown mnemonic `{other}`"))),
    };
    Ok(g)
}

fn parse_header(toks: &[&str], line: usize) -> Result<Option<u32>> {
    match toks {
        [_, "1"] => Ok(None),
        [_, "1", nspec] => {
            let v = nspec.strip_prefix("n=").ok_or_else(|| perr(line, format!("expected n=<count>, got `{nspec}`")))?;
            v.parse().map(Some).map_err(|_| perr(line, format!("invalid qubit count `{v}`")))
        }
        [_, version, ..] if *version != "1" => Err(perr(line, format!("unsupported format version `{version}`"))),
        _ => Err(perr(line, "malformed RSEDCIRC header")),
    }
}

pub fn parse(text: &str) -> Result<GateCircuit> {
    let mut declared: Option<u32> = None;
    let mut gates: Vec<(usize, Gate)> = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks[0] == "RSEDCIRC" {
            if seen_content {
                return Err(perr(line, "RSEDCIRC header must come first"));
            }
            declared = parse_header(&toks, line)?;
            seen_content = true;
            continue;
        }
        seen_content = true;
        gates.push((line, parse_gate(&toks, line)?));
    }
    let n = match declared {
        Some(n) => n,
        None => gates
            .iter()
            .flat_map(|(_, g)| g.qubits())
            .max()
            .map(|q| q + 1)
            .ok_or_else(|| perr(1, "cannot infer qubit count without a header or qubit gates"))?,
    };
    let mut c = GateCircuit::new(n);
    for (line, g) in gates {
        c.push(g).map_err(|e| perr(line, e.to_string()))?;
    }
    Ok(c)
}
