//! Line-oriented text checkpoints.
//!
//! ```text
//! coex-mlp 1
//! trunk <layers>
//! layer <in> <out> <relu|identity>
//! <row-major weights>
//! <biases>
//! ...
//! value <layers>        (dueling only, same layer blocks)
//! advantage <layers>
//! end
//! ```
//!
//! Floats use the shortest representation that parses back to the same bits.

use std::fmt::Write as _;

use super::mlp::{Activation, Dense, DuelingHead, LayerSpec, Mlp};
use crate::error::{CoexError, Result};

pub const CHECKPOINT_MAGIC: &str = "coex-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

fn write_block(out: &mut String, name: &str, layers: &[Dense]) {
    let _ = writeln!(out, "{name} {}", layers.len());
    for l in layers {
        let _ = writeln!(out, "layer {} {} {}", l.spec.input_width, l.spec.output_width, l.spec.activation.name());
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{}", join(&l.weights));
        let _ = writeln!(out, "{}", join(&l.biases));
    }
}

pub fn to_text(net: &Mlp) -> String {
    let mut out = format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n");
    write_block(&mut out, "trunk", &net.trunk);
    if let Some(h) = &net.dueling_head {
        write_block(&mut out, "value", &h.value);
        write_block(&mut out, "advantage", &h.advantage);
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| CoexError::Parse("unexpected end of checkpoint".into()))
    }
}

fn parse_floats(line: &str, expected: usize, lineno: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| CoexError::Parse(format!("line {lineno}: {e}"))))
        .collect::<Result<_>>()?;
    if v.len() != expected {
        return Err(CoexError::Parse(format!("line {lineno}: expected {expected} values, got {}", v.len())));
    }
    Ok(v)
}

fn read_block(lines: &mut Lines<'_>, name: &str, header: &str, lineno: usize) -> Result<Vec<Dense>> {
    let mut parts = header.split_whitespace();
    if parts.next() != Some(name) {
        return Err(CoexError::Parse(format!("line {lineno}: expected '{name}'")));
    }
    let count: usize = parts
        .next()
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| CoexError::Parse(format!("line {lineno}: missing layer count")))?;
    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, l) = lines.next()?;
        let f: Vec<&str> = l.split_whitespace().collect();
        let bad = || CoexError::Parse(format!("line {n}: bad layer header '{l}'"));
        if f.len() != 4 || f[0] != "layer" {
            return Err(bad());
        }
        let input_width: usize = f[1].parse().map_err(|_| bad())?;
        let output_width: usize = f[2].parse().map_err(|_| bad())?;
        let activation = match f[3] {
            "relu" => Activation::Relu,
            "identity" => Activation::Identity,
            _ => return Err(bad()),
        };
        let spec = LayerSpec { input_width, output_width, activation };
        let (n, wl) = lines.next()?;
        let weights = parse_floats(wl, input_width * output_width, n)?;
        let (n, bl) = lines.next()?;
        let biases = parse_floats(bl, output_width, n)?;
        layers.push(Dense::from_parts(spec, weights, biases)?);
    }
    Ok(layers)
}

pub fn from_text(text: &str) -> Result<Mlp> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (_, magic) = lines.next()?;
    let mut m = magic.split_whitespace();
    if m.next() != Some(CHECKPOINT_MAGIC) {
        return Err(CoexError::Parse("not a coex-mlp checkpoint".into()));
    }
    match m.next().and_then(|v| v.parse::<u32>().ok()) {
        Some(CHECKPOINT_VERSION) => {}
        other => return Err(CoexError::Parse(format!("unsupported checkpoint version {other:?}"))),
    }
    let (n, h) = lines.next()?;
    let trunk = read_block(&mut lines, "trunk", h, n)?;
    let (n, h) = lines.next()?;
    let dueling_head = if h.trim() == "end" {
        None
    } else {
        let value = read_block(&mut lines, "value", h, n)?;
        let (n, h) = lines.next()?;
        let advantage = read_block(&mut lines, "advantage", h, n)?;
        let (n, h) = lines.next()?;
        if h.trim() != "end" {
            return Err(CoexError::Parse(format!("line {n}: expected 'end'")));
        }
        Some(DuelingHead { value, advantage })
    };
    Mlp::new(trunk, dueling_head)
}
