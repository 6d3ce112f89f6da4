//! Text formats: Pauli strings, `.stab` group files and partition strings.
//!
//! A `.stab` file looks like
//!
//! ```text
//! # Bell pair
//! n 2
//! +XX
//! +ZZ
//! ```
//!
//! Partition strings are `A=0,1;B=2,3` or `A1=0;A2=1;B1=2;B2=3`; every qubit
//! must appear in exactly one block.

use std::fmt;
use std::str::FromStr;

use crate::bipartite::Bipartition;
use crate::error::{Error, Result};
use crate::pauli::{Pauli1, PauliOperator};
use crate::stab_group::StabilizerGroup;
use crate::superadditivity::FourWayPartition;

impl fmt::Display for PauliOperator {
    /// Sign (`+`, `-`, `+i`, `-i`) followed by one symbol per qubit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign_exp() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        for q in 0..self.n() {
            let c = match self.get(q) {
                Pauli1::I => 'I',
                Pauli1::X => 'X',
                Pauli1::Y => 'Y',
                Pauli1::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Accepts an optional sign (`+`, `-`, `+i`, `-i`, `i`) and I/X/Y/Z symbols.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (k, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-').or_else(|| s.strip_prefix('\u{2212}')) {
            (2, rest)
        } else {
            (0, s)
        };
        let factors = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli1::I),
                'X' => Ok(Pauli1::X),
                'Y' => Ok(Pauli1::Y),
                'Z' => Ok(Pauli1::Z),
                other => Err(Error::Parse {
                    line: 0,
                    msg: format!("bad Pauli symbol {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliOperator::from_factors(&factors, false).times_i_pow(k))
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a `.stab` document into its qubit count and generator list, without
/// checking group validity.
pub fn parse_generators(text: &str) -> Result<(usize, Vec<(usize, PauliOperator)>)> {
    let mut n: Option<usize> = None;
    let mut gens = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(count) = n else {
            let rest = line
                .strip_prefix('n')
                .ok_or_else(|| parse_err(line_no, "expected header `n <qubits>`"))?;
            let value = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, "qubit count is not a number"))?;
            if value == 0 {
                return Err(parse_err(line_no, "qubit count must be at least 1"));
            }
            n = Some(value);
            continue;
        };
        let mut chars = line.chars();
        let negative = match chars.next() {
            Some('+') => false,
            Some('-') => true,
            _ => return Err(parse_err(line_no, "generator must start with `+` or `-`")),
        };
        let body: Vec<char> = chars.collect();
        if body.len() != count {
            return Err(parse_err(
                line_no,
                format!("expected {count} Pauli symbols, found {}", body.len()),
            ));
        }
        let mut factors = Vec::with_capacity(count);
        for c in body {
            factors.push(match c {
                'I' => Pauli1::I,
                'X' => Pauli1::X,
                'Y' => Pauli1::Y,
                'Z' => Pauli1::Z,
                other => return Err(parse_err(line_no, format!("bad Pauli symbol {other:?}"))),
            });
        }
        gens.push((line_no, PauliOperator::from_factors(&factors, negative)));
    }
    let n = n.ok_or_else(|| parse_err(1, "missing header `n <qubits>`"))?;
    Ok((n, gens))
}

/// Parses a `.stab` document into a validated group. Diagnostics name the
/// offending line.
pub fn parse_stab_file(text: &str) -> Result<StabilizerGroup> {
    let (n, gens) = parse_generators(text)?;
    let lines: Vec<usize> = gens.iter().map(|(l, _)| *l).collect();
    let ops: Vec<PauliOperator> = gens.into_iter().map(|(_, p)| p).collect();
    StabilizerGroup::new(n, ops).map_err(|e| match e {
        Error::NotCommuting(i, j) => parse_err(
            lines[j],
            format!("generator anticommutes with the one on line {}", lines[i]),
        ),
        Error::Dependent(i) => parse_err(lines[i], "generator is dependent on earlier lines"),
        Error::Contradiction => parse_err(
            *lines.last().unwrap_or(&1),
            "generators produce -I (no state is stabilized)",
        ),
        other => other,
    })
}

/// Serializes a group in `.stab` syntax, one generator per line.
pub fn format_stab_file(group: &StabilizerGroup) -> String {
    let mut out = format!("n {}\n", group.n());
    for g in group.generators() {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

fn parse_blocks(layout: &str, n: usize, names: &[&str]) -> Result<Vec<Vec<usize>>> {
    let mut blocks: Vec<Option<Vec<usize>>> = vec![None; names.len()];
    for part in layout.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, list) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidPartition(format!("block `{part}` lacks `=`")))?;
        let name = name.trim();
        let slot = names
            .iter()
            .position(|&b| b == name)
            .ok_or_else(|| Error::InvalidPartition(format!("unknown block `{name}`")))?;
        if blocks[slot].is_some() {
            return Err(Error::InvalidPartition(format!(
                "block `{name}` given twice"
            )));
        }
        let qubits = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad qubit index `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        blocks[slot] = Some(qubits);
    }
    let blocks: Vec<Vec<usize>> = blocks
        .into_iter()
        .zip(names)
        .map(|(b, name)| {
            b.ok_or_else(|| Error::InvalidPartition(format!("missing block `{name}`")))
        })
        .collect::<Result<_>>()?;
    let mut seen = vec![false; n];
    for &q in blocks.iter().flatten() {
        if q >= n {
            return Err(Error::InvalidPartition(format!(
                "qubit {q} out of range for {n} qubits"
            )));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidPartition(format!(
                "qubit {q} appears more than once"
            )));
        }
    }
    if let Some(q) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!(
            "qubit {q} is not assigned"
        )));
    }
    Ok(blocks)
}

pub fn parse_bipartition(layout: &str, n: usize) -> Result<Bipartition> {
    let mut b = parse_blocks(layout, n, &["A", "B"])?;
    let bb = b.pop().unwrap();
    let aa = b.pop().unwrap();
    Bipartition::new(n, aa, bb)
}

pub fn parse_fourway(layout: &str, n: usize) -> Result<FourWayPartition> {
    let b = parse_blocks(layout, n, &["A1", "A2", "B1", "B2"])?;
    FourWayPartition::new(n, b[0].clone(), b[1].clone(), b[2].clone(), b[3].clone())
}

fn join(qs: &[usize]) -> String {
    qs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn format_bipartition(part: &Bipartition) -> String {
    format!(
        "A={};B={}",
        join(part.a().indices()),
        join(part.b().indices())
    )
}

pub fn format_fourway(fw: &FourWayPartition) -> String {
    format!(
        "A1={};A2={};B1={};B2={}",
        join(fw.a1().indices()),
        join(fw.a2().indices()),
        join(fw.b1().indices()),
        join(fw.b2().indices())
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_string_codec() {
        let p: PauliOperator = "-XYZ".parse().unwrap();
        assert_eq!(p.to_string(), "-XYZ");
        assert!(p.is_negative());
        let q: PauliOperator = "+iZ".parse().unwrap();
        assert_eq!(q.to_string(), "+iZ");
        assert!("XQ".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn stab_file_round_trip() {
        let text = "# Bell\nn 2\n+XX\n-ZZ\n";
        let g = parse_stab_file(text).unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(format_stab_file(&g), "n 2\n+XX\n-ZZ\n");
    }

    #[test]
    fn stab_file_diagnostics() {
        let err = parse_stab_file("n 2\n+XX\n+ZZZ\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_stab_file("n 2\n+XX\n+ZQ\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_stab_file("n 2\nXX\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_stab_file("n 2\n+XX\n# c\n+ZI\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
        let err = parse_stab_file("n 2\n+ZI\n+IZ\n+ZZ\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
        let err = parse_stab_file("+XX\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn partition_strings() {
        let p = parse_bipartition("A=0,1;B=2,3", 4).unwrap();
        assert_eq!(p.a().indices(), &[0, 1]);
        assert_eq!(format_bipartition(&p), "A=0,1;B=2,3");
        assert!(parse_bipartition("A=0;B=0,1", 2).is_err());
        assert!(parse_bipartition("A=0", 2).is_err());
        assert!(parse_bipartition("A=0;B=", 2).is_err());
        assert!(parse_bipartition("A=;B=0,1", 2).is_ok());
        let fw = parse_fourway("A1=0;A2=1;B1=2;B2=3", 4).unwrap();
        assert_eq!(format_fourway(&fw), "A1=0;A2=1;B1=2;B2=3");
        assert!(parse_fourway("A1=0;A2=1;B1=2", 4).is_err());
    }
}
