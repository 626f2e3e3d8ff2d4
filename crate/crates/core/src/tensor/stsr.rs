//! The `.stsr` text format.
//!
//! ```text
//! stsr 1
//! order 4 dim 2
//! # one line per orbit, indices 1-based and non-decreasing
//! 1 1 1 1 2.3094010767585034
//! 1 1 1 2 1
//! ```
//!
//! Orbits that are not listed are zero. `#` starts a comment. The header
//! `m=<order> n=<dim>` is accepted as a synonym of `order <m> dim <n>`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{dense_len, linear_index, IndexTuples, SymmetricTensor, DEFAULT_MAX_ENTRIES};
use crate::error::{Error, Result};

const MAGIC: &str = "stsr 1";

pub fn load_tensor(path: impl AsRef<Path>) -> Result<SymmetricTensor> {
    load_tensor_capped(path, DEFAULT_MAX_ENTRIES)
}

pub fn load_tensor_capped(path: impl AsRef<Path>, cap: usize) -> Result<SymmetricTensor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_tensor(&text, path, cap)
}

/// Parses `.stsr` text. `origin` only labels error messages.
pub fn parse_tensor(text: &str, origin: &Path, cap: usize) -> Result<SymmetricTensor> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(MAGIC.split_whitespace()) => {}
        Some((no, l)) => return Err(err(no, format!("expected `{MAGIC}`, found `{l}`"))),
        None => return Err(err(1, "empty file".into())),
    }

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| err(2, "missing `order <m> dim <n>` header".into()))?;
    let (order, dim) = parse_header(header).map_err(|m| err(header_line, m))?;
    dense_len(order, dim, cap).map_err(|e| err(header_line, e.to_string()))?;

    let mut orbits: HashMap<usize, (f64, usize)> = HashMap::new();
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != order + 1 {
            return Err(err(
                no,
                format!("expected {order} indices and a value, found {} fields", fields.len()),
            ));
        }
        let mut index = Vec::with_capacity(order);
        for f in &fields[..order] {
            let i: usize = f
                .parse()
                .map_err(|_| err(no, format!("bad index `{f}`")))?;
            if i < 1 || i > dim {
                return Err(err(no, format!("index {i} outside 1..={dim}")));
            }
            index.push(i - 1);
        }
        let value: f64 = fields[order]
            .parse()
            .map_err(|_| err(no, format!("bad value `{}`", fields[order])))?;
        if !value.is_finite() {
            return Err(err(no, format!("non-finite value {value}")));
        }
        index.sort_unstable();
        let key = linear_index(&index, dim);
        if let Some((_, first)) = orbits.insert(key, (value, no)) {
            return Err(err(
                no,
                format!("index orbit already listed on line {first}"),
            ));
        }
    }

    SymmetricTensor::from_fn_capped(order, dim, cap, |t| {
        orbits
            .get(&linear_index(t, dim))
            .map_or(0.0, |&(v, _)| v)
    })
}

fn parse_header(header: &str) -> std::result::Result<(usize, usize), String> {
    let fields: Vec<&str> = header.split_whitespace().collect();
    let number = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("bad number `{s}` in header"))
    };
    match fields.as_slice() {
        ["order", m, "dim", n] => Ok((number(m)?, number(n)?)),
        [m, n] if m.starts_with("m=") && n.starts_with("n=") => {
            Ok((number(&m[2..])?, number(&n[2..])?))
        }
        _ => Err(format!("expected `order <m> dim <n>`, found `{header}`")),
    }
}

/// Writes every nonzero orbit once, at its non-decreasing index tuple.
pub fn write_tensor(t: &SymmetricTensor, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "order {} dim {}", t.order(), t.dim())?;
    let mut tuples = IndexTuples::new(t.order(), t.dim());
    let mut idx = 0;
    while let Some(tuple) = tuples.get() {
        let value = t.coeffs()[idx];
        if value != 0.0 && tuple.windows(2).all(|w| w[0] <= w[1]) {
            for i in tuple {
                write!(out, "{} ", i + 1)?;
            }
            writeln!(out, "{value:?}")?;
        }
        idx += 1;
        tuples.advance();
    }
    Ok(())
}

pub fn store_tensor(t: &SymmetricTensor, path: impl AsRef<Path>) -> Result<()> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let mut buf = Vec::new();
    write_tensor(t, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{make_problem, ProblemSpec};

    fn parse(text: &str) -> Result<SymmetricTensor> {
        parse_tensor(text, Path::new("test.stsr"), DEFAULT_MAX_ENTRIES)
    }

    #[test]
    fn round_trip_p1_and_p4() {
        let dir = tempfile::tempdir().unwrap();
        for spec in [ProblemSpec::p1(), ProblemSpec::p4(5)] {
            let t = make_problem(&spec).unwrap();
            let path = dir.path().join("t.stsr");
            store_tensor(&t, &path).unwrap();
            assert_eq!(load_tensor(&path).unwrap(), t);
        }
    }

    #[test]
    fn single_orbit_with_short_header() {
        let t = parse("stsr 1\nm=4 n=2\n1 1 1 1 2.3094010767585034\n").unwrap();
        assert_eq!(t.get(&[0, 0, 0, 0]), 2.3094010767585034);
        assert_eq!(t.coeffs().iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn comments_blank_lines_and_orbit_expansion() {
        let text = "# a tensor\nstsr 1\n\norder 3 dim 2  # header\n2 1 1 0.5\n";
        let t = parse(text).unwrap();
        for idx in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert_eq!(t.get(&idx), 0.5);
        }
    }

    #[test]
    fn index_out_of_range() {
        let e = parse("stsr 1\norder 4 dim 2\n1 1 1 3 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn duplicate_orbit() {
        let e = parse("stsr 1\norder 2 dim 2\n1 2 1.0\n2 1 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse("").is_err());
        assert!(parse("stsr 2\norder 2 dim 2\n").is_err());
        assert!(parse("stsr 1\n").is_err());
        assert!(parse("stsr 1\norder 2\n").is_err());
        assert!(parse("stsr 1\norder 1 dim 2\n").is_err());
        let e = parse("stsr 1\norder 2 dim 2\n1 1 1 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(parse("stsr 1\norder 2 dim 2\n1 x 1.0\n").is_err());
        assert!(parse("stsr 1\norder 2 dim 2\n1 1 nan\n").is_err());
        assert!(parse("stsr 1\norder 2 dim 2\n1 1 abc\n").is_err());
    }

    #[test]
    fn header_respects_memory_cap() {
        let e = parse_tensor("stsr 1\norder 5 dim 100\n", Path::new("big"), 1000).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }
}
