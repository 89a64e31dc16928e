//! The `gf1` text format for grid fields.
//!
//! ```text
//! gf 1
//! dim <n>
//! nodes <N>
//! <N^n whitespace-separated values in row-major order>
//! ```
//!
//! Out-of-domain nodes are written as the literal `nan`. Values use Rust's
//! shortest round-trip formatting, so write/read is bit-exact. The writer
//! puts one grid line (the fastest axis) per text line; the reader accepts
//! any whitespace layout.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::calculus::SymMatField;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Mask};

/// Serializes a field to a `gf1` string.
pub fn to_string(u: &GridFunction) -> String {
    let grid = u.grid();
    let n = grid.nodes_per_axis();
    let mut out = format!("gf 1\ndim {}\nnodes {}\n", grid.dim(), n);
    for line in u.values().chunks(n) {
        for (k, v) in line.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            if v.is_finite() {
                write!(out, "{v:?}").unwrap();
            } else {
                out.push_str("nan");
            }
        }
        out.push('\n');
    }
    out
}

/// Parses a `gf1` document. The domain is the set of non-`nan` nodes and
/// must lie inside the closed unit ball.
pub fn from_str(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines().enumerate();
    let mut header = |key: &str| -> Result<String> {
        let (no, line) = lines.next().ok_or(Error::Format {
            line: 0,
            reason: format!("missing `{key}` header"),
        })?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
            _ => Err(Error::Format {
                line: no + 1,
                reason: format!("expected `{key} <value>`, found `{line}`"),
            }),
        }
    };
    let version = header("gf")?;
    if version != "1" {
        return Err(Error::Format {
            line: 1,
            reason: format!("unsupported version {version}"),
        });
    }
    let dim: usize = parse_header(&header("dim")?, 2)?;
    let nodes: usize = parse_header(&header("nodes")?, 3)?;
    let grid = Grid::new(dim, nodes)?;

    let mut values = Vec::with_capacity(grid.len());
    for (no, line) in lines {
        for tok in line.split_whitespace() {
            let v = if tok == "nan" {
                f64::NAN
            } else {
                tok.parse::<f64>().map_err(|e| Error::Format {
                    line: no + 1,
                    reason: format!("bad value `{tok}`: {e}"),
                })?
            };
            if v.is_infinite() {
                return Err(Error::Format {
                    line: no + 1,
                    reason: "infinite values are not allowed".into(),
                });
            }
            values.push(v);
        }
    }
    if values.len() != grid.len() {
        return Err(Error::Format {
            line: 0,
            reason: format!("expected {} values, found {}", grid.len(), values.len()),
        });
    }
    let domain = Mask::from_bits(grid, values.iter().map(|v| !v.is_nan()).collect())?;
    GridFunction::new(domain, values)
}

fn parse_header(v: &str, line: usize) -> Result<usize> {
    v.parse().map_err(|e| Error::Format {
        line,
        reason: format!("bad integer `{v}`: {e}"),
    })
}

pub fn write(path: impl AsRef<Path>, u: &GridFunction) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(to_string(u).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<GridFunction> {
    let mut text = String::new();
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            break;
        }
        text.push_str(&line);
    }
    from_str(&text)
}

/// Encodes a mask as a field: 1 on set nodes, 0 on other unit-ball nodes.
pub fn mask_to_field(mask: &Mask) -> GridFunction {
    let grid = *mask.grid();
    let ball = grid.unit_ball();
    let values = (0..grid.len())
        .map(|i| if mask.get(i) { 1.0 } else { 0.0 })
        .collect();
    // set nodes outside the ball would be dropped; masks written this way are
    // always subsets of the ball
    GridFunction::new(ball, values).expect("unit ball is a valid domain")
}

/// Writes each upper-triangle component of `field` to `<prefix>_ij.gf`.
pub fn write_sym_mat_field(prefix: &str, field: &SymMatField) -> Result<Vec<String>> {
    let dim = field.grid().dim();
    let mut paths = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let path = format!("{prefix}_{i}{j}.gf");
            write(&path, &field.component(i, j))?;
            paths.push(path);
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};

    #[test]
    fn header_and_layout() {
        let g = make_grid(1, 9).unwrap();
        let u = sample(&|x: &[f64]| x[0], &g).unwrap();
        let s = to_string(&u);
        assert!(s.starts_with("gf 1\ndim 1\nnodes 9\n"));
        assert_eq!(
            s.lines().nth(3).unwrap(),
            "-1.0 -0.75 -0.5 -0.25 0.0 0.25 0.5 0.75 1.0"
        );
    }

    #[test]
    fn nan_marks_out_of_domain() {
        let g = make_grid(2, 9).unwrap();
        let u = GridFunction::constant(g, 0.1);
        let s = to_string(&u);
        let first_row = s.lines().nth(3).unwrap();
        assert!(first_row.starts_with("nan nan nan nan 0.1 nan"));
        let back = from_str(&s).unwrap();
        assert_eq!(back.domain(), u.domain());
    }

    #[test]
    fn rejects_malformed() {
        assert!(from_str("gf 2\ndim 1\nnodes 9\n").is_err());
        assert!(from_str("gf 1\ndim 1\nnodes 8\n").is_err());
        assert!(from_str("gf 1\ndim 1\nnodes 9\n1 2 3").is_err());
        let bad = "gf 1\ndim 1\nnodes 9\n0 0 0 0 0 0 0 0 zz\n";
        assert!(matches!(from_str(bad), Err(Error::Format { line: 4, .. })));
    }

    #[test]
    fn rejects_values_outside_ball() {
        // every node of the 2-d box set, including corners
        let mut s = String::from("gf 1\ndim 2\nnodes 9\n");
        for _ in 0..9 {
            s.push_str("0 0 0 0 0 0 0 0 0\n");
        }
        assert!(from_str(&s).is_err());
    }
}
