//! Plain-text problem container.
//!
//! ```text
//! # comment lines are ignored
//! K
//! d_1 n N          header of view 1
//! <d_1 rows of X^1, n values each>
//! <d_1 rows of D^1, N values each>
//! d_2 n N
//! ...
//! ```
//!
//! Values are whitespace separated and written with Rust's shortest
//! round-trip float formatting, so write -> read is exact.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use super::{Problem, View};
use crate::error::{Error, Result};
use crate::linalg::Mat;

pub fn write_problem<W: Write>(mut w: W, p: &Problem) -> Result<()> {
    writeln!(w, "# smtmvt problem: K, then per view 'd n N', X rows, D rows")?;
    writeln!(w, "{}", p.view_count())?;
    for v in p.views() {
        writeln!(w, "{} {} {}", v.x.rows(), v.x.cols(), v.d.cols())?;
        write_rows(&mut w, &v.x)?;
        write_rows(&mut w, &v.d)?;
    }
    Ok(())
}

fn write_rows<W: Write>(w: &mut W, m: &Mat) -> Result<()> {
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_problem_file(path: &Path, p: &Problem) -> Result<()> {
    let f = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_problem(&mut w, p)?;
    w.flush()?;
    Ok(())
}

struct Lines<'a> {
    inner: Box<dyn Iterator<Item = (usize, std::io::Result<String>)> + 'a>,
    path: PathBuf,
}

impl Lines<'_> {
    fn next_content(&mut self) -> Result<(usize, Vec<String>)> {
        loop {
            let Some((idx, line)) = self.inner.next() else {
                return Err(self.err(0, "unexpected end of file"));
            };
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok((idx + 1, trimmed.split_whitespace().map(String::from).collect()));
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, expected: usize) -> Result<Vec<T>> {
        let (line, toks) = self.next_content()?;
        if toks.len() != expected {
            return Err(self.err(line, format!("expected {expected} values, found {}", toks.len())));
        }
        toks.iter()
            .map(|t| {
                t.parse::<T>()
                    .map_err(|_| self.err(line, format!("cannot parse '{t}'")))
            })
            .collect()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Mat> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.numbers::<f64>(cols)?);
        }
        Mat::from_vec(rows, cols, data)
    }
}

pub fn read_problem<R: Read>(r: R, origin: &Path) -> Result<Problem> {
    let mut lines = Lines {
        inner: Box::new(BufReader::new(r).lines().enumerate()),
        path: origin.to_path_buf(),
    };
    let k = lines.numbers::<usize>(1)?[0];
    let mut views = Vec::with_capacity(k);
    for _ in 0..k {
        let hdr = lines.numbers::<usize>(3)?;
        let (d, n, templates) = (hdr[0], hdr[1], hdr[2]);
        let x = lines.matrix(d, n)?;
        let dict = lines.matrix(d, templates)?;
        views.push(View { x, d: dict });
    }
    Problem::new(views)
}

pub fn read_problem_file(path: &Path) -> Result<Problem> {
    read_problem(fs::File::open(path)?, path)
}
