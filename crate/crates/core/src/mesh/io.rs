//! Plain-text mesh tables.
//!
//! ```text
//! # comment
//! vertices <n>
//! <id> <x> <y> <z>
//! faces <m>
//! <id> <k> <v1> ... <vk>
//! cells <c>
//! <id> <k> <f1> <s1> ... <fk> <sk>
//! ```
//!
//! Ids are arbitrary non-negative integers, unique per table. `s = 1` means
//! the face loop normal points out of the cell, `s = -1` into it.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::PolyMesh;
use crate::error::{Error, Result};
use crate::geometry::Point;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty, non-comment line split into tokens.
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let body = line.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, message: format!("cannot parse '{tok}'") })
}

fn header(lines: &mut Lines, name: &str) -> Result<usize> {
    let (ln, toks) =
        lines.next().ok_or_else(|| Error::Parse { line: 0, message: format!("missing '{name}' table") })?;
    if toks.len() != 2 || toks[0] != name {
        return Err(Error::Parse { line: ln, message: format!("expected '{name} <count>'") });
    }
    parse(toks[1], ln)
}

fn record<'a>(lines: &mut Lines<'a>, what: &str) -> Result<(usize, Vec<&'a str>)> {
    lines.next().ok_or_else(|| Error::Parse { line: 0, message: format!("truncated {what} table") })
}

pub fn read_mesh(text: &str) -> Result<PolyMesh> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let mut mesh = PolyMesh::default();

    let nv = header(&mut lines, "vertices")?;
    let mut vmap = HashMap::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = record(&mut lines, "vertex")?;
        if t.len() != 4 {
            return Err(Error::Parse { line: ln, message: "vertex needs id x y z".into() });
        }
        let id: usize = parse(t[0], ln)?;
        let p = Point::new(parse(t[1], ln)?, parse(t[2], ln)?, parse(t[3], ln)?);
        if !p.iter().all(|c| c.is_finite()) {
            return Err(Error::Parse { line: ln, message: "non-finite coordinate".into() });
        }
        if vmap.insert(id, mesh.vertices.len()).is_some() {
            return Err(Error::Parse { line: ln, message: format!("duplicate vertex id {id}") });
        }
        mesh.vertices.push(p);
    }

    let nf = header(&mut lines, "faces")?;
    let mut fmap = HashMap::with_capacity(nf);
    for _ in 0..nf {
        let (ln, t) = record(&mut lines, "face")?;
        let id: usize = parse(t.first().copied().unwrap_or(""), ln)?;
        let k: usize = parse(t.get(1).copied().unwrap_or(""), ln)?;
        if k < 3 || t.len() != k + 2 {
            return Err(Error::Parse { line: ln, message: "face needs id k v1..vk with k >= 3".into() });
        }
        let mut lp = Vec::with_capacity(k);
        for tok in &t[2..] {
            let v: usize = parse(tok, ln)?;
            lp.push(*vmap.get(&v).ok_or_else(|| Error::Parse { line: ln, message: format!("unknown vertex {v}") })?);
        }
        if fmap.insert(id, mesh.faces.len()).is_some() {
            return Err(Error::Parse { line: ln, message: format!("duplicate face id {id}") });
        }
        mesh.faces.push(lp);
    }

    let nc = header(&mut lines, "cells")?;
    for _ in 0..nc {
        let (ln, t) = record(&mut lines, "cell")?;
        let k: usize = parse(t.get(1).copied().unwrap_or(""), ln)?;
        if k < 4 || t.len() != 2 * k + 2 {
            return Err(Error::Parse { line: ln, message: "cell needs id k (face sign) pairs, k >= 4".into() });
        }
        let mut cell = Vec::with_capacity(k);
        for pair in t[2..].chunks(2) {
            let f: usize = parse(pair[0], ln)?;
            let s: i32 = parse(pair[1], ln)?;
            if s != 1 && s != -1 {
                return Err(Error::Parse { line: ln, message: format!("orientation must be 1 or -1, got {s}") });
            }
            let fi = *fmap.get(&f).ok_or_else(|| Error::Parse { line: ln, message: format!("unknown face {f}") })?;
            cell.push((fi, s == 1));
        }
        mesh.cells.push(cell);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln, message: "trailing content".into() });
    }
    Ok(mesh)
}

pub fn write_mesh(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(s, "{i} {:e} {:e} {:e}", v.x, v.y, v.z);
    }
    let _ = writeln!(s, "faces {}", mesh.faces.len());
    for (i, f) in mesh.faces.iter().enumerate() {
        let _ = write!(s, "{i} {}", f.len());
        for v in f {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "cells {}", mesh.cells.len());
    for (i, c) in mesh.cells.iter().enumerate() {
        let _ = write!(s, "{i} {}", c.len());
        for (f, out) in c {
            let _ = write!(s, " {f} {}", if *out { 1 } else { -1 });
        }
        s.push('\n');
    }
    s
}
