//! Semicolon separated text output: field snapshots, line slices and the
//! per-step diagnostics series. Files are written to a temporary name and
//! renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::{Axis, SliceSpec};
use crate::dg::Discretization;
use crate::error::{Result, SweError};
use crate::operators1d::lagrange_basis;
use crate::physics::State;
use crate::timeloop::StepRecord;

pub const SNAPSHOT_COLUMNS: &str = "element;i;j;x;y;h;hu;hv;b;H;eps";
pub const SLICE_COLUMNS: &str = "element;i;j;x;y;h;hu;hv;b;H";
pub const DIAGNOSTIC_COLUMNS: &str = "step;t;dt;mass;entropy;min_h;n_limited;max_eps";

/// Writes `text` to `path` through a temporary sibling file.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn header(t: f64, hash: &str) -> String {
    format!("# t={t}; config_hash={hash}\n")
}

/// Snapshot rows in element, `i`, `j` order. Values print in shortest
/// round-trip form, so reloading reproduces the state bit for bit.
pub fn snapshot_text(d: &Discretization, w: &[State], eps: &[f64], t: f64, hash: &str) -> String {
    let nn = d.nn();
    let np = d.ops.np();
    let m = &d.mesh;
    let mut s = header(t, hash);
    s.push_str(SNAPSHOT_COLUMNS);
    s.push('\n');
    for (g, st) in w.iter().enumerate() {
        let (e, l) = (g / nn, g % nn);
        let b = d.b[g];
        let _ = writeln!(
            s,
            "{};{};{};{};{};{};{};{};{};{};{}",
            e,
            l / np,
            l % np,
            m.x[g],
            m.y[g],
            st[0],
            st[1],
            st[2],
            b,
            st[0] + b,
            eps.get(e).copied().unwrap_or(0.0)
        );
    }
    s
}

pub fn write_snapshot(path: &Path, d: &Discretization, w: &[State], eps: &[f64], t: f64, hash: &str) -> Result<()> {
    write_atomic(path, &snapshot_text(d, w, eps, t, hash))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub config_hash: String,
    pub w: Vec<State>,
}

fn bad(line: usize, what: &str) -> SweError {
    SweError::Config(format!("snapshot line {line}: {what}"))
}

/// Parses a snapshot written by [`snapshot_text`].
pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let rest = head.strip_prefix("# t=").ok_or_else(|| bad(1, "missing time header"))?;
    let (t, hash) = rest.split_once("; config_hash=").ok_or_else(|| bad(1, "missing config hash"))?;
    let t: f64 = t.parse().map_err(|_| bad(1, "bad time"))?;
    if lines.next() != Some(SNAPSHOT_COLUMNS) {
        return Err(bad(2, "unexpected column header"));
    }
    let mut w = Vec::new();
    for (k, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(';').collect();
        if cols.len() != 11 {
            return Err(bad(k + 3, "expected 11 columns"));
        }
        let num = |c: usize| cols[c].parse::<f64>().map_err(|_| bad(k + 3, "bad number"));
        w.push([num(5)?, num(6)?, num(7)?]);
    }
    Ok(Snapshot {
        t,
        config_hash: hash.to_string(),
        w,
    })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    parse_snapshot(&fs::read_to_string(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceRow {
    pub element: usize,
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub w: State,
    pub b: f64,
}

/// Root of `p(r) = target` on `[-1, 1]` for a nodal polynomial, if any.
fn solve_line(nodes: &[f64], vals: &[f64], target: f64) -> Option<f64> {
    let eval = |r: f64| -> f64 {
        lagrange_basis(nodes, r).iter().zip(vals).map(|(l, v)| l * v).sum::<f64>() - target
    };
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let tol = 1e-12 * scale;
    let (mut a, mut b) = (-1.0, 1.0);
    let (mut fa, fb) = (eval(a), eval(b));
    if fa.abs() <= tol {
        return Some(a);
    }
    if fb.abs() <= tol {
        return Some(b);
    }
    if fa * fb > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        let fc = eval(c);
        if fc.abs() <= tol || b - a < 1e-15 {
            return Some(c);
        }
        if fa * fc < 0.0 {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
    }
    Some(0.5 * (a + b))
}

/// Samples the solution along a coordinate line. For `y = c` each element
/// column `i` is searched for the `eta` with `y(xi_i, eta) = c` and the nodal
/// polynomials are evaluated there; `x = c` is handled symmetrically.
pub fn slice(d: &Discretization, w: &[State], spec: SliceSpec) -> Result<Vec<SliceRow>> {
    let nn = d.nn();
    let np = d.ops.np();
    let m = &d.mesh;
    let nodes = &d.ops.nodes;
    let mut rows = Vec::new();
    for e in 0..m.k {
        let o = e * nn;
        for a in 0..np {
            // indices of the line of nodes with the first index fixed at `a`
            let idx: Vec<usize> = (0..np)
                .map(|c| match spec.axis {
                    Axis::Y => o + a * np + c,
                    Axis::X => o + c * np + a,
                })
                .collect();
            let coord: Vec<f64> = idx
                .iter()
                .map(|&g| match spec.axis {
                    Axis::Y => m.y[g],
                    Axis::X => m.x[g],
                })
                .collect();
            let Some(r) = solve_line(nodes, &coord, spec.value) else {
                continue;
            };
            let l = lagrange_basis(nodes, r);
            let interp = |f: &dyn Fn(usize) -> f64| idx.iter().zip(&l).map(|(&g, c)| c * f(g)).sum::<f64>();
            let row = SliceRow {
                element: e,
                i: if spec.axis == Axis::Y { a } else { usize::MAX },
                j: if spec.axis == Axis::X { a } else { usize::MAX },
                x: interp(&|g| m.x[g]),
                y: interp(&|g| m.y[g]),
                w: [interp(&|g| w[g][0]), interp(&|g| w[g][1]), interp(&|g| w[g][2])],
                b: interp(&|g| d.b[g]),
            };
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(SweError::InvalidArgument(format!(
            "slice {}={} lies outside the domain",
            if spec.axis == Axis::X { "x" } else { "y" },
            spec.value
        )));
    }
    Ok(rows)
}

pub fn slice_text(rows: &[SliceRow], t: f64, hash: &str) -> String {
    let mut s = header(t, hash);
    s.push_str(SLICE_COLUMNS);
    s.push('\n');
    let idx = |v: usize| if v == usize::MAX { "-".to_string() } else { v.to_string() };
    for r in rows {
        let _ = writeln!(
            s,
            "{};{};{};{};{};{};{};{};{};{}",
            r.element,
            idx(r.i),
            idx(r.j),
            r.x,
            r.y,
            r.w[0],
            r.w[1],
            r.w[2],
            r.b,
            r.w[0] + r.b
        );
    }
    s
}

pub fn diagnostics_text(history: &[StepRecord], hash: &str) -> String {
    let t = history.last().map(|r| r.t).unwrap_or(0.0);
    let mut s = header(t, hash);
    s.push_str(DIAGNOSTIC_COLUMNS);
    s.push('\n');
    for r in history {
        let _ = writeln!(
            s,
            "{};{};{};{};{};{};{};{}",
            r.step, r.t, r.dt, r.mass, r.entropy, r.min_h, r.n_limited, r.max_eps
        );
    }
    s
}
