//! CSV export of fields, forms and tensors: header row, comma-separated,
//! UTF-8, one grid point per row.

use mintwist::geometry::{DifferentialForm, ScalarField, TorusGrid};
use mintwist::torsion::Contorsion;
use std::io::Write;
use std::path::Path;

fn coord_header(grid: &TorusGrid) -> String {
    (0..grid.axes())
        .map(|a| format!("x{a}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn coord_row(grid: &TorusGrid, p: usize) -> String {
    grid.coords(p)
        .iter()
        .map(|x| format!("{x:.12}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_scalar(path: &Path, field: &ScalarField) -> anyhow::Result<()> {
    let grid = field.grid();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "index,{},re,im", coord_header(grid))?;
    for p in 0..grid.num_points() {
        let v = field.at(p);
        writeln!(out, "{p},{},{:.15e},{:.15e}", coord_row(grid, p), v.re, v.im)?;
    }
    Ok(())
}

pub fn write_form(path: &Path, form: &DifferentialForm) -> anyhow::Result<()> {
    let grid = form.grid();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let tuples = form.tuples().to_vec();
    let comp_headers: Vec<String> = tuples
        .iter()
        .map(|t| {
            let label = t.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("");
            format!("c{label}_re,c{label}_im")
        })
        .collect();
    writeln!(out, "index,{},{}", coord_header(grid), comp_headers.join(","))?;
    for p in 0..grid.num_points() {
        let mut row = format!("{p},{}", coord_row(grid, p));
        for t in &tuples {
            let v = form.comp(t, p);
            row.push_str(&format!(",{:.15e},{:.15e}", v.re, v.im));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Flattened contorsion components `K_{lambda mu nu}`, one row per point.
pub fn write_contorsion(path: &Path, k: &Contorsion) -> anyhow::Result<()> {
    let grid = k.grid().clone();
    let n = k.n();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut headers = Vec::new();
    for l in 0..n {
        for mu in 0..n {
            for nu in 0..n {
                headers.push(format!("k{l}{mu}{nu}"));
            }
        }
    }
    writeln!(out, "index,{},{}", coord_header(&grid), headers.join(","))?;
    for p in 0..grid.num_points() {
        let mut row = format!("{p},{}", coord_row(&grid, p));
        for l in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    row.push_str(&format!(",{:.15e}", k.lower.get(p, l, mu, nu)));
                }
            }
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Two-column table, e.g. `(Lambda, trace)` samples.
pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", headers.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.15e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
