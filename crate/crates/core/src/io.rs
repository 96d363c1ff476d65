//! CSV and JSON output. Floats are written in shortest round-trip form, so
//! identical inputs give byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::ball::{BallParams, RadialMode};
use crate::error::Result;
use crate::profile::ProfileRow;
use crate::ritz::{RitzSolution, SweepRow};

#[derive(Serialize)]
struct ModeRow<'a> {
    d: u32,
    tau: f64,
    alpha: f64,
    ell: u32,
    branch: &'a str,
    a: f64,
    b: f64,
    gamma: f64,
    lambda: f64,
}

#[derive(Serialize)]
struct RitzRow {
    index: usize,
    lambda: f64,
    residual: f64,
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `d,tau,alpha,ell,branch,a,b,gamma,lambda`
pub fn write_modes<W: Write>(out: W, p: &BallParams, modes: &[RadialMode]) -> Result<()> {
    write_rows(
        out,
        modes.iter().map(|m| ModeRow {
            d: p.d,
            tau: p.tau,
            alpha: p.alpha,
            ell: m.ell,
            branch: m.branch.as_str(),
            a: m.a,
            b: m.b,
            gamma: m.gamma,
            lambda: m.lambda,
        }),
    )
}

/// `r,rho,rho',rho'',N,N1,N2,N3`
pub fn write_profile<W: Write>(out: W, rows: &[ProfileRow]) -> Result<()> {
    write_rows(out, rows.iter())
}

/// `index,lambda,residual`, 1-based.
pub fn write_ritz<W: Write>(out: W, sol: &RitzSolution) -> Result<()> {
    write_rows(
        out,
        sol.eigenvalues.iter().zip(&sol.residuals).enumerate().map(|(i, (&lambda, &residual))| RitzRow { index: i + 1, lambda, residual }),
    )
}

/// `alpha,lambda1,lambda2`
pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    write_rows(out, rows.iter())
}

/// One compact JSON document followed by a newline.
pub fn write_json_line<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
