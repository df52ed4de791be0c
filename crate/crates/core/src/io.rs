//! Solution dumps: one `#`-prefixed JSON header line, then CSV rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::AffineSphere;
use crate::projective::DomainSpec;

pub const DUMP_COLUMNS: &str = "i,j,x,y,u,hB11,hB12,hB22,kappa";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub domain: DomainSpec,
    pub cells: usize,
    pub h: f64,
    pub nodes: usize,
    pub exponent: u32,
    pub residual_sup: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpRow {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub h_b: [f64; 3],
    pub kappa: f64,
}

pub fn solution_dump(sphere: &AffineSphere) -> String {
    let sol = &sphere.solution;
    let header = DumpHeader {
        domain: sol.domain.spec(),
        cells: sol.grid.n,
        h: sol.grid.h,
        nodes: sol.grid.len(),
        exponent: sol.k,
        residual_sup: sol.residual_sup,
        iterations: sol.iterations,
    };
    let mut out = format!(
        "# {}\n{DUMP_COLUMNS}\n",
        serde_json::to_string(&header).expect("serializable")
    );
    for k in 0..sol.grid.len() {
        let (i, j) = sol.grid.nodes[k];
        let p = sol.grid.points[k];
        let [a, b, c] = sphere.field.h_b[k];
        writeln!(
            out,
            "{i},{j},{:.17e},{:.17e},{:.17e},{a:.17e},{b:.17e},{c:.17e},{:.17e}",
            p.x,
            p.y,
            sol.u(k),
            sphere.field.kappa[k]
        )
        .expect("string write");
    }
    out
}

fn field<T: std::str::FromStr>(parts: &[&str], idx: usize, line: usize) -> Result<T> {
    let key = DUMP_COLUMNS.split(',').nth(idx).unwrap_or("?");
    parts
        .get(idx)
        .ok_or_else(|| Error::Parse {
            key: format!("line {line}: {key}"),
            message: "missing column".into(),
        })?
        .trim()
        .parse()
        .map_err(|_| Error::Parse {
            key: format!("line {line}: {key}"),
            message: format!("cannot parse `{}`", parts[idx]),
        })
}

pub fn parse_dump(text: &str) -> Result<(DumpHeader, Vec<DumpRow>)> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| Error::Parse {
            key: "header".into(),
            message: "missing `# {json}` line".into(),
        })?;
    let header: DumpHeader = serde_json::from_str(head).map_err(|e| Error::Parse {
        key: "header".into(),
        message: e.to_string(),
    })?;
    if lines.next() != Some(DUMP_COLUMNS) {
        return Err(Error::Parse {
            key: "columns".into(),
            message: format!("expected `{DUMP_COLUMNS}`"),
        });
    }
    let mut rows = Vec::with_capacity(header.nodes);
    for (n, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        let ln = n + 3;
        rows.push(DumpRow {
            i: field(&parts, 0, ln)?,
            j: field(&parts, 1, ln)?,
            x: field(&parts, 2, ln)?,
            y: field(&parts, 3, ln)?,
            u: field(&parts, 4, ln)?,
            h_b: [
                field(&parts, 5, ln)?,
                field(&parts, 6, ln)?,
                field(&parts, 7, ln)?,
            ],
            kappa: field(&parts, 8, ln)?,
        });
    }
    Ok((header, rows))
}
