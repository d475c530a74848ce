//! Output plumbing: pretty JSON or flexible-width CSV, to stdout or a file.

use crate::{OutFormat, OutputArgs};
use anyhow::{bail, Context, Result};
use std::io::Write;

pub fn emit(
    output: &OutputArgs,
    json: serde_json::Value,
    csv_rows: Option<Vec<Vec<String>>>,
) -> Result<()> {
    let bytes = match output.out {
        OutFormat::Json => {
            let mut text = serde_json::to_string_pretty(&json)?;
            text.push('\n');
            text.into_bytes()
        }
        OutFormat::Csv => {
            let Some(rows) = csv_rows else {
                bail!("csv output is not available for this subcommand");
            };
            let mut writer = csv::WriterBuilder::new()
                .flexible(true)
                .from_writer(Vec::new());
            for row in rows {
                writer.write_record(row)?;
            }
            writer.into_inner()?
        }
    };
    match &output.out_file {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

/// CSV rows for a polynomial table: degree, then ascending coefficients.
pub fn poly_rows(polys: &[nucalc::Poly]) -> Vec<Vec<String>> {
    polys
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let mut row = vec![n.to_string()];
            // pad to full length so degree-n rows always have n+2 fields
            for k in 0..=n {
                row.push(nucalc::rational::rational_str(&p.coeff(k)));
            }
            row
        })
        .collect()
}
