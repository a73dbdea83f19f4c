//! Reading input files and turning their columns into symbol sequences.

use std::path::Path;

use etcausal::io::{integer_labels, read_csv, NamedSeries};
use etcausal::{bin_edges, quantize, BinStrategy, Symbol, SymbolEncoding, SymbolSequence};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{InputArgs, SymbolArgs};
use crate::error::{CliError, CliResult};

/// Identifies the bytes a report was computed from.
#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

impl InputDigest {
    pub fn of(path: impl Into<String>, bytes: &[u8]) -> Self {
        Self {
            path: path.into(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        }
    }
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))
}

pub struct Loaded {
    pub digest: InputDigest,
    pub columns: Vec<NamedSeries>,
}

/// Reads the file and keeps the requested columns, in request order.
pub fn load(args: &InputArgs) -> CliResult<Loaded> {
    let bytes = read_bytes(&args.input)?;
    let digest = InputDigest::of(args.input.display().to_string(), &bytes);
    let mut all = read_csv(bytes.as_slice())?;
    let columns = if args.columns.is_empty() {
        all
    } else {
        let mut picked = Vec::with_capacity(args.columns.len());
        for name in &args.columns {
            if picked.iter().any(|c: &NamedSeries| &c.name == name) {
                return Err(CliError::Parameter(format!(
                    "column '{name}' selected twice"
                )));
            }
            let idx = all.iter().position(|c| &c.name == name).ok_or_else(|| {
                CliError::Parameter(format!("no column named '{name}' in the input"))
            })?;
            picked.push(all.swap_remove(idx));
        }
        picked
    };
    Ok(Loaded { digest, columns })
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelCode {
    pub label: i64,
    pub symbol: Symbol,
}

#[derive(Debug, Clone, Serialize)]
pub struct BinInterval {
    pub symbol: Symbol,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnBins {
    pub column: String,
    pub edges: Vec<f64>,
    pub intervals: Vec<BinInterval>,
}

/// How column values were mapped to symbols.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EncodingTable {
    /// One label table shared by every column.
    Labels {
        columns: Vec<String>,
        labels: Vec<LabelCode>,
    },
    Bins {
        strategy: BinStrategy,
        bins: u32,
        columns: Vec<ColumnBins>,
    },
}

pub struct Symbolized {
    pub sequences: Vec<SymbolSequence>,
    pub encoding: EncodingTable,
}

pub fn symbolize(columns: &[NamedSeries], args: &SymbolArgs) -> CliResult<Symbolized> {
    if args.symbolic {
        let labels = columns
            .iter()
            .map(integer_labels)
            .collect::<Result<Vec<_>, _>>()?;
        let enc = SymbolEncoding::from_labels(labels.iter().flatten().copied())?;
        let sequences = labels
            .iter()
            .map(|l| enc.encode(l))
            .collect::<Result<Vec<_>, _>>()?;
        let table = enc
            .labels()
            .iter()
            .map(|&label| LabelCode {
                label,
                symbol: enc.code_of(label).expect("label from the encoding"),
            })
            .collect();
        return Ok(Symbolized {
            sequences,
            encoding: EncodingTable::Labels {
                columns: columns.iter().map(|c| c.name.clone()).collect(),
                labels: table,
            },
        });
    }
    let strategy: BinStrategy = args.strategy.into();
    let mut sequences = Vec::with_capacity(columns.len());
    let mut tables = Vec::with_capacity(columns.len());
    for c in columns {
        let edges = bin_edges(&c.values, args.bins, strategy)?;
        sequences.push(quantize(&c.values, args.bins, strategy)?);
        let min = c.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = c.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let intervals = (0..args.bins as usize)
            .map(|b| BinInterval {
                symbol: b as Symbol,
                lower: if b == 0 { min } else { edges[b - 1] },
                upper: if b + 1 == args.bins as usize {
                    max
                } else {
                    edges[b]
                },
            })
            .collect();
        tables.push(ColumnBins {
            column: c.name.clone(),
            edges,
            intervals,
        });
    }
    Ok(Symbolized {
        sequences,
        encoding: EncodingTable::Bins {
            strategy,
            bins: args.bins,
            columns: tables,
        },
    })
}
