use etcausal::experiments::{
    canonical_system, reconstruct_patterns, run_paper_tables_with, HarnessOptions, NeuronSystem,
    PaperReport, CANONICAL_SYSTEM_CSV,
};
use etcausal::io::{read_system_csv, write_system_csv, NamedSeries};
use etcausal::{
    acf, entropy, etc, metc, mutual_information, pearson_correlation, surrogate_test,
    transfer_entropy, BinStrategy, LogBase, SymbolSequence, TeConfig,
};
use serde::Serialize;

use crate::args::{AcfArgs, Format, Kind, MeasureArgs, QuantizeArgs, ReproduceArgs, SymbolArgs};
use crate::error::{CliError, CliResult};
use crate::input::{load, read_bytes, symbolize, EncodingTable, InputDigest};
use crate::report::{
    emit, records_csv, records_table, text_table, Envelope, Record, MEASURE_SCHEMA,
    QUANTIZE_SCHEMA, REPRODUCE_SCHEMA, TOOL,
};

const DEFAULT_ACF_LAG: usize = 20;

/// Quantization settings as applied.
#[derive(Debug, Serialize)]
struct SymbolConfig {
    symbolic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<BinStrategy>,
}

impl From<&SymbolArgs> for SymbolConfig {
    fn from(a: &SymbolArgs) -> Self {
        Self {
            symbolic: a.symbolic,
            bins: (!a.symbolic).then_some(a.bins),
            strategy: (!a.symbolic).then_some(a.strategy.into()),
        }
    }
}

#[derive(Debug, Serialize)]
struct MeasureConfig {
    command: &'static str,
    kinds: Vec<Kind>,
    columns: Vec<String>,
    #[serde(flatten)]
    symbols: SymbolConfig,
    base: LogBase,
    source_lags: usize,
    target_lags: usize,
    acf_max_lag: usize,
    surrogates: usize,
    level: f64,
    seed: u64,
    te_source: Option<String>,
    te_target: Option<String>,
    format: Format,
}

#[derive(Debug, Serialize)]
struct RecordsBody<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    encoding: Option<&'a EncodingTable>,
    results: &'a [Record],
}

fn unit(base: LogBase) -> Option<&'static str> {
    Some(base.unit())
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn need_pairs(kind: Kind, columns: &[NamedSeries]) -> CliResult<()> {
    if columns.len() < 2 {
        return Err(CliError::Parameter(format!(
            "--kind {} needs at least two columns, got {}",
            serde_json::to_value(kind)
                .expect("kind serializes")
                .as_str()
                .unwrap_or("?"),
            columns.len()
        )));
    }
    Ok(())
}

fn acf_records(columns: &[NamedSeries], max_lag: usize) -> CliResult<Vec<Record>> {
    let mut out = Vec::new();
    for c in columns {
        let a = acf(&c.values, max_lag)?;
        for (lag, &v) in a.values.iter().enumerate() {
            out.push(Record {
                kind: "acf",
                x: c.name.clone(),
                lag: Some(lag),
                value: v,
                confidence_halfwidth: Some(a.confidence_halfwidth),
                ..Record::default()
            });
        }
        if let Some(peak) = a.argmax_lag() {
            out.push(Record {
                kind: "acf-peak",
                x: c.name.clone(),
                lag: Some(peak),
                value: a.values[peak],
                confidence_halfwidth: Some(a.confidence_halfwidth),
                ..Record::default()
            });
        }
    }
    Ok(out)
}

fn column_index(columns: &[NamedSeries], name: &str) -> CliResult<usize> {
    columns.iter().position(|c| c.name == name).ok_or_else(|| {
        CliError::Parameter(format!(
            "TE column '{name}' is not among the selected columns"
        ))
    })
}

fn te_records(
    args: &MeasureArgs,
    columns: &[NamedSeries],
    seqs: &[SymbolSequence],
    cfg: &TeConfig,
) -> CliResult<Vec<Record>> {
    let directed: Vec<(usize, usize)> = match (&args.source, &args.target) {
        (Some(s), Some(t)) => vec![(column_index(columns, s)?, column_index(columns, t)?)],
        _ => {
            need_pairs(Kind::Te, columns)?;
            (0..columns.len())
                .flat_map(|i| {
                    (0..columns.len())
                        .filter(move |&j| j != i)
                        .map(move |j| (i, j))
                })
                .collect()
        }
    };
    let mut out = Vec::new();
    for (s, t) in directed {
        let r = if cfg.surrogate_count > 0 {
            surrogate_test(&seqs[s], &seqs[t], cfg)?
        } else {
            transfer_entropy(&seqs[s], &seqs[t], cfg)?
        };
        out.push(Record {
            kind: "te",
            x: columns[s].name.clone(),
            y: Some(columns[t].name.clone()),
            value: r.value,
            unit: unit(cfg.log_base),
            effective_samples: Some(r.effective_samples),
            value_after_test: r.surrogate.as_ref().map(|o| o.value_after_test),
            threshold: r.surrogate.as_ref().map(|o| o.threshold),
            passed: r.surrogate.as_ref().map(|o| o.passed),
            ..Record::default()
        });
    }
    Ok(out)
}

pub fn measure(args: &MeasureArgs) -> CliResult<()> {
    let loaded = load(&args.input)?;
    let columns = &loaded.columns;
    let mut kinds = args.kind.clone();
    kinds.sort();
    kinds.dedup();
    let lags = args.te.lags.unwrap_or(1);
    let te_cfg = TeConfig {
        source_lags: args.te.source_lags.unwrap_or(lags),
        target_lags: args.te.target_lags.unwrap_or(lags),
        log_base: args.te.base.into(),
        surrogate_count: args.te.surrogates,
        significance_level: args.te.level,
        rng_seed: args.te.seed,
    };
    te_cfg.validate()?;
    let acf_max_lag = args.te.lags.unwrap_or(DEFAULT_ACF_LAG);
    let config = MeasureConfig {
        command: "measure",
        kinds: kinds.clone(),
        columns: columns.iter().map(|c| c.name.clone()).collect(),
        symbols: SymbolConfig::from(&args.symbols),
        base: te_cfg.log_base,
        source_lags: te_cfg.source_lags,
        target_lags: te_cfg.target_lags,
        acf_max_lag,
        surrogates: te_cfg.surrogate_count,
        level: te_cfg.significance_level,
        seed: te_cfg.rng_seed,
        te_source: args.source.clone(),
        te_target: args.target.clone(),
        format: args.output.format,
    };
    let needs_symbols = kinds.iter().any(|k| !matches!(k, Kind::Acf | Kind::Corr));
    let symbolized = if needs_symbols {
        Some(symbolize(columns, &args.symbols)?)
    } else {
        None
    };
    let base = te_cfg.log_base;
    let mut records = Vec::new();
    for &kind in &kinds {
        match kind {
            Kind::Entropy | Kind::Etc => {
                let seqs = &symbolized.as_ref().expect("symbolized").sequences;
                for (c, s) in columns.iter().zip(seqs) {
                    records.push(if kind == Kind::Entropy {
                        Record {
                            kind: "entropy",
                            x: c.name.clone(),
                            value: entropy(s, base)?,
                            unit: unit(base),
                            ..Record::default()
                        }
                    } else {
                        let r = etc(s)?;
                        Record {
                            kind: "etc",
                            x: c.name.clone(),
                            value: r.normalized,
                            iterations: Some(r.iterations),
                            length: Some(r.input_length),
                            ..Record::default()
                        }
                    });
                }
            }
            Kind::Mi | Kind::Metc | Kind::Corr => {
                need_pairs(kind, columns)?;
                for (i, j) in pairs(columns.len()) {
                    let (value, name, u) = match kind {
                        Kind::Mi => {
                            let s = &symbolized.as_ref().expect("symbolized").sequences;
                            (mutual_information(&s[i], &s[j], base)?, "mi", unit(base))
                        }
                        Kind::Metc => {
                            let s = &symbolized.as_ref().expect("symbolized").sequences;
                            (metc(&s[i], &s[j])?, "metc", None)
                        }
                        _ => (
                            pearson_correlation(&columns[i].values, &columns[j].values)?,
                            "corr",
                            None,
                        ),
                    };
                    records.push(Record {
                        kind: name,
                        x: columns[i].name.clone(),
                        y: Some(columns[j].name.clone()),
                        value,
                        unit: u,
                        length: Some(columns[i].values.len()),
                        ..Record::default()
                    });
                }
            }
            Kind::Te => {
                let seqs = &symbolized.as_ref().expect("symbolized").sequences;
                records.extend(te_records(args, columns, seqs, &te_cfg)?);
            }
            Kind::Acf => records.extend(acf_records(columns, acf_max_lag)?),
        }
    }
    let encoding = symbolized.as_ref().map(|s| &s.encoding);
    write_records(
        MEASURE_SCHEMA,
        &config,
        &loaded.digest,
        encoding,
        &records,
        args.output.format,
        args.output.output.as_deref(),
    )
}

fn write_records<C: Serialize>(
    schema: &'static str,
    config: &C,
    digest: &InputDigest,
    encoding: Option<&EncodingTable>,
    records: &[Record],
    format: Format,
    output: Option<&std::path::Path>,
) -> CliResult<()> {
    let env = Envelope {
        schema,
        tool: TOOL,
        config,
        input: digest,
        body: RecordsBody {
            encoding,
            results: records,
        },
    };
    let text = match format {
        Format::Json => env.to_json()?,
        Format::Csv => env.preamble("# ")? + &records_csv(records)?,
        Format::Table => env.preamble("")? + "\n" + &records_table(records),
    };
    let sidecar = if format == Format::Json {
        None
    } else {
        encoding
    };
    emit(&text, output, sidecar)
}

#[derive(Debug, Serialize)]
struct AcfConfig {
    command: &'static str,
    columns: Vec<String>,
    max_lag: usize,
    format: Format,
}

pub fn acf_command(args: &AcfArgs) -> CliResult<()> {
    let loaded = load(&args.input)?;
    let config = AcfConfig {
        command: "acf",
        columns: loaded.columns.iter().map(|c| c.name.clone()).collect(),
        max_lag: args.lags,
        format: args.output.format,
    };
    let records = acf_records(&loaded.columns, args.lags)?;
    write_records(
        MEASURE_SCHEMA,
        &config,
        &loaded.digest,
        None,
        &records,
        args.output.format,
        args.output.output.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct QuantizeConfig {
    command: &'static str,
    columns: Vec<String>,
    #[serde(flatten)]
    symbols: SymbolConfig,
    format: Format,
}

#[derive(Debug, Serialize)]
struct QuantizedColumn<'a> {
    name: &'a str,
    alphabet_size: u32,
    symbols: &'a [u32],
}

#[derive(Debug, Serialize)]
struct QuantizeBody<'a> {
    encoding: &'a EncodingTable,
    columns: Vec<QuantizedColumn<'a>>,
}

pub fn quantize_command(args: &QuantizeArgs) -> CliResult<()> {
    let loaded = load(&args.input)?;
    let sym = symbolize(&loaded.columns, &args.symbols)?;
    let names: Vec<String> = loaded.columns.iter().map(|c| c.name.clone()).collect();
    let config = QuantizeConfig {
        command: "quantize",
        columns: names.clone(),
        symbols: SymbolConfig::from(&args.symbols),
        format: args.output.format,
    };
    let env = Envelope {
        schema: QUANTIZE_SCHEMA,
        tool: TOOL,
        config: &config,
        input: &loaded.digest,
        body: QuantizeBody {
            encoding: &sym.encoding,
            columns: names
                .iter()
                .zip(&sym.sequences)
                .map(|(n, s)| QuantizedColumn {
                    name: n,
                    alphabet_size: s.alphabet_size(),
                    symbols: s.symbols(),
                })
                .collect(),
        },
    };
    let rows: Vec<Vec<String>> = (0..loaded.columns[0].values.len())
        .map(|i| {
            sym.sequences
                .iter()
                .map(|s| s.symbols()[i].to_string())
                .collect()
        })
        .collect();
    let text = match args.output.format {
        Format::Json => env.to_json()?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(&names).map_err(err)?;
            for r in &rows {
                w.write_record(r).map_err(err)?;
            }
            let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            env.preamble("# ")? + &String::from_utf8(body).expect("csv output is UTF-8")
        }
        Format::Table => env.preamble("")? + "\n" + &text_table(&names, &rows),
    };
    let sidecar = (args.output.format != Format::Json).then_some(&sym.encoding);
    emit(&text, args.output.output.as_deref(), sidecar)
}

#[derive(Debug, Serialize)]
struct ReproduceConfig {
    command: &'static str,
    system: &'static str,
    surrogates: usize,
    level: f64,
    seed: u64,
    format: Format,
}

/// Where a `--search` run's system came from.
#[derive(Debug, Serialize)]
struct SearchProvenance {
    search_space_size: usize,
    first_order_matches: usize,
    best_metc_matches: usize,
    best_tier_size: usize,
    checks_failed_without_surrogates: Option<usize>,
    matches_bundled_system: bool,
}

#[derive(Debug, Serialize)]
struct ReproduceBody<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<&'a SearchProvenance>,
    report: &'a PaperReport,
}

fn system_csv(system: &NeuronSystem) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_system_csv(system, &mut buf)?;
    Ok(buf)
}

fn constraint_to_target(e: etcausal::Error) -> CliError {
    match e {
        etcausal::Error::Constraint(m) => {
            CliError::TargetFailed(format!("system file violates a structural constraint: {m}"))
        }
        other => other.into(),
    }
}

pub fn reproduce(args: &ReproduceArgs) -> CliResult<()> {
    let (system, digest, provenance, source) = if args.search {
        let search = reconstruct_patterns()?;
        let best = search.best().ok_or_else(|| {
            CliError::TargetFailed("constraint search found no candidate system".into())
        })?;
        let bytes = system_csv(&best.system)?;
        if let Some(path) = &args.system_output {
            std::fs::write(path, &bytes)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        let provenance = SearchProvenance {
            search_space_size: search.search_space_size,
            first_order_matches: search.first_order_matches,
            best_metc_matches: best.metc_matches,
            best_tier_size: search
                .candidates
                .iter()
                .filter(|c| c.metc_matches == best.metc_matches)
                .count(),
            checks_failed_without_surrogates: best.checks_failed,
            matches_bundled_system: bytes == CANONICAL_SYSTEM_CSV.as_bytes(),
        };
        (
            best.system.clone(),
            InputDigest::of("<search>", &bytes),
            Some(provenance),
            "search",
        )
    } else if let Some(path) = &args.input {
        let bytes = read_bytes(path)?;
        let system = read_system_csv(bytes.as_slice()).map_err(constraint_to_target)?;
        (
            system,
            InputDigest::of(path.display().to_string(), &bytes),
            None,
            "file",
        )
    } else {
        let system = canonical_system()?;
        (
            system,
            InputDigest::of("<bundled>", CANONICAL_SYSTEM_CSV.as_bytes()),
            None,
            "bundled",
        )
    };
    let options = HarnessOptions {
        surrogates: args.surrogates,
        level: args.level,
        seed: args.seed,
    };
    if args.surrogates > 0 {
        TeConfig {
            surrogate_count: options.surrogates,
            significance_level: options.level,
            ..TeConfig::default()
        }
        .validate()?;
    }
    let report = run_paper_tables_with(&system, &options)?;
    let config = ReproduceConfig {
        command: "reproduce-paper",
        system: source,
        surrogates: options.surrogates,
        level: options.level,
        seed: options.seed,
        format: args.output.format,
    };
    let env = Envelope {
        schema: REPRODUCE_SCHEMA,
        tool: TOOL,
        config: &config,
        input: &digest,
        body: ReproduceBody {
            provenance: provenance.as_ref(),
            report: &report,
        },
    };
    let text = match args.output.format {
        Format::Json => env.to_json()?,
        Format::Table => {
            let mut s = env.preamble("")?;
            if let Some(p) = &provenance {
                s += &format!(
                    "search: {} systems, {} first-order matches, best tier {} with {} METC cells\n",
                    p.search_space_size,
                    p.first_order_matches,
                    p.best_tier_size,
                    p.best_metc_matches
                );
            }
            s + "\n" + &report.to_table()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(["check", "passed", "downgraded", "detail"])
                .map_err(err)?;
            for c in &report.checks {
                w.write_record([
                    c.id.as_str(),
                    &c.passed.to_string(),
                    &c.downgraded.to_string(),
                    &c.detail,
                ])
                .map_err(err)?;
            }
            let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            env.preamble("# ")? + &String::from_utf8(body).expect("csv output is UTF-8")
        }
    };
    emit(&text, args.output.output.as_deref(), None)?;
    if report.all_passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.failed_checks().map(|c| c.id.as_str()).collect();
        Err(CliError::TargetFailed(format!(
            "{} check(s) failed: {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}
