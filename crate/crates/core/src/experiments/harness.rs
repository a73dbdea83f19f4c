//! Recomputes every table cell of the three-neuron demonstration and checks
//! it against the published values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::system::NeuronSystem;
use super::targets::{
    first_order_mi_closed_form, ACF_MAX_LAG, ACF_PEAK_LAG, MI_TOLERANCE, PAIRS, TABLE1_METC,
    TABLE1_MI, TABLE2_METC, TABLE_TOLERANCE, TE_LAG12_FULL, TE_LAG12_PRIMED, TE_LAGS, TE_LEVEL,
    TE_SURROGATES, TE_TOLERANCE,
};
use crate::error::Result;
use crate::etc::metc;
use crate::infotheory::{entropy, mutual_information, LogBase};
use crate::symbolic::{acf, pearson_correlation, SymbolSequence};
use crate::te::{nonuniform_surrogate_test, transfer_entropy, Embedding, EmbeddingTerm, TeConfig};

/// Version tag of the serialized [`PaperReport`].
pub const REPORT_SCHEMA: &str = "etcausal/paper-report/v1";

const SERIES: [&str; 3] = ["X1", "X2", "X3"];
const PRIMED: [&str; 3] = ["X1'", "X2'", "X3'"];
/// Agreement required between quantities that should be identical.
const EXACT: f64 = 1e-12;
const RHO_TOLERANCE: f64 = 1e-9;
const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Surrogate settings for the TE section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessOptions {
    pub surrogates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            surrogates: TE_SURROGATES,
            level: TE_LEVEL,
            seed: 0,
        }
    }
}

/// One pair of a first-order table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub pair: String,
    pub correlation: f64,
    /// Bits.
    pub mutual_information: f64,
    pub metc: f64,
    pub metc_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntropy {
    pub series: String,
    /// Bits.
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSection {
    pub title: String,
    pub series_length: usize,
    pub rows: Vec<PairRow>,
    pub entropies: Vec<SeriesEntropy>,
}

/// Whether the METC cells could be matched exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetcBranch {
    Exact,
    Fallback,
}

/// Lag-12 TE for one directed pair, conditioned on the third series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeCell {
    pub source: String,
    pub target: String,
    pub nats: f64,
    pub bits: f64,
    /// Nats; zero unless the surrogate test passed.
    pub nats_after_test: f64,
    pub threshold_nats: f64,
    pub significant: bool,
    pub selected_terms: Vec<EmbeddingTerm>,
    pub effective_samples: usize,
    /// Uniform embedding with `s = t = 12`, nats, for comparison.
    pub uniform_nats: f64,
    pub target_nats: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeSection {
    pub lags: usize,
    pub surrogates: usize,
    pub level: f64,
    pub seed: u64,
    pub full: Vec<TeCell>,
    pub primed: Vec<TeCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfSection {
    pub series: String,
    pub values: Vec<f64>,
    pub confidence_halfwidth: f64,
    pub argmax_lag: Option<usize>,
}

/// First-order MI of the original and the doubled-length system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubledCell {
    pub pair: String,
    pub mutual_information: f64,
    pub doubled: f64,
}

/// One pass/fail line. Downgraded checks are reported but do not gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub downgraded: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperReport {
    pub schema: String,
    pub system: NeuronSystem,
    pub mi_closed_form: f64,
    pub table1: TableSection,
    pub table2: TableSection,
    pub metc_branch: MetcBranch,
    pub te_branch: MetcBranch,
    pub transfer_entropy: TeSection,
    pub acf: AcfSection,
    pub doubled_length: Vec<DoubledCell>,
    pub checks: Vec<Check>,
    /// Every non-downgraded check passed.
    pub all_passed: bool,
}

impl PaperReport {
    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed && !c.downgraded)
    }
}

fn near(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn pair_name(names: &[&str; 3], (i, j): (usize, usize)) -> String {
    format!("{},{}", names[i], names[j])
}

fn table(
    title: &str,
    names: &[&str; 3],
    x: &[SymbolSequence; 3],
    metc_targets: [f64; 3],
) -> Result<TableSection> {
    // correlations are taken on firing values, not symbol codes
    let enc = NeuronSystem::encoding();
    let values = x
        .iter()
        .map(|s| Ok(enc.decode(s)?.iter().map(|&v| v as f64).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut rows = Vec::new();
    for ((i, j), metc_target) in PAIRS.into_iter().zip(metc_targets) {
        rows.push(PairRow {
            pair: pair_name(names, (i, j)),
            correlation: pearson_correlation(&values[i], &values[j])?,
            mutual_information: mutual_information(&x[i], &x[j], LogBase::Two)?,
            metc: metc(&x[i], &x[j])?,
            metc_target,
        });
    }
    let entropies = names
        .iter()
        .zip(x)
        .map(|(n, s)| {
            Ok(SeriesEntropy {
                series: (*n).to_string(),
                entropy: entropy(s, LogBase::Two)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TableSection {
        title: title.to_string(),
        series_length: x[0].len(),
        rows,
        entropies,
    })
}

fn te_config(options: &HarnessOptions) -> TeConfig {
    TeConfig {
        log_base: LogBase::E,
        surrogate_count: options.surrogates,
        significance_level: options.level,
        rng_seed: options.seed,
        ..TeConfig::with_lags(TE_LAGS)
    }
}

/// All six directed pairs `(source, target)`, each with the remaining
/// series as conditioning.
const DIRECTED: [(usize, usize, usize); 6] = [
    (0, 1, 2),
    (1, 0, 2),
    (0, 2, 1),
    (2, 0, 1),
    (1, 2, 0),
    (2, 1, 0),
];

fn te_cells(
    names: &[&str; 3],
    x: &[SymbolSequence; 3],
    options: &HarnessOptions,
    coupled_target: f64,
) -> Result<Vec<TeCell>> {
    let cfg = te_config(options);
    let uniform_cfg = TeConfig {
        surrogate_count: 0,
        ..cfg.clone()
    };
    let mut out = Vec::new();
    for (s, t, z) in DIRECTED {
        let conditioning = [x[z].clone()];
        let r = if cfg.surrogate_count > 0 {
            nonuniform_surrogate_test(&x[s], &x[t], &conditioning, &cfg)?
        } else {
            crate::te::nonuniform_transfer_entropy(&x[s], &x[t], &conditioning, &cfg)?
        };
        let uniform = transfer_entropy(&x[s], &x[t], &uniform_cfg)?;
        let selected_terms = match &r.embedding {
            Embedding::NonUniform { selected, .. } => selected.clone(),
            Embedding::Uniform { .. } => Vec::new(),
        };
        let (threshold_nats, significant) = r
            .surrogate
            .as_ref()
            .map_or((0.0, true), |o| (o.threshold, o.passed));
        out.push(TeCell {
            source: names[s].to_string(),
            target: names[t].to_string(),
            nats: r.value,
            bits: LogBase::Two.from_nats(r.value),
            nats_after_test: r.reported_value(),
            threshold_nats,
            significant,
            selected_terms,
            effective_samples: r.effective_samples,
            uniform_nats: uniform.value,
            target_nats: (s != 0 && t != 0).then_some(coupled_target),
        });
    }
    Ok(out)
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, id: impl Into<String>, passed: bool, detail: String) {
        self.0.push(Check {
            id: id.into(),
            passed,
            downgraded: false,
            detail,
        });
    }

    fn downgrade(&mut self, prefix: &str) {
        for c in self.0.iter_mut().filter(|c| c.id.starts_with(prefix)) {
            c.downgraded = true;
        }
    }
}

/// METC fallback: `METC(X2,X3) >= 2 METC(X1,X2) > 0`, and on the primed
/// system `METC(X2',X3') > 0` with both X1' cells exactly 0.
pub fn metc_fallback_holds(full: [f64; 3], primed: [f64; 3]) -> bool {
    full[2] >= 2.0 * full[0]
        && full[0] > 0.0
        && primed[2] > 0.0
        && primed[0] == 0.0
        && primed[1] == 0.0
}

/// TE fallback: the two X2/X3 directions agree, and every X1-involving
/// value is 0 after testing and strictly below both of them.
fn te_fallback_holds(cells: &[TeCell]) -> (bool, String) {
    let coupled: Vec<&TeCell> = cells.iter().filter(|c| c.target_nats.is_some()).collect();
    let others: Vec<&TeCell> = cells.iter().filter(|c| c.target_nats.is_none()).collect();
    let symmetric = near(coupled[0].nats, coupled[1].nats, SYMMETRY_TOLERANCE);
    let x1_max = others.iter().map(|c| c.nats_after_test).fold(0.0, f64::max);
    let x1_zero = others.iter().all(|c| c.nats_after_test == 0.0);
    let exceeds = coupled.iter().all(|c| c.nats_after_test > x1_max);
    (
        symmetric && x1_zero && exceeds,
        format!(
            "coupled {:.4}/{:.4} nats after test, max X1-involving {x1_max:.4}",
            coupled[0].nats_after_test, coupled[1].nats_after_test
        ),
    )
}

fn all_metc(rows: &[PairRow]) -> [f64; 3] {
    [rows[0].metc, rows[1].metc, rows[2].metc]
}

fn is_rotation(a: &[u32], b: &[u32]) -> bool {
    a.len() == b.len() && (0..a.len().max(1)).any(|k| a.iter().cycle().skip(k).take(a.len()).eq(b))
}

/// Runs the whole reproduction with the default surrogate settings.
pub fn run_paper_tables(system: &NeuronSystem) -> Result<PaperReport> {
    run_paper_tables_with(system, &HarnessOptions::default())
}

pub fn run_paper_tables_with(
    system: &NeuronSystem,
    options: &HarnessOptions,
) -> Result<PaperReport> {
    let x = system.sequences()?;
    let p = system.primed()?;
    let table1 = table("Z switched ON", &SERIES, &x, TABLE1_METC)?;
    let table2 = table("Z switched OFF", &PRIMED, &p, TABLE2_METC)?;
    let closed_form = first_order_mi_closed_form();
    let mut checks = Checks(Vec::new());

    for row in &table1.rows {
        let mi = row.mutual_information;
        checks.push(
            format!("table1.mi.{}", row.pair),
            near(mi, TABLE1_MI, MI_TOLERANCE),
            format!("{mi:.6} bits, target {TABLE1_MI}"),
        );
        checks.push(
            format!("table1.mi-closed-form.{}", row.pair),
            near(mi, closed_form, EXACT),
            format!("{mi:.15} vs {closed_form:.15}"),
        );
    }
    for row in &table2.rows {
        let mi = row.mutual_information;
        checks.push(
            format!("table2.mi.{}", row.pair),
            near(mi, 0.0, EXACT),
            format!("{mi:e} bits, target 0"),
        );
    }
    for e in &table2.entropies[1..] {
        checks.push(
            format!("table2.entropy.{}", e.series),
            near(e.entropy, 1.0, EXACT),
            format!("{:.15} bits, target 1", e.entropy),
        );
    }
    for (t, section) in [("table1", &table1), ("table2", &table2)] {
        for row in &section.rows {
            checks.push(
                format!("{t}.rho.{}", row.pair),
                near(row.correlation, 0.0, RHO_TOLERANCE),
                format!("{:e}, target 0", row.correlation),
            );
        }
    }
    let zero = NeuronSystem::encoding()
        .code_of(0)
        .expect("0 is a firing label");
    checks.push(
        "primed.structure",
        p.iter()
            .all(|s| s.len() == 32 && !s.symbols().contains(&zero))
            && is_rotation(p[1].symbols(), p[2].symbols()),
        format!(
            "length {}, no inactive instants, X2' a rotation of X3'",
            p[0].len()
        ),
    );

    let mut metc_exact = true;
    for (t, section) in [("table1", &table1), ("table2", &table2)] {
        for row in &section.rows {
            let ok = near(row.metc, row.metc_target, TABLE_TOLERANCE);
            metc_exact &= ok;
            checks.push(
                format!("metc.{t}.{}", row.pair),
                ok,
                format!("{:.4}, target {:.4}", row.metc, row.metc_target),
            );
        }
    }
    let metc_branch = if metc_exact {
        MetcBranch::Exact
    } else {
        checks.downgrade("metc.");
        let (full, primed) = (all_metc(&table1.rows), all_metc(&table2.rows));
        checks.push(
            "metc-fallback",
            metc_fallback_holds(full, primed),
            format!(
                "METC(X2,X3) {:.4} >= 2 x {:.4} > 0; METC(X2',X3') {:.4} > 0; X1' cells {:.4}/{:.4}",
                full[2], full[0], primed[2], primed[0], primed[1]
            ),
        );
        MetcBranch::Fallback
    };

    let te_full = te_cells(&SERIES, &x, options, TE_LAG12_FULL)?;
    let te_primed = te_cells(&PRIMED, &p, options, TE_LAG12_PRIMED)?;
    let mut te_exact = true;
    for cells in [&te_full, &te_primed] {
        for c in cells {
            let id = format!("te.{}->{}", c.source, c.target);
            match c.target_nats {
                Some(target) => {
                    let ok = near(c.nats_after_test, target, TE_TOLERANCE);
                    te_exact &= ok;
                    checks.push(
                        id,
                        ok,
                        format!("{:.4} nats after test, target {target}", c.nats_after_test),
                    );
                }
                None => checks.push(
                    format!("te-zero.{}->{}", c.source, c.target),
                    c.nats_after_test == 0.0,
                    format!(
                        "{:.4} nats raw, {:.4} after test",
                        c.nats, c.nats_after_test
                    ),
                ),
            }
        }
        let coupled: Vec<&TeCell> = cells.iter().filter(|c| c.target_nats.is_some()).collect();
        checks.push(
            format!("te-symmetry.{}<->{}", coupled[0].source, coupled[0].target),
            near(coupled[0].nats, coupled[1].nats, SYMMETRY_TOLERANCE),
            format!("{:.12} vs {:.12}", coupled[0].nats, coupled[1].nats),
        );
    }
    let te_branch = if te_exact {
        MetcBranch::Exact
    } else {
        checks.downgrade("te.");
        for (name, cells) in [("full", &te_full), ("primed", &te_primed)] {
            let (ok, detail) = te_fallback_holds(cells);
            checks.push(format!("te-fallback.{name}"), ok, detail);
        }
        MetcBranch::Fallback
    };

    let a = acf(&x[0].to_f64(), ACF_MAX_LAG)?;
    let argmax_lag = a.argmax_lag();
    checks.push(
        "acf.argmax",
        argmax_lag == Some(ACF_PEAK_LAG),
        format!(
            "argmax lag {}, target {ACF_PEAK_LAG}",
            argmax_lag.map_or("none".into(), |l| l.to_string())
        ),
    );

    let doubled = system.with_repeats(system.repeats * 2);
    let (dx, dp) = (doubled.sequences()?, doubled.primed()?);
    let mut doubled_length = Vec::new();
    for (names, orig, dbl) in [(&SERIES, &x, &dx), (&PRIMED, &p, &dp)] {
        for pr in PAIRS {
            let (i, j) = pr;
            let mi = mutual_information(&orig[i], &orig[j], LogBase::Two)?;
            let md = mutual_information(&dbl[i], &dbl[j], LogBase::Two)?;
            checks.push(
                format!("doubled.mi.{}", pair_name(names, pr)),
                near(mi, md, EXACT),
                format!("{mi:.15} vs {md:.15} at length {}", dbl[0].len()),
            );
            doubled_length.push(DoubledCell {
                pair: pair_name(names, pr),
                mutual_information: mi,
                doubled: md,
            });
        }
    }

    let checks = checks.0;
    let all_passed = checks.iter().all(|c| c.passed || c.downgraded);
    Ok(PaperReport {
        schema: REPORT_SCHEMA.to_string(),
        system: system.clone(),
        mi_closed_form: closed_form,
        table1,
        table2,
        metc_branch,
        te_branch,
        transfer_entropy: TeSection {
            lags: TE_LAGS,
            surrogates: options.surrogates,
            level: options.level,
            seed: options.seed,
            full: te_full,
            primed: te_primed,
        },
        acf: AcfSection {
            series: SERIES[0].to_string(),
            values: a.values,
            confidence_halfwidth: a.confidence_halfwidth,
            argmax_lag,
        },
        doubled_length,
        checks,
        all_passed,
    })
}

/// Aligned columns; the first and any `text_from` onwards are left-aligned.
fn render_grid(out: &mut String, header: &[&str], rows: &[Vec<String>], text_from: usize) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |out: &mut String, cells: Vec<&str>| {
        let mut s = String::new();
        for (k, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            let sep = if k == 0 { "" } else { "  " };
            if k == 0 || k >= text_from {
                let _ = write!(s, "{sep}{cell:<w$}");
            } else {
                let _ = write!(s, "{sep}{cell:>w$}");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(out, header.to_vec());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(out, rule.iter().map(String::as_str).collect());
    for r in rows {
        line(out, r.iter().map(String::as_str).collect());
    }
}

fn pattern_text(p: &[i8]) -> String {
    p.iter()
        .map(|v| format!("{v:>2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl PaperReport {
    /// Aligned plain-text rendering in the layout of the published tables.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let s = &self.system;
        let _ = writeln!(out, "system (k = {}, {} repeats)", s.shift_k, s.repeats);
        for (n, p) in [("A", &s.a), ("B", &s.b), ("C", &s.c)] {
            let _ = writeln!(out, "  {n}: {}", pattern_text(p));
        }
        for section in [&self.table1, &self.table2] {
            let _ = writeln!(
                out,
                "\n{} (length {})",
                section.title, section.series_length
            );
            let rows: Vec<Vec<String>> = section
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.pair.clone(),
                        format!("{:.4}", r.correlation.abs()),
                        format!("{:.4}", r.mutual_information),
                        format!("{:.4}", r.metc),
                        format!("{:.4}", r.metc_target),
                    ]
                })
                .collect();
            render_grid(
                &mut out,
                &["pair", "rho", "MI (bits)", "METC", "METC target"],
                &rows,
                usize::MAX,
            );
        }
        let _ = writeln!(out, "\nMETC branch: {}", branch_name(self.metc_branch));
        let te = &self.transfer_entropy;
        let _ = writeln!(
            out,
            "\nTransfer entropy, lag {} (nats; {} surrogates, level {}, seed {}); branch: {}",
            te.lags,
            te.surrogates,
            te.level,
            te.seed,
            branch_name(self.te_branch)
        );
        let rows: Vec<Vec<String>> = te
            .full
            .iter()
            .chain(&te.primed)
            .map(|c| {
                vec![
                    format!("{}->{}", c.source, c.target),
                    format!("{:.4}", c.nats),
                    format!("{:.4}", c.nats_after_test),
                    format!("{:.4}", c.bits),
                    format!("{:.4}", c.uniform_nats),
                    c.target_nats.map_or("0".into(), |v| format!("{v:.4}")),
                ]
            })
            .collect();
        render_grid(
            &mut out,
            &["pair", "TE", "after test", "TE (bits)", "uniform", "target"],
            &rows,
            usize::MAX,
        );
        let _ = writeln!(
            out,
            "\nACF of {}: argmax lag {} (95% band +/-{:.4})",
            self.acf.series,
            self.acf.argmax_lag.map_or("none".into(), |l| l.to_string()),
            self.acf.confidence_halfwidth
        );
        let _ = writeln!(out, "\nChecks");
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                let status = match (c.passed, c.downgraded) {
                    (true, _) => "pass",
                    (false, true) => "downgraded",
                    (false, false) => "FAIL",
                };
                vec![c.id.clone(), status.into(), c.detail.clone()]
            })
            .collect();
        render_grid(&mut out, &["check", "status", "detail"], &rows, 1);
        let _ = writeln!(
            out,
            "\noverall: {}",
            if self.all_passed { "pass" } else { "FAIL" }
        );
        out
    }
}

fn branch_name(b: MetcBranch) -> &'static str {
    match b {
        MetcBranch::Exact => "exact",
        MetcBranch::Fallback => "fallback",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_detection() {
        assert!(is_rotation(&[1, 2, 3], &[3, 1, 2]));
        assert!(!is_rotation(&[1, 2, 3], &[3, 2, 1]));
    }

    #[test]
    fn metc_fallback_examples() {
        let full = [6.0 / 47.0, 6.0 / 47.0, 14.0 / 47.0];
        assert!(metc_fallback_holds(full, [0.0, 0.0, 4.0 / 31.0]));
        assert!(!metc_fallback_holds(full, [1.0 / 31.0, 0.0, 4.0 / 31.0]));
        assert!(!metc_fallback_holds([0.0, 0.0, 0.1], [0.0, 0.0, 0.1]));
        assert!(!metc_fallback_holds([0.1, 0.1, 0.15], [0.0, 0.0, 0.1]));
    }

    #[test]
    fn grid_alignment() {
        let mut s = String::new();
        render_grid(
            &mut s,
            &["a", "bb"],
            &[vec!["xyz".into(), "1".into()]],
            usize::MAX,
        );
        assert_eq!(s, "a    bb\n---  --\nxyz   1\n");
    }
}
