//! Subcommand implementations. Each command computes everything first and
//! only then writes its outputs, each file atomically, so a failing run
//! never leaves truncated artifacts behind.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::change::{rates_for_lexicon, sweep_k, ChangeScore};
use crate::corpus::{lexicon_to_csv, AnalysisBundle, Decade, LexiconEntry};
use crate::covariates::{
    CovariateTable, AOA_FILE, HYPERNYM_EDGES_FILE, SENSE_DATES_FILE, TOKEN_SENSES_FILE,
};
use crate::error::{Error, Exclusion, Result};
use crate::files::{atomic_write, sha256_file};
use crate::prototype::{reconstruction_eval, score_category, ProtoScore};
use crate::stats::{
    kde_1d, ols_fit, pca_project, regression_band, significance_stars, DesignSpec,
    RegressionResult, Table, Transform,
};
use crate::svg;

use super::config::{resolve_formula, Formula, FormulaName, RunConfig};

/// Confidence level of every plotted regression band.
const BAND_LEVEL: f64 = 0.95;
const BAND_POINTS: usize = 100;
const DEFAULT_SWEEP_KS: [usize; 5] = [20, 40, 60, 80, 100];

/// Columns the regression assembler knows how to produce.
const KNOWN_COLUMNS: &str = "proto_est, proto_emp, freq, valence, poly, depth, aoa, word_age";

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(header)
        .map_err(|e| Error::Config(format!("csv serialization: {e}")))?;
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| Error::Config(format!("csv serialization: {e}")))?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv serialization: {e}")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    atomic_write(path, bytes)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_file(path, &csv_bytes(header, rows)?)
}

/// SVG files carry a creation comment unless the run is deterministic; CSVs
/// never do, so their bytes are a pure function of the inputs.
fn write_svg_file(path: &Path, svg: &str, deterministic: bool) -> Result<()> {
    let mut content = String::new();
    if !deterministic {
        let _ = writeln!(content, "<!-- generated at unix {} -->", unix_seconds());
    }
    content.push_str(svg);
    write_file(path, content.as_bytes())
}

fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Bundle restricted to the lexicon survivors of the intersection, plus the
/// exclusion report that is written alongside every analysis.
struct Prepared {
    bundle: AnalysisBundle,
    exclusions: Vec<Exclusion>,
}

fn prepare(config: &RunConfig, decades: &[Decade]) -> Result<Prepared> {
    let mut bundle = config.load_bundle(decades)?;
    let (survivors, exclusions) =
        bundle.intersect_lexicon(decades, config.require_pos.as_deref())?;
    bundle.lexicon = survivors;
    Ok(Prepared { bundle, exclusions })
}

fn exclusion_rows(exclusions: &[Exclusion]) -> Vec<Vec<String>> {
    exclusions
        .iter()
        .map(|e| vec![e.token.clone(), e.reason.to_string()])
        .collect()
}

fn write_exclusions(out: &Path, exclusions: &[Exclusion]) -> Result<()> {
    write_csv(
        &out.join("exclusions.csv"),
        &["token", "reason"],
        &exclusion_rows(exclusions),
    )
}

/// Category names in order of first appearance, optionally narrowed by
/// `--category`.
fn selected_categories(lexicon: &[LexiconEntry], only: Option<&str>) -> Result<Vec<String>> {
    let mut seen = Vec::new();
    for entry in lexicon {
        if !seen.iter().any(|c| c == &entry.category) {
            seen.push(entry.category.clone());
        }
    }
    match only {
        None => Ok(seen),
        Some(name) => {
            if seen.iter().any(|c| c == name) {
                Ok(vec![name.to_string()])
            } else {
                Err(Error::Config(format!(
                    "category {name:?} not in lexicon (available: {})",
                    seen.join(", ")
                )))
            }
        }
    }
}

fn members_of<'a>(lexicon: &'a [LexiconEntry], category: &str) -> Vec<&'a LexiconEntry> {
    lexicon.iter().filter(|e| e.category == category).collect()
}

// ---------------------------------------------------------------------------
// ingest

pub fn ingest(config: &RunConfig) -> Result<()> {
    let decades = [config.t1, config.t2];
    let prepared = prepare(config, &decades)?;
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;

    for (decade, space) in &prepared.bundle.spaces {
        let path = config.out.join(format!("{decade}.semb"));
        space.save_binary(&path)?;
        println!(
            "wrote {} ({} tokens, dim {}, {} all-zero rows dropped)",
            path.display(),
            space.len(),
            space.dim(),
            space.dropped_rows()
        );
    }
    write_file(
        &config.out.join("lexicon_normalized.csv"),
        lexicon_to_csv(&prepared.bundle.lexicon).as_bytes(),
    )?;
    write_exclusions(&config.out, &prepared.exclusions)?;
    println!(
        "lexicon: {} entries kept, {} excluded",
        prepared.bundle.lexicon.len(),
        prepared.exclusions.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// rate

fn rate_rows(scores: &[ChangeScore]) -> Vec<Vec<String>> {
    scores
        .iter()
        .map(|s| {
            vec![
                s.token.clone(),
                s.t1.to_string(),
                s.t2.to_string(),
                s.k.to_string(),
                s.mode.label().to_string(),
                num(s.rate),
            ]
        })
        .collect()
}

fn neighbor_rows(scores: &[ChangeScore]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for score in scores {
        for set in [&score.neighbors_t1, &score.neighbors_t2] {
            for (rank, neighbor) in set.neighbors().iter().enumerate() {
                rows.push(vec![
                    score.token.clone(),
                    set.decade().to_string(),
                    (rank + 1).to_string(),
                    neighbor.token.clone(),
                    num(neighbor.similarity),
                ]);
            }
        }
    }
    rows
}

pub fn rate(config: &RunConfig, dump_neighbors: bool) -> Result<()> {
    let prepared = prepare(config, &[config.t1, config.t2])?;
    let k = config.k_for_mode();
    let scores = rates_for_lexicon(&prepared.bundle, config.t1, config.t2, k, config.mode)?;

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_csv(
        &config.out.join("rates.csv"),
        &["token", "t1", "t2", "k", "mode", "rate"],
        &rate_rows(&scores),
    )?;
    if dump_neighbors {
        write_csv(
            &config.out.join("neighbors.csv"),
            &["token", "decade", "rank", "neighbor", "similarity"],
            &neighbor_rows(&scores),
        )?;
    }
    write_exclusions(&config.out, &prepared.exclusions)?;
    println!(
        "computed {} rates between {} and {} (k={}, mode={})",
        scores.len(),
        config.t1,
        config.t2,
        k,
        config.mode.label()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// proto

struct ProtoRun {
    rows: Vec<Vec<String>>,
    reconstruction: Vec<String>,
}

fn run_proto(
    prepared: &Prepared,
    config: &RunConfig,
    decades: &[Decade],
    leave_one_out: bool,
) -> Result<ProtoRun> {
    let lexicon = &prepared.bundle.lexicon;
    let categories = selected_categories(lexicon, config.category.as_deref())?;
    let mut rows = Vec::new();
    let mut reconstruction = Vec::new();
    for category in &categories {
        let entries = members_of(lexicon, category);
        let members: Vec<String> = entries.iter().map(|e| e.token.clone()).collect();
        let ratings: HashMap<&str, f64> = entries
            .iter()
            .map(|e| (e.token.as_str(), e.prototypicality))
            .collect();
        let category_entries: Vec<LexiconEntry> =
            entries.iter().map(|&e| e.clone()).collect();
        for &decade in decades {
            let space = prepared.bundle.space(decade)?;
            let scores = score_category(space, category, &members, leave_one_out)?;
            let line = match reconstruction_eval(&scores, &category_entries) {
                Ok(eval) => format!(
                    "reconstruction {category} @ {decade}: rho={:.4}, p={:.3e}, n={} {}",
                    eval.rho,
                    eval.p,
                    eval.n,
                    significance_stars(eval.p)
                ),
                Err(err) => format!(
                    "reconstruction {category} @ {decade}: unavailable ({})",
                    err.single_line()
                ),
            };
            reconstruction.push(line);
            for ProtoScore {
                token,
                decade,
                score,
            } in scores
            {
                let rating = ratings[token.as_str()];
                rows.push(vec![
                    category.clone(),
                    token,
                    decade.to_string(),
                    num(score),
                    num(rating),
                ]);
            }
        }
    }
    Ok(ProtoRun {
        rows,
        reconstruction,
    })
}

pub fn proto(config: &RunConfig, decades: &[Decade], leave_one_out: bool) -> Result<()> {
    let mut wanted: Vec<Decade> = if decades.is_empty() {
        vec![config.t1]
    } else {
        decades.to_vec()
    };
    wanted.sort_unstable();
    wanted.dedup();

    let prepared = prepare(config, &wanted)?;
    let run = run_proto(&prepared, config, &wanted, leave_one_out)?;

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_csv(
        &config.out.join("proto.csv"),
        &["category", "token", "decade", "score", "empirical_rating"],
        &run.rows,
    )?;
    write_exclusions(&config.out, &prepared.exclusions)?;
    for line in &run.reconstruction {
        println!("{line}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// regression assembly shared by regress, influence, and report

struct RegressionData {
    formula: Formula,
    table: Table,
    result: RegressionResult,
    /// (token, first missing column) per dropped row.
    dropped: Vec<(String, String)>,
}

/// Prototypicality estimated from the embeddings at `decade`, keyed by
/// (category, token).
fn proto_est_scores(
    prepared: &Prepared,
    decade: Decade,
) -> Result<HashMap<(String, String), f64>> {
    let lexicon = &prepared.bundle.lexicon;
    let space = prepared.bundle.space(decade)?;
    let mut scores = HashMap::new();
    for category in selected_categories(lexicon, None)? {
        let members: Vec<String> = members_of(lexicon, &category)
            .iter()
            .map(|e| e.token.clone())
            .collect();
        for s in score_category(space, &category, &members, false)? {
            scores.insert((category.clone(), s.token), s.score);
        }
    }
    Ok(scores)
}

fn missing_covariates_error(column: &str, config: &RunConfig) -> Error {
    let files = match column {
        "depth" => format!("{HYPERNYM_EDGES_FILE} and {TOKEN_SENSES_FILE}"),
        "poly" | "word_age" => SENSE_DATES_FILE.to_string(),
        "aoa" => AOA_FILE.to_string(),
        _ => "covariate files".to_string(),
    };
    let hint = match &config.covariates_dir {
        None => format!("pass --covariates <dir> containing {files}"),
        Some(dir) => format!("add {files} to {}", dir.display()),
    };
    Error::MissingColumn {
        column: column.to_string(),
        hint,
    }
}

/// Build the covariate table when the formula needs one, checking that each
/// referenced column's backing resource is actually present.
fn covariates_for(
    config: &RunConfig,
    lexicon: &[LexiconEntry],
    needed: &[String],
) -> Result<Option<CovariateTable>> {
    let wanted: Vec<&str> = needed
        .iter()
        .map(String::as_str)
        .filter(|n| matches!(*n, "poly" | "depth" | "aoa" | "word_age"))
        .collect();
    if wanted.is_empty() {
        return Ok(None);
    }
    let resources = config
        .load_covariates()?
        .ok_or_else(|| missing_covariates_error(wanted[0], config))?;
    for name in &wanted {
        let present = match *name {
            "depth" => resources.graph.is_some(),
            "poly" | "word_age" => resources.dates.is_some(),
            "aoa" => resources.aoa.is_some(),
            _ => true,
        };
        if !present {
            return Err(missing_covariates_error(name, config));
        }
    }
    let tokens: Vec<String> = lexicon.iter().map(|e| e.token.clone()).collect();
    let pos = config.require_pos.as_deref().unwrap_or("NOUN");
    Ok(Some(resources.build_table(&tokens, pos, config.t1)))
}

fn build_regression(
    config: &RunConfig,
    prepared: &Prepared,
    scores: &[ChangeScore],
    formula: Formula,
) -> Result<RegressionData> {
    let lexicon = &prepared.bundle.lexicon;

    // Distinct columns in first-use order; one column can back several
    // predictors (e.g. freq and log10(freq)).
    let mut needed: Vec<String> = Vec::new();
    for p in &formula.predictors {
        if !needed.contains(&p.column) {
            needed.push(p.column.clone());
        }
    }

    let proto_est = if needed.iter().any(|n| n == "proto_est") {
        proto_est_scores(prepared, config.t1)?
    } else {
        HashMap::new()
    };
    let covariates = covariates_for(config, lexicon, &needed)?;

    let mut columns: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for name in &needed {
        let column: Vec<Option<f64>> = match name.as_str() {
            "proto_est" => lexicon
                .iter()
                .map(|e| {
                    proto_est
                        .get(&(e.category.clone(), e.token.clone()))
                        .copied()
                })
                .collect(),
            "proto_emp" => lexicon.iter().map(|e| Some(e.prototypicality)).collect(),
            "valence" => lexicon.iter().map(|e| Some(e.valence)).collect(),
            "freq" => lexicon
                .iter()
                .map(|e| prepared.bundle.freq.get(&e.token, config.t1))
                .collect(),
            "poly" | "depth" | "aoa" | "word_age" => {
                let table = covariates.as_ref().expect("checked above");
                table.rows().iter().map(|r| r.get(name)).collect()
            }
            other => {
                return Err(Error::MissingColumn {
                    column: other.to_string(),
                    hint: format!("known columns: {KNOWN_COLUMNS}"),
                })
            }
        };
        columns.insert(name.as_str(), column);
    }

    // Keep only rows with every needed value; report what was dropped.
    let mut labels = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (i, entry) in lexicon.iter().enumerate() {
        match needed.iter().find(|n| columns[n.as_str()][i].is_none()) {
            Some(missing) => dropped.push((entry.token.clone(), missing.clone())),
            None => {
                labels.push(entry.token.clone());
                kept.push(i);
            }
        }
    }

    let mut table = Table::new(labels);
    table.add_column(
        "rate",
        kept.iter().map(|&i| scores[i].rate).collect::<Vec<_>>(),
    )?;
    for name in &needed {
        let full = &columns[name.as_str()];
        table.add_column(
            name.clone(),
            kept.iter()
                .map(|&i| full[i].expect("kept rows are complete"))
                .collect::<Vec<_>>(),
        )?;
    }

    let spec = DesignSpec::new("rate", formula.predictors.clone());
    let result = ols_fit(&spec, &table)?;
    Ok(RegressionData {
        formula,
        table,
        result,
        dropped,
    })
}

fn enforce_formula_decades(config: &RunConfig, name: FormulaName) -> Result<()> {
    if name == FormulaName::C3 && !config.force && (config.t1, config.t2) != (1980, 1990) {
        return Err(Error::Config(format!(
            "formula c3 is defined over 1980 to 1990, got {} to {}; rerun with --t1 1980 --t2 1990 or pass --force",
            config.t1, config.t2
        )));
    }
    Ok(())
}

fn regression_rows(result: &RegressionResult) -> Vec<Vec<String>> {
    result
        .coefficients
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                num(c.beta),
                num(c.se),
                num(c.t),
                num(c.p),
                significance_stars(c.p).to_string(),
            ]
        })
        .collect()
}

fn influence_rows(result: &RegressionResult) -> Vec<Vec<String>> {
    result
        .labels
        .iter()
        .zip(result.residuals.iter())
        .zip(result.leverages.iter())
        .zip(result.cooks_d.iter())
        .map(|(((token, &residual), &leverage), &cooks)| {
            vec![
                token.clone(),
                num(residual),
                num(leverage),
                num(cooks),
            ]
        })
        .collect()
}

/// Tokens ranked by Cook's distance, largest first, token order breaking
/// ties.
fn top_influential(result: &RegressionResult, n: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = result
        .labels
        .iter()
        .cloned()
        .zip(result.cooks_d.iter().copied())
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}

fn summary_block(config: &RunConfig, data: &RegressionData) -> String {
    let result = &data.result;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "model: {} [{}]",
        data.formula.describe(),
        data.formula.name
    );
    let _ = writeln!(
        out,
        "decades: {} to {}; k={}; mode={}",
        config.t1,
        config.t2,
        config.k_for_mode(),
        config.mode.label()
    );
    let _ = writeln!(
        out,
        "n = {} ({} rows dropped with incomplete covariates)",
        result.n,
        data.dropped.len()
    );
    let _ = writeln!(
        out,
        "R^2 = {:.4}, adjusted R^2 = {:.4}",
        result.r_squared, result.adj_r_squared
    );
    let _ = writeln!(
        out,
        "F = {:.4} on {} and {} df, p = {:.3e} {}",
        result.f_statistic,
        result.rank - 1,
        result.n - result.rank,
        result.f_p_value,
        significance_stars(result.f_p_value)
    );
    let _ = writeln!(
        out,
        "{:<16} {:>12} {:>12} {:>9} {:>12}",
        "predictor", "beta", "se", "t", "p"
    );
    for c in &result.coefficients {
        let _ = writeln!(
            out,
            "{:<16} {:>12.6} {:>12.6} {:>9.3} {:>12.3e} {}",
            c.name,
            c.beta,
            c.se,
            c.t,
            c.p,
            significance_stars(c.p)
        );
    }
    if !data.dropped.is_empty() {
        let listed: Vec<String> = data
            .dropped
            .iter()
            .map(|(token, column)| format!("{token} (missing {column})"))
            .collect();
        let _ = writeln!(out, "dropped rows: {}", listed.join(", "));
    }
    out
}

fn run_regression(config: &RunConfig, predictors: &[String]) -> Result<(Prepared, RegressionData)> {
    let formula = resolve_formula(config.formula, predictors)?;
    enforce_formula_decades(config, formula.name)?;
    let prepared = prepare(config, &[config.t1, config.t2])?;
    let scores = rates_for_lexicon(
        &prepared.bundle,
        config.t1,
        config.t2,
        config.k_for_mode(),
        config.mode,
    )?;
    let data = build_regression(config, &prepared, &scores, formula)?;
    Ok((prepared, data))
}

pub fn regress(config: &RunConfig, predictors: &[String]) -> Result<()> {
    let (prepared, data) = run_regression(config, predictors)?;

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_csv(
        &config.out.join("regression.csv"),
        &["name", "beta", "se", "t", "p", "stars"],
        &regression_rows(&data.result),
    )?;
    write_csv(
        &config.out.join("influence.csv"),
        &["token", "residual", "leverage", "cooks_d"],
        &influence_rows(&data.result),
    )?;
    write_exclusions(&config.out, &prepared.exclusions)?;
    print!("{}", summary_block(config, &data));
    Ok(())
}

pub fn influence(config: &RunConfig, predictors: &[String]) -> Result<()> {
    let (prepared, data) = run_regression(config, predictors)?;

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_csv(
        &config.out.join("influence.csv"),
        &["token", "residual", "leverage", "cooks_d"],
        &influence_rows(&data.result),
    )?;
    write_exclusions(&config.out, &prepared.exclusions)?;
    let top: Vec<String> = top_influential(&data.result, 3)
        .into_iter()
        .map(|(token, d)| format!("{token} (D={d:.4})"))
        .collect();
    println!("most influential: {}", top.join(", "));
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep

pub fn sweep(config: &RunConfig, ks: &[usize]) -> Result<()> {
    let ks: Vec<usize> = if ks.is_empty() {
        DEFAULT_SWEEP_KS.to_vec()
    } else {
        ks.to_vec()
    };
    let prepared = prepare(config, &[config.t1, config.t2])?;
    let result = sweep_k(&prepared.bundle, config.t1, config.t2, &ks, config.mode)?;

    let mut header: Vec<String> = vec!["token".to_string()];
    header.extend(result.ks.iter().map(|k| format!("rate_k{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = result
        .tokens
        .iter()
        .zip(result.rates.iter())
        .map(|(token, rates)| {
            let mut row = vec![token.clone()];
            row.extend(rates.iter().map(|&r| num(r)));
            row
        })
        .collect();

    let mut matrix_header: Vec<String> = vec!["k".to_string()];
    matrix_header.extend(result.ks.iter().map(|k| k.to_string()));
    let matrix_header_refs: Vec<&str> = matrix_header.iter().map(String::as_str).collect();
    let rho_rows: Vec<Vec<String>> = result
        .ks
        .iter()
        .zip(result.correlations.iter())
        .map(|(k, row)| {
            let mut out = vec![k.to_string()];
            out.extend(row.iter().map(|c| num(c.rho)));
            out
        })
        .collect();
    let p_rows: Vec<Vec<String>> = result
        .ks
        .iter()
        .zip(result.correlations.iter())
        .map(|(k, row)| {
            let mut out = vec![k.to_string()];
            out.extend(row.iter().map(|c| num(c.p)));
            out
        })
        .collect();

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_csv(&config.out.join("sweep.csv"), &header_refs, &rows)?;
    write_csv(
        &config.out.join("sweep_correlations.csv"),
        &matrix_header_refs,
        &rho_rows,
    )?;
    write_csv(
        &config.out.join("sweep_pvalues.csv"),
        &matrix_header_refs,
        &p_rows,
    )?;
    write_exclusions(&config.out, &prepared.exclusions)?;
    println!(
        "swept {} tokens over k = {:?} (mode={})",
        result.tokens.len(),
        result.ks,
        config.mode.label()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// project

/// Median lexicon valence, the threshold between "+" and "-" annotations.
fn median_valence(lexicon: &[LexiconEntry]) -> Option<f64> {
    if lexicon.is_empty() {
        return None;
    }
    let mut values: Vec<f64> = lexicon.iter().map(|e| e.valence).collect();
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

pub fn project(config: &RunConfig, tokens: &[String], decades: &[Decade]) -> Result<()> {
    let mut wanted: Vec<Decade> = if decades.is_empty() {
        vec![config.t1, config.t2]
    } else {
        decades.to_vec()
    };
    wanted.sort_unstable();
    wanted.dedup();

    let bundle = config.load_bundle(&wanted)?;
    let mut labels: Vec<(String, Decade)> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for token in tokens {
        let token = crate::corpus::nfc(token);
        for &decade in &wanted {
            let space = bundle.space(decade)?;
            let vector = space.vector(&token).ok_or_else(|| Error::MissingWord {
                token: token.clone(),
                decade,
            })?;
            vectors.push(vector.iter().map(|&v| f64::from(v)).collect());
            labels.push((token.clone(), decade));
        }
    }

    let projection = pca_project(&vectors, 2)?;
    let median = median_valence(&bundle.lexicon);
    let valence_of = |token: &str| -> Option<f64> {
        bundle
            .lexicon
            .iter()
            .find(|e| e.token == token)
            .map(|e| e.valence)
    };

    let mut rows = Vec::new();
    let mut points = Vec::new();
    for ((token, decade), coords) in labels.iter().zip(projection.coordinates.iter()) {
        let valence = valence_of(token);
        rows.push(vec![
            token.clone(),
            decade.to_string(),
            num(coords[0]),
            num(coords[1]),
            valence.map(num).unwrap_or_default(),
        ]);
        points.push(svg::PcaPoint {
            token: token.clone(),
            decade: *decade,
            x: coords[0],
            y: coords[1],
            valence_positive: match (valence, median) {
                (Some(v), Some(m)) => Some(v >= m),
                _ => None,
            },
        });
    }

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_csv(
        &config.out.join("pca.csv"),
        &["token", "decade", "pc1", "pc2", "valence"],
        &rows,
    )?;
    let chart = svg::pca_scatter("Principal component projection", &points)?;
    write_svg_file(
        &config.out.join("projection.svg"),
        &chart,
        config.deterministic,
    )?;
    println!(
        "projected {} points; singular values: {}",
        points.len(),
        projection
            .singular_values
            .iter()
            .map(|s| format!("{s:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// density

struct DensityRun {
    rows: Vec<Vec<String>>,
    series: Vec<svg::DensitySeries>,
}

fn run_density(
    prepared: &Prepared,
    config: &RunConfig,
    scores: &[ChangeScore],
    groups: &[String],
    bandwidth: Option<f64>,
) -> Result<DensityRun> {
    let lexicon = &prepared.bundle.lexicon;
    let groups: Vec<String> = if groups.is_empty() {
        selected_categories(lexicon, config.category.as_deref())?
    } else {
        groups.to_vec()
    };

    let rate_of: HashMap<(&str, &str), f64> = lexicon
        .iter()
        .zip(scores.iter())
        .map(|(e, s)| ((e.category.as_str(), e.token.as_str()), s.rate))
        .collect();

    let mut rows = Vec::new();
    let mut series = Vec::new();
    for group in &groups {
        let entries = members_of(lexicon, group);
        if entries.is_empty() {
            return Err(Error::EmptyCategory {
                category: group.clone(),
                decade: config.t1,
            });
        }
        let values: Vec<f64> = entries
            .iter()
            .map(|e| rate_of[&(e.category.as_str(), e.token.as_str())])
            .collect();
        let curve = kde_1d(&values, bandwidth)?;
        for (&x, &d) in curve.grid.iter().zip(curve.density.iter()) {
            rows.push(vec![group.clone(), num(x), num(d)]);
        }
        let rug: Vec<(f64, f64)> = entries
            .iter()
            .zip(values.iter())
            .map(|(e, &rate)| (rate, e.prototypicality))
            .collect();
        println!(
            "density {group}: n={}, bandwidth={:.6}, integral={:.4}",
            values.len(),
            curve.bandwidth,
            curve.trapezoid_integral()
        );
        series.push(svg::DensitySeries {
            name: group.clone(),
            curve,
            rug,
        });
    }
    Ok(DensityRun { rows, series })
}

pub fn density(config: &RunConfig, groups: &[String], bandwidth: Option<f64>) -> Result<()> {
    let prepared = prepare(config, &[config.t1, config.t2])?;
    let scores = rates_for_lexicon(
        &prepared.bundle,
        config.t1,
        config.t2,
        config.k_for_mode(),
        config.mode,
    )?;
    let run = run_density(&prepared, config, &scores, groups, bandwidth)?;

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    write_csv(
        &config.out.join("density.csv"),
        &["group", "x", "density"],
        &run.rows,
    )?;
    let chart = svg::density_overlay("Change rate densities", "rate", &run.series)?;
    write_svg_file(&config.out.join("density.svg"), &chart, config.deterministic)?;
    write_exclusions(&config.out, &prepared.exclusions)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// report

fn manifest_config_lines(config: &RunConfig, dump_neighbors: bool) -> Vec<String> {
    let mut lines = vec![
        format!("config.deterministic={}", config.deterministic),
        format!("config.dump_neighbors={dump_neighbors}"),
        format!("config.formula={}", config.formula),
        format!("config.k={}", config.k_for_mode()),
        format!("config.mode={}", config.mode.label()),
        format!(
            "config.require_pos={}",
            config.require_pos.as_deref().unwrap_or("any")
        ),
        format!("config.t1={}", config.t1),
        format!("config.t2={}", config.t2),
    ];
    if let Some(category) = &config.category {
        lines.push(format!("config.category={category}"));
    }
    if let Some(seed) = config.seed {
        lines.push(format!("config.seed={seed}"));
    }
    lines
}

fn manifest_input_lines(config: &RunConfig, decades: &[Decade]) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    let mut wanted: Vec<Decade> = decades.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    for decade in wanted {
        let path = config.space_path(decade)?;
        lines.push(format!(
            "input.embeddings.{decade}.sha256={}",
            sha256_file(&path)?
        ));
    }
    lines.push(format!("input.pos.sha256={}", sha256_file(&config.pos_path)?));
    lines.push(format!(
        "input.freq.sha256={}",
        sha256_file(&config.freq_path)?
    ));
    lines.push(format!(
        "input.lexicon.sha256={}",
        sha256_file(&config.lexicon_path)?
    ));
    if let Some(dir) = &config.covariates_dir {
        for name in [
            HYPERNYM_EDGES_FILE,
            TOKEN_SENSES_FILE,
            SENSE_DATES_FILE,
            AOA_FILE,
        ] {
            let path = dir.join(name);
            if path.is_file() {
                lines.push(format!("input.covariates.{name}.sha256={}", sha256_file(&path)?));
            }
        }
    }
    Ok(lines)
}

fn manifest_text(config: &RunConfig, dump_neighbors: bool) -> Result<String> {
    let mut lines = manifest_config_lines(config, dump_neighbors);
    lines.extend(manifest_input_lines(config, &[config.t1, config.t2])?);
    lines.push(format!("tool.version=semshift {}", env!("CARGO_PKG_VERSION")));
    if !config.deterministic {
        lines.push(format!("created={}", unix_seconds()));
    }
    lines.sort_unstable();
    Ok(lines.join("\n") + "\n")
}

pub fn report(config: &RunConfig, dump_neighbors: bool, predictors: &[String]) -> Result<()> {
    // Everything is computed before the first write so a failing input
    // leaves the output directory untouched.
    let formula = resolve_formula(config.formula, predictors)?;
    enforce_formula_decades(config, formula.name)?;
    let prepared = prepare(config, &[config.t1, config.t2])?;
    let scores = rates_for_lexicon(
        &prepared.bundle,
        config.t1,
        config.t2,
        config.k_for_mode(),
        config.mode,
    )?;
    let proto_run = run_proto(&prepared, config, &[config.t1], false)?;
    let regression = build_regression(config, &prepared, &scores, formula)?;
    let density_run = run_density(&prepared, config, &scores, &[], None)?;

    // Scatter of rate against the first predictor, with a confidence band
    // from the simple regression of that pair.
    let first = &regression.formula.predictors[0];
    let raw = regression
        .table
        .column(&first.column)
        .expect("fitted formula columns exist");
    let xs: Vec<f64> = raw
        .iter()
        .map(|&v| match first.transform {
            Transform::Identity => v,
            Transform::Log10 => v.log10(),
        })
        .collect();
    let ys = regression.table.column("rate").expect("response exists");
    let band = regression_band(&xs, ys, BAND_LEVEL, BAND_POINTS)?;
    let band_rows: Vec<Vec<String>> = band
        .grid
        .iter()
        .zip(band.fitted.iter())
        .zip(band.lower.iter())
        .zip(band.upper.iter())
        .map(|(((&x, &fitted), &lower), &upper)| {
            vec![num(x), num(fitted), num(lower), num(upper)]
        })
        .collect();
    let scatter_points: Vec<svg::ScatterPoint> = xs
        .iter()
        .zip(ys.iter())
        .map(|(&x, &y)| svg::ScatterPoint {
            x,
            y,
            label: None,
        })
        .collect();
    let scatter = svg::scatter_with_band(
        "Change rate against first predictor",
        &first.label(),
        "rate",
        &scatter_points,
        Some(&band),
    )?;
    // The intercept is uninformative in the bar chart; slice it off.
    let bars = svg::coefficient_bars(
        "Regression coefficients",
        &regression.result.coefficients[1..],
    )?;
    let density_chart = svg::density_overlay("Change rate densities", "rate", &density_run.series)?;

    let mut summary = String::new();
    for line in &proto_run.reconstruction {
        let _ = writeln!(summary, "{line}");
    }
    let _ = writeln!(
        summary,
        "rates: {} tokens, {} excluded",
        scores.len(),
        prepared.exclusions.len()
    );
    summary.push_str(&summary_block(config, &regression));
    let manifest = manifest_text(config, dump_neighbors)?;

    let out = &config.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_csv(
        &out.join("rates.csv"),
        &["token", "t1", "t2", "k", "mode", "rate"],
        &rate_rows(&scores),
    )?;
    if dump_neighbors {
        write_csv(
            &out.join("neighbors.csv"),
            &["token", "decade", "rank", "neighbor", "similarity"],
            &neighbor_rows(&scores),
        )?;
    }
    write_csv(
        &out.join("proto.csv"),
        &["category", "token", "decade", "score", "empirical_rating"],
        &proto_run.rows,
    )?;
    write_csv(
        &out.join("regression.csv"),
        &["name", "beta", "se", "t", "p", "stars"],
        &regression_rows(&regression.result),
    )?;
    write_csv(
        &out.join("influence.csv"),
        &["token", "residual", "leverage", "cooks_d"],
        &influence_rows(&regression.result),
    )?;
    write_csv(
        &out.join("band.csv"),
        &["x", "fitted", "lower", "upper"],
        &band_rows,
    )?;
    write_csv(&out.join("density.csv"), &["group", "x", "density"], &density_run.rows)?;
    write_exclusions(out, &prepared.exclusions)?;
    write_file(
        &out.join("lexicon_normalized.csv"),
        lexicon_to_csv(&prepared.bundle.lexicon).as_bytes(),
    )?;
    write_file(&out.join("summary.txt"), summary.as_bytes())?;
    write_svg_file(&out.join("rate_vs_predictor.svg"), &scatter, config.deterministic)?;
    write_svg_file(&out.join("coefficients.svg"), &bars, config.deterministic)?;
    write_svg_file(&out.join("density.svg"), &density_chart, config.deterministic)?;
    write_file(&out.join("manifest.txt"), manifest.as_bytes())?;
    Ok(())
}

/// Check the checksums recorded in `--out`'s manifest against the currently
/// configured inputs.
pub fn verify_report(config: &RunConfig) -> Result<()> {
    let path = config.out.join("manifest.txt");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let recorded: BTreeMap<&str, &str> = text
        .lines()
        .filter(|l| l.starts_with("input."))
        .filter_map(|l| l.split_once('='))
        .collect();
    if recorded.is_empty() {
        return Err(Error::Manifest(format!(
            "{} lists no input checksums",
            path.display()
        )));
    }

    let current_lines = manifest_input_lines(config, &[config.t1, config.t2])?;
    let current: BTreeMap<&str, &str> = current_lines
        .iter()
        .filter_map(|l| l.split_once('='))
        .collect();

    let mut failures = Vec::new();
    for (key, want) in &recorded {
        match current.get(key) {
            Some(have) if have == want => println!("ok {key}"),
            Some(_) => {
                println!("MISMATCH {key}");
                failures.push(format!("{key} differs"));
            }
            None => {
                println!("MISSING {key}");
                failures.push(format!("{key} not resolvable from current config"));
            }
        }
    }
    for key in current.keys() {
        if !recorded.contains_key(key) {
            println!("UNRECORDED {key}");
            failures.push(format!("{key} present now but absent from manifest"));
        }
    }
    if failures.is_empty() {
        println!("manifest ok ({} inputs)", recorded.len());
        Ok(())
    } else {
        Err(Error::Manifest(failures.join("; ")))
    }
}
