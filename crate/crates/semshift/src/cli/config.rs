//! Run configuration: merging command-line flags, an optional key=value
//! config file, and the `SEMSHIFT_DATA` environment variable into resolved,
//! validated paths and analysis parameters.
//!
//! Precedence is flags over file over environment-derived defaults.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::change::ChangeMode;
use crate::corpus::{
    load_lexicon, validate_decade, AnalysisBundle, Decade, EmbeddingSpace, FrequencyTable,
    PosTable,
};
use crate::covariates::CovariateResources;
use crate::error::{Error, Result};
use crate::stats::Predictor;

use super::SharedArgs;

/// Environment variable naming the default data root. When set, input paths
/// default to `embeddings/`, `pos.txt`, `freq.txt`, `lexicon.csv`, and
/// `covariates/` under it.
pub const SEMSHIFT_DATA_ENV: &str = "SEMSHIFT_DATA";

/// Named regression formula selecting a fixed predictor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaName {
    /// rate ~ proto_est + log10(freq) + valence
    Eq3,
    /// rate ~ proto_emp + log10(freq)
    Eq4,
    /// rate ~ proto_est + log10(freq) + poly + valence + depth + aoa
    C2,
    /// rate ~ proto_emp + log10(freq) + poly + valence + depth + aoa,
    /// defined over the 1980 to 1990 decade pair
    C3,
    /// predictors supplied explicitly via --predictors
    Custom,
}

impl FormulaName {
    pub fn label(self) -> &'static str {
        match self {
            FormulaName::Eq3 => "eq3",
            FormulaName::Eq4 => "eq4",
            FormulaName::C2 => "c2",
            FormulaName::C3 => "c3",
            FormulaName::Custom => "custom",
        }
    }
}

impl fmt::Display for FormulaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FormulaName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eq3" => Ok(FormulaName::Eq3),
            "eq4" => Ok(FormulaName::Eq4),
            "c2" => Ok(FormulaName::C2),
            "c3" => Ok(FormulaName::C3),
            "custom" => Ok(FormulaName::Custom),
            other => Err(Error::Config(format!(
                "unknown formula {other:?}; expected eq3, eq4, c2, c3, or custom"
            ))),
        }
    }
}

/// A resolved formula: the named preset expanded to concrete predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    pub name: FormulaName,
    pub predictors: Vec<Predictor>,
}

impl Formula {
    /// Human-readable model statement, e.g.
    /// `rate ~ proto_est + log10(freq) + valence`.
    pub fn describe(&self) -> String {
        let terms: Vec<String> = self.predictors.iter().map(|p| p.label()).collect();
        format!("rate ~ {}", terms.join(" + "))
    }
}

/// Parse one custom predictor: either a bare column name or
/// `log10(column)`.
pub fn parse_predictor(raw: &str) -> Result<Predictor> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(Error::Config("empty predictor name".into()));
    }
    if let Some(inner) = raw.strip_prefix("log10(").and_then(|r| r.strip_suffix(')')) {
        let inner = inner.trim();
        if inner.is_empty() {
            return Err(Error::Config("empty column inside log10()".into()));
        }
        return Ok(Predictor::log10(inner));
    }
    if raw.contains('(') || raw.contains(')') {
        return Err(Error::Config(format!(
            "unsupported transform in predictor {raw:?}; only log10(column) is recognized"
        )));
    }
    Ok(Predictor::raw(raw))
}

/// Expand a formula name to its predictor list. The fixed presets reject a
/// supplied predictor list so nobody silently widens eq3 or eq4.
pub fn resolve_formula(name: FormulaName, custom: &[String]) -> Result<Formula> {
    if name != FormulaName::Custom && !custom.is_empty() {
        return Err(Error::Config(format!(
            "formula {name} has a fixed predictor set; drop --predictors or use --formula custom"
        )));
    }
    let predictors = match name {
        FormulaName::Eq3 => vec![
            Predictor::raw("proto_est"),
            Predictor::log10("freq"),
            Predictor::raw("valence"),
        ],
        FormulaName::Eq4 => vec![Predictor::raw("proto_emp"), Predictor::log10("freq")],
        FormulaName::C2 => vec![
            Predictor::raw("proto_est"),
            Predictor::log10("freq"),
            Predictor::raw("poly"),
            Predictor::raw("valence"),
            Predictor::raw("depth"),
            Predictor::raw("aoa"),
        ],
        FormulaName::C3 => vec![
            Predictor::raw("proto_emp"),
            Predictor::log10("freq"),
            Predictor::raw("poly"),
            Predictor::raw("valence"),
            Predictor::raw("depth"),
            Predictor::raw("aoa"),
        ],
        FormulaName::Custom => {
            if custom.is_empty() {
                return Err(Error::Config(
                    "--formula custom requires --predictors with at least one column".into(),
                ));
            }
            custom
                .iter()
                .map(|p| parse_predictor(p))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(Formula { name, predictors })
}

/// Fully resolved run parameters shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub embeddings_dir: PathBuf,
    pub pos_path: PathBuf,
    pub freq_path: PathBuf,
    pub lexicon_path: PathBuf,
    pub covariates_dir: Option<PathBuf>,
    pub t1: Decade,
    pub t2: Decade,
    /// Explicit k; `None` falls back to the mode default (100 whole-lexicon,
    /// 25 category-bounded).
    pub k: Option<usize>,
    pub mode: ChangeMode,
    pub formula: FormulaName,
    pub out: PathBuf,
    pub deterministic: bool,
    /// Required POS tag for intersection; `None` admits any tag.
    pub require_pos: Option<String>,
    pub category: Option<String>,
    /// Reserved for sampled extensions; recorded in the manifest, otherwise
    /// unused because the pipeline draws nothing at random.
    pub seed: Option<u64>,
    pub force: bool,
}

const FILE_KEYS: [&str; 17] = [
    "embeddings-dir",
    "pos",
    "freq",
    "lexicon",
    "covariates",
    "t1",
    "t2",
    "k",
    "mode",
    "formula",
    "out",
    "deterministic",
    "require-pos",
    "category",
    "seed",
    "force",
    "data-root",
];

/// Parse a plain `key=value` config file. `#` comments and blank lines are
/// skipped; keys must come from the documented set and appear at most once.
fn parse_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::format(path, line_no, "expected key=value"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !FILE_KEYS.contains(&key.as_str()) {
            return Err(Error::format(
                path,
                line_no,
                format!("unknown config key {key:?}"),
            ));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::format(
                path,
                line_no,
                format!("duplicate config key {key:?}"),
            ));
        }
    }
    Ok(map)
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse()
        .map_err(|e| Error::Config(format!("config key {key}={raw:?}: {e}")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "config key {key}={raw:?}: expected true or false"
        ))),
    }
}

fn require_path(
    value: Option<PathBuf>,
    flag: &str,
    expect_dir: bool,
) -> Result<PathBuf> {
    let path = value.ok_or_else(|| {
        Error::Config(format!(
            "no {flag} given; pass --{flag}, set it in --config, or set {SEMSHIFT_DATA_ENV}"
        ))
    })?;
    let ok = if expect_dir {
        path.is_dir()
    } else {
        path.is_file()
    };
    if !ok {
        let kind = if expect_dir { "directory" } else { "file" };
        return Err(Error::Config(format!(
            "--{flag} {}: no such {kind}",
            path.display()
        )));
    }
    Ok(path)
}

impl RunConfig {
    /// Merge flags, the optional config file, and the environment into a
    /// validated configuration.
    pub fn resolve(shared: &SharedArgs) -> Result<Self> {
        let file = match &shared.config {
            Some(path) => parse_config_file(path)?,
            None => HashMap::new(),
        };
        let data_root: Option<PathBuf> = file
            .get("data-root")
            .map(PathBuf::from)
            .or_else(|| std::env::var_os(SEMSHIFT_DATA_ENV).map(PathBuf::from));
        let from_root = |leaf: &str| data_root.as_ref().map(|r| r.join(leaf));

        let embeddings_dir = shared
            .embeddings_dir
            .clone()
            .or_else(|| file.get("embeddings-dir").map(PathBuf::from))
            .or_else(|| from_root("embeddings"));
        let pos_path = shared
            .pos
            .clone()
            .or_else(|| file.get("pos").map(PathBuf::from))
            .or_else(|| from_root("pos.txt"));
        let freq_path = shared
            .freq
            .clone()
            .or_else(|| file.get("freq").map(PathBuf::from))
            .or_else(|| from_root("freq.txt"));
        let lexicon_path = shared
            .lexicon
            .clone()
            .or_else(|| file.get("lexicon").map(PathBuf::from))
            .or_else(|| from_root("lexicon.csv"));
        // The covariate directory is optional, so the environment default
        // only applies when the directory actually exists.
        let covariates_dir = shared
            .covariates
            .clone()
            .or_else(|| file.get("covariates").map(PathBuf::from))
            .or_else(|| from_root("covariates").filter(|p| p.is_dir()));

        let t1 = match shared.t1 {
            Some(v) => v,
            None => match file.get("t1") {
                Some(raw) => parse_value("t1", raw)?,
                None => 1890,
            },
        };
        let t2 = match shared.t2 {
            Some(v) => v,
            None => match file.get("t2") {
                Some(raw) => parse_value("t2", raw)?,
                None => 1990,
            },
        };
        let k = match shared.k {
            Some(v) => Some(v),
            None => match file.get("k") {
                Some(raw) => Some(parse_value("k", raw)?),
                None => None,
            },
        };
        let mode = match shared.mode {
            Some(m) => m,
            None => match file.get("mode") {
                Some(raw) => parse_value("mode", raw)?,
                None => ChangeMode::WholeLexicon,
            },
        };
        let formula = match shared.formula {
            Some(f) => f,
            None => match file.get("formula") {
                Some(raw) => parse_value("formula", raw)?,
                None => FormulaName::Eq3,
            },
        };
        let out = shared
            .out
            .clone()
            .or_else(|| file.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let deterministic = shared.deterministic
            || match file.get("deterministic") {
                Some(raw) => parse_bool("deterministic", raw)?,
                None => false,
            };
        let force = shared.force
            || match file.get("force") {
                Some(raw) => parse_bool("force", raw)?,
                None => false,
            };
        let require_pos_raw = shared
            .require_pos
            .clone()
            .or_else(|| file.get("require-pos").cloned())
            .unwrap_or_else(|| "NOUN".to_string());
        // The sentinel "any" lifts the POS requirement entirely.
        let require_pos = if require_pos_raw.eq_ignore_ascii_case("any") {
            None
        } else {
            Some(require_pos_raw)
        };
        let category = shared
            .category
            .clone()
            .or_else(|| file.get("category").cloned());
        let seed = match shared.seed {
            Some(v) => Some(v),
            None => match file.get("seed") {
                Some(raw) => Some(parse_value("seed", raw)?),
                None => None,
            },
        };

        validate_decade(t1)?;
        validate_decade(t2)?;
        if t1 > t2 {
            return Err(Error::DecadeOrder { t1, t2 });
        }
        if k == Some(0) {
            return Err(Error::InvalidK(0));
        }

        let config = RunConfig {
            embeddings_dir: require_path(embeddings_dir, "embeddings-dir", true)?,
            pos_path: require_path(pos_path, "pos", false)?,
            freq_path: require_path(freq_path, "freq", false)?,
            lexicon_path: require_path(lexicon_path, "lexicon", false)?,
            covariates_dir,
            t1,
            t2,
            k,
            mode,
            formula,
            out,
            deterministic,
            require_pos,
            category,
            seed,
            force,
        };
        if let Some(dir) = &config.covariates_dir {
            if !dir.is_dir() {
                return Err(Error::Config(format!(
                    "--covariates {}: no such directory",
                    dir.display()
                )));
            }
        }
        Ok(config)
    }

    /// Effective neighborhood size: the explicit flag or the mode default.
    pub fn k_for_mode(&self) -> usize {
        self.k.unwrap_or_else(|| self.mode.default_k())
    }

    /// Embedding file for one decade: `{decade}.semb` preferred, falling
    /// back to `{decade}.txt`.
    pub fn space_path(&self, decade: Decade) -> Result<PathBuf> {
        let binary = self.embeddings_dir.join(format!("{decade}.semb"));
        if binary.is_file() {
            return Ok(binary);
        }
        let text = self.embeddings_dir.join(format!("{decade}.txt"));
        if text.is_file() {
            return Ok(text);
        }
        Err(Error::Config(format!(
            "no {decade}.semb or {decade}.txt in {}",
            self.embeddings_dir.display()
        )))
    }

    /// Load the embedding spaces for `decades` plus the POS, frequency, and
    /// lexicon tables into one bundle.
    pub fn load_bundle(&self, decades: &[Decade]) -> Result<AnalysisBundle> {
        let mut wanted: Vec<Decade> = decades.to_vec();
        wanted.sort_unstable();
        wanted.dedup();
        let mut spaces = std::collections::BTreeMap::new();
        for decade in wanted {
            validate_decade(decade)?;
            let path = self.space_path(decade)?;
            spaces.insert(decade, EmbeddingSpace::load(&path, decade)?);
        }
        Ok(AnalysisBundle {
            spaces,
            pos: PosTable::load(&self.pos_path)?,
            freq: FrequencyTable::load(&self.freq_path)?,
            lexicon: load_lexicon(&self.lexicon_path)?,
        })
    }

    /// Load whatever covariate resources the configured directory holds.
    pub fn load_covariates(&self) -> Result<Option<CovariateResources>> {
        match &self.covariates_dir {
            Some(dir) => Ok(Some(CovariateResources::load_dir(dir)?)),
            None => Ok(None),
        }
    }
}
