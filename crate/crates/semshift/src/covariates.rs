//! Lexical covariates used as regression controls: taxonomy depth in a
//! hypernym graph, word age and polysemy from dated sense inventories, and
//! age of acquisition from rating norms.
//!
//! All resources are optional at the analysis level. Loaders are strict
//! (malformed rows are errors), while [`CovariateResources::build_table`]
//! maps per-token absence to `None` so callers can drop incomplete rows and
//! report how many were lost.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs;
use std::path::Path;

use crate::corpus::{nfc, Decade};
use crate::error::{Error, Result};

/// Directed hypernym graph rooted at a single most-general sense.
///
/// Edges point from parent (more general) to child (more specific). The
/// graph must be acyclic and the root must have no parents; both are
/// validated at construction. Multiple parents are allowed, and a sense's
/// depth is the length of the shortest path from the root.
#[derive(Debug, Clone)]
pub struct HypernymGraph {
    root: String,
    /// Shortest-path depth from the root, for every reachable sense.
    depths: HashMap<String, u32>,
    /// Designated sense for each token.
    senses: HashMap<String, String>,
    node_count: usize,
}

impl HypernymGraph {
    /// Builds a graph from an explicit edge list and token-to-sense map.
    pub fn from_parts(
        root: &str,
        edges: &[(String, String)],
        senses: HashMap<String, String>,
    ) -> Result<Self> {
        let root = nfc(root);
        let mut nodes: HashSet<String> = HashSet::new();
        nodes.insert(root.clone());
        let mut children: HashMap<String, Vec<String>> = HashMap::new();
        let mut in_degree: HashMap<String, usize> = HashMap::new();
        for (parent, child) in edges {
            let parent = nfc(parent);
            let child = nfc(child);
            nodes.insert(parent.clone());
            nodes.insert(child.clone());
            *in_degree.entry(child.clone()).or_insert(0) += 1;
            children.entry(parent).or_default().push(child);
        }

        if in_degree.get(&root).copied().unwrap_or(0) > 0 {
            return Err(Error::Config(format!(
                "hypernym root {root:?} has a parent edge"
            )));
        }

        // Kahn's algorithm over the whole node set. Anything left with a
        // nonzero in-degree afterwards sits on a cycle.
        let mut remaining: HashMap<&str, usize> = nodes
            .iter()
            .map(|n| (n.as_str(), in_degree.get(n).copied().unwrap_or(0)))
            .collect();
        let mut queue: VecDeque<&str> = remaining
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut processed = 0usize;
        while let Some(node) = queue.pop_front() {
            processed += 1;
            if let Some(kids) = children.get(node) {
                for kid in kids {
                    let d = remaining
                        .get_mut(kid.as_str())
                        .expect("edge endpoints were inserted as nodes");
                    *d -= 1;
                    if *d == 0 {
                        queue.push_back(kid.as_str());
                    }
                }
            }
        }
        if processed != nodes.len() {
            let mut cyclic: Vec<&str> = remaining
                .iter()
                .filter(|(_, d)| **d > 0)
                .map(|(n, _)| *n)
                .collect();
            cyclic.sort_unstable();
            return Err(Error::CyclicGraph {
                sense: cyclic[0].to_string(),
            });
        }

        // BFS from the root; shortest path because all edges have weight 1.
        let mut depths: HashMap<String, u32> = HashMap::new();
        depths.insert(root.clone(), 0);
        let mut frontier: VecDeque<String> = VecDeque::new();
        frontier.push_back(root.clone());
        while let Some(node) = frontier.pop_front() {
            let next = depths[&node] + 1;
            if let Some(kids) = children.get(&node) {
                for kid in kids {
                    if !depths.contains_key(kid) {
                        depths.insert(kid.clone(), next);
                        frontier.push_back(kid.clone());
                    }
                }
            }
        }

        let senses = senses
            .into_iter()
            .map(|(token, sense)| (nfc(&token), nfc(&sense)))
            .collect();
        Ok(Self {
            root,
            depths,
            senses,
            node_count: nodes.len(),
        })
    }

    /// Loads the graph from an edge file and a token-to-sense file.
    ///
    /// The edge file starts with a `#root <sense>` header followed by one
    /// `parent<TAB>child` pair per line. The sense file holds one
    /// `token<TAB>sense` pair per line. Blank lines and further `#` comment
    /// lines are skipped in both.
    pub fn load(edges_path: &Path, senses_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(edges_path).map_err(|e| Error::io(edges_path, e))?;
        let mut root: Option<String> = None;
        let mut edges: Vec<(String, String)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("#root") {
                let sense = rest.trim();
                if sense.is_empty() {
                    return Err(Error::format(edges_path, line_no, "empty #root header"));
                }
                if root.replace(sense.to_string()).is_some() {
                    return Err(Error::format(edges_path, line_no, "duplicate #root header"));
                }
                continue;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(parent), Some(child), None) => {
                    edges.push((parent.to_string(), child.to_string()));
                }
                _ => {
                    return Err(Error::format(
                        edges_path,
                        line_no,
                        "expected `parent<TAB>child`",
                    ));
                }
            }
        }
        let root = root.ok_or_else(|| Error::format(edges_path, 1, "missing #root header"))?;

        let text = fs::read_to_string(senses_path).map_err(|e| Error::io(senses_path, e))?;
        let mut senses: HashMap<String, String> = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(token), Some(sense), None) => {
                    if senses.insert(nfc(token), sense.to_string()).is_some() {
                        return Err(Error::DuplicateToken {
                            path: senses_path.to_path_buf(),
                            line: line_no,
                            token: token.to_string(),
                        });
                    }
                }
                _ => {
                    return Err(Error::format(
                        senses_path,
                        line_no,
                        "expected `token<TAB>sense`",
                    ));
                }
            }
        }

        Self::from_parts(&root, &edges, senses)
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    /// Number of distinct senses mentioned by the root or any edge.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Depth of a sense, or `None` when the sense is absent or unreachable
    /// from the root.
    pub fn depth_of_sense(&self, sense: &str) -> Option<u32> {
        self.depths.get(&nfc(sense)).copied()
    }

    /// Depth of a token's designated sense.
    pub fn depth_of_token(&self, token: &str) -> Result<u32> {
        let token = nfc(token);
        let sense = self
            .senses
            .get(&token)
            .ok_or_else(|| Error::NoDesignatedSense {
                token: token.clone(),
            })?;
        self.depths
            .get(sense)
            .copied()
            .ok_or_else(|| Error::UnreachableSense {
                token,
                sense: sense.clone(),
            })
    }
}

/// One dated sense of a word: part of speech, first attested year, and an
/// optional year after which the sense is considered obsolete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseEntry {
    pub pos: String,
    pub first_year: i32,
    pub obsolete_year: Option<i32>,
}

impl SenseEntry {
    /// A sense is alive at `year` from its first attestation up to, but not
    /// including, its obsolescence year.
    pub fn alive_at(&self, year: i32) -> bool {
        self.first_year <= year && self.obsolete_year.is_none_or(|o| year < o)
    }
}

/// Dated sense inventory keyed by token.
#[derive(Debug, Clone, Default)]
pub struct SenseDates {
    map: HashMap<String, Vec<SenseEntry>>,
}

impl SenseDates {
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, SenseEntry)>,
    {
        let mut map: HashMap<String, Vec<SenseEntry>> = HashMap::new();
        for (token, entry) in entries {
            if let Some(obsolete) = entry.obsolete_year {
                if obsolete <= entry.first_year {
                    return Err(Error::Config(format!(
                        "sense of {token:?} is obsolete ({obsolete}) before it appears ({})",
                        entry.first_year
                    )));
                }
            }
            map.entry(nfc(&token)).or_default().push(entry);
        }
        Ok(Self { map })
    }

    /// Loads `token<TAB>pos<TAB>first_year[<TAB>obsolete_year]` rows. Blank
    /// and `#` comment lines are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries: Vec<(String, SenseEntry)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(Error::format(
                    path,
                    line_no,
                    "expected `token<TAB>pos<TAB>first_year[<TAB>obsolete_year]`",
                ));
            }
            let first_year: i32 = fields[2].parse().map_err(|_| {
                Error::format(path, line_no, format!("invalid year {:?}", fields[2]))
            })?;
            let obsolete_year = match fields.get(3) {
                Some(raw) => Some(raw.parse::<i32>().map_err(|_| {
                    Error::format(path, line_no, format!("invalid year {raw:?}"))
                })?),
                None => None,
            };
            entries.push((
                fields[0].to_string(),
                SenseEntry {
                    pos: fields[1].to_string(),
                    first_year,
                    obsolete_year,
                },
            ));
        }
        Self::from_entries(entries).map_err(|e| match e {
            Error::Config(msg) => Error::format(path, 0, msg),
            other => other,
        })
    }

    pub fn senses(&self, token: &str) -> Option<&[SenseEntry]> {
        self.map.get(&nfc(token)).map(|v| v.as_slice())
    }

    /// Earliest attested year over the token's senses with the given part of
    /// speech.
    pub fn first_appearance(&self, token: &str, pos: &str) -> Result<i32> {
        let token = nfc(token);
        self.map
            .get(&token)
            .into_iter()
            .flatten()
            .filter(|s| s.pos == pos)
            .map(|s| s.first_year)
            .min()
            .ok_or_else(|| Error::NoMatchingSense {
                token,
                pos: pos.to_string(),
            })
    }

    /// Number of senses alive at `year`, across all parts of speech.
    pub fn polysemy(&self, token: &str, year: i32) -> Result<usize> {
        let token = nfc(token);
        let alive = self
            .map
            .get(&token)
            .into_iter()
            .flatten()
            .filter(|s| s.alive_at(year))
            .count();
        if alive == 0 {
            return Err(Error::ZeroLiveSenses { token, at: year });
        }
        Ok(alive)
    }
}

/// Age-of-acquisition norms keyed by word form; a form may carry several
/// rated meanings.
#[derive(Debug, Clone, Default)]
pub struct AoaTable {
    map: HashMap<String, Vec<(String, f64)>>,
}

impl AoaTable {
    /// Loads a CSV with `form,meaning,age` columns (located by header name).
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| crate::corpus::csv_error(path, e))?;
        let headers = reader
            .headers()
            .map_err(|e| crate::corpus::csv_error(path, e))?
            .clone();
        let find = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::MissingColumn {
                    column: name.to_string(),
                    hint: format!("available: {}", headers.iter().collect::<Vec<_>>().join(", ")),
                })
        };
        let form_idx = find("form")?;
        let meaning_idx = find("meaning")?;
        let age_idx = find("age")?;

        let mut map: HashMap<String, Vec<(String, f64)>> = HashMap::new();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        for (idx, record) in reader.records().enumerate() {
            let line_no = idx + 2;
            let record = record.map_err(|e| crate::corpus::csv_error(path, e))?;
            let get = |i: usize| -> Result<&str> {
                record
                    .get(i)
                    .ok_or_else(|| Error::format(path, line_no, "short record"))
            };
            let form = nfc(get(form_idx)?);
            let meaning = get(meaning_idx)?.to_string();
            let age: f64 = get(age_idx)?.parse().map_err(|_| {
                Error::format(path, line_no, format!("invalid age {:?}", get(age_idx).unwrap_or("")))
            })?;
            if !age.is_finite() || age <= 0.0 {
                return Err(Error::format(
                    path,
                    line_no,
                    format!("age must be finite and positive, got {age}"),
                ));
            }
            if !seen.insert((form.clone(), meaning.clone())) {
                return Err(Error::DuplicateToken {
                    path: path.to_path_buf(),
                    line: line_no,
                    token: format!("{form}/{meaning}"),
                });
            }
            map.entry(form).or_default().push((meaning, age));
        }
        Ok(Self { map })
    }

    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, String, f64)>,
    {
        let mut map: HashMap<String, Vec<(String, f64)>> = HashMap::new();
        for (form, meaning, age) in entries {
            map.entry(nfc(&form)).or_default().push((meaning, age));
        }
        Self { map }
    }

    /// Mean rated age over all meanings of a form, or `None` when the form
    /// has no norms.
    pub fn mean_age(&self, form: &str) -> Option<f64> {
        let entries = self.map.get(&nfc(form))?;
        let sum: f64 = entries.iter().map(|(_, age)| age).sum();
        Some(sum / entries.len() as f64)
    }
}

/// Covariate values for one token. `None` marks a token absent from the
/// corresponding resource.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateRow {
    pub token: String,
    pub depth: Option<f64>,
    pub word_age: Option<f64>,
    pub polysemy: Option<f64>,
    pub aoa: Option<f64>,
}

impl CovariateRow {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "depth" => self.depth,
            "word_age" => self.word_age,
            "poly" | "polysemy" => self.polysemy,
            "aoa" => self.aoa,
            _ => None,
        }
    }
}

/// Covariate rows in input token order.
#[derive(Debug, Clone, Default)]
pub struct CovariateTable {
    rows: Vec<CovariateRow>,
}

impl CovariateTable {
    pub fn rows(&self) -> &[CovariateRow] {
        &self.rows
    }

    pub fn row(&self, token: &str) -> Option<&CovariateRow> {
        let token = nfc(token);
        self.rows.iter().find(|r| r.token == token)
    }
}

/// File names expected inside a covariate directory.
pub const HYPERNYM_EDGES_FILE: &str = "hypernym_edges.tsv";
pub const TOKEN_SENSES_FILE: &str = "token_senses.tsv";
pub const SENSE_DATES_FILE: &str = "sense_dates.tsv";
pub const AOA_FILE: &str = "aoa.csv";

/// Bundle of whichever covariate resources are present.
#[derive(Debug, Clone, Default)]
pub struct CovariateResources {
    pub graph: Option<HypernymGraph>,
    pub dates: Option<SenseDates>,
    pub aoa: Option<AoaTable>,
}

impl CovariateResources {
    /// Loads resources from a directory using the conventional file names.
    /// Absent files leave the matching resource as `None`; a directory with
    /// none of them is an error.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let edges = dir.join(HYPERNYM_EDGES_FILE);
        let senses = dir.join(TOKEN_SENSES_FILE);
        let graph = if edges.exists() || senses.exists() {
            if !(edges.exists() && senses.exists()) {
                return Err(Error::Config(format!(
                    "hypernym data needs both {HYPERNYM_EDGES_FILE} and {TOKEN_SENSES_FILE} in {}",
                    dir.display()
                )));
            }
            Some(HypernymGraph::load(&edges, &senses)?)
        } else {
            None
        };
        let dates_path = dir.join(SENSE_DATES_FILE);
        let dates = if dates_path.exists() {
            Some(SenseDates::load(&dates_path)?)
        } else {
            None
        };
        let aoa_path = dir.join(AOA_FILE);
        let aoa = if aoa_path.exists() {
            Some(AoaTable::load(&aoa_path)?)
        } else {
            None
        };
        if graph.is_none() && dates.is_none() && aoa.is_none() {
            return Err(Error::Config(format!(
                "no covariate files found in {}",
                dir.display()
            )));
        }
        Ok(Self { graph, dates, aoa })
    }

    /// Assembles covariates for `tokens` as of the given decade. Word age is
    /// `at` minus the earliest attestation of a sense with part of speech
    /// `pos`. Tokens missing from a resource get `None` in that column
    /// rather than an error; callers decide whether to drop such rows.
    pub fn build_table(&self, tokens: &[String], pos: &str, at: Decade) -> CovariateTable {
        let rows = tokens
            .iter()
            .map(|token| {
                let token = nfc(token);
                let depth = self
                    .graph
                    .as_ref()
                    .and_then(|g| g.depth_of_token(&token).ok())
                    .map(f64::from);
                let word_age = self
                    .dates
                    .as_ref()
                    .and_then(|d| d.first_appearance(&token, pos).ok())
                    .map(|year| f64::from(at - year));
                let polysemy = self
                    .dates
                    .as_ref()
                    .and_then(|d| d.polysemy(&token, at).ok())
                    .map(|n| n as f64);
                let aoa = self.aoa.as_ref().and_then(|a| a.mean_age(&token));
                CovariateRow {
                    token,
                    depth,
                    word_age,
                    polysemy,
                    aoa,
                }
            })
            .collect();
        CovariateTable { rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn sample_graph() -> HypernymGraph {
        // feeling > emotion > joy > exhilaration > thrill, so "joy" sits at
        // depth 2 and "thrill" at depth 4.
        let edges = vec![
            ("feeling.n.01".to_string(), "emotion.n.01".to_string()),
            ("emotion.n.01".to_string(), "joy.n.01".to_string()),
            ("joy.n.01".to_string(), "exhilaration.n.01".to_string()),
            ("exhilaration.n.01".to_string(), "thrill.n.01".to_string()),
            ("emotion.n.01".to_string(), "anger.n.01".to_string()),
        ];
        let senses: HashMap<String, String> = [
            ("joy", "joy.n.01"),
            ("thrill", "thrill.n.01"),
            ("anger", "anger.n.01"),
            ("orphan", "orphan.n.01"),
        ]
        .into_iter()
        .map(|(t, s)| (t.to_string(), s.to_string()))
        .collect();
        HypernymGraph::from_parts("feeling.n.01", &edges, senses).unwrap()
    }

    #[test]
    fn depths_follow_shortest_paths_from_the_root() {
        let graph = sample_graph();
        assert_eq!(graph.depth_of_sense("feeling.n.01"), Some(0));
        assert_eq!(graph.depth_of_token("joy").unwrap(), 2);
        assert_eq!(graph.depth_of_token("thrill").unwrap(), 4);
        assert_eq!(graph.depth_of_token("anger").unwrap(), 2);
    }

    #[test]
    fn multiple_parents_take_the_shorter_route() {
        // Diamond: root > a > b > target and root > target directly.
        let edges = vec![
            ("root".to_string(), "a".to_string()),
            ("a".to_string(), "b".to_string()),
            ("b".to_string(), "target".to_string()),
            ("root".to_string(), "target".to_string()),
        ];
        let graph = HypernymGraph::from_parts("root", &edges, HashMap::new()).unwrap();
        assert_eq!(graph.depth_of_sense("target"), Some(1));
        assert_eq!(graph.node_count(), 4);
    }

    #[test]
    fn cycles_are_rejected() {
        let edges = vec![
            ("root".to_string(), "a".to_string()),
            ("a".to_string(), "b".to_string()),
            ("b".to_string(), "a".to_string()),
        ];
        let err = HypernymGraph::from_parts("root", &edges, HashMap::new()).unwrap_err();
        assert!(matches!(err, Error::CyclicGraph { .. }), "{err}");
    }

    #[test]
    fn root_with_a_parent_is_rejected() {
        let edges = vec![("a".to_string(), "root".to_string())];
        let err = HypernymGraph::from_parts("root", &edges, HashMap::new()).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn missing_and_unreachable_senses_are_distinct_errors() {
        let graph = sample_graph();
        assert!(matches!(
            graph.depth_of_token("unknown").unwrap_err(),
            Error::NoDesignatedSense { .. }
        ));
        // "orphan" maps to a sense no edge mentions.
        assert!(matches!(
            graph.depth_of_token("orphan").unwrap_err(),
            Error::UnreachableSense { .. }
        ));
    }

    #[test]
    fn graph_files_round_trip_through_the_loader() {
        let dir = tempfile::tempdir().unwrap();
        let edges_path = dir.path().join("edges.tsv");
        let senses_path = dir.path().join("senses.tsv");
        let mut f = std::fs::File::create(&edges_path).unwrap();
        writeln!(f, "#root feeling.n.01").unwrap();
        writeln!(f, "# comment").unwrap();
        writeln!(f, "feeling.n.01\temotion.n.01").unwrap();
        writeln!(f, "emotion.n.01\tjoy.n.01").unwrap();
        drop(f);
        let mut f = std::fs::File::create(&senses_path).unwrap();
        writeln!(f, "joy\tjoy.n.01").unwrap();
        drop(f);

        let graph = HypernymGraph::load(&edges_path, &senses_path).unwrap();
        assert_eq!(graph.root(), "feeling.n.01");
        assert_eq!(graph.depth_of_token("joy").unwrap(), 2);
    }

    #[test]
    fn edge_file_without_root_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let edges_path = dir.path().join("edges.tsv");
        let senses_path = dir.path().join("senses.tsv");
        std::fs::write(&edges_path, "a\tb\n").unwrap();
        std::fs::write(&senses_path, "").unwrap();
        let err = HypernymGraph::load(&edges_path, &senses_path).unwrap_err();
        assert!(matches!(err, Error::Format { .. }), "{err}");
    }

    fn sample_dates() -> SenseDates {
        SenseDates::from_entries([
            (
                "joy".to_string(),
                SenseEntry {
                    pos: "NOUN".to_string(),
                    first_year: 1275,
                    obsolete_year: None,
                },
            ),
            (
                "joy".to_string(),
                SenseEntry {
                    pos: "NOUN".to_string(),
                    first_year: 1390,
                    obsolete_year: Some(1700),
                },
            ),
            (
                "joy".to_string(),
                SenseEntry {
                    pos: "VERB".to_string(),
                    first_year: 1300,
                    obsolete_year: None,
                },
            ),
        ])
        .unwrap()
    }

    #[test]
    fn first_appearance_takes_the_earliest_sense_of_the_pos() {
        let dates = sample_dates();
        assert_eq!(dates.first_appearance("joy", "NOUN").unwrap(), 1275);
        assert_eq!(dates.first_appearance("joy", "VERB").unwrap(), 1300);
        assert!(matches!(
            dates.first_appearance("joy", "ADJ").unwrap_err(),
            Error::NoMatchingSense { .. }
        ));
    }

    #[test]
    fn polysemy_counts_only_senses_alive_at_the_query_year() {
        let dates = sample_dates();
        // At 1200 nothing is attested yet.
        assert!(matches!(
            dates.polysemy("joy", 1200).unwrap_err(),
            Error::ZeroLiveSenses { .. }
        ));
        assert_eq!(dates.polysemy("joy", 1280).unwrap(), 1);
        assert_eq!(dates.polysemy("joy", 1500).unwrap(), 3);
        // The 1390 sense dies in 1700 and stops counting from that year on.
        assert_eq!(dates.polysemy("joy", 1700).unwrap(), 2);
        assert_eq!(dates.polysemy("joy", 1990).unwrap(), 2);
    }

    #[test]
    fn polysemy_is_nondecreasing_without_obsolescence() {
        let dates = SenseDates::from_entries((0..8).map(|i| {
            (
                "word".to_string(),
                SenseEntry {
                    pos: "NOUN".to_string(),
                    first_year: 1300 + 50 * i,
                    obsolete_year: None,
                },
            )
        }))
        .unwrap();
        let mut last = 0usize;
        for year in (1300..=1800).step_by(10) {
            let now = dates.polysemy("word", year).unwrap();
            assert!(now >= last, "polysemy dropped at {year}");
            last = now;
        }
        assert_eq!(last, 8);
    }

    #[test]
    fn obsolete_before_first_appearance_is_rejected() {
        let err = SenseDates::from_entries([(
            "word".to_string(),
            SenseEntry {
                pos: "NOUN".to_string(),
                first_year: 1500,
                obsolete_year: Some(1400),
            },
        )])
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn sense_dates_load_parses_optional_obsolete_years() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dates.tsv");
        std::fs::write(&path, "# senses\njoy\tNOUN\t1275\nmirth\tNOUN\t1300\t1800\n").unwrap();
        let dates = SenseDates::load(&path).unwrap();
        assert_eq!(dates.first_appearance("joy", "NOUN").unwrap(), 1275);
        assert_eq!(
            dates.senses("mirth").unwrap()[0].obsolete_year,
            Some(1800)
        );
    }

    #[test]
    fn aoa_mean_averages_over_meanings() {
        let aoa = AoaTable::from_entries([
            ("joy".to_string(), "delight".to_string(), 4.0),
            ("joy".to_string(), "source of delight".to_string(), 6.0),
            ("mirth".to_string(), "gaiety".to_string(), 9.5),
        ]);
        assert_eq!(aoa.mean_age("joy"), Some(5.0));
        assert_eq!(aoa.mean_age("mirth"), Some(9.5));
        assert_eq!(aoa.mean_age("unknown"), None);
    }

    #[test]
    fn aoa_csv_loader_checks_header_and_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("aoa.csv");
        std::fs::write(&path, "form,meaning,age\njoy,delight,4.0\njoy,source,6.0\n").unwrap();
        let aoa = AoaTable::load(&path).unwrap();
        assert_eq!(aoa.mean_age("joy"), Some(5.0));

        std::fs::write(&path, "form,age\njoy,4.0\n").unwrap();
        assert!(matches!(
            AoaTable::load(&path).unwrap_err(),
            Error::MissingColumn { .. }
        ));

        std::fs::write(&path, "form,meaning,age\njoy,delight,-1.0\n").unwrap();
        assert!(matches!(
            AoaTable::load(&path).unwrap_err(),
            Error::Format { .. }
        ));
    }

    #[test]
    fn build_table_maps_absence_to_none() {
        let resources = CovariateResources {
            graph: Some(sample_graph()),
            dates: Some(sample_dates()),
            aoa: Some(AoaTable::from_entries([(
                "joy".to_string(),
                "delight".to_string(),
                4.0,
            )])),
        };
        let tokens = vec!["joy".to_string(), "thrill".to_string()];
        let table = resources.build_table(&tokens, "NOUN", 1890);

        let joy = table.row("joy").unwrap();
        assert_eq!(joy.depth, Some(2.0));
        assert_eq!(joy.word_age, Some(615.0));
        // The 1390 sense is obsolete by 1700, leaving two live senses.
        assert_eq!(joy.polysemy, Some(2.0));
        assert_eq!(joy.aoa, Some(4.0));
        assert_eq!(joy.get("depth"), Some(2.0));

        // "thrill" is in the graph but has no dates or norms.
        let thrill = table.row("thrill").unwrap();
        assert_eq!(thrill.depth, Some(4.0));
        assert_eq!(thrill.word_age, None);
        assert_eq!(thrill.polysemy, None);
        assert_eq!(thrill.aoa, None);
    }

    #[test]
    fn load_dir_requires_at_least_one_resource() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            CovariateResources::load_dir(dir.path()).unwrap_err(),
            Error::Config(_)
        ));

        std::fs::write(
            dir.path().join(AOA_FILE),
            "form,meaning,age\njoy,delight,4.0\n",
        )
        .unwrap();
        let resources = CovariateResources::load_dir(dir.path()).unwrap();
        assert!(resources.graph.is_none());
        assert!(resources.dates.is_none());
        assert_eq!(resources.aoa.unwrap().mean_age("joy"), Some(4.0));
    }

    #[test]
    fn load_dir_rejects_half_a_hypernym_graph() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(HYPERNYM_EDGES_FILE), "#root r\n").unwrap();
        assert!(matches!(
            CovariateResources::load_dir(dir.path()).unwrap_err(),
            Error::Config(_)
        ));
    }
}
