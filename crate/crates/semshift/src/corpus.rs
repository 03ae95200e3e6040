//! Loading, validation, and alignment of the input resources: decade-sliced
//! embedding spaces, part-of-speech table, relative frequencies, and rated
//! category lexicons.
//!
//! All tokens are NFC-normalized at load and matched case-sensitively
//! afterwards. Embedding rows that are entirely zero are dropped (the count
//! is kept for reporting); every retained vector therefore has a strictly
//! positive norm.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use crate::error::{Error, Exclusion, ExclusionReason, Result};
use crate::files;

/// Decade label, e.g. `1890` for the 1890s slice.
pub type Decade = i32;

/// Magic prefix of the binary embedding container.
pub const BINARY_MAGIC: &[u8; 5] = b"SEMB1";

/// Decades are whole multiples of ten inside the covered corpus span.
pub fn validate_decade(decade: Decade) -> Result<Decade> {
    if decade % 10 == 0 && (1800..=1990).contains(&decade) {
        Ok(decade)
    } else {
        Err(Error::InvalidDecade(decade))
    }
}

/// NFC-normalize a token, reusing the input when it is already normalized.
pub fn nfc(token: &str) -> String {
    match is_nfc_quick(token.chars()) {
        IsNormalized::Yes => token.to_string(),
        _ => token.nfc().collect(),
    }
}

fn row_error(token: &str, err: RowError, dim: usize) -> String {
    match err {
        RowError::WrongArity { got } => {
            format!("token {token:?}: expected {dim} components, got {got}")
        }
        RowError::NonFinite => format!("token {token:?}: non-finite component"),
        RowError::EmptyToken => "empty token".to_string(),
        RowError::WhitespaceToken => format!("token {token:?} contains whitespace"),
        RowError::Duplicate => String::new(), // mapped to Error::DuplicateToken by callers
    }
}

enum RowError {
    WrongArity { got: usize },
    NonFinite,
    EmptyToken,
    WhitespaceToken,
    Duplicate,
}

enum RowOutcome {
    Inserted,
    DroppedZero,
}

/// One decade slice of the embedding corpus.
///
/// Vectors are stored as row-major `f32`; all similarity arithmetic happens
/// in `f64`. Token order is the file order, which downstream code relies on
/// only through the stable `index_of`/`token_at` mapping.
pub struct EmbeddingSpace {
    decade: Decade,
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    data: Vec<f32>,
    dropped_rows: usize,
    norms: OnceLock<Vec<f64>>,
}

impl fmt::Debug for EmbeddingSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbeddingSpace")
            .field("decade", &self.decade)
            .field("dim", &self.dim)
            .field("tokens", &self.tokens.len())
            .field("dropped_rows", &self.dropped_rows)
            .finish()
    }
}

impl EmbeddingSpace {
    fn empty(decade: Decade, dim: usize) -> Result<Self> {
        validate_decade(decade)?;
        if dim == 0 {
            return Err(Error::DimensionMismatch("embedding dim must be positive".into()));
        }
        Ok(EmbeddingSpace {
            decade,
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            dropped_rows: 0,
            norms: OnceLock::new(),
        })
    }

    fn insert_row(&mut self, token: String, components: &[f32]) -> std::result::Result<RowOutcome, RowError> {
        if token.is_empty() {
            return Err(RowError::EmptyToken);
        }
        if token.chars().any(char::is_whitespace) {
            return Err(RowError::WhitespaceToken);
        }
        if components.len() != self.dim {
            return Err(RowError::WrongArity {
                got: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(RowError::NonFinite);
        }
        if components.iter().all(|&c| c == 0.0) {
            self.dropped_rows += 1;
            return Ok(RowOutcome::DroppedZero);
        }
        if self.index.contains_key(&token) {
            return Err(RowError::Duplicate);
        }
        self.index.insert(token.clone(), self.tokens.len() as u32);
        self.tokens.push(token);
        self.data.extend_from_slice(components);
        Ok(RowOutcome::Inserted)
    }

    /// Build a space from in-memory rows. Tokens are NFC-normalized; row
    /// ordinals (1-based) stand in for line numbers in error messages.
    pub fn from_rows<I, V>(decade: Decade, dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, V)>,
        V: AsRef<[f32]>,
    {
        let mut space = Self::empty(decade, dim)?;
        for (ordinal, (token, components)) in rows.into_iter().enumerate() {
            let token = nfc(&token);
            match space.insert_row(token.clone(), components.as_ref()) {
                Ok(_) => {}
                Err(RowError::Duplicate) => {
                    return Err(Error::DuplicateToken {
                        path: "<rows>".into(),
                        line: ordinal + 1,
                        token,
                    })
                }
                Err(e) => {
                    return Err(Error::format(
                        "<rows>",
                        ordinal + 1,
                        row_error(&token, e, dim),
                    ))
                }
            }
        }
        Ok(space)
    }

    /// Load a space from disk, sniffing the binary magic to pick the format.
    pub fn load(path: &Path, decade: Decade) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(BINARY_MAGIC) {
            Self::from_binary(path, decade, &bytes)
        } else {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::format(path, 1, "file is neither valid UTF-8 nor a binary container"))?;
            Self::from_text(path, decade, text)
        }
    }

    fn from_text(path: &Path, decade: Decade, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let dim = loop {
            match lines.next() {
                Some((_, line)) if line.trim().is_empty() => continue,
                Some((i, line)) => break parse_dim_header(path, i + 1, line)?,
                None => return Err(Error::format(path, 1, "empty file, expected #dim header")),
            }
        };
        let mut space = Self::empty(decade, dim)?;
        let mut components = Vec::with_capacity(dim);
        for (i, line) in lines {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if line.starts_with('#') {
                return Err(Error::format(path, lineno, "unexpected directive after header"));
            }
            let mut fields = line.split_whitespace();
            let token = nfc(fields.next().expect("non-empty line has a first field"));
            components.clear();
            for field in fields {
                let value = f32::from_str(field).map_err(|_| {
                    Error::format(path, lineno, format!("invalid component {field:?}"))
                })?;
                components.push(value);
            }
            match space.insert_row(token.clone(), &components) {
                Ok(_) => {}
                Err(RowError::Duplicate) => {
                    return Err(Error::DuplicateToken {
                        path: path.into(),
                        line: lineno,
                        token,
                    })
                }
                Err(e) => return Err(Error::format(path, lineno, row_error(&token, e, dim))),
            }
        }
        Ok(space)
    }

    fn from_binary(path: &Path, decade: Decade, bytes: &[u8]) -> Result<Self> {
        let mut cursor = Cursor::new(path, bytes);
        cursor.expect_magic()?;
        let dim = cursor.read_u32()? as usize;
        let n = cursor.read_u64()? as usize;
        let mut tokens = Vec::with_capacity(n);
        for _ in 0..n {
            let len = cursor.read_u32()? as usize;
            let raw = cursor.take(len)?;
            let token = std::str::from_utf8(raw)
                .map_err(|_| cursor.error("token table entry is not valid UTF-8"))?;
            tokens.push(nfc(token));
        }
        let mut space = Self::empty(decade, dim)?;
        let mut components = vec![0f32; dim];
        for token in tokens {
            for slot in components.iter_mut() {
                *slot = f32::from_le_bytes(cursor.take(4)?.try_into().expect("4 bytes"));
            }
            match space.insert_row(token.clone(), &components) {
                Ok(_) => {}
                Err(RowError::Duplicate) => {
                    return Err(Error::DuplicateToken {
                        path: path.into(),
                        line: 0,
                        token,
                    })
                }
                Err(e) => return Err(Error::format(path, 0, row_error(&token, e, dim))),
            }
        }
        if !cursor.at_end() {
            return Err(cursor.error("trailing bytes after matrix"));
        }
        Ok(space)
    }

    /// Render the space in the text format: a `#dim` header, then one
    /// `token<TAB>components` row per vector.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("#dim {}\n", self.dim));
        for (i, token) in self.tokens.iter().enumerate() {
            out.push_str(token);
            out.push('\t');
            let row = self.vector_at(i);
            for (j, value) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                out.push_str(&value.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Render the space in the binary container format. Round-trips `f32`
    /// payloads bit-for-bit.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.data.len() * 4);
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.tokens.len() as u64).to_le_bytes());
        for token in &self.tokens {
            out.extend_from_slice(&(token.len() as u32).to_le_bytes());
            out.extend_from_slice(token.as_bytes());
        }
        for value in &self.data {
            out.extend_from_slice(&value.to_le_bytes());
        }
        out
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        files::atomic_write(path, self.to_text().as_bytes())
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        files::atomic_write(path, &self.to_binary())
    }

    pub fn decade(&self) -> Decade {
        self.decade
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Count of all-zero rows dropped at load time.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).map(|&i| i as usize)
    }

    pub fn token_at(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn vector_at(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.vector_at(i))
    }

    /// Euclidean norms of all rows, computed once on first use. Strictly
    /// positive because zero rows never survive loading.
    pub fn norms(&self) -> &[f64] {
        self.norms.get_or_init(|| {
            (0..self.len())
                .map(|i| {
                    self.vector_at(i)
                        .iter()
                        .map(|&c| {
                            let c = c as f64;
                            c * c
                        })
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
    }

    /// Cosine similarity between two stored tokens.
    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let ia = self.index_of(a).ok_or_else(|| Error::MissingWord {
            token: a.to_string(),
            decade: self.decade,
        })?;
        let ib = self.index_of(b).ok_or_else(|| Error::MissingWord {
            token: b.to_string(),
            decade: self.decade,
        })?;
        Ok(self.cosine_by_index(ia, ib))
    }

    /// Cosine similarity by row index; accumulation in `f64`, sequential
    /// order so results are reproducible bit-for-bit.
    pub fn cosine_by_index(&self, a: usize, b: usize) -> f64 {
        let va = self.vector_at(a);
        let vb = self.vector_at(b);
        let mut dot = 0f64;
        for (&x, &y) in va.iter().zip(vb) {
            dot += x as f64 * y as f64;
        }
        let norms = self.norms();
        dot / (norms[a] * norms[b])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        (0..self.len()).map(|i| (self.token_at(i), self.vector_at(i)))
    }
}

fn parse_dim_header(path: &Path, lineno: usize, line: &str) -> Result<usize> {
    let rest = line
        .strip_prefix("#dim")
        .ok_or_else(|| Error::format(path, lineno, "expected #dim header"))?;
    let dim: usize = rest
        .trim()
        .parse()
        .map_err(|_| Error::format(path, lineno, "invalid #dim value"))?;
    if dim == 0 {
        return Err(Error::format(path, lineno, "#dim must be positive"));
    }
    Ok(dim)
}

/// Byte cursor with positioned error messages for the binary container.
struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Cursor { path, bytes, pos: 0 }
    }

    fn error(&self, message: &str) -> Error {
        Error::format(
            self.path,
            0,
            format!("binary container at byte {}: {message}", self.pos),
        )
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.error("unexpected end of file"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn expect_magic(&mut self) -> Result<()> {
        let got = self.take(BINARY_MAGIC.len())?;
        if got != BINARY_MAGIC {
            return Err(self.error("bad magic"));
        }
        Ok(())
    }

    fn read_u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn read_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn at_end(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

/// Token to part-of-speech map with an explicit tag inventory.
#[derive(Debug, Clone)]
pub struct PosTable {
    tags: Vec<String>,
    map: HashMap<String, u16>,
}

impl PosTable {
    /// Load from a file whose first non-empty line is `#tags A,B,C` followed
    /// by one `token<TAB>tag` row per line.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let tags = loop {
            match lines.next() {
                Some((_, line)) if line.trim().is_empty() => continue,
                Some((i, line)) => break parse_tags_header(path, i + 1, line)?,
                None => return Err(Error::format(path, 1, "empty file, expected #tags header")),
            }
        };
        let mut table = Self::with_tags(tags)?;
        for (i, line) in lines {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = nfc(fields.next().expect("non-empty line"));
            let tag = fields
                .next()
                .ok_or_else(|| Error::format(path, lineno, "expected token and tag"))?;
            if fields.next().is_some() {
                return Err(Error::format(path, lineno, "expected exactly two fields"));
            }
            let tag_id = table
                .tag_id(tag)
                .ok_or_else(|| Error::format(path, lineno, format!("tag {tag:?} not in #tags inventory")))?;
            if table.map.insert(token.clone(), tag_id).is_some() {
                return Err(Error::DuplicateToken {
                    path: path.into(),
                    line: lineno,
                    token,
                });
            }
        }
        Ok(table)
    }

    fn with_tags(tags: Vec<String>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::Config("part-of-speech tag inventory is empty".into()));
        }
        if !tags.iter().any(|t| t == "NOUN") {
            return Err(Error::Config(
                "part-of-speech tag inventory must include NOUN".into(),
            ));
        }
        let mut seen = HashSet::new();
        for tag in &tags {
            if !seen.insert(tag.as_str()) {
                return Err(Error::Config(format!("duplicate tag {tag:?} in inventory")));
            }
        }
        Ok(PosTable {
            tags,
            map: HashMap::new(),
        })
    }

    /// Build a table in memory, for synthetic corpora.
    pub fn from_entries<I>(tags: &[&str], entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table = Self::with_tags(tags.iter().map(|t| t.to_string()).collect())?;
        for (ordinal, (token, tag)) in entries.into_iter().enumerate() {
            let token = nfc(&token);
            let tag_id = table
                .tag_id(&tag)
                .ok_or_else(|| Error::format("<entries>", ordinal + 1, format!("tag {tag:?} not in inventory")))?;
            if table.map.insert(token.clone(), tag_id).is_some() {
                return Err(Error::DuplicateToken {
                    path: "<entries>".into(),
                    line: ordinal + 1,
                    token,
                });
            }
        }
        Ok(table)
    }

    fn tag_id(&self, tag: &str) -> Option<u16> {
        self.tags.iter().position(|t| t == tag).map(|i| i as u16)
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn tag(&self, token: &str) -> Option<&str> {
        self.map.get(token).map(|&id| self.tags[id as usize].as_str())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn parse_tags_header(path: &Path, lineno: usize, line: &str) -> Result<Vec<String>> {
    let rest = line
        .strip_prefix("#tags")
        .ok_or_else(|| Error::format(path, lineno, "expected #tags header"))?;
    let tags: Vec<String> = rest
        .trim()
        .split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    if tags.is_empty() {
        return Err(Error::format(path, lineno, "#tags inventory is empty"));
    }
    Ok(tags)
}

/// Per-decade relative frequencies, `token -> decade -> value in (0, 1]`.
#[derive(Debug, Clone, Default)]
pub struct FrequencyTable {
    map: HashMap<String, BTreeMap<Decade, f64>>,
}

impl FrequencyTable {
    /// Load from `token<TAB>decade<TAB>relfreq` rows.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = FrequencyTable::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::format(path, lineno, "expected token, decade, relfreq"));
            }
            let token = nfc(fields[0]);
            let decade: Decade = fields[1]
                .parse()
                .map_err(|_| Error::format(path, lineno, format!("invalid decade {:?}", fields[1])))?;
            validate_decade(decade)
                .map_err(|_| Error::format(path, lineno, format!("invalid decade {decade}")))?;
            let value: f64 = fields[2]
                .parse()
                .map_err(|_| Error::format(path, lineno, format!("invalid frequency {:?}", fields[2])))?;
            table
                .insert(token, decade, value)
                .map_err(|msg| Error::format(path, lineno, msg))?;
        }
        Ok(table)
    }

    /// Build a table in memory, for synthetic corpora.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Decade, f64)>,
    {
        let mut table = FrequencyTable::default();
        for (ordinal, (token, decade, value)) in entries.into_iter().enumerate() {
            validate_decade(decade)?;
            table
                .insert(nfc(&token), decade, value)
                .map_err(|msg| Error::format("<entries>", ordinal + 1, msg))?;
        }
        Ok(table)
    }

    fn insert(&mut self, token: String, decade: Decade, value: f64) -> std::result::Result<(), String> {
        if !(value.is_finite() && value > 0.0 && value <= 1.0) {
            return Err(format!("relative frequency {value} outside (0, 1]"));
        }
        let slot = self.map.entry(token.clone()).or_default();
        if slot.insert(decade, value).is_some() {
            return Err(format!("duplicate frequency entry for {token:?} at {decade}"));
        }
        Ok(())
    }

    pub fn get(&self, token: &str, decade: Decade) -> Option<f64> {
        self.map.get(token).and_then(|m| m.get(&decade)).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Orientation of a rating scale as published.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleDirection {
    /// Larger raw rating means more prototypical.
    Ascending,
    /// Smaller raw rating means more prototypical.
    Descending,
}

impl FromStr for ScaleDirection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "asc" | "ascending" => Ok(ScaleDirection::Ascending),
            "desc" | "descending" => Ok(ScaleDirection::Descending),
            other => Err(format!("invalid direction {other:?}, expected asc or desc")),
        }
    }
}

impl fmt::Display for ScaleDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleDirection::Ascending => write!(f, "asc"),
            ScaleDirection::Descending => write!(f, "desc"),
        }
    }
}

/// Bounds and orientation of the instrument a rating came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
    pub direction: ScaleDirection,
}

/// One rated lexicon row after normalization.
///
/// `prototypicality` is always oriented so larger means more prototypical;
/// for descending scales it is the negated raw rating. `raw_rating` keeps
/// the published value.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub token: String,
    pub prototypicality: f64,
    pub raw_rating: f64,
    pub valence: f64,
    pub category: String,
    pub scale: RatingScale,
}

const LEXICON_COLUMNS: [&str; 7] = [
    "token",
    "prototypicality",
    "valence",
    "category",
    "scale_min",
    "scale_max",
    "direction",
];

/// Load a rated category lexicon from CSV. Header must name all of
/// `token,prototypicality,valence,category,scale_min,scale_max,direction`.
pub fn load_lexicon(path: &Path) -> Result<Vec<LexiconEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut positions = [0usize; LEXICON_COLUMNS.len()];
    for (slot, name) in positions.iter_mut().zip(LEXICON_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(path, 1, format!("missing column {name:?}")))?;
    }
    let [c_token, c_proto, c_val, c_cat, c_min, c_max, c_dir] = positions;

    let mut entries = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let lineno = i + 2; // header is line 1
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |idx: usize| record.get(idx).unwrap_or("").trim().to_string();
        let token = nfc(&field(c_token));
        if token.is_empty() {
            return Err(Error::format(path, lineno, "empty token"));
        }
        let category = field(c_cat);
        if category.is_empty() {
            return Err(Error::format(path, lineno, "empty category"));
        }
        let parse_num = |idx: usize, what: &str| -> Result<f64> {
            field(idx)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format(path, lineno, format!("invalid {what} {:?}", field(idx))))
        };
        let raw_rating = parse_num(c_proto, "prototypicality")?;
        let valence = parse_num(c_val, "valence")?;
        let min = parse_num(c_min, "scale_min")?;
        let max = parse_num(c_max, "scale_max")?;
        if min >= max {
            return Err(Error::format(path, lineno, format!("scale_min {min} >= scale_max {max}")));
        }
        let direction: ScaleDirection = field(c_dir)
            .parse()
            .map_err(|msg: String| Error::format(path, lineno, msg))?;
        if raw_rating < min || raw_rating > max {
            return Err(Error::format(
                path,
                lineno,
                format!("rating {raw_rating} outside scale [{min}, {max}]"),
            ));
        }
        if !seen.insert((token.clone(), category.clone())) {
            return Err(Error::DuplicateToken {
                path: path.into(),
                line: lineno,
                token,
            });
        }
        let prototypicality = match direction {
            ScaleDirection::Ascending => raw_rating,
            ScaleDirection::Descending => -raw_rating,
        };
        entries.push(LexiconEntry {
            token,
            prototypicality,
            raw_rating,
            valence,
            category,
            scale: RatingScale { min, max, direction },
        });
    }
    if entries.is_empty() {
        return Err(Error::format(path, 1, "lexicon has no entries"));
    }
    Ok(entries)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => {
            if let csv::ErrorKind::Io(io) = e.into_kind() {
                Error::io(path, io)
            } else {
                unreachable!()
            }
        }
        _ => {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            Error::format(path, line, e.to_string())
        }
    }
}

/// Render lexicon entries in normalized form: ratings oriented ascending,
/// scale bounds adjusted to match. Loading the output reproduces the same
/// normalized `prototypicality` values.
pub fn lexicon_to_csv(entries: &[LexiconEntry]) -> String {
    let mut out = String::from("token,prototypicality,valence,category,scale_min,scale_max,direction\n");
    for e in entries {
        let (min, max) = match e.scale.direction {
            ScaleDirection::Ascending => (e.scale.min, e.scale.max),
            ScaleDirection::Descending => (-e.scale.max, -e.scale.min),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},asc\n",
            e.token, e.prototypicality, e.valence, e.category, min, max
        ));
    }
    out
}

/// The aligned resources one analysis runs over.
#[derive(Debug)]
pub struct AnalysisBundle {
    pub spaces: BTreeMap<Decade, EmbeddingSpace>,
    pub pos: PosTable,
    pub freq: FrequencyTable,
    pub lexicon: Vec<LexiconEntry>,
}

impl AnalysisBundle {
    pub fn space(&self, decade: Decade) -> Result<&EmbeddingSpace> {
        self.spaces.get(&decade).ok_or(Error::MissingDecade(decade))
    }

    /// Restrict the lexicon to tokens usable at every listed decade: a
    /// vector in each decade's space, a frequency entry at the earliest
    /// decade, and (when `require_pos` is set) the required tag.
    ///
    /// Returns the surviving entries in lexicon order plus one exclusion per
    /// dropped token (first failed check wins). An empty survivor list is an
    /// error carrying the full exclusion report. Re-running on the survivors
    /// reproduces them: the operation never adds tokens.
    pub fn intersect_lexicon(
        &self,
        decades: &[Decade],
        require_pos: Option<&str>,
    ) -> Result<(Vec<LexiconEntry>, Vec<Exclusion>)> {
        if decades.is_empty() {
            return Err(Error::Config("intersection requires at least one decade".into()));
        }
        let mut sorted: Vec<Decade> = decades.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for &d in &sorted {
            self.space(d)?;
        }
        let earliest = sorted[0];

        let mut kept = Vec::new();
        let mut exclusions = Vec::new();
        'tokens: for entry in &self.lexicon {
            for &d in &sorted {
                if !self.spaces[&d].contains(&entry.token) {
                    exclusions.push(Exclusion {
                        token: entry.token.clone(),
                        reason: ExclusionReason::MissingVector(d),
                    });
                    continue 'tokens;
                }
            }
            if self.freq.get(&entry.token, earliest).is_none() {
                exclusions.push(Exclusion {
                    token: entry.token.clone(),
                    reason: ExclusionReason::MissingFrequency(earliest),
                });
                continue;
            }
            if let Some(required) = require_pos {
                match self.pos.tag(&entry.token) {
                    None => {
                        exclusions.push(Exclusion {
                            token: entry.token.clone(),
                            reason: ExclusionReason::MissingPosTag,
                        });
                        continue;
                    }
                    Some(actual) if actual != required => {
                        exclusions.push(Exclusion {
                            token: entry.token.clone(),
                            reason: ExclusionReason::PosMismatch {
                                required: required.to_string(),
                                actual: actual.to_string(),
                            },
                        });
                        continue;
                    }
                    Some(_) => {}
                }
            }
            kept.push(entry.clone());
        }
        if kept.is_empty() {
            return Err(Error::EmptyIntersection { exclusions });
        }
        Ok((kept, exclusions))
    }
}
