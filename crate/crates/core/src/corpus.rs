//! App-metadata ingestion, quality filters, category grouping profiles, and
//! the canonical corpus file (`doc_id TAB category TAB text`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::textproc::{tokenize, StopWordList, TokenStream};

pub const GAME_PREFIX: &str = "GAME_";
pub const GROUPED_GAME_LABEL: &str = "GAMES";
pub const DEFAULT_MIN_DESCRIPTION_WORDS: usize = 100;
pub const DEFAULT_DROPPED_CATEGORIES: [&str; 4] =
    ["COMICS", "LIBRARIES_AND_DEMO", "GAME_MUSIC", "GAME_WORD"];

/// One app's metadata row.
#[derive(Debug, Clone, PartialEq)]
pub struct AppRecord {
    pub app_name: String,
    pub developer: String,
    pub is_top_developer: bool,
    pub category: String,
    pub is_free: bool,
    /// Informational only; `None` when the column is absent or not numeric.
    pub price: Option<f64>,
    pub content_rating: String,
    pub have_in_app_purchases: bool,
    pub description: String,
    /// Every other CSV column, keyed by header name as written in the file.
    pub extra: BTreeMap<String, String>,
}

impl AppRecord {
    /// A record with only the text fields set; booleans false.
    pub fn new(app_name: &str, category: &str, description: &str) -> Self {
        AppRecord {
            app_name: app_name.to_string(),
            developer: String::new(),
            is_top_developer: false,
            category: category.to_string(),
            is_free: false,
            price: None,
            content_rating: String::new(),
            have_in_app_purchases: false,
            description: description.to_string(),
            extra: BTreeMap::new(),
        }
    }
}

/// Labels are non-empty and contain no whitespace (they are written into
/// tab-separated files).
pub fn is_valid_label(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(char::is_whitespace)
}

pub fn is_game_label(label: &str) -> bool {
    label.starts_with(GAME_PREFIX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppFilter {
    AllApps,
    FilteredApps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoryScope {
    AllCategories,
    OnlyGameApps,
    GroupedGameApps,
    OnlyOtherCategories,
}

impl CategoryScope {
    /// Maps a source label to its label under this scope, or `None` if the
    /// scope excludes it.
    pub fn map_label<'a>(&self, label: &'a str) -> Option<&'a str> {
        let game = is_game_label(label);
        match self {
            CategoryScope::AllCategories => Some(label),
            CategoryScope::OnlyGameApps => game.then_some(label),
            CategoryScope::OnlyOtherCategories => (!game).then_some(label),
            CategoryScope::GroupedGameApps => {
                Some(if game { GROUPED_GAME_LABEL } else { label })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterProfile {
    pub app_filter: AppFilter,
    pub category_scope: CategoryScope,
    pub min_description_words: usize,
    /// Applied only under [`AppFilter::FilteredApps`], matched against the
    /// record's original category.
    pub dropped_categories: BTreeSet<String>,
}

impl Default for FilterProfile {
    fn default() -> Self {
        Self::new(AppFilter::AllApps, CategoryScope::AllCategories)
    }
}

impl FilterProfile {
    pub fn new(app_filter: AppFilter, category_scope: CategoryScope) -> Self {
        FilterProfile {
            app_filter,
            category_scope,
            min_description_words: DEFAULT_MIN_DESCRIPTION_WORDS,
            dropped_categories: DEFAULT_DROPPED_CATEGORIES
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self.dropped_categories.iter().find(|c| !is_valid_label(c)) {
            return Err(Error::contract(format!("invalid category label {bad:?}")));
        }
        Ok(())
    }
}

/// One labeled document; `id` is its position in the corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: usize,
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    categories: BTreeSet<String>,
}

impl Corpus {
    /// Builds a corpus from `(label, text)` pairs, assigning dense ids.
    pub fn new<I, L, T>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (L, T)>,
        L: Into<String>,
        T: Into<String>,
    {
        let mut documents = Vec::new();
        let mut categories = BTreeSet::new();
        for (id, (label, text)) in docs.into_iter().enumerate() {
            let label = label.into();
            if !is_valid_label(&label) {
                return Err(Error::contract(format!("invalid category label {label:?}")));
            }
            categories.insert(label.clone());
            documents.push(Document {
                id,
                label,
                text: text.into(),
            });
        }
        if documents.is_empty() {
            return Err(Error::DegenerateCorpus("no documents".into()));
        }
        Ok(Corpus {
            documents,
            categories,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn categories(&self) -> &BTreeSet<String> {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.label.clone()).collect()
    }

    pub fn tokenize(&self, stops: &StopWordList) -> Vec<TokenStream> {
        self.documents
            .iter()
            .map(|d| tokenize(&d.text, stops))
            .collect()
    }

    /// Per-category document counts in label order.
    pub fn category_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for d in &self.documents {
            *counts.entry(d.label.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Re-applies a category scope to an already-built corpus. Useful because
    /// scopes depend only on labels.
    pub fn rescope(&self, scope: CategoryScope) -> Result<Corpus> {
        Corpus::new(self.documents.iter().filter_map(|d| {
            scope
                .map_label(&d.label)
                .map(|l| (l.to_string(), d.text.clone()))
        }))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for d in &self.documents {
            writeln!(w, "{}\t{}\t{}", d.id, d.label, d.text)?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: BufRead>(reader: R, source: &str) -> Result<Corpus> {
        let mut docs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let bad = |message: &str| Error::Format {
                path: source.to_string(),
                line: i + 1,
                message: message.to_string(),
            };
            let mut parts = line.splitn(3, '\t');
            let (Some(id), Some(label), Some(text)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected doc_id TAB category TAB text"));
            };
            let id: usize = id.parse().map_err(|_| bad("doc_id is not an integer"))?;
            if id != docs.len() {
                return Err(bad("doc_ids must be dense and in order"));
            }
            docs.push((label.to_string(), text.to_string()));
        }
        Corpus::new(docs)
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Corpus::read_from(BufReader::new(file), &path.display().to_string())
    }
}

/// Why a CSV data row was not turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    MissingCategory,
    InvalidCategory(String),
    BadBoolean { column: String, value: String },
    Malformed(String),
}

impl SkipReason {
    /// Short key used when tallying reasons.
    pub fn kind(&self) -> &'static str {
        match self {
            SkipReason::MissingCategory => "missing-category",
            SkipReason::InvalidCategory(_) => "invalid-category",
            SkipReason::BadBoolean { .. } => "bad-boolean",
            SkipReason::Malformed(_) => "malformed-row",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::MissingCategory => write!(f, "missing Category"),
            SkipReason::InvalidCategory(c) => write!(f, "invalid Category {c:?}"),
            SkipReason::BadBoolean { column, value } => {
                write!(f, "unparseable boolean {column}={value:?}")
            }
            SkipReason::Malformed(m) => write!(f, "malformed row: {m}"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RawLoad {
    pub records: Vec<AppRecord>,
    pub rows_read: usize,
    /// `(1-based data row number, reason)`.
    pub skipped: Vec<(usize, SkipReason)>,
}

impl RawLoad {
    pub fn skip_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for (_, r) in &self.skipped {
            *counts.entry(r.kind()).or_insert(0) += 1;
        }
        counts
    }
}

/// Which columns must be present in the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvSchema {
    /// Labeled training data: all seven pipeline columns are required.
    Labeled,
    /// Apps to categorize: only `AppName` and `Description` are required.
    Unlabeled,
}

const COL_APP_NAME: &str = "AppName";
const COL_DEVELOPER: &str = "Developer";
const COL_TOP_DEV: &str = "IsTopDeveloper";
const COL_CATEGORY: &str = "Category";
const COL_IS_FREE: &str = "IsFree";
const COL_PRICE: &str = "Price";
const COL_RATING: &str = "ContentRating";
const COL_IAP: &str = "HaveInAppPurchases";
const COL_DESCRIPTION: &str = "Description";

const REQUIRED_LABELED: [&str; 7] = [
    COL_APP_NAME,
    COL_CATEGORY,
    COL_DESCRIPTION,
    COL_TOP_DEV,
    COL_RATING,
    COL_IS_FREE,
    COL_IAP,
];
const REQUIRED_UNLABELED: [&str; 2] = [COL_APP_NAME, COL_DESCRIPTION];
const KNOWN: [&str; 9] = [
    COL_APP_NAME,
    COL_DEVELOPER,
    COL_TOP_DEV,
    COL_CATEGORY,
    COL_IS_FREE,
    COL_PRICE,
    COL_RATING,
    COL_IAP,
    COL_DESCRIPTION,
];

fn parse_bool(column: &str, value: &str) -> std::result::Result<bool, SkipReason> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("true") || v == "1" {
        Ok(true)
    } else if v.eq_ignore_ascii_case("false") || v == "0" {
        Ok(false)
    } else {
        Err(SkipReason::BadBoolean {
            column: column.to_string(),
            value: value.to_string(),
        })
    }
}

/// Reads app-metadata CSV from any reader. Header names match
/// case-insensitively. Rows that cannot be parsed are skipped and reported.
pub fn read_apps_csv<R: Read>(reader: R, schema: CsvSchema) -> Result<RawLoad> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let required: &[&str] = match schema {
        CsvSchema::Labeled => &REQUIRED_LABELED,
        CsvSchema::Unlabeled => &REQUIRED_UNLABELED,
    };
    for name in required {
        if col(name).is_none() {
            return Err(Error::Schema((*name).to_string()));
        }
    }
    let idx: BTreeMap<&str, Option<usize>> = KNOWN.iter().map(|&n| (n, col(n))).collect();
    let extra_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !KNOWN.iter().any(|k| h.trim().eq_ignore_ascii_case(k)))
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut load = RawLoad::default();
    for (row_no, row) in rdr.records().enumerate() {
        let row_no = row_no + 1;
        load.rows_read += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                log::debug!("row {row_no}: skipped: {e}");
                load.skipped.push((row_no, SkipReason::Malformed(e.to_string())));
                continue;
            }
        };
        match parse_row(&row, &idx, &extra_cols, headers.len(), schema) {
            Ok(rec) => load.records.push(rec),
            Err(reason) => {
                log::debug!("row {row_no}: skipped: {reason}");
                load.skipped.push((row_no, reason));
            }
        }
    }
    Ok(load)
}

fn parse_row(
    row: &csv::StringRecord,
    idx: &BTreeMap<&str, Option<usize>>,
    extra_cols: &[(usize, String)],
    n_headers: usize,
    schema: CsvSchema,
) -> std::result::Result<AppRecord, SkipReason> {
    if row.len() != n_headers {
        return Err(SkipReason::Malformed(format!(
            "{} fields, header has {}",
            row.len(),
            n_headers
        )));
    }
    let text = |name: &str| -> &str { idx[name].and_then(|i| row.get(i)).unwrap_or("") };
    let flag = |name: &str| -> std::result::Result<bool, SkipReason> {
        match idx[name] {
            Some(i) => parse_bool(name, row.get(i).unwrap_or("")),
            None => Ok(false),
        }
    };

    let category = text(COL_CATEGORY).trim().to_string();
    if schema == CsvSchema::Labeled {
        if category.is_empty() {
            return Err(SkipReason::MissingCategory);
        }
        if !is_valid_label(&category) {
            return Err(SkipReason::InvalidCategory(category));
        }
    }
    Ok(AppRecord {
        app_name: text(COL_APP_NAME).to_string(),
        developer: text(COL_DEVELOPER).to_string(),
        is_top_developer: flag(COL_TOP_DEV)?,
        category,
        is_free: flag(COL_IS_FREE)?,
        price: text(COL_PRICE).trim().parse().ok(),
        content_rating: text(COL_RATING).to_string(),
        have_in_app_purchases: flag(COL_IAP)?,
        description: text(COL_DESCRIPTION).to_string(),
        extra: extra_cols
            .iter()
            .map(|(i, h)| (h.clone(), row.get(*i).unwrap_or("").to_string()))
            .collect(),
    })
}

/// Loads a labeled app-metadata CSV file.
pub fn load_raw_csv(path: &Path) -> Result<RawLoad> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_apps_csv(BufReader::new(file), CsvSchema::Labeled)
}

pub fn filter_top_developers(records: &[AppRecord]) -> Vec<AppRecord> {
    records
        .iter()
        .filter(|r| r.is_top_developer)
        .cloned()
        .collect()
}

fn bool_token(prefix: &str, value: bool) -> String {
    format!("{prefix}_{}", if value { "yes" } else { "no" })
}

/// Joins name, content rating, the two boolean attributes (as synthetic
/// tokens) and description, in that order. Whitespace runs collapse to a
/// single space, so empty fields vanish and the result is tab/newline free.
pub fn compose_document(record: &AppRecord) -> String {
    let is_free = bool_token("isfree", record.is_free);
    let iap = bool_token("iap", record.have_in_app_purchases);
    [
        record.app_name.as_str(),
        record.content_rating.as_str(),
        is_free.as_str(),
        iap.as_str(),
        record.description.as_str(),
    ]
    .iter()
    .flat_map(|s| s.split_whitespace())
    .collect::<Vec<_>>()
    .join(" ")
}

/// Applies the app filter and category scope, returning surviving records
/// (in input order) with their category rewritten to the scoped label.
pub fn filter_records(records: &[AppRecord], profile: &FilterProfile) -> Vec<AppRecord> {
    records
        .iter()
        .filter(|r| match profile.app_filter {
            AppFilter::AllApps => true,
            AppFilter::FilteredApps => {
                r.description.split_whitespace().count() >= profile.min_description_words
                    && !profile.dropped_categories.contains(&r.category)
            }
        })
        .filter_map(|r| {
            profile
                .category_scope
                .map_label(&r.category)
                .map(|label| AppRecord {
                    category: label.to_string(),
                    ..r.clone()
                })
        })
        .collect()
}

/// Builds the labeled corpus for a profile. `records` should already be
/// restricted to top developers.
pub fn apply_filter_profile(records: &[AppRecord], profile: &FilterProfile) -> Result<Corpus> {
    profile.validate()?;
    let kept = filter_records(records, profile);
    if kept.is_empty() {
        return Err(Error::DegenerateCorpus(format!(
            "no records survive profile {:?}/{:?}",
            profile.app_filter, profile.category_scope
        )));
    }
    Corpus::new(kept.iter().map(|r| (r.category.clone(), compose_document(r))))
}
