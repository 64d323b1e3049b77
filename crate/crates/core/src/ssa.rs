//! In-memory index over the SSA baby-names distribution.
//!
//! Each `yobYYYY.txt` file holds `Name,Sex,Count` lines for one birth year.
//! Rows are merged per normalized name into a [`YearTable`], and a set of
//! year tables forms an immutable [`SsaCorpus`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// SSA publishes only names given to at least this many babies in a year.
pub const MIN_PUBLISHED_COUNT: u32 = 5;

/// Birth years before this are loadable but flagged: female names and
/// agricultural workers were undercounted in the early registry.
pub const RELIABLE_FROM_YEAR: i32 = 1940;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

impl Sex {
    pub fn code(self) -> &'static str {
        match self {
            Sex::F => "F",
            Sex::M => "M",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsaRow {
    pub given_name: String,
    pub sex: Sex,
    pub count: u32,
}

/// Outcome of parsing one raw line; separates syntax errors from
/// values that parse but violate the published-corpus rules.
enum RowError {
    Malformed(String),
    Corrupt(String),
}

impl SsaRow {
    fn parse(line: &str) -> Result<Self, RowError> {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(RowError::Malformed(format!(
                "expected 3 comma-separated fields, found {}",
                fields.len()
            )));
        }
        let given_name = fields[0];
        if given_name.is_empty() {
            return Err(RowError::Malformed("empty name".into()));
        }
        if given_name.chars().any(|c| c.is_ascii_digit()) {
            return Err(RowError::Malformed(format!("name {given_name:?} contains digits")));
        }
        let sex = match fields[1] {
            "F" => Sex::F,
            "M" => Sex::M,
            other => return Err(RowError::Malformed(format!("unknown sex code {other:?}"))),
        };
        let count: u32 = fields[2]
            .parse()
            .map_err(|_| RowError::Malformed(format!("count {:?} is not an integer", fields[2])))?;
        if count < MIN_PUBLISHED_COUNT {
            return Err(RowError::Corrupt(format!(
                "count {count} for {given_name},{} is below the published minimum of {MIN_PUBLISHED_COUNT}",
                sex.code()
            )));
        }
        Ok(SsaRow {
            given_name: given_name.to_string(),
            sex,
            count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NameCounts {
    pub female: u64,
    pub male: u64,
}

impl NameCounts {
    pub fn total(self) -> u64 {
        self.female + self.male
    }

    pub fn p_female(self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.female as f64 / total as f64)
    }
}

impl std::ops::AddAssign for NameCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.female += rhs.female;
        self.male += rhs.male;
    }
}

#[derive(Debug, Clone)]
struct Entry {
    /// Spelling as published, kept for reporting.
    raw: String,
    counts: NameCounts,
}

/// All names recorded for one birth year.
#[derive(Debug, Clone)]
pub struct YearTable {
    birth_year: i32,
    entries: HashMap<String, Entry>,
    rows: usize,
}

/// Case-folds and strips diacritics. Used for every corpus key.
pub fn normalize(text: &str) -> String {
    text.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// The key used to query the corpus: the first whitespace- or
/// hyphen-delimited token of the normalized name.
pub fn lookup_key(name: &str) -> Option<String> {
    normalize(name)
        .split(|c: char| c.is_whitespace() || c == '-')
        .find(|t| !t.is_empty())
        .map(str::to_string)
}

/// Parses the contents of one `yobYYYY.txt` file.
pub fn parse_ssa_year(text: &str, birth_year: i32) -> Result<YearTable> {
    let mut entries: HashMap<String, Entry> = HashMap::new();
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row = SsaRow::parse(line).map_err(|e| match e {
            RowError::Malformed(msg) => Error::Parse {
                year: birth_year,
                line: line_no,
                msg,
            },
            RowError::Corrupt(msg) => Error::Integrity {
                year: birth_year,
                line: line_no,
                msg,
            },
        })?;
        rows += 1;
        let key = normalize(&row.given_name);
        let entry = entries.entry(key).or_insert_with(|| Entry {
            raw: row.given_name.clone(),
            counts: NameCounts::default(),
        });
        let slot = match row.sex {
            Sex::F => &mut entry.counts.female,
            Sex::M => &mut entry.counts.male,
        };
        if *slot != 0 {
            return Err(Error::Integrity {
                year: birth_year,
                line: line_no,
                msg: format!("duplicate row for ({}, {})", row.given_name, row.sex.code()),
            });
        }
        *slot = u64::from(row.count);
    }
    Ok(YearTable {
        birth_year,
        entries,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpEntry {
    pub name: String,
    pub f: u64,
    pub m: u64,
}

/// Normalized JSON dump of one year table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearDump {
    pub year: i32,
    pub entries: Vec<DumpEntry>,
}

impl YearTable {
    pub fn birth_year(&self) -> i32 {
        self.birth_year
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of raw `Name,Sex,Count` lines this table was built from.
    pub fn row_count(&self) -> usize {
        self.rows
    }

    /// Looks up an already-normalized key.
    pub fn get(&self, key: &str) -> Option<NameCounts> {
        self.entries.get(key).map(|e| e.counts)
    }

    /// Entries as (published spelling, counts), sorted by normalized key.
    pub fn iter_sorted(&self) -> impl Iterator<Item = (&str, NameCounts)> {
        let mut keys: Vec<&String> = self.entries.keys().collect();
        keys.sort();
        keys.into_iter().map(move |k| {
            let e = &self.entries[k];
            (e.raw.as_str(), e.counts)
        })
    }

    /// Total births recorded for the year, by sex.
    pub fn totals(&self) -> NameCounts {
        let mut t = NameCounts::default();
        for e in self.entries.values() {
            t += e.counts;
        }
        t
    }

    pub fn dump(&self) -> YearDump {
        let mut entries: Vec<DumpEntry> = self
            .entries
            .iter()
            .map(|(k, e)| DumpEntry {
                name: k.clone(),
                f: e.counts.female,
                m: e.counts.male,
            })
            .collect();
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        YearDump {
            year: self.birth_year,
            entries,
        }
    }

    /// Re-serializes to the SSA line format, females first like the
    /// published files.
    pub fn to_ssa_text(&self) -> String {
        let mut out = String::new();
        for sex in [Sex::F, Sex::M] {
            for (name, c) in self.iter_sorted() {
                let n = match sex {
                    Sex::F => c.female,
                    Sex::M => c.male,
                };
                if n > 0 {
                    out.push_str(&format!("{name},{},{n}\n", sex.code()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reliability {
    Standard,
    Low,
}

/// Result of a corpus query that keeps the two kinds of miss apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Found(NameCounts),
    NameAbsent,
    /// The year is outside the loaded range or is a gap inside it.
    YearUnavailable,
}

#[derive(Debug, Clone)]
pub struct SsaCorpus {
    tables: BTreeMap<i32, YearTable>,
    year_range: (i32, i32),
}

/// Builds a corpus from `(birth_year, file contents)` pairs.
pub fn load_corpus<I, S>(sources: I) -> Result<SsaCorpus>
where
    I: IntoIterator<Item = (i32, S)>,
    S: AsRef<str>,
{
    let mut tables = BTreeMap::new();
    for (year, text) in sources {
        if tables.contains_key(&year) {
            return Err(Error::DuplicateYear(year));
        }
        tables.insert(year, parse_ssa_year(text.as_ref(), year)?);
    }
    SsaCorpus::from_tables(tables)
}

/// Extracts the birth year from a `yobYYYY.txt` file name.
pub fn year_from_file_name(name: &str) -> Option<i32> {
    let idx = name.find("yob")?;
    let digits = name.get(idx + 3..idx + 7)?;
    if digits.len() == 4 && digits.bytes().all(|b| b.is_ascii_digit()) {
        digits.parse().ok()
    } else {
        None
    }
}

impl SsaCorpus {
    fn from_tables(tables: BTreeMap<i32, YearTable>) -> Result<Self> {
        let (&min, _) = tables.first_key_value().ok_or(Error::EmptyCorpus)?;
        let (&max, _) = tables.last_key_value().ok_or(Error::EmptyCorpus)?;
        Ok(SsaCorpus {
            tables,
            year_range: (min, max),
        })
    }

    /// Loads every `yobYYYY.txt` file in `dir`. Other files are ignored.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut sources = Vec::new();
        for entry in std::fs::read_dir(dir.as_ref())? {
            let entry = entry?;
            let name = entry.file_name();
            let Some(year) = name.to_str().and_then(year_from_file_name) else {
                continue;
            };
            if !entry.file_type()?.is_file() {
                continue;
            }
            sources.push((year, std::fs::read_to_string(entry.path())?));
        }
        sources.sort_by_key(|(y, _)| *y);
        load_corpus(sources)
    }

    pub fn year_range(&self) -> (i32, i32) {
        self.year_range
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.tables.keys().copied()
    }

    /// Interior years with no loaded table.
    pub fn gaps(&self) -> Vec<i32> {
        let (lo, hi) = self.year_range;
        (lo..=hi).filter(|y| !self.tables.contains_key(y)).collect()
    }

    pub fn table(&self, year: i32) -> Option<&YearTable> {
        self.tables.get(&year)
    }

    pub fn tables(&self) -> impl Iterator<Item = &YearTable> {
        self.tables.values()
    }

    pub fn row_count(&self) -> usize {
        self.tables.values().map(YearTable::row_count).sum()
    }

    pub fn reliability(&self, year: i32) -> Reliability {
        if year < RELIABLE_FROM_YEAR {
            Reliability::Low
        } else {
            Reliability::Standard
        }
    }

    pub fn lookup(&self, given_name: &str, birth_year: i32) -> Lookup {
        let Some(table) = self.tables.get(&birth_year) else {
            return Lookup::YearUnavailable;
        };
        match lookup_key(given_name).and_then(|k| table.get(&k)) {
            Some(c) => Lookup::Found(c),
            None => Lookup::NameAbsent,
        }
    }

    /// Female and male counts for a name in one birth year. Use
    /// [`SsaCorpus::lookup`] to tell a missing year from a missing name.
    pub fn counts(&self, given_name: &str, birth_year: i32) -> Option<NameCounts> {
        match self.lookup(given_name, birth_year) {
            Lookup::Found(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}
