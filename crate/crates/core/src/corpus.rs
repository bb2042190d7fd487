//! Contract corpus ingestion: loading, validation and deduplication.
//!
//! A corpus is either a directory of `<address>.sol` files (with optional
//! `<address>.abi.json` and `<address>.bin` siblings) or a single line-file
//! with one JSON record per line. Records are normalized, keyed by address
//! and ordered deterministically.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

pub mod fetch;

/// A normalized contract address: exactly 40 lowercase hex characters,
/// stored without the `0x` prefix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(String);

#[derive(Debug, Error, PartialEq)]
#[error("invalid contract address {0:?}: expected 40 hex characters")]
pub struct AddressError(String);

impl Address {
    /// Normalizes a raw address: trims whitespace, strips an optional
    /// `0x`/`0X` prefix and lowercases. Anything that is not 40 hex
    /// characters after normalization is rejected.
    pub fn parse(raw: &str) -> Result<Address, AddressError> {
        let trimmed = raw.trim();
        let hex = trimmed
            .strip_prefix("0x")
            .or_else(|| trimmed.strip_prefix("0X"))
            .unwrap_or(trimmed);
        if hex.len() != 40 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(AddressError(truncate_for_display(raw)));
        }
        Ok(Address(hex.to_ascii_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Address {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Address::parse(s)
    }
}

fn truncate_for_display(raw: &str) -> String {
    const MAX: usize = 64;
    if raw.len() <= MAX {
        raw.to_string()
    } else {
        let mut end = MAX;
        while !raw.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &raw[..end])
    }
}

/// One contract at one blockchain address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractRecord {
    pub address: Address,
    /// Solidity source text; may be empty.
    pub source: String,
    /// ABI JSON text, verbatim as retrieved.
    pub abi_json: Option<String>,
    /// Deployed bytecode as lowercase hex without the `0x` prefix.
    pub bytecode_hex: Option<String>,
    /// Informational only; never part of analysis output.
    pub retrieved_at: Option<String>,
}

/// Normalizes a bytecode hex string: trims whitespace, strips an optional
/// `0x` prefix and lowercases. Rejects odd lengths and non-hex characters.
pub fn normalize_bytecode(raw: &str) -> Result<String, String> {
    let trimmed = raw.trim();
    let hex = trimmed
        .strip_prefix("0x")
        .or_else(|| trimmed.strip_prefix("0X"))
        .unwrap_or(trimmed);
    let lower = hex.to_ascii_lowercase();
    if !lower
        .bytes()
        .all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
    {
        return Err("bytecode contains non-hex characters".to_string());
    }
    if !lower.len().is_multiple_of(2) {
        return Err("bytecode has odd hex length".to_string());
    }
    Ok(lower)
}

/// An immutable collection of contract records, ordered by address.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<ContractRecord>,
    dedup_applied: bool,
    duplicates_removed: usize,
    diagnostics: Vec<String>,
}

impl Corpus {
    /// Builds a corpus from raw records: drops address collisions (first
    /// occurrence wins), optionally removes source-text duplicates and
    /// sorts by address.
    ///
    /// Duplicate sources are detected by byte identity; within a duplicate
    /// group the record with the lexicographically smallest address is
    /// retained, so the result does not depend on input order.
    pub fn from_records(records: Vec<ContractRecord>, dedup: bool) -> Corpus {
        let mut diagnostics = Vec::new();

        let mut by_address: BTreeMap<Address, ContractRecord> = BTreeMap::new();
        for record in records {
            if by_address.contains_key(&record.address) {
                diagnostics.push(format!(
                    "duplicate address {}: record skipped",
                    record.address
                ));
            } else {
                by_address.insert(record.address.clone(), record);
            }
        }

        let mut records: Vec<ContractRecord> = by_address.into_values().collect();
        let mut duplicates_removed = 0;
        if dedup {
            // Records are address-sorted, so a stable sort by source keeps
            // the smallest address first within each identical-source group.
            records.sort_by(|a, b| a.source.cmp(&b.source));
            let mut retained: Vec<ContractRecord> = Vec::with_capacity(records.len());
            for record in records {
                if retained
                    .last()
                    .is_some_and(|prev: &ContractRecord| prev.source == record.source)
                {
                    duplicates_removed += 1;
                } else {
                    retained.push(record);
                }
            }
            retained.sort_by(|a, b| a.address.cmp(&b.address));
            records = retained;
        }

        Corpus {
            records,
            dedup_applied: dedup,
            duplicates_removed,
            diagnostics,
        }
    }

    pub fn records(&self) -> &[ContractRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dedup_applied(&self) -> bool {
        self.dedup_applied
    }

    pub fn duplicates_removed(&self) -> usize {
        self.duplicates_removed
    }

    /// Per-record problems encountered while loading (rejected addresses,
    /// unparseable lines, dropped bytecode). Never fatal.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    fn push_diagnostics(&mut self, mut extra: Vec<String>) {
        extra.append(&mut self.diagnostics);
        self.diagnostics = extra;
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no valid contract records in {path}")]
    Empty { path: PathBuf },
}

/// Loads a corpus from a directory of `<address>.sol` files or from a
/// line-file with one JSON record per line.
///
/// Records with malformed addresses are rejected with a diagnostic; an
/// unreadable path or a corpus with zero valid records is fatal.
pub fn load_corpus(path: &Path, dedup: bool) -> Result<Corpus, CorpusError> {
    let meta = fs::metadata(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (records, diagnostics) = if meta.is_dir() {
        load_directory(path)?
    } else {
        load_line_file(path)?
    };
    if records.is_empty() {
        return Err(CorpusError::Empty {
            path: path.to_path_buf(),
        });
    }
    let mut corpus = Corpus::from_records(records, dedup);
    corpus.push_diagnostics(diagnostics);
    Ok(corpus)
}

fn read_file(path: &Path) -> Result<Vec<u8>, CorpusError> {
    fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_directory(dir: &Path) -> Result<(Vec<ContractRecord>, Vec<String>), CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut sol_files: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().is_some_and(|ext| ext == "sol") && path.is_file() {
            sol_files.push(path);
        }
    }
    sol_files.sort();

    let mut records = Vec::with_capacity(sol_files.len());
    let mut diagnostics = Vec::new();
    for path in sol_files {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let address = match Address::parse(&stem) {
            Ok(address) => address,
            Err(err) => {
                diagnostics.push(format!("{}: {err}", path.display()));
                continue;
            }
        };
        let source = String::from_utf8_lossy(&read_file(&path)?).into_owned();

        let abi_path = path.with_extension("abi.json");
        let abi_json = if abi_path.is_file() {
            Some(String::from_utf8_lossy(&read_file(&abi_path)?).into_owned())
        } else {
            None
        };

        let bin_path = path.with_extension("bin");
        let bytecode_hex = if bin_path.is_file() {
            let raw = String::from_utf8_lossy(&read_file(&bin_path)?).into_owned();
            match normalize_bytecode(&raw) {
                Ok(hex) => Some(hex),
                Err(err) => {
                    diagnostics.push(format!("{}: {err}; bytecode dropped", bin_path.display()));
                    None
                }
            }
        } else {
            None
        };

        records.push(ContractRecord {
            address,
            source,
            abi_json,
            bytecode_hex,
            retrieved_at: None,
        });
    }
    Ok((records, diagnostics))
}

#[derive(Deserialize)]
struct LineRecord {
    address: String,
    source: String,
    #[serde(default)]
    abi: Option<String>,
    #[serde(default)]
    bytecode: Option<String>,
    #[serde(default)]
    retrieved_at: Option<String>,
}

fn load_line_file(path: &Path) -> Result<(Vec<ContractRecord>, Vec<String>), CorpusError> {
    let text = String::from_utf8_lossy(&read_file(path)?).into_owned();
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let parsed: LineRecord = match serde_json::from_str(line) {
            Ok(parsed) => parsed,
            Err(err) => {
                diagnostics.push(format!(
                    "{}:{lineno}: unparseable record skipped: {err}",
                    path.display()
                ));
                continue;
            }
        };
        let address = match Address::parse(&parsed.address) {
            Ok(address) => address,
            Err(err) => {
                diagnostics.push(format!("{}:{lineno}: {err}", path.display()));
                continue;
            }
        };
        let bytecode_hex = match parsed.bytecode {
            Some(raw) => match normalize_bytecode(&raw) {
                Ok(hex) => Some(hex),
                Err(err) => {
                    diagnostics.push(format!(
                        "{}:{lineno}: {err}; bytecode dropped",
                        path.display()
                    ));
                    None
                }
            },
            None => None,
        };
        records.push(ContractRecord {
            address,
            source: parsed.source,
            abi_json: parsed.abi,
            bytecode_hex,
            retrieved_at: parsed.retrieved_at,
        });
    }
    Ok((records, diagnostics))
}
