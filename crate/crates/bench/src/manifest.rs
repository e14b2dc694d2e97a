//! Sweep manifests.
//!
//! One dataset per line; blank lines and `#` comments are skipped.
//!
//! ```text
//! data/rat_4_10.txt uncorr
//! data/genomes.fa corr format=fasta alphabet=ACGT truncate=400
//! gen:uncorr sigma=4 n=10 len=600 seed=1
//! gen:corr sigma=2 n=10 len=1000 rate=0.1 seed=7 name=bb_like
//! ```
//!
//! File paths are relative to the manifest's directory. A `gen:` line takes
//! its family from the generator unless a bare family word overrides it.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use mlcs_core::dataset::{self, gen_correlated, gen_uncorrelated, DatasetDescriptor, DatasetError, Family};
use mlcs_core::Instance;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest line {line}: {message}")]
    Syntax { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntrySource {
    Plain(PathBuf),
    Fasta { path: PathBuf, alphabet: Vec<u8>, truncate: Option<usize> },
    Uncorrelated { sigma: usize, n: usize, len: usize, seed: u64 },
    Correlated { sigma: usize, n: usize, len: usize, rate: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub source: EntrySource,
    pub family: Option<Family>,
    pub name: Option<String>,
}

impl Entry {
    /// Fallback label when the dataset cannot be loaded.
    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match &self.source {
            EntrySource::Plain(p) | EntrySource::Fasta { path: p, .. } => {
                p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            }
            EntrySource::Uncorrelated { sigma, n, len, seed } => format!("uncorr_s{sigma}_n{n}_l{len}_seed{seed}"),
            EntrySource::Correlated { sigma, n, len, rate, seed } => {
                format!("corr_s{sigma}_n{n}_l{len}_r{rate}_seed{seed}")
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.source {
            EntrySource::Uncorrelated { seed, .. } | EntrySource::Correlated { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn load(&self) -> Result<(Instance, DatasetDescriptor), DatasetError> {
        let (instance, mut desc) = match &self.source {
            EntrySource::Plain(path) => dataset::load_plain(path)?,
            EntrySource::Fasta { path, alphabet, truncate } => dataset::load_fasta(path, alphabet, *truncate)?,
            &EntrySource::Uncorrelated { sigma, n, len, seed } => gen_uncorrelated(sigma, n, len, seed)?,
            &EntrySource::Correlated { sigma, n, len, rate, seed } => gen_correlated(sigma, n, len, rate, seed)?,
        };
        if let Some(family) = self.family {
            desc.family = family;
        }
        if let Some(name) = &self.name {
            desc.name = name.clone();
        }
        Ok((instance, desc))
    }
}

pub fn load(path: &Path) -> Result<Vec<Entry>, ManifestError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_owned(), source })?;
    parse(&text, path.parent().unwrap_or(Path::new("")))
}

pub fn parse(text: &str, base: &Path) -> Result<Vec<Entry>, ManifestError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        entries.push(parse_line(content, base).map_err(|message| ManifestError::Syntax { line, message })?);
    }
    Ok(entries)
}

fn parse_line(content: &str, base: &Path) -> Result<Entry, String> {
    let mut words = content.split_whitespace();
    let head = words.next().ok_or("empty line")?;
    let mut family = None;
    let mut keys: HashMap<&str, &str> = HashMap::new();
    for word in words {
        match word.split_once('=') {
            Some((k, v)) => {
                if keys.insert(k, v).is_some() {
                    return Err(format!("key {k:?} given twice"));
                }
            }
            None if family.is_none() => family = Some(word.parse::<Family>()?),
            None => return Err(format!("unexpected word {word:?}")),
        }
    }
    let mut take = |key: &str| keys.remove(key);
    let name = take("name").map(str::to_owned);

    let source = if let Some(kind) = head.strip_prefix("gen:") {
        let sigma = number(take("sigma"), "sigma")?;
        let n = number(take("n"), "n")?;
        let len = number(take("len"), "len")?;
        let seed = number(take("seed"), "seed")?;
        match kind {
            "uncorr" => EntrySource::Uncorrelated { sigma, n, len, seed },
            "corr" => {
                let rate = number(take("rate"), "rate")?;
                EntrySource::Correlated { sigma, n, len, rate, seed }
            }
            other => return Err(format!("unknown generator {other:?}")),
        }
    } else {
        let path = base.join(head);
        match take("format").unwrap_or("plain") {
            "plain" => EntrySource::Plain(path),
            "fasta" => EntrySource::Fasta {
                path,
                alphabet: take("alphabet").unwrap_or("ACGT").as_bytes().to_vec(),
                truncate: take("truncate").map(|t| number(Some(t), "truncate")).transpose()?,
            },
            other => return Err(format!("unknown format {other:?}")),
        }
    };
    if let Some(key) = keys.keys().next() {
        return Err(format!("unknown key {key:?}"));
    }
    Ok(Entry { source, family, name })
}

fn number<T: std::str::FromStr>(value: Option<&str>, key: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    let value = value.ok_or_else(|| format!("missing {key}="))?;
    value.parse().map_err(|e| format!("{key}={value}: {e}"))
}
