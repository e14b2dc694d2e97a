//! Benchmark files and synthetic instance generators.
//!
//! Plain format:
//!
//! ```text
//! N |Σ|
//! <alphabet as one contiguous string>
//! <length> <string>        (N lines)
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::HeuristicKind;
use crate::instance::{Instance, InstanceError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: declared length {declared} but string has {actual} symbols")]
    LengthMismatch { line: usize, declared: usize, actual: usize },
    #[error("line {line}: symbol {symbol:?} is not in the declared alphabet")]
    AlphabetViolation { line: usize, symbol: char },
    #[error("record {header:?}: symbol {symbol:?} is not in the alphabet")]
    RecordViolation { header: String, symbol: char },
    #[error("unsupported alphabet size {0} for generated instances (1..=62)")]
    GeneratorAlphabet(usize),
    #[error("mutation rate {0} outside [0, 1]")]
    MutationRate(f64),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

/// Dataset family; selects the default `k` rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Uncorrelated,
    Correlated,
    Unknown,
}

impl Family {
    /// Correlated data uses the `min − c` rule, everything else the
    /// `max·(a − b ln N)` rule.
    pub fn default_k_heuristic(self) -> HeuristicKind {
        match self {
            Family::Correlated => HeuristicKind::ProbKAnalyticCorr,
            Family::Uncorrelated | Family::Unknown => HeuristicKind::ProbKAnalyticUncorr,
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "uncorr" | "uncorrelated" => Ok(Family::Uncorrelated),
            "corr" | "correlated" => Ok(Family::Correlated),
            "unknown" => Ok(Family::Unknown),
            other => Err(format!("unknown family {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Source {
    File(PathBuf),
    Uncorrelated { seed: u64 },
    Correlated { mutation_rate: f64, seed: u64 },
}

impl Source {
    pub fn seed(&self) -> Option<u64> {
        match *self {
            Source::File(_) => None,
            Source::Uncorrelated { seed } | Source::Correlated { seed, .. } => Some(seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub family: Family,
    pub sigma_size: usize,
    pub n: usize,
    pub lengths: Vec<usize>,
    pub source: Source,
    /// FASTA record headers, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub headers: Vec<String>,
}

impl DatasetDescriptor {
    fn for_instance(name: String, family: Family, instance: &Instance, source: Source) -> Self {
        Self {
            name,
            family,
            sigma_size: instance.sigma_size(),
            n: instance.num_strings(),
            lengths: (0..instance.num_strings()).map(|i| instance.string_len(i)).collect(),
            source,
            headers: Vec::new(),
        }
    }

    pub fn max_len(&self) -> usize {
        self.lengths.iter().copied().max().unwrap_or(0)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_owned(), source })
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Parses the plain benchmark format. Blank lines and surrounding
/// whitespace are ignored.
pub fn parse_plain(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let parse_err = |line, message: &str| DatasetError::Parse { line, message: message.to_owned() };

    let (line_no, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut fields = header.split_whitespace().map(str::parse::<usize>);
    let (n, sigma) = match (fields.next(), fields.next(), fields.next()) {
        (Some(Ok(n)), Some(Ok(s)), None) => (n, s),
        _ => return Err(parse_err(line_no, "expected `N |Σ|`")),
    };

    let (line_no, alphabet) = lines.next().ok_or_else(|| parse_err(line_no + 1, "missing alphabet line"))?;
    if alphabet.split_whitespace().count() != 1 || alphabet.len() != sigma {
        return Err(parse_err(line_no, &format!("expected an alphabet of {sigma} contiguous symbols")));
    }
    let alphabet = alphabet.as_bytes();

    let mut strings = Vec::with_capacity(n);
    for idx in 0..n {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(line_no + idx + 1, &format!("expected {n} strings, found {idx}")))?;
        let mut parts = line.split_whitespace();
        let declared: usize = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| parse_err(line_no, "expected `length string`"))?;
        let s = parts.next().unwrap_or("");
        if parts.next().is_some() {
            return Err(parse_err(line_no, "trailing fields after string"));
        }
        if s.len() != declared {
            return Err(DatasetError::LengthMismatch { line: line_no, declared, actual: s.len() });
        }
        if let Some(&bad) = s.as_bytes().iter().find(|b| !alphabet.contains(b)) {
            return Err(DatasetError::AlphabetViolation { line: line_no, symbol: bad as char });
        }
        strings.push(s.as_bytes().to_vec());
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(parse_err(line_no, &format!("more than the declared {n} strings")));
    }
    Ok(Instance::new(alphabet, &strings)?)
}

pub fn load_plain(path: &Path) -> Result<(Instance, DatasetDescriptor)> {
    let instance = parse_plain(&read(path)?)?;
    let desc = DatasetDescriptor::for_instance(file_stem(path), Family::Unknown, &instance, Source::File(path.into()));
    Ok((instance, desc))
}

/// Canonical plain-format text for an instance.
pub fn to_plain(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", instance.num_strings(), instance.sigma_size());
    out.push_str(&String::from_utf8_lossy(instance.alphabet()));
    out.push('\n');
    for s in instance.raw_strings() {
        let _ = writeln!(out, "{} {}", s.len(), String::from_utf8_lossy(&s));
    }
    out
}

pub fn save_plain(instance: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, to_plain(instance)).map_err(|source| DatasetError::Io { path: path.to_owned(), source })
}

/// Parses FASTA records, uppercasing sequences and optionally keeping only
/// the first `truncate` symbols of each. Returns headers and sequences.
pub fn parse_fasta(text: &str, alphabet: &[u8], truncate: Option<usize>) -> Result<(Vec<String>, Vec<Vec<u8>>)> {
    let mut headers: Vec<String> = Vec::new();
    let mut seqs: Vec<Vec<u8>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(h) = line.strip_prefix('>') {
            headers.push(h.trim().to_owned());
            seqs.push(Vec::new());
            continue;
        }
        let seq = seqs.last_mut().ok_or_else(|| DatasetError::Parse {
            line: i + 1,
            message: "sequence data before the first `>` header".into(),
        })?;
        seq.extend(line.bytes().filter(|b| !b.is_ascii_whitespace()).map(|b| b.to_ascii_uppercase()));
    }
    if headers.is_empty() {
        return Err(DatasetError::Parse { line: 1, message: "no FASTA records".into() });
    }
    for (header, seq) in headers.iter().zip(seqs.iter_mut()) {
        if let Some(t) = truncate {
            seq.truncate(t);
        }
        if let Some(&bad) = seq.iter().find(|b| !alphabet.contains(b)) {
            return Err(DatasetError::RecordViolation { header: header.clone(), symbol: bad as char });
        }
    }
    Ok((headers, seqs))
}

pub fn load_fasta(path: &Path, alphabet: &[u8], truncate: Option<usize>) -> Result<(Instance, DatasetDescriptor)> {
    let (headers, seqs) = parse_fasta(&read(path)?, alphabet, truncate)?;
    let instance = Instance::new(alphabet, &seqs)?;
    let mut desc = DatasetDescriptor::for_instance(file_stem(path), Family::Unknown, &instance, Source::File(path.into()));
    desc.headers = headers;
    Ok((instance, desc))
}

/// Alphabet used by the generators: DNA for 4, amino acids for 20,
/// otherwise a prefix of `A–Z a–z 0–9`.
pub fn default_alphabet(sigma_size: usize) -> Result<Vec<u8>> {
    const GENERIC: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    match sigma_size {
        4 => Ok(b"ACGT".to_vec()),
        20 => Ok(b"ACDEFGHIKLMNPQRSTVWY".to_vec()),
        s if (1..=GENERIC.len()).contains(&s) => Ok(GENERIC[..s].to_vec()),
        s => Err(DatasetError::GeneratorAlphabet(s)),
    }
}

/// ChaCha8 keyed by `seed`, one stream per string.
fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_string(rng: &mut ChaCha8Rng, alphabet: &[u8], len: usize) -> Vec<u8> {
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

/// `n` i.i.d. uniform strings of length `len`.
pub fn gen_uncorrelated(sigma_size: usize, n: usize, len: usize, seed: u64) -> Result<(Instance, DatasetDescriptor)> {
    let alphabet = default_alphabet(sigma_size)?;
    let strings: Vec<Vec<u8>> = (0..n).map(|i| random_string(&mut stream(seed, i as u64 + 1), &alphabet, len)).collect();
    let instance = Instance::new(&alphabet, &strings)?;
    let name = format!("uncorr_s{sigma_size}_n{n}_l{len}_seed{seed}");
    let desc = DatasetDescriptor::for_instance(name, Family::Uncorrelated, &instance, Source::Uncorrelated { seed });
    Ok((instance, desc))
}

/// A uniform base string copied `n` times, each position replaced by a
/// uniform symbol with probability `mutation_rate`.
pub fn gen_correlated(
    sigma_size: usize,
    n: usize,
    len: usize,
    mutation_rate: f64,
    seed: u64,
) -> Result<(Instance, DatasetDescriptor)> {
    if !(0.0..=1.0).contains(&mutation_rate) {
        return Err(DatasetError::MutationRate(mutation_rate));
    }
    let alphabet = default_alphabet(sigma_size)?;
    let base = random_string(&mut stream(seed, 0), &alphabet, len);
    let strings: Vec<Vec<u8>> = (0..n)
        .map(|i| {
            let mut rng = stream(seed, i as u64 + 1);
            base.iter()
                .map(|&b| {
                    if rng.gen_bool(mutation_rate) {
                        alphabet[rng.gen_range(0..alphabet.len())]
                    } else {
                        b
                    }
                })
                .collect()
        })
        .collect();
    let instance = Instance::new(&alphabet, &strings)?;
    let name = format!("corr_s{sigma_size}_n{n}_l{len}_r{mutation_rate}_seed{seed}");
    let desc = DatasetDescriptor::for_instance(
        name,
        Family::Correlated,
        &instance,
        Source::Correlated { mutation_rate, seed },
    );
    Ok((instance, desc))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "2 3\nABC\n8 BCABAABC\n8 CAACBBAA\n";

    #[test]
    fn parses_example_instance() {
        let inst = parse_plain(EXAMPLE).unwrap();
        assert_eq!(inst.num_strings(), 2);
        assert_eq!(inst.raw_strings(), vec![b"BCABAABC".to_vec(), b"CAACBBAA".to_vec()]);
        assert_eq!(to_plain(&inst), EXAMPLE);
    }

    #[test]
    fn whitespace_tolerant() {
        let inst = parse_plain("  2   3 \n\n ABC\n8\tBCABAABC  \n 8 CAACBBAA").unwrap();
        assert_eq!(to_plain(&inst), EXAMPLE);
    }

    #[test]
    fn plain_errors() {
        assert!(matches!(parse_plain(""), Err(DatasetError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_plain("2 3\nABC\n9 BCABAABC\n8 CAACBBAA\n"),
            Err(DatasetError::LengthMismatch { line: 3, declared: 9, actual: 8 })
        ));
        assert!(matches!(
            parse_plain("2 3\nABC\n8 BCABAABD\n8 CAACBBAA\n"),
            Err(DatasetError::AlphabetViolation { line: 3, symbol: 'D' })
        ));
        assert!(matches!(parse_plain("2 3\nABC\n8 BCABAABC\n"), Err(DatasetError::Parse { .. })));
        assert!(matches!(parse_plain("2 4\nABC\n"), Err(DatasetError::Parse { line: 2, .. })));
        assert!(matches!(
            parse_plain("1 3\nABC\n3 ABC\n"),
            Err(DatasetError::Instance(InstanceError::TooFewStrings(1)))
        ));
    }

    #[test]
    fn fasta_records() {
        let text = ">seq one\nACGT\n>seq two\naa\ncg\n";
        let (headers, seqs) = parse_fasta(text, b"ACGT", None).unwrap();
        assert_eq!(headers, vec!["seq one", "seq two"]);
        assert_eq!(seqs, vec![b"ACGT".to_vec(), b"AACG".to_vec()]);

        let bad = parse_fasta(">ok\nACGT\n>broken\nACNT\n", b"ACGT", None).unwrap_err();
        assert!(matches!(bad, DatasetError::RecordViolation { ref header, symbol: 'N' } if header == "broken"));

        let (_, short) = parse_fasta(text, b"ACGT", Some(2)).unwrap();
        assert_eq!(short, vec![b"AC".to_vec(), b"AA".to_vec()]);
        assert!(parse_fasta("ACGT\n", b"ACGT", None).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let (a, _) = gen_uncorrelated(4, 10, 600, 1).unwrap();
        let (b, _) = gen_uncorrelated(4, 10, 600, 1).unwrap();
        assert_eq!(to_plain(&a), to_plain(&b));
        let (c, _) = gen_uncorrelated(4, 10, 600, 2).unwrap();
        assert_ne!(to_plain(&a), to_plain(&c));
        let (d, _) = gen_correlated(4, 5, 100, 0.2, 9).unwrap();
        let (e, _) = gen_correlated(4, 5, 100, 0.2, 9).unwrap();
        assert_eq!(to_plain(&d), to_plain(&e));
    }

    #[test]
    fn degenerate_generator_output() {
        let (inst, desc) = gen_uncorrelated(4, 2, 0, 5).unwrap();
        assert_eq!(inst.max_len(), 0);
        assert_eq!(desc.lengths, vec![0, 0]);
    }

    #[test]
    fn zero_mutation_copies_base() {
        let (inst, desc) = gen_correlated(2, 6, 50, 0.0, 3).unwrap();
        let strings = inst.raw_strings();
        assert!(strings.iter().all(|s| s == &strings[0]));
        assert_eq!(desc.family, Family::Correlated);
        assert!(gen_correlated(2, 6, 50, 1.5, 3).is_err());
    }

    #[test]
    fn family_selects_k_rule() {
        assert_eq!(Family::Correlated.default_k_heuristic(), HeuristicKind::ProbKAnalyticCorr);
        assert_eq!(Family::Uncorrelated.default_k_heuristic(), HeuristicKind::ProbKAnalyticUncorr);
        assert_eq!(Family::Unknown.default_k_heuristic(), HeuristicKind::ProbKAnalyticUncorr);
    }

    #[test]
    fn generated_alphabets() {
        assert_eq!(default_alphabet(4).unwrap(), b"ACGT");
        assert_eq!(default_alphabet(20).unwrap().len(), 20);
        assert_eq!(default_alphabet(2).unwrap(), b"AB");
        assert!(default_alphabet(0).is_err());
        assert!(default_alphabet(63).is_err());
    }
}
