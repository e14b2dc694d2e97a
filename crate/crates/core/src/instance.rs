//! Problem instance and the string-set machinery the search runs on.
//!
//! Strings are stored as dense symbol codes `0..|Σ|`. For every string and
//! every position `pos ∈ 0..=len` two flat tables are kept:
//! `next_occ[pos][σ]`, the first index `≥ pos` holding `σ`, and
//! `suffix_count[pos][σ]`, the occurrences of `σ` in the suffix from `pos`.

use thiserror::Error;

/// Marks "no further occurrence" in the next-occurrence table.
pub const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("symbol {0:?} appears twice in the alphabet")]
    DuplicateSymbol(char),
    #[error("alphabet has {0} symbols, at most 255 are supported")]
    AlphabetTooLarge(usize),
    #[error("need at least 2 strings, got {0}")]
    TooFewStrings(usize),
    #[error("string {string} position {position}: symbol {symbol:?} is not in the alphabet")]
    UnknownSymbol { string: usize, position: usize, symbol: char },
    #[error("string {0} is longer than 2^32 - 2 symbols")]
    StringTooLong(usize),
}

/// An M-LCS instance with its lookup tables. Immutable once built.
#[derive(Debug, Clone)]
pub struct Instance {
    alphabet: Vec<u8>,
    code_of: [u8; 256],
    strings: Vec<Vec<u8>>,
    next_occ: Vec<Vec<u32>>,
    suffix_count: Vec<Vec<u32>>,
}

const NO_CODE: u8 = u8::MAX;

impl Instance {
    /// Builds the instance in `O(Σ|s_i|·|Σ|)` time and space.
    pub fn new<S: AsRef<[u8]>>(alphabet: &[u8], strings: &[S]) -> Result<Self, InstanceError> {
        if alphabet.is_empty() {
            return Err(InstanceError::EmptyAlphabet);
        }
        if alphabet.len() > 255 {
            return Err(InstanceError::AlphabetTooLarge(alphabet.len()));
        }
        let mut code_of = [NO_CODE; 256];
        for (code, &sym) in alphabet.iter().enumerate() {
            if code_of[sym as usize] != NO_CODE {
                return Err(InstanceError::DuplicateSymbol(sym as char));
            }
            code_of[sym as usize] = code as u8;
        }
        if strings.len() < 2 {
            return Err(InstanceError::TooFewStrings(strings.len()));
        }
        let sigma = alphabet.len();
        let mut coded = Vec::with_capacity(strings.len());
        for (i, s) in strings.iter().enumerate() {
            let s = s.as_ref();
            if s.len() >= NONE as usize {
                return Err(InstanceError::StringTooLong(i));
            }
            let codes = s
                .iter()
                .enumerate()
                .map(|(pos, &b)| match code_of[b as usize] {
                    NO_CODE => Err(InstanceError::UnknownSymbol { string: i, position: pos, symbol: b as char }),
                    c => Ok(c),
                })
                .collect::<Result<Vec<u8>, _>>()?;
            coded.push(codes);
        }

        let mut next_occ = Vec::with_capacity(coded.len());
        let mut suffix_count = Vec::with_capacity(coded.len());
        for s in &coded {
            let len = s.len();
            let mut next = vec![NONE; (len + 1) * sigma];
            let mut count = vec![0u32; (len + 1) * sigma];
            for pos in (0..len).rev() {
                let (row, below) = (pos * sigma, (pos + 1) * sigma);
                next.copy_within(below..below + sigma, row);
                count.copy_within(below..below + sigma, row);
                let c = s[pos] as usize;
                next[row + c] = pos as u32;
                count[row + c] += 1;
            }
            next_occ.push(next);
            suffix_count.push(count);
        }
        Ok(Self { alphabet: alphabet.to_vec(), code_of, strings: coded, next_occ, suffix_count })
    }

    pub fn sigma_size(&self) -> usize {
        self.alphabet.len()
    }

    /// Number of strings `N`.
    pub fn num_strings(&self) -> usize {
        self.strings.len()
    }

    pub fn alphabet(&self) -> &[u8] {
        &self.alphabet
    }

    pub fn string_len(&self, i: usize) -> usize {
        self.strings[i].len()
    }

    pub fn max_len(&self) -> usize {
        self.strings.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_len(&self) -> usize {
        self.strings.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Code of a raw symbol, if it belongs to the alphabet.
    pub fn code(&self, symbol: u8) -> Option<u8> {
        match self.code_of[symbol as usize] {
            NO_CODE => None,
            c => Some(c),
        }
    }

    pub fn symbol(&self, code: u8) -> u8 {
        self.alphabet[code as usize]
    }

    /// The `i`-th string as raw symbols.
    pub fn raw_string(&self, i: usize) -> Vec<u8> {
        self.decode(&self.strings[i])
    }

    pub fn raw_strings(&self) -> Vec<Vec<u8>> {
        (0..self.num_strings()).map(|i| self.raw_string(i)).collect()
    }

    pub fn decode(&self, codes: &[u8]) -> Vec<u8> {
        codes.iter().map(|&c| self.symbol(c)).collect()
    }

    /// First index `≥ pos` of `code` in string `i`, or `None`.
    #[inline]
    pub fn next_occ(&self, i: usize, pos: usize, code: u8) -> Option<usize> {
        match self.next_occ[i][pos * self.sigma_size() + code as usize] {
            NONE => None,
            j => Some(j as usize),
        }
    }

    /// Occurrences of `code` in string `i` from `pos` onwards.
    #[inline]
    pub fn suffix_count(&self, i: usize, pos: usize, code: u8) -> usize {
        self.suffix_count[i][pos * self.sigma_size() + code as usize] as usize
    }

    /// The empty partial solution.
    pub fn root(&self) -> NodeState {
        NodeState {
            cursors: vec![0; self.num_strings()],
            depth: 0,
            last_symbol: None,
            parent: None,
            id: None,
        }
    }

    /// Child reached by appending `code`: every cursor moves just past the
    /// next occurrence of `code`. `None` when some remainder lacks the symbol.
    ///
    /// The parent must be registered in a [`NodeArena`] (or be the root) for
    /// the child's solution to be reconstructible.
    pub fn successor(&self, state: &NodeState, code: u8) -> Option<NodeState> {
        let sigma = self.sigma_size();
        let c = code as usize;
        let mut cursors = Vec::with_capacity(state.cursors.len());
        for (table, &cur) in self.next_occ.iter().zip(&state.cursors) {
            match table[cur as usize * sigma + c] {
                NONE => return None,
                j => cursors.push(j + 1),
            }
        }
        Some(NodeState {
            cursors,
            depth: state.depth + 1,
            last_symbol: Some(code),
            parent: state.id,
            id: None,
        })
    }

    /// `|s_i| − cursor_i` for each string.
    pub fn remaining_lengths(&self, state: &NodeState) -> Vec<usize> {
        self.remaining_iter(state).collect()
    }

    pub(crate) fn remaining_iter<'a>(&'a self, state: &'a NodeState) -> impl Iterator<Item = usize> + Clone + 'a {
        self.strings.iter().zip(&state.cursors).map(|(s, &c)| s.len() - c as usize)
    }

    /// `Σ_σ min_i O_i^(σ)` over the remainders: an upper bound on the
    /// remaining LCS length.
    pub fn upper_bound(&self, state: &NodeState) -> usize {
        let sigma = self.sigma_size();
        let mut mins = vec![u32::MAX; sigma];
        for (table, &cur) in self.suffix_count.iter().zip(&state.cursors) {
            let row = &table[cur as usize * sigma..(cur as usize + 1) * sigma];
            for (m, &v) in mins.iter_mut().zip(row) {
                *m = (*m).min(v);
            }
        }
        mins.iter().map(|&m| m as usize).sum()
    }

    /// Sample mean and sample variance (`N − 1` denominator) of the
    /// remaining lengths.
    pub fn stats(&self, state: &NodeState) -> (f64, f64) {
        mean_and_variance(self.remaining_iter(state))
    }

    /// Partial solution along the parent chain, as raw symbols.
    pub fn reconstruct_solution(&self, arena: &NodeArena, state: &NodeState) -> Vec<u8> {
        self.decode(&arena.codes_for(state))
    }
}

pub(crate) fn mean_and_variance(lengths: impl Iterator<Item = usize> + Clone) -> (f64, f64) {
    let n = lengths.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = lengths.clone().map(|l| l as f64).sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = lengths.map(|l| (l as f64 - mean).powi(2)).sum();
    (mean, ss / (n - 1) as f64)
}

/// Index of a node recorded in a [`NodeArena`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(u32);

/// A search node: one cursor per string plus a link to its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    /// Index into each string of the first symbol of its remainder.
    pub cursors: Vec<u32>,
    pub depth: u32,
    /// Symbol code of the edge that produced this node.
    pub last_symbol: Option<u8>,
    parent: Option<NodeId>,
    id: Option<NodeId>,
}

impl NodeState {
    pub fn id(&self) -> Option<NodeId> {
        self.id
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }
}

#[derive(Debug, Clone, Copy)]
struct Link {
    parent: Option<NodeId>,
    code: u8,
}

/// Parent-pointer storage for the nodes a search keeps, so partial
/// solutions are never copied into children.
#[derive(Debug, Default, Clone)]
pub struct NodeArena {
    links: Vec<Link>,
}

impl NodeArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Records `state` so that its children can link back to it. The root
    /// needs no record. Registering twice is a no-op.
    pub fn register(&mut self, state: &mut NodeState) {
        if state.id.is_some() {
            return;
        }
        if let Some(code) = state.last_symbol {
            let id = NodeId(self.links.len() as u32);
            self.links.push(Link { parent: state.parent, code });
            state.id = Some(id);
        }
    }

    /// Symbol codes from the root to `state`.
    pub fn codes_for(&self, state: &NodeState) -> Vec<u8> {
        let mut out = Vec::with_capacity(state.depth as usize);
        match state.id {
            Some(id) => self.walk(Some(id), &mut out),
            None => {
                if let Some(c) = state.last_symbol {
                    out.push(c);
                }
                self.walk(state.parent, &mut out);
            }
        }
        out.reverse();
        out
    }

    fn walk(&self, mut at: Option<NodeId>, out: &mut Vec<u8>) {
        while let Some(NodeId(i)) = at {
            let link = self.links[i as usize];
            out.push(link.code);
            at = link.parent;
        }
    }
}
