use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DCAJ";
/// Current binary format version written by [`Adjacency::to_bytes`].
pub const FORMAT_VERSION: u8 = 1;

/// Symmetric 0/1 matrix with zero diagonal, stored as upper-triangular bits.
///
/// Pair `(i, j)` with `i < j` lives at row-major index
/// `i*n - i*(i+1)/2 + (j - i - 1)`; that order is also the bitstring order used
/// for lexicographic comparison and serialization.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Adjacency {
    n: usize,
    words: Vec<u64>,
}

#[inline]
pub fn choose2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; choose2(n).div_ceil(64)],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut a = Self::empty(n);
        let m = choose2(n);
        for (w, word) in a.words.iter_mut().enumerate() {
            let lo = w * 64;
            let hi = (lo + 64).min(m);
            *word = if hi - lo == 64 {
                u64::MAX
            } else {
                (1u64 << (hi - lo)) - 1
            };
        }
        a
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut a = Self::empty(n);
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                if f(i, j) {
                    a.words[idx >> 6] |= 1 << (idx & 63);
                }
                idx += 1;
            }
        }
        a
    }

    /// Builds from the low `choose2(n)` bits of `mask` (bit `k` = pair `k`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(choose2(n) <= 64, "mask form only for n <= 11");
        let mut a = Self::empty(n);
        if let Some(w) = a.words.first_mut() {
            let m = choose2(n);
            *w = if m == 64 {
                mask
            } else {
                mask & ((1u64 << m) - 1)
            };
        }
        a
    }

    /// Low-word bitmask; only meaningful when `choose2(n) <= 64`.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> usize {
        choose2(self.n)
    }

    #[inline]
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i < self.n && j < self.n);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Inverse of [`pair_index`](Self::pair_index).
    pub fn pair_at(&self, mut idx: usize) -> (usize, usize) {
        for i in 0..self.n {
            let row = self.n - i - 1;
            if idx < row {
                return (i, i + 1 + idx);
            }
            idx -= row;
        }
        panic!("pair index out of range");
    }

    #[inline]
    pub fn get_index(&self, idx: usize) -> bool {
        (self.words[idx >> 6] >> (idx & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_index(&mut self, idx: usize, v: bool) {
        if v {
            self.words[idx >> 6] |= 1 << (idx & 63);
        } else {
            self.words[idx >> 6] &= !(1 << (idx & 63));
        }
    }

    /// Entry `(i, j)`; the diagonal is always zero.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        i != j && self.get_index(self.pair_index(i, j))
    }

    /// Sets entry `(i, j)` (and `(j, i)`). Panics on the diagonal.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        assert!(i != j, "diagonal entries are fixed at zero");
        let idx = self.pair_index(i, j);
        self.set_index(idx, v);
    }

    pub fn edge_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `<self, other> = sum_{i<j} self_ij other_ij`.
    pub fn inner(&self, other: &Adjacency) -> usize {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn hamming(&self, other: &Adjacency) -> usize {
        debug_assert_eq!(self.n, other.n);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Edges `(i, j)`, `i < j`, in pair order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| self.get(i, j).then_some((i, j)))
        })
    }

    /// Dense `n * n` row-major 0/1 matrix.
    pub fn to_dense(&self) -> Vec<u8> {
        let n = self.n;
        let mut d = vec![0u8; n * n];
        for (i, j) in self.edges() {
            d[i * n + j] = 1;
            d[j * n + i] = 1;
        }
        d
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Adjacency {
        assert_eq!(perm.len(), self.n);
        let mut out = Adjacency::empty(self.n);
        for (i, j) in self.edges() {
            out.set(perm[i], perm[j], true);
        }
        out
    }

    /// Lexicographic order of the pair-order bitstrings (`'0' < '1'`).
    pub fn cmp_bits(&self, other: &Adjacency) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let x = a ^ b;
            if x != 0 {
                let bit = x.trailing_zeros();
                return if (a >> bit) & 1 == 1 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
        }
        self.words.len().cmp(&other.words.len())
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.pairs())
            .map(|k| if self.get_index(k) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != choose2(n) {
            return Err(Error::Parse(format!(
                "bitstring of length {} does not match n = {n}",
                s.len()
            )));
        }
        let mut a = Self::empty(n);
        for (k, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => a.set_index(k, true),
                _ => return Err(Error::Parse(format!("bad bit character {c:?}"))),
            }
        }
        Ok(a)
    }

    /// Header (`DCAJ`, version byte, `n` as u32 LE) followed by the pair bits,
    /// packed most-significant-bit first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = self.pairs();
        let mut out = Vec::with_capacity(9 + m.div_ceil(8));
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        let mut byte = 0u8;
        for k in 0..m {
            if self.get_index(k) {
                byte |= 0x80 >> (k % 8);
            }
            if k % 8 == 7 {
                out.push(byte);
                byte = 0;
            }
        }
        if m % 8 != 0 {
            out.push(byte);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 || &bytes[..4] != MAGIC {
            return Err(Error::Parse("missing adjacency header".into()));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format version {}",
                bytes[4]
            )));
        }
        let n = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let m = choose2(n);
        let body = &bytes[9..];
        if body.len() != m.div_ceil(8) {
            return Err(Error::Parse(format!(
                "payload has {} bytes, expected {}",
                body.len(),
                m.div_ceil(8)
            )));
        }
        let mut a = Self::empty(n);
        for k in 0..m {
            if body[k / 8] & (0x80 >> (k % 8)) != 0 {
                a.set_index(k, true);
            }
        }
        if m % 8 != 0 && body[m / 8] & (0xFFu8 >> (m % 8)) != 0 {
            return Err(Error::Parse("nonzero padding bits".into()));
        }
        Ok(a)
    }

    /// `# n <n>` followed by one `i j` line per edge, 1-indexed.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# n {}\n", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{} {}", i + 1, j + 1);
        }
        s
    }

    /// Parses edge-list text. `n` comes from the `# n` header when present,
    /// otherwise from the argument.
    pub fn from_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut header_n = None;
        let mut edges = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("n") {
                    let v = it
                        .next()
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| Error::Parse(format!("bad header {line:?}")))?;
                    header_n = Some(v);
                }
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) => edges.push((i, j)),
                _ => return Err(Error::Parse(format!("bad edge line {line:?}"))),
            }
        }
        let n = header_n
            .or(n)
            .ok_or_else(|| Error::Parse("vertex count unknown".into()))?;
        let mut a = Self::empty(n);
        for (i, j) in edges {
            if i == 0 || j == 0 || i > n || j > n || i == j {
                return Err(Error::Parse(format!("edge ({i}, {j}) invalid for n = {n}")));
            }
            a.set(i - 1, j - 1, true);
        }
        Ok(a)
    }
}

impl PartialOrd for Adjacency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Adjacency {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.cmp_bits(other))
    }
}

impl std::fmt::Debug for Adjacency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Adjacency(n={}, {})", self.n, self.to_bitstring())
    }
}
