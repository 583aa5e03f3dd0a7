//! Freely reduced words over a finite symmetric generating set, step
//! distributions for random walks, exact convolution powers, and Shannon
//! entropy in nats.
//!
//! Words are spelled with ASCII letters: `a`..`z` are generators 1..26 and
//! `A`..`Z` their inverses. The empty word displays as `ε` and is accepted on
//! input as either `ε` or the empty string.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stats::KahanSum;

/// Largest supported number of free generators (one per ASCII letter).
pub const MAX_GENERATORS: u8 = 26;

/// One letter of the symmetric alphabet: generator `g` (1-based) with a sign.
/// Packed into a single signed byte: `+g` for the generator, `-g` for its
/// inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i8);

impl Letter {
    pub fn new(generator: u8, positive: bool) -> Self {
        assert!(
            generator >= 1 && generator <= MAX_GENERATORS,
            "generator index {generator} out of range"
        );
        Letter(if positive {
            generator as i8
        } else {
            -(generator as i8)
        })
    }

    /// 1-based generator index, sign stripped.
    pub fn generator(self) -> u8 {
        self.0.unsigned_abs()
    }

    /// Signed byte encoding: `+g` for a generator, `-g` for its inverse.
    /// Stable across platforms; used by deterministic hashing.
    pub fn code(self) -> i8 {
        self.0
    }

    /// Inverse of [`Letter::code`].
    pub fn from_code(code: i8) -> Self {
        assert!(
            code != 0 && code.unsigned_abs() <= MAX_GENERATORS,
            "letter code {code} out of range"
        );
        Letter(code)
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'a'..='z' => Ok(Letter(c as i8 - 'a' as i8 + 1)),
            'A'..='Z' => Ok(Letter(-(c as i8 - 'A' as i8 + 1))),
            _ => Err(Error::Config(format!("invalid word letter {c:?}"))),
        }
    }

    pub fn to_char(self) -> char {
        if self.0 > 0 {
            (b'a' + (self.0 as u8 - 1)) as char
        } else {
            (b'A' + ((-self.0) as u8 - 1)) as char
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A freely reduced word. The reduction invariant (no adjacent `x x⁻¹`) is
/// maintained by construction; all edits happen at the tail, so appending and
/// popping are O(1).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = Self::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Appends a letter, cancelling it against the tail if it is the tail's
    /// inverse. Keeps the word freely reduced.
    pub fn push(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.letters.pop()
    }

    /// First `n` letters as a word (a prefix of a reduced word is reduced).
    pub fn prefix(&self, n: usize) -> ReducedWord {
        ReducedWord {
            letters: self.letters[..n.min(self.letters.len())].to_vec(),
        }
    }

    pub fn invert(&self) -> ReducedWord {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Largest generator index used, or 0 for the empty word.
    pub fn max_generator(&self) -> u8 {
        self.letters.iter().map(|l| l.generator()).max().unwrap_or(0)
    }
}

/// Freely reduced product. The result length is at most `|w1| + |w2|`.
pub fn multiply(w1: &ReducedWord, w2: &ReducedWord) -> ReducedWord {
    let mut out = w1.clone();
    for &l in w2.letters() {
        out.push(l);
    }
    out
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "ε");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    /// Parses a word; whitespace is ignored, `ε` (or nothing) is the empty
    /// word. The input need not be reduced — it is reduced on the fly.
    fn from_str(s: &str) -> Result<Self> {
        let mut w = ReducedWord::empty();
        for c in s.chars() {
            if c.is_whitespace() || c == 'ε' {
                continue;
            }
            w.push(Letter::from_char(c)?);
        }
        Ok(w)
    }
}

/// Length-lexicographic order: by length first, then letter codes. Gives the
/// deterministic vertex order used by all exports.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A finitely supported step distribution on reduced words of `F_k`.
/// Atom probabilities are strictly positive and sum to 1 within `1e-12`.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    k: u8,
    atoms: Vec<(ReducedWord, f64)>,
    cumulative: Vec<f64>,
}

impl StepDistribution {
    pub fn new(k: u8, atoms: Vec<(ReducedWord, f64)>) -> Result<Self> {
        if k == 0 || k > MAX_GENERATORS {
            return Err(Error::Config(format!("generator count {k} out of range")));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let mut seen = HashMap::new();
        let mut sum = KahanSum::new();
        for (w, p) in &atoms {
            if w.max_generator() > k {
                return Err(Error::Config(format!(
                    "atom {w} uses generator {} beyond k={k}",
                    w.max_generator()
                )));
            }
            if !p.is_finite() || *p <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "atom {w} has non-positive probability {p}"
                )));
            }
            if seen.insert(w.clone(), ()).is_some() {
                return Err(Error::InvalidDistribution(format!("duplicate atom {w}")));
            }
            sum.add(*p);
        }
        if (sum.value() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "atom probabilities sum to {} (must be 1 within 1e-12)",
                sum.value()
            )));
        }
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = KahanSum::new();
        for (_, p) in &atoms {
            acc.add(*p);
            cumulative.push(acc.value());
        }
        // Guard the last cell so a draw of u ~ 1.0 always lands inside.
        *cumulative.last_mut().unwrap() = f64::INFINITY;
        Ok(Self { k, atoms, cumulative })
    }

    /// Simple random walk: uniform on the 2k single-letter words, ordered
    /// `a, A, b, B, …`.
    pub fn srw(k: u8) -> Result<Self> {
        if k == 0 || k > MAX_GENERATORS {
            return Err(Error::Config(format!("generator count {k} out of range")));
        }
        let p = 1.0 / (2 * k as usize) as f64;
        let mut atoms = Vec::with_capacity(2 * k as usize);
        for g in 1..=k {
            for positive in [true, false] {
                atoms.push((
                    ReducedWord::from_letters([Letter::new(g, positive)]),
                    p,
                ));
            }
        }
        Self::new(k, atoms)
    }

    /// Point mass on one word.
    pub fn point_mass(k: u8, w: ReducedWord) -> Result<Self> {
        Self::new(k, vec![(w, 1.0)])
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn atoms(&self) -> &[(ReducedWord, f64)] {
        &self.atoms
    }

    pub fn max_atom_len(&self) -> usize {
        self.atoms.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// The reflected distribution `w ↦ w⁻¹` (time reversal of the walk).
    pub fn reflected(&self) -> StepDistribution {
        let atoms = self
            .atoms
            .iter()
            .map(|(w, p)| (w.invert(), *p))
            .collect();
        StepDistribution::new(self.k, atoms).expect("reflection preserves validity")
    }

    /// Draws one step. Inverse-CDF over the atom order, so draws are
    /// reproducible for a fixed RNG stream.
    pub fn sample<'a>(&'a self, rng: &mut impl Rng) -> &'a ReducedWord {
        let u: f64 = rng.gen();
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.atoms.len() - 1);
        &self.atoms[i].0
    }
}

/// A named RNG stream: `seed` selects the experiment, `stream_id` the
/// independent substream. Two streams with the same seed and different ids
/// never overlap; results are independent of evaluation order and thread
/// count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream with the same seed and an id offset; used to hand each work
    /// item (replica, cover sample, walker) its own substream.
    pub fn offset(&self, i: u64) -> Self {
        Self::new(self.seed, self.stream_id.wrapping_add(i))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Exact distribution of the n-fold convolution power of `dist` as a sorted
/// `(word, probability)` list. `budget_bytes` caps the working-set estimate;
/// exceeding it returns [`Error::BudgetExceeded`], signalling the caller to
/// fall back to Monte Carlo.
pub fn exact_convolution(
    dist: &StepDistribution,
    n: u32,
    budget_bytes: Option<u64>,
) -> Result<Vec<(ReducedWord, f64)>> {
    let mut cur: HashMap<ReducedWord, f64> = HashMap::new();
    cur.insert(ReducedWord::empty(), 1.0);
    for step in 0..n {
        let mut next: HashMap<ReducedWord, f64> =
            HashMap::with_capacity(cur.len() * dist.atoms.len());
        for (w, p) in &cur {
            for (u, q) in &dist.atoms {
                *next.entry(multiply(w, u)).or_insert(0.0) += p * q;
            }
        }
        if let Some(budget) = budget_bytes {
            let bytes: u64 = next
                .iter()
                .map(|(w, _)| 64 + w.len() as u64)
                .sum();
            if bytes > budget {
                return Err(Error::BudgetExceeded {
                    context: "exact_convolution",
                    needed_mb: bytes >> 20,
                    budget_mb: budget >> 20,
                });
            }
        }
        let _ = step;
        cur = next;
    }
    let mut out: Vec<(ReducedWord, f64)> = cur.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Shannon entropy in nats of a nonnegative mass vector, with `0·log 0 = 0`.
/// Compensated summation; negative masses are rejected.
pub fn shannon_entropy(masses: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut acc = KahanSum::new();
    for p in masses {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "mass {p} is negative or non-finite"
            )));
        }
        if p > 0.0 {
            acc.add(-p * p.ln());
        }
    }
    Ok(acc.value())
}
