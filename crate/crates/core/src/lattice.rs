//! The `{0,1,*}^M` subgroup lattice.
//!
//! Every intersectional subgroup is a vector of trits. A `Zero`/`One` entry
//! fixes the attribute, a `Star` leaves it free. Specs are addressed densely
//! by their base-3 value (`Zero→0`, `One→1`, `Star→2`, attribute 0 is the most
//! significant digit), so a full table over the lattice is a flat array of
//! length `3^M`.
//!
//! Replacing a star by `0` or `1` strictly lowers the base-3 value, so
//! ascending index order visits every hypercube after both halves of each of
//! its splits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Absolute upper bound on the attribute count; `3^20` still fits a `usize` index.
pub const HARD_MAX_M: usize = 20;
/// Default capacity guard. A full table at `M = 16` already holds 43M entries per array.
pub const DEFAULT_MAX_M: usize = 16;
/// Environment variable overriding [`DEFAULT_MAX_M`].
pub const MAX_M_ENV: &str = "FAIRLATTICE_MAX_M";

/// Attribute-count guard in effect, honouring `FAIRLATTICE_MAX_M`.
pub fn max_m() -> usize {
    std::env::var(MAX_M_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(HARD_MAX_M))
        .unwrap_or(DEFAULT_MAX_M)
}

pub fn check_capacity(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Config("the lattice needs at least one attribute".into()));
    }
    let limit = max_m();
    if m > limit {
        return Err(Error::Capacity(format!(
            "{m} attributes need 3^{m} table entries; the limit is {limit} (set {MAX_M_ENV} to raise it, at most {HARD_MAX_M})"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Trit {
    Zero,
    One,
    Star,
}

impl Trit {
    pub fn digit(self) -> usize {
        match self {
            Trit::Zero => 0,
            Trit::One => 1,
            Trit::Star => 2,
        }
    }

    pub fn from_digit(d: usize) -> Option<Trit> {
        match d {
            0 => Some(Trit::Zero),
            1 => Some(Trit::One),
            2 => Some(Trit::Star),
            _ => None,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Trit> {
        Trit::from_digit(bit as usize).filter(|t| *t != Trit::Star)
    }

    fn symbol(self) -> char {
        match self {
            Trit::Zero => '0',
            Trit::One => '1',
            Trit::Star => '*',
        }
    }
}

/// A hypercube of the lattice, i.e. one intersectional subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupSpec {
    codes: Vec<Trit>,
}

impl SubgroupSpec {
    pub fn new(codes: Vec<Trit>) -> Self {
        SubgroupSpec { codes }
    }

    /// The vertex holding rows with exactly these attribute values.
    pub fn vertex(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| Trit::from_bit(b).ok_or_else(|| Error::InvalidSpec(format!("{bits:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(SubgroupSpec::new)
    }

    /// The main hypercube: every attribute free.
    pub fn main(m: usize) -> Self {
        SubgroupSpec {
            codes: vec![Trit::Star; m],
        }
    }

    pub fn m(&self) -> usize {
        self.codes.len()
    }

    pub fn codes(&self) -> &[Trit] {
        &self.codes
    }

    pub fn level(&self) -> usize {
        self.codes.iter().filter(|t| **t == Trit::Star).count()
    }

    pub fn is_vertex(&self) -> bool {
        self.level() == 0
    }

    pub fn star_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.codes
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == Trit::Star)
            .map(|(i, _)| i)
    }

    /// Lowest position holding a star, `None` for a vertex.
    pub fn first_star(&self) -> Option<usize> {
        self.star_positions().next()
    }

    /// Resolve the star at `position` into its `0` and `1` halves.
    pub fn split(&self, position: usize) -> Result<(SubgroupSpec, SubgroupSpec)> {
        if self.codes.get(position) != Some(&Trit::Star) {
            return Err(Error::InvalidSplit {
                spec: self.to_string(),
                position,
            });
        }
        let mut zero = self.clone();
        let mut one = self.clone();
        zero.codes[position] = Trit::Zero;
        one.codes[position] = Trit::One;
        Ok((zero, one))
    }

    /// Whether a row with these attribute values belongs to the subgroup.
    pub fn contains(&self, attrs: &[u8]) -> bool {
        self.codes.len() == attrs.len()
            && self
                .codes
                .iter()
                .zip(attrs)
                .all(|(t, &a)| *t == Trit::Star || t.digit() == a as usize)
    }

    pub fn index(&self) -> LatticeIndex {
        LatticeIndex::encode(self)
    }

    pub fn from_index(m: usize, index: LatticeIndex) -> Result<Self> {
        index.decode(m)
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, t) in self.codes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", t.symbol())?;
        }
        f.write_str(")")
    }
}

impl FromStr for SubgroupSpec {
    type Err = Error;

    /// Accepts `(0,*,1)` as well as the compact `0*1`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let codes = inner
            .chars()
            .filter(|c| *c != ',' && !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(Trit::Zero),
                '1' => Ok(Trit::One),
                '*' => Ok(Trit::Star),
                _ => Err(Error::InvalidSpec(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if codes.is_empty() {
            return Err(Error::InvalidSpec(s.to_string()));
        }
        Ok(SubgroupSpec { codes })
    }
}

/// Dense base-3 address of a [`SubgroupSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeIndex(pub usize);

impl LatticeIndex {
    pub fn encode(spec: &SubgroupSpec) -> Self {
        LatticeIndex(spec.codes.iter().fold(0, |acc, t| acc * 3 + t.digit()))
    }

    pub fn decode(self, m: usize) -> Result<SubgroupSpec> {
        if m > HARD_MAX_M || self.0 >= 3usize.pow(m as u32) {
            return Err(Error::InvalidSpec(format!("index {} with {m} attributes", self.0)));
        }
        let mut codes = vec![Trit::Zero; m];
        let mut rest = self.0;
        for slot in codes.iter_mut().rev() {
            *slot = Trit::from_digit(rest % 3).expect("digit below 3");
            rest /= 3;
        }
        Ok(SubgroupSpec { codes })
    }
}

impl From<LatticeIndex> for usize {
    fn from(i: LatticeIndex) -> usize {
        i.0
    }
}

/// Size of the lattice for a given attribute count.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct LatticeShape {
    pub m: usize,
    /// `C(M,K)·2^(M−K)` hypercubes at each level `K`.
    pub h_per_level: Vec<u64>,
    pub h_total: u64,
    /// Edges of the hypercube graph: each level-`K` node links to `2K` nodes one level down.
    pub edge_count: u64,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Hypercubes at level `k` of an `m`-attribute lattice.
pub fn level_size(m: usize, k: usize) -> u64 {
    binomial(m, k) << (m - k.min(m))
}

pub fn shape(m: usize) -> Result<LatticeShape> {
    check_capacity(m)?;
    let h_per_level: Vec<u64> = (0..=m).map(|k| level_size(m, k)).collect();
    let h_total = h_per_level.iter().sum();
    let edge_count = h_per_level
        .iter()
        .enumerate()
        .map(|(k, h)| 2 * k as u64 * h)
        .sum();
    Ok(LatticeShape {
        m,
        h_per_level,
        h_total,
        edge_count,
    })
}

/// All specs at level `k`, in ascending index order.
pub fn enumerate_level(m: usize, k: usize) -> Result<Vec<SubgroupSpec>> {
    let lattice = Lattice::new(m)?;
    lattice
        .level_indices(k)?
        .into_iter()
        .map(|i| LatticeIndex(i).decode(m))
        .collect()
}

/// Addressing helper shared by everything that walks a dense `3^M` table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    m: usize,
    size: usize,
    /// `weights[pos] == 3^(m-1-pos)`.
    weights: Vec<usize>,
}

impl Lattice {
    pub fn new(m: usize) -> Result<Self> {
        check_capacity(m)?;
        let weights = (0..m).map(|pos| 3usize.pow((m - 1 - pos) as u32)).collect();
        Ok(Lattice {
            m,
            size: 3usize.pow(m as u32),
            weights,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of hypercubes, `3^M`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self, position: usize) -> usize {
        self.weights[position]
    }

    pub fn main_index(&self) -> usize {
        self.size - 1
    }

    /// Index of the vertex for one row of binary attribute values.
    #[inline]
    pub fn vertex_index(&self, attrs: &[u8]) -> usize {
        attrs.iter().fold(0, |acc, &a| acc * 3 + a as usize)
    }

    /// Position and digit weight of the first star of `index`, if any.
    #[inline]
    pub fn first_star(&self, index: usize) -> Option<(usize, usize)> {
        self.weights
            .iter()
            .enumerate()
            .find(|(_, &w)| (index / w) % 3 == 2)
            .map(|(pos, &w)| (pos, w))
    }

    pub fn level_of(&self, index: usize) -> usize {
        self.weights.iter().filter(|&&w| (index / w) % 3 == 2).count()
    }

    /// Level of every index, built in one pass from `level[x] = level[x/3] + [x%3 == 2]`.
    pub fn levels(&self) -> Vec<u8> {
        let mut levels = vec![0u8; self.size];
        for x in 1..self.size {
            levels[x] = levels[x / 3] + u8::from(x % 3 == 2);
        }
        levels
    }

    pub fn level_indices(&self, k: usize) -> Result<Vec<usize>> {
        if k > self.m {
            return Err(Error::LevelBounds { m: self.m, k });
        }
        Ok(self
            .levels()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l as usize == k)
            .map(|(i, _)| i)
            .collect())
    }

    /// Indices grouped by level, each group ascending.
    pub fn indices_by_level(&self) -> Vec<Vec<usize>> {
        let mut by_level: Vec<Vec<usize>> = (0..=self.m)
            .map(|k| Vec::with_capacity(level_size(self.m, k) as usize))
            .collect();
        for (i, l) in self.levels().into_iter().enumerate() {
            by_level[l as usize].push(i);
        }
        by_level
    }

    pub fn spec(&self, index: usize) -> SubgroupSpec {
        LatticeIndex(index)
            .decode(self.m)
            .expect("index within lattice")
    }

    pub fn check_spec(&self, spec: &SubgroupSpec) -> Result<usize> {
        if spec.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: spec.m(),
            });
        }
        Ok(spec.index().0)
    }
}
