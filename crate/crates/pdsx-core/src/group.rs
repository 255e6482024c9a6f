//! Group carriers for pattern spaces: free groups with word-length
//! truncation and explicit finite groups, behind one interface.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::words::ReducedWord;
use crate::PdsxError;

/// What pattern enumeration needs from a group: exact arithmetic plus a
/// length function driving ball truncation. Finite groups have length
/// zero everywhere, which makes every pattern exact.
pub trait PatternGroup: Clone + Send + Sync {
    type Elem: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn invert(&self, a: &Self::Elem) -> Self::Elem;
    fn length(&self, a: &Self::Elem) -> u32;
    /// All elements of length at most `radius`, in a fixed order.
    fn ball(&self, radius: u32) -> Vec<Self::Elem>;
    fn render(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem, PdsxError>;

    /// Splits off a length-one head with no cancellation, when the group
    /// carries word structure: t = head · rest with |t| = 1 + |rest|.
    fn geodesic_split(&self, _t: &Self::Elem) -> Option<(Self::Elem, Self::Elem)> {
        None
    }
}

/// The free group F_n under word length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreeGroup {
    pub rank: u32,
}

impl FreeGroup {
    pub fn new(rank: u32) -> Self {
        FreeGroup { rank }
    }

    pub fn generator(&self, i: u32) -> ReducedWord {
        ReducedWord::generator(self.rank, i).expect("generator index in range")
    }
}

impl PatternGroup for FreeGroup {
    type Elem = ReducedWord;

    fn identity(&self) -> ReducedWord {
        ReducedWord::identity(self.rank)
    }

    fn multiply(&self, a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
        a.concat(b).expect("rank-consistent words")
    }

    fn invert(&self, a: &ReducedWord) -> ReducedWord {
        a.inverse()
    }

    fn length(&self, a: &ReducedWord) -> u32 {
        a.len() as u32
    }

    fn ball(&self, radius: u32) -> Vec<ReducedWord> {
        crate::words::ball(self.rank, radius)
    }

    fn render(&self, a: &ReducedWord) -> String {
        a.render()
    }

    fn parse_elem(&self, s: &str) -> Result<ReducedWord, PdsxError> {
        ReducedWord::parse(self.rank, s)
    }

    fn geodesic_split(&self, t: &ReducedWord) -> Option<(ReducedWord, ReducedWord)> {
        let letters = t.letters();
        if letters.len() < 2 {
            return None;
        }
        let head = ReducedWord::reduce(self.rank, &letters[..1]).expect("letter in range");
        let rest = ReducedWord::reduce(self.rank, &letters[1..]).expect("letters in range");
        Some((head, rest))
    }
}

/// An explicit finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    elements: Vec<String>,
    table: Vec<Vec<String>>,
}

impl FiniteGroup {
    /// Validates closure, identity, inverses and associativity.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, PdsxError> {
        let n = names.len();
        if n == 0 {
            return Err(PdsxError::Semantic("empty group table".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(PdsxError::Semantic("multiplication table is not square".into()));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(PdsxError::Semantic("table entry out of range".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| PdsxError::Semantic("table has no identity element".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for x in 0..n {
            inverse[x] = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| {
                    PdsxError::Semantic(format!("element {} has no inverse", names[x]))
                })?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(PdsxError::Semantic("table is not associative".into()));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            names,
            table,
            inverse,
            identity,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, PdsxError> {
        let file: TableFile = serde_json::from_value(v.clone())
            .map_err(|e| PdsxError::Parse(format!("bad group table: {e}")))?;
        let index: BTreeMap<&str, usize> = file
            .elements
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if index.len() != file.elements.len() {
            return Err(PdsxError::Parse("duplicate element names".into()));
        }
        let table = file
            .table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|name| {
                        index
                            .get(name.as_str())
                            .copied()
                            .ok_or_else(|| PdsxError::Parse(format!("unknown element `{name}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_table(file.elements, table)
    }

    pub fn cyclic(m: usize) -> Self {
        let names = (0..m).map(|i| format!("r{i}")).collect();
        let table = (0..m)
            .map(|i| (0..m).map(|j| (i + j) % m).collect())
            .collect();
        Self::from_table(names, table).expect("cyclic table is a group")
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let na = a.order();
        let nb = b.order();
        let names = (0..na * nb)
            .map(|k| format!("{}|{}", a.names[k / nb], b.names[k % nb]))
            .collect();
        let table = (0..na * nb)
            .map(|x| {
                (0..na * nb)
                    .map(|y| {
                        let (xa, xb) = (x / nb, x % nb);
                        let (ya, yb) = (y / nb, y % nb);
                        a.table[xa][ya] * nb + b.table[xb][yb]
                    })
                    .collect()
            })
            .collect();
        Self::from_table(names, table).expect("product table is a group")
    }

    /// The symmetric group on three points.
    pub fn symmetric_3() -> Self {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 2, 0],
            [2, 0, 1],
            [1, 0, 2],
            [0, 2, 1],
            [2, 1, 0],
        ];
        let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
        let names = (0..6).map(|i| format!("s{i}")).collect();
        let table = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| {
                        let pq = compose(p, q);
                        perms.iter().position(|r| *r == pq).unwrap()
                    })
                    .collect()
            })
            .collect();
        Self::from_table(names, table).expect("S3 table is a group")
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order()
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TableFile {
            elements: self.names.clone(),
            table: self
                .table
                .iter()
                .map(|row| row.iter().map(|&x| self.names[x].clone()).collect())
                .collect(),
        })
        .expect("table serializes")
    }
}

impl PatternGroup for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity
    }

    fn multiply(&self, a: &usize, b: &usize) -> usize {
        self.table[*a][*b]
    }

    fn invert(&self, a: &usize) -> usize {
        self.inverse[*a]
    }

    fn length(&self, _a: &usize) -> u32 {
        0
    }

    fn ball(&self, _radius: u32) -> Vec<usize> {
        (0..self.order()).collect()
    }

    fn render(&self, a: &usize) -> String {
        self.names[*a].clone()
    }

    fn parse_elem(&self, s: &str) -> Result<usize, PdsxError> {
        self.names
            .iter()
            .position(|n| n == s)
            .ok_or_else(|| PdsxError::Parse(format!("unknown element `{s}`")))
    }
}
