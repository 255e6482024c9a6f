//! Cuntz-Krieger combinatorics for a {0,1} matrix with no zero rows:
//! admissible paths and circuits, condition (I), the induced partial
//! action of the free group on cylinder sets, fixed-point analysis,
//! topological freeness and a simplicity verdict, plus the dictionary
//! between ball patterns and admissible path prefixes.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::group::FreeGroup;
use crate::spectrum::{BallPattern, RelationPoly};
use crate::words::{ball, ReducedWord};
use crate::PdsxError;

/// An n×n matrix over {0,1} with no zero rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CkMatrix {
    n: usize,
    a: Vec<Vec<u8>>,
}

impl CkMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self, PdsxError> {
        let n = rows.len();
        if n == 0 {
            return Err(PdsxError::Semantic("matrix must be nonempty".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(PdsxError::Semantic("matrix must be square".into()));
        }
        if let Some((i, _)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.iter().any(|&x| x > 1))
        {
            return Err(PdsxError::Semantic(format!(
                "row {} has an entry outside {{0,1}}",
                i + 1
            )));
        }
        if let Some((i, _)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.iter().all(|&x| x == 0))
        {
            return Err(PdsxError::Semantic(format!(
                "row {} is zero; no zero rows allowed",
                i + 1
            )));
        }
        Ok(CkMatrix { n, a: rows })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Entry a_{ij} with 1-based letters.
    pub fn entry(&self, i: u32, j: u32) -> bool {
        self.a[(i - 1) as usize][(j - 1) as usize] == 1
    }

    pub fn row_sum(&self, i: u32) -> usize {
        self.a[(i - 1) as usize].iter().map(|&x| x as usize).sum()
    }

    /// Unique successor of a row-sum-one letter.
    fn sole_successor(&self, i: u32) -> Option<u32> {
        if self.row_sum(i) != 1 {
            return None;
        }
        self.a[(i - 1) as usize]
            .iter()
            .position(|&x| x == 1)
            .map(|j| (j + 1) as u32)
    }

    pub fn is_permutation(&self) -> bool {
        let col_ok = (1..=self.n as u32)
            .all(|j| (1..=self.n as u32).filter(|&i| self.entry(i, j)).count() == 1);
        (1..=self.n as u32).all(|i| self.row_sum(i) == 1) && col_ok
    }

    /// Strong connectivity of the letter digraph (edges i→j iff a_{ij}=1).
    pub fn is_irreducible(&self) -> bool {
        if self.n == 1 {
            return self.a[0][0] == 1;
        }
        let reaches_all = |start: usize, transpose: bool| {
            let mut seen = vec![false; self.n];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for w in 0..self.n {
                    let edge = if transpose {
                        self.a[w][v] == 1
                    } else {
                        self.a[v][w] == 1
                    };
                    if edge && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reaches_all(0, false) && reaches_all(0, true)
    }

    /// Strongly connected components of the letter digraph (Tarjan),
    /// letters 1-based, components in discovery order.
    pub fn strongly_connected_components(&self) -> Vec<Vec<u32>> {
        struct State {
            index: usize,
            indices: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            comps: Vec<Vec<u32>>,
        }
        fn strongconnect(v: usize, a: &[Vec<u8>], st: &mut State) {
            st.indices[v] = Some(st.index);
            st.low[v] = st.index;
            st.index += 1;
            st.stack.push(v);
            st.on_stack[v] = true;
            for w in 0..a.len() {
                if a[v][w] == 1 {
                    if st.indices[w].is_none() {
                        strongconnect(w, a, st);
                        st.low[v] = st.low[v].min(st.low[w]);
                    } else if st.on_stack[w] {
                        st.low[v] = st.low[v].min(st.indices[w].unwrap());
                    }
                }
            }
            if st.low[v] == st.indices[v].unwrap() {
                let mut comp = Vec::new();
                loop {
                    let w = st.stack.pop().unwrap();
                    st.on_stack[w] = false;
                    comp.push((w + 1) as u32);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                st.comps.push(comp);
            }
        }
        let mut st = State {
            index: 0,
            indices: vec![None; self.n],
            low: vec![0; self.n],
            on_stack: vec![false; self.n],
            stack: Vec::new(),
            comps: Vec::new(),
        };
        for v in 0..self.n {
            if st.indices[v].is_none() {
                strongconnect(v, &self.a, &mut st);
            }
        }
        st.comps
    }

    pub fn from_json(v: &Value) -> Result<Self, PdsxError> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| PdsxError::Parse("matrix file needs a numeric `n`".into()))?
            as usize;
        let rows = v
            .get("a")
            .and_then(Value::as_array)
            .ok_or_else(|| PdsxError::Parse("matrix file needs an `a` array".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| PdsxError::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .filter(|&b| b <= 1)
                            .map(|b| b as u8)
                            .ok_or_else(|| PdsxError::Parse("entries must be 0 or 1".into()))
                    })
                    .collect::<Result<Vec<u8>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if rows.len() != n {
            return Err(PdsxError::Parse(format!(
                "declared n = {n} but {} rows given",
                rows.len()
            )));
        }
        Self::new(rows)
    }

    /// Parses a plain text file of 0/1 rows, whitespace optional.
    pub fn from_text(text: &str) -> Result<Self, PdsxError> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(PdsxError::Parse(format!("unexpected character `{c}`"))),
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        if rows.is_empty() {
            return Err(PdsxError::Parse("no rows in matrix text".into()));
        }
        Self::new(rows)
    }

    pub fn to_json(&self) -> Value {
        json!({ "n": self.n, "a": self.a })
    }

    /// DOT digraph with edge i→j iff a_{ij}=1; letters and edges lying on
    /// terminal circuits are highlighted.
    pub fn to_dot(&self) -> String {
        let mut hot_nodes: BTreeSet<u32> = BTreeSet::new();
        let mut hot_edges: BTreeSet<(u32, u32)> = BTreeSet::new();
        for c in simple_circuits(self) {
            if is_terminal(&c, self).unwrap_or(false) {
                let l = c.letters();
                for (k, &v) in l.iter().enumerate() {
                    hot_nodes.insert(v);
                    hot_edges.insert((v, l[(k + 1) % l.len()]));
                }
            }
        }
        let mut out = String::from("digraph ck {\n  rankdir=LR;\n");
        for v in 1..=self.n as u32 {
            if hot_nodes.contains(&v) {
                out.push_str(&format!(
                    "  {v} [style=filled, fillcolor=\"#ffd0d0\", color=red];\n"
                ));
            } else {
                out.push_str(&format!("  {v};\n"));
            }
        }
        for i in 1..=self.n as u32 {
            for j in 1..=self.n as u32 {
                if self.entry(i, j) {
                    if hot_edges.contains(&(i, j)) {
                        out.push_str(&format!(
                            "  {i} -> {j} [color=red, penwidth=2.0, label=\"terminal\"];\n"
                        ));
                    } else {
                        out.push_str(&format!("  {i} -> {j};\n"));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A finite admissible letter sequence, 1-based letters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PathPrefix {
    letters: Vec<u32>,
}

impl PathPrefix {
    pub fn new(a: &CkMatrix, letters: Vec<u32>) -> Result<Self, PdsxError> {
        if letters.iter().any(|&x| x == 0 || x as usize > a.size()) {
            return Err(PdsxError::Semantic("letter out of range".into()));
        }
        if let Some(w) = letters.windows(2).find(|w| !a.entry(w[0], w[1])) {
            return Err(PdsxError::Semantic(format!(
                "inadmissible step {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(PathPrefix { letters })
    }

    pub fn empty() -> Self {
        PathPrefix { letters: Vec::new() }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The prefix as a positive reduced word of F_n.
    pub fn to_word(&self, rank: u32) -> ReducedWord {
        let letters: Vec<i32> = self.letters.iter().map(|&x| x as i32).collect();
        ReducedWord::reduce(rank, &letters).expect("positive letters are reduced")
    }

    /// True when this is a circuit: nonempty and the doubled word is
    /// admissible (consecutive steps plus the wrap-around step).
    pub fn is_circuit(&self, a: &CkMatrix) -> bool {
        !self.letters.is_empty()
            && self.letters.windows(2).all(|w| a.entry(w[0], w[1]))
            && a.entry(*self.letters.last().unwrap(), self.letters[0])
    }
}

impl fmt::Display for PathPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        if self.letters.iter().all(|&x| x <= 9) {
            for x in &self.letters {
                write!(f, "{x}")?;
            }
            Ok(())
        } else {
            write!(
                f,
                "{}",
                self.letters
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(".")
            )
        }
    }
}

/// The cylinder of all infinite admissible paths extending a prefix.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Cylinder {
    pub prefix: PathPrefix,
}

impl Cylinder {
    pub fn whole_space() -> Self {
        Cylinder {
            prefix: PathPrefix::empty(),
        }
    }
}

/// An infinite path of the form head · cycle · cycle · …, in canonical
/// form: the cycle is nonempty, doubling it is admissible, the junction is
/// admissible, and the head does not end with the cycle's last letter.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EventuallyPeriodicPath {
    head: PathPrefix,
    cycle: PathPrefix,
}

impl EventuallyPeriodicPath {
    pub fn new(a: &CkMatrix, head: PathPrefix, cycle: PathPrefix) -> Result<Self, PdsxError> {
        if !cycle.is_circuit(a) {
            return Err(PdsxError::Semantic("cycle is not an admissible circuit".into()));
        }
        if let Some(&last) = head.letters().last() {
            if !a.entry(last, cycle.letters()[0]) {
                return Err(PdsxError::Semantic("head-cycle junction inadmissible".into()));
            }
            if last == *cycle.letters().last().unwrap() {
                return Err(PdsxError::Semantic(
                    "not canonical: head ends with the cycle's last letter".into(),
                ));
            }
        }
        // head admissibility is part of PathPrefix's invariant
        Ok(EventuallyPeriodicPath { head, cycle })
    }

    pub fn head(&self) -> &PathPrefix {
        &self.head
    }

    pub fn cycle(&self) -> &PathPrefix {
        &self.cycle
    }

    /// The first `len` letters of the unrolled path.
    pub fn unroll(&self, len: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(len);
        out.extend_from_slice(self.head.letters());
        while out.len() < len {
            out.extend_from_slice(self.cycle.letters());
        }
        out.truncate(len);
        out
    }
}

impl fmt::Display for EventuallyPeriodicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.head.is_empty() {
            write!(f, "({})^inf", self.cycle)
        } else {
            write!(f, "{}.({})^inf", self.head, self.cycle)
        }
    }
}

/// Number of admissible prefixes of the given length, without
/// materializing them.
pub fn admissible_prefix_count(a: &CkMatrix, len: usize) -> u64 {
    let n = a.size();
    let mut per_letter = vec![1u64; n];
    for _ in 1..=len.saturating_sub(1) {
        let mut next = vec![0u64; n];
        for (i, slot) in next.iter_mut().enumerate() {
            for j in 0..n {
                if a.a[i][j] == 1 {
                    *slot = slot.saturating_add(per_letter[j]);
                }
            }
        }
        per_letter = next;
    }
    if len == 0 {
        1
    } else {
        per_letter.iter().fold(0u64, |acc, &v| acc.saturating_add(v))
    }
}

/// All admissible prefixes of exactly the given length, ordered.
pub fn admissible_prefixes(a: &CkMatrix, len: usize) -> Vec<PathPrefix> {
    let mut layer = vec![PathPrefix::empty()];
    for _ in 0..len {
        let mut next = Vec::new();
        for p in &layer {
            for j in 1..=a.size() as u32 {
                let ok = match p.letters().last() {
                    None => true,
                    Some(&last) => a.entry(last, j),
                };
                if ok {
                    let mut letters = p.letters().to_vec();
                    letters.push(j);
                    next.push(PathPrefix { letters });
                }
            }
        }
        layer = next;
    }
    layer
}

/// All admissible circuits visiting no letter twice, each rotation listed
/// from its own starting letter, in lexicographic order.
pub fn simple_circuits(a: &CkMatrix) -> Vec<PathPrefix> {
    let n = a.size() as u32;
    let mut out = Vec::new();
    for start in 1..=n {
        let mut path = vec![start];
        let mut used = vec![false; n as usize + 1];
        used[start as usize] = true;
        dfs_circuits(a, start, &mut path, &mut used, &mut out);
    }
    out.sort();
    out
}

fn dfs_circuits(
    a: &CkMatrix,
    start: u32,
    path: &mut Vec<u32>,
    used: &mut Vec<bool>,
    out: &mut Vec<PathPrefix>,
) {
    let last = *path.last().unwrap();
    if a.entry(last, start) {
        out.push(PathPrefix {
            letters: path.clone(),
        });
    }
    for j in 1..=a.size() as u32 {
        if !used[j as usize] && a.entry(last, j) {
            used[j as usize] = true;
            path.push(j);
            dfs_circuits(a, start, path, used, out);
            path.pop();
            used[j as usize] = false;
        }
    }
}

/// True when every letter of the circuit has exactly one successor.
pub fn is_terminal(circuit: &PathPrefix, a: &CkMatrix) -> Result<bool, PdsxError> {
    if !circuit.is_circuit(a) {
        return Err(PdsxError::Semantic("not a circuit".into()));
    }
    Ok(circuit.letters().iter().all(|&v| a.row_sum(v) == 1))
}

/// Verdict of the no-terminal-circuits test.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ConditionI {
    Holds,
    Fails { witness: PathPrefix },
}

impl ConditionI {
    pub fn holds(&self) -> bool {
        matches!(self, ConditionI::Holds)
    }
}

/// Decides condition (I) by following the forced successors of
/// row-sum-one letters: a terminal circuit exists exactly when that
/// functional graph has a cycle inside the row-sum-one letters.
///
/// ```
/// use pdsx_core::ck::{condition_i, CkMatrix};
/// let a = CkMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
/// assert!(condition_i(&a).holds());
/// let swap = CkMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
/// assert!(!condition_i(&swap).holds());
/// ```
pub fn condition_i(a: &CkMatrix) -> ConditionI {
    let n = a.size() as u32;
    for start in 1..=n {
        if a.row_sum(start) != 1 {
            continue;
        }
        let mut trail: Vec<u32> = vec![start];
        let mut cur = start;
        loop {
            let Some(next) = a.sole_successor(cur) else {
                break; // left the row-sum-one letters: no terminal cycle here
            };
            if let Some(pos) = trail.iter().position(|&v| v == next) {
                let mut cycle: Vec<u32> = trail[pos..].to_vec();
                // rotate so the smallest letter leads, for a stable witness
                let min_pos = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &v)| v)
                    .map(|(k, _)| k)
                    .unwrap();
                cycle.rotate_left(min_pos);
                return ConditionI::Fails {
                    witness: PathPrefix { letters: cycle },
                };
            }
            trail.push(next);
            cur = next;
        }
    }
    ConditionI::Holds
}

/// Applies the group element to a cylinder, letters right to left: a
/// generator prepends when the junction is admissible, an inverse
/// generator deletes a matching leading letter. Returns `None` when the
/// cylinder leaves the domain. Deleting from a cylinder whose prefix is
/// already empty (or down to its last letter mid-word) loses the domain
/// constraint, so it is an error: refine the cylinder first.
pub fn theta_apply(
    t: &ReducedWord,
    c: &Cylinder,
    a: &CkMatrix,
    depth: usize,
) -> Result<Option<Cylinder>, PdsxError> {
    if t.rank() as usize != a.size() {
        return Err(PdsxError::Semantic("word rank differs from matrix size".into()));
    }
    if t.len() + c.prefix.len() > depth {
        return Err(PdsxError::TruncationOverflow(format!(
            "|t| + |prefix| = {} exceeds depth {depth}",
            t.len() + c.prefix.len()
        )));
    }
    let mut cur: Vec<u32> = c.prefix.letters().to_vec();
    for &x in t.letters().iter().rev() {
        if x > 0 {
            let g = x as u32;
            match cur.first() {
                None => cur = vec![g],
                Some(&first) => {
                    if a.entry(g, first) {
                        cur.insert(0, g);
                    } else {
                        return Ok(None);
                    }
                }
            }
        } else {
            let g = (-x) as u32;
            match cur.first() {
                None => {
                    return Err(PdsxError::Semantic(
                        "cylinder prefix too short for an inverse letter; refine deeper".into(),
                    ))
                }
                Some(&first) if first == g => {
                    cur.remove(0);
                    if cur.is_empty() {
                        return Err(PdsxError::Semantic(
                            "cylinder prefix too short for an inverse letter; refine deeper"
                                .into(),
                        ));
                    }
                }
                Some(_) => return Ok(None),
            }
        }
    }
    Ok(Some(Cylinder {
        prefix: PathPrefix { letters: cur },
    }))
}

/// A nonempty fixed-point set of the cylinder action: the unique fixed
/// path together with the exponent m in t = x γ^m x⁻¹.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FixedPoint {
    pub path: EventuallyPeriodicPath,
    pub exponent: i64,
}

/// The fixed set of a nontrivial group element: empty, or the single
/// eventually periodic path x γ γ γ … when t = x γ^m x⁻¹ with x, γ
/// admissible, γ a circuit and the junction admissible.
pub fn fixed_set(t: &ReducedWord, a: &CkMatrix) -> Result<Option<FixedPoint>, PdsxError> {
    if t.is_empty() {
        return Err(PdsxError::Semantic("t must differ from the identity".into()));
    }
    if t.rank() as usize != a.size() {
        return Err(PdsxError::Semantic("word rank differs from matrix size".into()));
    }
    let Some((r, s)) = t.positive_negative_factor() else {
        return Ok(None);
    };
    let r: Vec<u32> = r.letters().iter().map(|&x| x as u32).collect();
    let s: Vec<u32> = s.letters().iter().map(|&x| x as u32).collect();

    let (head, full_cycle, sign) = if s.len() < r.len() && r[..s.len()] == s[..] {
        (s.clone(), r[s.len()..].to_vec(), 1i64)
    } else if r.len() < s.len() && s[..r.len()] == r[..] {
        (r.clone(), s[r.len()..].to_vec(), -1i64)
    } else {
        return Ok(None);
    };

    // primitive root of the repeated block
    let period = (1..=full_cycle.len())
        .find(|&p| {
            full_cycle.len() % p == 0
                && full_cycle
                    .iter()
                    .enumerate()
                    .all(|(k, &v)| v == full_cycle[k % p])
        })
        .unwrap();
    let exponent = sign * (full_cycle.len() / period) as i64;
    let cycle: Vec<u32> = full_cycle[..period].to_vec();

    let admissible = |letters: &[u32]| letters.windows(2).all(|w| a.entry(w[0], w[1]));
    if !admissible(&head) || !admissible(&cycle) {
        return Ok(None);
    }
    if !a.entry(*cycle.last().unwrap(), cycle[0]) {
        return Ok(None);
    }
    if let Some(&last) = head.last() {
        if !a.entry(last, cycle[0]) {
            return Ok(None);
        }
    }
    let path = EventuallyPeriodicPath::new(
        a,
        PathPrefix { letters: head },
        PathPrefix { letters: cycle },
    )?;
    Ok(Some(FixedPoint { path, exponent }))
}

/// Isolated points of path space are exactly the eventually periodic
/// paths over a terminal circuit.
pub fn is_isolated(p: &EventuallyPeriodicPath, a: &CkMatrix) -> Result<bool, PdsxError> {
    is_terminal(&p.cycle, a)
}

/// Verdict of the topological-freeness test, with an explicit open fixed
/// set witness on failure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TopologicalFreeness {
    Holds,
    Fails {
        circuit: PathPrefix,
        fixing_word: ReducedWord,
        path: EventuallyPeriodicPath,
    },
}

impl TopologicalFreeness {
    pub fn holds(&self) -> bool {
        matches!(self, TopologicalFreeness::Holds)
    }
}

/// Topological freeness of the cylinder action, decided through the
/// simple-circuit enumeration (independently of [`condition_i`]): it
/// fails exactly when some simple circuit is terminal, in which case the
/// circuit, the word fixing its periodic path, and the isolated fixed
/// path are returned.
pub fn is_topologically_free(a: &CkMatrix) -> TopologicalFreeness {
    for c in simple_circuits(a) {
        if is_terminal(&c, a).expect("enumerated circuits are circuits") {
            let word = c.to_word(a.size() as u32);
            let path = EventuallyPeriodicPath::new(a, PathPrefix::empty(), c.clone())
                .expect("terminal circuit unrolls to a path");
            return TopologicalFreeness::Fails {
                circuit: c,
                fixing_word: word,
                path,
            };
        }
    }
    TopologicalFreeness::Holds
}

/// Containment of a cylinder in a finite union of cylinders, decided
/// exactly by refinement.
fn contained_in_union(
    target: &[u32],
    union: &BTreeSet<Vec<u32>>,
    a: &CkMatrix,
    depth: usize,
) -> bool {
    if union.iter().any(|p| target.starts_with(p)) {
        return true;
    }
    if target.len() > depth {
        return false;
    }
    // refine one step; every admissible extension must be covered
    let last = match target.last() {
        Some(&v) => v,
        None => {
            return (1..=a.size() as u32)
                .all(|j| contained_in_union(&[j], union, a, depth));
        }
    };
    let successors: Vec<u32> = (1..=a.size() as u32).filter(|&j| a.entry(last, j)).collect();
    if successors.is_empty() {
        return false; // cannot happen: no zero rows
    }
    successors.iter().all(|&j| {
        let mut ext = target.to_vec();
        ext.push(j);
        contained_in_union(&ext, union, a, depth)
    })
}

/// Exact invariance test for a finite union of cylinders: refined to the
/// given depth, the generator and inverse-generator images of every piece
/// must stay inside the union. Checking generators suffices because the
/// action is determined by them.
pub fn invariant_cylinder_union_check(
    cyls: &[Cylinder],
    a: &CkMatrix,
    depth: usize,
) -> Result<bool, PdsxError> {
    if depth < 2 {
        return Err(PdsxError::Semantic("invariance probe needs depth >= 2".into()));
    }
    if cyls.iter().any(|c| c.prefix.len() > depth) {
        return Err(PdsxError::TruncationOverflow(
            "cylinder prefix deeper than the probe depth".into(),
        ));
    }
    let union: BTreeSet<Vec<u32>> = cyls.iter().map(|c| c.prefix.letters().to_vec()).collect();
    // refine every piece to exactly `depth`
    let mut pieces: Vec<Vec<u32>> = Vec::new();
    for c in cyls {
        let mut frontier = vec![c.prefix.letters().to_vec()];
        while let Some(p) = frontier.pop() {
            if p.len() == depth {
                pieces.push(p);
                continue;
            }
            match p.last() {
                None => {
                    for j in 1..=a.size() as u32 {
                        let mut q = p.clone();
                        q.push(j);
                        frontier.push(q);
                    }
                }
                Some(&last) => {
                    for j in 1..=a.size() as u32 {
                        if a.entry(last, j) {
                            let mut q = p.clone();
                            q.push(j);
                            frontier.push(q);
                        }
                    }
                }
            }
        }
    }
    let rank = a.size() as u32;
    for piece in &pieces {
        let cyl = Cylinder {
            prefix: PathPrefix {
                letters: piece.clone(),
            },
        };
        for g in 1..=rank {
            for signed in [g as i32, -(g as i32)] {
                let word = ReducedWord::reduce(rank, &[signed])?;
                let image = theta_apply(&word, &cyl, a, depth + 1)?;
                if let Some(img) = image {
                    if !contained_in_union(img.prefix.letters(), &union, a, depth + 1) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Simplicity verdict with the reasons that ground it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SimplicityVerdict {
    /// Irreducible and not a permutation matrix.
    Simple { reason: String },
    /// A proper nonempty invariant union of cylinders exists, giving a
    /// proper ideal of the crossed product.
    NotSimple {
        reason: String,
        witness: Vec<Cylinder>,
    },
    /// Not covered by the minimality criterion and no invariant structure
    /// was found at the probe depth.
    Undetermined { reason: String },
}

impl SimplicityVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SimplicityVerdict::Simple { .. } => "simple",
            SimplicityVerdict::NotSimple { .. } => "not-simple",
            SimplicityVerdict::Undetermined { .. } => "undetermined",
        }
    }
}

/// Decides simplicity where the finite criteria reach: irreducible
/// non-permutation matrices are simple; a proper invariant cylinder union
/// found at the probe depth certifies non-simplicity; everything else is
/// reported undetermined. The probe depth shrinks automatically when the
/// path tree at the requested depth grows beyond desk scale.
pub fn simplicity_verdict(a: &CkMatrix, depth: usize) -> SimplicityVerdict {
    let mut depth = depth.max(2);
    while depth > 2 && admissible_prefix_count(a, depth) > 4096 {
        depth -= 1;
    }
    let irreducible = a.is_irreducible();
    let permutation = a.is_permutation();
    if irreducible && !permutation {
        return SimplicityVerdict::Simple {
            reason: "matrix is irreducible and not a permutation matrix".into(),
        };
    }
    // probe: saturate each depth-`depth` cylinder under the generator
    // images (truncated back to the probe depth) and test the resulting
    // union for exact invariance
    if let Some(witness) = invariant_union_probe(a, depth) {
        let comps = a.strongly_connected_components();
        let reason = if irreducible {
            "proper invariant cylinder union found".to_string()
        } else {
            format!(
                "reducible ({} strongly connected components); proper invariant cylinder union found",
                comps.len()
            )
        };
        return SimplicityVerdict::NotSimple {
            reason,
            witness,
        };
    }
    let reason = if permutation {
        "permutation matrix: not covered by the simplicity criterion, and no proper invariant cylinder union exists at the probe depth".to_string()
    } else {
        let comps = a.strongly_connected_components();
        format!(
            "reducible ({} strongly connected components, e.g. {:?}): not covered by the simplicity criterion, and no proper invariant cylinder union exists at the probe depth",
            comps.len(),
            comps.first().cloned().unwrap_or_default()
        )
    };
    SimplicityVerdict::Undetermined { reason }
}

fn invariant_union_probe(a: &CkMatrix, depth: usize) -> Option<Vec<Cylinder>> {
    let all: BTreeSet<Vec<u32>> = admissible_prefixes(a, depth)
        .into_iter()
        .map(|p| p.letters().to_vec())
        .collect();
    let rank = a.size() as u32;
    for seed in &all {
        let mut set: BTreeSet<Vec<u32>> = BTreeSet::new();
        set.insert(seed.clone());
        let mut queue: Vec<Vec<u32>> = vec![seed.clone()];
        while let Some(p) = queue.pop() {
            let cyl = Cylinder {
                prefix: PathPrefix { letters: p.clone() },
            };
            for g in 1..=rank {
                for signed in [g as i32, -(g as i32)] {
                    let word = ReducedWord::reduce(rank, &[signed]).unwrap();
                    let image = match theta_apply(&word, &cyl, a, depth + 1) {
                        Ok(img) => img,
                        Err(_) => continue,
                    };
                    let Some(img) = image else { continue };
                    // truncate the image back to the probe depth (this can
                    // only enlarge the union; exact invariance is verified
                    // afterwards)
                    let mut letters = img.prefix.letters().to_vec();
                    letters.truncate(depth);
                    // widen short prefixes back to depth-`depth` pieces
                    let mut frontier = vec![letters];
                    while let Some(q) = frontier.pop() {
                        if q.len() == depth {
                            if set.insert(q.clone()) {
                                queue.push(q);
                            }
                            continue;
                        }
                        let last = *q.last().expect("images of nonempty pieces are nonempty");
                        for j in 1..=rank {
                            if a.entry(last, j) {
                                let mut ext = q.clone();
                                ext.push(j);
                                frontier.push(ext);
                            }
                        }
                    }
                }
            }
        }
        if set.len() < all.len() {
            let cyls: Vec<Cylinder> = set
                .iter()
                .map(|p| Cylinder {
                    prefix: PathPrefix { letters: p.clone() },
                })
                .collect();
            if invariant_cylinder_union_check(&cyls, a, depth).unwrap_or(false) {
                return Some(cyls);
            }
        }
    }
    None
}

/// Report of the pattern-membership test for the Cuntz-Krieger spectrum.
#[derive(Clone, Debug)]
pub struct SpecCheckReport {
    pub holds: bool,
    /// Members whose forward checks lie outside the ball (length equals
    /// the radius), reported rather than failed.
    pub skipped: BTreeSet<ReducedWord>,
    pub failure: Option<String>,
}

/// Tests the four membership conditions of the Cuntz-Krieger spectrum on
/// a truncated pattern: identity membership, connectedness, unique
/// forward generator, and the row condition for inverse generators.
/// Checks needing elements beyond the ball are skipped and reported.
pub fn spec_check(
    omega: &BallPattern<FreeGroup>,
    a: &CkMatrix,
) -> Result<SpecCheckReport, PdsxError> {
    let n = a.size() as u32;
    let rank_ok = omega.members().iter().all(|w| w.rank() == n);
    if !rank_ok {
        return Err(PdsxError::Semantic("pattern rank differs from matrix size".into()));
    }
    let radius = omega.radius();
    let mut skipped = BTreeSet::new();
    let fail = |msg: String| SpecCheckReport {
        holds: false,
        skipped: BTreeSet::new(),
        failure: Some(msg),
    };

    // connectedness: closed under initial segments
    for t in omega.members() {
        for seg in t.initial_segments() {
            if !omega.contains(&seg) {
                return Ok(fail(format!(
                    "not connected: {} lacks initial segment {}",
                    t.render(),
                    seg.render()
                )));
            }
        }
    }

    for t in omega.members() {
        if t.len() as u32 == radius {
            skipped.insert(t.clone());
            continue;
        }
        // unique forward generator
        let mut forward = Vec::new();
        for j in 1..=n {
            let tg = t.concat(&ReducedWord::generator(n, j)?)?;
            if omega.contains(&tg) {
                forward.push(j);
            }
        }
        if forward.len() != 1 {
            return Ok(fail(format!(
                "forward generator at {} not unique: {:?}",
                t.render(),
                forward
            )));
        }
        let j = forward[0];
        // row condition for inverse generators
        for i in 1..=n {
            let tginv = t.concat(&ReducedWord::generator(n, i)?.inverse())?;
            let present = omega.contains(&tginv);
            if present != a.entry(i, j) {
                return Ok(fail(format!(
                    "row condition fails at {} for letter {i} (forward {j})",
                    t.render()
                )));
            }
        }
    }
    Ok(SpecCheckReport {
        holds: true,
        skipped,
        failure: None,
    })
}

/// The ball truncation of the pattern attached to an infinite path: all
/// group elements of the form (prefix of μ)·ν⁻¹ with ν admissible and
/// ν followed by the next path letter admissible.
pub fn omega_from_path(
    mu: &PathPrefix,
    a: &CkMatrix,
    radius: u32,
) -> Result<BallPattern<FreeGroup>, PdsxError> {
    if (mu.len() as u32) < radius {
        return Err(PdsxError::Semantic(format!(
            "path prefix of length {} cannot settle a radius-{radius} ball",
            mu.len()
        )));
    }
    let n = a.size() as u32;
    let group = FreeGroup::new(n);
    let mut members: BTreeSet<ReducedWord> = BTreeSet::new();
    let nus: Vec<PathPrefix> = (0..=radius as usize)
        .flat_map(|m| admissible_prefixes(a, m))
        .collect();
    for j in 0..=(radius as usize).min(mu.len()) {
        let prefix_word = PathPrefix {
            letters: mu.letters()[..j].to_vec(),
        }
        .to_word(n);
        for nu in &nus {
            if !nu.is_empty() {
                // ν μ_{j+1} must be admissible, so the next letter must exist
                if j >= mu.len() {
                    continue;
                }
                if !a.entry(*nu.letters().last().unwrap(), mu.letters()[j]) {
                    continue;
                }
            }
            let t = prefix_word.concat(&nu.to_word(n).inverse())?;
            if t.len() as u32 <= radius {
                members.insert(t);
            }
        }
    }
    BallPattern::new(&group, radius, members)
}

/// Reads the unique positive chain out of a spectrum pattern: the inverse
/// of [`omega_from_path`] at truncation level.
pub fn path_from_omega(
    omega: &BallPattern<FreeGroup>,
    a: &CkMatrix,
) -> Result<PathPrefix, PdsxError> {
    let report = spec_check(omega, a)?;
    if !report.holds {
        return Err(PdsxError::Semantic(format!(
            "pattern is not a spectrum pattern: {}",
            report.failure.unwrap_or_default()
        )));
    }
    let n = a.size() as u32;
    let mut letters = Vec::new();
    let mut current = ReducedWord::identity(n);
    'outer: while (current.len() as u32) < omega.radius() {
        for j in 1..=n {
            let next = current.concat(&ReducedWord::generator(n, j)?)?;
            if omega.contains(&next) {
                letters.push(j);
                current = next;
                continue 'outer;
            }
        }
        break;
    }
    PathPrefix::new(a, letters)
}

/// The relation family whose spectrum the patterns model: the unit
/// partition over generators, the row relations, and the semisaturation
/// instances for geodesic pairs up to the given total length.
pub fn ck_relation_polys(a: &CkMatrix, cap: u32) -> Vec<RelationPoly<ReducedWord>> {
    let n = a.size() as u32;
    let mut polys = Vec::new();
    // Σ_j 1_{g_j} − 1
    let mut sum = RelationPoly::constant(-1);
    for j in 1..=n {
        sum = sum.plus(RelationPoly::indicator(
            ReducedWord::generator(n, j).unwrap(),
        ));
    }
    polys.push(sum);
    // Σ_j a_{ij} 1_{g_j} − 1_{g_i⁻¹} for each row i
    for i in 1..=n {
        let mut row = RelationPoly::indicator(
            ReducedWord::generator(n, i).unwrap().inverse(),
        )
        .scaled(-1);
        for j in 1..=n {
            if a.entry(i, j) {
                row = row.plus(RelationPoly::indicator(
                    ReducedWord::generator(n, j).unwrap(),
                ));
            }
        }
        polys.push(row);
    }
    // 1_{tr} 1_t − 1_{tr} for nonempty geodesic pairs with |tr| ≤ cap
    if cap >= 2 {
        let b = ball(n, cap - 1);
        for t in &b {
            if t.is_empty() {
                continue;
            }
            for r in &b {
                if r.is_empty() || t.len() + r.len() > cap as usize {
                    continue;
                }
                if !t.is_geodesic_product(r).unwrap() {
                    continue;
                }
                let tr = t.concat(r).unwrap();
                let poly = RelationPoly::new(vec![
                    (
                        crate::scalar::GaussRational::from_int(1),
                        vec![tr.clone(), t.clone()],
                    ),
                    (crate::scalar::GaussRational::from_int(-1), vec![tr]),
                ]);
                polys.push(poly);
            }
        }
    }
    polys
}

/// How many leading polys of [`ck_relation_polys`] form the generator
/// family (unit partition plus row relations); the rest are
/// semisaturation instances.
pub fn ck_generator_poly_count(a: &CkMatrix) -> usize {
    a.size() + 1
}

/// Batch condition (I) over many matrices, data-parallel by default.
pub fn condition_i_many(matrices: &[CkMatrix]) -> Vec<ConditionI> {
    crate::par::map_slice(matrices, true, condition_i)
}

/// Sequential twin of [`condition_i_many`].
pub fn condition_i_many_seq(matrices: &[CkMatrix]) -> Vec<ConditionI> {
    crate::par::map_slice(matrices, false, condition_i)
}

/// All {0,1} matrices of the given size with no zero rows, in row-value
/// order: the exhaustive test universe for small sizes.
pub fn all_matrices(n: usize) -> Vec<CkMatrix> {
    let row_values = 1u32..(1 << n);
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
    while let Some(rows) = stack.pop() {
        if rows.len() == n {
            let matrix = rows
                .iter()
                .map(|&r| (0..n).map(|j| (r >> j & 1) as u8).collect())
                .collect();
            out.push(CkMatrix::new(matrix).expect("rows are nonzero"));
            continue;
        }
        for r in row_values.clone().rev() {
            let mut next = rows.clone();
            next.push(r);
            stack.push(next);
        }
    }
    out
}
