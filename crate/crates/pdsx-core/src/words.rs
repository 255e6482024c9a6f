//! Reduced words of the free group F_n and its positive monoid.
//!
//! Letters are signed 1-based generator indices: `2` is the second
//! generator, `-2` its inverse. The empty word is the identity. Words
//! render as `g1.g2'.g1` (apostrophe marks an inverse) and as JSON arrays
//! of signed integers.

use std::cmp::Ordering;
use std::fmt;

use crate::PdsxError;

/// A reduced word in F_n together with its ambient rank.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ReducedWord {
    rank: u32,
    letters: Vec<i32>,
}

impl ReducedWord {
    /// The identity of F_n.
    pub fn identity(rank: u32) -> Self {
        ReducedWord {
            rank,
            letters: Vec::new(),
        }
    }

    /// Fully cancels a raw letter sequence. Idempotent.
    pub fn reduce(rank: u32, letters: &[i32]) -> Result<Self, PdsxError> {
        let mut stack: Vec<i32> = Vec::with_capacity(letters.len());
        for &x in letters {
            if x == 0 || x.unsigned_abs() > rank {
                return Err(PdsxError::Semantic(format!(
                    "letter {x} out of range for rank {rank}"
                )));
            }
            if stack.last().is_some_and(|&y| y == -x) {
                stack.pop();
            } else {
                stack.push(x);
            }
        }
        Ok(ReducedWord {
            rank,
            letters: stack,
        })
    }

    /// A single positive generator g_i.
    pub fn generator(rank: u32, i: u32) -> Result<Self, PdsxError> {
        Self::reduce(rank, &[i as i32])
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|&x| x > 0)
    }

    pub fn inverse(&self) -> Self {
        ReducedWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|x| -x).collect(),
        }
    }

    /// Group multiplication: the reduced form of `self · other`.
    pub fn concat(&self, other: &Self) -> Result<Self, PdsxError> {
        if self.rank != other.rank {
            return Err(PdsxError::Semantic(format!(
                "rank mismatch: {} vs {}",
                self.rank, other.rank
            )));
        }
        let mut letters = self.letters.clone();
        for &x in &other.letters {
            if letters.last().is_some_and(|&y| y == -x) {
                letters.pop();
            } else {
                letters.push(x);
            }
        }
        Ok(ReducedWord {
            rank: self.rank,
            letters,
        })
    }

    /// True when no cancellation happens at the junction, i.e.
    /// |self · other| = |self| + |other|.
    pub fn is_geodesic_product(&self, other: &Self) -> Result<bool, PdsxError> {
        Ok(self.concat(other)?.len() == self.len() + other.len())
    }

    /// `[e, t1, t1 t2, ..., t]` in order.
    pub fn initial_segments(&self) -> Vec<ReducedWord> {
        (0..=self.letters.len())
            .map(|k| ReducedWord {
                rank: self.rank,
                letters: self.letters[..k].to_vec(),
            })
            .collect()
    }

    /// Splits `y = r · s^{-1}` with `r`, `s` positive, provided the reduced
    /// form contains no inverse generator followed by a generator.
    pub fn positive_negative_factor(&self) -> Option<(ReducedWord, ReducedWord)> {
        let fall = self
            .letters
            .windows(2)
            .any(|w| w[0] < 0 && w[1] > 0);
        if fall {
            return None;
        }
        let split = self.letters.iter().position(|&x| x < 0).unwrap_or(self.letters.len());
        let r = ReducedWord {
            rank: self.rank,
            letters: self.letters[..split].to_vec(),
        };
        let s = ReducedWord {
            rank: self.rank,
            letters: self.letters[split..].iter().rev().map(|x| -x).collect(),
        };
        Some((r, s))
    }

    /// Renders as `g1.g2'.g1`; the identity renders as `e`.
    pub fn render(&self) -> String {
        if self.letters.is_empty() {
            return "e".to_string();
        }
        self.letters
            .iter()
            .map(|&x| {
                if x > 0 {
                    format!("g{x}")
                } else {
                    format!("g{}'", -x)
                }
            })
            .collect::<Vec<_>>()
            .join(".")
    }

    /// Parses the `g1.g2'.g1` form; `e` (or the empty string) is the identity.
    pub fn parse(rank: u32, s: &str) -> Result<Self, PdsxError> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Self::identity(rank));
        }
        let mut letters = Vec::new();
        for piece in s.split('.') {
            let piece = piece.trim();
            let (body, inv) = match piece.strip_suffix('\'') {
                Some(b) => (b, true),
                None => (piece, false),
            };
            let idx: u32 = body
                .strip_prefix('g')
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| PdsxError::Parse(format!("bad word piece `{piece}`")))?;
            letters.push(if inv { -(idx as i32) } else { idx as i32 });
        }
        Self::reduce(rank, &letters)
    }

    /// Parses the JSON signed-integer-array form, e.g. `[1, -2, 1]`.
    pub fn from_signed(rank: u32, letters: &[i64]) -> Result<Self, PdsxError> {
        let letters: Vec<i32> = letters
            .iter()
            .map(|&x| {
                i32::try_from(x).map_err(|_| PdsxError::Parse(format!("letter {x} out of range")))
            })
            .collect::<Result<_, _>>()?;
        Self::reduce(rank, &letters)
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Shortlex order: by length first, then letterwise with
/// g1 < g1' < g2 < g2' < ... Used wherever a deterministic choice of word
/// is needed.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |x: i32| (x.unsigned_abs(), x < 0);
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| {
                for (a, b) in self.letters.iter().zip(&other.letters) {
                    match key(*a).cmp(&key(*b)) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All reduced words of length at most `radius`, in shortlex order.
///
/// ```
/// let b = pdsx_core::words::ball(2, 1);
/// assert_eq!(b.len(), 5);
/// assert_eq!(b[0].render(), "e");
/// ```
pub fn ball(rank: u32, radius: u32) -> Vec<ReducedWord> {
    let mut out = vec![ReducedWord::identity(rank)];
    let mut frontier = vec![ReducedWord::identity(rank)];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 1..=rank as i32 {
                for x in [i, -i] {
                    if w.letters.last().is_some_and(|&y| y == -x) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(x);
                    next.push(ReducedWord {
                        rank,
                        letters,
                    });
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Closed-form count of `ball(rank, radius)`, saturating at u64::MAX
/// for radii far beyond anything enumerable.
pub fn ball_count(rank: u32, radius: u32) -> u64 {
    let n = rank as u64;
    let k = radius;
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return 2 * k as u64 + 1;
    }
    // 1 + 2n((2n-1)^k - 1)/(2n-2)
    let base = 2 * n - 1;
    let Some(pow) = base.checked_pow(k) else {
        return u64::MAX;
    };
    2u64.saturating_mul(n)
        .saturating_mul(pow - 1)
        .checked_div(2 * n - 2)
        .and_then(|v| v.checked_add(1))
        .unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(rank: u32, letters: &[i32]) -> ReducedWord {
        ReducedWord::reduce(rank, letters).unwrap()
    }

    /// Independent cancellation oracle: repeatedly delete the first
    /// adjacent inverse pair until none remains.
    fn reduce_oracle(letters: &[i32]) -> Vec<i32> {
        let mut v = letters.to_vec();
        loop {
            let pos = (1..v.len()).find(|&i| v[i - 1] == -v[i]);
            match pos {
                Some(i) => {
                    v.drain(i - 1..=i);
                }
                None => return v,
            }
        }
    }

    #[test]
    fn reduce_basic() {
        assert_eq!(w(2, &[]).len(), 0);
        assert_eq!(w(2, &[1, -1]).len(), 0);
        assert_eq!(w(2, &[1, 2, -2, 1]).letters(), &[1, 1]);
        assert_eq!(
            w(2, &[1, 2, -2, 1]).letters(),
            reduce_oracle(&[1, 2, -2, 1]).as_slice()
        );
        assert!(ReducedWord::reduce(2, &[3]).is_err());
        assert!(ReducedWord::reduce(2, &[0]).is_err());
    }

    #[test]
    fn concat_examples() {
        let e = ReducedWord::identity(2);
        assert_eq!(w(2, &[1]).concat(&w(2, &[-1])).unwrap(), e);
        assert_eq!(
            w(2, &[1, 2]).concat(&w(2, &[-2, 1])).unwrap(),
            w(2, &[1, 1])
        );
        assert_eq!(e.concat(&w(2, &[2])).unwrap(), w(2, &[2]));
        assert!(w(2, &[1]).concat(&w(3, &[1])).is_err());
    }

    #[test]
    fn geodesic_examples() {
        assert!(w(2, &[1]).is_geodesic_product(&w(2, &[2])).unwrap());
        assert!(!w(2, &[1]).is_geodesic_product(&w(2, &[-1])).unwrap());
        assert!(!w(2, &[1, -2])
            .is_geodesic_product(&w(2, &[2, 1]))
            .unwrap());
    }

    #[test]
    fn initial_segments_examples() {
        let e = ReducedWord::identity(2);
        assert_eq!(e.initial_segments(), vec![e.clone()]);
        assert_eq!(
            w(2, &[1, 2]).initial_segments(),
            vec![e.clone(), w(2, &[1]), w(2, &[1, 2])]
        );
        assert_eq!(
            w(2, &[1, -2]).initial_segments(),
            vec![e, w(2, &[1]), w(2, &[1, -2])]
        );
    }

    #[test]
    fn pnf_examples() {
        let (r, s) = w(2, &[1, 2, -1]).positive_negative_factor().unwrap();
        assert_eq!(r, w(2, &[1, 2]));
        assert_eq!(s, w(2, &[1]));
        assert_eq!(r.concat(&s.inverse()).unwrap(), w(2, &[1, 2, -1]));

        assert!(w(2, &[-1, 2]).positive_negative_factor().is_none());

        let (r, s) = w(2, &[1, 2]).positive_negative_factor().unwrap();
        assert_eq!(r, w(2, &[1, 2]));
        assert!(s.is_empty());

        let (r, s) = w(2, &[-2, -1]).positive_negative_factor().unwrap();
        assert!(r.is_empty());
        assert_eq!(s, w(2, &[1, 2]));
    }

    #[test]
    fn ball_examples() {
        assert_eq!(ball(2, 0).len(), 1);
        assert_eq!(ball(2, 1).len(), 5);
        let b = ball(1, 2);
        assert_eq!(b.len(), 5);
        let rendered: Vec<String> = b.iter().map(|x| x.render()).collect();
        assert_eq!(rendered, vec!["e", "g1", "g1'", "g1.g1", "g1'.g1'"]);
    }

    #[test]
    fn ball_matches_closed_form() {
        for rank in 1..=3u32 {
            for radius in 0..=3u32 {
                let b = ball(rank, radius);
                assert_eq!(b.len() as u64, ball_count(rank, radius));
                // all reduced and distinct
                let mut seen = std::collections::BTreeSet::new();
                for x in &b {
                    assert_eq!(
                        ReducedWord::reduce(rank, x.letters()).unwrap().letters(),
                        x.letters()
                    );
                    assert!(seen.insert(x.clone()));
                }
            }
        }
    }

    #[test]
    fn render_parse_round_trip() {
        for x in ball(2, 3) {
            assert_eq!(ReducedWord::parse(2, &x.render()).unwrap(), x);
            let signed: Vec<i64> = x.letters().iter().map(|&v| v as i64).collect();
            assert_eq!(ReducedWord::from_signed(2, &signed).unwrap(), x);
        }
        assert_eq!(ReducedWord::parse(2, "g1.g2'.g1").unwrap(), w(2, &[1, -2, 1]));
        assert!(ReducedWord::parse(2, "h1").is_err());
    }

    fn arb_word(rank: u32, max_len: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((1..=rank as i32).prop_flat_map(|i| prop_oneof![Just(i), Just(-i)]), 0..max_len)
            .prop_map(move |letters| ReducedWord::reduce(rank, &letters).unwrap())
    }

    proptest! {
        #[test]
        fn concat_associative(a in arb_word(2, 8), b in arb_word(2, 8), c in arb_word(2, 8)) {
            let left = a.concat(&b).unwrap().concat(&c).unwrap();
            let right = a.concat(&b.concat(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn inverse_laws(a in arb_word(2, 8)) {
            prop_assert!(a.concat(&a.inverse()).unwrap().is_empty());
            prop_assert_eq!(a.inverse().inverse(), a);
        }

        #[test]
        fn geodesic_iff_length_adds(a in arb_word(2, 8), b in arb_word(2, 8)) {
            let prod = a.concat(&b).unwrap();
            prop_assert!(prod.len() <= a.len() + b.len());
            prop_assert_eq!(
                a.is_geodesic_product(&b).unwrap(),
                prod.len() == a.len() + b.len()
            );
        }

        #[test]
        fn pnf_reconstructs(a in arb_word(3, 8)) {
            if let Some((r, s)) = a.positive_negative_factor() {
                prop_assert!(r.is_positive());
                prop_assert!(s.is_positive());
                prop_assert_eq!(r.concat(&s.inverse()).unwrap(), a);
            }
        }

        #[test]
        fn reduce_is_idempotent_and_matches_oracle(
            letters in prop::collection::vec((1..=3i32).prop_flat_map(|i| prop_oneof![Just(i), Just(-i)]), 0..12)
        ) {
            let once = ReducedWord::reduce(3, &letters).unwrap();
            let twice = ReducedWord::reduce(3, once.letters()).unwrap();
            prop_assert_eq!(&once, &twice);
            let oracle = reduce_oracle(&letters);
            prop_assert_eq!(once.letters(), oracle.as_slice());
        }
    }
}
