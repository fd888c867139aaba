//! The Cremona-Kantor group action on `N_s`: quadratic moves based at three of
//! the blown-up points, permutations of the points, invertible words, and the
//! degree-descending Cremona reduction algorithm.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{rat, ClassVector, Rat};

/// A single generator of the Cremona-Kantor group. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CKMove {
    /// Permutation of the points, given by its images: `perm[i-1]` is where
    /// point `i` goes.
    #[serde(rename = "perm")]
    Permutation(Vec<usize>),
    /// Quadratic transform based at three distinct points.
    #[serde(rename = "quad")]
    Quadratic([usize; 3]),
}

impl CKMove {
    /// Transposition of two points on `s` points, as a permutation move.
    pub fn transposition(s: usize, a: usize, b: usize) -> CKMove {
        let mut images: Vec<usize> = (1..=s).collect();
        images.swap(a - 1, b - 1);
        CKMove::Permutation(images)
    }

    fn validate(&self, s: usize) -> Result<()> {
        match self {
            CKMove::Permutation(images) => {
                if images.len() != s {
                    return Err(Error::InvalidPermutation(images.clone(), s));
                }
                let mut seen = vec![false; s];
                for &im in images {
                    if im < 1 || im > s || seen[im - 1] {
                        return Err(Error::InvalidPermutation(images.clone(), s));
                    }
                    seen[im - 1] = true;
                }
                Ok(())
            }
            CKMove::Quadratic([i, j, k]) => {
                if i == j || j == k || i == k {
                    return Err(Error::RepeatedIndices(*i, *j, *k));
                }
                for &x in [i, j, k] {
                    if x < 1 || x > s {
                        return Err(Error::IndexOutOfRange { index: x, s });
                    }
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, cls: &ClassVector) -> Result<ClassVector> {
        self.validate(cls.s())?;
        match self {
            CKMove::Permutation(images) => {
                let mut m = vec![Rat::zero(); cls.s()];
                for (i, &im) in images.iter().enumerate() {
                    m[im - 1] = cls.multiplicities()[i].clone();
                }
                Ok(ClassVector::new(cls.degree().clone(), m))
            }
            CKMove::Quadratic([i, j, k]) => Ok(apply_quadratic_unchecked(cls, *i, *j, *k)),
        }
    }

    pub fn inverse(&self) -> CKMove {
        match self {
            CKMove::Permutation(images) => {
                let mut inv = vec![0usize; images.len()];
                for (i, &im) in images.iter().enumerate() {
                    inv[im - 1] = i + 1;
                }
                CKMove::Permutation(inv)
            }
            // quadratic moves are involutions
            CKMove::Quadratic(ijk) => CKMove::Quadratic(*ijk),
        }
    }
}

fn apply_quadratic_unchecked(cls: &ClassVector, i: usize, j: usize, k: usize) -> ClassVector {
    let (mi, mj, mk) = (cls.mult(i), cls.mult(j), cls.mult(k));
    let d = cls.degree();
    let new_d = rat(2) * d - mi - mj - mk;
    let mut m = cls.multiplicities().to_vec();
    m[i - 1] = d - mj - mk;
    m[j - 1] = d - mi - mk;
    m[k - 1] = d - mi - mj;
    ClassVector::new(new_d, m)
}

/// Quadratic transform at three distinct points: `d' = 2d - m_i - m_j - m_k`,
/// `m_i' = d - m_j - m_k` (and cyclically), other entries unchanged.
pub fn apply_quadratic(cls: &ClassVector, i: usize, j: usize, k: usize) -> Result<ClassVector> {
    CKMove::Quadratic([i, j, k]).apply(cls)
}

/// A word in the Cremona-Kantor group, applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CKWord {
    pub moves: Vec<CKMove>,
}

impl CKWord {
    pub fn identity() -> CKWord {
        CKWord { moves: Vec::new() }
    }

    pub fn new(moves: Vec<CKMove>) -> CKWord {
        CKWord { moves }
    }

    pub fn push(&mut self, mv: CKMove) {
        self.moves.push(mv);
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn apply(&self, cls: &ClassVector) -> Result<ClassVector> {
        let mut cur = cls.clone();
        for mv in &self.moves {
            cur = mv.apply(&cur)?;
        }
        Ok(cur)
    }

    pub fn inverse(&self) -> CKWord {
        CKWord {
            moves: self.moves.iter().rev().map(CKMove::inverse).collect(),
        }
    }

    /// Concatenation: `self` then `other`.
    pub fn then(&self, other: &CKWord) -> CKWord {
        let mut moves = self.moves.clone();
        moves.extend(other.moves.iter().cloned());
        CKWord { moves }
    }
}

pub fn apply_word(word: &CKWord, cls: &ClassVector) -> Result<ClassVector> {
    word.apply(cls)
}

/// Why the reduction loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionStatus {
    Reduced,
    NegativeMultiplicity,
    NegativeDegree,
}

/// Outcome of Cremona reduction: the final class, the replayable word mapping
/// the input to it, and why the loop stopped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReductionResult {
    pub final_class: ClassVector,
    pub word: CKWord,
    pub status: ReductionStatus,
    pub steps: usize,
    /// For `NegativeMultiplicity`: the 1-based index of the first negative entry.
    pub negative_index: Option<usize>,
}

/// `true` iff the degree is at least the sum of the three largest multiplicities.
pub fn is_cremona_reduced(cls: &ClassVector) -> Result<bool> {
    if cls.s() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: cls.s(),
        });
    }
    let (i, j, k) = three_largest(cls);
    Ok(cls.degree() >= &(cls.mult(i) + cls.mult(j) + cls.mult(k)))
}

/// Indices (1-based) of the three largest multiplicities, lowest index first
/// on ties.
fn three_largest(cls: &ClassVector) -> (usize, usize, usize) {
    let mut idx: Vec<usize> = (1..=cls.s()).collect();
    // stable sort keeps the lowest index among equals
    idx.sort_by(|&a, &b| cls.mult(b).cmp(cls.mult(a)));
    (idx[0], idx[1], idx[2])
}

/// Iterated quadratic moves at the three points of largest multiplicity, until
/// the class is reduced or a negative entry appears. The degree strictly
/// decreases at every applied move, which bounds the loop.
pub fn cremona_reduce(cls: &ClassVector) -> Result<ReductionResult> {
    if !cls.is_integral() {
        return Err(Error::NotIntegral(cls.to_string()));
    }
    if cls.s() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: cls.s(),
        });
    }
    let mut cur = cls.clone();
    let mut word = CKWord::identity();
    let mut steps = 0usize;
    // provably unreachable bound: the degree drops by at least 1 per move
    let cap = if cls.degree().is_positive() {
        cls.degree().to_integer().try_into().unwrap_or(usize::MAX - 2)
    } else {
        0usize
    } + 2;
    loop {
        if let Some(i) = (1..=cur.s()).find(|&i| cur.mult(i).is_negative()) {
            return Ok(ReductionResult {
                final_class: cur,
                word,
                status: ReductionStatus::NegativeMultiplicity,
                steps,
                negative_index: Some(i),
            });
        }
        if cur.degree().is_negative() {
            return Ok(ReductionResult {
                final_class: cur,
                word,
                status: ReductionStatus::NegativeDegree,
                steps,
                negative_index: None,
            });
        }
        let (i, j, k) = three_largest(&cur);
        if cur.degree() >= &(cur.mult(i) + cur.mult(j) + cur.mult(k)) {
            return Ok(ReductionResult {
                final_class: cur,
                word,
                status: ReductionStatus::Reduced,
                steps,
                negative_index: None,
            });
        }
        let mv = CKMove::Quadratic([i, j, k]);
        cur = mv.apply(&cur)?;
        word.push(mv);
        steps += 1;
        if steps > cap {
            return Err(Error::Internal(format!(
                "reduction of {cls} exceeded the degree bound of {cap} steps"
            )));
        }
    }
}
