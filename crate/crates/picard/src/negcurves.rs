//! `(-1)`-classes: integral classes with self-intersection and canonical
//! pairing both `-1`. For very general points every such numeric class is the
//! class of an actual exceptional curve, so the numeric condition is taken as
//! definitional. Enumeration is a breadth-first orbit search under quadratic
//! moves from the seed set `{E_i}`, deduplicated by normalized ray.

use std::collections::HashSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{rat, ClassVector, Ray};

/// The class of a `(-1)`-curve, stored as a primitive normalized ray.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Ray", into = "Ray")]
pub struct NegCurveClass {
    cls: Ray,
}

impl NegCurveClass {
    pub fn new(cls: Ray) -> Result<NegCurveClass> {
        if !is_minus_one_class(&cls.class()) {
            return Err(Error::InvalidCertificate(format!(
                "{cls} is not a (-1)-class"
            )));
        }
        Ok(NegCurveClass { cls })
    }

    pub fn from_class(cls: &ClassVector) -> Result<NegCurveClass> {
        NegCurveClass::new(cls.to_ray()?)
    }

    pub fn exceptional(s: usize, i: usize) -> NegCurveClass {
        NegCurveClass::new(ClassVector::exceptional(s, i).to_ray().expect("nonzero"))
            .expect("E_i is a (-1)-class")
    }

    pub fn ray(&self) -> &Ray {
        &self.cls
    }

    pub fn class(&self) -> ClassVector {
        self.cls.class()
    }

    pub fn s(&self) -> usize {
        self.cls.s()
    }
}

impl std::fmt::Display for NegCurveClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.cls)
    }
}

impl TryFrom<Ray> for NegCurveClass {
    type Error = Error;
    fn try_from(ray: Ray) -> Result<NegCurveClass> {
        NegCurveClass::new(ray)
    }
}

impl From<NegCurveClass> for Ray {
    fn from(c: NegCurveClass) -> Ray {
        c.cls
    }
}

/// `true` iff `L^2 = -1` and `K_s . L = -1`.
pub fn is_minus_one_class(cls: &ClassVector) -> bool {
    cls.self_intersection() == -rat(1) && cls.k_pairing() == -rat(1)
}

/// Compact integer representation used only inside the orbit search; the
/// degrees involved stay far below i64 range.
#[derive(Clone, PartialEq, Eq, Hash)]
struct IntClass {
    d: i64,
    m: Vec<i64>,
}

impl IntClass {
    fn to_class(&self) -> ClassVector {
        ClassVector::from_i64(self.d, &self.m)
    }
}

/// All `(-1)`-classes on `s` points with degree at most `max_degree`, by
/// breadth-first orbit search. Classes at the degree bound are still expanded;
/// children above the bound are dropped.
pub fn enumerate_minus_one_classes(s: usize, max_degree: i64) -> Vec<NegCurveClass> {
    let mut seen: HashSet<IntClass> = HashSet::new();
    let mut frontier: Vec<IntClass> = Vec::new();
    for i in 0..s {
        let mut m = vec![0i64; s];
        m[i] = -1;
        let seed = IntClass { d: 0, m };
        seen.insert(seed.clone());
        frontier.push(seed);
    }
    if max_degree < 0 {
        return Vec::new();
    }
    // Lines through pairs of points are (-1)-classes but are reachable by a
    // Cremona move only when s >= 3, so seed them explicitly.
    if max_degree >= 1 {
        for i in 0..s {
            for j in i + 1..s {
                let mut m = vec![0i64; s];
                m[i] = 1;
                m[j] = 1;
                let seed = IntClass { d: 1, m };
                if seen.insert(seed.clone()) {
                    frontier.push(seed);
                }
            }
        }
    }
    if s >= 3 {
        while let Some(cur) = frontier.pop() {
            for i in 0..s {
                for j in i + 1..s {
                    for k in j + 1..s {
                        let sum = cur.m[i] + cur.m[j] + cur.m[k];
                        let d = 2 * cur.d - sum;
                        if d < 0 || d > max_degree {
                            continue;
                        }
                        let mut m = cur.m.clone();
                        m[i] = cur.d - cur.m[j] - cur.m[k];
                        m[j] = cur.d - cur.m[i] - cur.m[k];
                        m[k] = cur.d - cur.m[i] - cur.m[j];
                        let child = IntClass { d, m };
                        if seen.insert(child.clone()) {
                            frontier.push(child);
                        }
                    }
                }
            }
        }
    }
    let mut out: Vec<IntClass> = seen.into_iter().collect();
    out.sort_by(|a, b| (a.d, &a.m).cmp(&(b.d, &b.m)));
    out.iter()
        .map(|c| NegCurveClass::from_class(&c.to_class()).expect("orbit preserves (-1)"))
        .collect()
}

/// The enumerated `(-1)`-classes orthogonal to `cls`.
pub fn orthogonal_minus_one_classes(cls: &ClassVector, max_degree: i64) -> Result<Vec<NegCurveClass>> {
    let all = enumerate_minus_one_classes(cls.s(), max_degree);
    let mut out = Vec::new();
    for e in all {
        if e.class().intersect(cls)?.numer().is_zero() {
            out.push(e);
        }
    }
    Ok(out)
}

/// Direct Diophantine search for the `(-1)`-classes orthogonal to `cls` with
/// degree at most `max_degree`. Produces the same set as filtering
/// [`enumerate_minus_one_classes`], but stays tractable for large `s` and
/// degree bounds, because the orthogonality constraint prunes the tree hard.
///
/// Uses the exact shape of `(-1)`-classes: degree 0 ones are the `E_i`, and
/// positive-degree ones have multiplicities in `[0, max(1, d - 1)]`.
pub fn orthogonal_minus_one_search(
    cls: &ClassVector,
    max_degree: i64,
) -> Result<Vec<NegCurveClass>> {
    use num_bigint::BigInt;

    let ray = cls.to_ray()?;
    let s = ray.s();
    let big_d: BigInt = ray.degree().clone();
    let ms: Vec<BigInt> = ray.multiplicities().to_vec();

    let mut found: Vec<(i64, Vec<i64>)> = Vec::new();
    if max_degree >= 0 {
        for i in 0..s {
            if ms[i].is_zero() {
                let mut m = vec![0i64; s];
                m[i] = -1;
                found.push((0, m));
            }
        }
    }

    // visit slots in decreasing |m| so the pairing constraint bites early
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|a, b| ms[*b].magnitude().cmp(ms[*a].magnitude()));
    let m_ord: Vec<BigInt> = order.iter().map(|&i| ms[i].clone()).collect();
    // suffix sums of the positive and negative parts of m, for pairing bounds
    let mut pos_suffix = vec![BigInt::from(0); s + 1];
    let mut neg_suffix = vec![BigInt::from(0); s + 1];
    for i in (0..s).rev() {
        pos_suffix[i] = &pos_suffix[i + 1] + ms[order[i]].clone().max(BigInt::from(0));
        neg_suffix[i] = &neg_suffix[i + 1] + ms[order[i]].clone().min(BigInt::from(0));
    }

    struct Dfs<'a> {
        s: usize,
        h: i64,
        m_ord: &'a [BigInt],
        pos_suffix: &'a [BigInt],
        neg_suffix: &'a [BigInt],
        n: Vec<i64>,
        hits: Vec<Vec<i64>>,
    }
    impl Dfs<'_> {
        fn go(&mut self, idx: usize, rem_sum: i64, rem_sq: i64, rem_pair: BigInt) {
            if idx == self.s {
                if rem_sum == 0 && rem_sq == 0 && rem_pair.is_zero() {
                    self.hits.push(self.n.clone());
                }
                return;
            }
            let r = (self.s - idx) as i64;
            if rem_sum < 0 || rem_sum > r * self.h || rem_sq < 0 {
                return;
            }
            // sum n_i^2 <= h sum n_i, and (sum n_i)^2 <= r sum n_i^2
            if rem_sq > rem_sum * self.h || rem_sum * rem_sum > r * rem_sq {
                return;
            }
            if rem_pair > &self.pos_suffix[idx] * self.h || rem_pair < &self.neg_suffix[idx] * self.h
            {
                return;
            }
            let top = self.h.min(rem_sum);
            for v in 0..=top {
                if v * v > rem_sq {
                    break;
                }
                self.n[idx] = v;
                self.go(
                    idx + 1,
                    rem_sum - v,
                    rem_sq - v * v,
                    &rem_pair - &self.m_ord[idx] * v,
                );
            }
            self.n[idx] = 0;
        }
    }

    for d in 1..=max_degree {
        let mut dfs = Dfs {
            s,
            h: if d == 1 { 1 } else { d - 1 },
            m_ord: &m_ord,
            pos_suffix: &pos_suffix,
            neg_suffix: &neg_suffix,
            n: vec![0; s],
            hits: Vec::new(),
        };
        dfs.go(0, 3 * d - 1, d * d + 1, &big_d * d);
        for hit in dfs.hits {
            let mut m = vec![0i64; s];
            for (slot, v) in order.iter().zip(&hit) {
                m[*slot] = *v;
            }
            found.push((d, m));
        }
    }

    found.sort();
    found
        .into_iter()
        .map(|(d, m)| NegCurveClass::from_class(&ClassVector::from_i64(d, &m)))
        .collect()
}

/// `true` iff every distinct pair intersects in zero.
pub fn are_pairwise_disjoint(curves: &[NegCurveClass]) -> Result<bool> {
    for (a_idx, a) in curves.iter().enumerate() {
        for b in &curves[a_idx + 1..] {
            if !a.class().intersect(&b.class())?.numer().is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `candidates` contains `size` pairwise disjoint classes
/// (backtracking over the conflict graph).
pub fn contains_disjoint_subset(candidates: &[NegCurveClass], size: usize) -> Result<bool> {
    if size == 0 {
        return Ok(true);
    }
    if candidates.len() < size {
        return Ok(false);
    }
    let n = candidates.len();
    let mut meets = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = candidates[i].class().intersect(&candidates[j].class())?;
            let hit = !v.numer().is_zero();
            meets[i][j] = hit;
            meets[j][i] = hit;
        }
    }
    fn search(meets: &[Vec<bool>], chosen: &mut Vec<usize>, start: usize, size: usize) -> bool {
        if chosen.len() == size {
            return true;
        }
        for cand in start..meets.len() {
            if meets.len() - cand < size - chosen.len() {
                return false;
            }
            if chosen.iter().all(|&c| !meets[c][cand]) {
                chosen.push(cand);
                if search(meets, chosen, cand + 1, size) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    Ok(search(&meets, &mut Vec::new(), 0, size))
}
