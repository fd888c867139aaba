//! Exact arithmetic on the Picard lattice of a blowup of the plane at `s` points.
//!
//! A class is stored as `(d; m_1, ..., m_s)` and means `d*H - sum_i m_i * E_i`,
//! so effective plane-curve classes have nonnegative entries and the exceptional
//! class `E_i` itself has `d = 0`, `m_i = -1`. All coordinates are exact
//! rationals; no floating point enters this module.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `"num/den"`, or just `"num"` for integers.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"num"` or `"num/den"` into an exact rational.
pub fn rat_from_str(text: &str) -> std::result::Result<Rat, String> {
    let mut parts = text.splitn(2, '/');
    let numer: BigInt = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| format!("invalid rational {text:?}"))?;
    match parts.next() {
        None => Ok(Rat::from_integer(numer)),
        Some(d) => {
            let denom: BigInt = d
                .trim()
                .parse()
                .map_err(|_| format!("invalid rational {text:?}"))?;
            if denom.is_zero() {
                return Err(format!("zero denominator in {text:?}"));
            }
            Ok(Rat::new(numer, denom))
        }
    }
}

/// Serde adapter encoding rationals as `"num/den"` strings, matching the
/// class schema. Use with `#[serde(with = "crate::lattice::rat_serde")]`.
pub mod rat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> std::result::Result<S::Ok, S::Error> {
        rat_to_string(r).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Rat, D::Error> {
        let text = String::deserialize(de)?;
        rat_from_str(&text).map_err(D::Error::custom)
    }
}

/// Sign of a pairing value: negative, zero or positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignClass {
    Negative,
    Zero,
    Positive,
}

impl SignClass {
    pub fn of(r: &Rat) -> Self {
        match r.numer().sign() {
            num_bigint::Sign::Minus => SignClass::Negative,
            num_bigint::Sign::NoSign => SignClass::Zero,
            num_bigint::Sign::Plus => SignClass::Positive,
        }
    }
}

/// A point of `N_s`: degree plus `s` multiplicities, all exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassVector {
    d: Rat,
    m: Vec<Rat>,
}

impl ClassVector {
    pub fn new(d: Rat, m: Vec<Rat>) -> Self {
        assert!(!m.is_empty(), "a class needs at least one point");
        ClassVector { d, m }
    }

    pub fn from_i64(d: i64, m: &[i64]) -> Self {
        ClassVector::new(rat(d), m.iter().map(|&x| rat(x)).collect())
    }

    /// `L_d(m_1, ..., m_k, 0^{s-k})` — the paper's exponential shorthand spelled out.
    pub fn padded(d: i64, m: &[i64], s: usize) -> Self {
        assert!(m.len() <= s);
        let mut mult: Vec<Rat> = m.iter().map(|&x| rat(x)).collect();
        mult.resize(s, Rat::zero());
        ClassVector::new(rat(d), mult)
    }

    pub fn zero(s: usize) -> Self {
        ClassVector::new(Rat::zero(), vec![Rat::zero(); s])
    }

    /// The exceptional class `E_i` (1-based index).
    pub fn exceptional(s: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= s);
        let mut m = vec![Rat::zero(); s];
        m[i - 1] = -Rat::one();
        ClassVector::new(Rat::zero(), m)
    }

    /// The canonical class `K_s = -3H + sum E_i`, i.e. `(d; m) = (-3; -1, ..., -1)`.
    pub fn canonical(s: usize) -> Self {
        assert!(s >= 1);
        ClassVector::new(-rat(3), vec![-Rat::one(); s])
    }

    /// The base point `L_3(1^9, 0^{s-9})` of the quadric cone, for `s >= 9`.
    pub fn cubic_base(s: usize) -> Self {
        assert!(s >= 9);
        ClassVector::padded(3, &[1, 1, 1, 1, 1, 1, 1, 1, 1], s)
    }

    pub fn s(&self) -> usize {
        self.m.len()
    }

    pub fn degree(&self) -> &Rat {
        &self.d
    }

    pub fn multiplicities(&self) -> &[Rat] {
        &self.m
    }

    /// Multiplicity `m_i`, 1-based.
    pub fn mult(&self, i: usize) -> &Rat {
        &self.m[i - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.d.is_zero() && self.m.iter().all(Rat::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.d.denom().is_one() && self.m.iter().all(|x| x.denom().is_one())
    }

    pub fn sum_of_multiplicities(&self) -> Rat {
        self.m.iter().fold(Rat::zero(), |a, b| a + b)
    }

    /// Intersection pairing `d_A d_B - sum_i m_i(A) m_i(B)`.
    pub fn intersect(&self, other: &ClassVector) -> Result<Rat> {
        if self.s() != other.s() {
            return Err(Error::DimensionMismatch(self.s(), other.s()));
        }
        let mut acc = &self.d * &other.d;
        for (a, b) in self.m.iter().zip(&other.m) {
            acc -= a * b;
        }
        Ok(acc)
    }

    pub fn self_intersection(&self) -> Rat {
        self.intersect(self).expect("same dimension")
    }

    /// Pairing with the canonical class: `-3d + sum m_i`.
    pub fn k_pairing(&self) -> Rat {
        self.sum_of_multiplicities() - rat(3) * &self.d
    }

    pub fn scale(&self, c: &Rat) -> ClassVector {
        ClassVector::new(&self.d * c, self.m.iter().map(|x| x * c).collect())
    }

    /// Exact sign of the pairing with the de Fernex class `sqrt(s-1) H - sum E_i`,
    /// i.e. of `sqrt(s-1) d - sum m_i`, computed by squared comparison with
    /// explicit sign bookkeeping so no irrational arithmetic is needed.
    pub fn de_fernex_sign(&self) -> SignClass {
        let s = self.s();
        assert!(s >= 2, "de Fernex sign needs s >= 2");
        let d = &self.d;
        let t = self.sum_of_multiplicities();
        let d_sign = SignClass::of(d);
        let t_sign = SignClass::of(&t);
        match (d_sign, t_sign) {
            (SignClass::Zero, SignClass::Zero) => SignClass::Zero,
            // sqrt(s-1) d >= 0 and -T >= 0, not both zero
            (SignClass::Positive, SignClass::Negative)
            | (SignClass::Positive, SignClass::Zero)
            | (SignClass::Zero, SignClass::Negative) => SignClass::Positive,
            (SignClass::Negative, SignClass::Positive)
            | (SignClass::Negative, SignClass::Zero)
            | (SignClass::Zero, SignClass::Positive) => SignClass::Negative,
            // same strict sign: compare (s-1) d^2 with T^2 and flip for the negative branch
            (SignClass::Positive, SignClass::Positive) => {
                match (rat((s - 1) as i64) * d * d).cmp(&(&t * &t)) {
                    Ordering::Greater => SignClass::Positive,
                    Ordering::Equal => SignClass::Zero,
                    Ordering::Less => SignClass::Negative,
                }
            }
            (SignClass::Negative, SignClass::Negative) => {
                match (rat((s - 1) as i64) * d * d).cmp(&(&t * &t)) {
                    Ordering::Greater => SignClass::Negative,
                    Ordering::Equal => SignClass::Zero,
                    Ordering::Less => SignClass::Positive,
                }
            }
        }
    }

    /// Primitive integral representative of the ray through this class.
    pub fn to_ray(&self) -> Result<Ray> {
        Ray::from_class(self)
    }
}

impl fmt::Display for ClassVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L_{}(", rat_to_string(&self.d))?;
        for (k, x) in self.m.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", rat_to_string(x))?;
        }
        write!(f, ")")
    }
}

impl Add for &ClassVector {
    type Output = ClassVector;
    fn add(self, rhs: &ClassVector) -> ClassVector {
        assert_eq!(self.s(), rhs.s());
        ClassVector::new(
            &self.d + &rhs.d,
            self.m.iter().zip(&rhs.m).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &ClassVector {
    type Output = ClassVector;
    fn sub(self, rhs: &ClassVector) -> ClassVector {
        assert_eq!(self.s(), rhs.s());
        ClassVector::new(
            &self.d - &rhs.d,
            self.m.iter().zip(&rhs.m).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Neg for &ClassVector {
    type Output = ClassVector;
    fn neg(self) -> ClassVector {
        ClassVector::new(-&self.d, self.m.iter().map(|x| -x).collect())
    }
}

impl Mul<&Rat> for &ClassVector {
    type Output = ClassVector;
    fn mul(self, c: &Rat) -> ClassVector {
        self.scale(c)
    }
}

impl Serialize for ClassVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            s: usize,
            d: String,
            m: Vec<String>,
        }
        Repr {
            s: self.s(),
            d: rat_to_string(&self.d),
            m: self.m.iter().map(rat_to_string).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClassVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            s: usize,
            d: String,
            m: Vec<String>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if repr.m.len() != repr.s {
            return Err(D::Error::custom(format!(
                "class declares s = {} but has {} multiplicities",
                repr.s,
                repr.m.len()
            )));
        }
        let d = rat_from_str(&repr.d).map_err(D::Error::custom)?;
        let m = repr
            .m
            .iter()
            .map(|t| rat_from_str(t))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Ok(ClassVector::new(d, m))
    }
}

/// Primitive integral representative of a rational ray, with a fixed sign
/// normalization: degree positive, or for degree zero the first nonzero
/// multiplicity negative (so each `E_i` is its own normal form).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ray {
    d: BigInt,
    m: Vec<BigInt>,
}

impl Ray {
    pub fn from_class(cls: &ClassVector) -> Result<Ray> {
        if cls.is_zero() {
            return Err(Error::ZeroClass);
        }
        // clear denominators
        let mut lcm = cls.degree().denom().clone();
        for x in cls.multiplicities() {
            lcm = num_integer::lcm(lcm, x.denom().clone());
        }
        let lcm_rat = Rat::from_integer(lcm);
        let mut d = (cls.degree() * &lcm_rat).to_integer();
        let mut m: Vec<BigInt> = cls
            .multiplicities()
            .iter()
            .map(|x| (x * &lcm_rat).to_integer())
            .collect();
        // divide by content
        let mut content = d.abs();
        for x in &m {
            content = num_integer::gcd(content, x.abs());
        }
        d /= &content;
        for x in &mut m {
            *x /= &content;
        }
        // sign normalization
        let flip = if d.is_zero() {
            m.iter()
                .find(|x| !x.is_zero())
                .map(|x| x.is_positive())
                .unwrap_or(false)
        } else {
            d.is_negative()
        };
        if flip {
            d = -d;
            for x in &mut m {
                *x = -x.clone();
            }
        }
        Ok(Ray { d, m })
    }

    pub fn s(&self) -> usize {
        self.m.len()
    }

    pub fn degree(&self) -> &BigInt {
        &self.d
    }

    pub fn multiplicities(&self) -> &[BigInt] {
        &self.m
    }

    pub fn class(&self) -> ClassVector {
        ClassVector::new(
            Rat::from_integer(self.d.clone()),
            self.m.iter().map(|x| Rat::from_integer(x.clone())).collect(),
        )
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class())
    }
}

impl Serialize for Ray {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.class().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ray {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let cls = ClassVector::deserialize(deserializer)?;
        Ray::from_class(&cls).map_err(D::Error::custom)
    }
}

/// Signature of a quadratic form: positive / negative inertia plus radical dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub radical: usize,
}

/// A rational basis of the hyperplane `K_s^perp` inside `N_s`.
///
/// `(1; 3, 0, ..., 0)` together with the differences `E_i - E_{i+1}`.
pub fn kperp_basis(s: usize) -> Vec<ClassVector> {
    assert!(s >= 1);
    let mut basis = Vec::with_capacity(s);
    basis.push(ClassVector::padded(1, &[3], s));
    for i in 1..s {
        basis.push(&ClassVector::exceptional(s, i) - &ClassVector::exceptional(s, i + 1));
    }
    basis
}

/// Gram matrix of a list of classes under the intersection pairing.
pub fn gram_matrix(classes: &[ClassVector]) -> Result<Vec<Vec<Rat>>> {
    let n = classes.len();
    let mut g = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = classes[i].intersect(&classes[j])?;
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    Ok(g)
}

/// Signature of the intersection form restricted to `K_s^perp`, computed by
/// exact symmetric diagonalization over the rationals.
pub fn kperp_signature(s: usize) -> Signature {
    let basis = kperp_basis(s);
    let gram = gram_matrix(&basis).expect("well-formed basis");
    let (_, diag) = linalg::symmetric_diagonalize(&gram);
    signature_of_diagonal(&diag)
}

pub fn signature_of_diagonal(diag: &[Rat]) -> Signature {
    let mut sig = Signature {
        positive: 0,
        negative: 0,
        radical: 0,
    };
    for x in diag {
        match SignClass::of(x) {
            SignClass::Positive => sig.positive += 1,
            SignClass::Negative => sig.negative += 1,
            SignClass::Zero => sig.radical += 1,
        }
    }
    sig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intersection_examples() {
        let cubic = ClassVector::from_i64(3, &[1; 9]);
        assert_eq!(cubic.intersect(&cubic).unwrap(), rat(0));

        let e1 = ClassVector::exceptional(9, 1);
        assert_eq!(e1.intersect(&e1).unwrap(), rat(-1));

        // L_6(1^4, 2^8, 0) . K_13 = 2
        let l = ClassVector::from_i64(6, &[1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 0]);
        let k = ClassVector::canonical(13);
        assert_eq!(l.intersect(&k).unwrap(), rat(2));
        assert_eq!(l.k_pairing(), rat(2));
    }

    #[test]
    fn intersection_dimension_mismatch() {
        let a = ClassVector::from_i64(1, &[1, 1]);
        let b = ClassVector::from_i64(1, &[1, 1, 1]);
        assert!(matches!(
            a.intersect(&b),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn canonical_class_self_intersections() {
        assert_eq!(ClassVector::canonical(9).self_intersection(), rat(0));
        assert_eq!(ClassVector::canonical(10).self_intersection(), rat(-1));
        assert_eq!(ClassVector::canonical(3).self_intersection(), rat(6));
    }

    #[test]
    fn de_fernex_sign_of_canonical_class() {
        // sign of sqrt(s-1)(-3) + s: positive iff s^2 > 9(s-1)
        for s in 2..=20usize {
            let k = ClassVector::canonical(s);
            let lhs = (s * s) as i64;
            let rhs = 9 * (s as i64 - 1);
            // K_s has d = -3, T = -s; the value is s - 3 sqrt(s-1), whose sign
            // is that of s^2 - 9(s-1).
            let expected = match lhs.cmp(&rhs) {
                Ordering::Greater => SignClass::Positive,
                Ordering::Equal => SignClass::Zero,
                Ordering::Less => SignClass::Negative,
            };
            assert_eq!(k.de_fernex_sign(), expected, "s = {s}");
        }
        // spot values: s^2 - 9s + 9 > 0 for s >= 8, < 0 for 2 <= s <= 7
        assert_eq!(ClassVector::canonical(8).de_fernex_sign(), SignClass::Positive);
        assert_eq!(ClassVector::canonical(7).de_fernex_sign(), SignClass::Negative);
    }

    #[test]
    fn de_fernex_sign_examples() {
        let l = ClassVector::from_i64(6, &[1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 0]);
        assert_eq!(l.de_fernex_sign(), SignClass::Positive); // 12*36 = 432 > 400 = 20^2
        assert_eq!(ClassVector::zero(5).de_fernex_sign(), SignClass::Zero);
    }

    #[test]
    fn ray_normalization() {
        let half = ClassVector::new(
            rat_frac(3, 2),
            vec![
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat_frac(1, 2),
                rat(0),
            ],
        );
        let ray = half.to_ray().unwrap();
        assert_eq!(ray.class(), ClassVector::cubic_base(10));

        let doubled = ClassVector::padded(6, &[2; 9], 10);
        assert_eq!(doubled.to_ray().unwrap(), ray);

        let e1 = ClassVector::exceptional(10, 1);
        assert_eq!(e1.to_ray().unwrap().class(), e1);

        assert!(matches!(
            ClassVector::zero(4).to_ray(),
            Err(Error::ZeroClass)
        ));
    }

    #[test]
    fn kperp_signature_table() {
        for s in 2..=20usize {
            let sig = kperp_signature(s);
            if s < 9 {
                assert_eq!(
                    sig,
                    Signature {
                        positive: 0,
                        negative: s,
                        radical: 0
                    },
                    "s = {s}"
                );
            } else if s == 9 {
                assert_eq!(
                    sig,
                    Signature {
                        positive: 0,
                        negative: 8,
                        radical: 1
                    }
                );
            } else {
                assert_eq!(
                    sig,
                    Signature {
                        positive: 1,
                        negative: s - 1,
                        radical: 0
                    },
                    "s = {s}"
                );
            }
        }
    }

    #[test]
    fn class_json_round_trip() {
        let l = ClassVector::new(rat_frac(5, 3), vec![rat(1), rat_frac(-2, 7)]);
        let json = serde_json::to_string(&l).unwrap();
        assert!(json.contains("\"5/3\""));
        let back: ClassVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);

        let bad = r#"{"s": 3, "d": "1", "m": ["1", "2"]}"#;
        assert!(serde_json::from_str::<ClassVector>(bad).is_err());
    }
}
