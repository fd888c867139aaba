//! The quadric cone `Qperp_s` of classes with `L^2 = K_s . L = 0` and
//! nonnegative degree: membership, rational point sampling through the base
//! point `L_3(1^9, 0^{s-9})`, the certified nefness test, the `s = 10`
//! bijection onto `(-1)`-curves, orthogonal translate counting, and the
//! three-way equivalence harness.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cremona::{cremona_reduce, CKMove, CKWord, ReductionStatus};
use crate::error::{Error, Result};
use crate::lattice::{kperp_basis, rat, ClassVector, Rat, Ray, SignClass};
use crate::negcurves::{
    contains_disjoint_subset, enumerate_minus_one_classes, is_minus_one_class,
    orthogonal_minus_one_classes, NegCurveClass,
};

/// `true` iff `L^2 = 0`, `K . L = 0` and the degree is nonnegative.
pub fn on_qperp(cls: &ClassVector) -> bool {
    cls.self_intersection().is_zero()
        && cls.k_pairing().is_zero()
        && !cls.degree().is_negative()
}

/// The known rational point `L_3(1^9, 0^{s-9})` the stereographic
/// parametrization goes through.
pub fn base_point(s: usize) -> ClassVector {
    ClassVector::cubic_base(s)
}

/// A sampled rational point of the quadric cone, together with the direction
/// vector that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QperpSample {
    pub cls: Ray,
    pub parameter: ClassVector,
}

/// Stereographic parametrization through the base point: for a direction
/// `v` in `K^perp` with `v^2 != 0`, the line `P0 + t v` meets the quadric
/// again at `t = -2 (P0 . v) / v^2`.
pub fn sample_rational_point(s: usize, direction: &ClassVector) -> Result<QperpSample> {
    if s < 10 {
        return Err(Error::TooFewPoints { needed: 10, got: s });
    }
    if direction.s() != s {
        return Err(Error::DimensionMismatch(direction.s(), s));
    }
    if !direction.k_pairing().is_zero() {
        return Err(Error::InvalidDirection(
            "direction is not orthogonal to the canonical class".into(),
        ));
    }
    let vv = direction.self_intersection();
    if vv.is_zero() {
        return Err(Error::InvalidDirection(
            "direction has self-intersection zero".into(),
        ));
    }
    let p0 = base_point(s);
    if !direction.is_zero() && direction.to_ray()? == p0.to_ray()? {
        return Err(Error::InvalidDirection(
            "direction is proportional to the base point".into(),
        ));
    }
    let t = -rat(2) * p0.intersect(direction)? / vv;
    let point = &p0 + &direction.scale(&t);
    debug_assert!(point.self_intersection().is_zero());
    if point.degree().is_negative() {
        return Err(Error::InvalidDirection(
            "sampled point has negative degree; re-sample".into(),
        ));
    }
    let cls = point.to_ray()?;
    debug_assert!(on_qperp(&cls.class()));
    Ok(QperpSample {
        cls,
        parameter: direction.clone(),
    })
}

/// Random direction in `K^perp` with numerators and denominators uniform in
/// `[-bound, bound]`. With `restrict_points = Some(k)` the direction is
/// supported on the first `k` points only (the pullback of `K^perp` from the
/// blowup at `k` points).
pub fn sample_direction<R: Rng>(
    s: usize,
    rng: &mut R,
    bound: i64,
    restrict_points: Option<usize>,
) -> ClassVector {
    let basis = kperp_basis(s);
    let take = restrict_points.unwrap_or(s).min(s);
    let mut v = ClassVector::zero(s);
    for b in basis.iter().take(take) {
        let numer = rng.gen_range(-bound..=bound);
        let denom = rng.gen_range(1..=bound);
        let c = Rat::new(numer.into(), denom.into());
        v = &v + &b.scale(&c);
    }
    v
}

/// Samples integral points of `Qperp_s` by rejection over random directions.
pub fn sample_qperp_point<R: Rng>(s: usize, rng: &mut R, bound: i64) -> Ray {
    loop {
        let v = sample_direction(s, rng, bound, None);
        if let Ok(sample) = sample_rational_point(s, &v) {
            return sample.cls;
        }
    }
}

/// Random Cremona-Kantor word of the given length.
pub fn random_word<R: Rng>(s: usize, rng: &mut R, len: usize) -> CKWord {
    let mut word = CKWord::identity();
    for _ in 0..len {
        if rng.gen_bool(0.8) {
            let mut idx: Vec<usize> = (1..=s).collect();
            for i in (1..s).rev() {
                let j = rng.gen_range(0..=i);
                idx.swap(i, j);
            }
            word.push(CKMove::Quadratic([idx[0], idx[1], idx[2]]));
        } else {
            let mut images: Vec<usize> = (1..=s).collect();
            for i in (1..s).rev() {
                let j = rng.gen_range(0..=i);
                images.swap(i, j);
            }
            word.push(CKMove::Permutation(images));
        }
    }
    word
}

/// Samples a nef integral point of `Qperp_s`: a pullback of a `Qperp_10`
/// point (nef by the `s = 10` result) pushed around by a random word, which
/// preserves nefness.
pub fn sample_nef_point<R: Rng>(s: usize, rng: &mut R, bound: i64, word_len: usize) -> Result<Ray> {
    assert!(s >= 10);
    let pullback = loop {
        let v = sample_direction(s, rng, bound, Some(10));
        if let Ok(sample) = sample_rational_point(s, &v) {
            break sample.cls;
        }
    };
    let word = random_word(s, rng, word_len);
    word.apply(&pullback.class())?.to_ray()
}

/// Equivalence datum for a nef class on the quadric cone: a word taking it to
/// `multiple` times a permutation of the base point, with unit multiplicities
/// exactly on `target_support`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NefCertificate {
    pub word: CKWord,
    #[serde(with = "crate::lattice::rat_serde")]
    pub multiple: Rat,
    /// 1-based indices of the nine unit slots in the reduced form.
    pub target_support: Vec<usize>,
}

/// A `(-1)`-class meeting the tested class negatively, pulled back through
/// the inverse of the reduction word.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonNefWitness {
    pub curve: NegCurveClass,
    #[serde(with = "crate::lattice::rat_serde")]
    pub value: Rat,
    pub word: CKWord,
}

/// Outcome of the nefness test.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum NefOutcome {
    Nef(NefCertificate),
    NotNef(NonNefWitness),
}

impl NefOutcome {
    pub fn is_nef(&self) -> bool {
        matches!(self, NefOutcome::Nef(_))
    }

    pub fn certificate(&self) -> Option<&NefCertificate> {
        match self {
            NefOutcome::Nef(c) => Some(c),
            NefOutcome::NotNef(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&NonNefWitness> {
        match self {
            NefOutcome::Nef(_) => None,
            NefOutcome::NotNef(w) => Some(w),
        }
    }
}

/// Checks that a reduced class on the quadric is `a` times a permutation of
/// the base point and returns `(a, support)`.
fn split_reduced_form(cls: &ClassVector) -> Result<(Rat, Vec<usize>)> {
    let a = cls.degree() / rat(3);
    if a <= Rat::zero() {
        return Err(Error::Internal(format!(
            "reduced quadric class {cls} has nonpositive degree"
        )));
    }
    let mut support = Vec::new();
    for i in 1..=cls.s() {
        let m = cls.mult(i);
        if *m == a {
            support.push(i);
        } else if !m.is_zero() {
            return Err(Error::Internal(format!(
                "reduced quadric class {cls} is not a multiple of the base point"
            )));
        }
    }
    if support.len() != 9 {
        return Err(Error::Internal(format!(
            "reduced quadric class {cls} has {} unit slots, expected 9",
            support.len()
        )));
    }
    Ok((a, support))
}

/// The algorithmic nefness test on the quadric cone. Reduction either halts
/// reduced — necessarily at a multiple of a permuted base point — or exposes a
/// negative multiplicity, whose exceptional class pulls back to a `(-1)`-curve
/// meeting the input negatively.
pub fn nefness_test(ray: &Ray) -> Result<NefOutcome> {
    let cls = ray.class();
    if !on_qperp(&cls) {
        return Err(Error::NotOnQperp);
    }
    let reduction = cremona_reduce(&cls)?;
    match reduction.status {
        ReductionStatus::Reduced => {
            let (multiple, target_support) = split_reduced_form(&reduction.final_class)?;
            Ok(NefOutcome::Nef(NefCertificate {
                word: reduction.word,
                multiple,
                target_support,
            }))
        }
        ReductionStatus::NegativeMultiplicity => {
            let i = reduction
                .negative_index
                .ok_or_else(|| Error::Internal("missing negative index".into()))?;
            let e_i = ClassVector::exceptional(cls.s(), i);
            let curve_cls = reduction.word.inverse().apply(&e_i)?;
            let curve = NegCurveClass::from_class(&curve_cls)?;
            let value = curve.class().intersect(&cls)?;
            if !value.is_negative() {
                return Err(Error::Internal(format!(
                    "pulled-back witness {curve} meets {cls} in {value}, expected negative"
                )));
            }
            Ok(NefOutcome::NotNef(NonNefWitness {
                curve,
                value,
                word: reduction.word,
            }))
        }
        ReductionStatus::NegativeDegree => {
            // K.L = 0 gives 3d = sum(m); with all multiplicities nonnegative a
            // negative degree is impossible, so the multiplicity halt always
            // fires first on the quadric.
            Err(Error::Internal(format!(
                "negative degree reached on the quadric cone for {cls}"
            )))
        }
    }
}

/// Replays a nefness certificate against the class it was issued for.
pub fn verify_nef_certificate(cls: &ClassVector, cert: &NefCertificate) -> Result<()> {
    if !on_qperp(cls) {
        return Err(Error::ReplayFailed("class is not on the quadric cone".into()));
    }
    let image = cert.word.apply(cls)?;
    if cert.target_support.len() != 9 {
        return Err(Error::ReplayFailed(format!(
            "support has {} slots, expected 9",
            cert.target_support.len()
        )));
    }
    if image.degree() != &(rat(3) * &cert.multiple) {
        return Err(Error::ReplayFailed(format!(
            "image degree {} does not match 3 * {}",
            image.degree(),
            cert.multiple
        )));
    }
    for i in 1..=image.s() {
        let expected = if cert.target_support.contains(&i) {
            cert.multiple.clone()
        } else {
            Rat::zero()
        };
        if image.mult(i) != &expected {
            return Err(Error::ReplayFailed(format!(
                "image multiplicity {i} is {}, expected {}",
                image.mult(i),
                expected
            )));
        }
    }
    Ok(())
}

/// Replays a non-nefness witness against the class it was issued for.
pub fn verify_non_nef_witness(cls: &ClassVector, witness: &NonNefWitness) -> Result<()> {
    if !is_minus_one_class(&witness.curve.class()) {
        return Err(Error::ReplayFailed("witness is not a (-1)-class".into()));
    }
    let value = witness.curve.class().intersect(cls)?;
    if value != witness.value || !value.is_negative() {
        return Err(Error::ReplayFailed(format!(
            "witness pairing is {value}, recorded {}",
            witness.value
        )));
    }
    Ok(())
}

/// The `s = 10` bijection: the unique `(-1)`-curve orthogonal to an integral
/// quadric class, obtained by pulling `E_10` back through the certificate
/// word (normalized so the reduced form's zero slot is slot 10).
pub fn phi_10(ray: &Ray) -> Result<NegCurveClass> {
    if ray.s() != 10 {
        return Err(Error::TooFewPoints {
            needed: 10,
            got: ray.s(),
        });
    }
    let outcome = nefness_test(ray)?;
    let cert = outcome.certificate().ok_or_else(|| {
        Error::Internal("every integral class on the s = 10 quadric cone is nef".into())
    })?;
    let zero_slot = (1..=10)
        .find(|i| !cert.target_support.contains(i))
        .ok_or_else(|| Error::Internal("certificate support covers all slots".into()))?;
    let mut word = cert.word.clone();
    if zero_slot != 10 {
        word.push(CKMove::transposition(10, zero_slot, 10));
    }
    let curve_cls = word.inverse().apply(&ClassVector::exceptional(10, 10))?;
    let curve = NegCurveClass::from_class(&curve_cls)?;
    let pairing = curve.class().intersect(&ray.class())?;
    if !pairing.is_zero() {
        return Err(Error::Internal(format!(
            "phi image {curve} is not orthogonal to {ray}"
        )));
    }
    Ok(curve)
}

/// The `s - 9` pairwise disjoint `(-1)`-classes orthogonal to a certified-nef
/// quadric class: the pullbacks of the exceptional classes on the zero slots
/// of its reduced form.
pub fn orthogonal_translate_curves(ray: &Ray, cert: &NefCertificate) -> Result<Vec<NegCurveClass>> {
    let s = ray.s();
    let cls = ray.class();
    let inverse = cert.word.inverse();
    let mut curves = Vec::with_capacity(s - 9);
    for j in 1..=s {
        if cert.target_support.contains(&j) {
            continue;
        }
        let curve_cls = inverse.apply(&ClassVector::exceptional(s, j))?;
        let curve = NegCurveClass::from_class(&curve_cls)?;
        if !curve.class().intersect(&cls)?.is_zero() {
            return Err(Error::Internal(format!(
                "translate curve {curve} is not orthogonal to {cls}"
            )));
        }
        curves.push(curve);
    }
    for (a, x) in curves.iter().enumerate() {
        for y in &curves[a + 1..] {
            if !x.class().intersect(&y.class())?.is_zero() {
                return Err(Error::Internal(format!(
                    "translate curves {x} and {y} are not disjoint"
                )));
            }
        }
    }
    Ok(curves)
}

/// Number of 9-dimensional nef subcones through a certified-nef rational ray:
/// always `s - 9`, witnessed by pairwise disjoint orthogonal `(-1)`-classes.
pub fn count_orthogonal_translates(ray: &Ray) -> Result<usize> {
    let outcome = nefness_test(ray)?;
    let cert = outcome.certificate().ok_or(Error::NotCertifiedNef)?;
    let curves = orthogonal_translate_curves(ray, cert)?;
    Ok(curves.len())
}

/// Report of the three-way equivalence check on an integral quadric class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub s: usize,
    pub class: ClassVector,
    /// (1) nefness via the certified test.
    pub nef: bool,
    /// (2) existence of `s - 10` pairwise disjoint orthogonal `(-1)`-classes.
    pub disjoint_curves_found: bool,
    /// (3) equivalence to a multiple of the base point, replayed.
    pub ck_equivalent: bool,
    /// Degree bound used by the condition-(2) search in the non-nef branch;
    /// a `false` there means "not found at this bound".
    pub search_bound: Option<i64>,
    pub outcome: NefOutcome,
}

/// Evaluates the three equivalent conditions independently and checks they
/// agree. The condition-(2) search in the non-nef branch is bounded by
/// `max_degree`; the nef branch produces exact witnesses instead.
pub fn theorem1_check(ray: &Ray, max_degree: i64) -> Result<Theorem1Report> {
    let table = orthogonal_minus_one_classes(&ray.class(), max_degree)?;
    theorem1_check_with_table(ray, max_degree, &table)
}

/// Same as [`theorem1_check`] but with a caller-provided list of the
/// `(-1)`-classes orthogonal to the ray, so batch drivers can enumerate once.
pub fn theorem1_check_with_table(
    ray: &Ray,
    max_degree: i64,
    orthogonal: &[NegCurveClass],
) -> Result<Theorem1Report> {
    let s = ray.s();
    if s < 10 {
        return Err(Error::TooFewPoints { needed: 10, got: s });
    }
    let cls = ray.class();
    if !on_qperp(&cls) {
        return Err(Error::NotOnQperp);
    }
    let outcome = nefness_test(ray)?;
    let nef = outcome.is_nef();

    let (disjoint_curves_found, search_bound) = match outcome.certificate() {
        Some(cert) => {
            // exact witnesses: any s - 10 of the s - 9 orthogonal translates
            let curves = orthogonal_translate_curves(ray, cert)?;
            if curves.len() != s - 9 {
                return Err(Error::Internal(format!(
                    "expected {} translate curves, found {}",
                    s - 9,
                    curves.len()
                )));
            }
            (true, None)
        }
        None => (
            contains_disjoint_subset(orthogonal, s - 10)?,
            Some(max_degree),
        ),
    };

    let ck_equivalent = match outcome.certificate() {
        Some(cert) => {
            verify_nef_certificate(&cls, cert)?;
            true
        }
        None => false,
    };

    if nef != disjoint_curves_found || nef != ck_equivalent {
        return Err(Error::Internal(format!(
            "equivalence violated for {cls}: nef = {nef}, curves = {disjoint_curves_found}, ck = {ck_equivalent}"
        )));
    }
    Ok(Theorem1Report {
        s,
        class: cls,
        nef,
        disjoint_curves_found,
        ck_equivalent,
        search_bound,
        outcome,
    })
}

/// Convenience: sign of the pairing with the de Fernex class, re-exported at
/// the cone level for report drivers.
pub fn de_fernex_sign(cls: &ClassVector) -> SignClass {
    cls.de_fernex_sign()
}

/// Enumeration hook used by batch drivers; kept here so the CLI has one entry
/// point for curve tables.
pub fn curve_table(s: usize, max_degree: i64) -> Vec<NegCurveClass> {
    enumerate_minus_one_classes(s, max_degree)
}
