//! The uncollision map: replace the `i`-th multiplicity `m_i` by `r^2` new
//! points of multiplicity `m_i / r`. It is linear and injective, preserves
//! self-intersection, and shifts the canonical pairing by `(r^2 - r) m_i / r`.
//! Applied to a certified-nef class on the quadric cone it produces a good
//! ray: rational, degree positive, self-intersection zero and non-effective.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kperp::{nefness_test, verify_nef_certificate, NefCertificate};
use crate::lattice::{rat, ClassVector, Rat, Ray};

/// Removes slot `i` (1-based) and appends `r^2` slots of multiplicity
/// `m_i / r`. Degree and the other multiplicities are unchanged, so the
/// result lives on `s + r^2 - 1` points.
pub fn uncollide(cls: &ClassVector, i: usize, r: usize) -> Result<ClassVector> {
    if r < 2 {
        return Err(Error::BadUncollisionFactor(r));
    }
    if i < 1 || i > cls.s() {
        return Err(Error::IndexOutOfRange {
            index: i,
            s: cls.s(),
        });
    }
    let part = cls.mult(i) / rat(r as i64);
    let mut m: Vec<Rat> = cls
        .multiplicities()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i - 1)
        .map(|(_, x)| x.clone())
        .collect();
    m.extend(std::iter::repeat(part).take(r * r));
    Ok(ClassVector::new(cls.degree().clone(), m))
}

/// Checks `L^2 = Uncoll_r(L, i)^2` exactly; always true, since
/// `m_i^2 = r^2 (m_i / r)^2`.
pub fn self_intersection_preserved(cls: &ClassVector, i: usize, r: usize) -> Result<bool> {
    let image = uncollide(cls, i, r)?;
    Ok(image.self_intersection() == cls.self_intersection())
}

/// The canonical-pairing shift `Uncoll_r(L, i) . K - L . K`, asserted to
/// equal `(r^2 - r) m_i / r` exactly.
pub fn canonical_shift(cls: &ClassVector, i: usize, r: usize) -> Result<Rat> {
    let image = uncollide(cls, i, r)?;
    let shift = image.k_pairing() - cls.k_pairing();
    let expected = rat((r * r - r) as i64) * cls.mult(i) / rat(r as i64);
    if shift != expected {
        return Err(Error::Internal(format!(
            "canonical shift {shift} does not match (r^2 - r) m_i / r = {expected}"
        )));
    }
    Ok(shift)
}

/// Which branch of the non-effectivity inference applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaBranch {
    /// `r = 2`: sections on the degenerate surface are bounded by `m`, and
    /// `1 <= m` holds for the (possibly doubled) representative.
    A,
    /// `r >= 3`: the restricted system has at most one section.
    B,
}

/// The only section-count fact this crate ever uses: translates of positive
/// multiples of the base point have a 1-dimensional space of sections.
pub const H0_JUSTIFICATION: &str = "CK-orbit of multiple of L_3(1^9,0^(s-9))";

/// A record proving a ray is good: the uncollided ray, the certified-nef
/// source it came from, and the branch justifying non-effectivity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoodRayCertificate {
    /// Primitive ray on `s + r^2 - 1` points with `ray^2 = 0`, degree > 0.
    pub ray: Ray,
    /// The nef source class on the quadric cone.
    pub source: Ray,
    /// Nefness certificate for the source.
    pub source_certificate: NefCertificate,
    /// 1-based slot that was uncollided.
    pub index: usize,
    /// Uncollision factor `r`.
    pub factor: usize,
    pub lemma_branch: LemmaBranch,
    /// For branch A: the multiplicity `m = m_i / 2` of the representative,
    /// recorded with the inequality `1 <= m` it must satisfy.
    #[serde(with = "crate::lattice::rat_serde")]
    pub branch_multiplicity: Rat,
    /// Section-count bound used (always 1) and where it comes from.
    pub h0_bound_used: u32,
    pub h0_justification: String,
}

/// Deterministic representative the certificate pipeline uncollides: the
/// primitive class, doubled when `r = 2` and `m_i` is odd so the new
/// multiplicities stay integral. Rays are scale-invariant, so this changes
/// nothing about the ray being certified.
fn certified_representative(source: &Ray, i: usize, r: usize) -> ClassVector {
    let cls = source.class();
    if r == 2 && !(cls.mult(i) / rat(2)).is_integer() {
        cls.scale(&rat(2))
    } else {
        cls
    }
}

/// Certifies that `< Uncoll_r(L, i) >` is a good ray, for `L` a certified-nef
/// integral class on the quadric cone with `m_i > 0`.
pub fn certify_good_ray(source: &Ray, i: usize, r: usize) -> Result<GoodRayCertificate> {
    if r < 2 {
        return Err(Error::BadUncollisionFactor(r));
    }
    if i < 1 || i > source.s() {
        return Err(Error::IndexOutOfRange {
            index: i,
            s: source.s(),
        });
    }
    let outcome = nefness_test(source)?;
    let cert = outcome.certificate().ok_or(Error::NotCertifiedNef)?.clone();
    let cls = source.class();
    let mi = cls.mult(i);
    if mi.is_zero() {
        return Err(Error::BadUncollisionSlot {
            index: i,
            reason: "zero (nothing to uncollide)".into(),
        });
    }
    if mi.is_negative() {
        return Err(Error::BadUncollisionSlot {
            index: i,
            reason: format!("negative ({mi})"),
        });
    }

    let rep = certified_representative(source, i, r);
    canonical_shift(&rep, i, r)?; // asserts the pairing-shift identity
    let image = uncollide(&rep, i, r)?;
    if !image.self_intersection().is_zero() {
        return Err(Error::Internal(format!(
            "uncollision of {rep} has nonzero self-intersection"
        )));
    }
    if !image.degree().is_positive() {
        return Err(Error::Internal(format!(
            "uncollision of {rep} has nonpositive degree"
        )));
    }
    let ray = image.to_ray()?;

    let (lemma_branch, branch_multiplicity) = if r == 2 {
        let m = rep.mult(i) / rat(2);
        if m < rat(1) {
            return Err(Error::Internal(format!(
                "branch A needs 1 <= m, got m = {m}"
            )));
        }
        (LemmaBranch::A, m)
    } else {
        (LemmaBranch::B, rep.mult(i) / rat(r as i64))
    };

    Ok(GoodRayCertificate {
        ray,
        source: source.clone(),
        source_certificate: cert,
        index: i,
        factor: r,
        lemma_branch,
        branch_multiplicity,
        h0_bound_used: 1,
        h0_justification: H0_JUSTIFICATION.to_string(),
    })
}

/// Independent replay of a good-ray certificate: re-runs the nefness test on
/// the source, recomputes the uncollision and compares the ray bit-for-bit.
pub fn verify_good_ray_certificate(cert: &GoodRayCertificate) -> Result<()> {
    if cert.factor < 2 {
        return Err(Error::InvalidCertificate(format!(
            "factor {} is below 2",
            cert.factor
        )));
    }
    if cert.h0_bound_used != 1 || cert.h0_justification != H0_JUSTIFICATION {
        return Err(Error::InvalidCertificate(
            "unsupported section-count bound".into(),
        ));
    }
    verify_nef_certificate(&cert.source.class(), &cert.source_certificate)
        .map_err(|e| Error::ReplayFailed(format!("source nefness: {e}")))?;
    let expected_branch = if cert.factor == 2 {
        LemmaBranch::A
    } else {
        LemmaBranch::B
    };
    if cert.lemma_branch != expected_branch {
        return Err(Error::InvalidCertificate(format!(
            "branch {:?} does not match factor {}",
            cert.lemma_branch, cert.factor
        )));
    }
    let rep = certified_representative(&cert.source, cert.index, cert.factor);
    if cert.factor == 2 {
        let m = rep.mult(cert.index) / rat(2);
        if m != cert.branch_multiplicity || m < rat(1) {
            return Err(Error::ReplayFailed(format!(
                "branch A multiplicity replays as {m}, recorded {}",
                cert.branch_multiplicity
            )));
        }
    }
    canonical_shift(&rep, cert.index, cert.factor)?;
    let ray = uncollide(&rep, cert.index, cert.factor)?.to_ray()?;
    if ray != cert.ray {
        return Err(Error::ReplayFailed(format!(
            "uncollision replays as {ray}, certificate records {}",
            cert.ray
        )));
    }
    let cls = ray.class();
    if !cls.self_intersection().is_zero() || !cls.degree().is_positive() {
        return Err(Error::InvalidCertificate(
            "recorded ray is not a degree-positive isotropic class".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kperp::{sample_nef_point, sample_qperp_point};
    use crate::lattice::rat_frac;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uncollide_example() {
        // Uncoll_2(L_6(2^9, 0), 1) = L_6(2^8, 0, 1^4) on 13 points
        let l = ClassVector::padded(6, &[2; 9], 10);
        let image = uncollide(&l, 1, 2).unwrap();
        assert_eq!(
            image,
            ClassVector::from_i64(6, &[2, 2, 2, 2, 2, 2, 2, 2, 0, 1, 1, 1, 1])
        );
        assert_eq!(image.self_intersection(), rat(0));
        assert!(self_intersection_preserved(&l, 1, 2).unwrap());
    }

    #[test]
    fn uncollide_zero_slot() {
        let l = ClassVector::padded(6, &[2; 9], 10); // m_10 = 0
        let image = uncollide(&l, 10, 3).unwrap();
        assert_eq!(image.s(), 18);
        assert_eq!(image.self_intersection(), l.self_intersection());
        assert!(image.multiplicities()[9..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn uncollide_rejects_bad_input() {
        let l = ClassVector::padded(6, &[2; 9], 10);
        assert!(matches!(
            uncollide(&l, 1, 1),
            Err(Error::BadUncollisionFactor(1))
        ));
        assert!(matches!(
            uncollide(&l, 11, 2),
            Err(Error::IndexOutOfRange { index: 11, s: 10 })
        ));
    }

    #[test]
    fn uncollision_is_linear_and_injective() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let a: Vec<i64> = (0..6).map(|_| rng.gen_range(-5..6)).collect();
            let b: Vec<i64> = (0..6).map(|_| rng.gen_range(-5..6)).collect();
            let la = ClassVector::from_i64(rng.gen_range(-5..6), &a);
            let lb = ClassVector::from_i64(rng.gen_range(-5..6), &b);
            let ca = rat_frac(rng.gen_range(-4..5), rng.gen_range(1..4));
            let cb = rat_frac(rng.gen_range(-4..5), rng.gen_range(1..4));
            let combo = &la.scale(&ca) + &lb.scale(&cb);
            let lhs = uncollide(&combo, 2, 3).unwrap();
            let rhs = &uncollide(&la, 2, 3).unwrap().scale(&ca)
                + &uncollide(&lb, 2, 3).unwrap().scale(&cb);
            assert_eq!(lhs, rhs);
        }
        // kernel check on a basis: the image of each basis vector is nonzero
        // and the images stay independent (distinct support pattern)
        let s = 5;
        let mut images = Vec::new();
        images.push(uncollide(&ClassVector::padded(1, &[], s), 1, 2).unwrap());
        for i in 1..=s {
            let e = ClassVector::exceptional(s, i);
            images.push(uncollide(&e, 1, 2).unwrap());
        }
        let rows: Vec<Vec<Rat>> = images
            .iter()
            .map(|c| {
                let mut row = vec![c.degree().clone()];
                row.extend(c.multiplicities().iter().cloned());
                row
            })
            .collect();
        assert_eq!(crate::linalg::rank(&rows), s + 1);
    }

    #[test]
    fn canonical_shift_examples() {
        let l = ClassVector::padded(6, &[2; 9], 10);
        assert_eq!(canonical_shift(&l, 1, 2).unwrap(), rat(2));
        // hence K_13 . L_6(2^8,0,1^4) = 2 since K_10 . L_6(2^9,0) = 0
        assert_eq!(uncollide(&l, 1, 2).unwrap().k_pairing(), rat(2));

        assert_eq!(canonical_shift(&l, 10, 4).unwrap(), rat(0)); // m_10 = 0

        let m3 = ClassVector::padded(9, &[3; 9], 10);
        assert_eq!(canonical_shift(&m3, 1, 3).unwrap(), rat(6));
        assert!(uncollide(&m3, 1, 3).unwrap().k_pairing().is_positive());
    }

    #[test]
    fn canonical_shift_random_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..200 {
            let m: Vec<i64> = (0..7).map(|_| rng.gen_range(-6..7)).collect();
            let l = ClassVector::from_i64(rng.gen_range(-6..7), &m);
            let i = rng.gen_range(1..=7);
            let r = rng.gen_range(2..=5);
            let shift = canonical_shift(&l, i, r).unwrap();
            assert_eq!(shift, rat((r * r - r) as i64) * l.mult(i) / rat(r as i64));
        }
    }

    #[test]
    fn good_ray_canonical_fixture() {
        // 2 L_3(1^9,0) on 10 points, slot 1, factor 2 -> < L_6(2^8,0,1^4) >
        let source = ClassVector::cubic_base(10)
            .scale(&rat(2))
            .to_ray()
            .unwrap();
        let cert = certify_good_ray(&source, 1, 2).unwrap();
        assert_eq!(
            cert.ray.class(),
            ClassVector::from_i64(6, &[2, 2, 2, 2, 2, 2, 2, 2, 0, 1, 1, 1, 1])
        );
        assert_eq!(cert.lemma_branch, LemmaBranch::A);
        assert_eq!(cert.branch_multiplicity, rat(1));
        assert_eq!(cert.ray.class().k_pairing(), rat(2));
        verify_good_ray_certificate(&cert).unwrap();
    }

    #[test]
    fn good_ray_factor_three() {
        // L_3(1^9,0), slot 1, factor 3 -> < L_9(3^8,0,1^9) > on 18 points
        let source = ClassVector::cubic_base(10).to_ray().unwrap();
        let cert = certify_good_ray(&source, 1, 3).unwrap();
        let mut expect = vec![3i64; 8];
        expect.push(0);
        expect.extend([1; 9]);
        assert_eq!(cert.ray.class(), ClassVector::from_i64(9, &expect));
        assert_eq!(cert.lemma_branch, LemmaBranch::B);
        assert!(cert.ray.class().k_pairing().is_positive());
        verify_good_ray_certificate(&cert).unwrap();
    }

    #[test]
    fn good_ray_rejects_bad_slots() {
        let source = ClassVector::cubic_base(10).to_ray().unwrap();
        assert!(matches!(
            certify_good_ray(&source, 10, 2),
            Err(Error::BadUncollisionSlot { index: 10, .. })
        ));
        // non-nef sources are rejected, not guessed about
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        loop {
            let p = sample_qperp_point(11, &mut rng, 15);
            match certify_good_ray(&p, 1, 2) {
                Err(Error::NotCertifiedNef) => break,
                Ok(_) | Err(Error::BadUncollisionSlot { .. }) => continue,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        // off-quadric input
        let e1 = ClassVector::exceptional(10, 1).to_ray().unwrap();
        assert!(matches!(
            certify_good_ray(&e1, 1, 2),
            Err(Error::NotOnQperp)
        ));
    }

    #[test]
    fn certificates_replay_for_random_nef_sources() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut done = 0;
        while done < 15 {
            let p = sample_nef_point(13, &mut rng, 8, 5).unwrap();
            let cls = p.class();
            let Some(i) = (1..=13).find(|&i| cls.mult(i).is_positive()) else {
                continue;
            };
            let cert = certify_good_ray(&p, i, 2).unwrap();
            verify_good_ray_certificate(&cert).unwrap();
            assert!(cert.ray.class().self_intersection().is_zero());
            assert!(cert.ray.class().k_pairing().is_positive());
            // scaling coherence: the doubled source certifies to the same ray
            let doubled = cls.scale(&rat(2)).to_ray().unwrap();
            let cert2 = certify_good_ray(&doubled, i, 2).unwrap();
            assert_eq!(cert2.ray, cert.ray);
            done += 1;
        }
    }

    #[test]
    fn certificate_json_round_trip() {
        let source = ClassVector::cubic_base(10)
            .scale(&rat(2))
            .to_ray()
            .unwrap();
        let cert = certify_good_ray(&source, 1, 2).unwrap();
        let json = serde_json::to_string_pretty(&cert).unwrap();
        let back: GoodRayCertificate = serde_json::from_str(&json).unwrap();
        verify_good_ray_certificate(&back).unwrap();
    }
}
