//! Closed-form bounds: effective deviation bound, ball comparison bound,
//! termwise error-term bound and genus arithmetic.

use num_complex::Complex;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::hyperbolic::{Cayley, Model, ModelPoint, MoebiusMap, OrbitPair};
use crate::scalar::Real;

/// Inputs of the effective bound on `|4π|K|_hyp - 1|` for a compact level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveInputs<T> {
    pub genus: u64,
    pub tau: T,
    pub index: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveBound<T> {
    /// `(C/π) (g-1)^{1/3} e^{-τ/3}` with `C = 12·3^{2/3}`.
    pub value: T,
    /// `C` as `18·4·24^{-1/3}`.
    pub constant: T,
    /// `|18·4·24^{-1/3} - 12·3^{2/3}|`.
    pub constant_residual: T,
}

/// Relative slack allowed when testing `τ >= log 3`, so that `log 3` itself,
/// however it was rounded, is accepted.
const VALIDITY_SLACK: f64 = 1e-12;

pub fn effective_bound_rhs<T: Real>(inp: &EffectiveInputs<T>) -> Result<EffectiveBound<T>> {
    if inp.genus < 2 {
        return Err(Error::InvalidArgument(format!("genus must be at least 2, got {}", inp.genus)));
    }
    if inp.index == Some(0) {
        return Err(Error::InvalidArgument("index must be at least 1".into()));
    }
    let log3 = T::lit(3.0).ln();
    if !(inp.tau >= log3 * (T::one() - T::lit(VALIDITY_SLACK))) {
        return Err(Error::InvalidArgument(format!(
            "injectivity radius {} is below log 3, where the bound is not established",
            inp.tau
        )));
    }
    let third = T::one() / T::lit(3.0);
    let constant = T::lit(18.0 * 4.0) * T::lit(24.0).powf(-third);
    let closed = T::lit(12.0) * T::lit(3.0).powf(T::lit(2.0) * third);
    let g1 = T::from_u64(inp.genus - 1).unwrap_or_else(T::infinity);
    let value = closed / T::PI() * g1.cbrt() * (-inp.tau * third).exp();
    Ok(EffectiveBound {
        value,
        constant,
        constant_residual: (constant - closed).abs(),
    })
}

/// `(1/π) e^τ / (e^τ - 1)^2`: bound on `|K|_hyp - 1/(4π)` at a point of injectivity radius `τ`.
pub fn upper_bound_31<T: Real>(tau: T) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {tau}")));
    }
    if tau.is_infinite() {
        return Ok(T::zero());
    }
    let em = (-tau).exp_m1();
    Ok((-tau).exp() / (T::PI() * em * em))
}

/// `|K_D(z, γw) conj(γ'(w))| <= (1 - |γ(0)|^2) / (π (1-|z|)^2 (1-|w|)^2)`, with a
/// rounding allowance of `64 ε`. Half-plane inputs are moved to the disc first.
pub fn termwise_ej_inequality<T: Real>(gamma: &MoebiusMap<T>, z: &ModelPoint<T>, w: &ModelPoint<T>) -> bool {
    let g = match gamma.model() {
        Model::Disc => *gamma,
        Model::HalfPlane => gamma.cayley(),
    };
    let (zd, _) = z.to_disc_with_derivative();
    let (wd, _) = w.to_disc_with_derivative();
    termwise_ej_inequality_disc(&g, zd, wd)
}

pub(crate) fn termwise_ej_inequality_disc<T: Real>(g: &MoebiusMap<T>, z: Complex<T>, w: Complex<T>) -> bool {
    let lhs = OrbitPair::new(g, z, w).kernel_term().norm();
    let a = T::one() - z.norm();
    let b = T::one() - w.norm();
    let rhs = g.origin_displacement_sq() / (T::PI() * a * a * b * b);
    lhs <= rhs * (T::one() + T::lit(64.0) * T::epsilon())
}

/// Genus of an index-`index` cover of a genus-`g` surface and `g_j / index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenusBookkeeping {
    pub genus: u64,
    pub index: u64,
    pub cover_genus: u64,
    pub ratio: Ratio<i128>,
}

/// `g_j = index (g - 1) + 1`, from equating hyperbolic areas `4π(g_j - 1) = index · 4π(g - 1)`.
pub fn genus_bookkeeping(genus: u64, index: u64) -> Result<GenusBookkeeping> {
    if genus < 2 {
        return Err(Error::InvalidArgument(format!("genus must be at least 2, got {genus}")));
    }
    if index == 0 {
        return Err(Error::InvalidArgument("index must be at least 1".into()));
    }
    let cover_genus = index
        .checked_mul(genus - 1)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| Error::InvalidArgument(format!("cover genus overflows for g={genus}, index={index}")))?;
    let ratio = Ratio::new(i128::from(cover_genus), i128::from(index));
    let expected = Ratio::from_integer(i128::from(genus - 1)) + Ratio::new(1, i128::from(index));
    if ratio != expected || cover_genus - 1 != index * (genus - 1) {
        return Err(Error::InvalidArgument("genus identity failed".into()));
    }
    Ok(GenusBookkeeping {
        genus,
        index,
        cover_genus,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate_ball, GroupSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn effective_examples() {
        let log3 = 3f64.ln();
        let b = effective_bound_rhs(&EffectiveInputs { genus: 2, tau: log3, index: None }).unwrap();
        assert!((b.value - 12.0 * 3f64.cbrt() / PI).abs() < 1e-12);
        assert!((b.value - 5.508987558878065).abs() < 1e-12);
        assert!(b.constant_residual < 1e-14);
        assert!((b.constant - 24.96100587662285).abs() < 1e-13);
        let b6 = effective_bound_rhs(&EffectiveInputs { genus: 2, tau: 6.0f64, index: None }).unwrap();
        assert!((b6.value - 1.0752841544633291).abs() < 1e-13);
        assert!(effective_bound_rhs(&EffectiveInputs { genus: 2, tau: 1.0, index: None }).is_err());
        assert!(effective_bound_rhs(&EffectiveInputs { genus: 1, tau: 2.0, index: None }).is_err());
    }

    #[test]
    fn effective_monotone() {
        let f = |g, t| effective_bound_rhs(&EffectiveInputs { genus: g, tau: t, index: None }).unwrap().value;
        assert!(f(2, 2.0) > f(2, 3.0));
        assert!(f(3, 2.0) > f(2, 2.0));
    }

    #[test]
    fn ball_comparison_bound() {
        assert!((upper_bound_31(3f64.ln()).unwrap() - 3.0 / (4.0 * PI)).abs() < 1e-14);
        assert_eq!(upper_bound_31(f64::INFINITY).unwrap(), 0.0);
        assert!(upper_bound_31(800.0).unwrap() < 1e-300);
        assert!(upper_bound_31(0.0).is_err());
    }

    #[test]
    fn termwise_identity_and_stress() {
        let id = MoebiusMap::<f64>::identity(Model::Disc);
        let z = ModelPoint::disc(0.95, 0.0).unwrap();
        let w = ModelPoint::disc(0.0, 0.95).unwrap();
        assert!(termwise_ej_inequality(&id, &z, &w));
        let g = GroupSpec::schottky_rank2(2.0).unwrap();
        let ball = enumerate_ball(&g, 5).unwrap();
        for e in ball.elements() {
            for (z, w) in [(0.95, 0.95), (-0.95, 0.95), (0.0, -0.95)] {
                let z = ModelPoint::disc(z, 0.0).unwrap();
                let w = ModelPoint::disc(0.0, w).unwrap();
                assert!(termwise_ej_inequality(&e.map, &z, &w), "{}", e.word);
            }
        }
    }

    #[test]
    fn genus_examples() {
        assert_eq!(genus_bookkeeping(2, 1).unwrap().cover_genus, 2);
        assert_eq!(genus_bookkeeping(2, 3).unwrap().cover_genus, 4);
        let b = genus_bookkeeping(3, 5).unwrap();
        assert_eq!(b.cover_genus, 11);
        assert_eq!(b.ratio, Ratio::new(11, 5));
        assert!(genus_bookkeeping(1, 3).is_err());
        assert!(genus_bookkeeping(2, 0).is_err());
        assert!(genus_bookkeeping(u64::MAX, 3).is_err());
    }

    proptest! {
        #[test]
        fn genus_ratio_identity(g in 2u64..10_000, idx in 1u64..1_000_000) {
            let b = genus_bookkeeping(g, idx).unwrap();
            prop_assert_eq!(b.ratio - Ratio::from_integer(i128::from(g - 1)), Ratio::new(1, i128::from(idx)));
        }

        #[test]
        fn termwise_random_points(zr in 0.0f64..0.97, za in 0.0f64..6.3, wr in 0.0f64..0.97, wa in 0.0f64..6.3, k in 0usize..161) {
            let g = GroupSpec::schottky_rank2(1.6).unwrap();
            let ball = enumerate_ball(&g, 4).unwrap();
            let e = &ball.elements()[k];
            let z = ModelPoint::new(Complex::from_polar(zr, za), Model::Disc).unwrap();
            let w = ModelPoint::new(Complex::from_polar(wr, wa), Model::Disc).unwrap();
            prop_assert!(termwise_ej_inequality(&e.map, &z, &w));
        }
    }
}
