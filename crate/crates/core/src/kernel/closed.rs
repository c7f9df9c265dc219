//! Closed-form Bergman kernels and the annulus oracle.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hyperbolic::{Model, ModelPoint};
use crate::scalar::Real;
use crate::summation::CompensatedComplex;

/// `1 / (π (1 - z w̄)^2)`.
#[inline]
pub fn disc_kernel<T: Real>(z: Complex<T>, w: Complex<T>) -> Complex<T> {
    let s = Complex::new(T::one(), T::zero()) - z * w.conj();
    (s * s * T::PI()).inv()
}

/// Kernel of the disc of radius `r` about the origin: `r^2 / (π (r^2 - z w̄)^2)`.
#[inline]
pub fn radius_disc_kernel<T: Real>(r: T, z: Complex<T>, w: Complex<T>) -> Complex<T> {
    let s = Complex::new(r * r, T::zero()) - z * w.conj();
    Complex::new(r * r, T::zero()) / (s * s * T::PI())
}

/// `-1 / (π (z - w̄)^2)`.
#[inline]
pub fn halfplane_kernel<T: Real>(z: Complex<T>, w: Complex<T>) -> Complex<T> {
    let s = z - w.conj();
    -(s * s * T::PI()).inv()
}

/// Hyperbolic pointwise norm of a kernel diagonal: `K (1-|z|^2)^2 / 4` on the
/// disc, `K (Im z)^2` on the half-plane.
pub fn hyp_norm_diag<T: Real>(k: Complex<T>, z: &ModelPoint<T>) -> Result<T> {
    if !(k.re > T::zero()) || !k.re.is_finite() {
        return Err(Error::NonPositiveKernel(k.re.to_f64_lossy()));
    }
    Ok(k.re * z.hyp_factor())
}

/// Bergman kernel of `{ρ < |ζ| < 1}` from the orthonormal monomials `ζ^n`, `|n| <= N`.
pub fn annulus_kernel_oracle<T: Real>(rho: T, z: Complex<T>, w: Complex<T>, n_max: usize) -> Result<Complex<T>> {
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::InvalidArgument(format!("annulus modulus {rho} not in (0, 1)")));
    }
    for p in [z, w] {
        let r = p.norm();
        if !(r > rho && r < T::one()) {
            return Err(Error::OutsideModel {
                re: p.re.to_f64_lossy(),
                im: p.im.to_f64_lossy(),
                model: Model::Disc,
            });
        }
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("annulus series needs N >= 1".into()));
    }
    let pi = T::PI();
    let rho2 = rho * rho;
    let zw = z * w.conj();
    let mut acc = CompensatedComplex::new();
    // n >= 0: ‖ζ^n‖² = π(1 - ρ^{2n+2})/(n+1)
    let mut pow = Complex::new(T::one(), T::zero());
    let mut rho_pow = rho2;
    for n in 0..=n_max {
        let np1 = T::from_usize_lossy(n + 1);
        acc.add(pow * np1 / (pi * (T::one() - rho_pow)));
        pow = pow * zw;
        rho_pow = rho_pow * rho2;
    }
    // n = -1: ‖ζ^{-1}‖² = 2π log(1/ρ)
    acc.add(zw.inv() / (T::lit(2.0) * pi * (-rho.ln())));
    // n = -k, k >= 2, rewritten with (ρ²/(z w̄))^k to stay bounded
    let ratio = zw.inv() * rho2;
    let mut pow = ratio * ratio;
    let mut rho_pow = rho2;
    for k in 2..=n_max {
        let km1 = T::from_usize_lossy(k - 1);
        acc.add(pow * km1 / (pi * rho2 * (T::one() - rho_pow)));
        pow = pow * ratio;
        rho_pow = rho_pow * rho2;
    }
    Ok(acc.value())
}

/// `‖ζ^n‖²` in `L²({ρ < |ζ| < 1})`.
pub fn annulus_monomial_norm_sq<T: Real>(rho: T, n: i64) -> T {
    let pi = T::PI();
    if n == -1 {
        return T::lit(2.0) * pi * (-rho.ln());
    }
    let np1 = T::from_i64(n + 1).unwrap_or_else(T::nan);
    let e = T::from_i64(2 * n + 2).unwrap_or_else(T::nan);
    pi * (T::one() - rho.powf(e)) / np1
}

/// Modulus `ρ = exp(-2π²/log λ)` of the annulus `H / <w -> λw>`.
pub fn annulus_modulus<T: Real>(lambda: T) -> Result<T> {
    if !(lambda > T::one()) {
        return Err(Error::InvalidArgument(format!("dilation factor {lambda} must exceed 1")));
    }
    let pi = T::PI();
    Ok((-(T::lit(2.0) * pi * pi) / lambda.ln()).exp())
}

/// Covering map `p(ζ) = exp(2πi log ζ / log λ)` from the half-plane onto the
/// annulus, together with `p'(ζ)`.
pub fn annulus_covering_map<T: Real>(lambda: T, zeta: Complex<T>) -> (Complex<T>, Complex<T>) {
    let two_pi_i = Complex::new(T::zero(), T::lit(2.0) * T::PI());
    let l = lambda.ln();
    let p = (two_pi_i * zeta.ln() / l).exp();
    (p, p * two_pi_i / (zeta * l))
}

/// Pull-back of the annulus kernel to the half-plane:
/// `K_A(p(z), p(w)) p'(z) conj(p'(w))`.
pub fn annulus_pullback_oracle<T: Real>(
    lambda: T,
    z: &ModelPoint<T>,
    w: &ModelPoint<T>,
    n_max: usize,
) -> Result<Complex<T>> {
    for p in [z, w] {
        if p.model() != Model::HalfPlane {
            return Err(Error::ModelMismatch {
                expected: Model::HalfPlane,
                found: p.model(),
            });
        }
    }
    let rho = annulus_modulus(lambda)?;
    let (pz, dz) = annulus_covering_map(lambda, z.coordinate());
    let (pw, dw) = annulus_covering_map(lambda, w.coordinate());
    Ok(annulus_kernel_oracle(rho, pz, pw, n_max)? * dz * dw.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::Cayley;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn disc_kernel_examples() {
        assert!((disc_kernel(c(0.0, 0.0), c(0.0, 0.0)) - c(1.0 / PI, 0.0)).norm() < 1e-16);
        assert!((disc_kernel(c(0.5, 0.0), c(0.5, 0.0)) - c(16.0 / (9.0 * PI), 0.0)).norm() < 1e-15);
        let z = c(0.3, -0.6);
        let w = c(-0.1, 0.45);
        assert!((disc_kernel(z, w) - disc_kernel(w, z).conj()).norm() < 1e-15);
        for zz in [c(0.0, 0.0), c(0.5, 0.1), c(-0.9, 0.3)] {
            let p = ModelPoint::new(zz, Model::Disc).unwrap();
            let n = hyp_norm_diag(disc_kernel(zz, zz), &p).unwrap();
            assert!((n - 1.0 / (4.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn halfplane_kernel_examples() {
        let i = c(0.0, 1.0);
        assert!((halfplane_kernel(i, i) - c(1.0 / (4.0 * PI), 0.0)).norm() < 1e-16);
        let z = ModelPoint::halfplane(0.3, 0.7).unwrap();
        let w = ModelPoint::halfplane(-1.2, 2.1).unwrap();
        let kh = halfplane_kernel(z.coordinate(), w.coordinate());
        assert!((kh - halfplane_kernel(w.coordinate(), z.coordinate()).conj()).norm() < 1e-15);
        // transformation rule through the Cayley map
        let (zd, dz) = z.to_disc_with_derivative();
        let (wd, dw) = w.to_disc_with_derivative();
        let via_disc = disc_kernel(zd, wd) * dz * dw.conj();
        assert!((via_disc - kh).norm() < 1e-12 * kh.norm());
        let _ = z.cayley();
    }

    #[test]
    fn hyp_norm_rejects_negative() {
        let p = ModelPoint::disc(0.1, 0.0).unwrap();
        assert!(matches!(hyp_norm_diag(c(-1.0, 0.0), &p), Err(Error::NonPositiveKernel(_))));
    }

    #[test]
    fn annulus_small_modulus_limit() {
        let z = c(0.3, 0.2);
        let w = c(-0.1, 0.5);
        // the n = -1 mode decays only like 1/log(1/ρ); every other extra term is O(ρ^2)
        let mut prev = f64::INFINITY;
        for rho in [1e-3, 1e-6, 1e-12] {
            let k = annulus_kernel_oracle(rho, z, w, 40).unwrap();
            let log_mode = (z * w.conj()).inv() / (2.0 * PI * (-f64::ln(rho)));
            assert!((k - disc_kernel(z, w) - log_mode).norm() < 100.0 * rho * rho + 1e-14);
            let gap = (k - disc_kernel(z, w)).norm();
            assert!(gap < prev);
            prev = gap;
        }
        let k2 = annulus_kernel_oracle(0.05, z, w, 60).unwrap();
        assert!((k2 - annulus_kernel_oracle(0.05, w, z, 60).unwrap().conj()).norm() < 1e-14);
    }

    #[test]
    fn monomial_norms_by_quadrature() {
        let rho: f64 = 0.3;
        assert!((annulus_monomial_norm_sq(rho, 0) - PI * (1.0 - rho * rho)).abs() < 1e-15);
        // ∫ r^{2n} dA over the annulus, midpoint rule in log r
        for n in [-3i64, -1, 0, 2] {
            let m = 20_000;
            let (a, b) = (rho.ln(), 0.0f64);
            let mut quad = 0.0;
            for k in 0..m {
                let t = a + (b - a) * (k as f64 + 0.5) / m as f64;
                let r = t.exp();
                quad += 2.0 * PI * r.powi(2 * n as i32) * r * r * (b - a) / m as f64;
            }
            let exact = annulus_monomial_norm_sq(rho, n);
            assert!((quad - exact).abs() < 1e-7 * exact, "n={n}");
        }
    }

    #[test]
    fn annulus_matches_direct_basis_sum() {
        let rho = 0.2;
        let z = c(0.5, 0.3);
        let w = c(-0.4, 0.35);
        let mut direct = c(0.0, 0.0);
        for n in -30i64..=30 {
            let zn = z.powi(n as i32);
            let wn = w.powi(n as i32);
            direct += zn * wn.conj() / annulus_monomial_norm_sq(rho, n);
        }
        let k = annulus_kernel_oracle(rho, z, w, 30).unwrap();
        assert!((k - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn annulus_domain_errors() {
        assert!(annulus_kernel_oracle(0.5, c(0.2, 0.0), c(0.7, 0.0), 10).is_err());
        assert!(annulus_kernel_oracle(1.5, c(0.2, 0.0), c(0.7, 0.0), 10).is_err());
    }

    #[test]
    fn covering_map_is_periodic() {
        let lambda = (2.0 * PI).exp();
        assert!((annulus_modulus(lambda).unwrap() - (-PI).exp()).abs() < 1e-16);
        let zeta = c(0.4, 1.3);
        let (p0, _) = annulus_covering_map(lambda, zeta);
        for k in -3i32..=3 {
            let (pk, _) = annulus_covering_map(lambda, zeta * lambda.powi(k));
            assert!((pk - p0).norm() < 1e-12, "k={k}");
        }
        let rho = annulus_modulus(lambda).unwrap();
        assert!(p0.norm() > rho && p0.norm() < 1.0);
    }
}
