//! Finite-difference and quadrature consistency checks for kernel evaluators.

use num_complex::Complex;

use super::series::QuotientSeries;
use crate::error::{Error, Result};
use crate::groups::{GroupSpec, Membership};
use crate::hyperbolic::ModelPoint;
use crate::kernel::series::SeriesOptions;
use crate::scalar::Real;
use crate::summation::det_sum_complex;

pub const DEFAULT_STEP: f64 = 1e-3;

/// `∂∂̄ log K(z, z)`, a quarter of the Laplacian in `(Re z, Im z)`, from fourth-order
/// central differences on the 9-point cross `z ± h, z ± 2h, z ± ih, z ± 2ih`.
pub fn bergman_metric_fd<T, F>(kernel: F, z: &ModelPoint<T>, h: T) -> Result<T>
where
    T: Real,
    F: Fn(Complex<T>, Complex<T>) -> Result<Complex<T>>,
{
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    let c = z.coordinate();
    let log_k = |d: Complex<T>| -> Result<T> {
        let p = c + d;
        ModelPoint::new(p, z.model())?;
        let k = kernel(p, p)?;
        if !(k.re > T::zero()) || !k.re.is_finite() {
            return Err(Error::NonPositiveKernel(k.re.to_f64_lossy()));
        }
        Ok(k.re.ln())
    };
    let centre = log_k(Complex::new(T::zero(), T::zero()))?;
    let mut lap = -T::lit(60.0) * centre;
    for dir in [Complex::new(h, T::zero()), Complex::new(T::zero(), h)] {
        let near = log_k(dir)? + log_k(-dir)?;
        let far = log_k(dir * T::lit(2.0))? + log_k(-dir * T::lit(2.0))?;
        lap = lap + T::lit(16.0) * near - far;
    }
    Ok(lap / (T::lit(48.0) * h * h))
}

/// `∂_z ∂_w̄ f(z, w)` by mixed central differences (16 evaluations).
pub fn mixed_wirtinger_fd<T, F>(f: F, z: Complex<T>, w: Complex<T>, h: T) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(Complex<T>, Complex<T>) -> Result<T>,
{
    let re = Complex::new(h, T::zero());
    let im = Complex::new(T::zero(), h);
    let mixed = |u: Complex<T>, v: Complex<T>| -> Result<T> {
        let pp = f(z + u, w + v)?;
        let pm = f(z + u, w - v)?;
        let mp = f(z - u, w + v)?;
        let mm = f(z - u, w - v)?;
        Ok((pp - pm - mp + mm) / (T::lit(4.0) * h * h))
    };
    let xx = mixed(re, re)?;
    let yy = mixed(im, im)?;
    let xy = mixed(re, im)?;
    let yx = mixed(im, re)?;
    Ok(Complex::new(xx + yy, xy - yx) / T::lit(4.0))
}

/// `|Q(z, w) + (2/π) ∂_z ∂_w̄ g(z, w)|` for disc coordinates of a prepared series.
pub fn schiffer_residual<T: Real>(s: &QuotientSeries<T>, z: Complex<T>, w: Complex<T>, h: T) -> Result<T> {
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    let q = s.kernel_disc(z, w);
    let d = mixed_wirtinger_fd(|a, b| s.green_disc(a, b), z, w, h)?;
    Ok((q + d * (T::lit(2.0) / T::PI())).norm())
}

/// Schiffer consistency at a pair of points; half-plane points are moved to the disc.
pub fn schiffer_check<T: Real, P: Membership + ?Sized>(
    g: &GroupSpec<T>,
    pred: &P,
    z: &ModelPoint<T>,
    w: &ModelPoint<T>,
    h: T,
    opts: &SeriesOptions<T>,
) -> Result<T> {
    let gd = g.to_disc();
    let s = QuotientSeries::new(&gd, pred, opts)?;
    let (zd, _) = z.to_disc_with_derivative();
    let (wd, _) = w.to_disc_with_derivative();
    schiffer_residual(&s, zd, wd, h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureDomain<T> {
    /// `{|ζ| < radius}`, uniform radial nodes.
    Disc { radius: T },
    /// `{inner < |ζ| < outer}`, nodes uniform in `log |ζ|`.
    Annulus { inner: T, outer: T },
    /// The hyperbolic ball `B(0, tau)` of the unit disc, nodes uniform in hyperbolic radius.
    HypBall { tau: T },
}

impl<T: Real> QuadratureDomain<T> {
    pub fn contains(&self, z: Complex<T>) -> bool {
        let r = z.norm();
        match *self {
            QuadratureDomain::Disc { radius } => r < radius,
            QuadratureDomain::Annulus { inner, outer } => r > inner && r < outer,
            QuadratureDomain::HypBall { tau } => r < (tau / T::lit(2.0)).tanh(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            QuadratureDomain::Disc { radius } => radius > T::zero() && radius.is_finite(),
            QuadratureDomain::Annulus { inner, outer } => inner > T::zero() && outer > inner && outer.is_finite(),
            QuadratureDomain::HypBall { tau } => tau > T::zero() && tau.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!("degenerate domain {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self {
            radial: 400,
            angular: 400,
        }
    }
}

/// Tensor-product midpoint rule for `∫ f dA` over a disc or annulus about 0.
pub fn polar_integral<T, F>(domain: &QuadratureDomain<T>, grid: PolarGrid, f: F) -> Result<Complex<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> Complex<T> + Sync,
{
    domain.validate()?;
    if grid.radial == 0 || grid.angular == 0 {
        return Err(Error::InvalidArgument("quadrature grid must be non-empty".into()));
    }
    let nr = T::from_usize_lossy(grid.radial);
    let na = T::from_usize_lossy(grid.angular);
    let dtheta = T::lit(2.0) * T::PI() / na;
    let half = T::lit(0.5);
    // (radius, radial weight including the area Jacobian)
    let rings: Vec<(T, T)> = (0..grid.radial)
        .map(|k| {
            let t = (T::from_usize_lossy(k) + half) / nr;
            match *domain {
                QuadratureDomain::Disc { radius } => {
                    let r = radius * t;
                    (r, r * radius / nr)
                }
                QuadratureDomain::Annulus { inner, outer } => {
                    let (a, b) = (inner.ln(), outer.ln());
                    let r = (a + (b - a) * t).exp();
                    (r, r * r * (b - a) / nr)
                }
                QuadratureDomain::HypBall { tau } => {
                    let r = (tau * t / T::lit(2.0)).tanh();
                    (r, r * half * (T::one() - r * r) * tau / nr)
                }
            }
        })
        .collect();
    Ok(det_sum_complex(&rings, |&(r, wr)| {
        let mut acc = crate::summation::CompensatedComplex::new();
        for j in 0..grid.angular {
            let theta = (T::from_usize_lossy(j) + half) * dtheta;
            acc.add(f(Complex::from_polar(r, theta)));
        }
        acc.value() * (wr * dtheta)
    }))
}

/// `|f(z) - ∫ K(z, ζ) f(ζ) dA(ζ)|`.
pub fn reproducing_check<T, K, F>(
    kernel: K,
    f: F,
    z: Complex<T>,
    domain: &QuadratureDomain<T>,
    grid: PolarGrid,
) -> Result<T>
where
    T: Real,
    K: Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync,
    F: Fn(Complex<T>) -> Complex<T> + Sync,
{
    if !domain.contains(z) {
        return Err(Error::DomainMismatch(format!("z = {z} is not inside {domain:?}")));
    }
    let integral = polar_integral(domain, grid, |zeta| kernel(z, zeta) * f(zeta))?;
    Ok((f(z) - integral).norm())
}

/// Disc-model diagonal of an evaluator, for use with [`bergman_metric_fd`].
pub fn series_evaluator<T: Real>(s: &QuotientSeries<T>) -> impl Fn(Complex<T>, Complex<T>) -> Result<Complex<T>> + '_ {
    move |z, w| {
        let model = s.model();
        let zp = ModelPoint::new(z, model)?;
        let wp = ModelPoint::new(w, model)?;
        Ok(s.kernel(&zp, &wp)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{TrivialSubgroup, WholeGroup};
    use crate::hyperbolic::Model;
    use crate::kernel::closed::{annulus_kernel_oracle, disc_kernel, radius_disc_kernel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn disc_eval(z: Complex<f64>, w: Complex<f64>) -> Result<Complex<f64>> {
        Ok(disc_kernel(z, w))
    }

    #[test]
    fn metric_of_disc() {
        let h = 1e-3;
        let at0 = bergman_metric_fd(disc_eval, &ModelPoint::disc(0.0, 0.0).unwrap(), h).unwrap();
        assert!((at0 - 2.0).abs() < 1e-6);
        let at5 = bergman_metric_fd(disc_eval, &ModelPoint::disc(0.5, 0.0).unwrap(), h).unwrap();
        assert!((at5 - 32.0 / 9.0).abs() < 1e-5);
        let vals: Vec<f64> = (0..8)
            .map(|k| {
                let p = Complex::from_polar(0.3, k as f64 * PI / 4.0);
                bergman_metric_fd(disc_eval, &ModelPoint::new(p, Model::Disc).unwrap(), h).unwrap()
            })
            .collect();
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn metric_rejects_negative_kernel() {
        let bad = |_: Complex<f64>, _: Complex<f64>| Ok(c(-1.0, 0.0));
        assert!(matches!(
            bergman_metric_fd(bad, &ModelPoint::disc(0.0, 0.0).unwrap(), 1e-3),
            Err(Error::NonPositiveKernel(_))
        ));
    }

    #[test]
    fn schiffer_trivial_group() {
        let g = GroupSpec::<f64>::trivial(Model::Disc);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut n = 0;
        while n < 10 {
            let z = c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let w = c(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            if z.norm() > 0.6 || w.norm() > 0.6 || (z - w).norm() < 0.4 {
                continue;
            }
            n += 1;
            let r = schiffer_check(
                &g,
                &WholeGroup,
                &ModelPoint::new(z, Model::Disc).unwrap(),
                &ModelPoint::new(w, Model::Disc).unwrap(),
                1e-3,
                &SeriesOptions::new(0),
            )
            .unwrap();
            assert!(r < 1e-4, "residual {r:e}");
        }
    }

    #[test]
    fn schiffer_residual_shrinks_quadratically() {
        let g = GroupSpec::<f64>::trivial(Model::Disc);
        let s = QuotientSeries::new(&g, &TrivialSubgroup, &SeriesOptions::new(0)).unwrap();
        let (z, w) = (c(0.3, 0.1), c(-0.2, 0.3));
        let r1 = schiffer_residual(&s, z, w, 4e-2).unwrap();
        let r2 = schiffer_residual(&s, z, w, 2e-2).unwrap();
        let ratio = r1 / r2;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }

    #[test]
    fn reproducing_disc_constants() {
        let grid = PolarGrid::default();
        let r = 0.5;
        let k = |z, w| radius_disc_kernel(r, z, w);
        let one = |_: Complex<f64>| c(1.0, 0.0);
        let dom = QuadratureDomain::Disc { radius: r };
        assert!(reproducing_check(k, one, c(0.0, 0.0), &dom, grid).unwrap() < 1e-6);
        // square of ζ² reproduced by the radius-1/2 kernel at 0.1
        let sq = |zeta: Complex<f64>| zeta.powi(4);
        assert!(reproducing_check(k, sq, c(0.1, 0.0), &dom, grid).unwrap() < 1e-6);
        assert!(matches!(
            reproducing_check(k, one, c(0.7, 0.0), &dom, grid),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn reproducing_annulus() {
        let rho = 0.3;
        let dom = QuadratureDomain::Annulus { inner: rho, outer: 1.0 };
        let k = |z, w| annulus_kernel_oracle(rho, z, w, 60).unwrap();
        let f = |zeta: Complex<f64>| zeta.inv();
        let res = reproducing_check(k, f, c(0.5, 0.2), &dom, PolarGrid::default()).unwrap();
        assert!(res < 1e-6, "residual {res:e}");
    }

    #[test]
    fn hyperbolic_ball_area() {
        // Euclidean area of B(0, τ) is π tanh²(τ/2)
        let tau = 3.0f64;
        let dom = QuadratureDomain::HypBall { tau };
        let r = (tau / 2.0).tanh();
        let err = |n| {
            let g = PolarGrid { radial: n, angular: 64 };
            polar_integral(&dom, g, |_| c(1.0, 0.0)).unwrap().re - PI * r * r
        };
        let (e1, e2) = (err(200), err(400));
        assert!(e2.abs() < 1e-5);
        assert!((e1 / e2 - 4.0).abs() < 0.05, "midpoint order {}", e1 / e2);
        // K(0, ·) of the unit disc integrates f ≡ 1 over the ball to r²
        let v = polar_integral(&dom, PolarGrid::default(), |z| disc_kernel(c(0.0, 0.0), z)).unwrap();
        assert!((v.re - r * r).abs() < 1e-5);
    }

    #[test]
    fn subdomain_kernel_is_larger() {
        for z in [c(0.0, 0.0), c(0.2, 0.1), c(-0.3, 0.35)] {
            for r in [0.5, 0.8] {
                assert!(radius_disc_kernel(r, z, z).re >= disc_kernel(z, z).re);
            }
        }
    }
}
