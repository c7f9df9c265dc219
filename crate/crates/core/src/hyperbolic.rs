//! Möbius arithmetic and hyperbolic geometry on the unit disc and the upper half-plane.
//!
//! Maps are stored as determinant-one 2×2 complex matrices. A matrix and its
//! negation describe the same isometry, so equality is sign-insensitive.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "disc")]
    Disc,
    #[serde(rename = "halfplane")]
    HalfPlane,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Disc => f.write_str("disc"),
            Model::HalfPlane => f.write_str("halfplane"),
        }
    }
}

fn check_same(expected: Model, found: Model) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ModelMismatch { expected, found })
    }
}

/// `1 - |z|^2` computed as `(1-|z|)(1+|z|)`.
#[inline]
pub fn one_minus_abs_sq<T: Real>(z: Complex<T>) -> T {
    let r = z.norm();
    (T::one() - r) * (T::one() + r)
}

/// An interior point of one of the two models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint<T> {
    z: Complex<T>,
    model: Model,
}

impl<T: Real> ModelPoint<T> {
    pub fn new(z: Complex<T>, model: Model) -> Result<Self> {
        let inside = match model {
            Model::Disc => z.norm() < T::one(),
            Model::HalfPlane => z.im > T::zero() && z.re.is_finite() && z.im.is_finite(),
        };
        if inside {
            Ok(Self { z, model })
        } else {
            Err(Error::OutsideModel {
                re: z.re.to_f64_lossy(),
                im: z.im.to_f64_lossy(),
                model,
            })
        }
    }

    pub fn disc(re: T, im: T) -> Result<Self> {
        Self::new(Complex::new(re, im), Model::Disc)
    }

    pub fn halfplane(re: T, im: T) -> Result<Self> {
        Self::new(Complex::new(re, im), Model::HalfPlane)
    }

    /// Disc origin or half-plane `i`.
    pub fn base(model: Model) -> Self {
        let z = match model {
            Model::Disc => Complex::new(T::zero(), T::zero()),
            Model::HalfPlane => Complex::new(T::zero(), T::one()),
        };
        Self { z, model }
    }

    #[inline]
    pub fn coordinate(&self) -> Complex<T> {
        self.z
    }

    #[inline]
    pub fn model(&self) -> Model {
        self.model
    }

    /// Conformal factor turning a kernel diagonal into its hyperbolic pointwise norm:
    /// `(1-|z|^2)^2/4` on the disc, `(Im z)^2` on the half-plane.
    pub fn hyp_factor(&self) -> T {
        match self.model {
            Model::Disc => {
                let s = one_minus_abs_sq(self.z);
                s * s / T::lit(4.0)
            }
            Model::HalfPlane => self.z.im * self.z.im,
        }
    }

    /// Disc coordinate of this point together with the derivative of the
    /// model change at this point (`1` for disc points).
    pub fn to_disc_with_derivative(&self) -> (Complex<T>, Complex<T>) {
        match self.model {
            Model::Disc => (self.z, Complex::new(T::one(), T::zero())),
            Model::HalfPlane => {
                let i = Complex::i();
                let den = self.z + i;
                ((self.z - i) / den, (i + i) / (den * den))
            }
        }
    }
}

/// A determinant-normalized Möbius isometry of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap<T> {
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
    model: Model,
}

impl<T: Real> MoebiusMap<T> {
    /// Normalizes to `ad - bc = 1` and verifies that the map preserves `model`.
    pub fn new(
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        d: Complex<T>,
        model: Model,
    ) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !det.norm().is_finite() || det.norm() <= T::epsilon() * scale * scale {
            return Err(Error::DegenerateMatrix);
        }
        let s = det.sqrt();
        let m = Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
            model,
        };
        if m.has_exact_shape() || m.passes_probes() {
            Ok(m)
        } else {
            Err(Error::NotModelPreserving(model))
        }
    }

    /// Half-plane map with real entries.
    pub fn from_real(a: T, b: T, c: T, d: T) -> Result<Self> {
        let r = |x: T| Complex::new(x, T::zero());
        Self::new(r(a), r(b), r(c), r(d), Model::HalfPlane)
    }

    pub fn identity(model: Model) -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
            model,
        }
    }

    /// Disc rotation `z -> e^{i theta} z`.
    pub fn disc_rotation(theta: T) -> Self {
        let h = theta / T::lit(2.0);
        Self {
            a: Complex::from_polar(T::one(), h),
            b: Complex::new(T::zero(), T::zero()),
            c: Complex::new(T::zero(), T::zero()),
            d: Complex::from_polar(T::one(), -h),
            model: Model::Disc,
        }
    }

    /// Half-plane dilation `w -> lambda w`, `lambda > 0`.
    pub fn dilation(lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        let s = lambda.sqrt();
        Self::from_real(s, T::zero(), T::zero(), T::one() / s)
    }

    pub(crate) fn from_entries_unchecked(
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        d: Complex<T>,
        model: Model,
    ) -> Self {
        Self { a, b, c, d, model }
    }

    #[inline]
    pub fn entries(&self) -> [Complex<T>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    #[inline]
    pub fn model(&self) -> Model {
        self.model
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
            model: self.model,
        }
    }

    /// Matrix product without model check or renormalization.
    #[inline]
    pub(crate) fn mul_raw(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
            model: self.model,
        }
    }

    /// `self ∘ other`. Both factors have determinant one, so the product is not
    /// rescaled: dividing by a recomputed `ad - bc` would inject an error of order
    /// `eps·|entries|^2`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same(self.model, other.model)?;
        Ok(self.mul_raw(other))
    }

    fn scaled(self, s: Complex<T>) -> Self {
        Self {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
            model: self.model,
        }
    }

    /// `(a z + b) / (c z + d)` with no domain checks.
    #[inline]
    pub fn apply_raw(&self, z: Complex<T>) -> Complex<T> {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// `1 / (c z + d)^2`.
    #[inline]
    pub fn derivative_raw(&self, z: Complex<T>) -> Complex<T> {
        let q = self.c * z + self.d;
        (q * q).inv()
    }

    pub fn apply(&self, p: &ModelPoint<T>) -> Result<ModelPoint<T>> {
        check_same(self.model, p.model)?;
        let q = self.c * p.z + self.d;
        if q.norm() == T::zero() {
            return Err(Error::PointAtInfinity);
        }
        ModelPoint::new((self.a * p.z + self.b) / q, self.model)
    }

    pub fn derivative(&self, p: &ModelPoint<T>) -> Result<Complex<T>> {
        check_same(self.model, p.model)?;
        let q = self.c * p.z + self.d;
        if q.norm() == T::zero() {
            return Err(Error::PointAtInfinity);
        }
        Ok((q * q).inv())
    }

    /// Sign-insensitive entrywise comparison, tolerance relative to the entry scale.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        if self.model != other.model {
            return false;
        }
        let e1 = self.entries();
        let e2 = other.entries();
        let scale = e1
            .iter()
            .chain(e2.iter())
            .fold(T::one(), |m, z| m.max(z.norm()));
        let diff = |sign: T| {
            e1.iter()
                .zip(e2.iter())
                .fold(T::zero(), |m, (x, y)| m.max((*x - *y * sign).norm()))
        };
        diff(T::one()).min(diff(-T::one())) <= tol * scale
    }

    /// Equality up to sign at the default geometric tolerance.
    pub fn same_map(&self, other: &Self) -> bool {
        self.approx_eq(other, T::geometric_tol())
    }

    pub fn is_identity(&self) -> bool {
        self.same_map(&Self::identity(self.model))
    }

    /// `1 - |γ(0)|^2` for the disc version of this map, free of cancellation.
    pub fn origin_displacement_sq(&self) -> T {
        let d = match self.model {
            Model::Disc => self.d,
            Model::HalfPlane => self.cayley().d,
        };
        T::one() / d.norm_sqr()
    }

    /// `|γ(0)|` for the disc version of this map.
    pub fn origin_image_abs(&self) -> T {
        let m = match self.model {
            Model::Disc => *self,
            Model::HalfPlane => self.cayley(),
        };
        m.b.norm() / m.d.norm()
    }

    /// `1 - |γ(0)|` for the disc version of this map.
    pub fn origin_displacement(&self) -> T {
        self.origin_displacement_sq() / (T::one() + self.origin_image_abs())
    }

    fn has_exact_shape(&self) -> bool {
        let tiny = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        let scale = self
            .entries()
            .iter()
            .fold(T::one(), |m, z| m.max(z.norm()));
        let tol = tiny * scale;
        match self.model {
            Model::HalfPlane => self.entries().iter().all(|z| z.im.abs() <= tol),
            Model::Disc => {
                (self.d - self.a.conj()).norm() <= tol && (self.c - self.b.conj()).norm() <= tol
            }
        }
    }

    fn passes_probes(&self) -> bool {
        let tol = T::geometric_tol();
        match self.model {
            Model::Disc => {
                let inside = self.apply_raw(Complex::new(T::zero(), T::zero())).norm() < T::one();
                inside
                    && (0..3).all(|k| {
                        let t = T::lit(2.0) * T::PI() * T::from_usize_lossy(k) / T::lit(3.0);
                        let w = self.apply_raw(Complex::from_polar(T::one(), t));
                        (w.norm() - T::one()).abs() <= tol
                    })
            }
            Model::HalfPlane => {
                let up = self.apply_raw(Complex::i()).im > T::zero();
                up && [T::zero(), T::one(), -T::one()].iter().all(|&x| {
                    let x = Complex::new(x, T::zero());
                    let q = self.c * x + self.d;
                    let num = self.a * x + self.b;
                    // image on the extended real line: either real or at infinity
                    (num * q.conj()).im.abs() <= tol * (num.norm() * q.norm()).max(T::one())
                })
            }
        }
    }
}

/// `m1 ∘ m2`.
pub fn compose<T: Real>(m1: &MoebiusMap<T>, m2: &MoebiusMap<T>) -> Result<MoebiusMap<T>> {
    m1.compose(m2)
}

pub fn apply<T: Real>(m: &MoebiusMap<T>, p: &ModelPoint<T>) -> Result<ModelPoint<T>> {
    m.apply(p)
}

pub fn derivative<T: Real>(m: &MoebiusMap<T>, p: &ModelPoint<T>) -> Result<Complex<T>> {
    m.derivative(p)
}

/// Hyperbolic distance for the curvature −1 metric `4|dz|^2/(1-|z|^2)^2`
/// (equivalently `|dz|^2/(Im z)^2` on the half-plane).
pub fn hyp_distance<T: Real>(p: &ModelPoint<T>, q: &ModelPoint<T>) -> Result<T> {
    check_same(p.model, q.model)?;
    Ok(match p.model {
        Model::Disc => disc_distance_raw(p.z, q.z),
        Model::HalfPlane => {
            let s = (p.z - q.z).norm() / (T::lit(2.0) * (p.z.im * q.z.im).sqrt());
            T::lit(2.0) * s.asinh()
        }
    })
}

/// Disc distance on raw coordinates; `+inf` once roundoff pushes a point to the circle.
pub fn disc_distance_raw<T: Real>(p: Complex<T>, q: Complex<T>) -> T {
    let den = Complex::new(T::one(), T::zero()) - q.conj() * p;
    let den2 = den.norm_sqr();
    if den2 == T::zero() {
        return T::infinity();
    }
    let delta = ((p - q).norm_sqr() / den2).sqrt();
    let gap = one_minus_abs_sq(p) * one_minus_abs_sq(q) / den2;
    if gap <= T::zero() {
        return T::infinity();
    }
    T::lit(2.0) * delta.ln_1p() - gap.ln()
}

/// Cancellation-free quantities for a disc pair `(z, γ(w))`, with `γ = (a, b; c, d)`
/// determinant-normalized and `q = c w + d`.
#[derive(Debug, Clone, Copy)]
pub struct OrbitPair<T> {
    /// `q (z - γ(w))`
    pub num: Complex<T>,
    /// `conj(q) (1 - z conj(γ(w)))`
    pub den: Complex<T>,
    /// `c w + d`
    pub q: Complex<T>,
}

impl<T: Real> OrbitPair<T> {
    #[inline]
    pub fn new(m: &MoebiusMap<T>, z: Complex<T>, w: Complex<T>) -> Self {
        let q = m.c * w + m.d;
        let p = m.a * w + m.b;
        Self {
            num: z * q - p,
            den: q.conj() - z * p.conj(),
            q,
        }
    }

    /// `|z - γw| / |1 - conj(γw) z|`.
    #[inline]
    pub fn pseudo_distance(&self) -> T {
        self.num.norm() / self.den.norm()
    }

    /// `1 - |pseudo_distance|^2`, given `1 - |z|^2` and `1 - |w|^2`.
    #[inline]
    pub fn pseudo_gap(&self, gap_z: T, gap_w: T) -> T {
        gap_z * gap_w / self.den.norm_sqr()
    }

    /// `1 / (π (1 - z conj(γw))^2) · conj(γ'(w))`.
    #[inline]
    pub fn kernel_term(&self) -> Complex<T> {
        (self.den * self.den * T::PI()).inv()
    }

    /// `1 - |γ(w)|^2`, given `1 - |w|^2`.
    #[inline]
    pub fn image_gap(&self, gap_w: T) -> T {
        gap_w / self.q.norm_sqr()
    }

    /// Hyperbolic distance between `z` and `γ(w)`.
    pub fn distance(&self, gap_z: T, gap_w: T) -> T {
        let gap = self.pseudo_gap(gap_z, gap_w);
        if gap <= T::zero() || !gap.is_finite() {
            return T::infinity();
        }
        T::lit(2.0) * self.pseudo_distance().ln_1p() - gap.ln()
    }
}

/// Conformal change of model: disc ↔ half-plane via `z = (ζ - i)/(ζ + i)`.
pub trait Cayley: Sized {
    fn cayley(&self) -> Self;
}

impl<T: Real> Cayley for ModelPoint<T> {
    fn cayley(&self) -> Self {
        let i = Complex::i();
        let one = Complex::new(T::one(), T::zero());
        match self.model {
            Model::HalfPlane => Self {
                z: (self.z - i) / (self.z + i),
                model: Model::Disc,
            },
            Model::Disc => Self {
                z: i * (one + self.z) / (one - self.z),
                model: Model::HalfPlane,
            },
        }
    }
}

impl<T: Real> Cayley for MoebiusMap<T> {
    fn cayley(&self) -> Self {
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::i();
        // C = (1, -i; 1, i) and C' = (i, i; -1, 1) satisfy C C' = 2i·I
        let c = Self::from_entries_unchecked(one, -i, one, i, Model::Disc);
        let c_adj = Self::from_entries_unchecked(i, i, -one, one, Model::Disc);
        let (target, m) = match self.model {
            Model::HalfPlane => (Model::Disc, c.mul_raw(self).mul_raw(&c_adj)),
            Model::Disc => (Model::HalfPlane, c_adj.mul_raw(self).mul_raw(&c)),
        };
        let mut out = m.scaled((i + i).inv());
        out.model = target;
        out
    }
}

pub fn cayley<C: Cayley>(x: &C) -> C {
    x.cayley()
}

/// Euclidean radius of the origin-centred disc equal to the hyperbolic ball of radius `tau`.
pub fn radius_from_tau<T: Real>(tau: T) -> Result<T> {
    if !(tau >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "hyperbolic radius must be non-negative, got {tau}"
        )));
    }
    Ok((tau / T::lit(2.0)).tanh())
}

/// Inverse of [`radius_from_tau`]: `log((1+r)/(1-r))`.
pub fn tau_from_radius<T: Real>(r: T) -> Result<T> {
    if !(r >= T::zero() && r < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "Euclidean radius must lie in [0, 1), got {r}"
        )));
    }
    Ok(r.ln_1p() - (-r).ln_1p())
}

/// Bergman kernel function of `B_hyp(0, tau)` at its centre, `(1/π)((e^τ+1)/(e^τ-1))^2`.
pub fn ball_kernel_center<T: Real>(tau: T) -> Result<T> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive, got {tau}"
        )));
    }
    if tau.is_infinite() {
        return Ok(T::FRAC_1_PI());
    }
    let em = tau.exp_m1();
    let ratio = (em + T::lit(2.0)) / em;
    Ok(ratio * ratio / T::PI())
}

/// The automorphism sending `z` to the disc origin (or to `i` on the half-plane).
pub fn centering_map<T: Real>(z: &ModelPoint<T>) -> MoebiusMap<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    match z.model {
        Model::Disc => {
            let s = one_minus_abs_sq(z.z).sqrt();
            MoebiusMap::from_entries_unchecked(
                one / s,
                -z.z / s,
                -z.z.conj() / s,
                one / s,
                Model::Disc,
            )
        }
        Model::HalfPlane => {
            let s = z.z.im.sqrt();
            MoebiusMap::from_entries_unchecked(
                one / s,
                Complex::new(-z.z.re / s, T::zero()),
                zero,
                Complex::new(s, T::zero()),
                Model::HalfPlane,
            )
        }
    }
}

/// A closed-form hyperbolic ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypBall<T> {
    pub center: ModelPoint<T>,
    pub radius: T,
}

impl<T: Real> HypBall<T> {
    pub fn new(center: ModelPoint<T>, radius: T) -> Result<Self> {
        if !(radius >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be non-negative, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: &ModelPoint<T>) -> Result<bool> {
        Ok(hyp_distance(&self.center, p)? < self.radius)
    }

    /// Bergman kernel function of the ball on the diagonal at its centre, in the
    /// coordinate of the centre's model.
    pub fn center_kernel(&self) -> Result<T> {
        let hyp_norm = ball_kernel_center(self.radius)? / T::lit(4.0);
        Ok(hyp_norm / self.center.hyp_factor())
    }
}
