//! Level-wise comparison of quotient kernels along a tower.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::groups::{
    enumerate_ball_with, injectivity_radius_in_ball, EnumerationBall, EnumerationOptions,
    GroupSpec, InjectivityRadius, Membership, TowerLevel, TowerSpec, Word,
};
use crate::hyperbolic::{one_minus_abs_sq, Cayley, HypBall, Model, ModelPoint};
use crate::kernel::{
    disc_kernel, kernel_term_constant, polar_integral, ClosurePolicy, PolarGrid, QuadratureDomain,
    QuotientSeries, SeriesOptions,
};
use crate::scalar::Real;
use crate::summation::det_sum_real;

pub(crate) fn check_ranks<T: Real>(g: &GroupSpec<T>, t: &TowerSpec) -> Result<()> {
    if g.rank() != t.rank() {
        return Err(Error::InvalidTower(format!(
            "tower is defined on rank {} but the group has rank {}",
            t.rank(),
            g.rank()
        )));
    }
    Ok(())
}

pub(crate) fn ball_for<T: Real>(g: &GroupSpec<T>, opts: &SeriesOptions<T>) -> Result<EnumerationBall<T>> {
    enumerate_ball_with(
        g,
        &EnumerationOptions {
            max_len: opts.max_len,
            cap: opts.element_cap,
            prune_below: opts.prune.then_some(opts.tol),
        },
    )
}

/// `Γ_j ∖ Γ̃`: the index set of the error term at level `j`.
pub struct ErrorIndexSet<'a> {
    level: TowerLevel<'a>,
    tower: &'a TowerSpec,
}

impl<'a> ErrorIndexSet<'a> {
    pub fn new(tower: &'a TowerSpec, level: usize) -> Result<Self> {
        Ok(Self {
            level: TowerLevel::new(tower, level)?,
            tower,
        })
    }
}

impl Membership for ErrorIndexSet<'_> {
    fn contains(&self, w: &Word) -> bool {
        self.level.contains(w) && !self.tower.top_member(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityError<T> {
    /// `Σ_{γ ∈ Γ_j ∖ Γ̃, |γ| <= L} K_D(z, γw) conj(γ'(w))`, in the points' model.
    pub e_j: Complex<T>,
    /// `Σ (1 - |γ(0)|^2) / (π (1-|z|)^2 (1-|w|)^2)` over the same truncated set.
    pub truncated_bound: T,
    /// Extrapolated contribution of words longer than `L`.
    pub tail: T,
    /// `truncated_bound + tail`.
    pub bound: T,
    pub terms: usize,
}

/// Error term `E_j = Q_j - Q_top` evaluated directly over `Γ_j ∖ Γ̃`, with its displacement bound.
pub fn stability_error<T: Real>(
    g: &GroupSpec<T>,
    t: &TowerSpec,
    j: usize,
    z: &ModelPoint<T>,
    w: &ModelPoint<T>,
    opts: &SeriesOptions<T>,
) -> Result<StabilityError<T>> {
    check_ranks(g, t)?;
    let set = ErrorIndexSet::new(t, j)?;
    let ball = ball_for(g, opts)?;
    let s = QuotientSeries::from_ball(g, &ball, &set, &ClosurePolicy::RawBall)?;
    let kv = s.kernel(z, w)?;
    let (zd, dz) = z.to_disc_with_derivative();
    let (wd, dw) = w.to_disc_with_derivative();
    let disp = det_sum_real(s.maps(), |m| m.origin_displacement_sq());
    let truncated_bound = kernel_term_constant(zd, wd) / T::lit(4.0) * disp * dz.norm() * dw.norm();
    Ok(StabilityError {
        e_j: kv.value,
        truncated_bound,
        tail: kv.tail_estimate,
        bound: truncated_bound + kv.tail_estimate,
        terms: s.terms_used(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Semicontinuity<T> {
    /// `K_{B(z, τ_j(z))}(z, z) - Q_j(z, z)`.
    pub margin: T,
    pub ball_kernel: T,
    pub quotient_diag: T,
    pub tau: InjectivityRadius<T>,
    pub tail: T,
    /// Rounding allowance for the two evaluated diagonals, `16 ε max(K_B, Q_j)`.
    /// Matters only when both agree to working precision (very large `τ`).
    pub rounding: T,
    /// `margin >= -(2 tail + rounding)`.
    pub holds: bool,
    /// Set when `τ` is only an upper bound over the enumerated ball.
    pub advisory: bool,
}

/// Ball comparison at a point given a prepared series and the injectivity radius there.
pub fn semicontinuity_from<T: Real>(
    s: &QuotientSeries<T>,
    tau: InjectivityRadius<T>,
    z: &ModelPoint<T>,
) -> Result<Semicontinuity<T>> {
    let kv = s.kernel(z, z)?;
    let ball_kernel = if tau.tau.is_infinite() {
        disc_like_kernel(z)
    } else {
        HypBall::new(*z, tau.tau)?.center_kernel()?
    };
    let margin = ball_kernel - kv.value.re;
    let rounding = T::lit(16.0) * T::epsilon() * ball_kernel.max(kv.value.norm());
    Ok(Semicontinuity {
        margin,
        ball_kernel,
        quotient_diag: kv.value.re,
        tau,
        tail: kv.tail_estimate,
        rounding,
        holds: margin >= -(T::lit(2.0) * kv.tail_estimate + rounding),
        advisory: !tau.certified,
    })
}

/// Diagonal of the kernel of the whole model at `z`.
fn disc_like_kernel<T: Real>(z: &ModelPoint<T>) -> T {
    T::one() / (T::lit(4.0) * T::PI() * z.hyp_factor())
}

pub fn semicontinuity_check<T: Real>(
    g: &GroupSpec<T>,
    t: &TowerSpec,
    j: usize,
    z: &ModelPoint<T>,
    opts: &SeriesOptions<T>,
) -> Result<Semicontinuity<T>> {
    check_ranks(g, t)?;
    let level = TowerLevel::new(t, j)?;
    let ball = ball_for(g, opts)?;
    let tau = injectivity_radius_in_ball(&ball, &level, z);
    let s = QuotientSeries::from_ball(g, &ball, &level, &ClosurePolicy::RawBall)?;
    semicontinuity_from(&s, tau, z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Check<T> {
    /// `‖K_D(·, w) - Q_j(·, w)‖²` over `B(w, τ_j(w))`.
    pub lhs: T,
    /// `2 (K_B - K_D)(w, w) + 2 (K_B - Q_j)(w, w)`.
    pub rhs: T,
    /// Change of `lhs` between the requested grid and one of half the resolution,
    /// plus the kernel tail at `(w, w)`.
    pub slack: T,
    pub tau: InjectivityRadius<T>,
    pub holds: bool,
    /// False when `slack` exceeds a tenth of `rhs`.
    pub resolution_ok: bool,
}

/// `L²` distance on the injectivity ball between the disc kernel and the level-`j`
/// kernel, against the sum of the two ball-comparison bounds. Computed in the disc.
pub fn l2_difference_check<T: Real>(
    g: &GroupSpec<T>,
    t: &TowerSpec,
    j: usize,
    w: &ModelPoint<T>,
    opts: &SeriesOptions<T>,
    grid: PolarGrid,
) -> Result<L2Check<T>> {
    check_ranks(g, t)?;
    let gd = g.to_disc();
    let wd = match w.model() {
        Model::Disc => *w,
        Model::HalfPlane => w.cayley(),
    };
    let level = TowerLevel::new(t, j)?;
    let ball = ball_for(&gd, opts)?;
    let tau = injectivity_radius_in_ball(&ball, &level, &wd);
    let nontrivial = |x: &Word| !x.is_empty() && level.contains(x);
    let diff = QuotientSeries::from_ball(&gd, &ball, &nontrivial, &ClosurePolicy::RawBall)?;

    let wc = wd.coordinate();
    let kd = disc_kernel(wc, wc).re;
    let e_diag = diff.kernel_disc(wc, wc).re;
    let tail = if diff.terms_used() == 0 && diff.tail().tail_sum == T::zero() {
        T::zero()
    } else {
        kernel_term_constant(wc, wc) * diff.tail().tail_sum
    };
    let kb = if tau.tau.is_infinite() {
        kd
    } else {
        HypBall::new(wd, tau.tau)?.center_kernel()?
    };
    let rhs = T::lit(2.0) * (kb - kd) + T::lit(2.0) * (kb - (kd + e_diag));

    let (lhs, slack) = if diff.terms_used() == 0 {
        (T::zero(), tail)
    } else {
        if !tau.tau.is_finite() {
            return Err(Error::InvalidArgument(
                "injectivity radius is unbounded but the level has enumerated members".into(),
            ));
        }
        // ζ = ψ(u) = (u + w)/(1 + w̄ u) sends B(0, τ) onto B(w, τ)
        let gap = one_minus_abs_sq(wc);
        let one = Complex::new(T::one(), T::zero());
        let integrand = |u: Complex<T>| {
            let s = one + wc.conj() * u;
            let zeta = (u + wc) / s;
            let jac = gap / s.norm_sqr();
            let e = diff.kernel_disc(zeta, wc);
            Complex::new(e.norm_sqr() * jac * jac, T::zero())
        };
        let dom = QuadratureDomain::HypBall { tau: tau.tau };
        let fine = polar_integral(&dom, grid, integrand)?.re;
        let coarse_grid = PolarGrid {
            radial: (grid.radial / 2).max(1),
            angular: (grid.angular / 2).max(1),
        };
        let coarse = polar_integral(&dom, coarse_grid, integrand)?.re;
        (fine, (fine - coarse).abs() + tail)
    };
    Ok(L2Check {
        lhs,
        rhs,
        slack,
        tau,
        holds: lhs <= rhs + slack,
        resolution_ok: slack <= rhs.abs() / T::lit(10.0),
    })
}
