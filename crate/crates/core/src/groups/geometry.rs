//! Orbit geometry: injectivity radii, Dirichlet domains and convergence diagnostics.

use num_complex::Complex;

use super::ball::{enumerate_ball, EnumerationBall};
use super::spec::{GroupSpec, Membership};
use crate::error::Result;
use crate::hyperbolic::{one_minus_abs_sq, ModelPoint, OrbitPair};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectivityRadius<T> {
    pub tau: T,
    /// Exact minimum (cyclic case) rather than an upper bound over the ball.
    pub certified: bool,
}

/// Half the minimal displacement of `x` over non-identity members of `pred`
/// with word length `<= max_len`.
pub fn injectivity_radius<T: Real, P: Membership + ?Sized>(
    g: &GroupSpec<T>,
    pred: &P,
    x: &ModelPoint<T>,
    max_len: usize,
) -> Result<InjectivityRadius<T>> {
    let ball = enumerate_ball(g, max_len)?;
    Ok(injectivity_radius_in_ball(&ball, pred, x))
}

pub fn injectivity_radius_in_ball<T: Real, P: Membership + ?Sized>(
    ball: &EnumerationBall<T>,
    pred: &P,
    x: &ModelPoint<T>,
) -> InjectivityRadius<T> {
    let (xd, _) = x.to_disc_with_derivative();
    let gap = one_minus_abs_sq(xd);
    let min = ball
        .elements()
        .iter()
        .filter(|e| !e.word.is_empty() && pred.contains(&e.word))
        .map(|e| OrbitPair::new(&e.disc, xd, xd).distance(gap, gap))
        .fold(T::infinity(), T::min);
    let tau = min / T::lit(2.0);
    InjectivityRadius {
        tau,
        // every subgroup of an infinite cyclic group is cyclic, and d(x, γ^n x)
        // grows with |n|, so the smallest enumerated power realizes the minimum
        certified: ball.rank == 1 && tau.is_finite(),
    }
}

/// Approximate membership of `z` in the Dirichlet domain centred at `x`, tested
/// against the members of the enumerated ball only. Ties count as outside.
pub fn dirichlet_contains<T: Real, P: Membership + ?Sized>(
    g: &GroupSpec<T>,
    pred: &P,
    x: &ModelPoint<T>,
    z: &ModelPoint<T>,
    max_len: usize,
) -> Result<bool> {
    let ball = enumerate_ball(g, max_len)?;
    Ok(dirichlet_contains_in_ball(&ball, pred, x, z))
}

pub fn dirichlet_contains_in_ball<T: Real, P: Membership + ?Sized>(
    ball: &EnumerationBall<T>,
    pred: &P,
    x: &ModelPoint<T>,
    z: &ModelPoint<T>,
) -> bool {
    let (xd, _) = x.to_disc_with_derivative();
    let (zd, _) = z.to_disc_with_derivative();
    let (gx, gz) = (one_minus_abs_sq(xd), one_minus_abs_sq(zd));
    let id = ball.elements()[0].disc;
    let to_center = OrbitPair::new(&id, zd, xd).distance(gz, gx);
    ball.elements()
        .iter()
        .filter(|e| !e.word.is_empty() && pred.contains(&e.word))
        .all(|e| to_center < OrbitPair::new(&e.disc, zd, xd).distance(gz, gx))
}

/// Partial sums of `Σ (1 - |γ(0)|)` over non-identity elements by word length.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    /// `S_l` for `l = 1..=L`.
    pub partial_sums: Vec<T>,
    /// Shell sums `S_l - S_{l-1}`.
    pub increments: Vec<T>,
    /// Per-length decay ratio of the shell sums from a log-linear least-squares fit.
    pub fitted_ratio: Option<T>,
    pub likely_convergent: bool,
}

pub fn convergence_diagnostic<T: Real>(g: &GroupSpec<T>, max_len: usize) -> Result<ConvergenceTable<T>> {
    let ball = enumerate_ball(g, max_len)?;
    Ok(convergence_table(&ball))
}

pub fn convergence_table<T: Real>(ball: &EnumerationBall<T>) -> ConvergenceTable<T> {
    let increments = ball.shell_displacement_sums();
    let partial_sums = increments
        .iter()
        .scan(T::zero(), |s, &x| {
            *s = *s + x;
            Some(*s)
        })
        .collect();
    let fitted_ratio = fit_decay_ratio(&increments);
    let likely_convergent = match fitted_ratio {
        Some(r) => r < T::one(),
        None => increments.iter().all(|x| *x == T::zero()),
    };
    ConvergenceTable {
        partial_sums,
        increments,
        fitted_ratio,
        likely_convergent,
    }
}

/// Exponential fit `I_l ≈ A ρ^l` over the trailing half of the positive shell sums.
/// `increments[k]` is the shell sum at length `k + 1`.
pub fn fit_decay_ratio<T: Real>(increments: &[T]) -> Option<T> {
    let n = increments.len();
    if n < 2 {
        return None;
    }
    let start = (n / 2).min(n - 2);
    let pts: Vec<(T, T)> = increments[start..]
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > T::zero() && v.is_finite())
        .map(|(k, v)| (T::from_usize_lossy(start + k + 1), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = T::from_usize_lossy(pts.len());
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / m;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / m;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(a, b), p| {
        let dx = p.0 - mx;
        (a + dx * (p.1 - my), b + dx * dx)
    });
    Some((sxy / sxx).exp())
}

/// Lower bound, value and upper bound of `1 - |γ(z)|` from the two-sided estimate
/// `(1-|z|^2)(1-|γ0|)/4 <= 1-|γz| <= 4(1-|γ0|)/(1-|z|^2)`; `gamma` is a disc map.
pub fn displacement_sandwich<T: Real>(
    gamma: &crate::hyperbolic::MoebiusMap<T>,
    z: Complex<T>,
) -> (T, T, T) {
    let gap_z = one_minus_abs_sq(z);
    let disp0 = gamma.origin_displacement();
    let q = {
        let [_, _, c, d] = gamma.entries();
        c * z + d
    };
    let image_gap = gap_z / q.norm_sqr();
    let image_abs = gamma.apply_raw(z).norm().min(T::one());
    let value = image_gap / (T::one() + image_abs);
    (gap_z * disp0 / T::lit(4.0), value, T::lit(4.0) * disp0 / gap_z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::spec::{TowerKind, TowerLevel, TowerSpec, TowerTop, TrivialSubgroup, WholeGroup};

    fn i() -> ModelPoint<f64> {
        ModelPoint::halfplane(0.0, 1.0).unwrap()
    }

    #[test]
    fn cyclic_injectivity_radius() {
        let g = GroupSpec::<f64>::cyclic_dilation(9.0).unwrap();
        let r = injectivity_radius(&g, &WholeGroup, &i(), 3).unwrap();
        assert!(r.certified);
        assert!((r.tau - 3f64.ln()).abs() < 1e-14);

        let tower = TowerSpec::dyadic(TowerKind::CyclicPowers, 5, TowerTop::Trivial, 1).unwrap();
        let ball = enumerate_ball(&g, 40).unwrap();
        let mut prev = 0.0;
        for j in 1..=5 {
            let lvl = TowerLevel::new(&tower, j).unwrap();
            let r = injectivity_radius_in_ball(&ball, &lvl, &i());
            let expect = (1u64 << (j - 1)) as f64 * 9f64.ln();
            assert!((r.tau - expect).abs() < 1e-12 * expect, "j={j}");
            assert!(r.tau >= prev);
            prev = r.tau;
        }
    }

    #[test]
    fn injectivity_radius_without_members() {
        let g = GroupSpec::<f64>::cyclic_dilation(9.0).unwrap();
        let r = injectivity_radius(&g, &TrivialSubgroup, &i(), 4).unwrap();
        assert!(r.tau.is_infinite());
        assert!(!r.certified);
    }

    #[test]
    fn injectivity_radius_is_invariant_along_orbit() {
        let g = GroupSpec::<f64>::cyclic_dilation(9.0).unwrap();
        let x = ModelPoint::halfplane(0.7, 0.4).unwrap();
        let gx = g.generators()[0].apply(&x).unwrap();
        let a = injectivity_radius(&g, &WholeGroup, &x, 4).unwrap().tau;
        let b = injectivity_radius(&g, &WholeGroup, &gx, 4).unwrap().tau;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_examples() {
        let g = GroupSpec::<f64>::cyclic_dilation(9.0).unwrap();
        let x = i();
        assert!(dirichlet_contains(&g, &WholeGroup, &x, &x, 3).unwrap());
        let nine_i = ModelPoint::halfplane(0.0, 9.0).unwrap();
        assert!(!dirichlet_contains(&g, &WholeGroup, &x, &nine_i, 3).unwrap());
        // the midpoint 3i is equidistant from i and 9i
        let three_i = ModelPoint::halfplane(0.0, 3.0).unwrap();
        assert!(!dirichlet_contains(&g, &WholeGroup, &x, &three_i, 3).unwrap());
        // points inside B(x, tau(x)) belong to D(x)
        let tau = 3f64.ln();
        for k in 0..16 {
            let t = k as f64 * std::f64::consts::TAU / 16.0;
            let r = crate::hyperbolic::radius_from_tau(0.99 * tau).unwrap();
            let zd = ModelPoint::new(Complex::from_polar(r, t), crate::hyperbolic::Model::Disc).unwrap();
            use crate::hyperbolic::Cayley;
            assert!(dirichlet_contains(&g, &WholeGroup, &x, &zd.cayley(), 3).unwrap());
        }
    }

    #[test]
    fn convergence_trivial_group() {
        let g = GroupSpec::<f64>::trivial(crate::hyperbolic::Model::Disc);
        let t = convergence_diagnostic(&g, 5).unwrap();
        assert!(t.partial_sums.iter().all(|s| *s == 0.0));
        assert!(t.likely_convergent);
        assert!(t.fitted_ratio.is_none());
    }

    #[test]
    fn convergence_cyclic_rate() {
        let g = GroupSpec::<f64>::cyclic_dilation(9.0).unwrap();
        let t = convergence_diagnostic(&g, 10).unwrap();
        // direct route: push 0 through γ^{±n} numerically and measure 1 - |γ^n(0)|
        use crate::hyperbolic::{Cayley, Model, MoebiusMap};
        let gd = g.generators()[0].cayley();
        let mut m = MoebiusMap::identity(Model::Disc);
        for (k, inc) in t.increments.iter().enumerate() {
            m = m.compose(&gd).unwrap();
            let direct = 2.0 * (1.0 - m.apply_raw(Complex::new(0.0, 0.0)).norm());
            assert!((inc - direct).abs() <= 1e-14, "n={}", k + 1);
        }
        let ratio = t.fitted_ratio.unwrap();
        assert!((ratio * 9.0 - 1.0).abs() < 0.01, "ratio {ratio}");
        assert!(t.likely_convergent);
        assert!(t.partial_sums.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn convergence_schottky_baseline() {
        let g = GroupSpec::<f64>::schottky_rank2(2.0).unwrap();
        let t = convergence_diagnostic(&g, 9).unwrap();
        let ratio = t.fitted_ratio.unwrap();
        assert!(t.likely_convergent);
        // regression baseline for the cosh = 2 Schottky group
        assert!((ratio - SCHOTTKY_COSH2_RATIO).abs() < 1e-3, "ratio {ratio}");
    }

    const SCHOTTKY_COSH2_RATIO: f64 = 0.36285;

    #[test]
    fn sandwich_holds_on_ball() {
        let g = GroupSpec::<f64>::schottky_rank2(2.0).unwrap();
        let ball = enumerate_ball(&g, 6).unwrap();
        for k in 0..10 {
            let z = Complex::from_polar(0.09 * k as f64, 0.7 * k as f64);
            for e in ball.elements() {
                let (lo, v, hi) = displacement_sandwich(&e.disc, z);
                assert!(lo <= v * (1.0 + 1e-12) && v <= hi * (1.0 + 1e-12));
            }
        }
    }
}
