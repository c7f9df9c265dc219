//! Pulled-back quotient kernel `Q(z, w)` and the Green series over a truncated subgroup.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{
    enumerate_ball_with, EnumerationBall, EnumerationOptions, GroupSpec, Membership, Word,
    DEFAULT_ELEMENT_CAP,
};
use crate::groups::fit_decay_ratio;
use crate::hyperbolic::{one_minus_abs_sq, Model, ModelPoint, MoebiusMap, OrbitPair};
use crate::scalar::Real;
use crate::summation::{det_sum_complex, det_sum_real};

/// Green terms with a pseudo-distance below this are treated as a pole.
pub const SINGULAR_PSEUDO_DISTANCE: f64 = 1e-8;

/// Which subset of the enumerated members is summed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ClosurePolicy {
    /// Members of the word ball, as enumerated.
    #[default]
    RawBall,
    /// Members plus the inverses of any member whose inverse was not enumerated.
    InversionClosed,
    /// The translate `{γ γ₀⁻¹}` of the member set, so that moving `w` to `γ₀ w`
    /// permutes the summed terms exactly.
    RightCoset(Word),
}

impl fmt::Display for ClosurePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosurePolicy::RawBall => f.write_str("raw_ball"),
            ClosurePolicy::InversionClosed => f.write_str("inversion_closed"),
            ClosurePolicy::RightCoset(w) => write!(f, "right_coset:{w}"),
        }
    }
}

impl FromStr for ClosurePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw_ball" => Ok(ClosurePolicy::RawBall),
            "inversion_closed" => Ok(ClosurePolicy::InversionClosed),
            other => match other.strip_prefix("right_coset:") {
                Some(w) => Ok(ClosurePolicy::RightCoset(w.parse()?)),
                None => Err(Error::InvalidArgument(format!("unknown closure policy `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOptions<T> {
    pub max_len: usize,
    /// Target truncation error; also the pruning threshold on `1 - |γ(0)|^2` when `prune` is set.
    pub tol: T,
    pub closure: ClosurePolicy,
    pub prune: bool,
    pub element_cap: u128,
}

impl<T: Real> SeriesOptions<T> {
    pub fn new(max_len: usize) -> Self {
        Self {
            max_len,
            tol: T::lit(1e-10),
            closure: ClosurePolicy::RawBall,
            prune: false,
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }

    pub fn with_closure(mut self, closure: ClosurePolicy) -> Self {
        self.closure = closure;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation<T> {
    pub max_len: usize,
    pub policy: ClosurePolicy,
    pub terms_used: usize,
    pub fitted_ratio: Option<T>,
    /// False when the whole-group shell sums did not decrease over the last three lengths.
    pub decaying: bool,
}

impl<T> Truncation<T> {
    pub fn divergence_warning(&self) -> bool {
        !self.decaying
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue<T> {
    pub value: Complex<T>,
    pub tail_estimate: T,
    pub truncation: Truncation<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenValue<T> {
    pub value: T,
    pub tail_estimate: T,
    pub truncation: Truncation<T>,
}

/// Extrapolated `Σ (1 - |γ(0)|)` beyond the last enumerated length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel<T> {
    /// Geometric continuation of the frontier shell, doubled.
    pub tail_sum: T,
    pub fitted_ratio: Option<T>,
    pub decaying: bool,
}

impl<T: Real> TailModel<T> {
    pub fn exact() -> Self {
        Self {
            tail_sum: T::zero(),
            fitted_ratio: None,
            decaying: true,
        }
    }

    /// `shells[k]` is the whole-group shell sum at length `k + 1`.
    pub fn from_shells(shells: &[T]) -> Self {
        let n = shells.len();
        let decaying = n >= 3 && shells[n - 3] > shells[n - 2] && shells[n - 2] > shells[n - 1];
        let fitted_ratio = fit_decay_ratio(shells);
        let frontier = shells.last().copied().unwrap_or_else(T::infinity);
        let tail_sum = if frontier == T::zero() {
            T::zero()
        } else {
            match fitted_ratio {
                Some(r) if r < T::one() => T::lit(2.0) * frontier * r / (T::one() - r),
                _ => T::infinity(),
            }
        };
        Self {
            tail_sum,
            fitted_ratio,
            decaying,
        }
    }

    pub fn from_ball(ball: &EnumerationBall<T>) -> Self {
        if ball.rank == 0 {
            return Self::exact();
        }
        Self::from_shells(&ball.shell_displacement_sums())
    }
}

/// `4 / (π (1-|z|)^2 (1-|w|)^2)`: per-unit-displacement bound on a kernel term (disc points).
pub fn kernel_term_constant<T: Real>(z: Complex<T>, w: Complex<T>) -> T {
    let a = T::one() - z.norm();
    let b = T::one() - w.norm();
    T::lit(4.0) / (T::PI() * a * a * b * b)
}

/// `2 (1+|z|)(1+|w|) / ((1-|z|)(1-|w|))`: per-unit-displacement bound on a Green term.
pub fn green_term_constant<T: Real>(z: Complex<T>, w: Complex<T>) -> T {
    let (rz, rw) = (z.norm(), w.norm());
    T::lit(2.0) * (T::one() + rz) * (T::one() + rw) / ((T::one() - rz) * (T::one() - rw))
}

/// Truncated sum over the members of a normal subgroup, prepared once and
/// evaluated at many point pairs. All maps are stored in the disc model.
#[derive(Debug, Clone)]
pub struct QuotientSeries<T> {
    model: Model,
    maps: Vec<MoebiusMap<T>>,
    tail: TailModel<T>,
    max_len: usize,
    policy: ClosurePolicy,
}

impl<T: Real> QuotientSeries<T> {
    pub fn new<P: Membership + ?Sized>(g: &GroupSpec<T>, pred: &P, opts: &SeriesOptions<T>) -> Result<Self> {
        opts.validate()?;
        let max_len = if pred.is_trivial() && opts.closure == ClosurePolicy::RawBall {
            0
        } else {
            opts.max_len
        };
        let ball = enumerate_ball_with(
            g,
            &EnumerationOptions {
                max_len,
                cap: opts.element_cap,
                prune_below: opts.prune.then_some(opts.tol),
            },
        )?;
        let mut s = Self::from_ball(g, &ball, pred, &opts.closure)?;
        s.max_len = opts.max_len;
        Ok(s)
    }

    /// Builds the series from an existing ball of `g`.
    pub fn from_ball<P: Membership + ?Sized>(
        g: &GroupSpec<T>,
        ball: &EnumerationBall<T>,
        pred: &P,
        policy: &ClosurePolicy,
    ) -> Result<Self> {
        if ball.model != g.model() || ball.rank != g.rank() {
            return Err(Error::InvalidArgument("ball was enumerated for a different group".into()));
        }
        let members: Vec<_> = ball
            .elements()
            .par_iter()
            .filter(|e| pred.contains(&e.word))
            .collect();
        let mut maps: Vec<MoebiusMap<T>> = members.iter().map(|e| e.disc).collect();
        match policy {
            ClosurePolicy::RawBall => {}
            ClosurePolicy::InversionClosed => {
                let extra: Vec<MoebiusMap<T>> = members
                    .par_iter()
                    .filter(|e| {
                        let inv = e.word.inverse();
                        !matches!(ball.find(&inv), Some(f) if pred.contains(&f.word))
                    })
                    .map(|e| e.disc.inverse())
                    .collect();
                maps.extend(extra);
            }
            ClosurePolicy::RightCoset(g0) => {
                let g0_inv = g.to_disc().word_to_matrix(g0)?.inverse();
                maps.par_iter_mut().for_each(|m| *m = m.mul_raw(&g0_inv));
            }
        }
        let tail = if pred.is_trivial() {
            TailModel::exact()
        } else {
            TailModel::from_ball(ball)
        };
        Ok(Self {
            model: g.model(),
            maps,
            tail,
            max_len: ball.max_len,
            policy: policy.clone(),
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn maps(&self) -> &[MoebiusMap<T>] {
        &self.maps
    }

    pub fn terms_used(&self) -> usize {
        self.maps.len()
    }

    pub fn tail(&self) -> &TailModel<T> {
        &self.tail
    }

    fn truncation(&self) -> Truncation<T> {
        Truncation {
            max_len: self.max_len,
            policy: self.policy.clone(),
            terms_used: self.maps.len(),
            fitted_ratio: self.tail.fitted_ratio,
            decaying: self.tail.decaying,
        }
    }

    /// `Σ K_D(z, γw) conj(γ'(w))` for disc coordinates.
    pub fn kernel_disc(&self, z: Complex<T>, w: Complex<T>) -> Complex<T> {
        det_sum_complex(&self.maps, |m| OrbitPair::new(m, z, w).kernel_term())
    }

    /// `Σ -log |(z - γw)/(1 - conj(γw) z)|` for disc coordinates.
    pub fn green_disc(&self, z: Complex<T>, w: Complex<T>) -> Result<T> {
        let gz = one_minus_abs_sq(z);
        let gw = one_minus_abs_sq(w);
        let eps = T::lit(SINGULAR_PSEUDO_DISTANCE);
        if self
            .maps
            .par_iter()
            .any(|m| !(OrbitPair::new(m, z, w).pseudo_distance() >= eps))
        {
            return Err(Error::Singular(format!(
                "z = {z} lies on the enumerated orbit of w = {w}"
            )));
        }
        Ok(det_sum_real(&self.maps, |m| {
            let o = OrbitPair::new(m, z, w);
            let d = o.pseudo_distance();
            if d * d < T::lit(0.5) {
                -d.ln()
            } else {
                -T::lit(0.5) * (-o.pseudo_gap(gz, gw)).ln_1p()
            }
        }))
    }

    fn disc_pair(&self, z: &ModelPoint<T>, w: &ModelPoint<T>) -> Result<[(Complex<T>, Complex<T>); 2]> {
        for p in [z, w] {
            if p.model() != self.model {
                return Err(Error::ModelMismatch {
                    expected: self.model,
                    found: p.model(),
                });
            }
        }
        Ok([z.to_disc_with_derivative(), w.to_disc_with_derivative()])
    }

    pub fn kernel(&self, z: &ModelPoint<T>, w: &ModelPoint<T>) -> Result<KernelValue<T>> {
        let [(zd, dz), (wd, dw)] = self.disc_pair(z, w)?;
        let value = self.kernel_disc(zd, wd) * dz * dw.conj();
        let tail_estimate = if self.tail.tail_sum == T::zero() {
            T::zero()
        } else {
            kernel_term_constant(zd, wd) * self.tail.tail_sum * dz.norm() * dw.norm()
        };
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Singular(format!("kernel series is not finite at ({z:?}, {w:?})")));
        }
        Ok(KernelValue {
            value,
            tail_estimate,
            truncation: self.truncation(),
        })
    }

    pub fn green(&self, z: &ModelPoint<T>, w: &ModelPoint<T>) -> Result<GreenValue<T>> {
        let [(zd, _), (wd, _)] = self.disc_pair(z, w)?;
        let value = self.green_disc(zd, wd)?;
        let tail_estimate = if self.tail.tail_sum == T::zero() {
            T::zero()
        } else {
            green_term_constant(zd, wd) * self.tail.tail_sum
        };
        Ok(GreenValue {
            value,
            tail_estimate,
            truncation: self.truncation(),
        })
    }
}

pub fn quotient_kernel_series<T: Real, P: Membership + ?Sized>(
    g: &GroupSpec<T>,
    pred: &P,
    z: &ModelPoint<T>,
    w: &ModelPoint<T>,
    opts: &SeriesOptions<T>,
) -> Result<KernelValue<T>> {
    QuotientSeries::new(g, pred, opts)?.kernel(z, w)
}

pub fn green_series<T: Real, P: Membership + ?Sized>(
    g: &GroupSpec<T>,
    pred: &P,
    z: &ModelPoint<T>,
    w: &ModelPoint<T>,
    opts: &SeriesOptions<T>,
) -> Result<GreenValue<T>> {
    QuotientSeries::new(g, pred, opts)?.green(z, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{TrivialSubgroup, WholeGroup};
    use crate::kernel::closed::{annulus_pullback_oracle, disc_kernel};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn hp(re: f64, im: f64) -> ModelPoint<f64> {
        ModelPoint::halfplane(re, im).unwrap()
    }

    fn dp(re: f64, im: f64) -> ModelPoint<f64> {
        ModelPoint::disc(re, im).unwrap()
    }

    fn grid() -> Vec<ModelPoint<f64>> {
        let mut v = Vec::new();
        for x in [-0.8, -0.3, 0.0, 0.4, 1.1] {
            for y in [0.6, 0.9, 1.0, 1.7, 2.5] {
                v.push(hp(x, y));
            }
        }
        v
    }

    #[test]
    fn trivial_group_is_disc_kernel() {
        let g = GroupSpec::<f64>::trivial(Model::Disc);
        let z = dp(0.3, -0.2);
        let w = dp(-0.5, 0.1);
        let k = quotient_kernel_series(&g, &WholeGroup, &z, &w, &SeriesOptions::new(4)).unwrap();
        assert_eq!(k.value, disc_kernel(z.coordinate(), w.coordinate()));
        assert_eq!(k.tail_estimate, 0.0);
        assert_eq!(k.truncation.terms_used, 1);

        let cyc = GroupSpec::cyclic_dilation(9.0).unwrap();
        let (z, w) = (hp(0.2, 1.0), hp(-0.3, 2.0));
        let k = quotient_kernel_series(&cyc, &TrivialSubgroup, &z, &w, &SeriesOptions::new(8)).unwrap();
        let direct = crate::kernel::closed::halfplane_kernel(z.coordinate(), w.coordinate());
        assert!((k.value - direct).norm() < 1e-15);
        assert_eq!(k.tail_estimate, 0.0);
    }

    #[test]
    fn cyclic_matches_annulus_oracle() {
        let lambda = (2.0 * PI).exp();
        let g = GroupSpec::cyclic_dilation(lambda).unwrap();
        let s = QuotientSeries::new(&g, &WholeGroup, &SeriesOptions::new(40)).unwrap();
        let pts = grid();
        for z in &pts {
            for w in &pts {
                let k = s.kernel(z, w).unwrap();
                let o = annulus_pullback_oracle(lambda, z, w, 80).unwrap();
                let rel = (k.value - o).norm() / o.norm();
                assert!(rel < 1e-8, "rel {rel:e} at {z:?} {w:?}");
                assert!(k.tail_estimate < 1e-10);
            }
        }
    }

    #[test]
    fn tail_estimate_covers_truncation() {
        let g = GroupSpec::cyclic_dilation(9.0).unwrap();
        let (z, w) = (hp(0.3, 1.2), hp(-0.2, 0.8));
        let reference = quotient_kernel_series(&g, &WholeGroup, &z, &w, &SeriesOptions::new(60)).unwrap();
        for l in [2usize, 4, 6, 8] {
            let k = quotient_kernel_series(&g, &WholeGroup, &z, &w, &SeriesOptions::new(l)).unwrap();
            assert!((k.value - reference.value).norm() <= k.tail_estimate, "L={l}");
            assert!(k.truncation.decaying || l < 3);
        }
    }

    #[test]
    fn hermitian_under_inversion_closure() {
        let g = GroupSpec::schottky_rank2(2.0).unwrap();
        let opts = SeriesOptions::new(6).with_closure(ClosurePolicy::InversionClosed);
        let s = QuotientSeries::new(&g, &WholeGroup, &opts).unwrap();
        for (z, w) in [(dp(0.1, 0.2), dp(-0.3, 0.05)), (dp(0.5, -0.1), dp(0.0, 0.4))] {
            let a = s.kernel(&z, &w).unwrap().value;
            let b = s.kernel(&w, &z).unwrap().value;
            assert!((a - b.conj()).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn deck_invariance_right_coset() {
        let g = GroupSpec::schottky_rank2(2.0).unwrap();
        let g0: Word = "aB".parse().unwrap();
        let m0 = g.word_to_matrix(&g0).unwrap();
        let (z, w) = (dp(0.2, -0.1), dp(0.15, 0.3));
        let w0 = m0.apply(&w).unwrap();
        let d0 = m0.derivative(&w).unwrap();
        let raw = QuotientSeries::new(&g, &WholeGroup, &SeriesOptions::new(7)).unwrap();
        let coset = QuotientSeries::new(
            &g,
            &WholeGroup,
            &SeriesOptions::new(7).with_closure(ClosurePolicy::RightCoset(g0)),
        )
        .unwrap();
        let q = raw.kernel(&z, &w).unwrap();
        let moved = coset.kernel(&z, &w0).unwrap().value * d0.conj();
        assert!((moved - q.value).norm() < 1e-12 * q.value.norm());
        let raw_moved = raw.kernel(&z, &w0).unwrap();
        assert!((raw_moved.value * d0.conj() - q.value).norm() <= 2.0 * raw_moved.tail_estimate.max(q.tail_estimate));
    }

    #[test]
    fn automorphy_in_z() {
        let g = GroupSpec::cyclic_dilation(9.0).unwrap();
        let s = QuotientSeries::new(&g, &WholeGroup, &SeriesOptions::new(30)).unwrap();
        let m = g.generators()[0];
        let (z, w) = (hp(0.2, 0.7), hp(-0.4, 1.3));
        let q = s.kernel(&z, &w).unwrap();
        let moved = s.kernel(&m.apply(&z).unwrap(), &w).unwrap();
        let lhs = moved.value * m.derivative(&z).unwrap();
        assert!((lhs - q.value).norm() <= 2.0 * (q.tail_estimate + moved.tail_estimate) + 1e-13 * q.value.norm());
    }

    #[test]
    fn green_trivial_and_singular() {
        let g = GroupSpec::<f64>::trivial(Model::Disc);
        let w = dp(0.3, 0.4);
        let v = green_series(&g, &WholeGroup, &ModelPoint::base(Model::Disc), &w, &SeriesOptions::new(3)).unwrap();
        assert!((v.value + 0.5f64.ln()).abs() < 1e-15);
        assert!(matches!(
            green_series(&g, &WholeGroup, &w, &w, &SeriesOptions::new(3)),
            Err(Error::Singular(_))
        ));
        let cyc = GroupSpec::cyclic_dilation(9.0).unwrap();
        let z = hp(0.0, 1.0);
        assert!(matches!(
            green_series(&cyc, &WholeGroup, &z, &hp(0.0, 81.0), &SeriesOptions::new(4)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn green_symmetry_and_positivity() {
        let g = GroupSpec::cyclic_dilation(9.0).unwrap();
        let s = QuotientSeries::new(&g, &WholeGroup, &SeriesOptions::new(30)).unwrap();
        let pts = grid();
        for z in &pts {
            for w in &pts {
                if z == w {
                    continue;
                }
                let a = s.green(z, w).unwrap();
                let b = s.green(w, z).unwrap();
                assert!(a.value > 0.0);
                assert!((a.value - b.value).abs() <= 2.0 * (a.tail_estimate + b.tail_estimate) + 1e-12);
            }
        }
    }

    #[test]
    fn policy_round_trip() {
        for p in ["raw_ball", "inversion_closed", "right_coset:aB"] {
            let c: ClosurePolicy = p.parse().unwrap();
            assert_eq!(c.to_string(), p);
        }
        assert!("nope".parse::<ClosurePolicy>().is_err());
    }

    #[test]
    fn model_mismatch_rejected() {
        let g = GroupSpec::cyclic_dilation(9.0).unwrap();
        let s = QuotientSeries::new(&g, &WholeGroup, &SeriesOptions::new(3)).unwrap();
        assert!(matches!(s.kernel(&dp(0.0, 0.0), &hp(0.0, 1.0)), Err(Error::ModelMismatch { .. })));
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let g = GroupSpec::schottky_rank2(2.0).unwrap();
        let (z, w) = (dp(0.2, -0.3), dp(-0.1, 0.25));
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| {
                    let s = QuotientSeries::new(&g, &WholeGroup, &SeriesOptions::new(7)).unwrap();
                    (s.kernel(&z, &w).unwrap().value, s.green(&z, &w).unwrap().value)
                })
        };
        let a = run(1);
        for n in [2, 3, 8] {
            let b = run(n);
            assert_eq!(a.0.re.to_bits(), b.0.re.to_bits());
            assert_eq!(a.0.im.to_bits(), b.0.im.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn diagonal_positive(x in -0.8f64..0.8, y in 0.3f64..3.0) {
            let g = GroupSpec::cyclic_dilation(9.0).unwrap();
            let z = hp(x, y);
            let k = quotient_kernel_series(&g, &WholeGroup, &z, &z, &SeriesOptions::new(20)).unwrap();
            prop_assert!(k.value.im.abs() < 1e-12 * k.value.re);
            prop_assert!(k.value.re > 0.0);
        }
    }
}
