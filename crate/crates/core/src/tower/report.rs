//! Per-level tower report from a single enumeration pass.

use num_complex::Complex;
use rayon::prelude::*;

use super::bounds::upper_bound_31;
use super::stability::{ball_for, check_ranks};
use crate::error::{Error, Result};
use crate::groups::{injectivity_radius_in_ball, GroupSpec, SubgroupIndex, TowerLevel, TowerSpec};
use crate::hyperbolic::{one_minus_abs_sq, Cayley, Model, ModelPoint, MoebiusMap, OrbitPair};
use crate::kernel::{kernel_term_constant, SeriesOptions, TailModel};
use crate::scalar::Real;
use crate::summation::det_sum_bank;

/// Most levels a single report handles (one bit per level).
pub const MAX_LEVELS: usize = 64;

/// 5×5 grid of disc points with coordinates in `[-0.7/√2, 0.7/√2]`, so `|z| <= 0.7`,
/// expressed in `model`.
pub fn default_grid<T: Real>(model: Model) -> Vec<ModelPoint<T>> {
    let h = T::lit(0.7) / T::SQRT_2();
    let axis: Vec<T> = (0..5)
        .map(|k| -h + h * T::lit(k as f64) / T::lit(2.0))
        .collect();
    let mut out = Vec::with_capacity(25);
    for &x in &axis {
        for &y in &axis {
            let p = ModelPoint::new(Complex::new(x, y), Model::Disc).expect("grid inside the disc");
            out.push(match model {
                Model::Disc => p,
                Model::HalfPlane => p.cayley(),
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TowerExperiment<T> {
    pub group: GroupSpec<T>,
    pub tower: TowerSpec,
    /// Where `τ_j`, the hyperbolic-norm deviation and the ball comparison are evaluated.
    pub basepoint: ModelPoint<T>,
    /// Kernel errors are maximized over all ordered pairs of grid points.
    pub grid: Vec<ModelPoint<T>>,
    pub series: SeriesOptions<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerRow<T> {
    pub level: usize,
    pub index: SubgroupIndex,
    pub tau: T,
    pub tau_certified: bool,
    /// `max |E_j(z, w)|` over grid pairs (disc coordinates).
    pub sup_grid_error: T,
    /// `max (truncated bound + tail)` over grid pairs.
    pub ej_bound: T,
    /// `|4π |Q_j|_hyp - 1|` at the basepoint.
    pub hyp_norm_deviation: T,
    /// `4π |E_j|_hyp` bound at the basepoint, `4π (1-|z|^2)^2/4 · (bound + tail)`.
    pub hyp_norm_bound: T,
    /// `|Q_j|_hyp - 1/(4π)` at the basepoint.
    pub hyp_norm_excess: T,
    /// Ball-comparison bound on that excess at the basepoint's `τ_j`.
    pub excess_bound: T,
    pub terms_used: usize,
    /// Extrapolated kernel tail, maximized over grid pairs.
    pub tail: T,
    /// `max |Q_j - Q_top - E_j|` over grid pairs; zero up to rounding.
    pub partition_residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerReport<T> {
    pub rows: Vec<TowerRow<T>>,
    pub max_len: usize,
    pub elements: usize,
    pub grid_points: usize,
    pub fitted_ratio: Option<T>,
    pub decaying: bool,
}

impl<T: Real> TowerReport<T> {
    /// Consecutive ratios `sup_grid_error[j-1] / sup_grid_error[j]`.
    pub fn decay_factors(&self) -> Vec<T> {
        self.rows
            .windows(2)
            .map(|w| w[0].sup_grid_error / w[1].sup_grid_error)
            .collect()
    }
}

struct Tagged<T> {
    disc: MoebiusMap<T>,
    levels: u64,
    top: bool,
}

pub fn run_tower_report<T: Real>(cfg: &TowerExperiment<T>) -> Result<TowerReport<T>> {
    let (g, t) = (&cfg.group, &cfg.tower);
    check_ranks(g, t)?;
    let levels = t.levels();
    if levels > MAX_LEVELS {
        return Err(Error::InvalidTower(format!("at most {MAX_LEVELS} levels per report, got {levels}")));
    }
    for p in cfg.grid.iter().chain(std::iter::once(&cfg.basepoint)) {
        if p.model() != g.model() {
            return Err(Error::ModelMismatch {
                expected: g.model(),
                found: p.model(),
            });
        }
    }
    if cfg.grid.is_empty() {
        return Err(Error::InvalidArgument("evaluation grid is empty".into()));
    }
    let ball = ball_for(g, &cfg.series)?;

    let tagged: Vec<Tagged<T>> = ball
        .elements()
        .par_iter()
        .filter_map(|e| {
            let mut mask = 0u64;
            for j in 1..=levels {
                if t.member(j, &e.word).unwrap_or(false) {
                    mask |= 1 << (j - 1);
                }
            }
            let top = t.top_member(&e.word);
            (mask != 0 || top).then_some(Tagged {
                disc: e.disc,
                levels: mask,
                top,
            })
        })
        .collect();

    // per level: Σ (1 - |γ(0)|^2) over Γ_j ∖ Γ̃, and |Γ_j ∩ ball|
    let mut disp = vec![T::zero(); levels];
    let mut counts = vec![0usize; levels];
    for e in &tagged {
        for j in 0..levels {
            if e.levels >> j & 1 == 1 {
                counts[j] += 1;
                if !e.top {
                    disp[j] = disp[j] + e.disc.origin_displacement_sq();
                }
            }
        }
    }
    let tail = if g.rank() == 0 {
        TailModel::exact()
    } else {
        TailModel::from_ball(&ball)
    };

    let disc_pts: Vec<Complex<T>> = cfg.grid.iter().map(|p| p.to_disc_with_derivative().0).collect();
    let pairs: Vec<(Complex<T>, Complex<T>)> = disc_pts
        .iter()
        .flat_map(|&z| disc_pts.iter().map(move |&w| (z, w)))
        .collect();

    // slots: 0 = Q_top, 1 + 2k = Q_{k+1}, 2 + 2k = E_{k+1}
    let nslots = 1 + 2 * levels;
    let eval = |z: Complex<T>, w: Complex<T>| -> Vec<Complex<T>> {
        det_sum_bank(&tagged, nslots, |e, bank| {
            let term = OrbitPair::new(&e.disc, z, w).kernel_term();
            if e.top {
                bank.add(0, term);
            }
            for j in 0..levels {
                if e.levels >> j & 1 == 1 {
                    bank.add(1 + 2 * j, term);
                    if !e.top {
                        bank.add(2 + 2 * j, term);
                    }
                }
            }
        })
    };

    let zero = T::zero();
    let mut sup_err = vec![zero; levels];
    let mut sup_bound = vec![zero; levels];
    let mut sup_tail = zero;
    let mut residual = vec![zero; levels];
    for &(z, w) in &pairs {
        let v = eval(z, w);
        let c = kernel_term_constant(z, w);
        let tail_zw = if tail.tail_sum == zero { zero } else { c * tail.tail_sum };
        sup_tail = sup_tail.max(tail_zw);
        for j in 0..levels {
            let e = v[2 + 2 * j];
            sup_err[j] = sup_err[j].max(e.norm());
            sup_bound[j] = sup_bound[j].max(c / T::lit(4.0) * disp[j] + tail_zw);
            residual[j] = residual[j].max((v[1 + 2 * j] - v[0] - e).norm());
        }
    }

    let (bd, _) = cfg.basepoint.to_disc_with_derivative();
    let bv = eval(bd, bd);
    let hf = one_minus_abs_sq(bd) * one_minus_abs_sq(bd) / T::lit(4.0);
    let four_pi = T::lit(4.0) * T::PI();
    let cb = kernel_term_constant(bd, bd);
    let base_tail = if tail.tail_sum == zero { zero } else { cb * tail.tail_sum };

    let mut rows = Vec::with_capacity(levels);
    for j in 1..=levels {
        let level = TowerLevel::new(t, j)?;
        let tau = injectivity_radius_in_ball(&ball, &level, &cfg.basepoint);
        let q_top = bv[0].re;
        let e = bv[2 * j].re;
        let top_dev = four_pi * hf * q_top - T::one();
        let q_j = bv[2 * j - 1].re;
        let excess_bound = if tau.tau > zero {
            upper_bound_31(tau.tau)?
        } else {
            T::infinity()
        };
        rows.push(TowerRow {
            level: j,
            index: t.index(j)?,
            tau: tau.tau,
            tau_certified: tau.certified,
            sup_grid_error: sup_err[j - 1],
            ej_bound: sup_bound[j - 1],
            hyp_norm_deviation: (top_dev + four_pi * hf * e).abs(),
            hyp_norm_bound: four_pi * hf * (cb / T::lit(4.0) * disp[j - 1] + base_tail),
            hyp_norm_excess: hf * q_j - T::one() / four_pi,
            excess_bound,
            terms_used: counts[j - 1],
            tail: sup_tail,
            partition_residual: residual[j - 1],
        });
    }
    Ok(TowerReport {
        rows,
        max_len: ball.max_len,
        elements: ball.len(),
        grid_points: cfg.grid.len(),
        fitted_ratio: tail.fitted_ratio,
        decaying: tail.decaying,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{TowerKind, TowerTop};

    fn cyclic(levels: u32, max_len: usize) -> TowerExperiment<f64> {
        let group = GroupSpec::cyclic_dilation(9.0).unwrap();
        TowerExperiment {
            tower: TowerSpec::dyadic(TowerKind::CyclicPowers, levels, TowerTop::Trivial, 1).unwrap(),
            basepoint: ModelPoint::base(Model::HalfPlane),
            grid: default_grid(Model::HalfPlane),
            series: SeriesOptions::new(max_len),
            group,
        }
    }

    #[test]
    fn grid_shape() {
        let g = default_grid::<f64>(Model::Disc);
        assert_eq!(g.len(), 25);
        let m = g.iter().map(|p| p.coordinate().norm()).fold(0.0, f64::max);
        assert!((m - 0.7).abs() < 1e-15);
        let h = default_grid::<f64>(Model::HalfPlane);
        assert!(h.iter().all(|p| p.model() == Model::HalfPlane));
    }

    #[test]
    fn cyclic_report_columns() {
        let r = run_tower_report(&cyclic(6, 128)).unwrap();
        assert_eq!(r.rows.len(), 6);
        let log9 = 9f64.ln();
        for (k, row) in r.rows.iter().enumerate() {
            let j = k + 1;
            assert_eq!(row.index, SubgroupIndex::Finite(1 << j));
            assert!((row.tau - (1u64 << (j - 1)) as f64 * log9).abs() < 1e-9 * row.tau);
            assert!(row.tau_certified);
            assert!(row.sup_grid_error <= row.ej_bound);
            assert!(row.partition_residual <= 1e-12 * (1.0 / std::f64::consts::PI));
            assert!(row.hyp_norm_deviation <= row.hyp_norm_bound * (1.0 + 1e-6) + 1e-15);
            assert!(row.hyp_norm_excess <= row.excess_bound);
            assert_eq!(row.terms_used, 2 * (128 >> j) + 1);
        }
        for f in r.decay_factors().iter().skip(1) {
            assert!(*f >= 3.0, "factor {f}");
        }
    }

    #[test]
    fn schottky_abelian_bounds_decrease() {
        let group = GroupSpec::schottky_rank2(2.0).unwrap();
        let cfg = TowerExperiment {
            tower: TowerSpec::new(TowerKind::AbelianMod, vec![2, 4, 8], TowerTop::Commutator, 2).unwrap(),
            basepoint: ModelPoint::base(Model::Disc),
            grid: default_grid(Model::Disc),
            series: SeriesOptions::new(6),
            group,
        };
        let r = run_tower_report(&cfg).unwrap();
        for w in r.rows.windows(2) {
            assert!(w[1].ej_bound < w[0].ej_bound);
        }
        for row in &r.rows {
            assert!(row.partition_residual < 1e-12);
            assert!(row.sup_grid_error <= row.ej_bound);
            assert!(!row.tau_certified);
        }
    }

    #[test]
    fn model_mismatch() {
        let mut cfg = cyclic(2, 8);
        cfg.basepoint = ModelPoint::base(Model::Disc);
        assert!(matches!(run_tower_report(&cfg), Err(Error::ModelMismatch { .. })));
    }
}
