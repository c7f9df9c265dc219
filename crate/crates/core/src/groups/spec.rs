//! Group and tower specifications, and subgroup membership predicates.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::word::{Letter, Word};
use crate::error::{Error, Result};
use crate::hyperbolic::{Cayley, Model, MoebiusMap};
use crate::scalar::Real;

/// A free, discrete group given by generator matrices.
///
/// Freeness, discreteness and convergence type are asserted by the caller and
/// are not verified. A spec with no generators is the trivial group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec<T> {
    model: Model,
    generators: Vec<MoebiusMap<T>>,
    pub asserted_free_discrete: bool,
    pub asserted_convergence_type: bool,
}

impl<T: Real> GroupSpec<T> {
    pub fn new(model: Model, generators: Vec<MoebiusMap<T>>) -> Result<Self> {
        for g in &generators {
            if g.model() != model {
                return Err(Error::ModelMismatch {
                    expected: model,
                    found: g.model(),
                });
            }
        }
        for i in 0..generators.len() {
            for j in 0..i {
                if generators[i].same_map(&generators[j]) {
                    return Err(Error::DuplicateGenerator(j, i));
                }
            }
        }
        Ok(Self {
            model,
            generators,
            asserted_free_discrete: true,
            asserted_convergence_type: true,
        })
    }

    pub fn trivial(model: Model) -> Self {
        Self {
            model,
            generators: Vec::new(),
            asserted_free_discrete: true,
            asserted_convergence_type: true,
        }
    }

    /// Cyclic group generated by the half-plane dilation `w -> lambda w`.
    pub fn cyclic_dilation(lambda: T) -> Result<Self> {
        Self::new(Model::HalfPlane, vec![MoebiusMap::dilation(lambda)?])
    }

    /// Rank-2 Schottky group on the disc generated by hyperbolic translations of
    /// length `2 acosh(cosh_half_length)` along the real and imaginary diameters.
    /// The four isometric circles are disjoint once `cosh_half_length > sqrt(2)`.
    pub fn schottky_rank2(cosh_half_length: T) -> Result<Self> {
        if !(cosh_half_length > T::SQRT_2()) {
            return Err(Error::InvalidArgument(format!(
                "isometric circles overlap for cosh {cosh_half_length} <= sqrt(2)"
            )));
        }
        let ch = cosh_half_length;
        let sh = (ch * ch - T::one()).sqrt();
        let r = |x: T| num_complex::Complex::new(x, T::zero());
        let im = |x: T| num_complex::Complex::new(T::zero(), x);
        let a = MoebiusMap::new(r(ch), r(sh), r(sh), r(ch), Model::Disc)?;
        let b = MoebiusMap::new(r(ch), im(sh), im(-sh), r(ch), Model::Disc)?;
        Self::new(Model::Disc, vec![a, b])
    }

    #[inline]
    pub fn model(&self) -> Model {
        self.model
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[MoebiusMap<T>] {
        &self.generators
    }

    /// The same group conjugated into the disc model.
    pub fn to_disc(&self) -> Self {
        match self.model {
            Model::Disc => self.clone(),
            Model::HalfPlane => Self {
                model: Model::Disc,
                generators: self.generators.iter().map(|g| g.cayley()).collect(),
                asserted_free_discrete: self.asserted_free_discrete,
                asserted_convergence_type: self.asserted_convergence_type,
            },
        }
    }

    pub fn letter_matrix(&self, l: Letter) -> Result<MoebiusMap<T>> {
        let g = self
            .generators
            .get(l.generator as usize)
            .ok_or(Error::GeneratorOutOfRange {
                index: l.generator as usize,
                rank: self.rank(),
            })?;
        Ok(if l.inverse { g.inverse() } else { *g })
    }

    /// Ordered product of generator matrices along the reduced word.
    pub fn word_to_matrix(&self, w: &Word) -> Result<MoebiusMap<T>> {
        let mut m = MoebiusMap::identity(self.model);
        for &l in w.letters() {
            m = m.compose(&self.letter_matrix(l)?)?;
        }
        Ok(m)
    }
}

pub fn word_to_matrix<T: Real>(g: &GroupSpec<T>, w: &Word) -> Result<MoebiusMap<T>> {
    g.word_to_matrix(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerKind {
    /// `Γ_j = <γ^{m_j}>` in a cyclic group.
    CyclicPowers,
    /// `Γ_j` = words whose exponent sums all vanish mod `m_j`.
    AbelianMod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerTop {
    Trivial,
    Commutator,
}

/// Index of a subgroup, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgroupIndex {
    Finite(u128),
    Infinite,
}

impl fmt::Display for SubgroupIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupIndex::Finite(n) => write!(f, "{n}"),
            SubgroupIndex::Infinite => f.write_str("inf"),
        }
    }
}

/// A decreasing chain of normal subgroups cut out by congruence conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerSpec {
    pub kind: TowerKind,
    schedule: Vec<u64>,
    pub top: TowerTop,
    rank: usize,
}

impl TowerSpec {
    pub fn new(kind: TowerKind, schedule: Vec<u64>, top: TowerTop, rank: usize) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::InvalidTower("schedule is empty".into()));
        }
        if schedule[0] == 0 {
            return Err(Error::InvalidTower("moduli must be positive".into()));
        }
        for p in schedule.windows(2) {
            if p[1] <= p[0] || p[1] % p[0] != 0 {
                return Err(Error::InvalidTower(format!(
                    "schedule must be an increasing divisibility chain, got {} then {}",
                    p[0], p[1]
                )));
            }
        }
        match kind {
            TowerKind::CyclicPowers if rank != 1 => {
                return Err(Error::InvalidTower(format!(
                    "cyclic_powers needs a rank-1 group, got rank {rank}"
                )))
            }
            TowerKind::AbelianMod if rank == 0 => {
                return Err(Error::InvalidTower("abelian_mod needs rank >= 1".into()))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            schedule,
            top,
            rank,
        })
    }

    /// `m_j = 2^j` for `j = 1..=levels`.
    pub fn dyadic(kind: TowerKind, levels: u32, top: TowerTop, rank: usize) -> Result<Self> {
        Self::new(kind, (1..=levels).map(|j| 1u64 << j).collect(), top, rank)
    }

    pub fn levels(&self) -> usize {
        self.schedule.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn schedule(&self) -> &[u64] {
        &self.schedule
    }

    fn modulus(&self, level: usize) -> Result<u64> {
        if level == 0 || level > self.schedule.len() {
            return Err(Error::InvalidLevel {
                level,
                levels: self.schedule.len(),
            });
        }
        Ok(self.schedule[level - 1])
    }

    /// Membership of `w` in `Γ_level` (levels are 1-based).
    pub fn member(&self, level: usize, w: &Word) -> Result<bool> {
        let m = self.modulus(level)? as i64;
        Ok(self
            .rank_checked_abelianization(w)
            .iter()
            .all(|e| e.rem_euclid(m) == 0))
    }

    /// Membership in the intersection of the tower.
    pub fn top_member(&self, w: &Word) -> bool {
        match self.top {
            TowerTop::Trivial => w.is_empty(),
            TowerTop::Commutator => self.rank_checked_abelianization(w).iter().all(|&e| e == 0),
        }
    }

    fn rank_checked_abelianization(&self, w: &Word) -> Vec<i64> {
        w.abelianization(self.rank)
    }

    /// `[Γ : Γ_level]`.
    pub fn index(&self, level: usize) -> Result<SubgroupIndex> {
        let m = self.modulus(level)? as u128;
        let exp = match self.kind {
            TowerKind::CyclicPowers => 1,
            TowerKind::AbelianMod => self.rank as u32,
        };
        Ok(m.checked_pow(exp)
            .map_or(SubgroupIndex::Infinite, SubgroupIndex::Finite))
    }

    /// Index of the tower's intersection. Always infinite for the supported towers.
    pub fn top_index(&self) -> SubgroupIndex {
        SubgroupIndex::Infinite
    }
}

pub fn tower_member(t: &TowerSpec, level: usize, w: &Word) -> Result<bool> {
    t.member(level, w)
}

pub fn tower_index(t: &TowerSpec, level: usize) -> Result<SubgroupIndex> {
    t.index(level)
}

/// Indicator of a normal subgroup, evaluated on reduced words.
pub trait Membership: Sync {
    fn contains(&self, w: &Word) -> bool;

    /// True when the subgroup is known to be `{1}`; lets series skip tail estimates.
    fn is_trivial(&self) -> bool {
        false
    }
}

impl<F> Membership for F
where
    F: Fn(&Word) -> bool + Sync,
{
    fn contains(&self, w: &Word) -> bool {
        self(w)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WholeGroup;

impl Membership for WholeGroup {
    fn contains(&self, _: &Word) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrivialSubgroup;

impl Membership for TrivialSubgroup {
    fn contains(&self, w: &Word) -> bool {
        w.is_empty()
    }

    fn is_trivial(&self) -> bool {
        true
    }
}

/// `Γ_j` of a tower.
#[derive(Debug, Clone, Copy)]
pub struct TowerLevel<'a> {
    tower: &'a TowerSpec,
    level: usize,
}

impl<'a> TowerLevel<'a> {
    pub fn new(tower: &'a TowerSpec, level: usize) -> Result<Self> {
        tower.modulus(level)?;
        Ok(Self { tower, level })
    }

    pub fn level(&self) -> usize {
        self.level
    }
}

impl Membership for TowerLevel<'_> {
    fn contains(&self, w: &Word) -> bool {
        self.tower.member(self.level, w).unwrap_or(false)
    }
}

/// The tower's intersection subgroup.
#[derive(Debug, Clone, Copy)]
pub struct TowerIntersection<'a>(pub &'a TowerSpec);

impl Membership for TowerIntersection<'_> {
    fn contains(&self, w: &Word) -> bool {
        self.0.top_member(w)
    }

    fn is_trivial(&self) -> bool {
        self.0.top == TowerTop::Trivial || self.0.rank == 1
    }
}

/// Checks inversion closure and invariance under conjugation by every generator
/// on the supplied sample words.
pub fn spot_check_normality<P: Membership + ?Sized>(pred: &P, rank: usize, sample: &[Word]) -> bool {
    sample.iter().all(|w| {
        let inside = pred.contains(w);
        inside == pred.contains(&w.inverse())
            && Letter::alphabet(rank).into_iter().all(|l| {
                let x = Word::new([l]);
                pred.contains(&x.concat(w).concat(&x.inverse())) == inside
            })
    })
}
