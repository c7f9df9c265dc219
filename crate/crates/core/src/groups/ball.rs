//! Enumeration of word balls `{γ : |γ| <= L}` with prefix-incremental matrices.

use rayon::prelude::*;

use super::spec::GroupSpec;
use super::word::{Letter, Word};
use crate::error::{Error, Result};
use crate::hyperbolic::{Model, MoebiusMap};
use crate::scalar::Real;

pub const DEFAULT_ELEMENT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone)]
pub struct BallElement<T> {
    pub word: Word,
    /// Matrix in the group's own model.
    pub map: MoebiusMap<T>,
    /// The same element conjugated to the disc.
    pub disc: MoebiusMap<T>,
    /// `1 - |γ(0)|` in the disc model.
    pub displacement: T,
    /// `1 - |γ(0)|^2` in the disc model.
    pub displacement_sq: T,
}

impl<T: Real> BallElement<T> {
    fn new(word: Word, map: MoebiusMap<T>, disc: MoebiusMap<T>) -> Self {
        let displacement_sq = disc.origin_displacement_sq();
        let displacement = displacement_sq / (T::one() + disc.origin_image_abs());
        Self {
            word,
            map,
            disc,
            displacement,
            displacement_sq,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions<T> {
    pub max_len: usize,
    pub cap: u128,
    /// Stop extending words whose `1 - |γ(0)|^2` is already below this value.
    pub prune_below: Option<T>,
}

impl<T> EnumerationOptions<T> {
    pub fn new(max_len: usize) -> Self {
        Self {
            max_len,
            cap: DEFAULT_ELEMENT_CAP,
            prune_below: None,
        }
    }
}

/// All reduced words up to a length, in (length, lexicographic) order.
#[derive(Debug, Clone)]
pub struct EnumerationBall<T> {
    pub max_len: usize,
    pub model: Model,
    pub rank: usize,
    pub pruned: bool,
    elements: Vec<BallElement<T>>,
    shell_starts: Vec<usize>,
}

/// Number of reduced words of length `<= max_len` in a free group of rank `rank`.
pub fn ball_size(rank: usize, max_len: usize) -> u128 {
    match rank {
        0 => 1,
        1 => 2 * max_len as u128 + 1,
        _ => {
            let r = rank as u128;
            let mut total: u128 = 1;
            let mut shell: u128 = 2 * r;
            for _ in 0..max_len {
                total = total.saturating_add(shell);
                shell = shell.saturating_mul(2 * r - 1);
            }
            total
        }
    }
}

pub fn enumerate_ball<T: Real>(g: &GroupSpec<T>, max_len: usize) -> Result<EnumerationBall<T>> {
    enumerate_ball_with(g, &EnumerationOptions::new(max_len))
}

pub fn enumerate_ball_with<T: Real>(
    g: &GroupSpec<T>,
    opts: &EnumerationOptions<T>,
) -> Result<EnumerationBall<T>> {
    let rank = g.rank();
    let expected = ball_size(rank, opts.max_len);
    if opts.prune_below.is_none() && expected > opts.cap {
        return Err(Error::ResourceCap {
            count: expected,
            cap: opts.cap,
        });
    }
    let disc_group = g.to_disc();
    let alphabet: Vec<(Letter, MoebiusMap<T>, MoebiusMap<T>)> = Letter::alphabet(rank)
        .into_iter()
        .map(|l| Ok((l, g.letter_matrix(l)?, disc_group.letter_matrix(l)?)))
        .collect::<Result<_>>()?;

    let root = BallElement::new(
        Word::identity(),
        MoebiusMap::identity(g.model()),
        MoebiusMap::identity(Model::Disc),
    );
    let mut elements = vec![root];
    let mut shell_starts = vec![0usize];
    let mut frontier_start = 0usize;
    for _ in 0..opts.max_len {
        let frontier = &elements[frontier_start..];
        let next: Vec<BallElement<T>> = frontier
            .par_iter()
            .flat_map_iter(|parent| {
                let last = parent.word.letters().last().copied();
                let extend = opts
                    .prune_below
                    .map_or(true, |t| parent.displacement_sq >= t);
                alphabet
                    .iter()
                    .filter(move |(l, _, _)| extend && Some(l.inv()) != last)
                    .map(move |(l, m, md)| {
                        BallElement::new(
                            parent.word.push_reduced(*l),
                            parent.map.mul_raw(m),
                            parent.disc.mul_raw(md),
                        )
                    })
            })
            .collect();
        if next.is_empty() {
            break;
        }
        frontier_start = elements.len();
        shell_starts.push(frontier_start);
        elements.extend(next);
        if elements.len() as u128 > opts.cap {
            return Err(Error::ResourceCap {
                count: elements.len() as u128,
                cap: opts.cap,
            });
        }
    }
    Ok(EnumerationBall {
        max_len: opts.max_len,
        model: g.model(),
        rank,
        pruned: opts.prune_below.is_some(),
        elements,
        shell_starts,
    })
}

impl<T: Real> EnumerationBall<T> {
    pub fn elements(&self) -> &[BallElement<T>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements of word length exactly `l` (empty past the last non-empty shell).
    pub fn shell(&self, l: usize) -> &[BallElement<T>] {
        match self.shell_starts.get(l) {
            None => &[],
            Some(&start) => {
                let end = self
                    .shell_starts
                    .get(l + 1)
                    .copied()
                    .unwrap_or(self.elements.len());
                &self.elements[start..end]
            }
        }
    }

    pub fn find(&self, w: &Word) -> Option<&BallElement<T>> {
        self.elements
            .binary_search_by(|e| (e.word.len(), &e.word).cmp(&(w.len(), w)))
            .ok()
            .map(|i| &self.elements[i])
    }

    /// `Σ_{|γ| = l} (1 - |γ(0)|)` for `l = 1..=max_len`.
    pub fn shell_displacement_sums(&self) -> Vec<T> {
        (1..=self.max_len)
            .map(|l| {
                self.shell(l)
                    .iter()
                    .fold(T::zero(), |s, e| s + e.displacement)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::spec::GroupSpec;

    #[test]
    fn closed_form_counts() {
        assert_eq!(ball_size(2, 2), 17);
        assert_eq!(ball_size(1, 5), 11);
        assert_eq!(ball_size(0, 9), 1);
        assert_eq!(ball_size(3, 3), 1 + 6 + 30 + 150);
    }

    #[test]
    fn examples() {
        let g = GroupSpec::<f64>::schottky_rank2(2.0).unwrap();
        let b0 = enumerate_ball(&g, 0).unwrap();
        assert_eq!(b0.len(), 1);
        assert!(b0.elements()[0].word.is_empty());
        assert_eq!(enumerate_ball(&g, 2).unwrap().len(), 17);

        let c = GroupSpec::<f64>::cyclic_dilation(9.0).unwrap();
        let b = enumerate_ball(&c, 5).unwrap();
        assert_eq!(b.len(), 11);
        let words: Vec<String> = b.elements().iter().map(|e| e.word.to_string()).collect();
        assert_eq!(words[..5], ["1", "a", "A", "aa", "AA"]);
    }

    #[test]
    fn counts_match_closed_form() {
        let g = GroupSpec::<f64>::schottky_rank2(2.0).unwrap();
        for l in 0..=6 {
            assert_eq!(enumerate_ball(&g, l).unwrap().len() as u128, ball_size(2, l));
        }
    }

    #[test]
    fn order_is_length_then_lexicographic() {
        let g = GroupSpec::<f64>::schottky_rank2(2.0).unwrap();
        let b = enumerate_ball(&g, 4).unwrap();
        for p in b.elements().windows(2) {
            assert!((p[0].word.len(), &p[0].word) < (p[1].word.len(), &p[1].word));
        }
    }

    #[test]
    fn closed_under_inversion_with_matching_matrices() {
        let g = GroupSpec::<f64>::schottky_rank2(2.2).unwrap();
        let b = enumerate_ball(&g, 4).unwrap();
        for e in b.elements() {
            let inv = b.find(&e.word.inverse()).expect("inverse present");
            assert!(inv.map.same_map(&e.map.inverse()));
            assert!((inv.displacement - e.displacement).abs() <= 1e-12 * e.displacement);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = GroupSpec::<f64>::schottky_rank2(2.0).unwrap();
        let mut o = EnumerationOptions::new(12);
        o.cap = 1000;
        assert!(matches!(enumerate_ball_with(&g, &o), Err(Error::ResourceCap { .. })));
        o.prune_below = Some(1e-3);
        o.cap = 10_000_000;
        let pruned = enumerate_ball_with(&g, &o).unwrap();
        assert!(pruned.len() < ball_size(2, 12) as usize);
        assert!(pruned.pruned);
    }

    #[test]
    fn result_independent_of_worker_count() {
        let g = GroupSpec::<f64>::schottky_rank2(2.0).unwrap();
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| enumerate_ball(&g, 7).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.elements().iter().zip(b.elements()) {
            assert_eq!(x.word, y.word);
            assert_eq!(x.displacement.to_bits(), y.displacement.to_bits());
        }
    }

    #[test]
    fn halfplane_displacements_are_accurate_far_out() {
        // w -> 9^n w sends 0 (disc) = i to 9^n i, so 1 - |γ(0)| = 2/(9^n + 1)
        let c = GroupSpec::<f64>::cyclic_dilation(9.0).unwrap();
        let b = enumerate_ball(&c, 40).unwrap();
        for n in [1usize, 5, 20, 40] {
            let e = b.find(&Word::power(0, n as i64)).unwrap();
            let exact = 2.0 / (9f64.powi(n as i32) + 1.0);
            assert!((e.displacement - exact).abs() <= 1e-12 * exact, "n={n}");
        }
    }
}
