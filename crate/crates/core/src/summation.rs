//! Compensated accumulation with a reduction order that does not depend on
//! the number of worker threads.
//!
//! Inputs are split into fixed-size chunks, each chunk is summed sequentially
//! with Neumaier compensation, and the per-chunk results are folded by a
//! pairwise tree whose shape depends only on the number of chunks.

use num_complex::Complex;
use rayon::prelude::*;

use crate::scalar::Real;

/// Elements per reduction chunk. Fixed so results are reproducible.
pub const CHUNK: usize = 512;

/// Neumaier-compensated running sum of real values.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Compensated<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.add(other.comp);
        self
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Componentwise compensated sum of complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplex<T> {
    re: Compensated<T>,
    im: Compensated<T>,
}

impl<T: Real> CompensatedComplex<T> {
    pub fn new() -> Self {
        Self {
            re: Compensated::new(),
            im: Compensated::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            re: self.re.merge(other.re),
            im: self.im.merge(other.im),
        }
    }

    #[inline]
    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

/// Folds values pairwise: `((v0+v1)+(v2+v3))+...`. The tree depends only on `values.len()`.
pub fn tree_fold<A, F>(mut values: Vec<A>, zero: A, combine: F) -> A
where
    A: Clone,
    F: Fn(A, A) -> A,
{
    if values.is_empty() {
        return zero;
    }
    while values.len() > 1 {
        let mut next = Vec::with_capacity(values.len().div_ceil(2));
        let mut it = values.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        values = next;
    }
    values.pop().unwrap_or(zero)
}

/// Deterministic parallel sum of `f(item)` over `items`.
pub fn det_sum_complex<I, T, F>(items: &[I], f: F) -> Complex<T>
where
    I: Sync,
    T: Real,
    F: Fn(&I) -> Complex<T> + Sync,
{
    let partials: Vec<CompensatedComplex<T>> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = CompensatedComplex::new();
            for it in chunk {
                acc.add(f(it));
            }
            acc
        })
        .collect();
    tree_fold(partials, CompensatedComplex::new(), |a, b| a.merge(b)).value()
}

/// Deterministic parallel sum of real values `f(item)`.
pub fn det_sum_real<I, T, F>(items: &[I], f: F) -> T
where
    I: Sync,
    T: Real,
    F: Fn(&I) -> T + Sync,
{
    let partials: Vec<Compensated<T>> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Compensated::new();
            for it in chunk {
                acc.add(f(it));
            }
            acc
        })
        .collect();
    tree_fold(partials, Compensated::new(), |a, b| a.merge(b)).value()
}

/// A fixed bank of compensated complex accumulators, merged slot by slot.
#[derive(Debug, Clone)]
pub struct AccumulatorBank<T> {
    slots: Vec<CompensatedComplex<T>>,
}

impl<T: Real> AccumulatorBank<T> {
    pub fn new(n: usize) -> Self {
        Self {
            slots: vec![CompensatedComplex::new(); n],
        }
    }

    #[inline]
    pub fn add(&mut self, slot: usize, z: Complex<T>) {
        self.slots[slot].add(z);
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            slots: self
                .slots
                .into_iter()
                .zip(other.slots)
                .map(|(a, b)| a.merge(b))
                .collect(),
        }
    }

    pub fn values(&self) -> Vec<Complex<T>> {
        self.slots.iter().map(|s| s.value()).collect()
    }
}

/// Deterministic parallel accumulation into `n` slots.
pub fn det_sum_bank<I, T, F>(items: &[I], n: usize, f: F) -> Vec<Complex<T>>
where
    I: Sync,
    T: Real,
    F: Fn(&I, &mut AccumulatorBank<T>) + Sync,
{
    let partials: Vec<AccumulatorBank<T>> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut bank = AccumulatorBank::new(n);
            for it in chunk {
                f(it, &mut bank);
            }
            bank
        })
        .collect();
    tree_fold(partials, AccumulatorBank::new(n), |a, b| a.merge(b)).values()
}
