//! Adaptive phase tracking along contour pieces.

use super::Analytic;
use crate::error::{CoreError, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Refinement levels before giving up on a piece.
const MAX_LEVELS: usize = 64;
/// Largest change of `ln |F|` allowed between neighbouring samples.
const MAX_LOG_RATIO: f64 = 1.0;
/// Largest dip of `ln |F|` on an interval below both of its neighbours.
/// A deeper dip can hide a multiple zero whose phase turn aliases to zero.
const MAX_LOG_DIP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Piece {
    Segment { a: Complex64, b: Complex64 },
    /// Counter-clockwise from `t0` to `t1` (radians).
    Arc { center: Complex64, radius: f64, t0: f64, t1: f64 },
}

impl Piece {
    fn point(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Segment { a, b } => {
                if s == 1.0 {
                    b
                } else {
                    a + (b - a) * s
                }
            }
            Piece::Arc { center, radius, t0, t1 } => center + Complex64::from_polar(radius, t0 + (t1 - t0) * s),
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => (b - a).norm(),
            Piece::Arc { radius, t0, t1, .. } => radius * (t1 - t0).abs(),
        }
    }

    /// Orientation-free cache key for segments, and whether `self` runs
    /// against the canonical direction.
    fn segment_key(&self) -> Option<([u64; 4], bool)> {
        match *self {
            Piece::Segment { a, b } => {
                let ka = (a.re.to_bits(), a.im.to_bits());
                let kb = (b.re.to_bits(), b.im.to_bits());
                if ka <= kb {
                    Some(([ka.0, ka.1, kb.0, kb.1], false))
                } else {
                    Some(([kb.0, kb.1, ka.0, ka.1], true))
                }
            }
            Piece::Arc { .. } => None,
        }
    }

    fn reversed(&self) -> Piece {
        match *self {
            Piece::Segment { a, b } => Piece::Segment { a: b, b: a },
            Piece::Arc { center, radius, t0, t1 } => Piece::Arc {
                center,
                radius,
                t0: t1,
                t1: t0,
            },
        }
    }
}

/// Phase change along a piece, plus the smallest `|F|` seen on it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhaseSample {
    pub delta: f64,
    pub min_abs: f64,
    pub max_abs: f64,
}

/// Memoizing evaluator shared by every contour of one search.
pub(crate) struct Sampler<'a, F: Analytic + ?Sized> {
    f: &'a F,
    values: Mutex<HashMap<(u64, u64), Complex64>>,
    edges: Mutex<HashMap<[u64; 4], PhaseSample>>,
    evaluations: AtomicUsize,
    /// Smallest piece length, relative to `scale`, before a phase jump is
    /// blamed on a zero sitting on the contour.
    pub zero_tol: f64,
    pub scale: f64,
}

impl<'a, F: Analytic + ?Sized> Sampler<'a, F> {
    pub fn new(f: &'a F, zero_tol: f64, scale: f64) -> Self {
        Self {
            f,
            values: Mutex::new(HashMap::new()),
            edges: Mutex::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
            zero_tol,
            scale,
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(v) = self.values.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.f.value(z)?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        if !v.is_finite() {
            return Err(CoreError::NonFinite { z });
        }
        self.values.lock().expect("cache poisoned").insert(key, v);
        Ok(v)
    }

    pub fn eval_many(&self, zs: &[Complex64]) -> Result<Vec<Complex64>> {
        zs.par_iter().map(|&z| self.eval(z)).collect()
    }

    /// Phase change of `F` along `piece` using at least `n0` initial
    /// intervals, bisecting until every step turns by less than `pi/2`, no
    /// step changes `ln |F|` by more than [`MAX_LOG_RATIO`] and no interval
    /// dips more than [`MAX_LOG_DIP`] below its neighbours.
    pub fn phase(&self, piece: &Piece, n0: usize) -> Result<PhaseSample> {
        if let Some((key, flipped)) = piece.segment_key() {
            if let Some(s) = self.edges.lock().expect("cache poisoned").get(&key) {
                return Ok(if flipped { PhaseSample { delta: -s.delta, ..*s } } else { *s });
            }
            let canonical = if flipped { piece.reversed() } else { *piece };
            let s = self.phase_uncached(&canonical, n0)?;
            self.edges.lock().expect("cache poisoned").insert(key, s);
            return Ok(if flipped { PhaseSample { delta: -s.delta, ..s } } else { s });
        }
        self.phase_uncached(piece, n0)
    }

    fn phase_uncached(&self, piece: &Piece, n0: usize) -> Result<PhaseSample> {
        let n0 = n0.max(1);
        let mut s: Vec<f64> = (0..=n0).map(|i| i as f64 / n0 as f64).collect();
        let pts: Vec<Complex64> = s.iter().map(|&t| piece.point(t)).collect();
        let mut v = self.eval_many(&pts)?;
        let len = piece.length();
        for level in 0.. {
            if let Some(i) = v.iter().position(|x| x.norm() == 0.0) {
                return Err(CoreError::BoundaryZero {
                    near: piece.point(s[i]),
                    nudges: 0,
                });
            }
            let n = s.len() - 1;
            let coarse: Vec<usize> = (0..n)
                .filter(|&i| {
                    let r = v[i + 1] / v[i];
                    if r.arg().abs() >= FRAC_PI_2 || r.norm().ln().abs() > MAX_LOG_RATIO {
                        return true;
                    }
                    if n < 2 {
                        return false;
                    }
                    // end intervals compare against their one neighbour
                    let left = if i > 0 { v[i - 1].norm() } else { f64::INFINITY };
                    let right = if i + 1 < n { v[i + 2].norm() } else { f64::INFINITY };
                    let inner = v[i].norm().max(v[i + 1].norm());
                    let outer = left.min(right);
                    (outer / inner).ln() > MAX_LOG_DIP
                })
                .collect();
            if coarse.is_empty() {
                break;
            }
            if level >= MAX_LEVELS {
                return Err(CoreError::NonConvergent(format!(
                    "phase refinement exceeded {MAX_LEVELS} levels on a contour piece"
                )));
            }
            if let Some(&i) = coarse
                .iter()
                .find(|&&i| (s[i + 1] - s[i]) * len < self.zero_tol * self.scale)
            {
                return Err(CoreError::BoundaryZero {
                    near: piece.point(0.5 * (s[i] + s[i + 1])),
                    nudges: 0,
                });
            }
            let mids: Vec<f64> = coarse.iter().map(|&i| 0.5 * (s[i] + s[i + 1])).collect();
            let mid_pts: Vec<Complex64> = mids.iter().map(|&t| piece.point(t)).collect();
            let mid_vals = self.eval_many(&mid_pts)?;
            let mut ns = Vec::with_capacity(s.len() + mids.len());
            let mut nv = Vec::with_capacity(s.len() + mids.len());
            let mut k = 0;
            for i in 0..s.len() {
                ns.push(s[i]);
                nv.push(v[i]);
                if k < coarse.len() && coarse[k] == i {
                    ns.push(mids[k]);
                    nv.push(mid_vals[k]);
                    k += 1;
                }
            }
            s = ns;
            v = nv;
        }
        let delta = v.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
        let min_abs = v.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
        let max_abs = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        Ok(PhaseSample { delta, min_abs, max_abs })
    }

    /// Total winding of a closed chain of pieces.
    pub fn winding(&self, pieces: &[(Piece, usize)]) -> Result<(i64, PhaseSample)> {
        let mut total = 0.0;
        let mut min_abs = f64::INFINITY;
        let mut max_abs: f64 = 0.0;
        for (p, n0) in pieces {
            let s = self.phase(p, *n0)?;
            total += s.delta;
            min_abs = min_abs.min(s.min_abs);
            max_abs = max_abs.max(s.max_abs);
        }
        let turns = total / (2.0 * PI);
        let n = turns.round();
        if (turns - n).abs() > 1e-6 {
            return Err(CoreError::NonConvergent(format!(
                "accumulated phase {total} is not a multiple of 2 pi"
            )));
        }
        Ok((
            n as i64,
            PhaseSample {
                delta: total,
                min_abs,
                max_abs,
            },
        ))
    }
}
