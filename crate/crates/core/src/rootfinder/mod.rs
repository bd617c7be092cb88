//! Zeros of analytic functions in rectangles and disks by the argument
//! principle, quad-tree isolation and Newton refinement.

mod contour;

use crate::error::{CoreError, Result};
use crate::spectral::{SpectralEvaluator, SpectralFunctionId};
use contour::{PhaseSample, Piece, Sampler};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Residual floor, relative to the size of `F` on the certificate circle.
pub const DEFAULT_RESIDUAL_FLOOR: f64 = 1e-9;
/// Default tolerance for ray checks, in radians.
pub const DEFAULT_ANGULAR_TOL: f64 = 1e-6;
/// Roots closer than this to the origin have no meaningful argument.
const ORIGIN_EXCLUSION: f64 = 1e-6;
const MAX_NUDGES: usize = 3;
const NUDGE_FRACTION: f64 = 1e-3;
/// `|F|` on the certificate circle must exceed `|F(root)|` by this factor.
const SOUNDNESS_RATIO: f64 = 1e3;
/// Initial samples on a quarter circle or on an edge half as long as the
/// region's diameter.
const INITIAL_SAMPLES: usize = 32;

/// A function that is analytic on the regions it is asked about.
pub trait Analytic: Sync {
    fn value(&self, z: Complex64) -> Result<Complex64>;

    /// Value and derivative. Defaults to a central difference.
    fn value_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.value(z)?, central_difference(self, z)?))
    }
}

/// `(F(z+h) - F(z-h)) / 2h` with `h = 1e-5 max(1, |z|)`.
pub fn central_difference<F: Analytic + ?Sized>(f: &F, z: Complex64) -> Result<Complex64> {
    let h = 1e-5 * z.norm().max(1.0);
    Ok((f.value(z + h)? - f.value(z - h)?) / (2.0 * h))
}

impl<T> Analytic for T
where
    T: Fn(Complex64) -> Complex64 + Sync,
{
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self(z))
    }
}

/// A closure paired with its derivative.
pub struct WithDerivative<F, D> {
    pub f: F,
    pub df: D,
}

impl<F, D> Analytic for WithDerivative<F, D>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    D: Fn(Complex64) -> Complex64 + Sync,
{
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.f)(z))
    }

    fn value_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok(((self.f)(z), (self.df)(z)))
    }
}

/// A spectral function of `E` with derivatives from the variational
/// equations.
#[derive(Debug, Clone)]
pub struct SpectralHandle {
    pub evaluator: SpectralEvaluator,
    pub id: SpectralFunctionId,
}

impl SpectralHandle {
    pub fn new(evaluator: SpectralEvaluator, id: SpectralFunctionId) -> Self {
        Self { evaluator, id }
    }
}

impl Analytic for SpectralHandle {
    fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.evaluator.eval(self.id, z)?.value)
    }

    fn value_and_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (v, d) = self.evaluator.eval_with_derivative(self.id, z)?;
        Ok((v.value, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    Rect { re_min: f64, re_max: f64, im_min: f64, im_max: f64 },
    Disk { center: Complex64, radius: f64 },
}

impl Region {
    pub fn rect(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        Region::Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        }
        .validated()
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Region::Disk { center, radius }.validated()
    }

    fn validated(self) -> Result<Self> {
        let ok = match self {
            Region::Rect {
                re_min,
                re_max,
                im_min,
                im_max,
            } => [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_max > re_min && im_max > im_min,
            Region::Disk { center, radius } => center.is_finite() && radius.is_finite() && radius > 0.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(CoreError::InvalidInput(format!("region {self:?} has no interior")))
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Region::Rect {
                re_min,
                re_max,
                im_min,
                im_max,
            } => (re_max - re_min).hypot(im_max - im_min),
            Region::Disk { radius, .. } => 2.0 * radius,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Rect {
                re_min,
                re_max,
                im_min,
                im_max,
            } => z.re >= re_min && z.re <= re_max && z.im >= im_min && z.im <= im_max,
            Region::Disk { center, radius } => (z - center).norm() <= radius,
        }
    }

    /// Same region grown by `d` on every side.
    pub fn expanded(&self, d: f64) -> Region {
        match *self {
            Region::Rect {
                re_min,
                re_max,
                im_min,
                im_max,
            } => Region::Rect {
                re_min: re_min - d,
                re_max: re_max + d,
                im_min: im_min - d,
                im_max: im_max + d,
            },
            Region::Disk { center, radius } => Region::Disk {
                center,
                radius: radius + d,
            },
        }
    }

    fn bounding_cell(&self) -> Cell {
        match *self {
            Region::Rect {
                re_min,
                re_max,
                im_min,
                im_max,
            } => Cell {
                x0: re_min,
                x1: re_max,
                y0: im_min,
                y1: im_max,
                winding: 0,
                depth: 0,
            },
            Region::Disk { center, radius } => Cell {
                x0: center.re - radius,
                x1: center.re + radius,
                y0: center.im - radius,
                y1: center.im + radius,
                winding: 0,
                depth: 0,
            },
        }
    }

    fn pieces(&self, reference: f64) -> Vec<(Piece, usize)> {
        match *self {
            Region::Rect { .. } => self.bounding_cell().pieces(reference),
            Region::Disk { center, radius } => circle_pieces(center, radius, INITIAL_SAMPLES),
        }
    }
}

fn circle_pieces(center: Complex64, radius: f64, per_quarter: usize) -> Vec<(Piece, usize)> {
    (0..4)
        .map(|q| {
            let t0 = q as f64 * PI / 2.0;
            (
                Piece::Arc {
                    center,
                    radius,
                    t0,
                    t1: t0 + PI / 2.0,
                },
                per_quarter,
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    winding: i64,
    depth: usize,
}

impl Cell {
    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn min_side(&self) -> f64 {
        (self.x1 - self.x0).min(self.y1 - self.y0)
    }

    fn max_side(&self) -> f64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.x0 - margin && z.re <= self.x1 + margin && z.im >= self.y0 - margin && z.im <= self.y1 + margin
    }

    /// Counter-clockwise edges; the initial sample count scales with the
    /// edge length relative to `reference`.
    fn pieces(&self, reference: f64) -> Vec<(Piece, usize)> {
        let c = [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ];
        (0..4)
            .map(|i| {
                let (a, b) = (c[i], c[(i + 1) % 4]);
                let n0 = ((INITIAL_SAMPLES as f64 * (b - a).norm() / reference).ceil() as usize).max(4);
                (Piece::Segment { a, b }, n0)
            })
            .collect()
    }

    fn split(&self, fx: f64, fy: f64) -> [Cell; 4] {
        let xs = self.x0 + fx * (self.x1 - self.x0);
        let ys = self.y0 + fy * (self.y1 - self.y0);
        let d = self.depth + 1;
        let mk = |x0, x1, y0, y1| Cell {
            x0,
            x1,
            y0,
            y1,
            winding: 0,
            depth: d,
        };
        [
            mk(self.x0, xs, self.y0, ys),
            mk(xs, self.x1, self.y0, ys),
            mk(xs, self.x1, ys, self.y1),
            mk(self.x0, xs, ys, self.y1),
        ]
    }
}

/// Heap entry: largest area first, ties broken by position.
struct Queued(Cell);

impl Queued {
    fn key(&self) -> (f64, f64, f64) {
        (self.0.area(), -self.0.x0, -self.0.y0)
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    }
}

/// Split fractions tried in order; none is 1/2 so split lines stay off
/// the symmetry axes where spectral zeros tend to sit.
const SPLITS: [(f64, f64); 4] = [(0.4871, 0.5137), (0.5219, 0.4763), (0.4589, 0.5411), (0.5503, 0.4417)];

/// A located zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    pub location: Complex64,
    /// Winding number of the final isolating contour; 1 for a simple root.
    pub winding_certificate: i64,
    /// `|F(location)|` divided by the largest `|F|` on the isolating circle.
    pub residual: f64,
    /// Radians from an asserted ray, set by [`verify_radial`].
    pub angular_deviation: Option<f64>,
}

/// Search tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    /// Contour pieces shorter than this fraction of the region diameter
    /// that still turn by `pi/2` are taken to pass through a zero.
    pub zero_tol: f64,
    pub residual_floor: f64,
    /// Cells smaller than this fraction of the diameter are not split.
    pub min_cell: f64,
    pub max_cells: usize,
    pub newton_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            zero_tol: 1e-10,
            residual_floor: DEFAULT_RESIDUAL_FLOOR,
            min_cell: 1e-9,
            max_cells: 20_000,
            newton_iterations: 60,
        }
    }
}

/// Outcome of [`find_roots`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSearch {
    /// Sorted by modulus, then argument.
    pub roots: Vec<RootRecord>,
    /// Number of zeros in the region (after any nudging).
    pub total_winding: i64,
    /// The region actually enclosed; differs from the request after nudging.
    pub region: Region,
    /// False when the budget ran out or a consistency check failed.
    pub complete: bool,
    pub evaluations: usize,
    pub notes: Vec<String>,
}

fn winding_nudged<F: Analytic + ?Sized>(sampler: &Sampler<'_, F>, region: Region) -> Result<(i64, Region, usize)> {
    let step = NUDGE_FRACTION * region.diameter();
    let reference = region.diameter() / 2.0;
    let mut current = region;
    for nudges in 0..=MAX_NUDGES {
        match sampler.winding(&current.pieces(reference)) {
            Ok((n, _)) => return Ok((n, current, nudges)),
            Err(CoreError::BoundaryZero { near, .. }) => {
                if nudges == MAX_NUDGES {
                    return Err(CoreError::BoundaryZero { near, nudges });
                }
                current = current.expanded(step);
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("loop returns on every path")
}

/// Number of zeros of `f` inside `region`, counted with multiplicity.
///
/// `tol` is the relative contour resolution below which a persistent phase
/// jump is reported as a zero on the boundary; the boundary is then pushed
/// outward by `1e-3` of the diameter, at most three times.
pub fn winding_count<F: Analytic + ?Sized>(f: &F, region: Region, tol: f64) -> Result<i64> {
    let region = region.validated()?;
    if !(tol > 0.0) {
        return Err(CoreError::InvalidInput("tol must be positive".into()));
    }
    let sampler = Sampler::new(f, tol, region.diameter());
    Ok(winding_nudged(&sampler, region)?.0)
}

struct Search<'a, F: Analytic + ?Sized> {
    f: &'a F,
    sampler: Sampler<'a, F>,
    opts: RootOptions,
    reference: f64,
    diameter: f64,
    newton_evaluations: usize,
}

impl<'a, F: Analytic + ?Sized> Search<'a, F> {
    fn cell_winding(&self, cell: &Cell) -> Result<i64> {
        Ok(self.sampler.winding(&cell.pieces(self.reference))?.0)
    }

    fn split(&self, cell: &Cell) -> Result<[Cell; 4]> {
        let mut last = None;
        for (fx, fy) in SPLITS {
            let mut kids = cell.split(fx, fy);
            let res: Result<Vec<i64>> = kids.iter().map(|k| self.cell_winding(k)).collect();
            match res {
                Ok(w) => {
                    if w.iter().sum::<i64>() == cell.winding && w.iter().all(|&x| x >= 0) {
                        for (k, w) in kids.iter_mut().zip(w) {
                            k.winding = w;
                        }
                        return Ok(kids);
                    }
                    last = Some(CoreError::NonConvergent(format!(
                        "child windings {w:?} do not add up to {}",
                        cell.winding
                    )));
                }
                Err(e @ CoreError::BoundaryZero { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one split tried"))
    }

    /// Newton from the cell center; `None` when it wanders off or stalls.
    fn newton(&mut self, cell: &Cell) -> Result<Option<Complex64>> {
        let mut z = cell.center();
        let size = cell.max_side();
        let mut prev = f64::INFINITY;
        for it in 0..self.opts.newton_iterations {
            let (v, d) = self.f.value_and_derivative(z)?;
            self.newton_evaluations += 1;
            if v.norm() == 0.0 {
                return Ok(Some(z));
            }
            if !(d.norm() > 0.0) || !d.is_finite() || !v.is_finite() {
                return Ok(None);
            }
            let step = v / d;
            z -= step;
            if !cell.contains(z, 0.5 * size) {
                return Ok(None);
            }
            let s = step.norm();
            let scale = z.norm().max(size).max(f64::MIN_POSITIVE);
            if s <= 4.0 * f64::EPSILON * scale {
                return Ok(Some(z));
            }
            // noise floor reached: steps stop shrinking
            if it > 2 && s < 1e-9 * scale && s > 0.5 * prev {
                return Ok(Some(z));
            }
            prev = s;
        }
        Ok(None)
    }

    fn certify(&self, cell: &Cell, z: Complex64) -> Result<Option<RootRecord>> {
        let fz = self.sampler.eval(z)?;
        let mut rho = 0.25 * cell.min_side();
        for _ in 0..8 {
            match self.sampler.winding(&circle_pieces(z, rho, 8)) {
                Ok((1, s)) if fz.norm() * SOUNDNESS_RATIO <= s.min_abs => {
                    return Ok(Some(RootRecord {
                        location: z,
                        winding_certificate: 1,
                        residual: fz.norm() / s.max_abs,
                        angular_deviation: None,
                    }));
                }
                Ok(_) | Err(CoreError::BoundaryZero { .. }) => rho *= 0.25,
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }
}

/// Isolates and refines every zero of `f` in `region`.
///
/// Cells are processed largest first and split until each holds one zero;
/// Newton then starts from the cell center and the result is certified by
/// the winding number of a small circle around it. Disks are searched
/// through their bounding square and the results clipped to the disk.
pub fn find_roots<F: Analytic + ?Sized>(
    f: &F,
    region: Region,
    max_roots: usize,
    opts: &RootOptions,
) -> Result<RootSearch> {
    let region = region.validated()?;
    let diameter = region.diameter();
    let mut search = Search {
        f,
        sampler: Sampler::new(f, opts.zero_tol, diameter),
        opts: *opts,
        reference: diameter / 2.0,
        diameter,
        newton_evaluations: 0,
    };
    let (total, region, _) = winding_nudged(&search.sampler, region)?;
    if total < 0 {
        return Err(CoreError::NonConvergent(format!("negative zero count {total}")));
    }
    if total as usize > max_roots {
        return Err(CoreError::Precondition(format!(
            "region holds {total} zeros, more than max_roots = {max_roots}"
        )));
    }
    let mut notes = Vec::new();
    let root_cell = match region {
        Region::Rect { .. } => Cell {
            winding: total,
            ..region.bounding_cell()
        },
        Region::Disk { .. } => {
            let (w, square, _) = winding_nudged(&search.sampler, Region::Rect {
                re_min: region.bounding_cell().x0,
                re_max: region.bounding_cell().x1,
                im_min: region.bounding_cell().y0,
                im_max: region.bounding_cell().y1,
            })?;
            Cell {
                winding: w,
                ..square.bounding_cell()
            }
        }
    };

    let mut roots: Vec<RootRecord> = Vec::new();
    let mut heap = BinaryHeap::new();
    heap.push(Queued(root_cell));
    let mut processed = 0usize;
    let mut complete = true;
    while let Some(Queued(cell)) = heap.pop() {
        if cell.winding == 0 {
            continue;
        }
        processed += 1;
        if processed > opts.max_cells {
            complete = false;
            notes.push(format!("cell budget of {} exhausted", opts.max_cells));
            break;
        }
        if cell.winding == 1 {
            if let Some(z) = search.newton(&cell)? {
                if cell.contains(z, 1e-9 * cell.max_side()) {
                    if let Some(rec) = search.certify(&cell, z)? {
                        if roots
                            .iter()
                            .any(|r| (r.location - z).norm() <= 1e-9 * z.norm().max(1.0))
                        {
                            notes.push(format!("duplicate root near {z} dropped"));
                            complete = false;
                        } else {
                            if rec.residual > opts.residual_floor {
                                notes.push(format!(
                                    "root {z} has residual {:e} above the floor {:e}",
                                    rec.residual, opts.residual_floor
                                ));
                                complete = false;
                            }
                            roots.push(rec);
                        }
                        continue;
                    }
                }
            }
        }
        if cell.max_side() < opts.min_cell * search.diameter {
            let z = cell.center();
            let fz = search.sampler.eval(z)?;
            let (_, s): (i64, PhaseSample) = search.sampler.winding(&cell.pieces(search.reference))?;
            roots.push(RootRecord {
                location: z,
                winding_certificate: cell.winding,
                residual: fz.norm() / s.max_abs,
                angular_deviation: None,
            });
            if cell.winding == 1 {
                notes.push(format!("Newton failed in an irreducible cell at {z}"));
                complete = false;
            }
            continue;
        }
        for kid in search.split(&cell)? {
            heap.push(Queued(kid));
        }
    }

    if let Region::Disk { .. } = region {
        roots.retain(|r| region.contains(r.location));
    }
    let found: i64 = roots.iter().map(|r| r.winding_certificate).sum();
    if complete && found != total {
        complete = false;
        notes.push(format!("located {found} zeros, winding number says {total}"));
    }
    sort_roots(&mut roots);
    Ok(RootSearch {
        roots,
        total_winding: total,
        region,
        complete,
        evaluations: search.sampler.evaluations() + search.newton_evaluations,
        notes,
    })
}

/// Modulus first, then argument.
pub fn sort_roots(roots: &mut [RootRecord]) {
    roots.sort_by(|a, b| {
        a.location
            .norm()
            .total_cmp(&b.location.norm())
            .then(a.location.arg().total_cmp(&b.location.arg()))
    });
}

/// Eigenvalue problem `(n, k)`: decay in `S_n` and `S_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryProblem {
    pub m: u32,
    pub n: i64,
    pub k: i64,
}

impl BoundaryProblem {
    pub fn new(m: u32, n: i64, k: i64) -> Result<Self> {
        if m < 3 {
            return Err(CoreError::InvalidInput(format!("m must be at least 3, got {m}")));
        }
        let s = m as i64 + 2;
        let d = (n - k).rem_euclid(s);
        if d == 0 || d == 1 || d == s - 1 {
            return Err(CoreError::Precondition(format!(
                "({n},{k}) has equal or adjacent sectors mod {s}; the spectrum is discrete only when n != k, k +- 1 (mod m+2)"
            )));
        }
        Ok(Self { m, n, k })
    }

    /// Direction of the eigenvalues.
    pub fn predicted_ray(&self) -> f64 {
        predicted_ray(self.m, self.n, self.k)
    }
}

/// Zeros of `E -> W_{n,k}(E)` in `region`.
pub fn eigenvalues_nk(
    evaluator: &SpectralEvaluator,
    problem: &BoundaryProblem,
    region: Region,
    max_roots: usize,
    opts: &RootOptions,
) -> Result<RootSearch> {
    let problem = BoundaryProblem::new(problem.m, problem.n, problem.k)?;
    if evaluator.m() != problem.m {
        return Err(CoreError::InvalidInput(format!(
            "evaluator is for m = {}, problem for m = {}",
            evaluator.m(),
            problem.m
        )));
    }
    let handle = SpectralHandle::new(evaluator.clone(), SpectralFunctionId::W(problem.n, problem.k));
    find_roots(&handle, region, max_roots, opts)
}

/// `-2 pi (n + k) / (m + 2)` in `(-pi, pi]`: the argument of
/// `1/(w_n w_k)` for the unit bisectors of `S_n` and `S_k`.
pub fn predicted_ray(m: u32, n: i64, k: i64) -> f64 {
    let s = m as i64 + 2;
    let j = (-(n + k)).rem_euclid(s);
    normalize_angle(2.0 * PI * j as f64 / s as f64)
}

/// Reduces an angle to `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut t = a.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialReport {
    pub angles: Vec<f64>,
    pub angular_tol: f64,
    pub checked: usize,
    /// Roots within `1e-6` of the origin.
    pub excluded: usize,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Sets each root's deviation from the ray at `angle`.
pub fn verify_radial(roots: &mut [RootRecord], angle: f64, angular_tol: f64) -> RadialReport {
    verify_rays(roots, &[angle], angular_tol)
}

/// As [`verify_radial`], measuring each root against the nearest of
/// several rays.
pub fn verify_rays(roots: &mut [RootRecord], angles: &[f64], angular_tol: f64) -> RadialReport {
    let mut max_dev: f64 = 0.0;
    let mut checked = 0;
    let mut excluded = 0;
    for r in roots.iter_mut() {
        if r.location.norm() < ORIGIN_EXCLUSION {
            r.angular_deviation = None;
            excluded += 1;
            continue;
        }
        let arg = r.location.arg();
        let dev = angles
            .iter()
            .map(|&a| normalize_angle(arg - a).abs())
            .fold(f64::INFINITY, f64::min);
        r.angular_deviation = Some(dev);
        max_dev = max_dev.max(dev);
        checked += 1;
    }
    RadialReport {
        angles: angles.to_vec(),
        angular_tol,
        checked,
        excluded,
        max_deviation: max_dev,
        pass: max_dev < angular_tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    /// Least-squares slope of `log log M(r)` against `log r`.
    pub order: f64,
    pub radii: Vec<f64>,
    /// `log M(r)` for each used radius.
    pub log_max: Vec<f64>,
    /// Radii with `M(r) <= 1`.
    pub dropped: Vec<f64>,
    /// Slope of the log of the local degree `d log M / d log r` against
    /// `log r`; near 0 for polynomials, near the order otherwise.
    pub degree_growth: Option<f64>,
    /// Order or degree growth at most 0.1: no detectable exponential growth.
    pub subexponential: bool,
}

/// Growth order from maxima of `|F|` on circles about the origin. Each
/// circle gets `max(64, 8 r)` equally spaced samples.
pub fn order_estimate<F: Analytic + ?Sized>(f: &F, radii: &[f64]) -> Result<OrderEstimate> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(CoreError::InvalidInput("radii must be positive, finite and increasing".into()));
    }
    let mut used = Vec::new();
    let mut log_max = Vec::new();
    let mut dropped = Vec::new();
    for &r in radii {
        let n = ((8.0 * r).ceil() as usize).clamp(64, 1 << 16);
        let vals: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| {
                let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64);
                f.value(z).map(|v| v.norm())
            })
            .collect::<Result<_>>()?;
        let m = vals.iter().cloned().fold(0.0, f64::max);
        if m > 1.0 && m.is_finite() {
            used.push(r);
            log_max.push(m.ln());
        } else {
            dropped.push(r);
        }
    }
    if used.len() < 3 {
        return Err(CoreError::InvalidInput(format!(
            "only {} radii with M(r) > 1; need at least 3",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = log_max.iter().map(|l| l.ln()).collect();
    let order = slope(&xs, &ys);
    // local degrees between neighbouring radii
    let (dx, dy): (Vec<f64>, Vec<f64>) = xs
        .windows(2)
        .zip(log_max.windows(2))
        .map(|(x, l)| (0.5 * (x[0] + x[1]), (l[1] - l[0]) / (x[1] - x[0])))
        .unzip();
    let degree_growth = if dy.len() >= 2 && dy.iter().all(|d| *d > 0.0) {
        Some(slope(&dx, &dy.iter().map(|d| d.ln()).collect::<Vec<_>>()))
    } else {
        None
    };
    Ok(OrderEstimate {
        order,
        radii: used,
        log_max,
        dropped,
        degree_growth,
        subexponential: order <= 0.1 || degree_growth.is_some_and(|g| g <= 0.1),
    })
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polynomial_winding() {
        let f = |z: Complex64| (z - 1.0) * (z - c(0.0, 2.0));
        let r = Region::rect(-3.0, 3.0, -3.0, 3.0).unwrap();
        assert_eq!(winding_count(&f, r, 1e-10).unwrap(), 2);
    }

    #[test]
    fn sine_in_disk() {
        let f = |z: Complex64| z.sin();
        assert_eq!(winding_count(&f, Region::disk(c(0.0, 0.0), 4.0).unwrap(), 1e-10).unwrap(), 3);
    }

    #[test]
    fn boundary_zero_is_nudged() {
        // zero exactly on the right edge
        let f = |z: Complex64| z - 1.0;
        let r = Region::rect(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(winding_count(&f, r, 1e-10).unwrap(), 1);
    }

    #[test]
    fn cube_roots() {
        let f = WithDerivative {
            f: |z: Complex64| z * z * z - 1.0,
            df: |z: Complex64| 3.0 * z * z,
        };
        let s = find_roots(&f, Region::disk(c(0.0, 0.0), 2.0).unwrap(), 10, &RootOptions::default()).unwrap();
        assert!(s.complete, "{:?}", s.notes);
        assert_eq!(s.roots.len(), 3);
        for r in &s.roots {
            assert_eq!(r.winding_certificate, 1);
            assert!((r.location.powi(3) - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn double_root_reported_with_multiplicity() {
        let f = |z: Complex64| (z - c(0.3, 0.2)).powi(2);
        let s = find_roots(&f, Region::rect(-1.0, 1.0, -1.0, 1.0).unwrap(), 4, &RootOptions::default()).unwrap();
        assert_eq!(s.total_winding, 2);
        assert_eq!(s.roots.len(), 1);
        assert_eq!(s.roots[0].winding_certificate, 2);
        assert!((s.roots[0].location - c(0.3, 0.2)).norm() < 1e-6);
    }

    #[test]
    fn too_many_roots() {
        let f = |z: Complex64| z.powi(5) - 1.0;
        let e = find_roots(&f, Region::disk(c(0.0, 0.0), 2.0).unwrap(), 3, &RootOptions::default()).unwrap_err();
        assert!(matches!(e, CoreError::Precondition(_)));
    }

    #[test]
    fn rays() {
        assert_eq!(predicted_ray(3, -1, 1), 0.0);
        assert!((predicted_ray(3, -1, 2) + 2.0 * PI / 5.0).abs() < 1e-15);
        assert!((predicted_ray(4, 0, 3) - PI).abs() < 1e-15);
        assert!(BoundaryProblem::new(3, 0, 1).is_err());
        assert!(BoundaryProblem::new(3, 0, 4).is_err());
        assert!(BoundaryProblem::new(3, 2, 2).is_err());
        assert!(BoundaryProblem::new(3, -1, 1).is_ok());
    }

    #[test]
    fn radial_report() {
        let mut r: Vec<RootRecord> = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]
            .iter()
            .map(|&z| RootRecord {
                location: z,
                winding_certificate: 1,
                residual: 0.0,
                angular_deviation: None,
            })
            .collect();
        let rep = verify_radial(&mut r, 0.0, 1e-6);
        assert!(rep.pass);
        assert_eq!(rep.max_deviation, 0.0);
        let mut off = vec![RootRecord {
            location: Complex64::from_polar(1.0, 0.1),
            ..r[0]
        }];
        let rep = verify_radial(&mut off, 0.0, 1e-3);
        assert!(!rep.pass);
        assert!((rep.max_deviation - 0.1).abs() < 1e-12);
    }

    #[test]
    fn order_of_exp_and_polynomial() {
        let e = order_estimate(&|z: Complex64| z.exp(), &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert!((e.order - 1.0).abs() < 0.02, "{e:?}");
        let p = order_estimate(&|z: Complex64| z * z * z + 1.0, &[1e10, 1e20, 1e40, 1e80]).unwrap();
        assert!(p.order <= 0.1 && p.subexponential, "{p:?}");
        assert!(order_estimate(&|_z: Complex64| c(0.5, 0.0), &[1.0, 2.0, 3.0]).is_err());
    }
}
