//! The subdominant solution `y0(z, E)` of `-y'' + (z^m + E) y = 0` and its
//! rotations `y_k(z, E) = y0(w^-k z, w^2k E)`, `w = exp(2 pi i/(m+2))`.
//!
//! `y0` is pinned by its behaviour at infinity,
//! `y0 ~ z^{-m/4} exp(-(2/(m+2)) z^{(m+2)/2})`, so values are produced by
//! seeding at a large anchor radius from an asymptotic expansion and
//! integrating inward, which is the stable direction inside `S_0`.
//!
//! The seed expands `w = -y'/y` in powers `z^{(m-n)/2}` from the Riccati
//! equation `w^2 - w' = z^m + E`:
//!
//! ```text
//! d_0 = 1,
//! 2 d_n = E [n = 2m] - sum_{0<i<n} d_i d_{n-i} + (2m+2-n)/2 d_{n-m-2}
//! ```
//!
//! and integrates it term by term; the `n = m+2` term is `(m/4) log z`
//! and every other term has a pure power, so the expansion carries exactly
//! the normalization above with no free constant.

use crate::error::{CoreError, Result};
use crate::ode::{integrate_path, integrate_with_variation, Path, PolynomialPotential, SolutionFrame, DEFAULT_REL_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One instance of `-y'' + (z^m + E) y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    m: u32,
    energy: Complex64,
}

impl ProblemSpec {
    pub fn new(m: u32, energy: Complex64) -> Result<Self> {
        if m < 3 {
            return Err(CoreError::InvalidInput(format!("m must be an integer >= 3, got {m}")));
        }
        if !energy.is_finite() {
            return Err(CoreError::InvalidInput("energy must be finite".into()));
        }
        Ok(Self { m, energy })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn energy(&self) -> Complex64 {
        self.energy
    }

    pub fn with_energy(&self, energy: Complex64) -> Self {
        Self { energy, ..*self }
    }

    /// Number of Stokes sectors, `m + 2`.
    pub fn sectors(&self) -> i64 {
        self.m as i64 + 2
    }

    /// `w = exp(2 pi i/(m+2))`.
    pub fn omega(&self) -> Complex64 {
        self.omega_pow(1)
    }

    /// `e = exp(pi i/(m+2))`, the fixed square root of `w`.
    pub fn epsilon(&self) -> Complex64 {
        Complex64::from_polar(1.0, PI / self.sectors() as f64)
    }

    /// `w^k`, computed from `k mod (m+2)` so that periodic indices give
    /// bit-identical results.
    pub fn omega_pow(&self, k: i64) -> Complex64 {
        let n = self.sectors();
        let r = k.rem_euclid(n);
        match r {
            0 => Complex64::new(1.0, 0.0),
            _ => Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64),
        }
    }

    /// Energy at which `y0` is evaluated to produce `y_k`: `w^{2k} E`.
    pub fn rotated_energy(&self, k: i64) -> Complex64 {
        self.energy * self.omega_pow(2 * k)
    }

    pub fn potential(&self) -> PolynomialPotential {
        PolynomialPotential::monomial_plus_energy(self.m, self.energy)
    }
}

/// Stokes sector `S_k = w^k S_0`, `S_0 = {|arg z| < pi/(m+2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StokesSector {
    m: u32,
    index: i64,
}

impl StokesSector {
    pub fn new(m: u32, k: i64) -> Self {
        Self {
            m,
            index: k.rem_euclid(m as i64 + 2),
        }
    }

    /// Index reduced to `0..m+2`.
    pub fn index(&self) -> i64 {
        self.index
    }

    /// Bisector angle in `(-pi, pi]`.
    pub fn bisector(&self) -> f64 {
        let a = 2.0 * PI * self.index as f64 / (self.m as f64 + 2.0);
        if a > PI {
            a - 2.0 * PI
        } else {
            a
        }
    }

    pub fn half_opening(&self) -> f64 {
        PI / (self.m as f64 + 2.0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        if z.norm() == 0.0 {
            return false;
        }
        let d = (z.arg() - self.bisector() + PI).rem_euclid(2.0 * PI) - PI;
        d.abs() < self.half_opening()
    }
}

/// How the anchor radius for seeding is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorPolicy {
    /// Keeps `|E| <= eta R^m`.
    pub eta: f64,
    pub r_min: f64,
    /// Radius cap; reaching it is reported in [`AnchorChoice::capped`].
    pub r_max: f64,
    /// Number of expansion coefficients computed for the seed.
    pub max_terms: usize,
}

impl Default for AnchorPolicy {
    fn default() -> Self {
        Self {
            eta: 0.1,
            r_min: 8.0,
            r_max: 64.0,
            max_terms: 240,
        }
    }
}

/// Result of [`anchor_choice`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorChoice {
    pub radius: f64,
    /// Magnitude of the first omitted expansion term at `radius`.
    pub tail_estimate: f64,
    /// Number of expansion coefficients retained.
    pub terms: usize,
    pub capped: bool,
}

/// Coefficients of the asymptotic expansion of `-y0'/y0` together with
/// their derivatives in `E`.
#[derive(Debug, Clone)]
pub struct AsymptoticSeries {
    m: u32,
    coeffs: Vec<Complex64>,
    d_energy: Vec<Complex64>,
}

impl AsymptoticSeries {
    pub fn new(m: u32, energy: Complex64, n_terms: usize) -> Self {
        let mi = m as usize;
        let n_terms = n_terms.max(2 * mi + 2);
        let mut d = vec![Complex64::new(0.0, 0.0); n_terms];
        let mut dd = vec![Complex64::new(0.0, 0.0); n_terms];
        d[0] = Complex64::new(1.0, 0.0);
        for n in 1..n_terms {
            let mut rhs = Complex64::new(0.0, 0.0);
            let mut drhs = Complex64::new(0.0, 0.0);
            if n == 2 * mi {
                rhs += energy;
                drhs += 1.0;
            }
            for i in 1..n {
                rhs -= d[i] * d[n - i];
                drhs -= dd[i] * d[n - i] + d[i] * dd[n - i];
            }
            if n >= mi + 2 {
                let f = (2.0 * m as f64 + 2.0 - n as f64) / 2.0;
                rhs += d[n - mi - 2] * f;
                drhs += dd[n - mi - 2] * f;
            }
            d[n] = rhs * 0.5;
            dd[n] = drhs * 0.5;
        }
        Self {
            m,
            coeffs: d,
            d_energy: dd,
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Exponent of `z` in the integrated term `n`, `(m+2-n)/2`.
    fn exponent(&self, n: usize) -> f64 {
        (self.m as f64 + 2.0 - n as f64) / 2.0
    }

    fn log_index(&self) -> usize {
        self.m as usize + 2
    }

    /// Magnitudes `|d_n| r^{e_n} / |e_n|` of the terms of the integrated
    /// series at `|z| = r` (the log term is reported as 0).
    pub fn term_magnitudes(&self, r: f64) -> Vec<f64> {
        (0..self.coeffs.len())
            .map(|n| {
                if n == self.log_index() {
                    0.0
                } else {
                    let e = self.exponent(n);
                    self.coeffs[n].norm() * r.powf(e) / e.abs()
                }
            })
            .collect()
    }

    /// Number of terms to keep at `|z| = r` and the size of the first
    /// omitted one. A term is omitted once a full window of `m+2`
    /// consecutive decaying terms falls below `tol`; `None` if that never
    /// happens before the series starts to diverge or runs out.
    pub fn truncation(&self, r: f64, tol: f64) -> Option<(usize, f64)> {
        let mags = self.term_magnitudes(r);
        let window = self.m as usize + 2;
        let mut best = f64::INFINITY;
        let mut n0 = self.log_index() + 1;
        while n0 + window <= mags.len() {
            let w = mags[n0..n0 + window].iter().cloned().fold(0.0, f64::max);
            if w <= tol {
                return Some((n0, w));
            }
            if w > best * 10.0 {
                // past the smallest term of the asymptotic series
                return None;
            }
            best = best.min(w);
            n0 += window;
        }
        None
    }

    /// `(phi, w, dphi/dE, dw/dE)` at `z`, summed over the first `terms`
    /// coefficients, where `y = exp(-phi)` and `y' = -w y`.
    fn sum(&self, z: Complex64, terms: usize) -> (Complex64, Complex64, Complex64, Complex64) {
        let ln_z = z.ln();
        let z_half_inv = (-0.5 * ln_z).exp();
        // z^{(m-n)/2} for n = 0
        let mut p = (0.5 * self.m as f64 * ln_z).exp();
        let mut phi = Complex64::new(0.0, 0.0);
        let mut w = Complex64::new(0.0, 0.0);
        let mut phi_e = Complex64::new(0.0, 0.0);
        let mut w_e = Complex64::new(0.0, 0.0);
        for n in 0..terms.min(self.coeffs.len()) {
            let (d, de) = (self.coeffs[n], self.d_energy[n]);
            w += d * p;
            w_e += de * p;
            if n == self.log_index() {
                phi += d * ln_z;
                phi_e += de * ln_z;
            } else {
                let e = self.exponent(n);
                let zp = z * p / e;
                phi += d * zp;
                phi_e += de * zp;
            }
            p *= z_half_inv;
        }
        (phi, w, phi_e, w_e)
    }
}

/// Radius at which `y0` is seeded from the asymptotic expansion: at least
/// `r_min`, with `|E| <= eta R^m`, grown until the first omitted term of the
/// expansion is below `rel_tol / 10`.
pub fn anchor_choice(spec: &ProblemSpec, rel_tol: f64, policy: &AnchorPolicy) -> AnchorChoice {
    let m = spec.m() as f64;
    let mut r = policy.r_min.max((spec.energy().norm() / policy.eta).powf(1.0 / m));
    let series = AsymptoticSeries::new(spec.m(), spec.energy(), policy.max_terms);
    let target = 0.1 * rel_tol;
    loop {
        if let Some((terms, tail)) = series.truncation(r, target) {
            return AnchorChoice {
                radius: r,
                tail_estimate: tail,
                terms,
                capped: false,
            };
        }
        if r >= policy.r_max {
            let (terms, tail) = best_truncation(&series, r);
            return AnchorChoice {
                radius: r,
                tail_estimate: tail,
                terms,
                capped: true,
            };
        }
        r = (r * 1.2).min(policy.r_max);
    }
}

fn best_truncation(series: &AsymptoticSeries, r: f64) -> (usize, f64) {
    let mags = series.term_magnitudes(r);
    let start = series.log_index() + 1;
    let (i, v) = mags[start..]
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    (start + i, v)
}

/// See [`anchor_choice`].
pub fn anchor_radius(spec: &ProblemSpec, rel_tol: f64, policy: &AnchorPolicy) -> f64 {
    anchor_choice(spec, rel_tol, policy).radius
}

fn check_seed_domain(spec: &ProblemSpec, z0: Complex64) -> Result<()> {
    let limit = 3.0 * PI / spec.sectors() as f64;
    if z0.norm() == 0.0 || !z0.is_finite() || z0.arg().abs() >= limit {
        return Err(CoreError::Domain {
            z: z0,
            what: "the asymptotic seed (|arg z| < 3 pi/(m+2))",
        });
    }
    Ok(())
}

/// Seed frame for `y0` at `z0` from the asymptotic expansion, truncated
/// where its terms drop below `rel_tol / 10`.
pub fn wkb_seed_with_tol(spec: &ProblemSpec, z0: Complex64, rel_tol: f64, max_terms: usize) -> Result<SolutionFrame> {
    Ok(seed_with_variation(spec, z0, rel_tol, max_terms)?.0)
}

/// [`wkb_seed_with_tol`] at roundoff-level truncation.
pub fn wkb_seed(spec: &ProblemSpec, z0: Complex64) -> Result<SolutionFrame> {
    wkb_seed_with_tol(spec, z0, 1e-16, AnchorPolicy::default().max_terms)
}

fn seed_with_variation(
    spec: &ProblemSpec,
    z0: Complex64,
    rel_tol: f64,
    max_terms: usize,
) -> Result<(SolutionFrame, SolutionFrame, f64)> {
    check_seed_domain(spec, z0)?;
    let series = AsymptoticSeries::new(spec.m(), spec.energy(), max_terms);
    let (terms, tail) = series
        .truncation(z0.norm(), 0.1 * rel_tol)
        .unwrap_or_else(|| best_truncation(&series, z0.norm()));
    let (phi, w, phi_e, w_e) = series.sum(z0, terms);
    let mut base = SolutionFrame::with_log_offset(z0, Complex64::new(1.0, 0.0), -w, -phi);
    base.err_estimate = tail;
    let mut var = SolutionFrame::with_log_offset(z0, -phi_e, -w_e + w * phi_e, -phi);
    var.err_estimate = tail;
    Ok((base, var, tail))
}

/// Two-term Liouville-Green seed: `y = Q^{-1/4} exp(-S)`,
/// `y' = (-sqrt(Q) - Q'/(4Q)) y`, with
/// `S = (2/(m+2)) z^{(m+2)/2} - (E/(m-2)) z^{-(m-2)/2}`.
pub fn liouville_green_seed(spec: &ProblemSpec, z0: Complex64) -> Result<SolutionFrame> {
    check_seed_domain(spec, z0)?;
    let m = spec.m() as f64;
    let e = spec.energy();
    let ln_z = z0.ln();
    let q = spec.potential().eval(z0);
    let dq = spec.potential().eval_derivative(z0);
    let action = (0.5 * (m + 2.0) * ln_z).exp() * (2.0 / (m + 2.0)) - e / (m - 2.0) * (-0.5 * (m - 2.0) * ln_z).exp();
    // Q^{-1/4} on the branch continuous with z^{-m/4}
    let q_ratio = q / (m * ln_z).exp();
    let log_pref = -0.25 * (m * ln_z + q_ratio.ln());
    let sqrt_q = (0.5 * (m * ln_z + q_ratio.ln())).exp();
    let dy = -sqrt_q - dq / (4.0 * q);
    Ok(SolutionFrame::with_log_offset(z0, Complex64::new(1.0, 0.0), dy, log_pref - action))
}

/// Tolerance and anchor settings for evaluating `y0` and `y_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubdominantSolver {
    pub rel_tol: f64,
    pub policy: AnchorPolicy,
}

impl Default for SubdominantSolver {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            policy: AnchorPolicy::default(),
        }
    }
}

impl SubdominantSolver {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// `(y0, y0')` at `z`; `|arg z| < 3 pi/(m+2)` or `z = 0`.
    pub fn y0(&self, spec: &ProblemSpec, z: Complex64) -> Result<SolutionFrame> {
        self.y0_impl(spec, z, false).map(|(f, _)| f)
    }

    /// `y0` at `z` together with `(dy0/dE, dy0'/dE)`.
    pub fn y0_with_variation(&self, spec: &ProblemSpec, z: Complex64) -> Result<(SolutionFrame, SolutionFrame)> {
        self.y0_impl(spec, z, true).map(|(f, v)| (f, v.expect("variation requested")))
    }

    fn y0_impl(
        &self,
        spec: &ProblemSpec,
        z: Complex64,
        variation: bool,
    ) -> Result<(SolutionFrame, Option<SolutionFrame>)> {
        if !(self.rel_tol > 0.0) {
            return Err(CoreError::InvalidInput("rel_tol must be positive".into()));
        }
        let half = PI / spec.sectors() as f64;
        let theta = if z.norm() == 0.0 { 0.0 } else { z.arg() };
        if theta.abs() >= 3.0 * half || !z.is_finite() {
            return Err(CoreError::Domain {
                z,
                what: "y0 (|arg z| < 3 pi/(m+2))",
            });
        }
        if theta.abs() > half * (1.0 + 1e-12) {
            // y0 is dominant here: reach z outward from the origin
            let (f0, v0) = self.y0_impl(spec, Complex64::new(0.0, 0.0), variation)?;
            let path = Path::segment(Complex64::new(0.0, 0.0), z)?;
            return self.propagate(spec, &path, f0, v0);
        }
        let choice = anchor_choice(spec, self.rel_tol, &self.policy);
        let radius = choice.radius.max(z.norm());
        let anchor = Complex64::from_polar(radius, theta);
        let (seed, seed_var, _) = seed_with_variation(spec, anchor, self.rel_tol, self.policy.max_terms)?;
        if anchor == z {
            return Ok((seed, variation.then_some(seed_var)));
        }
        let path = Path::segment(anchor, z)?;
        self.propagate(spec, &path, seed, variation.then_some(seed_var))
    }

    fn propagate(
        &self,
        spec: &ProblemSpec,
        path: &Path,
        f0: SolutionFrame,
        v0: Option<SolutionFrame>,
    ) -> Result<(SolutionFrame, Option<SolutionFrame>)> {
        let q = spec.potential();
        match v0 {
            Some(v0) => {
                let (f, v) = integrate_with_variation(&q, path, &f0, &v0, self.rel_tol)?;
                Ok((f, Some(v)))
            }
            None => Ok((integrate_path(&q, path, &f0, self.rel_tol)?, None)),
        }
    }

    /// `y0` at any finite `z`. Inside the closed sector `|arg z| <= pi/(m+2)`
    /// this is [`Self::y0`]; elsewhere the solution is carried along the
    /// straight segment from the anchor on the positive axis, which keeps
    /// it growing in the direction of integration.
    pub fn y0_from_anchor(
        &self,
        spec: &ProblemSpec,
        z: Complex64,
        variation: bool,
    ) -> Result<(SolutionFrame, Option<SolutionFrame>)> {
        let half = PI / spec.sectors() as f64;
        if z.norm() == 0.0 || z.arg().abs() <= half * (1.0 + 1e-12) {
            return self.y0_impl(spec, z, variation);
        }
        if !z.is_finite() {
            return Err(CoreError::Domain { z, what: "y0" });
        }
        let choice = anchor_choice(spec, self.rel_tol, &self.policy);
        let anchor = Complex64::new(choice.radius, 0.0);
        let (seed, seed_var, _) = seed_with_variation(spec, anchor, self.rel_tol, self.policy.max_terms)?;
        let path = Path::segment(anchor, z)?;
        self.propagate(spec, &path, seed, variation.then_some(seed_var))
    }

    /// Cheap frames of `y0` at each of `points`, carried along
    /// anchor, origin, `points[0]`, `points[1]`, ... at tolerance `probe_tol`.
    /// Only magnitudes are meant to be used.
    pub fn y0_probe(&self, spec: &ProblemSpec, points: &[Complex64], probe_tol: f64) -> Result<Vec<SolutionFrame>> {
        let coarse = Self {
            rel_tol: probe_tol,
            ..*self
        };
        let mut f = coarse.y0(spec, Complex64::new(0.0, 0.0))?;
        let q = spec.potential();
        let mut out = Vec::with_capacity(points.len());
        for &p in points {
            if p != f.z {
                f = integrate_path(&q, &Path::segment(f.z, p)?, &f, probe_tol)?;
            }
            out.push(f);
        }
        Ok(out)
    }

    /// `(y_k(0, E), y_k'(0, E)) = (y0(0, w^{2k}E), w^{-k} y0'(0, w^{2k}E))`.
    pub fn yk_at_origin(&self, spec: &ProblemSpec, k: i64) -> Result<SolutionFrame> {
        let rotated = spec.with_energy(spec.rotated_energy(k));
        let f = self.y0(&rotated, Complex64::new(0.0, 0.0))?;
        Ok(f.with_derivative_factor(spec.omega_pow(-k)))
    }

    /// [`Self::yk_at_origin`] with the energy derivatives of both entries.
    pub fn yk_at_origin_with_variation(&self, spec: &ProblemSpec, k: i64) -> Result<(SolutionFrame, SolutionFrame)> {
        let rotated = spec.with_energy(spec.rotated_energy(k));
        let (f, v) = self.y0_with_variation(&rotated, Complex64::new(0.0, 0.0))?;
        let w2k = spec.omega_pow(2 * k);
        let var = SolutionFrame {
            y: v.y * w2k,
            dy: v.dy * spec.omega_pow(k),
            ..v
        }
        .renormalized();
        Ok((f.with_derivative_factor(spec.omega_pow(-k)), var))
    }

    /// `(y_k(z), y_k'(z))` at a general point, from `y0` at `w^{-k} z`.
    pub fn yk(&self, spec: &ProblemSpec, k: i64, z: Complex64) -> Result<SolutionFrame> {
        let rotated = spec.with_energy(spec.rotated_energy(k));
        let f = self.y0(&rotated, z * spec.omega_pow(-k))?;
        Ok(SolutionFrame {
            z,
            ..f.with_derivative_factor(spec.omega_pow(-k))
        })
    }
}

/// `y0` at `z` with default anchor settings.
pub fn evaluate_y0(spec: &ProblemSpec, z: Complex64, rel_tol: f64) -> Result<SolutionFrame> {
    SubdominantSolver::new(rel_tol).y0(spec, z)
}

/// `y_k` at the origin with default settings.
pub fn yk_at_origin(spec: &ProblemSpec, k: i64) -> Result<SolutionFrame> {
    SubdominantSolver::default().yk_at_origin(spec, k)
}
