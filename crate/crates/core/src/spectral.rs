//! Wronskians of the rotated subdominant solutions, the Stokes multiplier
//! `C(E) = W_{-1,1}/W_{0,1}` and the entire functions built from it:
//!
//! ```text
//! g(E) = C(E) C(w^2 E) - w
//! f(E) = -w^{-1} g(w^{-1} E) = 1 - h(w^{-1} E) h(w E)
//! h(E) = C(E) / e,   e = exp(i pi/(m+2))
//! ```
//!
//! Along the rays where these functions have zeros they are exponentially
//! small, so `g` is formed as `W_{-1,2}/W_{1,2}` instead of the product
//! above and `f - 1` as `-w^{-1} C(w^{-1} E) C(w E)`. Each Wronskian is
//! taken at a matching point where the two solutions are of comparable
//! size, both integrated straight from their own anchors.

use crate::error::{CoreError, Result};
use crate::ode::SolutionFrame;
use crate::sibuya::{ProblemSpec, SubdominantSolver};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Absolute floor on `|W_{0,1}|`, far below its true modulus 2.
const W01_FLOOR: f64 = 1e-3;

/// Which spectral function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectralFunctionId {
    C,
    G,
    F,
    H,
    FMinus1,
    W(i64, i64),
}

impl fmt::Display for SpectralFunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::C => write!(f, "C"),
            Self::G => write!(f, "g"),
            Self::F => write!(f, "f"),
            Self::H => write!(f, "h"),
            Self::FMinus1 => write!(f, "f-1"),
            Self::W(n, k) => write!(f, "W({n},{k})"),
        }
    }
}

impl FromStr for SpectralFunctionId {
    type Err = CoreError;

    /// Accepts `C`, `g`, `f`, `h`, `f-1` and `W(n,k)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "C" | "c" => return Ok(Self::C),
            "g" | "G" => return Ok(Self::G),
            "f" | "F" => return Ok(Self::F),
            "h" | "H" => return Ok(Self::H),
            "f-1" | "f_minus_1" | "F-1" => return Ok(Self::FMinus1),
            _ => {}
        }
        let inner = t
            .strip_prefix("W(")
            .or_else(|| t.strip_prefix("w("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| CoreError::InvalidInput(format!("unknown spectral function '{s}'")))?;
        let mut it = inner.split(',').map(|p| p.trim().parse::<i64>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(n)), Some(Ok(k)), None) => Ok(Self::W(n, k)),
            _ => Err(CoreError::InvalidInput(format!("malformed Wronskian id '{s}'"))),
        }
    }
}

/// A spectral function value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralValue {
    pub energy: Complex64,
    pub value: Complex64,
    pub err_estimate: f64,
}

/// `mant * exp(log)`, closed under products so that large factors cancel
/// before anything is exponentiated.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mant: Complex64,
    log: Complex64,
}

impl Scaled {
    fn new(mant: Complex64, log: Complex64) -> Self {
        Self { mant, log }
    }

    fn plain(v: Complex64) -> Self {
        Self::new(v, Complex64::new(0.0, 0.0))
    }

    fn mul(self, o: Scaled) -> Scaled {
        Scaled::new(self.mant * o.mant, self.log + o.log)
    }

    fn div(self, o: Scaled) -> Scaled {
        Scaled::new(self.mant / o.mant, self.log - o.log)
    }

    fn scale(self, c: Complex64) -> Scaled {
        Scaled::new(self.mant * c, self.log)
    }

    fn get(self) -> Complex64 {
        self.mant * self.log.exp()
    }

    fn abs(self) -> f64 {
        self.mant.norm() * self.log.re.exp()
    }

    /// Sum of terms with possibly different offsets.
    fn sum(terms: &[Scaled]) -> Scaled {
        let top = terms
            .iter()
            .filter(|t| t.mant.norm() > 0.0)
            .map(|t| t.log.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Scaled::plain(Complex64::new(0.0, 0.0));
        }
        let mant = terms
            .iter()
            .filter(|t| t.mant.norm() > 0.0)
            .map(|t| t.mant * (t.log - top).exp())
            .sum();
        Scaled::new(mant, Complex64::new(top, 0.0))
    }
}

/// A `y0` frame together with its energy derivative (when requested).
#[derive(Debug, Clone, Copy)]
struct Frames {
    base: SolutionFrame,
    var: Option<SolutionFrame>,
}

/// A Wronskian value, optionally with its energy derivative, both as
/// offset-carrying numbers.
#[derive(Debug, Clone, Copy)]
struct WValue {
    value: Scaled,
    /// Absolute error estimate relative to `exp(value.log.re)`.
    err: f64,
    derivative: Option<Scaled>,
}

impl WValue {
    fn zero(variation: bool) -> Self {
        let z = Scaled::plain(Complex64::new(0.0, 0.0));
        Self {
            value: z,
            err: 0.0,
            derivative: variation.then_some(z),
        }
    }

    fn rel_err(&self) -> f64 {
        let a = self.value.mant.norm();
        if a > 0.0 {
            self.err / a
        } else {
            f64::INFINITY
        }
    }

    fn scaled(self, c: Complex64, dc: Complex64) -> Self {
        Self {
            value: self.value.scale(c),
            err: self.err * c.norm(),
            derivative: self.derivative.map(|d| d.scale(dc)),
        }
    }
}

/// `y_a y_b' - y_a' y_b` where each entry is a `y0` frame whose derivative
/// is multiplied by `dfac` and whose energy variation by `efac`.
fn combine(fa: &Frames, (wa, da): (Complex64, Complex64), fb: &Frames, (wb, db): (Complex64, Complex64)) -> WValue {
    let log = fa.base.log_offset + fb.base.log_offset;
    let (dya, dyb) = (fa.base.dy * wa, fb.base.dy * wb);
    let t1 = fa.base.y * dyb;
    let t2 = dya * fb.base.y;
    let mant = t1 - t2;
    let scale = t1.norm() + t2.norm();
    let err = (fa.base.err_estimate + fb.base.err_estimate + 4.0 * f64::EPSILON) * scale;
    let derivative = match (fa.var, fb.var) {
        (Some(va), Some(vb)) => {
            let ya = Scaled::new(fa.base.y, fa.base.log_offset);
            let dya = Scaled::new(dya, fa.base.log_offset);
            let yb = Scaled::new(fb.base.y, fb.base.log_offset);
            let dyb = Scaled::new(dyb, fb.base.log_offset);
            let ua = Scaled::new(va.y * da, va.log_offset);
            let dua = Scaled::new(va.dy * wa * da, va.log_offset);
            let ub = Scaled::new(vb.y * db, vb.log_offset);
            let dub = Scaled::new(vb.dy * wb * db, vb.log_offset);
            let minus = Complex64::new(-1.0, 0.0);
            Some(Scaled::sum(&[
                ua.mul(dyb),
                ya.mul(dub),
                dua.mul(yb).scale(minus),
                dya.mul(ub).scale(minus),
            ]))
        }
        _ => None,
    };
    WValue {
        value: Scaled::new(mant, log),
        err,
        derivative,
    }
}

/// `N / D` with relative error and, when both carry one, the derivative
/// `(N' D - N D') / D^2`.
fn quotient(num: &WValue, den: &WValue) -> (Complex64, f64, Option<Complex64>) {
    let q = num.value.div(den.value);
    let rel = (num.rel_err() + den.rel_err()).min(1e300);
    let deriv = match (num.derivative, den.derivative) {
        (Some(dn), Some(dd)) => {
            let top = Scaled::sum(&[dn.mul(den.value), num.value.mul(dd).scale(Complex64::new(-1.0, 0.0))]);
            Some(top.div(den.value.mul(den.value)).get())
        }
        _ => None,
    };
    (q.get(), rel, deriv)
}

/// Sample count along the probe ray used to pick a matching point.
const PROBE_POINTS: usize = 24;
const PROBE_TOL: f64 = 1e-6;

/// Evaluates the spectral functions for a fixed `m`.
///
/// A Wronskian `W_{a,b}` is formed at a matching point where neither
/// solution is exponentially larger than the pair's Wronskian, with both
/// solutions carried there directly from their own anchors. At `z = 0`
/// the two products can exceed `|W|` by many orders of magnitude for
/// large `|E|`, which the difference cannot survive in double precision.
#[derive(Debug, Clone)]
pub struct SpectralEvaluator {
    m: u32,
    solver: SubdominantSolver,
}

impl SpectralEvaluator {
    /// Builds the evaluator and runs the `C(0) = 1 + w` self-test, which
    /// catches a flipped Wronskian or rotation convention.
    pub fn new(m: u32, rel_tol: f64) -> Result<Self> {
        let ev = Self::with_solver(m, SubdominantSolver::new(rel_tol))?;
        ev.self_test()?;
        Ok(ev)
    }

    pub fn with_solver(m: u32, solver: SubdominantSolver) -> Result<Self> {
        ProblemSpec::new(m, Complex64::new(0.0, 0.0))?;
        if !(solver.rel_tol > 0.0) {
            return Err(CoreError::InvalidInput("rel_tol must be positive".into()));
        }
        Ok(Self { m, solver })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn rel_tol(&self) -> f64 {
        self.solver.rel_tol
    }

    pub fn solver(&self) -> &SubdominantSolver {
        &self.solver
    }

    pub fn spec(&self, energy: Complex64) -> ProblemSpec {
        ProblemSpec::new(self.m, energy).expect("m validated at construction")
    }

    pub fn omega(&self) -> Complex64 {
        self.spec(Complex64::new(0.0, 0.0)).omega()
    }

    pub fn epsilon(&self) -> Complex64 {
        self.spec(Complex64::new(0.0, 0.0)).epsilon()
    }

    fn omega_pow(&self, k: i64) -> Complex64 {
        self.spec(Complex64::new(0.0, 0.0)).omega_pow(k)
    }

    fn sectors(&self) -> i64 {
        self.m as i64 + 2
    }

    pub fn self_test(&self) -> Result<()> {
        let c0 = self.stokes_c(Complex64::new(0.0, 0.0))?.value;
        let expected = 1.0 + self.omega();
        let conj = 1.0 + self.omega().conj();
        if (c0 - expected).norm() > 1e-8 * expected.norm().max(1.0) {
            let hint = if (c0 - conj).norm() < 1e-6 || (c0 - 1.0 / expected).norm() < 1e-6 {
                " (rotation direction or Wronskian sign flipped)"
            } else {
                ""
            };
            return Err(CoreError::Consistency(format!(
                "C(0) = {c0}, expected 1 + w = {expected}{hint}"
            )));
        }
        Ok(())
    }

    /// `y_k(p, E) = y0(w^-k p, w^{2k} E)` as a raw `y0` frame.
    fn yk_frames(&self, energy: Complex64, k: i64, p: Complex64, variation: bool) -> Result<Frames> {
        let spec = self.spec(energy * self.omega_pow(2 * k));
        let (base, var) = self
            .solver
            .y0_from_anchor(&spec, p * self.omega_pow(-k), variation)?;
        Ok(Frames { base, var })
    }

    /// Point at which `W_{a,b}(E)` is formed.
    ///
    /// Adjacent sectors use their common boundary ray at
    /// `1.5 max(1, |E|^{1/m})`. Otherwise a coarse probe runs along the ray
    /// midway between the two sector bisectors (the shorter way round) out
    /// to the same radius, and the point minimizing
    /// `|y_a y_b'| + |y_a' y_b|` is taken, the origin included.
    pub fn matching_point(&self, energy: Complex64, a: i64, b: i64) -> Result<Complex64> {
        let n = self.sectors();
        let d = (b - a).rem_euclid(n);
        if d == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mid = if 2 * d <= n {
            a as f64 + d as f64 / 2.0
        } else {
            a as f64 - (n - d) as f64 / 2.0
        };
        let phi = 2.0 * PI * mid / n as f64;
        let reach = 1.5 * energy.norm().powf(1.0 / self.m as f64).max(1.0);
        if d == 1 || d == n - 1 {
            return Ok(Complex64::from_polar(reach, phi));
        }
        let mut pts = vec![Complex64::new(0.0, 0.0)];
        pts.extend((1..=PROBE_POINTS).map(|j| Complex64::from_polar(reach * j as f64 / PROBE_POINTS as f64, phi)));
        let probe = |k: i64| -> Result<Vec<SolutionFrame>> {
            let spec = self.spec(energy * self.omega_pow(2 * k));
            let rotated: Vec<Complex64> = pts.iter().map(|&p| p * self.omega_pow(-k)).collect();
            self.solver.y0_probe(&spec, &rotated, PROBE_TOL)
        };
        let (fa, fb) = (probe(a)?, probe(b)?);
        let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
        for (j, (x, y)) in fa.iter().zip(&fb).enumerate() {
            let s = (x.y.norm() * y.dy.norm() + x.dy.norm() * y.y.norm()).ln() + x.log_offset.re + y.log_offset.re;
            if s < best.0 {
                best = (s, pts[j]);
            }
        }
        Ok(best.1)
    }

    fn w_value(&self, energy: Complex64, a: i64, b: i64, variation: bool) -> Result<WValue> {
        let n = self.sectors();
        let (ra, rb) = (a.rem_euclid(n), b.rem_euclid(n));
        if ra == rb {
            return Ok(WValue::zero(variation));
        }
        if ra > rb {
            let w = self.w_value(energy, rb, ra, variation)?;
            let minus = Complex64::new(-1.0, 0.0);
            return Ok(w.scaled(minus, minus));
        }
        let p = self.matching_point(energy, ra, rb)?;
        let fa = self.yk_frames(energy, ra, p, variation)?;
        let fb = self.yk_frames(energy, rb, p, variation)?;
        Ok(combine(
            &fa,
            (self.omega_pow(-ra), self.omega_pow(2 * ra)),
            &fb,
            (self.omega_pow(-rb), self.omega_pow(2 * rb)),
        ))
    }

    /// `C(E)` with relative error and optional derivative.
    fn c_value(&self, energy: Complex64, variation: bool) -> Result<(Complex64, f64, Option<Complex64>)> {
        let num = self.w_value(energy, -1, 1, variation)?;
        let den = self.w_value(energy, 0, 1, variation)?;
        let den_abs = den.value.abs();
        if !(den_abs >= W01_FLOOR) {
            return Err(CoreError::Consistency(format!(
                "|W(0,1)| = {den_abs:e} at E = {energy}; it never vanishes, so the integration failed"
            )));
        }
        Ok(quotient(&num, &den))
    }

    /// `g(E)` as `W_{-1,2}/W_{1,2}`, which follows from applying the
    /// connection relation twice: `y_{-1} = g(E) y_1 - w C(E) y_2`.
    fn g_value(&self, energy: Complex64, variation: bool) -> Result<(Complex64, f64, Option<Complex64>)> {
        let num = self.w_value(energy, -1, 2, variation)?;
        let den = self.w_value(energy, 1, 2, variation)?;
        let den_abs = den.value.abs();
        if !(den_abs >= W01_FLOOR) {
            return Err(CoreError::Consistency(format!(
                "|W(1,2)| = {den_abs:e} at E = {energy}; it never vanishes, so the integration failed"
            )));
        }
        Ok(quotient(&num, &den))
    }

    /// `W_{i,j}(E)`. The value is independent of where it is formed; see
    /// [`Self::matching_point`].
    pub fn wronskian(&self, energy: Complex64, i: i64, j: i64) -> Result<SpectralValue> {
        Ok(self.wronskian_with_derivative(energy, i, j, false)?.0)
    }

    fn wronskian_with_derivative(
        &self,
        energy: Complex64,
        i: i64,
        j: i64,
        variation: bool,
    ) -> Result<(SpectralValue, Option<Complex64>)> {
        let w = self.w_value(energy, i, j, variation)?;
        let mag = w.value.log.re.exp();
        Ok((
            SpectralValue {
                energy,
                value: w.value.get(),
                err_estimate: w.err * mag,
            },
            w.derivative.map(Scaled::get),
        ))
    }

    /// `W_{i,j}(E)` formed literally at `z = 0` from `y_k(0)` and
    /// `y_k'(0)`. Well conditioned only for moderate `|E|`.
    pub fn wronskian_at_origin(&self, energy: Complex64, i: i64, j: i64) -> Result<SpectralValue> {
        let zero = Complex64::new(0.0, 0.0);
        let fa = self.yk_frames(energy, i, zero, false)?;
        let fb = self.yk_frames(energy, j, zero, false)?;
        let w = combine(
            &fa,
            (self.omega_pow(-i), self.omega_pow(2 * i)),
            &fb,
            (self.omega_pow(-j), self.omega_pow(2 * j)),
        );
        Ok(SpectralValue {
            energy,
            value: w.value.get(),
            err_estimate: w.err * w.value.log.re.exp(),
        })
    }

    pub fn stokes_c(&self, energy: Complex64) -> Result<SpectralValue> {
        Ok(self.stokes_c_with_derivative(energy, false)?.0)
    }

    fn stokes_c_with_derivative(&self, energy: Complex64, variation: bool) -> Result<(SpectralValue, Option<Complex64>)> {
        let (c, rel, d) = self.c_value(energy, variation)?;
        Ok((
            SpectralValue {
                energy,
                value: c,
                err_estimate: c.norm() * rel,
            },
            d,
        ))
    }

    pub fn g(&self, energy: Complex64) -> Result<SpectralValue> {
        Ok(self.g_with_derivative(energy, false)?.0)
    }

    fn g_with_derivative(&self, energy: Complex64, variation: bool) -> Result<(SpectralValue, Option<Complex64>)> {
        let (g, rel, d) = self.g_value(energy, variation)?;
        Ok((
            SpectralValue {
                energy,
                value: g,
                err_estimate: g.norm() * rel,
            },
            d,
        ))
    }

    /// `g(E)` from its definition `C(E) C(w^2 E) - w`. Loses all relative
    /// accuracy where `g` is small; kept for cross-checks.
    pub fn g_via_c(&self, energy: Complex64) -> Result<SpectralValue> {
        let (c1, r1, _) = self.c_value(energy, false)?;
        let (c2, r2, _) = self.c_value(energy * self.omega_pow(2), false)?;
        let p = c1 * c2;
        Ok(SpectralValue {
            energy,
            value: p - self.omega(),
            err_estimate: p.norm() * (r1 + r2) + 4.0 * f64::EPSILON * (1.0 + p.norm()),
        })
    }

    pub fn f(&self, energy: Complex64) -> Result<SpectralValue> {
        Ok(self.f_with_derivative(energy, false)?.0)
    }

    fn f_with_derivative(&self, energy: Complex64, variation: bool) -> Result<(SpectralValue, Option<Complex64>)> {
        let w_inv = self.omega_pow(-1);
        // f(E) = -w^-1 g(w^-1 E)
        let (g, rel, dg) = self.g_value(energy * w_inv, variation)?;
        let value = -w_inv * g;
        let err = value.norm() * rel + 4.0 * f64::EPSILON * value.norm();
        // cross-check through h: f(E) = 1 - h(w^-1 E) h(w E)
        let (ca, ra, _) = self.c_value(energy * w_inv, false)?;
        let (cb, rb, _) = self.c_value(energy * self.omega(), false)?;
        let e = self.epsilon();
        let prod = (ca / e) * (cb / e);
        let via_h = 1.0 - prod;
        let err_h = prod.norm() * (ra + rb) + 4.0 * f64::EPSILON * (1.0 + prod.norm());
        if (via_h - value).norm() > 10.0 * (err + err_h) {
            return Err(CoreError::Consistency(format!(
                "f({energy}) = {value} via g but {via_h} via h (tolerance {:e})",
                10.0 * (err + err_h)
            )));
        }
        let deriv = dg.map(|d| -w_inv * w_inv * d);
        Ok((
            SpectralValue {
                energy,
                value,
                err_estimate: err,
            },
            deriv,
        ))
    }

    /// `f(E) - 1`, computed as `-w^-1 C(w^-1 E) C(w E)` so that it keeps
    /// its relative accuracy near the 1-points of `f`.
    pub fn f_minus_1(&self, energy: Complex64) -> Result<SpectralValue> {
        Ok(self.f_minus_1_with_derivative(energy, false)?.0)
    }

    fn f_minus_1_with_derivative(
        &self,
        energy: Complex64,
        variation: bool,
    ) -> Result<(SpectralValue, Option<Complex64>)> {
        let w = self.omega();
        let w_inv = self.omega_pow(-1);
        let (ca, ra, da) = self.c_value(energy * w_inv, variation)?;
        let (cb, rb, db) = self.c_value(energy * w, variation)?;
        let value = -w_inv * ca * cb;
        let deriv = match (da, db) {
            (Some(da), Some(db)) => Some(-w_inv * (da * w_inv * cb + ca * db * w)),
            _ => None,
        };
        Ok((
            SpectralValue {
                energy,
                value,
                err_estimate: value.norm() * (ra + rb + 4.0 * f64::EPSILON),
            },
            deriv,
        ))
    }

    /// `1 - h(w^-1 E) h(w E)` computed with the given branch of `sqrt(w)`.
    /// Independent of the branch, since only the product enters.
    pub fn f_via_h(&self, energy: Complex64, sqrt_omega: Complex64) -> Result<Complex64> {
        let (ca, _, _) = self.c_value(energy * self.omega_pow(-1), false)?;
        let (cb, _, _) = self.c_value(energy * self.omega(), false)?;
        Ok(1.0 - (ca / sqrt_omega) * (cb / sqrt_omega))
    }

    pub fn h(&self, energy: Complex64) -> Result<SpectralValue> {
        let c = self.stokes_c(energy)?;
        Ok(SpectralValue {
            value: c.value / self.epsilon(),
            ..c
        })
    }

    pub fn eval(&self, id: SpectralFunctionId, energy: Complex64) -> Result<SpectralValue> {
        Ok(self.eval_impl(id, energy, false)?.0)
    }

    /// Value together with the derivative in `E`, from the variational
    /// equations.
    pub fn eval_with_derivative(&self, id: SpectralFunctionId, energy: Complex64) -> Result<(SpectralValue, Complex64)> {
        let (v, d) = self.eval_impl(id, energy, true)?;
        Ok((v, d.expect("variation requested")))
    }

    fn eval_impl(
        &self,
        id: SpectralFunctionId,
        energy: Complex64,
        variation: bool,
    ) -> Result<(SpectralValue, Option<Complex64>)> {
        match id {
            SpectralFunctionId::C => self.stokes_c_with_derivative(energy, variation),
            SpectralFunctionId::H => {
                let (v, d) = self.stokes_c_with_derivative(energy, variation)?;
                let e = self.epsilon();
                Ok((
                    SpectralValue {
                        value: v.value / e,
                        ..v
                    },
                    d.map(|d| d / e),
                ))
            }
            SpectralFunctionId::G => self.g_with_derivative(energy, variation),
            SpectralFunctionId::F => self.f_with_derivative(energy, variation),
            SpectralFunctionId::FMinus1 => self.f_minus_1_with_derivative(energy, variation),
            SpectralFunctionId::W(i, j) => self.wronskian_with_derivative(energy, i, j, variation),
        }
    }

    /// Scaled residual of `y_{-1} = C y_0 - w y_1` and its derivative at `z`,
    /// with all five quantities evaluated independently.
    pub fn connection_residual(&self, energy: Complex64, z: Complex64) -> Result<f64> {
        let spec = self.spec(energy);
        let c = self.stokes_c(energy)?.value;
        let w = self.omega();
        let ym = self.solver.yk(&spec, -1, z)?;
        let y0 = self.solver.yk(&spec, 0, z)?;
        let yp = self.solver.yk(&spec, 1, z)?;
        let term = |f: &SolutionFrame, coeff: Complex64, deriv: bool| {
            Scaled::new(if deriv { f.dy } else { f.y } * coeff, f.log_offset)
        };
        let mut worst: f64 = 0.0;
        for deriv in [false, true] {
            let a = term(&ym, Complex64::new(1.0, 0.0), deriv);
            let b = term(&y0, -c, deriv);
            let d = term(&yp, w, deriv);
            let scale = a.abs().max(b.abs()).max(d.abs());
            if scale == 0.0 {
                continue;
            }
            let r = Scaled::sum(&[a, b, d]).abs() / scale;
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

/// `W_{i,j}(E)` with default tolerances.
pub fn wronskian(spec: &ProblemSpec, i: i64, j: i64) -> Result<SpectralValue> {
    SpectralEvaluator::with_solver(spec.m(), SubdominantSolver::default())?.wronskian(spec.energy(), i, j)
}

pub fn stokes_c(spec: &ProblemSpec) -> Result<SpectralValue> {
    SpectralEvaluator::with_solver(spec.m(), SubdominantSolver::default())?.stokes_c(spec.energy())
}

pub fn spectral_g(spec: &ProblemSpec) -> Result<SpectralValue> {
    SpectralEvaluator::with_solver(spec.m(), SubdominantSolver::default())?.g(spec.energy())
}

pub fn spectral_f(spec: &ProblemSpec) -> Result<SpectralValue> {
    SpectralEvaluator::with_solver(spec.m(), SubdominantSolver::default())?.f(spec.energy())
}

pub fn spectral_h(spec: &ProblemSpec) -> Result<SpectralValue> {
    SpectralEvaluator::with_solver(spec.m(), SubdominantSolver::default())?.h(spec.energy())
}

pub fn connection_residual(spec: &ProblemSpec, z: Complex64) -> Result<f64> {
    SpectralEvaluator::with_solver(spec.m(), SubdominantSolver::default())?.connection_residual(spec.energy(), z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn id_parsing() {
        assert_eq!("C".parse::<SpectralFunctionId>().unwrap(), SpectralFunctionId::C);
        assert_eq!("f-1".parse::<SpectralFunctionId>().unwrap(), SpectralFunctionId::FMinus1);
        assert_eq!("W(0,-3)".parse::<SpectralFunctionId>().unwrap(), SpectralFunctionId::W(0, -3));
        assert!("W(1)".parse::<SpectralFunctionId>().is_err());
        assert!("q".parse::<SpectralFunctionId>().is_err());
        for id in [SpectralFunctionId::G, SpectralFunctionId::W(2, 4), SpectralFunctionId::FMinus1] {
            assert_eq!(id.to_string().parse::<SpectralFunctionId>().unwrap(), id);
        }
    }

    #[test]
    fn wronskian_antisymmetry_is_exact() {
        let ev = SpectralEvaluator::with_solver(3, SubdominantSolver::default()).unwrap();
        let e = c(1.3, -0.4);
        for i in -2..3 {
            assert_eq!(ev.wronskian(e, i, i).unwrap().value, c(0.0, 0.0));
        }
        let a = ev.wronskian(e, 0, 2).unwrap().value;
        let b = ev.wronskian(e, 2, 0).unwrap().value;
        assert_eq!(a, -b);
    }

    #[test]
    fn self_test_passes() {
        for m in 3..7 {
            SpectralEvaluator::new(m, 1e-12).unwrap();
        }
    }

    #[test]
    fn zero_energy_closed_forms() {
        for m in 3..6u32 {
            let ev = SpectralEvaluator::new(m, 1e-12).unwrap();
            let w = ev.omega();
            let z = c(0.0, 0.0);
            let cval = ev.stokes_c(z).unwrap().value;
            assert!((cval - (1.0 + w)).norm() < 1e-10 * (1.0 + w).norm(), "m = {m}: {cval}");
            let g = ev.g(z).unwrap().value;
            assert!((g - (1.0 + w + w * w)).norm() < 1e-10);
            let h = ev.h(z).unwrap().value;
            let hc = 2.0 * (std::f64::consts::PI / (m as f64 + 2.0)).cos();
            assert!((h - hc).norm() < 1e-10 * hc);
        }
    }

    #[test]
    fn f_minus_one_shifts_f() {
        let ev = SpectralEvaluator::new(3, 1e-12).unwrap();
        let e = c(2.0, 1.0);
        let f = ev.f(e).unwrap().value;
        let fm = ev.eval(SpectralFunctionId::FMinus1, e).unwrap();
        assert!((fm.value - (f - 1.0)).norm() < 1e-9 * (1.0 + f.norm()), "{fm:?} vs {f}");
    }
}
