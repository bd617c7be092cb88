//! Adaptive integration of `y'' = Q(z) y` along straight segments in the
//! complex plane.
//!
//! Solutions of the equations handled here grow or decay over hundreds of
//! e-folds, so values are carried as a mantissa pair plus a complex log
//! offset: the represented pair is `(y, y') * exp(log_offset)`.

mod rkf78;

use crate::error::{CoreError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default relative tolerance for path integration.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

const MAX_STEPS: usize = 2_000_000;
/// Per-step error floor; below this the embedded estimate is roundoff noise.
const ERR_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Polynomial `Q(z) = sum c_j z^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPotential {
    coefficients: Vec<Complex64>,
}

impl PolynomialPotential {
    /// Coefficients are indexed by power. Trailing zeros are dropped.
    pub fn new(mut coefficients: Vec<Complex64>) -> Self {
        while coefficients.len() > 1 && coefficients.last() == Some(&Complex64::new(0.0, 0.0)) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(Complex64::new(0.0, 0.0));
        }
        Self { coefficients }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `z^m + energy`.
    pub fn monomial_plus_energy(m: u32, energy: Complex64) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); m as usize + 1];
        c[0] += energy;
        c[m as usize] += Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Q'(z)`.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (j, &c)| acc * z + c * j as f64)
    }
}

/// Overflow-safe value of `(y, y')` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionFrame {
    pub z: Complex64,
    pub y: Complex64,
    pub dy: Complex64,
    /// Represented values are `y * exp(log_offset)` and `dy * exp(log_offset)`.
    pub log_offset: Complex64,
    /// Accumulated relative error estimate. Never decreases along a path.
    pub err_estimate: f64,
}

impl SolutionFrame {
    pub fn new(z: Complex64, y: Complex64, dy: Complex64) -> Self {
        Self {
            z,
            y,
            dy,
            log_offset: Complex64::new(0.0, 0.0),
            err_estimate: 0.0,
        }
    }

    pub fn with_log_offset(z: Complex64, y: Complex64, dy: Complex64, log_offset: Complex64) -> Self {
        Self {
            z,
            y,
            dy,
            log_offset,
            err_estimate: 0.0,
        }
        .renormalized()
    }

    pub fn value(&self) -> Complex64 {
        self.y * self.log_offset.exp()
    }

    pub fn derivative(&self) -> Complex64 {
        self.dy * self.log_offset.exp()
    }

    /// `log(y)`, finite even when `y` itself would overflow.
    pub fn log_value(&self) -> Complex64 {
        self.y.ln() + self.log_offset
    }

    pub fn mantissa_scale(&self) -> f64 {
        self.y.norm().max(self.dy.norm())
    }

    /// Moves the magnitude of the larger mantissa into the log offset.
    /// The zero frame is returned unchanged.
    pub fn renormalized(mut self) -> Self {
        let big = self.mantissa_scale();
        if big == 0.0 || !big.is_finite() {
            return self;
        }
        self.y /= big;
        self.dy /= big;
        self.log_offset = wrap_log(self.log_offset + big.ln());
        self
    }

    /// Multiplies the represented pair by `alpha`.
    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            y: self.y * alpha,
            dy: self.dy * alpha,
            ..*self
        }
    }

    /// The same frame with the derivative multiplied by `factor` (chain rule
    /// for a rotated argument).
    pub fn with_derivative_factor(&self, factor: Complex64) -> Self {
        Self {
            dy: self.dy * factor,
            ..*self
        }
        .renormalized()
    }
}

/// Keeps the imaginary part of a log offset in (-pi, pi].
fn wrap_log(l: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    let mut im = l.im % (2.0 * PI);
    if im > PI {
        im -= 2.0 * PI;
    } else if im <= -PI {
        im += 2.0 * PI;
    }
    Complex64::new(l.re, im)
}

/// Chain of straight segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    segments: Vec<(Complex64, Complex64)>,
}

impl Path {
    pub fn new(segments: Vec<(Complex64, Complex64)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(CoreError::InvalidInput("path has no segments".into()));
        }
        for (i, &(a, b)) in segments.iter().enumerate() {
            if a == b {
                return Err(CoreError::InvalidInput(format!("segment {i} has zero length")));
            }
            if !a.is_finite() || !b.is_finite() {
                return Err(CoreError::InvalidInput(format!("segment {i} is not finite")));
            }
            if i > 0 && segments[i - 1].1 != a {
                return Err(CoreError::InvalidInput(format!(
                    "segment {i} does not start where segment {} ends",
                    i - 1
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn segment(start: Complex64, end: Complex64) -> Result<Self> {
        Self::new(vec![(start, end)])
    }

    /// Path through the given vertices in order.
    pub fn polyline(points: &[Complex64]) -> Result<Self> {
        Self::new(points.windows(2).map(|w| (w[0], w[1])).collect())
    }

    pub fn segments(&self) -> &[(Complex64, Complex64)] {
        &self.segments
    }

    pub fn start(&self) -> Complex64 {
        self.segments[0].0
    }

    pub fn end(&self) -> Complex64 {
        self.segments[self.segments.len() - 1].1
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(|&(a, b)| (b, a)).collect(),
        }
    }
}

/// Integrates `y'' = Q y` along `path` starting from `initial`.
pub fn integrate_path(
    potential: &PolynomialPotential,
    path: &Path,
    initial: &SolutionFrame,
    rel_tol: f64,
) -> Result<SolutionFrame> {
    check_inputs(path, initial, rel_tol)?;
    let mut state = [initial.y, initial.dy];
    let mut log_offset = initial.log_offset;
    let mut err = initial.err_estimate;
    let rhs = |q: Complex64, dir: Complex64, s: &[Complex64; 2]| [dir * s[1], dir * q * s[0]];
    for &(a, b) in path.segments() {
        run_segment(potential, a, b, &mut state, &mut log_offset, &mut err, rel_tol, &rhs, 2)?;
    }
    Ok(SolutionFrame {
        z: path.end(),
        y: state[0],
        dy: state[1],
        log_offset,
        err_estimate: err,
    }
    .renormalized())
}

/// Integrates the base equation together with its variation in the energy,
/// `u'' = Q u + y` (the energy enters `Q` as the constant coefficient).
///
/// Returns the base frame and the frame holding `(dy/dE, dy'/dE)`.
pub fn integrate_with_variation(
    potential: &PolynomialPotential,
    path: &Path,
    initial: &SolutionFrame,
    initial_variation: &SolutionFrame,
    rel_tol: f64,
) -> Result<(SolutionFrame, SolutionFrame)> {
    check_inputs(path, initial, rel_tol)?;
    let base_off = initial.log_offset;
    // bring the variation onto the base offset
    let var_scale = if initial_variation.y == Complex64::new(0.0, 0.0)
        && initial_variation.dy == Complex64::new(0.0, 0.0)
    {
        Complex64::new(0.0, 0.0)
    } else {
        let s = (initial_variation.log_offset - base_off).exp();
        if !s.is_finite() {
            return Err(CoreError::InvalidInput(
                "variation and base frames differ by more than the exponent range".into(),
            ));
        }
        s
    };
    let mut state = [
        initial.y,
        initial.dy,
        initial_variation.y * var_scale,
        initial_variation.dy * var_scale,
    ];
    let mut log_offset = base_off;
    let mut err = initial.err_estimate.max(initial_variation.err_estimate);
    let rhs = |q: Complex64, dir: Complex64, s: &[Complex64; 4]| {
        [dir * s[1], dir * q * s[0], dir * s[3], dir * (q * s[2] + s[0])]
    };
    for &(a, b) in path.segments() {
        run_segment(potential, a, b, &mut state, &mut log_offset, &mut err, rel_tol, &rhs, 2)?;
    }
    let z = path.end();
    let base = SolutionFrame {
        z,
        y: state[0],
        dy: state[1],
        log_offset,
        err_estimate: err,
    }
    .renormalized();
    let var = SolutionFrame {
        z,
        y: state[2],
        dy: state[3],
        log_offset,
        err_estimate: err,
    }
    .renormalized();
    Ok((base, var))
}

fn check_inputs(path: &Path, initial: &SolutionFrame, rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0) || !rel_tol.is_finite() {
        return Err(CoreError::InvalidInput(format!("rel_tol must be positive, got {rel_tol}")));
    }
    let start = path.start();
    if (initial.z - start).norm() > 1e-12 * start.norm().max(1.0) {
        return Err(CoreError::InvalidInput(format!(
            "initial frame is at {} but the path starts at {}",
            initial.z, start
        )));
    }
    if !initial.y.is_finite() || !initial.dy.is_finite() || !initial.log_offset.is_finite() {
        return Err(CoreError::InvalidInput("initial frame is not finite".into()));
    }
    Ok(())
}

/// Weighted size of a solution pair: `max(|y|, |y'|/kappa)`.
#[inline]
fn pair_norm(y: Complex64, dy: Complex64, kappa: f64) -> f64 {
    y.norm().max(dy.norm() / kappa)
}

/// Advances `state` over one straight segment with adaptive RKF7(8) steps
/// and a PI step-size controller. The first `base_len` components form the
/// base solution used for renormalization.
#[allow(clippy::too_many_arguments)]
fn run_segment<const N: usize, F>(
    potential: &PolynomialPotential,
    a: Complex64,
    b: Complex64,
    state: &mut [Complex64; N],
    log_offset: &mut Complex64,
    err_acc: &mut f64,
    rel_tol: f64,
    rhs: &F,
    base_len: usize,
) -> Result<()>
where
    F: Fn(Complex64, Complex64, &[Complex64; N]) -> [Complex64; N],
{
    use rkf78::{A, B, B_ERR, C, STAGES};

    let len = (b - a).norm();
    let dir = (b - a) / len;
    let point = |s: f64| if s >= len { b } else { a + dir * s };

    let kappa0 = potential.eval(a).norm().sqrt().max(1.0);
    let mut h = (0.25 / kappa0).min(len);
    let h_min = 1e-13 * len.max(1.0);
    let mut s = 0.0;
    let mut prev_ratio = 1.0_f64;
    let mut steps = 0usize;
    let mut k = [[Complex64::new(0.0, 0.0); N]; STAGES];
    // powers of two moved out of the state, folded into the offset once
    let mut exp2 = 0i64;

    while s < len {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(CoreError::TooManySteps {
                z: point(s),
                max_steps: MAX_STEPS,
            });
        }
        if h < h_min && len - s > h_min {
            return Err(CoreError::StepUnderflow { z: point(s), h });
        }
        let last = s + h >= len * (1.0 - 1e-15);
        if last {
            h = len - s;
        } else {
            // step by exactly what `s` will advance, so rounding in `s`
            // does not drift away from the integrated length
            h = (s + h) - s;
        }
        for i in 0..STAGES {
            let mut tmp = *state;
            for (j, kj) in k.iter().enumerate().take(i) {
                let aij = A[i][j];
                if aij != 0.0 {
                    for n in 0..N {
                        tmp[n] += kj[n] * (h * aij);
                    }
                }
            }
            let z = point(s + C[i] * h);
            k[i] = rhs(potential.eval(z), dir, &tmp);
        }
        let mut next = *state;
        let mut delta = [Complex64::new(0.0, 0.0); N];
        for i in 0..STAGES {
            for n in 0..N {
                if B[i] != 0.0 {
                    next[n] += k[i][n] * (h * B[i]);
                }
                if B_ERR[i] != 0.0 {
                    delta[n] += k[i][n] * (h * B_ERR[i]);
                }
            }
        }

        let kappa = potential.eval(point(s)).norm().sqrt().max(1.0);
        let base_size = pair_norm(next[0], next[1], kappa).max(pair_norm(state[0], state[1], kappa));
        let mut err = if base_size > 0.0 {
            pair_norm(delta[0], delta[1], kappa) / base_size
        } else {
            0.0
        };
        let mut n = base_len;
        while n + 1 < N {
            let size = pair_norm(next[n], next[n + 1], kappa).max(1e-3 * base_size);
            if size > 0.0 {
                err = err.max(pair_norm(delta[n], delta[n + 1], kappa) / size);
            }
            n += 2;
        }
        if !err.is_finite() || next.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite { z: point(s) });
        }

        let tol = (rel_tol * h).max(ERR_FLOOR);
        let ratio = err / tol;
        if ratio <= 1.0 {
            s = if last { len } else { s + h };
            *state = next;
            *err_acc += err;
            renormalize(state, &mut exp2, base_len);
            let fac = 0.9 * ratio.max(1e-10).powf(-0.7 / 8.0) * prev_ratio.max(1e-4).powf(0.4 / 8.0);
            h *= fac.clamp(0.2, 5.0);
            prev_ratio = ratio;
        } else {
            let fac = 0.9 * ratio.powf(-1.0 / 8.0);
            h *= fac.clamp(0.1, 0.9);
        }
    }
    if exp2 != 0 {
        *log_offset = wrap_log(*log_offset + exp2 as f64 * std::f64::consts::LN_2);
    }
    Ok(())
}

/// Rescales the whole state by an exact power of two when the base pair
/// leaves `[1/2, 2]`, adding the exponent to `exp2`. Only the magnitude
/// moves, so real solutions keep real mantissas.
fn renormalize<const N: usize>(state: &mut [Complex64; N], exp2: &mut i64, base_len: usize) {
    let big = state.iter().take(base_len).map(|v| v.norm()).fold(0.0, f64::max);
    if big == 0.0 || (0.5..=2.0).contains(&big) {
        return;
    }
    let k = big.log2().round() as i32;
    let scale = 2f64.powi(-k);
    for v in state.iter_mut() {
        *v *= scale;
    }
    *exp2 += k as i64;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_particle_is_linear() {
        let q = PolynomialPotential::constant(c(0.0, 0.0));
        let path = Path::segment(c(0.0, 0.0), c(5.0, 0.0)).unwrap();
        let f = integrate_path(&q, &path, &SolutionFrame::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)), 1e-12)
            .unwrap();
        assert!((f.value() - c(5.0, 0.0)).norm() < 1e-12);
        assert!((f.derivative() - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(f.z, c(5.0, 0.0));
    }

    #[test]
    fn exponential_solution() {
        let q = PolynomialPotential::constant(c(1.0, 0.0));
        let path = Path::segment(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let f = integrate_path(&q, &path, &SolutionFrame::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)), 1e-12)
            .unwrap();
        let e = std::f64::consts::E;
        assert!((f.value() - e).norm() < 1e-11 * e);
        assert!((f.derivative() - e).norm() < 1e-11 * e);
    }

    #[test]
    fn huge_growth_stays_finite() {
        // y = e^{10 z} over |z| = 200: 2000 e-folds
        let q = PolynomialPotential::constant(c(100.0, 0.0));
        let path = Path::segment(c(0.0, 0.0), c(200.0, 0.0)).unwrap();
        let f = integrate_path(&q, &path, &SolutionFrame::new(c(0.0, 0.0), c(1.0, 0.0), c(10.0, 0.0)), 1e-12)
            .unwrap();
        let lv = f.log_value();
        assert!((lv.re - 2000.0).abs() < 1e-8 * 2000.0, "{lv}");
        assert!(f.mantissa_scale() >= 0.5 && f.mantissa_scale() <= 2.0);
    }

    #[test]
    fn rejects_mismatched_start_and_bad_tol() {
        let q = PolynomialPotential::constant(c(1.0, 0.0));
        let path = Path::segment(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let f0 = SolutionFrame::new(c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert!(matches!(integrate_path(&q, &path, &f0, 1e-12), Err(CoreError::InvalidInput(_))));
        let f0 = SolutionFrame::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert!(integrate_path(&q, &path, &f0, 0.0).is_err());
        assert!(integrate_path(&q, &path, &f0, -1.0).is_err());
    }

    #[test]
    fn underflow_is_reported_with_position() {
        // wavenumber 1e16 needs steps far below the segment's resolvable length
        let q = PolynomialPotential::constant(c(1e32, 0.0));
        let path = Path::segment(c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        let f0 = SolutionFrame::new(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        match integrate_path(&q, &path, &f0, 1e-12) {
            Err(CoreError::StepUnderflow { z, .. }) => assert_eq!(z, c(2.0, 0.0)),
            other => panic!("expected underflow, got {other:?}"),
        }
        // roundoff-level tolerances are absorbed by the error floor
        let q = PolynomialPotential::constant(c(1.0, 0.0));
        let path = Path::segment(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let f0 = SolutionFrame::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert!(integrate_path(&q, &path, &f0, 1e-300).is_ok());
    }

    #[test]
    fn path_validation() {
        assert!(Path::new(vec![]).is_err());
        assert!(Path::segment(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(Path::new(vec![(c(0.0, 0.0), c(1.0, 0.0)), (c(2.0, 0.0), c(3.0, 0.0))]).is_err());
        let p = Path::polyline(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)]).unwrap();
        assert!((p.length() - 2.0).abs() < 1e-15);
        assert_eq!(p.reversed().start(), c(1.0, 1.0));
    }

    #[test]
    fn renormalization_preserves_value() {
        let f = SolutionFrame::with_log_offset(c(0.0, 0.0), c(3e5, -2e5), c(1.0, 7.0), c(2.0, 1.0));
        let expected = c(3e5, -2e5) * c(2.0, 1.0).exp();
        assert!((f.value() - expected).norm() < 1e-14 * expected.norm());
        assert!((f.mantissa_scale() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn potential_eval() {
        let q = PolynomialPotential::new(vec![c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(q.degree(), 2);
        let z = c(0.5, -1.0);
        let direct = c(1.0, 0.0) + c(0.0, 2.0) * z + c(3.0, 0.0) * z * z;
        assert!((q.eval(z) - direct).norm() < 1e-15);
        let d = c(0.0, 2.0) + c(6.0, 0.0) * z;
        assert!((q.eval_derivative(z) - d).norm() < 1e-15);
        let s = PolynomialPotential::monomial_plus_energy(3, c(2.0, 1.0));
        assert_eq!(s.degree(), 3);
        assert!((s.eval(z) - (z * z * z + c(2.0, 1.0))).norm() < 1e-15);
    }
}
