//! Verification suites behind `stokes verify`.

use crate::args::GlobalArgs;
use crate::document::{Check, Cx};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::f64::consts::PI;
use stokes_core::error::Result;
use stokes_core::ode::{integrate_path, Path, PolynomialPotential, SolutionFrame};
use stokes_core::rootfinder::{
    eigenvalues_nk, find_roots, order_estimate, verify_radial, verify_rays, BoundaryProblem, Region, RootOptions,
    RootSearch, SpectralHandle,
};
use stokes_core::spectral::{SpectralEvaluator, SpectralFunctionId};

/// Radii for the growth-order estimate of `C`.
pub const ORDER_RADII: [f64; 5] = [10.0, 20.0, 30.0, 40.0, 50.0];
pub const ORDER_TOL: f64 = 0.1;
pub const PAIRING_TOL: f64 = 1e-8;
pub const CONNECTION_TOL: f64 = 1e-8;
pub const W01_TOL: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-9;
pub const QUARTIC_TOL: f64 = 1e-6;

/// Lowest eigenvalues of `-u'' + x^4 u = lambda u` on the real line.
pub const QUARTIC_EIGENVALUES: [f64; 3] = [1.0603620904841829, 3.7996730298013941, 7.4556979379867383];

/// `(z, Ai(z), Ai'(z))`.
const AIRY_VALUES: [(f64, f64, f64, f64, f64, f64); 4] = [
    (1.0, 0.0, 0.135292416312881416, 0.0, -0.159147441296793213, 0.0),
    (-2.0, 0.0, 0.227407428201685576, 0.0, 0.618259020741691041, 0.0),
    (2.0, 0.0, 0.0349241304232743791, 0.0, -0.0530903844336536317, 0.0),
    (
        1.0,
        1.0,
        0.0604583083718381492,
        -0.151889565877181402,
        -0.130627953499647518,
        0.163067596449323916,
    ),
];
const AI0: f64 = 0.355028053887817239;
const AI0_PRIME: f64 = -0.258819403792806798;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    Check::new(name, false, json!({ "error": e.to_string() }))
}

fn options(g: &GlobalArgs) -> RootOptions {
    RootOptions {
        residual_floor: g.root_floor,
        ..RootOptions::default()
    }
}

fn roots_json(s: &RootSearch) -> Value {
    json!(s.roots.iter().map(|r| Cx::from(r.location)).collect::<Vec<_>>())
}

fn certified(name: &str, s: &RootSearch, floor: f64) -> Check {
    let ok = s.complete
        && s.roots.len() as i64 == s.total_winding
        && s.roots.iter().all(|r| r.winding_certificate == 1 && r.residual <= floor);
    Check::new(
        name,
        ok,
        json!({
            "count": s.roots.len(),
            "total_winding": s.total_winding,
            "complete": s.complete,
            "max_residual": s.roots.iter().map(|r| r.residual).fold(0.0, f64::max),
            "evaluations": s.evaluations,
            "roots": roots_json(s),
        }),
    )
}

/// Zeros of `f` on the positive ray, 1-points on `arg E = +-2pi/(m+2)`
/// paired with the zeros `c_j` of `C`, and the order of `C`.
pub fn thm2(g: &GlobalArgs, radius: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    let ev = match SpectralEvaluator::new(g.m, g.rel_tol) {
        Ok(ev) => ev,
        Err(e) => return vec![failed("evaluator self-test", e)],
    };
    let region = match Region::disk(Complex64::new(0.0, 0.0), radius) {
        Ok(r) => r,
        Err(e) => return vec![failed("region", e)],
    };
    let opts = options(g);
    let search = |id| find_roots(&SpectralHandle::new(ev.clone(), id), region, 10_000, &opts);
    let ray = 2.0 * PI / (g.m as f64 + 2.0);

    let c = search(SpectralFunctionId::C);
    match &c {
        Ok(s) => {
            checks.push(certified("zeros of C certified", s, g.root_floor));
            let mut roots = s.roots.clone();
            let rep = verify_radial(&mut roots, 0.0, g.angular_tol);
            checks.push(Check::new("zeros of C positive", rep.pass, json!(rep)));
        }
        Err(e) => checks.push(failed("zeros of C certified", e)),
    }
    match search(SpectralFunctionId::F) {
        Ok(s) => {
            checks.push(certified("zeros of f certified", &s, g.root_floor));
            let mut roots = s.roots.clone();
            let rep = verify_radial(&mut roots, 0.0, g.angular_tol);
            checks.push(Check::new("zeros of f positive", rep.pass, json!(rep)));
        }
        Err(e) => checks.push(failed("zeros of f certified", e)),
    }
    match search(SpectralFunctionId::FMinus1) {
        Ok(s) => {
            checks.push(certified("1-points of f certified", &s, g.root_floor));
            let mut roots = s.roots.clone();
            let rep = verify_rays(&mut roots, &[ray, -ray], g.angular_tol);
            checks.push(Check::new("1-points of f on arg E = +-2pi/(m+2)", rep.pass, json!(rep)));
            match &c {
                Ok(cs) => checks.push(pairing(&ev, &s, cs)),
                Err(e) => checks.push(failed("1-points paired with w^{+-1} c_j", e)),
            }
        }
        Err(e) => checks.push(failed("1-points of f certified", e)),
    }
    let target = 0.5 + 1.0 / g.m as f64;
    match order_estimate(&SpectralHandle::new(ev.clone(), SpectralFunctionId::C), &ORDER_RADII) {
        Ok(o) => checks.push(Check::new(
            "order of C",
            (o.order - target).abs() <= ORDER_TOL,
            json!({ "estimate": o.order, "expected": target, "tolerance": ORDER_TOL, "radii": o.radii, "log_max": o.log_max }),
        )),
        Err(e) => checks.push(failed("order of C", e)),
    }
    checks
}

/// Every 1-point equals `w c_j` or `w^-1 c_j` and every such product is a
/// located 1-point.
fn pairing(ev: &SpectralEvaluator, ones: &RootSearch, c: &RootSearch) -> Check {
    let w = ev.omega();
    let images: Vec<Complex64> = c.roots.iter().flat_map(|r| [w * r.location, r.location / w]).collect();
    let nearest = |z: Complex64, set: &[Complex64]| set.iter().map(|&p| rel(z, p)).fold(f64::INFINITY, f64::min);
    let ones_loc: Vec<Complex64> = ones.roots.iter().map(|r| r.location).collect();
    let forward = ones_loc.iter().map(|&z| nearest(z, &images)).fold(0.0, f64::max);
    let backward = images.iter().map(|&z| nearest(z, &ones_loc)).fold(0.0, f64::max);
    let worst = forward.max(backward);
    Check::new(
        "1-points paired with w^{+-1} c_j",
        ones_loc.len() == images.len() && worst <= PAIRING_TOL,
        json!({ "ones": ones_loc.len(), "images": images.len(), "max_relative_mismatch": worst, "tolerance": PAIRING_TOL }),
    )
}

fn random_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(-PI..PI))
}

fn try_check(name: &str, f: impl FnOnce() -> Result<(bool, Value)>) -> Check {
    match f() {
        Ok((pass, detail)) => Check::new(name, pass, detail),
        Err(e) => failed(name, e),
    }
}

/// Connection residuals, constancy of `W_{0,1}`, branch independence of
/// `f` and conjugation symmetry.
pub fn consistency(g: &GlobalArgs) -> Vec<Check> {
    let ev = match SpectralEvaluator::new(g.m, g.rel_tol) {
        Ok(ev) => ev,
        Err(e) => return vec![failed("evaluator self-test", e)],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let half = PI / (g.m as f64 + 2.0);
    let pairs: Vec<(Complex64, Complex64)> = (0..20)
        .map(|_| {
            let e = random_disk(&mut rng, 20.0);
            let z = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(-half..half));
            (e, z)
        })
        .collect();
    let energies: Vec<Complex64> = (0..100).map(|_| random_disk(&mut rng, 50.0)).collect();
    let sym: Vec<Complex64> = (0..10).map(|_| random_disk(&mut rng, 20.0)).collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut checks = Vec::new();

    checks.push(try_check("connection identity residual", || {
        let mut worst: f64 = 0.0;
        for &(e, z) in &pairs {
            worst = worst.max(ev.connection_residual(e, z)?);
        }
        Ok((
            worst < CONNECTION_TOL,
            json!({ "pairs": pairs.len(), "max_residual": worst, "tolerance": CONNECTION_TOL }),
        ))
    }));
    checks.push(try_check("W01 independent of E", || {
        let w0 = ev.wronskian(zero, 0, 1)?.value;
        let mut worst: f64 = 0.0;
        for &e in &energies {
            worst = worst.max(rel(ev.wronskian(e, 0, 1)?.value, w0));
        }
        Ok((
            worst < W01_TOL,
            json!({ "samples": energies.len(), "max_relative_deviation": worst, "tolerance": W01_TOL, "w01_at_0": Cx::from(w0) }),
        ))
    }));
    checks.push(try_check("f independent of the branch of sqrt(w)", || {
        let eps = ev.epsilon();
        let mut identical = true;
        for &e in &sym {
            identical &= ev.f_via_h(e, eps)? == ev.f_via_h(e, -eps)?;
        }
        Ok((identical, json!({ "samples": sym.len(), "bitwise_identical": identical })))
    }));
    checks.push(try_check("C(conj E)/C(0) = conj(C(E)/C(0))", || {
        let c0 = ev.stokes_c(zero)?.value;
        let mut worst: f64 = 0.0;
        for &e in &sym {
            let a = ev.stokes_c(e.conj())?.value / c0;
            let b = (ev.stokes_c(e)?.value / c0).conj();
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
        Ok((worst < ORACLE_TOL, json!({ "samples": sym.len(), "max_deviation": worst, "tolerance": ORACLE_TOL })))
    }));
    checks.push(try_check("C(E)/C(0) real for real E", || {
        let c0 = ev.stokes_c(zero)?.value;
        let mut worst: f64 = 0.0;
        for j in 0..=20 {
            let q = ev.stokes_c(Complex64::new(-10.0 + j as f64, 0.0))?.value / c0;
            worst = worst.max(q.im.abs() / q.norm().max(1.0));
        }
        Ok((worst < ORACLE_TOL, json!({ "samples": 21, "max_imaginary_part": worst, "tolerance": ORACLE_TOL })))
    }));
    checks.push(try_check("f(conj E) = conj f(E)", || {
        let mut worst: f64 = 0.0;
        for &e in &sym {
            let a = ev.f(e.conj())?.value;
            let b = ev.f(e)?.value.conj();
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
        Ok((worst < ORACLE_TOL, json!({ "samples": sym.len(), "max_deviation": worst, "tolerance": ORACLE_TOL })))
    }));
    checks.push(try_check("g matches C(E) C(w^2 E) - w", || {
        let mut worst: f64 = 0.0;
        for &e in &sym {
            let a = ev.g(e)?.value;
            let b = ev.g_via_c(e)?.value;
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
        Ok((worst < ORACLE_TOL, json!({ "samples": sym.len(), "max_deviation": worst, "tolerance": ORACLE_TOL })))
    }));
    checks
}

/// `y0(0, 0)` and `y0'(0, 0)` from the Bessel function representation.
pub fn bessel_y0_at_origin(m: u32) -> (f64, f64) {
    let q = m as f64 + 2.0;
    let nu = 1.0 / q;
    let c = 2.0 / (PI * q).sqrt();
    let half_a = 1.0 / q;
    (
        0.5 * c * libm::tgamma(nu) * half_a.powf(-nu),
        0.5 * c * libm::tgamma(-nu) * half_a.powf(nu),
    )
}

/// Closed forms at `E = 0`, Airy functions through the integrator and the
/// quartic oscillator through `W_{0,3}` at `m = 4`.
pub fn oracles(g: &GlobalArgs) -> Vec<Check> {
    let ev = match SpectralEvaluator::new(g.m, g.rel_tol) {
        Ok(ev) => ev,
        Err(e) => return vec![failed("evaluator self-test", e)],
    };
    let zero = Complex64::new(0.0, 0.0);
    let w = ev.omega();
    let cosv = (PI / (g.m as f64 + 2.0)).cos();
    let closed: [(&str, SpectralFunctionId, Complex64); 5] = [
        ("C(0) = 1 + w", SpectralFunctionId::C, 1.0 + w),
        ("f(0) = 1 - 4 cos^2(pi/(m+2))", SpectralFunctionId::F, Complex64::new(1.0 - 4.0 * cosv * cosv, 0.0)),
        ("g(0) = 1 + w + w^2", SpectralFunctionId::G, 1.0 + w + w * w),
        ("h(0) = 2 cos(pi/(m+2))", SpectralFunctionId::H, Complex64::new(2.0 * cosv, 0.0)),
        (
            "W01 = 2i w^{-1/2}",
            SpectralFunctionId::W(0, 1),
            Complex64::new(0.0, 2.0) / ev.epsilon(),
        ),
    ];
    let mut checks: Vec<Check> = closed
        .iter()
        .map(|&(name, id, expected)| {
            try_check(name, || {
                let v = ev.eval(id, zero)?.value;
                let r = rel(v, expected);
                Ok((
                    r < ORACLE_TOL,
                    json!({ "value": Cx::from(v), "expected": Cx::from(expected), "relative_error": r, "tolerance": ORACLE_TOL }),
                ))
            })
        })
        .collect();
    checks.push(try_check("y0(0, 0) Bessel closed form", || {
        let spec = ev.spec(zero);
        let frame = ev.solver().y0(&spec, zero)?;
        let (y, dy) = bessel_y0_at_origin(g.m);
        let ry = rel(frame.value(), Complex64::new(y, 0.0));
        let rd = rel(frame.derivative(), Complex64::new(dy, 0.0));
        Ok((
            ry < ORACLE_TOL && rd < ORACLE_TOL,
            json!({ "y0": Cx::from(frame.value()), "y0_prime": Cx::from(frame.derivative()), "expected": [y, dy], "relative_errors": [ry, rd], "tolerance": ORACLE_TOL }),
        ))
    }));
    checks.push(try_check("Airy function by integration", || {
        let pot = PolynomialPotential::new(vec![zero, Complex64::new(1.0, 0.0)]);
        let start = SolutionFrame::new(zero, Complex64::new(AI0, 0.0), Complex64::new(AI0_PRIME, 0.0));
        let mut worst: f64 = 0.0;
        for &(x, yv, a, b, c, d) in &AIRY_VALUES {
            let z = Complex64::new(x, yv);
            let fr = integrate_path(&pot, &Path::segment(zero, z)?, &start, g.rel_tol)?;
            worst = worst
                .max(rel(fr.value(), Complex64::new(a, b)))
                .max(rel(fr.derivative(), Complex64::new(c, d)));
        }
        Ok((
            worst < ORACLE_TOL,
            json!({ "points": AIRY_VALUES.len(), "max_relative_error": worst, "tolerance": ORACLE_TOL }),
        ))
    }));
    checks.push(try_check("quartic oscillator eigenvalues from W_{0,3} (m = 4)", || {
        let ev4 = SpectralEvaluator::new(4, g.rel_tol)?;
        let problem = BoundaryProblem::new(4, 0, 3)?;
        let region = Region::rect(-10.0, 0.0, -1.0, 1.0)?;
        let s = eigenvalues_nk(&ev4, &problem, region, 100, &options(g))?;
        let mut found: Vec<f64> = s.roots.iter().map(|r| -r.location.re).collect();
        found.sort_by(f64::total_cmp);
        let errs: Vec<f64> = found
            .iter()
            .zip(QUARTIC_EIGENVALUES)
            .map(|(a, b)| (a - b).abs() / b)
            .collect();
        let imag = s.roots.iter().map(|r| r.location.im.abs()).fold(0.0, f64::max);
        let ray_ok = (problem.predicted_ray() - PI).abs() < 1e-15;
        Ok((
            s.complete
                && found.len() == QUARTIC_EIGENVALUES.len()
                && errs.iter().all(|&e| e < QUARTIC_TOL)
                && imag < QUARTIC_TOL
                && ray_ok,
            json!({
                "eigenvalues": found,
                "expected": QUARTIC_EIGENVALUES,
                "relative_errors": errs,
                "max_imaginary_part": imag,
                "predicted_ray": problem.predicted_ray(),
                "tolerance": QUARTIC_TOL,
            }),
        ))
    }));
    checks
}
