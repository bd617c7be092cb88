//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! with status 1 if any failed.

mod common;

use common::{brute_admissible, for_each_grid_system, quartic_eigenvalue};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::Instant;
use stokes_core::error::Result;
use stokes_core::raysystem::{admissibility_check, three_ray_check, Label, LabeledRaySystem, ThreeRayVerdict};
use stokes_core::rootfinder::{
    eigenvalues_nk, find_roots, order_estimate, verify_radial, verify_rays, winding_count, BoundaryProblem, Region,
    RootOptions, RootSearch, SpectralHandle,
};
use stokes_core::sibuya::ProblemSpec;
use stokes_core::spectral::{SpectralEvaluator, SpectralFunctionId};

const REL_TOL: f64 = 1e-12;
const SEARCH_RADIUS: f64 = 30.0;
const ANGLE_TOL: f64 = 1e-6;
const PAIRING_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-9;
const W01_TOL: f64 = 1e-8;
const QUARTIC_TOL: f64 = 1e-6;
const CONNECTION_TOL: f64 = 1e-8;
const ORDER_TOL: f64 = 0.1;
const POLY_TOL: f64 = 1e-10;

type Outcome = Result<(bool, String)>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn random_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

fn certified(s: &RootSearch) -> bool {
    s.complete && s.roots.len() as i64 == s.total_winding && s.roots.iter().all(|r| r.winding_certificate == 1)
}

/// Zeros of f on the positive axis, 1-points on the rays at +-2pi/(m+2),
/// and 1-points equal to w^{+-1} c_j for the zeros c_j of C.
fn zeros_and_one_points(m: u32) -> Outcome {
    let ev = SpectralEvaluator::new(m, REL_TOL)?;
    let region = Region::disk(c(0.0, 0.0), SEARCH_RADIUS)?;
    let opts = RootOptions::default();
    let search = |id| find_roots(&SpectralHandle::new(ev.clone(), id), region, 10_000, &opts);
    let zeros_c = search(SpectralFunctionId::C)?;
    let mut zeros_f = search(SpectralFunctionId::F)?;
    let mut ones = search(SpectralFunctionId::FMinus1)?;
    let ray = TAU / (m + 2) as f64;
    let on_axis = verify_radial(&mut zeros_f.roots, 0.0, ANGLE_TOL);
    let on_rays = verify_rays(&mut ones.roots, &[ray, -ray], ANGLE_TOL);

    let w = ev.omega();
    let images: Vec<Complex64> = zeros_c.roots.iter().flat_map(|r| [w * r.location, r.location / w]).collect();
    let found: Vec<Complex64> = ones.roots.iter().map(|r| r.location).collect();
    let nearest = |z: Complex64, set: &[Complex64]| set.iter().map(|&p| rel(z, p)).fold(f64::INFINITY, f64::min);
    // only images inside the disk are expected among the 1-points
    let mismatch = found
        .iter()
        .map(|&z| nearest(z, &images))
        .chain(images.iter().filter(|z| z.norm() < SEARCH_RADIUS).map(|&z| nearest(z, &found)))
        .fold(0.0, f64::max);

    let all_certified = certified(&zeros_c) && certified(&zeros_f) && certified(&ones);
    let pass = all_certified
        && !zeros_f.roots.is_empty()
        && !ones.roots.is_empty()
        && on_axis.pass
        && on_rays.pass
        && mismatch < PAIRING_TOL;
    Ok((
        pass,
        format!(
            "m={m}: {} zeros of C, {} zeros of f (max |arg| {:.1e}), {} 1-points (max ray deviation {:.1e}), pairing mismatch {:.1e}, certified {all_certified}",
            zeros_c.roots.len(),
            zeros_f.roots.len(),
            on_axis.max_deviation,
            ones.roots.len(),
            on_rays.max_deviation,
            mismatch
        ),
    ))
}

fn criterion_1() -> Outcome {
    zeros_and_one_points(3)
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for m in [4, 5] {
        let (p, d) = zeros_and_one_points(m)?;
        pass &= p;
        details.push(d);
    }
    Ok((pass, details.join("; ")))
}

fn criterion_3() -> Outcome {
    // y0(0, 0), y0'(0, 0) from the Bessel K representation
    let bessel = [
        (3, 1.598183234678470396, -1.064522252385131097),
        (4, 1.728260369359926745, -1.157233039336957034),
        (5, 1.843814305937225776, -1.249998366723245385),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zero = c(0.0, 0.0);
    let (mut closed, mut y0_err, mut w01_err) = (0.0f64, 0.0f64, 0.0f64);
    for (m, y, dy) in bessel {
        let ev = SpectralEvaluator::new(m, REL_TOL)?;
        let w = ev.omega();
        let cos = (PI / (m + 2) as f64).cos();
        closed = closed
            .max(rel(ev.stokes_c(zero)?.value, 1.0 + w))
            .max(rel(ev.f(zero)?.value, c(1.0 - 4.0 * cos * cos, 0.0)));
        let frame = ev.solver().y0(&ProblemSpec::new(m, zero)?, zero)?;
        y0_err = y0_err
            .max(rel(frame.value(), c(y, 0.0)))
            .max(rel(frame.derivative(), c(dy, 0.0)));
        let expected = c(0.0, 2.0) / ev.epsilon();
        for _ in 0..100 {
            let e = random_disk(&mut rng, 50.0);
            w01_err = w01_err.max(rel(ev.wronskian(e, 0, 1)?.value, expected));
        }
    }
    Ok((
        closed < ORACLE_TOL && y0_err < ORACLE_TOL && w01_err < W01_TOL,
        format!("C(0), f(0) {closed:.1e}; y0(0,0) {y0_err:.1e}; W01 over 100 E per m {w01_err:.1e}"),
    ))
}

fn criterion_4() -> Outcome {
    let shooting = [
        quartic_eigenvalue(0.5, 2.0, false),
        quartic_eigenvalue(3.0, 5.0, true),
        quartic_eigenvalue(6.0, 9.0, false),
    ];
    let ev = SpectralEvaluator::new(4, REL_TOL)?;
    let problem = BoundaryProblem::new(4, 0, 3)?;
    let mut s = eigenvalues_nk(&ev, &problem, Region::rect(-10.0, 0.0, -1.0, 1.0)?, 100, &RootOptions::default())?;
    let count_ok = s.complete && s.roots.len() == shooting.len();
    let err = s
        .roots
        .iter()
        .zip(shooting)
        .map(|(r, lam)| (r.location + lam).norm() / lam)
        .fold(0.0, f64::max);
    let ray = problem.predicted_ray();
    let radial = verify_radial(&mut s.roots, ray, ANGLE_TOL);
    Ok((
        count_ok && err < QUARTIC_TOL && (ray - PI).abs() < 1e-15 && radial.pass,
        format!(
            "{} zeros of W03 in [-10, 0], max relative error {err:.1e}, predicted ray {ray:.15}, max deviation {:.1e}",
            s.roots.len(),
            radial.max_deviation
        ),
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for m in 3..=5u32 {
        let ev = SpectralEvaluator::new(m, REL_TOL)?;
        let half = PI / (m + 2) as f64;
        for _ in 0..20 {
            let e = random_disk(&mut rng, 30.0);
            let z = Complex64::from_polar(rng.gen_range(0.0..1.5), rng.gen_range(-half..half));
            worst = worst.max(ev.connection_residual(e, z)?);
        }
    }
    Ok((worst < CONNECTION_TOL, format!("60 pairs, max scaled residual {worst:.1e}")))
}

fn criterion_6() -> Outcome {
    let radii = [10.0, 20.0, 30.0, 40.0, 50.0];
    let mut pass = true;
    let mut details = Vec::new();
    for m in [3u32, 4] {
        let ev = SpectralEvaluator::new(m, REL_TOL)?;
        let o = order_estimate(&SpectralHandle::new(ev, SpectralFunctionId::C), &radii)?;
        let target = 0.5 + 1.0 / m as f64;
        pass &= (o.order - target).abs() <= ORDER_TOL;
        details.push(format!("m={m}: {:.4} vs {target:.4}", o.order));
    }
    Ok((pass, details.join(", ")))
}

fn criterion_7() -> Outcome {
    let tol = 1e-9;
    let mut pass = true;
    for m in 3..=8u32 {
        let a = TAU / (m + 2) as f64;
        let r = admissibility_check(&LabeledRaySystem::from_sets(&[0.0], &[a, -a])?, tol, false);
        pass &= r.admissible && (r.rho - (0.5 + 1.0 / m as f64)).abs() < 1e-12;
    }
    let gamma = admissibility_check(&LabeledRaySystem::from_sets(&[0.0], &[FRAC_PI_2, 3.0 * FRAC_PI_2])?, tol, false);
    pass &= gamma.admissible && (gamma.rho - 1.0).abs() < 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let alpha = rng.gen_range(FRAC_PI_2..PI);
        let r = three_ray_check(alpha, tol)?;
        pass &= r.verdict == ThreeRayVerdict::Inadmissible && !r.admissibility.admissible;
    }
    for _ in 0..10 {
        let (x, y) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        if let Ok(s) = LabeledRaySystem::from_sets(&[x], &[y]) {
            pass &= !admissibility_check(&s, tol, false).admissible;
        }
    }
    let examples_ok = pass;
    let (mut systems, mut admissible, mut disagreements) = (0usize, 0usize, 0usize);
    for_each_grid_system(6, |rays| {
        let s = LabeledRaySystem::new(
            rays.iter()
                .map(|&(k, b)| (k as f64 * PI / 12.0, if b { Label::B } else { Label::A })),
        )
        .expect("grid rays are distinct");
        let got = admissibility_check(&s, tol, false).admissible;
        let want = brute_admissible(rays);
        systems += 1;
        admissible += want as usize;
        disagreements += (got != want) as usize;
    });
    pass &= disagreements == 0;
    Ok((
        pass,
        format!(
            "examples {examples_ok}; {systems} grid systems with at most 6 rays, {admissible} admissible, {disagreements} disagreements with brute force"
        ),
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let square = Region::rect(-1.0, 1.0, -1.0, 1.0)?;
    let opts = RootOptions::default();
    let mut polys = 0;
    let mut missed = 0;
    let mut worst = 0.0f64;
    while polys < 100 {
        let n = rng.gen_range(1..=6);
        let roots: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.4..1.4), rng.gen_range(-1.4..1.4))).collect();
        let separated = roots.iter().enumerate().all(|(i, a)| {
            (a.re.abs() - 1.0).abs() > 1e-3
                && (a.im.abs() - 1.0).abs() > 1e-3
                && roots[..i].iter().all(|b| (a - b).norm() > 1e-2)
        });
        if !separated {
            continue;
        }
        polys += 1;
        let f = |z: Complex64| roots.iter().fold(c(1.0, 0.0), |p, r| p * (z - r));
        let s = find_roots(&f, square, 10, &opts)?;
        let inside: Vec<Complex64> = roots.iter().copied().filter(|r| r.re.abs() < 1.0 && r.im.abs() < 1.0).collect();
        if !s.complete || s.roots.len() != inside.len() {
            missed += 1;
            continue;
        }
        for r in &inside {
            match s.roots.iter().find(|x| x.winding_certificate == 1 && (x.location - r).norm() < POLY_TOL) {
                Some(x) => worst = worst.max((x.location - r).norm()),
                None => missed += 1,
            }
        }
    }
    let mut broken = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let roots: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
        let f = |z: Complex64| roots.iter().fold(c(1.0, 0.0), |p, r| p * (z - r));
        let whole = winding_count(&f, square, POLY_TOL)?;
        let mut xs: Vec<f64> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(-0.95..0.95)).collect();
        let mut ys: Vec<f64> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(-0.95..0.95)).collect();
        xs.extend([-1.0, 1.0]);
        ys.extend([-1.0, 1.0]);
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let mut sum = 0;
        for x in xs.windows(2) {
            for y in ys.windows(2) {
                sum += winding_count(&f, Region::rect(x[0], x[1], y[0], y[1])?, POLY_TOL)?;
            }
        }
        let inside = roots.iter().filter(|r| r.re.abs() < 1.0 && r.im.abs() < 1.0).count() as i64;
        if whole != inside || sum != whole {
            broken += 1;
        }
    }
    Ok((
        missed == 0 && broken == 0,
        format!("100 polynomials, {missed} misses, max root error {worst:.1e}; 100 partitions, {broken} non-additive"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 zeros and 1-points, m=3", criterion_1),
        ("2 zeros and 1-points, m=4,5", criterion_2),
        ("3 derived oracles", criterion_3),
        ("4 quartic oscillator", criterion_4),
        ("5 connection identity", criterion_5),
        ("6 order of C", criterion_6),
        ("7 ray systems", criterion_7),
        ("8 root finder soundness", criterion_8),
    ];
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += !pass as usize;
        println!(
            "{} criterion {name}: {detail} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
