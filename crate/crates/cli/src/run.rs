//! Command dispatch.

use crate::args::{Cli, Command, EvalArgs, Format, GlobalArgs, RaysCommand, RootsArgs, Suite, VerifyArgs};
use crate::document::{Check, CliError, Cx, ResultDocument, Status, Timing, SCHEMA_VERSION};
use crate::{parse, suites};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::time::Instant;
use stokes_core::raysystem::{
    admissibility_check, classify_two_lines, three_ray_check, LabeledRaySystem, Line, LineGeometry, DEFAULT_ANGLE_TOL,
};
use stokes_core::rootfinder::{
    eigenvalues_nk, find_roots, verify_rays, BoundaryProblem, Region, RootOptions, SpectralHandle,
};
use stokes_core::spectral::{SpectralEvaluator, SpectralFunctionId};

pub struct Outcome {
    pub status: Status,
    pub payload: Value,
    /// Replaces the JSON document on standard output.
    pub csv: Option<String>,
}

impl Outcome {
    fn json(status: Status, payload: Value) -> Self {
        Self {
            status,
            payload,
            csv: None,
        }
    }
}

fn function_id(name: &str, n: Option<i64>, k: Option<i64>) -> Result<SpectralFunctionId, CliError> {
    if name.eq_ignore_ascii_case("w") {
        return match (n, k) {
            (Some(n), Some(k)) => Ok(SpectralFunctionId::W(n, k)),
            _ => Err(CliError::usage("--fn W needs --n and --k")),
        };
    }
    if n.is_some() || k.is_some() {
        return Err(CliError::usage("--n and --k only apply to --fn W"));
    }
    name.parse().map_err(|e: stokes_core::error::CoreError| CliError::usage(e.to_string()))
}

fn count(s: &str, min: usize) -> Result<usize, CliError> {
    match s.parse::<usize>() {
        Ok(n) if n >= min => Ok(n),
        _ => Err(CliError::usage(format!("'{s}' is not a count of at least {min}"))),
    }
}

fn complex(s: &str) -> Result<Complex64, CliError> {
    parse::complex(s).map_err(CliError::usage)
}

fn angle(s: &str) -> Result<f64, CliError> {
    parse::angle(s).map_err(CliError::usage)
}

fn region_json(r: &Region) -> Value {
    match *r {
        Region::Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        } => json!({ "kind": "rect", "re_min": re_min, "re_max": re_max, "im_min": im_min, "im_max": im_max }),
        Region::Disk { center, radius } => json!({ "kind": "disk", "center": Cx::from(center), "radius": radius }),
    }
}

fn eval(g: &GlobalArgs, a: &EvalArgs) -> Result<Outcome, CliError> {
    let id = function_id(&a.function, a.n, a.k)?;
    let (energies, grid): (Vec<Complex64>, bool) = if let Some(c) = &a.circle {
        let r: f64 = c[0]
            .parse()
            .ok()
            .filter(|r: &f64| *r > 0.0 && r.is_finite())
            .ok_or_else(|| CliError::usage(format!("'{}' is not a positive radius", c[0])))?;
        let n = count(&c[1], 1)?;
        (
            (0..n)
                .map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64))
                .collect(),
            true,
        )
    } else if let Some(s) = &a.segment {
        let (p, q, n) = (complex(&s[0])?, complex(&s[1])?, count(&s[2], 2)?);
        ((0..n).map(|j| p + (q - p) * (j as f64 / (n - 1) as f64)).collect(), true)
    } else {
        if a.energies.is_empty() {
            return Err(CliError::usage("give energies with --E, or a grid with --circle or --segment"));
        }
        (a.energies.iter().map(|s| complex(s)).collect::<Result<_, _>>()?, false)
    };
    if g.format == Format::Csv && !grid {
        return Err(CliError::usage("CSV output is only available for --circle and --segment grids"));
    }
    let ev = SpectralEvaluator::new(g.m, g.rel_tol)?;
    let values = energies
        .par_iter()
        .map(|&e| ev.eval(id, e))
        .collect::<Result<Vec<_>, _>>()?;
    let csv = if g.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::numerical(e.to_string());
        w.write_record(["re_E", "im_E", "re_value", "im_value", "err"]).map_err(io)?;
        for v in &values {
            w.write_record(
                [v.energy.re, v.energy.im, v.value.re, v.value.im, v.err_estimate].map(|x| x.to_string()),
            )
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::numerical(e.to_string()))?;
        Some(String::from_utf8(bytes).map_err(|e| CliError::numerical(e.to_string()))?)
    } else {
        None
    };
    let payload = json!({
        "function": id.to_string(),
        "m": g.m,
        "values": values
            .iter()
            .map(|v| json!({ "E": Cx::from(v.energy), "value": Cx::from(v.value), "err_estimate": v.err_estimate }))
            .collect::<Vec<_>>(),
    });
    Ok(Outcome {
        status: Status::Ok,
        payload,
        csv,
    })
}

/// Rays on which the zeros of a spectral function are known to lie.
fn predicted_angles(m: u32, id: SpectralFunctionId) -> Option<Vec<f64>> {
    let ray = 2.0 * PI / (m as f64 + 2.0);
    match id {
        SpectralFunctionId::C | SpectralFunctionId::H | SpectralFunctionId::F => Some(vec![0.0]),
        SpectralFunctionId::FMinus1 => Some(vec![ray, -ray]),
        SpectralFunctionId::G => Some(vec![-ray]),
        SpectralFunctionId::W(n, k) => BoundaryProblem::new(m, n, k).ok().map(|p| vec![p.predicted_ray()]),
    }
}

fn roots(g: &GlobalArgs, a: &RootsArgs) -> Result<Outcome, CliError> {
    let region = match (&a.disk, &a.rect) {
        (Some(d), _) => {
            let radius: f64 = d[1]
                .parse()
                .map_err(|_| CliError::usage(format!("'{}' is not a radius", d[1])))?;
            Region::disk(complex(&d[0])?, radius)?
        }
        (None, Some(r)) => Region::rect(r[0], r[1], r[2], r[3])?,
        (None, None) => return Err(CliError::usage("give a region with --disk or --rect")),
    };
    let ev = SpectralEvaluator::new(g.m, g.rel_tol)?;
    let opts = RootOptions {
        residual_floor: g.root_floor,
        ..RootOptions::default()
    };
    let (target, mut search, angles) = match (&a.eig, &a.function) {
        (Some(nk), _) => {
            let problem = BoundaryProblem::new(g.m, nk[0], nk[1])?;
            let s = eigenvalues_nk(&ev, &problem, region, a.max_roots, &opts)?;
            (json!({ "eigenproblem": [nk[0], nk[1]] }), s, Some(vec![problem.predicted_ray()]))
        }
        (None, Some(name)) => {
            let id = function_id(name, a.n, a.k)?;
            let s = find_roots(&SpectralHandle::new(ev, id), region, a.max_roots, &opts)?;
            (json!({ "function": id.to_string() }), s, predicted_angles(g.m, id))
        }
        (None, None) => return Err(CliError::usage("give --fn or --eig")),
    };
    let radial = angles.map(|angles| verify_rays(&mut search.roots, &angles, g.angular_tol));
    let pass = search.complete && radial.as_ref().map_or(true, |r| r.pass);
    let payload = json!({
        "target": target,
        "m": g.m,
        "region": region_json(&region),
        "searched_region": region_json(&search.region),
        "total_winding": search.total_winding,
        "complete": search.complete,
        "evaluations": search.evaluations,
        "notes": search.notes,
        "roots": search.roots.iter().map(|r| json!({
            "location": Cx::from(r.location),
            "modulus": r.location.norm(),
            "argument": r.location.arg(),
            "winding_certificate": r.winding_certificate,
            "residual": r.residual,
            "angular_deviation": r.angular_deviation,
        })).collect::<Vec<_>>(),
        "radial": radial,
    });
    Ok(Outcome::json(if pass { Status::Ok } else { Status::CheckFailed }, payload))
}

fn verify(g: &GlobalArgs, a: &VerifyArgs) -> Result<Outcome, CliError> {
    let checks: Vec<Check> = match a.suite {
        Suite::Thm2 => suites::thm2(g, a.radius),
        Suite::Consistency => suites::consistency(g),
        Suite::Oracles => suites::oracles(g),
    };
    let failed = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        eprintln!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    let payload = json!({
        "suite": a.suite,
        "m": g.m,
        "passed": checks.len() - failed,
        "failed": failed,
        "checks": checks,
    });
    Ok(Outcome::json(if failed == 0 { Status::Ok } else { Status::CheckFailed }, payload))
}

/// `POINT@ANGLE`, e.g. `1+2i@pi/4`.
fn line(s: &str) -> Result<Line, CliError> {
    let (p, a) = s
        .split_once('@')
        .ok_or_else(|| CliError::usage(format!("line '{s}' is not of the form POINT@ANGLE")))?;
    Ok(Line {
        point: complex(p)?,
        angle: angle(a)?,
    })
}

fn rays(cmd: &RaysCommand) -> Result<Outcome, CliError> {
    match cmd {
        RaysCommand::Check {
            a,
            b,
            collect_all,
            angle_tol,
        } => {
            let za = a.iter().map(|s| angle(s)).collect::<Result<Vec<_>, _>>()?;
            let zb = b.iter().map(|s| angle(s)).collect::<Result<Vec<_>, _>>()?;
            let system = LabeledRaySystem::from_sets(&za, &zb)?;
            let report = admissibility_check(&system, *angle_tol, *collect_all);
            Ok(Outcome::json(
                Status::Ok,
                json!({ "rays": system.rays(), "report": report }),
            ))
        }
        RaysCommand::ClassifyLines {
            parallel,
            intersecting,
            identical,
            line1,
            line2,
            zeros_on,
        } => {
            let o = Complex64::new(0.0, 0.0);
            let (l1, l2) = if *parallel {
                (Line { point: o, angle: 0.0 }, Line { point: Complex64::new(0.0, 1.0), angle: 0.0 })
            } else if *intersecting {
                (Line { point: o, angle: 0.0 }, Line { point: o, angle: PI / 2.0 })
            } else if *identical {
                (Line { point: o, angle: 0.0 }, Line { point: o, angle: 0.0 })
            } else {
                match (line1, line2) {
                    (Some(a), Some(b)) => (line(a)?, line(b)?),
                    _ => {
                        return Err(CliError::usage(
                            "give --parallel, --intersecting, --identical or both --line1 and --line2",
                        ))
                    }
                }
            };
            let c = classify_two_lines(l1, l2, *zeros_on, DEFAULT_ANGLE_TOL)?;
            let geometry = match c.geometry {
                LineGeometry::Identical => json!({ "kind": "identical" }),
                LineGeometry::Parallel { distance } => json!({ "kind": "parallel", "distance": distance }),
                LineGeometry::Intersecting { point, angle_between } => {
                    json!({ "kind": "intersecting", "point": Cx::from(point), "angle_between": angle_between })
                }
            };
            let lj = |l: &Line| json!({ "point": Cx::from(l.point), "angle": l.angle });
            Ok(Outcome::json(
                Status::Ok,
                json!({
                    "lines": [lj(&l1), lj(&l2)],
                    "geometry": geometry,
                    "zeros_on": c.zeros_on,
                    "permitted_forms": c.permitted_forms.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    "unconstrained": c.unconstrained,
                }),
            ))
        }
        RaysCommand::ThreeRay { alpha } => {
            let report = three_ray_check(angle(alpha)?, DEFAULT_ANGLE_TOL)?;
            Ok(Outcome::json(Status::Ok, json!(report)))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval(a) => eval(g, a),
        Command::Roots(a) => roots(g, a),
        Command::Verify(a) => verify(g, a),
        Command::Rays(a) => rays(&a.command),
    }
}

fn config_json(g: &GlobalArgs) -> Value {
    serde_json::to_value(g).unwrap_or(Value::Null)
}

/// Runs a parsed command; returns standard output and the exit status.
pub fn run(cli: &Cli) -> (String, i32) {
    let started = Instant::now();
    let result = match cli.global.threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli)),
            Err(e) => Err(CliError::usage(e.to_string())),
        },
        None => execute(cli),
    };
    let timing = cli.global.timing.then(|| Timing {
        elapsed_seconds: started.elapsed().as_secs_f64(),
        threads: cli.global.threads.unwrap_or_else(rayon::current_num_threads),
    });
    let command = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    match result {
        Ok(Outcome { csv: Some(csv), status, .. }) => (csv, status.exit_code()),
        Ok(o) => {
            let doc = ResultDocument {
                schema_version: SCHEMA_VERSION,
                command,
                config: config_json(&cli.global),
                status: o.status,
                payload: o.payload,
                timing,
            };
            (render(&doc), o.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            let doc = error_document(command, config_json(&cli.global), &e);
            (render(&doc), e.exit_code())
        }
    }
}

pub fn error_document(command: Value, config: Value, e: &CliError) -> ResultDocument {
    ResultDocument {
        schema_version: SCHEMA_VERSION,
        command,
        config,
        status: Status::Error,
        payload: json!({ "error": e }),
        timing: None,
    }
}

pub fn render(doc: &ResultDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}
