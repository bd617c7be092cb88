//! Admissibility of labeled ray systems for zeros (`A`) and 1-points (`B`)
//! of entire functions of finite order, the two-line classification and
//! the symmetric three-ray configuration.

use crate::error::{CoreError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

pub const DEFAULT_ANGLE_TOL: f64 = 1e-9;
/// The enumeration visits `2^n` candidate partitions.
pub const MAX_RAYS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub fn other(self) -> Label {
        match self {
            Label::A => Label::B,
            Label::B => Label::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Radians in `[0, 2pi)`.
    pub angle: f64,
    pub label: Label,
}

/// Rays through the origin, sorted by angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRaySystem {
    rays: Vec<Ray>,
}

/// Reduce an angle to `[0, 2pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl LabeledRaySystem {
    /// Angles are wrapped into `[0, 2pi)` and sorted. Two rays closer than
    /// `1e-12` are rejected, as is an empty list.
    pub fn new(rays: impl IntoIterator<Item = (f64, Label)>) -> Result<Self> {
        let mut rays: Vec<Ray> = rays
            .into_iter()
            .map(|(a, label)| {
                if a.is_finite() {
                    Ok(Ray {
                        angle: wrap_angle(a),
                        label,
                    })
                } else {
                    Err(CoreError::InvalidInput(format!("ray angle {a} is not finite")))
                }
            })
            .collect::<Result<_>>()?;
        if rays.is_empty() {
            return Err(CoreError::InvalidInput("a ray system needs at least one ray".into()));
        }
        if rays.len() > MAX_RAYS {
            return Err(CoreError::InvalidInput(format!(
                "{} rays given, at most {MAX_RAYS} are supported",
                rays.len()
            )));
        }
        rays.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        let n = rays.len();
        for i in 0..n {
            let gap = if i + 1 < n {
                rays[i + 1].angle - rays[i].angle
            } else {
                rays[0].angle + TAU - rays[i].angle
            };
            if n > 1 && gap < 1e-12 {
                return Err(CoreError::InvalidInput(format!(
                    "rays at {} and {} coincide",
                    rays[i].angle,
                    rays[(i + 1) % n].angle
                )));
            }
        }
        Ok(Self { rays })
    }

    /// Zeros on the rays `zeros`, 1-points on the rays `ones`.
    pub fn from_sets(zeros: &[f64], ones: &[f64]) -> Result<Self> {
        Self::new(
            zeros
                .iter()
                .map(|&a| (a, Label::A))
                .chain(ones.iter().map(|&a| (a, Label::B))),
        )
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    /// Counter-clockwise angle from ray `i` to ray `j`, in `(0, 2pi]`.
    fn arc(&self, i: usize, j: usize) -> f64 {
        let d = self.rays[j].angle - self.rays[i].angle;
        if d > 0.0 {
            d
        } else {
            d + TAU
        }
    }

    /// Largest angle between adjacent rays (`2pi` for a single ray).
    pub fn omega_gap(&self) -> f64 {
        let n = self.rays.len();
        (0..n).map(|i| self.arc(i, (i + 1) % n)).fold(0.0, f64::max)
    }

    pub fn rotated(&self, delta: f64) -> Result<Self> {
        Self::new(self.rays.iter().map(|r| (r.angle + delta, r.label)))
    }

    pub fn swapped(&self) -> Self {
        Self {
            rays: self
                .rays
                .iter()
                .map(|r| Ray {
                    angle: r.angle,
                    label: r.label.other(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// `rho = pi / omega_gap > 1/2`.
    Order,
    I,
    II,
    III,
    IV,
    V,
}

impl Condition {
    const SECTOR_CONDITIONS: [Condition; 5] = [Condition::I, Condition::II, Condition::III, Condition::IV, Condition::V];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Order => "order",
            Condition::I => "(i)",
            Condition::II => "(ii)",
            Condition::III => "(iii)",
            Condition::IV => "(iv)",
            Condition::V => "(v)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Rays `C_1..C_2m` and the parity of the sector from `C_j` to `C_{j+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub rays: Vec<Ray>,
    pub parities: Vec<Parity>,
}

impl Partition {
    /// Rotation-free description: the even sectors as (start, end) angles.
    pub fn even_sectors(&self) -> Vec<(f64, f64)> {
        let k = self.rays.len();
        (0..k)
            .filter(|&j| self.parities[j] == Parity::Even)
            .map(|j| (self.rays[j].angle, self.rays[(j + 1) % k].angle))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorDiagnostic {
    /// 1-based sector index `j`.
    pub index: usize,
    pub parity: Parity,
    pub start: f64,
    pub end: f64,
    pub opening: f64,
    pub boundary_labels: [Label; 2],
    pub interior: Vec<Ray>,
    pub passed: Vec<Condition>,
    pub failed: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub omega_gap: f64,
    /// `pi / omega_gap`; meaningful as an order only when admissible.
    pub rho: f64,
    pub partition: Option<Partition>,
    /// For the accepted partition, or for the candidate that got furthest.
    pub sector_diagnostics: Vec<SectorDiagnostic>,
    pub failure_witness: Option<Condition>,
    pub candidates_tried: usize,
    /// Every admissible partition, when requested.
    pub all_partitions: Option<Vec<Partition>>,
}

struct Candidate {
    diagnostics: Vec<SectorDiagnostic>,
    failure: Option<Condition>,
}

/// The first condition violated by a candidate, without building diagnostics.
fn first_failure(system: &LabeledRaySystem, chosen: &[usize], first_odd: bool, target: f64, tol: f64) -> Option<Condition> {
    let n = system.len();
    let k = chosen.len();
    let mut worst: Option<Condition> = None;
    let mut note = |c: Condition| {
        if worst.map_or(true, |w| c < w) {
            worst = Some(c);
        }
    };
    for j in 0..k {
        let (s, e) = (chosen[j], chosen[(j + 1) % k]);
        let odd = (j % 2 == 0) == first_odd;
        let opening = system.arc(s, e);
        let (ls, le) = (system.rays[s].label, system.rays[e].label);
        let empty = (s + 1) % n == e;
        if odd {
            if opening > target + tol {
                note(Condition::I);
            }
            if ls != le {
                note(Condition::II);
            }
            let mut i = (s + 1) % n;
            while i != e {
                let other = system.rays[i].label.other();
                if ls != other || le != other {
                    note(Condition::IV);
                    break;
                }
                i = (i + 1) % n;
            }
            if empty && (opening - target).abs() > tol {
                note(Condition::V);
            }
        } else {
            if (opening - target).abs() > tol {
                note(Condition::I);
            }
            if !empty {
                note(Condition::III);
            }
        }
    }
    worst
}

fn evaluate(system: &LabeledRaySystem, chosen: &[usize], first_odd: bool, target: f64, tol: f64) -> Candidate {
    let n = system.len();
    let k = chosen.len();
    let mut diagnostics = Vec::with_capacity(k);
    for j in 0..k {
        let (s, e) = (chosen[j], chosen[(j + 1) % k]);
        let parity = if (j % 2 == 0) == first_odd { Parity::Odd } else { Parity::Even };
        let opening = system.arc(s, e);
        let mut interior = Vec::new();
        let mut i = (s + 1) % n;
        while i != e {
            interior.push(system.rays[i]);
            i = (i + 1) % n;
        }
        let lb = [system.rays[s].label, system.rays[e].label];
        let mut passed = Vec::new();
        let mut failed = Vec::new();
        for c in Condition::SECTOR_CONDITIONS {
            let ok = match (c, parity) {
                (Condition::I, Parity::Even) => (opening - target).abs() <= tol,
                (Condition::I, Parity::Odd) => opening <= target + tol,
                (Condition::II, Parity::Odd) => lb[0] == lb[1],
                (Condition::III, Parity::Even) => interior.is_empty(),
                (Condition::IV, Parity::Odd) => interior
                    .iter()
                    .all(|r| lb[0] == r.label.other() && lb[1] == r.label.other()),
                (Condition::V, Parity::Odd) => !interior.is_empty() || (opening - target).abs() <= tol,
                _ => true,
            };
            if ok {
                passed.push(c);
            } else {
                failed.push(c);
            }
        }
        diagnostics.push(SectorDiagnostic {
            index: j + 1,
            parity,
            start: system.rays[s].angle,
            end: system.rays[e].angle,
            opening,
            boundary_labels: lb,
            interior,
            passed,
            failed,
        });
    }
    let failure = diagnostics.iter().flat_map(|d| d.failed.iter().copied()).min();
    Candidate { diagnostics, failure }
}

/// Lexicographic `k`-subsets of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Search for a partition satisfying conditions (i)-(v) at
/// `rho = pi / omega_gap`. Candidates are tried by increasing size, then
/// lexicographically, with sector 1 odd before sector 1 even. With
/// `collect_all` every admissible partition is recorded.
pub fn admissibility_check(system: &LabeledRaySystem, angle_tol: f64, collect_all: bool) -> AdmissibilityReport {
    let omega_gap = system.omega_gap();
    let rho = PI / omega_gap;
    let mut report = AdmissibilityReport {
        admissible: false,
        omega_gap,
        rho,
        partition: None,
        sector_diagnostics: Vec::new(),
        failure_witness: Some(Condition::Order),
        candidates_tried: 0,
        all_partitions: collect_all.then(Vec::new),
    };
    if rho <= 0.5 + angle_tol {
        return report;
    }
    let target = omega_gap;
    let n = system.len();
    let mut best: Option<Candidate> = None;
    for k in (2..=n).step_by(2) {
        let mut chosen: Vec<usize> = (0..k).collect();
        loop {
            for first_odd in [true, false] {
                report.candidates_tried += 1;
                let failure = first_failure(system, &chosen, first_odd, target, angle_tol);
                let keep = match failure {
                    None => true,
                    Some(f) => !report.admissible && best.as_ref().map_or(true, |b| b.failure < Some(f)),
                };
                if !keep {
                    continue;
                }
                let cand = evaluate(system, &chosen, first_odd, target, angle_tol);
                debug_assert_eq!(cand.failure, failure);
                match cand.failure {
                    None => {
                        let partition = Partition {
                            rays: chosen.iter().map(|&i| system.rays[i]).collect(),
                            parities: cand.diagnostics.iter().map(|d| d.parity).collect(),
                        };
                        if !report.admissible {
                            report.admissible = true;
                            report.failure_witness = None;
                            report.partition = Some(partition.clone());
                            report.sector_diagnostics = cand.diagnostics;
                            if !collect_all {
                                return report;
                            }
                        }
                        if let Some(all) = report.all_partitions.as_mut() {
                            all.push(partition);
                        }
                    }
                    Some(f) => {
                        if !report.admissible && best.as_ref().map_or(true, |b| b.failure < Some(f)) {
                            best = Some(cand);
                        }
                    }
                }
            }
            if !next_combination(&mut chosen, n) {
                break;
            }
        }
    }
    if !report.admissible {
        if let Some(b) = best {
            report.failure_witness = b.failure;
            report.sector_diagnostics = b.diagnostics;
        }
    }
    report
}

/// A line through `point` with direction angle `angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub point: Complex64,
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LineGeometry {
    Identical,
    Parallel { distance: f64 },
    Intersecting { point: Complex64, angle_between: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionForm {
    /// `P(e^{az})` with a polynomial `P`.
    PolynomialInExp,
    /// `e^{az+b}`.
    Exp,
    /// `1 - e^{az+b}`.
    OneMinusExp,
    /// Polynomial of degree at most 2.
    QuadraticPolynomial,
}

impl fmt::Display for FunctionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionForm::PolynomialInExp => "P(exp(a z))",
            FunctionForm::Exp => "exp(a z + b)",
            FunctionForm::OneMinusExp => "1 - exp(a z + b)",
            FunctionForm::QuadraticPolynomial => "polynomial of degree <= 2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLineClassification {
    pub geometry: LineGeometry,
    /// Which line (1 or 2) carries the zeros.
    pub zeros_on: u8,
    /// Empty when `unconstrained`.
    pub permitted_forms: Vec<FunctionForm>,
    pub unconstrained: bool,
}

/// Entire functions with zeros on one line and 1-points on another.
pub fn classify_two_lines(line1: Line, line2: Line, zeros_on: u8, angle_tol: f64) -> Result<TwoLineClassification> {
    if zeros_on != 1 && zeros_on != 2 {
        return Err(CoreError::InvalidInput(format!("zeros_on must be 1 or 2, got {zeros_on}")));
    }
    if !(line1.point.is_finite() && line2.point.is_finite() && line1.angle.is_finite() && line2.angle.is_finite()) {
        return Err(CoreError::InvalidInput("line data must be finite".into()));
    }
    let d1 = Complex64::from_polar(1.0, line1.angle);
    let d2 = Complex64::from_polar(1.0, line2.angle);
    let cross = (d1.conj() * d2).im;
    let scale = 1.0 + line1.point.norm().max(line2.point.norm());
    let geometry = if cross.abs() <= angle_tol {
        let distance = (d1.conj() * (line2.point - line1.point)).im.abs();
        if distance <= angle_tol * scale {
            LineGeometry::Identical
        } else {
            LineGeometry::Parallel { distance }
        }
    } else {
        // line1.point + s d1 = line2.point + t d2
        let s = (d2.conj() * (line1.point - line2.point)).im / cross;
        LineGeometry::Intersecting {
            point: line1.point + d1 * s,
            angle_between: cross.abs().asin(),
        }
    };
    let (permitted_forms, unconstrained) = match geometry {
        LineGeometry::Identical => (Vec::new(), true),
        LineGeometry::Parallel { .. } => (vec![FunctionForm::PolynomialInExp], false),
        LineGeometry::Intersecting { .. } => (
            vec![FunctionForm::Exp, FunctionForm::OneMinusExp, FunctionForm::QuadraticPolynomial],
            false,
        ),
    };
    Ok(TwoLineClassification {
        geometry,
        zeros_on,
        permitted_forms,
        unconstrained,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThreeRayVerdict {
    Admissible { rho: f64 },
    /// No transcendental function with zeros and 1-points exactly on the
    /// rays, but functions of order 1 with them close to the rays.
    Split { close_to_rays_rho: f64 },
    Inadmissible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeRayReport {
    pub alpha: f64,
    pub verdict: ThreeRayVerdict,
    pub admissibility: AdmissibilityReport,
    pub annotation: Option<String>,
}

/// Zeros on the positive ray, 1-points on the rays at `alpha` and
/// `2pi - alpha`.
pub fn three_ray_check(alpha: f64, angle_tol: f64) -> Result<ThreeRayReport> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(CoreError::Domain {
            z: Complex64::new(alpha, 0.0),
            what: "alpha must lie in (0, pi)".into(),
        });
    }
    let system = LabeledRaySystem::from_sets(&[0.0], &[alpha, TAU - alpha])?;
    let admissibility = admissibility_check(&system, angle_tol, false);
    let (verdict, annotation) = if (alpha - FRAC_PI_2).abs() <= angle_tol {
        (
            ThreeRayVerdict::Split {
                close_to_rays_rho: admissibility.rho,
            },
            Some("exactly on the rays only polynomials are possible; close to the rays 1/Gamma(-z) has order 1".to_string()),
        )
    } else if admissibility.admissible {
        let m = 2.0 * PI / alpha - 2.0;
        let note = if (m - m.round()).abs() <= angle_tol * 10.0 && m.round() >= 3.0 {
            format!("exact rays realised by the Stokes multiplier construction with m = {}", m.round())
        } else {
            "existence open for exact rays".to_string()
        };
        (
            ThreeRayVerdict::Admissible {
                rho: admissibility.rho,
            },
            Some(note),
        )
    } else {
        (ThreeRayVerdict::Inadmissible, None)
    };
    Ok(ThreeRayReport {
        alpha,
        verdict,
        admissibility,
        annotation,
    })
}
