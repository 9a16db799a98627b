use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use linkmorse::deform::lift_near;
use linkmorse::{
    check_lemmas, deform as make_path, edge_orientations, f_value, fit_circle, oracle_index,
    random_rotation, reframed_inertia, stable_morse_index, validate_configuration, vertex_angles, CircleFit,
    Configuration, DeformError, EventKind, EventOptions, LemmaOptions, Linkage, OracleOptions,
    Point, Sign,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::artifact::{self, Enumeration, Record};
use crate::Tolerances;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", .path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(2)
    }
}

/// Configurations and artifacts are compared against their own circle to
/// this relative precision.
const CONSISTENCY_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-8;

impl Tolerances {
    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("--tol-root", self.root), ("--tol-degen", self.degen), ("--tol-eig", self.eig)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn oracle(&self) -> OracleOptions {
        OracleOptions { eig_tol: self.eig, ..OracleOptions::default() }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.into(), source })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.into(), source })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn enumerate(
    input: &Path,
    output: Option<&Path>,
    csv: Option<&Path>,
    tol: &Tolerances,
) -> Result<ExitCode, CliError> {
    let linkage: Linkage = read_json(input)?;
    let e = artifact::build(&linkage, tol).map_err(|e| CliError::Input(e.to_string()))?;
    emit(output, &to_json(&e))?;
    if let Some(path) = csv {
        write_file(path, &artifact::csv(&e.configurations))?;
    }
    let line = artifact::summary(&e.configurations);
    if output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}

fn linkage_of(points: &[Point]) -> Result<Linkage, CliError> {
    Linkage::from_points(points).map_err(|e| CliError::Input(format!("edge lengths: {e}")))
}

fn check_pinned(points: &[Point], tol: f64) -> Result<(), CliError> {
    let (p1, p2) = (points[0], points[1]);
    let scale = p1.dist(p2).max(f64::MIN_POSITIVE);
    if p1.norm() > tol * scale || p2.x.abs() > tol * scale || p2.y <= 0.0 {
        return Err(CliError::Input(format!(
            "configuration is not pinned: need p_1 = (0, 0) and p_2 = (0, l_1), got {p1} and {p2}"
        )));
    }
    Ok(())
}

fn cyclic_fit(points: &[Point], tol: f64) -> Result<CircleFit, CliError> {
    fit_circle(points, tol).map_err(|e| {
        CliError::Input(format!("not a cyclic configuration, so not a critical point of the signed area ({e})"))
    })
}

/// `k` with `Σ 2 ε_i α_i = 2πk`.
pub fn winding(points: &[Point], fit: &CircleFit) -> Result<i32, CliError> {
    let eps = edge_orientations(points, fit.center).map_err(|e| CliError::Input(e.to_string()))?;
    let n = points.len();
    let total: f64 = (0..n)
        .map(|i| {
            let l = points[i].dist(points[(i + 1) % n]);
            2.0 * eps.signs()[i].value() * (l / (2.0 * fit.radius)).min(1.0).asin()
        })
        .sum();
    Ok((total / std::f64::consts::TAU).round() as i32)
}

#[derive(Serialize)]
struct OracleSummary {
    residual: f64,
    inertia: linkmorse::Inertia,
    det_sign: i8,
    index: Option<usize>,
}

#[derive(Serialize)]
struct IndexReport {
    n: usize,
    eps: linkmorse::OrientationString,
    k: i32,
    r: f64,
    center: Point,
    area: f64,
    delta: f64,
    d: Sign,
    e: usize,
    h_sign: Sign,
    h_sequence: Vec<Sign>,
    index: usize,
    route: linkmorse::IndexRoute,
    oracle: OracleSummary,
    agree: bool,
}

pub fn index(input: &Path, tol: &Tolerances) -> Result<ExitCode, CliError> {
    let config: Configuration = read_json(input)?;
    let points = &config.points;
    if points.len() < 3 {
        return Err(CliError::Input(format!("need at least 3 points, got {}", points.len())));
    }
    let linkage = linkage_of(points)?;
    check_pinned(points, tol.degen)?;
    let fit = cyclic_fit(points, tol.degen)?;
    let (morse, route) = stable_morse_index(points, &fit)
        .map_err(|e| CliError::Input(format!("degenerate configuration: {e}")))?;
    let verdict = oracle_index(points, &linkage, &tol.oracle())
        .map_err(|e| CliError::Input(format!("numerical Hessian: {e}")))?;
    let agree = verdict.index == Some(morse.index) && verdict.det_sign == morse.sign_report.h_sign.as_i8();
    let report = IndexReport {
        n: points.len(),
        eps: edge_orientations(points, fit.center).map_err(|e| CliError::Input(e.to_string()))?,
        k: winding(points, &fit)?,
        r: fit.radius,
        center: fit.center,
        area: config.signed_area().map_err(|e| CliError::Input(e.to_string()))?,
        delta: morse.sign_report.delta,
        d: morse.sign_report.d,
        e: morse.sign_report.e,
        h_sign: morse.sign_report.h_sign,
        h_sequence: morse.h_sequence,
        index: morse.index,
        route,
        oracle: OracleSummary {
            residual: verdict.residual,
            inertia: verdict.inertia,
            det_sign: verdict.det_sign,
            index: verdict.index,
        },
        agree,
    };
    print!("{}", to_json(&report));
    Ok(if agree { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Why a non-flagged record fails verification, if it does.
fn check_record(
    linkage: &Linkage,
    rec: &Record,
    tol: &Tolerances,
    probes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let points = &rec.points;
    let violations = validate_configuration(linkage, points, CONSISTENCY_TOL);
    if !violations.is_empty() {
        let parts: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(parts.join("; "));
    }
    let fit = fit_circle(points, CONSISTENCY_TOL).map_err(|e| format!("points are not cyclic: {e}"))?;
    if (fit.radius - rec.r).abs() > CONSISTENCY_TOL * rec.r
        || fit.center.dist(rec.center) > CONSISTENCY_TOL * rec.r
    {
        return Err(format!("stored circle (r = {}) does not pass through the points (r = {})", rec.r, fit.radius));
    }
    let f = f_value(linkage, &rec.eps, rec.k, rec.r).map_err(|e| e.to_string())?;
    if f.abs() > CONSISTENCY_TOL {
        return Err(format!("r is not a root of the angle equation: F(r) = {f:e}"));
    }
    let (morse, _) = stable_morse_index(points, &fit).map_err(|e| format!("formula: {e}"))?;
    if Some(morse.index) != rec.index || Some(morse.sign_report.h_sign) != rec.h_sign {
        return Err(format!(
            "stored index {:?} / 𝓗 {:?}, recomputed {} / {}",
            rec.index, rec.h_sign, morse.index, morse.sign_report.h_sign
        ));
    }
    let verdict = oracle_index(points, linkage, &tol.oracle()).map_err(|e| format!("oracle: {e}"))?;
    if verdict.residual > RESIDUAL_TOL {
        return Err(format!("criticality residual {:e}", verdict.residual));
    }
    if verdict.det_sign != morse.sign_report.h_sign.as_i8() {
        return Err(format!("𝓗 = {} but oracle det sign = {}", morse.sign_report.h_sign, verdict.det_sign));
    }
    if verdict.index != Some(morse.index) {
        return Err(format!("formula index {} but oracle index {:?}", morse.index, verdict.index));
    }
    let dim = points.len() - 3;
    for _ in 0..probes {
        let q = random_rotation(dim, rng);
        let inertia = reframed_inertia(points, linkage, &tol.oracle(), &q).map_err(|e| format!("oracle: {e}"))?;
        if inertia != verdict.inertia {
            return Err(format!("inertia {inertia:?} in a rotated frame, {:?} in the SVD frame", verdict.inertia));
        }
    }
    Ok(())
}

pub fn verify(input: &Path, probes: usize, tol: &Tolerances) -> Result<ExitCode, CliError> {
    let e: Enumeration = read_json(input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(tol.seed);
    let (mut checked, mut agree, mut flagged) = (0, 0, 0);
    for (i, rec) in e.configurations.iter().enumerate() {
        if rec.flagged {
            flagged += 1;
            continue;
        }
        checked += 1;
        match check_record(&e.linkage, rec, tol, probes, &mut rng) {
            Ok(()) => agree += 1,
            Err(why) => {
                eprintln!("configuration #{i} (k = {}, E = {}, r = {}): {why}", rec.k, rec.eps, rec.r)
            }
        }
    }
    println!("seed: {}", tol.seed);
    let excluded = if flagged > 0 { format!("{flagged} flagged, excluded") } else { "0 flagged".to_string() };
    println!("{agree}/{checked} agree ({excluded})");
    Ok(if agree == checked { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct EventRecord {
    kind: EventKind,
    /// 1-based.
    edge: Option<usize>,
    t: f64,
    #[serde(rename = "H_before")]
    h_before: Option<i8>,
    #[serde(rename = "H_after")]
    h_after: Option<i8>,
    d_before: Option<i8>,
    d_after: Option<i8>,
    eps_before: String,
    eps_after: String,
}

fn angles_of(path: &Path, tol: &Tolerances) -> Result<(Vec<f64>, f64), CliError> {
    let config: Configuration = read_json(path)?;
    if config.points.len() < 3 {
        return Err(CliError::Input(format!("{}: need at least 3 points", path.display())));
    }
    let fit = cyclic_fit(&config.points, tol.degen)?;
    let angles = vertex_angles(&config.points, &fit)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((angles, fit.radius))
}

pub fn deform(
    a: &Path,
    b: &Path,
    steps: usize,
    oracle_stride: usize,
    output: Option<&Path>,
    tol: &Tolerances,
) -> Result<ExitCode, CliError> {
    let (theta_a, r_a) = angles_of(a, tol)?;
    let (theta_b, r_b) = angles_of(b, tol)?;
    if theta_a.len() != theta_b.len() {
        return Err(CliError::Input(format!(
            "configurations have {} and {} vertices",
            theta_a.len(),
            theta_b.len()
        )));
    }
    // Angles do not see the radius, so B is implicitly rescaled onto A's circle.
    let theta_b = lift_near(&theta_b, &theta_a);
    let path = make_path(&theta_a, &theta_b, r_a, steps).map_err(|e| CliError::Input(e.to_string()))?;
    let opts = LemmaOptions { events: EventOptions::default(), oracle_stride, oracle: tol.oracle() };
    let report = check_lemmas(&path, &opts).map_err(|e| match e {
        DeformError::NonGenericPath { .. } => CliError::Input(format!("path is not generic: {e}")),
        other => CliError::Input(other.to_string()),
    })?;
    let records: Vec<EventRecord> = report
        .events
        .iter()
        .map(|e| EventRecord {
            kind: e.kind,
            edge: e.edge.map(|i| i + 1),
            t: e.t,
            h_before: e.before.report.as_ref().map(|r| r.h_sign.as_i8()),
            h_after: e.after.report.as_ref().map(|r| r.h_sign.as_i8()),
            d_before: e.before.report.as_ref().map(|r| r.d.as_i8()),
            d_after: e.after.report.as_ref().map(|r| r.d.as_i8()),
            eps_before: e.before.eps.to_string(),
            eps_after: e.after.eps.to_string(),
        })
        .collect();
    emit(output, &to_json(&records))?;
    let count = |k: EventKind| report.events.iter().filter(|e| e.kind == k).count();
    eprintln!(
        "r = {r_a} (target r = {r_b}); {} events: {} flip, {} central, {} delta_zero; \
         {} frames checked, {} skipped, {} oracle checks",
        report.events.len(),
        count(EventKind::Flip),
        count(EventKind::Central),
        count(EventKind::DeltaZero),
        report.frames_checked,
        report.frames_skipped,
        report.oracle_checked,
    );
    for v in &report.violations {
        eprintln!("violation: {v:?}");
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
