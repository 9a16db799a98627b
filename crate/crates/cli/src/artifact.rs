//! The enumeration artifact written by `enumerate` and read by `verify`
//! and `render`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use linkmorse::{
    enumerate_cyclic, stable_morse_index, CircleFit, CyclicConfiguration, DegeneracyFlags,
    IndexRoute, Linkage, OrientationString, Point, Sign, SolverError, SolverOptions,
};
use serde::{Deserialize, Serialize};

use crate::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub k: i32,
    pub eps: OrientationString,
    pub r: f64,
    pub center: Point,
    pub points: Vec<Point>,
    pub area: f64,
    pub flags: DegeneracyFlags,
    /// Excluded from verification: near-degenerate, or no index could be
    /// computed.
    pub flagged: bool,
    pub h_sign: Option<Sign>,
    pub h_sequence: Option<Vec<Sign>>,
    pub index: Option<usize>,
    pub route: Option<IndexRoute>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub linkage: Linkage,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub configurations: Vec<Record>,
}

pub fn solver_options(tol: &Tolerances) -> SolverOptions {
    SolverOptions { root_rel_tol: tol.root, degeneracy_tol: tol.degen, ..SolverOptions::default() }
}

fn record(item: CyclicConfiguration) -> Record {
    let d = &item.descriptor;
    let fit = CircleFit { center: d.center, radius: d.radius };
    let points = item.configuration.points.clone();
    let indexed = if item.flags.is_generic() { stable_morse_index(&points, &fit).ok() } else { None };
    Record {
        k: d.winding,
        eps: d.eps.clone(),
        r: d.radius,
        center: d.center,
        area: item.signed_area(),
        flagged: indexed.is_none(),
        h_sign: indexed.as_ref().map(|(m, _)| m.sign_report.h_sign),
        h_sequence: indexed.as_ref().map(|(m, _)| m.h_sequence.clone()),
        index: indexed.as_ref().map(|(m, _)| m.index),
        route: indexed.map(|(_, route)| route),
        flags: item.flags,
        points,
    }
}

pub fn build(linkage: &Linkage, tol: &Tolerances) -> Result<Enumeration, SolverError> {
    let all = enumerate_cyclic(linkage, &solver_options(tol))?;
    Ok(Enumeration {
        linkage: linkage.clone(),
        seed: tol.seed,
        tolerances: *tol,
        configurations: all.into_iter().map(record).collect(),
    })
}

/// `"14 configurations: index 0 ×2, index 1 ×10, index 2 ×2"`.
pub fn summary(records: &[Record]) -> String {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for m in records.iter().filter_map(|r| r.index) {
        *counts.entry(m).or_default() += 1;
    }
    let noun = if records.len() == 1 { "configuration" } else { "configurations" };
    let mut out = format!("{} {noun}", records.len());
    let parts: Vec<String> = counts.iter().map(|(m, c)| format!("index {m} ×{c}")).collect();
    if !parts.is_empty() {
        out += ": ";
        out += &parts.join(", ");
    }
    let flagged = records.iter().filter(|r| r.flagged).count();
    if flagged > 0 {
        let _ = write!(out, " ({flagged} flagged)");
    }
    out
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv(records: &[Record]) -> String {
    let mut out = String::from("k,eps,r,center_x,center_y,area,flagged,h_sign,index,route\n");
    for r in records {
        let route = r.route.map(|x| match x {
            IndexRoute::Direct => "direct",
            IndexRoute::Perturbed => "perturbed",
        });
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.eps,
            r.r,
            r.center.x,
            r.center.y,
            r.area,
            r.flagged,
            opt(r.h_sign.map(|s| s.as_i8())),
            opt(r.index),
            opt(route),
        );
    }
    out
}
