//! Hyperbolic type, region of the parameter slice and the Sierpiński verdict.

pub mod basin;
pub mod contact;
pub mod scan;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use basin::{immediate_basin_membership, immediate_basin_membership_with, BasinConfig, BasinError};
pub use contact::{
    contact_test, triple_contact_test, zero_ray_landing, Confirmation, ContactConfig, ContactEvidence, RayLanding,
    CRITICAL_CYCLE,
};

use crate::families::{per3_map, Per3Parameter};
use crate::orbit::{orbit_fate_with, Cycle, OrbitConfig, OrbitFate, Stability};
use crate::params::special_parameters_cached;
use crate::periodic::{fixed_points, periodic_points, MAX_PERIOD};
use crate::rational::RationalMap;
use crate::serde_complex;
use crate::sphere::{chordal_distance, Complex, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HyperbolicType {
    Adjacent,
    Bitransitive,
    Capture,
    Disjoint,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    B1,
    BInfinity,
    Omega1,
    Omega2,
    Omega3,
    NearBoundary,
}

impl Region {
    /// The region of the conjugate parameter.
    pub fn conj(self) -> Self {
        match self {
            Region::Omega2 => Region::Omega3,
            Region::Omega3 => Region::Omega2,
            r => r,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Sierpinski,
    NotSierpinski,
    Inconclusive,
}

macro_rules! display_as_debug {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(self, f)
            }
        }
    )*};
}
display_as_debug!(HyperbolicType, Region, Verdict);

/// Tolerances and budgets for classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub budget: usize,
    pub contact: ContactConfig,
    pub basin: BasinConfig,
    /// Parameters this close to a cut point are near the boundary.
    pub boundary_tol: f64,
    /// Triple-contact parameters with `|Im a|` below this are near the boundary.
    pub real_axis_tol: f64,
    /// Attractor points closer than this are the same.
    pub match_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            budget: 10_000,
            contact: ContactConfig::default(),
            basin: BasinConfig::default(),
            boundary_tol: 1e-6,
            real_axis_tol: 1e-9,
            match_tol: 1e-4,
        }
    }
}

/// Type of `f` together with the attracting cycles that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeAnalysis {
    pub kind: HyperbolicType,
    /// One entry per critical point: its fate.
    pub fates: Vec<OrbitFate>,
    pub diagnostics: Vec<String>,
}

fn anchor(fate: &OrbitFate) -> Option<SpherePoint> {
    match fate {
        OrbitFate::Converged { cycle, phase, .. } => Some(cycle[*phase]),
        OrbitFate::Unresolved { .. } => None,
    }
}

fn same_cycle(a: &OrbitFate, b: &OrbitFate, tol: f64) -> bool {
    match (a, b) {
        (
            OrbitFate::Converged {
                cycle: c, period: p, ..
            },
            OrbitFate::Converged {
                cycle: d, period: q, ..
            },
        ) => p == q && d.iter().any(|x| chordal_distance(*x, c[0]) < tol),
        _ => false,
    }
}

/// Type of a quadratic rational map from the fates of its two critical
/// points.
pub fn hyperbolic_type(f: &RationalMap) -> HyperbolicType {
    analyze_type(f, &ClassifyConfig::default()).kind
}

pub fn analyze_type(f: &RationalMap, cfg: &ClassifyConfig) -> TypeAnalysis {
    let mut diagnostics = Vec::new();
    let unresolved = |fates, diagnostics| TypeAnalysis {
        kind: HyperbolicType::Unresolved,
        fates,
        diagnostics,
    };
    let crit = match f.critical_points() {
        Ok(c) if c.len() == 2 => c,
        Ok(c) => {
            diagnostics.push(format!("expected 2 critical points, found {}", c.len()));
            return unresolved(Vec::new(), diagnostics);
        }
        Err(e) => {
            diagnostics.push(e.to_string());
            return unresolved(Vec::new(), diagnostics);
        }
    };
    let orbit_cfg = OrbitConfig::with_budget(cfg.budget);
    let fates: Vec<OrbitFate> = crit.iter().map(|c| orbit_fate_with(f, *c, &orbit_cfg)).collect();
    if fates.iter().any(|x| !x.is_converged()) {
        diagnostics.push("a critical orbit did not settle within the budget".into());
        return unresolved(fates, diagnostics);
    }
    if !same_cycle(&fates[0], &fates[1], cfg.match_tol) {
        return TypeAnalysis {
            kind: HyperbolicType::Disjoint,
            fates,
            diagnostics,
        };
    }
    let mut inside = Vec::new();
    for (c, fate) in crit.iter().zip(&fates) {
        let target = anchor(fate).expect("converged");
        match immediate_basin_membership_with(f, *c, target, &cfg.basin) {
            Ok(b) => inside.push(b),
            Err(e) => {
                diagnostics.push(format!("basin membership of {c}: {e}"));
                return unresolved(fates, diagnostics);
            }
        }
    }
    let same_component = chordal_distance(anchor(&fates[0]).unwrap(), anchor(&fates[1]).unwrap()) < cfg.match_tol;
    let kind = match (inside[0], inside[1]) {
        (true, true) if same_component => HyperbolicType::Adjacent,
        (true, true) => HyperbolicType::Bitransitive,
        (true, false) | (false, true) => HyperbolicType::Capture,
        (false, false) => {
            diagnostics.push("neither critical point lies in the immediate basin".into());
            HyperbolicType::Unresolved
        }
    };
    TypeAnalysis {
        kind,
        fates,
        diagnostics,
    }
}

/// Region with the evidence gathered for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionAnalysis {
    pub region: Region,
    pub evidence: Vec<ContactEvidence>,
    pub diagnostics: Vec<String>,
}

/// Which piece of the slice contains `a`.
pub fn per3_region(a: Per3Parameter) -> Region {
    analyze_region(a, &ClassifyConfig::default()).region
}

pub fn analyze_region(a: Per3Parameter, cfg: &ClassifyConfig) -> RegionAnalysis {
    let mut diagnostics = Vec::new();
    let near = |diagnostics, evidence| RegionAnalysis {
        region: Region::NearBoundary,
        evidence,
        diagnostics,
    };
    let av = a.value();
    match special_parameters_cached() {
        Ok(s) => {
            if let Some(c) = s.cut_points().iter().find(|c| (av - **c).norm() < cfg.boundary_tol) {
                diagnostics.push(format!(
                    "within {:e} of the cut point {}",
                    cfg.boundary_tol,
                    crate::format_complex(*c)
                ));
                return near(diagnostics, Vec::new());
            }
        }
        Err(e) => diagnostics.push(format!("cut points unavailable: {e}")),
    }

    let f = per3_map(a);
    let ap = SpherePoint::new(av);
    let fate = orbit_fate_with(&f, ap, &OrbitConfig::with_budget(cfg.budget));
    if fate.period() == Some(3) {
        if let Some(target) = anchor(&fate) {
            match immediate_basin_membership_with(&f, ap, target, &cfg.basin) {
                Ok(true) if chordal_distance(target, SpherePoint::ONE) < cfg.match_tol => {
                    return RegionAnalysis {
                        region: Region::B1,
                        evidence: Vec::new(),
                        diagnostics,
                    }
                }
                Ok(true) if target.is_infinity() || chordal_distance(target, SpherePoint::Infinity) < cfg.match_tol => {
                    return RegionAnalysis {
                        region: Region::BInfinity,
                        evidence: Vec::new(),
                        diagnostics,
                    }
                }
                Ok(true) => diagnostics.push("the free critical point lies in the component of 0".into()),
                Ok(false) => {}
                Err(e) => {
                    diagnostics.push(format!("basin membership: {e}"));
                    return near(diagnostics, Vec::new());
                }
            }
        }
    }

    let fixed = match fixed_points(&f) {
        Ok(p) => p,
        Err(e) => {
            diagnostics.push(format!("fixed points: {e}"));
            return near(diagnostics, Vec::new());
        }
    };
    let evidence: Vec<ContactEvidence> = fixed
        .iter()
        .filter(|p| p.stability == Stability::Repelling)
        .map(|p| contact_test(&f, p.location, &CRITICAL_CYCLE, &cfg.contact))
        .collect();
    if evidence.iter().any(|e| e.is_triple()) {
        let region = if av.im.abs() < cfg.real_axis_tol {
            diagnostics.push("triple contact on the real axis".into());
            Region::NearBoundary
        } else if av.im > 0.0 {
            Region::Omega2
        } else {
            Region::Omega3
        };
        return RegionAnalysis {
            region,
            evidence,
            diagnostics,
        };
    }
    if evidence.iter().any(|e| e.low_confidence) {
        diagnostics.push("unsettled samples at the smallest contact radius".into());
        return near(diagnostics, evidence);
    }
    RegionAnalysis {
        region: Region::Omega1,
        evidence,
        diagnostics,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(with = "serde_complex")]
    pub a: Complex,
    #[serde(rename = "type")]
    pub hyperbolic_type: HyperbolicType,
    pub region: Region,
    pub second_cycle: Option<Cycle>,
    pub verdict: Verdict,
    pub reason: String,
    pub evidence: Vec<ContactEvidence>,
    pub diagnostics: Vec<String>,
}

impl ClassificationReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("a: {}\n", crate::format_complex(self.a)));
        out.push_str(&format!("type: {}\n", self.hyperbolic_type));
        out.push_str(&format!("region: {}\n", self.region));
        match &self.second_cycle {
            Some(c) => {
                let pts: Vec<String> = c.points.iter().map(|p| p.to_string()).collect();
                out.push_str(&format!(
                    "second_cycle: period {} multiplier {} points [{}]\n",
                    c.period,
                    crate::format_complex(c.multiplier),
                    pts.join(", ")
                ));
            }
            None => out.push_str("second_cycle: none\n"),
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out.push_str(&format!("reason: {}\n", self.reason));
        for e in &self.evidence {
            let list =
                |s: &std::collections::BTreeSet<usize>| s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
            out.push_str(&format!(
                "evidence: point {} phases {{{}}} sampled {{{}}} by {:?}{}\n",
                e.point,
                list(&e.phases_seen),
                list(&e.sampled),
                e.confirmation,
                if e.low_confidence { " low-confidence" } else { "" }
            ));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("diagnostic: {d}\n"));
        }
        out
    }
}

/// The attracting cycle other than the critical one, if the critical orbit
/// of `a` settles on one.
fn second_cycle(f: &RationalMap, fates: &[OrbitFate], tol: f64) -> Option<Cycle> {
    fates.iter().find_map(|fate| match fate {
        OrbitFate::Converged { cycle, period, .. }
            if !(*period == 3 && cycle.iter().any(|p| chordal_distance(*p, SpherePoint::ZERO) < tol)) =>
        {
            Some(Cycle::from_points(f, cycle.clone()))
        }
        _ => None,
    })
}

pub fn sierpinski_verdict(a: Per3Parameter) -> ClassificationReport {
    sierpinski_verdict_with(a, &ClassifyConfig::default())
}

pub fn sierpinski_verdict_with(a: Per3Parameter, cfg: &ClassifyConfig) -> ClassificationReport {
    let f = per3_map(a);
    let region = analyze_region(a, cfg);
    let ty = analyze_type(&f, cfg);
    let second = second_cycle(&f, &ty.fates, cfg.match_tol);
    let mut diagnostics = region.diagnostics.clone();
    diagnostics.extend(ty.diagnostics.iter().cloned());
    let mut evidence = region.evidence.clone();

    let (verdict, reason) = match region.region {
        Region::B1 | Region::BInfinity => (
            Verdict::NotSierpinski,
            format!("C(a): a lies in the bitransitive component {}", region.region),
        ),
        Region::Omega2 | Region::Omega3 => (
            Verdict::NotSierpinski,
            "C(b): a fixed point lies on the boundary of all three critical-cycle components".to_string(),
        ),
        Region::NearBoundary => (
            Verdict::Inconclusive,
            "region undecided near the boundary of the pieces".to_string(),
        ),
        Region::Omega1 => match ty.kind {
            HyperbolicType::Capture => (
                Verdict::Sierpinski,
                "C(c): capture parameter in the airplane piece".to_string(),
            ),
            HyperbolicType::Disjoint => {
                let cycle = second.as_ref().expect("disjoint type has a second cycle");
                disjoint_case(&f, cycle, cfg, &mut evidence)
            }
            HyperbolicType::Unresolved => (
                Verdict::Inconclusive,
                "the free critical orbit did not settle".to_string(),
            ),
            other => (
                Verdict::Inconclusive,
                format!("{other} type in the airplane piece is not covered"),
            ),
        },
    };
    ClassificationReport {
        a: a.value(),
        hyperbolic_type: ty.kind,
        region: region.region,
        second_cycle: second,
        verdict,
        reason,
        evidence,
        diagnostics,
    }
}

fn disjoint_case(
    f: &RationalMap,
    cycle: &Cycle,
    cfg: &ClassifyConfig,
    evidence: &mut Vec<ContactEvidence>,
) -> (Verdict, String) {
    let m = cycle.period;
    if m <= 2 {
        return (
            Verdict::NotSierpinski,
            format!(
                "C(d) needs m >= 3 with 3 not dividing m; here m = {m}, and the basin of a period-{m} attractor has a component that is not a Jordan domain"
            ),
        );
    }
    if m.is_multiple_of(3) {
        return (Verdict::Inconclusive, format!("C(d) does not apply: 3 divides m = {m}"));
    }
    if m > MAX_PERIOD {
        return (
            Verdict::Inconclusive,
            format!("period cap: m = {m} exceeds {MAX_PERIOD}"),
        );
    }
    let mut low = false;
    for j in (1..m).filter(|j| m.is_multiple_of(*j)) {
        let points = match periodic_points(f, j) {
            Ok(p) => p,
            Err(e) => return (Verdict::Inconclusive, format!("period-{j} points: {e}")),
        };
        for p in points.iter().filter(|p| p.stability == Stability::Repelling) {
            let e = contact_test(f, p.location, &cycle.points, &cfg.contact);
            low |= e.low_confidence;
            let touches = !e.phases_seen.is_empty();
            let at = e.point;
            evidence.push(e);
            if touches {
                return (
                    Verdict::NotSierpinski,
                    format!("C(d) fails: the period-{j} point {at} lies on the boundary of the period-{m} basin"),
                );
            }
        }
    }
    if low {
        return (Verdict::Inconclusive, "contact samples did not settle".to_string());
    }
    (
        Verdict::Sierpinski,
        format!("C(d): m = {m}, and no periodic point of period dividing m touches the period-{m} basin"),
    )
}
