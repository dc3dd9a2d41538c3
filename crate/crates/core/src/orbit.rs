//! Iteration on the sphere and detection of attracting cycles.

use serde::{Deserialize, Serialize};

use crate::rational::RationalMap;
use crate::sphere::{chart_distance, chordal_distance, ChartKind, ChartPoint, Complex, SpherePoint};

/// Tuning of [`orbit_fate_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    /// Maximum number of applications of `f`.
    pub budget: usize,
    /// Chordal distance at which a return counts as a candidate period.
    pub capture_radius: f64,
    /// Largest detectable period.
    pub window: usize,
    /// Minimum chordal distance between distinct points of a reported cycle.
    pub cycle_separation: f64,
    /// Cycles up to this period are Newton-polished when `refine` is set.
    pub period_refine_max: usize,
    pub refine: bool,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            budget: 10_000,
            capture_radius: 1e-6,
            window: 64,
            cycle_separation: 1e-4,
            period_refine_max: 12,
            refine: true,
        }
    }
}

impl OrbitConfig {
    pub fn with_budget(budget: usize) -> Self {
        OrbitConfig {
            budget,
            ..OrbitConfig::default()
        }
    }
}

/// Multipliers within this distance of the unit circle are indifferent.
pub const INDIFFERENT_TOL: f64 = 1e-6;

/// Multipliers below this modulus are superattracting.
pub const SUPERATTRACTING_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Superattracting,
    Attracting,
    Indifferent,
    Repelling,
}

impl Stability {
    /// Classifies a multiplier, treating `| |m| - 1 | <= indifferent_tol` as
    /// indifferent.
    pub fn classify(multiplier: Complex, indifferent_tol: f64) -> Self {
        let r = multiplier.norm();
        if r < SUPERATTRACTING_TOL {
            Stability::Superattracting
        } else if r < 1.0 - indifferent_tol {
            Stability::Attracting
        } else if r > 1.0 + indifferent_tol {
            Stability::Repelling
        } else {
            Stability::Indifferent
        }
    }
}

/// A periodic cycle listed in orbit order, `points[i+1] = f(points[i])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub points: Vec<SpherePoint>,
    pub period: usize,
    #[serde(with = "crate::serde_complex")]
    pub multiplier: Complex,
}

impl Cycle {
    /// Builds a cycle from points in orbit order and attaches its multiplier.
    pub fn from_points(f: &RationalMap, points: Vec<SpherePoint>) -> Self {
        let period = points.len();
        let multiplier = multiplier_of(f, &points);
        Cycle {
            points,
            period,
            multiplier,
        }
    }

    pub fn stability(&self) -> Stability {
        Stability::classify(self.multiplier, INDIFFERENT_TOL)
    }

    /// True when both cycles have the same period and share a point up to
    /// `tol`.
    pub fn same_as(&self, other: &Cycle, tol: f64) -> bool {
        self.period == other.period && other.points.iter().any(|q| chordal_distance(self.points[0], *q) < tol)
    }

    /// Index of the cycle point nearest to `p`.
    pub fn nearest(&self, p: SpherePoint) -> usize {
        nearest_index(&self.points, p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrbitFate {
    /// The orbit is attracted to `cycle` (listed in canonical order, see
    /// [`canonical_rotation`]). After `t` iterations it is near
    /// `cycle[(phase + t) % period]`.
    Converged {
        cycle: Vec<SpherePoint>,
        period: usize,
        phase: usize,
        steps: usize,
    },
    Unresolved {
        steps: usize,
    },
}

impl OrbitFate {
    pub fn is_converged(&self) -> bool {
        matches!(self, OrbitFate::Converged { .. })
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            OrbitFate::Converged { period, .. } => Some(*period),
            OrbitFate::Unresolved { .. } => None,
        }
    }

    pub fn phase(&self) -> Option<usize> {
        match self {
            OrbitFate::Converged { phase, .. } => Some(*phase),
            OrbitFate::Unresolved { .. } => None,
        }
    }

    pub fn steps(&self) -> usize {
        match self {
            OrbitFate::Converged { steps, .. } | OrbitFate::Unresolved { steps } => *steps,
        }
    }

    pub fn cycle(&self) -> Option<&[SpherePoint]> {
        match self {
            OrbitFate::Converged { cycle, .. } => Some(cycle),
            OrbitFate::Unresolved { .. } => None,
        }
    }

    /// True when the orbit converged to a cycle of the given period that
    /// contains a point within `tol` of `p`.
    pub fn reaches(&self, period: usize, p: SpherePoint, tol: f64) -> bool {
        match self {
            OrbitFate::Converged { cycle, period: q, .. } => {
                *q == period && cycle.iter().any(|c| chordal_distance(*c, p) < tol)
            }
            OrbitFate::Unresolved { .. } => false,
        }
    }
}

/// `f^n(z)`.
pub fn iterate(f: &RationalMap, z: SpherePoint, n: usize) -> SpherePoint {
    let mut p = ChartPoint::from(z);
    for _ in 0..n {
        p = f.apply_chart(p);
    }
    p.to_sphere()
}

/// [`orbit_fate_with`] at default tolerances and the given budget.
pub fn orbit_fate(f: &RationalMap, z: SpherePoint, budget: usize) -> OrbitFate {
    orbit_fate_with(f, z, &OrbitConfig::with_budget(budget))
}

/// `4 |cross|^2 < r^2 |p|^2 |q|^2`, i.e. chordal distance below `r`, without
/// divisions or square roots.
#[inline]
fn within(p: ChartPoint, q: ChartPoint, r2: f64) -> bool {
    let (p0, p1) = p.homogeneous();
    let (q0, q1) = q.homogeneous();
    let cross = (p0 * q1 - p1 * q0).norm_sqr();
    4.0 * cross < r2 * (p0.norm_sqr() + p1.norm_sqr()) * (q0.norm_sqr() + q1.norm_sqr())
}

/// Follows the orbit of `z` until it settles on an attracting cycle or the
/// budget runs out.
///
/// A snapshot point is kept and compared with each following iterate; the
/// first return within the capture radius, at a lag no larger than the
/// window, proposes that lag as a period. The snapshot is moved forward
/// every `window` steps. A proposed period is accepted after two further
/// returns at the same lag that do not grow, and is then reduced to the
/// smallest divisor at which the orbit already closes up. Cycles whose
/// multiplier is not strictly inside the unit disk are reported unresolved.
pub fn orbit_fate_with(f: &RationalMap, z: SpherePoint, cfg: &OrbitConfig) -> OrbitFate {
    let w = cfg.window.max(1);
    let r2 = cfg.capture_radius * cfg.capture_radius;
    let mut ring = vec![ChartPoint::Plane(Complex::new(0.0, 0.0)); w + 1];
    let len = ring.len();
    let mut cur = ChartPoint::from(z);
    ring[0] = cur;
    let mut snapshot = cur;
    let mut snapshot_step = 0usize;
    // (period, step of next check, last return distance, confirmations)
    let mut candidate: Option<(usize, usize, f64, u8)> = None;

    for t in 1..=cfg.budget {
        cur = f.apply_chart(cur);
        ring[t % len] = cur;
        match candidate {
            Some((p, next, last, count)) if t == next => {
                let d = chart_distance(cur, ring[(t - p) % len]);
                if d < cfg.capture_radius && d <= last + 1e-14 {
                    if count + 1 >= 2 {
                        return finish(f, cfg, &ring, t, p);
                    }
                    candidate = Some((p, t + p, d, count + 1));
                } else {
                    candidate = None;
                    snapshot = cur;
                    snapshot_step = t;
                }
            }
            Some(_) => {}
            None => {
                let lag = t - snapshot_step;
                if within(cur, snapshot, r2) {
                    let d = chart_distance(cur, snapshot);
                    candidate = Some((lag, t + lag, d, 0));
                } else if lag >= w {
                    snapshot = cur;
                    snapshot_step = t;
                }
            }
        }
    }
    OrbitFate::Unresolved { steps: cfg.budget }
}

fn finish(f: &RationalMap, cfg: &OrbitConfig, ring: &[ChartPoint], t: usize, p: usize) -> OrbitFate {
    let len = ring.len();
    let at = |s: usize| ring[s % len];
    let mut period = p;
    for d in 1..p {
        if p.is_multiple_of(d) && chart_distance(at(t), at(t - d)) < cfg.cycle_separation {
            period = d;
            break;
        }
    }
    // at(t - period + 1 ..= t) are the raw cycle points in orbit order.
    let mut raw: Vec<SpherePoint> = (0..period).map(|k| at(t + 1 - period + k).to_sphere()).collect();
    for i in 0..period {
        for j in (i + 1)..period {
            if chordal_distance(raw[i], raw[j]) < cfg.cycle_separation {
                return OrbitFate::Unresolved { steps: t };
            }
        }
    }
    if cfg.refine && period <= cfg.period_refine_max {
        // A parabolic cycle is a multiple root of f^n(z) - z; Newton only
        // creeps towards it and the polished multiplier ends up on the unit
        // circle, which rejects it below.
        for p in raw.iter_mut() {
            if let Some(q) = newton_cycle_point(f, *p, period, 40) {
                if chordal_distance(q, *p) < 1e-2 {
                    *p = q;
                }
            }
        }
    }
    if multiplier_of(f, &raw).norm() >= 1.0 - INDIFFERENT_TOL {
        return OrbitFate::Unresolved { steps: t };
    }
    // raw[period - 1] is the current point, reached after t steps.
    let shift = canonical_shift(&raw);
    let cycle: Vec<SpherePoint> = (0..period).map(|k| raw[(k + shift) % period]).collect();
    // current point has canonical index (period - 1 - shift) mod period
    let current = (period - 1 + period - shift) % period;
    let phase = (current + period - t % period) % period;
    OrbitFate::Converged {
        cycle,
        period,
        phase,
        steps: t,
    }
}

/// Index of the starting point of the canonical rotation of a cycle: the
/// point nearest to 0 on the sphere (lowest third coordinate), ties broken
/// by the other two coordinates.
fn canonical_shift(points: &[SpherePoint]) -> usize {
    let key = |p: &SpherePoint| {
        let v = p.unit_vector();
        (v[2], v[0], v[1])
    };
    let mut best = 0;
    for i in 1..points.len() {
        if key(&points[i]).partial_cmp(&key(&points[best])) == Some(std::cmp::Ordering::Less) {
            best = i;
        }
    }
    best
}

/// Rotates a cycle (given in orbit order) so that it starts at the point
/// nearest to 0 on the sphere.
pub fn canonical_rotation(points: &[SpherePoint]) -> Vec<SpherePoint> {
    let s = canonical_shift(points);
    (0..points.len()).map(|k| points[(k + s) % points.len()]).collect()
}

fn nearest_index(points: &[SpherePoint], p: SpherePoint) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, q) in points.iter().enumerate() {
        let d = chordal_distance(*q, p);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Product of derivatives along `points`, each read from the chart of one
/// point into the chart of the next. Chart changes cancel around the cycle.
fn multiplier_of(f: &RationalMap, points: &[SpherePoint]) -> Complex {
    let n = points.len();
    let mut m = Complex::new(1.0, 0.0);
    for i in 0..n {
        let p = ChartPoint::from(points[i]);
        let next = ChartPoint::from(points[(i + 1) % n]).kind();
        match f.step_into(p, next).1 {
            Some(d) => m *= d,
            None => return Complex::new(f64::INFINITY, 0.0),
        }
    }
    m
}

/// Multiplier of a cycle: the derivative of `f^n` along it.
pub fn cycle_multiplier(f: &RationalMap, c: &Cycle) -> Complex {
    multiplier_of(f, &c.points)
}

/// `f^n` and its derivative at `p`, read in the chart `kind` at both ends.
/// `None` when `p` or the image is the pole of that chart.
pub(crate) fn iterate_in_chart(f: &RationalMap, p: Complex, kind: ChartKind, n: usize) -> Option<(Complex, Complex)> {
    let mut q = match kind {
        ChartKind::Plane => ChartPoint::Plane(p),
        ChartKind::Inverse => ChartPoint::Inverse(p),
    };
    let mut deriv = Complex::new(1.0, 0.0);
    for i in 0..n {
        if i + 1 == n {
            let (img, d) = f.step_into(q, kind);
            deriv *= d?;
            return Some((img.coord_in(kind)?, deriv));
        }
        let (img, d) = f.step_natural(q);
        deriv *= d;
        q = img;
    }
    Some((p, deriv))
}

/// Newton's method on `f^n(z) - z`, worked in the chart where the start
/// point has modulus at most one. Returns the best iterate if it improved
/// the residual.
pub(crate) fn newton_cycle_point(f: &RationalMap, start: SpherePoint, n: usize, steps: usize) -> Option<SpherePoint> {
    let cp = ChartPoint::from(start);
    let kind = cp.kind();
    let to_sphere = |w: Complex| match kind {
        ChartKind::Plane => ChartPoint::Plane(w).to_sphere(),
        ChartKind::Inverse => ChartPoint::Inverse(w).to_sphere(),
    };
    let mut w = cp.coord();
    let (fw, _) = iterate_in_chart(f, w, kind, n)?;
    let mut best = (w, (fw - w).norm());
    for _ in 0..steps {
        if best.1 == 0.0 {
            break;
        }
        let (fw, d) = iterate_in_chart(f, w, kind, n)?;
        let g = fw - w;
        let dg = d - 1.0;
        if dg == Complex::new(0.0, 0.0) {
            break;
        }
        let step = g / dg;
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        w = next;
        if step.norm() <= 1e-15 * (1.0 + w.norm()) {
            if let Some((fw, _)) = iterate_in_chart(f, w, kind, n) {
                if (fw - w).norm() <= best.1 {
                    best = (w, (fw - w).norm());
                }
            }
            break;
        }
        let Some((fw, _)) = iterate_in_chart(f, w, kind, n) else {
            break;
        };
        let res = (fw - w).norm();
        if res < best.1 {
            best = (w, res);
        } else if res > 4.0 * best.1 {
            break;
        }
    }
    Some(to_sphere(best.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Connected,
    TotallyDisconnected,
    Unknown,
}

/// Connectivity of the Julia set of a quadratic map read off from its
/// critical orbits: totally disconnected when both are attracted to one
/// fixed point, connected when they go to different cycles or to a cycle of
/// period at least two. Anything unresolved, or a map of another degree,
/// gives `Unknown`.
pub fn connectivity_heuristic(f: &RationalMap) -> Connectivity {
    connectivity_with(f, &OrbitConfig::default())
}

pub fn connectivity_with(f: &RationalMap, cfg: &OrbitConfig) -> Connectivity {
    if f.degree() != 2 {
        return Connectivity::Unknown;
    }
    let Ok(cps) = f.critical_points() else {
        return Connectivity::Unknown;
    };
    if cps.len() != 2 {
        return Connectivity::Unknown;
    }
    let a = orbit_fate_with(f, cps[0], cfg);
    let b = orbit_fate_with(f, cps[1], cfg);
    match (&a, &b) {
        (
            OrbitFate::Converged {
                cycle: ca, period: pa, ..
            },
            OrbitFate::Converged {
                cycle: cb, period: pb, ..
            },
        ) => {
            let same = pa == pb && cb.iter().any(|q| chordal_distance(ca[0], *q) < cfg.cycle_separation);
            if same && *pa == 1 {
                Connectivity::TotallyDisconnected
            } else {
                Connectivity::Connected
            }
        }
        _ => Connectivity::Unknown,
    }
}
