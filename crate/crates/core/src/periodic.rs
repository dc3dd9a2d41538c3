//! Periodic points of small period, found as roots of `f^n(z) - z`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbit::{canonical_rotation, iterate, iterate_in_chart, newton_cycle_point, Cycle, Stability};
use crate::poly::{self, RootError};

use crate::rational::RationalMap;
use crate::sphere::{chordal_distance, ChartPoint, Complex, SpherePoint};

/// Largest supported period.
pub const MAX_PERIOD: usize = 6;

/// Largest supported degree of `f^n`.
pub const MAX_ITERATE_DEGREE: usize = 64;

/// Required chordal residual `d(f^n(z), z)` of a returned point.
pub const PERIODIC_RESIDUAL: f64 = 1e-9;

/// Polished roots closer than this are one point counted with multiplicity.
pub const MERGE_TOL: f64 = 1e-7;

/// Distinct roots closer than this are flagged as coalescing.
pub const COALESCE_TOL: f64 = 1e-5;

/// Band around `|multiplier| = 1` used for periodic points.
pub const PERIODIC_INDIFFERENT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodicError {
    #[error("period {0} is outside 1..={MAX_PERIOD}")]
    PeriodOutOfRange(usize),
    #[error("f^{period} has degree {degree}, above the cap {MAX_ITERATE_DEGREE}")]
    DegreeCap { period: usize, degree: usize },
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error("periodic point residual {worst:e} exceeds {PERIODIC_RESIDUAL:e}")]
    Residual { residuals: Vec<f64>, worst: f64 },
    #[error("found {found} points of exact period {period}, expected {expected}")]
    Deflation {
        period: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub location: SpherePoint,
    pub exact_period: usize,
    #[serde(with = "crate::serde_complex")]
    pub multiplier: Complex,
    pub stability: Stability,
    /// Number of coinciding roots of `f^n(z) - z` merged into this point.
    pub multiplicity: usize,
    /// Chordal distance from `f^n(z)` to `z`.
    pub residual: f64,
    /// Set when another root lies within [`COALESCE_TOL`] or the multiplier
    /// of `f^n` is close to 1, so the point is a numerically multiple root.
    pub coalesced: bool,
}

/// A cycle of exact period `n` together with its points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicCycle {
    pub cycle: Cycle,
    pub stability: Stability,
    pub coalesced: bool,
}

/// Number of points of exact period `n` of a degree-`d` map, counted with
/// multiplicity.
pub fn dynatomic_count(d: usize, n: usize) -> usize {
    let mut total: i64 = 0;
    for k in 1..=n {
        if n.is_multiple_of(k) {
            total += mobius_mu(n / k) * (d.pow(k as u32) as i64 + 1);
        }
    }
    total as usize
}

fn mobius_mu(mut n: usize) -> i64 {
    let mut mu = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Newton correction for `U(z) = u_n(z) - z v_n(z)`, where `[u_n : v_n]` is
/// the homogeneous lift of `f^n` applied to `[z : 1]`. Points with `|z| > 1`
/// are evaluated at `[1 : w]`, `w = 1/z`, with the reversed formula, so the
/// coefficients of `f^n` are never expanded.
fn fixed_point_ratio(f: &RationalMap, n: usize, z: Complex) -> Option<Complex> {
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let inverse = z.norm_sqr() > 1.0;
    let t = if inverse { z.inv() } else { z };
    let (mut p, mut dp) = if inverse {
        ((one, t), (zero, one))
    } else {
        ((t, one), (one, zero))
    };
    for _ in 0..n {
        let (q, dq) = f.lift_step(p, dp);
        let s = q.0.norm().max(q.1.norm());
        if s == 0.0 || !s.is_finite() {
            return None;
        }
        p = (q.0 / s, q.1 / s);
        dp = (dq.0 / s, dq.1 / s);
    }
    let ((u, v), (du, dv)) = (p, dp);
    if inverse {
        // U(z) = z^D R(w), R(w) = u w - v
        let r = u * t - v;
        let dr = du * t + u - dv;
        let big_d = f.degree().pow(n as u32) as f64 + 1.0;
        let den = r * big_d - t * dr;
        if den == zero {
            return None;
        }
        Some(z * r / den)
    } else {
        let g = u - t * v;
        let dg = du - v - t * dv;
        if dg == zero {
            return None;
        }
        Some(g / dg)
    }
}

fn check_period(f: &RationalMap, n: usize) -> Result<(), PeriodicError> {
    if n == 0 || n > MAX_PERIOD {
        return Err(PeriodicError::PeriodOutOfRange(n));
    }
    let degree = f.degree().checked_pow(n as u32).unwrap_or(usize::MAX);
    if degree > MAX_ITERATE_DEGREE {
        return Err(PeriodicError::DegreeCap { period: n, degree });
    }
    Ok(())
}

/// Smallest `k` dividing `n` such that `z` is within `tol` of a point of
/// period `k` (measured by [`scaled_residual`]).
fn minimal_period(f: &RationalMap, z: SpherePoint, n: usize, tol: f64) -> usize {
    (1..n)
        .filter(|k| n.is_multiple_of(*k))
        .find(|&k| scaled_residual(f, z, k) < tol)
        .unwrap_or(n)
}

/// Sort key for deterministic output: position on the sphere, from 0
/// upwards, then by the two horizontal coordinates.
fn sphere_key(p: &SpherePoint) -> (f64, f64, f64) {
    let v = p.unit_vector();
    (v[2], v[0], v[1])
}

fn cmp_points(a: &SpherePoint, b: &SpherePoint) -> std::cmp::Ordering {
    sphere_key(a)
        .partial_cmp(&sphere_key(b))
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// All points of exact period `n`, with multiplicity, multipliers of the
/// corresponding cycles and stability.
pub fn periodic_points(f: &RationalMap, n: usize) -> Result<Vec<PeriodicPoint>, PeriodicError> {
    let cycles = periodic_cycles(f, n)?;
    let mut out = Vec::new();
    for pc in cycles {
        for (i, &p) in pc.cycle.points.iter().enumerate() {
            let rotated: Vec<SpherePoint> = (0..n).map(|k| pc.cycle.points[(i + k) % n]).collect();
            let m = Cycle::from_points(f, rotated).multiplier;
            out.push(PeriodicPoint {
                location: p,
                exact_period: n,
                multiplier: m,
                stability: Stability::classify(m, PERIODIC_INDIFFERENT_TOL),
                multiplicity: 1,
                residual: chordal_distance(iterate(f, p, n), p),
                coalesced: pc.coalesced,
            });
        }
    }
    if n == 1 {
        return fixed_points(f);
    }
    Ok(out)
}

/// Fixed points with multiplicity; for a degree-`d` map the multiplicities
/// add up to `d + 1`.
pub fn fixed_points(f: &RationalMap) -> Result<Vec<PeriodicPoint>, PeriodicError> {
    let roots = solve(f, 1)?;
    Ok(roots
        .into_iter()
        .map(|r| {
            let m = Cycle::from_points(f, vec![r.point]).multiplier;
            PeriodicPoint {
                location: r.point,
                exact_period: 1,
                multiplier: m,
                stability: Stability::classify(m, PERIODIC_INDIFFERENT_TOL),
                multiplicity: r.multiplicity,
                residual: chordal_distance(iterate(f, r.point, 1), r.point),
                coalesced: r.coalesced,
            }
        })
        .collect())
}

struct Root {
    point: SpherePoint,
    multiplicity: usize,
    coalesced: bool,
}

/// Distinct roots of exact period `n` with multiplicity.
fn solve(f: &RationalMap, n: usize) -> Result<Vec<Root>, PeriodicError> {
    check_period(f, n)?;
    let total = f.degree().pow(n as u32) + 1;
    let mut candidates: Vec<SpherePoint> = Vec::new();
    if chordal_distance(iterate(f, SpherePoint::Infinity, n), SpherePoint::Infinity) < PERIODIC_RESIDUAL {
        candidates.push(SpherePoint::Infinity);
    }
    let finite = total - candidates.len();
    let roots = poly::aberth(
        poly::circle_start(finite, 1.0),
        |z| fixed_point_ratio(f, n, z),
        |_| false,
    );
    candidates.extend(roots.into_iter().map(SpherePoint::new));

    // Newton on f^n can jump between nearby roots when the map is strongly
    // expanding, so a polished root may only move a small fraction of the
    // distance to its nearest neighbour.
    let mut polished = Vec::with_capacity(candidates.len());
    for (i, &c) in candidates.iter().enumerate() {
        let gap = candidates
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &o)| chordal_distance(c, o))
            .fold(f64::INFINITY, f64::min);
        let p = match newton_cycle_point(f, c, n, 40) {
            Some(p) if chordal_distance(p, c) < 0.1 * gap => p,
            _ => c,
        };
        polished.push(p);
    }
    // For a strongly repelling point the image residual is dominated by
    // rounding amplified by |(f^n)'|; dividing by it bounds the distance to
    // the exact periodic point instead.
    let residuals: Vec<f64> = polished.iter().map(|&z| scaled_residual(f, z, n)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst >= PERIODIC_RESIDUAL || !worst.is_finite() {
        return Err(PeriodicError::Residual { residuals, worst });
    }

    // merge duplicates, keeping multiplicity
    let mut merged: Vec<Root> = Vec::new();
    for z in polished {
        if let Some(r) = merged.iter_mut().find(|r| chordal_distance(r.point, z) < MERGE_TOL) {
            r.multiplicity += 1;
        } else {
            merged.push(Root {
                point: z,
                multiplicity: 1,
                coalesced: false,
            });
        }
    }
    for i in 0..merged.len() {
        let near =
            (0..merged.len()).any(|j| j != i && chordal_distance(merged[i].point, merged[j].point) < COALESCE_TOL);
        let deriv = orbit_derivative(f, merged[i].point, n);
        merged[i].coalesced = near || merged[i].multiplicity > 1 || (deriv - 1.0).norm() < 1e-4;
    }
    merged.retain(|r| minimal_period(f, r.point, n, MERGE_TOL) == n);
    merged.sort_by(|a, b| cmp_points(&a.point, &b.point));

    let expected = dynatomic_count(f.degree(), n);
    let found: usize = merged.iter().map(|r| r.multiplicity).sum();
    if found != expected && !merged.iter().any(|r| r.coalesced) {
        return Err(PeriodicError::Deflation {
            period: n,
            expected,
            found,
        });
    }
    Ok(merged)
}

/// `d(f^n(z), z) / max(1, |(f^n)'(z)|)` with the derivative taken on the
/// sphere, an estimate of the distance from
/// `z` to the nearby exact point of period dividing `n`.
pub fn scaled_residual(f: &RationalMap, z: SpherePoint, n: usize) -> f64 {
    // derivative between the natural charts at both ends, comparable to the
    // spherical derivative up to a factor of four
    let mut p = ChartPoint::from(z);
    let mut d = 1.0;
    for _ in 0..n {
        let (q, dq) = f.step_natural(p);
        d *= dq.norm();
        p = q;
    }
    let scale = if d.is_finite() { d.max(1.0) } else { 1.0 };
    chordal_distance(iterate(f, z, n), z) / scale
}

/// Derivative of `f^n` at `p`, read in the chart of `p` at both ends.
fn orbit_derivative(f: &RationalMap, p: SpherePoint, n: usize) -> Complex {
    let cp = ChartPoint::from(p);
    iterate_in_chart(f, cp.coord(), cp.kind(), n)
        .map(|(_, d)| d)
        .unwrap_or(Complex::new(f64::INFINITY, 0.0))
}

/// Cycles of exact period `n`, each listed in canonical order.
pub fn periodic_cycles(f: &RationalMap, n: usize) -> Result<Vec<PeriodicCycle>, PeriodicError> {
    let roots = solve(f, n)?;
    let mut used = vec![false; roots.len()];
    let mut cycles: Vec<PeriodicCycle> = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut pts = vec![roots[i].point];
        let mut coalesced = roots[i].coalesced;
        let mut cur = roots[i].point;
        for _ in 1..n {
            let img = f.eval(cur);
            let best = (0..roots.len())
                .filter(|&j| !used[j])
                .map(|j| (j, chordal_distance(roots[j].point, img)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            cur = match best {
                Some((j, d)) if d < 1e-6 => {
                    used[j] = true;
                    coalesced |= roots[j].coalesced;
                    roots[j].point
                }
                _ => img,
            };
            pts.push(cur);
        }
        let cycle = Cycle::from_points(f, canonical_rotation(&pts));
        let stability = Stability::classify(cycle.multiplier, PERIODIC_INDIFFERENT_TOL);
        cycles.push(PeriodicCycle {
            cycle,
            stability,
            coalesced,
        });
    }
    cycles.sort_by(|a, b| cmp_points(&a.cycle.points[0], &b.cycle.points[0]));
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{per3_map, Per3Parameter};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn fa(a: Complex) -> RationalMap {
        per3_map(Per3Parameter::new(a).unwrap())
    }

    #[test]
    fn dynatomic_counts() {
        let got: Vec<usize> = (1..=6).map(|n| dynatomic_count(2, n)).collect();
        assert_eq!(got, vec![3, 2, 6, 12, 30, 54]);
    }

    #[test]
    fn square_map_fixed_points() {
        let f = RationalMap::quadratic(c(0.0, 0.0));
        let pts = fixed_points(&f).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].location, SpherePoint::ZERO);
        assert!(chordal_distance(pts[1].location, SpherePoint::ONE) < 1e-15);
        assert!(pts[2].location.is_infinity());
        let m: Vec<Complex> = pts.iter().map(|p| p.multiplier).collect();
        assert_eq!(m, vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(pts[1].stability, Stability::Repelling);
    }

    #[test]
    fn square_map_two_cycle() {
        let f = RationalMap::quadratic(c(0.0, 0.0));
        let cycles = periodic_cycles(&f, 2).unwrap();
        assert_eq!(cycles.len(), 1);
        let cy = &cycles[0].cycle;
        for p in &cy.points {
            let z = p.finite().unwrap();
            assert!((z * z + z + 1.0).norm() < 1e-12);
        }
        assert!((cy.multiplier - 4.0).norm() < 1e-12);
    }

    #[test]
    fn airplane_center_fixed_point() {
        let a1 = c(2.324_717_957_244_746, 0.0);
        let pts = fixed_points(&fa(a1)).unwrap();
        let p = pts
            .iter()
            .find(|p| chordal_distance(p.location, SpherePoint::new(a1)) < 1e-10)
            .expect("a1 is fixed");
        assert!(p.multiplier.norm() < 1e-8);
        assert_eq!(p.stability, Stability::Superattracting);
    }

    #[test]
    fn critical_cycle_among_three_cycles() {
        for a in [c(0.4, 0.8), c(-1.3, 0.2), c(3.0, -1.0)] {
            let f = fa(a);
            let cycles = periodic_cycles(&f, 3).unwrap();
            assert_eq!(cycles.len(), 2);
            let crit = cycles
                .iter()
                .find(|pc| {
                    pc.cycle
                        .points
                        .iter()
                        .any(|p| p.is_infinity() || chordal_distance(*p, SpherePoint::Infinity) < 1e-9)
                })
                .expect("critical cycle");
            assert!(crit.cycle.multiplier.norm() < 1e-8);
            assert!(chordal_distance(crit.cycle.points[0], SpherePoint::ZERO) < 1e-9);
        }
    }

    #[test]
    fn period_out_of_range() {
        let f = RationalMap::quadratic(c(0.0, 0.0));
        assert_eq!(periodic_points(&f, 0), Err(PeriodicError::PeriodOutOfRange(0)));
        assert_eq!(periodic_points(&f, 7), Err(PeriodicError::PeriodOutOfRange(7)));
        let g = crate::families::preset("devaney-quartic", None).unwrap().map;
        assert!(matches!(periodic_points(&g, 4), Err(PeriodicError::DegreeCap { .. })));
    }

    fn admissible() -> impl Strategy<Value = Complex> {
        (-1.0f64..3.5, -2.0f64..2.0)
            .prop_map(|(x, y)| c(x, y))
            .prop_filter("away from 0 and 2", |a| a.norm() > 1e-2 && (a - 2.0).norm() > 1e-2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn counts_and_residuals(a in admissible()) {
            let f = fa(a);
            let fixed = fixed_points(&f).unwrap();
            prop_assert_eq!(fixed.iter().map(|p| p.multiplicity).sum::<usize>(), 3);
            for n in 1..=4 {
                let cycles = periodic_cycles(&f, n).unwrap();
                let bound = [3, 1, 2, 3][n - 1];
                prop_assert!(cycles.len() <= bound, "n = {} gave {} cycles", n, cycles.len());
                for pc in &cycles {
                    prop_assert_eq!(pc.cycle.points.len(), n);
                    for (i, p) in pc.cycle.points.iter().enumerate() {
                        prop_assert!(scaled_residual(&f, *p, n) < PERIODIC_RESIDUAL);
                        let next = pc.cycle.points[(i + 1) % n];
                        prop_assert!(chordal_distance(f.eval(*p), next) < 1e-8);
                    }
                }
            }
            for p in periodic_points(&f, 3).unwrap() {
                let cyc = periodic_cycles(&f, 3).unwrap();
                let owner = cyc.iter().find(|pc| pc.cycle.points.iter().any(|q| chordal_distance(*q, p.location) < 1e-9)).unwrap();
                prop_assert!((p.multiplier - owner.cycle.multiplier).norm() < 1e-8 * (1.0 + p.multiplier.norm()));
            }
        }
    }
}
