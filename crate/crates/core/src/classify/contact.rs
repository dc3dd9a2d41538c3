//! Sampling test for boundary contact between a periodic point and the
//! components of an attracting cycle.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::basin::{component_reaches, BasinConfig};
use crate::orbit::{iterate_in_chart, newton_cycle_point, orbit_fate_with, OrbitConfig, OrbitFate};
use crate::rational::RationalMap;
use crate::sphere::{chordal_distance, ChartKind, Complex, Mobius, SpherePoint};

/// The critical 3-cycle `0 -> ∞ -> 1` in phase order.
pub const CRITICAL_CYCLE: [SpherePoint; 3] = [SpherePoint::ZERO, SpherePoint::Infinity, SpherePoint::ONE];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactConfig {
    /// Chordal radii, largest first.
    pub radii: Vec<f64>,
    pub samples: usize,
    pub budget: usize,
    /// Rasters used to confirm a sampled phase when no internal ray is
    /// available.
    pub raster: BasinConfig,
}

impl Default for ContactConfig {
    fn default() -> Self {
        ContactConfig {
            radii: vec![1e-2, 1e-3, 1e-4, 1e-5],
            samples: 64,
            budget: 20_000,
            raster: BasinConfig {
                start_resolution: 96,
                refinements: 2,
                budget: 2000,
                match_tol: 1e-4,
            },
        }
    }
}

/// How sampled phases were checked against the immediate components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confirmation {
    InternalRay,
    Raster,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactEvidence {
    pub point: SpherePoint,
    /// Sampled phases whose immediate component touches the point.
    pub phases_seen: BTreeSet<usize>,
    /// Indices into the target cycle seen at every radius. Preimages of the
    /// basin accumulate on the whole Julia set, so this alone overcounts.
    pub sampled: BTreeSet<usize>,
    pub confirmation: Confirmation,
    pub radii_tested: Vec<f64>,
    pub samples_per_radius: usize,
    /// Some sample at the smallest radius did not settle, or a raster check
    /// changed its answer between the two finest resolutions.
    pub low_confidence: bool,
}

impl ContactEvidence {
    pub fn is_triple(&self) -> bool {
        self.phases_seen.len() == 3
    }
}

/// Points at chordal distance `r` from `p`, equally spaced in angle.
pub fn chordal_circle(p: SpherePoint, r: f64, m: usize) -> Vec<SpherePoint> {
    let back = Mobius::rotation_to_origin(p).inverse();
    let rho = r / (4.0 - r * r).sqrt();
    (0..m)
        .map(|k| {
            let t = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            back.apply(SpherePoint::new(Complex::from_polar(rho, t)))
        })
        .collect()
}

/// Which point of `target` (a cycle in orbit order) the orbit is attached to
/// at times that are multiples of the period, if it converges to that cycle.
pub fn target_phase(fate: &OrbitFate, target: &[SpherePoint], tol: f64) -> Option<usize> {
    let OrbitFate::Converged {
        cycle, period, phase, ..
    } = fate
    else {
        return None;
    };
    if *period != target.len() {
        return None;
    }
    let here = cycle[*phase];
    target.iter().position(|t| chordal_distance(*t, here) < tol)
}

/// Samples circles about `p` and records which components of the `target`
/// cycle's basin the samples fall into. A phase counts only when it appears at
/// every radius and the immediate component of that phase reaches `p`: by
/// internal ray landing for the critical cycle, by raster otherwise.
pub fn contact_test(f: &RationalMap, p: SpherePoint, target: &[SpherePoint], cfg: &ContactConfig) -> ContactEvidence {
    let orbit_cfg = OrbitConfig::with_budget(cfg.budget);
    let mut seen: Option<BTreeSet<usize>> = None;
    let mut low_confidence = false;
    for (i, &r) in cfg.radii.iter().enumerate() {
        let mut here = BTreeSet::new();
        let mut unresolved = false;
        for z in chordal_circle(p, r, cfg.samples) {
            let fate = orbit_fate_with(f, z, &orbit_cfg);
            if !fate.is_converged() {
                unresolved = true;
            }
            if let Some(k) = target_phase(&fate, target, 1e-6) {
                here.insert(k);
            }
        }
        if i + 1 == cfg.radii.len() {
            low_confidence = unresolved;
        }
        seen = Some(match seen {
            None => here,
            Some(s) => s.intersection(&here).copied().collect(),
        });
    }
    let sampled = seen.unwrap_or_default();
    let ray = if target == CRITICAL_CYCLE.as_slice() {
        zero_ray_landing(f)
    } else {
        None
    };
    let (confirmed, confirmation): (BTreeSet<usize>, _) = match ray {
        Some(ray) => (
            (0..3)
                .filter(|&i| chordal_distance(ray.orbit[i], p) < LANDING_MATCH)
                .collect(),
            Confirmation::InternalRay,
        ),
        None => {
            let mut confirmed = BTreeSet::new();
            for &k in &sampled {
                match component_reaches(f, p, target[k], &cfg.raster).as_deref() {
                    Ok([.., true, true]) => {
                        confirmed.insert(k);
                    }
                    Ok([.., false, false]) => {}
                    _ => low_confidence = true,
                }
            }
            (confirmed, Confirmation::Raster)
        }
    };
    ContactEvidence {
        point: p,
        phases_seen: sampled.intersection(&confirmed).copied().collect(),
        sampled,
        confirmation,
        radii_tested: cfg.radii.clone(),
        samples_per_radius: cfg.samples,
        low_confidence,
    }
}

/// [`contact_test`] against the critical cycle with the default schedule.
/// Phase 0 is the basin component of 0, 1 that of ∞ and 2 that of 1.
pub fn triple_contact_test(f: &RationalMap, p: SpherePoint) -> ContactEvidence {
    contact_test(f, p, &CRITICAL_CYCLE, &ContactConfig::default())
}

/// Ray points per doubling of the potential.
const RAY_STEPS: usize = 16;
const RAY_DOUBLINGS: usize = 400;
/// Chordal distance under which a landing point is identified with a
/// periodic point.
const LANDING_MATCH: f64 = 1e-6;

/// Landing point of the invariant internal ray in the component of 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayLanding {
    /// The landing point and its next two images: `orbit[i]` lies on the
    /// boundary of the component of `CRITICAL_CYCLE[i]`.
    pub orbit: [SpherePoint; 3],
    /// Exact period of the landing point, 1 or 3.
    pub period: usize,
    pub doublings: usize,
}

/// For a map with the superattracting cycle `0 -> ∞ -> 1`, `f^3` acts on the
/// component of 0 like `z^2` on the disk, so that component has exactly one
/// boundary point fixed by `f^3`: where the ray of angle 0 lands. The ray is
/// traced by pulling back a short initial arc near 0 under `f^3`, choosing
/// each preimage by continuation along the ray. `None` if 0 is not on such a
/// cycle or the ray does not settle.
pub fn zero_ray_landing(f: &RationalMap) -> Option<RayLanding> {
    let back = f.eval(f.eval(f.eval(SpherePoint::ZERO)));
    if chordal_distance(back, SpherePoint::ZERO) > 1e-12 {
        return None;
    }
    let cube = |w: Complex| iterate_in_chart(f, w, ChartKind::Plane, 3);
    // f^3(z) = k z^2 + O(z^4) after symmetrizing, so the Böttcher coordinate
    // is k z to first order
    let h = 1e-3;
    let k = (cube(Complex::new(h, 0.0))?.0 + cube(Complex::new(-h, 0.0))?.0) / (2.0 * h * h);
    if !k.is_finite() || k.norm() == 0.0 {
        return None;
    }
    let s0 = (0.01 * k.norm()).powi(2).min(0.01);
    let mut ray: Vec<Complex> = (0..=RAY_STEPS)
        .map(|j| Complex::new(s0.powf(0.5f64.powf(j as f64 / RAY_STEPS as f64)), 0.0) / k)
        .collect();
    for doubling in 1..=RAY_DOUBLINGS {
        for _ in 0..RAY_STEPS {
            let n = ray.len();
            let target = ray[n - RAY_STEPS];
            let last = ray[n - 1];
            let gap = (last - ray[n - 2]).norm();
            let mut w = last * 2.0 - ray[n - 2];
            for _ in 0..40 {
                let (v, d) = cube(w)?;
                let step = (v - target) / d;
                if !step.is_finite() {
                    return None;
                }
                w -= step;
                if step.norm() <= 1e-15 * (1.0 + w.norm()) {
                    break;
                }
            }
            let (v, _) = cube(w)?;
            // a jump means Newton found another preimage
            if (v - target).norm() > 1e-9 * (1.0 + target.norm()) || (w - last).norm() > 4.0 * gap + 1e-12 {
                return None;
            }
            ray.push(w);
        }
        let n = ray.len();
        let last = ray[n - 1];
        if (last - ray[n - 1 - RAY_STEPS]).norm() > 1e-7 {
            continue;
        }
        let start = SpherePoint::new(last);
        let q = newton_cycle_point(f, start, 3, 60)?;
        let cycle = |q: SpherePoint| {
            let q1 = f.eval(q);
            let q2 = f.eval(q1);
            [q, q1, q2, f.eval(q2)]
        };
        let o = cycle(q);
        if chordal_distance(o[3], q) > 1e-10 || chordal_distance(q, start) > 1e-3 {
            return None;
        }
        let period = if chordal_distance(o[1], q) < LANDING_MATCH {
            1
        } else {
            3
        };
        return Some(RayLanding {
            orbit: [o[0], o[1], o[2]],
            period,
            doublings: doubling,
        });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::basin::component_reaches;
    use crate::families::{per3_map, Per3Parameter};
    use crate::params::polynomial_centers;
    use crate::periodic::fixed_points;

    fn map(a: Complex) -> RationalMap {
        per3_map(Per3Parameter::new(a).unwrap())
    }

    fn raster() -> BasinConfig {
        ContactConfig::default().raster
    }

    #[test]
    fn rabbit_ray_lands_on_a_fixed_point() {
        let [_, a2, _] = polynomial_centers();
        let f = map(a2);
        let ray = zero_ray_landing(&f).unwrap();
        assert_eq!(ray.period, 1);
        assert!(chordal_distance(f.eval(ray.orbit[0]), ray.orbit[0]) < 1e-10);
        // the flood-filled component of 0 reaches the landing point
        let seen = component_reaches(&f, ray.orbit[0], SpherePoint::ZERO, &raster()).unwrap();
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn airplane_ray_lands_on_the_repelling_three_cycle() {
        let [a1, _, _] = polynomial_centers();
        let f = map(a1);
        let ray = zero_ray_landing(&f).unwrap();
        assert_eq!(ray.period, 3);
        for (i, (&q, &c)) in ray.orbit.iter().zip(&CRITICAL_CYCLE).enumerate() {
            let seen = component_reaches(&f, q, c, &raster()).unwrap();
            assert!(seen.iter().all(|&b| b), "phase {i}");
        }
        assert!(ray.orbit.iter().all(|q| q.finite().unwrap().im.abs() < 1e-9));
    }

    #[test]
    fn capture_fixed_points_are_sampled_but_not_touched() {
        let f = map(Complex::new(2.5, 0.0));
        for q in fixed_points(&f).unwrap() {
            let e = triple_contact_test(&f, q.location);
            assert_eq!(e.sampled.len(), 3);
            assert!(e.phases_seen.is_empty());
            let seen = component_reaches(&f, q.location, SpherePoint::ZERO, &raster()).unwrap();
            assert!(!seen[seen.len() - 1], "{}", q.location);
        }
    }

    #[test]
    fn circle_is_mirror_symmetric() {
        let p = SpherePoint::new(Complex::new(0.7, 0.0));
        let pts = chordal_circle(p, 1e-3, 8);
        for q in &pts {
            assert!((chordal_distance(*q, p) - 1e-3).abs() < 1e-12);
            assert!(pts.iter().any(|r| chordal_distance(*r, q.conj()) < 1e-14));
        }
    }

    #[test]
    fn no_ray_without_the_critical_cycle() {
        assert!(zero_ray_landing(&RationalMap::quadratic(Complex::new(-1.0, 0.0))).is_none());
    }
}
