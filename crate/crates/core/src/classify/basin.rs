//! Immediate-basin membership by flood fill on a raster of orbit fates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbit::{orbit_fate_with, OrbitConfig, OrbitFate};
use crate::rational::RationalMap;
use crate::sphere::{chordal_distance, Complex, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinConfig {
    /// Pixels per side of the first raster.
    pub start_resolution: usize,
    /// Number of resolution doublings allowed.
    pub refinements: usize,
    pub budget: usize,
    /// Two attractor points closer than this are the same.
    pub match_tol: f64,
}

impl Default for BasinConfig {
    fn default() -> Self {
        BasinConfig {
            start_resolution: 64,
            refinements: 4,
            budget: 2000,
            match_tol: 1e-4,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasinError {
    #[error("cycle point {0} is not attracting")]
    NotAttracting(SpherePoint),
    #[error("points cannot be placed in a common chart")]
    Unrasterizable,
    #[error("membership undecided after refinement: {0:?}")]
    Indeterminate(Vec<bool>),
}

/// The attractor point an orbit is attached to at multiples of its period.
fn anchor(fate: &OrbitFate) -> Option<SpherePoint> {
    match fate {
        OrbitFate::Converged { cycle, phase, .. } => Some(cycle[*phase]),
        OrbitFate::Unresolved { .. } => None,
    }
}

struct Frame {
    inverse: bool,
    origin: Complex,
    pixel: f64,
}

impl Frame {
    fn point(&self, i: usize, j: usize) -> SpherePoint {
        let w = self.origin + Complex::new((i as f64 + 0.5) * self.pixel, (j as f64 + 0.5) * self.pixel);
        if self.inverse {
            SpherePoint::new(w).recip()
        } else {
            SpherePoint::new(w)
        }
    }

    fn index(&self, w: Complex, n: usize) -> (usize, usize) {
        let d = (w - self.origin) / self.pixel;
        let clamp = |x: f64| (x.floor().max(0.0) as usize).min(n - 1);
        (clamp(d.re), clamp(d.im))
    }
}

/// Whether `z` lies in the basin component containing `cycle_point`.
///
/// Both points are placed in the plane chart, or the `1/z` chart when
/// `cycle_point` is far from 0. Pixels whose orbit attaches to the same point
/// as `cycle_point` are flood filled from the pixel of `cycle_point`. The
/// raster is doubled until two consecutive resolutions agree.
pub fn immediate_basin_membership(
    f: &RationalMap,
    z: SpherePoint,
    cycle_point: SpherePoint,
) -> Result<bool, BasinError> {
    immediate_basin_membership_with(f, z, cycle_point, &BasinConfig::default())
}

pub fn immediate_basin_membership_with(
    f: &RationalMap,
    z: SpherePoint,
    cycle_point: SpherePoint,
    cfg: &BasinConfig,
) -> Result<bool, BasinError> {
    let orbit_cfg = OrbitConfig::with_budget(cfg.budget);
    let target = anchor(&orbit_fate_with(f, cycle_point, &orbit_cfg)).ok_or(BasinError::NotAttracting(cycle_point))?;
    let attached = |fate: &OrbitFate| anchor(fate).is_some_and(|p| chordal_distance(p, target) < cfg.match_tol);
    if !attached(&orbit_fate_with(f, z, &orbit_cfg)) {
        return Ok(false);
    }
    if chordal_distance(z, cycle_point) == 0.0 {
        return Ok(true);
    }

    let far = cycle_point.finite().is_none_or(|c| c.norm() > 1.0);
    let inverse = if far { z != SpherePoint::ZERO } else { z.is_infinity() };
    let coord = |p: SpherePoint| if inverse { p.recip().finite() } else { p.finite() };
    let (Some(u), Some(v)) = (coord(z), coord(cycle_point)) else {
        return Err(BasinError::Unrasterizable);
    };
    let half = 1.5 * (u - v).norm() + 0.5;
    let center = (u + v) * 0.5;
    let origin = center - Complex::new(half, half);

    let mut answers = Vec::new();
    let mut n = cfg.start_resolution.max(2);
    for _ in 0..=cfg.refinements {
        let frame = Frame {
            inverse,
            origin,
            pixel: 2.0 * half / n as f64,
        };
        let mut mask = attached_mask(f, &frame, n, &orbit_cfg, &attached);
        let (si, sj) = frame.index(v, n);
        let (ti, tj) = frame.index(u, n);
        mask[sj * n + si] = true;
        mask[tj * n + ti] = true;
        let inside = flood_fill(&mask, n, (si, sj))[tj * n + ti];
        answers.push(inside);
        let k = answers.len();
        if k >= 2 && answers[k - 1] == answers[k - 2] {
            return Ok(inside);
        }
        n *= 2;
    }
    Err(BasinError::Indeterminate(answers))
}

fn attached_mask(
    f: &RationalMap,
    frame: &Frame,
    n: usize,
    orbit_cfg: &OrbitConfig,
    attached: &(dyn Fn(&OrbitFate) -> bool + Sync),
) -> Vec<bool> {
    (0..n)
        .into_par_iter()
        .flat_map_iter(|j| (0..n).map(move |i| attached(&orbit_fate_with(f, frame.point(i, j), orbit_cfg))))
        .collect()
}

/// Whether the basin component containing `cycle_point` comes within one
/// pixel of `p`, at each resolution of the square spanned by the two points.
/// The component is flood filled from the pixel of `cycle_point`.
pub fn component_reaches(
    f: &RationalMap,
    p: SpherePoint,
    cycle_point: SpherePoint,
    cfg: &BasinConfig,
) -> Result<Vec<bool>, BasinError> {
    let orbit_cfg = OrbitConfig::with_budget(cfg.budget);
    let target = anchor(&orbit_fate_with(f, cycle_point, &orbit_cfg)).ok_or(BasinError::NotAttracting(cycle_point))?;
    let attached = |fate: &OrbitFate| anchor(fate).is_some_and(|q| chordal_distance(q, target) < cfg.match_tol);
    let far = cycle_point.finite().is_none_or(|c| c.norm() > 1.0);
    let inverse = if far { p != SpherePoint::ZERO } else { p.is_infinity() };
    let coord = |q: SpherePoint| if inverse { q.recip().finite() } else { q.finite() };
    let (Some(u), Some(v)) = (coord(p), coord(cycle_point)) else {
        return Err(BasinError::Unrasterizable);
    };
    let half = (u - v).norm();
    if half == 0.0 {
        return Ok(vec![true; cfg.refinements + 1]);
    }
    let origin = (u + v) * 0.5 - Complex::new(half, half);
    let mut answers = Vec::new();
    let mut n = cfg.start_resolution.max(4);
    for _ in 0..=cfg.refinements {
        let frame = Frame {
            inverse,
            origin,
            pixel: 2.0 * half / n as f64,
        };
        let seed = frame.index(v, n);
        let goal = frame.index(u, n);
        answers.push(fill_reaches(f, &frame, n, &orbit_cfg, &attached, seed, goal));
        n *= 2;
    }
    Ok(answers)
}

/// Grows the 4-connected attached component of `seed` layer by layer,
/// computing fates only on its rim, until it comes within one pixel of
/// `goal` or stops growing.
fn fill_reaches(
    f: &RationalMap,
    frame: &Frame,
    n: usize,
    orbit_cfg: &OrbitConfig,
    attached: &(dyn Fn(&OrbitFate) -> bool + Sync),
    seed: (usize, usize),
    goal: (usize, usize),
) -> bool {
    let near = |(i, j): (usize, usize)| i.abs_diff(goal.0) <= 1 && j.abs_diff(goal.1) <= 1;
    let mut seen = vec![false; n * n];
    seen[seed.1 * n + seed.0] = true;
    let mut layer = vec![seed];
    while !layer.is_empty() {
        if layer.iter().any(|&c| near(c)) {
            return true;
        }
        let mut rim = Vec::new();
        for &(i, j) in &layer {
            let neighbours = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
            for (a, b) in neighbours {
                if a < n && b < n && !seen[b * n + a] {
                    seen[b * n + a] = true;
                    rim.push((a, b));
                }
            }
        }
        layer = rim
            .into_par_iter()
            .filter(|&(a, b)| attached(&orbit_fate_with(f, frame.point(a, b), orbit_cfg)))
            .collect();
    }
    false
}

/// 4-connected component of `seed` among `true` cells of an `n x n` mask.
pub fn flood_fill(mask: &[bool], n: usize, seed: (usize, usize)) -> Vec<bool> {
    let mut seen = vec![false; n * n];
    let mut stack = vec![seed];
    seen[seed.1 * n + seed.0] = true;
    while let Some((i, j)) = stack.pop() {
        let mut visit = |a: usize, b: usize| {
            let k = b * n + a;
            if mask[k] && !seen[k] {
                seen[k] = true;
                stack.push((a, b));
            }
        };
        if i > 0 {
            visit(i - 1, j);
        }
        if i + 1 < n {
            visit(i + 1, j);
        }
        if j > 0 {
            visit(i, j - 1);
        }
        if j + 1 < n {
            visit(i, j + 1);
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flood_fill_respects_walls() {
        let n = 5;
        let mut mask = vec![true; n * n];
        for j in 0..n {
            mask[j * n + 2] = false;
        }
        let filled = flood_fill(&mask, n, (0, 0));
        assert!(filled[4 * n + 1]);
        assert!(!filled[4 * n + 3]);
        assert!(!filled[2]);
    }

    #[test]
    fn square_map_components() {
        let f = RationalMap::quadratic(Complex::new(0.0, 0.0));
        let half = SpherePoint::real(0.5);
        assert_eq!(immediate_basin_membership(&f, half, SpherePoint::ZERO), Ok(true));
        assert_eq!(
            immediate_basin_membership(&f, SpherePoint::real(3.0), SpherePoint::ZERO),
            Ok(false)
        );
        assert_eq!(
            immediate_basin_membership(&f, SpherePoint::real(3.0), SpherePoint::Infinity),
            Ok(true)
        );
    }

    #[test]
    fn rabbit_preimage_component_is_not_immediate() {
        let c = Complex::new(-0.122561166876654, 0.744861766619744);
        let f = RationalMap::quadratic(c);
        // f(-w) = f(w): the cycle point c^2 + c and its negative both map to 0
        let w = c * c + c;
        let target = SpherePoint::new(w);
        assert_eq!(immediate_basin_membership(&f, SpherePoint::new(-w), target), Ok(false));
        assert_eq!(
            immediate_basin_membership(&f, SpherePoint::new(w + 0.01), target),
            Ok(true)
        );
        assert_eq!(
            immediate_basin_membership(&f, SpherePoint::new(c), SpherePoint::ZERO),
            Ok(false)
        );
    }
}
