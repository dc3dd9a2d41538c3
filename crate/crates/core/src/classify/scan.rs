//! Search of the parameter plane for capture parameters in the airplane
//! piece.

use serde::{Deserialize, Serialize};

use super::{analyze_region, analyze_type, ClassifyConfig, HyperbolicType, Region};
use crate::families::{per3_map, Per3Parameter};
use crate::render::{parameter_fates, ParameterFate, RenderConfig, RenderError, Window};
use crate::sphere::Complex;

/// Window around the airplane center `a_1 ≈ 2.32`.
pub const AIRPLANE_WINDOW: Window = Window {
    center: Complex::new(2.5, 0.0),
    width: 2.0,
    height: 2.5,
};

/// Half-width of the square over which a candidate pixel must have the
/// smallest entry time.
pub const DIP_RADIUS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub window: Window,
    pub pixels: usize,
    pub budget: usize,
    /// Smallest trap entry time of a candidate pixel.
    pub min_entry: usize,
    /// Candidates classified before giving up.
    pub max_candidates: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            window: AIRPLANE_WINDOW,
            pixels: 400,
            budget: 2000,
            min_entry: 2,
            max_candidates: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureScan {
    /// Pixels whose trap entry time is at least `min_entry` and smaller than
    /// at every pixel of the surrounding square.
    pub candidates: usize,
    pub checked: usize,
    /// Capture parameters confirmed to lie in the airplane piece, with their
    /// pixel `(x, y)`.
    #[serde(with = "found_serde")]
    pub found: Vec<(Complex, (usize, usize))>,
}

mod found_serde {
    use super::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Hit {
        re: f64,
        im: f64,
        x: usize,
        y: usize,
    }

    type Found = Vec<(Complex, (usize, usize))>;

    pub fn serialize<S: Serializer>(v: &[(Complex, (usize, usize))], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|(a, (x, y))| Hit {
                re: a.re,
                im: a.im,
                x: *x,
                y: *y,
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Found, D::Error> {
        let hits = Vec::<Hit>::deserialize(d)?;
        Ok(hits
            .into_iter()
            .map(|h| (Complex::new(h.re, h.im), (h.x, h.y)))
            .collect())
    }
}

/// Rasterizes the window and classifies interior critical-cycle pixels in
/// order of increasing entry time until `want` capture parameters of the
/// airplane piece are found.
pub fn find_capture_parameters(
    scan: &ScanConfig,
    cfg: &ClassifyConfig,
    want: usize,
) -> Result<CaptureScan, RenderError> {
    let mut rc = RenderConfig::new(scan.window, scan.pixels, scan.pixels);
    rc.budget = scan.budget;
    let fates = parameter_fates(&rc)?;
    let n = scan.pixels;
    let entry = |x: usize, y: usize| match fates[y * n + x] {
        ParameterFate::Critical { entry } => Some(entry),
        _ => None,
    };
    let r = DIP_RADIUS;
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for y in r..n.saturating_sub(r) {
        for x in r..n - r {
            let Some(e) = entry(x, y) else { continue };
            if e < scan.min_entry {
                continue;
            }
            // every pixel of the surrounding square settles on the critical
            // cycle no sooner, and the rim strictly later: the center of a
            // component whose critical orbit lands early
            let mut dip = true;
            for dy in 0..=2 * r {
                for dx in 0..=2 * r {
                    let rim = dx == 0 || dy == 0 || dx == 2 * r || dy == 2 * r;
                    match entry(x + dx - r, y + dy - r) {
                        Some(f) if f > e || (!rim && f == e) => {}
                        _ => dip = false,
                    }
                }
            }
            let fresh = candidates
                .iter()
                .all(|&(_, cy, cx)| cy.abs_diff(y) > r || cx.abs_diff(x) > r);
            if dip && fresh {
                candidates.push((e, y, x));
            }
        }
    }
    candidates.sort();
    let mut found = Vec::new();
    let mut checked = 0;
    for &(_, y, x) in candidates.iter().take(scan.max_candidates) {
        if found.len() >= want {
            break;
        }
        checked += 1;
        let a = rc.coordinate(x, y);
        let Ok(p) = Per3Parameter::new(a) else { continue };
        if analyze_type(&per3_map(p), cfg).kind != HyperbolicType::Capture {
            continue;
        }
        if analyze_region(p, cfg).region == Region::Omega1 {
            found.push((a, (x, y)));
        }
    }
    Ok(CaptureScan {
        candidates: candidates.len(),
        checked,
        found,
    })
}
