//! Parallel, deterministic rasterization of dynamical and parameter planes.

use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{per3_map, Per3Parameter};
use crate::orbit::{orbit_fate_with, OrbitConfig, OrbitFate};
use crate::rational::RationalMap;
use crate::sphere::{chordal_distance, Complex, SpherePoint};

pub const DEFAULT_BUDGET: usize = 2000;

/// Largest allowed `pixels_x * pixels_y`.
pub const MAX_PIXELS: usize = 100_000_000;

/// Chordal radius of the trap disks about `0`, `∞` and `1` used for entry
/// times in the parameter plane.
pub const TRAP_RADIUS: f64 = 1e-3;

/// Parameter-plane window containing all cut points and centers.
pub const SLICE_WINDOW: Window = Window {
    center: Complex::new(1.25, 0.0),
    width: 4.5,
    height: 4.0,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("window width and height must be finite and positive")]
    BadWindow,
    #[error("image size {0}x{1} must be positive with at most {MAX_PIXELS} pixels")]
    BadSize(usize, usize),
    #[error("unknown palette `{0}`; valid names: standard, mono")]
    UnknownPalette(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    #[serde(with = "crate::serde_complex")]
    pub center: Complex,
    pub width: f64,
    pub height: f64,
}

impl Window {
    pub fn new(center: Complex, width: f64, height: f64) -> Result<Self, RenderError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(width) && ok(height) && center.is_finite()) {
            return Err(RenderError::BadWindow);
        }
        Ok(Window { center, width, height })
    }

    /// Window spanning `[re0, re1] x [im0, im1]`.
    pub fn from_bounds(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Self, RenderError> {
        Window::new(Complex::new((re0 + re1) / 2.0, (im0 + im1) / 2.0), re1 - re0, im1 - im0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Plane,
    /// Pixels are coordinates `w`, the point rendered is `1/w`.
    InversePlane,
}

/// Named color schemes. Julia ink is black in all of them.
///
/// `standard`: critical-cycle phases 0, 1, 2 are red (220, 60, 50), green
/// (60, 170, 80) and blue (50, 100, 220); other cycles take hues from
/// (230, 180, 40), (160, 70, 200), (40, 190, 200), (240, 120, 170), (140,
/// 140, 140) by phase. Parameter plane: entry bands from (250, 235, 140)
/// through (240, 150, 50), (200, 80, 40), (120, 40, 30); disjoint periods 1..
/// from (60, 120, 230), (60, 200, 120), (170, 90, 210), (230, 120, 180),
/// (100, 200, 220), (200, 200, 90).
///
/// `mono`: grey levels only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Palette {
    Standard,
    Mono,
}

impl std::str::FromStr for Palette {
    type Err = RenderError;
    fn from_str(s: &str) -> Result<Self, RenderError> {
        match s {
            "standard" => Ok(Palette::Standard),
            "mono" => Ok(Palette::Mono),
            other => Err(RenderError::UnknownPalette(other.to_string())),
        }
    }
}

pub type Rgb = [u8; 3];

pub const INK: Rgb = [0, 0, 0];

const PHASE_COLORS: [Rgb; 3] = [[220, 60, 50], [60, 170, 80], [50, 100, 220]];
const OTHER_COLORS: [Rgb; 5] = [
    [230, 180, 40],
    [160, 70, 200],
    [40, 190, 200],
    [240, 120, 170],
    [140, 140, 140],
];
const ENTRY_COLORS: [Rgb; 4] = [[250, 235, 140], [240, 150, 50], [200, 80, 40], [120, 40, 30]];
const PERIOD_COLORS: [Rgb; 6] = [
    [60, 120, 230],
    [60, 200, 120],
    [170, 90, 210],
    [230, 120, 180],
    [100, 200, 220],
    [200, 200, 90],
];

fn shade(c: Rgb, band: usize) -> Rgb {
    let k = [1.0, 0.85, 0.7, 0.55][band.min(3)];
    c.map(|x| (x as f64 * k).round() as u8)
}

fn grey(c: Rgb) -> Rgb {
    let g = ((c[0] as u32 * 3 + c[1] as u32 * 6 + c[2] as u32) / 10) as u8;
    [g, g, g]
}

impl Palette {
    fn finish(self, c: Rgb) -> Rgb {
        match self {
            Palette::Standard => c,
            Palette::Mono => grey(c),
        }
    }

    /// Color of a dynamical-plane fate.
    pub fn fate_color(self, fate: &OrbitFate) -> Rgb {
        let OrbitFate::Converged {
            cycle,
            period,
            phase,
            steps,
        } = fate
        else {
            return INK;
        };
        let band = speed_band(*steps);
        let critical = *period == 3
            && CRITICAL
                .iter()
                .all(|p| cycle.iter().any(|q| chordal_distance(*p, *q) < 1e-6));
        let base = if critical {
            let anchor = cycle[*phase];
            let k = CRITICAL
                .iter()
                .position(|p| chordal_distance(*p, anchor) < 1e-6)
                .unwrap_or(0);
            PHASE_COLORS[k]
        } else {
            OTHER_COLORS[(cycle_family(&cycle[0]) + phase) % OTHER_COLORS.len()]
        };
        self.finish(shade(base, band))
    }

    /// Color of a parameter-plane fate.
    pub fn parameter_color(self, fate: ParameterFate) -> Rgb {
        let c = match fate {
            ParameterFate::Critical { entry } => ENTRY_COLORS[entry_band(entry)],
            ParameterFate::Disjoint { period } => PERIOD_COLORS[(period - 1) % PERIOD_COLORS.len()],
            ParameterFate::Unresolved => INK,
        };
        self.finish(c)
    }
}

const CRITICAL: [SpherePoint; 3] = [SpherePoint::ZERO, SpherePoint::Infinity, SpherePoint::ONE];

fn speed_band(steps: usize) -> usize {
    match steps {
        0..=15 => 0,
        16..=40 => 1,
        41..=120 => 2,
        _ => 3,
    }
}

/// Bands of trap entry times: 0..=2, 3..=5, 6..=11, 12 and up.
pub fn entry_band(entry: usize) -> usize {
    match entry {
        0..=2 => 0,
        3..=5 => 1,
        6..=11 => 2,
        _ => 3,
    }
}

/// Stable small integer identifying a cycle by the position of its canonical
/// first point.
fn cycle_family(p: &SpherePoint) -> usize {
    let v = p.unit_vector();
    let q = |x: f64| ((x + 1.0) * 8.0).floor() as usize;
    q(v[0]) * 3 + q(v[1]) * 5 + q(v[2]) * 7
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub window: Window,
    pub pixels_x: usize,
    pub pixels_y: usize,
    pub budget: usize,
    pub chart: Chart,
    pub palette: Palette,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl RenderConfig {
    pub fn new(window: Window, pixels_x: usize, pixels_y: usize) -> Self {
        RenderConfig {
            window,
            pixels_x,
            pixels_y,
            budget: DEFAULT_BUDGET,
            chart: Chart::Plane,
            palette: Palette::Standard,
            threads: None,
        }
    }

    fn validate(&self) -> Result<(), RenderError> {
        Window::new(self.window.center, self.window.width, self.window.height)?;
        let (w, h) = (self.pixels_x, self.pixels_y);
        if w == 0 || h == 0 || w.checked_mul(h).is_none_or(|n| n > MAX_PIXELS) {
            return Err(RenderError::BadSize(w, h));
        }
        Ok(())
    }

    /// Chart coordinate of the center of pixel `(x, y)`, row 0 at the top.
    pub fn coordinate(&self, x: usize, y: usize) -> Complex {
        let w = &self.window;
        // offsets are odd multiples of half a pixel counted from the center,
        // so pixels mirrored about a real-axis center get exactly conjugate
        // coordinates
        let (nx, ny) = (self.pixels_x as f64, self.pixels_y as f64);
        Complex::new(
            w.center.re + ((2 * x + 1) as f64 - nx) * (w.width / (2.0 * nx)),
            w.center.im - ((2 * y + 1) as f64 - ny) * (w.height / (2.0 * ny)),
        )
    }

    /// Point of the sphere rendered at pixel `(x, y)`.
    pub fn point(&self, x: usize, y: usize) -> SpherePoint {
        let w = self.coordinate(x, y);
        match self.chart {
            Chart::Plane => SpherePoint::new(w),
            Chart::InversePlane => SpherePoint::new(w).recip(),
        }
    }

    /// Pixel containing the chart coordinate `w`, if inside the window.
    pub fn pixel_of(&self, w: Complex) -> Option<(usize, usize)> {
        let win = &self.window;
        let fx = (w.re - (win.center.re - win.width / 2.0)) / win.width * self.pixels_x as f64;
        let fy = ((win.center.im + win.height / 2.0) - w.im) / win.height * self.pixels_y as f64;
        if fx < 0.0 || fy < 0.0 || fx >= self.pixels_x as f64 || fy >= self.pixels_y as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB, top row first.
    pub pixels: Vec<u8>,
}

impl ImageBuffer {
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let k = 3 * (y * self.width + x);
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    /// Binary portable pixmap bytes.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> io::Result<()> {
        let mut file = io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(&self.to_ppm())?;
        file.flush()
    }

    /// Parses the output of [`ImageBuffer::to_ppm`].
    pub fn from_ppm(bytes: &[u8]) -> Option<Self> {
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?.to_string());
        }
        pos += 1;
        if fields[0] != "P6" || fields[3] != "255" {
            return None;
        }
        let width: usize = fields[1].parse().ok()?;
        let height: usize = fields[2].parse().ok()?;
        let pixels = bytes.get(pos..)?.to_vec();
        (pixels.len() == 3 * width * height).then_some(ImageBuffer { width, height, pixels })
    }
}

fn rasterize<F>(cfg: &RenderConfig, color: F) -> Result<ImageBuffer, RenderError>
where
    F: Fn(usize, usize) -> Rgb + Sync,
{
    cfg.validate()?;
    let (w, h) = (cfg.pixels_x, cfg.pixels_y);
    let mut pixels = vec![0u8; 3 * w * h];
    let work = |pixels: &mut Vec<u8>| {
        pixels.par_chunks_mut(3 * w).enumerate().for_each(|(y, row)| {
            for x in 0..w {
                row[3 * x..3 * x + 3].copy_from_slice(&color(x, y));
            }
        });
    };
    match cfg.threads {
        None => work(&mut pixels),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RenderError::Pool(e.to_string()))?;
            pool.install(|| work(&mut pixels));
        }
    }
    Ok(ImageBuffer {
        width: w,
        height: h,
        pixels,
    })
}

/// Colors each pixel by the fate of its orbit under `f`.
pub fn render_dynamical(f: &RationalMap, cfg: &RenderConfig) -> Result<ImageBuffer, RenderError> {
    let orbit_cfg = OrbitConfig::with_budget(cfg.budget);
    rasterize(cfg, |x, y| {
        cfg.palette.fate_color(&orbit_fate_with(f, cfg.point(x, y), &orbit_cfg))
    })
}

/// Fate of the free critical point `a` under `f_a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParameterFate {
    /// Attracted to the critical cycle; `entry` is the first iterate within
    /// [`TRAP_RADIUS`] of `0`, `∞` or `1`.
    Critical {
        entry: usize,
    },
    /// Attracted to another cycle of the given period.
    Disjoint {
        period: usize,
    },
    Unresolved,
}

pub fn parameter_fate(a: Complex, budget: usize) -> ParameterFate {
    let Ok(p) = Per3Parameter::new(a) else {
        return ParameterFate::Unresolved;
    };
    let f = per3_map(p);
    let z = SpherePoint::new(a);
    match orbit_fate_with(&f, z, &OrbitConfig::with_budget(budget)) {
        OrbitFate::Converged { cycle, period, .. } => {
            let critical = period == 3 && cycle.iter().any(|q| chordal_distance(*q, SpherePoint::ZERO) < 1e-6);
            if !critical {
                return ParameterFate::Disjoint { period };
            }
            let mut w = z;
            for n in 0..=budget {
                if CRITICAL.iter().any(|c| chordal_distance(*c, w) < TRAP_RADIUS) {
                    return ParameterFate::Critical { entry: n };
                }
                w = f.eval(w);
            }
            ParameterFate::Unresolved
        }
        OrbitFate::Unresolved { .. } => ParameterFate::Unresolved,
    }
}

/// Fates of every pixel of the parameter plane, row-major from the top.
pub fn parameter_fates(cfg: &RenderConfig) -> Result<Vec<ParameterFate>, RenderError> {
    cfg.validate()?;
    let (w, h) = (cfg.pixels_x, cfg.pixels_y);
    let run = || -> Vec<ParameterFate> {
        (0..h)
            .into_par_iter()
            .flat_map_iter(|y| (0..w).map(move |x| parameter_fate(cfg.coordinate(x, y), cfg.budget)))
            .collect()
    };
    match cfg.threads {
        None => Ok(run()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RenderError::Pool(e.to_string()))
            .map(|pool| pool.install(run)),
    }
}

/// Colors each parameter `a` by the fate of its free critical point.
pub fn render_parameter(cfg: &RenderConfig) -> Result<ImageBuffer, RenderError> {
    rasterize(cfg, |x, y| {
        let w = cfg.coordinate(x, y);
        let a = match cfg.chart {
            Chart::Plane => w,
            Chart::InversePlane => w.inv(),
        };
        cfg.palette.parameter_color(parameter_fate(a, cfg.budget))
    })
}
