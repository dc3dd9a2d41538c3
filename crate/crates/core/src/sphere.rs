//! Points on the Riemann sphere, the chordal metric and Möbius maps.
//!
//! The point at infinity is a first-class value. Internally every point can
//! be written in one of two affine charts, `z` (when `|z| <= 1`) or
//! `w = 1/z` (when `|z| > 1`), so no computation ever needs a float that is
//! larger than one in modulus.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{MapError, RationalMap};

pub type Complex = Complex64;

/// Default tolerance for geometric comparisons on the sphere.
pub const GEOMETRY_TOL: f64 = 1e-12;

/// Default tolerance for conjugacy checks.
pub const CONJUGACY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(#[serde(with = "crate::serde_complex")] Complex),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex::new(0.0, 0.0));
    pub const ONE: SpherePoint = SpherePoint::Finite(Complex::new(1.0, 0.0));

    /// Wraps a complex number. Non-finite input is mapped to `Infinity`.
    pub fn new(z: Complex) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn real(x: f64) -> Self {
        SpherePoint::new(Complex::new(x, 0.0))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn conj(&self) -> Self {
        match *self {
            SpherePoint::Finite(z) => SpherePoint::Finite(z.conj()),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    /// Image under the antipodal-free inversion `z -> 1/z`.
    pub fn recip(&self) -> Self {
        ChartPoint::from(*self).swap().to_sphere()
    }

    /// Position on the unit sphere in R^3 (stereographic projection, 0 at the
    /// south pole). Euclidean distance between these vectors is the chordal
    /// distance.
    pub fn unit_vector(&self) -> [f64; 3] {
        ChartPoint::from(*self).unit_vector()
    }
}

impl From<Complex> for SpherePoint {
    fn from(z: Complex) -> Self {
        SpherePoint::new(z)
    }
}

impl std::fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // within 2e-12 of ∞ in the chordal metric
            SpherePoint::Finite(z) if z.norm() > 1e12 => f.write_str("inf"),
            SpherePoint::Finite(z) => f.write_str(&format_complex(*z)),
            SpherePoint::Infinity => f.write_str("inf"),
        }
    }
}

/// Canonical text form of a complex number: `RE+IMi` with six significant
/// digits in each part. A part below `1e-12` (relative to the modulus when
/// that exceeds one) is rounding noise and prints as 0.
pub fn format_complex(z: Complex) -> String {
    let scale = z.re.abs().max(z.im.abs()).max(1.0);
    let clean = |x: f64| if x.abs() < 1e-12 * scale { 0.0 } else { x };
    let (x, y) = (clean(z.re), clean(z.im));
    let re = format_sig(x);
    let im = format_sig(y.abs());
    let sign = if y.is_sign_negative() && y != 0.0 { '-' } else { '+' };
    format!("{re}{sign}{im}i")
}

fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{:.5e}", x);
    }
    let decimals = (5 - exp).max(0) as usize;
    let mut s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// A sphere point written in the chart where its coordinate has modulus at
/// most one: `Plane(z)` means the point `z`, `Inverse(w)` means `1/w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum ChartPoint {
    Plane(Complex),
    Inverse(Complex),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ChartKind {
    Plane,
    Inverse,
}

impl From<SpherePoint> for ChartPoint {
    fn from(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Infinity => ChartPoint::Inverse(Complex::new(0.0, 0.0)),
            SpherePoint::Finite(z) => {
                if z.norm_sqr() <= 1.0 {
                    ChartPoint::Plane(z)
                } else {
                    ChartPoint::Inverse(z.inv())
                }
            }
        }
    }
}

impl ChartPoint {
    /// Builds a point from homogeneous coordinates `[u : v]`.
    #[inline]
    pub(crate) fn from_homogeneous(u: Complex, v: Complex) -> Self {
        let nu = u.norm_sqr();
        let nv = v.norm_sqr();
        if nu <= nv {
            ChartPoint::Plane(u / v)
        } else {
            ChartPoint::Inverse(v / u)
        }
    }

    #[inline]
    pub(crate) fn kind(&self) -> ChartKind {
        match self {
            ChartPoint::Plane(_) => ChartKind::Plane,
            ChartPoint::Inverse(_) => ChartKind::Inverse,
        }
    }

    #[inline]
    pub(crate) fn coord(&self) -> Complex {
        match *self {
            ChartPoint::Plane(z) | ChartPoint::Inverse(z) => z,
        }
    }

    #[inline]
    pub(crate) fn swap(self) -> Self {
        match self {
            ChartPoint::Plane(z) => ChartPoint::Inverse(z),
            ChartPoint::Inverse(w) => ChartPoint::Plane(w),
        }
    }

    /// Homogeneous coordinates `[u : v]` with `max(|u|, |v|) = 1`.
    #[inline]
    pub(crate) fn homogeneous(&self) -> (Complex, Complex) {
        let one = Complex::new(1.0, 0.0);
        match *self {
            ChartPoint::Plane(z) => (z, one),
            ChartPoint::Inverse(w) => (one, w),
        }
    }

    /// Coordinate of this point in the requested chart, if it is finite there.
    pub(crate) fn coord_in(&self, kind: ChartKind) -> Option<Complex> {
        if self.kind() == kind {
            return Some(self.coord());
        }
        let c = self.coord();
        if c == Complex::new(0.0, 0.0) {
            None
        } else {
            Some(c.inv())
        }
    }

    pub(crate) fn to_sphere(self) -> SpherePoint {
        match self {
            ChartPoint::Plane(z) => SpherePoint::new(z),
            ChartPoint::Inverse(w) => {
                if w == Complex::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::new(w.inv())
                }
            }
        }
    }

    #[inline]
    pub(crate) fn unit_vector(&self) -> [f64; 3] {
        let (u, v) = self.homogeneous();
        let nu = u.norm_sqr();
        let nv = v.norm_sqr();
        let s = nu + nv;
        let x = u * v.conj();
        [2.0 * x.re / s, 2.0 * x.im / s, (nu - nv) / s]
    }
}

/// Chordal distance `2|p-q| / sqrt((1+|p|^2)(1+|q|^2))`, extended to
/// infinity. Always in `[0, 2]`.
pub fn chordal_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    chart_distance(ChartPoint::from(p), ChartPoint::from(q))
}

#[inline]
pub(crate) fn chart_distance(p: ChartPoint, q: ChartPoint) -> f64 {
    let (p0, p1) = p.homogeneous();
    let (q0, q1) = q.homogeneous();
    let cross = (p0 * q1 - p1 * q0).norm();
    let np = (p0.norm_sqr() + p1.norm_sqr()).sqrt();
    let nq = (q0.norm_sqr() + q1.norm_sqr()).sqrt();
    (2.0 * cross / (np * nq)).min(2.0)
}

#[derive(Debug, Error, PartialEq)]
pub enum MobiusError {
    #[error("degenerate Möbius map: |ad - bc| = {0:e}")]
    Degenerate(f64),
    #[error("non-finite Möbius coefficient")]
    NonFinite,
}

/// The map `z -> (az + b) / (cz + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    a: Complex,
    b: Complex,
    c: Complex,
    d: Complex,
}

impl Mobius {
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<Self, MobiusError> {
        if [a, b, c, d].iter().any(|z| !z.is_finite()) {
            return Err(MobiusError::NonFinite);
        }
        let det = (a * d - b * c).norm();
        if det == 0.0 || !det.is_finite() {
            return Err(MobiusError::Degenerate(det));
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        Mobius {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// `z -> 1/z`.
    pub fn inversion() -> Self {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        Mobius {
            a: zero,
            b: one,
            c: one,
            d: zero,
        }
    }

    /// `z -> s z + t`.
    pub fn affine(s: Complex, t: Complex) -> Result<Self, MobiusError> {
        Mobius::new(s, t, Complex::new(0.0, 0.0), Complex::new(1.0, 0.0))
    }

    /// A rotation of the sphere (chordal isometry) taking `p` to 0.
    pub fn rotation_to_origin(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Infinity => Mobius::inversion(),
            SpherePoint::Finite(z) => Mobius {
                a: Complex::new(1.0, 0.0),
                b: -z,
                c: z.conj(),
                d: Complex::new(1.0, 0.0),
            },
        }
    }

    pub fn coefficients(&self) -> [Complex; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Self {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let (u, v) = ChartPoint::from(p).homogeneous();
        let nu = self.a * u + self.b * v;
        let nv = self.c * u + self.d * v;
        if nv == Complex::new(0.0, 0.0) {
            return SpherePoint::Infinity;
        }
        ChartPoint::from_homogeneous(nu, nv).to_sphere()
    }
}

/// `M ∘ f ∘ M⁻¹` as coefficient lists.
pub fn mobius_conjugate(f: &RationalMap, m: &Mobius) -> Result<RationalMap, MapError> {
    f.conjugate_by(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn chordal_examples() {
        assert_eq!(chordal_distance(SpherePoint::ZERO, SpherePoint::Infinity), 2.0);
        let p = SpherePoint::new(c(0.3, -2.0));
        assert_eq!(chordal_distance(p, p), 0.0);
        assert_eq!(chordal_distance(SpherePoint::Infinity, SpherePoint::Infinity), 0.0);
        let d = chordal_distance(SpherePoint::real(1.0), SpherePoint::real(-1.0));
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chordal_matches_formula_for_large_points() {
        let p = c(3e5, 1e5);
        let q = c(-2.0, 7.0);
        let direct = 2.0 * (p - q).norm() / ((1.0 + p.norm_sqr()) * (1.0 + q.norm_sqr())).sqrt();
        let d = chordal_distance(p.into(), q.into());
        assert!((d - direct).abs() < 1e-15);
        let to_inf = chordal_distance(q.into(), SpherePoint::Infinity);
        assert!((to_inf - 2.0 / (1.0 + q.norm_sqr()).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unit_vector_distance_is_chordal() {
        let p = SpherePoint::new(c(0.4, 1.7));
        let q = SpherePoint::new(c(-3.0, 0.2));
        let (a, b) = (p.unit_vector(), q.unit_vector());
        let e = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        assert!((e - chordal_distance(p, q)).abs() < 1e-14);
    }

    #[test]
    fn mobius_examples() {
        let p = SpherePoint::new(c(3.0, 4.0));
        assert_eq!(Mobius::identity().apply(p), p);
        assert_eq!(Mobius::inversion().apply(SpherePoint::Infinity), SpherePoint::ZERO);
        assert_eq!(Mobius::inversion().apply(SpherePoint::ZERO), SpherePoint::Infinity);
        // z -> (2z + 1) / (z - 3): infinity goes to a/c, the pole -d/c to infinity
        let m = Mobius::new(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-3.0, 0.0)).unwrap();
        assert_eq!(m.apply(SpherePoint::Infinity), SpherePoint::real(2.0));
        assert_eq!(m.apply(SpherePoint::real(3.0)), SpherePoint::Infinity);
    }

    #[test]
    fn degenerate_mobius_rejected() {
        let one = c(1.0, 0.0);
        assert!(matches!(
            Mobius::new(one, one, one, one),
            Err(MobiusError::Degenerate(_))
        ));
    }

    #[test]
    fn rotation_is_isometry() {
        let p = SpherePoint::new(c(0.7, -1.3));
        let r = Mobius::rotation_to_origin(p);
        assert!(chordal_distance(r.apply(p), SpherePoint::ZERO) < 1e-15);
        let q = SpherePoint::new(c(-2.0, 0.5));
        let s = SpherePoint::new(c(0.1, 0.1));
        let before = chordal_distance(q, s);
        let after = chordal_distance(r.apply(q), r.apply(s));
        assert!((before - after).abs() < 1e-14);
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(c(1.5, -0.25)), "1.5-0.25i");
        assert_eq!(format_complex(c(2.324717957, 0.0)), "2.32472+0i");
        assert_eq!(format_complex(c(-0.122561166, 0.744861766)), "-0.122561+0.744862i");
        assert_eq!(format_complex(c(0.0, -0.0)), "0+0i");
        assert_eq!(format_complex(c(1.21336, -1.9e-51)), "1.21336+0i");
        assert_eq!(format_complex(c(1e-30, 0.0)), "0+0i");
        assert_eq!(format_complex(c(2e-9, 0.0)), "2.00000e-9+0i");
        assert_eq!(SpherePoint::new(c(6e31, 1e32)).to_string(), "inf");
    }

    fn point() -> impl Strategy<Value = SpherePoint> {
        prop_oneof![
            1 => Just(SpherePoint::Infinity),
            20 => (-50.0f64..50.0, -50.0f64..50.0).prop_map(|(x, y)| SpherePoint::new(c(x, y))),
            5 => (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| SpherePoint::new(c(x * 1e-3, y * 1e-3))),
        ]
    }

    fn mobius() -> impl Strategy<Value = Mobius> {
        prop::array::uniform8(-3.0f64..3.0).prop_filter_map("degenerate", |v| {
            let m = Mobius::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])).ok()?;
            if m.determinant().norm() > 0.1 {
                Some(m)
            } else {
                None
            }
        })
    }

    proptest! {
        #[test]
        fn chordal_is_a_bounded_symmetric_metric(p in point(), q in point(), r in point()) {
            let pq = chordal_distance(p, q);
            prop_assert!((0.0..=2.0).contains(&pq));
            prop_assert_eq!(pq, chordal_distance(q, p));
            prop_assert!(pq <= chordal_distance(p, r) + chordal_distance(r, q) + 1e-12);
        }

        #[test]
        fn mobius_round_trip(m in mobius(), p in point()) {
            let back = m.inverse().apply(m.apply(p));
            prop_assert!(chordal_distance(back, p) < 1e-10);
            let id = m.compose(&m.inverse());
            prop_assert!(chordal_distance(id.apply(p), p) < 1e-12);
        }
    }
}
