//! Rational maps of the sphere stored as coefficient lists.

use thiserror::Error;

use crate::poly::{self, RootError};
use crate::sphere::{chordal_distance, ChartKind, ChartPoint, Complex, Mobius, SpherePoint};

/// Two roots closer than this are treated as a common root of numerator and
/// denominator.
pub const COMMON_ROOT_TOL: f64 = 1e-10;

/// Relative size below which leading coefficients are dropped after a
/// conjugation.
pub const CONJUGATE_TRIM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("map has degree {0}; at least 1 is required")]
    DegreeTooLow(usize),
    #[error("numerator and denominator share the root {0}")]
    CommonRoot(SpherePoint),
    #[error("conjugated map is degenerate (all coefficients below 1e-14)")]
    Degenerate,
    #[error(transparent)]
    Roots(#[from] RootError),
}

/// `f(z) = N(z) / D(z)` with ascending coefficients and a monic denominator.
///
/// Both lists are stored padded with zeros to `degree + 1` entries so that the
/// homogeneous form `N(u, v) = Σ n_k u^k v^(d-k)` can be evaluated directly.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Vec<Complex>,
    den: Vec<Complex>,
    degree: usize,
}

impl RationalMap {
    pub fn new(num: Vec<Complex>, den: Vec<Complex>) -> Result<Self, MapError> {
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(MapError::NonFinite);
        }
        let den_deg = poly::degree(&den).ok_or(MapError::ZeroDenominator)?;
        let num_deg = poly::degree(&num).unwrap_or(0);
        let lead = den[den_deg];
        let mut num: Vec<Complex> = num[..=num_deg].iter().map(|c| c / lead).collect();
        let mut den: Vec<Complex> = den[..=den_deg].iter().map(|c| c / lead).collect();
        den[den_deg] = Complex::new(1.0, 0.0);
        let degree = num_deg.max(den_deg);
        if degree < 1 {
            return Err(MapError::DegreeTooLow(degree));
        }
        check_common_roots(&num, &den)?;
        num.resize(degree + 1, Complex::new(0.0, 0.0));
        den.resize(degree + 1, Complex::new(0.0, 0.0));
        Ok(RationalMap { num, den, degree })
    }

    /// The polynomial `z^2 + c`.
    pub fn quadratic(c: Complex) -> Self {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        RationalMap::new(vec![c, zero, one], vec![one]).expect("z^2 + c is a valid map")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Numerator coefficients, ascending, without padding.
    pub fn numerator(&self) -> &[Complex] {
        let n = poly::degree(&self.num).map_or(0, |d| d + 1);
        &self.num[..n]
    }

    /// Denominator coefficients, ascending, monic, without padding.
    pub fn denominator(&self) -> &[Complex] {
        let n = poly::degree(&self.den).map_or(0, |d| d + 1);
        &self.den[..n]
    }

    pub fn conj(&self) -> Self {
        RationalMap {
            num: self.num.iter().map(|c| c.conj()).collect(),
            den: self.den.iter().map(|c| c.conj()).collect(),
            degree: self.degree,
        }
    }

    /// Numerator and denominator and their derivatives in the chart of `p`.
    #[inline]
    fn chart_values(&self, p: ChartPoint) -> (Complex, Complex, Complex, Complex) {
        match p {
            ChartPoint::Plane(z) => {
                let (n, dn) = poly::eval_with_derivative(&self.num, z);
                let (d, dd) = poly::eval_with_derivative(&self.den, z);
                (n, d, dn, dd)
            }
            ChartPoint::Inverse(w) => {
                let (n, dn) = eval_reversed(&self.num, w);
                let (d, dd) = eval_reversed(&self.den, w);
                (n, d, dn, dd)
            }
        }
    }

    #[inline]
    fn chart_value(&self, p: ChartPoint) -> (Complex, Complex) {
        match p {
            ChartPoint::Plane(z) => (poly::eval(&self.num, z), poly::eval(&self.den, z)),
            ChartPoint::Inverse(w) => (
                self.num.iter().fold(Complex::new(0.0, 0.0), |acc, &c| acc * w + c),
                self.den.iter().fold(Complex::new(0.0, 0.0), |acc, &c| acc * w + c),
            ),
        }
    }

    #[inline]
    pub(crate) fn apply_chart(&self, p: ChartPoint) -> ChartPoint {
        let (n, d) = self.chart_value(p);
        ChartPoint::from_homogeneous(n, d)
    }

    /// Image of `p` and the derivative of `f` read in the chart of `p` (input)
    /// and the chart `out` (output).
    pub(crate) fn step_into(&self, p: ChartPoint, out: ChartKind) -> (ChartPoint, Option<Complex>) {
        let (n, d, dn, dd) = self.chart_values(p);
        let image = ChartPoint::from_homogeneous(n, d);
        let deriv = match out {
            ChartKind::Plane => {
                if d == Complex::new(0.0, 0.0) {
                    None
                } else {
                    Some((dn * d - n * dd) / (d * d))
                }
            }
            ChartKind::Inverse => {
                if n == Complex::new(0.0, 0.0) {
                    None
                } else {
                    Some((dd * n - d * dn) / (n * n))
                }
            }
        };
        (image, deriv)
    }

    /// Image of `p` in its own best chart, with the derivative read from the
    /// chart of `p` into that chart.
    #[inline]
    pub(crate) fn step_natural(&self, p: ChartPoint) -> (ChartPoint, Complex) {
        let (n, d, dn, dd) = self.chart_values(p);
        if n.norm_sqr() <= d.norm_sqr() {
            (ChartPoint::Plane(n / d), (dn * d - n * dd) / (d * d))
        } else {
            (ChartPoint::Inverse(d / n), (dd * n - d * dn) / (n * n))
        }
    }

    /// One step of the homogeneous lift `[u : v] -> [N(u, v) : D(u, v)]`,
    /// carrying a tangent vector `(du, dv)` along.
    #[inline]
    pub(crate) fn lift_step(
        &self,
        (u, v): (Complex, Complex),
        (du, dv): (Complex, Complex),
    ) -> ((Complex, Complex), (Complex, Complex)) {
        let d = self.degree;
        let zero = Complex::new(0.0, 0.0);
        let one = Complex::new(1.0, 0.0);
        // periodic-point solving caps the degree of f^n at 64
        let mut upow = [one; 65];
        let mut vpow = [one; 65];
        assert!(d < upow.len(), "lift_step supports degree up to 64");
        for k in 1..=d {
            upow[k] = upow[k - 1] * u;
            vpow[k] = vpow[k - 1] * v;
        }
        let (mut n, mut nu, mut nv) = (zero, zero, zero);
        let (mut m, mut mu, mut mv) = (zero, zero, zero);
        for k in 0..=d {
            let base = upow[k] * vpow[d - k];
            n += self.num[k] * base;
            m += self.den[k] * base;
            if k > 0 {
                let t = upow[k - 1] * vpow[d - k] * k as f64;
                nu += self.num[k] * t;
                mu += self.den[k] * t;
            }
            if k < d {
                let t = upow[k] * vpow[d - k - 1] * (d - k) as f64;
                nv += self.num[k] * t;
                mv += self.den[k] * t;
            }
        }
        ((n, m), (nu * du + nv * dv, mu * du + mv * dv))
    }

    pub fn eval(&self, p: SpherePoint) -> SpherePoint {
        self.apply_chart(ChartPoint::from(p)).to_sphere()
    }

    pub fn eval_complex(&self, z: Complex) -> SpherePoint {
        self.eval(SpherePoint::new(z))
    }

    /// Derivative of `f` at `p`.
    ///
    /// For finite `p` with finite image this is the ordinary derivative; a
    /// finite pole gives `Infinity`. At `p = ∞` the input is read in the chart
    /// `w = 1/z`, and the output in the plane chart when `f(∞)` is finite or in
    /// the chart `1/z` when `f(∞) = ∞` (so the value is the multiplier of the
    /// fixed point at infinity).
    pub fn derivative(&self, p: SpherePoint) -> SpherePoint {
        let image = self.eval(p);
        let input = match p {
            SpherePoint::Infinity => ChartPoint::Inverse(Complex::new(0.0, 0.0)),
            SpherePoint::Finite(z) => {
                if image.is_infinity() {
                    return SpherePoint::Infinity;
                }
                ChartPoint::Plane(z)
            }
        };
        let out = if image.is_infinity() {
            ChartKind::Inverse
        } else {
            ChartKind::Plane
        };
        match self.step_into(input, out).1 {
            Some(d) => SpherePoint::new(d),
            None => SpherePoint::Infinity,
        }
    }

    /// Derivative numerator `N'D - ND'`.
    pub fn wronskian(&self) -> Vec<Complex> {
        let n = self.numerator();
        let d = self.denominator();
        let w = poly::sub(&poly::mul(&poly::derivative(n), d), &poly::mul(n, &poly::derivative(d)));
        poly::trim(&w, 1e-13)
    }

    /// Critical points without multiplicity: roots of the Wronskian, plus
    /// infinity when the Wronskian has fewer than `2d - 2` finite roots.
    pub fn critical_points(&self) -> Result<Vec<SpherePoint>, MapError> {
        let w = self.wronskian();
        let finite = if w.len() > 1 { poly::roots(&w)? } else { Vec::new() };
        let mut out: Vec<SpherePoint> = Vec::new();
        for z in finite {
            let p = SpherePoint::new(z);
            if out.iter().all(|q| chordal_distance(*q, p) > 1e-6) {
                out.push(p);
            }
        }
        let finite_count = w.len().saturating_sub(1);
        if finite_count < 2 * self.degree - 2 {
            out.push(SpherePoint::Infinity);
        }
        Ok(out)
    }

    /// `M ∘ f ∘ M⁻¹`, computed on coefficients.
    pub fn conjugate_by(&self, m: &Mobius) -> Result<RationalMap, MapError> {
        let [a, b, c, d] = m.coefficients();
        // M⁻¹(w) = u(w)/v(w) with u = d w - b, v = -c w + a.
        let u = vec![-b, d];
        let v = vec![a, -c];
        let deg = self.degree;
        let mut u_pows = vec![vec![Complex::new(1.0, 0.0)]];
        let mut v_pows = vec![vec![Complex::new(1.0, 0.0)]];
        for k in 1..=deg {
            u_pows.push(poly::mul(&u_pows[k - 1], &u));
            v_pows.push(poly::mul(&v_pows[k - 1], &v));
        }
        let homogenize = |coeffs: &[Complex]| {
            coeffs.iter().enumerate().fold(Vec::new(), |acc, (k, &ck)| {
                poly::add(&acc, &poly::scale(&poly::mul(&u_pows[k], &v_pows[deg - k]), ck))
            })
        };
        let p = homogenize(&self.num);
        let q = homogenize(&self.den);
        let num = poly::add(&poly::scale(&p, a), &poly::scale(&q, b));
        let den = poly::add(&poly::scale(&p, c), &poly::scale(&q, d));
        let scale = num.iter().chain(den.iter()).map(|c| c.norm()).fold(0.0, f64::max);
        if scale < 1e-14 {
            return Err(MapError::Degenerate);
        }
        let trim = |p: &[Complex]| {
            let mut out = p.to_vec();
            while out.last().is_some_and(|c| c.norm() <= CONJUGATE_TRIM_TOL * scale) {
                out.pop();
            }
            out
        };
        let den = trim(&den);
        if den.is_empty() {
            return Err(MapError::Degenerate);
        }
        RationalMap::new(trim(&num), den)
    }

    /// Largest coefficient difference after padding both maps to the same
    /// length. Both denominators are monic, so this compares the maps.
    pub fn coefficient_distance(&self, other: &RationalMap) -> f64 {
        let diff = |a: &[Complex], b: &[Complex]| poly::sub(a, b).iter().map(|c| c.norm()).fold(0.0, f64::max);
        diff(self.numerator(), other.numerator()).max(diff(self.denominator(), other.denominator()))
    }
}

/// Homogeneous evaluation at `[1 : w]` together with the `w`-derivative.
#[inline]
fn eval_reversed(coeffs: &[Complex], w: Complex) -> (Complex, Complex) {
    let mut v = Complex::new(0.0, 0.0);
    let mut d = Complex::new(0.0, 0.0);
    for &c in coeffs.iter() {
        d = d * w + v;
        v = v * w + c;
    }
    (v, d)
}

fn check_common_roots(num: &[Complex], den: &[Complex]) -> Result<(), MapError> {
    let (small, other) = if num.len() <= den.len() { (num, den) } else { (den, num) };
    if small.len() < 2 {
        return Ok(());
    }
    for r in poly::roots(small)? {
        let scale = poly::eval_abs(other, r);
        if poly::eval(other, r).norm() <= COMMON_ROOT_TOL * scale {
            return Err(MapError::CommonRoot(SpherePoint::new(r)));
        }
    }
    Ok(())
}
