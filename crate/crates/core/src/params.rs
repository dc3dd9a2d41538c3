//! Special parameters of the family: the three polynomial-like centers, the
//! conjugacies to `z^2 + c`, and the parabolic parameters on the boundary of
//! the period-one components.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly;
use crate::serde_complex;
use crate::sphere::{Complex, Mobius};

/// Centers are polished until the cubic residual drops below this.
pub const CENTER_RESIDUAL: f64 = 1e-12;

/// Solutions closer than this are merged.
pub const PARABOLIC_DEDUP: f64 = 1e-6;

/// A solution must satisfy the fixed-point system to this accuracy.
pub const PARABOLIC_RESIDUAL: f64 = 1e-10;

/// Solutions with `|a|` below this are the degenerate parameter 0.
pub const DEGENERATE_TOL: f64 = 1e-6;

/// Seed grid for the parabolic search: `a` over `[-1, 3] x [-2, 2]`.
pub const SEED_RE: (f64, f64) = (-1.0, 3.0);
pub const SEED_IM: (f64, f64) = (-2.0, 2.0);
pub const SEED_STEP: f64 = 0.25;

const NEWTON_STEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("multiplier {0} is not on the unit circle")]
    NotUnimodular(String),
    #[error("Newton failed from every seed; best residual {best:e}")]
    Stagnation { best: f64 },
    #[error("center polish failed: residual {0:e}")]
    Center(f64),
    #[error("parameter assignment failed: {0}")]
    Assignment(String),
}

fn cubic() -> [Complex; 4] {
    let r = |x: f64| Complex::new(x, 0.0);
    [r(-1.0), r(2.0), r(-3.0), r(1.0)]
}

/// Roots of `a^3 - 3a^2 + 2a - 1`: the real one, then the one in the upper
/// half plane, then its conjugate.
pub fn polynomial_centers() -> [Complex; 3] {
    let p = cubic();
    let mut roots = poly::roots(&p).expect("the center cubic has simple roots");
    for z in roots.iter_mut() {
        *z = poly::polish(&p, *z, 8);
    }
    roots.sort_by(|x, y| x.im.abs().total_cmp(&y.im.abs()));
    let real = Complex::new(roots[0].re, 0.0);
    let upper = if roots[1].im > 0.0 { roots[1] } else { roots[2] };
    [real, upper, upper.conj()]
}

/// `|a^3 - 3a^2 + 2a - 1|`.
pub fn center_residual(a: Complex) -> f64 {
    poly::eval(&cubic(), a).norm()
}

/// `c = -a^2 (a - 2)`, so that `f_a` at a center is conjugate to `z^2 + c`.
pub fn conjugate_polynomial_constant(a: Complex) -> Complex {
    -a * a * (a - 2.0)
}

/// `σ ∘ τ` with `τ(z) = z / (a z - a^2)` and `σ(w) = -a^3 (a - 2) w`.
///
/// At a center `a`, conjugating `f_a` by this map gives `z^2 + c(a)`.
pub fn center_conjugacy(a: Complex) -> Mobius {
    let zero = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    let tau = Mobius::new(one, zero, a, -a * a).expect("a is nonzero");
    let sigma = Mobius::affine(-a * a * a * (a - 2.0), zero).expect("a is not 0 or 2");
    sigma.compose(&tau)
}

/// A parameter where `f_a` has a fixed point `z` of given multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicParameter {
    #[serde(with = "serde_complex")]
    pub a: Complex,
    #[serde(with = "serde_complex")]
    pub fixed_point: Complex,
    #[serde(with = "serde_complex")]
    pub multiplier: Complex,
    /// The parameter is the degenerate value 0, outside the family.
    pub excluded: bool,
    pub residual: f64,
}

/// The system `F1 = (2-a)(z^3 - z^2) + 2z - a` (fixed point) and
/// `F2 = 2z - 2a - λ (2-a) z^3` (multiplier λ), with its Jacobian in `(z, a)`.
fn system(z: Complex, a: Complex, lambda: Complex) -> ([Complex; 2], [[Complex; 2]; 2]) {
    let z2 = z * z;
    let z3 = z2 * z;
    let f1 = (2.0 - a) * (z3 - z2) + 2.0 * z - a;
    let f2 = 2.0 * z - 2.0 * a - lambda * (2.0 - a) * z3;
    let j = [
        [(2.0 - a) * (3.0 * z2 - 2.0 * z) + 2.0, -(z3 - z2) - 1.0],
        [2.0 - 3.0 * lambda * (2.0 - a) * z2, -2.0 + lambda * z3],
    ];
    ([f1, f2], j)
}

pub fn parabolic_residual(z: Complex, a: Complex, lambda: Complex) -> f64 {
    let ([f1, f2], _) = system(z, a, lambda);
    f1.norm().max(f2.norm())
}

/// Two-variable Newton from `(z, a)`. Returns the last iterate and its
/// residual.
pub fn newton_system(mut z: Complex, mut a: Complex, lambda: Complex) -> (Complex, Complex, f64) {
    for _ in 0..NEWTON_STEPS {
        let ([f1, f2], j) = system(z, a, lambda);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 || !det.is_finite() {
            break;
        }
        let dz = (f1 * j[1][1] - f2 * j[0][1]) / det;
        let da = (f2 * j[0][0] - f1 * j[1][0]) / det;
        z -= dz;
        a -= da;
        if !(z.is_finite() && a.is_finite()) || a.norm() > 1e6 || z.norm() > 1e6 {
            break;
        }
        if dz.norm() + da.norm() <= 1e-15 * (1.0 + z.norm() + a.norm()) {
            break;
        }
    }
    let res = if z.is_finite() && a.is_finite() {
        parabolic_residual(z, a, lambda)
    } else {
        f64::INFINITY
    };
    (z, a, res)
}

fn seed_grid() -> Vec<Complex> {
    let nx = ((SEED_RE.1 - SEED_RE.0) / SEED_STEP).round() as usize;
    let ny = ((SEED_IM.1 - SEED_IM.0) / SEED_STEP).round() as usize;
    let mut out = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        for j in 0..=ny {
            out.push(Complex::new(
                SEED_RE.0 + i as f64 * SEED_STEP,
                SEED_IM.0 + j as f64 * SEED_STEP,
            ));
        }
    }
    out
}

/// All parameters whose map has a fixed point of multiplier `lambda`,
/// found by Newton from the seed grid with `z` started at each fixed point
/// of the seed map. Sorted by real part, then imaginary part.
pub fn parabolic_parameters(lambda: Complex) -> Result<Vec<ParabolicParameter>, ParamError> {
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        return Err(ParamError::NotUnimodular(crate::sphere::format_complex(lambda)));
    }
    multiplier_parameters(lambda)
}

/// Like [`parabolic_parameters`] without the unimodularity requirement.
pub fn multiplier_parameters(lambda: Complex) -> Result<Vec<ParabolicParameter>, ParamError> {
    let mut found: Vec<ParabolicParameter> = Vec::new();
    let mut best = f64::INFINITY;
    for seed in seed_grid() {
        if seed.norm() < 1e-9 || (seed - 2.0).norm() < 1e-9 {
            continue;
        }
        // fixed points of f_seed: (2-a) z^3 - (2-a) z^2 + 2z - a = 0
        let cubic = [-seed, Complex::new(2.0, 0.0), -(2.0 - seed), 2.0 - seed];
        let Ok(starts) = poly::roots(&cubic) else { continue };
        for z0 in starts {
            let (z, a, res) = newton_system(z0, seed, lambda);
            best = best.min(res);
            if res > PARABOLIC_RESIDUAL {
                continue;
            }
            if found.iter().any(|p| (p.a - a).norm() < PARABOLIC_DEDUP) {
                continue;
            }
            found.push(ParabolicParameter {
                a,
                fixed_point: z,
                multiplier: lambda,
                excluded: a.norm() < DEGENERATE_TOL,
                residual: res,
            });
        }
    }
    if found.is_empty() {
        return Err(ParamError::Stagnation { best });
    }
    for p in found.iter_mut() {
        if p.excluded {
            p.a = Complex::new(0.0, 0.0);
            p.fixed_point = Complex::new(0.0, 0.0);
        }
    }
    found.sort_by(|p, q| p.a.re.total_cmp(&q.a.re).then(p.a.im.total_cmp(&q.a.im)));
    Ok(found)
}

/// The distinguished parameters of the slice. `cut_x` and its conjugate are
/// where the two bitransitive components touch away from 0; `bif_delta2` and
/// `bif_delta3` are the parabolic parameters on the boundaries of the rabbit
/// and co-rabbit period-one components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialParameters {
    #[serde(with = "serde_complex")]
    pub airplane_a: Complex,
    #[serde(with = "serde_complex")]
    pub rabbit_a: Complex,
    #[serde(with = "serde_complex")]
    pub corabbit_a: Complex,
    #[serde(with = "serde_complex")]
    pub cut_x: Complex,
    #[serde(with = "serde_complex")]
    pub cut_xbar: Complex,
    #[serde(with = "serde_complex")]
    pub bif_delta2: Complex,
    #[serde(with = "serde_complex")]
    pub bif_delta3: Complex,
    #[serde(with = "serde_complex")]
    pub zero: Complex,
}

impl SpecialParameters {
    pub fn conj(&self) -> Self {
        SpecialParameters {
            airplane_a: self.airplane_a.conj(),
            rabbit_a: self.corabbit_a.conj(),
            corabbit_a: self.rabbit_a.conj(),
            cut_x: self.cut_xbar.conj(),
            cut_xbar: self.cut_x.conj(),
            bif_delta2: self.bif_delta3.conj(),
            bif_delta3: self.bif_delta2.conj(),
            zero: self.zero.conj(),
        }
    }

    pub fn cut_points(&self) -> [Complex; 3] {
        [self.zero, self.cut_x, self.cut_xbar]
    }
}

/// Modulus of the multiplier at which a parabolic candidate is examined
/// inside its adjacent period-one component.
pub const ASSIGNMENT_MODULUS: f64 = 0.9;

/// Follows a solution `(z, a)` of the system from multiplier `from` to `to`
/// in small steps.
pub fn continue_solution(
    z: Complex,
    a: Complex,
    from: Complex,
    to: Complex,
    steps: usize,
) -> Option<(Complex, Complex)> {
    let (mut z, mut a) = (z, a);
    for k in 1..=steps {
        let lambda = from + (to - from) * (k as f64 / steps as f64);
        let (nz, na, res) = newton_system(z, a, lambda);
        if res > PARABOLIC_RESIDUAL {
            return None;
        }
        (z, a) = (nz, na);
    }
    Some((z, a))
}

/// Whether some repelling fixed point of `f_a` touches all three components
/// of the critical cycle's immediate basin.
pub fn has_triple_fixed_point(a: Complex) -> Result<bool, ParamError> {
    use crate::families::{per3_map, Per3Parameter};
    use crate::orbit::Stability;
    let p = Per3Parameter::new(a).map_err(|e| ParamError::Assignment(e.to_string()))?;
    let f = per3_map(p);
    let fixed = crate::periodic::fixed_points(&f).map_err(|e| ParamError::Assignment(e.to_string()))?;
    Ok(fixed
        .iter()
        .filter(|q| q.stability == Stability::Repelling)
        .any(|q| crate::classify::triple_contact_test(&f, q.location).is_triple()))
}

/// Computes every special parameter. The two conjugate pairs of parabolic
/// parameters are told apart by moving each into its adjacent period-one
/// component (multiplier modulus [`ASSIGNMENT_MODULUS`]): only the rabbit
/// and co-rabbit components have a fixed point on the boundary of all three
/// critical-cycle components.
pub fn special_parameters() -> Result<SpecialParameters, ParamError> {
    let [a1, a2, a3] = polynomial_centers();
    let omega = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let candidates: Vec<ParabolicParameter> = parabolic_parameters(omega)?
        .into_iter()
        .filter(|p| !p.excluded)
        .collect();
    let mut cut = Vec::new();
    let mut bif = Vec::new();
    for c in &candidates {
        let (_, inside) = continue_solution(c.fixed_point, c.a, omega, ASSIGNMENT_MODULUS * omega, 10)
            .ok_or_else(|| ParamError::Assignment(format!("continuation from {} failed", c.a)))?;
        if has_triple_fixed_point(inside)? {
            bif.push(c.a);
        } else {
            cut.push(c.a);
        }
    }
    if cut.len() != 1 || bif.len() != 1 {
        return Err(ParamError::Assignment(format!(
            "expected one cut pair and one bifurcation pair, got {} and {}",
            cut.len(),
            bif.len()
        )));
    }
    let upper = |z: Complex| if z.im >= 0.0 { z } else { z.conj() };
    let (x, d) = (upper(cut[0]), upper(bif[0]));
    Ok(SpecialParameters {
        airplane_a: a1,
        rabbit_a: a2,
        corabbit_a: a3,
        cut_x: x,
        cut_xbar: x.conj(),
        bif_delta2: d,
        bif_delta3: d.conj(),
        zero: Complex::new(0.0, 0.0),
    })
}

/// [`special_parameters`], computed once.
pub fn special_parameters_cached() -> Result<&'static SpecialParameters, ParamError> {
    static CELL: std::sync::OnceLock<Result<SpecialParameters, ParamError>> = std::sync::OnceLock::new();
    CELL.get_or_init(special_parameters).as_ref().map_err(Clone::clone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{per3_map, Per3Parameter};
    use crate::rational::RationalMap;
    use crate::sphere::{chordal_distance, mobius_conjugate, SpherePoint};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn omega() -> Complex {
        Complex::from_polar(1.0, 2.0 * PI / 3.0)
    }

    #[test]
    fn centers() {
        let [a1, a2, a3] = polynomial_centers();
        assert!((a1 - c(2.32472, 0.0)).norm() < 1e-5);
        assert!((a2 - c(0.33764, 0.56228)).norm() < 1e-5);
        assert_eq!(a3, a2.conj());
        for a in [a1, a2, a3] {
            assert!(center_residual(a) < CENTER_RESIDUAL);
        }
        assert!((a1 + a2 + a3 - 3.0).norm() < 1e-12);
    }

    #[test]
    fn airplane_constant_matches_period_three_center() {
        // Q(Q(Q(0))) = 0 for Q = z^2 + c gives c (c^3 + 2c^2 + c + 1) = 0
        let oracle = [c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        let roots = poly::roots(&oracle).unwrap();
        let real = roots.iter().find(|r| r.im.abs() < 1e-9).unwrap();
        let real = poly::polish(&oracle, c(real.re, 0.0), 8);
        let [a1, a2, _] = polynomial_centers();
        assert!((conjugate_polynomial_constant(a1) - real).norm() < 1e-9);
        assert!((conjugate_polynomial_constant(a1) - c(-1.75488, 0.0)).norm() < 1e-5);
        assert!((conjugate_polynomial_constant(a2) - c(-0.122561, 0.744861)).norm() < 1e-5);
        for r in roots {
            let q = RationalMap::quadratic(r);
            let z3 = crate::orbit::iterate(&q, SpherePoint::ZERO, 3);
            assert!(chordal_distance(z3, SpherePoint::ZERO) < 1e-12);
        }
    }

    #[test]
    fn conjugacy_to_quadratic_polynomials() {
        for a in polynomial_centers() {
            let f = per3_map(Per3Parameter::new(a).unwrap());
            let g = mobius_conjugate(&f, &center_conjugacy(a)).unwrap();
            let q = RationalMap::quadratic(conjugate_polynomial_constant(a));
            assert!(g.coefficient_distance(&q) < 1e-9, "{g:?}");
        }
    }

    /// Eliminating `a` from the system gives `(1+λ) z^3 - (3+λ) z^2 + 2z - 1 = 0`
    /// and `a = (2(z^3 - z^2) + 2z) / (z^3 - z^2 + 1)`.
    fn elimination(lambda: Complex) -> Vec<Complex> {
        let p = [c(-1.0, 0.0), c(2.0, 0.0), -(3.0 + lambda), 1.0 + lambda];
        let mut out: Vec<Complex> = poly::roots(&p)
            .unwrap()
            .into_iter()
            .map(|z| {
                let z = poly::polish(&p, z, 8);
                let w = z * z * z - z * z;
                (2.0 * w + 2.0 * z) / (w + 1.0)
            })
            .collect();
        out.push(c(0.0, 0.0));
        out
    }

    #[test]
    fn parabolic_values() {
        let w = omega();
        let mut all = Vec::new();
        for lambda in [w, w.conj()] {
            let ps = parabolic_parameters(lambda).unwrap();
            assert_eq!(ps.len(), 3, "{ps:?}");
            let oracle = elimination(lambda);
            for p in &ps {
                assert!(p.residual < PARABOLIC_RESIDUAL);
                assert!(oracle.iter().any(|o| (o - p.a).norm() < 1e-9), "{:?}", p.a);
                if !p.excluded {
                    let f = per3_map(Per3Parameter::new(p.a).unwrap());
                    let z = SpherePoint::new(p.fixed_point);
                    assert!(chordal_distance(f.eval(z), z) < 1e-10);
                    let m = f.derivative(z).finite().unwrap();
                    assert!((m - lambda).norm() < 1e-9);
                }
            }
            all.extend(ps);
        }
        all.retain(|p| !p.excluded);
        let targets = [
            c(1.84445, 0.893455),
            c(1.84445, -0.893455),
            c(0.441264, 0.59116),
            c(0.441264, -0.59116),
        ];
        for t in targets {
            assert_eq!(all.iter().filter(|p| (p.a - t).norm() < 1e-4).count(), 1, "{t}");
        }
    }

    #[test]
    fn parabolic_conjugation_symmetry() {
        let up = parabolic_parameters(omega()).unwrap();
        let down = parabolic_parameters(omega().conj()).unwrap();
        for p in &up {
            assert!(down.iter().any(|q| (q.a - p.a.conj()).norm() < 1e-10));
        }
    }

    #[test]
    fn special_parameter_record() {
        let s = special_parameters().unwrap();
        assert!((s.cut_x - c(1.84445, 0.893455)).norm() < 1e-4);
        assert!((s.bif_delta2 - c(0.441264, 0.59116)).norm() < 1e-4);
        assert_eq!(s.zero, c(0.0, 0.0));
        assert_eq!(s.airplane_a.im, 0.0);
        assert_eq!(s.rabbit_a, s.corabbit_a.conj());
        assert_eq!(s.cut_x, s.cut_xbar.conj());
        assert_eq!(s.bif_delta2, s.bif_delta3.conj());
        assert_eq!(s.conj(), s);
        let w = omega();
        for (a, lambda) in [(s.cut_x, w), (s.bif_delta2, w)] {
            let ps = parabolic_parameters(lambda).unwrap();
            let p = ps.iter().find(|p| (p.a - a).norm() < 1e-12).unwrap();
            assert!(parabolic_residual(p.fixed_point, p.a, lambda) < PARABOLIC_RESIDUAL);
        }
        for a in [s.airplane_a, s.rabbit_a, s.corabbit_a] {
            assert!(center_residual(a) < 1e-10);
        }
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(matches!(
            parabolic_parameters(c(0.5, 0.0)),
            Err(ParamError::NotUnimodular(_))
        ));
    }
}
