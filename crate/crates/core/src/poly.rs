//! Dense complex polynomials (ascending coefficients) and a simultaneous
//! root finder.

use thiserror::Error;

use crate::sphere::Complex;

/// Iteration budget of the simultaneous root finder.
pub const ROOT_ITERATIONS: usize = 500;

/// Relative (backward-error) residual target for polynomial roots.
pub const ROOT_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("root finder did not converge; worst relative residual {worst:e}")]
    NoConvergence { residuals: Vec<f64>, worst: f64 },
}

const ZERO: Complex = Complex::new(0.0, 0.0);

pub fn degree(p: &[Complex]) -> Option<usize> {
    p.iter().rposition(|c| *c != ZERO)
}

/// Drops trailing coefficients whose modulus is at most `rel_tol` times the
/// largest coefficient modulus.
pub fn trim(p: &[Complex], rel_tol: f64) -> Vec<Complex> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = p.to_vec();
    while let Some(last) = out.last() {
        if last.norm() <= rel_tol * scale {
            out.pop();
        } else {
            break;
        }
    }
    out
}

#[inline]
pub fn eval(p: &[Complex], z: Complex) -> Complex {
    p.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Value and first derivative by Horner's scheme.
#[inline]
pub fn eval_with_derivative(p: &[Complex], z: Complex) -> (Complex, Complex) {
    let mut v = ZERO;
    let mut d = ZERO;
    for &c in p.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// Sum of `|c_k| |z|^k`, the natural scale for a residual at `z`.
pub fn eval_abs(p: &[Complex], z: Complex) -> f64 {
    let r = z.norm();
    p.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

pub fn derivative(p: &[Complex]) -> Vec<Complex> {
    p.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

pub fn add(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn sub(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) - b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(a: &[Complex], s: Complex) -> Vec<Complex> {
    a.iter().map(|&c| c * s).collect()
}

pub fn mul(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `z * p(z)`.
pub fn shift(p: &[Complex]) -> Vec<Complex> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(ZERO);
    out.extend_from_slice(p);
    out
}

/// Newton correction `p(z)/p'(z)`, evaluated in the reversed polynomial when
/// `|z| > 1` so that high degrees do not overflow.
fn newton_ratio(p: &[Complex], z: Complex) -> Option<Complex> {
    let n = p.len() - 1;
    if z.norm_sqr() <= 1.0 {
        let (v, d) = eval_with_derivative(p, z);
        if d == ZERO {
            return None;
        }
        Some(v / d)
    } else {
        let w = z.inv();
        let mut q = ZERO;
        let mut dq = ZERO;
        for &c in p.iter() {
            dq = dq * w + q;
            q = q * w + c;
        }
        let denom = q * n as f64 - w * dq;
        if denom == ZERO {
            return None;
        }
        Some(z * q / denom)
    }
}

fn relative_residual(p: &[Complex], z: Complex) -> f64 {
    if z.norm_sqr() <= 1.0 {
        let s = eval_abs(p, z);
        if s == 0.0 {
            0.0
        } else {
            eval(p, z).norm() / s
        }
    } else {
        let w = z.inv();
        let rev: Vec<Complex> = p.iter().rev().copied().collect();
        let s = eval_abs(&rev, w);
        if s == 0.0 {
            0.0
        } else {
            eval(&rev, w).norm() / s
        }
    }
}

/// All complex roots of `p` (with multiplicity) by Aberth–Ehrlich
/// iteration followed by a Newton polish.
pub fn roots(p: &[Complex]) -> Result<Vec<Complex>, RootError> {
    let deg = degree(p).ok_or(RootError::ZeroPolynomial)?;
    let p = &p[..=deg];
    // Exact zero roots are split off; they otherwise slow the iteration.
    let zeros = p.iter().position(|c| *c != ZERO).unwrap_or(0);
    let q = &p[zeros..];
    let n = q.len() - 1;
    let mut out = vec![ZERO; zeros];
    if n == 0 {
        return Ok(out);
    }
    if n == 1 {
        out.push(-q[0] / q[1]);
        return Ok(out);
    }

    // Starting radius: geometric mean of the root moduli.
    let radius = (q[0].norm() / q[n].norm()).powf(1.0 / n as f64).max(1e-3);
    let mut z = aberth(
        circle_start(n, radius),
        |x| newton_ratio(q, x),
        |x| relative_residual(q, x) <= 1e-15,
    );
    for zi in z.iter_mut() {
        *zi = polish(q, *zi, 8);
    }
    let residuals: Vec<f64> = z.iter().map(|&zi| relative_residual(q, zi)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    // Multiple roots only reach residuals near eps^(1/m); accept the iteration
    // if it has settled anywhere close to the target.
    if worst > ROOT_RESIDUAL.sqrt() || !worst.is_finite() {
        return Err(RootError::NoConvergence { residuals, worst });
    }
    out.extend(z);
    Ok(out)
}

/// `n` starting points on a slightly perturbed circle of the given radius.
pub fn circle_start(n: usize, radius: f64) -> Vec<Complex> {
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex::from_polar(radius * (1.0 + 0.03 * (k % 3) as f64), theta)
        })
        .collect()
}

/// Aberth–Ehrlich iteration from the given starting points. `ratio(z)` is
/// the Newton correction `p(z)/p'(z)` of the function whose zeros are
/// sought; `done(z)` may stop a single root early.
pub fn aberth<R, D>(mut z: Vec<Complex>, ratio: R, done_at: D) -> Vec<Complex>
where
    R: Fn(Complex) -> Option<Complex>,
    D: Fn(Complex) -> bool,
{
    let n = z.len();
    let mut done = vec![false; n];
    for _ in 0..ROOT_ITERATIONS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let r = match ratio(z[i]) {
                Some(r) => r,
                None => {
                    let nudge = Complex::new(1e-8, 1e-8) * (1.0 + z[i].norm());
                    z[i] += nudge;
                    all_done = false;
                    continue;
                }
            };
            let mut repulsion = ZERO;
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i] - zj;
                    if diff != ZERO {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex::new(1.0, 0.0) - r * repulsion;
            let step = if denom == ZERO { r } else { r / denom };
            if step.is_finite() {
                z[i] -= step;
            }
            if step.norm() <= 1e-15 * z[i].norm().max(1e-300) || done_at(z[i]) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

/// A few Newton steps on `p` from `z`, keeping the best iterate.
pub fn polish(p: &[Complex], z: Complex, steps: usize) -> Complex {
    let mut best = z;
    let mut best_res = relative_residual(p, z);
    let mut cur = z;
    for _ in 0..steps {
        if best_res == 0.0 {
            break;
        }
        let Some(r) = newton_ratio(p, cur) else { break };
        cur -= r;
        if !cur.is_finite() {
            break;
        }
        let res = relative_residual(p, cur);
        if res < best_res {
            best = cur;
            best_res = res;
        } else if res > 4.0 * best_res {
            break;
        }
    }
    best
}
