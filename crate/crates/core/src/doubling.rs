//! Exact combinatorics of the doubling map `θ -> 2θ (mod 1)` on rational
//! angles.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest denominator accepted by [`Angle::new`].
pub const MAX_DENOMINATOR: u64 = 1 << 40;

/// Steps kept when an orbit is truncated for the infinite-orbit evidence.
pub const TRUNCATION: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DoublingError {
    #[error("angle {0}/{1} is not in [0, 1) or has a zero or oversized denominator")]
    InvalidAngle(u64, u64),
    #[error("malformed angle `{0}`; expected p/q")]
    Parse(String),
    #[error("angle {0} is a quadrant endpoint")]
    Endpoint(Angle),
    #[error("the orbits share the angle {0}")]
    NotDistinct(Angle),
    #[error("an orbit has fewer than two distinct angles")]
    TooSmall,
}

/// A reduced fraction `num/den` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Angle {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Angle {
    pub const ZERO: Angle = Angle { num: 0, den: 1 };

    /// Reduces `num/den`; requires `num < den`.
    pub fn new(num: u64, den: u64) -> Result<Self, DoublingError> {
        if den == 0 || num >= den || den > MAX_DENOMINATOR {
            return Err(DoublingError::InvalidAngle(num, den));
        }
        let g = gcd(num, den);
        Ok(Angle {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Binary digits after the point, `count` of them.
    pub fn binary_digits(&self, count: usize) -> String {
        let mut out = String::with_capacity(count);
        let mut x = *self;
        for _ in 0..count {
            out.push(if 2 * x.num >= x.den { '1' } else { '0' });
            x = double(x);
        }
        out
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Angle {
    type Err = DoublingError;
    fn from_str(s: &str) -> Result<Self, DoublingError> {
        let bad = || DoublingError::Parse(s.to_string());
        let s = s.trim();
        if s == "0" {
            return Ok(Angle::ZERO);
        }
        let (p, q) = s.split_once('/').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        Angle::new(p, q)
    }
}

/// `2θ mod 1`, exactly.
pub fn double(theta: Angle) -> Angle {
    let n = 2 * theta.num;
    let n = if n >= theta.den { n - theta.den } else { n };
    Angle::new(n, theta.den).expect("doubling stays in [0, 1)")
}

/// The forward orbit of an angle, listed until the first repetition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublingOrbit {
    pub angles: Vec<Angle>,
    pub periodic: bool,
    /// Period of the seed, 0 when the seed is only preperiodic.
    pub period: usize,
    /// Steps before the orbit enters its cycle.
    pub preperiod: usize,
}

impl DoublingOrbit {
    /// The angles that are periodic (the cycle the orbit falls into).
    pub fn cycle(&self) -> &[Angle] {
        &self.angles[self.preperiod..]
    }
}

pub fn orbit(theta: Angle) -> DoublingOrbit {
    let mut angles = vec![theta];
    loop {
        let next = double(*angles.last().unwrap());
        if let Some(pos) = angles.iter().position(|a| *a == next) {
            let periodic = pos == 0;
            let cycle_len = angles.len() - pos;
            return DoublingOrbit {
                periodic,
                period: if periodic { cycle_len } else { 0 },
                preperiod: pos,
                angles,
            };
        }
        angles.push(next);
    }
}

/// The first `steps` angles of the orbit of `theta` (fewer if it repeats
/// earlier).
pub fn truncated_orbit(theta: Angle, steps: usize) -> Vec<Angle> {
    let full = orbit(theta);
    full.angles.into_iter().take(steps).collect()
}

/// Index of the open quadrant containing θ: 1 for `(0, 1/4)`, 2 for
/// `(1/4, 1/2)`, 3 for `(1/2, 3/4)`, 4 for `(3/4, 1)`. Equivalently the
/// first two binary digits `00`, `01`, `10`, `11`.
pub fn quadrant(theta: Angle) -> Result<u8, DoublingError> {
    let four = 4 * theta.num as u128;
    let den = theta.den as u128;
    if four.is_multiple_of(den) {
        return Err(DoublingError::Endpoint(theta));
    }
    Ok((four / den) as u8 + 1)
}

fn distinct_sorted(angles: &[Angle]) -> Vec<Angle> {
    let mut v = angles.to_vec();
    v.sort();
    v.dedup();
    v
}

fn check_pair(eta: &[Angle], tau: &[Angle]) -> Result<(Vec<Angle>, Vec<Angle>), DoublingError> {
    let e = distinct_sorted(eta);
    let t = distinct_sorted(tau);
    if e.len() < 2 || t.len() < 2 {
        return Err(DoublingError::TooSmall);
    }
    if let Some(x) = e.iter().find(|x| t.binary_search(x).is_ok()) {
        return Err(DoublingError::NotDistinct(*x));
    }
    Ok((e, t))
}

/// Whether two orbits are mixed: some `η_a < τ_b < η_c < τ_d` in the cyclic
/// order of the circle.
///
/// Decided by walking both sorted angle sets around the circle and counting
/// the runs of consecutive angles from the same orbit. The orbits are mixed
/// exactly when there are at least four runs.
pub fn is_mixed(eta: &DoublingOrbit, tau: &DoublingOrbit) -> Result<bool, DoublingError> {
    is_mixed_sets(&eta.angles, &tau.angles)
}

pub fn is_mixed_sets(eta: &[Angle], tau: &[Angle]) -> Result<bool, DoublingError> {
    let (e, t) = check_pair(eta, tau)?;
    let (mut i, mut j) = (0, 0);
    let mut labels = Vec::with_capacity(e.len() + t.len());
    while i < e.len() || j < t.len() {
        if j == t.len() || (i < e.len() && e[i] < t[j]) {
            labels.push(false);
            i += 1;
        } else {
            labels.push(true);
            j += 1;
        }
    }
    let n = labels.len();
    let changes = (0..n).filter(|&k| labels[k] != labels[(k + 1) % n]).count();
    Ok(changes >= 4)
}

/// True when `x1, x2, x3, x4` (pairwise distinct) appear in this order going
/// once around the circle.
pub fn cyclically_ordered(x: [Angle; 4]) -> bool {
    // rotate so that the smallest comes first, then require a strictly
    // increasing sequence
    let start = (0..4).min_by(|&a, &b| x[a].cmp(&x[b])).unwrap();
    (0..3).all(|k| x[(start + k) % 4] < x[(start + k + 1) % 4])
}

/// Reference definition: search all index quadruples.
pub fn is_mixed_brute_force(eta: &[Angle], tau: &[Angle]) -> Result<bool, DoublingError> {
    let (e, t) = check_pair(eta, tau)?;
    for &a in &e {
        for &b in &t {
            for &c in &e {
                if c == a {
                    continue;
                }
                for &d in &t {
                    if d != b && cyclically_ordered([a, b, c, d]) {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// All cycles of exact period `k`, each listed from its smallest angle in
/// orbit order, sorted by that angle.
pub fn cycles_of_period(k: usize) -> Vec<DoublingOrbit> {
    assert!((1..=40).contains(&k), "period out of range");
    let den = (1u64 << k) - 1;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for p in 0..den {
        let theta = Angle::new(p, den).unwrap();
        if seen.contains(&theta) {
            continue;
        }
        let o = orbit(theta);
        for a in &o.angles {
            seen.insert(*a);
        }
        if o.period == k {
            out.push(o);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedReport {
    pub min_period: usize,
    pub max_period: usize,
    pub cycles: usize,
    pub pairs_tested: usize,
    pub all_mixed: bool,
    /// Pairs (given by their smallest angles) that are not mixed.
    pub exceptions: Vec<(Angle, Angle)>,
}

/// Tests every pair of distinct cycles with periods in `3..=max_period`.
pub fn mixed_check(max_period: usize) -> MixedReport {
    let cycles: Vec<DoublingOrbit> = (3..=max_period).flat_map(cycles_of_period).collect();
    let mut pairs = 0;
    let mut exceptions = Vec::new();
    for i in 0..cycles.len() {
        for j in (i + 1)..cycles.len() {
            pairs += 1;
            if !is_mixed(&cycles[i], &cycles[j]).expect("distinct cycles") {
                exceptions.push((cycles[i].angles[0], cycles[j].angles[0]));
            }
        }
    }
    MixedReport {
        min_period: 3,
        max_period,
        cycles: cycles.len(),
        pairs_tested: pairs,
        all_mixed: exceptions.is_empty(),
        exceptions,
    }
}

/// Evidence for long orbits: for all preperiodic seeds `p / (2^j q)` with
/// `q` odd up to `max_q` and `j` in `1..=max_j`, whose orbits land on cycles
/// of period at least 3, the orbits truncated to [`TRUNCATION`] steps are
/// pairwise mixed. Returns `(pairs tested, pairs not mixed)`.
pub fn preperiodic_evidence(max_q: u64, max_j: u32) -> (usize, usize) {
    let mut orbits: Vec<Vec<Angle>> = Vec::new();
    let mut q = 7;
    while q <= max_q {
        for j in 1..=max_j {
            let den = q << j;
            for p in (1..den).step_by(2) {
                let theta = Angle::new(p, den).unwrap();
                if theta.den != den {
                    continue;
                }
                let o = orbit(theta);
                if o.cycle().len() >= 3 {
                    orbits.push(truncated_orbit(theta, TRUNCATION));
                }
            }
        }
        q += 2;
    }
    let mut tested = 0;
    let mut failures = 0;
    for i in 0..orbits.len() {
        for j in (i + 1)..orbits.len() {
            if let Ok(m) = is_mixed_sets(&orbits[i], &orbits[j]) {
                tested += 1;
                if !m {
                    failures += 1;
                }
            }
        }
    }
    (tested, failures)
}
