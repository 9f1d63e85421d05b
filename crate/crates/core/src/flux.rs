//! Flux pairs, their polygonal interpolants, envelope construction, Liu
//! admissibility and the smooth switch function.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Points used to verify `g - f >= c0` on the validity interval.
const GAP_SAMPLES: usize = 4097;
/// Points used by the brute-force wave speed bound.
const SPEED_SAMPLES: usize = 20001;
const SPEED_SAFETY: f64 = 1.0 + 1e-6;
/// Interior points used when a smooth flux is checked for Liu admissibility.
const SMOOTH_LIU_SAMPLES: usize = 1023;

/// Grid nodes closer than this (relative) distance to an envelope endpoint
/// are not used as breakpoints.
pub(crate) const NODE_EPS: f64 = 1e-12;
/// Relative slack on chord-slope comparisons inside the hull scan.
const HULL_TOL: f64 = 1e-14;
/// Relative slack on the Liu inequality; equality counts as admissible.
pub(crate) const LIU_TOL: f64 = 1e-12;

/// Polynomial with coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(0.0);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add_constant(&self, c: f64) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += c;
        Polynomial::new(coeffs)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        - other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

fn sample_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |k| {
        if k + 1 == n {
            hi
        } else {
            lo + (hi - lo) * (k as f64) / ((n - 1) as f64)
        }
    })
}

/// Pair of smooth fluxes with a uniform positive gap on a validity interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFluxPair {
    f: Polynomial,
    g: Polynomial,
    df: Polynomial,
    dg: Polynomial,
    c0: f64,
    u_range: (f64, f64),
}

impl SmoothFluxPair {
    /// Builds the pair and measures `c0 = min (g - f)` on a dense grid of
    /// `u_range`.
    pub fn new(f: Polynomial, g: Polynomial, u_range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = u_range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Degenerate(format!("invalid state range [{lo}, {hi}]")));
        }
        let mut c0 = f64::INFINITY;
        let mut at = lo;
        for u in sample_points(lo, hi, GAP_SAMPLES) {
            let (fv, gv) = (f.eval(u), g.eval(u));
            if !fv.is_finite() || !gv.is_finite() {
                return Err(Error::NonFiniteFlux { node: u });
            }
            if gv - fv < c0 {
                c0 = gv - fv;
                at = u;
            }
        }
        if c0 <= 0.0 {
            return Err(Error::GapViolation { min_gap: c0, at });
        }
        Ok(Self {
            df: f.derivative(),
            dg: g.derivative(),
            f,
            g,
            c0,
            u_range,
        })
    }

    pub fn with_range(&self, lo: f64, hi: f64) -> Result<Self> {
        Self::new(self.f.clone(), self.g.clone(), (lo, hi))
    }

    pub fn f(&self) -> &Polynomial {
        &self.f
    }

    pub fn g(&self) -> &Polynomial {
        &self.g
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.u_range
    }

    #[inline]
    pub fn eval_f(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    #[inline]
    pub fn eval_g(&self, u: f64) -> f64 {
        self.g.eval(u)
    }

    pub fn df(&self, u: f64) -> f64 {
        self.df.eval(u)
    }

    pub fn dg(&self, u: f64) -> f64 {
        self.dg.eval(u)
    }

    /// Largest gap `g - f` on `[lo, hi]`, sampled densely.
    pub fn gap_max_on(&self, lo: f64, hi: f64) -> f64 {
        sample_points(lo, hi, GAP_SAMPLES)
            .map(|u| self.g.eval(u) - self.f.eval(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_affine(&self) -> bool {
        self.f.degree() <= 1 && self.g.degree() <= 1
    }
}

/// `λ† = max { |f'(ω)|, |g'(ω)| : |ω| <= m }` by dense sampling, inflated by
/// a relative safety factor of `1e-6`.
pub fn max_wave_speed(pair: &SmoothFluxPair, m: f64) -> f64 {
    let m = m.abs();
    sample_points(-m, m, SPEED_SAMPLES)
        .map(|u| pair.df(u).abs().max(pair.dg(u).abs()))
        .fold(0.0, f64::max)
        * SPEED_SAFETY
}

/// Continuous piecewise affine interpolant of a flux on the grid `2^-ν ℤ`,
/// restricted to the node window `[j_min, j_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffineFlux {
    nu: u32,
    j_min: i64,
    values: Vec<f64>,
}

impl PiecewiseAffineFlux {
    pub fn from_table(nu: u32, j_min: i64, values: Vec<f64>) -> Result<Self> {
        if nu == 0 || nu > 40 {
            return Err(Error::Degenerate(format!("resolution exponent {nu} out of range")));
        }
        if values.len() < 2 {
            return Err(Error::Degenerate("flux window needs at least two nodes".into()));
        }
        let h = (-(nu as f64)).exp2();
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFlux {
                node: (j_min + k as i64) as f64 * h,
            });
        }
        Ok(Self { nu, j_min, values })
    }

    pub fn from_fn(nu: u32, j_min: i64, j_max: i64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if j_max <= j_min {
            return Err(Error::Degenerate("empty flux window".into()));
        }
        let h = (-(nu as f64)).exp2();
        let values = (j_min..=j_max).map(|j| f(j as f64 * h)).collect();
        Self::from_table(nu, j_min, values)
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    /// Node spacing `2^-ν`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        (-(self.nu as f64)).exp2()
    }

    #[inline]
    fn inv_spacing(&self) -> f64 {
        (self.nu as f64).exp2()
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_min + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn node(&self, j: i64) -> f64 {
        j as f64 * self.spacing()
    }

    #[inline]
    pub fn node_value(&self, j: i64) -> f64 {
        self.values[(j - self.j_min) as usize]
    }

    pub fn lo(&self) -> f64 {
        self.node(self.j_min)
    }

    pub fn hi(&self) -> f64 {
        self.node(self.j_max())
    }

    fn check(&self, u: f64) -> Result<()> {
        let (lo, hi) = (self.lo(), self.hi());
        let slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        if !(u >= lo - slack && u <= hi + slack) {
            return Err(Error::OutOfRange { u, lo, hi });
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        self.check(u)?;
        Ok(self.value(u))
    }

    /// Interpolated value without a range check; the end segments are
    /// extended affinely.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        let inv_h = self.inv_spacing();
        let k = ((u * inv_h).floor() as i64).clamp(self.j_min, self.j_max() - 1);
        let idx = (k - self.j_min) as usize;
        let uj = self.node(k);
        let uj1 = self.node(k + 1);
        inv_h * ((u - uj) * self.values[idx + 1] + (uj1 - u) * self.values[idx])
    }

    /// Rankine–Hugoniot slope between two states.
    #[inline]
    pub fn chord(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return self.slope_at(a);
        }
        (self.value(b) - self.value(a)) / (b - a)
    }

    /// Slope of the segment containing `u` (right segment at nodes).
    pub fn slope_at(&self, u: f64) -> f64 {
        let k = ((u * self.inv_spacing()).floor() as i64).clamp(self.j_min, self.j_max() - 1);
        (self.node_value(k + 1) - self.node_value(k)) * self.inv_spacing()
    }

    pub fn max_abs_slope(&self) -> f64 {
        let inv_h = self.inv_spacing();
        self.values
            .windows(2)
            .map(|w| ((w[1] - w[0]) * inv_h).abs())
            .fold(0.0, f64::max)
    }

    /// Second differences all `>= -tol`.
    pub fn is_convex(&self) -> bool {
        let scale = self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        self.values
            .windows(3)
            .all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-13 * scale)
    }

    pub fn is_concave(&self) -> bool {
        let scale = self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        self.values
            .windows(3)
            .all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-13 * scale)
    }

    /// Indices of grid nodes strictly inside `(a, b)`, `a < b`, skipping
    /// nodes that sit within a relative `1e-12` of either endpoint.
    pub fn nodes_between(&self, a: f64, b: f64) -> std::ops::RangeInclusive<i64> {
        let margin = NODE_EPS * a.abs().max(b.abs()).max(1.0);
        let inv_h = self.inv_spacing();
        let lo = (((a + margin) * inv_h).floor() as i64 + 1).max(self.j_min);
        let hi = (((b - margin) * inv_h).ceil() as i64 - 1).min(self.j_max());
        lo..=hi
    }
}

/// One wave of an envelope fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub u_left: f64,
    pub u_right: f64,
    pub speed: f64,
}

/// Breakpoints `{a} ∪ nodes ∪ {b}` with their flux values, `a < b`.
fn breakpoints(flux: &PiecewiseAffineFlux, a: f64, b: f64) -> Vec<(f64, f64)> {
    let nodes = flux.nodes_between(a, b);
    let mut pts = Vec::with_capacity(2 + nodes.clone().count());
    pts.push((a, flux.value(a)));
    pts.extend(nodes.map(|j| (flux.node(j), flux.node_value(j))));
    pts.push((b, flux.value(b)));
    pts
}

fn slope(p: (f64, f64), q: (f64, f64)) -> f64 {
    (q.1 - p.1) / (q.0 - p.0)
}

/// Lower convex hull of points sorted by abscissa; collinear points dropped.
fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let s1 = slope(hull[hull.len() - 2], hull[hull.len() - 1]);
            let s2 = slope(hull[hull.len() - 1], p);
            if s1 >= s2 - HULL_TOL * s1.abs().max(s2.abs()).max(1.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Vertices of the convex minorant of `flux` on `[u_l, u_r]`, as waves with
/// strictly increasing speeds from `u_l` to `u_r`.
pub fn lower_convex_envelope(flux: &PiecewiseAffineFlux, u_l: f64, u_r: f64) -> Result<Vec<Wave>> {
    if !(u_l < u_r) {
        return Err(Error::Degenerate(format!(
            "lower envelope needs u_l < u_r, got {u_l} and {u_r}"
        )));
    }
    flux.check(u_l)?;
    flux.check(u_r)?;
    let hull = lower_hull(&breakpoints(flux, u_l, u_r));
    Ok(hull
        .windows(2)
        .map(|w| Wave {
            u_left: w[0].0,
            u_right: w[1].0,
            speed: slope(w[0], w[1]),
        })
        .collect())
}

/// Vertices of the concave majorant of `flux` on `[u_r, u_l]`, `u_l > u_r`,
/// ordered from `u_l` down to `u_r` so that speeds increase left to right.
pub fn upper_concave_envelope(flux: &PiecewiseAffineFlux, u_l: f64, u_r: f64) -> Result<Vec<Wave>> {
    if !(u_l > u_r) {
        return Err(Error::Degenerate(format!(
            "upper envelope needs u_l > u_r, got {u_l} and {u_r}"
        )));
    }
    flux.check(u_l)?;
    flux.check(u_r)?;
    let neg: Vec<(f64, f64)> = breakpoints(flux, u_r, u_l)
        .into_iter()
        .map(|(u, v)| (u, -v))
        .collect();
    let hull = lower_hull(&neg);
    Ok(hull
        .windows(2)
        .rev()
        .map(|w| Wave {
            u_left: w[1].0,
            u_right: w[0].0,
            speed: -slope(w[0], w[1]),
        })
        .collect())
}

/// Graph of a flux as seen by the Liu test: values plus the intermediate
/// states that need checking.
pub trait FluxGraph {
    fn value_at(&self, u: f64) -> Result<f64>;
    fn interior_states(&self, a: f64, b: f64) -> Vec<f64>;
}

impl FluxGraph for PiecewiseAffineFlux {
    fn value_at(&self, u: f64) -> Result<f64> {
        self.eval(u)
    }

    fn interior_states(&self, a: f64, b: f64) -> Vec<f64> {
        self.nodes_between(a.min(b), a.max(b))
            .map(|j| self.node(j))
            .collect()
    }
}

impl FluxGraph for Polynomial {
    fn value_at(&self, u: f64) -> Result<f64> {
        let v = self.eval(u);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteFlux { node: u })
        }
    }

    fn interior_states(&self, a: f64, b: f64) -> Vec<f64> {
        let (lo, hi) = (a.min(b), a.max(b));
        (1..=SMOOTH_LIU_SAMPLES)
            .map(|k| lo + (hi - lo) * k as f64 / (SMOOTH_LIU_SAMPLES + 1) as f64)
            .collect()
    }
}

/// Liu condition: the Rankine–Hugoniot speed of `u_minus -> u_plus` does not
/// exceed the chord slope from `u_minus` to any intermediate state.
pub fn liu_admissible<F: FluxGraph + ?Sized>(flux: &F, u_minus: f64, u_plus: f64) -> Result<bool> {
    if u_minus == u_plus {
        return Err(Error::Degenerate("Liu test on a zero jump".into()));
    }
    let fm = flux.value_at(u_minus)?;
    let s = (flux.value_at(u_plus)? - fm) / (u_plus - u_minus);
    let tol = LIU_TOL * s.abs().max(1.0);
    for u in flux.interior_states(u_minus, u_plus) {
        let chord = (flux.value_at(u)? - fm) / (u - u_minus);
        if chord < s - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Samples `f` and `g` on the grid `2^-ν ℤ` covering the pair's range.
pub fn sample_flux(pair: &SmoothFluxPair, nu: u32) -> Result<(PiecewiseAffineFlux, PiecewiseAffineFlux)> {
    if nu == 0 {
        return Err(Error::Degenerate("ν must be at least 1".into()));
    }
    let inv_h = (nu as f64).exp2();
    let (lo, hi) = pair.u_range();
    let j_min = (lo * inv_h).floor() as i64;
    let j_max = ((hi * inv_h).ceil() as i64).max(j_min + 1);
    let f = PiecewiseAffineFlux::from_fn(nu, j_min, j_max, |u| pair.eval_f(u))?;
    let g = PiecewiseAffineFlux::from_fn(nu, j_min, j_max, |u| pair.eval_g(u))?;
    Ok((f, g))
}

/// The sampled flux pair together with the constants the tracker needs.
#[derive(Debug, Clone)]
pub struct SampledPair {
    pub f: PiecewiseAffineFlux,
    pub g: PiecewiseAffineFlux,
    c0: f64,
    gap_max: f64,
    lambda: f64,
    sigma_min: f64,
    f_concave: bool,
    g_convex: bool,
}

impl SampledPair {
    pub fn new(pair: &SmoothFluxPair, nu: u32, sigma_min: f64) -> Result<Self> {
        let (f, g) = sample_flux(pair, nu)?;
        Self::from_tables(f, g, sigma_min)
    }

    pub fn from_tables(f: PiecewiseAffineFlux, g: PiecewiseAffineFlux, sigma_min: f64) -> Result<Self> {
        if f.nu() != g.nu() || f.j_min() != g.j_min() || f.j_max() != g.j_max() {
            return Err(Error::Degenerate("f_ν and g_ν must share one grid window".into()));
        }
        let (mut c0, mut at, mut gap_max) = (f64::INFINITY, 0.0, f64::NEG_INFINITY);
        for j in f.j_min()..=f.j_max() {
            let gap = g.node_value(j) - f.node_value(j);
            if gap < c0 {
                c0 = gap;
                at = f.node(j);
            }
            gap_max = gap_max.max(gap);
        }
        if c0 <= 0.0 {
            return Err(Error::GapViolation { min_gap: c0, at });
        }
        Ok(Self {
            lambda: f.max_abs_slope().max(g.max_abs_slope()),
            f_concave: f.is_concave(),
            g_convex: g.is_convex(),
            f,
            g,
            c0,
            gap_max,
            sigma_min,
        })
    }

    pub fn nu(&self) -> u32 {
        self.f.nu()
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn gap_max(&self) -> f64 {
        self.gap_max
    }

    /// Largest segment slope of either table.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// When true every single `f`-front is Liu admissible.
    pub fn f_concave(&self) -> bool {
        self.f_concave
    }

    /// When true every single `g`-front is Liu admissible.
    pub fn g_convex(&self) -> bool {
        self.g_convex
    }

    #[inline]
    pub fn gap(&self, u: f64) -> f64 {
        self.g.value(u) - self.f.value(u)
    }
}

/// Smooth nondecreasing switch `θ_ε(s) = θ(s/ε)` built on the cubic
/// `θ(s) = 1/2 + (3/4)(s - s³/3)` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchFunction {
    epsilon: f64,
}

impl SwitchFunction {
    /// `max θ'` of the base profile, attained at `s = 0`.
    pub const MAX_BASE_SLOPE: f64 = 0.75;

    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Degenerate(format!("switch width must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn base(s: f64) -> f64 {
        if s >= 1.0 {
            1.0
        } else if s <= -1.0 {
            0.0
        } else {
            0.5 + 0.75 * (s - s * s * s / 3.0)
        }
    }

    #[inline]
    pub fn base_prime(s: f64) -> f64 {
        if s.abs() >= 1.0 {
            0.0
        } else {
            0.75 * (1.0 - s * s)
        }
    }

    #[inline]
    pub fn theta(&self, s: f64) -> f64 {
        Self::base(s / self.epsilon)
    }

    #[inline]
    pub fn theta_prime(&self, s: f64) -> f64 {
        Self::base_prime(s / self.epsilon) / self.epsilon
    }
}
