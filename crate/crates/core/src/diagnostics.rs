//! Exact norms of step functions, inequality checks with margins, and the
//! weak-form residual of tracked solutions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::flux::{PiecewiseAffineFlux, SmoothFluxPair};
use crate::profile::{Profile, Topology};
use crate::semigroup::SemigroupRun;
use crate::tracker::TrackerState;
use crate::viscous::ViscousField;
use crate::{Error, Result};

fn same_topology(a: &Profile, b: &Profile) -> Result<()> {
    match (a.topology(), b.topology()) {
        (Topology::Line, Topology::Line) => Ok(()),
        (Topology::Periodic { period: p }, Topology::Periodic { period: q }) if p == q => Ok(()),
        (ta, tb) => Err(Error::TopologyMismatch(format!("{ta:?} vs {tb:?}"))),
    }
}

/// Sorted interval endpoints on which both profiles are constant. For
/// periodic inputs they cover exactly one period starting at `x0`.
fn common_grid(a: &Profile, b: &Profile) -> Vec<f64> {
    match a.topology() {
        Topology::Line => a.merged_grid(b, 0.0),
        Topology::Periodic { period } => {
            let x0 = a
                .breakpoints()
                .first()
                .or(b.breakpoints().first())
                .copied()
                .unwrap_or(0.0);
            let mut g: Vec<f64> = a
                .merged_grid(b, x0)
                .into_iter()
                .filter(|&x| x < x0 + period)
                .collect();
            g.insert(0, x0);
            g.push(x0 + period);
            g.dedup();
            g
        }
    }
}

/// `∫ h(a(x), b(x)) dx` over the common grid; both profiles are constant on
/// every piece so evaluation at the midpoint is exact.
fn integrate_pair(a: &Profile, b: &Profile, h: impl Fn(f64, f64) -> f64) -> f64 {
    common_grid(a, b)
        .windows(2)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * h(a.value_at(m), b.value_at(m))
        })
        .sum()
}

/// Exact `‖a − b‖₁` (one period on a circle). On the line, differing states
/// at infinity give `∞`.
pub fn l1_distance(a: &Profile, b: &Profile) -> Result<f64> {
    same_topology(a, b)?;
    if a.topology() == Topology::Line {
        let (a0, b0) = (a.values()[0], b.values()[0]);
        let (a1, b1) = (*a.values().last().unwrap(), *b.values().last().unwrap());
        if a0 != b0 || a1 != b1 {
            return Ok(f64::INFINITY);
        }
    }
    Ok(integrate_pair(a, b, |u, v| (u - v).abs()))
}

/// `∫ (a − b)⁺` and the largest value of `(a − b)⁺` on pieces wider than
/// `min_width`.
pub fn positive_part(a: &Profile, b: &Profile, min_width: f64) -> Result<(f64, f64)> {
    same_topology(a, b)?;
    let mut sup: f64 = 0.0;
    let mut int = 0.0;
    let grid = common_grid(a, b);
    for w in grid.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        let d = (a.value_at(m) - b.value_at(m)).max(0.0);
        int += (w[1] - w[0]) * d;
        if w[1] - w[0] > min_width {
            sup = sup.max(d);
        }
    }
    if a.topology() == Topology::Line {
        for (u, v) in [
            (a.values()[0], b.values()[0]),
            (*a.values().last().unwrap(), *b.values().last().unwrap()),
        ] {
            sup = sup.max(u - v);
        }
    }
    Ok((int, sup))
}

/// Exact `∫|p − u|` over `[0, L)` for a periodic profile of period `L` and a
/// field of cell averages.
pub fn l1_distance_field(p: &Profile, field: &ViscousField) -> Result<f64> {
    let length = field.length();
    match p.topology() {
        Topology::Periodic { period } if (period - length).abs() <= 1e-12 * length => {}
        t => {
            return Err(Error::TopologyMismatch(format!(
                "field of length {length} against profile {t:?}"
            )))
        }
    }
    let dx = field.dx();
    let n = field.values().len();
    let mut grid: Vec<f64> = (0..=n).map(|j| j as f64 * dx).collect();
    grid.extend(p.breakpoints().iter().map(|&b| b.rem_euclid(length)));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            let j = ((m / dx) as usize).min(n - 1);
            (w[1] - w[0]) * (p.value_at(m) - field.values()[j]).abs()
        })
        .sum())
}

pub fn l1_distance_fields(a: &ViscousField, b: &ViscousField) -> Result<f64> {
    if a.values().len() != b.values().len() || a.dx() != b.dx() {
        return Err(Error::TopologyMismatch("fields on different grids".into()));
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(u, v)| (u - v).abs())
        .sum::<f64>()
        * a.dx())
}

pub fn tot_var(p: &Profile) -> f64 {
    p.tot_var()
}

pub fn linf(p: &Profile) -> f64 {
    p.linf()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignInterval {
    pub left: f64,
    pub right: f64,
    pub sign: i8,
    pub mass: f64,
}

/// Maximal intervals on which a line profile keeps a strict sign, with the
/// signed mass of each.
pub fn sign_interval_masses(p: &Profile) -> Result<Vec<SignInterval>> {
    if p.topology() != Topology::Line {
        return Err(Error::TopologyMismatch("sign intervals need line data".into()));
    }
    if !p.is_compactly_supported() {
        return Err(Error::InvalidProfile("sign intervals need compact support".into()));
    }
    let mut out: Vec<SignInterval> = Vec::new();
    for (a, b, v) in p.cells() {
        if v == 0.0 {
            continue;
        }
        let sign = if v > 0.0 { 1 } else { -1 };
        match out.last_mut() {
            Some(last) if last.sign == sign && last.right == a => {
                last.right = b;
                last.mass += (b - a) * v;
            }
            _ => out.push(SignInterval {
                left: a,
                right: b,
                sign,
                mass: (b - a) * v,
            }),
        }
    }
    Ok(out)
}

/// Lower bound on the plateau width at time `t`.
pub fn plateau_bound(t: f64, ell0: f64, lambda: f64, m: f64, c0: f64) -> f64 {
    let linear = ell0 - 2.0 * lambda * t;
    if lambda <= 0.0 {
        return linear;
    }
    let t0 = ell0 / (4.0 * lambda);
    if t < t0 {
        return linear;
    }
    let growth = 2.0 * lambda * (t - t0) / ((4.0 * lambda * m / c0).exp() - 1.0);
    linear.max(growth)
}

/// Outcome of one inequality check; `margin >= -tolerance` is a pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub tolerance: f64,
}

impl Verdict {
    pub fn new(name: &str, margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: margin >= -tolerance,
            margin,
            tolerance,
        }
    }
}

pub const PLATEAU_SLACK: f64 = 1e-6;

/// Checks the plateau-width bound at every sample of a run. The margin is
/// the smallest `width − (1 − 1e-6)·bound`.
pub fn plateau_bound_check(run: &SemigroupRun) -> Verdict {
    let Some(ell0) = run.ell0 else {
        return Verdict::new("plateau_width", f64::INFINITY, 0.0);
    };
    let m = run.initial.linf();
    let margin = run
        .samples
        .iter()
        .filter_map(|s| {
            let w = s.min_plateau_width?;
            let bound = plateau_bound(s.time, ell0, run.lambda_dagger, m, run.c0);
            Some(w - (1.0 - PLATEAU_SLACK) * bound)
        })
        .fold(f64::INFINITY, f64::min);
    Verdict::new("plateau_width", margin, 0.0)
}

/// Smallest decrease of `key` between consecutive samples.
fn monotone_margin(run: &SemigroupRun, key: impl Fn(&crate::semigroup::Sample) -> f64) -> f64 {
    run.samples
        .windows(2)
        .map(|w| key(&w[0]) - key(&w[1]))
        .fold(f64::INFINITY, f64::min)
}

pub fn front_bound_check(run: &SemigroupRun) -> Verdict {
    Verdict::new(
        "front_count",
        run.front_bound() - run.stats.max_fronts as f64,
        0.0,
    )
}

/// `‖u(t) − v(t)‖₁ ≤ ‖u(0) − v(0)‖₁` at every common sample time.
pub fn contraction_check(u: &SemigroupRun, v: &SemigroupRun, tol: f64) -> Result<Verdict> {
    let d0 = l1_distance(&u.initial, &v.initial)?;
    let mut margin = f64::INFINITY;
    for (a, b) in u.samples.iter().zip(&v.samples) {
        margin = margin.min(d0 - l1_distance(&a.profile, &b.profile)?);
    }
    Ok(Verdict::new("l1_contraction", margin, tol))
}

/// Ordering `u ≤ v` at every sample; the margin is `−sup (u − v)⁺` over
/// pieces wider than `1e-9`.
pub fn comparison_check(u: &SemigroupRun, v: &SemigroupRun, tol: f64) -> Result<Verdict> {
    let mut margin = f64::INFINITY;
    for (a, b) in u.samples.iter().zip(&v.samples) {
        let (_, sup) = positive_part(&a.profile, &b.profile, 1e-9)?;
        margin = margin.min(-sup);
    }
    Ok(Verdict::new("comparison", margin, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub time: f64,
    pub l1: f64,
    pub linf: f64,
    pub tv: f64,
    pub integral: f64,
    pub fronts: usize,
    pub plateaus: usize,
    pub min_plateau_width: Option<f64>,
    pub positive_mass: Option<f64>,
    pub negative_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub series: Vec<SeriesRow>,
    pub verdicts: Vec<Verdict>,
}

impl DiagnosticsReport {
    pub fn from_run(run: &SemigroupRun) -> Self {
        let series: Vec<SeriesRow> = run
            .samples
            .iter()
            .map(|s| {
                let masses = sign_interval_masses(&s.profile).ok();
                let total = |sign: i8| {
                    masses
                        .as_ref()
                        .map(|m| m.iter().filter(|i| i.sign == sign).map(|i| i.mass.abs()).sum())
                };
                SeriesRow {
                    time: s.time,
                    l1: s.l1,
                    linf: s.linf,
                    tv: s.tv,
                    integral: s.integral,
                    fronts: s.fronts,
                    plateaus: s.plateaus.len(),
                    min_plateau_width: s.min_plateau_width,
                    positive_mass: total(1),
                    negative_mass: total(-1),
                }
            })
            .collect();
        let mut verdicts = vec![
            Verdict::new("tv_monotone", monotone_margin(run, |s| s.tv), 1e-10),
            Verdict::new("linf_monotone", monotone_margin(run, |s| s.linf), 1e-10),
            Verdict::new("l1_monotone", monotone_margin(run, |s| s.l1), 1e-9),
            plateau_bound_check(run),
            front_bound_check(run),
        ];
        if series.iter().all(|r| r.positive_mass.is_some()) {
            let pos = series
                .windows(2)
                .map(|w| w[0].positive_mass.unwrap() - w[1].positive_mass.unwrap())
                .fold(f64::INFINITY, f64::min);
            let neg = series
                .windows(2)
                .map(|w| w[0].negative_mass.unwrap() - w[1].negative_mass.unwrap())
                .fold(f64::INFINITY, f64::min);
            verdicts.push(Verdict::new("positive_mass_monotone", pos, 1e-9));
            verdicts.push(Verdict::new("negative_mass_monotone", neg, 1e-9));
        }
        Self { series, verdicts }
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

// ---------------------------------------------------------------------------
// weak residual
// ---------------------------------------------------------------------------

#[inline]
fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (s * s - 1.0)).exp()
    }
}

#[inline]
fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = s * s - 1.0;
        -2.0 * s / (q * q) * (1.0 / q).exp()
    }
}

/// Tensor test function `b((t − t_c)/r_t) · b((x − x_c)/r_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub tc: f64,
    pub rt: f64,
    pub xc: f64,
    pub rx: f64,
}

impl Bump {
    /// Random bump whose support lies inside `t_range × x_range`.
    pub fn random(rng: &mut impl Rng, t_range: (f64, f64), x_range: (f64, f64)) -> Self {
        let rt = rng.gen_range(0.15..0.45) * (t_range.1 - t_range.0) * 0.5;
        let tc = rng.gen_range(t_range.0 + rt..t_range.1 - rt);
        let rx = rng.gen_range(0.15..0.45) * (x_range.1 - x_range.0) * 0.5;
        let xc = rng.gen_range(x_range.0 + rx..x_range.1 - rx);
        Self { tc, rt, xc, rx }
    }

    fn time_factors(&self, t: f64) -> (f64, f64) {
        let s = (t - self.tc) / self.rt;
        (bump(s), bump_prime(s) / self.rt)
    }

    fn bx(&self, x: f64) -> f64 {
        bump((x - self.xc) / self.rx)
    }

    /// `∫_a^b b((x − x_c)/r_x) dx` by composite Gauss–Legendre.
    fn integral_x(&self, a: f64, b: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.148_874_338_981_631_2,
            0.433_395_394_129_247_2,
            0.679_409_568_299_024_4,
            0.865_063_366_688_984_5,
            0.973_906_528_517_171_7,
        ];
        const WEIGHTS: [f64; 5] = [
            0.295_524_224_714_752_9,
            0.269_266_719_309_996_4,
            0.219_086_362_515_982,
            0.149_451_349_150_580_6,
            0.066_671_344_308_688_1,
        ];
        let a = a.max(self.xc - self.rx);
        let b = b.min(self.xc + self.rx);
        if !(b > a) {
            return 0.0;
        }
        let panels = ((b - a) / (self.rx / 32.0)).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let half = 0.5 * h;
            for (x, w) in NODES.iter().zip(WEIGHTS) {
                sum += w * half * (self.bx(mid - half * x) + self.bx(mid + half * x));
            }
        }
        sum
    }
}

/// Spatial part of the residual at one time: returns
/// `(∫ u b_x dx, ∫ F ∂_x b_x dx)` for the current tracker slice.
fn spatial_terms(st: &TrackerState, bump: &Bump) -> (f64, f64) {
    let pair = st.pair();
    let (s0, s1) = (bump.xc - bump.rx, bump.xc + bump.rx);
    let period = match st.topology() {
        Topology::Periodic { period } => Some(period),
        Topology::Line => None,
    };
    let mut mass = 0.0;
    let mut flux = 0.0;
    for c in st.slice() {
        let shifts: Vec<f64> = match period {
            None => vec![0.0],
            Some(p) => {
                let k0 = ((s0 - c.x_right) / p).floor() as i64;
                let k1 = ((s1 - c.x_left) / p).ceil() as i64;
                (k0..=k1).map(|k| k as f64 * p).collect()
            }
        };
        let (fu, gu) = (pair.f.value(c.value), pair.g.value(c.value));
        let slope = if c.theta_left != c.theta_right {
            (c.theta_right - c.theta_left) / (c.x_right - c.x_left) * (fu - gu)
        } else {
            0.0
        };
        for sh in shifts {
            let (xl, xr) = (c.x_left + sh, c.x_right + sh);
            let a = xl.max(s0);
            let b = xr.min(s1);
            if !(b > a) {
                continue;
            }
            let theta = |x: f64| {
                if c.theta_left == c.theta_right {
                    c.theta_left
                } else {
                    c.theta_left + (c.theta_right - c.theta_left) * (x - xl) / (xr - xl)
                }
            };
            let big_f = |x: f64| gu + theta(x) * (fu - gu);
            let ib = bump.integral_x(a, b);
            mass += c.value * ib;
            flux += big_f(b) * bump.bx(b) - big_f(a) * bump.bx(a) - slope * ib;
        }
    }
    (mass, flux)
}

/// `∬ u φ_t + F φ_x` for each bump along the tracked evolution of `initial`
/// up to `horizon`, with composite Simpson in time on panels that start and
/// end at restart times (`n_time` points overall).
pub fn weak_residual(initial: &TrackerState, horizon: f64, bumps: &[Bump], n_time: usize) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; bumps.len()];
    let mut s = initial.clone();
    let t_origin = s.time();
    let span = (horizon - t_origin).max(f64::MIN_POSITIVE);
    loop {
        let t_start = s.time();
        let mut w = s.clone();
        let ev = s.advance_to_event(horizon)?;
        let t_end = s.time();
        if t_end > t_start {
            let mut m = ((n_time as f64) * (t_end - t_start) / span).ceil() as usize;
            m = m.max(2);
            if m % 2 == 1 {
                m += 1;
            }
            let h = (t_end - t_start) / m as f64;
            for i in 0..=m {
                let t = if i == m { t_end } else { t_start + i as f64 * h };
                w.advance(t - w.time())?;
                let weight = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                } * h
                    / 3.0;
                for (b, a) in bumps.iter().zip(acc.iter_mut()) {
                    let (bt, bt_prime) = b.time_factors(t);
                    if bt == 0.0 && bt_prime == 0.0 {
                        continue;
                    }
                    let (mass, flux) = spatial_terms(&w, b);
                    *a += weight * (bt_prime * mass + bt * flux);
                }
            }
        }
        match ev {
            Some(e) => s.apply_restart(&e)?,
            None => break,
        }
    }
    Ok(acc)
}

/// `(‖f_μ − f_ν‖_{W1,∞} + ‖g_μ − g_ν‖_{W1,∞})·TV + (‖f_μ − f_ν‖_∞ + ‖g_μ − g_ν‖_∞)·N`
/// with the norms sampled densely on `range`.
pub fn flux_error_estimate(nu: u32, mu: u32, pair: &SmoothFluxPair, range: (f64, f64), tv: f64, n: f64) -> f64 {
    if tv == 0.0 && n == 0.0 {
        return 0.0;
    }
    let (lo, hi) = range;
    let table = |k: u32, f: &dyn Fn(f64) -> f64| {
        let inv = (k as f64).exp2();
        let j0 = (lo * inv).floor() as i64 - 1;
        let j1 = (hi * inv).ceil() as i64 + 1;
        PiecewiseAffineFlux::from_fn(k, j0, j1, f).expect("finite polynomial flux")
    };
    let norms = |f: &dyn Fn(f64) -> f64| {
        let (a, b) = (table(nu, f), table(mu, f));
        let samples = ((hi - lo) * (mu as f64).exp2() * 4.0).ceil().max(20_000.0) as usize;
        let (mut sup, mut dsup) = (0.0f64, 0.0f64);
        for i in 0..samples {
            // midpoints avoid the nodes where slopes are ambiguous
            let u = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
            sup = sup.max((a.value(u) - b.value(u)).abs());
            dsup = dsup.max((a.slope_at(u) - b.slope_at(u)).abs());
        }
        (sup, sup + dsup)
    };
    let (fs, fw) = norms(&|u| pair.eval_f(u));
    let (gs, gw) = norms(&|u| pair.eval_g(u));
    (fw + gw) * tv + (fs + gs) * n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::Polynomial;

    fn sq(shift: f64, height: f64) -> Profile {
        Profile::periodic(1.0, vec![shift, shift + 0.5], vec![0.0, height]).unwrap()
    }

    #[test]
    fn l1_distance_examples() {
        let a = sq(0.0, 1.0);
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        let b = Profile::periodic(1.0, vec![0.0, 0.5], vec![1.0, 2.0]).unwrap();
        assert!((l1_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let c = Profile::constant(Topology::Periodic { period: 1.0 }, 0.0);
        assert!((l1_distance(&a, &c).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(a.tot_var(), 2.0);
        let shifted = sq(0.25, 1.0);
        assert!((l1_distance(&a, &shifted).unwrap() - 0.5).abs() < 1e-15);
        let line = Profile::line_from_blocks(&[(0.0, 1.0, 1.0)]).unwrap();
        assert!(matches!(l1_distance(&a, &line), Err(Error::TopologyMismatch(_))));
    }

    #[test]
    fn sign_intervals() {
        let p = Profile::line_from_blocks(&[(0.0, 1.0, 1.0), (1.0, 2.0, -1.0)]).unwrap();
        let s = sign_interval_masses(&p).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].mass, s[1].mass), (1.0, -1.0));
        let pos = Profile::line_from_blocks(&[(0.0, 1.0, 1.0), (1.0, 3.0, 0.5)]).unwrap();
        let s = sign_interval_masses(&pos).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mass, pos.l1_norm());
        let zero = Profile::constant(Topology::Line, 0.0);
        assert!(sign_interval_masses(&zero).unwrap().is_empty());
    }

    #[test]
    fn plateau_bound_examples() {
        assert_eq!(plateau_bound(5.0, 0.7, 0.0, 1.0, 1.0), 0.7);
        assert_eq!(plateau_bound(0.0, 0.7, 1.0, 1.0, 1.0), 0.7);
        let t0 = 0.25;
        let slope = (plateau_bound(t0 + 10.0, 1.0, 1.0, 1.0, 1.0) - plateau_bound(t0 + 9.0, 1.0, 1.0, 1.0, 1.0)) / 1.0;
        assert!((slope - 2.0 / (4f64.exp() - 1.0)).abs() < 1e-12);
        assert!((2.0 / (4f64.exp() - 1.0) - 0.0373).abs() < 1e-4);
    }

    #[test]
    fn bump_integral_matches_fine_riemann_sum() {
        let b = Bump {
            tc: 0.0,
            rt: 1.0,
            xc: 0.3,
            rx: 0.4,
        };
        let n = 400_000;
        let (a, c) = (0.0, 0.6);
        let h = (c - a) / n as f64;
        let riemann: f64 = (0..n).map(|i| b.bx(a + (i as f64 + 0.5) * h) * h).sum();
        assert!((b.integral_x(a, c) - riemann).abs() < 1e-10);
    }

    #[test]
    fn bump_derivative_consistent() {
        for k in -90..90 {
            let s = k as f64 / 100.0;
            let fd = (bump(s + 1e-6) - bump(s - 1e-6)) / 2e-6;
            assert!((fd - bump_prime(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn affine_flux_estimate_vanishes() {
        let pair = SmoothFluxPair::new(
            Polynomial::new(vec![0.0, 1.0]),
            Polynomial::new(vec![1.0, 1.0]),
            (-1.0, 1.0),
        )
        .unwrap();
        assert!(flux_error_estimate(4, 12, &pair, (-1.0, 1.0), 3.0, 5.0) < 1e-12);
        let f = Polynomial::new(vec![0.0, 0.0, 0.5]);
        let burgers = SmoothFluxPair::new(f.clone(), f.add_constant(1.0), (-1.0, 1.0)).unwrap();
        assert_eq!(flux_error_estimate(4, 12, &burgers, (-1.0, 1.0), 0.0, 0.0), 0.0);
        let e4 = flux_error_estimate(4, 12, &burgers, (-1.0, 1.0), 1.0, 0.0);
        let e6 = flux_error_estimate(6, 12, &burgers, (-1.0, 1.0), 1.0, 0.0);
        assert!((e4 / e6 - 4.0).abs() < 0.5, "ratio {}", e4 / e6);
    }
}
