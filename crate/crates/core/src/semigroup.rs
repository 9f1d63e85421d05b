//! The discrete semigroup `S^ν_t`: quantization, runs, ν-ladders and the
//! reduction of line problems to periodic ones.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{flux_error_estimate, l1_distance};
use crate::flux::{max_wave_speed, SampledPair, SmoothFluxPair};
use crate::profile::{Profile, Topology};
use crate::riemann::sigma_min;
use crate::tracker::{Event, PlateauInfo, TrackerConfig, TrackerState, TrackerStats};
use crate::{Error, Result};

/// Truncates every value toward zero onto `2^-ν ℤ` and merges equal cells.
pub fn quantize_initial(p: &Profile, nu: u32) -> Result<Profile> {
    let inv = (nu as f64).exp2();
    p.map_values(|v| (v * inv).trunc() / inv)
}

/// Samples the pair on a node window covering `[-m - 2^-ν, m + 2^-ν]`.
pub fn sampled_pair(pair: &SmoothFluxPair, nu: u32, m: f64) -> Result<SampledPair> {
    let h = (-(nu as f64)).exp2();
    let window = pair.with_range(-m - h, m + h)?;
    SampledPair::new(&window, nu, sigma_min(m))
}

/// Quantized data and the initial tracker state for it.
pub fn prepare(
    nu: u32,
    initial: &Profile,
    pair: &SmoothFluxPair,
    config: TrackerConfig,
) -> Result<(Profile, TrackerState)> {
    let q = quantize_initial(initial, nu)?;
    let sampled = Arc::new(sampled_pair(pair, nu, q.linf())?);
    let st = TrackerState::init_from_profile(&q, sampled, config)?;
    Ok((q, st))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub profile: Profile,
    pub tv: f64,
    pub linf: f64,
    /// `∫|u|` over one period or over the support.
    pub l1: f64,
    /// `∫u` over one period or over the support.
    pub integral: f64,
    pub fronts: usize,
    pub plateaus: Vec<PlateauInfo>,
    pub min_plateau_width: Option<f64>,
    pub restarts: u64,
}

impl Sample {
    fn take(st: &TrackerState) -> Result<Self> {
        let profile = st.snapshot_profile()?;
        Ok(Self {
            time: st.time(),
            tv: profile.tot_var(),
            linf: profile.linf(),
            l1: profile.l1_norm(),
            integral: profile.integral(),
            fronts: st.n_fronts(),
            plateaus: st.plateaus(),
            min_plateau_width: st.min_plateau_width(),
            restarts: st.stats().restarts,
            profile,
        })
    }

    /// Widest interval on which the solution attains its largest plateau value.
    pub fn top_plateau(&self) -> Option<PlateauInfo> {
        self.plateaus
            .iter()
            .copied()
            .filter(|p| p.kind == crate::tracker::PlateauKind::Max)
            .max_by(|a, b| a.value.total_cmp(&b.value))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemigroupRun {
    pub nu: u32,
    pub initial: Profile,
    pub horizon: f64,
    pub sample_times: Vec<f64>,
    pub samples: Vec<Sample>,
    pub stats: TrackerStats,
    pub events: Vec<Event>,
    /// Wave speed bound `λ†` on `|u| <= ‖ū‖∞`.
    pub lambda_dagger: f64,
    pub c0: f64,
    /// Extremum intervals of the initial data.
    pub n0: usize,
    /// Shortest initial plateau, if any.
    pub ell0: Option<f64>,
}

impl SemigroupRun {
    pub fn final_profile(&self) -> Option<&Profile> {
        self.samples.last().map(|s| &s.profile)
    }

    /// Front-count bound `2 N(0) + 2^ν TV(ū)`.
    pub fn front_bound(&self) -> f64 {
        2.0 * self.n0 as f64 + (self.nu as f64).exp2() * self.initial.tot_var()
    }
}

fn check_times(horizon: f64, sample_times: &[f64]) -> Result<Vec<f64>> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!("horizon must be finite and non-negative, got {horizon}")));
    }
    let mut times = sample_times.to_vec();
    if times.iter().any(|t| !(*t >= 0.0 && *t <= horizon)) {
        return Err(Error::Config("sample times must lie in [0, T]".into()));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.last() != Some(&horizon) {
        times.push(horizon);
    }
    Ok(times)
}

/// Runs `S^ν` through the sample times (the horizon is always sampled).
pub fn run(
    nu: u32,
    initial: &Profile,
    pair: &SmoothFluxPair,
    horizon: f64,
    sample_times: &[f64],
    config: TrackerConfig,
) -> Result<SemigroupRun> {
    let times = check_times(horizon, sample_times)?;
    let (q, mut st) = prepare(nu, initial, pair, config)?;
    let lambda_dagger = max_wave_speed(pair, q.linf());
    let c0 = st.pair().c0();
    let n0 = st.n_plateaus();
    let ell0 = st.min_plateau_width();
    let mut samples = Vec::with_capacity(times.len());
    for &t in &times {
        st.evolve_to(t)?;
        samples.push(Sample::take(&st)?);
    }
    Ok(SemigroupRun {
        nu,
        initial: q,
        horizon,
        sample_times: times,
        samples,
        stats: st.stats().clone(),
        events: st.events().to_vec(),
        lambda_dagger,
        c0,
        n0,
        ell0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub nu: u32,
    /// `‖S^ν_T ū − S^{ν_max}_T ū‖₁`.
    pub distance: f64,
    /// `d_ν / d_{ν'}` for the next rung, when defined.
    pub ratio: Option<f64>,
    /// `TV(ū) 2^-ν T`.
    pub a_priori: f64,
    /// Flux error estimate against the finest rung, times `T`.
    pub flux_estimate: f64,
    /// Distance divided by the a-priori bound: the empirical constant.
    pub constant: Option<f64>,
    pub restarts: u64,
    pub max_fronts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NuLadder {
    pub horizon: f64,
    pub rows: Vec<LadderRow>,
}

impl NuLadder {
    /// True when the distances of all but the reference rung strictly decrease.
    pub fn strictly_decreasing(&self) -> bool {
        let d: Vec<f64> = self.rows.iter().map(|r| r.distance).collect();
        d.len() < 2 || d[..d.len() - 1].windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs every rung in parallel and compares against the finest one.
pub fn nu_ladder(
    initial: &Profile,
    pair: &SmoothFluxPair,
    horizon: f64,
    nus: &[u32],
    config: &TrackerConfig,
) -> Result<NuLadder> {
    if nus.is_empty() || nus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("ν ladder must be non-empty and strictly increasing".into()));
    }
    let runs: Vec<SemigroupRun> = nus
        .par_iter()
        .map(|&nu| run(nu, initial, pair, horizon, &[], config.clone()))
        .collect::<Result<_>>()?;
    let finest = runs.last().unwrap();
    let reference = finest.final_profile().unwrap();
    let mu = finest.nu;
    let tv = initial.tot_var();
    let mut rows: Vec<LadderRow> = runs
        .iter()
        .map(|r| {
            let distance = l1_distance(r.final_profile().unwrap(), reference)?;
            let a_priori = tv * (-(r.nu as f64)).exp2() * horizon;
            let (lo, hi) = (-initial.linf(), initial.linf());
            let flux_estimate = flux_error_estimate(r.nu, mu, pair, (lo, hi), tv, r.n0 as f64) * horizon;
            Ok(LadderRow {
                nu: r.nu,
                distance,
                ratio: None,
                a_priori,
                flux_estimate,
                constant: (a_priori > 0.0).then(|| distance / a_priori),
                restarts: r.stats.restarts,
                max_fronts: r.stats.max_fronts,
            })
        })
        .collect::<Result<_>>()?;
    for i in 0..rows.len().saturating_sub(1) {
        let next = rows[i + 1].distance;
        rows[i].ratio = (next > 0.0).then(|| rows[i].distance / next);
    }
    Ok(NuLadder { horizon, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wrapped {
    /// Periodic data of unit period.
    pub profile: Profile,
    /// Period before rescaling.
    pub period: f64,
    /// `x_unit = (x + shift) / period`.
    pub shift: f64,
    /// `t_unit = t / period`.
    pub time_scale: f64,
}

impl Wrapped {
    pub fn to_unit_x(&self, x: f64) -> f64 {
        (x + self.shift) / self.period
    }

    pub fn to_unit_t(&self, t: f64) -> f64 {
        t * self.time_scale
    }
}

/// Embeds compactly supported line data into a circle of length
/// `2R + T λ† + margin`, then rescales space and time by that length.
pub fn wrap_line_to_periodic(p: &Profile, pair: &SmoothFluxPair, horizon: f64, margin: f64) -> Result<Wrapped> {
    if !p.is_compactly_supported() {
        return Err(Error::TopologyMismatch("wrapping needs compactly supported line data".into()));
    }
    let r = p
        .breakpoints()
        .iter()
        .fold(0.0f64, |m, b| m.max(b.abs()));
    let period = 2.0 * r + horizon * max_wave_speed(pair, p.linf()) + margin;
    if !(period > 2.0 * r) && !p.is_constant() {
        return Err(Error::Config("wrapping margin must be positive when T λ† = 0".into()));
    }
    let period = period.max(f64::MIN_POSITIVE);
    let shift = 0.5 * period;
    let moved = p.transform_x(shift, 1.0 / period)?;
    let (bps, vals): (Vec<f64>, Vec<f64>) = if moved.is_constant() {
        (Vec::new(), vec![moved.values()[0]])
    } else {
        // the outer zero cells join into the wrapping cell
        let bps = moved.breakpoints().to_vec();
        let mut vals = moved.values().to_vec();
        vals.pop();
        (bps, vals)
    };
    let profile = Profile::normalized(Topology::Periodic { period: 1.0 }, bps, vals, 0.0)?;
    Ok(Wrapped {
        profile,
        period,
        shift,
        time_scale: 1.0 / period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::Polynomial;

    fn constant_pair() -> SmoothFluxPair {
        SmoothFluxPair::new(Polynomial::constant(0.0), Polynomial::constant(1.0), (-1.0, 1.0)).unwrap()
    }

    fn burgers() -> SmoothFluxPair {
        let f = Polynomial::new(vec![0.0, 0.0, 0.5]);
        SmoothFluxPair::new(f.clone(), f.add_constant(1.0), (-1.0, 1.0)).unwrap()
    }

    #[test]
    fn quantization_truncates_toward_zero() {
        let p = Profile::line(vec![0.0, 1.0, 2.0], vec![0.0, 0.3, -0.3, 0.0]).unwrap();
        let q = quantize_initial(&p, 2).unwrap();
        assert_eq!(q.values(), &[0.0, 0.25, -0.25, 0.0]);
        let on_grid = Profile::line(vec![0.0, 1.0], vec![0.0, 0.75, 0.0]).unwrap();
        assert_eq!(quantize_initial(&on_grid, 2).unwrap(), on_grid);
        // cells that round to the same value merge
        let m = Profile::line(vec![0.0, 1.0, 2.0], vec![0.0, 0.3, 0.26, 0.0]).unwrap();
        assert_eq!(quantize_initial(&m, 2).unwrap().breakpoints(), &[0.0, 2.0]);
    }

    #[test]
    fn periodic_square_wave_reaches_mean() {
        let p = Profile::periodic(1.0, vec![0.0, 0.5], vec![0.0, 1.0]).unwrap();
        let r = run(4, &p, &constant_pair(), 1.0, &[0.25, 1.0], TrackerConfig::default()).unwrap();
        for s in &r.samples {
            assert!(s.profile.is_constant());
            assert!((s.profile.values()[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_horizon_returns_quantized_data() {
        let p = Profile::line(vec![0.0, 1.0], vec![0.0, 0.3, 0.0]).unwrap();
        let r = run(2, &p, &constant_pair(), 0.0, &[], TrackerConfig::default()).unwrap();
        assert_eq!(r.samples.len(), 1);
        assert_eq!(r.samples[0].profile, quantize_initial(&p, 2).unwrap());
    }

    #[test]
    fn affine_ladder_has_zero_distances() {
        let pair = SmoothFluxPair::new(
            Polynomial::new(vec![0.0, 1.0]),
            Polynomial::new(vec![1.0, 1.0]),
            (-1.0, 1.0),
        )
        .unwrap();
        let p = Profile::periodic(1.0, vec![0.1, 0.4, 0.7], vec![0.5, -0.5, 0.25]).unwrap();
        let ladder = nu_ladder(&p, &pair, 0.3, &[2, 3], &TrackerConfig::default()).unwrap();
        assert_eq!(ladder.rows.len(), 2);
        assert!(ladder.rows.iter().all(|r| r.distance < 1e-9), "{:?}", ladder.rows);
    }

    #[test]
    fn wrap_period_length() {
        let p = Profile::line_from_blocks(&[(-1.0, 1.0, 1.0)]).unwrap();
        let w = wrap_line_to_periodic(&p, &burgers(), 1.0, 0.0).unwrap();
        assert!(w.period >= 3.0);
        let w0 = wrap_line_to_periodic(&p, &burgers(), 0.0, 1e-3).unwrap();
        assert!(w0.period >= 2.0);
        assert_eq!(w.profile.period(), Some(1.0));
        assert!((w.profile.integral() * w.period - 2.0).abs() < 1e-12);
    }
}
