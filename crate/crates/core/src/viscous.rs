//! Explicit conservative scheme for the regularized equation
//! `u_t + [θ_ε(u_x) f(u) + (1 − θ_ε(u_x)) g(u)]_x = δ u_xx` on the unit circle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::l1_distance_field;
use crate::flux::{max_wave_speed, SmoothFluxPair, SwitchFunction};
use crate::profile::{Profile, Topology};
use crate::{Error, Result};

/// Cell averages on `n_cells` uniform cells of `[0, 1)` with periodic indexing.
#[derive(Debug, Clone)]
pub struct ViscousField {
    values: Vec<f64>,
    /// Per-cell compensation terms that keep the update exactly conservative.
    carry: Vec<f64>,
    flux: Vec<f64>,
    scratch: Vec<f64>,
    time: f64,
    steps: u64,
    switch: SwitchFunction,
    delta: f64,
    pair: SmoothFluxPair,
    gap_max: f64,
    lambda: f64,
    /// Flush threshold, `1e-100` times the data scale.
    tiny: f64,
}

impl ViscousField {
    pub fn new(values: Vec<f64>, eps: f64, delta: f64, pair: SmoothFluxPair) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Config("viscous grid needs at least 3 cells".into()));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("viscosity must be non-negative, got {delta}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite cell value".into()));
        }
        let switch = SwitchFunction::new(eps)?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap_max = pair.gap_max_on(lo, hi);
        let lambda = max_wave_speed(&pair, lo.abs().max(hi.abs()));
        Ok(Self {
            carry: vec![0.0; values.len()],
            flux: Vec::new(),
            scratch: Vec::new(),
            values,
            time: 0.0,
            steps: 0,
            switch,
            delta,
            pair,
            gap_max,
            lambda,
            tiny: 1e-100 * lo.abs().max(hi.abs()),
        })
    }

    /// Exact cell averages of a periodic profile of period 1.
    pub fn from_profile(p: &Profile, n_cells: usize, eps: f64, delta: f64, pair: SmoothFluxPair) -> Result<Self> {
        match p.topology() {
            Topology::Periodic { period } if (period - 1.0).abs() <= 1e-12 => {}
            t => return Err(Error::TopologyMismatch(format!("viscous solver needs period 1, got {t:?}"))),
        }
        if n_cells == 0 {
            return Err(Error::Config("viscous grid needs at least 3 cells".into()));
        }
        let dx = 1.0 / n_cells as f64;
        let mut grid: Vec<f64> = (0..=n_cells).map(|j| j as f64 * dx).collect();
        grid.extend(p.breakpoints().iter().map(|&b| b.rem_euclid(1.0)));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mut sums = vec![0.0; n_cells];
        for w in grid.windows(2).filter(|w| w[1] > w[0]) {
            let m = 0.5 * (w[0] + w[1]);
            let j = ((m / dx) as usize).min(n_cells - 1);
            sums[j] += (w[1] - w[0]) * p.value_at(m);
        }
        let values = sums.into_iter().map(|s| s / dx).collect();
        Self::new(values, eps, delta, pair)
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    pub fn length(&self) -> f64 {
        1.0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn eps(&self) -> f64 {
        self.switch.epsilon()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn pair(&self) -> &SmoothFluxPair {
        &self.pair
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn tot_var(&self) -> f64 {
        let n = self.values.len();
        (0..n).map(|j| (self.values[(j + 1) % n] - self.values[j]).abs()).sum()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Δt = 0.4·dx² / (δ + max(g − f)·max θ'/ε + dx·λ†)`.
    pub fn cfl_dt(&self) -> f64 {
        cfl_dt(self.dx(), self.delta, self.gap_max, self.eps(), self.lambda)
    }

    /// One explicit step of length `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let n = self.values.len();
        let dx = self.dx();
        let inv_eps_dx = 1.0 / (self.switch.epsilon() * dx);
        let (fc, gc) = (self.pair.f().coeffs(), self.pair.g().coeffs());
        let u = &self.values[..];
        let h = &mut self.flux;
        h.resize(n, 0.0);
        if fc.len() <= 4 && gc.len() <= 4 {
            // fixed-length Horner for the usual low-degree catalog fluxes
            let pad = |c: &[f64]| {
                let mut k = [0.0; 4];
                k[..c.len()].copy_from_slice(c);
                k
            };
            let (fk, gk) = (pad(fc), pad(gc));
            fill_interfaces(u, h, inv_eps_dx, |m| {
                let fm = ((fk[3] * m + fk[2]) * m + fk[1]) * m + fk[0];
                let gm = ((gk[3] * m + gk[2]) * m + gk[1]) * m + gk[0];
                (fm, gm)
            });
        } else {
            let horner = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &k| acc * x + k);
            fill_interfaces(u, h, inv_eps_dx, |m| (horner(fc, m), horner(gc, m)));
        }
        let r = dt / dx;
        let d = self.delta * dt / (dx * dx);
        let tiny = self.tiny;
        let next = &mut self.scratch;
        next.resize(n, 0.0);
        // compensated update; values far below the data scale move into the
        // carry so that subnormal arithmetic never starts
        let update = |um: f64, u0: f64, up: f64, hm: f64, h0: f64, carry: &mut f64| {
            let du = -r * (h0 - hm) + d * ((up - u0) - (u0 - um));
            let y = du - *carry;
            let t = u0 + y;
            let c = (t - u0) - y;
            let flush = t.abs() < tiny;
            let c = if flush { c - t } else { c };
            *carry = if c.abs() < tiny { 0.0 } else { c };
            if flush {
                0.0
            } else {
                t
            }
        };
        let carry = &mut self.carry[..];
        next[0] = update(u[n - 1], u[0], u[1], h[n - 1], h[0], &mut carry[0]);
        for (((nj, w), hw), cj) in next[1..n - 1]
            .iter_mut()
            .zip(u.windows(3))
            .zip(h.windows(2))
            .zip(carry[1..n - 1].iter_mut())
        {
            *nj = update(w[0], w[1], w[2], hw[0], hw[1], cj);
        }
        next[n - 1] = update(u[n - 2], u[n - 1], u[0], h[n - 2], h[n - 1], &mut carry[n - 1]);
        self.steps += 1;
        if !next.iter().fold(0.0, |acc, &v| acc + v).is_finite() {
            return Err(Error::BlowUp { steps: self.steps });
        }
        std::mem::swap(&mut self.values, &mut self.scratch);
        self.time += dt;
        Ok(())
    }

    /// Steps until `t_end`, with the last step shortened to land exactly.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        let dt = self.cfl_dt();
        while self.time < t_end {
            let rem = t_end - self.time;
            if rem <= dt * (1.0 + 1e-12) {
                self.step(rem)?;
                self.time = t_end;
            } else {
                self.step(dt)?;
            }
        }
        Ok(())
    }

    /// Snapshots at each of `sample_times` (sorted, within `[time, horizon]`)
    /// and at the horizon.
    pub fn solve_to(&mut self, horizon: f64, sample_times: &[f64]) -> Result<Vec<ViscousField>> {
        if horizon < self.time {
            return Err(Error::Config(format!("horizon {horizon} precedes field time {}", self.time)));
        }
        let mut times: Vec<f64> = sample_times
            .iter()
            .copied()
            .filter(|&t| t >= self.time && t <= horizon)
            .collect();
        times.push(horizon);
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut out = Vec::with_capacity(times.len());
        for t in times {
            self.advance_to(t)?;
            out.push(self.clone());
        }
        Ok(out)
    }

    /// `x_center,value` lines with a header.
    pub fn to_csv(&self) -> String {
        let dx = self.dx();
        let mut s = String::from("x_center,value\n");
        for (j, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{}\n", (j as f64 + 0.5) * dx, v));
        }
        s
    }
}

/// Interface fluxes `H_{j+1/2} = θ_ε(D) f(ū) + (1 − θ_ε(D)) g(ū)` with
/// `D = (u_{j+1} − u_j)/dx` and `ū` the interface average.
#[inline(always)]
fn fill_interfaces(u: &[f64], h: &mut [f64], inv_eps_dx: f64, fg: impl Fn(f64) -> (f64, f64)) {
    let n = u.len();
    let interface = |a: f64, b: f64| {
        // θ_ε on the clamped cubic, branch free
        let s = ((b - a) * inv_eps_dx).clamp(-1.0, 1.0);
        let th = 0.5 + 0.75 * (s - s * s * s * (1.0 / 3.0));
        let (fm, gm) = fg(0.5 * (a + b));
        gm + th * (fm - gm)
    };
    for (hj, w) in h[..n - 1].iter_mut().zip(u.windows(2)) {
        *hj = interface(w[0], w[1]);
    }
    h[n - 1] = interface(u[n - 1], u[0]);
}

pub fn cfl_dt(dx: f64, delta: f64, gap_max: f64, eps: f64, lambda: f64) -> f64 {
    0.4 * dx * dx / (delta + gap_max * SwitchFunction::MAX_BASE_SLOPE / eps + dx * lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscousRung {
    pub eps: f64,
    pub delta: f64,
    pub n_cells: usize,
    /// Reference times and the `L¹` distance to the reference at each.
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// Largest relative drift of the mean over all checkpoints.
    pub mean_drift: f64,
    pub min: f64,
    pub max: f64,
    pub steps: u64,
}

impl ViscousRung {
    /// Distance at the last reference time.
    pub fn distance(&self) -> f64 {
        *self.distances.last().unwrap_or(&f64::NAN)
    }
}

/// Solves the viscous problem for each `(ε, δ)` rung in parallel and measures
/// the `L¹` distance to each `(time, reference)` pair; the last reference
/// time is the horizon.
pub fn viscous_ladder(
    initial: &Profile,
    pair: &SmoothFluxPair,
    n_cells: usize,
    rungs: &[(f64, f64)],
    references: &[(f64, Profile)],
) -> Result<Vec<ViscousRung>> {
    if references.is_empty() || references.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::Config("viscous references must be non-empty and sorted in time".into()));
    }
    let horizon = references.last().unwrap().0;
    // conservation and bounds are also checked between the reference times
    let mut checkpoints: Vec<f64> = (1..=16).map(|k| horizon * k as f64 / 16.0).collect();
    checkpoints.extend(references.iter().map(|r| r.0));
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    rungs
        .par_iter()
        .map(|&(eps, delta)| {
            let mut field = ViscousField::from_profile(initial, n_cells, eps, delta, pair.clone())?;
            let mean0 = field.mean();
            let scale = mean0.abs().max(field.linf()).max(f64::MIN_POSITIVE);
            let (mut lo, mut hi) = (field.min(), field.max());
            let mut drift: f64 = 0.0;
            let mut distances = Vec::with_capacity(references.len());
            let mut next_ref = references.iter().peekable();
            for &t in &checkpoints {
                field.advance_to(t)?;
                drift = drift.max((field.mean() - mean0).abs() / scale);
                lo = lo.min(field.min());
                hi = hi.max(field.max());
                while let Some((_, p)) = next_ref.next_if(|r| r.0 <= t) {
                    distances.push(l1_distance_field(p, &field)?);
                }
            }
            Ok(ViscousRung {
                eps,
                delta,
                n_cells,
                times: references.iter().map(|r| r.0).collect(),
                distances,
                mean_drift: drift,
                min: lo,
                max: hi,
                steps: field.steps(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::Polynomial;

    fn two_constants() -> SmoothFluxPair {
        SmoothFluxPair::new(Polynomial::constant(0.0), Polynomial::constant(1.0), (-2.0, 2.0)).unwrap()
    }

    fn burgers() -> SmoothFluxPair {
        let f = Polynomial::new(vec![0.0, 0.0, 0.5]);
        SmoothFluxPair::new(f.clone(), f.add_constant(1.0), (-2.0, 2.0)).unwrap()
    }

    #[test]
    fn cfl_examples() {
        let dt = cfl_dt(0.005, 0.01, 1.0, 0.1, 1.0);
        assert!((dt - 0.4 * 0.005f64.powi(2) / 7.515).abs() < 1e-15);
        assert!((dt - 1.33e-6).abs() < 1e-8);
        let big = cfl_dt(0.01, 1e9, 1.0, 0.1, 1.0);
        assert!((big / (0.4 * 1e-4 / 1e9) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_field_is_stationary() {
        let mut f = ViscousField::new(vec![0.3; 64], 0.1, 0.01, burgers()).unwrap();
        let dt = f.cfl_dt();
        for _ in 0..100 {
            f.step(dt).unwrap();
        }
        assert!(f.values().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn single_cell_perturbation_conserves_mass() {
        let mut v = vec![0.0; 100];
        v[37] = 1.0;
        let mut f = ViscousField::new(v, 0.1, 0.01, two_constants()).unwrap();
        let m0 = f.mean();
        let dt = f.cfl_dt();
        for _ in 0..1000 {
            f.step(dt).unwrap();
        }
        assert!((f.mean() - m0).abs() <= 1e-13 * m0);
        assert!(f.min() >= -1e-12 && f.max() <= 1.0 + 1e-12);
    }

    #[test]
    fn steep_increasing_data_uses_f_only() {
        let n = 50;
        let v: Vec<f64> = (0..n).map(|j| j as f64).collect();
        let pair = burgers();
        let mut a = ViscousField::new(v.clone(), 0.1, 0.0, pair.clone()).unwrap();
        let dt = 1e-6;
        a.step(dt).unwrap();
        // interior cells see D = 50 > ε on both sides, so H = f(ū)
        let dx = 1.0 / n as f64;
        for j in 1..n - 2 {
            let hp = pair.eval_f(0.5 * (v[j] + v[j + 1]));
            let hm = pair.eval_f(0.5 * (v[j - 1] + v[j]));
            let expect = v[j] - dt / dx * (hp - hm);
            assert!((a.values()[j] - expect).abs() < 1e-12, "cell {j}");
        }
    }

    #[test]
    fn solve_to_zero_returns_initial() {
        let p = Profile::periodic(1.0, vec![0.25, 0.75], vec![0.0, 1.0]).unwrap();
        let mut f = ViscousField::from_profile(&p, 64, 0.1, 0.01, two_constants()).unwrap();
        let init = f.values().to_vec();
        let out = f.solve_to(0.0, &[]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].values(), init.as_slice());
        assert!((f.mean() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_cell_averages() {
        let p = Profile::periodic(1.0, vec![0.1, 0.3], vec![0.0, 1.0]).unwrap();
        let f = ViscousField::from_profile(&p, 4, 0.1, 0.0, two_constants()).unwrap();
        assert!((f.values()[0] - 0.6).abs() < 1e-15);
        assert!((f.values()[1] - 0.2).abs() < 1e-15);
        assert_eq!(f.values()[2], 0.0);
        assert!(l1_distance_field(&p, &f).unwrap() > 0.0);
    }

    #[test]
    fn ordered_pairs_stay_ordered() {
        let pair = burgers();
        let base: Vec<f64> = (0..64).map(|j| (j as f64 * 0.3).sin() * 0.5).collect();
        let upper: Vec<f64> = base.iter().map(|v| v + 0.1).collect();
        let mut a = ViscousField::new(base, 0.1, 0.02, pair.clone()).unwrap();
        let mut b = ViscousField::new(upper, 0.1, 0.02, pair).unwrap();
        a.advance_to(0.05).unwrap();
        b.advance_to(0.05).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x <= y));
    }
}
