//! Event-driven front tracking.
//!
//! Fronts move with constant speed unless they bound an extremum plateau. The
//! plateau values and the positions of their bounding fronts form a small ODE
//! system that is integrated with RK4 between restarts. Restarts are located
//! by bisection and processed by re-solving the Riemann problems in a window
//! around the event.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::flux::{PiecewiseAffineFlux, SampledPair, LIU_TOL};
use crate::profile::{Profile, Topology};
use crate::riemann::{self, Family, Front};
use crate::{Error, Result};

/// Test hooks that deliberately break the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    FlipSpeedSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub restart_cap: u64,
    /// RK4 step as a fraction of `min width / max(λ, 1)`.
    pub width_step: f64,
    /// RK4 step as a fraction of `min width / max gap`.
    pub gap_step: f64,
    pub record_events: bool,
    /// Re-initialise the whole state at every restart instead of a window.
    pub full_reinit: bool,
    pub mutation: Option<Mutation>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            restart_cap: 1_000_000,
            width_step: 0.05,
            gap_step: 0.01,
            record_events: true,
            full_reinit: false,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Collision,
    JumpVanishes,
    AdmissibilityLoss,
    ExtremaMerge,
}

/// A restart trigger. `index` is a cell for collisions and a front otherwise,
/// both referring to the state at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub time: f64,
    pub position: f64,
    pub index: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackerStats {
    pub restarts: u64,
    pub collisions: u64,
    pub jump_vanishes: u64,
    pub admissibility_losses: u64,
    pub extrema_merges: u64,
    pub full_reinits: u64,
    pub rk4_steps: u64,
    pub initial_fronts: usize,
    pub max_fronts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateauKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauInfo {
    pub kind: PlateauKind,
    pub cell: usize,
    pub value: f64,
    pub x_left: f64,
    pub x_right: f64,
}

impl PlateauInfo {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }
}

/// One cell of the current solution together with the interpolated switch
/// value at its ends; `θ` is affine in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceCell {
    pub x_left: f64,
    pub x_right: f64,
    pub value: f64,
    pub theta_left: f64,
    pub theta_right: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    value: f64,
    kind: Option<PlateauKind>,
}

#[derive(Debug, Clone, Copy)]
struct TFront {
    x_ref: f64,
    t_ref: f64,
    speed: f64,
    family: Family,
    dynamic: bool,
}

impl TFront {
    #[inline]
    fn position(&self, t: f64) -> f64 {
        self.x_ref + self.speed * (t - self.t_ref)
    }
}

#[derive(Debug, Clone, Copy)]
enum ValRef {
    Fixed(f64),
    Plateau(usize),
}

#[derive(Debug, Clone, Copy)]
enum PosRef {
    Dyn(usize),
    Fixed { x_ref: f64, t_ref: f64, speed: f64 },
}

#[derive(Debug, Clone)]
struct DynPlateau {
    cell: usize,
    sign: f64,
    left: usize,
    right: usize,
    offset: f64,
}

#[derive(Debug, Clone)]
enum LiuCheck {
    Skip,
    /// Static state on the left; prefix minima of chords from it, ordered
    /// outward starting at node `j_start`.
    FixedLeft { us: f64, j_start: i64, prefix: Vec<f64> },
    /// Static state on the right; prefix maxima of chords into it.
    FixedRight { us: f64, j_start: i64, prefix: Vec<f64> },
    Direct,
}

#[derive(Debug, Clone)]
struct DynFront {
    front: usize,
    family: Family,
    left: ValRef,
    right: ValRef,
    liu: LiuCheck,
}

#[derive(Debug, Clone)]
struct DynCell {
    cell: usize,
    left: PosRef,
    right: PosRef,
    offset: f64,
    plateau: bool,
}

#[derive(Debug, Clone, Default)]
struct DynSys {
    plateaus: Vec<DynPlateau>,
    fronts: Vec<DynFront>,
    cells: Vec<DynCell>,
    /// Finite cells bounded by two frozen fronts: (cell, left front, right front, offset).
    static_cells: Vec<(usize, usize, usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Trigger {
    Vanish(usize),
    Collision(usize),
    Liu(usize),
    Collapse(usize, f64),
}

#[inline]
fn rh(flux: &PiecewiseAffineFlux, a: f64, b: f64) -> f64 {
    if a == b {
        flux.slope_at(a)
    } else {
        (flux.value(b) - flux.value(a)) / (b - a)
    }
}

#[inline]
fn val(r: ValRef, y: &[f64]) -> f64 {
    match r {
        ValRef::Fixed(v) => v,
        ValRef::Plateau(i) => y[i],
    }
}

/// `min_{u*} σ(u⁻, u*) − s` over the grid nodes strictly between the states.
fn direct_margin(flux: &PiecewiseAffineFlux, um: f64, up: f64) -> f64 {
    let s = rh(flux, um, up);
    let fm = flux.value(um);
    let mut m = f64::INFINITY;
    for j in flux.nodes_between(um.min(up), um.max(up)) {
        let u = flux.node(j);
        m = m.min((flux.node_value(j) - fm) / (u - um) - s);
    }
    m
}

/// Evolving front tracking solution.
#[derive(Debug, Clone)]
pub struct TrackerState {
    pair: Arc<SampledPair>,
    config: TrackerConfig,
    topology: Topology,
    period: f64,
    time: f64,
    cells: Vec<Cell>,
    fronts: Vec<TFront>,
    sys: DynSys,
    x_tol: f64,
    stats: TrackerStats,
    events: Vec<Event>,
}

impl TrackerState {
    /// Replaces every jump of `profile` by its Riemann fan and registers the
    /// extremum plateaus.
    pub fn init_from_profile(profile: &Profile, pair: Arc<SampledPair>, config: TrackerConfig) -> Result<Self> {
        let mut st = Self::build(profile, pair, config, 0.0)?;
        st.stats.initial_fronts = st.fronts.len();
        Ok(st)
    }

    fn build(profile: &Profile, pair: Arc<SampledPair>, config: TrackerConfig, time: f64) -> Result<Self> {
        if profile.n_cells() == 0 {
            return Err(Error::InvalidProfile("profile has no cells".into()));
        }
        let sigma = pair.sigma_min();
        let profile = Profile::normalized(
            profile.topology(),
            profile.breakpoints().to_vec(),
            profile.values().to_vec(),
            sigma,
        )?;
        let (topology, period) = match profile.topology() {
            Topology::Line => (Topology::Line, 0.0),
            Topology::Periodic { period } => (profile.topology(), period),
        };
        let bps = profile.breakpoints();
        let extent = match (bps.first(), bps.last()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()).max(b - a),
            _ => 0.0,
        };
        let x_tol = 1e-12 * extent.max(period).max(1.0);

        let mut cells = vec![Cell {
            value: profile.values()[0],
            kind: None,
        }];
        let mut fronts = Vec::new();
        for (x, ul, ur) in profile.jumps() {
            for fr in riemann::solve(ul, ur, &pair.f, &pair.g, x)? {
                fronts.push(TFront {
                    x_ref: x,
                    t_ref: time,
                    speed: fr.speed,
                    family: fr.family,
                    dynamic: false,
                });
                cells.push(Cell {
                    value: fr.u_right,
                    kind: None,
                });
            }
        }
        if matches!(topology, Topology::Periodic { .. }) && !fronts.is_empty() {
            cells.pop();
        }
        let mut st = Self {
            pair,
            config,
            topology,
            period,
            time,
            cells,
            fronts,
            sys: DynSys::default(),
            x_tol,
            stats: TrackerStats::default(),
            events: Vec::new(),
        };
        for c in 0..st.cells.len() {
            st.classify(c);
        }
        for k in 0..st.fronts.len() {
            st.refresh_front(k);
        }
        st.rebuild();
        st.stats.max_fronts = st.fronts.len();
        Ok(st)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn pair(&self) -> &SampledPair {
        &self.pair
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn stats(&self) -> &TrackerStats {
        &self.stats
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn n_fronts(&self) -> usize {
        self.fronts.len()
    }

    pub fn x_tol(&self) -> f64 {
        self.x_tol
    }

    fn periodic(&self) -> bool {
        matches!(self.topology, Topology::Periodic { .. })
    }

    fn flux(&self, family: Family) -> &PiecewiseAffineFlux {
        match family {
            Family::F => &self.pair.f,
            Family::G => &self.pair.g,
        }
    }

    /// Test hook: reverses the speed of front 0.
    fn flip(&self, front: usize) -> f64 {
        if front == 0 && self.config.mutation == Some(Mutation::FlipSpeedSign) {
            -1.0
        } else {
            1.0
        }
    }

    #[inline]
    fn right_cell(&self, k: usize) -> usize {
        if self.periodic() {
            (k + 1) % self.fronts.len()
        } else {
            k + 1
        }
    }

    /// Bounding fronts of a finite cell.
    fn cell_fronts(&self, c: usize) -> Option<(usize, usize)> {
        let n = self.fronts.len();
        if self.periodic() {
            (n >= 2).then(|| ((c + n - 1) % n, c))
        } else {
            (c >= 1 && c < n).then(|| (c - 1, c))
        }
    }

    fn cell_offset(&self, c: usize) -> f64 {
        if self.periodic() && c == 0 {
            self.period
        } else {
            0.0
        }
    }

    fn cell_width(&self, c: usize) -> f64 {
        match self.cell_fronts(c) {
            Some((l, r)) => {
                self.fronts[r].position(self.time) + self.cell_offset(c) - self.fronts[l].position(self.time)
            }
            None => f64::INFINITY,
        }
    }

    fn neighbours(&self, c: usize) -> Option<(usize, usize)> {
        let n = self.cells.len();
        if self.periodic() {
            (self.fronts.len() >= 2).then(|| ((c + n - 1) % n, (c + 1) % n))
        } else {
            (c >= 1 && c + 1 < n).then(|| (c - 1, c + 1))
        }
    }

    fn classify(&mut self, c: usize) {
        let kind = self.neighbours(c).and_then(|(l, r)| {
            let v = self.cells[c].value;
            let (a, b) = (self.cells[l].value, self.cells[r].value);
            if v > a && v > b {
                Some(PlateauKind::Max)
            } else if v < a && v < b {
                Some(PlateauKind::Min)
            } else {
                None
            }
        });
        self.cells[c].kind = kind;
    }

    /// Re-anchors front `k` at the current time with its current speed.
    fn refresh_front(&mut self, k: usize) {
        let t = self.time;
        let x = self.fronts[k].position(t);
        let (l, r) = (k, self.right_cell(k));
        let (a, b) = (self.cells[l].value, self.cells[r].value);
        let family = Family::of_jump(a, b).unwrap_or(self.fronts[k].family);
        let speed = rh(self.flux(family), a, b) * self.flip(k);
        let dynamic = self.cells[l].kind.is_some() || self.cells[r].kind.is_some();
        self.fronts[k] = TFront {
            x_ref: x,
            t_ref: t,
            speed,
            family,
            dynamic,
        };
    }

    fn build_liu(&self, family: Family, left: ValRef, right: ValRef) -> LiuCheck {
        if (family == Family::F && self.pair.f_concave()) || (family == Family::G && self.pair.g_convex()) {
            return LiuCheck::Skip;
        }
        let flux = self.flux(family);
        let outward = |us: f64, uh: f64| -> (i64, Vec<i64>) {
            let range = flux.nodes_between(us.min(uh), us.max(uh));
            let mut js: Vec<i64> = range.collect();
            if uh < us {
                js.reverse();
            }
            (js.first().copied().unwrap_or(i64::MIN), js)
        };
        match (left, right) {
            (ValRef::Fixed(us), ValRef::Plateau(p)) => {
                let uh = self.cells[self.sys_plateau_cell(p)].value;
                let (j_start, js) = outward(us, uh);
                let fs = flux.value(us);
                let mut acc = f64::INFINITY;
                let prefix = js
                    .iter()
                    .map(|&j| {
                        acc = acc.min((flux.node_value(j) - fs) / (flux.node(j) - us));
                        acc
                    })
                    .collect();
                LiuCheck::FixedLeft { us, j_start, prefix }
            }
            (ValRef::Plateau(p), ValRef::Fixed(us)) => {
                let uh = self.cells[self.sys_plateau_cell(p)].value;
                let (j_start, js) = outward(us, uh);
                let fs = flux.value(us);
                let mut acc = f64::NEG_INFINITY;
                let prefix = js
                    .iter()
                    .map(|&j| {
                        acc = acc.max((fs - flux.node_value(j)) / (us - flux.node(j)));
                        acc
                    })
                    .collect();
                LiuCheck::FixedRight { us, j_start, prefix }
            }
            _ => LiuCheck::Direct,
        }
    }

    fn sys_plateau_cell(&self, p: usize) -> usize {
        self.sys.plateaus[p].cell
    }

    /// Rebuilds the ODE system from the cell and front tables.
    fn rebuild(&mut self) {
        let n = self.fronts.len();
        let mut sys = DynSys::default();
        let mut slot = vec![usize::MAX; n];
        let mut nd = 0;
        for (k, f) in self.fronts.iter().enumerate() {
            if f.dynamic {
                slot[k] = nd;
                nd += 1;
            }
        }
        let mut pidx = vec![usize::MAX; self.cells.len()];
        for c in 0..self.cells.len() {
            let Some(kind) = self.cells[c].kind else { continue };
            let Some((l, r)) = self.cell_fronts(c) else { continue };
            pidx[c] = sys.plateaus.len();
            sys.plateaus.push(DynPlateau {
                cell: c,
                sign: if kind == PlateauKind::Max { -1.0 } else { 1.0 },
                left: slot[l],
                right: slot[r],
                offset: self.cell_offset(c),
            });
        }
        let vref = |c: usize| {
            if pidx[c] != usize::MAX {
                ValRef::Plateau(pidx[c])
            } else {
                ValRef::Fixed(self.cells[c].value)
            }
        };
        let mut dfronts = Vec::with_capacity(nd);
        for k in 0..n {
            if self.fronts[k].dynamic {
                dfronts.push((k, vref(k), vref(self.right_cell(k))));
            }
        }
        // the Liu caches read plateau cells through `self.sys`
        self.sys.plateaus = sys.plateaus.clone();
        sys.fronts = dfronts
            .into_iter()
            .map(|(k, left, right)| {
                let family = self.fronts[k].family;
                DynFront {
                    front: k,
                    family,
                    left,
                    right,
                    liu: self.build_liu(family, left, right),
                }
            })
            .collect();
        let pref = |k: usize| {
            if slot[k] != usize::MAX {
                PosRef::Dyn(slot[k])
            } else {
                let f = &self.fronts[k];
                PosRef::Fixed {
                    x_ref: f.x_ref,
                    t_ref: f.t_ref,
                    speed: f.speed,
                }
            }
        };
        for c in 0..self.cells.len() {
            let Some((l, r)) = self.cell_fronts(c) else { continue };
            let offset = self.cell_offset(c);
            if self.fronts[l].dynamic || self.fronts[r].dynamic {
                sys.cells.push(DynCell {
                    cell: c,
                    left: pref(l),
                    right: pref(r),
                    offset,
                    plateau: self.cells[c].kind.is_some(),
                });
            } else {
                sys.static_cells.push((c, l, r, offset));
            }
        }
        self.sys = sys;
    }
}

// ---------------------------------------------------------------------------
// integration
// ---------------------------------------------------------------------------

impl TrackerState {
    fn gather(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.sys.plateaus.len() + self.sys.fronts.len());
        y.extend(self.sys.plateaus.iter().map(|p| self.cells[p.cell].value));
        y.extend(self.sys.fronts.iter().map(|d| self.fronts[d.front].position(self.time)));
        y
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let np = self.sys.plateaus.len();
        for (i, p) in self.sys.plateaus.iter().enumerate() {
            let w = y[np + p.right] + p.offset - y[np + p.left];
            dy[i] = p.sign * self.pair.gap(y[i]) / w;
        }
        for (d, df) in self.sys.fronts.iter().enumerate() {
            let (a, b) = (val(df.left, y), val(df.right, y));
            dy[np + d] = rh(self.flux(df.family), a, b) * self.flip(df.front);
        }
    }

    fn rhs_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut dy = vec![0.0; y.len()];
        self.rhs(y, &mut dy);
        dy
    }

    fn rk4(&self, y0: &[f64], h: f64) -> Vec<f64> {
        let n = y0.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.rhs(y0, &mut k1);
        for i in 0..n {
            tmp[i] = y0[i] + 0.5 * h * k1[i];
        }
        self.rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y0[i] + 0.5 * h * k2[i];
        }
        self.rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y0[i] + h * k3[i];
        }
        self.rhs(&tmp, &mut k4);
        (0..n)
            .map(|i| y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    fn commit(&mut self, y: &[f64], t: f64) {
        let dy = self.rhs_vec(y);
        let np = self.sys.plateaus.len();
        self.time = t;
        for (i, p) in self.sys.plateaus.iter().enumerate() {
            self.cells[p.cell].value = y[i];
        }
        for (d, df) in self.sys.fronts.iter().enumerate() {
            let f = &mut self.fronts[df.front];
            f.x_ref = y[np + d];
            f.t_ref = t;
            f.speed = dy[np + d];
        }
        self.stats.rk4_steps += 1;
    }

    #[inline]
    fn pos(&self, r: PosRef, y: &[f64], dy: &[f64], t: f64) -> (f64, f64) {
        let np = self.sys.plateaus.len();
        match r {
            PosRef::Dyn(s) => (y[np + s], dy[np + s]),
            PosRef::Fixed { x_ref, t_ref, speed } => (x_ref + speed * (t - t_ref), speed),
        }
    }

    fn liu_margin(&self, df: &DynFront, y: &[f64]) -> (f64, f64) {
        let flux = self.flux(df.family);
        let (a, b) = (val(df.left, y), val(df.right, y));
        let s = rh(flux, a, b);
        let m = match &df.liu {
            LiuCheck::Skip => f64::INFINITY,
            LiuCheck::Direct => direct_margin(flux, a, b),
            LiuCheck::FixedLeft { us, j_start, prefix } | LiuCheck::FixedRight { us, j_start, prefix } => {
                let uh = if matches!(df.liu, LiuCheck::FixedLeft { .. }) { b } else { a };
                let range = flux.nodes_between(us.min(uh), us.max(uh));
                let (lo, hi) = (*range.start(), *range.end());
                if hi < lo {
                    f64::INFINITY
                } else {
                    let count = (hi - lo + 1) as usize;
                    let first = if uh > *us { lo } else { hi };
                    if first != *j_start || count > prefix.len() {
                        direct_margin(flux, a, b)
                    } else if matches!(df.liu, LiuCheck::FixedLeft { .. }) {
                        prefix[count - 1] - s
                    } else {
                        s - prefix[count - 1]
                    }
                }
            }
        };
        (m, s)
    }

    /// First restart trigger in the state `y` at time `t`. Frozen cells are
    /// only inspected when `with_static` is set.
    fn find_trigger(&self, y: &[f64], dy: &[f64], t: f64, with_static: bool) -> Option<Trigger> {
        let sigma = self.pair.sigma_min();
        for df in &self.sys.fronts {
            let (a, b) = (val(df.left, y), val(df.right, y));
            let jump = match df.family {
                Family::F => b - a,
                Family::G => a - b,
            };
            if jump <= sigma {
                return Some(Trigger::Vanish(df.front));
            }
        }
        for dc in &self.sys.cells {
            let (xl, vl) = self.pos(dc.left, y, dy, t);
            let (xr, vr) = self.pos(dc.right, y, dy, t);
            let w = xr + dc.offset - xl;
            if w < 0.0 || (w <= self.x_tol && vl > vr) {
                return Some(if dc.plateau {
                    Trigger::Collapse(dc.cell, w)
                } else {
                    Trigger::Collision(dc.cell)
                });
            }
        }
        for df in &self.sys.fronts {
            let (m, s) = self.liu_margin(df, y);
            if m < -LIU_TOL * (1.0 + s.abs()) {
                return Some(Trigger::Liu(df.front));
            }
        }
        if with_static {
            for &(c, l, r, off) in &self.sys.static_cells {
                let (fl, fr) = (&self.fronts[l], &self.fronts[r]);
                let w = fr.position(t) + off - fl.position(t);
                if w < 0.0 || (w <= self.x_tol && fl.speed > fr.speed) {
                    return Some(Trigger::Collision(c));
                }
            }
        }
        None
    }

    /// Next grid node each plateau value is heading for.
    fn node_targets(&self, y: &[f64]) -> Vec<f64> {
        let h = self.pair.f.spacing();
        self.sys
            .plateaus
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let u = y[i] / h;
                if p.sign < 0.0 {
                    (u.ceil() - 1.0) * h
                } else {
                    (u.floor() + 1.0) * h
                }
            })
            .collect()
    }

    fn crossed(&self, y: &[f64], targets: &[f64]) -> bool {
        self.sys.plateaus.iter().enumerate().any(|(i, p)| {
            if p.sign < 0.0 {
                y[i] <= targets[i]
            } else {
                y[i] >= targets[i]
            }
        })
    }

    fn min_plateau_width_y(&self, y: &[f64]) -> f64 {
        let np = self.sys.plateaus.len();
        self.sys
            .plateaus
            .iter()
            .map(|p| y[np + p.right] + p.offset - y[np + p.left])
            .fold(f64::INFINITY, f64::min)
    }

    fn rk_step(&self, y: &[f64]) -> f64 {
        let w = self.min_plateau_width_y(y).max(0.0);
        let a = self.config.width_step * w / self.pair.lambda().max(1.0);
        let b = self.config.gap_step * w / self.pair.gap_max();
        a.min(b)
    }

    fn step_size(&self, t_max: f64, y: &[f64]) -> f64 {
        let t = self.time;
        let mut h = t_max - t;
        for &(_, l, r, off) in &self.sys.static_cells {
            let (fl, fr) = (&self.fronts[l], &self.fronts[r]);
            let closing = fl.speed - fr.speed;
            if closing > 0.0 {
                let w = fr.position(t) + off - fl.position(t);
                h = h.min((w / closing).max(0.0));
            }
        }
        if !self.sys.plateaus.is_empty() {
            h = h.min(self.rk_step(y));
        }
        h
    }

    fn make_event(&self, trig: Trigger) -> Result<Event> {
        let t = self.time;
        let (kind, index, position) = match trig {
            Trigger::Collapse(cell, width) => {
                return Err(Error::PlateauCollapse { time: t, cell, width });
            }
            Trigger::Vanish(k) => {
                let both = self.cells[k].kind.is_some() && self.cells[self.right_cell(k)].kind.is_some();
                let kind = if both { EventKind::ExtremaMerge } else { EventKind::JumpVanishes };
                (kind, k, self.fronts[k].position(t))
            }
            Trigger::Liu(k) => (EventKind::AdmissibilityLoss, k, self.fronts[k].position(t)),
            Trigger::Collision(c) => {
                let x = self
                    .cell_fronts(c)
                    .map(|(_, r)| self.fronts[r].position(t))
                    .unwrap_or(f64::NAN);
                (EventKind::Collision, c, x)
            }
        };
        Ok(Event {
            kind,
            time: t,
            position,
            index,
        })
    }

    /// Integrates up to the earliest restart trigger or `t_max`, whichever
    /// comes first, without processing the trigger.
    pub fn advance_to_event(&mut self, t_max: f64) -> Result<Option<Event>> {
        loop {
            let y = self.gather();
            let dy = self.rhs_vec(&y);
            if let Some(tr) = self.find_trigger(&y, &dy, self.time, true) {
                return self.make_event(tr).map(Some);
            }
            if self.time >= t_max {
                return Ok(None);
            }
            let t0 = self.time;
            let h = self.step_size(t_max, &y);
            let t1 = if h >= t_max - t0 { t_max } else { t0 + h };
            if t1 <= t0 {
                return Err(Error::Invariant(format!("time step underflow at t = {t0}")));
            }
            if self.sys.plateaus.is_empty() {
                self.time = t1;
                continue;
            }
            let targets = self.node_targets(&y);
            let y1 = self.rk4(&y, t1 - t0);
            let pred = |s: &Self, yy: &[f64], tt: f64| {
                let d = s.rhs_vec(yy);
                s.find_trigger(yy, &d, tt, false).is_some() || s.crossed(yy, &targets)
            };
            if pred(self, &y1, t1) {
                let (mut lo, mut hi, mut y_hi) = (t0, t1, y1);
                let tol = 4.0 * f64::EPSILON * t1.abs().max(1.0);
                while hi - lo > tol {
                    let mid = lo + 0.5 * (hi - lo);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let ym = self.rk4(&y, mid - t0);
                    if pred(self, &ym, mid) {
                        hi = mid;
                        y_hi = ym;
                    } else {
                        lo = mid;
                    }
                }
                self.commit(&y_hi, hi);
            } else {
                self.commit(&y1, t1);
            }
        }
    }

    /// Earliest restart in `[t, t_max]`, computed on a copy of the state.
    pub fn next_event(&self, t_max: f64) -> Result<Option<Event>> {
        self.clone().advance_to_event(t_max)
    }

    /// Moves the state forward by `dt` assuming no restart is due in between.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        if !(dt >= 0.0) {
            return Err(Error::Degenerate(format!("negative time step {dt}")));
        }
        let target = self.time + dt;
        while self.time < target {
            if self.sys.plateaus.is_empty() {
                self.time = target;
                break;
            }
            let y = self.gather();
            let h = self.rk_step(&y);
            let (h, t1) = if h >= target - self.time {
                (target - self.time, target)
            } else {
                (h, self.time + h)
            };
            let y1 = self.rk4(&y, h);
            let w = self.min_plateau_width_y(&y1);
            if !(w > 0.0) {
                return Err(Error::PlateauCollapse {
                    time: t1,
                    cell: usize::MAX,
                    width: w,
                });
            }
            self.commit(&y1, t1);
        }
        Ok(())
    }

    /// Evolves through every restart up to time `t_end`.
    pub fn evolve_to(&mut self, t_end: f64) -> Result<()> {
        if t_end < self.time {
            return Err(Error::Degenerate(format!(
                "cannot evolve backwards from {} to {t_end}",
                self.time
            )));
        }
        while let Some(ev) = self.advance_to_event(t_end)? {
            self.apply_restart(&ev)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// restarts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Seg {
    value: f64,
    kind: Option<PlateauKind>,
    infinite: bool,
    width: f64,
}

impl Seg {
    fn rank(&self) -> u8 {
        if self.infinite {
            0
        } else if self.kind.is_none() {
            1
        } else {
            2
        }
    }

    /// Union of two neighbouring cells whose values agree up to σ.
    fn merge(self, other: Seg) -> Seg {
        let value = match self.rank().cmp(&other.rank()) {
            std::cmp::Ordering::Less => self.value,
            std::cmp::Ordering::Greater => other.value,
            std::cmp::Ordering::Equal if self.rank() == 2 => {
                (self.width * self.value + other.width * other.value) / (self.width + other.width)
            }
            std::cmp::Ordering::Equal => self.value,
        };
        Seg {
            value,
            kind: if self.rank() <= other.rank() { self.kind } else { other.kind },
            infinite: self.infinite || other.infinite,
            width: self.width + other.width,
        }
    }
}

impl TrackerState {
    /// Processes a trigger located at the current time.
    pub fn apply_restart(&mut self, event: &Event) -> Result<()> {
        if event.time != self.time {
            return Err(Error::Invariant(format!(
                "restart at t = {} requested while the state is at t = {}",
                event.time, self.time
            )));
        }
        if self.stats.restarts >= self.config.restart_cap {
            return Err(Error::RestartCap {
                cap: self.config.restart_cap,
                time: self.time,
                fronts: self.fronts.len(),
            });
        }
        let n = self.fronts.len();
        match event.kind {
            EventKind::JumpVanishes | EventKind::ExtremaMerge => {
                let k = event.index;
                let (a, b) = (k, self.right_cell(k));
                match (self.cells[a].kind, self.cells[b].kind) {
                    (Some(_), Some(_)) => {
                        let (wa, wb) = (self.cell_width(a), self.cell_width(b));
                        let avg = (wa * self.cells[a].value + wb * self.cells[b].value) / (wa + wb);
                        self.cells[a].value = avg;
                        self.cells[b].value = avg;
                    }
                    (Some(_), None) => self.cells[a].value = self.cells[b].value,
                    (None, Some(_)) => self.cells[b].value = self.cells[a].value,
                    (None, None) => {}
                }
                if self.periodic() {
                    self.resolve_window((k + n - 1) % n, 3.min(n))?;
                } else {
                    let lo = k.saturating_sub(1);
                    let hi = (k + 1).min(n - 1);
                    self.resolve_window(lo, hi - lo + 1)?;
                }
                if event.kind == EventKind::ExtremaMerge {
                    self.stats.extrema_merges += 1;
                } else {
                    self.stats.jump_vanishes += 1;
                }
            }
            EventKind::AdmissibilityLoss => {
                self.resolve_window(event.index, 1)?;
                self.stats.admissibility_losses += 1;
            }
            EventKind::Collision => {
                let (mut lf, rf) = self
                    .cell_fronts(event.index)
                    .ok_or_else(|| Error::Invariant("collision in an unbounded cell".into()))?;
                let mut len = if self.periodic() { (rf + n - lf) % n + 1 } else { rf - lf + 1 };
                // absorb coincident neighbours on both sides
                loop {
                    if len >= n {
                        break;
                    }
                    if self.cell_fronts(lf).is_some() && self.cell_width(lf) <= self.x_tol {
                        lf = if self.periodic() { (lf + n - 1) % n } else { lf - 1 };
                        len += 1;
                        continue;
                    }
                    let right = if self.periodic() { (lf + len) % n } else { lf + len };
                    if self.cell_fronts(right).is_some() && self.cell_width(right) <= self.x_tol {
                        len += 1;
                        continue;
                    }
                    break;
                }
                self.resolve_window(lf, len)?;
                self.stats.collisions += 1;
            }
        }
        self.stats.restarts += 1;
        self.stats.max_fronts = self.stats.max_fronts.max(self.fronts.len());
        if self.config.record_events {
            self.events.push(*event);
        }
        Ok(())
    }

    fn rotate_left(&mut self, r: usize) {
        if r == 0 {
            return;
        }
        let p = self.period;
        for f in &mut self.fronts[..r] {
            f.x_ref += p;
        }
        self.fronts.rotate_left(r);
        self.cells.rotate_left(r);
    }

    /// Re-solves the jumps across fronts `lo .. lo + len` (cyclic on a
    /// circle) from the current cell values.
    fn resolve_window(&mut self, lo: usize, len: usize) -> Result<()> {
        let n = self.fronts.len();
        if len == 0 || n == 0 {
            return Ok(());
        }
        if self.config.full_reinit || (self.periodic() && len + 2 > n) {
            return self.full_reinit();
        }
        let lo = if self.periodic() {
            self.rotate_left((lo + n - 1) % n);
            1
        } else {
            lo
        };
        let t = self.time;
        let sigma = self.pair.sigma_min();
        let hi_cell = lo + len;
        let xs: Vec<f64> = (lo..lo + len).map(|k| self.fronts[k].position(t)).collect();
        let seg = |s: &Self, c: usize| Seg {
            value: s.cells[c].value,
            kind: s.cells[c].kind,
            infinite: s.cell_fronts(c).is_none(),
            width: s.cell_width(c),
        };

        // drop collapsed inner cells; remember where the merged jumps sit
        let mut kept = vec![seg(self, lo)];
        let mut jump_at: Vec<(f64, f64)> = Vec::new();
        let mut pending = (xs[0], xs[0]);
        for i in 1..len {
            let w = xs[i] - xs[i - 1];
            if w <= self.x_tol {
                pending = (pending.0.min(xs[i]), pending.1.max(xs[i]));
                continue;
            }
            jump_at.push(pending);
            kept.push(seg(self, lo + i));
            pending = (xs[i], xs[i]);
        }
        jump_at.push(pending);
        kept.push(seg(self, hi_cell));

        // merge neighbours whose values agree up to σ
        let mut segs = vec![kept[0]];
        let mut jumps: Vec<f64> = Vec::new();
        for i in 1..kept.len() {
            let last = segs.last_mut().unwrap();
            if (kept[i].value - last.value).abs() <= sigma {
                *last = last.merge(kept[i]);
            } else {
                let (a, b) = jump_at[i - 1];
                jumps.push(0.5 * (a + b));
                segs.push(kept[i]);
            }
        }

        let mut new_cells = vec![Cell {
            value: segs[0].value,
            kind: None,
        }];
        let mut new_fronts = Vec::new();
        for (j, &x) in jumps.iter().enumerate() {
            let fan = riemann::solve(segs[j].value, segs[j + 1].value, &self.pair.f, &self.pair.g, x)?;
            let m = fan.len();
            for (i, fr) in fan.into_iter().enumerate() {
                new_fronts.push(TFront {
                    x_ref: x,
                    t_ref: t,
                    speed: fr.speed,
                    family: fr.family,
                    dynamic: false,
                });
                if i + 1 < m {
                    new_cells.push(Cell {
                        value: fr.u_right,
                        kind: None,
                    });
                }
            }
            new_cells.push(Cell {
                value: segs[j + 1].value,
                kind: None,
            });
        }
        let new_len = new_fronts.len();
        self.cells.splice(lo..=hi_cell, new_cells);
        self.fronts.splice(lo..lo + len, new_fronts);

        let nf = self.fronts.len();
        if self.periodic() && nf < 2 {
            return self.full_reinit();
        }
        for c in lo..=lo + new_len {
            self.classify(c);
        }
        let first = lo.saturating_sub(1);
        for k in first..=(lo + new_len).min(nf.saturating_sub(1)) {
            if k < nf {
                self.refresh_front(k);
            }
        }
        self.rebuild();
        Ok(())
    }

    /// Snapshot plus re-initialisation of the whole state.
    fn full_reinit(&mut self) -> Result<()> {
        let profile = self.snapshot_with_tol(self.x_tol)?;
        let fresh = Self::build(&profile, self.pair.clone(), self.config.clone(), self.time)?;
        self.cells = fresh.cells;
        self.fronts = fresh.fronts;
        self.sys = fresh.sys;
        self.stats.full_reinits += 1;
        Ok(())
    }

    fn snapshot_with_tol(&self, x_tol: f64) -> Result<Profile> {
        let t = self.time;
        let mut xs: Vec<f64> = self.fronts.iter().map(|f| f.position(t)).collect();
        for k in 1..xs.len() {
            if xs[k] - xs[k - 1] <= x_tol {
                xs[k] = xs[k - 1];
            }
        }
        if self.periodic() && xs.len() >= 2 && xs[0] + self.period - xs[xs.len() - 1] <= x_tol {
            let last = xs.len() - 1;
            xs[last] = xs[0] + self.period;
        }
        let values: Vec<f64> = self.cells.iter().map(|c| c.value).collect();
        Profile::normalized(self.topology, xs, values, self.pair.sigma_min())
    }

    /// Current solution as a profile (plateaus become flat cells, coincident
    /// fronts are merged).
    pub fn snapshot_profile(&self) -> Result<Profile> {
        self.snapshot_with_tol(0.0)
    }

    pub fn fronts(&self) -> Vec<Front> {
        let t = self.time;
        self.fronts
            .iter()
            .enumerate()
            .map(|(k, f)| Front {
                position: f.position(t),
                speed: f.speed,
                u_left: self.cells[k].value,
                u_right: self.cells[self.right_cell(k)].value,
                family: f.family,
            })
            .collect()
    }

    pub fn plateaus(&self) -> Vec<PlateauInfo> {
        let t = self.time;
        (0..self.cells.len())
            .filter_map(|c| {
                let kind = self.cells[c].kind?;
                let (l, r) = self.cell_fronts(c)?;
                Some(PlateauInfo {
                    kind,
                    cell: c,
                    value: self.cells[c].value,
                    x_left: self.fronts[l].position(t),
                    x_right: self.fronts[r].position(t) + self.cell_offset(c),
                })
            })
            .collect()
    }

    pub fn min_plateau_width(&self) -> Option<f64> {
        self.plateaus().iter().map(|p| p.width()).reduce(f64::min)
    }

    /// Number of extremum plateaus.
    pub fn n_plateaus(&self) -> usize {
        self.cells.iter().filter(|c| c.kind.is_some()).count()
    }

    /// Cells with the interpolated switch values at their ends. On the line
    /// the outer cells extend to ±∞; on a circle the first cell wraps.
    pub fn slice(&self) -> Vec<SliceCell> {
        let t = self.time;
        let nc = self.cells.len();
        let bounds = |c: usize| -> (f64, f64) {
            match self.cell_fronts(c) {
                Some((l, r)) => (
                    self.fronts[l].position(t),
                    self.fronts[r].position(t) + self.cell_offset(c),
                ),
                None if self.periodic() => (0.0, self.period),
                None if c == 0 && self.fronts.is_empty() => (f64::NEG_INFINITY, f64::INFINITY),
                None if c == 0 => (f64::NEG_INFINITY, self.fronts[0].position(t)),
                None => (self.fronts[self.fronts.len() - 1].position(t), f64::INFINITY),
            }
        };
        // θ at the left end of a plateau, and at its right end
        let ends = |k: PlateauKind| match k {
            PlateauKind::Max => (1.0, 0.0),
            PlateauKind::Min => (0.0, 1.0),
        };
        let mut fill = vec![f64::NAN; nc];
        let mut next: Option<f64> = None;
        let order: Vec<usize> = if self.periodic() {
            (0..2 * nc).rev().map(|i| i % nc).collect()
        } else {
            (0..nc).rev().collect()
        };
        for c in order {
            match self.cells[c].kind {
                Some(k) => next = Some(ends(k).0),
                None => {
                    if let Some(v) = next {
                        fill[c] = v;
                    }
                }
            }
        }
        let mut prev: Option<f64> = None;
        for c in 0..nc {
            match self.cells[c].kind {
                Some(k) => prev = Some(ends(k).1),
                None => {
                    if fill[c].is_nan() {
                        fill[c] = prev.unwrap_or_else(|| {
                            if self.fronts.iter().any(|f| f.family == Family::G) {
                                0.0
                            } else {
                                1.0
                            }
                        });
                    }
                }
            }
        }
        (0..nc)
            .map(|c| {
                let (x_left, x_right) = bounds(c);
                let (theta_left, theta_right) = match self.cells[c].kind {
                    Some(k) => ends(k),
                    None => (fill[c], fill[c]),
                };
                SliceCell {
                    x_left,
                    x_right,
                    value: self.cells[c].value,
                    theta_left,
                    theta_right,
                }
            })
            .collect()
    }

    /// Piecewise affine switch value of the interpolated flux at `x`.
    pub fn interpolated_theta(&self, x: f64) -> f64 {
        let slice = self.slice();
        let x = match self.topology {
            Topology::Periodic { period } if slice.len() > 1 => {
                let x0 = slice[0].x_left;
                x0 + (x - x0).rem_euclid(period)
            }
            _ => x,
        };
        for s in &slice {
            if x >= s.x_left && x <= s.x_right {
                if s.theta_left == s.theta_right || !s.x_left.is_finite() || !s.x_right.is_finite() {
                    return s.theta_left;
                }
                let r = (x - s.x_left) / (s.x_right - s.x_left);
                return s.theta_left + r * (s.theta_right - s.theta_left);
            }
        }
        slice.last().map(|s| s.theta_right).unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{Polynomial, SmoothFluxPair};

    fn constant_pair(m: f64) -> Arc<SampledPair> {
        let pair = SmoothFluxPair::new(Polynomial::constant(0.0), Polynomial::constant(1.0), (-m, m)).unwrap();
        Arc::new(SampledPair::new(&pair, 4, 1e-13).unwrap())
    }

    fn burgers_pair(nu: u32) -> Arc<SampledPair> {
        let f = Polynomial::new(vec![0.0, 0.0, 0.5]);
        let pair = SmoothFluxPair::new(f.clone(), f.add_constant(1.0), (-1.1, 1.1)).unwrap();
        Arc::new(SampledPair::new(&pair, nu, 1e-13).unwrap())
    }

    fn square_line() -> Profile {
        Profile::line_from_blocks(&[(0.0, 1.0, 1.0)]).unwrap()
    }

    fn square_periodic() -> Profile {
        Profile::periodic(1.0, vec![0.0, 0.5], vec![0.0, 1.0]).unwrap()
    }

    fn state(p: &Profile, pair: Arc<SampledPair>) -> TrackerState {
        TrackerState::init_from_profile(p, pair, TrackerConfig::default()).unwrap()
    }

    #[test]
    fn square_wave_dispatch() {
        let st = state(&square_line(), burgers_pair(2));
        let pl = st.plateaus();
        assert_eq!(pl.len(), 1);
        assert_eq!(pl[0].kind, PlateauKind::Max);
        let fr = st.fronts();
        assert!(fr.iter().filter(|f| f.position == 0.0).all(|f| f.family == Family::F));
        assert!(fr.iter().filter(|f| f.position == 1.0).all(|f| f.family == Family::G));
        // convex f splits the upward jump into one front per node segment
        assert_eq!(fr.iter().filter(|f| f.family == Family::F).count(), 4);
    }

    #[test]
    fn monotone_staircase_has_no_plateaus() {
        let p = Profile::line(vec![0.0, 1.0, 2.0], vec![0.0, 0.25, 0.5, 0.75]).unwrap();
        let st = state(&p, burgers_pair(2));
        assert_eq!(st.n_plateaus(), 0);
        assert!(st.fronts().iter().all(|f| f.family == Family::F));
    }

    #[test]
    fn periodic_square_wave_has_one_max_one_min() {
        let st = state(&square_periodic(), constant_pair(1.0));
        let kinds: Vec<_> = st.plateaus().iter().map(|p| p.kind).collect();
        assert_eq!(kinds.len(), 2);
        assert!(kinds.contains(&PlateauKind::Max) && kinds.contains(&PlateauKind::Min));
    }

    #[test]
    fn advance_decays_plateau_linearly() {
        let mut st = state(&square_line(), constant_pair(1.0));
        st.advance(0.0).unwrap();
        assert_eq!(st.plateaus()[0].value, 1.0);
        st.advance(0.25).unwrap();
        let p = st.plateaus()[0];
        assert!((p.value - 0.75).abs() < 1e-13);
        assert_eq!((p.x_left, p.x_right), (0.0, 1.0));
    }

    #[test]
    fn periodic_square_wave_values_at_tenth() {
        let mut st = state(&square_periodic(), constant_pair(1.0));
        st.advance(0.1).unwrap();
        for p in st.plateaus() {
            let expect = if p.kind == PlateauKind::Max { 0.8 } else { 0.2 };
            assert!((p.value - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn frozen_fronts_collide() {
        // downward steps 2 -> 1 at x = 0 (speed 1.5) and 1 -> 0 at x = 1 (speed 0.5)
        let f = Polynomial::new(vec![0.0, 0.0, 0.5]);
        let pair = SmoothFluxPair::new(f.clone(), f.add_constant(1.0), (-2.5, 2.5)).unwrap();
        let pair = Arc::new(SampledPair::new(&pair, 1, 1e-13).unwrap());
        let p = Profile::line(vec![0.0, 1.0], vec![2.0, 1.0, 0.0]).unwrap();
        let mut st = state(&p, pair);
        let ev = st.next_event(10.0).unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::Collision);
        assert!((ev.time - 1.0).abs() < 1e-12);
        st.evolve_to(2.0).unwrap();
        let fr = st.fronts();
        assert_eq!(fr.len(), 1);
        assert!((fr[0].speed - 1.0).abs() < 1e-14);
        assert!((fr[0].position - 2.5).abs() < 1e-12);
    }

    #[test]
    fn linear_gap_closure_collision_time() {
        // f(u) = -u for u in [0, 2]... use affine flux pair f = -u, g = 1 - u
        let pair = SmoothFluxPair::new(
            Polynomial::new(vec![0.0, -1.0]),
            Polynomial::new(vec![1.0, -1.0]),
            (-3.0, 3.0),
        )
        .unwrap();
        let pair = Arc::new(SampledPair::new(&pair, 2, 1e-13).unwrap());
        // staircase 0 | 1 | 2 with the middle cell on [0, 1]: both F-fronts move at -1
        let p = Profile::line(vec![0.0, 1.0], vec![0.0, 1.0, 2.0]).unwrap();
        let st = state(&p, pair);
        assert!(st.next_event(5.0).unwrap().is_none());
    }

    #[test]
    fn plateau_jump_vanishes_at_unit_time() {
        let st = state(&square_line(), constant_pair(1.0));
        let ev = st.next_event(5.0).unwrap().unwrap();
        assert!(matches!(ev.kind, EventKind::JumpVanishes | EventKind::ExtremaMerge));
        assert!((ev.time - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extinction_of_line_square_wave() {
        let mut st = state(&square_line(), constant_pair(1.0));
        st.evolve_to(2.0).unwrap();
        let p = st.snapshot_profile().unwrap();
        assert!(p.is_constant());
        assert_eq!(p.values(), &[0.0]);
    }

    #[test]
    fn periodic_square_wave_averages() {
        let mut st = state(&square_periodic(), constant_pair(1.0));
        st.evolve_to(0.5).unwrap();
        let p = st.snapshot_profile().unwrap();
        assert!(p.is_constant());
        assert!((p.values()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn evolve_to_current_time_is_identity() {
        let mut st = state(&square_line(), burgers_pair(3));
        let before = st.snapshot_profile().unwrap();
        st.evolve_to(0.0).unwrap();
        assert_eq!(st.snapshot_profile().unwrap(), before);
    }

    #[test]
    fn interpolated_theta_on_plateau() {
        let st = state(&square_line(), constant_pair(1.0));
        assert_eq!(st.interpolated_theta(0.5), 0.5);
        assert_eq!(st.interpolated_theta(0.0), 1.0);
        assert_eq!(st.interpolated_theta(-3.0), 1.0);
        assert_eq!(st.interpolated_theta(3.0), 0.0);
        let dec = Profile::line(vec![0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(state(&dec, constant_pair(1.0)).interpolated_theta(0.3), 0.0);
    }

    #[test]
    fn max_plateau_absorbs_left_step() {
        // 0 | 0.5 on [0,1] | 1 on [1,2] | 0: the max decays onto 0.5 first
        let p = Profile::line(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0, 0.0]).unwrap();
        let mut st = state(&p, constant_pair(1.0));
        let ev = st.advance_to_event(5.0).unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::JumpVanishes);
        assert!((ev.time - 0.5).abs() < 1e-12);
        st.apply_restart(&ev).unwrap();
        let pl = st.plateaus();
        assert_eq!(pl.len(), 1);
        assert_eq!((pl[0].x_left, pl[0].x_right), (0.0, 2.0));
        assert_eq!(pl[0].value, 0.5);
    }

    #[test]
    fn local_restarts_match_full_reinit() {
        let p = Profile::periodic(
            1.0,
            vec![0.05, 0.2, 0.33, 0.5, 0.61, 0.8],
            vec![0.25, -0.5, 0.75, 0.125, -0.25, 0.5],
        )
        .unwrap();
        let pair = burgers_pair(5);
        let mut a = state(&p, pair.clone());
        let cfg = TrackerConfig {
            full_reinit: true,
            ..TrackerConfig::default()
        };
        let mut b = TrackerState::init_from_profile(&p, pair, cfg).unwrap();
        a.evolve_to(0.7).unwrap();
        b.evolve_to(0.7).unwrap();
        assert!(a.stats().restarts > 10);
        let (pa, pb) = (a.snapshot_profile().unwrap(), b.snapshot_profile().unwrap());
        for k in 0..1000 {
            let x = k as f64 / 1000.0 + 1e-4;
            assert!((pa.value_at(x) - pb.value_at(x)).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn mutation_hook_reverses_only_the_first_front() {
        let p = Profile::line(vec![0.0, 1.0, 2.0], vec![0.0, 0.25, 0.5, 0.75]).unwrap();
        let cfg = TrackerConfig {
            mutation: Some(Mutation::FlipSpeedSign),
            ..TrackerConfig::default()
        };
        let plain = state(&p, burgers_pair(2)).fronts();
        let bent = TrackerState::init_from_profile(&p, burgers_pair(2), cfg).unwrap().fronts();
        assert_ne!(plain[0].speed, 0.0);
        assert_eq!(bent[0].speed, -plain[0].speed);
        for (a, b) in plain.iter().zip(&bent).skip(1) {
            assert_eq!(a.speed, b.speed);
        }
    }

    #[test]
    fn restart_cap_is_enforced() {
        let cfg = TrackerConfig {
            restart_cap: 0,
            ..TrackerConfig::default()
        };
        let mut st = TrackerState::init_from_profile(&square_line(), constant_pair(1.0), cfg).unwrap();
        assert!(matches!(st.evolve_to(2.0), Err(Error::RestartCap { .. })));
    }
}
