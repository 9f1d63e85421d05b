//! Piecewise constant profiles on the line or on a circle.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    Line,
    Periodic { period: f64 },
}

/// Right-continuous step function.
///
/// On the line `values.len() == breakpoints.len() + 1` and `values[0]` is the
/// state on `(-∞, b_0)`. On a circle of length `period` there are as many
/// values as breakpoints: `values[k]` lives on `(b_{k-1}, b_k)` and
/// `values[0]` on the wrapping cell `(b_{n-1} - period, b_0)`. A constant
/// periodic profile has no breakpoints and one value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    topology: Topology,
}

impl Profile {
    pub fn new(topology: Topology, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let p = Self {
            breakpoints,
            values,
            topology,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn line(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(Topology::Line, breakpoints, values)
    }

    pub fn periodic(period: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(Topology::Periodic { period }, breakpoints, values)
    }

    pub fn constant(topology: Topology, value: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: vec![value],
            topology,
        }
    }

    /// Compactly supported line profile from `(left, right, value)` blocks.
    /// Blocks must be ordered and non-overlapping; gaps are filled with 0.
    pub fn line_from_blocks(blocks: &[(f64, f64, f64)]) -> Result<Self> {
        let mut bps = Vec::new();
        let mut vals = vec![0.0];
        for &(a, b, v) in blocks {
            if !(a < b) {
                return Err(Error::InvalidProfile(format!("empty block [{a}, {b}]")));
            }
            if let Some(&last) = bps.last() {
                if a < last {
                    return Err(Error::InvalidProfile("blocks overlap or are unordered".into()));
                }
                if a > last {
                    bps.push(a);
                    vals.push(v);
                } else {
                    *vals.last_mut().unwrap() = v;
                }
            } else {
                bps.push(a);
                vals.push(v);
            }
            bps.push(b);
            vals.push(0.0);
        }
        Self::normalized(Topology::Line, bps, vals, 0.0)
    }

    /// Builds a profile from raw data that may contain equal neighbours or
    /// zero-width cells; jumps with `|Δ| <= tol` are merged (the left value is
    /// kept) and coincident breakpoints collapse.
    pub fn normalized(topology: Topology, breakpoints: Vec<f64>, values: Vec<f64>, tol: f64) -> Result<Self> {
        match topology {
            Topology::Line => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidProfile(format!(
                        "line profile needs {} values, got {}",
                        breakpoints.len() + 1,
                        values.len()
                    )));
                }
                let mut bps = Vec::with_capacity(breakpoints.len());
                let mut vals = Vec::with_capacity(values.len());
                vals.push(values[0]);
                for (k, &b) in breakpoints.iter().enumerate() {
                    let v = values[k + 1];
                    // zero-width cell: the newer value overwrites it
                    if let Some(&last) = bps.last() {
                        if b <= last {
                            vals.pop();
                            bps.pop();
                            let prev = *vals.last().unwrap();
                            if (v - prev).abs() > tol {
                                bps.push(last);
                                vals.push(v);
                            }
                            continue;
                        }
                    }
                    let prev = *vals.last().unwrap();
                    if (v - prev).abs() > tol {
                        bps.push(b);
                        vals.push(v);
                    }
                }
                Self::new(topology, bps, vals)
            }
            Topology::Periodic { period } => {
                if values.len() != breakpoints.len().max(1) {
                    return Err(Error::InvalidProfile(format!(
                        "periodic profile needs {} values, got {}",
                        breakpoints.len().max(1),
                        values.len()
                    )));
                }
                if breakpoints.is_empty() {
                    return Self::new(topology, breakpoints, values);
                }
                // Walk the cells starting with cell 1 and ending with cell 0.
                let n = breakpoints.len();
                let mut bps: Vec<f64> = Vec::with_capacity(n);
                let mut vals: Vec<f64> = Vec::with_capacity(n);
                // (left breakpoint, value) chain, cell k starts at b_{k-1}
                let mut chain: Vec<(f64, f64)> = Vec::with_capacity(n);
                for k in 1..=n {
                    let left = breakpoints[k - 1];
                    let v = values[k % n];
                    if let Some(&(l, pv)) = chain.last() {
                        if left <= l {
                            chain.pop();
                            match chain.last() {
                                Some(&(_, ppv)) if (v - ppv).abs() <= tol => {}
                                _ => chain.push((l, v)),
                            }
                            continue;
                        }
                        if (v - pv).abs() <= tol {
                            continue;
                        }
                    }
                    chain.push((left, v));
                }
                // wrap-around: the last cell is adjacent to the first
                while chain.len() > 1 {
                    let (l0, v0) = chain[0];
                    let (ll, vl) = *chain.last().unwrap();
                    if ll >= l0 + period {
                        // the last cell has zero width across the wrap
                        chain.pop();
                        continue;
                    }
                    if (v0 - vl).abs() <= tol {
                        chain.remove(0);
                        continue;
                    }
                    break;
                }
                if chain.len() <= 1 {
                    let v = chain.first().map(|c| c.1).unwrap_or(values[0]);
                    return Ok(Self::constant(topology, v));
                }
                // chain[i] = (b, v) means value v on (b, next b); rewrite in the
                // stored layout where values[k] ends at breakpoint b_k.
                let m = chain.len();
                for i in 0..m {
                    bps.push(chain[i].0);
                    vals.push(chain[(i + m - 1) % m].1);
                }
                // normalise the origin so breakpoints lie in [b_0, b_0 + period)
                let b0 = bps[0];
                for b in bps.iter_mut().skip(1) {
                    while *b >= b0 + period {
                        *b -= period;
                    }
                }
                let mut pairs: Vec<(f64, f64)> = bps.into_iter().zip(vals).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (bps, vals) = pairs.into_iter().unzip();
                Self::new(topology, bps, vals)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile(format!("non-finite value {v}")));
        }
        if let Some(b) = self.breakpoints.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidProfile(format!("non-finite breakpoint {b}")));
        }
        if self.breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidProfile("breakpoints must increase strictly".into()));
        }
        match self.topology {
            Topology::Line => {
                if self.values.len() != self.breakpoints.len() + 1 {
                    return Err(Error::InvalidProfile(format!(
                        "line profile with {} breakpoints needs {} values, got {}",
                        self.breakpoints.len(),
                        self.breakpoints.len() + 1,
                        self.values.len()
                    )));
                }
            }
            Topology::Periodic { period } => {
                if !(period > 0.0 && period.is_finite()) {
                    return Err(Error::InvalidProfile(format!("period must be positive, got {period}")));
                }
                if self.values.len() != self.breakpoints.len().max(1) {
                    return Err(Error::InvalidProfile(format!(
                        "periodic profile with {} breakpoints needs {} values, got {}",
                        self.breakpoints.len(),
                        self.breakpoints.len().max(1),
                        self.values.len()
                    )));
                }
                if self.breakpoints.len() == 1 {
                    return Err(Error::InvalidProfile(
                        "a periodic profile cannot have a single jump".into(),
                    ));
                }
                if let (Some(first), Some(last)) = (self.breakpoints.first(), self.breakpoints.last()) {
                    if !(last - first < period) {
                        return Err(Error::InvalidProfile(
                            "periodic breakpoints must fit inside one period".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn period(&self) -> Option<f64> {
        match self.topology {
            Topology::Periodic { period } => Some(period),
            Topology::Line => None,
        }
    }

    pub fn n_jumps(&self) -> usize {
        self.breakpoints.len()
    }

    /// Number of cells; on the line this counts the two unbounded ones.
    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn is_constant(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// Right-continuous evaluation.
    pub fn value_at(&self, x: f64) -> f64 {
        match self.topology {
            Topology::Line => {
                let idx = self.breakpoints.partition_point(|&b| b <= x);
                self.values[idx]
            }
            Topology::Periodic { period } => {
                if self.breakpoints.is_empty() {
                    return self.values[0];
                }
                let b0 = self.breakpoints[0];
                let xr = b0 + (x - b0).rem_euclid(period);
                let idx = self.breakpoints.partition_point(|&b| b <= xr);
                if idx >= self.breakpoints.len() {
                    self.values[0]
                } else {
                    self.values[idx]
                }
            }
        }
    }

    /// Bounded cells as `(left, right, value)`, ordered in space. On a circle
    /// the wrapping cell comes first and starts at `b_{n-1} - period`.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        match self.topology {
            Topology::Line => self
                .breakpoints
                .windows(2)
                .zip(&self.values[1..])
                .map(|(w, &v)| (w[0], w[1], v))
                .collect(),
            Topology::Periodic { period } => {
                let n = self.breakpoints.len();
                if n == 0 {
                    return vec![(0.0, period, self.values[0])];
                }
                let mut out = Vec::with_capacity(n);
                out.push((self.breakpoints[n - 1] - period, self.breakpoints[0], self.values[0]));
                for k in 1..n {
                    out.push((self.breakpoints[k - 1], self.breakpoints[k], self.values[k]));
                }
                out
            }
        }
    }

    /// Jumps as `(position, u_left, u_right)`.
    pub fn jumps(&self) -> Vec<(f64, f64, f64)> {
        let n = self.breakpoints.len();
        match self.topology {
            Topology::Line => (0..n)
                .map(|k| (self.breakpoints[k], self.values[k], self.values[k + 1]))
                .collect(),
            Topology::Periodic { .. } => (0..n)
                .map(|k| (self.breakpoints[k], self.values[k], self.values[(k + 1) % n]))
                .collect(),
        }
    }

    pub fn tot_var(&self) -> f64 {
        self.jumps().iter().map(|&(_, a, b)| (b - a).abs()).sum()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ u` over the bounded cells (one period on a circle). On the line the
    /// unbounded cells are ignored, so this is the mass only when they vanish.
    pub fn integral(&self) -> f64 {
        self.cells().iter().map(|&(a, b, v)| (b - a) * v).sum()
    }

    /// `∫ |u|` over the bounded cells; infinite on the line when an end
    /// state is non-zero.
    pub fn l1_norm(&self) -> f64 {
        if self.topology == Topology::Line
            && (self.values[0] != 0.0 || *self.values.last().unwrap() != 0.0)
        {
            return f64::INFINITY;
        }
        self.cells().iter().map(|&(a, b, v)| (b - a) * v.abs()).sum()
    }

    /// Mean over one period.
    pub fn mean(&self) -> Option<f64> {
        self.period().map(|p| self.integral() / p)
    }

    /// Smallest interval containing every point where `u != 0` (line only).
    pub fn support(&self) -> Option<(f64, f64)> {
        if self.topology != Topology::Line || self.breakpoints.is_empty() {
            return None;
        }
        Some((self.breakpoints[0], *self.breakpoints.last().unwrap()))
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.topology == Topology::Line && self.values[0] == 0.0 && *self.values.last().unwrap() == 0.0
    }

    /// Applies `f` to every value and re-merges equal neighbours.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::normalized(
            self.topology,
            self.breakpoints.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
            0.0,
        )
    }

    /// Affine change of the space variable `x -> (x + shift) * scale`.
    pub fn transform_x(&self, shift: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidProfile("scale must be positive".into()));
        }
        let topology = match self.topology {
            Topology::Line => Topology::Line,
            Topology::Periodic { period } => Topology::Periodic { period: period * scale },
        };
        Self::new(
            topology,
            self.breakpoints.iter().map(|&b| (b + shift) * scale).collect(),
            self.values.clone(),
        )
    }

    /// Pointwise `h(self, other)` on the union of both breakpoint sets.
    pub fn combine(&self, other: &Profile, h: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let at = |x: f64| h(self.value_at(x), other.value_at(x));
        match (self.topology, other.topology) {
            (Topology::Line, Topology::Line) => {
                let grid = self.merged_grid(other, 0.0);
                let mut values = Vec::with_capacity(grid.len() + 1);
                values.push(h(self.values[0], other.values[0]));
                values.extend(grid.windows(2).map(|w| at(0.5 * (w[0] + w[1]))));
                values.push(h(*self.values.last().unwrap(), *other.values.last().unwrap()));
                Self::normalized(Topology::Line, grid, values, 0.0)
            }
            (Topology::Periodic { period: p }, Topology::Periodic { period: q }) if p == q => {
                let x0 = self.breakpoints.first().or(other.breakpoints.first()).copied().unwrap_or(0.0);
                let grid = self.merged_grid(other, x0);
                if grid.is_empty() {
                    return Ok(Self::constant(self.topology, h(self.values[0], other.values[0])));
                }
                let last = *grid.last().unwrap() - p;
                let mut values = vec![at(0.5 * (last + grid[0]))];
                values.extend(grid.windows(2).map(|w| at(0.5 * (w[0] + w[1]))));
                Self::normalized(self.topology, grid, values, 0.0)
            }
            (a, b) => Err(Error::TopologyMismatch(format!("{a:?} vs {b:?}"))),
        }
    }

    /// Sorted union of the breakpoints of both profiles (periodic inputs are
    /// first reduced to `[x0, x0 + period)`).
    pub(crate) fn merged_grid(&self, other: &Profile, x0: f64) -> Vec<f64> {
        let reduce = |b: f64| match self.topology {
            Topology::Periodic { period } => x0 + (b - x0).rem_euclid(period),
            Topology::Line => b,
        };
        let mut grid: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .map(|&b| reduce(b))
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_adds_pointwise() {
        let a = Profile::periodic(1.0, vec![0.0, 0.5], vec![0.0, 1.0]).unwrap();
        let b = Profile::periodic(1.0, vec![0.25, 0.75], vec![0.0, 2.0]).unwrap();
        let s = a.combine(&b, |x, y| x + y).unwrap();
        for x in [0.1, 0.3, 0.6, 0.8, 0.95] {
            assert_eq!(s.value_at(x), a.value_at(x) + b.value_at(x));
        }
        let l = Profile::line_from_blocks(&[(0.0, 1.0, 1.0)]).unwrap();
        let d = l.combine(&l, |x, y| x - y).unwrap();
        assert!(d.is_constant());
        assert!(matches!(a.combine(&l, |x, _| x), Err(Error::TopologyMismatch(_))));
    }

    #[test]
    fn line_square_wave() {
        let p = Profile::line_from_blocks(&[(0.0, 1.0, 1.0)]).unwrap();
        assert_eq!(p.breakpoints(), &[0.0, 1.0]);
        assert_eq!(p.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(p.value_at(-0.5), 0.0);
        assert_eq!(p.value_at(0.0), 1.0);
        assert_eq!(p.value_at(1.0), 0.0);
        assert_eq!(p.tot_var(), 2.0);
        assert_eq!(p.l1_norm(), 1.0);
        assert_eq!(p.support(), Some((0.0, 1.0)));
    }

    #[test]
    fn adjacent_blocks_share_breakpoint() {
        let p = Profile::line_from_blocks(&[(0.0, 1.0, 1.0), (1.0, 2.0, -1.0)]).unwrap();
        assert_eq!(p.breakpoints(), &[0.0, 1.0, 2.0]);
        assert_eq!(p.values(), &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(p.integral(), 0.0);
    }

    #[test]
    fn periodic_layout_and_evaluation() {
        let p = Profile::periodic(1.0, vec![0.0, 0.5], vec![0.0, 1.0]).unwrap();
        assert_eq!(p.value_at(0.25), 1.0);
        assert_eq!(p.value_at(0.75), 0.0);
        assert_eq!(p.value_at(1.25), 1.0);
        assert_eq!(p.value_at(-0.25), 0.0);
        assert_eq!(p.tot_var(), 2.0);
        assert_eq!(p.mean(), Some(0.5));
        assert_eq!(p.cells(), vec![(-0.5, 0.0, 0.0), (0.0, 0.5, 1.0)]);
    }

    #[test]
    fn normalization_merges_equal_neighbours() {
        let p = Profile::normalized(Topology::Line, vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0, 0.0], 0.0).unwrap();
        assert_eq!(p.breakpoints(), &[0.0, 2.0]);
        let q = Profile::normalized(
            Topology::Periodic { period: 1.0 },
            vec![0.1, 0.4, 0.7],
            vec![2.0, 1.0, 2.0],
            0.0,
        )
        .unwrap();
        // cells: (0.7-1, 0.1) -> 2, (0.1, 0.4) -> 1, (0.4, 0.7) -> 2
        assert_eq!(q.breakpoints(), &[0.1, 0.4]);
        assert_eq!(q.value_at(0.2), 1.0);
        assert_eq!(q.value_at(0.5), 2.0);
        assert_eq!(q.value_at(0.05), 2.0);
        let c = Profile::normalized(Topology::Periodic { period: 1.0 }, vec![0.1, 0.4], vec![3.0, 3.0], 0.0).unwrap();
        assert!(c.is_constant());
        assert_eq!(c.values(), &[3.0]);
    }

    #[test]
    fn normalization_collapses_zero_width_cells() {
        let p = Profile::normalized(Topology::Line, vec![0.0, 1.0, 1.0], vec![0.0, 2.0, 5.0, 0.0], 0.0).unwrap();
        assert_eq!(p.breakpoints(), &[0.0, 1.0]);
        assert_eq!(p.values(), &[0.0, 2.0, 0.0]);
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert!(Profile::line(vec![1.0, 0.0], vec![0.0, 1.0, 0.0]).is_err());
        assert!(Profile::line(vec![0.0], vec![0.0]).is_err());
        assert!(Profile::periodic(1.0, vec![0.0, 1.5], vec![0.0, 1.0]).is_err());
        assert!(Profile::periodic(1.0, vec![0.0], vec![1.0]).is_err());
        assert!(Profile::line(vec![0.0], vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn unbounded_line_mass() {
        let p = Profile::line(vec![0.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(p.l1_norm(), f64::INFINITY);
        assert!(!p.is_compactly_supported());
    }
}
