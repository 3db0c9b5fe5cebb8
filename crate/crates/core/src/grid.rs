//! Rectangular cell-centred grids, fields on them and time-stamped trajectories.

use crate::error::{Error, Result};

/// One coordinate direction `[lo, hi]` split into `cells` equal cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::domain(format!("axis needs lo < hi, got [{lo}, {hi}]")));
        }
        if cells < 4 {
            return Err(Error::domain(format!("axis needs at least 4 cells, got {cells}")));
        }
        Ok(Axis { lo, hi, cells })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A 1D or 2D tensor grid. Cell `(i, j)` is stored at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::domain(format!("grids are 1D or 2D, got {} axes", axes.len())));
        }
        for a in &axes {
            Axis::new(a.lo, a.hi, a.cells)?;
        }
        Ok(Grid { axes })
    }

    pub fn line(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        Grid::new(vec![Axis::new(lo, hi, cells)?])
    }

    pub fn rect(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        Grid::new(vec![Axis::new(x.0, x.1, nx)?, Axis::new(y.0, y.1, ny)?])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn h(&self, k: usize) -> f64 {
        self.axes[k].h()
    }

    /// Largest cell width.
    pub fn h_max(&self) -> f64 {
        self.axes.iter().map(Axis::h).fold(0.0, f64::max)
    }

    /// `(nx, ny)` with `ny = 1` in 1D.
    pub fn shape(&self) -> (usize, usize) {
        let nx = self.axes[0].cells;
        let ny = self.axes.get(1).map_or(1, |a| a.cells);
        (nx, ny)
    }

    pub fn len(&self) -> usize {
        let (nx, ny) = self.shape();
        nx * ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::h).product()
    }

    /// Lebesgue measure of the whole domain.
    pub fn measure(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.axes[0].cells + i
    }

    pub fn unravel(&self, idx: usize) -> (usize, usize) {
        let nx = self.axes[0].cells;
        (idx % nx, idx / nx)
    }

    /// Cell centre, padded with zero in 1D.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.unravel(idx);
        let x = self.axes[0].center(i);
        let y = self.axes.get(1).map_or(0.0, |a| a.center(j));
        [x, y]
    }

    /// True if the closed ball `B_r(x)` lies inside the domain.
    pub fn contains_ball(&self, x: &[f64], r: f64) -> bool {
        self.axes
            .iter()
            .enumerate()
            .all(|(k, a)| x[k] - r >= a.lo - 1e-12 && x[k] + r <= a.hi + 1e-12)
    }

    /// Distance from `x` to the domain boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| (x[k] - a.lo).min(a.hi - x[k]))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let values = vec![value; grid.len()];
        Field { grid, values }
    }

    /// Sample `f` at cell centres; the slice has `dim` entries.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|idx| f(&grid.center(idx)[..dim]))
            .collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Errors unless every value is finite and in `[0, 1)`.
    pub fn check_unit_range(&self) -> Result<()> {
        for (idx, &v) in self.values.iter().enumerate() {
            if !(v >= 0.0 && v < 1.0) {
                return Err(Error::domain(format!("value {v} at cell {idx} outside [0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMonitor {
    pub steps: usize,
    pub newton_iterations: usize,
    pub max_newton_iterations: usize,
    /// Steps whose accepted state touched the upper clipping bound.
    pub upper_clip_steps: usize,
    /// Steps that needed the halved-step retry.
    pub retries: usize,
}

impl RunMonitor {
    pub fn clip_was_active(&self) -> bool {
        self.upper_clip_steps > 0
    }
}

/// Time-ordered snapshots on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    snapshots: Vec<Snapshot>,
    pub dt_history: Vec<f64>,
    pub monitor: RunMonitor,
}

impl Trajectory {
    pub fn new(snapshots: Vec<Snapshot>) -> Result<Self> {
        let Some(first) = snapshots.first() else {
            return Err(Error::domain("a trajectory needs at least one snapshot"));
        };
        let grid = first.field.grid().clone();
        for w in snapshots.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::domain("snapshot times must increase strictly"));
            }
        }
        if snapshots.iter().any(|s| *s.field.grid() != grid) {
            return Err(Error::domain("all snapshots must share one grid"));
        }
        Ok(Trajectory {
            snapshots,
            dt_history: Vec::new(),
            monitor: RunMonitor::default(),
        })
    }

    /// A time-independent field repeated at the given times.
    pub fn stationary(field: Field, times: &[f64]) -> Result<Self> {
        Trajectory::new(
            times
                .iter()
                .map(|&t| Snapshot {
                    t,
                    field: field.clone(),
                })
                .collect(),
        )
    }

    pub(crate) fn push(&mut self, t: f64, field: Field) {
        self.snapshots.push(Snapshot { t, field });
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].field.grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn t_start(&self) -> f64 {
        self.snapshots[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.snapshots[self.snapshots.len() - 1].t
    }

    pub fn first(&self) -> &Field {
        &self.snapshots[0].field
    }

    pub fn last(&self) -> &Field {
        &self.snapshots[self.snapshots.len() - 1].field
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Snapshot closest in time to `t`.
    pub fn nearest(&self, t: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .unwrap()
    }
}
