//! Parameter grids and their parallel evaluation.

use rayon::prelude::*;

use crate::config::AxisSettings;
use crate::error::{CliError, Result};

/// Largest grid accepted.
pub const MAX_CELLS: usize = 10_000;

/// Linearly spaced axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, a: AxisSettings) -> Self {
        Self {
            name: name.into(),
            start: a.start,
            stop: a.stop,
            points: a.points,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

/// Cartesian product of axes, first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
}

impl SweepGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        for a in &axes {
            if a.points < 2 {
                return Err(CliError::Config(format!(
                    "axis {} needs at least 2 points, got {}",
                    a.name, a.points
                )));
            }
            if !(a.start.is_finite() && a.stop.is_finite()) {
                return Err(CliError::Config(format!("axis {} has a non-finite bound", a.name)));
            }
        }
        let cells = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.points));
        match cells {
            Some(c) if c <= MAX_CELLS => Ok(Self { axes }),
            _ => Err(CliError::Config(format!("grid exceeds {MAX_CELLS} cells"))),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of every cell in grid order.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        (0..self.len())
            .map(|mut idx| {
                let mut coords = vec![0.0; self.axes.len()];
                for (d, vals) in values.iter().enumerate().rev() {
                    coords[d] = vals[idx % vals.len()];
                    idx /= vals.len();
                }
                coords
            })
            .collect()
    }
}

/// Thread pool with `threads` workers, or rayon's default when `None`.
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))
}

/// Evaluates `f` on every item in parallel; results keep the input order and
/// the first failing item (by index) wins.
pub fn run_ordered<I, T, F>(pool: &rayon::ThreadPool, items: &[I], f: F) -> Result<Vec<T>>
where
    I: Sync,
    T: Send,
    F: Fn(usize, &I) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = pool.install(|| items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect());
    results.into_iter().collect()
}
