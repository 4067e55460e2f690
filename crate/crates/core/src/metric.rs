//! Metric tensors `q -> M(q)` and sampled trajectories in coordinates.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric;

/// A rule assigning a symmetric positive definite matrix to each point.
pub trait Metric: Send + Sync {
    fn dim(&self) -> usize;
    fn matrix(&self, q: &DVector<f64>) -> DMatrix<f64>;

    /// `M(q)` with symmetry and positive definiteness checked.
    fn checked_matrix(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        let m = self.matrix(q);
        check_spd(&m, 1e-12).map_err(Error::InvalidMetric)?;
        Ok(m)
    }
}

/// Returns a description of the defect when `m` is not SPD.
pub fn check_spd(m: &DMatrix<f64>, sym_tol: f64) -> std::result::Result<(), String> {
    if !m.is_square() {
        return Err(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err("matrix has non-finite entries".into());
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > sym_tol * scale {
        return Err(format!("matrix not symmetric (max asymmetry {asym:e})"));
    }
    if m.clone().cholesky().is_none() {
        return Err("matrix not positive definite".into());
    }
    Ok(())
}

/// `T = 1/2 qdot^T M(q) qdot`.
pub fn kinetic_energy(metric: &dyn Metric, q: &DVector<f64>, qdot: &DVector<f64>) -> f64 {
    0.5 * qdot.dot(&(metric.matrix(q) * qdot))
}

#[derive(Debug, Clone, Copy)]
pub struct Euclidean {
    pub dim: usize,
}

impl Metric for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }
    fn matrix(&self, _q: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }
}

/// Poincare half-space metric `(x . e_N)^-2 I`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSpace {
    pub dim: usize,
}

impl Metric for HalfSpace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn matrix(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let h = q[self.dim - 1];
        DMatrix::identity(self.dim, self.dim) / (h * h)
    }
}

#[derive(Debug, Clone)]
pub struct ConstantMetric(pub DMatrix<f64>);

impl Metric for ConstantMetric {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn matrix(&self, _q: &DVector<f64>) -> DMatrix<f64> {
        self.0.clone()
    }
}

type MetricFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Metric given by a closure.
#[derive(Clone)]
pub struct FnMetric {
    dim: usize,
    rule: Arc<MetricFn>,
}

impl FnMetric {
    pub fn new<F>(dim: usize, rule: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            rule: Arc::new(rule),
        }
    }
}

impl Metric for FnMetric {
    fn dim(&self) -> usize {
        self.dim
    }
    fn matrix(&self, q: &DVector<f64>) -> DMatrix<f64> {
        (self.rule)(q)
    }
}

/// Sampled coordinate trajectory `q(t)` together with its rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub q: Vec<DVector<f64>>,
    pub qdot: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn new(t: Vec<f64>, q: Vec<DVector<f64>>, qdot: Vec<DVector<f64>>) -> Result<Self> {
        numeric::check_grid(&t)?;
        if q.len() != t.len() || qdot.len() != t.len() {
            return Err(Error::InvalidInput(format!(
                "trajectory lengths differ: t {}, q {}, qdot {}",
                t.len(),
                q.len(),
                qdot.len()
            )));
        }
        let d = q[0].len();
        if q.iter().chain(qdot.iter()).any(|v| v.len() != d) {
            return Err(Error::InvalidInput("trajectory dimension not constant".into()));
        }
        if q.iter()
            .chain(qdot.iter())
            .any(|v| v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidInput("trajectory has non-finite samples".into()));
        }
        Ok(Self { t, q, qdot })
    }

    /// Rates estimated by second-order finite differences.
    pub fn from_samples(t: Vec<f64>, q: Vec<DVector<f64>>) -> Result<Self> {
        numeric::check_grid(&t)?;
        if q.len() != t.len() || t.len() < 3 {
            return Err(Error::InvalidInput(
                "trajectory needs at least 3 samples matching the grid".into(),
            ));
        }
        let qdot = numeric::derivative(&t, &q);
        Self::new(t, q, qdot)
    }

    /// Samples `path(t) -> (q, qdot)` on a uniform grid.
    pub fn sample<F>(t0: f64, t1: f64, n_intervals: usize, path: F) -> Result<Self>
    where
        F: Fn(f64) -> (DVector<f64>, DVector<f64>),
    {
        let t = numeric::uniform_grid(t0, t1, n_intervals);
        let (q, qdot) = t.iter().map(|&s| path(s)).unzip();
        Self::new(t, q, qdot)
    }

    pub fn dim(&self) -> usize {
        self.q[0].len()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    /// Simpson integral of `f(q, qdot)` along the samples.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&DVector<f64>, &DVector<f64>) -> f64,
    {
        let v: Vec<f64> = self
            .q
            .iter()
            .zip(self.qdot.iter())
            .map(|(q, qd)| f(q, qd))
            .collect();
        numeric::simpson(&self.t, &v)
    }
}
