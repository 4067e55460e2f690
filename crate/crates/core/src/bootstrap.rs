//! Lifting a solved base problem to a larger one.
//!
//! Given a global minimizer `q*` of `int f1`, the augmented integrand
//! `f2 = f1 + 1/2 |thetadot - A(q) qdot|_W^2` is globally minimized by `q*`
//! together with `theta* = b + int A(q*) qdot*`: the add-on term vanishes on
//! it and cannot be negative. With two boundary values on `theta` a constant
//! drift `a` is also allowed, which stays optimal when `A` is constant or `q`
//! is scalar.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::metric::{check_spd, Metric, Trajectory};
use crate::numeric;

/// Which structural case a coupling falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    Zero,
    Constant,
    /// `dim q = 1`, `A(q)` a single column.
    SingleColumn,
    General,
}

type CouplingFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// `q -> A(q)`, a `dim(theta) x dim(q)` matrix.
#[derive(Clone)]
pub struct CouplingMap {
    theta_dim: usize,
    q_dim: usize,
    kind: CouplingKind,
    rule: Arc<CouplingFn>,
}

impl fmt::Debug for CouplingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingMap")
            .field("theta_dim", &self.theta_dim)
            .field("q_dim", &self.q_dim)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl CouplingMap {
    pub fn zero(theta_dim: usize, q_dim: usize) -> Self {
        Self {
            theta_dim,
            q_dim,
            kind: CouplingKind::Zero,
            rule: Arc::new(move |_| DMatrix::zeros(theta_dim, q_dim)),
        }
    }

    pub fn constant(a0: DMatrix<f64>) -> Self {
        Self {
            theta_dim: a0.nrows(),
            q_dim: a0.ncols(),
            kind: CouplingKind::Constant,
            rule: Arc::new(move |_| a0.clone()),
        }
    }

    /// Scalar base coordinate with column `a1(q)` of length `theta_dim`.
    pub fn single_column<F>(theta_dim: usize, a1: F) -> Self
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            theta_dim,
            q_dim: 1,
            kind: CouplingKind::SingleColumn,
            rule: Arc::new(move |q| DMatrix::from_column_slice(theta_dim, 1, a1(q[0]).as_slice())),
        }
    }

    pub fn general<F>(theta_dim: usize, q_dim: usize, rule: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            theta_dim,
            q_dim,
            kind: CouplingKind::General,
            rule: Arc::new(rule),
        }
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn theta_dim(&self) -> usize {
        self.theta_dim
    }

    pub fn q_dim(&self) -> usize {
        self.q_dim
    }

    /// `A(q)` with its shape checked.
    pub fn eval(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        if q.len() != self.q_dim {
            return Err(Error::InvalidCoupling(format!(
                "coupling expects dim q = {}, got {}",
                self.q_dim,
                q.len()
            )));
        }
        let a = (self.rule)(q);
        if a.nrows() != self.theta_dim || a.ncols() != self.q_dim {
            return Err(Error::InvalidCoupling(format!(
                "coupling returned {}x{}, expected {}x{}",
                a.nrows(),
                a.ncols(),
                self.theta_dim,
                self.q_dim
            )));
        }
        Ok(a)
    }
}

/// Symmetric positive definite weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        check_spd(&w, 1e-12).map_err(Error::InvalidWeight)?;
        Ok(Self(w))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn scalar(n: usize, w: f64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n) * w)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `1/2 v^T W v`.
    pub fn half_norm_squared(&self, v: &DVector<f64>) -> f64 {
        0.5 * v.dot(&(&self.0 * v))
    }
}

/// Base trajectory with the lifted fibre coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTrajectory {
    pub t: Vec<f64>,
    pub q: Vec<DVector<f64>>,
    pub qdot: Vec<DVector<f64>>,
    pub theta: Vec<DVector<f64>>,
    pub thetadot: Vec<DVector<f64>>,
}

impl AugmentedTrajectory {
    pub fn new(base: &Trajectory, theta: Vec<DVector<f64>>, thetadot: Vec<DVector<f64>>) -> Result<Self> {
        if theta.len() != base.len() || thetadot.len() != base.len() {
            return Err(Error::InvalidInput("fibre samples do not match the base grid".into()));
        }
        if theta.iter().chain(&thetadot).any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("fibre samples not finite".into()));
        }
        Ok(Self {
            t: base.t.clone(),
            q: base.q.clone(),
            qdot: base.qdot.clone(),
            theta,
            thetadot,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn base(&self) -> Trajectory {
        Trajectory {
            t: self.t.clone(),
            q: self.q.clone(),
            qdot: self.qdot.clone(),
        }
    }

    /// `[q; theta]` as a trajectory, the base of a further lift.
    pub fn stacked(&self) -> Trajectory {
        let join = |a: &DVector<f64>, b: &DVector<f64>| {
            DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).cloned())
        };
        Trajectory {
            t: self.t.clone(),
            q: self.q.iter().zip(&self.theta).map(|(a, b)| join(a, b)).collect(),
            qdot: self.qdot.iter().zip(&self.thetadot).map(|(a, b)| join(a, b)).collect(),
        }
    }

    /// `thetadot - A(q) qdot` at each sample.
    pub fn residual(&self, a: &CouplingMap) -> Result<Vec<DVector<f64>>> {
        (0..self.len())
            .map(|i| Ok(&self.thetadot[i] - a.eval(&self.q[i])? * &self.qdot[i]))
            .collect()
    }
}

fn coupled_rates(qstar: &Trajectory, a: &CouplingMap) -> Result<Vec<DVector<f64>>> {
    if qstar.dim() != a.q_dim() {
        return Err(Error::InvalidCoupling(format!(
            "coupling has dim q = {}, trajectory has {}",
            a.q_dim(),
            qstar.dim()
        )));
    }
    (0..qstar.len())
        .map(|i| Ok(a.eval(&qstar.q[i])? * &qstar.qdot[i]))
        .collect()
}

/// Componentwise cumulative trapezoid of vector samples.
fn cumulative(t: &[f64], v: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let d = v[0].len();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|c| numeric::cumulative_trapezoid(t, &v.iter().map(|x| x[c]).collect::<Vec<_>>()))
        .collect();
    (0..t.len())
        .map(|i| DVector::from_iterator(d, cols.iter().map(|c| c[i])))
        .collect()
}

/// `theta*(t) = b + int_0^t A(q*) qdot* ds`; the add-on term is identically zero.
pub fn lift_theta(qstar: &Trajectory, a: &CouplingMap, b: &DVector<f64>) -> Result<AugmentedTrajectory> {
    if b.len() != a.theta_dim() {
        return Err(Error::InvalidCoupling(format!(
            "initial value has length {}, coupling has dim theta = {}",
            b.len(),
            a.theta_dim()
        )));
    }
    let rates = coupled_rates(qstar, a)?;
    let theta = cumulative(&qstar.t, &rates).into_iter().map(|v| v + b).collect();
    AugmentedTrajectory::new(qstar, theta, rates)
}

/// Two-point lift `theta*(t) = theta0 + a (t - t0) + int_0^t A(q*) qdot*`
/// with `a` chosen so `theta*(t1) = theta1`. Optimal for constant and
/// single-column couplings only; other general couplings are refused.
pub fn lift_theta_bvp(
    qstar: &Trajectory,
    a: &CouplingMap,
    theta0: &DVector<f64>,
    theta1: &DVector<f64>,
) -> Result<AugmentedTrajectory> {
    if a.kind() == CouplingKind::General && a.q_dim() > 1 {
        return Err(Error::UnsupportedCase(
            "two-point lift with a general coupling and dim q > 1".into(),
        ));
    }
    if theta0.len() != a.theta_dim() || theta1.len() != a.theta_dim() {
        return Err(Error::InvalidCoupling("boundary values do not match dim theta".into()));
    }
    let rates = coupled_rates(qstar, a)?;
    let integral = cumulative(&qstar.t, &rates);
    let n = qstar.len();
    let t0 = qstar.t[0];
    let drift = (theta1 - theta0 - &integral[n - 1]) / qstar.duration();
    let mut theta: Vec<DVector<f64>> = integral
        .iter()
        .zip(&qstar.t)
        .map(|(i, &t)| theta0 + &drift * (t - t0) + i)
        .collect();
    theta[0] = theta0.clone();
    theta[n - 1] = theta1.clone();
    let thetadot = rates.into_iter().map(|r| r + &drift).collect();
    AugmentedTrajectory::new(qstar, theta, thetadot)
}

/// `[[M + A^T W A, -A^T W], [-W A, W]]`, the metric whose kinetic energy is
/// `1/2 qdot^T M qdot + 1/2 |thetadot - A qdot|_W^2`.
#[derive(Clone)]
pub struct CompositeMetric {
    base: Arc<dyn Metric>,
    coupling: CouplingMap,
    weight: WeightMatrix,
}

impl fmt::Debug for CompositeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeMetric")
            .field("q_dim", &self.coupling.q_dim())
            .field("theta_dim", &self.coupling.theta_dim())
            .finish_non_exhaustive()
    }
}

pub fn composite_metric(base: Arc<dyn Metric>, a: CouplingMap, w: WeightMatrix) -> Result<CompositeMetric> {
    if base.dim() != a.q_dim() {
        return Err(Error::InvalidCoupling(format!(
            "base metric has dim {}, coupling expects {}",
            base.dim(),
            a.q_dim()
        )));
    }
    if w.dim() != a.theta_dim() {
        return Err(Error::InvalidWeight(format!(
            "weight is {}x{}, coupling has dim theta = {}",
            w.dim(),
            w.dim(),
            a.theta_dim()
        )));
    }
    Ok(CompositeMetric {
        base,
        coupling: a,
        weight: w,
    })
}

impl CompositeMetric {
    pub fn q_dim(&self) -> usize {
        self.coupling.q_dim()
    }

    pub fn theta_dim(&self) -> usize {
        self.coupling.theta_dim()
    }
}

impl Metric for CompositeMetric {
    fn dim(&self) -> usize {
        self.q_dim() + self.theta_dim()
    }

    fn matrix(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let (nq, nt) = (self.q_dim(), self.theta_dim());
        let q = v.rows(0, nq).into_owned();
        let m = self.base.matrix(&q);
        let a = (self.coupling.rule)(&q);
        let w = self.weight.matrix();
        let wa = w * &a;
        let mut out = DMatrix::zeros(nq + nt, nq + nt);
        out.view_mut((0, 0), (nq, nq)).copy_from(&(m + a.transpose() * &wa));
        out.view_mut((0, nq), (nq, nt)).copy_from(&(-wa.transpose()));
        out.view_mut((nq, 0), (nt, nq)).copy_from(&(-&wa));
        out.view_mut((nq, nq), (nt, nt)).copy_from(w);
        out
    }
}

/// Simpson integral of `f1(q, qdot, t) + 1/2 |thetadot - A qdot|_W^2`.
pub fn augmented_cost<F>(f1: F, traj: &AugmentedTrajectory, a: &CouplingMap, w: &WeightMatrix) -> Result<f64>
where
    F: Fn(&DVector<f64>, &DVector<f64>, f64) -> f64,
{
    let residual = traj.residual(a)?;
    let vals: Vec<f64> = (0..traj.len())
        .map(|i| f1(&traj.q[i], &traj.qdot[i], traj.t[i]) + w.half_norm_squared(&residual[i]))
        .collect();
    Ok(numeric::simpson(&traj.t, &vals))
}

/// Simpson integral of the add-on term alone.
pub fn addon_cost(traj: &AugmentedTrajectory, a: &CouplingMap, w: &WeightMatrix) -> Result<f64> {
    augmented_cost(|_, _, _| 0.0, traj, a, w)
}
