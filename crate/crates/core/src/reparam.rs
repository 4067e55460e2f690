//! Globally optimal 1D reparametrization.
//!
//! Minimizes `J(y) = int_0^1 m(y) y'^2 dx` over increasing bijections of
//! `[0, 1]`. Along the minimizer `sqrt(m(y)) y' = c1`, so with
//! `F(y) = int_0^y sqrt(m)` the optimum is `y*(x) = F^-1(F(1) x)` and its cost
//! `F(1)^2` does not depend on anything but `m`. Cauchy-Schwarz on
//! `int sqrt(m(y)) y' dx = F(1)` shows every other admissible map costs more.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numeric::{self, CubicSpline, MonotoneCubic};

type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum DensityRule {
    Closed(Arc<DensityFn>),
    Tabulated(MonotoneCubic),
}

/// Positive weight `m: [0, 1] -> (0, inf)`.
#[derive(Clone)]
pub struct ScalarDensity {
    name: String,
    rule: DensityRule,
}

impl fmt::Debug for ScalarDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarDensity")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// Names accepted by [`ScalarDensity::builtin`].
pub const BUILTIN_DENSITIES: &[&str] = &["one", "four", "quadratic", "exp", "bump", "ramp"];

impl ScalarDensity {
    pub fn closed<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rule: DensityRule::Closed(Arc::new(f)),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::closed(format!("constant({c})"), move |_| c)
    }

    /// Monotone cubic interpolation of samples `(s_i, m_i)` spanning `[0, 1]`.
    pub fn tabulated(s: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        for (&si, &mi) in s.iter().zip(m.iter()) {
            if !(mi > 0.0) || !mi.is_finite() {
                return Err(Error::InvalidDensity { at: si, value: mi });
            }
        }
        if s.first().copied() != Some(0.0) || s.last().copied() != Some(1.0) {
            return Err(Error::InvalidInput(
                "tabulated density must span exactly [0, 1]".into(),
            ));
        }
        Ok(Self {
            name: "tabulated".into(),
            rule: DensityRule::Tabulated(MonotoneCubic::new(s, m)?),
        })
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let d = match name {
            "one" => Self::closed("one", |_| 1.0),
            "four" => Self::closed("four", |_| 4.0),
            "quadratic" => Self::closed("quadratic", |y| (1.0 + y) * (1.0 + y)),
            "exp" => Self::closed("exp", |y| (2.0 * y).exp()),
            "bump" => Self::closed("bump", |y| {
                let z = (y - 0.5) / 0.15;
                1.0 + 4.0 * (-z * z).exp()
            }),
            "ramp" => Self::closed("ramp", |y| 0.1 + y),
            _ => return None,
        };
        Some(d)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.rule {
            DensityRule::Closed(f) => f(s),
            DensityRule::Tabulated(p) => p.eval(s),
        }
    }

    fn checked_sqrt(&self, s: f64) -> Result<f64> {
        let v = self.eval(s);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidDensity { at: s, value: v });
        }
        Ok(v.sqrt())
    }
}

const ANTIDERIVATIVE_CELLS: usize = 1024;

/// `F(y) = int_0^y sqrt(m(u)) du`, tabulated at cell edges with an 8-point
/// Gauss rule per cell and refined inside a cell on demand.
struct RootAntiderivative<'a> {
    density: &'a ScalarDensity,
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl<'a> RootAntiderivative<'a> {
    fn new(density: &'a ScalarDensity) -> Result<Self> {
        let edges = numeric::uniform_grid(0.0, 1.0, ANTIDERIVATIVE_CELLS);
        // Positivity pass over edges and quadrature nodes before integrating.
        for w in edges.windows(2) {
            density.checked_sqrt(w[0])?;
            density.checked_sqrt(0.5 * (w[0] + w[1]))?;
        }
        density.checked_sqrt(1.0)?;
        let mut values = Vec::with_capacity(edges.len());
        values.push(0.0);
        let mut acc = 0.0;
        let failure = std::cell::RefCell::new(None);
        for w in edges.windows(2) {
            acc += numeric::gauss_legendre(
                |u| match density.checked_sqrt(u) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                },
                w[0],
                w[1],
            );
            values.push(acc);
        }
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(Self {
            density,
            edges,
            values,
        })
    }

    fn total(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    fn cell(&self, y: f64) -> usize {
        let k = self.edges.partition_point(|&e| e <= y);
        k.clamp(1, self.edges.len() - 1) - 1
    }

    fn eval(&self, y: f64) -> f64 {
        let k = self.cell(y);
        self.values[k]
            + numeric::gauss_legendre(|u| self.density.eval(u).sqrt(), self.edges[k], y)
    }

    /// Solves `F(y) = target` by safeguarded Newton inside the bracketing cell.
    fn invert(&self, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        if target >= self.total() {
            return 1.0;
        }
        let k = self.values.partition_point(|&v| v <= target).clamp(1, self.values.len() - 1) - 1;
        let (mut lo, mut hi) = (self.edges[k], self.edges[k + 1]);
        let (flo, fhi) = (self.values[k], self.values[k + 1]);
        let mut y = lo + (hi - lo) * (target - flo) / (fhi - flo);
        for _ in 0..100 {
            let f = self.eval(y) - target;
            if f.abs() <= 1e-15 * self.total().max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let slope = self.density.eval(y).sqrt();
            let mut next = y - f / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 1e-16 {
                y = next;
                break;
            }
            y = next;
        }
        y
    }
}

/// Strictly increasing bijection of `[0, 1]` sampled on a grid.
#[derive(Debug, Clone)]
pub struct MonotoneMap {
    x: Vec<f64>,
    y: Vec<f64>,
    interp: MonotoneCubic,
}

impl PartialEq for MonotoneMap {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x && self.y == other.y
    }
}

impl MonotoneMap {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::InvalidInput(
                "monotone map needs at least two (x, y) pairs".into(),
            ));
        }
        for (name, v) in [("x", &x), ("y", &y)] {
            if (v[0]).abs() > 1e-12 || (v[v.len() - 1] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "monotone map {name} must run from 0 to 1"
                )));
            }
            if let Some(i) = v.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidInput(format!(
                    "monotone map {name} not strictly increasing at index {}",
                    i + 1
                )));
            }
        }
        let interp = MonotoneCubic::new(x.clone(), y.clone())?;
        Ok(Self { x, y, interp })
    }

    pub fn identity(k: usize) -> Self {
        let g = numeric::uniform_grid(0.0, 1.0, k);
        Self::new(g.clone(), g).expect("identity map is valid")
    }

    /// Samples a closed-form increasing map on a uniform grid.
    pub fn from_fn<F: Fn(f64) -> f64>(k: usize, f: F) -> Result<Self> {
        let x = numeric::uniform_grid(0.0, 1.0, k);
        let y = x.iter().map(|&v| f(v)).collect();
        Self::new(x, y)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Monotone cubic interpolation between samples.
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    /// Fourth-order finite-difference slopes `y'(x_i)`.
    pub fn slopes(&self) -> Vec<f64> {
        numeric::derivative5(&self.x, &self.y)
    }

    /// `(self o inner)(x) = self(inner(x))` on the grid of `inner`.
    pub fn compose(&self, inner: &MonotoneMap) -> Result<MonotoneMap> {
        let y = inner.y.iter().map(|&v| self.eval(v)).collect();
        MonotoneMap::new(inner.x.clone(), y)
    }

    pub fn inverse(&self) -> Result<MonotoneMap> {
        MonotoneMap::new(self.y.clone(), self.x.clone())
    }

    pub fn max_deviation_from_identity(&self) -> f64 {
        self.x
            .iter()
            .zip(self.y.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The global minimizer of `int m(y) y'^2` on a uniform grid with `k` intervals.
pub fn solve_reparam(m: &ScalarDensity, k: usize) -> Result<MonotoneMap> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("grid size must be >= 2, got {k}")));
    }
    let f = RootAntiderivative::new(m)?;
    let total = f.total();
    let x = numeric::uniform_grid(0.0, 1.0, k);
    let mut y: Vec<f64> = x.iter().map(|&xi| f.invert(total * xi)).collect();
    y[0] = 0.0;
    y[k] = 1.0;
    MonotoneMap::new(x, y)
}

/// `(int_0^1 sqrt(m))^2`, the minimal value of the functional.
pub fn optimal_cost(m: &ScalarDensity) -> Result<f64> {
    let f = RootAntiderivative::new(m)?;
    Ok(f.total() * f.total())
}

/// Composite Simpson value of `int m(y) y'^2 dx` on the map's grid.
pub fn path_cost(m: &ScalarDensity, map: &MonotoneMap) -> f64 {
    let slopes = map.slopes();
    let integrand: Vec<f64> = map
        .y
        .iter()
        .zip(slopes.iter())
        .map(|(&y, &d)| m.eval(y) * d * d)
        .collect();
    numeric::simpson(&map.x, &integrand)
}

/// `sqrt(m(y(x))) y'(x)` at each grid point; constant along the optimum.
pub fn first_integral(m: &ScalarDensity, map: &MonotoneMap) -> Vec<f64> {
    map.y
        .iter()
        .zip(map.slopes())
        .map(|(&y, d)| m.eval(y).sqrt() * d)
        .collect()
}

/// Samples `X(t_i)` of a path in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub t: Vec<f64>,
    pub points: Vec<DVector<f64>>,
}

impl SampledPath {
    pub fn new(t: Vec<f64>, points: Vec<DVector<f64>>) -> Result<Self> {
        numeric::check_grid(&t)?;
        if points.len() != t.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} points",
                t.len(),
                points.len()
            )));
        }
        let d = points[0].len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput("points must share a dimension >= 1".into()));
        }
        Ok(Self { t, points })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `|dX/dt|` by finite differences.
    pub fn speeds(&self) -> Vec<f64> {
        numeric::derivative(&self.t, &self.points)
            .iter()
            .map(|v| v.norm())
            .collect()
    }

    /// Polyline length.
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (&w[1] - &w[0]).norm())
            .sum()
    }
}

/// Relative floor applied to `|X'|^2` before solving, as a fraction of its mean.
pub const WARP_REGULARIZATION: f64 = 1e-6;

/// Retimes a sampled path to constant speed with the optimal map for
/// `m(tau) = |X'(tau)|^2`, resampling it on a uniform grid over the same span.
pub fn warp_trajectory(path: &SampledPath) -> Result<(MonotoneMap, SampledPath)> {
    let n = path.len();
    if n < 3 {
        return Err(Error::InvalidInput("warping needs at least 3 samples".into()));
    }
    let t0 = path.t[0];
    let span = path.t[n - 1] - t0;
    let mut tau: Vec<f64> = path.t.iter().map(|&t| (t - t0) / span).collect();
    tau[n - 1] = 1.0;
    let scale = path.points.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let travel = path
        .points
        .iter()
        .map(|p| (p - &path.points[0]).amax())
        .fold(0.0, f64::max);
    if travel <= 1e-14 * scale {
        return Err(Error::DegeneratePath("path never moves".into()));
    }
    let velocity = numeric::derivative(&tau, &path.points);
    let mut m: Vec<f64> = velocity.iter().map(|v| v.norm_squared()).collect();
    let mean = numeric::simpson(&tau, &m);
    let peak = m.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) || !(mean > 0.0) {
        return Err(Error::DegeneratePath("path never moves".into()));
    }
    let floor = WARP_REGULARIZATION * mean;
    for v in m.iter_mut() {
        *v = v.max(floor);
    }
    let density = ScalarDensity::tabulated(tau.clone(), m)?;
    let map = solve_reparam(&density, n - 1)?;

    let splines: Vec<CubicSpline> = (0..path.dim())
        .map(|c| CubicSpline::new(tau.clone(), path.points.iter().map(|p| p[c]).collect()))
        .collect::<Result<_>>()?;
    let times = numeric::uniform_grid(t0, path.t[n - 1], n - 1);
    let points = map
        .y()
        .iter()
        .map(|&s| DVector::from_iterator(splines.len(), splines.iter().map(|sp| sp.eval(s))))
        .collect();
    Ok((map, SampledPath::new(times, points)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_density_gives_identity() {
        let m = ScalarDensity::builtin("one").unwrap();
        let map = solve_reparam(&m, 50).unwrap();
        assert!(map.max_deviation_from_identity() < 1e-14);
        assert_relative_eq!(optimal_cost(&m).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_density_scales_cost_only() {
        let m = ScalarDensity::builtin("four").unwrap();
        let map = solve_reparam(&m, 40).unwrap();
        assert!(map.max_deviation_from_identity() < 1e-14);
        assert_relative_eq!(path_cost(&m, &map), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_density_closed_form() {
        let m = ScalarDensity::builtin("quadratic").unwrap();
        let map = solve_reparam(&m, 200).unwrap();
        for (&x, &y) in map.x().iter().zip(map.y()) {
            assert_relative_eq!(y, (1.0 + 3.0 * x).sqrt() - 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(optimal_cost(&m).unwrap(), 2.25, epsilon = 1e-13);
    }

    #[test]
    fn path_cost_of_square_map() {
        let m = ScalarDensity::builtin("one").unwrap();
        let map = MonotoneMap::from_fn(100, |x| x * x).unwrap();
        assert_relative_eq!(path_cost(&m, &map), 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn non_positive_density_rejected() {
        let m = ScalarDensity::closed("neg", |y| y - 0.5);
        assert!(matches!(
            solve_reparam(&m, 10),
            Err(Error::InvalidDensity { .. })
        ));
        assert!(ScalarDensity::tabulated(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn grid_too_small() {
        let m = ScalarDensity::builtin("one").unwrap();
        assert!(solve_reparam(&m, 1).is_err());
    }

    #[test]
    fn map_validation() {
        assert!(MonotoneMap::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.9]).is_err());
        assert!(MonotoneMap::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.5]).is_err());
        let m = MonotoneMap::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.2, 1.0]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(inv.x(), &[0.0, 0.2, 1.0]);
    }

    #[test]
    fn stationary_path_is_degenerate() {
        let t = numeric::uniform_grid(0.0, 1.0, 10);
        let p = vec![DVector::from_vec(vec![1.0, 2.0]); 11];
        let path = SampledPath::new(t, p).unwrap();
        assert!(matches!(
            warp_trajectory(&path),
            Err(Error::DegeneratePath(_))
        ));
    }

    #[test]
    fn constant_speed_path_is_not_retimed() {
        let t = numeric::uniform_grid(0.0, 2.0, 100);
        let p = t
            .iter()
            .map(|&s| DVector::from_vec(vec![3.0 * s, -s]))
            .collect();
        let (map, out) = warp_trajectory(&SampledPath::new(t, p).unwrap()).unwrap();
        assert!(map.max_deviation_from_identity() < 1e-10);
        assert_eq!(out.len(), 101);
    }
}
