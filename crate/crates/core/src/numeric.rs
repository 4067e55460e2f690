//! Quadrature, finite differences and shape-preserving interpolation on
//! sampled grids. Grids are strictly increasing but need not be uniform.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// `n_intervals + 1` equally spaced points on `[a, b]`, endpoints exact.
pub fn uniform_grid(a: f64, b: f64, n_intervals: usize) -> Vec<f64> {
    let n = n_intervals.max(1);
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * (i as f64) / (n as f64)
            }
        })
        .collect()
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("grid needs at least two points".into()));
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid not strictly increasing at index {}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Composite Simpson rule on an arbitrary increasing grid.
///
/// Pairs of intervals use the uneven-spacing Simpson weights; an odd trailing
/// interval is integrated with the quadratic through the last three samples,
/// so the rule stays exact for quadratics on any grid with at least 3 points.
pub fn simpson(grid: &[f64], values: &[f64]) -> f64 {
    assert_eq!(grid.len(), values.len());
    let n = grid.len();
    match n {
        0 | 1 => return 0.0,
        2 => return 0.5 * (grid[1] - grid[0]) * (values[0] + values[1]),
        _ => {}
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut total = 0.0;
    let mut i = 0;
    while i < paired {
        let h0 = grid[i + 1] - grid[i];
        let h1 = grid[i + 2] - grid[i + 1];
        let hs = h0 + h1;
        total += hs / 6.0
            * ((2.0 - h1 / h0) * values[i]
                + hs * hs / (h0 * h1) * values[i + 1]
                + (2.0 - h0 / h1) * values[i + 2]);
        i += 2;
    }
    if intervals % 2 == 1 {
        let h0 = grid[n - 2] - grid[n - 3];
        let h1 = grid[n - 1] - grid[n - 2];
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        total += alpha * values[n - 1] + beta * values[n - 2] - eta * values[n - 3];
    }
    total
}

/// Running trapezoid integral, starting at zero.
pub fn cumulative_trapezoid(grid: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(grid.len(), values.len());
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..grid.len() {
        acc += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    out
}

/// Second-order finite-difference derivative: centered three-point stencils in
/// the interior, one-sided three-point stencils at the ends.
///
/// Works for any value type that forms a vector space over `f64`
/// (scalars, nalgebra vectors and matrices).
pub fn derivative<T>(grid: &[f64], values: &[T]) -> Vec<T>
where
    T: Clone + Add<Output = T> + Mul<f64, Output = T>,
{
    assert_eq!(grid.len(), values.len());
    let n = grid.len();
    assert!(n >= 2, "derivative needs at least two samples");
    if n == 2 {
        let h = grid[1] - grid[0];
        let d = values[1].clone() * (1.0 / h) + values[0].clone() * (-1.0 / h);
        return vec![d.clone(), d];
    }
    let combo = |i: usize, w: [f64; 3]| -> T {
        values[i].clone() * w[0] + values[i + 1].clone() * w[1] + values[i + 2].clone() * w[2]
    };
    let mut out = Vec::with_capacity(n);
    {
        let h1 = grid[1] - grid[0];
        let h2 = grid[2] - grid[1];
        let w = [
            -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
            (h1 + h2) / (h1 * h2),
            -h1 / (h2 * (h1 + h2)),
        ];
        out.push(combo(0, w));
    }
    for i in 1..n - 1 {
        let h1 = grid[i] - grid[i - 1];
        let h2 = grid[i + 1] - grid[i];
        let w = [
            -h2 / (h1 * (h1 + h2)),
            (h2 - h1) / (h1 * h2),
            h1 / (h2 * (h1 + h2)),
        ];
        out.push(combo(i - 1, w));
    }
    {
        let h1 = grid[n - 2] - grid[n - 3];
        let h2 = grid[n - 1] - grid[n - 2];
        let w = [
            h2 / (h1 * (h1 + h2)),
            -(h1 + h2) / (h1 * h2),
            (h1 + 2.0 * h2) / (h2 * (h1 + h2)),
        ];
        out.push(combo(n - 3, w));
    }
    out
}

/// Fourth-order finite-difference derivative from the five nearest samples
/// (Lagrange stencils, shifted to one side near the ends). Falls back to
/// [`derivative`] on fewer than five samples.
pub fn derivative5<T>(grid: &[f64], values: &[T]) -> Vec<T>
where
    T: Clone + Add<Output = T> + Mul<f64, Output = T>,
{
    assert_eq!(grid.len(), values.len());
    let n = grid.len();
    if n < 5 {
        return derivative(grid, values);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let nodes = &grid[lo..lo + 5];
            let w = lagrange_derivative_weights(nodes, grid[i]);
            let mut acc = values[lo].clone() * w[0];
            for k in 1..5 {
                acc = acc + values[lo + k].clone() * w[k];
            }
            acc
        })
        .collect()
}

/// Weights `L_j'(x)` of the Lagrange basis on `nodes`.
fn lagrange_derivative_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let p = nodes.len();
    (0..p)
        .map(|j| {
            let mut sum = 0.0;
            for m in (0..p).filter(|&m| m != j) {
                let mut prod = 1.0 / (nodes[j] - nodes[m]);
                for l in (0..p).filter(|&l| l != j && l != m) {
                    prod *= (x - nodes[l]) / (nodes[j] - nodes[l]);
                }
                sum += prod;
            }
            sum
        })
        .collect()
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes.
///
/// Never overshoots the data on any interval, so positive data interpolate to
/// positive values and strictly increasing data to a strictly increasing curve.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!(
                "interpolant needs matching lengths, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        check_grid(&x)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        let k = self.x.partition_point(|&xk| xk <= t);
        k.clamp(1, n - 1) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let dh00 = (6.0 * s2 - 6.0 * s) / h;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = (-6.0 * s2 + 6.0 * s) / h;
        let dh11 = 3.0 * s2 - 2.0 * s;
        dh00 * self.y[k] + dh10 * self.d[k] + dh01 * self.y[k + 1] + dh11 * self.d[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d * m0 <= 0.0 {
        0.0
    } else if m0 * m1 <= 0.0 && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Natural cubic spline; used where the sampled function oscillates and the
/// monotone interpolant would flatten its extrema.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput("spline needs matching lengths".into()));
        }
        check_grid(&x)?;
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the second-derivative system.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let c = h1 / 6.0;
                let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (rhs - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        Ok(Self { x, y, m })
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        let k = self.x.partition_point(|&xk| xk <= t);
        k.clamp(1, n - 1) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - t) / h;
        let b = (t - self.x[k]) / h;
        a * self.y[k]
            + b * self.y[k + 1]
            + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - t) / h;
        let b = (t - self.x[k]) / h;
        (self.y[k + 1] - self.y[k]) / h
            + (-(3.0 * a * a - 1.0) * self.m[k] + (3.0 * b * b - 1.0) * self.m[k + 1]) * h / 6.0
    }
}
