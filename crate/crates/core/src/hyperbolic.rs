//! Curvature of metric tensors and geodesics of the Poincare half-plane.
//!
//! Geodesics are the images of `t -> (b + i a e^t) / (d + i c e^t)` with
//! `ad - bc = 1`, parametrized by hyperbolic arclength. The constant-speed
//! ansatz `xdot = x2 R(theta) c` meets the same boundary values but is not a
//! geodesic unless the endpoints lie on a vertical ray.

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::numeric;

/// Christoffel symbols, lowered Riemann tensor and the constant-curvature fit
/// at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub dim: usize,
    /// `Gamma^i_jk` at `[(i * n + j) * n + k]`.
    pub christoffel: Vec<f64>,
    /// `R_hjkl` at `[((h * n + j) * n + k) * n + l]`.
    pub riemann: Vec<f64>,
    /// Least-squares `K0` in `R_hjkl = K0 (m_hk m_jl - m_hl m_jk)`.
    pub k0: f64,
    /// `max |R_hjkl - K0 (m_hk m_jl - m_hl m_jk)|`.
    pub residual: f64,
}

impl CurvatureReport {
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim;
        self.christoffel[(i * n + j) * n + k]
    }

    pub fn riemann_lowered(&self, h: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.riemann[((h * n + j) * n + k) * n + l]
    }

    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        let n = self.dim;
        let mut out = format!("dim={n}\nk0={:.16e}\nresidual={:.16e}\n", self.k0, self.residual);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push_str(&format!("gamma[{i}][{j}][{k}]={:.16e}\n", self.gamma(i, j, k)));
                }
            }
        }
        out
    }
}

fn shifted(q: &DVector<f64>, k: usize, h: f64) -> DVector<f64> {
    let mut p = q.clone();
    p[k] += h;
    p
}

/// Christoffel symbols with central differences of step `h`.
fn christoffel(metric: &dyn Metric, q: &DVector<f64>, h: f64) -> Result<Vec<f64>> {
    let n = q.len();
    let m = metric.checked_matrix(q)?;
    let inv = m
        .cholesky()
        .ok_or_else(|| Error::InvalidMetric("metric not positive definite".into()))?
        .inverse();
    let dm: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let plus = metric.checked_matrix(&shifted(q, k, h))?;
            let minus = metric.checked_matrix(&shifted(q, k, -h))?;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect::<Result<_>>()?;
    let mut g = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += inv[(i, l)] * (dm[k][(l, j)] + dm[j][(l, k)] - dm[l][(j, k)]);
                }
                g[(i * n + j) * n + k] = 0.5 * acc;
            }
        }
    }
    Ok(g)
}

/// Christoffel symbols, curvature tensor and constant-curvature fit by
/// central finite differences of step `h`.
pub fn curvature_report(metric: &dyn Metric, q: &DVector<f64>, h: f64) -> Result<CurvatureReport> {
    let n = metric.dim();
    if q.len() != n {
        return Err(Error::InvalidInput(format!("point has dim {}, metric {}", q.len(), n)));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
    }
    let m = metric.checked_matrix(q)?;
    let g = christoffel(metric, q, h)?;
    let dg: Vec<Vec<f64>> = (0..n)
        .map(|l| {
            let plus = christoffel(metric, &shifted(q, l, h), h)?;
            let minus = christoffel(metric, &shifted(q, l, -h), h)?;
            Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect::<Result<_>>()?;
    let idx3 = |i: usize, j: usize, k: usize| (i * n + j) * n + k;

    // R^i_jkl = -d_l G^i_jk + d_k G^i_jl + sum_m (-G^m_jk G^i_ml + G^m_jl G^i_mk)
    let mut upper = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = -dg[l][idx3(i, j, k)] + dg[k][idx3(i, j, l)];
                    for mm in 0..n {
                        v += -g[idx3(mm, j, k)] * g[idx3(i, mm, l)] + g[idx3(mm, j, l)] * g[idx3(i, mm, k)];
                    }
                    upper[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    let mut lowered = vec![0.0; n * n * n * n];
    let (mut num, mut den) = (0.0, 0.0);
    let mut gauss = vec![0.0; n * n * n * n];
    for hh in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let at = ((hh * n + j) * n + k) * n + l;
                    lowered[at] = (0..n)
                        .map(|i| m[(hh, i)] * upper[((i * n + j) * n + k) * n + l])
                        .sum();
                    gauss[at] = m[(hh, k)] * m[(j, l)] - m[(hh, l)] * m[(j, k)];
                    num += lowered[at] * gauss[at];
                    den += gauss[at] * gauss[at];
                }
            }
        }
    }
    let k0 = if den > 0.0 { num / den } else { 0.0 };
    let residual = lowered
        .iter()
        .zip(&gauss)
        .map(|(r, gg)| (r - k0 * gg).abs())
        .fold(0.0, f64::max);
    Ok(CurvatureReport {
        dim: n,
        christoffel: g,
        riemann: lowered,
        k0,
        residual,
    })
}

/// Element of SL(2, R) labelling a half-plane geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SL2Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SL2Params {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = 1.0 + (a * d).abs() + (b * c).abs();
        if (det - 1.0).abs() > 1e-12 * scale {
            return Err(Error::InvalidInput(format!("ad - bc = {det}, expected 1")));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }
}

/// Point, velocity and acceleration of a geodesic at parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicJet {
    pub x: Vector2<f64>,
    pub v: Vector2<f64>,
    pub acc: Vector2<f64>,
}

/// `x1 = (bd + ac e^2t) / D`, `x2 = e^t / D`, `D = d^2 + c^2 e^2t`.
pub fn geodesic_h2(p: &SL2Params, t: f64) -> Vector2<f64> {
    geodesic_h2_jet(p, t).x
}

/// Closed-form derivatives of [`geodesic_h2`].
pub fn geodesic_h2_jet(p: &SL2Params, t: f64) -> GeodesicJet {
    let SL2Params { a, b, c, d } = *p;
    let et = t.exp();
    let e2 = et * et;
    let dd = d * d + c * c * e2;
    let x = Vector2::new((b * d + a * c * e2) / dd, et / dd);
    let v = Vector2::new(
        2.0 * c * d * e2 / (dd * dd),
        et * (d * d - c * c * e2) / (dd * dd),
    );
    let u = d * d * et - c * c * e2 * et;
    let du = d * d * et - 3.0 * c * c * e2 * et;
    let acc = Vector2::new(
        4.0 * c * d * e2 * (d * d - c * c * e2) / (dd * dd * dd),
        (du * dd - 4.0 * c * c * e2 * u) / (dd * dd * dd),
    );
    GeodesicJet { x, v, acc }
}

/// Signed Euclidean curvature of a planar curve from its jet.
pub fn signed_curvature(v: &Vector2<f64>, acc: &Vector2<f64>) -> f64 {
    (v.x * acc.y - v.y * acc.x) / v.norm_squared().powf(1.5)
}

/// Residuals `(d/dt(x1dot / x2^2), x2ddot - (x2dot^2 - x1dot^2) / x2)`.
pub fn euler_lagrange_residual(jet: &GeodesicJet) -> (f64, f64) {
    let GeodesicJet { x, v, acc } = *jet;
    let r1 = acc.x / (x.y * x.y) - 2.0 * v.x * v.y / (x.y * x.y * x.y);
    let r2 = acc.y - (v.y * v.y - v.x * v.x) / x.y;
    (r1, r2)
}

fn check_upper(p: &Vector2<f64>) -> Result<()> {
    if !(p.y > 0.0) || !p.x.is_finite() || !p.y.is_finite() {
        return Err(Error::Domain(format!("point ({}, {}) not in the upper half-plane", p.x, p.y)));
    }
    Ok(())
}

/// The geodesic through two points: parameters and the interval `[t0, t1]`
/// with `t1 - t0` the hyperbolic distance.
pub fn geodesic_h2_bvp(p0: &Vector2<f64>, p1: &Vector2<f64>) -> Result<(SL2Params, f64, f64)> {
    check_upper(p0)?;
    check_upper(p1)?;
    let scale = p0.amax().max(p1.amax()).max(1.0);
    if (p1 - p0).norm() <= 1e-14 * scale {
        return Err(Error::DegeneratePair("endpoints coincide".into()));
    }
    let dx = p1.x - p0.x;
    if dx.abs() <= 1e-14 * scale {
        return Ok(if p1.y > p0.y {
            (SL2Params::new(1.0, p0.x, 0.0, 1.0)?, p0.y.ln(), p1.y.ln())
        } else {
            (SL2Params::new(p0.x, -1.0, 1.0, 0.0)?, -p0.y.ln(), -p1.y.ln())
        });
    }
    let center = (p1.norm_squared() - p0.norm_squared()) / (2.0 * dx);
    let rho = ((p0.x - center).powi(2) + p0.y * p0.y).sqrt();
    let sigma = dx.signum();
    let d = 1.0 / (2.0 * rho).sqrt();
    let c = sigma * d;
    let params = SL2Params {
        a: c * (center + sigma * rho),
        b: d * (center - sigma * rho),
        c,
        d,
    };
    // On this circle x1 = center + sigma rho tanh t and x2 = rho / cosh t.
    let t_of = |p: &Vector2<f64>| (sigma * (p.x - center) / p.y).asinh();
    Ok((params, t_of(p0), t_of(p1)))
}

/// Sampled path in the half-plane with its rates.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlanePath {
    pub t: Vec<f64>,
    pub x: Vec<Vector2<f64>>,
    pub xdot: Vec<Vector2<f64>>,
}

impl HalfPlanePath {
    pub fn new(t: Vec<f64>, x: Vec<Vector2<f64>>, xdot: Vec<Vector2<f64>>) -> Result<Self> {
        numeric::check_grid(&t)?;
        if x.len() != t.len() || xdot.len() != t.len() {
            return Err(Error::InvalidInput("path sample counts differ".into()));
        }
        for p in &x {
            check_upper(p)?;
        }
        Ok(Self { t, x, xdot })
    }

    /// Rates by finite differences.
    pub fn from_points(t: Vec<f64>, x: Vec<Vector2<f64>>) -> Result<Self> {
        numeric::check_grid(&t)?;
        if x.len() != t.len() || t.len() < 3 {
            return Err(Error::InvalidInput("path needs at least 3 samples".into()));
        }
        let xdot = numeric::derivative(&t, &x);
        Self::new(t, x, xdot)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `(x1dot^2 + x2dot^2) / x2^2` per sample.
    pub fn speed_squared(&self) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.xdot)
            .map(|(x, v)| v.norm_squared() / (x.y * x.y))
            .collect()
    }
}

/// `int (x1dot^2 + x2dot^2) / x2^2 dt`. Errors if the path leaves `x2 > 0`.
pub fn hyperbolic_cost(path: &HalfPlanePath) -> Result<f64> {
    for p in &path.x {
        check_upper(p)?;
    }
    Ok(numeric::simpson(&path.t, &path.speed_squared()))
}

/// Geodesic samples on `[t0, t1]` with analytic rates.
pub fn sample_geodesic(p: &SL2Params, t0: f64, t1: f64, n_intervals: usize) -> Result<HalfPlanePath> {
    let t = numeric::uniform_grid(t0, t1, n_intervals);
    let jets: Vec<GeodesicJet> = t.iter().map(|&s| geodesic_h2_jet(p, s)).collect();
    HalfPlanePath::new(t, jets.iter().map(|j| j.x).collect(), jets.iter().map(|j| j.v).collect())
}

/// The geodesic from `p0` to `p1` retimed onto `[0, 1]` (constant speed equal
/// to the hyperbolic distance).
pub fn geodesic_h2_path(p0: &Vector2<f64>, p1: &Vector2<f64>, n_intervals: usize) -> Result<HalfPlanePath> {
    let (params, t0, t1) = geodesic_h2_bvp(p0, p1)?;
    let len = t1 - t0;
    let t = numeric::uniform_grid(0.0, 1.0, n_intervals);
    let jets: Vec<GeodesicJet> = t.iter().map(|&s| geodesic_h2_jet(&params, t0 + len * s)).collect();
    let mut x: Vec<Vector2<f64>> = jets.iter().map(|j| j.x).collect();
    x[0] = *p0;
    x[n_intervals] = *p1;
    HalfPlanePath::new(t, x, jets.iter().map(|j| j.v * len).collect())
}

/// Boundary-matched constant-speed ansatz on `[0, 1]`:
/// `x2 = x2(0) e^{c2 t}`, `x1 = alpha + beta e^{c2 t}`.
pub fn ansatz_h2(p0: &Vector2<f64>, p1: &Vector2<f64>, n_intervals: usize) -> Result<HalfPlanePath> {
    check_upper(p0)?;
    check_upper(p1)?;
    let scale = p0.amax().max(p1.amax()).max(1.0);
    if (p1.y - p0.y).abs() <= 1e-14 * scale {
        return Err(Error::DegenerateAnsatz(
            "endpoints at equal height: boundary-matched ansatz is singular".into(),
        ));
    }
    let c2 = (p1.y / p0.y).ln();
    let beta = p0.y * (p1.x - p0.x) / (p1.y - p0.y);
    let alpha = p0.x - beta;
    let t = numeric::uniform_grid(0.0, 1.0, n_intervals);
    let mut x: Vec<Vector2<f64>> = t
        .iter()
        .map(|&s| {
            let e = (c2 * s).exp();
            Vector2::new(alpha + beta * e, p0.y * e)
        })
        .collect();
    let xdot = t
        .iter()
        .map(|&s| {
            let e = c2 * (c2 * s).exp();
            Vector2::new(beta * e, p0.y * e)
        })
        .collect();
    x[0] = *p0;
    x[n_intervals] = *p1;
    HalfPlanePath::new(t, x, xdot)
}

/// Steered ansatz `xdot = x2 R(omega0 t) c` matched to both endpoints, and
/// its cost `|c|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeredAnsatz {
    pub omega0: f64,
    pub c: Vector2<f64>,
    pub cost: f64,
    pub path: HalfPlanePath,
}

/// `int_0^t sin(w s) ds` and `int_0^t cos(w s) ds`.
fn trig_integrals(w: f64, t: f64) -> (f64, f64) {
    if w.abs() < 1e-8 {
        (0.5 * w * t * t, t - w * w * t * t * t / 6.0)
    } else {
        let h = (0.5 * w * t).sin();
        (2.0 * h * h / w, (w * t).sin() / w)
    }
}

fn steered_state(x0: &Vector2<f64>, w: f64, c: &Vector2<f64>, t: f64) -> (f64, f64) {
    let (s, co) = trig_integrals(w, t);
    let log_x2 = x0.y.ln() + c.x * s + c.y * co;
    (log_x2, log_x2.exp())
}

fn steered_rates(x0: &Vector2<f64>, w: f64, c: &Vector2<f64>, t: f64) -> Vector2<f64> {
    let x2 = steered_state(x0, w, c, t).1;
    let (sn, cs) = (w * t).sin_cos();
    Vector2::new(x2 * (c.x * cs - c.y * sn), x2 * (c.x * sn + c.y * cs))
}

const STEER_CELLS: usize = 256;

/// `x1(1)` for the steered system, 8-point Gauss per cell.
fn steered_x1_end(x0: &Vector2<f64>, w: f64, c: &Vector2<f64>) -> f64 {
    let edges = numeric::uniform_grid(0.0, 1.0, STEER_CELLS);
    x0.x + edges
        .windows(2)
        .map(|e| numeric::gauss_legendre(|t| steered_rates(x0, w, c, t).x, e[0], e[1]))
        .sum::<f64>()
}

fn solve_steering(p0: &Vector2<f64>, p1: &Vector2<f64>, w: f64, guess: Vector2<f64>) -> Result<Vector2<f64>> {
    let target_log = (p1.y / p0.y).ln();
    let (s1, c1) = trig_integrals(w, 1.0);
    let residual = |c: &Vector2<f64>| {
        Vector2::new(
            steered_x1_end(p0, w, c) - p1.x,
            c.x * s1 + c.y * c1 - target_log,
        )
    };
    let mut c = guess;
    let scale = p0.amax().max(p1.amax()).max(1.0);
    for _ in 0..60 {
        let r = residual(&c);
        if r.amax() <= 1e-12 * scale {
            return Ok(c);
        }
        let h = 1e-7 * (1.0 + c.amax());
        let j0 = (residual(&(c + Vector2::new(h, 0.0))) - residual(&(c - Vector2::new(h, 0.0)))) / (2.0 * h);
        let j1 = (residual(&(c + Vector2::new(0.0, h))) - residual(&(c - Vector2::new(0.0, h)))) / (2.0 * h);
        let jac = nalgebra::Matrix2::from_columns(&[j0, j1]);
        let step = jac
            .try_inverse()
            .ok_or_else(|| Error::DegenerateAnsatz(format!("steering Jacobian singular at omega0 = {w}")))?
            * r;
        // Damped update keeps x2 from overflowing on poor guesses.
        let mut lambda = 1.0;
        let base = r.norm();
        loop {
            let trial = c - step * lambda;
            if residual(&trial).norm() < base || lambda < 1e-4 {
                c = trial;
                break;
            }
            lambda *= 0.5;
        }
    }
    let r = residual(&c);
    if r.amax() <= 1e-9 * scale {
        Ok(c)
    } else {
        Err(Error::DegenerateAnsatz(format!(
            "steering solve did not converge at omega0 = {w} (residual {:e})",
            r.amax()
        )))
    }
}

fn steered_path(p0: &Vector2<f64>, p1: &Vector2<f64>, w: f64, c: Vector2<f64>, n_intervals: usize) -> Result<SteeredAnsatz> {
    let t = numeric::uniform_grid(0.0, 1.0, n_intervals);
    let mut x = Vec::with_capacity(t.len());
    let mut x1 = p0.x;
    x.push(*p0);
    for win in t.windows(2) {
        x1 += numeric::gauss_legendre(|s| steered_rates(p0, w, &c, s).x, win[0], win[1]);
        x.push(Vector2::new(x1, steered_state(p0, w, &c, win[1]).1));
    }
    x[n_intervals] = *p1;
    let xdot = t.iter().map(|&s| steered_rates(p0, w, &c, s)).collect();
    Ok(SteeredAnsatz {
        omega0: w,
        c,
        cost: c.norm_squared(),
        path: HalfPlanePath::new(t, x, xdot)?,
    })
}

/// Sweeps the steering rate over `omegas` (in order, each solve seeded by the
/// previous one starting from the unsteered ansatz).
pub fn steering_sweep(p0: &Vector2<f64>, p1: &Vector2<f64>, omegas: &[f64], n_intervals: usize) -> Result<Vec<SteeredAnsatz>> {
    check_upper(p0)?;
    check_upper(p1)?;
    if (p1.y - p0.y).abs() <= 1e-14 * p0.amax().max(p1.amax()).max(1.0) {
        return Err(Error::DegenerateAnsatz("endpoints at equal height".into()));
    }
    let c2 = (p1.y / p0.y).ln();
    let beta = p0.y * (p1.x - p0.x) / (p1.y - p0.y);
    let unsteered = Vector2::new(beta * c2 / p0.y, c2);
    // Continuation outward from zero in both directions.
    let mut order: Vec<usize> = (0..omegas.len()).collect();
    order.sort_by(|&i, &j| omegas[i].abs().total_cmp(&omegas[j].abs()));
    let mut solved: Vec<Option<SteeredAnsatz>> = vec![None; omegas.len()];
    let mut last_pos = unsteered;
    let mut last_neg = unsteered;
    for i in order {
        let w = omegas[i];
        let guess = if w >= 0.0 { last_pos } else { last_neg };
        let c = solve_steering(p0, p1, w, guess)?;
        if w >= 0.0 {
            last_pos = c;
        } else {
            last_neg = c;
        }
        solved[i] = Some(steered_path(p0, p1, w, c, n_intervals)?);
    }
    Ok(solved.into_iter().map(|s| s.expect("every rate solved")).collect())
}
