//! Independent test oracles. None of these call into the solver code paths
//! they are used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use varboot::lie::{self, Pose, Rotation3, Twist6};
use varboot::verify::Perturbation;
use varboot::Result;

/// Minimum over monotone lattice paths `(i/K, j/K)` of the trapezoid-rule
/// cost `sum (dy^2 / h) (m(y_j) + m(y_j')) / 2`. Returns the minimum and the
/// largest `dy` on a minimizing path.
pub fn dp_reparam(m: &dyn Fn(f64) -> f64, k: usize) -> (f64, f64) {
    let h = 1.0 / k as f64;
    let y: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
    let mv: Vec<f64> = y.iter().map(|&v| m(v)).collect();
    let mut value = vec![f64::INFINITY; k + 1];
    value[0] = 0.0;
    let mut parent = vec![vec![0usize; k + 1]; k + 1];
    for row in parent.iter_mut().skip(1) {
        let mut next = vec![f64::INFINITY; k + 1];
        for jn in 0..=k {
            for jp in 0..=jn {
                if !value[jp].is_finite() {
                    continue;
                }
                let dy = y[jn] - y[jp];
                let c = value[jp] + dy * dy / h * 0.5 * (mv[jp] + mv[jn]);
                if c < next[jn] {
                    next[jn] = c;
                    row[jn] = jp;
                }
            }
        }
        value = next;
    }
    let mut j = k;
    let mut max_dy: f64 = 0.0;
    for i in (1..=k).rev() {
        let jp = parent[i][j];
        max_dy = max_dy.max(y[j] - y[jp]);
        j = jp;
    }
    (value[k], max_dy)
}

/// `arccosh(1 + |p - q|^2 / (2 p2 q2))`.
pub fn hyperbolic_distance(p: &Vector2<f64>, q: &Vector2<f64>) -> f64 {
    (1.0 + (p - q).norm_squared() / (2.0 * p.y * q.y)).acosh()
}

/// Curvature and torsion from the first three derivatives:
/// `|x' x x''| / |x'|^3` and `det(x', x'', x''') / |x' x x''|^2`.
pub fn curvature_torsion(d1: &Vector3<f64>, d2: &Vector3<f64>, d3: &Vector3<f64>) -> (f64, f64) {
    let c = d1.cross(d2);
    (c.norm() / d1.norm().powi(3), c.dot(d3) / c.norm_squared())
}

/// A bent space curve with everywhere positive curvature and varying torsion.
pub fn bent_curve(s: f64) -> Vector3<f64> {
    Vector3::new(s, 0.8 * s * s, 0.5 * s * s * s + 0.3 * (2.0 * s).sin())
}

pub fn bent_curve_derivs(s: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    (
        Vector3::new(1.0, 1.6 * s, 1.5 * s * s + 0.6 * (2.0 * s).cos()),
        Vector3::new(0.0, 1.6, 3.0 * s - 1.2 * (2.0 * s).sin()),
        Vector3::new(0.0, 0.0, 3.0 - 2.4 * (2.0 * s).cos()),
    )
}

pub fn helix(s: f64) -> Vector3<f64> {
    let c = 2f64.sqrt();
    Vector3::new((s / c).cos(), (s / c).sin(), s / c)
}

/// Metric of a Lagrangian `L(v) = 1/2 v^T G v` recovered by polarization.
pub fn polarized_metric(lagrangian: &dyn Fn(&DVector<f64>, &DVector<f64>) -> f64, q: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * lagrangian(q, &e(i))
        } else {
            lagrangian(q, &(e(i) + e(j))) - lagrangian(q, &e(i)) - lagrangian(q, &e(j))
        }
    })
}

/// Geodesic acceleration `-Gamma^k_ij v^i v^j` with metric derivatives by
/// central differences.
fn geodesic_accel(metric: &dyn Fn(&DVector<f64>) -> DMatrix<f64>, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let h = 1e-5;
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[l] += h;
            xm[l] -= h;
            (metric(&xp) - metric(&xm)) / (2.0 * h)
        })
        .collect();
    // Lowered Christoffel contraction: c_l = sum_ij (d_i g_lj - 1/2 d_l g_ij) v^i v^j
    let mut c = DVector::zeros(n);
    for l in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (dg[i][(l, j)] - 0.5 * dg[l][(i, j)]) * v[i] * v[j];
            }
        }
        c[l] = acc;
    }
    match metric(x).lu().solve(&c) {
        Some(a) => -a,
        None => DVector::from_element(n, f64::NAN),
    }
}

/// Fixed-step RK4 integration of the geodesic equations on `[0, 1]`.
pub fn shoot(
    metric: &dyn Fn(&DVector<f64>) -> DMatrix<f64>,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    steps: usize,
) -> Vec<DVector<f64>> {
    let h = 1.0 / steps as f64;
    let mut x = x0.clone();
    let mut v = v0.clone();
    let mut out = vec![x.clone()];
    for _ in 0..steps {
        let a1 = geodesic_accel(metric, &x, &v);
        let (x2, v2) = (&x + &v * (0.5 * h), &v + &a1 * (0.5 * h));
        let a2 = geodesic_accel(metric, &x2, &v2);
        let (x3, v3) = (&x + &v2 * (0.5 * h), &v + &a2 * (0.5 * h));
        let a3 = geodesic_accel(metric, &x3, &v3);
        let (x4, v4) = (&x + &v3 * h, &v + &a3 * h);
        let a4 = geodesic_accel(metric, &x4, &v4);
        x += (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        v += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        out.push(x.clone());
    }
    out
}

/// Damped Newton shooting for the two-point problem; Jacobian by forward
/// differences, step halved until the endpoint miss shrinks.
pub fn shoot_bvp(
    metric: &dyn Fn(&DVector<f64>) -> DMatrix<f64>,
    x0: &DVector<f64>,
    x1: &DVector<f64>,
    steps: usize,
) -> Vec<DVector<f64>> {
    let n = x0.len();
    let miss_of = |v: &DVector<f64>| {
        let end = shoot(metric, x0, v, steps).pop().unwrap() - x1;
        let norm = end.norm();
        (end, if norm.is_finite() { norm } else { f64::INFINITY })
    };
    let mut v = x1 - x0;
    let (mut miss, mut norm) = miss_of(&v);
    for _ in 0..50 {
        if norm < 1e-12 {
            break;
        }
        let dv = 1e-7;
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut vp = v.clone();
            vp[j] += dv;
            jac.set_column(j, &((miss_of(&vp).0 - &miss) / dv));
        }
        let step = jac.lu().solve(&miss).expect("shooting Jacobian invertible");
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-6 {
            let trial = &v - &step * lambda;
            let (m, nm) = miss_of(&trial);
            if nm < norm {
                v = trial;
                miss = m;
                norm = nm;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    shoot(metric, x0, &v, steps)
}

/// `sum |log(R_i^T R_{i+1})|^2 / h`: equals `int |omega|^2` on a geodesic and
/// is never smaller on any other sampled path with the same endpoints.
pub fn so3_discrete_energy(rots: &[Rotation3], t: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..rots.len() - 1 {
        let h = t[i + 1] - t[i];
        acc += lie::log_so3(&(rots[i].transpose() * rots[i + 1]))?.norm_squared() / h;
    }
    Ok(acc)
}

pub fn perturb_rotations(rots: &[Rotation3], t: &[f64], eps: &Perturbation) -> Vec<Rotation3> {
    rots.iter()
        .zip(t)
        .map(|(r, &ti)| {
            let e = eps.eval(ti);
            *r * lie::exp_so3(&Vector3::new(e[0], e[1], e[2]))
        })
        .collect()
}

/// Body twists `log(g_i^{-1} g_{i+1}) / h` under the semidirect law.
pub fn se3_discrete_twists(poses: &[Pose], t: &[f64]) -> Result<Vec<(Twist6, f64)>> {
    let law = lie::GroupLaw::Semidirect;
    (0..poses.len() - 1)
        .map(|i| {
            let h = t[i + 1] - t[i];
            let rel = poses[i].inverse(law).compose(&poses[i + 1], law);
            Ok((lie::log_se3(&rel)?.scale(1.0 / h), h))
        })
        .collect()
}

/// `sum h (|omega|^2 + |tdot|^2)` with the rotation part by logarithms.
pub fn direct_discrete_energy(poses: &[Pose], t: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..poses.len() - 1 {
        let h = t[i + 1] - t[i];
        let w = lie::log_so3(&(poses[i].rotation.transpose() * poses[i + 1].rotation))?;
        let dt = poses[i + 1].translation - poses[i].translation;
        acc += (w.norm_squared() + dt.norm_squared()) / h;
    }
    Ok(acc)
}

/// Seeded uniform draws for test inputs.
pub fn uniform(rng: &mut impl rand::Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Lattice DP whose edges may span up to `span` cells in each direction, so
/// slopes are rationals rather than integers. Same trapezoid edge cost.
pub fn dp_reparam_wide(m: &dyn Fn(f64) -> f64, k: usize, span: usize) -> (f64, f64) {
    let y: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
    let mv: Vec<f64> = y.iter().map(|&v| m(v)).collect();
    let mut value = vec![vec![f64::INFINITY; k + 1]; k + 1];
    let mut max_dy = vec![vec![0.0f64; k + 1]; k + 1];
    value[0][0] = 0.0;
    for i in 1..=k {
        for j in 0..=k {
            for di in 1..=span.min(i) {
                let ip = i - di;
                let dx = y[i] - y[ip];
                for jp in j.saturating_sub(span)..=j {
                    let v = value[ip][jp];
                    if !v.is_finite() {
                        continue;
                    }
                    let dy = y[j] - y[jp];
                    let c = v + dy * dy / dx * 0.5 * (mv[jp] + mv[j]);
                    if c < value[i][j] {
                        value[i][j] = c;
                        max_dy[i][j] = max_dy[ip][jp].max(dy);
                    }
                }
            }
        }
    }
    (value[k][k], max_dy[k][k])
}
