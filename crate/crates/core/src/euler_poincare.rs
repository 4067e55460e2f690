//! Euler-Poincare equations on matrix Lie groups, specialized to SO(3).
//!
//! For `f = 1/2 (xi - c)^T K (xi - c)` the equations read
//! `d/dt K(xi - c) + sum_jk [K(xi - c)]_k C^k_ij xi_j = 0`. When `c = 0` and
//! `S^i_lj = sum_k K_kl C^k_ij` is antisymmetric in `(l, j)` the bracket term
//! drops out, `xi` is constant and the solutions are one-parameter subgroups.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lie::{self, AlgebraVector3, Rotation3};
use crate::metric::check_spd;
use crate::numeric;

/// `C^k_ij` with `[E_i, E_j] = sum_k C^k_ij E_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    n: usize,
    c: Vec<f64>,
}

impl StructureConstants {
    /// Validates antisymmetry and the Jacobi identity to 1e-12.
    pub fn new(n: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != n * n * n {
            return Err(Error::InvalidInput(format!(
                "structure constants need {} entries, got {}",
                n * n * n,
                c.len()
            )));
        }
        let s = Self { n, c };
        let anti = s.antisymmetry_defect();
        if anti > 1e-12 {
            return Err(Error::InvalidInput(format!("bracket not antisymmetric (defect {anti:e})")));
        }
        let jac = s.jacobi_defect();
        if jac > 1e-12 {
            return Err(Error::InvalidInput(format!("Jacobi identity fails (defect {jac:e})")));
        }
        Ok(s)
    }

    /// `so(3)` with `(E_i)^vee = e_i`: `C^k_ij = epsilon_ijk`.
    pub fn so3() -> Self {
        let mut c = vec![0.0; 27];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[(k * 3 + i) * 3 + j] = 1.0;
            c[(k * 3 + j) * 3 + i] = -1.0;
        }
        Self { n: 3, c }
    }

    pub fn abelian(n: usize) -> Self {
        Self {
            n,
            c: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.n + i) * self.n + j]
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) + self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }

    /// `max |sum_m C^m_ij C^l_mk + C^m_jk C^l_mi + C^m_ki C^l_mj|`.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = 0.0;
                        for m in 0..n {
                            v += self.get(m, i, j) * self.get(l, m, k)
                                + self.get(m, j, k) * self.get(l, m, i)
                                + self.get(m, k, i) * self.get(l, m, j);
                        }
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }
}

/// `S^i_lj = sum_k K_kl C^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct STensor {
    n: usize,
    s: Vec<f64>,
}

impl STensor {
    pub fn get(&self, i: usize, l: usize, j: usize) -> f64 {
        self.s[(i * self.n + l) * self.n + j]
    }

    /// `max |S^i_lj + S^i_jl|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for l in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(i, l, j) + self.get(i, j, l)).abs());
                }
            }
        }
        worst
    }
}

pub fn s_tensor(k: &DMatrix<f64>, c: &StructureConstants) -> Result<STensor> {
    let n = c.dim();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "weight is {}x{}, algebra has dimension {n}",
            k.nrows(),
            k.ncols()
        )));
    }
    let mut s = vec![0.0; n * n * n];
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                s[(i * n + l) * n + j] = (0..n).map(|kk| k[(kk, l)] * c.get(kk, i, j)).sum();
            }
        }
    }
    Ok(STensor { n, s })
}

/// True when `S^i_lj = -S^i_jl` to 1e-12.
pub fn antisymmetry_test(s: &STensor) -> bool {
    s.antisymmetry_defect() <= 1e-12
}

/// Inertia `I` and offset `omega0` of `1/2 (omega - omega0)^T I (omega - omega0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaSpec {
    pub inertia: Matrix3<f64>,
    pub offset: Vector3<f64>,
}

impl InertiaSpec {
    pub fn new(inertia: Matrix3<f64>, offset: Vector3<f64>) -> Result<Self> {
        let dm = DMatrix::from_column_slice(3, 3, inertia.as_slice());
        check_spd(&dm, 1e-12).map_err(Error::InvalidMetric)?;
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("offset not finite".into()));
        }
        Ok(Self { inertia, offset })
    }

    pub fn isotropic() -> Self {
        Self {
            inertia: Matrix3::identity(),
            offset: Vector3::zeros(),
        }
    }

    pub fn diagonal(d: [f64; 3]) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vector3::from(d)), Vector3::zeros())
    }

    pub fn with_offset(self, offset: Vector3<f64>) -> Self {
        Self { offset, ..self }
    }

    /// `1/2 omega^T I omega`.
    pub fn energy(&self, omega: &Vector3<f64>) -> f64 {
        0.5 * omega.dot(&(self.inertia * omega))
    }

    /// `I omega`.
    pub fn momentum(&self, omega: &Vector3<f64>) -> Vector3<f64> {
        self.inertia * omega
    }

    /// `1/2 (omega - omega0)^T I (omega - omega0)`.
    pub fn cost_integrand(&self, omega: &Vector3<f64>) -> f64 {
        let d = omega - self.offset;
        0.5 * d.dot(&(self.inertia * d))
    }
}

/// Body angular velocity samples with the optional attitude.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyVelocityPath {
    pub t: Vec<f64>,
    pub omega: Vec<AlgebraVector3>,
    pub rotation: Option<Vec<Rotation3>>,
}

impl BodyVelocityPath {
    pub fn new(t: Vec<f64>, omega: Vec<AlgebraVector3>, rotation: Option<Vec<Rotation3>>) -> Result<Self> {
        numeric::check_grid(&t)?;
        if omega.len() != t.len() || rotation.as_ref().is_some_and(|r| r.len() != t.len()) {
            return Err(Error::InvalidInput("path sample counts differ".into()));
        }
        if omega.iter().any(|w| w.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidInput("angular velocity not finite".into()));
        }
        Ok(Self { t, omega, rotation })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

fn euler_rhs(spec: &InertiaSpec, inv: &Matrix3<f64>, w: &Vector3<f64>) -> Vector3<f64> {
    -(inv * w.cross(&(spec.inertia * (w - spec.offset))))
}

/// Classical fourth-order integration of `I omegadot + omega x I(omega - omega0) = 0`
/// together with `Rdot = R hat(omega)`; the attitude is re-projected onto
/// SO(3) after each step. The step is `T / ceil(T / dt)`.
pub fn ep_integrate_so3(
    spec: &InertiaSpec,
    omega_init: &AlgebraVector3,
    r_init: &Rotation3,
    duration: f64,
    dt: f64,
) -> Result<BodyVelocityPath> {
    if !(dt > 0.0) || !(duration > 0.0) {
        return Err(Error::InvalidInput(format!(
            "duration and step must be positive (got {duration}, {dt})"
        )));
    }
    let inv = spec
        .inertia
        .try_inverse()
        .ok_or_else(|| Error::InvalidMetric("inertia not invertible".into()))?;
    let steps = (duration / dt - 1e-9).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let t = numeric::uniform_grid(0.0, duration, steps);
    let mut omega = Vec::with_capacity(steps + 1);
    let mut rots = Vec::with_capacity(steps + 1);
    let mut w = *omega_init;
    let mut r = *r_init.matrix();
    omega.push(w);
    rots.push(*r_init);
    for _ in 0..steps {
        let f = |w: &Vector3<f64>| euler_rhs(spec, &inv, w);
        let g = |r: &Matrix3<f64>, w: &Vector3<f64>| r * lie::hat(w);
        let k1w = f(&w);
        let k1r = g(&r, &w);
        let w2 = w + k1w * (0.5 * h);
        let k2w = f(&w2);
        let k2r = g(&(r + k1r * (0.5 * h)), &w2);
        let w3 = w + k2w * (0.5 * h);
        let k3w = f(&w3);
        let k3r = g(&(r + k2r * (0.5 * h)), &w3);
        let w4 = w + k3w * h;
        let k4w = f(&w4);
        let k4r = g(&(r + k3r * h), &w4);
        w += (k1w + k2w * 2.0 + k3w * 2.0 + k4w) * (h / 6.0);
        let proj = Rotation3::project(&(r + (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0)));
        r = *proj.matrix();
        omega.push(w);
        rots.push(proj);
    }
    BodyVelocityPath::new(t, omega, Some(rots))
}

/// `omega(t) = exp(-t hat(omega0)) omega(0)`, the solution for unit inertia.
pub fn closed_form_omega(omega_init: &AlgebraVector3, omega0: &AlgebraVector3, t: f64) -> AlgebraVector3 {
    lie::exp_so3(&(-omega0 * t)) * *omega_init
}

/// Per-sample residual of
/// `d/dt(df/dxi_i) + sum_jk df/dxi_k C^k_ij xi_j - E_i f` with the time
/// derivative taken by finite differences. `group_term` supplies `E_i f`;
/// pass `None` for costs that do not depend on the group element.
#[allow(clippy::needless_range_loop)]
pub fn ep_residual<G>(
    c: &StructureConstants,
    grad: G,
    group_term: Option<&dyn Fn(usize) -> DVector<f64>>,
    t: &[f64],
    xi: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>>
where
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    numeric::check_grid(t)?;
    let n = c.dim();
    if xi.len() != t.len() || xi.iter().any(|x| x.len() != n) {
        return Err(Error::InvalidInput("velocity samples do not match grid or algebra".into()));
    }
    let p: Vec<DVector<f64>> = xi.iter().map(&grad).collect();
    let dp = numeric::derivative(t, &p);
    Ok((0..t.len())
        .map(|s| {
            let mut r = dp[s].clone();
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        acc += p[s][k] * c.get(k, i, j) * xi[s][j];
                    }
                }
                r[i] += acc;
            }
            if let Some(g) = group_term {
                r -= g(s);
            }
            r
        })
        .collect())
}

/// `df/dxi = K (xi - c)`.
pub fn quadratic_gradient(k: DMatrix<f64>, c: DVector<f64>) -> impl Fn(&DVector<f64>) -> DVector<f64> {
    move |xi| &k * (xi - &c)
}
