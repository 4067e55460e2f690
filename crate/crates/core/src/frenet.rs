//! Frenet-Serret frames of sampled space curves, minimally twisting roll,
//! optimal frame reparametrization and the joint roll + speed problem.
//!
//! Curves carry a parameter `s` (normalized to `[0, 1]` after
//! [`arclength_parametrize`]) and points in length units. Curvature and
//! torsion are geometric, per unit length; `speed = |dx/ds|` converts between
//! the two, so `kappa * speed` is the turning rate per unit parameter.
//!
//! With `R = R_FS R1(theta)` the frame rotation rate per unit length is
//! `|omega|^2 = kappa^2 + (tau + dtheta/dsigma)^2`. Setting the bracket to a
//! constant gives the minimal twist; reparametrizing with
//! `m(s) = r^2 |omega_s|^2 + |x_s|^2` gives the optimal speed, and the two
//! problems decouple so the joint optimum is available in closed form.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::lie::{self, Rotation3};
use crate::numeric::{self, CubicSpline};
use crate::reparam::{self, MonotoneMap, ScalarDensity};

/// Relative curvature floor: the normal is undefined below `KAPPA_MIN / length`.
pub const KAPPA_MIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub s: Vec<f64>,
    pub points: Vec<Vector3<f64>>,
    /// `s` is cumulative chord length normalized to `[0, 1]`.
    pub arclength: bool,
}

impl SampledCurve {
    pub fn new(s: Vec<f64>, points: Vec<Vector3<f64>>) -> Result<Self> {
        if s.len() < 3 {
            return Err(Error::InvalidCurve("curve needs at least 3 samples".into()));
        }
        if s.len() != points.len() {
            return Err(Error::InvalidCurve(format!(
                "{} parameter values but {} points",
                s.len(),
                points.len()
            )));
        }
        numeric::check_grid(&s).map_err(|e| Error::InvalidCurve(e.to_string()))?;
        if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidCurve("non-finite point".into()));
        }
        let scale = points.iter().map(|p| p.amax()).fold(1.0, f64::max);
        if let Some(i) = points
            .windows(2)
            .position(|w| (w[1] - w[0]).norm() <= 1e-14 * scale)
        {
            return Err(Error::InvalidCurve(format!(
                "samples {} and {} coincide",
                i,
                i + 1
            )));
        }
        Ok(Self {
            s,
            points,
            arclength: false,
        })
    }

    /// Samples `x(s)` on a uniform grid of `[s0, s1]`.
    pub fn from_fn<F: Fn(f64) -> Vector3<f64>>(s0: f64, s1: f64, n_intervals: usize, f: F) -> Result<Self> {
        let s = numeric::uniform_grid(s0, s1, n_intervals);
        let points = s.iter().map(|&v| f(v)).collect();
        Self::new(s, points)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Polyline length.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// `|dx/ds|` by finite differences.
    pub fn speeds(&self) -> Vec<f64> {
        numeric::derivative(&self.s, &self.points)
            .iter()
            .map(|v| v.norm())
            .collect()
    }

    /// Points re-interpolated (natural cubic spline) at new parameter values.
    pub fn resample(&self, s_new: &[f64]) -> Result<SampledCurve> {
        let splines = component_splines(&self.s, &self.points)?;
        let points = s_new
            .iter()
            .map(|&v| Vector3::new(splines[0].eval(v), splines[1].eval(v), splines[2].eval(v)))
            .collect();
        let mut out = SampledCurve::new(s_new.to_vec(), points)?;
        out.arclength = false;
        Ok(out)
    }
}

fn component_splines(s: &[f64], v: &[Vector3<f64>]) -> Result<Vec<CubicSpline>> {
    (0..3)
        .map(|c| CubicSpline::new(s.to_vec(), v.iter().map(|p| p[c]).collect()))
        .collect()
}

/// Reparametrizes by cumulative chord length normalized to `[0, 1]`.
pub fn arclength_parametrize(curve: &SampledCurve) -> Result<SampledCurve> {
    let mut s = Vec::with_capacity(curve.len());
    let mut acc = 0.0;
    s.push(0.0);
    for w in curve.points.windows(2) {
        acc += (w[1] - w[0]).norm();
        s.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::InvalidCurve("curve has zero length".into()));
    }
    for v in s.iter_mut() {
        *v /= acc;
    }
    let n = s.len();
    s[n - 1] = 1.0;
    let mut out = SampledCurve::new(s, curve.points.clone())?;
    out.arclength = true;
    Ok(out)
}

/// Arclength parametrization followed by spline resampling at `n_intervals + 1`
/// equally spaced arclength fractions.
pub fn resample_by_arclength(curve: &SampledCurve, n_intervals: usize) -> Result<SampledCurve> {
    let param = arclength_parametrize(curve)?;
    let mut out = param.resample(&numeric::uniform_grid(0.0, 1.0, n_intervals))?;
    out.arclength = true;
    Ok(out)
}

/// Tangent, normal, binormal, curvature and torsion at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrenetApparatus {
    pub s: Vec<f64>,
    pub points: Vec<Vector3<f64>>,
    pub tangent: Vec<Vector3<f64>>,
    pub normal: Vec<Vector3<f64>>,
    pub binormal: Vec<Vector3<f64>>,
    /// Curvature per unit length.
    pub kappa: Vec<f64>,
    /// Torsion per unit length.
    pub tau: Vec<f64>,
    /// `|dx/ds|`.
    pub speed: Vec<f64>,
}

impl FrenetApparatus {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `R_FS = [t, n, b]` at each sample.
    pub fn frames(&self) -> Vec<Rotation3> {
        (0..self.len())
            .map(|i| {
                Rotation3::project(&Matrix3::from_columns(&[
                    self.tangent[i],
                    self.normal[i],
                    self.binormal[i],
                ]))
            })
            .collect()
    }

    /// Curve length `int |dx/ds| ds`.
    pub fn length(&self) -> f64 {
        numeric::simpson(&self.s, &self.speed)
    }

    /// Curvature per unit parameter, `kappa |dx/ds|`.
    pub fn kappa_s(&self) -> Vec<f64> {
        self.kappa.iter().zip(&self.speed).map(|(k, v)| k * v).collect()
    }

    /// Torsion per unit parameter, `tau |dx/ds|`.
    pub fn tau_s(&self) -> Vec<f64> {
        self.tau.iter().zip(&self.speed).map(|(k, v)| k * v).collect()
    }

    /// Cumulative `int_0^s tau dsigma` (total torsion angle up to each sample).
    pub fn torsion_angle(&self) -> Vec<f64> {
        cumulative_simpson(&self.s, &self.tau_s())
    }

    /// Cumulative arclength fraction `sigma(s) / L`.
    pub fn arclength_fraction(&self) -> Vec<f64> {
        let c = cumulative_simpson(&self.s, &self.speed);
        let total = c[c.len() - 1];
        c.iter().map(|v| v / total).collect()
    }

    /// The apparatus interpolated at new parameter values. Frame vectors are
    /// spline-interpolated then re-orthonormalized.
    pub fn resample(&self, s_new: &[f64]) -> Result<FrenetApparatus> {
        let ps = component_splines(&self.s, &self.points)?;
        let ts = component_splines(&self.s, &self.tangent)?;
        let ns = component_splines(&self.s, &self.normal)?;
        let ks = CubicSpline::new(self.s.clone(), self.kappa.clone())?;
        let taus = CubicSpline::new(self.s.clone(), self.tau.clone())?;
        let vs = CubicSpline::new(self.s.clone(), self.speed.clone())?;
        let ev = |sp: &[CubicSpline], v: f64| Vector3::new(sp[0].eval(v), sp[1].eval(v), sp[2].eval(v));
        let mut out = FrenetApparatus {
            s: s_new.to_vec(),
            points: Vec::with_capacity(s_new.len()),
            tangent: Vec::with_capacity(s_new.len()),
            normal: Vec::with_capacity(s_new.len()),
            binormal: Vec::with_capacity(s_new.len()),
            kappa: Vec::with_capacity(s_new.len()),
            tau: Vec::with_capacity(s_new.len()),
            speed: Vec::with_capacity(s_new.len()),
        };
        for &v in s_new {
            let t = ev(&ts, v).normalize();
            let n0 = ev(&ns, v);
            let n = (n0 - t * t.dot(&n0)).normalize();
            out.points.push(ev(&ps, v));
            out.tangent.push(t);
            out.normal.push(n);
            out.binormal.push(t.cross(&n));
            out.kappa.push(ks.eval(v));
            out.tau.push(taus.eval(v));
            out.speed.push(vs.eval(v));
        }
        Ok(out)
    }
}

/// Cumulative integral, Simpson over interval pairs and trapezoid-corrected
/// midpoints, starting at zero.
fn cumulative_simpson(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 3 {
        return numeric::cumulative_trapezoid(grid, values);
    }
    let mut out = vec![0.0; n];
    for i in 1..n {
        // Quadratic through three neighbouring samples, integrated over [i-1, i].
        let (j0, j1, j2) = if i + 1 < n { (i - 1, i, i + 1) } else { (i - 2, i - 1, i) };
        out[i] = out[i - 1] + quad_piece(grid, values, (j0, j1, j2), grid[i - 1], grid[i]);
    }
    out
}

fn quad_piece(x: &[f64], y: &[f64], (a, b, c): (usize, usize, usize), lo: f64, hi: f64) -> f64 {
    // Lagrange basis integrated exactly with 3-point Gauss (exact for quadratics).
    let p = |t: f64| {
        let la = (t - x[b]) * (t - x[c]) / ((x[a] - x[b]) * (x[a] - x[c]));
        let lb = (t - x[a]) * (t - x[c]) / ((x[b] - x[a]) * (x[b] - x[c]));
        let lc = (t - x[a]) * (t - x[b]) / ((x[c] - x[a]) * (x[c] - x[b]));
        y[a] * la + y[b] * lb + y[c] * lc
    };
    let m = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let g = (0.6f64).sqrt();
    h * (5.0 * p(m - g * h) + 8.0 * p(m) + 5.0 * p(m + g * h)) / 9.0
}

/// Frenet apparatus by fourth-order five-point finite differences.
///
/// Torsion comes from `tau = -(db/dsigma) . n`. Errors when the curvature
/// drops below `KAPPA_MIN / length` at an interior sample.
pub fn frenet_apparatus(curve: &SampledCurve) -> Result<FrenetApparatus> {
    let n = curve.len();
    let dx = numeric::derivative5(&curve.s, &curve.points);
    let speed: Vec<f64> = dx.iter().map(|v| v.norm()).collect();
    if speed.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidCurve("zero velocity sample".into()));
    }
    let tangent: Vec<Vector3<f64>> = dx.iter().zip(&speed).map(|(d, v)| d / *v).collect();
    let dt = numeric::derivative5(&curve.s, &tangent);
    let length = curve.length();
    let floor = KAPPA_MIN / length;

    let mut kappa = vec![0.0; n];
    let mut normal = vec![None; n];
    for i in 0..n {
        let perp = dt[i] - tangent[i] * tangent[i].dot(&dt[i]);
        let k = perp.norm() / speed[i];
        kappa[i] = k;
        if k > floor {
            normal[i] = Some(perp / perp.norm());
        } else if i > 0 && i + 1 < n {
            return Err(Error::UndefinedNormal { index: i, kappa: k });
        }
    }
    // Endpoints may inherit the neighbouring normal, re-orthogonalized.
    for (end, nb) in [(0, 1), (n - 1, n - 2)] {
        if normal[end].is_none() {
            let m: Vector3<f64> = normal[nb].ok_or(Error::UndefinedNormal {
                index: end,
                kappa: kappa[end],
            })?;
            let t = tangent[end];
            normal[end] = Some((m - t * t.dot(&m)).normalize());
        }
    }
    let normal: Vec<Vector3<f64>> = normal.into_iter().map(|v| v.expect("normal set")).collect();
    let binormal: Vec<Vector3<f64>> = tangent.iter().zip(&normal).map(|(t, m)| t.cross(m)).collect();
    let db = numeric::derivative5(&curve.s, &binormal);
    let tau = (0..n).map(|i| -db[i].dot(&normal[i]) / speed[i]).collect();

    Ok(FrenetApparatus {
        s: curve.s.clone(),
        points: curve.points.clone(),
        tangent,
        normal,
        binormal,
        kappa,
        tau,
        speed,
    })
}

/// Roll angle `theta` about the tangent and its rate `dtheta/ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct RollProfile {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub dtheta: Vec<f64>,
}

impl RollProfile {
    pub fn new(s: Vec<f64>, theta: Vec<f64>, dtheta: Vec<f64>) -> Result<Self> {
        numeric::check_grid(&s)?;
        if theta.len() != s.len() || dtheta.len() != s.len() {
            return Err(Error::InvalidInput("roll profile length mismatch".into()));
        }
        if theta.iter().chain(&dtheta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("roll profile has non-finite values".into()));
        }
        Ok(Self { s, theta, dtheta })
    }

    /// Rates estimated by finite differences.
    pub fn from_samples(s: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let dtheta = numeric::derivative(&s, &theta);
        Self::new(s, theta, dtheta)
    }

    pub fn zero(s: &[f64]) -> Self {
        Self {
            s: s.to_vec(),
            theta: vec![0.0; s.len()],
            dtheta: vec![0.0; s.len()],
        }
    }
}

/// Minimal twist `theta(s) = theta0 + c2 u(s) - int_0^s tau dsigma` with
/// `u` the arclength fraction. Without `theta1`, `c2 = 0` and
/// `dtheta/dsigma = -tau`; with it, `c2 = theta1 - theta0 + int tau`.
pub fn minimal_twist(app: &FrenetApparatus, theta0: f64, theta1: Option<f64>) -> RollProfile {
    let total_torsion = app.torsion_angle();
    let u = app.arclength_fraction();
    let n = app.len();
    let big_t = total_torsion[n - 1];
    let c2 = theta1.map_or(0.0, |t1| t1 - theta0 + big_t);
    let length = app.length();
    let mut theta: Vec<f64> = (0..n).map(|i| theta0 + c2 * u[i] - total_torsion[i]).collect();
    if let Some(t1) = theta1 {
        theta[n - 1] = t1;
    }
    theta[0] = theta0;
    let dtheta = (0..n)
        .map(|i| (c2 / length - app.tau[i]) * app.speed[i])
        .collect();
    RollProfile {
        s: app.s.clone(),
        theta,
        dtheta,
    }
}

/// Curve frames `R_FS R1(theta)` with their apparatus and roll.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub apparatus: FrenetApparatus,
    pub roll: RollProfile,
    pub rotations: Vec<Rotation3>,
}

/// Rotation by `theta` about the first axis.
pub fn roll_rotation(theta: f64) -> Rotation3 {
    lie::exp_so3(&Vector3::new(theta, 0.0, 0.0))
}

impl FrameField {
    pub fn new(apparatus: FrenetApparatus, roll: RollProfile) -> Result<Self> {
        if roll.s.len() != apparatus.len() {
            return Err(Error::InvalidInput("roll and curve grids differ".into()));
        }
        let rotations = apparatus
            .frames()
            .iter()
            .zip(&roll.theta)
            .map(|(r, &th)| r * &roll_rotation(th))
            .collect();
        Ok(Self {
            apparatus,
            roll,
            rotations,
        })
    }

    /// Frenet frames, no roll.
    pub fn frenet(apparatus: FrenetApparatus) -> Self {
        let roll = RollProfile::zero(&apparatus.s);
        Self::new(apparatus, roll).expect("grids agree")
    }

    /// `|omega_s|^2 = (kappa^2 + (tau + dtheta/dsigma)^2) |dx/ds|^2` per sample.
    pub fn rotation_rate_squared(&self) -> Vec<f64> {
        let a = &self.apparatus;
        (0..a.len())
            .map(|i| {
                let k = a.kappa[i] * a.speed[i];
                let twist = a.tau[i] * a.speed[i] + self.roll.dtheta[i];
                k * k + twist * twist
            })
            .collect()
    }

    /// Body angular velocity per unit parameter, from consecutive frames.
    pub fn discrete_body_rates(&self) -> Result<Vec<Vector3<f64>>> {
        self.rotations
            .windows(2)
            .zip(self.apparatus.s.windows(2))
            .map(|(r, s)| Ok(lie::log_so3(&(r[0].transpose() * r[1]))? / (s[1] - s[0])))
            .collect()
    }
}

/// `int [kappa^2 + (tau + dtheta/dsigma)^2] dsigma`, i.e. `1/2 int tr(R' R'^T)`
/// per unit length.
pub fn frame_cost(field: &FrameField) -> f64 {
    let a = &field.apparatus;
    let integrand: Vec<f64> = field
        .rotation_rate_squared()
        .iter()
        .zip(&a.speed)
        .map(|(w, v)| w / v)
        .collect();
    numeric::simpson(&a.s, &integrand)
}

/// Density `r^2 |omega_s|^2 + |x_s|^2` of the frame reparametrization problem.
pub fn frame_density(field: &FrameField, r: f64) -> Result<ScalarDensity> {
    let a = &field.apparatus;
    let m = field
        .rotation_rate_squared()
        .iter()
        .zip(&a.speed)
        .map(|(w, v)| r * r * w + v * v)
        .collect();
    let s0 = a.s[0];
    let span = a.s[a.len() - 1] - s0;
    let s = a.s.iter().map(|v| (v - s0) / span).collect();
    ScalarDensity::tabulated(s, m)
}

/// Optimal reparametrization `s*(t)` of a framed curve.
pub fn reparam_frames(field: &FrameField, r: f64) -> Result<MonotoneMap> {
    check_length_scale(r)?;
    reparam::solve_reparam(&frame_density(field, r)?, field.apparatus.len() - 1)
}

fn check_length_scale(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("length scale r must be positive, got {r}")));
    }
    Ok(())
}

/// Output of [`joint_roll_reparam`]: everything sampled on the uniform `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    /// `s*(t)`.
    pub map: MonotoneMap,
    /// `ds*/dt`.
    pub sdot: Vec<f64>,
    /// `theta*(t)` with `dtheta*/dt`.
    pub roll: RollProfile,
    /// Frames `R_FS(s*(t)) R1(theta*(t))`; the apparatus is resampled at `s*(t)`.
    pub field: FrameField,
}

/// Jointly optimal reparametrization and roll for
/// `C = 1/2 int [(r^2 kappa_s^2 + |x_s|^2) sdot^2 + r^2 (tau_s sdot + thetadot)^2] dt`.
///
/// The roll term is annihilated by `thetadot = a - tau_s(s) sdot`, leaving the
/// 1D problem with `m = r^2 kappa_s^2 + |x_s|^2`; `a` is fixed by the roll
/// boundary values. `s` runs from its first to last sample.
pub fn joint_roll_reparam(app: &FrenetApparatus, r: f64, theta0: f64, theta1: f64) -> Result<JointSolution> {
    check_length_scale(r)?;
    let n = app.len();
    let s0 = app.s[0];
    let span = app.s[n - 1] - s0;
    let unit_s: Vec<f64> = app.s.iter().map(|v| (v - s0) / span).collect();
    let ks = app.kappa_s();
    let m: Vec<f64> = ks
        .iter()
        .zip(&app.speed)
        .map(|(k, v)| (r * r * k * k + v * v) * span * span)
        .collect();
    let density = ScalarDensity::tabulated(unit_s.clone(), m)?;
    let unit_map = reparam::solve_reparam(&density, n - 1)?;
    let s_of_t: Vec<f64> = unit_map.y().iter().map(|u| s0 + span * u).collect();
    let t = unit_map.x().to_vec();

    // sdot from the first integral sqrt(m(s)) sdot = F(1), exact on the optimum.
    let c1 = reparam::optimal_cost(&density)?.sqrt();
    let sdot_unit: Vec<f64> = unit_map.y().iter().map(|&u| c1 / density.eval(u).sqrt()).collect();
    let sdot: Vec<f64> = sdot_unit.iter().map(|v| v * span).collect();

    let torsion = app.torsion_angle();
    let torsion_spline = CubicSpline::new(app.s.clone(), torsion.clone())?;
    let tau_s_spline = CubicSpline::new(app.s.clone(), app.tau_s())?;
    let a = theta1 - theta0 + torsion[n - 1];
    let mut theta: Vec<f64> = t
        .iter()
        .zip(&s_of_t)
        .map(|(&ti, &si)| theta0 + a * ti - torsion_spline.eval(si))
        .collect();
    theta[0] = theta0;
    theta[n - 1] = theta1;
    let dtheta = s_of_t
        .iter()
        .zip(&sdot)
        .map(|(&si, &sd)| a - tau_s_spline.eval(si) * sd)
        .collect();
    let roll = RollProfile::new(t.clone(), theta, dtheta)?;

    let resampled = app.resample(&s_of_t)?;
    let rotations = resampled
        .frames()
        .iter()
        .zip(&roll.theta)
        .map(|(rf, &th)| rf * &roll_rotation(th))
        .collect();
    let dtheta_ds = roll.dtheta.iter().zip(&sdot).map(|(d, sd)| d / sd).collect();
    let field_roll = RollProfile::new(s_of_t.clone(), roll.theta.clone(), dtheta_ds)?;
    Ok(JointSolution {
        map: unit_map,
        sdot,
        roll,
        field: FrameField {
            apparatus: resampled,
            roll: field_roll,
            rotations,
        },
    })
}

/// Evaluates the joint cost for arbitrary `(s(t), theta(t))` with their rates.
pub struct JointCost {
    r: f64,
    s_lo: f64,
    s_hi: f64,
    kappa_s: CubicSpline,
    tau_s: CubicSpline,
    speed: CubicSpline,
}

impl JointCost {
    pub fn new(app: &FrenetApparatus, r: f64) -> Result<Self> {
        check_length_scale(r)?;
        Ok(Self {
            r,
            s_lo: app.s[0],
            s_hi: app.s[app.len() - 1],
            kappa_s: CubicSpline::new(app.s.clone(), app.kappa_s())?,
            tau_s: CubicSpline::new(app.s.clone(), app.tau_s())?,
            speed: CubicSpline::new(app.s.clone(), app.speed.clone())?,
        })
    }

    /// Integrand at one instant. Errors when `s` leaves the curve.
    pub fn integrand(&self, s: f64, sdot: f64, thetadot: f64) -> Result<f64> {
        let tol = 1e-12 * (self.s_hi - self.s_lo);
        if s < self.s_lo - tol || s > self.s_hi + tol {
            return Err(Error::Domain(format!("parameter {s} leaves the curve")));
        }
        let k = self.kappa_s.eval(s);
        let tau = self.tau_s.eval(s);
        let v = self.speed.eval(s);
        let r2 = self.r * self.r;
        let twist = tau * sdot + thetadot;
        Ok(0.5 * ((r2 * k * k + v * v) * sdot * sdot + r2 * twist * twist))
    }

    /// Simpson integral over the samples.
    pub fn cost(&self, t: &[f64], s: &[f64], sdot: &[f64], thetadot: &[f64]) -> Result<f64> {
        let vals = (0..t.len())
            .map(|i| self.integrand(s[i], sdot[i], thetadot[i]))
            .collect::<Result<Vec<f64>>>()?;
        Ok(numeric::simpson(t, &vals))
    }
}

/// Roll then speed, each solved on its own: the unconstrained minimal twist
/// along arclength followed by the optimal reparametrization of those frames.
/// Returns `s*(t)` and `theta(s*(t))`.
pub fn sequential_roll_then_reparam(app: &FrenetApparatus, r: f64, theta0: f64) -> Result<(MonotoneMap, Vec<f64>)> {
    let roll = minimal_twist(app, theta0, None);
    let field = FrameField::new(app.clone(), roll.clone())?;
    let map = reparam_frames(&field, r)?;
    let theta_spline = CubicSpline::new(app.s.clone(), roll.theta)?;
    let s0 = app.s[0];
    let span = app.s[app.len() - 1] - s0;
    let theta = map.y().iter().map(|u| theta_spline.eval(s0 + span * u)).collect();
    Ok((map, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn helix(k: usize) -> SampledCurve {
        let c = 2f64.sqrt();
        let mut curve = SampledCurve::from_fn(0.0, 1.0, k, |s| {
            Vector3::new((s / c).cos(), (s / c).sin(), s / c)
        })
        .unwrap();
        curve.arclength = true;
        curve
    }

    #[test]
    fn helix_curvature_and_torsion() {
        let app = frenet_apparatus(&helix(2000)).unwrap();
        for i in 0..app.len() {
            assert!((app.kappa[i] - 0.5).abs() < 1e-4, "kappa[{i}] = {}", app.kappa[i]);
            assert!((app.tau[i] - 0.5).abs() < 1e-4, "tau[{i}] = {}", app.tau[i]);
        }
    }

    #[test]
    fn frames_are_right_handed() {
        let app = frenet_apparatus(&helix(200)).unwrap();
        for r in app.frames() {
            assert!(r.orthonormality_error() < 1e-8);
            assert!((r.matrix().determinant() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn straight_line_has_no_normal() {
        let line = SampledCurve::from_fn(0.0, 1.0, 50, |s| Vector3::new(s, 2.0 * s, 0.0)).unwrap();
        assert!(matches!(
            frenet_apparatus(&line),
            Err(Error::UndefinedNormal { .. })
        ));
    }

    #[test]
    fn repeated_points_rejected() {
        let p = vec![Vector3::zeros(), Vector3::zeros(), Vector3::x()];
        assert!(matches!(
            SampledCurve::new(vec![0.0, 0.5, 1.0], p),
            Err(Error::InvalidCurve(_))
        ));
    }

    #[test]
    fn helix_twist_profiles() {
        let app = frenet_apparatus(&helix(1000)).unwrap();
        let free = minimal_twist(&app, 0.0, None);
        for (s, th) in free.s.iter().zip(&free.theta) {
            assert!((th + 0.5 * s).abs() < 1e-6);
        }
        let pinned = minimal_twist(&app, 0.0, Some(0.0));
        assert!(pinned.theta.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn helix_frame_costs() {
        let app = frenet_apparatus(&helix(1000)).unwrap();
        let frenet = FrameField::frenet(app.clone());
        assert_relative_eq!(frame_cost(&frenet), 0.5, epsilon = 1e-5);
        let twisted = FrameField::new(app.clone(), minimal_twist(&app, 0.0, None)).unwrap();
        assert_relative_eq!(frame_cost(&twisted), 0.25, epsilon = 1e-5);
    }

    #[test]
    fn helix_frenet_reparam_is_identity() {
        let app = frenet_apparatus(&helix(400)).unwrap();
        let map = reparam_frames(&FrameField::frenet(app), 1.0).unwrap();
        assert!(map.max_deviation_from_identity() < 1e-5);
    }

    #[test]
    fn cumulative_simpson_exact_for_quadratics() {
        let g = vec![0.0, 0.1, 0.35, 0.5, 0.9, 1.0];
        let v: Vec<f64> = g.iter().map(|x| 3.0 * x * x - x + 2.0).collect();
        let c = cumulative_simpson(&g, &v);
        for (x, ci) in g.iter().zip(&c) {
            assert_relative_eq!(*ci, x * x * x - 0.5 * x * x + 2.0 * x, epsilon = 1e-14);
        }
    }
}
