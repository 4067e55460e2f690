//! Batch front end. Every subcommand reads and writes plain CSV; summaries and
//! reports go to stdout as `key=value` lines.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DVector, Vector2, Vector3};
use varboot::euler_poincare::{self as ep, InertiaSpec};
use varboot::frenet::{self, SampledCurve};
use varboot::hyperbolic::{self, HalfPlanePath};
use varboot::io;
use varboot::lie::{self, Pose, Rotation3};
use varboot::metric::{HalfSpace, Trajectory};
use varboot::reparam::{self, ScalarDensity};
use varboot::verify::{self, OptimalityReport, Perturbation, PerturbationBasis};
use varboot::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "varboot", version, about = "Optimal paths, frames and timings on manifolds and Lie groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curve CSV to Frenet frames plus the minimal-twist roll.
    Frame(FrameArgs),
    /// Optimal map for a density (built-in name or `s,m` CSV).
    Reparam(ReparamArgs),
    /// Retime a sampled path to constant speed.
    Warp(WarpArgs),
    /// Joint roll and speed along a curve.
    Joint(JointArgs),
    /// Rotation geodesic between two rotation vectors.
    #[command(name = "interp-so3")]
    InterpSo3(InterpArgs),
    /// Rotation geodesic with straight-line translation.
    #[command(name = "interp-pose")]
    InterpPose(InterpArgs),
    /// Screw motion (one-parameter subgroup of SE(3)).
    #[command(name = "interp-se3")]
    InterpSe3(InterpArgs),
    /// Half-plane geodesic between two points.
    #[command(name = "geodesic-h2")]
    GeodesicH2(H2Args),
    /// Compare the exponential ansatz with the geodesic.
    #[command(name = "ansatz-h2")]
    AnsatzH2(AnsatzArgs),
    /// Integrate the rigid-body equations with an optional rate offset.
    #[command(name = "euler-top")]
    EulerTop(TopArgs),
    /// Randomized optimality check of a candidate CSV.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Resample to this many arclength intervals first.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta0: f64,
    /// Pin the final roll; free when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReparamArgs {
    /// Built-in name (`one`, `four`, `quadratic`, `exp`, `bump`, `ramp`) or a CSV path.
    #[arg(long)]
    pub density: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the timing map.
    #[arg(long)]
    pub map_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JointArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta0: f64,
    /// Final roll; defaults to the value the free minimal twist reaches.
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    /// Start: `rx,ry,rz` rotation vector, optionally followed by `,px,py,pz`.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Floats,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: Floats,
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct H2Args {
    /// `x1,x2` with `x2 > 0`.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Floats,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: Floats,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnsatzArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Floats,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: Floats,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Steering rates to sweep, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub omegas: Option<Floats>,
    /// Write the unsteered ansatz path here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TopArgs {
    /// Principal moments `i1,i2,i3`.
    #[arg(long, default_value = "1,1,1")]
    pub inertia: Floats,
    /// Initial body rate.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Floats,
    /// Rate offset `omega0` in the cost.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
    pub offset: Floats,
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostKind {
    /// `int |qdot|^2` over a `t,x0,...` path.
    Euclidean,
    /// `int |xdot|^2 / x2^2` over a `t,x1,x2` path.
    Halfplane,
    /// `int m(y) y'^2` over an `x,y` map.
    Density,
    /// `int 1/2 (omega - omega0)^T I (omega - omega0)` over a body-rate CSV with attitude columns.
    So3,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Cost to test against; inferred from the header when omitted.
    #[arg(long, value_enum)]
    pub cost: Option<CostKind>,
    /// Density for `--cost density`: built-in name or CSV path.
    #[arg(long)]
    pub density: Option<String>,
    /// Rate offset for `--cost so3`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
    pub offset: Floats,
    /// Principal moments for `--cost so3`.
    #[arg(long, default_value = "1,1,1")]
    pub inertia: Floats,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Overall perturbation amplitude.
    #[arg(long, default_value_t = 0.1)]
    pub scale: f64,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Comma-separated numbers such as `0.5,-1,2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Floats(pub Vec<f64>);

impl std::str::FromStr for Floats {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map(Floats)
    }
}

impl std::ops::Deref for Floats {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn want_len(name: &str, v: &[f64], n: &[usize]) -> Result<()> {
    if n.contains(&v.len()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("--{name} needs {n:?} values, got {}", v.len())))
    }
}

fn check_grid(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("--grid must be at least 2, got {k}")));
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn density_from(spec: &str) -> Result<ScalarDensity> {
    if let Some(m) = ScalarDensity::builtin(spec) {
        return Ok(m);
    }
    let p = Path::new(spec);
    if p.exists() {
        return io::read_density(open(p)?);
    }
    Err(Error::InvalidInput(format!(
        "unknown density `{spec}`: not one of {:?} and not a file",
        reparam::BUILTIN_DENSITIES
    )))
}

fn read_curve(path: &Path, grid: Option<usize>) -> Result<SampledCurve> {
    let curve = io::read_curve(open(path)?)?;
    match grid {
        Some(k) => {
            check_grid(k)?;
            frenet::resample_by_arclength(&curve, k)
        }
        None => Ok(curve),
    }
}

fn kv(out: &mut dyn Write, key: &str, v: f64) -> Result<()> {
    writeln!(out, "{key}={v:.16e}").map_err(|e| Error::Io(e.to_string()))
}

fn say(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::Io(e.to_string()))
}

fn frame(a: &FrameArgs, out: &mut dyn Write) -> Result<i32> {
    let app = frenet::frenet_apparatus(&read_curve(&a.input, a.grid)?)?;
    let roll = frenet::minimal_twist(&app, a.theta0, a.theta1);
    io::write_frames(create(&a.out)?, &app, &roll.theta)?;
    kv(out, "length", app.length())?;
    kv(out, "kappa_min", app.kappa.iter().copied().fold(f64::INFINITY, f64::min))?;
    kv(out, "kappa_max", app.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max))?;
    kv(out, "tau_min", app.tau.iter().copied().fold(f64::INFINITY, f64::min))?;
    kv(out, "tau_max", app.tau.iter().copied().fold(f64::NEG_INFINITY, f64::max))?;
    Ok(EXIT_OK)
}

fn reparam_cmd(a: &ReparamArgs, out: &mut dyn Write) -> Result<i32> {
    check_grid(a.grid)?;
    let m = density_from(&a.density)?;
    let map = reparam::solve_reparam(&m, a.grid)?;
    io::write_map(create(&a.out)?, &map)?;
    kv(out, "j_star", reparam::optimal_cost(&m)?)?;
    kv(out, "path_cost", reparam::path_cost(&m, &map))?;
    Ok(EXIT_OK)
}

fn warp(a: &WarpArgs, out: &mut dyn Write) -> Result<i32> {
    let path = io::read_sampled_path(open(&a.input)?)?;
    let (map, warped) = reparam::warp_trajectory(&path)?;
    io::write_sampled_path(create(&a.out)?, &warped)?;
    if let Some(p) = &a.map_out {
        io::write_map(create(p)?, &map)?;
    }
    kv(out, "length", path.length())?;
    kv(out, "max_deviation_from_identity", map.max_deviation_from_identity())?;
    Ok(EXIT_OK)
}

const JOINT_HEADER: &[&str] = &["t", "s", "sdot", "theta", "dtheta"];

fn joint(a: &JointArgs, out: &mut dyn Write) -> Result<i32> {
    let app = frenet::frenet_apparatus(&read_curve(&a.input, a.grid)?)?;
    let theta1 = match a.theta1 {
        Some(v) => v,
        None => a.theta0 - app.torsion_angle()[app.len() - 1],
    };
    let sol = frenet::joint_roll_reparam(&app, a.r, a.theta0, theta1)?;
    let s = &sol.field.apparatus.s;
    let rows: Vec<Vec<f64>> = (0..s.len())
        .map(|i| vec![sol.roll.s[i], s[i], sol.sdot[i], sol.roll.theta[i], sol.roll.dtheta[i]])
        .collect();
    io::write_table(create(&a.out)?, JOINT_HEADER, &rows)?;
    let cost = frenet::JointCost::new(&app, a.r)?.cost(&sol.roll.s, s, &sol.sdot, &sol.roll.dtheta)?;
    kv(out, "theta1", theta1)?;
    kv(out, "cost", cost)?;
    Ok(EXIT_OK)
}

fn pose_of(name: &str, v: &[f64]) -> Result<Pose> {
    want_len(name, v, &[3, 6])?;
    let rotation = lie::exp_so3(&Vector3::new(v[0], v[1], v[2]));
    let translation = if v.len() == 6 { Vector3::new(v[3], v[4], v[5]) } else { Vector3::zeros() };
    Ok(Pose::new(rotation, translation))
}

const POSE_HEADER: &[&str] = &[
    "t", "R00", "R01", "R02", "R10", "R11", "R12", "R20", "R21", "R22", "px", "py", "pz",
];

fn pose_row(t: f64, g: &Pose) -> Vec<f64> {
    let mut row = vec![t];
    let m = g.rotation.matrix();
    for i in 0..3 {
        for j in 0..3 {
            row.push(m[(i, j)]);
        }
    }
    row.extend(g.translation.iter());
    row
}

#[derive(Clone, Copy)]
enum Interp {
    So3,
    Direct,
    Se3,
}

fn interp(a: &InterpArgs, kind: Interp, out: &mut dyn Write) -> Result<i32> {
    check_grid(a.grid)?;
    let (g0, g1) = (pose_of("q0", &a.q0)?, pose_of("q1", &a.q1)?);
    let t = varboot::numeric::uniform_grid(0.0, 1.0, a.grid);
    match kind {
        Interp::So3 => {
            let w = lie::geodesic_so3_velocity(&g0.rotation, &g1.rotation)?;
            let rots = t
                .iter()
                .map(|&s| lie::geodesic_so3(&g0.rotation, &g1.rotation, s))
                .collect::<Result<Vec<_>>>()?;
            let path = ep::BodyVelocityPath::new(t.clone(), vec![w; t.len()], Some(rots))?;
            io::write_body_velocity(create(&a.out)?, &path)?;
            kv(out, "angle", w.norm())?;
            kv(out, "cost", 0.5 * w.norm_squared())?;
        }
        Interp::Direct | Interp::Se3 => {
            let poses = t
                .iter()
                .map(|&s| match kind {
                    Interp::Direct => lie::geodesic_pose_direct(&g0, &g1, s),
                    _ => lie::geodesic_se3(&g0, &g1, s),
                })
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<f64>> = t.iter().zip(&poses).map(|(&s, g)| pose_row(s, g)).collect();
            io::write_table(create(&a.out)?, POSE_HEADER, &rows)?;
            let mid = poses[poses.len() / 2].translation;
            let chord_mid = (g0.translation + g1.translation) * 0.5;
            kv(out, "midpoint_offset_from_chord", (mid - chord_mid).norm())?;
            if let Interp::Se3 = kind {
                let xi = lie::geodesic_se3_twist(&g0, &g1)?;
                kv(out, "cost", 0.5 * xi.norm_squared())?;
            } else {
                let w = lie::geodesic_so3_velocity(&g0.rotation, &g1.rotation)?;
                kv(out, "cost", 0.5 * (w.norm_squared() + (g1.translation - g0.translation).norm_squared()))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn point2(name: &str, v: &[f64]) -> Result<Vector2<f64>> {
    want_len(name, v, &[2])?;
    Ok(Vector2::new(v[0], v[1]))
}

fn geodesic_h2(a: &H2Args, out: &mut dyn Write) -> Result<i32> {
    check_grid(a.grid)?;
    let (p0, p1) = (point2("q0", &a.q0)?, point2("q1", &a.q1)?);
    let path = hyperbolic::geodesic_h2_path(&p0, &p1, a.grid)?;
    io::write_halfplane_path(create(&a.out)?, &path)?;
    let (params, t0, t1) = hyperbolic::geodesic_h2_bvp(&p0, &p1)?;
    let report = hyperbolic::curvature_report(&HalfSpace { dim: 2 }, &DVector::from_vec(vec![p0.x, p0.y]), 1e-4)?;
    kv(out, "a", params.a)?;
    kv(out, "b", params.b)?;
    kv(out, "c", params.c)?;
    kv(out, "d", params.d)?;
    kv(out, "t0", t0)?;
    kv(out, "t1", t1)?;
    kv(out, "length", t1 - t0)?;
    kv(out, "cost", hyperbolic::hyperbolic_cost(&path)?)?;
    kv(out, "k0", report.k0)?;
    kv(out, "curvature_residual", report.residual)?;
    Ok(EXIT_OK)
}

fn ansatz_h2(a: &AnsatzArgs, out: &mut dyn Write) -> Result<i32> {
    check_grid(a.grid)?;
    let (p0, p1) = (point2("q0", &a.q0)?, point2("q1", &a.q1)?);
    let geo = hyperbolic::hyperbolic_cost(&hyperbolic::geodesic_h2_path(&p0, &p1, a.grid)?)?;
    let ans_path = hyperbolic::ansatz_h2(&p0, &p1, a.grid)?;
    let ans = hyperbolic::hyperbolic_cost(&ans_path)?;
    if let Some(p) = &a.out {
        io::write_halfplane_path(create(p)?, &ans_path)?;
    }
    kv(out, "geodesic_cost", geo)?;
    kv(out, "ansatz_cost", ans)?;
    kv(out, "excess", ans - geo)?;
    if let Some(ws) = &a.omegas {
        for s in hyperbolic::steering_sweep(&p0, &p1, ws, a.grid)? {
            say(out, &format!("steered omega0={:.16e} cost={:.16e}", s.omega0, s.cost))?;
        }
    }
    Ok(EXIT_OK)
}

fn vec3(name: &str, v: &[f64]) -> Result<Vector3<f64>> {
    want_len(name, v, &[3])?;
    Ok(Vector3::new(v[0], v[1], v[2]))
}

fn euler_top(a: &TopArgs, out: &mut dyn Write) -> Result<i32> {
    let d = vec3("inertia", &a.inertia)?;
    let spec = InertiaSpec::diagonal([d.x, d.y, d.z])?.with_offset(vec3("offset", &a.offset)?);
    let w0 = vec3("omega", &a.omega)?;
    let path = ep::ep_integrate_so3(&spec, &w0, &Rotation3::identity(), a.duration, a.dt)?;
    io::write_body_velocity(create(&a.out)?, &path)?;
    let e0 = spec.energy(&w0);
    let drift = path.omega.iter().map(|w| (spec.energy(w) - e0).abs()).fold(0.0, f64::max);
    kv(out, "energy", e0)?;
    kv(out, "energy_drift", drift)?;
    kv(out, "steps", (path.len() - 1) as f64)?;
    Ok(EXIT_OK)
}

fn infer_cost(headers: &[String]) -> Result<CostKind> {
    let h: Vec<&str> = headers.iter().map(String::as_str).collect();
    if h == io::HALFPLANE_HEADER {
        Ok(CostKind::Halfplane)
    } else if h == io::MAP_HEADER {
        Ok(CostKind::Density)
    } else if h == io::BODY_HEADER_WITH_R {
        Ok(CostKind::So3)
    } else if h.first() == Some(&"t") && h.len() >= 2 && h[1] == "x0" {
        Ok(CostKind::Euclidean)
    } else {
        Err(Error::Validation {
            row: 1,
            column: 1,
            message: format!("cannot infer a cost from header `{}`; pass --cost", h.join(",")),
        })
    }
}

fn header_of(path: &Path) -> Result<Vec<String>> {
    let mut line = String::new();
    open(path)?
        .read_line(&mut line)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if line.trim().is_empty() {
        return Err(Error::Validation {
            row: 1,
            column: 1,
            message: "empty file, header expected".into(),
        });
    }
    Ok(line.trim().split(',').map(|h| h.trim().to_string()).collect())
}

fn so3_cost(rots: &[Rotation3], t: &[f64], spec: &InertiaSpec, eps: &Perturbation) -> Result<f64> {
    let moved: Vec<Rotation3> = rots
        .iter()
        .zip(t)
        .map(|(r, &ti)| {
            let e = eps.eval(ti);
            *r * lie::exp_so3(&Vector3::new(e[0], e[1], e[2]))
        })
        .collect();
    let mut acc = 0.0;
    for i in 0..moved.len() - 1 {
        let h = t[i + 1] - t[i];
        let w = lie::log_so3(&(moved[i].transpose() * moved[i + 1]))? / h;
        acc += h * spec.cost_integrand(&w);
    }
    Ok(acc)
}

fn halfplane_traj(p: &HalfPlanePath) -> Result<Trajectory> {
    Trajectory::new(
        p.t.clone(),
        p.x.iter().map(|x| DVector::from_vec(vec![x.x, x.y])).collect(),
        p.xdot.iter().map(|v| DVector::from_vec(vec![v.x, v.y])).collect(),
    )
}

pub fn verify_report(a: &VerifyArgs) -> Result<OptimalityReport> {
    let kind = match a.cost {
        Some(k) => k,
        None => infer_cost(&header_of(&a.input)?)?,
    };
    let basis = PerturbationBasis::new(verify::DEFAULT_MODES, a.scale, a.seed)?;
    let sq = |_: &DVector<f64>, qd: &DVector<f64>, _: f64| Ok(qd.norm_squared());
    match kind {
        CostKind::Euclidean => {
            let p = io::read_sampled_path(open(&a.input)?)?;
            let traj = Trajectory::from_samples(p.t.clone(), p.points.clone())?;
            verify::perturbation_test_trajectory(&traj, sq, &basis, a.trials, a.tol)
        }
        CostKind::Halfplane => {
            let traj = halfplane_traj(&io::read_halfplane_path(open(&a.input)?)?)?;
            verify::perturbation_test_trajectory(
                &traj,
                |q, qd, _| {
                    if !(q[1] > 0.0) {
                        return Err(Error::Domain(format!("x2 = {} left the half-plane", q[1])));
                    }
                    Ok(qd.norm_squared() / (q[1] * q[1]))
                },
                &basis,
                a.trials,
                a.tol,
            )
        }
        CostKind::Density => {
            let spec = a
                .density
                .as_deref()
                .ok_or_else(|| Error::InvalidInput("--cost density needs --density".into()))?;
            let m = density_from(spec)?;
            let map = io::read_map(open(&a.input)?)?;
            let q = map.y().iter().map(|&y| DVector::from_vec(vec![y])).collect();
            let traj = Trajectory::from_samples(map.x().to_vec(), q)?;
            verify::perturbation_test_trajectory(
                &traj,
                |q, qd, _| {
                    if !(0.0..=1.0).contains(&q[0]) {
                        return Err(Error::Domain(format!("y = {} left [0, 1]", q[0])));
                    }
                    Ok(m.eval(q[0]) * qd[0] * qd[0])
                },
                &basis,
                a.trials,
                a.tol,
            )
        }
        CostKind::So3 => {
            let path = io::read_body_velocity(open(&a.input)?)?;
            let rots = path.rotation.ok_or_else(|| Error::Validation {
                row: 1,
                column: 5,
                message: "so3 cost needs the R00..R22 attitude columns".into(),
            })?;
            let d = vec3("inertia", &a.inertia)?;
            let spec = InertiaSpec::diagonal([d.x, d.y, d.z])?.with_offset(vec3("offset", &a.offset)?);
            let (t0, t1) = (path.t[0], path.t[path.t.len() - 1]);
            verify::perturbation_test(
                |eps| so3_cost(&rots, &path.t, &spec, eps),
                3,
                t0,
                t1,
                &basis,
                a.trials,
                a.tol,
            )
        }
    }
}

fn verify_cmd(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let report = verify_report(a)?;
    let text = report.to_text();
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        w.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_VIOLATION })
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Frame(a) => frame(a, out),
        Command::Reparam(a) => reparam_cmd(a, out),
        Command::Warp(a) => warp(a, out),
        Command::Joint(a) => joint(a, out),
        Command::InterpSo3(a) => interp(a, Interp::So3, out),
        Command::InterpPose(a) => interp(a, Interp::Direct, out),
        Command::InterpSe3(a) => interp(a, Interp::Se3, out),
        Command::GeodesicH2(a) => geodesic_h2(a, out),
        Command::AnsatzH2(a) => ansatz_h2(a, out),
        Command::EulerTop(a) => euler_top(a, out),
        Command::Verify(a) => verify_cmd(a, out),
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_VALIDATION
        }
    }
}
