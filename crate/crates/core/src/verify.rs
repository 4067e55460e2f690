//! Randomized falsification of optimality claims.
//!
//! A candidate is perturbed by zero-endpoint sine series and, for
//! energy-conserving candidates, retimed by random monotone maps. A global
//! minimizer never gets cheaper; every cheaper trial is reported as a
//! violation.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{kinetic_energy, Metric, Trajectory};
use crate::numeric::{self, MonotoneCubic};
use crate::reparam::MonotoneMap;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MODES: usize = 12;
/// Amplitude halvings allowed before a trial is skipped.
pub const MAX_RETRIES: usize = 5;

/// Independent stream for one trial; parallel and serial runs agree.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationBasis {
    pub modes: usize,
    pub scale: f64,
    pub seed: u64,
}

impl PerturbationBasis {
    pub fn new(modes: usize, scale: f64, seed: u64) -> Result<Self> {
        if modes == 0 || !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!(
                "basis needs modes >= 1 and positive scale (got {modes}, {scale})"
            )));
        }
        Ok(Self { modes, scale, seed })
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            modes: DEFAULT_MODES,
            scale: 0.1,
            seed,
        }
    }

    /// `a_k = scale * U(-1, 1) / k`, per component.
    pub fn draw<R: Rng>(&self, rng: &mut R, dim: usize, t0: f64, t1: f64, amplitude: f64) -> Perturbation {
        let coeffs = (1..=self.modes)
            .map(|k| {
                DVector::from_fn(dim, |_, _| amplitude * self.scale * rng.random_range(-1.0..1.0) / k as f64)
            })
            .collect();
        Perturbation { coeffs, t0, t1 }
    }
}

/// `eps(t) = sum_k a_k sin(k pi u)` with `u = (t - t0) / (t1 - t0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub coeffs: Vec<DVector<f64>>,
    pub t0: f64,
    pub t1: f64,
}

impl Perturbation {
    pub fn zero(dim: usize, t0: f64, t1: f64) -> Self {
        Self {
            coeffs: vec![DVector::zeros(dim)],
            t0,
            t1,
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.first().map_or(0, |c| c.len())
    }

    fn phase(&self, t: f64) -> f64 {
        std::f64::consts::PI * (t - self.t0) / (self.t1 - self.t0)
    }

    /// Exactly zero at both endpoints.
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        if t <= self.t0 || t >= self.t1 {
            return out;
        }
        let ph = self.phase(t);
        for (k, a) in self.coeffs.iter().enumerate() {
            out.axpy(((k + 1) as f64 * ph).sin(), a, 1.0);
        }
        out
    }

    pub fn rate(&self, t: f64) -> DVector<f64> {
        let ph = self.phase(t);
        let w = std::f64::consts::PI / (self.t1 - self.t0);
        let mut out = DVector::zeros(self.dim());
        for (k, a) in self.coeffs.iter().enumerate() {
            let kk = (k + 1) as f64;
            out.axpy(kk * w * (kk * ph).cos(), a, 1.0);
        }
        out
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * f).collect(),
            t0: self.t0,
            t1: self.t1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub candidate_cost: f64,
    pub min_cost: f64,
    pub mean_cost: f64,
    pub trials: usize,
    pub evaluated: usize,
    pub violations: usize,
    /// `min(perturbed - candidate)`; negative exactly when something beat the candidate.
    pub worst_margin: f64,
    pub redraws: usize,
    pub skipped: usize,
    pub seed: u64,
    pub tol: f64,
}

impl OptimalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.evaluated > 0
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "candidate_cost={:.16e}", self.candidate_cost);
        let _ = writeln!(s, "min_cost={:.16e}", self.min_cost);
        let _ = writeln!(s, "mean_cost={:.16e}", self.mean_cost);
        let _ = writeln!(s, "worst_margin={:.16e}", self.worst_margin);
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "evaluated={}", self.evaluated);
        let _ = writeln!(s, "violations={}", self.violations);
        let _ = writeln!(s, "redraws={}", self.redraws);
        let _ = writeln!(s, "skipped={}", self.skipped);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "tol={:e}", self.tol);
        let _ = writeln!(s, "status={}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

enum TrialOutcome {
    Cost { cost: f64, redraws: usize },
    Skipped { redraws: usize },
}

fn summarize(
    candidate: f64,
    outcomes: Vec<TrialOutcome>,
    seed: u64,
    tol: f64,
) -> OptimalityReport {
    let trials = outcomes.len();
    let mut costs = Vec::with_capacity(trials);
    let mut redraws = 0;
    let mut skipped = 0;
    for o in outcomes {
        match o {
            TrialOutcome::Cost { cost, redraws: r } => {
                costs.push(cost);
                redraws += r;
            }
            TrialOutcome::Skipped { redraws: r } => {
                skipped += 1;
                redraws += r;
            }
        }
    }
    let min_cost = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_cost = if costs.is_empty() {
        f64::NAN
    } else {
        costs.iter().sum::<f64>() / costs.len() as f64
    };
    let violations = costs.iter().filter(|&&c| c < candidate - tol || c.is_nan()).count();
    OptimalityReport {
        candidate_cost: candidate,
        min_cost,
        mean_cost,
        trials,
        evaluated: costs.len(),
        violations,
        worst_margin: min_cost - candidate,
        redraws,
        skipped,
        seed,
        tol,
    }
}

/// Cost of the candidate perturbed by `eps` is `cost(eps)`; the unperturbed
/// candidate is `cost(0)`. Domain errors halve the amplitude and redraw;
/// any other error aborts the test.
pub fn perturbation_test<F>(
    cost: F,
    dim: usize,
    t0: f64,
    t1: f64,
    basis: &PerturbationBasis,
    trials: usize,
    tol: f64,
) -> Result<OptimalityReport>
where
    F: Fn(&Perturbation) -> Result<f64> + Sync,
{
    let candidate = cost(&Perturbation::zero(dim, t0, t1))?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(basis.seed, trial as u64);
            let mut amplitude = 1.0;
            for attempt in 0..=MAX_RETRIES {
                let eps = basis.draw(&mut rng, dim, t0, t1, amplitude);
                match cost(&eps) {
                    Ok(c) => return Ok(TrialOutcome::Cost { cost: c, redraws: attempt }),
                    Err(Error::Domain(_)) => amplitude *= 0.5,
                    Err(e) => return Err(e),
                }
            }
            Ok(TrialOutcome::Skipped { redraws: MAX_RETRIES + 1 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(candidate, outcomes, basis.seed, tol))
}

/// Additive perturbation `q + eps`, `qdot + epsdot` of a sampled trajectory
/// under `integral f(q, qdot, t) dt`.
pub fn perturbation_test_trajectory<F>(
    traj: &Trajectory,
    integrand: F,
    basis: &PerturbationBasis,
    trials: usize,
    tol: f64,
) -> Result<OptimalityReport>
where
    F: Fn(&DVector<f64>, &DVector<f64>, f64) -> Result<f64> + Sync,
{
    let t0 = traj.t[0];
    let t1 = *traj.t.last().unwrap();
    perturbation_test(
        |eps| {
            let vals = traj
                .t
                .iter()
                .enumerate()
                .map(|(i, &t)| integrand(&(&traj.q[i] + eps.eval(t)), &(&traj.qdot[i] + eps.rate(t)), t))
                .collect::<Result<Vec<f64>>>()?;
            Ok(numeric::simpson(&traj.t, &vals))
        },
        traj.dim(),
        t0,
        t1,
        basis,
        trials,
        tol,
    )
}

/// Monotone retiming of `[0, 1]` onto itself: `tau' = p / integral p` with
/// `p` a shape-preserving cubic through positive random knot values.
#[derive(Debug, Clone)]
pub struct RandomRetiming {
    p: MonotoneCubic,
    cell_cum: Vec<f64>,
    total: f64,
}

impl RandomRetiming {
    pub fn draw<R: Rng>(rng: &mut R, knots: usize) -> Self {
        let k = knots.max(2);
        let x = numeric::uniform_grid(0.0, 1.0, k - 1);
        let y: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.9)).collect();
        Self::from_knots(x, y).expect("positive knot values on a uniform grid")
    }

    pub fn from_knots(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if y.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidInput("retiming rate must be positive".into()));
        }
        let p = MonotoneCubic::new(x, y)?;
        let kn = p.knots();
        let mut cell_cum = vec![0.0; kn.len()];
        for i in 1..kn.len() {
            cell_cum[i] = cell_cum[i - 1] + numeric::gauss_legendre(|u| p.eval(u), kn[i - 1], kn[i]);
        }
        let total = *cell_cum.last().unwrap();
        Ok(Self { p, cell_cum, total })
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let kn = self.p.knots();
        let i = kn.partition_point(|&x| x <= u).clamp(1, kn.len() - 1) - 1;
        (self.cell_cum[i] + numeric::gauss_legendre(|v| self.p.eval(v), kn[i], u)) / self.total
    }

    pub fn rate(&self, u: f64) -> f64 {
        self.p.eval(u.clamp(0.0, 1.0)) / self.total
    }
}

/// Random strictly increasing map of `[0, 1]` sampled on `k + 1` points.
pub fn random_monotone_map<R: Rng>(rng: &mut R, k: usize) -> Result<MonotoneMap> {
    let r = RandomRetiming::draw(rng, 8);
    MonotoneMap::from_fn(k, |u| r.eval(u))
}

/// Relative spread `max |f - f(0)| / |f(0)|` of an integrand along samples.
fn relative_spread(values: &[f64]) -> f64 {
    let f0 = values[0];
    let scale = f0.abs().max(f64::MIN_POSITIVE);
    values.iter().map(|v| (v - f0).abs()).fold(0.0, f64::max) / scale
}

/// Relative tolerance on the constant-integrand precondition.
pub const CONSTANT_INTEGRAND_TOL: f64 = 1e-6;

/// Compares `integral f(q(tau), qdot(tau) tau')` for random monotone `tau`
/// against the candidate. `path(t)` returns `(q, qdot)` on `[t0, t1]`; costs
/// are evaluated by Simpson on `n` uniform intervals.
#[allow(clippy::too_many_arguments)]
pub fn reparam_worsens_test<P, F>(
    path: P,
    integrand: F,
    t0: f64,
    t1: f64,
    n: usize,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<OptimalityReport>
where
    P: Fn(f64) -> Result<(DVector<f64>, DVector<f64>)> + Sync,
    F: Fn(&DVector<f64>, &DVector<f64>) -> Result<f64> + Sync,
{
    if !(t1 > t0) || n < 2 {
        return Err(Error::InvalidInput("need t1 > t0 and at least two intervals".into()));
    }
    let grid = numeric::uniform_grid(t0, t1, n);
    let span = t1 - t0;
    let base = grid
        .iter()
        .map(|&t| {
            let (q, qd) = path(t)?;
            integrand(&q, &qd)
        })
        .collect::<Result<Vec<f64>>>()?;
    let spread = relative_spread(&base);
    if spread > CONSTANT_INTEGRAND_TOL {
        return Err(Error::Precondition(format!(
            "candidate integrand is not constant (relative spread {spread:e})"
        )));
    }
    let candidate = numeric::simpson(&grid, &base);
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let r = RandomRetiming::draw(&mut rng, 8);
            let vals = grid
                .iter()
                .map(|&t| {
                    let u = (t - t0) / span;
                    let s = t0 + span * r.eval(u);
                    let (q, qd) = path(s)?;
                    integrand(&q, &(qd * r.rate(u)))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(TrialOutcome::Cost {
                cost: numeric::simpson(&grid, &vals),
                redraws: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(candidate, outcomes, seed, tol))
}

/// `max_t |T(t) - T(0)| / T(0)` with `T = 1/2 qdot^T M(q) qdot`.
pub fn conservation_check(metric: &dyn Metric, traj: &Trajectory) -> f64 {
    let energy: Vec<f64> = traj
        .q
        .iter()
        .zip(&traj.qdot)
        .map(|(q, qd)| kinetic_energy(metric, q, qd))
        .collect();
    relative_spread(&energy)
}

/// Length-type and energy-type functionals of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct J1J2 {
    /// `integral sqrt(2T)`.
    pub j1: f64,
    /// `(t2 - t1) integral 2T`, so that `J1^2 <= J2` with equality at constant speed.
    pub j2: f64,
    /// `|J2 - J1^2|`.
    pub gap: f64,
}

pub fn j1_j2_relation(metric: &dyn Metric, traj: &Trajectory) -> J1J2 {
    let two_t: Vec<f64> = traj
        .q
        .iter()
        .zip(&traj.qdot)
        .map(|(q, qd)| 2.0 * kinetic_energy(metric, q, qd))
        .collect();
    let root: Vec<f64> = two_t.iter().map(|v| v.max(0.0).sqrt()).collect();
    let j1 = numeric::simpson(&traj.t, &root);
    let j2 = traj.duration() * numeric::simpson(&traj.t, &two_t);
    J1J2 {
        j1,
        j2,
        gap: (j2 - j1 * j1).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Euclidean;

    fn line(n: usize) -> Trajectory {
        Trajectory::sample(0.0, 1.0, n, |t| {
            (
                DVector::from_vec(vec![t, 2.0 * t]),
                DVector::from_vec(vec![1.0, 2.0]),
            )
        })
        .unwrap()
    }

    fn sq(_: &DVector<f64>, qd: &DVector<f64>, _: f64) -> Result<f64> {
        Ok(qd.norm_squared())
    }

    #[test]
    fn perturbation_vanishes_at_ends() {
        let b = PerturbationBasis::with_seed(3);
        let p = b.draw(&mut trial_rng(3, 0), 4, -1.0, 2.5, 1.0);
        assert_eq!(p.eval(-1.0).amax(), 0.0);
        assert_eq!(p.eval(2.5).amax(), 0.0);
        let h = 1e-6;
        let fd = (p.eval(0.3 + h) - p.eval(0.3 - h)) / (2.0 * h);
        assert!((fd - p.rate(0.3)).amax() < 1e-8);
    }

    #[test]
    fn straight_line_survives() {
        let basis = PerturbationBasis::with_seed(7);
        let r = perturbation_test_trajectory(&line(400), sq, &basis, 100, DEFAULT_TOL).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.min_cost > r.candidate_cost);
    }

    #[test]
    fn report_is_deterministic() {
        let basis = PerturbationBasis::with_seed(11);
        let a = perturbation_test_trajectory(&line(100), sq, &basis, 40, DEFAULT_TOL).unwrap();
        let b = perturbation_test_trajectory(&line(100), sq, &basis, 40, DEFAULT_TOL).unwrap();
        assert_eq!(a, b);
        assert!(a.to_text().contains("violations=0"));
    }

    #[test]
    fn domain_errors_halve_amplitude() {
        let basis = PerturbationBasis::new(12, 1.0, 5).unwrap();
        // Fails unless every coefficient is tiny, so all trials end up skipped.
        let r = perturbation_test(
            |eps| {
                if eps.coeffs.iter().any(|a| a.amax() > 1e-9) {
                    Err(Error::Domain("too large".into()))
                } else {
                    Ok(0.0)
                }
            },
            2,
            0.0,
            1.0,
            &basis,
            5,
            DEFAULT_TOL,
        )
        .unwrap();
        assert_eq!(r.skipped, 5);
        assert_eq!(r.redraws, 5 * (MAX_RETRIES + 1));
        assert!(!r.passed());
    }

    #[test]
    fn retiming_is_monotone_onto() {
        let r = RandomRetiming::draw(&mut trial_rng(1, 2), 8);
        assert_eq!(r.eval(0.0), 0.0);
        assert!((r.eval(1.0 - 1e-15) - 1.0).abs() < 1e-12);
        let g = numeric::uniform_grid(0.0, 1.0, 500);
        let v: Vec<f64> = g.iter().map(|&u| r.eval(u)).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let h = 1e-6;
        assert!(((r.eval(0.4 + h) - r.eval(0.4 - h)) / (2.0 * h) - r.rate(0.4)).abs() < 1e-7);
    }

    #[test]
    fn non_constant_speed_rejected() {
        let e = reparam_worsens_test(
            |t| Ok((DVector::from_vec(vec![t * t]), DVector::from_vec(vec![2.0 * t]))),
            |_, qd| Ok(qd.norm_squared()),
            0.0,
            1.0,
            100,
            1,
            4,
            DEFAULT_TOL,
        );
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn line_j1_j2() {
        let j = j1_j2_relation(&Euclidean { dim: 2 }, &line(200));
        let v = 5f64.sqrt();
        assert!((j.j1 - v).abs() < 1e-12);
        assert!((j.j2 - 5.0).abs() < 1e-12);
        assert!(conservation_check(&Euclidean { dim: 2 }, &line(10)) < 1e-15);
    }
}
