//! Simulation of the continuous-time chain defined by a generator matrix.
//!
//! Holding times are exponential with rate `-G[i][i]`, jumps go to `j` with
//! probability `G[i][j] / -G[i][i]`, and any missing row mass kills the path.
//! Discounted running rewards are integrated exactly between jumps. Each path
//! (or antithetic pair) draws from its own ChaCha stream selected by its index,
//! so results do not depend on the thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::max_abs;
use crate::generators::GeneratorMatrix;
use crate::problem::StoppingProblem;
use crate::solver::{stopping_rule, StoppingRegion, ValueFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Paths still running at `t_max` are cut off.
    pub t_max: f64,
    pub seed: u64,
    /// Pair each path with one driven by `1 - U` for every uniform `U`.
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            t_max: 200.0,
            seed: 0x5eed,
            antithetic: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidParameter("antithetic sampling needs an even n_paths".into()));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {}", self.t_max)));
        }
        Ok(())
    }

    /// Horizon whose truncation bias is at most half of `target_se`.
    pub fn horizon_for(problem: &StoppingProblem, target_se: f64) -> f64 {
        let a = problem.discount();
        let scale = bias_scale(problem);
        if scale == 0.0 {
            return 1.0;
        }
        ((2.0 * scale / target_se).ln() / a).max(1.0)
    }

    fn units(&self) -> usize {
        if self.antithetic {
            self.n_paths / 2
        } else {
            self.n_paths
        }
    }
}

fn bias_scale(problem: &StoppingProblem) -> f64 {
    max_abs(problem.terminal().values()) + max_abs(problem.running().values()) / problem.discount()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub truncation_bias_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Allowed deviation minus observed deviation; negative on failure.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointStats {
    pub t: f64,
    pub stopped_mean: f64,
    pub stopped_se: f64,
    pub unstopped_mean: f64,
    pub unstopped_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub bias_bound: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<CheckpointStats>,
}

impl McReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Row-wise jump tables.
struct Chain {
    exit: Vec<f64>,
    ptr: Vec<usize>,
    cum: Vec<f64>,
    target: Vec<usize>,
}

impl Chain {
    fn new(g: &GeneratorMatrix) -> Self {
        let n = g.dim();
        let mut exit = Vec::with_capacity(n);
        let mut ptr = vec![0];
        let mut cum = Vec::new();
        let mut target = Vec::new();
        for i in 0..n {
            let (cols, vals) = g.matrix().row(i);
            let mut acc = 0.0;
            let mut diag = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    diag = v;
                } else if v > 0.0 {
                    acc += v;
                    cum.push(acc);
                    target.push(j);
                }
            }
            exit.push((-diag).max(acc));
            ptr.push(cum.len());
        }
        Self { exit, ptr, cum, target }
    }

    /// Next state, or `None` if the path is killed.
    fn jump(&self, i: usize, u: f64) -> Option<usize> {
        let span = self.ptr[i]..self.ptr[i + 1];
        let cum = &self.cum[span.clone()];
        let x = u * self.exit[i];
        let k = cum.partition_point(|&c| c <= x);
        (k < cum.len()).then(|| self.target[span.start + k])
    }
}

struct Uniforms {
    rng: ChaCha8Rng,
    flip: bool,
}

impl Uniforms {
    fn new(seed: u64, stream: u64, flip: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, flip }
    }

    /// Uniform on the open interval (0, 1).
    fn next(&mut self) -> f64 {
        let u = ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        if self.flip {
            1.0 - u
        } else {
            u
        }
    }

    fn exp(&mut self, rate: f64) -> f64 {
        -self.next().ln() / rate
    }
}

/// `∫_{t0}^{t1} e^{-as} f ds`.
fn discounted_flow(f: f64, a: f64, t0: f64, t1: f64) -> f64 {
    if f == 0.0 {
        0.0
    } else {
        f / a * ((-a * t0).exp() - (-a * t1).exp())
    }
}

struct Model<'a> {
    chain: Chain,
    a: f64,
    f: &'a [f64],
    g: &'a [f64],
}

impl<'a> Model<'a> {
    fn new(gen: &GeneratorMatrix, problem: &'a StoppingProblem) -> Result<Self> {
        if gen.dim() != problem.space().len() {
            return Err(Error::SpaceMismatch("generator and problem differ in size".into()));
        }
        Ok(Self {
            chain: Chain::new(gen),
            a: problem.discount(),
            f: problem.running().values(),
            g: problem.terminal().values(),
        })
    }

    /// Discounted reward of stopping on first entry to `stop`.
    fn stopped_path(&self, stop: &[bool], start: usize, t_max: f64, uni: &mut Uniforms) -> f64 {
        let a = self.a;
        let mut i = start;
        let mut t = 0.0;
        let mut acc = 0.0;
        loop {
            if stop[i] {
                return acc + (-a * t).exp() * self.g[i];
            }
            let rate = self.chain.exit[i];
            if rate == 0.0 {
                return acc + discounted_flow(self.f[i], a, t, f64::INFINITY);
            }
            let t1 = t + uni.exp(rate);
            if t1 >= t_max {
                return acc + discounted_flow(self.f[i], a, t, t_max);
            }
            acc += discounted_flow(self.f[i], a, t, t1);
            t = t1;
            match self.chain.jump(i, uni.next()) {
                Some(j) => i = j,
                None => return acc,
            }
        }
    }

    /// `M(c)` and `M(c ∧ τ)` at each checkpoint for one unstopped path.
    fn martingale_path(&self, v: &[f64], stop: &[bool], start: usize, checkpoints: &[f64], uni: &mut Uniforms) -> Vec<(f64, f64)> {
        let a = self.a;
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut state = Some(start);
        let mut t = 0.0;
        let mut integral = 0.0;
        let mut m_tau: Option<f64> = None;
        let mut next_cp = 0;
        if stop[start] {
            m_tau = Some(v[start]);
        }
        while next_cp < checkpoints.len() {
            let (t1, fi, vi) = match state {
                Some(i) => {
                    let rate = self.chain.exit[i];
                    let t1 = if rate == 0.0 { f64::INFINITY } else { t + uni.exp(rate) };
                    (t1, self.f[i], v[i])
                }
                None => (f64::INFINITY, 0.0, 0.0),
            };
            while next_cp < checkpoints.len() && checkpoints[next_cp] < t1 {
                let c = checkpoints[next_cp];
                let m = integral + discounted_flow(fi, a, t, c) + (-a * c).exp() * vi;
                out.push((m, m_tau.unwrap_or(m)));
                next_cp += 1;
            }
            if next_cp == checkpoints.len() {
                break;
            }
            integral += discounted_flow(fi, a, t, t1);
            t = t1;
            state = state.and_then(|i| self.chain.jump(i, uni.next()));
            if m_tau.is_none() {
                match state {
                    Some(j) if stop[j] => m_tau = Some(integral + (-a * t).exp() * v[j]),
                    None => m_tau = Some(integral),
                    _ => {}
                }
            }
        }
        out
    }
}

fn run_units<T: Send>(cfg: &SimConfig, unit: impl Fn(&mut Uniforms, bool) -> T + Sync, combine: impl Fn(T, T) -> T + Sync) -> Vec<T> {
    (0..cfg.units())
        .into_par_iter()
        .map(|p| {
            let p = p as u64;
            if cfg.antithetic {
                let x = unit(&mut Uniforms::new(cfg.seed, p, false), false);
                let y = unit(&mut Uniforms::new(cfg.seed, p, true), true);
                combine(x, y)
            } else {
                unit(&mut Uniforms::new(cfg.seed, p, false), false)
            }
        })
        .collect()
}

/// Mean and standard error, summed in index order with a shift for accuracy.
fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    let shift = xs.clone().next().unwrap_or(0.0);
    let (mut s, mut ss) = (0.0, 0.0);
    for x in xs {
        let d = x - shift;
        s += d;
        ss += d * d;
    }
    let nf = n as f64;
    let mean = shift + s / nf;
    let var = if n > 1 { ((ss - s * s / nf) / (nf - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / nf).sqrt())
}

fn check_start(problem: &StoppingProblem, start: usize) -> Result<()> {
    if start >= problem.space().len() {
        return Err(Error::InvalidParameter(format!(
            "start index {start} outside a space of {} states",
            problem.space().len()
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of the reward of stopping on first entry to `region`.
pub fn simulate_stopped_value(
    gen: &GeneratorMatrix,
    problem: &StoppingProblem,
    region: &StoppingRegion,
    start_index: usize,
    cfg: &SimConfig,
) -> Result<PathEstimate> {
    cfg.validate()?;
    check_start(problem, start_index)?;
    if region.mask().len() != problem.space().len() {
        return Err(Error::SpaceMismatch("stopping region has the wrong size".into()));
    }
    let model = Model::new(gen, problem)?;
    let stop = region.mask();
    let vals = run_units(
        cfg,
        |uni, _| model.stopped_path(stop, start_index, cfg.t_max, uni),
        |x, y| 0.5 * (x + y),
    );
    let (mean, std_error) = mean_se(vals.iter().copied());
    Ok(PathEstimate {
        mean,
        std_error,
        n_paths: cfg.n_paths,
        truncation_bias_bound: (-problem.discount() * cfg.t_max).exp() * bias_scale(problem),
    })
}

fn slack(v: f64) -> f64 {
    1e-12 * (1.0 + v.abs())
}

/// Checks that `M(t ∧ τ*)` has mean `V(start)` and `M(t)` has mean at most
/// `V(start)`, where `M(t) = e^{-at} V(X_t) + ∫_0^t e^{-as} f(X_s) ds`.
pub fn martingale_check(
    gen: &GeneratorMatrix,
    problem: &StoppingProblem,
    vf: &ValueFunction,
    start_index: usize,
    checkpoints: &[f64],
    cfg: &SimConfig,
) -> Result<McReport> {
    cfg.validate()?;
    check_start(problem, start_index)?;
    if checkpoints.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || checkpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("checkpoints must be finite, nonnegative and increasing".into()));
    }
    let model = Model::new(gen, problem)?;
    let v = vf.values();
    let region = stopping_rule(vf);
    let stop = region.mask();
    let paths = run_units(
        cfg,
        |uni, _| model.martingale_path(v, stop, start_index, checkpoints, uni),
        |x, y| {
            x.iter()
                .zip(&y)
                .map(|(p, q)| (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)))
                .collect()
        },
    );
    let v0 = v[start_index];
    let mut report = McReport {
        mean: v0,
        std_error: 0.0,
        n_paths: cfg.n_paths,
        bias_bound: 0.0,
        checks: Vec::new(),
        checkpoints: Vec::new(),
    };
    for (k, &t) in checkpoints.iter().enumerate() {
        let (um, use_) = mean_se(paths.iter().map(|p| p[k].0));
        let (sm, sse) = mean_se(paths.iter().map(|p| p[k].1));
        let tol_m = 3.0 * sse + slack(v0);
        report.checks.push(Check {
            name: format!("martingale_t{t}"),
            pass: (sm - v0).abs() <= tol_m,
            margin: tol_m - (sm - v0).abs(),
        });
        let tol_s = 3.0 * use_ + slack(v0);
        report.checks.push(Check {
            name: format!("supermartingale_t{t}"),
            pass: um <= v0 + tol_s,
            margin: v0 + tol_s - um,
        });
        report.checkpoints.push(CheckpointStats {
            t,
            stopped_mean: sm,
            stopped_se: sse,
            unstopped_mean: um,
            unstopped_se: use_,
        });
    }
    Ok(report)
}

/// Reward of the optimal region shifted by `shift` nodes, checked against
/// `V(start)`: no other rule may do better beyond sampling error.
pub fn perturbed_region_suboptimality(
    gen: &GeneratorMatrix,
    problem: &StoppingProblem,
    vf: &ValueFunction,
    shift: i64,
    start_index: usize,
    cfg: &SimConfig,
) -> Result<McReport> {
    let region = stopping_rule(vf).shifted(shift);
    let est = simulate_stopped_value(gen, problem, &region, start_index, cfg)?;
    let v0 = vf.values()[start_index];
    let tol = 3.0 * est.std_error + est.truncation_bias_bound + slack(v0);
    Ok(McReport {
        mean: est.mean,
        std_error: est.std_error,
        n_paths: est.n_paths,
        bias_bound: est.truncation_bias_bound,
        checks: vec![Check {
            name: format!("suboptimal_shift{shift}"),
            pass: est.mean <= v0 + tol,
            margin: v0 + tol - est.mean,
        }],
        checkpoints: Vec::new(),
    })
}

/// Compares a stopped-value estimate with a reference value.
pub fn agreement_check(name: &str, est: &PathEstimate, reference: f64) -> Check {
    let tol = 3.0 * est.std_error + est.truncation_bias_bound + slack(reference);
    let dev = (est.mean - reference).abs();
    Check {
        name: name.to_string(),
        pass: dev <= tol,
        margin: tol - dev,
    }
}

/// Empirical distribution of `X_t` started from `start`.
pub fn simulate_marginal(gen: &GeneratorMatrix, start: usize, t: f64, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    if start >= gen.dim() || n_paths == 0 || !(t >= 0.0) {
        return Err(Error::InvalidParameter("bad marginal sampling request".into()));
    }
    let chain = Chain::new(gen);
    let cfg = SimConfig {
        n_paths,
        t_max: t.max(1.0),
        seed,
        antithetic: false,
    };
    let ends: Vec<Option<usize>> = run_units(
        &cfg,
        |uni, _| {
            let mut i = start;
            let mut s = 0.0;
            loop {
                let rate = chain.exit[i];
                if rate == 0.0 {
                    return Some(i);
                }
                s += uni.exp(rate);
                if s > t {
                    return Some(i);
                }
                i = chain.jump(i, uni.next())?;
            }
        },
        |x, _| x,
    );
    let mut freq = vec![0.0; gen.dim()];
    for j in ends.into_iter().flatten() {
        freq[j] += 1.0 / n_paths as f64;
    }
    Ok(freq)
}
