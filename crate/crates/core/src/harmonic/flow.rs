use std::collections::HashMap;

use super::{averaged, HarmonicError};
use crate::affine::AffineAction;
use crate::group::{Element, GroupContext};
use crate::linalg::{self, Vector};

pub const DEFAULT_FLOW_RADIUS: usize = 4;
pub const DEFAULT_FLOW_CAP: usize = 10_000;
/// `||Δf_i(e)||` at or below this counts as harmonic.
pub const HARMONIC_TOL: f64 = 1e-8;
/// Slack on `||ΔHf(x)|| <= max ||Δf(x')||`, scaled by `max(1, rhs)`.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// A step contracts when its ratio is below `1 - CONTRACTION_MARGIN`.
pub const CONTRACTION_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowConfig {
    pub radius: usize,
    pub cap: usize,
    pub tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            radius: DEFAULT_FLOW_RADIUS,
            cap: DEFAULT_FLOW_CAP,
            tol: HARMONIC_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityViolation {
    /// The step `f_i -> f_{i+1}` is reported as `i`.
    pub iteration: usize,
    pub point: Element,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of the equality clause: when `||ΔHf(x)||` reaches the neighbour
/// maximum, `Δf` should be the same vector across the ball.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidityCheck {
    pub iteration: usize,
    pub point: Element,
    /// `max_x ||Δf_i(x) - Δf_i(e)||` over the ball.
    pub spread: f64,
    pub constant: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StabilityVerdict {
    Harmonic {
        i0: usize,
    },
    Stable {
        lambda: f64,
        i0: usize,
    },
    Unstable {
        iteration: usize,
        point: Element,
        ratio: f64,
    },
    Undecided {
        reason: String,
    },
}

impl StabilityVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityVerdict::Harmonic { .. } => "harmonic",
            StabilityVerdict::Stable { .. } => "stable",
            StabilityVerdict::Unstable { .. } => "unstable",
            StabilityVerdict::Undecided { .. } => "undecided",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrace {
    pub radius: usize,
    pub cap: usize,
    pub tol: f64,
    /// `f_i(e)` for every computed iterate.
    pub iterates: Vec<Vector>,
    /// `||Δf_i(e)||`.
    pub laplacian_at_identity: Vec<f64>,
    /// `max_{x in ball(R)} ||Δf_i(x)||`.
    pub laplacian_max: Vec<f64>,
    /// Entry `i` is `max_x ||Δf_{i+1}(x)|| / max_{x' in x(S∪{e})} ||Δf_i(x')||`.
    pub ratios: Vec<f64>,
    /// Where each ratio is attained.
    pub ratio_points: Vec<Element>,
    pub violations: Vec<MonotonicityViolation>,
    /// Largest `lhs - rhs` seen over all checked points, without slack.
    pub max_excess: f64,
    pub rigidity: Vec<RigidityCheck>,
    pub diverged: bool,
    pub verdict: StabilityVerdict,
}

impl FlowTrace {
    pub fn steps(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }
}

struct BallIndex {
    /// `A(x)` for `x` in `ball(R + 1)`.
    linear: Vec<crate::linalg::Matrix>,
    points: Vec<Element>,
    inner: usize,
    /// For `x` in `ball(R)`: indices of `x` and `xs`.
    closed_nbhd: Vec<Vec<usize>>,
}

impl BallIndex {
    fn new(action: &AffineAction, ctx: &GroupContext, radius: usize) -> Result<Self, HarmonicError> {
        let outer = ctx.ball(radius + 1)?;
        let inner = ctx.ball_size(radius) as usize;
        let index: HashMap<&Element, usize> = outer.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut closed_nbhd = Vec::with_capacity(inner);
        for x in &outer[..inner] {
            let mut nb = vec![index[x]];
            for t in ctx.generators().tokens() {
                nb.push(index[&ctx.mul_token(x, t)]);
            }
            closed_nbhd.push(nb);
        }
        let linear = outer
            .iter()
            .map(|g| action.linear_part(ctx, g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BallIndex {
            linear,
            points: outer,
            inner,
            closed_nbhd,
        })
    }

    fn norms(&self, u: &Vector) -> Vec<f64> {
        self.linear.iter().map(|a| (a * u).norm()).collect()
    }
}

/// Iterates `f_{i+1} = H f_i` from `f_0(e) = v0`, checking the monotonicity
/// inequality on `ball(R)` at every step and classifying the run.
pub fn run_flow(
    action: &AffineAction,
    ctx: &GroupContext,
    v0: &Vector,
    config: FlowConfig,
) -> Result<FlowTrace, HarmonicError> {
    if v0.len() != action.dim() {
        return Err(HarmonicError::DimensionMismatch {
            expected: action.dim(),
            got: v0.len(),
        });
    }
    if !(config.tol >= 0.0) {
        return Err(HarmonicError::InvalidParameter(format!(
            "tolerance must be nonnegative, got {}",
            config.tol
        )));
    }
    let ball = BallIndex::new(action, ctx, config.radius)?;
    let mut trace = FlowTrace {
        radius: config.radius,
        cap: config.cap,
        tol: config.tol,
        iterates: Vec::new(),
        laplacian_at_identity: Vec::new(),
        laplacian_max: Vec::new(),
        ratios: Vec::new(),
        ratio_points: Vec::new(),
        violations: Vec::new(),
        max_excess: f64::NEG_INFINITY,
        rigidity: Vec::new(),
        diverged: false,
        verdict: StabilityVerdict::Undecided {
            reason: String::new(),
        },
    };

    let mut v = v0.clone();
    let mut prev: Option<(Vector, Vec<f64>)> = None;
    let mut harmonic_at = None;
    for i in 0..=config.cap {
        let u = &v - averaged(action, &v);
        let norms = ball.norms(&u);
        trace.iterates.push(v.clone());
        if !linalg::is_finite(&v) || norms.iter().any(|n| !n.is_finite()) {
            trace.diverged = true;
            trace.laplacian_at_identity.push(f64::NAN);
            trace.laplacian_max.push(f64::NAN);
            break;
        }
        trace.laplacian_at_identity.push(norms[0]);
        trace
            .laplacian_max
            .push(norms[..ball.inner].iter().fold(0.0, |a: f64, &b| a.max(b)));

        if let Some((prev_u, prev_norms)) = &prev {
            check_step(&ball, i - 1, prev_u, prev_norms, &norms, &mut trace);
        }
        if norms[0] <= config.tol {
            harmonic_at = Some(i);
            break;
        }
        if i == config.cap {
            break;
        }
        let next = &v - &u;
        prev = Some((u, norms));
        v = next;
    }

    trace.verdict = if trace.diverged {
        StabilityVerdict::Undecided {
            reason: format!("iterates became non-finite after {} steps", trace.steps()),
        }
    } else if let Some(i0) = harmonic_at {
        StabilityVerdict::Harmonic { i0 }
    } else {
        classify(&trace)
    };
    if trace.max_excess == f64::NEG_INFINITY {
        trace.max_excess = 0.0;
    }
    Ok(trace)
}

fn check_step(
    ball: &BallIndex,
    i: usize,
    prev_u: &Vector,
    prev: &[f64],
    next: &[f64],
    trace: &mut FlowTrace,
) {
    let mut worst_ratio = 0.0f64;
    let mut worst_point = 0usize;
    let mut equality_at = None;
    for (x, nb) in ball.closed_nbhd.iter().enumerate() {
        let rhs = nb.iter().map(|&j| prev[j]).fold(0.0, f64::max);
        let lhs = next[x];
        trace.max_excess = trace.max_excess.max(lhs - rhs);
        let slack = MONOTONE_SLACK * rhs.max(1.0);
        if lhs > rhs + slack {
            trace.violations.push(MonotonicityViolation {
                iteration: i,
                point: ball.points[x].clone(),
                lhs,
                rhs,
            });
        }
        if rhs > 0.0 {
            let ratio = lhs / rhs;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst_point = x;
            }
            if rhs > trace.tol && (lhs - rhs).abs() <= slack && equality_at.is_none() {
                equality_at = Some(x);
            }
        }
    }
    trace.ratios.push(worst_ratio);
    trace.ratio_points.push(ball.points[worst_point].clone());

    if let Some(x) = equality_at {
        let at_e = prev_u.clone();
        let spread = ball.linear[..ball.inner]
            .iter()
            .map(|a| (a * prev_u - &at_e).norm())
            .fold(0.0, f64::max);
        let scale = prev.iter().take(ball.inner).fold(1.0, |a: f64, &b| a.max(b));
        trace.rigidity.push(RigidityCheck {
            iteration: i,
            point: ball.points[x].clone(),
            spread,
            constant: spread <= 1e-8 * scale,
        });
    }
}

fn classify(trace: &FlowTrace) -> StabilityVerdict {
    let k = trace.ratios.len();
    if k == 0 {
        return StabilityVerdict::Undecided {
            reason: "no flow steps were taken".into(),
        };
    }
    let contracting = |r: f64| r < 1.0 - CONTRACTION_MARGIN;
    let i0 = trace
        .ratios
        .iter()
        .rposition(|&r| !contracting(r))
        .map_or(0, |p| p + 1);
    if i0 < k && i0 <= k / 2 {
        let lambda = trace.ratios[i0..].iter().fold(0.0, |a: f64, &b| a.max(b));
        return StabilityVerdict::Stable { lambda, i0 };
    }
    let second_half = &trace.ratios[k / 2..];
    if second_half.iter().all(|&r| !contracting(r)) {
        let last = k - 1;
        return StabilityVerdict::Unstable {
            iteration: last,
            point: trace.ratio_points[last].clone(),
            ratio: trace.ratios[last],
        };
    }
    StabilityVerdict::Undecided {
        reason: format!(
            "contraction not sustained over the second half of {k} steps (last onset at step {i0})"
        ),
    }
}
