//! The symmetry group `G(φ)`: continuous circle maps `ρ` with `φ∘ρ = φ`.
//!
//! Group elements are found by continuing a local inverse of `φ` once around
//! the circle. Starting from a base fiber `ξ_0, …, ξ_{n0-1}` (anticlockwise),
//! the smallest shift `d` for which the continuation from `ξ_0` to `ξ_d`
//! closes up into a circle homeomorphism generates the group, and the group
//! order is `n0 / d`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contour::WindingSample;
use crate::error::{Error, Result};
use crate::fibers::{fiber_on_circle, polish_angle, FiberOnCircle, FiberSample};
use crate::poly::C64;
use crate::rational::RationalMap;
use crate::tol::Tolerances;

/// Uniform nodes per loop.
pub const TRACK_NODES: usize = 1024;
const MIN_STEP: f64 = TAU / (1u64 << 30) as f64;
const BASE_DRAWS: usize = 16;

/// A circle map `e^{it} ↦ e^{iθ(t)}` stored as a continuous lift on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct CircleMap {
    /// `t_k = t_0 + 2πk/K`, `k = 0..=K`.
    pub grid: Vec<f64>,
    pub angles: Vec<f64>,
    /// `θ'(t_k)`.
    pub slopes: Vec<f64>,
    pub winding: i64,
    pub residuals: Vec<f64>,
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// `θ'(t)` from differentiating `φ(e^{iθ(t)}) = φ(e^{it})`.
fn lift_slope(map: &RationalMap, t: f64, theta: f64) -> f64 {
    let z = C64::from_polar(1.0, t);
    let w = C64::from_polar(1.0, theta);
    let (_, dz) = map.eval_with_derivative(z);
    let (_, dw) = map.eval_with_derivative(w);
    ((z * dz) / (w * dw)).re
}

impl CircleMap {
    pub fn identity(start: f64, nodes: usize) -> Self {
        let grid: Vec<f64> = (0..=nodes)
            .map(|k| start + TAU * k as f64 / nodes as f64)
            .collect();
        Self {
            angles: grid.clone(),
            slopes: vec![1.0; nodes + 1],
            residuals: vec![0.0; nodes + 1],
            grid,
            winding: 1,
        }
    }

    fn nodes(&self) -> usize {
        self.grid.len() - 1
    }

    fn start(&self) -> f64 {
        self.grid[0]
    }

    /// `θ(t)` for any real `t`: Hermite interpolation on the grid followed by
    /// Newton polishing onto `φ(e^{iθ}) = φ(e^{it})`.
    pub fn eval(&self, map: &RationalMap, t: f64) -> f64 {
        let guess = self.interpolate(t);
        let target = map.eval(C64::from_polar(1.0, t));
        polish_angle(map, guess, target, 6).0
    }

    fn interpolate(&self, t: f64) -> f64 {
        let k_nodes = self.nodes();
        let h = TAU / k_nodes as f64;
        let s = t - self.start();
        let laps = (s / TAU).floor();
        let r = s - laps * TAU;
        let idx = ((r / h).floor() as usize).min(k_nodes - 1);
        let u = (r - idx as f64 * h) / h;
        let (y0, y1) = (self.angles[idx], self.angles[idx + 1]);
        let (m0, m1) = (self.slopes[idx] * h, self.slopes[idx + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let value = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1;
        value + laps * TAU * self.winding as f64
    }

    /// `self ∘ inner`, on the grid of `inner`.
    pub fn compose(&self, inner: &CircleMap, map: &RationalMap) -> CircleMap {
        let mut angles = Vec::with_capacity(inner.angles.len());
        let mut slopes = Vec::with_capacity(inner.angles.len());
        let mut residuals = Vec::with_capacity(inner.angles.len());
        for (k, &a) in inner.angles.iter().enumerate() {
            let mut theta: f64 = self.eval(map, a);
            if let Some(&prev) = angles.last() {
                // keep the lift continuous
                let prev: f64 = prev;
                theta += TAU * ((prev - theta) / TAU).round();
            }
            let t = inner.grid[k];
            slopes.push(lift_slope(map, t, theta));
            residuals.push(
                (map.eval(C64::from_polar(1.0, theta)) - map.eval(C64::from_polar(1.0, t))).norm(),
            );
            angles.push(theta);
        }
        let winding = ((angles[angles.len() - 1] - angles[0]) / TAU).round() as i64;
        CircleMap {
            grid: inner.grid.clone(),
            angles,
            slopes,
            winding,
            residuals,
        }
    }

    /// Largest angular distance from the identity map over the grid.
    pub fn identity_deviation(&self) -> f64 {
        self.grid
            .iter()
            .zip(&self.angles)
            .map(|(&t, &a)| wrap(a - t).abs())
            .fold(0.0, f64::max)
    }

    /// Largest angular distance from another circle map, compared on this grid.
    pub fn deviation_from(&self, other: &CircleMap, map: &RationalMap) -> f64 {
        self.grid
            .iter()
            .zip(&self.angles)
            .map(|(&t, &a)| wrap(a - other.eval(map, t)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.angles.windows(2).all(|w| w[1] > w[0])
    }

    /// Values in turns at `n` equispaced arguments `t = 2πj/n`.
    pub fn sample_turns(&self, map: &RationalMap, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                let theta = self.eval(map, t);
                (j as f64 / n as f64, theta.rem_euclid(TAU) / TAU)
            })
            .collect()
    }
}

/// Continues the local inverse `ρ` of `φ` with `ρ(ξ0) = ζ0` once around the circle.
pub fn track_local_inverse(map: &RationalMap, xi0: C64, zeta0: C64, tol: &Tolerances) -> Result<CircleMap> {
    let (sup, dsup) = map.circle_bounds(256);
    let value_scale = 1.0 + sup;
    let crit_floor = tol.crit * (1.0 + dsup);
    let t0 = xi0.arg();
    let theta0 = zeta0.arg();
    let target0 = map.eval(C64::from_polar(1.0, t0));
    if (map.eval(C64::from_polar(1.0, theta0)) - target0).norm() > tol.residual.max(1e-12) * value_scale * 1e2 {
        return Err(Error::NoClosure {
            reason: "target is not in the fiber of the base point".into(),
        });
    }
    for angle in [t0, theta0] {
        let (_, d) = map.eval_with_derivative(C64::from_polar(1.0, angle));
        if d.norm() < crit_floor {
            return Err(Error::CriticalPointOnCircle { theta: angle });
        }
    }

    let res_tol = 1e-2 * tol.track * value_scale;
    let k_nodes = TRACK_NODES;
    let h_node = TAU / k_nodes as f64;
    let mut grid = Vec::with_capacity(k_nodes + 1);
    let mut angles = Vec::with_capacity(k_nodes + 1);
    let mut slopes = Vec::with_capacity(k_nodes + 1);
    let mut residuals = Vec::with_capacity(k_nodes + 1);

    let mut t = t0;
    let mut theta = polish_angle(map, theta0, target0, 4).0;
    let mut slope = lift_slope(map, t, theta);
    grid.push(t);
    angles.push(theta);
    slopes.push(slope);
    residuals.push((map.eval(C64::from_polar(1.0, theta)) - target0).norm());
    let mut h_cur = h_node;

    for k in 0..k_nodes {
        let t_node = t0 + h_node * (k + 1) as f64;
        while t_node - t > MIN_STEP {
            let mut h = h_cur.min(t_node - t);
            loop {
                let t_next = t + h;
                let target = map.eval(C64::from_polar(1.0, t_next));
                let predicted = theta + h * slope;
                let (corrected, iters, residual) = newton_on_circle(map, predicted, target, res_tol);
                let floor = eval_noise(map, C64::from_polar(1.0, corrected), target);
                let converged = residual <= res_tol.max(2.0 * floor);
                let (_, dw) = map.eval_with_derivative(C64::from_polar(1.0, corrected));
                let critical = dw.norm() < 10.0 * crit_floor;
                let consistent = (corrected - predicted).abs() <= 0.25 * h * slope.abs() + 1e-12;
                let new_slope = if converged { lift_slope(map, t_next, corrected) } else { 0.0 };
                if converged && iters <= 4 && !critical && consistent && new_slope > 0.0 {
                    t = t_next;
                    theta = corrected;
                    slope = new_slope;
                    if iters <= 3 {
                        h_cur = (2.0 * h).min(h_node);
                    } else {
                        h_cur = h;
                    }
                    break;
                }
                h *= 0.5;
                if h < MIN_STEP {
                    return Err(if critical {
                        Error::CriticalPointOnCircle { theta: corrected }
                    } else if !converged {
                        Error::NoClosure {
                            reason: format!("continuation leaves the circle near t = {t:.6}"),
                        }
                    } else if new_slope <= 0.0 {
                        Error::NoClosure {
                            reason: format!("orientation reverses near t = {t:.6}"),
                        }
                    } else {
                        Error::BranchCollision { t }
                    });
                }
            }
        }
        if t != t_node {
            theta += (t_node - t) * slope;
            t = t_node;
            theta = polish_angle(map, theta, map.eval(C64::from_polar(1.0, t)), 4).0;
            slope = lift_slope(map, t, theta);
        }
        grid.push(t);
        angles.push(theta);
        slopes.push(slope);
        residuals.push((map.eval(C64::from_polar(1.0, theta)) - map.eval(C64::from_polar(1.0, t))).norm());
    }

    let turns = (angles[k_nodes] - angles[0]) / TAU;
    let winding = turns.round() as i64;
    let closure = (turns - winding as f64).abs() * TAU;
    if closure > tol.track {
        return Err(Error::NoClosure {
            reason: format!("monodromy moves the target by {closure:.3e} rad"),
        });
    }
    if winding != 1 {
        return Err(Error::NoClosure {
            reason: format!("winding {winding} instead of 1"),
        });
    }
    let map_out = CircleMap {
        grid,
        angles,
        slopes,
        winding,
        residuals,
    };
    if map_out.max_residual() > tol.track * value_scale {
        return Err(Error::NoClosure {
            reason: format!("residual {:.3e} along the loop", map_out.max_residual()),
        });
    }
    Ok(map_out)
}

/// Rounding-error bound for evaluating `φ` on the unit circle.
fn eval_noise(map: &RationalMap, z: C64, value: C64) -> f64 {
    let sum = |p: &crate::poly::Polynomial| p.coeffs().iter().map(|c| c.norm()).sum::<f64>();
    let den = map.den().eval(z).norm();
    let bound = (sum(map.num()) + value.norm() * sum(map.den())) / den.max(f64::MIN_POSITIVE);
    8.0 * f64::EPSILON * bound
}

/// Newton iterations until the residual reaches rounding level or the
/// update stops shrinking.
fn newton_on_circle(map: &RationalMap, mut theta: f64, target: C64, res_tol: f64) -> (f64, usize, f64) {
    let mut prev_step = f64::INFINITY;
    for iter in 0..8 {
        let z = C64::from_polar(1.0, theta);
        let (f, df) = map.eval_with_derivative(z);
        let g = f - target;
        let residual = g.norm();
        if residual <= (res_tol * 1e-3).max(eval_noise(map, z, f)) {
            return (theta, iter, residual);
        }
        let dg = C64::new(0.0, 1.0) * z * df;
        let denom = dg.norm_sqr();
        if denom == 0.0 {
            break;
        }
        let step = (dg.conj() * g).re / denom;
        if residual <= res_tol && step.abs() > 0.5 * prev_step {
            return (theta, iter, residual);
        }
        theta -= step;
        prev_step = step.abs();
    }
    let residual = (map.eval(C64::from_polar(1.0, theta)) - target).norm();
    (theta, 8, residual)
}

/// Outcome of one candidate shift during generator search.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftAttempt {
    pub shift: usize,
    /// `None` when the shift produced a valid generator; otherwise why it was
    /// refuted numerically.
    pub refuted: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryGroup {
    pub order: usize,
    /// Cyclic shift `d` of the base fiber induced by the generator.
    pub shift: usize,
    pub base_fiber_size: usize,
    /// Base point in turns.
    pub base_turns: f64,
    pub generator: CircleMap,
    /// `generator^j`, `j = 0..order`.
    pub elements: Vec<CircleMap>,
    pub attempts: Vec<ShiftAttempt>,
    /// Max angular deviation of `generator^order` from the identity.
    pub cycle_error: f64,
    /// Smallest deviation from the identity among `generator^j`, `0 < j < order`.
    pub min_proper_deviation: f64,
}

/// Picks a generic base fiber: reliable, away from critical points, and of
/// minimal cardinality among the deterministic draws.
pub fn choose_base_fiber(map: &RationalMap, seed: u64, tol: &Tolerances) -> Result<FiberOnCircle> {
    let (_, dsup) = map.circle_bounds(256);
    let floor = 1e3 * tol.crit * (1.0 + dsup);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6A09_E667);
    let mut best: Option<FiberOnCircle> = None;
    for _ in 0..BASE_DRAWS {
        let turn: f64 = rng.gen();
        let xi = C64::from_polar(1.0, TAU * turn);
        let Ok(fiber) = fiber_on_circle(map, xi, tol) else {
            continue;
        };
        if !fiber.reliable || fiber.min_derivative() <= floor {
            continue;
        }
        if best
            .as_ref()
            .is_none_or(|b| fiber.cardinality() < b.cardinality())
        {
            best = Some(fiber);
        }
    }
    best.ok_or(Error::FiberUnreliable)
}

/// Computes `G(φ)`, its order and a generator.
pub fn symmetry_group(map: &RationalMap, seed: u64, tol: &Tolerances) -> Result<SymmetryGroup> {
    if map.is_constant() {
        return Err(Error::ConstantSymbol);
    }
    let fiber = choose_base_fiber(map, seed, tol)?;
    symmetry_group_at(map, &fiber, tol)
}

/// Group computation from a given base fiber.
pub fn symmetry_group_at(map: &RationalMap, fiber: &FiberOnCircle, tol: &Tolerances) -> Result<SymmetryGroup> {
    let n0 = fiber.cardinality();
    let xi0 = fiber.base;
    let t0 = xi0.arg();
    let angles = fiber.angles();
    let mut attempts = Vec::new();
    let mut found: Option<(usize, CircleMap)> = None;
    for d in (1..n0).filter(|d| n0 % d == 0) {
        let zeta = fiber.points[d].point;
        match track_local_inverse(map, xi0, zeta, tol) {
            Ok(rho) => match check_fiber_shift(map, &rho, &angles, d, tol) {
                Ok(()) => {
                    attempts.push(ShiftAttempt {
                        shift: d,
                        refuted: None,
                    });
                    found = Some((d, rho));
                    break;
                }
                Err(e) => attempts.push(ShiftAttempt {
                    shift: d,
                    refuted: Some(e.to_string()),
                }),
            },
            Err(e) => attempts.push(ShiftAttempt {
                shift: d,
                refuted: Some(e.to_string()),
            }),
        }
    }
    let (shift, generator) = match found {
        Some(x) => x,
        None => (n0, CircleMap::identity(t0, TRACK_NODES)),
    };
    let order = n0 / shift;

    let identity = CircleMap::identity(t0, TRACK_NODES);
    let mut elements = vec![identity];
    let mut min_proper_deviation = f64::INFINITY;
    for j in 1..order {
        let next = generator.compose(&elements[j - 1], map);
        min_proper_deviation = min_proper_deviation.min(next.identity_deviation());
        elements.push(next);
    }
    let cycle_error = if order == 1 {
        0.0
    } else {
        generator.compose(&elements[order - 1], map).identity_deviation()
    };
    if order > 1 && cycle_error > tol.track {
        return Err(Error::NoClosure {
            reason: format!("generator^{order} deviates from the identity by {cycle_error:.3e}"),
        });
    }
    Ok(SymmetryGroup {
        order,
        shift,
        base_fiber_size: n0,
        base_turns: t0.rem_euclid(TAU) / TAU,
        generator,
        elements,
        attempts,
        cycle_error,
        min_proper_deviation,
    })
}

/// Checks `ρ(ξ_i) = ξ_{i+d}` on the whole base fiber.
fn check_fiber_shift(map: &RationalMap, rho: &CircleMap, angles: &[f64], d: usize, tol: &Tolerances) -> Result<()> {
    let n0 = angles.len();
    for (i, &a) in angles.iter().enumerate() {
        let image = rho.eval(map, a);
        let want = angles[(i + d) % n0];
        let err = wrap(image - want).abs();
        if err > 1e2 * tol.track {
            return Err(Error::NoClosure {
                reason: format!("fiber point {i} maps off ξ_{{i+{d}}} by {err:.3e}"),
            });
        }
    }
    Ok(())
}

/// Divisibility diagnostics: the group order must divide every sampled fiber
/// cardinality and every sampled interior winding.
#[derive(Debug, Clone, Serialize)]
pub struct DivisibilityCheck {
    pub order: usize,
    pub fiber_law: bool,
    pub winding_law: bool,
    pub fibers_checked: usize,
    pub windings_checked: usize,
    pub fiber_counterexamples: Vec<FiberSample>,
    pub winding_counterexamples: Vec<WindingSample>,
}

pub fn group_order_check(order: usize, fibers: &[FiberSample], windings: &[WindingSample]) -> DivisibilityCheck {
    let fiber_counterexamples: Vec<FiberSample> = fibers
        .iter()
        .filter(|s| order == 0 || s.cardinality % order != 0)
        .copied()
        .collect();
    let winding_counterexamples: Vec<WindingSample> = windings
        .iter()
        .filter(|s| order == 0 || s.winding.rem_euclid(order as i64) != 0)
        .copied()
        .collect();
    DivisibilityCheck {
        order,
        fiber_law: fiber_counterexamples.is_empty(),
        winding_law: winding_counterexamples.is_empty(),
        fibers_checked: fibers.len(),
        windings_checked: windings.len(),
        fiber_counterexamples,
        winding_counterexamples,
    }
}
