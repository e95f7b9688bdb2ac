//! Fibers of the symbol on the unit circle and self-intersection multiplicities.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{cluster_roots, C64};
use crate::rational::RationalMap;
use crate::tol::Tolerances;

/// One point of a fiber on the circle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiberPoint {
    pub point: C64,
    /// Lifted angle in `[arg ξ, arg ξ + 2π)`.
    pub angle: f64,
    pub multiplicity: usize,
    pub residual: f64,
    /// `|φ'|` at the point.
    pub derivative: f64,
}

/// `{ζ ∈ 𝕋 : φ(ζ) = φ(ξ)}`, ordered anticlockwise starting at `ξ`.
#[derive(Debug, Clone, Serialize)]
pub struct FiberOnCircle {
    pub base: C64,
    pub points: Vec<FiberPoint>,
    /// Cleared when a root fell inside the ambiguity band around the circle.
    pub reliable: bool,
    /// Distances `||r| - 1|` of ambiguous roots.
    pub ambiguous: Vec<f64>,
}

impl FiberOnCircle {
    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.angle).collect()
    }

    pub fn min_derivative(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.derivative)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Newton iteration for `φ(e^{iθ}) = target` in the real unknown `θ`
/// (Gauss–Newton step on the complex residual).
pub(crate) fn polish_angle(map: &RationalMap, mut theta: f64, target: C64, iters: usize) -> (f64, f64) {
    let mut residual = f64::INFINITY;
    for _ in 0..iters {
        let z = C64::from_polar(1.0, theta);
        let (f, df) = map.eval_with_derivative(z);
        let g = f - target;
        residual = g.norm();
        let dg = C64::new(0.0, 1.0) * z * df;
        let denom = dg.norm_sqr();
        if denom == 0.0 {
            break;
        }
        let step = (dg.conj() * g).re / denom;
        theta -= step;
        if step.abs() <= 1e-16 * (1.0 + theta.abs()) {
            break;
        }
    }
    let z = C64::from_polar(1.0, theta);
    residual = residual.min((map.eval(z) - target).norm());
    (theta, residual)
}

/// Roots farther than this from the circle are never circle candidates.
const SCREEN: f64 = 1e-3;

pub fn fiber_on_circle(map: &RationalMap, xi: C64, tol: &Tolerances) -> Result<FiberOnCircle> {
    if (xi.norm() - 1.0).abs() > tol.unimod {
        return Err(Error::InvalidSymbol(format!("base point {xi} is not on the unit circle")));
    }
    let xi = xi / xi.norm();
    let target = map.eval(xi);
    let shifted = map.shifted_numerator(target);
    let roots = shifted.raw_roots(tol)?;

    let mut on_circle = Vec::new();
    let mut ambiguous = Vec::new();
    for r in roots {
        let radial = (r.norm() - 1.0).abs();
        if radial >= SCREEN {
            continue;
        }
        // root moduli of the expanded polynomial can be far less accurate than
        // the map itself; measure the distance to the circle through φ instead
        let (theta, residual) = polish_angle(map, r.arg(), target, 12);
        let z = C64::from_polar(1.0, theta);
        let slope = map.eval_with_derivative(z).1.norm();
        let d = if slope > 0.0 { radial.min(residual / slope) } else { radial };
        if d < tol.circle {
            on_circle.push(z);
        } else if d < 10.0 * tol.circle {
            ambiguous.push(d);
        }
    }
    let clusters = cluster_roots(&on_circle, tol.cluster);

    let base_angle = xi.arg();
    let mut points: Vec<FiberPoint> = clusters
        .iter()
        .map(|c| {
            let z = c.value / c.value.norm();
            let mut angle = (z.arg() - base_angle).rem_euclid(TAU);
            if angle > TAU - 1e-12 {
                angle = 0.0;
            }
            (z, angle, c.multiplicity)
        })
        .map(|(z, angle, multiplicity)| {
            let (f, df) = map.eval_with_derivative(z);
            FiberPoint {
                point: z,
                angle: base_angle + angle,
                multiplicity,
                residual: (f - target).norm(),
                derivative: df.norm(),
            }
        })
        .collect();
    points.sort_by(|a, b| a.angle.total_cmp(&b.angle));

    // the base point itself is always a member; pin it exactly
    let nearest = points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (p.point - xi).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let (_, df) = map.eval_with_derivative(xi);
    let pinned = FiberPoint {
        point: xi,
        angle: base_angle,
        multiplicity: 1,
        residual: 0.0,
        derivative: df.norm(),
    };
    match nearest {
        Some((i, d)) if d < 1e3 * tol.cluster => {
            let multiplicity = points[i].multiplicity;
            points.remove(i);
            points.insert(
                0,
                FiberPoint {
                    multiplicity,
                    ..pinned
                },
            );
        }
        _ => {
            points.insert(0, pinned);
            ambiguous.push(0.0);
        }
    }

    Ok(FiberOnCircle {
        base: xi,
        points,
        reliable: ambiguous.is_empty(),
        ambiguous,
    })
}

/// `N(φ - φ(ξ), 𝕋)`: number of distinct points in the fiber through `ξ`.
pub fn self_intersection_multiplicity(map: &RationalMap, xi: C64, tol: &Tolerances) -> Result<usize> {
    let fiber = fiber_on_circle(map, xi, tol)?;
    if !fiber.reliable {
        let distance = fiber.ambiguous.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::NumericalAmbiguity { distance });
    }
    Ok(fiber.cardinality())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiberSample {
    /// Base angle in turns.
    pub xi_turns: f64,
    pub cardinality: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinSelfIntersection {
    pub n: usize,
    /// Base point attaining the minimum, in turns.
    pub witness_turns: f64,
    pub samples: Vec<FiberSample>,
    pub discarded: usize,
    pub divisible_by_group: Option<bool>,
}

fn derivative_scale(map: &RationalMap) -> f64 {
    1.0 + map.circle_bounds(512).1
}

/// Fiber usable for sampling: reliable and free of critical points.
fn generic_fiber(map: &RationalMap, turn: f64, crit_floor: f64, tol: &Tolerances) -> Option<FiberOnCircle> {
    let xi = C64::from_polar(1.0, TAU * turn);
    let fiber = fiber_on_circle(map, xi, tol).ok()?;
    (fiber.reliable && fiber.min_derivative() > crit_floor).then_some(fiber)
}

/// Minimum of the fiber cardinality over `samples` seeded random base points.
///
/// Base points whose fiber is unreliable or meets a critical point are
/// replaced by fresh draws, up to four times the budget in total.
pub fn min_self_intersection(
    map: &RationalMap,
    samples: usize,
    seed: u64,
    group_order: Option<usize>,
    tol: &Tolerances,
) -> Result<MinSelfIntersection> {
    if map.is_constant() {
        return Err(Error::ConstantSymbol);
    }
    let crit_floor = tol.residual * derivative_scale(map);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF1BE_F1BE);
    let mut accepted: Vec<FiberSample> = Vec::with_capacity(samples);
    let mut drawn = 0usize;
    let mut discarded = 0usize;
    while accepted.len() < samples && drawn < 4 * samples.max(1) {
        let want = (samples - accepted.len()).min(4 * samples - drawn);
        let turns: Vec<f64> = (0..want).map(|_| rng.gen::<f64>()).collect();
        drawn += want;
        let fibers: Vec<Option<usize>> = turns
            .par_iter()
            .map(|&t| generic_fiber(map, t, crit_floor, tol).map(|f| f.cardinality()))
            .collect();
        for (t, f) in turns.into_iter().zip(fibers) {
            match f {
                Some(cardinality) => accepted.push(FiberSample {
                    xi_turns: t,
                    cardinality,
                }),
                None => discarded += 1,
            }
        }
    }
    let best = accepted
        .iter()
        .enumerate()
        .min_by_key(|(i, s)| (s.cardinality, *i))
        .map(|(_, s)| *s)
        .ok_or(Error::NoReliableFiber { tried: drawn })?;
    let divisible_by_group =
        group_order.map(|o| o > 0 && accepted.iter().all(|s| s.cardinality % o == 0));
    Ok(MinSelfIntersection {
        n: best.cardinality,
        witness_turns: best.xi_turns,
        samples: accepted,
        discarded,
        divisible_by_group,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FsiVerdict {
    Fsi,
    NotFsi,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct FsiReport {
    pub verdict: FsiVerdict,
    /// Sample angles (turns) whose fiber has more than one point.
    pub witnesses: Vec<f64>,
    pub fraction: f64,
    pub clusters: usize,
    pub longest_run: usize,
    pub unreliable: usize,
}

pub const ARC_RUN: usize = 8;

/// Heuristic finite-self-intersection classification from `samples`
/// equispaced base points.
pub fn fsi_classify(map: &RationalMap, samples: usize, seed: u64, tol: &Tolerances) -> Result<FsiReport> {
    if map.is_constant() {
        return Err(Error::ConstantSymbol);
    }
    let m = samples.max(1);
    let offset = crate::contour::seed_fraction(seed);
    let multi: Vec<Option<bool>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let turn = (k as f64 + offset) / m as f64;
            self_intersection_multiplicity(map, C64::from_polar(1.0, TAU * turn), tol)
                .ok()
                .map(|n| n > 1)
        })
        .collect();
    let unreliable = multi.iter().filter(|x| x.is_none()).count();
    let flags: Vec<bool> = multi.iter().map(|x| x.unwrap_or(false)).collect();
    let witnesses: Vec<f64> = flags
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(k, _)| (k as f64 + offset) / m as f64)
        .collect();
    let count = witnesses.len();
    let reliable = m - unreliable;
    let fraction = if reliable == 0 {
        1.0
    } else {
        count as f64 / reliable as f64
    };

    // cyclic runs of consecutive multi-point samples
    let (longest_run, clusters) = if count == m {
        (m, 1)
    } else {
        let start = flags.iter().position(|&f| !f).unwrap_or(0);
        let mut longest = 0;
        let mut current = 0;
        let mut clusters = 0;
        for k in 1..=m {
            if flags[(start + k) % m] {
                if current == 0 {
                    clusters += 1;
                }
                current += 1;
                longest = longest.max(current);
            } else {
                current = 0;
            }
        }
        (longest, clusters)
    };

    let order = map.order();
    let verdict = if longest_run >= ARC_RUN {
        FsiVerdict::NotFsi
    } else if unreliable * 2 <= m
        && fraction < 2.0 / (m as f64).sqrt()
        && clusters <= order * order
    {
        FsiVerdict::Fsi
    } else {
        FsiVerdict::Inconclusive
    };
    Ok(FsiReport {
        verdict,
        witnesses,
        fraction,
        clusters,
        longest_run,
        unreliable,
    })
}
