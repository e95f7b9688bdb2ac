//! Winding numbers of the symbol curve and argument-principle zero counts.
//!
//! Windings are obtained by tracking the argument of `φ(r e^{it}) - c` over an
//! adaptively bisected grid. A segment is accepted only when its argument jump
//! is below π/2 *and* a Lipschitz bound keeps the whole sub-arc away from `c`
//! by more than the on-curve margin, so every accepted segment contributes its
//! principal argument increment exactly.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::C64;
use crate::rational::RationalMap;
use crate::tol::Tolerances;

pub const INITIAL_GRID: usize = 256;
pub const SEGMENT_CAP: usize = 1 << 20;
const LIPSCHITZ_PROBES: usize = 4096;

/// Origin-centred counting regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Region {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    /// The band `1 - UNIT_BAND < |z| < 1 + UNIT_BAND`.
    UnitCircle,
}

pub const UNIT_BAND: f64 = 1e-3;

impl Region {
    fn radii(&self) -> (Option<f64>, f64) {
        match *self {
            Region::Disk { radius } => (None, radius),
            Region::Annulus { inner, outer } => (Some(inner), outer),
            Region::UnitCircle => (Some(1.0 - UNIT_BAND), 1.0 + UNIT_BAND),
        }
    }

    fn validate(&self) -> Result<()> {
        let (inner, outer) = self.radii();
        let ok = outer > 0.0 && inner.is_none_or(|r| r > 0.0 && r < outer);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSymbol(format!("invalid region {self:?}")))
        }
    }
}

/// Parameter grid and values of `φ(r e^{it})` after adaptive refinement.
#[derive(Debug, Clone, Serialize)]
pub struct CurveSamples {
    pub t: Vec<f64>,
    pub values: Vec<C64>,
    /// `refined[k]` is set when the segment ending at `t[k+1]` came from bisection.
    pub refined: Vec<bool>,
}

/// A circle `|z| = radius` traced by the symbol, with the bounds needed for
/// certified argument tracking.
pub struct CircleTrace<'a> {
    map: &'a RationalMap,
    radius: f64,
    /// Lipschitz bound of `t ↦ φ(r e^{it})`.
    lipschitz: f64,
    /// `(Σ|a_k| r^k, Σ k|a_k| r^{k-1})` for numerator and denominator.
    num_bounds: (f64, f64),
    den_bounds: (f64, f64),
    sup: f64,
}

fn coefficient_bounds(coeffs: &[C64], radius: f64) -> (f64, f64) {
    coeffs.iter().enumerate().fold((0.0, 0.0), |(v, d), (k, c)| {
        let a = c.norm();
        let dk = if k == 0 { 0.0 } else { k as f64 * a * radius.powi(k as i32 - 1) };
        (v + a * radius.powi(k as i32), d + dk)
    })
}

impl<'a> CircleTrace<'a> {
    pub fn new(map: &'a RationalMap, radius: f64) -> Self {
        let (sup, dsup) = (0..LIPSCHITZ_PROBES)
            .map(|k| {
                let z = C64::from_polar(radius, TAU * k as f64 / LIPSCHITZ_PROBES as f64);
                let (f, df) = map.eval_with_derivative(z);
                (f.norm(), df.norm())
            })
            .fold((0.0, 0.0), |(a, b), (f, df)| (f64::max(a, f), f64::max(b, df)));
        Self {
            map,
            radius,
            lipschitz: 1.25 * radius * dsup + 1e-12,
            num_bounds: coefficient_bounds(map.num().coeffs(), radius),
            den_bounds: coefficient_bounds(map.den().coeffs(), radius),
            sup,
        }
    }

    /// Lipschitz bound on the arc `[a, b]`: the global probe bound, tightened by
    /// `r (N₁D₀ + N₀D₁) / min|den|²` where `min|den|` comes from pole distances.
    fn arc_lipschitz(&self, a: f64, b: f64) -> f64 {
        let mid = self.point(0.5 * (a + b));
        let half = 0.5 * self.radius * (b - a);
        let mut den_min = self.map.den().leading().norm();
        for p in self.map.poles() {
            let d = (mid - p).norm() - half;
            if d <= 0.0 {
                return self.lipschitz;
            }
            den_min *= d;
        }
        let ((n0, n1), (d0, d1)) = (self.num_bounds, self.den_bounds);
        let local = self.radius * (n1 * d0 + n0 * d1) / (den_min * den_min);
        if local.is_finite() {
            self.lipschitz.min(local)
        } else {
            self.lipschitz
        }
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    fn point(&self, t: f64) -> C64 {
        if t == TAU {
            C64::new(self.radius, 0.0)
        } else {
            C64::from_polar(self.radius, t)
        }
    }

    /// On-curve margin `ε·(1 + sup|φ|)`.
    pub fn margin(&self, tol: &Tolerances) -> f64 {
        tol.margin * (1.0 + self.sup)
    }

    /// Winding number of the traced curve around `c` together with the refined grid.
    pub fn winding_with_samples(&self, c: C64, margin: f64) -> Result<(i64, CurveSamples)> {
        let f = |t: f64| self.map.eval(self.point(t)) - c;
        let mut t_out = vec![0.0];
        let first = f(0.0);
        let mut v_out = vec![first + c];
        let mut refined = Vec::new();
        let mut total = 0.0;
        let mut segments = 0usize;
        let mut wa_prev = first;
        for k in 0..INITIAL_GRID {
            let ta = TAU * k as f64 / INITIAL_GRID as f64;
            let tb = TAU * (k + 1) as f64 / INITIAL_GRID as f64;
            let wb = f(tb);
            let mut stack = vec![(ta, wa_prev, tb, wb, false)];
            while let Some((a, wa, b, wb, split)) = stack.pop() {
                let low = wa.norm().min(wb.norm());
                if low <= margin {
                    return Err(Error::PointOnCurve {
                        distance: low,
                        margin,
                    });
                }
                let jump = (wb / wa).arg();
                let reach = self.arc_lipschitz(a, b) * (b - a) * 0.5;
                if jump.abs() < FRAC_PI_2 && low - reach > margin {
                    total += jump;
                    t_out.push(b);
                    v_out.push(wb + c);
                    refined.push(split);
                    segments += 1;
                    continue;
                }
                if segments + stack.len() >= SEGMENT_CAP || b - a < 1e-15 {
                    return Err(Error::RefinementOverflow { cap: SEGMENT_CAP });
                }
                let m = 0.5 * (a + b);
                let wm = f(m);
                stack.push((m, wm, b, wb, true));
                stack.push((a, wa, m, wm, true));
            }
            wa_prev = wb;
        }
        let winding = (total / TAU).round() as i64;
        Ok((
            winding,
            CurveSamples {
                t: t_out,
                values: v_out,
                refined,
            },
        ))
    }

    pub fn winding(&self, c: C64, margin: f64) -> Result<i64> {
        self.winding_with_samples(c, margin).map(|(w, _)| w)
    }
}

/// Winding number of `φ(𝕋)` around `c`.
pub fn winding_number(map: &RationalMap, c: C64, tol: &Tolerances) -> Result<i64> {
    let trace = CircleTrace::new(map, 1.0);
    trace.winding(c, trace.margin(tol))
}

/// Refined samples of the unit-circle curve, refined about `c`.
pub fn curve_samples(map: &RationalMap, c: C64, tol: &Tolerances) -> Result<CurveSamples> {
    let trace = CircleTrace::new(map, 1.0);
    trace
        .winding_with_samples(c, trace.margin(tol))
        .map(|(_, s)| s)
}

/// Zeros of `φ - λ` in `region`, counted with multiplicity.
///
/// Computed twice, by boundary winding and by filtering the roots of
/// `num - λ·den`; disagreement is an error.
pub fn count_zeros(map: &RationalMap, lambda: C64, region: Region, tol: &Tolerances) -> Result<usize> {
    region.validate()?;
    let (inner, outer) = region.radii();
    let in_closure = |r: f64| match inner {
        Some(ri) => r >= ri * (1.0 - tol.polegap) && r <= outer * (1.0 + tol.polegap),
        None => r <= outer * (1.0 + tol.polegap),
    };
    if map.poles().iter().any(|p| in_closure(p.norm())) {
        return Err(Error::PoleInRegion);
    }

    let shifted = map.shifted_numerator(lambda);
    if shifted.is_zero() {
        return Err(Error::ZeroOnBoundary);
    }
    let roots = shifted.raw_roots(tol)?;
    let boundary_gap = |r: f64, radius: f64| (r - radius).abs() <= 1e3 * tol.polegap * radius;
    let mut direct = 0usize;
    for z in &roots {
        let r = z.norm();
        if boundary_gap(r, outer) || inner.is_some_and(|ri| boundary_gap(r, ri)) {
            return Err(Error::ZeroOnBoundary);
        }
        let inside = r < outer && inner.is_none_or(|ri| r > ri);
        if inside {
            direct += 1;
        }
    }

    let wind = |radius: f64| -> Result<i64> {
        let trace = CircleTrace::new(map, radius);
        trace
            .winding(lambda, trace.margin(tol))
            .map_err(|e| match e {
                Error::PointOnCurve { .. } => Error::ZeroOnBoundary,
                other => other,
            })
    };
    let mut winding = wind(outer)?;
    if let Some(ri) = inner {
        winding -= wind(ri)?;
    }
    if winding < 0 || winding as usize != direct {
        return Err(Error::OracleMismatch {
            winding,
            roots: direct,
        });
    }
    Ok(direct)
}

/// One accepted interior sample of the minimal-winding search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindingSample {
    pub point: C64,
    pub winding: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinWinding {
    pub n: i64,
    pub witness: C64,
    pub samples: Vec<WindingSample>,
    pub rejected: usize,
    /// Set when a group order was supplied: whether it divides every sampled winding.
    pub divisible_by_group: Option<bool>,
}

const BOUNDARY_RADII: [f64; 6] = [0.9, 0.95, 0.98, 0.99, 0.995, 0.999];
const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

pub(crate) fn seed_fraction(seed: u64) -> f64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// `i`-th interior sample point. Budgets take prefixes of this sequence, so a
/// larger budget always sees a superset of points.
pub fn interior_sample(i: usize, seed: u64) -> C64 {
    let offset = seed_fraction(seed);
    if i % 4 != 3 {
        let j = i - i / 4;
        let radius = BOUNDARY_RADII[j % BOUNDARY_RADII.len()];
        let turn = (offset + j as f64 * GOLDEN).fract();
        C64::from_polar(radius, TAU * turn)
    } else {
        let j = (i / 4 + 1) as u64;
        let u = radical_inverse(j, 2);
        let v = radical_inverse(j, 3);
        C64::from_polar(0.9 * u.sqrt(), TAU * (v + offset).fract())
    }
}

/// Minimum of `wind(φ, φ(a))` over `budget` deterministic interior points.
pub fn min_winding(
    map: &RationalMap,
    budget: usize,
    seed: u64,
    group_order: Option<usize>,
    tol: &Tolerances,
) -> Result<MinWinding> {
    if map.is_constant() {
        return Err(Error::ConstantSymbol);
    }
    let trace = CircleTrace::new(map, 1.0);
    let results: Vec<Option<WindingSample>> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let a = interior_sample(i, seed);
            let c = map.eval(a);
            trace
                .winding(c, trace.margin(tol))
                .ok()
                .map(|winding| WindingSample { point: a, winding })
        })
        .collect();
    let rejected = results.iter().filter(|r| r.is_none()).count();
    let samples: Vec<WindingSample> = results.into_iter().flatten().collect();
    let best = samples
        .iter()
        .enumerate()
        .min_by_key(|(i, s)| (s.winding, *i))
        .map(|(_, s)| *s)
        .ok_or(Error::NoValidSample { tried: budget })?;
    let divisible_by_group = group_order.map(|o| {
        samples
            .iter()
            .all(|s| o > 0 && s.winding.rem_euclid(o as i64) == 0)
    });
    Ok(MinWinding {
        n: best.winding,
        witness: best.point,
        samples,
        rejected,
        divisible_by_group,
    })
}
