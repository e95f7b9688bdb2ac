//! Test-only oracles, independent of the library's root finder and trackers.
#![allow(dead_code)]

use nalgebra::DMatrix;
use symcurve::{RationalMap, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Roots from the eigenvalues of the companion matrix, then two Newton steps.
pub fn companion_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = m.schur().eigenvalues().expect("complex Schur form");
    eig.iter()
        .map(|&r| {
            let mut r = r;
            for _ in 0..2 {
                let (mut p, mut dp) = (c(0.0, 0.0), c(0.0, 0.0));
                for &a in coeffs.iter().rev() {
                    dp = dp * r + p;
                    p = p * r + a;
                }
                if dp.norm() > 0.0 {
                    let step = p / dp;
                    if step.norm() < 1e-6 * (1.0 + r.norm()) {
                        r -= step;
                    }
                }
            }
            r
        })
        .collect()
}

/// Coefficients of `num - λ·den`.
pub fn shifted(map: &RationalMap, lambda: C64) -> Vec<C64> {
    let (p, q) = (map.num().coeffs(), map.den().coeffs());
    (0..p.len().max(q.len()))
        .map(|k| p.get(k).copied().unwrap_or_default() - lambda * q.get(k).copied().unwrap_or_default())
        .collect()
}

/// Zeros of `φ - λ` in `|z| < radius`, with multiplicity.
pub fn count_in_disk(map: &RationalMap, lambda: C64, radius: f64) -> usize {
    companion_roots(&shifted(map, lambda))
        .into_iter()
        .filter(|r| r.norm() < radius)
        .count()
}

/// Smallest distance from a root of `φ - λ` to the circle `|z| = radius`.
pub fn boundary_gap(map: &RationalMap, lambda: C64, radius: f64) -> f64 {
    companion_roots(&shifted(map, lambda))
        .into_iter()
        .map(|r| (r.norm() - radius).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Distinct circle points in the fiber of `φ(ξ)`.
pub fn fiber_cardinality(map: &RationalMap, xi: C64) -> usize {
    let target = map.eval(xi);
    let roots: Vec<C64> = companion_roots(&shifted(map, target))
        .into_iter()
        .filter(|r| (r.norm() - 1.0).abs() < 1e-3)
        .filter_map(|r| snap_to_circle(map, r, target))
        .collect();
    let mut distinct: Vec<C64> = Vec::new();
    for r in roots {
        if distinct.iter().all(|d| (d - r).norm() > 1e-5) {
            distinct.push(r);
        }
    }
    distinct.len()
}

/// Newton on the angle, minimising `|φ(e^{iθ}) - λ|`; keeps the point when the
/// implied radial distance `residual / |φ'|` is below `1e-6`.
fn snap_to_circle(map: &RationalMap, r: C64, target: C64) -> Option<C64> {
    let h = 1e-7;
    let mut theta = r.arg();
    for _ in 0..20 {
        let z = C64::from_polar(1.0, theta);
        let g = map.eval(z) - target;
        let dg = (map.eval(C64::from_polar(1.0, theta + h)) - map.eval(C64::from_polar(1.0, theta - h))) / (2.0 * h);
        if dg.norm() == 0.0 {
            break;
        }
        theta -= (dg.conj() * g).re / dg.norm_sqr();
    }
    let z = C64::from_polar(1.0, theta);
    let g = (map.eval(z) - target).norm();
    let slope = ((map.eval(C64::from_polar(1.0, theta + h)) - map.eval(C64::from_polar(1.0, theta - h))) / (2.0 * h)).norm();
    let radial = (r.norm() - 1.0).abs();
    let d = if slope > 0.0 { radial.min(g / slope) } else { radial };
    (d < 1e-6).then_some(z)
}

/// Minimum fiber cardinality over `m` equispaced circle points.
pub fn min_fiber_scan(map: &RationalMap, m: usize) -> usize {
    (0..m)
        .map(|k| {
            let xi = C64::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.318) / m as f64);
            fiber_cardinality(map, xi)
        })
        .min()
        .unwrap()
}

/// Moebius map `(a w + b)/(c w + d)` through three point pairs, from the null
/// vector of the 3×4 linear system.
pub fn fit_moebius(src: [C64; 3], dst: [C64; 3]) -> impl Fn(C64) -> C64 {
    let mut a = DMatrix::<C64>::zeros(4, 4);
    for i in 0..3 {
        a[(i, 0)] = src[i];
        a[(i, 1)] = c(1.0, 0.0);
        a[(i, 2)] = -dst[i] * src[i];
        a[(i, 3)] = -dst[i];
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let imin = (0..4)
        .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
        .unwrap();
    let v: Vec<C64> = (0..4).map(|j| v_t[(imin, j)].conj()).collect();
    move |w: C64| (v[0] * w + v[1]) / (v[2] * w + v[3])
}

pub fn circle(m: usize) -> Vec<C64> {
    (0..m)
        .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
        .collect()
}

/// 128 circle points and 128 points of `0.9·𝔻̄`.
pub fn grid_256() -> Vec<C64> {
    let mut g: Vec<C64> = (0..128)
        .map(|k| C64::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.125) / 128.0))
        .collect();
    for (radius, count) in [(0.25, 16), (0.5, 32), (0.7, 40), (0.9, 40)] {
        for k in 0..count {
            g.push(C64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.6) / count as f64));
        }
    }
    g
}
