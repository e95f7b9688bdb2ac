//! Rational maps in coprime coefficient form.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{Polynomial, C64};
use crate::tol::Tolerances;

/// `num / den` with no common roots, `den` monic.
///
/// Poles and the order `max(deg num, deg den)` are cached at construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
    poles: Vec<C64>,
    order: usize,
}

impl RationalMap {
    pub fn polynomial(p: Polynomial) -> Self {
        let order = p.deg();
        Self {
            num: p,
            den: Polynomial::one(),
            poles: Vec::new(),
            order,
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.deg() == 0
    }

    pub fn is_constant(&self) -> bool {
        self.order == 0
    }

    /// Evaluates the map; poles evaluate to an infinite value.
    pub fn eval(&self, z: C64) -> C64 {
        let d = self.den.eval(z);
        if d.norm() == 0.0 {
            return C64::new(f64::INFINITY, 0.0);
        }
        self.num.eval(z) / d
    }

    pub fn try_eval(&self, z: C64) -> Result<C64> {
        let d = self.den.eval(z);
        if d.norm() == 0.0 {
            return Err(Error::PoleHit(z));
        }
        Ok(self.num.eval(z) / d)
    }

    /// `(φ(z), φ'(z))`.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let (n, dn) = self.num.eval_with_derivative(z);
        let (d, dd) = self.den.eval_with_derivative(z);
        let inv = d.inv();
        (n * inv, (dn * d - n * dd) * inv * inv)
    }

    /// Numerator of `φ - λ`, i.e. `num - λ·den`.
    pub fn shifted_numerator(&self, lambda: C64) -> Polynomial {
        self.num.sub(&self.den.scale(lambda))
    }

    /// `φ(ωz)` as a rational map (not renormalized beyond trimming).
    pub fn rotate(&self, omega: C64) -> Result<Self> {
        rational_normalize(
            self.num.rotate(omega),
            self.den.rotate(omega),
            &Tolerances::default(),
        )
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &RationalMap, tol: &Tolerances) -> Result<Self> {
        let m = self.order;
        let p = &inner.num;
        let q = &inner.den;
        // homogenize: P(p/q) * q^m
        let homog = |outer: &Polynomial| {
            let mut acc = Polynomial::zero();
            for (k, &c) in outer.coeffs().iter().enumerate() {
                let term = p.pow(k).mul(&q.pow(m - k)).scale(c);
                acc = acc.add(&term);
            }
            acc
        };
        rational_normalize(homog(&self.num), homog(&self.den), tol)
    }

    pub fn mul(&self, other: &RationalMap, tol: &Tolerances) -> Result<Self> {
        rational_normalize(
            self.num.mul(&other.num),
            self.den.mul(&other.den),
            tol,
        )
    }

    /// Rejects constant symbols, poles on the closed disk and orders above the cap.
    pub fn validate_symbol(&self, tol: &Tolerances) -> Result<()> {
        if self.is_constant() {
            return Err(Error::ConstantSymbol);
        }
        if self.order > tol.degree_cap {
            return Err(Error::DegreeOverflow {
                order: self.order,
                cap: tol.degree_cap,
            });
        }
        if let Some(&pole) = self.poles.iter().find(|p| p.norm() <= 1.0 + tol.polegap) {
            return Err(Error::PoleOnClosedDisk { pole });
        }
        Ok(())
    }

    /// `(sup |φ|, sup |φ'|)` over `m` equispaced points of the unit circle.
    pub fn circle_bounds(&self, m: usize) -> (f64, f64) {
        (0..m)
            .map(|k| {
                let z = C64::from_polar(1.0, TAU * k as f64 / m as f64);
                let (f, df) = self.eval_with_derivative(z);
                (f.norm(), df.norm())
            })
            .fold((0.0, 0.0), |(a, b), (f, df)| (f64::max(a, f), f64::max(b, df)))
    }

    /// Largest `n` with `φ(e^{2πi/n} z) = φ(z)`.
    pub fn rotational_order(&self, tol: &Tolerances) -> Result<usize> {
        if self.is_constant() {
            return Err(Error::ConstantSymbol);
        }
        if self.is_polynomial() {
            return Ok(polynomial_rotational_order(&self.num, tol));
        }
        let scale = self.num.max_coeff() * self.den.max_coeff();
        let mut candidates = divisors(2 * self.order);
        candidates.reverse();
        for n in candidates {
            if n == 1 {
                return Ok(1);
            }
            let omega = C64::from_polar(1.0, TAU / n as f64);
            let lhs = self.num.rotate(omega).mul(&self.den);
            let rhs = self.num.mul(&self.den.rotate(omega));
            let diff = lhs.sub(&rhs);
            if diff.max_coeff() <= tol.residual * scale {
                return Ok(n);
            }
        }
        Ok(1)
    }
}

/// gcd of the exponents `k ≥ 1` carrying a nonzero coefficient.
pub fn polynomial_rotational_order(p: &Polynomial, tol: &Tolerances) -> usize {
    let max = p.max_coeff();
    p.coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.norm() > tol.coeff * max)
        .fold(0, |g, (k, _)| gcd(g, k))
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Cancels common roots (by clustering), makes the denominator monic and
/// caches poles and order.
pub fn rational_normalize(
    num: Polynomial,
    den: Polynomial,
    tol: &Tolerances,
) -> Result<RationalMap> {
    if den.is_zero() {
        return Err(Error::DenominatorZero);
    }
    let mut num = Polynomial::with_threshold(num.coeffs().to_vec(), tol.coeff);
    let mut den = Polynomial::with_threshold(den.coeffs().to_vec(), tol.coeff);

    if !num.is_zero() && num.deg() > 0 && den.deg() > 0 {
        let num_roots = num.raw_roots(tol)?;
        let den_roots = den.raw_roots(tol)?;
        let mut used = vec![false; num_roots.len()];
        for &d in &den_roots {
            let scale = d.norm().max(1.0);
            let hit = num_roots
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, &r)| (i, (r - d).norm()))
                .filter(|&(_, dist)| dist <= tol.cluster * scale)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((i, _)) = hit {
                used[i] = true;
                let r = (num_roots[i] + d) * 0.5;
                num = num.deflate(r);
                den = den.deflate(r);
            }
        }
    }

    let lead = den.leading();
    let num = Polynomial::with_threshold(
        num.coeffs().iter().map(|&c| c / lead).collect(),
        tol.coeff,
    );
    let mut den_coeffs: Vec<Complex64> = den.coeffs().iter().map(|&c| c / lead).collect();
    if let Some(last) = den_coeffs.last_mut() {
        *last = C64::new(1.0, 0.0);
    }
    let den = Polynomial::with_threshold(den_coeffs, tol.coeff);

    let poles = if den.deg() > 0 {
        den.raw_roots(tol)?
    } else {
        Vec::new()
    };
    let order = num.deg().max(den.deg());
    Ok(RationalMap {
        num,
        den,
        poles,
        order,
    })
}
