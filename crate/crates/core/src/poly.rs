//! Dense complex polynomials and a simultaneous-iteration root finder.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Polynomial with complex coefficients, `coeffs[k]` multiplying `z^k`.
///
/// The representation is always trimmed: the last coefficient exceeds the
/// relative zero threshold. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

/// A clustered root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: C64,
    pub multiplicity: usize,
}

impl Polynomial {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self::with_threshold(coeffs, Tolerances::default().coeff)
    }

    /// Builds a polynomial, dropping leading coefficients whose modulus is at
    /// most `eps * max|a_k|`.
    pub fn with_threshold(mut coeffs: Vec<C64>, eps: f64) -> Self {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 || !max.is_finite() {
            coeffs.clear();
            return Self { coeffs };
        }
        while let Some(last) = coeffs.last() {
            if last.norm() <= eps * max {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self { coeffs: vec![ONE] }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = ONE;
        Self { coeffs }
    }

    /// Monic polynomial with the given roots (repeated roots listed repeatedly).
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = vec![ONE];
        for &r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a double Horner pass.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `Σ |a_k| |z|^k`, the natural scale for backward-error checks.
    pub fn abs_scale(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// `self(inner(z))` by Horner's scheme over polynomials.
    pub fn compose(&self, inner: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| acc.mul(inner).add(&Self::constant(c)))
    }

    /// `self(ωz)`: coefficient `k` picks up `ω^k`.
    pub fn rotate(&self, omega: C64) -> Self {
        let mut w = ONE;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(c * w);
            w *= omega;
        }
        Self::new(out)
    }

    /// Quotient of synthetic division by `(z - r)`; the remainder is dropped.
    pub fn deflate(&self, r: C64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut q = vec![ZERO; n - 1];
        let mut acc = ZERO;
        for k in (1..n).rev() {
            acc = acc * r + self.coeffs[k];
            q[k - 1] = acc;
        }
        Self::new(q)
    }

    /// Roots clustered by proximity, multiplicities summed.
    pub fn roots(&self, tol: &Tolerances) -> Result<Vec<Root>> {
        Ok(cluster_roots(&self.raw_roots(tol)?, tol.cluster))
    }

    /// All `deg` roots, repeated according to multiplicity, unclustered.
    pub fn raw_roots(&self, tol: &Tolerances) -> Result<Vec<C64>> {
        let deg = self.degree().ok_or(Error::ZeroPolynomial)?;
        if deg == 0 {
            return Ok(Vec::new());
        }
        let max = self.max_coeff();
        let low = self
            .coeffs
            .iter()
            .take_while(|c| c.norm() <= tol.coeff * max)
            .count();
        let mut roots = vec![ZERO; low];
        let rest = &self.coeffs[low..];
        if rest.len() <= 1 {
            return Ok(roots);
        }
        let lead = rest[rest.len() - 1];
        let monic: Vec<C64> = rest.iter().map(|&c| c / lead).collect();
        let reduced = Polynomial { coeffs: monic };

        let accept = |rs: &[C64]| {
            rs.iter().all(|&r| {
                r.is_finite() && reduced.eval(r).norm() <= tol.residual * reduced.abs_scale(r)
            })
        };

        let (found, converged) = aberth(&reduced.coeffs, None, 600);
        if converged && accept(&found) {
            roots.extend(found);
            return Ok(roots);
        }
        let eig = companion_eigenvalues(&reduced.coeffs);
        let (refined, converged) = match eig {
            Some(start) => aberth(&reduced.coeffs, Some(start), 200),
            None => (found, false),
        };
        if accept(&refined) {
            roots.extend(refined);
            Ok(roots)
        } else {
            roots.extend(refined);
            Err(Error::NonConvergence {
                iterations: if converged { 200 } else { 800 },
                partial: roots,
            })
        }
    }
}

/// Spec-named entry point: roots of `p` with multiplicities.
pub fn poly_roots(p: &Polynomial, tol: &Tolerances) -> Result<Vec<Root>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    p.roots(tol)
}

/// Single-linkage clustering of roots; representative is the cluster mean.
pub fn cluster_roots(roots: &[C64], delta: f64) -> Vec<Root> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= delta * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, C64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += roots[i];
                g.2 += 1;
            }
            None => groups.push((r, roots[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, m)| Root {
            value: sum / m as f64,
            multiplicity: m,
        })
        .collect()
}

/// Aberth–Ehrlich iteration on a monic polynomial (`monic.last() == 1`).
/// Returns the approximations and whether every root met the backward-error
/// stopping rule.
fn aberth(monic: &[C64], start: Option<Vec<C64>>, max_iter: usize) -> (Vec<C64>, bool) {
    let n = monic.len() - 1;
    let p = Polynomial {
        coeffs: monic.to_vec(),
    };
    let mut z = start.unwrap_or_else(|| initial_guesses(monic));
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    for _ in 0..max_iter {
        if done.iter().all(|&d| d) {
            return (z, true);
        }
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pz, dpz) = p.eval_with_derivative(z[i]);
            if pz.norm() <= 4.0 * (n as f64) * eps * p.abs_scale(z[i]) {
                done[i] = true;
                continue;
            }
            let ratio = if dpz.norm() == 0.0 {
                C64::new(1e-8, 1e-8) * (1.0 + z[i].norm())
            } else {
                pz / dpz
            };
            let s: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        ZERO
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = ONE - ratio * s;
            let w = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            z[i] -= w;
            if w.norm() <= 2.0 * eps * z[i].norm() {
                done[i] = true;
            }
        }
    }
    let all = done.iter().all(|&d| d);
    (z, all)
}

fn initial_guesses(monic: &[C64]) -> Vec<C64> {
    let n = monic.len() - 1;
    // geometric mean of root moduli, bounded below so that z^n + tiny still spreads
    let a0 = monic[0].norm();
    let cauchy = 1.0
        + monic[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut radius = if a0 > 0.0 {
        a0.powf(1.0 / n as f64)
    } else {
        1.0
    };
    if !radius.is_finite() || radius <= 0.0 {
        radius = 1.0;
    }
    radius = radius.min(cauchy);
    (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            C64::from_polar(radius, angle)
        })
        .collect()
}

/// Eigenvalues of the companion matrix of a monic polynomial.
fn companion_eigenvalues(monic: &[C64]) -> Option<Vec<C64>> {
    let n = monic.len() - 1;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic[i];
    }
    m.schur().eigenvalues().map(|v| v.iter().copied().collect())
}
