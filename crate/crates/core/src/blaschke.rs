//! Finite Blaschke products and automorphisms of the unit disk.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{Polynomial, C64};
use crate::rational::{rational_normalize, RationalMap};
use crate::tol::Tolerances;

/// `c · ∏ (z - αⱼ) / (1 - conj(αⱼ) z)` with `|c| = 1` and every `αⱼ` in the disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlaschkeProduct {
    constant: C64,
    zeros: Vec<C64>,
}

impl BlaschkeProduct {
    pub fn new(constant: C64, zeros: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if (constant.norm() - 1.0).abs() > tol.unimod {
            return Err(Error::NotUnimodular((constant.norm() - 1.0).abs()));
        }
        if let Some(&z) = zeros.iter().find(|z| z.norm() > 1.0 - tol.polegap) {
            return Err(Error::ZeroOutsideDisk(z));
        }
        Ok(Self {
            constant: constant / constant.norm(),
            zeros,
        })
    }

    /// `B(z) = z`.
    pub fn identity() -> Self {
        Self {
            constant: C64::new(1.0, 0.0),
            zeros: vec![C64::new(0.0, 0.0)],
        }
    }

    /// `B(z) = z^k`.
    pub fn power(k: usize) -> Self {
        Self {
            constant: C64::new(1.0, 0.0),
            zeros: vec![C64::new(0.0, 0.0); k],
        }
    }

    pub fn constant(&self) -> C64 {
        self.constant
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn order(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        let mut acc = self.constant;
        for &a in &self.zeros {
            let d = C64::new(1.0, 0.0) - a.conj() * z;
            if d.norm() == 0.0 {
                return Err(Error::PoleHit(z));
            }
            acc *= (z - a) / d;
        }
        Ok(acc)
    }

    pub fn to_rational(&self, tol: &Tolerances) -> Result<RationalMap> {
        let num = Polynomial::from_roots(&self.zeros).scale(self.constant);
        let den = self
            .zeros
            .iter()
            .fold(Polynomial::one(), |acc, &a| {
                acc.mul(&Polynomial::new(vec![C64::new(1.0, 0.0), -a.conj()]))
            });
        rational_normalize(num, den, tol)
    }

    /// Reads a Blaschke product off a rational map that is unimodular on the circle.
    pub fn from_rational(r: &RationalMap, tol: &Tolerances) -> Result<Self> {
        if r.is_constant() {
            return Err(Error::ConstantSymbol);
        }
        if r.num().deg() != r.order() {
            return Err(Error::NotUnimodular(f64::INFINITY));
        }
        let mut zeros = r.num().raw_roots(tol)?;
        for z in zeros.iter_mut() {
            if z.norm() <= tol.residual {
                *z = C64::new(0.0, 0.0);
            }
        }
        if let Some(&z) = zeros.iter().find(|z| z.norm() >= 1.0 - tol.polegap) {
            return Err(Error::ZeroOutsideDisk(z));
        }
        let unit = Self {
            constant: C64::new(1.0, 0.0),
            zeros,
        };
        // constant from a least-squares match over the circle
        let m = 64;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..m {
            let z = C64::from_polar(1.0, TAU * (k as f64 + 0.5) / m as f64);
            acc += r.eval(z) * unit.eval(z)?.conj();
        }
        let constant = acc / acc.norm();
        let b = Self {
            constant,
            zeros: unit.zeros,
        };
        let dev = b.unimodular_deviation(&sample_circle(97), r);
        if dev > tol.unimod.max(1e3 * tol.residual) {
            return Err(Error::NotUnimodular(dev));
        }
        Ok(b)
    }

    fn unimodular_deviation(&self, grid: &[C64], r: &RationalMap) -> f64 {
        grid.iter()
            .map(|&z| {
                let v = r.eval(z);
                let own = self.eval(z).unwrap_or(C64::new(f64::INFINITY, 0.0));
                ((v.norm() - 1.0).abs()).max((v - own).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Post-composes with the disk automorphism that sends `B(0)` to 0 and makes
    /// the first nonzero Taylor coefficient at 0 real positive.
    pub fn canonicalize(&self, tol: &Tolerances) -> Result<(Self, DiskAutomorphism)> {
        let a = self.eval(C64::new(0.0, 0.0))?;
        let shift = DiskAutomorphism {
            rotation: C64::new(1.0, 0.0),
            point: a,
        };
        let shifted = if a.norm() <= tol.residual {
            let mut zeros = self.zeros.clone();
            for z in zeros.iter_mut() {
                if z.norm() <= tol.residual {
                    *z = C64::new(0.0, 0.0);
                }
            }
            Self {
                constant: self.constant,
                zeros,
            }
        } else {
            let r = self.to_rational(tol)?;
            let composed = shift.as_rational(tol)?.compose(&r, tol)?;
            Self::from_rational(&composed, tol)?
        };
        let lead = shifted
            .zeros
            .iter()
            .filter(|z| z.norm() > 0.0)
            .fold(shifted.constant, |acc, &z| acc * (-z));
        let rot = (lead / lead.norm()).conj();
        let canonical = Self {
            constant: shifted.constant * rot,
            zeros: shifted.zeros,
        };
        let eta = DiskAutomorphism {
            rotation: rot,
            point: if a.norm() <= tol.residual {
                C64::new(0.0, 0.0)
            } else {
                a
            },
        };
        Ok((canonical, eta))
    }

    /// First nonzero Taylor coefficient at the origin.
    pub fn leading_taylor(&self) -> C64 {
        self.zeros
            .iter()
            .filter(|z| z.norm() > 0.0)
            .fold(self.constant, |acc, &z| acc * (-z))
    }
}

/// Spec-named evaluation entry point.
pub fn blaschke_eval(b: &BlaschkeProduct, z: C64) -> Result<C64> {
    b.eval(z)
}

/// `η(w) = rotation · (w - point) / (1 - conj(point) w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskAutomorphism {
    pub rotation: C64,
    pub point: C64,
}

impl DiskAutomorphism {
    pub fn identity() -> Self {
        Self {
            rotation: C64::new(1.0, 0.0),
            point: C64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, w: C64) -> C64 {
        self.rotation * (w - self.point) / (C64::new(1.0, 0.0) - self.point.conj() * w)
    }

    pub fn inverse(&self) -> Self {
        // η⁻¹(w) = conj(r)·(w + r·a) / (1 + conj(r·a)·w)
        Self {
            rotation: self.rotation.conj(),
            point: -self.rotation * self.point,
        }
    }

    pub fn as_rational(&self, tol: &Tolerances) -> Result<RationalMap> {
        rational_normalize(
            Polynomial::new(vec![-self.rotation * self.point, self.rotation]),
            Polynomial::new(vec![C64::new(1.0, 0.0), -self.point.conj()]),
            tol,
        )
    }
}

pub(crate) fn sample_circle(m: usize) -> Vec<C64> {
    (0..m)
        .map(|k| C64::from_polar(1.0, TAU * k as f64 / m as f64))
        .collect()
}
