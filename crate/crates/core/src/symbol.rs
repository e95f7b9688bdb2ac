//! Symbol specifications: the JSON ingestion format and its compilation to a
//! validated [`RationalMap`].

use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::poly::{Polynomial, C64};
use crate::rational::{rational_normalize, RationalMap};
use crate::tol::Tolerances;

/// Complex number as it appears on the wire: `[re, im]`.
pub type WireComplex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymbolSpec {
    Poly {
        coeffs: Vec<WireComplex>,
    },
    Rat {
        num: Vec<WireComplex>,
        den: Vec<WireComplex>,
    },
    /// Factors are `(z - α)/(1 - conj(α) z)`.
    Blaschke {
        constant: WireComplex,
        zeros: Vec<WireComplex>,
    },
    Compose {
        outer: Box<SymbolSpec>,
        inner: Box<SymbolSpec>,
    },
    Builtin {
        name: String,
    },
}

pub const BUILTIN_NAMES: &[&str] = &[
    "zpow1",
    "zpow2",
    "zpow3",
    "zpow4",
    "zpow5",
    "zpow6",
    "zsq_plus_z",
    "quartic_even",
    "zpow4_3z2_1",
    "example51",
    "blaschke2",
    "jordan3",
];

fn to_c(w: &WireComplex) -> C64 {
    C64::new(w[0], w[1])
}

pub fn to_wire(c: C64) -> WireComplex {
    [c.re, c.im]
}

fn real(coeffs: &[f64]) -> Vec<WireComplex> {
    coeffs.iter().map(|&c| [c, 0.0]).collect()
}

impl SymbolSpec {
    pub fn poly_real(coeffs: &[f64]) -> Self {
        SymbolSpec::Poly {
            coeffs: real(coeffs),
        }
    }

    pub fn rat_real(num: &[f64], den: &[f64]) -> Self {
        SymbolSpec::Rat {
            num: real(num),
            den: real(den),
        }
    }

    pub fn builtin(name: &str) -> Self {
        SymbolSpec::Builtin {
            name: name.to_string(),
        }
    }

    pub fn from_rational(r: &RationalMap) -> Self {
        SymbolSpec::Rat {
            num: r.num().coeffs().iter().map(|&c| to_wire(c)).collect(),
            den: r.den().coeffs().iter().map(|&c| to_wire(c)).collect(),
        }
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Expands builtins into their defining specs.
    pub fn resolve_builtin(name: &str) -> Result<SymbolSpec> {
        if let Some(k) = name.strip_prefix("zpow") {
            if let Ok(k) = k.parse::<usize>() {
                if (1..=6).contains(&k) {
                    let mut coeffs = vec![0.0; k + 1];
                    coeffs[k] = 1.0;
                    return Ok(Self::poly_real(&coeffs));
                }
            }
        }
        Ok(match name {
            "zsq_plus_z" => Self::poly_real(&[0.0, 1.0, 1.0]),
            "quartic_even" | "zpow4_3z2_1" => Self::poly_real(&[1.0, 0.0, 3.0, 0.0, 1.0]),
            "example51" => Self::rat_real(&[-0.5, 1.0], &[4.0, 0.0, 0.0, 1.0]),
            "blaschke2" => SymbolSpec::Blaschke {
                constant: [1.0, 0.0],
                zeros: vec![[0.0, 0.0], [0.5, 0.0]],
            },
            // (w + 1/2)/(w - 4) after z^3
            "jordan3" => SymbolSpec::Compose {
                outer: Box::new(Self::rat_real(&[0.5, 1.0], &[-4.0, 1.0])),
                inner: Box::new(Self::poly_real(&[0.0, 0.0, 0.0, 1.0])),
            },
            _ => return Err(Error::UnknownBuiltin(name.to_string())),
        })
    }

    /// Flattens without symbol validation (intermediate pieces of a
    /// composition may have poles anywhere).
    fn flatten(&self, tol: &Tolerances, depth: usize) -> Result<RationalMap> {
        if depth > 32 {
            return Err(Error::InvalidSymbol("nesting too deep".into()));
        }
        let coeffs = |v: &[WireComplex]| {
            if v.iter().any(|c| !c[0].is_finite() || !c[1].is_finite()) {
                return Err(Error::InvalidSymbol("non-finite coefficient".into()));
            }
            Ok(Polynomial::with_threshold(v.iter().map(to_c).collect(), tol.coeff))
        };
        let map = match self {
            SymbolSpec::Poly { coeffs: c } => {
                let p = coeffs(c)?;
                if p.is_zero() {
                    return Err(Error::ZeroPolynomial);
                }
                RationalMap::polynomial(p)
            }
            SymbolSpec::Rat { num, den } => rational_normalize(coeffs(num)?, coeffs(den)?, tol)?,
            SymbolSpec::Blaschke { constant, zeros } => {
                let b = BlaschkeProduct::new(to_c(constant), zeros.iter().map(to_c).collect(), tol)?;
                if b.order() == 0 {
                    return Err(Error::ConstantSymbol);
                }
                b.to_rational(tol)?
            }
            SymbolSpec::Compose { outer, inner } => {
                let o = outer.flatten(tol, depth + 1)?;
                let i = inner.flatten(tol, depth + 1)?;
                if o.order().saturating_mul(i.order()) > tol.degree_cap {
                    return Err(Error::DegreeOverflow {
                        order: o.order().saturating_mul(i.order()),
                        cap: tol.degree_cap,
                    });
                }
                o.compose(&i, tol)?
            }
            SymbolSpec::Builtin { name } => Self::resolve_builtin(name)?.flatten(tol, depth + 1)?,
        };
        if map.order() > tol.degree_cap {
            return Err(Error::DegreeOverflow {
                order: map.order(),
                cap: tol.degree_cap,
            });
        }
        Ok(map)
    }
}

/// Compiles a spec into a validated symbol: coprime, nonconstant, poles off
/// the closed disk, order within the cap.
pub fn symbol_compile(spec: &SymbolSpec, tol: &Tolerances) -> Result<RationalMap> {
    let map = spec.flatten(tol, 0)?;
    map.validate_symbol(tol)?;
    Ok(map)
}
