//! Named fixtures and seeded random symbol generators used by the suite and
//! by property tests.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::poly::{Polynomial, C64};
use crate::symbol::{symbol_compile, to_wire, SymbolSpec, BUILTIN_NAMES};
use crate::tol::Tolerances;

/// A symbol with its expected common invariant value, when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub spec: SymbolSpec,
    #[serde(default)]
    pub expect: Option<usize>,
}

/// Builtins with their known invariant: `z^k ↦ k`, gcd rule for the
/// polynomials, 1 for the rational example, the Blaschke order, and 3 for the
/// Moebius image of `z^3`.
pub fn builtin_fixtures() -> Vec<Fixture> {
    BUILTIN_NAMES
        .iter()
        .map(|&name| {
            let expect = match name {
                "zsq_plus_z" | "example51" => 1,
                "quartic_even" | "zpow4_3z2_1" | "blaschke2" => 2,
                "jordan3" => 3,
                _ => name.trim_start_matches("zpow").parse().unwrap_or(0),
            };
            Fixture {
                name: name.to_string(),
                spec: SymbolSpec::builtin(name),
                expect: Some(expect),
            }
        })
        .collect()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    // Box–Muller, one complex normal
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    C64::from_polar((-2.0 * u.ln()).sqrt() / std::f64::consts::SQRT_2, TAU * v)
}

fn in_annulus(rng: &mut ChaCha8Rng, inner: f64, outer: f64) -> C64 {
    C64::from_polar(rng.gen_range(inner..outer), TAU * rng.gen::<f64>())
}

/// Points of the disk of radius `radius`, pairwise at least `sep` apart.
pub fn separated_points(rng: &mut ChaCha8Rng, k: usize, radius: f64, sep: f64) -> Vec<C64> {
    let mut pts: Vec<C64> = Vec::with_capacity(k);
    while pts.len() < k {
        let z = C64::from_polar(radius * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
        if pts.iter().all(|p| (p - z).norm() >= sep) {
            pts.push(z);
        }
    }
    pts
}

fn wire(p: &[C64]) -> Vec<[f64; 2]> {
    p.iter().map(|&c| to_wire(c)).collect()
}

/// `c · P / ∏(z - p_j)` with poles drawn from `inner < |p| < outer`.
fn generic_rational(rng: &mut ChaCha8Rng, num_deg: usize, den_deg: usize, inner: f64, outer: f64) -> SymbolSpec {
    let mut num: Vec<C64> = (0..=num_deg).map(|_| gaussian(rng)).collect();
    if num_deg > 0 && num[num_deg].norm() < 0.2 {
        num[num_deg] = C64::new(1.0, 0.0);
    }
    let poles: Vec<C64> = (0..den_deg).map(|_| in_annulus(rng, inner, outer)).collect();
    let den = Polynomial::from_roots(&poles);
    SymbolSpec::Rat {
        num: wire(&num),
        den: wire(den.coeffs()),
    }
}

/// A random Blaschke product of order `k` with distinct zeros in `radius·𝔻`.
pub fn random_blaschke(seed: u64, k: usize, radius: f64) -> SymbolSpec {
    let mut rng = rng_for(seed, 11);
    let zeros = separated_points(&mut rng, k, radius, 0.1);
    SymbolSpec::Blaschke {
        constant: to_wire(C64::from_polar(1.0, TAU * rng.gen::<f64>())),
        zeros: wire(&zeros),
    }
}

/// Random admissible symbol of order at most 6 with every pole outside `1.2·𝔻̄`.
///
/// Seeds cycle through generic quotients, `h(z^k)` and `h ∘ B`, so the
/// corpus covers trivial and nontrivial symmetry groups.
pub fn random_symbol(seed: u64) -> SymbolSpec {
    let tol = Tolerances::default();
    let mut rng = rng_for(seed, 7);
    loop {
        let spec = match seed % 3 {
            0 => {
                let order = rng.gen_range(1..=6);
                let den_deg = rng.gen_range(0..=order);
                let num_deg = if den_deg == order { rng.gen_range(0..=order) } else { order };
                generic_rational(&mut rng, num_deg, den_deg, 1.25, 3.0)
            }
            1 => {
                let k = rng.gen_range(2..=3);
                let inner_order = rng.gen_range(1..=6 / k);
                let den_deg = rng.gen_range(0..=inner_order);
                let h = generic_rational(&mut rng, inner_order, den_deg, 1.25f64.powi(k as i32), 4.0);
                let mut mono = vec![0.0; k + 1];
                mono[k] = 1.0;
                SymbolSpec::Compose {
                    outer: Box::new(h),
                    inner: Box::new(SymbolSpec::poly_real(&mono)),
                }
            }
            _ => {
                let k = rng.gen_range(2..=3);
                let inner_order = rng.gen_range(1..=2);
                let den_deg = rng.gen_range(0..=inner_order);
                let h = generic_rational(&mut rng, inner_order, den_deg, 2.0, 4.0);
                let b = random_blaschke(rng.gen(), k, 0.7);
                SymbolSpec::Compose {
                    outer: Box::new(h),
                    inner: Box::new(b),
                }
            }
        };
        if let Ok(map) = symbol_compile(&spec, &tol) {
            if map.poles().iter().all(|p| p.norm() > 1.2) && map.order() <= 6 {
                return spec;
            }
        }
    }
}

/// A round-trip fixture `φ = h0 ∘ B0`.
#[derive(Debug, Clone, Serialize)]
pub struct CompositeFixture {
    pub outer: SymbolSpec,
    pub blaschke: SymbolSpec,
    pub composite: SymbolSpec,
    pub blaschke_order: usize,
}

/// `h0 ∘ B0` with `order(B0) ∈ {2, 3, 4}` (distinct zeros in `0.8·𝔻`) and `h0`
/// univalent on the closed disk, of order at most 3.
///
/// `h0` is either a Moebius map, a polynomial `w + a w² + b w³` with
/// `2|a| + 3|b| < 1` (so `Re h0' > 0` on the disk), or a Moebius map after
/// such a quadratic.
pub fn composite_fixture(seed: u64) -> CompositeFixture {
    let tol = Tolerances::default();
    let mut rng = rng_for(seed, 13);
    let k = 2 + (seed % 3) as usize;
    loop {
        let outer = match rng.gen_range(0..3) {
            0 => {
                let pole = in_annulus(&mut rng, 1.6, 4.0);
                let shift = gaussian(&mut rng) * 0.5;
                SymbolSpec::Rat {
                    num: wire(&[shift - pole, C64::new(1.0, 0.0)]),
                    den: wire(&[-pole, C64::new(1.0, 0.0)]),
                }
            }
            1 => {
                let a = C64::from_polar(rng.gen_range(0.05..0.3), TAU * rng.gen::<f64>());
                let b = C64::from_polar(rng.gen_range(0.0..0.1), TAU * rng.gen::<f64>());
                let c0 = gaussian(&mut rng) * 0.5;
                let deg3 = rng.gen_bool(0.5);
                let coeffs = if deg3 {
                    vec![c0, C64::new(1.0, 0.0), a, b]
                } else {
                    vec![c0, C64::new(1.0, 0.0), a]
                };
                SymbolSpec::Poly { coeffs: wire(&coeffs) }
            }
            _ => {
                let a = C64::from_polar(rng.gen_range(0.05..0.4), TAU * rng.gen::<f64>());
                let q = in_annulus(&mut rng, 5.0, 8.0);
                SymbolSpec::Compose {
                    outer: Box::new(SymbolSpec::Rat {
                        num: wire(&[C64::new(1.0, 0.0)]),
                        den: wire(&[-q, C64::new(1.0, 0.0)]),
                    }),
                    inner: Box::new(SymbolSpec::Poly {
                        coeffs: wire(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0), a]),
                    }),
                }
            }
        };
        let Ok(h) = symbol_compile(&outer, &tol) else {
            continue;
        };
        if h.poles().iter().any(|p| p.norm() <= 1.5) {
            continue;
        }
        let blaschke = random_blaschke(rng.gen(), k, 0.8);
        let composite = SymbolSpec::Compose {
            outer: Box::new(outer.clone()),
            inner: Box::new(blaschke.clone()),
        };
        if symbol_compile(&composite, &tol).is_ok() {
            return CompositeFixture {
                outer,
                blaschke,
                composite,
                blaschke_order: k,
            };
        }
    }
}

/// Fixtures run by the `suite` command: builtins, a few composites and
/// Blaschke products.
pub fn suite_fixtures(seed: u64) -> Vec<Fixture> {
    let mut out = builtin_fixtures();
    for i in 0..6 {
        let s = seed.wrapping_add(i);
        let f = composite_fixture(s);
        out.push(Fixture {
            name: format!("composite-{i}"),
            spec: f.composite,
            expect: Some(f.blaschke_order),
        });
    }
    for k in 2..=5 {
        out.push(Fixture {
            name: format!("blaschke-{k}"),
            spec: random_blaschke(seed.wrapping_add(100 + k as u64), k, 0.8),
            expect: Some(k),
        });
    }
    out
}
