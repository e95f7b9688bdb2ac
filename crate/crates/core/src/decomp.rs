//! Factorization `φ = h ∘ B` with `B` a finite Blaschke product of order
//! `#G(φ)`, and the combined invariant report.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::blaschke::{BlaschkeProduct, DiskAutomorphism};
use crate::contour::min_winding;
use crate::error::{Error, Result};
use crate::fibers::{fsi_classify, min_self_intersection, FsiReport, FsiVerdict};
use crate::fit::fit_rational;
use crate::group::{group_order_check, symmetry_group, DivisibilityCheck, SymmetryGroup};
use crate::poly::C64;
use crate::rational::{rational_normalize, RationalMap};
use crate::symbol::SymbolSpec;
use crate::tol::Tolerances;

/// Minimum sample budget accepted for either sampling pipeline.
pub const MIN_BUDGET: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionResult {
    /// Canonical: `B(0) = 0`, first nonzero Taylor coefficient real positive.
    pub blaschke: BlaschkeProduct,
    pub cofactor: RationalMap,
    pub b_order: usize,
    /// Max `|h(B(z)) - φ(z)|` on the 256-point verification grid.
    pub residual: f64,
    /// Automorphism applied to the raw product: `B = η ∘ B_raw`.
    pub canonicalization: DiskAutomorphism,
}

/// Rebuilds `B(ζ) = ∏_{ρ ∈ G} ρ(ζ)` on the circle and fits it as a rational map.
pub fn build_blaschke_from_group(map: &RationalMap, group: &SymmetryGroup, tol: &Tolerances) -> Result<BlaschkeProduct> {
    let o = group.order;
    if o == 1 {
        return Ok(BlaschkeProduct::identity());
    }
    let s = (8 * o + 16).max(64);
    let mut xs = Vec::with_capacity(s);
    let mut ys = Vec::with_capacity(s);
    for k in 0..s {
        let t = TAU * k as f64 / s as f64;
        let phase: f64 = group.elements.iter().map(|rho| rho.eval(map, t)).sum();
        xs.push(C64::from_polar(1.0, t));
        ys.push(C64::from_polar(1.0, phase));
    }
    let fit = fit_rational(&xs, &ys, o, o);
    if fit.gap_ratio < 1e-9 || fit.residual_ratio > 1e-6 {
        return Err(Error::FitIllConditioned {
            ratio: fit.residual_ratio / fit.gap_ratio.max(f64::MIN_POSITIVE),
        });
    }
    let r = rational_normalize(fit.num, fit.den, tol)?;
    if r.order() != o {
        return Err(Error::FitIllConditioned {
            ratio: fit.residual_ratio,
        });
    }
    BlaschkeProduct::from_rational(&r, tol)
}

fn verification_grid() -> Vec<C64> {
    let mut grid: Vec<C64> = (0..128)
        .map(|k| C64::from_polar(1.0, TAU * (k as f64 + 0.5) / 128.0))
        .collect();
    for (radius, count) in [(0.3, 32), (0.6, 48), (0.9, 48)] {
        for k in 0..count {
            grid.push(C64::from_polar(radius, TAU * (k as f64 + 0.25) / count as f64));
        }
    }
    grid
}

/// Recovers `h` with `φ = h ∘ B` by rational interpolation on `(B(z), φ(z))`.
///
/// Returns `h` and the max residual on an independent grid.
pub fn recover_cofactor(map: &RationalMap, b: &BlaschkeProduct, tol: &Tolerances) -> Result<(RationalMap, f64)> {
    let ob = b.order();
    if ob == 0 || map.order() % ob != 0 {
        return Err(Error::EqualityViolation(format!(
            "Blaschke order {ob} does not divide symbol order {}",
            map.order()
        )));
    }
    let m = map.order() / ob;
    let per_ring = 4 * map.order() + 8;
    let mut ws = Vec::with_capacity(2 * per_ring);
    let mut vs = Vec::with_capacity(2 * per_ring);
    for (radius, offset) in [(0.98, 0.37), (0.9, 0.81)] {
        for k in 0..per_ring {
            let z = C64::from_polar(radius, TAU * (k as f64 + offset) / per_ring as f64);
            ws.push(b.eval(z)?);
            vs.push(map.eval(z));
        }
    }
    let fit = fit_rational(&ws, &vs, m, m);
    if fit.gap_ratio < 1e-10 {
        return Err(Error::InterpolationRankDeficient { ratio: fit.gap_ratio });
    }
    if fit.den.is_zero() {
        return Err(Error::DenominatorZero);
    }
    let h = rational_normalize(fit.num, fit.den, tol)?;

    let grid = verification_grid();
    let mut residual: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for &z in &grid {
        let v = map.eval(z);
        sup = sup.max(v.norm());
        residual = residual.max((h.eval(b.eval(z)?) - v).norm());
    }
    let limit = tol.decomp * (1.0 + sup);
    if !(residual <= limit) {
        return Err(Error::ResidualTooLarge { residual, limit });
    }
    if h.order() != m {
        return Err(Error::EqualityViolation(format!(
            "cofactor has order {} instead of {m}",
            h.order()
        )));
    }
    Ok((h, residual))
}

/// `φ = h ∘ B` with `B` canonical and `order(B) = #G(φ)`.
pub fn cowen_thomson(map: &RationalMap, seed: u64, tol: &Tolerances) -> Result<DecompositionResult> {
    let group = symmetry_group(map, seed, tol)?;
    cowen_thomson_with_group(map, &group, tol)
}

/// Decomposition from an already computed symmetry group.
pub fn cowen_thomson_with_group(map: &RationalMap, group: &SymmetryGroup, tol: &Tolerances) -> Result<DecompositionResult> {
    if map.order() % group.order != 0 {
        return Err(Error::EqualityViolation(format!(
            "group order {} does not divide symbol order {}",
            group.order,
            map.order()
        )));
    }
    if group.order == 1 {
        return Ok(DecompositionResult {
            blaschke: BlaschkeProduct::identity(),
            cofactor: map.clone(),
            b_order: 1,
            residual: 0.0,
            canonicalization: DiskAutomorphism::identity(),
        });
    }
    let raw = build_blaschke_from_group(map, group, tol)?;
    let (blaschke, eta) = raw.canonicalize(tol)?;
    let (cofactor, residual) = recover_cofactor(map, &blaschke, tol)?;
    if cofactor.order() * blaschke.order() != map.order() {
        return Err(Error::EqualityViolation(format!(
            "order {} != {} * {}",
            map.order(),
            cofactor.order(),
            blaschke.order()
        )));
    }
    Ok(DecompositionResult {
        b_order: blaschke.order(),
        blaschke,
        cofactor,
        residual,
        canonicalization: eta,
    })
}

/// Sampling budgets, seed and tolerances for one analysis run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunConfig {
    pub interior_samples: usize,
    pub circle_samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            interior_samples: 256,
            circle_samples: 64,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    /// Interior point attaining the minimal winding.
    pub winding_point: Option<C64>,
    /// Circle point (turns) attaining the minimal fiber.
    pub fiber_turns: Option<f64>,
    /// Base point (turns) of the group computation.
    pub group_base_turns: Option<f64>,
    /// Fiber shift realized by the group generator.
    pub group_shift: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualityCheck {
    pub pass: bool,
    pub discrepancies: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub blaschke: BlaschkeProduct,
    pub cofactor: SymbolSpec,
    pub residual: f64,
    pub canonicalization: DiskAutomorphism,
}

/// Everything `analyze` computes about one symbol.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub version: String,
    pub seed: u64,
    pub interior_samples: usize,
    pub circle_samples: usize,
    pub tolerances: Tolerances,
    pub symbol: SymbolSpec,
    pub order: usize,
    /// Minimal interior winding.
    pub n: Option<i64>,
    /// Minimal fiber cardinality on the circle.
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    /// Order of the symmetry group.
    pub o: Option<usize>,
    /// Order of the Blaschke factor.
    pub b: Option<usize>,
    pub witnesses: Witnesses,
    pub totally_abelian: Option<bool>,
    pub equality_check: EqualityCheck,
    pub fsi: Option<FsiReport>,
    pub divisibility: Option<DivisibilityCheck>,
    pub rotational_order: Option<usize>,
    pub decomposition: Option<DecompositionSummary>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub partial: bool,
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Computes `n`, `N`, `o` and `b`, checks that they agree, and derives the
/// totally-Abelian verdict.
///
/// Pipeline failures do not abort the run: the affected invariant is left
/// empty, the error is recorded as a warning and `partial` is set.
pub fn analyze(map: &RationalMap, config: &RunConfig) -> InvariantReport {
    let tol = &config.tolerances;
    let seed = config.seed;
    let interior = config.interior_samples.max(MIN_BUDGET);
    let circle = config.circle_samples.max(MIN_BUDGET);
    let mut warnings = Vec::new();
    let mut notes = Vec::new();

    let group = symmetry_group(map, seed, tol)
        .map_err(|e| warnings.push(format!("symmetry group: {e}")))
        .ok();
    let o = group.as_ref().map(|g| g.order);
    if let Some(g) = &group {
        if g.order > 1 && g.min_proper_deviation <= 10.0 * tol.track {
            warnings.push(format!(
                "a proper power of the generator is within {:.3e} of the identity",
                g.min_proper_deviation
            ));
        }
    }
    let windings = min_winding(map, interior, seed, o, tol)
        .map_err(|e| warnings.push(format!("minimal winding: {e}")))
        .ok();
    let fibers = min_self_intersection(map, circle, seed, o, tol)
        .map_err(|e| warnings.push(format!("self-intersection: {e}")))
        .ok();
    let fsi = fsi_classify(map, circle, seed, tol)
        .map_err(|e| warnings.push(format!("fsi classification: {e}")))
        .ok();
    let decomposition = group.as_ref().and_then(|g| {
        cowen_thomson_with_group(map, g, tol)
            .map_err(|e| warnings.push(format!("decomposition: {e}")))
            .ok()
    });

    let n = windings.as_ref().map(|w| w.n);
    let big_n = fibers.as_ref().map(|f| f.n);
    let b = decomposition.as_ref().map(|d| d.b_order);

    let divisibility = o.map(|order| {
        group_order_check(
            order,
            fibers.as_ref().map(|f| f.samples.as_slice()).unwrap_or(&[]),
            windings.as_ref().map(|w| w.samples.as_slice()).unwrap_or(&[]),
        )
    });
    if let Some(d) = &divisibility {
        if !d.fiber_law {
            warnings.push(format!(
                "group order {} fails to divide {} sampled fiber cardinalities",
                d.order,
                d.fiber_counterexamples.len()
            ));
        }
        if !d.winding_law {
            warnings.push(format!(
                "group order {} fails to divide {} sampled windings",
                d.order,
                d.winding_counterexamples.len()
            ));
        }
    }

    let values: [(&str, Option<i64>); 4] = [
        ("n", n),
        ("N", big_n.map(|v| v as i64)),
        ("o", o.map(|v| v as i64)),
        ("b", b.map(|v| v as i64)),
    ];
    let mut discrepancies = Vec::new();
    for (name, v) in &values {
        if v.is_none() {
            discrepancies.push(format!("{name} unavailable"));
        }
    }
    let present: Vec<(&str, i64)> = values.iter().filter_map(|(k, v)| v.map(|v| (*k, v))).collect();
    if let Some(&(first_name, first)) = present.first() {
        for &(name, v) in &present[1..] {
            if v != first {
                discrepancies.push(format!("{name} = {v} but {first_name} = {first}"));
            }
        }
    }
    let equality_check = EqualityCheck {
        pass: discrepancies.is_empty(),
        discrepancies,
    };
    if !equality_check.pass && present.len() == 4 {
        warnings.push("invariants disagree".to_string());
    }

    let totally_abelian = big_n.or(b).or(o).map(|v| v == 1);

    if let (Some(f), Some(nn)) = (&fsi, big_n) {
        match f.verdict {
            FsiVerdict::Inconclusive => warnings.push("finite self-intersection test inconclusive".into()),
            FsiVerdict::Fsi if nn != 1 => {
                warnings.push(format!("curve classified FSI but N = {nn}"));
            }
            FsiVerdict::NotFsi if nn == 1 => {
                warnings.push("curve classified non-FSI but N = 1".into());
            }
            _ => {}
        }
    }

    let rotational_order = map.rotational_order(tol).ok();
    if map.is_polynomial() {
        if let (Some(r), Some(bv)) = (rotational_order, b) {
            if r != bv {
                warnings.push(format!("exponent gcd {r} differs from Blaschke order {bv}"));
            }
        }
    }

    if is_prime(map.order()) {
        match b {
            Some(1) => notes.push(format!("prime order {}: totally Abelian", map.order())),
            Some(bv) if bv == map.order() => notes.push(format!(
                "prime order {}: Moebius map composed with a Blaschke product",
                bv
            )),
            Some(bv) => warnings.push(format!(
                "prime order {} admits no Blaschke factor of order {bv}",
                map.order()
            )),
            None => {}
        }
    }

    let partial = n.is_none() || big_n.is_none() || o.is_none() || b.is_none();
    InvariantReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        interior_samples: interior,
        circle_samples: circle,
        tolerances: *tol,
        symbol: SymbolSpec::from_rational(map),
        order: map.order(),
        n,
        big_n,
        o,
        b,
        witnesses: Witnesses {
            winding_point: windings.as_ref().map(|w| w.witness),
            fiber_turns: fibers.as_ref().map(|f| f.witness_turns),
            group_base_turns: group.as_ref().map(|g| g.base_turns),
            group_shift: group.as_ref().map(|g| g.shift),
        },
        totally_abelian,
        equality_check,
        fsi,
        divisibility,
        rotational_order,
        decomposition: decomposition.map(|d| DecompositionSummary {
            blaschke: d.blaschke,
            cofactor: SymbolSpec::from_rational(&d.cofactor),
            residual: d.residual,
            canonicalization: d.canonicalization,
        }),
        notes,
        warnings,
        partial,
    }
}
