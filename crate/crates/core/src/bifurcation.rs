//! Exact spectral data of the product `ℂP¹ × ℂP¹ × ℂP¹` with metrics
//! `ω_λ = V(λ)^{-1/3}(ω_FS ⊕ ω_FS ⊕ λ ω_FS)` and the kernel of the linearized
//! constant-curvature operator `A(λ) = −(2/3) S(λ) + Δ_{ω_λ}`.
//!
//! Eigenvalues of `Δ_{ω_λ}` are `V^{1/3}(μ₁ + μ₂ + μ₃/λ)` with `μ = j(j+1)`, and
//! `S(λ) = 2(2 + 1/λ) V^{1/3}`, so the kernel condition is the exact rational equation
//! `μ₁ + μ₂ + μ₃/λ = (4/3)(2 + 1/λ)`. The irrational factor `V^{1/3} = 4π λ^{1/3}` is
//! positive and never enters a zero or parity decision.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation per factor.
pub const DEFAULT_JMAX: u32 = 10;

/// Denominator cap used when converting decimal input to rationals.
pub const DENOMINATOR_CAP: i64 = 1_000_000;

mod rational_text {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_rational(&text)
            .map(|(r, _)| r)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenLevel {
    pub j: u32,
    /// `j(j+1)`.
    pub eigenvalue: i64,
    /// `2j + 1`.
    pub multiplicity: u64,
}

/// Levels `j = 0..=j_max` of the Laplacian of the Fubini-Study sphere.
pub fn cp1_levels(j_max: u32) -> Vec<EigenLevel> {
    (0..=j_max)
        .map(|j| EigenLevel {
            j,
            eigenvalue: j as i64 * (j as i64 + 1),
            multiplicity: 2 * j as u64 + 1,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSpectralModel {
    #[serde(with = "rational_text")]
    pub lambda: Rational64,
    pub j_max: u32,
}

impl ProductSpectralModel {
    pub fn new(lambda: Rational64, j_max: u32) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
        }
        Ok(Self { lambda, j_max })
    }

    /// `V(λ) = (4π)³ λ`.
    pub fn volume(&self) -> f64 {
        (4.0 * PI).powi(3) * ratio_f64(self.lambda)
    }

    /// `S(λ) = 2(2 + 1/λ) V(λ)^{1/3}`.
    pub fn scalar_curvature(&self) -> f64 {
        2.0 * (2.0 + 1.0 / ratio_f64(self.lambda)) * self.volume().cbrt()
    }

    /// Exact kernel condition `μ₁ + μ₂ + μ₃/λ = (4/3)(2 + 1/λ)`.
    pub fn in_kernel(&self, mu: [i64; 3]) -> bool {
        let lam = self.lambda;
        let lhs = Rational64::from_integer(mu[0] + mu[1]) + Rational64::from_integer(mu[2]) / lam;
        let rhs = Rational64::new(4, 3) * (Rational64::from_integer(2) + lam.recip());
        lhs == rhs
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    r.to_f64().expect("finite rational")
}

/// Which formula produced a transversality multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierFormula {
    /// `8 + μ₁ + μ₂ − 8μ₃` at `λ = 1/4`, prefactor `(4π/3)·4^{2/3}`.
    Exact,
    /// `(4 − 3μ₃)/λ` for other `λ`, prefactor `(4π/3)·λ^{−2/3}`.
    GeneralLambdaExtension,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFamily {
    pub triple: [u32; 3],
    pub dimension: u64,
    /// Exact rational factor of `d/dλ A(λ)` on the family.
    #[serde(with = "rational_text")]
    pub multiplier: Rational64,
    /// Positive irrational prefactor (carried numerically, for display only).
    pub prefactor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    #[serde(with = "rational_text")]
    pub lambda: Rational64,
    pub j_max: u32,
    pub families: Vec<KernelFamily>,
    pub total_dimension: u64,
    pub odd: bool,
    pub multipliers_nonzero: bool,
    pub formula: MultiplierFormula,
}

/// Transversality multiplier of a kernel family at `λ` and the formula used.
///
/// The eigenvalue of `A(λ)` on the family is `a(λ) = V^{1/3} B(λ)` with
/// `B = μ₁ + μ₂ + μ₃/λ − (4/3)(2 + 1/λ)`. On the kernel `B = 0`, so
/// `a′(λ) = V^{1/3} B′(λ) = 4π λ^{1/3} (4 − 3μ₃)/(3λ²) = (4π/3) λ^{−2/3} · (4 − 3μ₃)/λ`.
/// At `λ = 1/4` the kernel relation `μ₁ + μ₂ = 8 − 4μ₃` turns `(4 − 3μ₃)/λ` into
/// `8 + μ₁ + μ₂ − 8μ₃`, the operator displayed for that instant.
pub fn transversality_multiplier(lambda: Rational64, triple: [u32; 3]) -> (Rational64, f64, MultiplierFormula) {
    let mu: Vec<i64> = triple.iter().map(|&j| j as i64 * (j as i64 + 1)).collect();
    let lam = ratio_f64(lambda);
    let prefactor = 4.0 * PI / 3.0 * lam.powf(-2.0 / 3.0);
    if lambda == Rational64::new(1, 4) {
        let m = Rational64::from_integer(8 + mu[0] + mu[1] - 8 * mu[2]);
        (m, prefactor, MultiplierFormula::Exact)
    } else {
        let m = Rational64::from_integer(4 - 3 * mu[2]) / lambda;
        (m, prefactor, MultiplierFormula::GeneralLambdaExtension)
    }
}

/// All triples `(j₁, j₂, j₃)` with `jᵢ ≤ j_max` in the kernel of `A(λ)`.
pub fn kernel_families(lambda: Rational64, j_max: u32) -> Result<KernelReport> {
    let model = ProductSpectralModel::new(lambda, j_max)?;
    let levels = cp1_levels(j_max);
    let mut families = Vec::new();
    for a in &levels {
        for b in &levels {
            for c in &levels {
                if model.in_kernel([a.eigenvalue, b.eigenvalue, c.eigenvalue]) {
                    let triple = [a.j, b.j, c.j];
                    let (multiplier, prefactor, _) = transversality_multiplier(lambda, triple);
                    families.push(KernelFamily {
                        triple,
                        dimension: a.multiplicity * b.multiplicity * c.multiplicity,
                        multiplier,
                        prefactor,
                    });
                }
            }
        }
    }
    let total_dimension: u64 = families.iter().map(|f| f.dimension).sum();
    let formula = transversality_multiplier(lambda, [0, 0, 0]).2;
    Ok(KernelReport {
        lambda,
        j_max,
        multipliers_nonzero: families.iter().all(|f| !f.multiplier.is_zero()),
        odd: total_dimension.is_odd(),
        total_dimension,
        families,
        formula,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCandidate {
    #[serde(with = "rational_text")]
    pub lambda: Rational64,
    pub lambda_value: f64,
    pub total_dimension: u64,
    pub odd: bool,
    pub multipliers_nonzero: bool,
    /// Odd kernel dimension and nonzero transversality multipliers.
    pub is_instant: bool,
}

/// Every `λ` in the open interval `(a, b)` where `A(λ)` has a kernel within the truncation.
///
/// Kernel points solve `λ = (4 − 3μ₃)/(3μ₁ + 3μ₂ − 8)`; the denominator never vanishes
/// because `8` is not a multiple of `3`.
pub fn bifurcation_instants(interval: (Rational64, Rational64), j_max: u32) -> Result<Vec<BifurcationCandidate>> {
    let (lo, hi) = interval;
    if !lo.is_positive() && !lo.is_zero() || hi <= lo {
        return Err(Error::InvalidParameter(format!("invalid interval ({lo}, {hi})")));
    }
    let levels = cp1_levels(j_max);
    let mut found = BTreeSet::new();
    for a in &levels {
        for b in &levels {
            let den = 3 * (a.eigenvalue + b.eigenvalue) - 8;
            assert_ne!(den, 0, "3(μ₁ + μ₂) = 8 has no integer solutions");
            for c in &levels {
                let lam = Rational64::new(4 - 3 * c.eigenvalue, den);
                if lam > lo && lam < hi && lam.is_positive() {
                    found.insert(lam);
                }
            }
        }
    }
    found
        .into_iter()
        .map(|lam| {
            let report = kernel_families(lam, j_max)?;
            Ok(BifurcationCandidate {
                lambda: lam,
                lambda_value: ratio_f64(lam),
                total_dimension: report.total_dimension,
                odd: report.odd,
                multipliers_nonzero: report.multipliers_nonzero,
                is_instant: report.odd && report.multipliers_nonzero,
            })
        })
        .collect()
}

/// Parses `"p/q"`, an integer, or a decimal. Decimals are converted by continued
/// fractions with denominators up to [`DENOMINATOR_CAP`]; a warning is returned when
/// the conversion is not exact.
pub fn parse_rational(text: &str) -> Result<(Rational64, Option<String>)> {
    let t = text.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse rational from {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok((Rational64::new(p, q), None));
    }
    if let Ok(i) = t.parse::<i64>() {
        return Ok((Rational64::from_integer(i), None));
    }
    let x: f64 = t.parse().map_err(|_| bad())?;
    rational_from_f64(x)
}

/// Best rational approximation with denominator at most [`DENOMINATOR_CAP`].
pub fn rational_from_f64(x: f64) -> Result<(Rational64, Option<String>)> {
    if !x.is_finite() || x.abs() > 1e12 {
        return Err(Error::InvalidParameter(format!("cannot represent {x} as a rational")));
    }
    // convergents h/k of the continued fraction of x
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = x;
    let mut best = Rational64::from_integer(x.round() as i64);
    for _ in 0..64 {
        let a = rest.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1).and_then(|v| v.checked_add(h0));
        let k2 = ai.checked_mul(k1).and_then(|v| v.checked_add(k0));
        let (Some(h2), Some(k2)) = (h2, k2) else { break };
        if k2 > DENOMINATOR_CAP {
            break;
        }
        best = Rational64::new(h2, k2);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    let exact = ratio_f64(best) == x;
    let warning = (!exact || x.fract() != 0.0).then(|| {
        format!("decimal {x} converted to the rational {best} (denominator cap {DENOMINATOR_CAP})")
    });
    Ok((best, warning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn levels_follow_sphere_spectrum() {
        let l = cp1_levels(4);
        assert_eq!((l[0].eigenvalue, l[0].multiplicity), (0, 1));
        assert_eq!((l[1].eigenvalue, l[1].multiplicity), (2, 3));
        assert_eq!((l[2].eigenvalue, l[2].multiplicity), (6, 5));
        let total: u64 = l.iter().map(|x| x.multiplicity).sum();
        assert_eq!(total, 25);
    }

    #[test]
    fn quarter_has_dimension_thirty_three() {
        let k = kernel_families(r(1, 4), 5).unwrap();
        let triples: Vec<[u32; 3]> = k.families.iter().map(|f| f.triple).collect();
        assert_eq!(triples, vec![[0, 0, 1], [1, 2, 0], [2, 1, 0]]);
        assert_eq!(k.total_dimension, 33);
        let m: Vec<i64> = k.families.iter().map(|f| f.multiplier.to_integer()).collect();
        assert_eq!(m, vec![-8, 16, 16]);
        assert_eq!(k.formula, MultiplierFormula::Exact);
        // the general-λ derivative agrees with the displayed operator on the kernel
        for f in &k.families {
            let mu3 = f.triple[2] as i64 * (f.triple[2] as i64 + 1);
            assert_eq!(f.multiplier, Rational64::from_integer(4 - 3 * mu3) / r(1, 4));
        }
    }

    #[test]
    fn other_rational_points() {
        let one = kernel_families(r(1, 1), 10).unwrap();
        assert_eq!(one.total_dimension, 27);
        assert_eq!(one.formula, MultiplierFormula::GeneralLambdaExtension);
        assert_eq!(kernel_families(r(1, 3), 10).unwrap().total_dimension, 0);
    }

    #[test]
    fn instants_in_intervals() {
        let a = bifurcation_instants((r(1, 5), r(3, 10)), 5).unwrap();
        let quarter = a.iter().find(|c| c.lambda == r(1, 4)).unwrap();
        assert!(quarter.is_instant && quarter.total_dimension == 33);
        let b = bifurcation_instants((r(9, 10), r(11, 10)), 10).unwrap();
        assert!(b.iter().any(|c| c.lambda == r(1, 1) && c.total_dimension == 27 && c.odd));
        assert!(bifurcation_instants((r(30, 100), r(33, 100)), 10).unwrap().is_empty());
    }

    #[test]
    fn decimal_conversion() {
        assert_eq!(parse_rational("0.25").unwrap().0, r(1, 4));
        assert_eq!(parse_rational("1/4").unwrap(), (r(1, 4), None));
        let (third, warn) = parse_rational("0.3333333333").unwrap();
        assert_eq!(third, r(1, 3));
        assert!(warn.is_some());
        assert!(parse_rational("abc").is_err());
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric_in_first_two_factors(p in 1i64..40, q in 1i64..40) {
            let k = kernel_families(r(p, q), 6).unwrap();
            let mut swapped: Vec<[u32; 3]> = k.families.iter().map(|f| [f.triple[1], f.triple[0], f.triple[2]]).collect();
            swapped.sort();
            let mut orig: Vec<[u32; 3]> = k.families.iter().map(|f| f.triple).collect();
            orig.sort();
            prop_assert_eq!(orig, swapped);
        }

        #[test]
        fn every_family_satisfies_the_kernel_equation(p in 1i64..40, q in 1i64..40) {
            let lam = r(p, q);
            let model = ProductSpectralModel::new(lam, 6).unwrap();
            for f in kernel_families(lam, 6).unwrap().families {
                let mu = f.triple.map(|j| j as i64 * (j as i64 + 1));
                prop_assert!(model.in_kernel(mu));
                prop_assert_eq!(f.dimension, f.triple.iter().map(|&j| 2 * j as u64 + 1).product::<u64>());
            }
        }
    }
}
