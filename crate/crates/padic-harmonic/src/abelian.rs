//! Characters of `F^x` with `chi(p) = 1` and the abelian factors L, eps, gamma, beta.

use crate::error::{Error, Result};
use crate::padic::{ipow, root_of_unity, totient_pow, vp, Orientation, PadicElement, UnitGroup};
use crate::ratfunc::{RationalFunctionZ, Subst};
use crate::C64;
use std::sync::Arc;

/// A character of `(Z/p^N)^x`, `chi(g^j) = exp(2 pi i a j / phi(p^N))`.
#[derive(Debug, Clone)]
pub struct UnitCharacter {
    group: Arc<UnitGroup>,
    a: i64,
    conductor: u32,
}

impl PartialEq for UnitCharacter {
    fn eq(&self, other: &Self) -> bool {
        let l = self.level().max(other.level());
        let (x, y) = (self.lift(l), other.lift(l));
        x.p() == y.p() && x.a == y.a
    }
}

fn conductor_of_index(p: i64, level: u32, a: i64) -> u32 {
    if a == 0 {
        0
    } else {
        let v = vp(a, p);
        (level.saturating_sub(v)).max(1)
    }
}

impl UnitCharacter {
    pub fn new(group: Arc<UnitGroup>, a: i64) -> Self {
        let phi = group.order as i64;
        let a = a.rem_euclid(phi);
        let conductor = conductor_of_index(group.p, group.level, a);
        Self { group, a, conductor }
    }

    pub fn from_index(p: i64, level: u32, a: i64) -> Result<Self> {
        Ok(Self::new(Arc::new(UnitGroup::new(p, level)?), a))
    }

    pub fn trivial(p: i64, level: u32) -> Result<Self> {
        Self::from_index(p, level, 0)
    }

    /// The quadratic (Legendre) character.
    pub fn quadratic(p: i64, level: u32) -> Result<Self> {
        let phi = totient_pow(p, level);
        Self::from_index(p, level, phi / 2)
    }

    /// Character determined by the image of the fixed generator.
    pub fn from_generator_image(p: i64, level: u32, image: C64) -> Result<Self> {
        let g = Arc::new(UnitGroup::new(p, level)?);
        let phi = g.order as i64;
        let t = image.arg() / std::f64::consts::TAU * phi as f64;
        let a = t.round() as i64;
        if (t - a as f64).abs() > 1e-6 || (image.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("{image} is not a {phi}-th root of unity")));
        }
        Ok(Self::new(g, a))
    }

    /// Character from a table of values indexed by residue mod `p^N`
    /// (entries at non-units ignored).
    pub fn from_table(p: i64, level: u32, table: &[C64]) -> Result<Self> {
        let g = Arc::new(UnitGroup::new(p, level)?);
        if table.len() != g.modulus as usize {
            return Err(Error::Dimension(format!("table length {} != {}", table.len(), g.modulus)));
        }
        let m = g.modulus;
        for &u in &g.elems {
            for &v in &g.elems {
                let uv = (u * v) % m;
                if (table[uv as usize] - table[u as usize] * table[v as usize]).norm() > 1e-9 {
                    return Err(Error::NotMultiplicative);
                }
            }
        }
        let chi = Self::from_generator_image(p, level, table[g.generator as usize])
            .map_err(|_| Error::NotMultiplicative)?;
        let conductor = conductor_by_inspection(&g, |u| table[u as usize]);
        debug_assert_eq!(conductor, chi.conductor);
        Ok(chi)
    }

    pub fn all(p: i64, level: u32) -> Result<Vec<Self>> {
        let g = Arc::new(UnitGroup::new(p, level)?);
        Ok((0..g.order as i64).map(|a| Self::new(g.clone(), a)).collect())
    }

    pub fn p(&self) -> i64 {
        self.group.p
    }
    pub fn q(&self) -> f64 {
        self.group.p as f64
    }
    pub fn level(&self) -> u32 {
        self.group.level
    }
    pub fn index(&self) -> i64 {
        self.a
    }
    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }
    pub fn conductor(&self) -> u32 {
        self.conductor
    }
    pub fn is_trivial(&self) -> bool {
        self.a == 0
    }
    /// `chi^2` trivial.
    pub fn is_quadratic_or_trivial(&self) -> bool {
        (2 * self.a) % self.group.order as i64 == 0
    }

    /// Value on a unit residue; `None` if `u` is divisible by `p`.
    pub fn value(&self, u: i64) -> Option<C64> {
        let j = self.group.dlog(u)?;
        Some(self.value_at_log(j))
    }

    /// Value at `g^j`.
    pub fn value_at_log(&self, j: usize) -> C64 {
        let phi = self.group.order as i64;
        root_of_unity((self.a * j as i64) % phi, phi)
    }

    pub fn generator_image(&self) -> C64 {
        self.value_at_log(1 % self.group.order)
    }

    pub fn pow(&self, k: i64) -> Self {
        Self::new(self.group.clone(), self.a * k)
    }
    pub fn inverse(&self) -> Self {
        self.pow(-1)
    }
    pub fn square(&self) -> Self {
        self.pow(2)
    }

    /// The same character viewed at a higher level (or lower, if the conductor allows).
    pub fn lift(&self, level: u32) -> Self {
        if level == self.level() {
            return self.clone();
        }
        assert!(level >= self.conductor, "level below conductor");
        let p = self.p();
        let g = Arc::new(UnitGroup::new(p, level.max(1)).expect("valid level"));
        let (phi_new, phi_old) = (totient_pow(p, level.max(1)), totient_pow(p, self.level()));
        // a_new / phi_new = a_old / phi_old
        let a = if phi_new >= phi_old {
            self.a * (phi_new / phi_old)
        } else {
            self.a / (phi_old / phi_new)
        };
        Self::new(g, a)
    }

    /// `chi(-1)`, which is `+1` or `-1`.
    pub fn at_minus_one(&self) -> f64 {
        self.value(-1).unwrap().re.round()
    }

    /// `chi(ac x) z^{ord x}` for the quasi-character `chi_s`.
    pub fn quasi_eval(&self, x: &PadicElement, z: C64) -> C64 {
        self.value(x.unit).expect("unit") * z.powi(x.valuation)
    }
}

fn conductor_by_inspection(g: &UnitGroup, val: impl Fn(i64) -> C64) -> u32 {
    let is_one = |u: i64| (val(u) - 1.0).norm() < 1e-9;
    if g.elems.iter().all(|&u| is_one(u)) {
        return 0;
    }
    for e in 1..=g.level {
        let pe = ipow(g.p, e);
        if (0..g.modulus / pe).all(|t| is_one((1 + pe * t) % g.modulus)) {
            return e;
        }
    }
    g.level
}

/// Conductor read off a value table (the `e = 0` convention for unramified).
pub fn conductor(chi: &UnitCharacter) -> u32 {
    conductor_by_inspection(&chi.group, |u| chi.value(u).unwrap())
}

/// Quasi-character `chi_s`; the `|.|^s` part is carried by `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiCharacterSymbol {
    pub unit_part: UnitCharacter,
}

impl QuasiCharacterSymbol {
    pub fn eval(&self, x: &PadicElement, z: C64) -> C64 {
        self.unit_part.quasi_eval(x, z)
    }
}

/// `L(s, chi)`.
pub fn l_factor(chi: &UnitCharacter) -> RationalFunctionZ {
    if chi.conductor() == 0 {
        RationalFunctionZ::geometric(C64::new(1.0, 0.0))
    } else {
        RationalFunctionZ::one()
    }
}

/// Gauss sum `sum_{u mod p^e} chi^{-1}(u) psi(+-u / p^e)`; 1 when `e = 0`.
pub fn gauss_sum(chi: &UnitCharacter, orient: Orientation) -> C64 {
    let e = chi.conductor();
    if e == 0 {
        return C64::new(1.0, 0.0);
    }
    let pe = ipow(chi.p(), e);
    let inv = chi.inverse();
    (1..pe)
        .filter(|u| u % chi.p() != 0)
        .map(|u| inv.value(u).unwrap() * root_of_unity(orient.sign() * u, pe))
        .sum()
}

/// `eps(1/2, chi, psi)`, of modulus one.
pub fn epsilon_half(chi: &UnitCharacter, orient: Orientation) -> C64 {
    gauss_sum(chi, orient) * chi.q().powf(-(chi.conductor() as f64) / 2.0)
}

/// `eps(s, chi, psi) = q^{e/2} eps(1/2, chi, psi) z^e`.
pub fn epsilon_factor(chi: &UnitCharacter, orient: Orientation) -> RationalFunctionZ {
    RationalFunctionZ::monomial(gauss_sum(chi, orient), chi.conductor() as i32)
}

/// `gamma(s, chi, psi) = eps(s, chi, psi) L(1 - s, chi^{-1}) / L(s, chi)`.
pub fn gamma_factor(chi: &UnitCharacter, orient: Orientation) -> RationalFunctionZ {
    let eps = epsilon_factor(chi, orient);
    if chi.conductor() > 0 {
        return eps;
    }
    // L(1-s): z -> q^{-1}/z
    let l1 = l_factor(&chi.inverse()).substitute(Subst::Invert).substitute(Subst::Scale(C64::new(chi.q(), 0.0)));
    let inv_l = RationalFunctionZ::laurent_poly(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)], 0);
    &(&eps * &l1) * &inv_l
}

/// `beta_psi(chi_s) = gamma(s - (2n-1)/2, chi) prod_{r=1}^{n} gamma(2s - 2n + 2r, chi^2)`.
pub fn beta_factor(n: u32, chi: &UnitCharacter, orient: Orientation) -> RationalFunctionZ {
    let q = chi.q();
    let n_i = n as i32;
    let mut b = gamma_factor(chi, orient).subst_affine(q, 1, -(2.0 * n as f64 - 1.0) / 2.0);
    let g2 = gamma_factor(&chi.square(), orient);
    for r in 1..=n_i {
        b = &b * &g2.subst_affine(q, 2, (2 * r - 2 * n_i) as f64);
    }
    b
}

/// `(a_m(s, chi), b_m(s, chi))`.
pub fn ab_factors(m: u32, chi: &UnitCharacter) -> (RationalFunctionZ, RationalFunctionZ) {
    let q = chi.q();
    let l = l_factor(chi);
    let l2 = l_factor(&chi.square());
    let mut a = l.subst_affine(q, 1, -((m as f64) - 1.0) / 2.0);
    let mut b = l.subst_affine(q, 1, ((m as f64) + 1.0) / 2.0);
    for r in 1..=(m / 2) as i32 {
        a = &a * &l2.subst_affine(q, 2, (2 * r - m as i32) as f64);
        b = &b * &l2.subst_affine(q, 2, (2 * r - 1) as f64);
    }
    (a, b)
}

/// `R(z) -> R(c z)`: restores a general value `chi(p) = c`.
pub fn with_uniformizer_value(r: &RationalFunctionZ, c: C64) -> RationalFunctionZ {
    r.substitute(Subst::Scale(c))
}

/// Test function for the Tate oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TateTestFunction {
    /// indicator of `u0 (1 + p^N O)`
    UnitCoset { u0: i64, depth: u32 },
    /// indicator of `O` (only useful for unramified `chi`)
    Integers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TateOracleResult {
    pub ratio: C64,
    pub ratio_alt: C64,
    pub truncation: i32,
}

fn tate_ratio(
    chi: &UnitCharacter,
    s: C64,
    trunc: i32,
    f: TateTestFunction,
    orient: Orientation,
) -> Result<C64> {
    let p = chi.p();
    let q = chi.q();
    let qs = |x: C64| -> C64 { C64::new(q, 0.0).powc(-x) };
    let inv = chi.inverse();
    let e = chi.conductor();
    match f {
        TateTestFunction::Integers => {
            if e > 0 {
                return Err(Error::Invalid("Z(s, 1_O, chi) vanishes for ramified chi".into()));
            }
            let zs: C64 = (0..trunc).map(|k| qs(s * k as f64)).sum();
            let zd: C64 = (0..trunc).map(|k| qs((1.0 - s) * k as f64)).sum();
            Ok(zd / zs)
        }
        TateTestFunction::UnitCoset { u0, depth } => {
            let n = depth.max(e).max(1);
            let phin = totient_pow(p, n) as f64;
            let zs = chi.value(u0).ok_or_else(|| Error::Invalid("u0 not a unit".into()))? / phin;
            // fhat(y) = psi(u0 y) p^{-N} 1_{p^{-N} O}(y)
            let mut zd = C64::new(0.0, 0.0);
            for k in -(n as i32)..trunc {
                let shell = if k >= 0 {
                    if e == 0 {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                } else {
                    let d = (-k) as u32;
                    let mlev = d.max(chi.level());
                    let m = ipow(p, mlev);
                    let pd = ipow(p, d);
                    let sum: C64 = (1..m)
                        .filter(|u| u % p != 0)
                        .map(|u| {
                            inv.value(u).unwrap()
                                * root_of_unity(orient.sign() * ((u0 * u) % pd), pd)
                        })
                        .sum();
                    sum / totient_pow(p, mlev) as f64
                };
                zd += shell * qs((1.0 - s) * k as f64);
            }
            Ok(zd * q.powi(-(n as i32)) / zs)
        }
    }
}

/// Brute-force `Z(1-s, fhat, chi^{-1}) / Z(s, f, chi)` by finite shell sums.
pub fn tate_gamma_oracle(
    chi: &UnitCharacter,
    s: C64,
    truncation: i32,
    orient: Orientation,
) -> Result<TateOracleResult> {
    if !(s.re > 0.0 && s.re < 1.0) {
        return Err(Error::Invalid(format!("Re(s) = {} outside (0, 1)", s.re)));
    }
    let f1 = TateTestFunction::UnitCoset { u0: 1, depth: chi.conductor().max(1) };
    let f2 = if chi.conductor() == 0 {
        TateTestFunction::Integers
    } else {
        TateTestFunction::UnitCoset { u0: chi.group().generator, depth: chi.conductor() + 1 }
    };
    let r = tate_ratio(chi, s, truncation, f1, orient)?;
    let r_short = tate_ratio(chi, s, truncation - 10, f1, orient)?;
    if (r - r_short).norm() > 1e-10 * r.norm().max(1.0) {
        return Err(Error::NoStabilization(format!(
            "Tate oracle: truncation {} gives {r}, truncation {} gives {r_short}",
            truncation,
            truncation - 10
        )));
    }
    let r2 = tate_ratio(chi, s, truncation, f2, orient)?;
    Ok(TateOracleResult { ratio: r, ratio_alt: r2, truncation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfunc::sample_points;

    fn z_of(q: f64, s: C64) -> C64 {
        C64::new(q, 0.0).powc(-s)
    }

    #[test]
    fn conductor_examples() {
        assert_eq!(UnitCharacter::trivial(3, 2).unwrap().conductor(), 0);
        let quad = UnitCharacter::quadratic(3, 1).unwrap();
        assert_eq!(quad.conductor(), 1);
        assert_eq!(conductor(&quad), 1);
        // order-3 character at level 2: a = 2 (phi = 6)
        let c3 = UnitCharacter::from_index(3, 2, 2).unwrap();
        assert_eq!(c3.pow(3).index(), 0);
        // trivial on the image of (Z/3)^x (i.e. on -1) but nontrivial on 1 + 3O
        assert!((c3.value(-1).unwrap() - 1.0).norm() < 1e-12);
        assert!((c3.value(4).unwrap() - 1.0).norm() > 0.5);
        assert_eq!(conductor(&c3), 2);
        assert_eq!(c3.conductor(), 2);
    }

    #[test]
    fn conductor_formula_matches_inspection() {
        for p in [3, 5, 7] {
            for level in 1..=3 {
                for chi in UnitCharacter::all(p, level).unwrap() {
                    assert_eq!(chi.conductor(), conductor(&chi));
                }
            }
        }
    }

    #[test]
    fn table_roundtrip_and_non_multiplicative() {
        let chi = UnitCharacter::from_index(5, 2, 7).unwrap();
        let table: Vec<C64> =
            (0..25).map(|u| chi.value(u).unwrap_or(C64::new(0.0, 0.0))).collect();
        let back = UnitCharacter::from_table(5, 2, &table).unwrap();
        assert_eq!(back, chi);
        let mut bad = table.clone();
        bad[2] = C64::new(-1.0, 0.0);
        assert_eq!(UnitCharacter::from_table(5, 2, &bad), Err(Error::NotMultiplicative));
    }

    #[test]
    fn lift_preserves_values() {
        let chi = UnitCharacter::from_index(3, 1, 1).unwrap();
        let l = chi.lift(3);
        for u in 1..27 {
            if u % 3 != 0 {
                assert!((l.value(u).unwrap() - chi.value(u % 3).unwrap()).norm() < 1e-12);
            }
        }
        assert_eq!(l.lift(1).index(), 1);
    }

    #[test]
    fn l_and_ab_examples() {
        let triv = UnitCharacter::trivial(3, 1).unwrap();
        let q = 3.0;
        assert!(l_factor(&triv).approx_eq(&RationalFunctionZ::geometric(C64::new(1.0, 0.0)), 1e-12));
        let ram = UnitCharacter::quadratic(3, 1).unwrap();
        assert!(l_factor(&ram).approx_eq(&RationalFunctionZ::one(), 1e-12));
        // chi^2 of the quadratic character is trivial: L(2s, chi^2) = 1/(1 - z^2)
        let l2 = l_factor(&ram.square()).substitute(Subst::Square);
        let expect = RationalFunctionZ::geometric(C64::new(1.0, 0.0)).substitute(Subst::Square);
        assert!(l2.approx_eq(&expect, 1e-12));
        let (a1, _) = ab_factors(1, &triv);
        assert!(a1.approx_eq(&RationalFunctionZ::geometric(C64::new(1.0, 0.0)), 1e-12));
        let (a3, _) = ab_factors(3, &triv);
        let expect = &RationalFunctionZ::geometric(C64::new(q, 0.0))
            * &RationalFunctionZ::geometric(C64::new(q, 0.0)).substitute(Subst::Square);
        assert!(a3.approx_eq(&expect, 1e-12));
        // chi^2 ramified: a_m = 1
        let c = UnitCharacter::from_index(5, 1, 1).unwrap();
        assert!(c.square().conductor() > 0);
        let (a3, b3) = ab_factors(3, &c);
        assert!(a3.approx_eq(&RationalFunctionZ::one(), 1e-12));
        assert!(b3.approx_eq(&RationalFunctionZ::one(), 1e-12));
    }

    #[test]
    fn b_m_trivial_closed_form() {
        let triv = UnitCharacter::trivial(3, 1).unwrap();
        let q = 3.0f64;
        let (_, b3) = ab_factors(3, &triv);
        // L(s + 2) L(2s + 1) = 1 / ((1 - z/9)(1 - z^2/3))
        for z in sample_points(10) {
            let expect = 1.0 / ((1.0 - z / (q * q)) * (1.0 - z * z / q));
            assert!((b3.eval(z) - expect).norm() < 1e-10 * expect.norm());
        }
    }

    #[test]
    fn gamma_trivial_closed_form() {
        let q = 3.0;
        let triv = UnitCharacter::trivial(3, 1).unwrap();
        let g = gamma_factor(&triv, Orientation::Psi);
        for z in sample_points(10) {
            let expect = z * (1.0 - z) / (z - 1.0 / q);
            assert!((g.eval(z) - expect).norm() < 1e-10 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn epsilon_quadratic_p3() {
        let chi = UnitCharacter::quadratic(3, 1).unwrap();
        // direct two-term Gauss sum: chi(1) psi(1/3) + chi(2) psi(2/3)
        let w = root_of_unity(1, 3);
        let g = w - w * w;
        assert!((gauss_sum(&chi, Orientation::Psi) - g).norm() < 1e-12);
        let e = epsilon_half(&chi, Orientation::Psi);
        assert!((e.norm() - 1.0).abs() < 1e-12);
        let full = epsilon_factor(&chi, Orientation::Psi);
        assert!((full.laurent_coeff(1) - 3f64.sqrt() * e).norm() < 1e-12);
    }

    #[test]
    fn beta_examples() {
        let q: f64 = 3.0;
        let triv = UnitCharacter::trivial(3, 1).unwrap();
        let b0 = beta_factor(0, &triv, Orientation::Psi);
        let g = gamma_factor(&triv, Orientation::Psi);
        for z in sample_points(8) {
            let expect = g.eval(z / q.sqrt());
            assert!((b0.eval(z) - expect).norm() < 1e-10 * expect.norm().max(1.0));
        }
        let b1 = beta_factor(1, &triv, Orientation::Psi);
        for z in sample_points(8) {
            let expect = g.eval(z * q.sqrt()) * g.eval(z * z);
            assert!((b1.eval(z) - expect).norm() < 1e-9 * expect.norm().max(1.0));
        }
        // chi^2 ramified: monomial of degree e(chi) + 2n e(chi^2)
        for p in [5i64, 7] {
            for chi in UnitCharacter::all(p, 2).unwrap() {
                if chi.square().conductor() == 0 {
                    continue;
                }
                for n in 1..=2u32 {
                    let b = beta_factor(n, &chi, Orientation::Psi);
                    let pf = b.partial_fractions().unwrap();
                    assert!(pf.poles.is_empty());
                    let deg = (chi.conductor() + 2 * n * chi.square().conductor()) as i32;
                    assert_eq!(b.order_at_zero(), Some(deg));
                    assert_eq!(b.numerator().len(), 1);
                }
            }
        }
    }

    #[test]
    fn tate_oracle_trivial_and_quadratic() {
        let s = C64::new(0.5, 0.0);
        for chi in [UnitCharacter::trivial(3, 1).unwrap(), UnitCharacter::quadratic(3, 1).unwrap()] {
            let r = tate_gamma_oracle(&chi, s, 90, Orientation::Psi).unwrap();
            let g = gamma_factor(&chi, Orientation::Psi).eval(z_of(3.0, s));
            assert!((r.ratio - g).norm() < 1e-6 * g.norm());
            assert!((r.ratio - r.ratio_alt).norm() < 1e-6 * g.norm());
        }
    }

    #[test]
    fn tate_oracle_rejects_bad_region() {
        let chi = UnitCharacter::trivial(3, 1).unwrap();
        assert!(tate_gamma_oracle(&chi, C64::new(1.5, 0.0), 80, Orientation::Psi).is_err());
    }

    #[test]
    fn gamma_reflection() {
        // gamma(s, chi, psi) gamma(1 - s, chi^{-1}, psi^{-1}) = 1
        for p in [3i64, 5] {
            for chi in UnitCharacter::all(p, 2).unwrap() {
                let g = gamma_factor(&chi, Orientation::Psi);
                let h = gamma_factor(&chi.inverse(), Orientation::PsiInverse);
                for z in sample_points(5) {
                    let zz = 1.0 / (chi.q() * z);
                    let v = g.eval(z) * h.eval(zz);
                    assert!((v - 1.0).norm() < 1e-9, "{v}");
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn characters_multiplicative(p in proptest::sample::select(vec![3i64, 5, 7]), a in 0i64..10_000, u in 1i64..500, v in 1i64..500) {
            proptest::prop_assume!(u % p != 0 && v % p != 0);
            let all = UnitCharacter::all(p, 2).unwrap();
            let chi = &all[(a as usize) % all.len()];
            let lhs = chi.value(u * v).unwrap();
            let rhs = chi.value(u).unwrap() * chi.value(v).unwrap();
            proptest::prop_assert!((lhs - rhs).norm() < 1e-12);
            proptest::prop_assert!((chi.value(u).unwrap() * chi.inverse().value(u).unwrap() - 1.0).norm() < 1e-12);
        }

        #[test]
        fn gamma_reflection_prop(p in proptest::sample::select(vec![3i64, 5]), a in 0i64..1000, r in 0.2f64..3.0, th in -3.1f64..3.1) {
            let all = UnitCharacter::all(p, 2).unwrap();
            let chi = &all[(a as usize) % all.len()];
            let z = C64::from_polar(r, th);
            let g = gamma_factor(chi, Orientation::Psi).eval(z);
            let h = gamma_factor(&chi.inverse(), Orientation::PsiInverse).eval(1.0 / (chi.q() * z));
            proptest::prop_assume!(g.is_finite() && h.is_finite() && g.norm() < 1e6 && h.norm() < 1e6);
            proptest::prop_assert!((g * h - 1.0).norm() < 1e-8);
        }
    }
}
