//! Rational functions of `z = q^{-s}` with complex coefficients.
//!
//! Stored as `z^shift * N(z) / prod_i (1 - alpha_i z)`; a pole term with
//! parameter `alpha` sits at `z = 1/alpha`.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, Mul, Neg, Sub};

/// Relative tolerance used when deciding that a numerator vanishes at a pole.
pub const CANCEL_TOL: f64 = 1e-8;
/// Poles closer than this (relative) are treated as one repeated pole.
pub const MERGE_TOL: f64 = 1e-7;
/// Distinct poles closer than this (relative) are rejected as ill-conditioned.
pub const SEPARATION_TOL: f64 = 1e-4;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

pub fn poly_eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn poly_deriv(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect()
}

pub fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

fn poly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default())
        .collect()
}

/// `prod (1 - alpha_i z)` expanded.
pub fn poly_from_alphas(alphas: &[C64]) -> Vec<C64> {
    let mut p = vec![c(1.0)];
    for &a in alphas {
        p = poly_mul(&p, &[c(1.0), -a]);
    }
    p
}

/// Divide `n(z)` by `(1 - alpha z)` assuming exact divisibility.
fn deflate(n: &[C64], alpha: C64) -> Vec<C64> {
    let d = n.len() - 1;
    if d == 0 {
        return vec![];
    }
    let mut q = vec![C64::new(0.0, 0.0); d];
    if alpha.norm() <= 1.0 {
        // forward: q_i = n_i + alpha q_{i-1}
        let mut prev = C64::new(0.0, 0.0);
        for (i, qi) in q.iter_mut().enumerate() {
            *qi = n[i] + alpha * prev;
            prev = *qi;
        }
    } else {
        // backward from the top: n_d = -alpha q_{d-1}, n_i = q_i - alpha q_{i-1}
        q[d - 1] = -n[d] / alpha;
        for i in (1..d).rev() {
            q[i - 1] = (q[i] - n[i]) / alpha;
        }
    }
    q
}

/// Roots of a polynomial (ascending coefficients) by the Aberth iteration.
pub fn poly_roots(p: &[C64]) -> Result<Vec<C64>> {
    let mut p = p.to_vec();
    while p.last().is_some_and(|x| x.norm() == 0.0) {
        p.pop();
    }
    let d = p.len().saturating_sub(1);
    if d == 0 {
        return Ok(vec![]);
    }
    let lead = p[d];
    let monic: Vec<C64> = p.iter().map(|&x| x / lead).collect();
    let bound = 1.0 + monic[..d].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let dp = poly_deriv(&monic);
    let mut z: Vec<C64> = (0..d)
        .map(|k| C64::from_polar(0.5 * bound, 0.4 + std::f64::consts::TAU * k as f64 / d as f64))
        .collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..d {
            let pv = poly_eval(&monic, z[i]);
            let dv = poly_eval(&dp, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let s: C64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            delta = delta.max(w.norm() / z[i].norm().max(1e-300));
        }
        if delta < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dv = poly_eval(&dp, *zi);
            if dv.norm() > 0.0 {
                *zi -= poly_eval(&monic, *zi) / dv;
            }
        }
    }
    if z.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::IllConditioned("root iteration diverged".into()));
    }
    Ok(z)
}

/// `z^shift * num(z) / prod (1 - alpha_i z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunctionZ {
    num: Vec<C64>,
    shift: i32,
    poles: Vec<C64>,
}

/// One pole group of a partial-fraction decomposition:
/// `sum_{j} coeffs[j] / (1 - alpha z)^{j+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub alpha: C64,
    pub coeffs: Vec<C64>,
}

impl PoleTerm {
    pub fn multiplicity(&self) -> usize {
        self.coeffs.len()
    }
    /// Pole location `z = 1/alpha`.
    pub fn location(&self) -> C64 {
        1.0 / self.alpha
    }
    fn series_coeff(&self, j: i32) -> C64 {
        if j < 0 {
            return C64::new(0.0, 0.0);
        }
        let aj = self.alpha.powi(j);
        let mut s = C64::new(0.0, 0.0);
        for (m, &b) in self.coeffs.iter().enumerate() {
            // coefficient of z^j in (1 - a z)^{-(m+1)} is binom(j+m, m) a^j
            let mut binom = 1.0;
            for t in 1..=m {
                binom *= (j as f64 + t as f64) / t as f64;
            }
            s += b * binom * aj;
        }
        s
    }
    fn eval(&self, z: C64) -> C64 {
        let u = 1.0 - self.alpha * z;
        self.coeffs.iter().enumerate().map(|(m, &b)| b / u.powi(m as i32 + 1)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractions {
    /// Laurent polynomial part: coefficient of `z^(laurent_low + i)` is `laurent[i]`.
    pub laurent_low: i32,
    pub laurent: Vec<C64>,
    pub poles: Vec<PoleTerm>,
}

impl PartialFractions {
    pub fn eval(&self, z: C64) -> C64 {
        let lp: C64 = self
            .laurent
            .iter()
            .enumerate()
            .map(|(i, &a)| a * z.powi(self.laurent_low + i as i32))
            .sum();
        lp + self.poles.iter().map(|t| t.eval(z)).sum::<C64>()
    }
    pub fn laurent_coeff(&self, m: i32) -> C64 {
        let i = m - self.laurent_low;
        let lp = if i >= 0 && (i as usize) < self.laurent.len() {
            self.laurent[i as usize]
        } else {
            C64::new(0.0, 0.0)
        };
        lp + self.poles.iter().map(|t| t.series_coeff(m)).sum::<C64>()
    }
    /// Highest power in the Laurent part, if any nonzero.
    pub fn laurent_high(&self) -> Option<i32> {
        self.laurent
            .iter()
            .rposition(|a| a.norm() > 0.0)
            .map(|i| self.laurent_low + i as i32)
    }
}

/// Deterministic sample points off the unit circle.
pub fn sample_points(n: usize) -> Vec<C64> {
    let radii = [0.37, 0.53, 0.71, 1.31, 1.73];
    (0..n)
        .map(|k| C64::from_polar(radii[k % radii.len()], 0.3 + 1.234_567 * k as f64))
        .collect()
}

/// Maximum pointwise relative deviation between two functions at `pts`.
pub fn max_rel_dev(f: impl Fn(C64) -> C64, g: impl Fn(C64) -> C64, pts: &[C64]) -> f64 {
    let vals: Vec<(C64, C64)> = pts.iter().map(|&z| (f(z), g(z))).collect();
    let scale = vals.iter().map(|(a, b)| a.norm().max(b.norm())).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    vals.iter()
        .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(1e-12 * scale))
        .fold(0.0, f64::max)
}

/// Substitution rules for `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subst {
    Scale(C64),
    Square,
    Invert,
}

impl RationalFunctionZ {
    pub fn zero() -> Self {
        Self { num: vec![], shift: 0, poles: vec![] }
    }

    pub fn constant(a: C64) -> Self {
        Self::from_parts(vec![a], 0, vec![])
    }

    pub fn one() -> Self {
        Self::constant(c(1.0))
    }

    pub fn monomial(a: C64, k: i32) -> Self {
        Self::from_parts(vec![a], k, vec![])
    }

    /// `z^shift * sum coeffs[i] z^i`.
    pub fn laurent_poly(coeffs: Vec<C64>, shift: i32) -> Self {
        Self::from_parts(coeffs, shift, vec![])
    }

    /// `1 / (1 - alpha z)`.
    pub fn geometric(alpha: C64) -> Self {
        Self::from_parts(vec![c(1.0)], 0, vec![alpha])
    }

    /// Build from factored data; drops trivial factors and cancels common ones.
    pub fn from_parts(num: Vec<C64>, shift: i32, poles: Vec<C64>) -> Self {
        let mut r = Self { num, shift, poles };
        r.normalize();
        r.reduce();
        r
    }

    /// Build from expanded numerator and denominator polynomials (ascending).
    pub fn from_num_den(num: &[C64], den: &[C64]) -> Result<Self> {
        let lo = den
            .iter()
            .position(|x| x.norm() > 0.0)
            .ok_or_else(|| Error::Invalid("zero denominator".into()))?;
        let d = &den[lo..];
        let d0 = d[0];
        let roots = poly_roots(d)?;
        let poles: Vec<C64> = roots.iter().map(|r| 1.0 / r).collect();
        let num: Vec<C64> = num.iter().map(|&x| x / d0).collect();
        Ok(Self::from_parts(num, -(lo as i32), poles))
    }

    fn normalize(&mut self) {
        let scale = self.num.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            if scale == 0.0 {
                *self = Self { num: vec![], shift: 0, poles: vec![] };
            }
            return;
        }
        let eps = 1e-15 * scale;
        while self.num.last().is_some_and(|x| x.norm() <= eps) {
            self.num.pop();
        }
        let lead = self.num.iter().position(|x| x.norm() > eps).unwrap_or(0);
        if lead > 0 {
            self.num.drain(..lead);
            self.shift += lead as i32;
        }
        self.poles.retain(|a| a.norm() > 1e-300);
    }

    /// Cancel pole factors at which the numerator vanishes.
    fn reduce(&mut self) {
        if self.num.is_empty() {
            self.poles.clear();
            return;
        }
        let mut i = 0;
        while i < self.poles.len() {
            let a = self.poles[i];
            let z0 = 1.0 / a;
            let val = poly_eval(&self.num, z0);
            let mag: f64 = self
                .num
                .iter()
                .enumerate()
                .map(|(k, x)| x.norm() * z0.norm().powi(k as i32))
                .sum();
            if self.num.len() > 1 && val.norm() <= CANCEL_TOL * mag {
                self.num = deflate(&self.num, a);
                self.poles.remove(i);
                self.normalize();
            } else {
                i += 1;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn numerator(&self) -> &[C64] {
        &self.num
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    /// Pole parameters `alpha_i` (poles at `z = 1/alpha_i`), with repetition.
    pub fn pole_alphas(&self) -> &[C64] {
        &self.poles
    }

    pub fn is_laurent_polynomial(&self) -> bool {
        self.poles.is_empty()
    }

    /// Lowest power of `z` in the expansion at 0 (None for zero).
    pub fn order_at_zero(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            Some(self.shift)
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let d: C64 = self.poles.iter().map(|&a| 1.0 - a * z).product();
        z.powi(self.shift) * poly_eval(&self.num, z) / d
    }

    /// Power-series coefficients of `N(z)/prod(1 - alpha z)` for `z^0..z^len`.
    fn base_series(&self, len: usize) -> Vec<C64> {
        let mut s = vec![C64::new(0.0, 0.0); len];
        for (i, &a) in self.num.iter().enumerate().take(len) {
            s[i] = a;
        }
        for &a in &self.poles {
            for j in 1..len {
                let prev = s[j - 1];
                s[j] += a * prev;
            }
        }
        s
    }

    /// Coefficient of `z^m` in the Laurent expansion at `z = 0`.
    pub fn laurent_coeff(&self, m: i32) -> C64 {
        let j = m - self.shift;
        if self.is_zero() || j < 0 {
            return C64::new(0.0, 0.0);
        }
        self.base_series(j as usize + 1)[j as usize]
    }

    /// Coefficients of `z^lo..=z^hi`.
    pub fn laurent_coeffs(&self, lo: i32, hi: i32) -> Vec<C64> {
        if hi < lo {
            return vec![];
        }
        if self.is_zero() || hi < self.shift {
            return vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
        }
        let s = self.base_series((hi - self.shift + 1) as usize);
        (lo..=hi)
            .map(|m| {
                let j = m - self.shift;
                if j < 0 {
                    C64::new(0.0, 0.0)
                } else {
                    s[j as usize]
                }
            })
            .collect()
    }

    pub fn scale(&self, a: C64) -> Self {
        Self::from_parts(self.num.iter().map(|&x| x * a).collect(), self.shift, self.poles.clone())
    }

    pub fn mul_monomial(&self, k: i32) -> Self {
        let mut r = self.clone();
        if !r.is_zero() {
            r.shift += k;
        }
        r
    }

    pub fn substitute(&self, rule: Subst) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        match rule {
            Subst::Scale(a) => {
                let mut pw = a.powi(self.shift);
                let mut num = Vec::with_capacity(self.num.len());
                for &x in &self.num {
                    num.push(x * pw);
                    pw *= a;
                }
                Self::from_parts(num, self.shift, self.poles.iter().map(|&al| al * a).collect())
            }
            Subst::Square => {
                let mut num = vec![C64::new(0.0, 0.0); 2 * self.num.len() - 1];
                for (i, &x) in self.num.iter().enumerate() {
                    num[2 * i] = x;
                }
                let mut poles = Vec::with_capacity(2 * self.poles.len());
                for &a in &self.poles {
                    let b = a.sqrt();
                    poles.push(b);
                    poles.push(-b);
                }
                Self::from_parts(num, 2 * self.shift, poles)
            }
            Subst::Invert => {
                let d = self.num.len() as i32 - 1;
                let m = self.poles.len() as i32;
                let k: C64 = self.poles.iter().map(|&a| -a).product();
                let num: Vec<C64> = self.num.iter().rev().map(|&x| x / k).collect();
                let poles = self.poles.iter().map(|&a| 1.0 / a).collect();
                Self::from_parts(num, -self.shift - d + m, poles)
            }
        }
    }

    /// `R(q^{-c} z^a)` for `a` in `{1, 2, -1, -2}`: the substitution `s -> a s + c`.
    pub fn subst_affine(&self, q: f64, a: i32, c_shift: f64) -> Self {
        let r = self.substitute(Subst::Scale(c(q.powf(-c_shift))));
        match a {
            1 => r,
            2 => r.substitute(Subst::Square),
            -1 => r.substitute(Subst::Invert),
            -2 => r.substitute(Subst::Square).substitute(Subst::Invert),
            _ => panic!("unsupported s-coefficient {a}"),
        }
    }

    /// Reciprocal; factors the numerator numerically.
    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Invalid("reciprocal of zero".into()));
        }
        let roots = poly_roots(&self.num)?;
        let n0 = self.num[0];
        let poles = roots.iter().map(|r| 1.0 / r).collect();
        let num: Vec<C64> = poly_from_alphas(&self.poles).iter().map(|&x| x / n0).collect();
        Ok(Self::from_parts(num, -self.shift, poles))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// Partial-fraction decomposition at the stored poles.
    pub fn partial_fractions(&self) -> Result<PartialFractions> {
        if self.is_zero() {
            return Ok(PartialFractions { laurent_low: 0, laurent: vec![], poles: vec![] });
        }
        // group poles
        let mut groups: Vec<(C64, usize)> = vec![];
        for &a in &self.poles {
            let scale = a.norm().max(1e-300);
            if let Some(g) = groups.iter_mut().find(|(b, _)| (a - *b).norm() <= MERGE_TOL * scale) {
                g.1 += 1;
            } else {
                groups.push((a, 1));
            }
        }
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let (a, b) = (groups[i].0, groups[j].0);
                if (a - b).norm() <= SEPARATION_TOL * a.norm().max(b.norm()) {
                    return Err(Error::IllConditioned(format!(
                        "poles at z = {} and z = {} are not separable",
                        1.0 / a,
                        1.0 / b
                    )));
                }
            }
        }
        let mut terms = vec![];
        for (gi, &(a, mult)) in groups.iter().enumerate() {
            if mult > 2 {
                return Err(Error::IllConditioned(format!(
                    "pole at z = {} has multiplicity {mult} > 2",
                    1.0 / a
                )));
            }
            let z0 = 1.0 / a;
            let others: Vec<(C64, usize)> =
                groups.iter().enumerate().filter(|&(j, _)| j != gi).map(|(_, &g)| g).collect();
            let g = |z: C64| -> C64 {
                let d: C64 = others.iter().map(|&(b, m)| (1.0 - b * z).powi(m as i32)).product();
                z.powi(self.shift) * poly_eval(&self.num, z) / d
            };
            let g0 = g(z0);
            if mult == 1 {
                terms.push(PoleTerm { alpha: a, coeffs: vec![g0] });
            } else {
                let dn = poly_deriv(&self.num);
                let nz = poly_eval(&self.num, z0);
                let mut logd = self.shift as f64 / z0;
                if nz.norm() > 0.0 {
                    logd += poly_eval(&dn, z0) / nz;
                    for &(b, m) in &others {
                        logd += b * m as f64 / (1.0 - b * z0);
                    }
                    let gp = g0 * logd;
                    terms.push(PoleTerm { alpha: a, coeffs: vec![-gp / a, g0] });
                } else {
                    // numerator vanishes at the pole: g'(z0) directly
                    let d: C64 =
                        others.iter().map(|&(b, m)| (1.0 - b * z0).powi(m as i32)).product();
                    let gp = z0.powi(self.shift) * poly_eval(&dn, z0) / d;
                    terms.push(PoleTerm { alpha: a, coeffs: vec![-gp / a, g0] });
                }
            }
        }
        let top = self.shift + self.num.len() as i32 - 1 - self.poles.len() as i32;
        let low = self.shift.min(0);
        let hi = if low < 0 { top.max(-1) } else { top };
        let mut laurent = vec![];
        if hi >= low {
            let coeffs = self.laurent_coeffs(low, hi);
            for (i, m) in (low..=hi).enumerate() {
                let pole_part: C64 = terms.iter().map(|t| t.series_coeff(m)).sum();
                laurent.push(coeffs[i] - pole_part);
            }
        }
        Ok(PartialFractions { laurent_low: low, laurent, poles: terms })
    }

    /// Max relative cross-multiplied deviation at 20 deterministic points.
    pub fn deviation(&self, other: &Self) -> f64 {
        let pts = sample_points(20);
        let cross = |r: &Self, s: &Self, z: C64| -> C64 {
            if r.is_zero() {
                return C64::new(0.0, 0.0);
            }
            let d: C64 = s.poles.iter().map(|&a| 1.0 - a * z).product();
            z.powi(r.shift) * poly_eval(&r.num, z) * d
        };
        max_rel_dev(|z| cross(self, other, z), |z| cross(other, self, z), &pts)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.deviation(other) <= tol
    }

    /// Expanded `(numerator, denominator)` polynomials in ascending powers of `z`.
    pub fn to_num_den(&self) -> (Vec<C64>, Vec<C64>) {
        if self.is_zero() {
            return (vec![], vec![c(1.0)]);
        }
        let den = poly_from_alphas(&self.poles);
        if self.shift >= 0 {
            let mut num = vec![C64::new(0.0, 0.0); self.shift as usize];
            num.extend_from_slice(&self.num);
            (num, den)
        } else {
            let mut d = vec![C64::new(0.0, 0.0); (-self.shift) as usize];
            d.extend_from_slice(&den);
            (self.num.clone(), d)
        }
    }
}

impl<'a> Mul<&'a RationalFunctionZ> for &'a RationalFunctionZ {
    type Output = RationalFunctionZ;
    fn mul(self, rhs: &RationalFunctionZ) -> RationalFunctionZ {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunctionZ::zero();
        }
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&rhs.poles);
        RationalFunctionZ::from_parts(poly_mul(&self.num, &rhs.num), self.shift + rhs.shift, poles)
    }
}

impl Mul for RationalFunctionZ {
    type Output = RationalFunctionZ;
    fn mul(self, rhs: RationalFunctionZ) -> RationalFunctionZ {
        &self * &rhs
    }
}

impl<'a> Add<&'a RationalFunctionZ> for &'a RationalFunctionZ {
    type Output = RationalFunctionZ;
    fn add(self, rhs: &RationalFunctionZ) -> RationalFunctionZ {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        // common denominator: poles of rhs not matched in self, and vice versa
        let mut unused: Vec<Option<C64>> = self.poles.iter().map(|&a| Some(a)).collect();
        let mut extra_b = vec![];
        for &b in &rhs.poles {
            let hit = unused
                .iter_mut()
                .find(|slot| slot.is_some_and(|a| close(a, b, 1e-10)));
            match hit {
                Some(slot) => *slot = None,
                None => extra_b.push(b),
            }
        }
        let extra_a: Vec<C64> = unused.into_iter().flatten().collect();
        let s = self.shift.min(rhs.shift);
        let lift = |num: &[C64], k: i32| -> Vec<C64> {
            let mut v = vec![C64::new(0.0, 0.0); k as usize];
            v.extend_from_slice(num);
            v
        };
        let na = poly_mul(&lift(&self.num, self.shift - s), &poly_from_alphas(&extra_b));
        let nb = poly_mul(&lift(&rhs.num, rhs.shift - s), &poly_from_alphas(&extra_a));
        let mut poles = self.poles.clone();
        poles.extend(extra_b);
        RationalFunctionZ::from_parts(poly_add(&na, &nb), s, poles)
    }
}

impl Add for RationalFunctionZ {
    type Output = RationalFunctionZ;
    fn add(self, rhs: RationalFunctionZ) -> RationalFunctionZ {
        &self + &rhs
    }
}

impl Neg for &RationalFunctionZ {
    type Output = RationalFunctionZ;
    fn neg(self) -> RationalFunctionZ {
        self.scale(c(-1.0))
    }
}

impl<'a> Sub<&'a RationalFunctionZ> for &'a RationalFunctionZ {
    type Output = RationalFunctionZ;
    fn sub(self, rhs: &RationalFunctionZ) -> RationalFunctionZ {
        self + &(-rhs)
    }
}

impl Sub for RationalFunctionZ {
    type Output = RationalFunctionZ;
    fn sub(self, rhs: RationalFunctionZ) -> RationalFunctionZ {
        &self - &rhs
    }
}

#[derive(Serialize, Deserialize)]
struct RfJson {
    num: Vec<[f64; 2]>,
    den: Vec<[f64; 2]>,
}

impl Serialize for RationalFunctionZ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (n, d) = self.to_num_den();
        let pack = |v: Vec<C64>| v.into_iter().map(|x| [x.re, x.im]).collect();
        RfJson { num: pack(n), den: pack(d) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalFunctionZ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RfJson::deserialize(d)?;
        let unpack = |v: Vec<[f64; 2]>| -> Vec<C64> {
            v.into_iter().map(|[a, b]| C64::new(a, b)).collect()
        };
        RationalFunctionZ::from_num_den(&unpack(j.num), &unpack(j.den))
            .map_err(serde::de::Error::custom)
    }
}
