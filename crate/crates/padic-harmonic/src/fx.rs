//! Functions on `F^x` given by shell data plus asymptotic tails, their Mellin transforms,
//! the operator `L`, the kernel `eta`, and principal-value convolution.

use crate::abelian::{beta_factor, UnitCharacter};
use crate::error::{Error, Result};
use crate::padic::{psi_eval, root_of_unity, totient_pow, Orientation, PadicElement, UnitGroup};
use crate::ratfunc::{poly_from_alphas, RationalFunctionZ, Subst};
use crate::C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

const ZERO: C64 = C64::new(0.0, 0.0);
const POLE_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailKind {
    Plus,
    Minus,
}

/// Pole pattern of a tail class, twisted by `|.|^{shift2/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleClass {
    pub kind: TailKind,
    pub n: u32,
    pub shift2: i32,
    #[serde(default)]
    pub beta_restricted: bool,
}

/// `A0` is `a_0`; `Plus(i)` / `Minus(i)` are `a_{i,+}` / `a_{i,-}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailTerm {
    A0,
    Plus(usize),
    Minus(usize),
}

impl TailTerm {
    fn label(self) -> String {
        match self {
            TailTerm::A0 => "a0".into(),
            TailTerm::Plus(i) => format!("a{i}+"),
            TailTerm::Minus(i) => format!("a{i}-"),
        }
    }
    fn parse(s: &str) -> Option<Self> {
        if s == "a0" {
            return Some(TailTerm::A0);
        }
        let body = s.strip_prefix('a')?;
        let (num, sign) = body.split_at(body.len().checked_sub(1)?);
        let i = num.parse().ok()?;
        match sign {
            "+" => Some(TailTerm::Plus(i)),
            "-" => Some(TailTerm::Minus(i)),
            _ => None,
        }
    }
}

impl PoleClass {
    pub fn plus(n: u32, shift2: i32) -> Self {
        Self { kind: TailKind::Plus, n, shift2, beta_restricted: false }
    }
    pub fn minus(n: u32, shift2: i32) -> Self {
        Self { kind: TailKind::Minus, n, shift2, beta_restricted: false }
    }
    pub fn restricted(mut self) -> Self {
        self.beta_restricted = true;
        self
    }
    pub fn unrestricted(mut self) -> Self {
        self.beta_restricted = false;
        self
    }
    pub fn shifted(mut self, h2: i32) -> Self {
        self.shift2 += h2;
        self
    }

    pub fn terms(&self) -> Vec<TailTerm> {
        let mut t = vec![TailTerm::A0];
        for i in 0..self.n as usize {
            t.push(TailTerm::Plus(i));
            t.push(TailTerm::Minus(i));
        }
        t
    }

    /// Twice the exponent of `|x|` carried by the term.
    pub fn exponent2(&self, t: TailTerm) -> i32 {
        let base = match (self.kind, t) {
            (TailKind::Plus, TailTerm::A0) => 0,
            (TailKind::Plus, TailTerm::Plus(i) | TailTerm::Minus(i)) => 2 * i as i32 + 1,
            (TailKind::Minus, TailTerm::A0) => 2 * self.n as i32,
            (TailKind::Minus, TailTerm::Plus(i) | TailTerm::Minus(i)) => 2 * i as i32,
        };
        base + self.shift2
    }

    /// Term value at `p^k u` is `c(u) alpha^k`.
    pub fn alpha(&self, t: TailTerm, q: f64) -> C64 {
        let sign = if matches!(t, TailTerm::Minus(_)) { -1.0 } else { 1.0 };
        C64::new(sign * q.powf(-self.exponent2(t) as f64 / 2.0), 0.0)
    }

    /// Which terms a character component may carry in the restricted class.
    pub fn term_allowed(&self, t: TailTerm, chi: &UnitCharacter) -> bool {
        if !self.beta_restricted {
            return true;
        }
        match t {
            TailTerm::A0 => chi.is_trivial(),
            _ => chi.is_quadratic_or_trivial(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailExpansion {
    pub class: PoleClass,
    /// `coeffs[term index][unit index]`, terms ordered as `class.terms()`.
    pub coeffs: Vec<Vec<C64>>,
}

impl TailExpansion {
    pub fn zero(class: PoleClass, phi: usize) -> Self {
        let nt = class.terms().len();
        Self { class, coeffs: vec![vec![ZERO; phi]; nt] }
    }
    pub fn coeff(&self, t: TailTerm) -> &[C64] {
        let i = self.class.terms().iter().position(|&x| x == t).expect("term in class");
        &self.coeffs[i]
    }
    pub fn coeff_mut(&mut self, t: TailTerm) -> &mut Vec<C64> {
        let i = self.class.terms().iter().position(|&x| x == t).expect("term in class");
        &mut self.coeffs[i]
    }
    fn eval(&self, k: i32, j: usize, q: f64) -> C64 {
        self.class
            .terms()
            .iter()
            .zip(&self.coeffs)
            .map(|(&t, c)| c[j] * self.class.alpha(t, q).powi(k))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tail {
    Compact,
    Expansion(TailExpansion),
}

/// Function on `F^x`, invariant under `1 + p^N O`: zero below `k_min`, explicit on
/// shells `k_min..k_tail`, tail expansion from `k_tail` on.
#[derive(Debug, Clone)]
pub struct FxFunction {
    group: Arc<UnitGroup>,
    k_min: i32,
    values: Vec<Vec<C64>>,
    tail: Tail,
}

impl PartialEq for FxFunction {
    fn eq(&self, o: &Self) -> bool {
        self.group.p == o.group.p
            && self.group.level == o.group.level
            && self.k_min == o.k_min
            && self.values == o.values
            && self.tail == o.tail
    }
}

fn group(p: i64, level: u32) -> Result<Arc<UnitGroup>> {
    Ok(Arc::new(UnitGroup::new(p, level)?))
}

impl FxFunction {
    /// `values[k - k_min][j]` is the value at `p^k g^j`.
    pub fn new(group: Arc<UnitGroup>, k_min: i32, values: Vec<Vec<C64>>, tail: Tail) -> Result<Self> {
        let phi = group.order;
        if values.iter().any(|v| v.len() != phi) {
            return Err(Error::Dimension(format!("shell rows must have length {phi}")));
        }
        if let Tail::Expansion(t) = &tail {
            if t.coeffs.len() != t.class.terms().len() || t.coeffs.iter().any(|c| c.len() != phi) {
                return Err(Error::Dimension("tail coefficient table shape".into()));
            }
        }
        Ok(Self { group, k_min, values, tail })
    }

    pub fn from_fn(
        p: i64,
        level: u32,
        k_min: i32,
        k_tail: i32,
        f: impl Fn(i32, i64) -> C64,
        tail: Tail,
    ) -> Result<Self> {
        let g = group(p, level)?;
        let values = (k_min..k_tail).map(|k| g.elems.iter().map(|&u| f(k, u)).collect()).collect();
        Self::new(g, k_min, values, tail)
    }

    pub fn zero(p: i64, level: u32) -> Result<Self> {
        Self::new(group(p, level)?, 0, vec![], Tail::Compact)
    }

    /// Indicator of `O^x`.
    pub fn indicator_units(p: i64, level: u32) -> Result<Self> {
        Self::from_fn(p, level, 0, 1, |_, _| C64::new(1.0, 0.0), Tail::Compact)
    }

    /// `phi(p^k) 1_{1 + p^k O}`.
    pub fn one_k(p: i64, k: u32) -> Result<Self> {
        let level = k.max(1);
        let phi = totient_pow(p, level) as f64;
        Self::from_fn(p, level, 0, 1, |_, u| if u == 1 { C64::new(phi, 0.0) } else { ZERO }, Tail::Compact)
    }

    /// Indicator of `O`, tail class `Plus(n)` with shift 0.
    pub fn indicator_integers(p: i64, level: u32, n: u32) -> Result<Self> {
        let g = group(p, level)?;
        let mut t = TailExpansion::zero(PoleClass::plus(n, 0), g.order);
        *t.coeff_mut(TailTerm::A0) = vec![C64::new(1.0, 0.0); g.order];
        Self::new(g, 0, vec![], Tail::Expansion(t))
    }

    /// Random function with window `k_min..k_tail` and optional tail class.
    pub fn random(
        p: i64,
        level: u32,
        k_min: i32,
        k_tail: i32,
        class: Option<PoleClass>,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let g = group(p, level)?;
        let mut rc = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let values = (k_min..k_tail).map(|_| (0..g.order).map(|_| rc()).collect()).collect();
        let tail = match class {
            None => Tail::Compact,
            Some(cl) => {
                let mut t = TailExpansion::zero(cl, g.order);
                let leg: Vec<bool> =
                    g.elems.iter().map(|&u| crate::quadform::legendre(u, p) == 1).collect();
                for (ti, term) in cl.terms().into_iter().enumerate() {
                    if cl.beta_restricted {
                        let (a, b) = (rc(), rc());
                        for j in 0..g.order {
                            t.coeffs[ti][j] = match term {
                                TailTerm::A0 => a,
                                _ => a + if leg[j] { b } else { -b },
                            };
                        }
                    } else {
                        for j in 0..g.order {
                            t.coeffs[ti][j] = rc();
                        }
                    }
                }
                Tail::Expansion(t)
            }
        };
        Self::new(g, k_min, values, tail)
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
    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }
    pub fn k_min(&self) -> i32 {
        self.k_min
    }
    pub fn k_tail(&self) -> i32 {
        self.k_min + self.values.len() as i32
    }
    pub fn tail(&self) -> &Tail {
        &self.tail
    }
    pub fn shells(&self) -> &[Vec<C64>] {
        &self.values
    }

    /// Value at `p^k g^j`.
    pub fn eval_index(&self, k: i32, j: usize) -> C64 {
        if k < self.k_min {
            return ZERO;
        }
        if k < self.k_tail() {
            return self.values[(k - self.k_min) as usize][j];
        }
        match &self.tail {
            Tail::Compact => ZERO,
            Tail::Expansion(t) => t.eval(k, j, self.q()),
        }
    }

    /// Value at `p^k u` for a unit residue `u`.
    pub fn eval(&self, k: i32, u: i64) -> C64 {
        let j = self.group.dlog(u).expect("unit argument");
        self.eval_index(k, j)
    }

    /// `f * |.|^{h2/2}`.
    pub fn mul_abs_power(&self, h2: i32) -> Self {
        let q = self.q();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let k = self.k_min + i as i32;
                let w = q.powf(-(k as f64) * h2 as f64 / 2.0);
                row.iter().map(|&v| v * w).collect()
            })
            .collect();
        let tail = match &self.tail {
            Tail::Compact => Tail::Compact,
            Tail::Expansion(t) => {
                Tail::Expansion(TailExpansion { class: t.class.shifted(h2), coeffs: t.coeffs.clone() })
            }
        };
        Self { group: self.group.clone(), k_min: self.k_min, values, tail }
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut r = self.clone();
        for row in &mut r.values {
            for v in row {
                *v *= c;
            }
        }
        if let Tail::Expansion(t) = &mut r.tail {
            for row in &mut t.coeffs {
                for v in row {
                    *v *= c;
                }
            }
        }
        r
    }

    /// `a f + b g`; tails must share a class (or be compact).
    pub fn combine(a: C64, f: &Self, b: C64, g: &Self) -> Result<Self> {
        if f.p() != g.p() || f.level() != g.level() {
            return Err(Error::Dimension("combine needs equal p and level".into()));
        }
        let tail = match (&f.tail, &g.tail) {
            (Tail::Compact, Tail::Compact) => Tail::Compact,
            (Tail::Expansion(s), Tail::Compact) | (Tail::Compact, Tail::Expansion(s)) => {
                let (ca, cb) = if matches!(f.tail, Tail::Expansion(_)) { (a, ZERO) } else { (ZERO, b) };
                let c = if ca != ZERO { ca } else { cb };
                Tail::Expansion(TailExpansion {
                    class: s.class,
                    coeffs: s.coeffs.iter().map(|r| r.iter().map(|v| v * c).collect()).collect(),
                })
            }
            (Tail::Expansion(s), Tail::Expansion(t)) => {
                if s.class.unrestricted() != t.class.unrestricted() {
                    return Err(Error::PoleClass("combine: tail classes differ".into()));
                }
                Tail::Expansion(TailExpansion {
                    class: s.class,
                    coeffs: s
                        .coeffs
                        .iter()
                        .zip(&t.coeffs)
                        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect())
                        .collect(),
                })
            }
        };
        let lo = f.k_min.min(g.k_min);
        let hi = f.k_tail().max(g.k_tail());
        let phi = f.group.order;
        let values = (lo..hi)
            .map(|k| (0..phi).map(|j| a * f.eval_index(k, j) + b * g.eval_index(k, j)).collect())
            .collect();
        Self::new(f.group.clone(), lo, values, tail)
    }

    /// Max abs difference over shells `lo..=hi` and all cosets.
    pub fn max_diff(&self, other: &Self, lo: i32, hi: i32) -> f64 {
        assert_eq!(self.level(), other.level());
        let mut m: f64 = 0.0;
        for k in lo..=hi {
            for j in 0..self.group.order {
                m = m.max((self.eval_index(k, j) - other.eval_index(k, j)).norm());
            }
        }
        m
    }
}

fn char_table(g: &UnitGroup) -> Vec<Vec<C64>> {
    let phi = g.order as i64;
    (0..phi).map(|a| (0..phi).map(|j| root_of_unity((a * j) % phi, phi)).collect()).collect()
}

/// Per-character rational functions `M(f)(z, chi)` for all `chi` of level `N`.
#[derive(Debug, Clone)]
pub struct MellinData {
    pub group: Arc<UnitGroup>,
    /// indexed by character index `a`
    pub comps: Vec<RationalFunctionZ>,
    pub class: Option<PoleClass>,
}

impl MellinData {
    pub fn character(&self, a: usize) -> UnitCharacter {
        UnitCharacter::new(self.group.clone(), a as i64)
    }
    pub fn component(&self, chi: &UnitCharacter) -> RationalFunctionZ {
        if chi.conductor() > self.group.level {
            return RationalFunctionZ::zero();
        }
        self.comps[chi.lift(self.group.level).index() as usize].clone()
    }
    pub fn q(&self) -> f64 {
        self.group.p as f64
    }
}

pub fn mellin_transform(f: &FxFunction) -> MellinData {
    let g = &f.group;
    let phi = g.order;
    let tab = char_table(g);
    let q = f.q();
    let mut scale: f64 = f.values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if let Tail::Expansion(t) = &f.tail {
        scale = t.coeffs.iter().flatten().map(|v| v.norm()).fold(scale, f64::max);
    }
    // character sums that cancel in exact arithmetic
    let clean = |x: C64| if x.norm() <= 1e-13 * scale { ZERO } else { x };
    let comps = (0..phi)
        .map(|a| {
            let window: Vec<C64> = f
                .values
                .iter()
                .map(|row| clean(row.iter().zip(&tab[a]).map(|(v, c)| v * c).sum::<C64>() / phi as f64))
                .collect();
            let mut r = RationalFunctionZ::laurent_poly(window, f.k_min);
            if let Tail::Expansion(t) = &f.tail {
                let kt = f.k_tail();
                for (term, c) in t.class.terms().into_iter().zip(&t.coeffs) {
                    let chat = clean(c.iter().zip(&tab[a]).map(|(v, x)| v * x).sum::<C64>() / phi as f64);
                    if chat.norm() == 0.0 {
                        continue;
                    }
                    let al = t.class.alpha(term, q);
                    let piece = RationalFunctionZ::from_parts(vec![chat * al.powi(kt)], kt, vec![al]);
                    r = &r + &piece;
                }
            }
            r
        })
        .collect();
    let class = match &f.tail {
        Tail::Compact => None,
        Tail::Expansion(t) => Some(t.class),
    };
    MellinData { group: g.clone(), comps, class }
}

/// `sum_chi [z^k] Z(z, chi) chi(u)^{-1}`.
pub fn mellin_inverse(z: &MellinData, k: i32, u: i64) -> C64 {
    let j = z.group.dlog(u).expect("unit argument");
    let phi = z.group.order as i64;
    z.comps
        .iter()
        .enumerate()
        .map(|(a, r)| r.laurent_coeff(k) * root_of_unity(-(a as i64 * j as i64) % phi, phi))
        .sum()
}

fn match_term(class: &PoleClass, alpha: C64, q: f64) -> Option<TailTerm> {
    class
        .terms()
        .into_iter()
        .find(|&t| (class.alpha(t, q) - alpha).norm() <= POLE_MATCH_TOL * alpha.norm())
}

/// Rebuild shell data and tail coefficients from Mellin data of the given class.
pub fn to_fx(z: &MellinData, class: PoleClass) -> Result<FxFunction> {
    let g = z.group.clone();
    let phi = g.order;
    let q = z.q();
    let terms = class.terms();
    let pfs = z
        .comps
        .iter()
        .map(|r| if r.is_zero() { Ok(None) } else { r.partial_fractions().map(Some) })
        .collect::<Result<Vec<_>>>()?;
    let scale = pfs
        .iter()
        .flatten()
        .flat_map(|pf| pf.laurent.iter().chain(pf.poles.iter().flat_map(|t| t.coeffs.iter())))
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    let negligible = |x: C64| x.norm() <= 1e-12 * scale;
    let mut b = vec![vec![ZERO; phi]; terms.len()];
    let mut lo = i32::MAX;
    let mut hi = i32::MIN;
    let mut any_pole = false;
    for (a, pf) in pfs.iter().enumerate() {
        let Some(pf) = pf else { continue };
        let chi = z.character(a);
        for t in &pf.poles {
            if t.coeffs.iter().all(|&x| negligible(x)) {
                continue;
            }
            if t.multiplicity() > 1 && !negligible(t.coeffs[1]) {
                return Err(Error::PoleClass(format!(
                    "double pole at z = {} for character index {a}",
                    t.location()
                )));
            }
            let term = match_term(&class, t.alpha, q)
                .filter(|&tt| class.term_allowed(tt, &chi))
                .ok_or_else(|| {
                    Error::PoleClass(format!(
                        "pole at z = {} (character index {a}) not in class {:?}",
                        t.location(),
                        class
                    ))
                })?;
            let ti = terms.iter().position(|&x| x == term).unwrap();
            b[ti][a] += t.coeffs[0];
            any_pole = true;
        }
        for (i, &c) in pf.laurent.iter().enumerate() {
            if !negligible(c) {
                let k = pf.laurent_low + i as i32;
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
    }
    if any_pole {
        // pole series start at z^0
        lo = lo.min(0);
        hi = hi.max(-1);
    } else if lo > hi {
        return FxFunction::new(g, 0, vec![], Tail::Compact);
    }
    let values: Vec<Vec<C64>> = (lo..=hi)
        .map(|k| g.elems.iter().map(|&u| mellin_inverse(z, k, u)).collect())
        .collect();
    let tail = if any_pole {
        let tab = char_table(&g);
        let coeffs = b
            .iter()
            .map(|bt| {
                (0..phi)
                    .map(|j| (0..phi).map(|a| bt[a] * tab[a][j].conj()).sum::<C64>())
                    .collect()
            })
            .collect();
        Tail::Expansion(TailExpansion { class, coeffs })
    } else {
        Tail::Compact
    };
    FxFunction::new(g, lo, values, tail)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PwReport {
    pub ok: bool,
    pub witness: Option<String>,
}

/// Divide each component by the allowed L-product of the class; pass iff nothing but a
/// Laurent polynomial remains.
pub fn check_paley_wiener(z: &MellinData, class: &PoleClass) -> PwReport {
    let q = z.q();
    for (a, r) in z.comps.iter().enumerate() {
        if r.is_zero() {
            continue;
        }
        let chi = z.character(a);
        let alphas: Vec<C64> = class
            .terms()
            .into_iter()
            .filter(|&t| class.term_allowed(t, &chi))
            .map(|t| class.alpha(t, q))
            .collect();
        let prod = r * &RationalFunctionZ::laurent_poly(poly_from_alphas(&alphas), 0);
        if !prod.is_laurent_polynomial() {
            let left = prod.pole_alphas()[0];
            let reason = match match_term(class, left, q) {
                Some(t) if !class.term_allowed(t, &chi) => format!(
                    "coefficient {} nonzero at character index {a} (conductor {}), excluded in the beta-restricted class",
                    t.label(),
                    chi.conductor()
                ),
                Some(t) => format!("pole for {} at z = {} has multiplicity > 1", t.label(), 1.0 / left),
                None => format!("pole at z = {} (alpha = {left}) for character index {a} not allowed", 1.0 / left),
            };
            return PwReport { ok: false, witness: Some(reason) };
        }
    }
    PwReport { ok: true, witness: None }
}

/// Mellin data of `L(f) |.|^{-(2n+1)/2}`:
/// component `chi` is `beta(chi_s^{-1}) M(f |.|^{(2n+1)/2})(z^{-1}, chi^{-1})`.
pub fn fourier_l_mellin(f: &FxFunction, n: u32, orient: Orientation) -> Result<MellinData> {
    if let Tail::Expansion(t) = &f.tail {
        let want = PoleClass::plus(n, -4 * n as i32);
        if t.class.unrestricted() != want {
            return Err(Error::PoleClass(format!(
                "input tail class {:?} is not |.|^(-2n) S+_n (need {:?})",
                t.class, want
            )));
        }
    }
    let m = mellin_transform(f);
    if f.tail != Tail::Compact {
        let pw = check_paley_wiener(&m, &PoleClass::plus(n, -4 * n as i32).restricted());
        if !pw.ok {
            return Err(Error::PoleClass(pw.witness.unwrap_or_default()));
        }
    }
    let q = f.q();
    let c = (2 * n + 1) as f64 / 2.0;
    let phi = f.group.order as i64;
    let comps = (0..phi)
        .map(|a| {
            let chi = UnitCharacter::new(f.group.clone(), a);
            let fm = &m.comps[(-a).rem_euclid(phi) as usize];
            if fm.is_zero() {
                return RationalFunctionZ::zero();
            }
            let finv = fm.substitute(Subst::Scale(C64::new(q.powf(-c), 0.0))).substitute(Subst::Invert);
            let b = beta_factor(n, &chi.inverse(), orient).substitute(Subst::Invert);
            &b * &finv
        })
        .collect();
    Ok(MellinData { group: f.group.clone(), comps, class: Some(PoleClass::minus(n, 1).restricted()) })
}

/// `L(f)` via the Mellin route; input must lie in `|.|^{-2n} S+_{n,beta}`.
pub fn fourier_l(f: &FxFunction, n: u32, orient: Orientation) -> Result<FxFunction> {
    let md = fourier_l_mellin(f, n, orient)?;
    Ok(to_fx(&md, PoleClass::minus(n, 1).restricted())?.mul_abs_power(2 * n as i32 + 1))
}

/// Additive Fourier transform `fhat(t) = int f(x) psi(x t) dx` at `t = p^{k_t} u_t`.
/// Tails must decay fast enough for the integral to converge (`|alpha| < q`).
pub fn fourier_gl1(f: &FxFunction, t: (i32, i64), orient: Orientation) -> Result<C64> {
    let p = f.p();
    let q = f.q();
    let (kt, ut) = t;
    // from k0 on psi(x t) = 1
    let k0 = f.k_tail().max(-kt).max(f.k_min);
    let mut s = ZERO;
    for k in f.k_min..k0 {
        let m = f.level().max((-(k + kt)).max(1) as u32);
        let g = UnitGroup::new(p, m)?;
        let mut inner = ZERO;
        for &y in &g.elems {
            let x = PadicElement::new(p, k + kt, y * ut % g.modulus, m)?;
            inner += f.eval(k, y) * psi_eval(&x, orient)?;
        }
        s += inner / g.modulus as f64 * q.powi(-k);
    }
    let vol = 1.0 - 1.0 / q;
    for k in k0..f.k_tail() {
        let avg: C64 = f.values[(k - f.k_min) as usize].iter().sum::<C64>() / f.group.order as f64;
        s += avg * vol * q.powi(-k);
    }
    if let Tail::Expansion(t) = &f.tail {
        for (term, c) in t.class.terms().into_iter().zip(&t.coeffs) {
            let avg: C64 = c.iter().sum::<C64>() / f.group.order as f64;
            if avg.norm() == 0.0 {
                continue;
            }
            let r = t.class.alpha(term, q) / q;
            if r.norm() >= 1.0 {
                return Err(Error::PoleClass(format!("tail term {} not integrable", term.label())));
            }
            s += avg * vol * r.powi(k0) / (1.0 - r);
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeReport {
    pub max_dev: f64,
    pub samples: usize,
}

/// Compare `M(L(f)|.|^{-(2n+1)/2})(z^{-1}, chi^{-1})` with `beta(chi_s) M(f|.|^{(2n+1)/2})(z, chi)`.
pub fn check_fe_gl1(
    f: &FxFunction,
    n: u32,
    chi: &UnitCharacter,
    orient: Orientation,
    zs: &[C64],
) -> Result<FeReport> {
    let h = 2 * n as i32 + 1;
    let lf = fourier_l(f, n, orient)?;
    let lhs_m = mellin_transform(&lf.mul_abs_power(-h));
    let rhs_m = mellin_transform(&f.mul_abs_power(h));
    let b = beta_factor(n, chi, orient);
    let lhs = lhs_m.component(&chi.inverse());
    let rhs = rhs_m.component(chi);
    let mut dev: f64 = 0.0;
    for &z in zs {
        let l = lhs.eval(1.0 / z);
        let r = b.eval(z) * rhs.eval(z);
        dev = dev.max((l - r).norm() / r.norm().max(l.norm()).max(1e-300));
        if l.norm() == 0.0 && r.norm() == 0.0 {
            dev = dev.max(0.0);
        }
    }
    if lhs.is_zero() && rhs.is_zero() {
        dev = 0.0;
    }
    Ok(FeReport { max_dev: dev, samples: zs.len() })
}

/// A function on shells that can be sampled at any level.
pub trait ShellKernel {
    /// Smallest level at which shell `k` is determined.
    fn level_for(&self, k: i32) -> u32;
    /// Values at `p^k g^j` for the unit group of the given level.
    fn shell(&self, k: i32, level: u32) -> Result<Vec<C64>>;
}

type BetaTable = Arc<(Arc<UnitGroup>, Vec<RationalFunctionZ>)>;
type ShellCache = HashMap<(i32, u32), Arc<Vec<C64>>>;

/// `eta_{pvs,psi}`, cached per level.
pub struct EtaKernel {
    pub p: i64,
    pub n: u32,
    pub orient: Orientation,
    pub max_level: u32,
    /// extra factor `|x|^{weight2/2}`
    pub weight2: i32,
    betas: Mutex<HashMap<u32, BetaTable>>,
    shells: Mutex<ShellCache>,
}

impl EtaKernel {
    pub fn new(p: i64, n: u32, orient: Orientation) -> Result<Self> {
        crate::padic::check_odd_prime(p)?;
        Ok(Self {
            p,
            n,
            orient,
            max_level: 7,
            weight2: 0,
            betas: Mutex::new(HashMap::new()),
            shells: Mutex::new(HashMap::new()),
        })
    }

    /// Same kernel times `|x|^{weight2/2}`.
    pub fn weighted(p: i64, n: u32, orient: Orientation, weight2: i32) -> Result<Self> {
        let mut e = Self::new(p, n, orient)?;
        e.weight2 = weight2;
        Ok(e)
    }

    fn betas(&self, level: u32) -> Result<BetaTable> {
        if let Some(b) = self.betas.lock().unwrap().get(&level) {
            return Ok(b.clone());
        }
        let g = Arc::new(UnitGroup::new(self.p, level)?);
        let v = (0..g.order as i64)
            .map(|a| {
                let chi = UnitCharacter::new(g.clone(), a);
                beta_factor(self.n, &chi.inverse(), self.orient).substitute(Subst::Invert)
            })
            .collect();
        let r = Arc::new((g, v));
        self.betas.lock().unwrap().insert(level, r.clone());
        Ok(r)
    }

    /// `eta(p^k g^j)` from characters of level exactly `level`, no stabilization check.
    pub fn shell_raw(&self, k: i32, level: u32) -> Result<Arc<Vec<C64>>> {
        if let Some(s) = self.shells.lock().unwrap().get(&(k, level)) {
            return Ok(s.clone());
        }
        let b = self.betas(level)?;
        let (g, comps) = (&b.0, &b.1);
        let phi = g.order as i64;
        let coeffs: Vec<C64> = comps.iter().map(|r| r.laurent_coeff(k)).collect();
        let w = (self.p as f64).powf(-(k as f64) * self.weight2 as f64 / 2.0);
        let vals: Vec<C64> = (0..phi)
            .map(|j| {
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() > 0.0)
                    .map(|(a, &c)| c * root_of_unity(-(a as i64 * j) % phi, phi))
                    .sum::<C64>()
                    * w
            })
            .collect();
        let r = Arc::new(vals);
        self.shells.lock().unwrap().insert((k, level), r.clone());
        Ok(r)
    }

    /// Value at `p^k u`.
    pub fn eval(&self, k: i32, u: i64) -> Result<C64> {
        let l = self.level_for(k);
        let s = self.shell(k, l)?;
        let g = self.betas(l)?.0.clone();
        Ok(s[g.dlog(u).ok_or_else(|| Error::Invalid("non-unit argument".into()))?])
    }
}

impl ShellKernel for EtaKernel {
    fn level_for(&self, k: i32) -> u32 {
        let m = 2 * self.n as i32 + 1;
        let need = if k < 0 { (-k + m - 1) / m } else { 0 };
        need.max(1) as u32
    }

    /// Checked against the next level: the character sum must already be complete.
    fn shell(&self, k: i32, level: u32) -> Result<Vec<C64>> {
        let l = level.max(self.level_for(k));
        if l + 1 > self.max_level {
            return Err(Error::NoStabilization(format!("eta shell {k} needs level > {}", self.max_level)));
        }
        let a = self.shell_raw(k, l)?;
        let b = self.shell_raw(k, l + 1)?;
        let gb = self.betas(l + 1)?.0.clone();
        let ga = self.betas(l)?.0.clone();
        let scale = a.iter().map(|x| x.norm()).fold(1e-300, f64::max);
        for (jb, &u) in gb.elems.iter().enumerate() {
            let ja = ga.dlog(u).unwrap();
            if (b[jb] - a[ja]).norm() > 1e-9 * scale.max(1.0) {
                return Err(Error::NoStabilization(format!(
                    "eta shell {k}: character sum at level {l} differs from level {}",
                    l + 1
                )));
            }
        }
        Ok((*a).clone())
    }
}

/// Kernel given by a closure on `(k, u)`, determined at a fixed level.
pub struct FnKernel<F: Fn(i32, i64) -> C64> {
    pub p: i64,
    pub level: u32,
    pub f: F,
}

impl<F: Fn(i32, i64) -> C64> ShellKernel for FnKernel<F> {
    fn level_for(&self, _k: i32) -> u32 {
        self.level
    }
    fn shell(&self, k: i32, level: u32) -> Result<Vec<C64>> {
        let g = UnitGroup::new(self.p, level.max(self.level))?;
        Ok(g.elems.iter().map(|&u| (self.f)(k, u)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvResult {
    pub value: C64,
    /// truncation `K` (shells `|ord x| <= K`) at which three consecutive sums agreed
    pub stable_at: i32,
    pub trace: Vec<C64>,
}

/// Partial sums `S_K = int_{q^{-K} <= |x| <= q^K} kernel(x) f(x / t) d*x` for `K = 0..=k_max`,
/// with `t = p^{k_t} u_t`.
pub fn pv_partial_sums(
    kernel: &dyn ShellKernel,
    f: &FxFunction,
    t: (i32, i64),
    k_max: i32,
) -> Result<Vec<C64>> {
    let p = f.p();
    let (kt, ut) = t;
    let shell_term = |j: i32| -> Result<C64> {
        if j - kt < f.k_min || (j - kt >= f.k_tail() && f.tail == Tail::Compact) {
            return Ok(ZERO);
        }
        let l = kernel.level_for(j).max(f.level()).max(1);
        let g = UnitGroup::new(p, l)?;
        let ker = kernel.shell(j, l)?;
        let m = g.modulus;
        let ut_inv = crate::padic::modinv(ut.rem_euclid(m), m)
            .ok_or_else(|| Error::Invalid("t must have a unit angular component".into()))?;
        let s: C64 = g
            .elems
            .iter()
            .zip(ker.iter())
            .map(|(&u, &kv)| if kv.norm() == 0.0 { ZERO } else { kv * f.eval(j - kt, u * ut_inv % m) })
            .sum();
        Ok(s / g.order as f64)
    };
    let mut trace = vec![shell_term(0)?];
    for k in 1..=k_max {
        let prev = *trace.last().unwrap();
        trace.push(prev + shell_term(k)? + shell_term(-k)?);
    }
    Ok(trace)
}

/// Principal value: the first `K` at which `S_{K-2}, S_{K-1}, S_K` agree within `tol`
/// (relative to `max(1, |S_K|)`), once `K` covers the explicit window of `f`.
pub fn pv_convolve(
    kernel: &dyn ShellKernel,
    f: &FxFunction,
    t: (i32, i64),
    k_max: i32,
    tol: f64,
) -> Result<PvResult> {
    let cover = t.0.abs() + f.k_min.abs().max(f.k_tail().abs());
    let mut trace: Vec<C64> = Vec::new();
    // grow in chunks so cheap cases stop early
    let mut done = -1;
    while done < k_max {
        let upto = (done + 8).min(k_max);
        trace = pv_partial_sums(kernel, f, t, upto)?;
        for k in (done + 1).max(cover.max(2))..=upto {
            let ku = k as usize;
            let (a, b, c) = (trace[ku - 2], trace[ku - 1], trace[ku]);
            let sc = c.norm().max(1.0);
            if (a - c).norm() <= tol * sc && (b - c).norm() <= tol * sc {
                trace.truncate(ku + 1);
                return Ok(PvResult { value: c, stable_at: k, trace });
            }
        }
        done = upto;
    }
    Err(Error::NoStabilization(format!(
        "principal value not stable by K = {k_max}; partial sums: {:?}",
        trace.iter().map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im)).collect::<Vec<_>>()
    )))
}

pub fn default_k_max(level: u32, n: u32) -> i32 {
    4 * (level as i32 + n as i32 + 1)
}

/// Direct pairing `sum_{|k| <= K} z^{-k} (1/phi) sum_u eta(p^k u) chi^{-1}(u)`, which should
/// reproduce `beta(chi_s)` where the series converges.
///
/// Negative shells are summed down to the deepest one the kernel can resolve within
/// `max_level`; the pairing vanishes identically below `-(e(chi) + 2n e(chi^2))`.
pub fn eta_pairing(eta: &EtaKernel, chi: &UnitCharacter, z: C64, trunc: i32) -> Result<C64> {
    let m = 2 * eta.n as i32 + 1;
    let deepest = (m * (eta.max_level as i32 - 2)).min(trunc);
    let mut s = ZERO;
    for k in -deepest..=trunc {
        let l = eta.level_for(k).max(chi.level());
        let vals = eta.shell(k, l)?;
        let c = chi.lift(l);
        let inner: C64 = (0..c.group().order)
            .map(|j| vals[j] * c.value_at_log(j).conj())
            .sum::<C64>()
            / c.group().order as f64;
        s += inner * z.powi(-k);
    }
    Ok(s)
}

/// Least-squares fit of tail coefficients from shells `(k, values by unit index)`.
pub fn fit_tail(
    p: i64,
    level: u32,
    shells: &[(i32, Vec<C64>)],
    class: PoleClass,
) -> Result<TailExpansion> {
    let terms = class.terms();
    let nt = terms.len();
    if shells.len() < nt {
        return Err(Error::TailFit(format!("need {nt} shells, have {}", shells.len())));
    }
    let g = UnitGroup::new(p, level)?;
    let q = p as f64;
    let mut t = TailExpansion::zero(class, g.order);
    let mut worst: f64 = 0.0;
    for j in 0..g.order {
        // normal equations A^H A c = A^H y
        let rows: Vec<Vec<C64>> =
            shells.iter().map(|(k, _)| terms.iter().map(|&tt| class.alpha(tt, q).powi(*k)).collect()).collect();
        let y: Vec<C64> = shells.iter().map(|(_, v)| v[j]).collect();
        let mut ata = vec![vec![ZERO; nt]; nt];
        let mut aty = vec![ZERO; nt];
        for (r, &yv) in rows.iter().zip(&y) {
            for a in 0..nt {
                aty[a] += r[a].conj() * yv;
                for b in 0..nt {
                    ata[a][b] += r[a].conj() * r[b];
                }
            }
        }
        let c = solve(ata, aty).ok_or_else(|| Error::TailFit("singular tail system".into()))?;
        for (r, &yv) in rows.iter().zip(&y) {
            let pred: C64 = r.iter().zip(&c).map(|(a, b)| a * b).sum();
            worst = worst.max((pred - yv).norm() / yv.norm().max(1.0));
        }
        for a in 0..nt {
            t.coeffs[a][j] = c[a];
        }
    }
    if worst > 1e-8 {
        return Err(Error::TailFit(format!("residual {worst:.3e} exceeds 1e-8")));
    }
    Ok(t)
}

fn solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Option<Vec<C64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm()))?;
        if a[piv][c].norm() < 1e-300 {
            return None;
        }
        a.swap(piv, c);
        b.swap(piv, c);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    let t = a[c][k];
                    a[r][k] -= f * t;
                }
                let t = b[c];
                b[r] -= f * t;
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

#[derive(Serialize, Deserialize)]
struct ShellJson {
    k: i32,
    coset: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct TailCoeffJson {
    term: String,
    coset: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum TailJson {
    Compact,
    Plus { n: u32, shift2: i32, coeffs: Vec<TailCoeffJson> },
    Minus { n: u32, shift2: i32, coeffs: Vec<TailCoeffJson> },
}

#[derive(Serialize, Deserialize)]
struct FxJson {
    p: i64,
    level: u32,
    k_min: i32,
    k_tail: i32,
    shells: Vec<ShellJson>,
    tail: TailJson,
}

impl Serialize for FxFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut shells = vec![];
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                shells.push(ShellJson { k: self.k_min + i as i32, coset: self.group.elems[j], re: v.re, im: v.im });
            }
        }
        let tail = match &self.tail {
            Tail::Compact => TailJson::Compact,
            Tail::Expansion(t) => {
                let mut coeffs = vec![];
                for (term, row) in t.class.terms().into_iter().zip(&t.coeffs) {
                    for (j, v) in row.iter().enumerate() {
                        coeffs.push(TailCoeffJson {
                            term: term.label(),
                            coset: self.group.elems[j],
                            re: v.re,
                            im: v.im,
                        });
                    }
                }
                match t.class.kind {
                    TailKind::Plus => TailJson::Plus { n: t.class.n, shift2: t.class.shift2, coeffs },
                    TailKind::Minus => TailJson::Minus { n: t.class.n, shift2: t.class.shift2, coeffs },
                }
            }
        };
        FxJson { p: self.p(), level: self.level(), k_min: self.k_min, k_tail: self.k_tail(), shells, tail }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FxFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = FxJson::deserialize(d)?;
        let g = group(j.p, j.level).map_err(D::Error::custom)?;
        if j.k_tail < j.k_min {
            return Err(D::Error::custom("k_tail < k_min"));
        }
        let mut values = vec![vec![ZERO; g.order]; (j.k_tail - j.k_min) as usize];
        for s in j.shells {
            if s.k < j.k_min || s.k >= j.k_tail {
                return Err(D::Error::custom(format!("shell {} outside window", s.k)));
            }
            let idx = g.dlog(s.coset).ok_or_else(|| D::Error::custom("coset not a unit"))?;
            values[(s.k - j.k_min) as usize][idx] = C64::new(s.re, s.im);
        }
        let tail = match j.tail {
            TailJson::Compact => Tail::Compact,
            TailJson::Plus { n, shift2, coeffs } => {
                tail_from_json(PoleClass::plus(n, shift2), coeffs, &g).map_err(D::Error::custom)?
            }
            TailJson::Minus { n, shift2, coeffs } => {
                tail_from_json(PoleClass::minus(n, shift2), coeffs, &g).map_err(D::Error::custom)?
            }
        };
        FxFunction::new(g, j.k_min, values, tail).map_err(D::Error::custom)
    }
}

fn tail_from_json(
    class: PoleClass,
    coeffs: Vec<TailCoeffJson>,
    g: &UnitGroup,
) -> std::result::Result<Tail, String> {
    let mut t = TailExpansion::zero(class, g.order);
    let terms = class.terms();
    for c in coeffs {
        let term = TailTerm::parse(&c.term).ok_or_else(|| format!("bad term {}", c.term))?;
        let ti = terms.iter().position(|&x| x == term).ok_or_else(|| format!("term {} outside class", c.term))?;
        let j = g.dlog(c.coset).ok_or("coset not a unit")?;
        t.coeffs[ti][j] = C64::new(c.re, c.im);
    }
    Ok(Tail::Expansion(t))
}
