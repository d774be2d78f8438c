//! Determinant fibers of lattice test functions on `S_m = Sym^2`, their zeta integrals,
//! and the functional equation with the Clifford weight `rho`.
//!
//! A test function is a finite sum of terms `w psi(tr(X C)) 1(X in B + L)` with `L` a box
//! lattice `{x_ij in p^{r_ij} O}`. Fibers are counted by enumerating `Y mod p^k` for
//! `X = B + p^r Y`.

use crate::abelian::{ab_factors, beta_factor, UnitCharacter};
use crate::error::{Error, Result};
use crate::fx::{fourier_l, mellin_transform, to_fx, FxFunction, MellinData, PoleClass, Tail};
use crate::matrix::{q_int, RationalMatrix, Q};
use crate::padic::{check_odd_prime, ipow, modinv, root_of_unity, Orientation, UnitGroup};
use crate::quadform::{det_i128, legendre, rational_val_unit, rho_integer_scaled};
use crate::ratfunc::{poly_from_alphas, poly_mul, RationalFunctionZ, Subst};
use crate::C64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

const ZERO: C64 = C64::new(0.0, 0.0);

/// `psi(x)` for rational `x` (`frac_p` of `sign * x`).
pub fn psi_rational(x: &Q, p: i64, orient: Orientation) -> Result<C64> {
    if x.is_zero() {
        return Ok(C64::new(1.0, 0.0));
    }
    let (v, _) = rational_val_unit(x, p, 1)?;
    if v >= 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let k = (-v) as u32;
    if (k as f64) * (p as f64).log2() > 60.0 {
        return Err(Error::Precision(format!("denominator p^{k} too large")));
    }
    let (_, u) = rational_val_unit(x, p, k)?;
    Ok(root_of_unity(orient.sign() * u, ipow(p, k)))
}

fn val(x: &Q, p: i64) -> Option<i32> {
    if x.is_zero() {
        None
    } else {
        Some(rational_val_unit(x, p, 1).expect("nonzero").0)
    }
}

/// Reduction of a p-integral rational mod `p^e`.
fn to_zmod(x: &Q, p: i64, e: u32) -> Result<i64> {
    if x.is_zero() {
        return Ok(0);
    }
    let (v, u) = rational_val_unit(x, p, e)?;
    if v < 0 {
        return Err(Error::Invalid(format!("{x} is not p-integral")));
    }
    if v as u32 >= e {
        return Ok(0);
    }
    Ok(u * ipow(p, v as u32) % ipow(p, e))
}

fn p_pow(p: i64, e: i32) -> Q {
    if e >= 0 {
        q_int(ipow(p, e as u32))
    } else {
        Q::new(1.into(), ipow(p, (-e) as u32).into())
    }
}

fn trace_pairing(x: &RationalMatrix, c: &RationalMatrix) -> Q {
    let m = x.rows();
    let mut s = Q::zero();
    for i in 0..m {
        for j in 0..m {
            s += &x[(i, j)] * &c[(j, i)];
        }
    }
    s
}

/// `w psi(tr(X C)) 1(X - B in L)`, `L = {x_ij in p^{r_ij} O}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeTerm {
    pub weight: C64,
    pub phase: RationalMatrix,
    pub base: RationalMatrix,
    /// row-major exponents `r_ij`, symmetric
    pub scale: Vec<i32>,
}

impl LatticeTerm {
    fn m(&self) -> usize {
        self.base.rows()
    }
    fn r(&self, i: usize, j: usize) -> i32 {
        self.scale[i * self.m() + j]
    }
    /// `log_p vol(L)` is `-sum_{i<=j} r_ij`.
    fn log_volume(&self) -> i32 {
        let m = self.m();
        -(0..m).flat_map(|i| (i..m).map(move |j| (i, j))).map(|(i, j)| self.r(i, j)).sum::<i32>()
    }
}

/// Finite linear combination of lattice terms on `S_m(Q_p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeTestFunction {
    pub m: usize,
    pub p: i64,
    pub terms: Vec<LatticeTerm>,
}

impl LatticeTestFunction {
    /// `1(B + p^r S_m(O))`.
    pub fn indicator(p: i64, base: RationalMatrix, r: i32) -> Result<Self> {
        check_odd_prime(p)?;
        if !base.is_symmetric() {
            return Err(Error::Invalid("base point must be a symmetric matrix".into()));
        }
        let m = base.rows();
        Ok(Self {
            m,
            p,
            terms: vec![LatticeTerm {
                weight: C64::new(1.0, 0.0),
                phase: RationalMatrix::zeros(m, m),
                base,
                scale: vec![r; m * m],
            }],
        })
    }

    /// `1(S_m(O))`.
    pub fn integral(p: i64, m: usize) -> Result<Self> {
        Self::indicator(p, RationalMatrix::zeros(m, m), 0)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut r = self.clone();
        for t in &mut r.terms {
            t.weight *= c;
        }
        r
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.m, self.p) != (other.m, other.p) {
            return Err(Error::Dimension("lattice functions on different spaces".into()));
        }
        let mut r = self.clone();
        r.terms.extend(other.terms.iter().cloned());
        Ok(r)
    }

    pub fn eval(&self, x: &RationalMatrix) -> Result<C64> {
        let p = self.p;
        let mut s = ZERO;
        'terms: for t in &self.terms {
            for i in 0..self.m {
                for j in i..self.m {
                    let d = &x[(i, j)] - &t.base[(i, j)];
                    if let Some(v) = val(&d, p) {
                        if v < t.r(i, j) {
                            continue 'terms;
                        }
                    }
                }
            }
            s += t.weight * psi_rational(&trace_pairing(x, &t.phase), p, Orientation::Psi)?;
        }
        Ok(s)
    }

    /// `X -> Phi(g X g)` for diagonal `g`.
    pub fn act_diagonal(&self, g: &[Q]) -> Result<Self> {
        if g.len() != self.m || g.iter().any(|x| x.is_zero()) {
            return Err(Error::Invalid("g must be an invertible diagonal of size m".into()));
        }
        let gm = RationalMatrix::diag(g);
        let vg: Vec<i32> = g.iter().map(|x| val(x, self.p).unwrap()).collect();
        let mut out = self.clone();
        for t in &mut out.terms {
            let m = t.m();
            let mut base = t.base.clone();
            for i in 0..m {
                for j in 0..m {
                    base[(i, j)] = &t.base[(i, j)] / (&g[i] * &g[j]);
                    t.scale[i * m + j] -= vg[i] + vg[j];
                }
            }
            t.base = base;
            t.phase = &(&gm * &t.phase) * &gm;
        }
        Ok(out)
    }
}

/// Closed-form transform `int Phi(Y) psi(tr(X Y)) dY`, `vol(S_m(O)) = 1`.
pub fn lattice_fourier(phi: &LatticeTestFunction, orient: Orientation) -> Result<LatticeTestFunction> {
    let sg = q_int(orient.sign());
    let mut out = phi.clone();
    for t in &mut out.terms {
        let vol = (phi.p as f64).powi(t.log_volume());
        let c = psi_rational(&trace_pairing(&t.base, &t.phase), phi.p, Orientation::Psi)?;
        let new_phase = t.base.scale(&sg);
        let new_base = -&t.phase.scale(&sg);
        t.weight *= c * vol;
        t.phase = new_phase;
        t.base = new_base;
        for r in &mut t.scale {
            *r = -*r;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberWeight {
    /// `f_Phi`
    Plain,
    /// `f_{rho * Phi-hat}`
    Clifford,
}

#[derive(Debug, Clone, Copy)]
pub struct FiberOptions {
    /// enumeration precision: `Y mod p^k`
    pub k: u32,
    /// unit classes of `det` are resolved mod `p^level`
    pub level: u32,
    pub orient: Orientation,
    pub budget: u128,
    /// fail when the top trusted shell is not predicted by the shells below it
    pub strict: bool,
}

impl FiberOptions {
    pub fn new(k: u32) -> Self {
        Self { k, level: 1, orient: Orientation::Psi, budget: DEFAULT_BUDGET, strict: true }
    }
    pub fn lenient(mut self) -> Self {
        self.strict = false;
        self
    }
    pub fn with_level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }
    pub fn with_orientation(mut self, orient: Orientation) -> Self {
        self.orient = orient;
        self
    }
}

/// One term in integer form: `X = p^sigma D`, `D_ij = mult_ij y_ij + off_ij`.
struct Prepared {
    m: usize,
    p: i64,
    k: u32,
    sigma: i32,
    /// largest `ord det D` kept
    lim: i32,
    mult: Vec<i64>,
    off: Vec<i64>,
    phase_mod: i64,
    phase_coef: Vec<i64>,
    const_phase: C64,
    log_cell_volume: i32,
    weight: C64,
}

fn upper_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect()
}

fn check_budget(p: i64, k: u32, d: usize, budget: u128) -> Result<()> {
    let needed = (p as u128).checked_pow(k * d as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    Ok(())
}

/// Lower bound for `ord(det(D + E) - det D)` over all monomials with an `E` factor.
fn det_resolution(m: usize, floor: &dyn Fn(usize, usize) -> i32, radius: &dyn Fn(usize, usize) -> i32) -> i32 {
    fn perms(m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(m - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, m - 1);
                out.push(q);
            }
        }
        out
    }
    let mut best = i32::MAX;
    for pi in perms(m) {
        for mask in 1u32..(1 << m) {
            let s: i32 = (0..m)
                .map(|i| if mask >> i & 1 == 1 { radius(i, pi[i]) } else { floor(i, pi[i]) })
                .sum();
            best = best.min(s);
        }
    }
    best
}

impl Prepared {
    /// `det D` is constant mod `p^R` on each enumeration cell, so the shell `ord det D = v`
    /// with unit class mod `p^N` is exact for `v <= R - N`; `rho` is trusted one step less.
    fn new(t: &LatticeTerm, p: i64, k: u32, level: u32, rho: bool) -> Result<Self> {
        let m = t.m();
        let pairs = upper_pairs(m);
        let rmin = pairs.iter().map(|&(i, j)| t.r(i, j)).min().unwrap();
        let vb = pairs.iter().filter_map(|&(i, j)| val(&t.base[(i, j)], p)).min();
        let sigma = vb.map_or(rmin, |v| v.min(rmin));
        // entry valuation floor and cell radius, both for D = p^{-sigma} X
        let floor = |i: usize, j: usize| {
            let r = t.r(i, j) - sigma;
            val(&t.base[(i, j)], p).map_or(r, |v| r.min(v - sigma))
        };
        let radius = |i: usize, j: usize| k as i32 + t.r(i, j) - sigma;
        let lim = det_resolution(m, &floor, &radius) - level as i32 - rho as i32;
        let mut mult = Vec::new();
        let mut off = Vec::new();
        for &(i, j) in &pairs {
            let e = t.r(i, j) - sigma;
            let own = (k as i32 + e) as u32;
            if (own as f64) * (p as f64).log2() > 40.0 {
                return Err(Error::Precision(format!("entry precision p^{own} too large")));
            }
            mult.push(ipow(p, e as u32));
            off.push(to_zmod(&(&t.base[(i, j)] * &p_pow(p, -sigma)), p, own)?);
        }
        // psi(tr(X C)) = psi(tr(B C)) psi(sum coef_ij p^{r_ij} y_ij)
        let mut terms = Vec::new();
        let mut e = 0i32;
        for &(i, j) in &pairs {
            let c = &t.phase[(i, j)] * q_int(if i == j { 1 } else { 2 }) * p_pow(p, t.r(i, j));
            if let Some(v) = val(&c, p) {
                e = e.max(-v);
            }
            terms.push(c);
        }
        if e > k as i32 {
            return Err(Error::Precision(format!("phase needs y mod p^{e}, enumerating mod p^{k}")));
        }
        let phase_mod = ipow(p, e as u32);
        let phase_coef = terms
            .iter()
            .map(|c| to_zmod(&(c * q_int(phase_mod)), p, e.max(1) as u32).map(|x| x % phase_mod))
            .collect::<Result<Vec<_>>>()?;
        let const_phase = psi_rational(&trace_pairing(&t.base, &t.phase), p, Orientation::Psi)?;
        Ok(Self {
            m,
            p,
            k,
            sigma,
            lim,
            mult,
            off,
            phase_mod,
            phase_coef,
            const_phase,
            log_cell_volume: t.log_volume() - (k as i32) * pairs.len() as i32,
            weight: t.weight,
        })
    }

    fn d(&self) -> usize {
        self.m * (self.m + 1) / 2
    }
}

/// Exact counts keyed by `(ord det D, dlog of unit part, phase, rho)`.
struct Counts {
    lim: i32,
    phi: usize,
    phase_mod: usize,
    rho_slots: usize,
    data: Vec<u64>,
}

impl Counts {
    fn new(lim: i32, phi: usize, phase_mod: usize, rho: bool) -> Self {
        let rho_slots = if rho { 2 } else { 1 };
        let n = (lim.max(-1) + 1) as usize * phi * phase_mod * rho_slots;
        Self { lim, phi, phase_mod, rho_slots, data: vec![0; n] }
    }
    #[inline]
    fn slot(&self, v: usize, j: usize, ph: usize, rho_neg: bool) -> usize {
        ((v * self.phi + j) * self.phase_mod + ph) * self.rho_slots + rho_neg as usize
    }
    fn merge(mut self, o: Self) -> Self {
        for (a, b) in self.data.iter_mut().zip(o.data) {
            *a += b;
        }
        self
    }
}

struct Ctx<'a> {
    pre: &'a Prepared,
    group: &'a UnitGroup,
    rho: bool,
    leg: Vec<i8>,
    leg_minus_one: i8,
    table: (i64, Vec<u32>),
}

#[inline]
fn val_unit(mut x: i128, p: i128) -> (i32, i128) {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    (v, x)
}

impl Ctx<'_> {
    #[inline]
    fn leg_of(&self, u: i128) -> i8 {
        self.leg[u.rem_euclid(self.pre.p as i128) as usize]
    }

    #[inline]
    fn hilb(&self, v1: i32, l1: i8, v2: i32, l2: i8) -> i8 {
        let mut s = 1;
        if (v1 * v2).rem_euclid(2) == 1 {
            s *= self.leg_minus_one;
        }
        if v2.rem_euclid(2) == 1 {
            s *= l1;
        }
        if v1.rem_euclid(2) == 1 {
            s *= l2;
        }
        s
    }

    /// `rho(p^sigma D)` for `m = 3` from principal minors along `(i, j, rest)`.
    fn rho3(&self, dm: &[i128; 9], det: i128) -> i8 {
        let p = self.pre.p as i128;
        let sg = self.pre.sigma;
        for (i, j) in [(0, 1), (1, 2), (0, 2), (1, 0), (2, 1), (2, 0)] {
            let m1 = dm[i * 3 + i];
            let m2 = m1 * dm[j * 3 + j] - dm[i * 3 + j] * dm[i * 3 + j];
            if m1 == 0 || m2 == 0 {
                continue;
            }
            let (v1, u1) = val_unit(m1, p);
            let (v2, u2) = val_unit(m2, p);
            let (v3, u3) = val_unit(det, p);
            let (l1, l2m, l3m) = (self.leg_of(u1), self.leg_of(u2), self.leg_of(u3));
            let d1 = (v1 + sg, l1);
            let d2 = (v2 - v1 + sg, l2m * l1);
            let d3 = (v3 - v2 + sg, l3m * l2m);
            let eps = self.hilb(d1.0, d1.1, d2.0, d2.1)
                * self.hilb(d1.0, d1.1, d3.0, d3.1)
                * self.hilb(d2.0, d2.1, d3.0, d3.1);
            let vdet = v3 + 3 * sg;
            let tw = if vdet.rem_euclid(2) == 1 { self.leg_minus_one } else { 1 };
            return eps * tw;
        }
        let x: Vec<i64> = dm.iter().map(|&v| v as i64).collect();
        rho_integer_scaled(&x, 3, self.pre.p, sg).expect("nonsingular")
    }

    #[inline]
    fn record(&self, c: &mut Counts, det: i128, ph: i64, rho: impl FnOnce() -> i8) {
        if det == 0 {
            return;
        }
        let p = self.pre.p as i128;
        let (v, u) = val_unit(det, p);
        if v > c.lim {
            return;
        }
        let j = self.group.dlog((u.rem_euclid(self.group.modulus as i128)) as i64).expect("unit");
        let neg = self.rho && rho() < 0;
        let s = c.slot(v as usize, j, ph as usize, neg);
        c.data[s] += 1;
    }
}

fn enumerate(pre: &Prepared, group: &UnitGroup, rho: bool) -> Counts {
    enumerate_with(pre, group, rho, true)
}

fn enumerate_with(pre: &Prepared, group: &UnitGroup, rho: bool, allow_fast: bool) -> Counts {
    let p = pre.p;
    let pk = ipow(p, pre.k);
    let d = pre.d();
    let leg: Vec<i8> = (0..p).map(|u| if u == 0 { 0 } else { legendre(u, p) }).collect();
    let fresh = || Counts::new(pre.lim, group.order, pre.phase_mod as usize, rho);
    if pre.lim < 0 {
        return fresh();
    }
    let table = residue_table(pre, group);
    let ctx = Ctx { pre, group, rho, leg_minus_one: legendre(p - 1, p), leg, table };
    let fast3 = allow_fast
        && pre.m == 3
        && (0..6).all(|t| pre.mult[t].checked_mul(pk).and_then(|x| x.checked_add(pre.off[t])).is_some_and(|x| x < FAST_ENTRY_BOUND));
    let outer = (pk * pk.min(if d > 1 { pk } else { 1 })) as usize;
    let head = if d > 1 { 2 } else { 1 };
    (0..outer)
        .into_par_iter()
        .fold(fresh, |mut c, idx| {
            let mut y = vec![0i64; d];
            y[0] = idx as i64 % pk;
            if head == 2 {
                y[1] = idx as i64 / pk;
            }
            if fast3 {
                enumerate3(&ctx, &mut c, &mut y, pk);
            } else {
                enumerate_generic(&ctx, &mut c, &mut y, head, pk);
            }
            c
        })
        .reduce(fresh, Counts::merge)
}

fn phase_of(pre: &Prepared, y: &[i64]) -> i64 {
    if pre.phase_mod == 1 {
        return 0;
    }
    y.iter().zip(&pre.phase_coef).map(|(a, b)| a * b).sum::<i64>().rem_euclid(pre.phase_mod)
}

fn enumerate_generic(ctx: &Ctx, c: &mut Counts, y: &mut [i64], head: usize, pk: i64) {
    let pre = ctx.pre;
    let m = pre.m;
    let pairs = upper_pairs(m);
    let d = y.len();
    loop {
        let mut dm = vec![0i128; m * m];
        for (t, &(i, j)) in pairs.iter().enumerate() {
            let v = (pre.mult[t] * y[t] + pre.off[t]) as i128;
            dm[i * m + j] = v;
            dm[j * m + i] = v;
        }
        let det = det_i128(&dm, m, m);
        let ph = phase_of(pre, y);
        ctx.record(c, det, ph, || {
            let x: Vec<i64> = dm.iter().map(|&v| v as i64).collect();
            rho_integer_scaled(&x, m, pre.p, pre.sigma).expect("nonsingular")
        });
        // odometer over the free coordinates
        let mut t = head;
        loop {
            if t == d {
                return;
            }
            y[t] += 1;
            if y[t] < pk {
                break;
            }
            y[t] = 0;
            t += 1;
        }
    }
}

/// Slot code of each residue `det mod p^M`: `v * phi + dlog`, or `u32::MAX` when `v > lim`.
fn residue_table(pre: &Prepared, group: &UnitGroup) -> (i64, Vec<u32>) {
    let p = pre.p;
    let pm = ipow(p, (pre.lim + group.level as i32) as u32);
    let tab = (0..pm)
        .map(|x| {
            if x == 0 {
                return u32::MAX;
            }
            let (v, u) = val_unit(x as i128, p as i128);
            if v > pre.lim {
                return u32::MAX;
            }
            let j = group.dlog(u as i64).expect("unit");
            (v as usize * group.order + j) as u32
        })
        .collect();
    (pm, tab)
}

/// Entries stay below this bound so `det` fits in `i64`.
const FAST_ENTRY_BOUND: i64 = 1 << 19;

/// `m = 3`: `det = m2 * D_33 + r` is affine in the last entry; residues go through a table.
fn enumerate3(ctx: &Ctx, c: &mut Counts, y: &mut [i64], pk: i64) {
    let pre = ctx.pre;
    let p = pre.p;
    let ent = |t: usize, v: i64| pre.mult[t] * v + pre.off[t];
    let (pm, tab) = (&ctx.table.0, &ctx.table.1);
    let pm = *pm;
    let phi = ctx.group.order as u32;
    let sg = pre.sigma;
    let (a, b) = (ent(0, y[0]), ent(1, y[1]));
    let ph_mod = pre.phase_mod;
    for y2 in 0..pk {
        let cc = ent(2, y2);
        for y3 in 0..pk {
            let dd = ent(3, y3);
            let m2 = a * dd - b * b;
            // rho prefix from the minors that do not involve D_33
            let m1 = if a != 0 { a } else { dd };
            let fast_rho = ctx.rho && m2 != 0 && m1 != 0;
            let (d1, d2v, l2m, h12) = if fast_rho {
                let (v1, u1) = val_unit(m1 as i128, p as i128);
                let (v2, u2) = val_unit(m2 as i128, p as i128);
                let l1 = ctx.leg_of(u1);
                let l2m = ctx.leg_of(u2);
                let d1 = (v1 + sg, l1);
                let d2 = (v2 - v1 + sg, l2m * l1);
                (d1, (d2, v2), l2m, ctx.hilb(d1.0, d1.1, d2.0, d2.1))
            } else {
                ((0, 1), ((0, 1), 0), 1, 1)
            };
            for y4 in 0..pk {
                let e = ent(4, y4);
                let r = -a * e * e + 2 * b * cc * e - cc * cc * dd;
                y[2] = y2;
                y[3] = y3;
                y[4] = y4;
                let mut ph = if ph_mod == 1 { 0 } else { (0..5).map(|t| y[t] * pre.phase_coef[t]).sum::<i64>().rem_euclid(ph_mod) };
                let ph_step = if ph_mod == 1 { 0 } else { pre.phase_coef[5].rem_euclid(ph_mod) };
                let step = (m2 * pre.mult[5]).rem_euclid(pm);
                let mut cur = (m2 * pre.off[5] + r).rem_euclid(pm);
                for y5 in 0..pk {
                    let code = tab[cur as usize];
                    if code != u32::MAX {
                        let neg = if !ctx.rho {
                            false
                        } else if fast_rho {
                            let v3 = (code / phi) as i32;
                            let l3 = if (code % phi).is_multiple_of(2) { 1 } else { -1 };
                            let ((d2, v2), _) = (d2v, ());
                            let d3 = (v3 - v2 + sg, l3 * l2m);
                            let mut rho = h12 * ctx.hilb(d1.0, d1.1, d3.0, d3.1) * ctx.hilb(d2.0, d2.1, d3.0, d3.1);
                            if (v3 + 3 * sg).rem_euclid(2) == 1 {
                                rho *= ctx.leg_minus_one;
                            }
                            rho < 0
                        } else {
                            let f = ent(5, y5);
                            let det = m2 * f + r;
                            let dm = [a, b, cc, b, dd, e, cc, e, f].map(|x| x as i128);
                            ctx.rho3(&dm, det as i128) < 0
                        };
                        let slot = ((code as usize) * c.phase_mod + ph as usize) * c.rho_slots + neg as usize;
                        c.data[slot] += 1;
                    }
                    cur += step;
                    if cur >= pm {
                        cur -= pm;
                    }
                    if ph_mod != 1 {
                        ph += ph_step;
                        if ph >= ph_mod {
                            ph -= ph_mod;
                        }
                    }
                }
            }
        }
    }
}

/// Exact integer fiber counts of `det` on `Sym^2((Z/p^k)^m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberCountTable {
    pub m: usize,
    pub p: i64,
    pub k: u32,
    /// `(ord det, det / p^ord mod p) -> count`, for `ord det <= k - 1`
    pub counts: BTreeMap<(u32, i64), u64>,
    /// matrices with `det = 0 mod p^k`
    pub singular: u64,
    pub total: u128,
}

pub fn det_fiber_counts(m: usize, p: i64, k: u32) -> Result<FiberCountTable> {
    det_fiber_counts_with_budget(m, p, k, DEFAULT_BUDGET)
}

pub fn det_fiber_counts_with_budget(m: usize, p: i64, k: u32, budget: u128) -> Result<FiberCountTable> {
    check_odd_prime(p)?;
    if m == 0 || k == 0 {
        return Err(Error::Invalid("need m >= 1 and k >= 1".into()));
    }
    let d = m * (m + 1) / 2;
    check_budget(p, k, d, budget)?;
    let phi = LatticeTestFunction::integral(p, m)?;
    let mut pre = Prepared::new(&phi.terms[0], p, k, 1, false)?;
    pre.lim = k as i32 - 1;
    let g = UnitGroup::new(p, 1)?;
    let c = enumerate(&pre, &g, false);
    let mut counts = BTreeMap::new();
    for v in 0..k as usize {
        for j in 0..g.order {
            let n = c.data[c.slot(v, j, 0, false)];
            counts.insert((v as u32, g.elems[j]), n);
        }
    }
    let total = (p as u128).pow(k * d as u32);
    let nonsing: u64 = counts.values().sum();
    Ok(FiberCountTable { m, p, k, counts, singular: (total - nonsing as u128) as u64, total })
}

impl FiberCountTable {
    fn d(&self) -> u32 {
        (self.m * (self.m + 1) / 2) as u32
    }

    /// `f(p^ord u)` for the unit class `u mod p`: `count * q^{ord+1} / p^{k d}`.
    pub fn fiber_value(&self, ord: u32, unit: i64) -> f64 {
        let c = self.counts.get(&(ord, unit.rem_euclid(self.p))).copied().unwrap_or(0);
        c as f64 * (self.p as f64).powi(ord as i32 + 1) / (self.p as f64).powi((self.k * self.d()) as i32)
    }

    /// Mellin coefficient `[z^j] M(f)(z, 1)`.
    pub fn trivial_mellin_coeff(&self, ord: u32) -> f64 {
        let q = self.p as f64;
        let sum: u64 = (1..self.p).map(|u| self.counts.get(&(ord, u)).copied().unwrap_or(0)).sum();
        sum as f64 / q.powi((self.k * self.d()) as i32) * q.powi(ord as i32) / (1.0 - 1.0 / q)
    }

    /// Shells trusted at this `k`.
    pub fn stable_ords(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.k.saturating_sub(2)
    }

    /// Scaled counts `count / p^{k d}` agree on the stable shells of both tables.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let lo = if self.k <= other.k { self } else { other };
        let hi = if self.k <= other.k { other } else { self };
        let shift = (hi.k - lo.k) * hi.d();
        lo.stable_ords().all(|o| {
            (1..lo.p).all(|u| {
                let a = lo.counts.get(&(o, u)).copied().unwrap_or(0) as u128;
                let b = hi.counts.get(&(o, u)).copied().unwrap_or(0) as u128;
                a * (lo.p as u128).pow(shift) == b
            })
        })
    }

    pub fn conservation_holds(&self) -> bool {
        self.counts.values().sum::<u64>() as u128 + self.singular as u128 == self.total
    }

    /// CSV `ord_class,unit_coset,count`; the singular class is `ord_class = k`, `unit_coset = 0`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ord_class,unit_coset,count\n");
        for ((o, u), c) in &self.counts {
            let _ = writeln!(s, "{o},{u},{c}");
        }
        let _ = writeln!(s, "{},0,{}", self.k, self.singular);
        s
    }
}

fn fiber_window(phi: &LatticeTestFunction, rho: bool, opts: &FiberOptions) -> Result<FxFunction> {
    let p = phi.p;
    let d = phi.m * (phi.m + 1) / 2;
    check_budget(p, opts.k, d, opts.budget.saturating_div(phi.terms.len().max(1) as u128))?;
    let group = Arc::new(UnitGroup::new(p, opts.level)?);
    let q = p as f64;
    let mut parts = Vec::new();
    for t in &phi.terms {
        let pre = Prepared::new(t, p, opts.k, opts.level, rho)?;
        let c = enumerate(&pre, &group, rho);
        let j0 = pre.m as i32 * pre.sigma;
        parts.push((pre, c, j0));
    }
    let lo = parts.iter().map(|x| x.2).min().unwrap_or(0);
    let hi = parts.iter().map(|x| x.2 + x.0.lim).min().unwrap_or(-1);
    if hi < lo {
        return Err(Error::Precision(format!("k = {} leaves no trusted shell", opts.k)));
    }
    let phi_n = group.order;
    let mut values = vec![vec![ZERO; phi_n]; (hi - lo + 1) as usize];
    for (pre, c, j0) in &parts {
        let roots: Vec<C64> = (0..pre.phase_mod).map(|r| root_of_unity(r, pre.phase_mod)).collect();
        let base = pre.weight * pre.const_phase * q.powi(pre.log_cell_volume);
        for v in 0..=pre.lim {
            let big_j = j0 + v;
            if big_j > hi {
                break;
            }
            let scale = base * q.powi(big_j + opts.level as i32);
            for j in 0..phi_n {
                let mut acc = ZERO;
                for (ph, &rt) in roots.iter().enumerate() {
                    let pos = c.data[c.slot(v as usize, j, ph, false)] as f64;
                    let neg = if rho { c.data[c.slot(v as usize, j, ph, true)] as f64 } else { 0.0 };
                    acc += rt * (pos - neg);
                }
                values[(big_j - lo) as usize][j] += scale * acc;
            }
        }
    }
    FxFunction::new(group, lo, values, Tail::Compact)
}

/// Tail class of fiber functions for `m = 2n + 1`.
pub fn fiber_class(n: u32, weight: FiberWeight) -> PoleClass {
    match weight {
        FiberWeight::Plain => PoleClass::plus(n, 0).restricted(),
        FiberWeight::Clifford => PoleClass::minus(n, 0).restricted(),
    }
}

/// Mellin data from the trusted window: multiply by the class denominator and keep
/// numerator terms up to the top trusted shell.
fn reconstruct(window: &FxFunction, class: PoleClass, hi: i32) -> MellinData {
    let md = mellin_transform(window);
    let q = window.q();
    let lo = window.k_min();
    let comps = md
        .comps
        .iter()
        .enumerate()
        .map(|(a, r)| {
            if r.is_zero() {
                return RationalFunctionZ::zero();
            }
            let chi = md.character(a);
            let alphas: Vec<C64> = class
                .terms()
                .into_iter()
                .filter(|&t| class.term_allowed(t, &chi))
                .map(|t| class.alpha(t, q))
                .collect();
            let series = r.laurent_coeffs(lo, hi);
            let mut num = poly_mul(&series, &poly_from_alphas(&alphas));
            num.truncate((hi - lo + 1) as usize);
            RationalFunctionZ::from_parts(num, lo, alphas)
        })
        .collect();
    MellinData { group: window.group().clone(), comps, class: Some(class) }
}

/// Result of a fiber computation.
#[derive(Debug, Clone)]
pub struct FiberFunction {
    pub f: FxFunction,
    pub mellin: MellinData,
    /// trusted explicit shells `ord t <= top`
    pub top: i32,
    /// relative error predicting the top shell from the shells below it
    pub holdout: f64,
}

/// `f_Phi` (plain) or `f_{rho Phi-hat}` (Clifford) for odd `m = 2n + 1`.
pub fn fiber_function(phi: &LatticeTestFunction, weight: FiberWeight, opts: &FiberOptions) -> Result<FiberFunction> {
    if phi.m.is_multiple_of(2) {
        return Err(Error::Unsupported("fiber functions for even m".into()));
    }
    let n = ((phi.m - 1) / 2) as u32;
    let (src, rho) = match weight {
        FiberWeight::Plain => (phi.clone(), false),
        FiberWeight::Clifford => (lattice_fourier(phi, opts.orient)?, true),
    };
    let window = fiber_window(&src, rho, opts)?;
    let class = fiber_class(n, weight);
    let hi = window.k_tail() - 1;
    let mellin = reconstruct(&window, class, hi);
    // predict the top shell from the ones below
    let holdout = if hi > window.k_min() {
        let pred = reconstruct(&window, class, hi - 1);
        let scale = window.shells().iter().flatten().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let mut worst: f64 = 0.0;
        for (a, r) in pred.comps.iter().enumerate() {
            let got = mellin.comps[a].laurent_coeff(hi);
            worst = worst.max((r.laurent_coeff(hi) - got).norm() / scale);
        }
        worst
    } else {
        f64::INFINITY
    };
    if opts.strict && holdout > 1e-8 {
        return Err(Error::TailFit(format!(
            "k = {}: top shell {hi} not predicted by the shells below (deviation {holdout:.3e})",
            opts.k
        )));
    }
    let f = to_fx(&mellin, class)?;
    Ok(FiberFunction { f, mellin, top: hi, holdout })
}

/// `Z(s, chi) = (1 - q^{-1}) int f(t) chi(t) |t|^{s + shift + 1} d*t` as a function of `z = q^{-s}`.
pub fn zeta_from_fibers(f: &FiberFunction, chi: &UnitCharacter, shift: f64) -> RationalFunctionZ {
    let q = f.f.q();
    f.mellin
        .component(chi)
        .substitute(Subst::Scale(C64::new(q.powf(-1.0 - shift), 0.0)))
        .scale(C64::new(1.0 - 1.0 / q, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvsFeReport {
    pub max_dev: f64,
    pub samples: usize,
    pub holdout_plain: f64,
    pub holdout_clifford: f64,
}

fn rel_dev(l: C64, r: C64) -> f64 {
    let s = l.norm().max(r.norm());
    if s == 0.0 {
        0.0
    } else {
        (l - r).norm() / s
    }
}

/// Both fiber functions of `Phi`, computed once and shared across characters. The
/// holdout check is skipped: the functional equation is the independent test.
pub fn fe_pvs_fibers(phi: &LatticeTestFunction, opts: &FiberOptions) -> Result<(FiberFunction, FiberFunction)> {
    let opts = opts.lenient();
    Ok((fiber_function(phi, FiberWeight::Plain, &opts)?, fiber_function(phi, FiberWeight::Clifford, &opts)?))
}

/// `chi^{-2n}(2) Z_{rho Phi-hat}(-s - 1/2, chi^{-1})` against `beta(chi_s) Z_Phi(s - n - 1/2, chi)`.
pub fn check_fe_pvs_with(
    fibers: &(FiberFunction, FiberFunction),
    n: u32,
    chi: &UnitCharacter,
    orient: Orientation,
    zs: &[C64],
) -> Result<PvsFeReport> {
    let (fp, fr) = fibers;
    let q = fp.f.q();
    let level = fp.f.level();
    if chi.conductor() > level {
        return Err(Error::Invalid(format!("character conductor {} above fiber level {level}", chi.conductor())));
    }
    let zp = zeta_from_fibers(fp, chi, 0.0).subst_affine(q, 1, -(n as f64 + 0.5));
    let zr = zeta_from_fibers(fr, &chi.inverse(), 0.0).subst_affine(q, -1, -0.5);
    let two = chi.lift(level).value(2).expect("2 is a unit");
    let c2 = two.powi(-2 * n as i32);
    let b = beta_factor(n, chi, orient);
    let max_dev = zs.iter().map(|&z| rel_dev(c2 * zr.eval(z), b.eval(z) * zp.eval(z))).fold(0.0, f64::max);
    Ok(PvsFeReport { max_dev, samples: zs.len(), holdout_plain: fp.holdout, holdout_clifford: fr.holdout })
}

pub fn check_fe_pvs(
    phi: &LatticeTestFunction,
    chi: &UnitCharacter,
    zs: &[C64],
    opts: &FiberOptions,
) -> Result<PvsFeReport> {
    let n = ((phi.m - 1) / 2) as u32;
    let opts = FiberOptions { level: opts.level.max(chi.conductor()).max(1), ..*opts };
    check_fe_pvs_with(&fe_pvs_fibers(phi, &opts)?, n, chi, opts.orient, zs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub max_dev: f64,
    pub samples: usize,
}

/// `Z(s, Phi(g . g), chi) = chi^{-2}(det g) |det g|^{-2s - (m+1)} Z(s, Phi, chi)`, `g` diagonal.
pub fn homogeneity_check(
    phi: &LatticeTestFunction,
    g: &[Q],
    chi: &UnitCharacter,
    zs: &[C64],
    opts: &FiberOptions,
) -> Result<HomogeneityReport> {
    let p = phi.p;
    let q = p as f64;
    let opts = FiberOptions { level: opts.level.max(chi.conductor()).max(1), ..*opts };
    let moved = phi.act_diagonal(g)?;
    let z0 = zeta_from_fibers(&fiber_function(phi, FiberWeight::Plain, &opts)?, chi, 0.0);
    let z1 = zeta_from_fibers(&fiber_function(&moved, FiberWeight::Plain, &opts)?, chi, 0.0);
    let det: Q = g.iter().fold(q_int(1), |a, b| a * b);
    let (v, u) = rational_val_unit(&det, p, opts.level)?;
    let cu = chi.lift(opts.level).value(u).expect("unit").powi(-2);
    let predicted = z0.mul_monomial(-2 * v).scale(cu * q.powi(v * (phi.m as i32 + 1)));
    let max_dev = zs.iter().map(|&z| rel_dev(z1.eval(z), predicted.eval(z))).fold(0.0, f64::max);
    Ok(HomogeneityReport { max_dev, samples: zs.len() })
}

/// `Z_Phi(s, chi) / a_m(s + n + 1, chi)` for `m = 2n + 1`.
pub fn pole_quotient(z: &RationalFunctionZ, chi: &UnitCharacter, m: u32, q: f64) -> Result<RationalFunctionZ> {
    let n = (m - 1) / 2;
    let (a, _) = ab_factors(m, chi);
    z.div(&a.subst_affine(q, 1, (n + 1) as f64))
}

/// The quotient by the shifted `a_m` has no pole terms in its partial fractions.
pub fn poles_contained(z: &RationalFunctionZ, chi: &UnitCharacter, m: u32, q: f64) -> Result<bool> {
    let quot = pole_quotient(z, chi, m, q)?;
    if quot.is_zero() {
        return Ok(true);
    }
    let pf = quot.partial_fractions()?;
    let scale = pf.laurent.iter().chain(pf.poles.iter().flat_map(|t| t.coeffs.iter())).map(|x| x.norm()).fold(0.0, f64::max);
    Ok(pf.poles.iter().flat_map(|t| t.coeffs.iter()).all(|c| c.norm() <= 1e-9 * scale))
}

/// `L(f)(t) = |t|^{n+1} f_{rho Phi-hat}(2^{-2n} t)` for `f = f_Phi |.|^{-2n}`; `fibers` from [`fe_pvs_fibers`].
pub fn fourier_l_pvs(fibers: &(FiberFunction, FiberFunction), n: u32, t: (i32, i64)) -> C64 {
    let fr = &fibers.1.f;
    let p = fr.p();
    let md = fr.group().modulus;
    let four_n = (0..2 * n).fold(1i64, |a, _| a * 2 % md);
    let u = (t.1.rem_euclid(md) as i128 * modinv(four_n, md).unwrap() as i128 % md as i128) as i64;
    (p as f64).powi(-(n as i32 + 1) * t.0) * fr.eval(t.0, u)
}

/// Largest relative deviation between the pvs route and the Mellin route to `L` on shells `k_lo..=k_hi`.
pub fn compare_l_routes(
    fibers: &(FiberFunction, FiberFunction),
    n: u32,
    k_lo: i32,
    k_hi: i32,
    orient: Orientation,
) -> Result<f64> {
    let f = fibers.0.f.mul_abs_power(-4 * n as i32);
    let lf = fourier_l(&f, n, orient)?;
    let g = f.group();
    let mut worst: f64 = 0.0;
    for k in k_lo..=k_hi {
        for &u in g.elements() {
            let a = lf.eval(k, u);
            let b = fourier_l_pvs(fibers, n, (k, u));
            worst = worst.max((a - b).norm() / a.norm().max(b.norm()).max(1e-12));
        }
    }
    Ok(worst)
}

/// `count / p^{k (d-1)}`-style integers are exact; this exposes the raw total for reports.
pub fn enumeration_size(m: usize, p: i64, k: u32) -> u128 {
    (p as u128).pow(k * (m * (m + 1) / 2) as u32)
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::gamma_factor;
    use crate::fx::check_paley_wiener;
    use crate::matrix::q_frac;
    use crate::ratfunc::sample_points;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(rows: &[&[Q]]) -> RationalMatrix {
        RationalMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn phi2(p: i64) -> LatticeTestFunction {
        let b = RationalMatrix::diag(&[q_int(0), q_int(0), q_frac(1, p)]);
        LatticeTestFunction::indicator(p, b, 0).unwrap()
    }

    fn random_lattice(m: usize, p: i64, rng: &mut ChaCha8Rng) -> LatticeTestFunction {
        let mut rand_sym = |lo: i32, hi: i32| {
            let mut x = RationalMatrix::zeros(m, m);
            for i in 0..m {
                for j in i..m {
                    let v = rng.gen_range(lo..=hi);
                    let num = rng.gen_range(0..p);
                    x[(i, j)] = q_int(num) * p_pow(p, v);
                    x[(j, i)] = x[(i, j)].clone();
                }
            }
            x
        };
        let base = rand_sym(-1, 1);
        let phase = rand_sym(-1, 0);
        let mut f = LatticeTestFunction::indicator(p, base, 0).unwrap();
        f.terms[0].phase = phase;
        f.terms[0].weight = C64::new(0.5, -1.5);
        for r in &mut f.terms[0].scale {
            *r = 0;
        }
        let r = rng.gen_range(-1..=1);
        for v in &mut f.terms[0].scale {
            *v = r;
        }
        f
    }

    /// `sum over Y in p^a S(O) / p^b S(O)` of `Phi(Y) psi(tr(XY))` times cell volume.
    fn fourier_oracle(phi: &LatticeTestFunction, x: &RationalMatrix, a: i32, b: i32) -> C64 {
        let m = phi.m;
        let p = phi.p;
        let pairs = upper_pairs(m);
        let side = ipow(p, (b - a) as u32);
        let cells = (side as u64).pow(pairs.len() as u32);
        let vol = (p as f64).powi(-b * pairs.len() as i32);
        let mut s = ZERO;
        for idx in 0..cells {
            let mut rem = idx;
            let mut y = RationalMatrix::zeros(m, m);
            for &(i, j) in &pairs {
                let d = (rem % side as u64) as i64;
                rem /= side as u64;
                y[(i, j)] = q_int(d) * p_pow(p, a);
                y[(j, i)] = y[(i, j)].clone();
            }
            let v = phi.eval(&y).unwrap();
            if v.norm() > 0.0 {
                s += v * psi_rational(&trace_pairing(x, &y), p, Orientation::Psi).unwrap();
            }
        }
        s * vol
    }

    #[test]
    fn psi_rational_values() {
        assert_eq!(psi_rational(&q_int(5), 3, Orientation::Psi).unwrap(), C64::new(1.0, 0.0));
        let w = psi_rational(&q_frac(1, 3), 3, Orientation::Psi).unwrap();
        assert!((w - root_of_unity(1, 3)).norm() < 1e-15);
        let w = psi_rational(&q_frac(7, 9), 3, Orientation::PsiInverse).unwrap();
        assert!((w - root_of_unity(-7, 9)).norm() < 1e-15);
        // non-p denominators are units: 1/2 = 2 mod 3 after the p-part
        let w = psi_rational(&q_frac(1, 6), 3, Orientation::Psi).unwrap();
        assert!((w - root_of_unity(2, 3)).norm() < 1e-15);
    }

    #[test]
    fn lattice_fourier_examples() {
        let f = LatticeTestFunction::integral(3, 3).unwrap();
        let g = lattice_fourier(&f, Orientation::Psi).unwrap();
        let x = sym(&[&[q_int(1), q_int(2), q_int(0)], &[q_int(2), q_int(0), q_int(5)], &[q_int(0), q_int(5), q_int(1)]]);
        assert_eq!(g.eval(&x).unwrap(), f.eval(&x).unwrap());
        let y = RationalMatrix::diag(&[q_frac(1, 3), q_int(0), q_int(0)]);
        assert_eq!(g.eval(&y).unwrap(), ZERO);
        // m = 1, r = 1: p^{-1} 1(p^{-1} O)
        let f = LatticeTestFunction::indicator(3, RationalMatrix::zeros(1, 1), 1).unwrap();
        let g = lattice_fourier(&f, Orientation::Psi).unwrap();
        let at = |x: Q| g.eval(&RationalMatrix::diag(&[x])).unwrap();
        assert!((at(q_frac(2, 3)) - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert_eq!(at(q_frac(1, 9)), ZERO);
    }

    #[test]
    fn lattice_fourier_double_transform_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let m = [1usize, 2, 3][rng.gen_range(0..3)];
            let f = random_lattice(m, 3, &mut rng);
            let back = lattice_fourier(&lattice_fourier(&f, Orientation::Psi).unwrap(), Orientation::PsiInverse).unwrap();
            for (a, b) in f.terms.iter().zip(&back.terms) {
                assert_eq!(a.base, b.base);
                assert_eq!(a.phase, b.phase);
                assert_eq!(a.scale, b.scale);
                assert!((a.weight - b.weight).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lattice_fourier_matches_finite_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..6 {
            let m = [1usize, 2][rng.gen_range(0..2)];
            let f = random_lattice(m, 3, &mut rng);
            let g = lattice_fourier(&f, Orientation::Psi).unwrap();
            for _ in 0..4 {
                let mut x = RationalMatrix::zeros(m, m);
                for i in 0..m {
                    for j in i..m {
                        x[(i, j)] = q_int(rng.gen_range(0..9)) * p_pow(3, rng.gen_range(-2..=0));
                        x[(j, i)] = x[(i, j)].clone();
                    }
                }
                let want = fourier_oracle(&f, &x, -2, 2);
                assert!((g.eval(&x).unwrap() - want).norm() < 1e-10, "{:?}", f);
            }
        }
    }

    #[test]
    fn fiber_counts_m1_and_conservation() {
        let t = det_fiber_counts(1, 3, 2).unwrap();
        assert_eq!(t.counts[&(0, 1)], 3);
        assert_eq!(t.counts[&(0, 2)], 3);
        assert!((t.fiber_value(0, 1) - 1.0).abs() < 1e-15);
        assert!(t.conservation_holds());
        let t3 = det_fiber_counts(3, 3, 2).unwrap();
        assert!(t3.conservation_holds());
        assert_eq!(t3.total, 3u128.pow(12));
        assert!(t3.to_csv().starts_with("ord_class,unit_coset,count\n0,1,"));
    }

    #[test]
    fn fiber_counts_spherical_coefficients() {
        // c_1 / c_0 = 1 and c_0 = 1 - q^{-3}, exactly
        let q = 3u128;
        let t = det_fiber_counts(3, 3, 2).unwrap();
        let s = |o: u32| -> u128 { (1..3).map(|u| t.counts[&(o, u)] as u128).sum() };
        assert_eq!(s(1) * q, s(0));
        // s0 / q^{12} / (1 - 1/q) = 1 - q^{-3}
        assert_eq!(s(0) * q * q * q * q, (q * q * q - 1) * (q - 1) * q.pow(12));
    }

    #[test]
    fn fiber_counts_stabilize() {
        for m in [2usize, 3] {
            let a = det_fiber_counts(m, 3, 1).unwrap();
            let b = det_fiber_counts(m, 3, 2).unwrap();
            assert!(a.agrees_with(&b), "m = {m}");
        }
        let a = det_fiber_counts(2, 3, 2).unwrap();
        let b = det_fiber_counts(2, 3, 3).unwrap();
        assert!(a.agrees_with(&b));
    }

    #[test]
    fn budget_is_enforced() {
        match det_fiber_counts_with_budget(3, 3, 3, 1000) {
            Err(Error::Budget { needed, budget }) => {
                assert_eq!(needed, 3u128.pow(18));
                assert_eq!(budget, 1000);
            }
            other => panic!("{other:?}"),
        }
        let f = LatticeTestFunction::integral(3, 3).unwrap();
        let opts = FiberOptions { budget: 10, ..FiberOptions::new(2) };
        assert!(matches!(fiber_function(&f, FiberWeight::Plain, &opts), Err(Error::Budget { .. })));
    }

    #[test]
    fn fast_enumeration_matches_generic() {
        let g = UnitGroup::new(3, 1).unwrap();
        let f = lattice_fourier(&phi2(3), Orientation::Psi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let extra = random_lattice(3, 3, &mut rng);
        for t in f.terms.iter().chain(extra.terms.iter()) {
            for rho in [false, true] {
                let pre = Prepared::new(t, 3, 2, 1, rho).unwrap();
                let a = enumerate_with(&pre, &g, rho, true);
                let b = enumerate_with(&pre, &g, rho, false);
                assert_eq!(a.data, b.data);
            }
        }
    }

    #[test]
    fn fiber_function_m1_is_indicator() {
        let f = LatticeTestFunction::integral(3, 1).unwrap();
        let ff = fiber_function(&f, FiberWeight::Plain, &FiberOptions::new(3)).unwrap();
        for k in 0..6 {
            for u in [1, 2] {
                assert!((ff.f.eval(k, u) - C64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
        let triv = UnitCharacter::trivial(3, 1).unwrap();
        let want = RationalFunctionZ::geometric(C64::new(1.0, 0.0));
        assert!(ff.mellin.component(&triv).approx_eq(&want, 1e-12));
        // zeta: (1 - q^{-1}) / (1 - q^{-1} z)
        let z = zeta_from_fibers(&ff, &triv, 0.0);
        let want = RationalFunctionZ::geometric(C64::new(1.0 / 3.0, 0.0)).scale(C64::new(2.0 / 3.0, 0.0));
        assert!(z.approx_eq(&want, 1e-12));
    }

    #[test]
    fn fe_n0_reduces_to_tate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let zs = sample_points(8);
        for _ in 0..5 {
            let f = random_lattice(1, 3, &mut rng);
            for chi in UnitCharacter::all(3, 2).unwrap() {
                let opts = FiberOptions::new(6).with_level(2);
                let r = check_fe_pvs(&f, &chi, &zs, &opts).unwrap();
                assert!(r.max_dev < 1e-8, "{:?} chi {} {:?}", f, chi.index(), r);
            }
        }
        // gamma at n = 0 is beta
        let triv = UnitCharacter::trivial(3, 1).unwrap();
        let b = beta_factor(0, &triv, Orientation::Psi);
        let g = gamma_factor(&triv, Orientation::Psi);
        for z in sample_points(4) {
            assert!((b.eval(z) - g.eval(z / 3f64.sqrt())).norm() < 1e-10 * b.eval(z).norm());
        }
    }

    #[test]
    fn fe_n1_at_k2() {
        let zs = sample_points(10);
        let opts = FiberOptions::new(2);
        let phi1 = LatticeTestFunction::integral(3, 3).unwrap();
        let phi3 = LatticeTestFunction::indicator(3, RationalMatrix::zeros(3, 3), 1).unwrap();
        for f in [&phi1, &phi3] {
            let fib = fe_pvs_fibers(f, &opts).unwrap();
            for chi in [UnitCharacter::trivial(3, 1).unwrap(), UnitCharacter::quadratic(3, 1).unwrap()] {
                let r = check_fe_pvs_with(&fib, 1, &chi, Orientation::Psi, &zs).unwrap();
                assert!(r.max_dev < 1e-6, "{r:?}");
            }
        }
    }

    #[test]
    fn fiber_functions_are_in_their_classes() {
        let opts = FiberOptions::new(2).lenient();
        for f in [LatticeTestFunction::integral(3, 3).unwrap(), phi2(3)] {
            for w in [FiberWeight::Plain, FiberWeight::Clifford] {
                let ff = fiber_function(&f, w, &opts).unwrap();
                let md = mellin_transform(&ff.f);
                assert!(check_paley_wiener(&md, &fiber_class(1, w)).ok);
            }
        }
    }

    #[test]
    fn homogeneity_identity_and_dilation() {
        let zs = sample_points(6);
        let opts = FiberOptions::new(2);
        let phi1 = LatticeTestFunction::integral(3, 3).unwrap();
        let triv = UnitCharacter::trivial(3, 1).unwrap();
        let quad = UnitCharacter::quadratic(3, 1).unwrap();
        let one = [q_int(1), q_int(1), q_int(1)];
        assert!(homogeneity_check(&phi1, &one, &triv, &zs, &opts).unwrap().max_dev < 1e-12);
        let p3 = [q_int(3), q_int(3), q_int(3)];
        assert!(homogeneity_check(&phi1, &p3, &triv, &zs, &opts).unwrap().max_dev < 1e-10);
        let g = [q_int(2), q_int(1), q_int(3)];
        assert!(homogeneity_check(&phi1, &g, &quad, &zs, &opts).unwrap().max_dev < 1e-10);
    }

    #[test]
    fn zeta_poles_inside_a_m() {
        let opts = FiberOptions::new(2).lenient();
        for f in [LatticeTestFunction::integral(3, 3).unwrap(), phi2(3)] {
            let ff = fiber_function(&f, FiberWeight::Plain, &opts).unwrap();
            for chi in [UnitCharacter::trivial(3, 1).unwrap(), UnitCharacter::quadratic(3, 1).unwrap()] {
                let z = zeta_from_fibers(&ff, &chi, 0.0);
                assert!(poles_contained(&z, &chi, 3, 3.0).unwrap());
                assert!(pole_quotient(&z, &chi, 3, 3.0).unwrap().is_laurent_polynomial());
            }
        }
    }

    #[test]
    fn l_routes_agree_on_fiber_functions() {
        for (m, n, k) in [(1usize, 0u32, 3u32), (3, 1, 2)] {
            let f = LatticeTestFunction::integral(3, m).unwrap();
            let fib = fe_pvs_fibers(&f, &FiberOptions::new(k)).unwrap();
            assert!(compare_l_routes(&fib, n, -3, 3, Orientation::Psi).unwrap() < 1e-6, "m = {m}");
        }
        // a single trusted shell cannot pin down f_{rho Phi-hat} for phi2; strict mode says so
        let r = fiber_function(&phi2(3), FiberWeight::Clifford, &FiberOptions::new(2));
        assert!(matches!(r, Err(Error::TailFit(_))), "{r:?}");
    }
}

