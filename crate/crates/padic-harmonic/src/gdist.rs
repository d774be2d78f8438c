//! The invariant distribution on `G = GL1 x Sp(2n)`: pointwise values, the full
//! Fourier operator at `n = 0`, and the shell decomposition against `chi_s`.

use crate::abelian::{gamma_factor, UnitCharacter};
use crate::error::{Error, Result};
use crate::fx::{pv_convolve, EtaKernel, FxFunction, PoleClass, ShellKernel, Tail, TailExpansion, TailTerm};
use crate::matrix::RationalMatrix;
use crate::padic::{Orientation, PadicElement};
use crate::symplectic::{c0_zeta, is_symplectic};
use crate::C64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

const ZERO: C64 = C64::new(0.0, 0.0);

/// A point `(a, h)` of `G(F)`; `h` is `2n x 2n` symplectic (empty for `n = 0`).
#[derive(Clone, Debug)]
pub struct GPoint {
    pub a: PadicElement,
    pub h: RationalMatrix,
}

impl GPoint {
    pub fn new(a: PadicElement, h: RationalMatrix) -> Result<Self> {
        if !h.rows().is_multiple_of(2) || !h.is_square() {
            return Err(Error::Dimension("h must be 2n x 2n".into()));
        }
        if !is_symplectic(&h, h.rows() / 2)? {
            return Err(Error::NotSymplectic);
        }
        Ok(Self { a, h })
    }

    pub fn n(&self) -> u32 {
        (self.h.rows() / 2) as u32
    }
}

/// `c0 * eta(a det(h + I)) * |det(h + I)|^{-(2n+1)/2}`.
pub fn phi_rho_eval(g: &GPoint, eta: &EtaKernel) -> Result<C64> {
    let n = g.n();
    if eta.n != n {
        return Err(Error::Invalid(format!("kernel is for n = {}, point has n = {n}", eta.n)));
    }
    let p = g.a.p;
    let k = g.h.rows();
    let d = (&g.h + &RationalMatrix::identity(k)).det()?;
    if d.is_zero() {
        return Err(Error::SingularLocus);
    }
    let d = PadicElement::from_bigratio(p, &d, g.a.level)?;
    let x = g.a.mul(&d);
    let need = eta.level_for(x.valuation);
    if x.level < need {
        return Err(Error::Precision(format!(
            "eta at ord {} needs the argument mod p^{need}, have p^{}",
            x.valuation, x.level
        )));
    }
    let c0 = c0_zeta(n as usize, p as u64).to_f64().unwrap();
    let q = p as f64;
    Ok(c0 * eta.eval(x.valuation, x.unit)? * q.powf(d.valuation as f64 * (2 * n + 1) as f64 / 2.0))
}

/// `F(phi)(a) = (Phi * phi^vee)(a) = pv int eta(x) phi(x / a) d*x` at `n = 0`.
pub fn fourier_n0_at(f: &FxFunction, a: (i32, i64), orient: Orientation, k_max: i32, tol: f64) -> Result<C64> {
    let eta = EtaKernel::new(f.p(), 0, orient)?;
    Ok(pv_convolve(&eta, f, a, k_max, tol)?.value)
}

/// `F(phi)` for compactly supported `phi` as an `FxFunction`: explicit window from the
/// pv convolution, then the exact tail `c |a|^{1/2}` once `a supp(phi)` lies in `O`.
pub fn fourier_n0(phi: &FxFunction, orient: Orientation, k_max: i32) -> Result<FxFunction> {
    if *phi.tail() != Tail::Compact {
        return Err(Error::Invalid("fourier_n0 needs compact support".into()));
    }
    let p = phi.p();
    let q = phi.q();
    let g = phi.group().clone();
    let nlev = g.level as i32;
    if phi.shells().is_empty() {
        return FxFunction::new(g, 0, vec![], Tail::Compact);
    }
    let lo = -(phi.k_tail() - 1) - nlev;
    let hi = -phi.k_min();
    let eta = EtaKernel::new(p, 0, orient)?;
    let values: Vec<Vec<C64>> = (lo..hi)
        .map(|k| {
            g.elems
                .iter()
                .map(|&u| Ok(pv_convolve(&eta, phi, (k, u), k_max, 1e-13)?.value))
                .collect::<Result<Vec<C64>>>()
        })
        .collect::<Result<_>>()?;
    // int phi(y) |y|^{-1/2} dy
    let c: C64 = (phi.k_min()..phi.k_tail())
        .map(|k| phi.shells()[(k - phi.k_min()) as usize].iter().sum::<C64>() / g.order as f64 * q.powf(-k as f64 / 2.0))
        .sum::<C64>()
        * (1.0 - 1.0 / q);
    let mut t = TailExpansion::zero(PoleClass::plus(0, 1), g.order);
    *t.coeff_mut(TailTerm::A0) = vec![c; g.order];
    FxFunction::new(g, lo, values, Tail::Expansion(t))
}

/// `sum_{|k| <= k_trunc} sum_u |f(p^k u)|^2 / phi(p^N)`, the truncated `L^2(F^x, d*x)` norm squared.
pub fn l2_norm_sq(f: &FxFunction, k_trunc: i32) -> f64 {
    let phi = f.group().order;
    (-k_trunc..=k_trunc)
        .map(|k| (0..phi).map(|j| f.eval_index(k, j).norm_sqr()).sum::<f64>() / phi as f64)
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellReport {
    pub ells: Vec<i32>,
    /// `f_l(chi_s)` per `l`, one row per z-sample
    pub coeffs: Vec<Vec<C64>>,
    pub partial_sums: Vec<Vec<C64>>,
    /// `gamma(1/2 - s, chi^{-1})` per sample
    pub target: Vec<C64>,
    pub max_dev: f64,
}

/// `f_l(chi_s) = int_{|a| = q^{-l}} eta(a) chi_s(a) d*a` at `n = 0` for `l` in `ells`,
/// compared with `Gamma(1/2, chi_s^{-1}) = gamma(1/2 - s, chi^{-1}, psi)`.
pub fn shell_coefficients(
    chi: &UnitCharacter,
    ells: std::ops::RangeInclusive<i32>,
    zs: &[C64],
    orient: Orientation,
) -> Result<ShellReport> {
    let p = chi.p();
    let q = chi.q();
    for z in zs {
        if z.norm() >= q.sqrt() {
            return Err(Error::NoStabilization(format!(
                "shell sums diverge at z = {z}: need |z| < q^(1/2), i.e. Re(s) > -1/2"
            )));
        }
    }
    let eta = EtaKernel::new(p, 0, orient)?;
    let ells: Vec<i32> = ells.collect();
    let avgs: Vec<C64> = ells
        .par_iter()
        .map(|&l| {
            let lev = eta.level_for(l).max(chi.level());
            let vals = eta.shell(l, lev)?;
            let c = chi.lift(lev);
            Ok((0..c.group().order).map(|j| vals[j] * c.value_at_log(j)).sum::<C64>() / c.group().order as f64)
        })
        .collect::<Result<_>>()?;
    let gam = gamma_factor(&chi.inverse(), orient);
    let mut coeffs = vec![];
    let mut partial_sums = vec![];
    let mut target = vec![];
    let mut max_dev: f64 = 0.0;
    for &z in zs {
        let row: Vec<C64> = ells.iter().zip(&avgs).map(|(&l, &a)| a * z.powi(l)).collect();
        let mut acc = ZERO;
        let ps: Vec<C64> = row.iter().map(|&c| {
            acc += c;
            acc
        }).collect();
        let t = gam.eval(C64::new(q.powf(-0.5), 0.0) / z);
        max_dev = max_dev.max((acc - t).norm() / t.norm().max(1e-300));
        coeffs.push(row);
        partial_sums.push(ps);
        target.push(t);
    }
    Ok(ShellReport { ells, coeffs, partial_sums, target, max_dev })
}
