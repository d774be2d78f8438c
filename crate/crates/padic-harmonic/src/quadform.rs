//! Symmetric matrices over Q_p: diagonalization, Hilbert symbol, Hasse invariant, Clifford invariant.

use crate::error::{Error, Result};
use crate::matrix::{q_int, RationalMatrix, Q};
use crate::padic::{check_odd_prime, ipow, modinv, modpow};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// A symmetric matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatrixQ(RationalMatrix);

impl SymMatrixQ {
    pub fn new(m: RationalMatrix) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::Invalid("matrix not symmetric".into()));
        }
        Ok(Self(m))
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(RationalMatrix::from_i64(rows))
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.0
    }

    pub fn det(&self) -> Q {
        self.0.det().expect("square")
    }

    /// `g X g^t`.
    pub fn congruence(&self, g: &RationalMatrix) -> Result<Self> {
        let r = g.try_mul(&self.0)?.try_mul(&g.transpose())?;
        Ok(Self(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotOrder {
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagonalization {
    pub diagonal: Vec<Q>,
    /// `P` with `P X P^t = diag(d)`.
    pub basis: RationalMatrix,
}

fn swap_rows(a: &mut RationalMatrix, i: usize, j: usize) {
    for c in 0..a.cols() {
        let t = a[(i, c)].clone();
        a[(i, c)] = a[(j, c)].clone();
        a[(j, c)] = t;
    }
}

fn swap_cols(a: &mut RationalMatrix, i: usize, j: usize) {
    for r in 0..a.rows() {
        let t = a[(r, i)].clone();
        a[(r, i)] = a[(r, j)].clone();
        a[(r, j)] = t;
    }
}

/// `row_i += f row_j` (and the same on columns for `a`).
fn add_row(a: &mut RationalMatrix, i: usize, j: usize, f: &Q) {
    for c in 0..a.cols() {
        let t = f * &a[(j, c)];
        a[(i, c)] += t;
    }
}

fn add_col(a: &mut RationalMatrix, i: usize, j: usize, f: &Q) {
    for r in 0..a.rows() {
        let t = f * &a[(r, j)];
        a[(r, i)] += t;
    }
}

pub fn diagonalize(x: &SymMatrixQ, order: PivotOrder) -> Result<Diagonalization> {
    let m = x.size();
    let mut a = x.0.clone();
    let mut p = RationalMatrix::identity(m);
    for i in 0..m {
        let cands: Vec<usize> = (i..m).filter(|&j| !a[(j, j)].is_zero()).collect();
        let piv = match order {
            PivotOrder::First => cands.first().copied(),
            PivotOrder::Last => cands.last().copied(),
        };
        let piv = match piv {
            Some(j) => j,
            None => {
                let (j, k) = (i..m)
                    .flat_map(|j| (j + 1..m).map(move |k| (j, k)))
                    .find(|&(j, k)| !a[(j, k)].is_zero())
                    .ok_or_else(|| Error::Singular("zero block in diagonalization".into()))?;
                let one = q_int(1);
                add_row(&mut a, j, k, &one);
                add_col(&mut a, j, k, &one);
                add_row(&mut p, j, k, &one);
                j
            }
        };
        if piv != i {
            swap_rows(&mut a, i, piv);
            swap_cols(&mut a, i, piv);
            swap_rows(&mut p, i, piv);
        }
        let pv = a[(i, i)].clone();
        for r in i + 1..m {
            if a[(r, i)].is_zero() {
                continue;
            }
            let f = -(&a[(r, i)] / &pv);
            add_row(&mut a, r, i, &f);
            add_col(&mut a, r, i, &f);
            add_row(&mut p, r, i, &f);
        }
    }
    let diagonal: Vec<Q> = (0..m).map(|i| a[(i, i)].clone()).collect();
    debug_assert_eq!(x.congruence(&p).unwrap().0, RationalMatrix::diag(&diagonal));
    Ok(Diagonalization { diagonal, basis: p })
}

fn vp_big(x: &BigInt, p: i64) -> (i32, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut x = x.clone();
    while !x.is_zero() && (&x % &pb).is_zero() {
        x /= &pb;
        v += 1;
    }
    (v, x)
}

/// `(ord_p(a), unit part of a mod p^k)` for nonzero rational `a`.
pub fn rational_val_unit(a: &Q, p: i64, k: u32) -> Result<(i32, i64)> {
    if a.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let (vn, n) = vp_big(a.numer(), p);
    let (vd, d) = vp_big(a.denom(), p);
    let m = BigInt::from(ipow(p, k));
    let n = n.mod_floor(&m).to_i64().unwrap();
    let d = d.mod_floor(&m).to_i64().unwrap();
    let u = (n * modinv(d, ipow(p, k)).unwrap()).rem_euclid(ipow(p, k));
    Ok((vn - vd, u))
}

/// Legendre symbol of a unit residue.
pub fn legendre(u: i64, p: i64) -> i8 {
    if modpow(u.rem_euclid(p), ((p - 1) / 2) as u64, p) == 1 {
        1
    } else {
        -1
    }
}

/// Tame symbol on `(valuation, unit mod p)` pairs.
pub fn hilbert_vu(v1: i32, u1: i64, v2: i32, u2: i64, p: i64) -> i8 {
    let mut s: i8 = if (v1 * v2).rem_euclid(2) == 1 && ((p - 1) / 2) % 2 == 1 { -1 } else { 1 };
    if v2.rem_euclid(2) == 1 {
        s *= legendre(u1, p);
    }
    if v1.rem_euclid(2) == 1 {
        s *= legendre(u2, p);
    }
    s
}

/// `(a, b)_p` for `p` odd.
pub fn hilbert_symbol(a: &Q, b: &Q, p: i64) -> Result<i8> {
    if p == 2 {
        return Err(Error::Unsupported("Hilbert symbol at p = 2".into()));
    }
    check_odd_prime(p)?;
    let (va, ua) = rational_val_unit(a, p, 1)?;
    let (vb, ub) = rational_val_unit(b, p, 1)?;
    Ok(hilbert_vu(va, ua, vb, ub, p))
}

/// Solvability oracle: `z^2 = a x^2 + b y^2` primitively over `Z/p^k`.
pub fn hilbert_symbol_oracle(a: &Q, b: &Q, p: i64, k: u32) -> Result<i8> {
    check_odd_prime(p)?;
    let pk = ipow(p, k);
    let norm = |x: &Q| -> Result<i64> {
        let (v, u) = rational_val_unit(x, p, k)?;
        // strip even powers of p (square classes)
        Ok((u * ipow(p, v.rem_euclid(2) as u32)).rem_euclid(pk))
    };
    let (a, b) = (norm(a)?, norm(b)?);
    let mut square = vec![false; pk as usize];
    let mut unit_square = vec![false; pk as usize];
    for z in 0..pk {
        let r = (z * z % pk) as usize;
        square[r] = true;
        if z % p != 0 {
            unit_square[r] = true;
        }
    }
    for x in 0..pk {
        for y in 0..pk {
            let r = ((a * (x * x % pk) + b * (y * y % pk)) % pk) as usize;
            let prim = x % p != 0 || y % p != 0;
            if (prim && square[r]) || (!prim && unit_square[r]) {
                return Ok(1);
            }
        }
    }
    Ok(-1)
}

fn hasse_of_diagonal(d: &[Q], p: i64) -> Result<i8> {
    let mut s = 1;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            s *= hilbert_symbol(&d[i], &d[j], p)?;
        }
    }
    Ok(s)
}

/// `eps_X = prod_{i<j} (d_i, d_j)_p`.
pub fn hasse_invariant(x: &SymMatrixQ, p: i64) -> Result<i8> {
    hasse_invariant_with(x, p, PivotOrder::First)
}

pub fn hasse_invariant_with(x: &SymMatrixQ, p: i64, order: PivotOrder) -> Result<i8> {
    if x.det().is_zero() {
        return Err(Error::Singular("Hasse invariant of singular form".into()));
    }
    hasse_of_diagonal(&diagonalize(x, order)?.diagonal, p)
}

/// `rho(X) = (-1,-1)^{n(n+1)/2} ((-1)^n, det X) eps_X` for `X` of size `2n+1`.
pub fn clifford_rho(x: &SymMatrixQ, p: i64) -> Result<i8> {
    let m = x.size();
    if m.is_multiple_of(2) {
        return Err(Error::Dimension(format!("clifford_rho needs odd size, got {m}")));
    }
    let n = (m - 1) / 2;
    let det = x.det();
    if det.is_zero() {
        return Err(Error::Singular("clifford_rho of singular form".into()));
    }
    let m1 = q_int(-1);
    let mut s = hasse_invariant(x, p)?;
    if (n * (n + 1) / 2) % 2 == 1 {
        s *= hilbert_symbol(&m1, &m1, p)?;
    }
    let sign = if n % 2 == 1 { m1 } else { q_int(1) };
    s *= hilbert_symbol(&sign, &det, p)?;
    Ok(s)
}

pub(crate) fn det_i128(a: &[i128], k: usize, stride: usize) -> i128 {
    // Bareiss on the leading k x k block
    let mut m: Vec<i128> = (0..k * k).map(|t| a[(t / k) * stride + t % k]).collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for c in 0..k {
        if m[c * k + c] == 0 {
            let Some(r) = (c + 1..k).find(|&r| m[r * k + c] != 0) else {
                return 0;
            };
            for j in 0..k {
                m.swap(r * k + j, c * k + j);
            }
            sign = -sign;
        }
        for r in c + 1..k {
            for j in c + 1..k {
                m[r * k + j] = (m[r * k + j] * m[c * k + c] - m[r * k + c] * m[c * k + j]) / prev;
            }
        }
        prev = m[c * k + c];
    }
    sign * m[(k - 1) * k + (k - 1)]
}

fn val_unit_i128(x: i128, p: i64) -> (i32, i64) {
    let p = p as i128;
    let mut v = 0;
    let mut x = x;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    (v, x.rem_euclid(p) as i64)
}

fn transform(x: &[i128], m: usize, u: &[i128]) -> Vec<i128> {
    // u x u^t
    let mut ux = vec![0i128; m * m];
    for i in 0..m {
        for k in 0..m {
            if u[i * m + k] != 0 {
                for j in 0..m {
                    ux[i * m + j] += u[i * m + k] * x[k * m + j];
                }
            }
        }
    }
    let mut r = vec![0i128; m * m];
    for i in 0..m {
        for j in 0..m {
            r[i * m + j] = (0..m).map(|k| ux[i * m + k] * u[j * m + k]).sum();
        }
    }
    r
}

/// Deterministic unimodular matrices tried when a leading minor vanishes.
fn unimodular(m: usize, t: u64) -> Vec<i128> {
    let mut u = vec![0i128; m * m];
    for i in 0..m {
        u[i * m + i] = 1;
    }
    let mut s = t.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    for i in 0..m {
        for j in 0..i {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            u[i * m + j] = (s % 3) as i128 - 1;
        }
    }
    // cyclic shift of rows by t
    let sh = (t as usize) % m;
    let mut r = vec![0i128; m * m];
    for i in 0..m {
        for j in 0..m {
            r[((i + sh) % m) * m + j] = u[i * m + j];
        }
    }
    r
}

/// `rho` of an integral symmetric matrix (row-major, nonzero determinant) via leading
/// principal minors. Exact.
pub fn rho_integer(x: &[i64], m: usize, p: i64) -> Result<i8> {
    rho_integer_scaled(x, m, p, 0)
}

/// `rho(p^sigma * x)` for integral `x`.
pub fn rho_integer_scaled(x: &[i64], m: usize, p: i64, sigma: i32) -> Result<i8> {
    if m.is_multiple_of(2) || x.len() != m * m {
        return Err(Error::Dimension(format!("rho_integer: size {m}")));
    }
    let base: Vec<i128> = x.iter().map(|&v| v as i128).collect();
    let det = det_i128(&base, m, m);
    if det == 0 {
        return Err(Error::Singular("rho_integer of singular form".into()));
    }
    for t in 0..64u64 {
        let a = if t == 0 { base.clone() } else { transform(&base, m, &unimodular(m, t)) };
        let minors: Vec<i128> = (1..=m).map(|k| det_i128(&a, k, m)).collect();
        if minors[..m - 1].contains(&0) {
            continue;
        }
        let mut d = Vec::with_capacity(m);
        let (mut pv, mut pu) = (0i32, 1i64);
        for &mk in &minors {
            let (v, u) = val_unit_i128(mk, p);
            d.push((v - pv + sigma, (u * modinv(pu, p).unwrap()).rem_euclid(p)));
            pv = v;
            pu = u;
        }
        let mut s: i8 = 1;
        for i in 0..m {
            for j in i + 1..m {
                s *= hilbert_vu(d[i].0, d[i].1, d[j].0, d[j].1, p);
            }
        }
        let n = (m - 1) / 2;
        let minus_one = (0, p - 1);
        if (n * (n + 1) / 2) % 2 == 1 {
            s *= hilbert_vu(0, p - 1, 0, p - 1, p);
        }
        if n % 2 == 1 {
            let (v, u) = val_unit_i128(det, p);
            s *= hilbert_vu(minus_one.0, minus_one.1, v + m as i32 * sigma, u, p);
        }
        return Ok(s);
    }
    Err(Error::Singular("no transform with nonzero leading minors".into()))
}

/// Height guard used by callers that lift mod-p^k data to integers.
pub fn fits_i64(x: &Q) -> bool {
    x.is_integer() && x.numer().abs() < BigInt::from(i64::MAX >> 8)
}
