//! The local field `Q_p` at finite precision.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_odd_prime(p: i64) -> Result<()> {
    if p == 2 || !is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    Ok(())
}

pub fn ipow(p: i64, e: u32) -> i64 {
    p.pow(e)
}

/// `phi(p^n)`, with `phi(p^0) = 1`.
pub fn totient_pow(p: i64, n: u32) -> i64 {
    if n == 0 {
        1
    } else {
        (p - 1) * p.pow(n - 1)
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp(mut x: i64, p: i64) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

pub fn modpow(mut b: i64, mut e: u64, m: i64) -> i64 {
    let mut r = 1i64 % m;
    b = b.rem_euclid(m);
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as i128 * b as i128) % m as i128) as i64;
        }
        b = ((b as i128 * b as i128) % m as i128) as i64;
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m` (gcd must be 1).
pub fn modinv(a: i64, m: i64) -> Option<i64> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFieldConfig {
    pub p: i64,
    #[serde(default = "default_level")]
    pub default_level: u32,
    #[serde(default = "default_tol")]
    pub numeric_tolerance: f64,
}

fn default_level() -> u32 {
    2
}
fn default_tol() -> f64 {
    1e-9
}

impl LocalFieldConfig {
    pub fn new(p: i64, default_level: u32) -> Result<Self> {
        check_odd_prime(p)?;
        if default_level < 1 {
            return Err(Error::BadLevel(default_level as i64));
        }
        Ok(Self { p, default_level, numeric_tolerance: 1e-9 })
    }

    pub fn validate(&self) -> Result<()> {
        check_odd_prime(self.p)?;
        if self.default_level < 1 {
            return Err(Error::BadLevel(self.default_level as i64));
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        self.p as f64
    }
}

/// Orientation of the additive character: `psi` or `psi^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Orientation {
    #[default]
    Psi,
    PsiInverse,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Psi => 1,
            Orientation::PsiInverse => -1,
        }
    }
    pub fn flip(self) -> Self {
        match self {
            Orientation::Psi => Orientation::PsiInverse,
            Orientation::PsiInverse => Orientation::Psi,
        }
    }
}

/// `exp(2 pi i (num mod den) / den)`.
pub fn root_of_unity(num: i64, den: i64) -> C64 {
    let r = num.rem_euclid(den) as f64 / den as f64;
    C64::from_polar(1.0, TAU * r)
}

/// A nonzero element `p^valuation * unit` of `Q_p`, unit known mod `p^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicElement {
    pub p: i64,
    pub valuation: i32,
    pub unit: i64,
    pub level: u32,
}

impl PadicElement {
    pub fn new(p: i64, valuation: i32, unit: i64, level: u32) -> Result<Self> {
        check_odd_prime(p)?;
        if level < 1 {
            return Err(Error::BadLevel(level as i64));
        }
        let m = ipow(p, level);
        let u = unit.rem_euclid(m);
        if u % p == 0 {
            return Err(Error::Invalid(format!("unit {unit} not coprime to {p}")));
        }
        Ok(Self { p, valuation, unit: u, level })
    }

    /// `num / den` for integers; zero gives `ZeroValuation`.
    pub fn from_ratio(p: i64, num: i64, den: i64, level: u32) -> Result<Self> {
        if num == 0 {
            return Err(Error::ZeroValuation);
        }
        if den == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        let (vn, vd) = (vp(num, p) as i32, vp(den, p) as i32);
        let m = ipow(p, level);
        let un = (num / p.pow(vn as u32)).rem_euclid(m);
        let ud = (den / p.pow(vd as u32)).rem_euclid(m);
        let inv = modinv(ud, m).expect("unit");
        Self::new(p, vn - vd, ((un as i128 * inv as i128) % m as i128) as i64, level)
    }

    pub fn from_bigratio(
        p: i64,
        r: &num_rational::BigRational,
        level: u32,
    ) -> Result<Self> {
        use num_bigint::BigInt;
        use num_traits::{ToPrimitive, Zero};
        if r.is_zero() {
            return Err(Error::ZeroValuation);
        }
        let bp = BigInt::from(p);
        let val = |x: &BigInt| -> (i32, BigInt) {
            let mut x = x.clone();
            let mut v = 0;
            while (&x % &bp).is_zero() {
                x /= &bp;
                v += 1;
            }
            (v, x)
        };
        let (vn, un) = val(r.numer());
        let (vd, ud) = val(r.denom());
        let m = BigInt::from(ipow(p, level));
        let red = |x: BigInt| -> i64 { (((x % &m) + &m) % &m).to_i64().unwrap() };
        let (un, ud) = (red(un), red(ud));
        let mi = ipow(p, level);
        let inv = modinv(ud, mi).expect("unit");
        Self::new(p, vn - vd, ((un as i128 * inv as i128) % mi as i128) as i64, level)
    }

    pub fn one(p: i64, level: u32) -> Result<Self> {
        Self::new(p, 0, 1, level)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let level = self.level.min(other.level);
        let m = ipow(self.p, level);
        let u = ((self.unit % m) as i128 * (other.unit % m) as i128 % m as i128) as i64;
        Self { p: self.p, valuation: self.valuation + other.valuation, unit: u, level }
    }

    pub fn with_level(&self, level: u32) -> Self {
        let level = level.min(self.level);
        Self { unit: self.unit % ipow(self.p, level), level, ..*self }
    }

    /// `(ord x, |x|, ac x)`.
    pub fn ord_abs_ac(&self) -> (i32, f64, i64) {
        (self.valuation, (self.p as f64).powi(-self.valuation), self.unit)
    }
}

/// `psi(x) = exp(2 pi i frac_p(x))`, or its inverse.
pub fn psi_eval(x: &PadicElement, orient: Orientation) -> Result<C64> {
    if x.valuation >= 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let d = (-x.valuation) as u32;
    if d > x.level {
        return Err(Error::Precision(format!(
            "fractional part of p^{} * u needs level {}, have {}",
            x.valuation, d, x.level
        )));
    }
    Ok(root_of_unity(orient.sign() * x.unit, ipow(x.p, d)))
}

/// `(Z/p^N)^x` as a cyclic group with a fixed generator.
#[derive(Debug, Clone)]
pub struct UnitGroup {
    pub p: i64,
    pub level: u32,
    pub modulus: i64,
    pub order: usize,
    pub generator: i64,
    /// `elems[j] = g^j mod p^N`
    pub elems: Vec<i64>,
    dlog: Vec<u32>,
}

/// Smallest primitive root mod `p^2`; it generates `(Z/p^N)^x` for every `N`.
pub fn primitive_root(p: i64) -> i64 {
    let m = p * p;
    let phi = (p - 1) * p;
    let mut fac = vec![];
    let mut r = phi;
    let mut d = 2;
    while d * d <= r {
        if r % d == 0 {
            fac.push(d);
            while r % d == 0 {
                r /= d;
            }
        }
        d += 1;
    }
    if r > 1 {
        fac.push(r);
    }
    (2..m)
        .find(|&g| g % p != 0 && fac.iter().all(|&f| modpow(g, (phi / f) as u64, m) != 1))
        .expect("primitive root exists")
}

impl UnitGroup {
    pub fn new(p: i64, level: u32) -> Result<Self> {
        check_odd_prime(p)?;
        if level < 1 {
            return Err(Error::BadLevel(level as i64));
        }
        let modulus = ipow(p, level);
        let order = totient_pow(p, level) as usize;
        let generator = primitive_root(p) % modulus;
        let mut elems = Vec::with_capacity(order);
        let mut dlog = vec![u32::MAX; modulus as usize];
        let mut x = 1i64;
        for j in 0..order {
            elems.push(x);
            dlog[x as usize] = j as u32;
            x = x * generator % modulus;
        }
        debug_assert_eq!(x, 1);
        Ok(Self { p, level, modulus, order, generator, elems, dlog })
    }

    /// Discrete log of a unit residue (reduced mod `p^N` first).
    pub fn dlog(&self, u: i64) -> Option<usize> {
        let r = u.rem_euclid(self.modulus) as usize;
        match self.dlog[r] {
            u32::MAX => None,
            j => Some(j as usize),
        }
    }

    /// d*t volume of one coset of `1 + p^N O`.
    pub fn coset_volume(&self) -> f64 {
        1.0 / self.order as f64
    }

    pub fn elements(&self) -> &[i64] {
        &self.elems
    }
}
