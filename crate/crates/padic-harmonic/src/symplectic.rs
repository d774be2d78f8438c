//! Exact doubling geometry: Sp(2n) membership, the doubling embedding, `g0`,
//! the Cayley transform, the Siegel factorization and the Jacobian constant.

use crate::error::{Error, Result};
use crate::matrix::{q_frac, q_int, RationalMatrix, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn eye(n: usize) -> RationalMatrix {
    RationalMatrix::identity(n)
}

fn zero(n: usize) -> RationalMatrix {
    RationalMatrix::zeros(n, n)
}

fn half(m: &RationalMatrix) -> RationalMatrix {
    m.scale(&q_frac(1, 2))
}

fn check_size(g: &RationalMatrix, size: usize) -> Result<()> {
    if g.rows() != size || g.cols() != size {
        return Err(Error::Dimension(format!("expected {size}x{size}, got {}x{}", g.rows(), g.cols())));
    }
    Ok(())
}

/// The form `J_n = [[0, I], [-I, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    pub n: usize,
    pub j: RationalMatrix,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        let i = eye(n);
        let j = RationalMatrix::from_blocks(&[vec![zero(n), i.clone()], vec![-&i, zero(n)]]);
        Self { n, j }
    }
}

pub fn j_form(n: usize) -> RationalMatrix {
    SymplecticForm::new(n).j
}

/// `g^t J_n g == J_n` exactly.
pub fn is_symplectic(g: &RationalMatrix, n: usize) -> Result<bool> {
    check_size(g, 2 * n)?;
    let j = j_form(n);
    Ok(&(&g.transpose() * &j) * g == j)
}

/// `(h1, h2) -> [[A,0,B,0],[0,M,0,-N],[C,0,D,0],[0,-P,0,Q]]` in `Sp(4n)`.
pub fn doubling_embed(h1: &RationalMatrix, h2: &RationalMatrix, n: usize) -> Result<RationalMatrix> {
    if !is_symplectic(h1, n)? || !is_symplectic(h2, n)? {
        return Err(Error::NotSymplectic);
    }
    let b = |h: &RationalMatrix, r: usize, c: usize| h.block(r * n, c * n, n, n);
    let z = zero(n);
    Ok(RationalMatrix::from_blocks(&[
        vec![b(h1, 0, 0), z.clone(), b(h1, 0, 1), z.clone()],
        vec![z.clone(), b(h2, 0, 0), z.clone(), -&b(h2, 0, 1)],
        vec![b(h1, 1, 0), z.clone(), b(h1, 1, 1), z.clone()],
        vec![z.clone(), -&b(h2, 1, 0), z, b(h2, 1, 1)],
    ]))
}

/// `g0`, its inverse, `w_Delta`, `w_std` and `J_{2n}`, all `4n x 4n`.
#[derive(Clone, Debug)]
pub struct StandardElements {
    pub n: usize,
    pub g0: RationalMatrix,
    pub g0_inv: RationalMatrix,
    pub w_delta: RationalMatrix,
    pub w_std: RationalMatrix,
    pub j2n: RationalMatrix,
}

pub fn standard_elements(n: usize) -> StandardElements {
    let i = eye(n);
    let hi = half(&i);
    let z = zero(n);
    let m = |x: &RationalMatrix| -x;
    let g0 = RationalMatrix::from_blocks(&[
        vec![z.clone(), z.clone(), m(&hi), m(&hi)],
        vec![hi.clone(), m(&hi), z.clone(), z.clone()],
        vec![i.clone(), i.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), i.clone(), m(&i)],
    ]);
    let g0_inv = RationalMatrix::from_blocks(&[
        vec![z.clone(), i.clone(), hi.clone(), z.clone()],
        vec![z.clone(), m(&i), hi.clone(), z.clone()],
        vec![m(&i), z.clone(), z.clone(), hi.clone()],
        vec![m(&i), z.clone(), z.clone(), m(&hi)],
    ]);
    let w_delta = RationalMatrix::from_blocks(&[
        vec![i.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), m(&i), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), i.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), m(&i)],
    ]);
    let two = i.scale(&q_int(2));
    let w_std = RationalMatrix::from_blocks(&[
        vec![z.clone(), z.clone(), z.clone(), m(&hi)],
        vec![z.clone(), z.clone(), hi.clone(), z.clone()],
        vec![z.clone(), two.clone(), z.clone(), z.clone()],
        vec![m(&two), z.clone(), z.clone(), z],
    ]);
    StandardElements { n, g0, g0_inv, w_delta, w_std, j2n: j_form(2 * n) }
}

/// `h = (2 J X + I)(2 J X - I)^{-1}` for symmetric `X` of size `2n`.
pub fn cayley(x: &RationalMatrix) -> Result<RationalMatrix> {
    if !x.is_symmetric() || !x.rows().is_multiple_of(2) {
        return Err(Error::Invalid("cayley needs a symmetric matrix of even size".into()));
    }
    let n = x.rows() / 2;
    let y = (&j_form(n) * x).scale(&q_int(2));
    let i = eye(2 * n);
    let den = (&y - &i).inverse().map_err(|_| Error::CayleyPole)?;
    let h = &(&y + &i) * &den;
    debug_assert!(is_symplectic(&h, n).unwrap());
    Ok(h)
}

/// `X = 1/2 J (I - h)^{-1} (I + h)`.
pub fn cayley_inv(h: &RationalMatrix) -> Result<RationalMatrix> {
    if !h.rows().is_multiple_of(2) {
        return Err(Error::Dimension("odd size".into()));
    }
    let n = h.rows() / 2;
    if !is_symplectic(h, n)? {
        return Err(Error::NotSymplectic);
    }
    let i = eye(2 * n);
    let inv = (&i - h).inverse().map_err(|_| Error::Singular("det(I - h) = 0".into()))?;
    let x = half(&(&(&j_form(n) * &inv) * &(&i + h)));
    debug_assert!(x.is_symmetric());
    Ok(x)
}

/// `n_std(X) = [[I, X], [0, I]]`.
pub fn n_std(x: &RationalMatrix) -> RationalMatrix {
    let k = x.rows();
    RationalMatrix::from_blocks(&[vec![eye(k), x.clone()], vec![zero(k), eye(k)]])
}

/// `m_std(A) = diag(A, A^{-t})`.
pub fn m_std(a: &RationalMatrix) -> Result<RationalMatrix> {
    let at = a.inverse()?.transpose();
    Ok(RationalMatrix::from_blocks(&[vec![a.clone(), zero(a.rows())], vec![zero(a.rows()), at]]))
}

#[derive(Clone, Debug)]
pub struct SiegelFactorization {
    pub h: RationalMatrix,
    pub p_std: RationalMatrix,
    /// Upper-left Levi block `1/2 (h^t - I)`.
    pub levi: RationalMatrix,
}

/// `w_std n_std(X) = p_std g0 (h, I) g0^{-1}` with `h = cayley(X)`.
pub fn siegel_factorize(x: &RationalMatrix) -> Result<SiegelFactorization> {
    let h = cayley(x)?;
    let n = x.rows() / 2;
    let se = standard_elements(n);
    let emb = doubling_embed(&h, &eye(2 * n), n)?;
    let conj = &(&se.g0 * &emb) * &se.g0_inv;
    let p_std = &(&se.w_std * &n_std(x)) * &conj.inverse()?;
    let levi = half(&(&h.transpose() - &eye(2 * n)));
    Ok(SiegelFactorization { h, p_std, levi })
}

fn q_val(x: &Q, p: i64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let pb = BigInt::from(p);
    let count = |mut a: BigInt| {
        let mut v = 0;
        while (&a % &pb).is_zero() {
            a /= &pb;
            v += 1;
        }
        v
    };
    Ok(count(x.numer().abs()) - count(x.denom().abs()))
}

/// `(det A, |det A|_p^{2n+1})` for `A` in `GL_{2n}`.
pub fn abelianization_delta(a: &RationalMatrix, p: i64) -> Result<(Q, Q)> {
    if !a.is_square() || !a.rows().is_multiple_of(2) {
        return Err(Error::Dimension("abelianization needs a square matrix of even size".into()));
    }
    let d = a.det()?;
    if d.is_zero() {
        return Err(Error::Singular("det A = 0".into()));
    }
    let e = q_val(&d, p)? * (a.rows() as i64 + 1);
    let pq = q_int(p);
    let delta = if e >= 0 { num_traits::pow(pq, e as usize).recip() } else { num_traits::pow(pq, (-e) as usize) };
    Ok((d, delta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderMode {
    Formula,
    BruteForce,
}

/// `|Sp_{2n}(F_q)|` and `c0 = |Sp_{2n}(F_q)| / q^{n(2n+1)}`.
pub fn sp_order(n: usize, q: u64, mode: OrderMode) -> Result<(u128, Q)> {
    let order = match mode {
        OrderMode::Formula => {
            let mut o = (q as u128).pow((n * n) as u32);
            for i in 1..=n {
                o *= (q as u128).pow(2 * i as u32) - 1;
            }
            o
        }
        OrderMode::BruteForce => {
            if n != 1 || q > 7 {
                return Err(Error::Budget { needed: (q as u128).pow((4 * n * n) as u32), budget: 7u128.pow(4) });
            }
            if !(q as i64 > 2 && (2..q).all(|d| !q.is_multiple_of(d))) {
                return Err(Error::Unsupported(format!("brute force needs an odd prime, got {q}")));
            }
            // n = 1: the form condition is det = 1
            (0..q * q)
                .into_par_iter()
                .map(|row| {
                    let (a, b) = (row / q, row % q);
                    let mut c = 0u128;
                    for cc in 0..q {
                        for d in 0..q {
                            if (a * d + q * q - b * cc % q) % q == 1 {
                                c += 1;
                            }
                        }
                    }
                    c
                })
                .sum()
        }
    };
    let c0 = Q::new(BigInt::from(order), num_traits::pow(BigInt::from(q), n * (2 * n + 1)));
    Ok((order, c0))
}

/// `prod_{i=1}^n (1 - q^{-2i})`.
pub fn c0_zeta(n: usize, q: u64) -> Q {
    (1..=n).fold(Q::one(), |acc, i| acc * (Q::one() - Q::new(BigInt::one(), num_traits::pow(BigInt::from(q), 2 * i))))
}

/// Symmetric `2n x 2n` integer matrix with entries in `[-bound, bound]`.
pub fn random_symmetric<R: Rng>(n: usize, bound: i64, rng: &mut R) -> RationalMatrix {
    let k = 2 * n;
    let mut x = zero(k);
    for i in 0..k {
        for j in i..k {
            x[(i, j)] = q_int(rng.gen_range(-bound..=bound));
            x[(j, i)] = x[(i, j)].clone();
        }
    }
    x
}

/// Rational symplectic element from `cayley` of a random symmetric matrix; rejects poles.
pub fn random_symplectic<R: Rng>(n: usize, rng: &mut R) -> RationalMatrix {
    loop {
        if let Ok(h) = cayley(&random_symmetric(n, 3, rng)) {
            return h;
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub n: usize,
    pub samples: usize,
    pub passed: bool,
    pub detail: Option<String>,
}

fn record(out: &mut Vec<IdentityCheck>, name: &str, n: usize, samples: usize, failures: Vec<String>) {
    out.push(IdentityCheck {
        name: name.into(),
        n,
        samples,
        passed: failures.is_empty(),
        detail: failures.into_iter().next(),
    });
}

/// The full exact identity suite for rank `n`, `samples` random draws per identity.
pub fn check_suite<R: Rng>(n: usize, samples: usize, rng: &mut R) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let se = standard_elements(n);
    let i4 = eye(4 * n);
    let i2 = eye(2 * n);

    let mut f = vec![];
    for (name, m) in [("g0", &se.g0), ("w_delta", &se.w_delta), ("w_std", &se.w_std), ("j2n", &se.j2n)] {
        if !is_symplectic(m, 2 * n)? {
            f.push(format!("{name} not symplectic"));
        }
    }
    record(&mut out, "standard elements symplectic", n, 4, f);

    let mut f = vec![];
    if &se.g0 * &se.g0_inv != i4 {
        f.push("g0 g0^-1 != I".into());
    }
    record(&mut out, "g0 inverse", n, 1, f);

    let mut f = vec![];
    if &(&se.g0_inv * &se.w_std) * &se.g0 != se.w_delta {
        f.push("g0^-1 w_std g0 != w_delta".into());
    }
    if &se.w_delta * &se.w_delta != i4 {
        f.push("w_delta^2 != I".into());
    }
    record(&mut out, "w_delta conjugation", n, 1, f);

    let mut f = vec![];
    for s in 0..samples {
        let (a, b, c, d) = (random_symplectic(n, rng), random_symplectic(n, rng), random_symplectic(n, rng), random_symplectic(n, rng));
        let lhs = &doubling_embed(&a, &b, n)? * &doubling_embed(&c, &d, n)?;
        let rhs = doubling_embed(&(&a * &c), &(&b * &d), n)?;
        if lhs != rhs {
            f.push(format!("sample {s}: embedding not multiplicative"));
        }
        if !is_symplectic(&lhs, 2 * n)? {
            f.push(format!("sample {s}: embedded element not symplectic"));
        }
    }
    record(&mut out, "doubling embedding homomorphism", n, samples, f);

    let mut f = vec![];
    let mut used = 0;
    while used < samples {
        let x = random_symmetric(n, 3, rng);
        let Ok(h) = cayley(&x) else { continue };
        used += 1;
        if !is_symplectic(&h, n)? {
            f.push("cayley output not symplectic".into());
        }
        match cayley_inv(&h) {
            Ok(y) if y == x => {}
            Ok(_) => f.push("cayley_inv(cayley(X)) != X".into()),
            Err(e) => f.push(format!("cayley_inv failed: {e}")),
        }
        let y = &j_form(n) * &x;
        let xj = &x * &j_form(n);
        if !(&(&xj * &j_form(n)) + &(&j_form(n) * &xj.transpose())).is_zero() || !(&(&y.transpose() * &j_form(n)) + &(&j_form(n) * &y)).is_zero() {
            f.push("J X not in sp(2n)".into());
        }
    }
    record(&mut out, "cayley roundtrip", n, samples, f);

    let mut f = vec![];
    let mut used = 0;
    while used < samples {
        let x = random_symmetric(n, 3, rng);
        let Ok(sf) = siegel_factorize(&x) else { continue };
        used += 1;
        let k = 2 * n;
        if !sf.p_std.block(k, 0, k, k).is_zero() {
            f.push("p_std lower-left block nonzero".into());
        }
        if !sf.p_std.inverse()?.block(k, 0, k, k).is_zero() {
            f.push("p_std^-1 lower-left block nonzero".into());
        }
        if sf.p_std.block(0, 0, k, k) != sf.levi {
            f.push("Levi block != 1/2 (h^t - I)".into());
        }
        let lr = (&sf.h - &i2).inverse()?.scale(&q_int(2));
        if sf.p_std.block(k, k, k, k) != lr {
            f.push("Levi block != 2 (h - I)^-1".into());
        }
        let emb = doubling_embed(&sf.h, &i2, n)?;
        let lhs = &se.w_std * &n_std(&x);
        let rhs = &(&(&sf.p_std * &se.g0) * &emb) * &se.g0_inv;
        if lhs != rhs {
            f.push("w_std n_std != p_std g0 h g0^-1".into());
        }
        // a(m_Delta) = det of the Levi block = 2^{-2n} det(h - I)
        let want = (&sf.h - &i2).det()? / num_traits::pow(q_int(2), 2 * n);
        if sf.levi.det()? != want {
            f.push("a(m_Delta) != 2^{-2n} det(h - I)".into());
        }
    }
    record(&mut out, "siegel factorization", n, samples, f);

    let mut f = vec![];
    for _ in 0..samples {
        let a = random_gl(2 * n, rng);
        let m = &(&se.g0_inv * &m_std(&a)?) * &se.g0;
        let (d, _) = abelianization_delta(&a, 3)?;
        match restrict_to_l_delta(&m, n) {
            Ok(r) if r.det()?.recip() == d => {}
            Ok(_) => f.push("det on L_Delta^-1 != det A".into()),
            Err(e) => f.push(format!("m_Delta(A) does not preserve L_Delta: {e}")),
        }
        let b = random_gl(2 * n, rng);
        let (dab, eab) = abelianization_delta(&(&a * &b), 3)?;
        let (da, ea) = abelianization_delta(&a, 3)?;
        let (db, eb) = abelianization_delta(&b, 3)?;
        if dab != &da * &db || eab != &ea * &eb {
            f.push("abelianization not multiplicative".into());
        }
    }
    record(&mut out, "abelianization", n, samples, f);

    let mut f = vec![];
    let (_, c0) = sp_order(n, 3, OrderMode::Formula)?;
    if c0 != c0_zeta(n, 3) {
        f.push(format!("c0 {c0} != prod (1 - q^-2i)"));
    }
    if n == 1 {
        let (o, _) = sp_order(1, 3, OrderMode::BruteForce)?;
        if o != sp_order(1, 3, OrderMode::Formula)?.0 {
            f.push("brute force order disagrees".into());
        }
    }
    record(&mut out, "jacobian constant c0", n, 1, f);
    Ok(out)
}

/// Columns `e_i + f_i` of the diagonal Lagrangian in the doubling basis.
pub fn l_delta_basis(n: usize) -> RationalMatrix {
    let mut l = RationalMatrix::zeros(4 * n, 2 * n);
    for i in 0..n {
        l[(i, i)] = q_int(1);
        l[(n + i, i)] = q_int(1);
        l[(2 * n + i, n + i)] = q_int(1);
        // basis vector is -f_{n+i}
        l[(3 * n + i, n + i)] = q_int(-1);
    }
    l
}

/// Matrix of `m` on `L_Delta`; errors if `m` does not preserve it.
pub fn restrict_to_l_delta(m: &RationalMatrix, n: usize) -> Result<RationalMatrix> {
    let l = l_delta_basis(n);
    let lt = l.transpose();
    let ml = m * &l;
    let r = &(&(&lt * &l).inverse()? * &lt) * &ml;
    if &l * &r != ml {
        return Err(Error::Invalid("L_Delta not preserved".into()));
    }
    Ok(r)
}

/// Random invertible integer matrix with entries in `[-3, 3]`.
pub fn random_gl<R: Rng>(k: usize, rng: &mut R) -> RationalMatrix {
    loop {
        let mut a = zero(k);
        for i in 0..k {
            for j in 0..k {
                a[(i, j)] = q_int(rng.gen_range(-3..=3));
            }
        }
        if !a.det().map(|d| d.is_zero()).unwrap_or(true) {
            return a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_examples() {
        for n in 1..=3 {
            assert!(is_symplectic(&eye(2 * n), n).unwrap());
            assert!(is_symplectic(&j_form(n), n).unwrap());
        }
        assert!(is_symplectic(&RationalMatrix::diag(&[q_int(2), q_frac(1, 2)]), 1).unwrap());
        assert!(!is_symplectic(&RationalMatrix::diag(&[q_int(2), q_int(2)]), 1).unwrap());
        assert!(matches!(is_symplectic(&eye(3), 1), Err(Error::Dimension(_))));
    }

    #[test]
    fn embedding_examples() {
        for n in 1..=2 {
            assert_eq!(doubling_embed(&eye(2 * n), &eye(2 * n), n).unwrap(), eye(4 * n));
        }
        let h = RationalMatrix::from_i64(&[&[2, 3], &[1, 2]]);
        let e = doubling_embed(&h, &eye(2), 1).unwrap();
        let want = RationalMatrix::from_i64(&[&[2, 0, 3, 0], &[0, 1, 0, 0], &[1, 0, 2, 0], &[0, 0, 0, 1]]);
        assert_eq!(e, want);
        let bad = RationalMatrix::diag(&[q_int(2), q_int(2)]);
        assert_eq!(doubling_embed(&bad, &eye(2), 1), Err(Error::NotSymplectic));
    }

    #[test]
    fn standard_elements_n1() {
        let se = standard_elements(1);
        assert!(is_symplectic(&se.g0, 2).unwrap());
        let d = se.g0.det().unwrap();
        assert!(d == q_int(1) || d == q_int(-1));
        assert_eq!(&se.g0 * &se.g0_inv, eye(4));
        assert_eq!(&se.w_delta * &se.w_delta, eye(4));
        assert_eq!(&(&se.g0_inv * &se.w_std) * &se.g0, se.w_delta);
        assert_eq!(se.g0[(0, 2)], q_frac(-1, 2));
        assert_eq!(se.g0[(1, 0)], q_frac(1, 2));
    }

    #[test]
    fn cayley_basics() {
        for n in 1..=2 {
            assert_eq!(cayley(&zero(2 * n)).unwrap(), -&eye(2 * n));
            assert_eq!(cayley_inv(&-&eye(2 * n)).unwrap(), zero(2 * n));
        }
        // 2 J X - I singular: X = [[0, 1/2], [1/2, 0]] gives 2JX = diag(1, -1)
        let x = RationalMatrix::from_rows(vec![vec![q_int(0), q_frac(1, 2)], vec![q_frac(1, 2), q_int(0)]]).unwrap();
        assert_eq!(cayley(&x), Err(Error::CayleyPole));
        assert!(matches!(cayley_inv(&eye(2)), Err(Error::Singular(_))));
    }

    #[test]
    fn suite_passes_n1_and_n2() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, s) in [(1, 100), (2, 20)] {
            for c in check_suite(n, s, &mut rng).unwrap() {
                assert!(c.passed, "{c:?}");
            }
        }
    }

    #[test]
    fn abelianization_examples() {
        let (d, e) = abelianization_delta(&eye(2), 3).unwrap();
        assert_eq!((d, e), (q_int(1), q_int(1)));
        let (d, e) = abelianization_delta(&RationalMatrix::diag(&[q_int(3), q_int(1)]), 3).unwrap();
        assert_eq!((d, e), (q_int(3), q_frac(1, 27)));
        assert!(abelianization_delta(&zero(2), 3).is_err());
    }

    #[test]
    fn sp_orders() {
        assert_eq!(sp_order(1, 3, OrderMode::BruteForce).unwrap(), (24, q_frac(8, 9)));
        assert_eq!(sp_order(1, 5, OrderMode::BruteForce).unwrap(), (120, q_frac(24, 25)));
        assert_eq!(sp_order(1, 7, OrderMode::BruteForce).unwrap().0, sp_order(1, 7, OrderMode::Formula).unwrap().0);
        assert_eq!(sp_order(2, 3, OrderMode::Formula).unwrap().0, 81 * 8 * 80);
        for n in 1..=3 {
            for q in [3, 5, 7] {
                assert_eq!(sp_order(n, q, OrderMode::Formula).unwrap().1, c0_zeta(n, q));
            }
        }
        assert!(matches!(sp_order(1, 11, OrderMode::BruteForce), Err(Error::Budget { .. })));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn cayley_roundtrip_prop(seed in 0u64..u64::MAX, n in 1usize..=2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_symmetric(n, 4, &mut rng);
            if let Ok(h) = cayley(&x) {
                proptest::prop_assert!(is_symplectic(&h, n).unwrap());
                proptest::prop_assert_eq!(cayley_inv(&h).unwrap(), x);
            }
        }

        #[test]
        fn doubling_embedding_is_homomorphism(seed in 0u64..u64::MAX) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c, d) = (random_symplectic(1, &mut rng), random_symplectic(1, &mut rng), random_symplectic(1, &mut rng), random_symplectic(1, &mut rng));
            let lhs = &doubling_embed(&a, &b, 1).unwrap() * &doubling_embed(&c, &d, 1).unwrap();
            proptest::prop_assert_eq!(lhs, doubling_embed(&(&a * &c), &(&b * &d), 1).unwrap());
        }
    }
}
