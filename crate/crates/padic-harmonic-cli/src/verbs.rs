//! One function per verb; each fills a `RunReport`.

use crate::report::{RunReport, Table};
use crate::{Params, UsageError, Verb, VerifyWhich};
use num_complex::Complex64 as C64;
use padic_harmonic::abelian::{beta_factor, gamma_factor, tate_gamma_oracle, UnitCharacter};
use padic_harmonic::fx::{check_fe_gl1, EtaKernel, FxFunction, PoleClass, ShellKernel};
use padic_harmonic::gdist::{fourier_n0, fourier_n0_at, l2_norm_sq, shell_coefficients};
use padic_harmonic::matrix::{q_frac, q_int, RationalMatrix};
use padic_harmonic::pvs::{check_fe_pvs_with, det_fiber_counts, fe_pvs_fibers, FiberOptions, LatticeTestFunction};
use padic_harmonic::ratfunc::sample_points;
use padic_harmonic::symplectic::{check_suite, sp_order, OrderMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

pub fn run(verb: &Verb, p: &Params) -> Result<RunReport, UsageError> {
    let mut r = RunReport::new(name(verb));
    r.param("p", p.p);
    r.param("orientation", format!("{:?}", p.orient));
    match verb {
        Verb::Gamma => factor(&mut r, p, false)?,
        Verb::Beta => factor(&mut r, p, true)?,
        Verb::EtaTable => eta_table(&mut r, p),
        Verb::Verify { which: VerifyWhich::FeGl1 } => fe_gl1(&mut r, p),
        Verb::Verify { which: VerifyWhich::FePvs } => fe_pvs(&mut r, p)?,
        Verb::CountFibers => count_fibers(&mut r, p)?,
        Verb::SymplecticCheck => symplectic(&mut r, p)?,
        Verb::TateOracle => tate(&mut r, p),
        Verb::FourierN0 => fourier(&mut r, p),
        Verb::Shells => shells(&mut r, p),
    }
    Ok(r)
}

fn name(v: &Verb) -> &'static str {
    match v {
        Verb::Gamma => "gamma",
        Verb::Beta => "beta",
        Verb::EtaTable => "eta-table",
        Verb::Verify { which: VerifyWhich::FeGl1 } => "verify fe-gl1",
        Verb::Verify { which: VerifyWhich::FePvs } => "verify fe-pvs",
        Verb::CountFibers => "count-fibers",
        Verb::SymplecticCheck => "symplectic-check",
        Verb::TateOracle => "tate-oracle",
        Verb::FourierN0 => "fourier-n0",
        Verb::Shells => "shells",
    }
}

fn ms(t: Instant, p: &Params) -> Option<u64> {
    p.timings.then(|| t.elapsed().as_millis() as u64)
}

fn usage(e: impl std::fmt::Display) -> UsageError {
    UsageError(e.to_string())
}

/// The `index`-th character of exact conductor `--conductor` (trivial when absent).
fn pick_character(p: &Params) -> Result<UnitCharacter, UsageError> {
    let c = p.conductor.unwrap_or(0);
    let level = p.level.unwrap_or(1).max(c).max(1);
    let all = UnitCharacter::all(p.p, level).map_err(usage)?;
    let of_c: Vec<UnitCharacter> = all.into_iter().filter(|chi| chi.conductor() == c).collect();
    of_c.get(p.index).cloned().ok_or_else(|| {
        UsageError(format!("no character with conductor {c} and index {} ({} available)", p.index, of_c.len()))
    })
}

fn factor(r: &mut RunReport, p: &Params, beta: bool) -> Result<(), UsageError> {
    let chi = pick_character(p)?;
    r.param("conductor", chi.conductor());
    r.param("character_index", chi.index());
    r.param("level", chi.level());
    let f = if beta {
        r.param("n", p.n);
        beta_factor(p.n, &chi, p.orient)
    } else {
        gamma_factor(&chi, p.orient)
    };
    r.artifact(if beta { "beta" } else { "gamma" }, &f);
    Ok(())
}

fn eta_table(r: &mut RunReport, p: &Params) {
    let kmax = p.k.unwrap_or(3) as i32;
    r.param("n", p.n);
    r.param("k", kmax);
    let t0 = Instant::now();
    let eta = match EtaKernel::new(p.p, p.n, p.orient) {
        Ok(e) => e,
        Err(e) => return r.error("eta kernel", e),
    };
    let mut rows = vec![];
    for k in -kmax..=kmax {
        let lev = eta.level_for(k).max(p.level.unwrap_or(1));
        let g = match padic_harmonic::padic::UnitGroup::new(p.p, lev) {
            Ok(g) => g,
            Err(e) => return r.error("eta kernel", e),
        };
        match eta.shell(k, lev) {
            Ok(vals) => {
                for (u, v) in g.elements().iter().zip(vals) {
                    rows.push(vec![k.to_string(), u.to_string(), lev.to_string(), fmt(v.re), fmt(v.im)]);
                }
            }
            Err(e) => return r.error(&format!("eta shell {k}"), e),
        }
    }
    r.check("eta shells stabilized", None, 0.0, ms(t0, p));
    let header = ["ord", "unit", "level", "re", "im"].map(String::from).to_vec();
    r.artifact("eta", &rows);
    r.table = Some(Table { header, rows });
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn fe_gl1(r: &mut RunReport, p: &Params) {
    let tol = p.tolerance.unwrap_or(1e-8);
    let level = p.level.unwrap_or(2);
    r.param("n", p.n);
    r.param("level", level);
    r.param("tolerance", tol);
    r.param("seed", p.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let zs = sample_points(5);
    let n = p.n;
    let mut family: Vec<FxFunction> = vec![];
    for _ in 0..5 {
        let k0 = rng.gen_range(-2..=0);
        match FxFunction::random(p.p, level, k0, k0 + rng.gen_range(1..=3), None, &mut rng) {
            Ok(f) => family.push(f),
            Err(e) => return r.error("family", e),
        }
    }
    let class = PoleClass::plus(n, -4 * n as i32).restricted();
    for _ in 0..4 {
        match FxFunction::random(p.p, level, rng.gen_range(-1..=0), 2, Some(class), &mut rng) {
            Ok(f) => family.push(f),
            Err(e) => return r.error("family", e),
        }
    }
    match FxFunction::indicator_integers(p.p, level, n) {
        Ok(f) => family.push(f.mul_abs_power(-4 * n as i32)),
        Err(e) => return r.error("family", e),
    }
    let chars = match UnitCharacter::all(p.p, level) {
        Ok(c) => c,
        Err(e) => return r.error("characters", e),
    };
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for f in &family {
        for chi in &chars {
            match check_fe_gl1(f, n, chi, p.orient, &zs) {
                Ok(rep) => worst = worst.max(rep.max_dev),
                Err(e) => return r.error("fe-gl1", e),
            }
        }
    }
    r.check(&format!("GL1 functional equation, {} functions x {} characters", family.len(), chars.len()), Some(worst), tol, ms(t0, p));
}

fn pvs_family(p: i64) -> Vec<(&'static str, LatticeTestFunction)> {
    let phi1 = LatticeTestFunction::integral(p, 3).expect("m = 3");
    let b = RationalMatrix::diag(&[q_int(0), q_int(0), q_frac(1, p)]);
    let phi2 = LatticeTestFunction::indicator(p, b, 0).expect("valid lattice");
    let phi3 = LatticeTestFunction::indicator(p, RationalMatrix::zeros(3, 3), 1).expect("valid lattice");
    vec![("1_{S3(O)}", phi1), ("1_{diag(0,0,1/p)+S3(O)}", phi2), ("1_{p S3(O)}", phi3)]
}

fn fe_pvs(r: &mut RunReport, p: &Params) -> Result<(), UsageError> {
    if p.n != 1 {
        return Err(UsageError(format!("verify fe-pvs supports n = 1 only (got {})", p.n)));
    }
    let k = p.k.unwrap_or(2);
    let tol = p.tolerance.unwrap_or(1e-6);
    r.param("n", 1);
    r.param("k", k);
    r.param("tolerance", tol);
    let zs = sample_points(10);
    let opts = FiberOptions::new(k).with_orientation(p.orient);
    let chars = [UnitCharacter::trivial(p.p, 1).map_err(usage)?, UnitCharacter::quadratic(p.p, 1).map_err(usage)?];
    for (label, phi) in pvs_family(p.p) {
        let t0 = Instant::now();
        let fib = match fe_pvs_fibers(&phi, &opts) {
            Ok(f) => f,
            Err(e) => {
                r.error(&format!("fibers of {label}"), e);
                continue;
            }
        };
        let plain = fib.0.holdout;
        if plain.is_finite() && plain > tol {
            // top shell not predicted by the ones below: k too small for this lattice
            r.artifact(&format!("unresolved {label}"), format!("plain holdout {plain:.3e} at k = {k}; rerun with a larger --k"));
            continue;
        }
        for chi in &chars {
            let name = format!("{label}, {} character", if chi.is_trivial() { "trivial" } else { "quadratic" });
            match check_fe_pvs_with(&fib, 1, chi, p.orient, &zs) {
                Ok(rep) => r.check(&name, Some(rep.max_dev), tol, ms(t0, p)),
                Err(e) => r.error(&name, e),
            }
        }
        r.artifact(&format!("holdout {label}"), [fib.0.holdout, fib.1.holdout].map(|h| if h.is_finite() { Some(h) } else { None }));
    }
    Ok(())
}

fn count_fibers(r: &mut RunReport, p: &Params) -> Result<(), UsageError> {
    let n = p.n;
    let m = 2 * n as usize + 1;
    let k = p.k.unwrap_or(2);
    r.param("n", n);
    r.param("m", m);
    r.param("k", k);
    let t0 = Instant::now();
    let t = match det_fiber_counts(m, p.p, k) {
        Ok(t) => t,
        Err(e) => {
            r.error("count", e);
            return Ok(());
        }
    };
    r.check_bool("conservation", t.conservation_holds(), None, ms(t0, p));
    let mut rows: Vec<Vec<String>> = t.counts.iter().map(|((o, u), c)| vec![o.to_string(), u.to_string(), c.to_string()]).collect();
    rows.push(vec![t.k.to_string(), "0".into(), t.singular.to_string()]);
    r.artifact("counts", &rows);
    r.artifact("total", t.total.to_string());
    r.table = Some(Table { header: ["ord_class", "unit_coset", "count"].map(String::from).to_vec(), rows });
    Ok(())
}

fn symplectic(r: &mut RunReport, p: &Params) -> Result<(), UsageError> {
    if p.n == 0 {
        return Err(UsageError("symplectic-check needs --n >= 1".into()));
    }
    let n = p.n as usize;
    let samples = if n == 1 { 100 } else { 20 };
    r.param("n", n);
    r.param("samples", samples);
    r.param("seed", p.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let t0 = Instant::now();
    match check_suite(n, samples, &mut rng) {
        Ok(checks) => {
            for c in checks {
                r.check_bool(&c.name, c.passed, c.detail, ms(t0, p));
            }
        }
        Err(e) => r.error("symplectic suite", e),
    }
    if n == 1 {
        for q in [3u64, 5] {
            match (sp_order(1, q, OrderMode::BruteForce), sp_order(1, q, OrderMode::Formula)) {
                (Ok(a), Ok(b)) => r.check_bool(&format!("|Sp2(F_{q})| brute force = formula"), a == b, Some(format!("{}", a.0)), None),
                (Err(e), _) | (_, Err(e)) => r.error("sp order", e),
            }
        }
    }
    Ok(())
}

fn tate(r: &mut RunReport, p: &Params) {
    let level = p.level.unwrap_or(2);
    let tol = p.tolerance.unwrap_or(1e-6);
    r.param("level", level);
    r.param("tolerance", tol);
    let chars = match UnitCharacter::all(p.p, level) {
        Ok(c) => c,
        Err(e) => return r.error("characters", e),
    };
    let q = p.p as f64;
    let ss = [0.3, 0.45, 0.5, 0.62, 0.8].map(|x| C64::new(x, 0.1 * x));
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for chi in &chars {
        let g = gamma_factor(chi, p.orient);
        for &s in &ss {
            match tate_gamma_oracle(chi, s, oracle_truncation(q, s.re), p.orient) {
                Ok(o) => {
                    let v = g.eval(C64::new(q, 0.0).powc(-s));
                    worst = worst.max((o.ratio - v).norm() / v.norm());
                    worst = worst.max((o.ratio_alt - v).norm() / v.norm());
                }
                Err(e) => return r.error(&format!("oracle chi {}", chi.index()), e),
            }
        }
    }
    r.check(&format!("gamma factor vs Tate oracle, {} characters x 5 points", chars.len()), Some(worst), tol, ms(t0, p));
}

/// Shells needed for the slower of the two Tate tails to drop below 1e-14.
pub fn oracle_truncation(q: f64, sigma: f64) -> i32 {
    let rate = sigma.min(1.0 - sigma) * q.ln();
    10 + (14.0 * 10f64.ln() / rate).ceil() as i32
}

fn fourier(r: &mut RunReport, p: &Params) {
    let tol = p.tolerance.unwrap_or(1e-6);
    r.param("seed", p.seed);
    r.param("tolerance", tol);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut family = vec![];
    for i in 0..10 {
        let f = if i == 0 {
            FxFunction::indicator_units(p.p, 1)
        } else {
            let k0 = rng.gen_range(-2..=1);
            FxFunction::random(p.p, rng.gen_range(1..=2), k0, k0 + rng.gen_range(1..=3), None, &mut rng)
        };
        match f {
            Ok(f) => family.push(f),
            Err(e) => return r.error("family", e),
        }
    }
    let t0 = Instant::now();
    let (mut inv, mut planch): (f64, f64) = (0.0, 0.0);
    for phi in &family {
        let fphi = match fourier_n0(phi, p.orient, 60) {
            Ok(f) => f,
            Err(e) => return r.error("fourier", e),
        };
        for k in phi.k_min() - 1..=phi.k_tail() {
            for &u in phi.group().elements() {
                match fourier_n0_at(&fphi, (k, u), p.orient.flip(), 80, 1e-12) {
                    Ok(v) => inv = inv.max((v - phi.eval(k, u)).norm()),
                    Err(e) => return r.error("inverse transform", e),
                }
            }
        }
        let a = l2_norm_sq(phi, 12);
        planch = planch.max((a - l2_norm_sq(&fphi, 12)).abs() / a.max(1.0));
    }
    let t = ms(t0, p);
    r.check("double transform is the identity", Some(inv), tol, t);
    r.check("truncated Plancherel, 12 shells", Some(planch), 1e-4, t);
}

fn shells(r: &mut RunReport, p: &Params) {
    let level = p.level.unwrap_or(2);
    let tol = p.tolerance.unwrap_or(1e-5);
    r.param("level", level);
    r.param("s", p.s);
    r.param("tolerance", tol);
    let chars = match UnitCharacter::all(p.p, level) {
        Ok(c) => c,
        Err(e) => return r.error("characters", e),
    };
    let z = C64::new((p.p as f64).powf(-p.s), 0.0);
    let mut rows = vec![];
    for chi in &chars {
        let t0 = Instant::now();
        match shell_coefficients(chi, -(2 * level as i32)..=60, &[z], p.orient) {
            Ok(rep) => {
                for (l, c) in rep.ells.iter().zip(&rep.coeffs[0]) {
                    rows.push(vec![chi.index().to_string(), l.to_string(), fmt(c.re), fmt(c.im)]);
                }
                r.check(&format!("shell sum = gamma, character {}", chi.index()), Some(rep.max_dev), tol, ms(t0, p));
            }
            Err(e) => r.error(&format!("shells, character {}", chi.index()), e),
        }
    }
    r.artifact("shells", &rows);
    r.table = Some(Table { header: ["character", "ell", "re", "im"].map(String::from).to_vec(), rows });
}
