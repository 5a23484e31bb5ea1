//! Relativistic Landau-level eigenfunctions for charged fermions in a
//! uniform magnetic field along x^3 (Landau gauge, orbit centre p^1/eB).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dirac::Spinor4;
use crate::error::{Error, Result};
use crate::quadrature;

/// Quantum numbers (s, n, p^1, p^3) of a charged lepton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauQN {
    pub s: i8,
    pub n: u32,
    pub p1: f64,
    pub p3: f64,
}

impl LandauQN {
    pub fn new(s: i8, n: u32, p1: f64, p3: f64) -> Result<Self> {
        if s != 1 && s != -1 {
            return Err(Error::invalid(format!(
                "spin sign must be +1 or -1, got {s}"
            )));
        }
        if !p1.is_finite() || !p3.is_finite() {
            return Err(Error::invalid("non-finite Landau momentum"));
        }
        Ok(LandauQN { s, n, p1, p3 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleParams {
    pub mass: f64,
    pub eb: f64,
}

impl ParticleParams {
    pub fn new(mass: f64, eb: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        if !(eb > 0.0 && eb.is_finite()) {
            return Err(Error::invalid(format!("eB must be positive, got {eb}")));
        }
        Ok(ParticleParams { mass, eb })
    }

    /// Magnetic length (eB)^{-1/2}.
    pub fn magnetic_length(&self) -> f64 {
        self.eb.sqrt().recip()
    }
}

/// Dimensionless oscillator coordinate xi = sqrt(eB) (x^2 - p^1/eB).
pub fn xi(eb: f64, x2: f64, p1: f64) -> f64 {
    eb.sqrt() * (x2 - p1 / eb)
}

/// I_0..I_{n_max} at one point via the normalised recurrence.
pub fn hermite_fns(n_max: usize, xi: f64, eb: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let scale = eb.powf(0.25);
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(scale * cur);
    for n in 0..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(scale * cur);
    }
    out
}

/// Normalised Hermite function I_n(xi), with I_{-1} = 0.
pub fn hermite_fn(n: i64, xi: f64, eb: f64) -> Result<f64> {
    match n {
        n if n < -1 => Err(Error::invalid(format!(
            "Hermite index must be >= -1, got {n}"
        ))),
        -1 => Ok(0.0),
        n => Ok(*hermite_fns(n as usize, xi, eb).last().expect("nonempty")),
    }
}

/// E_n(p^3) = sqrt(m^2 + (p^3)^2 + 2 n eB).
pub fn energy(params: &ParticleParams, n: i64, p3: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::invalid(format!(
            "Landau level must be >= 0, got {n}"
        )));
    }
    Ok(energy_unchecked(params, n as u32, p3))
}

pub(crate) fn energy_unchecked(params: &ParticleParams, n: u32, p3: f64) -> f64 {
    (params.mass * params.mass + p3 * p3 + 2.0 * n as f64 * params.eb).sqrt()
}

struct Pieces {
    pref: f64,
    a: f64, // p3 / (E + m)
    b: f64, // sqrt(2 n eB) / (E + m)
    i_n: f64,
    i_nm1: f64,
}

fn pieces(params: &ParticleParams, n: u32, p1: f64, p3: f64, x2: f64) -> Pieces {
    let e = energy_unchecked(params, n, p3);
    let em = e + params.mass;
    let x = xi(params.eb, x2, p1);
    let h = hermite_fns(n as usize, x, params.eb);
    Pieces {
        pref: (em / (2.0 * e)).sqrt(),
        a: p3 / em,
        b: (2.0 * n as f64 * params.eb).sqrt() / em,
        i_n: h[n as usize],
        i_nm1: if n == 0 { 0.0 } else { h[n as usize - 1] },
    }
}

fn real_spinor(pref: f64, c: [f64; 4]) -> Spinor4 {
    Spinor4::new(c.map(|x| C64::new(pref * x, 0.0)))
}

/// Particle spinor U_s(x^2, n, p^1, p^3); zero for s = +1, n = 0.
pub fn spinor_u(params: &ParticleParams, qn: &LandauQN, x2: f64) -> Spinor4 {
    if qn.s == 1 && qn.n == 0 {
        return Spinor4::zero();
    }
    let q = pieces(params, qn.n, qn.p1, qn.p3, x2);
    if qn.s == 1 {
        real_spinor(q.pref, [q.i_nm1, 0.0, q.a * q.i_nm1, -q.b * q.i_n])
    } else {
        real_spinor(q.pref, [0.0, q.i_n, -q.b * q.i_nm1, -q.a * q.i_n])
    }
}

/// Charge-conjugate partner V_s(x^2, n, p^1, p^3); zero for s = +1, n = 0.
pub fn spinor_v(params: &ParticleParams, qn: &LandauQN, x2: f64) -> Spinor4 {
    if qn.s == 1 && qn.n == 0 {
        return Spinor4::zero();
    }
    let q = pieces(params, qn.n, qn.p1, qn.p3, x2);
    if qn.s == 1 {
        real_spinor(q.pref, [-q.a * q.i_nm1, q.b * q.i_n, q.i_nm1, 0.0])
    } else {
        real_spinor(q.pref, [q.b * q.i_nm1, q.a * q.i_n, 0.0, q.i_n])
    }
}

/// Antimuon spinor: the V spinor at reflected momenta with the spin label
/// swapped (s = +1 uses V_{-1}, s = -1 uses V_{+1}).
pub fn spinor_w_mu(params: &ParticleParams, qn: &LandauQN, x2: f64) -> Spinor4 {
    let flipped = LandauQN {
        s: -qn.s,
        n: qn.n,
        p1: -qn.p1,
        p3: -qn.p3,
    };
    spinor_v(params, &flipped, x2)
}

/// Orbit centre in x^2 of the U spinor (the W spinor sits at the mirror point).
pub fn orbit_centre(params: &ParticleParams, p1: f64) -> f64 {
    p1 / params.eb
}

/// Sorted threshold set {sqrt(m^2 + 2 n eB)} for both masses, n = 0..=n_max,
/// with values equal to 1e-12 relative merged.
pub fn thresholds(e: &ParticleParams, mu: &ParticleParams, n_max: u32) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=n_max)
        .flat_map(|n| [energy_unchecked(e, n, 0.0), energy_unchecked(mu, n, 0.0)])
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    out
}

/// Gauss-Hermite rule in x^2 around `centre`, with the Gaussian weight
/// already divided out: `sum w_i f(x_i)` approximates `int f dx^2` for
/// integrands decaying like exp(-eB (x^2 - centre)^2).
pub fn x2_rule(eb: f64, centre: f64, nodes: usize) -> Result<quadrature::Rule> {
    let gh = quadrature::gauss_hermite(nodes)?;
    let ell = eb.sqrt().recip();
    Ok(quadrature::Rule {
        nodes: gh.nodes.iter().map(|y| centre + ell * y).collect(),
        weights: gh.iter().map(|(y, w)| ell * w * (y * y).exp()).collect(),
    })
}

/// int U_s(x^2, xi)^dag U_s'(x^2, xi') dx^2 with the quadrature of `x2_rule`.
pub fn overlap<F, G>(rule: &quadrature::Rule, a: F, b: G) -> C64
where
    F: Fn(f64) -> Spinor4,
    G: Fn(f64) -> Spinor4,
{
    rule.iter().map(|(x, w)| a(x).dot(&b(x)) * w).sum()
}

/// Largest deviation of the U, V and W overlap matrices from their targets
/// over levels 0..=n_max, both spins and the given (p^1, p^3) pairs. Null
/// spinors have target 0.
pub fn orthonormality_deviation(
    params: &ParticleParams,
    n_max: u32,
    momenta: &[(f64, f64)],
    nodes: usize,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(p1, p3) in momenta {
        let rule = x2_rule(params.eb, orbit_centre(params, p1), nodes)?;
        let wrule = x2_rule(params.eb, orbit_centre(params, -p1), nodes)?;
        for n in 0..=n_max {
            for m in 0..=n_max {
                for s in [-1i8, 1] {
                    for t in [-1i8, 1] {
                        let a = LandauQN::new(s, n, p1, p3)?;
                        let b = LandauQN::new(t, m, p1, p3)?;
                        let target = |null: i8| {
                            let zero = (s == null && n == 0) || (t == null && m == 0);
                            if s == t && n == m && !zero {
                                1.0
                            } else {
                                0.0
                            }
                        };
                        let uu = overlap(
                            &rule,
                            |x| spinor_u(params, &a, x),
                            |x| spinor_u(params, &b, x),
                        );
                        let vv = overlap(
                            &rule,
                            |x| spinor_v(params, &a, x),
                            |x| spinor_v(params, &b, x),
                        );
                        let ww = overlap(
                            &wrule,
                            |x| spinor_w_mu(params, &a, x),
                            |x| spinor_w_mu(params, &b, x),
                        );
                        worst = worst
                            .max((uu - target(1)).norm())
                            .max((vv - target(1)).norm())
                            .max((ww - target(-1)).norm());
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> ParticleParams {
        ParticleParams::new(1.0, 1.3).unwrap()
    }

    #[test]
    fn hermite_special_values() {
        assert_eq!(hermite_fn(-1, 0.7, 1.0).unwrap(), 0.0);
        let v = hermite_fn(0, 0.0, 1.0).unwrap();
        assert!((v - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert!(hermite_fn(-2, 0.0, 1.0).is_err());
    }

    #[test]
    fn hermite_matches_factorial_formula_at_low_order() {
        // H_3(x) = 8x^3 - 12x, norm (2^3 3! sqrt(pi))^{-1/2}
        let x: f64 = 0.83;
        let h3 = 8.0 * x.powi(3) - 12.0 * x;
        let want = h3 * (-x * x / 2.0).exp() / (48.0 * std::f64::consts::PI.sqrt()).sqrt();
        assert!((hermite_fn(3, x, 1.0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn hermite_recurrence_identity() {
        for &x in &[-3.0, -0.4, 0.0, 1.1, 5.5] {
            let h = hermite_fns(30, x, 2.0);
            for n in 1..30 {
                let nf = n as f64;
                let rhs =
                    x * (2.0 / (nf + 1.0)).sqrt() * h[n] - (nf / (nf + 1.0)).sqrt() * h[n - 1];
                assert!((h[n + 1] - rhs).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hermite_orthonormal_in_x2() {
        let eb = 1.7;
        let rule = x2_rule(eb, 0.4, 64).unwrap();
        let p1 = 0.4 * eb;
        for n in 0..=8 {
            for m in 0..=8 {
                let s: f64 = rule
                    .iter()
                    .map(|(x, w)| {
                        let h = hermite_fns(8, xi(eb, x, p1), eb);
                        w * h[n] * h[m]
                    })
                    .sum();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12, "{n},{m}: {s}");
            }
        }
    }

    #[test]
    fn energies() {
        let p = ParticleParams::new(1.0, 1.0).unwrap();
        assert_eq!(energy(&p, 0, 0.0).unwrap(), 1.0);
        let p = ParticleParams::new(0.511, 1.0).unwrap();
        let e = energy(&p, 1, 0.0).unwrap();
        assert!((e - (0.511f64.powi(2) + 2.0).sqrt()).abs() < 1e-15);
        assert!(energy(&p, -1, 0.0).is_err());
    }

    #[test]
    fn zero_conventions() {
        let p = params();
        let up0 = LandauQN::new(1, 0, 0.3, 0.2).unwrap();
        assert!(spinor_u(&p, &up0, 0.1).is_zero());
        assert!(spinor_v(&p, &up0, 0.1).is_zero());
        let dn0 = LandauQN::new(-1, 0, 0.3, 0.2).unwrap();
        assert!(spinor_w_mu(&p, &dn0, 0.1).is_zero());
        assert!(!spinor_w_mu(&p, &up0, 0.1).is_zero());
    }

    #[test]
    fn lowest_level_structure() {
        let p = params();
        let qn = LandauQN::new(-1, 0, 0.5, 0.0).unwrap();
        let u = spinor_u(&p, &qn, 0.2);
        assert_eq!(u.c[0], C64::new(0.0, 0.0));
        assert_eq!(u.c[2].norm(), 0.0);
        assert_eq!(u.c[3].norm(), 0.0);
        assert!(u.c[1].norm() > 0.0);
    }

    #[test]
    fn spinor_orthonormality() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let p1 = rng.gen_range(-2.0..2.0);
            let p3 = rng.gen_range(-2.0..2.0);
            let rule = x2_rule(p.eb, orbit_centre(&p, p1), 64).unwrap();
            let wrule = x2_rule(p.eb, orbit_centre(&p, -p1), 64).unwrap();
            for n in 0..=5u32 {
                for m in 0..=5u32 {
                    for s in [-1i8, 1] {
                        for t in [-1i8, 1] {
                            let a = LandauQN::new(s, n, p1, p3).unwrap();
                            let b = LandauQN::new(t, m, p1, p3).unwrap();
                            let zero = (s == 1 && n == 0) || (t == 1 && m == 0);
                            let want = if s == t && n == m && !zero { 1.0 } else { 0.0 };
                            let uu =
                                overlap(&rule, |x| spinor_u(&p, &a, x), |x| spinor_u(&p, &b, x));
                            let vv =
                                overlap(&rule, |x| spinor_v(&p, &a, x), |x| spinor_v(&p, &b, x));
                            assert!((uu - want).norm() < 1e-10);
                            assert!((vv - want).norm() < 1e-10);
                            let zw = (s == -1 && n == 0) || (t == -1 && m == 0);
                            let want_w = if s == t && n == m && !zw { 1.0 } else { 0.0 };
                            let ww = overlap(
                                &wrule,
                                |x| spinor_w_mu(&p, &a, x),
                                |x| spinor_w_mu(&p, &b, x),
                            );
                            assert!((ww - want_w).norm() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_set() {
        let e = ParticleParams::new(1.0, 1.5).unwrap();
        let mu = ParticleParams::new(2.0, 1.5).unwrap();
        assert_eq!(thresholds(&e, &mu, 0), vec![1.0, 2.0]);
        let t = thresholds(&e, &mu, 1);
        assert_eq!(t.len(), 3);
        assert!((t[2] - 7f64.sqrt()).abs() < 1e-15);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ParticleParams::new(0.0, 1.0).is_err());
        assert!(ParticleParams::new(1.0, -1.0).is_err());
        assert!(LandauQN::new(0, 0, 0.0, 0.0).is_err());
    }
}
