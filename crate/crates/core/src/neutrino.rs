//! Massless helicity spinors: left-handed muon neutrino and right-handed
//! electron antineutrino.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dirac::Spinor4;
use crate::error::{Error, Result};

/// Momentum quantum numbers of a neutrino mode; helicity is fixed by species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumQN {
    pub p: [f64; 3],
    pub helicity: f64,
}

impl MomentumQN {
    pub fn norm(&self) -> f64 {
        norm3(&self.p)
    }
}

pub fn norm3(p: &[f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Below this ratio (denominator / |p|^2) the closed form is replaced by the
/// on-axis constant spinor.
pub const AXIS_CUTOFF: f64 = 1e-24;

fn check(p: &[f64; 3]) -> Result<f64> {
    if !p.iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("non-finite neutrino momentum"));
    }
    let r = norm3(p);
    if r == 0.0 {
        return Err(Error::invalid("helicity undefined at p = 0"));
    }
    Ok(r)
}

/// |p| - p3 computed without cancellation.
fn minus_gap(p: &[f64; 3], r: f64) -> f64 {
    let rho2 = p[0] * p[0] + p[1] * p[1];
    if p[2] > 0.0 {
        rho2 / (r + p[2])
    } else {
        r - p[2]
    }
}

/// |p| + p3 computed without cancellation.
fn plus_gap(p: &[f64; 3], r: f64) -> f64 {
    let rho2 = p[0] * p[0] + p[1] * p[1];
    if p[2] < 0.0 {
        rho2 / (r - p[2])
    } else {
        r + p[2]
    }
}

/// Negative-helicity two-spinor h_-(p).
pub fn h_minus(p: &[f64; 3]) -> Result<[C64; 2]> {
    let r = check(p)?;
    let gap = minus_gap(p, r);
    let den = 2.0 * r * gap;
    if den <= AXIS_CUTOFF * r * r {
        return Ok([C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    }
    let s = den.sqrt().recip();
    Ok([C64::new(-gap * s, 0.0), C64::new(p[0] * s, p[1] * s)])
}

/// Positive-helicity two-spinor along -p, h_+(-p).
pub fn h_plus_reflected(p: &[f64; 3]) -> Result<[C64; 2]> {
    let r = check(p)?;
    let gap = plus_gap(p, r);
    let den = 2.0 * r * gap;
    if den <= AXIS_CUTOFF * r * r {
        return Ok([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    }
    let s = den.sqrt().recip();
    Ok([C64::new(-p[0] * s, p[1] * s), C64::new(gap * s, 0.0)])
}

/// U for the muon neutrino: (h_-, -h_-)/sqrt(2).
pub fn spinor_u_numu(p: &[f64; 3]) -> Result<Spinor4> {
    let h = h_minus(p)?;
    let k = std::f64::consts::FRAC_1_SQRT_2;
    Ok(Spinor4::new([h[0] * k, h[1] * k, -h[0] * k, -h[1] * k]))
}

/// W for the electron antineutrino: (-h_+(-p), h_+(-p))/sqrt(2).
pub fn spinor_w_nubar_e(p: &[f64; 3]) -> Result<Spinor4> {
    let h = h_plus_reflected(p)?;
    let k = std::f64::consts::FRAC_1_SQRT_2;
    Ok(Spinor4::new([-h[0] * k, -h[1] * k, h[0] * k, h[1] * k]))
}

/// (sigma . n) applied to a two-spinor.
pub fn sigma_dot(n: &[f64; 3], h: &[C64; 2]) -> [C64; 2] {
    let a = C64::new(n[0], -n[1]);
    let b = C64::new(n[0], n[1]);
    [h[0] * n[2] + a * h[1], b * h[0] - h[1] * n[2]]
}

/// Largest |norm - 1| of both neutrino spinors over the given momenta.
pub fn norm_deviation(momenta: &[[f64; 3]]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in momenta {
        worst = worst
            .max((spinor_u_numu(p)?.norm() - 1.0).abs())
            .max((spinor_w_nubar_e(p)?.norm() - 1.0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_p(rng: &mut ChaCha8Rng) -> [f64; 3] {
        std::array::from_fn(|_| rng.gen_range(-3.0..3.0))
    }

    fn unit(p: &[f64; 3]) -> [f64; 3] {
        let r = norm3(p);
        p.map(|x| x / r)
    }

    #[test]
    fn axis_special_cases() {
        let u = spinor_u_numu(&[0.0, 0.0, 1.0]).unwrap();
        let k = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(u.c[1], C64::new(k, 0.0));
        assert_eq!(u.c[3], C64::new(-k, 0.0));
        assert_eq!(u.c[0].norm() + u.c[2].norm(), 0.0);
        let w = spinor_w_nubar_e(&[0.0, 0.0, -1.0]).unwrap();
        assert_eq!(w.c[0], C64::new(-k, 0.0));
        assert_eq!(w.c[2], C64::new(k, 0.0));
    }

    #[test]
    fn rejects_zero_momentum() {
        assert!(spinor_u_numu(&[0.0; 3]).is_err());
        assert!(spinor_w_nubar_e(&[0.0; 3]).is_err());
    }

    #[test]
    fn unit_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = random_p(&mut rng);
            assert!((spinor_u_numu(&p).unwrap().norm() - 1.0).abs() <= 1e-14);
            assert!((spinor_w_nubar_e(&p).unwrap().norm() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn helicity_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p = random_p(&mut rng);
            let n = unit(&p);
            let hm = h_minus(&p).unwrap();
            let got = sigma_dot(&n, &hm);
            for i in 0..2 {
                assert!((got[i] * 0.5 + hm[i] * 0.5).norm() < 1e-12);
            }
            let hp = h_plus_reflected(&p).unwrap();
            let got = sigma_dot(&n.map(|x| -x), &hp);
            for i in 0..2 {
                assert!((got[i] * 0.5 - hp[i] * 0.5).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn continuity_near_negative_axis() {
        let axis = spinor_w_nubar_e(&[0.0, 0.0, -1.0]).unwrap();
        let mut last = f64::INFINITY;
        for k in 2..9 {
            let eps = 10f64.powi(-k);
            let w = spinor_w_nubar_e(&[eps, 0.0, -1.0]).unwrap();
            // compare up to a global phase
            let overlap = axis.dot(&w).norm();
            let dev = 1.0 - overlap;
            assert!(dev <= last + 1e-15);
            last = dev;
        }
        assert!(last < 1e-14);
    }

    #[test]
    fn stable_near_positive_axis() {
        let u = spinor_u_numu(&[1e-9, -2e-9, 5.0]).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-14);
    }
}
