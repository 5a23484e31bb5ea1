//! Dirac matrices in the standard representation and the V-A vertex
//! contraction.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Minkowski metric diag(+1, -1, -1, -1).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// A 4x4 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat4 {
    pub const fn zero() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    pub fn apply(&self, v: &Spinor4) -> Spinor4 {
        let mut out = Spinor4::zero();
        for i in 0..4 {
            out.c[i] = (0..4).map(|j| self.0[i][j] * v.c[j]).sum();
        }
        out
    }

    /// Largest absolute entry, used for exactness checks.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// Operator (spectral) norm: square root of the top eigenvalue of A^dag A.
    pub fn operator_norm(&self) -> f64 {
        let ata = self.adjoint() * *self;
        let m = faer::Mat::<C64>::from_fn(4, 4, |i, j| ata.0[i][j]);
        let ev = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("4x4 Hermitian eigenvalues");
        ev.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        let mut out = self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        self + (-rhs)
    }
}

impl Neg for Mat4 {
    type Output = Mat4;
    fn neg(self) -> Mat4 {
        self.scale(-ONE)
    }
}

/// A four-component complex spinor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spinor4 {
    pub c: [C64; 4],
}

impl Spinor4 {
    pub const fn zero() -> Self {
        Spinor4 { c: [ZERO; 4] }
    }

    pub fn new(c: [C64; 4]) -> Self {
        Spinor4 { c }
    }

    pub fn from_real(r: [f64; 4]) -> Self {
        Spinor4 {
            c: r.map(|x| C64::new(x, 0.0)),
        }
    }

    /// Hermitian inner product a^dag b (conjugate-linear in `self`).
    pub fn dot(&self, other: &Spinor4) -> C64 {
        (0..4).map(|i| self.c[i].conj() * other.c[i]).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| *x == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub fn scale(&self, s: C64) -> Spinor4 {
        Spinor4 {
            c: self.c.map(|x| x * s),
        }
    }

    pub fn conj(&self) -> Spinor4 {
        Spinor4 {
            c: self.c.map(|x| x.conj()),
        }
    }
}

impl Add for Spinor4 {
    type Output = Spinor4;
    fn add(self, rhs: Spinor4) -> Spinor4 {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(rhs.c) {
            *x += y;
        }
        Spinor4 { c }
    }
}

impl Index<usize> for Spinor4 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.c[i]
    }
}

/// The four gamma matrices and gamma_5.
#[derive(Debug, Clone)]
pub struct GammaSet {
    pub gamma: [Mat4; 4],
    pub gamma5: Mat4,
    pub metric: [f64; 4],
}

fn pauli(k: usize) -> [[C64; 2]; 2] {
    match k {
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => [[ONE, ZERO], [ZERO, ONE]],
    }
}

/// Pauli matrix sigma_k for k = 1, 2, 3 (k = 0 gives the identity).
pub fn sigma(k: usize) -> [[C64; 2]; 2] {
    pauli(k)
}

fn blocks(tl: [[C64; 2]; 2], tr: [[C64; 2]; 2], bl: [[C64; 2]; 2], br: [[C64; 2]; 2]) -> Mat4 {
    let mut m = Mat4::zero();
    for i in 0..2 {
        for j in 0..2 {
            m.0[i][j] = tl[i][j];
            m.0[i][j + 2] = tr[i][j];
            m.0[i + 2][j] = bl[i][j];
            m.0[i + 2][j + 2] = br[i][j];
        }
    }
    m
}

fn neg2(a: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    a.map(|r| r.map(|x| -x))
}

impl GammaSet {
    /// Dirac (standard) representation.
    pub fn standard() -> Self {
        let z = [[ZERO; 2]; 2];
        let id = pauli(0);
        let g0 = blocks(id, z, z, neg2(id));
        let gi = |k| blocks(z, pauli(k), neg2(pauli(k)), z);
        GammaSet {
            gamma: [g0, gi(1), gi(2), gi(3)],
            gamma5: blocks(z, id, id, z),
            metric: METRIC,
        }
    }

    /// gamma^0 gamma^alpha (1 - gamma_5), the matrix sandwiched in each current.
    pub fn current_matrix(&self, alpha: usize) -> Mat4 {
        self.gamma[0] * self.gamma[alpha] * (Mat4::identity() - self.gamma5)
    }

    /// Same with the lowered index gamma_alpha = eta_{alpha alpha} gamma^alpha.
    pub fn current_matrix_lower(&self, alpha: usize) -> Mat4 {
        self.current_matrix(alpha)
            .scale(C64::new(self.metric[alpha], 0.0))
    }
}

fn currents() -> &'static [Mat4; 4] {
    static CURRENTS: OnceLock<[Mat4; 4]> = OnceLock::new();
    CURRENTS.get_or_init(|| {
        let g = GammaSet::standard();
        [0, 1, 2, 3].map(|a| g.current_matrix(a))
    })
}

fn bilinear(m: &Mat4, a: &Spinor4, b: &Spinor4) -> C64 {
    let mut acc = ZERO;
    for i in 0..4 {
        let ai = a.c[i].conj();
        if ai == ZERO {
            continue;
        }
        let row: C64 = (0..4).map(|j| m.0[i][j] * b.c[j]).sum();
        acc += ai * row;
    }
    acc
}

/// sum_alpha eta_{alpha alpha} (a^dag g0 g^alpha (1-g5) b)(c^dag g0 g^alpha (1-g5) d)
pub fn vertex_contract(a: &Spinor4, b: &Spinor4, c: &Spinor4, d: &Spinor4) -> C64 {
    let m = currents();
    (0..4)
        .map(|alpha| bilinear(&m[alpha], a, b) * bilinear(&m[alpha], c, d) * METRIC[alpha])
        .sum()
}

/// Largest entry-wise violation of {g^a, g^b} = 2 eta^{ab}, {g^a, g5} = 0,
/// g5 = i g0 g1 g2 g3 and g5^2 = 1.
pub fn clifford_deviation() -> f64 {
    let g = GammaSet::standard();
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let ac = g.gamma[a] * g.gamma[b] + g.gamma[b] * g.gamma[a];
            let target = if a == b {
                Mat4::identity().scale(C64::new(2.0 * METRIC[a], 0.0))
            } else {
                Mat4::zero()
            };
            worst = worst.max((ac - target).max_abs());
        }
        worst = worst.max((g.gamma[a] * g.gamma5 + g.gamma5 * g.gamma[a]).max_abs());
    }
    let g5 = (g.gamma[0] * g.gamma[1] * g.gamma[2] * g.gamma[3]).scale(I);
    worst
        .max((g5 - g.gamma5).max_abs())
        .max((g.gamma5 * g.gamma5 - Mat4::identity()).max_abs())
}

/// Sum over alpha of the operator-norm products of the lowered and raised
/// current matrices.
pub fn c_constant() -> f64 {
    let g = GammaSet::standard();
    (0..4)
        .map(|a| g.current_matrix_lower(a).operator_norm() * g.current_matrix(a).operator_norm())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spinor(rng: &mut ChaCha8Rng) -> Spinor4 {
        Spinor4::new(std::array::from_fn(|_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }))
    }

    /// Entry-level reference: builds every product with explicit index loops.
    fn reference_contract(a: &Spinor4, b: &Spinor4, c: &Spinor4, d: &Spinor4) -> C64 {
        let g = GammaSet::standard();
        let one_minus_g5 = |i: usize, j: usize| {
            let id = if i == j { ONE } else { ZERO };
            id - g.gamma5.0[i][j]
        };
        let mut total = ZERO;
        for alpha in 0..4 {
            let mut m = [[ZERO; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            m[i][j] +=
                                g.gamma[0].0[i][k] * g.gamma[alpha].0[k][l] * one_minus_g5(l, j);
                        }
                    }
                }
            }
            let mut x = ZERO;
            let mut y = ZERO;
            for i in 0..4 {
                for j in 0..4 {
                    x += a.c[i].conj() * m[i][j] * b.c[j];
                    y += c.c[i].conj() * m[i][j] * d.c[j];
                }
            }
            total += x * y * g.metric[alpha];
        }
        total
    }

    #[test]
    fn clifford_deviation_is_tiny() {
        assert!(clifford_deviation() <= 1e-15);
    }

    #[test]
    fn clifford_relations() {
        let g = GammaSet::standard();
        for a in 0..4 {
            for b in 0..4 {
                let ac = g.gamma[a] * g.gamma[b] + g.gamma[b] * g.gamma[a];
                let target = if a == b {
                    Mat4::identity().scale(C64::new(2.0 * METRIC[a], 0.0))
                } else {
                    Mat4::zero()
                };
                assert!((ac - target).max_abs() <= 1e-15, "{a},{b}");
            }
            let anti = g.gamma[a] * g.gamma5 + g.gamma5 * g.gamma[a];
            assert!(anti.max_abs() <= 1e-15);
        }
        let g5 = (g.gamma[0] * g.gamma[1] * g.gamma[2] * g.gamma[3]).scale(I);
        assert!((g5 - g.gamma5).max_abs() <= 1e-15);
        assert!((g.gamma5 * g.gamma5 - Mat4::identity()).max_abs() <= 1e-15);
    }

    #[test]
    fn one_minus_gamma5_norm_is_two() {
        let g = GammaSet::standard();
        let n = (Mat4::identity() - g.gamma5).operator_norm();
        assert!((n - 2.0).abs() < 1e-14);
    }

    #[test]
    fn per_alpha_factors_are_two() {
        let g = GammaSet::standard();
        for a in 0..4 {
            assert!((g.current_matrix(a).operator_norm() - 2.0).abs() < 1e-13);
            assert!((g.current_matrix_lower(a).operator_norm() - 2.0).abs() < 1e-13);
        }
        assert!((c_constant() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn zero_spinors_give_zero() {
        let z = Spinor4::zero();
        assert_eq!(vertex_contract(&z, &z, &z, &z), ZERO);
    }

    #[test]
    fn first_basis_vector_matches_reference() {
        let e1 = Spinor4::from_real([1.0, 0.0, 0.0, 0.0]);
        let got = vertex_contract(&e1, &e1, &e1, &e1);
        let want = reference_contract(&e1, &e1, &e1, &e1);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn random_quadruples_match_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s: [Spinor4; 4] = std::array::from_fn(|_| random_spinor(&mut rng));
            let got = vertex_contract(&s[0], &s[1], &s[2], &s[3]);
            let want = reference_contract(&s[0], &s[1], &s[2], &s[3]);
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-300));
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s: [Spinor4; 4] = std::array::from_fn(|_| random_spinor(&mut rng));
            let lhs = vertex_contract(&s[1], &s[0], &s[3], &s[2]);
            let rhs = vertex_contract(&s[0], &s[1], &s[2], &s[3]).conj();
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }
}
