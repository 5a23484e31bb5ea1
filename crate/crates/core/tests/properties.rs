use mudecay_core::bounds::inverted_constants;
use mudecay_core::dirac::{vertex_contract, Spinor4};
use mudecay_core::fock::OccupationState;
use mudecay_core::kernels::linear_fit;
use mudecay_core::landau::{energy, spinor_u, LandauQN, ParticleParams};
use mudecay_core::neutrino::{spinor_u_numu, spinor_w_nubar_e};
use mudecay_core::SparseMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

fn spinor() -> impl Strategy<Value = Spinor4> {
    prop::array::uniform4(c64()).prop_map(Spinor4::new)
}

fn momentum() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-5.0f64..5.0).prop_filter("away from origin", |p| {
        p.iter().map(|x| x * x).sum::<f64>() > 1e-6
    })
}

fn sparse(dim: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec((0..dim, 0..dim, c64()), 0..20)
        .prop_map(move |t| SparseMatrix::from_triplets(dim, &t).unwrap())
}

proptest! {
    #[test]
    fn create_then_annihilate_is_identity(bits in 0u32..4096, j in 0usize..12) {
        let s = OccupationState(bits);
        if let Some((a, t)) = s.create(j) {
            let (b, u) = t.annihilate(j).unwrap();
            prop_assert_eq!(u, s);
            prop_assert_eq!(a * b, 1);
        } else {
            prop_assert!(s.occupied(j));
        }
    }

    #[test]
    fn sign_counts_lower_bits(bits in 0u32..4096, j in 0usize..12) {
        let below = (0..j).filter(|k| bits >> k & 1 == 1).count();
        let want = if below % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(OccupationState(bits).sign_below(j), want);
    }

    #[test]
    fn neutrino_spinors_are_unit(p in momentum()) {
        prop_assert!((spinor_u_numu(&p).unwrap().norm() - 1.0).abs() < 1e-14);
        prop_assert!((spinor_w_nubar_e(&p).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn landau_energy_grows_with_level(n in 0i64..20, p3 in -5.0f64..5.0, m in 0.1f64..3.0, eb in 0.1f64..3.0) {
        let pp = ParticleParams::new(m, eb).unwrap();
        let e0 = energy(&pp, n, p3).unwrap();
        prop_assert!(e0 >= m);
        prop_assert!(energy(&pp, n + 1, p3).unwrap() > e0);
        prop_assert_eq!(energy(&pp, n, -p3).unwrap(), e0);
    }

    #[test]
    fn spinors_finite(n in 0u32..12, p1 in -3.0f64..3.0, p3 in -3.0f64..3.0, x2 in -5.0f64..5.0) {
        let pp = ParticleParams::new(1.0, 1.0).unwrap();
        let qn = LandauQN::new(-1, n, p1, p3).unwrap();
        prop_assert!(spinor_u(&pp, &qn, x2).is_finite());
    }

    #[test]
    fn vertex_contract_is_bilinear(a in spinor(), b in spinor(), c in spinor(), d in spinor(), z in c64()) {
        let lhs = vertex_contract(&a, &b.scale(z), &c, &d);
        let rhs = vertex_contract(&a, &b, &c, &d) * z;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn adjoint_is_involution(m in sparse(8)) {
        prop_assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn commutator_is_antisymmetric(a in sparse(8), b in sparse(8)) {
        let s = a.commutator(&b).add(&b.commutator(&a));
        prop_assert!(s.max_abs() <= 1e-14);
    }

    #[test]
    fn inverted_constants_grow_with_coupling(a in 0.1f64..10.0, b in 0.1f64..10.0, u in 0.0f64..0.9) {
        let g = u / a;
        let (a1, b1) = inverted_constants(a, b, g);
        let (a2, b2) = inverted_constants(a, b, g * 1.05);
        prop_assert!(a1 >= 1.0);
        prop_assert!(a2 >= a1 && b2 >= b1);
    }

    #[test]
    fn linear_fit_recovers_lines(slope in -5.0f64..5.0, icpt in -5.0f64..5.0) {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + icpt).collect();
        let (s, i, r) = linear_fit(&xs, &ys);
        prop_assert!((s - slope).abs() < 1e-10 && (i - icpt).abs() < 1e-10 && r < 1e-10);
    }
}
