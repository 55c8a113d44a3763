use lwkit::grid::{inner_product, make_grid, symplectic_form, PhasePoint, C64};
use lwkit::landau::landau_translation;
use lwkit::special::{hermite_fn, landau_eigenfunction};
use lwkit::transforms::{wavepacket, ScalingParams, Window};
use lwkit::weyl::{heisenberg_weyl, weyl_quantize, Symbol};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-1.5f64..1.5, -1.5f64..1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symplectic_form_is_antisymmetric_and_bilinear(a in point(), b in point(), c in point(), s in -3.0f64..3.0) {
        let p = |(x, y): (f64, f64)| PhasePoint::xy(x, y);
        let ab = symplectic_form(&p(a), &p(b)).unwrap();
        prop_assert!((ab + symplectic_form(&p(b), &p(a)).unwrap()).abs() < 1e-12);
        prop_assert!(symplectic_form(&p(a), &p(a)).unwrap().abs() < 1e-12);
        let sum = p((s * a.0 + c.0, s * a.1 + c.1));
        let lhs = symplectic_form(&sum, &p(b)).unwrap();
        prop_assert!((lhs - s * ab - symplectic_form(&p(c), &p(b)).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn heisenberg_weyl_cocycle_and_unitarity(a in point(), b in point(), k in 0usize..3) {
        let g = make_grid(1, 10.0, 256, 1.0).unwrap();
        let psi = hermite_fn(k, &g).unwrap();
        let (z1, z2) = (PhasePoint::xy(a.0, a.1), PhasePoint::xy(b.0, b.1));
        let sigma = symplectic_form(&z1, &z2).unwrap();
        let lhs = heisenberg_weyl(&PhasePoint::xy(a.0 + b.0, a.1 + b.1), &psi).unwrap();
        let rhs = heisenberg_weyl(&z1, &heisenberg_weyl(&z2, &psi).unwrap()).unwrap().scaled(C64::from_polar(1.0, -sigma / 2.0));
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-9);
        prop_assert!((lhs.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn real_quadratic_symbols_quantize_to_hermitian_matrices(a in -2.0f64..2.0, b in -1.0f64..1.0, c in -2.0f64..2.0) {
        let g = make_grid(1, 6.0, 48, 1.0).unwrap();
        let m = weyl_quantize(&Symbol::quadratic([[a, b], [b, c]]).unwrap(), &g).unwrap();
        prop_assert!(m.hermitian_deviation() < 1e-10);
    }

    #[test]
    fn wavepacket_transform_is_isometric(gamma in 0.8f64..1.4, mu in 0.8f64..1.4, sign in prop::bool::ANY, k in 0usize..3) {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let phase = make_grid(2, 12.0, 96, 1.0).unwrap();
        let phi = Window::new(hermite_fn(0, &g).unwrap()).unwrap();
        let gamma = if sign { -gamma } else { gamma };
        let u = wavepacket(&hermite_fn(k, &g).unwrap(), &phi, ScalingParams::new(gamma, mu).unwrap(), &phase).unwrap();
        prop_assert!((u.norm() - 1.0).abs() < 1e-9, "norm {}", u.norm());
    }

    #[test]
    fn landau_translations_preserve_inner_products(a in point(), j in 0usize..3, k in 0usize..3) {
        let g = make_grid(2, 12.0, 96, 1.0).unwrap();
        let (f, h) = (landau_eigenfunction(j, k, &g).unwrap(), landau_eigenfunction(k, j, &g).unwrap());
        let z0 = PhasePoint::xy(a.0, a.1);
        let p = ScalingParams::unit();
        let before = inner_product(&f, &h).unwrap();
        let after = inner_product(&landau_translation(&z0, &f, p).unwrap(), &landau_translation(&z0, &h, p).unwrap()).unwrap();
        prop_assert!((after - before).norm() < 1e-9);
    }
}
