use glv_core::gauge::LinkField;
use glv_core::glop::{apply_jacobian, residual};
use glv_core::grid::{inner_complex, inner_real};
use glv_core::guess;
use glv_core::postproc::total_vorticity;
use glv_core::symmetry::{act, invariance_defect, project_fixed_space, GroupElement, Subgroup};
use glv_core::{free_energy, full_energy, vortex_census, Grid, OrderField, D4};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(n: usize, seed: u64) -> OrderField {
    let g = Grid::new(3.0, n).unwrap();
    OrderField::random(g, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn element() -> impl Strategy<Value = D4> {
    (any::<bool>(), 0u8..4).prop_map(|(r, k)| D4::new(r, k))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inner_real_is_an_inner_product(n in (2usize..6).prop_map(|k| 2 * k), seed in any::<u64>(), a in -3.0f64..3.0) {
        let x = field(n, seed);
        let y = field(n, seed ^ 1);
        let z = field(n, seed ^ 2);
        prop_assert!(close(inner_real(&x, &y).unwrap(), inner_real(&y, &x).unwrap(), 1e-14));
        let lhs = inner_real(&x.add_scaled(Complex64::new(a, 0.0), &z).unwrap(), &y).unwrap();
        let rhs = inner_real(&x, &y).unwrap() + a * inner_real(&z, &y).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
        prop_assert!(inner_real(&x, &x).unwrap() > 0.0);
    }

    #[test]
    fn weights_integrate_constants(d in 0.5f64..8.0, n in (1usize..20).prop_map(|k| 2 * k)) {
        let g = Grid::new(d, n).unwrap();
        let one = OrderField::constant(g, Complex64::new(1.0, 0.0));
        let v = inner_complex(&one, &one).unwrap();
        prop_assert!(close(v.re, d * d, 1e-13) && v.im == 0.0);
    }

    #[test]
    fn plaquettes_carry_uniform_flux(n in (2usize..8).prop_map(|k| 2 * k), mu in -2.0f64..2.0) {
        let g = Grid::new(3.0, n).unwrap();
        let links = LinkField::new(g, mu);
        let want = Complex64::from_polar(1.0, -mu * g.h() * g.h());
        let half = g.half();
        for j in -half..half {
            for i in -half..half {
                prop_assert!((links.plaquette(i, j) - want).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn gauge_transform_preserves_residual_modulus(n in (2usize..6).prop_map(|k| 2 * k), seed in any::<u64>(), mu in -1.5f64..1.5) {
        let psi = field(n, seed);
        let g = *psi.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let chi: Vec<f64> = OrderField::random(g, &mut rng).values().iter().map(|z| 3.0 * z.re).collect();
        let moved = OrderField::from_values(
            g,
            psi.values().iter().zip(&chi).map(|(z, c)| z * Complex64::from_polar(1.0, *c)).collect(),
        ).unwrap();
        let links = LinkField::new(g, mu);
        let r0 = residual(&psi, &links).unwrap();
        let r1 = residual(&moved, &links.gauge_transformed(&chi).unwrap()).unwrap();
        let scale = r0.max_abs().max(1.0);
        for (a, b) in r0.values().iter().zip(r1.values()) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn jacobian_is_self_adjoint(n in (2usize..6).prop_map(|k| 2 * k), seed in any::<u64>(), mu in -1.5f64..1.5) {
        let psi = field(n, seed);
        let a = field(n, seed ^ 3);
        let b = field(n, seed ^ 5);
        let links = LinkField::new(*psi.grid(), mu);
        let jb = apply_jacobian(&psi, &b, &links).unwrap();
        let ja = apply_jacobian(&psi, &a, &links).unwrap();
        let lhs = inner_real(&a, &jb).unwrap();
        let rhs = inner_real(&ja, &b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * a.norm() * jb.norm());
    }

    #[test]
    fn residual_is_half_the_energy_gradient(n in (2usize..5).prop_map(|k| 2 * k), seed in any::<u64>(), mu in -1.0f64..1.0) {
        let psi = field(n, seed);
        let dir = field(n, seed ^ 11);
        let links = LinkField::new(*psi.grid(), mu);
        let eps = 1e-5;
        let e = |s: f64| full_energy(&psi.add_scaled(Complex64::new(s, 0.0), &dir).unwrap(), &links).unwrap();
        let fd = (e(eps) - e(-eps)) / (2.0 * eps);
        let exact = 2.0 * inner_real(&residual(&psi, &links).unwrap(), &dir).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "fd {} exact {}", fd, exact);
    }

    #[test]
    fn residual_is_equivariant(n in (2usize..6).prop_map(|k| 2 * k), seed in any::<u64>(), g in element(), eta in 0.0f64..6.3, mu in -1.5f64..1.5) {
        let psi = field(n, seed);
        let links = LinkField::new(*psi.grid(), mu);
        let e = GroupElement { dihedral: g, phase: eta };
        let lhs = act(e, &residual(&psi, &links).unwrap());
        let rhs = residual(&act(e, &psi), &links).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn action_is_a_norm_preserving_representation(n in (2usize..6).prop_map(|k| 2 * k), seed in any::<u64>(), g in element(), h in element()) {
        let psi = field(n, seed);
        prop_assert_eq!(act(g, &act(h, &psi)), act(g.compose(h), &psi));
        prop_assert!(close(act(g, &psi).norm(), psi.norm(), 1e-14));
        let ipsi = psi.scale(Complex64::new(0.0, 1.0));
        let sign = if g.is_antiunitary() { -1.0 } else { 1.0 };
        prop_assert_eq!(act(g, &ipsi), act(g, &psi).scale(Complex64::new(0.0, sign)));
    }

    #[test]
    fn free_energy_is_invariant(n in (2usize..6).prop_map(|k| 2 * k), seed in any::<u64>(), g in element(), eta in 0.0f64..6.3) {
        let psi = field(n, seed);
        let moved = act(GroupElement { dihedral: g, phase: eta }, &psi);
        prop_assert!(close(free_energy(&moved), free_energy(&psi), 1e-12));
    }

    #[test]
    fn fixed_space_projection_is_idempotent(n in (2usize..6).prop_map(|k| 2 * k), seed in any::<u64>(), k in 0usize..4) {
        let psi = field(n, seed);
        let h = [Subgroup::full(), Subgroup::sigma(), Subgroup::sigma_rho(), Subgroup::rho2_sigma()][k].clone();
        let p = project_fixed_space(&psi, &h).unwrap();
        prop_assume!(p.norm() > 1e-8 * psi.norm());
        // a projector up to the global phase the states carry
        let pp = project_fixed_space(&p, &h).unwrap();
        let overlap = inner_complex(&p, &pp).unwrap().norm();
        prop_assert!(close(pp.norm(), p.norm(), 1e-12));
        prop_assert!(close(overlap, p.norm() * pp.norm(), 1e-12));
        for g in h.elements.iter() {
            prop_assert!(invariance_defect(*g, &p).unwrap().0 <= 1e-12);
        }
    }

    #[test]
    fn cell_windings_sum_to_loop_winding(
        centers in proptest::collection::vec((-1.2f64..1.2, -1.2f64..1.2, prop_oneof![Just(-1i32), Just(1), Just(2)]), 0..4),
    ) {
        let g = Grid::new(3.0, 40).unwrap();
        let psi = guess::vortices(g, &centers, 1.0);
        let census: i64 = vortex_census(&psi).iter().map(|v| v.winding).sum();
        let outer = total_vorticity(&psi).unwrap();
        prop_assert_eq!(census, outer);
        let want: i64 = centers.iter().map(|c| c.2 as i64).sum();
        prop_assert_eq!(outer, want);
    }
}
