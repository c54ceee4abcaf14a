use nhim_core::geometry::DomainBox;
use nhim_core::maps::RotatingHenonModel;
use nhim_core::rates::{bound_table, compute_constants, constants_from_table, enclosures, max_order, BoundScheme, RateConstants};

const L: f64 = 0.99;
/// relative agreement with the reference constants
const TABLE_TOL: f64 = 0.02;

/// The fiber radius equals the upper end of the parameter interval.
fn domain(eps_hi: f64) -> DomainBox {
    DomainBox::new(eps_hi, 0.5, L, 1, 1).unwrap()
}

fn constants(lo: f64, hi: f64, slices: usize) -> RateConstants {
    let m = RotatingHenonModel::standard(lo, hi).unwrap();
    compute_constants(&m, &domain(hi), (slices, 1, 1), BoundScheme::Gershgorin).unwrap()
}

fn reference(col: usize) -> [(&'static str, f64); 10] {
    let t = [
        ("mu_s1", 0.0355597, 0.0382945),
        ("mu_s2", 0.0356074, 0.0430675),
        ("xi_u1", 2.81352, 2.7303),
        ("xi_u1P", 2.81352, 2.7303),
        ("xi_u2", 2.81408, 2.78624),
        ("mu_cs1", 1.0014, 1.14097),
        ("mu_cs2", 1.00196, 1.19691),
        ("xi_cu1", 0.997718, 0.748463),
        ("xi_cu2", 0.997766, 0.753236),
        ("xi_cu1P", 0.997718, 0.748463),
    ];
    t.map(|(n, a, b)| (n, if col == 0 { a } else { b }))
}

#[test]
fn constants_within_two_percent_of_reference() {
    for (col, (lo, hi)) in [(0.0, 0.0001), (0.009, 0.01)].into_iter().enumerate() {
        let rc = constants(lo, hi, 64);
        for ((name, got), (_, want)) in rc.named().into_iter().zip(reference(col)) {
            let rel = (got - want).abs() / want.abs();
            println!("eps=[{lo},{hi}] {name}: {got:.6} vs {want} ({rel:.2e})");
            assert!(rel <= TABLE_TOL, "{name} eps=[{lo},{hi}]: {got} vs {want}");
        }
    }
}

#[test]
fn sweep_orders_match_reference() {
    let rows = [
        (0.0, 0.0001, 737),
        (0.0001, 0.0002, 368),
        (0.0002, 0.0003, 245),
        (0.0003, 0.0004, 184),
        (0.0004, 0.0005, 147),
        (0.0005, 0.001, 73),
        (0.001, 0.002, 36),
        (0.002, 0.003, 24),
        (0.003, 0.004, 17),
        (0.004, 0.005, 14),
        (0.005, 0.006, 11),
        (0.006, 0.007, 9),
        (0.007, 0.008, 8),
        (0.008, 0.009, 7),
        (0.009, 0.01, 6),
    ];
    for (lo, hi, want) in rows {
        let r = max_order(&constants(lo, hi, 1), 2000);
        println!("eps=[{lo},{hi}] order {} (reference {want}) binding {:?}", r.order, r.binding);
        if want <= 36 {
            assert_eq!(r.order, want, "eps=[{lo},{hi}]");
        } else {
            assert!((r.order - want).abs() <= 2, "eps=[{lo},{hi}]: {}", r.order);
        }
    }
}

#[test]
fn refinement_never_loosens_constants() {
    let m = RotatingHenonModel::standard(0.009, 0.01).unwrap();
    let d = domain(0.01);
    let mut prev: Option<RateConstants> = None;
    for n in [1, 2, 4, 8, 16] {
        let e = enclosures(&m, &d, (n, 1, 1)).unwrap();
        let rc = constants_from_table(&bound_table(&e, 1, 1, BoundScheme::Gershgorin).unwrap(), L);
        if let Some(p) = prev {
            for ((name, a), (_, b)) in rc.named().into_iter().zip(p.named()) {
                if name.starts_with("xi") {
                    assert!(a >= b, "{name} dropped at n={n}: {b} -> {a}");
                } else {
                    assert!(a <= b, "{name} grew at n={n}: {b} -> {a}");
                }
            }
        }
        prev = Some(rc);
    }
}

mod order_props {
    use nhim_core::rates::{check_rate_conditions, max_order, RateConstants};
    use proptest::prelude::*;

    const K_CAP: u32 = 60;

    fn brute_force(rc: &RateConstants) -> i64 {
        let mut best = -1;
        for k in 0..=K_CAP {
            if check_rate_conditions(rc, k).is_ok() {
                best = k as i64;
            } else {
                break;
            }
        }
        best
    }

    fn constants() -> impl Strategy<Value = RateConstants> {
        (0.0..1.2f64, 0.0..0.2f64, 0.5..3.0f64, 0.9..1.2f64, 0.5..1.2f64, 0.9..3.0f64, 0.0..0.1f64, 0.0..0.1f64, 0.0..0.2f64).prop_map(
            |(mu_s1, mu_s2, xi_u1, mu_cs1, xi_cu1, xi_u2, d1, d2, d3)| RateConstants {
                mu_s1,
                mu_s2,
                xi_u1,
                xi_u1p: xi_u1 - d1,
                xi_u2,
                mu_cs1,
                mu_cs2: mu_cs1 + d3,
                xi_cu1,
                xi_cu2: xi_cu1 + d2,
                xi_cu1p: xi_cu1 - d2,
                l: 0.99,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn closed_form_matches_brute_force(rc in constants()) {
            let r = max_order(&rc, K_CAP);
            prop_assert_eq!(r.order, brute_force(&rc));
            if r.order >= 0 && (r.order as u32) < K_CAP {
                prop_assert_eq!(r.binding, check_rate_conditions(&rc, r.order as u32 + 1).err());
            }
        }
    }
}
