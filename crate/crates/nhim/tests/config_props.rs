use nhim::config::{RunConfig, Scheme};
use nhim::sweep::parse_partition;
use proptest::prelude::*;

prop_compose! {
    fn henon_config()(
        lo in 0.0..0.01f64,
        width in 0.0..0.01f64,
        k in 0u32..20,
        extra_cap in 0u32..2000,
        slices in (1usize..128, 1usize..4, 1usize..4),
        sharp in any::<bool>(),
        pinned_r in prop::option::of(0.001..0.2f64),
        grid in (2usize..4096, 2usize..33, 2usize..33),
        depth in 1usize..30,
    ) -> RunConfig {
        let mut c = RunConfig::henon(lo, lo + width);
        c.certify.k = k;
        c.certify.k_cap = k + extra_cap;
        c.certify.check_subdivision = [slices.0, slices.1, slices.2];
        c.certify.scheme = if sharp { Scheme::Sharp } else { Scheme::Gershgorin };
        c.domain.r = pinned_r;
        c.manifold.n_lambda = grid.0;
        c.manifold.n_x = grid.1;
        c.manifold.n_y = grid.2;
        c.manifold.wcs_depth = depth;
        c
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn toml_round_trip(cfg in henon_config()) {
        let text = cfg.to_toml();
        match RunConfig::from_toml(&text) {
            Ok(back) => prop_assert_eq!(back, cfg),
            // only an oversized pinned radius may be rejected
            Err(e) => prop_assert!(cfg.domain.r.is_some() && e.to_string().contains("L must lie"), "{e}"),
        }
    }

    #[test]
    fn partitions_parse_back(widths in prop::collection::vec((0u32..1000, 0u32..1000), 0..20), comma in any::<bool>()) {
        let mut lo = 0u32;
        let mut want = Vec::new();
        let mut text = String::from("# generated\n");
        for (gap, w) in widths {
            let a = lo + gap;
            let b = a + w;
            let (fa, fb) = (a as f64 * 1e-5, b as f64 * 1e-5);
            want.push((fa, fb));
            text += &if comma { format!("{fa},{fb}\n") } else { format!("{fa} {fb}\n") };
            lo = b;
        }
        prop_assert_eq!(parse_partition(&text).unwrap(), want);
    }
}
