use entroscope::swsim::*;
use entroscope::{Budget, VarSet};

#[test]
fn hash_invariants_hold_for_every_code() {
    let d = binary_symmetric_pair(1, 4);
    let (x, y) = (VarSet::singleton(0), VarSet::singleton(1));
    let h_x = d.entropy(x).unwrap();
    let i_xy = d.mutual_information(x, y, VarSet::EMPTY).unwrap();
    for n in [1u32, 2, 3, 5] {
        for seed in 0..5 {
            let code = build_code(&d, 0, 1, n, 0.1, seed, None).unwrap();
            let sys = hash_system(&d, 0, &code, Budget::default()).unwrap();
            let h = VarSet::singleton(2);
            assert!(sys.is_function_of(h, x).unwrap());
            let hh = sys.entropy(h).unwrap();
            assert!(hh <= (code.bins as f64).log2() + 1e-12);
            assert!(hh <= n as f64 * h_x + 1e-9);
            let i_hy = sys.mutual_information(h, y, VarSet::EMPTY).unwrap();
            assert!(i_hy <= n as f64 * i_xy + 1e-9);
        }
    }
}

#[test]
fn noiseless_side_information_decodes_exactly() {
    let d = binary_symmetric_pair(0, 1);
    let cfg = SwConfig {
        delta: 0.5,
        ..SwConfig::default()
    };
    for seed in 0..3 {
        for row in sw_report(&d, &cfg, seed).unwrap() {
            assert_eq!(row.h_x_given_hash_y, 0.0);
        }
    }
}

#[test]
fn bin_counts_follow_the_rate() {
    let d = binary_symmetric_pair(1, 4);
    let h = d.conditional_entropy(VarSet::singleton(0), VarSet::singleton(1)).unwrap();
    for n in 1..=8u32 {
        let code = build_code(&d, 0, 1, n, 0.1, 0, None).unwrap();
        assert_eq!(code.bins as f64, (n as f64 * (h + 0.1)).exp2().round().max(1.0));
        assert_eq!(code.table.len(), 1 << n);
    }
    assert_eq!(build_code(&d, 0, 1, 3, 0.1, 0, Some(5)).unwrap().bins, 5);
    assert!(build_code(&d, 0, 1, 0, 0.1, 0, None).is_err());
    assert!(build_code(&d, 0, 1, 2, -0.1, 0, None).is_err());
}

#[test]
fn averaged_trend_is_monotone_within_tolerance() {
    let d = binary_symmetric_pair(1, 4);
    let cfg = SwConfig::default();
    let mut mean = vec![0.0; cfg.copies.len()];
    for seed in 0..20 {
        for (i, row) in sw_report(&d, &cfg, seed).unwrap().iter().enumerate() {
            mean[i] += row.h_x_given_hash_y / 20.0;
        }
    }
    for w in mean.windows(2) {
        assert!(w[0] >= w[1] - 0.05, "{mean:?}");
    }
}

#[test]
fn reports_are_deterministic() {
    let d = binary_symmetric_pair(1, 4);
    let cfg = SwConfig::default();
    assert_eq!(sw_report(&d, &cfg, 9).unwrap(), sw_report(&d, &cfg, 9).unwrap());
}
