use entroscope::catalog::{ingleton, zhang_yeung};
use entroscope::elemental::elementals;
use entroscope::lp::{is_shannon_type, lp_min, Certificate, LpOutcome};
use entroscope::rational::Rational;
use entroscope::{InfoExpression, Quantity, VarSet};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn zhang_yeung_is_not_shannon_type() {
    let zy = zhang_yeung().body;
    let cone: Vec<InfoExpression> = elementals(4).into_iter().map(|e| e.expr).collect();
    match lp_min(&zy, &cone) {
        LpOutcome::UnboundedBelow { ray, value } => {
            assert!(value.is_negative());
            assert_eq!(zy.evaluate_exact(&ray), value);
            for g in &cone {
                assert!(!g.evaluate_exact(&ray).is_negative());
            }
        }
        other => panic!("expected a witness, got {other:?}"),
    }
    let v = is_shannon_type(&zy).unwrap();
    assert!(!v.is_shannon_type());
    assert!(v.verify());
}

#[test]
fn ingleton_is_not_shannon_type() {
    let v = is_shannon_type(&ingleton().body).unwrap();
    assert!(!v.is_shannon_type());
    assert!(matches!(v.certificate, Certificate::Witness { .. }));
}

#[test]
fn every_elemental_gets_a_singleton_certificate() {
    for n in 1..=4 {
        for e in elementals(n) {
            let v = is_shannon_type(&e.expr).unwrap();
            match &v.certificate {
                Certificate::DualWeights(ws) => {
                    assert_eq!(ws.len(), 1);
                    assert_eq!(ws[0].0, e);
                }
                other => panic!("{other:?}"),
            }
        }
    }
}

#[test]
fn random_nonnegative_combinations_are_shannon_type() {
    let els = elementals(4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mut e = InfoExpression::zero(4);
        for el in &els {
            if rng.gen_bool(0.2) {
                let w = Rational::new(rng.gen_range(1..6).into(), rng.gen_range(1..4).into());
                e += el.expr.clone() * w;
            }
        }
        let v = is_shannon_type(&e).unwrap();
        assert!(v.is_shannon_type(), "{e:?}");
        assert!(v.verify());
    }
}

#[test]
fn conditional_mutual_information_at_six_variables() {
    let q = Quantity::mutual_info(
        VarSet::from_indices([0, 1]),
        VarSet::from_indices([2, 5]),
        VarSet::from_indices([3]),
    );
    let e = entroscope::expr::expand(&q, 6).unwrap();
    let v = is_shannon_type(&e).unwrap();
    assert!(v.is_shannon_type());
    let neg = -e;
    let v = is_shannon_type(&neg).unwrap();
    assert!(!v.is_shannon_type());
    if let Certificate::Witness { value, .. } = v.certificate {
        assert!(value < Rational::zero());
    }
}
