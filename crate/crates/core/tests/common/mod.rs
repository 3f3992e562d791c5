#![allow(dead_code)]

use entroscope::{JointDistribution, Variable};
use rand::Rng;

/// Random distribution over `n` variables with alphabets `2..=max_alphabet`
/// and small integer weights on a random support.
pub fn random_dist<R: Rng>(rng: &mut R, n: usize, max_alphabet: u32) -> JointDistribution {
    let vars: Vec<Variable> = (0..n)
        .map(|i| Variable::new(((b'a' + i as u8) as char).to_string(), rng.gen_range(2..=max_alphabet)))
        .collect();
    let space: u32 = vars.iter().map(|v| v.alphabet).product();
    let mut outcomes = Vec::new();
    for code in 0..space {
        if rng.gen_bool(0.6) {
            let mut c = code;
            let vals = vars
                .iter()
                .map(|v| {
                    let x = c % v.alphabet;
                    c /= v.alphabet;
                    x
                })
                .collect();
            outcomes.push((vals, rng.gen_range(1..10u64)));
        }
    }
    if outcomes.is_empty() {
        outcomes.push((vec![0; n], 1));
    }
    JointDistribution::from_weights(vars, outcomes).expect("valid random distribution")
}
