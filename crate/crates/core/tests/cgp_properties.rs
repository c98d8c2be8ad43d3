use proptest::prelude::*;

use rcgp::cgp::{self, evaluate_sequential, evaluate_static, EvolutionConfig, Genotype};
use rcgp::dataset::{Layout, Sample};
use rcgp::seed;

fn genotype(seed_value: u64, n_inputs: usize, recurrent: bool) -> Genotype {
    let config = if recurrent {
        EvolutionConfig::recurrent()
    } else {
        EvolutionConfig::default()
    };
    Genotype::random(&config, n_inputs, &mut seed::rng_from_seed(seed_value))
}

fn values(seed_value: u64, n: usize) -> Vec<f64> {
    let mut rng = seed::rng_from_seed(seed_value);
    (0..n).map(|_| 4.0 * seed::unit(&mut rng) - 2.0).collect()
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

#[test]
fn single_step_sequence_equals_one_static_pass() {
    for i in 0..1000u64 {
        let n = 1 + (i % 7) as usize;
        let g = genotype(i, n, i % 2 == 1);
        let x = values(i ^ 0xabc, n);
        assert!(same(
            evaluate_sequential(&g, &x).unwrap(),
            evaluate_static(&g, &x, 1).unwrap()
        ));
    }
}

#[test]
fn feed_forward_reads_only_the_last_step() {
    for i in 0..300u64 {
        let g = genotype(i, 2, false);
        let mut rows = values(i, 20);
        let last = evaluate_sequential(&g, &rows).unwrap();
        for v in &mut rows[..18] {
            *v = -*v * 3.0 + 1.0;
        }
        assert!(same(last, evaluate_sequential(&g, &rows).unwrap()));
        assert!(same(last, evaluate_static(&g, &rows[18..], 1).unwrap()));
    }
}

#[test]
fn recurrence_can_carry_earlier_steps() {
    // Some recurrent genotype must be sensitive to a perturbed first step.
    let carries = (0..300u64).any(|i| {
        let g = genotype(i, 1, true);
        let mut rows = values(i, 5);
        let before = evaluate_sequential(&g, &rows).unwrap();
        rows[0] += 1.0;
        !same(before, evaluate_sequential(&g, &rows).unwrap())
    });
    assert!(carries);
}

#[test]
fn bad_inputs_are_rejected() {
    let g = genotype(1, 3, true);
    assert!(evaluate_static(&g, &[1.0, 2.0], 1).is_err());
    assert!(evaluate_static(&g, &[1.0, f64::NAN, 0.0], 1).is_err());
    assert!(evaluate_sequential(&g, &[1.0, 2.0, 3.0, 4.0]).is_err());
    assert!(evaluate_sequential(&g, &[]).is_err());
}

proptest! {
    #[test]
    fn predictions_ignore_sample_order(seed_value in any::<u64>(), n in 2usize..20, rotate in 1usize..19) {
        let layout = Layout::Sequential { n_channels: 2, n_timesteps: 4 };
        let g = genotype(seed_value, 2, true);
        let samples: Vec<Sample> = (0..n)
            .map(|i| Sample::new(i.to_string(), values(seed_value ^ i as u64, 8), (i % 2) as u8))
            .collect();
        let mut rotated = samples.clone();
        rotated.rotate_left(rotate % n);
        let a = cgp::outputs(&g, &samples, layout, 1);
        let mut b = cgp::outputs(&g, &rotated, layout, 1);
        b.rotate_right(rotate % n);
        prop_assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn static_passes_do_not_matter_without_recurrence(seed_value in any::<u64>(), passes in 1usize..5) {
        let g = genotype(seed_value, 4, false);
        let x = values(seed_value, 4);
        prop_assert!(same(evaluate_static(&g, &x, 1).unwrap(), evaluate_static(&g, &x, passes).unwrap()));
    }
}
