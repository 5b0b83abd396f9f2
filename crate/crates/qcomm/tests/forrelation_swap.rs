use qcomm::forrelation::{
    default_reps, forr_pair, plant_instance, swap_acceptance, swap_test_protocol, swap_threshold, ForrConvention,
    ForrInstance, ForrXorInstance, DEFAULT_FEASIBILITY,
};
use qcomm::Label;

/// `P(Bin(reps, p) > t * reps)`, summed from the pmf.
fn binomial_upper_tail(reps: u64, p: f64, t: f64) -> f64 {
    let mut pmf = (1.0 - p).powi(reps as i32);
    let mut tail = 0.0;
    for j in 0..=reps {
        if j as f64 / reps as f64 > t {
            tail += pmf;
        }
        pmf *= (reps - j) as f64 / (j + 1) as f64 * p / (1.0 - p);
    }
    tail
}

fn single(x: Vec<i8>, y: Vec<i8>, epsilon: f64, label: Label) -> ForrXorInstance {
    let n = x.len();
    ForrXorInstance::new(vec![ForrInstance {
        n,
        epsilon,
        x,
        y,
        label,
        convention: ForrConvention::FullPair,
        seed: None,
    }])
    .unwrap()
}

#[test]
fn maximal_copy_with_64_reps() {
    let x = vec![1i8; 4];
    let y = vec![1i8; 4];
    assert_eq!(forr_pair(&x, &y).unwrap(), 0.5);
    let p = swap_acceptance(&x, &y).unwrap();
    assert!((p - 0.625).abs() < 1e-12);

    let epsilon = 0.5;
    let inst = single(x, y, epsilon, Label::Minus);
    let exact = binomial_upper_tail(64, p, swap_threshold(epsilon));
    let seeds = 100;
    let hits = (0..seeds)
        .filter(|&s| swap_test_protocol(&inst, 64, s).unwrap().output == -1)
        .count();
    let rate = hits as f64 / seeds as f64;
    let sd = (exact * (1.0 - exact) / seeds as f64).sqrt();
    assert!((rate - exact).abs() <= 4.0 * sd.max(0.01), "rate {rate}, exact {exact}");
    assert!(exact > 0.95);
}

#[test]
fn independent_copy_with_default_reps() {
    let (n, epsilon) = (64, 0.5);
    let reps = default_reps(1, epsilon);
    let seeds = 200u64;
    let mut wins = 0;
    for s in 0..seeds {
        let c = plant_instance(n, epsilon, Label::Plus, ForrConvention::FullPair, s, DEFAULT_FEASIBILITY).unwrap();
        let inst = ForrXorInstance::new(vec![c]).unwrap();
        if swap_test_protocol(&inst, reps, 1000 + s).unwrap().output == 1 {
            wins += 1;
        }
    }
    assert!(wins as f64 / seeds as f64 >= 2.0 / 3.0, "{wins}/{seeds}");
}

#[test]
fn shot_frequency_matches_analytic_acceptance() {
    let (n, epsilon) = (16, 1.0);
    for (s, label) in [(1, Label::Minus), (2, Label::Plus)] {
        let c = plant_instance(n, epsilon, label, ForrConvention::FullPair, s, DEFAULT_FEASIBILITY).unwrap();
        let p = swap_acceptance(&c.x, &c.y).unwrap();
        let inst = ForrXorInstance::new(vec![c]).unwrap();
        let reps = 100_000;
        let out = swap_test_protocol(&inst, reps, s).unwrap();
        let freq = out.accepts[0] as f64 / reps as f64;
        assert!((freq - p).abs() <= 4.0 * (p * (1.0 - p) / reps as f64).sqrt());
    }
}

#[test]
fn product_rule_on_correct_decisions() {
    let epsilon = 1.0;
    let copies: Vec<ForrInstance> = [(Label::Minus, 3), (Label::Plus, 4), (Label::Minus, 5)]
        .into_iter()
        .map(|(l, s)| plant_instance(16, epsilon, l, ForrConvention::FullPair, s, DEFAULT_FEASIBILITY).unwrap())
        .collect();
    let inst = ForrXorInstance::new(copies).unwrap();
    assert_eq!(inst.xor_label(), Some(1));
    for s in 0..50 {
        let out = swap_test_protocol(&inst, 20_000, s).unwrap();
        let truth: Vec<i8> = inst.copies.iter().map(|c| c.label.sign().unwrap()).collect();
        if out.decisions == truth {
            assert_eq!(out.output, 1);
        }
        assert_eq!(out.output, out.decisions.iter().product::<i8>());
    }
}
