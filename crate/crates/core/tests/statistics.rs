//! Monte Carlo checks of the samplers and of the algorithms' large-n
//! behaviour.

use ocm::degree_dist::DegreeDistribution;
use ocm::graph_gen::sample_cuckoo;
use ocm::harness::{run_trials, trial_rng, Algorithm, ExperimentConfig};

/// Observed frequency within `z` binomial standard errors of `p`.
fn within(count: usize, n: usize, p: f64, z: f64) -> bool {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    (count as f64 / n as f64 - p).abs() <= z * se
}

#[test]
fn main_sampler_frequencies() {
    let d = DegreeDistribution::main();
    let mut rng = trial_rng(11, 0, 0);
    let n = 10_000_000;
    let mut counts = [0usize; 5];
    let mut above_ten = 0;
    for _ in 0..n {
        let k = d.sample_degree(&mut rng, usize::MAX);
        assert!(k >= 2);
        if k < counts.len() {
            counts[k] += 1;
        }
        above_ten += usize::from(k > 10);
    }
    for (k, &c) in counts.iter().enumerate().skip(2) {
        let p = 1.0 / (k * (k - 1)) as f64;
        assert!(within(c, n, p, 5.0), "d={k}: {} vs {p}", c as f64 / n as f64);
    }
    assert!(within(above_ten, n, 0.1, 5.0));
}

#[test]
fn finite_sampler_frequencies() {
    let mut rng = trial_rng(12, 0, 0);
    let n = 1_000_000;
    for d in [
        DegreeDistribution::truncated(4).unwrap(),
        DegreeDistribution::generalized_u(0.9).unwrap(),
        DegreeDistribution::eps_mass(3, 0.05).unwrap(),
    ] {
        let top = d.max_degree().unwrap();
        let mut counts = vec![0usize; top + 1];
        for _ in 0..n {
            counts[d.sample_degree(&mut rng, usize::MAX)] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            assert!(within(c, n, d.pmf(k), 5.0), "{d} d={k}");
        }
    }
}

#[test]
fn cap_clamps_draws() {
    let d = DegreeDistribution::main().with_cap(3).unwrap();
    let mut rng = trial_rng(13, 0, 0);
    let n = 200_000;
    let threes = (0..n).filter(|_| d.sample_degree(&mut rng, usize::MAX) == 3).count();
    assert!(within(threes, n, 0.5, 5.0));
}

#[test]
fn ad_choices_are_uniform() {
    let mut rng = trial_rng(14, 0, 0);
    let g = sample_cuckoo(200_000, 10, &DegreeDistribution::uniform(3), &mut rng).unwrap();
    let (_, hist) = g.degree_histogram();
    assert_eq!(hist.values().sum::<usize>(), 10);
    for deg in g.ad_degrees() {
        assert!(within(deg, 600_000, 0.1, 5.0), "{deg}");
    }
}

#[test]
fn ranking_tracks_greedy_on_main() {
    let cfg = ExperimentConfig::new("main", 100_000, 100_000)
        .with_trials(20)
        .with_algorithms(&[Algorithm::Greedy, Algorithm::Ranking]);
    let r = run_trials(&cfg).unwrap();
    let diff = (r.metric("greedy").unwrap().mean - r.metric("ranking").unwrap().mean).abs();
    assert!(diff <= 0.01, "{diff}");
}

#[test]
fn oracle_on_main_instance() {
    let cfg = ExperimentConfig::new("main", 100_000, 100_000)
        .with_trials(2)
        .with_algorithms(&[Algorithm::KarpSipser, Algorithm::MaxMatching]);
    let r = run_trials(&cfg).unwrap();
    for t in &r.records {
        let max = t.max_size.unwrap();
        assert!(max as f64 >= 0.95 * 100_000.0);
        assert!(max >= t.ks_size.unwrap() && max <= t.ks_upper_bound.unwrap());
    }
}

#[test]
fn greedy_concentrates_on_main() {
    let cfg = ExperimentConfig::new("main", 1_000_000, 1_000_000)
        .with_trials(10)
        .with_algorithms(&[Algorithm::Greedy]);
    let g = run_trials(&cfg).unwrap();
    let m = g.metric("greedy").unwrap();
    assert!(m.std_error() < 0.001);
    assert!((m.mean - 0.820626).abs() <= 0.002);
}
