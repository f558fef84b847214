use std::collections::BTreeSet;

use lightswim_core::fitness::gaussian_sum;
use lightswim_core::sweep::{run_sweep, run_trial, GridAxis, SweepSpec, TrialSpec};
use lightswim_core::{
    Algorithm, AlgorithmConfig, Error, GaConfig, Genotype, Optimizer, ParameterSpace, PsoConfig, SurrogateParams,
};

fn drive(config: AlgorithmConfig, seed: u64, generations: usize) -> (Optimizer, Vec<Vec<Genotype>>) {
    let space = ParameterSpace::default_space();
    let params = SurrogateParams::new(0.25).unwrap();
    let mut opt = Optimizer::new(space.clone(), config, seed).unwrap();
    let mut batches = Vec::new();
    for _ in 0..generations {
        let batch = opt.ask().unwrap();
        let f: Vec<f64> = batch.iter().map(|g| gaussian_sum(&space, g, &params)).collect();
        opt.tell(&f).unwrap();
        batches.push(batch);
    }
    (opt, batches)
}

#[test]
fn runs_are_pure_functions_of_the_seed() {
    for algorithm in [Algorithm::Ga, Algorithm::Pso] {
        let (a, ba) = drive(AlgorithmConfig::default_for(algorithm), 5, 6);
        let (b, bb) = drive(AlgorithmConfig::default_for(algorithm), 5, 6);
        assert_eq!(ba, bb);
        assert_eq!(a, b);
        let (_, bc) = drive(AlgorithmConfig::default_for(algorithm), 6, 6);
        assert_ne!(ba, bc);
    }
}

#[test]
fn ga_never_repeats_a_genotype_across_a_run() {
    let (_, batches) = drive(AlgorithmConfig::Ga(GaConfig::default()), 11, 10);
    let all: Vec<&Genotype> = batches.iter().flatten().collect();
    assert_eq!(all.len(), 80);
    assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 80);
}

#[test]
fn pso_never_proposes_an_evaluated_genotype() {
    let (_, batches) = drive(AlgorithmConfig::Pso(PsoConfig::default()), 11, 10);
    let mut seen = BTreeSet::new();
    for batch in &batches {
        assert!(batch.iter().all(|g| !seen.contains(g)));
        seen.extend(batch.iter().cloned());
    }
}

#[test]
fn protocol_errors() {
    let mut opt =
        Optimizer::new(ParameterSpace::default_space(), AlgorithmConfig::default_for(Algorithm::Ga), 1).unwrap();
    assert!(matches!(opt.tell(&[1.0; 8]), Err(Error::StateConflict(_))));
    opt.ask().unwrap();
    assert!(matches!(opt.ask(), Err(Error::StateConflict(_))));
    assert_eq!(opt.tell(&[1.0; 7]), Err(Error::BatchSizeMismatch { expected: 8, got: 7 }));
    assert!(matches!(opt.tell(&[f64::NAN; 8]), Err(Error::InvalidFitness(_))));
    assert!(matches!(opt.tell(&[-1.0; 8]), Err(Error::InvalidFitness(_))));
    opt.tell(&[1.0; 8]).unwrap();
    assert_eq!(opt.generations(), 1);

    let bad = GaConfig { m_min: 2.0, m_max: 1.0, ..GaConfig::default() };
    assert!(matches!(
        Optimizer::new(ParameterSpace::default_space(), AlgorithmConfig::Ga(bad), 1),
        Err(Error::InvalidConfig { .. })
    ));
}

#[test]
fn trial_tracks_the_running_best() {
    let space = ParameterSpace::default_space();
    let t = run_trial(&space, &TrialSpec::new(AlgorithmConfig::Pso(PsoConfig::default()), 0.1, 3)).unwrap();
    assert_eq!(t.best_so_far.len(), 5);
    assert!(t.best_so_far.windows(2).all(|w| w[0] <= w[1]));
    for (i, b) in t.best_so_far.iter().enumerate() {
        let running = t.generation_best[..=i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(*b, running);
    }
    assert_eq!(t.best_fitness, t.best_so_far[4]);
    let params = SurrogateParams::new(0.1).unwrap();
    assert_eq!(gaussian_sum(&space, &t.best_genotype, &params), t.best_fitness);
}

#[test]
fn sweep_cells_share_seeds_across_sigma() {
    let mut spec = SweepSpec::new(AlgorithmConfig::Pso(PsoConfig::default()), vec![0.1, 0.1]);
    spec.grid = vec![GridAxis::numeric("w", vec![0.0, 1.0])];
    spec.repetitions = 3;
    let cells = run_sweep(&ParameterSpace::default_space(), &spec).unwrap();
    assert_eq!(cells.len(), 4);
    assert_eq!(cells[0], cells[2]);
    assert_eq!(cells[1], cells[3]);
    assert!(cells.iter().any(|c| c.normalized_mean == 1.0));
}
