//! Successive-conditional simulators for the joint-distribution tests.

use super::{geweke_scores, normal_critical};
use skewmix::dp_mixture::{AlphaUpdate, BaseMeasure, ChainState, Gibbs, KernelFamily};
use skewmix::rng::chain_rng;
use skewmix::rounded::{RoundedGibbs, RoundingGrid};

pub const N_OBS: usize = 5;
pub const H_MAX: usize = 3;

const NAMES: [&str; 9] = ["alpha", "pi_1", "tau_1", "xi_1", "lambda_1", "lambda_1^2", "k", "ybar", "y_1^2"];

fn base() -> BaseMeasure {
    BaseMeasure::new(0.5, 1.0, 3.0, 3.0, 4.0, 2.0, 2.0).unwrap()
}

fn stats(state: &ChainState, y: &[f64]) -> Vec<f64> {
    let a = state.atoms()[0];
    vec![
        state.alpha(),
        state.weights()[0],
        1.0 / (a.omega() * a.omega()),
        a.xi(),
        a.lambda(),
        a.lambda() * a.lambda(),
        state.occupied() as f64,
        y.iter().sum::<f64>() / y.len() as f64,
        y[0] * y[0],
    ]
}

pub fn continuous_scores(alpha_update: AlphaUpdate, kernel: KernelFamily, draws: usize, seed: u64) -> Vec<(String, f64)> {
    let base = base();
    let gibbs = Gibbs {
        alpha_update,
        ..Gibbs::new(base, kernel)
    };
    let mut rng = chain_rng(seed, 1);
    let mc: Vec<Vec<f64>> = (0..draws)
        .map(|_| {
            let s = ChainState::sample_prior(N_OBS, H_MAX, &base, kernel, &mut rng);
            let y = s.simulate_data(&mut rng);
            stats(&s, &y)
        })
        .collect();
    let mut rng = chain_rng(seed, 2);
    let mut state = ChainState::sample_prior(N_OBS, H_MAX, &base, kernel, &mut rng);
    let mut y = state.simulate_data(&mut rng);
    let mut sc = Vec::with_capacity(draws);
    for _ in 0..draws {
        gibbs.sweep(&mut state, &y, &mut rng);
        y = state.simulate_data(&mut rng);
        sc.push(stats(&state, &y));
    }
    geweke_scores(&NAMES, &mc, &sc)
}

/// Largest |z| and the Bonferroni critical value at the 1% level.
pub fn worst_and_critical(scores: &[(String, f64)], label: &str) -> (f64, f64) {
    let crit = normal_critical(0.01 / scores.len() as f64);
    for (name, z) in scores {
        println!("{label} {name:>12}: z = {z:+.3}");
    }
    (scores.iter().map(|(_, z)| z.abs()).fold(0.0, f64::max), crit)
}

fn discrete_base() -> BaseMeasure {
    BaseMeasure::new(2.0, 1.0, 3.0, 3.0, 4.0, 2.0, 2.0).unwrap()
}

fn round_all(grid: &RoundingGrid, y_star: &[f64]) -> Vec<u64> {
    y_star.iter().map(|&v| grid.round_value(v)).collect()
}

pub fn discrete_scores(draws: usize, seed: u64, impute_first: bool) -> Vec<(String, f64)> {
    let base = discrete_base();
    let kernel = KernelFamily::SkewNormal;
    let grid = RoundingGrid::count();
    let mut rng = chain_rng(seed, 1);
    let mc: Vec<Vec<f64>> = (0..draws)
        .map(|_| {
            let s = ChainState::sample_prior(N_OBS, H_MAX, &base, kernel, &mut rng);
            let y = round_all(&grid, &s.simulate_data(&mut rng));
            let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
            stats(&s, &yf)
        })
        .collect();
    let mut rng = chain_rng(seed, 2);
    let mut state = ChainState::sample_prior(N_OBS, H_MAX, &base, kernel, &mut rng);
    let mut y = round_all(&grid, &state.simulate_data(&mut rng));
    let mut latent = vec![0.0; N_OBS];
    let mut sc = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut sampler = RoundedGibbs::new(Gibbs::new(base, kernel), grid.clone(), &y);
        if impute_first {
            sampler.impute_all(&state, &y, &mut latent, false, &mut rng);
            sampler.update_allocations_discrete(&mut state, &y, &mut rng);
            sampler.gibbs.update_given_allocations(&mut state, &latent, &mut rng);
        } else {
            sampler.sweep(&mut state, &y, &mut latent, &mut rng);
        }
        y = round_all(&grid, &state.simulate_data(&mut rng));
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        sc.push(stats(&state, &yf));
    }
    geweke_scores(&NAMES, &mc, &sc)
}

