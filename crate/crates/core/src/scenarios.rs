//! PV placement scenarios: uniform draws of load subsets and their
//! injection indicator vectors.
//!
//! Scenario `i` of a study with seed `s` is drawn from a ChaCha8 stream keyed
//! by `(s, i)`, so any scenario can be regenerated on its own and parallel
//! evaluation order never changes the result.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A set of load indices hosting PV, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub omega: Vec<usize>,
    pub seed_id: u64,
}

impl Scenario {
    pub fn n_gen(&self) -> usize {
        self.omega.len()
    }
}

/// Deterministic RNG for scenario `index` of a study seeded with `seed`.
pub fn scenario_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform sample of `n_gen` distinct loads out of `n_lds`.
pub fn sample_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    n_lds: usize,
    n_gen: usize,
    seed_id: u64,
) -> Result<Scenario> {
    if n_gen == 0 || n_gen > n_lds {
        return Err(Error::invalid(format!(
            "n_gen must lie in 1..={n_lds}, got {n_gen}"
        )));
    }
    let mut omega = if n_gen == n_lds {
        (0..n_lds).collect()
    } else {
        rand::seq::index::sample(rng, n_lds, n_gen).into_vec()
    };
    omega.sort_unstable();
    Ok(Scenario { omega, seed_id })
}

pub fn scenario_at(seed: u64, index: u64, n_lds: usize, n_gen: usize) -> Result<Scenario> {
    sample_scenario(&mut scenario_rng(seed, index), n_lds, n_gen, index)
}

/// The first `n_mc` scenarios of a study.
pub fn draw_scenarios(seed: u64, n_lds: usize, n_gen: usize, n_mc: usize) -> Result<Vec<Scenario>> {
    (0..n_mc as u64)
        .map(|i| scenario_at(seed, i, n_lds, n_gen))
        .collect()
}

/// Λ: ones at the load-node rows of the loads in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorVector {
    lambda: Vec<f64>,
    ones: Vec<usize>,
    q_per_p: f64,
}

impl IndicatorVector {
    /// Dense Λ over the load nodes (p rows only).
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Load-node rows holding a one, ascending.
    pub fn ones(&self) -> &[usize] {
        &self.ones
    }

    /// Reactive injection per unit real injection (0 for unity power factor).
    pub fn q_per_p(&self) -> f64 {
        self.q_per_p
    }

    pub fn with_q_per_p(mut self, ratio: f64) -> Self {
        self.q_per_p = ratio;
        self
    }

    /// Stacked `[Λ; (q/p)·Λ]`, the injection direction in `[p; q]` space.
    pub fn stacked(&self) -> Vec<f64> {
        self.lambda
            .iter()
            .copied()
            .chain(self.lambda.iter().map(|l| l * self.q_per_p))
            .collect()
    }
}

/// Builds Λ for `scenario`; `load_nodes[k]` is the load-node row of load `k`.
pub fn indicator(
    scenario: &Scenario,
    load_nodes: &[usize],
    n_load_nodes: usize,
) -> Result<IndicatorVector> {
    let mut lambda = vec![0.0; n_load_nodes];
    let mut ones = Vec::with_capacity(scenario.omega.len());
    for &load in &scenario.omega {
        let node = *load_nodes
            .get(load)
            .ok_or_else(|| Error::invalid(format!("scenario references unmapped load {load}")))?;
        if node >= n_load_nodes {
            return Err(Error::invalid(format!(
                "load {load} maps to row {node} outside {n_load_nodes} load nodes"
            )));
        }
        lambda[node] = 1.0;
        ones.push(node);
    }
    ones.sort_unstable();
    Ok(IndicatorVector {
        lambda,
        ones,
        q_per_p: 0.0,
    })
}

/// Fraction of loads hosting a generator.
pub fn penetration(n_gen: usize, n_lds: usize) -> f64 {
    n_gen as f64 / n_lds as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_penetration_ignores_seed() {
        for seed in [0, 1, 99] {
            let s = scenario_at(seed, 3, 7, 7).unwrap();
            assert_eq!(s.omega, (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn single_generator_is_uniform() {
        let mut counts = [0usize; 4];
        for i in 0..40_000 {
            let s = scenario_at(11, i, 4, 1).unwrap();
            counts[s.omega[0]] += 1;
        }
        for c in counts {
            let freq = c as f64 / 40_000.0;
            assert!((freq - 0.25).abs() < 0.01, "frequency {freq}");
        }
    }

    #[test]
    fn marginal_inclusion_matches_penetration() {
        let (n_lds, n_gen, draws) = (10, 3, 100_000u64);
        let mut counts = vec![0usize; n_lds];
        for i in 0..draws {
            for k in scenario_at(5, i, n_lds, n_gen).unwrap().omega {
                counts[k] += 1;
            }
        }
        let expected = n_gen as f64 / n_lds as f64;
        for c in counts {
            assert!((c as f64 / draws as f64 - expected).abs() < 0.01);
        }
    }

    #[test]
    fn out_of_range_sizes_rejected() {
        assert!(scenario_at(0, 0, 5, 0).is_err());
        assert!(scenario_at(0, 0, 5, 6).is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        let a = draw_scenarios(42, 55, 20, 50).unwrap();
        let b = draw_scenarios(42, 55, 20, 50).unwrap();
        assert_eq!(a, b);
        let c = draw_scenarios(43, 55, 20, 50).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn indicator_unit_vector_and_counts() {
        let s = Scenario {
            omega: vec![0],
            seed_id: 0,
        };
        let lam = indicator(&s, &[0], 3).unwrap();
        assert_eq!(lam.lambda(), &[1.0, 0.0, 0.0]);
        assert_eq!(lam.stacked(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let nodes = [4, 0, 8, 2];
        let all = Scenario {
            omega: vec![0, 1, 2, 3],
            seed_id: 0,
        };
        let lam = indicator(&all, &nodes, 9).unwrap();
        assert_eq!(lam.lambda().iter().sum::<f64>(), 4.0);
        assert_eq!(lam.ones(), &[0, 2, 4, 8]);

        let bad = Scenario {
            omega: vec![4],
            seed_id: 0,
        };
        assert!(indicator(&bad, &nodes, 9).is_err());
    }

    #[test]
    fn penetration_fractions() {
        assert_eq!(penetration(55, 55), 1.0);
        assert_eq!(penetration(0, 55), 0.0);
        assert_eq!(penetration(12, 24), 0.5);
    }
}
