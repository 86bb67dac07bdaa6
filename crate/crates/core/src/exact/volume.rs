//! Monte Carlo volume of a union of polytopes inside the strategy space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::EnvironmentGraph;
use crate::polytope::Polytope;
use crate::rational::to_f64;

/// Closure membership slack for floating-point samples.
const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub hits: usize,
    pub samples: usize,
    pub space_volume: f64,
    pub estimate: f64,
}

/// Volume of the product of scaled simplices `prod_i p_i^{r_i} / r_i!`,
/// with `r_i` the number of flat variables of country `i`.
pub fn strategy_space_volume(g: &EnvironmentGraph) -> f64 {
    let flat = g.flat_index();
    (0..g.n())
        .map(|i| {
            let r = flat.owned_by(i).len();
            let p = to_f64(g.power(i));
            (1..=r).fold(1.0, |acc, k| acc * p / k as f64)
        })
        .product()
}

/// Hit ratio of uniform strategy-space samples landing in the closure of any
/// of `polytopes`, scaled by the strategy-space volume.
pub fn estimate_volume(g: &EnvironmentGraph, polytopes: &[Polytope], samples: usize, seed: u64) -> VolumeEstimate {
    let flat = g.flat_index();
    let dim = flat.len();
    let powers: Vec<f64> = g.powers().iter().map(to_f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = vec![0.0; dim];
    let mut cuts = Vec::new();
    let mut hits = 0;
    if !polytopes.is_empty() {
        for _ in 0..samples {
            for (i, &p) in powers.iter().enumerate() {
                let owned = flat.owned_by(i);
                let r = owned.len();
                if r == 0 {
                    continue;
                }
                // spacings of r sorted uniforms are uniform on the simplex
                cuts.clear();
                cuts.extend((0..r).map(|_| rng.random::<f64>()));
                cuts.sort_by(f64::total_cmp);
                let mut prev = 0.0;
                for (slot, k) in owned.enumerate() {
                    point[k] = (cuts[slot] - prev) * p;
                    prev = cuts[slot];
                }
            }
            if polytopes.iter().any(|q| q.contains_closure_f64(&point, TOLERANCE)) {
                hits += 1;
            }
        }
    }
    let space_volume = strategy_space_volume(g);
    let estimate = if samples == 0 {
        0.0
    } else {
        space_volume * hits as f64 / samples as f64
    };
    VolumeEstimate {
        hits,
        samples,
        space_volume,
        estimate,
    }
}
