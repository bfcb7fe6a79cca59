//! Browser bindings for the percolation demo page in `www/`.
//!
//! Three operations are exported: sample and label a 2-d torus, the theory
//! curve of the giant fraction against λ, and the empirical progeny tail of
//! the branching process next to its exponential bound.

use wasm_bindgen::prelude::*;

use htpc_core::branching::{progeny_trials, Engine, OffspringLaw};
use htpc_core::theory::{critical_lambda, extinction, tail_constants};
use htpc_core::{lambda_to_p, sample, Clustering, TorusSpec, VertexId};

fn js_err(e: htpc_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// A sampled rook-graph configuration with its components ranked by size.
#[wasm_bindgen]
pub struct Percolation {
    width: usize,
    height: usize,
    ranks: Vec<u32>,
    largest: u64,
    second_largest: u64,
    occupied: u64,
    components: u64,
    isolated: u64,
    predicted_fraction: f64,
    normalizer: f64,
}

#[wasm_bindgen]
impl Percolation {
    /// Grid width (`L_2`, columns).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Grid height (`L_1`, rows).
    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major cell ranks: 0 empty, 1 largest component, 2 second, and so on.
    pub fn ranks(&self) -> Vec<u32> {
        self.ranks.clone()
    }

    pub fn largest(&self) -> f64 {
        self.largest as f64
    }

    pub fn second_largest(&self) -> f64 {
        self.second_largest as f64
    }

    pub fn occupied(&self) -> f64 {
        self.occupied as f64
    }

    pub fn components(&self) -> f64 {
        self.components as f64
    }

    pub fn isolated(&self) -> f64 {
        self.isolated as f64
    }

    /// Largest component over `λ a_1 a_2 n`.
    pub fn normalized_largest(&self) -> f64 {
        self.largest as f64 / self.normalizer
    }

    /// Predicted giant fraction `1 - q` (0 at or below the critical point).
    pub fn predicted_fraction(&self) -> f64 {
        self.predicted_fraction
    }
}

/// Samples `p = λ/n` on the `round(a_1 n) × round(a_2 n)` rook graph.
#[wasm_bindgen]
pub fn percolate(n: u32, a1: f64, a2: f64, lambda: f64, seed: u32) -> Result<Percolation, JsValue> {
    percolate_inner(n as u64, [a1, a2], lambda, seed as u64).map_err(js_err)
}

fn percolate_inner(n: u64, a: [f64; 2], lambda: f64, seed: u64) -> htpc_core::Result<Percolation> {
    let spec = TorusSpec::new(2, &a, n)?;
    let p = lambda_to_p(&spec, lambda)?;
    let config = sample(&spec, p, seed)?;
    let clustering = Clustering::new(&config);
    let stats = clustering.stats();

    // rank components by size, ties broken by first appearance
    let mut roots: Vec<(u64, usize)> = Vec::new();
    let mut root_of = vec![usize::MAX; spec.volume()];
    let mut first_seen = std::collections::HashMap::new();
    for v in config.occupied() {
        let label = clustering.label(v).expect("occupied vertex has a label");
        root_of[v.0] = label;
        let next = first_seen.len();
        first_seen.entry(label).or_insert(next);
    }
    let mut sizes = std::collections::HashMap::<usize, u64>::new();
    for v in config.occupied() {
        *sizes.entry(root_of[v.0]).or_default() += 1;
    }
    for (&label, &size) in &sizes {
        roots.push((size, label));
    }
    roots.sort_by(|x, y| y.0.cmp(&x.0).then(first_seen[&x.1].cmp(&first_seen[&y.1])));
    let rank: std::collections::HashMap<usize, u32> = roots
        .iter()
        .enumerate()
        .map(|(r, &(_, label))| (label, r as u32 + 1))
        .collect();
    let ranks = (0..spec.volume())
        .map(|k| {
            let v = VertexId(k);
            if config.is_occupied(v) {
                rank[&root_of[k]]
            } else {
                0
            }
        })
        .collect();

    let predicted_fraction = extinction(lambda, &a)?.giant_fraction();
    Ok(Percolation {
        height: spec.sides()[0],
        width: spec.sides()[1],
        ranks,
        largest: stats.largest,
        second_largest: stats.second_largest,
        occupied: stats.occupied_count,
        components: stats.component_count,
        isolated: stats.isolated_count,
        predicted_fraction,
        normalizer: htpc_core::theory::occupied_normalizer(&spec, lambda),
    })
}

/// Critical λ for the given aspect ratios.
#[wasm_bindgen]
pub fn critical_value(a: Vec<f64>) -> Result<f64, JsValue> {
    critical_lambda(&a).map_err(js_err)
}

/// `1 - q(λ)` at `steps + 1` evenly spaced λ in `[0, lambda_max]`.
#[wasm_bindgen]
pub fn giant_curve(a: Vec<f64>, lambda_max: f64, steps: u32) -> Result<Vec<f64>, JsValue> {
    giant_curve_inner(&a, lambda_max, steps as usize).map_err(js_err)
}

fn giant_curve_inner(a: &[f64], lambda_max: f64, steps: usize) -> htpc_core::Result<Vec<f64>> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|k| {
            let lambda = lambda_max * k as f64 / steps as f64;
            if lambda == 0.0 {
                Ok(0.0)
            } else {
                extinction(lambda, a).map(|e| e.giant_fraction())
            }
        })
        .collect()
}

/// Empirical `P(T > x)` for `x = 0..=x_max` from a single type-1 ancestor
/// of the Poisson process, followed by the bound `C e^{-αx}` at the same
/// points (all NaN when λ is not subcritical).
#[wasm_bindgen]
pub fn progeny_tail(
    lambda: f64,
    a: Vec<f64>,
    trials: u32,
    x_max: u32,
    seed: u32,
) -> Result<Vec<f64>, JsValue> {
    progeny_tail_inner(lambda, &a, trials as u64, x_max as usize, seed as u64).map_err(js_err)
}

fn progeny_tail_inner(
    lambda: f64,
    a: &[f64],
    trials: u64,
    x_max: usize,
    seed: u64,
) -> htpc_core::Result<Vec<f64>> {
    let law = OffspringLaw::poisson(lambda, a)?;
    let mut start = vec![0; a.len()];
    start[0] = 1;
    let cap = x_max as u64 + 1;
    let outcomes = progeny_trials(&law, &start, trials.max(1), cap, seed, Engine::Walk)?;
    let mut exceed = vec![0u64; x_max + 1];
    for o in &outcomes {
        let size = o.size() as usize;
        for e in exceed.iter_mut().take(size.min(x_max + 1)) {
            *e += 1;
        }
    }
    let mut out: Vec<f64> = exceed
        .iter()
        .map(|&c| c as f64 / trials.max(1) as f64)
        .collect();
    match tail_constants(lambda, a) {
        Ok(tc) => out.extend((0..=x_max).map(|x| tc.bound(x as f64))),
        Err(_) => out.extend(std::iter::repeat_n(f64::NAN, x_max + 1)),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_cover_the_census() {
        let perc = percolate_inner(60, [1.0, 1.0], 2.0, 4).unwrap();
        assert_eq!(perc.ranks.len(), 3600);
        let giant = perc.ranks.iter().filter(|&&r| r == 1).count() as u64;
        assert_eq!(giant, perc.largest);
        let occupied = perc.ranks.iter().filter(|&&r| r > 0).count() as u64;
        assert_eq!(occupied, perc.occupied);
        let max_rank = *perc.ranks.iter().max().unwrap() as u64;
        assert_eq!(max_rank, perc.components);
        assert!((perc.predicted_fraction - 0.958715).abs() < 1e-5);
    }

    #[test]
    fn rectangular_grid() {
        let perc = percolate_inner(10, [2.0, 0.5], 1.0, 1).unwrap();
        assert_eq!((perc.height, perc.width), (20, 5));
    }

    #[test]
    fn curve_is_zero_then_rising() {
        let curve = giant_curve_inner(&[1.0, 1.0], 3.0, 30).unwrap();
        assert_eq!(curve.len(), 31);
        assert!(curve[..=10].iter().all(|&g| g == 0.0));
        assert!(curve[11..].windows(2).all(|w| w[1] > w[0]));
        assert!((curve[20] - 0.958715).abs() < 1e-5);
    }

    #[test]
    fn tail_is_bounded() {
        let tail = progeny_tail_inner(0.5, &[1.0, 1.0], 20_000, 30, 2).unwrap();
        let (empirical, bound) = tail.split_at(31);
        assert_eq!(empirical[0], 1.0);
        assert!(empirical.windows(2).all(|w| w[1] <= w[0]));
        for (e, b) in empirical.iter().zip(bound) {
            assert!(e <= b);
        }
        let super_tail = progeny_tail_inner(2.0, &[1.0, 1.0], 100, 5, 2).unwrap();
        assert!(super_tail[6..].iter().all(|b| b.is_nan()));
    }
}
