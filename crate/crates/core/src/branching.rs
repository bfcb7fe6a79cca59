//! Multitype branching processes approximating cluster growth on the torus.
//!
//! A type-i individual bears a random number of type-j children for every
//! `j ≠ i` and none of type i, either `Binomial(L_j, λ/n)` (the finite-n law
//! seen by cluster discovery) or `Poisson(λ a_j)` (its limit). With
//! `special_first_step` the starting individuals bear children of every type,
//! as the first vertex of a discovered cluster does.
//!
//! The walk formulation retires one uniformly chosen active individual per
//! step; its number of steps to extinction is the total progeny.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OffspringKind {
    /// `Binomial(round(a_j n), λ/n)` children of each other type.
    Binomial { n: u64 },
    /// `Poisson(λ a_j)` children of each other type.
    Poisson,
}

/// Offspring distribution of the d-type process.
#[derive(Debug, Clone)]
pub struct OffspringLaw {
    kind: OffspringKind,
    lambda: f64,
    a: Vec<f64>,
    special_first_step: bool,
    /// Binomial trial counts `L_j`; unused for the Poisson kind.
    trials: Vec<u64>,
    p: f64,
}

impl OffspringLaw {
    pub fn new(
        kind: OffspringKind,
        lambda: f64,
        a: &[f64],
        special_first_step: bool,
    ) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidSpec("need at least one type".into()));
        }
        if let Some(bad) = a.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidSpec(format!(
                "aspect ratio {bad} is not positive"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda {lambda} must be non-negative"
            )));
        }
        let (trials, p) = match kind {
            OffspringKind::Binomial { n } => {
                if n == 0 {
                    return Err(Error::InvalidParameter(
                        "binomial scale n must be positive".into(),
                    ));
                }
                let p = lambda / n as f64;
                if p > 1.0 {
                    return Err(Error::InvalidProbability(p));
                }
                let trials = a
                    .iter()
                    .map(|ai| ((ai * n as f64).round() as u64).max(1))
                    .collect();
                (trials, p)
            }
            OffspringKind::Poisson => (Vec::new(), 0.0),
        };
        Ok(OffspringLaw {
            kind,
            lambda,
            a: a.to_vec(),
            special_first_step,
            trials,
            p,
        })
    }

    pub fn poisson(lambda: f64, a: &[f64]) -> Result<Self> {
        Self::new(OffspringKind::Poisson, lambda, a, false)
    }

    pub fn binomial(n: u64, lambda: f64, a: &[f64]) -> Result<Self> {
        Self::new(OffspringKind::Binomial { n }, lambda, a, false)
    }

    /// Same law with the first-step rule switched.
    pub fn with_special_first_step(mut self, on: bool) -> Self {
        self.special_first_step = on;
        self
    }

    pub fn kind(&self) -> OffspringKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn types(&self) -> usize {
        self.a.len()
    }

    pub fn special_first_step(&self) -> bool {
        self.special_first_step
    }

    /// Mean number of type-j children of one parent that may bear type j.
    pub fn mean_children(&self, j: usize) -> f64 {
        match self.kind {
            OffspringKind::Binomial { .. } => self.trials[j] as f64 * self.p,
            OffspringKind::Poisson => self.lambda * self.a[j],
        }
    }

    /// Total type-j children of `parents` independent parents.
    pub fn draw_children_of<R: Rng + ?Sized>(&self, j: usize, parents: u64, rng: &mut R) -> u64 {
        if parents == 0 {
            return 0;
        }
        match self.kind {
            OffspringKind::Binomial { .. } => {
                if self.p == 0.0 {
                    return 0;
                }
                Binomial::new(self.trials[j] * parents, self.p)
                    .expect("validated binomial parameters")
                    .sample(rng)
            }
            OffspringKind::Poisson => {
                let mean = self.lambda * self.a[j] * parents as f64;
                if mean == 0.0 {
                    return 0;
                }
                Poisson::new(mean)
                    .expect("validated Poisson mean")
                    .sample(rng) as u64
            }
        }
    }

    /// Children of one individual by type; `parent_type = None` is a
    /// first-step individual that bears every type.
    pub fn draw_children<R: Rng + ?Sized>(
        &self,
        parent_type: Option<usize>,
        rng: &mut R,
    ) -> Vec<u64> {
        (0..self.types())
            .map(|j| {
                if Some(j) == parent_type {
                    0
                } else {
                    self.draw_children_of(j, 1, rng)
                }
            })
            .collect()
    }
}

/// State of the random-walk exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkState {
    /// Active individuals by type.
    pub s: Vec<u64>,
    /// Active first-step individuals, which bear every type.
    pub ancestors: u64,
    pub t: u64,
    pub total_retired: u64,
}

impl WalkState {
    /// Initial state; with `special` every starting individual is a first-step one.
    pub fn new(start: &[u64], special: bool) -> Self {
        if special {
            WalkState {
                s: vec![0; start.len()],
                ancestors: start.iter().sum(),
                t: 0,
                total_retired: 0,
            }
        } else {
            WalkState {
                s: start.to_vec(),
                ancestors: 0,
                t: 0,
                total_retired: 0,
            }
        }
    }

    pub fn active(&self) -> u64 {
        self.s.iter().sum::<u64>() + self.ancestors
    }

    /// Individuals born so far, active or retired.
    pub fn total(&self) -> u64 {
        self.active() + self.total_retired
    }

    pub fn is_extinct(&self) -> bool {
        self.active() == 0
    }

    /// Retires one uniformly chosen active individual after adding its
    /// children. Returns the retired type (`None` for a first-step individual).
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        law: &OffspringLaw,
        rng: &mut R,
    ) -> Result<Option<usize>> {
        let active = self.active();
        if active == 0 {
            return Err(Error::DeadWalk);
        }
        let mut pick = rng.random_range(0..active);
        let chosen = if pick < self.ancestors {
            None
        } else {
            pick -= self.ancestors;
            let mut chosen = 0;
            for (i, &si) in self.s.iter().enumerate() {
                if pick < si {
                    chosen = i;
                    break;
                }
                pick -= si;
            }
            Some(chosen)
        };
        let children = law.draw_children(chosen, rng);
        for (sj, cj) in self.s.iter_mut().zip(children) {
            *sj += cj;
        }
        match chosen {
            None => self.ancestors -= 1,
            Some(i) => self.s[i] -= 1,
        }
        self.t += 1;
        self.total_retired += 1;
        Ok(chosen)
    }
}

/// One step of the walk; see [`WalkState::step`].
pub fn walk_step<R: Rng + ?Sized>(
    state: &WalkState,
    law: &OffspringLaw,
    rng: &mut R,
) -> Result<WalkState> {
    let mut next = state.clone();
    next.step(law, rng)?;
    Ok(next)
}

/// Outcome of a capped progeny run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Progeny {
    /// The process died out with this many individuals in total.
    Extinct(u64),
    /// At least `cap` individuals were born.
    Exceeded(u64),
}

impl Progeny {
    pub fn exceeded(&self) -> bool {
        matches!(self, Progeny::Exceeded(_))
    }

    pub fn size(&self) -> u64 {
        match *self {
            Progeny::Extinct(n) | Progeny::Exceeded(n) => n,
        }
    }
}

/// Runs the walk from `start` until extinction or until `cap` individuals exist.
///
/// First-step individuals are used when the law has `special_first_step`.
/// The cap is reported as [`Progeny::Exceeded`] iff the total progeny is at least `cap`.
pub fn total_progeny<R: Rng + ?Sized>(
    law: &OffspringLaw,
    start: &[u64],
    cap: u64,
    rng: &mut R,
) -> Result<Progeny> {
    check_start(law, start)?;
    let mut state = WalkState::new(start, law.special_first_step);
    loop {
        if state.total() >= cap {
            return Ok(Progeny::Exceeded(cap));
        }
        if state.is_extinct() {
            return Ok(Progeny::Extinct(state.total()));
        }
        state.step(law, rng)?;
    }
}

/// Same outcome law as [`total_progeny`], generated a whole generation at a
/// time: the children of `k` exchangeable parents are one Poisson or
/// binomial draw per type. Cost grows with the number of generations rather
/// than the number of individuals.
pub fn total_progeny_by_generation<R: Rng + ?Sized>(
    law: &OffspringLaw,
    start: &[u64],
    cap: u64,
    rng: &mut R,
) -> Result<Progeny> {
    check_start(law, start)?;
    let d = law.types();
    let mut ancestors = if law.special_first_step {
        start.iter().sum()
    } else {
        0
    };
    let mut generation: Vec<u64> = if law.special_first_step {
        vec![0; d]
    } else {
        start.to_vec()
    };
    let mut born: u64 = start.iter().sum();
    loop {
        if born >= cap {
            return Ok(Progeny::Exceeded(cap));
        }
        let alive: u64 = generation.iter().sum::<u64>() + ancestors;
        if alive == 0 {
            return Ok(Progeny::Extinct(born));
        }
        let next: Vec<u64> = (0..d)
            .map(|j| law.draw_children_of(j, alive - generation[j], rng))
            .collect();
        born = born.saturating_add(next.iter().sum());
        generation = next;
        ancestors = 0;
    }
}

fn check_start(law: &OffspringLaw, start: &[u64]) -> Result<()> {
    if start.len() != law.types() {
        return Err(Error::InvalidParameter(format!(
            "start vector has {} entries, law has {} types",
            start.len(),
            law.types()
        )));
    }
    Ok(())
}

/// Where a survival experiment starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartType {
    /// One individual of the given 0-based type.
    Type(usize),
    /// One first-step individual bearing every type.
    Special,
}

impl StartType {
    /// Start vector and first-step flag for this start.
    pub fn resolve(self, types: usize) -> Result<(Vec<u64>, bool)> {
        match self {
            StartType::Type(i) if i < types => {
                let mut v = vec![0; types];
                v[i] = 1;
                Ok((v, false))
            }
            StartType::Type(i) => Err(Error::InvalidParameter(format!(
                "start type {} out of range 1..={types}",
                i + 1
            ))),
            StartType::Special => {
                let mut v = vec![0; types];
                v[0] = 1;
                Ok((v, true))
            }
        }
    }
}

/// Monte Carlo survival estimate; "survived" means the cap was reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub trials: u64,
    pub survived: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl SurvivalEstimate {
    pub fn from_counts(survived: u64, trials: u64) -> Self {
        let p = survived as f64 / trials as f64;
        SurvivalEstimate {
            trials,
            survived,
            estimate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Which exploration generates each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Walk,
    Generation,
}

fn run_trial(
    law: &OffspringLaw,
    start: &[u64],
    cap: u64,
    seed: u64,
    index: u64,
    engine: Engine,
) -> Progeny {
    let mut rng = trial_rng(seed, index);
    let out = match engine {
        Engine::Walk => total_progeny(law, start, cap, &mut rng),
        Engine::Generation => total_progeny_by_generation(law, start, cap, &mut rng),
    };
    out.expect("start vector validated before the trials")
}

/// Independent capped progeny trials; trial `k` draws from its own stream
/// derived from `(seed, k)`, so results do not depend on scheduling.
pub fn progeny_trials(
    law: &OffspringLaw,
    start: &[u64],
    trials: u64,
    cap: u64,
    seed: u64,
    engine: Engine,
) -> Result<Vec<Progeny>> {
    check_start(law, start)?;
    #[cfg(feature = "parallel")]
    let out = (0..trials)
        .into_par_iter()
        .map(|k| run_trial(law, start, cap, seed, k, engine))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let out = (0..trials)
        .map(|k| run_trial(law, start, cap, seed, k, engine))
        .collect();
    Ok(out)
}

/// Estimates `1 - q_i` (type start) or `1 - q` (first-step start) as the
/// fraction of trials whose progeny reaches `cap`.
///
/// Trials use the generation engine; the reached-cap event has the same law
/// as under the walk.
pub fn survival_probability(
    law: &OffspringLaw,
    start: StartType,
    trials: u64,
    cap: u64,
    seed: u64,
) -> Result<SurvivalEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let (vector, special) = start.resolve(law.types())?;
    let law = law.clone().with_special_first_step(special);
    let outcomes = progeny_trials(&law, &vector, trials, cap, seed, Engine::Generation)?;
    let survived = outcomes.iter().filter(|o| o.exceeded()).count() as u64;
    Ok(SurvivalEstimate::from_counts(survived, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn own_type_birth_is_excluded() {
        let law = OffspringLaw::poisson(3.0, &[1.0, 1.0]).unwrap();
        let mut r = rng(1);
        for _ in 0..200 {
            let st = walk_step(&WalkState::new(&[1, 0], false), &law, &mut r).unwrap();
            assert_eq!(st.s[0], 0);
            assert_eq!(st.t, 1);
            assert_eq!(st.total_retired, 1);
        }
    }

    #[test]
    fn zero_lambda_dies_in_start_size_steps() {
        let law = OffspringLaw::poisson(0.0, &[1.0, 2.0, 1.0]).unwrap();
        let mut st = WalkState::new(&[2, 0, 3], false);
        let mut r = rng(2);
        while !st.is_extinct() {
            st.step(&law, &mut r).unwrap();
        }
        assert_eq!(st.t, 5);
        assert_eq!(st.step(&law, &mut r), Err(Error::DeadWalk));
        assert_eq!(
            total_progeny(&law, &[1, 0, 0], 100, &mut r).unwrap(),
            Progeny::Extinct(1)
        );
    }

    #[test]
    fn walk_bookkeeping() {
        let law = OffspringLaw::binomial(50, 1.5, &[1.0, 0.5, 2.0])
            .unwrap()
            .with_special_first_step(true);
        let mut st = WalkState::new(&[1, 0, 0], true);
        let mut r = rng(3);
        let first = st.step(&law, &mut r).unwrap();
        assert_eq!(first, None);
        let mut seen = st.total();
        for _ in 0..50 {
            if st.is_extinct() {
                break;
            }
            st.step(&law, &mut r).unwrap();
            assert!(st.total() >= seen);
            assert_eq!(st.total(), st.active() + st.total_retired);
            seen = st.total();
        }
    }

    #[test]
    fn cap_is_reported_not_conflated() {
        let law = OffspringLaw::poisson(3.0, &[1.0, 1.0]).unwrap();
        let mut r = rng(4);
        let outcomes: Vec<_> = (0..200)
            .map(|_| total_progeny(&law, &[1, 0], 1000, &mut r).unwrap())
            .collect();
        assert!(outcomes.iter().any(|o| o.exceeded()));
        for o in outcomes {
            match o {
                Progeny::Exceeded(c) => assert_eq!(c, 1000),
                Progeny::Extinct(n) => assert!(n < 1000),
            }
        }
    }

    #[test]
    fn mean_offspring_matrix() {
        let a = [1.0, 0.5, 1.5];
        let lambda = 0.8;
        let m = theory::ExpectationMatrix::new(lambda, &a).unwrap();
        for law in [
            OffspringLaw::poisson(lambda, &a).unwrap(),
            OffspringLaw::binomial(200, lambda, &a).unwrap(),
        ] {
            let mut r = rng(5);
            let draws = 100_000;
            for i in 0..3 {
                let mut sum = [0f64; 3];
                let mut sq = [0f64; 3];
                for _ in 0..draws {
                    for (j, c) in law.draw_children(Some(i), &mut r).into_iter().enumerate() {
                        sum[j] += c as f64;
                        sq[j] += (c * c) as f64;
                    }
                }
                for j in 0..3 {
                    let mean = sum[j] / draws as f64;
                    let var = sq[j] / draws as f64 - mean * mean;
                    let se = (var / draws as f64).sqrt();
                    if i == j {
                        assert_eq!(sum[j], 0.0);
                    } else {
                        assert!(
                            (mean - m.entry(i, j)).abs() < 3.0 * se.max(1e-12),
                            "({i},{j}) {mean} vs {}",
                            m.entry(i, j)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mu_drift_per_step() {
        let a = [1.0, 1.3, 0.7];
        let lambda = 0.6;
        let pf = theory::perron(lambda, &a).unwrap();
        let law = OffspringLaw::poisson(lambda, &a).unwrap();
        let mut r = rng(6);
        let draws = 200_000;
        for i in 0..3 {
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..draws {
                let kids = law.draw_children(Some(i), &mut r);
                let inc: f64 = kids
                    .iter()
                    .zip(&pf.mu)
                    .map(|(&k, m)| k as f64 * m)
                    .sum::<f64>()
                    - pf.mu[i];
                sum += inc;
                sq += inc * inc;
            }
            let mean = sum / draws as f64;
            let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
            let want = (pf.rho - 1.0) * pf.mu[i];
            assert!((mean - want).abs() < 3.0 * se, "type {i}: {mean} vs {want}");
        }
    }

    #[test]
    fn engines_agree_in_distribution() {
        let law = OffspringLaw::poisson(0.45, &[1.0, 1.0, 1.0]).unwrap();
        let trials = 20_000;
        let walk = progeny_trials(&law, &[1, 0, 0], trials, 10_000, 7, Engine::Walk).unwrap();
        let gen = progeny_trials(&law, &[1, 0, 0], trials, 10_000, 8, Engine::Generation).unwrap();
        let mean = |v: &[Progeny]| v.iter().map(|p| p.size() as f64).sum::<f64>() / v.len() as f64;
        let var = |v: &[Progeny], m: f64| {
            v.iter().map(|p| (p.size() as f64 - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let (mw, mg) = (mean(&walk), mean(&gen));
        let se = ((var(&walk, mw) + var(&gen, mg)) / trials as f64).sqrt();
        assert!((mw - mg).abs() < 4.0 * se, "{mw} vs {mg}");
        // P(T = 1) = exp(-2λ) exactly for a type start
        let p1 = (-0.9f64).exp();
        for v in [&walk, &gen] {
            let f = v.iter().filter(|p| p.size() == 1).count() as f64 / trials as f64;
            assert!((f - p1).abs() < 4.0 * (p1 * (1.0 - p1) / trials as f64).sqrt());
        }
    }

    #[test]
    fn subcritical_mean_is_stable_across_caps() {
        let law = OffspringLaw::poisson(0.5, &[1.0, 1.0]).unwrap();
        let a = progeny_trials(&law, &[1, 0], 50_000, 1_000, 9, Engine::Walk).unwrap();
        let b = progeny_trials(&law, &[1, 0], 50_000, 10_000, 9, Engine::Walk).unwrap();
        let mean = |v: &[Progeny]| v.iter().map(|p| p.size() as f64).sum::<f64>() / v.len() as f64;
        assert!(a.iter().chain(&b).all(|p| !p.exceeded()));
        // single-type reduction: ρ = 0.5 gives E T = 1 / (1 - 0.5) = 2
        assert!((mean(&a) - 2.0).abs() < 0.05);
        assert!((mean(&a) - mean(&b)).abs() < 1e-12);
    }

    #[test]
    fn trials_are_reproducible() {
        let law = OffspringLaw::poisson(1.5, &[1.0, 1.0]).unwrap();
        let a = progeny_trials(&law, &[0, 1], 500, 2_000, 11, Engine::Walk).unwrap();
        let b = progeny_trials(&law, &[0, 1], 500, 2_000, 11, Engine::Walk).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn survival_subcritical_is_zero() {
        let law = OffspringLaw::poisson(0.5, &[1.0, 1.0]).unwrap();
        let est = survival_probability(&law, StartType::Type(0), 20_000, 1_000, 12).unwrap();
        assert!(est.estimate <= 3.0 * est.std_error.max(1.0 / 20_000.0));
    }

    #[test]
    fn survival_from_special_start_matches_one_minus_q() {
        let a = [1.0, 1.0];
        let ext = theory::extinction(2.0, &a).unwrap();
        let law = OffspringLaw::poisson(2.0, &a).unwrap();
        let est = survival_probability(&law, StartType::Special, 40_000, 20_000, 13).unwrap();
        let want = 1.0 - ext.q;
        let se = (want * (1.0 - want) / 40_000.0).sqrt();
        assert!(
            (est.estimate - want).abs() < 4.0 * se,
            "{} vs {want}",
            est.estimate
        );
    }

    #[test]
    fn binomial_limit_matches_poisson() {
        let a = [1.0, 1.0];
        let poisson = OffspringLaw::poisson(2.0, &a).unwrap();
        let binomial = OffspringLaw::binomial(10_000, 2.0, &a).unwrap();
        let p = survival_probability(&poisson, StartType::Type(0), 40_000, 20_000, 14).unwrap();
        let b = survival_probability(&binomial, StartType::Type(0), 40_000, 20_000, 15).unwrap();
        assert!((p.estimate - b.estimate).abs() < 0.01);
    }

    #[test]
    fn bad_inputs() {
        assert!(OffspringLaw::binomial(10, 20.0, &[1.0, 1.0]).is_err());
        assert!(OffspringLaw::poisson(1.0, &[]).is_err());
        let law = OffspringLaw::poisson(1.0, &[1.0, 1.0]).unwrap();
        assert!(survival_probability(&law, StartType::Type(2), 10, 10, 0).is_err());
        assert!(survival_probability(&law, StartType::Type(0), 0, 10, 0).is_err());
        assert!(total_progeny(&law, &[1], 10, &mut rng(0)).is_err());
    }
}
