//! Seeded random pairs and families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{ExponentContext, MeasureSpace, WeightedFunction};
use crate::pairwise::PairInput;

/// Default per-atom zeroing probability of the random kinds.
pub const DEFAULT_ZERO_PROB: f64 = 0.2;

/// Distribution of a single nonzero value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueDist {
    /// Uniform on `(0, 1]`.
    Uniform,
    /// Log-uniform on `[1e-6, 1e3]`.
    LogUniform,
    /// Even mixture of the two.
    Mixed,
}

impl ValueDist {
    pub fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            ValueDist::Uniform => 1.0 - rng.gen::<f64>(),
            ValueDist::LogUniform => 10f64.powf(rng.gen_range(-6.0..=3.0)),
            ValueDist::Mixed => {
                if rng.gen_bool(0.5) {
                    ValueDist::Uniform.sample(rng)
                } else {
                    ValueDist::LogUniform.sample(rng)
                }
            }
        }
    }
}

/// Where a proportional pair satisfies `α f = β g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportPattern {
    /// On every atom; both functions share one support.
    Everywhere,
    /// On `{g ≠ 0}` only; `f` is also positive somewhere `g` vanishes.
    OnSupportG,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeneratorKind {
    /// Independent values with per-atom zeroing.
    Iid { dist: ValueDist, zero_prob: f64 },
    /// `α f = β g` on the chosen support.
    Proportional {
        alpha: f64,
        beta: f64,
        support: SupportPattern,
    },
    /// Nonempty disjoint supports.
    Disjoint,
    /// `f = α φ χ_A + ψ1 χ_B`, `g = β φ χ_A + ψ2 χ_B`, with `A` the first
    /// `block_a` atoms and `ψ2` scaled by `psi2_scale`. Block values are
    /// uniform on `[1/2, 3/2]`.
    Example1 {
        block_a: usize,
        alpha: f64,
        beta: f64,
        psi2_scale: f64,
    },
    /// Mixed values with a custom zeroing probability.
    Sparse { zero_prob: f64 },
}

/// Atom weights of the generated space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Counting,
    /// Log-uniform on `[0.1, 10]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub atoms: usize,
    pub seed: u64,
    #[serde(default)]
    pub weights: WeightMode,
}

impl GeneratorSpec {
    pub fn iid(atoms: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Iid {
                dist: ValueDist::Mixed,
                zero_prob: DEFAULT_ZERO_PROB,
            },
            atoms,
            seed,
            weights: WeightMode::Counting,
        }
    }

    pub fn with_kind(self, kind: GeneratorKind) -> Self {
        Self { kind, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_weights(self, weights: WeightMode) -> Self {
        Self { weights, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.atoms == 0 {
            return bad("a pair needs at least one atom".into());
        }
        let prob_ok = |q: f64| (0.0..1.0).contains(&q);
        match self.kind {
            GeneratorKind::Iid { zero_prob, .. } | GeneratorKind::Sparse { zero_prob } if !prob_ok(zero_prob) => {
                bad(format!("zero probability {zero_prob} outside [0, 1)"))
            }
            GeneratorKind::Proportional { alpha, beta, .. } if !(alpha > 0.0 && beta > 0.0) => {
                bad(format!("proportionality constants ({alpha}, {beta}) must be positive"))
            }
            GeneratorKind::Proportional {
                support: SupportPattern::OnSupportG,
                ..
            } if self.atoms < 2 => bad("proportionality on a proper support needs two atoms".into()),
            GeneratorKind::Disjoint if self.atoms < 2 => bad("disjoint supports need two atoms".into()),
            GeneratorKind::Example1 {
                block_a,
                alpha,
                beta,
                psi2_scale,
            } => {
                if block_a == 0 || block_a >= self.atoms {
                    bad(format!(
                        "block A of {block_a} atoms leaves no room in {} atoms",
                        self.atoms
                    ))
                } else if !(alpha > 0.0 && beta > 0.0) {
                    bad(format!("scalars ({alpha}, {beta}) must be positive"))
                } else if !(psi2_scale >= 0.0 && psi2_scale.is_finite()) {
                    bad(format!("psi2 scale {psi2_scale} must be finite and nonnegative"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`; independent of evaluation order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(master ^ mix(index))
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn space_for<R: Rng>(rng: &mut R, atoms: usize, mode: WeightMode) -> Result<MeasureSpace> {
    match mode {
        WeightMode::Counting => MeasureSpace::counting(atoms),
        WeightMode::Random => MeasureSpace::new((0..atoms).map(|_| 10f64.powf(rng.gen_range(-1.0..=1.0))).collect()),
    }
}

/// Independent values; every entry nonzero when `zero_prob` is 0, and at
/// least one nonzero entry otherwise.
fn random_values<R: Rng>(rng: &mut R, n: usize, dist: ValueDist, zero_prob: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let x = dist.sample(rng);
            if zero_prob > 0.0 && rng.gen_bool(zero_prob) {
                0.0
            } else {
                x
            }
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        let k = rng.gen_range(0..n);
        v[k] = dist.sample(rng);
    }
    v
}

/// Splits `0..n` into two nonempty random parts.
fn random_split<R: Rng>(rng: &mut R, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let cut = rng.gen_range(1..n);
    let mut first = idx[..cut].to_vec();
    let mut second = idx[cut..].to_vec();
    first.sort_unstable();
    second.sort_unstable();
    (first, second)
}

/// Raw values `(weights, f, g)` for the spec.
///
/// `positive` forces the random kinds to draw strictly positive values.
pub fn generate_values(spec: &GeneratorSpec, positive: bool) -> Result<(MeasureSpace, Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed);
    let n = spec.atoms;
    let space = space_for(&mut rng, n, spec.weights)?;
    let dist = ValueDist::Mixed;
    let (f, g) = match spec.kind {
        GeneratorKind::Iid { dist, zero_prob } => {
            let q = if positive { 0.0 } else { zero_prob };
            (random_values(&mut rng, n, dist, q), random_values(&mut rng, n, dist, q))
        }
        GeneratorKind::Sparse { zero_prob } => {
            let q = if positive { 0.0 } else { zero_prob };
            (random_values(&mut rng, n, dist, q), random_values(&mut rng, n, dist, q))
        }
        GeneratorKind::Proportional { alpha, beta, support } => {
            let phi = random_values(&mut rng, n, dist, 0.0);
            // α f = β g with f = β φ, g = α φ
            let mut f: Vec<f64> = phi.iter().map(|x| beta * x).collect();
            let mut g: Vec<f64> = phi.iter().map(|x| alpha * x).collect();
            if support == SupportPattern::OnSupportG {
                let (_, off) = random_split(&mut rng, n);
                for k in off {
                    g[k] = 0.0;
                    f[k] = dist.sample(&mut rng);
                }
            }
            (f, g)
        }
        GeneratorKind::Disjoint => {
            let (a, b) = random_split(&mut rng, n);
            let mut f = vec![0.0; n];
            let mut g = vec![0.0; n];
            for k in a {
                f[k] = dist.sample(&mut rng);
            }
            for k in b {
                g[k] = dist.sample(&mut rng);
            }
            (f, g)
        }
        GeneratorKind::Example1 {
            block_a,
            alpha,
            beta,
            psi2_scale,
        } => {
            // block values stay comparable so neither block dominates the norms
            let mut block = || rng.gen_range(0.5..=1.5);
            let mut f = vec![0.0; n];
            let mut g = vec![0.0; n];
            for k in 0..block_a {
                let phi = block();
                f[k] = alpha * phi;
                g[k] = beta * phi;
            }
            for k in block_a..n {
                f[k] = block();
                g[k] = psi2_scale * block();
            }
            (f, g)
        }
    };
    Ok((space, f, g))
}

/// A validated pair for the spec. In the reverse regime `p < 2` the random
/// kinds emit strictly positive values.
pub fn generate_pair(spec: &GeneratorSpec, ctx: &ExponentContext) -> Result<PairInput> {
    let (space, f, g) = generate_values(spec, ctx.is_reverse_regime())?;
    let f = WeightedFunction::new(&space, f)?;
    let g = WeightedFunction::new(&space, g)?;
    PairInput::new(f, g, *ctx)
}

/// `n` random functions on one space drawn from the spec's value model;
/// `Disjoint` places each function on its own block of atoms.
pub fn generate_family(spec: &GeneratorSpec, n: usize, positive: bool) -> Result<Vec<WeightedFunction>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSpec("a family needs at least one member".into()));
    }
    let mut rng = rng_for(spec.seed);
    let atoms = spec.atoms;
    let space = space_for(&mut rng, atoms, spec.weights)?;
    let dist = ValueDist::Mixed;
    let zero_prob = match spec.kind {
        GeneratorKind::Iid { zero_prob, .. } | GeneratorKind::Sparse { zero_prob } => zero_prob,
        _ => DEFAULT_ZERO_PROB,
    };
    let q = if positive { 0.0 } else { zero_prob };
    match spec.kind {
        GeneratorKind::Disjoint => {
            if atoms < n {
                return Err(Error::InvalidSpec(format!(
                    "{n} disjoint functions need {n} atoms, got {atoms}"
                )));
            }
            let mut idx: Vec<usize> = (0..atoms).collect();
            idx.shuffle(&mut rng);
            let owner: Vec<usize> = (0..atoms).map(|k| k % n).collect();
            (0..n)
                .map(|j| {
                    let mut v = vec![0.0; atoms];
                    for (slot, &k) in idx.iter().enumerate() {
                        if owner[slot] == j {
                            v[k] = dist.sample(&mut rng);
                        }
                    }
                    WeightedFunction::new(&space, v)
                })
                .collect()
        }
        GeneratorKind::Proportional { .. } => {
            let phi = random_values(&mut rng, atoms, dist, q);
            (0..n)
                .map(|_| {
                    let c = dist.sample(&mut rng);
                    WeightedFunction::new(&space, phi.iter().map(|x| c * x).collect())
                })
                .collect()
        }
        _ => (0..n)
            .map(|_| WeightedFunction::new(&space, random_values(&mut rng, atoms, dist, q)))
            .collect(),
    }
}

/// Nonnegative reals uniform on `[0, hi]`, `len` of them.
pub fn generate_scalars(seed: u64, len: usize, hi: f64) -> Vec<f64> {
    let mut rng = rng_for(seed);
    (0..len).map(|_| rng.gen_range(0.0..=hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairwise::{classify_equality, gamma_p, EqualityKind};

    fn ctx(p: f64) -> ExponentContext {
        ExponentContext::new(p).unwrap()
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = GeneratorSpec::iid(8, 42).with_weights(WeightMode::Random);
        let a = generate_values(&spec, false).unwrap();
        let b = generate_values(&spec, false).unwrap();
        assert_eq!(a, b);
        let c = generate_values(&spec.with_seed(43), false).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn proportional_everywhere_witness() {
        let spec = GeneratorSpec::iid(6, 1).with_kind(GeneratorKind::Proportional {
            alpha: 2.0,
            beta: 3.0,
            support: SupportPattern::Everywhere,
        });
        let pair = generate_pair(&spec, &ctx(4.0)).unwrap();
        let class = classify_equality(&pair, 1e-12);
        assert_eq!(class.kind, EqualityKind::ProportionalEverywhere);
        assert!(class.witness.unwrap().matches(2.0, 3.0, 1e-12));
    }

    #[test]
    fn proportional_on_support_of_g() {
        let spec = GeneratorSpec::iid(6, 2).with_kind(GeneratorKind::Proportional {
            alpha: 1.0,
            beta: 5.0,
            support: SupportPattern::OnSupportG,
        });
        let pair = generate_pair(&spec, &ctx(2.5)).unwrap();
        assert_eq!(
            classify_equality(&pair, 1e-12).kind,
            EqualityKind::ProportionalOnSupportG
        );
    }

    #[test]
    fn disjoint_has_zero_overlap() {
        let spec = GeneratorSpec::iid(5, 3).with_kind(GeneratorKind::Disjoint);
        let pair = generate_pair(&spec, &ctx(3.0)).unwrap();
        assert_eq!(gamma_p(&pair).gamma, 0.0);
        let one = GeneratorSpec::iid(1, 3).with_kind(GeneratorKind::Disjoint);
        assert!(matches!(generate_pair(&one, &ctx(3.0)), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn example1_without_psi2_is_proportional_on_g() {
        let spec = GeneratorSpec::iid(6, 4).with_kind(GeneratorKind::Example1 {
            block_a: 3,
            alpha: 1.0,
            beta: 2.0,
            psi2_scale: 0.0,
        });
        let pair = generate_pair(&spec, &ctx(4.0)).unwrap();
        let class = classify_equality(&pair, 1e-12);
        assert_eq!(class.kind, EqualityKind::ProportionalOnSupportG);
        // β f = α g on {g ≠ 0}
        assert!(class.witness.unwrap().matches(2.0, 1.0, 1e-12));
    }

    #[test]
    fn reverse_regime_is_strictly_positive() {
        for seed in 0..50 {
            let pair = generate_pair(&GeneratorSpec::iid(12, seed), &ctx(1.5)).unwrap();
            assert!(pair.both_strictly_positive());
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
