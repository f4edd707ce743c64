//! Exact sampling of the discrete GFF, Markov (local-set) resampling, and
//! the metric-graph edge-crossing auxiliary randomness.
//!
//! Reproducibility: all randomness flows through ChaCha streams keyed by
//! `(seed, stream)`. Monte Carlo drivers assign one stream block per sample
//! index, so results are independent of scheduling and parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{BoundaryData, LatticeDomain};
use crate::error::Result;
use crate::potential::GreenOracle;
use crate::subgraph::Subgraph;

/// Deterministic RNG for a `(seed, stream)` pair.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One realization of the zero-boundary discrete GFF (continuum
/// normalization: covariance `κ · L⁻¹`).
#[derive(Debug, Clone)]
pub struct FieldSample {
    /// Per interior vertex; zero on boundary vertices by convention.
    pub phi: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl FieldSample {
    /// Total field φ + u at a unified vertex id.
    pub fn total(&self, dom: &LatticeDomain, u: &BoundaryData, id: usize) -> f64 {
        let n = dom.interior_count();
        if id < n {
            self.phi[id] + u.harmonic_extension[id]
        } else {
            u.values[id - n]
        }
    }
}

/// Exact GFF sample: `√κ · L^{-T} z` with iid standard normal `z`.
pub fn sample_gff(oracle: &GreenOracle, seed: u64, stream: u64) -> Result<FieldSample> {
    let kappa = oracle.calibration()?.kappa;
    let n = oracle.dom().interior_count();
    let mut rng = rng_for(seed, stream);
    let mut z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    oracle.chol().backward(&mut z);
    let sqrt_k = kappa.sqrt();
    for v in z.iter_mut() {
        *v *= sqrt_k;
    }
    Ok(FieldSample {
        phi: z,
        seed,
        stream,
    })
}

/// Zero-boundary GFF on a prefactorized subgraph plus a given harmonic part
/// (both subgraph-indexed). Used to share one factorization across many
/// conditional resamples.
pub fn resample_on(
    sub: &Subgraph,
    kappa: f64,
    harmonic: &[f64],
    seed: u64,
    stream: u64,
) -> Vec<f64> {
    let mut rng = rng_for(seed, stream);
    let mut z: Vec<f64> = (0..sub.len()).map(|_| rng.sample(StandardNormal)).collect();
    sub.half_solve(&mut z);
    let sqrt_k = kappa.sqrt();
    for (v, h) in z.iter_mut().zip(harmonic) {
        *v = *v * sqrt_k + h;
    }
    z
}

/// Conditional resample beyond a vertex set A: the returned field equals the
/// harmonic extension of the data `value_at` (defined on A's interior
/// vertices and on all boundary vertices, by unified id) plus an independent
/// zero-boundary GFF on the complement. On A the field equals `value_at`.
///
/// With `in_a` all false and zero boundary data this is an ordinary
/// [`sample_gff`]; with `in_a` all true the field is deterministic.
pub fn resample_beyond(
    oracle: &GreenOracle,
    in_a: &[bool],
    value_at: impl Fn(usize) -> f64,
    seed: u64,
    stream: u64,
) -> Result<FieldSample> {
    let dom = oracle.dom();
    let n = dom.interior_count();
    assert_eq!(in_a.len(), n);
    let kappa = oracle.calibration()?.kappa;
    let mut phi: Vec<f64> = (0..n).map(|v| if in_a[v] { value_at(v) } else { 0.0 }).collect();
    let kept: Vec<bool> = in_a.iter().map(|&x| !x).collect();
    if kept.iter().any(|&x| x) {
        let sub = Subgraph::new(dom, &kept)?;
        let harm = sub.harmonic(&value_at);
        let field = resample_on(&sub, kappa, &harm, seed, stream);
        for (s, &v) in sub.keep().iter().enumerate() {
            phi[v as usize] = field[s];
        }
    }
    Ok(FieldSample {
        phi,
        seed,
        stream,
    })
}

/// One uniform per domain edge, shared across crossing levels so that
/// extractions at nested levels are monotonically coupled.
pub struct EdgeUniforms(pub Vec<f64>);

pub fn sample_edge_uniforms(dom: &LatticeDomain, seed: u64, stream: u64) -> EdgeUniforms {
    let mut rng = rng_for(seed, stream);
    EdgeUniforms((0..dom.edges().len()).map(|_| rng.gen::<f64>()).collect())
}

/// Metric-graph crossing indicators at one level, aligned with `dom.edges()`.
pub struct EdgeCrossings {
    pub level: f64,
    pub crossed: Vec<bool>,
}

/// Whether the metric-graph field on each edge dips below `level`, given the
/// endpoint values of the total field: deterministic if an endpoint is at or
/// below the level, otherwise Bernoulli with
/// `P(crossed) = exp(−2αβ / (R_e · κ″))` for endpoint excesses α, β > 0
/// (unit edge resistances).
pub fn crossings_at_level(
    dom: &LatticeDomain,
    total: impl Fn(usize) -> f64,
    level: f64,
    kappa_edge: f64,
    uniforms: &EdgeUniforms,
) -> EdgeCrossings {
    let crossed = dom
        .edges()
        .iter()
        .zip(&uniforms.0)
        .map(|(&(a, b), &u)| {
            let alpha = total(a as usize) - level;
            let beta = total(b as usize) - level;
            if alpha <= 0.0 || beta <= 0.0 {
                true
            } else {
                u < (-2.0 * alpha * beta / kappa_edge).exp()
            }
        })
        .collect();
    EdgeCrossings { level, crossed }
}
