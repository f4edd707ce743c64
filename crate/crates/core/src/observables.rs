//! Per-sample observables whose exact laws the laboratory verifies:
//! Green-difference hitting times, extremal-distance decrements, level
//! recovery from the bare set, conditional multiplicative-chaos masses, and
//! the discrete H⁻¹ distance.

use std::f64::consts::PI;

use rand::Rng;

use crate::domain::{BoundaryData, Cell, LatticeDomain};
use crate::error::{Error, Result};
use crate::local_sets::{extract_fps_up, LocalSetKind, LocalSetSample};
use crate::potential::GreenOracle;
use crate::sampler::{crossings_at_level, resample_on, sample_edge_uniforms, sample_gff, EdgeCrossings};
use crate::subgraph::{components, Subgraph};

/// A named series of per-sample observable values with its seed provenance.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl ObservableSeries {
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        ObservableSeries {
            name: name.into(),
            values: Vec::new(),
            seed,
        }
    }

    /// Append a value; observables must be finite.
    pub fn push(&mut self, v: f64) {
        assert!(v.is_finite(), "non-finite observable in {}: {v}", self.name);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        let n = self.values.len() as f64;
        let m = self.mean();
        let var = self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Green-difference hitting-time observable `G_D(z,z) − G_{D∖A}(z,z)`.
/// The log-singularities cancel, so the difference of raw diagonals times κ
/// is already the continuum-normalized value.
pub fn hitting_time_observable(
    oracle: &GreenOracle,
    sub: &Subgraph,
    ls: &LocalSetSample,
    z: usize,
) -> Result<f64> {
    if ls.in_set[z] {
        return Err(Error::VertexInSet(z));
    }
    let kappa = oracle.calibration()?.kappa;
    let raw_dom = oracle.raw_diag()[z];
    let raw_sub = sub.green_raw_diag_at(z)?;
    Ok(kappa * (raw_dom - raw_sub))
}

/// Capped hitting time `min(τ, T_z)` with `T_z = G_D(z,z)`: the lattice
/// observable is bounded by `T_z` (complement Green diagonals are
/// nonnegative) and equals the cap exactly when `z` falls into the set.
/// The complement solve is restricted to z's connected component.
pub fn hitting_time_capped(oracle: &GreenOracle, ls: &LocalSetSample, z: usize) -> Result<f64> {
    let kappa = oracle.calibration()?.kappa;
    let cap = kappa * oracle.raw_diag()[z];
    if ls.in_set[z] {
        return Ok(cap);
    }
    let kept: Vec<bool> = ls.in_set.iter().map(|&x| !x).collect();
    let sub = Subgraph::component_of(oracle.dom(), &kept, z)?;
    let tau = kappa * (oracle.raw_diag()[z] - sub.green_raw_diag_at(z)?);
    Ok(tau.min(cap))
}

/// Lattice-resolution censoring point for the capped hitting time at `z`.
/// The hitting-time observable saturates once the complement's conformal
/// radius at `z` shrinks to the lattice scale; values larger than
/// `T_z − ((2π)⁻¹ log c + s)` correspond to a complement of conformal radius
/// below `c·mesh`, which the lattice cannot resolve. Comparisons against the
/// continuum law censor both sides at this point (c ≈ 4 is enough for the
/// body of the law to match at the 10⁻² level on the meshes used here).
pub fn hitting_time_resolution_cap(oracle: &GreenOracle, z: usize, c: f64) -> Result<f64> {
    let calib = oracle.calibration()?;
    let cap = calib.kappa * oracle.raw_diag()[z];
    Ok(cap - (c.ln() / (2.0 * PI) + calib.self_singularity))
}

/// Boundary components other than `b`.
fn other_components(dom: &LatticeDomain, b: &[usize]) -> Vec<usize> {
    (0..dom.component_count()).filter(|c| !b.contains(c)).collect()
}

/// Boundary values on the components of `cs`, which must be constant there.
fn constant_value_on(dom: &LatticeDomain, cs: &[usize], u_values: &[f64]) -> Result<f64> {
    let vals: Vec<f64> = dom
        .boundary()
        .iter()
        .zip(u_values)
        .filter(|(bv, _)| cs.contains(&bv.component))
        .map(|(_, &v)| v)
        .collect();
    if vals.is_empty() {
        return Err(Error::EmptySet("no boundary vertices on components".into()));
    }
    let (lo, hi) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    if hi - lo > 1e-9 {
        return Err(Error::ConfigViolation(format!(
            "boundary value on components {cs:?} is not constant ({lo}..{hi})"
        )));
    }
    Ok(lo)
}

/// Extremal-length decrement `EL(B, ∂D∖B) − EL(B ∪ (A∖∂D), ∂D∖B)` of a local
/// set in a multiply connected domain.
fn el_decrement(oracle: &GreenOracle, b: &[usize], in_set: &[bool]) -> Result<f64> {
    let others = other_components(oracle.dom(), b);
    if others.is_empty() {
        return Err(Error::ConfigViolation(
            "extremal-distance observable needs a multiply connected domain".into(),
        ));
    }
    let el0 = oracle.extremal_length(b, &others)?;
    let el1 = oracle.extremal_length_with_set(&others, in_set)?;
    Ok(el0 - el1)
}

/// Extremal-distance observable of a downward FPS: the boundary data must be
/// a constant `u_e ≤ −a` on `∂D∖B`.
pub fn extremal_distance_observable(
    oracle: &GreenOracle,
    ls: &LocalSetSample,
    b: &[usize],
    u_values: &[f64],
) -> Result<f64> {
    let a = match ls.kind {
        LocalSetKind::FpsDown(a) => a,
        _ => {
            return Err(Error::ConfigViolation(
                "extremal-distance law expects a downward FPS".into(),
            ))
        }
    };
    let others = other_components(oracle.dom(), b);
    let ue = constant_value_on(oracle.dom(), &others, u_values)?;
    if ue > -a + 1e-12 {
        return Err(Error::ConfigViolation(format!(
            "boundary value {ue} on ∂D∖B exceeds −a = {}",
            -a
        )));
    }
    el_decrement(oracle, b, &ls.in_set)
}

/// Extremal-distance observable of a two-valued local set: the boundary data
/// must lie in `[−a, b]` on `B` and be a constant outside `(−a, b)` on the
/// other components.
pub fn tvs_extremal_distance_observable(
    oracle: &GreenOracle,
    ls: &LocalSetSample,
    b: &[usize],
    u_values: &[f64],
) -> Result<f64> {
    let (la, lb) = match ls.kind {
        LocalSetKind::Tvs(a, b) => (a, b),
        _ => {
            return Err(Error::ConfigViolation(
                "TVS extremal-distance law expects a two-valued set".into(),
            ))
        }
    };
    for (bv, &v) in oracle.dom().boundary().iter().zip(u_values) {
        if b.contains(&bv.component) && !(-la - 1e-12..=lb + 1e-12).contains(&v) {
            return Err(Error::ConfigViolation(format!(
                "boundary value {v} on B outside [−a, b] = [{}, {lb}]",
                -la
            )));
        }
    }
    let others = other_components(oracle.dom(), b);
    let ue = constant_value_on(oracle.dom(), &others, u_values)?;
    if ue > -la + 1e-12 && ue < lb - 1e-12 {
        return Err(Error::ConfigViolation(format!(
            "boundary value {ue} on ∂D∖B lies inside (−a, b)"
        )));
    }
    el_decrement(oracle, b, &ls.in_set)
}

/// Residual-segment conductance excess `v = 1/(1−t*) − 1` for the first
/// crossing location `t*` of level 0 along an edge whose metric-graph field
/// is a Brownian bridge of variance scale `kappa` from excess `alpha ≥ 0` to
/// excess `beta`, conditioned to cross.
///
/// The first-passage decomposition gives `t*` the density
/// `∝ t^{-3/2}(1−t)^{-1/2} exp(−α²/(2κt) − β²/(2κ(1−t)))`; substituting
/// `v = t/(1−t)` turns this into a generalized inverse Gaussian with index
/// 1/2, whose reciprocal is the inverse Gaussian `IG(α/|β|, α²/κ)`. The
/// `β = 0` limit is the one-sided stable case `v = α²/(κZ²)`.
fn crossing_conductance_excess(alpha: f64, beta: f64, kappa: f64, rng: &mut impl Rng) -> f64 {
    const V_MAX: f64 = 1e12;
    if alpha <= 1e-12 {
        return 0.0; // set boundary at the vertex itself: full edge remains
    }
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    if beta.abs() <= 1e-12 {
        return (alpha * alpha / (kappa * z * z)).min(V_MAX);
    }
    // Michael–Schucany–Haas inverse-Gaussian sampler
    let mu = alpha / beta.abs();
    let lam = alpha * alpha / kappa;
    let nu = z * z;
    let x = (mu + mu * mu * nu / (2.0 * lam)
        - (mu / (2.0 * lam)) * (4.0 * mu * lam * nu + mu * mu * nu * nu).sqrt())
    .max(1e-300);
    let u: f64 = rng.gen();
    let v = if u <= mu / (mu + x) { x } else { mu * mu / x };
    v.min(V_MAX)
}

/// Whether a unified vertex id belongs to the grounded electrode of the
/// decrement solve: the local set, or the boundary components of `b`.
fn electrode(dom: &LatticeDomain, in_set: &[bool], b: &[usize], id: usize) -> bool {
    let n = dom.interior_count();
    if id < n {
        in_set[id]
    } else {
        b.contains(&dom.boundary()[id - n].component)
    }
}

/// Metric-graph edge weights for the EL decrement of a downward FPS grown
/// from the components `b`. On the metric graph the set extends into every
/// crossed edge up to the first point where the field reaches the level, so
/// each edge between the electrode (set ∪ B) and its complement is grounded
/// at a sampled first-crossing location; non-boundary edges keep weight 1.
pub fn fps_metric_edge_weights(
    dom: &LatticeDomain,
    in_set: &[bool],
    b: &[usize],
    crossings: &EdgeCrossings,
    total: impl Fn(usize) -> f64,
    kappa_edge: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    dom.edges()
        .iter()
        .enumerate()
        .map(|(e, &(x, y))| {
            let (x, y) = (x as usize, y as usize);
            let (ex, ey) = (
                electrode(dom, in_set, b, x),
                electrode(dom, in_set, b, y),
            );
            if ex == ey || !crossings.crossed[e] {
                return 1.0;
            }
            let (inside, outside) = if ex { (x, y) } else { (y, x) };
            let alpha = (total(inside) - crossings.level).max(0.0);
            let beta = total(outside) - crossings.level;
            1.0 + crossing_conductance_excess(alpha, beta, kappa_edge, rng)
        })
        .collect()
}

/// Metric-graph edge weights for the EL decrement of a two-valued local set:
/// a boundary edge is grounded at the first exit of the strip, read from
/// whichever crossing families fired (the earlier location wins when both
/// did).
#[allow(clippy::too_many_arguments)]
pub fn tvs_metric_edge_weights(
    dom: &LatticeDomain,
    in_set: &[bool],
    b: &[usize],
    down: &EdgeCrossings,
    up: &EdgeCrossings,
    total: impl Fn(usize) -> f64,
    kappa_edge: f64,
    rng: &mut impl Rng,
) -> Vec<f64> {
    dom.edges()
        .iter()
        .enumerate()
        .map(|(e, &(x, y))| {
            let (x, y) = (x as usize, y as usize);
            let (ex, ey) = (
                electrode(dom, in_set, b, x),
                electrode(dom, in_set, b, y),
            );
            if ex == ey {
                return 1.0;
            }
            let (inside, outside) = if ex { (x, y) } else { (y, x) };
            let mut w = f64::INFINITY;
            if down.crossed[e] {
                let alpha = (total(inside) - down.level).max(0.0);
                let beta = total(outside) - down.level;
                w = w.min(1.0 + crossing_conductance_excess(alpha, beta, kappa_edge, rng));
            }
            if up.crossed[e] {
                // the up-family tracks the negated field, so excesses are
                // measured from −total
                let alpha = (-total(inside) - up.level).max(0.0);
                let beta = -total(outside) - up.level;
                w = w.min(1.0 + crossing_conductance_excess(alpha, beta, kappa_edge, rng));
            }
            if w.is_finite() {
                w
            } else {
                1.0
            }
        })
        .collect()
}

/// Extremal-distance decrement of a downward FPS with the set grounded at
/// metric-graph precision: the crossed boundary edges carry the weights from
/// [`fps_metric_edge_weights`]. Validation matches
/// [`extremal_distance_observable`].
pub fn metric_extremal_distance_observable(
    oracle: &GreenOracle,
    ls: &LocalSetSample,
    b: &[usize],
    u_values: &[f64],
    edge_weights: &[f64],
) -> Result<f64> {
    let a = match ls.kind {
        LocalSetKind::FpsDown(a) => a,
        _ => {
            return Err(Error::ConfigViolation(
                "extremal-distance law expects a downward FPS".into(),
            ))
        }
    };
    let others = other_components(oracle.dom(), b);
    let ue = constant_value_on(oracle.dom(), &others, u_values)?;
    if ue > -a + 1e-12 {
        return Err(Error::ConfigViolation(format!(
            "boundary value {ue} on ∂D∖B exceeds −a = {}",
            -a
        )));
    }
    if others.is_empty() {
        return Err(Error::ConfigViolation(
            "extremal-distance observable needs a multiply connected domain".into(),
        ));
    }
    let el0 = oracle.extremal_length(b, &others)?;
    let el1 = oracle.extremal_length_with_weighted_set(&others, &ls.in_set, edge_weights)?;
    Ok(el0 - el1)
}

/// Metric-graph extremal-distance decrement of a two-valued local set, with
/// validation matching [`tvs_extremal_distance_observable`].
pub fn tvs_metric_extremal_distance_observable(
    oracle: &GreenOracle,
    ls: &LocalSetSample,
    b: &[usize],
    u_values: &[f64],
    edge_weights: &[f64],
) -> Result<f64> {
    let (la, lb) = match ls.kind {
        LocalSetKind::Tvs(a, b) => (a, b),
        _ => {
            return Err(Error::ConfigViolation(
                "TVS extremal-distance law expects a two-valued set".into(),
            ))
        }
    };
    for (bv, &v) in oracle.dom().boundary().iter().zip(u_values) {
        if b.contains(&bv.component) && !(-la - 1e-12..=lb + 1e-12).contains(&v) {
            return Err(Error::ConfigViolation(format!(
                "boundary value {v} on B outside [−a, b] = [{}, {lb}]",
                -la
            )));
        }
    }
    let others = other_components(oracle.dom(), b);
    let ue = constant_value_on(oracle.dom(), &others, u_values)?;
    if ue > -la + 1e-12 && ue < lb - 1e-12 {
        return Err(Error::ConfigViolation(format!(
            "boundary value {ue} on ∂D∖B lies inside (−a, b)"
        )));
    }
    let el0 = oracle.extremal_length(b, &others)?;
    let el1 = oracle.extremal_length_with_weighted_set(&others, &ls.in_set, edge_weights)?;
    Ok(el0 - el1)
}

/// Lattice-nearest vertices of the circle of radius `rho` on a θ-grid with
/// one step per lattice unit of arc.
pub struct RingProbe {
    pub rho: f64,
    pub vertices: Vec<usize>,
    pub delta_theta: f64,
}

impl RingProbe {
    pub fn new(dom: &LatticeDomain, rho: f64) -> Result<Self> {
        if !(0.9..1.0).contains(&rho) {
            return Err(Error::ConfigViolation(format!(
                "probe ring radius {rho} must lie in [0.9, 1)"
            )));
        }
        let h = dom.mesh();
        if rho + h >= 1.0 {
            return Err(Error::RingOutsideDomain(rho));
        }
        let m = ((2.0 * PI * rho) / h).floor() as usize;
        let vertices = (0..m)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / m as f64;
                dom.vertex_near(rho * th.cos(), rho * th.sin())
                    .map_err(|_| Error::RingOutsideDomain(rho))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RingProbe {
            rho,
            vertices,
            delta_theta: 2.0 * PI / m as f64,
        })
    }
}

/// Exact raw Green-diagonal differences `L⁻¹(z,z) − L_{D∖A}⁻¹(z,z)` at the
/// ring vertices, solving one factorization per complement component that
/// carries ring vertices. Vertices inside the set report `+∞` (their
/// conformal radius in the complement is zero).
pub fn green_differences_exact(
    oracle: &GreenOracle,
    probe: &RingProbe,
    in_set: &[bool],
) -> Result<Vec<f64>> {
    let dom = oracle.dom();
    let kept: Vec<bool> = in_set.iter().map(|&x| !x).collect();
    let (label, count) = components(dom, &kept);
    let mut by_component: Vec<Vec<usize>> = vec![Vec::new(); count];
    let mut out = vec![f64::INFINITY; probe.vertices.len()];
    for (i, &z) in probe.vertices.iter().enumerate() {
        if !in_set[z] {
            by_component[label[z] as usize].push(i);
        }
    }
    let raw_dom = oracle.raw_diag();
    for (c, group) in by_component.iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let mask: Vec<bool> = (0..dom.interior_count())
            .map(|v| label[v] == c as i32)
            .collect();
        let sub = Subgraph::new(dom, &mask)?;
        for &i in group {
            let z = probe.vertices[i];
            out[i] = raw_dom[z] - sub.green_raw_diag_at(z)?;
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of the same raw Green-diagonal difference through
/// the exact identity `L⁻¹(z,z) − L_{D∖A}⁻¹(z,z) = E_z[L⁻¹(X_τ, z)]`, where
/// `X` is the simple random walk from `z` and τ its first visit to `A ∪ ∂D`
/// (the full-domain Green column vanishes on ∂D). Unbiased at any walker
/// count; `column` is the raw Green column of `z` in the full domain.
pub fn walk_green_difference(
    dom: &LatticeDomain,
    in_set: &[bool],
    column: &[f64],
    z: usize,
    walkers: usize,
    rng: &mut impl Rng,
) -> f64 {
    debug_assert!(!in_set[z]);
    let (ix0, iy0) = dom.coord(z);
    let mut sum = 0.0;
    for _ in 0..walkers {
        let (mut ix, mut iy) = (ix0, iy0);
        let mut bits: u64 = 0;
        let mut left = 0u32;
        'walk: loop {
            if left == 0 {
                bits = rng.gen();
                left = 32;
            }
            match bits & 3 {
                0 => ix += 1,
                1 => ix -= 1,
                2 => iy += 1,
                _ => iy -= 1,
            }
            bits >>= 2;
            left -= 1;
            match dom.cell(ix, iy) {
                Cell::Interior(v) => {
                    if in_set[v as usize] {
                        sum += column[v as usize];
                        break 'walk;
                    }
                }
                // ∂D absorbs with Green value 0; Outside is unreachable from
                // the interior but harmless to treat the same way.
                Cell::Boundary(_) | Cell::Outside => break 'walk,
            }
        }
    }
    sum / walkers as f64
}

/// Level-recovery ring integral `Σ_θ (CR(z, D∖A)/CR(z, D))^{γ²/2} Δθ` from
/// raw Green-diagonal differences: the CR ratio is `exp(−2πκ·diff)`.
pub fn recovery_integral(
    probe: &RingProbe,
    diffs: &[f64],
    kappa: f64,
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    assert_eq!(diffs.len(), probe.vertices.len());
    let c = PI * gamma * gamma * kappa;
    Ok(diffs
        .iter()
        .map(|&d| if d.is_finite() { (-c * d).exp() } else { 0.0 })
        .sum::<f64>()
        * probe.delta_theta)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.05..1.0).contains(&gamma) {
        return Err(Error::ConfigViolation(format!(
            "recovery exponent gamma = {gamma} outside [0.05, 1)"
        )));
    }
    Ok(())
}

/// Level estimate from the ring integral: `â = −log(I/2π) / (γ√(2π))`.
pub fn a_hat_from_integral(i: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(-(i / (2.0 * PI)).ln() / (gamma * (2.0 * PI).sqrt()))
}

/// Recover the level of a downward FPS from its bare vertex set alone, via
/// exact complement solves on the probe ring.
pub fn level_recovery(
    oracle: &GreenOracle,
    probe: &RingProbe,
    in_set: &[bool],
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    let kappa = oracle.calibration()?.kappa;
    let diffs = green_differences_exact(oracle, probe, in_set)?;
    a_hat_from_integral(recovery_integral(probe, &diffs, kappa, gamma)?, gamma)
}

/// Report of the conditional multiplicative-chaos decomposition check.
#[derive(Debug, Clone)]
pub struct GmcCheck {
    pub gamma: f64,
    /// Route (i): mean over conditional resamples of the normalized chaos
    /// mass `Σ f·exp(γ̃φ − (γ̃²/2)G_D(x,x))·mesh²` off the set.
    pub resampled: f64,
    /// Route (ii): the closed-form conditional expectation
    /// `Σ f·exp(γ̃h_A − (γ̃²/2)(G_D − G_{D∖A})(x,x))·mesh²` off the set.
    pub closed_form: f64,
    /// Mean of the per-extraction route difference.
    pub discrepancy: f64,
    /// Standard error of the route difference across extractions.
    pub se: f64,
}

/// Compare the two routes to the conditional chaos mass given an upward FPS
/// at level `b` (`None` forces the trivial conditioning A = ∂D). The chaos
/// parameter is `γ̃ = √(2π)·γ`; `f` is a test function given per interior
/// vertex. `outer` extractions each average `inner` conditional resamples.
#[allow(clippy::too_many_arguments)]
pub fn gmc_conditional_check(
    oracle: &GreenOracle,
    u: &BoundaryData,
    b: Option<f64>,
    gamma: f64,
    f: &[f64],
    outer: usize,
    inner: usize,
    seed: u64,
) -> Result<GmcCheck> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::ConfigViolation(format!(
            "chaos exponent gamma = {gamma} outside [0, 1)"
        )));
    }
    if outer == 0 || inner == 0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    let dom = oracle.dom();
    let n = dom.interior_count();
    assert_eq!(f.len(), n);
    let calib = oracle.calibration()?.clone();
    let gt = (2.0 * PI).sqrt() * gamma;
    let h2 = dom.mesh() * dom.mesh();
    let raw_dom = oracle.raw_diag();

    let mut res_means = Vec::with_capacity(outer);
    let mut closed = Vec::with_capacity(outer);
    let mut diffs = Vec::with_capacity(outer);
    for k in 0..outer {
        let in_set: Vec<bool> = match b {
            Some(bv) => {
                let s = sample_gff(oracle, seed, 2 * k as u64)?;
                let uni = sample_edge_uniforms(dom, seed, 2 * k as u64 + 1);
                let c = crossings_at_level(
                    dom,
                    |id| -s.total(dom, u, id),
                    -bv,
                    calib.kappa_edge,
                    &uni,
                );
                extract_fps_up(dom, &s, u, &c, bv, calib.kappa_cell).in_set
            }
            None => vec![false; n],
        };
        let kept: Vec<bool> = in_set.iter().map(|&x| !x).collect();
        if !kept.iter().any(|&x| x) {
            // fully swallowed: both conditional masses are empty sums
            res_means.push(0.0);
            closed.push(0.0);
            diffs.push(0.0);
            continue;
        }
        let sub = Subgraph::new(dom, &kept)?;
        let harm = sub.harmonic(|id| {
            if id < n {
                b.expect("interior set vertices only exist with an extraction")
            } else {
                u.values[id - n]
            }
        });
        let raw_sub = sub.green_raw_diag();
        let mut c_val = 0.0;
        for (s, &v) in sub.keep().iter().enumerate() {
            let fv = f[v as usize];
            if fv != 0.0 {
                let drop = calib.kappa * (raw_dom[v as usize] - raw_sub[s]);
                c_val += fv * (gt * harm[s] - 0.5 * gt * gt * drop).exp();
            }
        }
        // accumulate the per-resample difference to route (ii) so that at
        // γ = 0 (identical summands) the discrepancy is exactly zero
        let mut diff_sum = 0.0;
        for j in 0..inner {
            let field = resample_on(
                &sub,
                calib.kappa,
                &harm,
                seed + 1,
                (k * inner + j) as u64,
            );
            let mut s_j = 0.0;
            for (s, &v) in sub.keep().iter().enumerate() {
                let fv = f[v as usize];
                if fv != 0.0 {
                    s_j +=
                        fv * (gt * field[s] - 0.5 * gt * gt * calib.kappa * raw_dom[v as usize]).exp();
                }
            }
            diff_sum += s_j - c_val;
        }
        let diff = diff_sum * h2 / inner as f64;
        c_val *= h2;
        res_means.push(c_val + diff);
        closed.push(c_val);
        diffs.push(diff);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let d_mean = mean(&diffs);
    let var = diffs
        .iter()
        .map(|d| (d - d_mean) * (d - d_mean))
        .sum::<f64>()
        / (diffs.len().max(2) - 1) as f64;
    Ok(GmcCheck {
        gamma,
        resampled: mean(&res_means),
        closed_form: mean(&closed),
        discrepancy: d_mean,
        se: (var / diffs.len() as f64).sqrt(),
    })
}

/// Density (per unit area) of the recentered set measure `ν − a·Leb`.
pub fn nu_recentered_density(ls: &LocalSetSample, a: f64, mesh: f64) -> Vec<f64> {
    let h2 = mesh * mesh;
    ls.nu.iter().map(|&nu| nu / h2 - a).collect()
}

/// Discrete H⁻¹(𝔻) distance between two vertex-indexed densities:
/// `Σ_{x,y} d(x)·G(x,y)·d(y)·mesh⁴` with `d = a − b` and `G` the calibrated
/// Green's function of the oracle's (reference) domain.
pub fn h_minus_one_distance(oracle: &GreenOracle, a: &[f64], b: &[f64]) -> Result<f64> {
    let kappa = oracle.calibration()?.kappa;
    let n = oracle.dom().interior_count();
    assert_eq!(a.len(), n);
    assert_eq!(b.len(), n);
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let v = oracle.solve_raw(&d);
    let h = oracle.dom().mesh();
    let q: f64 = d.iter().zip(&v).map(|(x, y)| x * y).sum();
    Ok(kappa * h.powi(4) * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_lattice, DomainSpec};
    use crate::laws::{ks_test, ReferenceLaw};
    use crate::local_sets::extract_fps;
    use crate::potential::calibrate;
    use crate::sampler::rng_for;

    fn disk_oracle(mesh: f64) -> GreenOracle {
        let calib = calibrate(0.02).unwrap();
        GreenOracle::calibrated(build_lattice(&DomainSpec::disk(1.0), mesh).unwrap(), calib)
            .unwrap()
    }

    fn boundary_only(kind: LocalSetKind, n: usize) -> LocalSetSample {
        LocalSetSample {
            kind,
            in_set: vec![false; n],
            nu: vec![0.0; n],
        }
    }

    #[test]
    fn hitting_time_of_boundary_only_set_is_zero() {
        let o = disk_oracle(0.05);
        let n = o.dom().interior_count();
        let ls = boundary_only(LocalSetKind::FpsDown(1.0), n);
        let sub = Subgraph::new(o.dom(), &vec![true; n]).unwrap();
        let z = o.dom().vertex_near(0.0, 0.0).unwrap();
        let t = hitting_time_observable(&o, &sub, &ls, z).unwrap();
        assert!(t.abs() < 1e-9, "{t}");
    }

    #[test]
    fn hitting_time_grows_with_the_set() {
        let o = disk_oracle(0.05);
        let n = o.dom().interior_count();
        let z = o.dom().vertex_near(0.0, 0.0).unwrap();
        let ring = |r_lo: f64| -> LocalSetSample {
            let in_set: Vec<bool> = (0..n)
                .map(|v| {
                    let (x, y) = o.dom().point(v);
                    let r = (x * x + y * y).sqrt();
                    r >= r_lo
                })
                .collect();
            LocalSetSample {
                kind: LocalSetKind::FpsDown(1.0),
                in_set,
                nu: vec![0.0; n],
            }
        };
        let mut last = 0.0;
        for r_lo in [0.9, 0.7, 0.5, 0.3] {
            let ls = ring(r_lo);
            let t = hitting_time_capped(&o, &ls, z).unwrap();
            assert!(t > last, "r_lo={r_lo}: {t} vs {last}");
            last = t;
        }
        // vertex inside the set: the strict observable errors, the capped one
        // returns the cap
        let ls = ring(0.0);
        let sub = Subgraph::new(o.dom(), &vec![true; n]).unwrap();
        assert!(matches!(
            hitting_time_observable(&o, &sub, &ls, z),
            Err(Error::VertexInSet(_))
        ));
        let cap = o.calibration().unwrap().kappa * o.raw_diag()[z];
        assert_eq!(hitting_time_capped(&o, &ls, z).unwrap(), cap);
    }

    #[test]
    fn hitting_time_distribution_matches_censored_levy() {
        // moderate-mesh smoke test of the full pipeline against the
        // resolution-censored first-passage law (the acceptance campaign runs
        // the fine meshes with more samples)
        let o = disk_oracle(0.02);
        let u = BoundaryData::zero(o.dom());
        let z = o.dom().vertex_near(0.0, 0.0).unwrap();
        let a = 0.5;
        let cap = hitting_time_resolution_cap(&o, z, 4.0).unwrap();
        let calib = o.calibration().unwrap().clone();
        let mut xs = Vec::new();
        for i in 0..1000u64 {
            let s = sample_gff(&o, 77, 2 * i).unwrap();
            let uni = sample_edge_uniforms(o.dom(), 77, 2 * i + 1);
            let c = crossings_at_level(
                o.dom(),
                |id| s.total(o.dom(), &u, id),
                -a,
                calib.kappa_edge,
                &uni,
            );
            let ls = extract_fps(o.dom(), &s, &u, &c, a, calib.kappa_cell);
            xs.push(hitting_time_capped(&o, &ls, z).unwrap().min(cap));
        }
        let law = ReferenceLaw::Levy { a }.censored(cap);
        let ks = ks_test(&xs, &law, 1e-4).unwrap();
        assert!(
            !ks.reject,
            "D = {}, p = {}",
            ks.statistic, ks.p_value
        );
    }

    #[test]
    fn decrement_of_boundary_only_set_is_zero() {
        let dom = build_lattice(&DomainSpec::annulus(0.3, 1.0), 0.02).unwrap();
        let calib = calibrate(0.02).unwrap();
        let o = GreenOracle::calibrated(dom, calib).unwrap();
        let n = o.dom().interior_count();
        let u: Vec<f64> = o
            .dom()
            .boundary()
            .iter()
            .map(|b| if b.component == 1 { -1.0 } else { 0.0 })
            .collect();
        let ls = boundary_only(LocalSetKind::FpsDown(1.0), n);
        let d = extremal_distance_observable(&o, &ls, &[0], &u).unwrap();
        assert!(d.abs() < 1e-10, "{d}");
        let tvs = boundary_only(
            LocalSetKind::Tvs(1.0, 1.0),
            n,
        );
        let d = tvs_extremal_distance_observable(&o, &tvs, &[0], &u).unwrap();
        assert!(d.abs() < 1e-10, "{d}");
    }

    #[test]
    fn config_violations_are_caught() {
        let dom = build_lattice(&DomainSpec::annulus(0.3, 1.0), 0.05).unwrap();
        let calib = calibrate(0.02).unwrap();
        let o = GreenOracle::calibrated(dom, calib).unwrap();
        let n = o.dom().interior_count();
        let ls = boundary_only(LocalSetKind::FpsDown(1.0), n);
        // inner boundary value −0.5 > −a = −1
        let u: Vec<f64> = o
            .dom()
            .boundary()
            .iter()
            .map(|b| if b.component == 1 { -0.5 } else { 0.0 })
            .collect();
        assert!(matches!(
            extremal_distance_observable(&o, &ls, &[0], &u),
            Err(Error::ConfigViolation(_))
        ));
        // non-constant inner boundary value
        let u2: Vec<f64> = o
            .dom()
            .boundary()
            .iter()
            .enumerate()
            .map(|(i, b)| if b.component == 1 { -1.0 - (i % 2) as f64 } else { 0.0 })
            .collect();
        assert!(matches!(
            extremal_distance_observable(&o, &ls, &[0], &u2),
            Err(Error::ConfigViolation(_))
        ));
        // TVS with inner value strictly inside (−a, b)
        let lambda = (PI / 8.0).sqrt();
        let tvs = boundary_only(LocalSetKind::Tvs(lambda, lambda), n);
        let u3: Vec<f64> = o
            .dom()
            .boundary()
            .iter()
            .map(|b| if b.component == 1 { 0.1 } else { 0.0 })
            .collect();
        assert!(matches!(
            tvs_extremal_distance_observable(&o, &tvs, &[0], &u3),
            Err(Error::ConfigViolation(_))
        ));
        // simply connected domain is rejected
        let disk = disk_oracle(0.05);
        let m = disk.dom().interior_count();
        let ls2 = boundary_only(LocalSetKind::FpsDown(1.0), m);
        let zeros = vec![0.0; disk.dom().boundary_count()];
        assert!(extremal_distance_observable(&disk, &ls2, &[0], &zeros).is_err());
    }

    #[test]
    fn bridge_start_is_weighted_boundary_average() {
        // u ≡ 0 on B gives u_s = 0 regardless of the inner data
        let dom = build_lattice(&DomainSpec::annulus(0.3, 1.0), 0.02).unwrap();
        let o = GreenOracle::new(dom).unwrap();
        let u: Vec<f64> = o
            .dom()
            .boundary()
            .iter()
            .map(|b| if b.component == 1 { -1.0 } else { 0.0 })
            .collect();
        let us = o.weighted_boundary_average(&[0], &u).unwrap();
        assert!(us.abs() < 1e-12);
    }

    #[test]
    fn ring_probe_validates_inputs() {
        let o = disk_oracle(0.02);
        assert!(matches!(
            RingProbe::new(o.dom(), 0.5),
            Err(Error::ConfigViolation(_))
        ));
        assert!(matches!(
            RingProbe::new(o.dom(), 0.999),
            Err(Error::RingOutsideDomain(_))
        ));
        let probe = RingProbe::new(o.dom(), 0.9).unwrap();
        assert!(!probe.vertices.is_empty());
        assert!((probe.delta_theta * probe.vertices.len() as f64 - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn recovery_of_boundary_only_set_is_zero() {
        let o = disk_oracle(0.02);
        let probe = RingProbe::new(o.dom(), 0.9).unwrap();
        let n = o.dom().interior_count();
        let in_set = vec![false; n];
        // CR ratio ≡ 1 → I = 2π exactly, â = 0
        let kappa = o.calibration().unwrap().kappa;
        let diffs = green_differences_exact(&o, &probe, &in_set).unwrap();
        assert!(diffs.iter().all(|d| d.abs() < 1e-9));
        let i = recovery_integral(&probe, &diffs, kappa, 0.5).unwrap();
        assert!((i - 2.0 * PI).abs() < 1e-6, "{i}");
        let a_hat = level_recovery(&o, &probe, &in_set, 0.5).unwrap();
        assert!(a_hat.abs() < 1e-6, "{a_hat}");
        // small gamma is rejected
        assert!(matches!(
            level_recovery(&o, &probe, &in_set, 0.01),
            Err(Error::ConfigViolation(_))
        ));
    }

    #[test]
    fn walk_estimator_matches_exact_green_difference() {
        // the random-walk identity against direct complement solves on an
        // extracted FPS
        let o = disk_oracle(0.05);
        let u = BoundaryData::zero(o.dom());
        let calib = o.calibration().unwrap().clone();
        let s = sample_gff(&o, 13, 0).unwrap();
        let uni = sample_edge_uniforms(o.dom(), 13, 1);
        let a = 1.0;
        let c = crossings_at_level(
            o.dom(),
            |id| s.total(o.dom(), &u, id),
            -a,
            calib.kappa_edge,
            &uni,
        );
        let ls = extract_fps(o.dom(), &s, &u, &c, a, calib.kappa_cell);
        let probe = RingProbe::new(o.dom(), 0.9).unwrap();
        let exact = green_differences_exact(&o, &probe, &ls.in_set).unwrap();
        let mut rng = rng_for(14, 0);
        let walkers = 3000;
        let mut checked = 0;
        for (i, &z) in probe.vertices.iter().enumerate() {
            if ls.in_set[z] || !exact[i].is_finite() {
                continue;
            }
            let col = o.green_raw_column(z).unwrap();
            let est = walk_green_difference(o.dom(), &ls.in_set, &col, z, walkers, &mut rng);
            // single-walk sd is below ~0.5 in raw units; 5 SE tolerance
            let tol = 5.0 * 0.5 / (walkers as f64).sqrt() + 1e-9;
            assert!(
                (est - exact[i]).abs() < tol,
                "ring vertex {i}: walk {est} vs exact {}",
                exact[i]
            );
            checked += 1;
            if checked >= 12 {
                break;
            }
        }
        assert!(checked >= 8, "too few comparable ring vertices: {checked}");
    }

    #[test]
    fn gmc_routes_agree_without_conditioning_and_at_gamma_zero() {
        let o = disk_oracle(0.05);
        let u = BoundaryData::zero(o.dom());
        let n = o.dom().interior_count();
        let f: Vec<f64> = (0..n)
            .map(|v| {
                let (x, y) = o.dom().point(v);
                if x * x + y * y < 0.25 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        // γ = 0 with a real extraction: both routes are the same empty-set
        // window area, exactly
        let chk = gmc_conditional_check(&o, &u, Some(0.6), 0.0, &f, 40, 5, 3).unwrap();
        assert_eq!(chk.discrepancy, 0.0);
        assert_eq!(chk.resampled, chk.closed_form);
        // forced trivial conditioning: both routes estimate the unconditional
        // normalized chaos mass
        let chk = gmc_conditional_check(&o, &u, None, 0.3, &f, 60, 20, 4).unwrap();
        let window: f64 = f.iter().sum::<f64>() * o.dom().mesh() * o.dom().mesh();
        assert!((chk.closed_form - window).abs() < 1e-9);
        assert!(
            chk.discrepancy.abs() < 3.5 * chk.se + 1e-12,
            "discrepancy {} vs SE {}",
            chk.discrepancy,
            chk.se
        );
    }

    #[test]
    fn gmc_conditional_routes_agree_on_extractions() {
        let o = disk_oracle(0.05);
        let u = BoundaryData::zero(o.dom());
        let n = o.dom().interior_count();
        let f: Vec<f64> = (0..n)
            .map(|v| {
                let (x, y) = o.dom().point(v);
                if x * x + y * y < 0.25 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let lambda = (PI / 8.0).sqrt();
        let chk = gmc_conditional_check(&o, &u, Some(lambda), 0.3, &f, 80, 25, 5).unwrap();
        assert!(
            chk.discrepancy.abs() < 3.5 * chk.se + 1e-12,
            "discrepancy {} vs SE {} (routes {} vs {})",
            chk.discrepancy,
            chk.se,
            chk.resampled,
            chk.closed_form
        );
    }

    #[test]
    fn h_minus_one_distance_basic_properties() {
        let o = disk_oracle(0.05);
        let n = o.dom().interior_count();
        let a: Vec<f64> = (0..n).map(|v| (v as f64 * 0.37).sin()).collect();
        assert_eq!(h_minus_one_distance(&o, &a, &a).unwrap(), 0.0);
        let b = vec![0.0; n];
        let d = h_minus_one_distance(&o, &a, &b).unwrap();
        assert!(d > 0.0);
        // symmetry of the quadratic form
        let d2 = h_minus_one_distance(&o, &b, &a).unwrap();
        assert!((d - d2).abs() < 1e-12 * d.max(1.0));
    }

    #[test]
    fn h_minus_one_matches_expected_gff_norm() {
        // E‖Φ‖²_{H⁻¹} = Σ G(x,y)² h⁴ (both Green factors on the same disk);
        // Monte Carlo over samples must reproduce the double sum. Checked on
        // a small disk where the double sum is affordable.
        let o = disk_oracle(0.15);
        let n = o.dom().interior_count();
        let mut want = 0.0;
        for y in 0..n {
            let col = o.green_raw_column(y).unwrap();
            let kappa = o.calibration().unwrap().kappa;
            for x in 0..n {
                let g = kappa * col[x];
                want += g * g;
            }
        }
        want *= o.dom().mesh().powi(4);
        let zeros = vec![0.0; n];
        let trials = 4000;
        let mut vals = Vec::with_capacity(trials);
        for i in 0..trials {
            let s = sample_gff(&o, 15, i as u64).unwrap();
            vals.push(h_minus_one_distance(&o, &s.phi, &zeros).unwrap());
        }
        let mean = vals.iter().sum::<f64>() / trials as f64;
        let var = vals
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!(
            (mean - want).abs() < 4.0 * se,
            "mean {mean} vs {want} (SE {se})"
        );
    }
}
