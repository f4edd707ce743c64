//! Reference laws for the distributional tests, Kolmogorov–Smirnov
//! machinery, and brute-force bridge path-simulation oracles.
//!
//! Anti-circularity discipline: every closed-form bridge law used as ground
//! truth can be cross-checked against an independent path-simulation oracle
//! (discrete bridge steps with a continuity-corrected barrier), and the
//! acceptance suite performs that check before trusting the closed forms.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sampler::rng_for;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.5066282746310002;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

fn gauss_kernel(t: f64, z: f64) -> f64 {
    let e = z * z / (2.0 * t);
    if e > 700.0 {
        return 0.0; // underflow guard: avoids 0·∞ at t → 0
    }
    (-e).exp() / (2.0 * std::f64::consts::PI * t).sqrt()
}

/// First-passage density of Brownian motion at distance `d`, with the same
/// underflow guard.
fn passage_density(t: f64, d: f64) -> f64 {
    let e = d * d / (2.0 * t);
    if e > 700.0 {
        return 0.0;
    }
    d / (SQRT_2PI * t.powf(1.5)) * (-e).exp()
}

/// A reference probability law on the real line with possible atoms.
pub enum ReferenceLaw {
    /// One-sided Lévy first-passage law: hitting time of level −a by a
    /// standard Brownian motion from 0 (a > 0).
    Levy { a: f64 },
    /// The law of `min(X, cap)` where X follows the inner law; carries an
    /// atom at the cap.
    Censored { inner: Box<ReferenceLaw>, cap: f64 },
    /// CDF table of an absolutely continuous law on [0, t_max]
    /// (bridge-hitting laws).
    Tabulated(TabulatedLaw),
    PointMass(f64),
    /// Empirical law of a sample (kept sorted).
    Empirical(Vec<f64>),
}

/// Piecewise-linear CDF on a uniform-in-√(T−t) grid.
pub struct TabulatedLaw {
    pub t_max: f64,
    /// survivals[i] = P(τ > T − σ_i²) at σ_i = i·Δσ, i = 0..m (σ_m = √T).
    survivals: Vec<f64>,
}

impl TabulatedLaw {
    fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.t_max {
            return 1.0;
        }
        let m = self.survivals.len() - 1;
        let sigma = (self.t_max - t).sqrt();
        let pos = sigma / self.t_max.sqrt() * m as f64;
        let i = (pos.floor() as usize).min(m - 1);
        let frac = pos - i as f64;
        let surv = self.survivals[i] * (1.0 - frac) + self.survivals[i + 1] * frac;
        1.0 - surv
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.gen();
        // find sigma with survival(sigma) = u (survivals increase in i)
        let m = self.survivals.len() - 1;
        let (mut lo, mut hi) = (0usize, m);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.survivals[mid] < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (s0, s1) = (self.survivals[lo], self.survivals[hi]);
        let frac = if s1 > s0 { (u - s0) / (s1 - s0) } else { 0.5 };
        let sigma = (lo as f64 + frac) / m as f64 * self.t_max.sqrt();
        (self.t_max - sigma * sigma).max(0.0)
    }
}

impl ReferenceLaw {
    /// Right-continuous CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ReferenceLaw::Levy { a } => {
                if x <= 0.0 {
                    0.0
                } else {
                    2.0 * normal_cdf(-a / x.sqrt())
                }
            }
            ReferenceLaw::Censored { inner, cap } => {
                if x >= *cap {
                    1.0
                } else {
                    inner.cdf(x)
                }
            }
            ReferenceLaw::Tabulated(t) => t.cdf(x),
            ReferenceLaw::PointMass(p) => {
                if x >= *p {
                    1.0
                } else {
                    0.0
                }
            }
            ReferenceLaw::Empirical(v) => {
                let k = v.partition_point(|&y| y <= x);
                k as f64 / v.len() as f64
            }
        }
    }

    /// Left limit of the CDF (differs from `cdf` only at atoms).
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            ReferenceLaw::Censored { inner, cap } => {
                if x <= *cap {
                    inner.cdf_left(x)
                } else {
                    1.0
                }
            }
            ReferenceLaw::PointMass(p) => {
                if x > *p {
                    1.0
                } else {
                    0.0
                }
            }
            ReferenceLaw::Empirical(v) => {
                let k = v.partition_point(|&y| y < x);
                k as f64 / v.len() as f64
            }
            _ => self.cdf(x),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            ReferenceLaw::Levy { a } => {
                // τ = (a / Z)² with Z a standard normal (reflection principle)
                let z: f64 = rng.sample(StandardNormal);
                (a / z).powi(2)
            }
            ReferenceLaw::Censored { inner, cap } => inner.sample(rng).min(*cap),
            ReferenceLaw::Tabulated(t) => t.sample(rng),
            ReferenceLaw::PointMass(p) => *p,
            ReferenceLaw::Empirical(v) => v[rng.gen_range(0..v.len())],
        }
    }

    /// Censor the law at `cap`: the law of `min(X, cap)`.
    pub fn censored(self, cap: f64) -> Self {
        ReferenceLaw::Censored {
            inner: Box::new(self),
            cap,
        }
    }

    /// First hitting time of `barrier` by a Brownian bridge from `start` to
    /// `end` over [0, t_total], with `start > barrier` and `end ≤ barrier`
    /// (the bridge hits almost surely).
    ///
    /// Density (Bayes against the unconditioned motion):
    /// `f(t) = f_passage(t) · p_{T−t}(barrier → end) / p_T(start → end)`.
    pub fn one_barrier_bridge(start: f64, end: f64, barrier: f64, t_total: f64) -> Result<Self> {
        if !(start > barrier) || !(end <= barrier) || !(t_total > 0.0) {
            return Err(Error::ConfigViolation(format!(
                "one-barrier bridge needs start > barrier >= end, got {start}, {barrier}, {end}"
            )));
        }
        let d = start - barrier;
        let e = barrier - end;
        let density = move |t: f64| -> f64 {
            let tail = t_total - t;
            let fp = passage_density(t, d);
            let trans = gauss_kernel(tail, e);
            let norm = gauss_kernel(t_total, start - end);
            fp * trans / norm
        };
        Ok(ReferenceLaw::Tabulated(tabulate(density, t_total)?))
    }

    /// First exit time of the interval (lower, upper) by a Brownian bridge
    /// from `start` to `end` over [0, t_total], with `start` in the interval
    /// and `end` outside or on its boundary (exit happens almost surely).
    ///
    /// Exit densities through each barrier come from the image-series
    /// absorbed-kernel on the strip; Bayes reweighting by the bridge endpoint
    /// as in the one-barrier case.
    pub fn two_barrier_bridge(
        start: f64,
        end: f64,
        lower: f64,
        upper: f64,
        t_total: f64,
    ) -> Result<Self> {
        if !(lower < start && start < upper) || (end > lower && end < upper) || !(t_total > 0.0) {
            return Err(Error::ConfigViolation(format!(
                "two-barrier bridge needs lower < start < upper and end outside, got \
                 start {start}, end {end}, barriers ({lower}, {upper})"
            )));
        }
        let l = upper - lower;
        let x = start - lower; // position in the strip [0, L]
        // flux density through the lower barrier for absorbed BM from x:
        // f0(t) = (1/2)·∂_y p_abs(t,x,y)|_{y=0},
        // p_abs(t,x,y) = Σ_k [φ_t(y−x+2kL) − φ_t(y+x+2kL)]
        let flux_lower = move |t: f64, x: f64| -> f64 {
            let mut s = 0.0;
            for k in -24i64..=24 {
                let c1 = x - 2.0 * k as f64 * l; // −∂_y φ_t(y−x+2kL)|_0 = (x−2kL)/t·φ
                let c2 = x + 2.0 * k as f64 * l;
                s += c1 * gauss_kernel(t, c1) / t + c2 * gauss_kernel(t, c2) / t;
            }
            0.5 * s
        };
        let density = move |t: f64| -> f64 {
            let tail = t_total - t;
            let f_lo = flux_lower(t, x);
            let f_up = flux_lower(t, l - x);
            let trans_lo = gauss_kernel(tail, end - lower);
            let trans_up = gauss_kernel(tail, upper - end);
            let norm = gauss_kernel(t_total, start - end);
            (f_lo * trans_lo + f_up * trans_up) / norm
        };
        Ok(ReferenceLaw::Tabulated(tabulate(density, t_total)?))
    }

    pub fn empirical(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        ReferenceLaw::Empirical(samples)
    }
}

/// Tabulate the survival function of a density on (0, T) using the
/// substitution σ = √(T−t), which removes the integrable (T−t)^{-1/2}
/// endpoint singularity of the bridge laws. Verifies that the density
/// integrates to 1 (±2e-3) before normalizing exactly.
fn tabulate(density: impl Fn(f64) -> f64, t_total: f64) -> Result<TabulatedLaw> {
    let m = 4096usize;
    let ds = t_total.sqrt() / m as f64;
    let mut survivals = Vec::with_capacity(m + 1);
    survivals.push(0.0);
    let mut acc = 0.0;
    let g = |sigma: f64| -> f64 {
        let t = t_total - sigma * sigma;
        if t <= 0.0 || t >= t_total {
            // endpoints: g(0) has the finite limit of f·2σ; approximate by
            // one-sided values from the trapezoid neighbors
            let t = t.clamp(1e-300, t_total * (1.0 - 1e-12));
            return density(t) * 2.0 * sigma;
        }
        density(t) * 2.0 * sigma
    };
    let mut prev = {
        // limit of f(t)·2σ as σ→0: evaluate slightly inside
        let s0 = ds * 1e-3;
        g(s0)
    };
    for i in 1..=m {
        let s = i as f64 * ds;
        let cur = g(s);
        acc += 0.5 * (prev + cur) * ds;
        survivals.push(acc);
        prev = cur;
    }
    let total = *survivals.last().expect("nonempty");
    if !(total.is_finite()) || (total - 1.0).abs() > 2e-3 {
        return Err(Error::ConfigViolation(format!(
            "bridge law density integrates to {total}, expected 1"
        )));
    }
    for s in survivals.iter_mut() {
        *s /= total;
    }
    Ok(TabulatedLaw { t_max: t_total, survivals })
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// One-sample Kolmogorov–Smirnov test against a reference law, handling
/// atoms via the left-limit CDF.
pub fn ks_test(series: &[f64], law: &ReferenceLaw, significance: f64) -> Result<KsResult> {
    if series.len() < 100 {
        return Err(Error::TooFewSamples {
            got: series.len(),
            need: 100,
        });
    }
    let mut xs = series.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    // sup_x |F_n(x) − F(x)| with both cdfs right-continuous: compare at each
    // distinct sample value and at its left limit, grouping ties so the
    // empirical cdf is evaluated correctly on atoms.
    let mut d = 0.0f64;
    let mut i = 0usize;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i + 1;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let hi = (j as f64 / n - law.cdf(x)).abs();
        let lo = (i as f64 / n - law.cdf_left(x)).abs();
        d = d.max(hi).max(lo);
        i = j;
    }
    let p = ks_p_value(d, xs.len());
    Ok(KsResult {
        statistic: d,
        p_value: p,
        reject: p < significance,
    })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64], significance: f64) -> Result<KsResult> {
    if a.len() < 100 || b.len() < 100 {
        return Err(Error::TooFewSamples {
            got: a.len().min(b.len()),
            need: 100,
        });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = xs[i].min(ys[j]);
        while i < n && xs[i] <= x {
            i += 1;
        }
        while j < m && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let eff = (n as f64 * m as f64) / (n + m) as f64;
    let p = ks_p_value(d, eff.round() as usize);
    Ok(KsResult {
        statistic: d,
        p_value: p,
        reject: p < significance,
    })
}

/// Asymptotic KS p-value with the Stephens small-sample correction.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Brute-force oracle: probability that a Brownian bridge over [0,1] from
/// `alpha` to `beta` (both > 0) dips to 0 or below, estimated by discrete
/// bridge paths with the Broadie–Glasserman–Kou continuity-corrected barrier.
/// Makes no use of the closed-form crossing probability.
pub fn bridge_min_crossing_prob(
    alpha: f64,
    beta: f64,
    steps: usize,
    trials: usize,
    seed: u64,
) -> f64 {
    let dt = 1.0 / steps as f64;
    // BGK barrier shift: ζ(1/2)/√(2π) ≈ 0.5826 per unit volatility
    let barrier = 0.5826 * dt.sqrt();
    let mut rng = rng_for(seed, 0);
    let mut crossed = 0usize;
    for _ in 0..trials {
        let mut x = alpha;
        let mut hit = x <= barrier;
        for k in 0..steps {
            if hit {
                break;
            }
            let remaining = 1.0 - k as f64 * dt;
            let mean = x + (beta - x) * dt / remaining;
            let var = dt * (remaining - dt) / remaining;
            let z: f64 = rng.sample(StandardNormal);
            x = mean + var.max(0.0).sqrt() * z;
            if x <= barrier {
                hit = true;
            }
        }
        if hit {
            crossed += 1;
        }
    }
    crossed as f64 / trials as f64
}

/// Brute-force oracle: first hitting times of `barrier` by discrete Brownian
/// bridge paths from `start` to `end ≤ barrier` over [0, t_total], with the
/// BGK-corrected barrier. Paths that only reach the barrier at the endpoint
/// report t_total.
pub fn simulate_bridge_hitting(
    start: f64,
    end: f64,
    barrier: f64,
    t_total: f64,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Vec<f64> {
    let dt = t_total / steps as f64;
    let mut rng = rng_for(seed, 1);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut x = start;
        let mut hit_t = t_total;
        for k in 0..steps {
            let remaining = t_total - k as f64 * dt;
            let mean = x + (end - x) * dt / remaining;
            let var = dt * (remaining - dt) / remaining;
            let z: f64 = rng.sample(StandardNormal);
            let next = mean + var.max(0.0).sqrt() * z;
            // Exact in-step crossing: given both endpoints, the interpolation
            // is a Brownian bridge, which dips below the barrier with
            // probability exp(−2αβ/Δt) when both endpoints sit above it.
            let alpha = x - barrier;
            let beta = next - barrier;
            let crossed = if beta <= 0.0 {
                true
            } else {
                let u: f64 = rng.gen();
                u < (-2.0 * alpha * beta / dt).exp()
            };
            x = next;
            if crossed {
                // midpoint of the step as the recorded hitting time
                hit_t = (k as f64 + 0.5) * dt;
                break;
            }
        }
        out.push(hit_t);
    }
    out
}

/// Brute-force oracle: first exit times of (lower, upper) by discrete
/// Brownian bridge paths from `start` to `end` over [0, t_total], with
/// BGK-corrected barriers on both sides.
pub fn simulate_bridge_two_barrier(
    start: f64,
    end: f64,
    lower: f64,
    upper: f64,
    t_total: f64,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Vec<f64> {
    let dt = t_total / steps as f64;
    let mut rng = rng_for(seed, 2);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut x = start;
        let mut hit_t = t_total;
        for k in 0..steps {
            let remaining = t_total - k as f64 * dt;
            let mean = x + (end - x) * dt / remaining;
            let var = dt * (remaining - dt) / remaining;
            let z: f64 = rng.sample(StandardNormal);
            let next = mean + var.max(0.0).sqrt() * z;
            // Per-barrier exact in-step crossing probabilities; the chance of
            // touching both barriers within one tiny step is negligible.
            let crossed_lo = if next <= lower {
                true
            } else {
                let u: f64 = rng.gen();
                u < (-2.0 * (x - lower) * (next - lower) / dt).exp()
            };
            let crossed_hi = if next >= upper {
                true
            } else {
                let u: f64 = rng.gen();
                u < (-2.0 * (upper - x) * (upper - next) / dt).exp()
            };
            x = next;
            if crossed_lo || crossed_hi {
                hit_t = (k as f64 + 0.5) * dt;
                break;
            }
        }
        out.push(hit_t);
    }
    out
}
