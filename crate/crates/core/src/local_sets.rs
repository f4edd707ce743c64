//! Extraction of first passage sets (FPS) and two-valued local sets (TVS)
//! from field samples, the positive measure ν they carry, and Minkowski
//! content estimates of that measure.
//!
//! An FPS at level −a consists of all vertices connected to the domain
//! boundary through vertices whose total field stays ≥ −a and through edges
//! whose metric-graph interpolation does not dip below −a. The boundary is
//! always part of the set by convention.

use crate::domain::{BoundaryData, LatticeDomain};
use crate::error::{Error, Result};
use crate::potential::GreenOracle;
use crate::sampler::{
    crossings_at_level, resample_on, sample_edge_uniforms, sample_gff, EdgeCrossings, FieldSample,
};
use crate::subgraph::Subgraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalSetKind {
    FpsDown(f64),
    FpsUp(f64),
    Tvs(f64, f64),
}

/// An extracted local set. Boundary vertices are always in the set and are
/// not represented in `in_set`/`nu` (both indexed by interior vertex).
#[derive(Debug, Clone)]
pub struct LocalSetSample {
    pub kind: LocalSetKind,
    pub in_set: Vec<bool>,
    /// ν(x) = (φ(x)+u(x)+a)·mesh²·κ‴ on the set (mirrored for FPS-up,
    /// zero for TVS which is thin); zero off the set.
    pub nu: Vec<f64>,
}

impl LocalSetSample {
    /// Number of interior vertices in the set.
    pub fn interior_size(&self) -> usize {
        self.in_set.iter().filter(|&&x| x).count()
    }

    /// Dirichlet value this set imposes on complement solves at an interior
    /// set vertex (the total-field convention: includes boundary data u on
    /// ∂D, handled by the caller for boundary ids).
    pub fn set_value(&self, total_at: f64) -> f64 {
        match self.kind {
            LocalSetKind::FpsDown(a) => -a,
            LocalSetKind::FpsUp(b) => b,
            // per-side assignment: nearest of the two admissible values
            LocalSetKind::Tvs(a, b) => {
                if total_at >= (b - a) / 2.0 {
                    b
                } else {
                    -a
                }
            }
        }
    }
}

/// FPS extraction, optionally seeded with an already-explored set that is
/// forced into the output (used by nested exploration).
pub fn extract_fps_seeded(
    dom: &LatticeDomain,
    total: &[f64],
    crossings: &EdgeCrossings,
    a: f64,
    kappa_cell: f64,
    forced: Option<&[bool]>,
) -> LocalSetSample {
    let n = dom.interior_count();
    assert_eq!(total.len(), n);
    let adj = dom.adjacency();
    let mut in_set = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    // seeds: all boundary vertices, plus any forced interior vertices
    for b in 0..dom.boundary_count() {
        stack.push(n + b);
    }
    if let Some(f) = forced {
        for v in 0..n {
            if f[v] {
                in_set[v] = true;
                stack.push(v);
            }
        }
    }
    while let Some(id) = stack.pop() {
        for &(w, e) in adj.of(id) {
            let w = w as usize;
            if w >= n || in_set[w] || crossings.crossed[e as usize] {
                continue;
            }
            if total[w] >= -a {
                in_set[w] = true;
                stack.push(w);
            }
        }
    }
    let h2 = dom.mesh() * dom.mesh();
    let nu = (0..n)
        .map(|v| {
            if in_set[v] {
                (total[v] + a) * h2 * kappa_cell
            } else {
                0.0
            }
        })
        .collect();
    LocalSetSample {
        kind: LocalSetKind::FpsDown(a),
        in_set,
        nu,
    }
}

/// First passage set of the total field φ+u at level −a. The crossings must
/// have been sampled at level −a for the same total field.
pub fn extract_fps(
    dom: &LatticeDomain,
    sample: &FieldSample,
    u: &BoundaryData,
    crossings: &EdgeCrossings,
    a: f64,
    kappa_cell: f64,
) -> LocalSetSample {
    debug_assert!((crossings.level + a).abs() < 1e-12);
    let total: Vec<f64> = (0..dom.interior_count())
        .map(|v| sample.phi[v] + u.harmonic_extension[v])
        .collect();
    extract_fps_seeded(dom, &total, crossings, a, kappa_cell, None)
}

/// Upward FPS at level b: the FPS of the negated field, sign-flipped back.
/// The crossings must be sampled at level −b for the negated total field.
pub fn extract_fps_up(
    dom: &LatticeDomain,
    sample: &FieldSample,
    u: &BoundaryData,
    crossings: &EdgeCrossings,
    b: f64,
    kappa_cell: f64,
) -> LocalSetSample {
    let total: Vec<f64> = (0..dom.interior_count())
        .map(|v| -(sample.phi[v] + u.harmonic_extension[v]))
        .collect();
    let mut ls = extract_fps_seeded(dom, &total, crossings, b, kappa_cell, None);
    ls.kind = LocalSetKind::FpsUp(b);
    ls
}

/// Two-valued local set: components of FPS(a) ∩ FPS-up(b) connected to the
/// domain boundary.
pub fn extract_tvs(
    dom: &LatticeDomain,
    sample: &FieldSample,
    u: &BoundaryData,
    crossings_down: &EdgeCrossings,
    crossings_up: &EdgeCrossings,
    a: f64,
    b: f64,
    kappa_cell: f64,
) -> LocalSetSample {
    let down = extract_fps(dom, sample, u, crossings_down, a, kappa_cell);
    let up = extract_fps_up(dom, sample, u, crossings_up, b, kappa_cell);
    let n = dom.interior_count();
    let both: Vec<bool> = (0..n).map(|v| down.in_set[v] && up.in_set[v]).collect();
    // keep only components of the intersection whose union with ∂D is
    // connected to ∂D (plain graph adjacency)
    let adj = dom.adjacency();
    let mut in_set = vec![false; n];
    let mut stack: Vec<usize> = (0..dom.boundary_count()).map(|b| n + b).collect();
    while let Some(id) = stack.pop() {
        for &(w, _) in adj.of(id) {
            let w = w as usize;
            if w < n && both[w] && !in_set[w] {
                in_set[w] = true;
                stack.push(w);
            }
        }
    }
    LocalSetSample {
        kind: LocalSetKind::Tvs(a, b),
        in_set,
        nu: vec![0.0; n],
    }
}

/// Harmonic function h_A on the complement of a local set (subgraph order):
/// the set imposes its local-set value (−a, b, or the TVS side value), the
/// domain boundary imposes u. Includes the boundary condition u, i.e. this
/// is the full harmonic part of the total field given the set.
pub fn harmonic_part(
    dom: &LatticeDomain,
    sub: &Subgraph,
    ls: &LocalSetSample,
    sample: &FieldSample,
    u: &BoundaryData,
) -> Vec<f64> {
    let n = dom.interior_count();
    sub.harmonic(|id| {
        if id < n {
            debug_assert!(ls.in_set[id]);
            ls.set_value(sample.phi[id] + u.harmonic_extension[id])
        } else {
            u.values[id - n]
        }
    })
}

/// Coupled nested FPS extraction at increasing levels: each step resamples
/// the field beyond the current set (with the set held at its level) and
/// explores further. Outputs are nested by construction; the carried total
/// field keeps its original values on already-explored vertices so each
/// output's ν measure is consistent with the coupling.
pub fn nested_fps(
    oracle: &GreenOracle,
    u: &BoundaryData,
    levels: &[f64],
    seed: u64,
    stream_base: u64,
) -> Result<Vec<LocalSetSample>> {
    if levels.windows(2).any(|w| w[0] >= w[1]) || levels.is_empty() {
        return Err(Error::ConfigViolation(
            "nested FPS levels must be strictly increasing and nonempty".into(),
        ));
    }
    let dom = oracle.dom();
    let calib = oracle.calibration()?.clone();
    let n = dom.interior_count();
    let first = sample_gff(oracle, seed, stream_base)?;
    let mut total: Vec<f64> = (0..n)
        .map(|v| first.phi[v] + u.harmonic_extension[v])
        .collect();
    let uniforms = sample_edge_uniforms(dom, seed, stream_base + 1);
    let total_at = |tot: &Vec<f64>, id: usize| {
        if id < n {
            tot[id]
        } else {
            u.values[id - n]
        }
    };
    let crossings = {
        let t = &total;
        crossings_at_level(dom, |id| total_at(t, id), -levels[0], calib.kappa_edge, &uniforms)
    };
    let mut out = vec![extract_fps_seeded(
        dom,
        &total,
        &crossings,
        levels[0],
        calib.kappa_cell,
        None,
    )];

    for (k, &a) in levels.iter().enumerate().skip(1) {
        let prev = out.last().expect("at least one extraction");
        let prev_level = levels[k - 1];
        let kept: Vec<bool> = prev.in_set.iter().map(|&x| !x).collect();
        if kept.iter().any(|&x| x) {
            let sub = Subgraph::new(dom, &kept)?;
            let harm = sub.harmonic(|id| {
                if id < n {
                    -prev_level
                } else {
                    u.values[id - n]
                }
            });
            let fresh = resample_on(&sub, calib.kappa, &harm, seed, stream_base + 2 * k as u64);
            for (s, &v) in sub.keep().iter().enumerate() {
                total[v as usize] = fresh[s];
            }
        }
        let uniforms = sample_edge_uniforms(dom, seed, stream_base + 2 * k as u64 + 1);
        let crossings = {
            let t = &total;
            crossings_at_level(dom, |id| total_at(t, id), -a, calib.kappa_edge, &uniforms)
        };
        let ls = extract_fps_seeded(
            dom,
            &total,
            &crossings,
            a,
            calib.kappa_cell,
            Some(&prev.in_set),
        );
        out.push(ls);
    }
    Ok(out)
}

/// Σ f(x)·ν(x) over the interior part of the set. The test function must be
/// supported away from the domain boundary (caller's responsibility).
pub fn measure_nu(ls: &LocalSetSample, f: &[f64]) -> f64 {
    ls.nu.iter().zip(f).map(|(nu, f)| nu * f).sum()
}

pub struct MinkowskiEstimate {
    pub radii: Vec<f64>,
    /// For each radius r: (1/2)·|log r|^{1/2} · Σ f(x)·mesh² over vertices
    /// within Euclidean distance r of the interior part of the set.
    pub masses: Vec<f64>,
}

/// Exact Euclidean distance (in mesh units) from every interior vertex to
/// the nearest interior set vertex, via the two-pass squared-distance
/// transform (Felzenszwalb–Huttenlocher) on the bounding grid.
pub fn distance_to_set(dom: &LatticeDomain, in_set: &[bool]) -> Vec<f64> {
    let (nx, ny) = dom.grid_dims();
    let (ix0, iy0) = dom.grid_origin();
    const INF: f64 = 1e18;
    let mut grid = vec![INF; nx * ny];
    for v in 0..dom.interior_count() {
        if in_set[v] {
            let (ix, iy) = dom.coord(v);
            grid[(iy - iy0) as usize * nx + (ix - ix0) as usize] = 0.0;
        }
    }
    // 1D squared distance transform of a sampled function (lower envelope
    // of parabolas)
    fn dt1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
        let n = f.len();
        let mut k = 0usize;
        v[0] = 0;
        z[0] = -1e20;
        z[1] = 1e20;
        for q in 1..n {
            loop {
                let p = v[k];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                    / (2.0 * (q as f64 - p as f64));
                if s <= z[k] {
                    if k == 0 {
                        v[0] = q;
                        z[0] = -1e20;
                        z[1] = 1e20;
                        break;
                    }
                    k -= 1;
                } else {
                    k += 1;
                    v[k] = q;
                    z[k] = s;
                    z[k + 1] = 1e20;
                    break;
                }
            }
        }
        let mut k = 0usize;
        for q in 0..n {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            d[q] = (q as f64 - p as f64).powi(2) + f[p];
        }
    }
    let m = nx.max(ny);
    let (mut buf_f, mut buf_d) = (vec![0.0; m], vec![0.0; m]);
    let (mut buf_v, mut buf_z) = (vec![0usize; m], vec![0.0; m + 1]);
    // columns then rows
    for x in 0..nx {
        for y in 0..ny {
            buf_f[y] = grid[y * nx + x];
        }
        dt1d(&buf_f[..ny], &mut buf_d[..ny], &mut buf_v, &mut buf_z);
        for y in 0..ny {
            grid[y * nx + x] = buf_d[y];
        }
    }
    for y in 0..ny {
        buf_f[..nx].copy_from_slice(&grid[y * nx..(y + 1) * nx]);
        dt1d(&buf_f[..nx], &mut buf_d[..nx], &mut buf_v, &mut buf_z);
        for x in 0..nx {
            grid[y * nx + x] = buf_d[x];
        }
    }
    (0..dom.interior_count())
        .map(|v| {
            let (ix, iy) = dom.coord(v);
            grid[(iy - iy0) as usize * nx + (ix - ix0) as usize].sqrt()
        })
        .collect()
}

/// Gauge-weighted neighborhood masses of the set against a test function:
/// for each r, (1/2)|log r|^{1/2}·Σ f(x) mesh² over x within distance r of
/// the interior part of the set.
pub fn minkowski_estimate(
    dom: &LatticeDomain,
    ls: &LocalSetSample,
    f: &[f64],
    radii: &[f64],
) -> Result<MinkowskiEstimate> {
    let h = dom.mesh();
    for &r in radii {
        if r < 2.0 * h {
            return Err(Error::RadiusBelowResolution {
                radius: r,
                min: 2.0 * h,
            });
        }
    }
    let dist = distance_to_set(dom, &ls.in_set);
    let h2 = h * h;
    let masses = radii
        .iter()
        .map(|&r| {
            let cells = r / h;
            let lebesgue: f64 = (0..dom.interior_count())
                .filter(|&v| dist[v] <= cells)
                .map(|v| f[v] * h2)
                .sum();
            0.5 * r.ln().abs().sqrt() * lebesgue
        })
        .collect();
    Ok(MinkowskiEstimate {
        radii: radii.to_vec(),
        masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_lattice, DomainSpec, LatticeDomain};
    use crate::potential::calibrate;
    use crate::sampler::rng_for;
    use rand::Rng;

    fn disk_setup(mesh: f64) -> (GreenOracle, BoundaryData) {
        let calib = calibrate(0.02).unwrap();
        let o = GreenOracle::calibrated(build_lattice(&DomainSpec::disk(1.0), mesh).unwrap(), calib)
            .unwrap();
        let u = BoundaryData::zero(o.dom());
        (o, u)
    }

    /// Brute-force oracle: BFS over the admissibility predicate with
    /// explicit edge-by-edge checks, independent of the extractor's
    /// union-find/stack strategy.
    fn bfs_oracle(
        dom: &LatticeDomain,
        total: &[f64],
        crossed: &[bool],
        a: f64,
    ) -> Vec<bool> {
        let n = dom.interior_count();
        let mut in_set = vec![false; n];
        let mut frontier: Vec<usize> = (n..dom.total_count()).collect();
        loop {
            let mut next = Vec::new();
            for &id in &frontier {
                for (e, &(x, y)) in dom.edges().iter().enumerate() {
                    let (x, y) = (x as usize, y as usize);
                    let other = if x == id {
                        y
                    } else if y == id {
                        x
                    } else {
                        continue;
                    };
                    if other < n && !in_set[other] && !crossed[e] && total[other] >= -a {
                        in_set[other] = true;
                        next.push(other);
                    }
                }
            }
            if next.is_empty() {
                return in_set;
            }
            frontier = next;
        }
    }

    #[test]
    fn extraction_matches_bfs_oracle_on_random_instances() {
        let dom = LatticeDomain::rectangle(4, 4);
        let n = dom.interior_count();
        let ne = dom.edges().len();
        let mut rng = rng_for(99, 0);
        for _ in 0..1000 {
            let total: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let crossed_raw: Vec<bool> = (0..ne).map(|_| rng.gen_bool(0.3)).collect();
            let a = rng.gen_range(0.1..1.5);
            // enforce the deterministic-crossing rule of the model
            let crossed: Vec<bool> = dom
                .edges()
                .iter()
                .zip(&crossed_raw)
                .map(|(&(x, y), &c)| {
                    let tx = if (x as usize) < n { total[x as usize] } else { 0.0 };
                    let ty = if (y as usize) < n { total[y as usize] } else { 0.0 };
                    c || tx <= -a || ty <= -a
                })
                .collect();
            let crossings = EdgeCrossings {
                level: -a,
                crossed: crossed.clone(),
            };
            let ls = extract_fps_seeded(&dom, &total, &crossings, a, 1.0, None);
            let want = bfs_oracle(&dom, &total, &crossed, a);
            assert_eq!(ls.in_set, want);
        }
    }

    #[test]
    fn boundary_level_data_gives_boundary_only_set() {
        // u ≡ −a on the boundary → all edges from the boundary are crossed
        // and the set is ∂D alone, ν ≡ 0
        let (o, _) = disk_setup(0.05);
        let a = 0.7;
        let values = vec![-a; o.dom().boundary_count()];
        let u = crate::domain::extend_harmonically(o.dom(), o.chol(), &values).unwrap();
        let s = sample_gff(&o, 21, 0).unwrap();
        let uniforms = sample_edge_uniforms(o.dom(), 21, 1);
        let n = o.dom().interior_count();
        let c = crossings_at_level(
            o.dom(),
            |id| s.total(o.dom(), &u, id),
            -a,
            1.0,
            &uniforms,
        );
        let ls = extract_fps(o.dom(), &s, &u, &c, a, 1.0);
        assert_eq!(ls.interior_size(), 0);
        assert!(ls.nu.iter().all(|&x| x == 0.0));
        let _ = n;
    }

    #[test]
    fn huge_level_swallows_everything() {
        let (o, u) = disk_setup(0.05);
        let a = 60.0; // far beyond any realistic field value
        let s = sample_gff(&o, 22, 0).unwrap();
        let uniforms = sample_edge_uniforms(o.dom(), 22, 1);
        let c = crossings_at_level(
            o.dom(),
            |id| s.total(o.dom(), &u, id),
            -a,
            1.0,
            &uniforms,
        );
        let ls = extract_fps(o.dom(), &s, &u, &c, a, 1.0);
        assert_eq!(ls.interior_size(), o.dom().interior_count());
    }

    #[test]
    fn fps_up_is_negated_fps_bit_for_bit() {
        let (o, _) = disk_setup(0.05);
        let b = 0.8;
        // non-trivial boundary data
        let values: Vec<f64> = (0..o.dom().boundary_count())
            .map(|i| 0.3 * ((i % 3) as f64 - 1.0))
            .collect();
        let u = crate::domain::extend_harmonically(o.dom(), o.chol(), &values).unwrap();
        let neg_values: Vec<f64> = values.iter().map(|v| -v).collect();
        let neg_u =
            crate::domain::extend_harmonically(o.dom(), o.chol(), &neg_values).unwrap();
        let s = sample_gff(&o, 23, 0).unwrap();
        let neg_s = FieldSample {
            phi: s.phi.iter().map(|v| -v).collect(),
            seed: s.seed,
            stream: s.stream,
        };
        let uniforms = sample_edge_uniforms(o.dom(), 23, 1);
        let c = crossings_at_level(
            o.dom(),
            |id| -s.total(o.dom(), &u, id),
            -b,
            1.0,
            &uniforms,
        );
        let up = extract_fps_up(o.dom(), &s, &u, &c, b, 1.0);
        let down = extract_fps(o.dom(), &neg_s, &neg_u, &c, b, 1.0);
        assert_eq!(up.in_set, down.in_set);
        assert_eq!(up.nu, down.nu);
        // ν entries of the up-set are b + u − φ ≥ 0
        for v in 0..o.dom().interior_count() {
            if up.in_set[v] {
                let h2 = o.dom().mesh() * o.dom().mesh();
                let want = (b - s.phi[v] - u.harmonic_extension[v]) * h2;
                assert!((up.nu[v] - want).abs() < 1e-12);
                assert!(up.nu[v] >= 0.0);
            }
        }
    }

    #[test]
    fn tvs_is_contained_in_both_fps() {
        let (o, u) = disk_setup(0.05);
        let lambda = (std::f64::consts::PI / 8.0).sqrt();
        let (a, b) = (lambda, lambda);
        for i in 0..20 {
            let s = sample_gff(&o, 31, i).unwrap();
            let uni = sample_edge_uniforms(o.dom(), 31, 1000 + i);
            let cd = crossings_at_level(o.dom(), |id| s.total(o.dom(), &u, id), -a, 1.0, &uni);
            let cu = crossings_at_level(o.dom(), |id| -s.total(o.dom(), &u, id), -b, 1.0, &uni);
            let tvs = extract_tvs(o.dom(), &s, &u, &cd, &cu, a, b, 1.0);
            let down = extract_fps(o.dom(), &s, &u, &cd, a, 1.0);
            let up = extract_fps_up(o.dom(), &s, &u, &cu, b, 1.0);
            for v in 0..o.dom().interior_count() {
                assert!(!tvs.in_set[v] || (down.in_set[v] && up.in_set[v]));
            }
        }
    }

    #[test]
    fn monotone_in_level_under_coupling() {
        let (o, u) = disk_setup(0.05);
        for i in 0..20 {
            let s = sample_gff(&o, 37, i).unwrap();
            let uni = sample_edge_uniforms(o.dom(), 37, 1000 + i);
            let (a1, a2) = (0.4, 1.1);
            let c1 = crossings_at_level(o.dom(), |id| s.total(o.dom(), &u, id), -a1, 1.0, &uni);
            let c2 = crossings_at_level(o.dom(), |id| s.total(o.dom(), &u, id), -a2, 1.0, &uni);
            let l1 = extract_fps(o.dom(), &s, &u, &c1, a1, 1.0);
            let l2 = extract_fps(o.dom(), &s, &u, &c2, a2, 1.0);
            for v in 0..o.dom().interior_count() {
                assert!(!l1.in_set[v] || l2.in_set[v], "containment violated");
            }
        }
    }

    #[test]
    fn nested_extraction_is_nested() {
        let (o, u) = disk_setup(0.05);
        let lambda = (std::f64::consts::PI / 8.0).sqrt();
        let levels = [lambda, 2.0 * lambda, 3.0 * lambda, 4.0 * lambda];
        let seq = nested_fps(&o, &u, &levels, 41, 0).unwrap();
        assert_eq!(seq.len(), 4);
        let mut prev_size = 0;
        for w in seq.windows(2) {
            for v in 0..o.dom().interior_count() {
                assert!(!w[0].in_set[v] || w[1].in_set[v]);
            }
        }
        for ls in &seq {
            assert!(ls.interior_size() >= prev_size);
            prev_size = ls.interior_size();
        }
        // ν stays nonnegative through the coupling
        for ls in &seq {
            assert!(ls.nu.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn distance_transform_is_exact() {
        let dom = LatticeDomain::rectangle(9, 7);
        let n = dom.interior_count();
        let mut rng = rng_for(5, 0);
        for _ in 0..50 {
            let in_set: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.15)).collect();
            if !in_set.iter().any(|&x| x) {
                continue;
            }
            let dist = distance_to_set(&dom, &in_set);
            for v in 0..n {
                let (vx, vy) = dom.coord(v);
                let want = (0..n)
                    .filter(|&w| in_set[w])
                    .map(|w| {
                        let (wx, wy) = dom.coord(w);
                        (((vx - wx).pow(2) + (vy - wy).pow(2)) as f64).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min);
                assert!((dist[v] - want).abs() < 1e-9, "vertex {v}: {} vs {want}", dist[v]);
            }
        }
    }

    #[test]
    fn minkowski_full_set_gives_gauged_window_area() {
        let (o, u) = disk_setup(0.02);
        let n = o.dom().interior_count();
        let ls = LocalSetSample {
            kind: LocalSetKind::FpsDown(1.0),
            in_set: vec![true; n],
            nu: vec![0.0; n],
        };
        // window |z| < 0.5
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
        let area: f64 = f.iter().sum::<f64>() * o.dom().mesh() * o.dom().mesh();
        let est = minkowski_estimate(o.dom(), &ls, &f, &[0.05, 0.1]).unwrap();
        for (r, m) in est.radii.iter().zip(&est.masses) {
            let want = 0.5 * r.ln().abs().sqrt() * area;
            assert!((m - want).abs() < 1e-9, "{m} vs {want}");
        }
        let _ = u;
    }

    #[test]
    fn minkowski_boundary_only_set_vanishes_in_window() {
        let (o, _) = disk_setup(0.02);
        let n = o.dom().interior_count();
        let ls = LocalSetSample {
            kind: LocalSetKind::FpsDown(1.0),
            in_set: vec![false; n],
            nu: vec![0.0; n],
        };
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
        let est = minkowski_estimate(o.dom(), &ls, &f, &[0.05]).unwrap();
        assert_eq!(est.masses[0], 0.0);
        assert!(matches!(
            minkowski_estimate(o.dom(), &ls, &f, &[0.01]),
            Err(Error::RadiusBelowResolution { .. })
        ));
    }
}
