//! Circle-domain specifications and their square-lattice discretizations.
//!
//! A continuum domain is an outer disk minus finitely many disjoint closed
//! disks (holes), with a piecewise-constant boundary function given per
//! angular arc of each boundary circle. Discretization places lattice points
//! on `h·Z²`; a point is *interior* if it lies strictly inside the domain and
//! *boundary* if it is outside but 4-adjacent to an interior point. Interior
//! vertices are numbered row-major so the interior Laplacian is banded.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::OnceLock;

use crate::band::{BandCholesky, BandMatrix};
use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Minimum number of lattice boundary vertices each boundary circle must
/// resolve to; below this the discrete component is too crude to carry
/// boundary data.
pub const MIN_BOUNDARY_VERTICES: usize = 8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Arc {
    /// Boundary component id: 0 = outer circle, k+1 = holes[k].
    pub component: usize,
    /// Angular interval [from, to), radians, half-open, may wrap past 2π.
    pub from: f64,
    pub to: f64,
    pub value: f64,
}

/// A multiply-connected circle domain with piecewise-constant boundary data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub outer: Disk,
    #[serde(default)]
    pub holes: Vec<Disk>,
    #[serde(default, rename = "arcs")]
    pub boundary_arcs: Vec<Arc>,
}

impl DomainSpec {
    /// Disk of given radius centered at the origin, zero boundary data.
    pub fn disk(radius: f64) -> Self {
        DomainSpec {
            outer: Disk {
                center: [0.0, 0.0],
                radius,
            },
            holes: vec![],
            boundary_arcs: vec![],
        }
    }

    /// Concentric annulus `inner < |z| < outer`, zero boundary data.
    pub fn annulus(inner: f64, outer: f64) -> Self {
        DomainSpec {
            outer: Disk {
                center: [0.0, 0.0],
                radius: outer,
            },
            holes: vec![Disk {
                center: [0.0, 0.0],
                radius: inner,
            }],
            boundary_arcs: vec![],
        }
    }

    /// Set a constant boundary value on a whole component.
    pub fn with_component_value(mut self, component: usize, value: f64) -> Self {
        self.boundary_arcs.push(Arc {
            component,
            from: 0.0,
            to: TAU,
            value,
        });
        self
    }

    pub fn component_count(&self) -> usize {
        1 + self.holes.len()
    }

    fn circle(&self, component: usize) -> &Disk {
        if component == 0 {
            &self.outer
        } else {
            &self.holes[component - 1]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer.radius > 0.0) {
            return Err(Error::DegenerateDomain("outer radius must be > 0".into()));
        }
        for (k, hole) in self.holes.iter().enumerate() {
            if !(hole.radius > 0.0) {
                return Err(Error::DegenerateDomain(format!(
                    "hole {k} has non-positive radius"
                )));
            }
            let d = dist(hole.center, self.outer.center);
            if d + hole.radius >= self.outer.radius {
                return Err(Error::DegenerateDomain(format!(
                    "hole {k} is not strictly inside the outer disk"
                )));
            }
            for (j, other) in self.holes.iter().enumerate().take(k) {
                if dist(hole.center, other.center) <= hole.radius + other.radius {
                    return Err(Error::DegenerateDomain(format!(
                        "holes {j} and {k} are not disjoint"
                    )));
                }
            }
        }
        self.validate_arcs()
    }

    /// Arcs of each component must partition [0, 2π); components with no
    /// arcs default to boundary value 0.
    fn validate_arcs(&self) -> Result<()> {
        for c in 0..self.component_count() {
            let mut arcs: Vec<(f64, f64)> = self
                .boundary_arcs
                .iter()
                .filter(|a| a.component == c)
                .map(|a| (a.from.rem_euclid(TAU), arc_len(a.from, a.to)))
                .collect();
            if arcs.is_empty() {
                continue;
            }
            arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
            let total: f64 = arcs.iter().map(|&(_, l)| l).sum();
            if (total - TAU).abs() > 1e-9 {
                return Err(Error::DegenerateDomain(format!(
                    "arcs of component {c} cover {total} rad, expected 2π"
                )));
            }
            for i in 0..arcs.len() {
                let (from, len) = arcs[i];
                let next = arcs[(i + 1) % arcs.len()].0;
                if ((from + len - next).rem_euclid(TAU)).min(TAU - (from + len - next).rem_euclid(TAU))
                    > 1e-9
                {
                    return Err(Error::DegenerateDomain(format!(
                        "arcs of component {c} overlap or leave a gap near angle {next}"
                    )));
                }
            }
        }
        for a in &self.boundary_arcs {
            if a.component >= self.component_count() {
                return Err(Error::DegenerateDomain(format!(
                    "arc references unknown component {}",
                    a.component
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let p = [x, y];
        if dist(p, self.outer.center) >= self.outer.radius {
            return false;
        }
        self.holes.iter().all(|h| dist(p, h.center) > h.radius)
    }

    /// Boundary value at the given angle on the given component
    /// (half-open arcs [from, to); 0 if the component has no arcs).
    pub fn arc_value(&self, component: usize, angle: f64) -> f64 {
        let theta = angle.rem_euclid(TAU);
        for a in &self.boundary_arcs {
            if a.component != component {
                continue;
            }
            let from = a.from.rem_euclid(TAU);
            let len = arc_len(a.from, a.to);
            if (theta - from).rem_euclid(TAU) < len {
                return a.value;
            }
        }
        0.0
    }

    /// Boundary values sampled at every boundary vertex of a discretization.
    pub fn boundary_values(&self, dom: &LatticeDomain) -> Vec<f64> {
        dom.boundary
            .iter()
            .map(|b| self.arc_value(b.component, b.angle))
            .collect()
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn arc_len(from: f64, to: f64) -> f64 {
    let l = (to - from).rem_euclid(TAU);
    if l == 0.0 {
        TAU
    } else {
        l
    }
}

/// Classification of a lattice cell in the bounding grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Outside,
    Interior(u32),
    Boundary(u32),
}

#[derive(Debug, Clone)]
pub struct BoundaryVertex {
    pub coord: (i64, i64),
    /// Boundary component id of the nearest violated circle.
    pub component: usize,
    /// Angle of the nearest continuum boundary point on that circle.
    pub angle: f64,
}

/// Raw classification used during construction.
#[allow(dead_code)] // `Out` is kept for clarity of the classification
enum RawCell {
    Out,
    In,
    Bnd { component: usize, angle: f64 },
}

/// Square-lattice discretization of a [`DomainSpec`].
#[derive(Debug)]
///
/// Interior vertices carry indices `0..interior_count()`; boundary vertices
/// continue at `interior_count()..total_count()` ("unified ids"). All edges
/// have unit conductance.
pub struct LatticeDomain {
    mesh: f64,
    ix0: i64,
    iy0: i64,
    nx: usize,
    ny: usize,
    cells: Vec<Cell>,
    vertices: Vec<(i64, i64)>,
    boundary: Vec<BoundaryVertex>,
    /// All interior-interior and interior-boundary edges, unified ids,
    /// smaller id first for interior-interior.
    edges: Vec<(u32, u32)>,
    bandwidth: usize,
    component_count: usize,
    adj: OnceLock<Adjacency>,
}

/// CSR adjacency over unified vertex ids; each entry pairs the neighbor's
/// unified id with the index of the connecting edge in `edges()`.
#[derive(Debug)]
pub struct Adjacency {
    offsets: Vec<u32>,
    targets: Vec<(u32, u32)>,
}

impl Adjacency {
    /// Neighbors of a unified vertex id as (neighbor id, edge index).
    pub fn of(&self, id: usize) -> &[(u32, u32)] {
        &self.targets[self.offsets[id] as usize..self.offsets[id + 1] as usize]
    }
}

impl LatticeDomain {
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn interior_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn total_count(&self) -> usize {
        self.vertices.len() + self.boundary.len()
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn boundary(&self) -> &[BoundaryVertex] {
        &self.boundary
    }

    /// Continuum coordinates of an interior vertex.
    pub fn point(&self, v: usize) -> (f64, f64) {
        let (ix, iy) = self.vertices[v];
        (ix as f64 * self.mesh, iy as f64 * self.mesh)
    }

    pub fn coord(&self, v: usize) -> (i64, i64) {
        self.vertices[v]
    }

    pub fn cell(&self, ix: i64, iy: i64) -> Cell {
        if ix < self.ix0
            || iy < self.iy0
            || ix >= self.ix0 + self.nx as i64
            || iy >= self.iy0 + self.ny as i64
        {
            return Cell::Outside;
        }
        self.cells[(iy - self.iy0) as usize * self.nx + (ix - self.ix0) as usize]
    }

    /// The four lattice neighbors of an interior vertex (never Outside).
    pub fn neighbors(&self, v: usize) -> [Cell; 4] {
        let (ix, iy) = self.vertices[v];
        [
            self.cell(ix + 1, iy),
            self.cell(ix - 1, iy),
            self.cell(ix, iy + 1),
            self.cell(ix, iy - 1),
        ]
    }

    /// Interior vertex nearest to a continuum point.
    pub fn vertex_near(&self, x: f64, y: f64) -> Result<usize> {
        let ix = (x / self.mesh).round() as i64;
        let iy = (y / self.mesh).round() as i64;
        // search outward in growing squares until an interior vertex appears
        for ring in 0..(self.nx.max(self.ny) as i64) {
            let mut best: Option<(f64, usize)> = None;
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs().max(dy.abs()) != ring {
                        continue;
                    }
                    if let Cell::Interior(v) = self.cell(ix + dx, iy + dy) {
                        let (px, py) = self.point(v as usize);
                        let d2 = (px - x).powi(2) + (py - y).powi(2);
                        if best.map_or(true, |(bd, _)| d2 < bd) {
                            best = Some((d2, v as usize));
                        }
                    }
                }
            }
            if let Some((_, v)) = best {
                return Ok(v);
            }
        }
        Err(Error::VertexOutOfDomain(usize::MAX))
    }

    /// Interior Laplacian (unit conductances, Dirichlet boundary) in band form.
    pub fn laplacian(&self) -> BandMatrix {
        let n = self.interior_count();
        let mut m = BandMatrix::zeros(n, self.bandwidth);
        for i in 0..n {
            m.add(i, i, 4.0);
        }
        for &(a, b) in &self.edges {
            if (b as usize) < n {
                m.add(b as usize, a as usize, -1.0);
            }
        }
        m
    }

    pub fn factor_laplacian(&self) -> Result<BandCholesky> {
        self.laplacian().cholesky()
    }

    /// Grid dimensions (nx, ny) of the bounding cell grid.
    pub fn grid_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Lattice coordinates of the bounding grid's lower-left cell.
    pub fn grid_origin(&self) -> (i64, i64) {
        (self.ix0, self.iy0)
    }

    /// CSR adjacency over unified ids, built on first use.
    pub fn adjacency(&self) -> &Adjacency {
        self.adj.get_or_init(|| {
            let total = self.total_count();
            let mut deg = vec![0u32; total + 1];
            for &(a, b) in &self.edges {
                deg[a as usize + 1] += 1;
                deg[b as usize + 1] += 1;
            }
            for i in 0..total {
                deg[i + 1] += deg[i];
            }
            let offsets = deg.clone();
            let mut fill = offsets.clone();
            let mut targets = vec![(0u32, 0u32); self.edges.len() * 2];
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                targets[fill[a as usize] as usize] = (b, e as u32);
                fill[a as usize] += 1;
                targets[fill[b as usize] as usize] = (a, e as u32);
                fill[b as usize] += 1;
            }
            Adjacency { offsets, targets }
        })
    }

    /// Test helper: an `nx × ny` interior grid with a synthetic single
    /// boundary component wrapped around it (mesh 1).
    pub fn rectangle(nx: usize, ny: usize) -> LatticeDomain {
        let (gx, gy) = (nx + 2, ny + 2);
        let mut raw = Vec::with_capacity(gx * gy);
        for iy in 0..gy {
            for ix in 0..gx {
                let inside = ix >= 1 && ix <= nx && iy >= 1 && iy <= ny;
                if inside {
                    raw.push(RawCell::In);
                } else {
                    let cx = (nx as f64 + 1.0) / 2.0;
                    let cy = (ny as f64 + 1.0) / 2.0;
                    raw.push(RawCell::Bnd {
                        component: 0,
                        angle: (iy as f64 - cy).atan2(ix as f64 - cx).rem_euclid(TAU),
                    });
                }
            }
        }
        Self::from_cells(1.0, 0, 0, gx, gy, raw, 1)
            .expect("rectangle helper domain is always valid")
    }

    /// Assemble a domain from a raw classification grid: drop boundary cells
    /// not adjacent to interior, number vertices row-major, collect edges.
    fn from_cells(
        mesh: f64,
        ix0: i64,
        iy0: i64,
        nx: usize,
        ny: usize,
        raw: Vec<RawCell>,
        component_count: usize,
    ) -> Result<LatticeDomain> {
        let idx = |ix: usize, iy: usize| iy * nx + ix;
        let is_in = |ix: i64, iy: i64| {
            ix >= 0
                && iy >= 0
                && (ix as usize) < nx
                && (iy as usize) < ny
                && matches!(raw[idx(ix as usize, iy as usize)], RawCell::In)
        };

        let mut cells = vec![Cell::Outside; nx * ny];
        let mut vertices = Vec::new();
        let mut boundary = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                match raw[idx(ix, iy)] {
                    RawCell::In => {
                        cells[idx(ix, iy)] = Cell::Interior(vertices.len() as u32);
                        vertices.push((ix0 + ix as i64, iy0 + iy as i64));
                    }
                    RawCell::Bnd { component, angle } => {
                        let (jx, jy) = (ix as i64, iy as i64);
                        let adj = is_in(jx + 1, jy)
                            || is_in(jx - 1, jy)
                            || is_in(jx, jy + 1)
                            || is_in(jx, jy - 1);
                        if adj {
                            cells[idx(ix, iy)] = Cell::Boundary(boundary.len() as u32);
                            boundary.push(BoundaryVertex {
                                coord: (ix0 + jx, iy0 + jy),
                                component,
                                angle,
                            });
                        }
                    }
                    RawCell::Out => {}
                }
            }
        }
        if vertices.is_empty() {
            return Err(Error::DegenerateDomain(
                "no interior vertices at this mesh".into(),
            ));
        }

        let n = vertices.len() as u32;
        let mut edges = Vec::new();
        let mut bandwidth = 1usize;
        let mut dom = LatticeDomain {
            mesh,
            ix0,
            iy0,
            nx,
            ny,
            cells,
            vertices,
            boundary,
            edges: vec![],
            bandwidth: 0,
            component_count,
            adj: OnceLock::new(),
        };
        for v in 0..dom.vertices.len() {
            let (ix, iy) = dom.vertices[v];
            // +x and +y directions give each interior-interior edge once
            for (dx, dy) in [(1i64, 0i64), (0, 1)] {
                match dom.cell(ix + dx, iy + dy) {
                    Cell::Interior(w) => {
                        bandwidth = bandwidth.max(w as usize - v);
                        edges.push((v as u32, w));
                    }
                    Cell::Boundary(b) => edges.push((v as u32, n + b)),
                    Cell::Outside => {
                        return Err(Error::DegenerateDomain(format!(
                            "interior vertex {v} touches an unclassified cell"
                        )))
                    }
                }
            }
            // -x and -y: record only interior-boundary edges (interior ones
            // were already recorded from the other endpoint)
            for (dx, dy) in [(-1i64, 0i64), (0, -1)] {
                match dom.cell(ix + dx, iy + dy) {
                    Cell::Boundary(b) => edges.push((v as u32, n + b)),
                    Cell::Interior(_) => {}
                    Cell::Outside => {
                        return Err(Error::DegenerateDomain(format!(
                            "interior vertex {v} touches an unclassified cell"
                        )))
                    }
                }
            }
        }
        dom.edges = edges;
        dom.bandwidth = bandwidth;
        Ok(dom)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.interior_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1usize;
        while let Some(v) = queue.pop_front() {
            for c in self.neighbors(v) {
                if let Cell::Interior(w) = c {
                    let w = w as usize;
                    if !seen[w] {
                        seen[w] = true;
                        count += 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        if count != n {
            return Err(Error::DegenerateDomain(format!(
                "interior is disconnected at this mesh ({count} of {n} vertices reachable)"
            )));
        }
        Ok(())
    }
}

/// Discretize a domain specification at lattice spacing `mesh`.
pub fn build_lattice(spec: &DomainSpec, mesh: f64) -> Result<LatticeDomain> {
    spec.validate()?;
    if !(mesh > 0.0) {
        return Err(Error::ConfigViolation("mesh must be positive".into()));
    }
    let [cx, cy] = spec.outer.center;
    let r = spec.outer.radius;
    let ix0 = ((cx - r) / mesh).floor() as i64 - 2;
    let ix1 = ((cx + r) / mesh).ceil() as i64 + 2;
    let iy0 = ((cy - r) / mesh).floor() as i64 - 2;
    let iy1 = ((cy + r) / mesh).ceil() as i64 + 2;
    let nx = (ix1 - ix0 + 1) as usize;
    let ny = (iy1 - iy0 + 1) as usize;

    let mut raw = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let x = (ix0 + ix as i64) as f64 * mesh;
            let y = (iy0 + iy as i64) as f64 * mesh;
            if spec.contains(x, y) {
                raw.push(RawCell::In);
            } else {
                // component of the violated circle
                let p = [x, y];
                let mut component = 0usize;
                if dist(p, spec.outer.center) < spec.outer.radius {
                    component = spec
                        .holes
                        .iter()
                        .position(|h| dist(p, h.center) <= h.radius)
                        .map(|k| k + 1)
                        .unwrap_or(0);
                }
                let c = spec.circle(component);
                let angle = (y - c.center[1]).atan2(x - c.center[0]).rem_euclid(TAU);
                raw.push(RawCell::Bnd { component, angle });
            }
        }
    }
    let dom = LatticeDomain::from_cells(mesh, ix0, iy0, nx, ny, raw, spec.component_count())?;
    dom.check_connected()?;
    for c in 0..spec.component_count() {
        // a circle is resolved only if its diameter spans enough lattice
        // points and its discrete boundary has enough vertices
        let across = (2.0 * spec.circle(c).radius / mesh).floor() as usize;
        let count = dom
            .boundary
            .iter()
            .filter(|b| b.component == c)
            .count()
            .min(across);
        if count < MIN_BOUNDARY_VERTICES {
            return Err(Error::MeshTooCoarse {
                component: c,
                count,
                min: MIN_BOUNDARY_VERTICES,
            });
        }
    }
    Ok(dom)
}

/// Boundary values and their discrete harmonic extension.
pub struct BoundaryData {
    /// Per boundary vertex.
    pub values: Vec<f64>,
    /// Per interior vertex.
    pub harmonic_extension: Vec<f64>,
}

impl BoundaryData {
    /// Value at a unified vertex id (extension on interior, data on boundary).
    pub fn at(&self, dom: &LatticeDomain, id: usize) -> f64 {
        let n = dom.interior_count();
        if id < n {
            self.harmonic_extension[id]
        } else {
            self.values[id - n]
        }
    }

    /// Identically-zero boundary data.
    pub fn zero(dom: &LatticeDomain) -> BoundaryData {
        BoundaryData {
            values: vec![0.0; dom.boundary_count()],
            harmonic_extension: vec![0.0; dom.interior_count()],
        }
    }
}

/// Discrete harmonic extension of boundary values, using a prefactorized
/// interior Laplacian. Verifies the discrete Laplace residual (≤ 1e-10 max
/// norm) before returning.
pub fn extend_harmonically(
    dom: &LatticeDomain,
    chol: &BandCholesky,
    values: &[f64],
) -> Result<BoundaryData> {
    let n = dom.interior_count();
    assert_eq!(values.len(), dom.boundary_count());
    assert_eq!(chol.n(), n);
    let mut rhs = vec![0.0; n];
    for &(a, b) in dom.edges() {
        if (b as usize) >= n {
            rhs[a as usize] += values[b as usize - n];
        }
    }
    let ext = chol.solve(&rhs);
    // residual of the discrete Laplace equation
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut resid = vec![0.0; n];
    for (i, r) in rhs.iter().enumerate() {
        resid[i] = 4.0 * ext[i] - r;
    }
    for &(a, b) in dom.edges() {
        if (b as usize) < n {
            resid[a as usize] -= ext[b as usize];
            resid[b as usize] -= ext[a as usize];
        }
    }
    let max_resid = resid.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if max_resid > 1e-10 * scale.max(1.0) {
        return Err(Error::SolverFailure(format!(
            "harmonic extension residual {max_resid:e} exceeds tolerance"
        )));
    }
    Ok(BoundaryData {
        values: values.to_vec(),
        harmonic_extension: ext,
    })
}
