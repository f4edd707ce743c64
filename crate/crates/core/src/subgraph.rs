//! Solves on induced subgraphs of a lattice domain.
//!
//! Removing a vertex set A from the domain leaves an induced subgraph of the
//! interior; every neighbor outside the subgraph (a vertex of A or a domain
//! boundary vertex) acts as Dirichlet boundary. Kept vertices inherit the
//! row-major order of the parent domain, so the restricted Laplacian is
//! again banded.

use crate::band::{BandCholesky, BandMatrix};
use crate::domain::{Cell, LatticeDomain};
use crate::error::{Error, Result};

pub struct Subgraph<'a> {
    dom: &'a LatticeDomain,
    keep: Vec<u32>,
    sub_index: Vec<i32>,
    chol: BandCholesky,
}

impl<'a> Subgraph<'a> {
    /// Build and factorize the Laplacian restricted to the kept interior
    /// vertices (`kept` is indexed by interior vertex).
    pub fn new(dom: &'a LatticeDomain, kept: &[bool]) -> Result<Self> {
        assert_eq!(kept.len(), dom.interior_count());
        let keep: Vec<u32> = (0..kept.len() as u32).filter(|&v| kept[v as usize]).collect();
        if keep.is_empty() {
            return Err(Error::EmptyComplement);
        }
        let mut sub_index = vec![-1i32; kept.len()];
        for (s, &v) in keep.iter().enumerate() {
            sub_index[v as usize] = s as i32;
        }
        let n = dom.interior_count() as u32;
        let mut bw = 1usize;
        for &(a, b) in dom.edges() {
            if b < n && kept[a as usize] && kept[b as usize] {
                bw = bw.max((sub_index[b as usize] - sub_index[a as usize]) as usize);
            }
        }
        let mut m = BandMatrix::zeros(keep.len(), bw);
        for s in 0..keep.len() {
            m.add(s, s, 4.0);
        }
        for &(a, b) in dom.edges() {
            if b < n && kept[a as usize] && kept[b as usize] {
                let (sa, sb) = (sub_index[a as usize], sub_index[b as usize]);
                m.add(sb as usize, sa as usize, -1.0);
            }
        }
        let chol = m.cholesky()?;
        Ok(Subgraph {
            dom,
            keep,
            sub_index,
            chol,
        })
    }

    /// Restrict to the connected component of `z` inside the kept vertices
    /// before factorizing. Green values at `z` are unaffected (other
    /// components are separated by Dirichlet sites) and the bandwidth shrinks
    /// to the component's row extent.
    pub fn component_of(dom: &'a LatticeDomain, kept: &[bool], z: usize) -> Result<Self> {
        if !kept[z] {
            return Err(Error::VertexInSet(z));
        }
        let n = dom.interior_count();
        let mut mask = vec![false; n];
        let mut stack = vec![z];
        mask[z] = true;
        while let Some(v) = stack.pop() {
            for c in dom.neighbors(v) {
                if let Cell::Interior(w) = c {
                    let w = w as usize;
                    if kept[w] && !mask[w] {
                        mask[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        Subgraph::new(dom, &mask)
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    /// Kept interior vertices in subgraph order.
    pub fn keep(&self) -> &[u32] {
        &self.keep
    }

    pub fn sub_index_of(&self, interior: usize) -> Option<usize> {
        let s = self.sub_index[interior];
        (s >= 0).then_some(s as usize)
    }

    /// Unified ids of the (up to 4) neighbors of a kept vertex that are NOT
    /// in the subgraph (Dirichlet sites), paired with the kept vertex.
    fn for_dirichlet_neighbors(&self, mut visit: impl FnMut(usize, usize)) {
        let n = self.dom.interior_count();
        for (s, &v) in self.keep.iter().enumerate() {
            for c in self.dom.neighbors(v as usize) {
                match c {
                    Cell::Interior(w) => {
                        if self.sub_index[w as usize] < 0 {
                            visit(s, w as usize);
                        }
                    }
                    Cell::Boundary(b) => visit(s, n + b as usize),
                    Cell::Outside => unreachable!("interior vertices have no outside neighbors"),
                }
            }
        }
    }

    /// Harmonic function on the subgraph with Dirichlet values given at every
    /// non-kept neighbor (`value_at` takes a unified id).
    pub fn harmonic(&self, value_at: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut rhs = vec![0.0; self.keep.len()];
        self.for_dirichlet_neighbors(|s, id| rhs[s] += value_at(id));
        self.chol.solve(&rhs)
    }

    /// Solve the restricted Laplacian against a subgraph-indexed RHS.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.chol.solve(rhs)
    }

    /// Raw Green diagonal entry (inverse restricted Laplacian) at an original
    /// interior vertex.
    pub fn green_raw_diag_at(&self, interior: usize) -> Result<f64> {
        let s = self
            .sub_index_of(interior)
            .ok_or(Error::VertexOutOfDomain(interior))?;
        let mut e = vec![0.0; self.keep.len()];
        e[s] = 1.0;
        Ok(self.solve(&e)[s])
    }

    /// Full raw Green diagonal (subgraph order).
    pub fn green_raw_diag(&self) -> Vec<f64> {
        self.chol.diag_inverse()
    }

    /// `L^{-T} z` on the subgraph: maps iid standard Gaussians to a sample of
    /// the zero-boundary field with covariance the inverse restricted
    /// Laplacian.
    pub fn half_solve(&self, z: &mut [f64]) {
        self.chol.backward(z);
    }
}

/// Label the connected components of the kept interior vertices.
/// Returns (label per interior vertex, -1 where not kept; component count).
pub fn components(dom: &LatticeDomain, kept: &[bool]) -> (Vec<i32>, usize) {
    let n = dom.interior_count();
    let mut label = vec![-1i32; n];
    let mut next = 0i32;
    let mut stack = Vec::new();
    for start in 0..n {
        if !kept[start] || label[start] >= 0 {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for c in dom.neighbors(v) {
                if let Cell::Interior(w) = c {
                    let w = w as usize;
                    if kept[w] && label[w] < 0 {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
        }
        next += 1;
    }
    (label, next as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_lattice, extend_harmonically, DomainSpec};

    #[test]
    fn full_subgraph_matches_domain_solve() {
        let dom = build_lattice(&DomainSpec::disk(1.0), 0.1).unwrap();
        let kept = vec![true; dom.interior_count()];
        let sub = Subgraph::new(&dom, &kept).unwrap();
        let chol = dom.factor_laplacian().unwrap();
        let values: Vec<f64> = (0..dom.boundary_count()).map(|b| (b % 5) as f64).collect();
        let bd = extend_harmonically(&dom, &chol, &values).unwrap();
        let n = dom.interior_count();
        let harm = sub.harmonic(|id| values[id - n]);
        for v in 0..n {
            assert!((harm[v] - bd.harmonic_extension[v]).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_on_removed_set_is_respected() {
        // remove the middle column of a rectangle; each half solves the
        // harmonic problem with the removed column as extra boundary
        let dom = LatticeDomain::rectangle(5, 5);
        let mut kept = vec![true; 25];
        for v in 0..25 {
            let (ix, _) = dom.coord(v);
            if ix == 3 {
                kept[v] = false;
            }
        }
        let sub = Subgraph::new(&dom, &kept).unwrap();
        // boundary 0 everywhere, removed column at 1 → harmonic in each half,
        // max principle between 0 and 1, symmetric across the column
        let n = dom.interior_count();
        let harm = sub.harmonic(|id| if id < n { 1.0 } else { 0.0 });
        for (s, &v) in sub.keep().iter().enumerate() {
            assert!(harm[s] > 0.0 && harm[s] < 1.0, "vertex {v}: {}", harm[s]);
        }
        // mirror symmetry: column 3 is the rectangle's axis
        for (s, &v) in sub.keep().iter().enumerate() {
            let (ix, iy) = dom.coord(v as usize);
            let mirror_ix = 6 - ix;
            let mv = sub
                .keep()
                .iter()
                .position(|&w| dom.coord(w as usize) == (mirror_ix, iy))
                .unwrap();
            assert!((harm[s] - harm[mv]).abs() < 1e-10);
        }
    }

    #[test]
    fn component_labeling_splits_halves() {
        let dom = LatticeDomain::rectangle(5, 5);
        let mut kept = vec![true; 25];
        for v in 0..25 {
            if dom.coord(v).0 == 3 {
                kept[v] = false;
            }
        }
        let (label, count) = components(&dom, &kept);
        assert_eq!(count, 2);
        for v in 0..25 {
            let (ix, _) = dom.coord(v);
            if ix == 3 {
                assert_eq!(label[v], -1);
            } else {
                assert_eq!(label[v], if ix < 3 { label[0] } else { label[24] });
            }
        }
    }

    #[test]
    fn empty_subgraph_is_an_error() {
        let dom = LatticeDomain::rectangle(3, 3);
        assert!(matches!(
            Subgraph::new(&dom, &vec![false; 9]),
            Err(Error::EmptyComplement)
        ));
    }
}
