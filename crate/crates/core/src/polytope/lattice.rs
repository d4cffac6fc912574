//! Face lattice from facet-vertex incidence.
//!
//! The facets of a face F are the inclusion-maximal sets among F ∩ G over
//! facets G not containing F. Starting from the facets and walking down one
//! dimension at a time yields every face as a sorted vertex-index set.

use std::collections::HashMap;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct FaceLattice {
    pub dim: usize,
    /// `faces_by_dim[k]` lists the k-faces as sorted vertex-index sets.
    pub faces_by_dim: Vec<Vec<Vec<usize>>>,
    /// `incidence[k]` holds pairs (i, j): k-face i is contained in (k+1)-face j.
    pub incidence: Vec<Vec<(usize, usize)>>,
    pub flag_count: u64,
}

impl FaceLattice {
    /// Builds the lattice of a d-polytope from the vertex sets of its facets.
    /// Vertex ids are arbitrary but must be consistent across facets.
    pub fn from_facets(dim: usize, facets: &[Vec<usize>]) -> Self {
        let mut faces_by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); dim];
        let mut incidence: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dim.saturating_sub(1)];
        let mut top: Vec<Vec<usize>> = facets
            .iter()
            .map(|f| {
                let mut v = f.clone();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        top.sort();
        top.dedup();
        faces_by_dim[dim - 1] = top;

        let mut by_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
        for (g, f) in faces_by_dim[dim - 1].iter().enumerate() {
            for &v in f {
                by_vertex.entry(v).or_default().push(g);
            }
        }

        for k in (1..dim).rev() {
            let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut lower: Vec<Vec<usize>> = Vec::new();
            let mut inc: Vec<(usize, usize)> = Vec::new();
            for (fi, face) in faces_by_dim[k].iter().enumerate() {
                let mut touched: Vec<usize> = face
                    .iter()
                    .flat_map(|v| by_vertex.get(v).into_iter().flatten().copied())
                    .collect();
                touched.sort_unstable();
                touched.dedup();
                let mut cands: Vec<Vec<usize>> = Vec::new();
                for g in touched {
                    let gset = &faces_by_dim[dim - 1][g];
                    let inter: Vec<usize> = face
                        .iter()
                        .copied()
                        .filter(|v| gset.binary_search(v).is_ok())
                        .collect();
                    if inter.len() < face.len() && inter.len() >= k {
                        cands.push(inter);
                    }
                }
                cands.sort();
                cands.dedup();
                let maximal: Vec<&Vec<usize>> = cands
                    .iter()
                    .filter(|c| !cands.iter().any(|o| o.len() > c.len() && is_subset(c, o)))
                    .collect();
                for c in maximal {
                    let id = *index.entry(c.clone()).or_insert_with(|| {
                        lower.push(c.clone());
                        lower.len() - 1
                    });
                    inc.push((id, fi));
                }
            }
            inc.sort_unstable();
            faces_by_dim[k - 1] = lower;
            incidence[k - 1] = inc;
        }

        let flag_count = count_flags(&faces_by_dim, &incidence);
        FaceLattice {
            dim,
            faces_by_dim,
            incidence,
            flag_count,
        }
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.faces_by_dim.iter().map(|f| f.len()).collect()
    }

    /// Σ (−1)^k f_k − (1 − (−1)^d); zero for a valid lattice.
    pub fn euler_defect(&self) -> i64 {
        euler_defect(&self.f_vector())
    }
}

pub fn euler_defect(f: &[usize]) -> i64 {
    let d = f.len();
    let alt: i64 = f
        .iter()
        .enumerate()
        .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
        .sum();
    let rhs = if d % 2 == 0 { 0 } else { 2 };
    alt - rhs
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn count_flags(faces: &[Vec<Vec<usize>>], inc: &[Vec<(usize, usize)>]) -> u64 {
    let mut chains: Vec<u64> = vec![1; faces[0].len()];
    for (k, pairs) in inc.iter().enumerate() {
        let mut next = vec![0u64; faces[k + 1].len()];
        for &(i, j) in pairs {
            next[j] += chains[i];
        }
        chains = next;
    }
    chains.iter().sum()
}
