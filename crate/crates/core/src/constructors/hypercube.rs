use std::collections::{BTreeMap, HashMap};

use crate::complex::{CellComplex, ComplexParts, SparseMatrix};
use crate::error::{Error, Result};

pub const MAX_HYPERCUBE_CELLS: usize = 4_000_000;

/// Cube skeleton together with the (free-mask, base) → index lookup.
///
/// An i-cell is an axis-aligned face: a set S of free coordinates and a
/// base vertex whose S-bits are zero. Cells of each dimension are listed by
/// free set (lexicographic as coordinate lists), then by base vertex.
#[derive(Clone, Debug)]
pub struct Hypercube {
    pub deg: usize,
    pub complex: CellComplex,
    cells: Vec<Vec<(u32, u32)>>,
    index: Vec<HashMap<(u32, u32), usize>>,
}

fn free_sets(deg: usize, k: usize) -> Vec<u32> {
    super::combinations(deg, k).into_iter().map(|s| s.iter().fold(0u32, |m, &c| m | 1 << c)).collect()
}

fn cell_label(deg: usize, mask: u32, base: u32) -> String {
    (0..deg)
        .map(|c| {
            if mask >> c & 1 == 1 {
                '*'
            } else if base >> c & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

impl Hypercube {
    pub fn new(deg: usize, k: usize) -> Result<Hypercube> {
        if k < 1 || k > deg.min(3) {
            return Err(Error::Argument(format!("hypercube skeleton needs 1 ≤ k ≤ min(deg, 3); got deg={deg}, k={k}")));
        }
        if deg > 24 {
            return Err(Error::Size(format!("hypercube degree {deg} exceeds the memory cap")));
        }
        let total: usize = (0..=k).map(|i| binom(deg, i) * (1usize << (deg - i))).sum();
        if total > MAX_HYPERCUBE_CELLS {
            return Err(Error::Size(format!("hypercube deg={deg} k={k} has {total} cells > cap {MAX_HYPERCUBE_CELLS}")));
        }
        let mut cells = Vec::new();
        let mut index = Vec::new();
        for i in 0..=k {
            let mut list = Vec::new();
            for mask in free_sets(deg, i) {
                for base in 0u32..(1u32 << deg) {
                    if base & mask == 0 {
                        list.push((mask, base));
                    }
                }
            }
            index.push(list.iter().enumerate().map(|(n, &c)| (c, n)).collect::<HashMap<_, _>>());
            cells.push(list);
        }
        let mut boundaries = Vec::new();
        for i in 1..=k {
            let cols = cells[i]
                .iter()
                .map(|&(mask, base)| {
                    let coords: Vec<u32> = (0..deg as u32).filter(|c| mask >> c & 1 == 1).collect();
                    let mut col = Vec::with_capacity(2 * i);
                    for (j, &c) in coords.iter().enumerate() {
                        let sign = if j % 2 == 0 { 1 } else { -1 };
                        let face_mask = mask & !(1 << c);
                        col.push((index[i - 1][&(face_mask, base | 1 << c)], sign));
                        col.push((index[i - 1][&(face_mask, base)], -sign));
                    }
                    col
                })
                .collect();
            boundaries.push(SparseMatrix::from_columns(cells[i - 1].len(), cols));
        }
        let ids = cells.iter().map(|d| d.iter().map(|&(m, b)| cell_label(deg, m, b)).collect()).collect();
        let complex = CellComplex::from_parts(ComplexParts {
            name: format!("hypercube(deg={deg},k={k})"),
            augmented: true,
            cells: ids,
            boundaries,
            labels: None,
            loops: BTreeMap::new(),
            allow_closed: false,
        })?;
        Ok(Hypercube { deg, complex, cells, index })
    }

    /// Index of the face with free-coordinate mask `mask` containing vertex `v`.
    pub fn cell(&self, mask: u32, v: u32) -> Option<usize> {
        let d = mask.count_ones() as usize;
        self.index.get(d)?.get(&(mask, v & !mask)).copied()
    }

    pub fn edge(&self, v: u32, coord: usize) -> usize {
        self.cell(1 << coord, v).expect("edge exists")
    }

    pub fn square(&self, v: u32, a: usize, b: usize) -> usize {
        self.cell(1 << a | 1 << b, v).expect("square exists")
    }

    /// (free mask, base vertex) of a cell.
    pub fn cell_data(&self, d: usize, i: usize) -> (u32, u32) {
        self.cells[d][i]
    }
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The k-skeleton of the deg-dimensional cube.
pub fn hypercube_skeleton(deg: usize, k: usize) -> Result<CellComplex> {
    Ok(Hypercube::new(deg, k)?.complex)
}
