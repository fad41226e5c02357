use std::collections::BTreeMap;

use serde::Serialize;

use crate::complex::{build_simplicial, CellComplex, ComplexParts, SparseMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct FixtureInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub h1: &'static str,
}

/// The fixture library. Parametrized entries take an integer argument.
pub const FIXTURES: &[FixtureInfo] = &[
    FixtureInfo { name: "rp2-6", description: "six-vertex real projective plane, 10 triangles", h1: "Z/2" },
    FixtureInfo { name: "klein-8", description: "eight-vertex Klein bottle, 16 triangles", h1: "Z + Z/2" },
    FixtureInfo { name: "torus-7", description: "seven-vertex Möbius torus, 14 triangles", h1: "Z^2" },
    FixtureInfo {
        name: "zn-presentation(n)",
        description: "presentation complex of Z/n: one vertex, one loop, one 2-cell attached by degree n",
        h1: "Z/n",
    },
    FixtureInfo {
        name: "moore-z2",
        description: "Moore space M(Z/2,1): a two-edge circle with one 2-cell attached by degree 2",
        h1: "Z/2",
    },
    FixtureInfo {
        name: "lens-cw(p)",
        description: "minimal CW lens space L(p,1): one cell in each dimension 0..3",
        h1: "Z/p",
    },
];

const RP2_6: [[u8; 3]; 10] = [
    [0, 1, 2],
    [0, 1, 3],
    [0, 2, 4],
    [0, 3, 5],
    [0, 4, 5],
    [1, 2, 5],
    [1, 3, 4],
    [1, 4, 5],
    [2, 3, 4],
    [2, 3, 5],
];

const KLEIN_8: [[u8; 3]; 16] = [
    [0, 1, 2],
    [0, 1, 3],
    [0, 2, 4],
    [0, 3, 4],
    [1, 2, 5],
    [1, 3, 6],
    [1, 4, 5],
    [1, 4, 6],
    [2, 3, 5],
    [2, 3, 7],
    [2, 4, 6],
    [2, 6, 7],
    [3, 4, 7],
    [3, 5, 6],
    [4, 5, 7],
    [5, 6, 7],
];

fn torus7_facets() -> Vec<Vec<usize>> {
    (0..7).flat_map(|i| [vec![i, (i + 1) % 7, (i + 3) % 7], vec![i, (i + 2) % 7, (i + 3) % 7]]).collect()
}

fn parse_param(name: &str, prefix: &str) -> Option<Result<usize>> {
    let rest = name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(rest.trim().parse::<usize>().map_err(|_| Error::UnknownName(name.to_string())))
}

/// Presentation complex of ℤ/n.
pub fn zn_presentation(n: usize) -> Result<CellComplex> {
    if n == 0 {
        return Err(Error::Argument("zn-presentation needs n ≥ 1".into()));
    }
    CellComplex::from_parts(ComplexParts {
        name: format!("zn-presentation({n})"),
        augmented: true,
        cells: vec![vec!["v".into()], vec!["a".into()], vec!["f".into()]],
        boundaries: vec![SparseMatrix::zeros(1, 1), SparseMatrix::from_columns(1, vec![vec![(0, n as i64)]])],
        labels: None,
        loops: BTreeMap::from([(0, 0)]),
        allow_closed: true,
    })
}

fn moore_z2() -> Result<CellComplex> {
    CellComplex::from_parts(ComplexParts {
        name: "moore-z2".into(),
        augmented: true,
        cells: vec![vec!["v0".into(), "v1".into()], vec!["a".into(), "b".into()], vec!["f".into()]],
        boundaries: vec![
            SparseMatrix::from_columns(2, vec![vec![(0, -1), (1, 1)], vec![(0, 1), (1, -1)]]),
            SparseMatrix::from_columns(2, vec![vec![(0, 2), (1, 2)]]),
        ],
        labels: None,
        loops: BTreeMap::new(),
        allow_closed: false,
    })
}

/// CW lens space L(p,1) with one cell per dimension.
pub fn lens_cw(p: usize) -> Result<CellComplex> {
    if p == 0 {
        return Err(Error::Argument("lens-cw needs p ≥ 1".into()));
    }
    CellComplex::from_parts(ComplexParts {
        name: format!("lens-cw({p})"),
        augmented: true,
        cells: vec![vec!["v".into()], vec!["a".into()], vec!["f".into()], vec!["t".into()]],
        boundaries: vec![
            SparseMatrix::zeros(1, 1),
            SparseMatrix::from_columns(1, vec![vec![(0, p as i64)]]),
            SparseMatrix::zeros(1, 1),
        ],
        labels: None,
        loops: BTreeMap::from([(0, 0)]),
        allow_closed: true,
    })
}

fn with_name(mut x: CellComplex, name: &str) -> CellComplex {
    x.set_name(name);
    x
}

/// Looks up a fixture by name, e.g. "rp2-6" or "zn-presentation(5)".
pub fn named_complex(name: &str) -> Result<CellComplex> {
    let name = name.trim();
    if let Some(n) = parse_param(name, "zn-presentation") {
        return zn_presentation(n?);
    }
    if let Some(p) = parse_param(name, "lens-cw") {
        return lens_cw(p?);
    }
    match name {
        "rp2-6" => Ok(with_name(build_simplicial(&RP2_6.map(|f| f.to_vec()))?, name)),
        "klein-8" => Ok(with_name(build_simplicial(&KLEIN_8.map(|f| f.to_vec()))?, name)),
        "torus-7" => Ok(with_name(build_simplicial(&torus7_facets())?, name)),
        "moore-z2" => moore_z2(),
        _ => Err(Error::UnknownName(name.to_string())),
    }
}
