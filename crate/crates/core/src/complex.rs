//! Finite polyhedral chain complexes with exact signed incidence.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::Q;
use crate::error::{Error, Result};
use crate::linalg::QMat;

/// Column-compressed sparse integer matrix. Columns hold `(row, value)`
/// pairs sorted by row with no zero values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, cols: vec![Vec::new(); ncols] }
    }

    pub fn from_columns(nrows: usize, cols: Vec<Vec<(usize, i64)>>) -> Self {
        let ncols = cols.len();
        let cols = cols
            .into_iter()
            .map(|c| {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for (r, v) in c {
                    assert!(r < nrows, "row {r} out of range {nrows}");
                    *acc.entry(r).or_insert(0) += v;
                }
                acc.into_iter().filter(|&(_, v)| v != 0).collect()
            })
            .collect();
        SparseMatrix { nrows, ncols, cols }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, i64)>) -> Self {
        let mut cols = vec![Vec::new(); ncols];
        for (r, c, v) in triplets {
            cols[c].push((r, v));
        }
        Self::from_columns(nrows, cols)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_columns(n, (0..n).map(|i| vec![(i, 1)]).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn col(&self, j: usize) -> &[(usize, i64)] {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[Vec<(usize, i64)>] {
        &self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.cols[c].iter().find(|&&(i, _)| i == r).map_or(0, |&(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn max_abs(&self) -> i64 {
        self.cols.iter().flatten().map(|&(_, v)| v.abs()).max().unwrap_or(0)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.cols.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
    }

    pub fn row_lists(&self) -> Vec<Vec<(usize, i64)>> {
        let mut rows = vec![Vec::new(); self.nrows];
        for (r, c, v) in self.triplets() {
            rows[r].push((c, v));
        }
        rows
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, cols: self.row_lists() }
    }

    /// Exact product; panics on i64 overflow, which the incidence data never reaches.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows, "shape mismatch in sparse product");
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for &(k, b) in col {
                    for &(i, a) in &self.cols[k] {
                        let e = acc.entry(i).or_insert(0);
                        *e = e.checked_add(a.checked_mul(b).expect("overflow")).expect("overflow");
                    }
                }
                acc.into_iter().filter(|&(_, v)| v != 0).collect()
            })
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: other.ncols, cols }
    }

    pub fn to_q_rows(&self) -> QMat {
        let mut m = vec![vec![Q::from_integer(BigInt::from(0)); self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            m[r][c] = Q::from_integer(BigInt::from(v));
        }
        m
    }

    pub fn to_int_rows(&self) -> Vec<Vec<BigInt>> {
        let mut m = vec![vec![BigInt::from(0); self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            m[r][c] = BigInt::from(v);
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v as f64;
        }
        m
    }

    /// Maximum absolute column sum (the induced L¹ operator norm).
    pub fn norm_l1(&self) -> i64 {
        self.cols.iter().map(|c| c.iter().map(|&(_, v)| v.abs()).sum()).max().unwrap_or(0)
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> SparseMatrix {
        SparseMatrix { nrows: self.nrows, ncols: cols.len(), cols: cols.iter().map(|&c| self.cols[c].clone()).collect() }
    }

    /// Keeps only the listed rows, renumbered in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(k, &r)| (r, k)).collect();
        let cols = self
            .cols
            .iter()
            .map(|c| {
                let mut v: Vec<(usize, i64)> = c.iter().filter_map(|&(r, x)| pos.get(&r).map(|&k| (k, x))).collect();
                v.sort_unstable();
                v
            })
            .collect();
        SparseMatrix { nrows: rows.len(), ncols: self.ncols, cols }
    }
}

/// Identifier of a cell in a complex file: integers or strings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellId {
    Int(i64),
    Str(String),
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellId::Int(i) => write!(f, "{i}"),
            CellId::Str(s) => f.write_str(s),
        }
    }
}

/// A finite chain complex C_dims → … → C_0 (→ C_{−1} ≅ ℤ when augmented).
///
/// `incidence[i]` realizes ∂_i for `1 ≤ i ≤ dims`; `incidence[0]` is the
/// augmentation row when augmented and the empty `0 × n₀` map otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct CellComplex {
    name: String,
    augmented: bool,
    cells: Vec<Vec<String>>,
    incidence: Vec<SparseMatrix>,
    labels: Option<Vec<Vec<String>>>,
    loops: BTreeMap<usize, usize>,
    allow_closed: bool,
}

/// Raw ingredients for [`CellComplex::from_parts`].
#[derive(Clone, Debug, Default)]
pub struct ComplexParts {
    pub name: String,
    pub augmented: bool,
    /// Cell identifiers per dimension 0..=dims.
    pub cells: Vec<Vec<String>>,
    /// ∂_i for i = 1..=dims, in order.
    pub boundaries: Vec<SparseMatrix>,
    pub labels: Option<Vec<Vec<String>>>,
    /// Edges whose two ends are the same vertex: edge index → vertex index.
    pub loops: BTreeMap<usize, usize>,
    /// Permit positive-dimensional cells with zero boundary.
    pub allow_closed: bool,
}

impl CellComplex {
    pub fn from_parts(parts: ComplexParts) -> Result<Self> {
        let ComplexParts { name, augmented, cells, boundaries, labels, loops, allow_closed } = parts;
        if cells.is_empty() {
            return Err(Error::InvalidComplex("no cells".into()));
        }
        if boundaries.len() + 1 != cells.len() {
            return Err(Error::InvalidComplex(format!(
                "{} boundary maps for {} dimensions",
                boundaries.len(),
                cells.len()
            )));
        }
        let n0 = cells[0].len();
        let aug = if augmented {
            SparseMatrix::from_columns(1, (0..n0).map(|_| vec![(0, 1)]).collect())
        } else {
            SparseMatrix::zeros(0, n0)
        };
        let mut incidence = vec![aug];
        incidence.extend(boundaries);
        let x = CellComplex { name, augmented, cells, incidence, labels, loops, allow_closed };
        x.validate()?;
        Ok(x)
    }

    /// Checks shapes, ∂∂ = 0, nonzero columns and the augmentation row.
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidComplex(s));
        for i in 0..=self.dims() {
            let m = &self.incidence[i];
            let expect_rows = self.num_cells(i as isize - 1);
            if m.nrows() != expect_rows || m.ncols() != self.cells[i].len() {
                return bad(format!("∂_{i} has shape {}×{}, expected {}×{}", m.nrows(), m.ncols(), expect_rows, self.cells[i].len()));
            }
        }
        if self.augmented && self.incidence[0].columns().iter().any(|c| c.as_slice() != [(0, 1)]) {
            return bad("augmentation row must be all ones".into());
        }
        for i in 1..=self.dims() {
            if !self.allow_closed {
                if let Some(j) = self.incidence[i].columns().iter().position(Vec::is_empty) {
                    return bad(format!("{i}-cell {} has zero boundary", self.cells[i][j]));
                }
            }
            let prod = self.incidence[i - 1].mul(&self.incidence[i]);
            if !prod.is_zero() {
                return bad(format!("∂_{}∂_{i} ≠ 0", i - 1));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.cells.len() || labels.iter().zip(&self.cells).any(|(l, c)| l.len() != c.len()) {
                return bad("labels do not match cells".into());
            }
        }
        for (&e, &v) in &self.loops {
            if self.dims() < 1 || e >= self.cells[1].len() || v >= self.cells[0].len() {
                return bad(format!("loop entry ({e}, {v}) out of range"));
            }
            if !self.incidence[1].col(e).is_empty() {
                return bad(format!("loop edge {e} has nonzero boundary"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn augmented(&self) -> bool {
        self.augmented
    }

    pub fn allow_closed(&self) -> bool {
        self.allow_closed
    }

    /// The same complex with the augmentation switched on or off.
    pub fn with_augmentation(&self, augmented: bool) -> CellComplex {
        let mut x = self.clone();
        x.augmented = augmented;
        let n0 = x.cells[0].len();
        x.incidence[0] = if augmented {
            SparseMatrix::from_columns(1, (0..n0).map(|_| vec![(0, 1)]).collect())
        } else {
            SparseMatrix::zeros(0, n0)
        };
        x
    }

    pub fn dims(&self) -> usize {
        self.cells.len() - 1
    }

    /// Number of cells in dimension `d`; dimension −1 has one cell when augmented.
    pub fn num_cells(&self, d: isize) -> usize {
        match d {
            -1 => usize::from(self.augmented),
            d if d < -1 || d as usize > self.dims() => 0,
            d => self.cells[d as usize].len(),
        }
    }

    pub fn total_cells(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn cell_ids(&self, d: usize) -> &[String] {
        &self.cells[d]
    }

    pub fn labels(&self) -> Option<&Vec<Vec<String>>> {
        self.labels.as_ref()
    }

    pub fn loops(&self) -> &BTreeMap<usize, usize> {
        &self.loops
    }

    /// ∂_i : C_i → C_{i−1}.
    pub fn boundary_matrix(&self, i: usize) -> Result<&SparseMatrix> {
        self.incidence.get(i).ok_or(Error::Dimension { dim: i as isize, dims: self.dims() })
    }

    /// ∂_i for i in −1..=dims+1, with the zero maps at the ends.
    pub fn boundary_or_zero(&self, i: isize) -> SparseMatrix {
        if i >= 0 && (i as usize) <= self.dims() {
            self.incidence[i as usize].clone()
        } else {
            SparseMatrix::zeros(self.num_cells(i - 1), self.num_cells(i))
        }
    }

    /// d_i : C^i → C^{i+1}, the transpose of ∂_{i+1}.
    pub fn coboundary_matrix(&self, i: isize) -> SparseMatrix {
        self.boundary_or_zero(i + 1).transpose()
    }

    /// χ = Σ (−1)^i #cells[i], ignoring the augmentation.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells.iter().enumerate().map(|(i, c)| if i % 2 == 0 { c.len() as i64 } else { -(c.len() as i64) }).sum()
    }

    /// A = max over cells of (incident-cell count × max |entry|) for ∂_i;
    /// bounds both ‖∂_i c‖_p and ‖d_{i−1} c‖_p by A‖c‖_p.
    pub fn operator_bound(&self, i: usize) -> Result<i64> {
        let m = self.boundary_matrix(i)?;
        let col_count = m.columns().iter().map(Vec::len).max().unwrap_or(0);
        let row_count = m.row_lists().iter().map(Vec::len).max().unwrap_or(0);
        Ok(col_count.max(row_count) as i64 * m.max_abs())
    }

    /// The formally transposed complex: dimension j holds the cells of
    /// dimension dims − j, and ∂'_j = (∂_{dims−j+1})ᵀ. The augmentation cell
    /// becomes a top-dimensional cell; the result is not augmented.
    pub fn transpose(&self) -> CellComplex {
        let top = self.dims() as isize + isize::from(self.augmented);
        let orig_dim = |j: isize| self.dims() as isize - j;
        let mut cells = Vec::new();
        for j in 0..=top {
            let d = orig_dim(j);
            cells.push(if d == -1 { vec!["*".to_string()] } else { self.cells[d as usize].clone() });
        }
        let boundaries = (1..=top).map(|j| self.boundary_or_zero(orig_dim(j) + 1).transpose()).collect();
        let n_top = cells.len();
        CellComplex {
            name: format!("{}^T", self.name),
            augmented: false,
            incidence: {
                let mut v = vec![SparseMatrix::zeros(0, cells[0].len())];
                v.extend::<Vec<SparseMatrix>>(boundaries);
                debug_assert_eq!(v.len(), n_top);
                v
            },
            cells,
            labels: None,
            loops: BTreeMap::new(),
            allow_closed: true,
        }
    }

    /// Reorders the cells of dimension `d`: new cell k is old cell `perm[k]`.
    pub fn permute_cells(&self, d: usize, perm: &[usize]) -> Result<CellComplex> {
        let n = self.cells[d].len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Argument("not a permutation".into()));
        }
        let mut inv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        let mut x = self.clone();
        x.cells[d] = perm.iter().map(|&p| self.cells[d][p].clone()).collect();
        if let Some(labels) = &mut x.labels {
            labels[d] = perm.iter().map(|&p| self.labels.as_ref().unwrap()[d][p].clone()).collect();
        }
        x.incidence[d] = self.incidence[d].select_columns(perm);
        if d < self.dims() {
            let m = &self.incidence[d + 1];
            x.incidence[d + 1] = SparseMatrix::from_columns(
                m.nrows(),
                m.columns().iter().map(|c| c.iter().map(|&(r, v)| (inv[r], v)).collect()).collect(),
            );
        }
        if d == 1 {
            x.loops = self.loops.iter().map(|(&e, &v)| (inv[e], v)).collect();
        }
        if d == 0 {
            x.loops = self.loops.iter().map(|(&e, &v)| (e, inv[v])).collect();
        }
        Ok(x)
    }

    /// (tail, head) of an edge; loops report the same vertex twice.
    pub fn edge_endpoints(&self, e: usize) -> Result<(usize, usize)> {
        if self.dims() < 1 || e >= self.cells[1].len() {
            return Err(Error::Dimension { dim: 1, dims: self.dims() });
        }
        match self.incidence[1].col(e) {
            [] => self
                .loops
                .get(&e)
                .map(|&v| (v, v))
                .or_else(|| (self.cells[0].len() == 1).then_some((0, 0)))
                .ok_or_else(|| Error::InvalidComplex(format!("edge {e} has no boundary and no loop vertex"))),
            [(a, -1), (b, 1)] => Ok((*a, *b)),
            [(a, 1), (b, -1)] => Ok((*b, *a)),
            _ => Err(Error::InvalidComplex(format!("edge {e} is not a simple edge"))),
        }
    }

    /// Neighbor lists of the 1-skeleton as (vertex, edge), loops omitted.
    pub fn adjacency(&self) -> Result<Vec<Vec<(usize, usize)>>> {
        let mut adj = vec![Vec::new(); self.cells[0].len()];
        if self.dims() >= 1 {
            for e in 0..self.cells[1].len() {
                let (a, b) = self.edge_endpoints(e)?;
                if a != b {
                    adj[a].push((b, e));
                    adj[b].push((a, e));
                }
            }
        }
        Ok(adj)
    }

    /// BFS distances in the 1-skeleton from `source` (None if unreachable).
    pub fn bfs_distances(&self, source: usize) -> Result<Vec<Option<usize>>> {
        let adj = self.adjacency()?;
        let mut dist = vec![None; adj.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(w, _) in &adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Graph diameter of the 1-skeleton with unit edge lengths.
    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for v in 0..self.cells[0].len() {
            for d in self.bfs_distances(v)? {
                best = best.max(d.ok_or(Error::Disconnected)?);
            }
        }
        Ok(best)
    }

    pub fn is_connected(&self) -> Result<bool> {
        if self.cells[0].is_empty() {
            return Ok(true);
        }
        Ok(self.bfs_distances(0)?.iter().all(Option::is_some))
    }

    fn to_file(&self) -> ComplexFile {
        let mut incidence = Vec::new();
        for i in 1..=self.dims() {
            for (r, c, v) in self.incidence[i].triplets() {
                incidence.push([i as i64, r as i64, c as i64, v]);
            }
        }
        ComplexFile {
            name: self.name.clone(),
            augmented: self.augmented,
            cells: Some(self.cells.iter().map(|d| d.iter().map(|s| CellId::Str(s.clone())).collect()).collect()),
            facets: None,
            incidence: Some(incidence),
            loops: (!self.loops.is_empty()).then(|| self.loops.iter().map(|(&e, &v)| [e, v]).collect()),
            allow_closed: self.allow_closed,
            labels: self.labels.clone(),
            provenance: None,
        }
    }

    /// Canonical JSON form (explicit cells and incidence triples).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("serializable")
    }

    pub fn to_json_pretty(&self, provenance: Option<serde_json::Value>) -> String {
        let mut f = self.to_file();
        f.provenance = provenance;
        serde_json::to_string_pretty(&f).expect("serializable")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn from_json(text: &str) -> Result<CellComplex> {
        let f: ComplexFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.into_complex()
    }
}

fn default_true() -> bool {
    true
}

/// On-disk complex format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexFile {
    name: String,
    #[serde(default = "default_true")]
    augmented: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<Vec<CellId>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    facets: Option<Vec<Vec<CellId>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    incidence: Option<Vec<[i64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loops: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

impl ComplexFile {
    fn into_complex(self) -> Result<CellComplex> {
        let mut x = match (self.facets, self.cells, self.incidence) {
            (Some(facets), None, None) => build_simplicial(&facets)?,
            (None, Some(cells), incidence) => {
                if cells.len() > 1 && incidence.is_none() {
                    return Err(Error::Parse("explicit cells above dimension 0 need incidence triples".into()));
                }
                let ids: Vec<Vec<String>> = cells.iter().map(|d| d.iter().map(ToString::to_string).collect()).collect();
                let dims = ids.len().saturating_sub(1);
                let mut trip: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); dims + 1];
                for [d, r, c, v] in incidence.unwrap_or_default() {
                    if d < 1 || d as usize > dims {
                        return Err(Error::Parse(format!("incidence dimension {d} out of range 1..={dims}")));
                    }
                    let (d, r, c) = (d as usize, r as usize, c as usize);
                    if r >= ids[d - 1].len() || c >= ids[d].len() {
                        return Err(Error::Parse(format!("incidence entry ({d}, {r}, {c}) out of range")));
                    }
                    trip[d].push((r, c, v));
                }
                let boundaries = (1..=dims)
                    .map(|d| SparseMatrix::from_triplets(ids[d - 1].len(), ids[d].len(), std::mem::take(&mut trip[d])))
                    .collect();
                CellComplex::from_parts(ComplexParts {
                    name: self.name.clone(),
                    augmented: self.augmented,
                    cells: ids,
                    boundaries,
                    labels: None,
                    loops: self.loops.unwrap_or_default().into_iter().map(|[e, v]| (e, v)).collect(),
                    allow_closed: self.allow_closed,
                })?
            }
            _ => return Err(Error::Parse("exactly one of \"facets\" or \"cells\" (+ \"incidence\") must be given".into())),
        };
        x.name = self.name;
        x = x.with_augmentation(self.augmented);
        if let Some(labels) = self.labels {
            x.labels = Some(labels);
            x.validate()?;
        }
        Ok(x)
    }
}

/// Downward closure of a facet list, simplices oriented by ascending vertex
/// order and listed lexicographically in each dimension.
pub fn build_simplicial<V: Ord + Clone + fmt::Display>(facets: &[Vec<V>]) -> Result<CellComplex> {
    if facets.is_empty() || facets.iter().any(Vec::is_empty) {
        return Err(Error::InvalidComplex("facet list and facets must be nonempty".into()));
    }
    let vertices: Vec<V> = facets.iter().flatten().cloned().collect::<BTreeSet<V>>().into_iter().collect();
    let index = |v: &V| vertices.binary_search(v).unwrap();
    let mut faces: Vec<BTreeSet<Vec<usize>>> = Vec::new();
    for f in facets {
        let mut s: Vec<usize> = f.iter().map(index).collect();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedFacet(f.iter().map(ToString::to_string).collect()));
        }
        if s.len() > 24 {
            return Err(Error::Size(format!("facet with {} vertices", s.len())));
        }
        let k = s.len();
        if faces.len() < k {
            faces.resize(k, BTreeSet::new());
        }
        for mask in 1u32..(1u32 << k) {
            let face: Vec<usize> = (0..k).filter(|&j| mask >> j & 1 == 1).map(|j| s[j]).collect();
            faces[face.len() - 1].insert(face);
        }
    }
    let faces: Vec<Vec<Vec<usize>>> = faces.into_iter().map(|s| s.into_iter().collect()).collect();
    let pos: Vec<HashMap<&Vec<usize>, usize>> =
        faces.iter().map(|d| d.iter().enumerate().map(|(i, f)| (f, i)).collect()).collect();
    let mut boundaries = Vec::new();
    for d in 1..faces.len() {
        let cols = faces[d]
            .iter()
            .map(|s| {
                (0..s.len())
                    .map(|j| {
                        let mut face = s.clone();
                        face.remove(j);
                        (pos[d - 1][&face], if j % 2 == 0 { 1 } else { -1 })
                    })
                    .collect()
            })
            .collect();
        boundaries.push(SparseMatrix::from_columns(faces[d - 1].len(), cols));
    }
    let cells = faces
        .iter()
        .map(|d| d.iter().map(|s| s.iter().map(|&v| vertices[v].to_string()).collect::<Vec<_>>().join("-")).collect())
        .collect();
    CellComplex::from_parts(ComplexParts {
        name: "simplicial".into(),
        augmented: true,
        cells,
        boundaries,
        ..Default::default()
    })
}
