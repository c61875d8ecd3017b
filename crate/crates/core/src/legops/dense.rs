use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::space::ModelSpace;
use super::structured::StructuredOperator;
use crate::error::{argument, Error, Result};
use crate::linalg::{c, Mat, Vector, C64};

/// Default bound on `N^(2m)` for anything that materializes a dense matrix.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// An explicit matrix on the full model space.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    space: ModelSpace,
    matrix: Mat,
}

impl DenseOperator {
    pub fn new(space: ModelSpace, matrix: Mat) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(DenseOperator { space, matrix })
    }

    pub fn identity(space: ModelSpace) -> Self {
        DenseOperator { space, matrix: Mat::identity(space.dim(), space.dim()) }
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.space.ensure_same(&inner.space)?;
        Ok(DenseOperator { space: self.space, matrix: &self.matrix * &inner.matrix })
    }

    pub fn normalized_trace(&self) -> C64 {
        self.matrix.trace() / c(self.space.dim() as f64)
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), got: v.len() });
        }
        Ok(&self.matrix * v)
    }

    pub fn write_binary<W: Write>(&self, out: W) -> Result<()> {
        write_flat(out, &self.space, self.matrix.nrows(), self.matrix.ncols(), |i, j| self.matrix[(i, j)])
    }

    pub fn read_binary<R: Read>(input: R) -> Result<Self> {
        let (header, data) = read_flat(input)?;
        let space = header.space()?;
        if header.rows != space.dim() || header.cols != space.dim() {
            return Err(argument("binary header does not describe a square operator"));
        }
        let matrix = Mat::from_row_slice(header.rows, header.cols, &data);
        DenseOperator::new(space, matrix)
    }
}

impl StructuredOperator {
    pub fn to_dense(&self) -> Result<DenseOperator> {
        self.to_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseOperator> {
        let space = *self.space();
        let d = space.dim();
        if d > cap {
            return Err(Error::CapExceeded { dimension: d, cap });
        }
        let n = space.n();
        let mut out = Mat::zeros(d, d);
        for term in self.terms() {
            let mut k = Mat::identity(1, 1);
            for f in &term.factors {
                k = k.kronecker(&f.to_matrix(n));
            }
            // (K P)[:, col] = K[:, map[col]]
            let map = space.permutation_index_map(&term.sigma);
            for (col, &src) in map.iter().enumerate() {
                let mut dst = out.column_mut(col);
                dst.axpy(term.coefficient, &k.column(src), c(1.0));
            }
        }
        Ok(DenseOperator { space, matrix: out })
    }
}

/// Header of the flat binary layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatHeader {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub rows: usize,
    pub cols: usize,
}

impl FlatHeader {
    fn space(&self) -> Result<ModelSpace> {
        let space = ModelSpace::new(self.n, self.p, self.q)?;
        if space.legs() != self.m {
            return Err(argument("binary header has m != p + q"));
        }
        Ok(space)
    }
}

const MAGIC: &[u8; 4] = b"SWLB";

/// Writes `MAGIC`, a little-endian `u32` header length, the JSON header, and
/// then the entries row-major as interleaved little-endian `f64` pairs.
fn write_flat<W: Write>(
    mut out: W,
    space: &ModelSpace,
    rows: usize,
    cols: usize,
    entry: impl Fn(usize, usize) -> C64,
) -> Result<()> {
    let header = FlatHeader { n: space.n(), p: space.p(), q: space.q(), m: space.legs(), rows, cols };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    let mut buf = Vec::with_capacity(rows * cols * 16);
    for i in 0..rows {
        for j in 0..cols {
            let z = entry(i, j);
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_flat<R: Read>(mut input: R) -> Result<(FlatHeader, Vec<C64>)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(argument("not a flat operator file"));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut json)?;
    let header: FlatHeader = serde_json::from_slice(&json)?;
    let count = header.rows * header.cols;
    let mut raw = vec![0u8; count * 16];
    input.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
            let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    Ok((header, data))
}

/// Writes a model-space vector in the flat layout (`cols = 1`).
pub fn write_vector<W: Write>(out: W, space: &ModelSpace, v: &Vector) -> Result<()> {
    if v.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: v.len() });
    }
    write_flat(out, space, v.len(), 1, |i, _| v[i])
}

pub fn read_vector<R: Read>(input: R) -> Result<(ModelSpace, Vector)> {
    let (header, data) = read_flat(input)?;
    let space = header.space()?;
    if header.cols != 1 || header.rows != space.dim() {
        return Err(argument("binary header does not describe a vector"));
    }
    Ok((space, Vector::from_vec(data)))
}
